//! The four online policies: bin assignment with weight rounding, bin
//! opening for the combined policy, and the processing choice.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::bins::{BinFamily, BinKey, BinState, JobState};
use crate::instance::Job;
use crate::rational::{floor_log2, pow2, Rat};

/// Which policy drives a run.
///
/// `Proc` bins by processing-time class, `Density` by density class,
/// `Weight` by weight class, and `Combined` opens bins of all three
/// families on demand, preferring already-open ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchedulerKind {
    Proc,
    Density,
    Weight,
    Combined,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::Proc,
        SchedulerKind::Density,
        SchedulerKind::Weight,
        SchedulerKind::Combined,
    ];

    /// Policies whose bin scores are piecewise constant between events, and
    /// can therefore be simulated exactly.
    pub fn supports_exact(self) -> bool {
        matches!(self, SchedulerKind::Proc | SchedulerKind::Weight)
    }

    pub fn label(self) -> &'static str {
        match self {
            SchedulerKind::Proc => "proc",
            SchedulerKind::Density => "density",
            SchedulerKind::Weight => "weight",
            SchedulerKind::Combined => "combined",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p" | "proc" => Ok(SchedulerKind::Proc),
            "d" | "density" | "dens" => Ok(SchedulerKind::Density),
            "w" | "weight" => Ok(SchedulerKind::Weight),
            "min" | "combined" => Ok(SchedulerKind::Combined),
            other => Err(format!("unknown algorithm `{other}` (use p, d, w or min)")),
        }
    }
}

/// The outcome of assigning one job: its bin, the weight it was rounded to,
/// and any bins the combined policy opened for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub bin: BinKey,
    pub rounded_weight: Rat,
    pub newly_opened: Vec<BinKey>,
}

/// Processing-time rule: bin by `⌊log₂ p⌋`, round the weight up to the next
/// power of two (strictly, so powers of two double).
pub fn assign_proc(job: &Job) -> Assignment {
    let class = floor_log2(job.proc()).expect("p > 0");
    let rounded = pow2(floor_log2(job.weight()).expect("w > 0") + 1);
    Assignment {
        bin: BinKey::new(BinFamily::ProcTime, class),
        rounded_weight: rounded,
        newly_opened: Vec::new(),
    }
}

/// Density rule: bin by `⌊log₂ d⌋` of the original density, then raise the
/// weight so the rounded density is exactly `2^i`.
pub fn assign_dens(job: &Job) -> Assignment {
    let class = floor_log2(&job.density()).expect("d > 0");
    let rounded = job.proc() / pow2(class);
    Assignment {
        bin: BinKey::new(BinFamily::Density, class),
        rounded_weight: rounded,
        newly_opened: Vec::new(),
    }
}

/// Weight rule: round the weight up to `2^(⌊log₂ w⌋+1)` and bin by that
/// exponent.
pub fn assign_weight(job: &Job) -> Assignment {
    let class = floor_log2(job.weight()).expect("w > 0") + 1;
    Assignment {
        bin: BinKey::new(BinFamily::Weight, class),
        rounded_weight: pow2(class),
        newly_opened: Vec::new(),
    }
}

/// Live scheduler state: the bins (sparse) and, for the combined policy,
/// the set of bins opened so far. Opened bins never close.
#[derive(Debug, Clone)]
pub struct SchedulerState {
    pub kind: SchedulerKind,
    pub bins: BTreeMap<BinKey, BinState>,
    pub open_keys: BTreeSet<BinKey>,
}

impl SchedulerState {
    pub fn new(kind: SchedulerKind) -> Self {
        SchedulerState {
            kind,
            bins: BTreeMap::new(),
            open_keys: BTreeSet::new(),
        }
    }

    /// Decides the assignment for `job` without mutating the state.
    pub fn plan(&self, job: &Job) -> Assignment {
        match self.kind {
            SchedulerKind::Proc => assign_proc(job),
            SchedulerKind::Density => assign_dens(job),
            SchedulerKind::Weight => assign_weight(job),
            SchedulerKind::Combined => assign_combined(job, self),
        }
    }

    /// Assigns `job`: opens any bins the plan calls for and stacks the job
    /// into its bin.
    pub fn assign(&mut self, job: &Job) -> Assignment {
        let assignment = self.plan(job);
        for key in &assignment.newly_opened {
            self.open_keys.insert(*key);
            self.bins.entry(*key).or_insert_with(|| BinState::new(*key));
        }
        let bin = self
            .bins
            .entry(assignment.bin)
            .or_insert_with(|| BinState::new(assignment.bin));
        bin.insert(JobState::new(job.clone(), assignment.rounded_weight.clone()));
        assignment
    }

    pub fn all_empty(&self) -> bool {
        self.bins.values().all(BinState::is_empty)
    }
}

/// Combined rule: prefer the open processing-time bin, then the open density
/// bin, then the open weight bin; otherwise open all three and assign to the
/// weight bin.
pub fn assign_combined(job: &Job, state: &SchedulerState) -> Assignment {
    let by_proc = assign_proc(job);
    if state.open_keys.contains(&by_proc.bin) {
        return by_proc;
    }
    let by_dens = assign_dens(job);
    if state.open_keys.contains(&by_dens.bin) {
        return by_dens;
    }
    let by_weight = assign_weight(job);
    if state.open_keys.contains(&by_weight.bin) {
        return by_weight;
    }
    Assignment {
        newly_opened: vec![by_proc.bin, by_dens.bin, by_weight.bin],
        ..by_weight
    }
}

/// Picks the bin to process: the nonempty bin of maximal score. Ties go to
/// the currently processed bin when it is among the maximizers, then to the
/// smallest key in (family, index) order.
pub fn select_bin(state: &SchedulerState, current: Option<&BinKey>) -> Option<BinKey> {
    let mut best: Option<(BinKey, Rat)> = None;
    for (key, bin) in &state.bins {
        let Some(score) = bin.score() else { continue };
        match &best {
            Some((_, best_score)) if *best_score >= score => {}
            _ => best = Some((*key, score)),
        }
    }
    let (best_key, best_score) = best?;
    if let Some(cur) = current {
        if let Some(bin) = state.bins.get(cur) {
            if bin.score() == Some(best_score.clone()) {
                return Some(*cur);
            }
        }
    }
    Some(best_key)
}
