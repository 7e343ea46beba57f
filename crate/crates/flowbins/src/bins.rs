//! Bin state: the priority order, bases, contribution functions, per-bar
//! totals and the per-family bin scores.
//!
//! A bin stacks its alive jobs bottom-to-top in the priority order; only the
//! top job of a bin is ever processed. Placing a horizontal bar at height
//! `x` asks how much remaining volume sits below the bar; each family has
//! its own contribution function answering that question, and the bin score
//! used for processing decisions equals the bar height at which the top
//! job's whole remaining volume first fits below the bar.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::instance::Job;
use crate::rational::{floor_log2, pow2, rat_int, Rat};

/// The three bin families: keyed by processing-time class, by density class,
/// or by weight class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinFamily {
    ProcTime,
    Density,
    Weight,
}

impl BinFamily {
    pub fn label(self) -> &'static str {
        match self {
            BinFamily::ProcTime => "proc",
            BinFamily::Density => "dens",
            BinFamily::Weight => "weight",
        }
    }
}

/// Identifies one bin: its family and power-of-two class index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinKey {
    pub family: BinFamily,
    pub index: i64,
}

impl BinKey {
    pub fn new(family: BinFamily, index: i64) -> Self {
        BinKey { family, index }
    }
}

impl fmt::Display for BinKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.family.label(), self.index)
    }
}

/// One alive job inside a bin: the underlying job, the weight the scheduler
/// rounded it to, and its remaining volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobState {
    job: Job,
    rounded_weight: Rat,
    remaining: Rat,
}

impl JobState {
    pub fn new(job: Job, rounded_weight: Rat) -> Self {
        assert!(rounded_weight >= *job.weight(), "rounding never lowers a weight");
        assert!(
            rounded_weight < job.weight() * rat_int(2),
            "rounding stays below a factor of 2"
        );
        let remaining = job.proc().clone();
        JobState { job, rounded_weight, remaining }
    }

    /// Test/verification constructor with an explicit remaining volume.
    pub fn with_remaining(job: Job, rounded_weight: Rat, remaining: Rat) -> Self {
        assert!(remaining.is_positive() && remaining <= *job.proc());
        JobState { job, rounded_weight, remaining }
    }

    pub fn job(&self) -> &Job {
        &self.job
    }

    pub fn index(&self) -> u64 {
        self.job.index()
    }

    pub fn weight(&self) -> &Rat {
        &self.rounded_weight
    }

    pub fn remaining(&self) -> &Rat {
        &self.remaining
    }

    /// Current density `d_t(J) = p_t(J) / w(J)` on the rounded weight.
    pub fn current_density(&self) -> Rat {
        &self.remaining / &self.rounded_weight
    }
}

/// The within-bin priority order: `a` precedes `b` (sits lower in the stack)
/// iff `a` has a smaller weight class, or the same class and higher current
/// density, or the same class and density and a larger index.
///
/// Weights compared are the rounded ones the scheduler sees.
///
/// Panics when comparing a job with itself.
pub fn prec_less(a: &JobState, b: &JobState) -> bool {
    assert_ne!(a.index(), b.index(), "a job does not precede itself");
    let class_a = floor_log2(&a.rounded_weight).expect("weights are positive");
    let class_b = floor_log2(&b.rounded_weight).expect("weights are positive");
    if class_a != class_b {
        return class_a < class_b;
    }
    // d_t(a) > d_t(b) without dividing: p_a·w_b > p_b·w_a.
    let lhs = &a.remaining * &b.rounded_weight;
    let rhs = &b.remaining * &a.rounded_weight;
    if lhs != rhs {
        return lhs > rhs;
    }
    b.index() < a.index()
}

/// Which one-sided value of a piecewise function to evaluate at `x`: the
/// function value itself (right limit, since all contribution functions are
/// right-continuous) or the limit from the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Contribution function of processing-time bins `A_i`: everything below the
/// bar counts fully, the half-open middle band counts `min(2^i, p)`.
pub fn mu_proc(i: i64, x: &Rat, w: &Rat, p: &Rat, h: &Rat) -> Rat {
    mu_proc_at(i, x, w, p, h, Side::Right)
}

pub fn mu_proc_at(i: i64, x: &Rat, w: &Rat, p: &Rat, h: &Rat, side: Side) -> Rat {
    assert!(w.is_positive() && p.is_positive(), "mu requires positive w and p");
    let mid = h + w / rat_int(2);
    let top = h + w;
    let above = |threshold: &Rat| match side {
        Side::Right => x >= threshold,
        Side::Left => x > threshold,
    };
    if above(&top) {
        p.clone()
    } else if above(&mid) {
        pow2(i).min(p.clone())
    } else {
        Rat::zero()
    }
}

/// Contribution function of density bins `A'_i`: the job's virtual copy is
/// shifted up by `2^{lg w}` and fills at rate `2^i` per unit of bar height.
pub fn mu_dens(i: i64, x: &Rat, w: &Rat, p: &Rat, h: &Rat) -> Rat {
    mu_dens_at(i, x, w, p, h, Side::Right)
}

pub fn mu_dens_at(i: i64, x: &Rat, w: &Rat, p: &Rat, h: &Rat, _side: Side) -> Rat {
    assert!(w.is_positive() && p.is_positive(), "mu requires positive w and p");
    // Continuous in x, so both one-sided values agree.
    let kappa = h + pow2(floor_log2(w).expect("w > 0"));
    let full = &kappa + p / pow2(i);
    if *x >= full {
        p.clone()
    } else if *x >= kappa {
        pow2(i) * (x - kappa)
    } else {
        Rat::zero()
    }
}

/// Contribution function of weight bins `A''_j`: all or nothing at `h + w`.
pub fn mu_weight(x: &Rat, w: &Rat, p: &Rat, h: &Rat) -> Rat {
    mu_weight_at(x, w, p, h, Side::Right)
}

pub fn mu_weight_at(x: &Rat, w: &Rat, p: &Rat, h: &Rat, side: Side) -> Rat {
    assert!(w.is_positive() && p.is_positive(), "mu requires positive w and p");
    let top = h + w;
    let above = match side {
        Side::Right => *x >= top,
        Side::Left => *x > top,
    };
    if above {
        p.clone()
    } else {
        Rat::zero()
    }
}

/// One bin's alive jobs, kept sorted bottom-to-top by the priority order.
/// The last element is the top job, the only one the scheduler may process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinState {
    key: BinKey,
    jobs: Vec<JobState>,
}

impl BinState {
    pub fn new(key: BinKey) -> Self {
        BinState { key, jobs: Vec::new() }
    }

    /// Builds a bin with an explicit bottom-to-top stacking, without
    /// re-sorting. Intended for tests and for negative-control states that
    /// a real run could never reach.
    pub fn from_stacked_jobs(key: BinKey, jobs: Vec<JobState>) -> Self {
        BinState { key, jobs }
    }

    pub fn key(&self) -> BinKey {
        self.key
    }

    pub fn jobs(&self) -> &[JobState] {
        &self.jobs
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn top(&self) -> Option<&JobState> {
        self.jobs.last()
    }

    /// Inserts a job at its position under the priority order. The order of
    /// already-stacked jobs never changes afterwards, so a single placement
    /// per job suffices.
    pub fn insert(&mut self, state: JobState) {
        let pos = self.jobs.partition_point(|existing| prec_less(existing, &state));
        self.jobs.insert(pos, state);
    }

    /// Reduces the top job's remaining volume by `amount`.
    pub fn process_top(&mut self, amount: &Rat) {
        let top = self.jobs.last_mut().expect("processing an empty bin");
        assert!(*amount <= top.remaining, "cannot process past completion");
        top.remaining = &top.remaining - amount;
    }

    /// Removes and returns the top job (used at completion).
    pub fn pop_top(&mut self) -> Option<JobState> {
        self.jobs.pop()
    }

    pub fn position_of(&self, job_index: u64) -> Option<usize> {
        self.jobs.iter().position(|s| s.index() == job_index)
    }

    /// Total rounded weight of the bin.
    pub fn total_weight(&self) -> Rat {
        self.jobs.iter().fold(Rat::zero(), |acc, s| acc + &s.rounded_weight)
    }

    /// Total remaining volume of the bin.
    pub fn total_remaining(&self) -> Rat {
        self.jobs.iter().fold(Rat::zero(), |acc, s| acc + &s.remaining)
    }

    /// The base of the job at `pos`: total rounded weight stacked strictly
    /// below it.
    pub fn base_at(&self, pos: usize) -> Rat {
        self.jobs[..pos]
            .iter()
            .fold(Rat::zero(), |acc, s| acc + &s.rounded_weight)
    }

    /// The base of a job by index, or `None` when not in this bin.
    pub fn base(&self, job_index: u64) -> Option<Rat> {
        self.position_of(job_index).map(|pos| self.base_at(pos))
    }

    /// Contribution of the job at `pos` to the bar at height `x`.
    pub fn contribution_at(&self, pos: usize, x: &Rat, side: Side) -> Rat {
        let state = &self.jobs[pos];
        let base = self.base_at(pos);
        match self.key.family {
            BinFamily::ProcTime => {
                mu_proc_at(self.key.index, x, &state.rounded_weight, &state.remaining, &base, side)
            }
            BinFamily::Density => {
                mu_dens_at(self.key.index, x, &state.rounded_weight, &state.remaining, &base, side)
            }
            BinFamily::Weight => {
                mu_weight_at(x, &state.rounded_weight, &state.remaining, &base, side)
            }
        }
    }

    /// Contribution of a job by index, or `None` when not in this bin.
    pub fn contribution(&self, job_index: u64, x: &Rat) -> Option<Rat> {
        self.position_of(job_index)
            .map(|pos| self.contribution_at(pos, x, Side::Right))
    }

    /// Total contribution of the bin to the bar at height `x`.
    pub fn bar_total(&self, x: &Rat, side: Side) -> Rat {
        (0..self.jobs.len()).fold(Rat::zero(), |acc, pos| acc + self.contribution_at(pos, x, side))
    }

    /// The bar heights at which the job at `pos` changes its contribution
    /// behaviour, in ascending order.
    pub fn job_breakpoints(&self, pos: usize) -> [Rat; 2] {
        let state = &self.jobs[pos];
        let base = self.base_at(pos);
        match self.key.family {
            BinFamily::ProcTime | BinFamily::Weight => {
                let mid = &base + &state.rounded_weight / rat_int(2);
                let top = &base + &state.rounded_weight;
                [mid, top]
            }
            BinFamily::Density => {
                let kappa = &base + pow2(floor_log2(&state.rounded_weight).expect("w > 0"));
                let full = &kappa + &state.remaining / pow2(self.key.index);
                [kappa, full]
            }
        }
    }

    /// All bar heights at which the bin total changes slope or jumps,
    /// sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<Rat> {
        let mut points: Vec<Rat> = (0..self.jobs.len())
            .flat_map(|pos| self.job_breakpoints(pos))
            .collect();
        points.sort();
        points.dedup();
        points
    }

    /// The bin score driving the processing decision, or `None` for an empty
    /// bin.
    ///
    /// Processing-time bins discount half the top job's weight once its
    /// remaining volume has dropped to `2^i`; density bins score the top job
    /// between its rounded-down weight and that plus its full weight,
    /// linearly in its remaining volume; weight bins score their total
    /// weight.
    pub fn score(&self) -> Option<Rat> {
        let top = self.top()?;
        let total = self.total_weight();
        Some(match self.key.family {
            BinFamily::ProcTime => {
                let crossed = top.remaining <= pow2(self.key.index);
                if crossed {
                    total - &top.rounded_weight / rat_int(2)
                } else {
                    total
                }
            }
            BinFamily::Density => {
                let below = total - &top.rounded_weight;
                below
                    + pow2(floor_log2(&top.rounded_weight).expect("w > 0"))
                    + &top.remaining / pow2(self.key.index)
            }
            BinFamily::Weight => total,
        })
    }

    /// The bin height: the smallest bar height at which the top job
    /// contributes its whole remaining volume. Computed by probing the top
    /// job's own breakpoints with the contribution function, so it is an
    /// independent route to the same value as [`BinState::score`].
    pub fn height(&self) -> Option<Rat> {
        if self.jobs.is_empty() {
            return None;
        }
        let top_pos = self.jobs.len() - 1;
        let remaining = self.jobs[top_pos].remaining.clone();
        self.job_breakpoints(top_pos)
            .into_iter()
            .find(|x| self.contribution_at(top_pos, x, Side::Right) >= remaining)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Job;
    use crate::rational::rat;

    fn job(i: u64, p: Rat, w: Rat) -> Job {
        Job::new(i, rat_int(0), p, w).unwrap()
    }

    /// JobState with rounded weight `w` (the job's own weight is set just
    /// over half of it so the rounding invariant holds).
    fn state(i: u64, w: Rat, remaining: Rat) -> JobState {
        let original = &w * rat(2, 3);
        JobState::with_remaining(job(i, remaining.clone(), original), w, remaining)
    }

    #[test]
    fn prec_weight_class_first() {
        let a = state(1, rat_int(2), rat_int(1));
        let b = state(2, rat_int(4), rat_int(1));
        assert!(prec_less(&a, &b));
        assert!(!prec_less(&b, &a));
    }

    #[test]
    fn prec_density_breaks_equal_class() {
        let a = state(1, rat_int(4), rat_int(3));
        let b = state(2, rat_int(4), rat_int(2));
        // d_t: 3/4 > 2/4, so a sits lower.
        assert!(prec_less(&a, &b));
    }

    #[test]
    fn prec_index_breaks_full_tie() {
        let a = state(7, rat_int(4), rat_int(2));
        let b = state(3, rat_int(4), rat_int(2));
        assert!(prec_less(&a, &b));
    }

    #[test]
    #[should_panic]
    fn prec_rejects_self_compare() {
        let a = state(1, rat_int(4), rat_int(2));
        let _ = prec_less(&a, &a.clone());
    }

    #[test]
    fn base_examples() {
        let key = BinKey::new(BinFamily::ProcTime, 3);
        let bin = BinState::from_stacked_jobs(
            key,
            vec![
                state(1, rat_int(1), rat_int(1)),
                state(2, rat_int(2), rat_int(1)),
                state(3, rat_int(4), rat_int(1)),
            ],
        );
        assert_eq!(bin.base(1).unwrap(), rat_int(0));
        assert_eq!(bin.base(3).unwrap(), rat_int(3));
        assert_eq!(bin.base(99), None);

        let single = BinState::from_stacked_jobs(key, vec![state(1, rat_int(8), rat_int(1))]);
        assert_eq!(single.base(1).unwrap(), rat_int(0));
    }

    #[test]
    fn mu_proc_branches() {
        let w = rat_int(4);
        let p = rat_int(3);
        let h = rat_int(5);
        assert_eq!(mu_proc(1, &rat_int(10), &w, &p, &h), rat_int(3));
        assert_eq!(mu_proc(1, &rat_int(8), &w, &p, &h), rat_int(2));
        assert_eq!(mu_proc(1, &rat_int(6), &w, &p, &h), rat_int(0));
    }

    #[test]
    fn mu_dens_branches() {
        let w = rat_int(3);
        let p = rat(3, 2);
        let h = rat_int(4);
        assert_eq!(mu_dens(0, &rat(15, 2), &w, &p, &h), rat(3, 2));
        assert_eq!(mu_dens(0, &rat_int(7), &w, &p, &h), rat_int(1));
        assert_eq!(mu_dens(0, &rat_int(5), &w, &p, &h), rat_int(0));
    }

    #[test]
    fn mu_weight_branches() {
        let w = rat_int(2);
        let p = rat_int(7);
        let h = rat_int(3);
        assert_eq!(mu_weight(&rat_int(5), &w, &p, &h), rat_int(7));
        assert_eq!(mu_weight(&rat(499, 100), &w, &p, &h), rat_int(0));
    }

    #[test]
    #[should_panic]
    fn mu_weight_rejects_nonpositive_volume() {
        let _ = mu_weight(&rat_int(5), &rat_int(2), &rat_int(0), &rat_int(3));
    }

    #[test]
    fn contribution_dispatch() {
        // Bar at zero: below every dotted line.
        let key = BinKey::new(BinFamily::ProcTime, 1);
        let bin = BinState::from_stacked_jobs(key, vec![state(1, rat_int(4), rat_int(3))]);
        assert_eq!(bin.contribution(1, &rat_int(0)).unwrap(), rat_int(0));
        assert_eq!(bin.contribution(1, &rat_int(4)).unwrap(), rat_int(3));
        assert_eq!(bin.contribution(42, &rat_int(4)), None);

        let dkey = BinKey::new(BinFamily::Density, 0);
        let dbin = BinState::from_stacked_jobs(dkey, vec![state(1, rat_int(3), rat(3, 2))]);
        // kappa = 2; 1·(3 − 2) = 1.
        assert_eq!(dbin.contribution(1, &rat_int(3)).unwrap(), rat_int(1));
    }

    #[test]
    fn bar_total_sums_contributions() {
        let key = BinKey::new(BinFamily::ProcTime, 0);
        let empty = BinState::new(key);
        assert_eq!(empty.bar_total(&rat_int(10), Side::Right), rat_int(0));

        let bin = BinState::from_stacked_jobs(
            key,
            vec![state(1, rat_int(1), rat_int(1)), state(2, rat_int(2), rat_int(2))],
        );
        // x = 2: bottom job fully below, top in its middle band.
        assert_eq!(bin.bar_total(&rat_int(2), Side::Right), rat_int(2));
        // x beyond the total weight: whole remaining volume.
        assert_eq!(bin.bar_total(&rat_int(3), Side::Right), bin.total_remaining());
    }

    #[test]
    fn breakpoints_per_family() {
        let empty = BinState::new(BinKey::new(BinFamily::ProcTime, 0));
        assert!(empty.breakpoints().is_empty());

        let pbin = BinState::from_stacked_jobs(
            BinKey::new(BinFamily::ProcTime, 2),
            vec![state(1, rat_int(4), rat_int(4))],
        );
        assert_eq!(pbin.breakpoints(), vec![rat_int(2), rat_int(4)]);

        let dbin = BinState::from_stacked_jobs(
            BinKey::new(BinFamily::Density, 0),
            vec![state(1, rat_int(3), rat(3, 2))],
        );
        assert_eq!(dbin.breakpoints(), vec![rat_int(2), rat(7, 2)]);
    }

    #[test]
    fn score_proc_discounts_crossed_top() {
        let bin = BinState::from_stacked_jobs(
            BinKey::new(BinFamily::ProcTime, 2),
            vec![state(1, rat_int(2), rat_int(4)), state(2, rat_int(4), rat_int(3))],
        );
        // Top p_t = 3 ≤ 4, so it contributes half its weight.
        assert_eq!(bin.score().unwrap(), rat_int(4));
        assert_eq!(bin.height().unwrap(), rat_int(4));
    }

    #[test]
    fn score_density_formula() {
        let bin = BinState::from_stacked_jobs(
            BinKey::new(BinFamily::Density, 0),
            vec![state(1, rat_int(5), rat_int(5)), state(2, rat_int(3), rat(3, 2))],
        );
        assert_eq!(bin.score().unwrap(), rat(17, 2));
        assert_eq!(bin.height().unwrap(), rat(17, 2));
    }

    #[test]
    fn score_weight_total() {
        let bin = BinState::from_stacked_jobs(
            BinKey::new(BinFamily::Weight, 3),
            vec![state(1, rat_int(8), rat_int(6)), state(2, rat_int(8), rat_int(5))],
        );
        assert_eq!(bin.score().unwrap(), rat_int(16));
        assert_eq!(bin.height().unwrap(), rat_int(16));
    }

    #[test]
    fn height_single_jobs() {
        let tall = BinState::from_stacked_jobs(
            BinKey::new(BinFamily::ProcTime, 2),
            vec![state(1, rat_int(4), rat_int(5))],
        );
        assert_eq!(tall.height().unwrap(), rat_int(4)); // p_t > 2^i: base + w
        let short = BinState::from_stacked_jobs(
            BinKey::new(BinFamily::ProcTime, 2),
            vec![state(1, rat_int(4), rat_int(1))],
        );
        assert_eq!(short.height().unwrap(), rat_int(2)); // p_t ≤ 2^i: base + w/2
        assert_eq!(BinState::new(BinKey::new(BinFamily::ProcTime, 2)).score(), None);
    }

    #[test]
    fn insert_keeps_stack_sorted() {
        let mut bin = BinState::new(BinKey::new(BinFamily::ProcTime, 0));
        bin.insert(state(1, rat_int(4), rat(3, 2)));
        bin.insert(state(2, rat_int(1), rat(3, 2)));
        bin.insert(state(3, rat_int(2), rat(3, 2)));
        let order: Vec<u64> = bin.jobs().iter().map(|s| s.index()).collect();
        assert_eq!(order, vec![2, 3, 1]);
        assert_eq!(bin.top().unwrap().index(), 1);
    }
}
