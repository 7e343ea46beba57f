//! Problem instances: jobs, instance statistics and the on-disk format.
//!
//! An instance file is UTF-8 and line oriented. Every line is blank, a `#`
//! comment, or `job <index> <release> <proc> <weight>` with each numeric
//! token an integer, an exact decimal (`0.25`) or a fraction (`3/4`).

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;
use thiserror::Error;

use crate::rational::{format_rat, parse_rat, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("job {index}: processing time must be positive")]
    NonPositiveProc { index: u64 },
    #[error("job {index}: weight must be positive")]
    NonPositiveWeight { index: u64 },
    #[error("job {index}: release must be nonnegative")]
    NegativeRelease { index: u64 },
    #[error("job index must be positive")]
    ZeroIndex,
    #[error("duplicate job index {index}")]
    DuplicateIndex { index: u64 },
    #[error("instance has no jobs")]
    Empty,
}

/// One job of the input: index `I(J)`, release `r(J)`, processing time
/// `p(J)` and weight `w(J)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    index: u64,
    release: Rat,
    proc: Rat,
    weight: Rat,
}

impl Job {
    pub fn new(index: u64, release: Rat, proc: Rat, weight: Rat) -> Result<Self, InstanceError> {
        if index == 0 {
            return Err(InstanceError::ZeroIndex);
        }
        if !proc.is_positive() {
            return Err(InstanceError::NonPositiveProc { index });
        }
        if !weight.is_positive() {
            return Err(InstanceError::NonPositiveWeight { index });
        }
        if release.is_negative() {
            return Err(InstanceError::NegativeRelease { index });
        }
        Ok(Job { index, release, proc, weight })
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn release(&self) -> &Rat {
        &self.release
    }

    pub fn proc(&self) -> &Rat {
        &self.proc
    }

    pub fn weight(&self) -> &Rat {
        &self.weight
    }

    /// Density `d(J) = p(J) / w(J)`.
    pub fn density(&self) -> Rat {
        &self.proc / &self.weight
    }
}

/// An immutable set of jobs, sorted by `(release, index)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    jobs: Vec<Job>,
}

impl Instance {
    /// Builds an instance, sorting jobs by `(release, index)` and rejecting
    /// duplicate indices.
    pub fn new(mut jobs: Vec<Job>) -> Result<Self, InstanceError> {
        let mut seen = BTreeSet::new();
        for job in &jobs {
            if !seen.insert(job.index) {
                return Err(InstanceError::DuplicateIndex { index: job.index });
            }
        }
        jobs.sort_by(|a, b| a.release.cmp(&b.release).then(a.index.cmp(&b.index)));
        Ok(Instance { jobs })
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job_by_index(&self, index: u64) -> Option<&Job> {
        self.jobs.iter().find(|j| j.index == index)
    }

    /// Smallest processing time over the instance.
    pub fn min_proc(&self) -> Option<Rat> {
        self.jobs.iter().map(|j| j.proc.clone()).min()
    }

    /// Returns a copy of the instance with every weight replaced by the
    /// given function of the job. Used to materialize the weight-rounded
    /// instance a scheduler effectively works on.
    pub fn with_weights(&self, mut weight_of: impl FnMut(&Job) -> Rat) -> Instance {
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job {
                index: j.index,
                release: j.release.clone(),
                proc: j.proc.clone(),
                weight: weight_of(j),
            })
            .collect();
        Instance { jobs }
    }
}

/// Max-to-min ratios of the instance: `P` (processing times), `W` (weights)
/// and `D` (densities). Each is at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceStats {
    pub p_ratio: Rat,
    pub w_ratio: Rat,
    pub d_ratio: Rat,
}

impl fmt::Display for InstanceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P={} W={} D={}",
            format_rat(&self.p_ratio),
            format_rat(&self.w_ratio),
            format_rat(&self.d_ratio)
        )
    }
}

/// Exact `P`, `W`, `D` ratios over a nonempty instance.
pub fn instance_stats(inst: &Instance) -> Result<InstanceStats, InstanceError> {
    if inst.is_empty() {
        return Err(InstanceError::Empty);
    }
    let ratio = |mut values: Vec<Rat>| {
        values.sort();
        let min = values.first().cloned().expect("nonempty");
        let max = values.last().cloned().expect("nonempty");
        max / min
    };
    Ok(InstanceStats {
        p_ratio: ratio(inst.jobs.iter().map(|j| j.proc.clone()).collect()),
        w_ratio: ratio(inst.jobs.iter().map(|j| j.weight.clone()).collect()),
        d_ratio: ratio(inst.jobs.iter().map(|j| j.density()).collect()),
    })
}

/// Parses the line-oriented instance format.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut jobs = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != "job" {
            return Err(InstanceError::Parse {
                line,
                reason: "expected `job <index> <release> <proc> <weight>`".to_string(),
            });
        }
        let index: u64 = fields[1].parse().map_err(|_| InstanceError::Parse {
            line,
            reason: format!("bad job index `{}`", fields[1]),
        })?;
        let field = |name: &str, token: &str| {
            parse_rat(token).map_err(|e| InstanceError::Parse {
                line,
                reason: format!("bad {name}: {e}"),
            })
        };
        let release = field("release", fields[2])?;
        let proc = field("processing time", fields[3])?;
        let weight = field("weight", fields[4])?;
        if !seen.insert(index) {
            return Err(InstanceError::Parse {
                line,
                reason: format!("duplicate job index {index}"),
            });
        }
        let job = Job::new(index, release, proc, weight).map_err(|e| InstanceError::Parse {
            line,
            reason: e.to_string(),
        })?;
        jobs.push(job);
    }
    Instance::new(jobs)
}

/// Serializes an instance back into the file format. `parse_instance` of the
/// result reproduces the instance exactly.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    for job in &inst.jobs {
        out.push_str(&format!(
            "job {} {} {} {}\n",
            job.index,
            format_rat(&job.release),
            format_rat(&job.proc),
            format_rat(&job.weight),
        ));
    }
    out
}
