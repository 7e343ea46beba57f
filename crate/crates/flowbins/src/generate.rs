//! Seeded random instance generation.

use num_traits::Signed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, Job};
use crate::rational::{format_rat, rat_int, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("need at least one job")]
    ZeroJobs,
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: String, hi: String },
    #[error("range [{lo}, {hi}] contains no fraction with denominator ≤ {max_den}")]
    EmptyRange { lo: String, hi: String, max_den: u32 },
}

/// Inclusive ranges the generator draws from. Values are fractions with
/// denominator at most `max_den`, so generated instances stay desk-scale
/// exact.
#[derive(Debug, Clone)]
pub struct GenRanges {
    pub proc: (Rat, Rat),
    pub weight: (Rat, Rat),
    pub release: (Rat, Rat),
    pub max_den: u32,
}

impl Default for GenRanges {
    fn default() -> Self {
        GenRanges {
            proc: (rat_int(1) / rat_int(4), rat_int(4)),
            weight: (rat_int(1) / rat_int(4), rat_int(4)),
            release: (rat_int(0), rat_int(8)),
            max_den: 8,
        }
    }
}

impl GenRanges {
    fn validate(&self) -> Result<(), GenError> {
        for (lo, hi, positive) in [
            (&self.proc.0, &self.proc.1, true),
            (&self.weight.0, &self.weight.1, true),
            (&self.release.0, &self.release.1, false),
        ] {
            if lo > hi || (positive && !lo.is_positive()) || (!positive && lo.is_negative()) {
                return Err(GenError::InvalidRange {
                    lo: format_rat(lo),
                    hi: format_rat(hi),
                });
            }
        }
        if self.max_den == 0 {
            return Err(GenError::InvalidRange {
                lo: "max_den".to_string(),
                hi: "0".to_string(),
            });
        }
        Ok(())
    }
}

/// Draws a fraction uniformly from the candidates `{n/d | d ≤ max_den,
/// lo ≤ n/d ≤ hi}`, picking the denominator first.
fn draw_rat(rng: &mut ChaCha8Rng, lo: &Rat, hi: &Rat, max_den: u32) -> Result<Rat, GenError> {
    // Denominators that admit at least one numerator in range.
    let mut candidates = Vec::new();
    for d in 1..=max_den {
        let d_rat = rat_int(d as i64);
        let n_lo = (lo * &d_rat).ceil().to_integer();
        let n_hi = (hi * &d_rat).floor().to_integer();
        if n_lo <= n_hi {
            candidates.push((d, n_lo, n_hi));
        }
    }
    if candidates.is_empty() {
        return Err(GenError::EmptyRange {
            lo: format_rat(lo),
            hi: format_rat(hi),
            max_den,
        });
    }
    let (d, n_lo, n_hi) = &candidates[rng.random_range(0..candidates.len())];
    let span: num_bigint::BigInt = n_hi - n_lo;
    let span_u64: u64 = span.try_into().unwrap_or(u64::MAX);
    let offset = rng.random_range(0..=span_u64);
    let numer = n_lo + num_bigint::BigInt::from(offset);
    Ok(Rat::new(numer, num_bigint::BigInt::from(*d)))
}

/// Generates `n` jobs with indices `1..=n`, deterministically for a fixed
/// `(n, seed, ranges)` triple.
pub fn generate_instance(n: usize, seed: u64, ranges: &GenRanges) -> Result<Instance, GenError> {
    if n == 0 {
        return Err(GenError::ZeroJobs);
    }
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::with_capacity(n);
    for index in 1..=n as u64 {
        let release = draw_rat(&mut rng, &ranges.release.0, &ranges.release.1, ranges.max_den)?;
        let proc = draw_rat(&mut rng, &ranges.proc.0, &ranges.proc.1, ranges.max_den)?;
        let weight = draw_rat(&mut rng, &ranges.weight.0, &ranges.weight.1, ranges.max_den)?;
        let job = Job::new(index, release, proc, weight).expect("ranges keep jobs valid");
        jobs.push(job);
    }
    Ok(Instance::new(jobs).expect("generated indices are unique"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::instance_stats;
    use crate::instance::{parse_instance, serialize_instance};
    use crate::rational::rat;

    #[test]
    fn single_job_within_ranges() {
        let ranges = GenRanges::default();
        let inst = generate_instance(1, 7, &ranges).unwrap();
        assert_eq!(inst.len(), 1);
        let j = &inst.jobs()[0];
        assert!(j.proc() >= &ranges.proc.0 && j.proc() <= &ranges.proc.1);
        assert!(j.weight() >= &ranges.weight.0 && j.weight() <= &ranges.weight.1);
        assert!(j.release() >= &ranges.release.0 && j.release() <= &ranges.release.1);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let ranges = GenRanges::default();
        let a = generate_instance(12, 42, &ranges).unwrap();
        let b = generate_instance(12, 42, &ranges).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(12, 43, &ranges).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_instances_roundtrip_and_stat() {
        let ranges = GenRanges::default();
        let inst = generate_instance(20, 3, &ranges).unwrap();
        assert_eq!(inst.len(), 20);
        let text = serialize_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
        let stats = instance_stats(&inst).unwrap();
        assert!(stats.p_ratio >= rat_int(1));
        assert!(stats.w_ratio >= rat_int(1));
        assert!(stats.d_ratio >= rat_int(1));
    }

    #[test]
    fn rejects_bad_config() {
        let mut ranges = GenRanges::default();
        assert_eq!(generate_instance(0, 1, &ranges), Err(GenError::ZeroJobs));
        ranges.proc = (rat_int(4), rat_int(1));
        assert!(matches!(
            generate_instance(1, 1, &ranges),
            Err(GenError::InvalidRange { .. })
        ));
    }

    #[test]
    fn narrow_range_needs_matching_denominator() {
        let ranges = GenRanges {
            proc: (rat(1, 3), rat(1, 3)),
            max_den: 2,
            ..GenRanges::default()
        };
        assert!(matches!(
            generate_instance(1, 1, &ranges),
            Err(GenError::EmptyRange { .. })
        ));
    }
}
