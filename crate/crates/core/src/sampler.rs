//! Independent Bernoulli sampling of `ω` and Monte Carlo estimates of the law
//! of `r_N(ω)`.
//!
//! Every draw is addressed by `(seed, trial, index)`: the generator is keyed by
//! `seed`, the trial selects a ChaCha stream, and index `m` consumes word `m`
//! of that stream. Results therefore do not depend on how trials are spread
//! over threads.

use bitvec::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::counts::{r_count, SequenceSample};
use crate::error::Result;
use crate::field::FieldSpec;
use crate::pairing::sum_pair_count;
use crate::prob::{event_dist_exact, Schedule};

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `ω ∩ [0, max_index]` for one trial of the stream keyed by `seed`.
pub fn sample_trial(sched: &Schedule, max_index: u64, seed: u64, trial: u64) -> SequenceSample {
    let mut rng = trial_rng(seed, trial);
    let len = max_index as usize + 1;
    let mut bits = BitVec::<u64, Lsb0>::with_capacity(len);
    for m in 0..=max_index {
        bits.push(rng.gen::<f64>() < sched.alpha_at(m));
    }
    SequenceSample::from_bits(bits)
}

/// Trial 0 of [`sample_trial`].
pub fn sample_sequence(sched: &Schedule, max_index: u64, seed: u64) -> SequenceSample {
    sample_trial(sched, max_index, seed, 0)
}

/// Observed frequencies of `r_N(ω) = d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmpiricalDist {
    pub target: u64,
    pub trials: u64,
    /// `counts[d]` trials had `r_N = d`; trailing zeros are trimmed.
    pub counts: Vec<u64>,
}

impl EmpiricalDist {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    /// `(mean, unbiased variance)`; the variance is zero for a single trial.
    pub fn moments(&self) -> (f64, f64) {
        let n = self.trials as f64;
        let mean = self
            .counts
            .iter()
            .enumerate()
            .map(|(d, &c)| d as f64 * c as f64)
            .sum::<f64>()
            / n;
        if self.trials < 2 {
            return (mean, 0.0);
        }
        let ss: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(d, &c)| c as f64 * (d as f64 - mean).powi(2))
            .sum();
        (mean, ss / (n - 1.0))
    }
}

/// Samples only the `q^{n+1}` indices `r_N` can see.
pub fn mc_event_dist(
    spec: &FieldSpec,
    sched: &Schedule,
    target: u64,
    trials: u64,
    seed: u64,
) -> Result<EmpiricalDist> {
    let m = sum_pair_count(spec, target)?;
    let n = spec.poly_deg(target).finite().expect("nonzero target");
    let top = spec.block_len(n)? - 1;
    let observed: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| r_count(spec, &sample_trial(sched, top, seed, t), target))
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; m as usize + 1];
    for d in observed {
        counts[d as usize] += 1;
    }
    while counts.len() > 1 && counts.last() == Some(&0) {
        counts.pop();
    }
    Ok(EmpiricalDist {
        target,
        trials,
        counts,
    })
}

/// `½ Σ |p_d − q_d|`, treating missing entries as zero.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

/// Total variation between an empirical law and the exact law of `r_N`.
///
/// The exact law is only expanded up to the largest observed `d`; the mass it
/// puts beyond that point enters the distance as a single term.
pub fn tv_to_exact(spec: &FieldSpec, sched: &Schedule, empirical: &EmpiricalDist) -> Result<f64> {
    let d_max = empirical.counts.len() - 1;
    let exact = event_dist_exact(spec, sched, empirical.target, d_max)?;
    let freq = empirical.frequencies();
    let head: f64 = freq
        .iter()
        .zip(&exact.probs)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let tail = (1.0 - exact.total()).max(0.0);
    Ok(0.5 * (head + tail))
}

pub fn mc_vs_exact(
    spec: &FieldSpec,
    sched: &Schedule,
    target: u64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    let empirical = mc_event_dist(spec, sched, target, trials, seed)?;
    tv_to_exact(spec, sched, &empirical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let half = Schedule::constant(0.5).unwrap();
        let a = sample_sequence(&half, 500, 7);
        assert_eq!(a, sample_sequence(&half, 500, 7));
        assert_ne!(a, sample_sequence(&half, 500, 8));
        assert_ne!(a, sample_trial(&half, 500, 7, 1));
        // A shorter draw is a prefix of a longer one.
        let short = sample_sequence(&half, 100, 7);
        assert!(short.members().eq(a.members().take_while(|&m| m <= 100)));
    }

    #[test]
    fn near_full_and_binomial_sizes() {
        let almost = Schedule::constant(0.999_999).unwrap();
        assert!(sample_sequence(&almost, 100, 1).len() >= 100);
        let half = Schedule::constant(0.5).unwrap();
        let inside = (0..200u64)
            .filter(|&s| (sample_sequence(&half, 9_999, s).len() as i64 - 5000).abs() <= 150)
            .count();
        assert!(inside >= 198);
    }

    #[test]
    fn inclusion_frequencies_match_alpha() {
        let sched = Schedule::thick(1.0).unwrap();
        let trials = 10_000u64;
        let probes: Vec<u64> = (0..100).map(|k| k * 7).collect();
        let mut hits = vec![0u64; probes.len()];
        for t in 0..trials {
            let w = sample_trial(&sched, 700, 99, t);
            for (h, &m) in hits.iter_mut().zip(&probes) {
                *h += w.contains(m).unwrap() as u64;
            }
        }
        for (&h, &m) in hits.iter().zip(&probes) {
            let a = sched.alpha_at(m);
            let se = (a * (1.0 - a) / trials as f64).sqrt();
            assert!(
                (h as f64 / trials as f64 - a).abs() <= 4.0 * se,
                "index {m}"
            );
        }
    }

    #[test]
    fn point_mass_and_vanishing_schedule() {
        let f3 = make_field(3, 1).unwrap();
        let half = Schedule::constant(0.5).unwrap();
        let one = mc_event_dist(&f3, &half, 4, 1, 3).unwrap();
        assert_eq!(one.counts.iter().sum::<u64>(), 1);
        assert_eq!(one.counts.last(), Some(&1));
        let tiny = Schedule::constant(1e-9).unwrap();
        let d = mc_event_dist(&f3, &tiny, 40, 500, 3).unwrap();
        assert_eq!(d.counts, vec![500]);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(tv_distance(&[1.0], &[0.0, 1.0]), 1.0);
        assert!((tv_distance(&[0.25, 0.75], &[0.5, 0.5]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mc_matches_exact_small_case() {
        let f2 = make_field(2, 1).unwrap();
        let half = Schedule::constant(0.5).unwrap();
        let tv = mc_vs_exact(&f2, &half, 2, 100_000, 11).unwrap();
        assert!(tv < 0.01, "tv = {tv}");
    }
}
