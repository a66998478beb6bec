//! Desk-scale experiments: concentration of `r_N` under the `(ln j / j)^{1/2}`
//! schedule, and bounded sum / difference counts under the thick schedule.
//!
//! Trials run in parallel; every reduction walks the per-trial results in
//! trial order, so reports are byte-identical across thread counts.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::counts::{r_count, t_count, t_count_u, CountKind, RepresentationTable};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::pairing::sum_pair_count;
use crate::prob::{
    lambda_bounds, lambda_stats, m_star, predicted_index_growth, r_variance, t_moments,
    thm1_alpha_min, Schedule,
};
use crate::report::{
    BlockSummary, ExperimentReport, ReportConfig, ReportRow, Summary, TrialGrowth,
};
use crate::sampler::{sample_trial, tv_to_exact, EmpiricalDist};

/// Largest number of indices a single trial may materialize.
pub const MAX_SAMPLED_INDICES: u64 = 1 << 31;

/// Accepted range for the median of `b_j / predicted`.
pub const GROWTH_BAND: (f64, f64) = (0.5, 2.0);

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `(mean, unbiased variance)` of integer observations.
fn moments(xs: &[u64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = xs.iter().map(|&x| (x as f64 - m).powi(2)).sum();
    (m, ss / (n - 1.0))
}

fn fraction(xs: &[u64], pred: impl Fn(f64) -> bool) -> f64 {
    xs.iter().filter(|&&x| pred(x as f64)).count() as f64 / xs.len() as f64
}

/// `⌊log₂ n⌋`, with degrees 0 and 1 sharing block 0.
fn dyadic_block(n: u32) -> u32 {
    n.max(1).ilog2()
}

/// Consecutive runs of degrees sharing a dyadic block.
fn dyadic_runs(degrees: RangeInclusive<u32>) -> Vec<(u32, u32, u32)> {
    let mut runs: Vec<(u32, u32, u32)> = Vec::new();
    for n in degrees {
        let b = dyadic_block(n);
        match runs.last_mut() {
            Some(last) if last.0 == b => last.2 = n,
            _ => runs.push((b, n, n)),
        }
    }
    runs
}

/// `q^n`, `q^n + 1`, the block midpoint and `q^{n+1} − 1`.
fn probe_targets(spec: &FieldSpec, n: u32) -> Result<Vec<u64>> {
    let lo = spec.pow(n)?;
    let hi = spec.block_len(n)? - 1;
    let mut v = vec![lo, lo + 1, lo + (hi - lo) / 2, hi];
    v.retain(|&x| x >= 1 && x <= hi);
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

fn check_feasible(len: u64) -> Result<()> {
    if len > MAX_SAMPLED_INDICES {
        return Err(Error::Infeasible(format!(
            "{len} indices per trial exceeds the limit of {MAX_SAMPLED_INDICES}"
        )));
    }
    Ok(())
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

/// Largest `t ∈ (0, 1]` with `t (1 − ln t) ≤ bound`, i.e. `(e/t)^t ≤ e^{bound}`.
pub fn c2_from_ratio(bound: f64) -> Option<f64> {
    if bound.is_nan() || bound <= 0.0 {
        return None;
    }
    if bound >= 1.0 {
        return Some(1.0);
    }
    // t (1 − ln t) increases on (0, 1].
    let f = |t: f64| t * (1.0 - t.ln());
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 || f(mid) <= bound {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo > 0.0).then_some(lo)
}

fn empty_row(target: u64, degree: u32, observed: &[u64]) -> ReportRow {
    let (mean_r, var_r) = moments(observed);
    ReportRow {
        target,
        degree,
        lambda: None,
        lambda_prime: None,
        m_star: None,
        mean_r,
        var_r,
        std_err: 0.0,
        p_upper_violation: None,
        p_lower_violation: None,
        tv_distance: None,
        lambda_lower: None,
        lambda_upper: None,
        in_band: None,
        above_log: None,
        mean_within_3se: None,
    }
}

/// Sets the standard error from the exact variance of the count and flags
/// whether the sample mean lies within three of them of `expected`.
fn check_mean(row: &mut ReportRow, expected: f64, variance: f64, trials: u64) {
    row.std_err = (variance / trials as f64).sqrt();
    row.mean_within_3se = Some((row.mean_r - expected).abs() <= 3.0 * row.std_err);
}

/// The `(ln j / j)^{1/2}` experiment over the degrees in `degrees`.
///
/// Each trial samples `ω` below `q^{n_hi+1}` once and reads off `r_N` at four
/// probe targets per degree.
pub fn experiment_concentration(
    spec: &FieldSpec,
    degrees: RangeInclusive<u32>,
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let sched = Schedule::sqrt_log(thm1_alpha_min(spec))?;
    let config = ReportConfig {
        experiment: "thm01".into(),
        p: spec.p(),
        s: spec.s(),
        q: spec.q(),
        schedule: sched,
        seed,
        trials,
        degrees: Some((*degrees.start(), *degrees.end())),
        max_index: None,
        kind: Some(CountKind::Sum),
    };
    if degrees.is_empty() || trials == 0 {
        return Ok(ExperimentReport::empty(config));
    }
    let n_hi = *degrees.end();
    let len = spec.block_len(n_hi)?;
    check_feasible(len)?;
    let mut probes: Vec<(u64, u32)> = Vec::new();
    for n in degrees.clone() {
        probes.extend(probe_targets(spec, n)?.into_iter().map(|t| (t, n)));
    }

    let per_trial: Vec<Vec<u64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let w = sample_trial(&sched, len - 1, seed, t);
            probes
                .iter()
                .map(|&(target, _)| r_count(spec, &w, target))
                .collect()
        })
        .collect::<Result<_>>()?;
    let column = |i: usize| -> Vec<u64> { per_trial.iter().map(|r| r[i]).collect() };

    let mut rows = Vec::with_capacity(probes.len());
    for (i, &(target, n)) in probes.iter().enumerate() {
        let observed = column(i);
        let stats = lambda_stats(spec, &sched, target)?;
        let mut row = empty_row(target, n, &observed);
        row.lambda = Some(stats.lambda);
        row.lambda_prime = Some(stats.lambda_prime);
        row.m_star = Some(stats.m_star);
        row.p_upper_violation = Some(fraction(&observed, |r| {
            r > std::f64::consts::E * stats.lambda_prime
        }));
        check_mean(
            &mut row,
            stats.lambda,
            r_variance(spec, &sched, target)?,
            trials,
        );
        if target >= 2 {
            let (lo, hi) = lambda_bounds(spec, &sched, target)?;
            row.lambda_lower = Some(lo);
            row.lambda_upper = Some(hi);
            row.in_band = Some(lo < stats.lambda && stats.lambda < hi);
            row.above_log = Some(stats.lambda > (target as f64).ln());
        }
        let top = *observed.iter().max().expect("trials > 0") as usize;
        let mut counts = vec![0u64; top + 1];
        for &d in &observed {
            counts[d as usize] += 1;
        }
        let empirical = EmpiricalDist {
            target,
            trials,
            counts,
        };
        row.tv_distance = Some(tv_to_exact(spec, &sched, &empirical)?);
        rows.push(row);
    }

    // Onset: first degree from which every later row satisfies both checks.
    let good = |r: &ReportRow| r.in_band == Some(true) && r.above_log == Some(true);
    let mut onset = None;
    for n in degrees.clone().rev() {
        if rows.iter().filter(|r| r.degree == n).all(good) {
            onset = Some(n);
        } else {
            break;
        }
    }

    let logged: Vec<&ReportRow> = rows.iter().filter(|r| r.target >= 2).collect();
    let d_hat = logged
        .iter()
        .map(|r| r.lambda_prime.unwrap() / (r.target as f64).ln())
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.max(x)))
        });
    let envelope_rows = logged
        .iter()
        .filter(|r| onset.is_none_or(|o| r.degree >= o));
    let delta_hat = envelope_rows
        .map(|r| r.lambda.unwrap() / (r.target as f64).ln() - 1.0)
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |a| a.min(x)))
        });
    let c2 = match (d_hat, delta_hat) {
        (Some(d), Some(delta)) if d > 0.0 => c2_from_ratio(delta / (2.0 * d)),
        _ => None,
    };
    if let Some(c2) = c2 {
        for (i, row) in rows.iter_mut().enumerate() {
            let lp = row.lambda_prime.unwrap();
            row.p_lower_violation = Some(fraction(&column(i), |r| r < c2 * lp));
        }
    }

    let mut blocks = Vec::new();
    for (block, lo, hi) in dyadic_runs(degrees) {
        let members: Vec<usize> = (0..probes.len())
            .filter(|&i| (lo..=hi).contains(&probes[i].1))
            .collect();
        let per_trial_fraction = |lower: bool| -> Vec<f64> {
            per_trial
                .iter()
                .map(|obs| {
                    let hits = members
                        .iter()
                        .filter(|&&i| {
                            let lp = rows[i].lambda_prime.unwrap();
                            let r = obs[i] as f64;
                            if lower {
                                r < c2.unwrap() * lp
                            } else {
                                r > std::f64::consts::E * lp
                            }
                        })
                        .count();
                    hits as f64 / members.len() as f64
                })
                .collect()
        };
        let upper = per_trial_fraction(false);
        let lower = c2.map(|_| per_trial_fraction(true));
        blocks.push(BlockSummary {
            block,
            degree_lo: lo,
            degree_hi: hi,
            targets: members.len() as u64,
            median_fraction: median(&upper),
            mean_fraction: mean(&upper),
            median_lower_fraction: lower.as_deref().map(median),
            mean_lower_fraction: lower.as_deref().map(mean),
        });
    }

    let medians: Vec<f64> = blocks.iter().map(|b| b.median_fraction).collect();
    let summary = Summary {
        rows_flagged: rows
            .iter()
            .filter(|r| r.mean_within_3se == Some(false))
            .count() as u64,
        c1: Some(std::f64::consts::E),
        c2,
        d_hat,
        delta_hat,
        blocks_non_increasing: Some(non_increasing(&medians)),
        ..Summary::default()
    };
    Ok(ExperimentReport {
        config,
        rows,
        blocks,
        summary,
        onset,
        growth: Vec::new(),
    })
}

struct ThickTrial {
    probe_counts: Vec<u64>,
    /// Per degree in `n_min..=n_max`, targets with count at least `K`.
    exceed_by_degree: Vec<u64>,
    max_count: u32,
    decomposition_mismatches: u64,
    pairing_mismatches: u64,
    growth: TrialGrowth,
}

/// Growth of the members `b_1 < b_2 < …` of `ω` against `(j(1−c)/α)^{1/(1−c)}`,
/// summarized by the median ratio over `b_j ≥ max_index / 10`.
fn growth_check(
    sched: &Schedule,
    members: &[u64],
    max_index: u64,
    trial: u64,
    max_count: u32,
) -> Result<TrialGrowth> {
    let floor = max_index as f64 / 10.0;
    let mut ratios = Vec::new();
    for (i, &b) in members.iter().enumerate() {
        if b as f64 >= floor {
            ratios.push(b as f64 / predicted_index_growth(sched, i as u64 + 1)?);
        }
    }
    let median_ratio = (!ratios.is_empty()).then(|| median(&ratios));
    let within_band = median_ratio.is_some_and(|m| (GROWTH_BAND.0..=GROWTH_BAND.1).contains(&m));
    Ok(TrialGrowth {
        trial,
        members: members.len() as u64,
        max_count,
        top_decade_terms: ratios.len() as u64,
        median_ratio,
        within_band,
    })
}

/// The thick-schedule experiment for sums (`r_N`) or differences (`t_N`).
///
/// Counts are tabulated for every target of every degree `n` with
/// `q^{n+1} − 1 ≤ max_index`. Block trends start at the first degree whose
/// targets have room for `K = 2(1 + 1/ε)` representations.
pub fn experiment_thick(
    spec: &FieldSpec,
    epsilon: f64,
    max_index: u64,
    trials: u64,
    seed: u64,
    kind: CountKind,
) -> Result<ExperimentReport> {
    let sched = Schedule::thick(epsilon)?;
    let k = 2.0 * (1.0 + 1.0 / epsilon);
    let config = ReportConfig {
        experiment: match kind {
            CountKind::Sum => "thm02",
            CountKind::Diff => "thm03",
        }
        .into(),
        p: spec.p(),
        s: spec.s(),
        q: spec.q(),
        schedule: sched,
        seed,
        trials,
        degrees: None,
        max_index: Some(max_index),
        kind: Some(kind),
    };
    if trials == 0 {
        return Ok(ExperimentReport::empty(config));
    }
    check_feasible(max_index.saturating_add(1))?;

    // Complete degrees only.
    let mut n_max = None;
    let mut n = 0u32;
    while let Ok(len) = spec.block_len(n) {
        if len - 1 > max_index {
            break;
        }
        n_max = Some(n);
        n += 1;
    }
    let capacity = |n: u32| -> Result<f64> {
        Ok(match kind {
            CountKind::Sum => sum_pair_count(spec, spec.pow(n)?)? as f64,
            CountKind::Diff => spec.block_len(n)? as f64,
        })
    };
    let mut n_min = None;
    if let Some(top) = n_max {
        for n in 0..=top {
            if capacity(n)? >= k {
                n_min = Some(n);
                break;
            }
        }
    }
    let trend_degrees: Vec<u32> = match (n_min, n_max) {
        (Some(lo), Some(hi)) => (lo..=hi).collect(),
        _ => Vec::new(),
    };
    let mut probes: Vec<(u64, u32)> = Vec::new();
    if let Some(top) = n_max {
        for n in 0..=top {
            probes.extend(probe_targets(spec, n)?.into_iter().map(|t| (t, n)));
        }
    }

    let run_trial = |t: u64| -> Result<ThickTrial> {
        let w = sample_trial(&sched, max_index, seed, t);
        let members: Vec<u64> = w.members().collect();
        let mut out = ThickTrial {
            probe_counts: Vec::new(),
            exceed_by_degree: Vec::new(),
            max_count: 0,
            decomposition_mismatches: 0,
            pairing_mismatches: 0,
            growth: growth_check(&sched, &members, max_index, t, 0)?,
        };
        let Some(top) = n_max else {
            return Ok(out);
        };
        let table = RepresentationTable::build(spec, &w, top, kind)?;
        let q = spec.q();
        out.max_count = table.counts.iter().skip(1).copied().max().unwrap_or(0);
        out.growth.max_count = out.max_count;
        for &n in &trend_degrees {
            let range = spec.pow(n)? as usize..spec.block_len(n)? as usize;
            out.exceed_by_degree.push(
                table.counts[range]
                    .iter()
                    .filter(|&&c| c as f64 >= k)
                    .count() as u64,
            );
        }
        if kind == CountKind::Diff {
            for target in 1..table.counts.len() as u64 {
                let by_class: u32 = (0..q).map(|u| table.class_count(q, target, u)).sum();
                out.decomposition_mismatches += (by_class != table.count(target)) as u64;
            }
        }
        for &(target, _) in &probes {
            let c = table.count(target) as u64;
            out.probe_counts.push(c);
            let direct = match kind {
                CountKind::Sum => r_count(spec, &w, target)?,
                CountKind::Diff => {
                    for u in 0..q {
                        let by_pairs = t_count_u(spec, &w, target, u)?;
                        out.pairing_mismatches +=
                            (by_pairs != table.class_count(q, target, u) as u64) as u64;
                    }
                    t_count(spec, &w, target)?
                }
            };
            out.pairing_mismatches += (direct != c) as u64;
        }
        Ok(out)
    };
    let results: Vec<ThickTrial> = (0..trials)
        .into_par_iter()
        .map(run_trial)
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(probes.len());
    for (i, &(target, n)) in probes.iter().enumerate() {
        let observed: Vec<u64> = results.iter().map(|r| r.probe_counts[i]).collect();
        let mut row = empty_row(target, n, &observed);
        let (expected, variance) = match kind {
            CountKind::Sum => {
                let stats = lambda_stats(spec, &sched, target)?;
                row.lambda_prime = Some(stats.lambda_prime);
                (stats.lambda, r_variance(spec, &sched, target)?)
            }
            CountKind::Diff => t_moments(spec, &sched, target)?,
        };
        row.lambda = Some(expected);
        row.m_star = Some(m_star(&sched, target));
        row.p_upper_violation = Some(fraction(&observed, |c| c >= k));
        check_mean(&mut row, expected, variance, trials);
        rows.push(row);
    }

    let mut blocks = Vec::new();
    if let (Some(lo_deg), Some(hi_deg)) = (n_min, n_max) {
        for (block, lo, hi) in dyadic_runs(lo_deg..=hi_deg) {
            let mut targets = 0u64;
            for n in lo..=hi {
                targets += spec.block_len(n)? - spec.pow(n)?;
            }
            let fractions: Vec<f64> = results
                .iter()
                .map(|r| {
                    let hits: u64 = r.exceed_by_degree
                        [(lo - lo_deg) as usize..=(hi - lo_deg) as usize]
                        .iter()
                        .sum();
                    hits as f64 / targets as f64
                })
                .collect();
            blocks.push(BlockSummary {
                block,
                degree_lo: lo,
                degree_hi: hi,
                targets,
                median_fraction: median(&fractions),
                mean_fraction: mean(&fractions),
                median_lower_fraction: None,
                mean_lower_fraction: None,
            });
        }
    }

    let medians: Vec<f64> = blocks.iter().map(|b| b.median_fraction).collect();
    let max_count = results.iter().map(|r| r.max_count).max().unwrap_or(0);
    let summary = Summary {
        rows_flagged: rows
            .iter()
            .filter(|r| r.mean_within_3se == Some(false))
            .count() as u64,
        threshold_k: Some(k),
        trials_exceeding_fraction: Some(
            results.iter().filter(|r| r.max_count as f64 >= k).count() as f64 / trials as f64,
        ),
        max_count: Some(max_count),
        blocks_non_increasing: Some(non_increasing(&medians)),
        growth_within_band_fraction: Some(
            results.iter().filter(|r| r.growth.within_band).count() as f64 / trials as f64,
        ),
        decomposition_mismatches: Some(results.iter().map(|r| r.decomposition_mismatches).sum()),
        pairing_mismatches: Some(results.iter().map(|r| r.pairing_mismatches).sum()),
        ..Summary::default()
    };
    let growth = results.into_iter().map(|r| r.growth).collect();
    Ok(ExperimentReport {
        config,
        rows,
        blocks,
        summary,
        onset: None,
        growth,
    })
}
