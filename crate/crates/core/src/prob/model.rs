use serde::Serialize;

use super::schedule::{PowerLaw, Schedule};
use super::symmetric::{choose2, elementary_symmetric, ln_factorial};
use super::CompensatedSum;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::pairing::{sum_pair_count, DiffPairs, SumPairs};

/// Above this many pairs `Π(1 − t_k)` is accumulated in log space.
const LOG_PRODUCT_THRESHOLD: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaStats {
    /// `λ_N = Σ α_a α_ã`.
    pub lambda: f64,
    /// `λ'_N = Σ α_a α_ã / (1 − α_a α_ã)`.
    pub lambda_prime: f64,
    /// `Q* = Σ (α_a α_ã / (1 − α_a α_ã))²`.
    pub q_star: f64,
    /// `m*_N = Σ_{m ≤ N} α_m`.
    pub m_star: f64,
}

/// The products `t_k = α_{a_k} α_{ã_k}` over the sum pairs of `N`.
pub fn pair_products<'a>(
    spec: &FieldSpec,
    sched: &'a Schedule,
    target: u64,
) -> Result<impl Iterator<Item = f64> + 'a> {
    Ok(SumPairs::new(spec, target)?.map(move |(a, b)| sched.alpha_at(a) * sched.alpha_at(b)))
}

/// `m*_N`.
pub fn m_star(sched: &Schedule, n: u64) -> f64 {
    (0..=n)
        .map(|m| sched.alpha_at(m))
        .collect::<CompensatedSum>()
        .value()
}

pub fn lambda_stats(spec: &FieldSpec, sched: &Schedule, target: u64) -> Result<LambdaStats> {
    let mut lambda = CompensatedSum::default();
    let mut lambda_prime = CompensatedSum::default();
    let mut q_star = CompensatedSum::default();
    for t in pair_products(spec, sched, target)? {
        let odds = t / (1.0 - t);
        lambda.add(t);
        lambda_prime.add(odds);
        q_star.add(odds * odds);
    }
    Ok(LambdaStats {
        lambda: lambda.value(),
        lambda_prime: lambda_prime.value(),
        q_star: q_star.value(),
        m_star: m_star(sched, target),
    })
}

/// `Var r_N = Σ t_k (1 − t_k)`: the pairs are disjoint, so their indicators
/// are independent.
pub fn r_variance(spec: &FieldSpec, sched: &Schedule, target: u64) -> Result<f64> {
    Ok(pair_products(spec, sched, target)?
        .map(|t| t * (1.0 - t))
        .collect::<CompensatedSum>()
        .value())
}

/// `(E t_N, Var t_N)`.
///
/// The indicator of `(a, a − N)` shares an index only with those of
/// `(a + N, a)` and `(a − N, a − 2N)`; in characteristic 2 those two pairs
/// coincide and carry the same two indices.
pub fn t_moments(spec: &FieldSpec, sched: &Schedule, target: u64) -> Result<(f64, f64)> {
    let mut mean = CompensatedSum::default();
    let mut var = CompensatedSum::default();
    for u in 0..spec.q() {
        for (a, b) in DiffPairs::new(spec, target, u)? {
            let (xa, xb) = (sched.alpha_at(a), sched.alpha_at(b));
            let t = xa * xb;
            mean.add(t);
            if spec.p() == 2 {
                var.add(2.0 * t * (1.0 - t));
            } else {
                let c = spec.sub_in_block(b, target);
                var.add(t * (1.0 - t));
                var.add(2.0 * t * sched.alpha_at(c) * (1.0 - xb));
            }
        }
    }
    Ok((mean.value(), var.value()))
}

/// The exact law of `r_N(ω)`, truncated at `d_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventDist {
    pub target: u64,
    /// `M(N)`.
    pub pair_count: u64,
    /// `probs[d] = P(r_N = d)` for `d ≤ d_max`.
    pub probs: Vec<f64>,
}

impl EventDist {
    pub fn total(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(d, p)| d as f64 * p)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// `P(r_N = d) = Π_k (1 − t_k) · σ_d(t_1/(1−t_1), …, t_M/(1−t_M))`.
///
/// Entries with `d > M` are zero.
pub fn event_dist_exact(
    spec: &FieldSpec,
    sched: &Schedule,
    target: u64,
    d_max: usize,
) -> Result<EventDist> {
    let m = sum_pair_count(spec, target)?;
    let mut odds = Vec::with_capacity(m as usize);
    let mut log_base = CompensatedSum::default();
    let mut base = 1.0;
    for t in pair_products(spec, sched, target)? {
        odds.push(t / (1.0 - t));
        if m > LOG_PRODUCT_THRESHOLD {
            log_base.add((-t).ln_1p());
        } else {
            base *= 1.0 - t;
        }
    }
    if m > LOG_PRODUCT_THRESHOLD {
        base = log_base.value().exp();
    }
    let reach = d_max.min(odds.len());
    let sigma = elementary_symmetric(&odds, reach)?;
    let mut probs: Vec<f64> = sigma.into_iter().map(|s| base * s).collect();
    probs.resize(d_max + 1, 0.0);
    Ok(EventDist {
        target,
        pair_count: m,
        probs,
    })
}

/// `(lower, upper)` bounds on `P(r_N = d)`:
/// upper `λ'^d / d! · e^{−λ}`; lower `λ'^d / d! · e^{−λ'} (1 − C(d,2) λ'^{−2} Q*)`
/// clamped at zero, and zero when `d > M`.
pub fn event_prob_bounds(
    spec: &FieldSpec,
    sched: &Schedule,
    target: u64,
    d: usize,
) -> Result<(f64, f64)> {
    let stats = lambda_stats(spec, sched, target)?;
    let m = sum_pair_count(spec, target)?;
    Ok(event_bounds_from_stats(&stats, m, d))
}

pub(crate) fn event_bounds_from_stats(
    stats: &LambdaStats,
    pair_count: u64,
    d: usize,
) -> (f64, f64) {
    let lp = stats.lambda_prime;
    let poisson_log = d as f64 * lp.ln() - ln_factorial(d);
    let upper = (poisson_log - stats.lambda).exp();
    let lower = if d as u64 > pair_count {
        0.0
    } else {
        let correction = 1.0 - choose2(d) * stats.q_star / (lp * lp);
        ((poisson_log - lp).exp() * correction).max(0.0)
    };
    (lower, upper)
}

/// The constants in `α² D₁ (ln N)^{2c'} q^{n(1−2c)} < λ_N < α² D₂ (ln N)^{2c'} q^{n(1−2c)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    /// `q^{1−2c} / (2(1−c)) · (1 − 2^{−(1−c)})`.
    pub d1: f64,
    /// `2^{2c'+1} / (1−c) · (q/2)^{1−c}`.
    pub d2: f64,
}

impl BoundParams {
    pub fn new(q: u64, c: f64, c_prime: f64) -> Self {
        let q = q as f64;
        let d1 = q.powf(1.0 - 2.0 * c) / (2.0 * (1.0 - c)) * (1.0 - 2f64.powf(-(1.0 - c)));
        let d2 = 2f64.powf(2.0 * c_prime + 1.0) / (1.0 - c) * (q / 2.0).powf(1.0 - c);
        BoundParams { d1, d2 }
    }

    pub fn for_law(spec: &FieldSpec, law: &PowerLaw) -> Self {
        Self::new(spec.q(), law.c, law.c_prime)
    }
}

fn power_law(sched: &Schedule) -> Result<&PowerLaw> {
    sched.law().ok_or(Error::WrongScheduleKind {
        expected: "power-law",
    })
}

/// The closed-form band `(lower, upper)` for `λ_N`.
pub fn lambda_bounds(spec: &FieldSpec, sched: &Schedule, target: u64) -> Result<(f64, f64)> {
    let law = power_law(sched)?;
    if target < 2 {
        return Err(Error::DegenerateTarget);
    }
    let n = spec.poly_deg(target).finite().expect("target >= 2");
    let params = BoundParams::for_law(spec, law);
    let log_n = (target as f64).ln();
    let scale = law.alpha
        * law.alpha
        * log_n.powf(2.0 * law.c_prime)
        * (spec.q() as f64).powf(n as f64 * (1.0 - 2.0 * law.c));
    Ok((scale * params.d1, scale * params.d2))
}

/// `α / (1−c) · (ln N)^{c'} · N^{1−c}`.
pub fn m_star_asymptotic(sched: &Schedule, n: u64) -> Result<f64> {
    let law = power_law(sched)?;
    let nf = n as f64;
    let log_term = if law.c_prime == 0.0 {
        1.0
    } else {
        nf.ln().powf(law.c_prime)
    };
    Ok(law.alpha / (1.0 - law.c) * log_term * nf.powf(1.0 - law.c))
}

/// `((1−c)/α · j)^{1/(1−c)}`, the predicted index of the `j`-th member.
pub fn predicted_index_growth(sched: &Schedule, j: u64) -> Result<f64> {
    let law = power_law(sched)?;
    if law.c_prime != 0.0 {
        return Err(Error::WrongScheduleKind {
            expected: "power-law with c' = 0",
        });
    }
    Ok(((1.0 - law.c) / law.alpha * j as f64).powf(1.0 / (1.0 - law.c)))
}

/// Smallest `α` (times a 1.001 margin) with `α² D₁ > 1` at `c = c' = 1/2`.
pub fn thm1_alpha_min(spec: &FieldSpec) -> f64 {
    let d1 = BoundParams::new(spec.q(), 0.5, 0.5).d1;
    1.001 / d1.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_examples() {
        let f2 = make_field(2, 1).unwrap();
        let half = Schedule::constant(0.5).unwrap();
        let s = lambda_stats(&f2, &half, 2).unwrap();
        assert_relative_eq!(s.lambda, 0.5, max_relative = 1e-15);
        assert_relative_eq!(s.lambda_prime, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(s.q_star, 2.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(s.m_star, 1.5, max_relative = 1e-15);
        let f3 = make_field(3, 1).unwrap();
        let s = lambda_stats(&f3, &half, 1).unwrap();
        assert_relative_eq!(s.lambda, 0.25, max_relative = 1e-15);
        assert_relative_eq!(s.lambda_prime, 1.0 / 3.0, max_relative = 1e-15);
        assert!(matches!(
            lambda_stats(&f3, &half, 0),
            Err(Error::DegenerateTarget)
        ));
    }

    #[test]
    fn ratio_of_lambdas_is_pinned_by_alpha_at_block_start() {
        let f3 = make_field(3, 1).unwrap();
        let sched = Schedule::thick(1.0).unwrap();
        for target in [1u64, 5, 13, 40, 100, 400, 1000] {
            let s = lambda_stats(&f3, &sched, target).unwrap();
            let n = f3.poly_deg(target).finite().unwrap();
            let cap = 1.0 / (1.0 - sched.alpha_at(f3.pow(n).unwrap()));
            let ratio = s.lambda_prime / s.lambda;
            assert!((1.0..=cap * (1.0 + 1e-12)).contains(&ratio), "N={target}");
        }
    }

    #[test]
    fn exact_distribution_examples() {
        let half = Schedule::constant(0.5).unwrap();
        let f2 = make_field(2, 1).unwrap();
        let dist = event_dist_exact(&f2, &half, 2, 2).unwrap();
        for (got, want) in dist.probs.iter().zip([9.0 / 16.0, 6.0 / 16.0, 1.0 / 16.0]) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
        let f3 = make_field(3, 1).unwrap();
        let dist = event_dist_exact(&f3, &half, 1, 1).unwrap();
        assert_relative_eq!(dist.probs[0], 0.75, max_relative = 1e-15);
        assert_relative_eq!(dist.probs[1], 0.25, max_relative = 1e-15);
        let padded = event_dist_exact(&f3, &half, 1, 4).unwrap();
        assert_eq!(&padded.probs[2..], &[0.0, 0.0, 0.0]);
        assert!((padded.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_space_product_agrees_with_direct_product() {
        // M = (3^9 - 1)/2 = 9841 < threshold; M for degree 9 is above it.
        let f3 = make_field(3, 1).unwrap();
        let sched = Schedule::sqrt_log(thm1_alpha_min(&f3)).unwrap();
        for target in [3u64.pow(8) + 5, 3u64.pow(9) + 5] {
            let dist = event_dist_exact(&f3, &sched, target, 0).unwrap();
            let direct: f64 = pair_products(&f3, &sched, target)
                .unwrap()
                .map(|t| 1.0 - t)
                .product();
            assert_relative_eq!(dist.probs[0], direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn bounds_examples() {
        let half = Schedule::constant(0.5).unwrap();
        let f2 = make_field(2, 1).unwrap();
        let (lo, hi) = event_prob_bounds(&f2, &half, 2, 0).unwrap();
        assert_relative_eq!(lo, (-2.0f64 / 3.0).exp(), max_relative = 1e-14);
        assert_relative_eq!(hi, (-0.5f64).exp(), max_relative = 1e-14);
        assert!(lo < 0.5625 && 0.5625 < hi);
        let (lo1, _) = event_prob_bounds(&f2, &half, 2, 1).unwrap();
        assert_relative_eq!(lo1, 2.0 / 3.0 * (-2.0f64 / 3.0).exp(), max_relative = 1e-14);
        let (lo5, hi5) = event_prob_bounds(&f2, &half, 2, 5).unwrap();
        assert_eq!(lo5, 0.0);
        assert!(hi5 > 0.0);
    }

    #[test]
    fn closed_form_constants() {
        let p = BoundParams::new(3, 0.5, 0.5);
        assert_relative_eq!(p.d1, 1.0 - 0.5f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(p.d1, 0.292_893_218_813_452_5, max_relative = 1e-12);
        // 2^{2c'+1}/(1-c) = 8, times (3/2)^{1/2}.
        assert_relative_eq!(p.d2, 8.0 * 1.5f64.sqrt(), max_relative = 1e-14);
        for q in [2u64, 3, 4, 5, 7, 9, 27] {
            for c in [0.1, 0.5, 0.75, 0.9] {
                for cp in [0.0, 0.5, 2.0] {
                    let b = BoundParams::new(q, c, cp);
                    assert!(b.d1 > 0.0 && b.d1 < b.d2, "q={q} c={c} c'={cp}");
                }
            }
        }
        let f3 = make_field(3, 1).unwrap();
        let a = thm1_alpha_min(&f3);
        assert!((a - 1.8478).abs() < 2e-3);
        assert!(a * a * p.d1 > 1.0);
        assert_eq!(a, thm1_alpha_min(&make_field(7, 1).unwrap()));
    }

    #[test]
    fn lambda_band_at_half_exponent() {
        let f3 = make_field(3, 1).unwrap();
        let sched = Schedule::sqrt_log(thm1_alpha_min(&f3)).unwrap();
        let (lo, hi) = lambda_bounds(&f3, &sched, 500).unwrap();
        let a = sched.law().unwrap().alpha;
        let ln = 500f64.ln();
        assert_relative_eq!(lo, a * a * (1.0 - 0.5f64.sqrt()) * ln, max_relative = 1e-12);
        assert_relative_eq!(hi, a * a * 8.0 * 1.5f64.sqrt() * ln, max_relative = 1e-12);
        let half = Schedule::constant(0.5).unwrap();
        assert!(matches!(
            lambda_bounds(&f3, &half, 500),
            Err(Error::WrongScheduleKind { .. })
        ));
    }

    #[test]
    fn growth_predictions() {
        let thick = Schedule::thick(2.0).unwrap();
        for n in [16u64, 10_000, 1 << 40] {
            let want = 2.0 * (n as f64).powf(0.25);
            assert_relative_eq!(
                m_star_asymptotic(&thick, n).unwrap(),
                want,
                max_relative = 1e-12
            );
        }
        for j in [0u64, 1, 10, 60] {
            let want = (j as f64 / 2.0).powi(4);
            assert_relative_eq!(
                predicted_index_growth(&thick, j).unwrap(),
                want,
                max_relative = 1e-12
            );
        }
        for eps in [0.5, 1.0, 3.0] {
            let s = Schedule::thick(eps).unwrap();
            let law = s.law().unwrap();
            assert_relative_eq!(1.0 / (1.0 - law.c), 2.0 + eps, max_relative = 1e-12);
        }
        let sq = Schedule::sqrt_log(2.0).unwrap();
        assert!(predicted_index_growth(&sq, 5).is_err());
        let half = Schedule::constant(0.5).unwrap();
        assert!(m_star_asymptotic(&half, 5).is_err());
        assert_relative_eq!(m_star(&half, 99), 50.0, max_relative = 1e-14);
    }

    #[test]
    fn m_star_tracks_its_asymptotic_form() {
        let thick = Schedule::thick(2.0).unwrap();
        let ratios: Vec<f64> = [1_000u64, 10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| m_star(&thick, n) / m_star_asymptotic(&thick, n).unwrap())
            .collect();
        for w in ratios.windows(2) {
            assert!((w[1] - 1.0).abs() < (w[0] - 1.0).abs());
        }
        assert!((ratios[3] - 1.0).abs() < 0.05);
    }

    // Exact moments by enumerating every membership pattern of the block.
    fn enumerated_moments(
        spec: &FieldSpec,
        sched: &Schedule,
        target: u64,
        diff: bool,
    ) -> (f64, f64) {
        let n = spec.poly_deg(target).finite().unwrap();
        let len = spec.block_len(n).unwrap();
        let (mut m1, mut m2) = (0.0, 0.0);
        for mask in 0u64..1 << len {
            let mut w = 1.0;
            for i in 0..len {
                let a = sched.alpha_at(i);
                w *= if mask >> i & 1 == 1 { a } else { 1.0 - a };
            }
            let mut count = 0.0;
            for a in 0..len {
                for b in 0..len {
                    let hit = if diff {
                        spec.index_sub(a, b).unwrap() == target
                    } else {
                        a < b && spec.index_add(a, b).unwrap() == target
                    };
                    if hit && mask >> a & 1 == 1 && mask >> b & 1 == 1 {
                        count += 1.0;
                    }
                }
            }
            m1 += w * count;
            m2 += w * count * count;
        }
        (m1, m2 - m1 * m1)
    }

    #[test]
    fn moments_match_enumeration() {
        let sched = Schedule::thick(1.0).unwrap();
        for (p, s, targets) in [
            (2, 1, vec![1u64, 2, 3, 5, 7]),
            (3, 1, vec![1, 2, 4, 8]),
            (2, 2, vec![1, 3, 6]),
        ] {
            let k = make_field(p, s).unwrap();
            for target in targets {
                let (_, rv) = enumerated_moments(&k, &sched, target, false);
                assert_relative_eq!(
                    r_variance(&k, &sched, target).unwrap(),
                    rv,
                    max_relative = 1e-10
                );
                let (tm, tv) = enumerated_moments(&k, &sched, target, true);
                let (m, v) = t_moments(&k, &sched, target).unwrap();
                assert_relative_eq!(m, tm, max_relative = 1e-10);
                assert_relative_eq!(v, tv, max_relative = 1e-10);
            }
        }
    }
}
