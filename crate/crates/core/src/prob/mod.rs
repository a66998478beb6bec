//! The probability model: schedules, the pair statistics `λ_N`, `λ'_N`, `Q*`,
//! `m*_N`, the exact law of `r_N(ω)` and the bounds that sandwich it.

mod model;
mod schedule;
mod symmetric;

pub use model::{
    event_dist_exact, event_prob_bounds, lambda_bounds, lambda_stats, m_star, m_star_asymptotic,
    pair_products, predicted_index_growth, r_variance, t_moments, thm1_alpha_min, BoundParams,
    EventDist, LambdaStats,
};
pub use schedule::{PowerLaw, Schedule, ScheduleKind};
pub use symmetric::{
    elementary_symmetric, factorial_tail_bounds, head_bound, symmetric_bounds, upper_tail_bound,
    TailBounds,
};

/// Kahan–Babuška (Neumaier) compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
