//! Inclusion-probability schedules `α_j`.

use serde::Serialize;

use crate::error::{Error, Result};

/// `α_j = alpha · (ln j)^{c'} / j^c` for `j ≥ j0`, and `prefix` below `j0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLaw {
    pub alpha: f64,
    pub c: f64,
    pub c_prime: f64,
    pub j0: u64,
    pub prefix: f64,
}

impl PowerLaw {
    #[inline]
    fn closed_form(&self, j: f64) -> f64 {
        let log_term = if self.c_prime == 0.0 {
            1.0
        } else {
            j.ln().powf(self.c_prime)
        };
        self.alpha * log_term / j.powf(self.c)
    }

    #[inline]
    pub fn at(&self, j: u64) -> f64 {
        if j < self.j0 {
            self.prefix
        } else {
            self.closed_form(j as f64)
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("c must lie in (0, 1), got {}", self.c));
        }
        if !(self.c_prime >= 0.0 && self.c_prime.is_finite()) {
            return bad(format!("c' must be non-negative, got {}", self.c_prime));
        }
        if !(self.prefix > 0.0 && self.prefix < 1.0) {
            return bad(format!(
                "prefix value must lie in (0, 1), got {}",
                self.prefix
            ));
        }
        if self.j0 < 1 || (self.c_prime > 0.0 && self.j0 < 2) {
            return bad(format!(
                "j0 = {} makes alpha_j vanish (ln 1 = 0 or j = 0)",
                self.j0
            ));
        }
        // Integer steps past j0, then a geometric grid out to 2^60.
        let mut grid: Vec<f64> = (0..=256).map(|k| (self.j0 + k) as f64).collect();
        let mut x = (self.j0 + 256) as f64;
        while x < (1u64 << 60) as f64 {
            x *= 1.25;
            grid.push(x.floor());
        }
        let mut prev = f64::INFINITY;
        for &j in &grid {
            let v = self.closed_form(j);
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("alpha_{j} = {v} is outside (0, 1)"));
            }
            if v > prev {
                return bad(format!(
                    "alpha_j increases past j0 = {} (at j = {j})",
                    self.j0
                ));
            }
            prev = v;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    PowerLog,
    Thick,
    Constant,
}

/// A validated probability sequence `{α_j}`.
///
/// `Constant` violates the decay condition on purpose and exists for exact
/// small-case checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    #[non_exhaustive]
    PowerLog { law: PowerLaw },
    #[non_exhaustive]
    Thick { epsilon: f64, law: PowerLaw },
    #[non_exhaustive]
    Constant { value: f64 },
}

impl Schedule {
    pub fn power_log(alpha: f64, c: f64, c_prime: f64, j0: u64, prefix: f64) -> Result<Self> {
        let law = PowerLaw {
            alpha,
            c,
            c_prime,
            j0,
            prefix,
        };
        law.validate()?;
        Ok(Schedule::PowerLog { law })
    }

    /// `α_0 = 1/2`, `α_j = 1 / (2 j^{1 - 1/(2+ε)})`.
    pub fn thick(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let law = PowerLaw {
            alpha: 0.5,
            c: 1.0 - 1.0 / (2.0 + epsilon),
            c_prime: 0.0,
            j0: 1,
            prefix: 0.5,
        };
        law.validate()?;
        Ok(Schedule::Thick { epsilon, law })
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::InvalidSchedule(format!(
                "constant must lie in (0, 1), got {value}"
            )));
        }
        Ok(Schedule::Constant { value })
    }

    /// `α_j = α (ln j / j)^{1/2}` with the given `α`, prefix `1/2`, and `j0`
    /// the first `j ≥ 3` at which the closed form drops below `1/2`.
    pub fn sqrt_log(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let probe = PowerLaw {
            alpha,
            c: 0.5,
            c_prime: 0.5,
            j0: 3,
            prefix: 0.5,
        };
        // ln j / j is decreasing for j >= 3.
        let mut j0 = 3u64;
        while probe.closed_form(j0 as f64) >= 0.5 {
            j0 += 1;
        }
        Schedule::power_log(alpha, 0.5, 0.5, j0, 0.5)
    }

    pub fn kind(&self) -> ScheduleKind {
        match self {
            Schedule::PowerLog { .. } => ScheduleKind::PowerLog,
            Schedule::Thick { .. } => ScheduleKind::Thick,
            Schedule::Constant { .. } => ScheduleKind::Constant,
        }
    }

    /// The power law behind a `PowerLog` or `Thick` schedule.
    pub fn law(&self) -> Option<&PowerLaw> {
        match self {
            Schedule::PowerLog { law } | Schedule::Thick { law, .. } => Some(law),
            Schedule::Constant { .. } => None,
        }
    }

    #[inline]
    pub fn alpha_at(&self, j: u64) -> f64 {
        match self {
            Schedule::PowerLog { law } | Schedule::Thick { law, .. } => law.at(j),
            Schedule::Constant { value } => *value,
        }
    }

    /// Strictly inside (0,1), eventually non-increasing and tending to 0.
    pub fn is_decaying(&self) -> bool {
        self.law().is_some()
    }

    /// Whether `α` is non-increasing on `[j, ∞)`.
    pub fn monotone_from(&self, j: u64) -> bool {
        match self {
            Schedule::Constant { .. } => true,
            Schedule::PowerLog { law } | Schedule::Thick { law, .. } => {
                j >= law.j0 || law.prefix >= law.at(law.j0)
            }
        }
    }
}
