//! Self-checks against brute-force oracles, small enough to run from the
//! command line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counts::{
    count_bruteforce, r_count, t_count, CountKind, RepresentationTable, SequenceSample,
};
use crate::error::Result;
use crate::field::{make_field, FieldSpec};
use crate::pairing::{sum_pair_count, sum_pairing};
use crate::prob::{
    elementary_symmetric, event_dist_exact, event_prob_bounds, lambda_stats, symmetric_bounds,
    Schedule,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

const FIELDS: [(u64, u32); 5] = [(2, 1), (3, 1), (2, 2), (5, 1), (3, 2)];

fn fields() -> impl Iterator<Item = FieldSpec> {
    FIELDS
        .iter()
        .map(|&(p, s)| make_field(p, s).expect("valid small field"))
}

fn random_sample(rng: &mut ChaCha8Rng, max_index: u64, density: f64) -> SequenceSample {
    let members: Vec<u64> = (0..=max_index)
        .filter(|_| rng.gen::<f64>() < density)
        .collect();
    SequenceSample::from_members(max_index, members).expect("in range")
}

/// Index addition against digit-wise addition mod `p` of the `F_p` vectors.
fn check_field() -> Result<OracleCheck> {
    let mut check = OracleCheck {
        name: "field addition",
        cases: 0,
        failures: 0,
    };
    for spec in fields() {
        let (p, s, q) = (spec.p(), spec.s() as usize, spec.q());
        let vec_of = |x: u64| -> Vec<u64> {
            let mut digits = Vec::new();
            let mut x = x;
            while x > 0 {
                let mut e = x % q;
                for _ in 0..s {
                    digits.push(e % p);
                    e /= p;
                }
                x /= q;
            }
            digits
        };
        let end = q.pow(3);
        for a in 0..end {
            for b in (0..end).step_by(3) {
                let (va, vb) = (vec_of(a), vec_of(b));
                let len = va.len().max(vb.len());
                let want: Vec<u64> = (0..len)
                    .map(|i| (va.get(i).unwrap_or(&0) + vb.get(i).unwrap_or(&0)) % p)
                    .collect();
                let mut got = vec_of(spec.index_add(a, b)?);
                got.resize(len, 0);
                check.cases += 1;
                check.failures += (got != want) as u64;
            }
        }
    }
    Ok(check)
}

fn check_pairing() -> Result<OracleCheck> {
    let mut check = OracleCheck {
        name: "sum pairing partition",
        cases: 0,
        failures: 0,
    };
    for spec in fields() {
        for target in 1..spec.q().pow(3) {
            let pairing = sum_pairing(&spec, target)?;
            let n = pairing.degree;
            let len = spec.block_len(n)?;
            let mut seen = vec![0u8; len as usize];
            let mut ok = pairing.pairs.len() as u64 == sum_pair_count(&spec, target)?;
            for &(a, b) in &pairing.pairs {
                seen[a as usize] += 1;
                seen[b as usize] += 1;
                ok &= spec.index_add(a, b)? == target && b >= spec.pow(n)?;
            }
            if let Some(n0) = pairing.self_index {
                seen[n0 as usize] += 1;
                ok &= spec.index_add(n0, n0)? == target;
            }
            ok &= seen.iter().all(|&c| c == 1);
            check.cases += 1;
            check.failures += (!ok) as u64;
        }
    }
    Ok(check)
}

fn check_counts(seed: u64) -> Result<OracleCheck> {
    let mut check = OracleCheck {
        name: "counts vs brute force",
        cases: 0,
        failures: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for spec in fields() {
        let top = spec.q().pow(2) - 1;
        for _ in 0..10 {
            let w = random_sample(&mut rng, top, 0.4);
            let sums = RepresentationTable::build(&spec, &w, 1, CountKind::Sum)?;
            let diffs = RepresentationTable::build(&spec, &w, 1, CountKind::Diff)?;
            for target in 1..=top {
                let r = r_count(&spec, &w, target)?;
                let t = t_count(&spec, &w, target)?;
                let ok = r == count_bruteforce(&spec, &w, target, CountKind::Sum)?
                    && t == count_bruteforce(&spec, &w, target, CountKind::Diff)?
                    && r == sums.count(target) as u64
                    && t == diffs.count(target) as u64;
                check.cases += 1;
                check.failures += (!ok) as u64;
            }
        }
    }
    Ok(check)
}

/// The law of `r_N` by summing the product weight of every membership pattern
/// of the paired indices.
fn enumerated_law(spec: &FieldSpec, sched: &Schedule, target: u64) -> Result<Vec<f64>> {
    let n = spec.poly_deg(target).finite().expect("nonzero");
    let len = spec.block_len(n)?;
    let mut pairs = Vec::new();
    for a in 0..len {
        for b in a + 1..len {
            if spec.index_add(a, b)? == target {
                pairs.push((a, b));
            }
        }
    }
    let indices: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut law = vec![0.0; pairs.len() + 1];
    for mask in 0u64..1 << indices.len() {
        let mut weight = 1.0;
        for (i, &m) in indices.iter().enumerate() {
            let a = sched.alpha_at(m);
            weight *= if mask >> i & 1 == 1 { a } else { 1.0 - a };
        }
        let r = (0..pairs.len())
            .filter(|k| mask >> (2 * k) & 3 == 3)
            .count();
        law[r] += weight;
    }
    Ok(law)
}

fn check_distributions() -> Result<OracleCheck> {
    let mut check = OracleCheck {
        name: "exact law vs enumeration",
        cases: 0,
        failures: 0,
    };
    let schedules = [
        Schedule::constant(0.5)?,
        Schedule::constant(0.2)?,
        Schedule::thick(1.0)?,
        Schedule::sqrt_log(2.0)?,
    ];
    for spec in fields() {
        for target in 1..spec.q().pow(2) {
            let m = sum_pair_count(&spec, target)? as usize;
            if m > 8 {
                continue;
            }
            for sched in &schedules {
                let exact = event_dist_exact(&spec, sched, target, m)?;
                let brute = enumerated_law(&spec, sched, target)?;
                let stats = lambda_stats(&spec, sched, target)?;
                let mut ok = exact
                    .probs
                    .iter()
                    .zip(&brute)
                    .all(|(a, b)| (a - b).abs() <= 1e-12);
                ok &= (exact.total() - 1.0).abs() <= 1e-12;
                ok &= (exact.mean() - stats.lambda).abs() <= 1e-10;
                for d in 0..=m + 1 {
                    let (lo, hi) = event_prob_bounds(&spec, sched, target, d)?;
                    let p = exact.probs.get(d).copied().unwrap_or(0.0);
                    ok &= lo <= p * (1.0 + 1e-12) && p <= hi * (1.0 + 1e-12);
                }
                check.cases += 1;
                check.failures += (!ok) as u64;
            }
        }
    }
    Ok(check)
}

fn check_symmetric(seed: u64) -> Result<OracleCheck> {
    let mut check = OracleCheck {
        name: "symmetric function sandwich",
        cases: 0,
        failures: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..500 {
        let len = rng.gen_range(1..=30);
        let y: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..2.0)).collect();
        let sigma = elementary_symmetric(&y, len)?;
        let mut ok = true;
        for (d, &s) in sigma.iter().enumerate().skip(1) {
            let (lo, hi) = symmetric_bounds(&y, d)?;
            ok &= lo <= s * (1.0 + 1e-12) && s <= hi * (1.0 + 1e-12);
        }
        check.cases += 1;
        check.failures += (!ok) as u64;
    }
    Ok(check)
}

/// Runs every oracle suite.
pub fn run_oracles(seed: u64) -> Result<Vec<OracleCheck>> {
    Ok(vec![
        check_field()?,
        check_pairing()?,
        check_counts(seed)?,
        check_distributions()?,
        check_symmetric(seed)?,
    ])
}
