//! Monte-Carlo cross-check of the closed-form Haar second moments.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::haar::{
    average_reduced_purity, mc_second_moment, second_moment_by_contraction, second_moment_reduced_norm, McEstimate,
    MomentQuery,
};
use crate::linalg::{basis_state, BipartitePartition, Operator};
use crate::random::{random_operator, random_pure_density};
use crate::seed::{derive_seed, substream};

/// Agreement band in standard errors.
pub const HAAR_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaarSuiteConfig {
    pub samples: usize,
    pub pairs: usize,
    /// `(d_A, d_B)` grid; both must be powers of two.
    pub dims: Vec<(usize, usize)>,
    pub seed: u64,
}

impl Default for HaarSuiteConfig {
    fn default() -> Self {
        Self {
            samples: 5000,
            pairs: 20,
            dims: vec![(2, 2), (2, 4), (4, 4)],
            seed: 2021,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaarCheck {
    pub label: String,
    pub d_a: usize,
    pub d_b: usize,
    pub closed_form: f64,
    /// Index-by-index Weingarten contraction of the same moment.
    pub contraction: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub samples: usize,
    /// `(mc_mean - closed_form) / mc_stderr`.
    pub z: f64,
    pub passed: bool,
}

impl HaarCheck {
    fn new(label: String, query: &MomentQuery, closed_form: f64, mc: McEstimate) -> Result<Self> {
        let contraction = second_moment_by_contraction(query)?;
        let z = if mc.stderr > 0.0 {
            (mc.mean - closed_form) / mc.stderr
        } else {
            0.0
        };
        let passed = mc.agrees_with(closed_form, HAAR_SIGMAS)
            && (contraction - closed_form).abs() <= 1e-9 * closed_form.abs().max(1.0);
        Ok(Self {
            label,
            d_a: query.part.d_a(),
            d_b: query.part.d_b(),
            closed_form,
            contraction,
            mc_mean: mc.mean,
            mc_stderr: mc.stderr,
            samples: mc.samples,
            z,
            passed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HaarSuite {
    pub checks: Vec<HaarCheck>,
}

impl HaarSuite {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<18} {:>3} {:>3} {:>14} {:>14} {:>12} {:>7}  result",
            "identity", "dA", "dB", "closed form", "monte carlo", "stderr", "z"
        );
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<18} {:>3} {:>3} {:>14.8} {:>14.8} {:>12.3e} {:>7.2}  {}",
                c.label,
                c.d_a,
                c.d_b,
                c.closed_form,
                c.mc_mean,
                c.mc_stderr,
                c.z,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            s,
            "{} of {} checks passed",
            self.checks.len() - self.failures(),
            self.checks.len()
        );
        s
    }
}

fn partition(d_a: usize, d_b: usize) -> Result<BipartitePartition> {
    if !d_a.is_power_of_two() || !d_b.is_power_of_two() {
        return Err(crate::Error::NotPowerOfTwo(if d_a.is_power_of_two() {
            d_b
        } else {
            d_a
        }));
    }
    let m = d_a.trailing_zeros() as usize;
    let n = m + d_b.trailing_zeros() as usize;
    BipartitePartition::leading(n, m)
}

/// Random `(P, Q)` second moments on every `(d_A, d_B)` of the grid, plus
/// the reduced purity of a pure state at `d_A = d_B = 2`.
pub fn haar_suite(cfg: &HaarSuiteConfig) -> Result<HaarSuite> {
    let mut checks = Vec::new();
    for &(d_a, d_b) in &cfg.dims {
        let part = partition(d_a, d_b)?;
        let d = part.dim();
        for pair in 0..cfg.pairs {
            let path = [d_a as u64, d_b as u64, pair as u64];
            let mut rng = substream(cfg.seed, &path);
            let query = MomentQuery::new(random_operator(d, &mut rng), random_operator(d, &mut rng), part.clone())?;
            let closed = second_moment_reduced_norm(&query)?;
            let mc = mc_second_moment(
                &query,
                cfg.samples,
                derive_seed(cfg.seed, &[path[0], path[1], path[2], 1]),
            )?;
            checks.push(HaarCheck::new(format!("moment pair {pair}"), &query, closed, mc)?);
        }
    }

    let part = partition(2, 2)?;
    let mut rng = substream(cfg.seed, &[u64::MAX]);
    let rho = random_pure_density(4, &mut rng);
    let closed = average_reduced_purity(&rho, &part)?;
    let query = MomentQuery::new(rho, Operator::identity(4), part.clone())?;
    let mc = mc_second_moment(&query, cfg.samples, derive_seed(cfg.seed, &[u64::MAX, 1]))?;
    checks.push(HaarCheck::new("pure purity".into(), &query, closed, mc)?);

    let zero = Operator::projector(&basis_state(4, 0));
    let exact = average_reduced_purity(&zero, &part)?;
    let query = MomentQuery::new(zero, Operator::identity(4), part)?;
    let mut check = HaarCheck::new(
        "purity 4/5".into(),
        &query,
        exact,
        mc_second_moment(&query, cfg.samples, derive_seed(cfg.seed, &[u64::MAX, 2]))?,
    )?;
    check.passed &= (exact - 0.8).abs() < 1e-15;
    checks.push(check);
    Ok(HaarSuite { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_tabulates() {
        let suite = haar_suite(&HaarSuiteConfig {
            samples: 400,
            pairs: 2,
            dims: vec![(2, 2), (2, 4)],
            seed: 5,
        })
        .unwrap();
        assert_eq!(suite.checks.len(), 6);
        for c in &suite.checks {
            assert!((c.contraction - c.closed_form).abs() < 1e-9);
        }
        assert!((suite.checks[5].closed_form - 0.8).abs() < 1e-15);
        let table = suite.table();
        assert!(table.contains("purity 4/5"));
        assert_eq!(table.lines().count(), 8);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let cfg = HaarSuiteConfig {
            dims: vec![(3, 2)],
            ..HaarSuiteConfig::default()
        };
        assert!(haar_suite(&cfg).is_err());
    }
}
