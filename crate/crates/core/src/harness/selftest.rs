use serde::Serialize;

use super::checks::{optimizer_triangle, shift_rule_samples, telescoping_samples};
use super::config::{EnsembleConfig, ExperimentConfig};
use super::report::write_csv;
use super::runner::run_scaling_with_threads;
use super::validate::{haar_suite, HaarSuiteConfig};
use crate::costs::Task;
use crate::error::Result;
use crate::landscape::{qsl_bound, task_tight_bound};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn haar(seed: u64) -> Result<CheckOutcome> {
    let suite = haar_suite(&HaarSuiteConfig {
        samples: 1000,
        pairs: 3,
        dims: vec![(2, 2), (2, 4)],
        seed,
    })?;
    let detail = format!(
        "{} of {} identities within 3 stderr",
        suite.checks.len() - suite.failures(),
        suite.checks.len()
    );
    Ok(CheckOutcome::new("haar moments", suite.passed(), detail))
}

fn triangle(seed: u64) -> Result<CheckOutcome> {
    let runs = optimizer_triangle(20, 4, seed)?;
    let worst_grid = runs.iter().map(|r| r.grid_gap()).fold(0.0, f64::max);
    let close = runs.iter().filter(|r| r.adam_gap() <= 1e-3).count();
    let passed = worst_grid <= 0.01 && close * 100 >= 95 * runs.len();
    let detail = format!(
        "worst grid gap {worst_grid:.2e} w, adam within 1e-3 w on {close}/{}",
        runs.len()
    );
    Ok(CheckOutcome::new("optimizer triangle", passed, detail))
}

fn shift(seed: u64) -> Result<CheckOutcome> {
    let samples = shift_rule_samples(10, 4, 1e-5, seed)?;
    let worst = samples
        .iter()
        .map(|s| (s.shift - s.finite_difference).abs())
        .fold(0.0, f64::max);
    Ok(CheckOutcome::new(
        "parameter shift",
        worst <= 1e-6,
        format!("worst deviation {worst:.2e}"),
    ))
}

fn telescoping(seed: u64) -> Result<CheckOutcome> {
    let pairs = telescoping_samples(3, 4, 2, seed)?;
    let passed = pairs.iter().all(|(l, r)| l <= &(r + 1e-9));
    Ok(CheckOutcome::new(
        "telescoping",
        passed,
        format!("{} instances", pairs.len()),
    ))
}

fn bounds(seed: u64) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut rows_seen = 0;
    for task in [Task::Vqe, Task::Qae] {
        for ec in EnsembleConfig::DESIGNS {
            let cfg = ExperimentConfig {
                task,
                n_min: 2,
                n_max: 5,
                ensemble_config: ec,
                samples: 4,
                seed,
                ..ExperimentConfig::default()
            };
            for row in run_scaling_with_threads(&cfg, 0)? {
                let tight = task_tight_bound(task, 1.0, row.n, row.m).expect("task constant for m = 1");
                worst = worst.max(row.mean_delta_over_w / row.bound_general.min(tight));
                rows_seen += 1;
            }
        }
    }
    let qsl_ok = (qsl_bound(4, 1) - 0.25).abs() < 1e-15;
    Ok(CheckOutcome::new(
        "bound non-violation",
        worst <= 1.0 && qsl_ok,
        format!("{rows_seen} rows, largest mean/bound ratio {worst:.3}"),
    ))
}

fn reproducible(seed: u64) -> Result<CheckOutcome> {
    let cfg = ExperimentConfig {
        task: Task::Qae,
        n_min: 2,
        n_max: 4,
        samples: 3,
        seed,
        ..ExperimentConfig::default()
    };
    let mut outputs = Vec::new();
    for threads in [1, 2] {
        let mut buf = Vec::new();
        write_csv(&run_scaling_with_threads(&cfg, threads)?, &mut buf)?;
        outputs.push(buf);
    }
    Ok(CheckOutcome::new(
        "reproducible csv",
        outputs[0] == outputs[1],
        format!("{} bytes compared across 1 and 2 threads", outputs[0].len()),
    ))
}

/// Quick versions of the acceptance checks, each at a reduced size. A check
/// that errors is reported as failed with the error text.
pub fn selftest(seed: u64) -> Vec<CheckOutcome> {
    let checks: [(&'static str, fn(u64) -> Result<CheckOutcome>); 6] = [
        ("haar moments", haar),
        ("optimizer triangle", triangle),
        ("parameter shift", shift),
        ("telescoping", telescoping),
        ("bound non-violation", bounds),
        ("reproducible csv", reproducible),
    ];
    checks
        .into_iter()
        .map(|(name, f)| f(seed).unwrap_or_else(|e| CheckOutcome::new(name, false, format!("error: {e}"))))
        .collect()
}
