use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::transfer::TransferTensor;
use super::{Method, VariationResult};
use crate::circuits::{local_unitary, LocalUnitaryParams};
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub grad_tol: f64,
    /// Central-difference step for the two-qubit chart.
    pub fd_step: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_iterations: 300,
            restarts: 3,
            grad_tol: 1e-6,
            fd_step: 1e-6,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::config(field, msg));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate", "must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta", "moment decay rates must lie in [0, 1)");
        }
        if self.restarts == 0 {
            return bad("restarts", "at least one run is required");
        }
        if !(self.fd_step > 0.0) || !(self.epsilon > 0.0) || !(self.grad_tol >= 0.0) {
            return bad("adam", "fd_step and epsilon must be positive, grad_tol non-negative");
        }
        Ok(())
    }
}

struct Objective<'a> {
    t: &'a TransferTensor,
    m: usize,
}

impl Objective<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        if self.m == 1 {
            euler_value(self.t, x[0], x[1], x[2])
        } else {
            let u = local_unitary(&LocalUnitaryParams::Generators(x.to_vec())).expect("15 coefficients");
            self.t.evaluate(&u).expect("matching dimension")
        }
    }

    fn gradient(&self, x: &[f64], fd_step: f64) -> Vec<f64> {
        let mut shifted = x.to_vec();
        (0..x.len())
            .map(|k| {
                // Each Euler angle drives one exp(-i x P / 2) rotation, so the
                // +-pi/2 shift rule is exact; the exponential chart needs finite differences.
                let h = if self.m == 1 { FRAC_PI_2 } else { fd_step };
                shifted[k] = x[k] + h;
                let up = self.value(&shifted);
                shifted[k] = x[k] - h;
                let down = self.value(&shifted);
                shifted[k] = x[k];
                if self.m == 1 {
                    0.5 * (up - down)
                } else {
                    (up - down) / (2.0 * h)
                }
            })
            .collect()
    }
}

fn euler_value(t: &TransferTensor, phi: f64, theta: f64, alpha: f64) -> f64 {
    let ep = C64::from_polar(1.0, -0.5 * phi);
    let ea = C64::from_polar(1.0, -0.5 * alpha);
    let (s, c) = (0.5 * theta).sin_cos();
    let plus = ep * ea;
    let minus = ep * ea.conj();
    t.evaluate_entries(&[plus * c, -minus * s, minus.conj() * s, plus.conj() * c])
}

struct Run {
    best_value: f64,
    best_x: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Adam ascent (`sign = 1`) or descent (`sign = -1`) from `x0`, keeping the
/// best point seen.
fn adam_run(obj: &Objective<'_>, cfg: &AdamConfig, x0: Vec<f64>, sign: f64) -> Run {
    let dim = x0.len();
    let mut x = x0;
    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut run = Run {
        best_value: obj.value(&x),
        best_x: x.clone(),
        iterations: 0,
        converged: cfg.max_iterations == 0,
    };
    for step in 1..=cfg.max_iterations {
        let g = obj.gradient(&x, cfg.fd_step);
        run.iterations = step;
        let gnorm = g.iter().map(|z| z * z).sum::<f64>().sqrt();
        if gnorm < cfg.grad_tol {
            run.converged = true;
            break;
        }
        let b1t = 1.0 - cfg.beta1.powi(step as i32);
        let b2t = 1.0 - cfg.beta2.powi(step as i32);
        for k in 0..dim {
            let gk = sign * g[k];
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk;
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gk * gk;
            x[k] += cfg.learning_rate * (m[k] / b1t) / ((v[k] / b2t).sqrt() + cfg.epsilon);
        }
        let value = obj.value(&x);
        if sign * value > sign * run.best_value {
            run.best_value = value;
            run.best_x = x.clone();
        }
        if step == cfg.max_iterations {
            run.converged = gnorm < cfg.grad_tol;
        }
    }
    run
}

/// Variation range by Adam over the local gate parameters, best of
/// `cfg.restarts` runs. The first run starts at the identity gate and the
/// others at random points drawn from `rng`.
pub fn variation_range_adam<R: Rng + ?Sized>(
    t: &TransferTensor,
    cfg: &AdamConfig,
    rng: &mut R,
) -> Result<VariationResult> {
    cfg.validate()?;
    let m = t.part().m();
    let dim = match m {
        1 => 3,
        2 => 15,
        other => return Err(Error::UnsupportedSubsystem(other)),
    };
    let obj = Objective { t, m };
    let restarts = if cfg.max_iterations == 0 { 1 } else { cfg.restarts };
    let mut starts = vec![vec![0.0; dim]];
    for _ in 1..restarts {
        starts.push(
            (0..dim)
                .map(|_| {
                    if m == 1 {
                        rng.random::<f64>() * TAU
                    } else {
                        (rng.random::<f64>() - 0.5) * PI
                    }
                })
                .collect(),
        );
    }

    let mut best_max: Option<Run> = None;
    let mut best_min: Option<Run> = None;
    let mut iterations = 0;
    let mut converged = true;
    for x0 in starts {
        let up = adam_run(&obj, cfg, x0.clone(), 1.0);
        let down = adam_run(&obj, cfg, x0, -1.0);
        iterations += up.iterations + down.iterations;
        converged &= up.converged && down.converged;
        if best_max.as_ref().is_none_or(|b| up.best_value > b.best_value) {
            best_max = Some(up);
        }
        if best_min.as_ref().is_none_or(|b| down.best_value < b.best_value) {
            best_min = Some(down);
        }
    }
    let (hi, lo) = (best_max.expect("one run"), best_min.expect("one run"));
    let mut result = VariationResult::new(
        hi.best_value,
        lo.best_value,
        LocalUnitaryParams::from_vec(m, &hi.best_x)?,
        LocalUnitaryParams::from_vec(m, &lo.best_x)?,
        Method::Adam,
    );
    result.iterations = iterations;
    result.converged = converged;
    Ok(result)
}
