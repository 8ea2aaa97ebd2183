//! Randomized measurements behind the self-test and the acceptance suite.
//! Each routine reports raw numbers; thresholds live with the callers.

use rand::Rng;
use serde::Serialize;

use crate::costs::heisenberg_observable;
use crate::error::Result;
use crate::haar::haar_random_unitary;
use crate::landscape::{
    finite_difference, parameter_shift_derivative, telescoping_bound_check, transfer_tensor, variation_range_adam,
    variation_range_exact_m1, variation_range_grid, AdamConfig, ParamCircuit, ShiftContext, DEFAULT_GRID_RESOLUTION,
};
use crate::linalg::{spectral_width, BipartitePartition};
use crate::random::{random_density, random_hermitian, random_state};
use crate::seed::substream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TriangleInstance {
    pub n: usize,
    pub w: f64,
    pub exact: f64,
    pub grid: f64,
    pub adam: f64,
}

impl TriangleInstance {
    pub fn grid_gap(&self) -> f64 {
        (self.exact - self.grid).abs() / self.w
    }

    pub fn adam_gap(&self) -> f64 {
        (self.exact - self.adam).abs() / self.w
    }
}

/// Exact, grid and Adam ranges on random single-qubit instances with
/// `2 <= n <= max_n`: random Hermitian `H`, random mixed `rho`, Haar `V1`, `V2`
/// and a random site for the local gate.
pub fn optimizer_triangle(instances: usize, max_n: usize, seed: u64) -> Result<Vec<TriangleInstance>> {
    (0..instances)
        .map(|k| {
            let mut rng = substream(seed, &[k as u64]);
            let n = rng.random_range(2..=max_n.max(2));
            let d = 1 << n;
            let part = BipartitePartition::new(n, vec![rng.random_range(0..n)])?;
            let h = random_hermitian(d, &mut rng);
            let rho = random_density(d, &mut rng);
            let v1 = haar_random_unitary(d, &mut rng);
            let v2 = haar_random_unitary(d, &mut rng);
            let t = transfer_tensor(&h, &rho, &v1, &v2, &part)?;
            Ok(TriangleInstance {
                n,
                w: spectral_width(&h)?,
                exact: variation_range_exact_m1(&t)?.delta,
                grid: variation_range_grid(&t, DEFAULT_GRID_RESOLUTION)?.delta,
                adam: variation_range_adam(&t, &AdamConfig::default(), &mut rng)?.delta,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftSample {
    pub n: usize,
    pub mu: usize,
    pub shift: f64,
    pub finite_difference: f64,
}

/// Parameter-shift derivative against a central difference with step `h`,
/// for `params` random parameters spread over random circuits with
/// `2 <= n <= max_n` and a Heisenberg observable.
pub fn shift_rule_samples(params: usize, max_n: usize, h: f64, seed: u64) -> Result<Vec<ShiftSample>> {
    let per_circuit = 5;
    let mut out = Vec::with_capacity(params);
    let mut c = 0u64;
    while out.len() < params {
        let mut rng = substream(seed, &[c]);
        c += 1;
        let n = rng.random_range(2..=max_n.max(2));
        let layers = rng.random_range(1..=3);
        let circuit = ParamCircuit::random(n, layers, &mut rng)?;
        let psi = random_state(1 << n, &mut rng);
        let ctx = ShiftContext::new(circuit, heisenberg_observable(n, true)?, psi)?;
        let theta = ctx.circuit.params();
        for _ in 0..per_circuit.min(params - out.len()) {
            let mu = rng.random_range(0..theta.len());
            out.push(ShiftSample {
                n,
                mu,
                shift: parameter_shift_derivative(&ctx, &theta, mu)?,
                finite_difference: finite_difference(&ctx, &theta, mu, h)?,
            });
        }
    }
    Ok(out)
}

/// `(|C(theta') - C(theta)|, sum_mu Delta_mu)` on random `n`-qubit circuits
/// with `layers` blocks of rotations (`n * layers` parameters).
pub fn telescoping_samples(instances: usize, n: usize, layers: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    (0..instances)
        .map(|k| {
            let mut rng = substream(seed, &[k as u64]);
            let circuit = ParamCircuit::random(n, layers, &mut rng)?;
            let psi = random_state(1 << n, &mut rng);
            let ctx = ShiftContext::new(circuit, heisenberg_observable(n, true)?, psi)?;
            let theta = ctx.circuit.params();
            let other: Vec<f64> = theta
                .iter()
                .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
                .collect();
            telescoping_bound_check(&ctx, &theta, &other)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_are_consistent() {
        for inst in optimizer_triangle(4, 3, 1).unwrap() {
            assert!(inst.grid <= inst.exact + 1e-9 && inst.adam <= inst.exact + 1e-9);
            assert!(inst.exact <= inst.w + 1e-9);
            assert!(inst.grid_gap() < 0.01);
        }
        let shifts = shift_rule_samples(7, 4, 1e-5, 2).unwrap();
        assert_eq!(shifts.len(), 7);
        for s in shifts {
            assert!((s.shift - s.finite_difference).abs() < 1e-6);
        }
        for (lhs, rhs) in telescoping_samples(2, 3, 2, 3).unwrap() {
            assert!(lhs <= rhs + 1e-9);
        }
    }
}
