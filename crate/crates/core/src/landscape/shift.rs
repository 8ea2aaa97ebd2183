use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;

use super::exact::variation_range_exact_m1;
use super::transfer::transfer_tensor_pure;
use crate::circuits::{Axis, Circuit, GateSpec};
use crate::costs::Observable;
use crate::error::{Error, Result};
use crate::linalg::{BipartitePartition, C64};

/// Gate list whose rotation angles are the circuit parameters, in order.
#[derive(Clone, Debug)]
pub struct ParamCircuit {
    n: usize,
    gates: Vec<GateSpec>,
    param_gates: Vec<usize>,
}

impl ParamCircuit {
    pub fn new(n: usize, gates: Vec<GateSpec>) -> Result<Self> {
        let param_gates = gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.axis().is_some())
            .map(|(k, _)| k)
            .collect();
        Circuit::from_gates(n, gates.clone())?;
        Ok(Self { n, gates, param_gates })
    }

    /// `layers` blocks of random-axis rotations on every qubit followed by a
    /// CZ chain.
    pub fn random<R: Rng + ?Sized>(n: usize, layers: usize, rng: &mut R) -> Result<Self> {
        let mut gates = Vec::new();
        for _ in 0..layers {
            for q in 0..n {
                let axis = Axis::ALL[rng.random_range(0..3)];
                gates.push(GateSpec::rotation(axis, q, rng.random::<f64>() * TAU));
            }
            for q in 0..n.saturating_sub(1) {
                gates.push(GateSpec::cz(q, q + 1));
            }
        }
        Self::new(n, gates)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_params(&self) -> usize {
        self.param_gates.len()
    }

    pub fn params(&self) -> Vec<f64> {
        self.param_gates.iter().map(|&k| self.gates[k].angle).collect()
    }

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::InvalidArgument(format!(
                "circuit has {} parameters, got {}",
                self.num_params(),
                theta.len()
            )));
        }
        Ok(())
    }

    fn bound_gates(&self, theta: &[f64]) -> Vec<GateSpec> {
        let mut gates = self.gates.clone();
        for (&k, &t) in self.param_gates.iter().zip(theta) {
            gates[k].angle = t;
        }
        gates
    }

    pub fn bind(&self, theta: &[f64]) -> Result<Circuit> {
        self.check(theta)?;
        Ok(Circuit::Gates {
            n: self.n,
            gates: self.bound_gates(theta),
        })
    }
}

/// A parameterized circuit together with its observable and input state.
#[derive(Clone, Debug)]
pub struct ShiftContext {
    pub circuit: ParamCircuit,
    pub h: Observable,
    pub psi: Vec<C64>,
}

impl ShiftContext {
    pub fn new(circuit: ParamCircuit, h: Observable, psi: Vec<C64>) -> Result<Self> {
        let d = 1usize << circuit.n();
        if h.dim() != d || psi.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "observable ({}) and state ({}) must have dimension {d}",
                h.dim(),
                psi.len()
            )));
        }
        Ok(Self { circuit, h, psi })
    }

    pub fn cost(&self, theta: &[f64]) -> Result<f64> {
        let mut state = self.psi.clone();
        self.circuit.bind(theta)?.apply(&mut state);
        Ok(self.h.expectation(&state))
    }

    fn shifted(&self, theta: &[f64], mu: usize, delta: f64) -> Result<f64> {
        if mu >= theta.len() {
            return Err(Error::InvalidArgument(format!(
                "parameter index {mu} out of range for {} parameters",
                theta.len()
            )));
        }
        let mut t = theta.to_vec();
        t[mu] += delta;
        self.cost(&t)
    }

    /// `Delta_mu`: exact range of the cost over all single-qubit gates in
    /// the slot of parameter `mu`, with every other gate held fixed.
    pub fn local_variation_range(&self, theta: &[f64], mu: usize) -> Result<f64> {
        self.circuit.check(theta)?;
        let k = *self
            .circuit
            .param_gates
            .get(mu)
            .ok_or_else(|| Error::InvalidArgument(format!("parameter index {mu} out of range")))?;
        let gates = self.circuit.bound_gates(theta);
        let n = self.circuit.n();
        let v1 = Circuit::Gates {
            n,
            gates: gates[..k].to_vec(),
        };
        let v2 = Circuit::Gates {
            n,
            gates: gates[k + 1..].to_vec(),
        };
        let part = BipartitePartition::new(n, vec![gates[k].target])?;
        let t = transfer_tensor_pure(&self.h, &self.psi, &v1, &v2, &part)?;
        Ok(variation_range_exact_m1(&t)?.delta)
    }
}

/// `dC/d theta_mu = [C(theta + pi/2 e_mu) - C(theta - pi/2 e_mu)] / 2` for
/// gates `exp(-i theta P / 2)`.
pub fn parameter_shift_derivative(ctx: &ShiftContext, theta: &[f64], mu: usize) -> Result<f64> {
    Ok(0.5 * (ctx.shifted(theta, mu, FRAC_PI_2)? - ctx.shifted(theta, mu, -FRAC_PI_2)?))
}

/// Derivative with respect to the half angle `t = theta / 2`, so that each
/// gate reads `exp(-i t P)`: `C(t + pi/4) - C(t - pi/4)`.
pub fn parameter_shift_half_angle(ctx: &ShiftContext, theta: &[f64], mu: usize) -> Result<f64> {
    Ok(ctx.shifted(theta, mu, FRAC_PI_2)? - ctx.shifted(theta, mu, -FRAC_PI_2)?)
}

/// Central difference `[C(theta + h e_mu) - C(theta - h e_mu)] / (2h)`.
pub fn finite_difference(ctx: &ShiftContext, theta: &[f64], mu: usize, h: f64) -> Result<f64> {
    Ok((ctx.shifted(theta, mu, h)? - ctx.shifted(theta, mu, -h)?) / (2.0 * h))
}

/// Telescoping check `|C(theta') - C(theta)| <= sum_mu Delta_mu`, moving one
/// parameter at a time from `theta` to `theta'` and evaluating each
/// `Delta_mu` at the point before its move. Returns `(lhs, rhs)`.
pub fn telescoping_bound_check(ctx: &ShiftContext, theta: &[f64], theta_new: &[f64]) -> Result<(f64, f64)> {
    ctx.circuit.check(theta)?;
    ctx.circuit.check(theta_new)?;
    let lhs = (ctx.cost(theta_new)? - ctx.cost(theta)?).abs();
    let mut point = theta.to_vec();
    let mut rhs = 0.0;
    for mu in 0..theta.len() {
        rhs += ctx.local_variation_range(&point, mu)?;
        point[mu] = theta_new[mu];
    }
    if lhs > rhs + 1e-9 {
        return Err(Error::BoundViolation(format!(
            "telescoping sum {rhs:e} is below the cost difference {lhs:e}"
        )));
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::heisenberg_observable;
    use crate::linalg::{basis_state, single_site, Pauli};
    use crate::random::random_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cosine_context() -> ShiftContext {
        let circuit = ParamCircuit::new(1, vec![GateSpec::rotation(Axis::Y, 0, 0.0)]).unwrap();
        ShiftContext::new(circuit, Observable::Dense(Pauli::Z.matrix()), basis_state(2, 0)).unwrap()
    }

    #[test]
    fn cosine_derivatives() {
        let ctx = cosine_context();
        assert!(parameter_shift_derivative(&ctx, &[0.0], 0).unwrap().abs() < 1e-15);
        assert!((parameter_shift_derivative(&ctx, &[PI / 2.0], 0).unwrap() + 1.0).abs() < 1e-15);
        assert!((ctx.cost(&[0.7]).unwrap() - 0.7f64.cos()).abs() < 1e-15);
        assert!(parameter_shift_derivative(&ctx, &[0.0], 1).is_err());
    }

    #[test]
    fn shift_rules_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 5;
        let circuit = ParamCircuit::random(n, 3, &mut rng).unwrap();
        let ctx = ShiftContext::new(
            circuit,
            heisenberg_observable(n, true).unwrap(),
            random_state(32, &mut rng),
        )
        .unwrap();
        let theta = ctx.circuit.params();
        for mu in 0..ctx.circuit.num_params() {
            let shift = parameter_shift_derivative(&ctx, &theta, mu).unwrap();
            let fd = finite_difference(&ctx, &theta, mu, 1e-5).unwrap();
            assert!((shift - fd).abs() < 1e-6, "mu = {mu}: {shift} vs {fd}");
            // A step h in theta is a step h/2 in the half angle.
            let half = parameter_shift_half_angle(&ctx, &theta, mu).unwrap();
            let fd_half = (ctx.shifted(&theta, mu, 1e-5).unwrap() - ctx.shifted(&theta, mu, -1e-5).unwrap()) / 1e-5;
            assert!((half - fd_half).abs() < 2e-6);
        }
    }

    #[test]
    fn derivative_is_bounded_by_local_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let circuit = ParamCircuit::random(4, 2, &mut rng).unwrap();
        let ctx = ShiftContext::new(circuit, heisenberg_observable(4, true).unwrap(), basis_state(16, 0)).unwrap();
        let theta = ctx.circuit.params();
        for mu in 0..ctx.circuit.num_params() {
            let g = parameter_shift_derivative(&ctx, &theta, mu).unwrap();
            assert!(g.abs() <= ctx.local_variation_range(&theta, mu).unwrap() + 1e-9);
        }
    }

    #[test]
    fn telescoping_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let circuit = ParamCircuit::random(4, 2, &mut rng).unwrap();
        let ctx = ShiftContext::new(
            circuit,
            heisenberg_observable(4, true).unwrap(),
            random_state(16, &mut rng),
        )
        .unwrap();
        let theta = ctx.circuit.params();
        let (lhs, rhs) = telescoping_bound_check(&ctx, &theta, &theta).unwrap();
        assert_eq!(lhs, 0.0);
        assert!(rhs >= 0.0);
        let other: Vec<f64> = theta.iter().map(|_| rng.random::<f64>() * TAU).collect();
        let (lhs, rhs) = telescoping_bound_check(&ctx, &theta, &other).unwrap();
        assert!(lhs <= rhs + 1e-9);

        let single = ParamCircuit::new(2, vec![GateSpec::rotation(Axis::X, 1, 0.3)]).unwrap();
        let h = Observable::Dense(single_site(&Pauli::Z.matrix(), 1, 2).unwrap());
        let ctx = ShiftContext::new(single, h, basis_state(4, 0)).unwrap();
        let (lhs, rhs) = telescoping_bound_check(&ctx, &[0.3], &[2.0]).unwrap();
        assert!(lhs <= rhs + 1e-12);
        assert!((rhs - 2.0).abs() < 1e-12);
    }
}
