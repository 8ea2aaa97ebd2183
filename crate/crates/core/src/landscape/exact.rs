//! Closed-form extremes for a single-qubit local gate.
//!
//! Conjugation by `U` acts on the Bloch vectors as a rotation `R` in SO(3),
//! and the cost is affine in `R`: `C = c0 + sum_ab R_ab M_ab`. Maximizing a
//! linear function over SO(3) is a constrained orthogonal Procrustes
//! problem solved by one 3x3 SVD.

use nalgebra::{Matrix3, SVD};

use super::transfer::TransferTensor;
use super::{Method, VariationResult};
use crate::circuits::LocalUnitaryParams;
use crate::error::{Error, Result};
use crate::linalg::{Pauli, C64, ZERO};

/// `sigma_3 < DEGENERACY_RATIO * sigma_1` marks a non-unique optimizer.
pub const DEGENERACY_RATIO: f64 = 1e-10;

fn pauli_entries(p: Pauli) -> [[C64; 2]; 2] {
    let m = p.matrix();
    [[m.get(0, 0), m.get(0, 1)], [m.get(1, 0), m.get(1, 1)]]
}

/// Returns `(c0, M)`.
fn bloch_form(t: &TransferTensor) -> (f64, Matrix3<f64>) {
    let sigmas = [Pauli::X, Pauli::Y, Pauli::Z].map(pauli_entries);
    let mut c0 = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            c0 += t.coefficient(i, j, i, j);
        }
    }
    let mut m = Matrix3::zeros();
    for (a, sa) in sigmas.iter().enumerate() {
        for (b, sb) in sigmas.iter().enumerate() {
            let mut acc = ZERO;
            for j in 0..2 {
                for l in 0..2 {
                    let mut inner = ZERO;
                    for i in 0..2 {
                        for k in 0..2 {
                            inner += t.coefficient(i, j, k, l) * sa[i][k];
                        }
                    }
                    acc += sb[l][j] * inner;
                }
            }
            m[(a, b)] = 0.5 * acc.re;
        }
    }
    (0.5 * c0.re, m)
}

/// Rotation maximizing `tr(R^T M)` over SO(3), with the optimal value.
fn procrustes(m: &Matrix3<f64>) -> (Matrix3<f64>, f64, [f64; 3]) {
    let svd = SVD::new(*m, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = order.map(|k| svd.singular_values[k]);
    let u = Matrix3::from_columns(&order.map(|k| u.column(k).into_owned()));
    let v = Matrix3::from_columns(&order.map(|k| v_t.row(k).transpose()));
    let sign = (u * v.transpose()).determinant().signum();
    let d = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, sign));
    let r = u * d * v.transpose();
    (r, s[0] + s[1] + sign * s[2], s)
}

/// ZYZ Euler angles `(phi, theta, alpha)` with `R = Rz(phi) Ry(theta) Rz(alpha)`.
fn euler_zyz(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let c = r[(2, 2)].clamp(-1.0, 1.0);
    let theta = c.acos();
    let s = theta.sin();
    if s > 1e-9 {
        let phi = r[(1, 2)].atan2(r[(0, 2)]);
        let alpha = r[(2, 1)].atan2(-r[(2, 0)]);
        (phi, theta, alpha)
    } else if c > 0.0 {
        (r[(1, 0)].atan2(r[(0, 0)]), 0.0, 0.0)
    } else {
        // R = Rz(phi) Ry(pi), and Ry(pi) = diag(-1, 1, -1).
        ((-r[(1, 0)]).atan2(-r[(0, 0)]), std::f64::consts::PI, 0.0)
    }
}

/// Exact maximum and minimum of the cost over all single-qubit `U_A`.
pub fn variation_range_exact_m1(t: &TransferTensor) -> Result<VariationResult> {
    if t.part().m() != 1 {
        return Err(Error::UnsupportedSubsystem(t.part().m()));
    }
    let (c0, m) = bloch_form(t);
    let (r_max, best, s) = procrustes(&m);
    let (r_min, best_neg, _) = procrustes(&(-m));
    let to_params = |r: &Matrix3<f64>| {
        let (phi, theta, alpha) = euler_zyz(r);
        LocalUnitaryParams::Euler { phi, theta, alpha }
    };
    let mut result = VariationResult::new(
        c0 + best,
        c0 - best_neg,
        to_params(&r_max),
        to_params(&r_min),
        Method::Exact,
    );
    result.degenerate = s[2] <= DEGENERACY_RATIO * s[0];
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::local_unitary;
    use crate::costs::heisenberg;
    use crate::haar::haar_random_unitary;
    use crate::landscape::transfer::transfer_tensor;
    use crate::linalg::{BipartitePartition, Operator};
    use crate::random::{random_density, random_hermitian};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bloch_rotation(u: &Operator) -> Matrix3<f64> {
        let ps = [Pauli::X, Pauli::Y, Pauli::Z].map(|p| p.matrix());
        Matrix3::from_fn(|a, b| 0.5 * (&ps[a] * &(&(u * &ps[b]) * &u.dagger())).trace().re)
    }

    #[test]
    fn euler_angles_reproduce_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let u = haar_random_unitary(2, &mut rng);
            let r = bloch_rotation(&u);
            let (phi, theta, alpha) = euler_zyz(&r);
            let back = bloch_rotation(&local_unitary(&LocalUnitaryParams::Euler { phi, theta, alpha }).unwrap());
            assert!((back - r).abs().max() < 1e-9);
        }
        for r in [
            Matrix3::identity(),
            Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, 1.0, -1.0)),
        ] {
            let (phi, theta, alpha) = euler_zyz(&r);
            let back = bloch_rotation(&local_unitary(&LocalUnitaryParams::Euler { phi, theta, alpha }).unwrap());
            assert!((back - r).abs().max() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_z_reaches_both_poles() {
        // n = 1 has no B factor; embed as A = qubit 0 of two qubits with H = Z ⊗ I.
        let part = BipartitePartition::leading(2, 1).unwrap();
        let h = crate::linalg::kron(&Pauli::Z.matrix(), &Operator::identity(2)).unwrap();
        let rho = Operator::basis_projector(4, 0);
        let id = Operator::identity(4);
        let t = transfer_tensor(&h, &rho, &id, &id, &part).unwrap();
        let r = variation_range_exact_m1(&t).unwrap();
        assert!((r.max_value - 1.0).abs() < 1e-12);
        assert!((r.min_value + 1.0).abs() < 1e-12);
        assert!((r.delta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn insensitive_cost_has_zero_range() {
        let part = BipartitePartition::leading(2, 1).unwrap();
        let h = crate::linalg::kron(&Operator::identity(2), &Pauli::Z.matrix()).unwrap();
        let rho = Operator::basis_projector(4, 0);
        let id = Operator::identity(4);
        let t = transfer_tensor(&h, &rho, &id, &id, &part).unwrap();
        let r = variation_range_exact_m1(&t).unwrap();
        assert!(r.delta.abs() < 1e-12);
        assert!(r.degenerate);
    }

    #[test]
    fn extremes_are_attained_and_bound_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let a = rng.random_range(0..4);
            let part = BipartitePartition::new(4, vec![a]).unwrap();
            let h = random_hermitian(16, &mut rng);
            let rho = random_density(16, &mut rng);
            let v1 = haar_random_unitary(16, &mut rng);
            let v2 = haar_random_unitary(16, &mut rng);
            let t = transfer_tensor(&h, &rho, &v1, &v2, &part).unwrap();
            let r = variation_range_exact_m1(&t).unwrap();
            assert!((t.evaluate_params(&r.argmax).unwrap() - r.max_value).abs() < 1e-9);
            assert!((t.evaluate_params(&r.argmin).unwrap() - r.min_value).abs() < 1e-9);
            for _ in 0..200 {
                let c = t.evaluate(&haar_random_unitary(2, &mut rng)).unwrap();
                assert!(c <= r.max_value + 1e-12 && c >= r.min_value - 1e-12);
            }
            let w = crate::linalg::spectral_width(&h).unwrap();
            assert!(r.delta <= w + 1e-9);
        }
    }

    #[test]
    fn shifting_h_moves_values_not_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let part = BipartitePartition::leading(3, 1).unwrap();
        let h = heisenberg(3, true).unwrap();
        let rho = random_density(8, &mut rng);
        let v1 = haar_random_unitary(8, &mut rng);
        let v2 = haar_random_unitary(8, &mut rng);
        let shifted = &h + &Operator::identity(8).scale(C64::new(2.5, 0.0));
        let a = variation_range_exact_m1(&transfer_tensor(&h, &rho, &v1, &v2, &part).unwrap()).unwrap();
        let b = variation_range_exact_m1(&transfer_tensor(&shifted, &rho, &v1, &v2, &part).unwrap()).unwrap();
        assert!((b.max_value - a.max_value - 2.5).abs() < 1e-10);
        assert!((b.min_value - a.min_value - 2.5).abs() < 1e-10);
        assert!(!a.degenerate);
        let ua = local_unitary(&a.argmax).unwrap();
        let ub = local_unitary(&b.argmax).unwrap();
        assert!((bloch_rotation(&ua) - bloch_rotation(&ub)).abs().max() < 1e-8);
    }

    #[test]
    fn rejects_two_qubit_subsystem() {
        let part = BipartitePartition::leading(3, 2).unwrap();
        let id = Operator::identity(8);
        let t = transfer_tensor(&id, &Operator::basis_projector(8, 0), &id, &id, &part).unwrap();
        assert!(matches!(
            variation_range_exact_m1(&t),
            Err(Error::UnsupportedSubsystem(2))
        ));
    }
}
