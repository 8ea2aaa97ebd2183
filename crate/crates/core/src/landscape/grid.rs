use std::f64::consts::TAU;

use super::transfer::TransferTensor;
use super::{Method, VariationResult};
use crate::circuits::LocalUnitaryParams;
use crate::error::{Error, Result};
use crate::linalg::C64;

pub const DEFAULT_GRID_RESOLUTION: usize = 64;

/// Exhaustive scan of `(phi, theta, alpha)` over a uniform
/// `resolution^3` grid on `[0, 2 pi)^3`.
pub fn variation_range_grid(t: &TransferTensor, resolution: usize) -> Result<VariationResult> {
    if t.part().m() != 1 {
        return Err(Error::UnsupportedSubsystem(t.part().m()));
    }
    if resolution < 4 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 4, got {resolution}"
        )));
    }
    let step = TAU / resolution as f64;
    // Half-angle phases e^{-i x / 2} for every grid angle.
    let half: Vec<C64> = (0..resolution)
        .map(|k| C64::from_polar(1.0, -0.5 * step * k as f64))
        .collect();
    let cs: Vec<(f64, f64)> = (0..resolution)
        .map(|k| {
            let x = 0.5 * step * k as f64;
            (x.cos(), x.sin())
        })
        .collect();

    let mut best_max = (f64::NEG_INFINITY, [0usize; 3]);
    let mut best_min = (f64::INFINITY, [0usize; 3]);
    for (ip, ep) in half.iter().enumerate() {
        for (ia, ea) in half.iter().enumerate() {
            // Rz(phi) Ry(theta) Rz(alpha) =
            // [[e^{-i(phi+alpha)/2} c, -e^{-i(phi-alpha)/2} s], [e^{i(phi-alpha)/2} s, e^{i(phi+alpha)/2} c]]
            let plus = ep * ea;
            let minus = ep * ea.conj();
            for (it, &(c, s)) in cs.iter().enumerate() {
                let u = [plus * c, -minus * s, minus.conj() * s, plus.conj() * c];
                let value = t.evaluate_entries(&u);
                if value > best_max.0 {
                    best_max = (value, [ip, it, ia]);
                }
                if value < best_min.0 {
                    best_min = (value, [ip, it, ia]);
                }
            }
        }
    }
    let params = |idx: [usize; 3]| LocalUnitaryParams::Euler {
        phi: step * idx[0] as f64,
        theta: step * idx[1] as f64,
        alpha: step * idx[2] as f64,
    };
    let mut result = VariationResult::new(
        best_max.0,
        best_min.0,
        params(best_max.1),
        params(best_min.1),
        Method::Grid,
    );
    result.iterations = resolution.pow(3);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::haar_random_unitary;
    use crate::landscape::exact::variation_range_exact_m1;
    use crate::landscape::transfer::transfer_tensor;
    use crate::linalg::{kron, BipartitePartition, Operator, Pauli};
    use crate::random::{random_density, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z_instance() -> TransferTensor {
        let part = BipartitePartition::leading(2, 1).unwrap();
        let h = kron(&Pauli::Z.matrix(), &Operator::identity(2)).unwrap();
        let id = Operator::identity(4);
        transfer_tensor(&h, &Operator::basis_projector(4, 0), &id, &id, &part).unwrap()
    }

    #[test]
    fn trivial_instance_is_resolved() {
        let r = variation_range_grid(&z_instance(), 64).unwrap();
        assert!(r.delta >= 1.99 && r.delta <= 2.0 + 1e-12);
    }

    #[test]
    fn grid_points_evaluate_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let part = BipartitePartition::leading(3, 1).unwrap();
        let t = transfer_tensor(
            &random_hermitian(8, &mut rng),
            &random_density(8, &mut rng),
            &haar_random_unitary(8, &mut rng),
            &haar_random_unitary(8, &mut rng),
            &part,
        )
        .unwrap();
        let r = variation_range_grid(&t, 16).unwrap();
        assert!((t.evaluate_params(&r.argmax).unwrap() - r.max_value).abs() < 1e-12);
        assert!((t.evaluate_params(&r.argmin).unwrap() - r.min_value).abs() < 1e-12);
    }

    #[test]
    fn refinement_is_monotone_and_converges_to_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let part = BipartitePartition::leading(3, 1).unwrap();
        for _ in 0..5 {
            let t = transfer_tensor(
                &random_hermitian(8, &mut rng),
                &random_density(8, &mut rng),
                &haar_random_unitary(8, &mut rng),
                &haar_random_unitary(8, &mut rng),
                &part,
            )
            .unwrap();
            let coarse = variation_range_grid(&t, 32).unwrap();
            let fine = variation_range_grid(&t, 128).unwrap();
            assert!(fine.delta >= coarse.delta - 1e-12);
            let exact = variation_range_exact_m1(&t).unwrap();
            assert!(exact.delta >= fine.delta - 1e-12);
            assert!(exact.delta - fine.delta < exact.delta * 0.01);
        }
    }

    #[test]
    fn rejects_small_resolution() {
        assert!(variation_range_grid(&z_instance(), 3).is_err());
    }
}
