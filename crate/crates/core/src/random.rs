//! Random test ensembles: Ginibre operators, GUE-like Hermitian matrices,
//! Haar-random pure states and induced density matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm, Operator, OperatorKind, C64};

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_operator<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let entries: Vec<C64> = (0..d * d).map(|_| gaussian_c64(rng)).collect();
    Operator::from_fn(d, |i, j| entries[j * d + i])
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = random_operator(d, rng);
    let h = Operator::from_fn(d, |i, j| (g.get(i, j) + g.get(j, i).conj()) * 0.5);
    h.with_kind(OperatorKind::Hermitian)
}

/// Haar-random unit vector.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d).map(|_| gaussian_c64(rng)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    v
}

pub fn random_pure_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    Operator::projector(&random_state(d, rng)).with_kind(OperatorKind::Density)
}

/// Full-rank density matrix `G G^dagger / tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    random_density_with_rank(d, d, rng)
}

/// Density matrix of rank at most `rank` drawn from the induced measure.
pub fn random_density_with_rank<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Operator {
    let cols: Vec<Vec<C64>> = (0..rank.max(1))
        .map(|_| (0..d).map(|_| gaussian_c64(rng)).collect())
        .collect();
    let raw = Operator::from_fn(d, |i, j| cols.iter().map(|c| c[i] * c[j].conj()).sum());
    let tr = raw.trace().re;
    let rho = Operator::from_fn(d, |i, j| {
        let z = raw.get(i, j) / tr;
        if i == j {
            C64::new(z.re, 0.0)
        } else {
            z
        }
    });
    rho.with_kind(OperatorKind::Density)
}
