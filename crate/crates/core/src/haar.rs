//! Haar-measure moments: a unitary sampler, the closed-form first and
//! second moment identities for reduced operators, and Monte-Carlo
//! estimators that cross-check them.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, BipartitePartition, KahanSum, Operator, OperatorKind, Traced, C64, ONE, ZERO};
use crate::random::random_operator;
use crate::seed::substream;

/// Haar-distributed unitary from the QR decomposition of a complex
/// Ginibre matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = random_operator(d, rng).into_matrix();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<C64> = (0..d)
        .map(|k| {
            let rk = r[(k, k)];
            if rk.norm() > 0.0 {
                rk / rk.norm()
            } else {
                ONE
            }
        })
        .collect();
    let u = DMatrix::from_fn(d, d, |i, j| q[(i, j)] * phases[j]);
    Operator::from_matrix(u)
        .expect("QR factor is square")
        .with_kind(OperatorKind::Unitary)
}

/// `E_V[V A V^dagger] = tr(A)/d * I`.
pub fn first_moment_twirl(a: &Operator) -> Operator {
    let d = a.dim();
    Operator::identity(d).scale(a.trace() / d as f64)
}

/// Operands of `E_V[ || tr_B(Q V P V^dagger) ||_2^2 ]`.
#[derive(Clone, Debug)]
pub struct MomentQuery {
    pub p: Operator,
    pub q: Operator,
    pub part: BipartitePartition,
}

impl MomentQuery {
    pub fn new(p: Operator, q: Operator, part: BipartitePartition) -> Result<Self> {
        let d = part.dim();
        if p.dim() != d || q.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "P ({}) and Q ({}) must both have dimension {d}",
                p.dim(),
                q.dim()
            )));
        }
        Ok(Self { p, q, part })
    }

    fn check(&self) -> Result<()> {
        let d = self.part.dim();
        if self.p.dim() != d || self.q.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "P ({}) and Q ({}) must both have dimension {d}",
                self.p.dim(),
                self.q.dim()
            )));
        }
        Ok(())
    }

    /// The Monte-Carlo integrand for one unitary `V`.
    pub fn integrand(&self, v: &Operator) -> Result<f64> {
        let rotated = self.p.conjugate_by(v);
        let inner = &self.q * &rotated;
        Ok(partial_trace(&inner, &self.part, Traced::B)?.frobenius_norm_sqr())
    }
}

/// Closed form of `E_V[ || tr_B(Q V P V^dagger) ||_2^2 ]` over the Haar
/// measure (equivalently any unitary 2-design):
///
/// `( ||tr_B Q||^2 (|tr P|^2 - ||P||^2/d) + d_A ||Q||^2 (||P||^2 - |tr P|^2/d) ) / (d^2 - 1)`.
pub fn second_moment_reduced_norm(query: &MomentQuery) -> Result<f64> {
    query.check()?;
    let d = query.part.dim() as f64;
    let d_a = query.part.d_a() as f64;
    let tr_b_q = partial_trace(&query.q, &query.part, Traced::B)?.frobenius_norm_sqr();
    let q2 = query.q.frobenius_norm_sqr();
    let p2 = query.p.frobenius_norm_sqr();
    let tr_p2 = query.p.trace().norm_sqr();
    let value = (tr_b_q * (tr_p2 - p2 / d) + d_a * q2 * (p2 - tr_p2 / d)) / (d * d - 1.0);
    Ok(value.max(0.0))
}

/// Same expectation obtained by contracting the element-wise Weingarten
/// formula for `v v v* v*` index by index. Limited to `d <= 64`.
pub fn second_moment_by_contraction(query: &MomentQuery) -> Result<f64> {
    query.check()?;
    let part = &query.part;
    let d = part.dim();
    if d > 64 {
        return Err(Error::DimensionTooLarge { dim: d, limit: 64 });
    }
    let (da, db) = (part.d_a(), part.d_b());
    let p = query.p.matrix();
    let q = query.q.matrix();
    let ix = |a: usize, b: usize| part.join(a, b);

    // P-only contractions that the delta patterns leave behind.
    let mut diag_p = ZERO;
    for j in 0..d {
        diag_p += p[(j, j)];
    }
    let mut full_p = 0.0;
    for j in 0..d {
        for k in 0..d {
            full_p += (p[(j, k)] * p[(j, k)].conj()).re;
        }
    }
    let diag_pp = (diag_p * diag_p.conj()).re;

    // i1=i1', i2=i2' patterns: Q indices pinned to (a' b) and (a' b').
    let mut q_pinned = ZERO;
    for a in 0..da {
        for a2 in 0..da {
            for b in 0..db {
                for b2 in 0..db {
                    q_pinned += q[(ix(a, b), ix(a2, b))] * q[(ix(a, b2), ix(a2, b2))].conj();
                }
            }
        }
    }
    // i1=i2', i2=i1' patterns: the B indices coincide and the Q column is free.
    let mut q_free = ZERO;
    for a in 0..da {
        for _a2 in 0..da {
            for b in 0..db {
                for i in 0..d {
                    q_free += q[(ix(a, b), i)] * q[(ix(a, b), i)].conj();
                }
            }
        }
    }

    let t1 = q_pinned * diag_pp; // j1=j1', j2=j2'
    let t2 = q_free * full_p; // j1=j2', j2=j1'
    let t3 = q_pinned * full_p; // j1=j2', j2=j1' with pinned Q
    let t4 = q_free * diag_pp; // j1=j1', j2=j2' with free Q
    let df = d as f64;
    let value = (t1 + t2) / (df * df - 1.0) - (t3 + t4) / (df * (df * df - 1.0));
    Ok(value.re.max(0.0))
}

/// `E_V[ || tr_B((O_A ⊗ O_B) V P V^dagger) ||_2^2 ]` for traceless `P`.
pub fn second_moment_product_traceless(
    o_a: &Operator,
    o_b: &Operator,
    p: &Operator,
    part: &BipartitePartition,
) -> Result<f64> {
    if o_a.dim() != part.d_a() || o_b.dim() != part.d_b() || p.dim() != part.dim() {
        return Err(Error::DimensionMismatch("O_A, O_B, P must match the partition".into()));
    }
    if p.trace().norm() > 1e-10 * p.max_abs().max(1.0) {
        return Err(Error::InvalidArgument("P must be traceless".into()));
    }
    let d = part.dim() as f64;
    let d_a = part.d_a() as f64;
    let value = o_a.frobenius_norm_sqr()
        * p.frobenius_norm_sqr()
        * (d_a * o_b.frobenius_norm_sqr() - o_b.trace().norm_sqr() / d)
        / (d * d - 1.0);
    Ok(value)
}

/// Haar average of the purity of `tr_B(V rho V^dagger)`.
pub fn average_reduced_purity(rho: &Operator, part: &BipartitePartition) -> Result<f64> {
    if rho.dim() != part.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} does not match partition dimension {}",
            rho.dim(),
            part.dim()
        )));
    }
    rho.require_density()?;
    let d_a = part.d_a() as f64;
    let d_b = part.d_b() as f64;
    let d = d_a * d_b;
    let purity = rho.frobenius_norm_sqr();
    Ok((d_a * d_a - 1.0) * d_b / (d * d - 1.0) * purity + (d_b * d_b - 1.0) * d_a / (d * d - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_values(values: &[f64], seed: u64) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidArgument("need at least two samples".into()));
        }
        let mean = values.iter().copied().collect::<KahanSum>().value() / n as f64;
        let var = values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .collect::<KahanSum>()
            .value()
            / (n as f64 - 1.0);
        Ok(Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            samples: n,
            seed,
        })
    }

    /// `|mean - target| <= k * stderr`, with an absolute floor for
    /// degenerate zero-variance estimates.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + 1e-12 * target.abs().max(1.0)
    }
}

/// Monte-Carlo estimate of the second moment under Haar-random `V`.
///
/// Sample `k` draws from the substream `(seed, k)`, so the estimate does not
/// depend on how many worker threads run.
pub fn mc_second_moment(query: &MomentQuery, samples: usize, seed: u64) -> Result<McEstimate> {
    query.check()?;
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    let d = query.part.dim();
    let values = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, &[k as u64]);
            let v = haar_random_unitary(d, &mut rng);
            query.integrand(&v)
        })
        .collect::<Result<Vec<f64>>>()?;
    McEstimate::from_values(&values, seed)
}

/// Entry-wise Monte-Carlo average of `V A V^dagger` with per-entry standard errors.
#[derive(Clone, Debug)]
pub struct TwirlEstimate {
    pub mean: Operator,
    /// Row-major standard error of each entry (real and imaginary parts pooled).
    pub stderr: Vec<f64>,
}

impl TwirlEstimate {
    pub fn within(&self, target: &Operator, k: f64) -> bool {
        let d = target.dim();
        (0..d).all(|i| {
            (0..d).all(|j| (self.mean.get(i, j) - target.get(i, j)).norm() <= k * self.stderr[i * d + j] + 1e-12)
        })
    }
}

pub fn mc_twirl_with(
    a: &Operator,
    samples: usize,
    seed: u64,
    sampler: impl Fn(&mut ChaCha8Rng) -> Operator + Sync,
) -> Result<TwirlEstimate> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let d = a.dim();
    let draws: Vec<Vec<C64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, &[k as u64]);
            let v = sampler(&mut rng);
            let t = a.conjugate_by(&v);
            (0..d * d).map(|idx| t.get(idx / d, idx % d)).collect()
        })
        .collect();
    let n = samples as f64;
    let mut mean = vec![ZERO; d * d];
    let mut stderr = vec![0.0; d * d];
    for idx in 0..d * d {
        let re: KahanSum = draws.iter().map(|v| v[idx].re).collect();
        let im: KahanSum = draws.iter().map(|v| v[idx].im).collect();
        let m = C64::new(re.value() / n, im.value() / n);
        let var: KahanSum = draws.iter().map(|v| (v[idx] - m).norm_sqr()).collect();
        mean[idx] = m;
        stderr[idx] = (var.value() / (n - 1.0) / n).sqrt();
    }
    Ok(TwirlEstimate {
        mean: Operator::from_rows(d, &mean)?,
        stderr,
    })
}

pub fn mc_twirl(a: &Operator, samples: usize, seed: u64) -> Result<TwirlEstimate> {
    let d = a.dim();
    mc_twirl_with(a, samples, seed, |rng| haar_random_unitary(d, rng))
}

/// Frame potential estimate `E|tr(U^dagger W)|^4 / d^2` over independent pairs
/// drawn from `sampler`. The Haar value is `2/d^2` for `d >= 2`.
pub fn frame_potential(
    d: usize,
    pairs: usize,
    seed: u64,
    sampler: impl Fn(&mut ChaCha8Rng) -> Operator + Sync,
) -> Result<McEstimate> {
    let values: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, &[k as u64]);
            let u = sampler(&mut rng);
            let w = sampler(&mut rng);
            let overlap = (u.dagger().matrix() * w.matrix()).trace().norm_sqr();
            overlap * overlap / (d * d) as f64
        })
        .collect();
    McEstimate::from_values(&values, seed)
}

pub fn haar_frame_potential(d: usize) -> f64 {
    2.0 / (d * d) as f64
}
