//! Dense complex linear algebra on qubit registers.
//!
//! Basis ordering: qubit 0 is the most significant tensor factor, so the
//! computational basis index of `|q0 q1 ... q(n-1)>` is `q0 * 2^(n-1) + ...`.
//! Matrices are stored column-major (nalgebra `DMatrix`).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest Hilbert-space dimension the kernel will build.
pub const MAX_DIM: usize = 1 << 14;

/// Relative tolerance used when validating Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Pauli coefficients at or below this magnitude count as vanishing.
pub const PAULI_CUTOFF: f64 = 1e-12;

/// Dense eigensolver is used up to this dimension; Lanczos above it.
pub const DENSE_EIG_LIMIT: usize = 1024;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Generic,
    Hermitian,
    Unitary,
    Density,
}

/// A dense square complex matrix together with an advisory kind tag.
#[derive(Clone, Debug)]
pub struct Operator {
    mat: DMatrix<C64>,
    kind: OperatorKind,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        Ok(Self {
            mat,
            kind: OperatorKind::Generic,
        })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            mat: DMatrix::from_fn(dim, dim, f),
            kind: OperatorKind::Generic,
        }
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self::from_fn(dim, |i, j| entries[i * dim + j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
            kind: OperatorKind::Unitary,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
            kind: OperatorKind::Generic,
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let d = diag.len();
        Self::from_fn(d, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// `|v><v|` for an arbitrary (not necessarily normalized) vector.
    pub fn projector(v: &[C64]) -> Self {
        let d = v.len();
        Self::from_fn(d, |i, j| v[i] * v[j].conj()).with_kind(OperatorKind::Hermitian)
    }

    /// Pure-state density matrix of a computational basis state.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut op = Self::zeros(dim);
        op.mat[(index, index)] = ONE;
        op.with_kind(OperatorKind::Density)
    }

    pub fn with_kind(mut self, kind: OperatorKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            kind: self.kind,
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            mat: &self.mat * c,
            kind: OperatorKind::Generic,
        }
    }

    /// `u * self * u^dagger`.
    pub fn conjugate_by(&self, u: &Operator) -> Self {
        let mat = &u.mat * &self.mat * u.mat.adjoint();
        Self { mat, kind: self.kind }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "vector length must match operator dimension");
        let mut out = vec![ZERO; d];
        for (j, &vj) in v.iter().enumerate() {
            if vj == ZERO {
                continue;
            }
            let col = self.mat.column(j);
            for (o, &m) in out.iter_mut().zip(col.iter()) {
                *o += m * vj;
            }
        }
        out
    }

    /// `<v| self |v>`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let hv = self.apply(v);
        inner(v, &hv)
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry of `|self - self^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = &self.mat * self.mat.adjoint();
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst <= tol
    }

    pub fn is_density(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) || (self.trace() - ONE).norm() > tol {
            return false;
        }
        match eig_hermitian(self) {
            Ok(eig) => eig.values.first().map_or(false, |&v| v >= -tol),
            Err(_) => false,
        }
    }

    /// Checks Hermiticity relative to the operator scale.
    pub fn require_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(())
    }

    pub fn require_density(&self) -> Result<()> {
        self.require_hermitian().map_err(|e| Error::NotDensity(e.to_string()))?;
        let tr = self.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let min = eig_hermitian(self)?.values[0];
        if min < -1e-10 {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    fn is_real(&self) -> bool {
        self.mat.iter().all(|z| z.im == 0.0)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions must agree");
        let kind = match (self.kind, rhs.kind) {
            (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
            _ => OperatorKind::Generic,
        };
        Operator {
            mat: &self.mat * &rhs.mat,
            kind,
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions must agree");
        let kind = match (self.kind, rhs.kind) {
            (OperatorKind::Hermitian | OperatorKind::Density, OperatorKind::Hermitian | OperatorKind::Density) => {
                OperatorKind::Hermitian
            }
            _ => OperatorKind::Generic,
        };
        Operator {
            mat: &self.mat + &rhs.mat,
            kind,
        }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions must agree");
        let kind = match (self.kind, rhs.kind) {
            (OperatorKind::Hermitian | OperatorKind::Density, OperatorKind::Hermitian | OperatorKind::Density) => {
                OperatorKind::Hermitian
            }
            _ => OperatorKind::Generic,
        };
        Operator {
            mat: &self.mat - &rhs.mat,
            kind,
        }
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn basis_state(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}

pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Which half of a bipartition is traced out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Traced {
    A,
    B,
}

/// Split of an `n`-qubit register into a local subsystem A and the rest B.
///
/// Local indices on A follow the order of `a_sites` (first site most
/// significant); B uses the remaining qubits in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartitePartition {
    n: usize,
    a_sites: Vec<usize>,
    b_sites: Vec<usize>,
    a_offsets: Vec<usize>,
    b_offsets: Vec<usize>,
}

impl BipartitePartition {
    pub fn new(n: usize, a_sites: Vec<usize>) -> Result<Self> {
        let m = a_sites.len();
        if m == 0 || m >= n {
            return Err(Error::InvalidPartition(format!(
                "subsystem A must hold between 1 and n-1 qubits (n = {n}, m = {m})"
            )));
        }
        if n > MAX_DIM.trailing_zeros() as usize {
            return Err(Error::DimensionTooLarge {
                dim: 1usize << n.min(63),
                limit: MAX_DIM,
            });
        }
        let mut seen = vec![false; n];
        for &s in &a_sites {
            if s >= n {
                return Err(Error::QubitOutOfRange { qubit: s, n });
            }
            if seen[s] {
                return Err(Error::InvalidPartition(format!("qubit {s} listed twice")));
            }
            seen[s] = true;
        }
        let b_sites: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
        let a_offsets = site_offsets(n, &a_sites);
        let b_offsets = site_offsets(n, &b_sites);
        Ok(Self {
            n,
            a_sites,
            b_sites,
            a_offsets,
            b_offsets,
        })
    }

    /// The first `m` qubits form subsystem A.
    pub fn leading(n: usize, m: usize) -> Result<Self> {
        Self::new(n, (0..m).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.a_sites.len()
    }

    pub fn a_sites(&self) -> &[usize] {
        &self.a_sites
    }

    pub fn b_sites(&self) -> &[usize] {
        &self.b_sites
    }

    pub fn d_a(&self) -> usize {
        self.a_offsets.len()
    }

    pub fn d_b(&self) -> usize {
        self.b_offsets.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Global basis index of `|a>_A |b>_B`.
    #[inline]
    pub fn join(&self, a: usize, b: usize) -> usize {
        self.a_offsets[a] | self.b_offsets[b]
    }

    pub fn split(&self, global: usize) -> (usize, usize) {
        let mut a = 0;
        for &q in &self.a_sites {
            a = (a << 1) | ((global >> (self.n - 1 - q)) & 1);
        }
        let mut b = 0;
        for &q in &self.b_sites {
            b = (b << 1) | ((global >> (self.n - 1 - q)) & 1);
        }
        (a, b)
    }
}

fn site_offsets(n: usize, sites: &[usize]) -> Vec<usize> {
    let k = sites.len();
    (0..1usize << k)
        .map(|local| {
            let mut g = 0;
            for (pos, &q) in sites.iter().enumerate() {
                let bit = (local >> (k - 1 - pos)) & 1;
                g |= bit << (n - 1 - q);
            }
            g
        })
        .collect()
}

pub fn kron(a: &Operator, b: &Operator) -> Result<Operator> {
    kron_with_limit(a, b, MAX_DIM)
}

pub fn kron_with_limit(a: &Operator, b: &Operator, limit: usize) -> Result<Operator> {
    let da = a.dim();
    let db = b.dim();
    let dim = da.checked_mul(db).unwrap_or(usize::MAX);
    if dim > limit {
        return Err(Error::DimensionTooLarge { dim, limit });
    }
    let kind = match (a.kind, b.kind) {
        (OperatorKind::Unitary, OperatorKind::Unitary) => OperatorKind::Unitary,
        (OperatorKind::Density, OperatorKind::Density) => OperatorKind::Density,
        (OperatorKind::Hermitian | OperatorKind::Density, OperatorKind::Hermitian | OperatorKind::Density) => {
            OperatorKind::Hermitian
        }
        _ => OperatorKind::Generic,
    };
    Ok(Operator {
        mat: a.mat.kronecker(&b.mat),
        kind,
    })
}

/// Kronecker product of a list of factors, first factor most significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Operator>) -> Result<Operator> {
    let mut iter = factors.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty Kronecker product".into()))?
        .clone();
    iter.try_fold(first, |acc, f| kron(&acc, f))
}

/// `op_A ⊗ I_B` placed on the sites of subsystem A.
pub fn embed(op_a: &Operator, part: &BipartitePartition) -> Result<Operator> {
    if op_a.dim() != part.d_a() {
        return Err(Error::DimensionMismatch(format!(
            "local operator has dimension {}, subsystem A has {}",
            op_a.dim(),
            part.d_a()
        )));
    }
    let d = part.dim();
    let mut mat = DMatrix::zeros(d, d);
    for b in 0..part.d_b() {
        for a2 in 0..part.d_a() {
            let col = part.join(a2, b);
            for a1 in 0..part.d_a() {
                mat[(part.join(a1, b), col)] = op_a.mat[(a1, a2)];
            }
        }
    }
    Ok(Operator { mat, kind: op_a.kind })
}

pub fn partial_trace(m: &Operator, part: &BipartitePartition, traced: Traced) -> Result<Operator> {
    if m.dim() != part.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {} does not match 2^{}",
            m.dim(),
            part.n()
        )));
    }
    let (d_keep, d_sum) = match traced {
        Traced::B => (part.d_a(), part.d_b()),
        Traced::A => (part.d_b(), part.d_a()),
    };
    let index = |keep: usize, summed: usize| match traced {
        Traced::B => part.join(keep, summed),
        Traced::A => part.join(summed, keep),
    };
    let mut out = DMatrix::zeros(d_keep, d_keep);
    for j in 0..d_keep {
        for i in 0..d_keep {
            let mut acc = ZERO;
            for s in 0..d_sum {
                acc += m.mat[(index(i, s), index(j, s))];
            }
            out[(i, j)] = acc;
        }
    }
    let kind = match m.kind {
        OperatorKind::Density | OperatorKind::Hermitian => m.kind,
        _ => OperatorKind::Generic,
    };
    Ok(Operator { mat: out, kind })
}

/// Eigen-decomposition of a Hermitian operator with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: Operator,
}

pub fn eig_hermitian(h: &Operator) -> Result<HermitianEigen> {
    h.require_hermitian()?;
    let d = h.dim();
    let (values, vectors) = if h.is_real() {
        let real = DMatrix::from_fn(d, d, |i, j| h.mat[(i, j)].re);
        let eig = SymmetricEigen::new(real);
        let vecs = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), vecs)
    } else {
        // Symmetrize to strip round-off before the solver sees it.
        let sym = (&h.mat + h.mat.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(d, d, |i, j| vectors[(i, order[j])]);
    Ok(HermitianEigen {
        values: sorted_values,
        vectors: Operator {
            mat: sorted_vectors,
            kind: OperatorKind::Unitary,
        },
    })
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(h: &Operator) -> Result<Vec<f64>> {
    h.require_hermitian()?;
    let d = h.dim();
    let mut values: Vec<f64> = if h.is_real() {
        let real = DMatrix::from_fn(d, d, |i, j| h.mat[(i, j)].re);
        real.symmetric_eigenvalues().iter().copied().collect()
    } else {
        let sym = (&h.mat + h.mat.adjoint()) * C64::new(0.5, 0.0);
        sym.symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `(lambda_min, lambda_max)` of a Hermitian operator.
pub fn extreme_eigenvalues(h: &Operator) -> Result<(f64, f64)> {
    h.require_hermitian()?;
    if h.dim() <= DENSE_EIG_LIMIT {
        let v = eigvals_hermitian(h)?;
        Ok((v[0], v[v.len() - 1]))
    } else {
        Ok(lanczos_extremes(|x| h.apply(x), h.dim(), 300))
    }
}

/// `w(H) = lambda_max - lambda_min`.
pub fn spectral_width(h: &Operator) -> Result<f64> {
    let (lo, hi) = extreme_eigenvalues(h)?;
    Ok((hi - lo).max(0.0))
}

/// Extreme Ritz values of a Hermitian linear map from a Lanczos run with
/// full reorthogonalization.
pub fn lanczos_extremes(apply: impl Fn(&[C64]) -> Vec<C64>, dim: usize, max_steps: usize) -> (f64, f64) {
    let steps = max_steps.min(dim).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_6e63_7a6f_73);
    let mut q: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let n0 = norm(&q);
    q.iter_mut().for_each(|z| *z /= n0);

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);
    let mut last = (f64::NAN, f64::NAN);
    for k in 0..steps {
        let mut w = apply(&q);
        let alpha = inner(&q, &w).re;
        basis.push(q.clone());
        alphas.push(alpha);
        // two passes of Gram-Schmidt against the whole Krylov basis
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let beta = norm(&w);
        if (k + 1) % 10 == 0 || beta < 1e-12 || k + 1 == steps {
            let ritz = tridiagonal_eigenvalues(&alphas, &betas);
            let now = (ritz[0], ritz[ritz.len() - 1]);
            let settled = (now.0 - last.0).abs() < 1e-13 * now.0.abs().max(1.0)
                && (now.1 - last.1).abs() < 1e-13 * now.1.abs().max(1.0);
            if beta < 1e-12 || settled || k + 1 == steps {
                return now;
            }
            last = now;
        }
        betas.push(beta);
        q = w.into_iter().map(|z| z / beta).collect();
    }
    unreachable!("Lanczos loop always returns on its final step")
}

fn tridiagonal_eigenvalues(alphas: &[f64], betas: &[f64]) -> Vec<f64> {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let mut v: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schatten {
    One,
    Two,
    Infinity,
}

pub fn singular_values(m: &Operator) -> Vec<f64> {
    let mut s: Vec<f64> = m.mat.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn schatten_norm(m: &Operator, p: Schatten) -> f64 {
    match p {
        Schatten::Two => m.frobenius_norm_sqr().sqrt(),
        Schatten::One => singular_values(m).iter().sum(),
        Schatten::Infinity => singular_values(m).first().copied().unwrap_or(0.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (usize, usize) {
        match self {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        }
    }

    pub fn matrix(self) -> Operator {
        let o = ZERO;
        let l = ONE;
        let entries = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -I, I, o],
            Pauli::Z => [l, o, o, -l],
        };
        Operator::from_rows(2, &entries)
            .expect("2x2 literal")
            .with_kind(OperatorKind::Hermitian)
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliWord(pub Vec<Pauli>);

impl PauliWord {
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("unknown Pauli symbol `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliWord)
    }

    /// Word with index `w` in base 4 (I=0, X=1, Y=2, Z=3), qubit 0 most significant.
    pub fn from_index(n: usize, mut w: usize) -> Self {
        let mut letters = vec![Pauli::I; n];
        for q in (0..n).rev() {
            letters[q] = Pauli::ALL[w & 3];
            w >>= 2;
        }
        PauliWord(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn masks(&self) -> (usize, usize) {
        let n = self.0.len();
        let mut x = 0;
        let mut z = 0;
        for (q, p) in self.0.iter().enumerate() {
            let (xb, zb) = p.bits();
            x |= xb << (n - 1 - q);
            z |= zb << (n - 1 - q);
        }
        (x, z)
    }

    /// `P|j> = phase(j) |j xor x>`; returns `phase(j)`.
    #[inline]
    fn action(z: usize, y_phase: C64, j: usize) -> C64 {
        if (j & z).count_ones() % 2 == 1 {
            -y_phase
        } else {
            y_phase
        }
    }

    pub fn matrix(&self) -> Operator {
        let n = self.0.len();
        let d = 1usize << n;
        let (x, z) = self.masks();
        let y_phase = I.powu((x & z).count_ones());
        let mut mat = DMatrix::zeros(d, d);
        for j in 0..d {
            mat[(j ^ x, j)] = Self::action(z, y_phase, j);
        }
        Operator {
            mat,
            kind: OperatorKind::Hermitian,
        }
    }

    /// `P v` in O(d) without materializing the matrix.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let (x, z) = self.masks();
        let y_phase = I.powu((x & z).count_ones());
        let mut out = vec![ZERO; v.len()];
        for (j, vj) in v.iter().enumerate() {
            out[j ^ x] = Self::action(z, y_phase, j) * vj;
        }
        out
    }

    /// `tr(P^dagger M)` in O(d).
    pub fn overlap(&self, m: &Operator) -> C64 {
        let d = m.dim();
        let (x, z) = self.masks();
        let y_phase = I.powu((x & z).count_ones());
        (0..d)
            .map(|j| Self::action(z, y_phase, j).conj() * m.mat[(j ^ x, j)])
            .sum()
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: C64,
    pub word: PauliWord,
}

/// Coefficients `c_w = tr(P_w^dagger H) / 2^n`, dropping `|c_w| <= 1e-12`.
pub fn pauli_decompose(h: &Operator, n: usize) -> Result<Vec<PauliTerm>> {
    let d = h.dim();
    let nq = qubit_count(d)?;
    if nq != n {
        return Err(Error::DimensionMismatch(format!("operator dimension {d} is not 2^{n}")));
    }
    let scale = 1.0 / d as f64;
    Ok((0..1usize << (2 * n))
        .filter_map(|w| {
            let word = PauliWord::from_index(n, w);
            let c = word.overlap(h) * scale;
            (c.norm() > PAULI_CUTOFF).then_some(PauliTerm { coefficient: c, word })
        })
        .collect())
}

pub fn pauli_reconstruct(terms: &[PauliTerm], n: usize) -> Operator {
    let d = 1usize << n;
    let mut acc = Operator::zeros(d);
    for t in terms {
        let p = t.word.matrix();
        acc.mat += p.mat * t.coefficient;
    }
    acc
}

/// Embeds a single-qubit operator on `qubit` of an `n`-qubit register.
pub fn single_site(op: &Operator, qubit: usize, n: usize) -> Result<Operator> {
    if qubit >= n {
        return Err(Error::QubitOutOfRange { qubit, n });
    }
    let id = Operator::identity(2);
    let factors: Vec<&Operator> = (0..n).map(|q| if q == qubit { op } else { &id }).collect();
    kron_all(factors)
}

/// Kahan-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut k = KahanSum::default();
        iter.into_iter().for_each(|x| k.add(x));
        k
    }
}
