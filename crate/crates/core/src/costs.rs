//! Cost functions of the three variational tasks together with their
//! observables and the Bures fidelity.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, extreme_eigenvalues, inner, lanczos_extremes, norm, singular_values, BipartitePartition, Operator,
    OperatorKind, Pauli, PauliTerm, PauliWord, C64, DENSE_EIG_LIMIT, ONE, ZERO,
};

/// Normalization slack accepted for input state vectors.
pub const STATE_NORM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Vqe,
    Qae,
    Qsl,
}

impl Task {
    pub fn id(self) -> u64 {
        match self {
            Task::Vqe => 0,
            Task::Qae => 1,
            Task::Qsl => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Vqe => "vqe",
            Task::Qae => "qae",
            Task::Qsl => "qsl",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vqe" => Ok(Task::Vqe),
            "qae" => Ok(Task::Qae),
            "qsl" => Ok(Task::Qsl),
            other => Err(Error::config(
                "task",
                format!("unknown task `{other}` (expected vqe, qae or qsl)"),
            )),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A Hermitian observable, stored densely or in a structured form that can
/// be applied to state vectors in `O(d)` per term.
#[derive(Clone, Debug)]
pub enum Observable {
    Dense(Operator),
    Paulis {
        n: usize,
        terms: Vec<PauliTerm>,
    },
    /// `I - |phi><phi|`.
    Infidelity(Vec<C64>),
    /// `I - |0...0><0...0|_R ⊗ I` on an `n`-qubit register.
    Discard {
        n: usize,
        r_sites: Vec<usize>,
    },
}

impl Observable {
    pub fn dim(&self) -> usize {
        match self {
            Observable::Dense(op) => op.dim(),
            Observable::Paulis { n, .. } | Observable::Discard { n, .. } => 1 << n,
            Observable::Infidelity(phi) => phi.len(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            Observable::Dense(op) => op.apply(v),
            Observable::Paulis { terms, .. } => {
                let mut out = vec![ZERO; v.len()];
                for t in terms {
                    for (o, x) in out.iter_mut().zip(t.word.apply(v)) {
                        *o += t.coefficient * x;
                    }
                }
                out
            }
            Observable::Infidelity(phi) => {
                let overlap = inner(phi, v);
                v.iter().zip(phi).map(|(x, p)| x - overlap * p).collect()
            }
            Observable::Discard { n, r_sites } => {
                let mask = r_mask(*n, r_sites);
                v.iter()
                    .enumerate()
                    .map(|(j, x)| if j & mask == 0 { ZERO } else { *x })
                    .collect()
            }
        }
    }

    pub fn to_operator(&self) -> Operator {
        match self {
            Observable::Dense(op) => op.clone(),
            _ => {
                let d = self.dim();
                let mut entries = vec![ZERO; d * d];
                let mut e = vec![ZERO; d];
                for col in 0..d {
                    e.fill(ZERO);
                    e[col] = ONE;
                    for (row, x) in self.apply(&e).into_iter().enumerate() {
                        entries[row * d + col] = x;
                    }
                }
                Operator::from_rows(d, &entries)
                    .expect("square by construction")
                    .with_kind(OperatorKind::Hermitian)
            }
        }
    }

    /// `(lambda_min, lambda_max)`.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        match self {
            Observable::Dense(op) => extreme_eigenvalues(op),
            Observable::Infidelity(phi) => Ok(if phi.len() > 1 { (0.0, 1.0) } else { (0.0, 0.0) }),
            Observable::Discard { .. } => Ok((0.0, 1.0)),
            Observable::Paulis { .. } => {
                let d = self.dim();
                if d <= DENSE_EIG_LIMIT {
                    extreme_eigenvalues(&self.to_operator())
                } else {
                    Ok(lanczos_extremes(|x| self.apply(x), d, 300))
                }
            }
        }
    }

    /// `w(H) = lambda_max - lambda_min`.
    pub fn spectral_width(&self) -> Result<f64> {
        let (lo, hi) = self.extreme_eigenvalues()?;
        Ok((hi - lo).max(0.0))
    }

    pub fn expectation(&self, v: &[C64]) -> f64 {
        inner(v, &self.apply(v)).re
    }
}

fn r_mask(n: usize, r_sites: &[usize]) -> usize {
    r_sites.iter().fold(0, |m, &q| m | (1 << (n - 1 - q)))
}

fn validate_sites(n: usize, sites: &[usize], field: &str) -> Result<()> {
    if sites.is_empty() || sites.len() > n {
        return Err(Error::InvalidArgument(format!(
            "{field} must list between 1 and {n} qubits, got {}",
            sites.len()
        )));
    }
    let mut seen = vec![false; n];
    for &q in sites {
        if q >= n {
            return Err(Error::QubitOutOfRange { qubit: q, n });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidArgument(format!("{field} lists qubit {q} twice")));
        }
    }
    Ok(())
}

fn check_normalized(v: &[C64]) -> Result<()> {
    let nv = norm(v);
    if (nv - 1.0).abs() > STATE_NORM_TOL {
        return Err(Error::NotNormalized(nv));
    }
    Ok(())
}

/// `tr(H U rho U^dagger)`.
pub fn generic_cost(h: &Operator, rho: &Operator, u: &Operator) -> Result<f64> {
    let d = h.dim();
    if rho.dim() != d || u.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "H ({d}), rho ({}) and U ({}) must share a dimension",
            rho.dim(),
            u.dim()
        )));
    }
    h.require_hermitian()?;
    rho.require_density()?;
    let evolved = rho.conjugate_by(u);
    let value = (h.matrix().transpose().component_mul(evolved.matrix())).sum();
    let scale = h.max_abs().max(1.0);
    if value.im.abs() > 1e-10 * scale {
        return Err(Error::NotHermitian(value.im.abs()));
    }
    Ok(value.re)
}

/// Pauli terms of `sum_i (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1})` on a chain.
/// With periodic boundaries and `n = 2` the wrap-around bond doubles the
/// single bond.
pub fn heisenberg_terms(n: usize, periodic: bool) -> Result<Vec<PauliTerm>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Heisenberg chain needs n >= 2, got {n}"
        )));
    }
    let bonds: Vec<(usize, usize)> = if periodic {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    } else {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    };
    let mut terms: Vec<PauliTerm> = Vec::new();
    for (i, j) in bonds {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let mut letters = vec![Pauli::I; n];
            letters[i] = p;
            letters[j] = p;
            let word = PauliWord(letters);
            match terms.iter_mut().find(|t| t.word == word) {
                Some(t) => t.coefficient += ONE,
                None => terms.push(PauliTerm { coefficient: ONE, word }),
            }
        }
    }
    Ok(terms)
}

pub fn heisenberg_observable(n: usize, periodic: bool) -> Result<Observable> {
    Ok(Observable::Paulis {
        n,
        terms: heisenberg_terms(n, periodic)?,
    })
}

pub fn heisenberg(n: usize, periodic: bool) -> Result<Operator> {
    Ok(heisenberg_observable(n, periodic)?.to_operator())
}

pub fn qae_observable(n: usize, r_sites: &[usize]) -> Result<Observable> {
    validate_sites(n, r_sites, "r_sites")?;
    Ok(Observable::Discard {
        n,
        r_sites: r_sites.to_vec(),
    })
}

/// `I - |0...0><0...0|_R ⊗ I_Q`.
pub fn qae_hamiltonian(n: usize, r_sites: &[usize]) -> Result<Operator> {
    Ok(qae_observable(n, r_sites)?.to_operator())
}

/// `1 - tr((|0><0|_R ⊗ I_Q) U rho U^dagger)`.
pub fn qae_cost(u: &Operator, rho_qr: &Operator, r_sites: &[usize]) -> Result<f64> {
    let n = crate::linalg::qubit_count(rho_qr.dim())?;
    if u.dim() != rho_qr.dim() {
        return Err(Error::DimensionMismatch(format!(
            "U ({}) and rho ({}) differ",
            u.dim(),
            rho_qr.dim()
        )));
    }
    validate_sites(n, r_sites, "r_sites")?;
    rho_qr.require_density()?;
    let mask = r_mask(n, r_sites);
    let evolved = rho_qr.conjugate_by(u);
    let kept: f64 = (0..rho_qr.dim())
        .filter(|j| j & mask == 0)
        .map(|j| evolved.get(j, j).re)
        .sum();
    Ok((1.0 - kept).clamp(0.0, 1.0))
}

/// `1 - |<phi|U|psi>|^2`.
pub fn qsl_cost(u: &Operator, psi: &[C64], phi: &[C64]) -> Result<f64> {
    if psi.len() != u.dim() || phi.len() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states ({}, {}) do not match U ({})",
            psi.len(),
            phi.len(),
            u.dim()
        )));
    }
    check_normalized(psi)?;
    check_normalized(phi)?;
    let overlap = inner(phi, &u.apply(psi)).norm_sqr();
    Ok((1.0 - overlap).clamp(0.0, 1.0))
}

pub fn qsl_observable(phi: &[C64]) -> Result<Observable> {
    check_normalized(phi)?;
    Ok(Observable::Infidelity(phi.to_vec()))
}

/// Eigenvalues at or below this are treated as zero when taking square roots.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// Columns `sqrt(p_k) v_k` for the eigenpairs of `rho` with `p_k > EIGEN_CLAMP`,
/// so that `sqrt(rho) = F F^dagger` restricted to the support.
fn weighted_support(rho: &Operator) -> Result<DMatrix<C64>> {
    let eig = eig_hermitian(rho)?;
    let v = eig.vectors.matrix();
    let keep: Vec<usize> = (0..rho.dim()).filter(|&k| eig.values[k] > EIGEN_CLAMP).collect();
    Ok(DMatrix::from_fn(rho.dim(), keep.len(), |i, c| {
        v[(i, keep[c])] * eig.values[keep[c]].sqrt()
    }))
}

/// `F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
///
/// Evaluated as the squared trace norm of `sqrt(rho) sqrt(sigma)`, reduced to
/// the supports of both states so that numerically zero eigenvalues never
/// pass through a square root.
pub fn bures_fidelity(rho: &Operator, sigma: &Operator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rho ({}) and sigma ({}) differ",
            rho.dim(),
            sigma.dim()
        )));
    }
    rho.require_density()?;
    sigma.require_density()?;
    let a = weighted_support(rho)?;
    let b = weighted_support(sigma)?;
    if a.ncols() == 0 || b.ncols() == 0 {
        return Ok(0.0);
    }
    let core = a.adjoint() * b;
    let trace_norm: f64 = core.singular_values().iter().sum();
    Ok((trace_norm * trace_norm).clamp(0.0, 1.0))
}

/// Numerical rank: singular values above `1e-10 * s_max`.
pub fn numerical_rank(m: &Operator) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > 1e-10 * smax).count()
}

/// `(F(rho, sigma), rank(rho sigma) tr(rho sigma))`.
pub fn fidelity_rank_bound(rho: &Operator, sigma: &Operator) -> Result<(f64, f64)> {
    let f = bures_fidelity(rho, sigma)?;
    let prod = rho * sigma;
    Ok((f, numerical_rank(&prod) as f64 * prod.trace().re))
}

/// Input state of a cost, kept as a vector when pure.
#[derive(Clone, Debug)]
pub enum InputState {
    Pure(Vec<C64>),
    Mixed(Operator),
}

impl InputState {
    pub fn dim(&self) -> usize {
        match self {
            InputState::Pure(v) => v.len(),
            InputState::Mixed(rho) => rho.dim(),
        }
    }

    pub fn density(&self) -> Operator {
        match self {
            InputState::Pure(v) => Operator::projector(v).with_kind(OperatorKind::Density),
            InputState::Mixed(rho) => rho.clone(),
        }
    }
}

/// Everything needed to evaluate one task cost.
#[derive(Clone, Debug)]
pub struct CostSpec {
    pub task: Task,
    pub h: Observable,
    pub rho: InputState,
    pub part: BipartitePartition,
}

impl CostSpec {
    pub fn new(task: Task, h: Observable, rho: InputState, part: BipartitePartition) -> Result<Self> {
        let d = part.dim();
        if h.dim() != d || rho.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "observable ({}) and state ({}) must match 2^{}",
                h.dim(),
                rho.dim(),
                part.n()
            )));
        }
        match &rho {
            InputState::Pure(v) => check_normalized(v)?,
            InputState::Mixed(r) => r.require_density()?,
        }
        Ok(Self { task, h, rho, part })
    }

    /// Cost at the full circuit unitary `U`.
    pub fn evaluate(&self, u: &Operator) -> Result<f64> {
        match &self.rho {
            InputState::Pure(v) => Ok(self.h.expectation(&u.apply(v))),
            InputState::Mixed(rho) => generic_cost(&self.h.to_operator(), rho, u),
        }
    }
}
