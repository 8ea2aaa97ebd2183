use crate::circuits::{local_unitary, Circuit, LocalUnitaryParams};
use crate::costs::{CostSpec, InputState, Observable};
use crate::error::{Error, Result};
use crate::linalg::{inner, BipartitePartition, Operator, C64, ZERO};

/// Quadratic form `C(U_A) = sum T[(i,j),(k,l)] U_ij conj(U_kl)` obtained by
/// contracting everything outside the local gate.
#[derive(Clone, Debug)]
pub struct TransferTensor {
    part: BipartitePartition,
    /// Row-major `d_A^2 x d_A^2`, pair `(i,j)` flattened as `i * d_A + j`.
    coefficients: Vec<C64>,
}

impl TransferTensor {
    pub fn from_coefficients(part: BipartitePartition, coefficients: Vec<C64>) -> Result<Self> {
        let da = part.d_a();
        if coefficients.len() != da.pow(4) {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients for d_A = {da}, got {}",
                da.pow(4),
                coefficients.len()
            )));
        }
        Ok(Self { part, coefficients })
    }

    pub fn part(&self) -> &BipartitePartition {
        &self.part
    }

    pub fn d_a(&self) -> usize {
        self.part.d_a()
    }

    #[inline]
    pub fn coefficient(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let da = self.d_a();
        self.coefficients[(i * da + j) * da * da + k * da + l]
    }

    /// Cost at local unitary entries given row-major.
    pub fn evaluate_entries(&self, u: &[C64]) -> f64 {
        let n = u.len();
        let mut acc = ZERO;
        for (p, up) in u.iter().enumerate() {
            let row = &self.coefficients[p * n..(p + 1) * n];
            let mut s = ZERO;
            for (t, uq) in row.iter().zip(u) {
                s += t * uq.conj();
            }
            acc += s * up;
        }
        acc.re
    }

    pub fn evaluate(&self, u: &Operator) -> Result<f64> {
        let da = self.d_a();
        if u.dim() != da {
            return Err(Error::DimensionMismatch(format!(
                "local unitary has dimension {}, subsystem A has {da}",
                u.dim()
            )));
        }
        let entries: Vec<C64> = (0..da * da).map(|p| u.get(p / da, p % da)).collect();
        Ok(self.evaluate_entries(&entries))
    }

    pub fn evaluate_params(&self, p: &LocalUnitaryParams) -> Result<f64> {
        if p.m() != self.part.m() {
            return Err(Error::UnsupportedSubsystem(p.m()));
        }
        self.evaluate(&local_unitary(p)?)
    }
}

/// Dense construction from full matrices `H`, `rho`, `V1`, `V2`.
pub fn transfer_tensor(
    h: &Operator,
    rho: &Operator,
    v1: &Operator,
    v2: &Operator,
    part: &BipartitePartition,
) -> Result<TransferTensor> {
    let d = part.dim();
    for (name, op) in [("H", h), ("rho", rho), ("V1", v1), ("V2", v2)] {
        if op.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "{name} has dimension {}, expected {d}",
                op.dim()
            )));
        }
    }
    let h_rot = h.conjugate_by(&v2.dagger());
    let rho_rot = rho.conjugate_by(v1);
    let (da, db) = (part.d_a(), part.d_b());
    let mut coefficients = vec![ZERO; da.pow(4)];
    for i in 0..da {
        for j in 0..da {
            for k in 0..da {
                for l in 0..da {
                    let mut acc = ZERO;
                    for b in 0..db {
                        for b2 in 0..db {
                            acc += h_rot.get(part.join(k, b), part.join(i, b2))
                                * rho_rot.get(part.join(j, b2), part.join(l, b));
                        }
                    }
                    coefficients[(i * da + j) * da * da + k * da + l] = acc;
                }
            }
        }
    }
    TransferTensor::from_coefficients(part.clone(), coefficients)
}

/// State-vector construction for a pure input `psi`, applying `V1`, `V2`
/// and `H` to `d_A^2` vectors instead of forming any `d x d` product.
pub fn transfer_tensor_pure(
    h: &Observable,
    psi: &[C64],
    v1: &Circuit,
    v2: &Circuit,
    part: &BipartitePartition,
) -> Result<TransferTensor> {
    let d = part.dim();
    if h.dim() != d || psi.len() != d || v1.dim() != d || v2.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "observable ({}), state ({}), V1 ({}) and V2 ({}) must all have dimension {d}",
            h.dim(),
            psi.len(),
            v1.dim(),
            v2.dim()
        )));
    }
    let (da, db) = (part.d_a(), part.d_b());
    let mut rotated = psi.to_vec();
    v1.apply(&mut rotated);

    // w[(j, a)] = V2 (|j>_A ⊗ beta_a), beta_a[b] = (V1 psi)[(a, b)].
    let mut w: Vec<Vec<C64>> = Vec::with_capacity(da * da);
    for j in 0..da {
        for a in 0..da {
            let mut v = vec![ZERO; d];
            for b in 0..db {
                v[part.join(j, b)] = rotated[part.join(a, b)];
            }
            v2.apply(&mut v);
            w.push(v);
        }
    }
    let hw: Vec<Vec<C64>> = w.iter().map(|v| h.apply(v)).collect();

    // C = sum_{(i,a),(j,b)} <w_ia|H|w_jb> U_jb conj(U_ia).
    let n2 = da * da;
    let mut coefficients = vec![ZERO; n2 * n2];
    for ia in 0..n2 {
        for jb in 0..n2 {
            coefficients[jb * n2 + ia] = inner(&w[ia], &hw[jb]);
        }
    }
    TransferTensor::from_coefficients(part.clone(), coefficients)
}

/// Transfer tensor of a task cost, using the state-vector path for pure
/// inputs and the dense path otherwise.
pub fn transfer_tensor_for(spec: &CostSpec, v1: &Circuit, v2: &Circuit) -> Result<TransferTensor> {
    match &spec.rho {
        InputState::Pure(psi) => transfer_tensor_pure(&spec.h, psi, v1, v2, &spec.part),
        InputState::Mixed(rho) => transfer_tensor(
            &spec.h.to_operator(),
            rho,
            &v1.to_operator(),
            &v2.to_operator(),
            &spec.part,
        ),
    }
}
