use serde::Serialize;

use crate::costs::{Observable, Task};
use crate::error::{Error, Result};
use crate::linalg::{
    pauli_decompose, qubit_count, BipartitePartition, Operator, Pauli, PauliTerm, PauliWord, C64, PAULI_CUTOFF, ZERO,
};

/// `w / 2^(n/2 - 3m - 2)`.
pub fn theorem1_bound(w: f64, n: usize, m: usize) -> f64 {
    w * (3.0 * m as f64 + 2.0 - 0.5 * n as f64).exp2()
}

/// `4 w d_A^2 sqrt(d_A / d_B)`.
pub fn general_bound(w: f64, d_a: usize, d_b: usize) -> f64 {
    let (da, db) = (d_a as f64, d_b as f64);
    4.0 * w * da * da * (da / db).sqrt()
}

/// Variance bound `w * theorem1_bound(w, n, m)`.
pub fn variance_bound(w: f64, n: usize, m: usize) -> f64 {
    w * theorem1_bound(w, n, m)
}

/// Markov tail `Pr[Delta >= eps] <= theorem1_bound / eps`.
pub fn markov_tail(w: f64, n: usize, m: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail threshold must be positive, got {eps}"
        )));
    }
    Ok(theorem1_bound(w, n, m) / eps)
}

/// `1 / 2^(n - 2m)` for the state-learning cost.
pub fn qsl_bound(n: usize, m: usize) -> f64 {
    (2.0 * m as f64 - n as f64).exp2()
}

/// Task constants for `m = 1`: `24 w 2^(-n/2)` (Heisenberg VQE) and
/// `(8/sqrt 3) 2^(-n/2)` (autoencoder).
pub fn task_tight_bound(task: Task, w: f64, n: usize, m: usize) -> Option<f64> {
    if m != 1 {
        return None;
    }
    let scale = (-0.5 * n as f64).exp2();
    match task {
        Task::Vqe => Some(24.0 * w * scale),
        Task::Qae => Some(8.0 / 3f64.sqrt() * scale),
        Task::Qsl => None,
    }
}

fn rms_is_nonzero(frobenius_sqr: f64, dim: usize) -> bool {
    (frobenius_sqr / dim as f64).sqrt() > PAULI_CUTOFF
}

/// `(N_A, N_AB)` of a Hermitian operator with respect to `part`.
///
/// `N_A` flags a non-vanishing `tr_B(H0)` for the traceless part `H0`, and
/// `N_AB` counts non-identity Pauli words on A whose partner operator on B
/// (with its trace removed) is non-zero.
pub fn coupling_rank(h: &Operator, part: &BipartitePartition) -> Result<(usize, usize)> {
    let n = qubit_count(h.dim())?;
    if n != part.n() {
        return Err(Error::DimensionMismatch(format!(
            "operator acts on {n} qubits, partition on {}",
            part.n()
        )));
    }
    h.require_hermitian()?;
    let (da, db) = (part.d_a(), part.d_b());
    let d = part.dim();
    let shift = h.trace() / d as f64;
    let h0 = |r: usize, c: usize| if r == c { h.get(r, c) - shift } else { h.get(r, c) };

    let mut n_a = 0;
    let mut n_ab = 0;
    for w in 1..da * da {
        let sigma = PauliWord::from_index(part.m(), w).matrix();
        // O[b, b'] = tr_A((sigma ⊗ I) H0)[b, b'] / d_A
        let mut o = vec![ZERO; db * db];
        for b in 0..db {
            for b2 in 0..db {
                let mut acc = ZERO;
                for a in 0..da {
                    for a2 in 0..da {
                        let s = sigma.get(a, a2);
                        if s != ZERO {
                            acc += s * h0(part.join(a2, b), part.join(a, b2));
                        }
                    }
                }
                o[b * db + b2] = acc / da as f64;
            }
        }
        let tr: C64 = (0..db).map(|b| o[b * db + b]).sum::<C64>() / db as f64;
        // Local part: sigma_A ⊗ I_B coefficient; coupling part: traceless remainder.
        if tr.norm() > PAULI_CUTOFF {
            n_a = 1;
        }
        let remainder: f64 = (0..db * db)
            .map(|k| {
                let diag = if k / db == k % db { tr } else { ZERO };
                (o[k] - diag).norm_sqr()
            })
            .sum();
        if rms_is_nonzero(remainder, db) {
            n_ab += 1;
        }
    }
    Ok((n_a, n_ab))
}

/// Same quantity read directly off a Pauli expansion.
pub fn coupling_rank_terms(terms: &[PauliTerm], part: &BipartitePartition) -> (usize, usize) {
    use std::collections::BTreeMap;
    let mut local = false;
    // A word -> accumulated squared B coefficients after merging duplicates.
    let mut merged: BTreeMap<(Vec<u8>, Vec<u8>), C64> = BTreeMap::new();
    for t in terms {
        let code = |sites: &[usize]| -> Vec<u8> { sites.iter().map(|&q| pauli_code(t.word.0[q])).collect() };
        *merged
            .entry((code(part.a_sites()), code(part.b_sites())))
            .or_insert(ZERO) += t.coefficient;
    }
    let mut coupled: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for ((a, b), c) in merged {
        let a_id = a.iter().all(|&x| x == 0);
        let b_id = b.iter().all(|&x| x == 0);
        if a_id {
            continue;
        }
        if b_id {
            local |= c.norm() > PAULI_CUTOFF;
        } else {
            *coupled.entry(a).or_insert(0.0) += c.norm_sqr();
        }
    }
    let n_ab = coupled.values().filter(|&&s| s.sqrt() > PAULI_CUTOFF).count();
    (usize::from(local), n_ab)
}

fn pauli_code(p: Pauli) -> u8 {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// `max{N_A + 2 N_AB, d_A sqrt(d/(d-1))} * ||H - tr(H) I/d||_inf * sqrt(d_A/d_B)`.
pub fn tight_bound(h: &Operator, part: &BipartitePartition) -> Result<f64> {
    let (n_a, n_ab) = coupling_rank(h, part)?;
    let d = part.dim();
    let shift = (h.trace() / d as f64).re;
    let (lo, hi) = crate::linalg::extreme_eigenvalues(h)?;
    Ok(tight_formula(n_a, n_ab, part, (hi - shift).max(shift - lo)))
}

fn tight_formula(n_a: usize, n_ab: usize, part: &BipartitePartition, traceless_norm: f64) -> f64 {
    let (da, db) = (part.d_a() as f64, part.d_b() as f64);
    let d = da * db;
    let rank_factor = ((n_a + 2 * n_ab) as f64).max(da * (d / (d - 1.0)).sqrt());
    rank_factor * traceless_norm * (da / db).sqrt()
}

/// Pauli expansion of a structured observable without forming its matrix
/// when a closed form exists.
pub fn observable_pauli_terms(h: &Observable) -> Result<Vec<PauliTerm>> {
    fn z_strings(n: usize, sites: &[usize], signs: &[bool], offset: f64) -> Vec<PauliTerm> {
        // I - prod_r (I + s_r Z_r)/2 over the listed sites.
        let k = sites.len();
        let scale = -(-(k as f64)).exp2();
        let mut terms = vec![PauliTerm {
            coefficient: C64::new(offset + scale, 0.0),
            word: PauliWord(vec![Pauli::I; n]),
        }];
        for mask in 1usize..1 << k {
            let mut letters = vec![Pauli::I; n];
            let mut sign = 1.0;
            for (pos, &q) in sites.iter().enumerate() {
                if mask >> pos & 1 == 1 {
                    letters[q] = Pauli::Z;
                    if signs[pos] {
                        sign = -sign;
                    }
                }
            }
            terms.push(PauliTerm {
                coefficient: C64::new(scale * sign, 0.0),
                word: PauliWord(letters),
            });
        }
        terms
    }
    match h {
        Observable::Paulis { terms, .. } => Ok(terms.clone()),
        Observable::Discard { n, r_sites } => Ok(z_strings(*n, r_sites, &vec![false; r_sites.len()], 1.0)),
        Observable::Infidelity(phi) => {
            let n = qubit_count(phi.len())?;
            let support: Vec<usize> = (0..phi.len()).filter(|&j| phi[j].norm() > 1e-15).collect();
            if support.len() == 1 && (phi[support[0]].norm() - 1.0).abs() < 1e-12 {
                let j = support[0];
                let signs: Vec<bool> = (0..n).map(|q| j >> (n - 1 - q) & 1 == 1).collect();
                Ok(z_strings(n, &(0..n).collect::<Vec<_>>(), &signs, 1.0))
            } else {
                pauli_decompose(&h.to_operator(), n)
            }
        }
        Observable::Dense(op) => pauli_decompose(op, qubit_count(op.dim())?),
    }
}

/// Coupling-rank bound for a structured observable.
pub fn tight_bound_observable(h: &Observable, part: &BipartitePartition) -> Result<f64> {
    let terms = observable_pauli_terms(h)?;
    let (n_a, n_ab) = coupling_rank_terms(&terms, part);
    let shift: f64 = terms
        .iter()
        .filter(|t| t.word.0.iter().all(|&p| p == Pauli::I))
        .map(|t| t.coefficient.re)
        .sum();
    let (lo, hi) = h.extreme_eigenvalues()?;
    Ok(tight_formula(n_a, n_ab, part, (hi - shift).max(shift - lo)))
}

/// All analytic bounds for one task, system size and partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub task: Task,
    pub n: usize,
    pub m: usize,
    pub w: f64,
    pub general: f64,
    pub variance: f64,
    /// `(eps, tail bound)` pairs.
    pub markov: Vec<(f64, f64)>,
    pub tight: f64,
    pub task_tight: Option<f64>,
    pub qsl: Option<f64>,
    pub n_a: usize,
    pub n_ab: usize,
}

pub fn bound_report(task: Task, h: &Observable, part: &BipartitePartition, eps: &[f64]) -> Result<BoundReport> {
    let (n, m) = (part.n(), part.m());
    let w = h.spectral_width()?;
    let terms = observable_pauli_terms(h)?;
    let (n_a, n_ab) = coupling_rank_terms(&terms, part);
    let markov = eps
        .iter()
        .map(|&e| markov_tail(w, n, m, e).map(|p| (e, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport {
        task,
        n,
        m,
        w,
        general: theorem1_bound(w, n, m),
        variance: variance_bound(w, n, m),
        markov,
        tight: tight_bound_observable(h, part)?,
        task_tight: task_tight_bound(task, w, n, m),
        qsl: (task == Task::Qsl).then(|| qsl_bound(n, m)),
        n_a,
        n_ab,
    })
}
