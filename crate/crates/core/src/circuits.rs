//! Rotation and entangling gates, random circuit ensembles, and assembly of
//! `V2 (U_A ⊗ I_B) V1`.
//!
//! Rotations follow `R_P(theta) = exp(-i theta P / 2)`. Qubit 0 is the most
//! significant tensor factor, so it controls bit `n - 1` of a basis index.

use std::f64::consts::{FRAC_PI_4, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::haar_random_unitary;
use crate::linalg::{
    eig_hermitian, embed, BipartitePartition, Operator, OperatorKind, PauliWord, C64, I, MAX_DIM, ONE, ZERO,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cz,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub target: usize,
    /// Set only for `Cz`.
    pub control: Option<usize>,
    /// Radians; ignored for `Cz`.
    pub angle: f64,
}

impl GateSpec {
    pub fn rotation(axis: Axis, target: usize, angle: f64) -> Self {
        let kind = match axis {
            Axis::X => GateKind::Rx,
            Axis::Y => GateKind::Ry,
            Axis::Z => GateKind::Rz,
        };
        Self {
            kind,
            target,
            control: None,
            angle,
        }
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cz,
            target,
            control: Some(control),
            angle: 0.0,
        }
    }

    pub fn axis(&self) -> Option<Axis> {
        match self.kind {
            GateKind::Rx => Some(Axis::X),
            GateKind::Ry => Some(Axis::Y),
            GateKind::Rz => Some(Axis::Z),
            GateKind::Cz => None,
        }
    }

    pub fn with_angle(mut self, angle: f64) -> Self {
        self.angle = angle;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.target >= n {
            return Err(Error::QubitOutOfRange { qubit: self.target, n });
        }
        match (self.kind, self.control) {
            (GateKind::Cz, Some(c)) if c >= n => Err(Error::QubitOutOfRange { qubit: c, n }),
            (GateKind::Cz, Some(c)) if c == self.target => Err(Error::InvalidArgument(format!(
                "CZ control and target coincide on qubit {c}"
            ))),
            (GateKind::Cz, None) => Err(Error::InvalidArgument("CZ gate needs a control qubit".into())),
            _ => Ok(()),
        }
    }
}

/// 2x2 matrix of `exp(-i angle P / 2)`, row-major.
pub fn rotation_entries(axis: Axis, angle: f64) -> [[C64; 2]; 2] {
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    match axis {
        Axis::X => [[c, C64::new(0.0, -s)], [C64::new(0.0, -s), c]],
        Axis::Y => [[c, C64::new(-s, 0.0)], [C64::new(s, 0.0), c]],
        Axis::Z => [
            [C64::new((angle / 2.0).cos(), -s), ZERO],
            [ZERO, C64::new((angle / 2.0).cos(), s)],
        ],
    }
}

pub fn rotation(axis: Axis, angle: f64) -> Operator {
    let e = rotation_entries(axis, angle);
    Operator::from_fn(2, |i, j| e[i][j]).with_kind(OperatorKind::Unitary)
}

/// Dense `2^n x 2^n` matrix of a gate acting on an `n`-qubit register.
pub fn gate_matrix(g: &GateSpec, n: usize) -> Result<Operator> {
    g.validate(n)?;
    let d = checked_dim(n)?;
    let mut cols = Operator::identity(d).into_matrix();
    for col in 0..d {
        let mut column: Vec<C64> = cols.column(col).iter().copied().collect();
        apply_gate(&mut column, n, g);
        for (row, v) in column.into_iter().enumerate() {
            cols[(row, col)] = v;
        }
    }
    Ok(Operator::from_matrix(cols)?.with_kind(OperatorKind::Unitary))
}

fn checked_dim(n: usize) -> Result<usize> {
    if n == 0 || n > MAX_DIM.trailing_zeros() as usize {
        return Err(Error::DimensionTooLarge {
            dim: 1usize << n.min(63),
            limit: MAX_DIM,
        });
    }
    Ok(1 << n)
}

fn apply_single(state: &mut [C64], n: usize, qubit: usize, m: &[[C64; 2]; 2]) {
    let bit = 1usize << (n - 1 - qubit);
    for i0 in 0..state.len() {
        if i0 & bit != 0 {
            continue;
        }
        let i1 = i0 | bit;
        let (a, b) = (state[i0], state[i1]);
        state[i0] = m[0][0] * a + m[0][1] * b;
        state[i1] = m[1][0] * a + m[1][1] * b;
    }
}

/// Applies one gate in place to an `n`-qubit state vector.
pub fn apply_gate(state: &mut [C64], n: usize, g: &GateSpec) {
    match g.axis() {
        Some(axis) => apply_single(state, n, g.target, &rotation_entries(axis, g.angle)),
        None => {
            let mask = (1usize << (n - 1 - g.target)) | (1usize << (n - 1 - g.control.expect("validated CZ")));
            for (i, amp) in state.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
    }
}

/// A circuit on `n` qubits stored either as a gate list or as a dense matrix.
#[derive(Clone, Debug)]
pub enum Circuit {
    Identity { n: usize },
    Gates { n: usize, gates: Vec<GateSpec> },
    Dense(Operator),
}

impl Circuit {
    pub fn from_gates(n: usize, gates: Vec<GateSpec>) -> Result<Self> {
        checked_dim(n)?;
        for g in &gates {
            g.validate(n)?;
        }
        Ok(Circuit::Gates { n, gates })
    }

    pub fn from_operator(op: Operator) -> Result<Self> {
        let n = crate::linalg::qubit_count(op.dim())?;
        checked_dim(n)?;
        Ok(Circuit::Dense(op))
    }

    pub fn n(&self) -> usize {
        match self {
            Circuit::Identity { n } | Circuit::Gates { n, .. } => *n,
            Circuit::Dense(op) => op.dim().trailing_zeros() as usize,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Circuit::Identity { .. })
    }

    /// Applies the circuit to `state` in place.
    pub fn apply(&self, state: &mut [C64]) {
        match self {
            Circuit::Identity { .. } => {}
            Circuit::Gates { n, gates } => {
                for g in gates {
                    apply_gate(state, *n, g);
                }
            }
            Circuit::Dense(op) => {
                let out = op.apply(state);
                state.copy_from_slice(&out);
            }
        }
    }

    pub fn to_operator(&self) -> Operator {
        match self {
            Circuit::Identity { n } => Operator::identity(1 << n).with_kind(OperatorKind::Unitary),
            Circuit::Dense(op) => op.clone(),
            Circuit::Gates { .. } => {
                let d = self.dim();
                let mut entries = vec![ZERO; d * d];
                let mut column = vec![ZERO; d];
                for col in 0..d {
                    column.fill(ZERO);
                    column[col] = ONE;
                    self.apply(&mut column);
                    for (row, v) in column.iter().enumerate() {
                        entries[row * d + col] = *v;
                    }
                }
                Operator::from_rows(d, &entries)
                    .expect("square by construction")
                    .with_kind(OperatorKind::Unitary)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Identity,
    OneDesignLayer,
    HardwareEfficient { layers: usize },
    Haar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitEnsemble {
    pub kind: EnsembleKind,
    pub n: usize,
}

impl CircuitEnsemble {
    pub fn identity(n: usize) -> Self {
        Self {
            kind: EnsembleKind::Identity,
            n,
        }
    }

    pub fn one_design_layer(n: usize) -> Self {
        Self {
            kind: EnsembleKind::OneDesignLayer,
            n,
        }
    }

    /// Hardware-efficient ansatz with the default `10 n` repeated layers.
    pub fn hardware_efficient(n: usize) -> Self {
        Self::hardware_efficient_with_layers(n, 10 * n)
    }

    pub fn hardware_efficient_with_layers(n: usize, layers: usize) -> Self {
        Self {
            kind: EnsembleKind::HardwareEfficient { layers },
            n,
        }
    }

    pub fn haar(n: usize) -> Self {
        Self {
            kind: EnsembleKind::Haar,
            n,
        }
    }

    /// Draws one circuit. Gate-based ensembles stay in gate form so they can
    /// be applied to state vectors without materializing the matrix.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Circuit> {
        let n = self.n;
        checked_dim(n)?;
        Ok(match self.kind {
            EnsembleKind::Identity => Circuit::Identity { n },
            EnsembleKind::Haar => Circuit::Dense(haar_random_unitary(1 << n, rng)),
            EnsembleKind::OneDesignLayer => {
                let mut gates = Vec::with_capacity(3 * n);
                for q in 0..n {
                    let phi = rng.random::<f64>() * TAU;
                    let theta = rng.random::<f64>() * TAU;
                    let alpha = rng.random::<f64>() * TAU;
                    // Rz(phi) Ry(theta) Rz(alpha): the rightmost factor acts first.
                    gates.push(GateSpec::rotation(Axis::Z, q, alpha));
                    gates.push(GateSpec::rotation(Axis::Y, q, theta));
                    gates.push(GateSpec::rotation(Axis::Z, q, phi));
                }
                Circuit::Gates { n, gates }
            }
            EnsembleKind::HardwareEfficient { layers } => {
                let mut gates = Vec::with_capacity(n + layers * (2 * n - 1));
                for q in 0..n {
                    gates.push(GateSpec::rotation(Axis::Y, q, FRAC_PI_4));
                }
                for _ in 0..layers {
                    for q in 0..n {
                        let axis = Axis::ALL[rng.random_range(0..3)];
                        let theta = rng.random::<f64>() * TAU;
                        gates.push(GateSpec::rotation(axis, q, theta));
                    }
                    for q in 0..n.saturating_sub(1) {
                        gates.push(GateSpec::cz(q, q + 1));
                    }
                }
                Circuit::Gates { n, gates }
            }
        })
    }
}

/// Dense unitary of one draw from the ensemble.
pub fn sample_circuit<R: Rng + ?Sized>(e: &CircuitEnsemble, rng: &mut R) -> Result<Operator> {
    Ok(e.sample(rng)?.to_operator())
}

/// Parameters of the optimized local gate `U_A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LocalUnitaryParams {
    /// `R_z(phi) R_y(theta) R_z(alpha)` on one qubit.
    Euler { phi: f64, theta: f64, alpha: f64 },
    /// `exp(-i sum_k c_k G_k)` over the 15 non-identity two-qubit Pauli words.
    Generators(Vec<f64>),
}

impl LocalUnitaryParams {
    pub fn m(&self) -> usize {
        match self {
            LocalUnitaryParams::Euler { .. } => 1,
            LocalUnitaryParams::Generators(_) => 2,
        }
    }

    pub fn as_vec(&self) -> Vec<f64> {
        match self {
            LocalUnitaryParams::Euler { phi, theta, alpha } => vec![*phi, *theta, *alpha],
            LocalUnitaryParams::Generators(c) => c.clone(),
        }
    }

    pub fn from_vec(m: usize, v: &[f64]) -> Result<Self> {
        match (m, v.len()) {
            (1, 3) => Ok(LocalUnitaryParams::Euler {
                phi: v[0],
                theta: v[1],
                alpha: v[2],
            }),
            (2, 15) => Ok(LocalUnitaryParams::Generators(v.to_vec())),
            (1 | 2, len) => Err(Error::InvalidArgument(format!("{len} parameters do not fit m = {m}"))),
            _ => Err(Error::UnsupportedSubsystem(m)),
        }
    }

    pub fn identity(m: usize) -> Result<Self> {
        match m {
            1 => Self::from_vec(1, &[0.0; 3]),
            2 => Self::from_vec(2, &[0.0; 15]),
            _ => Err(Error::UnsupportedSubsystem(m)),
        }
    }
}

/// The 15 traceless Hermitian generators used by the two-qubit chart.
pub fn two_qubit_generators() -> Vec<Operator> {
    (1..16).map(|w| PauliWord::from_index(2, w).matrix()).collect()
}

pub fn local_unitary(p: &LocalUnitaryParams) -> Result<Operator> {
    match p {
        LocalUnitaryParams::Euler { phi, theta, alpha } => {
            let u = &(&rotation(Axis::Z, *phi) * &rotation(Axis::Y, *theta)) * &rotation(Axis::Z, *alpha);
            Ok(u.with_kind(OperatorKind::Unitary))
        }
        LocalUnitaryParams::Generators(c) => {
            if c.len() != 15 {
                return Err(Error::InvalidArgument(format!(
                    "two-qubit chart takes 15 coefficients, got {}",
                    c.len()
                )));
            }
            let mut h = Operator::zeros(4);
            for (ck, g) in c.iter().zip(two_qubit_generators()) {
                h = &h + &g.scale(C64::new(*ck, 0.0));
            }
            hermitian_exp(&h.with_kind(OperatorKind::Hermitian), -1.0)
        }
    }
}

/// `exp(i s H)` for Hermitian `H` and real `s`.
pub(crate) fn hermitian_exp(h: &Operator, s: f64) -> Result<Operator> {
    let eig = eig_hermitian(h)?;
    let v = eig.vectors.matrix();
    let d = h.dim();
    let phases: Vec<C64> = eig.values.iter().map(|l| (I * (s * l)).exp()).collect();
    let u = Operator::from_fn(d, |i, j| (0..d).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum());
    Ok(u.with_kind(OperatorKind::Unitary))
}

/// `V2 (U_A ⊗ I_B) V1` with `U_A` placed on the sites of subsystem A.
pub fn assemble(v1: &Operator, ua: &Operator, v2: &Operator, part: &BipartitePartition) -> Result<Operator> {
    let d = part.dim();
    if v1.dim() != d || v2.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "V1 ({}) and V2 ({}) must have dimension {d}",
            v1.dim(),
            v2.dim()
        )));
    }
    let middle = embed(ua, part)?;
    Ok(&(v2 * &middle) * v1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{frame_potential, haar_frame_potential, mc_twirl_with};
    use crate::linalg::{basis_state, kron, kron_all, Pauli};
    use crate::seed::substream;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn ry_quarter_pi_matches_exponential() {
        let y = Pauli::Y.matrix();
        let expected = hermitian_exp(&y, -PI / 8.0).unwrap();
        let g = gate_matrix(&GateSpec::rotation(Axis::Y, 0, FRAC_PI_4), 1).unwrap();
        assert!(g.max_abs_diff(&expected) < 1e-14);
        for axis in Axis::ALL {
            let p = match axis {
                Axis::X => Pauli::X,
                Axis::Y => Pauli::Y,
                Axis::Z => Pauli::Z,
            };
            let expected = hermitian_exp(&p.matrix(), -0.37).unwrap();
            assert!(rotation(axis, 0.74).max_abs_diff(&expected) < 1e-14);
        }
    }

    #[test]
    fn rz_zero_is_identity() {
        let g = gate_matrix(&GateSpec::rotation(Axis::Z, 1, 0.0), 2).unwrap();
        assert!(g.max_abs_diff(&Operator::identity(4)) < 1e-15);
    }

    #[test]
    fn cz_flips_only_the_all_ones_state() {
        let g = gate_matrix(&GateSpec::cz(0, 1), 2).unwrap();
        let expected = Operator::from_diagonal(&[ONE, ONE, ONE, -ONE]);
        assert!(g.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn gate_on_second_qubit_is_kron_ordered() {
        let g = gate_matrix(&GateSpec::rotation(Axis::X, 1, 0.3), 3).unwrap();
        let expected = kron_all([&Operator::identity(2), &rotation(Axis::X, 0.3), &Operator::identity(2)]).unwrap();
        assert!(g.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn invalid_qubits_are_rejected() {
        assert!(matches!(
            gate_matrix(&GateSpec::rotation(Axis::X, 3, 0.1), 3),
            Err(Error::QubitOutOfRange { qubit: 3, n: 3 })
        ));
        assert!(gate_matrix(&GateSpec::cz(1, 1), 3).is_err());
        assert!(gate_matrix(&GateSpec::cz(4, 1), 3).is_err());
    }

    #[test]
    fn identity_ensemble_gives_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = sample_circuit(&CircuitEnsemble::identity(3), &mut rng).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(8)) < 1e-15);
    }

    #[test]
    fn zero_layer_ansatz_is_ry_quarter_pi_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = sample_circuit(&CircuitEnsemble::hardware_efficient_with_layers(3, 0), &mut rng).unwrap();
        let r = rotation(Axis::Y, FRAC_PI_4);
        assert!(u.max_abs_diff(&kron_all([&r, &r, &r]).unwrap()) < 1e-14);
    }

    #[test]
    fn sampling_is_deterministic_and_unitary() {
        for e in [
            CircuitEnsemble::one_design_layer(3),
            CircuitEnsemble::hardware_efficient(3),
            CircuitEnsemble::haar(3),
        ] {
            let a = sample_circuit(&e, &mut substream(5, &[1])).unwrap();
            let b = sample_circuit(&e, &mut substream(5, &[1])).unwrap();
            assert_eq!(a.matrix(), b.matrix());
            assert!(a.is_unitary(1e-9));
        }
    }

    #[test]
    fn gate_and_dense_application_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = CircuitEnsemble::hardware_efficient(4).sample(&mut rng).unwrap();
        let op = c.to_operator();
        let psi = crate::random::random_state(16, &mut rng);
        let mut via_gates = psi.clone();
        c.apply(&mut via_gates);
        let via_matrix = op.apply(&psi);
        for (a, b) in via_gates.iter().zip(&via_matrix) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn local_unitary_examples() {
        let id = local_unitary(&LocalUnitaryParams::Euler {
            phi: 0.0,
            theta: 0.0,
            alpha: 0.0,
        })
        .unwrap();
        assert!(id.max_abs_diff(&Operator::identity(2)) < 1e-15);

        let ry_pi = local_unitary(&LocalUnitaryParams::Euler {
            phi: 0.0,
            theta: PI,
            alpha: 0.0,
        })
        .unwrap();
        let minus_i_y = Pauli::Y.matrix().scale(-I);
        assert!(ry_pi.max_abs_diff(&minus_i_y) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let p = LocalUnitaryParams::Euler {
                phi: rng.random::<f64>() * TAU,
                theta: rng.random::<f64>() * TAU,
                alpha: rng.random::<f64>() * TAU,
            };
            let u = local_unitary(&p).unwrap();
            assert!(u.is_unitary(1e-12));
            let det = u.matrix().determinant();
            assert!((det.norm() - 1.0).abs() < 1e-12);

            let c: Vec<f64> = (0..15).map(|_| rng.random::<f64>() - 0.5).collect();
            let u2 = local_unitary(&LocalUnitaryParams::Generators(c)).unwrap();
            assert!(u2.is_unitary(1e-12));
            assert!((u2.matrix().determinant().norm() - 1.0).abs() < 1e-12);
        }
        assert!(LocalUnitaryParams::from_vec(3, &[0.0; 3]).is_err());
        assert!(local_unitary(&LocalUnitaryParams::Generators(vec![0.0; 4])).is_err());
    }

    #[test]
    fn generator_chart_reaches_single_paulis() {
        // exp(-i (pi/2) Z⊗I) = -i Z⊗I; Z⊗I is word index 3*4 = 12, i.e. coefficient slot 11.
        let mut c = vec![0.0; 15];
        c[11] = PI / 2.0;
        let u = local_unitary(&LocalUnitaryParams::Generators(c)).unwrap();
        let zi = kron(&Pauli::Z.matrix(), &Operator::identity(2)).unwrap().scale(-I);
        assert!(u.max_abs_diff(&zi) < 1e-12);
    }

    #[test]
    fn assemble_examples() {
        let part = BipartitePartition::leading(2, 1).unwrap();
        let i4 = Operator::identity(4);
        let u = assemble(&i4, &Operator::identity(2), &i4, &part).unwrap();
        assert!(u.max_abs_diff(&i4) < 1e-15);
        let u = assemble(&i4, &Pauli::X.matrix(), &i4, &part).unwrap();
        let expected = kron(&Pauli::X.matrix(), &Operator::identity(2)).unwrap();
        assert!(u.max_abs_diff(&expected) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let part3 = BipartitePartition::new(3, vec![2]).unwrap();
        let v1 = haar_random_unitary(8, &mut rng);
        let v2 = haar_random_unitary(8, &mut rng);
        let ua = haar_random_unitary(2, &mut rng);
        let u = assemble(&v1, &ua, &v2, &part3).unwrap();
        assert!(u.is_unitary(1e-10));
        let middle = kron_all([&Operator::identity(4), &ua]).unwrap();
        assert!(u.max_abs_diff(&(&(&v2 * &middle) * &v1)) < 1e-12);
        assert!(assemble(&Operator::identity(4), &ua, &v2, &part3).is_err());
    }

    #[test]
    fn one_design_layer_twirls_single_qubit() {
        let e = CircuitEnsemble::one_design_layer(1);
        let zero = Operator::projector(&basis_state(2, 0));
        let est = mc_twirl_with(&zero, 10_000, 21, |rng| sample_circuit(&e, rng).unwrap()).unwrap();
        let half = Operator::identity(2).scale(C64::new(0.5, 0.0));
        assert!(est.within(&half, 5.0));
    }

    #[test]
    fn ansatz_frame_potential_near_haar() {
        let e = CircuitEnsemble::hardware_efficient(4);
        let est = frame_potential(16, 2000, 33, |rng| sample_circuit(&e, rng).unwrap()).unwrap();
        let haar = haar_frame_potential(16);
        assert!((est.mean - haar).abs() <= 0.2 * haar, "{} vs {}", est.mean, haar);
    }
}
