//! The quantum game: Alice and Bob share a two-qubit state, Alice encodes
//! `x ∈ {0,1}³` with a local unitary on her qubit and hands the qubit
//! over, Bob measures a dichotomic observable `B_y` on both qubits.
//!
//! Encoded states follow `ρ_x = (U_x^H ⊗ I) ρ (U_x ⊗ I)`.

use std::fmt;

use num_complex::Complex64;

use crate::linalg::{hermitian_eig, pauli, CMatrix};
use crate::{Error, Result};

/// `1/2 + 1/√6`, the largest success probability reachable by the game.
pub fn optimal_success() -> f64 {
    0.5 + 1.0 / 6f64.sqrt()
}

/// `8√6`, the largest value of the correlation `Δ`.
pub fn optimal_delta() -> f64 {
    8.0 * 6f64.sqrt()
}

/// `√(8/3)`, the common value of every `ω_y` at the optimum.
pub fn optimal_omega() -> f64 {
    (8.0f64 / 3.0).sqrt()
}

/// A three-bit input, stored as `x_1 x_2 x_3` with `x_1` most significant.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Input(u8);

impl Input {
    pub const ALL: [Input; 8] = [
        Input(0),
        Input(1),
        Input(2),
        Input(3),
        Input(4),
        Input(5),
        Input(6),
        Input(7),
    ];

    pub fn new(bits: u8) -> Option<Input> {
        (bits < 8).then_some(Input(bits))
    }

    /// Parses a label such as `"011"`.
    pub fn from_label(label: &str) -> Option<Input> {
        if label.len() != 3 || !label.bytes().all(|b| b == b'0' || b == b'1') {
            return None;
        }
        u8::from_str_radix(label, 2).ok().map(Input)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Bit `x_y` for `y ∈ {1, 2, 3}`.
    pub fn bit(self, y: usize) -> u8 {
        debug_assert!((1..=3).contains(&y));
        (self.0 >> (3 - y)) & 1
    }

    /// `(-1)^{x_y}`.
    pub fn sign(self, y: usize) -> f64 {
        if self.bit(y) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn parity(self) -> u8 {
        (self.0.count_ones() & 1) as u8
    }

    pub fn complement(self) -> Input {
        Input(!self.0 & 0b111)
    }

    pub fn label(self) -> String {
        format!("{:03b}", self.0)
    }
}

impl fmt::Debug for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Input({:03b})", self.0)
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

/// Validation tolerances for strategy components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
    pub unitarity: f64,
    pub dichotomy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity: 1e-9,
            trace: 1e-9,
            positivity: 1e-9,
            unitarity: 1e-9,
            dichotomy: 1e-8,
        }
    }
}

/// A two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedState {
    rho: CMatrix,
}

impl SharedState {
    pub fn new(rho: CMatrix) -> Result<Self> {
        Self::with_tolerances(rho, &Tolerances::default())
    }

    pub fn with_tolerances(rho: CMatrix, tol: &Tolerances) -> Result<Self> {
        let field = "state";
        if rho.dim() != 4 {
            return Err(Error::invalid(
                field,
                format!("expected 4x4, got {0}x{0}", rho.dim()),
            ));
        }
        let herm = rho.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(Error::invalid(
                field,
                format!("not Hermitian (max|ρ-ρ^H| = {herm:e})"),
            ));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::invalid(field, format!("trace {tr} differs from 1")));
        }
        let min = *hermitian_eig(&rho)?
            .eigenvalues
            .last()
            .expect("non-empty spectrum");
        if min < -tol.positivity {
            return Err(Error::invalid(
                field,
                format!("negative eigenvalue {min:e}"),
            ));
        }
        Ok(SharedState { rho })
    }

    /// Pure state `|v⟩⟨v|` for a unit 4-vector (normalized here).
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v.len() != 4 || norm == 0.0 {
            return Err(Error::invalid(
                "state",
                "pure state needs a nonzero 4-vector",
            ));
        }
        let unit: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Ok(SharedState {
            rho: CMatrix::projector(&unit),
        })
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        self.rho.trace_product(&self.rho).re
    }
}

/// Singlet `(I - XX - YY - ZZ)/4`.
pub fn singlet() -> SharedState {
    let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
    let sum = &(&x.kron(&x) + &y.kron(&y)) + &z.kron(&z);
    SharedState {
        rho: (&CMatrix::identity(4) - &sum).scale_real(0.25),
    }
}

pub fn maximally_mixed() -> SharedState {
    SharedState {
        rho: CMatrix::identity(4).scale_real(0.25),
    }
}

/// `η·singlet + (1-η)·I/4`.
pub fn depolarized_state(eta: f64) -> Result<SharedState> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::NoiseOutOfRange(eta));
    }
    let rho = &singlet().rho.scale_real(eta) + &CMatrix::identity(4).scale_real((1.0 - eta) / 4.0);
    Ok(SharedState { rho })
}

/// Alice's eight local unitaries, indexed by [`Input`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingUnitaries {
    u: Vec<CMatrix>,
}

impl EncodingUnitaries {
    pub fn new(u: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerances(u, &Tolerances::default())
    }

    pub fn with_tolerances(u: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if u.len() != 8 {
            return Err(Error::invalid(
                "unitaries",
                format!("expected 8 entries, got {}", u.len()),
            ));
        }
        for (x, m) in Input::ALL.iter().zip(&u) {
            let field = format!("unitaries/{x}");
            if m.dim() != 2 {
                return Err(Error::invalid(
                    field,
                    format!("expected 2x2, got {0}x{0}", m.dim()),
                ));
            }
            let err = m.unitarity_error();
            if err > tol.unitarity {
                return Err(Error::invalid(
                    field,
                    format!("not unitary (max|U^H U - I| = {err:e})"),
                ));
            }
        }
        Ok(EncodingUnitaries { u })
    }

    pub fn identity() -> Self {
        EncodingUnitaries {
            u: vec![CMatrix::identity(2); 8],
        }
    }

    pub fn get(&self, x: Input) -> &CMatrix {
        &self.u[x.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Input, &CMatrix)> {
        Input::ALL.into_iter().zip(&self.u)
    }

    pub fn map(&self, mut f: impl FnMut(Input, &CMatrix) -> CMatrix) -> Self {
        EncodingUnitaries {
            u: self.iter().map(|(x, u)| f(x, u)).collect(),
        }
    }
}

/// Bob's three dichotomic two-qubit observables `B_1, B_2, B_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct BobObservables {
    b: [CMatrix; 3],
}

impl BobObservables {
    pub fn new(b: [CMatrix; 3]) -> Result<Self> {
        Self::with_tolerances(b, &Tolerances::default())
    }

    pub fn with_tolerances(b: [CMatrix; 3], tol: &Tolerances) -> Result<Self> {
        for (k, m) in b.iter().enumerate() {
            let field = format!("observables/{k}");
            if m.dim() != 4 {
                return Err(Error::invalid(
                    field,
                    format!("expected 4x4, got {0}x{0}", m.dim()),
                ));
            }
            let herm = m.hermiticity_error();
            if herm > tol.hermiticity {
                return Err(Error::invalid(
                    field,
                    format!("not Hermitian (max|B-B^H| = {herm:e})"),
                ));
            }
            let sq = (m * m).max_abs_diff(&CMatrix::identity(4));
            if sq > tol.dichotomy {
                return Err(Error::invalid(
                    field,
                    format!("not dichotomic (max|B²-I| = {sq:e})"),
                ));
            }
        }
        Ok(BobObservables { b })
    }

    pub fn identity() -> Self {
        BobObservables {
            b: std::array::from_fn(|_| CMatrix::identity(4)),
        }
    }

    /// `B_y` for `y ∈ {1, 2, 3}`.
    pub fn get(&self, y: usize) -> &CMatrix {
        &self.b[y - 1]
    }

    pub fn as_array(&self) -> &[CMatrix; 3] {
        &self.b
    }
}

/// A full quantum strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub state: SharedState,
    pub alice: EncodingUnitaries,
    pub bob: BobObservables,
}

/// The eight encoded states `ρ_x`, indexed by [`Input`].
#[derive(Debug, Clone)]
pub struct EncodedStates {
    rho: Vec<CMatrix>,
}

impl EncodedStates {
    /// Wraps eight 4×4 matrices without validation.
    pub fn from_matrices(rho: Vec<CMatrix>) -> Self {
        assert_eq!(rho.len(), 8, "eight encoded states");
        EncodedStates { rho }
    }

    pub fn get(&self, x: Input) -> &CMatrix {
        &self.rho[x.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Input, &CMatrix)> {
        Input::ALL.into_iter().zip(&self.rho)
    }

    pub fn overlap(&self, a: Input, b: Input) -> f64 {
        self.get(a).trace_product(self.get(b)).re
    }

    /// Sum of the states of one parity class.
    pub fn parity_sum(&self, parity: u8) -> CMatrix {
        self.iter()
            .filter(|(x, _)| x.parity() == parity)
            .fold(CMatrix::zeros(4), |acc, (_, r)| &acc + r)
    }
}

pub fn apply_encoding(state: &SharedState, alice: &EncodingUnitaries) -> EncodedStates {
    EncodedStates {
        rho: alice
            .iter()
            .map(|(_, u)| state.rho.conjugate_first(&u.adjoint()))
            .collect(),
    }
}

fn x(label: &str) -> Input {
    Input::from_label(label).expect("valid label")
}

fn signed_sum(states: &EncodedStates, terms: [(f64, &str); 4]) -> CMatrix {
    terms.iter().fold(CMatrix::zeros(4), |acc, &(s, l)| {
        &acc + &states.get(x(l)).scale_real(s)
    })
}

/// `M_y` built from the even-parity states.
pub fn build_m(states: &EncodedStates) -> [CMatrix; 3] {
    [
        signed_sum(
            states,
            [(-1.0, "000"), (-1.0, "011"), (1.0, "101"), (1.0, "110")],
        ),
        signed_sum(
            states,
            [(-1.0, "000"), (1.0, "011"), (-1.0, "101"), (1.0, "110")],
        ),
        signed_sum(
            states,
            [(-1.0, "000"), (1.0, "011"), (1.0, "101"), (-1.0, "110")],
        ),
    ]
}

/// `N_y` built from the odd-parity states.
pub fn build_n(states: &EncodedStates) -> [CMatrix; 3] {
    [
        signed_sum(
            states,
            [(1.0, "001"), (1.0, "010"), (-1.0, "100"), (-1.0, "111")],
        ),
        signed_sum(
            states,
            [(1.0, "001"), (-1.0, "010"), (1.0, "100"), (-1.0, "111")],
        ),
        signed_sum(
            states,
            [(-1.0, "001"), (1.0, "010"), (1.0, "100"), (-1.0, "111")],
        ),
    ]
}

/// `Δ = Σ_y Tr[(N_y - M_y) B_y]`.
pub fn delta(states: &EncodedStates, bob: &BobObservables) -> f64 {
    let m = build_m(states);
    let n = build_n(states);
    (1..=3)
        .map(|y| (&n[y - 1] - &m[y - 1]).trace_product(bob.get(y)).re)
        .sum()
}

/// Success probability averaged over all 24 `(x, y)` rounds, computed
/// from Bob's projectors `Π_y^b = (I + (-1)^b B_y)/2`.
pub fn success_direct(s: &Strategy) -> f64 {
    let states = apply_encoding(&s.state, &s.alice);
    let id = CMatrix::identity(4);
    let mut total = 0.0;
    for y in 1..=3 {
        let b = s.bob.get(y);
        let proj = [(&id + b).scale_real(0.5), (&id - b).scale_real(0.5)];
        for (x, rho) in states.iter() {
            total += rho.trace_product(&proj[x.bit(y) as usize]).re;
        }
    }
    total / 24.0
}

/// Success probability together with the correlation `Δ` and the norms `ω_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameValue {
    pub s_q: f64,
    pub delta: f64,
    pub omegas: [f64; 3],
}

/// `S_Q = 1/2 + Δ/48` with `ω_y = ‖N_y - M_y‖` in the scaled Frobenius norm.
pub fn success_via_delta(s: &Strategy) -> GameValue {
    let states = apply_encoding(&s.state, &s.alice);
    let delta = delta(&states, &s.bob);
    GameValue {
        s_q: 0.5 + delta / 48.0,
        delta,
        omegas: omegas(&states),
    }
}

pub fn omegas(states: &EncodedStates) -> [f64; 3] {
    let m = build_m(states);
    let n = build_n(states);
    std::array::from_fn(|k| crate::linalg::scaled_frobenius_norm(&(&n[k] - &m[k])))
}

/// `(-I + iX - iY)/√3`, the unitary that carries the even-parity encoded
/// states of [`canonical_strategy`] onto the odd-parity ones.
pub fn canonical_grand_unitary() -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    let sum = &(&(-&pauli::id()) + &pauli::x().scale(i)) - &pauli::y().scale(i);
    sum.scale_real(1.0 / 3f64.sqrt())
}

/// An optimal strategy built from Pauli operators.
///
/// The shared state is the singlet with `U_000 = I`, `U_011 = iX`,
/// `U_101 = -iY`, `U_110 = -iZ`. Each odd-parity input reuses the unitary of
/// an even-parity partner followed by the grand unitary `U_G`:
/// `001 ← 000`, `010 ← 011`, `100 ← 101`, `111 ← 110`. Bob measures
/// `B_1 = (-2X + Y + Z)/√6 ⊗ X` and its two cyclic analogues.
pub fn canonical_strategy() -> Strategy {
    let i = Complex64::new(0.0, 1.0);
    let (id, px, py, pz) = (pauli::id(), pauli::x(), pauli::y(), pauli::z());
    let g = canonical_grand_unitary();
    let u000 = id.clone();
    let u011 = px.scale(i);
    let u101 = py.scale(-i);
    let u110 = pz.scale(-i);
    let u001 = &u000 * &g;
    let u010 = &u011 * &g;
    let u100 = &u101 * &g;
    let u111 = &u110 * &g;
    let alice = EncodingUnitaries {
        u: vec![u000, u001, u010, u011, u100, u101, u110, u111],
    };

    let r6 = 1.0 / 6f64.sqrt();
    let local =
        |a: &CMatrix, b: &CMatrix, c: &CMatrix| (&(&a.scale_real(-2.0) + b) + c).scale_real(r6);
    let bob = BobObservables {
        b: [
            local(&px, &py, &pz).kron(&px),
            local(&py, &px, &pz).kron(&py),
            local(&pz, &px, &py).kron(&pz),
        ],
    };
    Strategy {
        state: singlet(),
        alice,
        bob,
    }
}

/// Success probability of the standard one-qubit 3→1 quantum random access
/// code: states with Bloch vectors `((-1)^{x_1}, (-1)^{x_2}, (-1)^{x_3})/√3`
/// measured along X, Y or Z. The exact value is `(1 + 1/√3)/2 ≈ 0.78868`.
pub fn qrac_baseline() -> f64 {
    let paulis = [pauli::x(), pauli::y(), pauli::z()];
    let id = pauli::id();
    let r = 1.0 / 3f64.sqrt();
    let mut total = 0.0;
    for x in Input::ALL {
        let bloch = (1..=3).fold(CMatrix::zeros(2), |acc, y| {
            &acc + &paulis[y - 1].scale_real(x.sign(y) * r)
        });
        let rho = (&id + &bloch).scale_real(0.5);
        for y in 1..=3 {
            let sign = x.sign(y);
            let proj = (&id + &paulis[y - 1].scale_real(sign)).scale_real(0.5);
            total += rho.trace_product(&proj).re;
        }
    }
    total / 24.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paulis2() -> [CMatrix; 3] {
        let (x, y, z) = (pauli::x(), pauli::y(), pauli::z());
        [x.kron(&x), y.kron(&y), z.kron(&z)]
    }

    #[test]
    fn input_bits_and_labels() {
        let x = Input::from_label("011").unwrap();
        assert_eq!((x.bit(1), x.bit(2), x.bit(3)), (0, 1, 1));
        assert_eq!(x.parity(), 0);
        assert_eq!(x.complement().label(), "100");
        assert!(Input::from_label("0112").is_none());
        assert!(Input::from_label("0a1").is_none());
    }

    #[test]
    fn identity_encoding_leaves_state() {
        let s = depolarized_state(0.3).unwrap();
        let states = apply_encoding(&s, &EncodingUnitaries::identity());
        for (_, r) in states.iter() {
            assert!(r.max_abs_diff(s.rho()) < 1e-15);
        }
    }

    #[test]
    fn mixed_state_is_fixed_point() {
        let c = canonical_strategy();
        let states = apply_encoding(&maximally_mixed(), &c.alice);
        for (_, r) in states.iter() {
            assert!(r.max_abs_diff(maximally_mixed().rho()) < 1e-15);
        }
        let m = build_m(&states);
        let n = build_n(&states);
        for k in 0..3 {
            assert!(m[k].max_abs() < 1e-15 && n[k].max_abs() < 1e-15);
        }
        assert!(delta(&states, &c.bob).abs() < 1e-15);
    }

    #[test]
    fn canonical_encoded_states() {
        let c = canonical_strategy();
        let states = apply_encoding(&c.state, &c.alice);
        let [m1, m2, m3] = paulis2();
        let id = CMatrix::identity(4);
        let expected = (&(&(&id - &m1) + &m2) + &m3).scale_real(0.25);
        assert!(states.get(x("011")).max_abs_diff(&expected) < 1e-12);

        let m = build_m(&states);
        for (got, want) in m.iter().zip(paulis2()) {
            assert!(got.max_abs_diff(&want) < 1e-12);
        }
        let (px, py, pz) = (pauli::x(), pauli::y(), pauli::z());
        let n1 = (&(&(-&px.kron(&px)) + &py.kron(&px).scale_real(2.0))
            + &pz.kron(&px).scale_real(2.0))
            .scale_real(1.0 / 3.0);
        assert!(build_n(&states)[0].max_abs_diff(&n1) < 1e-12);
    }

    #[test]
    fn canonical_value() {
        let c = canonical_strategy();
        assert!((success_direct(&c) - optimal_success()).abs() < 1e-12);
        let v = success_via_delta(&c);
        assert!((v.delta - optimal_delta()).abs() < 1e-10);
        for w in v.omegas {
            assert!((w - optimal_omega()).abs() < 1e-10);
        }
        assert!((v.s_q - 0.5 - v.delta / 48.0).abs() < 1e-12);
    }

    #[test]
    fn identity_observables_give_zero_delta_on_canonical_states() {
        let c = canonical_strategy();
        let states = apply_encoding(&c.state, &c.alice);
        // Tr[N_y - M_y] computed term by term from the traces of ρ_x
        let m = build_m(&states);
        let n = build_n(&states);
        let direct: f64 = (0..3).map(|k| (n[k].trace() - m[k].trace()).re).sum();
        assert!(direct.abs() < 1e-12);
        assert!(delta(&states, &BobObservables::identity()).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_state_is_uninformative() {
        let mut c = canonical_strategy();
        c.state = maximally_mixed();
        assert_eq!(success_direct(&c), 0.5);
        let v = success_via_delta(&c);
        assert_eq!(v.s_q, 0.5);
        assert_eq!(v.omegas, [0.0; 3]);
    }

    #[test]
    fn canonical_overlaps() {
        let c = canonical_strategy();
        let states = apply_encoding(&c.state, &c.alice);
        for a in Input::ALL {
            assert!(states.overlap(a, a.complement()).abs() < 1e-12);
            for b in Input::ALL {
                if a.parity() != b.parity() && b != a.complement() {
                    assert!((states.overlap(a, b) - 1.0 / 3.0).abs() < 1e-12, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn canonical_grand_unitary_is_unitary() {
        assert!(canonical_grand_unitary().unitarity_error() < 1e-15);
    }

    #[test]
    fn depolarized_family() {
        assert!(
            depolarized_state(1.0)
                .unwrap()
                .rho()
                .max_abs_diff(singlet().rho())
                < 1e-15
        );
        assert!(
            depolarized_state(0.0)
                .unwrap()
                .rho()
                .max_abs_diff(maximally_mixed().rho())
                < 1e-15
        );
        assert!(matches!(
            depolarized_state(1.5),
            Err(Error::NoiseOutOfRange(_))
        ));
        assert!(depolarized_state(-0.1).is_err());
        assert!((depolarized_state(0.5).unwrap().purity() - 0.4375).abs() < 1e-12);
    }

    #[test]
    fn baselines() {
        let q = qrac_baseline();
        assert!((q - 0.5 * (1.0 + 1.0 / 3f64.sqrt())).abs() < 1e-12);
        assert!((q - 0.7886751346).abs() < 1e-10);
        assert!(q > 0.75 && q < optimal_success());
    }

    #[test]
    fn validation_names_fields() {
        let mut u = vec![CMatrix::identity(2); 8];
        u[3] = CMatrix::identity(2).scale_real(1.1);
        match EncodingUnitaries::new(u) {
            Err(Error::Invalid { field, .. }) => assert_eq!(field, "unitaries/011"),
            other => panic!("unexpected {other:?}"),
        }
        let c = canonical_strategy();
        let mut b = c.bob.as_array().clone();
        b[1] = b[1].scale_real(0.9);
        match BobObservables::new(b) {
            Err(Error::Invalid { field, reason }) => {
                assert_eq!(field, "observables/1");
                assert!(reason.contains("dichotomic"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = CMatrix::identity(4).scale_real(0.3);
        assert!(matches!(SharedState::new(bad), Err(Error::Invalid { .. })));
        let mut neg = CMatrix::identity(4).scale_real(0.5);
        neg[(0, 0)] = Complex64::new(-0.5, 0.0);
        assert!(SharedState::new(neg).is_err());
    }
}
