//! Self-testing checks.
//!
//! At the optimal value `1/2 + 1/√6` the game pins down, up to local
//! unitaries and phases:
//!
//! * the encoded states: each parity class is an orthonormal basis, the
//!   overlap `Tr[ρ_x ρ_x']` is 0 between complements and 1/3 between
//!   opposite-parity neighbours, `Tr[M_y N_y] = -4/3`, `ω_y = √(8/3)`;
//! * Bob's observables: `B_y = √(3/8) (N_y - M_y)`;
//! * the shared state: maximally entangled;
//! * Alice's unitaries: with `M_1 = Q_1⊗Q_2`, `M_2 = P_1⊗P_2`,
//!   `M_3 = R_1⊗R_2` and `U_000 = I`, one has `U_011 = iQ_1`,
//!   `U_101 = -iP_1`, `U_110 = -iR_1`, and the grand unitary
//!   `U_G = (-I + U_011 + U_101)/√3` maps the even-parity states onto the
//!   odd-parity ones.
//!
//! "Up to" covers global phases of each `U_x`, a common unitary absorbed
//! by fixing `U_000 = I`, local unitaries, and exchanging the two qubits:
//! the receiver measures both, and optimizers land on either mirror image
//! about equally often. See [`gauge_fix`].
//!
//! Each statement becomes one or more [`CheckResult`]s; a report passes only
//! when every check does.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::game::{
    apply_encoding, build_m, build_n, omegas, optimal_omega, optimal_success, success_via_delta,
    BobObservables, EncodedStates, EncodingUnitaries, Input, SharedState, Strategy, Tolerances,
};
use crate::linalg::{hermitian_eig, kron_factorize, partial_trace, CMatrix, Subsystem};

/// Default tolerance for analytically constructed strategies.
pub const ANALYTIC_TOL: f64 = 1e-9;
/// Default tolerance for optimizer output.
pub const OPTIMIZER_TOL: f64 = 1e-6;
/// Frame residual above which the extracted frame is not trusted.
pub const FRAME_RELIABILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            measured,
            target,
            tolerance,
            // NaN never passes
            pass: (measured - target).abs() <= tolerance,
        }
    }

    /// A deviation that should vanish.
    pub fn zero(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self::new(name, deviation, 0.0, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub checks: Vec<CheckResult>,
    pub overall: bool,
    /// True when the operator frame could not be extracted reliably, so the
    /// unitary checks compare against a meaningless frame.
    pub indeterminate: bool,
    pub gauge_note: String,
}

impl CertificationReport {
    fn from_checks(checks: Vec<CheckResult>, indeterminate: bool, gauge_note: String) -> Self {
        let overall = checks.iter().all(|c| c.pass);
        CertificationReport {
            checks,
            overall,
            indeterminate,
            gauge_note,
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    /// Fixed-width table, one check per line.
    pub fn to_table(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(5);
        let mut out = format!(
            "{:<width$}  {:>16}  {:>16}  {:>9}  {}\n",
            "check", "measured", "target", "tol", "result"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {:>16.10e}  {:>16.10e}  {:>9.1e}  {}\n",
                c.name,
                c.measured,
                c.target,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        let verdict = match (self.overall, self.indeterminate) {
            (true, _) => "PASS",
            (false, true) => "FAIL (frame indeterminate)",
            (false, false) => "FAIL",
        };
        out.push_str(&format!(
            "overall: {verdict} ({} of {} checks passed)\n",
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len()
        ));
        out.push_str(&format!("gauge: {}\n", self.gauge_note));
        out
    }
}

fn x(label: &str) -> Input {
    Input::from_label(label).expect("valid label")
}

/// Complementary pairs, overlap 0 at the optimum.
pub const COMPLEMENT_PAIRS: [(&str, &str); 4] = [
    ("000", "111"),
    ("011", "100"),
    ("101", "010"),
    ("110", "001"),
];

/// Opposite-parity pairs at Hamming distance one, overlap 1/3 at the optimum.
pub const THIRD_PAIRS: [(&str, &str); 12] = [
    ("000", "001"),
    ("000", "010"),
    ("000", "100"),
    ("011", "001"),
    ("011", "010"),
    ("011", "111"),
    ("101", "001"),
    ("101", "100"),
    ("101", "111"),
    ("110", "010"),
    ("110", "100"),
    ("110", "111"),
];

fn same_parity_pairs() -> Vec<(Input, Input)> {
    let mut pairs = Vec::new();
    for a in Input::ALL {
        for b in Input::ALL {
            if a < b && a.parity() == b.parity() {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Checks on the encoded states and Bob's observables.
pub fn state_structure_checks(s: &Strategy, tol: f64) -> Vec<CheckResult> {
    let states = apply_encoding(&s.state, &s.alice);
    let m = build_m(&states);
    let n = build_n(&states);
    let id = CMatrix::identity(4);
    let mut checks = Vec::new();

    checks.push(CheckResult::zero(
        "completeness/even",
        states.parity_sum(0).max_abs_diff(&id),
        tol,
    ));
    checks.push(CheckResult::zero(
        "completeness/odd",
        states.parity_sum(1).max_abs_diff(&id),
        tol,
    ));
    for (a, b) in same_parity_pairs() {
        checks.push(CheckResult::new(
            format!("overlap/{a}-{b}"),
            states.overlap(a, b),
            0.0,
            tol,
        ));
    }
    for (a, b) in COMPLEMENT_PAIRS {
        checks.push(CheckResult::new(
            format!("overlap/{a}-{b}"),
            states.overlap(x(a), x(b)),
            0.0,
            tol,
        ));
    }
    for (a, b) in THIRD_PAIRS {
        checks.push(CheckResult::new(
            format!("overlap/{a}-{b}"),
            states.overlap(x(a), x(b)),
            1.0 / 3.0,
            tol,
        ));
    }
    for y in 0..3 {
        checks.push(CheckResult::new(
            format!("tr_mn/{}", y + 1),
            m[y].trace_product(&n[y]).re,
            -4.0 / 3.0,
            tol,
        ));
    }
    for (y, w) in omegas(&states).into_iter().enumerate() {
        checks.push(CheckResult::new(
            format!("omega/{}", y + 1),
            w,
            optimal_omega(),
            tol,
        ));
    }
    let scale = (3.0f64 / 8.0).sqrt();
    for y in 0..3 {
        let target = (&n[y] - &m[y]).scale_real(scale);
        checks.push(CheckResult::zero(
            format!("observable/{}", y + 1),
            s.bob.get(y + 1).max_abs_diff(&target),
            tol,
        ));
    }
    for (family, ops) in [("m", &m), ("n", &n)] {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            checks.push(CheckResult::zero(
                format!("commute_{family}/{}{}", i + 1, j + 1),
                ops[i].commutator(&ops[j]).max_abs(),
                tol,
            ));
        }
        // first = -second·third
        let prod = &ops[1] * &ops[2];
        checks.push(CheckResult::zero(
            format!("product_{family}"),
            (&ops[0] + &prod).max_abs(),
            tol,
        ));
    }
    checks
}

pub fn check_state_structure(s: &Strategy, tol: f64) -> CertificationReport {
    CertificationReport::from_checks(
        state_structure_checks(s, tol),
        false,
        "state-level checks are gauge invariant".into(),
    )
}

/// Purity and maximally mixed reductions.
pub fn check_entanglement(state: &SharedState, tol: f64) -> Vec<CheckResult> {
    let half = CMatrix::identity(2).scale_real(0.5);
    let rho = state.rho();
    vec![
        CheckResult::new("entanglement/purity", state.purity(), 1.0, tol),
        CheckResult::zero(
            "entanglement/reduced_alice",
            partial_trace(rho, Subsystem::Second)
                .expect("4x4 state")
                .max_abs_diff(&half),
            tol,
        ),
        CheckResult::zero(
            "entanglement/reduced_bob",
            partial_trace(rho, Subsystem::First)
                .expect("4x4 state")
                .max_abs_diff(&half),
            tol,
        ),
    ]
}

/// Local operators recovered from `M_y = Q⊗Q', P⊗P', R⊗R'` and the signs
/// of the decomposition `N_y = -M_y/3 + a_y (2√2/3) M'_y`.
#[derive(Debug, Clone)]
pub struct ExtractedFrame {
    pub q1: CMatrix,
    pub p1: CMatrix,
    pub r1: CMatrix,
    pub q2: CMatrix,
    pub p2: CMatrix,
    pub r2: CMatrix,
    /// `max|M_y - A⊗B|` of the Kronecker factorizations.
    pub kron_residuals: [f64; 3],
    /// `max|N_y - (-M_y/3 + a_y (2√2/3) M'_y)|`.
    pub structure_residuals: [f64; 3],
    pub a: [i8; 3],
    pub b: [i8; 3],
    /// Total weight of `N_y + M_y/3` on cross terms whose varying factor
    /// sits on the first qubit, and on the second.
    pub cross_weights: [f64; 2],
}

impl ExtractedFrame {
    /// True when the odd-parity structure lives on the second qubit, the
    /// mirror image of the expected form under exchanging the qubits.
    pub fn is_exchanged(&self) -> bool {
        self.cross_weights[1] > self.cross_weights[0] + 1e-6
    }

    pub fn alice(&self) -> [&CMatrix; 3] {
        [&self.q1, &self.p1, &self.r1]
    }

    pub fn bob(&self) -> [&CMatrix; 3] {
        [&self.q2, &self.p2, &self.r2]
    }

    /// Largest factorization or structure residual, or involution error of
    /// a frame operator. Zero operators factor exactly, so the involution
    /// term is what rejects them.
    pub fn max_residual(&self) -> f64 {
        self.kron_residuals
            .iter()
            .chain(&self.structure_residuals)
            .copied()
            .fold(0.0, f64::max)
            .max(Self::involution_error(self.alice()))
            .max(Self::involution_error(self.bob()))
    }

    pub fn is_reliable(&self) -> bool {
        self.max_residual() <= FRAME_RELIABILITY_TOL
    }

    /// Largest `|{A, B}|` over the three pairs on one side.
    pub fn anticommutation_error(side: [&CMatrix; 3]) -> f64 {
        [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| side[i].anticommutator(side[j]).max_abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|A² - I|` and `|A - A^H|` over one side.
    pub fn involution_error(side: [&CMatrix; 3]) -> f64 {
        let id = CMatrix::identity(2);
        side.iter()
            .map(|a| (*a * *a).max_abs_diff(&id).max(a.hermiticity_error()))
            .fold(0.0, f64::max)
    }

    /// `Im Tr[Q P R] / 2`, which is `+1` for a right-handed Pauli triple.
    pub fn handedness(&self) -> f64 {
        (&(&self.q1 * &self.p1) * &self.r1).trace().im / 2.0
    }
}

fn hs(a: &CMatrix, b: &CMatrix) -> f64 {
    a.adjoint().trace_product(b).re / a.dim() as f64
}

/// Recovers the local frame from the encoded states.
///
/// The Kronecker factorization fixes each pair only up to a common sign,
/// `Q⊗Q' = (-Q)⊗(-Q')`. The signs are chosen so that the coefficients of
/// `N_y + M_y/3` on the cross terms are as positive as possible, and the
/// remaining global flip is fixed by requiring `Q_1 P_1 = i R_1`.
pub fn extract_frame(states: &EncodedStates) -> ExtractedFrame {
    let m = build_m(states);
    let n = build_n(states);
    let f: Vec<_> = m
        .iter()
        .map(|my| kron_factorize(my).expect("4x4 operator"))
        .collect();
    let kron_residuals = [f[0].residual, f[1].residual, f[2].residual];
    let raw1 = [f[0].a.clone(), f[1].a.clone(), f[2].a.clone()];
    let raw2 = [f[0].b.clone(), f[1].b.clone(), f[2].b.clone()];

    let targets: Vec<CMatrix> = (0..3)
        .map(|y| &n[y] + &m[y].scale_real(1.0 / 3.0))
        .collect();
    // cross[y] = (coefficient on first partner, coefficient on second partner)
    let partners = [(1, 2), (0, 2), (0, 1)];
    let raw_cross: Vec<(f64, f64)> = (0..3)
        .map(|y| {
            let (i, j) = partners[y];
            (
                hs(&raw1[i].kron(&raw2[y]), &targets[y]),
                hs(&raw1[j].kron(&raw2[y]), &targets[y]),
            )
        })
        .collect();

    let first_weight: f64 = raw_cross.iter().map(|(p, q)| p.abs() + q.abs()).sum();
    let second_weight: f64 = (0..3)
        .map(|y| {
            let (i, j) = partners[y];
            hs(&raw1[y].kron(&raw2[i]), &targets[y]).abs()
                + hs(&raw1[y].kron(&raw2[j]), &targets[y]).abs()
        })
        .sum();

    let mut best: Option<([f64; 3], (f64, f64))> = None;
    for mask in 0..8u8 {
        let s: [f64; 3] = std::array::from_fn(|k| if mask >> k & 1 == 1 { -1.0 } else { 1.0 });
        let score: f64 = (0..3)
            .map(|y| {
                let (i, j) = partners[y];
                s[i] * s[y] * raw_cross[y].0 + s[j] * s[y] * raw_cross[y].1
            })
            .sum();
        let hand = (&(&raw1[0].scale_real(s[0]) * &raw1[1].scale_real(s[1]))
            * &raw1[2].scale_real(s[2]))
            .trace()
            .im;
        let key = (score, hand);
        let better = match &best {
            None => true,
            Some((_, k)) => {
                key.0 > k.0 + 1e-9 || ((key.0 - k.0).abs() <= 1e-9 && key.1 > k.1 + 1e-9)
            }
        };
        if better {
            best = Some((s, key));
        }
    }
    let (s, _) = best.expect("eight candidates");
    let side1: [CMatrix; 3] = std::array::from_fn(|k| raw1[k].scale_real(s[k]));
    let side2: [CMatrix; 3] = std::array::from_fn(|k| raw2[k].scale_real(s[k]));

    let sq = 2f64.sqrt();
    let mut a = [1i8; 3];
    let mut b = [1i8; 3];
    let mut structure_residuals = [0.0; 3];
    for y in 0..3 {
        let (i, j) = partners[y];
        let first = hs(&side1[i].kron(&side2[y]), &targets[y]);
        let second = hs(&side1[j].kron(&side2[y]), &targets[y]);
        a[y] = if first >= 0.0 { 1 } else { -1 };
        let sign_second = if second >= 0.0 { 1 } else { -1 };
        b[y] = a[y] * sign_second;
        let local = (&side1[i] + &side1[j].scale_real(f64::from(b[y]))).scale_real(1.0 / sq);
        let m_prime = local.kron(&side2[y]);
        let model =
            &m[y].scale_real(-1.0 / 3.0) + &m_prime.scale_real(f64::from(a[y]) * 2.0 * sq / 3.0);
        structure_residuals[y] = n[y].max_abs_diff(&model);
    }

    let [q1, p1, r1] = side1;
    let [q2, p2, r2] = side2;
    ExtractedFrame {
        q1,
        p1,
        r1,
        q2,
        p2,
        r2,
        kron_residuals,
        structure_residuals,
        a,
        b,
        cross_weights: [first_weight, second_weight],
    }
}

/// Strategy with `U_000 = I` and fixed phases, plus a description.
#[derive(Debug, Clone)]
pub struct GaugeFixed {
    pub strategy: Strategy,
    pub frame: ExtractedFrame,
    /// Whether the two qubits were exchanged.
    pub exchanged: bool,
    /// Largest change of an encoded state under the gauge transformation,
    /// up to the qubit exchange when one was applied. Zero for an exact gauge.
    pub preservation_error: f64,
    pub note: String,
}

fn phase_align(u: &CMatrix, target: &CMatrix) -> CMatrix {
    let overlap = u.adjoint().trace_product(target);
    if overlap.norm() < 1e-12 {
        return u.strip_global_phase();
    }
    u.scale(overlap / overlap.norm())
}

fn swap_gate() -> CMatrix {
    let mut m = CMatrix::zeros(4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Mirror image of a strategy under exchanging the two qubits.
///
/// The receiver measures both qubits, so relabelling them changes nothing
/// observable. For a maximally entangled state the exchanged encoded states
/// are again produced by unitaries on the first qubit: writing the top
/// eigenvector of the swapped state as a 2x2 matrix `Φ = V/√2`, the new
/// unitaries are `V U_x^T V^H`. `V` is the unitary polar factor of `Φ`, so
/// for states that are not maximally entangled the result only approximates
/// the exchanged states. Returns `None` when `Φ` is singular.
pub fn exchange_qubits(s: &Strategy) -> Option<Strategy> {
    let swap = swap_gate();
    let rho = &(&swap * s.state.rho()) * &swap;
    let top = hermitian_eig(&rho).ok()?;
    let psi = &top.eigenvectors[0];
    let phi = CMatrix::from_vec(2, psi.clone()).ok()?;
    let gram = hermitian_eig(&(&phi.adjoint() * &phi)).ok()?;
    if gram.eigenvalues.iter().any(|&l| l < 1e-12) {
        return None;
    }
    let v = &phi * &gram.map_spectrum(|l| 1.0 / l.sqrt());
    let alice = EncodingUnitaries::with_tolerances(
        s.alice
            .iter()
            .map(|(_, u)| &(&v * &u.transpose()) * &v.adjoint())
            .collect(),
        &Tolerances {
            unitarity: 1e-6,
            ..Tolerances::default()
        },
    )
    .ok()?;
    let bob = s.bob.as_array().clone().map(|b| &(&swap * &b) * &swap);
    Some(Strategy {
        state: SharedState::new(rho).ok()?,
        alice,
        bob: BobObservables::new(bob).ok()?,
    })
}

fn max_state_change(
    a: &EncodedStates,
    b: &EncodedStates,
    map: impl Fn(&CMatrix) -> CMatrix,
) -> f64 {
    Input::ALL
        .iter()
        .map(|&x| map(a.get(x)).max_abs_diff(b.get(x)))
        .fold(0.0, f64::max)
}

/// Moves `U_000` into the state and fixes the phase of every unitary.
///
/// With `ρ_x = (U_x^H ⊗ I) ρ (U_x ⊗ I)`, replacing `ρ` by `ρ_000` and every
/// `U_x` by `U_000^H U_x` leaves all eight encoded states unchanged. When
/// the odd-parity structure sits on the second qubit the strategy is
/// replaced by its [`exchange_qubits`] image. The phases of `U_011`,
/// `U_101`, `U_110` are then aligned with `iQ_1`, `-iP_1`, `-iR_1` of the
/// extracted frame; every other unitary (and these three too when the frame
/// is unreliable) is rotated so its largest-modulus entry is real positive.
pub fn gauge_fix(s: &Strategy) -> GaugeFixed {
    let original = apply_encoding(&s.state, &s.alice);
    let u0 = s.alice.get(x("000")).clone();
    let rho000 = s.state.rho().conjugate_first(&u0.adjoint());
    let state = SharedState::new(rho000).unwrap_or_else(|_| s.state.clone());
    let shifted = s.alice.map(|_, u| (&u0.adjoint() * u).strip_global_phase());
    let mut base = Strategy {
        state,
        alice: shifted,
        bob: s.bob.clone(),
    };
    let mut frame = extract_frame(&apply_encoding(&base.state, &base.alice));
    let mut exchanged = false;
    if frame.is_exchanged() {
        if let Some(swapped) = exchange_qubits(&base) {
            base = swapped;
            base.alice = base.alice.map(|_, u| u.strip_global_phase());
            frame = extract_frame(&apply_encoding(&base.state, &base.alice));
            exchanged = true;
        }
    }
    let reliable = frame.is_reliable();

    let i = Complex64::new(0.0, 1.0);
    let targets = [
        ("011", frame.q1.scale(i)),
        ("101", frame.p1.scale(-i)),
        ("110", frame.r1.scale(-i)),
    ];
    let alice = if reliable {
        base.alice
            .map(|x, u| match targets.iter().find(|(l, _)| *l == x.label()) {
                Some((_, t)) => phase_align(u, t),
                None => u.clone(),
            })
    } else {
        base.alice
    };
    let strategy = Strategy {
        state: base.state,
        alice,
        bob: base.bob,
    };
    let fixed_states = apply_encoding(&strategy.state, &strategy.alice);
    let swap = swap_gate();
    let preservation_error = if exchanged {
        max_state_change(&original, &fixed_states, |r| &(&swap * r) * &swap)
    } else {
        max_state_change(&original, &fixed_states, |r| r.clone())
    };

    let mut note = String::from("U_x -> U_000^H U_x with the state replaced by rho_000");
    if exchanged {
        note.push_str("; qubits exchanged (U_x -> V U_x^T V^H, rho and B_y conjugated by SWAP)");
    }
    if reliable {
        note.push_str(
            "; U_011, U_101, U_110 phase-aligned to iQ1, -iP1, -iR1; other phases fixed by a \
             real positive largest entry; frame signs chosen so a_y = b_y = +1 where possible \
             and Q1 P1 = i R1",
        );
    } else {
        note.push_str(&format!(
            "; phases fixed by a real positive largest entry; frame unreliable (max residual \
             {:.3e} > {:.0e}), unitary checks indeterminate",
            frame.max_residual(),
            FRAME_RELIABILITY_TOL
        ));
    }
    GaugeFixed {
        strategy,
        frame,
        exchanged,
        preservation_error,
        note,
    }
}

/// Signs of `M_1..M_3` in the basis expansion of each `ρ_x` (even parity)
/// or `N_1..N_3` (odd parity): `ρ_x = (I + Σ c_y O_y)/4`.
fn reconstruction_signs(x: Input) -> [f64; 3] {
    match x.label().as_str() {
        "000" => [-1.0, -1.0, -1.0],
        "011" => [-1.0, 1.0, 1.0],
        "101" => [1.0, -1.0, 1.0],
        "110" => [1.0, 1.0, -1.0],
        "001" => [1.0, 1.0, -1.0],
        "010" => [1.0, -1.0, 1.0],
        "100" => [-1.0, 1.0, 1.0],
        "111" => [-1.0, -1.0, -1.0],
        _ => unreachable!("three-bit label"),
    }
}

fn frame_checks(frame: &ExtractedFrame, tol: f64) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    for y in 0..3 {
        checks.push(CheckResult::zero(
            format!("frame/kron_residual/{}", y + 1),
            frame.kron_residuals[y],
            tol,
        ));
        checks.push(CheckResult::zero(
            format!("frame/structure_residual/{}", y + 1),
            frame.structure_residuals[y],
            tol,
        ));
    }
    checks.push(CheckResult::zero(
        "frame/involution_alice",
        ExtractedFrame::involution_error(frame.alice()),
        tol,
    ));
    checks.push(CheckResult::zero(
        "frame/involution_bob",
        ExtractedFrame::involution_error(frame.bob()),
        tol,
    ));
    checks.push(CheckResult::zero(
        "frame/anticommute_alice",
        ExtractedFrame::anticommutation_error(frame.alice()),
        tol,
    ));
    checks.push(CheckResult::zero(
        "frame/anticommute_bob",
        ExtractedFrame::anticommutation_error(frame.bob()),
        tol,
    ));
    for y in 0..3 {
        checks.push(CheckResult::new(
            format!("frame/a/{}", y + 1),
            f64::from(frame.a[y]),
            1.0,
            0.0,
        ));
        checks.push(CheckResult::new(
            format!("frame/b/{}", y + 1),
            f64::from(frame.b[y]),
            1.0,
            0.0,
        ));
    }
    checks
}

fn unitary_checks(fixed: &GaugeFixed, tol: f64) -> Vec<CheckResult> {
    let alice = &fixed.strategy.alice;
    let frame = &fixed.frame;
    let i = Complex64::new(0.0, 1.0);
    let mut checks = vec![CheckResult::zero(
        "gauge/states_preserved",
        fixed.preservation_error,
        tol,
    )];
    for (a, b) in [("011", "101"), ("011", "110"), ("101", "110")] {
        checks.push(CheckResult::zero(
            format!("unitary/anticommute/{a}-{b}"),
            alice.get(x(a)).anticommutator(alice.get(x(b))).max_abs(),
            tol,
        ));
    }
    let expected = [
        ("011", frame.q1.scale(i)),
        ("101", frame.p1.scale(-i)),
        ("110", frame.r1.scale(-i)),
    ];
    for (label, target) in &expected {
        checks.push(CheckResult::zero(
            format!("unitary/frame_match/{label}"),
            alice.get(x(label)).phase_aligned_distance(target),
            tol,
        ));
    }

    let states = apply_encoding(&fixed.strategy.state, alice);
    let m = build_m(&states);
    let n = build_n(&states);
    let id = CMatrix::identity(4);
    for xin in Input::ALL {
        let ops = if xin.parity() == 0 { &m } else { &n };
        let signs = reconstruction_signs(xin);
        let model = (0..3)
            .fold(id.clone(), |acc, y| &acc + &ops[y].scale_real(signs[y]))
            .scale_real(0.25);
        checks.push(CheckResult::zero(
            format!("unitary/reconstruct/{xin}"),
            states.get(xin).max_abs_diff(&model),
            tol,
        ));
    }
    checks
}

/// Anticommutation, frame identification and state reconstruction for
/// Alice's unitaries, after gauge fixing.
pub fn check_unitary_structure(s: &Strategy, tol: f64) -> CertificationReport {
    let fixed = gauge_fix(s);
    let mut checks = frame_checks(&fixed.frame, tol);
    checks.extend(unitary_checks(&fixed, tol));
    CertificationReport::from_checks(checks, !fixed.frame.is_reliable(), fixed.note)
}

/// Coefficients of `U_G = p I + q Q_1 + r P_1 + s R_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrandUnitaryDecomposition {
    pub p: Complex64,
    pub q: Complex64,
    pub r: Complex64,
    pub s: Complex64,
}

impl GrandUnitaryDecomposition {
    /// `(-1/√3, i/√3, -i/√3, 0)`.
    pub fn optimal() -> Self {
        let t = 1.0 / 3f64.sqrt();
        GrandUnitaryDecomposition {
            p: Complex64::new(-t, 0.0),
            q: Complex64::new(0.0, t),
            r: Complex64::new(0.0, -t),
            s: Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrandUnitary {
    pub matrix: CMatrix,
    pub decomposition: GrandUnitaryDecomposition,
    pub checks: Vec<CheckResult>,
}

/// `U_G = (-I + U_011 + U_101)/√3` from gauge-fixed unitaries, its
/// decomposition on `{I, Q_1, P_1, R_1}` and the checks that it carries
/// `ρ_000 → ρ_001`, `ρ_011 → ρ_010`, `ρ_101 → ρ_100`, `ρ_110 → ρ_111`
/// under `(U_G^H ⊗ I)(·)(U_G ⊗ I)`.
pub fn grand_unitary(
    alice: &EncodingUnitaries,
    frame: &ExtractedFrame,
    states: &EncodedStates,
    tol: f64,
) -> GrandUnitary {
    let sum = &(&(-&CMatrix::identity(2)) + alice.get(x("011"))) + alice.get(x("101"));
    let g = sum.scale_real(1.0 / 3f64.sqrt());
    let coeff = |op: &CMatrix| op.trace_product(&g) / 2.0;
    let decomposition = GrandUnitaryDecomposition {
        p: g.trace() / 2.0,
        q: coeff(&frame.q1),
        r: coeff(&frame.p1),
        s: coeff(&frame.r1),
    };
    let rebuilt = &(&CMatrix::identity(2).scale(decomposition.p)
        + &frame.q1.scale(decomposition.q))
        + &(&frame.p1.scale(decomposition.r) + &frame.r1.scale(decomposition.s));

    let mut checks = vec![
        CheckResult::zero("grand/unitarity", g.unitarity_error(), tol),
        CheckResult::zero("grand/decomposition", g.max_abs_diff(&rebuilt), tol),
    ];
    let want = GrandUnitaryDecomposition::optimal();
    for (name, got, target) in [
        ("p", decomposition.p, want.p),
        ("q", decomposition.q, want.q),
        ("r", decomposition.r, want.r),
        ("s", decomposition.s, want.s),
    ] {
        checks.push(CheckResult::new(
            format!("grand/{name}.re"),
            got.re,
            target.re,
            tol,
        ));
        checks.push(CheckResult::new(
            format!("grand/{name}.im"),
            got.im,
            target.im,
            tol,
        ));
    }

    let g_dag = g.adjoint();
    for (from, to) in [
        ("000", "001"),
        ("011", "010"),
        ("101", "100"),
        ("110", "111"),
    ] {
        let mapped = states.get(x(from)).conjugate_first(&g_dag);
        checks.push(CheckResult::zero(
            format!("grand/map/{from}-{to}"),
            mapped.max_abs_diff(states.get(x(to))),
            tol,
        ));
    }
    let m = build_m(states);
    let n = build_n(states);
    for (y, sign) in [(0, -1.0), (1, -1.0), (2, 1.0)] {
        let mapped = m[y].conjugate_first(&g_dag);
        checks.push(CheckResult::zero(
            format!("grand/transform/{}", y + 1),
            mapped.max_abs_diff(&n[y].scale_real(sign)),
            tol,
        ));
    }
    GrandUnitary {
        matrix: g,
        decomposition,
        checks,
    }
}

/// Every check: encoded states, observables, entanglement, unitaries,
/// grand unitary and the success probability itself.
pub fn certify(s: &Strategy, tol: f64) -> CertificationReport {
    let fixed = gauge_fix(s);
    let mut checks = vec![CheckResult::new(
        "success_probability",
        success_via_delta(s).s_q,
        optimal_success(),
        tol,
    )];
    checks.extend(state_structure_checks(s, tol));
    checks.extend(check_entanglement(&fixed.strategy.state, tol));
    checks.extend(frame_checks(&fixed.frame, tol));
    checks.extend(unitary_checks(&fixed, tol));
    let states = apply_encoding(&fixed.strategy.state, &fixed.strategy.alice);
    checks.extend(grand_unitary(&fixed.strategy.alice, &fixed.frame, &states, tol).checks);
    CertificationReport::from_checks(checks, !fixed.frame.is_reliable(), fixed.note)
}
