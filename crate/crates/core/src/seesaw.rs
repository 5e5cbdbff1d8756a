//! Seesaw maximization of the success probability.
//!
//! With two of the three ingredients (Bob's observables, the shared state,
//! Alice's unitaries) held fixed, the objective is maximized exactly in the
//! third:
//!
//! * Bob: `B_y = sign(N_y - M_y)`.
//! * State: the top eigenvector of `G = Σ_{x,y} (-1)^{x_y} (U_x ⊗ I) B_y (U_x^H ⊗ I)`.
//! * Unitaries: writing `U = u_0 I + i(u_1 X + u_2 Y + u_3 Z)` with `u` a real
//!   unit vector, each `Tr[ρ_x C_x]` becomes a quadratic form `u^T K_x u`
//!   and the top eigenvector of `K_x` is the optimum.
//!
//! Rounds apply the three steps in the order bob → state → unitaries, so
//! the value never decreases. Once a run stalls the optimizer tries a few
//! perturbed restarts around the current point and keeps any that end
//! higher; plain alternation gets stuck in local maxima (around 0.884) for
//! roughly one start in four.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::game::{
    apply_encoding, build_m, build_n, success_via_delta, BobObservables, EncodedStates,
    EncodingUnitaries, Input, SharedState, Strategy,
};
use crate::linalg::{hermitian_eig, pauli, sign_operator, CMatrix};
use crate::{Error, Result};

/// Generator used for every random draw in this module.
pub const PRNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawConfig {
    pub max_rounds: usize,
    /// A run stops once one round changes `S_Q` by less than this and no
    /// encoded state by more than `state_tol`.
    pub convergence_tol: f64,
    /// Largest entry change of any `ρ_x` in a converged round. Near the
    /// optimum `S_Q` is flat, so structure lags the value by many rounds.
    pub state_tol: f64,
    pub seed: u64,
    pub num_starts: usize,
    /// Minimum gain for a perturbed restart to replace the current point.
    pub inner_tol: f64,
    /// Perturbed restarts tried after the first run converges.
    pub perturbations: usize,
    /// Size of the random kick applied to the state and each unitary.
    pub perturbation_scale: f64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            max_rounds: 500,
            convergence_tol: 1e-12,
            state_tol: 1e-11,
            seed: 0,
            num_starts: 20,
            inner_tol: 1e-12,
            perturbations: 3,
            perturbation_scale: 0.3,
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::invalid("seesaw config", reason));
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        let positive = |t: f64| t.is_finite() && t > 0.0;
        if !positive(self.convergence_tol) || !positive(self.state_tol) || !positive(self.inner_tol)
        {
            return bad("tolerances must be positive");
        }
        if self.perturbation_scale.is_nan() || self.perturbation_scale < 0.0 {
            return bad("perturbation_scale must be non-negative");
        }
        if self.num_starts == 0 {
            return bad("num_starts must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub strategy: Strategy,
    pub value: f64,
    /// Rounds of the first run.
    pub rounds_used: usize,
    /// Rounds spent in perturbed restarts, accepted or not.
    pub perturbation_rounds: usize,
    pub accepted_perturbations: usize,
    /// `S_Q` of the initial strategy, then one entry per round of the first
    /// run, then one entry per accepted restart.
    pub history: Vec<f64>,
    pub converged: bool,
    pub seed: u64,
}

pub fn best_response_bob(states: &EncodedStates) -> BobObservables {
    let m = build_m(states);
    let n = build_n(states);
    let b = std::array::from_fn(|k| {
        sign_operator(&(&n[k] - &m[k]))
            .expect("differences of Hermitian states are Hermitian")
            .matrix
    });
    BobObservables::new(b).expect("sign operators are dichotomic")
}

/// The operator `G` with `Tr[ρ G] = Σ_x Σ_y (-1)^{x_y} Tr[ρ_x B_y]`.
pub fn state_operator(alice: &EncodingUnitaries, bob: &BobObservables) -> CMatrix {
    let mut g = CMatrix::zeros(4);
    for (x, u) in alice.iter() {
        let c = correlator(x, bob);
        g = &g + &c.conjugate_first(u);
    }
    g
}

/// `C_x = Σ_y (-1)^{x_y} B_y`.
pub fn correlator(x: Input, bob: &BobObservables) -> CMatrix {
    (1..=3).fold(CMatrix::zeros(4), |acc, y| {
        &acc + &bob.get(y).scale_real(x.sign(y))
    })
}

pub fn best_response_state(alice: &EncodingUnitaries, bob: &BobObservables) -> SharedState {
    let g = state_operator(alice, bob);
    let eig = hermitian_eig(&g).expect("G is Hermitian");
    SharedState::pure(&eig.eigenvectors[0]).expect("unit eigenvector")
}

fn quaternion_basis() -> [CMatrix; 4] {
    let i = Complex64::new(0.0, 1.0);
    [
        pauli::id(),
        pauli::x().scale(i),
        pauli::y().scale(i),
        pauli::z().scale(i),
    ]
}

/// Real symmetric `K` with `Tr[(U^H ⊗ I) ρ (U ⊗ I) C] = u^T K u`.
pub fn quaternion_form(rho: &CMatrix, c: &CMatrix) -> [[f64; 4]; 4] {
    let basis = quaternion_basis();
    let id = CMatrix::identity(2);
    let left: Vec<CMatrix> = basis.iter().map(|e| e.adjoint().kron(&id)).collect();
    let right: Vec<CMatrix> = basis.iter().map(|e| e.kron(&id)).collect();
    // Tr[(E_a^H ⊗ I) ρ (E_b ⊗ I) C] = Tr[ρ (E_b ⊗ I) C (E_a^H ⊗ I)]
    let mut t = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let inner = &(&right[b] * c) * &left[a];
            t[a][b] = rho.trace_product(&inner).re;
        }
    }
    let mut k = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            k[a][b] = 0.5 * (t[a][b] + t[b][a]);
        }
    }
    k
}

/// Unitary maximizing `Tr[(U^H ⊗ I) ρ (U ⊗ I) C]`. When `C = 0` every
/// unitary is optimal and the identity is returned.
pub fn best_unitary(rho: &CMatrix, c: &CMatrix) -> CMatrix {
    let k = quaternion_form(rho, c);
    let rows: Vec<&[f64]> = k.iter().map(|r| r.as_slice()).collect();
    let eig = hermitian_eig(&CMatrix::from_real(&rows)).expect("K is symmetric");
    let v = &eig.eigenvectors[0];
    let mut u = [v[0].re, v[1].re, v[2].re, v[3].re];
    let norm = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    u.iter_mut().for_each(|a| *a /= norm);
    pauli::quaternion_unitary(u)
}

pub fn best_response_unitaries(state: &SharedState, bob: &BobObservables) -> EncodingUnitaries {
    let u = Input::ALL
        .iter()
        .map(|&x| best_unitary(state.rho(), &correlator(x, bob)))
        .collect();
    EncodingUnitaries::new(u).expect("quaternion unitaries are unitary")
}

/// One bob → state → unitaries round.
pub fn seesaw_round(s: &Strategy) -> Strategy {
    let bob = best_response_bob(&apply_encoding(&s.state, &s.alice));
    let state = best_response_state(&s.alice, &bob);
    let alice = best_response_unitaries(&state, &bob);
    Strategy { state, alice, bob }
}

/// One bob → unitaries round with the state held fixed.
pub fn seesaw_round_fixed_state(s: &Strategy) -> Strategy {
    let bob = best_response_bob(&apply_encoding(&s.state, &s.alice));
    let alice = best_response_unitaries(&s.state, &bob);
    Strategy {
        state: s.state.clone(),
        alice,
        bob,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Full,
    FixedState,
}

impl Mode {
    fn round(self, s: &Strategy) -> Strategy {
        match self {
            Mode::Full => seesaw_round(s),
            Mode::FixedState => seesaw_round_fixed_state(s),
        }
    }
}

struct Descent {
    strategy: Strategy,
    values: Vec<f64>,
    converged: bool,
}

fn descend(init: Strategy, config: &SeesawConfig, mode: Mode) -> Descent {
    let mut strategy = init;
    let mut prev = success_via_delta(&strategy).s_q;
    let mut prev_states = apply_encoding(&strategy.state, &strategy.alice);
    let mut values = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_rounds {
        strategy = mode.round(&strategy);
        let v = success_via_delta(&strategy).s_q;
        let states = apply_encoding(&strategy.state, &strategy.alice);
        let step = Input::ALL
            .iter()
            .map(|&x| states.get(x).max_abs_diff(prev_states.get(x)))
            .fold(0.0, f64::max);
        values.push(v);
        if (v - prev).abs() < config.convergence_tol && step < config.state_tol {
            converged = true;
            break;
        }
        prev = v;
        prev_states = states;
    }
    Descent {
        strategy,
        values,
        converged,
    }
}

fn random_unit_quaternion(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let mut q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = q.iter().map(|a| a * a).sum::<f64>().sqrt();
    q.iter_mut().for_each(|a| *a /= norm);
    q
}

fn random_vector(rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..4)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// `exp(i (a_1 X + a_2 Y + a_3 Z))` for a Gaussian `a` of the given scale.
fn random_rotation(rng: &mut ChaCha8Rng, scale: f64) -> CMatrix {
    let a: [f64; 3] = std::array::from_fn(|_| scale * rng.sample::<f64, _>(StandardNormal));
    let angle = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if angle == 0.0 {
        return CMatrix::identity(2);
    }
    let s = angle.sin() / angle;
    pauli::quaternion_unitary([angle.cos(), s * a[0], s * a[1], s * a[2]])
}

fn perturb(s: &Strategy, rng: &mut ChaCha8Rng, scale: f64, mode: Mode) -> Strategy {
    let state = match mode {
        Mode::FixedState => s.state.clone(),
        Mode::Full => {
            let top = hermitian_eig(s.state.rho()).expect("Hermitian state");
            let kick = random_vector(rng);
            let v: Vec<Complex64> = top.eigenvectors[0]
                .iter()
                .zip(&kick)
                .map(|(a, k)| a + k * scale)
                .collect();
            SharedState::pure(&v).unwrap_or_else(|_| s.state.clone())
        }
    };
    let alice = s.alice.map(|_, u| &random_rotation(rng, scale) * u);
    Strategy {
        state,
        alice,
        bob: s.bob.clone(),
    }
}

/// Random strategy: Gaussian pure state and unitaries from normalized
/// Gaussian quaternions. Bob starts at the identity, which the first round
/// replaces.
pub fn random_strategy(rng: &mut ChaCha8Rng) -> Strategy {
    let state = SharedState::pure(&random_vector(rng)).expect("nonzero Gaussian vector");
    let u = (0..8)
        .map(|_| pauli::quaternion_unitary(random_unit_quaternion(rng)))
        .collect();
    Strategy {
        state,
        alice: EncodingUnitaries::new(u).expect("unit quaternions"),
        bob: BobObservables::identity(),
    }
}

/// Seesaw from `init`. Perturbed restarts draw from `config.seed`.
pub fn seesaw(config: &SeesawConfig, init: Strategy) -> Result<SeesawResult> {
    run_seesaw(config, init, Mode::Full)
}

/// Seesaw over Bob's observables and Alice's unitaries only; `init.state`
/// is kept.
pub fn seesaw_fixed_state(config: &SeesawConfig, init: Strategy) -> Result<SeesawResult> {
    run_seesaw(config, init, Mode::FixedState)
}

fn run_seesaw(config: &SeesawConfig, init: Strategy, mode: Mode) -> Result<SeesawResult> {
    config.validate()?;
    let mut history = vec![success_via_delta(&init).s_q];
    let first = descend(init, config, mode);
    let rounds_used = first.values.len();
    history.extend(&first.values);
    let converged = first.converged;
    let mut best = first.strategy;
    let mut value = *history.last().expect("non-empty history");

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut perturbation_rounds = 0;
    let mut accepted_perturbations = 0;
    for _ in 0..config.perturbations {
        let kicked = perturb(&best, &mut rng, config.perturbation_scale, mode);
        let trial = descend(kicked, config, mode);
        perturbation_rounds += trial.values.len();
        let v = *trial.values.last().expect("at least one round");
        if v > value + config.inner_tol {
            best = trial.strategy;
            value = v;
            accepted_perturbations += 1;
            history.push(v);
        }
    }

    Ok(SeesawResult {
        strategy: best,
        value,
        rounds_used,
        perturbation_rounds,
        accepted_perturbations,
        history,
        converged,
        seed: config.seed,
    })
}

/// Seed of start `k` in a multistart run.
pub fn start_seed(base: u64, k: usize) -> u64 {
    base.wrapping_add(k as u64)
}

/// One seeded start: random initialization, then [`seesaw`].
pub fn run_start(config: &SeesawConfig, seed: u64) -> Result<SeesawResult> {
    start(config, seed, None)
}

fn start(config: &SeesawConfig, seed: u64, state: Option<&SharedState>) -> Result<SeesawResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init = random_strategy(&mut rng);
    let cfg = SeesawConfig {
        // separate stream for the restarts
        seed: seed ^ 0x9e37_79b9_7f4a_7c15,
        ..config.clone()
    };
    let mut result = match state {
        None => seesaw(&cfg, init)?,
        Some(state) => {
            init.state = state.clone();
            seesaw_fixed_state(&cfg, init)?
        }
    };
    result.seed = seed;
    Ok(result)
}

/// Every start of a multistart run, in seed order.
pub fn multistart_all(config: &SeesawConfig, threads: usize) -> Result<Vec<SeesawResult>> {
    starts(config, threads, None)
}

/// Best multistart result with the shared state held at `state`.
pub fn multistart_fixed_state(
    config: &SeesawConfig,
    state: &SharedState,
    threads: usize,
) -> Result<SeesawResult> {
    let all = starts(config, threads, Some(state))?;
    Ok(pick_best(all).expect("num_starts >= 1"))
}

fn starts(
    config: &SeesawConfig,
    threads: usize,
    state: Option<&SharedState>,
) -> Result<Vec<SeesawResult>> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.num_starts)
        .map(|k| start_seed(config.seed, k))
        .collect();
    if threads <= 1 {
        return seeds.iter().map(|&s| start(config, s, state)).collect();
    }
    let chunk = seeds.len().div_ceil(threads);
    let results: Vec<Result<Vec<SeesawResult>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || part.iter().map(|&s| start(config, s, state)).collect())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("seesaw worker panicked"))
            .collect()
    });
    let mut all = Vec::with_capacity(seeds.len());
    for r in results {
        all.extend(r?);
    }
    Ok(all)
}

/// Highest value wins; ties go to the earliest start.
pub fn pick_best(results: Vec<SeesawResult>) -> Option<SeesawResult> {
    results
        .into_iter()
        .reduce(|best, r| if r.value > best.value { r } else { best })
}

pub fn multistart(config: &SeesawConfig) -> Result<SeesawResult> {
    multistart_parallel(config, 1)
}

/// Same result as [`multistart`], computed on up to `threads` threads.
pub fn multistart_parallel(config: &SeesawConfig, threads: usize) -> Result<SeesawResult> {
    let all = multistart_all(config, threads)?;
    Ok(pick_best(all).expect("num_starts >= 1"))
}
