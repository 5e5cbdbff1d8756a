#![allow(dead_code)]

use num_complex::Complex64;
use pmrac::game::{BobObservables, EncodingUnitaries, Input, SharedState, Strategy};
use pmrac::linalg::hermitian_eig;
use pmrac::CMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    CMatrix::from_vec(dim, (0..dim * dim).map(|_| gaussian(rng)).collect()).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let g = random_matrix(rng, dim);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Columns are the eigenvectors of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let e = hermitian_eig(&random_hermitian(rng, dim)).unwrap();
    let mut u = CMatrix::zeros(dim);
    for (k, v) in e.eigenvectors.iter().enumerate() {
        for i in 0..dim {
            u[(i, k)] = v[i];
        }
    }
    let phase = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
    u.scale(phase)
}

/// Random density matrix of random rank.
pub fn random_state(rng: &mut ChaCha8Rng) -> SharedState {
    let rank = rng.random_range(1..=4);
    let g = CMatrix::from_vec(
        4,
        (0..16)
            .map(|k| {
                if k % 4 < rank {
                    gaussian(rng)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    )
    .unwrap();
    let w = &g * &g.adjoint();
    let t = w.trace().re;
    SharedState::new(w.scale_real(1.0 / t)).unwrap()
}

pub fn random_dichotomic(rng: &mut ChaCha8Rng) -> CMatrix {
    let v = random_unitary(rng, 4);
    let mut d = CMatrix::zeros(4);
    for i in 0..4 {
        d[(i, i)] = Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0);
    }
    let b = &(&v * &d) * &v.adjoint();
    (&b + &b.adjoint()).scale_real(0.5)
}

pub fn random_strategy(rng: &mut ChaCha8Rng) -> Strategy {
    let state = random_state(rng);
    let alice = EncodingUnitaries::new((0..8).map(|_| random_unitary(rng, 2)).collect()).unwrap();
    let bob = BobObservables::new(std::array::from_fn(|_| random_dichotomic(rng))).unwrap();
    Strategy { state, alice, bob }
}

// Independent evaluation on plain arrays.

type M4 = [[Complex64; 4]; 4];

fn to_m4(m: &CMatrix) -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn mul(a: &M4, b: &M4) -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
}

fn lift(u: &CMatrix) -> M4 {
    // u ⊗ I with the first qubit as the high index bit
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if i % 2 == j % 2 {
                u[(i / 2, j / 2)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    })
}

fn dagger(a: &M4) -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].conj()))
}

/// `(1/24) Σ_{x,y} Tr[ρ_x Π_{x_y}^y]` with `Π_b = (I + (-1)^b B)/2`.
pub fn oracle_success(s: &Strategy) -> f64 {
    let rho = to_m4(s.state.rho());
    let mut total = 0.0;
    for x in 0..8u8 {
        let u = lift(s.alice.get(Input::new(x).unwrap()));
        let rho_x = mul(&mul(&dagger(&u), &rho), &u);
        for y in 0..3 {
            let bit = (x >> (2 - y)) & 1;
            let sign = if bit == 0 { 1.0 } else { -1.0 };
            let b = to_m4(s.bob.get(y + 1));
            let rb = mul(&rho_x, &b);
            let tr_rb: f64 = (0..4).map(|i| rb[i][i].re).sum();
            let tr_r: f64 = (0..4).map(|i| rho_x[i][i].re).sum();
            total += 0.5 * (tr_r + sign * tr_rb);
        }
    }
    total / 24.0
}
