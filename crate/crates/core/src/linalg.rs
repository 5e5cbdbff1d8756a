//! Dense complex matrices for one- and two-qubit operators.
//!
//! Everything here is sized for 2×2 and 4×4 work: states, observables and
//! local unitaries. Matrices are stored row-major as [`Complex64`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance used when an operation declares a Hermitian input.
pub const HERMITICITY_TOL: f64 = 1e-9;

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues closer than this are treated as one degenerate level when
/// ordering eigenvectors.
const DEGENERACY_TOL: f64 = 1e-10;

/// Eigenvalues within this distance of zero get sign `+1`.
pub const SIGN_ZERO_TOL: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected a {expected}x{expected} matrix, got {found}x{found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("matrix data of length {len} is not a square of dimension {dim}")]
    BadLength { dim: usize, len: usize },
    #[error("matrix is not Hermitian: max|A - A^H| = {deviation:e} exceeds tolerance {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if dim == 0 || data.len() != dim * dim {
            return Err(LinalgError::BadLength {
                dim,
                len: data.len(),
            });
        }
        Ok(CMatrix { dim, data })
    }

    /// Builds a matrix from real entries. Panics if `rows` is not square.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let data = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), dim, "row length must equal row count");
                r.iter().map(|&x| Complex64::new(x, 0.0))
            })
            .collect();
        CMatrix { dim, data }
    }

    /// Builds a matrix from complex rows. Panics if `rows` is not square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "row length must equal row count");
            data.extend_from_slice(r);
        }
        CMatrix { dim, data }
    }

    /// Outer product `v v^H`.
    pub fn projector(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim).map(<[_]>::to_vec).collect()
    }

    fn check_same(&self, other: &CMatrix) -> Result<(), LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn require_dim(&self, expected: usize) -> Result<(), LinalgError> {
        if self.dim != expected {
            return Err(LinalgError::WrongDimension {
                expected,
                found: self.dim,
            });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.check_same(other)?;
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `Tr[self * other]` without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> Complex64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in trace_product");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (m, n) = (self.dim, other.dim);
        let dim = m * n;
        let mut out = CMatrix::zeros(dim);
        for i in 0..m {
            for j in 0..m {
                let a = self.data[i * m + j];
                for k in 0..n {
                    for l in 0..n {
                        out.data[(i * n + k) * dim + (j * n + l)] = a * other.data[k * n + l];
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in max_abs_diff");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max|A - A^H|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<(), LinalgError> {
        let deviation = self.hermiticity_error();
        if deviation > tol {
            return Err(LinalgError::NotHermitian { deviation, tol });
        }
        Ok(())
    }

    /// `max|U^H U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&CMatrix::identity(self.dim))
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) + &(other * self)
    }

    /// `(U ⊗ I) self (U^H ⊗ I)` for a 4×4 `self` and 2×2 `u`.
    pub fn conjugate_first(&self, u: &CMatrix) -> CMatrix {
        let big = u.kron(&CMatrix::identity(2));
        &(&big * self) * &big.adjoint()
    }

    /// Distance to `other` after the best global phase is applied to `other`.
    pub fn phase_aligned_distance(&self, other: &CMatrix) -> f64 {
        let overlap = other.adjoint().trace_product(self);
        let phase = if overlap.norm() > 1e-300 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.max_abs_diff(&other.scale(phase))
    }

    /// Multiplies by a phase so the largest-modulus entry is real positive.
    /// Near-ties resolve to the first entry in row-major order.
    pub fn strip_global_phase(&self) -> CMatrix {
        let max = self.max_abs();
        if max == 0.0 {
            return self.clone();
        }
        let pivot = self
            .data
            .iter()
            .find(|z| z.norm() >= max - 1e-9)
            .copied()
            .unwrap_or(ONE);
        self.scale(pivot.conj() / pivot.norm())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator forms panic on dimension mismatch; use the `try_*` methods for
// checked arithmetic on untrusted shapes.
impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

/// Pauli matrices and small helpers.
pub mod pauli {
    use super::*;

    pub fn id() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// `a0 I + i (a1 X + a2 Y + a3 Z)`; unitary when `a` is a real unit vector.
    pub fn quaternion_unitary(a: [f64; 4]) -> CMatrix {
        let [a0, a1, a2, a3] = a;
        CMatrix::from_rows(&[
            vec![Complex64::new(a0, a3), Complex64::new(a2, a1)],
            vec![Complex64::new(-a2, a1), Complex64::new(a0, -a3)],
        ])
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl EigenDecomposition {
    /// `Σ λ_k v_k v_k^H`.
    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|l| l)
    }

    /// `Σ f(λ_k) v_k v_k^H`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let dim = self.eigenvalues.len();
        let mut out = CMatrix::zeros(dim);
        for (&l, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let w = f(l);
            if w == 0.0 {
                continue;
            }
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// a real plane rotation that zeroes it. Output ordering is deterministic:
/// eigenvalues descending, every eigenvector phased so its largest-modulus
/// component is real positive, and vectors inside a degenerate level sorted
/// lexicographically (descending) on their components.
pub fn hermitian_eig(h: &CMatrix) -> Result<EigenDecomposition, LinalgError> {
    h.require_hermitian(HERMITICITY_TOL)?;
    let n = h.dim();
    // symmetrize so the rotations see an exactly Hermitian matrix
    let mut a = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = a
        .data
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let col: Vec<Complex64> = (0..n).map(|i| v[(i, k)]).collect();
            (a[(k, k)].re, canonical_phase(col))
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    // reorder inside degenerate levels
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (pairs[start].0 - pairs[end].0).abs() <= DEGENERACY_TOL {
            end += 1;
        }
        pairs[start..end].sort_by(|x, y| lex_cmp_desc(&x.1, &y.1));
        start = end;
    }

    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn canonical_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(&pivot) = v.iter().find(|z| z.norm() >= max - 1e-12) {
        let rot = pivot.conj() / (pivot.norm() * norm);
        for z in &mut v {
            *z *= rot;
        }
    }
    v
}

fn lex_cmp_desc(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > 1e-12 {
                return q.total_cmp(&p);
            }
        }
    }
    Ordering::Equal
}

/// Matrix sign of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SignOperator {
    pub matrix: CMatrix,
    /// Eigenvalues within [`SIGN_ZERO_TOL`] of zero, mapped to `+1`.
    pub zero_eigenvalues: usize,
}

/// `Σ sgn(λ_k) v_k v_k^H` with `sgn(0) = +1`.
pub fn sign_operator(h: &CMatrix) -> Result<SignOperator, LinalgError> {
    let eig = hermitian_eig(h)?;
    let zero_eigenvalues = eig
        .eigenvalues
        .iter()
        .filter(|l| l.abs() <= SIGN_ZERO_TOL)
        .count();
    let matrix = eig.map_spectrum(|l| if l >= -SIGN_ZERO_TOL { 1.0 } else { -1.0 });
    Ok(SignOperator {
        matrix,
        zero_eigenvalues,
    })
}

/// Which tensor factor of a two-qubit operator to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

pub fn partial_trace(m: &CMatrix, traced: Subsystem) -> Result<CMatrix, LinalgError> {
    m.require_dim(4)?;
    let mut out = CMatrix::zeros(2);
    for r in 0..2 {
        for c in 0..2 {
            out[(r, c)] = (0..2)
                .map(|k| match traced {
                    Subsystem::First => m[(2 * k + r, 2 * k + c)],
                    Subsystem::Second => m[(2 * r + k, 2 * c + k)],
                })
                .sum();
        }
    }
    Ok(out)
}

/// `(1/√d) √Tr[M^H M]`; equals 1 for the identity of any size.
pub fn scaled_frobenius_norm(m: &CMatrix) -> f64 {
    let sum: f64 = m.data().iter().map(|z| z.norm_sqr()).sum();
    (sum / m.dim() as f64).sqrt()
}

/// Nearest Kronecker product `A ⊗ B` to a 4×4 matrix.
#[derive(Debug, Clone)]
pub struct KronFactors {
    pub a: CMatrix,
    pub b: CMatrix,
    /// `max|M - A ⊗ B|`.
    pub residual: f64,
}

/// Rank-one Kronecker factorization via the reshuffled matrix.
///
/// `A` is the leading left singular vector of the reshuffle `R`, computed
/// from the top eigenvector of `R R^H`, turned Hermitian by removing its
/// phase and normalized to unit scaled Frobenius norm. Its sign is fixed so
/// the first entry with modulus above `1e-9` has positive real part (or
/// positive imaginary part when the real part vanishes). `B` is the
/// least-squares partner of `A`.
pub fn kron_factorize(m: &CMatrix) -> Result<KronFactors, LinalgError> {
    m.require_dim(4)?;
    // R[(i,j),(k,l)] = M[(i,k),(j,l)]
    let mut r = CMatrix::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r[(2 * i + j, 2 * k + l)] = m[(2 * i + k, 2 * j + l)];
                }
            }
        }
    }
    let gram = &r * &r.adjoint();
    let eig = hermitian_eig(&gram)?;
    let u = &eig.eigenvectors[0];
    let raw = CMatrix::from_vec(2, u.clone())?;

    // raw = c·A for Hermitian A; split into Hermitian and anti-Hermitian parts
    let herm = (&raw + &raw.adjoint()).scale_real(0.5);
    let anti = (&raw - &raw.adjoint()).scale(Complex64::new(0.0, -0.5));
    let mut a = if anti.max_abs() < 1e-300 {
        herm
    } else if herm.max_abs() < 1e-300 {
        anti
    } else {
        let s = herm.trace_product(&anti).re.signum();
        &herm + &anti.scale_real(s)
    };
    let norm = scaled_frobenius_norm(&a);
    if norm > 0.0 {
        a = a.scale_real(1.0 / norm);
    } else {
        a = CMatrix::identity(2);
    }
    if let Some(first) = a.data().iter().find(|z| z.norm() > 1e-9) {
        let positive = if first.re.abs() > 1e-9 {
            first.re > 0.0
        } else {
            first.im > 0.0
        };
        if !positive {
            a = -&a;
        }
    }

    // B_kl = Σ_ij conj(A_ij) M[(i,k),(j,l)] / Σ|A_ij|²
    let weight: f64 = a.data().iter().map(|z| z.norm_sqr()).sum();
    let mut b = CMatrix::zeros(2);
    for k in 0..2 {
        for l in 0..2 {
            let mut acc = ZERO;
            for i in 0..2 {
                for j in 0..2 {
                    acc += a[(i, j)].conj() * m[(2 * i + k, 2 * j + l)];
                }
            }
            b[(k, l)] = acc / weight;
        }
    }
    let residual = m.max_abs_diff(&a.kron(&b));
    Ok(KronFactors { a, b, residual })
}
