//! Small dense complex matrices with compile-time dimension.
//!
//! Everything here is sized for few-level systems (N <= 9), so the
//! algorithms favour clarity over asymptotic speed.

use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use num_traits::Zero;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Square complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix<const N: usize>(pub [[C64; N]; N]);

/// Complex column vector.
pub type Vector<const N: usize> = [C64; N];

impl<const N: usize> Default for Matrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Matrix<N> {
    pub const fn zeros() -> Self {
        Matrix([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = diag[i];
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &Vector<N>) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn apply(&self, v: &Vector<N>) -> Vector<N> {
        let mut out = [ZERO; N];
        for i in 0..N {
            out[i] = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// `A B - B A`
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise deviation from hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..N {
            for j in i..N {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest elementwise deviation of `U^dagger U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Only the upper triangle is trusted.
    pub fn eigh(&self) -> HermitianEigen<N> {
        jacobi_eigh(self)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn eigvalsh(&self) -> [f64; N] {
        let mut vals = self.eigh().values;
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        vals
    }

    /// `exp(-i H t)` for Hermitian `H`.
    pub fn propagator(&self, t: f64) -> Self {
        let eig = self.eigh();
        let mut phased = eig.vectors;
        for j in 0..N {
            let phase = C64::from_polar(1.0, -eig.values[j] * t);
            for i in 0..N {
                phased.0[i][j] *= phase;
            }
        }
        phased * eig.vectors.adjoint()
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &Vector<N>) -> Result<Vector<N>> {
        let mut a = self.0;
        let mut x = *b;
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap_or(core::cmp::Ordering::Equal))
                .ok_or(Error::Singular)?;
            if a[pivot][col].norm() == 0.0 || !a[pivot][col].norm().is_finite() {
                return Err(Error::Singular);
            }
            a.swap(col, pivot);
            x.swap(col, pivot);
            for row in col + 1..N {
                let factor = a[row][col] / a[col][col];
                for k in col..N {
                    let v = a[col][k];
                    a[row][k] -= factor * v;
                }
                let v = x[col];
                x[row] -= factor * v;
            }
        }
        for col in (0..N).rev() {
            let tail: C64 = (col + 1..N).map(|k| a[col][k] * x[k]).sum();
            x[col] = (x[col] - tail) / a[col][col];
        }
        Ok(x)
    }
}

/// Result of [`Matrix::eigh`]: `A = V diag(values) V^dagger`, eigenvectors in
/// the columns of `vectors`.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: Matrix<N>,
}

fn off_diagonal_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a.0[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigh<const N: usize>(input: &Matrix<N>) -> HermitianEigen<N> {
    // Symmetrize from the upper triangle so round-off in the lower half is ignored.
    let mut a = *input;
    for i in 0..N {
        a.0[i][i] = C64::new(a.0[i][i].re, 0.0);
        for j in i + 1..N {
            a.0[j][i] = a.0[i][j].conj();
        }
    }
    let mut v = Matrix::<N>::identity();
    let scale = a.max_abs();
    if scale == 0.0 || N < 2 {
        let mut values = [0.0; N];
        for i in 0..N {
            values[i] = a.0[i][i].re;
        }
        return HermitianEigen { values, vectors: v };
    }

    for _sweep in 0..64 {
        if off_diagonal_norm(&a) <= f64::EPSILON * 1e-3 * scale {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                let apq = a.0[p][q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE || r <= 1e-300 * scale {
                    continue;
                }
                // Remove the phase of a_pq, then apply a real Jacobi rotation.
                let phase = apq / r;
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // J = D R with D = diag(.., conj(phase) at q, ..); columns p, q:
                // J[p][p] = c, J[p][q] = s, J[q][p] = -s conj(phase), J[q][q] = c conj(phase)
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                // A <- A J (columns p, q)
                for k in 0..N {
                    let akp = a.0[k][p];
                    let akq = a.0[k][q];
                    a.0[k][p] = akp * jpp + akq * jqp;
                    a.0[k][q] = akp * jpq + akq * jqq;
                }
                // A <- J^dagger A (rows p, q)
                for k in 0..N {
                    let apk = a.0[p][k];
                    let aqk = a.0[q][k];
                    a.0[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a.0[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                a.0[p][p].im = 0.0;
                a.0[q][q].im = 0.0;
                // V <- V J
                for k in 0..N {
                    let vkp = v.0[k][p];
                    let vkq = v.0[k][q];
                    v.0[k][p] = vkp * jpp + vkq * jqp;
                    v.0[k][q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    let mut values = [0.0; N];
    for i in 0..N {
        values[i] = a.0[i][i].re;
    }
    HermitianEigen { values, vectors: v }
}

/// Trace distance `1/2 ||a - b||_1` between two Hermitian matrices.
pub fn trace_distance<const N: usize>(a: &Matrix<N>, b: &Matrix<N>) -> f64 {
    let diff = *a - *b;
    0.5 * diff.eigh().values.iter().map(|l| l.abs()).sum::<f64>()
}

pub fn vector_norm<const N: usize>(v: &Vector<N>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl<const N: usize> Index<(usize, usize)> for Matrix<N> {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Matrix<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let aik = self.0[i][k];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..N {
                    out.0[i][j] += aik * rhs.0[k][j];
                }
            }
        }
        out
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for Matrix<N> {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += *b;
        }
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= *b;
        }
        self
    }
}

impl<const N: usize> Neg for Matrix<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}
