use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::qcore::QutritState;

/// Hilbert-space dimension: three Rydberg levels and one loss level.
pub const LEVELS: usize = 4;
/// Index of the loss level.
pub const LOSS: usize = 3;
pub const LEVEL_LABELS: [&str; LEVELS] = ["R1", "R2", "R3", "loss"];

/// Tolerances applied when checking a density matrix.
pub(crate) const HERMITIAN_TOL: f64 = 1e-10;
pub(crate) const TRACE_TOL: f64 = 1e-8;
pub(crate) const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix<LEVELS>);

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(m: Matrix<LEVELS>) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check(0.0)?;
        Ok(rho)
    }

    pub fn from_state(state: &QutritState) -> Self {
        let v: Vector<LEVELS> = [state[0], state[1], state[2], C64::new(0.0, 0.0)];
        DensityMatrix(Matrix::outer(&v))
    }

    /// `|R_level><R_level|`, `level` in `1..=3`.
    pub fn basis(level: usize) -> Self {
        Self::from_state(&QutritState::basis(level))
    }

    pub fn matrix(&self) -> &Matrix<LEVELS> {
        &self.0
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0 .0[level][level].re
    }

    pub fn populations(&self) -> [f64; LEVELS] {
        core::array::from_fn(|i| self.population(i))
    }

    pub fn loss(&self) -> f64 {
        self.population(LOSS)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Coherences `rho_12, rho_13, rho_23`.
    pub fn coherences(&self) -> [C64; 3] {
        let m = &self.0 .0;
        [m[0][1], m[0][2], m[1][2]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.eigvalsh()[0]
    }

    /// Checks the density-matrix invariants, reporting `time` on failure.
    pub fn check(&self, time: f64) -> Result<()> {
        let deviation = self.0.hermiticity_error();
        if !(deviation <= HERMITIAN_TOL) {
            return Err(Error::HermiticityViolation { time, deviation });
        }
        let trace = self.trace();
        if !((trace - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::TraceDrift { time, trace });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if !(min_eigenvalue >= -POSITIVITY_TOL) {
            return Err(Error::PositivityViolation { time, min_eigenvalue });
        }
        Ok(())
    }

    /// `U rho U^dagger` for a unitary acting on the Rydberg levels.
    pub fn conjugate_qutrit(&self, u: &Matrix<3>) -> Self {
        let big = embed3(u, C64::new(1.0, 0.0));
        DensityMatrix(big * self.0 * big.adjoint())
    }
}

impl From<QutritState> for DensityMatrix {
    fn from(s: QutritState) -> Self {
        DensityMatrix::from_state(&s)
    }
}

impl From<&QutritState> for DensityMatrix {
    fn from(s: &QutritState) -> Self {
        DensityMatrix::from_state(s)
    }
}

impl From<&DensityMatrix> for DensityMatrix {
    fn from(r: &DensityMatrix) -> Self {
        *r
    }
}

/// Embeds a 3x3 block into the Rydberg corner of a 4x4 matrix, with `corner`
/// on the loss diagonal.
pub(crate) fn embed3(m: &Matrix<3>, corner: C64) -> Matrix<LEVELS> {
    let mut out = Matrix::<LEVELS>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            out.0[i][j] = m.0[i][j];
        }
    }
    out.0[LOSS][LOSS] = corner;
    out
}
