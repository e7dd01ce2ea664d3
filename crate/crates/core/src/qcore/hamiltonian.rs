use num_complex::Complex64 as C64;

use super::sequence::{DriveSegment, Field};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Rotating-frame Hamiltonian on `|R1>, |R2>, |R3>`, entries in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian3(pub Matrix<3>);

impl Hamiltonian3 {
    pub fn matrix(&self) -> &Matrix<3> {
        &self.0
    }

    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> Matrix<3> {
        self.0.propagator(t)
    }
}

/// Builds the three-level Hamiltonian from at most one drive per field.
///
/// An absent field contributes neither coupling nor detuning.
pub fn build_hamiltonian(mu1: Option<&DriveSegment>, mu2: Option<&DriveSegment>) -> Result<Hamiltonian3> {
    let mut h = Matrix::<3>::zeros();
    for (slot, drive) in [(Field::Mu1, mu1), (Field::Mu2, mu2)] {
        let Some(d) = drive else { continue };
        d.validate()?;
        if d.field != slot {
            return Err(Error::InvalidParameter { name: "drive field does not match its slot", value: f64::NAN });
        }
        let lo = slot.lower_level();
        let hi = lo + 1;
        let coupling = C64::from_polar(0.5 * d.rabi, d.phase);
        h.0[hi][lo] = coupling;
        h.0[lo][hi] = coupling.conj();
        h.0[hi][hi] = C64::new(-d.detuning, 0.0);
    }
    Ok(Hamiltonian3(h))
}
