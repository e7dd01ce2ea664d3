use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::density::{embed3, LEVELS, LOSS};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qcore::{build_hamiltonian, Field, Hamiltonian3, Segment};

/// Decay and dephasing rates, s^-1, indexed by Rydberg level (0 is `|R1>`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DissipationParams {
    /// Population decay `|R_a> -> |loss>`.
    pub gamma_decay: [f64; 3],
    /// Pure dephasing of `|R_a>`.
    pub gamma_deph: [f64; 3],
}

/// Rank-one jump operator `sqrt(rate) |to><from|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub to: usize,
    pub from: usize,
    pub rate: f64,
}

impl DissipationParams {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for &g in self.gamma_decay.iter() {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParameter { name: "gamma_decay", value: g });
            }
        }
        for &g in self.gamma_deph.iter() {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::InvalidParameter { name: "gamma_deph", value: g });
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma_decay.iter().chain(&self.gamma_deph).all(|&g| g == 0.0)
    }

    /// Nonzero jump operators.
    pub fn jumps(&self) -> Vec<Jump> {
        let decay = (0..3).map(|a| Jump { to: LOSS, from: a, rate: self.gamma_decay[a] });
        let deph = (0..3).map(|a| Jump { to: a, from: a, rate: self.gamma_deph[a] });
        decay.chain(deph).filter(|j| j.rate > 0.0).collect()
    }
}

pub fn embed_hamiltonian(h: &Hamiltonian3) -> Matrix<LEVELS> {
    embed3(&h.0, C64::new(0.0, 0.0))
}

/// Piecewise-constant Hamiltonian of one segment on the 4-level space.
pub fn segment_hamiltonian(seg: &Segment) -> Result<Matrix<LEVELS>> {
    match seg {
        Segment::Drive(d) => {
            let h = match d.field {
                Field::Mu1 => build_hamiltonian(Some(d), None)?,
                Field::Mu2 => build_hamiltonian(None, Some(d))?,
            };
            Ok(embed_hamiltonian(&h))
        }
        Segment::Wait(_) => {
            seg.validate()?;
            Ok(Matrix::zeros())
        }
        Segment::Readout(_) => Err(Error::ReadoutInSequence { index: 0 }),
    }
}

/// `-i[H, rho] + sum_k (L_k rho L_k^dagger - {L_k^dagger L_k, rho} / 2)`.
pub fn lindblad_rhs(rho: &Matrix<LEVELS>, h: &Matrix<LEVELS>, params: &DissipationParams) -> Matrix<LEVELS> {
    rhs_with_jumps(rho, h, &params.jumps())
}

pub(crate) fn rhs_with_jumps(rho: &Matrix<LEVELS>, h: &Matrix<LEVELS>, jumps: &[Jump]) -> Matrix<LEVELS> {
    let comm = h.commutator(rho);
    let mut out = Matrix::<LEVELS>::zeros();
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            let c = comm.0[i][j];
            out.0[i][j] = C64::new(c.im, -c.re);
        }
    }
    for jump in jumps {
        let (a, b, g) = (jump.to, jump.from, jump.rate);
        out.0[a][a] += rho.0[b][b] * g;
        let half = 0.5 * g;
        for k in 0..LEVELS {
            out.0[b][k] -= rho.0[b][k] * half;
            out.0[k][b] -= rho.0[k][b] * half;
        }
    }
    out
}
