//! Two-excitation manifold with configuration-diagonal interaction shifts.
//!
//! Two bosonic excitations over three levels span six symmetric
//! configurations, ordered `11, 12, 13, 22, 23, 33`. Single-particle
//! couplings are lifted with the usual `sqrt(n)` enhancement and every
//! configuration `ab` is shifted by `V[a][b]`.
//!
//! A shift common to all six configurations is a global phase and leaves
//! every observable unchanged; the fringe only moves when shifts differ
//! between configurations, e.g. [`InteractionParams::same_level`].

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{vector_norm, Matrix, Vector};
use crate::qcore::{build_hamiltonian, DriveSegment, Field, PulseSequence, Segment};
use crate::ramsey::{fringe_scan, FringePoint, FringeScan, RamseyScanConfig};

pub const PAIR_DIM: usize = 6;

/// Level pairs `(a, b)`, `a <= b`, of the six symmetric configurations.
pub const CONFIGS: [(usize, usize); PAIR_DIM] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn occupation(config: (usize, usize)) -> [u8; 3] {
    let mut n = [0u8; 3];
    n[config.0] += 1;
    n[config.1] += 1;
    n
}

fn config_index(n: &[u8; 3]) -> usize {
    CONFIGS.iter().position(|&c| occupation(c) == *n).expect("two-excitation occupation always names a configuration")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState(pub Vector<PAIR_DIM>);

impl PairState {
    /// Both excitations in `|R1>`.
    pub fn ground() -> Self {
        let mut amps = [C64::new(0.0, 0.0); PAIR_DIM];
        amps[0] = C64::new(1.0, 0.0);
        PairState(amps)
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.0)
    }

    /// Expected number of excitations in `level`.
    pub fn occupation(&self, level: usize) -> f64 {
        CONFIGS.iter().zip(self.0.iter()).map(|(&cfg, amp)| occupation(cfg)[level] as f64 * amp.norm_sqr()).sum()
    }
}

/// Interaction shifts, rad/s, and the per-shot double-excitation probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionParams {
    /// Symmetric; `shifts[a][b]` applies to configuration `ab`.
    pub shifts: [[f64; 3]; 3],
    pub p2: f64,
}

impl Default for InteractionParams {
    fn default() -> Self {
        InteractionParams { shifts: [[0.0; 3]; 3], p2: 0.0 }
    }
}

impl InteractionParams {
    /// The same shift `v` on all six configurations.
    pub fn uniform(v: f64, p2: f64) -> Result<Self> {
        Self::from_matrix([[v; 3]; 3], p2)
    }

    /// Shift `v` on configurations with both excitations in the same level
    /// (`11, 22, 33`) and none on mixed ones.
    pub fn same_level(v: f64, p2: f64) -> Result<Self> {
        let mut m = [[0.0; 3]; 3];
        for (a, row) in m.iter_mut().enumerate() {
            row[a] = v;
        }
        Self::from_matrix(m, p2)
    }

    pub fn from_matrix(shifts: [[f64; 3]; 3], p2: f64) -> Result<Self> {
        let p = InteractionParams { shifts, p2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            for b in 0..3 {
                let v = self.shifts[a][b];
                if !v.is_finite() {
                    return Err(Error::InvalidParameter { name: "interaction shift", value: v });
                }
                if v != self.shifts[b][a] {
                    return Err(Error::InvalidParameter {
                        name: "interaction matrix asymmetry",
                        value: v - self.shifts[b][a],
                    });
                }
            }
        }
        if !(self.p2.is_finite() && (0.0..1.0).contains(&self.p2)) {
            return Err(Error::InvalidParameter { name: "p2", value: self.p2 });
        }
        Ok(())
    }

    fn diagonal(&self) -> Matrix<PAIR_DIM> {
        let diag: [C64; PAIR_DIM] = core::array::from_fn(|k| {
            let (a, b) = CONFIGS[k];
            C64::new(self.shifts[a][b], 0.0)
        });
        Matrix::from_diagonal(&diag)
    }
}

/// Second-quantized lift `sum_ij h_ij a_i^dagger a_j` onto the two-excitation space.
pub fn lift_single_particle(h: &Matrix<3>) -> Matrix<PAIR_DIM> {
    let mut out = Matrix::<PAIR_DIM>::zeros();
    for (col, &cfg) in CONFIGS.iter().enumerate() {
        let n = occupation(cfg);
        for j in 0..3 {
            if n[j] == 0 {
                continue;
            }
            let mut m = n;
            m[j] -= 1;
            let annihilate = (n[j] as f64).sqrt();
            for i in 0..3 {
                let hij = h.0[i][j];
                if hij == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut target = m;
                target[i] += 1;
                let create = (target[i] as f64).sqrt();
                out.0[config_index(&target)][col] += hij * (annihilate * create);
            }
        }
    }
    out
}

pub fn build_pair_hamiltonian(
    mu1: Option<&DriveSegment>,
    mu2: Option<&DriveSegment>,
    interactions: &InteractionParams,
) -> Result<Matrix<PAIR_DIM>> {
    interactions.validate()?;
    let h = build_hamiltonian(mu1, mu2)?;
    Ok(lift_single_particle(&h.0) + interactions.diagonal())
}

/// Pair Hamiltonian of one segment; waits keep the interaction shifts.
pub fn pair_segment_hamiltonian(seg: &Segment, interactions: &InteractionParams) -> Result<Matrix<PAIR_DIM>> {
    match seg {
        Segment::Drive(d) => match d.field {
            Field::Mu1 => build_pair_hamiltonian(Some(d), None, interactions),
            Field::Mu2 => build_pair_hamiltonian(None, Some(d), interactions),
        },
        Segment::Wait(_) => {
            seg.validate()?;
            build_pair_hamiltonian(None, None, interactions)
        }
        Segment::Readout(_) => Err(Error::ReadoutInSequence { index: 0 }),
    }
}

pub fn propagate_pair(state: &PairState, seq: &PulseSequence, interactions: &InteractionParams) -> Result<PairState> {
    let mut amps = state.0;
    for (index, seg) in seq.segments.iter().enumerate() {
        if matches!(seg, Segment::Readout(_)) {
            return Err(Error::ReadoutInSequence { index });
        }
        let h = pair_segment_hamiltonian(seg, interactions)?;
        amps = h.propagator(seg.duration()).apply(&amps);
    }
    Ok(PairState(amps))
}

/// `I(delta) = (1 - p2) I_single + p2 I_double`, where `I_double` is `I0`
/// times the expected `|R1>` occupation of a pair prepared in `|R1 R1>`.
///
/// The single-excitation part uses the configured backend; the pair part
/// is always propagated unitarily.
pub fn mixture_fringe_scan(config: &RamseyScanConfig, interactions: &InteractionParams) -> Result<FringeScan> {
    interactions.validate()?;
    let single = fringe_scan(config)?;
    let p2 = interactions.p2;
    if p2 == 0.0 {
        return Ok(single);
    }
    let points = single
        .points
        .iter()
        .map(|pt| {
            let seq = config.sequence(pt.delta)?;
            let out = propagate_pair(&PairState::ground(), &seq, interactions)?;
            let double = config.i0 * out.occupation(0);
            Ok(FringePoint { delta: pt.delta, intensity: (1.0 - p2) * pt.intensity + p2 * double })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e: Error| match e {
            Error::Backend { .. } => e,
            other => Error::Backend { delta: f64::NAN, source: alloc::boxed::Box::new(other) },
        })?;
    Ok(FringeScan { points, i0: single.i0, provenance: single.provenance })
}

/// Rough double-excitation probability from a measured `g2(0)` at low mean
/// photon number: `p2 ~ g2 <n> / 2`.
pub fn p2_from_g2(g2: f64, mean_photon_number: f64) -> Result<f64> {
    if !(g2.is_finite() && g2 >= 0.0) {
        return Err(Error::InvalidParameter { name: "g2", value: g2 });
    }
    if !(mean_photon_number.is_finite() && mean_photon_number >= 0.0) {
        return Err(Error::InvalidParameter { name: "mean photon number", value: mean_photon_number });
    }
    let p2 = 0.5 * g2 * mean_photon_number;
    if p2 >= 1.0 {
        return Err(Error::InvalidParameter { name: "p2", value: p2 });
    }
    Ok(p2)
}
