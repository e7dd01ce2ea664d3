use alloc::vec;

use num_complex::Complex64 as C64;

use crate::dissipative::{DensityMatrix, LOSS};
use crate::error::{Error, Result};
use crate::qcore::{segment_unitary, DriveSegment, Field, PulseSequence, Segment};

/// Retrieved photon probability per time bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBinPopulations {
    /// `P1, P2, P3`, already scaled by `eta`.
    pub p: [f64; 3],
    /// Retrieval efficiency per bin.
    pub eta: [f64; 3],
}

impl TimeBinPopulations {
    pub fn new(p: [f64; 3], eta: [f64; 3]) -> Result<Self> {
        let pops = TimeBinPopulations { p, eta };
        pops.validate()?;
        Ok(pops)
    }

    /// Ideal detection of the given bin probabilities.
    pub fn ideal(p: [f64; 3]) -> Result<Self> {
        Self::new(p, [1.0; 3])
    }

    pub fn validate(&self) -> Result<()> {
        validate_eta(&self.eta)?;
        for &p in &self.p {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidParameter { name: "bin probability", value: p });
            }
        }
        let sum = self.total();
        if sum > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter { name: "total bin probability", value: sum });
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Probability of a photon in `bin` (1-based).
    pub fn bin(&self, bin: u8) -> Result<f64> {
        match bin {
            1..=3 => Ok(self.p[bin as usize - 1]),
            other => Err(Error::ReadoutBin(other)),
        }
    }
}

fn validate_eta(eta: &[f64; 3]) -> Result<()> {
    for &e in eta {
        if !(e.is_finite() && (0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidParameter { name: "eta", value: e });
        }
    }
    Ok(())
}

/// Pulse settings of the read-out tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutTiming {
    /// Rabi frequency of the `mu1` pi pulse, rad/s.
    pub mu1_rabi: f64,
    /// Rabi frequency of the `mu2` pi pulse, rad/s.
    pub mu2_rabi: f64,
}

impl Default for ReadoutTiming {
    /// Both pi pulses at `2 pi x 12.5 MHz`, i.e. 40 ns long.
    fn default() -> Self {
        let w = 2.0 * core::f64::consts::PI * 12.5e6;
        ReadoutTiming { mu1_rabi: w, mu2_rabi: w }
    }
}

impl ReadoutTiming {
    /// `readout 1; pi(mu1); readout 2; pi(mu2); pi(mu1); readout 3`.
    pub fn sequence(&self) -> Result<PulseSequence> {
        let pi = core::f64::consts::PI;
        let pi1 = DriveSegment::with_area(Field::Mu1, pi, pi / self.mu1_rabi)?;
        let pi2 = DriveSegment::with_area(Field::Mu2, pi, pi / self.mu2_rabi)?;
        PulseSequence::new(
            "readout",
            vec![Segment::Readout(1), pi1.into(), Segment::Readout(2), pi2.into(), pi1.into(), Segment::Readout(3)],
        )
    }
}

/// Sequential time-bin read-out with the default pulse settings.
///
/// `dephasing` (s^-1) removes retrievable Rydberg weight as
/// `exp(-rate * t)` over the time spent between bins.
pub fn readout_populations(
    input: impl Into<DensityMatrix>,
    eta: [f64; 3],
    dephasing: Option<f64>,
) -> Result<TimeBinPopulations> {
    readout_with_sequence(input, &ReadoutTiming::default().sequence()?, eta, dephasing)
}

/// Runs a read-out tail: drives and waits act on the state, each
/// `Readout(k)` retrieves `eta[k-1]` of the `|R1>` population into bin `k`
/// and empties `|R1>`.
pub fn readout_with_sequence(
    input: impl Into<DensityMatrix>,
    tail: &PulseSequence,
    eta: [f64; 3],
    dephasing: Option<f64>,
) -> Result<TimeBinPopulations> {
    validate_eta(&eta)?;
    let rate = dephasing.unwrap_or(0.0);
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::InvalidParameter { name: "dephasing rate", value: rate });
    }
    tail.validate()?;
    let mut rho = input.into();
    let trace = rho.trace();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter { name: "input trace", value: trace });
    }
    let mut p = [0.0; 3];
    for seg in &tail.segments {
        match seg {
            Segment::Readout(bin) => {
                let k = *bin as usize - 1;
                p[k] = eta[k] * rho.population(0);
                rho = empty_level(&rho, 0);
            }
            _ => {
                let u = segment_unitary(seg)?;
                rho = rho.conjugate_qutrit(&u);
                if rate > 0.0 {
                    rho = shrink_rydberg(&rho, (-rate * seg.duration()).exp());
                }
            }
        }
    }
    TimeBinPopulations::new(p.map(|x| x.clamp(0.0, 1.0)), eta)
}

/// Moves all weight of `level` to the loss level.
fn empty_level(rho: &DensityMatrix, level: usize) -> DensityMatrix {
    let mut m = rho.0;
    let pop = m.0[level][level].re;
    for k in 0..LOSS + 1 {
        m.0[level][k] = C64::new(0.0, 0.0);
        m.0[k][level] = C64::new(0.0, 0.0);
    }
    m.0[LOSS][LOSS] += pop;
    DensityMatrix(m)
}

/// Scales the Rydberg block by `keep`, sending the rest to loss.
fn shrink_rydberg(rho: &DensityMatrix, keep: f64) -> DensityMatrix {
    let mut m = rho.0;
    let mut removed = 0.0;
    for i in 0..3 {
        removed += (1.0 - keep) * m.0[i][i].re;
        for j in 0..3 {
            m.0[i][j] *= keep;
        }
        m.0[i][LOSS] *= keep.sqrt();
        m.0[LOSS][i] *= keep.sqrt();
    }
    m.0[LOSS][LOSS] += removed;
    DensityMatrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{propagate_sequence, QutritState};
    use core::f64::consts::PI;

    fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn equal_superposition_of_r1_r2() {
        let s = QutritState::normalized(C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let pops = readout_populations(s, [1.0; 3], None).unwrap();
        assert!(close3(pops.p, [0.5, 0.5, 0.0], 1e-12), "{:?}", pops.p);
    }

    #[test]
    fn r3_lands_in_third_bin() {
        let pops = readout_populations(QutritState::basis(3), [1.0; 3], None).unwrap();
        assert!(close3(pops.p, [0.0, 0.0, 1.0], 1e-12), "{:?}", pops.p);
    }

    #[test]
    fn half_pi_then_mu2_pi() {
        let t = 40e-9;
        let seq = PulseSequence::new(
            "prep",
            vec![
                DriveSegment::with_area(Field::Mu1, PI / 2.0, 20e-9).unwrap().into(),
                DriveSegment::with_area(Field::Mu2, PI, t).unwrap().into(),
            ],
        )
        .unwrap();
        let state = propagate_sequence(&QutritState::ground(), &seq).unwrap();
        let pops = readout_populations(state, [1.0; 3], None).unwrap();
        assert!(close3(pops.p, [0.5, 0.0, 0.5], 1e-12), "{:?}", pops.p);
    }

    #[test]
    fn efficiency_scales_each_bin() {
        let s = QutritState::normalized(C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)).unwrap();
        let eta = [0.5, 0.25, 0.8];
        let pops = readout_populations(s, eta, None).unwrap();
        let third = 1.0 / 3.0;
        assert!(close3(pops.p, [0.5 * third, 0.25 * third, 0.8 * third], 1e-12));
        assert!(readout_populations(s, [1.1, 1.0, 1.0], None).is_err());
        assert!(readout_populations(s, [1.0, f64::NAN, 1.0], None).is_err());
    }

    #[test]
    fn dephasing_only_hurts_later_bins() {
        let s = QutritState::normalized(C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let mut last = [0.5, 0.5, 0.0];
        for rate in [1e5, 1e6, 3e6] {
            let pops = readout_populations(s, [1.0; 3], Some(rate)).unwrap();
            assert!((pops.p[0] - 0.5).abs() < 1e-15);
            assert!(pops.p[1] < last[1]);
            assert!((pops.p[1] - 0.5 * (-rate * 40e-9).exp()).abs() < 1e-12);
            last = pops.p;
        }
    }

    #[test]
    fn density_input_matches_pure_input() {
        let s = QutritState::normalized(C64::new(0.3, 0.1), C64::new(-0.5, 0.2), C64::new(0.1, 0.7)).unwrap();
        let rho = DensityMatrix::from_state(&s);
        let a = readout_populations(s, [1.0; 3], None).unwrap();
        let b = readout_populations(rho, [1.0; 3], None).unwrap();
        assert!(close3(a.p, b.p, 1e-14));
        assert!((a.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bin_accessor() {
        let pops = TimeBinPopulations::ideal([0.2, 0.3, 0.4]).unwrap();
        assert_eq!(pops.bin(2).unwrap(), 0.3);
        assert!(pops.bin(0).is_err());
        assert!(TimeBinPopulations::ideal([0.6, 0.6, 0.0]).is_err());
    }
}
