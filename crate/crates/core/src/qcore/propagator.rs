use num_complex::Complex64 as C64;

use super::sequence::{DriveSegment, PulseSequence, Segment};
use super::state::QutritState;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub type Propagator2 = Matrix<2>;
pub type Propagator3 = Matrix<3>;

/// `sin(x) / x`, exact at zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Closed-form `exp(-i H t)` for `H = [[0, (W/2) e^{i phi}], [(W/2) e^{-i phi}, -D]]`.
///
/// Writing `H = -(D/2) I + K` with `K^2 = (G/2)^2 I` and `G = sqrt(W^2 + D^2)`:
/// `U = e^{i D t / 2} (cos(G t / 2) I - i t sinc(G t / 2) K)`.
pub fn two_level_propagator(rabi: f64, detuning: f64, phase: f64, t: f64) -> Result<Propagator2> {
    for (name, value) in [("rabi", rabi), ("detuning", detuning), ("phase", phase)] {
        if !value.is_finite() {
            return Err(Error::InvalidParameter { name, value });
        }
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter { name: "duration", value: t });
    }
    let generalized = rabi.hypot(detuning);
    let half_angle = 0.5 * generalized * t;
    let c = half_angle.cos();
    let st = t * sinc(half_angle);
    let global = C64::from_polar(1.0, 0.5 * detuning * t);
    let minus_i = C64::new(0.0, -1.0);

    let k00 = C64::new(0.5 * detuning, 0.0);
    let k01 = C64::from_polar(0.5 * rabi, phase);
    let k10 = k01.conj();
    let k11 = -k00;

    Ok(Matrix([
        [global * (c + minus_i * st * k00), global * (minus_i * st * k01)],
        [global * (minus_i * st * k10), global * (c + minus_i * st * k11)],
    ]))
}

fn drive_unitary(d: &DriveSegment) -> Result<Propagator3> {
    d.validate()?;
    // The 3x3 Hamiltonian puts e^{+i phi} below the diagonal; the two-level
    // form above puts it above, hence the sign flip on the phase.
    let block = two_level_propagator(d.rabi, d.detuning, -d.phase, d.duration)?;
    let lo = d.field.lower_level();
    let mut u = Matrix::<3>::identity();
    for i in 0..2 {
        for j in 0..2 {
            u.0[lo + i][lo + j] = block.0[i][j];
        }
    }
    Ok(u)
}

/// Unitary of one segment. `Wait` is the identity in this frame; `Readout`
/// cannot be represented as a unitary and is rejected.
pub fn segment_unitary(seg: &Segment) -> Result<Propagator3> {
    match seg {
        Segment::Drive(d) => drive_unitary(d),
        Segment::Wait(_) => {
            seg.validate()?;
            Ok(Matrix::identity())
        }
        Segment::Readout(_) => Err(Error::ReadoutInSequence { index: 0 }),
    }
}

/// Applies every segment's unitary in order.
pub fn propagate_sequence(state: &QutritState, seq: &PulseSequence) -> Result<QutritState> {
    let mut amps = state.0;
    for (index, seg) in seq.segments.iter().enumerate() {
        let u = match seg {
            Segment::Readout(_) => return Err(Error::ReadoutInSequence { index }),
            _ => segment_unitary(seg)?,
        };
        amps = u.apply(&amps);
    }
    Ok(QutritState(amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{build_hamiltonian, Field};
    use alloc::vec;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn resonant_pi_pulse() {
        let u = two_level_propagator(1e8, 0.0, 0.0, PI / 1e8).unwrap();
        let expected = Matrix([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, -1.0), c(0.0, 0.0)]]);
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn full_rabi_cycle_is_minus_identity() {
        let u = two_level_propagator(1e8, 0.0, 0.3, 2.0 * PI / 1e8).unwrap();
        assert!(u.max_abs_diff(&Matrix::<2>::identity().scale_real(-1.0)) < 1e-15);
    }

    #[test]
    fn zero_rabi_zero_detuning_is_identity() {
        let u = two_level_propagator(0.0, 0.0, 0.0, 1e-6).unwrap();
        assert!(u.max_abs_diff(&Matrix::identity()) < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_duration() {
        assert!(two_level_propagator(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(two_level_propagator(1.0, f64::INFINITY, 0.0, 1.0).is_err());
    }

    #[test]
    fn drive_unitary_matches_hamiltonian_exponential() {
        let d = DriveSegment::new(Field::Mu2, 7.1e7, -2.3e7, 0.8, 53e-9).unwrap();
        let h = build_hamiltonian(None, Some(&d)).unwrap();
        let closed = drive_unitary(&d).unwrap();
        assert!(closed.max_abs_diff(&h.propagator(d.duration)) < 1e-12);
    }

    #[test]
    fn half_pi_pulse_from_r1() {
        let p = DriveSegment::with_area(Field::Mu1, PI / 2.0, 20e-9).unwrap();
        let seq = PulseSequence::new("half", vec![p.into()]).unwrap();
        let out = propagate_sequence(&QutritState::ground(), &seq).unwrap();
        assert!((out[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(out[2].norm() < 1e-15);
    }

    #[test]
    fn half_pi_then_mu2_pi_moves_r2_to_r3() {
        let p = DriveSegment::with_area(Field::Mu1, PI / 2.0, 20e-9).unwrap();
        let q = DriveSegment::with_area(Field::Mu2, PI, 40e-9).unwrap();
        let seq = PulseSequence::new("x", vec![p.into(), q.into()]).unwrap();
        let out = propagate_sequence(&QutritState::ground(), &seq).unwrap();
        // c3 = (-i)(-i/sqrt2) = -1/sqrt2
        assert!((out[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15);
        assert!((out[2] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let pops = out.populations();
        assert!((pops[0] - 0.5).abs() < 1e-15 && (pops[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn resonant_ramsey_empties_r1() {
        let p = DriveSegment::with_area(Field::Mu1, PI / 2.0, 100e-9).unwrap();
        let seq = PulseSequence::new("ramsey", vec![p.into(), Segment::Wait(250e-9), p.into()]).unwrap();
        let out = propagate_sequence(&QutritState::ground(), &seq).unwrap();
        assert!(out.populations()[0] < 1e-30);
    }

    #[test]
    fn readout_segments_are_rejected() {
        let seq = PulseSequence::new("r", vec![Segment::Wait(1e-9), Segment::Readout(1)]).unwrap();
        assert_eq!(propagate_sequence(&QutritState::ground(), &seq), Err(Error::ReadoutInSequence { index: 1 }));
    }
}
