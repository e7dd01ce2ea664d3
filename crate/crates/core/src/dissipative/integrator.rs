use alloc::vec::Vec;

use super::density::{DensityMatrix, LEVELS, TRACE_TOL};
use super::lindblad::{rhs_with_jumps, segment_hamiltonian, DissipationParams, Jump};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qcore::{PulseSequence, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with a fixed step per segment.
    #[default]
    Rk4,
    /// Dormand-Prince 5(4) with local error control.
    Rk45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed RK4 step and largest adaptive step, s. `None` picks the step
    /// per segment, see [`IntegratorConfig::segment_dt`].
    pub dt_max: Option<f64>,
    /// Local error tolerance of the adaptive method (max-abs entry norm).
    pub tolerance: f64,
    /// Spacing of emitted trajectory samples, s. Segment boundaries are
    /// always emitted.
    pub sample_interval: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Method::Rk4, dt_max: None, tolerance: 1e-10, sample_interval: None }
    }
}

impl IntegratorConfig {
    /// Minimum number of automatic steps per segment.
    pub const STEPS_PER_SEGMENT: f64 = 200.0;
    /// Automatic steps advance the generator by at most this much.
    pub const PHASE_PER_STEP: f64 = 0.01;

    pub fn rk45(tolerance: f64) -> Self {
        IntegratorConfig { method: Method::Rk45, tolerance, ..Default::default() }
    }

    pub fn with_dt_max(mut self, dt: f64) -> Self {
        self.dt_max = Some(dt);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt_max {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidParameter { name: "dt_max", value: dt });
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidParameter { name: "tolerance", value: self.tolerance });
        }
        if let Some(s) = self.sample_interval {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter { name: "sample_interval", value: s });
            }
        }
        Ok(())
    }

    /// Step used on one segment: `dt_max` if set, otherwise the smaller of
    /// `duration / STEPS_PER_SEGMENT` and `PHASE_PER_STEP / (2 |H| + sum of rates)`.
    pub fn segment_dt(&self, h: &Matrix<LEVELS>, duration: f64, params: &DissipationParams) -> f64 {
        if let Some(dt) = self.dt_max {
            return dt;
        }
        let h_norm = h.0.iter().map(|row| row.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        let rates: f64 = params.gamma_decay.iter().chain(&params.gamma_deph).sum();
        let scale = 2.0 * h_norm + rates;
        let by_duration = duration / Self::STEPS_PER_SEGMENT;
        if scale > 0.0 {
            by_duration.min(Self::PHASE_PER_STEP / scale)
        } else {
            by_duration
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// s
    pub time: f64,
    pub rho: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        &self.samples.last().expect("trajectory always holds the initial state").rho
    }

    pub fn final_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.time)
    }
}

type M = Matrix<LEVELS>;

fn axpy(y: &M, k: &M, h: f64) -> M {
    let mut out = *y;
    for (o, d) in out.0.iter_mut().flatten().zip(k.0.iter().flatten()) {
        *o += *d * h;
    }
    out
}

fn rk4_step(rho: &M, h_op: &M, jumps: &[Jump], dt: f64) -> M {
    let f = |r: &M| rhs_with_jumps(r, h_op, jumps);
    let k1 = f(rho);
    let k2 = f(&axpy(rho, &k1, 0.5 * dt));
    let k3 = f(&axpy(rho, &k2, 0.5 * dt));
    let k4 = f(&axpy(rho, &k3, dt));
    let mut out = *rho;
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            out.0[i][j] += (k1.0[i][j] + (k2.0[i][j] + k3.0[i][j]) * 2.0 + k4.0[i][j]) * (dt / 6.0);
        }
    }
    out
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(rho: &M, terms: &[(&M, f64)], h: f64) -> M {
    let mut out = *rho;
    for (k, w) in terms {
        if *w == 0.0 {
            continue;
        }
        for (o, d) in out.0.iter_mut().flatten().zip(k.0.iter().flatten()) {
            *o += *d * (w * h);
        }
    }
    out
}

/// One Dormand-Prince step; returns the fifth-order solution and the
/// max-abs local error estimate.
fn dopri_step(rho: &M, h_op: &M, jumps: &[Jump], h: f64) -> (M, f64) {
    let f = |r: &M| rhs_with_jumps(r, h_op, jumps);
    let k1 = f(rho);
    let k2 = f(&combine(rho, &[(&k1, A21)], h));
    let k3 = f(&combine(rho, &[(&k1, A31), (&k2, A32)], h));
    let k4 = f(&combine(rho, &[(&k1, A41), (&k2, A42), (&k3, A43)], h));
    let k5 = f(&combine(rho, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)], h));
    let k6 = f(&combine(rho, &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)], h));
    let y = combine(rho, &[(&k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)], h);
    let k7 = f(&y);
    let err = combine(&Matrix::zeros(), &[(&k1, E1), (&k3, E3), (&k4, E4), (&k5, E5), (&k6, E6), (&k7, E7)], h);
    (y, err.max_abs())
}

/// Enforces exact hermiticity; integration round-off breaks it at the 1e-17 level.
fn hermitize(rho: &mut M) {
    for i in 0..LEVELS {
        rho.0[i][i].im = 0.0;
        for j in i + 1..LEVELS {
            let avg = (rho.0[i][j] + rho.0[j][i].conj()) * 0.5;
            rho.0[i][j] = avg;
            rho.0[j][i] = avg.conj();
        }
    }
}

struct Recorder {
    samples: Vec<Sample>,
    interval: Option<f64>,
    next: f64,
}

impl Recorder {
    fn emit(&mut self, time: f64, rho: &M) -> Result<()> {
        let rho = DensityMatrix(*rho);
        rho.check(time)?;
        self.samples.push(Sample { time, rho });
        if let Some(dt) = self.interval {
            while self.next <= time * (1.0 + 1e-12) {
                self.next += dt;
            }
        }
        Ok(())
    }

    fn after_step(&mut self, time: f64, rho: &M) -> Result<()> {
        let trace = rho.trace().re;
        if !((trace - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::TraceDrift { time, trace });
        }
        if self.interval.is_some() && time >= self.next * (1.0 - 1e-12) {
            self.emit(time, rho)?;
        }
        Ok(())
    }
}

/// Integrates the master equation segment by segment.
///
/// The trajectory starts with `rho0` at `t = 0` and holds a sample at every
/// segment boundary plus any requested intermediate samples; every emitted
/// sample is checked for hermiticity, unit trace and positivity.
pub fn evolve_master(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    params: &DissipationParams,
    integrator: &IntegratorConfig,
) -> Result<Trajectory> {
    params.validate()?;
    integrator.validate()?;
    seq.validate()?;
    if let Some(index) = seq.segments.iter().position(|s| matches!(s, Segment::Readout(_))) {
        return Err(Error::ReadoutInSequence { index });
    }
    let jumps = params.jumps();

    let mut rec = Recorder { samples: Vec::new(), interval: integrator.sample_interval, next: 0.0 };
    let mut rho = rho0.0;
    let mut t0 = 0.0;
    rec.emit(t0, &rho)?;

    for seg in &seq.segments {
        let h_op = segment_hamiltonian(seg)?;
        let duration = seg.duration();
        let dt = integrator.segment_dt(&h_op, duration, params);
        match integrator.method {
            Method::Rk4 => {
                let n = (duration / dt).ceil().max(1.0) as usize;
                let h = duration / n as f64;
                for step in 1..=n {
                    rho = rk4_step(&rho, &h_op, &jumps, h);
                    hermitize(&mut rho);
                    if step < n {
                        rec.after_step(t0 + step as f64 * h, &rho)?;
                    }
                }
            }
            Method::Rk45 => {
                let tol = integrator.tolerance;
                let mut elapsed = 0.0;
                let h_cap = integrator.dt_max.unwrap_or(duration).min(duration);
                let mut h = dt.min(duration);
                while elapsed < duration {
                    let remaining = duration - elapsed;
                    let last = h >= remaining - 1e-9 * duration;
                    let step = if last { remaining } else { h };
                    if step < duration * 1e-12 {
                        return Err(Error::StepUnderflow { time: t0 + elapsed, step });
                    }
                    let (next, err) = dopri_step(&rho, &h_op, &jumps, step);
                    if err <= tol {
                        rho = next;
                        hermitize(&mut rho);
                        elapsed = if last { duration } else { elapsed + step };
                        if elapsed < duration {
                            rec.after_step(t0 + elapsed, &rho)?;
                        }
                    }
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
                    h = (step * factor).min(h_cap);
                }
            }
        }
        t0 += duration;
        rec.emit(t0, &rho)?;
    }
    Ok(Trajectory { samples: rec.samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_distance;
    use crate::qcore::{propagate_sequence, DriveSegment, Field, QutritState};
    use alloc::vec;
    use core::f64::consts::PI;

    fn pi_pulse() -> PulseSequence {
        let p = DriveSegment::with_area(Field::Mu1, PI, 40e-9).unwrap();
        PulseSequence::new("pi", vec![p.into()]).unwrap()
    }

    #[test]
    fn unitary_limit_pi_pulse() {
        let rho0 = DensityMatrix::basis(1);
        for cfg in [IntegratorConfig::default(), IntegratorConfig::rk45(1e-12)] {
            let traj = evolve_master(&rho0, &pi_pulse(), &DissipationParams::none(), &cfg).unwrap();
            let exact = DensityMatrix::from_state(&propagate_sequence(&QutritState::ground(), &pi_pulse()).unwrap());
            let d = trace_distance(&traj.final_state().0, &exact.0);
            assert!(d < 1e-8, "{cfg:?}: {d}");
            assert!((traj.final_state().population(1) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_decay_is_exponential() {
        let gamma = 1e6;
        let params = DissipationParams { gamma_decay: [0.0, gamma, 0.0], ..Default::default() };
        let seq = PulseSequence::new("wait", vec![Segment::Wait(2e-6)]).unwrap();
        let cfg = IntegratorConfig { sample_interval: Some(0.5e-6), ..Default::default() };
        let traj = evolve_master(&DensityMatrix::basis(2), &seq, &params, &cfg).unwrap();
        assert_eq!(traj.samples.len(), 5);
        for s in &traj.samples {
            let expected = (-gamma * s.time).exp();
            assert!((s.rho.population(1) - expected).abs() < 1e-10, "t = {}", s.time);
            assert!((s.rho.loss() - (1.0 - expected)).abs() < 1e-10);
        }
    }

    #[test]
    fn dephasing_damps_coherence_only() {
        let gamma = 2e6;
        let params = DissipationParams { gamma_deph: [0.0, gamma, 0.0], ..Default::default() };
        let s = QutritState::normalized(1.0.into(), 1.0.into(), 0.0.into()).unwrap();
        let seq = PulseSequence::new("wait", vec![Segment::Wait(1e-6)]).unwrap();
        let traj =
            evolve_master(&DensityMatrix::from_state(&s), &seq, &params, &IntegratorConfig::rk45(1e-12)).unwrap();
        let rho = traj.final_state();
        assert!((rho.population(0) - 0.5).abs() < 1e-12);
        assert!((rho.coherences()[0].re - 0.5 * (-0.5 * gamma * 1e-6).exp()).abs() < 1e-10);
    }

    #[test]
    fn readout_is_rejected() {
        let seq = PulseSequence::new("r", vec![Segment::Wait(1e-9), Segment::Readout(1)]).unwrap();
        let err =
            evolve_master(&DensityMatrix::basis(1), &seq, &DissipationParams::none(), &IntegratorConfig::default());
        assert_eq!(err, Err(Error::ReadoutInSequence { index: 1 }));
    }

    #[test]
    fn invalid_integrator_settings() {
        let bad = IntegratorConfig { tolerance: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(IntegratorConfig::default().with_dt_max(-1.0).validate().is_err());
    }

    #[test]
    fn unstable_step_is_caught() {
        // A step far beyond the RK4 stability limit blows up the state.
        let params = DissipationParams { gamma_decay: [1e9, 0.0, 0.0], ..Default::default() };
        let seq = PulseSequence::new("wait", vec![Segment::Wait(1e-6)]).unwrap();
        let cfg = IntegratorConfig::default().with_dt_max(1e-6);
        let err = evolve_master(&DensityMatrix::basis(1), &seq, &params, &cfg).unwrap_err();
        assert!(matches!(err, Error::PositivityViolation { .. }), "{err:?}");
    }
}
