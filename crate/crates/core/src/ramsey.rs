//! Closed-form Ramsey photon count and visibility, and fringe scans.
//!
//! The Ramsey sequence is a `mu1` pi/2 pulse of duration `t_mu1`, a `mu2`
//! pulse of duration `t_mu2`, and a second `mu1` pi/2 pulse. Reading out
//! `|R1>` gives
//!
//! ```text
//! I = I0 (|A|^2 + |B|^2 cos^2(W2 t2 / 2) + C cos(W2 t2 / 2))
//! ```
//!
//! with `A`, `B`, `C` from [`ramsey_terms`]. The fringe axis is the `mu1`
//! detuning; positive values are blue detuning of the drive.
//!
//! The unitary and master-equation backends evolve the same pulses in the
//! frame of [`crate::qcore`], where free evolution is the identity. The
//! precession of `|R2>, |R3>` against `|R1>` during the `mu2` interval is
//! carried instead by the drive phase of the second pi/2 pulse,
//! `phi = -delta (t_total - t_mu1)`, which is the same physics seen from the
//! frame of a phase-stable microwave source.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::dissipative::{evolve_master, DensityMatrix, DissipationParams, IntegratorConfig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qcore::{propagate_sequence, DriveSegment, Field, PulseSequence, QutritState, Segment};

/// Interference terms of the Ramsey photon count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyTerms {
    pub a: C64,
    pub b: C64,
    /// `A B* + A* B`.
    pub c: f64,
    /// Generalized pulse area `sqrt(delta^2 t_mu1^2 + pi^2 / 4)`.
    pub phi: f64,
    /// s
    pub t_total: f64,
}

fn check_times(t_mu1: f64, t_mu2: f64) -> Result<()> {
    if !(t_mu1.is_finite() && t_mu1 > 0.0) {
        return Err(Error::InvalidParameter { name: "t_mu1", value: t_mu1 });
    }
    if !(t_mu2.is_finite() && t_mu2 >= 0.0) {
        return Err(Error::InvalidParameter { name: "t_mu2", value: t_mu2 });
    }
    Ok(())
}

/// Interference terms for `mu1` detuning `delta1` with `t_total = t_mu1 + t_mu2`.
pub fn ramsey_terms(delta1: f64, t_mu1: f64, t_mu2: f64) -> Result<RamseyTerms> {
    check_times(t_mu1, t_mu2)?;
    terms_with_total(delta1, t_mu1, t_mu1 + t_mu2)
}

/// As [`ramsey_terms`], with an explicit total precession time.
pub fn terms_with_total(delta1: f64, t_mu1: f64, t_total: f64) -> Result<RamseyTerms> {
    if !delta1.is_finite() {
        return Err(Error::InvalidParameter { name: "delta1", value: delta1 });
    }
    if !(t_total.is_finite() && t_total >= t_mu1) {
        return Err(Error::InvalidParameter { name: "t_total", value: t_total });
    }
    let x = delta1 * t_mu1;
    let phi = (x * x + PI * PI / 4.0).sqrt();
    let (s, c) = (0.5 * phi).sin_cos();
    let inner = C64::new(c, -x * s / phi);
    let a = C64::from_polar(1.0, x) * inner * inner;
    let b = -C64::from_polar(1.0, delta1 * t_total) * (PI * PI * s * s / (4.0 * x * x + PI * PI));
    let cross = a * b.conj();
    Ok(RamseyTerms { a, b, c: 2.0 * cross.re, phi, t_total })
}

/// The three contributions to the normalized photon count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyComponents {
    /// `|A|^2`
    pub direct: f64,
    /// `|B|^2 cos^2(W2 t2 / 2)`
    pub mu2_path: f64,
    /// `C cos(W2 t2 / 2)`
    pub interference: f64,
}

impl RamseyComponents {
    pub fn total(&self) -> f64 {
        self.direct + self.mu2_path + self.interference
    }
}

pub fn ramsey_components(terms: &RamseyTerms, omega_mu2: f64, t_mu2: f64) -> RamseyComponents {
    let k = (0.5 * omega_mu2 * t_mu2).cos();
    RamseyComponents { direct: terms.a.norm_sqr(), mu2_path: terms.b.norm_sqr() * k * k, interference: terms.c * k }
}

/// Photon count read out of `|R1>` after the Ramsey sequence.
pub fn ramsey_intensity(delta1: f64, t_mu1: f64, omega_mu2: f64, t_mu2: f64, i0: f64) -> Result<f64> {
    if !(i0.is_finite() && i0 > 0.0) {
        return Err(Error::InvalidParameter { name: "I0", value: i0 });
    }
    if !omega_mu2.is_finite() {
        return Err(Error::InvalidParameter { name: "omega_mu2", value: omega_mu2 });
    }
    let terms = ramsey_terms(delta1, t_mu1, t_mu2)?;
    Ok(i0 * ramsey_components(&terms, omega_mu2, t_mu2).total())
}

/// Fringe visibility `|2 cos(W2 t2 / 2) / (1 + cos^2(W2 t2 / 2))|`.
pub fn ramsey_visibility(omega_mu2: f64, t_mu2: f64) -> Result<f64> {
    if !(t_mu2.is_finite() && t_mu2 >= 0.0) {
        return Err(Error::InvalidParameter { name: "t_mu2", value: t_mu2 });
    }
    if !omega_mu2.is_finite() {
        return Err(Error::InvalidParameter { name: "omega_mu2", value: omega_mu2 });
    }
    Ok(visibility_from_area(omega_mu2 * t_mu2))
}

/// Visibility as a function of the `mu2` pulse area alone.
pub fn visibility_from_area(area: f64) -> f64 {
    // Exact zeros at odd multiples of pi, where cos(area/2) rounds to ~1e-16.
    let half_turns = area / PI;
    let nearest = half_turns.round();
    if (half_turns - nearest).abs() < 1e-12 * half_turns.abs().max(1.0) {
        let n = nearest as i64;
        return if n.rem_euclid(2) == 1 { 0.0 } else { 1.0 };
    }
    let k = (0.5 * area).cos();
    (2.0 * k / (1.0 + k * k)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Analytic,
    Unitary,
    Lindblad,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Analytic => "analytic",
            Backend::Unitary => "unitary",
            Backend::Lindblad => "lindblad",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyScanConfig {
    /// Duration of each `mu1` pi/2 pulse, s.
    pub t_mu1: f64,
    /// `mu1` detunings to scan, rad/s, strictly increasing.
    pub delta_list: Vec<f64>,
    /// rad/s
    pub omega_mu2: f64,
    /// s
    pub t_mu2: f64,
    /// `mu2` detuning, rad/s. The closed form assumes zero.
    pub detuning_mu2: f64,
    /// Extra free evolution between the `mu2` pulse and the second pi/2 pulse, s.
    pub dead_time: f64,
    pub backend: Backend,
    /// Photon-count normalization.
    pub i0: f64,
    /// Used by the master-equation backend only.
    pub dissipation: DissipationParams,
    /// Used by the master-equation backend only.
    pub integrator: IntegratorConfig,
}

impl RamseyScanConfig {
    pub fn new(t_mu1: f64, delta_list: Vec<f64>, omega_mu2: f64, t_mu2: f64) -> Self {
        RamseyScanConfig {
            t_mu1,
            delta_list,
            omega_mu2,
            t_mu2,
            detuning_mu2: 0.0,
            dead_time: 0.0,
            backend: Backend::Analytic,
            i0: 1.0,
            dissipation: DissipationParams::default(),
            integrator: IntegratorConfig::default(),
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn t_total(&self) -> f64 {
        self.t_mu1 + self.t_mu2 + self.dead_time
    }

    /// Rabi frequency of the calibrated `mu1` pi/2 pulses.
    pub fn omega_mu1(&self) -> f64 {
        PI / (2.0 * self.t_mu1)
    }

    pub fn validate(&self) -> Result<()> {
        check_times(self.t_mu1, self.t_mu2)?;
        if self.delta_list.is_empty() {
            return Err(Error::InvalidGrid("delta list is empty"));
        }
        if self.delta_list.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidGrid("delta list contains a non-finite value"));
        }
        if self.delta_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("delta list is not strictly increasing"));
        }
        if !(self.i0.is_finite() && self.i0 > 0.0) {
            return Err(Error::InvalidParameter { name: "I0", value: self.i0 });
        }
        if !(self.omega_mu2.is_finite() && self.omega_mu2 >= 0.0) {
            return Err(Error::InvalidParameter { name: "omega_mu2", value: self.omega_mu2 });
        }
        if !self.detuning_mu2.is_finite() {
            return Err(Error::InvalidParameter { name: "detuning_mu2", value: self.detuning_mu2 });
        }
        if !(self.dead_time.is_finite() && self.dead_time >= 0.0) {
            return Err(Error::InvalidParameter { name: "dead_time", value: self.dead_time });
        }
        if self.backend == Backend::Lindblad {
            self.dissipation.validate()?;
            self.integrator.validate()?;
        }
        Ok(())
    }

    /// The Ramsey pulse sequence at one `mu1` detuning.
    pub fn sequence(&self, delta1: f64) -> Result<PulseSequence> {
        let omega1 = self.omega_mu1();
        let first = DriveSegment::new(Field::Mu1, omega1, delta1, 0.0, self.t_mu1)?;
        let mut segments = Vec::with_capacity(4);
        segments.push(Segment::Drive(first));
        if self.t_mu2 > 0.0 {
            let mu2 = DriveSegment::new(Field::Mu2, self.omega_mu2, self.detuning_mu2, 0.0, self.t_mu2)?;
            segments.push(Segment::Drive(mu2));
        }
        if self.dead_time > 0.0 {
            segments.push(Segment::Wait(self.dead_time));
        }
        let precession = delta1 * (self.t_total() - self.t_mu1);
        let second = DriveSegment::new(Field::Mu1, omega1, delta1, -precession, self.t_mu1)?;
        segments.push(Segment::Drive(second));
        PulseSequence::new("ramsey", segments)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    /// rad/s
    pub delta: f64,
    /// counts
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub points: Vec<FringePoint>,
    pub i0: f64,
    pub provenance: Backend,
}

impl FringeScan {
    pub fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.delta)
    }

    pub fn intensities(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.intensity)
    }

    /// `(max - min) / (max + min)` over the sampled points.
    pub fn contrast(&self) -> f64 {
        let (lo, hi) =
            self.intensities().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi + lo == 0.0 {
            0.0
        } else {
            (hi - lo) / (hi + lo)
        }
    }
}

/// `|R1>` population after the Ramsey sequence, evaluated by `backend`.
fn point_population(config: &RamseyScanConfig, delta1: f64) -> Result<f64> {
    match config.backend {
        Backend::Analytic => {
            let terms = terms_with_total(delta1, config.t_mu1, config.t_total())?;
            Ok(ramsey_components(&terms, config.omega_mu2, config.t_mu2).total())
        }
        Backend::Unitary => {
            let seq = config.sequence(delta1)?;
            let out = propagate_sequence(&QutritState::ground(), &seq)?;
            Ok(out.populations()[0])
        }
        Backend::Lindblad => {
            let seq = config.sequence(delta1)?;
            let rho0 = DensityMatrix::from_state(&QutritState::ground());
            let traj = evolve_master(&rho0, &seq, &config.dissipation, &config.integrator)?;
            Ok(traj.final_state().population(0))
        }
    }
}

/// Evaluates the fringe at every detuning of the config, in input order.
pub fn fringe_scan(config: &RamseyScanConfig) -> Result<FringeScan> {
    config.validate()?;
    let points = config
        .delta_list
        .iter()
        .map(|&delta| {
            point_population(config, delta)
                .map(|p| FringePoint { delta, intensity: config.i0 * p })
                .map_err(|e| Error::Backend { delta, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeScan { points, i0: config.i0, provenance: config.backend })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Visibility obtained by projecting a scan onto the closed-form fringe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityFit {
    /// `2|w_C| / (w_A + w_B)`.
    pub visibility: f64,
    /// Weight of `|A|^2`, the fitted photon-count normalization.
    pub weight_direct: f64,
    /// Weight of `C`.
    pub weight_interference: f64,
    /// Weight of `|B|^2`.
    pub weight_mu2: f64,
    pub residual_rms: f64,
}

/// Least-squares fit of `I(delta) = w_A |A|^2 + w_C C + w_B |B|^2`.
///
/// The weights absorb the photon-count scale, the `mu2` rotation and any
/// loss of coherence. The visibility is the fringe contrast the fitted
/// model has where `|A| = |B| = 1/2`, which is the resonant envelope:
/// `(I_max - I_min) / (I_max + I_min) = 2|w_C| / (w_A + w_B)`.
pub fn fit_visibility(scan: &FringeScan, t_mu1: f64, t_total: f64) -> Result<VisibilityFit> {
    if scan.points.len() < 3 {
        return Err(Error::InsufficientData("need at least three scan points"));
    }
    let mut normal = Matrix::<3>::zeros();
    let mut rhs = [C64::new(0.0, 0.0); 3];
    let mut rows = Vec::with_capacity(scan.points.len());
    for p in &scan.points {
        let t = terms_with_total(p.delta, t_mu1, t_total)?;
        let basis = [t.a.norm_sqr(), t.c, t.b.norm_sqr()];
        for i in 0..3 {
            rhs[i] += basis[i] * p.intensity;
            for j in 0..3 {
                normal.0[i][j] += basis[i] * basis[j];
            }
        }
        rows.push((basis, p.intensity));
    }
    let w = normal.solve(&rhs).map_err(|_| Error::InsufficientData("scan does not resolve the fringe terms"))?;
    let (wa, wc, wb) = (w[0].re, w[1].re, w[2].re);
    let sse: f64 = rows
        .iter()
        .map(|(basis, y)| {
            let model = wa * basis[0] + wc * basis[1] + wb * basis[2];
            (model - y) * (model - y)
        })
        .sum();
    let denom = wa + wb;
    let visibility = if denom > 0.0 { (2.0 * wc.abs() / denom).min(1.0) } else { 0.0 };
    Ok(VisibilityFit {
        visibility,
        weight_direct: wa,
        weight_interference: wc,
        weight_mu2: wb,
        residual_rms: (sse / rows.len() as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn resonant_terms() {
        let t = ramsey_terms(0.0, 100e-9, 250e-9).unwrap();
        assert!(close(t.phi, PI / 2.0, 1e-15));
        assert!((t.a - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((t.b - C64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!(close(t.c, -0.5, 1e-15));
        assert!(close(t.t_total, 350e-9, 1e-22));
    }

    #[test]
    fn quarter_turn_detuning_matches_extended_precision() {
        // Reference values evaluated with 40-digit arithmetic.
        let t1 = 100e-9;
        let t = ramsey_terms(PI / (2.0 * t1), t1, 0.0).unwrap();
        assert!(close(t.phi, 2.221_441_469_079_183, 1e-15));
        assert!(close(t.a.re, 0.562_640_058_572_400_2, 1e-14));
        assert!(close(t.a.im, -0.204_274_900_309_110_08, 1e-14));
        assert!(close(t.b.re, 0.0, 1e-14));
        assert!(close(t.b.im, -0.401_424_966_769_703_35, 1e-14));
        assert!(close(t.c, 0.164_002_090_136_937_95, 1e-14));
    }

    #[test]
    fn b_is_bounded_by_one_half() {
        let t1 = 100e-9;
        for d in linspace(-2.0 * PI * 50e6, 2.0 * PI * 50e6, 20001) {
            let t = ramsey_terms(d, t1, 250e-9).unwrap();
            assert!(t.b.norm() <= 0.5 + 1e-15, "|B| = {} at {d}", t.b.norm());
            assert!(t.phi >= PI / 2.0);
            assert_eq!(t.c, 2.0 * (t.a * t.b.conj()).re);
        }
    }

    #[test]
    fn intensity_limits() {
        let t1 = 100e-9;
        assert!(ramsey_intensity(0.0, t1, 0.0, 250e-9, 1.0).unwrap() < 1e-30);
        let t2 = 250e-9;
        let half = ramsey_intensity(0.0, t1, PI / t2, t2, 1.0).unwrap();
        assert!(close(half, 0.25, 1e-15));
        for d in linspace(-2.0 * PI * 10e6, 2.0 * PI * 10e6, 41) {
            let t = ramsey_terms(d, t1, t2).unwrap();
            let conventional = (t.a + t.b).norm_sqr();
            let got = ramsey_intensity(d, t1, 0.0, t2, 3.0).unwrap();
            assert!(close(got, 3.0 * conventional, 1e-14));
        }
    }

    #[test]
    fn intensity_rejects_bad_inputs() {
        assert!(ramsey_intensity(0.0, 100e-9, 0.0, 0.0, 0.0).is_err());
        assert!(ramsey_intensity(0.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ramsey_intensity(0.0, 1e-7, 0.0, -1e-9, 1.0).is_err());
        assert!(ramsey_visibility(1.0, -1.0).is_err());
    }

    #[test]
    fn visibility_special_values() {
        let t2 = 250e-9;
        for k in 0..=5 {
            let even = 2.0 * k as f64 * PI / t2;
            let odd = (2 * k + 1) as f64 * PI / t2;
            assert_eq!(ramsey_visibility(even, t2).unwrap(), 1.0);
            assert_eq!(ramsey_visibility(odd, t2).unwrap(), 0.0);
        }
        let quarter = ramsey_visibility(PI / 2.0 / t2, t2).unwrap();
        assert!(close(quarter, 2.0 * SQRT_2 / 3.0, 1e-12));
    }

    #[test]
    fn scan_config_validation() {
        let mut cfg = RamseyScanConfig::new(1e-7, alloc::vec![0.0, 1.0], 0.0, 0.0);
        assert!(cfg.validate().is_ok());
        cfg.delta_list = alloc::vec![1.0, 1.0];
        assert!(cfg.validate().is_err());
        cfg.delta_list.clear();
        assert!(cfg.validate().is_err());
        cfg.delta_list = alloc::vec![0.0];
        cfg.i0 = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_point_resonant_scan_is_dark() {
        for backend in [Backend::Analytic, Backend::Unitary, Backend::Lindblad] {
            let cfg = RamseyScanConfig::new(100e-9, alloc::vec![0.0], 0.0, 250e-9).with_backend(backend);
            let scan = fringe_scan(&cfg).unwrap();
            assert_eq!(scan.points.len(), 1);
            assert!(scan.points[0].intensity.abs() < 1e-9, "{backend:?}");
        }
    }

    #[test]
    fn unitary_backend_reproduces_closed_form_everywhere() {
        let t2 = 250e-9;
        for area in [0.0, 0.7, PI, 2.0 * PI, 3.3 * PI] {
            let mut cfg = RamseyScanConfig::new(100e-9, linspace(-2.0 * PI * 10e6, 2.0 * PI * 10e6, 81), area / t2, t2);
            cfg.dead_time = 30e-9;
            let analytic = fringe_scan(&cfg).unwrap();
            let unitary = fringe_scan(&cfg.clone().with_backend(Backend::Unitary)).unwrap();
            for (a, u) in analytic.points.iter().zip(&unitary.points) {
                assert!(
                    close(a.intensity, u.intensity, 1e-12),
                    "area {area} delta {}: {} vs {}",
                    a.delta,
                    a.intensity,
                    u.intensity
                );
            }
        }
    }

    #[test]
    fn fitted_visibility_follows_visibility_law() {
        let t1 = 100e-9;
        let t2 = 250e-9;
        for area in [0.0, PI / 2.0, PI, 2.0 * PI, 3.0 * PI, 1.234] {
            let cfg = RamseyScanConfig::new(t1, linspace(-2.0 * PI * 10e6, 2.0 * PI * 10e6, 201), area / t2, t2);
            let scan = fringe_scan(&cfg).unwrap();
            let fit = fit_visibility(&scan, t1, cfg.t_total()).unwrap();
            assert!(close(fit.visibility, visibility_from_area(area), 1e-9), "area {area}: {}", fit.visibility);
            assert!(fit.residual_rms < 1e-12);
        }
    }
}
