use std::f64::consts::{PI, SQRT_2};

use proptest::prelude::*;
use qutrit_core::photostats::{
    estimate_g2, fit_fringe, fit_sinusoid, readout_populations, sample_shots, PhotonSource, ShotConfig, ShotRecord,
    TimeBinPopulations,
};
use qutrit_core::qcore::{propagate_sequence, DriveSegment, Field, PulseSequence, QutritState};
use qutrit_core::ramsey::{fringe_scan, linspace, ramsey_visibility, RamseyScanConfig};
use qutrit_core::C64;

fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

/// Expected g2 of the qutrit source: coincidences only come from the
/// two-photon events that split across the arms.
fn mixture_g2(p2: f64, p1: f64) -> f64 {
    2.0 * p2 / (2.0 * p2 + (1.0 - p2) * p1).powi(2)
}

fn p2_for_target(target: f64, p1: f64) -> f64 {
    // g2 rises monotonically with p2 on [0, 1).
    let (mut lo, mut hi) = (0.0, 0.999);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mixture_g2(mid, p1) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn antibunched_source_has_no_coincidences() {
    let pops = TimeBinPopulations::ideal([0.471, 0.386, 0.142]).unwrap();
    let recs = sample_shots(&pops, &ShotConfig::new(200_000, 11)).unwrap();
    for bin in 1..=3 {
        let g = estimate_g2(&recs, bin).unwrap();
        assert_eq!(g.value, 0.0);
    }
}

#[test]
fn coherent_source_is_uncorrelated() {
    let pops = TimeBinPopulations::ideal([0.0; 3]).unwrap();
    let cfg = ShotConfig::new(1_000_000, 2024).with_source(PhotonSource::Poisson { mean: 0.1 });
    let g = estimate_g2(&sample_shots(&pops, &cfg).unwrap(), 1).unwrap();
    assert!((g.value - 1.0).abs() <= 0.02, "{g:?}");
    assert!(g.stderr > 0.0 && g.stderr < 0.05);
}

#[test]
fn two_photon_mixture_recovers_target() {
    let p1 = 0.5;
    let p2 = p2_for_target(0.45, p1);
    assert!((mixture_g2(p2, p1) - 0.45).abs() < 1e-12);
    let pops = TimeBinPopulations::ideal([p1, 0.5, 0.0]).unwrap();
    let recs = sample_shots(&pops, &ShotConfig::new(1_000_000, 77).with_p2(p2)).unwrap();
    let g = estimate_g2(&recs, 1).unwrap();
    assert!((g.value - 0.45).abs() <= 3.0 * g.stderr, "{g:?}");
}

#[test]
fn relabeling_arms_keeps_the_estimate() {
    let pops = TimeBinPopulations::ideal([0.5, 0.3, 0.1]).unwrap();
    let recs = sample_shots(&pops, &ShotConfig::new(100_000, 5).with_p2(0.05).with_dark_rate(1e-3)).unwrap();
    let swapped: Vec<ShotRecord> = recs.iter().map(ShotRecord::swapped).collect();
    let a = estimate_g2(&recs, 1).unwrap();
    let b = estimate_g2(&swapped, 1).unwrap();
    assert_eq!(a.value, b.value);
    assert!((a.stderr - b.stderr).abs() < 0.3 * a.stderr);
}

#[test]
fn different_seeds_agree_statistically() {
    let pops = TimeBinPopulations::ideal([0.5, 0.5, 0.0]).unwrap();
    let run =
        |seed| estimate_g2(&sample_shots(&pops, &ShotConfig::new(200_000, seed).with_p2(0.05)).unwrap(), 1).unwrap();
    let (a, b) = (run(1), run(2));
    let sigma = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    assert!((a.value - b.value).abs() < 5.0 * sigma);
}

#[test]
fn rabi_scan_keeps_r1_and_oscillates_r2_r3() {
    let w2 = mhz(12.5);
    let half_pi = DriveSegment::with_area(Field::Mu1, PI / 2.0, 20e-9).unwrap();
    let times = linspace(1e-9, 160e-9, 160);
    let mut p2s = Vec::new();
    let mut p3s = Vec::new();
    for &t in &times {
        let mu2 = DriveSegment::resonant(Field::Mu2, w2, t).unwrap();
        let seq = PulseSequence::new("rabi", vec![half_pi.into(), mu2.into()]).unwrap();
        let pops = propagate_sequence(&QutritState::ground(), &seq).unwrap().populations();
        assert!((pops[0] - 0.5).abs() < 1e-9);
        p2s.push(pops[1]);
        p3s.push(pops[2]);
    }
    for ys in [&p2s, &p3s] {
        let fit = fit_sinusoid(&times, ys, 1.1 * w2).unwrap();
        let period = 2.0 * PI / fit.frequency;
        assert!((period - 80e-9).abs() < 1e-3 * 80e-9, "period {period:e}");
    }
}

fn analytic_scan(area: f64) -> (f64, f64) {
    let (t1, t2) = (1e-9, 1e-6);
    let tt = 2.0 * t1 + t2;
    let half = 2.0 * 2.0 * PI / tt;
    let cfg = RamseyScanConfig::new(t1, linspace(-half, half, 81), area / t2, t2);
    let fit = fit_fringe(&fringe_scan(&cfg).unwrap(), tt).unwrap();
    assert!(fit.converged && !fit.frequency_warning);
    (fit.visibility, ramsey_visibility(area / t2, t2).unwrap())
}

#[test]
fn fitted_visibility_of_analytic_scans() {
    let (v, _) = analytic_scan(2.0 * PI);
    assert!((v - 1.0).abs() < 1e-6);
    let (v, _) = analytic_scan(PI / 2.0);
    assert!((v - 2.0 * SQRT_2 / 3.0).abs() < 1e-4);
    for area in [0.3, 1.0, 2.5, 4.0] {
        let (v, law) = analytic_scan(area);
        assert!((v - law).abs() < 1e-4, "area {area}: {v} vs {law}");
    }
}

proptest! {
    #[test]
    fn readout_conserves_probability(re in prop::array::uniform3(-1.0..1.0f64), im in prop::array::uniform3(-1.0..1.0f64)) {
        let amps: [C64; 3] = std::array::from_fn(|k| C64::new(re[k], im[k]));
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3);
        let s = QutritState::normalized(amps[0], amps[1], amps[2]).unwrap();
        let pops = readout_populations(s, [1.0; 3], None).unwrap();
        prop_assert!((pops.total() - 1.0).abs() < 1e-12);
        for k in 0..3 {
            prop_assert!((pops.p[k] - s.populations()[k]).abs() < 1e-12);
        }
    }
}
