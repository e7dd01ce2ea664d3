use std::f64::consts::PI;

use proptest::prelude::*;
use qutrit_core::dissipative::{evolve_master, DensityMatrix, DissipationParams, IntegratorConfig, LOSS};
use qutrit_core::linalg::trace_distance;
use qutrit_core::qcore::{propagate_sequence, DriveSegment, Field, PulseSequence, QutritState, Segment};
use qutrit_core::ramsey::{fit_visibility, fringe_scan, linspace, Backend, RamseyScanConfig};

fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

fn canonical_control(delta: f64) -> PulseSequence {
    RamseyScanConfig::new(20e-9, vec![0.0], mhz(12.5), 250e-9).sequence(delta).unwrap()
}

fn noisy() -> DissipationParams {
    DissipationParams { gamma_decay: [1e5, 2e5, 3e5], gamma_deph: [1e5, 5e5, 1e6] }
}

#[test]
fn every_sample_is_a_valid_state() {
    let cfg = IntegratorConfig { sample_interval: Some(5e-9), ..Default::default() };
    let traj = evolve_master(&DensityMatrix::basis(1), &canonical_control(mhz(1.3)), &noisy(), &cfg).unwrap();
    assert!(traj.samples.len() > 50);
    for s in &traj.samples {
        assert!((s.rho.trace() - 1.0).abs() < 1e-10);
        assert!(s.rho.matrix().hermiticity_error() < 1e-12);
        assert!(s.rho.min_eigenvalue() > -1e-10);
    }
    // Decay only ever feeds the loss level.
    let losses: Vec<f64> = traj.samples.iter().map(|s| s.rho.population(LOSS)).collect();
    assert!(losses.windows(2).all(|w| w[1] >= w[0] - 1e-15));
}

#[test]
fn halving_the_step_changes_nothing() {
    let seq = canonical_control(mhz(1.3));
    let rho0 = DensityMatrix::basis(1);
    let run = |dt: f64| {
        let cfg = IntegratorConfig::default().with_dt_max(dt);
        *evolve_master(&rho0, &seq, &noisy(), &cfg).unwrap().final_state()
    };
    let coarse = run(1e-10);
    let fine = run(5e-11);
    assert!((coarse.population(0) - fine.population(0)).abs() < 1e-9);
    assert!(trace_distance(&coarse.0, &fine.0) < 1e-9);
    let auto = *evolve_master(&rho0, &seq, &noisy(), &IntegratorConfig::default()).unwrap().final_state();
    assert!(trace_distance(&auto.0, &fine.0) < 1e-9);
}

#[test]
fn adaptive_and_fixed_step_agree() {
    let seq = canonical_control(-mhz(2.0));
    let rho0 = DensityMatrix::basis(1);
    let rk4 = *evolve_master(&rho0, &seq, &noisy(), &IntegratorConfig::default()).unwrap().final_state();
    let rk45 = *evolve_master(&rho0, &seq, &noisy(), &IntegratorConfig::rk45(1e-12)).unwrap().final_state();
    assert!(trace_distance(&rk4.0, &rk45.0) < 1e-8);
}

#[test]
fn dephasing_r3_during_mu2_erodes_visibility() {
    let t1 = 100e-9;
    let t2 = 250e-9;
    let deltas = linspace(-mhz(10.0), mhz(10.0), 41);
    let mut last = f64::INFINITY;
    for rate in [0.0, 1e5, 5e5, 1e6, 5e6] {
        let mut cfg = RamseyScanConfig::new(t1, deltas.clone(), 2.0 * PI / t2, t2).with_backend(Backend::Lindblad);
        cfg.dissipation = DissipationParams { gamma_deph: [0.0, 0.0, rate], ..Default::default() };
        let scan = fringe_scan(&cfg).unwrap();
        let v = fit_visibility(&scan, t1, cfg.t_total()).unwrap().visibility;
        assert!(v < last, "rate {rate}: {v} !< {last}");
        last = v;
    }
    assert!(last < 0.9);
}

fn segment() -> impl Strategy<Value = Segment> {
    let drive =
        (prop_oneof![Just(Field::Mu1), Just(Field::Mu2)], 0.0..mhz(20.0), -mhz(5.0)..mhz(5.0), -PI..PI, 5e-9..100e-9)
            .prop_map(|(f, w, d, p, t)| Segment::Drive(DriveSegment::new(f, w, d, p, t).unwrap()));
    prop_oneof![3 => drive, 1 => (5e-9..100e-9f64).prop_map(Segment::Wait)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_rates_reproduce_unitary_evolution(segs in prop::collection::vec(segment(), 1..=6)) {
        let seq = PulseSequence::new("random", segs).unwrap();
        let psi = propagate_sequence(&QutritState::ground(), &seq).unwrap();
        let traj = evolve_master(&DensityMatrix::basis(1), &seq, &DissipationParams::none(), &IntegratorConfig::default()).unwrap();
        let d = trace_distance(&traj.final_state().0, &DensityMatrix::from_state(&psi).0);
        prop_assert!(d < 1e-8, "trace distance {d:e}");
    }
}
