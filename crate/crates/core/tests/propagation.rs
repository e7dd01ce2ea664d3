use std::f64::consts::PI;

use proptest::prelude::*;
use qutrit_core::linalg::Matrix;
use qutrit_core::qcore::{
    build_hamiltonian, propagate_sequence, segment_unitary, two_level_propagator, DriveSegment, Field, PulseSequence,
    QutritState, Segment,
};
use qutrit_core::C64;

type M3 = [[C64; 3]; 3];

fn mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// exp(A) by scaling and squaring of a long Taylor series.
fn expm(a: &M3) -> M3 {
    let norm: f64 = a.iter().flatten().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let x: M3 = a.map(|row| row.map(|z| z * scale));
    let mut term: M3 = std::array::from_fn(|i| std::array::from_fn(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
    let mut sum = term;
    for k in 1..30 {
        term = mul(&term, &x).map(|row| row.map(|z| z / k as f64));
        for i in 0..3 {
            for j in 0..3 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

fn oracle_propagator(h: &Matrix<3>, t: f64) -> M3 {
    expm(&h.0.map(|row| row.map(|z| z * C64::new(0.0, -t))))
}

fn max_diff(a: &M3, b: &M3) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Mu1), Just(Field::Mu2)]
}

prop_compose! {
    fn drive()(
        field in field(),
        rabi in 0.0..mhz(30.0),
        detuning in -mhz(20.0)..mhz(20.0),
        phase in -PI..PI,
        duration in 1e-9..300e-9,
    ) -> DriveSegment {
        DriveSegment::new(field, rabi, detuning, phase, duration).unwrap()
    }
}

fn segment() -> impl Strategy<Value = Segment> {
    prop_oneof![3 => drive().prop_map(Segment::Drive), 1 => (1e-9..300e-9f64).prop_map(Segment::Wait)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_matches_matrix_exponential(d in drive()) {
        let h = match d.field {
            Field::Mu1 => build_hamiltonian(Some(&d), None),
            Field::Mu2 => build_hamiltonian(None, Some(&d)),
        }.unwrap();
        let u = segment_unitary(&Segment::Drive(d)).unwrap();
        let diff = max_diff(&u.0, &oracle_propagator(h.matrix(), d.duration));
        prop_assert!(diff < 1e-10, "deviation {diff:e} for {d:?}");
    }
}

proptest! {
    #[test]
    fn hamiltonian_is_hermitian(a in drive(), b in drive()) {
        let a = DriveSegment { field: Field::Mu1, ..a };
        let b = DriveSegment { field: Field::Mu2, ..b };
        let h = build_hamiltonian(Some(&a), Some(&b)).unwrap();
        prop_assert!(h.matrix().hermiticity_error() <= 1e-12 * h.matrix().max_abs());
    }

    #[test]
    fn zero_rabi_and_detuning_is_identity(field in field(), phase in -PI..PI, t in 1e-9..1e-6f64) {
        let d = DriveSegment::new(field, 0.0, 0.0, phase, t).unwrap();
        let u = segment_unitary(&Segment::Drive(d)).unwrap();
        prop_assert!(u.max_abs_diff(&Matrix::identity()) < 1e-15);
    }

    #[test]
    fn propagators_are_unitary(seg in segment()) {
        let u = segment_unitary(&seg).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12);
    }

    #[test]
    fn splitting_a_pulse_composes(d in drive(), frac in 0.05..0.95f64) {
        let first = DriveSegment { duration: frac * d.duration, ..d };
        let second = DriveSegment { duration: (1.0 - frac) * d.duration, ..d };
        let whole = segment_unitary(&Segment::Drive(d)).unwrap();
        let split = segment_unitary(&Segment::Drive(second)).unwrap() * segment_unitary(&Segment::Drive(first)).unwrap();
        prop_assert!(whole.max_abs_diff(&split) < 1e-12);
    }

    #[test]
    fn sequence_evolution_preserves_norm(segs in prop::collection::vec(segment(), 1..8)) {
        let seq = PulseSequence::new("random", segs).unwrap();
        let out = propagate_sequence(&QutritState::ground(), &seq).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_block_is_special_up_to_detuning_phase(
        rabi in 0.0..mhz(30.0), det in -mhz(20.0)..mhz(20.0), phase in -PI..PI, t in 1e-9..1e-6f64,
    ) {
        // det U = exp(i det t) for a traceless part plus diag(0, -det).
        let u = two_level_propagator(rabi, det, phase, t).unwrap();
        let det_u = u.0[0][0] * u.0[1][1] - u.0[0][1] * u.0[1][0];
        prop_assert!((det_u - C64::from_polar(1.0, det * t)).norm() < 1e-12);
    }
}

#[test]
fn pulse_areas() {
    let ground = QutritState::ground();
    let pi = DriveSegment::with_area(Field::Mu1, PI, 40e-9).unwrap();
    let seq = PulseSequence::new("pi", vec![pi.into()]).unwrap();
    let out = propagate_sequence(&ground, &seq).unwrap();
    assert!((out.populations()[1] - 1.0).abs() < 1e-12);

    let two_pi = DriveSegment::with_area(Field::Mu1, 2.0 * PI, 80e-9).unwrap();
    let seq = PulseSequence::new("2pi", vec![two_pi.into()]).unwrap();
    let out = propagate_sequence(&ground, &seq).unwrap();
    assert!((out.amplitudes()[0] + C64::new(1.0, 0.0)).norm() < 1e-12);
}
