//! Simulation core for a collectively encoded Rydberg qutrit.
//!
//! Three collective Rydberg levels `|R1>, |R2>, |R3>` are coupled by two
//! microwave fields: `mu1` drives `|R1> <-> |R2>` and `mu2` drives
//! `|R2> <-> |R3>`. The crate covers
//!
//! * [`qcore`]: the single-excitation Hamiltonian, closed-form two-level
//!   propagators and exact unitary evolution of pulse sequences,
//! * [`ramsey`]: the closed-form Ramsey photon count and visibility law, and
//!   fringe scans over the `mu1` detuning with analytic, unitary or
//!   master-equation backends,
//! * [`dissipative`]: Lindblad evolution with per-level decay and dephasing,
//! * [`pairwise`]: the two-excitation manifold with interaction shifts,
//! * [`photostats`]: time-bin read-out, shot sampling, `g2(0)` estimation and
//!   fringe fitting.
//!
//! All frequencies are angular (rad/s) and all times are seconds.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x <= tol)` is how NaN gets rejected; index loops read like the maths.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dissipative;
pub mod error;
pub mod linalg;
pub mod pairwise;
pub mod photostats;
pub mod qcore;
pub mod ramsey;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Converts an ordinary frequency in MHz to an angular frequency in rad/s.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    mhz * (1e6 * core::f64::consts::TAU)
}

/// Converts an angular frequency in rad/s to an ordinary frequency in MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (1e6 * core::f64::consts::TAU)
}
