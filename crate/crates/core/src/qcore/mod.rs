//! Single-excitation dynamics of the qutrit.
//!
//! Level index 0 is `|R1>`, 1 is `|R2>`, 2 is `|R3>`. The rotating-frame
//! Hamiltonian is
//!
//! ```text
//!     | 0                  (W1/2) e^{-i p1}    0                |
//! H = | (W1/2) e^{i p1}    -D1                 (W2/2) e^{-i p2} |
//!     | 0                  (W2/2) e^{i p2}     -D2              |
//! ```
//!
//! with Rabi frequencies `W`, detunings `D` and drive phases `p`.
//!
//! **Frame convention.** `|R3>` carries `-D2` alone, not the cascade sum
//! `-(D1 + D2)`. A field that is switched off contributes neither coupling
//! nor detuning, so `Wait` segments propagate as the identity. Free
//! precession accumulated between pulses has to be carried by the drive
//! phase of the following pulse (see [`crate::ramsey`]).

mod hamiltonian;
mod propagator;
mod sequence;
mod state;

pub use hamiltonian::{build_hamiltonian, Hamiltonian3};
pub use propagator::{propagate_sequence, segment_unitary, two_level_propagator, Propagator2, Propagator3};
pub use sequence::{DriveSegment, Field, PulseSequence, Segment, CANONICAL_BOUND_S};
pub use state::QutritState;
