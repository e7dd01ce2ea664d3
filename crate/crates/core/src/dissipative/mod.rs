//! Lindblad evolution of the qutrit with an explicit loss level.
//!
//! Levels are `|R1>, |R2>, |R3>, |loss>`. Each Rydberg level `a` has a decay
//! channel `sqrt(gamma_decay[a]) |loss><R_a|` and a pure dephasing channel
//! `sqrt(gamma_deph[a]) |R_a><R_a|`. Motional dephasing of the spin wave or
//! collisional broadening can be folded into `gamma_deph`.

mod density;
mod integrator;
mod lindblad;

pub use density::{DensityMatrix, LEVELS, LEVEL_LABELS, LOSS};
pub use integrator::{evolve_master, IntegratorConfig, Method, Sample, Trajectory};
pub use lindblad::{embed_hamiltonian, lindblad_rhs, segment_hamiltonian, DissipationParams, Jump};
