//! Time-bin read-out, photon counting statistics and fringe fitting.
//!
//! The read-out maps `|R1>, |R2>, |R3>` onto three photon time bins: bin 1
//! retrieves `|R1>`, then a `mu1` pi pulse brings `|R2>` down for bin 2, and
//! a `mu2` pi pulse followed by a `mu1` pi pulse brings `|R3>` down for bin 3.
//! Shot records hold per-bin clicks at the two arms of a Hanbury Brown-Twiss
//! setup.

mod fit;
mod g2;
mod readout;
mod shots;

pub use fit::{fit_fringe, fit_sinusoid, FitResult, SinusoidFit, FREQUENCY_WARNING, MAX_ITERATIONS, STEP_TOLERANCE};
pub use g2::{estimate_g2, estimate_g2_seeded, G2Estimate, BOOTSTRAP_RESAMPLES, BOOTSTRAP_SEED};
pub use readout::{readout_populations, readout_with_sequence, ReadoutTiming, TimeBinPopulations};
pub use shots::{sample_shots, PhotonSource, ShotConfig, ShotRecord, TRIALS_PER_STREAM};
