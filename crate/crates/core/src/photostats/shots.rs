use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use super::readout::TimeBinPopulations;
use crate::error::{Error, Result};

/// Trials drawn from one RNG stream; block `b` uses stream `b` of the seed.
pub const TRIALS_PER_STREAM: usize = 1 << 16;

/// Click counts of one trial at the two HBT arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ShotRecord {
    pub trial: u64,
    /// `counts[bin - 1] = [arm A, arm B]`.
    pub counts: [[u32; 2]; 3],
}

impl ShotRecord {
    pub fn arms(&self, bin: u8) -> Result<(u32, u32)> {
        match bin {
            1..=3 => {
                let [a, b] = self.counts[bin as usize - 1];
                Ok((a, b))
            }
            other => Err(Error::ReadoutBin(other)),
        }
    }

    /// Same trial with arms A and B exchanged.
    pub fn swapped(&self) -> Self {
        ShotRecord { trial: self.trial, counts: self.counts.map(|[a, b]| [b, a]) }
    }
}

/// Photon-number statistics of the emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonSource {
    /// At most one photon over the three bins, chosen from the bin
    /// probabilities, except that with probability `p2` two photons are
    /// emitted together in bin 1.
    Qutrit { p2: f64 },
    /// Attenuated coherent light in bin 1 with mean photon number `mean`.
    Poisson { mean: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotConfig {
    pub n_trials: usize,
    pub seed: u64,
    /// Probability of a dark click per bin per arm.
    pub dark_rate: f64,
    pub source: PhotonSource,
}

impl ShotConfig {
    pub fn new(n_trials: usize, seed: u64) -> Self {
        ShotConfig { n_trials, seed, dark_rate: 0.0, source: PhotonSource::Qutrit { p2: 0.0 } }
    }

    pub fn with_p2(mut self, p2: f64) -> Self {
        self.source = PhotonSource::Qutrit { p2 };
        self
    }

    pub fn with_dark_rate(mut self, dark_rate: f64) -> Self {
        self.dark_rate = dark_rate;
        self
    }

    pub fn with_source(mut self, source: PhotonSource) -> Self {
        self.source = source;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InsufficientData("n_trials must be positive"));
        }
        probability("dark_rate", self.dark_rate)?;
        match self.source {
            PhotonSource::Qutrit { p2 } => probability("p2", p2),
            PhotonSource::Poisson { mean } if !(mean.is_finite() && mean >= 0.0) => {
                Err(Error::InvalidParameter { name: "mean photon number", value: mean })
            }
            PhotonSource::Poisson { .. } => Ok(()),
        }
    }
}

fn probability(name: &'static str, p: f64) -> Result<()> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value: p })
    }
}

enum Emitter {
    Qutrit { p2: f64, cumulative: [f64; 3] },
    Poisson(Option<Poisson<f64>>),
}

impl Emitter {
    fn new(pops: &TimeBinPopulations, source: PhotonSource) -> Result<Self> {
        Ok(match source {
            PhotonSource::Qutrit { p2 } => {
                let p = pops.p;
                Emitter::Qutrit { p2, cumulative: [p[0], p[0] + p[1], p[0] + p[1] + p[2]] }
            }
            PhotonSource::Poisson { mean: 0.0 } => Emitter::Poisson(None),
            PhotonSource::Poisson { mean } => Emitter::Poisson(Some(
                Poisson::new(mean).map_err(|_| Error::InvalidParameter { name: "mean photon number", value: mean })?,
            )),
        })
    }

    fn emit<R: Rng>(&self, rng: &mut R, counts: &mut [[u32; 2]; 3]) {
        match self {
            Emitter::Qutrit { p2, cumulative } => {
                if *p2 > 0.0 && rng.random_bool(*p2) {
                    split(rng, 2, &mut counts[0]);
                    return;
                }
                let u: f64 = rng.random();
                if let Some(bin) = cumulative.iter().position(|&c| u < c) {
                    split(rng, 1, &mut counts[bin]);
                }
            }
            Emitter::Poisson(None) => {}
            Emitter::Poisson(Some(dist)) => {
                let n = dist.sample(rng) as u64;
                split(rng, n, &mut counts[0]);
            }
        }
    }
}

/// Sends `n` photons through a balanced beam splitter.
fn split<R: Rng>(rng: &mut R, n: u64, arms: &mut [u32; 2]) {
    let to_a = match n {
        0 => 0,
        1 => rng.random_bool(0.5) as u64,
        _ => Binomial::new(n, 0.5).expect("p = 0.5 is a valid probability").sample(rng),
    };
    arms[0] += to_a as u32;
    arms[1] += (n - to_a) as u32;
}

/// Monte-Carlo click records; identical inputs give identical records.
pub fn sample_shots(pops: &TimeBinPopulations, config: &ShotConfig) -> Result<Vec<ShotRecord>> {
    pops.validate()?;
    config.validate()?;
    let emitter = Emitter::new(pops, config.source)?;
    let mut records = Vec::with_capacity(config.n_trials);
    for (stream, start) in (0..config.n_trials).step_by(TRIALS_PER_STREAM).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream as u64);
        let end = (start + TRIALS_PER_STREAM).min(config.n_trials);
        for trial in start..end {
            let mut counts = [[0u32; 2]; 3];
            emitter.emit(&mut rng, &mut counts);
            if config.dark_rate > 0.0 {
                for arm in counts.iter_mut().flatten() {
                    *arm += rng.random_bool(config.dark_rate) as u32;
                }
            }
            records.push(ShotRecord { trial: trial as u64, counts });
        }
    }
    Ok(records)
}
