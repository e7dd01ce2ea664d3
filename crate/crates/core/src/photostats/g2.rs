use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::shots::ShotRecord;
use crate::error::{Error, Result};

pub const BOOTSTRAP_RESAMPLES: usize = 200;
pub const BOOTSTRAP_SEED: u64 = 0x6732_5f68_6274;

/// Zero-delay second-order correlation of one time bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Estimate {
    pub value: f64,
    /// Bootstrap standard error.
    pub stderr: f64,
    pub n_trials: usize,
}

/// `g2 = <nA nB> / (<nA> <nB>)` over trials, with a bootstrap error bar.
pub fn estimate_g2(records: &[ShotRecord], bin: u8) -> Result<G2Estimate> {
    estimate_g2_seeded(records, bin, BOOTSTRAP_SEED)
}

pub fn estimate_g2_seeded(records: &[ShotRecord], bin: u8, seed: u64) -> Result<G2Estimate> {
    if records.len() < 2 {
        return Err(Error::InsufficientData("g2 needs at least two trials"));
    }
    // Trials only matter through their (nA, nB) pair, so resampling draws
    // multinomial counts over the distinct pairs.
    let mut histogram: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for r in records {
        *histogram.entry(r.arms(bin)?).or_insert(0) += 1;
    }
    let categories: Vec<((u32, u32), u64)> = histogram.into_iter().collect();
    let n = records.len() as u64;
    let value = g2_of(categories.iter().map(|&(k, c)| (k, c)), n)
        .ok_or(Error::UndefinedEstimate("zero mean counts in a detector arm"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut weights = alloc::vec![0u64; categories.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut remaining = n;
        let mut mass = n;
        for (w, &(_, c)) in weights.iter_mut().zip(&categories) {
            *w = if remaining == 0 || c == mass {
                remaining
            } else {
                let p = c as f64 / mass as f64;
                Binomial::new(remaining, p).expect("category weight is a probability").sample(&mut rng)
            };
            remaining -= *w;
            mass -= c;
        }
        let resample = categories.iter().zip(&weights).map(|(&(k, _), &w)| (k, w));
        if let Some(g) = g2_of(resample, n) {
            draws.push(g);
        }
    }
    let stderr = if draws.len() < 2 {
        0.0
    } else {
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (draws.len() - 1) as f64;
        var.sqrt()
    };
    Ok(G2Estimate { value, stderr, n_trials: records.len() })
}

fn g2_of(weighted: impl Iterator<Item = ((u32, u32), u64)>, n: u64) -> Option<f64> {
    let (mut sa, mut sb, mut sab) = (0u64, 0u64, 0u64);
    for ((a, b), w) in weighted {
        sa += a as u64 * w;
        sb += b as u64 * w;
        sab += a as u64 * b as u64 * w;
    }
    if sa == 0 || sb == 0 {
        return None;
    }
    let n = n as f64;
    Some((sab as f64 / n) / ((sa as f64 / n) * (sb as f64 / n)))
}
