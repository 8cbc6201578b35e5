use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Largest tolerated fraction of failed resamples.
const MAX_FAILURE_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub level: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(replications: usize, level: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            replications,
            level,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 200 replications at level 0.9.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            replications: 200,
            level: 0.9,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::Argument(
                "the bootstrap needs at least 2 replications".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Argument(format!(
                "confidence level {} outside (0, 1)",
                self.level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    /// Resamples on which the statistic failed; excluded from the interval.
    pub failures: usize,
}

/// Row indices of resample `rep`. Each replicate has its own ChaCha stream,
/// so the draw does not depend on scheduling.
pub fn resample_indices(n: usize, seed: u64, rep: usize) -> Vec<usize> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile intervals for a vector-valued statistic. A resample counts as
/// failed when the statistic errors or any component is non-finite.
pub fn bootstrap_many<F>(
    ds: &Dataset,
    statistic: F,
    cfg: &BootstrapConfig,
) -> Result<Vec<BootstrapInterval>>
where
    F: Fn(&Dataset) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::DegenerateData(
            "cannot resample an empty dataset".into(),
        ));
    }
    let point = statistic(ds)?;
    let draws: Vec<Option<Vec<f64>>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let sample = ds.resample(&resample_indices(ds.len(), cfg.seed, rep));
            statistic(&sample)
                .ok()
                .filter(|v| v.len() == point.len() && v.iter().all(|x| x.is_finite()))
        })
        .collect();
    let ok: Vec<&Vec<f64>> = draws.iter().flatten().collect();
    let failures = cfg.replications - ok.len();
    if failures as f64 > MAX_FAILURE_FRACTION * cfg.replications as f64 || ok.is_empty() {
        return Err(Error::BootstrapInstability {
            failures,
            replications: cfg.replications,
        });
    }
    let tail = 0.5 * (1.0 - cfg.level);
    Ok((0..point.len())
        .map(|c| {
            let mut v: Vec<f64> = ok.iter().map(|d| d[c]).collect();
            v.sort_by(f64::total_cmp);
            BootstrapInterval {
                point: point[c],
                lower: quantile(&v, tail),
                upper: quantile(&v, 1.0 - tail),
                failures,
            }
        })
        .collect())
}

/// Percentile interval for a scalar statistic; `point` uses the full sample.
pub fn bootstrap<F>(ds: &Dataset, statistic: F, cfg: &BootstrapConfig) -> Result<BootstrapInterval>
where
    F: Fn(&Dataset) -> Result<f64> + Sync,
{
    let out = bootstrap_many(ds, |d| statistic(d).map(|v| vec![v]), cfg)?;
    Ok(out[0])
}
