//! Parametric bootstrap goodness of fit for the truncated-Zipf MLE.
//!
//! The statistic is the Kolmogorov–Smirnov distance with Anderson–Darling
//! weighting, `max_r |S(r) − P(r)| / √(P(r)(1 − P(r)))`, between the
//! empirical rank CDF `S` and the model CDF `P`. Ranks where the weight is
//! undefined (`P = 1`) are skipped.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mle::{mle_from_counts, ZipfSampler};
use super::{FitMethod, ZipfFit};
use crate::hashing::derive_seed;
use crate::ingest::RankFrequencyTable;
use crate::numeric::CompensatedSum;
use crate::{Error, Execution, Result};

pub fn weighted_ks_statistic(counts: &[u64], s: f64, n: usize) -> f64 {
    let weights: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-s)).collect();
    // Suffix sums keep 1 − P(r) accurate in the far tail.
    let mut tail = vec![0.0; n + 1];
    let mut acc = CompensatedSum::new();
    for r in (0..n).rev() {
        acc.add(weights[r]);
        tail[r] = acc.value();
    }
    let h = tail[0];
    let total: f64 = counts.iter().map(|&c| c as f64).sum();

    let mut emp = 0u64;
    let mut stat: f64 = 0.0;
    for r in 0..n.saturating_sub(1) {
        emp += counts.get(r).copied().unwrap_or(0);
        let upper = tail[r + 1] / h;
        let p = 1.0 - upper;
        let denom = (p * upper).sqrt();
        if denom > 0.0 {
            let s_r = emp as f64 / total;
            stat = stat.max((s_r - p).abs() / denom);
        }
    }
    stat
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub observed: f64,
    /// Statistic of each replicate, in replicate order.
    pub replicates: Vec<f64>,
    pub p_value: f64,
}

/// Fraction of model-generated replicates whose statistic strictly exceeds
/// the observed one. Uses the default [`Execution`] mode.
pub fn bootstrap_p_value(
    table: &RankFrequencyTable,
    fit: &ZipfFit,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    Ok(bootstrap(table, fit, replicates, seed, Execution::default())?.p_value)
}

/// Each replicate draws `total_users` ranks from the fitted model, re-sorts
/// the counts, refits by MLE with its own distinct count as `N`, and scores
/// itself against that refit. Replicate `i` is seeded with
/// `derive_seed(seed, i)`, so the result does not depend on `exec`.
pub fn bootstrap(
    table: &RankFrequencyTable,
    fit: &ZipfFit,
    replicates: usize,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapResult> {
    if fit.method != FitMethod::Mle {
        return Err(Error::Argument(format!(
            "bootstrap needs an mle fit, got {}",
            fit.method
        )));
    }
    if replicates < 1 {
        return Err(Error::Argument("replicates must be at least 1".into()));
    }
    let observed = weighted_ks_statistic(table.counts(), fit.s, fit.truncation_n);
    let sampler = ZipfSampler::new(fit.s, fit.truncation_n)?;
    let draws = table.total_users();

    let stats: Vec<Result<f64>> = exec.map_indexed(replicates, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        let mut counts = sampler.sample_counts(draws, &mut rng);
        counts.retain(|&c| c > 0);
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let est = mle_from_counts(&counts)?;
        Ok(weighted_ks_statistic(&counts, est.s, est.n))
    });
    let replicates = stats.into_iter().collect::<Result<Vec<f64>>>()?;
    let exceed = replicates.iter().filter(|&&d| d > observed).count();
    Ok(BootstrapResult {
        observed,
        p_value: exceed as f64 / replicates.len() as f64,
        replicates,
    })
}
