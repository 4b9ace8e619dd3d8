//! Guesswork and entropy of a finite password distribution.
//!
//! Every statistic depends only on the probability sequence, ranked in
//! non-increasing order. Sums use compensated accumulation so that models
//! with tens of millions of ranks keep full precision.

use std::io::Write;

use crate::ingest::RankFrequencyTable;
use crate::numeric::CompensatedSum;
use crate::zipf_fit::ZipfFit;
use crate::{Error, Result};

/// Default α for α-guesswork.
pub const DEFAULT_ALPHA: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Empirical,
    Uniform,
    Zipf,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Empirical => "empirical",
            ModelKind::Uniform => "uniform",
            ModelKind::Zipf => "zipf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityModel {
    probs: Vec<f64>,
    kind: ModelKind,
    /// Zipf normalising constant `K`.
    normalizer: Option<f64>,
}

impl ProbabilityModel {
    /// Normalise arbitrary positive weights and rank them. Tagged empirical.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty()
            || weights
                .iter()
                .any(|w| w.is_nan() || *w <= 0.0 || !w.is_finite())
        {
            return Err(Error::Argument(
                "weights must be non-empty, positive and finite".into(),
            ));
        }
        weights.sort_unstable_by(|a, b| b.total_cmp(a));
        let total: f64 = weights.iter().copied().collect::<CompensatedSum>().value();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self {
            probs: weights,
            kind: ModelKind::Empirical,
            normalizer: None,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn normalizer(&self) -> Option<f64> {
        self.normalizer
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `P_i = f_i / total_users` in table order.
pub fn empirical_model(table: &RankFrequencyTable) -> ProbabilityModel {
    let total = table.total_users() as f64;
    ProbabilityModel {
        probs: table.counts().iter().map(|&c| c as f64 / total).collect(),
        kind: ModelKind::Empirical,
        normalizer: None,
    }
}

pub fn uniform_model(n: usize) -> Result<ProbabilityModel> {
    if n == 0 {
        return Err(Error::Argument("uniform model needs n >= 1".into()));
    }
    Ok(ProbabilityModel {
        probs: vec![1.0 / n as f64; n],
        kind: ModelKind::Uniform,
        normalizer: None,
    })
}

/// `P_i = K·i^(−s)` over ranks `1..=n`.
pub fn zipf_model(s: f64, n: usize) -> Result<ProbabilityModel> {
    if n == 0 || s.is_nan() || s < 0.0 || !s.is_finite() {
        return Err(Error::Argument(format!(
            "zipf model needs n >= 1 and s >= 0 (n={n}, s={s})"
        )));
    }
    let mut probs: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-s)).collect();
    let k = 1.0 / probs.iter().copied().collect::<CompensatedSum>().value();
    probs.iter_mut().for_each(|p| *p *= k);
    Ok(ProbabilityModel {
        probs,
        kind: ModelKind::Zipf,
        normalizer: Some(k),
    })
}

/// `G = Σ i·P_i`.
pub fn guesswork(model: &ProbabilityModel) -> f64 {
    rank_weighted_sum(&model.probs)
}

fn rank_weighted_sum(probs: &[f64]) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| (i + 1) as f64 * p)
        .collect::<CompensatedSum>()
        .value()
}

/// Smallest rank `r_α` whose cumulative probability reaches `alpha`, and
/// `G_α = Σ_{i ≤ r_α} i·P_i`. With `alpha >= 1` (or if rounding keeps the
/// cumulative sum just below `alpha`) every rank is used.
pub fn alpha_guesswork(model: &ProbabilityModel, alpha: f64) -> Result<(usize, f64)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Argument(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let n = model.probs.len();
    let mut r = n;
    if alpha < 1.0 {
        let mut cum = CompensatedSum::new();
        for (i, &p) in model.probs.iter().enumerate() {
            cum.add(p);
            if cum.value() >= alpha {
                r = i + 1;
                break;
            }
        }
    }
    Ok((r, rank_weighted_sum(&model.probs[..r])))
}

/// `−Σ P log₂ P`, with `0·log 0 = 0`.
pub fn shannon_entropy(model: &ProbabilityModel) -> f64 {
    let h = model
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .collect::<CompensatedSum>()
        .value();
    h.max(0.0)
}

pub fn min_entropy(model: &ProbabilityModel) -> f64 {
    let max = model.probs.iter().copied().fold(0.0, f64::max);
    (-max.log2()).max(0.0)
}

/// Rényi entropy of order ½: `2·log₂ Σ √P`.
pub fn renyi_half_entropy(model: &ProbabilityModel) -> f64 {
    let s = model
        .probs
        .iter()
        .map(|p| p.sqrt())
        .collect::<CompensatedSum>()
        .value();
    (2.0 * s.log2()).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessStats {
    pub guesswork: f64,
    pub alpha: f64,
    pub r_alpha: usize,
    pub alpha_guesswork: f64,
    pub shannon: f64,
    pub min_entropy: f64,
    pub renyi_half: f64,
}

pub fn guess_stats(model: &ProbabilityModel, alpha: f64) -> Result<GuessStats> {
    let (r_alpha, alpha_guesswork) = alpha_guesswork(model, alpha)?;
    Ok(GuessStats {
        guesswork: guesswork(model),
        alpha,
        r_alpha,
        alpha_guesswork,
        shannon: shannon_entropy(model),
        min_entropy: min_entropy(model),
        renyi_half: renyi_half_entropy(model),
    })
}

/// Statistics under the uniform, empirical and Zipf models of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub uniform: GuessStats,
    pub empirical: GuessStats,
    pub zipf: GuessStats,
}

/// Uniform and Zipf models share the table's support: `N = distinct_count`.
pub fn stats_report(table: &RankFrequencyTable, fit: &ZipfFit, alpha: f64) -> Result<StatsReport> {
    let n = table.distinct_count();
    Ok(StatsReport {
        uniform: guess_stats(&uniform_model(n)?, alpha)?,
        empirical: guess_stats(&empirical_model(table), alpha)?,
        zipf: guess_stats(&zipf_model(fit.s, n)?, alpha)?,
    })
}

pub const STATS_HEADER: &str = "model\tG\tG_alpha\tr_alpha\tH\tmin_entropy\trenyi_R";

pub fn write_stats_report<W: Write>(w: &mut W, report: &StatsReport) -> std::io::Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for (name, s) in [
        ("uniform", &report.uniform),
        ("empirical", &report.empirical),
        ("zipf", &report.zipf),
    ] {
        writeln!(
            w,
            "{name}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.guesswork, s.alpha_guesswork, s.r_alpha, s.shannon, s.min_entropy, s.renyi_half
        )?;
    }
    Ok(())
}
