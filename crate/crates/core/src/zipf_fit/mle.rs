use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::{FitMethod, ZipfFit};
use crate::ingest::RankFrequencyTable;
use crate::numeric::CompensatedSum;
use crate::{Error, Result};

const SEARCH_MAX: f64 = 10.0;
const GOLDEN_WIDTH: f64 = 1e-4;
const NEWTON_TOL: f64 = 1e-10;
const MAX_ITER: usize = 200;

/// Point estimate of a truncated-Zipf exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleEstimate {
    pub s: f64,
    /// `1/√(observed Fisher information)`.
    pub stderr: f64,
    pub n: usize,
    pub at_zero_boundary: bool,
    pub log_likelihood: f64,
}

/// Sufficient statistics of ranked counts for the truncated-Zipf likelihood.
struct Likelihood {
    ln_rank: Vec<f64>,
    /// Σ fᵢ·ln i
    weighted_log_rank: f64,
    total: f64,
}

/// `(H, Σ r^-s ln r, Σ r^-s ln² r)` over `r = 1..=N`.
struct Moments {
    h: f64,
    m1: f64,
    m2: f64,
}

impl Likelihood {
    fn new(counts: &[u64]) -> Self {
        let ln_rank: Vec<f64> = (1..=counts.len()).map(|r| (r as f64).ln()).collect();
        let weighted_log_rank = counts
            .iter()
            .zip(&ln_rank)
            .map(|(&f, &l)| f as f64 * l)
            .collect::<CompensatedSum>()
            .value();
        Self {
            ln_rank,
            weighted_log_rank,
            total: counts.iter().map(|&c| c as f64).sum(),
        }
    }

    fn moments(&self, s: f64) -> Moments {
        let (mut h, mut m1, mut m2) = (
            CompensatedSum::new(),
            CompensatedSum::new(),
            CompensatedSum::new(),
        );
        for &l in &self.ln_rank {
            let w = (-s * l).exp();
            h.add(w);
            m1.add(w * l);
            m2.add(w * l * l);
        }
        Moments {
            h: h.value(),
            m1: m1.value(),
            m2: m2.value(),
        }
    }

    fn value(&self, s: f64) -> f64 {
        let h: CompensatedSum = self.ln_rank.iter().map(|&l| (-s * l).exp()).collect();
        -s * self.weighted_log_rank - self.total * h.value().ln()
    }

    /// First and second derivative of the log-likelihood.
    fn derivatives(&self, s: f64) -> (f64, f64) {
        let m = self.moments(s);
        let mean = m.m1 / m.h;
        let var = (m.m2 / m.h - mean * mean).max(0.0);
        (
            -self.weighted_log_rank + self.total * mean,
            -self.total * var,
        )
    }
}

/// `L(s) = −s·Σ fᵢ ln i − M·ln H(N, s)` for ranked counts `fᵢ`, `N = counts.len()`.
pub fn truncated_zipf_log_likelihood(counts: &[u64], s: f64) -> f64 {
    Likelihood::new(counts).value(s)
}

/// Maximise the truncated-Zipf likelihood of counts in rank order.
///
/// Golden-section search over `[0, 10]` followed by safeguarded Newton
/// iterations on the score. `L` is concave in `s`, so the maximiser is unique.
pub fn mle_from_counts(counts: &[u64]) -> Result<MleEstimate> {
    let n = counts.len();
    let lk = Likelihood::new(counts);
    if n < 2 || lk.total < 2.0 {
        return Err(Error::Fit(format!(
            "MLE needs at least 2 ranks and 2 observations (ranks {n}, observations {})",
            lk.total
        )));
    }

    let (score0, curv0) = lk.derivatives(0.0);
    let scale = lk.weighted_log_rank.abs().max(1.0);
    if score0 <= 1e-12 * scale {
        return Ok(MleEstimate {
            s: 0.0,
            stderr: 1.0 / (-curv0).sqrt(),
            n,
            at_zero_boundary: true,
            log_likelihood: lk.value(0.0),
        });
    }
    if lk.derivatives(SEARCH_MAX).0 > 0.0 {
        return Err(Error::Numeric(format!(
            "likelihood still increasing at s = {SEARCH_MAX}"
        )));
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, SEARCH_MAX);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (lk.value(c), lk.value(d));
    let mut iter = 0;
    while b - a > GOLDEN_WIDTH {
        iter += 1;
        if iter > MAX_ITER {
            return Err(Error::Numeric(
                "golden-section search did not converge".into(),
            ));
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = lk.value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = lk.value(d);
        }
    }

    // Score is decreasing; keep a bracket [lo, hi] with score(lo) > 0 > score(hi).
    let (mut lo, mut hi) = (
        (a - GOLDEN_WIDTH).max(0.0),
        (b + GOLDEN_WIDTH).min(SEARCH_MAX),
    );
    if lk.derivatives(lo).0 <= 0.0 {
        lo = 0.0;
    }
    if lk.derivatives(hi).0 >= 0.0 {
        hi = SEARCH_MAX;
    }
    let mut s = 0.5 * (a + b);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        let (score, curv) = lk.derivatives(s);
        if score > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let mut next = if curv < 0.0 {
            s - score / curv
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - s).abs();
        s = next;
        if step < NEWTON_TOL || hi - lo < NEWTON_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric("Newton refinement did not converge".into()));
    }
    let (_, curv) = lk.derivatives(s);
    if curv.is_nan() || curv >= 0.0 {
        return Err(Error::Numeric(
            "non-negative curvature at the maximum".into(),
        ));
    }
    Ok(MleEstimate {
        s,
        stderr: 1.0 / (-curv).sqrt(),
        n,
        at_zero_boundary: false,
        log_likelihood: lk.value(s),
    })
}

pub fn mle_truncated_zipf(table: &RankFrequencyTable) -> Result<ZipfFit> {
    let est = mle_from_counts(table.counts())?;
    Ok(ZipfFit {
        s: est.s,
        method: FitMethod::Mle,
        slope_m: None,
        stderr: Some(est.stderr),
        p_value: None,
        truncation_n: est.n,
        at_zero_boundary: est.at_zero_boundary,
    })
}

/// Draws 0-based ranks from a truncated Zipf(s, N) distribution.
pub struct ZipfSampler {
    alias: WeightedAliasIndex<f64>,
    n: usize,
}

impl ZipfSampler {
    pub fn new(s: f64, n: usize) -> Result<Self> {
        if n == 0 || s.is_nan() || s < 0.0 {
            return Err(Error::Argument(format!(
                "invalid Zipf parameters s={s}, N={n}"
            )));
        }
        let weights: Vec<f64> = (1..=n).map(|r| (r as f64).powf(-s)).collect();
        let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::Numeric(e.to_string()))?;
        Ok(Self { alias, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.alias.sample(rng)
    }

    /// Per-rank counts of `draws` samples (length `N`, rank order).
    pub fn sample_counts<R: Rng + ?Sized>(&self, draws: u64, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.n];
        for _ in 0..draws {
            counts[self.sample(rng)] += 1;
        }
        counts
    }
}
