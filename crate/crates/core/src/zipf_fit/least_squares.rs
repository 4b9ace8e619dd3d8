use super::{BinRule, BinnedSeries, FitMethod, ZipfFit};
use crate::ingest::{CountOfCounts, RankFrequencyTable};
use crate::numeric::least_squares;
use crate::{Error, Result};

fn log2_points(points: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    points
        .into_iter()
        .map(|(x, y)| (x.log2(), y.log2()))
        .collect()
}

pub fn ls_raw_rank(table: &RankFrequencyTable) -> Result<ZipfFit> {
    let pts = log2_points(
        table
            .counts()
            .iter()
            .enumerate()
            .map(|(i, &c)| ((i + 1) as f64, c as f64)),
    );
    let line = least_squares(&pts)?;
    Ok(ZipfFit::from_slope(
        -line.slope,
        FitMethod::LsRaw,
        table.distinct_count(),
    ))
}

/// Dyadic bins over `1..=len` for a value function defined on that range.
/// `bin_sum(lo, hi)` returns the sum of values in `[lo, hi]`.
fn dyadic_bins(len: u64, mut bin_sum: impl FnMut(u64, u64) -> f64) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    let mut lo = 1u64;
    while let Some(hi) = lo.checked_mul(2).map(|x| x - 1) {
        if hi > len {
            break;
        }
        let width = (hi - lo + 1) as f64;
        let mean = bin_sum(lo, hi) / width;
        if mean > 0.0 {
            points.push((((lo as f64) * (hi as f64)).sqrt(), mean));
        }
        lo *= 2;
    }
    points
}

pub fn bin_dyadic_rank(table: &RankFrequencyTable) -> BinnedSeries {
    let counts = table.counts();
    let points = dyadic_bins(counts.len() as u64, |lo, hi| {
        counts[(lo - 1) as usize..hi as usize]
            .iter()
            .map(|&c| c as f64)
            .sum()
    });
    BinnedSeries {
        points,
        bin_rule: BinRule::DyadicRank,
    }
}

/// Dyadic bins over multiplicity `k`; missing `k` contribute zero to their
/// bin's mean.
pub fn bin_dyadic_k(counts: &CountOfCounts) -> BinnedSeries {
    let pairs = counts.pairs();
    let k_max = pairs.last().map_or(0, |p| p.0);
    let points = dyadic_bins(k_max, |lo, hi| {
        pairs
            .iter()
            .filter(|(k, _)| (lo..=hi).contains(k))
            .map(|&(_, n)| n as f64)
            .sum()
    });
    BinnedSeries {
        points,
        bin_rule: BinRule::DyadicK,
    }
}

pub fn ls_binned_rank(table: &RankFrequencyTable) -> Result<ZipfFit> {
    let series = bin_dyadic_rank(table);
    if series.points.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 complete rank bins, got {}",
            series.points.len()
        )));
    }
    let line = least_squares(&log2_points(series.points))?;
    Ok(ZipfFit::from_slope(
        -line.slope,
        FitMethod::LsBinned,
        table.distinct_count(),
    ))
}

/// Fit the count-of-counts view, where Zipf data has slope `−(1 + 1/s)`.
pub fn ls_nk(counts: &CountOfCounts, binned: bool) -> Result<ZipfFit> {
    let (points, method) = if binned {
        let series = bin_dyadic_k(counts);
        if series.points.len() < 2 {
            return Err(Error::Fit(format!(
                "need at least 2 complete k bins, got {}",
                series.points.len()
            )));
        }
        (series.points, FitMethod::NkBinned)
    } else {
        let pts = counts
            .pairs()
            .iter()
            .map(|&(k, n)| (k as f64, n as f64))
            .collect();
        (pts, FitMethod::NkRaw)
    };
    let line = least_squares(&log2_points(points))?;
    let m = line.slope;
    if m >= -1.0 {
        return Err(Error::SlopeIncompatible { slope: m });
    }
    let mut fit = ZipfFit::from_slope(1.0 / (-m - 1.0), method, counts.distinct_count() as usize);
    fit.slope_m = Some(m);
    Ok(fit)
}
