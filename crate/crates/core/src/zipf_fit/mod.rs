//! Zipf exponent estimation.
//!
//! All least-squares fits regress base-2 logarithms. Binning is dyadic: bin
//! `n` covers `[2ⁿ, 2ⁿ⁺¹−1]`, the ordinate is the bin mean (sum ÷ width) and
//! the abscissa the geometric mean of the bin's endpoints. A final bin that
//! extends past the data is dropped, as are empty bins.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::{Error, Result};

mod bootstrap;
mod least_squares;
mod mle;

pub use bootstrap::{bootstrap, bootstrap_p_value, weighted_ks_statistic, BootstrapResult};
pub use least_squares::{bin_dyadic_k, bin_dyadic_rank, ls_binned_rank, ls_nk, ls_raw_rank};
pub use mle::{
    mle_from_counts, mle_truncated_zipf, truncated_zipf_log_likelihood, MleEstimate, ZipfSampler,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitMethod {
    LsRaw,
    LsBinned,
    NkRaw,
    NkBinned,
    Mle,
}

impl FitMethod {
    pub const ALL: [FitMethod; 5] = [
        FitMethod::LsRaw,
        FitMethod::LsBinned,
        FitMethod::NkRaw,
        FitMethod::NkBinned,
        FitMethod::Mle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::LsRaw => "ls-raw",
            FitMethod::LsBinned => "ls-binned",
            FitMethod::NkRaw => "nk-raw",
            FitMethod::NkBinned => "nk-binned",
            FitMethod::Mle => "mle",
        }
    }
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FitMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown fit method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZipfFit {
    /// Zipf exponent; `0.0` only together with `at_zero_boundary`.
    pub s: f64,
    pub method: FitMethod,
    /// Fitted log-log slope of the n_k view; `s = 1/(−slope_m − 1)`.
    pub slope_m: Option<f64>,
    pub stderr: Option<f64>,
    pub p_value: Option<f64>,
    /// Number of ranks in the truncated model.
    pub truncation_n: usize,
    /// The estimate sits on the `s = 0` boundary (flat data).
    pub at_zero_boundary: bool,
}

impl ZipfFit {
    pub(crate) fn from_slope(s: f64, method: FitMethod, truncation_n: usize) -> Self {
        // Non-increasing data cannot give a positive rank slope; clamp the
        // -0.0/rounding case.
        let at_zero_boundary = s <= 1e-12;
        ZipfFit {
            s: if at_zero_boundary { 0.0 } else { s },
            method,
            slope_m: None,
            stderr: None,
            p_value: None,
            truncation_n,
            at_zero_boundary,
        }
    }
}

/// Log-log points prepared for plotting or regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRule {
    DyadicRank,
    DyadicK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSeries {
    pub points: Vec<(f64, f64)>,
    pub bin_rule: BinRule,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub const FIT_REPORT_HEADER: &str = "method\ts\tslope_m\tstderr\tp_value\tN";

pub fn write_fit_report<W: Write>(w: &mut W, fits: &[ZipfFit]) -> std::io::Result<()> {
    writeln!(w, "{FIT_REPORT_HEADER}")?;
    for f in fits {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            f.method,
            f.s,
            fmt_opt(f.slope_m),
            fmt_opt(f.stderr),
            fmt_opt(f.p_value),
            f.truncation_n
        )?;
    }
    Ok(())
}

/// Parse a report written by [`write_fit_report`].
pub fn read_fit_report(text: &str) -> Result<Vec<ZipfFit>> {
    let mut lines = text.lines();
    if lines.next() != Some(FIT_REPORT_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{FIT_REPORT_HEADER}`"),
        });
    }
    let opt = |s: &str| -> Option<Option<f64>> {
        if s == "NA" {
            Some(None)
        } else {
            s.parse().ok().map(Some)
        }
    };
    let mut out = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let err = || Error::Parse {
            line: i + 2,
            message: "malformed fit row".into(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(err());
        }
        let s: f64 = f[1].parse().map_err(|_| err())?;
        out.push(ZipfFit {
            s,
            method: f[0].parse()?,
            slope_m: opt(f[2]).ok_or_else(err)?,
            stderr: opt(f[3]).ok_or_else(err)?,
            p_value: opt(f[4]).ok_or_else(err)?,
            truncation_n: f[5].parse().map_err(|_| err())?,
            at_zero_boundary: s == 0.0,
        });
    }
    Ok(out)
}

pub fn write_binned_series<W: Write>(w: &mut W, series: &BinnedSeries) -> std::io::Result<()> {
    writeln!(w, "x\ty")?;
    for (x, y) in &series.points {
        writeln!(w, "{x}\t{y}")?;
    }
    Ok(())
}
