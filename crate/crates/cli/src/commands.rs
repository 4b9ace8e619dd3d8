use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pwdist_core::crack::{
    self, builtin_scheme, hash_corpus, read_hash_corpus, write_cracked, write_hash_corpus,
};
use pwdist_core::crossguess::{
    cross_curve, dictionary_ordering, self_curve, truncate_reaggregate, CurveMetric, GuessCurve,
    GuessOrdering,
};
use pwdist_core::ingest::{cleanup, parse_corpus};
use pwdist_core::mh_uniform::{
    self, simulate, LabeledSource, SimConfigFile, SourceSpec, TargetWeight,
};
use pwdist_core::stats::{self, guess_stats, StatsReport};
use pwdist_core::tsv::write_table;
use pwdist_core::zipf_fit::{
    self, bin_dyadic_k, bin_dyadic_rank, bootstrap, ls_binned_rank, ls_nk, ls_raw_rank,
    mle_truncated_zipf, FitMethod, ZipfFit,
};
use pwdist_core::{Error, Execution, RankFrequencyTable, Result};

use crate::input::{load_corpus, load_table, read_bytes, read_word_list};
use crate::manifest::Run;
use crate::Common;

fn start(name: &str, common: &Common) -> Run {
    let mut run = Run::new(name, &common.out_dir);
    run.seed("seed", common.seed());
    run.param("format", common.format);
    run
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn warn(what: &str, message: impl std::fmt::Display) {
    let message = message.to_string().replace(['\t', '\n'], " ");
    eprintln!("warning\t{what}\t{message}");
}

pub fn ingest(common: &Common, input: &Path, max_ranks: Option<usize>) -> Result<()> {
    let mut run = start("ingest", common);
    if let Some(m) = max_ranks {
        run.param("max_ranks", m);
    }
    let summary = load_corpus(&mut run, input, common.format, common.seed())?;
    if summary.malformed > 0 {
        warn(
            "ingest",
            format!("{} malformed lines skipped", summary.malformed),
        );
    }
    run.output(
        "table.tsv",
        render(|w| write_table(w, &summary.table, max_ranks))?,
    )?;
    run.output(
        "ingest_summary.tsv",
        render(|w| {
            writeln!(w, "lines\tmalformed\tusers\tdistinct")?;
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                summary.lines,
                summary.malformed,
                summary.users,
                summary.table.distinct_count()
            )
        })?,
    )?;
    run.finish()?;
    Ok(())
}

fn fit_one(
    table: &RankFrequencyTable,
    method: FitMethod,
    replicates: usize,
    seed: u64,
) -> Result<ZipfFit> {
    match method {
        FitMethod::LsRaw => ls_raw_rank(table),
        FitMethod::LsBinned => ls_binned_rank(table),
        FitMethod::NkRaw => ls_nk(&table.count_of_counts(), false),
        FitMethod::NkBinned => ls_nk(&table.count_of_counts(), true),
        FitMethod::Mle => {
            let mut fit = mle_truncated_zipf(table)?;
            if replicates > 0 {
                fit.p_value =
                    Some(bootstrap(table, &fit, replicates, seed, Execution::default())?.p_value);
            }
            Ok(fit)
        }
    }
}

pub fn fit(common: &Common, input: &Path, methods: &[FitMethod], replicates: usize) -> Result<()> {
    let mut run = start("fit", common);
    let names: Vec<&str> = methods.iter().map(|m| m.as_str()).collect();
    run.param("methods", names.join(","));
    run.param("replicates", replicates);
    let table = load_table(&mut run, input, common.format, common.seed())?;

    let mut fits = Vec::new();
    let mut last_err = None;
    for &method in methods {
        match fit_one(&table, method, replicates, common.seed()) {
            Ok(f) => {
                if f.at_zero_boundary {
                    warn("fit", format!("{method}: flat slope, s = 0 boundary"));
                }
                fits.push(f);
            }
            Err(e) => {
                warn("fit", format!("{method}: {e}"));
                last_err = Some(e);
            }
        }
    }
    if fits.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::Argument("no fit methods requested".into())));
    }
    run.output("fit.tsv", render(|w| zipf_fit::write_fit_report(w, &fits))?)?;
    run.output(
        "binned_rank.tsv",
        render(|w| zipf_fit::write_binned_series(w, &bin_dyadic_rank(&table)))?,
    )?;
    run.output(
        "binned_nk.tsv",
        render(|w| zipf_fit::write_binned_series(w, &bin_dyadic_k(&table.count_of_counts())))?,
    )?;
    run.finish()?;
    Ok(())
}

pub fn stats(
    common: &Common,
    input: &Path,
    method: FitMethod,
    s: Option<f64>,
    alpha: f64,
) -> Result<()> {
    let mut run = start("stats", common);
    run.param("alpha", alpha);
    let table = load_table(&mut run, input, common.format, common.seed())?;
    let s = match s {
        Some(s) if s.is_finite() && s >= 0.0 => s,
        Some(s) => {
            return Err(Error::Argument(format!(
                "zipf exponent must be finite and >= 0, got {s}"
            )))
        }
        None => {
            run.param("method", method);
            // The bootstrap only feeds the p-value, which stats does not use.
            fit_one(&table, method, 0, common.seed())?.s
        }
    };
    run.param("zipf_s", s);
    let n = table.distinct_count();
    let report = StatsReport {
        uniform: guess_stats(&stats::uniform_model(n)?, alpha)?,
        empirical: guess_stats(&stats::empirical_model(&table), alpha)?,
        zipf: guess_stats(&stats::zipf_model(s, n)?, alpha)?,
    };
    run.output(
        "stats.tsv",
        render(|w| stats::write_stats_report(w, &report))?,
    )?;
    run.finish()?;
    Ok(())
}

pub enum OrderSource {
    Own,
    Reference(PathBuf),
    Dictionary(PathBuf),
}

impl OrderSource {
    pub fn from_args(reference: Option<PathBuf>, dictionary: Option<PathBuf>) -> Self {
        match (reference, dictionary) {
            (Some(r), _) => OrderSource::Reference(r),
            (None, Some(d)) => OrderSource::Dictionary(d),
            (None, None) => OrderSource::Own,
        }
    }

    fn record(&self, run: &mut Run) {
        match self {
            OrderSource::Own => run.param("ordering", "own"),
            OrderSource::Reference(_) => run.param("ordering", "reference"),
            OrderSource::Dictionary(_) => run.param("ordering", "dictionary"),
        }
    }
}

fn truncate_words(words: Vec<Vec<u8>>, truncate: Option<usize>) -> Vec<Vec<u8>> {
    match truncate {
        Some(n) => words
            .into_iter()
            .map(|mut w| {
                w.truncate(n);
                w
            })
            .collect(),
        None => words,
    }
}

fn maybe_truncate(
    table: RankFrequencyTable,
    truncate: Option<usize>,
    seed: u64,
) -> Result<RankFrequencyTable> {
    match truncate {
        Some(n) => truncate_reaggregate(&table, n, seed),
        None => Ok(table),
    }
}

fn write_curve(run: &mut Run, name: &str, curve: &GuessCurve, log_spaced: bool) -> Result<()> {
    run.output(name, render(|w| curve.write_tsv(w, log_spaced))?)?;
    Ok(())
}

pub fn curve(
    common: &Common,
    target: &Path,
    order: OrderSource,
    truncate: Option<usize>,
    log_spaced: bool,
) -> Result<()> {
    let mut run = start("curve", common);
    let seed = common.seed();
    order.record(&mut run);
    if let Some(n) = truncate {
        run.param("truncate", n);
    }
    run.param("log_spaced", log_spaced);
    let target = maybe_truncate(
        load_table(&mut run, target, common.format, seed)?,
        truncate,
        seed,
    )?;
    let ordering = match &order {
        OrderSource::Own => None,
        OrderSource::Reference(path) => {
            let reference = maybe_truncate(
                load_table(&mut run, path, common.format, seed)?,
                truncate,
                seed,
            )?;
            Some(GuessOrdering::from_table(
                &reference,
                path.display().to_string(),
            ))
        }
        OrderSource::Dictionary(path) => {
            let words = truncate_words(read_word_list(&mut run, path)?, truncate);
            Some(dictionary_ordering(words, path.display().to_string()))
        }
    };
    for (metric, name) in [
        (CurveMetric::Users, "curve_users.tsv"),
        (CurveMetric::DistinctPasswords, "curve_distinct.tsv"),
    ] {
        let curve = match &ordering {
            None => self_curve(&target, metric),
            Some(o) => cross_curve(o, &target, metric),
        };
        write_curve(&mut run, name, &curve, log_spaced)?;
    }
    run.finish()?;
    Ok(())
}

pub fn hash(common: &Common, input: &Path, salts: usize, scheme: &str) -> Result<()> {
    let mut run = start("hash", common);
    run.param("salts", salts);
    run.param("scheme", scheme);
    let scheme = builtin_scheme(scheme)?;
    let bytes = read_bytes(&mut run, input)?;
    let parsed = parse_corpus(&bytes[..], common.format)?;
    if parsed.malformed > 0 {
        warn(
            "hash",
            format!("{} malformed lines skipped", parsed.malformed),
        );
    }
    let records = cleanup(parsed.records);
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let entries = hash_corpus(&records, scheme.as_ref(), common.seed(), salts)?;
    run.output("hashes.tsv", render(|w| write_hash_corpus(w, &entries))?)?;
    run.finish()?;
    Ok(())
}

pub fn crack(
    common: &Common,
    hashes: &Path,
    order: OrderSource,
    scheme: &str,
    log_spaced: bool,
) -> Result<()> {
    let mut run = start("crack", common);
    let seed = common.seed();
    order.record(&mut run);
    run.param("scheme", scheme);
    run.param("log_spaced", log_spaced);
    let scheme = builtin_scheme(scheme)?;
    let entries = read_hash_corpus(&read_bytes(&mut run, hashes)?[..])?;
    // Guess lists are cut to what the scheme actually hashes and merged, so
    // the ordering ranks the truncated guesses by their combined counts.
    let truncate = scheme.truncate_len();
    let ordering = match &order {
        OrderSource::Reference(path) => {
            let reference = maybe_truncate(
                load_table(&mut run, path, common.format, seed)?,
                truncate,
                seed,
            )?;
            GuessOrdering::from_table(&reference, path.display().to_string())
        }
        OrderSource::Dictionary(path) => {
            let words = truncate_words(read_word_list(&mut run, path)?, truncate);
            dictionary_ordering(words, path.display().to_string())
        }
        OrderSource::Own => {
            return Err(Error::Argument(
                "crack needs --reference or --dictionary".into(),
            ))
        }
    };

    let started = Instant::now();
    let report = crack::crack_with(&entries, &ordering, scheme.as_ref(), Execution::default());
    let secs = started.elapsed().as_secs_f64();
    // Throughput is hardware dependent, so it goes to the diagnostic stream
    // rather than into the reproducible outputs.
    eprintln!(
        "info\tcrack\t{} hash evaluations in {secs:.3}s ({:.0}/s)",
        report.hash_evaluations,
        report.hash_evaluations as f64 / secs.max(1e-9)
    );

    write_curve(&mut run, "curve_users.tsv", &report.curve_users, log_spaced)?;
    write_curve(
        &mut run,
        "curve_distinct.tsv",
        &report.curve_distinct,
        log_spaced,
    )?;
    run.output(
        "cracked.tsv",
        render(|w| write_cracked(w, &report.cracked))?,
    )?;
    run.output(
        "crack_summary.tsv",
        render(|w| {
            writeln!(w, "entries\tcracked\tuncracked\thash_evaluations")?;
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                entries.len(),
                report.cracked.len(),
                report.uncracked_count,
                report.hash_evaluations
            )
        })?,
    )?;
    run.finish()?;
    Ok(())
}

/// Paths inside a config file are relative to the file itself.
fn resolve(config: &Path, path: &Path) -> PathBuf {
    match config.parent() {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

pub fn mh_sim(common: &Common, config_path: &Path) -> Result<()> {
    let mut run = Run::new("mh-sim", &common.out_dir);
    let text = read_bytes(&mut run, config_path)?;
    let text = String::from_utf8(text).map_err(|_| Error::Parse {
        line: 0,
        message: "config is not UTF-8".into(),
    })?;
    let mut cfg = SimConfigFile::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    run.seed("seed", cfg.sim.seed);

    let source = match &cfg.source {
        SourceSpec::Zipf { s, n } => LabeledSource::zipf(*s, *n)?,
        SourceSpec::Uniform { n } => LabeledSource::new(
            (1..=*n).map(|i| format!("u{i}").into_bytes()).collect(),
            stats::uniform_model(*n)?,
        )?,
        SourceSpec::Table(path) => {
            let table = load_table(
                &mut run,
                &resolve(config_path, path),
                common.format,
                cfg.sim.seed,
            )?;
            LabeledSource::from_table(&table)
        }
    };
    let mut weights = TargetWeight::uniform();
    if let Some(path) = &cfg.ban_list {
        weights = weights.ban(read_word_list(&mut run, &resolve(config_path, path))?);
    }
    if let Some(path) = &cfg.soft_ban_list {
        weights = weights.soft_ban(
            read_word_list(&mut run, &resolve(config_path, path))?,
            cfg.soft_ban_weight,
        )?;
    }

    let report = simulate(&source, &cfg.sim, weights)?;
    run.output(
        "accepted.tsv",
        render(|w| write_table(w, &report.accepted_table, None))?,
    )?;
    run.output(
        "free.tsv",
        render(|w| write_table(w, &report.free_table, None))?,
    )?;
    run.output(
        "summary.tsv",
        render(|w| mh_uniform::write_summary(w, &report))?,
    )?;
    run.finish()?;
    Ok(())
}
