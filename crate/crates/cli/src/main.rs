//! `pwdist`: command-line front end for the password-distribution toolkit.
//!
//! Every subcommand writes its TSV outputs plus a `manifest.json` into
//! `--out-dir`. Exit status: 0 success, 1 usage, 2 input/parse, 3 numeric/fit.

mod commands;
mod input;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use pwdist_core::ingest::CorpusFormat;
use pwdist_core::zipf_fit::FitMethod;
use pwdist_core::{Error, ErrorKind};

#[derive(Debug, Parser)]
#[command(
    name = "pwdist",
    version,
    about = "Password frequency distribution toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for tie-breaking and every random draw [default: 407704117264]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving the outputs and manifest.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Layout of raw corpus inputs: user-tab-password or password-per-line.
    #[arg(long, default_value = "user-tab-password")]
    pub format: CorpusFormat,
}

impl Common {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(pwdist_core::DEFAULT_SEED)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a corpus and export its rank-frequency table.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Export at most this many ranks (statistics still cover all).
        #[arg(long)]
        max_ranks: Option<usize>,
    },
    /// Estimate the Zipf exponent by every requested method.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Corpus or exported table.
        #[arg(long)]
        input: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "ls-raw,ls-binned,nk-raw,nk-binned,mle"
        )]
        methods: Vec<FitMethod>,
        /// Bootstrap replicates for the mle p-value; 0 skips it.
        #[arg(long, default_value_t = 100)]
        replicates: usize,
    },
    /// Guesswork and entropy under uniform, empirical and Zipf models.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Fit method supplying the Zipf exponent.
        #[arg(long, default_value = "ls-binned", conflicts_with = "s")]
        method: FitMethod,
        /// Use this Zipf exponent instead of fitting one.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value_t = pwdist_core::stats::DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Guess curves of a target under its own or another ordering.
    #[command(group(ArgGroup::new("order").args(["reference", "dictionary"])))]
    Curve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: PathBuf,
        /// Corpus or table whose ranking is used as the guess order.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Word list guessed in byte-wise lexical order.
        #[arg(long)]
        dictionary: Option<PathBuf>,
        /// Truncate passwords (and guesses) to this many bytes and merge.
        #[arg(long)]
        truncate: Option<usize>,
        /// Write about ten rows per decade of t instead of every t.
        #[arg(long)]
        log_spaced: bool,
    },
    /// Build a salted hash corpus from a credential corpus.
    Hash {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 3844)]
        salts: usize,
        #[arg(long, default_value = "trunc8-mix64")]
        scheme: String,
    },
    /// Run a guess ordering against a salted hash corpus.
    #[command(group(ArgGroup::new("order").required(true).args(["reference", "dictionary"])))]
    Crack {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hashes: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        dictionary: Option<PathBuf>,
        #[arg(long, default_value = "trunc8-mix64")]
        scheme: String,
        #[arg(long)]
        log_spaced: bool,
    },
    /// Simulate users enrolling behind the Metropolis-Hastings gate.
    MhSim {
        #[command(flatten)]
        common: Common,
        /// key=value simulation config.
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(command: Command) -> pwdist_core::Result<()> {
    match command {
        Command::Ingest {
            common,
            input,
            max_ranks,
        } => commands::ingest(&common, &input, max_ranks),
        Command::Fit {
            common,
            input,
            methods,
            replicates,
        } => commands::fit(&common, &input, &methods, replicates),
        Command::Stats {
            common,
            input,
            method,
            s,
            alpha,
        } => commands::stats(&common, &input, method, s, alpha),
        Command::Curve {
            common,
            target,
            reference,
            dictionary,
            truncate,
            log_spaced,
        } => commands::curve(
            &common,
            &target,
            commands::OrderSource::from_args(reference, dictionary),
            truncate,
            log_spaced,
        ),
        Command::Hash {
            common,
            input,
            salts,
            scheme,
        } => commands::hash(&common, &input, salts, &scheme),
        Command::Crack {
            common,
            hashes,
            reference,
            dictionary,
            scheme,
            log_spaced,
        } => commands::crack(
            &common,
            &hashes,
            commands::OrderSource::from_args(reference, dictionary),
            &scheme,
            log_spaced,
        ),
        Command::MhSim { common, config } => commands::mh_sim(&common, &config),
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Input => 2,
        ErrorKind::Numeric => 3,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Usage => "usage",
        ErrorKind::Input => "input",
        ErrorKind::Numeric => "numeric",
    }
}

/// One machine-readable line: `error<TAB>kind<TAB>message`.
fn report(err: &Error) -> ExitCode {
    let kind = err.kind();
    let message = err.to_string().replace(['\t', '\n'], " ");
    eprintln!("error\t{}\t{message}", kind_name(kind));
    ExitCode::from(exit_code(kind))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let informational = !e.use_stderr();
            let _ = e.print();
            if informational {
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error\tusage\t{first}");
            return ExitCode::from(exit_code(ErrorKind::Usage));
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_by_kind() {
        assert_eq!(exit_code(Error::Argument("x".into()).kind()), 1);
        assert_eq!(exit_code(Error::EmptyCorpus.kind()), 2);
        assert_eq!(exit_code(Error::Fit("x".into()).kind()), 3);
    }

    #[test]
    fn methods_parse_as_list() {
        let cli = Cli::try_parse_from(["pwdist", "fit", "--input", "t", "--methods", "mle,ls-raw"])
            .unwrap();
        match cli.command {
            Command::Fit { methods, .. } => {
                assert_eq!(methods, vec![FitMethod::Mle, FitMethod::LsRaw])
            }
            other => panic!("{other:?}"),
        }
        assert!(
            Cli::try_parse_from(["pwdist", "fit", "--input", "t", "--methods", "bogus"]).is_err()
        );
    }

    #[test]
    fn crack_needs_an_ordering() {
        assert!(Cli::try_parse_from(["pwdist", "crack", "--hashes", "h"]).is_err());
        assert!(
            Cli::try_parse_from(["pwdist", "crack", "--hashes", "h", "--dictionary", "d"]).is_ok()
        );
    }

    #[test]
    fn default_seed_documented_in_help() {
        assert_eq!(pwdist_core::DEFAULT_SEED, 407_704_117_264);
    }
}
