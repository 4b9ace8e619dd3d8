//! `key=value` simulation config files.
//!
//! ```text
//! # proposal source: zipf:<s>:<n>, uniform:<n> or table:<path>
//! source = zipf:0.78:100000
//! n_users = 100000
//! backend = exact            # or count-min
//! w = 262144
//! d = 4
//! seed = 7
//! retry_cap = 100
//! seen = distinct            # or proposals
//! ban_list = banned.txt      # optional, one password per line
//! soft_ban_list = soft.txt   # optional
//! soft_ban_weight = 0.5
//! ```

use std::path::PathBuf;

use super::{
    SimulationConfig, StoreConfig, DEFAULT_RETRY_CAP, DEFAULT_SKETCH_DEPTH, DEFAULT_SKETCH_WIDTH,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Zipf { s: f64, n: usize },
    Uniform { n: usize },
    Table(PathBuf),
}

impl std::str::FromStr for SourceSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("bad source spec `{spec}`"));
        let parts: Vec<&str> = spec.splitn(3, ':').collect();
        match parts.as_slice() {
            ["zipf", s, n] => Ok(SourceSpec::Zipf {
                s: s.parse().map_err(|_| bad())?,
                n: n.parse().map_err(|_| bad())?,
            }),
            ["uniform", n] => Ok(SourceSpec::Uniform {
                n: n.parse().map_err(|_| bad())?,
            }),
            ["table", rest @ ..] if !rest.is_empty() => {
                Ok(SourceSpec::Table(PathBuf::from(rest.join(":"))))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfigFile {
    pub source: SourceSpec,
    pub sim: SimulationConfig,
    pub ban_list: Option<PathBuf>,
    pub soft_ban_list: Option<PathBuf>,
    pub soft_ban_weight: f64,
}

impl SimConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut source = None;
        let mut sim = SimulationConfig::default();
        let mut backend = "exact".to_string();
        let (mut width, mut depth) = (DEFAULT_SKETCH_WIDTH, DEFAULT_SKETCH_DEPTH);
        let mut ban_list = None;
        let mut soft_ban_list = None;
        let mut soft_ban_weight = 0.5;
        sim.retry_cap = DEFAULT_RETRY_CAP;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::Parse {
                line: i + 1,
                message: m,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected key=value".into()))?;
            let num = |v: &str| -> Result<u64> {
                v.parse().map_err(|_| err(format!("bad number for {key}")))
            };
            match key {
                "source" => source = Some(value.parse()?),
                "n_users" => sim.n_users = num(value)?,
                "backend" => backend = value.to_string(),
                "w" => width = num(value)? as usize,
                "d" => depth = num(value)? as usize,
                "seed" => sim.seed = num(value)?,
                "retry_cap" => sim.retry_cap = num(value)? as u32,
                "seen" => sim.seen_mode = value.parse()?,
                "ban_list" => ban_list = Some(PathBuf::from(value)),
                "soft_ban_list" => soft_ban_list = Some(PathBuf::from(value)),
                "soft_ban_weight" => {
                    soft_ban_weight = value
                        .parse()
                        .map_err(|_| err("bad soft_ban_weight".into()))?
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        sim.store = match backend.as_str() {
            "exact" => StoreConfig::Exact,
            "count-min" => StoreConfig::CountMin {
                width,
                depth,
                seed: sim.seed,
            },
            other => return Err(Error::Argument(format!("unknown backend `{other}`"))),
        };
        Ok(Self {
            source: source.ok_or_else(|| Error::Argument("config needs a `source`".into()))?,
            sim,
            ban_list,
            soft_ban_list,
            soft_ban_weight,
        })
    }

    /// Replace the seed everywhere it is used.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.sim.seed = seed;
        if let StoreConfig::CountMin { seed: s, .. } = &mut self.sim.store {
            *s = seed;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mh_uniform::SeenMode;

    #[test]
    fn parses_full_config() {
        let cfg = SimConfigFile::parse(
            "# comment\nsource = zipf:0.78:100000\nn_users=500\nbackend = count-min\nw = 1024\nd=3\nseed = 9\nseen = proposals\nban_list = b.txt\n",
        )
        .unwrap();
        assert_eq!(
            cfg.source,
            SourceSpec::Zipf {
                s: 0.78,
                n: 100_000
            }
        );
        assert_eq!(cfg.sim.n_users, 500);
        assert_eq!(
            cfg.sim.store,
            StoreConfig::CountMin {
                width: 1024,
                depth: 3,
                seed: 9
            }
        );
        assert_eq!(cfg.sim.seen_mode, SeenMode::Proposals);
        assert_eq!(cfg.ban_list, Some(PathBuf::from("b.txt")));
        assert_eq!(
            cfg.with_seed(4).sim.store,
            StoreConfig::CountMin {
                width: 1024,
                depth: 3,
                seed: 4
            }
        );
    }

    #[test]
    fn defaults_and_errors() {
        let cfg = SimConfigFile::parse("source=table:/tmp/a:b.tsv").unwrap();
        assert_eq!(cfg.source, SourceSpec::Table(PathBuf::from("/tmp/a:b.tsv")));
        assert_eq!(cfg.sim.store, StoreConfig::Exact);
        assert_eq!(cfg.sim.retry_cap, DEFAULT_RETRY_CAP);
        assert!(SimConfigFile::parse("n_users=3").is_err());
        assert!(SimConfigFile::parse("source=zipf:x:1").is_err());
        assert!(SimConfigFile::parse("source=uniform:3\nbogus=1").is_err());
        assert!(SimConfigFile::parse("source=uniform:3\nbackend=bloom").is_err());
    }
}
