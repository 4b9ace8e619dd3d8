//! Metropolis-Hastings gate that nudges users towards a uniform spread of
//! passwords.
//!
//! For each user: pick a comparison password `x` from the history and
//! snapshot `F(x)` (0 on an empty history). Then repeatedly ask for a
//! proposal `x′`, draw `u` uniformly on `[0, F(x′)]`, increment `F(x′)`, and
//! accept when `u·w(x) ≤ F(x)·w(x′)`. With unit weights this is `u ≤ F(x)`.
//! `x` stays fixed across re-asks within a session.
//!
//! Zero weight bans a password outright; a weight in `(0, 1)` soft-bans it.

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::hashing::derive_seed;
use crate::ingest::RankFrequencyTable;
use crate::stats::{empirical_model, zipf_model, ProbabilityModel};
use crate::{Error, Result};

mod config;
mod sketch;

pub use config::{SimConfigFile, SourceSpec};
pub use sketch::{
    CountMinSketch, ExactStore, FrequencyStore, StoreConfig, DEFAULT_SKETCH_DEPTH,
    DEFAULT_SKETCH_WIDTH,
};

pub const DEFAULT_RETRY_CAP: u32 = 100;

/// Target weights `P(·)` up to scale; unlisted passwords weigh 1.
#[derive(Debug, Clone, Default)]
pub struct TargetWeight {
    overrides: HashMap<Vec<u8>, f64>,
}

impl TargetWeight {
    pub fn uniform() -> Self {
        Self::default()
    }

    pub fn ban<I: IntoIterator<Item = Vec<u8>>>(mut self, passwords: I) -> Self {
        for p in passwords {
            self.overrides.insert(p, 0.0);
        }
        self
    }

    pub fn soft_ban<I: IntoIterator<Item = Vec<u8>>>(
        mut self,
        passwords: I,
        weight: f64,
    ) -> Result<Self> {
        if !(weight > 0.0 && weight < 1.0) {
            return Err(Error::Argument(format!(
                "soft-ban weight must lie in (0, 1), got {weight}"
            )));
        }
        for p in passwords {
            self.overrides.insert(p, weight);
        }
        Ok(self)
    }

    pub fn weight(&self, password: &[u8]) -> f64 {
        self.overrides.get(password).copied().unwrap_or(1.0)
    }
}

/// Population that the comparison password is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeenMode {
    /// Uniform over distinct passwords ever proposed.
    #[default]
    Distinct,
    /// Uniform over the multiset of all proposals, accepted or rejected.
    Proposals,
}

impl FromStr for SeenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distinct" => Ok(SeenMode::Distinct),
            "proposals" => Ok(SeenMode::Proposals),
            other => Err(Error::Argument(format!("unknown seen mode `{other}`"))),
        }
    }
}

/// Interned log of every submitted proposal.
#[derive(Debug, Clone, Default)]
pub struct SeenHistory {
    mode: SeenMode,
    pool: Vec<Vec<u8>>,
    ids: HashMap<Vec<u8>, u32>,
    log: Vec<u32>,
}

impl SeenHistory {
    pub fn new(mode: SeenMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn record(&mut self, password: &[u8]) {
        let id = match self.ids.get(password) {
            Some(&id) => id,
            None => {
                let id = self.pool.len() as u32;
                self.pool.push(password.to_vec());
                self.ids.insert(password.to_vec(), id);
                id
            }
        };
        self.log.push(id);
    }

    pub fn proposals(&self) -> usize {
        self.log.len()
    }

    pub fn distinct(&self) -> usize {
        self.pool.len()
    }

    /// `None` on an empty history.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&[u8]> {
        let id = match self.mode {
            SeenMode::Distinct if !self.pool.is_empty() => rng.random_range(0..self.pool.len()),
            SeenMode::Proposals if !self.log.is_empty() => {
                self.log[rng.random_range(0..self.log.len())] as usize
            }
            _ => return None,
        };
        Some(&self.pool[id])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub accepted_password: Vec<u8>,
    pub asks: u32,
}

/// Frequency store, proposal history and target weights shared by every
/// session. Single writer.
pub struct MhGate {
    store: Box<dyn FrequencyStore>,
    history: SeenHistory,
    weights: TargetWeight,
    retry_cap: u32,
}

impl MhGate {
    pub fn new(
        store: Box<dyn FrequencyStore>,
        mode: SeenMode,
        weights: TargetWeight,
        retry_cap: u32,
    ) -> Self {
        Self {
            store,
            history: SeenHistory::new(mode),
            weights,
            retry_cap: retry_cap.max(1),
        }
    }

    pub fn store(&self) -> &dyn FrequencyStore {
        self.store.as_ref()
    }

    pub fn store_mut(&mut self) -> &mut dyn FrequencyStore {
        self.store.as_mut()
    }

    pub fn history(&self) -> &SeenHistory {
        &self.history
    }

    /// Run one user's session, pulling proposals until one is accepted.
    pub fn session<I, P, R>(&mut self, proposals: I, rng: &mut R) -> Result<SessionOutcome>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[u8]>,
        R: Rng + ?Sized,
    {
        let (f_x, w_x) = match self.history.sample(rng) {
            Some(x) => (self.store.query(x) as f64, self.weights.weight(x)),
            None => (0.0, 1.0),
        };
        let mut proposals = proposals.into_iter();
        let mut asks = 0u32;
        loop {
            if asks >= self.retry_cap {
                return Err(Error::BannedExhaustion { asks });
            }
            let candidate = proposals
                .next()
                .ok_or_else(|| Error::Argument("proposal stream exhausted".into()))?;
            let candidate = candidate.as_ref();
            asks += 1;
            let f_candidate = self.store.query(candidate) as f64;
            let u = rng.random::<f64>() * f_candidate;
            self.store.increment(candidate);
            self.history.record(candidate);
            let w_candidate = self.weights.weight(candidate);
            if w_candidate > 0.0 && u * w_x <= f_x * w_candidate {
                return Ok(SessionOutcome {
                    accepted_password: candidate.to_vec(),
                    asks,
                });
            }
        }
    }
}

/// A proposal distribution `Q(·)` with a password label per rank.
#[derive(Debug, Clone)]
pub struct LabeledSource {
    labels: Vec<Vec<u8>>,
    model: ProbabilityModel,
}

impl LabeledSource {
    pub fn new(labels: Vec<Vec<u8>>, model: ProbabilityModel) -> Result<Self> {
        if labels.len() != model.len() {
            return Err(Error::Argument("one label per model rank required".into()));
        }
        Ok(Self { labels, model })
    }

    /// Proposals proportional to the table's counts.
    pub fn from_table(table: &RankFrequencyTable) -> Self {
        Self {
            labels: table.passwords().to_vec(),
            model: empirical_model(table),
        }
    }

    /// Truncated Zipf(s, n) with labels `z1, z2, ...`.
    pub fn zipf(s: f64, n: usize) -> Result<Self> {
        Ok(Self {
            labels: (1..=n).map(|i| format!("z{i}").into_bytes()).collect(),
            model: zipf_model(s, n)?,
        })
    }

    pub fn labels(&self) -> &[Vec<u8>] {
        &self.labels
    }

    pub fn model(&self) -> &ProbabilityModel {
        &self.model
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_users: u64,
    pub store: StoreConfig,
    pub seen_mode: SeenMode,
    pub retry_cap: u32,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_users: 1_000_000,
            store: StoreConfig::Exact,
            seen_mode: SeenMode::default(),
            retry_cap: DEFAULT_RETRY_CAP,
            seed: crate::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub accepted_table: RankFrequencyTable,
    /// Each user's first proposal, as if every choice were allowed.
    pub free_table: RankFrequencyTable,
    pub mean_asks: f64,
    /// Population variance of asks per user.
    pub var_asks: f64,
    pub rejected_total: u64,
}

/// Simulate `n_users` arriving one after another, each proposing i.i.d.
/// passwords from `source` until the gate accepts.
pub fn simulate(
    source: &LabeledSource,
    config: &SimulationConfig,
    weights: TargetWeight,
) -> Result<SimulationReport> {
    if config.n_users == 0 {
        return Err(Error::Argument("n_users must be at least 1".into()));
    }
    let alias = WeightedAliasIndex::new(source.model.probs().to_vec())
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let mut proposal_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 1));
    let mut gate_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 2));
    let mut gate = MhGate::new(
        config.store.build()?,
        config.seen_mode,
        weights,
        config.retry_cap,
    );

    let n = source.labels.len();
    let mut accepted = vec![0u64; n];
    let mut free = vec![0u64; n];
    let mut ask_sum = 0u64;
    let mut ask_sq = 0u64;
    let mut last_pick = 0usize;
    for _ in 0..config.n_users {
        let first = alias.sample(&mut proposal_rng);
        free[first] += 1;
        let mut pending = Some(first);
        let picks = std::iter::from_fn(|| {
            let i = pending
                .take()
                .unwrap_or_else(|| alias.sample(&mut proposal_rng));
            last_pick = i;
            Some(source.labels[i].as_slice())
        });
        let outcome = gate.session(picks, &mut gate_rng)?;
        accepted[last_pick] += 1;
        let a = u64::from(outcome.asks);
        ask_sum += a;
        ask_sq += a * a;
    }

    let users = config.n_users as f64;
    let mean = ask_sum as f64 / users;
    let var = (ask_sq as f64 / users - mean * mean).max(0.0);
    let to_table = |counts: Vec<u64>| {
        RankFrequencyTable::from_counts(
            source
                .labels
                .iter()
                .cloned()
                .zip(counts)
                .filter(|(_, c)| *c > 0),
            config.seed,
        )
    };
    Ok(SimulationReport {
        accepted_table: to_table(accepted)?,
        free_table: to_table(free)?,
        mean_asks: mean,
        var_asks: var,
        rejected_total: ask_sum - config.n_users,
    })
}

pub const SUMMARY_HEADER: &str =
    "n_users\tmean_asks\tvar_asks\trejected_total\tmax_accepted\tmax_free";

pub fn write_summary<W: Write>(w: &mut W, report: &SimulationReport) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    writeln!(
        w,
        "{}\t{}\t{}\t{}\t{}\t{}",
        report.accepted_table.total_users(),
        report.mean_asks,
        report.var_asks,
        report.rejected_total,
        report.accepted_table.counts()[0],
        report.free_table.counts()[0]
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gate(mode: SeenMode) -> MhGate {
        MhGate::new(
            Box::new(ExactStore::new()),
            mode,
            TargetWeight::uniform(),
            DEFAULT_RETRY_CAP,
        )
    }

    #[test]
    fn cold_start_accepts_first_proposal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = gate(SeenMode::Proposals);
        let out = g.session([b"anything".as_slice()], &mut rng).unwrap();
        assert_eq!(
            out,
            SessionOutcome {
                accepted_password: b"anything".to_vec(),
                asks: 1
            }
        );
        assert_eq!(g.store().query(b"anything"), 1);
    }

    #[test]
    fn popular_proposal_rejected_against_zero_frequency() {
        // The store is primed but the history is empty, so F(x) = 0.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut g = gate(SeenMode::Proposals);
        for _ in 0..1000 {
            g.store_mut().increment(b"123456");
        }
        let out = g
            .session([b"123456".as_slice(), b"123456", b"fresh"], &mut rng)
            .unwrap();
        assert_eq!(out.accepted_password, b"fresh");
        assert_eq!(out.asks, 3);
        assert_eq!(g.store().query(b"123456"), 1002);
    }

    #[test]
    fn banned_password_never_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let weights = TargetWeight::uniform().ban([b"123456".to_vec()]);
        let mut g = MhGate::new(Box::new(ExactStore::new()), SeenMode::Distinct, weights, 7);
        let err = g
            .session(std::iter::repeat(b"123456".as_slice()), &mut rng)
            .unwrap_err();
        assert!(matches!(err, Error::BannedExhaustion { asks: 7 }));
        let out = g.session([b"123456".as_slice(), b"ok"], &mut rng).unwrap();
        assert_eq!(out.accepted_password, b"ok");
    }

    #[test]
    fn exhausted_stream_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = gate(SeenMode::Distinct);
        assert!(g.session(Vec::<Vec<u8>>::new(), &mut rng).is_err());
    }

    #[test]
    fn soft_ban_validation() {
        assert!(TargetWeight::uniform()
            .soft_ban([b"a".to_vec()], 1.0)
            .is_err());
        let w = TargetWeight::uniform()
            .soft_ban([b"a".to_vec()], 0.25)
            .unwrap();
        assert_eq!(w.weight(b"a"), 0.25);
        assert_eq!(w.weight(b"b"), 1.0);
    }

    fn chi_square_two(observed_a: u64, total: u64, p_a: f64) -> f64 {
        let ea = total as f64 * p_a;
        let eb = total as f64 - ea;
        let ob = (total - observed_a) as f64;
        (observed_a as f64 - ea).powi(2) / ea + (ob - eb).powi(2) / eb
    }

    #[test]
    fn seen_sampler_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (mode, p_a) in [(SeenMode::Proposals, 2.0 / 3.0), (SeenMode::Distinct, 0.5)] {
            let mut h = SeenHistory::new(mode);
            assert!(h.sample(&mut rng).is_none());
            h.record(b"a");
            assert_eq!(h.sample(&mut rng), Some(&b"a"[..]));
            h.record(b"a");
            h.record(b"b");
            let draws = 10_000;
            let a = (0..draws)
                .filter(|_| h.sample(&mut rng) == Some(b"a"))
                .count() as u64;
            // 1 degree of freedom, p = 0.001 critical value.
            assert!(chi_square_two(a, draws, p_a) < 10.83, "{mode:?}: {a}");
        }
    }

    #[test]
    fn uniform_source_rarely_rejects() {
        // Rejections come only from count noise between equally likely
        // passwords, so they fade as counts grow.
        let src = LabeledSource::new(
            (0..100).map(|i| format!("p{i}").into_bytes()).collect(),
            crate::stats::uniform_model(100).unwrap(),
        )
        .unwrap();
        let run = |n_users| {
            let cfg = SimulationConfig {
                n_users,
                ..SimulationConfig::default()
            };
            simulate(&src, &cfg, TargetWeight::uniform()).unwrap()
        };
        let small = run(10_000);
        let large = run(100_000);
        assert!(
            (1.0..=1.05).contains(&large.mean_asks),
            "{}",
            large.mean_asks
        );
        assert!(large.mean_asks < small.mean_asks);
        assert_eq!(large.accepted_table.total_users(), 100_000);
        assert_eq!(small.free_table.total_users(), 10_000);
    }

    #[test]
    fn simulation_is_reproducible() {
        let src = LabeledSource::zipf(0.9, 500).unwrap();
        let cfg = SimulationConfig {
            n_users: 3000,
            seed: 17,
            ..SimulationConfig::default()
        };
        let a = simulate(&src, &cfg, TargetWeight::uniform()).unwrap();
        let b = simulate(&src, &cfg, TargetWeight::uniform()).unwrap();
        assert_eq!(a, b);
        let (mut wa, mut wb) = (Vec::new(), Vec::new());
        write_summary(&mut wa, &a).unwrap();
        write_summary(&mut wb, &b).unwrap();
        assert_eq!(wa, wb);
        assert_eq!(a.rejected_total as f64, (a.mean_asks - 1.0) * 3000.0);
    }

    #[test]
    fn banned_source_password_never_accepted_in_simulation() {
        let src = LabeledSource::zipf(0.8, 50).unwrap();
        let cfg = SimulationConfig {
            n_users: 2000,
            ..SimulationConfig::default()
        };
        let r = simulate(&src, &cfg, TargetWeight::uniform().ban([b"z1".to_vec()])).unwrap();
        assert!(r.accepted_table.iter().all(|(p, _)| p != b"z1"));
        assert!(r.free_table.iter().any(|(p, _)| p == b"z1"));
    }
}
