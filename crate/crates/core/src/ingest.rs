//! Corpus parsing, cleanup and rank-frequency tables.
//!
//! Cleanup keeps the last entry seen for each user and omits whitespace-only
//! passwords. Whitespace entries are dropped first, so a user whose final
//! entry is blank keeps their last non-blank password; a user with only blank
//! entries disappears.

use std::cmp::Reverse;
use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use crate::hashing::keyed_hash;
use crate::tsv::read_line;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// `user<TAB>password`; the password may contain further TABs.
    UserTabPassword,
    /// One password per line; users are synthesised as `u<line_no>`.
    PasswordPerLine,
}

impl CorpusFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            CorpusFormat::UserTabPassword => "user-tab-password",
            CorpusFormat::PasswordPerLine => "password-per-line",
        }
    }
}

impl std::fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user-tab-password" => Ok(CorpusFormat::UserTabPassword),
            "password-per-line" => Ok(CorpusFormat::PasswordPerLine),
            other => Err(Error::Argument(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CredentialRecord {
    pub user: Vec<u8>,
    pub password: Vec<u8>,
    /// 1-based line number in the source.
    pub line_no: u64,
}

impl CredentialRecord {
    pub fn new(user: impl Into<Vec<u8>>, password: impl Into<Vec<u8>>, line_no: u64) -> Self {
        Self {
            user: user.into(),
            password: password.into(),
            line_no,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedCorpus {
    pub records: Vec<CredentialRecord>,
    /// Lines skipped because they lacked the user/password separator.
    pub malformed: usize,
}

/// Empty or made only of ASCII whitespace (including vertical tab).
pub fn is_blank_password(pw: &[u8]) -> bool {
    pw.iter()
        .all(|&b| matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c))
}

fn synthetic_user(line_no: u64) -> Vec<u8> {
    format!("u{line_no}").into_bytes()
}

/// Visit every line of a corpus as `(line_no, user, password)`; malformed
/// lines are counted and skipped. Returns `(lines, malformed)`.
fn for_each_line<R, F>(mut reader: R, format: CorpusFormat, mut visit: F) -> Result<(u64, usize)>
where
    R: BufRead,
    F: FnMut(u64, &[u8], &[u8]),
{
    let mut buf = Vec::new();
    let mut offset = 0u64;
    let mut line_no = 0u64;
    let mut malformed = 0;
    loop {
        let n = match read_line(&mut reader, &mut buf) {
            Ok(Some(n)) => n,
            Ok(None) => break,
            Err(source) => return Err(Error::Input { offset, source }),
        };
        offset += n as u64;
        line_no += 1;
        match format {
            CorpusFormat::PasswordPerLine => visit(line_no, &synthetic_user(line_no), &buf),
            CorpusFormat::UserTabPassword => match buf.iter().position(|&b| b == b'\t') {
                Some(tab) => visit(line_no, &buf[..tab], &buf[tab + 1..]),
                None => malformed += 1,
            },
        }
    }
    Ok((line_no, malformed))
}

pub fn parse_corpus<R: BufRead>(reader: R, format: CorpusFormat) -> Result<ParsedCorpus> {
    let mut records = Vec::new();
    let (_, malformed) = for_each_line(reader, format, |line_no, user, pw| {
        records.push(CredentialRecord::new(user, pw, line_no));
    })?;
    Ok(ParsedCorpus { records, malformed })
}

/// Keep at most one record per user: the non-blank entry with the highest
/// line number. Output is ordered by line number.
pub fn cleanup(records: Vec<CredentialRecord>) -> Vec<CredentialRecord> {
    let mut last: HashMap<Vec<u8>, CredentialRecord> = HashMap::new();
    for rec in records {
        if is_blank_password(&rec.password) {
            continue;
        }
        match last.get_mut(&rec.user) {
            Some(prev) if prev.line_no > rec.line_no => {}
            Some(prev) => *prev = rec,
            None => {
                last.insert(rec.user.clone(), rec);
            }
        }
    }
    let mut out: Vec<_> = last.into_values().collect();
    out.sort_by_key(|r| r.line_no);
    out
}

/// Passwords ranked by descending use count (rank 1 = most common).
///
/// Equal counts are ordered by a keyed hash of the password, so the order is
/// a reproducible pseudo-random permutation determined by `tie_break_seed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankFrequencyTable {
    passwords: Vec<Vec<u8>>,
    counts: Vec<u64>,
    total_users: u64,
    tie_break_seed: u64,
}

impl RankFrequencyTable {
    /// Build from unordered `(password, count)` pairs. Duplicate passwords
    /// are merged.
    pub fn from_counts<I>(pairs: I, tie_break_seed: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, u64)>,
    {
        let mut merged: HashMap<Vec<u8>, u64> = HashMap::new();
        for (pw, c) in pairs {
            *merged.entry(pw).or_default() += c;
        }
        Self::from_count_map(merged, tie_break_seed)
    }

    fn from_count_map(map: HashMap<Vec<u8>, u64>, tie_break_seed: u64) -> Result<Self> {
        let mut rows: Vec<(u64, u64, Vec<u8>)> = map
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(pw, c)| (c, keyed_hash(tie_break_seed, &pw), pw))
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        rows.sort_unstable_by(|a, b| (Reverse(a.0), a.1, &a.2).cmp(&(Reverse(b.0), b.1, &b.2)));
        let total_users = rows.iter().map(|r| r.0).sum();
        let (counts, passwords) = rows.into_iter().map(|(c, _, pw)| (c, pw)).unzip();
        Ok(Self {
            passwords,
            counts,
            total_users,
            tie_break_seed,
        })
    }

    /// Build from entries that are already in rank order. Fails if counts
    /// increase, a count is zero, or a password repeats.
    pub fn from_ranked(entries: Vec<(Vec<u8>, u64)>, tie_break_seed: u64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        let mut prev = u64::MAX;
        for (i, (pw, c)) in entries.iter().enumerate() {
            if *c == 0 {
                return Err(Error::InvalidTable(format!("zero count at rank {}", i + 1)));
            }
            if *c > prev {
                return Err(Error::InvalidTable(format!(
                    "count increases at rank {}",
                    i + 1
                )));
            }
            if !seen.insert(pw.as_slice()) {
                return Err(Error::InvalidTable(format!(
                    "duplicate password at rank {}",
                    i + 1
                )));
            }
            prev = *c;
        }
        let total_users = entries.iter().map(|e| e.1).sum();
        let (passwords, counts) = entries.into_iter().unzip();
        Ok(Self {
            passwords,
            counts,
            total_users,
            tie_break_seed,
        })
    }

    /// Table with placeholder labels `r1, r2, ...` over the given
    /// non-increasing counts. Handy for synthetic data.
    pub fn from_sorted_counts(counts: &[u64]) -> Result<Self> {
        let entries = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (format!("r{}", i + 1).into_bytes(), c))
            .collect();
        Self::from_ranked(entries, 0)
    }

    pub fn total_users(&self) -> u64 {
        self.total_users
    }

    pub fn distinct_count(&self) -> usize {
        self.counts.len()
    }

    pub fn tie_break_seed(&self) -> u64 {
        self.tie_break_seed
    }

    /// Counts in rank order (`counts()[0]` is f₁).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn passwords(&self) -> &[Vec<u8>] {
        &self.passwords
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64)> + '_ {
        self.passwords
            .iter()
            .map(Vec::as_slice)
            .zip(self.counts.iter().copied())
    }

    pub fn count_of_counts(&self) -> CountOfCounts {
        CountOfCounts::from_counts(&self.counts)
    }
}

pub fn build_table(
    records: &[CredentialRecord],
    tie_break_seed: u64,
) -> Result<RankFrequencyTable> {
    let mut map: HashMap<Vec<u8>, u64> = HashMap::new();
    for r in records {
        *map.entry(r.password.clone()).or_default() += 1;
    }
    RankFrequencyTable::from_count_map(map, tie_break_seed)
}

pub fn count_of_counts(table: &RankFrequencyTable) -> CountOfCounts {
    table.count_of_counts()
}

/// Number of passwords `n_k` used by exactly `k` users, ordered by `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountOfCounts {
    pairs: Vec<(u64, u64)>,
}

impl CountOfCounts {
    pub fn from_counts(counts: &[u64]) -> Self {
        let mut map = std::collections::BTreeMap::new();
        for &c in counts.iter().filter(|&&c| c > 0) {
            *map.entry(c).or_insert(0u64) += 1;
        }
        Self {
            pairs: map.into_iter().collect(),
        }
    }

    /// From explicit `(k, n_k)` pairs; `k` must be strictly increasing and
    /// both values positive.
    pub fn from_pairs(pairs: Vec<(u64, u64)>) -> Result<Self> {
        if pairs.iter().any(|&(k, n)| k == 0 || n == 0) {
            return Err(Error::Argument("k and n_k must be positive".into()));
        }
        if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Argument("k must be strictly increasing".into()));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    pub fn total_users(&self) -> u64 {
        self.pairs.iter().map(|&(k, n)| k * n).sum()
    }

    pub fn distinct_count(&self) -> u64 {
        self.pairs.iter().map(|&(_, n)| n).sum()
    }
}

/// Counters gathered while streaming a corpus straight into a table.
#[derive(Debug, Clone)]
pub struct IngestSummary {
    pub table: RankFrequencyTable,
    pub lines: u64,
    pub malformed: usize,
    pub users: u64,
}

/// Equivalent to `build_table(cleanup(parse_corpus(..)))` without holding
/// every record in memory. Password-per-line corpora never repeat a user, so
/// they are counted directly; user-tab-password corpora keep one password
/// per user.
pub fn ingest_reader<R: BufRead>(
    reader: R,
    format: CorpusFormat,
    tie_break_seed: u64,
) -> Result<IngestSummary> {
    let (counts, lines, malformed) = match format {
        CorpusFormat::PasswordPerLine => {
            let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
            let (lines, _) = for_each_line(reader, format, |_, _, pw| {
                if !is_blank_password(pw) {
                    match counts.get_mut(pw) {
                        Some(c) => *c += 1,
                        None => {
                            counts.insert(pw.to_vec(), 1);
                        }
                    }
                }
            })?;
            (counts, lines, 0)
        }
        CorpusFormat::UserTabPassword => {
            let mut by_user: HashMap<Vec<u8>, Vec<u8>> = HashMap::new();
            let (lines, malformed) = for_each_line(reader, format, |_, user, pw| {
                if !is_blank_password(pw) {
                    by_user.insert(user.to_vec(), pw.to_vec());
                }
            })?;
            let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
            for pw in by_user.into_values() {
                *counts.entry(pw).or_default() += 1;
            }
            (counts, lines, malformed)
        }
    };
    let table = RankFrequencyTable::from_count_map(counts, tie_break_seed)?;
    Ok(IngestSummary {
        users: table.total_users(),
        table,
        lines,
        malformed,
    })
}
