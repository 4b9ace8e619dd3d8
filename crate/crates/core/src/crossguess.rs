//! How quickly one ordering of guesses recovers another list's passwords.
//!
//! Curves are indexed by guess number `t = 1..=len`. `C(t)` guesses a
//! table in its own rank order; `C(t‖σ)` guesses it in a reference list's
//! order, scoring zero for reference passwords the target never uses.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use crate::ingest::RankFrequencyTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessOrdering {
    guesses: Vec<Vec<u8>>,
    source_label: String,
}

impl GuessOrdering {
    pub fn new(guesses: Vec<Vec<u8>>, source_label: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(guesses.len());
        if let Some(dup) = guesses.iter().find(|g| !seen.insert(g.as_slice())) {
            return Err(Error::Argument(format!(
                "duplicate guess `{}`",
                String::from_utf8_lossy(dup)
            )));
        }
        Ok(Self {
            guesses,
            source_label: source_label.into(),
        })
    }

    /// The table's own rank order.
    pub fn from_table(table: &RankFrequencyTable, source_label: impl Into<String>) -> Self {
        Self {
            guesses: table.passwords().to_vec(),
            source_label: source_label.into(),
        }
    }

    pub fn guesses(&self) -> &[Vec<u8>] {
        &self.guesses
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.guesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.guesses.is_empty()
    }
}

/// Deduplicated words in byte-wise lexical order (what `LC_ALL=C sort -u`
/// produces).
pub fn dictionary_ordering(
    mut words: Vec<Vec<u8>>,
    source_label: impl Into<String>,
) -> GuessOrdering {
    words.sort_unstable();
    words.dedup();
    GuessOrdering {
        guesses: words,
        source_label: source_label.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveMetric {
    Users,
    DistinctPasswords,
}

impl CurveMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveMetric::Users => "users",
            CurveMetric::DistinctPasswords => "distinct",
        }
    }
}

impl std::str::FromStr for CurveMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "users" => Ok(CurveMetric::Users),
            "distinct" | "distinct-passwords" => Ok(CurveMetric::DistinctPasswords),
            other => Err(Error::Argument(format!("unknown curve metric `{other}`"))),
        }
    }
}

/// Cumulative recoveries after each guess, stored sparsely.
///
/// `points` holds `(1, C(1))`, every `t` where `C` increases, and the final
/// `(len, C(len))`; the representation is canonical, so two curves with the
/// same dense values compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessCurve {
    points: Vec<(u64, u64)>,
    len: u64,
    denominator: u64,
    metric: CurveMetric,
}

impl GuessCurve {
    /// Build from per-guess increments.
    pub fn from_increments<I>(increments: I, denominator: u64, metric: CurveMetric) -> Self
    where
        I: IntoIterator<Item = u64>,
    {
        let mut points = Vec::new();
        let mut cum = 0u64;
        let mut t = 0u64;
        for inc in increments {
            t += 1;
            cum += inc;
            if t == 1 || inc > 0 {
                points.push((t, cum));
            }
        }
        if t > 0 && points.last().map(|p| p.0) != Some(t) {
            points.push((t, cum));
        }
        Self {
            points,
            len: t,
            denominator,
            metric,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn metric(&self) -> CurveMetric {
        self.metric
    }

    pub fn sparse_points(&self) -> &[(u64, u64)] {
        &self.points
    }

    /// `C(t)`; zero for `t = 0`, the final value for `t` past the end.
    pub fn value_at(&self, t: u64) -> u64 {
        match self.points.partition_point(|p| p.0 <= t) {
            0 => 0,
            i => self.points[i - 1].1,
        }
    }

    pub fn final_value(&self) -> u64 {
        self.points.last().map_or(0, |p| p.1)
    }

    /// `(t, C(t))` for every `t = 1..=len`.
    pub fn dense(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let mut idx = 0;
        let mut cum = 0;
        (1..=self.len).map(move |t| {
            while idx < self.points.len() && self.points[idx].0 <= t {
                cum = self.points[idx].1;
                idx += 1;
            }
            (t, cum)
        })
    }

    /// Write `t<TAB>cumulative<TAB>fraction`. With `log_spaced`, only
    /// `t = 1..10` and then about ten geometrically spaced `t` per decade
    /// (always including `len`) are written.
    pub fn write_tsv<W: Write>(&self, w: &mut W, log_spaced: bool) -> std::io::Result<()> {
        writeln!(w, "t\tcumulative\tfraction")?;
        let denom = self.denominator.max(1) as f64;
        let mut row = |t: u64, c: u64| writeln!(w, "{t}\t{c}\t{}", c as f64 / denom);
        if log_spaced {
            for t in log_spaced_ts(self.len) {
                row(t, self.value_at(t))?;
            }
        } else {
            for (t, c) in self.dense() {
                row(t, c)?;
            }
        }
        Ok(())
    }
}

/// Sample points for plotting on a log axis.
pub fn log_spaced_ts(len: u64) -> Vec<u64> {
    let mut ts: Vec<u64> = Vec::new();
    let mut k = 0u32;
    loop {
        let t = if k < 10 {
            u64::from(k) + 1
        } else {
            10f64.powf(f64::from(k) / 10.0).round() as u64
        };
        if t > len {
            break;
        }
        if ts.last() != Some(&t) {
            ts.push(t);
        }
        k += 1;
    }
    if len > 0 && ts.last() != Some(&len) {
        ts.push(len);
    }
    ts
}

/// `C(t)` for a table guessed in its own order.
pub fn self_curve(table: &RankFrequencyTable, metric: CurveMetric) -> GuessCurve {
    match metric {
        CurveMetric::Users => {
            GuessCurve::from_increments(table.counts().iter().copied(), table.total_users(), metric)
        }
        CurveMetric::DistinctPasswords => GuessCurve::from_increments(
            std::iter::repeat_n(1, table.distinct_count()),
            table.distinct_count() as u64,
            metric,
        ),
    }
}

/// `C(t‖σ)`: guess `target` in `reference` order, by exact byte equality.
pub fn cross_curve(
    reference: &GuessOrdering,
    target: &RankFrequencyTable,
    metric: CurveMetric,
) -> GuessCurve {
    let lookup: HashMap<&[u8], u64> = target.iter().collect();
    let hits = reference
        .guesses
        .iter()
        .map(|g| lookup.get(g.as_slice()).copied().unwrap_or(0));
    match metric {
        CurveMetric::Users => GuessCurve::from_increments(hits, target.total_users(), metric),
        CurveMetric::DistinctPasswords => GuessCurve::from_increments(
            hits.map(|c| u64::from(c > 0)),
            target.distinct_count() as u64,
            metric,
        ),
    }
}

/// Truncate every password to its first `max_len` bytes and merge the
/// counts of passwords that collide.
pub fn truncate_reaggregate(
    table: &RankFrequencyTable,
    max_len: usize,
    tie_break_seed: u64,
) -> Result<RankFrequencyTable> {
    if max_len == 0 {
        return Err(Error::Argument("max_len must be at least 1".into()));
    }
    RankFrequencyTable::from_counts(
        table
            .iter()
            .map(|(pw, c)| (pw[..pw.len().min(max_len)].to_vec(), c)),
        tie_break_seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(pairs: &[(&str, u64)]) -> RankFrequencyTable {
        RankFrequencyTable::from_counts(pairs.iter().map(|(p, c)| (p.as_bytes().to_vec(), *c)), 7)
            .unwrap()
    }

    fn ordering(words: &[&str]) -> GuessOrdering {
        GuessOrdering::new(
            words.iter().map(|w| w.as_bytes().to_vec()).collect(),
            "test",
        )
        .unwrap()
    }

    #[test]
    fn self_curve_examples() {
        let t = RankFrequencyTable::from_sorted_counts(&[2, 1, 1]).unwrap();
        let users: Vec<_> = self_curve(&t, CurveMetric::Users).dense().collect();
        assert_eq!(users, vec![(1, 2), (2, 3), (3, 4)]);
        let distinct: Vec<_> = self_curve(&t, CurveMetric::DistinctPasswords)
            .dense()
            .collect();
        assert_eq!(distinct, vec![(1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn cross_curve_hand_trace() {
        let t = table(&[("b", 3), ("a", 1)]);
        let c = cross_curve(&ordering(&["a", "b"]), &t, CurveMetric::Users);
        assert_eq!(c.dense().collect::<Vec<_>>(), vec![(1, 1), (2, 4)]);
        assert_eq!(c.denominator(), 4);
    }

    #[test]
    fn cross_curve_identity_and_disjoint() {
        let t = table(&[("x", 5), ("y", 2), ("z", 2), ("w", 1)]);
        let same = GuessOrdering::from_table(&t, "self");
        for m in [CurveMetric::Users, CurveMetric::DistinctPasswords] {
            assert_eq!(cross_curve(&same, &t, m), self_curve(&t, m));
        }
        let c = cross_curve(&ordering(&["p", "q", "r"]), &t, CurveMetric::Users);
        assert!(c.dense().all(|(_, v)| v == 0));
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn sparse_storage_is_compact() {
        let c = GuessCurve::from_increments([4, 0, 0, 0, 1, 0, 0], 10, CurveMetric::Users);
        assert_eq!(c.sparse_points(), &[(1, 4), (5, 5), (7, 5)]);
        assert_eq!(c.value_at(0), 0);
        assert_eq!(c.value_at(3), 4);
        assert_eq!(c.value_at(100), 5);
        let empty = GuessCurve::from_increments([], 10, CurveMetric::Users);
        assert!(empty.sparse_points().is_empty());
    }

    #[test]
    fn dictionary_examples() {
        let d = dictionary_ordering(vec![b"b".to_vec(), b"a".to_vec(), b"a".to_vec()], "d");
        assert_eq!(d.guesses(), &[b"a".to_vec(), b"b".to_vec()]);
        assert!(dictionary_ordering(vec![], "d").is_empty());
        let d = dictionary_ordering(vec![b"zebra".to_vec(), b"Apple".to_vec()], "d");
        assert_eq!(d.guesses(), &[b"Apple".to_vec(), b"zebra".to_vec()]);
    }

    #[test]
    fn duplicate_guesses_rejected() {
        assert!(GuessOrdering::new(vec![b"a".to_vec(), b"a".to_vec()], "x").is_err());
    }

    #[test]
    fn truncation_examples() {
        let t = table(&[("password1", 5), ("password2", 3)]);
        let r = truncate_reaggregate(&t, 8, 0).unwrap();
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![(&b"password"[..], 8)]);

        let t = table(&[("ab", 1), ("cd", 1)]);
        let r = truncate_reaggregate(&t, 1, 0).unwrap();
        let mut got: Vec<_> = r.iter().collect();
        got.sort();
        assert_eq!(got, vec![(&b"a"[..], 1), (&b"c"[..], 1)]);

        let t = table(&[("abc", 4), ("de", 2)]);
        assert_eq!(truncate_reaggregate(&t, 10, 7).unwrap(), t);
        assert!(truncate_reaggregate(&t, 0, 7).is_err());
    }

    #[test]
    fn log_spacing() {
        assert_eq!(log_spaced_ts(0), Vec::<u64>::new());
        assert_eq!(log_spaced_ts(3), vec![1, 2, 3]);
        let ts = log_spaced_ts(1000);
        assert_eq!(&ts[..10], &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        assert_eq!(*ts.last().unwrap(), 1000);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tsv_output() {
        let t = RankFrequencyTable::from_sorted_counts(&[2, 1, 1]).unwrap();
        let mut out = Vec::new();
        self_curve(&t, CurveMetric::Users)
            .write_tsv(&mut out, false)
            .unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "t\tcumulative\tfraction\n1\t2\t0.5\n2\t3\t0.75\n3\t4\t1\n"
        );
    }

    fn arb_table() -> impl Strategy<Value = RankFrequencyTable> {
        proptest::collection::hash_map("[a-f]{1,2}", 1u64..20, 1..15).prop_map(|m| {
            RankFrequencyTable::from_counts(m.into_iter().map(|(k, v)| (k.into_bytes(), v)), 1)
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn dominance(target in arb_table(), reference in arb_table()) {
            let ord = GuessOrdering::from_table(&reference, "ref");
            for m in [CurveMetric::Users, CurveMetric::DistinctPasswords] {
                let own = self_curve(&target, m);
                let cross = cross_curve(&ord, &target, m);
                for t in 1..=cross.len().max(own.len()) {
                    prop_assert!(cross.value_at(t) <= own.value_at(t));
                }
                if m == CurveMetric::DistinctPasswords {
                    prop_assert!(cross.dense().all(|(t, c)| c <= t));
                }
            }
            let own = self_curve(&target, CurveMetric::Users);
            prop_assert_eq!(own.value_at(target.distinct_count() as u64), target.total_users());
        }

        #[test]
        fn truncation_conserves_users(t in arb_table(), len in 1usize..3) {
            let r = truncate_reaggregate(&t, len, 3).unwrap();
            prop_assert_eq!(r.total_users(), t.total_users());
            prop_assert!(r.distinct_count() <= t.distinct_count());
        }
    }
}
