//! Byte-exact TSV fields.
//!
//! Passwords are arbitrary bytes, so fields are escaped: `\` → `\\`,
//! TAB → `\t`, LF → `\n`, CR → `\r`. Everything else is written verbatim.

use std::io::{BufRead, Write};

use crate::ingest::RankFrequencyTable;
use crate::{Error, Result};

pub const TABLE_HEADER: &str = "rank\tcount\tpassword";

pub fn escape_into(out: &mut Vec<u8>, field: &[u8]) {
    for &b in field {
        match b {
            b'\\' => out.extend_from_slice(b"\\\\"),
            b'\t' => out.extend_from_slice(b"\\t"),
            b'\n' => out.extend_from_slice(b"\\n"),
            b'\r' => out.extend_from_slice(b"\\r"),
            _ => out.push(b),
        }
    }
}

pub fn escape(field: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(field.len());
    escape_into(&mut out, field);
    out
}

/// Inverse of [`escape`]. Unknown escapes and a trailing lone backslash are
/// rejected.
pub fn unescape(field: &[u8]) -> std::result::Result<Vec<u8>, String> {
    let mut out = Vec::with_capacity(field.len());
    let mut it = field.iter();
    while let Some(&b) = it.next() {
        if b != b'\\' {
            out.push(b);
            continue;
        }
        match it.next() {
            Some(b'\\') => out.push(b'\\'),
            Some(b't') => out.push(b'\t'),
            Some(b'n') => out.push(b'\n'),
            Some(b'r') => out.push(b'\r'),
            Some(&other) => return Err(format!("unknown escape \\{}", other as char)),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

/// Split a line (without its terminator) on TAB.
pub fn split_fields(line: &[u8]) -> Vec<&[u8]> {
    line.split(|&b| b == b'\t').collect()
}

/// Read LF-terminated lines, stripping one trailing CR. Returns `None` at EOF.
pub fn read_line<R: BufRead>(reader: &mut R, buf: &mut Vec<u8>) -> std::io::Result<Option<usize>> {
    buf.clear();
    let n = reader.read_until(b'\n', buf)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    }
    if buf.last() == Some(&b'\r') {
        buf.pop();
    }
    Ok(Some(n))
}

/// Write `rank<TAB>count<TAB>password` rows, at most `max_ranks` of them.
pub fn write_table<W: Write>(
    w: &mut W,
    table: &RankFrequencyTable,
    max_ranks: Option<usize>,
) -> std::io::Result<()> {
    writeln!(w, "{TABLE_HEADER}")?;
    let limit = max_ranks.unwrap_or(usize::MAX);
    let mut line = Vec::new();
    for (i, (pw, count)) in table.iter().enumerate().take(limit) {
        line.clear();
        write!(line, "{}\t{}\t", i + 1, count)?;
        escape_into(&mut line, pw);
        line.push(b'\n');
        w.write_all(&line)?;
    }
    Ok(())
}

/// Read a table written by [`write_table`]. Ranks must be 1, 2, 3, ... and
/// counts non-increasing.
pub fn read_table<R: BufRead>(mut r: R, tie_break_seed: u64) -> Result<RankFrequencyTable> {
    let mut buf = Vec::new();
    match read_line(&mut r, &mut buf)? {
        Some(_) if buf == TABLE_HEADER.as_bytes() => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{TABLE_HEADER}`"),
            })
        }
    }
    let mut entries = Vec::new();
    let mut line_no = 1;
    while read_line(&mut r, &mut buf)?.is_some() {
        line_no += 1;
        if buf.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let mut parts = buf.splitn(3, |&b| b == b'\t');
        let (rank, count, pw) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(parse_err("expected 3 fields".into())),
        };
        let rank: usize = parse_num(rank).ok_or_else(|| parse_err("bad rank".into()))?;
        if rank != entries.len() + 1 {
            return Err(parse_err(format!("rank {rank} out of sequence")));
        }
        let count: u64 = parse_num(count).ok_or_else(|| parse_err("bad count".into()))?;
        let pw = unescape(pw).map_err(parse_err)?;
        entries.push((pw, count));
    }
    RankFrequencyTable::from_ranked(entries, tie_break_seed)
}

pub(crate) fn parse_num<T: std::str::FromStr>(field: &[u8]) -> Option<T> {
    std::str::from_utf8(field).ok()?.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn escapes_specials() {
        assert_eq!(escape(b"a\tb\\c\nd\re"), b"a\\tb\\\\c\\nd\\re".to_vec());
        assert!(unescape(b"abc\\").is_err());
        assert!(unescape(b"\\x").is_err());
    }

    #[test]
    fn table_roundtrip_through_file() {
        let t = RankFrequencyTable::from_counts(
            vec![
                (b"x\ty".to_vec(), 3),
                (b"\\".to_vec(), 1),
                (b"p,\"q".to_vec(), 1),
            ],
            9,
        )
        .unwrap();
        let mut out = Vec::new();
        write_table(&mut out, &t, None).unwrap();
        let back = read_table(&out[..], 9).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_out_of_order_counts() {
        let data = b"rank\tcount\tpassword\n1\t1\ta\n2\t3\tb\n";
        assert!(read_table(&data[..], 0).is_err());
        let data = b"rank\tcount\tpassword\n2\t3\ta\n";
        assert!(read_table(&data[..], 0).is_err());
    }

    proptest! {
        #[test]
        fn escape_roundtrip(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let esc = escape(&bytes);
            prop_assert!(!esc.contains(&b'\t') && !esc.contains(&b'\n') && !esc.contains(&b'\r'));
            prop_assert_eq!(unescape(&esc).unwrap(), bytes);
        }
    }
}
