use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use pwdist_core::ingest::{ingest_reader, CorpusFormat, IngestSummary};
use pwdist_core::tsv::{self, TABLE_HEADER};
use pwdist_core::{Error, RankFrequencyTable, Result};
use sha2::{Digest, Sha256};

use crate::manifest::Run;

/// Passes bytes through while hashing them, so large corpora can be
/// digested and parsed in one streaming pass.
struct HashingReader<R> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

fn open_hashed(path: &Path) -> Result<BufReader<HashingReader<File>>> {
    let file = File::open(path)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(BufReader::with_capacity(
        1 << 16,
        HashingReader {
            inner: file,
            hasher: Sha256::new(),
        },
    ))
}

fn finish_hashed(
    run: &mut Run,
    path: &Path,
    mut reader: BufReader<HashingReader<File>>,
) -> Result<()> {
    // Drain anything the parser left unread so the digest covers the file.
    io::copy(&mut reader, &mut io::sink())?;
    let digest = reader.into_inner().hasher.finalize();
    run.input_digest(path, hex::encode(digest));
    Ok(())
}

pub enum Loaded {
    Table(RankFrequencyTable),
    Corpus(IngestSummary),
}

impl Loaded {
    pub fn into_table(self) -> RankFrequencyTable {
        match self {
            Loaded::Table(t) => t,
            Loaded::Corpus(s) => s.table,
        }
    }
}

/// Load either an exported table (recognised by its header line) or a raw
/// corpus in `format`.
pub fn load(run: &mut Run, path: &Path, format: CorpusFormat, seed: u64) -> Result<Loaded> {
    let mut reader = open_hashed(path)?;
    let header = format!("{TABLE_HEADER}\n");
    let is_table = {
        let buf = reader.fill_buf()?;
        buf.starts_with(header.as_bytes())
            || buf.starts_with(format!("{TABLE_HEADER}\r\n").as_bytes())
    };
    let loaded = if is_table {
        Loaded::Table(tsv::read_table(&mut reader, seed)?)
    } else {
        Loaded::Corpus(ingest_reader(&mut reader, format, seed)?)
    };
    finish_hashed(run, path, reader)?;
    Ok(loaded)
}

/// Stream a raw corpus into a table.
pub fn load_corpus(
    run: &mut Run,
    path: &Path,
    format: CorpusFormat,
    seed: u64,
) -> Result<IngestSummary> {
    let mut reader = open_hashed(path)?;
    let summary = ingest_reader(&mut reader, format, seed)?;
    finish_hashed(run, path, reader)?;
    Ok(summary)
}

pub fn load_table(
    run: &mut Run,
    path: &Path,
    format: CorpusFormat,
    seed: u64,
) -> Result<RankFrequencyTable> {
    Ok(load(run, path, format, seed)?.into_table())
}

/// Read a whole file, recording its digest.
pub fn read_bytes(run: &mut Run, path: &Path) -> Result<Vec<u8>> {
    let mut reader = open_hashed(path)?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    finish_hashed(run, path, reader)?;
    Ok(bytes)
}

/// One entry per non-empty line, LF or CRLF terminated.
pub fn read_word_list(run: &mut Run, path: &Path) -> Result<Vec<Vec<u8>>> {
    let bytes = read_bytes(run, path)?;
    let mut words = Vec::new();
    let mut reader = &bytes[..];
    let mut buf = Vec::new();
    while tsv::read_line(&mut reader, &mut buf)?.is_some() {
        if !buf.is_empty() {
            words.push(buf.clone());
        }
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn detects_tables_and_corpora() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("c.txt");
        fs::write(&corpus, "u1\tabc\nu2\tabc\nu3\txyz\n").unwrap();
        let table = dir.path().join("t.tsv");
        fs::write(&table, "rank\tcount\tpassword\n1\t2\tabc\n2\t1\txyz\n").unwrap();

        let mut run = Run::new("test", dir.path());
        let a = load_table(&mut run, &corpus, CorpusFormat::UserTabPassword, 1).unwrap();
        let b = load_table(&mut run, &table, CorpusFormat::UserTabPassword, 1).unwrap();
        assert_eq!(a, b);
        let m = run.finish().unwrap();
        assert_eq!(m.inputs.len(), 2);
        assert_eq!(
            m.inputs[1].sha256,
            crate::manifest::sha256_hex(&fs::read(&table).unwrap())
        );
    }

    #[test]
    fn word_list_skips_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        fs::write(&path, "b\r\n\na\n").unwrap();
        let mut run = Run::new("test", dir.path());
        assert_eq!(
            read_word_list(&mut run, &path).unwrap(),
            vec![b"b".to_vec(), b"a".to_vec()]
        );
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let mut run = Run::new("test", Path::new("."));
        let err = read_bytes(&mut run, Path::new("/nonexistent/x")).unwrap_err();
        assert_eq!(err.kind(), pwdist_core::ErrorKind::Input);
    }
}
