use pwdist_core::crack::{
    crack_with, hash_corpus, read_hash_corpus, write_hash_corpus, Trunc8Mix64,
};
use pwdist_core::crossguess::{self_curve, truncate_reaggregate, CurveMetric, GuessOrdering};
use pwdist_core::ingest::{build_table, cleanup, ingest_reader, parse_corpus, CorpusFormat};
use pwdist_core::stats::{stats_report, DEFAULT_ALPHA};
use pwdist_core::tsv::{read_table, write_table};
use pwdist_core::zipf_fit::{bootstrap, mle_truncated_zipf, ZipfSampler};
use pwdist_core::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthetic_corpus(users: usize, seed: u64) -> String {
    let sampler = ZipfSampler::new(0.8, 400).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..users)
        .map(|u| format!("user{u}\tpassword{}\n", sampler.sample(&mut rng)))
        .collect()
}

#[test]
fn corpus_to_stats_through_files() {
    let text = synthetic_corpus(5000, 1);
    let parsed = parse_corpus(text.as_bytes(), CorpusFormat::UserTabPassword).unwrap();
    let table = build_table(&cleanup(parsed.records), 3).unwrap();
    let streamed = ingest_reader(text.as_bytes(), CorpusFormat::UserTabPassword, 3).unwrap();
    assert_eq!(streamed.table, table);

    let mut buf = Vec::new();
    write_table(&mut buf, &table, None).unwrap();
    let back = read_table(&buf[..], 3).unwrap();
    assert_eq!(back, table);

    let fit = mle_truncated_zipf(&back).unwrap();
    assert!(fit.s > 0.5 && fit.s < 1.1, "{fit:?}");
    let report = stats_report(&back, &fit, DEFAULT_ALPHA).unwrap();
    assert!(report.empirical.guesswork < report.uniform.guesswork);
    let ratio = report.empirical.guesswork / report.zipf.guesswork;
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
}

#[test]
fn bootstrap_and_crack_agree_across_execution_modes() {
    let text = synthetic_corpus(3000, 2);
    let records = cleanup(
        parse_corpus(text.as_bytes(), CorpusFormat::UserTabPassword)
            .unwrap()
            .records,
    );
    let table = build_table(&records, 5).unwrap();

    let fit = mle_truncated_zipf(&table).unwrap();
    let seq = bootstrap(&table, &fit, 16, 9, Execution::Sequential).unwrap();
    let par = bootstrap(&table, &fit, 16, 9, Execution::Parallel).unwrap();
    assert_eq!(seq, par);

    let entries = hash_corpus(&records, &Trunc8Mix64, 4, 16).unwrap();
    let mut buf = Vec::new();
    write_hash_corpus(&mut buf, &entries).unwrap();
    let entries = read_hash_corpus(&buf[..]).unwrap();

    let truncated = truncate_reaggregate(&table, 8, 5).unwrap();
    let ordering = GuessOrdering::from_table(&truncated, "own");
    let a = crack_with(&entries, &ordering, &Trunc8Mix64, Execution::Sequential);
    let b = crack_with(&entries, &ordering, &Trunc8Mix64, Execution::Parallel);
    assert_eq!(a, b);
    assert_eq!(a.curve_users, self_curve(&truncated, CurveMetric::Users));
}
