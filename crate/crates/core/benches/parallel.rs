use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pwdist_core::crack::{crack_with, hash_corpus, Trunc8Mix64};
use pwdist_core::crossguess::GuessOrdering;
use pwdist_core::ingest::{build_table, CredentialRecord};
use pwdist_core::zipf_fit::{bootstrap, mle_from_counts, mle_truncated_zipf, ZipfSampler};
use pwdist_core::{Execution, RankFrequencyTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn zipf_table(s: f64, n: usize, draws: u64, seed: u64) -> RankFrequencyTable {
    let sampler = ZipfSampler::new(s, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = sampler.sample_counts(draws, &mut rng);
    counts.retain(|&c| c > 0);
    counts.sort_unstable_by(|a, b| b.cmp(a));
    RankFrequencyTable::from_sorted_counts(&counts).unwrap()
}

fn bench_bootstrap(c: &mut Criterion) {
    let table = zipf_table(0.7, 2_000, 20_000, 1);
    let fit = mle_truncated_zipf(&table).unwrap();
    let mut group = c.benchmark_group("bootstrap_32_replicates");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| bootstrap(&table, &fit, 32, 7, mode).unwrap().p_value)
        });
    }
    group.finish();
}

fn bench_crack(c: &mut Criterion) {
    let sampler = ZipfSampler::new(0.8, 20_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let records: Vec<CredentialRecord> = (0..20_000u64)
        .map(|i| {
            CredentialRecord::new(
                format!("u{i}"),
                format!("pw{}", sampler.sample(&mut rng)),
                i + 1,
            )
        })
        .collect();
    let scheme = Trunc8Mix64;
    let entries = hash_corpus(&records, &scheme, 5, 64).unwrap();
    let ordering = GuessOrdering::from_table(&build_table(&records, 0).unwrap(), "own");
    let mut group = c.benchmark_group("crack_64_salts");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| crack_with(&entries, &ordering, &scheme, mode).uncracked_count)
        });
    }
    group.finish();
}

fn bench_mle(c: &mut Criterion) {
    let table = zipf_table(0.78, 200_000, 1_000_000, 2);
    c.bench_function("mle_200k_ranks", |b| {
        b.iter(|| mle_from_counts(table.counts()).unwrap().s)
    });
}

criterion_group!(benches, bench_bootstrap, bench_crack, bench_mle);
criterion_main!(benches);
