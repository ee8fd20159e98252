//! Microbenchmarks for the hot paths: the spectrum transforms, the
//! word-packed probe kernels behind the exhaustive studies, and a complete
//! local-search descent.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use boolnl::analysis::{
    bitflip_can_improve, nl_of_word, rotation_can_improve, twobitflip_can_improve, wht_word,
};
use boolnl::{
    ls_run, walsh_transform, walsh_transform_naive, LsConfig, MutationKind, Objective,
    RandomSource, TruthTable,
};

fn transforms(c: &mut Criterion) {
    let mut rng = RandomSource::new(7);
    let tt = TruthTable::random(8, &mut rng).expect("table");
    c.bench_function("walsh_transform n=8", |b| {
        b.iter(|| walsh_transform(black_box(&tt)))
    });
    c.bench_function("walsh_transform_naive n=8", |b| {
        b.iter(|| walsh_transform_naive(black_box(&tt)))
    });
}

fn word_kernels(c: &mut Criterion) {
    let n = 5;
    let word = 0x9e37_79b9_7f4a_7c15u64;
    c.bench_function("nl_of_word n=5", |b| {
        b.iter(|| nl_of_word(n, black_box(word)))
    });

    let mut full = [0i32; 64];
    wht_word(n, word, &mut full);
    let spec = &full[..1 << n];
    let max = spec.iter().map(|v| v.abs()).max().expect("nonempty");
    c.bench_function("improvement probes n=5", |b| {
        b.iter(|| {
            (
                rotation_can_improve(n, black_box(word), max),
                bitflip_can_improve(n, black_box(word), spec, max),
                twobitflip_can_improve(n, black_box(word), spec, max),
            )
        })
    });
}

fn descent(c: &mut Criterion) {
    let ops = vec![
        MutationKind::Rotation,
        MutationKind::BitFlip,
        MutationKind::TwoBitFlip,
    ];
    c.bench_function("ls single descent n=6", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let config =
                LsConfig::new(6, ops.clone(), Objective::F2, 50_000, seed).with_restart(false);
            ls_run(black_box(&config)).expect("descent")
        })
    });
}

criterion_group!(benches, transforms, word_kernels, descent);
criterion_main!(benches);
