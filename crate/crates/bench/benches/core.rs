use std::collections::BTreeSet;

use adrefine_core::adfam::greedy_adr;
use adrefine_core::catalog::IdealHandle;
use adrefine_core::coding::{pair, unpair};
use adrefine_core::mixing::{slalom_avoid, Slalom};
use adrefine_core::parse::{parse_set, parse_set_list};
use adrefine_core::reduce::{i0_search, j_tree, TreeCode};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coding(c: &mut Criterion) {
    c.bench_function("pair_unpair_1k", |b| {
        b.iter(|| {
            for n in 0..1000u64 {
                let (x, y) = unpair(black_box(n));
                black_box(pair(x, y).unwrap());
            }
        })
    });
}

fn membership(c: &mut Criterion) {
    let z = IdealHandle::parse("Z").unwrap();
    let s = parse_set("blowup evens dyadic").unwrap();
    c.bench_function("member_z_blowup", |b| b.iter(|| z.member(black_box(&s)).unwrap()));
}

fn greedy(c: &mut Criterion) {
    let z = IdealHandle::parse("Z").unwrap();
    let fam = parse_set_list("omega; evens; odds; ap 1 3; ap 0 5; ap 2 7").unwrap();
    c.bench_function("greedy_adr_6", |b| b.iter(|| greedy_adr(&z, black_box(&fam), 8).unwrap()));
}

fn reduction(c: &mut Criterion) {
    let t = TreeCode::from_leaves(vec![vec![0, 1, 2], vec![1, 0], vec![2, 2, 0], vec![1, 2, 1]]);
    c.bench_function("j_tree", |b| b.iter(|| j_tree(black_box(&t)).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a: BTreeSet<(u64, u64)> = (0..40).flat_map(|m| (0..40).map(move |n| (m, n))).filter(|_| rng.gen_bool(0.5)).collect();
    let xs: BTreeSet<u64> = (0..12).map(|i| 3 * i).collect();
    let ys: BTreeSet<u64> = (0..12).map(|i| 3 * i + 1).collect();
    c.bench_function("i0_search_12", |b| b.iter(|| i0_search(black_box(&a), &xs, &ys).unwrap()));
}

fn slalom(c: &mut Criterion) {
    let s = Slalom::random(11, 6);
    c.bench_function("slalom_avoid_6", |b| b.iter(|| slalom_avoid(black_box(&s), 6).unwrap()));
}

criterion_group!(benches, coding, membership, greedy, reduction, slalom);
criterion_main!(benches);
