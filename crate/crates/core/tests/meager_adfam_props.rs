use std::collections::HashSet;

use adrefine_core::adfam::{self, blowup_intervals, branch_set, greedy_adr};
use adrefine_core::catalog::IdealHandle;
use adrefine_core::meager::{dominate, domination_report, branch_prefix_code, hitting_partition, talagrand_witness, BranchFamily};
use adrefine_core::parse::{parse_partition, parse_set};
use adrefine_core::{Answer, Partition, SetExpr};
use proptest::prelude::*;

#[test]
fn dominating_partition_contains_a_block_of_each_input() {
    let ps: Vec<Partition> =
        ["dyadic", "triangular", "width 5", "geometric 1 2"].iter().map(|s| parse_partition(s).unwrap()).collect();
    let r = dominate(&ps).unwrap();
    let records = domination_report(&r, &ps, 50).unwrap();
    assert_eq!(records.len(), 50 * ps.len());
    for m in 0..50 {
        let (lo, hi) = r.block_span(m).unwrap().unwrap();
        for p in &ps {
            let k = p.index_of(lo).unwrap().unwrap_or(0);
            let found = (k..k + 2).any(|n| matches!(p.block_span(n).unwrap(), Some((a, b)) if a >= lo && b <= hi));
            assert!(found, "R_{m} holds no block of {p}");
        }
    }
}

proptest! {
    #[test]
    fn full_last_block_forces_half_density(k in 1u32..14, extra in prop::collection::vec(0u64..1 << 14, 0..40)) {
        let p = talagrand_witness(&IdealHandle::parse("Z").unwrap()).unwrap();
        let block = p.block(u64::from(k - 1)).unwrap();
        let s = SetExpr::union(SetExpr::fin(block), SetExpr::fin(extra));
        let n = 1u64 << k;
        prop_assert!(2 * s.count_below(n).unwrap() >= n);
    }
}

#[test]
fn hitting_blocks_meet_every_sampled_branch() {
    let fam = BranchFamily { ideal: IdealHandle::parse("Z").unwrap(), partition: Partition::dyadic() };
    let b = parse_set("squares").unwrap();
    let blocks = hitting_partition(&fam, &b, 5).unwrap();
    for w in adfam::primitive_words().take(100) {
        for &(lo, hi) in &blocks {
            let mut hit = false;
            for n in 0..64 {
                let (a, e) = fam.partition.block_span(branch_prefix_code(&w, n).unwrap()).unwrap().unwrap();
                if a >= hi {
                    break;
                }
                hit = (a.max(lo)..e.min(hi)).take(64).any(|x| !b.contains(x).unwrap());
                if hit {
                    break;
                }
            }
            assert!(hit, "branch {w} misses [{lo}, {hi})");
        }
    }
}

#[test]
fn branch_blowups_are_injective_on_short_codes() {
    let p = Partition::dyadic();
    let mut seen = HashSet::new();
    for len in 0..=12usize {
        for v in 0..1u32 << len {
            let s = if len == 0 { String::new() } else { format!("{v:0len$b}") };
            let iv = blowup_intervals(&branch_set(&s, len).unwrap(), &p).unwrap();
            assert!(seen.insert(iv), "{s} collides");
        }
    }
    assert_eq!(seen.len(), (1 << 13) - 1);
}

const POSITIVE: &[&str] = &[
    "omega", "evens", "odds", "ap 1 3", "ap 0 5", "blowup evens dyadic", "diff omega squares", "ap 2 7", "ap 3 4",
    "union evens (ap 1 4)", "diff evens (powers 2)", "blowup (ap 0 3) dyadic",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn greedy_postconditions(picks in prop::collection::vec(0usize..POSITIVE.len(), 1..6)) {
        let z = IdealHandle::parse("Z").unwrap();
        let family: Vec<SetExpr> = picks.iter().map(|&i| parse_set(POSITIVE[i]).unwrap()).collect();
        let adr = greedy_adr(&z, &family, 8).unwrap();
        prop_assert_eq!(adr.failures().count(), 0);
        for (a, t) in family.iter().enumerate() {
            let s = adr.chosen(a).unwrap();
            prop_assert!(s.window(5000).unwrap().iter().all(|&x| t.contains(x).unwrap()));
            prop_assert_eq!(z.member(s).unwrap().answer, Answer::Out);
            for b in a + 1..family.len() {
                prop_assert_eq!(adr.ledger[a][b].as_ref().unwrap().verdict, Answer::In);
            }
        }
    }
}
