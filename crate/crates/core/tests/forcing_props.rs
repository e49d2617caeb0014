use std::collections::BTreeSet;

use adrefine_core::catalog::IdealHandle;
use adrefine_core::forcing::{generic_run, leq, lift, meet, project, CohenCondition, Condition, DenseRequest, Meet};
use adrefine_core::meager::block_contained;
use adrefine_core::parse::parse_set_list;
use adrefine_core::SetExpr;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn family() -> Vec<SetExpr> {
    parse_set_list("omega; evens; odds; ap 0 3; ap 1 4").unwrap()
}

fn random_condition(rng: &mut ChaCha8Rng, fam: &[SetExpr]) -> Condition {
    let mut p = Condition::new();
    for a in 0..fam.len() {
        if rng.gen_bool(0.5) {
            let pts: BTreeSet<u64> = (0..32).filter(|&n| fam[a].contains(n).unwrap() && rng.gen_bool(0.2)).collect();
            p.0.insert(a, pts);
        }
    }
    p
}

fn random_extension(rng: &mut ChaCha8Rng, p: &Condition, fam: &[SetExpr]) -> Condition {
    let a = rng.gen_range(0..fam.len());
    let mut s = project(p, a, fam).unwrap();
    for n in 0..40 {
        if fam[a].contains(n).unwrap() && !s.0.contains_key(&n) && rng.gen_bool(0.2) {
            s.0.insert(n, rng.gen_bool(0.5));
        }
    }
    lift(p, &s, a, fam).unwrap()
}

#[test]
fn order_axioms_on_random_chains() {
    let fam = family();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let r = random_condition(&mut rng, &fam);
        let q = random_extension(&mut rng, &r, &fam);
        let p = random_extension(&mut rng, &q, &fam);
        assert!(leq(&r, &r) && leq(&q, &r) && leq(&p, &q));
        assert!(leq(&p, &r), "transitivity fails for {p} ≤ {q} ≤ {r}");
        let other = random_condition(&mut rng, &fam);
        if leq(&p, &q) && leq(&q, &other) {
            assert!(leq(&p, &other));
        }
        if let Meet::Compatible(m) = meet(&p, &other) {
            assert!(leq(&m, &p) && leq(&m, &other));
        }
    }
}

#[test]
fn projection_is_order_preserving_and_onto() {
    let fam = family();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        let q = random_condition(&mut rng, &fam);
        let p = random_extension(&mut rng, &q, &fam);
        for a in 0..fam.len() {
            assert!(project(&p, a, &fam).unwrap().extends(&project(&q, a, &fam).unwrap()));
        }
        let a = rng.gen_range(0..fam.len());
        let mut s = CohenCondition::default();
        for n in 0..40 {
            if fam[a].contains(n).unwrap() && rng.gen_bool(0.3) {
                s.0.insert(n, rng.gen_bool(0.5));
            }
        }
        let lifted = lift(&Condition::new(), &s, a, &fam).unwrap();
        assert_eq!(project(&lifted, a, &fam).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn block_requests_are_met(seed in 0u64..1000, blocks in prop::collection::vec((0usize..5, 0u64..6), 1..10)) {
        let fam = family();
        let z = IdealHandle::parse("Z").unwrap();
        let mut reqs: Vec<DenseRequest> = (0..fam.len()).map(|index| DenseRequest::Touch { index }).collect();
        reqs.extend(blocks.iter().map(|&(index, from)| DenseRequest::Block { index, from }));
        let run = generic_run(&fam, &z, &reqs, seed, 64).unwrap();
        prop_assert_eq!(run.failures().count(), 0);
        let last = run.last();
        for step in &run.steps {
            if let DenseRequest::Block { index, from } = step.request {
                let k = step.block.unwrap();
                prop_assert!(k >= from);
                let held = SetExpr::fin(last.get(index).unwrap().iter().copied());
                prop_assert!(block_contained(&run.witnesses[&index], &held, k).unwrap());
            }
        }
        for f in &run.freezes {
            let frozen: BTreeSet<u64> = f.frozen_set.iter().copied().collect();
            prop_assert_eq!(last.meet_of(f.pair.0, f.pair.1), frozen);
        }
    }
}
