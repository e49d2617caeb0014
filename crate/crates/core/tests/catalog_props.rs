use std::collections::BTreeSet;

use adrefine_core::catalog::{pseudo_union_with_cuts, IdealHandle};
use adrefine_core::parse::parse_set;
use adrefine_core::{rado, Answer, SetExpr};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

const LEAVES: &[&str] = &[
    "omega", "evens", "odds", "ap 1 3", "ap 2 5", "squares", "factorials", "powers 2", "powers 3", "fin {1,4,9,16}",
    "empty", "col 0", "col 2", "branch 0110", "blowup evens dyadic", "blowup (fin {1,3}) dyadic", "diag",
    "image (affine 2 1) squares",
];

fn pool() -> Vec<SetExpr> {
    let leaves: Vec<SetExpr> = LEAVES.iter().map(|s| parse_set(s).unwrap()).collect();
    let mut out = leaves.clone();
    for (i, a) in leaves.iter().enumerate() {
        for (j, b) in leaves.iter().enumerate() {
            match (i + 2 * j) % 3 {
                0 => out.push(SetExpr::union(a.clone(), b.clone())),
                1 => out.push(SetExpr::inter(a.clone(), b.clone())),
                _ => out.push(SetExpr::diff(a.clone(), b.clone())),
            }
        }
    }
    out
}

const IDEALS: &[&str] = &["Fin", "Z", "I_1/n", "density[triangular]", "Fin⊗Fin", "ED", "Farah"];

#[test]
fn axioms_hold_on_the_pool() {
    let pool = pool();
    assert!(pool.len() >= 200);
    for src in IDEALS {
        let i = IdealHandle::parse(src).unwrap();
        let answers: Vec<Answer> = pool.iter().map(|s| i.member(s).unwrap().answer).collect();
        for (ti, t) in pool.iter().enumerate() {
            if answers[ti] != Answer::In {
                continue;
            }
            for (ui, u) in pool.iter().enumerate().step_by(7) {
                let s = SetExpr::inter(t.clone(), u.clone());
                let v = i.member(&s).unwrap().answer;
                assert_ne!(v, Answer::Out, "{src}: {s} ⊆ {t} which is In");
                if answers[ui] == Answer::In {
                    let w = SetExpr::union(t.clone(), u.clone());
                    assert_ne!(i.member(&w).unwrap().answer, Answer::Out, "{src}: union of In sets {w}");
                }
            }
        }
        assert_eq!(i.member(&SetExpr::omega()).unwrap().answer, Answer::Out, "{src}");
    }
}

#[test]
fn restriction_agrees_on_subsets() {
    let pool = pool();
    let ys = ["evens", "odds", "ap 1 3", "blowup evens dyadic", "omega"];
    let mut compared = 0;
    for src in ["Fin", "Z", "I_1/n", "density[triangular]"] {
        let i = IdealHandle::parse(src).unwrap();
        for y in ys {
            let y = parse_set(y).unwrap();
            let Ok(r) = i.restrict(&y) else { continue };
            for s in pool.iter().step_by(4) {
                let s = SetExpr::inter(s.clone(), y.clone());
                let (a, b) = (i.member(&s).unwrap().answer, r.member(&s).unwrap().answer);
                if a.is_decided() && b.is_decided() {
                    assert_eq!(a, b, "{src} restricted to {y} at {s}");
                    compared += 1;
                }
            }
        }
    }
    assert!(compared >= 50);
}

fn harmonic_window(s: &SetExpr, h: u64) -> BigRational {
    s.window(h).unwrap().into_iter().map(|x| BigRational::new(1.into(), (x as i64 + 1).into())).sum()
}

#[test]
fn pseudo_union_tail_mass() {
    let members: Vec<SetExpr> =
        ["factorials", "powers 2", "squares", "image (affine 1 1) factorials", "col 1", "powers 3", "branch 10"]
            .iter()
            .map(|s| parse_set(s).unwrap())
            .collect();
    let harm = IdealHandle::parse("I_1/n").unwrap();
    for n in 1..=members.len() {
        let (a, cuts) = pseudo_union_with_cuts(&harm, &members, n).unwrap();
        let budget: BigRational = (1..=n as u64).map(|k| BigRational::new(1.into(), (1i64 << k).into())).sum();
        assert!(harmonic_window(&a, 50_000) <= budget, "n = {n}");
        for (k, m) in members[..n].iter().enumerate() {
            assert!(m.window(50_000).unwrap().iter().all(|&x| x < cuts[k] || a.contains(x).unwrap()));
        }
    }
    let z = IdealHandle::parse("Z").unwrap();
    let zm: Vec<SetExpr> = ["squares", "powers 2", "inter evens squares", "factorials", "fin {3,5,7}"]
        .iter()
        .map(|s| parse_set(s).unwrap())
        .collect();
    let (a, _) = pseudo_union_with_cuts(&z, &zm, zm.len()).unwrap();
    let budget: BigRational = (1..=zm.len() as u64).map(|k| BigRational::new(1.into(), (1i64 << k).into())).sum();
    for m in 1..17u32 {
        let (lo, hi) = (1u64 << m, 1u64 << (m + 1));
        let count = a.count_below(hi).unwrap() - a.count_below(lo).unwrap();
        let density = BigRational::new((count as i64).into(), ((hi - lo) as i64).into());
        assert!(density <= budget, "block {m}");
    }
    assert!(!budget.is_zero());
}

proptest! {
    #[test]
    fn rado_witness_is_adjacent_exactly_to_a(a in prop::collection::btree_set(0u64..30, 0..8), b in prop::collection::btree_set(0u64..30, 0..8)) {
        let b: BTreeSet<u64> = b.difference(&a).copied().collect();
        let n = rado::witness(&a, &b).unwrap();
        prop_assert!(!a.contains(&n) && !b.contains(&n));
        for x in &a {
            prop_assert!(rado::edge(*x, n));
        }
        for x in &b {
            prop_assert!(!rado::edge(*x, n));
        }
    }
}
