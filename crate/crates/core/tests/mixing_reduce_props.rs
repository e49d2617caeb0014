use std::collections::BTreeSet;

use adrefine_core::coding::binary_decode;
use adrefine_core::function::{FunctionWindow, MapExpr};
use adrefine_core::mixing::{fiber_parts, fibers, measure_bound, mixing_report, slalom_avoid, slalom_check, splitting_report, GroundFamily, Slalom};
use adrefine_core::parse::parse_set;
use adrefine_core::reduce::{clopen_to_aset, i0_search, j_node, verify_outcome, ClopenCode, OutcomeKind};
use num_traits::ToPrimitive;
use proptest::prelude::*;

const MAPS: &[&str] = &["id", "div 2", "div 3", "affine 2 1", "const 5"];
const SETS: &[&str] = &["omega", "evens", "odds", "ap 1 3", "squares", "ap 0 5"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn mixing_counts_agree_with_fiber_splitting(map in 0..MAPS.len(), h in 20u64..200) {
        let f = FunctionWindow::from_map(&MapExpr::parse(MAPS[map]).unwrap(), h).unwrap();
        let ground = GroundFamily::new(SETS.iter().map(|s| parse_set(s).unwrap()).collect(), h).unwrap();
        let mix = mixing_report(&f, &ground, h).unwrap();
        let parts = fiber_parts(&fibers(&f));
        let split = splitting_report(&parts, &ground, h).unwrap();
        let n = ground.0.len();
        for (xi, x) in ground.0.iter().enumerate() {
            let row = &split.counts[xi * parts.len()..(xi + 1) * parts.len()];
            for (yi, y) in ground.0.iter().enumerate() {
                let via_fibers = row
                    .iter()
                    .filter(|c| c.count > 0 && (c.part as u64) < h && y.contains(c.part as u64).unwrap())
                    .count() as u64;
                let pc = &mix.pairs[xi * n + yi];
                prop_assert_eq!((&pc.x, &pc.y), (&x.to_string(), &y.to_string()));
                prop_assert_eq!(pc.count, via_fibers);
            }
        }
    }

    #[test]
    fn slalom_runs_dodge(seed in any::<u64>(), depth in 1usize..7) {
        let s = Slalom::random(seed, depth);
        s.validate().unwrap();
        let run = slalom_avoid(&s, depth).unwrap();
        prop_assert!(run.xs.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(slalom_check(&s, &run.xs, &run.ys, depth));
    }

    #[test]
    fn measure_bound_below_one_and_decreasing(y in 0..4usize, n in 0u64..6, k in 1u32..8) {
        let ys = ["omega", "evens", "ap 1 3", "odds"];
        let y = parse_set(ys[y]).unwrap();
        let oracle: f64 = (0..64u64).filter(|&m| m < n || !y.contains(m).unwrap()).map(|m| 0.5f64.powi(m as i32 + 1)).sum();
        let a = measure_bound(&y, n, k).unwrap();
        let b = measure_bound(&y, n, k + 1).unwrap();
        let eps = a.exact.0.to_f64().unwrap();
        prop_assert!((eps - oracle).abs() < 1e-12);
        prop_assert!(eps < 1.0);
        prop_assert!(b.exact.1 <= a.exact.1);
        prop_assert!((a.exact.1.to_f64().unwrap() - oracle.powi(k as i32)).abs() < 1e-12);
    }

    #[test]
    fn clopen_sets_are_rectangles_along_points(
        depth in 1u32..6,
        mask in any::<u64>(),
        x in prop::collection::vec(any::<bool>(), 30),
    ) {
        let words: BTreeSet<u64> = (0..1u64 << depth).filter(|w| mask >> (w % 64) & 1 == 1).collect();
        let c = ClopenCode::new(depth, words).unwrap();
        prop_assume!(c.meets(&x));
        let h = 1 << 11;
        let a = clopen_to_aset(&c, h);
        let xs: Vec<u64> = (0..h).filter(|&m| { let s = binary_decode(m); x.starts_with(&s) }).collect();
        let ys: Vec<u64> = (0..x.len() as u64).filter(|&n| x[n as usize]).collect();
        for &m in &xs {
            let len = binary_decode(m).len() as u64;
            for &n in &ys {
                prop_assert_eq!(a.contains(&(m, n)), n < len);
            }
        }
    }

    #[test]
    fn j_preserves_and_reflects_prefixes(s in prop::collection::vec(0u64..5, 0..4), t in prop::collection::vec(0u64..5, 0..4)) {
        let (js, jt) = (j_node(&s).unwrap(), j_node(&t).unwrap());
        prop_assert!(js.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(t.starts_with(&s), jt.starts_with(&js));
    }

    #[test]
    fn i0_outcomes_hold(
        edges in prop::collection::btree_set((0u64..40, 0u64..40), 0..800),
        xs in prop::collection::btree_set(0u64..40, 6..12),
        ys in prop::collection::btree_set(0u64..40, 6..12),
    ) {
        let o = i0_search(&edges, &xs, &ys).unwrap();
        verify_outcome(&edges, &xs, &ys, &o).unwrap();
        prop_assert!(o.x.iter().all(|v| xs.contains(v)) && o.y.iter().all(|v| ys.contains(v)));
        let rect = o.x.iter().flat_map(|&m| o.y.iter().map(move |&n| (m, n)));
        let ok = match o.kind {
            OutcomeKind::Disjoint => rect.clone().all(|p| !edges.contains(&p)),
            OutcomeKind::Full => rect.clone().all(|p| edges.contains(&p)),
            OutcomeKind::Up => rect.clone().filter(|&(m, n)| m < n).all(|p| edges.contains(&p)),
            OutcomeKind::Down => rect.clone().filter(|&(m, n)| m > n).all(|p| edges.contains(&p)),
        };
        prop_assert!(ok);
    }
}
