use adrefine_core::coding::{decode, encode, pair, unpair, CodedObject};
use adrefine_core::parse::{parse_partition, parse_set};
use adrefine_core::{Coding, SetExpr};
use num_integer::Integer;
use proptest::prelude::*;

fn objects() -> Vec<(Coding, CodedObject)> {
    let mut out = Vec::new();
    for a in 0..=12u64 {
        for b in 0..=12u64 {
            out.push((Coding::Pair, CodedObject::Pair { first: a, second: b }));
            if a < b {
                out.push((Coding::UnorderedPair, CodedObject::UnorderedPair { low: a, high: b }));
            }
        }
    }
    for len in 0..=12usize {
        for v in 0..1u32 << len {
            let bits = if len == 0 { String::new() } else { format!("{v:0len$b}") };
            out.push((Coding::BinarySeq, CodedObject::BinarySeq { bits }));
        }
    }
    let mut seqs = vec![vec![]];
    for _ in 0..3 {
        let longer: Vec<Vec<u64>> =
            seqs.iter().filter(|s: &&Vec<u64>| s.len() < 3).flat_map(|s| (0..=12).map(move |x| [s.clone(), vec![x]].concat())).collect();
        seqs.extend(longer);
        seqs.sort();
        seqs.dedup();
    }
    out.extend(seqs.into_iter().map(|terms| (Coding::NatSeq, CodedObject::NatSeq { terms })));
    for den in 1..=12u64 {
        for num in -12i64..=12 {
            if num.unsigned_abs().gcd(&den) != 1 {
                continue;
            }
            out.push((Coding::Rational, CodedObject::Rational { num, den }));
            if (0..=den as i64).contains(&num) {
                out.push((Coding::RationalUnit, CodedObject::Rational { num, den }));
            }
        }
    }
    out
}

#[test]
fn decode_after_encode_is_identity() {
    let objs = objects();
    assert!(objs.len() > 8000);
    for (c, o) in objs {
        let code = encode(c, &o).unwrap();
        assert_eq!(decode(c, code).unwrap(), o, "{} {o}", c.name());
    }
}

#[test]
fn encode_after_decode_is_identity() {
    for c in Coding::ALL {
        for n in 0..1000 {
            let o = decode(c, n).unwrap();
            assert_eq!(encode(c, &o).unwrap(), n, "{} {n}", c.name());
        }
    }
}

#[test]
fn partitions_cover_each_point_once() {
    for src in ["dyadic", "triangular", "singletons", "width 3", "geometric 2 3"] {
        let p = parse_partition(src).unwrap();
        let mut owner = vec![None; 10_000];
        let mut k = 0;
        while let Some((lo, hi)) = p.block_span(k).unwrap() {
            if lo >= 10_000 {
                break;
            }
            for x in p.block(k).unwrap() {
                if x < 10_000 {
                    assert!(owner[x as usize].replace(k).is_none(), "{src}: {x} twice");
                }
            }
            assert!(lo < hi || p.block(k).unwrap().is_empty());
            k += 1;
        }
        for (x, o) in owner.iter().enumerate() {
            assert_eq!(*o, p.index_of(x as u64).unwrap(), "{src}: {x}");
        }
    }
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u64..6, 1u64..7).prop_map(|(a, d)| format!("ap {a} {d}")),
        Just("squares".to_string()),
        Just("factorials".to_string()),
        (2u64..4).prop_map(|b| format!("powers {b}")),
        prop::collection::vec(0u64..300, 0..6)
            .prop_map(|v| format!("fin {{{}}}", v.iter().map(u64::to_string).collect::<Vec<_>>().join(","))),
        (0u64..4).prop_map(|k| format!("col {k}")),
        Just("branch 0110".to_string()),
    ]
}

fn expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("union ({a}) ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("inter ({a}) ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("diff ({a}) ({b})")),
            inner.clone().prop_map(|a| format!("blowup ({a}) dyadic")),
            inner.prop_map(|a| format!("image (affine 2 1) ({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn window_is_monotone(src in expr(), h in 0u64..400, extra in 0u64..400) {
        let s: SetExpr = parse_set(&src).unwrap();
        let small = s.window(h).unwrap();
        let big: Vec<u64> = s.window(h + extra).unwrap().into_iter().filter(|&x| x < h).collect();
        prop_assert_eq!(&small, &big);
        prop_assert_eq!(s.count_below(h).unwrap(), small.len() as u64);
        for x in 0..h {
            prop_assert_eq!(s.contains(x).unwrap(), small.binary_search(&x).is_ok());
        }
    }

    #[test]
    fn pairing_round_trip(m in 0u64..1 << 30, n in 0u64..1 << 30) {
        prop_assert_eq!(unpair(pair(m, n).unwrap()), (m, n));
    }
}
