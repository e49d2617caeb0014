//! Talagrand partitions, domination of partitions and hitting partitions
//! for the canonical branch family.

use serde::Serialize;

use crate::catalog::{IdealHandle, IdealKind};
use crate::coding;
use crate::error::{Error, Result};
use crate::natset::SetExpr;
use crate::partition::{Partition, PartitionKind};
use crate::verdict::Answer;

/// A partition into finite sets no member of the ideal contains infinitely
/// many blocks of.
pub fn talagrand_witness(i: &IdealHandle) -> Result<Partition> {
    if i.restriction().is_some() {
        return i.positivity_partition();
    }
    let p = match i.kind() {
        IdealKind::Fin | IdealKind::Z => Partition::dyadic(),
        IdealKind::Density(p) => p.clone(),
        IdealKind::Summable(w) => Partition::weighted(w.clone()),
        IdealKind::Ed | IdealKind::EdFin => Partition::delta_columns(),
        IdealKind::FinFin | IdealKind::W => Partition::triangular(),
        other => return Err(Error::Unsupported(format!("no Talagrand partition tabulated for {other}"))),
    };
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRecord {
    pub block_index: u64,
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub set: String,
    pub verdict: Answer,
    pub note: Option<String>,
    pub blocks: Vec<BlockRecord>,
    /// Blocks among the first `h` contained in the sample.
    pub contained: u64,
    /// Blocks among the first `h/2` contained in the sample.
    pub contained_half: u64,
    pub largest: Option<u64>,
    /// The contained-block count grew between `h/2` and `h`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TalagrandReport {
    pub partition: String,
    pub ideal: String,
    pub horizon: u64,
    pub samples: Vec<SampleReport>,
}

impl TalagrandReport {
    pub fn flagged(&self) -> impl Iterator<Item = &SampleReport> {
        self.samples.iter().filter(|s| s.flagged)
    }
}

/// Whether block `k` of `p` lies inside `s`.
pub fn block_contained(p: &Partition, s: &SetExpr, k: u64) -> Result<bool> {
    if p.carrier().is_none() && matches!(p.kind(), PartitionKind::Intervals { .. }) {
        let (lo, hi) = p.block_span(k)?.ok_or_else(|| Error::Overflow(format!("block {k} of {p} is beyond u64")))?;
        return s.contains_range(lo, hi);
    }
    for x in p.block(k)? {
        if !s.contains(x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Block containment of each sample over the first `h` blocks. Samples
/// not decided In are reported with a note and no block records.
pub fn verify_talagrand(p: &Partition, i: &IdealHandle, samples: &[SetExpr], h: u64) -> Result<TalagrandReport> {
    let mut out = Vec::new();
    for s in samples {
        let verdict = i.member(s)?;
        if verdict.answer != Answer::In {
            out.push(SampleReport {
                set: s.to_string(),
                verdict: verdict.answer,
                note: Some(format!("skipped: not decided In ({})", verdict.evidence.join("; "))),
                blocks: Vec::new(),
                contained: 0,
                contained_half: 0,
                largest: None,
                flagged: false,
            });
            continue;
        }
        let mut blocks = Vec::new();
        for k in 0..h {
            blocks.push(BlockRecord { block_index: k, contained: block_contained(p, s, k)? });
        }
        let count = |n: u64| blocks.iter().take(n as usize).filter(|b| b.contained).count() as u64;
        let (contained, contained_half) = (count(h), count(h / 2));
        out.push(SampleReport {
            set: s.to_string(),
            verdict: verdict.answer,
            note: None,
            largest: blocks.iter().rev().find(|b| b.contained).map(|b| b.block_index),
            blocks,
            contained,
            contained_half,
            flagged: contained > contained_half,
        });
    }
    Ok(TalagrandReport { partition: p.to_string(), ideal: i.to_string(), horizon: h, samples: out })
}

/// A partition each of whose blocks contains a full block of every input.
pub fn dominate(ps: &[Partition]) -> Result<Partition> {
    if ps.is_empty() {
        return Err(Error::Precondition("dominate needs at least one partition".into()));
    }
    let r = Partition::dominating(ps.to_vec());
    r.validate()?;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominationRecord {
    pub input_partition: usize,
    pub m: u64,
    pub witness_n: u64,
}

/// For each input and each `m < blocks`, a block `P_n ⊆ R_m`; errors if
/// some `R_m` has no such block.
pub fn domination_report(r: &Partition, ps: &[Partition], blocks: u64) -> Result<Vec<DominationRecord>> {
    let mut out = Vec::new();
    for m in 0..blocks {
        let (lo, hi) = r.block_span(m)?.ok_or_else(|| Error::Overflow(format!("block {m} of {r} is beyond u64")))?;
        for (i, p) in ps.iter().enumerate() {
            let mut n = match p.index_of(lo)? {
                Some(k) => k,
                None => p.index_of(p.block_span(0)?.map_or(0, |b| b.0))?.unwrap_or(0),
            };
            let witness = loop {
                let Some((a, b)) = p.block_span(n)? else { break None };
                if a >= hi {
                    break None;
                }
                if a >= lo && b <= hi {
                    break Some(n);
                }
                n += 1;
            };
            let witness_n = witness.ok_or_else(|| {
                Error::Verification(format!("block {m} of {r} contains no block of input {i}"))
            })?;
            out.push(DominationRecord { input_partition: i, m, witness_n });
        }
    }
    Ok(out)
}

/// The perfect almost disjoint family `{ ⋃_n P_{code(x↾n)} : x ∈ 2^ω }`
/// of blown-up branches, with the ideal the excluded set is small in.
#[derive(Debug, Clone)]
pub struct BranchFamily {
    pub ideal: IdealHandle,
    pub partition: Partition,
}

impl BranchFamily {
    /// The member along the branch `w^∞`.
    pub fn member(&self, w: &str) -> SetExpr {
        SetExpr::blowup(SetExpr::Branch(w.to_string()), self.partition.clone())
    }
}

/// Depth bound for the frontier search.
pub const MAX_FRONTIER_DEPTH: usize = 22;

/// First point of block `code` that is `≥ start` and outside `b`.
fn first_hit(p: &Partition, b: &SetExpr, code: u64, start: u64) -> Result<Option<u64>> {
    let Some((lo, hi)) = p.block_span(code)? else { return Ok(None) };
    if hi <= start {
        return Ok(None);
    }
    if p.carrier().is_none() && matches!(p.kind(), PartitionKind::Intervals { .. }) {
        return b.first_missing(lo.max(start), hi);
    }
    for x in p.block(code)? {
        if x >= start && !b.contains(x)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Smallest `end` such that every branch meets `[start, end) ∖ b`,
/// certified by the depth-`d` frontier, for the least `d` that works.
fn hitting_end(fam: &BranchFamily, b: &SetExpr, start: u64) -> Result<(u64, usize)> {
    let p = &fam.partition;
    for depth in 0..=MAX_FRONTIER_DEPTH {
        // running minimum of first hits along each node of the frontier
        let mut layer: Vec<Option<u64>> = vec![first_hit(p, b, 0, start)?];
        for d in 1..=depth {
            let mut next = Vec::with_capacity(layer.len() * 2);
            for (val, best) in layer.iter().enumerate() {
                for bit in 0..2u64 {
                    let bits = ((val as u64) << 1) | bit;
                    let code = (1u64 << d) - 1 + bits;
                    let hit = match best {
                        Some(_) => *best,
                        None => first_hit(p, b, code, start)?,
                    };
                    let hit = match (hit, *best) {
                        (Some(x), Some(y)) => Some(x.min(y)),
                        (x, y) => x.or(y),
                    };
                    next.push(hit);
                }
            }
            layer = next;
        }
        if layer.iter().all(Option::is_some) {
            let end = layer.iter().flatten().max().copied().unwrap_or(start) + 1;
            return Ok((end, depth));
        }
    }
    Err(Error::Verification(format!(
        "no hitting block from {start} within frontier depth {MAX_FRONTIER_DEPTH}"
    )))
}

/// Consecutive intervals `Q_0, …, Q_{h−1}` from 0 such that every member of
/// the family meets every `Q_n` outside `b`.
pub fn hitting_partition(fam: &BranchFamily, b: &SetExpr, h: u64) -> Result<Vec<(u64, u64)>> {
    let v = fam.ideal.member(b)?;
    if v.answer != Answer::In {
        return Err(Error::Precondition(format!("the excluded set {b} is not decided In for {}", fam.ideal)));
    }
    let mut out = Vec::new();
    let mut start = 0;
    for _ in 0..h {
        let (end, _) = hitting_end(fam, b, start)?;
        out.push((start, end));
        start = end;
    }
    Ok(out)
}

/// Binary code of the length-`n` prefix of `w^∞`.
pub fn branch_prefix_code(w: &str, n: usize) -> Result<u64> {
    let bits: Vec<bool> = w.bytes().cycle().take(n).map(|c| c == b'1').collect();
    coding::binary_code(&bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_partition, parse_set};

    #[test]
    fn witnesses() {
        assert_eq!(talagrand_witness(&IdealHandle::parse("Z").unwrap()).unwrap(), Partition::dyadic());
        assert_eq!(talagrand_witness(&IdealHandle::parse("ED_fin").unwrap()).unwrap(), Partition::delta_columns());
        let p = talagrand_witness(&IdealHandle::parse("I_1/n").unwrap()).unwrap();
        assert_eq!(p.block(0).unwrap(), vec![0]);
        assert!(talagrand_witness(&IdealHandle::parse("Nwd").unwrap()).is_err());
    }

    #[test]
    fn verify_examples() {
        let z = IdealHandle::parse("Z").unwrap();
        let r = verify_talagrand(&Partition::dyadic(), &z, &[SetExpr::Squares, SetExpr::omega()], 20).unwrap();
        assert_eq!(r.samples[0].contained, 1);
        assert_eq!(r.samples[0].largest, Some(0));
        assert!(r.samples[1].note.is_some());
        let r = verify_talagrand(&Partition::dyadic(), &IdealHandle::parse("Fin").unwrap(), &[parse_set("fin {1,2,3}").unwrap()], 20).unwrap();
        assert_eq!(r.samples[0].contained, 2);
    }

    #[test]
    fn domination() {
        let ps = [parse_partition("width 2").unwrap(), parse_partition("width 3").unwrap()];
        let r = dominate(&ps).unwrap();
        assert_eq!(domination_report(&r, &ps, 50).unwrap().len(), 100);
        let d = dominate(&[Partition::dyadic(), Partition::dyadic()]).unwrap();
        assert_eq!(d.block_span(0).unwrap(), Some((0, 2)));
        assert_eq!(d.block_span(3).unwrap(), Some((8, 16)));
    }

    #[test]
    fn hitting() {
        let fam = BranchFamily { ideal: IdealHandle::parse("Fin").unwrap(), partition: Partition::dyadic() };
        assert_eq!(hitting_partition(&fam, &SetExpr::empty(), 1).unwrap(), vec![(0, 2)]);
        assert_eq!(hitting_partition(&fam, &SetExpr::fin([1]), 1).unwrap(), vec![(0, 5)]);
        assert!(hitting_partition(&fam, &SetExpr::omega(), 1).is_err());
        let fam = BranchFamily { ideal: IdealHandle::parse("Z").unwrap(), partition: Partition::singletons() };
        let b = SetExpr::Squares;
        let q = hitting_partition(&fam, &b, 8).unwrap();
        for w in ["0", "1", "01", "110", "1000"] {
            let m = fam.member(w);
            for &(lo, hi) in &q {
                let hit = (lo..hi).any(|x| m.contains(x).unwrap() && !b.contains(x).unwrap());
                assert!(hit, "{w} misses [{lo},{hi})");
            }
        }
    }
}
