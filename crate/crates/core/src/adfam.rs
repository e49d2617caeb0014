//! Perfect almost disjoint families of blown-up branches, greedy
//! almost disjoint refinements and the pseudo-union upgrade to finite
//! intersections.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{Pow, Zero};
use serde::Serialize;

use crate::catalog::{pseudo_union_with_cuts, Capability, IdealHandle};
use crate::coding;
use crate::error::{Error, Result};
use crate::meager::talagrand_witness;
use crate::natset::SetExpr;
use crate::partition::{BoundaryRule, Partition, PartitionKind};
use crate::verdict::Answer;

/// Codes of `x↾0, …, x↾depth`, ascending.
pub fn branch_set(x: &str, depth: usize) -> Result<Vec<u64>> {
    let bits = coding::parse_bits(x)?;
    if bits.len() < depth {
        return Err(Error::Precondition(format!("'{x}' is shorter than depth {depth}")));
    }
    (0..=depth).map(|n| coding::binary_code(&bits[..n])).collect()
}

/// `⋃ { P_n : n ∈ s }`.
pub fn blowup(s: SetExpr, p: Partition) -> SetExpr {
    SetExpr::blowup(s, p)
}

/// Length of the longest common prefix of two bit strings, or an error when
/// one is a prefix of the other.
pub fn divergence(x: &str, y: &str) -> Result<usize> {
    let (a, b) = (coding::parse_bits(x)?, coding::parse_bits(y)?);
    a.iter()
        .zip(&b)
        .position(|(p, q)| p != q)
        .ok_or_else(|| Error::Precondition(format!("'{x}' and '{y}' are not distinct branches")))
}

/// Size of the intersection of the blow-ups of two branches given by
/// diverging prefixes: the total size of the blocks of their common nodes.
pub fn ad_intersection_size(x: &str, y: &str, p: &Partition) -> Result<BigUint> {
    let d = divergence(x, y)?;
    let mut total = BigUint::zero();
    for code in branch_set(&x[..d], d)? {
        total += p.block_len_big(code)?;
    }
    Ok(total)
}

/// Block `k` as a half-open interval with exact endpoints, also for blocks
/// beyond u64.
pub fn block_interval(p: &Partition, k: u64) -> Result<(BigUint, BigUint)> {
    if let PartitionKind::Intervals { carrier: None, rule: BoundaryRule::Geometric { first, ratio } } = p.kind() {
        let lo = BigUint::from(*first) * Pow::pow(&BigUint::from(*ratio), k);
        let hi = &lo * BigUint::from(*ratio);
        return Ok((lo, hi));
    }
    match p.kind() {
        PartitionKind::Intervals { carrier: None, .. } => {
            let (lo, hi) = p
                .block_span(k)?
                .ok_or_else(|| Error::Overflow(format!("block {k} of {p} is beyond u64")))?;
            Ok((lo.into(), hi.into()))
        }
        _ => Err(Error::Unsupported(format!("{p} is not a partition into intervals"))),
    }
}

/// The blow-up of a finite set of codes as sorted, disjoint intervals.
pub fn blowup_intervals(codes: &[u64], p: &Partition) -> Result<Vec<(BigUint, BigUint)>> {
    let mut out: Vec<(BigUint, BigUint)> = Vec::new();
    let sorted: BTreeSet<u64> = codes.iter().copied().collect();
    for k in sorted {
        let (lo, hi) = block_interval(p, k)?;
        if lo == hi {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 == lo => last.1 = hi,
            _ => out.push((lo, hi)),
        }
    }
    Ok(out)
}

pub fn is_primitive(w: &str) -> bool {
    let n = w.len();
    n > 0 && (1..n).filter(|d| n % d == 0).all(|d| w.as_bytes().chunks(d).any(|c| c != &w.as_bytes()[..d]))
}

/// Primitive binary words in length-lex order. Distinct primitive words
/// give distinct branches `w^∞`.
pub fn primitive_words() -> impl Iterator<Item = String> {
    (1usize..63)
        .flat_map(|len| (0u64..1 << len).map(move |v| format!("{v:0len$b}")))
        .filter(|w| is_primitive(w))
}

/// Prefix of `w^∞` of length `n`.
pub fn periodic_prefix(w: &str, n: usize) -> String {
    w.chars().cycle().take(n).collect()
}

/// Prefixes of `w^∞` and `v^∞` long enough to diverge.
fn diverging_prefixes(w: &str, v: &str) -> (String, String) {
    let n = w.len() + v.len();
    (periodic_prefix(w, n), periodic_prefix(v, n))
}

/// Common node codes of the branches `w^∞` and `v^∞`.
pub fn common_codes(w: &str, v: &str) -> Result<Vec<u64>> {
    let (x, y) = diverging_prefixes(w, v);
    let d = divergence(&x, &y)?;
    branch_set(&x[..d], d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub index: usize,
    pub target: SetExpr,
    pub chosen: Option<SetExpr>,
    /// The periodic word `w` of the branch `w^∞` the set was cut from.
    pub branch: Option<String>,
    pub positivity_evidence: Option<String>,
    /// Intersections with earlier sets lie below this point.
    pub cut_index: Option<u64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub verdict: Answer,
    /// Exact size or size bound of a finite intersection.
    pub finite_bound: Option<String>,
    pub evidence: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementAssignment {
    pub ideal: IdealHandle,
    pub partition: Option<Partition>,
    pub entries: Vec<Entry>,
    /// Pairwise records; `ledger[a][b]` for `a ≠ b` with both assigned.
    pub ledger: Vec<Vec<Option<PairRecord>>>,
}

impl RefinementAssignment {
    /// An assignment from explicit sets, each checked to be a positive
    /// subset of its target.
    pub fn from_sets(i: &IdealHandle, targets: &[SetExpr], chosen: &[SetExpr], h: u64) -> Result<RefinementAssignment> {
        if targets.len() != chosen.len() {
            return Err(Error::Precondition(format!("{} targets but {} chosen sets", targets.len(), chosen.len())));
        }
        let mut entries = Vec::new();
        for (index, (t, a)) in targets.iter().zip(chosen).enumerate() {
            if let Some(x) = stray(a, t, h)? {
                return Err(Error::Precondition(format!("{a} is not a subset of {t}: contains {x}")));
            }
            let v = i.member(a)?;
            if v.answer != Answer::Out {
                return Err(Error::Precondition(format!("{a} is not decided positive for {i}")));
            }
            entries.push(Entry {
                index,
                target: t.clone(),
                chosen: Some(a.clone()),
                branch: None,
                positivity_evidence: Some(v.evidence.join("; ")),
                cut_index: None,
                failure: None,
            });
        }
        let mut adr = RefinementAssignment { ideal: i.clone(), partition: None, entries, ledger: Vec::new() };
        adr.fill_ledger()?;
        Ok(adr)
    }

    pub fn assigned(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.chosen.is_some())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.failure.is_some())
    }

    /// The chosen set at `index`.
    pub fn chosen(&self, index: usize) -> Option<&SetExpr> {
        self.entries.get(index).and_then(|e| e.chosen.as_ref())
    }

    /// The intersection of two chosen sets, or for sets cut from branches
    /// the intersection of their targets with the blow-up of the common
    /// nodes, which contains it (with equality before trimming).
    fn meet(&self, a: usize, b: usize) -> Result<Option<SetExpr>> {
        let (ea, eb) = (&self.entries[a], &self.entries[b]);
        let (Some(sa), Some(sb)) = (&ea.chosen, &eb.chosen) else { return Ok(None) };
        if let (Some(w), Some(v), Some(p)) = (&ea.branch, &eb.branch, &self.partition) {
            let common = SetExpr::blowup(SetExpr::fin(common_codes(w, v)?), p.clone());
            let targets = SetExpr::inter(ea.target.clone(), eb.target.clone());
            return Ok(Some(SetExpr::inter(targets, common)));
        }
        Ok(Some(SetExpr::inter(sa.clone(), sb.clone())))
    }

    fn pair_record(&self, a: usize, b: usize) -> Result<Option<PairRecord>> {
        let Some(m) = self.meet(a, b)? else { return Ok(None) };
        let v = self.ideal.member(&m)?;
        let (ea, eb) = (&self.entries[a], &self.entries[b]);
        let mut rec = PairRecord { verdict: v.answer, finite_bound: None, evidence: v.evidence.join("; ") };
        if let (Some(w), Some(u), Some(p)) = (&ea.branch, &eb.branch, &self.partition) {
            let (x, y) = diverging_prefixes(w, u);
            if let Ok(n) = ad_intersection_size(&x, &y, p) {
                rec.finite_bound = Some(format!("at most {n} elements"));
            }
        }
        // after trimming, the later set meets the earlier one below its cut
        let later = if a > b { ea } else { eb };
        if let Some(c) = later.cut_index {
            rec.finite_bound = Some(format!("below {c}"));
            if rec.verdict != Answer::In {
                rec.verdict = Answer::In;
                rec.evidence = format!("finite: the trimmed set meets earlier ones below {c}");
            }
        }
        Ok(Some(rec))
    }

    fn fill_ledger(&mut self) -> Result<()> {
        let n = self.entries.len();
        let mut ledger = vec![vec![None; n]; n];
        for a in 0..n {
            for b in a + 1..n {
                let rec = self.pair_record(a, b)?;
                ledger[b][a] = rec.clone();
                ledger[a][b] = rec;
            }
        }
        self.ledger = ledger;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// An element of `a` outside `t` below `h`.
fn stray(a: &SetExpr, t: &SetExpr, h: u64) -> Result<Option<u64>> {
    SetExpr::diff(a.clone(), t.clone()).next(0, h)
}

/// Blocks of the base partition scanned for the block-count surrogate.
pub const SURROGATE_BLOCKS: u64 = 64;
/// Full blocks required by the surrogate.
pub const SURROGATE_MIN: u64 = 3;

/// Positivity evidence for `e ⊆ h`: an Out verdict, or `e` containing at
/// least `SURROGATE_MIN` nonempty blocks of the positivity witness of the
/// restriction to `h`.
fn positivity(i: &IdealHandle, target: &SetExpr, e: &SetExpr) -> Result<std::result::Result<String, String>> {
    let v = i.member(e)?;
    match v.answer {
        Answer::Out => return Ok(Ok(format!("decided Out: {}", v.evidence.join("; ")))),
        Answer::In => return Ok(Err(format!("decided In: {}", v.evidence.join("; ")))),
        Answer::Unknown => {}
    }
    let q = match i.restrict(target).and_then(|r| talagrand_witness(&r)) {
        Ok(q) => q,
        Err(err) => return Ok(Err(format!("undecided and no restricted witness: {err}"))),
    };
    let base = q.base();
    let missing = SetExpr::diff(target.clone(), e.clone());
    let mut full = Vec::new();
    for k in 0..SURROGATE_BLOCKS {
        let Some((lo, hi)) = base.block_span(k)? else { break };
        if target.next(lo, hi)?.is_some() && missing.next(lo, hi)?.is_none() {
            full.push(k);
        }
    }
    if full.len() as u64 >= SURROGATE_MIN {
        Ok(Ok(format!("contains blocks {full:?} of {q}")))
    } else {
        Ok(Err(format!("contains only blocks {full:?} of {q} among the first {SURROGATE_BLOCKS}")))
    }
}

/// Assigns to each positive target a positive subset cut from a distinct
/// blown-up branch. Targets that meet too few branches within `budget`
/// tries are retried after the others with four times the budget.
pub fn greedy_adr(i: &IdealHandle, family: &[SetExpr], budget: usize) -> Result<RefinementAssignment> {
    for h in family {
        let v = i.member(h)?;
        if v.answer != Answer::Out {
            return Err(Error::Precondition(format!("{h} is not decided positive for {i}")));
        }
    }
    let p = talagrand_witness(i)?;
    let mut entries: Vec<Entry> = family
        .iter()
        .enumerate()
        .map(|(index, t)| Entry {
            index,
            target: t.clone(),
            chosen: None,
            branch: None,
            positivity_evidence: None,
            cut_index: None,
            failure: None,
        })
        .collect();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut pending: Vec<usize> = (0..family.len()).collect();
    for round in [budget, budget.saturating_mul(4)] {
        for idx in std::mem::take(&mut pending) {
            let target = &family[idx];
            let mut notes = Vec::new();
            for w in primitive_words().filter(|w| !used.contains(w)).take(round) {
                let e = SetExpr::inter(target.clone(), SetExpr::blowup(SetExpr::Branch(w.clone()), p.clone()));
                match positivity(i, target, &e)? {
                    Ok(ev) => {
                        let entry = &mut entries[idx];
                        entry.chosen = Some(e);
                        entry.branch = Some(w.clone());
                        entry.positivity_evidence = Some(ev);
                        entry.failure = None;
                        used.insert(w);
                        notes.clear();
                        break;
                    }
                    Err(why) => notes.push(format!("{w}: {why}")),
                }
            }
            if entries[idx].chosen.is_none() {
                entries[idx].failure = Some(format!("no positive branch within {round} tries; {}", notes.join("; ")));
                pending.push(idx);
            }
        }
        if pending.is_empty() {
            break;
        }
    }
    let mut adr = RefinementAssignment { ideal: i.clone(), partition: Some(p), entries, ledger: Vec::new() };
    adr.fill_ledger()?;
    Ok(adr)
}

/// Trims each chosen set by a pseudo-union of its intersections with the
/// earlier ones, so that all pairwise intersections become finite.
pub fn fin_upgrade(i: &IdealHandle, adr: &RefinementAssignment) -> Result<RefinementAssignment> {
    if !i.capabilities().contains(&Capability::PseudoUnion) || !i.kind().is_p_ideal() {
        return Err(Error::Unsupported(format!("{i} has no pseudo-union")));
    }
    let n = adr.entries.len();
    for a in 0..n {
        for b in a + 1..n {
            if let Some(rec) = &adr.ledger[a][b] {
                if rec.verdict != Answer::In {
                    return Err(Error::Precondition(format!("the intersection of sets {a} and {b} is not decided In")));
                }
            }
        }
    }
    let mut out = adr.clone();
    for a in 0..n {
        let Some(sa) = adr.chosen(a) else { continue };
        let mut members = Vec::new();
        for b in 0..a {
            if let Some(m) = adr.meet(a, b)? {
                members.push(m);
            }
        }
        if members.is_empty() {
            continue;
        }
        let (bset, cuts) = pseudo_union_with_cuts(i, &members, members.len())?;
        let trimmed = SetExpr::diff(sa.clone(), bset.clone());
        let v = i.member(&trimmed)?;
        let evidence = match v.answer {
            Answer::Out => format!("decided Out: {}", v.evidence.join("; ")),
            Answer::Unknown if i.member(&bset)?.answer == Answer::In => {
                format!("a positive set minus the small set {bset}")
            }
            _ => return Err(Error::Verification(format!("trimmed set {trimmed} is not positive"))),
        };
        let e = &mut out.entries[a];
        e.chosen = Some(trimmed);
        e.positivity_evidence = Some(evidence);
        e.cut_index = Some(cuts.into_iter().max().unwrap_or(0));
    }
    out.fill_ledger()?;
    Ok(out)
}

/// Total size of `[lo, hi)` intervals.
pub fn interval_measure(iv: &[(BigUint, BigUint)]) -> BigUint {
    iv.iter().fold(BigUint::zero(), |acc, (lo, hi)| acc + (hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_set;
    use num_traits::One;

    #[test]
    fn branch_sets() {
        assert_eq!(branch_set("1011", 4).unwrap(), vec![0, 2, 5, 12, 26]);
        assert_eq!(branch_set("10", 2).unwrap(), vec![0, 2, 5]);
        assert_eq!(branch_set("0", 1).unwrap(), vec![0, 1]);
        assert!(branch_set("10", 3).is_err());
    }

    #[test]
    fn blowups() {
        let b = blowup(SetExpr::fin([0, 2]), Partition::dyadic());
        assert_eq!(b.window(64).unwrap(), vec![1, 4, 5, 6, 7]);
        let b = blowup(SetExpr::fin(branch_set("10", 2).unwrap()), Partition::dyadic());
        let expect: Vec<u64> = [1].into_iter().chain(4..8).chain(32..64).collect();
        assert_eq!(b.window(200).unwrap(), expect);
        assert_eq!(blowup(SetExpr::ap(0, 1), Partition::dyadic()).window(50).unwrap(), (0..50).collect::<Vec<_>>()[1..]);
    }

    #[test]
    fn intersection_sizes() {
        let d = Partition::dyadic();
        assert_eq!(ad_intersection_size("1011", "1000", &d).unwrap(), BigUint::from(37u32));
        assert_eq!(ad_intersection_size("0101", "1", &d).unwrap(), BigUint::one());
        assert!(ad_intersection_size("10", "101", &d).is_err());
        assert!(ad_intersection_size("10", "10", &d).is_err());
        let codes = branch_set("10", 2).unwrap();
        assert_eq!(interval_measure(&blowup_intervals(&codes, &d).unwrap()), BigUint::from(37u32));
    }

    #[test]
    fn words() {
        let w: Vec<String> = primitive_words().take(8).collect();
        assert_eq!(w, ["0", "1", "01", "10", "001", "010", "011", "100"]);
        assert!(!is_primitive("0101") && is_primitive("0110"));
        assert_eq!(common_codes("0", "1").unwrap(), vec![0]);
        assert_eq!(common_codes("01", "011").unwrap(), branch_set("01", 2).unwrap());
    }

    #[test]
    fn greedy_examples() {
        let z = IdealHandle::parse("Z").unwrap();
        let adr = greedy_adr(&z, &[SetExpr::omega(), parse_set("evens").unwrap()], 8).unwrap();
        assert_eq!(adr.failures().count(), 0);
        assert_eq!(adr.ledger[0][1].as_ref().unwrap().verdict, Answer::In);
        for e in adr.assigned() {
            let a = e.chosen.as_ref().unwrap();
            assert_eq!(z.member(a).unwrap().answer, Answer::Out);
            assert_eq!(stray(a, &e.target, 4096).unwrap(), None);
        }
        let adr = greedy_adr(&z, &[parse_set("evens").unwrap(), parse_set("odds").unwrap()], 8).unwrap();
        let m = SetExpr::inter(adr.chosen(0).unwrap().clone(), adr.chosen(1).unwrap().clone());
        assert_eq!(m.next(0, 1 << 20).unwrap(), None);
        let adr = greedy_adr(&z, &[SetExpr::omega()], 8).unwrap();
        assert_eq!(adr.assigned().count(), 1);
        assert!(greedy_adr(&z, &[parse_set("squares").unwrap()], 8).is_err());
        let fin = IdealHandle::parse("Fin").unwrap();
        assert!(greedy_adr(&fin, &[SetExpr::omega()], 8).is_ok());
    }

    #[test]
    fn greedy_skips_small_branches() {
        let z = IdealHandle::parse("Z").unwrap();
        let h = parse_set("blowup evens dyadic").unwrap();
        let adr = greedy_adr(&z, &[h], 8).unwrap();
        assert_eq!(adr.entries[0].branch.as_deref(), Some("1"));
    }

    #[test]
    fn upgrade() {
        let z = IdealHandle::parse("Z").unwrap();
        let targets = [SetExpr::omega(), SetExpr::omega()];
        let chosen = [parse_set("evens").unwrap(), parse_set("union odds (inter evens squares)").unwrap()];
        let adr = RefinementAssignment::from_sets(&z, &targets, &chosen, 1024).unwrap();
        assert_eq!(adr.ledger[0][1].as_ref().unwrap().verdict, Answer::In);
        let up = fin_upgrade(&z, &adr).unwrap();
        let cut = up.entries[1].cut_index.unwrap();
        let m = SetExpr::inter(up.chosen(0).unwrap().clone(), up.chosen(1).unwrap().clone());
        assert_eq!(m.next(cut, 100_000).unwrap(), None);
        assert_eq!(z.member(up.chosen(1).unwrap()).unwrap().answer, Answer::Out);
        assert!(fin_upgrade(&IdealHandle::parse("ED").unwrap(), &adr).is_err());

        let adr = greedy_adr(&z, &[SetExpr::omega(), parse_set("evens").unwrap()], 8).unwrap();
        let up = fin_upgrade(&z, &adr).unwrap();
        assert_eq!(up.ledger[0][1].as_ref().unwrap().verdict, Answer::In);
        assert!(up.to_json().unwrap().contains("cut_index"));
    }
}
