//! The poset of finite partial assignments `α ↦ p(α) ⊆ H_α` with frozen
//! pairwise intersections, its projection to Cohen conditions on `H_α`,
//! and a chain builder meeting explicit dense requests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::IdealHandle;
use crate::error::{Error, Result};
use crate::meager::talagrand_witness;
use crate::natset::SetExpr;
use crate::partition::Partition;
use crate::verdict::Answer;

/// A finite partial function `α ↦ p(α)` into finite sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Condition(pub BTreeMap<usize, BTreeSet<u64>>);

/// A finite partial function from `H_α` to `{0, 1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CohenCondition(pub BTreeMap<u64, bool>);

impl Condition {
    pub fn new() -> Condition {
        Condition::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Condition
    where
        I: IntoIterator<Item = (usize, S)>,
        S: IntoIterator<Item = u64>,
    {
        Condition(pairs.into_iter().map(|(a, s)| (a, s.into_iter().collect())).collect())
    }

    pub fn dom(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }

    pub fn get(&self, a: usize) -> Option<&BTreeSet<u64>> {
        self.0.get(&a)
    }

    /// `p(α) ∩ p(β)`, empty when either is undefined.
    pub fn meet_of(&self, a: usize, b: usize) -> BTreeSet<u64> {
        match (self.0.get(&a), self.0.get(&b)) {
            (Some(x), Some(y)) => x.intersection(y).copied().collect(),
            _ => BTreeSet::new(),
        }
    }

    /// Checks every index against the family and every value against its set.
    pub fn validate(&self, family: &[SetExpr]) -> Result<()> {
        for (&a, set) in &self.0 {
            let h = family
                .get(a)
                .ok_or_else(|| Error::Domain(format!("index {a} is outside a family of {}", family.len())))?;
            for &n in set {
                if !h.contains(n)? {
                    return Err(Error::Domain(format!("{n} is assigned to index {a} but is not in {h}")));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (a, s)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}↦{s:?}")?;
        }
        write!(f, "}}")
    }
}

impl CohenCondition {
    /// `self ⊇ other` as functions.
    pub fn extends(&self, other: &CohenCondition) -> bool {
        other.0.iter().all(|(n, v)| self.0.get(n) == Some(v))
    }
}

/// `p ≤ q`: p extends q pointwise and freezes the intersections of q.
pub fn leq(p: &Condition, q: &Condition) -> bool {
    for (a, qa) in &q.0 {
        match p.0.get(a) {
            Some(pa) if pa.is_superset(qa) => {}
            _ => return false,
        }
    }
    let dom: Vec<usize> = q.dom().collect();
    for (i, &a) in dom.iter().enumerate() {
        for &b in &dom[i + 1..] {
            if p.meet_of(a, b) != q.meet_of(a, b) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clash {
    /// The condition whose frozen pair would grow (0 for p, 1 for q).
    pub side: usize,
    pub pair: (usize, usize),
    pub new_points: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Meet {
    Compatible(Condition),
    Incompatible(Clash),
}

/// The pointwise union when it lies below both; any common extension
/// contains it, so a grown pair means the two are incompatible.
pub fn meet(p: &Condition, q: &Condition) -> Meet {
    let mut r = p.clone();
    for (a, s) in &q.0 {
        r.0.entry(*a).or_default().extend(s.iter().copied());
    }
    for (side, c) in [p, q].into_iter().enumerate() {
        let dom: Vec<usize> = c.dom().collect();
        for (i, &a) in dom.iter().enumerate() {
            for &b in &dom[i + 1..] {
                let (old, new) = (c.meet_of(a, b), r.meet_of(a, b));
                if old != new {
                    let new_points = new.difference(&old).copied().collect();
                    return Meet::Incompatible(Clash { side, pair: (a, b), new_points });
                }
            }
        }
    }
    Meet::Compatible(r)
}

/// `e_α(p)`: defined on `⋃ p(β) ∩ H_α`, with value 1 exactly on `p(α)`.
pub fn project(p: &Condition, a: usize, family: &[SetExpr]) -> Result<CohenCondition> {
    let h = family
        .get(a)
        .ok_or_else(|| Error::Domain(format!("index {a} is outside a family of {}", family.len())))?;
    let mut out = BTreeMap::new();
    let own = p.get(a);
    for s in p.0.values() {
        for &n in s {
            if !out.contains_key(&n) && h.contains(n)? {
                out.insert(n, own.is_some_and(|o| o.contains(&n)));
            }
        }
    }
    Ok(CohenCondition(out))
}

/// A `p' ≤ p` with `e_α(p') = s`: the 1-points join `p(α)`, each new
/// 0-point joins the least other index whose set contains it.
pub fn lift(p: &Condition, s: &CohenCondition, a: usize, family: &[SetExpr]) -> Result<Condition> {
    let e = project(p, a, family)?;
    if !s.extends(&e) {
        return Err(Error::Precondition(format!("the Cohen condition does not extend e_{a}(p)")));
    }
    let h = &family[a];
    let mut out = p.clone();
    let mut ones = Vec::new();
    for (&n, &v) in &s.0 {
        if !h.contains(n)? {
            return Err(Error::Domain(format!("{n} is not in H_{a} = {h}")));
        }
        if v {
            ones.push(n);
        } else if !e.0.contains_key(&n) {
            let mut gamma = None;
            for (b, hb) in family.iter().enumerate() {
                if b != a && hb.contains(n)? {
                    gamma = Some(b);
                    break;
                }
            }
            let g = gamma
                .ok_or_else(|| Error::Precondition(format!("no index other than {a} covers {n}; add ω to the family")))?;
            out.0.entry(g).or_default().insert(n);
        }
    }
    out.0.entry(a).or_default().extend(ones);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DenseRequest {
    /// Put `index` into the domain.
    Touch { index: usize },
    /// Absorb a full block of index `≥ from` of the restricted witness.
    Block { index: usize, from: u64 },
}

impl DenseRequest {
    pub fn index(&self) -> usize {
        match *self {
            DenseRequest::Touch { index } | DenseRequest::Block { index, .. } => index,
        }
    }

    pub fn parse(s: &str) -> Result<DenseRequest> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |w: &str| w.parse::<u64>().map_err(|_| Error::Malformed(format!("'{w}' in request '{s}'")));
        match words.as_slice() {
            ["touch", a] => Ok(DenseRequest::Touch { index: num(a)? as usize }),
            ["block", a, n] => Ok(DenseRequest::Block { index: num(a)? as usize, from: num(n)? }),
            _ => Err(Error::Malformed(format!("request '{s}' is not 'touch α' or 'block α N'"))),
        }
    }
}

impl fmt::Display for DenseRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenseRequest::Touch { index } => write!(f, "touch {index}"),
            DenseRequest::Block { index, from } => write!(f, "block {index} {from}"),
        }
    }
}

/// Restricted blocks tried per block request.
pub const DEFAULT_BLOCK_BUDGET: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub request: DenseRequest,
    /// Points added to each index.
    pub condition_delta: BTreeMap<usize, Vec<u64>>,
    /// Pairs that entered the domain together at this step.
    pub freeze_events: Vec<(usize, usize)>,
    /// The restricted block absorbed by a block request.
    pub block: Option<u64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frozen {
    pub pair: (usize, usize),
    /// Step after which both indices were in the domain.
    pub step: usize,
    pub frozen_set: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSummary {
    pub index: usize,
    pub window: Vec<u64>,
    pub blocks_absorbed: u64,
    pub pairwise: Vec<(usize, Vec<u64>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericRun {
    pub steps: Vec<Step>,
    /// The chain, starting from the empty condition.
    pub chain: Vec<Condition>,
    pub freezes: Vec<Frozen>,
    pub summary: Vec<IndexSummary>,
    /// Restricted witness per touched index.
    pub witnesses: BTreeMap<usize, Partition>,
}

impl GenericRun {
    pub fn last(&self) -> &Condition {
        self.chain.last().expect("the chain starts with the empty condition")
    }

    pub fn failures(&self) -> impl Iterator<Item = &Step> {
        self.steps.iter().filter(|s| s.failure.is_some())
    }

    /// One JSON object per step, then one per index summary.
    pub fn transcript(&self) -> Result<String> {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).map_err(|e| Error::Io(e.to_string()))?);
            out.push('\n');
        }
        for s in &self.summary {
            out.push_str(&serde_json::to_string(s).map_err(|e| Error::Io(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Interleaves the requests: seed 0 keeps the given order, other seeds
/// shuffle across indices while keeping each index's requests in order.
pub fn interleave(requests: &[DenseRequest], seed: u64) -> Vec<DenseRequest> {
    if seed == 0 {
        return requests.to_vec();
    }
    let mut queues: BTreeMap<usize, std::collections::VecDeque<DenseRequest>> = BTreeMap::new();
    for r in requests {
        queues.entry(r.index()).or_default().push_back(*r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(requests.len());
    while out.len() < requests.len() {
        let live: Vec<usize> = queues.iter().filter(|(_, q)| !q.is_empty()).map(|(k, _)| *k).collect();
        let k = live[rng.gen_range(0..live.len())];
        out.extend(queues.get_mut(&k).and_then(|q| q.pop_front()));
    }
    out
}

/// Builds a descending chain meeting the requests in (interleaved) order.
pub fn generic_run(
    family: &[SetExpr],
    i: &IdealHandle,
    requests: &[DenseRequest],
    seed: u64,
    budget: u64,
) -> Result<GenericRun> {
    for (a, h) in family.iter().enumerate() {
        if i.member(h)?.answer != Answer::Out {
            return Err(Error::Precondition(format!("H_{a} = {h} is not decided positive for {i}")));
        }
    }
    let mut witnesses = BTreeMap::new();
    for r in requests {
        let a = r.index();
        let h = family
            .get(a)
            .ok_or_else(|| Error::Domain(format!("request '{r}' names an index outside a family of {}", family.len())))?;
        if let (DenseRequest::Block { .. }, false) = (r, witnesses.contains_key(&a)) {
            witnesses.insert(a, talagrand_witness(&i.restrict(h)?)?);
        }
    }
    let mut p = Condition::new();
    let mut chain = vec![p.clone()];
    let mut steps = Vec::new();
    let mut freezes = Vec::new();
    let mut absorbed: BTreeMap<usize, u64> = BTreeMap::new();
    for r in interleave(requests, seed) {
        let a = r.index();
        let mut step = Step { request: r, condition_delta: BTreeMap::new(), freeze_events: Vec::new(), block: None, failure: None };
        let mut next = p.clone();
        if !next.0.contains_key(&a) {
            next.0.insert(a, BTreeSet::new());
            for b in p.dom() {
                step.freeze_events.push((a.min(b), a.max(b)));
            }
        }
        if let DenseRequest::Block { from, .. } = r {
            let q = &witnesses[&a];
            let own = next.0[&a].clone();
            let mut found = None;
            for k in from..from.saturating_add(budget) {
                let block = match q.block(k) {
                    Ok(b) => b,
                    Err(_) => break,
                };
                // adding the block must not grow a frozen intersection
                let clean = block.iter().all(|n| own.contains(n) || p.0.iter().all(|(b, s)| *b == a || !s.contains(n)));
                if clean {
                    found = Some((k, block));
                    break;
                }
            }
            match found {
                Some((k, block)) => {
                    let added: Vec<u64> = block.into_iter().filter(|n| !own.contains(n)).collect();
                    next.0.get_mut(&a).unwrap().extend(added.iter().copied());
                    step.condition_delta.insert(a, added);
                    step.block = Some(k);
                    *absorbed.entry(a).or_default() += 1;
                }
                None => step.failure = Some(format!("no admissible block of {q} among indices {from}..{}", from.saturating_add(budget))),
            }
        }
        debug_assert!(leq(&next, &p));
        for &(x, y) in &step.freeze_events {
            freezes.push(Frozen { pair: (x, y), step: steps.len(), frozen_set: next.meet_of(x, y).into_iter().collect() });
        }
        p = next;
        chain.push(p.clone());
        steps.push(step);
    }
    let mut summary = Vec::new();
    for (&a, s) in &p.0 {
        let pairwise = p.dom().filter(|&b| b != a).map(|b| (b, p.meet_of(a, b).into_iter().collect())).collect();
        summary.push(IndexSummary {
            index: a,
            window: s.iter().copied().collect(),
            blocks_absorbed: absorbed.get(&a).copied().unwrap_or(0),
            pairwise,
        });
    }
    Ok(GenericRun { steps, chain, freezes, summary, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_set;

    fn fam(srcs: &[&str]) -> Vec<SetExpr> {
        srcs.iter().map(|s| parse_set(s).unwrap()).collect()
    }

    #[test]
    fn order() {
        let p = Condition::from_pairs([(0, vec![2, 4])]);
        let q = Condition::from_pairs([(0, vec![2])]);
        assert!(leq(&p, &q) && leq(&p, &p) && !leq(&q, &p));
        let p = Condition::from_pairs([(0, vec![2, 4]), (1, vec![4])]);
        let q = Condition::from_pairs([(0, vec![2]), (1, vec![])]);
        assert!(!leq(&p, &q));
        let family = fam(&["evens", "ap 0 4"]);
        assert!(p.validate(&family).is_ok());
        assert!(Condition::from_pairs([(1, vec![2])]).validate(&family).is_err());
    }

    #[test]
    fn meets() {
        let p = Condition::from_pairs([(0, vec![2])]);
        let q = Condition::from_pairs([(1, vec![3])]);
        let Meet::Compatible(r) = meet(&p, &q) else { panic!() };
        assert!(leq(&r, &p) && leq(&r, &q));
        let p = Condition::from_pairs([(0, vec![2]), (1, vec![5])]);
        let q = Condition::from_pairs([(0, vec![2]), (2, vec![7])]);
        let Meet::Compatible(r) = meet(&p, &q) else { panic!() };
        assert!(leq(&r, &p) && leq(&r, &q));
        let p = Condition::from_pairs([(0, vec![2]), (1, vec![])]);
        let q = Condition::from_pairs([(0, vec![]), (1, vec![2])]);
        assert_eq!(meet(&p, &q), Meet::Incompatible(Clash { side: 0, pair: (0, 1), new_points: vec![2] }));
    }

    #[test]
    fn projections() {
        let family = fam(&["evens", "omega"]);
        let p = Condition::from_pairs([(0, vec![2, 4]), (1, vec![4, 6])]);
        let e = project(&p, 0, &family).unwrap();
        assert_eq!(e.0, BTreeMap::from([(2, true), (4, true), (6, false)]));
        assert!(project(&Condition::new(), 0, &family).unwrap().0.is_empty());
        let e = project(&Condition::from_pairs([(1, vec![4])]), 0, &family).unwrap();
        assert_eq!(e.0, BTreeMap::from([(4, false)]));
    }

    #[test]
    fn lifts() {
        let family = fam(&["evens", "omega", "ap 0 4"]);
        let p = Condition::from_pairs([(0, vec![2]), (2, vec![4])]);
        let e = project(&p, 0, &family).unwrap();
        assert_eq!(lift(&p, &e, 0, &family).unwrap(), p);
        let mut s = e.clone();
        s.0.insert(6, true);
        let q = lift(&p, &s, 0, &family).unwrap();
        assert!(leq(&q, &p) && project(&q, 0, &family).unwrap() == s);
        let mut s = e.clone();
        s.0.insert(8, false);
        let q = lift(&p, &s, 0, &family).unwrap();
        assert!(leq(&q, &p) && project(&q, 0, &family).unwrap() == s);
        assert!(q.get(1).unwrap().contains(&8));
        let mut s = e;
        s.0.insert(4, true);
        assert!(lift(&p, &s, 0, &family).is_err());
    }

    #[test]
    fn runs() {
        let z = IdealHandle::parse("Z").unwrap();
        let family = fam(&["omega", "evens"]);
        let reqs: Vec<DenseRequest> =
            ["touch 0", "touch 1", "block 0 1", "block 1 1", "block 0 2"].iter().map(|s| DenseRequest::parse(s).unwrap()).collect();
        let run = generic_run(&family, &z, &reqs, 0, DEFAULT_BLOCK_BUDGET).unwrap();
        assert_eq!(run.failures().count(), 0);
        let last = run.last();
        let r = &run.chain[run.freezes[0].step + 1];
        assert_eq!(last.meet_of(0, 1), r.meet_of(0, 1));
        assert_eq!(run.summary[0].blocks_absorbed, 2);
        for w in run.chain.windows(2) {
            assert!(leq(&w[1], &w[0]));
        }
        assert!(run.transcript().unwrap().lines().count() == 7);
        let run = generic_run(&family, &z, &[], 0, 8).unwrap();
        assert!(run.last().0.is_empty());
        let run = generic_run(&family, &z, &reqs[..1], 0, 8).unwrap();
        assert_eq!(run.last().get(0), Some(&BTreeSet::new()));
        let shuffled = interleave(&reqs, 7);
        assert_eq!(shuffled.len(), reqs.len());
        assert!(generic_run(&fam(&["squares"]), &z, &[], 0, 8).is_err());
    }
}
