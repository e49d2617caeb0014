//! Finite-scale mixing checks and the constructions around them: fibers
//! and block-index maps, anti-mixing pairs, slalom avoidance, the measure
//! bound for random functions, and nested splitting partitions.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::IdealHandle;
use crate::error::{Error, Result};
use crate::function::FunctionWindow;
use crate::natset::{FnExpr, SetExpr};
use crate::partition::Partition;
use crate::verdict::Answer;
use crate::weight::fmt_rational;

/// Desk-scale stand-in for the ground model's infinite sets.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundFamily(pub Vec<SetExpr>);

impl GroundFamily {
    /// Checks every member has at least two elements below `h`.
    pub fn new(sets: Vec<SetExpr>, h: u64) -> Result<GroundFamily> {
        for s in &sets {
            if s.count_below(h)? < 2 {
                return Err(Error::Precondition(format!("{s} has fewer than two elements below {h}")));
            }
        }
        Ok(GroundFamily(sets))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCount {
    pub x: String,
    pub y: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MixingReport {
    pub horizon: u64,
    pub pairs: Vec<PairCount>,
    pub min: Option<u64>,
    pub injective: bool,
}

/// `|f[X ∩ h] ∩ Y ∩ h|` for every ordered pair of ground sets.
pub fn mixing_report(f: &FunctionWindow, ground: &GroundFamily, h: u64) -> Result<MixingReport> {
    let mut images = Vec::new();
    for x in &ground.0 {
        let mut img = BTreeSet::new();
        for n in x.window(h)? {
            let v = f.require(n)?;
            if v < h {
                img.insert(v);
            }
        }
        images.push(img);
    }
    let mut pairs = Vec::new();
    for (x, img) in ground.0.iter().zip(&images) {
        for y in &ground.0 {
            let mut count = 0;
            for &v in img {
                if y.contains(v)? {
                    count += 1;
                }
            }
            pairs.push(PairCount { x: x.to_string(), y: y.to_string(), count });
        }
    }
    let min = pairs.iter().map(|p| p.count).min();
    Ok(MixingReport { horizon: h, pairs, min, injective: f.is_injective() })
}

/// `g ∘ f` with `g` the block-index map of `c`; points outside every block
/// go to 0.
pub fn to_surjective(f: &FunctionWindow, c: &Partition) -> Result<FunctionWindow> {
    f.compose_after(|y| Ok(c.index_of(y)?.unwrap_or(0)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fibers {
    /// `f⁻¹(n)` for `n` up to the largest value.
    pub blocks: Vec<Vec<u64>>,
    /// Values below the largest one with an empty fiber.
    pub gaps: Vec<u64>,
}

pub fn fibers(f: &FunctionWindow) -> Fibers {
    let top = f.pairs().map(|(_, v)| v).max();
    let mut blocks = vec![Vec::new(); top.map_or(0, |t| t as usize + 1)];
    for (x, v) in f.pairs() {
        blocks[v as usize].push(x);
    }
    let gaps = blocks.iter().enumerate().filter(|(_, b)| b.is_empty()).map(|(n, _)| n as u64).collect();
    Fibers { blocks, gaps }
}

/// `x_0 = 0`, `y_0 = g(0)`, `x_n = max { g(y_k) : k < n }`, `y_n = g(x_n)`.
pub fn antimix_pair(g: &FunctionWindow, k: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    if !g.is_strictly_increasing() {
        return Err(Error::Precondition("g is not strictly increasing".into()));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut top = 0u64;
    for n in 0..k {
        let x = if n == 0 { 0 } else { top };
        let y = g.require(x)?;
        top = top.max(g.require(y)?);
        xs.push(x);
        ys.push(y);
    }
    Ok((xs, ys))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AntimixReport {
    pub checked: u64,
    /// Pairs `(x, y)` some admissible injection could join.
    pub violations: Vec<(u64, u64)>,
}

/// Looks for `x ∈ X`, `y ∈ Y` below `bound` that an injection with
/// `f < g` and `f⁻¹ < g` pointwise could join, i.e. `y < g(x)` and
/// `x < g(y)`.
pub fn antimix_verify(g: &FunctionWindow, xs: &[u64], ys: &[u64], bound: u64) -> Result<AntimixReport> {
    let mut checked = 0;
    let mut violations = Vec::new();
    for &x in xs.iter().filter(|&&x| x < bound) {
        for &y in ys {
            checked += 1;
            if y < g.require(x)? && x < g.require(y)? {
                violations.push((x, y));
            }
        }
    }
    Ok(AntimixReport { checked, violations })
}

/// Levels `S(n)` of injective partial functions inside `a_n × a_n`, with
/// the gap sequence `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slalom {
    pub a: Vec<u64>,
    pub levels: Vec<Vec<Vec<(u64, u64)>>>,
}

impl Slalom {
    pub fn validate(&self) -> Result<()> {
        if self.levels.len() > self.a.len() {
            return Err(Error::Precondition(format!("{} levels but only {} gap terms", self.levels.len(), self.a.len())));
        }
        if self.a.first().is_some_and(|&a0| a0 <= 1) {
            return Err(Error::Precondition("a_0 must exceed 1".into()));
        }
        for (n, w) in self.a.windows(2).enumerate() {
            let need = (n as u64 + 2) << (n + 1);
            if w[1] <= w[0] || w[1] - w[0] <= need {
                return Err(Error::Precondition(format!("a_{} − a_{n} must exceed {need}", n + 1)));
            }
        }
        for (n, level) in self.levels.iter().enumerate() {
            if level.len() as u64 > 1 << n {
                return Err(Error::Precondition(format!("S({n}) has {} members, more than 2^{n}", level.len())));
            }
            for s in level {
                let mut dom = BTreeSet::new();
                let mut ran = BTreeSet::new();
                for &(x, y) in s {
                    if x >= self.a[n] || y >= self.a[n] {
                        return Err(Error::Precondition(format!("({x}, {y}) in S({n}) leaves a_{n} × a_{n}")));
                    }
                    if !dom.insert(x) || !ran.insert(y) {
                        return Err(Error::Precondition(format!("a member of S({n}) is not an injective function")));
                    }
                }
            }
        }
        Ok(())
    }

    fn level(&self, n: usize) -> &[Vec<(u64, u64)>] {
        self.levels.get(n).map_or(&[], |l| l.as_slice())
    }

    /// Values `s(x)` over `s ∈ S(n)` with `x ∈ dom(s)`.
    fn values_at(&self, n: usize, x: u64) -> impl Iterator<Item = u64> + '_ {
        self.level(n).iter().flat_map(move |s| s.iter().filter(move |p| p.0 == x).map(|p| p.1))
    }

    /// A seeded random slalom with levels `0..=depth` meeting the invariants.
    pub fn random(seed: u64, depth: usize) -> Slalom {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![rng.gen_range(2..6u64)];
        for n in 0..depth {
            let need = (n as u64 + 2) << (n + 1);
            a.push(a[n] + need + 1 + rng.gen_range(0..4));
        }
        let mut levels = Vec::new();
        for (n, &an) in a.iter().enumerate() {
            let count = rng.gen_range(0..=1u64 << n);
            let mut level = Vec::new();
            for _ in 0..count {
                let size = rng.gen_range(0..=an);
                let mut dom: Vec<u64> = (0..an).collect();
                let mut ran: Vec<u64> = (0..an).collect();
                let mut s = Vec::new();
                for i in 0..size as usize {
                    let j = rng.gen_range(i..dom.len());
                    dom.swap(i, j);
                    let j = rng.gen_range(i..ran.len());
                    ran.swap(i, j);
                    s.push((dom[i], ran[i]));
                }
                s.sort_unstable();
                level.push(s);
            }
            levels.push(level);
        }
        Slalom { a, levels }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlalomRun {
    pub xs: Vec<u64>,
    pub ys: Vec<u64>,
    /// Values ruled out for each `y_n`.
    pub forbidden: Vec<Vec<u64>>,
}

/// Builds `x_0 < … < x_N` and `y_0, …, y_N` with `x_n, y_n ∈ a_n ∖ a_{n−1}`
/// dodging the slalom, least values first; `y_n` also avoids `x_n` when
/// some admissible value does.
pub fn slalom_avoid(s: &Slalom, depth: usize) -> Result<SlalomRun> {
    s.validate()?;
    if depth >= s.a.len() {
        return Err(Error::Precondition(format!("depth {depth} needs {} gap terms", depth + 1)));
    }
    let (mut xs, mut ys, mut forbidden) = (Vec::new(), Vec::<u64>::new(), Vec::new());
    for n in 0..=depth {
        let lo = if n == 0 { 0 } else { s.a[n - 1] };
        let hi = s.a[n];
        let x = (lo..hi)
            .find(|&x| s.values_at(n, x).all(|v| !ys.contains(&v)))
            .ok_or_else(|| Error::Verification(format!("no admissible x_{n} in [{lo}, {hi})")))?;
        xs.push(x);
        let bad: BTreeSet<u64> = xs.iter().flat_map(|&xk| s.values_at(n, xk)).collect();
        let ok = |y: &u64| !bad.contains(y);
        let y = (lo..hi)
            .filter(ok)
            .find(|&y| y != x)
            .or_else(|| (lo..hi).find(ok))
            .ok_or_else(|| Error::Verification(format!("no admissible y_{n} in [{lo}, {hi})")))?;
        ys.push(y);
        forbidden.push(bad.into_iter().collect());
    }
    Ok(SlalomRun { xs, ys, forbidden })
}

/// Whether `(x_i, y_j) ∉ ⋃ S(k)` for all `k ≤ max(i, j) ≤ N`: each pair
/// avoids the level where both points are first available, and earlier
/// levels.
pub fn slalom_check(s: &Slalom, xs: &[u64], ys: &[u64], depth: usize) -> bool {
    for (i, &x) in xs.iter().enumerate().take(depth + 1) {
        for (j, &y) in ys.iter().enumerate().take(depth + 1) {
            for k in 0..=i.max(j) {
                if s.level(k).iter().any(|f| f.contains(&(x, y))) {
                    return false;
                }
            }
        }
    }
    true
}

/// The stronger disjointness `(X_n × Y_n) ∩ ⋃_{k ≤ n} ⋃ S(k) = ∅` for all
/// `n ≤ N`, which also asks old pairs to avoid later levels.
pub fn slalom_check_strict(s: &Slalom, xs: &[u64], ys: &[u64], depth: usize) -> bool {
    let n = depth.min(xs.len().saturating_sub(1)).min(ys.len().saturating_sub(1));
    slalom_check(s, &xs[..=n], &ys[..=n], n)
        && (0..=n).all(|k| s.level(k).iter().all(|f| f.iter().all(|p| !(xs[..=n].contains(&p.0) && ys[..=n].contains(&p.1)))))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasureBound {
    pub epsilon: String,
    pub bound: String,
    #[serde(skip)]
    pub exact: (BigRational, BigRational),
}

/// `ε = Σ { 2^{−m−1} : m ∈ n ∪ (ω ∖ Y) }` and the bound `ε^k` on the
/// measure of `{ f : f[X] ∩ Y ⊆ n }` for `|X| ≥ k`.
pub fn measure_bound(y: &SetExpr, n: u64, k: u32) -> Result<MeasureBound> {
    let q = y
        .periodic()
        .ok_or_else(|| Error::Unsupported(format!("the complement of {y} has no exact sum in the vocabulary")))?;
    let half = |m: u64| BigRational::new(BigInt::one(), BigInt::one() << (m + 1));
    let start = q.threshold().max(n);
    let mut eps = BigRational::zero();
    for m in 0..start {
        if m < n || !q.contains(m) {
            eps += half(m);
        }
    }
    let p = q.period();
    let mut cycle = BigRational::zero();
    for m in start..start + p {
        if !q.contains(m) {
            cycle += half(m);
        }
    }
    // the tail repeats every p with ratio 2^{−p}
    let ratio = BigRational::new(BigInt::one(), BigInt::one() << p);
    eps += cycle / (BigRational::one() - ratio);
    let bound = Pow::pow(&eps, k);
    Ok(MeasureBound { epsilon: fmt_rational(&eps), bound: fmt_rational(&bound), exact: (eps, bound) })
}

fn fin() -> IdealHandle {
    IdealHandle::new(crate::catalog::IdealKind::Fin)
}

fn require_infinite(s: &SetExpr) -> Result<()> {
    match fin().member(s)?.answer {
        Answer::Out => Ok(()),
        Answer::In => Err(Error::Precondition(format!("{s} is finite"))),
        Answer::Unknown => Err(Error::Precondition(format!("{s} is not known to be infinite"))),
    }
}

/// Window check that the parts are disjoint and cover `[0, h)`.
fn check_partition(parts: &[SetExpr], h: u64) -> Result<()> {
    let mut seen = vec![false; h as usize];
    for p in parts {
        for x in p.window(h)? {
            if std::mem::replace(&mut seen[x as usize], true) {
                return Err(Error::Domain(format!("{x} lies in two parts")));
            }
        }
    }
    if let Some(x) = seen.iter().position(|b| !b) {
        return Err(Error::Domain(format!("{x} lies in no part")));
    }
    Ok(())
}

const PARTITION_CHECK: u64 = 1024;

/// Iterated nesting: with `Q` the last input and `e` the increasing
/// enumeration of `Q_0`, the parts are `e[R_0], …, e[R_{m−1}], Q_1` where
/// `R` nests the earlier inputs.
pub fn nest(ps: &[(SetExpr, SetExpr)], n: usize) -> Result<Vec<SetExpr>> {
    if n < 2 || ps.len() != n - 1 {
        return Err(Error::Precondition(format!("an {n}-part nesting takes {} splittings, {} given", n.saturating_sub(1), ps.len())));
    }
    for (p0, p1) in ps {
        require_infinite(p0)?;
        require_infinite(p1)?;
        check_partition(&[p0.clone(), p1.clone()], PARTITION_CHECK)?;
    }
    let mut parts = vec![ps[0].0.clone(), ps[0].1.clone()];
    for (q0, q1) in &ps[1..] {
        let e = FnExpr::Enumerate(Arc::new(q0.clone()));
        parts = parts.into_iter().map(|r| SetExpr::image(e.clone(), r)).collect();
        parts.push(q1.clone());
    }
    Ok(parts)
}

/// How many classes to regroup blocks into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classes {
    Finite(u64),
    /// Rows of the pairing: class `k` takes the blocks `m` with first
    /// coordinate `k`.
    Omega,
}

/// `Y_k = ⋃ { P_m : m in class k }`, for the first `rows` classes (all of
/// them when finite). Points outside every block join `Y_0`.
pub fn regroup(p: &Partition, classes: Classes, rows: u64) -> Result<Vec<SetExpr>> {
    let count = match classes {
        Classes::Finite(n) if n < 2 => return Err(Error::Precondition("regrouping needs at least two classes".into())),
        Classes::Finite(n) => n,
        Classes::Omega => rows,
    };
    let mut loose = false;
    for x in 0..PARTITION_CHECK {
        if !p.covers(x)? {
            loose = true;
            break;
        }
    }
    let mut out = Vec::new();
    for k in 0..count {
        let idx = match classes {
            Classes::Finite(n) => SetExpr::ap(k, n),
            Classes::Omega => SetExpr::Col(k),
        };
        let mut y = SetExpr::blowup(idx, p.clone());
        if k == 0 && loose {
            y = SetExpr::union(y, SetExpr::diff(SetExpr::omega(), SetExpr::blowup(SetExpr::omega(), p.clone())));
        }
        out.push(y);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitCount {
    pub x: String,
    pub part: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplittingReport {
    pub horizon: u64,
    pub counts: Vec<SplitCount>,
    pub min: Option<u64>,
}

/// `|X ∩ Y_k ∩ h|` for every ground set and part.
pub fn splitting_report(parts: &[SetExpr], ground: &GroundFamily, h: u64) -> Result<SplittingReport> {
    let mut counts = Vec::new();
    for x in &ground.0 {
        let xs = x.window(h)?;
        for (k, y) in parts.iter().enumerate() {
            let mut count = 0;
            for &v in &xs {
                if y.contains(v)? {
                    count += 1;
                }
            }
            counts.push(SplitCount { x: x.to_string(), part: k, count });
        }
    }
    let min = counts.iter().map(|c| c.count).min();
    Ok(SplittingReport { horizon: h, counts, min })
}

/// Parts given by fibers, as finite sets.
pub fn fiber_parts(f: &Fibers) -> Vec<SetExpr> {
    f.blocks.iter().map(|b| SetExpr::fin(b.iter().copied())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::MapExpr;
    use crate::parse::{parse_fn, parse_set};

    fn window(src: &str, h: u64) -> FunctionWindow {
        FunctionWindow::from_map(&MapExpr::parse(src).unwrap(), h).unwrap()
    }

    fn ground(srcs: &[&str]) -> GroundFamily {
        GroundFamily::new(srcs.iter().map(|s| parse_set(s).unwrap()).collect(), 64).unwrap()
    }

    #[test]
    fn mixing() {
        let g = ground(&["evens", "odds"]);
        let r = mixing_report(&window("id", 100), &g, 100).unwrap();
        assert_eq!(r.min, Some(0));
        let half = window("div 2", 400);
        let small = mixing_report(&half, &g, 100).unwrap();
        let large = mixing_report(&half, &g, 400).unwrap();
        assert!(small.pairs.iter().zip(&large.pairs).all(|(a, b)| a.count > 0 && b.count > a.count));
        assert!(!window("const 0", 10).injective());
        assert!(mixing_report(&window("id", 10), &g, 100).is_err());
    }

    #[test]
    fn surjective_and_fibers() {
        let s = to_surjective(&window("id", 16), &Partition::dyadic()).unwrap();
        assert_eq!(s.get(5), Some(2));
        assert_eq!(s.len(), 16);
        let c = to_surjective(&window("const 0", 8), &Partition::dyadic()).unwrap();
        assert!(c.pairs().all(|(_, v)| v == 0));
        let f = fibers(&window("div 2", 6));
        assert_eq!(f.blocks, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        assert_eq!(fibers(&window("id", 3)).blocks, vec![vec![0], vec![1], vec![2]]);
        let gap = FunctionWindow::new([(0, 0), (1, 1), (2, 2), (3, 4)], false).unwrap();
        assert_eq!(fibers(&gap).gaps, vec![3]);
    }

    #[test]
    fn antimix() {
        let g = window("affine 2 3", 4096);
        assert_eq!(antimix_pair(&g, 3).unwrap(), (vec![0, 9, 45], vec![3, 21, 93]));
        let succ = window("affine 1 1", 64);
        assert_eq!(antimix_pair(&succ, 3).unwrap(), (vec![0, 2, 4], vec![1, 3, 5]));
        assert_eq!(antimix_pair(&g, 1).unwrap(), (vec![0], vec![3]));
        assert!(antimix_pair(&window("const 1", 8), 2).is_err());
        let (xs, ys) = antimix_pair(&g, 3).unwrap();
        assert!(antimix_verify(&g, &xs, &ys, 100).unwrap().violations.is_empty());
        assert!(antimix_verify(&g, &[0], &ys, 100).unwrap().violations.is_empty());
        let mut bad = ys.clone();
        bad.push(2);
        assert_eq!(antimix_verify(&g, &xs, &bad, 100).unwrap().violations, vec![(0, 2)]);
        assert!(parse_fn("affine 2 3").is_ok());
    }

    #[test]
    fn slaloms() {
        let empty = Slalom { a: vec![2, 7, 20], levels: vec![] };
        let run = slalom_avoid(&empty, 2).unwrap();
        assert_eq!((run.xs.clone(), run.ys.clone()), (vec![0, 2, 7], vec![1, 3, 8]));
        assert!(slalom_check(&empty, &run.xs, &run.ys, 2));
        let one = Slalom { a: vec![2, 7, 20], levels: vec![vec![vec![(0, 1)]]] };
        let run = slalom_avoid(&one, 0).unwrap();
        assert_eq!((run.xs.clone(), run.ys.clone()), (vec![0], vec![0]));
        assert!(slalom_check(&one, &run.xs, &run.ys, 0));
        assert!(Slalom { a: vec![2, 6], levels: vec![] }.validate().is_err());
        assert!(Slalom { a: vec![1], levels: vec![] }.validate().is_err());
        for seed in 0..5 {
            let s = Slalom::random(seed, 6);
            s.validate().unwrap();
            let run = slalom_avoid(&s, 6).unwrap();
            assert!(slalom_check(&s, &run.xs, &run.ys, 6));
        }
        // an old pair caught by a later level: allowed by the construction
        let late = Slalom { a: vec![2, 7], levels: vec![vec![], vec![vec![(0, 1)]]] };
        let run = slalom_avoid(&late, 1).unwrap();
        assert!(slalom_check(&late, &run.xs, &run.ys, 1));
        assert!(!slalom_check_strict(&late, &run.xs, &run.ys, 1));
    }

    #[test]
    fn measure() {
        let evens = parse_set("evens").unwrap();
        let third = BigRational::new(1.into(), 3.into());
        let m = measure_bound(&evens, 0, 1).unwrap();
        assert_eq!(m.exact.0, third);
        assert_eq!(measure_bound(&evens, 0, 3).unwrap().exact.1, BigRational::new(1.into(), 27.into()));
        assert!(measure_bound(&SetExpr::omega(), 0, 1).unwrap().exact.0.is_zero());
        assert_eq!(measure_bound(&SetExpr::omega(), 2, 1).unwrap().exact.0, BigRational::new(3.into(), 4.into()));
        assert!(measure_bound(&parse_set("squares").unwrap(), 0, 1).is_err());
    }

    #[test]
    fn nesting_and_regrouping() {
        let split = (parse_set("evens").unwrap(), parse_set("odds").unwrap());
        let parts = nest(&[split.clone(), split.clone()], 3).unwrap();
        let expect = [parse_set("ap 0 4").unwrap(), parse_set("ap 2 4").unwrap(), parse_set("odds").unwrap()];
        for (p, e) in parts.iter().zip(&expect) {
            assert_eq!(p.window(200).unwrap(), e.window(200).unwrap());
        }
        let r = splitting_report(&parts, &ground(&["omega"]), 100).unwrap();
        assert!(r.min.unwrap() >= 24);
        assert!(nest(&[(SetExpr::fin([0]), parse_set("diff omega (fin {0})").unwrap())], 2).is_err());
        let two = regroup(&Partition::dyadic(), Classes::Finite(2), 0).unwrap();
        check_partition(&two, 1024).unwrap();
        assert!(two[1].contains(2).unwrap() && two[0].contains(4).unwrap() && two[0].contains(0).unwrap());
        let r = splitting_report(&two, &ground(&["ap 1 2"]), 512).unwrap();
        assert!(r.min.unwrap() > 0);
        let rows = regroup(&Partition::dyadic(), Classes::Omega, 3).unwrap();
        assert!(rows[1].contains(2).unwrap());
        let r = splitting_report(&[split.0.clone(), split.1.clone()], &ground(&["evens"]), 100).unwrap();
        assert_eq!(r.counts[1].count, 0);
    }
}
