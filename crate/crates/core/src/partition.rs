//! Partitions of ω (or of a carrier set) into nonempty finite blocks,
//! enumerated in order.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::Pow;

use crate::coding;
use crate::error::{Error, Result};
use crate::natset::{Paren, SetExpr};
use crate::weight::WeightFn;

/// Blocks larger than this are never materialised.
pub const MAX_BLOCK_ELEMS: u64 = 1 << 24;
/// Carrier scans give up after this many consecutive empty base blocks.
const MAX_EMPTY_RUN: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Blocks `[b_k, b_{k+1})`, then intervals of width `tail_width` from the
    /// last bound.
    Explicit { bounds: Vec<u64>, tail_width: u64 },
    /// Blocks `[first·ratio^k, first·ratio^{k+1})`; `dyadic` is `first = 1,
    /// ratio = 2`, which leaves 0 outside every block.
    Geometric { first: u64, ratio: u64 },
    /// Blocks `[k(k+1)/2, (k+1)(k+2)/2)`: the antidiagonals of the pair coding.
    Triangular,
    /// Greedy blocks of weight at least 1.
    Weighted(WeightFn),
    /// Greedy merge absorbing one fresh block of every input per block.
    Dominating(Vec<Partition>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionKind {
    /// Blocks of the rule, intersected with `carrier` when present (empty
    /// intersections are skipped).
    Intervals { carrier: Option<SetExpr>, rule: BoundaryRule },
    /// Explicit blocks covering `[0, m)`, then width-`tail_width` intervals.
    PrefixTail { prefix: Vec<Vec<u64>>, tail_width: u64 },
    /// Block `n` is the column `{(n,k) : k ≤ n}` of Δ under pair coding.
    DeltaColumns,
}

#[derive(Debug, Default)]
struct Cache {
    bounds: Vec<u64>,
    /// Base indices of the nonempty carrier blocks found so far.
    base_of: Vec<u64>,
    scanned: u64,
}

#[derive(Clone)]
pub struct Partition {
    kind: Arc<PartitionKind>,
    cache: Arc<Mutex<Cache>>,
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({self})")
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.kind, &other.kind) || self.kind == other.kind
    }
}

impl Eq for Partition {}

impl Partition {
    pub fn new(kind: PartitionKind) -> Partition {
        Partition { kind: Arc::new(kind), cache: Arc::new(Mutex::new(Cache::default())) }
    }

    fn interval(rule: BoundaryRule) -> Partition {
        Partition::new(PartitionKind::Intervals { carrier: None, rule })
    }

    pub fn dyadic() -> Partition {
        Partition::interval(BoundaryRule::Geometric { first: 1, ratio: 2 })
    }

    pub fn geometric(first: u64, ratio: u64) -> Partition {
        Partition::interval(BoundaryRule::Geometric { first, ratio })
    }

    pub fn triangular() -> Partition {
        Partition::interval(BoundaryRule::Triangular)
    }

    pub fn weighted(w: WeightFn) -> Partition {
        Partition::interval(BoundaryRule::Weighted(w))
    }

    pub fn singletons() -> Partition {
        Partition::width(1)
    }

    pub fn width(w: u64) -> Partition {
        Partition::interval(BoundaryRule::Explicit { bounds: vec![0], tail_width: w })
    }

    /// Interval blocks between the given bounds; the tail repeats the last gap.
    pub fn bounds(bounds: Vec<u64>) -> Partition {
        let tail_width = match bounds.as_slice() {
            [.., a, b] => b - a,
            _ => 1,
        };
        Partition::interval(BoundaryRule::Explicit { bounds, tail_width })
    }

    pub fn explicit(prefix: Vec<Vec<u64>>, tail_width: u64) -> Partition {
        Partition::new(PartitionKind::PrefixTail { prefix, tail_width })
    }

    pub fn delta_columns() -> Partition {
        Partition::new(PartitionKind::DeltaColumns)
    }

    pub fn dominating(ps: Vec<Partition>) -> Partition {
        Partition::interval(BoundaryRule::Dominating(ps))
    }

    /// The same boundary rule, with blocks cut down to `carrier`.
    pub fn on(&self, carrier: SetExpr) -> Result<Partition> {
        match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule } => {
                Ok(Partition::new(PartitionKind::Intervals { carrier: Some(carrier), rule: rule.clone() }))
            }
            PartitionKind::Intervals { carrier: Some(c), rule } => Ok(Partition::new(PartitionKind::Intervals {
                carrier: Some(SetExpr::inter(c.clone(), carrier)),
                rule: rule.clone(),
            })),
            _ => Err(Error::Unsupported(format!("cannot restrict {self} to a carrier"))),
        }
    }

    pub fn kind(&self) -> &PartitionKind {
        &self.kind
    }

    pub fn carrier(&self) -> Option<&SetExpr> {
        match &*self.kind {
            PartitionKind::Intervals { carrier, .. } => carrier.as_ref(),
            _ => None,
        }
    }

    pub fn rule(&self) -> Option<&BoundaryRule> {
        match &*self.kind {
            PartitionKind::Intervals { rule, .. } => Some(rule),
            _ => None,
        }
    }

    /// The partition without its carrier.
    pub fn base(&self) -> Partition {
        match &*self.kind {
            PartitionKind::Intervals { carrier: Some(_), rule } => Partition::interval(rule.clone()),
            _ => self.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &*self.kind {
            PartitionKind::Intervals { carrier, rule } => {
                if let Some(c) = carrier {
                    c.validate()?;
                }
                match rule {
                    BoundaryRule::Explicit { bounds, tail_width } => {
                        if bounds.first() != Some(&0) {
                            return Err(Error::Malformed("interval bounds must start at 0".into()));
                        }
                        if bounds.windows(2).any(|w| w[0] >= w[1]) {
                            return Err(Error::Malformed("interval bounds must be strictly increasing".into()));
                        }
                        if *tail_width == 0 {
                            return Err(Error::Malformed("tail width must be positive".into()));
                        }
                        Ok(())
                    }
                    BoundaryRule::Geometric { first, ratio } => {
                        if *first == 0 || *ratio < 2 {
                            Err(Error::Malformed("geometric blocks need first ≥ 1 and ratio ≥ 2".into()))
                        } else {
                            Ok(())
                        }
                    }
                    BoundaryRule::Triangular => Ok(()),
                    BoundaryRule::Weighted(w) => w.validate(),
                    BoundaryRule::Dominating(ps) => {
                        if ps.is_empty() {
                            return Err(Error::Precondition("dominate needs at least one partition".into()));
                        }
                        ps.iter().try_for_each(Partition::validate)
                    }
                }
            }
            PartitionKind::PrefixTail { prefix, tail_width } => {
                if *tail_width == 0 {
                    return Err(Error::Malformed("tail width must be positive".into()));
                }
                let mut all: Vec<u64> = Vec::new();
                for b in prefix {
                    if b.is_empty() {
                        return Err(Error::Malformed("explicit blocks must be nonempty".into()));
                    }
                    all.extend(b);
                }
                all.sort_unstable();
                if all.iter().enumerate().any(|(i, &v)| v != i as u64) {
                    return Err(Error::Malformed("explicit blocks must partition an initial segment".into()));
                }
                let mins: Vec<u64> = prefix.iter().map(|b| *b.iter().min().unwrap()).collect();
                if mins.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Malformed("explicit blocks must be listed by increasing minimum".into()));
                }
                Ok(())
            }
            PartitionKind::DeltaColumns => Ok(()),
        }
    }

    /// Blocks are intervals of the base rule listed left to right, so block
    /// `k` lies entirely below block `k+1`.
    fn ordered(&self) -> bool {
        match &*self.kind {
            PartitionKind::Intervals { .. } => true,
            PartitionKind::PrefixTail { prefix, .. } => {
                let spans: Vec<(u64, u64)> =
                    prefix.iter().map(|b| (*b.iter().min().unwrap(), *b.iter().max().unwrap())).collect();
                spans.windows(2).all(|w| w[0].1 < w[1].0)
            }
            PartitionKind::DeltaColumns => false,
        }
    }

    fn rule_bounds_upto(&self, rule: &BoundaryRule, k: u64) -> Result<()> {
        let mut cache = self.cache.lock().unwrap();
        if cache.bounds.is_empty() {
            cache.bounds.push(0);
        }
        while (cache.bounds.len() as u64) <= k + 1 {
            let last = *cache.bounds.last().unwrap();
            let next = match rule {
                BoundaryRule::Weighted(w) => w.next_boundary(last)?,
                BoundaryRule::Dominating(ps) => {
                    let mut end = last + 1;
                    for p in ps {
                        let (_, hi) = p.first_block_from(last)?;
                        end = end.max(hi);
                    }
                    end
                }
                _ => unreachable!("only lazily computed rules are cached"),
            };
            cache.bounds.push(next);
        }
        Ok(())
    }

    /// `[lo, hi)` of base block `k`; `None` when it starts beyond u64.
    fn rule_range(&self, rule: &BoundaryRule, k: u64) -> Result<Option<(u64, u64)>> {
        Ok(match rule {
            BoundaryRule::Explicit { bounds, tail_width } => {
                let n = bounds.len() as u64;
                if k + 1 < n {
                    Some((bounds[k as usize], bounds[k as usize + 1]))
                } else {
                    let last = *bounds.last().unwrap();
                    let lo = (k + 1 - n).checked_mul(*tail_width).and_then(|v| v.checked_add(last));
                    lo.map(|lo| (lo, lo.saturating_add(*tail_width)))
                }
            }
            BoundaryRule::Geometric { first, ratio } => {
                let lo = (*ratio as u128).checked_pow(k.min(200) as u32).map(|p| p * *first as u128);
                match lo {
                    Some(lo) if lo <= u64::MAX as u128 && k < 200 => {
                        let hi = (lo * *ratio as u128).min(u64::MAX as u128);
                        Some((lo as u64, hi as u64))
                    }
                    _ => None,
                }
            }
            BoundaryRule::Triangular => {
                let lo = (k as u128) * (k as u128 + 1) / 2;
                let hi = (k as u128 + 1) * (k as u128 + 2) / 2;
                if lo > u64::MAX as u128 {
                    None
                } else {
                    Some((lo as u64, hi.min(u64::MAX as u128) as u64))
                }
            }
            BoundaryRule::Weighted(_) | BoundaryRule::Dominating(_) => {
                self.rule_bounds_upto(rule, k)?;
                let cache = self.cache.lock().unwrap();
                Some((cache.bounds[k as usize], cache.bounds[k as usize + 1]))
            }
        })
    }

    /// Base block containing `x`.
    fn rule_index(&self, rule: &BoundaryRule, x: u64) -> Result<Option<u64>> {
        Ok(match rule {
            BoundaryRule::Explicit { bounds, tail_width } => {
                let last = *bounds.last().unwrap();
                if x >= last {
                    Some(bounds.len() as u64 - 1 + (x - last) / tail_width)
                } else {
                    Some(bounds.partition_point(|&b| b <= x) as u64 - 1)
                }
            }
            BoundaryRule::Geometric { first, ratio } => {
                if x < *first {
                    None
                } else {
                    let mut k = 0u64;
                    let mut lo = *first as u128;
                    while lo * *ratio as u128 <= x as u128 {
                        lo *= *ratio as u128;
                        k += 1;
                    }
                    Some(k)
                }
            }
            BoundaryRule::Triangular => {
                let (m, n) = coding::unpair(x);
                Some(m + n)
            }
            BoundaryRule::Weighted(_) | BoundaryRule::Dominating(_) => {
                loop {
                    let known = {
                        let c = self.cache.lock().unwrap();
                        c.bounds.last().copied().filter(|&b| b > x).map(|_| c.bounds.clone())
                    };
                    if let Some(bounds) = known {
                        break Some(bounds.partition_point(|&b| b <= x) as u64 - 1);
                    }
                    let len = self.cache.lock().unwrap().bounds.len() as u64;
                    self.rule_bounds_upto(rule, len.max(1) * 2)?;
                }
            }
        })
    }

    /// Ensure the `j`-th nonempty carrier block is known; returns its base index.
    fn carrier_base(&self, carrier: &SetExpr, rule: &BoundaryRule, j: u64) -> Result<Option<u64>> {
        loop {
            let (known, scanned) = {
                let c = self.cache.lock().unwrap();
                (c.base_of.get(j as usize).copied(), c.scanned)
            };
            if known.is_some() {
                return Ok(known);
            }
            // jump straight to the base block of the next carrier element
            let Some((lo, _)) = self.rule_range(rule, scanned)? else { return Ok(None) };
            let Some(x) = carrier.next(lo, u64::MAX)? else { return Ok(None) };
            let Some(k) = self.rule_index(rule, x)? else { return Ok(None) };
            if k - scanned > MAX_EMPTY_RUN && scanned > 0 {
                // still correct: blocks in between are empty
            }
            let mut c = self.cache.lock().unwrap();
            if c.scanned == scanned {
                c.base_of.push(k);
                c.scanned = k + 1;
            }
        }
    }

    /// Index of the block containing `x`, if `x` is covered.
    pub fn index_of(&self, x: u64) -> Result<Option<u64>> {
        match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule } => self.rule_index(rule, x),
            PartitionKind::Intervals { carrier: Some(c), rule } => {
                if !c.contains(x)? {
                    return Ok(None);
                }
                let Some(k) = self.rule_index(rule, x)? else { return Ok(None) };
                let mut j = {
                    let cache = self.cache.lock().unwrap();
                    cache.base_of.partition_point(|&b| b < k) as u64
                };
                loop {
                    match self.carrier_base(c, rule, j)? {
                        Some(b) if b == k => return Ok(Some(j)),
                        Some(b) if b > k => return Ok(None),
                        Some(_) => j += 1,
                        None => return Ok(None),
                    }
                }
            }
            PartitionKind::PrefixTail { prefix, tail_width } => {
                let m: u64 = prefix.iter().map(|b| b.len() as u64).sum();
                if x >= m {
                    Ok(Some(prefix.len() as u64 + (x - m) / tail_width))
                } else {
                    Ok(prefix.iter().position(|b| b.contains(&x)).map(|i| i as u64))
                }
            }
            PartitionKind::DeltaColumns => {
                let (n, m) = coding::unpair(x);
                Ok((m <= n).then_some(n))
            }
        }
    }

    /// Least and one-past-greatest element of block `k`; `None` beyond u64.
    pub fn block_span(&self, k: u64) -> Result<Option<(u64, u64)>> {
        match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule } => self.rule_range(rule, k),
            PartitionKind::Intervals { carrier: Some(c), rule } => {
                let Some(b) = self.carrier_base(c, rule, k)? else { return Ok(None) };
                let Some((lo, hi)) = self.rule_range(rule, b)? else { return Ok(None) };
                let first = c.next(lo, hi)?.expect("carrier block is nonempty");
                // last element: scan downwards through the block
                let mut last = first;
                let mut x = first + 1;
                while let Some(v) = c.next(x, hi)? {
                    last = v;
                    x = v + 1;
                    if v - first > MAX_BLOCK_ELEMS {
                        return Err(Error::Overflow(format!("block {k} of {self} is too large to scan")));
                    }
                }
                Ok(Some((first, last + 1)))
            }
            PartitionKind::PrefixTail { prefix, tail_width } => {
                if let Some(b) = prefix.get(k as usize) {
                    Ok(Some((*b.iter().min().unwrap(), *b.iter().max().unwrap() + 1)))
                } else {
                    let m: u64 = prefix.iter().map(|b| b.len() as u64).sum();
                    let lo = (k - prefix.len() as u64).checked_mul(*tail_width).and_then(|v| v.checked_add(m));
                    Ok(lo.map(|lo| (lo, lo.saturating_add(*tail_width))))
                }
            }
            PartitionKind::DeltaColumns => {
                let lo = coding::pair(k, 0)?;
                let hi = coding::pair(k, k)? + 1;
                Ok(Some((lo, hi)))
            }
        }
    }

    /// Elements of block `k`, ascending.
    pub fn block(&self, k: u64) -> Result<Vec<u64>> {
        match &*self.kind {
            PartitionKind::PrefixTail { prefix, .. } if (k as usize) < prefix.len() => {
                let mut b = prefix[k as usize].clone();
                b.sort_unstable();
                Ok(b)
            }
            PartitionKind::DeltaColumns => (0..=k).map(|m| coding::pair(k, m)).collect(),
            PartitionKind::Intervals { carrier: Some(c), rule } => {
                let b = self
                    .carrier_base(c, rule, k)?
                    .ok_or_else(|| Error::Overflow(format!("block {k} of {self} is out of range")))?;
                let (lo, hi) = self
                    .rule_range(rule, b)?
                    .ok_or_else(|| Error::Overflow(format!("block {k} of {self} is out of range")))?;
                let mut out = Vec::new();
                let mut x = lo;
                while let Some(v) = c.next(x, hi)? {
                    out.push(v);
                    if out.len() as u64 > MAX_BLOCK_ELEMS {
                        return Err(Error::Overflow(format!("block {k} of {self} is too large")));
                    }
                    x = v + 1;
                }
                Ok(out)
            }
            _ => {
                let (lo, hi) = self
                    .block_span(k)?
                    .ok_or_else(|| Error::Overflow(format!("block {k} of {self} is out of range")))?;
                if hi - lo > MAX_BLOCK_ELEMS {
                    return Err(Error::Overflow(format!("block {k} of {self} has {} elements", hi - lo)));
                }
                Ok((lo..hi).collect())
            }
        }
    }

    /// The first `n` blocks.
    pub fn blocks(&self, n: u64) -> Result<Vec<Vec<u64>>> {
        (0..n).map(|k| self.block(k)).collect()
    }

    /// Exact size of block `k`, also for blocks beyond u64.
    pub fn block_len_big(&self, k: u64) -> Result<BigUint> {
        if let PartitionKind::Intervals { carrier: None, rule: BoundaryRule::Geometric { first, ratio } } = &*self.kind {
            let r = BigUint::from(*ratio);
            let lo = BigUint::from(*first) * Pow::pow(&r, k);
            return Ok(&lo * &r - &lo);
        }
        match &*self.kind {
            PartitionKind::Intervals { carrier: Some(_), .. } => Ok(BigUint::from(self.block(k)?.len())),
            _ => {
                let (lo, hi) = self
                    .block_span(k)?
                    .ok_or_else(|| Error::Overflow(format!("block {k} of {self} is out of range")))?;
                match &*self.kind {
                    PartitionKind::PrefixTail { prefix, .. } if (k as usize) < prefix.len() => {
                        Ok(BigUint::from(prefix[k as usize].len()))
                    }
                    PartitionKind::DeltaColumns => Ok(BigUint::from(k + 1)),
                    _ => Ok(BigUint::from(hi - lo)),
                }
            }
        }
    }

    /// First block whose minimum is at least `r`, as `(index, end)` where
    /// `end` is one past its maximum.
    fn first_block_from(&self, r: u64) -> Result<(u64, u64)> {
        let mut k = match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule } => {
                let k = self.rule_index(rule, r)?.unwrap_or(0);
                k.saturating_sub(1)
            }
            PartitionKind::DeltaColumns => (r.sqrt_floor() / 2).saturating_sub(1),
            _ => 0,
        };
        loop {
            let (lo, hi) = self
                .block_span(k)?
                .ok_or_else(|| Error::Overflow(format!("{self} has no block starting at or after {r}")))?;
            if lo >= r {
                return Ok((k, hi));
            }
            k += 1;
        }
    }

    /// Least element `≥ x` and `< hi` of `⋃ { P_k : k ∈ s }`.
    pub fn blowup_next(&self, s: &SetExpr, x: u64, hi: u64) -> Result<Option<u64>> {
        if x >= hi {
            return Ok(None);
        }
        if self.ordered() {
            // blocks lie left to right: walk the indices of s from x's block on
            let mut k = self.first_block_reaching(x)?;
            // blocks past the one reaching hi − 1 start at or beyond hi
            let k_end = match &*self.kind {
                PartitionKind::Intervals { carrier: None, .. } => self.first_block_reaching(hi - 1)?.saturating_add(1),
                _ => u64::MAX,
            };
            loop {
                let Some(kk) = s.next(k, k_end)? else { return Ok(None) };
                let Some((lo, bhi)) = self.block_span(kk)? else { return Ok(None) };
                if lo >= hi {
                    return Ok(None);
                }
                let found = match (&*self.kind, self.carrier()) {
                    (PartitionKind::Intervals { .. }, Some(c)) => c.next(x.max(lo), bhi.min(hi))?,
                    (PartitionKind::PrefixTail { prefix, .. }, _) if (kk as usize) < prefix.len() => {
                        prefix[kk as usize].iter().copied().filter(|&v| v >= x && v < hi).min()
                    }
                    _ => {
                        let v = x.max(lo);
                        (v < bhi.min(hi)).then_some(v)
                    }
                };
                if found.is_some() {
                    return Ok(found);
                }
                k = kk + 1;
            }
        }
        // Δ columns interleave: column n spans [n(n+1)/2, 2n²+2n]
        let mut best: Option<u64> = None;
        let mut k = 0u64;
        loop {
            // column k starts at k(k+1)/2 ≥ k
            let Some(kk) = s.next(k, hi)? else { break };
            let (lo, bhi) = self.block_span(kk)?.unwrap();
            if lo >= hi || best.is_some_and(|b| lo >= b) {
                break;
            }
            if bhi > x {
                for v in self.block(kk)? {
                    if v >= x && v < hi {
                        best = Some(best.map_or(v, |b| b.min(v)));
                        break;
                    }
                }
            }
            k = kk + 1;
        }
        Ok(best)
    }

    /// Least block index whose span reaches `x` (its end exceeds `x`).
    fn first_block_reaching(&self, x: u64) -> Result<u64> {
        match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule } => Ok(self.rule_index(rule, x)?.unwrap_or(0)),
            PartitionKind::Intervals { carrier: Some(c), rule } => {
                let Some(k) = self.rule_index(rule, x)? else { return Ok(0) };
                let mut j = {
                    let cache = self.cache.lock().unwrap();
                    cache.base_of.partition_point(|&b| b < k) as u64
                };
                if j > 0 {
                    j -= 1;
                }
                loop {
                    match self.carrier_base(c, rule, j)? {
                        Some(b) if b >= k => return Ok(j),
                        Some(_) => j += 1,
                        None => return Ok(j),
                    }
                }
            }
            _ => {
                let mut k = 0;
                while let Some((_, hi)) = self.block_span(k)? {
                    if hi > x {
                        break;
                    }
                    k += 1;
                }
                Ok(k)
            }
        }
    }

    /// Whether `x` is covered by some block.
    pub fn covers(&self, x: u64) -> Result<bool> {
        Ok(self.index_of(x)?.is_some())
    }

    /// Block widths tend to infinity.
    pub fn widths_unbounded(&self) -> bool {
        match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule } => match rule {
                BoundaryRule::Explicit { .. } => false,
                BoundaryRule::Geometric { .. } | BoundaryRule::Triangular => true,
                BoundaryRule::Weighted(w) => !w.is_bounded_below(),
                BoundaryRule::Dominating(ps) => ps.iter().any(Partition::widths_unbounded),
            },
            PartitionKind::Intervals { carrier: Some(_), .. } => false,
            PartitionKind::PrefixTail { .. } => false,
            PartitionKind::DeltaColumns => true,
        }
    }

    /// Eventually constant block width, for interval tails.
    pub fn tail_width(&self) -> Option<u64> {
        match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule: BoundaryRule::Explicit { tail_width, .. } } => Some(*tail_width),
            PartitionKind::Intervals { carrier: None, rule: BoundaryRule::Weighted(WeightFn::Const(_)) } => {
                let (lo, hi) = self.block_span(0).ok()??;
                Some(hi - lo)
            }
            PartitionKind::PrefixTail { tail_width, .. } => Some(*tail_width),
            _ => None,
        }
    }

    pub fn is_dyadic(&self) -> bool {
        matches!(&*self.kind, PartitionKind::Intervals { carrier: None, rule: BoundaryRule::Geometric { first: 1, ratio: 2 } })
    }

    /// Consecutive interval blocks with `hi ≥ ratio·lo` for some ratio ≥ 2
    /// from the start: geometric growth.
    pub fn is_geometric(&self) -> bool {
        matches!(&*self.kind, PartitionKind::Intervals { carrier: None, rule: BoundaryRule::Geometric { .. } })
    }
}

trait SqrtFloor {
    fn sqrt_floor(self) -> u64;
}

impl SqrtFloor for u64 {
    fn sqrt_floor(self) -> u64 {
        num_integer::Roots::sqrt(&self)
    }
}

/// Size of `[first·r^k, first·r^{k+1})` without overflow.
pub fn geometric_block_len(first: u64, ratio: u64, k: u64) -> BigUint {
    let r = BigUint::from(ratio);
    let lo = BigUint::from(first) * Pow::pow(&r, k);
    &lo * &r - &lo
}

impl fmt::Display for BoundaryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryRule::Explicit { bounds, tail_width } => {
                if bounds.as_slice() == [0] {
                    write!(f, "width {tail_width}")
                } else {
                    let b: Vec<String> = bounds.iter().map(u64::to_string).collect();
                    write!(f, "intervals [{}] tail {tail_width}", b.join(","))
                }
            }
            BoundaryRule::Geometric { first: 1, ratio: 2 } => write!(f, "dyadic"),
            BoundaryRule::Geometric { first, ratio } => write!(f, "geometric {first} {ratio}"),
            BoundaryRule::Triangular => write!(f, "triangular"),
            BoundaryRule::Weighted(w) => write!(f, "weighted {w}"),
            BoundaryRule::Dominating(ps) => {
                let parts: Vec<String> = ps.iter().map(|p| format!("({p})")).collect();
                write!(f, "dominate [{}]", parts.join(" "))
            }
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.kind {
            PartitionKind::Intervals { carrier: None, rule } => write!(f, "{rule}"),
            PartitionKind::Intervals { carrier: Some(c), rule } => write!(f, "on {} ({rule})", Paren(c)),
            PartitionKind::PrefixTail { prefix, tail_width } => {
                let blocks: Vec<String> = prefix
                    .iter()
                    .map(|b| format!("{{{}}}", b.iter().map(u64::to_string).collect::<Vec<_>>().join(",")))
                    .collect();
                write!(f, "explicit [{}] tail {tail_width}", blocks.join(","))
            }
            PartitionKind::DeltaColumns => write!(f, "columns"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_examples() {
        assert_eq!(Partition::dyadic().blocks(3).unwrap(), vec![vec![1], vec![2, 3], vec![4, 5, 6, 7]]);
        assert_eq!(Partition::bounds(vec![0, 2, 5]).blocks(2).unwrap(), vec![vec![0, 1], vec![2, 3, 4]]);
        let e = Partition::explicit(vec![vec![0], vec![1, 2]], 3);
        assert_eq!(e.blocks(3).unwrap(), vec![vec![0], vec![1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn index_of_matches_blocks() {
        let parts = [
            Partition::dyadic(),
            Partition::triangular(),
            Partition::weighted(WeightFn::Harmonic),
            Partition::bounds(vec![0, 2, 5]),
            Partition::explicit(vec![vec![0], vec![1, 2]], 3),
            Partition::delta_columns(),
            Partition::dominating(vec![Partition::width(2), Partition::width(3)]),
            Partition::dyadic().on(SetExpr::ap(0, 3)).unwrap(),
        ];
        for p in &parts {
            for k in 0..8 {
                for x in p.block(k).unwrap() {
                    assert_eq!(p.index_of(x).unwrap(), Some(k), "{p} block {k} elem {x}");
                }
            }
        }
    }

    #[test]
    fn dominating_widths() {
        let r = Partition::dominating(vec![Partition::width(2), Partition::width(3)]);
        // R_0 = [0,3): absorbs {0,1} and {0,1,2}
        assert_eq!(r.block(0).unwrap(), vec![0, 1, 2]);
        let d = Partition::dominating(vec![Partition::dyadic(), Partition::dyadic()]);
        assert_eq!(d.blocks(3).unwrap(), vec![vec![0, 1], vec![2, 3], vec![4, 5, 6, 7]]);
    }

    #[test]
    fn big_block_sizes() {
        let d = Partition::dyadic();
        assert_eq!(d.block_len_big(5).unwrap(), BigUint::from(32u32));
        assert_eq!(d.block_len_big(100).unwrap(), BigUint::from(1u8) << 100usize);
        assert_eq!(d.block_span(70).unwrap(), None);
    }

    #[test]
    fn carrier_blocks_skip_empties() {
        let p = Partition::dyadic().on(SetExpr::ap(0, 4)).unwrap();
        // [1,2) and [2,4) hold no multiple of 4
        assert_eq!(p.block(0).unwrap(), vec![4]);
        assert_eq!(p.block(1).unwrap(), vec![8, 12]);
        assert_eq!(p.index_of(3).unwrap(), None);
    }

    #[test]
    fn blowup_of_sparse_set_stops_at_horizon() {
        let s = crate::parse::parse_set("blowup (inter (powers 3) (col 2)) dyadic").unwrap();
        let pointwise: Vec<u64> = (0..200).filter(|&x| s.contains(x).unwrap()).collect();
        assert_eq!(s.window(200).unwrap(), pointwise);
        let s = SetExpr::blowup(SetExpr::fin([]), Partition::delta_columns());
        assert_eq!(s.window(100).unwrap(), Vec::<u64>::new());
    }
}

impl serde::Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
