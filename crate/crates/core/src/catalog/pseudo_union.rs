//! Pseudo-unions in P-ideals: a small set almost containing each member.
//!
//! Member `k` (from 1) is cut at the first point beyond which its remaining
//! mass is below `2^{-k}`: the weighted tail sum for summable ideals, the
//! largest dyadic-block density for `Z`. Tail masses come from symbolic
//! upper bounds, so the cut is valid for the whole infinite set.

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::catalog::decide::dnf;
use crate::catalog::{IdealHandle, IdealKind};
use crate::coding;
use crate::error::{Error, Result};
use crate::natset::{branch_codes, FnExpr, SetExpr};
use crate::partition::PartitionKind;
use crate::periodic::Periodic;
use crate::verdict::Answer;
use crate::weight::{ratio, WeightFn};

fn big(n: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow2_inv(k: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

fn min_opt(a: Option<BigRational>, b: Option<BigRational>) -> Option<BigRational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Sum of per-term bounds over the term expansion; a term is bounded by
/// its periodic part when that is finite, else by its tightest atom.
fn over_terms(
    e: &SetExpr,
    finite: impl Fn(&Periodic) -> BigRational,
    atom: impl Fn(&SetExpr) -> Option<BigRational>,
) -> Option<BigRational> {
    let terms = dnf(e)?;
    let mut total = BigRational::zero();
    for t in &terms {
        let b = if t.q.is_finite() { Some(finite(&t.q)) } else { None };
        let b = t.pos.iter().fold(b, |acc, a| min_opt(acc, atom(a)));
        total += b?;
    }
    Some(total)
}

/// Upper bound on `Σ_{x ∈ e, x ≥ c} 1/(x+1)`.
pub fn harmonic_tail(e: &SetExpr, c: u64) -> Option<BigRational> {
    over_terms(
        e,
        |q| {
            let mut sum = BigRational::zero();
            let mut x = q.next(c);
            while let Some(v) = x {
                sum += ratio(1, v as i64 + 1);
                x = v.checked_add(1).and_then(|n| q.next(n));
            }
            sum
        },
        |a| harmonic_atom(a, c),
    )
}

fn harmonic_atom(a: &SetExpr, c: u64) -> Option<BigRational> {
    match a {
        SetExpr::Factorials => {
            let (mut f, mut j) = (BigUint::one(), 0u64);
            while f < BigUint::from(c) {
                j += 1;
                f *= j;
            }
            Some(ratio(3, 1) / big(f))
        }
        SetExpr::Powers(b) => {
            let mut p = BigUint::one();
            while p < BigUint::from(c) {
                p *= *b;
            }
            Some(ratio(*b as i64, *b as i64 - 1) / big(p))
        }
        SetExpr::Squares => {
            let r = c.sqrt();
            let j = if r * r == c { r } else { r + 1 };
            if j == 0 {
                return Some(ratio(3, 1));
            }
            let j = j as i64;
            Some(ratio(1, j) * ratio(1, j) + ratio(1, j))
        }
        SetExpr::Col(k) => {
            let (mut lo, mut hi) = (0u64, 1u64 << 32);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if coding::pair(*k, mid).map_or(true, |v| v >= c) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Some(ratio(2, lo as i64 + 1))
        }
        SetExpr::Branch(w) => {
            let first = branch_codes(w).find(|&x| x >= c).unwrap_or(u64::MAX);
            Some(BigRational::new(2.into(), BigInt::from(first) + 1))
        }
        SetExpr::Blowup(s, p) if p.carrier().is_none() && matches!(p.kind(), PartitionKind::Intervals { .. }) => {
            // Σ_{x=lo}^{hi-1} 1/(x+1) ≤ (hi - lo)/(lo + 1)
            let q = s.periodic().filter(|q| q.is_finite())?;
            let mut sum = BigRational::zero();
            let mut k = q.next(0);
            while let Some(v) = k {
                let (lo, hi) = p.block_span(v).ok()??;
                let lo = lo.max(c);
                if hi > lo {
                    sum += BigRational::new(BigInt::from(hi - lo), BigInt::from(lo) + 1);
                }
                k = q.next(v + 1);
            }
            Some(sum)
        }
        SetExpr::Image(FnExpr::Affine { a, b }, s) => {
            let start = if c <= *b { 0 } else { (c - b).div_ceil(*a) };
            harmonic_tail(s, start)
        }
        SetExpr::Image(FnExpr::Div(k), s) => Some(harmonic_tail(s, c.saturating_mul(*k))? * ratio(*k as i64, 1)),
        SetExpr::Preimage(FnExpr::Affine { a, b }, s) => {
            Some(harmonic_tail(s, c.saturating_mul(*a).saturating_add(*b))? * ratio((a + b) as i64, 1))
        }
        SetExpr::Preimage(FnExpr::Div(k), s) => Some(harmonic_tail(s, c / k)? * ratio(*k as i64, 1)),
        _ => None,
    }
}

/// Blocks below this index are counted exactly when the symbolic bound
/// alone is too coarse.
const EXACT_BLOCKS: u64 = 16;

/// Upper bound on `sup_{j ≥ m} |e ∩ [2^j, 2^{j+1})| / 2^j`.
pub fn dyadic_tail(e: &SetExpr, m: u64) -> Option<BigRational> {
    DyadicTail::new(e).at(m)
}

/// Dyadic tail bounds for one set, with the exact block counts computed at
/// most once.
struct DyadicTail<'a> {
    e: &'a SetExpr,
    far: Option<Option<BigRational>>,
    exact: Option<Option<Vec<BigRational>>>,
}

impl<'a> DyadicTail<'a> {
    fn new(e: &'a SetExpr) -> Self {
        DyadicTail { e, far: None, exact: None }
    }

    fn at(&mut self, m: u64) -> Option<BigRational> {
        let sym = symbolic_dyadic_tail(self.e, m)?;
        if m >= EXACT_BLOCKS {
            return Some(sym);
        }
        let e = self.e;
        let far = self.far.get_or_insert_with(|| symbolic_dyadic_tail(e, EXACT_BLOCKS)).clone()?;
        if far >= sym {
            return Some(sym);
        }
        let exact = self
            .exact
            .get_or_insert_with(|| {
                let mut below = Vec::new();
                for j in 0..=EXACT_BLOCKS {
                    below.push(e.count_below(1 << j).ok()?);
                }
                Some((0..EXACT_BLOCKS as usize).map(|j| BigRational::new((below[j + 1] - below[j]).into(), BigInt::one() << j)).collect())
            })
            .as_ref()?;
        let best = exact[m as usize..].iter().cloned().fold(far, BigRational::max);
        Some(best.min(sym))
    }
}

fn symbolic_dyadic_tail(e: &SetExpr, m: u64) -> Option<BigRational> {
    over_terms(
        e,
        |q| {
            let mut best = BigRational::zero();
            for j in m..64 {
                let lo = 1u64 << j;
                let hi = lo.checked_mul(2).unwrap_or(u64::MAX);
                let mut n = 0i64;
                let mut x = q.next(lo);
                while let Some(v) = x.filter(|&v| v < hi) {
                    n += 1;
                    x = q.next(v + 1);
                }
                best = best.max(BigRational::new(n.into(), BigInt::one() << j));
                if x.is_none() {
                    break;
                }
            }
            best
        },
        |a| dyadic_atom(a, m),
    )
}

fn dyadic_atom(a: &SetExpr, m: u64) -> Option<BigRational> {
    match a {
        SetExpr::Squares => Some(if m == 0 { BigRational::one() } else { pow2_inv((m - 1) / 2) }),
        SetExpr::Factorials | SetExpr::Powers(_) | SetExpr::Branch(_) => {
            Some(BigRational::new(2.into(), BigInt::one() << m))
        }
        SetExpr::Col(_) => Some(if m / 2 <= 2 { BigRational::one() } else { pow2_inv(m / 2 - 2) }),
        SetExpr::Blowup(s, p) if p.is_dyadic() => {
            let q = s.periodic().filter(|q| q.is_finite())?;
            Some(if q.next(m).is_some() { BigRational::one() } else { BigRational::zero() })
        }
        _ => None,
    }
}

enum Mass {
    Harmonic { from: u64 },
    Dyadic,
    Finite,
}

fn mass_kind(i: &IdealHandle) -> Result<Mass> {
    match i.kind() {
        IdealKind::Z => Ok(Mass::Dyadic),
        IdealKind::Density(p) if p.is_dyadic() => Ok(Mass::Dyadic),
        IdealKind::Summable(WeightFn::Harmonic) => Ok(Mass::Harmonic { from: 0 }),
        IdealKind::Summable(WeightFn::File { values, .. }) => Ok(Mass::Harmonic { from: values.len() as u64 }),
        IdealKind::Fin | IdealKind::Summable(WeightFn::Const(_)) => Ok(Mass::Finite),
        _ => Err(Error::Unsupported(format!("pseudo-unions are not available for {i}"))),
    }
}

/// First cut for member `k` (from 1).
fn cut(mass: &Mass, e: &SetExpr, k: u64) -> Result<u64> {
    let bound = finite_bound(e);
    match (tail_cut(mass, e, k, bound), bound) {
        (Ok(c), Some(b)) => Ok(c.min(b)),
        (Err(_), Some(b)) => Ok(b),
        (r, None) => r,
    }
}

/// One past the largest element when the term expansion shows `e` finite,
/// saturating at `u64::MAX`.
fn finite_bound(e: &SetExpr) -> Option<u64> {
    let mut best = 0u64;
    for t in dnf(e)? {
        let mut b = t.q.is_finite().then(|| t.q.max().map_or(0, |m| m + 1));
        for a in &t.pos {
            if let SetExpr::Blowup(s, p) = a {
                if p.carrier().is_some() {
                    continue;
                }
                let Some(q) = s.periodic().filter(|q| q.is_finite()) else { continue };
                let end = match q.max() {
                    None => Some(0),
                    Some(m) => Some(p.block_span(m).ok().flatten().map_or(u64::MAX, |(_, hi)| hi)),
                };
                b = match (b, end) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
            }
        }
        best = best.max(b?);
    }
    Some(best)
}

fn tail_cut(mass: &Mass, e: &SetExpr, k: u64, bound: Option<u64>) -> Result<u64> {
    let eps = pow2_inv(k);
    let none = || Error::Unsupported(format!("no symbolic tail bound for {e}"));
    match mass {
        Mass::Finite => {
            let q = e.periodic().filter(|q| q.is_finite()).ok_or_else(none)?;
            Ok(q.max().map_or(0, |m| m + 1))
        }
        Mass::Dyadic => {
            let mut tail = DyadicTail::new(e);
            for m in 0..63u64 {
                if bound.is_some_and(|b| 1 << m >= b) {
                    return Ok(1 << m);
                }
                if tail.at(m).ok_or_else(none)? < eps {
                    return Ok(if m == 0 { 0 } else { 1 << m });
                }
            }
            Err(none())
        }
        Mass::Harmonic { from } => {
            let ok = |c: u64| harmonic_tail(e, c.max(*from)).map(|b| b < eps);
            if !ok(u64::MAX).ok_or_else(none)? {
                return Err(none());
            }
            let (mut lo, mut hi) = (0u64, u64::MAX);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if ok(mid).ok_or_else(none)? {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            Ok(lo.max(*from))
        }
    }
}

/// A small set almost containing each of the first `n` members.
pub fn pseudo_union(i: &IdealHandle, members: &[SetExpr], n: usize) -> Result<SetExpr> {
    Ok(pseudo_union_with_cuts(i, members, n)?.0)
}

/// The pseudo-union together with the cut of each member: member `k`
/// minus the result lies below `cuts[k]`.
pub fn pseudo_union_with_cuts(i: &IdealHandle, members: &[SetExpr], n: usize) -> Result<(SetExpr, Vec<u64>)> {
    if n > members.len() {
        return Err(Error::Precondition(format!("asked for {n} members, {} given", members.len())));
    }
    let mass = mass_kind(i)?;
    let mut parts = Vec::new();
    let mut cuts = Vec::new();
    for (idx, a) in members[..n].iter().enumerate() {
        let v = i.member(a)?;
        match v.answer {
            Answer::In => {}
            Answer::Out => return Err(Error::Precondition(format!("member {a} is Out of {i}"))),
            Answer::Unknown => return Err(Error::Precondition(format!("member {a} is not known to lie in {i}"))),
        }
        let c = cut(&mass, a, idx as u64 + 1)?;
        cuts.push(c);
        parts.push(if c == 0 { a.clone() } else { SetExpr::inter(a.clone(), SetExpr::from(c)) });
    }
    Ok((SetExpr::union_all(parts), cuts))
}
