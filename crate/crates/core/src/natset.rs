//! Symbolic subsets of ω and maps between them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_integer::Roots;

use crate::coding;
use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionKind};
use crate::periodic::Periodic;
use crate::rado::{self, HomKind};

/// A set read from a file: the members below a declared horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredFile {
    pub path: String,
    pub horizon: u64,
    pub members: BTreeSet<u64>,
}

impl PredFile {
    /// File format: a line `horizon N` followed by whitespace-separated
    /// members below `N`. Lines starting with `#` are ignored.
    pub fn load(path: &str) -> Result<PredFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        PredFile::from_text(path, &text)
    }

    pub fn from_text(path: &str, text: &str) -> Result<PredFile> {
        let mut horizon = None;
        let mut members = BTreeSet::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("horizon") {
                let h = rest.trim().parse().map_err(|_| Error::Malformed(format!("{path}: bad horizon line")))?;
                horizon = Some(h);
                continue;
            }
            for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                let v: u64 = tok.parse().map_err(|_| Error::Malformed(format!("{path}: '{tok}' is not a natural")))?;
                members.insert(v);
            }
        }
        let horizon = horizon.ok_or_else(|| Error::Malformed(format!("{path}: missing horizon line")))?;
        if let Some(&m) = members.iter().find(|&&m| m >= horizon) {
            return Err(Error::Malformed(format!("{path}: member {m} is not below horizon {horizon}")));
        }
        Ok(PredFile { path: path.to_string(), horizon, members })
    }
}

/// Maps ω → ω used by images and preimages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FnExpr {
    /// `n ↦ a·n + b`, `a ≥ 1`.
    Affine { a: u64, b: u64 },
    /// `n ↦ ⌊n/k⌋`, `k ≥ 1`.
    Div(u64),
    /// The increasing enumeration of an infinite set.
    Enumerate(Arc<SetExpr>),
}

impl FnExpr {
    pub fn apply(&self, n: u64) -> Result<u64> {
        match self {
            FnExpr::Affine { a, b } => a
                .checked_mul(n)
                .and_then(|v| v.checked_add(*b))
                .ok_or_else(|| Error::Overflow(format!("affine map at {n}"))),
            FnExpr::Div(k) => Ok(n / k),
            FnExpr::Enumerate(e) => e.nth(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Fin(Vec<u64>),
    /// `{a + k·d : k ∈ ω}`.
    Ap { a: u64, d: u64 },
    Squares,
    Factorials,
    Powers(u64),
    /// `{k} × ω` under pair coding.
    Col(u64),
    /// `{(n,m) : m ≤ n}` under pair coding.
    Diag,
    /// Codes of the prefixes of the periodic branch `w w w …` of 2^<ω.
    Branch(String),
    RadoHom { kind: HomKind, n: usize },
    Union(Arc<SetExpr>, Arc<SetExpr>),
    Inter(Arc<SetExpr>, Arc<SetExpr>),
    Diff(Arc<SetExpr>, Arc<SetExpr>),
    /// `⋃ { P_n : n ∈ s }`.
    Blowup(Arc<SetExpr>, Partition),
    Image(FnExpr, Arc<SetExpr>),
    Preimage(FnExpr, Arc<SetExpr>),
    PredFile(Arc<PredFile>),
}

trait FilterFinite {
    fn filter_finite(&self, by: &SetExpr) -> Option<Periodic>;
}

impl FilterFinite for Periodic {
    /// The members of a finite set that also lie in `by`.
    fn filter_finite(&self, by: &SetExpr) -> Option<Periodic> {
        let mut keep = Vec::new();
        for n in (0..self.threshold()).filter(|&n| self.contains(n)) {
            if by.contains(n).ok()? {
                keep.push(n);
            }
        }
        Periodic::finite(&keep)
    }
}

/// Largest blow-up of a finite set given an explicit periodic form.
const MAX_FINITE_BLOWUP: u64 = 4096;

impl SetExpr {
    pub fn fin(elems: impl IntoIterator<Item = u64>) -> SetExpr {
        let mut v: Vec<u64> = elems.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SetExpr::Fin(v)
    }

    pub fn empty() -> SetExpr {
        SetExpr::Fin(Vec::new())
    }

    pub fn omega() -> SetExpr {
        SetExpr::Ap { a: 0, d: 1 }
    }

    pub fn ap(a: u64, d: u64) -> SetExpr {
        SetExpr::Ap { a, d }
    }

    /// `[c, ∞)`.
    pub fn from(c: u64) -> SetExpr {
        SetExpr::Ap { a: c, d: 1 }
    }

    pub fn union(a: SetExpr, b: SetExpr) -> SetExpr {
        SetExpr::Union(Arc::new(a), Arc::new(b))
    }

    pub fn inter(a: SetExpr, b: SetExpr) -> SetExpr {
        SetExpr::Inter(Arc::new(a), Arc::new(b))
    }

    pub fn diff(a: SetExpr, b: SetExpr) -> SetExpr {
        SetExpr::Diff(Arc::new(a), Arc::new(b))
    }

    pub fn blowup(s: SetExpr, p: Partition) -> SetExpr {
        SetExpr::Blowup(Arc::new(s), p)
    }

    pub fn image(f: FnExpr, s: SetExpr) -> SetExpr {
        SetExpr::Image(f, Arc::new(s))
    }

    pub fn preimage(f: FnExpr, s: SetExpr) -> SetExpr {
        SetExpr::Preimage(f, Arc::new(s))
    }

    /// Left fold of `union` over a nonempty list; the empty list gives ∅.
    pub fn union_all(items: impl IntoIterator<Item = SetExpr>) -> SetExpr {
        items.into_iter().reduce(SetExpr::union).unwrap_or_else(SetExpr::empty)
    }

    /// Reject parameter values outside the grammar's domain.
    pub fn validate(&self) -> Result<()> {
        match self {
            SetExpr::Ap { d, .. } if *d == 0 => Err(Error::Malformed("ap needs a positive difference".into())),
            SetExpr::Powers(b) if *b < 2 => Err(Error::Malformed("powers needs a base ≥ 2".into())),
            SetExpr::Branch(w) => {
                if w.is_empty() {
                    return Err(Error::Malformed("branch needs a nonempty word".into()));
                }
                coding::parse_bits(w).map(|_| ())
            }
            SetExpr::RadoHom { kind, n } => rado::homogeneous(*kind, *n).map(|_| ()),
            SetExpr::Union(a, b) | SetExpr::Inter(a, b) | SetExpr::Diff(a, b) => {
                a.validate()?;
                b.validate()
            }
            SetExpr::Blowup(s, p) => {
                s.validate()?;
                p.validate()
            }
            SetExpr::Image(f, s) | SetExpr::Preimage(f, s) => {
                f.validate()?;
                s.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: u64) -> Result<bool> {
        Ok(match self {
            SetExpr::Fin(v) => v.binary_search(&x).is_ok(),
            SetExpr::Ap { a, d } => x >= *a && (x - a) % d == 0,
            SetExpr::Squares => {
                let r = x.sqrt();
                r * r == x
            }
            SetExpr::Factorials => {
                let mut f = 1u64;
                let mut k = 1u64;
                while f < x {
                    k += 1;
                    match f.checked_mul(k) {
                        Some(v) => f = v,
                        None => return Ok(false),
                    }
                }
                f == x
            }
            SetExpr::Powers(b) => {
                let mut p = 1u64;
                while p < x {
                    match p.checked_mul(*b) {
                        Some(v) => p = v,
                        None => return Ok(false),
                    }
                }
                p == x
            }
            SetExpr::Col(k) => coding::unpair(x).0 == *k,
            SetExpr::Diag => {
                let (n, m) = coding::unpair(x);
                m <= n
            }
            SetExpr::Branch(w) => branch_codes(w).take_while(|&c| c <= x).any(|c| c == x),
            SetExpr::RadoHom { kind, n } => rado::homogeneous(*kind, *n)?.contains(&x),
            SetExpr::Union(a, b) => a.contains(x)? || b.contains(x)?,
            SetExpr::Inter(a, b) => a.contains(x)? && b.contains(x)?,
            SetExpr::Diff(a, b) => a.contains(x)? && !b.contains(x)?,
            SetExpr::Blowup(s, p) => match p.index_of(x)? {
                Some(k) => s.contains(k)?,
                None => false,
            },
            SetExpr::Image(f, s) => match f {
                FnExpr::Affine { a, b } => x >= *b && (x - b) % a == 0 && s.contains((x - b) / a)?,
                FnExpr::Div(k) => {
                    let lo = x.checked_mul(*k).ok_or_else(|| Error::Overflow("div image".into()))?;
                    s.next(lo, lo.saturating_add(*k))?.is_some()
                }
                FnExpr::Enumerate(e) => e.contains(x)? && s.contains(e.rank(x)?)?,
            },
            SetExpr::Preimage(f, s) => s.contains(f.apply(x)?)?,
            SetExpr::PredFile(p) => {
                if x >= p.horizon {
                    return Err(Error::Evaluation { index: x, msg: format!("{} only answers below {}", p.path, p.horizon) });
                }
                p.members.contains(&x)
            }
        })
    }

    /// Least `y` with `lo ≤ y < hi` and `y ∉ self`.
    pub fn first_missing(&self, lo: u64, hi: u64) -> Result<Option<u64>> {
        if lo >= hi {
            return Ok(None);
        }
        if let Some(q) = self.periodic() {
            return Ok(q.first_missing(lo, hi));
        }
        match self {
            SetExpr::Union(a, b) => {
                let mut x = lo;
                loop {
                    let Some(ga) = a.first_missing(x, hi)? else { return Ok(None) };
                    match b.first_missing(ga, hi)? {
                        None => return Ok(None),
                        Some(gb) if gb == ga => return Ok(Some(ga)),
                        Some(gb) => x = gb,
                    }
                }
            }
            SetExpr::Inter(a, b) => Ok(match (a.first_missing(lo, hi)?, b.first_missing(lo, hi)?) {
                (Some(u), Some(v)) => Some(u.min(v)),
                (u, v) => u.or(v),
            }),
            SetExpr::Diff(a, b) => Ok(match (a.first_missing(lo, hi)?, b.next(lo, hi)?) {
                (Some(u), Some(v)) => Some(u.min(v)),
                (u, v) => u.or(v),
            }),
            SetExpr::Blowup(s, p) if p.carrier().is_none() && matches!(p.kind(), PartitionKind::Intervals { .. }) => {
                let mut x = lo;
                while x < hi {
                    match p.index_of(x)? {
                        Some(k) if s.contains(k)? => match p.block_span(k)? {
                            Some((_, end)) => x = end,
                            None => return Ok(None),
                        },
                        _ => return Ok(Some(x)),
                    }
                }
                Ok(None)
            }
            _ => {
                for x in lo..hi {
                    if !self.contains(x)? {
                        return Ok(Some(x));
                    }
                }
                Ok(None)
            }
        }
    }

    pub fn contains_range(&self, lo: u64, hi: u64) -> Result<bool> {
        Ok(self.first_missing(lo, hi)?.is_none())
    }

    /// Least member `y` with `x ≤ y < hi`.
    pub fn next(&self, x: u64, hi: u64) -> Result<Option<u64>> {
        if x >= hi {
            return Ok(None);
        }
        let found = match self {
            SetExpr::Fin(v) => {
                let i = v.partition_point(|&e| e < x);
                v.get(i).copied()
            }
            SetExpr::Ap { a, d } => {
                if x <= *a {
                    Some(*a)
                } else {
                    let k = (x - a).div_ceil(*d);
                    k.checked_mul(*d).and_then(|v| v.checked_add(*a))
                }
            }
            SetExpr::Squares => {
                let r = x.sqrt();
                if r * r == x {
                    Some(x)
                } else {
                    (r + 1).checked_mul(r + 1)
                }
            }
            SetExpr::Factorials => {
                let mut f = 1u64;
                let mut k = 1u64;
                loop {
                    if f >= x {
                        break Some(f);
                    }
                    k += 1;
                    match f.checked_mul(k) {
                        Some(v) => f = v,
                        None => break None,
                    }
                }
            }
            SetExpr::Powers(b) => {
                let mut p = 1u64;
                loop {
                    if p >= x {
                        break Some(p);
                    }
                    match p.checked_mul(*b) {
                        Some(v) => p = v,
                        None => break None,
                    }
                }
            }
            SetExpr::Col(k) => {
                // π(k, n) is increasing in n
                let (mut lo, mut hi_n) = (0u64, 1u64 << 32);
                while lo < hi_n {
                    let mid = (lo + hi_n) / 2;
                    if coding::pair(*k, mid).map_or(true, |v| v >= x) {
                        hi_n = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                coding::pair(*k, lo).ok()
            }
            SetExpr::Diag => {
                let (n, m) = coding::unpair(x);
                let s = n + m;
                if m <= s / 2 {
                    Some(x)
                } else {
                    ((s as u128 + 1) * (s as u128 + 2) / 2).try_into().ok()
                }
            }
            SetExpr::Branch(w) => branch_codes(w).find(|&c| c >= x),
            SetExpr::RadoHom { kind, n } => rado::homogeneous(*kind, *n)?.into_iter().find(|&v| v >= x),
            SetExpr::Union(a, b) => match (a.next(x, hi)?, b.next(x, hi)?) {
                (Some(u), Some(v)) => Some(u.min(v)),
                (u, v) => u.or(v),
            },
            SetExpr::Inter(a, b) => {
                if let Some(p) = self.periodic() {
                    p.next(x)
                } else {
                    let mut cur = x;
                    loop {
                        let Some(u) = a.next(cur, hi)? else { break None };
                        let Some(v) = b.next(u, hi)? else { break None };
                        if u == v {
                            break Some(u);
                        }
                        cur = v;
                    }
                }
            }
            SetExpr::Diff(a, b) => {
                if let Some(p) = self.periodic() {
                    p.next(x)
                } else {
                    let mut cur = x;
                    loop {
                        let Some(u) = a.next(cur, hi)? else { break None };
                        if !b.contains(u)? {
                            break Some(u);
                        }
                        cur = u + 1;
                    }
                }
            }
            SetExpr::Blowup(s, p) => p.blowup_next(s, x, hi)?,
            SetExpr::Image(f, s) => match f {
                FnExpr::Affine { a, b } => {
                    let start = if x <= *b { 0 } else { (x - b).div_ceil(*a) };
                    let bound = if hi <= *b { 0 } else { (hi - b).div_ceil(*a) };
                    match s.next(start, bound)? {
                        Some(n) => Some(f.apply(n)?),
                        None => None,
                    }
                }
                FnExpr::Div(k) => match s.next(x.saturating_mul(*k), hi.saturating_mul(*k))? {
                    Some(n) => Some(n / k),
                    None => None,
                },
                FnExpr::Enumerate(e) => {
                    let mut cur = e.rank(x)?;
                    loop {
                        let Some(n) = s.next(cur, u64::MAX)? else { break None };
                        let v = e.nth(n)?;
                        if v >= hi || v >= x {
                            break Some(v);
                        }
                        cur = n + 1;
                    }
                }
            },
            SetExpr::Preimage(f, s) => match f {
                FnExpr::Div(k) => {
                    if s.contains(x / k)? {
                        Some(x)
                    } else {
                        let lo = x / k + 1;
                        match s.next(lo, hi.div_ceil(*k))? {
                            Some(m) => m.checked_mul(*k),
                            None => None,
                        }
                    }
                }
                _ => {
                    if let Some(p) = self.periodic() {
                        p.next(x)
                    } else {
                        let mut found = None;
                        for n in x..hi {
                            if s.contains(f.apply(n)?)? {
                                found = Some(n);
                                break;
                            }
                        }
                        found
                    }
                }
            },
            SetExpr::PredFile(p) => {
                let r = p.members.range(x..).next().copied();
                match r {
                    Some(v) if v < hi => Some(v),
                    _ if hi > p.horizon => {
                        return Err(Error::Evaluation {
                            index: p.horizon,
                            msg: format!("{} only answers below {}", p.path, p.horizon),
                        })
                    }
                    _ => None,
                }
            }
        };
        Ok(found.filter(|&v| v < hi))
    }

    /// Members below `h`, ascending.
    pub fn window(&self, h: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        match self {
            SetExpr::Fin(v) => out.extend(v.iter().copied().take_while(|&e| e < h)),
            SetExpr::Ap { a, d } => {
                let mut x = *a;
                while x < h {
                    out.push(x);
                    x = match x.checked_add(*d) {
                        Some(v) => v,
                        None => break,
                    };
                }
            }
            _ => {
                let mut x = 0;
                while let Some(v) = self.next(x, h)? {
                    out.push(v);
                    x = v + 1;
                }
            }
        }
        Ok(out)
    }

    /// Number of members below `h`.
    pub fn count_below(&self, h: u64) -> Result<u64> {
        if let Some(p) = self.periodic() {
            if !p.is_finite() {
                let t = p.threshold().min(h);
                let head = (0..t).filter(|&n| p.contains(n)).count() as u64;
                if h <= t {
                    return Ok(head);
                }
                let span = h - t;
                let full = span / p.period();
                let per = (t..t + p.period()).filter(|&n| p.contains(n)).count() as u64;
                let rest = (t + full * p.period()..h).filter(|&n| p.contains(n)).count() as u64;
                return Ok(head + full * per + rest);
            }
        }
        Ok(self.window(h)?.len() as u64)
    }

    /// The `n`-th member (from 0) of the increasing enumeration.
    pub fn nth(&self, n: u64) -> Result<u64> {
        let mut x = 0u64;
        let mut left = n;
        let mut hi = 1024u64;
        loop {
            while let Some(v) = self.next(x, hi)? {
                if left == 0 {
                    return Ok(v);
                }
                left -= 1;
                x = v + 1;
            }
            x = x.max(hi);
            if hi >= 1 << 40 {
                return Err(Error::Domain(format!("{self} has fewer than {} members below 2^40", n + 1)));
            }
            hi = hi.saturating_mul(2);
        }
    }

    /// Number of members below `x`.
    pub fn rank(&self, x: u64) -> Result<u64> {
        self.count_below(x)
    }

    /// Eventually periodic form, when the expression is built from periodic
    /// pieces only. Blow-ups of finite sets count as periodic while small.
    pub fn periodic(&self) -> Option<Periodic> {
        match self {
            SetExpr::Fin(v) => Periodic::finite(v),
            SetExpr::Ap { a, d } => Periodic::progression(*a, *d),
            SetExpr::RadoHom { kind, n } => Periodic::finite(&rado::homogeneous(*kind, *n).ok()?),
            SetExpr::Union(a, b) => a.periodic()?.union(&b.periodic()?),
            SetExpr::Inter(a, b) => match (a.periodic(), b.periodic()) {
                (Some(p), Some(q)) => p.inter(&q),
                (Some(p), None) if p.is_finite() => p.filter_finite(b),
                (None, Some(p)) if p.is_finite() => p.filter_finite(a),
                _ => None,
            },
            SetExpr::Diff(a, b) => {
                let p = a.periodic()?;
                if p.is_finite() {
                    // a finite set minus anything decidable pointwise
                    let head: Vec<u64> = (0..p.threshold()).filter(|&n| p.contains(n)).collect();
                    let mut keep = Vec::new();
                    for n in head {
                        if !b.contains(n).ok()? {
                            keep.push(n);
                        }
                    }
                    return Periodic::finite(&keep);
                }
                p.diff(&b.periodic()?)
            }
            SetExpr::Image(f, s) => {
                let p = s.periodic()?;
                match f {
                    FnExpr::Affine { a, b } => p.image_affine(*a, *b),
                    FnExpr::Div(k) => p.image_div(*k),
                    FnExpr::Enumerate(_) => None,
                }
            }
            SetExpr::Preimage(f, s) => {
                let p = s.periodic()?;
                match f {
                    FnExpr::Affine { a, b } => p.preimage_affine(*a, *b),
                    FnExpr::Div(k) => p.preimage_div(*k),
                    FnExpr::Enumerate(_) => None,
                }
            }
            SetExpr::Blowup(s, part) => {
                let p = s.periodic()?;
                if p.is_finite() {
                    let mut elems = Vec::new();
                    for k in (0..p.threshold()).filter(|&k| p.contains(k)) {
                        if elems.len() as u64 + u64::try_from(part.block_len_big(k).ok()?).ok()? > MAX_FINITE_BLOWUP {
                            return None;
                        }
                        elems.extend(part.block(k).ok()?);
                    }
                    Periodic::finite(&elems)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Structural size, used to bound generated expression pools.
    pub fn size(&self) -> usize {
        match self {
            SetExpr::Union(a, b) | SetExpr::Inter(a, b) | SetExpr::Diff(a, b) => 1 + a.size() + b.size(),
            SetExpr::Blowup(s, _) | SetExpr::Image(_, s) | SetExpr::Preimage(_, s) => 1 + s.size(),
            _ => 1,
        }
    }
}

impl FnExpr {
    pub fn validate(&self) -> Result<()> {
        match self {
            FnExpr::Affine { a, .. } if *a == 0 => Err(Error::Malformed("affine map needs a ≥ 1".into())),
            FnExpr::Div(0) => Err(Error::Malformed("div needs k ≥ 1".into())),
            FnExpr::Enumerate(e) => e.validate(),
            _ => Ok(()),
        }
    }
}

/// Codes of `w↾0, w w↾1, …` along the periodic branch, while they fit.
pub fn branch_codes(w: &str) -> impl Iterator<Item = u64> + '_ {
    let bits: Vec<bool> = w.chars().map(|c| c == '1').collect();
    let mut value = 0u64;
    let mut len = 0usize;
    std::iter::from_fn(move || {
        if len >= 63 {
            return None;
        }
        let code = (1u64 << len) - 1 + value;
        value = (value << 1) | bits[len % bits.len()] as u64;
        len += 1;
        Some(code)
    })
}

impl fmt::Display for FnExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FnExpr::Affine { a, b } => write!(f, "affine {a} {b}"),
            FnExpr::Div(k) => write!(f, "div {k}"),
            FnExpr::Enumerate(e) => write!(f, "enum {}", Paren(e)),
        }
    }
}

/// Renders compound expressions in parentheses.
pub(crate) struct Paren<'a>(pub &'a SetExpr);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SetExpr::Fin(_) | SetExpr::Squares | SetExpr::Factorials | SetExpr::Diag => write!(f, "{}", self.0),
            _ => write!(f, "({})", self.0),
        }
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Fin(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "fin {{{}}}", parts.join(","))
            }
            SetExpr::Ap { a, d } => write!(f, "ap {a} {d}"),
            SetExpr::Squares => write!(f, "squares"),
            SetExpr::Factorials => write!(f, "factorials"),
            SetExpr::Powers(b) => write!(f, "powers {b}"),
            SetExpr::Col(k) => write!(f, "col {k}"),
            SetExpr::Diag => write!(f, "diag"),
            SetExpr::Branch(w) => write!(f, "branch {w}"),
            SetExpr::RadoHom { kind, n } => write!(f, "rado-hom {} {n}", kind.name()),
            SetExpr::Union(a, b) => write!(f, "union {} {}", Paren(a), Paren(b)),
            SetExpr::Inter(a, b) => write!(f, "inter {} {}", Paren(a), Paren(b)),
            SetExpr::Diff(a, b) => write!(f, "diff {} {}", Paren(a), Paren(b)),
            SetExpr::Blowup(s, p) => write!(f, "blowup {} ({p})", Paren(s)),
            SetExpr::Image(g, s) => write!(f, "image ({g}) {}", Paren(s)),
            SetExpr::Preimage(g, s) => write!(f, "preimage ({g}) {}", Paren(s)),
            SetExpr::PredFile(p) => write!(f, "pred-file {}", p.path),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_examples() {
        assert_eq!(SetExpr::ap(1, 2).window(10).unwrap(), vec![1, 3, 5, 7, 9]);
        assert_eq!(SetExpr::Squares.window(17).unwrap(), vec![0, 1, 4, 9, 16]);
        let d = SetExpr::diff(SetExpr::omega(), SetExpr::ap(0, 2));
        assert_eq!(d.window(8).unwrap(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn leaves_agree_with_contains() {
        let exprs = [
            SetExpr::Squares,
            SetExpr::Factorials,
            SetExpr::Powers(3),
            SetExpr::Col(2),
            SetExpr::Diag,
            SetExpr::Branch("10".into()),
            SetExpr::RadoHom { kind: HomKind::Clique, n: 3 },
            SetExpr::image(FnExpr::Affine { a: 3, b: 1 }, SetExpr::Squares),
            SetExpr::image(FnExpr::Div(3), SetExpr::Squares),
            SetExpr::preimage(FnExpr::Affine { a: 2, b: 1 }, SetExpr::Squares),
            SetExpr::preimage(FnExpr::Div(2), SetExpr::Squares),
            SetExpr::image(FnExpr::Enumerate(Arc::new(SetExpr::ap(0, 2))), SetExpr::ap(1, 3)),
            SetExpr::preimage(FnExpr::Enumerate(Arc::new(SetExpr::ap(1, 2))), SetExpr::ap(0, 3)),
        ];
        for e in &exprs {
            let w = e.window(300).unwrap();
            let brute: Vec<u64> = (0..300).filter(|&x| e.contains(x).unwrap()).collect();
            assert_eq!(w, brute, "{e}");
        }
    }

    #[test]
    fn diag_and_columns() {
        // Δ = {(n,m) : m ≤ n}
        for x in 0..200 {
            let (n, m) = coding::unpair(x);
            assert_eq!(SetExpr::Diag.contains(x).unwrap(), m <= n);
        }
        assert_eq!(SetExpr::Col(0).window(11).unwrap(), vec![0, 2, 5, 9]);
    }

    #[test]
    fn pred_file_reports_horizon() {
        let p = PredFile::from_text("t", "horizon 10\n1 3 5").unwrap();
        let e = SetExpr::PredFile(Arc::new(p));
        assert_eq!(e.window(10).unwrap(), vec![1, 3, 5]);
        assert!(matches!(e.window(11), Err(Error::Evaluation { index: 10, .. })));
        assert!(matches!(e.contains(12), Err(Error::Evaluation { index: 12, .. })));
    }

    #[test]
    fn nth_and_rank() {
        assert_eq!(SetExpr::Squares.nth(5).unwrap(), 25);
        assert_eq!(SetExpr::ap(1, 2).rank(7).unwrap(), 3);
        assert_eq!(SetExpr::ap(0, 3).count_below(100).unwrap(), 34);
    }

    #[test]
    fn branch_prefix_codes() {
        let codes: Vec<u64> = branch_codes("10").take(5).collect();
        assert_eq!(codes, vec![0, 2, 5, 12, 25]);
    }
}

impl serde::Serialize for SetExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
