//! Exact membership on the symbolic vocabulary.
//!
//! An expression is expanded into a union of terms `Q ∩ N₁ ∩ … ∖ (M₁ ∪ …)`
//! where `Q` is eventually periodic and the `Nᵢ`, `Mⱼ` are non-periodic
//! atoms. A union is small iff every term is; it is positive iff some term
//! is. Terms are decided by the per-ideal atom tables below.

use num_integer::Roots;

use crate::natset::{FnExpr, SetExpr};
use crate::partition::{BoundaryRule, Partition, PartitionKind};
use crate::periodic::Periodic;
use crate::verdict::Answer;
use crate::weight::WeightFn;

const MAX_TERMS: usize = 256;
const MAX_DEPTH: usize = 24;

/// The decision table an ideal is answered by.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Table {
    Fin,
    /// Asymptotic density zero (also density ideals over geometric blocks).
    Z,
    /// Summable for a weight comparable to `1/(n+1)`.
    Harm,
    /// Uniform density over the given interval blocks of unbounded width.
    DensityOwn(Partition),
    Farah,
    W,
    Ed,
    EdFin,
    FinFin,
    FinEmpty,
    EmptyFin,
    I0,
    Graph,
    TrN,
    Plain,
    Generated(Vec<SetExpr>),
}

#[derive(Debug, Clone)]
pub(crate) struct Term {
    pub q: Periodic,
    pub pos: Vec<SetExpr>,
    pub neg: Vec<SetExpr>,
}

pub(crate) fn dnf(e: &SetExpr) -> Option<Vec<Term>> {
    if let Some(q) = e.periodic() {
        return Some(vec![Term { q, pos: Vec::new(), neg: Vec::new() }]);
    }
    let terms = match e {
        SetExpr::Union(a, b) => {
            let mut v = dnf(a)?;
            v.extend(dnf(b)?);
            v
        }
        SetExpr::Inter(a, b) => {
            let (ta, tb) = (dnf(a)?, dnf(b)?);
            if ta.len() * tb.len() > MAX_TERMS {
                return None;
            }
            let mut v = Vec::new();
            for x in &ta {
                for y in &tb {
                    let mut pos = x.pos.clone();
                    pos.extend(y.pos.iter().cloned());
                    let mut neg = x.neg.clone();
                    neg.extend(y.neg.iter().cloned());
                    v.push(Term { q: x.q.inter(&y.q)?, pos, neg });
                }
            }
            v
        }
        SetExpr::Diff(a, b) if matches!(**b, SetExpr::Union(..)) => {
            let SetExpr::Union(b1, b2) = &**b else { unreachable!() };
            dnf(&SetExpr::diff(SetExpr::diff((**a).clone(), (**b1).clone()), (**b2).clone()))?
        }
        SetExpr::Diff(a, b) => {
            let mut v = dnf(a)?;
            match b.periodic() {
                Some(pb) => {
                    for t in &mut v {
                        t.q = t.q.diff(&pb)?;
                    }
                }
                None => {
                    for t in &mut v {
                        t.neg.push((**b).clone());
                    }
                }
            }
            v
        }
        _ => vec![Term { q: Periodic::full(), pos: vec![e.clone()], neg: Vec::new() }],
    };
    (terms.len() <= MAX_TERMS).then_some(terms)
}

/// Sound emptiness test: a term is empty when its periodic part is, when
/// an atom is both kept and removed, or when it meets two columns.
pub(crate) fn is_empty(e: &SetExpr) -> bool {
    let Some(terms) = dnf(e) else { return false };
    terms.iter().all(|t| {
        if t.q.next(0).is_none() || t.pos.iter().any(|a| t.neg.contains(a)) {
            return true;
        }
        let cols: Vec<u64> = t.pos.iter().filter_map(|a| if let SetExpr::Col(k) = a { Some(*k) } else { None }).collect();
        cols.windows(2).any(|w| w[0] != w[1])
    })
}

pub(crate) type Decision = (Answer, String);

fn yes(why: impl Into<String>) -> Decision {
    (Answer::In, why.into())
}

fn no(why: impl Into<String>) -> Decision {
    (Answer::Out, why.into())
}

fn unknown(why: impl Into<String>) -> Decision {
    (Answer::Unknown, why.into())
}

pub(crate) fn decide(t: &Table, e: &SetExpr) -> Decision {
    decide_at(t, e, 0)
}

fn decide_at(t: &Table, e: &SetExpr, depth: usize) -> Decision {
    if depth > MAX_DEPTH {
        return unknown("expression nesting exceeds the decision depth");
    }
    let Some(terms) = dnf(e) else {
        return unknown("expression expands into too many terms");
    };
    let mut reasons = Vec::new();
    let mut all_in = true;
    for term in &terms {
        let (a, why) = decide_term(t, term, depth);
        match a {
            Answer::Out => return no(why),
            Answer::In => reasons.push(why),
            Answer::Unknown => {
                all_in = false;
                reasons.push(why);
            }
        }
    }
    if all_in {
        reasons.dedup();
        yes(reasons.join("; "))
    } else {
        let r: Vec<String> = reasons.into_iter().filter(|r| r.starts_with("undecided")).collect();
        unknown(r.first().cloned().unwrap_or_else(|| "undecided".into()))
    }
}

/// Two periodic branch words describe the same infinite branch.
fn same_branch(w: &str, v: &str) -> bool {
    let n = w.len() * v.len();
    let a = w.as_bytes();
    let b = v.as_bytes();
    (0..n).all(|i| a[i % a.len()] == b[i % b.len()])
}

enum Merged {
    Finite(String),
    Atoms(Vec<SetExpr>),
}

fn merge_atoms(pos: &[SetExpr], depth: usize) -> Merged {
    let mut out: Vec<SetExpr> = Vec::new();
    let mut branches: Vec<&str> = Vec::new();
    let mut cols: Vec<u64> = Vec::new();
    let mut diag = false;
    for a in pos {
        match a {
            SetExpr::Blowup(s, p) => {
                let existing = out.iter().position(|x| matches!(x, SetExpr::Blowup(_, q) if q == p));
                match existing {
                    Some(i) => {
                        let SetExpr::Blowup(s0, _) = &out[i] else { unreachable!() };
                        let merged = SetExpr::inter((**s0).clone(), (**s).clone());
                        out[i] = SetExpr::blowup(merged, p.clone());
                    }
                    None => out.push(a.clone()),
                }
                continue;
            }
            SetExpr::Branch(w) => {
                if let Some(v) = branches.iter().find(|v| !same_branch(w, v)) {
                    return Merged::Finite(format!("branches {w} and {v} share finitely many nodes"));
                }
                branches.push(w);
            }
            SetExpr::Col(k) => {
                if let Some(j) = cols.iter().find(|&&j| j != *k) {
                    return Merged::Finite(format!("columns {k} and {j} are disjoint"));
                }
                cols.push(*k);
            }
            SetExpr::Diag => diag = true,
            _ => {}
        }
        if !out.contains(a) {
            out.push(a.clone());
        }
    }
    if diag {
        if let Some(k) = cols.first() {
            return Merged::Finite(format!("column {k} meets Δ in {} points", k + 1));
        }
    }
    for a in &out {
        if let SetExpr::Blowup(s, p) = a {
            if decide_at(&Table::Fin, s, depth + 1).0 == Answer::In {
                return Merged::Finite(format!("blow-up of a finite index set over {p}"));
            }
        }
    }
    Merged::Atoms(out)
}

fn periodic_expr(q: &Periodic) -> SetExpr {
    let t = q.threshold();
    let head = SetExpr::fin((0..t).filter(|&x| q.contains(x)));
    if q.is_finite() {
        return head;
    }
    let p = q.period();
    let tails = (t..t + p).filter(|&r| q.contains(r)).map(|r| SetExpr::ap(r, p));
    SetExpr::union_all(std::iter::once(head).chain(tails))
}

fn term_expr(term: &Term) -> SetExpr {
    let kept = term.pos.iter().cloned().fold(periodic_expr(&term.q), SetExpr::inter);
    term.neg.iter().cloned().fold(kept, SetExpr::diff)
}

fn decide_term(t: &Table, term: &Term, depth: usize) -> Decision {
    if term.q.is_finite() {
        return yes("finite");
    }
    if term.pos.iter().any(|a| term.neg.contains(a)) {
        return yes("empty");
    }
    if let Table::Generated(gens) = t {
        let rest = SetExpr::diff(term_expr(term), SetExpr::union_all(gens.iter().cloned()));
        if decide_at(&Table::Fin, &rest, depth + 1).0 == Answer::In {
            return yes("covered by the generators up to a finite set");
        }
    }
    let pos = match merge_atoms(&term.pos, depth) {
        Merged::Finite(why) => return yes(why),
        Merged::Atoms(v) => v,
    };
    let meets = match (t, pos.as_slice()) {
        (Table::Fin, [a]) if !term.q.is_cofinite() => infinite_meet(&term.q, a),
        _ => None,
    };
    if meets == Some(false) {
        return yes("the atom meets the periodic part in finitely many points");
    }
    for a in &pos {
        let (ans, why) = atom(t, a, depth);
        if ans == Answer::In {
            return yes(why);
        }
    }
    for m in &term.neg {
        if decide_at(t, m, depth + 1).0 != Answer::In {
            return unknown(format!("undecided: removed set {m} is not known to be small"));
        }
    }
    if meets == Some(true) {
        return no("the atom meets the periodic part infinitely often");
    }
    match pos.as_slice() {
        [] => periodic_verdict(t, &term.q),
        [a] => {
            if term.q.is_cofinite() {
                let d = atom(t, a, depth);
                if d.0 == Answer::Out {
                    return d;
                }
            }
            if let SetExpr::Blowup(s, p) = a {
                if p.carrier().is_none() && is_infinite(s, depth) {
                    if positive_partition(t, p, &term.q) {
                        return no(format!(
                            "meets infinitely many blocks of {p} in a fraction {} of each",
                            term.q.density()
                        ));
                    }
                    if *t == Table::Farah && p.is_dyadic() && decide_at(&Table::Harm, s, depth + 1).0 == Answer::Out {
                        return no("a positive fraction of dyadic blocks indexed by a non-summable set");
                    }
                }
            }
            unknown(format!("undecided: no table entry for {} ∩ {a}", describe_q(&term.q)))
        }
        _ => unknown("undecided: intersection of several non-periodic atoms"),
    }
}

/// Whether an infinite periodic set meets a sparse atom infinitely often,
/// by following the atom's residues until they cycle.
fn infinite_meet(q: &Periodic, a: &SetExpr) -> Option<bool> {
    if q.is_finite() {
        return Some(false);
    }
    let p = q.period();
    let t = q.threshold();
    let hit = |c: u64| q.contains(t + (c + p - t % p) % p);
    match a {
        SetExpr::Diag => Some(true),
        SetExpr::Squares => {
            let x0 = t.sqrt() + 1;
            Some((x0..x0 + p).any(|x| hit(((x as u128 * x as u128) % p as u128) as u64)))
        }
        SetExpr::Factorials => Some(hit(0)),
        SetExpr::Powers(b) => {
            let mut j = 0u32;
            while b.checked_pow(j).is_some_and(|v| v < t) {
                j += 1;
            }
            let mul = |r: u64| ((r as u128 * *b as u128) % p as u128) as u64;
            let mut r = (0..j).fold(1 % p, |acc, _| mul(acc));
            let mut seen = std::collections::HashSet::new();
            while seen.insert(r) {
                if hit(r) {
                    return Some(true);
                }
                r = mul(r);
            }
            Some(false)
        }
        SetExpr::Col(k) => {
            let m0 = (0u64..).find(|&m| crate::coding::pair(*k, m).map_or(true, |v| v >= t))?;
            let pm = |m: u64| -> u64 {
                let s = (*k as u128 + m as u128) % (2 * p as u128);
                let tri = (s * (s + 1) / 2) % p as u128;
                ((tri + m as u128) % p as u128) as u64
            };
            Some((m0..m0 + 2 * p).any(|m| hit(pm(m))))
        }
        SetExpr::Branch(w) => {
            let bits: Vec<u64> = w.bytes().map(|c| (c == b'1') as u64).collect();
            let len = bits.len();
            // exact codes until past the threshold
            let mut n = 0usize;
            let mut code = 0u64;
            let mut v = 0u64;
            while code < t {
                v = v.checked_mul(2)?.checked_add(bits[n % len])?;
                n += 1;
                code = (1u64 << n) - 1 + v;
            }
            let (mut pw, mut vm) = (((1u128 << n) % p as u128) as u64, v % p);
            let mut seen = std::collections::HashMap::new();
            let mut hits = Vec::new();
            loop {
                let state = (n % len, pw, vm);
                if let Some(&first) = seen.get(&state) {
                    return Some(hits[first..].iter().any(|&h| h));
                }
                if seen.len() > 1 << 20 {
                    return None;
                }
                seen.insert(state, hits.len());
                hits.push(hit((pw + p - 1 + vm) % p));
                vm = (2 * vm + bits[n % len]) % p;
                pw = (2 * pw) % p;
                n += 1;
            }
        }
        _ => None,
    }
}

fn describe_q(q: &Periodic) -> String {
    if q.is_cofinite() {
        "a cofinite set".into()
    } else {
        format!("a periodic set of density {}", q.density())
    }
}

fn is_infinite(s: &SetExpr, depth: usize) -> bool {
    decide_at(&Table::Fin, s, depth + 1).0 == Answer::Out
}

fn periodic_verdict(t: &Table, q: &Periodic) -> Decision {
    let out = match t {
        Table::Fin
        | Table::Z
        | Table::Harm
        | Table::Farah
        | Table::W
        | Table::Ed
        | Table::FinFin
        | Table::FinEmpty
        | Table::EmptyFin
        | Table::I0 => true,
        Table::DensityOwn(p) => p.carrier().is_none() && !matches!(p.kind(), PartitionKind::DeltaColumns),
        _ => q.is_cofinite(),
    };
    if out {
        let why = match t {
            Table::Fin => "infinite".to_string(),
            Table::Z | Table::DensityOwn(_) => format!("density {}", q.density()),
            Table::Harm => format!("contains a residue class, density {}", q.density()),
            Table::Farah => "a residue class fills a positive fraction of every dyadic block".into(),
            Table::W => "contains arbitrarily long arithmetic progressions".into(),
            Table::Ed | Table::FinFin | Table::FinEmpty | Table::EmptyFin | Table::I0 => {
                "contains a product of two residue classes under pair coding".into()
            }
            _ => "cofinite".into(),
        };
        no(why)
    } else {
        unknown(format!("undecided: no table entry for {}", describe_q(q)))
    }
}

fn weighted_unbounded(p: &Partition) -> bool {
    matches!(p.rule(), Some(BoundaryRule::Weighted(w)) if !matches!(w, WeightFn::Const(_)))
}

fn interval_unbounded(p: &Partition) -> bool {
    p.carrier().is_none() && matches!(p.kind(), PartitionKind::Intervals { .. }) && p.widths_unbounded()
}

/// Whether any set meeting infinitely many blocks of `p` in the fraction
/// of `q` is positive.
pub(crate) fn positive_partition(t: &Table, p: &Partition, q: &Periodic) -> bool {
    if p.carrier().is_some() || q.is_finite() {
        return false;
    }
    let triangular = matches!(p.rule(), Some(BoundaryRule::Triangular));
    let columns = matches!(p.kind(), PartitionKind::DeltaColumns);
    match t {
        Table::Fin => q.is_cofinite() || interval_unbounded(p),
        Table::Z | Table::Harm => p.is_geometric() || weighted_unbounded(p),
        Table::DensityOwn(own) => own == p,
        Table::W => interval_unbounded(p),
        Table::Ed => q.is_cofinite() && (columns || triangular),
        Table::EdFin | Table::I0 => q.is_cofinite() && columns,
        Table::FinFin | Table::EmptyFin => q.is_cofinite() && triangular,
        Table::FinEmpty => q.is_cofinite() && (columns || triangular),
        _ => false,
    }
}

/// Every block of `p` restricted to `carrier` keeps enough of the carrier
/// that infinitely many of them form a positive set.
pub(crate) fn witness_valid(t: &Table, carrier: &SetExpr, p: &Partition) -> bool {
    if *t == Table::Fin {
        return true;
    }
    let Some(terms) = dnf(carrier) else { return false };
    terms.iter().all(|term| {
        if term.q.is_finite() {
            return true;
        }
        if !term.neg.iter().all(|m| decide(t, m).0 == Answer::In) {
            return false;
        }
        match term.pos.as_slice() {
            [] => positive_partition(t, p, &term.q),
            [SetExpr::Blowup(_, r)] if r == p => positive_partition(t, p, &term.q),
            _ => false,
        }
    })
}

/// Finite or infinite, for atoms.
fn fin_atom(a: &SetExpr, depth: usize) -> Decision {
    let fin = |s: &SetExpr| decide_at(&Table::Fin, s, depth + 1);
    match a {
        SetExpr::Squares | SetExpr::Factorials | SetExpr::Powers(_) | SetExpr::Col(_) | SetExpr::Diag | SetExpr::Branch(_) => {
            no("infinite")
        }
        SetExpr::Blowup(s, _) | SetExpr::Image(FnExpr::Affine { .. } | FnExpr::Div(_), s) => fin(s),
        SetExpr::Preimage(FnExpr::Div(_), s) => fin(s),
        SetExpr::Image(FnExpr::Enumerate(e), s) => match fin(s) {
            d @ (Answer::In, _) => d,
            (Answer::Out, _) if fin(e).0 == Answer::Out => no("infinite"),
            _ => unknown("undecided: finiteness of an enumerated image"),
        },
        SetExpr::Preimage(_, s) => match fin(s) {
            d @ (Answer::In, _) => d,
            _ => unknown("undecided: finiteness of a preimage"),
        },
        SetExpr::PredFile(p) => unknown(format!("undecided: {} is only known below {}", p.path, p.horizon)),
        _ => unknown("undecided"),
    }
}

/// Verdict of `t` for a single non-periodic atom.
fn atom(t: &Table, a: &SetExpr, depth: usize) -> Decision {
    let f = fin_atom(a, depth);
    if *t == Table::Fin || f.0 == Answer::In {
        return f;
    }
    let sub = |tab: &Table, s: &SetExpr| decide_at(tab, s, depth + 1);
    let infinite = f.0 == Answer::Out;
    // blow-ups common to all tables
    if let SetExpr::Blowup(_, p) = a {
        if let Some(carrier) = p.carrier() {
            if sub(t, carrier).0 == Answer::In {
                return yes("contained in a small carrier");
            }
            if infinite && witness_valid(t, carrier, &p.base()) {
                return no(format!("contains infinitely many blocks of the restricted witness {p}"));
            }
            return unknown(format!("undecided: blow-up over {p}"));
        }
        if infinite && positive_partition(t, p, &Periodic::full()) {
            return no(format!("contains infinitely many full blocks of {p}"));
        }
    }
    match t {
        Table::Fin => unreachable!(),
        Table::Z | Table::Harm => {
            let name = if *t == Table::Z { "density zero" } else { "summable" };
            match a {
                SetExpr::Squares => yes(format!("squares: {name}")),
                SetExpr::Factorials => yes(format!("factorials: {name}")),
                SetExpr::Powers(b) => yes(format!("powers of {b}: {name}")),
                SetExpr::Col(k) => yes(format!("column {k} grows quadratically: {name}")),
                SetExpr::Branch(w) => yes(format!("branch {w} codes grow exponentially: {name}")),
                SetExpr::Diag => no("Δ fills half of every antidiagonal"),
                SetExpr::Blowup(s, p) => {
                    let bounded = p.tail_width().is_some();
                    let tri = matches!(p.rule(), Some(BoundaryRule::Triangular));
                    if bounded || tri {
                        let (ans, why) = sub(t, s);
                        (ans, format!("blow-up over {p} behaves like its index set: {why}"))
                    } else {
                        unknown(format!("undecided: blow-up over {p}"))
                    }
                }
                SetExpr::Image(FnExpr::Affine { .. } | FnExpr::Div(_), s) | SetExpr::Preimage(FnExpr::Div(_), s) => {
                    let (ans, why) = sub(t, s);
                    (ans, format!("comparable to its argument: {why}"))
                }
                SetExpr::Image(FnExpr::Enumerate(_), s) | SetExpr::Preimage(FnExpr::Affine { .. }, s) => {
                    match sub(t, s) {
                        (Answer::In, why) => yes(format!("dominated by its argument: {why}")),
                        _ => unknown(format!("undecided: {a}")),
                    }
                }
                _ => fallback(a),
            }
        }
        Table::DensityOwn(own) => {
            let intervals = own.carrier().is_none() && matches!(own.kind(), PartitionKind::Intervals { .. });
            match a {
                SetExpr::Squares | SetExpr::Factorials | SetExpr::Powers(_) | SetExpr::Col(_) | SetExpr::Branch(_)
                    if intervals =>
                {
                    yes("o(width) points in every long interval block")
                }
                _ => fallback(a),
            }
        }
        Table::Farah => match a {
            SetExpr::Squares => no("about 2^{n/2} squares in [2^n, 2^{n+1}): terms 1/n diverge"),
            SetExpr::Col(k) => no(format!("column {k} is quadratic: terms 1/n diverge")),
            SetExpr::Diag => no("Δ has positive density"),
            SetExpr::Factorials | SetExpr::Powers(_) | SetExpr::Branch(_) => {
                yes("boundedly many points per dyadic block: terms O(1/n²)")
            }
            SetExpr::Blowup(s, p) if p.is_dyadic() => {
                let (ans, why) = sub(&Table::Harm, s);
                (ans, format!("full dyadic blocks contribute 1/n each: {why}"))
            }
            _ => fallback(a),
        },
        Table::W => match a {
            SetExpr::Factorials | SetExpr::Powers(_) | SetExpr::Branch(_) => {
                yes("gaps more than double: no 3-term progression beyond a finite part")
            }
            SetExpr::Diag => no("Δ contains intervals of every length"),
            SetExpr::Squares => unknown("undecided: progressions of squares are not tabulated"),
            SetExpr::Image(FnExpr::Affine { .. }, s) => {
                let (ans, why) = sub(t, s);
                (ans, format!("affine maps preserve progressions: {why}"))
            }
            SetExpr::Image(FnExpr::Div(_), s) | SetExpr::Preimage(FnExpr::Div(_), s) => match sub(t, s) {
                (Answer::Out, why) => no(format!("long progressions survive: {why}")),
                _ => unknown(format!("undecided: {a}")),
            },
            _ => fallback(a),
        },
        Table::Ed | Table::EdFin => match a {
            SetExpr::Col(k) => yes(format!("column {k} is a single vertical section")),
            SetExpr::Diag => no("column sizes n+1 are unbounded"),
            _ => fallback(a),
        },
        Table::FinFin => match a {
            SetExpr::Col(k) => yes(format!("only column {k} is nonempty")),
            SetExpr::Diag => yes("every column of Δ is finite"),
            SetExpr::Blowup(_, p) if matches!(p.kind(), PartitionKind::DeltaColumns) => yes("a subset of Δ"),
            _ => fallback(a),
        },
        Table::FinEmpty => match a {
            SetExpr::Col(k) => yes(format!("only column {k} is nonempty")),
            SetExpr::Diag => no("every column of Δ is nonempty"),
            _ => fallback(a),
        },
        Table::EmptyFin => match a {
            SetExpr::Col(k) => no(format!("column {k} is infinite")),
            SetExpr::Diag => yes("every column of Δ is finite"),
            SetExpr::Blowup(_, p) if matches!(p.kind(), PartitionKind::DeltaColumns) => yes("a subset of Δ"),
            _ => fallback(a),
        },
        Table::I0 => match a {
            SetExpr::Col(k) => yes(format!("column {k} misses X'×Y' once X' avoids {k}")),
            SetExpr::Diag => no("every rectangle X'×Y' has a point below the diagonal"),
            _ => fallback(a),
        },
        Table::Graph => match a {
            SetExpr::Col(k) => yes(format!("the star at {k} is 2-colourable")),
            _ => fallback(a),
        },
        Table::TrN => match a {
            SetExpr::Branch(w) => yes(format!("[A]_δ is the single branch {w}^∞")),
            SetExpr::Squares | SetExpr::Factorials | SetExpr::Powers(_) => {
                yes("cylinder mass Σ 2^{-|s|} over the set converges")
            }
            _ => fallback(a),
        },
        Table::Plain => fallback(a),
        Table::Generated(gens) => {
            if gens.contains(a) {
                yes(format!("{a} is a generator"))
            } else {
                fallback(a)
            }
        }
    }
}

fn fallback(a: &SetExpr) -> Decision {
    unknown(format!("undecided: no table entry for {a}"))
}
