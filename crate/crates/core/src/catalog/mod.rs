//! The ideal catalog: handles, membership, restriction and Fubini products.

pub(crate) mod decide;
pub mod certificate;
pub mod diagnostics;
pub mod pseudo_union;
pub mod solecki;

use std::fmt;

use crate::coding::Coding;
use crate::error::{Error, Result};
use crate::natset::SetExpr;
use crate::parse::{parse_partition, parse_set_list, parse_weight};
use crate::partition::{Partition, PartitionKind};
use crate::verdict::{Answer, Verdict};
use crate::weight::WeightFn;

pub use certificate::{generated_member, Certificate, Generator, GeneratorKind};
pub use diagnostics::{diagnostics, Diagnostics};
pub use pseudo_union::{pseudo_union, pseudo_union_with_cuts};

use decide::witness_valid;
use decide::Table;

/// Horizon reported with verdicts when none is given.
pub const DEFAULT_HORIZON: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum IdealKind {
    Fin,
    Z,
    Summable(WeightFn),
    /// Uniform density on the blocks of a partition.
    Density(Partition),
    Farah,
    W,
    Ed,
    EdFin,
    FinFin,
    FinEmpty,
    EmptyFin,
    I0,
    Gfc,
    Gc,
    Nwd,
    Conv,
    TrN,
    Ran,
    Solecki,
    Generated(Vec<SetExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capability {
    ExactTable,
    Diagnostics,
    TalagrandWitness,
    PseudoUnion,
    PositivityWitness,
}

/// A factor of a Fubini product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Fin,
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealHandle {
    kind: IdealKind,
    restriction: Option<SetExpr>,
}

impl IdealKind {
    /// Coding of the index set on which the ideal lives; `None` is ω itself.
    pub fn coding(&self) -> Option<Coding> {
        match self {
            IdealKind::Ed | IdealKind::EdFin | IdealKind::FinFin | IdealKind::FinEmpty | IdealKind::EmptyFin | IdealKind::I0 => {
                Some(Coding::Pair)
            }
            IdealKind::Gfc | IdealKind::Gc => Some(Coding::UnorderedPair),
            IdealKind::Nwd => Some(Coding::Rational),
            IdealKind::Conv => Some(Coding::RationalUnit),
            IdealKind::TrN => Some(Coding::BinarySeq),
            _ => None,
        }
    }

    pub fn is_p_ideal(&self) -> bool {
        matches!(self, IdealKind::Fin | IdealKind::Z | IdealKind::Summable(_) | IdealKind::Density(_) | IdealKind::Farah | IdealKind::TrN)
    }

    /// Declared tallness.
    pub fn is_tall(&self) -> bool {
        match self {
            IdealKind::Fin | IdealKind::FinEmpty | IdealKind::EmptyFin => false,
            IdealKind::Summable(w) => !matches!(w, WeightFn::Const(_)),
            IdealKind::Density(p) => p.widths_unbounded(),
            IdealKind::Generated(_) => false,
            _ => true,
        }
    }

    fn table(&self) -> Table {
        match self {
            IdealKind::Fin => Table::Fin,
            IdealKind::Z => Table::Z,
            IdealKind::Summable(WeightFn::Const(_)) => Table::Fin,
            IdealKind::Summable(_) => Table::Harm,
            IdealKind::Density(p) => {
                if p.carrier().is_none() && p.tail_width().is_some() {
                    Table::Fin
                } else if p.carrier().is_none() && p.is_geometric() {
                    Table::Z
                } else {
                    Table::DensityOwn(p.clone())
                }
            }
            IdealKind::Farah => Table::Farah,
            IdealKind::W => Table::W,
            IdealKind::Ed => Table::Ed,
            IdealKind::EdFin => Table::EdFin,
            IdealKind::FinFin => Table::FinFin,
            IdealKind::FinEmpty => Table::FinEmpty,
            IdealKind::EmptyFin => Table::EmptyFin,
            IdealKind::I0 => Table::I0,
            IdealKind::Gfc | IdealKind::Gc => Table::Graph,
            IdealKind::TrN => Table::TrN,
            IdealKind::Nwd | IdealKind::Conv | IdealKind::Ran | IdealKind::Solecki => Table::Plain,
            IdealKind::Generated(g) => Table::Generated(g.clone()),
        }
    }

    /// A partition whose infinitely many blocks always form a positive set.
    pub fn witness_partition(&self) -> Option<Partition> {
        match self {
            IdealKind::Fin | IdealKind::Z | IdealKind::Farah => Some(Partition::dyadic()),
            IdealKind::Summable(WeightFn::Const(_)) => Some(Partition::dyadic()),
            IdealKind::Summable(w) => Some(Partition::weighted(w.clone())),
            IdealKind::Density(p) => match self.table() {
                Table::Fin | Table::Z => Some(Partition::dyadic()),
                _ if p.carrier().is_none() && matches!(p.kind(), PartitionKind::Intervals { .. }) => Some(p.clone()),
                _ => None,
            },
            IdealKind::W => Some(Partition::triangular()),
            _ => None,
        }
    }
}

impl fmt::Display for IdealKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealKind::Fin => write!(f, "Fin"),
            IdealKind::Z => write!(f, "Z"),
            IdealKind::Summable(WeightFn::Harmonic) => write!(f, "I_1/n"),
            IdealKind::Summable(w) => write!(f, "summable[{w}]"),
            IdealKind::Density(p) => write!(f, "density[{p}]"),
            IdealKind::Farah => write!(f, "Farah"),
            IdealKind::W => write!(f, "W"),
            IdealKind::Ed => write!(f, "ED"),
            IdealKind::EdFin => write!(f, "ED_fin"),
            IdealKind::FinFin => write!(f, "Fin⊗Fin"),
            IdealKind::FinEmpty => write!(f, "Fin⊗∅"),
            IdealKind::EmptyFin => write!(f, "∅⊗Fin"),
            IdealKind::I0 => write!(f, "I0"),
            IdealKind::Gfc => write!(f, "G_fc"),
            IdealKind::Gc => write!(f, "G_c"),
            IdealKind::Nwd => write!(f, "Nwd"),
            IdealKind::Conv => write!(f, "Conv"),
            IdealKind::TrN => write!(f, "tr(N)"),
            IdealKind::Ran => write!(f, "Ran"),
            IdealKind::Solecki => write!(f, "Solecki"),
            IdealKind::Generated(g) => {
                let parts: Vec<String> = g.iter().map(ToString::to_string).collect();
                write!(f, "id[{}]", parts.join("; "))
            }
        }
    }
}

impl fmt::Display for IdealHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.restriction {
            Some(y) => write!(f, "restrict({}, {y})", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Split `a, b` at the first comma outside brackets.
fn split_args(src: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in src.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => return Some((src[..i].trim(), src[i + 1..].trim())),
            _ => {}
        }
    }
    None
}

fn bracketed<'a>(src: &'a str, head: &str, open: char, close: char) -> Option<&'a str> {
    let rest = src.strip_prefix(head)?.trim_start();
    rest.strip_prefix(open)?.strip_suffix(close)
}

fn factor(src: &str) -> Result<Factor> {
    match src {
        "Fin" => Ok(Factor::Fin),
        "∅" | "{∅}" | "empty" | "{}" => Ok(Factor::Empty),
        other => Err(Error::Unsupported(format!("Fubini factor '{other}'"))),
    }
}

impl IdealHandle {
    pub fn new(kind: IdealKind) -> IdealHandle {
        IdealHandle { kind, restriction: None }
    }

    /// Parse an ideal expression such as `Z`, `I_1/n`, `summable[const 1/2]`,
    /// `density[triangular]`, `Fin⊗Fin`, `fubini(Fin, ∅)`, `id[evens; col 0]`
    /// or `restrict(Z, evens)`.
    pub fn parse(src: &str) -> Result<IdealHandle> {
        let s = src.trim();
        if let Some(inner) = bracketed(s, "restrict", '(', ')') {
            let (i, y) = split_args(inner).ok_or_else(|| Error::parse(0, "restrict needs an ideal and a set"))?;
            let base = IdealHandle::parse(i)?;
            let y = crate::parse::parse_set(y)?;
            return base.restrict(&y);
        }
        if let Some(inner) = bracketed(s, "fubini", '(', ')') {
            let (a, b) = split_args(inner).ok_or_else(|| Error::parse(0, "fubini needs two factors"))?;
            return fubini(factor(a)?, factor(b)?);
        }
        if let Some(inner) = bracketed(s, "summable", '[', ']') {
            let w = parse_weight(inner)?;
            return Ok(IdealHandle::new(IdealKind::Summable(w)));
        }
        if let Some(inner) = bracketed(s, "density", '[', ']') {
            let p = parse_partition(inner)?;
            return Ok(IdealHandle::new(IdealKind::Density(p)));
        }
        if let Some(inner) = bracketed(s, "id", '[', ']') {
            return Ok(IdealHandle::new(IdealKind::Generated(parse_set_list(inner)?)));
        }
        let kind = match s {
            "Fin" => IdealKind::Fin,
            "Z" => IdealKind::Z,
            "I_1/n" | "I_{1/n}" | "I1/n" => IdealKind::Summable(WeightFn::Harmonic),
            "Farah" | "I_F" => IdealKind::Farah,
            "W" => IdealKind::W,
            "ED" => IdealKind::Ed,
            "ED_fin" | "EDfin" => IdealKind::EdFin,
            "Fin⊗Fin" | "Fin*Fin" | "FinxFin" => IdealKind::FinFin,
            "Fin⊗∅" | "Fin*0" | "Fin⊗{∅}" => IdealKind::FinEmpty,
            "∅⊗Fin" | "0*Fin" | "{∅}⊗Fin" => IdealKind::EmptyFin,
            "I0" | "I_0" => IdealKind::I0,
            "G_fc" | "Gfc" => IdealKind::Gfc,
            "G_c" | "Gc" => IdealKind::Gc,
            "Nwd" => IdealKind::Nwd,
            "Conv" => IdealKind::Conv,
            "tr(N)" | "trN" => IdealKind::TrN,
            "Ran" => IdealKind::Ran,
            "S" | "Solecki" => IdealKind::Solecki,
            other => return Err(Error::parse(0, format!("unknown ideal '{other}'"))),
        };
        Ok(IdealHandle::new(kind))
    }

    pub fn kind(&self) -> &IdealKind {
        &self.kind
    }

    pub fn restriction(&self) -> Option<&SetExpr> {
        self.restriction.as_ref()
    }

    pub fn capabilities(&self) -> Vec<Capability> {
        let mut caps = vec![Capability::ExactTable, Capability::Diagnostics];
        if self.kind.witness_partition().is_some() {
            caps.push(Capability::TalagrandWitness);
            caps.push(Capability::PositivityWitness);
        }
        if matches!(self.kind.table(), Table::Fin | Table::Z | Table::Harm | Table::DensityOwn(_)) {
            caps.push(Capability::PseudoUnion);
        }
        caps
    }

    /// The index set: Δ for ED_fin, the restricting set, or ω.
    pub fn domain(&self) -> Option<SetExpr> {
        match (&self.restriction, &self.kind) {
            (Some(y), _) => Some(y.clone()),
            (None, IdealKind::EdFin) => Some(SetExpr::Diag),
            _ => None,
        }
    }

    fn check_domain(&self, s: &SetExpr, h: u64) -> Result<bool> {
        let Some(dom) = self.domain() else { return Ok(true) };
        let outside = SetExpr::diff(s.clone(), dom.clone());
        let stray = match outside.window(h.max(1))?.first() {
            Some(&x) => Some(x),
            None if decide::is_empty(&outside) => return Ok(true),
            None => outside.periodic().and_then(|q| q.next(0)),
        };
        match stray {
            Some(x) => Err(Error::Domain(format!("{x} lies outside the index set {dom} of {self}"))),
            None => Ok(false),
        }
    }

    pub fn member(&self, s: &SetExpr) -> Result<Verdict> {
        self.member_at(s, DEFAULT_HORIZON)
    }

    /// Membership; `h` bounds the windows scanned for domain violations and
    /// is reported with undecided answers.
    pub fn member_at(&self, s: &SetExpr, h: u64) -> Result<Verdict> {
        s.validate()?;
        let inside = self.check_domain(s, h)?;
        let (answer, why) = decide::decide(&self.kind.table(), s);
        let mut v = Verdict::new(answer, h, why);
        if !inside && answer.is_decided() {
            v.answer = Answer::Unknown;
            v.evidence.push(format!("could not confirm {s} ⊆ {}", self.domain().unwrap()));
        }
        Ok(v)
    }

    /// `I ↾ Y`; `Y` must be positive.
    pub fn restrict(&self, y: &SetExpr) -> Result<IdealHandle> {
        let v = self.member(y)?;
        match v.answer {
            Answer::Out => {}
            Answer::In => return Err(Error::Precondition(format!("restriction to a small set: {y} ∈ {self}"))),
            Answer::Unknown => {
                return Err(Error::Precondition(format!("cannot confirm {y} is positive for {self}")));
            }
        }
        let restriction = match &self.restriction {
            Some(old) => SetExpr::inter(old.clone(), y.clone()),
            None => y.clone(),
        };
        Ok(IdealHandle { kind: self.kind.clone(), restriction: Some(restriction) })
    }

    /// A partition with the restricted-witness property on the handle's
    /// domain: every set containing infinitely many of its blocks is positive.
    pub fn positivity_partition(&self) -> Result<Partition> {
        let table = self.kind.table();
        let Some(y) = &self.restriction else {
            return self
                .kind
                .witness_partition()
                .ok_or_else(|| Error::Unsupported(format!("no positivity witness for {self}")));
        };
        let mut candidates = Vec::new();
        if let Some(terms) = decide::dnf(y) {
            for t in terms {
                for a in t.pos {
                    if let SetExpr::Blowup(_, p) = a {
                        if p.carrier().is_none() {
                            candidates.push(p);
                        }
                    }
                }
            }
        }
        candidates.extend(self.kind.witness_partition());
        for p in candidates {
            if witness_valid(&table, y, &p) {
                return p.on(y.clone());
            }
        }
        Err(Error::Unsupported(format!("no restricted positivity witness for {self}")))
    }
}

/// Fubini products of `Fin` and `{∅}`.
pub fn fubini(a: Factor, b: Factor) -> Result<IdealHandle> {
    let kind = match (a, b) {
        (Factor::Fin, Factor::Fin) => IdealKind::FinFin,
        (Factor::Fin, Factor::Empty) => IdealKind::FinEmpty,
        (Factor::Empty, Factor::Fin) => IdealKind::EmptyFin,
        (Factor::Empty, Factor::Empty) => {
            return Err(Error::Unsupported("{∅}⊗{∅} does not contain the finite sets".into()))
        }
    };
    Ok(IdealHandle::new(kind))
}

impl serde::Serialize for IdealHandle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_set;

    fn member(i: &str, s: &str) -> Answer {
        IdealHandle::parse(i).unwrap().member(&parse_set(s).unwrap()).unwrap().answer
    }

    #[test]
    fn member_examples() {
        assert_eq!(member("Z", "ap 0 1"), Answer::Out);
        assert_eq!(member("Z", "squares"), Answer::In);
        assert_eq!(member("I_1/n", "ap 1 2"), Answer::Out);
        assert_eq!(member("Fin⊗Fin", "col 3"), Answer::In);
        assert_eq!(member("ED_fin", "diag"), Answer::Out);
        assert_eq!(member("Fin⊗Fin", "union (col 0) (union (col 1) (col 2))"), Answer::In);
    }

    #[test]
    fn domain_errors() {
        let ed = IdealHandle::parse("ED_fin").unwrap();
        assert!(matches!(ed.member(&parse_set("col 0").unwrap()), Err(Error::Domain(_))));
        assert_eq!(ed.member(&parse_set("inter diag (col 4)").unwrap()).unwrap().answer, Answer::In);
    }

    #[test]
    fn restriction() {
        let z = IdealHandle::parse("restrict(Z, evens)").unwrap();
        assert_eq!(z.member(&parse_set("ap 0 4").unwrap()).unwrap().answer, Answer::Out);
        assert_eq!(z.member(&parse_set("inter squares evens").unwrap()).unwrap().answer, Answer::In);
        assert!(matches!(z.member(&parse_set("odds").unwrap()), Err(Error::Domain(_))));
        let f = IdealHandle::parse("restrict(Fin, evens)").unwrap();
        assert_eq!(f.member(&parse_set("fin {0,2}").unwrap()).unwrap().answer, Answer::In);
        let err = IdealHandle::parse("Z").unwrap().restrict(&parse_set("squares").unwrap());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn fubini_examples() {
        let fe = fubini(Factor::Fin, Factor::Empty).unwrap();
        assert_eq!(fe.member(&parse_set("col 3").unwrap()).unwrap().answer, Answer::In);
        let ef = IdealHandle::parse("fubini(∅, Fin)").unwrap();
        assert_eq!(ef.member(&SetExpr::Diag).unwrap().answer, Answer::In);
        assert!(fubini(Factor::Empty, Factor::Empty).is_err());
    }

    #[test]
    fn names_round_trip() {
        for n in ["Fin", "Z", "I_1/n", "summable[const 1/2]", "density[triangular]", "Farah", "W", "ED", "ED_fin",
            "Fin⊗Fin", "Fin⊗∅", "∅⊗Fin", "I0", "G_fc", "G_c", "Nwd", "Conv", "tr(N)", "Ran", "Solecki", "id[evens; col 0]"]
        {
            let h = IdealHandle::parse(n).unwrap();
            assert_eq!(IdealHandle::parse(&h.to_string()).unwrap(), h, "{n}");
        }
    }
}
