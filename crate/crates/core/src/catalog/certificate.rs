//! Membership in generated ideals by explicit cover certificates.

use std::collections::BTreeSet;
use std::fmt;

use crate::catalog::solecki::Clopen;
use crate::coding::parse_bits;
use crate::error::{Error, Result};
use crate::natset::SetExpr;
use crate::rado::{self, HomKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Homogeneous sets of the random graph.
    Ran,
    /// The sets `I_x = {A ∈ Ω : x ∈ A}`, given by finite prefixes of `x`.
    Solecki,
    /// Arbitrary sets, for `id(H)`.
    Sets,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Homogeneous { kind: HomKind, set: SetExpr },
    Point(String),
    Set(SetExpr),
}

/// Generators plus a finite exceptional set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Certificate {
    pub generators: Vec<Generator>,
    pub exceptional: BTreeSet<u64>,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Homogeneous { kind, set } => write!(f, "{} {set}", kind.name()),
            Generator::Point(bits) => write!(f, "point {bits}"),
            Generator::Set(s) => write!(f, "{s}"),
        }
    }
}

impl Generator {
    fn kind(&self) -> GeneratorKind {
        match self {
            Generator::Homogeneous { .. } => GeneratorKind::Ran,
            Generator::Point(_) => GeneratorKind::Solecki,
            Generator::Set(_) => GeneratorKind::Sets,
        }
    }

    /// Validity on the window below `h`, then the covered part of that window.
    fn covered(&self, h: u64) -> Result<Box<dyn Fn(u64) -> bool + '_>> {
        match self {
            Generator::Homogeneous { kind, set } => {
                let w = set.window(h)?;
                if let Some((a, b)) = rado::homogeneity_violation(*kind, &w) {
                    return Err(Error::Precondition(format!(
                        "generator {self} is not homogeneous: {{{a},{b}}} violates the {} condition",
                        kind.name()
                    )));
                }
                let w: BTreeSet<u64> = w.into_iter().collect();
                Ok(Box::new(move |x| w.contains(&x)))
            }
            Generator::Point(bits) => {
                let prefix = parse_bits(bits)?;
                Ok(Box::new(move |x| {
                    Clopen::decode(x).ok().and_then(|c| c.contains_prefix(&prefix)).unwrap_or(false)
                }))
            }
            Generator::Set(s) => {
                s.validate()?;
                let w: BTreeSet<u64> = s.window(h)?.into_iter().collect();
                Ok(Box::new(move |x| w.contains(&x)))
            }
        }
    }
}

/// Checks that `window(s, h)` minus the exceptional set is covered by the
/// generators' windows, after validating each generator on its window.
pub fn generated_member(kind: GeneratorKind, cert: &Certificate, s: &SetExpr, h: u64) -> Result<bool> {
    let mut covers = Vec::new();
    for g in &cert.generators {
        if g.kind() != kind {
            return Err(Error::Precondition(format!("generator {g} is not of the declared kind {kind:?}")));
        }
        covers.push(g.covered(h)?);
    }
    for x in s.window(h)? {
        if !cert.exceptional.contains(&x) && !covers.iter().any(|c| c(x)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_set;

    #[test]
    fn ran_certificates() {
        let clique = Generator::Homogeneous { kind: HomKind::Clique, set: SetExpr::fin(rado::homogeneous(HomKind::Clique, 4).unwrap()) };
        let cert = Certificate { generators: vec![clique], exceptional: BTreeSet::new() };
        assert!(generated_member(GeneratorKind::Ran, &cert, &SetExpr::fin([2, 4, 20]), 30).unwrap());
        let tower = Generator::Homogeneous { kind: HomKind::Clique, set: SetExpr::fin([2, 4, 16, 65536]) };
        let bad = Certificate { generators: vec![tower], exceptional: BTreeSet::new() };
        let err = generated_member(GeneratorKind::Ran, &bad, &SetExpr::fin([2, 4, 16]), 20).unwrap_err();
        assert!(err.to_string().contains("{2,16}"), "{err}");
        let empty = Certificate::default();
        assert!(!generated_member(GeneratorKind::Ran, &empty, &SetExpr::fin([0, 1]), 2).unwrap());
        let exc = Certificate { generators: vec![], exceptional: [0, 1].into() };
        assert!(generated_member(GeneratorKind::Ran, &exc, &SetExpr::fin([0, 1]), 2).unwrap());
    }

    #[test]
    fn set_certificates() {
        let cert = Certificate { generators: vec![Generator::Set(parse_set("evens").unwrap())], exceptional: [1].into() };
        let s = parse_set("union (ap 0 2) (fin {1})").unwrap();
        assert!(generated_member(GeneratorKind::Sets, &cert, &s, 50).unwrap());
        assert!(!generated_member(GeneratorKind::Sets, &cert, &parse_set("fin {3}").unwrap(), 50).unwrap());
        assert!(generated_member(GeneratorKind::Ran, &cert, &s, 50).is_err());
    }

    #[test]
    fn solecki_points() {
        // depth-1 elements are {0} (code 0) and {1} (code 1)
        let cert = Certificate { generators: vec![Generator::Point("0".into())], exceptional: BTreeSet::new() };
        assert!(generated_member(GeneratorKind::Solecki, &cert, &SetExpr::fin([0]), 10).unwrap());
        assert!(!generated_member(GeneratorKind::Solecki, &cert, &SetExpr::fin([1]), 10).unwrap());
        let two = Certificate { generators: vec![Generator::Point("0".into()), Generator::Point("1".into())], exceptional: BTreeSet::new() };
        assert!(generated_member(GeneratorKind::Solecki, &two, &SetExpr::fin([0, 1]), 10).unwrap());
    }
}
