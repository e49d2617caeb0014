//! Finite partial functions ω → ω.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::natset::FnExpr;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionWindow {
    graph: BTreeMap<u64, u64>,
    injective: bool,
}

/// Total maps used to build windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapExpr {
    Fn(FnExpr),
    Const(u64),
}

impl MapExpr {
    pub fn apply(&self, n: u64) -> Result<u64> {
        match self {
            MapExpr::Fn(f) => f.apply(n),
            MapExpr::Const(c) => Ok(*c),
        }
    }

    /// `const c`, or any map of the set grammar.
    pub fn parse(src: &str) -> Result<MapExpr> {
        let t = src.trim();
        if let Some(rest) = t.strip_prefix("const") {
            let c = rest.trim().parse().map_err(|_| Error::parse(5, format!("bad constant in '{t}'")))?;
            return Ok(MapExpr::Const(c));
        }
        if t == "id" || t == "identity" {
            return Ok(MapExpr::Fn(FnExpr::Affine { a: 1, b: 0 }));
        }
        Ok(MapExpr::Fn(crate::parse::parse_fn(t)?))
    }
}

impl FunctionWindow {
    /// A window from argument/value pairs; an `injective` claim is checked.
    pub fn new(pairs: impl IntoIterator<Item = (u64, u64)>, injective: bool) -> Result<FunctionWindow> {
        let mut graph = BTreeMap::new();
        for (x, y) in pairs {
            if let Some(old) = graph.insert(x, y) {
                if old != y {
                    return Err(Error::Malformed(format!("two values {old} and {y} at {x}")));
                }
            }
        }
        let w = FunctionWindow { graph, injective };
        if injective && !w.values_distinct() {
            return Err(Error::Malformed("values repeat although the window is flagged injective".into()));
        }
        Ok(w)
    }

    /// `map` on `[0, h)`; the injective flag records what was observed.
    pub fn from_map(map: &MapExpr, h: u64) -> Result<FunctionWindow> {
        let pairs = (0..h).map(|n| map.apply(n).map(|v| (n, v))).collect::<Result<Vec<_>>>()?;
        let mut w = FunctionWindow::new(pairs, false)?;
        w.injective = w.values_distinct();
        Ok(w)
    }

    fn values_distinct(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.graph.values().all(|v| seen.insert(*v))
    }

    pub fn get(&self, x: u64) -> Option<u64> {
        self.graph.get(&x).copied()
    }

    pub fn require(&self, x: u64) -> Result<u64> {
        self.get(x).ok_or_else(|| Error::Precondition(format!("function undefined at {x}")))
    }

    pub fn injective(&self) -> bool {
        self.injective
    }

    /// Recomputed from the graph, independent of the flag.
    pub fn is_injective(&self) -> bool {
        self.values_distinct()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.graph.iter().map(|(&x, &y)| (x, y))
    }

    pub fn domain(&self) -> impl Iterator<Item = u64> + '_ {
        self.graph.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    /// Strictly increasing on its (sorted) domain.
    pub fn is_strictly_increasing(&self) -> bool {
        let vals: Vec<u64> = self.graph.values().copied().collect();
        vals.windows(2).all(|w| w[0] < w[1])
    }

    /// `h ∘ self`.
    pub fn compose_after(&self, h: impl Fn(u64) -> Result<u64>) -> Result<FunctionWindow> {
        let pairs = self.pairs().map(|(x, y)| h(y).map(|v| (x, v))).collect::<Result<Vec<_>>>()?;
        let mut w = FunctionWindow::new(pairs, false)?;
        w.injective = w.values_distinct();
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_valued_and_injective() {
        assert!(FunctionWindow::new([(0, 1), (0, 2)], false).is_err());
        assert!(FunctionWindow::new([(0, 1), (1, 1)], true).is_err());
        let c = FunctionWindow::from_map(&MapExpr::Const(0), 5).unwrap();
        assert!(!c.injective());
        let id = FunctionWindow::from_map(&MapExpr::parse("id").unwrap(), 5).unwrap();
        assert!(id.injective() && id.is_strictly_increasing());
    }
}
