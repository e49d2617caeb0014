//! The random graph realised as the BIT graph: `{m<n}` is an edge iff bit
//! `m` of `n` is set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomKind {
    Clique,
    Independent,
}

impl HomKind {
    pub fn name(self) -> &'static str {
        match self {
            HomKind::Clique => "clique",
            HomKind::Independent => "independent",
        }
    }
}

pub fn edge(m: u64, n: u64) -> bool {
    let (lo, hi) = if m < n { (m, n) } else { (n, m) };
    lo != hi && lo < 64 && (hi >> lo) & 1 == 1
}

/// A vertex outside `a ∪ b` adjacent to every element of `a` and to no
/// element of `b`.
pub fn witness(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> Result<u64> {
    if let Some(x) = a.intersection(b).next() {
        return Err(Error::Precondition(format!("{x} lies in both A and B")));
    }
    if a.iter().chain(b).any(|&x| x >= 63) {
        return Err(Error::Overflow("vertices of A and B must be below 63".into()));
    }
    let base: u64 = a.iter().map(|&x| 1u64 << x).sum();
    let mut n = base;
    if a.iter().chain(b).any(|&x| x >= n) {
        let t = a.iter().chain(b).max().map_or(0, |&m| m + 1);
        if t >= 63 {
            return Err(Error::Overflow("witness exceeds 64 bits".into()));
        }
        n = base + (1u64 << t);
    }
    verify_witness(a, b, n)?;
    Ok(n)
}

pub fn verify_witness(a: &BTreeSet<u64>, b: &BTreeSet<u64>, n: u64) -> Result<()> {
    if a.contains(&n) || b.contains(&n) {
        return Err(Error::Verification(format!("witness {n} is not outside A ∪ B")));
    }
    if let Some(x) = a.iter().find(|&&x| !edge(x, n)) {
        return Err(Error::Verification(format!("witness {n} is not joined to {x} ∈ A")));
    }
    if let Some(x) = b.iter().find(|&&x| edge(x, n)) {
        return Err(Error::Verification(format!("witness {n} is joined to {x} ∈ B")));
    }
    Ok(())
}

/// First pair of `set` violating homogeneity of the given kind.
pub fn homogeneity_violation(kind: HomKind, set: &[u64]) -> Option<(u64, u64)> {
    for (i, &x) in set.iter().enumerate() {
        for &y in &set[i + 1..] {
            if edge(x, y) != (kind == HomKind::Clique) {
                return Some((x.min(y), x.max(y)));
            }
        }
    }
    None
}

/// A homogeneous set of size `n`, built greedily.
///
/// Cliques start at 2 and add the sum of `2^k` over the elements so far, so
/// the new vertex has exactly the earlier ones among its bits:
/// `{2, 4, 20, 1048596}`. Independent sets take single-bit numbers `2^t`
/// with `t` outside the set and `2^t` above its maximum: `{1, 4, 8, 32}`.
pub fn homogeneous(kind: HomKind, n: usize) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::Precondition("homogeneous set size must be at least 1".into()));
    }
    let mut out: Vec<u64> = Vec::with_capacity(n);
    match kind {
        HomKind::Clique => {
            out.push(2);
            while out.len() < n {
                if out.iter().any(|&k| k >= 63) {
                    return Err(Error::Overflow(format!("clique of size {n} exceeds 64 bits")));
                }
                out.push(out.iter().map(|&k| 1u64 << k).sum());
            }
        }
        HomKind::Independent => {
            out.push(1);
            let mut t = 1u32;
            while out.len() < n {
                loop {
                    t += 1;
                    if t >= 64 {
                        return Err(Error::Overflow(format!("independent set of size {n} exceeds 64 bits")));
                    }
                    let v = 1u64 << t;
                    if v > *out.last().unwrap() && !out.contains(&(t as u64)) {
                        out.push(v);
                        break;
                    }
                }
            }
        }
    }
    if let Some((x, y)) = homogeneity_violation(kind, &out) {
        return Err(Error::Verification(format!("greedy {} broken at {{{x},{y}}}", kind.name())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_above_b() {
        let n = witness(&BTreeSet::new(), &BTreeSet::from([1])).unwrap();
        assert!(n > 1 && !edge(1, n));
    }

    #[test]
    fn edges() {
        assert!(edge(1, 2));
        assert!(!edge(0, 2));
        assert!(edge(2, 1));
    }

    #[test]
    fn witness_example() {
        let a: BTreeSet<u64> = [0, 1].into();
        let b: BTreeSet<u64> = [2].into();
        assert_eq!(witness(&a, &b).unwrap(), 3);
        assert!(witness(&a, &a).is_err());
    }

    #[test]
    fn homogeneous_sets() {
        assert_eq!(homogeneous(HomKind::Clique, 1).unwrap(), vec![2]);
        assert_eq!(homogeneous(HomKind::Clique, 4).unwrap(), vec![2, 4, 20, 1048596]);
        assert!(homogeneous(HomKind::Clique, 5).is_err());
        assert_eq!(homogeneous(HomKind::Independent, 4).unwrap(), vec![1, 4, 8, 32]);
        assert_eq!(homogeneity_violation(HomKind::Clique, &[2, 4, 16, 65536]), Some((2, 16)));
    }
}
