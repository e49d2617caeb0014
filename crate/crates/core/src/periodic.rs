//! Eventually periodic subsets of ω: a finite head below a threshold and a
//! residue mask modulo a period from the threshold on.

use num_integer::Integer;
use num_rational::Ratio;

/// Periods above this are not tracked; callers fall back to the
/// non-periodic machinery.
pub const MAX_PERIOD: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Periodic {
    threshold: u64,
    head: Vec<u64>,
    period: u64,
    mask: Vec<bool>,
}

impl Periodic {
    /// Build from a membership predicate that is periodic with `period`
    /// from `threshold` on.
    pub fn from_fn(threshold: u64, period: u64, mut member: impl FnMut(u64) -> bool) -> Option<Periodic> {
        if period == 0 || period > MAX_PERIOD || threshold > 1 << 24 {
            return None;
        }
        let head = (0..threshold).filter(|&n| member(n)).collect();
        let mut mask = vec![false; period as usize];
        for m in threshold..threshold + period {
            mask[(m % period) as usize] = member(m);
        }
        Some(Periodic { threshold, head, period, mask }.normalized())
    }

    pub fn empty() -> Periodic {
        Periodic { threshold: 0, head: Vec::new(), period: 1, mask: vec![false] }
    }

    pub fn full() -> Periodic {
        Periodic { threshold: 0, head: Vec::new(), period: 1, mask: vec![true] }
    }

    pub fn finite(elems: &[u64]) -> Option<Periodic> {
        let max = elems.iter().max().copied();
        let threshold = max.map_or(0, |m| m + 1);
        if threshold > 1 << 24 {
            return None;
        }
        let mut head: Vec<u64> = elems.to_vec();
        head.sort_unstable();
        head.dedup();
        Some(Periodic { threshold, head, period: 1, mask: vec![false] })
    }

    pub fn progression(a: u64, d: u64) -> Option<Periodic> {
        if d == 0 || d > MAX_PERIOD || a > 1 << 24 {
            return None;
        }
        let mut mask = vec![false; d as usize];
        mask[(a % d) as usize] = true;
        Some(Periodic { threshold: a, head: Vec::new(), period: d, mask }.normalized())
    }

    fn normalized(mut self) -> Periodic {
        // shrink the period to the least one compatible with the mask
        let p = self.period as usize;
        for q in 1..=p {
            if p % q == 0 && (0..p).all(|r| self.mask[r] == self.mask[r % q]) {
                self.mask.truncate(q);
                self.period = q as u64;
                break;
            }
        }
        // pull the threshold down while the head agrees with the mask
        while self.threshold > 0 {
            let t = self.threshold - 1;
            let in_head = self.head.last() == Some(&t);
            if in_head != self.mask[(t % self.period) as usize] {
                break;
            }
            if in_head {
                self.head.pop();
            }
            self.threshold = t;
        }
        self
    }

    pub fn contains(&self, n: u64) -> bool {
        if n < self.threshold {
            self.head.binary_search(&n).is_ok()
        } else {
            self.mask[(n % self.period) as usize]
        }
    }

    /// Least `y` in `[lo, hi)` outside the set.
    pub fn first_missing(&self, lo: u64, hi: u64) -> Option<u64> {
        let mut run = 0;
        for x in lo..hi {
            if !self.contains(x) {
                return Some(x);
            }
            if x >= self.threshold {
                run += 1;
                if run == self.period {
                    return None;
                }
            }
        }
        None
    }

    /// Least member ≥ `x`, if any.
    pub fn next(&self, x: u64) -> Option<u64> {
        if x < self.threshold {
            let i = self.head.partition_point(|&e| e < x);
            if i < self.head.len() {
                return Some(self.head[i]);
            }
        }
        if self.is_finite() {
            return None;
        }
        let start = x.max(self.threshold);
        (start..start + self.period).find(|&m| self.mask[(m % self.period) as usize])
    }

    pub fn is_finite(&self) -> bool {
        self.mask.iter().all(|&b| !b)
    }

    pub fn is_cofinite(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// Largest member of a finite set.
    pub fn max(&self) -> Option<u64> {
        if self.is_finite() {
            self.head.last().copied()
        } else {
            None
        }
    }

    /// Asymptotic density: residues hit over the period.
    pub fn density(&self) -> Ratio<u64> {
        let hits = self.mask.iter().filter(|&&b| b).count() as u64;
        Ratio::new(hits, self.period)
    }

    fn combine(&self, other: &Periodic, op: impl Fn(bool, bool) -> bool) -> Option<Periodic> {
        let period = self.period.lcm(&other.period);
        let threshold = self.threshold.max(other.threshold);
        Periodic::from_fn(threshold, period, |n| op(self.contains(n), other.contains(n)))
    }

    pub fn union(&self, other: &Periodic) -> Option<Periodic> {
        self.combine(other, |a, b| a || b)
    }

    pub fn inter(&self, other: &Periodic) -> Option<Periodic> {
        self.combine(other, |a, b| a && b)
    }

    pub fn diff(&self, other: &Periodic) -> Option<Periodic> {
        self.combine(other, |a, b| a && !b)
    }

    /// `{a·n + b : n ∈ self}`.
    pub fn image_affine(&self, a: u64, b: u64) -> Option<Periodic> {
        let threshold = self.threshold.checked_mul(a)?.checked_add(b)?;
        let period = self.period.checked_mul(a)?;
        Periodic::from_fn(threshold, period, |m| m >= b && (m - b) % a == 0 && self.contains((m - b) / a))
    }

    /// `{⌊n/k⌋ : n ∈ self}`.
    pub fn image_div(&self, k: u64) -> Option<Periodic> {
        let threshold = self.threshold / k + 1;
        Periodic::from_fn(threshold, self.period, |m| (m * k..m * k + k).any(|n| self.contains(n)))
    }

    /// `{n : a·n + b ∈ self}`.
    pub fn preimage_affine(&self, a: u64, b: u64) -> Option<Periodic> {
        Periodic::from_fn(self.threshold, self.period, |m| self.contains(a * m + b))
    }

    /// `{n : ⌊n/k⌋ ∈ self}`.
    pub fn preimage_div(&self, k: u64) -> Option<Periodic> {
        let threshold = self.threshold.checked_mul(k)?;
        let period = self.period.checked_mul(k)?;
        Periodic::from_fn(threshold, period, |m| self.contains(m / k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_matches_pointwise() {
        let evens = Periodic::progression(0, 2).unwrap();
        let threes = Periodic::progression(1, 3).unwrap();
        let f = Periodic::finite(&[5, 7, 40]).unwrap();
        let u = evens.union(&threes).unwrap().diff(&f).unwrap();
        for n in 0..500 {
            let expect = (n % 2 == 0 || (n >= 1 && n % 3 == 1)) && ![5, 7, 40].contains(&n);
            assert_eq!(u.contains(n), expect, "{n}");
        }
        assert_eq!(u.density(), Ratio::new(2, 3));
    }

    #[test]
    fn images_and_preimages() {
        let odds = Periodic::progression(1, 2).unwrap();
        let img = odds.image_affine(3, 2).unwrap();
        for m in 0..300 {
            let expect = m >= 2 && (m - 2) % 3 == 0 && ((m - 2) / 3) % 2 == 1;
            assert_eq!(img.contains(m), expect);
        }
        let d = odds.image_div(2).unwrap();
        assert!(d.is_cofinite());
        let pre = odds.preimage_div(2).unwrap();
        for m in 0..100 {
            assert_eq!(pre.contains(m), (m / 2) % 2 == 1);
        }
        let pa = odds.preimage_affine(2, 1).unwrap();
        assert!(pa.is_cofinite());
    }

    #[test]
    fn next_and_finiteness() {
        let f = Periodic::finite(&[3, 9]).unwrap();
        assert!(f.is_finite());
        assert_eq!(f.next(4), Some(9));
        assert_eq!(f.next(10), None);
        assert_eq!(f.max(), Some(9));
        let ap = Periodic::progression(5, 4).unwrap();
        assert_eq!(ap.next(0), Some(5));
        assert_eq!(ap.next(6), Some(9));
    }
}
