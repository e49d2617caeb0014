//! Nonnegative rational weights with divergent sum, for summable ideals and
//! the greedy weight-≥1 partitions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Below this index partial sums are computed exactly.
const EXACT_LIMIT: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightFn {
    /// `n ↦ 1/(n+1)`.
    Harmonic,
    /// A positive constant.
    Const(BigRational),
    /// Tabulated values for the first indices, `1/(n+1)` afterwards.
    File { path: String, values: Vec<BigRational> },
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| Error::Malformed(format!("bad rational '{s}'")))?;
    let d: BigInt = d.trim().parse().map_err(|_| Error::Malformed(format!("bad rational '{s}'")))?;
    if d.is_zero() {
        return Err(Error::Malformed(format!("zero denominator in '{s}'")));
    }
    Ok(BigRational::new(n, d))
}

/// `p/q` rendering used in all reports.
pub fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn harmonic_number(n: u64) -> f64 {
    // H_n = Σ_{i=1}^{n} 1/i
    if n < 64 {
        return (1..=n).map(|i| 1.0 / i as f64).sum();
    }
    let x = n as f64;
    x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x) + 1.0 / (120.0 * x.powi(4))
}

impl WeightFn {
    pub fn load_file(path: &str) -> Result<WeightFn> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
        let values = text
            .split_whitespace()
            .filter(|t| !t.starts_with('#'))
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| v < &BigRational::zero()) {
            return Err(Error::Malformed(format!("{path}: negative weight")));
        }
        Ok(WeightFn::File { path: path.to_string(), values })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFn::Const(c) if c <= &BigRational::zero() => {
                Err(Error::Malformed("constant weight must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn at(&self, n: u64) -> BigRational {
        match self {
            WeightFn::Harmonic => ratio(1, n as i64 + 1),
            WeightFn::Const(c) => c.clone(),
            WeightFn::File { values, .. } => match values.get(n as usize) {
                Some(v) => v.clone(),
                None => ratio(1, n as i64 + 1),
            },
        }
    }

    pub fn at_f64(&self, n: u64) -> f64 {
        match self {
            WeightFn::Harmonic => 1.0 / (n as f64 + 1.0),
            _ => self.at(n).to_f64().unwrap_or(0.0),
        }
    }

    /// Exact `Σ_{n ∈ elems} h(n)`.
    pub fn sum_over(&self, elems: &[u64]) -> BigRational {
        elems.iter().fold(BigRational::zero(), |acc, &n| acc + self.at(n))
    }

    /// Exact `Σ_{lo ≤ n < hi} h(n)`.
    pub fn range_sum(&self, lo: u64, hi: u64) -> BigRational {
        match self {
            WeightFn::Const(c) => c * BigRational::from_integer(BigInt::from(hi.saturating_sub(lo))),
            _ => {
                if hi <= lo {
                    BigRational::zero()
                } else if hi - lo <= 16 {
                    (lo..hi).fold(BigRational::zero(), |acc, n| acc + self.at(n))
                } else {
                    // balanced summation keeps the denominators small
                    let mid = lo + (hi - lo) / 2;
                    self.range_sum(lo, mid) + self.range_sum(mid, hi)
                }
            }
        }
    }

    /// Floating estimate of `Σ_{lo ≤ n < hi} h(n)`.
    pub fn range_sum_f64(&self, lo: u64, hi: u64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self {
            WeightFn::Harmonic => harmonic_number(hi) - harmonic_number(lo),
            WeightFn::Const(c) => c.to_f64().unwrap_or(0.0) * (hi - lo) as f64,
            WeightFn::File { values, .. } => {
                let cut = (values.len() as u64).clamp(lo, hi);
                let head: f64 = (lo..cut).map(|n| self.at_f64(n)).sum();
                head + harmonic_number(hi) - harmonic_number(cut)
            }
        }
    }

    /// Least `e > b` with `Σ_{b ≤ n < e} h(n) ≥ 1`.
    pub fn next_boundary(&self, b: u64) -> Result<u64> {
        if let WeightFn::Const(c) = self {
            let one = BigRational::one();
            let width = (one / c).ceil().to_integer().to_u64().unwrap_or(u64::MAX).max(1);
            return b.checked_add(width).ok_or_else(|| Error::Overflow("weighted boundary".into()));
        }
        let needs_exact = match self {
            WeightFn::File { values, .. } => b < values.len() as u64 || b < EXACT_LIMIT,
            _ => b < EXACT_LIMIT,
        };
        if needs_exact {
            let one = BigRational::one();
            let mut acc = BigRational::zero();
            let mut e = b;
            while acc < one {
                acc += self.at(e);
                e += 1;
                if e - b > 1 << 22 {
                    return Err(Error::Domain("weight block does not close; weights too small".into()));
                }
            }
            return Ok(e);
        }
        // harmonic tail: e ≈ b·e¹, then adjust
        let mut e = ((b as f64) * std::f64::consts::E).floor() as u64;
        e = e.max(b + 1);
        while e > b + 1 && self.range_sum_f64(b, e - 1) >= 1.0 {
            e -= 1;
        }
        while self.range_sum_f64(b, e) < 1.0 {
            e += 1;
        }
        let s = self.range_sum_f64(b, e);
        if (s - 1.0).abs() < 1e-9 || (self.range_sum_f64(b, e - 1) - 1.0).abs() < 1e-9 {
            // near a tie: settle exactly
            let one = BigRational::one();
            let mut lo = e.saturating_sub(2).max(b + 1);
            while self.range_sum(b, lo) >= one {
                lo -= 1;
            }
            while self.range_sum(b, lo) < one {
                lo += 1;
            }
            return Ok(lo);
        }
        Ok(e)
    }

    /// Spot check of divergence: partial sums exceed `bound` before `limit`.
    pub fn exceeds_before(&self, bound: f64, limit: u64) -> bool {
        self.range_sum_f64(0, limit) > bound
    }

    /// Whether the weight is bounded below by a positive constant, making
    /// the summable ideal equal to Fin.
    pub fn is_bounded_below(&self) -> bool {
        matches!(self, WeightFn::Const(_))
    }
}

impl std::fmt::Display for WeightFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightFn::Harmonic => write!(f, "harmonic"),
            WeightFn::Const(c) => write!(f, "const {}", fmt_rational(c)),
            WeightFn::File { path, .. } => write!(f, "file {path}"),
        }
    }
}
