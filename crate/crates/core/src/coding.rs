//! Recursive bijections between ω and the structured index sets the ideal
//! catalog lives on: ω², [ω]², 2^<ω, ω^<ω, ℚ∩[0,1] and ℚ.
//!
//! * pairs use Cantor pairing `π(m,n) = (m+n)(m+n+1)/2 + n`;
//! * an unordered pair `{m<n}` is coded as `π(m, n-m-1)`;
//! * binary strings are length-lex: `2^|s| - 1 + value(s)`;
//! * natural sequences: `() ↦ 0`, otherwise `1 + π(|s|-1, tuple(s))` with
//!   right-nested Cantor tupling;
//! * `ℚ∩[0,1]` is enumerated `0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, ...`;
//! * `ℚ` interleaves `0`, the Calkin–Wilf index of positives (odd codes) and
//!   of negatives (even codes).

use num_integer::{Integer, Roots};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coding {
    Pair,
    UnorderedPair,
    BinarySeq,
    NatSeq,
    RationalUnit,
    Rational,
}

impl Coding {
    pub const ALL: [Coding; 6] = [
        Coding::Pair,
        Coding::UnorderedPair,
        Coding::BinarySeq,
        Coding::NatSeq,
        Coding::RationalUnit,
        Coding::Rational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Coding::Pair => "pair",
            Coding::UnorderedPair => "unordered-pair",
            Coding::BinarySeq => "binary-seq",
            Coding::NatSeq => "nat-seq",
            Coding::RationalUnit => "rational-unit",
            Coding::Rational => "rational",
        }
    }

    pub fn from_name(s: &str) -> Option<Coding> {
        Coding::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// An element of one of the coded index sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CodedObject {
    Pair { first: u64, second: u64 },
    UnorderedPair { low: u64, high: u64 },
    BinarySeq { bits: String },
    NatSeq { terms: Vec<u64> },
    /// `num/den`, required in lowest terms with `den > 0`.
    Rational { num: i64, den: u64 },
}

impl std::fmt::Display for CodedObject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodedObject::Pair { first, second } => write!(f, "({first},{second})"),
            CodedObject::UnorderedPair { low, high } => write!(f, "{{{low},{high}}}"),
            CodedObject::BinarySeq { bits } => write!(f, "\"{bits}\""),
            CodedObject::NatSeq { terms } => {
                let parts: Vec<String> = terms.iter().map(u64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
            CodedObject::Rational { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

fn overflow(what: &str) -> Error {
    Error::Overflow(format!("{what} does not fit in 64 bits"))
}

/// Cantor pairing.
pub fn pair(m: u64, n: u64) -> Result<u64> {
    let s = (m as u128) + (n as u128);
    let v = s * (s + 1) / 2 + n as u128;
    u64::try_from(v).map_err(|_| overflow("pair code"))
}

/// Inverse of [`pair`].
pub fn unpair(z: u64) -> (u64, u64) {
    let z = z as u128;
    let mut w = ((8 * z + 1).sqrt() - 1) / 2;
    // guard against rounding at the boundary
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let n = z - w * (w + 1) / 2;
    let m = w - n;
    (m as u64, n as u64)
}

pub fn unordered_pair(low: u64, high: u64) -> Result<u64> {
    if low >= high {
        return Err(Error::Malformed(format!("unordered pair needs low < high, got {{{low},{high}}}")));
    }
    pair(low, high - low - 1)
}

pub fn unordered_unpair(z: u64) -> Result<(u64, u64)> {
    let (m, d) = unpair(z);
    let high = m
        .checked_add(d)
        .and_then(|v| v.checked_add(1))
        .ok_or_else(|| overflow("unordered pair"))?;
    Ok((m, high))
}

/// Length-lex code of a binary string given as bits.
pub fn binary_code(bits: &[bool]) -> Result<u64> {
    if bits.len() >= 63 {
        return Err(overflow("binary string code"));
    }
    let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    Ok((1u64 << bits.len()) - 1 + value)
}

pub fn binary_decode(code: u64) -> Vec<bool> {
    let c = code as u128 + 1;
    let len = 127 - c.leading_zeros() as usize;
    let value = c - (1u128 << len);
    (0..len).rev().map(|i| (value >> i) & 1 == 1).collect()
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Malformed(format!("'{other}' is not a binary digit"))),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn tuple(terms: &[u64]) -> Result<u64> {
    match terms {
        [] => Ok(0),
        [a] => Ok(*a),
        [a, rest @ ..] => pair(*a, tuple(rest)?),
    }
}

fn untuple(mut code: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 1..len {
        let (a, rest) = unpair(code);
        out.push(a);
        code = rest;
    }
    if len > 0 {
        out.push(code);
    }
    out
}

pub fn nat_seq_code(terms: &[u64]) -> Result<u64> {
    if terms.is_empty() {
        return Ok(0);
    }
    let len = terms.len() as u64 - 1;
    pair(len, tuple(terms)?)?
        .checked_add(1)
        .ok_or_else(|| overflow("sequence code"))
}

pub fn nat_seq_decode(code: u64) -> Vec<u64> {
    if code == 0 {
        return Vec::new();
    }
    let (len, t) = unpair(code - 1);
    untuple(t, len as usize + 1)
}

fn totient(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

fn check_reduced(num: i64, den: u64) -> Result<()> {
    if den == 0 {
        return Err(Error::Malformed("zero denominator".into()));
    }
    if num.unsigned_abs().gcd(&den) != 1 {
        return Err(Error::Malformed(format!("{num}/{den} is not in lowest terms")));
    }
    Ok(())
}

pub fn rational_unit_code(num: i64, den: u64) -> Result<u64> {
    check_reduced(num, den)?;
    if num < 0 || num as u64 > den {
        return Err(Error::Malformed(format!("{num}/{den} is outside [0,1]")));
    }
    let p = num as u64;
    if den == 1 {
        return Ok(p);
    }
    let mut idx: u64 = 2;
    for d in 2..den {
        idx += totient(d);
    }
    idx += (1..p).filter(|k| k.gcd(&den) == 1).count() as u64;
    Ok(idx)
}

pub fn rational_unit_decode(code: u64) -> (i64, u64) {
    if code < 2 {
        return (code as i64, 1);
    }
    let mut rest = code - 2;
    let mut den = 2;
    loop {
        let t = totient(den);
        if rest < t {
            let num = (1..den).filter(|k| k.gcd(&den) == 1).nth(rest as usize).unwrap();
            return (num as i64, den);
        }
        rest -= t;
        den += 1;
    }
}

/// Calkin–Wilf index (≥ 1) of a positive reduced fraction.
fn calkin_wilf_index(mut a: u64, mut b: u64) -> Result<u64> {
    // runs of path bits, collected leaf to root
    let mut runs: Vec<(bool, u64)> = Vec::new();
    while a != b {
        if a < b {
            let k = (b - 1) / a;
            b -= k * a;
            runs.push((false, k));
        } else {
            let k = (a - 1) / b;
            a -= k * b;
            runs.push((true, k));
        }
    }
    let mut idx: u64 = 1;
    for &(bit, k) in runs.iter().rev() {
        for _ in 0..k {
            idx = idx
                .checked_mul(2)
                .and_then(|v| v.checked_add(bit as u64))
                .ok_or_else(|| overflow("Calkin-Wilf index"))?;
        }
    }
    Ok(idx)
}

fn calkin_wilf_fraction(idx: u64) -> (u64, u64) {
    let len = 63 - idx.leading_zeros();
    let (mut a, mut b) = (1u64, 1u64);
    for i in (0..len).rev() {
        if (idx >> i) & 1 == 1 {
            a += b;
        } else {
            b += a;
        }
    }
    (a, b)
}

pub fn rational_code(num: i64, den: u64) -> Result<u64> {
    check_reduced(num, den)?;
    if num == 0 {
        return Ok(0);
    }
    let cw = calkin_wilf_index(num.unsigned_abs(), den)?;
    let code = if num > 0 { cw.checked_mul(2).map(|v| v - 1) } else { cw.checked_mul(2) };
    code.ok_or_else(|| overflow("rational code"))
}

pub fn rational_decode(code: u64) -> (i64, u64) {
    if code == 0 {
        return (0, 1);
    }
    let (cw, sign) = if code % 2 == 1 { ((code + 1) / 2, 1) } else { (code / 2, -1) };
    let (a, b) = calkin_wilf_fraction(cw);
    (sign * a as i64, b)
}

/// Encode `object` under `coding`; the object's kind must match.
pub fn encode(coding: Coding, object: &CodedObject) -> Result<u64> {
    match (coding, object) {
        (Coding::Pair, CodedObject::Pair { first, second }) => pair(*first, *second),
        (Coding::UnorderedPair, CodedObject::UnorderedPair { low, high }) => unordered_pair(*low, *high),
        (Coding::BinarySeq, CodedObject::BinarySeq { bits }) => binary_code(&parse_bits(bits)?),
        (Coding::NatSeq, CodedObject::NatSeq { terms }) => nat_seq_code(terms),
        (Coding::RationalUnit, CodedObject::Rational { num, den }) => rational_unit_code(*num, *den),
        (Coding::Rational, CodedObject::Rational { num, den }) => rational_code(*num, *den),
        (c, o) => Err(Error::Malformed(format!("{o} is not an object of the {} coding", c.name()))),
    }
}

pub fn decode(coding: Coding, code: u64) -> Result<CodedObject> {
    Ok(match coding {
        Coding::Pair => {
            let (first, second) = unpair(code);
            CodedObject::Pair { first, second }
        }
        Coding::UnorderedPair => {
            let (low, high) = unordered_unpair(code)?;
            CodedObject::UnorderedPair { low, high }
        }
        Coding::BinarySeq => CodedObject::BinarySeq { bits: bits_to_string(&binary_decode(code)) },
        Coding::NatSeq => CodedObject::NatSeq { terms: nat_seq_decode(code) },
        Coding::RationalUnit => {
            let (num, den) = rational_unit_decode(code);
            CodedObject::Rational { num, den }
        }
        Coding::Rational => {
            let (num, den) = rational_decode(code);
            CodedObject::Rational { num, den }
        }
    })
}

/// Parse the textual object syntax used by the CLI: `(1,2)`, `{1,3}`,
/// `101` (binary), `(1,0,4)` (sequence), `2/3`.
pub fn parse_object(coding: Coding, text: &str) -> Result<CodedObject> {
    let t = text.trim();
    let nums = |inner: &str| -> Result<Vec<u64>> {
        inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u64>().map_err(|_| Error::Malformed(format!("'{s}' is not a natural"))))
            .collect()
    };
    let strip = |open: char, close: char| -> Result<&str> {
        t.strip_prefix(open)
            .and_then(|s| s.strip_suffix(close))
            .ok_or_else(|| Error::Malformed(format!("expected {open}...{close}, got '{t}'")))
    };
    match coding {
        Coding::Pair => match nums(strip('(', ')')?)?.as_slice() {
            [a, b] => Ok(CodedObject::Pair { first: *a, second: *b }),
            _ => Err(Error::Malformed(format!("'{t}' is not a pair"))),
        },
        Coding::UnorderedPair => match nums(strip('{', '}')?)?.as_slice() {
            [a, b] => Ok(CodedObject::UnorderedPair { low: *a.min(b), high: *a.max(b) }),
            _ => Err(Error::Malformed(format!("'{t}' is not an unordered pair"))),
        },
        Coding::BinarySeq => {
            let bits = t.trim_matches('"');
            parse_bits(bits)?;
            Ok(CodedObject::BinarySeq { bits: bits.to_string() })
        }
        Coding::NatSeq => Ok(CodedObject::NatSeq { terms: nums(strip('(', ')')?)? }),
        Coding::RationalUnit | Coding::Rational => {
            let (n, d) = t.split_once('/').unwrap_or((t, "1"));
            let num = n.trim().parse::<i64>().map_err(|_| Error::Malformed(format!("bad numerator in '{t}'")))?;
            let den = d.trim().parse::<u64>().map_err(|_| Error::Malformed(format!("bad denominator in '{t}'")))?;
            Ok(CodedObject::Rational { num, den })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_examples() {
        assert_eq!(pair(0, 0).unwrap(), 0);
        assert_eq!(pair(1, 2).unwrap(), 8);
        assert_eq!(unpair(8), (1, 2));
    }

    #[test]
    fn binary_examples() {
        assert_eq!(binary_code(&parse_bits("101").unwrap()).unwrap(), 12);
        assert_eq!(binary_code(&[]).unwrap(), 0);
        assert_eq!(bits_to_string(&binary_decode(26)), "1011");
    }

    #[test]
    fn rational_unit_order() {
        let first: Vec<(i64, u64)> = (0..7).map(rational_unit_decode).collect();
        assert_eq!(first, vec![(0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)]);
    }

    #[test]
    fn non_reduced_rational_rejected() {
        assert!(matches!(rational_unit_code(2, 4), Err(Error::Malformed(_))));
        assert!(matches!(rational_code(-3, 6), Err(Error::Malformed(_))));
        assert!(matches!(rational_code(1, 0), Err(Error::Malformed(_))));
    }

    #[test]
    fn unordered_pair_requires_order() {
        assert!(unordered_pair(3, 3).is_err());
        assert_eq!(unordered_unpair(unordered_pair(2, 7).unwrap()).unwrap(), (2, 7));
    }

    #[test]
    fn roundtrip_naturals_below_1000() {
        for coding in Coding::ALL {
            for z in 0..1000 {
                let obj = decode(coding, z).unwrap();
                assert_eq!(encode(coding, &obj).unwrap(), z, "{coding:?} {obj}");
            }
        }
    }

    #[test]
    fn roundtrip_small_objects() {
        for m in 0..=12 {
            for n in 0..=12 {
                let o = CodedObject::Pair { first: m, second: n };
                assert_eq!(decode(Coding::Pair, encode(Coding::Pair, &o).unwrap()).unwrap(), o);
                if m < n {
                    let o = CodedObject::UnorderedPair { low: m, high: n };
                    let c = encode(Coding::UnorderedPair, &o).unwrap();
                    assert_eq!(decode(Coding::UnorderedPair, c).unwrap(), o);
                }
            }
        }
        for len in 0..=12usize {
            for v in 0..(1u64 << len) {
                let bits: String = (0..len).rev().map(|i| if (v >> i) & 1 == 1 { '1' } else { '0' }).collect();
                let o = CodedObject::BinarySeq { bits };
                let c = encode(Coding::BinarySeq, &o).unwrap();
                assert_eq!(decode(Coding::BinarySeq, c).unwrap(), o);
            }
        }
        // sequences over {0..3} of length ≤ 5 and all reduced fractions with denominator ≤ 12
        fn seqs(len: usize) -> Vec<Vec<u64>> {
            if len == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for s in seqs(len - 1) {
                for a in 0..4 {
                    let mut t = s.clone();
                    t.push(a);
                    out.push(t);
                }
            }
            out
        }
        for len in 0..=5 {
            for terms in seqs(len) {
                let o = CodedObject::NatSeq { terms };
                let c = encode(Coding::NatSeq, &o).unwrap();
                assert_eq!(decode(Coding::NatSeq, c).unwrap(), o);
            }
        }
        for den in 1..=12u64 {
            for num in -12i64..=12 {
                if num.unsigned_abs().gcd(&den) != 1 {
                    continue;
                }
                let o = CodedObject::Rational { num, den };
                let c = encode(Coding::Rational, &o).unwrap();
                assert_eq!(decode(Coding::Rational, c).unwrap(), o);
                if (0..=den as i64).contains(&num) {
                    let c = encode(Coding::RationalUnit, &o).unwrap();
                    assert_eq!(decode(Coding::RationalUnit, c).unwrap(), o);
                }
            }
        }
    }

    #[test]
    fn object_syntax() {
        assert_eq!(
            parse_object(Coding::Pair, "(1, 2)").unwrap(),
            CodedObject::Pair { first: 1, second: 2 }
        );
        assert_eq!(
            parse_object(Coding::RationalUnit, "2/3").unwrap(),
            CodedObject::Rational { num: 2, den: 3 }
        );
        assert!(parse_object(Coding::BinarySeq, "102").is_err());
    }
}
