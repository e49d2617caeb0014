//! Reduction maps on finite codes: the prime-power tree coding, range-clique
//! edge graphs, clopen sets to pair sets, and the finite rectangle search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::coding::{binary_decode, bits_to_string, parse_bits};
use crate::error::{Error, Result};

const MAX_PRIME_INDEX: u64 = 1 << 20;

/// The k-th prime with p₀ = 2.
pub fn nth_prime(k: u64) -> Result<u64> {
    if k > MAX_PRIME_INDEX {
        return Err(Error::Overflow(format!("prime index {k} above {MAX_PRIME_INDEX}")));
    }
    let mut found = 0u64;
    let mut n = 1u64;
    loop {
        n += 1;
        if is_prime(n) {
            if found == k {
                return Ok(n);
            }
            found += 1;
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prefix-closed finite set of finite sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeCode {
    pub nodes: BTreeSet<Vec<u64>>,
    /// Every node strictly increasing and each value has a ⊆-minimal node
    /// among those whose range contains it.
    pub in_tree_prime: bool,
}

impl TreeCode {
    pub fn new(nodes: BTreeSet<Vec<u64>>) -> Result<TreeCode> {
        for t in &nodes {
            if !t.is_empty() && !nodes.contains(&t[..t.len() - 1]) {
                return Err(Error::Malformed(format!("node {} has no parent in the tree", show(t))));
            }
        }
        let in_tree_prime = tree_prime(&nodes);
        Ok(TreeCode { nodes, in_tree_prime })
    }

    /// Closes the given nodes under prefixes.
    pub fn from_leaves<I: IntoIterator<Item = Vec<u64>>>(leaves: I) -> TreeCode {
        let mut nodes = BTreeSet::new();
        for t in leaves {
            for l in 0..=t.len() {
                nodes.insert(t[..l].to_vec());
            }
        }
        TreeCode::new(nodes).expect("prefix closure")
    }

    /// One node per line (or `;`-separated), comma-separated naturals; an
    /// empty line or `()` is the root. Prefixes are not added.
    pub fn parse(text: &str) -> Result<TreeCode> {
        TreeCode::new(parse_nodes(text)?.into_iter().collect())
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Nodes whose range contains `n` and none of whose proper prefixes do.
    pub fn minimal_nodes(&self, n: u64) -> Vec<Vec<u64>> {
        minimal_nodes(&self.nodes, n)
    }

    /// Values whose minimal node is not unique.
    pub fn ambiguous_values(&self) -> BTreeMap<u64, Vec<Vec<u64>>> {
        let values: BTreeSet<u64> = self.nodes.iter().flatten().copied().collect();
        values
            .into_iter()
            .filter_map(|v| {
                let m = self.minimal_nodes(v);
                (m.len() > 1).then_some((v, m))
            })
            .collect()
    }
}

impl fmt::Display for TreeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.nodes.iter().map(|t| t.iter().map(u64::to_string).collect::<Vec<_>>().join(",")).collect();
        write!(f, "{}", lines.join("\n"))
    }
}

/// The node list of the textual tree format.
pub fn parse_nodes(text: &str) -> Result<Vec<Vec<u64>>> {
    let mut nodes = Vec::new();
    for line in text.split(['\n', ';']) {
        let line = line.trim();
        let line = line.strip_prefix('(').and_then(|l| l.strip_suffix(')')).unwrap_or(line);
        let mut t = Vec::new();
        for part in line.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            t.push(part.parse::<u64>().map_err(|_| Error::Malformed(format!("'{part}' is not a natural")))?);
        }
        nodes.push(t);
    }
    Ok(nodes)
}

fn show(t: &[u64]) -> String {
    format!("({})", t.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
}

fn minimal_nodes(nodes: &BTreeSet<Vec<u64>>, n: u64) -> Vec<Vec<u64>> {
    nodes
        .iter()
        .filter(|t| t.contains(&n))
        .filter(|t| !(0..t.len()).any(|l| t[..l].contains(&n)))
        .cloned()
        .collect()
}

fn tree_prime(nodes: &BTreeSet<Vec<u64>>) -> bool {
    if !nodes.iter().all(|t| t.windows(2).all(|w| w[0] < w[1])) {
        return false;
    }
    let values: BTreeSet<u64> = nodes.iter().flatten().copied().collect();
    values.into_iter().all(|v| !minimal_nodes(nodes, v).is_empty())
}

/// `(p_{k0}, p_{k0}·p_{k1}², …, p_{k0}·p_{k1}²⋯p_{k(m-1)}^m)`.
pub fn j_node(t: &[u64]) -> Result<Vec<u64>> {
    let overflow = || Error::Overflow(format!("j of node {} leaves the u64 range", show(t)));
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 1u64;
    for (i, &k) in t.iter().enumerate() {
        let p = nth_prime(k).map_err(|_| overflow())?;
        let e = u32::try_from(i + 1).map_err(|_| overflow())?;
        let pe = p.checked_pow(e).ok_or_else(overflow)?;
        acc = acc.checked_mul(pe).ok_or_else(overflow)?;
        out.push(acc);
    }
    Ok(out)
}

pub fn j_tree(t: &TreeCode) -> Result<TreeCode> {
    let nodes = t.nodes.iter().map(|s| j_node(s)).collect::<Result<BTreeSet<_>>>()?;
    let image = TreeCode::new(nodes)?;
    if !image.in_tree_prime {
        return Err(Error::Verification("j image is not in Tree'".into()));
    }
    Ok(image)
}

/// Loop-free set of unordered pairs, stored as (low, high).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EdgeSet(pub BTreeSet<(u64, u64)>);

impl EdgeSet {
    pub fn insert(&mut self, a: u64, b: u64) -> Result<bool> {
        if a == b {
            return Err(Error::Domain(format!("loop at {a}")));
        }
        Ok(self.0.insert((a.min(b), a.max(b))))
    }

    pub fn contains(&self, a: u64, b: u64) -> bool {
        self.0.contains(&(a.min(b), a.max(b)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_clique(&self, xs: &BTreeSet<u64>) -> bool {
        let v: Vec<u64> = xs.iter().copied().collect();
        v.iter().enumerate().all(|(i, &a)| v[i + 1..].iter().all(|&b| self.contains(a, b)))
    }

    /// Largest clique among vertices carrying an edge, 0 without edges.
    pub fn max_clique(&self) -> usize {
        let mut adj: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for &(a, b) in &self.0 {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        fn grow(adj: &BTreeMap<u64, BTreeSet<u64>>, size: usize, cand: &BTreeSet<u64>) -> usize {
            let mut best = size;
            for &v in cand {
                let next: BTreeSet<u64> = cand.range(v + 1..).filter(|w| adj[&v].contains(w)).copied().collect();
                best = best.max(grow(adj, size + 1, &next));
            }
            best
        }
        grow(&adj, 0, &adj.keys().copied().collect())
    }
}

/// Union over nodes of all pairs from the node's range.
pub fn edge_graph(t: &TreeCode) -> EdgeSet {
    let mut e = EdgeSet::default();
    for node in &t.nodes {
        let r: BTreeSet<u64> = node.iter().copied().collect();
        let r: Vec<u64> = r.into_iter().collect();
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                e.0.insert((r[i], r[j]));
            }
        }
    }
    e
}

/// `([X]² ⊆ E_T, X ⊆ ran(t) for some node t)`.
pub fn clique_iff_node(t: &TreeCode, xs: &BTreeSet<u64>) -> Result<(bool, bool)> {
    if !t.in_tree_prime {
        return Err(Error::Precondition("tree is not certified in Tree'".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Precondition("X needs at least two elements".into()));
    }
    let clique = edge_graph(t).is_clique(xs);
    let node = t.nodes.iter().any(|n| xs.iter().all(|x| n.contains(x)));
    Ok((clique, node))
}

/// Union of depth-d cylinders; word w of length d is stored as its value
/// with the first letter most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClopenCode {
    pub depth: u32,
    pub words: BTreeSet<u64>,
}

const MAX_CLOPEN_DEPTH: u32 = 24;

impl ClopenCode {
    pub fn new(depth: u32, words: BTreeSet<u64>) -> Result<ClopenCode> {
        if depth > MAX_CLOPEN_DEPTH {
            return Err(Error::Unsupported(format!("clopen depth {depth} above {MAX_CLOPEN_DEPTH}")));
        }
        if let Some(&w) = words.iter().find(|&&w| w >> depth != 0) {
            return Err(Error::Malformed(format!("word {w} does not fit depth {depth}")));
        }
        Ok(ClopenCode { depth, words })
    }

    pub fn empty() -> ClopenCode {
        ClopenCode { depth: 0, words: BTreeSet::new() }
    }

    pub fn full() -> ClopenCode {
        ClopenCode { depth: 0, words: [0].into() }
    }

    pub fn cylinder(bits: &[bool]) -> Result<ClopenCode> {
        let depth = u32::try_from(bits.len()).map_err(|_| Error::Unsupported("cylinder too deep".into()))?;
        let w = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        ClopenCode::new(depth, [w].into())
    }

    /// `depth:mask` with the mask as a binary string of length 2^depth
    /// (bit w set iff word w is present), or a `|`-separated list of
    /// cylinder words of equal length. `empty` and `full` are accepted.
    pub fn parse(text: &str) -> Result<ClopenCode> {
        let text = text.trim();
        match text {
            "empty" => return Ok(ClopenCode::empty()),
            "full" => return Ok(ClopenCode::full()),
            _ => {}
        }
        if let Some((d, mask)) = text.split_once(':') {
            let depth: u32 = d.trim().parse().map_err(|_| Error::Malformed(format!("bad depth '{d}'")))?;
            if depth > MAX_CLOPEN_DEPTH {
                return Err(Error::Unsupported(format!("clopen depth {depth} above {MAX_CLOPEN_DEPTH}")));
            }
            let bits = parse_bits(mask.trim())?;
            if bits.len() as u64 != 1u64 << depth {
                return Err(Error::Malformed(format!("mask needs {} bits", 1u64 << depth)));
            }
            let words = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect();
            return ClopenCode::new(depth, words);
        }
        let parts: Vec<Vec<bool>> = text.split('|').map(|p| parse_bits(p.trim())).collect::<Result<_>>()?;
        let depth = parts[0].len();
        if parts.iter().any(|p| p.len() != depth) {
            return Err(Error::Malformed("cylinder words must share one length".into()));
        }
        let words = parts.iter().map(|p| p.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)).collect();
        ClopenCode::new(depth as u32, words)
    }

    pub fn measure(&self) -> BigRational {
        BigRational::new(BigInt::from(self.words.len()), BigInt::from(1u64 << self.depth))
    }

    fn word_bits(&self, w: u64) -> Vec<bool> {
        (0..self.depth).rev().map(|i| (w >> i) & 1 == 1).collect()
    }

    /// Whether the cylinder of `s` meets the set.
    pub fn meets(&self, s: &[bool]) -> bool {
        let d = self.depth as usize;
        self.words.iter().any(|&w| {
            let bits = self.word_bits(w);
            let l = d.min(s.len());
            bits[..l] == s[..l]
        })
    }

    /// Minimal list of cylinders with sibling pairs merged.
    pub fn cylinders(&self) -> Vec<String> {
        let mut level: BTreeSet<u64> = self.words.clone();
        let mut done: Vec<(u32, u64)> = Vec::new();
        let mut d = self.depth;
        while d > 0 {
            let mut up = BTreeSet::new();
            for &w in &level {
                if level.contains(&(w ^ 1)) {
                    up.insert(w >> 1);
                } else {
                    done.push((d, w));
                }
            }
            level = up;
            d -= 1;
        }
        done.extend(level.into_iter().map(|w| (0, w)));
        let mut out: Vec<String> = done
            .into_iter()
            .map(|(d, w)| {
                let s: String = (0..d).rev().map(|i| if (w >> i) & 1 == 1 { '1' } else { '0' }).collect();
                if s.is_empty() { "ε".to_string() } else { s }
            })
            .collect();
        out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        out
    }
}

impl fmt::Display for ClopenCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.cylinders();
        if c.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "{}", c.iter().map(|s| format!("[{s}]")).collect::<Vec<_>>().join(" ∪ "))
        }
    }
}

/// `{(m, n) : m, n < h, |s_m| > n, s_m(n) = 1, [s_m] ∩ C ≠ ∅}` with s_m the
/// length-lex enumeration of binary strings.
pub fn clopen_to_aset(c: &ClopenCode, h: u64) -> BTreeSet<(u64, u64)> {
    let mut out = BTreeSet::new();
    for m in 0..h {
        let s = binary_decode(m);
        if !c.meets(&s) {
            continue;
        }
        for (n, &b) in s.iter().enumerate() {
            if b && (n as u64) < h {
                out.insert((m, n as u64));
            }
        }
    }
    out
}

pub fn string_of(m: u64) -> String {
    bits_to_string(&binary_decode(m))
}

/// Smallest |X| and |Y| accepted by [`i0_search`].
pub const RAMSEY_FLOOR: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutcomeKind {
    /// X'×Y' disjoint from A.
    Disjoint,
    /// `{(x, y) ∈ X'×Y' : x < y} ⊆ A`.
    Up,
    /// `{(x, y) ∈ X'×Y' : x > y} ⊆ A`.
    Down,
    /// X'×Y' ⊆ A.
    Full,
}

impl OutcomeKind {
    pub fn label(self) -> &'static str {
        match self {
            OutcomeKind::Disjoint => "a",
            OutcomeKind::Up => "b",
            OutcomeKind::Down => "c",
            OutcomeKind::Full => "d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub label: &'static str,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    /// Alternating pairs (x_m, y_m) after normalization.
    pub alternating: Vec<(u64, u64)>,
    /// Indices of the monochromatic set used, empty when the whole
    /// rectangle decided the case.
    pub homogeneous: Vec<usize>,
    pub color: Option<(bool, bool)>,
}

/// Greedy x₀ < y₀ < x₁ < y₁ < … from X and Y; greedy leftmost picks give
/// the longest such chain.
pub fn alternate(xs: &BTreeSet<u64>, ys: &BTreeSet<u64>) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut floor = 0u64;
    let mut first = true;
    loop {
        let x = if first { xs.range(floor..).next() } else { xs.range(floor + 1..).next() };
        let Some(&x) = x else { break };
        let Some(&y) = ys.range(x + 1..).next() else { break };
        out.push((x, y));
        floor = y;
        first = false;
    }
    out
}

pub fn t_up(xs: &[u64], ys: &[u64]) -> Vec<(u64, u64)> {
    xs.iter().flat_map(|&x| ys.iter().filter(move |&&y| x < y).map(move |&y| (x, y))).collect()
}

pub fn t_down(xs: &[u64], ys: &[u64]) -> Vec<(u64, u64)> {
    xs.iter().flat_map(|&x| ys.iter().filter(move |&&y| x > y).map(move |&y| (x, y))).collect()
}

/// Finite rectangle search: the whole rectangle if it is already disjoint
/// or contained, else the largest monochromatic set of the pair coloring
/// on the alternating normal form, split alternately into X' and Y'.
pub fn i0_search(a: &BTreeSet<(u64, u64)>, xs: &BTreeSet<u64>, ys: &BTreeSet<u64>) -> Result<Outcome> {
    if xs.len() < RAMSEY_FLOOR || ys.len() < RAMSEY_FLOOR {
        return Err(Error::Precondition(format!("|X| and |Y| must be at least {RAMSEY_FLOOR}")));
    }
    let xv: Vec<u64> = xs.iter().copied().collect();
    let yv: Vec<u64> = ys.iter().copied().collect();
    let alt = alternate(xs, ys);
    let rect = |kind| Outcome {
        kind,
        label: OutcomeKind::label(kind),
        x: xv.clone(),
        y: yv.clone(),
        alternating: alt.clone(),
        homogeneous: vec![],
        color: None,
    };
    let pairs = || xv.iter().flat_map(|&x| yv.iter().map(move |&y| (x, y)));
    if pairs().all(|p| !a.contains(&p)) {
        return Ok(rect(OutcomeKind::Disjoint));
    }
    if pairs().all(|p| a.contains(&p)) {
        return Ok(rect(OutcomeKind::Full));
    }
    let out = if alt.len() < 2 {
        let (x, y) = match alt.first() {
            Some(&p) => p,
            None => (xv[0], yv[0]),
        };
        let kind = if a.contains(&(x, y)) { OutcomeKind::Full } else { OutcomeKind::Disjoint };
        Outcome {
            kind,
            label: kind.label(),
            x: vec![x],
            y: vec![y],
            alternating: alt.clone(),
            homogeneous: vec![],
            color: None,
        }
    } else {
        let color = |m: usize, n: usize| (a.contains(&(alt[m].0, alt[n].1)), a.contains(&(alt[n].0, alt[m].1)));
        let (set, c) = largest_monochromatic(alt.len(), color);
        let kind = match c {
            (false, false) => OutcomeKind::Disjoint,
            (true, false) => OutcomeKind::Up,
            (false, true) => OutcomeKind::Down,
            (true, true) => OutcomeKind::Full,
        };
        let x = set.iter().step_by(2).map(|&m| alt[m].0).collect();
        let y = set.iter().skip(1).step_by(2).map(|&m| alt[m].1).collect();
        Outcome { kind, label: kind.label(), x, y, alternating: alt.clone(), homogeneous: set, color: Some(c) }
    };
    verify_outcome(a, xs, ys, &out)?;
    Ok(out)
}

fn largest_monochromatic(l: usize, color: impl Fn(usize, usize) -> (bool, bool)) -> (Vec<usize>, (bool, bool)) {
    let mut best: (Vec<usize>, (bool, bool)) = (vec![0, 1], color(0, 1));
    for c in [(false, false), (true, true), (true, false), (false, true)] {
        let mut current = Vec::new();
        grow_mono(l, &color, c, 0, &mut current, &mut best);
    }
    best
}

fn grow_mono(
    l: usize,
    color: &impl Fn(usize, usize) -> (bool, bool),
    c: (bool, bool),
    from: usize,
    current: &mut Vec<usize>,
    best: &mut (Vec<usize>, (bool, bool)),
) {
    if current.len() > best.0.len() {
        *best = (current.clone(), c);
    }
    if current.len() + (l - from) <= best.0.len() {
        return;
    }
    for v in from..l {
        if current.iter().all(|&u| color(u, v) == c) {
            current.push(v);
            grow_mono(l, color, c, v + 1, current, best);
            current.pop();
        }
    }
}

/// Direct check of an outcome against its defining condition.
pub fn verify_outcome(a: &BTreeSet<(u64, u64)>, xs: &BTreeSet<u64>, ys: &BTreeSet<u64>, o: &Outcome) -> Result<()> {
    if o.x.is_empty() || o.y.is_empty() {
        return Err(Error::Verification("empty witness side".into()));
    }
    if !o.x.iter().all(|x| xs.contains(x)) || !o.y.iter().all(|y| ys.contains(y)) {
        return Err(Error::Verification("witness escapes X or Y".into()));
    }
    let ok = match o.kind {
        OutcomeKind::Disjoint => o.x.iter().all(|&x| o.y.iter().all(|&y| !a.contains(&(x, y)))),
        OutcomeKind::Full => o.x.iter().all(|&x| o.y.iter().all(|&y| a.contains(&(x, y)))),
        OutcomeKind::Up => t_up(&o.x, &o.y).iter().all(|p| a.contains(p)),
        OutcomeKind::Down => t_down(&o.x, &o.y).iter().all(|p| a.contains(p)),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Verification(format!("outcome ({}) fails its definition", o.label)))
    }
}
