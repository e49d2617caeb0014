//! Finite shadows of the defining quantities of each ideal.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::catalog::{IdealHandle, IdealKind};
use crate::coding::{self, binary_decode, rational_decode, rational_unit_decode, unordered_unpair};
use crate::error::{Error, Result};
use crate::natset::SetExpr;
use crate::rado;
use crate::weight::{fmt_rational, ratio};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StatValue {
    Count(u64),
    Exact(String),
    Profile(Vec<(u64, String)>),
    Missing(Option<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub ideal: String,
    pub set: String,
    pub horizon: u64,
    pub count: u64,
    pub stats: BTreeMap<String, StatValue>,
}

impl Diagnostics {
    pub fn get(&self, name: &str) -> Option<&StatValue> {
        self.stats.get(name)
    }

    pub fn count_stat(&self, name: &str) -> Option<u64> {
        match self.stats.get(name) {
            Some(StatValue::Count(n)) => Some(*n),
            _ => None,
        }
    }
}

/// Vertices of largest brute-force colouring and clique searches.
const GRAPH_LIMIT: usize = 40;

pub fn diagnostics(i: &IdealHandle, s: &SetExpr, h: u64) -> Result<Diagnostics> {
    if h == 0 {
        return Err(Error::Precondition("diagnostics need a horizon h ≥ 1".into()));
    }
    s.validate()?;
    i.member_at(s, h)?;
    let graph = matches!(i.kind(), IdealKind::Gfc | IdealKind::Gc);
    let window = if graph { edge_window(s, h)? } else { s.window(h)? };
    let mut stats = BTreeMap::new();
    let mut put = |k: &str, v: StatValue| {
        stats.insert(k.to_string(), v);
    };
    match i.kind() {
        IdealKind::Summable(w) => put("partial_sum", StatValue::Exact(fmt_rational(&w.sum_over(&window)))),
        IdealKind::Z => put("density_profile", StatValue::Profile(density_profile(i, &window, h)?)),
        IdealKind::Density(p) => {
            let mut profile = Vec::new();
            let mut k = 0;
            while let Some((_, hi)) = p.block_span(k)? {
                if hi > h {
                    break;
                }
                let block = p.block(k)?;
                let hits = block.iter().filter(|x| window.binary_search(x).is_ok()).count();
                profile.push((k, fmt_rational(&ratio(hits as i64, block.len().max(1) as i64))));
                k += 1;
            }
            put("block_measures", StatValue::Profile(profile));
        }
        IdealKind::Farah => put("farah_sum", StatValue::Exact(fmt_rational(&farah_sum(&window)))),
        IdealKind::W => put("longest_ap", StatValue::Count(longest_ap(&window))),
        IdealKind::Ed | IdealKind::EdFin | IdealKind::FinFin | IdealKind::FinEmpty | IdealKind::EmptyFin | IdealKind::I0 => {
            let cols = column_sizes(&window);
            put("max_column", StatValue::Count(cols.values().copied().max().unwrap_or(0)));
            put("nonempty_columns", StatValue::Count(cols.len() as u64));
            put("column_sizes", StatValue::Profile(cols.into_iter().map(|(n, c)| (n, c.to_string())).collect()));
        }
        IdealKind::Gfc | IdealKind::Gc => {
            let edges = decode_edges(&window)?;
            let g = Graph::new(&edges);
            put("edges", StatValue::Count(edges.len() as u64));
            put("vertices", StatValue::Count(g.n() as u64));
            let small = g.n() <= GRAPH_LIMIT;
            put("largest_clique", StatValue::Missing(small.then(|| g.clique_number())));
            put("chromatic_number", StatValue::Missing(small.then(|| g.chromatic_number())));
        }
        IdealKind::Conv => {
            let pts: Vec<(i64, u64)> = window.iter().map(|&x| rational_unit_decode(x)).collect();
            let mut profile = Vec::new();
            for j in [3u32, 6, 9] {
                profile.push((1u64 << j, clusters(&pts, j).to_string()));
            }
            put("clusters_by_inverse_eps", StatValue::Profile(profile));
        }
        IdealKind::Nwd => {
            let pts: Vec<(i64, u64)> = window.iter().map(|&x| rational_decode(x)).collect();
            put("interval_coverage", StatValue::Profile(interval_coverage(&pts)));
        }
        IdealKind::TrN => {
            let mass = window.iter().fold(BigRational::zero(), |acc, &x| {
                acc + BigRational::new(1.into(), num_bigint::BigInt::one() << binary_decode(x).len())
            });
            put("cylinder_mass", StatValue::Exact(fmt_rational(&mass)));
        }
        IdealKind::Ran => {
            let small = window.len() <= GRAPH_LIMIT;
            let edges: Vec<(usize, usize)> = pairs_where(&window, rado::edge);
            let non: Vec<(usize, usize)> = pairs_where(&window, |a, b| !rado::edge(a, b));
            put("largest_clique", StatValue::Missing(small.then(|| Graph::on(window.len(), &edges).clique_number())));
            put("largest_independent", StatValue::Missing(small.then(|| Graph::on(window.len(), &non).clique_number())));
        }
        IdealKind::Fin | IdealKind::Solecki | IdealKind::Generated(_) => {}
    }
    if i.restriction().is_some() && !matches!(i.kind(), IdealKind::Z) {
        put("relative_density_profile", StatValue::Profile(density_profile(i, &window, h)?));
    }
    Ok(Diagnostics { ideal: i.to_string(), set: s.to_string(), horizon: h, count: window.len() as u64, stats })
}

fn pairs_where(w: &[u64], f: impl Fn(u64, u64) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if f(w[i], w[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// `|A ∩ n| / |Y ∩ n|` at powers of two and at `h`; `Y` is the domain.
fn density_profile(i: &IdealHandle, window: &[u64], h: u64) -> Result<Vec<(u64, String)>> {
    let dom = i.restriction().map(|y| y.window(h)).transpose()?;
    let mut points: Vec<u64> = std::iter::successors(Some(1u64), |&n| n.checked_mul(2)).take_while(|&n| n < h).collect();
    points.push(h);
    let mut out = Vec::new();
    for n in points {
        let a = window.partition_point(|&x| x < n) as i64;
        let base = match &dom {
            Some(y) => y.partition_point(|&x| x < n) as i64,
            None => n as i64,
        };
        if base > 0 {
            out.push((n, fmt_rational(&ratio(a, base))));
        }
    }
    Ok(out)
}

/// `Σ_{n≥1} min{n, |A ∩ [2^n, 2^{n+1})|} / n²` over complete blocks.
pub fn farah_sum(window: &[u64]) -> BigRational {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for &x in window {
        if x >= 2 {
            *counts.entry(63 - x.leading_zeros()).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(n, c)| ratio(c.min(n as u64) as i64, (n as i64) * (n as i64)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Length of the longest arithmetic progression inside a sorted window.
pub fn longest_ap(window: &[u64]) -> u64 {
    let set: BTreeSet<u64> = window.iter().copied().collect();
    let max = match window.last() {
        Some(&m) => m,
        None => return 0,
    };
    let mut best = window.len().min(1) as u64;
    for (i, &a) in window.iter().enumerate() {
        for &b in &window[i + 1..] {
            let d = b - a;
            // only start at the first term of a progression
            if a >= d && set.contains(&(a - d)) {
                continue;
            }
            if a + d * best > max {
                break;
            }
            let mut len = 2;
            let mut x = b;
            while let Some(next) = x.checked_add(d) {
                if !set.contains(&next) {
                    break;
                }
                x = next;
                len += 1;
            }
            best = best.max(len);
        }
    }
    best
}

fn column_sizes(window: &[u64]) -> BTreeMap<u64, u64> {
    let mut cols = BTreeMap::new();
    for &x in window {
        *cols.entry(coding::unpair(x).0).or_default() += 1;
    }
    cols
}

/// Codes of edges with both ends below `h`.
fn edge_window(s: &SetExpr, h: u64) -> Result<Vec<u64>> {
    let top = if h < 2 { 0 } else { coding::unordered_pair(0, h - 1)?.max(coding::unordered_pair(h - 2, h - 1)?) + 1 };
    let mut out = Vec::new();
    for x in s.window(top)? {
        let (a, b) = unordered_unpair(x)?;
        if a < h && b < h {
            out.push(x);
        }
    }
    Ok(out)
}

fn decode_edges(window: &[u64]) -> Result<Vec<(u64, u64)>> {
    window.iter().map(|&x| unordered_unpair(x)).collect()
}

/// Clusters of the points at scale `2^{-j}`: maximal runs with gaps below it.
fn clusters(pts: &[(i64, u64)], j: u32) -> u64 {
    let mut xs: Vec<f64> = pts.iter().map(|&(p, q)| p as f64 / q as f64).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    let eps = 1.0 / (1u64 << j) as f64;
    let mut n = 0;
    for (i, x) in xs.iter().enumerate() {
        if i == 0 || x - xs[i - 1] >= eps {
            n += 1;
        }
    }
    n
}

/// For levels `j ≤ 8`: how many of the `2^j` dyadic intervals of `[0,1)`
/// contain a point.
fn interval_coverage(pts: &[(i64, u64)]) -> Vec<(u64, String)> {
    (1..=8u32)
        .map(|j| {
            let cells: BTreeSet<i64> = pts
                .iter()
                .filter(|&&(p, q)| p >= 0 && (p as u64) < q)
                .map(|&(p, q)| ((p as i128) << j).div_euclid(q as i128) as i64)
                .collect();
            (j as u64, format!("{}/{}", cells.len(), 1u64 << j))
        })
        .collect()
}

struct Graph {
    adj: Vec<u64>,
}

impl Graph {
    fn new(edges: &[(u64, u64)]) -> Graph {
        let verts: BTreeSet<u64> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        let index: BTreeMap<u64, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let e: Vec<(usize, usize)> = edges.iter().map(|(a, b)| (index[a], index[b])).collect();
        Graph::on(verts.len(), &e)
    }

    fn on(n: usize, edges: &[(usize, usize)]) -> Graph {
        let mut adj = vec![0u64; n];
        for &(a, b) in edges {
            if n <= 64 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        Graph { adj }
    }

    fn n(&self) -> usize {
        self.adj.len()
    }

    fn clique_number(&self) -> u64 {
        fn grow(adj: &[u64], cand: u64, size: u64, best: &mut u64) {
            if cand == 0 {
                *best = (*best).max(size);
                return;
            }
            if size + cand.count_ones() as u64 <= *best {
                return;
            }
            let v = cand.trailing_zeros() as usize;
            grow(adj, cand & adj[v], size + 1, best);
            grow(adj, cand & !(1 << v), size, best);
        }
        let n = self.n();
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut best = 0;
        grow(&self.adj, all, 0, &mut best);
        best
    }

    fn chromatic_number(&self) -> u64 {
        let n = self.n();
        if n == 0 {
            return 0;
        }
        (1..=n as u64).find(|&k| self.colourable(k)).unwrap_or(n as u64)
    }

    fn colourable(&self, k: u64) -> bool {
        fn go(g: &Graph, v: usize, colours: &mut Vec<u64>, k: u64, used: u64) -> bool {
            if v == g.n() {
                return true;
            }
            // symmetry: a new vertex opens at most one fresh colour
            for c in 0..k.min(used + 1) {
                if (0..v).all(|u| g.adj[v] >> u & 1 == 0 || colours[u] != c) {
                    colours[v] = c;
                    if go(g, v + 1, colours, k, used.max(c + 1)) {
                        return true;
                    }
                }
            }
            false
        }
        go(self, 0, &mut vec![0; self.n()], k, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_set;

    #[test]
    fn spec_examples() {
        let w = IdealHandle::parse("W").unwrap();
        let d = diagnostics(&w, &SetExpr::Squares, 100).unwrap();
        assert_eq!(d.count_stat("longest_ap"), Some(3));
        let harm = IdealHandle::parse("I_1/n").unwrap();
        let d = diagnostics(&harm, &parse_set("ap 1 2").unwrap(), 100).unwrap();
        let expect = (0..50).fold(BigRational::zero(), |a, k| a + ratio(1, 2 * k + 2));
        assert_eq!(d.get("partial_sum"), Some(&StatValue::Exact(fmt_rational(&expect))));
    }

    #[test]
    fn rado_window_colouring() {
        let mut codes = Vec::new();
        for n in 0..8u64 {
            for m in 0..n {
                if rado::edge(m, n) {
                    codes.push(coding::unordered_pair(m, n).unwrap());
                }
            }
        }
        let g = IdealHandle::parse("G_fc").unwrap();
        let d = diagnostics(&g, &SetExpr::fin(codes), 8).unwrap();
        let chi = d.count_stat("chromatic_number");
        assert!(matches!(d.get("chromatic_number"), Some(StatValue::Missing(Some(_)))), "{chi:?}");
    }

    #[test]
    fn ap_search() {
        assert_eq!(longest_ap(&[1, 4, 9, 16, 25, 36, 49]), 3);
        assert_eq!(longest_ap(&[0, 1, 2, 3, 4]), 5);
        assert_eq!(longest_ap(&[7]), 1);
        assert_eq!(longest_ap(&[]), 0);
    }
}
