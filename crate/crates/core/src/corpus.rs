//! Exhaustive corpus of small connected graphs up to isomorphism.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Largest vertex count the corpus generator accepts.
pub const CORPUS_LIMIT: usize = 8;

/// A connected graph in canonical labeling.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorpusGraph {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl CorpusGraph {
    /// `G` with terminals `s`, `t` and every edge its own bit.
    pub fn with_terminals(&self, s: Vertex, t: Vertex) -> Result<Graph> {
        Graph::new(self.n, &self.edges, s, t)
    }

    /// Every unordered terminal pair `s < t`.
    pub fn terminal_pairs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n).flat_map(move |s| (s + 1..self.n).map(move |t| (s, t)))
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

fn mask_of(n: usize, adj: &[u32]) -> u64 {
    let mut m = 0u64;
    for a in 0..n {
        for b in a + 1..n {
            if adj[a] >> b & 1 == 1 {
                m |= 1 << pair_index(n, a, b);
            }
        }
    }
    m
}

/// Smallest edge mask over relabelings that respect a degree-based vertex invariant.
fn canonical(n: usize, adj: &[u32]) -> u64 {
    let deg: Vec<u32> = adj.iter().map(|a| a.count_ones()).collect();
    let inv: Vec<(u32, Vec<u32>)> = (0..n)
        .map(|v| {
            let mut nd: Vec<u32> = (0..n).filter(|&w| adj[v] >> w & 1 == 1).map(|w| deg[w]).collect();
            nd.sort_unstable();
            (deg[v], nd)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| inv[a].cmp(&inv[b]));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match classes.last_mut() {
            Some(c) if inv[c[0]] == inv[v] => c.push(v),
            _ => classes.push(vec![v]),
        }
    }
    let perms: Vec<Vec<Vec<usize>>> = classes.iter().map(|c| permutations(c.len())).collect();
    let mut idx = vec![0usize; classes.len()];
    let mut label = vec![0usize; n];
    let mut relabeled = vec![0u32; n];
    let mut best = u64::MAX;
    loop {
        let mut offset = 0;
        for (c, class) in classes.iter().enumerate() {
            for (k, &v) in class.iter().enumerate() {
                label[v] = offset + perms[c][idx[c]][k];
            }
            offset += class.len();
        }
        relabeled.iter_mut().for_each(|r| *r = 0);
        for v in 0..n {
            for w in 0..n {
                if adj[v] >> w & 1 == 1 {
                    relabeled[label[v]] |= 1 << label[w];
                }
            }
        }
        best = best.min(mask_of(n, &relabeled));
        // odometer over the per-class permutations
        let mut c = 0;
        loop {
            if c == classes.len() {
                return best;
            }
            idx[c] += 1;
            if idx[c] < perms[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    heap(k, &mut cur, &mut out);
    out
}

fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(a.clone());
        return;
    }
    for i in 0..k - 1 {
        heap(k - 1, a, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
    heap(k - 1, a, out);
}

fn decode(n: usize, mask: u64) -> CorpusGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if mask >> pair_index(n, a, b) & 1 == 1 {
                edges.push((a, b));
            }
        }
    }
    CorpusGraph { n, edges }
}

fn adjacency(n: usize, mask: u64) -> Vec<u32> {
    let mut adj = vec![0u32; n];
    for (a, b) in decode(n, mask).edges {
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    adj
}

/// Canonical masks of the connected graphs on exactly `n` vertices.
fn level(n: usize, prev: &BTreeSet<u64>) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    for &m in prev {
        let base = adjacency(n - 1, m);
        for subset in 1u32..(1 << (n - 1)) {
            let mut adj = base.clone();
            adj.push(subset);
            for (v, a) in adj.iter_mut().enumerate().take(n - 1) {
                if subset >> v & 1 == 1 {
                    *a |= 1 << (n - 1);
                }
            }
            out.insert(canonical(n, &adj));
        }
    }
    out
}

/// All connected graphs on `1..=max_n` vertices, one per isomorphism class.
///
/// Every connected graph has a vertex whose removal leaves it connected, so
/// extending each class on `n − 1` vertices by a new vertex with every nonempty
/// neighborhood reaches every class on `n` vertices.
pub fn connected_graphs(max_n: usize) -> Result<Vec<CorpusGraph>> {
    if max_n > CORPUS_LIMIT {
        return Err(Error::SizeGuard { what: "corpus vertex count", size: max_n, limit: CORPUS_LIMIT });
    }
    let mut out = Vec::new();
    if max_n == 0 {
        return Ok(out);
    }
    let mut cur: BTreeSet<u64> = BTreeSet::from([0]);
    out.push(decode(1, 0));
    for n in 2..=max_n {
        cur = level(n, &cur);
        out.extend(cur.iter().map(|&m| decode(n, m)));
    }
    Ok(out)
}
