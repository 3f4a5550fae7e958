//! Graphs, bit-to-edge associations, input oracles and subgraph views.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::QueryLedger;

pub type Vertex = usize;

/// An undirected edge `{u, v}` with `u < v`, tagged with the input bit that controls it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub bit: usize,
}

impl Edge {
    pub fn key(&self) -> (Vertex, Vertex) {
        (self.u, self.v)
    }

    pub fn other(&self, w: Vertex) -> Vertex {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, w: Vertex) -> bool {
        self.u == w || self.v == w
    }
}

/// Label of a directed edge in dumps: `"min,max:dir"` with `dir` 0 for min→max and 1 for max→min.
pub fn directed_label(a: Vertex, b: Vertex) -> String {
    let (u, v) = undirected(a, b);
    format!("{u},{v}:{}", u8::from(a > b))
}

/// Normalize a pair to `(min, max)`.
pub fn undirected(a: Vertex, b: Vertex) -> (Vertex, Vertex) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A parent graph with terminals and an input association.
///
/// Edges are stored sorted by `(min, max)`, which fixes the directed basis
/// order used by span programs and state dumps. Removed vertices stay in the
/// identifier range but become inactive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    active: Vec<bool>,
    edges: Vec<Edge>,
    m: usize,
    s: Vertex,
    t: Vertex,
}

impl Graph {
    /// Build a graph where edge `i` of `pairs` is controlled by bit `i`.
    pub fn new(n: usize, pairs: &[(Vertex, Vertex)], s: Vertex, t: Vertex) -> Result<Graph> {
        let edges: Vec<_> = pairs.iter().enumerate().map(|(i, &(u, v))| (u, v, i)).collect();
        Self::with_bits(n, &edges, pairs.len(), s, t)
    }

    /// Build a graph with an explicit association of edges to bits `0..m`.
    pub fn with_bits(n: usize, edges: &[(Vertex, Vertex, usize)], m: usize, s: Vertex, t: Vertex) -> Result<Graph> {
        if s == t {
            return Err(Error::EqualTerminals(s));
        }
        Self::build(n, edges, m, s, t)
    }

    fn build(n: usize, edges: &[(Vertex, Vertex, usize)], m: usize, s: Vertex, t: Vertex) -> Result<Graph> {
        for &w in &[s, t] {
            if w >= n {
                return Err(Error::VertexOutOfRange { vertex: w, n });
            }
        }
        let mut list = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for &(a, b, bit) in edges {
            for &w in &[a, b] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if bit >= m {
                return Err(Error::BitOutOfRange { index: bit, m });
            }
            let (u, v) = undirected(a, b);
            if !seen.insert((u, v)) {
                return Err(Error::DuplicateEdge(u, v));
            }
            list.push(Edge { u, v, bit });
        }
        list.sort();
        Ok(Graph { n, active: vec![true; n], edges: list, m, s, t })
    }

    /// The complete graph on `n` vertices with singleton bits in canonical order.
    pub fn complete(n: usize, s: Vertex, t: Vertex) -> Result<Graph> {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((u, v));
            }
        }
        Graph::new(n, &pairs, s, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> Vertex {
        self.s
    }

    pub fn t(&self) -> Vertex {
        self.t
    }

    /// Input length.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_active(&self, v: Vertex) -> bool {
        v < self.n && self.active[v]
    }

    pub fn active_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n).filter(|&v| self.active[v])
    }

    /// Number of active vertices.
    pub fn vertex_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn edge_index(&self, a: Vertex, b: Vertex) -> Option<usize> {
        let key = undirected(a, b);
        self.edges.binary_search_by(|e| e.key().cmp(&key)).ok()
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Indices of edges incident to `w`.
    pub fn incident(&self, w: Vertex) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].touches(w)).collect()
    }

    /// Directed basis: for each edge `(u,v)` in order, `(u,v)` then `(v,u)`.
    pub fn directed_edges(&self) -> Vec<(Vertex, Vertex)> {
        self.edges.iter().flat_map(|e| [(e.u, e.v), (e.v, e.u)]).collect()
    }

    pub fn association(&self) -> EdgeAssociation {
        let mut sets = vec![Vec::new(); self.m];
        for (i, e) in self.edges.iter().enumerate() {
            sets[e.bit].push(i);
        }
        EdgeAssociation { m: self.m, sets }
    }

    /// Same graph with different terminals; `s == t` is allowed here.
    pub fn with_terminals(&self, s: Vertex, t: Vertex) -> Result<Graph> {
        for &w in &[s, t] {
            if !self.is_active(w) {
                return Err(if w >= self.n {
                    Error::VertexOutOfRange { vertex: w, n: self.n }
                } else {
                    Error::InactiveVertex(w)
                });
            }
        }
        Ok(Graph { s, t, ..self.clone() })
    }

    /// Delete a non-terminal vertex and its incident edges.
    pub fn remove_vertex(&self, u: Vertex) -> Result<Graph> {
        if u == self.s || u == self.t {
            return Err(Error::RemoveTerminal(u));
        }
        self.drop_vertex(u)
    }

    fn drop_vertex(&self, u: Vertex) -> Result<Graph> {
        if !self.is_active(u) {
            return Err(if u >= self.n {
                Error::VertexOutOfRange { vertex: u, n: self.n }
            } else {
                Error::InactiveVertex(u)
            });
        }
        let mut g = self.clone();
        g.active[u] = false;
        g.edges.retain(|e| !e.touches(u));
        Ok(g)
    }

    /// Delete the current source and make `new_source` the source.
    ///
    /// Only the general path finder's recursion re-roots this way.
    pub(crate) fn advance_source(&self, new_source: Vertex) -> Result<Graph> {
        let mut g = self.drop_vertex(self.s)?;
        if !g.is_active(new_source) {
            return Err(Error::InactiveVertex(new_source));
        }
        g.s = new_source;
        Ok(g)
    }

    /// Delete a set of edges; surviving edges keep their bits.
    pub fn remove_edges(&self, set: &[(Vertex, Vertex)]) -> Result<Graph> {
        let mut drop = BTreeSet::new();
        for &(a, b) in set {
            if !self.has_edge(a, b) {
                return Err(Error::UnknownEdge(a, b));
            }
            drop.insert(undirected(a, b));
        }
        let mut g = self.clone();
        g.edges.retain(|e| !drop.contains(&e.key()));
        Ok(g)
    }

    /// Trusted view of `G(x)`.
    pub fn view<'a>(&'a self, x: &[bool]) -> SubgraphView<'a> {
        subgraph(self, x)
    }

    /// View with every edge present.
    pub fn full_view(&self) -> SubgraphView<'_> {
        SubgraphView { parent: self, present: vec![true; self.edges.len()] }
    }
}

/// Map from each bit to the indices of the edges it controls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeAssociation {
    pub m: usize,
    pub sets: Vec<Vec<usize>>,
}

/// Hidden input string with charged access.
#[derive(Debug, Clone)]
pub struct InputOracle {
    x: Vec<bool>,
    free: Vec<Option<bool>>,
    ledger: QueryLedger,
}

impl InputOracle {
    pub fn new(x: Vec<bool>) -> Self {
        let free = vec![None; x.len()];
        InputOracle { x, free, ledger: QueryLedger::new() }
    }

    /// Oracle where `free_ones` are answered 1 and `free_zeros` answered 0 without charge.
    pub fn with_free_bits(x: Vec<bool>, free_ones: &[usize], free_zeros: &[usize]) -> Result<Self> {
        let mut o = InputOracle::new(x);
        let m = o.x.len();
        for (list, val) in [(free_ones, true), (free_zeros, false)] {
            for &i in list {
                if i >= m {
                    return Err(Error::BitOutOfRange { index: i, m });
                }
                if o.x[i] != val || o.free[i].is_some() {
                    return Err(Error::FreeBitConflict(i));
                }
                o.free[i] = Some(val);
            }
        }
        Ok(o)
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    /// Read bit `i`, charging one exact query to `charge_to` unless the bit is free.
    pub fn query(&mut self, i: usize, charge_to: &str) -> Result<bool> {
        if i >= self.x.len() {
            return Err(Error::BitOutOfRange { index: i, m: self.x.len() });
        }
        if let Some(v) = self.free[i] {
            return Ok(v);
        }
        self.ledger.charge_read(charge_to);
        Ok(self.x[i])
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.free.get(i).is_some_and(|f| f.is_some())
    }

    pub fn free_ones(&self) -> Vec<usize> {
        (0..self.free.len()).filter(|&i| self.free[i] == Some(true)).collect()
    }

    pub fn free_zeros(&self) -> Vec<usize> {
        (0..self.free.len()).filter(|&i| self.free[i] == Some(false)).collect()
    }

    /// The full input, for ground-truth oracles, simulation and fixtures only.
    pub fn trusted_x(&self) -> &[bool] {
        &self.x
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut QueryLedger {
        &mut self.ledger
    }

    pub fn take_ledger(&mut self) -> QueryLedger {
        std::mem::take(&mut self.ledger)
    }
}

/// Parse a `0|1` string.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("invalid bit character {c:?}"))),
        })
        .collect()
}

pub fn format_bits(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// The subgraph `G(x)` of a parent graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphView<'a> {
    parent: &'a Graph,
    present: Vec<bool>,
}

/// Trusted construction of `G(x)`; never charges a ledger.
///
/// # Panics
/// If `x.len()` differs from the parent's input length.
pub fn subgraph<'a>(g: &'a Graph, x: &[bool]) -> SubgraphView<'a> {
    assert_eq!(x.len(), g.m, "input length must match the association");
    let present = g.edges.iter().map(|e| x[e.bit]).collect();
    SubgraphView { parent: g, present }
}

impl<'a> SubgraphView<'a> {
    pub fn parent(&self) -> &'a Graph {
        self.parent
    }

    pub fn n(&self) -> usize {
        self.parent.n
    }

    pub fn s(&self) -> Vertex {
        self.parent.s
    }

    pub fn t(&self) -> Vertex {
        self.parent.t
    }

    pub fn is_present(&self, edge_index: usize) -> bool {
        self.present[edge_index]
    }

    pub fn present_mask(&self) -> &[bool] {
        &self.present
    }

    pub fn present_edges(&self) -> impl Iterator<Item = &'a Edge> + '_ {
        self.parent.edges.iter().zip(&self.present).filter(|(_, &p)| p).map(|(e, _)| e)
    }

    pub fn present_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn has_present_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.parent.edge_index(a, b).is_some_and(|i| self.present[i])
    }

    /// Adjacency lists over present edges, neighbors sorted.
    pub fn adjacency(&self) -> Vec<Vec<Vertex>> {
        let mut adj = vec![Vec::new(); self.parent.n];
        for e in self.present_edges() {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// BFS hop distance from `a` to `b`, if connected.
    pub fn distance(&self, a: Vertex, b: Vertex) -> Option<usize> {
        if !self.parent.is_active(a) || !self.parent.is_active(b) {
            return None;
        }
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.parent.n];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(w) = queue.pop_front() {
            if w == b {
                return Some(dist[w]);
            }
            for &y in &adj[w] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[w] + 1;
                    queue.push_back(y);
                }
            }
        }
        None
    }

    /// Breadth-first-search connectivity; zero ledger charge.
    pub fn st_connected(&self, a: Vertex, b: Vertex) -> bool {
        self.distance(a, b).is_some()
    }

    /// All self-avoiding paths from `s` to `t` as vertex sequences.
    pub fn enumerate_st_paths(&self) -> Result<Vec<Vec<Vertex>>> {
        const LIMIT: usize = 12;
        let size = self.parent.vertex_count();
        if size > LIMIT {
            return Err(Error::SizeGuard { what: "vertex set", size, limit: LIMIT });
        }
        let adj = self.adjacency();
        let (s, t) = (self.s(), self.t());
        let mut out = Vec::new();
        let mut on_path = vec![false; self.parent.n];
        let mut path = vec![s];
        on_path[s] = true;
        fn dfs(
            adj: &[Vec<Vertex>],
            t: Vertex,
            path: &mut Vec<Vertex>,
            on_path: &mut [bool],
            out: &mut Vec<Vec<Vertex>>,
        ) {
            let w = *path.last().unwrap();
            if w == t {
                out.push(path.clone());
                return;
            }
            for &y in &adj[w] {
                if !on_path[y] {
                    on_path[y] = true;
                    path.push(y);
                    dfs(adj, t, path, on_path, out);
                    path.pop();
                    on_path[y] = false;
                }
            }
        }
        dfs(&adj, t, &mut path, &mut on_path, &mut out);
        Ok(out)
    }

    /// Whether `path` is a self-avoiding walk from `s` to `t` over present edges.
    pub fn is_st_path(&self, path: &[Vertex]) -> bool {
        if path.first() != Some(&self.s()) || path.last() != Some(&self.t()) {
            return false;
        }
        let mut seen = BTreeSet::new();
        path.iter().all(|&v| self.parent.is_active(v) && seen.insert(v))
            && path.windows(2).all(|w| self.has_present_edge(w[0], w[1]))
    }

    /// Whether a directed edge sequence chains from `s` to `t` along a self-avoiding path.
    pub fn is_walkable(&self, seq: &[(Vertex, Vertex)]) -> bool {
        if seq.is_empty() {
            return self.s() == self.t();
        }
        let mut verts = vec![seq[0].0];
        for (i, &(a, b)) in seq.iter().enumerate() {
            if a != *verts.last().unwrap() || (i > 0 && seq[i - 1].1 != a) {
                return false;
            }
            verts.push(b);
        }
        self.is_st_path(&verts)
    }
}

/// Graph JSON interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub s: Vertex,
    pub t: Vertex,
    pub edges: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default)]
    pub free_ones: Vec<usize>,
    #[serde(default)]
    pub free_zeros: Vec<usize>,
}

impl GraphJson {
    /// Parse into a graph and an oracle; a missing `x` means every bit is 1.
    pub fn into_instance(&self) -> Result<(Graph, InputOracle)> {
        let m = self.edges.iter().map(|e| e[2] + 1).max().unwrap_or(0);
        let m = m.max(self.x.as_ref().map_or(0, |x| x.len()));
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1], e[2])).collect();
        let g = Graph::with_bits(self.n, &edges, m, self.s, self.t)?;
        let x = match &self.x {
            Some(bits) => parse_bits(bits)?,
            None => vec![true; m],
        };
        if x.len() != m {
            return Err(Error::InputLength { got: x.len(), expected: m });
        }
        let oracle = InputOracle::with_free_bits(x, &self.free_ones, &self.free_zeros)?;
        Ok((g, oracle))
    }

    pub fn from_instance(g: &Graph, oracle: &InputOracle) -> GraphJson {
        GraphJson {
            n: g.n(),
            s: g.s(),
            t: g.t(),
            edges: g.edges().iter().map(|e| [e.u, e.v, e.bit]).collect(),
            x: Some(format_bits(oracle.trusted_x())),
            free_ones: oracle.free_ones(),
            free_zeros: oracle.free_zeros(),
        }
    }
}
