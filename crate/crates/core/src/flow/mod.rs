//! Electrical flows on unit-resistor networks and the classical identities
//! that relate them to spanning trees and random walks.

mod series_parallel;
mod trees;
mod walk;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{directed_label, SubgraphView, Vertex};
use crate::linalg::pinv_symmetric;

pub use series_parallel::{sp_compose, sp_dual, sp_st_direction, SpRealization, SpTerm};
pub use trees::{
    count_separating_forests, count_trees_using_directed_edge, enumerate_forests, flow_via_trees, q_via_trees,
    separating_forest_counts, spanning_tree_count, spanning_tree_count_view, tree_path_counts, TreeCensus,
    TREE_ENUMERATION_LIMIT,
};
pub use walk::{random_walk_flow, random_walk_flows, WalkEstimate};

/// Undirected multigraph; edge `k` is stored with a reference orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        debug_assert!(edges.iter().all(|&(a, b)| a < n && b < n && a != b));
        Multigraph { n, edges }
    }

    /// Present edges of a view over the parent's full vertex range.
    pub fn from_view(view: &SubgraphView<'_>) -> Self {
        Multigraph::new(view.n(), view.present_edges().map(|e| (e.u, e.v)).collect())
    }

    /// Present edges restricted to active vertices, relabeled densely.
    /// Returns the graph and the old-to-new vertex map.
    pub fn compressed(view: &SubgraphView<'_>) -> (Self, Vec<Option<usize>>) {
        let g = view.parent();
        let mut map = vec![None; g.n()];
        let mut k = 0;
        for v in g.active_vertices() {
            map[v] = Some(k);
            k += 1;
        }
        let edges = view.present_edges().map(|e| (map[e.u].unwrap(), map[e.v].unwrap())).collect();
        (Multigraph::new(k, edges), map)
    }

    /// Identify `b` into `a`; loops are dropped. Vertex `b` is removed and higher ids shift down.
    pub fn identify(&self, a: Vertex, b: Vertex) -> Multigraph {
        let relabel = |w: Vertex| {
            let w = if w == b { a } else { w };
            if w > b {
                w - 1
            } else {
                w
            }
        };
        let edges = self.edges.iter().map(|&(x, y)| (relabel(x), relabel(y))).filter(|&(x, y)| x != y).collect();
        Multigraph::new(self.n - 1, edges)
    }

    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for &(a, b) in &self.edges {
            l[(a, a)] += 1.0;
            l[(b, b)] += 1.0;
            l[(a, b)] -= 1.0;
            l[(b, a)] -= 1.0;
        }
        l
    }

    /// Component label per vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        (0..self.n).map(|v| find(&mut parent, v)).collect()
    }

    pub fn is_connected(&self) -> bool {
        let c = self.components();
        c.iter().all(|&r| r == c[0])
    }

    pub fn adjacency(&self) -> Vec<Vec<(Vertex, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (k, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
        adj
    }
}

/// Laplacian pseudoinverse of a multigraph, reusable across terminal pairs.
#[derive(Debug, Clone)]
pub struct LaplacianSolver {
    graph: Multigraph,
    pinv: DMatrix<f64>,
    components: Vec<usize>,
}

impl LaplacianSolver {
    pub fn new(graph: Multigraph) -> Self {
        let pinv = pinv_symmetric(&graph.laplacian());
        let components = graph.components();
        LaplacianSolver { graph, pinv, components }
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn connected(&self, a: Vertex, b: Vertex) -> bool {
        self.components[a] == self.components[b]
    }

    /// Effective resistance, `+∞` when disconnected and 0 when `a == b`.
    pub fn resistance(&self, a: Vertex, b: Vertex) -> f64 {
        if a == b {
            return 0.0;
        }
        if !self.connected(a, b) {
            return f64::INFINITY;
        }
        self.pinv[(a, a)] + self.pinv[(b, b)] - 2.0 * self.pinv[(a, b)]
    }

    /// Potentials `φ = L⁺(e_s − e_t)`.
    pub fn potentials(&self, s: Vertex, t: Vertex) -> DVector<f64> {
        self.pinv.column(s) - self.pinv.column(t)
    }

    /// Optimal unit flow along each edge in its stored orientation.
    pub fn edge_flows(&self, s: Vertex, t: Vertex) -> Result<Vec<f64>> {
        if !self.connected(s, t) {
            return Err(Error::Disconnected);
        }
        let phi = self.potentials(s, t);
        Ok(self.graph.edges.iter().map(|&(a, b)| phi[a] - phi[b]).collect())
    }
}

/// `L = D − A` of `G(x)` over the parent's vertex range.
pub fn graph_laplacian(view: &SubgraphView<'_>) -> DMatrix<f64> {
    Multigraph::from_view(view).laplacian()
}

/// `R_{a,b}(G(x))`, `+∞` when `a` and `b` are disconnected.
pub fn effective_resistance(view: &SubgraphView<'_>, a: Vertex, b: Vertex) -> f64 {
    LaplacianSolver::new(Multigraph::from_view(view)).resistance(a, b)
}

/// Antisymmetric flow on the directed edges of `G(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitFlow {
    theta: BTreeMap<(Vertex, Vertex), f64>,
}

impl UnitFlow {
    pub fn from_directed(theta: BTreeMap<(Vertex, Vertex), f64>) -> Self {
        UnitFlow { theta }
    }

    /// `θ(u,v)`, zero on pairs that are not edges.
    pub fn get(&self, u: Vertex, v: Vertex) -> f64 {
        self.theta.get(&(u, v)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Vertex, Vertex), f64)> + '_ {
        self.theta.iter().map(|(&k, &v)| (k, v))
    }

    /// `J(θ) = ½ Σ θ(e)²` over directed edges.
    pub fn energy(&self) -> f64 {
        0.5 * self.theta.values().map(|x| x * x).sum::<f64>()
    }

    pub fn antisymmetry_violation(&self) -> f64 {
        self.theta.iter().map(|(&(u, v), &x)| (x + self.get(v, u)).abs()).fold(0.0, f64::max)
    }

    /// Net outflow per vertex.
    pub fn net_outflow(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (&(u, _), &x) in &self.theta {
            out[u] += x;
        }
        out
    }

    /// Largest deviation from unit source at `s`, unit sink at `t` and conservation elsewhere.
    pub fn conservation_violation(&self, n: usize, s: Vertex, t: Vertex) -> f64 {
        self.net_outflow(n)
            .iter()
            .enumerate()
            .map(|(v, &f)| {
                let want = if v == s {
                    1.0
                } else if v == t {
                    -1.0
                } else {
                    0.0
                };
                (f - want).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The minimum-energy unit st-flow `θ*(u,v) = φ(u) − φ(v)` on `G(x)`.
pub fn optimal_unit_flow(view: &SubgraphView<'_>) -> Result<UnitFlow> {
    let mg = Multigraph::from_view(view);
    let solver = LaplacianSolver::new(mg);
    let flows = solver.edge_flows(view.s(), view.t())?;
    let mut theta = BTreeMap::new();
    for (&(a, b), &f) in solver.graph().edges.iter().zip(&flows) {
        theta.insert((a, b), f);
        theta.insert((b, a), -f);
    }
    Ok(UnitFlow { theta })
}

/// Sampling distribution over directed edges.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDistribution {
    q: BTreeMap<(Vertex, Vertex), f64>,
}

impl FlowDistribution {
    pub fn get(&self, u: Vertex, v: Vertex) -> f64 {
        self.q.get(&(u, v)).copied().unwrap_or(0.0)
    }

    /// Mass of the undirected edge `{u,v}`.
    pub fn undirected(&self, u: Vertex, v: Vertex) -> f64 {
        self.get(u, v) + self.get(v, u)
    }

    pub fn total(&self) -> f64 {
        self.q.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Vertex, Vertex), f64)> + '_ {
        self.q.iter().map(|(&k, &v)| (k, v))
    }
}

/// `q(e) = θ(e)² / (2R)` per directed edge.
pub fn edge_distribution(flow: &UnitFlow, r: f64) -> Result<FlowDistribution> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("resistance must be positive and finite, got {r}")));
    }
    Ok(FlowDistribution { q: flow.iter().map(|(k, x)| (k, x * x / (2.0 * r))).collect() })
}

/// Serialize `+∞` as the string `"inf"`.
pub fn serialize_resistance<S: Serializer>(r: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if r.is_finite() {
        s.serialize_f64(*r)
    } else {
        s.serialize_str("inf")
    }
}

/// Flow and distribution dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowJson {
    pub theta: BTreeMap<String, f64>,
    #[serde(rename = "R", serialize_with = "serialize_resistance", deserialize_with = "deserialize_resistance")]
    pub r: f64,
    pub q: BTreeMap<String, f64>,
}

fn deserialize_resistance<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum R {
        Num(f64),
        Str(String),
    }
    match R::deserialize(d)? {
        R::Num(x) => Ok(x),
        R::Str(s) if s == "inf" => Ok(f64::INFINITY),
        R::Str(s) => Err(serde::de::Error::custom(format!("bad resistance {s:?}"))),
    }
}

impl FlowJson {
    /// Dump `θ*`, `R` and `q` for `G(x)`; disconnected inputs give `R = inf` and empty maps.
    pub fn compute(view: &SubgraphView<'_>) -> Result<FlowJson> {
        let r = effective_resistance(view, view.s(), view.t());
        if !r.is_finite() {
            return Ok(FlowJson { theta: BTreeMap::new(), r, q: BTreeMap::new() });
        }
        let flow = optimal_unit_flow(view)?;
        let q = edge_distribution(&flow, r)?;
        Ok(FlowJson {
            theta: flow.iter().map(|((u, v), x)| (directed_label(u, v), x)).collect(),
            r,
            q: q.iter().map(|((u, v), x)| (directed_label(u, v), x)).collect(),
        })
    }
}
