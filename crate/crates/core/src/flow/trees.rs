//! Spanning-tree and spanning-forest oracles.

use nalgebra::DMatrix;

use super::Multigraph;
use crate::error::{Error, Result};
use crate::graph::{SubgraphView, Vertex};

/// Vertex limit for the exponential enumeration oracles.
pub const TREE_ENUMERATION_LIMIT: usize = 10;

const DETERMINANT_LIMIT: usize = 16;

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::SizeGuard { what: "vertex set", size: n, limit });
    }
    Ok(())
}

/// Matrix-tree count from a reduced, multiplicity-weighted Laplacian; 0 if disconnected.
pub fn spanning_tree_count(g: &Multigraph) -> Result<u64> {
    guard(g.n, DETERMINANT_LIMIT)?;
    if g.n == 0 {
        return Ok(0);
    }
    if !g.is_connected() {
        return Ok(0);
    }
    if g.n == 1 {
        return Ok(1);
    }
    let l = g.laplacian();
    let reduced: DMatrix<f64> = l.view((1, 1), (g.n - 1, g.n - 1)).into_owned();
    Ok(reduced.determinant().round() as u64)
}

/// Spanning-tree count of `G(x)` over its active vertices.
pub fn spanning_tree_count_view(view: &SubgraphView<'_>) -> Result<u64> {
    spanning_tree_count(&Multigraph::compressed(view).0)
}

/// Call `f` with the edge indices of every acyclic edge subset of size `size`.
pub fn enumerate_forests(g: &Multigraph, size: usize, mut f: impl FnMut(&[usize])) {
    let mut parent: Vec<usize> = (0..g.n).collect();
    let mut chosen = Vec::with_capacity(size);
    rec(&g.edges, 0, size, &mut parent, &mut chosen, &mut f);

    fn find(p: &[usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }

    fn rec(
        edges: &[(Vertex, Vertex)],
        idx: usize,
        need: usize,
        parent: &mut Vec<usize>,
        chosen: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if need == 0 {
            f(chosen);
            return;
        }
        if edges.len() - idx < need {
            return;
        }
        let (a, b) = edges[idx];
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra] = rb;
            chosen.push(idx);
            rec(edges, idx + 1, need - 1, parent, chosen, f);
            chosen.pop();
            parent[ra] = ra;
        }
        rec(edges, idx + 1, need, parent, chosen, f);
    }
}

/// For every spanning tree: the directed traversal counts of its unique path
/// between every ordered vertex pair.
///
/// `through[s][t][2k + d]` counts trees whose s→t path uses edge `k` in its
/// stored orientation (`d = 0`) or reversed (`d = 1`).
#[derive(Debug, Clone)]
pub struct TreeCensus {
    pub total: u64,
    through: Vec<u64>,
    n: usize,
    m: usize,
}

impl TreeCensus {
    pub fn new(g: &Multigraph) -> Result<TreeCensus> {
        guard(g.n, TREE_ENUMERATION_LIMIT)?;
        let (n, m) = (g.n, g.edges.len());
        let mut census = TreeCensus { total: 0, through: vec![0; n * n * 2 * m], n, m };
        if n == 0 {
            return Ok(census);
        }
        let mut adj: Vec<Vec<(Vertex, usize)>> = vec![Vec::new(); n];
        let mut up = vec![(usize::MAX, usize::MAX); n];
        let mut stack = Vec::with_capacity(n);
        enumerate_forests(g, n - 1, |tree| {
            census.total += 1;
            for a in &mut adj {
                a.clear();
            }
            for &k in tree {
                let (a, b) = g.edges[k];
                adj[a].push((b, k));
                adj[b].push((a, k));
            }
            for t in 0..n {
                // parent pointers toward t
                for u in up.iter_mut() {
                    *u = (usize::MAX, usize::MAX);
                }
                up[t] = (t, usize::MAX);
                stack.clear();
                stack.push(t);
                while let Some(w) = stack.pop() {
                    for &(y, k) in &adj[w] {
                        if up[y].0 == usize::MAX {
                            up[y] = (w, k);
                            stack.push(y);
                        }
                    }
                }
                for s in 0..n {
                    let mut w = s;
                    while w != t {
                        let (p, k) = up[w];
                        let d = usize::from(g.edges[k].0 != w);
                        census.through[((s * n + t) * m + k) * 2 + d] += 1;
                        w = p;
                    }
                }
            }
        });
        Ok(census)
    }

    /// Trees whose s→t path uses edge `k` in direction `d`.
    pub fn count(&self, s: Vertex, t: Vertex, k: usize, d: usize) -> u64 {
        self.through[((s * self.n + t) * self.m + k) * 2 + d]
    }

    /// `(N(a,b) − N(b,a)) / |T|` for edge `k` stored as `(a,b)`.
    pub fn flow(&self, s: Vertex, t: Vertex, k: usize) -> f64 {
        (self.count(s, t, k, 0) as f64 - self.count(s, t, k, 1) as f64) / self.total as f64
    }
}

/// Per-edge `[N_forward, N_backward]` and the tree total for one terminal pair.
pub fn tree_path_counts(g: &Multigraph, s: Vertex, t: Vertex) -> Result<(u64, Vec<[u64; 2]>)> {
    let c = TreeCensus::new(g)?;
    let per = (0..g.edges.len()).map(|k| [c.count(s, t, k, 0), c.count(s, t, k, 1)]).collect();
    Ok((c.total, per))
}

/// Two-component spanning forests separating `s` and `t`: the total, and per
/// edge `[a on s-side & b on t-side, b on s-side & a on t-side]` for edge `(a,b)`.
pub fn separating_forest_counts(g: &Multigraph, s: Vertex, t: Vertex) -> Result<(u64, Vec<[u64; 2]>)> {
    guard(g.n, TREE_ENUMERATION_LIMIT)?;
    let mut total = 0;
    let mut per = vec![[0u64; 2]; g.edges.len()];
    if g.n < 2 {
        return Ok((0, per));
    }
    let mut side = vec![usize::MAX; g.n];
    enumerate_forests(g, g.n - 2, |forest| {
        let sub = Multigraph::new(g.n, forest.iter().map(|&k| g.edges[k]).collect());
        let comp = sub.components();
        if comp[s] == comp[t] {
            return;
        }
        total += 1;
        for v in 0..g.n {
            side[v] = usize::from(comp[v] != comp[s]);
        }
        for (k, &(a, b)) in g.edges.iter().enumerate() {
            if side[a] == 0 && side[b] == 1 {
                per[k][0] += 1;
            } else if side[a] == 1 && side[b] == 0 {
                per[k][1] += 1;
            }
        }
    });
    Ok((total, per))
}

fn locate(view: &SubgraphView<'_>, u: Vertex, v: Vertex) -> Result<(Multigraph, Vec<Option<usize>>, usize, usize)> {
    let (mg, map) = Multigraph::compressed(view);
    guard(mg.n, TREE_ENUMERATION_LIMIT)?;
    let (cu, cv) = match (map.get(u).copied().flatten(), map.get(v).copied().flatten()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::UnknownEdge(u, v)),
    };
    let k =
        mg.edges.iter().position(|&(a, b)| (a, b) == (cu, cv) || (a, b) == (cv, cu)).ok_or(Error::UnknownEdge(u, v))?;
    let d = usize::from(mg.edges[k] != (cu, cv));
    Ok((mg, map, k, d))
}

/// `|𝒩_G(u,v)|`: spanning trees whose st-path traverses `(u,v)` in that direction.
pub fn count_trees_using_directed_edge(view: &SubgraphView<'_>, u: Vertex, v: Vertex) -> Result<u64> {
    let (mg, map, k, d) = locate(view, u, v)?;
    let (_, per) = tree_path_counts(&mg, map[view.s()].unwrap(), map[view.t()].unwrap())?;
    Ok(per[k][d])
}

/// `θ(u,v) = (|𝒩(u,v)| − |𝒩(v,u)|) / |𝒯|`.
pub fn flow_via_trees(view: &SubgraphView<'_>, u: Vertex, v: Vertex) -> Result<f64> {
    let (mg, map, k, d) = locate(view, u, v)?;
    let (total, per) = tree_path_counts(&mg, map[view.s()].unwrap(), map[view.t()].unwrap())?;
    if total == 0 {
        return Err(Error::Disconnected);
    }
    Ok((per[k][d] as f64 - per[k][1 - d] as f64) / total as f64)
}

/// Undirected `q_{u,v} = (𝒩(u,v) − 𝒩(v,u))² / (|𝒯_G| · |𝒯_{G/st}|)`.
pub fn q_via_trees(view: &SubgraphView<'_>, u: Vertex, v: Vertex) -> Result<f64> {
    if view.has_present_edge(view.s(), view.t()) {
        return Err(Error::Unsupported("the edge {s,t} is present".into()));
    }
    let (mg, map, k, d) = locate(view, u, v)?;
    let (s, t) = (map[view.s()].unwrap(), map[view.t()].unwrap());
    let (total, per) = tree_path_counts(&mg, s, t)?;
    let contracted = mg.identify(s, t);
    let mut merged = 0u64;
    enumerate_forests(&contracted, contracted.n.saturating_sub(1), |_| merged += 1);
    if total == 0 || merged == 0 || !contracted.is_connected() {
        return Err(Error::Disconnected);
    }
    let diff = per[k][d] as f64 - per[k][1 - d] as f64;
    Ok(diff * diff / (total as f64 * merged as f64))
}

/// `(forests whose st-cut contains (u,v), all st-separating two-component forests)`.
pub fn count_separating_forests(view: &SubgraphView<'_>, u: Vertex, v: Vertex) -> Result<(u64, u64)> {
    let (mg, map, k, d) = locate(view, u, v)?;
    let (total, per) = separating_forest_counts(&mg, map[view.s()].unwrap(), map[view.t()].unwrap())?;
    Ok((per[k][d], total))
}
