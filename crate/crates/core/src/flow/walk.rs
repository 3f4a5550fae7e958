//! Random-walk estimates of the optimal flow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Multigraph;
use crate::error::{Error, Result};
use crate::graph::{SubgraphView, Vertex};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// For each edge `(a,b)`, estimate `E[Z_ab] − E[Z_ba]` over walks from `s` absorbed at `t`.
pub fn random_walk_flows(
    g: &Multigraph,
    s: Vertex,
    t: Vertex,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<Vec<WalkEstimate>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let comp = g.components();
    if comp[s] != comp[t] {
        return Err(Error::Disconnected);
    }
    let adj = g.adjacency();
    let m = g.edges.len();
    let mut sum = vec![0.0f64; m];
    let mut sum_sq = vec![0.0f64; m];
    let mut diff = vec![0i64; m];
    let mut touched = Vec::new();
    for _ in 0..trials {
        let mut w = s;
        while w != t {
            let (y, k) = adj[w][rng.random_range(0..adj[w].len())];
            if diff[k] == 0 {
                touched.push(k);
            }
            diff[k] += if g.edges[k].0 == w { 1 } else { -1 };
            w = y;
        }
        for &k in &touched {
            let d = diff[k] as f64;
            sum[k] += d;
            sum_sq[k] += d * d;
            diff[k] = 0;
        }
        touched.clear();
    }
    let n = trials as f64;
    Ok((0..m)
        .map(|k| {
            let mean = sum[k] / n;
            let var = if trials > 1 { (sum_sq[k] / n - mean * mean).max(0.0) * n / (n - 1.0) } else { 0.0 };
            WalkEstimate { mean, stderr: (var / n).sqrt(), trials }
        })
        .collect())
}

/// Estimate `θ*(u,v)` on `G(x)` from `trials` walks seeded by `seed`.
pub fn random_walk_flow(view: &SubgraphView<'_>, u: Vertex, v: Vertex, trials: u64, seed: u64) -> Result<WalkEstimate> {
    let g = Multigraph::from_view(view);
    let k = g.edges.iter().position(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)).ok_or(Error::UnknownEdge(u, v))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est = random_walk_flows(&g, view.s(), view.t(), trials, &mut rng)?[k];
    Ok(if g.edges[k] == (u, v) { est } else { WalkEstimate { mean: -est.mean, ..est } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn single_edge_is_exact() {
        let g = Graph::new(2, &[(0, 1)], 0, 1).unwrap();
        let e = random_walk_flow(&g.full_view(), 0, 1, 1000, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn p3_and_triangle() {
        let p = Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        for (a, b) in [(0, 1), (1, 2), (2, 3)] {
            let e = random_walk_flow(&p.full_view(), a, b, 100_000, 7).unwrap();
            // each walk crosses a path edge net once
            assert_eq!(e.mean, 1.0);
        }
        let t = Graph::new(3, &[(0, 1), (0, 2), (2, 1)], 0, 1).unwrap();
        let e = random_walk_flow(&t.full_view(), 0, 1, 100_000, 3).unwrap();
        assert!((e.mean - 2.0 / 3.0).abs() <= 3.0 * e.stderr);
        let r = random_walk_flow(&t.full_view(), 1, 0, 100_000, 3).unwrap();
        assert_eq!(r.mean, -e.mean);
    }

    #[test]
    fn disconnected() {
        let p = Graph::new(3, &[(0, 1), (1, 2)], 0, 2).unwrap();
        assert_eq!(random_walk_flow(&p.view(&[true, false]), 0, 1, 10, 0), Err(Error::Disconnected));
    }
}
