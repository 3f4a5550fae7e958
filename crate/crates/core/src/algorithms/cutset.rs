//! Cut-set finding by repeated witness generation and the coupon-collector bound.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::witness::witness_generation;
use crate::error::{Error, Result};
use crate::graph::{undirected, Graph, InputOracle, Vertex};
use crate::quantum::Simulator;
use crate::span::{build_stconn_program, default_bounds_stconn};

/// Promised bounds: `R_{s,t} ≤ r_bound` and a cut whose edges carry `θ*² ≥ g_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutsetParams {
    pub r_bound: f64,
    pub g_bound: f64,
}

impl CutsetParams {
    pub fn eps(&self) -> f64 {
        self.g_bound / (256.0 * self.r_bound)
    }

    /// `⌈100·(R/g)·(ln n + 1)⌉` repetitions.
    pub fn repetitions(&self, n: usize) -> u64 {
        (100.0 * self.r_bound / self.g_bound * ((n as f64).ln() + 1.0)).ceil() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutsetReport {
    pub edges: Vec<(Vertex, Vertex)>,
    pub runs: u64,
    pub failures: u64,
    pub eps: f64,
}

/// Collect the edges measured from `T′` witness states generated with `δ = 1/4`.
pub fn cutset_finder(
    g: &Graph,
    oracle: &mut InputOracle,
    params: &CutsetParams,
    sim: &Simulator,
    rng: &mut impl Rng,
) -> Result<CutsetReport> {
    if !(params.r_bound > 0.0 && params.g_bound > 0.0 && params.g_bound <= 1.0) {
        return Err(Error::InvalidParameter("need R > 0 and g ∈ (0, 1]".into()));
    }
    let eps = params.eps();
    let runs = params.repetitions(g.vertex_count());
    let program = build_stconn_program(g);
    let bounds = default_bounds_stconn(g.vertex_count(), sim.config().c_minus)?;
    let mut found = BTreeSet::new();
    let mut failures = 0;
    for _ in 0..runs {
        let run = witness_generation(&program, oracle, eps, 0.25, &bounds, sim, rng)?;
        match run.state {
            Some(state) => {
                let total: f64 = state.iter().map(|z| z.norm_sqr()).sum();
                let mut r = rng.random::<f64>() * total;
                let mut k = state.len() - 1;
                for (i, z) in state.iter().enumerate() {
                    r -= z.norm_sqr();
                    if r < 0.0 {
                        k = i;
                        break;
                    }
                }
                let (a, b) = program.directed_edges()[k];
                found.insert(undirected(a, b));
            }
            None => failures += 1,
        }
    }
    Ok(CutsetReport { edges: found.into_iter().collect(), runs, failures, eps })
}

/// `Σ_{j=1..c} 1/(jB)`: expected samples to see each of `c` outcomes of mass at least `B`.
pub fn coupon_expected_samples(b: f64, c: u32) -> Result<f64> {
    if !(b > 0.0 && b <= 1.0) || c < 1 {
        return Err(Error::InvalidParameter(format!("need B ∈ (0,1] and c ≥ 1, got {b}, {c}")));
    }
    Ok((1..=c).map(|j| 1.0 / (j as f64 * b)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coupon_values() {
        assert_eq!(coupon_expected_samples(1.0, 1).unwrap(), 1.0);
        assert_eq!(coupon_expected_samples(0.5, 2).unwrap(), 3.0);
        assert_eq!(coupon_expected_samples(0.25, 1).unwrap(), 4.0);
        assert!(coupon_expected_samples(0.0, 1).is_err());
    }

    #[test]
    fn coupon_matches_simulation() {
        let (b, c) = (0.2, 3usize);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 20_000;
        let mut total = 0u64;
        for _ in 0..trials {
            let mut seen = [false; 3];
            let mut draws = 0;
            while seen.iter().any(|s| !s) {
                draws += 1;
                let r: f64 = rng.random();
                let k = (r / b) as usize;
                if k < c {
                    seen[k] = true;
                }
            }
            total += draws;
        }
        let mean = total as f64 / trials as f64;
        let bound = coupon_expected_samples(b, c as u32).unwrap();
        assert!((mean - bound).abs() / bound < 0.1, "{mean} {bound}");
    }

    #[test]
    fn single_path_edges_are_cuts() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        let sim = Simulator::new(Config::default());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut o = InputOracle::new(vec![true; 3]);
        let params = CutsetParams { r_bound: 3.0, g_bound: 1.0 };
        assert_eq!((params.eps(), params.repetitions(4)), (1.0 / 768.0, 716));
        let rep = cutset_finder(&g, &mut o, &params, &sim, &mut rng).unwrap();
        for e in &rep.edges {
            let cut = g.remove_edges(&[*e]).unwrap();
            assert!(!cut.full_view().st_connected(0, 3));
        }
        assert_eq!(rep.edges.len(), 3);
    }
}
