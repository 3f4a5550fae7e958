//! Divide-and-conquer path finding for unique paths and group-testing path finding in general.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::subroutines::{path_detection_stepper, witness_size_est, SteppedSubroutine};
use super::witness::edge_finder;
use super::Outcome;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::{undirected, Graph, InputOracle, Vertex};
use crate::quantum::Simulator;
use crate::span::{build_stconn_program, default_bounds_stconn};

pub const SINGLE_PATH_READ: &str = "single_path.read";

/// How the single path finder learns the current sub-problem's path length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLength {
    /// Breadth-first distance in `G(x)`, read without charge.
    #[default]
    Trusted,
    /// A charged witness-size estimate of `R_{s,t}`.
    Estimated,
}

struct SinglePath<'a, R: Rng> {
    g: &'a Graph,
    x: Vec<bool>,
    p: f64,
    length: PathLength,
    sim: &'a Simulator,
    rng: &'a mut R,
    calls: usize,
    cap: usize,
    reads: HashMap<usize, bool>,
}

type Step<T> = std::result::Result<T, String>;

impl<R: Rng> SinglePath<'_, R> {
    fn read(&mut self, oracle: &mut InputOracle, a: Vertex, b: Vertex) -> Result<bool> {
        let Some(k) = self.g.edge_index(a, b) else { return Ok(false) };
        let bit = self.g.edges()[k].bit;
        if let Some(&v) = self.reads.get(&bit) {
            return Ok(v);
        }
        let v = oracle.query(bit, SINGLE_PATH_READ)?;
        self.reads.insert(bit, v);
        Ok(v)
    }

    fn solve(&mut self, oracle: &mut InputOracle, s: Vertex, t: Vertex) -> Result<Step<BTreeSet<(Vertex, Vertex)>>> {
        self.calls += 1;
        if self.calls > self.cap {
            return Ok(Err(format!("recursion cap of {} calls exceeded", self.cap)));
        }
        if s == t {
            return Ok(Ok(BTreeSet::new()));
        }
        if self.read(oracle, s, t)? {
            return Ok(Ok(BTreeSet::from([undirected(s, t)])));
        }
        let n = self.g.vertex_count() as f64;
        let eps1 = 1.0 / n.ln();
        if eps1 >= 1.0 {
            return Ok(Err("no path of length two or more fits in the graph".into()));
        }
        let sub = self.g.with_terminals(s, t)?;
        let program = build_stconn_program(&sub);
        let bounds = default_bounds_stconn(self.g.vertex_count(), self.sim.config().c_minus)?;
        let ell = (2.0 * (n.powi(5) / self.p).ln() / eps1).ceil() as usize;
        let mut found = BTreeSet::new();
        for _ in 0..ell {
            if let Outcome::Success(e) = edge_finder(&program, oracle, eps1, &bounds, self.sim, self.rng)? {
                if self.read(oracle, e.from, e.to)? {
                    found.insert(undirected(e.from, e.to));
                }
            }
        }

        let delta = self.p / (ell as f64 * n.powi(5));
        let eps2 = eps1.sqrt();
        let eps3 = 2.0 * eps1.sqrt();
        let config = *self.sim.config();
        let mut pairs: Vec<((Vertex, Vertex), SteppedSubroutine<bool>, SteppedSubroutine<bool>)> = Vec::new();
        for &(a, b) in &found {
            let minus = self.g.remove_edges(&[(a, b)])?;
            for (u, v) in [(a, b), (b, a)] {
                let pd1 = path_detection_stepper(&minus, &self.x, s, u, delta, &config, self.rng)?;
                let pd2 = path_detection_stepper(&minus, &self.x, v, t, delta, &config, self.rng)?;
                pairs.push(((u, v), pd1, pd2));
            }
        }
        let mut length = None;
        let mut chosen = None;
        while chosen.is_none() {
            if pairs.iter().all(|(_, a, b)| a.is_done() && b.is_done()) {
                return Ok(Err("no candidate edge passed the midpoint test".into()));
            }
            let mut finished = vec![false; pairs.len()];
            for (k, (_, pd1, pd2)) in pairs.iter_mut().enumerate() {
                let f1 = pd1.step(oracle.ledger_mut());
                let f2 = pd2.step(oracle.ledger_mut());
                finished[k] = f1 || f2;
            }
            for (k, &((u, v), ref pd1, ref pd2)) in pairs.iter().enumerate() {
                if !(finished[k] && pd1.result() == Some(&true) && pd2.result() == Some(&true)) {
                    continue;
                }
                let l = match length {
                    Some(l) => l,
                    None => {
                        let l = self.path_length(oracle, s, t, eps2, delta)?;
                        length = Some(l);
                        l
                    }
                };
                let k_est =
                    witness_size_est(self.g, &self.x, s, u, eps2, delta, &config, oracle.ledger_mut(), self.rng)?;
                if (k_est - l / 2.0).abs() <= eps3 * l {
                    chosen = Some((u, v));
                    break;
                }
            }
        }
        let (u, v) = chosen.expect("loop exits with a choice");
        let mut edges = BTreeSet::from([undirected(u, v)]);
        for (a, b) in [(s, u), (v, t)] {
            match self.solve(oracle, a, b)? {
                Ok(part) => edges.extend(part),
                Err(reason) => return Ok(Err(reason)),
            }
        }
        Ok(Ok(edges))
    }

    fn path_length(&mut self, oracle: &mut InputOracle, s: Vertex, t: Vertex, eps: f64, delta: f64) -> Result<f64> {
        match self.length {
            PathLength::Trusted => Ok(self.g.view(&self.x).distance(s, t).map_or(f64::INFINITY, |d| d as f64)),
            PathLength::Estimated => {
                let config = *self.sim.config();
                witness_size_est(self.g, &self.x, s, t, eps, delta, &config, oracle.ledger_mut(), self.rng)
            }
        }
    }
}

/// Edges of the unique st-path in `G(x)`, found by sampling edges, checking them with
/// path detectors and recursing on both sides of an edge near the middle.
pub fn single_path_finder(
    g: &Graph,
    oracle: &mut InputOracle,
    p: f64,
    length: PathLength,
    sim: &Simulator,
    rng: &mut impl Rng,
) -> Result<Outcome<Vec<(Vertex, Vertex)>>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
    }
    let mut run = SinglePath {
        g,
        x: oracle.trusted_x().to_vec(),
        p,
        length,
        sim,
        rng,
        calls: 0,
        cap: 2 * g.vertex_count(),
        reads: HashMap::new(),
    };
    Ok(match run.solve(oracle, g.s(), g.t())? {
        Ok(edges) => Outcome::Success(edges.into_iter().collect()),
        Err(reason) => Outcome::Failure(reason),
    })
}

/// A walk from `s` to `t` in `G(x)` found one edge at a time by bisecting the edges at the
/// current source with pairs of path detectors run in lockstep.
pub fn general_path_finder(
    g: &Graph,
    oracle: &mut InputOracle,
    p: f64,
    config: &Config,
    rng: &mut impl Rng,
) -> Result<Outcome<Vec<(Vertex, Vertex)>>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
    }
    let x = oracle.trusted_x().to_vec();
    let mut cur = g.clone();
    let mut path = Vec::new();
    loop {
        let (s, t) = (cur.s(), cur.t());
        if s == t {
            return Ok(Outcome::Success(path));
        }
        let n = cur.vertex_count() as f64;
        let delta = p / (n.powi(4) * n.ln());
        let mut at_s: Vec<(Vertex, Vertex)> = cur.incident(s).iter().map(|&k| (s, cur.edges()[k].other(s))).collect();
        at_s.sort_by_key(|&(_, v)| v);
        let mut set = at_s.clone();
        if set.is_empty() {
            return Ok(Outcome::Failure(format!("vertex {s} has no edges")));
        }
        while set.len() > 1 {
            let half = set.len().div_ceil(2);
            let (s1, s2) = set.split_at(half);
            let without = |keep: &[(Vertex, Vertex)]| -> Vec<(Vertex, Vertex)> {
                at_s.iter().copied().filter(|e| !keep.contains(e)).collect()
            };
            let g1 = cur.remove_edges(&without(s1))?;
            let g2 = cur.remove_edges(&without(s2))?;
            let mut pd1 = path_detection_stepper(&g1, &x, s, t, delta, config, rng)?;
            let mut pd2 = path_detection_stepper(&g2, &x, s, t, delta, config, rng)?;
            let keep_first = loop {
                pd1.step(oracle.ledger_mut());
                if pd1.result() == Some(&true) {
                    break true;
                }
                pd2.step(oracle.ledger_mut());
                if pd2.result() == Some(&true) {
                    break false;
                }
                if pd1.is_done() && pd2.is_done() {
                    return Ok(Outcome::Failure("neither path detector found a path".into()));
                }
            };
            set = if keep_first { s1.to_vec() } else { s2.to_vec() };
        }
        let u = set[0].1;
        path.push((s, u));
        cur = cur.advance_source(u)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sorted_path_edges(path: &[Vertex]) -> Vec<(Vertex, Vertex)> {
        let mut e: Vec<_> = path.windows(2).map(|w| undirected(w[0], w[1])).collect();
        e.sort_unstable();
        e
    }

    #[test]
    fn single_path_on_p3_and_tree() {
        let sim = Simulator::new(Config::faithful());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p3 = Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        let mut o = InputOracle::new(vec![true; 3]);
        let out = single_path_finder(&p3, &mut o, 0.05, PathLength::Trusted, &sim, &mut rng).unwrap();
        assert_eq!(out, Outcome::Success(vec![(0, 1), (1, 2), (2, 3)]));
        assert!(o.ledger().is_conserved());
        let tree = Graph::new(6, &[(0, 1), (1, 2), (2, 3), (1, 4), (4, 5)], 5, 3).unwrap();
        let truth = sorted_path_edges(&tree.full_view().enumerate_st_paths().unwrap()[0]);
        for length in [PathLength::Trusted, PathLength::Estimated] {
            let mut o = InputOracle::new(vec![true; 5]);
            let out = single_path_finder(&tree, &mut o, 0.05, length, &sim, &mut rng).unwrap();
            assert_eq!(out, Outcome::Success(truth.clone()));
        }
    }

    #[test]
    fn single_path_base_cases() {
        let sim = Simulator::new(Config::faithful());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Graph::new(3, &[(0, 1), (1, 2)], 0, 1).unwrap();
        let mut o = InputOracle::new(vec![true, true]);
        let out = single_path_finder(&g, &mut o, 0.1, PathLength::Trusted, &sim, &mut rng).unwrap();
        assert_eq!(out, Outcome::Success(vec![(0, 1)]));
        assert_eq!(o.ledger().direct_reads(), 1);
        let g = g.with_terminals(2, 2).unwrap();
        let out = single_path_finder(&g, &mut o, 0.1, PathLength::Trusted, &sim, &mut rng).unwrap();
        assert_eq!(out, Outcome::Success(vec![]));
    }

    #[test]
    fn general_path_on_p3() {
        let p3 = Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        let mut o = InputOracle::new(vec![true; 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = general_path_finder(&p3, &mut o, 0.05, &Config::faithful(), &mut rng).unwrap();
        assert_eq!(out, Outcome::Success(vec![(0, 1), (1, 2), (2, 3)]));
    }

    #[test]
    fn general_path_on_complete_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 3..=6 {
            let g = Graph::complete(n, 0, n - 1).unwrap();
            for trial in 0..5 {
                let x: Vec<bool> = (0..g.m()).map(|i| (i + trial) % 3 != 0).collect();
                let view = g.view(&x);
                if !view.st_connected(0, n - 1) {
                    continue;
                }
                let mut o = InputOracle::new(x.clone());
                let out = general_path_finder(&g, &mut o, 0.05, &Config::faithful(), &mut rng).unwrap();
                let path = out.success().expect("faithful run succeeds");
                assert!(view.is_walkable(&path));
                assert_eq!(path.first().unwrap().0, 0);
                assert_eq!(path.last().unwrap().1, n - 1);
                assert!(o.ledger().modeled_total() > 0.0);
            }
        }
    }
}
