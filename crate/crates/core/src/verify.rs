//! Oracle-equivalence suites over the small-graph corpus.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{general_path_finder, single_path_finder, trial_seed, Outcome, PathLength};
use crate::config::Config;
use crate::corpus::{connected_graphs, CorpusGraph};
use crate::error::Result;
use crate::flow::{random_walk_flows, spanning_tree_count, LaplacianSolver, Multigraph, TreeCensus};
use crate::graph::{Graph, InputOracle};
use crate::quantum::{
    build_u, verify_effective_spectral_gap, zero_outcome_probability, PhaseEstimationModel, Simulator,
    WitnessDecomposition,
};
use crate::span::{
    approx_negative_witness, build_stconn_program, default_bounds_stconn, positive_witness, verify_inverse_witness,
};

/// Largest number of individual failure messages kept per suite.
const MAX_MESSAGES: usize = 20;

/// Outcome of one suite.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub instances: u64,
    pub checks: u64,
    pub failures: u64,
    /// Largest observed residual per check kind.
    pub max_residual: BTreeMap<String, f64>,
    pub messages: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.into(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }

    /// Record `value ≤ bound` under `kind`; `value` is tracked as a residual.
    fn check(&mut self, kind: &str, value: f64, bound: f64, ctx: impl FnOnce() -> String) {
        self.checks += 1;
        let slot = self.max_residual.entry(kind.into()).or_insert(0.0);
        if value.is_nan() || value > *slot {
            *slot = value;
        }
        if !(value <= bound) {
            self.fail(format!("{kind}: {value:e} > {bound:e} at {}", ctx()));
        }
    }

    fn require(&mut self, kind: &str, ok: bool, ctx: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(format!("{kind} at {}", ctx()));
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        if self.messages.len() < MAX_MESSAGES {
            self.messages.push(msg);
        }
    }
}

/// Corpus and suite sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Largest corpus vertex count.
    pub max_n: usize,
    /// Largest vertex count for the spectral suite; larger instances are sampled.
    pub spectral_max_n: usize,
    /// Number of sampled larger instances in the spectral suite.
    pub spectral_samples: usize,
    pub walk_instances: usize,
    pub walk_trials: u64,
    pub random_states: usize,
    pub projector_instances: usize,
    /// Tolerance exponent for the finder suite.
    pub finder_p: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_n: 7,
            spectral_max_n: 7,
            spectral_samples: 100,
            walk_instances: 20,
            walk_trials: 100_000,
            random_states: 100,
            projector_instances: 100,
            finder_p: 0.05,
            seed: 0,
        }
    }
}

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 5] = ["flow", "distribution", "span", "spectral", "finders"];

fn label(g: &CorpusGraph, s: usize, t: usize) -> String {
    format!("n={} edges={:?} s={s} t={t}", g.n, g.edges)
}

/// Laplacian flow against tree-ratio flow, energy against resistance, and random walks.
pub fn flow_suite(corpus: &[CorpusGraph], opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("flow");
    for g in corpus {
        let mg = Multigraph::new(g.n, g.edges.clone());
        let solver = LaplacianSolver::new(mg.clone());
        let census = TreeCensus::new(&mg)?;
        for (s, t) in g.terminal_pairs() {
            rep.instances += 1;
            let flows = solver.edge_flows(s, t)?;
            let r = solver.resistance(s, t);
            for (k, &f) in flows.iter().enumerate() {
                rep.check("laplacian_vs_trees", (f - census.flow(s, t, k)).abs(), 1e-9, || label(g, s, t));
            }
            let energy: f64 = flows.iter().map(|f| f * f).sum();
            rep.check("energy_vs_resistance", (energy - r).abs(), 1e-9, || label(g, s, t));
            let mut out = vec![0.0; g.n];
            for (&(a, b), &f) in g.edges.iter().zip(&flows) {
                out[a] += f;
                out[b] -= f;
            }
            let cons = (0..g.n)
                .map(|v| {
                    (out[v]
                        - if v == s {
                            1.0
                        } else if v == t {
                            -1.0
                        } else {
                            0.0
                        })
                    .abs()
                })
                .fold(0.0, f64::max);
            rep.check("conservation", cons, 1e-9, || label(g, s, t));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pool: Vec<&CorpusGraph> = corpus.iter().filter(|g| g.n >= 2).collect();
    for i in 0..if pool.is_empty() { 0 } else { opts.walk_instances } {
        let g = pool[rng.random_range(0..pool.len())];
        let s = rng.random_range(0..g.n);
        let t = (s + rng.random_range(1..g.n)) % g.n;
        let mg = Multigraph::new(g.n, g.edges.clone());
        let exact = LaplacianSolver::new(mg.clone()).edge_flows(s, t)?;
        let mut walk_rng = ChaCha8Rng::seed_from_u64(trial_seed(opts.seed, i as u64));
        let est = random_walk_flows(&mg, s, t, opts.walk_trials, &mut walk_rng)?;
        for (e, &f) in est.iter().zip(&exact) {
            let dev = (e.mean - f).abs();
            let z = if e.stderr > 0.0 {
                dev / e.stderr
            } else if dev < 1e-9 {
                0.0
            } else {
                f64::INFINITY
            };
            rep.check("walk_standard_errors", z, 4.0, || label(g, s, t));
        }
    }
    Ok(rep)
}

/// `q` from the flow against the tree-ratio product, normalization and path support.
pub fn distribution_suite(corpus: &[CorpusGraph]) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("distribution");
    for g in corpus.iter().filter(|g| g.n >= 2) {
        let mg = Multigraph::new(g.n, g.edges.clone());
        let solver = LaplacianSolver::new(mg.clone());
        let census = TreeCensus::new(&mg)?;
        let graph = Graph::new(g.n, &g.edges, 0, 1)?;
        for (s, t) in g.terminal_pairs() {
            rep.instances += 1;
            let flows = solver.edge_flows(s, t)?;
            let r = solver.resistance(s, t);
            // each undirected edge carries θ²/R, split evenly over its two directions
            let q: Vec<f64> = flows.iter().map(|f| f * f / r).collect();
            rep.check("normalization", (q.iter().sum::<f64>() - 1.0).abs(), 1e-9, || label(g, s, t));
            let direct = g.edges.contains(&(s, t));
            if !direct {
                let merged = spanning_tree_count(&mg.identify(s, t))? as f64;
                for (k, &qk) in q.iter().enumerate() {
                    let d = census.count(s, t, k, 0) as f64 - census.count(s, t, k, 1) as f64;
                    let via = d * d / (census.total as f64 * merged);
                    rep.check("q_vs_trees", (qk - via).abs(), 1e-9, || label(g, s, t));
                }
            }
            let inst = graph.with_terminals(s, t)?;
            let paths = inst.full_view().enumerate_st_paths()?;
            for (&(a, b), &f) in g.edges.iter().zip(&flows) {
                if f.abs() <= 1e-9 {
                    continue;
                }
                let (u, v) = if f > 0.0 { (a, b) } else { (b, a) };
                let on_path = paths.iter().any(|p| p.windows(2).any(|w| w[0] == u && w[1] == v));
                rep.require("path_support", on_path, || format!("{} edge ({u},{v})", label(g, s, t)));
            }
        }
    }
    Ok(rep)
}

/// Positive witness size, the inverse-witness identity and the negative witness bounds.
pub fn span_suite(corpus: &[CorpusGraph], config: &Config) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("span");
    for g in corpus {
        let solver = LaplacianSolver::new(Multigraph::new(g.n, g.edges.clone()));
        for (s, t) in g.terminal_pairs() {
            rep.instances += 1;
            let graph = g.with_terminals(s, t)?;
            let sp = build_stconn_program(&graph);
            let x = vec![true; graph.m()];
            let pos = positive_witness(sp.program(), &x)?;
            let r = solver.resistance(s, t);
            rep.check("w_plus_vs_half_resistance", (pos.w_plus - r / 2.0).abs(), 1e-9, || label(g, s, t));
            let res = verify_inverse_witness(sp.program(), &x)?;
            rep.check("inverse_witness_residual", res, 1e-7, || label(g, s, t));
            let neg = approx_negative_witness(sp.program(), &x)?;
            rep.check("product_at_least_one", 1.0 - pos.w_plus * neg.neg_size, 1e-9, || label(g, s, t));
            let bound = default_bounds_stconn(g.n, config.c_minus)?.w_minus_tilde;
            rep.check("negative_size_within_bound", neg.neg_size - bound, 0.0, || label(g, s, t));
        }
    }
    Ok(rep)
}

const THETA_GRID: [u32; 6] = [1, 2, 3, 4, 6, 8];
const ALPHA_GRID: [i32; 4] = [0, 1, 2, 4];
const SANDWICH_MODELS: [(f64, f64); 2] = [(0.5, 0.1), (0.1, 0.01)];

/// Fixed points, low-phase overlap of `ψ̃₋`, the effective spectral gap and the phase-estimation sandwich.
pub fn spectral_suite(corpus: &[CorpusGraph], config: &Config, opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("spectral");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5bec_0000);
    let mut instances: Vec<(&CorpusGraph, usize, usize)> = Vec::new();
    let mut large = Vec::new();
    for g in corpus {
        for (s, t) in g.terminal_pairs() {
            if g.n <= opts.spectral_max_n {
                instances.push((g, s, t));
            } else {
                large.push((g, s, t));
            }
        }
    }
    for _ in 0..opts.spectral_samples.min(large.len()) {
        let k = rng.random_range(0..large.len());
        instances.push(large.swap_remove(k));
    }
    let models: Vec<PhaseEstimationModel> =
        SANDWICH_MODELS.iter().map(|&(th, e)| PhaseEstimationModel::new(th, e)).collect::<Result<_>>()?;
    for (g, s, t) in instances {
        rep.instances += 1;
        let graph = g.with_terminals(s, t)?;
        let sp = build_stconn_program(&graph);
        let x = vec![true; graph.m()];
        let pos = positive_witness(sp.program(), &x)?;
        let w_minus = default_bounds_stconn(g.n, config.c_minus)?.w_minus_tilde;
        for (ai, &i) in ALPHA_GRID.iter().enumerate() {
            let alpha = 2f64.powi(i) / w_minus.sqrt();
            let u = build_u(sp.program(), &x, alpha)?;
            let d = WitnessDecomposition::new(&pos.w, pos.w_plus, alpha)?;
            let scale = d.psi_plus.norm().max(1.0);
            rep.check("fixes_psi_plus", (u.u() * &d.psi_plus - &d.psi_plus).norm() / scale, 1e-9, || label(g, s, t));
            let su = u.spectral();
            let p0 = su.low_phase_weight_real(&d.psi_minus, 0.0).sqrt();
            rep.check("zero_phase_psi_minus", p0, 1e-9, || label(g, s, t));
            for &k in &THETA_GRID {
                let theta = std::f64::consts::PI / 2f64.powi(k as i32);
                let lhs = su.low_phase_weight_real(&d.psi_minus, theta).sqrt();
                let bound = theta * alpha * w_minus.sqrt();
                rep.check("low_overlap_margin", lhs - bound, 1e-9, || {
                    format!("{} Θ={theta} α={alpha}", label(g, s, t))
                });
            }
            if ai == 0 {
                for _ in 0..opts.random_states {
                    let psi = DVector::from_fn(su.dim(), |_, _| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    });
                    let psi = psi.unscale(psi.norm());
                    for m in &models {
                        let pr = zero_outcome_probability(su, &psi, m);
                        let lo = su.low_phase_weight(&psi, 0.0);
                        let hi = su.low_phase_weight(&psi, m.theta) + m.eps;
                        rep.check("sandwich_margin", (lo - pr).max(pr - hi), 1e-12, || label(g, s, t));
                    }
                }
            }
        }
    }
    for _ in 0..opts.projector_instances {
        let n = rng.random_range(2..8);
        let proj = |rng: &mut ChaCha8Rng| {
            let k = rng.random_range(1..n);
            let m = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
            let q = m.qr().q();
            &q * q.transpose()
        };
        let pi = proj(&mut rng);
        let lambda = proj(&mut rng);
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let w = (DMatrix::<f64>::identity(n, n) - &lambda) * v;
        for theta in [0.0, 0.05, 0.3, 1.0, std::f64::consts::PI] {
            let ok = verify_effective_spectral_gap(&pi, &lambda, &w, theta)?;
            rep.require("effective_spectral_gap", ok, || format!("random projector pair n={n} Θ={theta}"));
        }
    }
    rep.instances += opts.projector_instances as u64;
    Ok(rep)
}

/// Both path finders with failure injection off.
///
/// The single-path finder is run on the instances whose `G(x)` has a unique
/// st-path; the general finder on every instance.
pub fn finder_suite(corpus: &[CorpusGraph], opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("finders");
    let config = Config::faithful();
    let sim = Simulator::new(config);
    let mut trial = 0u64;
    for g in corpus {
        for (s, t) in g.terminal_pairs() {
            rep.instances += 1;
            let graph = g.with_terminals(s, t)?;
            let x = vec![true; graph.m()];
            let paths = graph.full_view().enumerate_st_paths()?;
            trial += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(opts.seed, trial));
            let mut oracle = InputOracle::new(x.clone());
            match general_path_finder(&graph, &mut oracle, opts.finder_p, &config, &mut rng)? {
                Outcome::Success(seq) => {
                    let ok = graph.full_view().is_walkable(&seq)
                        && seq.first().map(|e| e.0) == Some(s)
                        && seq.last().map(|e| e.1) == Some(t);
                    rep.require("general_walkable", ok, || format!("{} got {seq:?}", label(g, s, t)));
                }
                Outcome::Failure(why) => rep.require("general_success", false, || format!("{} {why}", label(g, s, t))),
            }
            if paths.len() == 1 {
                let mut want: Vec<_> = paths[0].windows(2).map(|w| crate::graph::undirected(w[0], w[1])).collect();
                want.sort_unstable();
                let mut oracle = InputOracle::new(x);
                match single_path_finder(&graph, &mut oracle, opts.finder_p, PathLength::Trusted, &sim, &mut rng)? {
                    Outcome::Success(edges) => {
                        rep.require("single_exact", edges == want, || format!("{} got {edges:?}", label(g, s, t)))
                    }
                    Outcome::Failure(why) => {
                        rep.require("single_success", false, || format!("{} {why}", label(g, s, t)))
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Run one named suite on the corpus of graphs with at most `opts.max_n` vertices.
pub fn run_suite(name: &str, corpus: &[CorpusGraph], config: &Config, opts: &VerifyOptions) -> Result<SuiteReport> {
    match name {
        "flow" => flow_suite(corpus, opts),
        "distribution" => distribution_suite(corpus),
        "span" => span_suite(corpus, config),
        "spectral" => spectral_suite(corpus, config, opts),
        "finders" => finder_suite(corpus, opts),
        other => {
            Err(crate::error::Error::InvalidParameter(format!("unknown suite {other:?}; expected one of {SUITES:?}")))
        }
    }
}

/// Every suite in order.
pub fn run_all(config: &Config, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    let corpus = connected_graphs(opts.max_n)?;
    SUITES.iter().map(|s| run_suite(s, &corpus, config, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (Vec<CorpusGraph>, VerifyOptions) {
        let opts = VerifyOptions {
            max_n: 4,
            spectral_max_n: 3,
            spectral_samples: 3,
            walk_instances: 3,
            walk_trials: 5000,
            random_states: 5,
            projector_instances: 5,
            ..Default::default()
        };
        (connected_graphs(opts.max_n).unwrap(), opts)
    }

    #[test]
    fn suites_pass_on_small_corpus() {
        let (corpus, opts) = small();
        let config = Config::default();
        for name in SUITES {
            let rep = run_suite(name, &corpus, &config, &opts).unwrap();
            assert!(rep.passed(), "{name}: {:?}", rep.messages);
        }
        assert!(run_suite("nope", &corpus, &config, &opts).is_err());
    }

    #[test]
    fn report_records_failures() {
        let mut r = SuiteReport::new("x");
        r.check("k", 2.0, 1.0, || "here".into());
        r.check("k", f64::NAN, 1.0, || "nan".into());
        assert_eq!(r.failures, 2);
        assert!(!r.passed());
        assert!(SuiteReport::new("empty").failures == 0 && !SuiteReport::new("empty").passed());
    }
}
