//! Batch commands and their JSON reports.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    cutset_finder, edge_finder, general_path_finder, single_path_finder, trial_seed, CutsetParams, Outcome, PathLength,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::families::{generate, FamilyJson};
use crate::flow::{serialize_resistance, FlowJson, LaplacianSolver, Multigraph};
use crate::graph::{undirected, Graph, GraphJson, InputOracle, SubgraphView, Vertex};
use crate::ledger::QueryLedger;
use crate::quantum::Simulator;
use crate::span::{build_stconn_program, default_bounds_stconn};
use crate::verify::{run_all, SuiteReport, VerifyOptions};

/// Whether a command reached its goal; algorithmic failures map to exit code 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    Failure,
}

/// Every command's output, discriminated by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Flow(FlowReport),
    Resistance(ResistanceReport),
    SampleEdge(SampleEdgeReport),
    FindPath(FindPathReport),
    FindCutset(FindCutsetReport),
    Verify(VerifyReport),
    Bench(BenchReport),
    Generate(GenerateReport),
}

impl Report {
    pub fn status(&self) -> Status {
        match self {
            Report::Flow(_) | Report::Resistance(_) | Report::Generate(_) => Status::Success,
            Report::SampleEdge(r) => r.status,
            Report::FindPath(r) => r.status,
            Report::FindCutset(r) => r.status,
            Report::Verify(r) => r.status,
            Report::Bench(r) => r.status,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Success => 0,
            Status::Failure => 2,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Undirected edge label `u-v` with `u < v`.
pub fn edge_label(a: Vertex, b: Vertex) -> String {
    let (u, v) = undirected(a, b);
    format!("{u}-{v}")
}

/// Summary statistics of per-trial ledgers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerStats {
    pub trials: u64,
    pub median_total: f64,
    pub mean_total: f64,
    pub min_total: f64,
    pub max_total: f64,
    pub median_exact: f64,
    pub median_modeled: f64,
    pub conserved: bool,
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

impl LedgerStats {
    pub fn from_ledgers(ledgers: &[QueryLedger]) -> Self {
        if ledgers.is_empty() {
            return LedgerStats { conserved: true, ..Default::default() };
        }
        let mut total: Vec<f64> = ledgers.iter().map(|l| l.total()).collect();
        let mut exact: Vec<f64> = ledgers.iter().map(|l| l.exact_total() as f64).collect();
        let mut modeled: Vec<f64> = ledgers.iter().map(|l| l.modeled_total()).collect();
        let mean_total = total.iter().sum::<f64>() / total.len() as f64;
        LedgerStats {
            trials: ledgers.len() as u64,
            min_total: total.iter().copied().fold(f64::INFINITY, f64::min),
            max_total: total.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            median_total: median(&mut total),
            mean_total,
            median_exact: median(&mut exact),
            median_modeled: median(&mut modeled),
            conserved: ledgers.iter().all(QueryLedger::is_conserved),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    pub flow: FlowJson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceReport {
    pub s: Vertex,
    pub t: Vertex,
    #[serde(rename = "R", serialize_with = "serialize_resistance")]
    pub r: f64,
}

pub fn cmd_flow(json: &GraphJson) -> Result<Report> {
    let (g, oracle) = json.into_instance()?;
    Ok(Report::Flow(FlowReport { flow: FlowJson::compute(&g.view(oracle.trusted_x()))? }))
}

pub fn cmd_resistance(json: &GraphJson) -> Result<Report> {
    let (g, oracle) = json.into_instance()?;
    let r = crate::flow::effective_resistance(&g.view(oracle.trusted_x()), g.s(), g.t());
    Ok(Report::Resistance(ResistanceReport { s: g.s(), t: g.t(), r }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleEdgeReport {
    pub status: Status,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub successes: u64,
    pub failures: u64,
    pub failure_rate: f64,
    /// Undirected edge counts over successful trials.
    pub counts: BTreeMap<String, u64>,
    pub empirical: BTreeMap<String, f64>,
    /// Undirected `q` of `G(x)`.
    pub q: BTreeMap<String, f64>,
    pub tv: f64,
    pub tv_bound: f64,
    /// Successful samples lying on some self-avoiding st-path; absent when enumeration is too large.
    pub on_path_rate: Option<f64>,
    pub ledger: LedgerStats,
}

/// Undirected edges lying on some self-avoiding st-path of `view`, if enumerable.
fn path_edges(view: &SubgraphView<'_>) -> Option<BTreeSet<(Vertex, Vertex)>> {
    let paths = view.enumerate_st_paths().ok()?;
    Some(paths.iter().flat_map(|p| p.windows(2).map(|w| undirected(w[0], w[1])).collect::<Vec<_>>()).collect())
}

fn undirected_q(view: &SubgraphView<'_>) -> Result<BTreeMap<String, f64>> {
    let mg = Multigraph::from_view(view);
    let solver = LaplacianSolver::new(mg);
    let flows = solver.edge_flows(view.s(), view.t())?;
    let r = solver.resistance(view.s(), view.t());
    Ok(solver.graph().edges.iter().zip(&flows).map(|(&(a, b), f)| (edge_label(a, b), f * f / r)).collect())
}

fn require_connected(g: &Graph, oracle: &InputOracle) -> Result<()> {
    if !g.view(oracle.trusted_x()).st_connected(g.s(), g.t()) {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Batch of `trials` independent edge samples with per-trial derived seeds.
pub fn cmd_sample_edge(json: &GraphJson, p: f64, trials: u64, seed: u64, config: &Config) -> Result<Report> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let (g, oracle) = json.into_instance()?;
    require_connected(&g, &oracle)?;
    let view = g.view(oracle.trusted_x());
    let q = undirected_q(&view)?;
    let on_path = path_edges(&view);
    let program = build_stconn_program(&g);
    let bounds = default_bounds_stconn(g.vertex_count(), config.c_minus)?;
    let sim = Simulator::new(*config);
    let mut counts: BTreeMap<String, u64> = q.keys().map(|k| (k.clone(), 0)).collect();
    let mut ledgers = Vec::with_capacity(trials as usize);
    let (mut successes, mut on) = (0u64, 0u64);
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i));
        let mut o = oracle.clone();
        if let Outcome::Success(e) = edge_finder(&program, &mut o, p, &bounds, &sim, &mut rng)? {
            successes += 1;
            *counts.entry(edge_label(e.from, e.to)).or_insert(0) += 1;
            if on_path.as_ref().is_some_and(|s| s.contains(&undirected(e.from, e.to))) {
                on += 1;
            }
        }
        ledgers.push(o.take_ledger());
    }
    let empirical: BTreeMap<String, f64> = counts
        .iter()
        .map(|(k, &c)| (k.clone(), if successes > 0 { c as f64 / successes as f64 } else { 0.0 }))
        .collect();
    let tv = 0.5 * empirical.iter().map(|(k, &e)| (e - q.get(k).copied().unwrap_or(0.0)).abs()).sum::<f64>();
    Ok(Report::SampleEdge(SampleEdgeReport {
        status: if successes > 0 { Status::Success } else { Status::Failure },
        p,
        trials,
        seed,
        successes,
        failures: trials - successes,
        failure_rate: (trials - successes) as f64 / trials as f64,
        counts,
        empirical,
        q,
        tv,
        tv_bound: 3.0 * p.sqrt(),
        on_path_rate: on_path.map(|_| if successes > 0 { on as f64 / successes as f64 } else { 0.0 }),
        ledger: LedgerStats::from_ledgers(&ledgers),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    Single,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindPathReport {
    pub status: Status,
    pub mode: PathMode,
    pub p: f64,
    pub seed: u64,
    /// Undirected edges for the single-path finder, a walk from `s` for the general finder.
    pub outcome: Outcome<Vec<(Vertex, Vertex)>>,
    /// Whether the output is an st-path of `G(x)`.
    pub valid: bool,
    pub ledger: QueryLedger,
}

/// Whether the undirected `edges` are exactly the edges of a simple st-path in `view`.
pub fn is_st_path_edge_set(view: &SubgraphView<'_>, edges: &[(Vertex, Vertex)]) -> bool {
    let (s, t) = (view.s(), view.t());
    let mut left: BTreeSet<(Vertex, Vertex)> = edges.iter().map(|&(a, b)| undirected(a, b)).collect();
    if left.len() != edges.len() || edges.is_empty() {
        return false;
    }
    let mut seq = vec![s];
    let mut cur = s;
    while cur != t {
        let next = left.iter().find(|&&(a, b)| a == cur || b == cur).copied();
        let Some(e) = next else { return false };
        left.remove(&e);
        cur = if e.0 == cur { e.1 } else { e.0 };
        seq.push(cur);
    }
    left.is_empty() && view.is_st_path(&seq)
}

/// Single or general path finding on one instance; `s = t` gives the empty path.
pub fn cmd_find_path(
    json: &GraphJson,
    mode: PathMode,
    p: f64,
    length: PathLength,
    seed: u64,
    config: &Config,
) -> Result<Report> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
    }
    if json.s == json.t {
        if json.s >= json.n {
            return Err(Error::VertexOutOfRange { vertex: json.s, n: json.n });
        }
        return Ok(Report::FindPath(FindPathReport {
            status: Status::Success,
            mode,
            p,
            seed,
            outcome: Outcome::Success(Vec::new()),
            valid: true,
            ledger: QueryLedger::new(),
        }));
    }
    let (g, mut oracle) = json.into_instance()?;
    require_connected(&g, &oracle)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = match mode {
        PathMode::Single => single_path_finder(&g, &mut oracle, p, length, &Simulator::new(*config), &mut rng)?,
        PathMode::General => general_path_finder(&g, &mut oracle, p, config, &mut rng)?,
    };
    let view = g.view(oracle.trusted_x());
    let valid = match (&outcome, mode) {
        (Outcome::Success(e), PathMode::Single) => is_st_path_edge_set(&view, e),
        (Outcome::Success(seq), PathMode::General) => {
            view.is_walkable(seq) && seq.first().map(|e| e.0) == Some(g.s()) && seq.last().map(|e| e.1) == Some(g.t())
        }
        (Outcome::Failure(_), _) => false,
    };
    Ok(Report::FindPath(FindPathReport {
        status: if outcome.is_success() { Status::Success } else { Status::Failure },
        mode,
        p,
        seed,
        outcome,
        valid,
        ledger: oracle.take_ledger(),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindCutsetReport {
    pub status: Status,
    pub seed: u64,
    pub r_bound: f64,
    pub g_bound: f64,
    pub eps: f64,
    pub runs: u64,
    pub failures: u64,
    pub edges: Vec<(Vertex, Vertex)>,
    /// Whether removing the returned edges separates `s` and `t` in `G(x)`.
    pub is_cut: bool,
    /// `R_{s,t}(G(x)) ≤ R_bound`.
    pub resistance_promise: bool,
    /// Some cut has `θ*(e)² ≥ g_bound` on every edge.
    pub flow_promise: bool,
    pub ledger: QueryLedger,
}

/// Cut-set finding; promise violations are reported, not rejected.
pub fn cmd_find_cutset(json: &GraphJson, r_bound: f64, g_bound: f64, seed: u64, config: &Config) -> Result<Report> {
    let (g, mut oracle) = json.into_instance()?;
    require_connected(&g, &oracle)?;
    let x = oracle.trusted_x().to_vec();
    let view = g.view(&x);
    let solver = LaplacianSolver::new(Multigraph::from_view(&view));
    let r = solver.resistance(g.s(), g.t());
    let flows = solver.edge_flows(g.s(), g.t())?;
    let heavy: Vec<(Vertex, Vertex)> = solver
        .graph()
        .edges
        .iter()
        .zip(&flows)
        .filter(|(_, f)| **f * **f >= g_bound * (1.0 - 1e-9))
        .map(|(&e, _)| e)
        .collect();
    let separates = |set: &[(Vertex, Vertex)]| -> Result<bool> {
        let rest = g.remove_edges(set)?;
        Ok(!rest.view(&x).st_connected(g.s(), g.t()))
    };
    let flow_promise = separates(&heavy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = CutsetParams { r_bound, g_bound };
    let rep = cutset_finder(&g, &mut oracle, &params, &Simulator::new(*config), &mut rng)?;
    let present: Vec<(Vertex, Vertex)> =
        rep.edges.iter().copied().filter(|&(a, b)| view.has_present_edge(a, b)).collect();
    let is_cut = separates(&present)?;
    Ok(Report::FindCutset(FindCutsetReport {
        status: if is_cut { Status::Success } else { Status::Failure },
        seed,
        r_bound,
        g_bound,
        eps: rep.eps,
        runs: rep.runs,
        failures: rep.failures,
        edges: rep.edges,
        is_cut,
        resistance_promise: r <= r_bound * (1.0 + 1e-9),
        flow_promise,
        ledger: oracle.take_ledger(),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub status: Status,
    pub options: VerifyOptions,
    pub suites: Vec<SuiteReport>,
}

pub fn cmd_verify(opts: &VerifyOptions, config: &Config) -> Result<Report> {
    let suites = run_all(config, opts)?;
    let ok = suites.iter().all(SuiteReport::passed);
    Ok(Report::Verify(VerifyReport {
        status: if ok { Status::Success } else { Status::Failure },
        options: *opts,
        suites,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchAlgorithm {
    SampleEdge,
    SinglePath,
    GeneralPath,
}

impl BenchAlgorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sample_edge" | "sample-edge" => Ok(BenchAlgorithm::SampleEdge),
            "single_path" | "single-path" | "single" => Ok(BenchAlgorithm::SinglePath),
            "general_path" | "general-path" | "general" => Ok(BenchAlgorithm::GeneralPath),
            _ => Err(Error::InvalidParameter(format!("unknown bench algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub successes: u64,
    pub ledger: LedgerStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub status: Status,
    pub family: String,
    pub params: BTreeMap<String, String>,
    pub size_param: String,
    pub algorithm: BenchAlgorithm,
    pub p: f64,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln(median total)` against `ln(size)`.
    pub slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two usable points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Run `algorithm` on `family` at every value of `size_param` in `sizes`.
#[allow(clippy::too_many_arguments)]
pub fn cmd_bench(
    family: &str,
    params: &BTreeMap<String, String>,
    size_param: &str,
    sizes: &[usize],
    algorithm: BenchAlgorithm,
    p: f64,
    trials: u64,
    seed: u64,
    config: &Config,
) -> Result<Report> {
    if sizes.is_empty() || trials == 0 {
        return Err(Error::InvalidParameter("need at least one size and one trial".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
    }
    let sim = Simulator::new(*config);
    let mut rows = Vec::new();
    for (si, &size) in sizes.iter().enumerate() {
        let mut kv = params.clone();
        kv.insert(size_param.to_string(), size.to_string());
        let inst = generate(family, &kv, config.expander_gap)?;
        require_connected(&inst.graph, &inst.oracle)?;
        let program = build_stconn_program(&inst.graph);
        let bounds = default_bounds_stconn(inst.graph.vertex_count(), config.c_minus)?;
        let mut ledgers = Vec::new();
        let mut successes = 0;
        for i in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(trial_seed(seed, si as u64), i));
            let mut o = inst.oracle.clone();
            let ok = match algorithm {
                BenchAlgorithm::SampleEdge => edge_finder(&program, &mut o, p, &bounds, &sim, &mut rng)?.is_success(),
                BenchAlgorithm::SinglePath => {
                    single_path_finder(&inst.graph, &mut o, p, PathLength::Trusted, &sim, &mut rng)?.is_success()
                }
                BenchAlgorithm::GeneralPath => {
                    general_path_finder(&inst.graph, &mut o, p, config, &mut rng)?.is_success()
                }
            };
            successes += u64::from(ok);
            ledgers.push(o.take_ledger());
        }
        rows.push(BenchRow { size, successes, ledger: LedgerStats::from_ledgers(&ledgers) });
    }
    let slope = log_log_slope(&rows.iter().map(|r| (r.size as f64, r.ledger.median_total)).collect::<Vec<_>>());
    Ok(Report::Bench(BenchReport {
        status: if slope.is_some() || rows.len() == 1 { Status::Success } else { Status::Failure },
        family: family.to_string(),
        params: params.clone(),
        size_param: size_param.to_string(),
        algorithm,
        p,
        trials,
        seed,
        rows,
        slope,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateReport {
    pub instance: FamilyJson,
}

pub fn cmd_generate(family: &str, params: &BTreeMap<String, String>, config: &Config) -> Result<Report> {
    Ok(Report::Generate(GenerateReport { instance: generate(family, params, config.expander_gap)?.to_json() }))
}
