//! Generators for the graph families used in tests and benchmarks, with verified ground truth.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{optimal_unit_flow, FlowJson, Multigraph};
use crate::flow::{sp_compose, sp_dual, SpTerm};
use crate::graph::{undirected, Graph, GraphJson, InputOracle, Vertex};

/// Tolerance for verifying generated truths.
const TRUTH_TOL: f64 = 1e-9;

/// Largest parent size accepted by the generators.
pub const MAX_FAMILY_VERTICES: usize = 4096;

/// Ground truth attached to a generated instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub flow: Option<FlowJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unique_path: Option<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_edge: Option<(Vertex, Vertex)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bridge: Option<(Vertex, Vertex)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut: Option<Vec<(Vertex, Vertex)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_term: Option<String>,
    /// Algebraic connectivity of each expander half.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub name: String,
    pub graph: Graph,
    pub oracle: InputOracle,
    pub truth: Truth,
}

/// Graph JSON with the truth block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJson {
    pub family: String,
    pub graph: GraphJson,
    pub truth: Truth,
}

impl FamilyInstance {
    fn finish(name: &str, graph: Graph, oracle: InputOracle, mut truth: Truth) -> Result<FamilyInstance> {
        let view = graph.view(oracle.trusted_x());
        let flow = FlowJson::compute(&view)?;
        if flow.r.is_finite() {
            let opt = optimal_unit_flow(&view)?;
            if (opt.energy() - flow.r).abs() > TRUTH_TOL * flow.r.max(1.0) {
                return Err(Error::Numerical("flow energy differs from resistance".into()));
            }
        }
        if let Some(path) = &truth.unique_path {
            if !view.is_st_path(path) {
                return Err(Error::Numerical("recorded path is not an st-path".into()));
            }
            if ((path.len() - 1) as f64 - flow.r).abs() > TRUTH_TOL * flow.r.max(1.0) {
                return Err(Error::Numerical("unique path length differs from resistance".into()));
            }
        }
        if let Some(cut) = &truth.cut {
            let pairs: Vec<_> = cut.to_vec();
            let rest = graph.remove_edges(&pairs)?;
            if rest.view(oracle.trusted_x()).st_connected(graph.s(), graph.t()) {
                return Err(Error::Numerical("recorded cut does not separate s and t".into()));
            }
        }
        truth.flow = Some(flow);
        Ok(FamilyInstance { name: name.to_string(), graph, oracle, truth })
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson {
            family: self.name.clone(),
            graph: GraphJson::from_instance(&self.graph, &self.oracle),
            truth: self.truth.clone(),
        }
    }

    pub fn flow(&self) -> &FlowJson {
        self.truth.flow.as_ref().expect("set at construction")
    }

    pub fn resistance(&self) -> f64 {
        self.flow().r
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_FAMILY_VERTICES {
        return Err(Error::Infeasible(format!("{n} vertices exceeds {MAX_FAMILY_VERTICES}")));
    }
    Ok(())
}

fn mask(g: &Graph, present: &[(Vertex, Vertex)]) -> Result<Vec<bool>> {
    let mut x = vec![false; g.m()];
    for &(a, b) in present {
        let k = g.edge_index(a, b).ok_or(Error::UnknownEdge(a, b))?;
        x[g.edges()[k].bit] = true;
    }
    Ok(x)
}

/// Parent graph shape for [`gen_path`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathParent {
    /// Only the path edges, plus isolated padding vertices.
    Path,
    /// The complete graph on all vertices.
    Complete,
}

/// Path `0 − 2 − … − 1` of length `len` with `s = 0`, `t = 1`, padded to `n` vertices.
pub fn gen_path(len: usize, n: Option<usize>, parent: PathParent) -> Result<FamilyInstance> {
    if len == 0 {
        return Err(Error::InvalidParameter("path length must be at least 1".into()));
    }
    let n = n.unwrap_or(len + 1);
    if n < len + 1 {
        return Err(Error::Infeasible(format!("a path of length {len} needs {} vertices, got {n}", len + 1)));
    }
    check_size(n)?;
    let mut seq = vec![0];
    seq.extend(2..len + 1);
    seq.push(1);
    let path_edges: Vec<_> = seq.windows(2).map(|w| (w[0], w[1])).collect();
    let g = match parent {
        PathParent::Path => Graph::new(n, &path_edges, 0, 1)?,
        PathParent::Complete => Graph::complete(n, 0, 1)?,
    };
    let x = mask(&g, &path_edges)?;
    let truth = Truth {
        unique_path: Some(seq),
        cut: Some(vec![undirected(path_edges[0].0, path_edges[0].1)]),
        params: params(&[("L", len.to_string()), ("n", n.to_string())]),
        ..Truth::default()
    };
    FamilyInstance::finish("path", g, InputOracle::new(x), truth)
}

/// Internally disjoint st-paths with the given lengths, `s = 0`, `t = 1`.
pub fn gen_parallel_paths(lengths: &[usize]) -> Result<FamilyInstance> {
    if lengths.is_empty() {
        return Err(Error::InvalidParameter("at least one path is required".into()));
    }
    if lengths.contains(&0) {
        return Err(Error::InvalidParameter("path lengths must be positive".into()));
    }
    if lengths.iter().filter(|&&l| l == 1).count() > 1 {
        return Err(Error::Infeasible("two paths of length 1 would be parallel edges".into()));
    }
    let n = 2 + lengths.iter().map(|l| l - 1).sum::<usize>();
    check_size(n)?;
    let mut next = 2;
    let mut edges = Vec::new();
    for &l in lengths {
        let mut prev = 0;
        for _ in 1..l {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
        edges.push((prev, 1));
    }
    let g = Graph::new(n, &edges, 0, 1)?;
    let x = vec![true; g.m()];
    let unique_path = (lengths.len() == 1).then(|| {
        let mut p = vec![0];
        p.extend(2..lengths[0] + 1);
        p.push(1);
        p
    });
    let truth = Truth { unique_path, params: params(&[("lengths", join(lengths))]), ..Truth::default() };
    FamilyInstance::finish("parallel_paths", g, InputOracle::new(x), truth)
}

/// A unique st-path of length `len` among distractor components, with absent decoy edges in the parent.
pub fn gen_unique_path_clutter(len: usize, n: usize, seed: u64) -> Result<FamilyInstance> {
    if len == 0 {
        return Err(Error::InvalidParameter("path length must be at least 1".into()));
    }
    if n < len + 1 {
        return Err(Error::Infeasible(format!("a path of length {len} needs {} vertices, got {n}", len + 1)));
    }
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Vertex> = (0..n).collect();
    labels.shuffle(&mut rng);
    let path: Vec<Vertex> = labels[..=len].to_vec();
    let rest: Vec<Vertex> = labels[len + 1..].to_vec();
    let mut present = BTreeSet::new();
    for w in path.windows(2) {
        present.insert(undirected(w[0], w[1]));
    }
    let mut i = 0;
    while i < rest.len() {
        let size = rng.random_range(2..=4).min(rest.len() - i);
        let comp = &rest[i..i + size];
        for k in 1..size {
            let j = rng.random_range(0..k);
            present.insert(undirected(comp[k], comp[j]));
        }
        if size >= 3 && rng.random_bool(0.5) {
            let a = rng.random_range(0..size);
            let b = (a + rng.random_range(1..size)) % size;
            present.insert(undirected(comp[a], comp[b]));
        }
        i += size;
    }
    let mut absent = BTreeSet::new();
    for &w in &rest {
        let p = path[rng.random_range(0..path.len())];
        absent.insert(undirected(w, p));
    }
    for _ in 0..len / 2 {
        let a = rng.random_range(0..path.len());
        let b = rng.random_range(0..path.len());
        if a.abs_diff(b) > 1 {
            absent.insert(undirected(path[a], path[b]));
        }
    }
    let parent: Vec<_> = present.iter().chain(absent.iter().filter(|e| !present.contains(e))).copied().collect();
    let g = Graph::new(n, &parent, path[0], path[len])?;
    let present: Vec<_> = present.into_iter().collect();
    let x = mask(&g, &present)?;
    let truth = Truth {
        unique_path: Some(path.clone()),
        params: params(&[("L", len.to_string()), ("n", n.to_string()), ("seed", seed.to_string())]),
        ..Truth::default()
    };
    FamilyInstance::finish("clutter", g, InputOracle::new(x), truth)
}

/// Hard instance for classical edge finding.
///
/// Two arms of length `(L−3)/2` leave `s` and two leave `t`; the arm ends are joined to fans
/// `S_s^{(b)}`, `S_t^{(b)}` of size `2^{(ℓ−1)/2}`. The middle edges `u_{b,σ} v_{b,σ′}` are the
/// real input bits and exactly the one labeled `sigma_star = bσσ′` is present. Arm and fan edges
/// are free ones, every other edge of `K_n` a free zero.
pub fn gen_lower_bound_family(ell: usize, len: usize, sigma_star: &str) -> Result<FamilyInstance> {
    if ell == 0 || ell.is_multiple_of(2) {
        return Err(Error::Infeasible(format!("ℓ must be odd and positive, got {ell}")));
    }
    if len < 3 || len.is_multiple_of(2) {
        return Err(Error::Infeasible(format!("L must be odd and at least 3, got {len}")));
    }
    let bits: Vec<usize> = sigma_star
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidParameter(format!("sigma_star must be a bit string, got {sigma_star:?}"))),
        })
        .collect::<Result<_>>()?;
    if bits.len() != ell {
        return Err(Error::InvalidParameter(format!("sigma_star must have {ell} bits, got {}", bits.len())));
    }
    let half = (ell - 1) / 2;
    if half >= 11 {
        return Err(Error::Infeasible(format!("ℓ = {ell} produces too many vertices")));
    }
    let fan = 1usize << half;
    let arm = (len - 3) / 2;
    let n = 2 + 4 * arm + 4 * fan;
    check_size(n)?;
    let (s, t) = (0, 1);
    let mut next = 2;
    let mut black = Vec::new();
    // fans[side][b][σ]
    let mut fans = vec![vec![Vec::new(); 2]; 2];
    for (side, root) in [s, t].into_iter().enumerate() {
        for fan_set in fans[side].iter_mut() {
            let mut hub = root;
            for _ in 0..arm {
                black.push((hub, next));
                hub = next;
                next += 1;
            }
            for _ in 0..fan {
                black.push((hub, next));
                fan_set.push(next);
                next += 1;
            }
        }
    }
    debug_assert_eq!(next, n);
    let value = |b: &[usize]| b.iter().fold(0, |acc, &x| 2 * acc + x);
    let (b, sigma, sigma2) = (bits[0], value(&bits[1..1 + half]), value(&bits[1 + half..]));
    let planted = undirected(fans[0][b][sigma], fans[1][b][sigma2]);
    let g = Graph::complete(n, s, t)?;
    let black_bits: BTreeSet<usize> =
        black.iter().map(|&(a, c)| g.edges()[g.edge_index(a, c).expect("complete parent")].bit).collect();
    let mut real = BTreeSet::new();
    for bb in 0..2 {
        for &u in &fans[0][bb] {
            for &v in &fans[1][bb] {
                real.insert(g.edges()[g.edge_index(u, v).expect("complete parent")].bit);
            }
        }
    }
    let free_zeros: Vec<usize> = (0..g.m()).filter(|i| !black_bits.contains(i) && !real.contains(i)).collect();
    let free_ones: Vec<usize> = black_bits.into_iter().collect();
    let mut present = black.clone();
    present.push(planted);
    let x = mask(&g, &present)?;
    let oracle = InputOracle::with_free_bits(x, &free_ones, &free_zeros)?;
    // s, arm, u_{b,σ}, v_{b,σ′}, arm reversed, t
    let mut path = vec![s];
    let arm_vertices = |side: usize, bb: usize| -> Vec<Vertex> {
        let start = 2 + side * 2 * (arm + fan) + bb * (arm + fan);
        (start..start + arm).collect()
    };
    path.extend(arm_vertices(0, b));
    path.push(planted.0.min(planted.1));
    path.push(planted.0.max(planted.1));
    let mut back = arm_vertices(1, b);
    back.reverse();
    path.extend(back);
    path.push(t);
    let truth = Truth {
        unique_path: Some(path),
        planted_edge: Some(planted),
        cut: Some(vec![planted]),
        params: params(&[("ell", ell.to_string()), ("L", len.to_string()), ("sigma", sigma_star.to_string())]),
        ..Truth::default()
    };
    FamilyInstance::finish("lower_bound", g, oracle, truth)
}

/// Second-smallest Laplacian eigenvalue.
pub fn algebraic_connectivity(n: usize, edges: &[(Vertex, Vertex)]) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let l: DMatrix<f64> = Multigraph::new(n, edges.to_vec()).laplacian();
    let mut ev: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev[1]
}

/// Uniform simple `d`-regular graph on `h` vertices by the pairing model with rejection.
pub fn random_regular(h: usize, d: usize, rng: &mut impl Rng) -> Result<Vec<(Vertex, Vertex)>> {
    if d >= h || (h * d) % 2 == 1 {
        return Err(Error::Infeasible(format!("no {d}-regular simple graph on {h} vertices")));
    }
    let mut points: Vec<Vertex> = (0..h).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    for _ in 0..100_000 {
        points.shuffle(rng);
        let mut seen = BTreeSet::new();
        let ok = points.chunks(2).all(|p| p[0] != p[1] && seen.insert(undirected(p[0], p[1])));
        if ok {
            return Ok(seen.into_iter().collect());
        }
    }
    Err(Error::Infeasible(format!("pairing model kept producing multigraphs for d = {d}, h = {h}")))
}

/// Two random `d`-regular halves of `n/2` vertices joined by one uniformly chosen bridge.
///
/// Each half is resampled until connected with algebraic connectivity at least `gap`.
/// `s = 0` lies in the first half and `t = n/2` in the second; the parent contains every
/// cross edge, and only the bridge is present.
pub fn gen_expander_bridge(n: usize, d: usize, seed: u64, gap: f64) -> Result<FamilyInstance> {
    if n % 2 == 1 || n < 2 {
        return Err(Error::Infeasible(format!("n must be even, got {n}")));
    }
    if d < 3 {
        return Err(Error::Infeasible(format!("d must be at least 3, got {d}")));
    }
    let h = n / 2;
    if d >= h || (d * h) % 2 == 1 {
        return Err(Error::Infeasible(format!("no {d}-regular graph on {h} vertices")));
    }
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_half = |rng: &mut ChaCha8Rng| -> Result<(Vec<(Vertex, Vertex)>, f64)> {
        for _ in 0..10_000 {
            let e = random_regular(h, d, rng)?;
            let lam = algebraic_connectivity(h, &e);
            if lam >= gap && lam > TRUTH_TOL {
                return Ok((e, lam));
            }
        }
        Err(Error::Infeasible(format!("no half with algebraic connectivity ≥ {gap} found")))
    };
    let (a, gap_a) = sample_half(&mut rng)?;
    let (b, gap_b) = sample_half(&mut rng)?;
    let bridge = (rng.random_range(0..h), h + rng.random_range(0..h));
    let mut present: Vec<_> = a.clone();
    present.extend(b.iter().map(|&(u, v)| (u + h, v + h)));
    let mut parent = present.clone();
    for u in 0..h {
        for v in h..n {
            parent.push((u, v));
        }
    }
    present.push(bridge);
    let g = Graph::new(n, &parent, 0, h)?;
    let x = mask(&g, &present)?;
    let truth = Truth {
        bridge: Some(bridge),
        cut: Some(vec![bridge]),
        gaps: Some([gap_a, gap_b]),
        params: params(&[
            ("n", n.to_string()),
            ("d", d.to_string()),
            ("seed", seed.to_string()),
            ("gap", gap.to_string()),
        ]),
        ..Truth::default()
    };
    let inst = FamilyInstance::finish("expander_bridge", g, InputOracle::new(x), truth)?;
    let theta = inst.flow().theta.get(&crate::graph::directed_label(bridge.0, bridge.1)).copied().unwrap_or(0.0);
    if (theta - 1.0).abs() > TRUTH_TOL {
        return Err(Error::Numerical(format!("bridge carries flow {theta}, expected 1")));
    }
    Ok(inst)
}

/// Random series-parallel composition with `leaves` leaves, resampled until the realization is simple.
pub fn gen_series_parallel(seed: u64, leaves: usize) -> Result<FamilyInstance> {
    if leaves == 0 {
        return Err(Error::InvalidParameter("a term needs at least one leaf".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100_000 {
        let term = SpTerm::random(leaves, &mut rng)?;
        let real = sp_compose(&term);
        if !real.is_simple() {
            continue;
        }
        check_size(real.n)?;
        return sp_instance(&term, format!("{seed}"));
    }
    Err(Error::Infeasible(format!("no simple realization with {leaves} leaves found")))
}

/// Instance realized from an explicit term.
pub fn series_parallel_from_term(term: &SpTerm) -> Result<FamilyInstance> {
    sp_instance(term, "-".into())
}

fn sp_instance(term: &SpTerm, seed: String) -> Result<FamilyInstance> {
    let real = sp_compose(term);
    let g = real.to_graph()?;
    let x = vec![true; g.m()];
    let truth = Truth {
        term: Some(term.to_string()),
        dual_term: Some(sp_dual(term).to_string()),
        params: params(&[("leaves", term.leaves().to_string()), ("seed", seed)]),
        ..Truth::default()
    };
    FamilyInstance::finish("series_parallel", g, InputOracle::new(x), truth)
}

fn params(kv: &[(&str, String)]) -> BTreeMap<String, String> {
    kv.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Family names accepted by [`generate`].
pub const FAMILY_NAMES: [&str; 6] =
    ["path", "parallel_paths", "clutter", "lower_bound", "expander_bridge", "series_parallel"];

/// Build a family from `NAME` and `K=V` parameters.
pub fn generate(name: &str, kv: &BTreeMap<String, String>, expander_gap: f64) -> Result<FamilyInstance> {
    let get = |k: &str| kv.get(k).ok_or_else(|| Error::InvalidParameter(format!("family {name} needs parameter {k}")));
    let num = |k: &str| -> Result<usize> {
        get(k)?.parse().map_err(|_| Error::InvalidParameter(format!("{k} must be a non-negative integer")))
    };
    let opt_num = |k: &str| -> Result<Option<usize>> {
        if kv.contains_key(k) {
            num(k).map(Some)
        } else {
            Ok(None)
        }
    };
    let seed = || -> Result<u64> {
        match kv.get("seed") {
            Some(s) => s.parse().map_err(|_| Error::InvalidParameter("seed must be an unsigned integer".into())),
            None => Ok(0),
        }
    };
    let allowed: &[&str] = match name {
        "path" => &["L", "n", "parent"],
        "parallel_paths" => &["lengths"],
        "clutter" => &["L", "n", "seed"],
        "lower_bound" => &["ell", "L", "sigma"],
        "expander_bridge" => &["n", "d", "seed"],
        "series_parallel" => &["leaves", "seed", "term"],
        _ => return Err(Error::InvalidParameter(format!("unknown family {name:?}; expected one of {FAMILY_NAMES:?}"))),
    };
    if let Some(k) = kv.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter(format!("family {name} has no parameter {k}")));
    }
    match name {
        "path" => {
            let parent = match kv.get("parent").map(String::as_str) {
                None | Some("path") => PathParent::Path,
                Some("complete") => PathParent::Complete,
                Some(o) => return Err(Error::InvalidParameter(format!("parent must be path or complete, got {o}"))),
            };
            gen_path(num("L")?, opt_num("n")?, parent)
        }
        "parallel_paths" => {
            let lengths = get("lengths")?
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad length {s:?}"))))
                .collect::<Result<Vec<usize>>>()?;
            gen_parallel_paths(&lengths)
        }
        "clutter" => gen_unique_path_clutter(num("L")?, num("n")?, seed()?),
        "lower_bound" => gen_lower_bound_family(num("ell")?, num("L")?, get("sigma")?),
        "expander_bridge" => gen_expander_bridge(num("n")?, num("d")?, seed()?, expander_gap),
        _ => match kv.get("term") {
            Some(t) => series_parallel_from_term(&SpTerm::parse(t)?),
            None => gen_series_parallel(seed()?, num("leaves")?),
        },
    }
}
