//! Witness state generation and the edge finder built on it.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::error::{Error, Result};
use crate::graph::{InputOracle, Vertex};
use crate::quantum::{iqae_estimate, sample_branch, Experiment, PhaseEstimationModel, Simulator};
use crate::span::{StConnProgram, WitnessBounds};

pub const PROBE_CHARGE: &str = "witness_generation.probe";
pub const GENERATE_CHARGE: &str = "witness_generation.generate";

/// One round of the probing stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub alpha: f64,
    pub estimate: f64,
    /// Exact zero-outcome probability the estimate targets.
    pub truth: f64,
    /// `‖P₀|0̂⟩‖²`, which equals `1/(1 + w₊/α²)`.
    pub a0: f64,
    pub iqae_failed: bool,
}

/// Full trace of one witness-generation call.
#[derive(Debug, Clone)]
pub struct WitnessGenerationRun {
    pub eps_prime: f64,
    pub probes: Vec<ProbeRecord>,
    pub broke: bool,
    pub alpha: f64,
    pub attempts: u32,
    /// Normalized state on `H`, present on success.
    pub state: Option<DVector<Complex64>>,
}

impl WitnessGenerationRun {
    pub fn outcome(&self) -> Outcome<DVector<Complex64>> {
        match &self.state {
            Some(s) => Outcome::Success(s.clone()),
            None => Outcome::Failure("no generation attempt measured outcome M".into()),
        }
    }

    /// The probe that triggered the break, if any.
    pub fn break_probe(&self) -> Option<&ProbeRecord> {
        if self.broke {
            self.probes.last()
        } else {
            None
        }
    }
}

/// Generation-stage attempts: enough that `(15/16)^k ≤ δ`.
pub fn generation_attempts(delta: f64) -> u32 {
    ((1.0 / delta).ln() / (16.0f64 / 15.0).ln()).ceil().max(1.0) as u32
}

/// Probe `α = 2^i/√W̃₋` until the estimated zero-outcome probability lands in
/// `[15/48, 35/48]`, then run phase estimation and measure `M` until success.
pub fn witness_generation(
    program: &StConnProgram,
    oracle: &mut InputOracle,
    eps: f64,
    delta: f64,
    bounds: &WitnessBounds,
    sim: &Simulator,
    rng: &mut impl Rng,
) -> Result<WitnessGenerationRun> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("need ε, δ ∈ (0,1), got {eps}, {delta}")));
    }
    let w = bounds.w_plus * bounds.w_minus_tilde;
    if w < 1.0 {
        return Err(Error::InvalidParameter(format!("W₊W̃₋ = {w} is below 1")));
    }
    let eps_prime = eps.min(1.0 / 96.0);
    let rounds = (w.sqrt().log2()).ceil().max(0.0) as u32;
    let p = if w.log2() > 0.0 { (delta / w.log2()).min(1.0 / w.sqrt()) } else { 1.0 / w.sqrt() };
    let x = oracle.trusted_x().to_vec();
    let model_for =
        |alpha: f64| PhaseEstimationModel::new((eps_prime / (alpha * alpha * bounds.w_minus_tilde)).sqrt(), eps_prime);

    let mut probes = Vec::new();
    let mut broke = false;
    let mut alpha = 1.0 / bounds.w_minus_tilde.sqrt();
    for i in 0..=rounds {
        alpha = 2f64.powi(i as i32) / bounds.w_minus_tilde.sqrt();
        let u = sim.unitary(program, &x, alpha)?;
        let model = model_for(alpha)?;
        let truth = u.hat0_zero_branch(&model).probability;
        let a0 = u.hat0_low_phase_weight(0.0);
        // a₀ ∈ [1/3, 2/3] exactly when w₊/α² ∈ [1/2, 2]
        debug_assert!(
            !(1.0 / 3.0 - 1e-9..=2.0 / 3.0 + 1e-9).contains(&a0)
                || (16.0 / 48.0 - 1e-9..=33.0 / 48.0 + 1e-9).contains(&truth)
        );
        let exp = Experiment { probability: truth, oracle_cost: model.oracle_cost() as f64 };
        let est = iqae_estimate(&exp, 1.0 / 48.0, p, sim.config(), oracle.ledger_mut(), PROBE_CHARGE, rng)?;
        probes.push(ProbeRecord { alpha, estimate: est.estimate, truth, a0, iqae_failed: est.failed });
        if (15.0 / 48.0..=35.0 / 48.0).contains(&est.estimate) {
            broke = true;
            break;
        }
    }

    let u = sim.unitary(program, &x, alpha)?;
    let model = model_for(alpha)?;
    let branch = u.hat0_zero_branch(&model);
    let hat0 = u.space().hat0();
    let max_attempts = generation_attempts(delta);
    for attempt in 1..=max_attempts {
        let run = sample_branch(&branch, &model, oracle.ledger_mut(), GENERATE_CHARGE, rng);
        let Some(v) = run.post_state else { continue };
        let off = 1.0 - v[hat0].norm_sqr();
        if off > 0.0 && rng.random::<f64>() < off {
            let h = v.rows(0, hat0).into_owned();
            let norm = h.norm();
            return Ok(WitnessGenerationRun {
                eps_prime,
                probes,
                broke,
                alpha,
                attempts: attempt,
                state: Some(h.unscale(norm)),
            });
        }
    }
    Ok(WitnessGenerationRun { eps_prime, probes, broke, alpha, attempts: max_attempts, state: None })
}

/// A directed edge measured from a generated witness state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSample {
    pub from: Vertex,
    pub to: Vertex,
}

/// Witness generation with `ε = p²`, `δ = p`, then a standard-basis measurement.
pub fn edge_finder(
    program: &StConnProgram,
    oracle: &mut InputOracle,
    p: f64,
    bounds: &WitnessBounds,
    sim: &Simulator,
    rng: &mut impl Rng,
) -> Result<Outcome<EdgeSample>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
    }
    let run = witness_generation(program, oracle, p * p, p, bounds, sim, rng)?;
    let Some(state) = run.state else {
        return Ok(Outcome::Failure("witness generation failed".into()));
    };
    let k = measure(&state, rng);
    let (from, to) = program.directed_edges()[k];
    Ok(Outcome::Success(EdgeSample { from, to }))
}

fn measure(state: &DVector<Complex64>, rng: &mut impl Rng) -> usize {
    let total: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    let mut r = rng.random::<f64>() * total;
    for (k, z) in state.iter().enumerate() {
        r -= z.norm_sqr();
        if r < 0.0 {
            return k;
        }
    }
    state.iter().rposition(|z| z.norm_sqr() > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::flow::FlowJson;
    use crate::graph::Graph;
    use crate::quantum::pure_trace_distance;
    use crate::span::{build_stconn_program, default_bounds_stconn, positive_witness};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fidelity_check(g: &Graph, seed: u64) {
        let sp = build_stconn_program(g);
        let x = vec![true; g.m()];
        let pos = positive_witness(sp.program(), &x).unwrap();
        let target = pos.w.map(|v| Complex64::new(v, 0.0)).unscale(pos.w_plus.sqrt());
        let bounds = default_bounds_stconn(g.vertex_count(), 2.0).unwrap();
        let sim = Simulator::new(Config::default());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ok = 0;
        for _ in 0..40 {
            let mut oracle = InputOracle::new(x.clone());
            let run = witness_generation(&sp, &mut oracle, 1e-4, 0.05, &bounds, &sim, &mut rng).unwrap();
            if let Some(b) = run.break_probe() {
                if !run.probes.iter().any(|p| p.iqae_failed) {
                    assert!((0.25..=0.75).contains(&b.a0), "{b:?}");
                }
            }
            for p in &run.probes {
                if (1.0 / 3.0..=2.0 / 3.0).contains(&p.a0) {
                    assert!((16.0 / 48.0..=33.0 / 48.0).contains(&p.truth));
                }
            }
            if let Some(s) = run.state {
                assert!(pure_trace_distance(&s, &target) <= 0.12);
                ok += 1;
            }
            assert!(oracle.ledger().is_conserved());
        }
        assert!(ok >= 34, "{ok}");
    }

    #[test]
    fn generates_flow_states() {
        fidelity_check(&Graph::new(2, &[(0, 1)], 0, 1).unwrap(), 1);
        fidelity_check(&Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap(), 2);
        fidelity_check(&Graph::new(3, &[(0, 1), (0, 2), (2, 1)], 0, 1).unwrap(), 3);
    }

    #[test]
    fn edge_sampling_on_triangle() {
        let g = Graph::new(3, &[(0, 1), (0, 2), (2, 1)], 0, 1).unwrap();
        let sp = build_stconn_program(&g);
        let bounds = default_bounds_stconn(3, 2.0).unwrap();
        let sim = Simulator::new(Config::default());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = FlowJson::compute(&g.full_view()).unwrap();
        assert!(q.q.len() >= 3);
        let (mut direct, mut total) = (0, 0);
        for _ in 0..1000 {
            let mut oracle = InputOracle::new(vec![true; 3]);
            if let Outcome::Success(e) = edge_finder(&sp, &mut oracle, 0.05, &bounds, &sim, &mut rng).unwrap() {
                total += 1;
                if (e.from, e.to) == (0, 1) || (e.from, e.to) == (1, 0) {
                    direct += 1;
                }
            }
        }
        let f = direct as f64 / total as f64;
        assert!((f - 2.0 / 3.0).abs() < 0.06, "{f}");
    }

    #[test]
    fn deterministic_per_seed() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 2)], 0, 3).unwrap();
        let sp = build_stconn_program(&g);
        let bounds = default_bounds_stconn(4, 2.0).unwrap();
        let run = |seed| {
            let sim = Simulator::new(Config::default());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut oracle = InputOracle::new(vec![true; 4]);
            let e = edge_finder(&sp, &mut oracle, 0.1, &bounds, &sim, &mut rng).unwrap();
            (e, oracle.take_ledger())
        };
        assert_eq!(run(4), run(4));
    }

    #[test]
    fn attempts_cover_delta() {
        assert_eq!(generation_attempts(0.05), 47);
        assert!((15.0f64 / 16.0).powi(generation_attempts(0.25) as i32) <= 0.25);
    }
}
