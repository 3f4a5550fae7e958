//! Modeled path detection and witness-size estimation.

use rand::Rng;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::flow::effective_resistance;
use crate::graph::{Graph, Vertex};
use crate::ledger::QueryLedger;

pub const PATH_DETECTION_CHARGE: &str = "path_detection";
pub const WITNESS_SIZE_CHARGE: &str = "witness_size_est";

/// A subroutine that runs for a fixed number of unit-cost steps and then yields its value.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedSubroutine<T> {
    name: String,
    total_steps: u64,
    remaining: u64,
    value: T,
    done: bool,
}

impl<T> SteppedSubroutine<T> {
    pub fn new(name: &str, steps: u64, value: T) -> Self {
        let steps = steps.max(1);
        SteppedSubroutine { name: name.to_string(), total_steps: steps, remaining: steps, value, done: false }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn result(&self) -> Option<&T> {
        self.done.then_some(&self.value)
    }

    /// Apply one query; returns true if the subroutine terminated on this step.
    pub fn step(&mut self, ledger: &mut QueryLedger) -> bool {
        if self.done {
            return false;
        }
        ledger.charge_modeled(&self.name, 1.0);
        self.remaining -= 1;
        self.done = self.remaining == 0;
        self.done
    }
}

/// Step count of the path detector on an `n`-vertex graph; `r` is `None` when disconnected.
pub fn path_detection_steps(n: usize, r: Option<f64>, delta: f64, c_pd: f64) -> u64 {
    let n = n as f64;
    let delta = delta.max(f64::MIN_POSITIVE);
    let steps = match r {
        Some(r) if r <= 0.0 => 1.0,
        Some(r) => c_pd * n * r.sqrt() * (std::f64::consts::E.max(n / (r * delta))).ln(),
        None => c_pd * n.powf(1.5) * (1.0 / delta).ln(),
    };
    (steps.ceil() as u64).max(1)
}

/// Path detector for `a`–`b` in `G′(x)`; the answer is flipped with probability `δ` when
/// failure injection is on.
pub fn path_detection_stepper(
    g: &Graph,
    x: &[bool],
    a: Vertex,
    b: Vertex,
    delta: f64,
    config: &Config,
    rng: &mut impl Rng,
) -> Result<SteppedSubroutine<bool>> {
    check_prob(delta, "δ")?;
    let view = g.view(x);
    let connected = view.st_connected(a, b);
    let r = connected.then(|| effective_resistance(&view, a, b));
    let steps = path_detection_steps(g.vertex_count(), r, delta, config.c_pd);
    let flip = config.inject_failures && rng.random::<f64>() < delta;
    Ok(SteppedSubroutine::new(PATH_DETECTION_CHARGE, steps, connected != flip))
}

fn check_prob(v: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must lie in [0, 1], got {v}")))
    }
}

/// Estimate of `R_{a,b}(G(x))` within relative error `ε`, or a uniform guess in `[0, n]`
/// with probability `δ` under failure injection.
#[allow(clippy::too_many_arguments)]
pub fn witness_size_est(
    g: &Graph,
    x: &[bool],
    a: Vertex,
    b: Vertex,
    eps: f64,
    delta: f64,
    config: &Config,
    ledger: &mut QueryLedger,
    rng: &mut impl Rng,
) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {eps}")));
    }
    check_prob(delta, "δ")?;
    let view = g.view(x);
    let n = g.vertex_count() as f64;
    let log = (1.0 / delta.max(f64::MIN_POSITIVE)).ln();
    let r = effective_resistance(&view, a, b);
    let cost = if r.is_finite() {
        config.c_we * (r * n * n / eps.powi(3)).sqrt() * log
    } else {
        config.c_we * (n / eps).powf(1.5) * log
    };
    ledger.charge_modeled(WITNESS_SIZE_CHARGE, cost.ceil().max(1.0));
    if config.inject_failures && rng.random::<f64>() < delta {
        return Ok(rng.random_range(0.0..=n));
    }
    if !r.is_finite() {
        // no flow exists, so any value is consistent with the contract
        return Ok(rng.random_range(0.0..=n));
    }
    Ok(r * (1.0 + rng.random_range(-eps..=eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stepping_contract() {
        let mut l = QueryLedger::new();
        let mut s = SteppedSubroutine::new("pd", 3, true);
        assert!(!s.step(&mut l));
        assert!(!s.step(&mut l));
        assert_eq!(s.result(), None);
        assert!(s.step(&mut l));
        assert_eq!(s.result(), Some(&true));
        assert!(!s.step(&mut l));
        assert_eq!(l.modeled_total(), 3.0);
    }

    #[test]
    fn step_formulas() {
        let e = std::f64::consts::E;
        let n = 4usize;
        let d = 0.01;
        let conn = path_detection_steps(n, Some(3.0), d, 1.0);
        assert_eq!(conn, (4.0 * 3f64.sqrt() * (4.0 / 0.03f64).ln()).ceil() as u64);
        let disc = path_detection_steps(n, None, d, 1.0);
        assert_eq!(disc, (8.0 * (100f64).ln()).ceil() as u64);
        assert_eq!(path_detection_steps(n, Some(0.0), d, 1.0), 1);
        // ln floor at e
        assert_eq!(path_detection_steps(2, Some(1.0), 1.0, 1.0), (2.0 * e.ln()).ceil() as u64);
    }

    #[test]
    fn detector_answers() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut l = QueryLedger::new();
        let mut pd = path_detection_stepper(&g, &[true; 3], 0, 3, 0.0, &cfg, &mut rng).unwrap();
        while !pd.step(&mut l) {}
        assert_eq!(pd.result(), Some(&true));
        let pd = path_detection_stepper(&g, &[true, false, true], 0, 3, 0.0, &cfg, &mut rng).unwrap();
        assert_eq!(pd.result(), None);
        assert_eq!(pd.total_steps(), path_detection_steps(4, None, 0.0, 1.0));
        let mut flips = 0;
        for _ in 0..2000 {
            let mut pd = path_detection_stepper(&g, &[true; 3], 0, 3, 0.1, &cfg, &mut rng).unwrap();
            while !pd.step(&mut l) {}
            flips += !*pd.result().unwrap() as usize;
        }
        assert!((100..300).contains(&flips), "{flips}");
    }

    #[test]
    fn size_estimates() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut l = QueryLedger::new();
        for _ in 0..100 {
            let k = witness_size_est(&g, &[true; 3], 0, 1, 0.1, 0.0, &cfg, &mut l, &mut rng).unwrap();
            assert!((0.9..=1.1).contains(&k));
            let k = witness_size_est(&g, &[true; 3], 0, 3, 0.1, 0.0, &cfg, &mut l, &mut rng).unwrap();
            assert!((2.7..=3.3).contains(&k));
            let k = witness_size_est(&g, &[true; 3], 0, 3, 0.1, 1.0, &cfg, &mut l, &mut rng).unwrap();
            assert!((0.0..=4.0).contains(&k));
        }
        let before = l.modeled_total();
        witness_size_est(&g, &[true; 3], 0, 3, 0.5, 0.5, &cfg, &mut l, &mut rng).unwrap();
        let expected = ((3.0f64 * 16.0 / 0.125).sqrt() * 2f64.ln()).ceil();
        assert_eq!(l.modeled_total() - before, expected);
    }
}
