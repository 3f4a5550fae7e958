//! Modeled iterative amplitude estimation.

use rand::Rng;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::ledger::QueryLedger;

/// A measurement experiment: probability of the marked outcome and queries per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    pub probability: f64,
    pub oracle_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqaeEstimate {
    pub estimate: f64,
    pub failed: bool,
    pub oracle_cost: f64,
}

/// `⌈(C/a)·ln(max(e, (1/p)·ln(1/a)))⌉ × experiment_cost`.
pub fn iqae_cost(a: f64, p: f64, c_iqae: f64, experiment_cost: f64) -> f64 {
    let runs = (c_iqae / a * (std::f64::consts::E.max((1.0 / p) * (1.0 / a).ln())).ln()).ceil();
    runs * experiment_cost
}

/// Truth plus `U(−a, a)` noise, or with probability `p` (when injection is on) a uniform guess.
pub fn iqae_estimate(
    experiment: &Experiment,
    a: f64,
    p: f64,
    config: &Config,
    ledger: &mut QueryLedger,
    charge_to: &str,
    rng: &mut impl Rng,
) -> Result<IqaeEstimate> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("additive error must lie in (0, 1), got {a}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("failure probability must lie in (0, 1], got {p}")));
    }
    let oracle_cost = iqae_cost(a, p, config.c_iqae, experiment.oracle_cost);
    ledger.charge_modeled(charge_to, oracle_cost);
    let failed = config.inject_failures && rng.random::<f64>() < p;
    let estimate =
        if failed { rng.random::<f64>() } else { (experiment.probability + rng.random_range(-a..=a)).clamp(0.0, 1.0) };
    Ok(IqaeEstimate { estimate, failed, oracle_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cost_formula() {
        let a = 1.0 / 48.0;
        // 480 · ln(100 · ln 48), evaluated independently
        let expected = (480.0f64 * (100.0 * 48f64.ln()).ln()).ceil();
        assert_eq!(expected, 2861.0);
        assert_eq!(iqae_cost(a, 0.01, 10.0, 1.0), 2861.0);
        assert_eq!(iqae_cost(a, 0.01, 10.0, 6.0), 6.0 * 2861.0);
        // the max(e, ·) floor
        assert_eq!(iqae_cost(0.5, 1.0, 10.0, 1.0), 20.0);
    }

    #[test]
    fn estimates_respect_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ledger = QueryLedger::new();
        let exp = Experiment { probability: 0.5, oracle_cost: 4.0 };
        let cfg = Config::faithful();
        for _ in 0..1000 {
            let e = iqae_estimate(&exp, 1.0 / 48.0, 0.01, &cfg, &mut ledger, "iqae", &mut rng).unwrap();
            assert!((e.estimate - 0.5).abs() <= 1.0 / 48.0);
            assert!(!e.failed);
        }
        assert!(ledger.is_conserved());
        let cfg = Config::default();
        let mut fails = 0;
        for _ in 0..1000 {
            let e = iqae_estimate(&exp, 0.1, 1.0, &cfg, &mut ledger, "iqae", &mut rng).unwrap();
            assert!((0.0..=1.0).contains(&e.estimate));
            fails += e.failed as usize;
        }
        assert_eq!(fails, 1000);
        assert!(iqae_estimate(&exp, 0.0, 0.1, &cfg, &mut ledger, "iqae", &mut rng).is_err());
    }
}
