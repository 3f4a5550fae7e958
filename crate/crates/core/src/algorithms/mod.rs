//! Witness generation, edge finding, path finding and cut-set finding with query accounting.

mod cutset;
mod paths;
mod subroutines;
mod witness;

use serde::{Deserialize, Serialize};

use crate::graph::InputOracle;
use crate::ledger::QueryLedger;

pub use cutset::{coupon_expected_samples, cutset_finder, CutsetParams, CutsetReport};
pub use paths::{general_path_finder, single_path_finder, PathLength, SINGLE_PATH_READ};
pub use subroutines::{path_detection_stepper, path_detection_steps, witness_size_est, SteppedSubroutine};
pub use witness::{
    edge_finder, generation_attempts, witness_generation, EdgeSample, ProbeRecord, WitnessGenerationRun,
};

/// Result of an algorithm that may report failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Success(T),
    Failure(String),
}

impl<T> Outcome<T> {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success(_))
    }

    pub fn success(self) -> Option<T> {
        match self {
            Outcome::Success(v) => Some(v),
            Outcome::Failure(_) => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        match self {
            Outcome::Success(v) => Outcome::Success(f(v)),
            Outcome::Failure(r) => Outcome::Failure(r),
        }
    }
}

/// An outcome with the ledger of the run that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmOutcome<T> {
    pub outcome: Outcome<T>,
    pub ledger: QueryLedger,
}

impl<T> AlgorithmOutcome<T> {
    pub fn capture(outcome: Outcome<T>, oracle: &InputOracle) -> Self {
        AlgorithmOutcome { outcome, ledger: oracle.ledger().clone() }
    }
}

/// Seed for trial `trial` of a batch seeded by `seed` (SplitMix64 finalizer).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ() {
        let s: std::collections::BTreeSet<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
    }

    #[test]
    fn outcome_helpers() {
        let o: Outcome<u8> = Outcome::Success(3);
        assert!(o.is_success());
        assert_eq!(o.map(|v| v * 2).success(), Some(6));
        let f: Outcome<u8> = Outcome::Failure("x".into());
        assert_eq!(f.success(), None);
    }
}
