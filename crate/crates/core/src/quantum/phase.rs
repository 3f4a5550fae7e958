//! Spectral model of parallelized phase estimation `D(U)`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use super::unitary::SpectralUnitary;
use crate::error::{Error, Result};
use crate::ledger::QueryLedger;

/// Grid points per side lobe when bounding `|A_b|²` outside the window.
const LOBE_SAMPLES: f64 = 1024.0;

/// `D(U)` with precision `Θ` and accuracy `ε`: `r` parallel `b`-bit phase estimations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimationModel {
    pub theta: f64,
    pub eps: f64,
    pub bits: u32,
    pub reps: u32,
    /// Upper bound on `|A_b(φ)|²` over `Θ < |φ| ≤ π`.
    pub beta: f64,
}

impl PhaseEstimationModel {
    pub fn new(theta: f64, eps: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!("Θ must lie in (0, π], got {theta}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {eps}")));
        }
        let bits = ((2.0 * std::f64::consts::PI / theta).log2() - 1e-12).ceil().max(0.0) as u32 + 1;
        if bits > 40 {
            return Err(Error::SizeGuard { what: "phase bits", size: bits as usize, limit: 40 });
        }
        let n = (1u64 << bits) as f64;
        let beta = side_lobe_bound(n, theta);
        let reps = ((1.0 / eps).ln() / (1.0 / beta).ln()).ceil().max(1.0) as u32;
        Ok(PhaseEstimationModel { theta, eps, bits, reps, beta })
    }

    pub fn register_size(&self) -> u64 {
        1u64 << self.bits
    }

    /// `A_b(φ) = 2^{-b} Σ_{k<2^b} e^{ikφ}`.
    pub fn amplitude(&self, phi: f64) -> Complex64 {
        amplitude(self.register_size() as f64, phi)
    }

    /// All-zero amplitude of the `r` registers, `A_b(φ)^r`.
    pub fn zero_amplitude(&self, phi: f64) -> Complex64 {
        self.amplitude(phi).powu(self.reps)
    }

    /// Controlled-`U` applications in one run of `D(U)`.
    pub fn controlled_u_count(&self) -> u64 {
        self.reps as u64 * (self.register_size() - 1)
    }

    /// Oracle queries for one run, two per controlled-`U`.
    pub fn oracle_cost(&self) -> u64 {
        2 * self.controlled_u_count()
    }
}

fn amplitude(n: f64, phi: f64) -> Complex64 {
    let half = phi / 2.0;
    if half.sin().abs() < 1e-14 {
        // φ ∈ 2πℤ
        return Complex64::new(1.0, 0.0);
    }
    let mag = (n * half).sin() / (n * half.sin());
    Complex64::from_polar(mag, (n - 1.0) * half)
}

fn envelope(n: f64, phi: f64) -> f64 {
    (1.0 / (n * (phi / 2.0).sin())).powi(2)
}

/// Sup of `|A_b|²` on `(Θ, π]`, sampled on a fine grid and padded by the curvature bound.
fn side_lobe_bound(n: f64, theta: f64) -> f64 {
    let h = 2.0 * std::f64::consts::PI / (n * LOBE_SAMPLES);
    let mut best = amplitude(n, theta).norm_sqr();
    let mut phi = theta;
    while phi < std::f64::consts::PI {
        phi = (phi + h).min(std::f64::consts::PI);
        best = best.max(amplitude(n, phi).norm_sqr());
        if envelope(n, phi) <= best {
            break;
        }
    }
    // |f''| ≤ 7n²/6 for f = |A_b|², so a grid point is within (7/48)(nh)² of any interior peak
    (best + 7.0 / 48.0 * (n * h).powi(2)).min(envelope(n, theta))
}

/// Zero-outcome branch from a fixed input: its probability and unnormalized post-state.
#[derive(Debug, Clone)]
pub struct ZeroBranch {
    pub probability: f64,
    pub state: DVector<Complex64>,
}

impl ZeroBranch {
    pub fn from_coefficients(u: &SpectralUnitary, coeffs: &DVector<Complex64>, model: &PhaseEstimationModel) -> Self {
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(u.phases()).map(|(c, &p)| c * model.zero_amplitude(p)),
        );
        ZeroBranch { probability: scaled.norm_squared(), state: u.vectors() * scaled }
    }

    /// Normalized post-state, if the branch has nonzero weight.
    pub fn normalized(&self) -> Option<DVector<Complex64>> {
        (self.probability > 0.0).then(|| self.state.unscale(self.probability.sqrt()))
    }
}

/// Result of one run of `D(U)` followed by a measurement of the phase registers.
#[derive(Debug, Clone)]
pub struct PhaseEstimationRun {
    pub zero: bool,
    pub zero_probability: f64,
    /// Normalized state of `H̃` given the all-zero outcome.
    pub post_state: Option<DVector<Complex64>>,
    pub oracle_cost: u64,
}

fn check_normalized(psi: &DVector<Complex64>) -> Result<()> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("input state has norm {norm}")));
    }
    Ok(())
}

/// `Σ |⟨λ_i|ψ⟩|² |A_b(φ_i)|^{2r}`.
pub fn zero_outcome_probability(u: &SpectralUnitary, psi: &DVector<Complex64>, model: &PhaseEstimationModel) -> f64 {
    u.coefficients(psi).iter().zip(u.phases()).map(|(c, &p)| c.norm_sqr() * model.zero_amplitude(p).norm_sqr()).sum()
}

/// Sample one run; the cost is charged as controlled-`U` applications under `charge_to`.
pub fn phase_estimation_run(
    u: &SpectralUnitary,
    psi: &DVector<Complex64>,
    model: &PhaseEstimationModel,
    ledger: &mut QueryLedger,
    charge_to: &str,
    rng: &mut impl Rng,
) -> Result<PhaseEstimationRun> {
    check_normalized(psi)?;
    let branch = ZeroBranch::from_coefficients(u, &u.coefficients(psi), model);
    Ok(sample_branch(&branch, model, ledger, charge_to, rng))
}

/// As [`phase_estimation_run`] with a precomputed branch.
pub fn sample_branch(
    branch: &ZeroBranch,
    model: &PhaseEstimationModel,
    ledger: &mut QueryLedger,
    charge_to: &str,
    rng: &mut impl Rng,
) -> PhaseEstimationRun {
    ledger.charge_controlled_u(charge_to, model.controlled_u_count());
    let zero = rng.random::<f64>() < branch.probability;
    PhaseEstimationRun {
        zero,
        zero_probability: branch.probability,
        post_state: if zero { branch.normalized() } else { None },
        oracle_cost: model.oracle_cost(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::quantum::{build_u, WitnessDecomposition};
    use crate::span::{build_stconn_program, positive_witness};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn bits_and_cost() {
        let m = PhaseEstimationModel::new(PI, 0.1).unwrap();
        assert_eq!(m.bits, 2);
        let m = PhaseEstimationModel::new(PI / 8.0, 0.01).unwrap();
        assert_eq!(m.bits, 5);
        assert_eq!(m.oracle_cost(), 2 * m.reps as u64 * 31);
        assert!(PhaseEstimationModel::new(0.0, 0.1).is_err());
        assert!(PhaseEstimationModel::new(1.0, 1.0).is_err());
    }

    #[test]
    fn amplitude_matches_sum() {
        let m = PhaseEstimationModel::new(0.3, 0.1).unwrap();
        let n = m.register_size();
        for phi in [0.0, 0.01, 0.3, 1.0, -2.0, PI] {
            let direct: Complex64 =
                (0..n).map(|k| Complex64::from_polar(1.0, k as f64 * phi)).sum::<Complex64>() / n as f64;
            assert!((direct - m.amplitude(phi)).norm() < 1e-12);
        }
    }

    #[test]
    fn repetitions_suppress_outside_window() {
        for theta in [PI, 1.0, 0.2, 0.013] {
            for eps in [0.5, 0.1, 1e-3] {
                let m = PhaseEstimationModel::new(theta, eps).unwrap();
                let n = 20_000;
                for k in 0..=n {
                    let phi = theta + (PI - theta) * k as f64 / n as f64;
                    if phi > theta {
                        assert!(m.zero_amplitude(phi).norm_sqr() <= eps * (1.0 + 1e-9), "{theta} {eps} {phi}");
                    }
                }
            }
        }
    }

    #[test]
    fn sandwich_on_random_states() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (0, 2), (2, 3), (1, 3)], 0, 3).unwrap();
        let sp = build_stconn_program(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for x in [[true, true, false, true, false], [true, false, true, false, false]] {
            let u = build_u(sp.program(), &x, 0.8).unwrap();
            let s = u.spectral();
            for (theta, eps) in [(0.5, 0.1), (0.1, 0.01)] {
                let m = PhaseEstimationModel::new(theta, eps).unwrap();
                for _ in 0..100 {
                    let psi = DVector::from_fn(s.dim(), |_, _| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    });
                    let psi = psi.unscale(psi.norm());
                    let pr = zero_outcome_probability(s, &psi, &m);
                    assert!(pr >= s.low_phase_weight(&psi, 0.0) - 1e-12);
                    assert!(pr <= s.low_phase_weight(&psi, theta) + eps + 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_phase_state_is_preserved() {
        let g = Graph::new(3, &[(0, 1), (0, 2), (2, 1)], 0, 1).unwrap();
        let sp = build_stconn_program(&g);
        let x = [true, true, true];
        let pos = positive_witness(sp.program(), &x).unwrap();
        let u = build_u(sp.program(), &x, 0.5).unwrap();
        let d = WitnessDecomposition::new(&pos.w, pos.w_plus, 0.5).unwrap();
        let psi = (&d.psi_plus / d.psi_plus.norm()).map(|v| Complex64::new(v, 0.0));
        let m = PhaseEstimationModel::new(0.2, 0.05).unwrap();
        let mut ledger = QueryLedger::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let run = phase_estimation_run(u.spectral(), &psi, &m, &mut ledger, "pe", &mut rng).unwrap();
        assert!(run.zero);
        assert!((run.zero_probability - 1.0).abs() < 1e-9);
        assert!((run.post_state.unwrap() - &psi).norm() < 1e-9);
        assert_eq!(ledger.exact_total(), m.oracle_cost());
        assert_eq!(ledger.controlled_u(), m.controlled_u_count());
        assert!(phase_estimation_run(u.spectral(), &psi.scale(2.0), &m, &mut ledger, "pe", &mut rng).is_err());
    }

    #[test]
    fn hat0_probability_window() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)], 0, 2).unwrap();
        let sp = build_stconn_program(&g);
        let x = [true; 4];
        let pos = positive_witness(sp.program(), &x).unwrap();
        for alpha in [0.3, 1.0, 2.0] {
            let u = build_u(sp.program(), &x, alpha).unwrap();
            let d = WitnessDecomposition::new(&pos.w, pos.w_plus, alpha).unwrap();
            for (theta, eps) in [(0.05, 0.01), (0.01, 0.001)] {
                // Θ small enough that the ψ̃₋ overlap is below ε
                let m = PhaseEstimationModel::new(theta, eps).unwrap();
                let b = u.hat0_zero_branch(&m);
                let overlap = u.spectral().low_phase_weight_real(&d.psi_minus, theta);
                assert!(b.probability >= d.a0 - 1e-9);
                assert!(b.probability <= d.a0 + d.a_plus.powi(2) * overlap + eps + 1e-9);
            }
        }
    }
}
