//! The extended space `H̃ = H ⊕ |0̂⟩`, the reflection unitary `U(P,x,α)`, and
//! exact spectral models of phase estimation and amplitude estimation.

mod cache;
mod iqae;
mod phase;
mod unitary;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::right_svd;
use crate::span::SpanProgram;

pub use cache::Simulator;
pub use iqae::{iqae_cost, iqae_estimate, Experiment, IqaeEstimate};
pub use phase::{
    phase_estimation_run, sample_branch, zero_outcome_probability, PhaseEstimationModel, PhaseEstimationRun, ZeroBranch,
};
pub use unitary::{
    build_u, low_phase_projector, verify_effective_spectral_gap, ReflectionUnitary, SpectralUnitary, SpectrumDump,
};

/// `H̃ = H ⊕ span{|0̂⟩}` with `|0̂⟩` as the last basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtendedSpace {
    pub dim_h: usize,
}

impl ExtendedSpace {
    pub fn dim(&self) -> usize {
        self.dim_h + 1
    }

    pub fn hat0(&self) -> usize {
        self.dim_h
    }

    /// `|0̂⟩` as a real vector.
    pub fn hat0_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[self.hat0()] = 1.0;
        v
    }

    /// Embed a vector of `H` into `H̃`.
    pub fn embed(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v.rows_mut(0, self.dim_h).copy_from(w);
        v
    }
}

/// `Ã_α = (1/α)|τ⟩⟨0̂| − A` as a map `H̃ → 𝒱`.
pub fn build_a_alpha(p: &SpanProgram, alpha: f64) -> Result<DMatrix<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let (rows, cols) = (p.dim_v(), p.dim_h());
    let mut m = DMatrix::zeros(rows, cols + 1);
    m.view_mut((0, 0), (rows, cols)).copy_from(&(-p.a()));
    m.set_column(cols, &(p.tau() / alpha));
    Ok(m)
}

/// Orthogonal projector onto the kernel of `m`.
pub fn kernel_projector(m: &DMatrix<f64>) -> DMatrix<f64> {
    let r = right_svd(m);
    let dim = m.ncols();
    DMatrix::identity(dim, dim) - &r.row_space * r.row_space.transpose()
}

/// `|0̂⟩ = a₀ ψ̃₊ + a₊ ψ̃₋` with `ψ̃₊ = |0̂⟩ + w/α` and `ψ̃₋ = |0̂⟩ − (α/w₊) w`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessDecomposition {
    pub psi_plus: DVector<f64>,
    pub psi_minus: DVector<f64>,
    pub a0: f64,
    pub a_plus: f64,
}

impl WitnessDecomposition {
    /// `w` is the optimal positive witness in `H`, `w_plus = ‖w‖²`.
    pub fn new(w: &DVector<f64>, w_plus: f64, alpha: f64) -> Result<Self> {
        if !(w_plus > 0.0 && alpha > 0.0) {
            return Err(Error::InvalidParameter("need w₊ > 0 and α > 0".into()));
        }
        let space = ExtendedSpace { dim_h: w.len() };
        let hat0 = space.hat0_vector();
        let ew = space.embed(w);
        Ok(WitnessDecomposition {
            psi_plus: &hat0 + &ew / alpha,
            psi_minus: &hat0 - &ew * (alpha / w_plus),
            a0: 1.0 / (1.0 + w_plus / (alpha * alpha)),
            a_plus: 1.0 / (1.0 + alpha * alpha / w_plus),
        })
    }
}

/// Trace distance between the pure states spanned by `a` and `b`.
pub fn pure_trace_distance(a: &DVector<num_complex::Complex64>, b: &DVector<num_complex::Complex64>) -> f64 {
    let overlap = a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared());
    (1.0 - overlap).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::span::{build_stconn_program, positive_witness};

    #[test]
    fn a_alpha_columns() {
        let g = Graph::new(2, &[(0, 1)], 0, 1).unwrap();
        let sp = build_stconn_program(&g);
        let a1 = build_a_alpha(sp.program(), 1.0).unwrap();
        assert_eq!(a1.column(2).norm_squared(), 2.0);
        let a2 = build_a_alpha(sp.program(), 2.0).unwrap();
        assert_eq!(a2.column(2) * 2.0, a1.column(2));
        assert!(build_a_alpha(sp.program(), 0.0).is_err());
    }

    #[test]
    fn kernel_contains_psi_plus() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)], 0, 3).unwrap();
        let sp = build_stconn_program(&g);
        let pos = positive_witness(sp.program(), &[true; 3]).unwrap();
        for alpha in [0.3, 1.0, 4.0] {
            let a = build_a_alpha(sp.program(), alpha).unwrap();
            let d = WitnessDecomposition::new(&pos.w, pos.w_plus, alpha).unwrap();
            assert!((&a * &d.psi_plus).norm() < 1e-12);
            let lam = kernel_projector(&a);
            assert!((&lam * &d.psi_plus - &d.psi_plus).norm() < 1e-12);
            let rank = crate::linalg::right_svd(&a).sigma.len();
            assert!((lam.trace() - (a.ncols() - rank) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn decomposition_identities() {
        let g = Graph::new(3, &[(0, 1), (0, 2), (2, 1)], 0, 1).unwrap();
        let sp = build_stconn_program(&g);
        let pos = positive_witness(sp.program(), &[true; 3]).unwrap();
        for alpha in [0.1, 0.5, 2.0] {
            let d = WitnessDecomposition::new(&pos.w, pos.w_plus, alpha).unwrap();
            let hat0 = ExtendedSpace { dim_h: 6 }.hat0_vector();
            assert!((&d.psi_plus * d.a0 + &d.psi_minus * d.a_plus - hat0).norm() < 1e-12);
            assert!(d.psi_plus.dot(&d.psi_minus).abs() < 1e-12);
            assert!((d.a0 * d.psi_plus.norm_squared() - 1.0).abs() < 1e-12);
            assert!((d.a0 + d.a_plus - 1.0).abs() < 1e-12);
        }
    }
}
