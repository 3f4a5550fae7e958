//! `U = (2Π − I)(2Λ − I)` with a verified spectral decomposition.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::{PhaseEstimationModel, ZeroBranch};
use super::{build_a_alpha, kernel_projector, ExtendedSpace};
use crate::config::ZERO_PHASE_TOL;
use crate::error::{Error, Result};
use crate::span::SpanProgram;

const UNITARY_TOL: f64 = 1e-9;

/// A real orthogonal matrix with eigenphases in `(−π, π]` and a unitary eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralUnitary {
    u: DMatrix<f64>,
    phases: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl SpectralUnitary {
    pub fn new(u: DMatrix<f64>) -> Result<Self> {
        let n = u.nrows();
        if u.ncols() != n {
            return Err(Error::InvalidParameter("unitary must be square".into()));
        }
        let unit = (u.transpose() * &u - DMatrix::identity(n, n)).norm();
        if unit > UNITARY_TOL {
            return Err(Error::Numerical(format!("‖U†U − I‖ = {unit:e}")));
        }
        let cu = u.map(|x| Complex64::new(x, 0.0));
        let mut best: Option<(f64, DMatrix<Complex64>, DMatrix<Complex64>)> = None;
        for eps in [1e-15, f64::EPSILON, 1e-14, 1e-13, 1e-12] {
            let Some(schur) = Schur::try_new(cu.clone(), eps, 100_000) else { continue };
            let (q, t) = schur.unpack();
            let mut off = 0.0f64;
            for j in 0..n {
                for i in 0..j {
                    off = off.max(t[(i, j)].norm());
                }
            }
            let d = DMatrix::from_diagonal(&t.diagonal());
            let err = (&q * d * q.adjoint() - &cu).norm().max(off);
            let orth = (q.adjoint() * &q - DMatrix::identity(n, n)).norm();
            let score = err.max(orth);
            if score <= UNITARY_TOL {
                return Ok(Self::from_schur(u, q, t));
            }
            if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
                best = Some((score, q, t));
            }
        }
        match best {
            Some((score, _, _)) => Err(Error::Numerical(format!("eigendecomposition residual {score:e}"))),
            None => Err(Error::Numerical("Schur iteration did not converge".into())),
        }
    }

    fn from_schur(u: DMatrix<f64>, vectors: DMatrix<Complex64>, t: DMatrix<Complex64>) -> Self {
        let phases = t
            .diagonal()
            .iter()
            .map(|z| {
                let p = z.arg();
                if p <= -std::f64::consts::PI + 1e-15 {
                    std::f64::consts::PI
                } else {
                    p
                }
            })
            .collect();
        SpectralUnitary { u, phases, vectors }
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Eigenvectors as columns, in the order of [`phases`](Self::phases).
    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    /// `‖U†U − I‖`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        (self.u.transpose() * &self.u - DMatrix::identity(n, n)).norm()
    }

    /// `‖Σ e^{iφ}|λ⟩⟨λ| − U‖`.
    pub fn reconstruction_error(&self) -> f64 {
        let d = DVector::from_iterator(self.dim(), self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)));
        let r = &self.vectors * DMatrix::from_diagonal(&d) * self.vectors.adjoint();
        (r - self.u.map(|x| Complex64::new(x, 0.0))).norm()
    }

    /// Coordinates `⟨λ_i|ψ⟩`.
    pub fn coefficients(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        self.vectors.adjoint() * psi
    }

    pub fn coefficients_real(&self, psi: &DVector<f64>) -> DVector<Complex64> {
        self.coefficients(&psi.map(|x| Complex64::new(x, 0.0)))
    }

    /// Indices of eigenvectors with `|φ| ≤ Θ` up to the zero-bucket tolerance.
    pub fn low_phase_indices(&self, theta: f64) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.phases[i].abs() <= theta + ZERO_PHASE_TOL).collect()
    }

    /// `‖P_Θ ψ‖²`.
    pub fn low_phase_weight(&self, psi: &DVector<Complex64>, theta: f64) -> f64 {
        let c = self.coefficients(psi);
        self.low_phase_indices(theta).iter().map(|&i| c[i].norm_sqr()).sum()
    }

    pub fn low_phase_weight_real(&self, psi: &DVector<f64>, theta: f64) -> f64 {
        self.low_phase_weight(&psi.map(|x| Complex64::new(x, 0.0)), theta)
    }
}

/// `P_Θ(U)` as a dense matrix.
pub fn low_phase_projector(u: &SpectralUnitary, theta: f64) -> Result<DMatrix<Complex64>> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidParameter(format!("Θ must lie in [0, π], got {theta}")));
    }
    let n = u.dim();
    let mut p = DMatrix::zeros(n, n);
    for i in u.low_phase_indices(theta) {
        let q = u.vectors().column(i);
        p += q * q.adjoint();
    }
    Ok(p)
}

/// Check `‖P_Θ(U) Π w‖ ≤ (Θ/2)‖w‖` for `U = (2Π − I)(2Λ − I)`.
pub fn verify_effective_spectral_gap(
    pi: &DMatrix<f64>,
    lambda: &DMatrix<f64>,
    w: &DVector<f64>,
    theta: f64,
) -> Result<bool> {
    let n = pi.nrows();
    if (lambda * w).norm() > 1e-9 * w.norm().max(1.0) {
        return Err(Error::InvalidParameter("Λw must vanish".into()));
    }
    let id = DMatrix::identity(n, n);
    let u = SpectralUnitary::new((pi * 2.0 - &id) * (lambda * 2.0 - &id))?;
    let lhs = u.low_phase_weight_real(&(pi * w), theta).sqrt();
    Ok(lhs <= theta / 2.0 * w.norm() + 1e-9)
}

/// `U(P,x,α) = (2Π̃_x − I)(2Λ_α − I)` on `H̃`.
#[derive(Debug)]
pub struct ReflectionUnitary {
    alpha: f64,
    space: ExtendedSpace,
    pi_mask: Vec<bool>,
    lambda: DMatrix<f64>,
    spectral: SpectralUnitary,
    hat0_coeffs: DVector<Complex64>,
    zero_branches: Mutex<HashMap<(u64, u64), Arc<ZeroBranch>>>,
}

/// Eigenphases with their `|⟨0̂|λ⟩|²` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDump {
    pub alpha: f64,
    pub pairs: Vec<[f64; 2]>,
}

pub fn build_u(p: &SpanProgram, x: &[bool], alpha: f64) -> Result<ReflectionUnitary> {
    let a = build_a_alpha(p, alpha)?;
    let lambda = kernel_projector(&a);
    let space = ExtendedSpace { dim_h: p.dim_h() };
    let mut pi_mask = p.hx_mask(x)?;
    pi_mask.push(true);
    let n = space.dim();
    let reflect_l = &lambda * 2.0 - DMatrix::identity(n, n);
    let mut u = reflect_l;
    for (i, &keep) in pi_mask.iter().enumerate() {
        if !keep {
            u.row_mut(i).neg_mut();
        }
    }
    let spectral = SpectralUnitary::new(u)?;
    let hat0_coeffs = spectral.vectors().row(space.hat0()).adjoint();
    Ok(ReflectionUnitary {
        alpha,
        space,
        pi_mask,
        lambda,
        spectral,
        hat0_coeffs,
        zero_branches: Mutex::new(HashMap::new()),
    })
}

impl ReflectionUnitary {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn space(&self) -> ExtendedSpace {
        self.space
    }

    pub fn spectral(&self) -> &SpectralUnitary {
        &self.spectral
    }

    pub fn u(&self) -> &DMatrix<f64> {
        self.spectral.u()
    }

    pub fn phases(&self) -> &[f64] {
        self.spectral.phases()
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    /// Diagonal of `Π̃_x`.
    pub fn pi_mask(&self) -> &[bool] {
        &self.pi_mask
    }

    /// `Π̃_x` as a dense matrix.
    pub fn pi(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.pi_mask.len(),
            self.pi_mask.iter().map(|&b| if b { 1.0 } else { 0.0 }),
        ))
    }

    /// `‖(2Π̃ − I)(2Λ − I) − U‖` from the stored projectors.
    pub fn projector_reconstruction_error(&self) -> f64 {
        let n = self.space.dim();
        let id = DMatrix::identity(n, n);
        ((self.pi() * 2.0 - &id) * (&self.lambda * 2.0 - &id) - self.u()).norm()
    }

    /// `⟨λ_i|0̂⟩`.
    pub fn hat0_coefficients(&self) -> &DVector<Complex64> {
        &self.hat0_coeffs
    }

    /// `‖P_Θ |0̂⟩‖²`.
    pub fn hat0_low_phase_weight(&self, theta: f64) -> f64 {
        self.spectral.low_phase_indices(theta).iter().map(|&i| self.hat0_coeffs[i].norm_sqr()).sum()
    }

    pub fn spectrum(&self) -> SpectrumDump {
        SpectrumDump {
            alpha: self.alpha,
            pairs: self.phases().iter().zip(self.hat0_coeffs.iter()).map(|(&p, c)| [p, c.norm_sqr()]).collect(),
        }
    }

    /// Zero-outcome branch of phase estimation started from `|0̂⟩`, cached per model.
    pub fn hat0_zero_branch(&self, model: &PhaseEstimationModel) -> Arc<ZeroBranch> {
        let key = (model.theta.to_bits(), model.eps.to_bits());
        let mut cache = self.zero_branches.lock().expect("zero-branch cache poisoned");
        cache
            .entry(key)
            .or_insert_with(|| Arc::new(ZeroBranch::from_coefficients(&self.spectral, &self.hat0_coeffs, model)))
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::quantum::WitnessDecomposition;
    use crate::span::{build_stconn_program, positive_witness};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> crate::span::StConnProgram {
        build_stconn_program(&Graph::new(3, &[(0, 1), (0, 2), (2, 1)], 0, 1).unwrap())
    }

    #[test]
    fn unitary_fixes_psi_plus_and_kills_psi_minus() {
        let sp = triangle();
        let x = [false, true, true];
        let pos = positive_witness(sp.program(), &x).unwrap();
        for alpha in [0.2, 1.0, 3.0] {
            let u = build_u(sp.program(), &x, alpha).unwrap();
            assert!(u.spectral().unitarity_residual() < 1e-9);
            assert!(u.spectral().reconstruction_error() < 1e-9);
            assert!(u.projector_reconstruction_error() < 1e-12);
            let d = WitnessDecomposition::new(&pos.w, pos.w_plus, alpha).unwrap();
            assert!((u.u() * &d.psi_plus - &d.psi_plus).norm() < 1e-9);
            assert!(u.spectral().low_phase_weight_real(&d.psi_minus, 0.0).sqrt() < 1e-9);
            let a0 = u.hat0_low_phase_weight(0.0);
            assert!((a0 - d.a0).abs() < 1e-9);
        }
    }

    #[test]
    fn phases_come_in_conjugate_pairs() {
        let sp = triangle();
        let u = build_u(sp.program(), &[true, false, true], 0.7).unwrap();
        let mut p: Vec<f64> = u.phases().to_vec();
        let mut q: Vec<f64> = p.iter().map(|&x| if x >= std::f64::consts::PI - 1e-9 { x } else { -x }).collect();
        p.sort_by(f64::total_cmp);
        q.sort_by(f64::total_cmp);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn projector_limits() {
        let sp = triangle();
        let u = build_u(sp.program(), &[true, true, true], 1.0).unwrap();
        let n = u.space().dim();
        let full = low_phase_projector(u.spectral(), std::f64::consts::PI).unwrap();
        assert!((full - DMatrix::<Complex64>::identity(n, n)).norm() < 1e-9);
        let p0 = low_phase_projector(u.spectral(), 0.0).unwrap();
        let uc = u.u().map(|x| Complex64::new(x, 0.0));
        assert!((&uc * &p0 - &p0).norm() < 1e-9);
        assert!(low_phase_projector(u.spectral(), 4.0).is_err());
    }

    #[test]
    fn random_projector_pairs_satisfy_gap_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(2..7);
            let proj = |rng: &mut ChaCha8Rng| {
                let k = rng.random_range(1..n);
                let m = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
                let q = m.qr().q();
                &q * q.transpose()
            };
            let pi = proj(&mut rng);
            let lambda = proj(&mut rng);
            let id = DMatrix::<f64>::identity(n, n);
            let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let w = (&id - &lambda) * v;
            for theta in [0.0, 0.1, 0.5, 1.5, std::f64::consts::PI] {
                assert!(verify_effective_spectral_gap(&pi, &lambda, &w, theta).unwrap());
            }
        }
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(verify_effective_spectral_gap(&id, &id, &DVector::from_vec(vec![1.0, 0.0]), 0.1).is_err());
    }
}
