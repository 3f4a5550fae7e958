//! Small dense linear-algebra helpers with a relative rank cutoff.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::config::RANK_CUTOFF;

/// Pseudoinverse of a symmetric matrix via its spectral decomposition.
pub fn pinv_symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut out = DMatrix::zeros(n, n);
    if top == 0.0 {
        return out;
    }
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > RANK_CUTOFF * top {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lam;
        }
    }
    out
}

/// SVD whose reconstruction is verified.
///
/// With the default convergence threshold the bidiagonal iteration can stop
/// early on rank-deficient incidence-like matrices, so tighter thresholds are
/// tried first and the factorization with the smallest reconstruction error wins.
pub fn svd(m: &DMatrix<f64>) -> SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    let scale = m.norm().max(1.0);
    let mut best: Option<(f64, SVD<f64, nalgebra::Dyn, nalgebra::Dyn>)> = None;
    for eps in [1e-17, 1e-16, f64::EPSILON, 1e-15, 1e-14, 1e-13, 1e-12] {
        if let Some(f) = SVD::try_new(m.clone(), true, true, eps, 100_000) {
            let err = (f.clone().recompose().expect("both factors computed") - m).norm();
            if err <= 1e-12 * scale {
                return f;
            }
            if best.as_ref().is_none_or(|(e, _)| err < *e) {
                best = Some((err, f));
            }
        }
    }
    best.map(|(_, f)| f).unwrap_or_else(|| m.clone().svd(true, true))
}

/// Right singular structure of `m`: orthonormal bases of the row space and of the null space.
#[derive(Debug, Clone)]
pub struct RightSvd {
    /// Nonzero singular values, paired with the columns of `row_space`.
    pub sigma: Vec<f64>,
    pub row_space: DMatrix<f64>,
    pub null_space: DMatrix<f64>,
}

/// Full right SVD, padding with zero rows so the null space is complete.
pub fn right_svd(m: &DMatrix<f64>) -> RightSvd {
    right_svd_scaled(m, None)
}

/// As [`right_svd`], with the cutoff relative to `scale` instead of the largest singular value.
pub fn right_svd_scaled(m: &DMatrix<f64>, scale: Option<f64>) -> RightSvd {
    let (r, c) = m.shape();
    if c == 0 {
        return RightSvd { sigma: vec![], row_space: DMatrix::zeros(0, 0), null_space: DMatrix::zeros(0, 0) };
    }
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = svd(&padded);
    let vt = svd.v_t.expect("requested right singular vectors");
    let top = scale.unwrap_or_else(|| svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b)));
    let mut keep = Vec::new();
    let mut null = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if top > 0.0 && s > RANK_CUTOFF * top {
            keep.push(k);
        } else {
            null.push(k);
        }
    }
    let cols = |idx: &[usize]| {
        let mut out = DMatrix::zeros(c, idx.len());
        for (j, &k) in idx.iter().enumerate() {
            out.set_column(j, &vt.row(k).transpose());
        }
        out
    };
    RightSvd {
        sigma: keep.iter().map(|&k| svd.singular_values[k]).collect(),
        row_space: cols(&keep),
        null_space: cols(&null),
    }
}

/// Moore–Penrose pseudoinverse with the relative cutoff.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    pinv_scaled(m, None)
}

/// As [`pinv`], with the cutoff relative to `scale` instead of the largest singular value.
pub fn pinv_scaled(m: &DMatrix<f64>, scale: Option<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = svd(m);
    let u = svd.u.as_ref().expect("u");
    let vt = svd.v_t.as_ref().expect("v_t");
    let top = scale.unwrap_or_else(|| svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b)));
    let mut out = DMatrix::zeros(c, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if top > 0.0 && s > RANK_CUTOFF * top {
            out += vt.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// Minimum-norm least-squares solution of `m x = b`.
pub fn lstsq(m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    pinv(m) * b
}
