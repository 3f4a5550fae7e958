//! Span programs, optimal witnesses, and the st-connectivity program.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{directed_label, Graph, Vertex};
use crate::linalg::{pinv, pinv_scaled, right_svd, right_svd_scaled};

/// A span program on `{0,1}^m` with coordinate-aligned input subspaces.
///
/// Each `H_{j,a}` is spanned by a set of standard basis vectors of `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanProgram {
    a: DMatrix<f64>,
    tau: DVector<f64>,
    blocks: Vec<[Vec<usize>; 2]>,
    h_true: Vec<usize>,
    h_false: Vec<usize>,
    labels: Vec<String>,
}

impl SpanProgram {
    /// `blocks[j][a]` lists the basis vectors spanning `H_{j,a}`.
    pub fn new(
        a: DMatrix<f64>,
        tau: DVector<f64>,
        blocks: Vec<[Vec<usize>; 2]>,
        h_true: Vec<usize>,
        h_false: Vec<usize>,
        labels: Vec<String>,
    ) -> Result<SpanProgram> {
        let dim_h = a.ncols();
        if tau.len() != a.nrows() {
            return Err(Error::InvalidParameter(format!(
                "target has dimension {}, operator has {} rows",
                tau.len(),
                a.nrows()
            )));
        }
        if labels.len() != dim_h {
            return Err(Error::InvalidParameter("one label per basis vector required".into()));
        }
        let mut owner = vec![0usize; dim_h];
        let mut mark = |idx: &[usize]| -> Result<()> {
            for &i in idx {
                if i >= dim_h {
                    return Err(Error::InvalidParameter(format!("basis index {i} out of range")));
                }
                owner[i] += 1;
            }
            Ok(())
        };
        for block in &blocks {
            let mut hj: Vec<usize> = block[0].iter().chain(&block[1]).copied().collect();
            hj.sort_unstable();
            hj.dedup();
            mark(&hj)?;
        }
        mark(&h_true)?;
        mark(&h_false)?;
        if owner.iter().any(|&c| c != 1) {
            return Err(Error::InvalidParameter("H must be the direct sum of the H_j, H_true and H_false".into()));
        }
        Ok(SpanProgram { a, tau, blocks, h_true, h_false, labels })
    }

    pub fn dim_h(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim_v(&self) -> usize {
        self.a.nrows()
    }

    /// Input length.
    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn tau(&self) -> &DVector<f64> {
        &self.tau
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Diagonal of the projector onto `H(x) = ⊕_j H_{j,x_j} ⊕ H_true`.
    pub fn hx_mask(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.m() {
            return Err(Error::InputLength { got: x.len(), expected: self.m() });
        }
        let mut mask = vec![false; self.dim_h()];
        for (j, block) in self.blocks.iter().enumerate() {
            for &i in &block[usize::from(x[j])] {
                mask[i] = true;
            }
        }
        for &i in &self.h_true {
            mask[i] = true;
        }
        Ok(mask)
    }

    /// `A Π_{H(x)}`.
    fn a_restricted(&self, mask: &[bool]) -> DMatrix<f64> {
        let mut b = self.a.clone();
        for (j, &keep) in mask.iter().enumerate() {
            if !keep {
                b.column_mut(j).fill(0.0);
            }
        }
        b
    }
}

/// Projector onto `H(x)` as a dense diagonal matrix.
pub fn projector_hx(p: &SpanProgram, x: &[bool]) -> Result<DMatrix<f64>> {
    let mask = p.hx_mask(x)?;
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(mask.len(), mask.iter().map(|&b| if b { 1.0 } else { 0.0 }))))
}

/// The st-connectivity span program of a parent graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StConnProgram {
    program: SpanProgram,
    directed: Vec<(Vertex, Vertex)>,
    s: Vertex,
    t: Vertex,
}

impl StConnProgram {
    pub fn program(&self) -> &SpanProgram {
        &self.program
    }

    /// Directed edge of each basis vector of `H`.
    pub fn directed_edges(&self) -> &[(Vertex, Vertex)] {
        &self.directed
    }

    pub fn s(&self) -> Vertex {
        self.s
    }

    pub fn t(&self) -> Vertex {
        self.t
    }
}

/// `A|u,v⟩ = |u⟩ − |v⟩`, `τ = |s⟩ − |t⟩`, `H_{i,1}` spanned by both orientations of `E_i`.
pub fn build_stconn_program(g: &Graph) -> StConnProgram {
    let directed = g.directed_edges();
    let mut a = DMatrix::zeros(g.n(), directed.len());
    for (k, &(u, v)) in directed.iter().enumerate() {
        a[(u, k)] = 1.0;
        a[(v, k)] = -1.0;
    }
    let mut tau = DVector::zeros(g.n());
    if g.s() != g.t() {
        tau[g.s()] = 1.0;
        tau[g.t()] = -1.0;
    }
    let blocks = g
        .association()
        .sets
        .iter()
        .map(|edges| [Vec::new(), edges.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()])
        .collect();
    let labels = directed.iter().map(|&(u, v)| directed_label(u, v)).collect();
    let program = SpanProgram::new(a, tau, blocks, Vec::new(), Vec::new(), labels)
        .expect("st-connectivity program is well-formed");
    StConnProgram { program, directed, s: g.s(), t: g.t() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveWitnessReport {
    pub w: DVector<f64>,
    pub w_plus: f64,
}

/// The minimum-norm positive witness `(AΠ)⁺τ`.
pub fn positive_witness(p: &SpanProgram, x: &[bool]) -> Result<PositiveWitnessReport> {
    let mask = p.hx_mask(x)?;
    let b = p.a_restricted(&mask);
    let w = pinv(&b) * &p.tau;
    let residual = (&p.a * &w - &p.tau).norm();
    if residual > 1e-8 {
        return Err(Error::NotOneInput(residual));
    }
    Ok(PositiveWitnessReport { w_plus: w.norm_squared(), w })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeWitnessReport {
    pub omega: DVector<f64>,
    pub neg_error: f64,
    pub neg_size: f64,
}

/// Lexicographic minimizer: first `‖ωAΠ‖²` subject to `⟨ω|τ⟩ = 1`, then `‖ωA‖²`.
pub fn approx_negative_witness(p: &SpanProgram, x: &[bool]) -> Result<NegativeWitnessReport> {
    let tau = &p.tau;
    let tt = tau.norm_squared();
    if tt == 0.0 {
        return Err(Error::IllPosed("target is zero".into()));
    }
    let mask = p.hx_mask(x)?;
    let bt = p.a_restricted(&mask).transpose();
    let at = p.a.transpose();
    let omega0 = tau / tt;
    let perp = right_svd(&DMatrix::from_row_slice(1, tau.len(), tau.as_slice())).null_space;
    // Cutoffs are taken relative to the scale of A so that directions annihilated
    // up to roundoff (such as constant potentials) count as exact null directions.
    let scale = Some(p.a.norm().max(f64::MIN_POSITIVE));
    let m1 = &bt * &perp;
    let z1 = -(pinv_scaled(&m1, scale) * (&bt * &omega0));
    let kernel = right_svd_scaled(&m1, scale).null_space;
    let base = &omega0 + &perp * &z1;
    let omega = if kernel.ncols() > 0 {
        let m2 = &at * &perp * &kernel;
        let y = -(pinv_scaled(&m2, scale) * (&at * &base));
        base + &perp * (&kernel * y)
    } else {
        base
    };
    Ok(NegativeWitnessReport {
        neg_error: (&bt * &omega).norm_squared(),
        neg_size: (&at * &omega).norm_squared(),
        omega,
    })
}

/// `‖w − w₊ Π_{H(x)} (ωA)†‖` for the optimal positive and negative witnesses.
pub fn verify_inverse_witness(p: &SpanProgram, x: &[bool]) -> Result<f64> {
    let pos = positive_witness(p, x)?;
    let neg = approx_negative_witness(p, x)?;
    let mask = p.hx_mask(x)?;
    let bt = p.a_restricted(&mask).transpose();
    Ok((&pos.w - (bt * &neg.omega) * pos.w_plus).norm())
}

/// Upper bounds on the positive and approximate negative witness sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessBounds {
    pub w_plus: f64,
    pub w_minus_tilde: f64,
}

/// `W₊ = n/2`, `W̃₋ = c₋ n²`.
pub fn default_bounds_stconn(n: usize, c_minus: f64) -> Result<WitnessBounds> {
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    let n = n as f64;
    Ok(WitnessBounds { w_plus: n / 2.0, w_minus_tilde: c_minus * n * n })
}

/// Basis-labeled amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDump {
    pub basis: Vec<String>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl WitnessDump {
    pub fn real(labels: &[String], v: &DVector<f64>) -> Self {
        WitnessDump { basis: labels.to_vec(), amplitudes: v.iter().map(|&x| [x, 0.0]).collect() }
    }

    pub fn complex(labels: &[String], v: &DVector<Complex64>) -> Self {
        WitnessDump { basis: labels.to_vec(), amplitudes: v.iter().map(|z| [z.re, z.im]).collect() }
    }
}
