//! Local invariants `(n_a, n_b, k_q, k_p)` of two-mode states and the
//! corresponding normal form `C_q + C_p` (QQPP ordering).
//!
//! Each local diagonal block is rescaled to a multiple of the identity by a
//! one-mode symplectic map; the remaining local freedom is a rotation on
//! each side, under which the correlation block reduces to its singular
//! values. `k_q` is the larger singular value, `|k_p|` the smaller one and
//! `sign(k_p) = sign(det C)`, which is invariant under local symplectic maps.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{is_valid_state, reorder, GaussianState, ModeOrdering, DEFAULT_TOL};

/// Normal-form parameters of a two-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeInvariants {
    #[serde(rename = "na")]
    pub n_a: f64,
    #[serde(rename = "nb")]
    pub n_b: f64,
    #[serde(rename = "kq")]
    pub k_q: f64,
    #[serde(rename = "kp")]
    pub k_p: f64,
}

impl TwoModeInvariants {
    pub fn new(n_a: f64, n_b: f64, k_q: f64, k_p: f64) -> Self {
        Self { n_a, n_b, k_q, k_p }
    }

    /// Symmetric invariants `(n, n, k_q, k_p)`.
    pub fn symmetric(n: f64, k_q: f64, k_p: f64) -> Self {
        Self::new(n, n, k_q, k_p)
    }

    pub fn c_q(&self) -> Matrix2<f64> {
        Matrix2::new(self.n_a, self.k_q, self.k_q, self.n_b)
    }

    pub fn c_p(&self) -> Matrix2<f64> {
        Matrix2::new(self.n_a, self.k_p, self.k_p, self.n_b)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.n_a - self.n_b).abs() <= tol * self.n_a.abs().max(self.n_b.abs()).max(1.0)
    }

    /// Largest absolute difference between two invariant tuples.
    pub fn distance(&self, other: &Self) -> f64 {
        [
            self.n_a - other.n_a,
            self.n_b - other.n_b,
            self.k_q - other.k_q,
            self.k_p - other.k_p,
        ]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Local symplectic map `sqrt(n) * A^{-1/2}` sending a one-mode block `A` to `n * identity`.
fn normalizer(block: &Matrix2<f64>) -> Result<(f64, Matrix2<f64>)> {
    let det = block.determinant();
    if !(det > 0.0) || block[(0, 0)] <= 0.0 {
        return Err(Error::NotPositiveDefinite("local block".into()));
    }
    let n = det.sqrt();
    let e = nalgebra::SymmetricEigen::new(*block);
    let d = e.eigenvalues.map(|v| (n / v).sqrt());
    Ok((n, e.eigenvectors * Matrix2::from_diagonal(&d) * e.eigenvectors.transpose()))
}

/// Invariants of a valid two-mode state with one mode per party.
pub fn two_mode_invariants(state: &GaussianState) -> Result<TwoModeInvariants> {
    if state.n_modes() != 2 {
        return Err(Error::Dimension(format!(
            "two-mode invariants need exactly 2 modes, got {}",
            state.n_modes()
        )));
    }
    if !is_valid_state(state, DEFAULT_TOL) {
        let s = crate::symplectic::symplectic_eigenvalues(state)
            .map(|s| s.min())
            .unwrap_or(f64::NAN);
        return Err(Error::InvalidState(s));
    }
    let st = reorder(state, ModeOrdering::Qpqp);
    let a = linalg::to_matrix2(&st.cov().view((0, 0), (2, 2)).into_owned());
    let b = linalg::to_matrix2(&st.cov().view((2, 2), (2, 2)).into_owned());
    let c = linalg::to_matrix2(&st.cov().view((0, 2), (2, 2)).into_owned());

    let (n_a, s_a) = normalizer(&a)?;
    let (n_b, s_b) = normalizer(&b)?;
    let c_norm = s_a * c * s_b.transpose();
    let sv = c_norm.singular_values();
    let (hi, lo) = if sv[0] >= sv[1] { (sv[0], sv[1]) } else { (sv[1], sv[0]) };
    if !hi.is_finite() || !lo.is_finite() {
        return Err(Error::Numerical("non-finite correlation block".into()));
    }
    let det_c = c.determinant();
    let k_p = if det_c > 0.0 { lo } else { -lo };
    Ok(TwoModeInvariants { n_a, n_b, k_q: hi, k_p })
}

/// Normal-form covariance matrix `C_q + C_p` in QQPP ordering.
pub fn standard_form_cm(inv: &TwoModeInvariants) -> Result<GaussianState> {
    let (cq, cp) = (inv.c_q(), inv.c_p());
    let mut cov = DMatrix::zeros(4, 4);
    cov.view_mut((0, 0), (2, 2)).copy_from(&linalg::from_matrix2(&cq));
    cov.view_mut((2, 2), (2, 2)).copy_from(&linalg::from_matrix2(&cp));
    let st = GaussianState::from_cov(cov, ModeOrdering::Qqpp)?;
    if !is_valid_state(&st, DEFAULT_TOL) {
        let s = crate::symplectic::symplectic_eigenvalues(&st)
            .map(|s| s.min())
            .unwrap_or(f64::NAN);
        return Err(Error::InvalidState(s));
    }
    Ok(st)
}
