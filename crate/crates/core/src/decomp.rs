//! Checks on Gaussian mixing decompositions.
//!
//! A Gaussian state with covariance `gamma` is a Gaussian-weighted mixture of
//! displaced copies of any pure state `gamma_p <= gamma`, the mixing
//! distribution having covariance `gamma - gamma_p`. Conversely, if a
//! classical Gaussian `G(A, 0, x)` (precision matrix `A`) is written as a
//! mixture of Gaussians `G(B, b, x)`, every component must satisfy `B >= A`.
//! The proof of that support condition compares tails along rays `x` with
//! `x^T (A - B) x > 0`; here the condition is decided directly from the
//! spectrum of `A - B`, and a violating eigenvector is returned as witness.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pure_states::PURITY_TOL;
use crate::symplectic::{purity_defect, GaussianState, ModeOrdering};

/// Tolerance applied to eigenvalue sign decisions.
pub const DECOMP_TOL: f64 = 1e-10;

/// One weighted component `w * G(B, b, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub precision: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    pub weight: f64,
}

/// Finite mixture of classical Gaussians on `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussMixture {
    dim: usize,
    precisions: Vec<DMatrix<f64>>,
    centers: Vec<DVector<f64>>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MixtureJson {
    dim: usize,
    components: Vec<MixtureComponent>,
}

impl GaussMixture {
    pub fn new(
        dim: usize,
        precisions: Vec<DMatrix<f64>>,
        centers: Vec<DVector<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if precisions.is_empty() || precisions.len() != centers.len() || centers.len() != weights.len() {
            return Err(Error::Dimension("mixture needs matching, non-empty component lists".into()));
        }
        let mut checked = Vec::with_capacity(precisions.len());
        for (b, c) in precisions.iter().zip(&centers) {
            if b.nrows() != dim || c.len() != dim {
                return Err(Error::Dimension(format!("component does not match dimension {dim}")));
            }
            let b = linalg::require_symmetric(b)?;
            if Cholesky::new(b.clone()).is_none() {
                return Err(Error::NotPositiveDefinite("component precision".into()));
            }
            checked.push(b);
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Parameter("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { dim, precisions: checked, centers, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn precision(&self, i: usize) -> &DMatrix<f64> {
        &self.precisions[i]
    }

    pub fn center(&self, i: usize) -> &DVector<f64> {
        &self.centers[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Reads `{"dim": n, "components": [{"precision": [[..]], "center": [..], "weight": w}]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: MixtureJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut precisions = Vec::new();
        let mut centers = Vec::new();
        let mut weights = Vec::new();
        for c in wire.components {
            precisions.push(matrix_from_rows(&c.precision)?);
            centers.push(DVector::from_vec(c.center));
            weights.push(c.weight);
        }
        Self::new(wire.dim, precisions, centers, weights)
    }

    pub fn to_json(&self) -> String {
        let wire = MixtureJson {
            dim: self.dim,
            components: (0..self.len())
                .map(|i| MixtureComponent {
                    precision: rows_of(&self.precisions[i]),
                    center: self.centers[i].iter().copied().collect(),
                    weight: self.weights[i],
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("mixture serializes")
    }
}

/// Parses a row-major square matrix.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("expected a non-empty square matrix".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Classical noise covariance `gamma - gamma_p` for a pure `gamma_p <= gamma`.
pub fn mixing_noise_cm(gamma: &GaussianState, gamma_p: &GaussianState) -> Result<DMatrix<f64>> {
    if gamma.n_modes() != gamma_p.n_modes() {
        return Err(Error::Dimension("covariance matrices differ in size".into()));
    }
    let defect = purity_defect(gamma_p)?;
    if defect > PURITY_TOL {
        return Err(Error::NotPure(defect));
    }
    let target = gamma.to_ordering(ModeOrdering::Qpqp);
    let cand = gamma_p.to_ordering(ModeOrdering::Qpqp);
    let noise = target.cov() - cand.cov();
    let lam = linalg::min_eigenvalue(&noise);
    if lam < -DECOMP_TOL * linalg::max_abs(target.cov()).max(1.0) {
        return Err(Error::NotBelow(lam));
    }
    Ok(noise)
}

/// Worst absolute deviation of
/// `exp(-xi^T gamma xi / 4) = exp(-xi^T gamma_p xi / 4) exp(-xi^T (gamma - gamma_p) xi / 4)`
/// over `n_samples` standard normal `xi`.
pub fn characteristic_identity_check(
    gamma: &GaussianState,
    gamma_p: &GaussianState,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let noise = mixing_noise_cm(gamma, gamma_p)?;
    let g = gamma.to_ordering(ModeOrdering::Qpqp);
    let gp = gamma_p.to_ordering(ModeOrdering::Qpqp);
    let dim = noise.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quad = |m: &DMatrix<f64>, xi: &DVector<f64>| xi.dot(&(m * xi));
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let xi = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let lhs = (-0.25 * quad(g.cov(), &xi)).exp();
        let rhs = (-0.25 * quad(gp.cov(), &xi)).exp() * (-0.25 * quad(&noise, &xi)).exp();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Component violating `B >= A`, with a direction `x` where `x^T (A - B) x > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub component: usize,
    pub direction: DVector<f64>,
    /// `x^T (A - B) x` for the returned unit vector.
    pub excess: f64,
}

/// First mixture component whose precision fails `B >= A - tol`.
pub fn lemma3_witness(a: &DMatrix<f64>, mix: &GaussMixture) -> Result<Option<Witness>> {
    lemma3_witness_tol(a, mix, DECOMP_TOL)
}

pub fn lemma3_witness_tol(a: &DMatrix<f64>, mix: &GaussMixture, tol: f64) -> Result<Option<Witness>> {
    let a = linalg::require_symmetric(a)?;
    if a.nrows() != mix.dim() {
        return Err(Error::Dimension(format!(
            "target is {0}x{0}, mixture has dimension {1}",
            a.nrows(),
            mix.dim()
        )));
    }
    if Cholesky::new(a.clone()).is_none() {
        return Err(Error::NotPositiveDefinite("target precision".into()));
    }
    for (i, b) in mix.precisions.iter().enumerate() {
        let gap = &a - b;
        let (lam, x) = linalg::max_eigenpair(&gap);
        if lam > tol {
            let excess = x.dot(&(&gap * &x));
            if excess > 0.0 {
                return Ok(Some(Witness { component: i, direction: x, excess }));
            }
        }
    }
    Ok(None)
}
