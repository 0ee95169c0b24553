//! Gaussian entanglement of formation of two-mode states.
//!
//! For a state in normal form `C_q + C_p` the optimal pure state can be
//! taken real, `X + X^-1`, with `C_p^-1 <= X <= C_q`. The entanglement of
//! such a pure state is an increasing function of
//! `m(X) = X11 (X^-1)11 = 1 + X12^2 / det X`, and at the minimum both matrix
//! inequalities are saturated. The saturated set (the rim) is one-dimensional:
//!
//! ```text
//! X(phi) = C_p^-1 + w w^T,   w = (C_q - C_p^-1)^{1/2} (cos phi, sin phi)
//! ```
//!
//! which is the same curve as `C_p^-1 + t(theta) v v^T` with
//! `t = det M / (v^T adj(M) v)`, but stays well defined when `M` is singular.
//! `m` is minimized along it by a dense scan followed by golden-section
//! refinement of every local minimum found by the scan.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::linalg::{self, adj2, inv2, psd_sqrt2};
use crate::normal_form::{standard_form_cm, two_mode_invariants, TwoModeInvariants};
use crate::pure_states::{entropy_from_sinh2, EntanglementValue};
use crate::symplectic::{
    partial_transpose, symplectic_eigenvalues, GaussianState, ModeOrdering, Partition, DEFAULT_TOL,
};

/// Relative tolerance for accepting symmetric invariants.
pub const SYMMETRIC_TOL: f64 = 1e-8;

const MAX_REFINED_MINIMA: usize = 4;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EofOptions {
    /// Number of rim angles sampled on `[0, pi)` before refinement.
    pub scan_points: usize,
    /// Golden-section stopping width in angle.
    pub theta_tol: f64,
    /// Separability gate: entangled iff `s1(PT) < 1 - tol`.
    pub tol: f64,
}

impl Default for EofOptions {
    fn default() -> Self {
        Self { scan_points: 1024, theta_tol: 1e-12, tol: DEFAULT_TOL }
    }
}

/// Result of the two-mode computation.
#[derive(Debug, Clone, PartialEq)]
pub struct EofResult {
    pub value: EntanglementValue,
    /// Optimal `X` on the rim; `None` for separable states.
    pub optimal_x: Option<Matrix2<f64>>,
    /// Rim angle in `[0, pi)` of the direction of `X - C_p^-1`.
    pub optimal_theta: Option<f64>,
    pub separable: bool,
    pub invariants: TwoModeInvariants,
}

impl EofResult {
    /// Optimal pure state `X + X^-1` in QQPP ordering.
    pub fn optimal_pure_state(&self) -> Option<GaussianState> {
        let x = self.optimal_x?;
        let x_inv = inv2(&x).ok()?;
        let mut cov = nalgebra::DMatrix::zeros(4, 4);
        cov.view_mut((0, 0), (2, 2)).copy_from(&linalg::from_matrix2(&x));
        cov.view_mut((2, 2), (2, 2)).copy_from(&linalg::from_matrix2(&x_inv));
        GaussianState::from_cov(cov, ModeOrdering::Qqpp).ok()
    }
}

/// `m(X) = X11 (X^-1)11`, evaluated as `1 + X12^2 / det X`.
pub fn m_of_x(x: &Matrix2<f64>) -> Result<f64> {
    Ok(1.0 + m_excess(x)?)
}

/// `m(X) - 1 = X12^2 / det X`.
fn m_excess(x: &Matrix2<f64>) -> Result<f64> {
    let det = x.determinant();
    if !(det > 0.0) || x[(0, 0)] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("m(X) needs X > 0, det = {det}")));
    }
    let x12 = 0.5 * (x[(0, 1)] + x[(1, 0)]);
    Ok(x12 * x12 / det)
}

/// Point of the rim `det(C_q - X) = det(X - C_p^-1) = 0` in direction
/// `v = (cos theta, sin theta)`: `X = C_p^-1 + t v v^T` with
/// `t = det M / (v^T adj(M) v)`, `M = C_q - C_p^-1`. Returns `None` when
/// `v^T adj(M) v` is not positive, i.e. `v` lies in the range of a
/// singular `M`.
pub fn rim_point(cq: &Matrix2<f64>, cp_inv: &Matrix2<f64>, theta: f64) -> Option<Matrix2<f64>> {
    let m = cq - cp_inv;
    let v = Vector2::new(theta.cos(), theta.sin());
    let denom = (v.transpose() * adj2(&m) * v)[(0, 0)];
    let scale = m.abs().max().max(f64::MIN_POSITIVE);
    if denom <= 1e-14 * scale {
        return None;
    }
    let t = m.determinant().max(0.0) / denom;
    Some(cp_inv + v * v.transpose() * t)
}

/// Gaussian entanglement of formation of a two-mode state, in ebits.
/// The displacement is irrelevant and ignored.
pub fn eof_two_mode(state: &GaussianState) -> Result<EofResult> {
    eof_two_mode_with(state, &EofOptions::default())
}

pub fn eof_two_mode_with(state: &GaussianState, opts: &EofOptions) -> Result<EofResult> {
    let inv = two_mode_invariants(state)?;
    eof_from_invariants(&inv, opts)
}

/// Same as [`eof_two_mode_with`] starting from normal-form invariants.
pub fn eof_from_invariants(inv: &TwoModeInvariants, opts: &EofOptions) -> Result<EofResult> {
    if opts.scan_points < 3 {
        return Err(Error::Parameter("scan_points must be at least 3".into()));
    }
    let normal = standard_form_cm(inv)?;
    let s1 = symplectic_eigenvalues(&partial_transpose(&normal, &Partition::two_mode())?)?.min();
    if s1 >= 1.0 - opts.tol {
        return Ok(EofResult {
            value: EntanglementValue::ZERO,
            optimal_x: None,
            optimal_theta: None,
            separable: true,
            invariants: *inv,
        });
    }

    let cq = inv.c_q();
    let cp_inv = inv2(&inv.c_p())?;
    let root = psd_sqrt2(&(cq - cp_inv));
    let rim = |phi: f64| -> Matrix2<f64> {
        let w = root * Vector2::new(phi.cos(), phi.sin());
        cp_inv + w * w.transpose()
    };
    let excess = |phi: f64| m_excess(&rim(phi)).unwrap_or(f64::INFINITY);

    let n = opts.scan_points;
    let step = std::f64::consts::PI / n as f64;
    let values: Vec<f64> = (0..n).map(|i| excess(i as f64 * step)).collect();

    // Local minima of the periodic scan, best first.
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let (prev, next) = (values[(i + n - 1) % n], values[(i + 1) % n]);
            values[i] <= prev && values[i] <= next
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    minima.truncate(MAX_REFINED_MINIMA);

    let mut best = (values[minima[0]], minima[0] as f64 * step);
    for &i in &minima {
        let centre = i as f64 * step;
        let (phi, val) = golden_section(&excess, centre - step, centre + step, opts.theta_tol);
        if val < best.0 {
            best = (val, phi);
        }
    }
    let (m_min_excess, phi) = best;
    let x = rim(phi);
    let w = root * Vector2::new(phi.cos(), phi.sin());
    let theta = if w.norm() > 0.0 {
        w[1].atan2(w[0]).rem_euclid(std::f64::consts::PI)
    } else {
        0.0
    };
    Ok(EofResult {
        value: EntanglementValue::new(entropy_from_sinh2(m_min_excess))?,
        optimal_x: Some(x),
        optimal_theta: Some(theta % std::f64::consts::PI),
        separable: false,
        invariants: *inv,
    })
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Closed form for symmetric invariants `(n, n, k_q, k_p)`: `H(r0)` with
/// `r0 = -1/2 ln[(n - k_q)(n + k_p)]`, and zero when that product is at
/// least one.
pub fn eof_symmetric(inv: &TwoModeInvariants) -> Result<EntanglementValue> {
    if !inv.is_symmetric(SYMMETRIC_TOL) {
        return Err(Error::Asymmetric(inv.n_a, inv.n_b));
    }
    let n = 0.5 * (inv.n_a + inv.n_b);
    let q = (n - inv.k_q) * (n + inv.k_p);
    if q >= 1.0 {
        return Ok(EntanglementValue::ZERO);
    }
    if q <= 0.0 {
        return Err(Error::InvalidState(q));
    }
    // sinh^2(r0) with e^{r0} = q^{-1/2}.
    let sinh2 = (1.0 - q).powi(2) / (4.0 * q);
    EntanglementValue::new(entropy_from_sinh2(sinh2))
}

/// Smallest symplectic eigenvalue of the partial transpose of a two-mode state.
pub fn pt_min_symplectic(state: &GaussianState) -> Result<f64> {
    Ok(symplectic_eigenvalues(&partial_transpose(state, &Partition::two_mode())?)?.min())
}
