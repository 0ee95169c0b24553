//! Pure Gaussian states: the `(X, Y)` parameterization, pure-state
//! entanglement entropy and the two-mode squeezed state.
//!
//! Units: entanglement is reported in ebits (base-2 logarithms).
//!
//! Squeezing conventions differ between the two formulas used here. The
//! two-mode squeezed state `tmss_cm(r)` has reduced covariance
//! `cosh(2r) * identity`, while the entropy of a pure state is `sum_k H(r_k)`
//! with reduced symplectic eigenvalues `a_k = cosh(r_k)`. Consequently
//! `entanglement_entropy(tmss_cm(r)) = H(2r)`.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{
    purity_defect, reduced_state, reorder, symplectic_spectrum, GaussianState, ModeOrdering,
    Partition,
};

/// Purity tolerance applied to inputs of routines that require a pure state.
pub const PURITY_TOL: f64 = 1e-7;

/// Entanglement in ebits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct EntanglementValue(f64);

impl EntanglementValue {
    pub const ZERO: EntanglementValue = EntanglementValue(0.0);

    /// Wraps a value, clamping tiny negative round-off to zero.
    pub fn new(ebits: f64) -> Result<Self> {
        if !ebits.is_finite() || ebits < -1e-12 {
            return Err(Error::Numerical(format!("invalid entanglement value {ebits}")));
        }
        Ok(Self(ebits.max(0.0)))
    }

    pub fn ebits(self) -> f64 {
        self.0
    }
}

impl std::ops::Add for EntanglementValue {
    type Output = EntanglementValue;

    fn add(self, rhs: Self) -> Self {
        EntanglementValue(self.0 + rhs.0)
    }
}

/// Real symmetric `X > 0` and `Y` parameterizing the pure covariance matrix
/// `[[X, XY], [YX, YXY + X^-1]]` in QQPP ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct PureCMParam {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl PureCMParam {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        let x = linalg::require_symmetric(&x)?;
        let y = linalg::require_symmetric(&y)?;
        if x.nrows() != y.nrows() {
            return Err(Error::Dimension(format!(
                "X is {0}x{0} but Y is {1}x{1}",
                x.nrows(),
                y.nrows()
            )));
        }
        if Cholesky::new(x.clone()).is_none() {
            return Err(Error::NotPositiveDefinite("X".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n_modes(&self) -> usize {
        self.x.nrows()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    /// Pure covariance matrix in QQPP ordering.
    pub fn cov_qqpp(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        let x_inv = Cholesky::new(self.x.clone())
            .expect("X checked positive definite")
            .inverse();
        let xy = &self.x * &self.y;
        let lower = &self.y * &xy + x_inv;
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.x);
        cov.view_mut((0, n), (n, n)).copy_from(&xy);
        cov.view_mut((n, 0), (n, n)).copy_from(&xy.transpose());
        cov.view_mut((n, n), (n, n)).copy_from(&lower);
        linalg::symmetrize(&cov)
    }
}

pub fn pure_cm_from_xy(p: &PureCMParam, ordering: ModeOrdering) -> GaussianState {
    let st = GaussianState::from_cov(p.cov_qqpp(), ModeOrdering::Qqpp).expect("symmetric by construction");
    reorder(&st, ordering)
}

/// Recovers `(X, Y)` from a pure covariance matrix.
pub fn xy_from_pure_cm(state: &GaussianState) -> Result<PureCMParam> {
    let defect = purity_defect(state)?;
    if defect > PURITY_TOL {
        return Err(Error::NotPure(defect));
    }
    let st = reorder(state, ModeOrdering::Qqpp);
    let n = st.n_modes();
    let x = st.cov().view((0, 0), (n, n)).into_owned();
    let c = st.cov().view((0, n), (n, n)).into_owned();
    let chol = Cholesky::new(x.clone()).ok_or_else(|| Error::NotPositiveDefinite("X block".into()))?;
    let y = chol.solve(&c);
    PureCMParam::new(x, linalg::symmetrize(&y))
}

/// `(N + 1) log2(N + 1) - N log2 N` for `N = sinh^2 r`, evaluated without
/// cancellation.
pub(crate) fn entropy_from_sinh2(n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    ((n + 1.0).ln() + n * (1.0 / n).ln_1p()) / std::f64::consts::LN_2
}

/// `H(r) = cosh^2 r log2(cosh^2 r) - sinh^2 r log2(sinh^2 r)`.
pub fn h_of_r(r: f64) -> EntanglementValue {
    EntanglementValue(entropy_from_sinh2(r.sinh().powi(2)))
}

/// Entropy contribution of a reduced symplectic eigenvalue `a = cosh r`.
/// Values slightly below one are treated as `r = 0`.
pub(crate) fn entropy_from_symplectic(a: f64) -> f64 {
    entropy_from_sinh2((a * a - 1.0).max(0.0))
}

/// Entanglement entropy of a pure state across `partition`, in ebits.
pub fn entanglement_entropy(state: &GaussianState, partition: &Partition) -> Result<EntanglementValue> {
    if partition.n_modes() != state.n_modes() {
        return Err(Error::Partition(format!(
            "partition covers {} modes, state has {}",
            partition.n_modes(),
            state.n_modes()
        )));
    }
    let defect = purity_defect(state)?;
    if defect > PURITY_TOL {
        return Err(Error::NotPure(defect));
    }
    if partition.modes_a().is_empty() || partition.modes_b().is_empty() {
        return Ok(EntanglementValue::ZERO);
    }
    let reduced = reduced_state(state, partition.modes_a())?;
    let spec = symplectic_spectrum(reduced.cov(), reduced.ordering())?;
    EntanglementValue::new(spec.values().iter().map(|&a| entropy_from_symplectic(a)).sum())
}

/// Two-mode squeezed state, QPQP ordering, with `c = cosh 2r` and `s = sinh 2r`.
pub fn tmss_cm(r: f64) -> GaussianState {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
         c, 0.0,  -s, 0.0,
        0.0,  c, 0.0,   s,
        -s, 0.0,   c, 0.0,
        0.0,  s, 0.0,   c,
    ]);
    GaussianState::from_cov(cov, ModeOrdering::Qpqp).expect("symmetric by construction")
}
