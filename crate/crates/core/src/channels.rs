//! Gaussian operations on covariance matrices.
//!
//! A general Gaussian local operation acts on `gamma` as the Schur complement
//! `G(gamma) = T1 - T12 (T2 + gamma)^-1 T12^T` of the partially transposed
//! channel matrix `T = Lambda Gamma Lambda`. Lossy fibres are modelled by
//! thermal attenuation of each transmitted mode.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pure_states::tmss_cm;
use crate::symplectic::{
    is_valid_cov, p_index, q_index, reorder, GaussianState, ModeOrdering, DEFAULT_TOL,
};

/// Covariance matrix of the state characterizing a Gaussian operation from
/// `n_in` input modes to `n_out` output modes, QPQP ordering, output modes first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCM {
    gamma: DMatrix<f64>,
    n_out: usize,
    n_in: usize,
}

impl ChannelCM {
    pub fn new(gamma: DMatrix<f64>, n_out: usize, n_in: usize) -> Result<Self> {
        let gamma = linalg::require_symmetric(&gamma)?;
        if gamma.nrows() != 2 * (n_out + n_in) {
            return Err(Error::Dimension(format!(
                "channel matrix is {0}x{0}, expected {1}",
                gamma.nrows(),
                2 * (n_out + n_in)
            )));
        }
        if !is_valid_cov(&gamma, ModeOrdering::Qpqp, DEFAULT_TOL) {
            return Err(Error::InvalidState(f64::NAN));
        }
        let ch = Self { gamma, n_out, n_in };
        let lam = linalg::min_eigenvalue(&ch.transposed());
        if lam < -DEFAULT_TOL {
            return Err(Error::NotPositiveDefinite(format!(
                "partially transposed channel matrix has eigenvalue {lam}"
            )));
        }
        Ok(ch)
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// Channel matrix with the input-side momenta sign-flipped.
    pub fn transposed(&self) -> DMatrix<f64> {
        let mut g = self.gamma.clone();
        for k in 0..self.n_in {
            let p = 2 * (self.n_out + k) + 1;
            g.row_mut(p).neg_mut();
            g.column_mut(p).neg_mut();
        }
        g
    }
}

/// Applies the Schur-complement map of `ch` to `state` (output in QPQP ordering).
pub fn apply_glocc(ch: &ChannelCM, state: &GaussianState) -> Result<GaussianState> {
    if state.n_modes() != ch.n_in {
        return Err(Error::Dimension(format!(
            "channel expects {} input modes, state has {}",
            ch.n_in,
            state.n_modes()
        )));
    }
    let st = reorder(state, ModeOrdering::Qpqp);
    let t = ch.transposed();
    let (o, i) = (2 * ch.n_out, 2 * ch.n_in);
    let t1 = t.view((0, 0), (o, o));
    let t12 = t.view((0, o), (o, i));
    let t2 = t.view((o, o), (i, i));
    let inner = t2 + st.cov();
    let lu = inner.clone().lu();
    let sol = lu
        .solve(&t12.transpose())
        .ok_or_else(|| Error::Numerical("singular T2 + gamma in Schur complement".into()))?;
    let scale = linalg::max_abs(&inner).max(1.0);
    let det = lu.determinant();
    if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(i as i32) {
        return Err(Error::Numerical("singular T2 + gamma in Schur complement".into()));
    }
    let out = t1 - t12 * sol;
    GaussianState::from_cov(linalg::symmetrize(&out), ModeOrdering::Qpqp)
}

/// Mean thermal photon number `1 / (exp(1/tau) - 1)`, exactly zero at `tau = 0`.
pub fn n_thermal(tau: f64) -> Result<f64> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Parameter(format!("temperature must be >= 0, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 / tau).exp_m1())
}

/// Thermal attenuation of one mode: the mode's covariance block becomes
/// `T^2 A + (2 N_th + 1)(1 - T^2) I` and its correlations are scaled by `T`.
pub fn attenuate_mode(state: &GaussianState, mode: usize, t: f64, n_th: f64) -> Result<GaussianState> {
    let n = state.n_modes();
    if mode >= n {
        return Err(Error::Parameter(format!("mode {mode} out of range for {n} modes")));
    }
    if !(0.0..=1.0).contains(&t) || !(n_th >= 0.0) {
        return Err(Error::Parameter(format!("need 0 <= T <= 1 and N_th >= 0, got {t}, {n_th}")));
    }
    let ord = state.ordering();
    let idx = [q_index(n, mode, ord), p_index(n, mode, ord)];
    let mut scale = DVector::from_element(2 * n, 1.0);
    for &i in &idx {
        scale[i] = t;
    }
    let mut cov = state.cov().clone();
    for i in 0..2 * n {
        for j in 0..2 * n {
            cov[(i, j)] *= scale[i] * scale[j];
        }
    }
    let noise = (2.0 * n_th + 1.0) * (1.0 - t * t);
    for &i in &idx {
        cov[(i, i)] += noise;
    }
    let disp = state.disp().component_mul(&scale);
    GaussianState::new(cov, disp, ord)
}

/// Placement of the source along the fibre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    /// Source halfway; both modes cross half the fibre.
    Symmetric,
    /// Source at one end; one mode crosses the whole fibre.
    Asymmetric,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Symmetric => f.write_str("sym"),
            Setting::Asymmetric => f.write_str("asym"),
        }
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sym" | "symmetric" => Ok(Setting::Symmetric),
            "asym" | "asymmetric" => Ok(Setting::Asymmetric),
            other => Err(Error::Parse(format!("unknown setting {other:?}"))),
        }
    }
}

/// Amplitude transmissions `(T1, T2)` for fibre length `l / l_A`.
pub fn setting_transmissions(length_ratio: f64, setting: Setting) -> (f64, f64) {
    match setting {
        Setting::Asymmetric => ((-length_ratio).exp(), 1.0),
        Setting::Symmetric => {
            let t = (-length_ratio / 2.0).exp();
            (t, t)
        }
    }
}

/// Fibre length, temperature and source placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberSpec {
    length_ratio: f64,
    tau: f64,
    setting: Setting,
    n_th: f64,
}

impl FiberSpec {
    pub fn new(length_ratio: f64, tau: f64, setting: Setting) -> Result<Self> {
        if !(length_ratio >= 0.0) || !length_ratio.is_finite() {
            return Err(Error::Parameter(format!("length ratio must be >= 0, got {length_ratio}")));
        }
        Ok(Self { length_ratio, tau, setting, n_th: n_thermal(tau)? })
    }

    pub fn length_ratio(&self) -> f64 {
        self.length_ratio
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    pub fn transmissions(&self) -> (f64, f64) {
        setting_transmissions(self.length_ratio, self.setting)
    }
}

/// Two-mode squeezed state with squeezing `r` after the fibre:
///
/// ```text
/// [[c1', 0, -s', 0], [0, c1', 0, s'], [-s', 0, c2', 0], [0, s', 0, c2']]
/// c_i' = c T_i^2 + (2 N_th + 1)(1 - T_i^2),  s' = s T1 T2
/// ```
pub fn fiber_output(r: f64, spec: &FiberSpec) -> Result<GaussianState> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Parameter(format!("squeezing must be >= 0, got {r}")));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    let (t1, t2) = spec.transmissions();
    let noise = 2.0 * spec.n_th + 1.0;
    let c1 = c * t1 * t1 + noise * (1.0 - t1 * t1);
    let c2 = c * t2 * t2 + noise * (1.0 - t2 * t2);
    let sp = s * t1 * t2;
    #[rustfmt::skip]
    let cov = DMatrix::from_row_slice(4, 4, &[
         c1, 0.0, -sp, 0.0,
        0.0,  c1, 0.0,  sp,
        -sp, 0.0,  c2, 0.0,
        0.0,  sp, 0.0,  c2,
    ]);
    GaussianState::from_cov(cov, ModeOrdering::Qpqp)
}

/// Channel matrix of a one-mode thermal attenuator built on a two-mode
/// squeezed resource with squeezing `r`. Its Schur-complement action
/// approaches `attenuate_mode` as `r` grows; the exact deviation is
/// `T^2 (I - gamma^2)(cosh(2r) I + gamma)^-1`.
pub fn attenuator_channel(t: f64, n_th: f64, r: f64) -> Result<ChannelCM> {
    let resource = tmss_cm(r);
    // Attenuate the output arm (mode 0); mode 1 is the input port.
    let gamma = attenuate_mode(&resource, 0, t, n_th)?;
    ChannelCM::new(gamma.cov().clone(), 1, 1)
}
