//! Covariance-matrix algebra for Gaussian states.
//!
//! Conventions: the covariance matrix of the vacuum is the identity and a
//! state is physical iff `cov + i*sigma >= 0`, i.e. every symplectic
//! eigenvalue is at least one. The canonical internal ordering is
//! `(q1, p1, q2, p2, ...)`; the block ordering `(q1, q2, ..., p1, p2, ...)`
//! exists for conversion only, but every routine here accepts either.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Default tolerance for physicality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative tolerance when pairing the doubled spectrum of `-(cov sigma)^2`.
pub const PAIRING_TOL: f64 = 1e-8;

/// Ordering of the phase-space coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeOrdering {
    /// `(q1, p1, q2, p2, ...)`
    Qpqp,
    /// `(q1, q2, ..., p1, p2, ...)`
    Qqpp,
}

impl fmt::Display for ModeOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeOrdering::Qpqp => f.write_str("qpqp"),
            ModeOrdering::Qqpp => f.write_str("qqpp"),
        }
    }
}

/// Index of the position quadrature of `mode` among `n` modes.
pub fn q_index(_n: usize, mode: usize, ordering: ModeOrdering) -> usize {
    match ordering {
        ModeOrdering::Qpqp => 2 * mode,
        ModeOrdering::Qqpp => mode,
    }
}

/// Index of the momentum quadrature of `mode` among `n` modes.
pub fn p_index(n: usize, mode: usize, ordering: ModeOrdering) -> usize {
    match ordering {
        ModeOrdering::Qpqp => 2 * mode + 1,
        ModeOrdering::Qqpp => n + mode,
    }
}

/// Maps a QPQP coordinate index to its position in the QQPP ordering.
fn qpqp_to_qqpp(n: usize, i: usize) -> usize {
    if i % 2 == 0 {
        i / 2
    } else {
        n + i / 2
    }
}

/// Gaussian state at the level of first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    cov: DMatrix<f64>,
    disp: DVector<f64>,
    ordering: ModeOrdering,
}

impl GaussianState {
    /// Builds a state from a covariance matrix and displacement vector.
    ///
    /// The covariance matrix must be square with even dimension and symmetric
    /// up to [`linalg::SYMMETRY_TOL`]; the stored matrix is its exact
    /// symmetric part. Physicality is not checked here.
    pub fn new(cov: DMatrix<f64>, disp: DVector<f64>, ordering: ModeOrdering) -> Result<Self> {
        let cov = linalg::require_symmetric(&cov)?;
        let dim = cov.nrows();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::Dimension(format!(
                "covariance matrix must be 2n x 2n with n >= 1, got {dim}x{dim}"
            )));
        }
        if disp.len() != dim {
            return Err(Error::Dimension(format!(
                "displacement has length {}, expected {dim}",
                disp.len()
            )));
        }
        if cov.iter().chain(disp.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("non-finite entry".into()));
        }
        Ok(Self { cov, disp, ordering })
    }

    /// State with zero displacement.
    pub fn from_cov(cov: DMatrix<f64>, ordering: ModeOrdering) -> Result<Self> {
        let dim = cov.nrows();
        Self::new(cov, DVector::zeros(dim), ordering)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(n_modes, 1.0)
    }

    /// Product of identical thermal states with covariance `nu * identity`.
    pub fn thermal(n_modes: usize, nu: f64) -> Self {
        let dim = 2 * n_modes;
        Self {
            cov: DMatrix::identity(dim, dim) * nu,
            disp: DVector::zeros(dim),
            ordering: ModeOrdering::Qpqp,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn disp(&self) -> &DVector<f64> {
        &self.disp
    }

    pub fn ordering(&self) -> ModeOrdering {
        self.ordering
    }

    /// Same state expressed in another coordinate ordering.
    pub fn to_ordering(&self, target: ModeOrdering) -> Self {
        reorder(self, target)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: StateJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        wire.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StateJson::from(self)).expect("state serializes")
    }
}

/// Wire format of a [`GaussianState`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub n_modes: usize,
    pub ordering: ModeOrdering,
    pub cov: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disp: Option<Vec<f64>>,
}

impl TryFrom<StateJson> for GaussianState {
    type Error = Error;

    fn try_from(wire: StateJson) -> Result<Self> {
        let dim = 2 * wire.n_modes;
        if wire.n_modes == 0 {
            return Err(Error::Parse("n_modes must be at least 1".into()));
        }
        if wire.cov.len() != dim || wire.cov.iter().any(|row| row.len() != dim) {
            return Err(Error::Parse(format!(
                "cov must be {dim}x{dim} for n_modes = {}",
                wire.n_modes
            )));
        }
        let cov = DMatrix::from_fn(dim, dim, |i, j| wire.cov[i][j]);
        let disp = match wire.disp {
            Some(d) => DVector::from_vec(d),
            None => DVector::zeros(dim),
        };
        GaussianState::new(cov, disp, wire.ordering)
    }
}

impl From<&GaussianState> for StateJson {
    fn from(s: &GaussianState) -> Self {
        let dim = s.cov.nrows();
        StateJson {
            n_modes: s.n_modes(),
            ordering: s.ordering,
            cov: (0..dim).map(|i| (0..dim).map(|j| s.cov[(i, j)]).collect()).collect(),
            disp: Some(s.disp.iter().copied().collect()),
        }
    }
}

/// Symplectic form for `n` modes in the requested ordering.
pub fn sigma_matrix(n: usize, ordering: ModeOrdering) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let (q, p) = (q_index(n, k, ordering), p_index(n, k, ordering));
        s[(q, p)] = 1.0;
        s[(p, q)] = -1.0;
    }
    s
}

/// Permutation matrix `P` with `P x_qpqp = x_qqpp`.
pub fn ordering_permutation(n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..2 * n {
        p[(qpqp_to_qqpp(n, i), i)] = 1.0;
    }
    p
}

/// Re-expresses a state in the target ordering. Round trips are exact.
pub fn reorder(state: &GaussianState, target: ModeOrdering) -> GaussianState {
    if state.ordering == target {
        return state.clone();
    }
    let n = state.n_modes();
    let dim = 2 * n;
    // new[map(i)] = old[i], where map sends the source ordering to the target one.
    let map: Vec<usize> = match target {
        ModeOrdering::Qqpp => (0..dim).map(|i| qpqp_to_qqpp(n, i)).collect(),
        ModeOrdering::Qpqp => {
            let mut inv = vec![0; dim];
            for i in 0..dim {
                inv[qpqp_to_qqpp(n, i)] = i;
            }
            inv
        }
    };
    let mut cov = DMatrix::zeros(dim, dim);
    let mut disp = DVector::zeros(dim);
    for i in 0..dim {
        disp[map[i]] = state.disp[i];
        for j in 0..dim {
            cov[(map[i], map[j])] = state.cov[(i, j)];
        }
    }
    GaussianState { cov, disp, ordering: target }
}

/// Descending symplectic eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest symplectic eigenvalue (`s_1` in negativity formulas).
    pub fn min(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Symplectic eigenvalues of a raw symmetric matrix given in `ordering`.
///
/// These are the square roots of the eigenvalues of `-(cov sigma)^2`, each of
/// which appears twice. For positive definite input the doubled spectrum is
/// obtained from the symmetric matrix `K^T K` with `K = L^T sigma L` and
/// `cov = L L^T`, which is similar to `-(cov sigma)^2`; otherwise a general
/// eigensolver is used on `-(cov sigma)^2` directly.
pub fn symplectic_spectrum(cov: &DMatrix<f64>, ordering: ModeOrdering) -> Result<SymplecticSpectrum> {
    let cov = linalg::require_symmetric(cov)?;
    let dim = cov.nrows();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::Dimension(format!("expected even dimension, got {dim}")));
    }
    let n = dim / 2;
    let sigma = sigma_matrix(n, ordering);

    let mut squared: Vec<f64> = match Cholesky::new(cov.clone()) {
        Some(chol) => {
            let l = chol.l();
            let k = l.transpose() * &sigma * &l;
            SymmetricEigen::new(k.transpose() * &k)
                .eigenvalues
                .iter()
                .map(|&v| v.max(0.0))
                .collect()
        }
        None => {
            let gs = &cov * &sigma;
            let m = -(&gs * &gs);
            m.complex_eigenvalues().iter().map(|z| z.re.max(0.0)).collect()
        }
    };
    squared.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));

    // Eigenvalue errors scale with the largest squared value, so small pairs
    // of ill-conditioned matrices are only resolved to that absolute level.
    let scale = squared[0].max(1.0);
    let mut values = Vec::with_capacity(n);
    for pair in squared.chunks(2) {
        if (pair[0] - pair[1]).abs() > PAIRING_TOL * scale {
            return Err(Error::Numerical(format!(
                "symplectic spectrum does not pair: {} vs {}",
                pair[0].sqrt(),
                pair[1].sqrt()
            )));
        }
        values.push(0.5 * (pair[0].sqrt() + pair[1].sqrt()));
    }
    Ok(SymplecticSpectrum { values })
}

pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<SymplecticSpectrum> {
    symplectic_spectrum(&state.cov, state.ordering)
}

/// Whether `cov >= i sigma` holds up to `tol` on the smallest symplectic eigenvalue.
pub fn is_valid_cov(cov: &DMatrix<f64>, ordering: ModeOrdering, tol: f64) -> bool {
    if Cholesky::new(cov.clone()).is_none() {
        return false;
    }
    match symplectic_spectrum(cov, ordering) {
        Ok(spec) => spec.min() >= 1.0 - tol,
        Err(_) => false,
    }
}

pub fn is_valid_state(state: &GaussianState, tol: f64) -> bool {
    is_valid_cov(&state.cov, state.ordering, tol)
}

/// Whether every symplectic eigenvalue lies within `tol` of one.
pub fn is_pure(state: &GaussianState, tol: f64) -> bool {
    purity_defect(state).map(|d| d <= tol).unwrap_or(false)
}

/// Largest deviation of a symplectic eigenvalue from one.
pub fn purity_defect(state: &GaussianState) -> Result<f64> {
    let spec = symplectic_eigenvalues(state)?;
    Ok(spec.values.iter().fold(0.0f64, |a, v| a.max((v - 1.0).abs())))
}

/// Bipartition of the modes of a state into parties A and B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    modes_a: Vec<usize>,
    modes_b: Vec<usize>,
}

impl Partition {
    /// Builds a partition of `n` modes (0-based indices) into two disjoint covering sets.
    pub fn new(n: usize, mut modes_a: Vec<usize>, mut modes_b: Vec<usize>) -> Result<Self> {
        modes_a.sort_unstable();
        modes_b.sort_unstable();
        let mut all: Vec<usize> = modes_a.iter().chain(modes_b.iter()).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(Error::Partition(format!(
                "sets {modes_a:?} and {modes_b:?} are not a disjoint cover of 0..{n}"
            )));
        }
        Ok(Self { modes_a, modes_b })
    }

    /// Party A holds `modes_a`, party B the rest.
    pub fn from_party_a(n: usize, modes_a: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = modes_a.iter().find(|&&m| m >= n) {
            return Err(Error::Partition(format!("mode {bad} out of range for {n} modes")));
        }
        let modes_b = (0..n).filter(|m| !modes_a.contains(m)).collect();
        Self::new(n, modes_a, modes_b)
    }

    /// First `k` modes to A, remaining to B.
    pub fn split(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::Partition(format!("cannot split {n} modes at {k}")));
        }
        Self::new(n, (0..k).collect(), (k..n).collect())
    }

    /// One mode per party.
    pub fn two_mode() -> Self {
        Self { modes_a: vec![0], modes_b: vec![1] }
    }

    pub fn modes_a(&self) -> &[usize] {
        &self.modes_a
    }

    pub fn modes_b(&self) -> &[usize] {
        &self.modes_b
    }

    pub fn n_modes(&self) -> usize {
        self.modes_a.len() + self.modes_b.len()
    }

    /// Partition of a direct sum: the A side is the union of both A sides.
    pub fn direct_sum(&self, other: &Partition) -> Partition {
        let off = self.n_modes();
        let shift = |v: &[usize]| v.iter().map(|m| m + off).collect::<Vec<_>>();
        let mut a = self.modes_a.clone();
        a.extend(shift(&other.modes_a));
        let mut b = self.modes_b.clone();
        b.extend(shift(&other.modes_b));
        Partition { modes_a: a, modes_b: b }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.n_modes() != n {
            return Err(Error::Partition(format!(
                "partition covers {} modes, state has {n}",
                self.n_modes()
            )));
        }
        Ok(())
    }
}

/// Covariance matrix with the momenta of party B sign-flipped.
pub fn partial_transpose(state: &GaussianState, partition: &Partition) -> Result<GaussianState> {
    let n = state.n_modes();
    partition.check(n)?;
    let mut cov = state.cov.clone();
    let mut disp = state.disp.clone();
    for &b in partition.modes_b() {
        let p = p_index(n, b, state.ordering);
        cov.row_mut(p).neg_mut();
        cov.column_mut(p).neg_mut();
        disp[p] = -disp[p];
    }
    Ok(GaussianState { cov, disp, ordering: state.ordering })
}

/// Logarithmic negativity in natural-log units, clamped at zero for PPT states.
pub fn log_negativity(state: &GaussianState, partition: &Partition) -> Result<f64> {
    let spec = symplectic_eigenvalues(state)?;
    if !is_valid_state(state, DEFAULT_TOL) {
        return Err(Error::InvalidState(spec.min()));
    }
    let s1 = symplectic_eigenvalues(&partial_transpose(state, partition)?)?.min();
    Ok((-0.5 * s1.ln()).max(0.0))
}

/// Tensor product of two states: block-diagonal covariance, concatenated displacement.
/// The result is in QPQP ordering with the modes of `a` first.
pub fn direct_sum(a: &GaussianState, b: &GaussianState) -> GaussianState {
    let a = reorder(a, ModeOrdering::Qpqp);
    let b = reorder(b, ModeOrdering::Qpqp);
    let cov = linalg::block_diag(&a.cov, &b.cov);
    let disp = DVector::from_iterator(
        a.disp.len() + b.disp.len(),
        a.disp.iter().chain(b.disp.iter()).copied(),
    );
    GaussianState { cov, disp, ordering: ModeOrdering::Qpqp }
}

/// Reduced state on the listed modes, kept in the parent's ordering.
pub fn reduced_state(state: &GaussianState, modes: &[usize]) -> Result<GaussianState> {
    let n = state.n_modes();
    if modes.is_empty() || modes.iter().any(|&m| m >= n) {
        return Err(Error::Partition(format!("invalid mode list {modes:?} for {n} modes")));
    }
    let idx: Vec<usize> = match state.ordering {
        ModeOrdering::Qpqp => modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect(),
        ModeOrdering::Qqpp => modes
            .iter()
            .map(|&m| m)
            .chain(modes.iter().map(|&m| n + m))
            .collect(),
    };
    let cov = linalg::principal(&state.cov, &idx);
    let disp = DVector::from_iterator(idx.len(), idx.iter().map(|&i| state.disp[i]));
    Ok(GaussianState { cov, disp, ordering: state.ordering })
}
