//! Direct numeric minimization of pure-state entanglement over pure
//! covariance matrices `gamma_p(X, Y) <= gamma`, for states of up to four
//! modes and any bipartition.
//!
//! `X = L L^T` is parameterized by a lower-triangular factor with
//! log-diagonal, `Y` by its upper triangle, so every parameter vector is a
//! pure state. The ordering constraint is handled by a quadratic penalty on
//! the most negative eigenvalue of `gamma - gamma_p` with an increasing
//! weight schedule. Each restart is then pulled back onto the feasible set by
//! bisection towards a feasible anchor and finished with a simplex run that
//! rejects infeasible points outright, so every reported value is attained
//! by a feasible pure state and bounds `E_G` from above.
//!
//! Restarts are independent and each owns a ChaCha stream derived from
//! `(seed, restart index)`; results do not depend on thread scheduling.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eof_analytic::{eof_from_invariants, eof_symmetric, EofOptions, SYMMETRIC_TOL};
use crate::error::{Error, Result};
use crate::linalg;
use crate::nelder_mead::{self, Settings};
use crate::normal_form::{standard_form_cm, TwoModeInvariants};
use crate::pure_states::{entropy_from_symplectic, EntanglementValue, PureCMParam};
use crate::symplectic::{
    direct_sum, is_valid_state, reorder, symplectic_spectrum, GaussianState, ModeOrdering,
    Partition, DEFAULT_TOL,
};
use crate::williamson::{williamson, Williamson};

/// Largest supported mode count.
pub const MAX_MODES: usize = 4;

const POLISH_STEPS: usize = 80;

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Iteration cap of each simplex run.
    pub max_iters: usize,
    /// Penalty weights, strictly increasing.
    pub penalty_weight_schedule: Vec<f64>,
    pub seed: u64,
    /// Feasibility tolerance on the smallest eigenvalue of `gamma - gamma_p`.
    pub tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 2000,
            penalty_weight_schedule: vec![1e2, 1e4, 1e6, 1e8, 1e10],
            seed: 0,
            tol: 1e-9,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Parameter("restarts and max_iters must be positive".into()));
        }
        let sched = &self.penalty_weight_schedule;
        if sched.is_empty() || sched[0] <= 0.0 || sched.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter(
                "penalty schedule must be non-empty, positive and strictly increasing".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Per-restart summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub index: usize,
    pub ebits: f64,
    pub slack: f64,
    pub feasible: bool,
}

/// Best pure state found by the numeric search.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericEof {
    pub value: EntanglementValue,
    /// Optimal `(X, Y)` in the QQPP coordinates of the input's mode order.
    pub param: PureCMParam,
    /// Smallest eigenvalue of `gamma - gamma_p` at the optimum.
    pub feasibility_slack: f64,
    pub restarts: Vec<RestartOutcome>,
}

impl NumericEof {
    /// Optimal pure covariance matrix in QQPP ordering.
    pub fn optimal_pure_state(&self) -> GaussianState {
        GaussianState::from_cov(self.param.cov_qqpp(), ModeOrdering::Qqpp).expect("symmetric")
    }
}

struct Problem {
    n: usize,
    gamma: DMatrix<f64>,
    reduced_idx: Vec<usize>,
    tol: f64,
}

impl Problem {
    fn n_params(&self) -> usize {
        self.n * (self.n + 1)
    }

    fn decode(&self, p: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut l = DMatrix::zeros(n, n);
        let mut y = DMatrix::zeros(n, n);
        let mut it = p.iter();
        for i in 0..n {
            for j in 0..=i {
                let v = *it.next().expect("parameter length");
                l[(i, j)] = if i == j { v.exp() } else { v };
            }
        }
        for i in 0..n {
            for j in i..n {
                let v = *it.next().expect("parameter length");
                y[(i, j)] = v;
                y[(j, i)] = v;
            }
        }
        (&l * l.transpose(), y)
    }

    fn encode(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Option<Vec<f64>> {
        let l = Cholesky::new(x.clone())?.l();
        let n = self.n;
        let mut p = Vec::with_capacity(self.n_params());
        for i in 0..n {
            for j in 0..=i {
                p.push(if i == j { l[(i, i)].ln() } else { l[(i, j)] });
            }
        }
        for i in 0..n {
            for j in i..n {
                p.push(0.5 * (y[(i, j)] + y[(j, i)]));
            }
        }
        Some(p)
    }

    fn pure_cov(&self, p: &[f64]) -> Option<DMatrix<f64>> {
        if p.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let n = self.n;
        let mut l = DMatrix::zeros(n, n);
        let mut y = DMatrix::zeros(n, n);
        let mut it = p.iter();
        for i in 0..n {
            for j in 0..=i {
                let v = *it.next()?;
                l[(i, j)] = if i == j { v.exp() } else { v };
            }
        }
        for i in 0..n {
            for j in i..n {
                let v = *it.next()?;
                y[(i, j)] = v;
                y[(j, i)] = v;
            }
        }
        let l_inv = l.solve_lower_triangular(&DMatrix::identity(n, n))?;
        let x = &l * l.transpose();
        let xy = &x * &y;
        let lower = &y * &xy + l_inv.transpose() * &l_inv;
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        cov.view_mut((0, 0), (n, n)).copy_from(&x);
        cov.view_mut((0, n), (n, n)).copy_from(&xy);
        cov.view_mut((n, 0), (n, n)).copy_from(&xy.transpose());
        cov.view_mut((n, n), (n, n)).copy_from(&lower);
        if cov.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(linalg::symmetrize(&cov))
    }

    fn entropy(&self, cov: &DMatrix<f64>) -> f64 {
        let red = linalg::principal(cov, &self.reduced_idx);
        match red.nrows() {
            2 => {
                let det = red[(0, 0)] * red[(1, 1)] - red[(0, 1)] * red[(1, 0)];
                entropy_from_symplectic(det.max(0.0).sqrt())
            }
            4 => {
                // nu_1^2 + nu_2^2 = det A + det B + 2 det C, nu_1^2 nu_2^2 = det R.
                let det = red.determinant();
                let d2 = |i: usize, j: usize| red[(i, i)] * red[(j, j)] - red[(i, j)] * red[(j, i)];
                let sum = d2(0, 2) + d2(1, 3) + 2.0 * (red[(0, 1)] * red[(2, 3)] - red[(0, 3)] * red[(2, 1)]);
                let disc = (sum * sum - 4.0 * det).max(0.0).sqrt();
                let hi = 0.5 * (sum + disc);
                let lo = if hi > 0.0 { det / hi } else { 0.0 };
                entropy_from_symplectic(hi.max(0.0).sqrt()) + entropy_from_symplectic(lo.max(0.0).sqrt())
            }
            _ => match symplectic_spectrum(&red, ModeOrdering::Qqpp) {
                Ok(spec) => spec.values().iter().map(|&a| entropy_from_symplectic(a)).sum(),
                Err(_) => f64::INFINITY,
            },
        }
    }

    /// Smallest eigenvalue of `gamma - gamma_p` and the squared norm of its negative part.
    fn violation(&self, cov: &DMatrix<f64>) -> (f64, f64) {
        let eig = SymmetricEigen::new(&self.gamma - cov);
        let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let neg = eig.eigenvalues.iter().map(|&v| v.min(0.0).powi(2)).sum();
        (min, neg)
    }

    /// Entropy, slack and penalty measure at `p`.
    fn evaluate(&self, p: &[f64]) -> Option<(f64, f64, f64)> {
        let cov = self.pure_cov(p)?;
        let e = self.entropy(&cov);
        let (s, neg) = self.violation(&cov);
        if e.is_finite() && s.is_finite() {
            Some((e, s, neg))
        } else {
            None
        }
    }

    fn penalized(&self, p: &[f64], weight: f64) -> f64 {
        match self.evaluate(p) {
            Some((e, _, neg)) => e + weight * neg,
            None => f64::INFINITY,
        }
    }

    fn barrier(&self, p: &[f64]) -> f64 {
        match self.evaluate(p) {
            Some((e, s, _)) if s >= -self.tol => e,
            _ => f64::INFINITY,
        }
    }

    fn feasible(&self, p: &[f64]) -> bool {
        self.evaluate(p).map(|(_, s, _)| s >= -self.tol).unwrap_or(false)
    }
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Random pure state `S Z S^T` below `gamma` (QPQP), `Z` a product of
/// rotated one-mode squeezed states within the symplectic spectrum.
fn feasible_seed(w: &Williamson, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = w.nus.len();
    let mut z = DMatrix::zeros(2 * n, 2 * n);
    for (k, &nu) in w.nus.iter().enumerate() {
        let spread = nu.max(1.0).ln();
        let sq = (spread * rng.random_range(-1.0..=1.0)).exp();
        let phi: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (c, s) = (phi.cos(), phi.sin());
        let r = nalgebra::Matrix2::new(c, -s, s, c);
        let blk = r * nalgebra::Matrix2::new(sq, 0.0, 0.0, 1.0 / sq) * r.transpose();
        z.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&linalg::from_matrix2(&blk));
    }
    &w.s * z * w.s.transpose()
}

fn qpqp_pure_to_params(problem: &Problem, cov_qpqp: &DMatrix<f64>) -> Option<Vec<f64>> {
    let st = GaussianState::from_cov(linalg::symmetrize(cov_qpqp), ModeOrdering::Qpqp).ok()?;
    let qq = reorder(&st, ModeOrdering::Qqpp);
    let n = problem.n;
    let x = qq.cov().view((0, 0), (n, n)).into_owned();
    let c = qq.cov().view((0, n), (n, n)).into_owned();
    let y = Cholesky::new(x.clone())?.solve(&c);
    problem.encode(&x, &linalg::symmetrize(&y))
}

/// Largest `t` in `[0, 1]` with `anchor + t (target - anchor)` feasible, by bisection.
fn pull_back(problem: &Problem, anchor: &[f64], target: &[f64]) -> Vec<f64> {
    let point = |t: f64| -> Vec<f64> {
        anchor.iter().zip(target).map(|(a, b)| a + t * (b - a)).collect()
    };
    if problem.feasible(target) {
        return target.to_vec();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..POLISH_STEPS {
        let mid = 0.5 * (lo + hi);
        if problem.feasible(&point(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    point(lo)
}

fn run_restart(
    problem: &Problem,
    cfg: &OptimizerConfig,
    w: &Williamson,
    anchor: &[f64],
    index: usize,
) -> (Vec<f64>, RestartOutcome) {
    let mut rng = stream(cfg.seed, index);
    let n = problem.n;
    let mut restart_anchor = anchor.to_vec();

    let start: Vec<f64> = if index % 2 == 0 {
        // Perturbed real state built on the position block of gamma.
        let mut x = problem.gamma.view((0, 0), (n, n)).into_owned();
        let amp = if index == 0 { 0.0 } else { 0.2 };
        for i in 0..n {
            for j in 0..=i {
                let v = amp * rng.random_range(-1.0..1.0) * (x[(i, i)] * x[(j, j)]).sqrt();
                x[(i, j)] += v;
                if i != j {
                    x[(j, i)] += v;
                }
            }
        }
        let y = DMatrix::from_fn(n, n, |_, _| 0.0);
        match problem.encode(&x, &y) {
            Some(p) => p,
            None => anchor.to_vec(),
        }
    } else {
        let seed_cov = feasible_seed(w, &mut rng);
        match qpqp_pure_to_params(problem, &seed_cov) {
            Some(p) => {
                if problem.feasible(&p) {
                    restart_anchor = p.clone();
                }
                p
            }
            None => anchor.to_vec(),
        }
    };

    let settings = Settings { max_iters: cfg.max_iters, ..Settings::default() };
    let mut x = start;
    for &weight in &cfg.penalty_weight_schedule {
        let f = |p: &[f64]| problem.penalized(p, weight);
        let mut best = f(&x);
        let mut step = 0.3;
        for _ in 0..4 {
            let m = nelder_mead::minimize(&f, &x, step, &settings);
            let improved = best - m.value;
            if m.value <= best {
                x = m.x;
                best = m.value;
            }
            step *= 0.3;
            if !(improved > 1e-13) {
                break;
            }
        }
    }

    let mut x = pull_back(problem, &restart_anchor, &x);
    let mut step = 1e-2;
    for _ in 0..3 {
        let m = nelder_mead::minimize(|p: &[f64]| problem.barrier(p), &x, step, &settings);
        if m.value <= problem.barrier(&x) {
            x = m.x;
        }
        step *= 0.1;
    }

    let (ebits, slack, _) = problem.evaluate(&x).unwrap_or((f64::INFINITY, f64::NEG_INFINITY, 0.0));
    let outcome = RestartOutcome { index, ebits, slack, feasible: slack >= -cfg.tol };
    (x, outcome)
}

/// Smallest pure-state entanglement found among feasible `gamma_p <= gamma`.
pub fn eof_numeric(
    state: &GaussianState,
    partition: &Partition,
    cfg: &OptimizerConfig,
) -> Result<NumericEof> {
    cfg.validate()?;
    let n = state.n_modes();
    if n > MAX_MODES {
        return Err(Error::Dimension(format!("at most {MAX_MODES} modes supported, got {n}")));
    }
    if partition.n_modes() != n {
        return Err(Error::Partition(format!(
            "partition covers {} modes, state has {n}",
            partition.n_modes()
        )));
    }
    if !is_valid_state(state, DEFAULT_TOL) {
        let s = crate::symplectic::symplectic_eigenvalues(state).map(|s| s.min()).unwrap_or(f64::NAN);
        return Err(Error::InvalidState(s));
    }

    let qpqp = reorder(state, ModeOrdering::Qpqp);
    let qqpp = reorder(state, ModeOrdering::Qqpp);
    let reduced_idx: Vec<usize> = partition
        .modes_a()
        .iter()
        .copied()
        .chain(partition.modes_a().iter().map(|&m| n + m))
        .collect();
    let problem = Problem { n, gamma: qqpp.cov().clone(), reduced_idx, tol: cfg.tol };

    let w = williamson(qpqp.cov())?;
    let anchor_cov = &w.s * w.s.transpose();
    let anchor = qpqp_pure_to_params(&problem, &anchor_cov)
        .ok_or_else(|| Error::Numerical("could not parameterize feasible anchor".into()))?;
    if !problem.feasible(&anchor) {
        return Err(Error::Numerical(format!(
            "feasible anchor violates ordering by {:e}",
            problem.evaluate(&anchor).map(|v| v.1).unwrap_or(f64::NAN)
        )));
    }

    let runs: Vec<(Vec<f64>, RestartOutcome)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| run_restart(&problem, cfg, &w, &anchor, i))
        .collect();

    let best = runs
        .iter()
        .filter(|(_, o)| o.feasible && o.ebits.is_finite())
        .min_by(|a, b| a.1.ebits.total_cmp(&b.1.ebits).then(a.1.index.cmp(&b.1.index)))
        .ok_or_else(|| {
            let worst = runs.iter().map(|(_, o)| o.slack).fold(f64::NEG_INFINITY, f64::max);
            Error::Numerical(format!("no restart reached feasibility (best slack {worst:e})"))
        })?;

    let (x, y) = problem.decode(&best.0);
    Ok(NumericEof {
        value: EntanglementValue::new(best.1.ebits)?,
        param: PureCMParam::new(x, y)?,
        feasibility_slack: best.1.slack,
        restarts: runs.into_iter().map(|(_, o)| o).collect(),
    })
}

/// Numeric value on `gamma_1 + gamma_2` compared with the sum of single-copy values.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityReport {
    pub joint: NumericEof,
    pub single_copy_sum: f64,
    /// `joint - single_copy_sum`.
    pub gap: f64,
    /// Set when either input is not symmetric, where additivity is unproven.
    pub exploratory: bool,
}

fn joint_state(inv1: &TwoModeInvariants, inv2: &TwoModeInvariants) -> Result<(GaussianState, Partition)> {
    let g1 = standard_form_cm(inv1)?;
    let g2 = standard_form_cm(inv2)?;
    let part = Partition::two_mode().direct_sum(&Partition::two_mode());
    Ok((direct_sum(&g1, &g2), part))
}

/// Additivity gap for two symmetric two-mode states.
pub fn additivity_gap(
    inv1: &TwoModeInvariants,
    inv2: &TwoModeInvariants,
    cfg: &OptimizerConfig,
) -> Result<AdditivityReport> {
    for inv in [inv1, inv2] {
        if !inv.is_symmetric(SYMMETRIC_TOL) {
            return Err(Error::Asymmetric(inv.n_a, inv.n_b));
        }
    }
    let single = eof_symmetric(inv1)?.ebits() + eof_symmetric(inv2)?.ebits();
    let (state, part) = joint_state(inv1, inv2)?;
    let joint = eof_numeric(&state, &part, cfg)?;
    let gap = joint.value.ebits() - single;
    Ok(AdditivityReport { joint, single_copy_sum: single, gap, exploratory: false })
}

/// Additivity gap for arbitrary two-mode states, using the analytic two-mode
/// value for each copy. Non-symmetric pairs are flagged exploratory.
pub fn additivity_gap_exploratory(
    inv1: &TwoModeInvariants,
    inv2: &TwoModeInvariants,
    cfg: &OptimizerConfig,
) -> Result<AdditivityReport> {
    let opts = EofOptions::default();
    let single = eof_from_invariants(inv1, &opts)?.value.ebits() + eof_from_invariants(inv2, &opts)?.value.ebits();
    let (state, part) = joint_state(inv1, inv2)?;
    let joint = eof_numeric(&state, &part, cfg)?;
    let gap = joint.value.ebits() - single;
    let exploratory = !(inv1.is_symmetric(SYMMETRIC_TOL) && inv2.is_symmetric(SYMMETRIC_TOL));
    Ok(AdditivityReport { joint, single_copy_sum: single, gap, exploratory })
}
