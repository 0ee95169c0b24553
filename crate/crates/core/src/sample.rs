//! Seeded generators for random symplectic maps and Gaussian states.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::channels::{fiber_output, FiberSpec, Setting};
use crate::eof_analytic::pt_min_symplectic;
use crate::symplectic::{GaussianState, ModeOrdering, Partition};

fn one_mode_squeezer(n: usize, mode: usize, r: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(2 * n, 2 * n);
    g[(2 * mode, 2 * mode)] = r.exp();
    g[(2 * mode + 1, 2 * mode + 1)] = (-r).exp();
    g
}

fn phase_rotation(n: usize, mode: usize, phi: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(2 * n, 2 * n);
    let (c, s) = (phi.cos(), phi.sin());
    let k = 2 * mode;
    g[(k, k)] = c;
    g[(k, k + 1)] = s;
    g[(k + 1, k)] = -s;
    g[(k + 1, k + 1)] = c;
    g
}

fn beam_splitter(n: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(2 * n, 2 * n);
    let (c, s) = (theta.cos(), theta.sin());
    for k in 0..2 {
        g[(2 * i + k, 2 * i + k)] = c;
        g[(2 * j + k, 2 * j + k)] = c;
        g[(2 * i + k, 2 * j + k)] = s;
        g[(2 * j + k, 2 * i + k)] = -s;
    }
    g
}

/// Product of `depth` random squeezers, phase shifts and beam splitters
/// acting only on `modes` (QPQP, `n` modes in total).
pub fn random_symplectic_on<R: Rng>(
    n: usize,
    modes: &[usize],
    depth: usize,
    max_squeeze: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    if modes.is_empty() {
        return s;
    }
    for _ in 0..depth {
        let i = modes[rng.random_range(0..modes.len())];
        let j = modes[rng.random_range(0..modes.len())];
        let g = match rng.random_range(0..3) {
            0 => one_mode_squeezer(n, i, rng.random_range(-max_squeeze..=max_squeeze)),
            1 => phase_rotation(n, i, rng.random_range(0.0..std::f64::consts::TAU)),
            _ if i != j => beam_splitter(n, i, j, rng.random_range(0.0..std::f64::consts::TAU)),
            _ => phase_rotation(n, i, rng.random_range(0.0..std::f64::consts::TAU)),
        };
        s = g * s;
    }
    s
}

/// Random symplectic matrix on all `n` modes.
pub fn random_symplectic<R: Rng>(n: usize, depth: usize, max_squeeze: f64, rng: &mut R) -> DMatrix<f64> {
    let modes: Vec<usize> = (0..n).collect();
    random_symplectic_on(n, &modes, depth, max_squeeze, rng)
}

/// Random local symplectic map `S_A (+) S_B` for a bipartition.
pub fn random_local_symplectic<R: Rng>(
    partition: &Partition,
    depth: usize,
    max_squeeze: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    let n = partition.n_modes();
    let sa = random_symplectic_on(n, partition.modes_a(), depth, max_squeeze, rng);
    let sb = random_symplectic_on(n, partition.modes_b(), depth, max_squeeze, rng);
    sa * sb
}

/// `S cov S^T` for a QPQP state.
pub fn transform(state: &GaussianState, s: &DMatrix<f64>) -> GaussianState {
    let st = state.to_ordering(ModeOrdering::Qpqp);
    let cov = s * st.cov() * s.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::from_cov(cov, ModeOrdering::Qpqp).expect("congruence keeps symmetry")
}

/// Random mixed state `S diag(nu) S^T` with symplectic eigenvalues drawn from `[1, nu_max]`.
pub fn random_state<R: Rng>(n: usize, nu_max: f64, max_squeeze: f64, rng: &mut R) -> GaussianState {
    let nus = DVector::from_iterator(
        2 * n,
        (0..n).flat_map(|_| {
            let v = if nu_max > 1.0 { rng.random_range(1.0..nu_max) } else { 1.0 };
            [v, v]
        }),
    );
    let base = GaussianState::from_cov(DMatrix::from_diagonal(&nus), ModeOrdering::Qpqp)
        .expect("diagonal");
    let s = random_symplectic(n, 4 * n, max_squeeze, rng);
    transform(&base, &s)
}

/// Random two-mode state whose smallest partially transposed symplectic
/// eigenvalue is below `1 - margin`.
pub fn random_entangled_two_mode<R: Rng>(margin: f64, rng: &mut R) -> GaussianState {
    loop {
        let st = random_state(2, 1.6, 0.7, rng);
        if pt_min_symplectic(&st).map(|s| s < 1.0 - margin).unwrap_or(false) {
            return st;
        }
    }
}

/// Symmetric-setting fiber output with random squeezing, length and
/// temperature, dressed by a random local symplectic map.
pub fn random_symmetric_fiber_state<R: Rng>(rng: &mut R) -> GaussianState {
    let r = rng.random_range(0.05..2.0);
    let l = rng.random_range(0.0..3.0);
    let tau = rng.random_range(0.0..2.0);
    let spec = FiberSpec::new(l, tau, Setting::Symmetric).expect("parameters in range");
    let st = fiber_output(r, &spec).expect("valid fiber state");
    let s = random_local_symplectic(&Partition::two_mode(), 6, 0.5, rng);
    transform(&st, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{sigma_matrix, symplectic_eigenvalues};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_maps_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_symplectic(3, 20, 0.8, &mut rng);
        let sigma = sigma_matrix(3, ModeOrdering::Qpqp);
        assert!((&s * &sigma * s.transpose() - sigma).abs().max() < 1e-10);
    }

    #[test]
    fn random_state_keeps_spectrum_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let st = random_state(2, 2.0, 0.5, &mut rng);
        let spec = symplectic_eigenvalues(&st).unwrap();
        assert!(spec.min() >= 1.0 - 1e-9 && spec.max() <= 2.0 + 1e-9);
    }
}
