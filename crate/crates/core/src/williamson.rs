//! Symplectic diagonalization `cov = S D S^T` (QPQP ordering), used to seed
//! the numeric optimizer with pure states that lie below a given covariance
//! matrix: `S Z S^T <= cov` for every pure `Z <= D`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{sigma_matrix, ModeOrdering};

#[derive(Debug, Clone)]
pub(crate) struct Williamson {
    pub s: DMatrix<f64>,
    pub nus: Vec<f64>,
}

pub(crate) fn williamson(cov: &DMatrix<f64>) -> Result<Williamson> {
    let dim = cov.nrows();
    let n = dim / 2;
    let half = linalg::psd_sqrt(cov);
    let ihalf = linalg::inv_sqrt(cov)?;
    let sigma = sigma_matrix(n, ModeOrdering::Qpqp);
    let k = &ihalf * &sigma * &ihalf;
    let eig = SymmetricEigen::new(k.transpose() * &k);

    // Canonical form K O = O (+)_k J / nu_k with J = [[0, 1], [-1, 0]].
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(dim);
    let mut nus = Vec::with_capacity(n);
    let project = |v: &DVector<f64>, basis: &[DVector<f64>]| -> DVector<f64> {
        let mut out = v.clone();
        for b in basis {
            out -= b * b.dot(&out);
        }
        out
    };
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    for &i in &order {
        if nus.len() == n {
            break;
        }
        let u = project(&eig.eigenvectors.column(i).into_owned(), &cols);
        let norm = u.norm();
        if norm < 1e-6 {
            continue;
        }
        let u = u / norm;
        let ku = &k * &u;
        let mu = ku.norm_squared();
        if !(mu > 0.0) {
            return Err(Error::Numerical("degenerate symplectic form".into()));
        }
        let nu = 1.0 / mu.sqrt();
        let partner = project(&(-(ku * nu)), &cols);
        let partner = partner.clone() / partner.norm();
        cols.push(u);
        cols.push(partner);
        nus.push(nu);
    }
    if nus.len() != n {
        return Err(Error::Numerical("symplectic diagonalization did not close".into()));
    }
    let o = DMatrix::from_columns(&cols);
    let d = DVector::from_iterator(dim, nus.iter().flat_map(|&v| [v, v]));
    let s = half * o * DMatrix::from_diagonal(&d.map(|v| 1.0 / v.sqrt()));
    Ok(Williamson { s, nus })
}
