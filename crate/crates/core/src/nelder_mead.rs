//! Derivative-free simplex descent with dimension-adaptive coefficients.

/// Outcome of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Stopping rules for [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub max_iters: usize,
    /// Stop when the spread of simplex values drops below this.
    pub ftol: f64,
    /// Stop when every vertex is within this distance of the best one.
    pub xtol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { max_iters: 5000, ftol: 1e-15, xtol: 1e-13 }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of size `step`.
///
/// Non-finite objective values are treated as `+inf`, so infeasible regions
/// can be encoded by returning infinity.
pub fn minimize<F>(f: F, x0: &[f64], step: f64, settings: &Settings) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let nf = dim as f64;
    // Gao & Han adaptive parameters.
    let (alpha, beta, gamma, delta) = if dim >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), sanitize(f(x0))));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = sanitize(f(&x));
        simplex.push((x, v));
    }

    let mut iterations = 0;
    while iterations < settings.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if best.is_finite() && worst.is_finite() && worst - best <= settings.ftol {
            let spread = simplex[1..].iter().fold(0.0f64, |acc, (x, _)| {
                x.iter().zip(&simplex[0].0).fold(acc, |a, (p, q)| a.max((p - q).abs()))
            });
            if spread <= settings.xtol || worst - best == 0.0 {
                break;
            }
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = sanitize(f(&xr));
        if fr < simplex[0].1 {
            let xe = along(alpha * beta);
            let fe = sanitize(f(&xe));
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[dim].1 {
            let xc = along(alpha * gamma);
            let fc = sanitize(f(&xc));
            (xc, fc)
        } else {
            let xc = along(-gamma);
            let fc = sanitize(f(&xc));
            (xc, fc)
        };
        if fc < simplex[dim].1.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        // Shrink towards the best vertex.
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            for (v, a) in vertex.0.iter_mut().zip(&anchor) {
                *v = a + delta * (*v - a);
            }
            vertex.1 = sanitize(f(&vertex.0));
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations }
}
