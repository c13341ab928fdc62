//! Central finite-difference cross-checks.
//!
//! These helpers consume only plain value evaluations (order-0 jets), so
//! they are independent of the jet differentiation path they are used to
//! check. They exist as oracles for the test suite and for convergence
//! diagnostics; the engine itself differentiates through jets.

use crate::error::GeomError;
use crate::fields::{MetricEval, ScalarEval};

pub const DEFAULT_STEP: f64 = 1e-5;

/// Central first difference of a scalar field.
pub fn fd_partial(
    f: &dyn ScalarEval,
    p: &[f64],
    i: usize,
    h: f64,
) -> Result<f64, GeomError> {
    let mut pp = p.to_vec();
    let mut pm = p.to_vec();
    pp[i] += h;
    pm[i] -= h;
    Ok((f.eval(&pp)? - f.eval(&pm)?) / (2.0 * h))
}

fn metric_values(g: &dyn MetricEval, p: &[f64]) -> Result<Vec<Vec<f64>>, GeomError> {
    g.eval(p)
}

/// Christoffel symbols assembled from finite differences of metric values.
pub fn fd_christoffel(
    g: &dyn MetricEval,
    p: &[f64],
    h: f64,
) -> Result<Vec<Vec<Vec<f64>>>, GeomError> {
    let d = p.len();
    let g0 = metric_values(g, p)?;
    let mut m = nalgebra::DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = g0[i][j];
        }
    }
    let ginv = m.try_inverse().ok_or(GeomError::SingularMetric {
        point: p.to_vec(),
        det: 0.0,
    })?;
    let mut dg = vec![vec![vec![0.0; d]; d]; d]; // dg[i][j][l] = d_l g_ij
    for l in 0..d {
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[l] += h;
        pm[l] -= h;
        let gp = metric_values(g, &pp)?;
        let gm = metric_values(g, &pm)?;
        for i in 0..d {
            for j in 0..d {
                dg[i][j][l] = (gp[i][j] - gm[i][j]) / (2.0 * h);
            }
        }
    }
    let mut gamma = vec![vec![vec![0.0; d]; d]; d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += ginv[(k, l)] * (dg[j][l][i] + dg[i][l][j] - dg[i][j][l]);
                }
                gamma[k][i][j] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

/// Scalar curvature from nested finite differences of metric values.
pub fn fd_scalar_curvature(g: &dyn MetricEval, p: &[f64], h: f64) -> Result<f64, GeomError> {
    let d = p.len();
    let gamma0 = fd_christoffel(g, p, h)?;
    let mut dgamma = vec![vec![vec![vec![0.0; d]; d]; d]; d]; // d_k gamma^l_ij
    for k in 0..d {
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[k] += h;
        pm[k] -= h;
        let gp = fd_christoffel(g, &pp, h)?;
        let gm = fd_christoffel(g, &pm, h)?;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    dgamma[l][i][j][k] = (gp[l][i][j] - gm[l][i][j]) / (2.0 * h);
                }
            }
        }
    }
    let mut ricci = vec![vec![0.0; d]; d];
    for k in 0..d {
        for j in 0..d {
            let mut v = 0.0;
            for i in 0..d {
                v += dgamma[i][j][k][i] - dgamma[i][i][k][j];
                for m in 0..d {
                    v += gamma0[i][i][m] * gamma0[m][j][k] - gamma0[i][j][m] * gamma0[m][i][k];
                }
            }
            ricci[k][j] = v;
        }
    }
    let g0 = metric_values(g, p)?;
    let mut m = nalgebra::DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = g0[i][j];
        }
    }
    let ginv = m.try_inverse().ok_or(GeomError::SingularMetric {
        point: p.to_vec(),
        det: 0.0,
    })?;
    let mut s = 0.0;
    for k in 0..d {
        for j in 0..d {
            s += ginv[(k, j)] * ricci[k][j];
        }
    }
    Ok(s)
}
