//! Generic coordinate tensor calculus: Christoffel symbols, covariant
//! derivatives, Lie brackets, musical isomorphisms, exterior derivatives and
//! Riemann/Ricci/scalar curvature of an arbitrary metric evaluator.
//!
//! Everything is computed through jet arithmetic, so curvature of a derived
//! metric (such as an induced Kahler metric) costs nothing extra: the metric
//! only has to provide jets of order two.

use crate::chart::same_chart;
use crate::error::GeomError;
use crate::fields::{CovectorEval, MetricEval, ScalarEval, VectorEval};
use crate::jet::Jet;
use crate::linalg::{JMat, JVec};

/// Threshold below which a pivot during metric inversion counts as singular.
const SINGULAR_TOL: f64 = 1e-13;

pub fn inverse_metric(g: &JMat, p: &[f64]) -> Result<JMat, GeomError> {
    g.inverse(SINGULAR_TOL).ok_or_else(|| GeomError::SingularMetric {
        point: p.to_vec(),
        det: crate::linalg::det_values(&g.values()),
    })
}

/// Christoffel symbols of the second kind as jets of order `order`.
/// The metric is evaluated at jet order `order + 1`.
/// Index layout: `gamma[k][i][j]` = Gamma^k_{ij}, symmetric in (i, j).
pub fn christoffel_jets(
    g: &dyn MetricEval,
    p: &[f64],
    order: usize,
) -> Result<Vec<Vec<Vec<Jet>>>, GeomError> {
    let gj = g.eval_jet(p, order + 1)?;
    let d = gj.d;
    let ginv = inverse_metric(&gj, p)?;
    // dg[i][j][l] = d_l g_ij as a jet of order `order`
    let mut dg = vec![vec![vec![Jet::constant(d, order, 0.0); d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            for l in 0..d {
                dg[i][j][l] = gj.at(i, j).shift(l);
            }
        }
    }
    let mut gamma = vec![vec![vec![Jet::constant(d, order, 0.0); d]; d]; d];
    for k in 0..d {
        for i in 0..d {
            for j in i..d {
                let mut acc = Jet::constant(d, order, 0.0);
                for l in 0..d {
                    let term = dg[j][l][i].add(&dg[i][l][j]).sub(&dg[i][j][l]);
                    acc = acc.add(&ginv.at(k, l).truncate(order).mul(&term));
                }
                let v = acc.scale(0.5);
                gamma[k][i][j] = v;
                gamma[k][j][i] = v;
            }
        }
    }
    Ok(gamma)
}

/// Plain Christoffel values Gamma^k_{ij}.
pub fn christoffel(g: &dyn MetricEval, p: &[f64]) -> Result<Vec<Vec<Vec<f64>>>, GeomError> {
    let gamma = christoffel_jets(g, p, 0)?;
    Ok(gamma
        .iter()
        .map(|a| a.iter().map(|b| b.iter().map(|j| j.v).collect()).collect())
        .collect())
}

/// Riemann, Ricci and scalar curvature at a point.
pub struct Curvature {
    /// `riemann[l][k][i][j]` = R^l_{k i j}
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    /// `ricci[k][j]` = R^i_{k i j}
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
}

impl Curvature {
    pub fn max_riemann_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in &self.riemann {
            for b in a {
                for c in b {
                    for &v in c {
                        m = m.max(v.abs());
                    }
                }
            }
        }
        m
    }

    pub fn max_ricci_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for row in &self.ricci {
            for &v in row {
                m = m.max(v.abs());
            }
        }
        m
    }

    /// Residual of the first Bianchi identity, cyclic over the lower indices.
    pub fn bianchi_residual(&self) -> f64 {
        let d = self.ricci.len();
        let mut m: f64 = 0.0;
        for l in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let s = self.riemann[l][k][i][j]
                            + self.riemann[l][i][j][k]
                            + self.riemann[l][j][k][i];
                        m = m.max(s.abs());
                    }
                }
            }
        }
        m
    }
}

/// Curvature from the Levi-Civita connection of `g`. The metric must supply
/// jets of order two.
pub fn curvature(g: &dyn MetricEval, p: &[f64]) -> Result<Curvature, GeomError> {
    let gamma = christoffel_jets(g, p, 1)?;
    let d = gamma.len();
    let mut riemann = vec![vec![vec![vec![0.0; d]; d]; d]; d];
    for l in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut v = gamma[l][j][k].d1[i] - gamma[l][i][k].d1[j];
                    for m in 0..d {
                        v += gamma[l][i][m].v * gamma[m][j][k].v
                            - gamma[l][j][m].v * gamma[m][i][k].v;
                    }
                    riemann[l][k][i][j] = v;
                }
            }
        }
    }
    let mut ricci = vec![vec![0.0; d]; d];
    for k in 0..d {
        for j in 0..d {
            let mut v = 0.0;
            for i in 0..d {
                v += riemann[i][k][i][j];
            }
            ricci[k][j] = v;
        }
    }
    let gj = g.eval_jet(p, 0)?;
    let ginv = inverse_metric(&gj, p)?;
    let mut scalar = 0.0;
    for k in 0..d {
        for j in 0..d {
            scalar += ginv.at(k, j).v * ricci[k][j];
        }
    }
    Ok(Curvature {
        riemann,
        ricci,
        scalar,
    })
}

/// Lie bracket [X, Y] as jets of order `order` (fields evaluated at
/// `order + 1`).
pub fn lie_bracket_jet(
    x: &dyn VectorEval,
    y: &dyn VectorEval,
    p: &[f64],
    order: usize,
) -> Result<JVec, GeomError> {
    if !same_chart(x.chart(), y.chart()) {
        return Err(GeomError::ChartMismatch(
            x.chart().name.clone(),
            y.chart().name.clone(),
        ));
    }
    let xj = x.eval_jet(p, order + 1)?;
    let yj = y.eval_jet(p, order + 1)?;
    let d = xj.d;
    let mut out = JVec::zeros(d, d, order);
    for i in 0..d {
        let mut acc = Jet::constant(d, order, 0.0);
        for j in 0..d {
            acc = acc.add(&xj.e[j].truncate(order).mul(&yj.e[i].shift(j)));
            acc = acc.sub(&yj.e[j].truncate(order).mul(&xj.e[i].shift(j)));
        }
        out.e[i] = acc;
    }
    Ok(out)
}

pub fn lie_bracket(x: &dyn VectorEval, y: &dyn VectorEval, p: &[f64]) -> Result<Vec<f64>, GeomError> {
    Ok(lie_bracket_jet(x, y, p, 0)?.values())
}

/// Covariant derivative (nabla_X Y) as jets of order `order`.
pub fn cov_deriv_jet(
    g: &dyn MetricEval,
    x: &dyn VectorEval,
    y: &dyn VectorEval,
    p: &[f64],
    order: usize,
) -> Result<JVec, GeomError> {
    let gamma = christoffel_jets(g, p, order)?;
    let xj = x.eval_jet(p, order)?;
    let yj = y.eval_jet(p, order + 1)?;
    let d = xj.d;
    let mut out = JVec::zeros(d, d, order);
    for i in 0..d {
        let mut acc = Jet::constant(d, order, 0.0);
        for j in 0..d {
            acc = acc.add(&xj.e[j].mul(&yj.e[i].shift(j)));
            for m in 0..d {
                acc = acc.add(&gamma[i][j][m].mul(&xj.e[j]).mul(&yj.e[m].truncate(order)));
            }
        }
        out.e[i] = acc;
    }
    Ok(out)
}

pub fn cov_deriv(
    g: &dyn MetricEval,
    x: &dyn VectorEval,
    y: &dyn VectorEval,
    p: &[f64],
) -> Result<Vec<f64>, GeomError> {
    Ok(cov_deriv_jet(g, x, y, p, 0)?.values())
}

/// Covariant derivative nabla_x y for already-evaluated jet fields.
/// `y` must carry at least one more order than the requested output.
pub fn cov_deriv_jvec(gamma: &[Vec<Vec<Jet>>], x: &JVec, y: &JVec, order: usize) -> JVec {
    let d = x.d;
    let mut out = JVec::zeros(d, d, order);
    for i in 0..d {
        let mut acc = Jet::constant(d, order, 0.0);
        for j in 0..d {
            acc = acc.add(&x.e[j].truncate(order).mul(&y.e[i].shift(j)));
            for m in 0..d {
                acc = acc.add(
                    &gamma[i][j][m]
                        .truncate(order)
                        .mul(&x.e[j].truncate(order))
                        .mul(&y.e[m].truncate(order)),
                );
            }
        }
        out.e[i] = acc;
    }
    out
}

/// Lie bracket for already-evaluated jet fields (both at order >= output+1).
pub fn bracket_jvec(x: &JVec, y: &JVec, order: usize) -> JVec {
    let d = x.d;
    let mut out = JVec::zeros(d, d, order);
    for i in 0..d {
        let mut acc = Jet::constant(d, order, 0.0);
        for j in 0..d {
            acc = acc.add(&x.e[j].truncate(order).mul(&y.e[i].shift(j)));
            acc = acc.sub(&y.e[j].truncate(order).mul(&x.e[i].shift(j)));
        }
        out.e[i] = acc;
    }
    out
}

/// Index lowering: g(X, .).
pub fn flat(g: &dyn MetricEval, x: &dyn VectorEval, p: &[f64]) -> Result<Vec<f64>, GeomError> {
    let gj = g.eval_jet(p, 0)?;
    let xj = x.eval_jet(p, 0)?;
    Ok(gj.mul_vec(&xj).values())
}

/// Index raising of covector component values at p.
pub fn sharp_values(g: &dyn MetricEval, alpha: &[f64], p: &[f64]) -> Result<Vec<f64>, GeomError> {
    let gj = g.eval_jet(p, 0)?;
    let ginv = inverse_metric(&gj, p)?;
    let av = JVec::from_values(alpha, alpha.len(), 0);
    Ok(ginv.mul_vec(&av).values())
}

/// Gradient of a scalar field as jets of order `order`.
pub fn gradient_jet(
    g: &dyn MetricEval,
    f: &dyn ScalarEval,
    p: &[f64],
    order: usize,
) -> Result<JVec, GeomError> {
    let gj = g.eval_jet(p, order)?;
    let ginv = inverse_metric(&gj, p)?;
    let fj = f.eval_jet(p, order + 1)?;
    let d = gj.d;
    let mut df = JVec::zeros(d, d, order);
    for i in 0..d {
        df.e[i] = fj.shift(i);
    }
    Ok(ginv.mul_vec(&df))
}

pub fn gradient(g: &dyn MetricEval, f: &dyn ScalarEval, p: &[f64]) -> Result<Vec<f64>, GeomError> {
    Ok(gradient_jet(g, f, p, 0)?.values())
}

/// Exterior derivative of a 1-form as a matrix of jets of order `order`:
/// `(d alpha)_{ij} = d_i alpha_j - d_j alpha_i`.
pub fn d_of_1form(
    alpha: &dyn CovectorEval,
    p: &[f64],
    order: usize,
) -> Result<JMat, GeomError> {
    let aj = alpha.eval_jet(p, order + 1)?;
    let d = aj.d;
    let mut out = JMat::zeros(d, d, order);
    for i in 0..d {
        for j in 0..d {
            out.set(i, j, aj.e[j].shift(i).sub(&aj.e[i].shift(j)));
        }
    }
    Ok(out)
}

/// Exterior derivative of a 2-form field given by closures producing jets of
/// order >= 1: `(dF)_{ijk} = d_i F_jk + d_j F_ki + d_k F_ij`.
/// Returns the maximum absolute component.
pub fn d_of_2form_max(two_form: &JMat) -> f64 {
    let d = two_form.d;
    let mut m: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let v = two_form.at(j, k).d1[i] + two_form.at(k, i).d1[j]
                    + two_form.at(i, j).d1[k];
                m = m.max(v.abs());
            }
        }
    }
    m
}

/// Lie derivative of the metric along X:
/// `(L_X g)_{ij} = X^m d_m g_ij + g_mj d_i X^m + g_im d_j X^m`.
pub fn lie_derivative_metric(
    g: &dyn MetricEval,
    x: &dyn VectorEval,
    p: &[f64],
) -> Result<Vec<Vec<f64>>, GeomError> {
    let gj = g.eval_jet(p, 1)?;
    let xj = x.eval_jet(p, 1)?;
    let d = gj.d;
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut v = 0.0;
            for m in 0..d {
                v += xj.e[m].v * gj.at(i, j).d1[m];
                v += gj.at(m, j).v * xj.e[m].d1[i];
                v += gj.at(i, m).v * xj.e[m].d1[j];
            }
            out[i][j] = v;
        }
    }
    Ok(out)
}

pub fn max_abs(values: &[Vec<f64>]) -> f64 {
    values
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn vec_max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn euclid_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::Params;
    use crate::fields::{BasisVector, MetricField, ScalarField, Signature, VectorField};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn minkowski() -> (Arc<Chart>, Arc<MetricField>, Arc<Params>) {
        let chart = Chart::new("mink", &["t", "x", "y", "z"], &[]);
        let params = Arc::new(Params::new());
        let g = MetricField::builder(&chart, &params, Signature::Lorentzian)
            .set(0, 0, "-1")
            .unwrap()
            .set(1, 1, "1")
            .unwrap()
            .set(2, 2, "1")
            .unwrap()
            .set(3, 3, "1")
            .unwrap()
            .build();
        (chart, g, params)
    }

    #[test]
    fn minkowski_christoffel_zero() {
        let (_, g, _) = minkowski();
        let p = [0.1, 0.2, 0.3, 0.4];
        let gamma = christoffel(g.as_ref(), &p).unwrap();
        for a in &gamma {
            for b in a {
                for &v in b {
                    assert_eq!(v, 0.0);
                }
            }
        }
        let c = curvature(g.as_ref(), &p).unwrap();
        assert_eq!(c.max_riemann_abs(), 0.0);
    }

    #[test]
    fn coordinate_fields_commute() {
        let (chart, _, _) = minkowski();
        let x = BasisVector {
            chart: chart.clone(),
            index: 1,
        };
        let y = BasisVector {
            chart: chart.clone(),
            index: 2,
        };
        let br = lie_bracket(&x, &y, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(vec_max_abs(&br), 0.0);
    }

    #[test]
    fn sharp_flat_identity() {
        let (chart, g, params) = minkowski();
        let v = VectorField::new(&chart, &params, &["1", "0", "0", "0"]).unwrap();
        let p = [0.0, 0.0, 0.0, 0.0];
        let al = flat(g.as_ref(), &v, &p).unwrap();
        let back = sharp_values(g.as_ref(), &al, &p).unwrap();
        assert_relative_eq!(back[0], 1.0, epsilon = 1e-15);
        for i in 1..4 {
            assert_relative_eq!(back[i], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn round_sphere_scalar_curvature() {
        // unit S^2 x flat 2-torus factor: scalar curvature 2
        let chart = Chart::new("s2f", &["th", "ph", "u", "v"], &[])
            .with_domain("sin(th)", 1e-9)
            .unwrap();
        let params = Arc::new(Params::new());
        let g = MetricField::builder(&chart, &params, Signature::Riemannian)
            .set(0, 0, "1")
            .unwrap()
            .set(1, 1, "sin(th)^2")
            .unwrap()
            .set(2, 2, "1")
            .unwrap()
            .set(3, 3, "1")
            .unwrap()
            .build();
        let c = curvature(g.as_ref(), &[0.9, 0.3, 0.0, 0.0]).unwrap();
        assert_relative_eq!(c.scalar, 2.0, epsilon = 1e-10);
        assert!(c.bianchi_residual() < 1e-12);
    }

    #[test]
    fn d_squared_vanishes() {
        // alpha = d(x^2 y) on minkowski coordinates; d(alpha) must vanish.
        let (chart, g, params) = minkowski();
        let f = Arc::new(ScalarField::new(&chart, &params, "x^2*y").unwrap());
        struct Df {
            f: Arc<ScalarField>,
        }
        impl crate::fields::CovectorEval for Df {
            fn chart(&self) -> &Arc<Chart> {
                &self.f.chart
            }
            fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError> {
                use crate::fields::ScalarEval;
                let fj = self.f.eval_jet(p, order + 1)?;
                let d = p.len();
                let mut out = JVec::zeros(d, d, order);
                for i in 0..d {
                    out.e[i] = fj.shift(i);
                }
                Ok(out)
            }
        }
        let df = Df { f };
        let p = [0.3, 1.2, -0.7, 0.4];
        let dd = d_of_1form(&df, &p, 0).unwrap();
        let _ = g;
        for i in 0..4 {
            for j in 0..4 {
                assert!(dd.at(i, j).v.abs() < 1e-12);
            }
        }
    }
}
