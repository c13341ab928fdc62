//! The almost complex structure J built from a metric and two distinguished
//! vector fields, its Nijenhuis tensor, and the condition suites that
//! govern integrability and admissibility.
//!
//! J acts as Jk = t, Jt = -k on V = span(k, t) and as rotation by +90
//! degrees on H in the oriented orthonormal frame produced by
//! [`crate::optics::build_frame`]. Because the frame members are jets, J is
//! itself a differentiable field and the Nijenhuis tensor can be evaluated
//! without any stored matrix field.

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::GeomError;
use crate::fields::{MetricEval, ScalarEval, ScaledVector, VectorEval};
use crate::jet::Jet;
use crate::linalg::{JMat, JVec};
use crate::optics::{
    build_frame, pregeodesic_factor, shear_coefficients, PreGeodesic, SplitFrame,
};
use crate::tensor::{
    bracket_jvec, cov_deriv_jvec, euclid_norm, gradient_jet, lie_derivative_metric, max_abs,
    vec_max_abs,
};

/// An admissible almost complex structure as an evaluable field.
#[derive(Clone)]
pub struct AcsField {
    pub g: Arc<dyn MetricEval>,
    pub k: Arc<dyn VectorEval>,
    pub t: Arc<dyn VectorEval>,
    pub orientation: i8,
    pub seeds: Option<[Arc<dyn VectorEval>; 2]>,
}

impl AcsField {
    pub fn new(
        g: Arc<dyn MetricEval>,
        k: Arc<dyn VectorEval>,
        t: Arc<dyn VectorEval>,
        orientation: i8,
    ) -> Self {
        AcsField {
            g,
            k,
            t,
            orientation,
            seeds: None,
        }
    }

    pub fn with_seeds(mut self, seeds: Option<[Arc<dyn VectorEval>; 2]>) -> Self {
        self.seeds = seeds;
        self
    }

    /// The same construction with respect to the opposite orientation.
    pub fn opposite(&self) -> AcsField {
        let mut o = self.clone();
        o.orientation = -o.orientation;
        o
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }

    pub fn frame(&self, p: &[f64], order: usize) -> Result<SplitFrame, GeomError> {
        build_frame(
            self.g.as_ref(),
            self.k.as_ref(),
            self.t.as_ref(),
            p,
            self.orientation,
            self.seeds.as_ref(),
            order,
        )
    }

    /// J in chart coordinates as a matrix of jets.
    pub fn j_matrix(&self, p: &[f64], order: usize) -> Result<JMat, GeomError> {
        let frame = self.frame(p, order)?;
        self.j_from_frame(&frame)
    }

    pub fn j_from_frame(&self, frame: &SplitFrame) -> Result<JMat, GeomError> {
        let d = frame.dim();
        let t = frame.t.as_ref().expect("AcsField frames carry t");
        let (dim, order) = (frame.k.e[0].dim, frame.k.e[0].order);
        let mut basis = JMat::zeros(d, dim, order);
        let mut jbasis = JMat::zeros(d, dim, order);
        let cols: [&JVec; 4] = [&frame.k, t, &frame.x, &frame.y];
        let jcols: [JVec; 4] = [t.clone(), frame.k.neg(), frame.y.clone(), frame.x.neg()];
        for (c, (col, jcol)) in cols.iter().zip(jcols.iter()).enumerate() {
            for r in 0..d {
                basis.set(r, c, col.e[r]);
                jbasis.set(r, c, jcol.e[r]);
            }
        }
        let inv = basis.inverse(1e-13).ok_or(GeomError::DegenerateV {
            point: frame.point.clone(),
            det: 0.0,
        })?;
        Ok(jbasis.mul_mat(&inv))
    }
}

fn apply(j: &JMat, v: &JVec) -> JVec {
    j.mul_vec(v)
}

/// Nijenhuis tensor N(a, b) = [Ja, Jb] - J[Ja, b] - J[a, Jb] - [a, b],
/// with a and b extended as the given fields and J extended through its
/// smooth construction.
pub fn nijenhuis(
    acs: &AcsField,
    a: &dyn VectorEval,
    b: &dyn VectorEval,
    p: &[f64],
) -> Result<Vec<f64>, GeomError> {
    let j = acs.j_matrix(p, 1)?;
    let aj = a.eval_jet(p, 1)?;
    let bj = b.eval_jet(p, 1)?;
    Ok(nijenhuis_jvec(&j, &aj, &bj).values())
}

fn nijenhuis_jvec(j: &JMat, aj: &JVec, bj: &JVec) -> JVec {
    let ja = apply(j, aj);
    let jb = apply(j, bj);
    let mut n = bracket_jvec(&ja, &jb, 0);
    n = n.sub(&apply(j, &bracket_jvec(&ja, bj, 0)));
    n = n.sub(&apply(j, &bracket_jvec(aj, &jb, 0)));
    n = n.sub(&bracket_jvec(aj, bj, 0));
    n
}

/// Maximum |N(e_i, e_j)| component over all coordinate basis pairs.
pub fn nijenhuis_max(acs: &AcsField, p: &[f64]) -> Result<f64, GeomError> {
    let j = acs.j_matrix(p, 1)?;
    nijenhuis_max_from_j(&j, p.len())
}

pub(crate) fn nijenhuis_max_from_j(j: &JMat, d: usize) -> Result<f64, GeomError> {
    let mut basis = Vec::with_capacity(d);
    for i in 0..d {
        let mut e = JVec::zeros(d, d, 1);
        e.e[i] = Jet::constant(d, 1, 1.0);
        basis.push(e);
    }
    let mut m: f64 = 0.0;
    for i in 0..d {
        for jdx in (i + 1)..d {
            let n = nijenhuis_jvec(j, &basis[i], &basis[jdx]);
            m = m.max(vec_max_abs(&n.values()));
        }
    }
    Ok(m)
}

/// A scalar bump equal to 1 at the base point with a nonzero differential,
/// used to compare two extensions of a vector field in tensoriality checks.
struct LinearBump {
    chart: Arc<Chart>,
    base: Vec<f64>,
}

impl ScalarEval for LinearBump {
    fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let mut j = Jet::constant(p.len(), order, 1.0);
        let coeffs = [0.37, 0.23, -0.31, 0.17];
        for i in 0..p.len() {
            j = j.add(&Jet::variable(p.len(), order, p[i] - self.base[i], i).scale(coeffs[i]));
        }
        Ok(j)
    }
}

/// Residual between N(a, b) and N(f a, b) at the point where f = 1; a
/// nonzero value indicates the evaluation is not tensorial.
pub fn nijenhuis_tensoriality_residual(
    acs: &AcsField,
    a: Arc<dyn VectorEval>,
    b: &dyn VectorEval,
    p: &[f64],
) -> Result<f64, GeomError> {
    let n0 = nijenhuis(acs, a.as_ref(), b, p)?;
    let bump = Arc::new(LinearBump {
        chart: acs.chart().clone(),
        base: p.to_vec(),
    });
    let scaled = ScaledVector { s: bump, x: a };
    let n1 = nijenhuis(acs, &scaled, b, p)?;
    Ok(n0
        .iter()
        .zip(&n1)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max))
}

/// Residuals of the sufficient integrability conditions: the four
/// bracket conditions (V-components of [k, .] and [t, .] against k and t
/// on the H frame) and the shear condition J o shear(k) = shear(t).
#[derive(Debug, Clone)]
pub struct IntegrabilityReport {
    /// max over the H frame of |g([k, .], k)|, |g([k, .], t)|,
    /// |g([t, .], k)|, |g([t, .], t)| in that order.
    pub bracket_residuals: [f64; 4],
    pub shear_residual: f64,
    pub sigma_k: (f64, f64),
    pub sigma_t: (f64, f64),
}

impl IntegrabilityReport {
    pub fn max_residual(&self) -> f64 {
        self.bracket_residuals
            .iter()
            .fold(self.shear_residual, |m, v| m.max(*v))
    }
}

pub fn check_integrability_sufficient(
    acs: &AcsField,
    p: &[f64],
) -> Result<IntegrabilityReport, GeomError> {
    let frame = acs.frame(p, 1)?;
    let kj = acs.k.eval_jet(p, 1)?;
    let tj = acs.t.eval_jet(p, 1)?;
    let mut res = [0.0_f64; 4];
    for h in [&frame.x, &frame.y] {
        let bk = bracket_jvec(&kj, h, 0);
        let bt = bracket_jvec(&tj, h, 0);
        res[0] = res[0].max(frame.g.bilinear(&bk, &kj).v.abs());
        res[1] = res[1].max(frame.g.bilinear(&bk, &tj).v.abs());
        res[2] = res[2].max(frame.g.bilinear(&bt, &kj).v.abs());
        res[3] = res[3].max(frame.g.bilinear(&bt, &tj).v.abs());
    }
    let sk = shear_coefficients(acs.k.as_ref(), &frame)?;
    let st = shear_coefficients(acs.t.as_ref(), &frame)?;
    // J shear(k) = shear(t) in the oriented frame reads
    // sigma1(t) = sigma2(k), sigma2(t) = -sigma1(k).
    let shear_residual = (st.0 - sk.1).abs().max((st.1 + sk.0).abs());
    Ok(IntegrabilityReport {
        bracket_residuals: res,
        shear_residual,
        sigma_k: sk,
        sigma_t: st,
    })
}

/// Split-adjointness of J on V and the conditions of the associated
/// integrability criterion.
#[derive(Debug, Clone)]
pub struct SplitAdjointReport {
    pub is_split_adjoint: bool,
    /// |g(Ja, b) - g(a, Jb)| maximized over the V basis; equals
    /// |g(k, k) + g(t, t)|.
    pub adjoint_residual: f64,
    pub condition_i_residual: f64,
    pub condition_ii_residual: f64,
}

pub fn check_split_adjoint(
    acs: &AcsField,
    p: &[f64],
    tol: f64,
) -> Result<SplitAdjointReport, GeomError> {
    let frame = acs.frame(p, 1)?;
    let kj = &frame.k;
    let tj = frame.t.as_ref().unwrap();
    let g = &frame.g;
    // J restricted to V: Jk = t, Jt = -k. The only nontrivial adjointness
    // pair is (k, t): g(Jk, t) - g(k, Jt) = g(t, t) + g(k, k).
    let adjoint_residual = (g.bilinear(tj, tj).v + g.bilinear(kj, kj).v).abs();
    let scale = 1.0 + max_abs(&frame.gram);
    let is_split_adjoint = adjoint_residual < tol.max(1e-9) * scale;

    let mut cond_i: f64 = 0.0;
    for (h, jh) in [(&frame.x, frame.y.clone()), (&frame.y, frame.x.neg())] {
        let b_t_jh = bracket_jvec(tj, &jh, 0);
        let b_k_jh = bracket_jvec(kj, &jh, 0);
        let b_k_h = bracket_jvec(kj, h, 0);
        let b_t_h = bracket_jvec(tj, h, 0);
        let v = g.bilinear(&b_t_jh, kj).v - g.bilinear(&b_k_jh, tj).v
            - g.bilinear(&b_k_h, kj).v
            - g.bilinear(&b_t_h, tj).v;
        cond_i = cond_i.max(v.abs());
    }
    let integ = check_integrability_sufficient(acs, p)?;
    Ok(SplitAdjointReport {
        is_split_adjoint,
        adjoint_residual,
        condition_i_residual: cond_i,
        condition_ii_residual: integ.shear_residual,
    })
}

/// Geometric circumstances that imply individual bracket conditions.
#[derive(Debug, Clone)]
pub struct FieldGeometry {
    /// Euclidean norm of d(g(X, X)).
    pub const_length_residual: f64,
    /// max |(L_X g)_{ij}|.
    pub killing_residual: f64,
    pub pregeodesic: PreGeodesic,
}

#[derive(Debug, Clone)]
pub struct GeometricSufficients {
    pub k: FieldGeometry,
    pub t: FieldGeometry,
    /// |t - ell grad(tau)| with ell recovered, when tau was supplied.
    pub near_gradient_residual: Option<f64>,
    pub recovered_ell: Option<f64>,
    /// max over the H frame of |g(nabla_k t + nabla_t k, .)|.
    pub semrm_residual: f64,
}

fn field_geometry(
    g: &dyn MetricEval,
    x: &dyn VectorEval,
    p: &[f64],
    tol: f64,
) -> Result<FieldGeometry, GeomError> {
    let gj = g.eval_jet(p, 1)?;
    let xj = x.eval_jet(p, 1)?;
    let len = gj.bilinear(&xj, &xj);
    let dlen: Vec<f64> = (0..p.len()).map(|i| len.d1[i]).collect();
    let lie = lie_derivative_metric(g, x, p)?;
    Ok(FieldGeometry {
        const_length_residual: euclid_norm(&dlen),
        killing_residual: max_abs(&lie),
        pregeodesic: pregeodesic_factor(g, x, p, tol)?,
    })
}

/// Recover `ell = g(t, t) / d tau(t)` and the residual of `t = ell grad tau`.
pub fn recover_ell(
    g: &dyn MetricEval,
    t: &dyn VectorEval,
    tau: &dyn ScalarEval,
    p: &[f64],
) -> Result<(f64, f64), GeomError> {
    let gj = g.eval_jet(p, 0)?;
    let tj = t.eval_jet(p, 0)?;
    let tauj = tau.eval_jet(p, 1)?;
    let dtau_t: f64 = (0..p.len()).map(|i| tj.e[i].v * tauj.d1[i]).sum();
    if dtau_t.abs() < 1e-13 {
        return Err(GeomError::Undefined {
            quantity: "ell".into(),
            point: p.to_vec(),
            reason: "d tau(t) = 0".into(),
        });
    }
    let ell = gj.bilinear(&tj, &tj).v / dtau_t;
    let grad = gradient_jet(g, tau, p, 0)?;
    let resid: Vec<f64> = (0..p.len())
        .map(|i| tj.e[i].v - ell * grad.e[i].v)
        .collect();
    let tnorm = euclid_norm(&tj.values());
    Ok((ell, euclid_norm(&resid) / (1.0 + tnorm)))
}

pub fn check_geometric_sufficients(
    acs: &AcsField,
    tau: Option<&dyn ScalarEval>,
    p: &[f64],
    tol: f64,
) -> Result<GeometricSufficients, GeomError> {
    let frame = acs.frame(p, 1)?;
    let kg = field_geometry(acs.g.as_ref(), acs.k.as_ref(), p, tol)?;
    let tg = field_geometry(acs.g.as_ref(), acs.t.as_ref(), p, tol)?;
    let (ell, near) = match tau {
        Some(tau) => {
            let (e, r) = recover_ell(acs.g.as_ref(), acs.t.as_ref(), tau, p)?;
            (Some(e), Some(r))
        }
        None => (None, None),
    };
    let kj = acs.k.eval_jet(p, 1)?;
    let tj = acs.t.eval_jet(p, 1)?;
    let ndkt = cov_deriv_jvec(&frame.gamma, &kj, &tj, 0);
    let ndtk = cov_deriv_jvec(&frame.gamma, &tj, &kj, 0);
    let s = ndkt.add(&ndtk);
    let semrm = frame
        .g
        .bilinear(&s, &frame.x)
        .v
        .abs()
        .max(frame.g.bilinear(&s, &frame.y).v.abs());
    Ok(GeometricSufficients {
        k: kg,
        t: tg,
        near_gradient_residual: near,
        recovered_ell: ell,
        semrm_residual: semrm,
    })
}

/// Residual of "grad(s) lies in V": the g-orthogonal projection of the
/// gradient onto H, normalized by (1 + |grad|).
pub fn h_gradient_residual(
    g: &dyn MetricEval,
    s: &dyn ScalarEval,
    frame: &SplitFrame,
) -> Result<f64, GeomError> {
    let grad = gradient_jet(g, s, &frame.point, 0)?;
    let gx = frame.g.bilinear(&grad, &frame.x).v;
    let gy = frame.g.bilinear(&grad, &frame.y).v;
    let norm = euclid_norm(&grad.values());
    Ok((gx * gx + gy * gy).sqrt() / (1.0 + norm))
}

/// The full admissibility report: admissible J (integrability suite),
/// t = ell grad(tau), and V-directed gradients of g(k, t) and g(k, k).
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub gram: Vec<Vec<f64>>,
    pub g_det: f64,
    pub v_nondegenerate: bool,
    pub h_spacelike: bool,
    pub integrability: IntegrabilityReport,
    pub nijenhuis_max: f64,
    pub ell: Option<f64>,
    pub near_gradient_residual: Option<f64>,
    pub grad_gkt_h_residual: f64,
    pub grad_gkk_h_residual: f64,
    pub tol: f64,
    pub notes: Vec<String>,
}

impl AdmissibilityReport {
    pub fn integrability_pass(&self) -> bool {
        self.integrability.max_residual() < self.tol
    }

    pub fn pass(&self) -> bool {
        self.v_nondegenerate
            && self.h_spacelike
            && self.integrability_pass()
            && self.nijenhuis_max < self.tol.max(1e-7)
            && self.near_gradient_residual.map(|r| r < self.tol) == Some(true)
            && self.grad_gkt_h_residual < self.tol
            && self.grad_gkk_h_residual < self.tol
    }
}

pub fn check_admissible(
    acs: &AcsField,
    tau: &dyn ScalarEval,
    ell: Option<&dyn ScalarEval>,
    p: &[f64],
    tol: f64,
) -> Result<AdmissibilityReport, GeomError> {
    let mut notes = Vec::new();
    let frame = match acs.frame(p, 1) {
        Ok(f) => f,
        Err(e @ (GeomError::DegenerateV { .. } | GeomError::HNotSpacelike { .. })) => {
            let nan = f64::NAN;
            return Ok(AdmissibilityReport {
                gram: vec![vec![nan; 2]; 2],
                g_det: nan,
                v_nondegenerate: !matches!(e, GeomError::DegenerateV { .. }),
                h_spacelike: !matches!(e, GeomError::HNotSpacelike { .. }),
                integrability: IntegrabilityReport {
                    bracket_residuals: [nan; 4],
                    shear_residual: nan,
                    sigma_k: (nan, nan),
                    sigma_t: (nan, nan),
                },
                nijenhuis_max: nan,
                ell: None,
                near_gradient_residual: None,
                grad_gkt_h_residual: nan,
                grad_gkk_h_residual: nan,
                tol,
                notes: vec![format!("frame construction failed: {e}")],
            });
        }
        Err(e) => return Err(e),
    };
    let integrability = check_integrability_sufficient(acs, p)?;
    let nij = nijenhuis_max(acs, p)?;

    let (ell_val, near) = match recover_ell(acs.g.as_ref(), acs.t.as_ref(), tau, p) {
        Ok((recovered, r)) => {
            // a user-supplied ell overrides the recovery and is checked
            if let Some(e) = ell {
                let supplied = e.eval(p)?;
                let grad = gradient_jet(acs.g.as_ref(), tau, p, 0)?;
                let tj = acs.t.eval_jet(p, 0)?;
                let resid: Vec<f64> = (0..p.len())
                    .map(|i| tj.e[i].v - supplied * grad.e[i].v)
                    .collect();
                (
                    Some(supplied),
                    Some(euclid_norm(&resid) / (1.0 + euclid_norm(&tj.values()))),
                )
            } else {
                (Some(recovered), Some(r))
            }
        }
        Err(GeomError::Undefined { .. }) => {
            notes.push("ell undefined: d tau(t) = 0 at this point".into());
            (None, None)
        }
        Err(e) => return Err(e),
    };

    let gkt = crate::fields::GramScalar {
        g: acs.g.clone(),
        x: acs.k.clone(),
        y: acs.t.clone(),
    };
    let gkk = crate::fields::GramScalar {
        g: acs.g.clone(),
        x: acs.k.clone(),
        y: acs.k.clone(),
    };
    let grad_gkt = h_gradient_residual(acs.g.as_ref(), &gkt, &frame)?;
    let grad_gkk = h_gradient_residual(acs.g.as_ref(), &gkk, &frame)?;

    Ok(AdmissibilityReport {
        gram: frame.gram.clone(),
        g_det: frame.gram_det(),
        v_nondegenerate: true,
        h_spacelike: true,
        integrability,
        nijenhuis_max: nij,
        ell: ell_val,
        near_gradient_residual: near,
        grad_gkt_h_residual: grad_gkt,
        grad_gkk_h_residual: grad_gkk,
        tol,
        notes,
    })
}

/// Lie derivative of J along X, evaluated on the coordinate basis:
/// `out[i][j] = ((L_X J) e_j)^i`.
pub fn lie_derivative_j(
    acs: &AcsField,
    x: &dyn VectorEval,
    p: &[f64],
) -> Result<Vec<Vec<f64>>, GeomError> {
    let j = acs.j_matrix(p, 1)?;
    let xj = x.eval_jet(p, 1)?;
    let d = p.len();
    let mut out = vec![vec![0.0; d]; d];
    for col in 0..d {
        let mut e = JVec::zeros(d, d, 1);
        e.e[col] = Jet::constant(d, 1, 1.0);
        let je = apply(&j, &e);
        let term1 = bracket_jvec(&xj, &je, 0);
        let term2 = apply(&j, &bracket_jvec(&xj, &e, 0));
        let r = term1.sub(&term2);
        for row in 0..d {
            out[row][col] = r.e[row].v;
        }
    }
    Ok(out)
}

/// Integrability of J built from rescaled null fields f1 k, f2 t, together
/// with the equivalent gradient criterion on f1/f2.
#[derive(Debug, Clone)]
pub struct RescaledJReport {
    pub base_nijenhuis_max: f64,
    pub nijenhuis_max: f64,
    pub ratio_h_gradient_residual: f64,
    pub k_null_residual: f64,
    pub t_null_residual: f64,
    pub k_shear_residual: f64,
    pub t_shear_residual: f64,
}

pub fn rescaled_j(
    acs: &AcsField,
    f1: Arc<dyn ScalarEval>,
    f2: Arc<dyn ScalarEval>,
    p: &[f64],
) -> Result<RescaledJReport, GeomError> {
    for (name, f) in [("f1", &f1), ("f2", &f2)] {
        let v = f.eval(p)?;
        if v.abs() < 1e-12 {
            return Err(GeomError::Undefined {
                quantity: "rescaled J".into(),
                point: p.to_vec(),
                reason: format!("{name} vanishes"),
            });
        }
    }
    let frame = acs.frame(p, 1)?;
    let kj = &frame.k;
    let tj = frame.t.as_ref().unwrap();
    let k_null = frame.g.bilinear(kj, kj).v.abs();
    let t_null = frame.g.bilinear(tj, tj).v.abs();
    let sk = shear_coefficients(acs.k.as_ref(), &frame)?;
    let st = shear_coefficients(acs.t.as_ref(), &frame)?;
    let base_n = nijenhuis_max(acs, p)?;

    let scaled = AcsField {
        g: acs.g.clone(),
        k: Arc::new(ScaledVector {
            s: f1.clone(),
            x: acs.k.clone(),
        }),
        t: Arc::new(ScaledVector {
            s: f2.clone(),
            x: acs.t.clone(),
        }),
        orientation: acs.orientation,
        seeds: acs.seeds.clone(),
    };
    let n = nijenhuis_max(&scaled, p)?;
    let ratio = crate::fields::RatioScalar { num: f1, den: f2 };
    let ratio_res = h_gradient_residual(acs.g.as_ref(), &ratio, &frame)?;
    Ok(RescaledJReport {
        base_nijenhuis_max: base_n,
        nijenhuis_max: n,
        ratio_h_gradient_residual: ratio_res,
        k_null_residual: k_null,
        t_null_residual: t_null,
        k_shear_residual: euclid_norm(&[sk.0, sk.1]),
        t_shear_residual: euclid_norm(&[st.0, st.1]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::expr::Params;
    use crate::fields::{MetricField, Signature, VectorField};
    use approx::assert_relative_eq;

    fn flat_acs() -> (Arc<Chart>, AcsField) {
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
        let k = Arc::new(VectorField::new(&chart, &params, &["1", "0", "0", "1"]).unwrap());
        let t = Arc::new(VectorField::new(&chart, &params, &["1", "0", "0", "-1"]).unwrap());
        (chart.clone(), AcsField::new(g, k, t, 1))
    }

    #[test]
    fn flat_j_squares_to_minus_identity() {
        let (_, acs) = flat_acs();
        let p = [0.0, 0.1, 0.2, 0.3];
        let j = acs.j_matrix(&p, 0).unwrap();
        let j2 = j.mul_mat(&j);
        for i in 0..4 {
            for jj in 0..4 {
                let expect = if i == jj { -1.0 } else { 0.0 };
                assert_relative_eq!(j2.at(i, jj).v, expect, epsilon = 1e-12);
            }
        }
        // Jk = t
        let kv = acs.k.eval(&p).unwrap();
        let tv = acs.t.eval(&p).unwrap();
        let jk = j.mul_vec(&JVec::from_values(&kv, 4, 0)).values();
        for i in 0..4 {
            assert_relative_eq!(jk[i], tv[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn flat_j_isometry_on_h_and_nijenhuis_zero() {
        let (_, acs) = flat_acs();
        let p = [0.0, 0.1, 0.2, 0.3];
        let j = acs.j_matrix(&p, 0).unwrap();
        let g = acs.g.eval_jet(&p, 0).unwrap();
        let jt = j.transpose();
        let gj = jt.mul_mat(&g.mul_mat(&j));
        for i in 1..3 {
            for jj in 1..3 {
                assert_relative_eq!(gj.at(i, jj).v, g.at(i, jj).v, epsilon = 1e-12);
            }
        }
        assert!(nijenhuis_max(&acs, &p).unwrap() < 1e-12);
    }

    #[test]
    fn flat_integrability_and_split_adjoint() {
        let (_, acs) = flat_acs();
        let p = [0.0; 4];
        let rep = check_integrability_sufficient(&acs, &p).unwrap();
        assert!(rep.max_residual() < 1e-12);
        let sa = check_split_adjoint(&acs, &p, 1e-9).unwrap();
        assert!(sa.is_split_adjoint); // both fields null
        assert!(sa.condition_i_residual < 1e-12);
    }

    #[test]
    fn riemannian_pair_not_split_adjoint() {
        let chart = Chart::new("r4", &["a", "b", "c", "d"], &[]);
        let params = Arc::new(Params::new());
        let g = MetricField::builder(&chart, &params, Signature::Riemannian)
            .set(0, 0, "1")
            .unwrap()
            .set(1, 1, "1")
            .unwrap()
            .set(2, 2, "1")
            .unwrap()
            .set(3, 3, "1")
            .unwrap()
            .build();
        let k = Arc::new(VectorField::new(&chart, &params, &["1", "0", "0", "0"]).unwrap());
        let t = Arc::new(VectorField::new(&chart, &params, &["0", "1", "0", "0"]).unwrap());
        let acs = AcsField::new(g, k, t, 1);
        let sa = check_split_adjoint(&acs, &[0.0; 4], 1e-9).unwrap();
        assert!(!sa.is_split_adjoint);
        assert_relative_eq!(sa.adjoint_residual, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lie_derivative_j_vanishes_for_translation() {
        let (chart, acs) = flat_acs();
        let params = Arc::new(Params::new());
        let x = VectorField::new(&chart, &params, &["0", "1", "0", "0"]).unwrap();
        let l = lie_derivative_j(&acs, &x, &[0.0, 0.2, -0.3, 0.1]).unwrap();
        assert!(max_abs(&l) < 1e-12);
    }

    #[test]
    fn tensoriality_of_nijenhuis() {
        let (chart, acs) = flat_acs();
        let params = Arc::new(Params::new());
        let a: Arc<dyn VectorEval> =
            Arc::new(VectorField::new(&chart, &params, &["0", "1", "0", "0"]).unwrap());
        let b = VectorField::new(&chart, &params, &["0", "0", "1", "0"]).unwrap();
        let r = nijenhuis_tensoriality_residual(&acs, a, &b, &[0.0, 0.1, 0.2, 0.3]).unwrap();
        assert!(r < 1e-10, "tensoriality residual {r}");
    }
}
