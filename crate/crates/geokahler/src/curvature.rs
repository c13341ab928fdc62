//! Ricci form and scalar curvature of the induced Kahler metric from the
//! volume-ratio formula rho = -1/2 d J d log(mu / nu), cross-validated
//! against the generic Levi-Civita curvature of g_K.
//!
//! The action of J on 1-forms is fixed as (J alpha)(v) = -alpha(J v); the
//! opposite sign fails the oracle comparison on the SKR catalog entry.

use std::sync::Arc;

use crate::error::GeomError;
use crate::fields::{CovectorEval, FlatCovector, GramScalar, MetricEval, ScalarEval};
use crate::jet::Jet;
use crate::jstruct::h_gradient_residual;
use crate::kahler::{KahlerCandidate, TwistScalar};
use crate::linalg::{det_values, JMat, JVec};
use crate::optics::{pregeodesic_factor, shear_coefficients};
use crate::tensor::{
    curvature, d_of_1form, euclid_norm, lie_bracket_jet, lie_derivative_metric, max_abs,
    vec_max_abs,
};

/// ell as an evaluable scalar: the supplied field when present, otherwise
/// the recovery g(t, t) / d tau(t).
pub struct EllScalar {
    pub cand: Arc<KahlerCandidate>,
}

impl ScalarEval for EllScalar {
    fn chart(&self) -> &Arc<crate::chart::Chart> {
        self.cand.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        if let Some(e) = &self.cand.ell {
            return e.eval_jet(p, order);
        }
        let gj = self.cand.g.eval_jet(p, order)?;
        let tj = self.cand.t.eval_jet(p, order)?;
        let tauj = self.cand.tau.eval_jet(p, order + 1)?;
        let mut dtau_t = Jet::constant(p.len(), order, 0.0);
        for i in 0..p.len() {
            dtau_t = dtau_t.add(&tj.e[i].mul(&tauj.shift(i)));
        }
        if dtau_t.v.abs() < 1e-13 {
            return Err(GeomError::Undefined {
                quantity: "ell".into(),
                point: p.to_vec(),
                reason: "d tau(t) = 0".into(),
            });
        }
        Ok(gj.bilinear(&tj, &tj).div(&dtau_t))
    }
}

/// Derivative with respect to tau of a quantity that is a function of tau,
/// computed as the ratio of directional derivatives along t.
fn tau_prime(f: &Jet, t: &JVec, tau: &Jet) -> Jet {
    let order = f.order - 1;
    let d = f.dim;
    let mut num = Jet::constant(d, order, 0.0);
    let mut den = Jet::constant(d, order, 0.0);
    for i in 0..d {
        num = num.add(&t.e[i].truncate(order).mul(&f.shift(i)));
        den = den.add(&t.e[i].truncate(order).mul(&tau.shift(i)));
    }
    num.div(&den)
}

/// (J alpha)_i = -(alpha_m J^m_i) for a 1-form given by jets.
fn j_on_form(alpha: &[Jet], j: &JMat, order: usize) -> Vec<Jet> {
    let d = alpha.len();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let mut acc = Jet::constant(d, order, 0.0);
        for m in 0..d {
            acc = acc.add(&alpha[m].truncate(order).mul(&j.at(m, i).truncate(order)));
        }
        out.push(acc.neg());
    }
    out
}

/// d(J d s) as plain antisymmetric values, from a scalar jet of order >= 2
/// and J of order >= 1.
fn d_j_d(s: &Jet, j: &JMat) -> Vec<Vec<f64>> {
    let d = s.dim;
    let ds: Vec<Jet> = (0..d).map(|i| s.shift(i)).collect();
    let jds = j_on_form(&ds, j, 1);
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for jj in 0..d {
            out[i][jj] = jds[jj].d1[i] - jds[i].d1[jj];
        }
    }
    out
}

/// Coefficient of dx0^dx1^dx2^dx3 in the wedge of two 2-forms given by
/// antisymmetric component matrices.
fn wedge22(p: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
    p[0][1] * q[2][3] - p[0][2] * q[1][3] + p[0][3] * q[1][2] + p[2][3] * q[0][1]
        - p[1][3] * q[0][2]
        + p[1][2] * q[0][3]
}

fn jmat_values(m: &JMat) -> Vec<Vec<f64>> {
    m.values()
}

/// The general volume-ratio Ricci form rho = -1/2 d J d log(mu/nu).
pub fn ricci_form_general(
    mu: &dyn ScalarEval,
    nu: &dyn ScalarEval,
    acs: &crate::jstruct::AcsField,
    p: &[f64],
) -> Result<Vec<Vec<f64>>, GeomError> {
    let muj = mu.eval_jet(p, 2)?;
    let nuj = nu.eval_jet(p, 2)?;
    let ratio = muj.div(&nuj);
    if ratio.v <= 0.0 {
        return Err(GeomError::Undefined {
            quantity: "Ricci form".into(),
            point: p.to_vec(),
            reason: format!("mu/nu = {} is not positive", ratio.v),
        });
    }
    let s = ratio.ln();
    let j = acs.j_matrix(p, 1)?;
    let mut rho = d_j_d(&s, &j);
    for row in rho.iter_mut() {
        for v in row.iter_mut() {
            *v *= -0.5;
        }
    }
    Ok(rho)
}

/// Residual of rho(J., J.) = rho.
pub fn ricci_form_j_invariance(
    rho: &[Vec<f64>],
    acs: &crate::jstruct::AcsField,
    p: &[f64],
) -> Result<f64, GeomError> {
    let j = acs.j_matrix(p, 0)?;
    let d = p.len();
    let mut m: f64 = 0.0;
    for i in 0..d {
        for jj in 0..d {
            let mut pulled = 0.0;
            for a in 0..d {
                for b in 0..d {
                    pulled += rho[a][b] * j.at(a, i).v * j.at(b, jj).v;
                }
            }
            m = m.max((pulled - rho[i][jj]).abs());
        }
    }
    Ok(m)
}

/// The Ricci form obtained from the generic curvature of g_K through
/// rho(a, b) = Ric(J a, b).
pub fn ricci_form_oracle(
    gk: &dyn MetricEval,
    acs: &crate::jstruct::AcsField,
    p: &[f64],
) -> Result<Vec<Vec<f64>>, GeomError> {
    let curv = curvature(gk, p)?;
    let j = acs.j_matrix(p, 0)?;
    let d = p.len();
    let mut rho = vec![vec![0.0; d]; d];
    for i in 0..d {
        for jj in 0..d {
            let mut v = 0.0;
            for m in 0..d {
                v += curv.ricci[m][jj] * j.at(m, i).v;
            }
            rho[i][jj] = v;
        }
    }
    Ok(rho)
}

/// Scalar curvature of g_K from its Levi-Civita connection (the oracle).
pub fn scalar_oracle(gk: &dyn MetricEval, p: &[f64]) -> Result<f64, GeomError> {
    Ok(curvature(gk, p)?.scalar)
}

/// Inputs shared by the closed-form curvature cases: the candidate plus
/// the base Kahler-form coefficient (omega_h = r dx^dy) and which chart
/// coordinates parameterize the base.
pub struct CurvatureCtx {
    pub cand: Arc<KahlerCandidate>,
    pub r_base: Arc<dyn ScalarEval>,
    pub base_coords: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct ScalarCaseResult {
    /// Present when a hypothesis failed, naming the failing residual.
    pub refused: Option<String>,
    pub value: f64,
    pub term1: f64,
    pub term2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureCase {
    Geodesic,
    Killing,
}

impl CurvatureCtx {
    fn hodge_volume(&self, p: &[f64]) -> Result<f64, GeomError> {
        let om = self.cand.omega_jet(p, 0)?;
        let v = jmat_values(&om);
        Ok(0.5 * wedge22(&v, &v))
    }

    /// |*Vol - 1| where Vol = omega^2/2 and the star uses sqrt(det g_K)
    /// with the orientation induced by omega.
    pub fn star_vol_residual(&self, p: &[f64]) -> Result<f64, GeomError> {
        let vol = self.hodge_volume(p)?;
        let gk = self.cand.metric().eval(p)?;
        let det = det_values(&gk);
        if det <= 0.0 {
            return Err(GeomError::Undefined {
                quantity: "Hodge star".into(),
                point: p.to_vec(),
                reason: "det g_K is not positive".into(),
            });
        }
        Ok((vol.abs() / det.sqrt() - 1.0).abs())
    }

    /// Hodge star of a 4-form coefficient.
    fn star4(&self, coeff: f64, p: &[f64]) -> Result<f64, GeomError> {
        let vol = self.hodge_volume(p)?;
        if vol == 0.0 {
            return Err(GeomError::Undefined {
                quantity: "Hodge star".into(),
                point: p.to_vec(),
                reason: "vanishing volume form".into(),
            });
        }
        Ok(coeff / vol)
    }

    /// Coefficients in J dtau = a k_flat + b dtau.
    pub fn jdtau_coefficients(&self, p: &[f64]) -> Result<(f64, f64), GeomError> {
        let (a, b) = self.jdtau_coefficients_jet(p, 0)?;
        Ok((a.v, b.v))
    }

    fn jdtau_coefficients_jet(&self, p: &[f64], order: usize) -> Result<(Jet, Jet), GeomError> {
        let cand = &self.cand;
        let d = p.len();
        let tauj = cand.tau.eval_jet(p, order + 1)?;
        let dtau: Vec<Jet> = (0..d).map(|i| tauj.shift(i)).collect();
        let j = cand.acs().j_matrix(p, order)?;
        let jdtau = j_on_form(&dtau, &j, order);
        let kb = FlatCovector {
            g: cand.g.clone(),
            x: cand.k.clone(),
        };
        let kbj = kb.eval_jet(p, order)?;
        let kj = cand.k.eval_jet(p, order)?;
        let tj = cand.t.eval_jet(p, order)?;
        let pair = |form: &[Jet], v: &JVec| {
            let mut acc = Jet::constant(d, order, 0.0);
            for i in 0..d {
                acc = acc.add(&form[i].mul(&v.e[i].truncate(order)));
            }
            acc
        };
        // [ k_flat(k) dtau(k) ] [a]   [ Jdtau(k) ]
        // [ k_flat(t) dtau(t) ] [b] = [ Jdtau(t) ]
        let mut m = JMat::zeros(2, d, order);
        m.set(0, 0, pair(&kbj.e, &kj));
        m.set(0, 1, pair(&dtau, &kj));
        m.set(1, 0, pair(&kbj.e, &tj));
        m.set(1, 1, pair(&dtau, &tj));
        let inv = m.inverse(1e-13).ok_or(GeomError::Undefined {
            quantity: "Jdtau decomposition".into(),
            point: p.to_vec(),
            reason: "singular (k_flat, dtau) pairing on V".into(),
        })?;
        let mut rhs = JVec::zeros(2, d, order);
        rhs.e[0] = pair(&jdtau, &kj);
        rhs.e[1] = pair(&jdtau, &tj);
        let sol = inv.mul_vec(&rhs);
        Ok((sol.e[0], sol.e[1]))
    }

    /// Hypotheses shared by both cases; returns the list of failures.
    fn common_hypotheses(&self, p: &[f64], tol: f64) -> Result<Vec<String>, GeomError> {
        let cand = &self.cand;
        let mut fails = Vec::new();
        let br = lie_bracket_jet(cand.k.as_ref(), cand.t.as_ref(), p, 0)?;
        let brn = vec_max_abs(&br.values());
        if brn > tol {
            fails.push(format!("commuting fields ([k,t] residual {brn:.2e})"));
        }
        let frame = cand.acs().frame(p, 1)?;
        for (name, f) in [("k", &cand.k), ("t", &cand.t)] {
            let s = shear_coefficients(f.as_ref(), &frame)?;
            let n = euclid_norm(&[s.0, s.1]);
            if n > tol {
                fails.push(format!("shear-free {name} (residual {n:.2e})"));
            }
        }
        let ell = EllScalar { cand: cand.clone() };
        let ell_h = h_gradient_residual(cand.g.as_ref(), &ell, &frame)?;
        if ell_h > tol {
            fails.push(format!("ell function of tau (H-gradient {ell_h:.2e})"));
        }
        // base-lifted H metric: the base-block metric entries and the base
        // Kahler coefficient must be constant along k and t
        let (bi, bj) = self.base_coords;
        let gj = cand.g.eval_jet(p, 1)?;
        let kv = cand.k.eval_jet(p, 0)?;
        let tv = cand.t.eval_jet(p, 0)?;
        let mut lift: f64 = 0.0;
        for (a, b) in [(bi, bi), (bi, bj), (bj, bj)] {
            for v in [&kv, &tv] {
                let dv: f64 = (0..p.len()).map(|i| v.e[i].v * gj.at(a, b).d1[i]).sum();
                lift = lift.max(dv.abs());
            }
        }
        if lift > tol {
            fails.push(format!("base-lifted H metric (residual {lift:.2e})"));
        }
        Ok(fails)
    }

    /// Scalar curvature for the case of geodesic k of constant nonzero
    /// length.
    pub fn scalar_geodesic(&self, p: &[f64], tol: f64) -> Result<ScalarCaseResult, GeomError> {
        let cand = &self.cand;
        let hyp_tol = tol.max(1e-8);
        let mut fails = self.common_hypotheses(p, hyp_tol)?;
        let pre = pregeodesic_factor(cand.g.as_ref(), cand.k.as_ref(), p, hyp_tol)?;
        if pre.geodesic_residual > hyp_tol {
            fails.push(format!(
                "geodesic k (residual {:.2e})",
                pre.geodesic_residual
            ));
        }
        let gkk = GramScalar {
            g: cand.g.clone(),
            x: cand.k.clone(),
            y: cand.k.clone(),
        };
        let gkkj = gkk.eval_jet(p, 1)?;
        let dlen = euclid_norm(&(0..p.len()).map(|i| gkkj.d1[i]).collect::<Vec<_>>());
        if dlen > hyp_tol {
            fails.push(format!("constant |k| (residual {dlen:.2e})"));
        }
        if gkkj.v.abs() < hyp_tol {
            fails.push("nonzero length of k".into());
        }
        // d(k_flat) must have no H x V components
        let kb = FlatCovector {
            g: cand.g.clone(),
            x: cand.k.clone(),
        };
        let dkb = d_of_1form(&kb, p, 0)?;
        let frame = cand.acs().frame(p, 3)?;
        let mut mixed: f64 = 0.0;
        for h in [&frame.x, &frame.y] {
            for v in [&frame.k, frame.t.as_ref().unwrap()] {
                mixed = mixed.max(dkb.bilinear(h, v).v.abs());
            }
        }
        if mixed > hyp_tol {
            fails.push(format!("d k_flat block structure (residual {mixed:.2e})"));
        }
        if !fails.is_empty() {
            return Ok(ScalarCaseResult {
                refused: Some(fails.join("; ")),
                value: f64::NAN,
                term1: f64::NAN,
                term2: f64::NAN,
            });
        }

        // term1 = 1/2 ((log(f' f / ell))' a f)' / (f f')
        let tau3 = cand.tau.eval_jet(p, 3)?;
        let t2 = cand.t.eval_jet(p, 2)?;
        let f = cand.f.apply(&tau3);
        let fp = cand.f.apply_prime(&tau3);
        let ell = EllScalar { cand: cand.clone() }.eval_jet(p, 2)?;
        let lg = f
            .truncate(2)
            .mul(&fp.truncate(2))
            .div(&ell)
            .ln();
        let lgp = tau_prime(&lg, &t2, &tau3.truncate(2));
        let (a_m, _b) = self.jdtau_coefficients_jet(p, 1)?;
        let af = lgp.mul(&a_m).mul(&f.truncate(1));
        let afp = tau_prime(&af, &t2, &tau3.truncate(2));
        let term1 = 0.5 * afp.v / (f.v * fp.v);

        // term2 = * [ 1/2 omega ^ d J d log(-r iota) ]
        let r = self.r_base.eval_jet(p, 2)?;
        let iota = TwistScalar { cand: cand.clone() }.eval_jet(p, 2)?;
        let neg_riota = r.mul(&iota).neg();
        if neg_riota.v <= 0.0 {
            return Err(GeomError::Undefined {
                quantity: "scalar curvature (geodesic case)".into(),
                point: p.to_vec(),
                reason: format!("-r iota = {} is not positive", neg_riota.v),
            });
        }
        let s2 = neg_riota.ln();
        let j = cand.acs().j_matrix(p, 1)?;
        let dd = d_j_d(&s2, &j);
        let om = jmat_values(&self.cand.omega_jet(p, 0)?);
        let term2 = self.star4(0.5 * wedge22(&om, &dd), p)?;
        Ok(ScalarCaseResult {
            refused: None,
            value: term1 - term2,
            term1,
            term2,
        })
    }

    /// Scalar curvature for the case of Killing k with g(k, t) = 0.
    pub fn scalar_killing(&self, p: &[f64], tol: f64) -> Result<ScalarCaseResult, GeomError> {
        let cand = &self.cand;
        let hyp_tol = tol.max(1e-8);
        let mut fails = self.common_hypotheses(p, hyp_tol)?;
        let killing = max_abs(&lie_derivative_metric(cand.g.as_ref(), cand.k.as_ref(), p)?);
        if killing > hyp_tol {
            fails.push(format!("Killing k (residual {killing:.2e})"));
        }
        let gj = cand.g.eval_jet(p, 0)?;
        let kj0 = cand.k.eval_jet(p, 0)?;
        let tj0 = cand.t.eval_jet(p, 0)?;
        let gkt = gj.bilinear(&kj0, &tj0).v;
        if gkt.abs() > hyp_tol {
            fails.push(format!("g(k,t) = 0 (value {gkt:.2e})"));
        }
        let q0 = gj.bilinear(&tj0, &tj0).v;
        if q0.abs() < hyp_tol {
            fails.push("q = g(t,t) nonzero".into());
        }
        let frame = cand.acs().frame(p, 3)?;
        let pfield = GramScalar {
            g: cand.g.clone(),
            x: cand.k.clone(),
            y: cand.k.clone(),
        };
        let iota_field = TwistScalar { cand: cand.clone() };
        for (name, s) in [
            ("p function of tau", &pfield as &dyn ScalarEval),
            ("iota function of tau", &iota_field as &dyn ScalarEval),
        ] {
            let r = h_gradient_residual(cand.g.as_ref(), s, &frame)?;
            if r > hyp_tol {
                fails.push(format!("{name} (H-gradient {r:.2e})"));
            }
        }
        if !fails.is_empty() {
            return Ok(ScalarCaseResult {
                refused: Some(fails.join("; ")),
                value: f64::NAN,
                term1: f64::NAN,
                term2: f64::NAN,
            });
        }

        let tau3 = cand.tau.eval_jet(p, 3)?;
        let t2 = cand.t.eval_jet(p, 2)?;
        let f = cand.f.apply(&tau3);
        let fp = cand.f.apply_prime(&tau3);
        let ell = EllScalar { cand: cand.clone() }.eval_jet(p, 2)?;
        let pj = pfield.eval_jet(p, 3)?;
        let qj = GramScalar {
            g: cand.g.clone(),
            x: cand.t.clone(),
            y: cand.t.clone(),
        }
        .eval_jet(p, 2)?;
        let iota = iota_field.eval_jet(p, 2)?;
        let p_prime = tau_prime(&pj, &t2, &tau3);
        // D = f' + f p'/p
        let dfac = fp
            .truncate(2)
            .add(&f.truncate(2).mul(&p_prime).div(&pj.truncate(2)));
        // P = -1/2 log(-f D p iota / ell)
        let arg = f
            .truncate(2)
            .mul(&dfac)
            .mul(&pj.truncate(2))
            .mul(&iota)
            .div(&ell)
            .neg();
        if arg.v <= 0.0 {
            return Err(GeomError::Undefined {
                quantity: "scalar curvature (Killing case)".into(),
                point: p.to_vec(),
                reason: format!("-f (f' + f p'/p) p iota / ell = {} is not positive", arg.v),
            });
        }
        let pcap = arg.ln().scale(-0.5);
        let pcap_prime = tau_prime(&pcap, &t2, &tau3.truncate(2));
        // a = -q/(p ell)
        let a_coeff = qj
            .truncate(1)
            .neg()
            .div(&pj.truncate(1).mul(&ell.truncate(1)));
        let fap = f.truncate(1).mul(&a_coeff).mul(&pcap_prime);
        let fap_prime = tau_prime(&fap, &t2, &tau3.truncate(2));
        let term1 = (fap_prime.v + 2.0 * fap.v * p_prime.v / pj.v) / (f.v * dfac.v);

        let r = self.r_base.eval_jet(p, 2)?;
        if r.v <= 0.0 {
            return Err(GeomError::Undefined {
                quantity: "scalar curvature (Killing case)".into(),
                point: p.to_vec(),
                reason: "base coefficient r is not positive".into(),
            });
        }
        let s2 = r.ln();
        let j = cand.acs().j_matrix(p, 1)?;
        let dd = d_j_d(&s2, &j);
        let om = jmat_values(&self.cand.omega_jet(p, 0)?);
        let term2 = 0.5 * self.star4(wedge22(&om, &dd), p)?;
        Ok(ScalarCaseResult {
            refused: None,
            value: term1 - term2,
            term1,
            term2,
        })
    }

    pub fn scalar_case(
        &self,
        case: CurvatureCase,
        p: &[f64],
        tol: f64,
    ) -> Result<ScalarCaseResult, GeomError> {
        match case {
            CurvatureCase::Geodesic => self.scalar_geodesic(p, tol),
            CurvatureCase::Killing => self.scalar_killing(p, tol),
        }
    }

    /// rho from the volume-ratio formula with the geodesic-case volume
    /// coefficient mu = -f f' r iota / ell and nu = ell.
    pub fn ricci_form(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, GeomError> {
        let mu = MuScalar {
            ctx_cand: self.cand.clone(),
            r_base: self.r_base.clone(),
            killing: false,
        };
        let nu = EllScalar {
            cand: self.cand.clone(),
        };
        ricci_form_general(&mu, &nu, &self.cand.acs(), p)
    }

    /// rho for the Killing case: mu = -f (f' + f p'/p) r iota p / ell.
    pub fn ricci_form_killing(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, GeomError> {
        let mu = MuScalar {
            ctx_cand: self.cand.clone(),
            r_base: self.r_base.clone(),
            killing: true,
        };
        let nu = EllScalar {
            cand: self.cand.clone(),
        };
        ricci_form_general(&mu, &nu, &self.cand.acs(), p)
    }

    /// Closedness of rho via central differences of the formula (the
    /// object involves effectively fourth derivatives of the primitives,
    /// so this carries a coarse error budget).
    pub fn ricci_form_closedness(&self, p: &[f64], h: f64) -> Result<f64, GeomError> {
        let d = p.len();
        let mut max = 0.0_f64;
        let rho_at = |q: &[f64]| self.ricci_form(q);
        let mut drho = vec![vec![vec![0.0; d]; d]; d];
        for m in 0..d {
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[m] += h;
            pm[m] -= h;
            let rp = rho_at(&pp)?;
            let rm = rho_at(&pm)?;
            for i in 0..d {
                for j in 0..d {
                    drho[m][i][j] = (rp[i][j] - rm[i][j]) / (2.0 * h);
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for m in 0..d {
                    let v = drho[i][j][m] + drho[j][m][i] + drho[m][i][j];
                    max = max.max(v.abs());
                }
            }
        }
        Ok(max)
    }
}

/// The volume coefficient mu of the coordinate expression of omega^2/2.
struct MuScalar {
    ctx_cand: Arc<KahlerCandidate>,
    r_base: Arc<dyn ScalarEval>,
    killing: bool,
}

impl ScalarEval for MuScalar {
    fn chart(&self) -> &Arc<crate::chart::Chart> {
        self.ctx_cand.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let cand = &self.ctx_cand;
        let tauj = cand.tau.eval_jet(p, order + 1)?;
        let f = cand.f.apply(&tauj).truncate(order);
        let fp = cand.f.apply_prime(&tauj).truncate(order);
        let r = self.r_base.eval_jet(p, order)?;
        let iota = TwistScalar { cand: cand.clone() }.eval_jet(p, order)?;
        let ell = EllScalar { cand: cand.clone() }.eval_jet(p, order)?;
        if self.killing {
            let t1 = cand.t.eval_jet(p, order)?;
            let pj = GramScalar {
                g: cand.g.clone(),
                x: cand.k.clone(),
                y: cand.k.clone(),
            }
            .eval_jet(p, order + 1)?;
            let p_prime = tau_prime(&pj, &t1, &tauj);
            let dfac = fp.add(&f.mul(&p_prime).div(&pj.truncate(order)));
            Ok(f
                .mul(&dfac)
                .mul(&r)
                .mul(&iota)
                .mul(&pj.truncate(order))
                .div(&ell)
                .neg())
        } else {
            Ok(f.mul(&fp).mul(&r).mul(&iota).div(&ell).neg())
        }
    }
}
