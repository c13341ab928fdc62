//! The induced Kahler structure: symplectic form omega = d(f(tau) k_flat),
//! metric g_K = omega(., J.), the positivity region, the verification
//! suite, the Petrov-type variant omega = d(f(u) p k_flat), first-order
//! transfer properties, and the metric variations that leave g_K fixed.

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::GeomError;
use crate::expr::{parse_expr, Expr, Params};
use crate::fields::{
    CovectorEval, FlatCovector, GramScalar, MetricEval, ScalarEval, Signature, VectorEval,
};
use crate::jet::Jet;
use crate::jstruct::{check_admissible, h_gradient_residual, AcsField, AdmissibilityReport};
use crate::linalg::{sym_eigenvalues, JMat, JVec};
use crate::optics::{pregeodesic_factor, shear_coefficients, twist, twist_jet, SplitFrame};
use crate::tensor::{
    christoffel_jets, cov_deriv, d_of_1form, d_of_2form_max, euclid_norm, lie_bracket_jet,
    lie_derivative_metric, max_abs, vec_max_abs,
};

/// The "parameter function" f applied to tau (or to u in the Petrov
/// variant).
#[derive(Debug, Clone)]
pub enum ParamFn {
    /// f(tau) = tau - c
    Affine(f64),
    /// f(tau) = exp(tau)
    Exponential,
    /// arbitrary expression in the single variable `tau`
    Custom { expr: Expr, dexpr: Expr },
}

impl ParamFn {
    pub fn custom(text: &str) -> Result<ParamFn, crate::error::ExprError> {
        let names = vec!["tau".to_string()];
        let expr = parse_expr(text, &names, &[])?;
        let dexpr = expr.diff(0);
        Ok(ParamFn::Custom { expr, dexpr })
    }

    /// Parse a CLI-style selector: `affine:c`, `exp`, or `expr:<text>`.
    pub fn parse_selector(s: &str) -> Result<ParamFn, String> {
        if s == "exp" {
            return Ok(ParamFn::Exponential);
        }
        if let Some(c) = s.strip_prefix("affine:") {
            return c
                .parse::<f64>()
                .map(ParamFn::Affine)
                .map_err(|e| format!("bad affine constant `{c}`: {e}"));
        }
        if let Some(t) = s.strip_prefix("expr:") {
            return ParamFn::custom(t).map_err(|e| e.to_string());
        }
        Err(format!(
            "unrecognized parameter function `{s}` (expected affine:c, exp or expr:...)"
        ))
    }

    pub fn describe(&self) -> String {
        match self {
            ParamFn::Affine(c) => format!("affine:{c}"),
            ParamFn::Exponential => "exp".to_string(),
            ParamFn::Custom { expr, .. } => {
                format!("expr:{}", expr.display(&["tau".to_string()]))
            }
        }
    }

    pub fn apply(&self, u: &Jet) -> Jet {
        match self {
            ParamFn::Affine(c) => u.add_scalar(-c),
            ParamFn::Exponential => u.exp(),
            ParamFn::Custom { expr, .. } => expr.eval(std::slice::from_ref(u), &Params::new()),
        }
    }

    pub fn apply_prime(&self, u: &Jet) -> Jet {
        match self {
            ParamFn::Affine(_) => Jet::constant(u.dim, u.order, 1.0),
            ParamFn::Exponential => u.exp(),
            ParamFn::Custom { dexpr, .. } => dexpr.eval(std::slice::from_ref(u), &Params::new()),
        }
    }
}

/// Which construction produced the candidate. The two kinds are kept
/// distinct; nothing auto-selects between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// omega = d(f(tau) k_flat) on an admissible manifold.
    Standard,
    /// omega = d(f(u) p k_flat) with p = 1/sqrt(-g(k+, k-)) for a null
    /// shear-free pair.
    Petrov,
}

/// A candidate Kahler structure: the data (g, k, t, tau, ell, f) plus the
/// derived 2-form, metric and region predicate.
#[derive(Clone)]
pub struct KahlerCandidate {
    pub g: Arc<dyn MetricEval>,
    pub k: Arc<dyn VectorEval>,
    /// The second distinguished field (k_minus in the Petrov variant).
    pub t: Arc<dyn VectorEval>,
    /// tau in the standard construction; u in the Petrov variant.
    pub tau: Arc<dyn ScalarEval>,
    pub ell: Option<Arc<dyn ScalarEval>>,
    pub f: ParamFn,
    pub orientation: i8,
    pub seeds: Option<[Arc<dyn VectorEval>; 2]>,
    pub kind: CandidateKind,
    /// Constant c in tau_c = tau - c (used by transfer hypotheses).
    pub tau_c: f64,
}

impl KahlerCandidate {
    #[allow(clippy::too_many_arguments)]
    pub fn standard(
        g: Arc<dyn MetricEval>,
        k: Arc<dyn VectorEval>,
        t: Arc<dyn VectorEval>,
        tau: Arc<dyn ScalarEval>,
        ell: Option<Arc<dyn ScalarEval>>,
        f: ParamFn,
        orientation: i8,
    ) -> Self {
        KahlerCandidate {
            g,
            k,
            t,
            tau,
            ell,
            f,
            orientation,
            seeds: None,
            kind: CandidateKind::Standard,
            tau_c: 0.0,
        }
    }

    pub fn petrov(
        g: Arc<dyn MetricEval>,
        k_plus: Arc<dyn VectorEval>,
        k_minus: Arc<dyn VectorEval>,
        u: Arc<dyn ScalarEval>,
        f: ParamFn,
        orientation: i8,
    ) -> Self {
        KahlerCandidate {
            g,
            k: k_plus,
            t: k_minus,
            tau: u,
            ell: None,
            f,
            orientation,
            seeds: None,
            kind: CandidateKind::Petrov,
            tau_c: 0.0,
        }
    }

    pub fn with_seeds(mut self, seeds: Option<[Arc<dyn VectorEval>; 2]>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn with_tau_c(mut self, c: f64) -> Self {
        self.tau_c = c;
        self
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }

    pub fn acs(&self) -> AcsField {
        AcsField::new(
            self.g.clone(),
            self.k.clone(),
            self.t.clone(),
            self.orientation,
        )
        .with_seeds(self.seeds.clone())
    }

    /// `1/sqrt(-g(k, t))` for the Petrov variant.
    fn p_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let gj = self.g.eval_jet(p, order)?;
        let kj = self.k.eval_jet(p, order)?;
        let tj = self.t.eval_jet(p, order)?;
        let gkt = gj.bilinear(&kj, &tj);
        if gkt.v >= 0.0 {
            return Err(GeomError::Undefined {
                quantity: "Petrov scale p".into(),
                point: p.to_vec(),
                reason: format!("g(k+, k-) = {} is not negative", gkt.v),
            });
        }
        Ok(gkt.neg().sqrt().recip())
    }

    /// The scalar multiplying k_flat in the 1-form: f(tau), or f(u) p.
    pub fn scale_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let tau_j = self.tau.eval_jet(p, order)?;
        let f = self.f.apply(&tau_j);
        match self.kind {
            CandidateKind::Standard => Ok(f),
            CandidateKind::Petrov => Ok(f.mul(&self.p_jet(p, order)?)),
        }
    }

    /// The symplectic 2-form as jets: omega_ij = d_i alpha_j - d_j alpha_i
    /// for alpha = scale * k_flat. Requires primitives at order + 1.
    pub fn omega_jet(&self, p: &[f64], order: usize) -> Result<JMat, GeomError> {
        let form = CandidateForm { cand: self };
        d_of_1form(&form, p, order)
    }

    /// omega(a, b) for explicit tangent vectors at p.
    pub fn omega_value(&self, p: &[f64], a: &[f64], b: &[f64]) -> Result<f64, GeomError> {
        let om = self.omega_jet(p, 0)?;
        let av = JVec::from_values(a, p.len(), 0);
        let bv = JVec::from_values(b, p.len(), 0);
        Ok(om.bilinear(&av, &bv).v)
    }

    /// Residual between omega and its decomposition
    /// f' dtau ^ k_flat + f d(k_flat) (standard kind only).
    pub fn omega_decomposition_residual(&self, p: &[f64]) -> Result<f64, GeomError> {
        if self.kind != CandidateKind::Standard {
            return Ok(0.0);
        }
        let om = self.omega_jet(p, 0)?;
        let d = p.len();
        let tau_j = self.tau.eval_jet(p, 1)?;
        let fp = self.f.apply_prime(&tau_j).v;
        let f = self.f.apply(&tau_j).v;
        let kb = FlatCovector {
            g: self.g.clone(),
            x: self.k.clone(),
        };
        let kbj = kb.eval_jet(p, 0)?;
        let dkb = d_of_1form(&kb, p, 0)?;
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let wedge = tau_j.d1[i] * kbj.e[j].v - tau_j.d1[j] * kbj.e[i].v;
                let expect = fp * wedge + f * dkb.at(i, j).v;
                m = m.max((om.at(i, j).v - expect).abs());
            }
        }
        Ok(m)
    }

    /// The induced metric as a reusable evaluator.
    pub fn metric(self: &Arc<Self>) -> Arc<KahlerMetric> {
        Arc::new(KahlerMetric { cand: self.clone() })
    }

    /// ell at p: the supplied field if present, else recovered as
    /// g(t, t) / d tau(t).
    pub fn ell_at(&self, p: &[f64]) -> Result<f64, GeomError> {
        if let Some(e) = &self.ell {
            return e.eval(p);
        }
        let (ell, _) = crate::jstruct::recover_ell(
            self.g.as_ref(),
            self.t.as_ref(),
            self.tau.as_ref(),
            p,
        )?;
        Ok(ell)
    }

    /// d(k_flat)(k, t) at p.
    fn dkb_kt(&self, p: &[f64]) -> Result<f64, GeomError> {
        let kb = FlatCovector {
            g: self.g.clone(),
            x: self.k.clone(),
        };
        let dkb = d_of_1form(&kb, p, 0)?;
        let kv = self.k.eval_jet(p, 0)?;
        let tv = self.t.eval_jet(p, 0)?;
        Ok(dkb.bilinear(&kv, &tv).v)
    }

    /// The positivity region sample. For the standard kind the two scalars
    /// are (f iota, f' G / ell - f dk_flat(k, t)); for the Petrov kind
    /// they are (iota, d_k(f(u) p)), both required negative.
    pub fn region(&self, p: &[f64]) -> Result<RegionSample, GeomError> {
        let frame = self.acs().frame(p, 1)?;
        let iota = twist(self.k.as_ref(), &frame)?;
        match self.kind {
            CandidateKind::Standard => {
                let tau_j = self.tau.eval_jet(p, 0)?;
                let f = self.f.apply(&tau_j).v;
                let fp = self.f.apply_prime(&tau_j).v;
                let ell = self.ell_at(p)?;
                let lhs1 = f * iota;
                let lhs2 = fp * frame.gram_det() / ell - f * self.dkb_kt(p)?;
                Ok(RegionSample {
                    iota,
                    lhs1,
                    lhs2,
                    in_region: lhs1 < 0.0 && lhs2 < 0.0,
                })
            }
            CandidateKind::Petrov => {
                let scale = self.scale_jet(p, 1)?;
                let kv = self.k.eval_jet(p, 0)?;
                let dk_scale: f64 = (0..p.len()).map(|i| kv.e[i].v * scale.d1[i]).sum();
                Ok(RegionSample {
                    iota,
                    lhs1: iota,
                    lhs2: dk_scale,
                    in_region: iota < 0.0 && dk_scale < 0.0,
                })
            }
        }
    }

    /// Specialized forms of the second region inequality together with the
    /// residual of the hypothesis under which each applies.
    pub fn region_specializations(&self, p: &[f64]) -> Result<Vec<SpecializedLhs2>, GeomError> {
        if self.kind != CandidateKind::Standard {
            return Ok(Vec::new());
        }
        let tau_j = self.tau.eval_jet(p, 0)?;
        let f = self.f.apply(&tau_j).v;
        let fp = self.f.apply_prime(&tau_j).v;
        let ell = self.ell_at(p)?;
        let frame = self.acs().frame(p, 1)?;
        let base = fp * frame.gram_det() / ell;
        let gj = self.g.eval_jet(p, 1)?;
        let kj = self.k.eval_jet(p, 1)?;
        let tj = self.t.eval_jet(p, 1)?;
        let gkk = gj.bilinear(&kj, &kj);
        let gkt = gj.bilinear(&kj, &tj).v;
        let dlen_k = euclid_norm(&(0..p.len()).map(|i| gkk.d1[i]).collect::<Vec<_>>());
        let pre = pregeodesic_factor(self.g.as_ref(), self.k.as_ref(), p, 1e-9)?;
        let killing = max_abs(&lie_derivative_metric(self.g.as_ref(), self.k.as_ref(), p)?);
        let d_t_gkk: f64 = (0..p.len()).map(|i| tj.e[i].v * gkk.d1[i]).sum();
        let mut out = vec![
            SpecializedLhs2 {
                name: "geodesic-constant-length".into(),
                hypothesis_residual: pre.geodesic_residual.max(dlen_k),
                value: base,
            },
            SpecializedLhs2 {
                name: "killing".into(),
                hypothesis_residual: killing,
                value: base + f * d_t_gkk,
            },
        ];
        if let Some(alpha) = pre.alpha {
            out.push(SpecializedLhs2 {
                name: "null-strictly-pre-geodesic".into(),
                hypothesis_residual: gkk.v.abs().max(pre.residual),
                value: base - f * alpha * gkt,
            });
        }
        Ok(out)
    }

    /// Values that check the block structure of g_K against the base data:
    /// [max |g_K(V, H)|, |g_K(k, t)|, |g_K(k, k) - g_K(t, t)|,
    ///  max |(g_K + f iota g)(x_i, x_j)| on the H frame].
    pub fn lemma_basic_residuals(self: &Arc<Self>, p: &[f64]) -> Result<[f64; 4], GeomError> {
        let gk = self.metric();
        let gkj = gk.eval_jet(p, 0)?;
        let frame = self.acs().frame(p, 1)?;
        let kj = self.k.eval_jet(p, 0)?;
        let tj = self.t.eval_jet(p, 0)?;
        let iota = twist(self.k.as_ref(), &frame)?;
        let scale = match self.kind {
            CandidateKind::Standard => self.f.apply(&self.tau.eval_jet(p, 0)?).v,
            CandidateKind::Petrov => self.scale_jet(p, 0)?.v,
        };
        let mut vh: f64 = 0.0;
        for v in [&kj, &tj] {
            for h in [&frame.x, &frame.y] {
                vh = vh.max(gkj.bilinear(v, h).v.abs());
            }
        }
        let kt = gkj.bilinear(&kj, &tj).v.abs();
        let kk_tt = (gkj.bilinear(&kj, &kj).v - gkj.bilinear(&tj, &tj).v).abs();
        let mut hpart: f64 = 0.0;
        for (a, b, gv) in [
            (&frame.x, &frame.x, 1.0),
            (&frame.x, &frame.y, 0.0),
            (&frame.y, &frame.y, 1.0),
        ] {
            hpart = hpart.max((gkj.bilinear(a, b).v + scale * iota * gv).abs());
        }
        Ok([vh, kt, kk_tt, hpart])
    }

    /// Preconditions of the Petrov variant at a point.
    pub fn petrov_preconditions(&self, p: &[f64]) -> Result<PetrovPreconditions, GeomError> {
        let frame = self.acs().frame(p, 1)?;
        let g = &frame.g;
        let kj = &frame.k;
        let tj = frame.t.as_ref().unwrap();
        let gkt = g.bilinear(kj, tj).v;
        if gkt >= 0.0 {
            return Err(GeomError::Undefined {
                quantity: "Petrov candidate".into(),
                point: p.to_vec(),
                reason: format!("g(k+, k-) = {gkt} is not negative"),
            });
        }
        let sk = shear_coefficients(self.k.as_ref(), &frame)?;
        let st = shear_coefficients(self.t.as_ref(), &frame)?;
        let p_jet = self.p_jet(p, 0)?;
        // g(p k+, p k-) must be -1
        let ktilde_residual = (p_jet.v * p_jet.v * gkt + 1.0).abs();
        // H-gradient of f(u)/p must vanish for J-invariance of omega
        let cand = self.clone();
        let ratio = PetrovRatio { cand };
        let ratio_h = h_gradient_residual(self.g.as_ref(), &ratio, &frame)?;
        Ok(PetrovPreconditions {
            k_null_residual: g.bilinear(kj, kj).v.abs(),
            t_null_residual: g.bilinear(tj, tj).v.abs(),
            k_shear_residual: euclid_norm(&[sk.0, sk.1]),
            t_shear_residual: euclid_norm(&[st.0, st.1]),
            g_kt: gkt,
            p_value: p_jet.v,
            ktilde_residual,
            ratio_h_gradient_residual: ratio_h,
        })
    }

    /// Full numerical verification at the given samples.
    pub fn verify(self: &Arc<Self>, samples: &[Vec<f64>]) -> Result<VerifyReport, GeomError> {
        let gk = self.metric();
        let acs = self.acs();
        let mut rows = Vec::with_capacity(samples.len());
        let mut maxima = VerifyMaxima::default();
        for p in samples {
            let region = self.region(p)?;
            if !region.in_region {
                rows.push(VerifyRow {
                    point: p.clone(),
                    in_region: false,
                    d_omega: f64::NAN,
                    j_compat: f64::NAN,
                    min_eig: f64::NAN,
                    nijenhuis: f64::NAN,
                    nabla_j: f64::NAN,
                    symmetry: f64::NAN,
                });
                maxima.outside += 1;
                continue;
            }
            let om1 = self.omega_jet(p, 1)?;
            let d_omega = d_of_2form_max(&om1);
            let j = acs.j_matrix(p, 1)?;
            let gkj = gk.eval_jet(p, 1)?;
            let jt = j.transpose();
            let pulled = jt.mul_mat(&gkj.mul_mat(&j));
            let j_compat = max_abs(&pulled.sub(&gkj).values());
            let vals = gkj.values();
            let min_eig = sym_eigenvalues(&vals)[0];
            let nij = crate::jstruct::nijenhuis_max(&acs, p)?;
            let nabla_j = nabla_j_residual(gk.as_ref(), &j, p)?;
            let symmetry = gk.symmetry_residual(p)?;
            maxima.d_omega = maxima.d_omega.max(d_omega);
            maxima.j_compat = maxima.j_compat.max(j_compat);
            maxima.min_eig = maxima.min_eig.min(min_eig);
            maxima.nijenhuis = maxima.nijenhuis.max(nij);
            maxima.nabla_j = maxima.nabla_j.max(nabla_j);
            maxima.symmetry = maxima.symmetry.max(symmetry);
            maxima.inside += 1;
            rows.push(VerifyRow {
                point: p.clone(),
                in_region: true,
                d_omega,
                j_compat,
                min_eig,
                nijenhuis: nij,
                nabla_j,
                symmetry,
            });
        }
        Ok(VerifyReport { rows, maxima })
    }
}

/// The 1-form alpha = scale * k_flat of a candidate.
struct CandidateForm<'a> {
    cand: &'a KahlerCandidate,
}

impl CovectorEval for CandidateForm<'_> {
    fn chart(&self) -> &Arc<Chart> {
        self.cand.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError> {
        let scale = self.cand.scale_jet(p, order)?;
        let g = self.cand.g.eval_jet(p, order)?;
        let k = self.cand.k.eval_jet(p, order)?;
        Ok(g.mul_vec(&k).scale(&scale))
    }
}

/// f(u)/p as a scalar field (its gradient must lie in V for the Petrov
/// variant's J-invariance).
struct PetrovRatio {
    cand: KahlerCandidate,
}

impl ScalarEval for PetrovRatio {
    fn chart(&self) -> &Arc<Chart> {
        self.cand.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let u = self.cand.tau.eval_jet(p, order)?;
        let f = self.cand.f.apply(&u);
        Ok(f.div(&self.cand.p_jet(p, order)?))
    }
}

#[derive(Debug, Clone)]
pub struct RegionSample {
    pub iota: f64,
    pub lhs1: f64,
    pub lhs2: f64,
    pub in_region: bool,
}

#[derive(Debug, Clone)]
pub struct SpecializedLhs2 {
    pub name: String,
    pub hypothesis_residual: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct PetrovPreconditions {
    pub k_null_residual: f64,
    pub t_null_residual: f64,
    pub k_shear_residual: f64,
    pub t_shear_residual: f64,
    pub g_kt: f64,
    pub p_value: f64,
    pub ktilde_residual: f64,
    pub ratio_h_gradient_residual: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub point: Vec<f64>,
    pub in_region: bool,
    pub d_omega: f64,
    pub j_compat: f64,
    pub min_eig: f64,
    pub nijenhuis: f64,
    pub nabla_j: f64,
    pub symmetry: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyMaxima {
    pub d_omega: f64,
    pub j_compat: f64,
    pub min_eig: f64,
    pub nijenhuis: f64,
    pub nabla_j: f64,
    pub symmetry: f64,
    pub inside: usize,
    pub outside: usize,
}

impl Default for VerifyMaxima {
    fn default() -> Self {
        VerifyMaxima {
            d_omega: 0.0,
            j_compat: 0.0,
            min_eig: f64::INFINITY,
            nijenhuis: 0.0,
            nabla_j: 0.0,
            symmetry: 0.0,
            inside: 0,
            outside: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub maxima: VerifyMaxima,
}

/// The induced Kahler metric g_K = omega(., J.) as a metric evaluator.
/// Jets of order n consume jets of order n + 1 of the primitives, so the
/// generic curvature machinery applies to it unchanged.
pub struct KahlerMetric {
    pub cand: Arc<KahlerCandidate>,
}

impl KahlerMetric {
    /// |g_K - g_K^T| before symmetrization.
    pub fn symmetry_residual(&self, p: &[f64]) -> Result<f64, GeomError> {
        let raw = self.raw_eval(p, 0)?;
        let mut m: f64 = 0.0;
        for i in 0..raw.d {
            for j in 0..raw.d {
                m = m.max((raw.at(i, j).v - raw.at(j, i).v).abs());
            }
        }
        Ok(m)
    }

    fn raw_eval(&self, p: &[f64], order: usize) -> Result<JMat, GeomError> {
        let om = self.cand.omega_jet(p, order)?;
        let j = self.cand.acs().j_matrix(p, order)?;
        Ok(om.mul_mat(&j))
    }
}

impl MetricEval for KahlerMetric {
    fn chart(&self) -> &Arc<Chart> {
        self.cand.g.chart()
    }
    fn signature(&self) -> Signature {
        Signature::Riemannian
    }
    fn max_order(&self) -> usize {
        self.cand.g.max_order().saturating_sub(1)
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JMat, GeomError> {
        if order > self.max_order() {
            return Err(GeomError::OrderTooHigh(order));
        }
        Ok(self.raw_eval(p, order)?.symmetrize())
    }
}

/// Covariant constancy of J in the Levi-Civita connection of g_K:
/// max |d_a J + Gamma_K J - J Gamma_K|.
fn nabla_j_residual(gk: &dyn MetricEval, j: &JMat, p: &[f64]) -> Result<f64, GeomError> {
    let gamma = christoffel_jets(gk, p, 0)?;
    let d = p.len();
    let mut m: f64 = 0.0;
    for a in 0..d {
        for i in 0..d {
            for jj in 0..d {
                let mut v = j.at(i, jj).d1[a];
                for w in 0..d {
                    v += gamma[i][a][w].v * j.at(w, jj).v - gamma[w][a][jj].v * j.at(i, w).v;
                }
                m = m.max(v.abs());
            }
        }
    }
    Ok(m)
}

// ------------------------------------------------------- transfer results

#[derive(Debug, Clone)]
pub struct TransferGeodesic {
    pub skipped: Option<String>,
    pub nk_k_residual: f64,
    pub nt_t_residual: f64,
    pub dgkk_residual: f64,
}

/// When k and t are g-geodesic of constant length, g(k, t) is constant,
/// ell = 1 and f = tau - c, both fields stay geodesic of constant length
/// for g_K.
pub fn transfer_geodesic(
    cand: &Arc<KahlerCandidate>,
    p: &[f64],
    tol: f64,
) -> Result<TransferGeodesic, GeomError> {
    let hyp_tol = tol.max(1e-8);
    let mut why = Vec::new();
    if !matches!(cand.f, ParamFn::Affine(_)) {
        why.push("f is not affine".to_string());
    }
    let gj = cand.g.eval_jet(p, 1)?;
    let kj = cand.k.eval_jet(p, 1)?;
    let tj = cand.t.eval_jet(p, 1)?;
    for (name, x) in [("k", &cand.k), ("t", &cand.t)] {
        let pre = pregeodesic_factor(cand.g.as_ref(), x.as_ref(), p, hyp_tol)?;
        if pre.geodesic_residual > hyp_tol {
            why.push(format!("{name} is not geodesic"));
        }
    }
    for (name, a, b) in [("g(k,k)", &kj, &kj), ("g(t,t)", &tj, &tj), ("g(k,t)", &kj, &tj)] {
        let s = gj.bilinear(a, b);
        let dn = euclid_norm(&(0..p.len()).map(|i| s.d1[i]).collect::<Vec<_>>());
        if dn > hyp_tol {
            why.push(format!("{name} is not constant"));
        }
    }
    let ell = cand.ell_at(p)?;
    if (ell - 1.0).abs() > hyp_tol {
        why.push(format!("ell = {ell} differs from 1"));
    }
    if !why.is_empty() {
        return Ok(TransferGeodesic {
            skipped: Some(why.join("; ")),
            nk_k_residual: f64::NAN,
            nt_t_residual: f64::NAN,
            dgkk_residual: f64::NAN,
        });
    }
    let gk = cand.metric();
    let nk = cov_deriv(gk.as_ref(), cand.k.as_ref(), cand.k.as_ref(), p)?;
    let nt = cov_deriv(gk.as_ref(), cand.t.as_ref(), cand.t.as_ref(), p)?;
    let gkk = GramScalar {
        g: gk.clone() as Arc<dyn MetricEval>,
        x: cand.k.clone(),
        y: cand.k.clone(),
    };
    let s = gkk.eval_jet(p, 1)?;
    let dgkk = euclid_norm(&(0..p.len()).map(|i| s.d1[i]).collect::<Vec<_>>());
    Ok(TransferGeodesic {
        skipped: None,
        nk_k_residual: euclid_norm(&nk),
        nt_t_residual: euclid_norm(&nt),
        dgkk_residual: dgkk,
    })
}

#[derive(Debug, Clone)]
pub struct TransferKilling {
    pub skipped: Option<String>,
    pub lie_gk_residual: f64,
}

/// The twist of k as a differentiable scalar (used for hypothesis checks
/// that iota is a function of tau).
pub struct TwistScalar {
    pub cand: Arc<KahlerCandidate>,
}

impl ScalarEval for TwistScalar {
    fn chart(&self) -> &Arc<Chart> {
        self.cand.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let frame = self.cand.acs().frame(p, order + 1)?;
        twist_jet(self.cand.k.as_ref(), &frame, order)
    }
}

/// When k is g-Killing, ell and iota are functions of tau, g(k, t) = 0 and
/// [k, t] = 0, the field k is also Killing for g_K.
pub fn transfer_killing(
    cand: &Arc<KahlerCandidate>,
    p: &[f64],
    tol: f64,
) -> Result<TransferKilling, GeomError> {
    let hyp_tol = tol.max(1e-8);
    let mut why = Vec::new();
    let killing = max_abs(&lie_derivative_metric(cand.g.as_ref(), cand.k.as_ref(), p)?);
    if killing > hyp_tol {
        why.push(format!("k is not g-Killing (residual {killing:.2e})"));
    }
    let gj = cand.g.eval_jet(p, 0)?;
    let kj = cand.k.eval_jet(p, 0)?;
    let tj = cand.t.eval_jet(p, 0)?;
    if gj.bilinear(&kj, &tj).v.abs() > hyp_tol {
        why.push("g(k, t) is not zero".into());
    }
    let br = lie_bracket_jet(cand.k.as_ref(), cand.t.as_ref(), p, 0)?;
    if vec_max_abs(&br.values()) > hyp_tol {
        why.push("[k, t] is not zero".into());
    }
    let frame = cand.acs().frame(p, 2)?;
    let iota_field = TwistScalar { cand: cand.clone() };
    let iota_h = h_gradient_residual(cand.g.as_ref(), &iota_field, &frame)?;
    if iota_h > hyp_tol {
        why.push(format!("iota is not a function of tau (H-gradient {iota_h:.2e})"));
    }
    if let Some(ell) = &cand.ell {
        let ell_h = h_gradient_residual(cand.g.as_ref(), ell.as_ref(), &frame)?;
        if ell_h > hyp_tol {
            why.push("ell is not a function of tau".into());
        }
    }
    if !why.is_empty() {
        return Ok(TransferKilling {
            skipped: Some(why.join("; ")),
            lie_gk_residual: f64::NAN,
        });
    }
    let gk = cand.metric();
    let lie = lie_derivative_metric(gk.as_ref(), cand.k.as_ref(), p)?;
    Ok(TransferKilling {
        skipped: None,
        lie_gk_residual: max_abs(&lie),
    })
}

#[derive(Debug, Clone)]
pub struct ShearTransfer {
    pub sigma_k_g: (f64, f64),
    pub sigma_k_gk: (f64, f64),
    pub sigma_t_g: (f64, f64),
    pub sigma_t_gk: (f64, f64),
    pub residual: f64,
}

/// The shears of k and t agree between g and g_K when computed in the
/// g_K-orthonormal frame (x/s, y/s) with s = sqrt(-f iota).
pub fn shear_transfer(cand: &Arc<KahlerCandidate>, p: &[f64]) -> Result<ShearTransfer, GeomError> {
    let frame = cand.acs().frame(p, 2)?;
    let sk = shear_coefficients(cand.k.as_ref(), &frame)?;
    let st = shear_coefficients(cand.t.as_ref(), &frame)?;

    let gk = cand.metric();
    let iota = twist_jet(cand.k.as_ref(), &frame, 1)?;
    let scale = match cand.kind {
        CandidateKind::Standard => cand.f.apply(&cand.tau.eval_jet(p, 1)?),
        CandidateKind::Petrov => cand.scale_jet(p, 1)?,
    };
    let s = scale.mul(&iota).neg().sqrt();
    if !(s.v > 0.0) {
        return Err(GeomError::Undefined {
            quantity: "shear transfer".into(),
            point: p.to_vec(),
            reason: "the point lies outside the Kahler region".into(),
        });
    }
    let sinv = s.recip();
    let gkj = gk.eval_jet(p, 1)?;
    let gamma_k = christoffel_jets(gk.as_ref(), p, 0)?;
    let frame_k = SplitFrame {
        point: p.to_vec(),
        order: 1,
        k: frame.k.clone(),
        t: frame.t.clone(),
        x: frame.x.scale(&sinv),
        y: frame.y.scale(&sinv),
        orientation_sign: frame.orientation_sign,
        pivots: frame.pivots,
        g: gkj,
        gamma: gamma_k,
        gram: frame.gram.clone(),
    };
    let sk_k = shear_coefficients(cand.k.as_ref(), &frame_k)?;
    let st_k = shear_coefficients(cand.t.as_ref(), &frame_k)?;
    let residual = (sk.0 - sk_k.0)
        .abs()
        .max((sk.1 - sk_k.1).abs())
        .max((st.0 - st_k.0).abs())
        .max((st.1 - st_k.1).abs());
    Ok(ShearTransfer {
        sigma_k_g: sk,
        sigma_k_gk: sk_k,
        sigma_t_g: st,
        sigma_t_gk: st_k,
        residual,
    })
}

#[derive(Debug)]
pub struct RepeatedAdmissibility {
    pub skipped: Option<String>,
    pub report: Option<AdmissibilityReport>,
    pub ell_k: Option<f64>,
    /// Region data of the second iterate, when its metric is evaluable.
    pub second_region: Option<RegionSample>,
}

/// Scalar g([k, t], k).
struct BracketGram {
    g: Arc<dyn MetricEval>,
    k: Arc<dyn VectorEval>,
    t: Arc<dyn VectorEval>,
}

impl ScalarEval for BracketGram {
    fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let br = lie_bracket_jet(self.k.as_ref(), self.t.as_ref(), p, order)?;
        let gj = self.g.eval_jet(p, order)?;
        let kj = self.k.eval_jet(p, order)?;
        Ok(gj.bilinear(&br, &kj))
    }
}

/// Run the admissibility suite against g_K itself; under the stated
/// hypotheses the construction can be iterated.
pub fn repeated_admissibility(
    cand: &Arc<KahlerCandidate>,
    p: &[f64],
    tol: f64,
) -> Result<RepeatedAdmissibility, GeomError> {
    let hyp_tol = tol.max(1e-8);
    let mut why = Vec::new();
    let gj = cand.g.eval_jet(p, 0)?;
    let kj = cand.k.eval_jet(p, 0)?;
    let tj = cand.t.eval_jet(p, 0)?;
    if gj.bilinear(&kj, &tj).v.abs() > hyp_tol {
        why.push("g(k, t) is not zero".to_string());
    }
    let frame = cand.acs().frame(p, 2)?;
    let gtt = GramScalar {
        g: cand.g.clone(),
        x: cand.t.clone(),
        y: cand.t.clone(),
    };
    let br = BracketGram {
        g: cand.g.clone(),
        k: cand.k.clone(),
        t: cand.t.clone(),
    };
    for (name, s) in [
        ("g(t,t)", &gtt as &dyn ScalarEval),
        ("g([k,t],k)", &br as &dyn ScalarEval),
    ] {
        let r = h_gradient_residual(cand.g.as_ref(), s, &frame)?;
        if r > hyp_tol {
            why.push(format!("{name} is not a function of tau"));
        }
    }
    if let Some(ell) = &cand.ell {
        let r = h_gradient_residual(cand.g.as_ref(), ell.as_ref(), &frame)?;
        if r > hyp_tol {
            why.push("ell is not a function of tau".into());
        }
    }
    if !why.is_empty() {
        return Ok(RepeatedAdmissibility {
            skipped: Some(why.join("; ")),
            report: None,
            ell_k: None,
            second_region: None,
        });
    }
    let gk = cand.metric() as Arc<dyn MetricEval>;
    let acs_k = AcsField::new(gk.clone(), cand.k.clone(), cand.t.clone(), cand.orientation)
        .with_seeds(cand.seeds.clone());
    let report = check_admissible(&acs_k, cand.tau.as_ref(), None, p, tol)?;
    let ell_k = report.ell;
    let second = KahlerCandidate {
        g: gk,
        k: cand.k.clone(),
        t: cand.t.clone(),
        tau: cand.tau.clone(),
        ell: None,
        f: cand.f.clone(),
        orientation: cand.orientation,
        seeds: cand.seeds.clone(),
        kind: CandidateKind::Standard,
        tau_c: cand.tau_c,
    };
    let second_region = second.region(p).ok();
    Ok(RepeatedAdmissibility {
        skipped: None,
        report: Some(report),
        ell_k,
        second_region,
    })
}

// ------------------------------------------------------------- variations

/// The biconformal change (g|V, beta^2 g|H) as a metric evaluator.
pub struct BiconformalMetric {
    pub g: Arc<dyn MetricEval>,
    pub k: Arc<dyn VectorEval>,
    pub t: Arc<dyn VectorEval>,
    pub beta: Arc<dyn ScalarEval>,
}

impl MetricEval for BiconformalMetric {
    fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }
    fn signature(&self) -> Signature {
        self.g.signature()
    }
    fn max_order(&self) -> usize {
        self.g.max_order()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JMat, GeomError> {
        let g = self.g.eval_jet(p, order)?;
        let kj = self.k.eval_jet(p, order)?;
        let tj = self.t.eval_jet(p, order)?;
        let d = g.d;
        let mut gram = JMat::zeros(2, d, order);
        gram.set(0, 0, g.bilinear(&kj, &kj));
        gram.set(0, 1, g.bilinear(&kj, &tj));
        gram.set(1, 0, g.bilinear(&tj, &kj));
        gram.set(1, 1, g.bilinear(&tj, &tj));
        let gram_inv = gram.inverse(1e-13).ok_or(GeomError::DegenerateV {
            point: p.to_vec(),
            det: 0.0,
        })?;
        let beta = self.beta.eval_jet(p, order)?;
        if beta.v.abs() < 1e-12 {
            return Err(GeomError::Undefined {
                quantity: "biconformal change".into(),
                point: p.to_vec(),
                reason: "beta vanishes".into(),
            });
        }
        let b2m1 = beta.mul(&beta).add_scalar(-1.0);
        // H-projection of the basis vectors
        let mut out = g.clone();
        let gk = g.mul_vec(&kj);
        let gt = g.mul_vec(&tj);
        let mut hproj = Vec::with_capacity(d);
        for i in 0..d {
            let mut e = JVec::zeros(d, d, order);
            e.e[i] = Jet::constant(d, order, 1.0);
            let mut rhs = JVec::zeros(2, d, order);
            rhs.e[0] = gk.e[i];
            rhs.e[1] = gt.e[i];
            let c = gram_inv.mul_vec(&rhs);
            let h = e.sub(&kj.scale(&c.e[0])).sub(&tj.scale(&c.e[1]));
            hproj.push(h);
        }
        for i in 0..d {
            for j in 0..d {
                let hh = g.bilinear(&hproj[i], &hproj[j]);
                out.set(i, j, g.at(i, j).add(&b2m1.mul(&hh)));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct BiconformalResult {
    pub gk_residual: f64,
    pub iota_g: f64,
    pub iota_biconformal: f64,
    /// |iota~ - iota / beta^2|
    pub iota_scaling_residual: f64,
}

/// The biconformal change leaves the induced metric pointwise fixed and
/// rescales the twist by 1/beta^2.
pub fn variation_biconformal(
    cand: &Arc<KahlerCandidate>,
    beta: Arc<dyn ScalarEval>,
    p: &[f64],
) -> Result<BiconformalResult, GeomError> {
    let b = beta.eval(p)?;
    if b.abs() < 1e-12 {
        return Err(GeomError::Undefined {
            quantity: "biconformal variation".into(),
            point: p.to_vec(),
            reason: "beta vanishes".into(),
        });
    }
    let gv: Arc<dyn MetricEval> = Arc::new(BiconformalMetric {
        g: cand.g.clone(),
        k: cand.k.clone(),
        t: cand.t.clone(),
        beta,
    });
    let varied = Arc::new(KahlerCandidate {
        g: gv.clone(),
        k: cand.k.clone(),
        t: cand.t.clone(),
        tau: cand.tau.clone(),
        ell: cand.ell.clone(),
        f: cand.f.clone(),
        orientation: cand.orientation,
        seeds: cand.seeds.clone(),
        kind: cand.kind,
        tau_c: cand.tau_c,
    });
    let gk0 = cand.metric().eval_jet(p, 0)?;
    let gk1 = varied.metric().eval_jet(p, 0)?;
    let gk_residual = max_abs(&gk0.sub(&gk1).values());
    let frame0 = cand.acs().frame(p, 1)?;
    let frame1 = varied.acs().frame(p, 1)?;
    let iota0 = twist(cand.k.as_ref(), &frame0)?;
    let iota1 = twist(cand.k.as_ref(), &frame1)?;
    Ok(BiconformalResult {
        gk_residual,
        iota_g: iota0,
        iota_biconformal: iota1,
        iota_scaling_residual: (iota1 - iota0 / (b * b)).abs(),
    })
}

/// g + eps dtau^2 as a metric evaluator.
pub struct VerticalVariationMetric {
    pub g: Arc<dyn MetricEval>,
    pub tau: Arc<dyn ScalarEval>,
    pub eps: f64,
}

impl MetricEval for VerticalVariationMetric {
    fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }
    fn signature(&self) -> Signature {
        self.g.signature()
    }
    fn max_order(&self) -> usize {
        self.g.max_order()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JMat, GeomError> {
        let g = self.g.eval_jet(p, order)?;
        let tau = self.tau.eval_jet(p, order + 1)?;
        let d = g.d;
        let mut out = g.clone();
        for i in 0..d {
            let dti = tau.shift(i);
            for j in 0..d {
                let dtj = tau.shift(j);
                out.set(i, j, g.at(i, j).add(&dti.mul(&dtj).scale(self.eps)));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct VerticalResult {
    pub skipped: Option<String>,
    pub gk_residual: f64,
    pub omega_residual: f64,
    pub iota_residual: f64,
    /// |G_bar - G (1 + eps dtau(t))|
    pub gram_det_residual: f64,
}

/// The vertical variation g -> g + eps dtau^2 fixes omega, the twist, and
/// the induced metric; it requires the geodesic-transfer hypotheses and a
/// small enough eps to preserve the signature.
pub fn variation_vertical(
    cand: &Arc<KahlerCandidate>,
    eps: f64,
    p: &[f64],
    tol: f64,
) -> Result<VerticalResult, GeomError> {
    let geo = transfer_geodesic(cand, p, tol)?;
    if let Some(why) = geo.skipped {
        return Ok(VerticalResult {
            skipped: Some(why),
            gk_residual: f64::NAN,
            omega_residual: f64::NAN,
            iota_residual: f64::NAN,
            gram_det_residual: f64::NAN,
        });
    }
    let gv: Arc<dyn MetricEval> = Arc::new(VerticalVariationMetric {
        g: cand.g.clone(),
        tau: cand.tau.clone(),
        eps,
    });
    gv.check_signature_at(p)?;
    let varied = Arc::new(KahlerCandidate {
        g: gv.clone(),
        k: cand.k.clone(),
        t: cand.t.clone(),
        tau: cand.tau.clone(),
        ell: None,
        f: cand.f.clone(),
        orientation: cand.orientation,
        seeds: cand.seeds.clone(),
        kind: cand.kind,
        tau_c: cand.tau_c,
    });
    let gk0 = cand.metric().eval_jet(p, 0)?;
    let gk1 = varied.metric().eval_jet(p, 0)?;
    let om0 = cand.omega_jet(p, 0)?;
    let om1 = varied.omega_jet(p, 0)?;
    let frame0 = cand.acs().frame(p, 1)?;
    let frame1 = varied.acs().frame(p, 1)?;
    let iota0 = twist(cand.k.as_ref(), &frame0)?;
    let iota1 = twist(cand.k.as_ref(), &frame1)?;
    // G_bar = G (1 + eps dtau(t))
    let tauj = cand.tau.eval_jet(p, 1)?;
    let tj = cand.t.eval_jet(p, 0)?;
    let dtau_t: f64 = (0..p.len()).map(|i| tj.e[i].v * tauj.d1[i]).sum();
    let expected = frame0.gram_det() * (1.0 + eps * dtau_t);
    Ok(VerticalResult {
        skipped: None,
        gk_residual: max_abs(&gk0.sub(&gk1).values()),
        omega_residual: max_abs(&om0.sub(&om1).values()),
        iota_residual: (iota1 - iota0).abs(),
        gram_det_residual: (frame1.gram_det() - expected).abs(),
    })
}

#[derive(Debug, Clone)]
pub struct ConformalInvariance {
    pub iota_g: f64,
    pub iota_conformal: f64,
    pub twist_function_residual: f64,
    pub shear_invariant_residual: f64,
    pub sigma_residual: f64,
}

/// A full conformal change g -> beta^2 g preserves the twist and the shear
/// of X relative to the splitting (frames rebuilt per metric).
pub fn conformal_invariance(
    g: Arc<dyn MetricEval>,
    k: Arc<dyn VectorEval>,
    t: Arc<dyn VectorEval>,
    x_field: &dyn VectorEval,
    beta: Arc<dyn ScalarEval>,
    orientation: i8,
    seeds: Option<[Arc<dyn VectorEval>; 2]>,
    p: &[f64],
) -> Result<ConformalInvariance, GeomError> {
    let acs0 = AcsField::new(g.clone(), k.clone(), t.clone(), orientation)
        .with_seeds(seeds.clone());
    let ghat: Arc<dyn MetricEval> = Arc::new(crate::fields::ConformalMetric { g, beta });
    let acs1 = AcsField::new(ghat, k, t, orientation).with_seeds(seeds);
    let f0 = acs0.frame(p, 1)?;
    let f1 = acs1.frame(p, 1)?;
    let i0 = twist(x_field, &f0)?;
    let i1 = twist(x_field, &f1)?;
    let s0 = shear_coefficients(x_field, &f0)?;
    let s1 = shear_coefficients(x_field, &f1)?;
    let inv0 = s0.0 * s0.0 + s0.1 * s0.1;
    let inv1 = s1.0 * s1.0 + s1.1 * s1.1;
    Ok(ConformalInvariance {
        iota_g: i0,
        iota_conformal: i1,
        twist_function_residual: (i0.abs() - i1.abs()).abs(),
        shear_invariant_residual: (inv0 - inv1).abs(),
        sigma_residual: (s0.0 - s1.0).abs().max((s0.1 - s1.1).abs()),
    })
}
