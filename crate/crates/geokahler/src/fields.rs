//! Scalar, vector, covector and metric fields over a chart, plus the
//! evaluation traits that let derived objects (e.g. an induced Kahler
//! metric) be consumed by the same tensor calculus as closed-form fields.

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::GeomError;
use crate::expr::{Expr, Params};
use crate::jet::Jet;
use crate::linalg::{eigenvalue_signs, JMat, JVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    pub fn name(&self) -> &'static str {
        match self {
            Signature::Riemannian => "riemannian",
            Signature::Lorentzian => "lorentzian",
        }
    }

    /// Expected eigenvalue signs, sorted ascending.
    fn expected_signs(&self, dim: usize) -> Vec<i8> {
        match self {
            Signature::Riemannian => vec![1; dim],
            Signature::Lorentzian => {
                let mut v = vec![1; dim];
                v[0] = -1;
                v
            }
        }
    }
}

/// Promote a point to jet-valued coordinates with unit seeds.
pub fn seed_point(p: &[f64], order: usize) -> Vec<Jet> {
    let dim = p.len();
    p.iter()
        .enumerate()
        .map(|(i, &x)| Jet::variable(dim, order, x, i))
        .collect()
}

fn check_point(chart: &Chart, p: &[f64], params: &Params, order: usize) -> Result<(), GeomError> {
    Jet::check_order(order)?;
    if !chart.contains(p, params) {
        return Err(GeomError::DomainViolation {
            chart: chart.name.clone(),
            point: p.to_vec(),
        });
    }
    Ok(())
}

// ------------------------------------------------------------------ traits

pub trait ScalarEval: Send + Sync {
    fn chart(&self) -> &Arc<Chart>;
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError>;
    fn eval(&self, p: &[f64]) -> Result<f64, GeomError> {
        Ok(self.eval_jet(p, 0)?.v)
    }
}

pub trait VectorEval: Send + Sync {
    fn chart(&self) -> &Arc<Chart>;
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError>;
    fn eval(&self, p: &[f64]) -> Result<Vec<f64>, GeomError> {
        Ok(self.eval_jet(p, 0)?.values())
    }
}

pub trait CovectorEval: Send + Sync {
    fn chart(&self) -> &Arc<Chart>;
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError>;
}

pub trait MetricEval: Send + Sync {
    fn chart(&self) -> &Arc<Chart>;
    fn signature(&self) -> Signature;
    /// Highest jet order this metric can provide.
    fn max_order(&self) -> usize {
        3
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JMat, GeomError>;

    fn eval(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, GeomError> {
        Ok(self.eval_jet(p, 0)?.values())
    }

    /// Verify nonsingularity and the declared signature at a point.
    fn check_signature_at(&self, p: &[f64]) -> Result<(), GeomError> {
        let vals = self.eval(p)?;
        let signs = eigenvalue_signs(&vals, 1e-12);
        if signs.iter().any(|s| *s == 0) {
            return Err(GeomError::SingularMetric {
                point: p.to_vec(),
                det: crate::linalg::det_values(&vals),
            });
        }
        let mut sorted = signs.clone();
        sorted.sort();
        if sorted != self.signature().expected_signs(vals.len()) {
            return Err(GeomError::BadSignature {
                expected: self.signature().name().to_string(),
                point: p.to_vec(),
                signs,
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------- closed forms

/// Scalar quantity given by a closed-form expression.
#[derive(Clone)]
pub struct ScalarField {
    pub chart: Arc<Chart>,
    pub params: Arc<Params>,
    pub expr: Expr,
}

impl ScalarField {
    pub fn new(chart: &Arc<Chart>, params: &Arc<Params>, text: &str) -> Result<Self, GeomError> {
        Ok(ScalarField {
            chart: chart.clone(),
            params: params.clone(),
            expr: chart.parse(text)?,
        })
    }

    pub fn from_expr(chart: &Arc<Chart>, params: &Arc<Params>, expr: Expr) -> Self {
        ScalarField {
            chart: chart.clone(),
            params: params.clone(),
            expr,
        }
    }
}

impl ScalarEval for ScalarField {
    fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        check_point(&self.chart, p, &self.params, order)?;
        Ok(self.expr.eval(&seed_point(p, order), &self.params))
    }
}

/// Vector field with one expression per chart coordinate.
#[derive(Clone)]
pub struct VectorField {
    pub chart: Arc<Chart>,
    pub params: Arc<Params>,
    pub comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, params: &Arc<Params>, comps: &[&str]) -> Result<Self, GeomError> {
        assert_eq!(comps.len(), chart.dim());
        let mut parsed = Vec::with_capacity(comps.len());
        for c in comps {
            parsed.push(chart.parse(c)?);
        }
        Ok(VectorField {
            chart: chart.clone(),
            params: params.clone(),
            comps: parsed,
        })
    }
}

impl VectorEval for VectorField {
    fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError> {
        check_point(&self.chart, p, &self.params, order)?;
        let coords = seed_point(p, order);
        Ok(JVec {
            d: self.comps.len(),
            e: self
                .comps
                .iter()
                .map(|c| c.eval(&coords, &self.params))
                .collect(),
        })
    }
}

/// Symmetric metric field with a declared signature.
#[derive(Clone)]
pub struct MetricField {
    pub chart: Arc<Chart>,
    pub params: Arc<Params>,
    pub comps: Vec<Vec<Expr>>,
    pub sig: Signature,
}

impl MetricField {
    pub fn builder(chart: &Arc<Chart>, params: &Arc<Params>, sig: Signature) -> MetricBuilder {
        let d = chart.dim();
        MetricBuilder {
            chart: chart.clone(),
            params: params.clone(),
            comps: vec![vec![Expr::Num(0.0); d]; d],
            sig,
        }
    }
}

pub struct MetricBuilder {
    chart: Arc<Chart>,
    params: Arc<Params>,
    comps: Vec<Vec<Expr>>,
    sig: Signature,
}

impl MetricBuilder {
    /// Set g_ij (and g_ji) from expression text. Indices refer to the
    /// chart coordinate order.
    pub fn set(mut self, i: usize, j: usize, text: &str) -> Result<Self, GeomError> {
        let e = self.chart.parse(text)?;
        self.comps[i][j] = e.clone();
        if i != j {
            self.comps[j][i] = e;
        }
        Ok(self)
    }

    pub fn build(self) -> Arc<MetricField> {
        Arc::new(MetricField {
            chart: self.chart,
            params: self.params,
            comps: self.comps,
            sig: self.sig,
        })
    }
}

impl MetricEval for MetricField {
    fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }
    fn signature(&self) -> Signature {
        self.sig
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JMat, GeomError> {
        check_point(&self.chart, p, &self.params, order)?;
        let coords = seed_point(p, order);
        let d = self.chart.dim();
        let mut m = JMat::zeros(d, d, order);
        for i in 0..d {
            for j in i..d {
                let v = self.comps[i][j].eval(&coords, &self.params);
                m.set(i, j, v);
                if i != j {
                    m.set(j, i, v);
                }
            }
        }
        Ok(m)
    }
}

// --------------------------------------------------------------- derived

/// g(X, .) as a covector field.
pub struct FlatCovector {
    pub g: Arc<dyn MetricEval>,
    pub x: Arc<dyn VectorEval>,
}

impl CovectorEval for FlatCovector {
    fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError> {
        let g = self.g.eval_jet(p, order)?;
        let x = self.x.eval_jet(p, order)?;
        Ok(g.mul_vec(&x))
    }
}

/// Covector scaled by a scalar field: s * alpha.
pub struct ScaledCovector {
    pub s: Arc<dyn ScalarEval>,
    pub alpha: Arc<dyn CovectorEval>,
}

impl CovectorEval for ScaledCovector {
    fn chart(&self) -> &Arc<Chart> {
        self.alpha.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError> {
        let s = self.s.eval_jet(p, order)?;
        Ok(self.alpha.eval_jet(p, order)?.scale(&s))
    }
}

/// Vector field scaled by a scalar field: s * X.
pub struct ScaledVector {
    pub s: Arc<dyn ScalarEval>,
    pub x: Arc<dyn VectorEval>,
}

impl VectorEval for ScaledVector {
    fn chart(&self) -> &Arc<Chart> {
        self.x.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError> {
        let s = self.s.eval_jet(p, order)?;
        Ok(self.x.eval_jet(p, order)?.scale(&s))
    }
}

/// The scalar field g(X, Y).
pub struct GramScalar {
    pub g: Arc<dyn MetricEval>,
    pub x: Arc<dyn VectorEval>,
    pub y: Arc<dyn VectorEval>,
}

impl ScalarEval for GramScalar {
    fn chart(&self) -> &Arc<Chart> {
        self.g.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        let g = self.g.eval_jet(p, order)?;
        let x = self.x.eval_jet(p, order)?;
        let y = self.y.eval_jet(p, order)?;
        Ok(g.bilinear(&x, &y))
    }
}

/// Ratio of two scalar fields.
pub struct RatioScalar {
    pub num: Arc<dyn ScalarEval>,
    pub den: Arc<dyn ScalarEval>,
}

impl ScalarEval for RatioScalar {
    fn chart(&self) -> &Arc<Chart> {
        self.num.chart()
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<Jet, GeomError> {
        Ok(self
            .num
            .eval_jet(p, order)?
            .div(&self.den.eval_jet(p, order)?))
    }
}

/// A coordinate basis vector as a vector field.
pub struct BasisVector {
    pub chart: Arc<Chart>,
    pub index: usize,
}

impl VectorEval for BasisVector {
    fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }
    fn eval_jet(&self, p: &[f64], order: usize) -> Result<JVec, GeomError> {
        let d = self.chart.dim();
        let mut v = JVec::zeros(d, p.len(), order);
        v.e[self.index] = Jet::constant(p.len(), order, 1.0);
        Ok(v)
    }
}

/// Conformally scaled metric: beta^2 g.
pub struct ConformalMetric {
    pub g: Arc<dyn MetricEval>,
    pub beta: Arc<dyn ScalarEval>,
}

impl MetricEval for ConformalMetric {
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
        let b = self.beta.eval_jet(p, order)?;
        let b2 = b.mul(&b);
        let d = g.d;
        let mut out = JMat::zeros(d, p.len(), order);
        for i in 0..d {
            for j in 0..d {
                out.set(i, j, g.at(i, j).mul(&b2));
            }
        }
        Ok(out)
    }
}
