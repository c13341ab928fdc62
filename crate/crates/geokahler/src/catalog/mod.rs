//! Ready-to-run spacetime entries, each bundling a chart, metric,
//! distinguished fields, default parameter function, sample box and the
//! closed-form values the engine is expected to reproduce.
//!
//! Every derived structure an entry relies on (left-invariant frames,
//! connection data, fiber metrics) is validated numerically during
//! construction; a failed validation aborts the entry.

mod liegroup;
mod petrov;
mod planewave;
mod skr;
mod warped;

pub use skr::SkrReference;
pub use warped::{round_s3, Fiber3};

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{CatalogError, GeomError};
use crate::expr::Params;
use crate::fields::{MetricEval, ScalarEval, ScalarField, VectorEval, VectorField};
use crate::jstruct::{self, AcsField};
use crate::kahler::{CandidateKind, KahlerCandidate, ParamFn};
use crate::optics::{build_frame, pregeodesic_factor, shear_coefficients, twist};
use crate::sample::{sample_points, SampleBox};
use crate::tensor::{curvature, lie_derivative_metric, max_abs};

/// Which construction the entry runs end to end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Standard,
    Petrov,
}

/// A quantity the engine can measure at a sample point of an entry.
#[derive(Clone)]
pub enum Measurable {
    /// Signed twist of k in the entry's oriented frame.
    Iota,
    IotaAbs,
    /// Pre-geodesic factor (NaN when the field is not pre-geodesic).
    AlphaK,
    Sigma1K,
    Sigma2K,
    Sigma1T,
    Sigma2T,
    GramKK,
    GramKT,
    GramTT,
    EllRecovered,
    RicciMaxOfG,
    RiemannMaxOfGk,
    NijenhuisMax,
    KillingResidualK,
    GeodesicResidualK,
    GeodesicResidualT,
    /// Value of an arbitrary closed-form scalar on the chart.
    Field(Arc<ScalarField>),
    /// max |g_K - reference metric| componentwise (needs `skr_reference`).
    GkMatchesReference,
}

impl Measurable {
    pub fn describe(&self) -> &'static str {
        match self {
            Measurable::Iota => "iota",
            Measurable::IotaAbs => "abs(iota)",
            Measurable::AlphaK => "alpha(k)",
            Measurable::Sigma1K => "sigma1(k)",
            Measurable::Sigma2K => "sigma2(k)",
            Measurable::Sigma1T => "sigma1(t)",
            Measurable::Sigma2T => "sigma2(t)",
            Measurable::GramKK => "g(k,k)",
            Measurable::GramKT => "g(k,t)",
            Measurable::GramTT => "g(t,t)",
            Measurable::EllRecovered => "ell",
            Measurable::RicciMaxOfG => "max|Ricci(g)|",
            Measurable::RiemannMaxOfGk => "max|Riemann(gK)|",
            Measurable::NijenhuisMax => "max|N|",
            Measurable::KillingResidualK => "Killing residual of k",
            Measurable::GeodesicResidualK => "geodesic residual of k",
            Measurable::GeodesicResidualT => "geodesic residual of t",
            Measurable::Field(_) => "scalar field value",
            Measurable::GkMatchesReference => "max|gK - reference|",
        }
    }
}

/// An expected closed-form value at every sample of the entry's box.
#[derive(Clone)]
pub struct Expected {
    pub name: String,
    pub quantity: Measurable,
    /// Closed-form right-hand side on the entry chart.
    pub rhs: Arc<ScalarField>,
    pub tol: f64,
    /// Where the closed form comes from (catalog documentation only).
    pub note: String,
}

/// A check the entry is expected to fail (the construction's documented
/// negative spaces); the report marks these as passing when the underlying
/// check fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeCheck {
    /// check_admissible must fail.
    Admissibility,
    /// k must not be geodesic.
    KGeodesic,
    /// k must not be pre-geodesic.
    KPregeodesic,
    /// k must not be Killing.
    KKilling,
}

impl NegativeCheck {
    pub fn name(&self) -> &'static str {
        match self {
            NegativeCheck::Admissibility => "admissibility-fails",
            NegativeCheck::KGeodesic => "k-not-geodesic",
            NegativeCheck::KPregeodesic => "k-not-pregeodesic",
            NegativeCheck::KKilling => "k-not-killing",
        }
    }
}

/// Data for the closed-form curvature cases.
#[derive(Clone)]
pub struct CurvatureData {
    pub r_base: Arc<ScalarField>,
    pub base_coords: (usize, usize),
}

/// Optional per-entry extensions.
#[derive(Default, Clone)]
pub struct Extras {
    pub skr_reference: Option<Arc<SkrReference>>,
    pub fiber3: Option<Arc<Fiber3>>,
    pub notes: Vec<String>,
}

/// A fully assembled catalog entry.
#[derive(Clone)]
pub struct SpacetimeSpec {
    pub id: String,
    pub description: String,
    pub chart: Arc<Chart>,
    pub params: Arc<Params>,
    pub g: Arc<crate::fields::MetricField>,
    pub kind: EntryKind,
    pub k: Arc<VectorField>,
    pub t: Arc<VectorField>,
    /// tau for standard entries, the function u for Petrov entries.
    pub tau: Arc<ScalarField>,
    /// tau used by the admissibility suite on Petrov entries (which have
    /// no genuine tau); also the target of expected-negative checks.
    pub admissibility_tau: Option<Arc<ScalarField>>,
    pub ell: Option<Arc<ScalarField>>,
    pub f: ParamFn,
    pub tau_c: f64,
    pub orientation: i8,
    pub sample_box: SampleBox,
    pub frame_seeds: Option<[Arc<VectorField>; 2]>,
    pub expected: Vec<Expected>,
    pub negatives: Vec<NegativeCheck>,
    pub curvature: Option<CurvatureData>,
    pub extras: Extras,
}

impl SpacetimeSpec {
    pub fn seeds_dyn(&self) -> Option<[Arc<dyn VectorEval>; 2]> {
        self.frame_seeds.as_ref().map(|s| {
            [
                s[0].clone() as Arc<dyn VectorEval>,
                s[1].clone() as Arc<dyn VectorEval>,
            ]
        })
    }

    pub fn acs(&self) -> AcsField {
        AcsField::new(
            self.g.clone(),
            self.k.clone(),
            self.t.clone(),
            self.orientation,
        )
        .with_seeds(self.seeds_dyn())
    }

    /// The entry's Kahler candidate, optionally with a different parameter
    /// function.
    pub fn candidate(&self, f_override: Option<ParamFn>) -> Arc<KahlerCandidate> {
        let f = f_override.unwrap_or_else(|| self.f.clone());
        let kind = match self.kind {
            EntryKind::Standard => CandidateKind::Standard,
            EntryKind::Petrov => CandidateKind::Petrov,
        };
        Arc::new(KahlerCandidate {
            g: self.g.clone(),
            k: self.k.clone(),
            t: self.t.clone(),
            tau: self.tau.clone(),
            ell: self.ell.clone().map(|e| e as Arc<dyn ScalarEval>),
            f,
            orientation: self.orientation,
            seeds: self.seeds_dyn(),
            kind,
            tau_c: self.tau_c,
        })
    }

    pub fn samples(&self, count: usize, offset: u64) -> Vec<Vec<f64>> {
        sample_points(&self.chart, &self.params, &self.sample_box, count, offset)
    }

    /// Measure a quantity at a point.
    pub fn measure(&self, m: &Measurable, p: &[f64]) -> Result<f64, GeomError> {
        let g = self.g.as_ref() as &dyn MetricEval;
        match m {
            Measurable::Iota | Measurable::IotaAbs => {
                let frame = build_frame(
                    g,
                    self.k.as_ref(),
                    self.t.as_ref(),
                    p,
                    self.orientation,
                    self.seeds_dyn().as_ref(),
                    1,
                )?;
                let i = twist(self.k.as_ref(), &frame)?;
                Ok(if matches!(m, Measurable::IotaAbs) {
                    i.abs()
                } else {
                    i
                })
            }
            Measurable::AlphaK => {
                let pre = pregeodesic_factor(g, self.k.as_ref(), p, 1e-8)?;
                Ok(pre.alpha.unwrap_or(f64::NAN))
            }
            Measurable::Sigma1K
            | Measurable::Sigma2K
            | Measurable::Sigma1T
            | Measurable::Sigma2T => {
                let frame = build_frame(
                    g,
                    self.k.as_ref(),
                    self.t.as_ref(),
                    p,
                    self.orientation,
                    self.seeds_dyn().as_ref(),
                    1,
                )?;
                let field: &dyn VectorEval = match m {
                    Measurable::Sigma1K | Measurable::Sigma2K => self.k.as_ref(),
                    _ => self.t.as_ref(),
                };
                let s = shear_coefficients(field, &frame)?;
                Ok(match m {
                    Measurable::Sigma1K | Measurable::Sigma1T => s.0,
                    _ => s.1,
                })
            }
            Measurable::GramKK | Measurable::GramKT | Measurable::GramTT => {
                let gj = self.g.eval_jet(p, 0)?;
                let kj = self.k.eval_jet(p, 0)?;
                let tj = self.t.eval_jet(p, 0)?;
                Ok(match m {
                    Measurable::GramKK => gj.bilinear(&kj, &kj).v,
                    Measurable::GramKT => gj.bilinear(&kj, &tj).v,
                    _ => gj.bilinear(&tj, &tj).v,
                })
            }
            Measurable::EllRecovered => {
                let (ell, _) = jstruct::recover_ell(g, self.t.as_ref(), self.tau.as_ref(), p)?;
                Ok(ell)
            }
            Measurable::RicciMaxOfG => Ok(curvature(g, p)?.max_ricci_abs()),
            Measurable::RiemannMaxOfGk => {
                let cand = self.candidate(None);
                let gk = cand.metric();
                Ok(curvature(gk.as_ref(), p)?.max_riemann_abs())
            }
            Measurable::NijenhuisMax => jstruct::nijenhuis_max(&self.acs(), p),
            Measurable::KillingResidualK => {
                Ok(max_abs(&lie_derivative_metric(g, self.k.as_ref(), p)?))
            }
            Measurable::GeodesicResidualK => {
                let pre = pregeodesic_factor(g, self.k.as_ref(), p, 1e-8)?;
                Ok(pre.geodesic_residual)
            }
            Measurable::GeodesicResidualT => {
                let pre = pregeodesic_factor(g, self.t.as_ref(), p, 1e-8)?;
                Ok(pre.geodesic_residual)
            }
            Measurable::Field(f) => f.eval(p),
            Measurable::GkMatchesReference => {
                let reference = self.extras.skr_reference.as_ref().ok_or_else(|| {
                    GeomError::Undefined {
                        quantity: "reference metric".into(),
                        point: p.to_vec(),
                        reason: "entry carries no reference model".into(),
                    }
                })?;
                let cand = self.candidate(None);
                let gk = cand.metric().eval_jet(p, 0)?;
                let gs = reference.g_s.eval_jet(p, 0)?;
                Ok(max_abs(&gk.sub(&gs).values()))
            }
        }
    }
}

/// Determine the orientation sign that makes the frame agree with the
/// given ordered pair of seed fields at the reference point.
pub(crate) fn orientation_matching_seeds(
    g: &dyn MetricEval,
    k: &dyn VectorEval,
    t: &dyn VectorEval,
    x: &dyn VectorEval,
    y: &dyn VectorEval,
    p: &[f64],
) -> Result<i8, GeomError> {
    let kv = k.eval(p)?;
    let tv = t.eval(p)?;
    let xv = x.eval(p)?;
    let yv = y.eval(p)?;
    let d = p.len();
    let mut m = nalgebra::DMatrix::<f64>::zeros(d, d);
    for (c, col) in [&kv, &tv, &xv, &yv].iter().enumerate() {
        for r in 0..d {
            m[(r, c)] = col[r];
        }
    }
    let _ = g;
    Ok(if m.determinant() >= 0.0 { 1 } else { -1 })
}

/// Determine the orientation sign making the signed twist of k negative at
/// the reference point (the convention the construction's region uses).
pub(crate) fn orientation_for_negative_twist(
    g: &dyn MetricEval,
    k: &dyn VectorEval,
    t: &dyn VectorEval,
    seeds: Option<&[Arc<dyn VectorEval>; 2]>,
    p: &[f64],
) -> Result<i8, GeomError> {
    let frame = build_frame(g, k, t, p, 1, seeds, 1)?;
    let i = twist(k, &frame)?;
    Ok(if i < 0.0 { 1 } else { -1 })
}

pub(crate) fn merge_params(
    entry: &str,
    defaults: &[(&str, f64)],
    overrides: &Params,
) -> Result<Params, CatalogError> {
    let mut params = Params::new();
    for (k, v) in defaults {
        params.insert(k.to_string(), *v);
    }
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(CatalogError::BadParameter {
                entry: entry.to_string(),
                msg: format!("unknown parameter `{k}`"),
            });
        }
        params.insert(k.clone(), *v);
    }
    Ok(params)
}

pub(crate) fn validate_residual(
    entry: &str,
    check: &str,
    residual: f64,
    tol: f64,
) -> Result<(), CatalogError> {
    if !(residual.abs() <= tol) {
        return Err(CatalogError::ValidationFailed {
            entry: entry.to_string(),
            check: check.to_string(),
            residual,
            tol,
        });
    }
    Ok(())
}

/// String-valued entry options (expression overrides and variant flags).
pub type Options = std::collections::BTreeMap<String, String>;

/// Stable list of entry ids with one-line descriptions.
pub fn entry_ids() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "direct_product_hopf",
            "direct product of a line with the round 3-sphere, Hopf field",
        ),
        ("de_sitter", "de Sitter spacetime as a warped product"),
        (
            "pp_truncated",
            "warped product over the 3-manifold carried by a pp-wave hypersurface",
        ),
        ("plane_wave", "gravitational plane wave with H = -x^2 - y^2"),
        ("kerr", "rapidly rotating Kerr spacetime (Petrov variant)"),
        ("nut", "NUT spacetime (Petrov variant)"),
        ("conformal_kerr", "metric conformal to Kerr, unit radial gradient"),
        (
            "solvable_lie_group",
            "left-invariant metric on a solvable Lie group with nonzero shear",
        ),
        ("skr", "Lorentzian ansatz inducing an SKR model metric"),
        (
            "skr_constp",
            "SKR ansatz with constant g(k,k) (geodesic curvature case)",
        ),
        (
            "skr_kahler",
            "the SKR model metric itself, run as a Riemannian entry",
        ),
    ]
}

/// Build an entry by id with parameter and option overrides.
pub fn build(
    id: &str,
    overrides: &Params,
    options: &Options,
) -> Result<SpacetimeSpec, CatalogError> {
    match id {
        "direct_product_hopf" => warped::direct_product_hopf(overrides, options),
        "de_sitter" => warped::de_sitter(overrides, options),
        "pp_truncated" => warped::pp_truncated(overrides, options),
        "plane_wave" => planewave::plane_wave(overrides, options),
        "kerr" => petrov::kerr(overrides, options),
        "nut" => petrov::nut(overrides, options),
        "conformal_kerr" => petrov::conformal_kerr(overrides, options),
        "solvable_lie_group" => liegroup::solvable_lie_group(overrides, options),
        "skr" => skr::skr_entry(overrides, options, false),
        "skr_constp" => skr::skr_entry(overrides, options, true),
        "skr_kahler" => skr::skr_kahler_entry(overrides, options),
        other => Err(CatalogError::UnknownEntry(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_stable_and_large_enough() {
        let a = entry_ids();
        let b = entry_ids();
        assert_eq!(
            a.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
            b.iter().map(|(i, _)| *i).collect::<Vec<_>>()
        );
        assert!(a.len() >= 8);
        for id in ["kerr", "nut", "plane_wave"] {
            assert!(a.iter().any(|(i, _)| *i == id));
        }
    }

    #[test]
    fn unknown_entry_rejected() {
        let err = build("nope", &Params::new(), &Options::new()).unwrap_err();
        assert!(matches!(err, CatalogError::UnknownEntry(_)));
    }
}
