//! Petrov type D entries: the rapidly rotating Kerr spacetime and the NUT
//! spacetime (both through the variant construction for a null shear-free
//! pair), and the metric conformal to Kerr, which is admissible in the
//! standard sense with t the unit radial gradient.

use std::sync::Arc;

use super::{
    merge_params, orientation_for_negative_twist, validate_residual, EntryKind, Expected, Extras,
    Measurable, NegativeCheck, Options, SpacetimeSpec,
};
use crate::chart::Chart;
use crate::error::CatalogError;
use crate::expr::Params;
use crate::fields::{MetricEval, MetricField, ScalarField, Signature, VectorField, VectorEval};
use crate::kahler::ParamFn;
use crate::sample::SampleBox;
use crate::tensor::{lie_bracket, vec_max_abs};

const RHO2: &str = "(r^2 + a^2*cos(th)^2)";
const DELTA: &str = "(r^2 - 2*m*r + a^2)";

fn kerr_chart() -> Result<Arc<Chart>, CatalogError> {
    Ok(Chart::new("kerr-bl", &["t", "r", "th", "ph"], &["a", "m"])
        .with_domain("sin(th)", 1e-2)
        .map_err(crate::error::GeomError::from)?
        .with_domain(RHO2, 1e-6)
        .map_err(crate::error::GeomError::from)?
        .with_domain(DELTA, 1e-6)
        .map_err(crate::error::GeomError::from)?)
}

fn kerr_metric(
    chart: &Arc<Chart>,
    params: &Arc<Params>,
    conformal: bool,
) -> Result<Arc<MetricField>, CatalogError> {
    // optional overall factor Delta / rho^2
    let c = if conformal {
        format!("{DELTA}/{RHO2}*")
    } else {
        String::new()
    };
    Ok(MetricField::builder(chart, params, Signature::Lorentzian)
        .set(0, 0, &format!("{c}(-1 + 2*m*r/{RHO2})"))?
        .set(1, 1, &format!("{c}({RHO2}/{DELTA})"))?
        .set(2, 2, &format!("{c}{RHO2}"))?
        .set(
            3,
            3,
            &format!("{c}((r^2 + a^2 + 2*m*r*a^2*sin(th)^2/{RHO2})*sin(th)^2)"),
        )?
        .set(0, 3, &format!("{c}(-(2*m*r*a*sin(th)^2/{RHO2}))"))?
        .build())
}

fn kerr_null_pair(
    chart: &Arc<Chart>,
    params: &Arc<Params>,
) -> Result<(Arc<VectorField>, Arc<VectorField>), CatalogError> {
    let kp = Arc::new(VectorField::new(
        chart,
        params,
        &[&format!("(r^2 + a^2)/{DELTA}"), "1", "0", &format!("a/{DELTA}")],
    )?);
    let km = Arc::new(VectorField::new(
        chart,
        params,
        &[&format!("(r^2 + a^2)/{DELTA}"), "-1", "0", &format!("a/{DELTA}")],
    )?);
    Ok((kp, km))
}

fn kerr_frame_seeds(
    chart: &Arc<Chart>,
    params: &Arc<Params>,
) -> Result<[Arc<VectorField>; 2], CatalogError> {
    // E2 = (1/rho) d_th, E3 = (1/(rho sin th)) d_ph + (a sin th / rho) d_t
    let e2 = Arc::new(VectorField::new(
        chart,
        params,
        &["0", "0", &format!("1/sqrt({RHO2})"), "0"],
    )?);
    let e3 = Arc::new(VectorField::new(
        chart,
        params,
        &[
            &format!("a*sin(th)/sqrt({RHO2})"),
            "0",
            "0",
            &format!("1/(sqrt({RHO2})*sin(th))"),
        ],
    )?);
    Ok([e2, e3])
}

fn rapid_rotation(entry: &str, params: &Params) -> Result<(), CatalogError> {
    let (a, m) = (params["a"], params["m"]);
    if !(a > m && m > 0.0) {
        return Err(CatalogError::BadParameter {
            entry: entry.to_string(),
            msg: format!("requires a > m > 0 (rapid rotation); got a = {a}, m = {m}"),
        });
    }
    Ok(())
}

/// Rapidly rotating Kerr spacetime with the principal null pair; the
/// candidate uses the Petrov variant with u = e^{h(r)} p, f(u) = u,
/// h(r) = log((r^2 + a^2 + 1)/Delta).
pub fn kerr(overrides: &Params, _options: &Options) -> Result<SpacetimeSpec, CatalogError> {
    let params = Arc::new(merge_params("kerr", &[("a", 2.0), ("m", 1.0)], overrides)?);
    rapid_rotation("kerr", &params)?;
    let chart = kerr_chart()?;
    let g = kerr_metric(&chart, &params, false)?;
    let (kp, km) = kerr_null_pair(&chart, &params)?;
    let seeds = kerr_frame_seeds(&chart, &params)?;
    // u = e^{h(r)} p with e^h = (r^2+a^2+1)/Delta and p = sqrt(Delta/2)/rho
    let u = Arc::new(ScalarField::new(
        &chart,
        &params,
        &format!("(r^2 + a^2 + 1)/(sqrt(2*{DELTA})*sqrt({RHO2}))"),
    )?);
    let adm_tau = Arc::new(ScalarField::new(&chart, &params, "r")?);

    let sample_box = SampleBox::new(&[
        (-1.0, 1.0),
        (0.5, 10.0),
        (std::f64::consts::FRAC_PI_2 + 0.1, std::f64::consts::PI - 0.1),
        (0.1, 6.1),
    ]);
    // the coordinate orientation already gives iota = 2 a cos(th)/rho^2,
    // negative below the equatorial plane; pin it numerically
    let ref_point = vec![0.0, 3.0, 2.2, 0.5];
    let orientation = orientation_for_negative_twist(
        g.as_ref(),
        kp.as_ref(),
        km.as_ref(),
        None,
        &ref_point,
    )?;

    // validate the bracket relation [k+, E2] = -(r/rho^2) E2 numerically
    let br = lie_bracket(kp.as_ref(), seeds[0].as_ref(), &ref_point)?;
    let e2v = seeds[0].eval(&ref_point)?;
    let rho2 = ref_point[1] * ref_point[1]
        + params["a"] * params["a"] * ref_point[2].cos() * ref_point[2].cos();
    let resid: Vec<f64> = br
        .iter()
        .zip(&e2v)
        .map(|(b, e)| b + ref_point[1] / rho2 * e)
        .collect();
    validate_residual("kerr", "[k+, E2] = -(r/rho^2) E2", vec_max_abs(&resid), 1e-9)?;

    let expected = vec![
        Expected {
            name: "iota = 2 a cos(th)/rho^2".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(
                &chart,
                &params,
                &format!("2*a*cos(th)/{RHO2}"),
            )?),
            tol: 1e-8,
            note: "principal null twist".into(),
        },
        Expected {
            name: "Ricci flat".into(),
            quantity: Measurable::RicciMaxOfG,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-6,
            note: "vacuum solution".into(),
        },
        Expected {
            name: "k+ geodesic".into(),
            quantity: Measurable::GeodesicResidualK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-9,
            note: "shear-free geodesic congruence".into(),
        },
        Expected {
            name: "g(k+, k-) = -2 rho^2/Delta".into(),
            quantity: Measurable::GramKT,
            rhs: Arc::new(ScalarField::new(
                &chart,
                &params,
                &format!("-(2*{RHO2}/{DELTA})"),
            )?),
            tol: 1e-9,
            note: "null pair pairing".into(),
        },
        Expected {
            name: "k+ null".into(),
            quantity: Measurable::GramKK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-9,
            note: "construction".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: "kerr".into(),
        description: "rapidly rotating Kerr spacetime (Petrov variant)".into(),
        chart,
        params,
        g,
        kind: EntryKind::Petrov,
        k: kp,
        t: km,
        tau: u,
        admissibility_tau: Some(adm_tau),
        ell: None,
        f: ParamFn::Affine(0.0),
        tau_c: 0.0,
        orientation,
        sample_box,
        frame_seeds: Some(seeds),
        expected,
        negatives: vec![NegativeCheck::Admissibility],
        curvature: None,
        extras: Extras::default(),
    })
}

/// NUT spacetime; k+ = d_r is geodesic, k- strictly pre-geodesic, and the
/// induced metric is Kahler on the whole box (u = -r, f = exp(u), p = 1).
pub fn nut(overrides: &Params, _options: &Options) -> Result<SpacetimeSpec, CatalogError> {
    let params = Arc::new(merge_params("nut", &[("m", 1.0), ("l", 1.0)], overrides)?);
    if params["l"] <= 0.0 {
        return Err(CatalogError::BadParameter {
            entry: "nut".into(),
            msg: "l must be positive".into(),
        });
    }
    let chart = Chart::new("nut", &["u", "r", "x", "y"], &["m", "l"])
        .with_domain("sin(x)", 1e-2)
        .map_err(crate::error::GeomError::from)?;
    // |rho|^2 = 1/(r^2 + l^2), F = r^2 - 2 m r - l^2
    let s = "(r^2 + l^2)";
    let f_poly = "(r^2 - 2*m*r - l^2)";
    let g = MetricField::builder(&chart, &params, Signature::Lorentzian)
        .set(0, 0, &format!("-{f_poly}/{s}"))?
        .set(0, 1, "-1")?
        .set(1, 3, "2*l*cos(x)")?
        .set(0, 3, &format!("2*l*cos(x)*{f_poly}/{s}"))?
        .set(2, 2, s)?
        .set(
            3,
            3,
            &format!("-{f_poly}/{s}*(4*l^2*cos(x)^2) + {s}*sin(x)^2"),
        )?
        .build();
    let kp = Arc::new(VectorField::new(&chart, &params, &["0", "1", "0", "0"])?);
    let km = Arc::new(VectorField::new(
        &chart,
        &params,
        &["1", &format!("-{f_poly}/(2*{s})"), "0", "0"],
    )?);
    // E2 - i E3 = -conj(rho) (2 i l cot(x) d_u + d_x + i csc(x) d_y)
    let seeds = [
        Arc::new(VectorField::new(
            &chart,
            &params,
            &[
                &format!("-2*l^2*cos(x)/(sin(x)*{s})"),
                "0",
                &format!("r/{s}"),
                &format!("-l/(sin(x)*{s})"),
            ],
        )?),
        Arc::new(VectorField::new(
            &chart,
            &params,
            &[
                &format!("-2*r*l*cos(x)/(sin(x)*{s})"),
                "0",
                &format!("-l/{s}"),
                &format!("-r/(sin(x)*{s})"),
            ],
        )?),
    ];
    let u_fn = Arc::new(ScalarField::new(&chart, &params, "-r")?);
    let adm_tau = Arc::new(ScalarField::new(&chart, &params, "r")?);

    let sample_box = SampleBox::new(&[(-1.0, 1.0), (0.5, 3.0), (0.4, 2.7), (-1.0, 1.0)]);
    let ref_point = vec![0.2, 1.5, 1.0, 0.3];
    // validate the frame extracted from the complex m-vector
    let gj = g.eval_jet(&ref_point, 0)?;
    for (i, e) in seeds.iter().enumerate() {
        let ev = e.eval_jet(&ref_point, 0)?;
        validate_residual(
            "nut",
            &format!("frame vector E{} unit", i + 2),
            gj.bilinear(&ev, &ev).v - 1.0,
            1e-9,
        )?;
        let kv = kp.eval_jet(&ref_point, 0)?;
        validate_residual(
            "nut",
            &format!("frame vector E{} orthogonal to k+", i + 2),
            gj.bilinear(&ev, &kv).v,
            1e-9,
        )?;
    }
    let orientation = orientation_for_negative_twist(
        g.as_ref(),
        kp.as_ref(),
        km.as_ref(),
        None,
        &ref_point,
    )?;
    // the metric must stay Lorentzian across the box (F changes sign there)
    for p in crate::sample::sample_points(&chart, &params, &sample_box, 12, 5) {
        g.check_signature_at(&p).map_err(CatalogError::from)?;
    }

    let expected = vec![
        Expected {
            name: "iota = -2 l/(r^2 + l^2)".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(&chart, &params, &format!("-(2*l/{s})"))?),
            tol: 1e-9,
            note: "globally nonvanishing twist".into(),
        },
        Expected {
            name: "g(k+, k-) = -1".into(),
            quantity: Measurable::GramKT,
            rhs: Arc::new(ScalarField::new(&chart, &params, "-1")?),
            tol: 1e-12,
            note: "so the Petrov scale is p = 1".into(),
        },
        Expected {
            name: "Ricci flat".into(),
            quantity: Measurable::RicciMaxOfG,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-6,
            note: "vacuum solution".into(),
        },
        Expected {
            name: "k+ geodesic".into(),
            quantity: Measurable::GeodesicResidualK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-10,
            note: "principal null direction".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: "nut".into(),
        description: "NUT spacetime (Petrov variant)".into(),
        chart,
        params,
        g,
        kind: EntryKind::Petrov,
        k: kp,
        t: km,
        tau: u_fn,
        admissibility_tau: Some(adm_tau),
        ell: None,
        f: ParamFn::Exponential,
        tau_c: 0.0,
        orientation,
        sample_box,
        frame_seeds: Some(seeds),
        expected,
        negatives: vec![],
        curvature: None,
        extras: Extras::default(),
    })
}

/// The metric conformal to Kerr with factor Delta/rho^2. The radial
/// gradient has unit length, so the entry is admissible in the standard
/// sense with tau = r and f = e^{-h(r)}, h' = 2(r-m)/Delta - 2/r.
pub fn conformal_kerr(
    overrides: &Params,
    _options: &Options,
) -> Result<SpacetimeSpec, CatalogError> {
    let params = Arc::new(merge_params(
        "conformal_kerr",
        &[("a", 2.0), ("m", 1.0), ("r0", 1.0)],
        overrides,
    )?);
    rapid_rotation("conformal_kerr", &params)?;
    if params["r0"] <= 0.0 {
        return Err(CatalogError::BadParameter {
            entry: "conformal_kerr".into(),
            msg: "r0 must be positive".into(),
        });
    }
    let chart = Chart::new("kerr-conf", &["t", "r", "th", "ph"], &["a", "m", "r0"])
        .with_domain("sin(th)", 1e-2)
        .map_err(crate::error::GeomError::from)?
        .with_domain("r", 1e-3)
        .map_err(crate::error::GeomError::from)?
        .with_domain(DELTA, 1e-6)
        .map_err(crate::error::GeomError::from)?;
    let g = kerr_metric(&chart, &params, true)?;
    let (kp, _) = kerr_null_pair(&chart, &params)?;
    // t = grad(r) for the conformal metric; it comes out as d_r exactly
    let t = Arc::new(VectorField::new(&chart, &params, &["0", "1", "0", "0"])?);
    let tau = Arc::new(ScalarField::new(&chart, &params, "r")?);
    // f = e^{-h} with h = log(Delta) - 2 log r + const, normalized so that
    // f(r0) = 1; the parameter function is one-variable, so the parameter
    // values are substituted numerically.
    let (a, m, r0) = (params["a"], params["m"], params["r0"]);
    let f = ParamFn::custom(&format!(
        "(tau^2/(tau^2 - 2*{m}*tau + {a}^2))*(({r0}^2 - 2*{m}*{r0} + {a}^2)/{r0}^2)"
    ))
    .map_err(crate::error::GeomError::from)?;

    // the Kerr frame rescaled to unit length for the conformal metric
    let e2 = Arc::new(VectorField::new(
        &chart,
        &params,
        &["0", "0", &format!("1/sqrt({DELTA})"), "0"],
    )?);
    let e3 = Arc::new(VectorField::new(
        &chart,
        &params,
        &[
            &format!("a*sin(th)/sqrt({DELTA})"),
            "0",
            "0",
            &format!("1/(sqrt({DELTA})*sin(th))"),
        ],
    )?);
    let seeds = [e2, e3];

    let sample_box = SampleBox::new(&[
        (-1.0, 1.0),
        (0.5, 10.0),
        (std::f64::consts::FRAC_PI_2 + 0.1, std::f64::consts::PI - 0.1),
        (0.1, 6.1),
    ]);
    let ref_point = vec![0.0, 3.0, 2.2, 0.5];
    let orientation = orientation_for_negative_twist(
        g.as_ref(),
        kp.as_ref(),
        t.as_ref(),
        None,
        &ref_point,
    )?;

    let expected = vec![
        Expected {
            name: "grad(r) has unit length".into(),
            quantity: Measurable::GramTT,
            rhs: Arc::new(ScalarField::new(&chart, &params, "1")?),
            tol: 1e-10,
            note: "conformal factor chosen for this".into(),
        },
        Expected {
            name: "alpha(k) = 2((r - m)/Delta - r/rho^2)".into(),
            quantity: Measurable::AlphaK,
            rhs: Arc::new(ScalarField::new(
                &chart,
                &params,
                &format!("2*((r - m)/{DELTA} - r/{RHO2})"),
            )?),
            tol: 1e-8,
            note: "pre-geodesic factor of k".into(),
        },
        Expected {
            name: "twist is conformally invariant".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(
                &chart,
                &params,
                &format!("2*a*cos(th)/{RHO2}"),
            )?),
            tol: 1e-9,
            note: "same closed form as for Kerr".into(),
        },
        Expected {
            name: "k null".into(),
            quantity: Measurable::GramKK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-9,
            note: "conformal change preserves null".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: "conformal_kerr".into(),
        description: "metric conformal to Kerr, unit radial gradient".into(),
        chart,
        params,
        g,
        kind: EntryKind::Standard,
        k: kp,
        t,
        tau,
        admissibility_tau: None,
        ell: None,
        f,
        tau_c: 0.0,
        orientation,
        sample_box,
        frame_seeds: Some(seeds),
        expected,
        negatives: vec![],
        curvature: None,
        extras: Extras::default(),
    })
}
