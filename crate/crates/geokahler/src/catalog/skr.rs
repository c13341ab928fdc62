//! The SKR family: a Kahler model metric g_S on the total space of a line
//! bundle over the flat plane,
//!
//!     g_S = (1/Q) dtau^2 + (Q/a^2) eta^2  on V,   2|tau_c| (dx^2 + dy^2) on H,
//!
//! with eta = dth - a y dx + a x dy, and the Lorentzian ansatz
//!
//!     g = (q/Q^2) dtau^2 + (p/a^2) eta^2 + dx^2 + dy^2,
//!
//! whose induced Kahler metric with f = tau_c / p reproduces g_S on
//! {dtau != 0, tau > c}. The connection data is validated numerically
//! against the bracket relations of the vertical fields u, v and the
//! horizontal lifts.

use std::sync::Arc;

use super::{
    merge_params, orientation_for_negative_twist, validate_residual, CurvatureData, EntryKind,
    Expected, Extras, Measurable, Options, SpacetimeSpec,
};
use crate::chart::Chart;
use crate::error::CatalogError;
use crate::expr::Params;
use crate::fields::{MetricEval, MetricField, ScalarField, Signature, VectorField, VectorEval};
use crate::kahler::ParamFn;
use crate::sample::{sample_points, SampleBox};
use crate::tensor::{lie_bracket, vec_max_abs};

/// The Kahler model g_S and its distinguished fields.
#[derive(Clone)]
pub struct SkrReference {
    pub g_s: Arc<MetricField>,
    /// u = a d_th (the Killing direction) and v = Q d_tau.
    pub u: Arc<VectorField>,
    pub v: Arc<VectorField>,
    pub big_q: Arc<ScalarField>,
}

struct SkrData {
    chart: Arc<Chart>,
    params: Arc<Params>,
    q_expr: String,
    p_expr: String,
    g: Arc<MetricField>,
    reference: SkrReference,
    k: Arc<VectorField>,
    t: Arc<VectorField>,
    sample_box: SampleBox,
}

/// Shared construction of the chart, the model metric and the fields.
fn skr_data(
    entry: &str,
    overrides: &Params,
    options: &Options,
    const_p: bool,
) -> Result<SkrData, CatalogError> {
    let params = Arc::new(merge_params(
        entry,
        &[("a", 1.0), ("c", 0.0), ("q", -1.0)],
        overrides,
    )?);
    if params["q"] >= 0.0 {
        return Err(CatalogError::BadParameter {
            entry: entry.into(),
            msg: "q must be negative".into(),
        });
    }
    if params["a"] == 0.0 {
        return Err(CatalogError::BadParameter {
            entry: entry.into(),
            msg: "a must be nonzero".into(),
        });
    }
    let q_expr = options
        .get("Q")
        .map(|s| s.as_str())
        .unwrap_or("tau^2 + 1")
        .to_string();
    let p_expr = if const_p {
        options.get("p").map(|s| s.as_str()).unwrap_or("1").to_string()
    } else {
        options
            .get("p")
            .map(|s| s.as_str())
            .unwrap_or("tau - c")
            .to_string()
    };

    let chart = Chart::new(
        &format!("{entry}-chart"),
        &["tau", "th", "x", "y"],
        &["a", "c", "q"],
    )
    .with_domain("tau - c", 1e-2)
    .map_err(crate::error::GeomError::from)?;
    // substitute the chart coordinate for the single variable in Q and p
    let qq = format!("({})", q_expr);
    let pp = format!("({})", p_expr);

    // Lorentzian ansatz g
    let g = MetricField::builder(&chart, &params, Signature::Lorentzian)
        .set(0, 0, &format!("q/{qq}^2"))?
        .set(1, 1, &format!("{pp}/a^2"))?
        .set(1, 2, &format!("-{pp}*y/a"))?
        .set(1, 3, &format!("{pp}*x/a"))?
        .set(2, 2, &format!("1 + {pp}*y^2"))?
        .set(2, 3, &format!("-{pp}*x*y"))?
        .set(3, 3, &format!("1 + {pp}*x^2"))?
        .build();
    // Kahler model g_S
    let g_s = MetricField::builder(&chart, &params, Signature::Riemannian)
        .set(0, 0, &format!("1/{qq}"))?
        .set(1, 1, &format!("{qq}/a^2"))?
        .set(1, 2, &format!("-{qq}*y/a"))?
        .set(1, 3, &format!("{qq}*x/a"))?
        .set(2, 2, &format!("2*(tau - c) + {qq}*y^2"))?
        .set(2, 3, &format!("-{qq}*x*y"))?
        .set(3, 3, &format!("2*(tau - c) + {qq}*x^2"))?
        .build();

    let u = Arc::new(VectorField::new(&chart, &params, &["0", "a", "0", "0"])?);
    let v = Arc::new(VectorField::new(&chart, &params, &[&qq, "0", "0", "0"])?);
    let k = u.clone();
    let t = Arc::new(VectorField::new(
        &chart,
        &params,
        &[&format!("-{qq}"), "0", "0", "0"],
    )?);
    let big_q = Arc::new(ScalarField::new(&chart, &params, &qq)?);

    let sample_box = SampleBox::new(&[(0.5, 3.0), (-3.0, 3.0), (-1.0, 1.0), (-1.0, 1.0)]);

    // validate the model relations: g_S(u, v) = 0, Q > 0, [u, v] = 0,
    // [v, w] = 0, [u, w] = 0, [w, w']^V = -2 omega_h(w, w') u for the
    // horizontal lifts w = d_x + a y d_th, w' = d_y - a x d_th.
    let w1 = VectorField::new(&chart, &params, &["0", "a*y", "1", "0"])?;
    let w2 = VectorField::new(&chart, &params, &["0", "-(a*x)", "0", "1"])?;
    for p in sample_points(&chart, &params, &sample_box, 5, 17) {
        let gsj = g_s.eval_jet(&p, 0)?;
        let uj = u.eval_jet(&p, 0)?;
        let vj = v.eval_jet(&p, 0)?;
        validate_residual(entry, "relation i: g_S(u,v) = 0", gsj.bilinear(&uj, &vj).v, 1e-8)?;
        let qv = crate::fields::ScalarEval::eval(big_q.as_ref(), &p)?;
        if qv <= 0.0 {
            return Err(CatalogError::ValidationFailed {
                entry: entry.into(),
                check: "relation ii: Q > 0".into(),
                residual: qv,
                tol: 0.0,
            });
        }
        validate_residual(
            entry,
            "relation iii: [u,v] = 0",
            vec_max_abs(&lie_bracket(u.as_ref(), v.as_ref(), &p)?),
            1e-8,
        )?;
        validate_residual(
            entry,
            "relation iv: [v,w] = 0",
            vec_max_abs(&lie_bracket(v.as_ref(), &w1, &p)?)
                .max(vec_max_abs(&lie_bracket(v.as_ref(), &w2, &p)?)),
            1e-8,
        )?;
        validate_residual(
            entry,
            "relation v: [u,w] = 0",
            vec_max_abs(&lie_bracket(u.as_ref(), &w1, &p)?)
                .max(vec_max_abs(&lie_bracket(u.as_ref(), &w2, &p)?)),
            1e-8,
        )?;
        // [w1, w2] must equal -2 u (omega_h(w1, w2) = 1 for the flat plane)
        let br = lie_bracket(&w1, &w2, &p)?;
        let uv = u.eval(&p)?;
        let resid: Vec<f64> = br.iter().zip(&uv).map(|(b, w)| b + 2.0 * w).collect();
        validate_residual(
            entry,
            "relation vi: [w,w']^V = -2 omega_h(w,w') u",
            vec_max_abs(&resid),
            1e-8,
        )?;
    }

    Ok(SkrData {
        chart,
        params,
        q_expr: qq,
        p_expr: pp,
        g,
        reference: SkrReference { g_s, u, v, big_q },
        k,
        t,
        sample_box,
    })
}

/// The Lorentzian SKR ansatz entry. With `const_p` the default p is the
/// constant 1, which makes k geodesic of constant length (the geodesic
/// curvature case); otherwise p = tau - c (the Killing case with
/// nonconstant p).
pub fn skr_entry(
    overrides: &Params,
    options: &Options,
    const_p: bool,
) -> Result<SpacetimeSpec, CatalogError> {
    let entry = if const_p { "skr_constp" } else { "skr" };
    let data = skr_data(entry, overrides, options, const_p)?;
    let SkrData {
        chart,
        params,
        q_expr,
        p_expr,
        g,
        reference,
        k,
        t,
        sample_box,
    } = data;
    let tau = Arc::new(ScalarField::new(&chart, &params, "tau")?);
    let ell = Arc::new(ScalarField::new(&chart, &params, &format!("-q/{q_expr}"))?);
    // f = tau_c / p with the numeric c substituted (one-variable function)
    let c = params["c"];
    let p_in_tau = p_expr.replace("c", &format!("({c})"));
    let f = ParamFn::custom(&format!("(tau - ({c}))/({p_in_tau})"))
        .map_err(crate::error::GeomError::from)?;

    let ref_point: Vec<f64> = sample_box
        .bounds
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi) + 0.03)
        .collect();
    let orientation = orientation_for_negative_twist(
        g.as_ref(),
        k.as_ref(),
        t.as_ref(),
        None,
        &ref_point,
    )?;

    let expected = vec![
        Expected {
            name: "g_K = g_S on U".into(),
            quantity: Measurable::GkMatchesReference,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-7,
            note: "the ansatz reproduces the model".into(),
        },
        Expected {
            name: "ell = -q/Q".into(),
            quantity: Measurable::EllRecovered,
            rhs: Arc::new(ScalarField::new(&chart, &params, &format!("-q/{q_expr}"))?),
            tol: 1e-8,
            note: "recovered from t = ell grad tau".into(),
        },
        Expected {
            name: "iota = -2p".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(&chart, &params, &format!("-2*{p_expr}"))?),
            tol: 1e-8,
            note: "bracket relation vi".into(),
        },
        Expected {
            name: "k Killing".into(),
            quantity: Measurable::KillingResidualK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-8,
            note: "the ansatz has a Killing vertical field".into(),
        },
        Expected {
            name: "t geodesic".into(),
            quantity: Measurable::GeodesicResidualT,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-8,
            note: "always g-geodesic in the ansatz".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: entry.into(),
        description: if const_p {
            "SKR ansatz with constant g(k,k) (geodesic curvature case)".into()
        } else {
            "Lorentzian ansatz inducing an SKR model metric".into()
        },
        chart: chart.clone(),
        params,
        g,
        kind: EntryKind::Standard,
        k,
        t,
        tau,
        admissibility_tau: None,
        ell: Some(ell),
        f,
        tau_c: c,
        orientation,
        sample_box,
        frame_seeds: None,
        expected,
        negatives: vec![],
        curvature: Some(CurvatureData {
            r_base: Arc::new(ScalarField::new(&chart, &Arc::new(Params::new()), "1").map_err(
                |e| CatalogError::Geom(e),
            )?),
            base_coords: (2, 3),
        }),
        extras: Extras {
            skr_reference: Some(Arc::new(reference)),
            ..Default::default()
        },
    })
}

/// The SKR model metric itself run as a Riemannian entry: with k = u,
/// t = -v it is admissible in its own right and induces a further Kahler
/// metric (the construction iterates).
pub fn skr_kahler_entry(
    overrides: &Params,
    options: &Options,
) -> Result<SpacetimeSpec, CatalogError> {
    let data = skr_data("skr_kahler", overrides, options, false)?;
    let SkrData {
        chart,
        params,
        q_expr,
        p_expr,
        g: _,
        reference,
        k,
        t,
        sample_box,
    } = data;
    let tau = Arc::new(ScalarField::new(&chart, &params, "tau")?);
    let c = params["c"];
    let p_in_tau = p_expr.replace("c", &format!("({c})"));
    let f = ParamFn::custom(&format!("(tau - ({c}))/({p_in_tau})"))
        .map_err(crate::error::GeomError::from)?;
    let g = reference.g_s.clone();

    let ref_point: Vec<f64> = sample_box
        .bounds
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi) + 0.03)
        .collect();
    let orientation = orientation_for_negative_twist(
        g.as_ref(),
        k.as_ref(),
        t.as_ref(),
        None,
        &ref_point,
    )?;

    let expected = vec![
        Expected {
            name: "iota = -Q/tau_c".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(
                &chart,
                &params,
                &format!("-{q_expr}/(tau - c)"),
            )?),
            tol: 1e-8,
            note: "twist of the model metric".into(),
        },
        Expected {
            name: "ell = -1".into(),
            quantity: Measurable::EllRecovered,
            rhs: Arc::new(ScalarField::new(&chart, &params, "-1")?),
            tol: 1e-10,
            note: "t = -v = -grad tau for the model".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: "skr_kahler".into(),
        description: "the SKR model metric itself, run as a Riemannian entry".into(),
        chart,
        params,
        g,
        kind: EntryKind::Standard,
        k,
        t,
        tau,
        admissibility_tau: None,
        ell: None,
        f,
        tau_c: c,
        orientation,
        sample_box,
        frame_seeds: None,
        expected,
        negatives: vec![],
        curvature: None,
        extras: Extras {
            skr_reference: Some(Arc::new(reference)),
            ..Default::default()
        },
    })
}
