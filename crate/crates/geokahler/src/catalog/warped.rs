//! Warped-product entries -dt^2 + w(t)^2 gbar over a Riemannian 3-manifold
//! carrying a unit geodesic shear-free twisting field: the direct product
//! with the round 3-sphere (Hopf field), de Sitter spacetime, and the
//! warped product over the 3-manifold extracted from a pp-wave
//! hypersurface.

use std::sync::Arc;

use super::{
    merge_params, orientation_for_negative_twist, validate_residual, EntryKind, Expected, Extras,
    Measurable, Options, SpacetimeSpec,
};
use crate::chart::Chart;
use crate::error::CatalogError;
use crate::expr::{Expr, Params};
use crate::fields::{MetricField, ScalarField, Signature, VectorField, VectorEval};
use crate::kahler::ParamFn;
use crate::optics::riemannian3_optics;
use crate::sample::{sample_points, SampleBox};
use crate::tensor::curvature;

/// Fiber data of a warped entry: the 3-manifold, its distinguished unit
/// field, and the warping function on the 4-dimensional chart.
#[derive(Clone)]
pub struct Fiber3 {
    pub chart: Arc<Chart>,
    pub g: Arc<MetricField>,
    pub kbar: Arc<VectorField>,
    pub seeds: Option<[Arc<VectorField>; 2]>,
    pub orientation: i8,
    pub sample_box: SampleBox,
    /// w as a scalar on the 4-dimensional chart.
    pub w: Arc<ScalarField>,
}

/// The round 3-sphere of the given radius in Euler angles (psi, th, ph),
/// together with the unit field tangent to the Hopf fibration. The radius
/// is referenced through the named parameter.
pub fn round_s3(
    radius_param: &str,
    params: &Arc<Params>,
) -> Result<(Arc<Chart>, Arc<MetricField>, Arc<VectorField>), CatalogError> {
    let chart = Chart::new("s3-euler", &["psi", "th", "ph"], &[radius_param])
        .with_domain("sin(th)", 1e-2)
        .map_err(crate::error::GeomError::from)?;
    let r2_4 = format!("{radius_param}^2/4");
    let g = MetricField::builder(&chart, params, Signature::Riemannian)
        .set(0, 0, &r2_4)?
        .set(0, 2, &format!("{r2_4}*cos(th)"))?
        .set(1, 1, &r2_4)?
        .set(2, 2, &r2_4)?
        .build();
    let kbar = Arc::new(VectorField::new(
        &chart,
        params,
        &[&format!("2/{radius_param}"), "0", "0"],
    )?);
    Ok((chart, g, kbar))
}

/// Validate the distinguished unit field of a fiber: unit length, Killing,
/// geodesic, shear-free, everywhere twisting, and the twist identity
/// iota^2 = 2 Ric(kbar, kbar).
fn validate_fiber(entry: &str, fiber: &Fiber3, params: &Params) -> Result<(), CatalogError> {
    let pts = sample_points(&fiber.chart, params, &fiber.sample_box, 6, 3);
    if pts.is_empty() {
        return Err(CatalogError::BadParameter {
            entry: entry.to_string(),
            msg: "empty fiber sample box".into(),
        });
    }
    for p in &pts {
        let seeds = fiber.seeds.as_ref().map(|s| {
            [
                s[0].clone() as Arc<dyn crate::fields::VectorEval>,
                s[1].clone() as Arc<dyn crate::fields::VectorEval>,
            ]
        });
        let rep = riemannian3_optics(
            fiber.g.as_ref(),
            fiber.kbar.as_ref(),
            p,
            fiber.orientation,
            seeds.as_ref(),
            1e-9,
        )?;
        validate_residual(entry, "fiber field Killing", rep.killing_residual, 1e-9)?;
        validate_residual(entry, "fiber field geodesic", rep.geodesic_residual, 1e-9)?;
        validate_residual(
            entry,
            "fiber field shear-free",
            rep.optical.shear_invariant.sqrt(),
            1e-9,
        )?;
        if rep.optical.twist_function < 1e-6 {
            return Err(CatalogError::ValidationFailed {
                entry: entry.to_string(),
                check: "fiber twist nowhere vanishing".into(),
                residual: rep.optical.twist_function,
                tol: 1e-6,
            });
        }
        let ric = curvature(fiber.g.as_ref(), p)?;
        let kv = fiber.kbar.eval(p)?;
        let mut ric_kk = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                ric_kk += ric.ricci[i][j] * kv[i] * kv[j];
            }
        }
        let iota2 = rep.optical.iota * rep.optical.iota;
        validate_residual(
            entry,
            "twist identity iota^2 = 2 Ric(kbar, kbar)",
            iota2 - 2.0 * ric_kk,
            1e-8,
        )?;
    }
    Ok(())
}

/// Assemble the 4-dimensional warped entry -dt^2 + w^2 gbar for a sphere
/// fiber in Euler angles.
fn warped_over_s3(
    id: &str,
    description: &str,
    radius_param: &str,
    params: Arc<Params>,
    w_expr: &str,
    f: ParamFn,
    extra_expected: Vec<Expected>,
) -> Result<SpacetimeSpec, CatalogError> {
    let chart = Chart::new(
        &format!("{id}-chart"),
        &["t", "psi", "th", "ph"],
        &[radius_param],
    )
    .with_domain("sin(th)", 1e-2)
    .map_err(crate::error::GeomError::from)?;
    let r2_4 = format!("({radius_param}^2/4)");
    let w2 = format!("({w_expr})^2");
    let g = MetricField::builder(&chart, &params, Signature::Lorentzian)
        .set(0, 0, "-1")?
        .set(1, 1, &format!("{w2}*{r2_4}"))?
        .set(1, 3, &format!("{w2}*{r2_4}*cos(th)"))?
        .set(2, 2, &format!("{w2}*{r2_4}"))?
        .set(3, 3, &format!("{w2}*{r2_4}"))?
        .build();
    let k = Arc::new(VectorField::new(
        &chart,
        &params,
        &["1", &format!("(2/{radius_param})/({w_expr})"), "0", "0"],
    )?);
    let t = Arc::new(VectorField::new(&chart, &params, &["-1", "0", "0", "0"])?);
    let tau = Arc::new(ScalarField::new(&chart, &params, "t")?);

    let sample_box = SampleBox::new(&[(-1.0, 1.0), (0.2, 6.0), (0.3, 2.8), (0.2, 6.0)]);
    let ref_point: Vec<f64> = sample_box
        .bounds
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi))
        .collect();
    let orientation = orientation_for_negative_twist(
        g.as_ref(),
        k.as_ref(),
        t.as_ref(),
        None,
        &ref_point,
    )?;

    let (chart3, g3, kbar3) = round_s3(radius_param, &params)?;
    let fiber = Fiber3 {
        chart: chart3,
        g: g3,
        kbar: kbar3,
        seeds: None,
        orientation: 1,
        sample_box: SampleBox::new(&[(0.2, 6.0), (0.3, 2.8), (0.2, 6.0)]),
        w: Arc::new(ScalarField::new(&chart, &params, w_expr)?),
    };
    validate_fiber(id, &fiber, &params)?;

    let mut expected = vec![
        Expected {
            name: "k is null".into(),
            quantity: Measurable::GramKK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-10,
            note: "construction".into(),
        },
        Expected {
            name: "iota = iota_bar / w".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(
                &chart,
                &params,
                &format!("-(2/{radius_param})/({w_expr})"),
            )?),
            tol: 1e-9,
            note: "twist of a warped product".into(),
        },
    ];
    expected.extend(extra_expected);

    Ok(SpacetimeSpec {
        id: id.to_string(),
        description: description.to_string(),
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
        tau_c: 0.0,
        orientation,
        sample_box,
        frame_seeds: None,
        expected,
        negatives: vec![],
        curvature: None,
        extras: Extras {
            fiber3: Some(Arc::new(fiber)),
            ..Default::default()
        },
    })
}

/// Direct product of a line with the round 3-sphere carrying the Hopf
/// field (w = 1). With f = exp(t) the induced metric is flat at the
/// default radius 1.
pub fn direct_product_hopf(
    overrides: &Params,
    _options: &Options,
) -> Result<SpacetimeSpec, CatalogError> {
    let params = Arc::new(merge_params(
        "direct_product_hopf",
        &[("radius", 1.0)],
        overrides,
    )?);
    let radius = params["radius"];
    if radius <= 0.0 {
        return Err(CatalogError::BadParameter {
            entry: "direct_product_hopf".into(),
            msg: "radius must be positive".into(),
        });
    }
    let mut spec = warped_over_s3(
        "direct_product_hopf",
        "direct product of a line with the round 3-sphere, Hopf field",
        "radius",
        params,
        "1",
        ParamFn::Exponential,
        vec![],
    )?;
    spec.expected.push(Expected {
        name: "alpha(k) = 0 (geodesic)".into(),
        quantity: Measurable::AlphaK,
        rhs: Arc::new(ScalarField::new(&spec.chart, &spec.params, "0")?),
        tol: 1e-9,
        note: "w' = 0".into(),
    });
    if (spec.params["radius"] - 1.0).abs() < 1e-12 {
        spec.expected.push(Expected {
            name: "flat induced metric (f = exp)".into(),
            quantity: Measurable::RiemannMaxOfGk,
            rhs: Arc::new(ScalarField::new(&spec.chart, &spec.params, "0")?),
            tol: 1e-5,
            note: "direct product over the unit sphere".into(),
        });
    }
    Ok(spec)
}

/// De Sitter spacetime as the warped product with w(t) = r^2 cosh^2(t/r)
/// over the round sphere of radius r. For r >= 2, w'/w > -1 everywhere.
pub fn de_sitter(overrides: &Params, options: &Options) -> Result<SpacetimeSpec, CatalogError> {
    let params = Arc::new(merge_params("de_sitter", &[("r", 2.0)], overrides)?);
    let r = params["r"];
    if r <= 0.0 {
        return Err(CatalogError::BadParameter {
            entry: "de_sitter".into(),
            msg: "r must be positive".into(),
        });
    }
    // w as printed in the source construction; the variant flag selects the
    // textbook warping r cosh(t/r) for comparison instead.
    let w_expr = match options.get("w_variant").map(|s| s.as_str()) {
        None | Some("printed") => "r^2*cosh(t/r)^2",
        Some("cosh") => "r*cosh(t/r)",
        Some(other) => {
            return Err(CatalogError::BadParameter {
                entry: "de_sitter".into(),
                msg: format!("unknown w_variant `{other}` (printed | cosh)"),
            })
        }
    };
    let w_prime_over_w = match options.get("w_variant").map(|s| s.as_str()) {
        None | Some("printed") => "2*sinh(t/r)/(r*cosh(t/r))",
        _ => "sinh(t/r)/(r*cosh(t/r))",
    };
    let mut spec = warped_over_s3(
        "de_sitter",
        "de Sitter spacetime as a warped product",
        "r",
        params,
        w_expr,
        ParamFn::Exponential,
        vec![],
    )?;
    spec.expected.push(Expected {
        name: "alpha(k) = w'/w".into(),
        quantity: Measurable::AlphaK,
        rhs: Arc::new(ScalarField::new(&spec.chart, &spec.params, w_prime_over_w)?),
        tol: 1e-9,
        note: "pre-geodesic factor of the warped field".into(),
    });
    // validate w'/w > -1 on the box (guaranteed for r >= 2)
    let wpw = ScalarField::new(&spec.chart, &spec.params, w_prime_over_w)?;
    for p in spec.samples(20, 1) {
        let v = crate::fields::ScalarEval::eval(&wpw, &p)?;
        if v <= -1.0 {
            return Err(CatalogError::ValidationFailed {
                entry: "de_sitter".into(),
                check: "w'/w > -1 on the sample box".into(),
                residual: v,
                tol: -1.0,
            });
        }
    }
    Ok(spec)
}

/// Warped product over the 3-manifold (R^3, gbar) carried by a pp-wave
/// hypersurface, with gbar determined by two functions k(x, y), h(x, y)
/// whose twist h_x - k_y must not vanish on the box.
pub fn pp_truncated(overrides: &Params, options: &Options) -> Result<SpacetimeSpec, CatalogError> {
    let params = Arc::new(merge_params("pp_truncated", &[], overrides)?);
    let k_expr = options
        .get("k_fn")
        .map(|s| s.as_str())
        .unwrap_or("-y")
        .to_string();
    let h_expr = options
        .get("h_fn")
        .map(|s| s.as_str())
        .unwrap_or("x")
        .to_string();
    let w_expr = options
        .get("w")
        .map(|s| s.as_str())
        .unwrap_or("exp(t/2)")
        .to_string();

    let chart3 = Chart::new("pp-slice", &["v", "x", "y"], &[]);
    let kq = format!("({k_expr})");
    let hq = format!("({h_expr})");
    let g3 = MetricField::builder(&chart3, &params, Signature::Riemannian)
        .set(0, 0, "1")?
        .set(0, 1, &format!("-{kq}"))?
        .set(0, 2, &format!("-{hq}"))?
        .set(1, 1, &format!("1+{kq}^2"))?
        .set(1, 2, &format!("{kq}*{hq}"))?
        .set(2, 2, &format!("1+{hq}^2"))?
        .build();
    let kbar3 = Arc::new(VectorField::new(&chart3, &params, &["1", "0", "0"])?);
    let seeds3 = [
        Arc::new(VectorField::new(&chart3, &params, &[&kq, "1", "0"])?),
        Arc::new(VectorField::new(&chart3, &params, &[&hq, "0", "1"])?),
    ];

    let chart = Chart::new("pp-warped", &["t", "v", "x", "y"], &[]);
    let w2 = format!("({w_expr})^2");
    let g = MetricField::builder(&chart, &params, Signature::Lorentzian)
        .set(0, 0, "-1")?
        .set(1, 1, &w2)?
        .set(1, 2, &format!("-{w2}*{kq}"))?
        .set(1, 3, &format!("-{w2}*{hq}"))?
        .set(2, 2, &format!("{w2}*(1+{kq}^2)"))?
        .set(2, 3, &format!("{w2}*{kq}*{hq}"))?
        .set(3, 3, &format!("{w2}*(1+{hq}^2)"))?
        .build();
    let k = Arc::new(VectorField::new(
        &chart,
        &params,
        &["1", &format!("1/({w_expr})"), "0", "0"],
    )?);
    let t = Arc::new(VectorField::new(&chart, &params, &["-1", "0", "0", "0"])?);
    let tau = Arc::new(ScalarField::new(&chart, &params, "t")?);
    let seeds4 = [
        Arc::new(VectorField::new(
            &chart,
            &params,
            &["0", &format!("{kq}/({w_expr})"), &format!("1/({w_expr})"), "0"],
        )?),
        Arc::new(VectorField::new(
            &chart,
            &params,
            &["0", &format!("{hq}/({w_expr})"), "0", &format!("1/({w_expr})")],
        )?),
    ];

    let sample_box = SampleBox::new(&[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]);
    let box3 = SampleBox::new(&[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]);
    let fiber = Fiber3 {
        chart: chart3.clone(),
        g: g3.clone(),
        kbar: kbar3.clone(),
        seeds: Some(seeds3.clone()),
        orientation: 1,
        sample_box: box3,
        w: Arc::new(ScalarField::new(&chart, &params, &w_expr)?),
    };
    // twist nowhere zero on the box: h_x - k_y
    let (xi, yi) = (1usize, 2usize);
    let hx = chart3.parse(&h_expr).map_err(crate::error::GeomError::from)?.diff(xi);
    let ky = chart3.parse(&k_expr).map_err(crate::error::GeomError::from)?.diff(yi);
    let twist_bar = Expr::Sub(Box::new(hx.clone()), Box::new(ky.clone()));
    for p in sample_points(&chart3, &params, &fiber.sample_box, 12, 1) {
        let v = twist_bar.eval_value(&p, &params);
        if v.abs() < 1e-6 {
            return Err(CatalogError::ValidationFailed {
                entry: "pp_truncated".into(),
                check: "h_x - k_y nowhere zero on the box".into(),
                residual: v,
                tol: 1e-6,
            });
        }
    }
    validate_fiber("pp_truncated", &fiber, &params)?;

    let ref_point: Vec<f64> = sample_box
        .bounds
        .iter()
        .map(|(lo, hi)| 0.5 * (lo + hi) + 0.05)
        .collect();
    let seeds_dyn = [
        seeds4[0].clone() as Arc<dyn crate::fields::VectorEval>,
        seeds4[1].clone() as Arc<dyn crate::fields::VectorEval>,
    ];
    let orientation = orientation_for_negative_twist(
        g.as_ref(),
        k.as_ref(),
        t.as_ref(),
        Some(&seeds_dyn),
        &ref_point,
    )?;

    // |iota| = |h_x - k_y| / w on the 4-manifold
    let iota_abs_expr = {
        let hx4 = chart.parse(&h_expr).map_err(crate::error::GeomError::from)?.diff(2);
        let ky4 = chart.parse(&k_expr).map_err(crate::error::GeomError::from)?.diff(3);
        let diff = Expr::Sub(Box::new(hx4), Box::new(ky4));
        let w = chart.parse(&w_expr).map_err(crate::error::GeomError::from)?;
        Expr::Div(
            Box::new(Expr::Fun(crate::expr::Func::Abs, Box::new(diff))),
            Box::new(w),
        )
    };
    let expected = vec![
        Expected {
            name: "k is null".into(),
            quantity: Measurable::GramKK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-10,
            note: "construction".into(),
        },
        Expected {
            name: "|iota| = |h_x - k_y| / w".into(),
            quantity: Measurable::IotaAbs,
            rhs: Arc::new(ScalarField::from_expr(&chart, &params, iota_abs_expr)),
            tol: 1e-9,
            note: "twist of the warped product".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: "pp_truncated".into(),
        description: "warped product over the 3-manifold carried by a pp-wave hypersurface"
            .into(),
        chart,
        params,
        g,
        kind: EntryKind::Standard,
        k,
        t,
        tau,
        admissibility_tau: None,
        ell: None,
        f: ParamFn::Exponential,
        tau_c: 0.0,
        orientation,
        sample_box,
        frame_seeds: Some(seeds4),
        expected,
        negatives: vec![],
        curvature: None,
        extras: Extras {
            fiber3: Some(Arc::new(fiber)),
            ..Default::default()
        },
    })
}
