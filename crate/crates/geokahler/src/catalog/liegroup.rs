//! A solvable Lie group with left-invariant Lorentzian metric whose
//! distinguished fields have nonzero shear. The bracket relations of the
//! ordered orthonormal basis (k, t, x, y) are
//!
//!     [k, x] = y,  [t, y] = y,  [t, k] = k,  [x, y] = y + r k,
//!
//! realized globally on coordinates (a, b, w1, w2) of a semidirect product
//! R^2 x R^2, where exp of the adjoint action has the closed form
//! e^{a + b/2} (cosh(delta b) I + sinh(delta b)/delta N) with
//! N = [[-1/2, r], [-1, 1/2]] and delta = sqrt(1/4 - r).

use std::sync::Arc;

use super::{
    merge_params, orientation_matching_seeds, validate_residual, EntryKind, Expected, Extras,
    Measurable, NegativeCheck, Options, SpacetimeSpec,
};
use crate::chart::Chart;
use crate::error::CatalogError;
use crate::expr::Params;
use crate::fields::{MetricEval, MetricField, ScalarField, Signature, VectorField, VectorEval};
use crate::kahler::ParamFn;
use crate::sample::{sample_points, SampleBox};
use crate::tensor::{lie_bracket, vec_max_abs};

pub fn solvable_lie_group(
    overrides: &Params,
    _options: &Options,
) -> Result<SpacetimeSpec, CatalogError> {
    let mut params = merge_params("solvable_lie_group", &[("r", -1.0)], overrides)?;
    let r = params["r"];
    if r == 0.0 || r >= 0.25 {
        return Err(CatalogError::BadParameter {
            entry: "solvable_lie_group".into(),
            msg: format!(
                "r must be nonzero and below 1/4 for the hyperbolic closed form; got {r}"
            ),
        });
    }
    let delta = (0.25 - r).sqrt();
    params.insert("delta".to_string(), delta);
    let params = Arc::new(params);

    let chart = Chart::new("solvable-group", &["a", "b", "w1", "w2"], &["r", "delta"]);
    // Phi = e^{a+b/2} (cosh(delta b) I + sinh(delta b)/delta N)
    let ep = "exp(a + b/2)";
    let ch = "cosh(delta*b)";
    let sh = "(sinh(delta*b)/delta)";
    let phi11 = format!("{ep}*({ch} - {sh}/2)");
    let phi12 = format!("{ep}*(r*{sh})");
    let phi21 = format!("{ep}*(-{sh})");
    let phi22 = format!("{ep}*({ch} + {sh}/2)");
    // Psi = Phi^{-1} = e^{-a-b/2} (cosh I - sinh/delta N)
    let em = "exp(-a - b/2)";
    let psi11 = format!("{em}*({ch} + {sh}/2)");
    let psi12 = format!("{em}*(-(r*{sh}))");
    let psi21 = format!("{em}*({sh})");
    let psi22 = format!("{em}*({ch} - {sh}/2)");

    // g = -da^2 + db^2 + Khat^2 + Yhat^2 with Khat = Psi11 dw1 + Psi12 dw2,
    // Yhat = Psi21 dw1 + Psi22 dw2
    let g = MetricField::builder(&chart, &params, Signature::Lorentzian)
        .set(0, 0, "-1")?
        .set(1, 1, "1")?
        .set(2, 2, &format!("({psi11})^2 + ({psi21})^2"))?
        .set(2, 3, &format!("({psi11})*({psi12}) + ({psi21})*({psi22})"))?
        .set(3, 3, &format!("({psi12})^2 + ({psi22})^2"))?
        .build();

    let k = Arc::new(VectorField::new(
        &chart,
        &params,
        &["0", "0", &phi11, &phi21],
    )?);
    let t = Arc::new(VectorField::new(&chart, &params, &["1", "0", "0", "0"])?);
    let x = Arc::new(VectorField::new(&chart, &params, &["0", "1", "0", "0"])?);
    let y = Arc::new(VectorField::new(
        &chart,
        &params,
        &["0", "0", &phi12, &phi22],
    )?);
    // t_flat = -da, so t = grad(-a) with ell = 1
    let tau = Arc::new(ScalarField::new(&chart, &params, "-a")?);

    let sample_box = SampleBox::new(&[(-0.8, 0.8), (-0.8, 0.8), (-1.0, 1.0), (-1.0, 1.0)]);

    // validate all bracket relations of the left-invariant frame, and the
    // Gram matrix, at several points
    let pts = sample_points(&chart, &params, &sample_box, 5, 11);
    for p in &pts {
        let kv = k.eval(p)?;
        let yv = y.eval(p)?;
        let checks: Vec<(&str, Vec<f64>, Vec<f64>)> = vec![
            ("[k,x] = y", lie_bracket(k.as_ref(), x.as_ref(), p)?, yv.clone()),
            ("[t,y] = y", lie_bracket(t.as_ref(), y.as_ref(), p)?, yv.clone()),
            ("[t,k] = k", lie_bracket(t.as_ref(), k.as_ref(), p)?, kv.clone()),
            (
                "[x,y] = y + r k",
                lie_bracket(x.as_ref(), y.as_ref(), p)?,
                yv.iter().zip(&kv).map(|(a, b)| a + r * b).collect(),
            ),
            ("[k,y] = 0", lie_bracket(k.as_ref(), y.as_ref(), p)?, vec![0.0; 4]),
            ("[t,x] = 0", lie_bracket(t.as_ref(), x.as_ref(), p)?, vec![0.0; 4]),
        ];
        for (name, got, want) in checks {
            let resid: Vec<f64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
            validate_residual("solvable_lie_group", name, vec_max_abs(&resid), 1e-9)?;
        }
        // orthonormality: g(k,k) = 1, g(t,t) = -1, g(x,x) = g(y,y) = 1,
        // all mixed products zero
        let gj = g.eval_jet(p, 0)?;
        let fields = [(&k, 1.0), (&t, -1.0), (&x, 1.0), (&y, 1.0)];
        for (i, (u, len)) in fields.iter().enumerate() {
            let uj = u.eval_jet(p, 0)?;
            validate_residual(
                "solvable_lie_group",
                "frame orthonormality (diagonal)",
                gj.bilinear(&uj, &uj).v - len,
                1e-9,
            )?;
            for (v, _) in fields.iter().skip(i + 1) {
                let vj = v.eval_jet(p, 0)?;
                validate_residual(
                    "solvable_lie_group",
                    "frame orthonormality (off-diagonal)",
                    gj.bilinear(&uj, &vj).v,
                    1e-9,
                )?;
            }
        }
    }

    let ref_point = vec![0.2, -0.3, 0.5, 0.7];
    let orientation = orientation_matching_seeds(
        g.as_ref(),
        k.as_ref(),
        t.as_ref(),
        x.as_ref(),
        y.as_ref(),
        &ref_point,
    )?;

    let expected = vec![
        Expected {
            name: "sigma2(k) = -1".into(),
            quantity: Measurable::Sigma2K,
            rhs: Arc::new(ScalarField::new(&chart, &params, "-1")?),
            tol: 1e-9,
            note: "nonzero shear".into(),
        },
        Expected {
            name: "sigma1(k) = 0".into(),
            quantity: Measurable::Sigma1K,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-9,
            note: "nonzero shear".into(),
        },
        Expected {
            name: "sigma1(t) = -1".into(),
            quantity: Measurable::Sigma1T,
            rhs: Arc::new(ScalarField::new(&chart, &params, "-1")?),
            tol: 1e-9,
            note: "nonzero shear".into(),
        },
        Expected {
            name: "sigma2(t) = 0".into(),
            quantity: Measurable::Sigma2T,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-9,
            note: "nonzero shear".into(),
        },
        Expected {
            name: "iota = r".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(&chart, &params, "r")?),
            tol: 1e-9,
            note: "g(k, [x, y]) on the left-invariant frame".into(),
        },
        Expected {
            name: "|iota| = |r|".into(),
            quantity: Measurable::IotaAbs,
            rhs: Arc::new(ScalarField::new(&chart, &params, "abs(r)")?),
            tol: 1e-9,
            note: "twist function".into(),
        },
        Expected {
            name: "t geodesic".into(),
            quantity: Measurable::GeodesicResidualT,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-9,
            note: "metric adjoint of ad_t kills the frame".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: "solvable_lie_group".into(),
        description: "left-invariant metric on a solvable Lie group with nonzero shear".into(),
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
        frame_seeds: Some([x, y]),
        expected,
        negatives: vec![
            NegativeCheck::KGeodesic,
            NegativeCheck::KPregeodesic,
            NegativeCheck::KKilling,
        ],
        curvature: None,
        extras: Extras::default(),
    })
}
