//! The gravitational plane wave with H(u, x, y) = -x^2 - y^2 and the null
//! field Z built from k = -y, h = x. Both distinguished fields are null;
//! the construction is the standard one with tau = u and f = exp(u).

use std::sync::Arc;

use super::{
    merge_params, orientation_matching_seeds, EntryKind, Expected, Extras, Measurable, Options,
    SpacetimeSpec,
};
use crate::chart::Chart;
use crate::error::CatalogError;
use crate::expr::Params;
use crate::fields::{MetricField, ScalarField, Signature, VectorField};
use crate::kahler::ParamFn;
use crate::sample::SampleBox;

pub fn plane_wave(overrides: &Params, _options: &Options) -> Result<SpacetimeSpec, CatalogError> {
    let params = Arc::new(merge_params("plane_wave", &[], overrides)?);
    let chart = Chart::new("plane-wave", &["u", "v", "x", "y"], &[]);
    // g = H du^2 + 2 du dv + dx^2 + dy^2 with H = -x^2 - y^2
    let g = MetricField::builder(&chart, &params, Signature::Lorentzian)
        .set(0, 0, "-x^2 - y^2")?
        .set(0, 1, "1")?
        .set(2, 2, "1")?
        .set(3, 3, "1")?
        .build();
    // Z = 1/2 (H + k^2 + h^2) d_v - d_u + k d_x + h d_y with k = -y, h = x;
    // the v-component cancels identically for this H.
    let k = Arc::new(VectorField::new(&chart, &params, &["-1", "0", "-y", "x"])?);
    // t = grad(u) = d_v (null), so ell = 1 is supplied rather than recovered.
    let t = Arc::new(VectorField::new(&chart, &params, &["0", "1", "0", "0"])?);
    let tau = Arc::new(ScalarField::new(&chart, &params, "u")?);
    let ell = Arc::new(ScalarField::new(&chart, &params, "1")?);
    // the orthonormal H frame of the construction
    let seeds = [
        Arc::new(VectorField::new(&chart, &params, &["0", "-y", "1", "0"])?),
        Arc::new(VectorField::new(&chart, &params, &["0", "x", "0", "1"])?),
    ];

    let sample_box = SampleBox::new(&[(-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5)]);
    let ref_point = vec![0.1, 0.2, 0.3, 0.4];
    let orientation = orientation_matching_seeds(
        g.as_ref(),
        k.as_ref(),
        t.as_ref(),
        seeds[0].as_ref(),
        seeds[1].as_ref(),
        &ref_point,
    )?;

    let expected = vec![
        Expected {
            name: "Z is null".into(),
            quantity: Measurable::GramKK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-12,
            note: "construction".into(),
        },
        Expected {
            name: "iota(Z) = -2".into(),
            quantity: Measurable::Iota,
            rhs: Arc::new(ScalarField::new(&chart, &params, "-2")?),
            tol: 1e-12,
            note: "k_y - h_x for k = -y, h = x".into(),
        },
        Expected {
            name: "Z geodesic".into(),
            quantity: Measurable::GeodesicResidualK,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-10,
            note: "geodesic conditions for this H, k, h".into(),
        },
        Expected {
            name: "shear of Z vanishes (sigma1)".into(),
            quantity: Measurable::Sigma1K,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-10,
            note: "1/2 (h_y - k_x) = 0".into(),
        },
        Expected {
            name: "shear of Z vanishes (sigma2)".into(),
            quantity: Measurable::Sigma2K,
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-10,
            note: "1/2 (k_y + h_x) = 0".into(),
        },
        Expected {
            name: "holomorphicity equation for k".into(),
            // k k_xy + 2 k_x k_y + h k_yy with k = -y, h = x
            quantity: Measurable::Field(Arc::new(ScalarField::new(
                &chart,
                &params,
                "(-y)*0 + 2*0*(-1) + x*0",
            )?)),
            rhs: Arc::new(ScalarField::new(&chart, &params, "0")?),
            tol: 1e-15,
            note: "k k_xy + 2 k_x k_y + h k_yy".into(),
        },
    ];

    Ok(SpacetimeSpec {
        id: "plane_wave".into(),
        description: "gravitational plane wave with H = -x^2 - y^2".into(),
        chart,
        params,
        g,
        kind: EntryKind::Standard,
        k,
        t,
        tau,
        admissibility_tau: None,
        ell: Some(ell),
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
