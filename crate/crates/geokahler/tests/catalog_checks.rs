//! Per-entry checks: every expected closed-form value must reproduce at
//! every sample of the entry's box, and the construction suites must pass
//! (or fail, where the entry documents a negative).

use geokahler::catalog::{self, Measurable, Options, SpacetimeSpec};
use geokahler::fields::ScalarEval;
use geokahler::jstruct;
use geokahler::Params;

fn entry(id: &str) -> SpacetimeSpec {
    catalog::build(id, &Params::new(), &Options::new()).expect(id)
}

fn check_expected(spec: &SpacetimeSpec, samples: usize) {
    let pts = spec.samples(samples, 0);
    assert!(
        pts.len() >= samples.min(20),
        "{}: not enough samples in box",
        spec.id
    );
    for exp in &spec.expected {
        let mut worst = 0.0_f64;
        for p in &pts {
            let lhs = spec.measure(&exp.quantity, p).unwrap_or_else(|e| {
                panic!("{}: {} failed at {:?}: {}", spec.id, exp.name, p, e)
            });
            let rhs = exp.rhs.eval(p).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(
            worst < exp.tol,
            "{}: expected `{}` off by {:.3e} (tol {:.1e})",
            spec.id,
            exp.name,
            worst,
            exp.tol
        );
    }
}

#[test]
fn direct_product_hopf_expected_values() {
    check_expected(&entry("direct_product_hopf"), 25);
}

#[test]
fn de_sitter_expected_values() {
    check_expected(&entry("de_sitter"), 25);
}

#[test]
fn pp_truncated_expected_values() {
    check_expected(&entry("pp_truncated"), 25);
}

#[test]
fn plane_wave_expected_values() {
    check_expected(&entry("plane_wave"), 25);
}

#[test]
fn kerr_expected_values() {
    check_expected(&entry("kerr"), 25);
}

#[test]
fn nut_expected_values() {
    check_expected(&entry("nut"), 25);
}

#[test]
fn conformal_kerr_expected_values() {
    check_expected(&entry("conformal_kerr"), 25);
}

#[test]
fn lie_group_expected_values() {
    check_expected(&entry("solvable_lie_group"), 25);
}

#[test]
fn skr_expected_values() {
    check_expected(&entry("skr"), 25);
}

#[test]
fn skr_constp_expected_values() {
    check_expected(&entry("skr_constp"), 25);
}

#[test]
fn skr_kahler_expected_values() {
    check_expected(&entry("skr_kahler"), 25);
}

#[test]
fn admissible_entries_pass_admissibility() {
    for id in [
        "direct_product_hopf",
        "de_sitter",
        "pp_truncated",
        "plane_wave",
        "conformal_kerr",
        "solvable_lie_group",
        "skr",
        "skr_constp",
        "skr_kahler",
    ] {
        let spec = entry(id);
        let acs = spec.acs();
        for p in spec.samples(8, 2) {
            let rep = jstruct::check_admissible(
                &acs,
                spec.tau.as_ref(),
                spec.ell.as_deref().map(|e| e as &dyn ScalarEval),
                &p,
                1e-7,
            )
            .unwrap();
            assert!(
                rep.pass(),
                "{id} admissibility failed at {:?}: integ {:?} shear {:.2e} nij {:.2e} near {:?} gkt {:.2e} gkk {:.2e} notes {:?}",
                p,
                rep.integrability.bracket_residuals,
                rep.integrability.shear_residual,
                rep.nijenhuis_max,
                rep.near_gradient_residual,
                rep.grad_gkt_h_residual,
                rep.grad_gkk_h_residual,
                rep.notes,
            );
        }
    }
}

#[test]
fn kerr_fails_admissibility_as_documented() {
    let spec = entry("kerr");
    let acs = spec.acs();
    let tau = spec.admissibility_tau.as_ref().unwrap();
    let mut failures = 0;
    for p in spec.samples(8, 2) {
        let rep = jstruct::check_admissible(&acs, tau.as_ref(), None, &p, 1e-7).unwrap();
        if !rep.pass() {
            failures += 1;
        }
    }
    assert!(failures > 0, "kerr unexpectedly admissible");
}

#[test]
fn kahler_verification_passes_on_catalog() {
    for id in [
        "direct_product_hopf",
        "de_sitter",
        "pp_truncated",
        "plane_wave",
        "kerr",
        "nut",
        "conformal_kerr",
        "solvable_lie_group",
        "skr",
        "skr_constp",
    ] {
        let spec = entry(id);
        let cand = spec.candidate(None);
        let pts = spec.samples(20, 0);
        let rep = cand.verify(&pts).unwrap();
        assert!(
            rep.maxima.inside > 0,
            "{id}: no in-region samples out of {}",
            pts.len()
        );
        assert!(
            rep.maxima.d_omega < 1e-8,
            "{id}: d omega = {:.3e}",
            rep.maxima.d_omega
        );
        assert!(
            rep.maxima.j_compat < 1e-9,
            "{id}: J-compat = {:.3e}",
            rep.maxima.j_compat
        );
        assert!(
            rep.maxima.min_eig > 0.0,
            "{id}: min eig = {:.3e}",
            rep.maxima.min_eig
        );
        assert!(
            rep.maxima.nijenhuis < 1e-7,
            "{id}: Nijenhuis = {:.3e}",
            rep.maxima.nijenhuis
        );
        assert!(
            rep.maxima.nabla_j < 1e-5,
            "{id}: nabla_K J = {:.3e}",
            rep.maxima.nabla_j
        );
    }
}

#[test]
fn global_entries_have_no_outside_samples() {
    // these entries induce a Kahler metric on their whole box
    for id in ["nut", "plane_wave", "solvable_lie_group", "de_sitter", "skr"] {
        let spec = entry(id);
        let cand = spec.candidate(None);
        let pts = spec.samples(30, 0);
        let rep = cand.verify(&pts).unwrap();
        assert_eq!(rep.maxima.outside, 0, "{id} had out-of-region samples");
    }
}

#[test]
fn lie_group_negatives() {
    let spec = entry("solvable_lie_group");
    let g = spec.g.as_ref();
    for p in spec.samples(5, 3) {
        let pre =
            geokahler::optics::pregeodesic_factor(g, spec.k.as_ref(), &p, 1e-8).unwrap();
        assert!(pre.geodesic_residual > 0.1, "k unexpectedly geodesic");
        assert!(pre.alpha.is_none(), "k unexpectedly pre-geodesic");
        let killing = spec
            .measure(&Measurable::KillingResidualK, &p)
            .unwrap();
        assert!(killing > 0.1, "k unexpectedly Killing");
    }
}

#[test]
fn rapid_rotation_guard() {
    let mut params = Params::new();
    params.insert("a".into(), 0.5);
    params.insert("m".into(), 1.0);
    let msg = match catalog::build("kerr", &params, &Options::new()) {
        Err(e) => e.to_string(),
        Ok(_) => panic!("slow rotation unexpectedly accepted"),
    };
    assert!(msg.contains("a > m"), "unexpected message: {msg}");
}
