mod common;

use proptest::prelude::*;

use ztel_core::boundary_action::boundary_act;
use ztel_core::coarse::{normalize_controls, psi_inv_from_star, ControlFunction};
use ztel_core::compactification::{build_psi_at, fits_in_basic};
use ztel_core::linalg::norm;
use ztel_core::telescope::{u_map, v_map};
use ztel_core::{Automorphism, BoundaryPoint, Group, GroupElement, ProductPoint, PsiMode, PsiSpec};

fn element() -> impl Strategy<Value = GroupElement> {
    (-10i64..=10, prop::collection::vec(-10_000i64..=10_000, 2)).prop_map(|(k, g)| GroupElement::new(k, g))
}

fn small_spec() -> PsiSpec {
    let eta: Vec<f64> = (0..=12).map(|k| 3.0 + 2.0 * k as f64).collect();
    build_psi_at(vec![0.0, 0.0], &eta, PsiMode::Standard).unwrap()
}

fn point() -> impl Strategy<Value = ProductPoint> {
    (prop::collection::vec(-1e6f64..1e6, 2), -50.0f64..50.0).prop_map(|(x, r)| ProductPoint::new(x, r))
}

proptest! {
    #[test]
    fn heisenberg_group_laws(a in element(), b in element(), c in element()) {
        let group = Group::new(Automorphism::heisenberg());
        let ab_c = group.multiply(&group.multiply(&a, &b).unwrap(), &c).unwrap();
        let a_bc = group.multiply(&a, &group.multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let inv = group.inverse(&a).unwrap();
        prop_assert!(group.multiply(&inv, &a).unwrap().is_identity());
    }

    #[test]
    fn u_inverts_v(q in point()) {
        let aut = Automorphism::heisenberg();
        let back = v_map(&aut, &u_map(&aut, &q));
        prop_assert!(common::close(&back.x, &q.x, 1e-9));
    }

    #[test]
    fn slope_sign_follows_height(q in point()) {
        prop_assume!(norm(&q.x) > 1e-6 && q.r != 0.0);
        let mu = small_spec().slope(&q);
        prop_assert_eq!(mu.signum(), q.r.signum());
    }

    #[test]
    fn chart_stays_in_unit_ball(q in point()) {
        let c = small_spec().chart(&q);
        prop_assert!(norm(&c.xbar) <= 1.0);
        prop_assert!(c.s.abs() <= 1.0 && c.rho.abs() <= 1.0);
    }

    #[test]
    fn adding_points_never_shrinks_fit(pts in prop::collection::vec(point(), 1..12), extra in point()) {
        let spec = small_spec();
        let before = fits_in_basic(&spec, &pts).map(|f| f.delta).unwrap_or(f64::INFINITY);
        let mut more = pts.clone();
        more.push(extra);
        let after = fits_in_basic(&spec, &more).map(|f| f.delta).unwrap_or(f64::INFINITY);
        prop_assert!(after >= before * (1.0 - 1e-12), "{} < {}", after, before);
    }

    #[test]
    fn boundary_action_preserves_slope(a in element(), th in 0.0f64..std::f64::consts::TAU, mu in -10.0f64..10.0) {
        let b = BoundaryPoint::new(vec![th.cos(), th.sin()], mu).unwrap();
        let a = GroupElement::new(a.k.clamp(-4, 4), a.g);
        let out = boundary_act(&Automorphism::sol(), &a, &b);
        prop_assert_eq!(out.mu(), mu);
        if let BoundaryPoint::Finite { z, .. } = out {
            prop_assert!((norm(&z) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalized_control_is_sandwiched(a in 0.1f64..1.0, b in 1.0f64..5.0, x in 0.0f64..1e5) {
        let lower = ControlFunction::linear(a).unwrap();
        let upper = ControlFunction::linear(b).unwrap();
        let rho = normalize_controls(&lower, &upper).unwrap();
        prop_assert!(rho.eval(x) <= lower.eval(x) * (1.0 + 1e-12) + 1e-12);
        prop_assert!(rho.inv_eval(x) >= upper.eval(x) * (1.0 - 1e-12) - 1e-12);
    }

    #[test]
    fn psi_inv_from_star_is_monotone(slope in 3.0f64..20.0, x in 0.0f64..1e9, dx in 0.0f64..1e6) {
        let psi_inv = psi_inv_from_star(&ControlFunction::linear(slope).unwrap()).unwrap();
        prop_assert!(psi_inv.eval(x + dx) >= psi_inv.eval(x));
    }
}

#[test]
fn p_increases_along_rays() {
    let spec = small_spec();
    for dir in [[1.0, 0.0], [0.6, -0.8], [-0.28, 0.96]] {
        let mut last = 0.0;
        for i in 1..=100 {
            let rad = 1.3f64.powi(i);
            let p = spec.p_value(&[dir[0] * rad, dir[1] * rad]);
            assert!(p > last, "radius {rad}");
            last = p;
        }
    }
}
