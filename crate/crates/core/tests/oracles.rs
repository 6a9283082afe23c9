mod common;

use std::collections::{HashSet, VecDeque};

use common::{build, fixture, Built};
use ztel_core::boundary_action::{convergence_check, BoundaryAction};
use ztel_core::compactification::{build_psi, PsiSpec};
use ztel_core::linalg::norm;
use ztel_core::nullity::{decay_experiment, eta_estimate, euclidean_baseline, smallness, Family, FamilySpec};
use ztel_core::telescope::u_map;
use ztel_core::{Automorphism, BoundaryPoint, Error, FundamentalDomain, Group, GroupElement, ProductPoint, PsiMode, TelescopePoint};

/// Sphere sizes by a plain queue-based BFS with a hand-written product.
fn naive_spheres(m: [[i64; 2]; 2], m_inv: [[i64; 2]; 2], radius: usize) -> Vec<u64> {
    let apply = |a: [[i64; 2]; 2], g: (i64, i64)| (a[0][0] * g.0 + a[0][1] * g.1, a[1][0] * g.0 + a[1][1] * g.1);
    // (k, g) · s for a generator s = (ks, gs) with ks ∈ {-1, 0, 1}
    let mul = |(k, g): (i64, (i64, i64)), (ks, gs): (i64, (i64, i64))| {
        let tw = match ks {
            1 => apply(m, g),
            -1 => apply(m_inv, g),
            _ => g,
        };
        (k + ks, (tw.0 + gs.0, tw.1 + gs.1))
    };
    let gens = [(0, (1, 0)), (0, (-1, 0)), (0, (0, 1)), (0, (0, -1)), (1, (0, 0)), (-1, (0, 0))];
    let mut seen = HashSet::from([(0i64, (0i64, 0i64))]);
    let mut queue = VecDeque::from([((0i64, (0i64, 0i64)), 0usize)]);
    let mut counts = vec![0u64; radius + 1];
    while let Some((a, d)) = queue.pop_front() {
        counts[d] += 1;
        if d == radius {
            continue;
        }
        for s in gens {
            let b = mul(a, s);
            if seen.insert(b) {
                queue.push_back((b, d + 1));
            }
        }
    }
    counts
}

#[test]
fn ball_counts_match_naive_bfs() {
    let heis = Group::new(Automorphism::heisenberg()).growth_series(7, 1_000_000).unwrap();
    assert_eq!(heis, naive_spheres([[1, 1], [0, 1]], [[1, -1], [0, 1]], 7));
    let sol = Group::new(Automorphism::sol()).growth_series(7, 1_000_000).unwrap();
    assert_eq!(sol, naive_spheres([[2, 1], [1, 1]], [[1, -1], [-1, 2]], 7));
}

#[test]
fn flat_spheres_follow_the_octahedral_formula() {
    let counts = Group::new(Automorphism::identity(2)).growth_series(10, 1_000_000).unwrap();
    for (r, &c) in counts.iter().enumerate().skip(1) {
        assert_eq!(c, 4 * (r as u64).pow(2) + 2);
    }
}

#[test]
fn eta_growth_rates() {
    let d = FundamentalDomain::grid(2, 0.25).unwrap();
    let heis = eta_estimate(&Automorphism::heisenberg(), &d, 24);
    assert!(heis.at(0) >= 3.0);
    // v(t^{±k} C_Y) spans A^{∓(k+1)} of the unit square plus one unit of height
    for k in 8..=24 {
        let shear = ((k + 1) as f64).hypot(1.0);
        let bound = (0..=k).map(|j| ((j + 1) as f64).hypot(1.0) + 1.0 + 1.0).fold(0.0, f64::max) + k as f64;
        assert!(heis.at(k) <= bound + 1e-9 && heis.at(k) >= shear, "k = {k}");
    }
    let sol = eta_estimate(&Automorphism::sol(), &d, 12);
    let lam = (3.0 + 5f64.sqrt()) / 2.0;
    let ratios: Vec<f64> = (1..=12).map(|k| sol.at(k) / lam.powi(k as i32)).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(lo > 1.0 && hi < 10.0, "{ratios:?}");
}

#[test]
fn sol_eta_is_dominated() {
    let cfg = fixture("sol");
    let d = FundamentalDomain::grid(2, cfg.step).unwrap();
    let eta = eta_estimate(&cfg.automorphism, &d, cfg.kmax);
    assert!(build_psi(&cfg.automorphism, eta.as_slice(), PsiMode::Standard).is_ok());
    let fast: Vec<f64> = (0..=20).map(|k| 3.5f64.powi(k)).collect();
    assert!(matches!(build_psi(&cfg.automorphism, &fast, PsiMode::Standard), Err(Error::EtaTooFast { .. })));
}

#[test]
fn smallness_examples() {
    let Built { cfg, domain, spec, .. } = build("heisenberg");
    let aut = &cfg.automorphism;
    assert!(smallness(&spec, aut, &GroupElement::identity(2), &domain) > 0.5);
    let d20 = smallness(&spec, aut, &GroupElement::t_power(2, 20), &domain);
    let mu_min = domain
        .straightened(aut, &GroupElement::t_power(2, 20))
        .iter()
        .map(|q| spec.slope(q))
        .fold(f64::INFINITY, f64::min);
    assert!(d20 <= (1.0 / 20.0f64).max(1.0 / mu_min) + 1e-15);
    let y = |m| GroupElement::translation(vec![0, m]);
    assert!(smallness(&spec, aut, &y(10_000), &domain) < smallness(&spec, aut, &y(100), &domain));
}

#[test]
fn euclidean_baseline_shapes() {
    let Built { cfg, domain, spec, .. } = build("heisenberg");
    let t = [FamilySpec::new(Family::TPowers, vec![8, 16, 32, 64], None)];
    let eucl = euclidean_baseline(&cfg.automorphism, &domain, &t).unwrap();
    let radii: Vec<f64> = eucl.series("t").iter().map(|e| e.1).collect();
    assert!(radii.iter().all(|&r| r > 0.4), "{radii:?}");
    assert!(radii.iter().cloned().fold(0.0, f64::max) / radii.iter().cloned().fold(f64::INFINITY, f64::min) < 1.2);
    let y = [FamilySpec::new(Family::Axis { axis: 1 }, vec![10, 100, 1000, 10_000], None)];
    let ys: Vec<f64> = euclidean_baseline(&cfg.automorphism, &domain, &y).unwrap().series("axis1").iter().map(|e| e.1).collect();
    assert!(ys.windows(2).all(|w| w[1] < w[0]) && ys[3] < 1e-3, "{ys:?}");
    // on the direct product both models decay along t
    let flat = Automorphism::identity(2);
    let eta = eta_estimate(&flat, &domain, 24);
    let flat_spec = build_psi(&flat, eta.as_slice(), PsiMode::Standard).unwrap();
    let slope = decay_experiment(&flat_spec, &flat, &domain, &t).unwrap();
    let eflat = euclidean_baseline(&flat, &domain, &t).unwrap();
    for c in [slope, eflat] {
        let s: Vec<f64> = c.series("t").iter().map(|e| e.1).collect();
        assert!(s.windows(2).all(|w| w[1] < w[0]) && s[3] < 0.05, "{s:?}");
    }
    let _ = spec;
}

#[test]
fn product_fixture_passes_its_verdicts() {
    let Built { cfg, domain, spec, .. } = build("product");
    let curve = decay_experiment(&spec, &cfg.automorphism, &domain, &cfg.families).unwrap();
    assert!(curve.verdicts(&cfg.families, cfg.spearman).iter().all(|v| v.pass));
}

/// Records the plateau that keeps fixed-k mixed families out of the Sol fixture:
/// in exponential mode the pole value 1/k wins across the whole i64 range.
#[test]
fn sol_exponential_mixed_family_plateaus_at_pole_value() {
    let Built { cfg, domain, spec, .. } = build("sol");
    assert_eq!(spec.mode, PsiMode::Exponential);
    let mixed = [FamilySpec::new(Family::Mixed { k: 3, axis: 0 }, vec![3, 3i64.pow(20), 3i64.pow(39)], None)];
    let curve = decay_experiment(&spec, &cfg.automorphism, &domain, &mixed).unwrap();
    for e in curve.series("mixed_k3_axis0") {
        assert!((e.1 - 1.0 / 3.0).abs() < 1e-12, "{e:?}");
    }
}

fn heisenberg_t_sequence(spec: &PsiSpec, aut: &Automorphism, z: &[f64]) -> Vec<TelescopePoint> {
    (3..=15)
        .map(|r| {
            let w: Vec<f64> = z.iter().map(|c| c * spec.distance_for_p(r as f64 / 3.0)).collect();
            u_map(aut, &ProductPoint::new(w, r as f64))
        })
        .collect()
}

#[test]
fn identity_convergence_reproduces_input_deviation() {
    let Built { cfg, spec, .. } = build("heisenberg");
    let aut = &cfg.automorphism;
    let z = [0.6, 0.8];
    let seq = heisenberg_t_sequence(&spec, aut, &z);
    let limit = BoundaryPoint::new(z.to_vec(), 3.0).unwrap();
    let report = convergence_check(&spec, &BoundaryAction::new(aut), &GroupElement::identity(2), &seq, &limit).unwrap();
    let input: Vec<f64> = seq
        .iter()
        .map(|p| spec.chart(&ztel_core::telescope::v_map(aut, p)).distance_to(&limit))
        .collect();
    assert_eq!(report.deviations, input);
}

#[test]
fn wrong_boundary_map_is_caught_by_convergence() {
    let Built { cfg, spec, .. } = build("heisenberg");
    let aut = &cfg.automorphism;
    let z = [0.6, 0.8];
    let seq = heisenberg_t_sequence(&spec, aut, &z);
    let limit = BoundaryPoint::new(z.to_vec(), 3.0).unwrap();
    let t = GroupElement::t_power(2, 1);
    let good = convergence_check(&spec, &BoundaryAction::new(aut), &t, &seq, &limit).unwrap();
    let swapped = BoundaryAction::with_maps(aut, aut.real_matrix().clone(), aut.real_inverse_matrix().clone());
    let bad = convergence_check(&spec, &swapped, &t, &seq, &limit).unwrap();
    assert!(good.final_deviation < 0.05 && bad.final_deviation > 0.5, "{} {}", good.final_deviation, bad.final_deviation);
}

#[test]
fn diverging_input_is_rejected() {
    let Built { cfg, spec, .. } = build("heisenberg");
    let seq: Vec<TelescopePoint> = (1..=12).map(|i| TelescopePoint::new(vec![i as f64, 0.0], 0.0)).collect();
    let wrong_limit = BoundaryPoint::new(vec![0.0, 1.0], 0.0).unwrap();
    let r = convergence_check(&spec, &BoundaryAction::new(&cfg.automorphism), &GroupElement::identity(2), &seq, &wrong_limit);
    assert!(matches!(r, Err(Error::NotConverging { .. })));
}

#[test]
fn fixtures_parse_and_psi_dumps() {
    for name in ["heisenberg", "sol", "product"] {
        let Built { spec, .. } = build(name);
        let json = spec.to_json();
        assert!(json["envelope"].as_array().unwrap().len() > 1);
        assert!(norm(&spec.x0) == 0.0);
    }
}
