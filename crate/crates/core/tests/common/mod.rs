#![allow(dead_code)]

use std::path::PathBuf;

use ztel_core::compactification::build_psi;
use ztel_core::nullity::{eta_estimate, EtaTable};
use ztel_core::{ExperimentConfig, FundamentalDomain, PsiSpec};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.toml"))
}

pub fn fixture(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_path(&fixture_path(name)).expect("fixture parses")
}

pub struct Built {
    pub cfg: ExperimentConfig,
    pub domain: FundamentalDomain,
    pub eta: EtaTable,
    pub spec: PsiSpec,
}

pub fn build(name: &str) -> Built {
    let cfg = fixture(name);
    let domain = FundamentalDomain::grid(cfg.automorphism.dim(), cfg.step).unwrap();
    let eta = eta_estimate(&cfg.automorphism, &domain, cfg.kmax);
    let spec = build_psi(&cfg.automorphism, eta.as_slice(), cfg.mode).unwrap();
    Built { cfg, domain, eta, spec }
}

/// `(φ^{-k}(y + g), r + k)`: the action on `R^n × R` that `v` intertwines at integer levels.
pub fn product_act(cfg: &ExperimentConfig, a: &ztel_core::GroupElement, q: &ztel_core::ProductPoint) -> ztel_core::ProductPoint {
    let shifted: Vec<f64> = q.x.iter().zip(&a.g).map(|(y, &g)| y + g as f64).collect();
    ztel_core::ProductPoint::new(cfg.automorphism.apply_real(-a.k, &shifted), q.r + a.k as f64)
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}
