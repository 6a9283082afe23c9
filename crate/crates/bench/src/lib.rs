//! Shared inputs for the criterion benchmarks.

use ztel_core::compactification::build_psi;
use ztel_core::nullity::eta_estimate;
use ztel_core::{Automorphism, FundamentalDomain, PsiMode, PsiSpec, Result};

/// Domain, η table and ψ for a fixture automorphism.
pub struct Pipeline {
    pub aut: Automorphism,
    pub domain: FundamentalDomain,
    pub spec: PsiSpec,
}

pub fn pipeline(aut: Automorphism, step: f64, kmax: usize, mode: PsiMode) -> Result<Pipeline> {
    let domain = FundamentalDomain::grid(aut.dim(), step)?;
    let eta = eta_estimate(&aut, &domain, kmax);
    let spec = build_psi(&aut, eta.as_slice(), mode)?;
    Ok(Pipeline { aut, domain, spec })
}
