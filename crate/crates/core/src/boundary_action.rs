//! The action of `Z^n ⋊_φ Z` on the suspension boundary `SZ`.
//!
//! Translations fix the sphere at infinity, so they act trivially. The
//! generator `t` acts by the suspension of the projectivized map
//! `h = φ⁻¹`: `t · ⟨z, μ⟩ = ⟨h z / |h z|, μ⟩`. Both poles are fixed.

use crate::algebra::{Automorphism, GroupElement};
use crate::compactification::{BoundaryPoint, PsiSpec};
use crate::error::{Error, Result};
use crate::linalg::{dist, normalize, RealMatrix};
use crate::telescope::{act, v_map, TelescopePoint};

/// Input sequences must approach their limit at least this closely.
pub const CONVERGENCE_TOLERANCE: f64 = 0.1;
/// Agreement demanded by [`BoundaryAction::relator_check`].
pub const RELATOR_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct BoundaryAction {
    aut: Automorphism,
    h: RealMatrix,
    h_inv: RealMatrix,
}

impl BoundaryAction {
    pub fn new(aut: &Automorphism) -> Self {
        BoundaryAction {
            aut: aut.clone(),
            h: aut.real_inverse_matrix().clone(),
            h_inv: aut.real_matrix().clone(),
        }
    }

    /// Uses `h` for `t` and `h_inv` for `t⁻¹` as given, without checking that
    /// they are inverse to each other or related to `φ`.
    pub fn with_maps(aut: &Automorphism, h: RealMatrix, h_inv: RealMatrix) -> Self {
        BoundaryAction { aut: aut.clone(), h, h_inv }
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.aut
    }

    pub fn act(&self, a: &GroupElement, b: &BoundaryPoint) -> BoundaryPoint {
        match b {
            BoundaryPoint::Finite { z, mu } => {
                let m = if a.k >= 0 { &self.h } else { &self.h_inv };
                let mut z = z.clone();
                for _ in 0..a.k.unsigned_abs() {
                    z = m.mul_vec(&z);
                    normalize(&mut z);
                }
                BoundaryPoint::Finite { z, mu: *mu }
            }
            pole => pole.clone(),
        }
    }

    /// Checks `t⁻¹ · (g · (t · b)) = φ(g) · b`, evaluating the left side one
    /// generator at a time.
    pub fn relator_check(&self, g: &GroupElement, b: &BoundaryPoint) -> Result<bool> {
        let n = self.aut.dim();
        let t = GroupElement::t_power(n, 1);
        let t_inv = GroupElement::t_power(n, -1);
        let lhs = self.act(&t_inv, &self.act(g, &self.act(&t, b)));
        let conj = GroupElement::new(g.k, self.aut.apply(1, &g.g)?);
        Ok(boundary_distance(&lhs, &self.act(&conj, b)) <= RELATOR_TOLERANCE)
    }
}

pub fn boundary_act(aut: &Automorphism, a: &GroupElement, b: &BoundaryPoint) -> BoundaryPoint {
    BoundaryAction::new(aut).act(a, b)
}

pub fn relator_check(aut: &Automorphism, g: &GroupElement, b: &BoundaryPoint) -> Result<bool> {
    BoundaryAction::new(aut).relator_check(g, b)
}

/// Distance between boundary points: sup of the direction and slope gaps,
/// with poles at distance 0 from themselves and `∞` from everything else.
pub fn boundary_distance(a: &BoundaryPoint, b: &BoundaryPoint) -> f64 {
    match (a, b) {
        (BoundaryPoint::Finite { z: z1, mu: m1 }, BoundaryPoint::Finite { z: z2, mu: m2 }) => {
            dist(z1, z2).max((m1 - m2).abs())
        }
        (BoundaryPoint::PlusPole, BoundaryPoint::PlusPole) | (BoundaryPoint::MinusPole, BoundaryPoint::MinusPole) => 0.0,
        _ => f64::INFINITY,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Chart distance of `v(a · ⌈xᵢ, ⌊rᵢ⌋⌉)` from `a · limit`, per index.
    pub deviations: Vec<f64>,
    /// Maximum over the last quarter of the sequence.
    pub tail_max: f64,
    pub final_deviation: f64,
}

fn quarter(len: usize) -> usize {
    (len / 4).max(1)
}

/// Measures how closely `a · ⌈xᵢ, ⌊rᵢ⌋⌉` follows `a · limit`.
///
/// The input sequence, with heights rounded down to integers, must itself
/// approach `limit`: its final deviation is below
/// [`CONVERGENCE_TOLERANCE`] and the worst deviation over the last quarter
/// does not exceed the worst over the first quarter.
pub fn convergence_check(
    spec: &PsiSpec,
    action: &BoundaryAction,
    a: &GroupElement,
    seq: &[TelescopePoint],
    limit: &BoundaryPoint,
) -> Result<ConvergenceReport> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("convergence_check needs a nonempty sequence".into()));
    }
    let aut = action.automorphism();
    let integral: Vec<TelescopePoint> = seq.iter().map(TelescopePoint::integral).collect();
    let input: Vec<f64> = integral.iter().map(|p| spec.chart(&v_map(aut, p)).distance_to(limit)).collect();
    let q = quarter(input.len());
    let head = input[..q].iter().copied().fold(0.0, f64::max);
    let tail = input[input.len() - q..].iter().copied().fold(0.0, f64::max);
    let last = *input.last().expect("nonempty");
    if !(last < CONVERGENCE_TOLERANCE && tail <= head + 1e-12) {
        return Err(Error::NotConverging { deviation: last });
    }
    let target = action.act(a, limit);
    let deviations: Vec<f64> =
        integral.iter().map(|p| spec.chart(&v_map(aut, &act(aut, a, p))).distance_to(&target)).collect();
    let tail_max = deviations[deviations.len() - q..].iter().copied().fold(0.0, f64::max);
    let final_deviation = *deviations.last().expect("nonempty");
    Ok(ConvergenceReport { deviations, tail_max, final_deviation })
}

/// A sequence in the telescope with its expected boundary limit and the
/// group element to push it through.
#[derive(Clone, Debug)]
pub struct ProbeSequence {
    pub label: String,
    pub element: GroupElement,
    pub points: Vec<TelescopePoint>,
    pub limit: BoundaryPoint,
}

/// Three standard probes along the direction `z = (0.6, 0.8, 0, …)`:
///
/// * `translation`: `xᵢ = i·z` at height 0, pushed by the translation `(3, −2, 0, …)`;
///   the limit is `⟨z, 0⟩`.
/// * `t`: heights `3, …, 15` with `v`-images at slope exactly `μ`, pushed by `t`.
/// * `t_inverse_translation`: heights `−3, …, −15` at slope `−μ`, pushed by `t⁻¹e₁`.
///
/// `μ = 3` unless the distances needed for that slope would leave `f64`.
pub fn probe_sequences(spec: &PsiSpec, aut: &Automorphism) -> Result<Vec<ProbeSequence>> {
    let n = aut.dim();
    let mut z = vec![0.0; n];
    z[0] = 0.6;
    if n > 1 {
        z[1] = 0.8;
    }
    normalize(&mut z);
    let mut shift = vec![0i64; n];
    shift[0] = 3;
    if n > 1 {
        shift[1] = -2;
    }
    let radial: Vec<TelescopePoint> = (0..=20)
        .map(|j| {
            let i = 10f64.powf(1.0 + j as f64 / 4.0);
            TelescopePoint::new(z.iter().map(|c| c * i).collect(), 0.0)
        })
        .collect();
    // keep the furthest point (and its image under φ^±15) inside f64
    let (mut lo, mut hi) = (0.0, 64.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if spec.distance_for_p(mid) <= 1e250 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = (15.0 / lo).max(3.0);
    let sloped = |sign: f64| -> Vec<TelescopePoint> {
        (3..=15)
            .map(|r| {
                let r = sign * r as f64;
                let w = z.iter().map(|c| c * spec.distance_for_p(r.abs() / mu)).collect();
                crate::telescope::u_map(aut, &crate::telescope::ProductPoint::new(w, r))
            })
            .collect()
    };
    let mut e1 = vec![0i64; n];
    e1[0] = 1;
    Ok(vec![
        ProbeSequence {
            label: "translation".into(),
            element: GroupElement::translation(shift),
            points: radial,
            limit: BoundaryPoint::new(z.clone(), 0.0)?,
        },
        ProbeSequence {
            label: "t".into(),
            element: GroupElement::t_power(n, 1),
            points: sloped(1.0),
            limit: BoundaryPoint::new(z.clone(), mu)?,
        },
        ProbeSequence {
            label: "t_inverse_translation".into(),
            element: GroupElement::new(-1, e1),
            points: sloped(-1.0),
            limit: BoundaryPoint::new(z, -mu)?,
        },
    ])
}
