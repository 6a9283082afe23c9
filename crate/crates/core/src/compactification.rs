//! The slope-function compactification of `R^n × R` with boundary the
//! suspension `SZ` of the sphere at infinity.
//!
//! `R^n` carries the Euclidean metric and is compactified radially,
//! `x ↦ x / (1 + |x|)`, with the Euclidean metric `d̄` on the closed ball.
//! A [`PsiSpec`] fixes the growth function `ψ` and from it
//!
//! ```text
//! p(x)   = log(ψ⁻¹(d(x, x₀) + ψ(0)) + 1)
//! μ(x,r) = r / p(x)            (±∞ at p(x) = 0, by the sign of r)
//! ```
//!
//! In exponential mode `ψ` is replaced by `Ψ = e^ψ`, so `Ψ⁻¹(y) = ψ⁻¹(log y)`.

use serde::{Deserialize, Serialize};

use crate::algebra::Automorphism;
use crate::error::{Error, Result};
use crate::linalg::{dist, norm};
use crate::telescope::ProductPoint;

/// `p(x)` below this is treated as zero when computing slopes.
pub const POLE_TOLERANCE: f64 = 1e-9;
/// Height squash used by the chart: `ρ = tanh(r / HEIGHT_SCALE)`.
pub const HEIGHT_SCALE: f64 = 10.0;
/// Pitch of the `s`-grid on which λ and the envelope of ψ are tabulated.
pub const PSI_GRID_STEP: f64 = 0.125;

const LN3: f64 = 1.098_612_288_668_109_8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PsiMode {
    #[default]
    Standard,
    Exponential,
}

/// Growth data defining `p` and the slope function.
///
/// `ψ(s) = M(s) · 3^s` where `M` is the running maximum of
/// `max(η, λ, 1)`, tabulated on a grid and interpolated linearly. Past the
/// end of the table `M` is held constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiSpec {
    pub x0: Vec<f64>,
    pub mode: PsiMode,
    pub grid_step: f64,
    /// η at the integers `0..=kmax`.
    pub eta: Vec<f64>,
    /// λ at the grid nodes.
    pub lambda: Vec<f64>,
    /// The envelope `M` at the grid nodes.
    pub envelope: Vec<f64>,
}

/// Candidate radius function for the radial compactification: balls of
/// radius `s` outside `B[x₀, λ(s)]` have `d̄`-diameter at most `1/s`.
pub fn lambda_candidate(s: f64) -> f64 {
    2.0 * s * s + 2.0 * s
}

/// `d̄`-diameter of the image of `B[R·e₁, s]`, sampled on its boundary
/// circle in the `e₁e₂`-plane.
fn radial_ball_diameter(n: usize, center_norm: f64, s: f64) -> f64 {
    let squash = |v: &[f64]| -> Vec<f64> {
        let len = norm(v);
        v.iter().map(|c| c / (1.0 + len)).collect()
    };
    let pts: Vec<Vec<f64>> = if n == 1 {
        vec![squash(&[center_norm - s]), squash(&[center_norm + s])]
    } else {
        (0..64)
            .map(|i| {
                let th = i as f64 * std::f64::consts::TAU / 64.0;
                let mut v = vec![0.0; n];
                v[0] = center_norm + s * th.cos();
                v[1] = s * th.sin();
                squash(&v)
            })
            .collect()
    };
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(dist(&pts[i], &pts[j]));
        }
    }
    best
}

fn lambda_holds(n: usize, s: f64, lambda: f64) -> bool {
    if s <= 0.0 {
        return true;
    }
    // points beyond λ(s) are within 1/s of the sphere: d̄(x, Z) = 1/(1+|x|)
    let near_sphere = 1.0 / (1.0 + lambda) < 1.0 / s;
    near_sphere && radial_ball_diameter(n, lambda + s, s) <= 1.0 / s
}

/// Builds `ψ` from a tabulated control function `η` (values at `0, 1, …, kmax`).
pub fn build_psi(aut: &Automorphism, eta: &[f64], mode: PsiMode) -> Result<PsiSpec> {
    build_psi_at(vec![0.0; aut.dim()], eta, mode)
}

pub fn build_psi_at(x0: Vec<f64>, eta: &[f64], mode: PsiMode) -> Result<PsiSpec> {
    if eta.is_empty() {
        return Err(Error::InvalidArgument("empty eta table".into()));
    }
    if eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::EtaTooFast { ratio: f64::INFINITY });
    }
    if eta.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("eta table must be monotone increasing".into()));
    }
    let kmax = eta.len() - 1;
    if kmax >= 2 {
        let mid = kmax / 2;
        let ratio = (eta[kmax] / eta[mid].max(f64::MIN_POSITIVE)).powf(1.0 / (kmax - mid) as f64);
        if ratio > 3.0 {
            return Err(Error::EtaTooFast { ratio });
        }
    }
    let n = x0.len();
    let per_unit = (1.0 / PSI_GRID_STEP).round() as usize;
    let nodes = kmax * per_unit + 1;
    let mut lambda = Vec::with_capacity(nodes);
    let mut envelope = Vec::with_capacity(nodes);
    let mut running = 1.0f64;
    for i in 0..nodes {
        let s = i as f64 * PSI_GRID_STEP;
        let mut l = lambda_candidate(s);
        while !lambda_holds(n, s, l) {
            l *= 1.5;
        }
        lambda.push(l);
        running = running.max(interp_integer_table(eta, s)).max(l);
        envelope.push(running);
    }
    Ok(PsiSpec { x0, mode, grid_step: PSI_GRID_STEP, eta: eta.to_vec(), lambda, envelope })
}

fn interp_integer_table(table: &[f64], s: f64) -> f64 {
    let last = table.len() - 1;
    if s >= last as f64 {
        return table[last];
    }
    let i = s.floor() as usize;
    let frac = s - i as f64;
    table[i] + frac * (table[i + 1] - table[i])
}

impl PsiSpec {
    fn s_max(&self) -> f64 {
        (self.envelope.len() - 1) as f64 * self.grid_step
    }

    fn node_value(table: &[f64], step: f64, s: f64) -> f64 {
        let pos = s / step;
        let last = table.len() - 1;
        if pos >= last as f64 {
            return table[last];
        }
        let i = pos.floor() as usize;
        table[i] + (pos - i as f64) * (table[i + 1] - table[i])
    }

    pub fn eta_at(&self, s: f64) -> f64 {
        interp_integer_table(&self.eta, s.max(0.0))
    }

    pub fn lambda_at(&self, s: f64) -> f64 {
        Self::node_value(&self.lambda, self.grid_step, s.max(0.0))
    }

    pub fn envelope_at(&self, s: f64) -> f64 {
        Self::node_value(&self.envelope, self.grid_step, s.max(0.0))
    }

    /// `ψ(s) = M(s) · 3^s`.
    pub fn psi(&self, s: f64) -> f64 {
        self.envelope_at(s) * (s * LN3).exp()
    }

    /// `ln ψ(s)`, finite for every finite `s`.
    pub fn ln_psi(&self, s: f64) -> f64 {
        self.envelope_at(s).ln() + s * LN3
    }

    /// Inverse of `ψ` on `[ψ(0), ∞)`; values below `ψ(0)` map to 0.
    pub fn psi_inv(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        if y == f64::INFINITY {
            return f64::INFINITY;
        }
        if y <= self.psi(0.0) {
            return 0.0;
        }
        let s_max = self.s_max();
        let m_last = *self.envelope.last().expect("nonempty");
        if y >= self.psi(s_max) {
            return s_max.max((y / m_last).ln() / LN3);
        }
        // locate the grid cell, then bisect inside it
        let (mut lo_i, mut hi_i) = (0usize, self.envelope.len() - 1);
        while hi_i - lo_i > 1 {
            let mid = (lo_i + hi_i) / 2;
            if self.psi(mid as f64 * self.grid_step) <= y {
                lo_i = mid;
            } else {
                hi_i = mid;
            }
        }
        let (mut lo, mut hi) = (lo_i as f64 * self.grid_step, hi_i as f64 * self.grid_step);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.psi(mid) <= y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi.max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// `ψ⁻¹(e^L)` for a logarithmic argument `L`; stays finite past `f64::MAX`.
    pub fn psi_inv_of_exp(&self, ln_y: f64) -> f64 {
        let s_max = self.s_max();
        if ln_y >= self.ln_psi(s_max) {
            let m_last = *self.envelope.last().expect("nonempty");
            return (ln_y - m_last.ln()) / LN3;
        }
        self.psi_inv(ln_y.exp())
    }

    /// The growth function actually used by the slope: `ψ` or `Ψ = e^ψ`.
    pub fn growth(&self, s: f64) -> f64 {
        match self.mode {
            PsiMode::Standard => self.psi(s),
            PsiMode::Exponential => self.psi(s).exp(),
        }
    }

    pub fn growth_inv(&self, y: f64) -> f64 {
        match self.mode {
            PsiMode::Standard => self.psi_inv(y),
            PsiMode::Exponential => self.psi_inv(y.ln()),
        }
    }

    /// `p` as a function of `d = d(x, x₀)`.
    pub fn p_of_distance(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        let s = match self.mode {
            PsiMode::Standard => self.psi_inv(d + self.psi(0.0)),
            PsiMode::Exponential => {
                // log(d + Ψ(0)) computed without forming Ψ(0) + d directly
                let (a, b) = (d.ln(), self.psi(0.0));
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                self.psi_inv(hi + (lo - hi).exp().ln_1p())
            }
        };
        s.ln_1p()
    }

    /// The distance `d` at which `p` takes the value `target` (may be `+∞`
    /// when it exceeds `f64::MAX`).
    pub fn distance_for_p(&self, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        let s = target.exp_m1();
        match self.mode {
            PsiMode::Standard => self.psi(s) - self.psi(0.0),
            PsiMode::Exponential => {
                let (hi, lo) = (self.psi(s), self.psi(0.0));
                // e^hi - e^lo = e^hi (1 - e^(lo - hi))
                hi.exp() * -(lo - hi).exp_m1()
            }
        }
    }

    pub fn p_value(&self, x: &[f64]) -> f64 {
        self.p_of_distance(dist(x, &self.x0))
    }

    pub fn slope(&self, q: &ProductPoint) -> f64 {
        slope_from_p(q.r, self.p_value(&q.x))
    }

    pub fn chart(&self, q: &ProductPoint) -> ChartPoint {
        ChartPoint {
            xbar: radial(&q.x),
            s: self.slope(q).tanh(),
            rho: (q.r / HEIGHT_SCALE).tanh(),
        }
    }

    /// JSON dump with reals rounded to 12 significant digits.
    pub fn to_json(&self) -> serde_json::Value {
        let round = |v: &[f64]| v.iter().map(|&x| round_sig(x, 12)).collect::<Vec<_>>();
        serde_json::json!({
            "mode": self.mode,
            "x0": round(&self.x0),
            "grid_step": self.grid_step,
            "eta": round(&self.eta),
            "lambda": round(&self.lambda),
            "envelope": round(&self.envelope),
        })
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn slope_from_p(r: f64, p: f64) -> f64 {
    if p < POLE_TOLERANCE {
        if r >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        r / p
    }
}

/// `x / (1 + |x|)`; points at infinite distance land on the unit sphere.
pub fn radial(x: &[f64]) -> Vec<f64> {
    let len = norm(x);
    if len.is_infinite() {
        let finite: Vec<f64> = x.iter().map(|c| if c.is_infinite() { c.signum() } else { 0.0 }).collect();
        let l = norm(&finite);
        return finite.iter().map(|c| c / l).collect();
    }
    x.iter().map(|c| c / (1.0 + len)).collect()
}

/// A point `⟨z, μ⟩` of the suspension `SZ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryPoint {
    Finite { z: Vec<f64>, mu: f64 },
    PlusPole,
    MinusPole,
}

impl BoundaryPoint {
    /// Canonicalizes: infinite `μ` gives a pole, otherwise `z` is normalized.
    pub fn new(z: Vec<f64>, mu: f64) -> Result<Self> {
        if mu.is_nan() {
            return Err(Error::InvalidArgument("slope is NaN".into()));
        }
        if mu == f64::INFINITY {
            return Ok(BoundaryPoint::PlusPole);
        }
        if mu == f64::NEG_INFINITY {
            return Ok(BoundaryPoint::MinusPole);
        }
        let len = norm(&z);
        if len == 0.0 || !len.is_finite() {
            return Err(Error::InvalidArgument("boundary direction must be a nonzero finite vector".into()));
        }
        Ok(BoundaryPoint::Finite { z: z.iter().map(|c| c / len).collect(), mu })
    }

    pub fn mu(&self) -> f64 {
        match self {
            BoundaryPoint::Finite { mu, .. } => *mu,
            BoundaryPoint::PlusPole => f64::INFINITY,
            BoundaryPoint::MinusPole => f64::NEG_INFINITY,
        }
    }

    pub fn is_pole(&self) -> bool {
        !matches!(self, BoundaryPoint::Finite { .. })
    }

    /// Chart coordinates `(z, tanh μ, ρ)`, where `ρ` is `±1` off the equator
    /// and 0 on it. Poles carry the zero vector as their sentinel direction.
    pub fn chart(&self, n: usize) -> ChartPoint {
        match self {
            BoundaryPoint::Finite { z, mu } => ChartPoint {
                xbar: z.clone(),
                s: mu.tanh(),
                rho: if *mu == 0.0 { 0.0 } else { mu.signum() },
            },
            BoundaryPoint::PlusPole => ChartPoint { xbar: vec![0.0; n], s: 1.0, rho: 1.0 },
            BoundaryPoint::MinusPole => ChartPoint { xbar: vec![0.0; n], s: -1.0, rho: -1.0 },
        }
    }
}

/// Numeric coordinates on the compactified product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub xbar: Vec<f64>,
    pub s: f64,
    pub rho: f64,
}

impl ChartPoint {
    pub fn distance(&self, other: &ChartPoint) -> f64 {
        let d = dist(&self.xbar, &other.xbar);
        d.max((self.s - other.s).abs()).max((self.rho - other.rho).abs())
    }

    /// Distance to a boundary point, measured with the coordinates its basic
    /// neighbourhoods constrain: `(x̄, s)` for `⟨z, μ⟩` and `(s, ρ)` for the poles.
    pub fn distance_to(&self, target: &BoundaryPoint) -> f64 {
        match target {
            BoundaryPoint::Finite { z, mu } => dist(&self.xbar, z).max((self.s - mu.tanh()).abs()),
            BoundaryPoint::PlusPole => (1.0 - self.s).abs().max((1.0 - self.rho).abs()),
            BoundaryPoint::MinusPole => (1.0 + self.s).abs().max((1.0 + self.rho).abs()),
        }
    }
}

/// A point with its basic-neighbourhood radius.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub delta: f64,
    pub witness: BoundaryPoint,
}

/// Smallest `δ` among three witnesses such that every point lies in the
/// closure of `U(witness, δ)`.
///
/// * `⟨+∞⟩`: `δ = max(1 / min r, 1 / min μ)` when all `r, μ > 0`; `⟨−∞⟩` symmetric.
/// * `⟨z, μ⟩`: `μ` is the midrange of the slopes and `z` the direction of
///   the point closest to the sphere; `δ = max(diam x̄ + max (1 − |x̄|), half-spread)`.
///   Both terms are maxima over the set, so `δ` never decreases when
///   points are added.
pub fn fits_in_basic(spec: &PsiSpec, points: &[ProductPoint]) -> Result<Fit> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("fits_in_basic needs at least one point".into()));
    }
    let slopes: Vec<f64> = points.iter().map(|q| spec.slope(q)).collect();
    let mut best: Option<Fit> = None;
    let mut offer = |fit: Fit| {
        if fit.delta.is_finite() && best.as_ref().is_none_or(|b| fit.delta < b.delta) {
            best = Some(fit);
        }
    };

    if points.iter().zip(&slopes).all(|(q, &m)| q.r > 0.0 && m > 0.0) {
        let min_r = points.iter().map(|q| q.r).fold(f64::INFINITY, f64::min);
        let min_mu = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        offer(Fit { delta: (1.0 / min_r).max(1.0 / min_mu), witness: BoundaryPoint::PlusPole });
    }
    if points.iter().zip(&slopes).all(|(q, &m)| q.r < 0.0 && m < 0.0) {
        let min_r = points.iter().map(|q| -q.r).fold(f64::INFINITY, f64::min);
        let min_mu = slopes.iter().map(|m| -m).fold(f64::INFINITY, f64::min);
        offer(Fit { delta: (1.0 / min_r).max(1.0 / min_mu), witness: BoundaryPoint::MinusPole });
    }
    if slopes.iter().all(|m| m.is_finite()) {
        let bars: Vec<Vec<f64>> = points.iter().map(|q| radial(&q.x)).collect();
        let lens: Vec<f64> = bars.iter().map(|b| norm(b)).collect();
        let (far, far_len) = lens
            .iter()
            .copied()
            .enumerate()
            .fold((0, -1.0), |acc, (i, l)| if l > acc.1 { (i, l) } else { acc });
        let mut diam = 0.0f64;
        for i in 0..bars.len() {
            for j in i + 1..bars.len() {
                diam = diam.max(dist(&bars[i], &bars[j]));
            }
        }
        let gap = lens.iter().map(|l| 1.0 - l).fold(0.0f64, f64::max);
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z = if far_len > 0.0 {
            bars[far].clone()
        } else {
            let mut e = vec![0.0; bars[0].len()];
            e[0] = 1.0;
            e
        };
        let delta = (diam + gap).max(0.5 * (hi - lo));
        offer(Fit { delta, witness: BoundaryPoint::new(z, 0.5 * (lo + hi))? });
    }
    best.ok_or(Error::Unfittable)
}

/// Where a contraction ray is headed.
#[derive(Clone, Debug, PartialEq)]
pub enum RayTarget {
    Interior(ProductPoint),
    Boundary(BoundaryPoint),
}

/// A point on a contraction ray, kept as `x₀ + radius · dir` at height `r`
/// together with its exact `p`-value. The radius overflows `f64` long
/// before `p` does (`p` is roughly a double logarithm of the radius), so
/// slopes are computed from the stored `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct RayPoint {
    pub x0: Vec<f64>,
    pub dir: Vec<f64>,
    pub radius: f64,
    pub p: f64,
    pub r: f64,
}

impl RayPoint {
    pub fn slope(&self) -> f64 {
        slope_from_p(self.r, self.p)
    }

    /// Euclidean coordinates; components are infinite once the radius overflows.
    pub fn to_product(&self) -> ProductPoint {
        let x = if self.radius == 0.0 {
            self.x0.clone()
        } else {
            self.x0.iter().zip(&self.dir).map(|(a, d)| a + self.radius * d).collect()
        };
        ProductPoint { x, r: self.r }
    }

    pub fn chart(&self) -> ChartPoint {
        let xbar = if self.radius.is_infinite() { self.dir.clone() } else { radial(&self.to_product().x) };
        ChartPoint { xbar, s: self.slope().tanh(), rho: (self.r / HEIGHT_SCALE).tanh() }
    }
}

/// The contraction ray from `(x₀, 0)` toward `target` at time `t ≥ 0`.
///
/// The reparameterized radial path reaches `p = τ` at time `τ` (so
/// `p(α′(z, τ)) = τ` and `|β′(±∞, τ)| = τ`), and
///
/// ```text
/// γ′(⟨z, μ⟩, t) = (α′(z, t/√(μ²+1)), β′(±∞, μ t/√(μ²+1)))
/// γ′(⟨±∞⟩, t)   = (x₀, ±t)
/// ```
///
/// Rays to interior points are clamped once they reach the target.
pub fn contraction_ray(spec: &PsiSpec, target: &RayTarget, t: f64) -> Result<RayPoint> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("ray time must be nonnegative, got {t}")));
    }
    let n = spec.x0.len();
    let base = |r: f64| RayPoint { x0: spec.x0.clone(), dir: vec![0.0; n], radius: 0.0, p: 0.0, r };
    match target {
        RayTarget::Boundary(BoundaryPoint::PlusPole) => Ok(base(t)),
        RayTarget::Boundary(BoundaryPoint::MinusPole) => Ok(base(-t)),
        RayTarget::Boundary(BoundaryPoint::Finite { z, mu }) => {
            let c = (mu * mu + 1.0).sqrt();
            let p = t / c;
            Ok(RayPoint { x0: spec.x0.clone(), dir: z.clone(), radius: spec.distance_for_p(p), p, r: mu * t / c })
        }
        RayTarget::Interior(q) => {
            let offset: Vec<f64> = q.x.iter().zip(&spec.x0).map(|(a, b)| a - b).collect();
            let d = norm(&offset);
            let px = spec.p_of_distance(d);
            let mu = slope_from_p(q.r, px);
            if !mu.is_finite() {
                return Ok(base(q.r.signum() * t.min(q.r.abs())));
            }
            let c = (mu * mu + 1.0).sqrt();
            let dir: Vec<f64> = offset.iter().map(|v| v / d).collect();
            if t / c >= px {
                return Ok(RayPoint { x0: spec.x0.clone(), dir, radius: d, p: px, r: q.r });
            }
            let p = t / c;
            Ok(RayPoint { x0: spec.x0.clone(), dir, radius: spec.distance_for_p(p), p, r: mu * t / c })
        }
    }
}

/// The interval in which `μ(γ′(⟨z, μ⟩, t))` must lie when the radial
/// reparameterization keeps `p` within `(τ − 1, τ + 3)`, mirrored for `μ < 0`.
/// Meaningful for `t > 2√(μ²+1)`.
pub fn slope_bracket(mu: f64, t: f64) -> (f64, f64) {
    let c = (mu * mu + 1.0).sqrt();
    let m = mu.abs();
    let lo = (m * t - 2.0 * c) / (t + 3.0 * c);
    let hi = (m * t + 3.0 * c) / (t - 2.0 * c);
    if mu >= 0.0 {
        (lo, hi)
    } else {
        (-hi, -lo)
    }
}
