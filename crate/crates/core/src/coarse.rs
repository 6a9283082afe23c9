//! Coarse-geometry helpers: quasi-isometry constants of `φ`, control
//! functions, the star function `φ*` and the piecewise-linear `ψ⁻¹` built
//! from `(ρ⁻¹)*`.

use serde::{Deserialize, Serialize};

use crate::algebra::Automorphism;
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;

/// A strictly increasing, unbounded, piecewise-linear function on `[0, ∞)`,
/// extended past its last breakpoint with the last slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlFunction {
    points: Vec<(f64, f64)>,
}

impl ControlFunction {
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a control function needs at least two breakpoints".into()));
        }
        if points[0].0 != 0.0 {
            return Err(Error::InvalidArgument("the first breakpoint must sit at x = 0".into()));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) || !w[1].0.is_finite() || !w[1].1.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "breakpoints must be finite and strictly increasing, got {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(ControlFunction { points })
    }

    /// Samples `f` at 0 and on the geometric grid `10⁻³ · 1.1^j` up to `x_max`.
    pub fn from_fn(f: impl Fn(f64) -> f64, x_max: f64) -> Result<Self> {
        let pts = geometric_grid(x_max).into_iter().map(|x| (x, f(x))).collect();
        Self::from_points(pts)
    }

    pub fn linear(slope: f64) -> Result<Self> {
        Self::from_points(vec![(0.0, 0.0), (1.0, slope)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn segment_at(&self, x: f64, key: impl Fn(&(f64, f64)) -> f64) -> usize {
        let idx = self.points.partition_point(|p| key(p) <= x);
        idx.clamp(1, self.points.len() - 1) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment_at(x, |p| p.0);
        let ((x0, y0), (x1, y1)) = (self.points[i], self.points[i + 1]);
        y0 + (x - x0) * (y1 - y0) / (x1 - x0)
    }

    /// Exact inverse; arguments below `f(0)` map to 0.
    pub fn inv_eval(&self, y: f64) -> f64 {
        if y <= self.points[0].1 {
            return 0.0;
        }
        let i = self.segment_at(y, |p| p.1);
        let ((x0, y0), (x1, y1)) = (self.points[i], self.points[i + 1]);
        x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    }

    /// The inverse as a control function; requires `f(0) = 0`.
    pub fn inverse(&self) -> Result<ControlFunction> {
        Self::from_points(self.points.iter().map(|&(x, y)| (y, x)).collect())
    }

    pub fn last_slope(&self) -> f64 {
        let n = self.points.len();
        let ((x0, y0), (x1, y1)) = (self.points[n - 2], self.points[n - 1]);
        (y1 - y0) / (x1 - x0)
    }

    /// Pointwise minimum, with the crossing points of the two graphs inserted.
    pub fn min(&self, other: &ControlFunction) -> Result<ControlFunction> {
        let mut xs: Vec<f64> = self.points.iter().chain(&other.points).map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let diff = |x: f64| self.eval(x) - other.eval(x);
        let mut out = Vec::with_capacity(xs.len() * 2);
        for w in xs.windows(2) {
            out.push(w[0]);
            let (d0, d1) = (diff(w[0]), diff(w[1]));
            if d0 * d1 < 0.0 {
                out.push(w[0] + (w[1] - w[0]) * d0 / (d0 - d1));
            }
        }
        let last = *xs.last().expect("nonempty");
        out.push(last);
        // the extrapolated tails may still cross once
        let d = diff(last);
        let ds = self.last_slope() - other.last_slope();
        if ds != 0.0 && d * ds < 0.0 {
            let cross = last - d / ds;
            out.push(cross);
            out.push(cross + (cross - last).max(1.0));
        }
        let pts = out.into_iter().map(|x| (x, self.eval(x).min(other.eval(x)))).collect();
        Self::from_points(pts)
    }
}

fn geometric_grid(x_max: f64) -> Vec<f64> {
    let mut xs = vec![0.0];
    let mut x = 1e-3;
    while x < x_max {
        xs.push(x);
        x *= 1.1;
    }
    xs.push(x_max);
    xs
}

/// Grid used for pointwise checks: every breakpoint of both functions plus
/// the geometric grid up to twice the furthest breakpoint.
fn check_grid(fs: &[&ControlFunction]) -> Vec<f64> {
    let far = fs.iter().map(|f| f.points.last().expect("nonempty").0).fold(1.0, f64::max);
    let mut xs = geometric_grid(2.0 * far);
    xs.extend(fs.iter().flat_map(|f| f.points.iter().map(|p| p.0)));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// `(K, ε)` with `d/K − ε ≤ d(φx, φy) ≤ K d + ε`; `ε = 0` for linear maps.
pub fn qi_constants(aut: &Automorphism) -> (f64, f64) {
    let k = aut
        .real_matrix()
        .operator_norm(1e-12)
        .max(aut.real_inverse_matrix().operator_norm(1e-12))
        .max(1.0);
    (k, 0.0)
}

/// `ρ = min(ρ₋, ρ₊⁻¹)`, so that `ρ ≤ ρ₋` and `ρ⁻¹ ≥ ρ₊`.
pub fn normalize_controls(rho_minus: &ControlFunction, rho_plus: &ControlFunction) -> Result<ControlFunction> {
    for x in check_grid(&[rho_minus, rho_plus]) {
        let (lower, upper) = (rho_minus.eval(x), rho_plus.eval(x));
        if lower > upper + NORM_TOL * upper.abs().max(1.0) {
            return Err(Error::InvalidPair { x, lower, upper });
        }
    }
    rho_minus.min(&rho_plus.inverse()?)
}

/// `φ*(x) = 1` for `x ≤ 1`, otherwise `1 + φ*(φ(x))`.
pub fn star(phi: &ControlFunction, x: f64) -> Result<u64> {
    check_contracting(phi)?;
    let mut count = 1;
    let mut x = x;
    while x > 1.0 {
        x = phi.eval(x);
        count += 1;
    }
    Ok(count)
}

fn check_contracting(phi: &ControlFunction) -> Result<()> {
    for &(x, y) in &phi.points {
        if y > x / 2.0 + NORM_TOL * x.max(1.0) {
            return Err(Error::NotContracting { x, value: y });
        }
    }
    if phi.last_slope() > 0.5 + NORM_TOL {
        let (x, y) = *phi.points.last().expect("nonempty");
        let far = 2.0 * x.max(1.0);
        return Err(Error::NotContracting { x: far, value: y + (far - x) * phi.last_slope() });
    }
    Ok(())
}

/// Piecewise-linear `ψ⁻¹` through `(0, 0)` and `(x_j, j + 1)`, where `x₀ = 1`
/// and `x_{j+1} = ρ(x_j)`. The knots are the points where `(ρ⁻¹)*` steps
/// up, so `|ψ⁻¹ − (ρ⁻¹)*| ≤ 1`, and `ψ⁻¹(x) ≤ log₃(x) + 1` for `x ≥ 1`.
pub fn psi_inv_from_star(rho: &ControlFunction) -> Result<ControlFunction> {
    for x in check_grid(&[rho]) {
        if rho.eval(x) < 3.0 * x * (1.0 - NORM_TOL) {
            return Err(Error::PreconditionFailed(format!("rho({x}) = {} is below 3x", rho.eval(x))));
        }
    }
    if rho.last_slope() < 3.0 * (1.0 - NORM_TOL) {
        return Err(Error::PreconditionFailed(format!("rho grows with slope {} < 3", rho.last_slope())));
    }
    let mut pts = vec![(0.0, 0.0)];
    let mut x = 1.0;
    let mut level = 1.0;
    while x < 1e300 {
        pts.push((x, level));
        x = rho.eval(x);
        level += 1.0;
    }
    ControlFunction::from_points(pts)
}

/// `max |θ(log(A₁x + B₁)) / θ(log(A₂x + B₂)) − 1|` over the top decade of `xs`.
pub fn limit_ratio_check(
    theta: impl Fn(f64) -> f64,
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    xs: &[f64],
) -> Result<f64> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::InvalidArgument("A1 and A2 must be positive".into()));
    }
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if xs.is_empty() || !top.is_finite() {
        return Err(Error::InvalidArgument("sample ladder must be nonempty and finite".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = &sorted[sorted.len() / 2..];
    for w in tail.windows(2) {
        for (a, b) in [(a1, b1), (a2, b2)] {
            let (u0, u1) = ((a * w[0] + b).ln(), (a * w[1] + b).ln());
            if u1 <= u0 {
                continue;
            }
            let secant = (theta(u1) - theta(u0)) / (u1 - u0);
            if !(0.0..=1.0 + 1e-9).contains(&secant) {
                return Err(Error::PreconditionFailed(format!(
                    "theta secant slope {secant} on [{u0}, {u1}] is outside [0, 1]"
                )));
            }
        }
    }
    Ok(sorted
        .iter()
        .filter(|&&x| x >= top / 10.0)
        .map(|&x| (theta((a1 * x + b1).ln()) / theta((a2 * x + b2).ln()) - 1.0).abs())
        .fold(0.0, f64::max))
}
