//! The nullity experiment: the control function `η`, smallness of translated
//! fundamental domains, and the Euclidean baseline for comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Automorphism, GroupElement};
use crate::compactification::{fits_in_basic, PsiSpec};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::telescope::{FundamentalDomain, ProductPoint};

/// `η(k)` for `k = 0, 1, …, kmax`, monotone and growing at least like `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaTable {
    pub values: Vec<f64>,
}

impl EtaTable {
    pub fn kmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn at(&self, k: usize) -> f64 {
        self.values[k.min(self.kmax())]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// ℓ₁ product diameter: Euclidean on `R^n` plus `|Δr|`.
pub fn diam_d1(points: &[ProductPoint]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(crate::linalg::dist(&a.x, &b.x) + (a.r - b.r).abs());
        }
    }
    best
}

pub fn eta_estimate(aut: &Automorphism, domain: &FundamentalDomain, kmax: usize) -> EtaTable {
    let n = aut.dim();
    let raw: Vec<f64> = (0..=kmax as i64)
        .into_par_iter()
        .map(|k| {
            let up = diam_d1(&domain.straightened(aut, &GroupElement::t_power(n, k)));
            let down = diam_d1(&domain.straightened(aut, &GroupElement::t_power(n, -k)));
            up.max(down)
        })
        .collect();
    let mut running = 0.0f64;
    let values = raw
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            running = running.max(d);
            running + k as f64
        })
        .collect();
    EtaTable { values }
}

/// `δ` of the best basic neighbourhood containing `v(a · C_Y)`; `+∞` when none fits.
pub fn smallness(spec: &PsiSpec, aut: &Automorphism, a: &GroupElement, domain: &FundamentalDomain) -> f64 {
    match fits_in_basic(spec, &domain.straightened(aut, a)) {
        Ok(fit) => fit.delta,
        Err(_) => f64::INFINITY,
    }
}

/// Euclidean-model smallness of a set in `R^(n+1)`: the larger of
/// `1 / min |w|` and the angular radius about the spherical centroid.
pub fn euclidean_delta(points: &[ProductPoint]) -> f64 {
    let ws: Vec<Vec<f64>> = points
        .iter()
        .map(|q| {
            let mut w = q.x.clone();
            w.push(q.r);
            w
        })
        .collect();
    let min_len = ws.iter().map(|w| norm(w)).fold(f64::INFINITY, f64::min);
    if min_len == 0.0 {
        return f64::INFINITY;
    }
    let dim = ws[0].len();
    let mut centroid = vec![0.0; dim];
    let units: Vec<Vec<f64>> = ws
        .iter()
        .map(|w| {
            let l = norm(w);
            w.iter().map(|c| c / l).collect()
        })
        .collect();
    for u in &units {
        centroid.iter_mut().zip(u).for_each(|(c, v)| *c += v);
    }
    let clen = norm(&centroid);
    if clen == 0.0 {
        return std::f64::consts::PI;
    }
    centroid.iter_mut().for_each(|c| *c /= clen);
    let radius = units
        .iter()
        .map(|u| u.iter().zip(&centroid).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0).acos())
        .fold(0.0, f64::max);
    radius.max(1.0 / min_len)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `t^k`.
    TPowers,
    /// `m · e_axis`.
    Axis { axis: usize },
    /// `t^k · (m · e_axis)` at a fixed `k`.
    Mixed { k: i64, axis: usize },
}

/// A family together with its scale ladder and final-`δ` threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    pub ladder: Vec<i64>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl FamilySpec {
    pub fn new(family: Family, ladder: Vec<i64>, threshold: Option<f64>) -> Self {
        FamilySpec { family, ladder, threshold }
    }

    /// `3^0, 3^1, …, 3^jmax`.
    pub fn powers_of_three(jmax: u32) -> Vec<i64> {
        (0..=jmax).map(|j| 3i64.pow(j)).collect()
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::TPowers => "t".to_string(),
            Family::Axis { axis } => format!("axis{axis}"),
            Family::Mixed { k, axis } => format!("mixed_k{k}_axis{axis}"),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::InvalidArgument(format!("family {} has an empty ladder", self.label())));
        }
        if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!("ladder of family {} must be strictly increasing", self.label())));
        }
        match self.family {
            Family::Axis { axis } | Family::Mixed { axis, .. } if axis >= n => Err(Error::InvalidArgument(format!(
                "family {} uses axis {axis} but the lattice has rank {n}",
                self.label()
            ))),
            _ => Ok(()),
        }
    }

    pub fn element(&self, n: usize, scale: i64) -> GroupElement {
        let axis_vec = |axis: usize| {
            let mut g = vec![0; n];
            g[axis] = scale;
            g
        };
        match self.family {
            Family::TPowers => GroupElement::t_power(n, scale),
            Family::Axis { axis } => GroupElement::translation(axis_vec(axis)),
            Family::Mixed { k, axis } => GroupElement::new(k, axis_vec(axis)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEntry {
    pub family: String,
    pub scale: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DecayCurve {
    pub entries: Vec<DecayEntry>,
}

/// Outcome of the trend test on one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub family: String,
    pub strictly_decreasing: bool,
    pub spearman: f64,
    pub final_delta: f64,
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl DecayCurve {
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.family) {
                out.push(e.family.clone());
            }
        }
        out
    }

    /// `(scale, δ)` pairs of one family in ladder order.
    pub fn series(&self, family: &str) -> Vec<(f64, f64)> {
        self.entries.iter().filter(|e| e.family == family).map(|e| (e.scale, e.delta)).collect()
    }

    /// Passes when `δ` strictly decreases, its Spearman correlation with the
    /// scale is below `spearman_max`, and the last `δ` is under the family's
    /// threshold (if it has one).
    pub fn verdicts(&self, families: &[FamilySpec], spearman_max: f64) -> Vec<FamilyVerdict> {
        families
            .iter()
            .map(|f| {
                let label = f.label();
                let series = self.series(&label);
                let deltas: Vec<f64> = series.iter().map(|s| s.1).collect();
                let scales: Vec<f64> = series.iter().map(|s| s.0).collect();
                let strictly_decreasing = deltas.windows(2).all(|w| w[1] < w[0]);
                let rho = spearman(&scales, &deltas);
                let final_delta = deltas.last().copied().unwrap_or(f64::INFINITY);
                let under = f.threshold.is_none_or(|t| final_delta < t);
                FamilyVerdict {
                    family: label,
                    strictly_decreasing,
                    spearman: rho,
                    final_delta,
                    threshold: f.threshold,
                    pass: strictly_decreasing && rho < spearman_max && under,
                }
            })
            .collect()
    }
}

fn run_families(families: &[FamilySpec], n: usize, measure: impl Fn(&GroupElement) -> f64 + Sync) -> Result<DecayCurve> {
    for f in families {
        f.validate(n)?;
    }
    let per_family: Vec<Vec<DecayEntry>> = families
        .par_iter()
        .map(|f| {
            let label = f.label();
            f.ladder
                .par_iter()
                .map(|&m| DecayEntry { family: label.clone(), scale: m as f64, delta: measure(&f.element(n, m)) })
                .collect()
        })
        .collect();
    Ok(DecayCurve { entries: per_family.into_iter().flatten().collect() })
}

pub fn decay_experiment(
    spec: &PsiSpec,
    aut: &Automorphism,
    domain: &FundamentalDomain,
    families: &[FamilySpec],
) -> Result<DecayCurve> {
    run_families(families, aut.dim(), |a| smallness(spec, aut, a, domain))
}

pub fn euclidean_baseline(aut: &Automorphism, domain: &FundamentalDomain, families: &[FamilySpec]) -> Result<DecayCurve> {
    run_families(families, aut.dim(), |a| euclidean_delta(&domain.straightened(aut, a)))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with tie-averaged ranks; NaN for constant input.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
