//! The mapping telescope `Y = Tel_f(R^n)` of the linear map `f = φ`.
//!
//! A point `⌈x, r⌉` sits in the mapping cylinder over `[⌊r⌋, ⌊r⌋ + 1]` and
//! its coordinates `x` are taken from the domain end of that cylinder. The
//! range end is glued to the next level by `f`, so `⌈x, r⌉ → ⌈f(x), k + 1⌉`
//! as `r → (k + 1)⁻`.
//!
//! Because `f` is a linear isomorphism, its homotopy inverse is exactly
//! `f⁻¹` and the straightening map collapses to
//! `v⌈x, r⌉ = (f^(-⌊r⌋)(x), r)`, with inverse `u(x, r) = ⌈f^⌊r⌋(x), r⌉`.

use serde::{Deserialize, Serialize};

use crate::algebra::{Automorphism, GroupElement};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopePoint {
    pub x: Vec<f64>,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub x: Vec<f64>,
    pub r: f64,
}

impl TelescopePoint {
    pub fn new(x: Vec<f64>, r: f64) -> Self {
        TelescopePoint { x, r }
    }

    /// The integer level `k` with `k ≤ r < k + 1`.
    pub fn level(&self) -> i64 {
        self.r.floor() as i64
    }

    /// Drops to the bottom of the current cylinder, `⌈x, ⌊r⌋⌉`.
    pub fn integral(&self) -> TelescopePoint {
        TelescopePoint { x: self.x.clone(), r: self.r.floor() }
    }
}

impl ProductPoint {
    pub fn new(x: Vec<f64>, r: f64) -> Self {
        ProductPoint { x, r }
    }

    /// The product action of `g ∈ Z^n` on `R^n × R` (translation of the first factor).
    pub fn translate(&self, g: &[i64]) -> ProductPoint {
        ProductPoint { x: self.x.iter().zip(g).map(|(a, &b)| a + b as f64).collect(), r: self.r }
    }
}

/// `(t^k g) · ⌈x, r⌉ = ⌈x + φ^⌊r⌋(g), r + k⌉`.
///
/// `g` translates at the point's own level (`g·⌈x,r⌉ = ⌈φ^⌊r⌋(g)·x, r⌉`) and
/// then `t^k` shifts the level, which makes this a left action for the
/// normal-form product.
pub fn act(aut: &Automorphism, a: &GroupElement, p: &TelescopePoint) -> TelescopePoint {
    let shift = aut.real_power(p.level()).mul_vec(&a.g.iter().map(|&c| c as f64).collect::<Vec<_>>());
    TelescopePoint { x: p.x.iter().zip(&shift).map(|(x, s)| x + s).collect(), r: p.r + a.k as f64 }
}

pub fn v_map(aut: &Automorphism, p: &TelescopePoint) -> ProductPoint {
    ProductPoint { x: aut.apply_real(-p.level(), &p.x), r: p.r }
}

pub fn u_map(aut: &Automorphism, q: &ProductPoint) -> TelescopePoint {
    TelescopePoint { x: aut.apply_real(q.r.floor() as i64, &q.x), r: q.r }
}

/// Places the cylinder line through `⌈x, k⌉` on the segment from `(x, k)` to
/// `(f(x), k + 1)` in `R^(n+1)`.
pub fn embed_straightline(aut: &Automorphism, p: &TelescopePoint) -> Vec<f64> {
    let s = p.r - p.r.floor();
    let fx = aut.real_matrix().mul_vec(&p.x);
    let mut out: Vec<f64> = p.x.iter().zip(&fx).map(|(a, b)| (1.0 - s) * a + s * b).collect();
    out.push(p.r);
    out
}

/// Grid samples of the sub-cylinder over the unit cube, `[0,1]^n × [0,1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDomain {
    pub samples: Vec<TelescopePoint>,
    pub step: f64,
}

impl FundamentalDomain {
    pub fn grid(n: usize, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::InvalidArgument(format!("grid step must lie in (0, 1], got {step}")));
        }
        let mut ticks: Vec<f64> = Vec::new();
        let mut i = 0usize;
        loop {
            let v = i as f64 * step;
            if v > 1.0 + 1e-12 {
                break;
            }
            ticks.push(v.min(1.0));
            i += 1;
        }
        if (ticks.last().copied().unwrap_or(0.0) - 1.0).abs() > 1e-12 {
            ticks.push(1.0);
        }
        let mut samples = Vec::with_capacity(ticks.len().pow(n as u32 + 1));
        let mut idx = vec![0usize; n + 1];
        'outer: loop {
            let x = idx[..n].iter().map(|&j| ticks[j]).collect();
            samples.push(TelescopePoint { x, r: ticks[idx[n]] });
            for i in idx.iter_mut() {
                *i += 1;
                if *i < ticks.len() {
                    continue 'outer;
                }
                *i = 0;
            }
            break;
        }
        Ok(FundamentalDomain { samples, step })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The translate `a · C_Y`.
    pub fn translate(&self, aut: &Automorphism, a: &GroupElement) -> Vec<TelescopePoint> {
        self.samples.iter().map(|p| act(aut, a, p)).collect()
    }

    /// `v(a · C_Y)` in `R^n × R`.
    pub fn straightened(&self, aut: &Automorphism, a: &GroupElement) -> Vec<ProductPoint> {
        self.samples.iter().map(|p| v_map(aut, &act(aut, a, p))).collect()
    }
}

pub fn fundamental_domain(aut: &Automorphism, step: f64) -> Result<FundamentalDomain> {
    FundamentalDomain::grid(aut.dim(), step)
}
