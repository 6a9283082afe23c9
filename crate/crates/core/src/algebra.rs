//! Exact arithmetic in `Z^n ⋊_φ Z = ⟨Z^n, t | t⁻¹ g t = φ(g)⟩`.
//!
//! Elements are kept in the normal form `t^k g` and stored as `(k, g)`.
//! From the relator, `g t = t φ(g)`, hence `g t^m = t^m φ^m(g)` and
//!
//! ```text
//! (k, g) · (m, h) = t^k g t^m h = t^(k+m) φ^m(g) h = (k + m, φ^m(g) + h).
//! ```
//!
//! The inverse of `(k, g)` is `(-k, -φ^(-k)(g))`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, RealMatrix};

/// Default cap on the number of elements a Cayley ball may hold.
pub const DEFAULT_BALL_BUDGET: usize = 10_000_000;

/// A unimodular integer matrix together with its exact integer inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Automorphism {
    m: IntMatrix,
    m_inv: IntMatrix,
    m_real: RealMatrix,
    m_inv_real: RealMatrix,
}

#[derive(Serialize, Deserialize)]
struct AutomorphismJson {
    n: usize,
    matrix: Vec<Vec<i64>>,
}

impl Automorphism {
    pub fn new(rows: &[Vec<i64>]) -> Result<Self> {
        let m = IntMatrix::from_rows(rows)?;
        let m_inv = m.unimodular_inverse()?;
        debug_assert_eq!(m.checked_mul(&m_inv)?, IntMatrix::identity(m.dim()));
        Ok(Automorphism { m_real: m.to_real(), m_inv_real: m_inv.to_real(), m, m_inv })
    }

    pub fn identity(n: usize) -> Self {
        let rows = IntMatrix::identity(n).rows();
        Self::new(&rows).expect("identity is unimodular")
    }

    /// The parabolic matrix `[[1,1],[0,1]]`; its mapping torus is the Nil lattice.
    pub fn heisenberg() -> Self {
        Self::new(&[vec![1, 1], vec![0, 1]]).expect("unimodular")
    }

    /// The hyperbolic matrix `[[2,1],[1,1]]`; its mapping torus is a Sol lattice.
    pub fn sol() -> Self {
        Self::new(&[vec![2, 1], vec![1, 1]]).expect("unimodular")
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    pub fn inverse_matrix(&self) -> &IntMatrix {
        &self.m_inv
    }

    pub fn real_matrix(&self) -> &RealMatrix {
        &self.m_real
    }

    pub fn real_inverse_matrix(&self) -> &RealMatrix {
        &self.m_inv_real
    }

    /// `m^power` as an exact integer matrix (negative powers use the inverse).
    pub fn int_power(&self, power: i64) -> Result<IntMatrix> {
        if power >= 0 {
            self.m.checked_pow(power as u64)
        } else {
            self.m_inv.checked_pow(power.unsigned_abs())
        }
    }

    /// `m^power` in floating point; exact while the entries stay below 2^53.
    pub fn real_power(&self, power: i64) -> RealMatrix {
        if power >= 0 {
            self.m_real.pow(power as u64)
        } else {
            self.m_inv_real.pow(power.unsigned_abs())
        }
    }

    /// `φ^power(g)` in exact integer arithmetic.
    pub fn apply(&self, power: i64, g: &[i64]) -> Result<Vec<i64>> {
        self.check_dim(g.len())?;
        let base = if power >= 0 { &self.m } else { &self.m_inv };
        let steps = power.unsigned_abs();
        // iterating matrix-vector products only overflows when the result does
        if steps <= 256 {
            let mut v = g.to_vec();
            for _ in 0..steps {
                v = base.checked_mul_vec(&v)?;
            }
            Ok(v)
        } else {
            self.int_power(power)?.checked_mul_vec(g)
        }
    }

    pub fn apply_real(&self, power: i64, x: &[f64]) -> Vec<f64> {
        self.real_power(power).mul_vec(x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&AutomorphismJson { n: self.dim(), matrix: self.m.rows() })
            .expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: AutomorphismJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let aut = Self::new(&raw.matrix)?;
        if aut.dim() != raw.n {
            return Err(Error::DimensionMismatch { expected: raw.n, found: aut.dim() });
        }
        Ok(aut)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: len });
        }
        Ok(())
    }
}

impl Serialize for Automorphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AutomorphismJson { n: self.dim(), matrix: self.m.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Automorphism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = AutomorphismJson::deserialize(d)?;
        let aut = Automorphism::new(&raw.matrix).map_err(serde::de::Error::custom)?;
        if aut.dim() != raw.n {
            return Err(serde::de::Error::custom(format!(
                "declared n = {} but matrix is {}x{}",
                raw.n,
                aut.dim(),
                aut.dim()
            )));
        }
        Ok(aut)
    }
}

/// Checks that `matrix` is unimodular and returns it with its integer inverse.
pub fn make_automorphism(matrix: &[Vec<i64>]) -> Result<Automorphism> {
    Automorphism::new(matrix)
}

/// `t^k g` in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub k: i64,
    pub g: Vec<i64>,
}

impl GroupElement {
    pub fn new(k: i64, g: Vec<i64>) -> Self {
        GroupElement { k, g }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { k: 0, g: vec![0; n] }
    }

    pub fn t_power(n: usize, k: i64) -> Self {
        GroupElement { k, g: vec![0; n] }
    }

    /// The element `g ∈ Z^n` viewed in the semidirect product.
    pub fn translation(g: Vec<i64>) -> Self {
        GroupElement { k: 0, g }
    }

    pub fn is_identity(&self) -> bool {
        self.k == 0 && self.g.iter().all(|&c| c == 0)
    }
}

/// The group `Z^n ⋊_φ Z` for a fixed automorphism.
#[derive(Clone, Debug)]
pub struct Group {
    aut: Automorphism,
}

impl Group {
    pub fn new(aut: Automorphism) -> Self {
        Group { aut }
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.aut
    }

    pub fn dim(&self) -> usize {
        self.aut.dim()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.dim())
    }

    pub fn t(&self) -> GroupElement {
        GroupElement::t_power(self.dim(), 1)
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        let twisted = self.aut.apply(b.k, &a.g)?;
        let g = twisted
            .iter()
            .zip(&b.g)
            .map(|(x, y)| x.checked_add(*y).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        let k = a.k.checked_add(b.k).ok_or(Error::Overflow)?;
        Ok(GroupElement { k, g })
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        let k = a.k.checked_neg().ok_or(Error::Overflow)?;
        let g = self
            .aut
            .apply(k, &a.g)?
            .into_iter()
            .map(|c| c.checked_neg().ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupElement { k, g })
    }

    /// Conjugation by `t`: `t⁻¹ (t^k g) t = t^k φ(g)`.
    pub fn conjugate_by_t(&self, a: &GroupElement) -> Result<GroupElement> {
        Ok(GroupElement { k: a.k, g: self.aut.apply(1, &a.g)? })
    }

    /// Generators `±e_i` of `Z^n` and `t^±1`.
    pub fn generators(&self) -> Vec<GroupElement> {
        let n = self.dim();
        let mut gens = Vec::with_capacity(2 * n + 2);
        for i in 0..n {
            for s in [1, -1] {
                let mut g = vec![0; n];
                g[i] = s;
                gens.push(GroupElement::translation(g));
            }
        }
        gens.push(GroupElement::t_power(n, 1));
        gens.push(GroupElement::t_power(n, -1));
        gens
    }

    /// Breadth-first search of the Cayley graph from the identity.
    pub fn ball(&self, radius: u32, budget: usize) -> Result<Ball> {
        let gens = self.generators();
        let mut lengths: HashMap<GroupElement, u32> = HashMap::new();
        let id = self.identity();
        lengths.insert(id.clone(), 0);
        let mut frontier = vec![id];
        for r in 1..=radius {
            let neighbours: Vec<GroupElement> = frontier
                .par_iter()
                .flat_map_iter(|a| gens.iter().map(move |s| (a, s)))
                .map(|(a, s)| self.multiply(a, s))
                .collect::<Result<Vec<_>>>()?;
            let mut next = Vec::new();
            for b in neighbours {
                if !lengths.contains_key(&b) {
                    lengths.insert(b.clone(), r);
                    next.push(b);
                    if lengths.len() > budget {
                        return Err(Error::ResourceLimit { budget });
                    }
                }
            }
            frontier = next;
        }
        Ok(Ball { radius, lengths })
    }

    /// Sphere sizes `counts[r] = #{a : |a| = r}` for `r = 0..=max_radius`.
    pub fn growth_series(&self, max_radius: u32, budget: usize) -> Result<Vec<u64>> {
        Ok(self.ball(max_radius, budget)?.sphere_counts())
    }
}

/// Word lengths of all elements within a given radius of the identity.
#[derive(Clone, Debug)]
pub struct Ball {
    radius: u32,
    lengths: HashMap<GroupElement, u32>,
}

impl Ball {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn word_length(&self, a: &GroupElement) -> Option<u32> {
        self.lengths.get(a).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, u32)> {
        self.lengths.iter().map(|(a, &l)| (a, l))
    }

    pub fn sphere_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.radius as usize + 1];
        for &l in self.lengths.values() {
            counts[l as usize] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis() -> Group {
        Group::new(Automorphism::heisenberg())
    }

    #[test]
    fn heisenberg_inverse_matrix() {
        let aut = make_automorphism(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(aut.inverse_matrix().rows(), vec![vec![1, -1], vec![0, 1]]);
    }

    #[test]
    fn identity_is_its_own_inverse() {
        let aut = Automorphism::identity(3);
        assert_eq!(aut.matrix(), aut.inverse_matrix());
    }

    #[test]
    fn rejects_non_unimodular() {
        let err = make_automorphism(&[vec![2, 0], vec![0, 2]]).unwrap_err();
        assert_eq!(err, Error::NotUnimodular { det: 4 });
        assert!(matches!(make_automorphism(&[vec![1, 0]]), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn apply_phi_examples() {
        let aut = Automorphism::heisenberg();
        assert_eq!(aut.apply(1, &[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(aut.apply(0, &[5, -7]).unwrap(), vec![5, -7]);
        assert_eq!(aut.apply(-2, &[0, 1]).unwrap(), vec![-2, 1]);
        assert_eq!(aut.apply(1000, &[0, 1]).unwrap(), vec![1000, 1]);
    }

    #[test]
    fn apply_phi_overflow_is_an_error() {
        let aut = Automorphism::sol();
        assert_eq!(aut.apply(200, &[1, 0]), Err(Error::Overflow));
    }

    #[test]
    fn conjugating_y_by_t_gives_xy() {
        let g = heis();
        let t = g.t();
        let t_inv = g.inverse(&t).unwrap();
        let y = GroupElement::translation(vec![0, 1]);
        let lhs = g.multiply(&g.multiply(&t_inv, &y).unwrap(), &t).unwrap();
        assert_eq!(lhs, GroupElement::translation(vec![1, 1]));
    }

    #[test]
    fn inverse_examples() {
        let g = heis();
        assert_eq!(g.inverse(&g.identity()).unwrap(), g.identity());
        assert_eq!(g.inverse(&g.t()).unwrap(), GroupElement::t_power(2, -1));
        let a = GroupElement::new(1, vec![0, 1]);
        let inv = g.inverse(&a).unwrap();
        assert_eq!(inv, GroupElement::new(-1, vec![1, -1]));
        assert!(g.multiply(&a, &inv).unwrap().is_identity());
    }

    #[test]
    fn small_balls() {
        let g = heis();
        let b0 = g.ball(0, DEFAULT_BALL_BUDGET).unwrap();
        assert_eq!(b0.len(), 1);
        assert_eq!(b0.word_length(&g.identity()), Some(0));
        assert_eq!(g.ball(1, DEFAULT_BALL_BUDGET).unwrap().len(), 7);
        let counts = g.growth_series(3, DEFAULT_BALL_BUDGET).unwrap();
        assert_eq!(counts[0], 1);
        assert_eq!(counts[1], 6);
    }

    #[test]
    fn ball_budget_is_enforced() {
        let g = heis();
        assert_eq!(g.ball(6, 50).unwrap_err(), Error::ResourceLimit { budget: 50 });
    }

    #[test]
    fn json_round_trip() {
        let aut = Automorphism::sol();
        let s = aut.to_json();
        assert_eq!(s, r#"{"n":2,"matrix":[[2,1],[1,1]]}"#);
        assert_eq!(Automorphism::from_json(&s).unwrap(), aut);
        assert!(Automorphism::from_json(r#"{"n":3,"matrix":[[2,1],[1,1]]}"#).is_err());
        assert!(Automorphism::from_json(r#"{"n":2,"matrix":[[2,0],[0,2]]}"#).is_err());
    }
}
