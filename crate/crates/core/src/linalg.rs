//! Small dense matrices: exact `i64` matrices for the automorphism and `f64`
//! matrices for its action on real points.

use crate::error::{Error, Result};

/// Square integer matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row, expected: n, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(IntMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        det_bareiss(self.n, self.data.iter().map(|&v| v as i128).collect())
    }

    /// Integer inverse of a matrix with determinant ±1, via the adjugate.
    pub fn unimodular_inverse(&self) -> Result<Self> {
        let det = self.det();
        if det != 1 && det != -1 {
            return Err(Error::NotUnimodular { det });
        }
        let n = self.n;
        if n == 1 {
            return Ok(self.clone());
        }
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut minor = Vec::with_capacity((n - 1) * (n - 1));
                for r in (0..n).filter(|&r| r != j) {
                    for c in (0..n).filter(|&c| c != i) {
                        minor.push(self.get(r, c) as i128);
                    }
                }
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                let cof = sign * det_bareiss(n - 1, minor) * det;
                data[i * n + j] = i64::try_from(cof).map_err(|_| Error::Overflow)?;
            }
        }
        Ok(IntMatrix { n, data })
    }

    pub fn checked_mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        let n = self.n;
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i64 = 0;
                for l in 0..n {
                    let term = self.get(i, l).checked_mul(other.get(l, j)).ok_or(Error::Overflow)?;
                    acc = acc.checked_add(term).ok_or(Error::Overflow)?;
                }
                data[i * n + j] = acc;
            }
        }
        Ok(IntMatrix { n, data })
    }

    pub fn checked_mul_vec(&self, v: &[i64]) -> Result<Vec<i64>> {
        let n = self.n;
        let mut out = vec![0i64; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc: i64 = 0;
            for (l, &x) in v.iter().enumerate() {
                let term = self.get(i, l).checked_mul(x).ok_or(Error::Overflow)?;
                acc = acc.checked_add(term).ok_or(Error::Overflow)?;
            }
            *o = acc;
        }
        Ok(out)
    }

    /// `self^e` by repeated squaring, failing on overflow.
    pub fn checked_pow(&self, mut e: u64) -> Result<IntMatrix> {
        let mut acc = IntMatrix::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix { n: self.n, data: self.data.iter().map(|&v| v as f64).collect() }
    }
}

fn det_bareiss(n: usize, mut a: Vec<i128>) -> i128 {
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                Some(r) => {
                    for c in 0..n {
                        a.swap(k * n + c, r * n + c);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[(n - 1) * n + (n - 1)]
}

/// Square real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn identity(n: usize) -> Self {
        IntMatrix::identity(n).to_real()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &RealMatrix) -> RealMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(l, j);
                }
            }
        }
        RealMatrix { n, data }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> RealMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.get(i, j);
            }
        }
        RealMatrix { n, data }
    }

    pub fn pow(&self, mut e: u64) -> RealMatrix {
        let mut acc = RealMatrix::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Largest singular value, by power iteration on `MᵀM` until the
    /// estimate moves by less than `tol` (relative).
    pub fn operator_norm(&self, tol: f64) -> f64 {
        let gram = self.transpose().mul(self);
        let n = self.n;
        // Deterministic start with all components nonzero so no eigenvector is missed
        // unless it is orthogonal to (1, 2, ..., n).
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.618).collect();
        normalize(&mut v);
        let mut est = 0.0;
        for _ in 0..10_000 {
            let mut w = gram.mul_vec(&v);
            let len = norm(&w);
            if len == 0.0 {
                return 0.0;
            }
            w.iter_mut().for_each(|c| *c /= len);
            let next = len.sqrt();
            v = w;
            if (next - est).abs() <= tol * next.max(1.0) {
                return next;
            }
            est = next;
        }
        est
    }
}

pub fn norm(v: &[f64]) -> f64 {
    // scaled to stay finite for components near f64::MAX
    let scale = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * v.iter().map(|c| (c / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn normalize(v: &mut [f64]) -> f64 {
    let len = norm(v);
    if len > 0.0 && len.is_finite() {
        v.iter_mut().for_each(|c| *c /= len);
    }
    len
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d)
}
