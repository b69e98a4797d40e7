//! Symmetric eigen-extraction.
//!
//! The top eigenpair of a PSD matrix comes from power iteration; further pairs
//! from Hotelling deflation `M <- M - λ v vᵀ`. A cyclic Jacobi sweep is kept for
//! the tiny Gram matrices that appear in subspace intersection and rank tests,
//! where every eigenvector is needed at once.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{apply_sign_convention, dot, norm};
use crate::error::{RbxError, Result};

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from rows; the input must be square and symmetric within `tol`.
    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(RbxError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (m.get(i, j) - m.get(j, i)).abs() > tol {
                    return Err(RbxError::InvalidConfig(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .take(self.n)
            .collect()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n.max(1))
            .take(self.n)
            .map(|row| dot(row, v))
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `self += alpha * v vᵀ`, keeping exact symmetry.
    pub fn rank_one_update(&mut self, alpha: f64, v: &[f64]) {
        let n = self.n;
        for i in 0..n {
            let ai = alpha * v[i];
            if ai == 0.0 {
                continue;
            }
            for (j, vj) in v.iter().enumerate().skip(i) {
                let x = self.get(i, j) + ai * vj;
                self.set(i, j, x);
                if i != j {
                    self.set(j, i, x);
                }
            }
        }
    }

    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        dot(v, &self.matvec(v)) / dot(v, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the perturbation added to the all-ones start vector.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: super::DEFAULT_TOL,
            max_iter: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// False when the matrix was numerically zero; `vector` is then an
    /// arbitrary axis and carries no information.
    pub meaningful: bool,
    pub iterations: usize,
}

fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = 1.0 / (n as f64).sqrt();
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            base + 0.1 * base * z
        })
        .collect();
    let len = norm(&v);
    v.iter_mut().for_each(|x| *x /= len);
    v
}

/// Largest eigenpair of a symmetric PSD matrix by power iteration.
///
/// Converged when `‖Mv − λv‖ <= tol · max(1, λ)`. The returned vector has its
/// first coordinate above `tol` in magnitude made positive. A matrix whose
/// entries are all `<= tol²` in magnitude is treated as zero.
pub fn top_eigenpair(m: &SymMatrix, opts: &EigenOptions) -> Result<EigenPair> {
    let n = m.dim();
    if opts.max_iter == 0 {
        return Err(RbxError::InvalidConfig(
            "max_iter must be at least 1".into(),
        ));
    }
    if n == 0 || m.max_abs() <= opts.tol * opts.tol {
        let mut vector = vec![0.0; n];
        if n > 0 {
            vector[0] = 1.0;
        }
        return Ok(EigenPair {
            value: 0.0,
            vector,
            meaningful: false,
            iterations: 0,
        });
    }

    let mut restarts = 0u64;
    let mut v = start_vector(n, opts.seed);
    let mut value = 0.0;
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let w = m.matvec(&v);
        let len = norm(&w);
        // A start vector inside the null space of a nonzero matrix; try another.
        if len == 0.0 && restarts < 8 {
            restarts += 1;
            v = start_vector(
                n,
                opts.seed.wrapping_add(restarts.wrapping_mul(0x9E37_79B9)),
            );
            continue;
        }
        value = dot(&v, &w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - value * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tol * value.abs().max(1.0) {
            apply_sign_convention(&mut v, opts.tol);
            return Ok(EigenPair {
                value,
                vector: v,
                meaningful: true,
                iterations: iter,
            });
        }
        v = w.into_iter().map(|x| x / len).collect();
    }
    Err(RbxError::NotConverged {
        iterations: opts.max_iter,
        eigenvalue: value,
        residual,
        last: v,
    })
}

/// Eigenpairs in nonincreasing order by repeated power iteration and deflation.
///
/// Stops once the deflated matrix is numerically zero (an eigenvalue below
/// `n · 1e-13` times the largest entry of `m`, or the absolute `tol²` floor),
/// so the result may hold fewer than `n` pairs; missing eigenvalues are zero.
pub fn spectrum(m: &SymMatrix, opts: &EigenOptions) -> Result<Vec<EigenPair>> {
    let noise = m.dim() as f64 * 1e-13 * m.max_abs();
    let mut work = m.clone();
    let mut pairs = Vec::new();
    for k in 0..m.dim() {
        let step_opts = EigenOptions {
            seed: opts.seed.wrapping_add(k as u64),
            ..*opts
        };
        let pair = top_eigenpair(&work, &step_opts)?;
        if !pair.meaningful || pair.value <= noise {
            break;
        }
        work.rank_one_update(-pair.value, &pair.vector);
        pairs.push(pair);
    }
    Ok(pairs)
}

/// All eigenpairs of a small symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(values, vectors)` with `vectors[k]` the unit eigenvector for
/// `values[k]`, in no particular order.
pub(crate) fn jacobi_eigen(a: &SymMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = SymMatrix::identity(n);
    let scale: f64 = m.data.iter().map(|x| x * x).sum();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q).powi(2);
            }
        }
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let values = (0..n).map(|i| m.get(i, i)).collect();
    let vectors = (0..n)
        .map(|j| (0..n).map(|i| v.get(i, j)).collect())
        .collect();
    (values, vectors)
}
