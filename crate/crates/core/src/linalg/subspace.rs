use serde::Serialize;

use super::{axpy, dot, jacobi_eigen, norm, Dataset, SymMatrix};
use crate::error::{RbxError, Result};

/// A linear subspace of `R^n` stored as an ordered orthonormal basis.
///
/// The zero subspace has an empty basis. `tol` is the tolerance at which the
/// basis was certified orthonormal and is reused for downstream containment
/// and rank decisions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
    tol: f64,
}

impl Subspace {
    /// Wraps an existing basis after checking lengths and orthonormality.
    pub fn new(ambient_dim: usize, basis: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if basis.len() > ambient_dim {
            return Err(RbxError::InvalidConfig(format!(
                "{} basis vectors cannot be orthonormal in dimension {ambient_dim}",
                basis.len()
            )));
        }
        for b in &basis {
            if b.len() != ambient_dim {
                return Err(RbxError::DimensionMismatch {
                    expected: ambient_dim,
                    found: b.len(),
                });
            }
        }
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                let deviation = (dot(&basis[i], &basis[j]) - target).abs();
                if !(deviation <= tol) {
                    return Err(RbxError::NotOrthonormal {
                        row: i,
                        col: j,
                        deviation,
                    });
                }
            }
        }
        Ok(Self {
            ambient_dim,
            basis,
            tol,
        })
    }

    pub fn zero(ambient_dim: usize, tol: f64) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
            tol,
        }
    }

    /// The whole ambient space with the standard basis.
    pub fn full(ambient_dim: usize, tol: f64) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut e = vec![0.0; ambient_dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            ambient_dim,
            basis,
            tol,
        }
    }

    /// Span of arbitrary vectors, orthonormalized.
    pub fn span(ambient_dim: usize, vectors: &[Vec<f64>], tol: f64) -> Result<Self> {
        orthonormalize(ambient_dim, vectors, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_dim {
            return Err(RbxError::DimensionMismatch {
                expected: self.ambient_dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_same_space(&self, other: &Subspace) -> Result<()> {
        if other.ambient_dim != self.ambient_dim {
            return Err(RbxError::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        Ok(())
    }

    /// Orthogonal projection `sum_i <v, b_i> b_i`.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let mut out = vec![0.0; self.ambient_dim];
        for b in &self.basis {
            axpy(dot(v, b), b, &mut out);
        }
        Ok(out)
    }

    /// `v - project(v)`.
    pub fn residual(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v)?;
        let mut out = v.to_vec();
        for b in &self.basis {
            axpy(-dot(v, b), b, &mut out);
        }
        Ok(out)
    }

    /// Orthonormal basis of the orthogonal complement.
    ///
    /// Standard basis vectors are absorbed greedily, always taking the one with
    /// the largest component outside the current span, so the selection never
    /// has to normalize a nearly dependent vector.
    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim;
        let mut all: Vec<Vec<f64>> = self.basis.clone();
        let mut added = Vec::with_capacity(n - self.dim());
        let mut used = vec![false; n];
        while all.len() < n {
            let mut best: Option<(usize, Vec<f64>, f64)> = None;
            for i in (0..n).filter(|&i| !used[i]) {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let w = reorthogonalize(e, &all);
                let len = norm(&w);
                if best.as_ref().is_none_or(|(_, _, l)| len > *l) {
                    best = Some((i, w, len));
                }
            }
            let (i, w, len) = best.expect("a free coordinate always remains");
            used[i] = true;
            let unit: Vec<f64> = w.iter().map(|x| x / len).collect();
            all.push(unit.clone());
            added.push(unit);
        }
        Subspace {
            ambient_dim: n,
            basis: added,
            tol: self.tol,
        }
    }

    /// `self ⊕ other`. The basis of `self` is kept verbatim and the vectors of
    /// `other` are orthonormalized against it; directions already in `self`
    /// are dropped.
    pub fn direct_sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        absorb(&mut out.basis, &other.basis, self.tol)?;
        Ok(out)
    }

    /// `self ⊕ span{v}`, with the same basis-preserving rule as [`Self::direct_sum`].
    pub fn with_direction(&self, v: &[f64]) -> Result<Subspace> {
        self.check_len(v)?;
        let mut out = self.clone();
        absorb(&mut out.basis, std::slice::from_ref(&v.to_vec()), self.tol)?;
        Ok(out)
    }

    /// Largest distance from a basis vector of `inner` to `self`.
    ///
    /// Zero (up to rounding) iff `inner ⊆ self`.
    pub fn containment_deviation(&self, inner: &Subspace) -> Result<f64> {
        self.check_same_space(inner)?;
        let mut worst = 0.0f64;
        for b in &inner.basis {
            worst = worst.max(norm(&self.residual(b)?));
        }
        Ok(worst)
    }

    /// Largest projection of a basis vector of `other` onto `self`.
    ///
    /// Zero (up to rounding) iff the two subspaces are orthogonal.
    pub fn overlap(&self, other: &Subspace) -> Result<f64> {
        self.check_same_space(other)?;
        let mut worst = 0.0f64;
        for b in &other.basis {
            worst = worst.max(norm(&self.project(b)?));
        }
        Ok(worst)
    }

    /// The projector `sum_i b_i b_i^T` as a dense matrix.
    pub fn projector(&self) -> SymMatrix {
        let mut p = SymMatrix::zeros(self.ambient_dim);
        for b in &self.basis {
            p.rank_one_update(1.0, b);
        }
        p
    }
}

/// Two passes of modified Gram-Schmidt of `v` against `basis`.
fn reorthogonalize(mut v: Vec<f64>, basis: &[Vec<f64>]) -> Vec<f64> {
    for _ in 0..2 {
        for b in basis {
            let c = dot(&v, b);
            axpy(-c, b, &mut v);
        }
    }
    v
}

/// Orthonormal basis for the span of `vectors`.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass. A vector whose
/// component outside the already accepted basis has norm `<= tol` is dropped,
/// so the output dimension is the numerical rank at `tol`.
pub fn orthonormalize(ambient_dim: usize, vectors: &[Vec<f64>], tol: f64) -> Result<Subspace> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if v.len() != ambient_dim {
            return Err(RbxError::DimensionMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
    }
    absorb(&mut basis, vectors, tol)?;
    Ok(Subspace {
        ambient_dim,
        basis,
        tol,
    })
}

/// Appends the normalized parts of `vectors` that lie outside `basis`.
fn absorb(basis: &mut Vec<Vec<f64>>, vectors: &[Vec<f64>], tol: f64) -> Result<()> {
    for v in vectors {
        let n = v.len();
        if basis.len() == n {
            break;
        }
        let w = reorthogonalize(v.clone(), basis);
        let len = norm(&w);
        if len > tol {
            basis.push(w.into_iter().map(|x| x / len).collect());
        }
    }
    Ok(())
}

/// `W = span{ r_S(u) : u in D }`.
pub fn residual_span(s: &Subspace, data: &Dataset, tol: f64) -> Result<Subspace> {
    data.check_dim(s.ambient_dim())?;
    let residuals = data
        .iter()
        .map(|item| s.residual(item.coords()))
        .collect::<Result<Vec<_>>>()?;
    orthonormalize(s.ambient_dim(), &residuals, tol)
}

/// Result of intersecting `U` with `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct Intersection {
    /// `U ∩ W`
    pub inside: Subspace,
    /// `U ∩ W⊥`
    pub outside: Subspace,
    /// `dim(U∩W) + dim(U∩W⊥) == dim(U)`
    pub reducible: bool,
}

/// Intersects `u` with `w` (and, as a by-product, with `w`'s complement).
///
/// The compressed projector `B_Uᵀ Π_W B_U` is diagonalized; its eigenvectors
/// give the principal directions of `U` relative to `W`. A principal direction
/// belongs to `W` when its distance to `W` is `<= tol` and to `W⊥` when its
/// projection onto `W` is `<= tol`. Anything else is a skew direction and
/// makes `U` non-reducible.
pub fn intersect(u: &Subspace, w: &Subspace, tol: f64) -> Result<Intersection> {
    u.check_same_space(w)?;
    let n = u.ambient_dim();
    let k = u.dim();
    if k == 0 {
        return Ok(Intersection {
            inside: Subspace::zero(n, tol),
            outside: Subspace::zero(n, tol),
            reducible: true,
        });
    }
    // coefficients <b_i, w_m>
    let coef: Vec<Vec<f64>> = u
        .basis()
        .iter()
        .map(|b| w.basis().iter().map(|wm| dot(b, wm)).collect())
        .collect();
    let mut gram = SymMatrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let g = dot(&coef[i], &coef[j]);
            gram.set(i, j, g);
            gram.set(j, i, g);
        }
    }
    let (_, vectors) = jacobi_eigen(&gram);
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for x in vectors {
        let mut y = vec![0.0; n];
        for (xi, b) in x.iter().zip(u.basis()) {
            axpy(*xi, b, &mut y);
        }
        let along_w = norm(&w.project(&y)?);
        let off_w = norm(&w.residual(&y)?);
        if off_w <= tol {
            inside.push(y);
        } else if along_w <= tol {
            outside.push(y);
        }
    }
    let inside = orthonormalize(n, &inside, tol)?;
    let outside = orthonormalize(n, &outside, tol)?;
    let reducible = inside.dim() + outside.dim() == k;
    Ok(Intersection {
        inside,
        outside,
        reducible,
    })
}

/// `Σ = sum_u weight(u) r_S(u) r_S(u)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCovariance {
    matrix: SymMatrix,
}

impl ResidualCovariance {
    pub fn ambient_dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

pub fn residual_covariance(s: &Subspace, data: &Dataset) -> Result<ResidualCovariance> {
    data.check_dim(s.ambient_dim())?;
    let mut matrix = SymMatrix::zeros(s.ambient_dim());
    for item in data.iter() {
        let r = s.residual(item.coords())?;
        matrix.rank_one_update(item.weight(), &r);
    }
    Ok(ResidualCovariance { matrix })
}
