use serde::Serialize;

use crate::error::{RbxError, Result};

/// One experience vector together with its multiplicity.
///
/// A weight of `k` stands for `k` identical copies of the vector in the
/// underlying multiset; fractional weights are allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperienceVector {
    coords: Vec<f64>,
    weight: f64,
}

impl ExperienceVector {
    pub fn new(coords: Vec<f64>, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(RbxError::InvalidWeight(weight));
        }
        Ok(Self { coords, weight })
    }

    pub fn unit_weight(coords: Vec<f64>) -> Self {
        Self {
            coords,
            weight: 1.0,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// A finite weighted multiset of experience vectors sharing one ambient dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    ambient_dim: usize,
    items: Vec<ExperienceVector>,
}

impl Dataset {
    pub fn new(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            items: Vec::new(),
        }
    }

    /// Builds a dataset of unit-weight vectors.
    pub fn from_vectors<I>(ambient_dim: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut data = Self::new(ambient_dim);
        for v in vectors {
            data.push(ExperienceVector::unit_weight(v))?;
        }
        Ok(data)
    }

    pub fn from_weighted<I>(ambient_dim: usize, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, f64)>,
    {
        let mut data = Self::new(ambient_dim);
        for (v, w) in items {
            data.push(ExperienceVector::new(v, w)?)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, item: ExperienceVector) -> Result<()> {
        if item.coords.len() != self.ambient_dim {
            return Err(RbxError::DimensionMismatch {
                expected: self.ambient_dim,
                found: item.coords.len(),
            });
        }
        self.items.push(item);
        Ok(())
    }

    /// Multiset union: the items of `self` followed by the items of `other`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if other.ambient_dim != self.ambient_dim {
            return Err(RbxError::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        Ok(Dataset {
            ambient_dim: self.ambient_dim,
            items,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn items(&self) -> &[ExperienceVector] {
        &self.items
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExperienceVector> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.items.iter().map(|it| it.weight).sum()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.ambient_dim != n {
            return Err(RbxError::DimensionMismatch {
                expected: n,
                found: self.ambient_dim,
            });
        }
        Ok(())
    }
}
