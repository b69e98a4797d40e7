//! Simulated experience and how it changes extension decisions.
//!
//! A simulated batch can matter in two ways: it can add residual directions
//! that external data never produced (enrichment), or it can push the gain
//! along an existing direction over the acceptance threshold (amplification).

use serde::Serialize;

use crate::error::{RbxError, Result};
use crate::extension::{propose_one_dim, ExtensionProposal};
use crate::linalg::{
    dot, norm, orthonormalize, residual_span, Dataset, ExperienceVector, Subspace,
};
use crate::mdl::{gain, MdlConfig};

/// Internally generated experience, kept apart from external data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationBatch {
    pub items: Dataset,
    pub provenance: String,
}

impl SimulationBatch {
    pub fn new(items: Dataset, provenance: impl Into<String>) -> Self {
        Self {
            items,
            provenance: provenance.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Enrichment,
    Amplification,
    Both,
    Inert,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismReport {
    pub dim_w_ext: usize,
    pub dim_w_all: usize,
    pub enrichment: bool,
    /// Orthonormal basis of the part of `W_all` orthogonal to `W_ext`.
    pub new_directions: Vec<Vec<f64>>,
    pub amplification: bool,
    pub proposal_ext: ExtensionProposal,
    pub proposal_all: ExtensionProposal,
    pub classification: Mechanism,
}

pub fn classify_simulation(
    c: &Subspace,
    d_ext: &Dataset,
    d_sim: &SimulationBatch,
    cfg: &MdlConfig,
) -> Result<MechanismReport> {
    d_ext.check_dim(c.ambient_dim())?;
    let d_all = d_ext.concat(&d_sim.items)?;
    let w_ext = residual_span(c, d_ext, cfg.tol())?;
    let w_all = residual_span(c, &d_all, cfg.tol())?;

    let mut stacked = w_ext.basis().to_vec();
    stacked.extend(w_all.basis().iter().cloned());
    let joint = orthonormalize(c.ambient_dim(), &stacked, cfg.tol())?;
    let new_directions = joint.basis()[w_ext.dim()..].to_vec();

    let proposal_ext = propose_one_dim(c, d_ext, cfg)?;
    let proposal_all = propose_one_dim(c, &d_all, cfg)?;

    let enrichment = w_all.dim() > w_ext.dim();
    let flipped = !proposal_ext.accepted && proposal_all.accepted;
    let amplification = flipped && !enrichment;
    let classification = match (enrichment, flipped) {
        (true, true) => Mechanism::Both,
        (true, false) => Mechanism::Enrichment,
        (false, true) => Mechanism::Amplification,
        (false, false) => Mechanism::Inert,
    };
    Ok(MechanismReport {
        dim_w_ext: w_ext.dim(),
        dim_w_all: w_all.dim(),
        enrichment,
        new_directions,
        amplification,
        proposal_ext,
        proposal_all,
        classification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainDecomposition {
    pub g_ext: f64,
    pub g_sim: f64,
    pub g_all: f64,
}

/// Gains of `C'` over `C` on the external data, the batch, and their union,
/// each computed independently.
pub fn gain_decomposition(
    c: &Subspace,
    c_prime: &Subspace,
    d_ext: &Dataset,
    d_sim: &SimulationBatch,
    cfg: &MdlConfig,
) -> Result<GainDecomposition> {
    let d_all = d_ext.concat(&d_sim.items)?;
    Ok(GainDecomposition {
        g_ext: gain(c, c_prime, d_ext, cfg)?,
        g_sim: gain(c, c_prime, &d_sim.items, cfg)?,
        g_all: gain(c, c_prime, &d_all, cfg)?,
    })
}

/// Synthetic batch scaling the squared residual alignment along `direction`
/// by `1 + factor`.
///
/// Every external item whose residual has a component along `direction`
/// larger than `tol` is repeated with weight `factor · weight`. A zero factor
/// gives an empty batch.
pub fn amplify(
    c: &Subspace,
    d_ext: &Dataset,
    direction: &[f64],
    factor: f64,
    tol: f64,
) -> Result<SimulationBatch> {
    if !(factor.is_finite() && factor >= 0.0) {
        return Err(RbxError::InvalidConfig(format!(
            "amplification factor must be nonnegative, got {factor}"
        )));
    }
    let w_ext = residual_span(c, d_ext, tol)?;
    let len = norm(direction);
    let distance = if len == 0.0 {
        f64::INFINITY
    } else {
        norm(&w_ext.residual(direction)?) / len
    };
    if !(distance <= tol) {
        return Err(RbxError::InvalidDirection { distance });
    }
    let mut items = Dataset::new(d_ext.ambient_dim());
    if factor > 0.0 {
        for item in d_ext.iter() {
            let r = c.residual(item.coords())?;
            if (dot(&r, direction) / len).abs() > tol {
                items.push(ExperienceVector::new(
                    item.coords().to_vec(),
                    factor * item.weight(),
                )?)?;
            }
        }
    }
    Ok(SimulationBatch::new(items, format!("amplify x{factor}")))
}
