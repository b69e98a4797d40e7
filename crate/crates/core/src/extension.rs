//! Candidate generation and the extension engine.
//!
//! The canonical novelty direction is the top eigenvector of the residual
//! covariance `Σ = Σ_u w(u) r_C(u) r_C(u)ᵀ`; under the identity loss its
//! eigenvalue is exactly the fit gain of adding that direction. Multi-step
//! growth applies the one-dimensional construction greedily, re-residualizing
//! after every accepted step, which amounts to deflating `Σ`.

use serde::Serialize;

use crate::error::{RbxError, Result};
use crate::linalg::{
    apply_sign_convention, intersect, jacobi_eigen, norm, residual_covariance, residual_span,
    top_eigenpair, Dataset, EigenOptions, Intersection, Subspace, SymMatrix,
};
use crate::mdl::{description_length, gain, is_accepted, MdlConfig};

/// Top eigenvector of the residual covariance and its eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalDirection {
    pub direction: Vec<f64>,
    pub eigenvalue: f64,
    /// Difference to the second largest eigenvalue. Near zero means the
    /// direction is only determined up to a rotation in the top eigenspace.
    pub eigen_gap: f64,
}

/// One candidate `C' = C ⊕ span{v}` and its verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionProposal {
    /// `None` when the dataset leaves no residual to extend along.
    pub direction: Option<Vec<f64>>,
    pub gain: f64,
    pub dl_before: f64,
    pub dl_after: f64,
    pub accepted: bool,
    pub eigenvalue: f64,
    pub eigen_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Rejected,
    RankBound,
    ExhaustedResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionTrace {
    pub steps: Vec<ExtensionProposal>,
    pub final_space: Subspace,
    pub stop_reason: StopReason,
}

impl ExtensionTrace {
    pub fn accepted_dims(&self) -> usize {
        self.steps.iter().filter(|s| s.accepted).count()
    }

    pub fn accepted_eigenvalues(&self) -> Vec<f64> {
        self.steps
            .iter()
            .filter(|s| s.accepted)
            .map(|s| s.eigenvalue)
            .collect()
    }
}

pub fn canonical_direction(
    c: &Subspace,
    data: &Dataset,
    cfg: &MdlConfig,
) -> Result<CanonicalDirection> {
    let w = residual_span(c, data, cfg.tol())?;
    if w.is_zero() {
        return Err(RbxError::NoResidual);
    }
    let cov = residual_covariance(c, data)?.into_matrix();
    let opts = cfg.eigen_options();
    let top = top_eigenpair(&cov, &opts)?;
    if !top.meaningful {
        return Err(RbxError::NoResidual);
    }
    // Σ's column space lies in C⊥; strip rounding leakage into C.
    let mut v = c.residual(&top.vector)?;
    let len = norm(&v);
    v.iter_mut().for_each(|x| *x /= len);
    apply_sign_convention(&mut v, cfg.tol());
    let eigenvalue = cov.rayleigh(&v);

    let mut deflated = cov.clone();
    deflated.rank_one_update(-eigenvalue, &v);
    let second = top_eigenpair(
        &deflated,
        &EigenOptions {
            seed: opts.seed.wrapping_add(1),
            ..opts
        },
    )?;
    let eigen_gap = eigenvalue - if second.meaningful { second.value } else { 0.0 };

    Ok(CanonicalDirection {
        direction: v,
        eigenvalue,
        eigen_gap,
    })
}

/// Best one-dimensional extension and its accept/reject verdict.
///
/// A dataset with no residual outside `C` yields a rejected proposal with zero
/// gain rather than an error.
pub fn propose_one_dim(c: &Subspace, data: &Dataset, cfg: &MdlConfig) -> Result<ExtensionProposal> {
    let canon = match canonical_direction(c, data, cfg) {
        Ok(canon) => canon,
        Err(RbxError::NoResidual) => {
            let dl = description_length(c, data, cfg)?;
            return Ok(ExtensionProposal {
                direction: None,
                gain: 0.0,
                dl_before: dl,
                dl_after: dl,
                accepted: false,
                eigenvalue: 0.0,
                eigen_gap: 0.0,
            });
        }
        Err(e) => return Err(e),
    };
    let c_prime = c.with_direction(&canon.direction)?;
    let g = gain(c, &c_prime, data, cfg)?;
    let verdict = is_accepted(c, &c_prime, data, cfg)?;
    Ok(ExtensionProposal {
        direction: Some(canon.direction),
        gain: g,
        dl_before: verdict.dl_before,
        dl_after: verdict.dl_after,
        accepted: verdict.accepted,
        eigenvalue: canon.eigenvalue,
        eigen_gap: canon.eigen_gap,
    })
}

/// Greedy growth: extend along the canonical direction while the proposal is
/// accepted and fewer than `rank_bound` directions have been added.
pub fn extend_greedy(c: &Subspace, data: &Dataset, cfg: &MdlConfig) -> Result<ExtensionTrace> {
    data.check_dim(c.ambient_dim())?;
    let mut current = c.clone();
    let mut steps = Vec::new();
    let stop_reason = loop {
        if steps.len() >= cfg.rank_bound() {
            break StopReason::RankBound;
        }
        // a fresh start vector per step: the previous one is orthogonal to the
        // rest of a degenerate top eigenspace once its projection is deflated
        let step_cfg = cfg
            .clone()
            .with_seed(cfg.seed().wrapping_add(2 * steps.len() as u64));
        let proposal = propose_one_dim(&current, data, &step_cfg)?;
        let Some(direction) = proposal.direction.as_deref() else {
            break StopReason::ExhaustedResiduals;
        };
        if !proposal.accepted {
            steps.push(proposal);
            break StopReason::Rejected;
        }
        current = current.with_direction(direction)?;
        steps.push(proposal);
    };
    Ok(ExtensionTrace {
        steps,
        final_space: current,
        stop_reason,
    })
}

/// An orthogonal extension `C' = C ⊕ U` that satisfies the admissibility
/// conditions: `U ⊥ C`, `dim U <= r`, and `U = (U∩W) ⊕ (U∩W⊥)` where `W` is
/// the residual span of the dataset it was validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleExtension {
    base: Subspace,
    novelty: Subspace,
    extended: Subspace,
    residual_span: Subspace,
    split: Intersection,
}

impl AdmissibleExtension {
    pub fn new(
        base: &Subspace,
        novelty: &Subspace,
        data: &Dataset,
        cfg: &MdlConfig,
    ) -> Result<Self> {
        data.check_dim(base.ambient_dim())?;
        let deviation = base.overlap(novelty)?;
        if !(deviation <= cfg.tol()) {
            return Err(RbxError::NotOrthogonal { deviation });
        }
        if novelty.dim() > cfg.rank_bound() {
            return Err(RbxError::RankBoundExceeded {
                rank: novelty.dim(),
                bound: cfg.rank_bound(),
            });
        }
        let w = residual_span(base, data, cfg.tol())?;
        let split = intersect(novelty, &w, cfg.tol())?;
        if !split.reducible {
            return Err(RbxError::NotReducible {
                dim_u: novelty.dim(),
                dim_in: split.inside.dim(),
                dim_out: split.outside.dim(),
            });
        }
        Ok(Self {
            base: base.clone(),
            novelty: novelty.clone(),
            extended: base.direct_sum(novelty)?,
            residual_span: w,
            split,
        })
    }

    pub fn base(&self) -> &Subspace {
        &self.base
    }

    pub fn novelty(&self) -> &Subspace {
        &self.novelty
    }

    /// `C ⊕ U`
    pub fn extended(&self) -> &Subspace {
        &self.extended
    }

    pub fn residual_span(&self) -> &Subspace {
        &self.residual_span
    }

    /// `U ∩ W`
    pub fn supported(&self) -> &Subspace {
        &self.split.inside
    }

    /// `U ∩ W⊥`
    pub fn unsupported(&self) -> &Subspace {
        &self.split.outside
    }

    /// `C ⊕ (U∩W)`
    pub fn restricted(&self) -> Result<Subspace> {
        self.base.direct_sum(&self.split.inside)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrippedExtension {
    /// `C ⊕ (U∩W)`
    pub stripped: Subspace,
    /// `U ∩ W`
    pub kept: Subspace,
    /// `U ∩ W⊥`
    pub dropped: Subspace,
    pub dl_original: f64,
    pub dl_stripped: f64,
}

/// Removes the part of `U` that no residual can see.
///
/// Fails when `U` is not orthogonal to `C` or does not split along the
/// residual span.
pub fn strip_to_residual_support(
    c: &Subspace,
    u: &Subspace,
    data: &Dataset,
    cfg: &MdlConfig,
) -> Result<StrippedExtension> {
    // The rank bound is not part of this operation's contract.
    let unbounded = cfg.clone().with_rank_bound(usize::MAX)?;
    let ext = AdmissibleExtension::new(c, u, data, &unbounded)?;
    let stripped = ext.restricted()?;
    let dl_original = description_length(ext.extended(), data, cfg)?;
    let dl_stripped = description_length(&stripped, data, cfg)?;
    Ok(StrippedExtension {
        stripped,
        kept: ext.supported().clone(),
        dropped: ext.unsupported().clone(),
        dl_original,
        dl_stripped,
    })
}

/// `rank(Π_C' − Π_C)` at tolerance `c.tol()`, requiring `C ⊆ C'`.
pub fn novelty_rank(c: &Subspace, c_prime: &Subspace) -> Result<usize> {
    let tol = c.tol();
    let deviation = c_prime.containment_deviation(c)?;
    if !(deviation <= tol) {
        return Err(RbxError::InvalidExtension { deviation });
    }
    let n = c.ambient_dim();
    let p_big = c_prime.projector();
    let p_small = c.projector();
    let mut diff = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            diff.set(i, j, p_big.get(i, j) - p_small.get(i, j));
        }
    }
    let (values, _) = jacobi_eigen(&diff);
    Ok(values.iter().filter(|v| v.abs() > tol).count())
}
