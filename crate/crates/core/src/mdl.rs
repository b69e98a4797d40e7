//! Description-length objective and the acceptance rule.
//!
//! `L(S; D) = Σ_u w(u) · ℓ(‖u − Π_S u‖²) + λ · dim(S)`, and an extension
//! `C' ⊇ C` is accepted iff `L(C'; D) < L(C; D)` strictly.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{RbxError, Result};
use crate::linalg::{norm_sq, Dataset, EigenOptions, Subspace, DEFAULT_TOL};

type LossFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The per-item loss `ℓ` applied to squared residual norms.
#[derive(Clone)]
pub enum Loss {
    /// `ℓ(x) = x`
    Identity,
    /// `ℓ(x) = scale · ln(1 + x)`
    ScaledLog { scale: f64 },
    /// User-supplied map, checked for monotonicity at construction.
    Custom { name: String, f: LossFn },
}

impl fmt::Debug for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loss::Identity => write!(f, "Identity"),
            Loss::ScaledLog { scale } => f.debug_struct("ScaledLog").field("scale", scale).finish(),
            Loss::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

impl Serialize for Loss {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Loss", 2)?;
        match self {
            Loss::Identity => {
                st.serialize_field("kind", "identity")?;
                st.skip_field("scale")?;
            }
            Loss::ScaledLog { scale } => {
                st.serialize_field("kind", "scaled-log")?;
                st.serialize_field("scale", scale)?;
            }
            Loss::Custom { name, .. } => {
                st.serialize_field("kind", name)?;
                st.skip_field("scale")?;
            }
        }
        st.end()
    }
}

/// Sample points for the monotonicity check: 0, then a log grid over [1e-6, 1e6].
fn monotonicity_grid() -> impl Iterator<Item = f64> {
    std::iter::once(0.0).chain((-60..=60).map(|k| 10f64.powf(k as f64 / 10.0)))
}

fn check_monotone(f: &dyn Fn(f64) -> f64) -> Result<()> {
    let mut prev: Option<(f64, f64)> = None;
    for x in monotonicity_grid() {
        let y = f(x);
        if !y.is_finite() {
            return Err(RbxError::InvalidConfig(format!(
                "loss is not finite at {x}"
            )));
        }
        if let Some((x0, y0)) = prev {
            if y < y0 {
                return Err(RbxError::NonMonotoneLoss {
                    x0,
                    y0,
                    x1: x,
                    y1: y,
                });
            }
        }
        prev = Some((x, y));
    }
    Ok(())
}

impl Loss {
    pub fn scaled_log(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(RbxError::InvalidConfig(format!(
                "scaled-log scale must be positive, got {scale}"
            )));
        }
        Ok(Loss::ScaledLog { scale })
    }

    /// Wraps a user loss after checking it is finite and nondecreasing on a grid.
    pub fn custom<F>(name: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_monotone(&f)?;
        Ok(Loss::Custom {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Loss::Identity => x,
            Loss::ScaledLog { scale } => scale * x.ln_1p(),
            Loss::Custom { f, .. } => f(x),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Loss::Identity)
    }
}

/// Parameters of the description-length criterion.
#[derive(Debug, Clone, Serialize)]
pub struct MdlConfig {
    lambda: f64,
    loss: Loss,
    tol: f64,
    rank_bound: usize,
    max_iter: usize,
    seed: u64,
}

impl MdlConfig {
    /// Identity loss, `tol = 1e-9`, no rank bound beyond the ambient dimension.
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(RbxError::InvalidConfig(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            loss: Loss::Identity,
            tol: DEFAULT_TOL,
            rank_bound: usize::MAX,
            max_iter: EigenOptions::default().max_iter,
            seed: 0,
        })
    }

    pub fn with_loss(mut self, loss: Loss) -> Self {
        self.loss = loss;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(RbxError::InvalidConfig(format!(
                "tol must be positive, got {tol}"
            )));
        }
        self.tol = tol;
        Ok(self)
    }

    pub fn with_rank_bound(mut self, rank_bound: usize) -> Result<Self> {
        if rank_bound == 0 {
            return Err(RbxError::InvalidConfig(
                "rank_bound must be at least 1".into(),
            ));
        }
        self.rank_bound = rank_bound;
        Ok(self)
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Result<Self> {
        if max_iter == 0 {
            return Err(RbxError::InvalidConfig(
                "max_iter must be at least 1".into(),
            ));
        }
        self.max_iter = max_iter;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut cfg = MdlConfig::new(lambda)?;
        cfg.loss = self.loss.clone();
        cfg.tol = self.tol;
        cfg.rank_bound = self.rank_bound;
        cfg.max_iter = self.max_iter;
        cfg.seed = self.seed;
        Ok(cfg)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn loss(&self) -> &Loss {
        &self.loss
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }
}

/// Weighted fit term `Σ w · ℓ(‖r_S(u)‖²)`, summed in item order.
pub fn fit_term(s: &Subspace, data: &Dataset, loss: &Loss) -> Result<f64> {
    data.iter().try_fold(0.0, |acc, item| {
        let r = s.residual(item.coords())?;
        Ok(acc + item.weight() * loss.eval(norm_sq(&r)))
    })
}

/// `L(S; D)`.
pub fn description_length(s: &Subspace, data: &Dataset, cfg: &MdlConfig) -> Result<f64> {
    data.check_dim(s.ambient_dim())?;
    Ok(fit_term(s, data, cfg.loss())? + cfg.lambda() * s.dim() as f64)
}

fn check_extension(c: &Subspace, c_prime: &Subspace, tol: f64) -> Result<()> {
    let deviation = c_prime.containment_deviation(c)?;
    if !(deviation <= tol) {
        return Err(RbxError::InvalidExtension { deviation });
    }
    Ok(())
}

/// `G_D(C') = Σ_u w(u) [ℓ(‖r_C(u)‖²) − ℓ(‖r_C'(u)‖²)]`, requiring `C ⊆ C'`.
pub fn gain(c: &Subspace, c_prime: &Subspace, data: &Dataset, cfg: &MdlConfig) -> Result<f64> {
    data.check_dim(c.ambient_dim())?;
    check_extension(c, c_prime, cfg.tol())?;
    let loss = cfg.loss();
    data.iter().try_fold(0.0, |acc, item| {
        let before = loss.eval(norm_sq(&c.residual(item.coords())?));
        let after = loss.eval(norm_sq(&c_prime.residual(item.coords())?));
        Ok(acc + item.weight() * (before - after))
    })
}

/// Verdict of the acceptance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Acceptance {
    pub accepted: bool,
    /// `L(C; D) − L(C'; D)`; positive iff accepted.
    pub margin: f64,
    pub dl_before: f64,
    pub dl_after: f64,
}

/// Strict comparison `L(C'; D) < L(C; D)`. Exact ties reject.
///
/// The comparison is made on `G − λ·(dim C' − dim C)` rather than on the two
/// totals, so the verdict always agrees with `gain(..) > λ·Δdim`.
pub fn is_accepted(
    c: &Subspace,
    c_prime: &Subspace,
    data: &Dataset,
    cfg: &MdlConfig,
) -> Result<Acceptance> {
    let g = gain(c, c_prime, data, cfg)?;
    let added = (c_prime.dim() - c.dim()) as f64;
    let margin = g - cfg.lambda() * added;
    Ok(Acceptance {
        accepted: margin > 0.0,
        margin,
        dl_before: description_length(c, data, cfg)?,
        dl_after: description_length(c_prime, data, cfg)?,
    })
}
