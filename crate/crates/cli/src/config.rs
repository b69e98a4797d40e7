//! Run configuration loaded from JSON.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rbx_core::{orthonormalize, Loss, MdlConfig, Subspace, DEFAULT_TOL};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossSpec {
    #[default]
    Identity,
    #[serde(alias = "scaled_log")]
    ScaledLog { scale: f64 },
}

impl LossSpec {
    pub fn to_loss(&self) -> Result<Loss> {
        Ok(match self {
            LossSpec::Identity => Loss::Identity,
            LossSpec::ScaledLog { scale } => Loss::scaled_log(*scale)?,
        })
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// Contents of the `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub ambient_dim: Option<usize>,
    pub lambda: f64,
    #[serde(default)]
    pub loss: LossSpec,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub rank_bound: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_basis: Option<Vec<Vec<f64>>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("invalid config JSON")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            bail!(
                "lambda must be a positive finite number, got {}",
                self.lambda
            );
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            bail!("tol must be a positive finite number, got {}", self.tol);
        }
        if self.rank_bound == Some(0) {
            bail!("rank_bound must be at least 1");
        }
        if self.ambient_dim == Some(0) {
            bail!("ambient_dim must be at least 1");
        }
        if let Some(basis) = &self.initial_basis {
            let lens: Vec<usize> = basis.iter().map(Vec::len).collect();
            if lens.windows(2).any(|w| w[0] != w[1]) {
                bail!("initial_basis rows have different lengths");
            }
            if let (Some(n), Some(&m)) = (self.ambient_dim, lens.first()) {
                if n != m {
                    bail!("initial_basis vectors have length {m} but ambient_dim is {n}");
                }
            }
        }
        Ok(())
    }

    /// Dimension fixed by the config itself, if any.
    pub fn declared_dim(&self) -> Option<usize> {
        self.ambient_dim.or_else(|| {
            self.initial_basis
                .as_ref()
                .and_then(|b| b.first())
                .map(Vec::len)
        })
    }

    /// Fills in defaults that depend on the ambient dimension.
    pub fn resolve(&self, ambient_dim: usize, seed: Option<u64>) -> Result<Resolved> {
        if let Some(n) = self.declared_dim() {
            if n != ambient_dim {
                bail!("config declares dimension {n} but data has dimension {ambient_dim}");
            }
        }
        let rank_bound = self.rank_bound.unwrap_or(ambient_dim).max(1);
        let seed = seed.unwrap_or(self.seed);
        let mdl = MdlConfig::new(self.lambda)?
            .with_loss(self.loss.to_loss()?)
            .with_tol(self.tol)?
            .with_rank_bound(rank_bound)?
            .with_seed(seed);
        let base = match &self.initial_basis {
            Some(rows) => orthonormalize(ambient_dim, rows, self.tol)?,
            None => Subspace::zero(ambient_dim, self.tol),
        };
        let echo = RunConfig {
            ambient_dim: Some(ambient_dim),
            rank_bound: Some(rank_bound),
            seed,
            initial_basis: Some(base.basis().to_vec()),
            ..self.clone()
        };
        Ok(Resolved { echo, mdl, base })
    }
}

/// A config bound to a concrete dimension.
#[derive(Debug, Clone)]
pub struct Resolved {
    /// What actually ran, with every default made explicit.
    pub echo: RunConfig,
    pub mdl: MdlConfig,
    pub base: Subspace,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse(r#"{"lambda": 5}"#).unwrap();
        assert_eq!(cfg.loss, LossSpec::Identity);
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.seed, 0);
        let r = cfg.resolve(3, None).unwrap();
        assert_eq!(r.base.dim(), 0);
        assert_eq!(r.mdl.rank_bound(), 3);
        assert_eq!(r.echo.rank_bound, Some(3));
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        assert!(RunConfig::parse(r#"{"lambda": 0}"#).is_err());
        assert!(RunConfig::parse(r#"{"lambda": -1.5}"#).is_err());
        assert!(RunConfig::parse(r#"{}"#).is_err());
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(RunConfig::parse(r#"{"lambda": 1, "lamda": 2}"#).is_err());
    }

    #[test]
    fn parses_scaled_log() {
        let cfg = RunConfig::parse(r#"{"lambda": 1, "loss": {"kind": "scaled-log", "scale": 2}}"#)
            .unwrap();
        assert_eq!(cfg.loss, LossSpec::ScaledLog { scale: 2.0 });
        assert!(
            RunConfig::parse(r#"{"lambda": 1, "loss": {"kind": "scaled_log", "scale": 2}}"#)
                .is_ok()
        );
        assert!(RunConfig::parse(r#"{"lambda": 1, "loss": {"kind": "cubic"}}"#).is_err());
    }

    #[test]
    fn initial_basis_is_orthonormalized() {
        let cfg =
            RunConfig::parse(r#"{"lambda": 1, "initial_basis": [[2, 0, 0], [1, 1, 0]]}"#).unwrap();
        let r = cfg.resolve(3, Some(9)).unwrap();
        assert_eq!(r.base.basis(), &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(r.echo.seed, 9);
        assert!(cfg.resolve(2, None).is_err());
    }
}
