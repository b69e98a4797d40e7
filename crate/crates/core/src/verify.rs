//! Randomized checkers for the structural properties of MDL-governed extension.
//!
//! Each check draws instances from an [`InstanceGenerator`], evaluates one
//! identity or inequality per instance, and records every violation together
//! with the seed that regenerates the offending instance. Trials run in
//! parallel; results are merged in trial order so reports are reproducible.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{RbxError, Result};
use crate::extension::{
    extend_greedy, novelty_rank, strip_to_residual_support, AdmissibleExtension,
};
use crate::imagination::{classify_simulation, Mechanism, SimulationBatch};
use crate::linalg::{
    axpy, norm, orthonormalize, residual_covariance, residual_span, spectrum, sub, Dataset,
    ExperienceVector, Subspace,
};
use crate::mdl::{description_length, gain, is_accepted, Loss, MdlConfig};

/// Relative tolerance for identities that are exact in real arithmetic.
pub const IDENTITY_TOL: f64 = 1e-8;

/// Seeded source of random problem instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceGenerator {
    pub seed: u64,
    pub ambient_dim: (usize, usize),
    pub base_dim: (usize, usize),
    pub dataset_size: (usize, usize),
    pub weight: (f64, f64),
    pub scale: f64,
}

impl InstanceGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ambient_dim: (2, 8),
            base_dim: (0, 7),
            dataset_size: (1, 64),
            weight: (0.5, 3.0),
            scale: 1.0,
        }
    }

    pub fn with_ambient_dim(mut self, lo: usize, hi: usize) -> Self {
        self.ambient_dim = (lo, hi);
        self
    }

    pub fn with_base_dim(mut self, lo: usize, hi: usize) -> Self {
        self.base_dim = (lo, hi);
        self
    }

    pub fn with_dataset_size(mut self, lo: usize, hi: usize) -> Self {
        self.dataset_size = (lo, hi);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn validate(&self) -> Result<()> {
        let (nlo, nhi) = self.ambient_dim;
        let (slo, shi) = self.dataset_size;
        let (wlo, whi) = self.weight;
        if nlo < 1 || nlo > nhi || self.base_dim.0 > self.base_dim.1 || slo > shi {
            return Err(RbxError::InvalidConfig("empty generator range".into()));
        }
        if !(wlo > 0.0 && wlo <= whi && self.scale > 0.0) {
            return Err(RbxError::InvalidConfig(
                "weights and scale must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Seed of the `trial`-th instance.
    pub fn instance_seed(&self, trial: usize) -> u64 {
        // splitmix64 finalizer over (seed, trial)
        let mut z = self
            .seed
            .wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Regenerates an instance from its seed.
    pub fn instance(&self, instance_seed: u64) -> Result<Instance> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
        let tol = crate::linalg::DEFAULT_TOL;
        let n = rng.random_range(self.ambient_dim.0..=self.ambient_dim.1);
        let k_hi = self.base_dim.1.min(n - 1);
        let k_lo = self.base_dim.0.min(k_hi);
        let k = rng.random_range(k_lo..=k_hi);
        let base = random_subspace_of(&mut rng, &Subspace::full(n, tol), k);
        let outside = base.complement();
        let m = rng.random_range(0..=outside.dim());
        let source = random_subspace_of(&mut rng, &outside, m);

        let size = rng.random_range(self.dataset_size.0..=self.dataset_size.1);
        let mut data = Dataset::new(n);
        for _ in 0..size {
            let mut v = vec![0.0; n];
            for b in base.basis().iter().chain(source.basis()) {
                let z: f64 = StandardNormal.sample(&mut rng);
                axpy(self.scale * z, b, &mut v);
            }
            let w = rng.random_range(self.weight.0..=self.weight.1);
            data.push(ExperienceVector::new(v, w)?)?;
        }
        let w = residual_span(&base, &data, tol)?;
        let energy = residual_covariance(&base, &data)?.trace();
        let floor = 1e-3 * self.scale * self.scale;
        let lambda = floor + rng.random_range(0.02..1.0) * energy / (m.max(1) as f64);
        let rest_seed = rng.random();
        Ok(Instance {
            seed: instance_seed,
            scale: self.scale,
            base,
            data,
            residual_span: w,
            lambda,
            rest_seed,
        })
    }
}

/// Random `dim`-dimensional subspace of `within`.
fn random_subspace_of(rng: &mut ChaCha8Rng, within: &Subspace, dim: usize) -> Subspace {
    let n = within.ambient_dim();
    let tol = within.tol();
    let dim = dim.min(within.dim());
    loop {
        let vectors: Vec<Vec<f64>> = (0..dim)
            .map(|_| {
                let mut v = vec![0.0; n];
                for b in within.basis() {
                    let z: f64 = StandardNormal.sample(&mut *rng);
                    axpy(z, b, &mut v);
                }
                v
            })
            .collect();
        let s = orthonormalize(n, &vectors, tol).expect("dimensions agree");
        if s.dim() == dim {
            return s;
        }
    }
}

/// One generated problem: base space, data, its residual span and a penalty.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub scale: f64,
    pub base: Subspace,
    pub data: Dataset,
    pub residual_span: Subspace,
    pub lambda: f64,
    rest_seed: u64,
}

impl Instance {
    pub fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }

    /// Independent stream for per-check randomness.
    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rest_seed ^ salt.wrapping_mul(0xD6E8_FEB8_6659_FD93))
    }

    /// `C⊥ ∩ W⊥`
    pub fn invisible_space(&self) -> Result<Subspace> {
        Ok(self.base.direct_sum(&self.residual_span)?.complement())
    }

    /// A W-reducible novelty subspace with `a` dimensions in `W` and `b` in
    /// `C⊥ ∩ W⊥`, presented through a rotated basis that mixes the two parts.
    pub fn reducible_novelty(&self, rng: &mut ChaCha8Rng, a: usize, b: usize) -> Result<Subspace> {
        let inside = random_subspace_of(rng, &self.residual_span, a);
        let outside = random_subspace_of(rng, &self.invisible_space()?, b);
        let union = inside.direct_sum(&outside)?;
        Ok(random_subspace_of(rng, &union, union.dim()))
    }

    pub fn config(&self, loss: Loss) -> Result<MdlConfig> {
        Ok(MdlConfig::new(self.lambda)?.with_loss(loss))
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.ambient_dim() as u64).to_le_bytes());
        for b in self.base.basis() {
            for x in b {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        for item in self.data.iter() {
            for x in item.coords() {
                h.update(x.to_bits().to_le_bytes());
            }
            h.update(item.weight().to_bits().to_le_bytes());
        }
        h.update(self.lambda.to_bits().to_le_bytes());
        hex::encode(&h.finalize()[..8])
    }

    /// Absolute tolerance for description-length identities on this instance.
    pub fn dl_tol(&self) -> f64 {
        IDENTITY_TOL * self.scale * self.scale
    }

    pub fn vec_tol(&self) -> f64 {
        IDENTITY_TOL * self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckFailure {
    pub trial: usize,
    pub seed: u64,
    pub digest: String,
    pub observed: f64,
    pub bound: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub failures: Vec<CheckFailure>,
    pub max_deviation: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Hash of the full report content; equal for bit-identical reports.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        h.update((self.instances as u64).to_le_bytes());
        h.update(self.max_deviation.to_bits().to_le_bytes());
        for f in &self.failures {
            h.update((f.trial as u64).to_le_bytes());
            h.update(f.seed.to_le_bytes());
            h.update(f.digest.as_bytes());
            h.update(f.observed.to_bits().to_le_bytes());
            h.update(f.bound.to_bits().to_le_bytes());
            h.update(f.detail.as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

#[derive(Default)]
struct Trial {
    deviation: f64,
    failures: Vec<CheckFailure>,
}

impl Trial {
    fn observe(
        &mut self,
        inst: &Instance,
        trial: usize,
        observed: f64,
        bound: f64,
        ok: bool,
        detail: impl fmt::Display,
    ) {
        if observed.is_finite() {
            self.deviation = self.deviation.max(observed);
        }
        if !ok {
            self.failures.push(CheckFailure {
                trial,
                seed: inst.seed,
                digest: inst.digest(),
                observed,
                bound,
                detail: detail.to_string(),
            });
        }
    }
}

fn run_trials<F>(name: &str, gen: &InstanceGenerator, trials: usize, body: F) -> Result<CheckReport>
where
    F: Fn(&Instance, usize, &mut Trial) -> Result<()> + Sync,
{
    if trials == 0 {
        return Err(RbxError::InvalidConfig("trials must be at least 1".into()));
    }
    gen.validate()?;
    let outcomes: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = gen.instance_seed(t);
            let mut out = Trial::default();
            match gen.instance(seed) {
                Ok(inst) => {
                    if let Err(e) = body(&inst, t, &mut out) {
                        out.observe(&inst, t, f64::NAN, 0.0, false, format!("error: {e}"));
                    }
                }
                Err(e) => out.failures.push(CheckFailure {
                    trial: t,
                    seed,
                    digest: String::new(),
                    observed: f64::NAN,
                    bound: 0.0,
                    detail: format!("instance generation failed: {e}"),
                }),
            }
            out
        })
        .collect();
    let mut report = CheckReport {
        name: name.to_string(),
        instances: trials,
        failures: Vec::new(),
        max_deviation: 0.0,
    };
    for o in outcomes {
        report.max_deviation = report.max_deviation.max(o.deviation);
        report.failures.extend(o.failures);
    }
    Ok(report)
}

fn random_split(rng: &mut ChaCha8Rng, inst: &Instance) -> Result<(usize, usize)> {
    let a = rng.random_range(0..=inst.residual_span.dim());
    let b = rng.random_range(0..=inst.invisible_space()?.dim());
    Ok((a, b))
}

/// `dim(C') − dim(C) = dim(U) = rank(Π_C' − Π_C) <= r`, and the admissibility
/// constructor refuses `dim(U) = r + 1`.
pub fn check_low_rank_novelty(gen: &InstanceGenerator, trials: usize) -> Result<CheckReport> {
    run_trials("low_rank_novelty", gen, trials, |inst, t, out| {
        let mut rng = inst.rng(1);
        let (a, b) = random_split(&mut rng, inst)?;
        let u = inst.reducible_novelty(&mut rng, a, b)?;
        let n = inst.ambient_dim();
        let r = rng.random_range(u.dim().max(1)..=n);
        let cfg = inst.config(Loss::Identity)?.with_rank_bound(r)?;
        let ext = AdmissibleExtension::new(&inst.base, &u, &inst.data, &cfg)?;
        let rank = novelty_rank(&inst.base, ext.extended())?;
        let added = ext.extended().dim() - inst.base.dim();
        let ok = rank == u.dim() && added == u.dim() && rank <= r;
        out.observe(
            inst,
            t,
            rank.abs_diff(u.dim()) as f64,
            0.0,
            ok,
            format_args!("rank {rank}, added {added}, dim(U) {}, r {r}", u.dim()),
        );
        if u.dim() >= 2 {
            let tight = cfg.with_rank_bound(u.dim() - 1)?;
            let guarded = matches!(
                AdmissibleExtension::new(&inst.base, &u, &inst.data, &tight),
                Err(RbxError::RankBoundExceeded { .. })
            );
            out.observe(
                inst,
                t,
                0.0,
                0.0,
                guarded,
                "rank bound r = dim(U) - 1 was not enforced",
            );
        }
        Ok(())
    })
}

/// `Π_{C⊕U} u = Π_{C⊕(U∩W)} u` for every item.
pub fn check_fit_invariance(gen: &InstanceGenerator, trials: usize) -> Result<CheckReport> {
    run_trials("fit_invariance", gen, trials, |inst, t, out| {
        let mut rng = inst.rng(2);
        let (a, b) = random_split(&mut rng, inst)?;
        let u = inst.reducible_novelty(&mut rng, a, b)?;
        let cfg = inst.config(Loss::Identity)?;
        let ext = AdmissibleExtension::new(&inst.base, &u, &inst.data, &cfg)?;
        let restricted = ext.restricted()?;
        let mut worst = 0.0f64;
        for item in inst.data.iter() {
            let full = ext.extended().project(item.coords())?;
            let hat = restricted.project(item.coords())?;
            worst = worst.max(norm(&sub(&full, &hat)));
        }
        let bound = inst.vec_tol();
        out.observe(
            inst,
            t,
            worst,
            bound,
            worst <= bound,
            format_args!("dim(U∩W)={a}, dim(U∩W⊥)={b}"),
        );
        Ok(())
    })
}

fn alternating_loss(t: usize) -> Loss {
    if t.is_multiple_of(2) {
        Loss::Identity
    } else {
        Loss::ScaledLog { scale: 1.0 }
    }
}

/// `L(C⊕U) = L(C) + λ dim(U)` for `U ⊆ C⊥ ∩ W⊥`, and never accepted.
pub fn check_no_orthogonal_gain(gen: &InstanceGenerator, trials: usize) -> Result<CheckReport> {
    run_trials("no_orthogonal_gain", gen, trials, |inst, t, out| {
        let mut rng = inst.rng(3);
        let invisible = inst.invisible_space()?;
        let b = rng.random_range(0..=invisible.dim());
        let u = random_subspace_of(&mut rng, &invisible, b);
        let cfg = inst.config(alternating_loss(t))?;
        let extended = inst.base.direct_sum(&u)?;
        let delta = description_length(&extended, &inst.data, &cfg)?
            - description_length(&inst.base, &inst.data, &cfg)?;
        let dev = (delta - inst.lambda * b as f64).abs();
        let bound = inst.dl_tol();
        out.observe(
            inst,
            t,
            dev,
            bound,
            dev <= bound,
            format_args!("ΔL={delta}, λ={}, dim(U)={b}", inst.lambda),
        );
        let verdict = is_accepted(&inst.base, &extended, &inst.data, &cfg)?;
        out.observe(
            inst,
            t,
            0.0,
            0.0,
            !verdict.accepted,
            "W⊥ novelty was accepted",
        );
        Ok(())
    })
}

pub const THRESHOLD_CANDIDATES: usize = 10;

/// For one-dimensional candidates, `is_accepted ⟺ gain > λ`, under the
/// identity and scaled-log losses.
pub fn check_threshold(gen: &InstanceGenerator, trials: usize) -> Result<CheckReport> {
    run_trials("threshold", gen, trials, |inst, t, out| {
        let mut rng = inst.rng(4);
        let complement = inst.base.complement();
        if complement.is_zero() {
            return Ok(());
        }
        let candidates: Vec<Subspace> = (0..THRESHOLD_CANDIDATES)
            .map(|_| {
                let v = random_subspace_of(&mut rng, &complement, 1);
                inst.base.direct_sum(&v)
            })
            .collect::<Result<_>>()?;
        for loss in [Loss::Identity, Loss::ScaledLog { scale: 1.0 }] {
            let probe = inst.config(loss.clone())?;
            let gains = candidates
                .iter()
                .map(|cp| gain(&inst.base, cp, &inst.data, &probe))
                .collect::<Result<Vec<_>>>()?;
            // centre λ on one candidate's gain so both verdicts occur
            let pivot = gains[rng.random_range(0..gains.len())];
            let lambda = if pivot > 0.0 {
                pivot * rng.random_range(0.5..1.5)
            } else {
                inst.lambda
            };
            let cfg = probe.with_lambda(lambda)?;
            for (cp, g) in candidates.iter().zip(&gains) {
                let verdict = is_accepted(&inst.base, cp, &inst.data, &cfg)?;
                let agree = verdict.accepted == (*g > lambda);
                out.observe(
                    inst,
                    t,
                    if agree { 0.0 } else { 1.0 },
                    0.0,
                    agree,
                    format_args!(
                        "{loss:?}: gain {g}, λ {lambda}, accepted {}",
                        verdict.accepted
                    ),
                );
            }
        }
        Ok(())
    })
}

/// `L(C ⊕ (U∩W)) <= L(C ⊕ U)`, with the difference exactly `λ dim(U∩W⊥)`,
/// and acceptance carries over to the stripped extension.
pub fn check_dominance(gen: &InstanceGenerator, trials: usize) -> Result<CheckReport> {
    run_trials("dominance", gen, trials, |inst, t, out| {
        let mut rng = inst.rng(5);
        let (a, b) = random_split(&mut rng, inst)?;
        let u = inst.reducible_novelty(&mut rng, a, b)?;
        let cfg = inst.config(alternating_loss(t))?;
        let s = strip_to_residual_support(&inst.base, &u, &inst.data, &cfg)?;
        let bound = inst.dl_tol();
        let excess = s.dl_stripped - s.dl_original;
        out.observe(
            inst,
            t,
            excess.max(0.0),
            bound,
            excess <= bound,
            format_args!("dl_stripped exceeds dl_original by {excess}"),
        );
        let expected = inst.lambda * s.dropped.dim() as f64;
        let dev = (s.dl_original - s.dl_stripped - expected).abs();
        out.observe(
            inst,
            t,
            dev,
            bound,
            dev <= bound,
            format_args!(
                "dl drop {} vs λ·dim(U∩W⊥) {expected}",
                s.dl_original - s.dl_stripped
            ),
        );
        let base_dl = description_length(&inst.base, &inst.data, &cfg)?;
        if s.dl_original < base_dl {
            out.observe(
                inst,
                t,
                0.0,
                0.0,
                s.dl_stripped < base_dl,
                "accepted original, rejected stripped",
            );
        }
        Ok(())
    })
}

/// Fifty log-spaced penalties from 1e-2 to 1e3.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..50)
        .map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / 49.0))
        .collect()
}

/// Tolerance for locating acceptance steps on the λ axis.
pub const STEP_TOL: f64 = 1e-6;

/// Zero-residual data never grows; accepted dimension is nonincreasing in λ
/// and steps down exactly at residual-covariance eigenvalues; simulation with
/// no residual leaves every verdict unchanged.
pub fn check_signatures(
    gen: &InstanceGenerator,
    trials: usize,
    lambda_grid: &[f64],
) -> Result<CheckReport> {
    if lambda_grid.is_empty()
        || lambda_grid.windows(2).any(|w| !(w[0] < w[1]))
        || !(lambda_grid[0] > 0.0)
    {
        return Err(RbxError::InvalidConfig(
            "lambda grid must be positive and strictly increasing".into(),
        ));
    }
    run_trials("signatures", gen, trials, |inst, t, out| {
        let n = inst.ambient_dim();
        let base_cfg = inst.config(Loss::Identity)?.with_rank_bound(n)?;

        // perfect fit: project every item onto C
        let fitted = Dataset::from_weighted(
            n,
            inst.data
                .iter()
                .map(|it| Ok((inst.base.project(it.coords())?, it.weight())))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let inert = SimulationBatch::new(fitted.clone(), "inert");

        let eigenvalues: Vec<f64> = spectrum(
            residual_covariance(&inst.base, &inst.data)?.matrix(),
            &base_cfg.eigen_options(),
        )?
        .into_iter()
        .map(|p| p.value)
        .collect();

        let mut prev_dims = usize::MAX;
        for &lambda in lambda_grid {
            let cfg = base_cfg.with_lambda(lambda)?;

            let still = extend_greedy(&inst.base, &fitted, &cfg)?.accepted_dims();
            out.observe(
                inst,
                t,
                still as f64,
                0.0,
                still == 0,
                format_args!("perfect fit grew {still} dims at λ={lambda}"),
            );

            let dims = extend_greedy(&inst.base, &inst.data, &cfg)?.accepted_dims();
            out.observe(
                inst,
                t,
                0.0,
                0.0,
                dims <= prev_dims,
                format_args!("accepted dims rose to {dims} at λ={lambda}"),
            );
            prev_dims = dims;

            let near_step = eigenvalues
                .iter()
                .any(|mu| (mu - lambda).abs() <= STEP_TOL * lambda.max(1.0));
            if !near_step {
                let expected = eigenvalues.iter().filter(|&&mu| mu > lambda).count();
                out.observe(
                    inst,
                    t,
                    dims.abs_diff(expected) as f64,
                    0.0,
                    dims == expected,
                    format_args!(
                        "{dims} accepted dims at λ={lambda}, {expected} eigenvalues above"
                    ),
                );
            }

            let report = classify_simulation(&inst.base, &inst.data, &inert, &cfg)?;
            let unchanged = report.classification == Mechanism::Inert
                && report.proposal_ext.accepted == report.proposal_all.accepted;
            out.observe(
                inst,
                t,
                0.0,
                0.0,
                unchanged,
                format_args!("inert batch changed the verdict at λ={lambda}"),
            );
        }
        Ok(())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    LowRankNovelty,
    FitInvariance,
    NoOrthogonalGain,
    Threshold,
    Dominance,
    Signatures,
}

impl CheckName {
    pub const ALL: [CheckName; 6] = [
        CheckName::LowRankNovelty,
        CheckName::FitInvariance,
        CheckName::NoOrthogonalGain,
        CheckName::Threshold,
        CheckName::Dominance,
        CheckName::Signatures,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::LowRankNovelty => "low_rank_novelty",
            CheckName::FitInvariance => "fit_invariance",
            CheckName::NoOrthogonalGain => "no_orthogonal_gain",
            CheckName::Threshold => "threshold",
            CheckName::Dominance => "dominance",
            CheckName::Signatures => "signatures",
        }
    }

    pub fn run(
        self,
        gen: &InstanceGenerator,
        trials: usize,
        lambda_grid: &[f64],
    ) -> Result<CheckReport> {
        match self {
            CheckName::LowRankNovelty => check_low_rank_novelty(gen, trials),
            CheckName::FitInvariance => check_fit_invariance(gen, trials),
            CheckName::NoOrthogonalGain => check_no_orthogonal_gain(gen, trials),
            CheckName::Threshold => check_threshold(gen, trials),
            CheckName::Dominance => check_dominance(gen, trials),
            CheckName::Signatures => check_signatures(gen, trials, lambda_grid),
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = RbxError;

    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| RbxError::InvalidConfig(format!("unknown check `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_reproducible() {
        let gen = InstanceGenerator::new(7);
        let a = gen.instance(gen.instance_seed(3)).unwrap();
        let b = gen.instance(gen.instance_seed(3)).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.data, b.data);
        let c = gen.instance(gen.instance_seed(4)).unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn instances_respect_ranges() {
        let gen = InstanceGenerator::new(1)
            .with_ambient_dim(3, 5)
            .with_dataset_size(2, 4);
        for t in 0..50 {
            let inst = gen.instance(gen.instance_seed(t)).unwrap();
            assert!((3..=5).contains(&inst.ambient_dim()));
            assert!((2..=4).contains(&inst.data.len()));
            assert!(inst.base.dim() < inst.ambient_dim());
            assert!(inst.lambda > 0.0);
            assert!(inst.base.overlap(&inst.residual_span).unwrap() < 1e-12);
        }
    }

    #[test]
    fn reducible_novelty_is_reducible() {
        let gen = InstanceGenerator::new(11);
        for t in 0..50 {
            let inst = gen.instance(gen.instance_seed(t)).unwrap();
            let mut rng = inst.rng(99);
            let (a, b) = random_split(&mut rng, &inst).unwrap();
            let u = inst.reducible_novelty(&mut rng, a, b).unwrap();
            assert_eq!(u.dim(), a + b);
            let cfg = inst.config(Loss::Identity).unwrap();
            let ext = AdmissibleExtension::new(&inst.base, &u, &inst.data, &cfg).unwrap();
            assert_eq!(ext.supported().dim(), a);
            assert_eq!(ext.unsupported().dim(), b);
        }
    }

    #[test]
    fn small_runs_pass() {
        let gen = InstanceGenerator::new(3);
        for name in CheckName::ALL {
            let r = name.run(&gen, 20, &default_lambda_grid()).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.failures);
            assert_eq!(r.instances, 20);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let gen = InstanceGenerator::new(5);
        let a = check_dominance(&gen, 30).unwrap();
        let b = check_dominance(&gen, 30).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn rejects_bad_inputs() {
        let gen = InstanceGenerator::new(0);
        assert!(check_threshold(&gen, 0).is_err());
        assert!(check_signatures(&gen, 1, &[2.0, 1.0]).is_err());
        assert!(check_signatures(&gen, 1, &[]).is_err());
        assert!("nope".parse::<CheckName>().is_err());
        assert_eq!(
            "threshold".parse::<CheckName>().unwrap(),
            CheckName::Threshold
        );
    }
}
