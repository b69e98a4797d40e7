//! Subcommand implementations. Each returns a serializable report; nothing
//! here touches the filesystem.

use std::fmt::Write as _;

use anyhow::{bail, ensure, Result};
use serde::Serialize;

use rbx_core::verify::default_lambda_grid;
use rbx_core::{
    classify_simulation, description_length, extend_greedy, gain_decomposition, propose_one_dim,
    residual_covariance, residual_span, spectrum, CheckName, CheckReport, Dataset,
    ExtensionProposal, ExtensionTrace, GainDecomposition, InstanceGenerator, MechanismReport,
    SimulationBatch, StopReason,
};

use crate::config::{Resolved, RunConfig};

/// Reports that can also be written as a whitespace-separated table.
pub trait PlotTable {
    fn plot_table(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetDigest {
    pub count: usize,
    pub dim: usize,
    pub total_weight: f64,
}

impl From<&Dataset> for DatasetDigest {
    fn from(d: &Dataset) -> Self {
        DatasetDigest {
            count: d.len(),
            dim: d.ambient_dim(),
            total_weight: d.total_weight(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub accepted_dims: usize,
    pub stop_reason: StopReason,
    pub final_basis: Vec<Vec<f64>>,
    pub steps: Vec<ExtensionProposal>,
}

impl From<ExtensionTrace> for TraceSummary {
    fn from(t: ExtensionTrace) -> Self {
        TraceSummary {
            accepted_dims: t.accepted_dims(),
            stop_reason: t.stop_reason,
            final_basis: t.final_space.basis().to_vec(),
            steps: t.steps,
        }
    }
}

fn step_rows(out: &mut String, label: Option<&str>, steps: &[ExtensionProposal]) {
    for (i, s) in steps.iter().enumerate() {
        if let Some(label) = label {
            let _ = write!(out, "{label} ");
        }
        let _ = writeln!(
            out,
            "{i} {} {} {} {} {}",
            s.eigenvalue, s.gain, s.dl_before, s.dl_after, s.accepted as u8
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub config: RunConfig,
    pub dataset: DatasetDigest,
    pub initial_basis: Vec<Vec<f64>>,
    pub description_length: f64,
    pub residual_energy: f64,
    pub residual_dim: usize,
    pub residual_basis: Vec<Vec<f64>>,
    /// Residual covariance spectrum, descending, padded with zeros to the ambient dimension.
    pub eigenvalues: Vec<f64>,
    pub proposal: ExtensionProposal,
}

pub fn cmd_analyze(run: &Resolved, data: &Dataset) -> Result<AnalyzeReport> {
    let (cfg, base) = (&run.mdl, &run.base);
    let cov = residual_covariance(base, data)?;
    let w = residual_span(base, data, cfg.tol())?;
    let mut eigenvalues: Vec<f64> = spectrum(cov.matrix(), &cfg.eigen_options())?
        .into_iter()
        .map(|p| p.value)
        .collect();
    eigenvalues.resize(data.ambient_dim(), 0.0);
    Ok(AnalyzeReport {
        config: run.echo.clone(),
        dataset: data.into(),
        initial_basis: base.basis().to_vec(),
        description_length: description_length(base, data, cfg)?,
        residual_energy: cov.trace(),
        residual_dim: w.dim(),
        residual_basis: w.basis().to_vec(),
        eigenvalues,
        proposal: propose_one_dim(base, data, cfg)?,
    })
}

impl PlotTable for AnalyzeReport {
    fn plot_table(&self) -> String {
        let mut out = String::from("# index eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{i} {v}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendReport {
    pub config: RunConfig,
    pub dataset: DatasetDigest,
    pub initial_basis: Vec<Vec<f64>>,
    pub description_length: f64,
    pub final_description_length: f64,
    #[serde(flatten)]
    pub trace: TraceSummary,
}

pub fn cmd_extend(run: &Resolved, data: &Dataset) -> Result<ExtendReport> {
    let (cfg, base) = (&run.mdl, &run.base);
    let trace = extend_greedy(base, data, cfg)?;
    Ok(ExtendReport {
        config: run.echo.clone(),
        dataset: data.into(),
        initial_basis: base.basis().to_vec(),
        description_length: description_length(base, data, cfg)?,
        final_description_length: description_length(&trace.final_space, data, cfg)?,
        trace: trace.into(),
    })
}

impl PlotTable for ExtendReport {
    fn plot_table(&self) -> String {
        let mut out = String::from("# step eigenvalue gain dl_before dl_after accepted\n");
        step_rows(&mut out, None, &self.trace.steps);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub config: RunConfig,
    pub dataset: DatasetDigest,
    pub simulated: DatasetDigest,
    pub initial_basis: Vec<Vec<f64>>,
    pub mechanism: MechanismReport,
    /// Gain split along the combined canonical direction, when there is one.
    pub decomposition: Option<GainDecomposition>,
    pub external: TraceSummary,
    pub combined: TraceSummary,
}

pub fn cmd_simulate(run: &Resolved, ext: &Dataset, sim: &Dataset) -> Result<SimulateReport> {
    let (cfg, base) = (&run.mdl, &run.base);
    ensure!(
        ext.ambient_dim() == sim.ambient_dim(),
        "simulated data has dimension {} but external data has dimension {}",
        sim.ambient_dim(),
        ext.ambient_dim()
    );
    let batch = SimulationBatch::new(sim.clone(), "simulated");
    let mechanism = classify_simulation(base, ext, &batch, cfg)?;
    let decomposition = match &mechanism.proposal_all.direction {
        Some(v) => Some(gain_decomposition(
            base,
            &base.with_direction(v)?,
            ext,
            &batch,
            cfg,
        )?),
        None => None,
    };
    let all = ext.concat(sim)?;
    Ok(SimulateReport {
        config: run.echo.clone(),
        dataset: ext.into(),
        simulated: sim.into(),
        initial_basis: base.basis().to_vec(),
        mechanism,
        decomposition,
        external: extend_greedy(base, ext, cfg)?.into(),
        combined: extend_greedy(base, &all, cfg)?.into(),
    })
}

impl PlotTable for SimulateReport {
    fn plot_table(&self) -> String {
        let mut out = String::from("# trace step eigenvalue gain dl_before dl_after accepted\n");
        step_rows(&mut out, Some("external"), &self.external.steps);
        step_rows(&mut out, Some("combined"), &self.combined.steps);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub accepted_dims: usize,
    pub eigenvalues: Vec<f64>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: RunConfig,
    pub dataset: DatasetDigest,
    pub initial_basis: Vec<Vec<f64>>,
    pub points: Vec<SweepPoint>,
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    ensure!(!grid.is_empty(), "lambda grid is empty");
    if let Some(bad) = grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        bail!("lambda grid values must be positive and finite, got {bad}");
    }
    if let Some(w) = grid.windows(2).find(|w| w[0] >= w[1]) {
        bail!(
            "lambda grid must be strictly increasing ({} then {})",
            w[0],
            w[1]
        );
    }
    Ok(())
}

pub fn cmd_sweep(run: &Resolved, data: &Dataset, grid: &[f64]) -> Result<SweepReport> {
    validate_grid(grid)?;
    let points = grid
        .iter()
        .map(|&lambda| {
            let trace = extend_greedy(&run.base, data, &run.mdl.with_lambda(lambda)?)?;
            Ok(SweepPoint {
                lambda,
                accepted_dims: trace.accepted_dims(),
                eigenvalues: trace.accepted_eigenvalues(),
                stop_reason: trace.stop_reason,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        config: run.echo.clone(),
        dataset: data.into(),
        initial_basis: run.base.basis().to_vec(),
        points,
    })
}

impl PlotTable for SweepReport {
    fn plot_table(&self) -> String {
        let mut out = String::from("# lambda accepted_dims\n");
        for p in &self.points {
            let _ = writeln!(out, "{} {}", p.lambda, p.accepted_dims);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    #[serde(flatten)]
    pub report: CheckReport,
    pub passed: bool,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub lambda_grid: Vec<f64>,
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
}

pub fn cmd_verify(
    seed: u64,
    checks: &[CheckName],
    trials: usize,
    grid: Option<&[f64]>,
) -> Result<VerifyReport> {
    ensure!(trials >= 1, "trials must be at least 1");
    ensure!(!checks.is_empty(), "no checks selected");
    let lambda_grid = grid.map_or_else(default_lambda_grid, <[f64]>::to_vec);
    validate_grid(&lambda_grid)?;
    let gen = InstanceGenerator::new(seed);
    let checks = checks
        .iter()
        .map(|c| {
            let report = c.run(&gen, trials, &lambda_grid)?;
            Ok(CheckEntry {
                passed: report.passed(),
                digest: report.digest(),
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        seed,
        trials,
        lambda_grid,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

impl PlotTable for VerifyReport {
    fn plot_table(&self) -> String {
        let mut out = String::from("# check instances failures max_deviation\n");
        for c in &self.checks {
            let r = &c.report;
            let _ = writeln!(
                out,
                "{} {} {} {}",
                r.name,
                r.instances,
                r.failures.len(),
                r.max_deviation
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rbx_core::Mechanism;

    fn run(json: &str, n: usize) -> Resolved {
        RunConfig::parse(json).unwrap().resolve(n, None).unwrap()
    }

    fn data(n: usize, rows: &[(&[f64], f64)]) -> Dataset {
        Dataset::from_weighted(n, rows.iter().map(|(v, w)| (v.to_vec(), *w))).unwrap()
    }

    fn planar() -> Dataset {
        data(2, &[(&[3.0, 4.0], 1.0), (&[1.0, 2.0], 1.0)])
    }

    #[test]
    fn analyze_planar_example() {
        let r = cmd_analyze(
            &run(r#"{"lambda":5,"initial_basis":[[1,0]]}"#, 2),
            &planar(),
        )
        .unwrap();
        assert!((r.description_length - 25.0).abs() < 1e-9);
        assert_eq!(r.residual_dim, 1);
        assert!((r.eigenvalues[0] - 20.0).abs() < 1e-9);
        assert_eq!(r.eigenvalues.len(), 2);
        assert!(r.proposal.accepted);
    }

    #[test]
    fn analyze_empty_dataset() {
        let r = cmd_analyze(
            &run(r#"{"lambda":3,"initial_basis":[[1,0,0]]}"#, 3),
            &Dataset::new(3),
        )
        .unwrap();
        assert_eq!(r.description_length, 3.0);
        assert_eq!(r.residual_dim, 0);
        assert_eq!(r.eigenvalues, vec![0.0; 3]);
        assert!(r.proposal.direction.is_none());
    }

    #[test]
    fn analyze_combined_spectrum() {
        let d = data(3, &[(&[1.0, 2.0, 0.0], 3.0), (&[1.0, 0.0, 3.0], 1.0)]);
        let r = cmd_analyze(&run(r#"{"lambda":10,"initial_basis":[[1,0,0]]}"#, 3), &d).unwrap();
        assert!((r.eigenvalues[0] - 12.0).abs() < 1e-9);
        assert!((r.eigenvalues[1] - 9.0).abs() < 1e-9);
        assert!(r.eigenvalues[2].abs() < 1e-9);
    }

    #[test]
    fn extend_threshold_sides() {
        let r = cmd_extend(
            &run(r#"{"lambda":19,"initial_basis":[[1,0]]}"#, 2),
            &planar(),
        )
        .unwrap();
        assert_eq!(r.trace.accepted_dims, 1);
        assert_eq!(r.trace.final_basis.len(), 2);
        let r = cmd_extend(
            &run(r#"{"lambda":21,"initial_basis":[[1,0]]}"#, 2),
            &planar(),
        )
        .unwrap();
        assert_eq!(r.trace.accepted_dims, 0);
        assert_eq!(r.trace.stop_reason, StopReason::Rejected);
    }

    #[test]
    fn extend_zero_residual() {
        let d = data(2, &[(&[2.0, 0.0], 1.0)]);
        let r = cmd_extend(&run(r#"{"lambda":1,"initial_basis":[[1,0]]}"#, 2), &d).unwrap();
        assert_eq!(r.trace.accepted_dims, 0);
        assert_eq!(r.trace.stop_reason, StopReason::ExhaustedResiduals);
    }

    #[test]
    fn analyze_and_extend_agree() {
        let cfg = run(r#"{"lambda":2,"seed":4}"#, 2);
        let a = cmd_analyze(&cfg, &planar()).unwrap();
        let e = cmd_extend(&cfg, &planar()).unwrap();
        assert_eq!(a.description_length, e.description_length);
        assert_eq!(a.proposal, e.trace.steps[0]);
    }

    #[test]
    fn simulate_mechanisms() {
        let cfg = run(r#"{"lambda":10,"initial_basis":[[1,0,0]]}"#, 3);
        let ext = data(3, &[(&[1.0, 2.0, 0.0], 1.0)]);
        let enrich = data(3, &[(&[1.0, 0.0, 3.0], 1.0)]);
        let amp = data(3, &[(&[1.0, 2.0, 0.0], 2.0)]);
        let inside = data(3, &[(&[5.0, 0.0, 0.0], 1.0)]);
        assert_eq!(
            cmd_simulate(&cfg, &ext, &enrich)
                .unwrap()
                .mechanism
                .classification,
            Mechanism::Enrichment
        );
        let r = cmd_simulate(&cfg, &ext, &amp).unwrap();
        assert_eq!(r.mechanism.classification, Mechanism::Amplification);
        let g = r.decomposition.unwrap();
        assert!((g.g_ext - 4.0).abs() < 1e-9 && (g.g_all - 12.0).abs() < 1e-9);
        assert_eq!(r.external.accepted_dims, 0);
        assert_eq!(r.combined.accepted_dims, 1);
        assert_eq!(
            cmd_simulate(&cfg, &ext, &inside)
                .unwrap()
                .mechanism
                .classification,
            Mechanism::Inert
        );
        assert!(cmd_simulate(&cfg, &ext, &planar()).is_err());
    }

    #[test]
    fn sweep_examples() {
        let cfg = run(r#"{"lambda":1,"initial_basis":[[1,0]]}"#, 2);
        let r = cmd_sweep(&cfg, &planar(), &[10.0, 19.0, 21.0, 30.0]).unwrap();
        let dims: Vec<usize> = r.points.iter().map(|p| p.accepted_dims).collect();
        assert_eq!(dims, vec![1, 1, 0, 0]);

        let d = data(2, &[(&[2.0, 0.0], 5.0), (&[0.0, 2.0], 1.0)]);
        let r = cmd_sweep(&run(r#"{"lambda":1}"#, 2), &d, &[1.0, 10.0, 30.0]).unwrap();
        let dims: Vec<usize> = r.points.iter().map(|p| p.accepted_dims).collect();
        assert_eq!(dims, vec![2, 1, 0]);
        assert!(r.plot_table().starts_with("# lambda accepted_dims\n1 2\n"));

        let flat = data(2, &[(&[2.0, 0.0], 1.0)]);
        let r = cmd_sweep(&cfg, &flat, &[0.01, 1.0, 100.0]).unwrap();
        assert!(r.points.iter().all(|p| p.accepted_dims == 0));
    }

    #[test]
    fn sweep_rejects_bad_grid() {
        let cfg = run(r#"{"lambda":1}"#, 2);
        assert!(cmd_sweep(&cfg, &planar(), &[]).is_err());
        assert!(cmd_sweep(&cfg, &planar(), &[2.0, 1.0]).is_err());
        assert!(cmd_sweep(&cfg, &planar(), &[1.0, 1.0]).is_err());
        assert!(cmd_sweep(&cfg, &planar(), &[0.0, 1.0]).is_err());
    }

    #[test]
    fn verify_single_check() {
        let r = cmd_verify(7, &[CheckName::NoOrthogonalGain], 10, None).unwrap();
        assert!(r.passed);
        assert_eq!(r.checks.len(), 1);
        assert_eq!(r.checks[0].report.name, "no_orthogonal_gain");
        assert!(cmd_verify(7, &[CheckName::Threshold], 0, None).is_err());
    }
}
