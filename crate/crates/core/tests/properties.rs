use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use rbx_core::linalg::{dot, norm, norm_sq};
use rbx_core::{
    canonical_direction, classify_simulation, description_length, extend_greedy, gain,
    gain_decomposition, is_accepted, orthonormalize, residual_covariance, residual_span,
    strip_to_residual_support, top_eigenpair, Dataset, EigenOptions, Loss, MdlConfig, Mechanism,
    SimulationBatch, Subspace, DEFAULT_TOL,
};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Problem {
    n: usize,
    base: Subspace,
    data: Dataset,
}

fn vectors(
    n: usize,
    count: impl Into<prop::collection::SizeRange>,
) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, n), count)
}

/// Base subspace of dimension < n plus a weighted dataset of up to 12 items.
fn problem() -> impl Strategy<Value = Problem> {
    (2usize..=5)
        .prop_flat_map(|n| {
            (
                Just(n),
                (0..n).prop_flat_map(move |k| vectors(n, k)),
                vectors(n, 0..12),
                prop::collection::vec(0.25..3.0f64, 12),
            )
        })
        .prop_map(|(n, base, items, weights)| {
            let base = orthonormalize(n, &base, DEFAULT_TOL).unwrap();
            let data = Dataset::from_weighted(n, items.into_iter().zip(weights)).unwrap();
            Problem { n, base, data }
        })
}

fn unit_in(space: &Subspace, coefs: &[f64]) -> Option<Vec<f64>> {
    let mut v = vec![0.0; space.ambient_dim()];
    for (c, b) in coefs.iter().zip(space.basis()) {
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi += c * bi;
        }
    }
    let len = norm(&v);
    (len > 1e-3).then(|| v.iter().map(|x| x / len).collect())
}

fn oracle_eigenvalues(p: &Problem) -> Vec<f64> {
    let cov = residual_covariance(&p.base, &p.data).unwrap();
    let rows = cov.matrix().to_rows();
    let m = DMatrix::from_fn(p.n, p.n, |i, j| rows[i][j]);
    let mut values: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_idempotent_and_pythagorean(p in problem(), v in prop::collection::vec(-5.0..5.0f64, 5)) {
        let v = &v[..p.n];
        let pv = p.base.project(v).unwrap();
        let ppv = p.base.project(&pv).unwrap();
        for (a, b) in pv.iter().zip(&ppv) {
            prop_assert!((a - b).abs() <= TOL);
        }
        let r = p.base.residual(v).unwrap();
        prop_assert!((norm_sq(v) - norm_sq(&pv) - norm_sq(&r)).abs() <= TOL * norm_sq(v).max(1.0));
        for b in p.base.basis() {
            prop_assert!(dot(&r, b).abs() <= TOL);
        }
    }

    #[test]
    fn residual_span_lies_outside_base(p in problem()) {
        let w = residual_span(&p.base, &p.data, TOL).unwrap();
        prop_assert!(p.base.overlap(&w).unwrap() <= TOL);
        prop_assert!(w.dim() + p.base.dim() <= p.n);
    }

    #[test]
    fn complement_is_consistent(p in problem()) {
        let c = p.base.complement();
        prop_assert_eq!(c.dim() + p.base.dim(), p.n);
        let mut all = p.base.basis().to_vec();
        all.extend(c.basis().iter().cloned());
        prop_assert!(Subspace::new(p.n, all, TOL).is_ok());
    }

    #[test]
    fn covariance_trace_is_residual_energy(p in problem()) {
        let cov = residual_covariance(&p.base, &p.data).unwrap();
        let energy: f64 = p.data.iter()
            .map(|it| it.weight() * norm_sq(&p.base.residual(it.coords()).unwrap()))
            .sum();
        prop_assert!((cov.trace() - energy).abs() <= TOL * energy.max(1.0));
        // column space inside C⊥
        for row in cov.matrix().to_rows() {
            prop_assert!(norm(&p.base.project(&row).unwrap()) <= TOL * energy.max(1.0));
        }
    }

    #[test]
    fn top_eigenvalue_matches_oracle(p in problem()) {
        let cov = residual_covariance(&p.base, &p.data).unwrap();
        let pair = top_eigenpair(cov.matrix(), &EigenOptions::default()).unwrap();
        let oracle = oracle_eigenvalues(&p)[0];
        prop_assert!((pair.value - oracle).abs() <= 1e-8 * oracle.max(1.0), "{} vs {}", pair.value, oracle);
    }

    #[test]
    fn threshold_equivalence(p in problem(), coefs in prop::collection::vec(-1.0..1.0f64, 5), lambda in 0.01..50.0f64, log in any::<bool>()) {
        let comp = p.base.complement();
        if let Some(v) = unit_in(&comp, &coefs) {
            let loss = if log { Loss::ScaledLog { scale: 1.5 } } else { Loss::Identity };
            let cfg = MdlConfig::new(lambda).unwrap().with_loss(loss);
            let cp = p.base.with_direction(&v).unwrap();
            let g = gain(&p.base, &cp, &p.data, &cfg).unwrap();
            let a = is_accepted(&p.base, &cp, &p.data, &cfg).unwrap();
            prop_assert_eq!(a.accepted, g > lambda);
            prop_assert!(g >= -TOL);
        }
    }

    #[test]
    fn decomposition_identity(p in problem(), coefs in prop::collection::vec(-1.0..1.0f64, 5), lambda in 0.01..50.0f64) {
        let comp = p.base.complement();
        if let Some(v) = unit_in(&comp, &coefs) {
            let cfg = MdlConfig::new(lambda).unwrap();
            let cp = p.base.with_direction(&v).unwrap();
            let alignment: f64 = p.data.iter()
                .map(|it| it.weight() * dot(&p.base.residual(it.coords()).unwrap(), &v).powi(2))
                .sum();
            let before = description_length(&p.base, &p.data, &cfg).unwrap();
            let after = description_length(&cp, &p.data, &cfg).unwrap();
            prop_assert!((after - (before - alignment + lambda)).abs() <= TOL * before.max(1.0));
        }
    }

    #[test]
    fn gain_is_additive(p in problem(), q in vectors(5, 0..6), coefs in prop::collection::vec(-1.0..1.0f64, 5)) {
        let comp = p.base.complement();
        if let Some(v) = unit_in(&comp, &coefs) {
            let extra = Dataset::from_vectors(p.n, q.into_iter().map(|x| x[..p.n].to_vec())).unwrap();
            let cfg = MdlConfig::new(1.0).unwrap().with_loss(Loss::ScaledLog { scale: 0.7 });
            let cp = p.base.with_direction(&v).unwrap();
            let g = gain_decomposition(&p.base, &cp, &p.data, &SimulationBatch::new(extra, "q"), &cfg).unwrap();
            prop_assert!((g.g_all - g.g_ext - g.g_sim).abs() <= 1e-9 * g.g_all.abs().max(1.0));
            prop_assert!(g.g_sim >= -1e-12);
        }
    }

    #[test]
    fn canonical_direction_beats_random_probes(p in problem(), probes in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 5), 64)) {
        let cfg = MdlConfig::new(1.0).unwrap();
        if let Ok(cd) = canonical_direction(&p.base, &p.data, &cfg) {
            prop_assert!(p.base.project(&cd.direction).map(|x| norm(&x)).unwrap() <= TOL);
            let cp = p.base.with_direction(&cd.direction).unwrap();
            let best = gain(&p.base, &cp, &p.data, &cfg).unwrap();
            prop_assert!((best - cd.eigenvalue).abs() <= 1e-8 * best.max(1.0));
            let comp = p.base.complement();
            for c in &probes {
                if let Some(v) = unit_in(&comp, c) {
                    let g = gain(&p.base, &p.base.with_direction(&v).unwrap(), &p.data, &cfg).unwrap();
                    prop_assert!(g <= best + 1e-8 * best.max(1.0));
                }
            }
        }
    }

    #[test]
    fn greedy_trace_matches_spectrum(p in problem(), lambda in 0.01..30.0f64) {
        let cfg = MdlConfig::new(lambda).unwrap();
        let trace = extend_greedy(&p.base, &p.data, &cfg).unwrap();
        let oracle = oracle_eigenvalues(&p);
        let expected: Vec<f64> = oracle.iter().copied().filter(|&mu| mu > lambda).collect();
        // skip draws where λ is within rounding of an eigenvalue
        if oracle.iter().all(|mu| (mu - lambda).abs() > 1e-6) {
            let got = trace.accepted_eigenvalues();
            prop_assert_eq!(got.len(), expected.len(), "{:?} vs {:?}", got, expected);
            for (a, b) in got.iter().zip(&expected) {
                prop_assert!((a - b).abs() <= 1e-6 * b.max(1.0));
            }
        }
        let mut dl = description_length(&p.base, &p.data, &cfg).unwrap();
        for step in trace.steps.iter().filter(|s| s.accepted) {
            prop_assert!(step.dl_after < dl + 1e-12 && step.dl_after < step.dl_before);
            prop_assert!((step.dl_after - (step.dl_before - step.gain + lambda)).abs() <= 1e-8 * step.dl_before.max(1.0));
            dl = step.dl_after;
        }
    }

    #[test]
    fn greedy_respects_rank_bound(p in problem(), r in 1usize..3) {
        let cfg = MdlConfig::new(1e-3).unwrap().with_rank_bound(r).unwrap();
        let trace = extend_greedy(&p.base, &p.data, &cfg).unwrap();
        prop_assert!(trace.accepted_dims() <= r);
    }

    #[test]
    fn stripping_never_hurts(p in problem(), a_coefs in prop::collection::vec(-1.0..1.0f64, 5), b_coefs in prop::collection::vec(-1.0..1.0f64, 5), lambda in 0.01..10.0f64) {
        let cfg = MdlConfig::new(lambda).unwrap();
        let w = residual_span(&p.base, &p.data, TOL).unwrap();
        let invisible = p.base.direct_sum(&w).unwrap().complement();
        let mut parts = Vec::new();
        parts.extend(unit_in(&w, &a_coefs));
        parts.extend(unit_in(&invisible, &b_coefs));
        let u = orthonormalize(p.n, &parts, TOL).unwrap();
        let s = strip_to_residual_support(&p.base, &u, &p.data, &cfg).unwrap();
        prop_assert!(s.dl_stripped <= s.dl_original + 1e-8);
        let expected = lambda * s.dropped.dim() as f64;
        prop_assert!((s.dl_original - s.dl_stripped - expected).abs() <= 1e-8 * s.dl_original.max(1.0));
        for it in p.data.iter() {
            let full = p.base.direct_sum(&u).unwrap().project(it.coords()).unwrap();
            let hat = s.stripped.project(it.coords()).unwrap();
            for (x, y) in full.iter().zip(&hat) {
                prop_assert!((x - y).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn simulation_dichotomy(p in problem(), sim in vectors(5, 0..4), inside in any::<bool>(), lambda in 0.5..20.0f64) {
        let cfg = MdlConfig::new(lambda).unwrap();
        let items: Vec<Vec<f64>> = sim.into_iter()
            .map(|x| {
                let x = x[..p.n].to_vec();
                if inside { p.base.project(&x).unwrap() } else { x }
            })
            .collect();
        let batch = SimulationBatch::new(Dataset::from_vectors(p.n, items).unwrap(), "sim");
        let r = classify_simulation(&p.base, &p.data, &batch, &cfg).unwrap();
        prop_assert!(r.dim_w_ext <= r.dim_w_all);
        prop_assert_eq!(r.enrichment, r.dim_w_all > r.dim_w_ext);
        prop_assert_eq!(r.new_directions.len(), r.dim_w_all - r.dim_w_ext);
        let expected = match (r.enrichment, !r.proposal_ext.accepted && r.proposal_all.accepted) {
            (true, true) => Mechanism::Both,
            (true, false) => Mechanism::Enrichment,
            (false, true) => Mechanism::Amplification,
            (false, false) => Mechanism::Inert,
        };
        prop_assert_eq!(r.classification, expected);
        if inside {
            prop_assert_eq!(r.classification, Mechanism::Inert);
            prop_assert_eq!(r.proposal_ext.accepted, r.proposal_all.accepted);
        }
    }
}
