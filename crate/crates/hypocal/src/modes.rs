//! The four run modes and their output files.

use std::path::Path;

use hypocal_core::benchmark::{validation_params, validation_tests};
use hypocal_core::ga::{self, IterationStats, GENE_NAMES};
use hypocal_core::refine::{max_radial_residual, refinement_study, RefinementStudy};
use hypocal_core::stats::{run_ensemble, Regression};
use hypocal_core::{
    simulate, CostModel, ExperimentalDataset, GaConfig, HypoParams, Summary, Trajectory,
};
use serde::Serialize;

use crate::config::{Mode, TestEntry};
use crate::data::{load_dataset, write_curve, write_text};
use crate::error::{CliError, Result};
use crate::report::{ensemble_report, history_table, parameter_table, ReportParams, ScoredParams};
use crate::Invocation;

pub const DEFAULT_TRIALS: usize = 100;
pub const REFINEMENT_LEVELS: usize = 4;

pub fn dispatch(inv: &Invocation) -> Result<()> {
    match inv.config.mode {
        Mode::Simulate => simulate_mode(inv),
        Mode::Calibrate => calibrate_mode(inv),
        Mode::Ensemble => ensemble_mode(inv),
        Mode::Validate => validate_mode(inv),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::validation)?;
    text.push('\n');
    write_text(path, &text)
}

fn run_tests(tests: &[TestEntry], params: &HypoParams<f64>) -> Result<Vec<Trajectory<f64>>> {
    tests
        .iter()
        .map(|t| {
            simulate(&t.spec, params)
                .map_err(|e| CliError::Rejected(format!("test {}: {e}", t.name)))
        })
        .collect()
}

fn write_curves(out: &Path, tests: &[TestEntry], trajs: &[Trajectory<f64>]) -> Result<()> {
    for (t, traj) in tests.iter().zip(trajs) {
        write_curve(&out.join(format!("{}.csv", t.name)), traj)?;
    }
    Ok(())
}

fn model_for(data: &ExperimentalDataset<f64>, ga: Option<&GaConfig>) -> Result<CostModel<f64>> {
    let weights = ga.map_or_else(hypocal_core::CostWeights::unit, |g| g.weights);
    CostModel::new(data, weights).map_err(CliError::validation)
}

#[derive(Serialize)]
struct TestSummary<'a> {
    name: &'a str,
    kind: &'static str,
    samples: usize,
    clamped_steps: usize,
    #[serde(rename = "final_T1_kPa")]
    final_t1: f64,
    #[serde(rename = "final_T2_kPa")]
    final_t2: f64,
    final_e: f64,
}

fn test_summaries<'a>(tests: &'a [TestEntry], trajs: &[Trajectory<f64>]) -> Vec<TestSummary<'a>> {
    tests
        .iter()
        .zip(trajs)
        .map(|(t, traj)| {
            let last = traj.last();
            TestSummary {
                name: &t.name,
                kind: if t.spec.is_oedometer() {
                    "oedometer"
                } else {
                    "triaxial"
                },
                samples: traj.len(),
                clamped_steps: traj.clamped_steps,
                final_t1: last.t1,
                final_t2: last.t2,
                final_e: last.e,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    mode: &'static str,
    params: ReportParams,
    cost: Option<f64>,
    deltas: Option<[f64; 3]>,
    tests: Vec<TestSummary<'a>>,
}

fn simulate_mode(inv: &Invocation) -> Result<()> {
    let cfg = &inv.config;
    let params = cfg.params.expect("checked on load");
    let trajs = run_tests(&cfg.tests, &params)?;
    write_curves(&inv.out, &cfg.tests, &trajs)?;
    let cost = if cfg.tests.iter().all(|t| t.data.is_some()) {
        let data = load_dataset(&cfg.tests, cfg.convention)?;
        Some(model_for(&data, cfg.ga.as_ref())?.evaluate(&params))
    } else {
        None
    };
    let scored = ScoredParams::new("SIM", &params, cost);
    write_text(&inv.out.join("report.txt"), &parameter_table(&[scored]))?;
    write_json(
        &inv.out.join("summary.json"),
        &SimulateSummary {
            mode: "simulate",
            params: (&params).into(),
            cost: cost.map(|c| c.total),
            deltas: cost.map(|c| c.deltas),
            tests: test_summaries(&cfg.tests, &trajs),
        },
    )
}

fn resolve_seed(inv: &Invocation, ga: &GaConfig) -> u64 {
    inv.seed.unwrap_or(ga.seed)
}

#[derive(Serialize)]
struct CalibrateSummary<'a> {
    mode: &'static str,
    seed: u64,
    params: ReportParams,
    cost: f64,
    deltas: [f64; 3],
    history: &'a [IterationStats],
    references: Vec<ScoredParams>,
}

fn calibrate_mode(inv: &Invocation) -> Result<()> {
    let cfg = &inv.config;
    let data = load_dataset(&cfg.tests, cfg.convention)?;
    let base = cfg.ga.expect("checked on load");
    let config = GaConfig {
        seed: resolve_seed(inv, &base),
        ..base
    };
    let model = model_for(&data, Some(&config))?;
    let result = ga::run_with_model(&config, &model);
    let params = match (result.is_feasible(), result.params) {
        (true, Some(p)) => p,
        _ => {
            return Err(CliError::Rejected(
                "every candidate was numerically rejected".into(),
            ))
        }
    };
    let trajs = run_tests(&cfg.tests, &params)?;
    write_curves(&inv.out, &cfg.tests, &trajs)?;

    let references: Vec<ScoredParams> = cfg
        .references
        .iter()
        .map(|(name, p)| ScoredParams::new(name, p, Some(model.evaluate(p))))
        .collect();
    let mut columns = references.clone();
    columns.push(ScoredParams::new("GA", &params, Some(result.cost)));
    let report = format!(
        "{}\n{}",
        parameter_table(&columns),
        history_table(&result.history)
    );
    write_text(&inv.out.join("report.txt"), &report)?;
    write_json(
        &inv.out.join("summary.json"),
        &CalibrateSummary {
            mode: "calibrate",
            seed: config.seed,
            params: (&params).into(),
            cost: result.cost.total,
            deltas: result.cost.deltas,
            history: &result.history,
            references,
        },
    )
}

#[derive(Serialize)]
struct NamedSummary {
    name: &'static str,
    #[serde(flatten)]
    summary: Summary,
    cv: f64,
}

#[derive(Serialize)]
struct TrialRow {
    seed: u64,
    cost: f64,
    /// φ_c in degrees, h_s in kPa.
    sample: Option<[f64; 6]>,
}

#[derive(Serialize)]
struct EnsembleSummary<'a> {
    mode: &'static str,
    base_seed: u64,
    trials: usize,
    failed: usize,
    parameters: [&'static str; 6],
    statistics: Option<Vec<NamedSummary>>,
    pearson: Option<[[f64; 6]; 6]>,
    regressions: &'a [Regression],
    runs: Vec<TrialRow>,
}

fn ensemble_mode(inv: &Invocation) -> Result<()> {
    let cfg = &inv.config;
    let data = load_dataset(&cfg.tests, cfg.convention)?;
    let base = cfg.ga.expect("checked on load");
    let seed = resolve_seed(inv, &base);
    let trials = inv.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS);
    if trials < 2 {
        return Err(CliError::Usage("--trials must be at least 2".into()));
    }
    let result = run_ensemble(&base, &data, trials, seed).map_err(CliError::validation)?;
    if result.failed == result.trials.len() {
        return Err(CliError::Rejected(
            "every trial was numerically rejected".into(),
        ));
    }
    let runs: Vec<TrialRow> = result
        .trials
        .iter()
        .map(|t| TrialRow {
            seed: t.seed,
            cost: t.cost.total,
            sample: t
                .is_feasible()
                .then(|| hypocal_core::stats::reporting_units(&t.genome)),
        })
        .collect();

    let mut csv_text = String::from("seed,cost,phi_c_deg,h_s_kPa,n,e_c0,alpha,beta\n");
    for r in &runs {
        let fields = match r.sample {
            Some(s) => s.map(|v| v.to_string()).join(","),
            None => ",,,,,".to_string(),
        };
        csv_text.push_str(&format!("{},{},{}\n", r.seed, r.cost, fields));
    }
    write_text(&inv.out.join("trials.csv"), &csv_text)?;
    write_text(&inv.out.join("report.txt"), &ensemble_report(&result))?;
    write_json(
        &inv.out.join("summary.json"),
        &EnsembleSummary {
            mode: "ensemble",
            base_seed: seed,
            trials,
            failed: result.failed,
            parameters: GENE_NAMES,
            statistics: result.summary.map(|s| {
                GENE_NAMES
                    .iter()
                    .zip(s)
                    .map(|(&name, summary)| NamedSummary {
                        name,
                        summary,
                        cv: summary.cv(),
                    })
                    .collect()
            }),
            pearson: result.pearson,
            regressions: &result.regressions,
            runs,
        },
    )
}

#[derive(Serialize)]
struct ValidationTest<'a> {
    name: &'a str,
    samples: usize,
    study: RefinementStudy,
    /// Largest `|dT2| / |f_s|` along a triaxial path.
    max_radial_residual: Option<f64>,
}

#[derive(Serialize)]
struct ValidateSummary<'a> {
    mode: &'static str,
    params: ReportParams,
    tests: Vec<ValidationTest<'a>>,
}

fn validate_mode(inv: &Invocation) -> Result<()> {
    let cfg = &inv.config;
    let params = cfg.params.unwrap_or_else(validation_params);
    let tests: Vec<TestEntry> = if cfg.tests.is_empty() {
        validation_tests()
            .into_iter()
            .map(|t| TestEntry {
                name: t.name,
                spec: t.spec,
                data: None,
            })
            .collect()
    } else {
        cfg.tests.clone()
    };
    let trajs = run_tests(&tests, &params)?;
    write_curves(&inv.out, &tests, &trajs)?;

    let mut report = parameter_table(&[ScoredParams::new("REF", &params, None)]);
    let mut rows = Vec::with_capacity(tests.len());
    for (t, traj) in tests.iter().zip(&trajs) {
        let study = refinement_study(&t.spec, &params, REFINEMENT_LEVELS)
            .map_err(|e| CliError::Rejected(format!("test {}: {e}", t.name)))?;
        let residual = if t.spec.is_oedometer() {
            None
        } else {
            Some(
                max_radial_residual(traj, &params)
                    .map_err(|e| CliError::Rejected(format!("test {}: {e}", t.name)))?,
            )
        };
        report.push_str(&format!(
            "\n{}: steps {:?}  orders {:?}  max radial residual {}\n",
            t.name,
            study.steps,
            study
                .orders
                .iter()
                .map(|o| format!("{o:.3}"))
                .collect::<Vec<_>>(),
            residual.map_or("-".to_string(), |r| format!("{r:.3e}")),
        ));
        rows.push(ValidationTest {
            name: &t.name,
            samples: traj.len(),
            study,
            max_radial_residual: residual,
        });
    }
    write_text(&inv.out.join("report.txt"), &report)?;
    write_json(
        &inv.out.join("summary.json"),
        &ValidateSummary {
            mode: "validate",
            params: (&params).into(),
            tests: rows,
        },
    )
}
