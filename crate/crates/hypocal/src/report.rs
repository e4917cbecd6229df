//! Human-readable tables and the JSON run summary.

use std::fmt::Write;

use hypocal_core::ga::{IterationStats, GENE_NAMES};
use hypocal_core::stats::Regression;
use hypocal_core::{CostBreakdown, EnsembleResult, HypoParams, Summary};
use serde::Serialize;

/// Parameters in reporting units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportParams {
    pub phi_c_deg: f64,
    #[serde(rename = "h_s_kPa")]
    pub h_s_kpa: f64,
    pub n: f64,
    pub e_d0: f64,
    pub e_c0: f64,
    pub e_i0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl From<&HypoParams<f64>> for ReportParams {
    fn from(p: &HypoParams<f64>) -> Self {
        Self {
            phi_c_deg: p.phi_c_deg(),
            h_s_kpa: p.h_s,
            n: p.n,
            e_d0: p.e_d0,
            e_c0: p.e_c0,
            e_i0: p.e_i0,
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredParams {
    pub name: String,
    pub params: ReportParams,
    /// `None` when no experimental data were available.
    pub cost: Option<f64>,
    pub deltas: Option<[f64; 3]>,
}

impl ScoredParams {
    pub fn new(name: &str, params: &HypoParams<f64>, cost: Option<CostBreakdown<f64>>) -> Self {
        Self {
            name: name.to_string(),
            params: params.into(),
            cost: cost.map(|c| c.total),
            deltas: cost.map(|c| c.deltas),
        }
    }
}

fn cell(x: Option<f64>, prec: usize) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:>10.prec$}"),
        Some(_) => format!("{:>10}", "inf"),
        None => format!("{:>10}", "-"),
    }
}

/// Parameter table with one column per parameter set; void ratios in
/// `e_d0 < e_c0 < e_i0` order.
pub fn parameter_table(columns: &[ScoredParams]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<8}{:<8}", "Par.", "");
    for c in columns {
        let _ = write!(out, "{:>10}", c.name);
    }
    out.push('\n');
    type Row = (
        &'static str,
        &'static str,
        usize,
        fn(&ScoredParams) -> Option<f64>,
    );
    let rows: [Row; 12] = [
        ("phi_c", "(deg)", 2, |c| Some(c.params.phi_c_deg)),
        ("h_s", "(GPa)", 3, |c| Some(c.params.h_s_kpa * 1e-6)),
        ("n", "(-)", 3, |c| Some(c.params.n)),
        ("e_d0", "(-)", 3, |c| Some(c.params.e_d0)),
        ("e_c0", "(-)", 3, |c| Some(c.params.e_c0)),
        ("e_i0", "(-)", 3, |c| Some(c.params.e_i0)),
        ("alpha", "(-)", 3, |c| Some(c.params.alpha)),
        ("beta", "(-)", 3, |c| Some(c.params.beta)),
        ("C", "(-)", 4, |c| c.cost),
        ("delta_1", "(-)", 4, |c| c.deltas.map(|d| d[0])),
        ("delta_2", "(-)", 4, |c| c.deltas.map(|d| d[1])),
        ("delta_3", "(-)", 4, |c| c.deltas.map(|d| d[2])),
    ];
    for (name, unit, prec, get) in rows {
        let _ = write!(out, "{name:<8}{unit:<8}");
        for c in columns {
            out.push_str(&cell(get(c), prec));
        }
        out.push('\n');
    }
    out
}

pub fn history_table(history: &[IterationStats]) -> String {
    let mut out = format!(
        "{:>4} {:>12} {:>12} {:>8}\n",
        "IT", "best", "pool mean", "feasible"
    );
    for h in history {
        let _ = writeln!(
            out,
            "{:>4} {:>12.5e} {:>12.5e} {:>8}",
            h.iteration, h.best_cost, h.pool_mean_cost, h.feasible
        );
    }
    out
}

const UNITS: [&str; 6] = ["(deg)", "(kPa)", "(-)", "(-)", "(-)", "(-)"];

pub fn statistics_table(summary: &[Summary; 6]) -> String {
    let mut out = format!(
        "{:<8}{:<8}{:>13}{:>13}{:>9}{:>13}{:>13}\n",
        "Par.", "", "mean", "std", "std/mean", "min", "max"
    );
    for ((name, unit), s) in GENE_NAMES.iter().zip(UNITS).zip(summary) {
        let _ = writeln!(
            out,
            "{name:<8}{unit:<8}{:>13.5e}{:>13.5e}{:>9.4}{:>13.5e}{:>13.5e}",
            s.mean,
            s.std,
            s.cv(),
            s.min,
            s.max
        );
    }
    out
}

pub fn correlation_table(r: &[[f64; 6]; 6]) -> String {
    let mut out = format!("{:<8}", "");
    for name in GENE_NAMES {
        let _ = write!(out, "{name:>8}");
    }
    out.push('\n');
    for (name, row) in GENE_NAMES.iter().zip(r) {
        let _ = write!(out, "{name:<8}");
        for v in row {
            let _ = write!(out, "{v:>8.3}");
        }
        out.push('\n');
    }
    out
}

pub fn regression_lines(regs: &[Regression]) -> String {
    let mut out = String::new();
    for g in regs {
        let _ = writeln!(
            out,
            "{} = {:.6e} * {} + {:.6e}  (r = {:.3})",
            g.y, g.fit.slope, g.x, g.fit.intercept, g.fit.r
        );
    }
    out
}

pub fn ensemble_report(e: &EnsembleResult) -> String {
    let mut out = format!("trials {}  failed {}\n\n", e.trials.len(), e.failed);
    if let Some(s) = &e.summary {
        out.push_str(&statistics_table(s));
        out.push('\n');
    }
    match &e.pearson {
        Some(r) => {
            out.push_str(&correlation_table(r));
            out.push('\n');
        }
        None => out.push_str("correlation matrix undefined (a parameter has zero spread)\n\n"),
    }
    out.push_str(&regression_lines(&e.regressions));
    out
}
