//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use hypocal_core::element::DEFAULT_N_STEP;
use hypocal_core::{Bounds, CostWeights, ElementState, GaConfig, HypoParams, TestSpec};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Calibrate,
    Ensemble,
    Validate,
}

/// Sign convention of stresses entered in the config and the data files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressConvention {
    /// Continuum mechanics: compression negative.
    #[default]
    Signed,
    /// Laboratory magnitudes: compression positive, negated on load.
    CompressionPositive,
}

impl StressConvention {
    pub fn normalize(self, stress: f64) -> f64 {
        match self {
            Self::Signed => stress,
            Self::CompressionPositive => -stress,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
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

impl ParamsSection {
    pub fn to_params(&self) -> std::result::Result<HypoParams<f64>, String> {
        HypoParams::from_degrees(
            self.phi_c_deg,
            self.h_s_kpa,
            self.n,
            self.e_d0,
            self.e_c0,
            self.e_i0,
            self.alpha,
            self.beta,
        )
        .map_err(|e| e.to_string())
    }
}

/// Named parameter set scored against the data for comparison.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceSection {
    name: String,
    phi_c_deg: f64,
    #[serde(rename = "h_s_kPa")]
    h_s_kpa: f64,
    n: f64,
    e_d0: f64,
    e_c0: f64,
    e_i0: f64,
    alpha: f64,
    beta: f64,
}

impl ReferenceSection {
    fn params(&self) -> ParamsSection {
        ParamsSection {
            phi_c_deg: self.phi_c_deg,
            h_s_kpa: self.h_s_kpa,
            n: self.n,
            e_d0: self.e_d0,
            e_c0: self.e_c0,
            e_i0: self.e_i0,
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaSection {
    n_individuals: Option<usize>,
    n_iterations: Option<usize>,
    elite_fraction: Option<f64>,
    mating_fraction: Option<f64>,
    mutation_start: Option<f64>,
    mutation_end: Option<f64>,
    lambda_d: Option<f64>,
    lambda_i: Option<f64>,
    weights: Option<[f64; 3]>,
    seed: Option<u64>,
    trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxCorner {
    phi_c_deg: f64,
    #[serde(rename = "h_s_kPa")]
    h_s_kpa: f64,
    n: f64,
    e_c0: f64,
    alpha: f64,
    beta: f64,
}

impl BoxCorner {
    fn genome(&self) -> [f64; 6] {
        [
            self.phi_c_deg.to_radians(),
            self.h_s_kpa,
            self.n,
            self.e_c0,
            self.alpha,
            self.beta,
        ]
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsSection {
    min: BoxCorner,
    max: BoxCorner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Oedometer,
    Triaxial,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestSection {
    name: Option<String>,
    kind: KindName,
    #[serde(rename = "T1_kPa")]
    t1_kpa: f64,
    #[serde(rename = "T2_kPa")]
    t2_kpa: f64,
    e: f64,
    e_fin: Option<f64>,
    eps_fin: Option<f64>,
    n_step: Option<usize>,
    data: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    stress_convention: StressConvention,
    out: Option<PathBuf>,
    params: Option<ParamsSection>,
    ga: Option<GaSection>,
    bounds: Option<BoundsSection>,
    #[serde(default)]
    reference: Vec<ReferenceSection>,
    #[serde(default, rename = "test")]
    tests: Vec<TestSection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestEntry {
    pub name: String,
    pub spec: TestSpec<f64>,
    /// Data file, resolved against the config's directory.
    pub data: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub source: PathBuf,
    pub convention: StressConvention,
    pub params: Option<HypoParams<f64>>,
    pub ga: Option<GaConfig>,
    pub trials: Option<usize>,
    pub references: Vec<(String, HypoParams<f64>)>,
    pub tests: Vec<TestEntry>,
    pub out: Option<PathBuf>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn from_file(path: &Path, mode: Mode) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_str(&text, path, mode)
    }

    pub fn from_str(text: &str, path: &Path, mode: Mode) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| line_of(text, s.start));
            CliError::parse(path, line, e.message())
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let convention = raw.stress_convention;

        let params = raw
            .params
            .map(|p| {
                p.to_params()
                    .map_err(|e| CliError::validation(format!("[params]: {e}")))
            })
            .transpose()?;
        let references = raw
            .reference
            .iter()
            .map(|r| {
                r.params()
                    .to_params()
                    .map(|p| (r.name.clone(), p))
                    .map_err(|e| CliError::validation(format!("reference {}: {e}", r.name)))
            })
            .collect::<Result<Vec<_>>>()?;

        let tests = raw
            .tests
            .iter()
            .enumerate()
            .map(|(k, t)| test_entry(k, t, base, convention))
            .collect::<Result<Vec<_>>>()?;

        let ga_section = raw.ga.unwrap_or_default();
        let ga = raw.bounds.map(|b| {
            let bounds = Bounds {
                min: b.min.genome(),
                max: b.max.genome(),
            };
            let d = GaConfig::new(bounds);
            GaConfig {
                n_individuals: ga_section.n_individuals.unwrap_or(d.n_individuals),
                n_iterations: ga_section.n_iterations.unwrap_or(d.n_iterations),
                elite_fraction: ga_section.elite_fraction.unwrap_or(d.elite_fraction),
                mating_fraction: ga_section.mating_fraction.unwrap_or(d.mating_fraction),
                mutation_start: ga_section.mutation_start.unwrap_or(d.mutation_start),
                mutation_end: ga_section.mutation_end.unwrap_or(d.mutation_end),
                lambda_d: ga_section.lambda_d.unwrap_or(d.lambda_d),
                lambda_i: ga_section.lambda_i.unwrap_or(d.lambda_i),
                weights: ga_section
                    .weights
                    .map_or(d.weights, |[w1, w2, w3]| CostWeights { w1, w2, w3 }),
                seed: ga_section.seed.unwrap_or(d.seed),
                bounds,
            }
        });

        let cfg = Self {
            mode,
            source: path.to_path_buf(),
            convention,
            params,
            ga,
            trials: ga_section.trials,
            references,
            tests,
            out: raw.out.map(|o| base.join(o)),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let has = |oedo: bool| self.tests.iter().any(|t| t.spec.is_oedometer() == oedo);
        match self.mode {
            Mode::Simulate => {
                if self.params.is_none() {
                    return Err(CliError::validation("simulate requires a [params] section"));
                }
                if self.tests.is_empty() {
                    return Err(CliError::validation(
                        "simulate requires at least one [[test]]",
                    ));
                }
            }
            // falls back to the built-in reference programme
            Mode::Validate => {}
            Mode::Calibrate | Mode::Ensemble => {
                let ga = self.ga.as_ref().ok_or_else(|| {
                    CliError::validation("calibration requires a [bounds] section")
                })?;
                ga.validate().map_err(CliError::validation)?;
                if !has(true) || !has(false) {
                    return Err(CliError::validation(
                        "calibration requires at least one oedometer and one triaxial test",
                    ));
                }
                if let Some(t) = self.tests.iter().find(|t| t.data.is_none()) {
                    return Err(CliError::validation(format!(
                        "test {}: missing data file",
                        t.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn test_entry(k: usize, t: &TestSection, base: &Path, conv: StressConvention) -> Result<TestEntry> {
    let name = t.name.clone().unwrap_or_else(|| format!("test{}", k + 1));
    let initial = ElementState::new(conv.normalize(t.t1_kpa), conv.normalize(t.t2_kpa), t.e);
    let spec = match (t.kind, t.e_fin, t.eps_fin) {
        (KindName::Oedometer, Some(e_fin), None) => TestSpec::oedometer(initial, e_fin),
        (KindName::Triaxial, None, Some(eps_fin)) => TestSpec::triaxial(initial, eps_fin),
        (KindName::Oedometer, _, _) => {
            return Err(CliError::validation(format!(
                "test {name}: oedometer needs e_fin only"
            )))
        }
        (KindName::Triaxial, _, _) => {
            return Err(CliError::validation(format!(
                "test {name}: triaxial needs eps_fin only"
            )))
        }
    }
    .with_steps(t.n_step.unwrap_or(DEFAULT_N_STEP));
    spec.validate()
        .map_err(|e| CliError::validation(format!("test {name}: {e}")))?;
    Ok(TestEntry {
        name,
        spec,
        data: t.data.as_ref().map(|d| base.join(d)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HOCH: &str = r#"
stress_convention = "signed"

[params]
phi_c_deg = 33.0
h_s_kPa = 1.0e6
n = 0.25
e_d0 = 0.55
e_c0 = 0.95
e_i0 = 1.05
alpha = 0.25
beta = 1.5

[[test]]
name = "TxD1"
kind = "triaxial"
T1_kPa = -100.0
T2_kPa = -100.0
e = 0.690
eps_fin = 0.20

[[test]]
name = "EDO1"
kind = "oedometer"
T1_kPa = -25.0
T2_kPa = -12.5
e = 0.730
e_fin = 0.672
"#;

    #[test]
    fn loads_initial_conditions() {
        let cfg = RunConfig::from_str(HOCH, Path::new("cfg.toml"), Mode::Simulate).unwrap();
        assert_eq!(cfg.tests.len(), 2);
        assert_eq!(
            cfg.tests[0].spec.initial,
            ElementState::new(-100.0, -100.0, 0.690)
        );
        assert_eq!(cfg.tests[1].spec.n_step, 100);
        assert!((cfg.params.unwrap().phi_c_deg() - 33.0).abs() < 1e-12);
    }

    #[test]
    fn calibrate_needs_bounds() {
        let err = RunConfig::from_str(HOCH, Path::new("cfg.toml"), Mode::Calibrate).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_DATA);
    }

    #[test]
    fn parse_error_reports_line() {
        let err = RunConfig::from_str(
            "[params]\nphi_c_deg = \n",
            Path::new("x.toml"),
            Mode::Simulate,
        )
        .unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn positive_convention_negates() {
        let text = HOCH
            .replace("\"signed\"", "\"compression_positive\"")
            .replace("-100.0", "100.0")
            .replace("-25.0", "25.0")
            .replace("-12.5", "12.5");
        let cfg = RunConfig::from_str(&text, Path::new("cfg.toml"), Mode::Simulate).unwrap();
        assert_eq!(cfg.tests[1].spec.initial.t2, -12.5);
    }
}
