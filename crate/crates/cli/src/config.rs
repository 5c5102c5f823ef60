use std::path::{Path, PathBuf};

use baker_fr::fluctuation::Start;
use baker_fr::maps::PerturbationStrip;
use baker_fr::scalar::parse_rational;
use baker_fr::{Family, Model, Rational};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Montecarlo,
}

/// One experiment. Rationals are carried as `"num/den"` text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub l: String,
    pub n: usize,
    pub ensemble: usize,
    pub transient: usize,
    pub seed: u64,
    pub mode: Mode,
    pub out: PathBuf,
    pub start: Start,
    /// Sample points for the reversibility suite.
    pub samples: usize,
    /// Initial point of `trajectory`.
    pub x0: [String; 2],
    /// Strip `[x_tilde, x_tilde + eps]` of the composite map; the default
    /// strip when absent.
    pub strip: Option<[String; 2]>,
    /// Biases for the multibaker linear-response sweep.
    pub b_values: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: Family::Map2,
            l: "1/8".into(),
            n: 10,
            ensemble: 100_000,
            transient: 100,
            seed: 0,
            mode: Mode::Exact,
            out: PathBuf::from("out"),
            start: Start::Stationary,
            samples: 1000,
            x0: ["1/3".into(), "1/5".into()],
            strip: None,
            b_values: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn l(&self) -> Result<Rational, CliError> {
        Ok(parse_rational(&self.l)?)
    }

    pub fn strip(&self) -> Result<PerturbationStrip, CliError> {
        let l = self.l()?;
        Ok(match &self.strip {
            Some([x, eps]) => PerturbationStrip {
                x_tilde: parse_rational(x)?,
                eps: parse_rational(eps)?,
            },
            None => PerturbationStrip::default_for(&l),
        })
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let l = self.l()?;
        Ok(match self.family {
            Family::Composite => Model::composite(&l, &self.strip()?)?,
            f => Model::new(f, &l)?,
        })
    }

    pub fn biases(&self) -> Result<Vec<Rational>, CliError> {
        self.b_values.iter().map(|b| Ok(parse_rational(b)?)).collect()
    }
}

/// Overrides from the command line; unset flags keep the config value.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// TOML file with experiment settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// TOML file with `[[run]]` tables, each run on top of the base config.
    #[arg(long, global = true)]
    pub sweep: Option<PathBuf>,
    #[arg(long, global = true)]
    pub family: Option<Family>,
    /// Parameter as "num/den".
    #[arg(long, global = true)]
    pub l: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub ensemble: Option<usize>,
    #[arg(long, global = true)]
    pub transient: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, mut c: ExperimentConfig) -> ExperimentConfig {
        if let Some(v) = self.family {
            c.family = v;
        }
        if let Some(v) = &self.l {
            c.l = v.clone();
        }
        if let Some(v) = self.n {
            c.n = v;
        }
        if let Some(v) = self.ensemble {
            c.ensemble = v;
        }
        if let Some(v) = self.transient {
            c.transient = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        c
    }
}

/// A sweep file: `[[run]]` tables of partial settings.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub run: Vec<toml::Table>,
}

/// Each run merged over `base`, writing below `base.out/run-<k>`.
pub fn expand_sweep(base: &ExperimentConfig, path: &Path) -> Result<Vec<ExperimentConfig>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let sweep: SweepFile = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base_table = toml::Table::try_from(base).map_err(|e| CliError::Config(e.to_string()))?;
    sweep
        .run
        .into_iter()
        .enumerate()
        .map(|(k, run)| {
            let mut merged = base_table.clone();
            merged.extend(run);
            merged.insert(
                "out".into(),
                toml::Value::String(base.out.join(format!("run-{k}")).display().to_string()),
            );
            merged
                .try_into()
                .map_err(|e: toml::de::Error| CliError::Config(format!("run {k}: {e}")))
        })
        .collect()
}
