//! TOML experiment configuration: a `[model]` selector plus a shared `[run]`
//! section and per-subcommand sections, all with defaults so a missing file
//! or empty table is a valid (free-model) configuration. Unknown keys are
//! rejected everywhere.

use std::f64::consts::FRAC_PI_4;

use nevai_core::models::JacobiSequence;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub model: ModelConfig,
    pub run: RunConfig,
    pub spectrum: SpectrumConfig,
    pub moments: MomentsConfig,
    pub green: GreenConfig,
    pub prufer: PruferConfig,
    pub bounds: BoundsConfig,
    pub sweep: SweepConfig,
}

/// Model selector. Parameters are per-kind; setting one the selected kind
/// does not read is a configuration error (it is almost certainly a typo).
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Off-diagonal value (`constant`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Diagonal value (`constant`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// First diagonal entry (`szwarc`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Realization seed (`anderson`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Rotation phase (`fibonacci`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Off-diagonal period (`periodic`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_period: Option<Vec<f64>>,
    /// Diagonal period (`periodic`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_period: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Free,
    Constant,
    Szwarc,
    Anderson,
    StepBlocks,
    RampedBlocks,
    Fibonacci,
    Periodic,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::Free => "free",
            ModelKind::Constant => "constant",
            ModelKind::Szwarc => "szwarc",
            ModelKind::Anderson => "anderson",
            ModelKind::StepBlocks => "step_blocks",
            ModelKind::RampedBlocks => "ramped_blocks",
            ModelKind::Fibonacci => "fibonacci",
            ModelKind::Periodic => "periodic",
        }
    }

    /// Field names this kind reads from `[model]`.
    fn used_fields(self) -> &'static [&'static str] {
        match self {
            ModelKind::Free | ModelKind::StepBlocks | ModelKind::RampedBlocks => &[],
            ModelKind::Constant => &["a", "b"],
            ModelKind::Szwarc => &["beta"],
            ModelKind::Anderson => &["seed"],
            ModelKind::Fibonacci => &["theta"],
            ModelKind::Periodic => &["a_period", "b_period"],
        }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<JacobiSequence, CliError> {
        let set: &[(&str, bool)] = &[
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("beta", self.beta.is_some()),
            ("seed", self.seed.is_some()),
            ("theta", self.theta.is_some()),
            ("a_period", self.a_period.is_some()),
            ("b_period", self.b_period.is_some()),
        ];
        let used = self.kind.used_fields();
        for (name, is_set) in set {
            if *is_set && !used.contains(name) {
                return Err(CliError::Config(format!(
                    "[model] key `{name}` is not used by kind `{}`",
                    self.kind.name()
                )));
            }
        }
        let seq = match self.kind {
            ModelKind::Free => JacobiSequence::free(),
            ModelKind::Constant => {
                JacobiSequence::constant(self.a.unwrap_or(1.0), self.b.unwrap_or(0.0))?
            }
            ModelKind::Szwarc => JacobiSequence::szwarc(self.beta.unwrap_or(0.0))?,
            ModelKind::Anderson => JacobiSequence::anderson(self.seed.unwrap_or(1)),
            ModelKind::StepBlocks => JacobiSequence::step_blocks(Default::default())?,
            ModelKind::RampedBlocks => {
                JacobiSequence::ramped_blocks(Default::default(), Default::default())?
            }
            ModelKind::Fibonacci => JacobiSequence::fibonacci(self.theta.unwrap_or(0.0))?,
            ModelKind::Periodic => JacobiSequence::periodic(
                self.a_period.clone().unwrap_or_else(|| vec![1.0]),
                self.b_period.clone().unwrap_or_else(|| vec![0.0]),
                None,
            )?,
        };
        Ok(seq)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Main iteration count (sites, steps, or samples scale).
    pub n: u64,
    /// Evaluation point.
    pub x0: f64,
    /// Base random seed (overridden by `--seed`).
    pub seed: u64,
    /// Worker threads for sweeps; 0 means all cores (overridden by
    /// `--threads`).
    pub threads: usize,
    /// Output path; stdout when absent (overridden by `--out`). Never
    /// serialized into the provenance header: the artifact's content must
    /// not depend on where it is written.
    #[serde(skip_serializing)]
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1000,
            x0: 0.0,
            seed: 0,
            threads: 0,
            out: None,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Truncation size.
    pub size: usize,
    /// Distinguished coordinate (1-based).
    pub coordinate: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            size: 100,
            coordinate: 1,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsConfig {
    /// Highest moment order to emit.
    pub k_max: u32,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig { k_max: 8 }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct GreenConfig {
    /// Spectral parameter, real part.
    pub z_re: f64,
    /// Spectral parameter, imaginary part.
    pub z_im: f64,
    /// Truncation size backing the resolvent.
    pub n_trunc: usize,
    /// Number of first-row entries to emit.
    pub rows: usize,
    /// Boundary-probe mode: approach `run.x0` on the real axis instead.
    pub probe: bool,
    /// First-row index probed in boundary mode.
    pub index: usize,
    /// Decreasing imaginary offsets for boundary mode.
    pub probe_eps: Vec<f64>,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig {
            z_re: 0.0,
            z_im: 1.0,
            n_trunc: 500,
            rows: 20,
            probe: false,
            index: 1,
            probe_eps: vec![1e-2, 1e-3, 1e-4],
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct PruferConfig {
    /// Initial polar angle at index 1.
    pub theta0: f64,
}

impl Default for PruferConfig {
    fn default() -> Self {
        PruferConfig { theta0: FRAC_PI_4 }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// Samples per inequality check.
    pub samples: u64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { samples: 100_000 }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    /// Trailing-window subexponential growth test.
    #[default]
    Growth,
    /// Final kernel ratio r_N.
    Nevai,
    /// Transfer-product growth rate estimate.
    Lyapunov,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub diagnostic: Diagnostic,
    /// Open-interval lower edge for the generated grid.
    pub x0_min: f64,
    /// Open-interval upper edge for the generated grid.
    pub x0_max: f64,
    /// Number of generated grid points (strictly inside the interval).
    pub points: usize,
    /// Explicit strictly increasing grid; overrides the generated one.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub x0_grid: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            diagnostic: Diagnostic::Growth,
            x0_min: -1.9,
            x0_max: 1.9,
            points: 50,
            x0_grid: Vec::new(),
        }
    }
}

impl SweepConfig {
    /// The effective sweep grid: the explicit list when given, otherwise
    /// `points` values spaced uniformly strictly inside (x0_min, x0_max).
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if !self.x0_grid.is_empty() {
            if self.x0_grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Config(
                    "[sweep] x0_grid must be strictly increasing".into(),
                ));
            }
            return Ok(self.x0_grid.clone());
        }
        if self.points == 0 {
            return Err(CliError::Config("[sweep] points must be positive".into()));
        }
        if !(self.x0_min < self.x0_max) {
            return Err(CliError::Config(
                "[sweep] x0_min must be below x0_max".into(),
            ));
        }
        let span = self.x0_max - self.x0_min;
        Ok((1..=self.points)
            .map(|i| self.x0_min + span * i as f64 / (self.points + 1) as f64)
            .collect())
    }
}

/// Parses a configuration document, rejecting unknown keys.
pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}
