//! Run configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! n_nodes = 4
//! epsilon = 1e-3
//! repeats = 10
//! output = "out/fig"
//!
//! [data.synthetic]
//! dim = 50
//! rows = 1000
//! lambda1 = 2.0
//! gap_ratio = 0.5
//!
//! [[methods]]
//! method = "quantized_rgd"
//! bits_per_coord = 4
//! radii = "measured"
//! step_size = 0.2
//! rounds = 300
//!
//! [[methods]]
//! method = "full_precision_rgd"
//! step_size = 0.2
//! rounds = 300
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use serde::{Deserialize, Serialize};
use spherepca_core::baselines::{Method, PowerReference};
use spherepca_core::instance::SyntheticSpec;
use spherepca_core::protocol::RadiusSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub n_nodes: usize,
    /// Target intrinsic distance of the scheduled protocol.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// `p` of random initialization.
    #[serde(default = "default_failure_prob")]
    pub failure_prob: f64,
    #[serde(default)]
    pub init: InitKind,
    /// Caller's lower bound on `⟨v^{i₀}, x*⟩` for warm starts.
    #[serde(default = "default_quant_lower_bound")]
    pub quant_lower_bound: f64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Subtract column means before forming covariances.
    #[serde(default)]
    pub center: bool,
    /// Permute rows before partitioning.
    #[serde(default)]
    pub shuffle_seed: Option<u64>,
    pub output: PathBuf,
    pub data: DataSource,
    pub methods: Vec<MethodConfig>,
}

fn default_failure_prob() -> f64 {
    0.1
}

fn default_quant_lower_bound() -> f64 {
    0.5
}

fn default_repeats() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    Random,
    WarmStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv { path: PathBuf },
    Synthetic(SyntheticConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub dim: usize,
    pub rows: usize,
    /// Defaults to the run seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Full descending spectrum; overrides `lambda1` and `gap_ratio`.
    #[serde(default)]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda1: Option<f64>,
    /// `(λ₁ − λ₂)/λ₁`; the remaining eigenvalues decay linearly from `λ₂`.
    #[serde(default)]
    pub gap_ratio: Option<f64>,
}

impl SyntheticConfig {
    pub fn to_spec(&self, run_seed: u64) -> anyhow::Result<SyntheticSpec> {
        let seed = self.seed.unwrap_or(run_seed);
        if let Some(eigenvalues) = &self.eigenvalues {
            ensure!(
                self.lambda1.is_none() && self.gap_ratio.is_none(),
                "give either `eigenvalues` or `lambda1`/`gap_ratio`, not both"
            );
            return Ok(SyntheticSpec {
                dim: self.dim,
                eigenvalues: eigenvalues.clone(),
                rows: self.rows,
                seed,
            });
        }
        let (Some(l1), Some(g)) = (self.lambda1, self.gap_ratio) else {
            bail!("synthetic data needs `eigenvalues` or both `lambda1` and `gap_ratio`");
        };
        ensure!(l1 > 0.0 && g > 0.0 && g <= 1.0, "need lambda1 > 0 and gap_ratio in (0, 1]");
        Ok(SyntheticSpec::with_gap(self.dim, l1, g, self.rows, seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    QuantizedRgd,
    FullPrecisionRgd,
    EuclideanDiffQuant,
    QuantizedPowerIteration,
    SingleNodeRgd,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self.baseline() {
            Some(m) => m.name(),
            None => "quantized_rgd",
        }
    }

    /// The baseline this kind runs, or `None` for the quantized protocol.
    pub fn baseline(self) -> Option<Method> {
        match self {
            MethodKind::QuantizedRgd => None,
            MethodKind::FullPrecisionRgd => Some(Method::FullPrecisionRgd),
            MethodKind::EuclideanDiffQuant => Some(Method::EuclideanDiffQuant),
            MethodKind::QuantizedPowerIteration => Some(Method::QuantizedPowerIteration),
            MethodKind::SingleNodeRgd => Some(Method::SingleNodeRgd),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    #[default]
    APriori,
    Measured,
}

impl From<RadiusKind> for RadiusSource {
    fn from(k: RadiusKind) -> Self {
        match k {
            RadiusKind::APriori => RadiusSource::APriori,
            RadiusKind::Measured => RadiusSource::Measured,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    #[default]
    Previous,
    Zero,
}

impl From<ReferenceKind> for PowerReference {
    fn from(k: ReferenceKind) -> Self {
        match k {
            ReferenceKind::Previous => PowerReference::Previous,
            ReferenceKind::Zero => PowerReference::Zero,
        }
    }
}

/// One method to run. For `quantized_rgd`, leaving out `bits_per_coord`
/// selects the shrinking-radius schedule, whose length is its horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub method: MethodKind,
    /// Names output files; defaults to the method name.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub bits_per_coord: Option<u32>,
    /// Defaults to the initialization's suggested `a/γ`.
    #[serde(default)]
    pub step_size: Option<f64>,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub radii: RadiusKind,
    #[serde(default)]
    pub power_reference: ReferenceKind,
    /// `γ`; defaults to `n · maxᵢ 2λ₁(Aᵢ)`.
    #[serde(default)]
    pub smoothness: Option<f64>,
    /// `μ`; defaults to half the realized eigengap.
    #[serde(default)]
    pub growth: Option<f64>,
    /// `D`; defaults to the initialization's `arccos(a)`.
    #[serde(default)]
    pub init_radius: Option<f64>,
}

impl MethodConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.name().to_owned())
    }

    pub fn is_scheduled(&self) -> bool {
        self.method == MethodKind::QuantizedRgd && self.bits_per_coord.is_none()
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing run configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`; a relative `output` or CSV path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        if let DataSource::Csv { path: p } = &mut cfg.data {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.n_nodes >= 1, "n_nodes must be at least 1");
        ensure!(self.repeats >= 1, "repeats must be at least 1");
        ensure!(
            self.failure_prob > 0.0 && self.failure_prob < 1.0,
            "failure_prob must lie in (0, 1)"
        );
        ensure!(
            self.quant_lower_bound > 0.0 && self.quant_lower_bound <= 1.0,
            "quant_lower_bound must lie in (0, 1]"
        );
        if let Some(eps) = self.epsilon {
            ensure!(eps > 0.0 && eps.is_finite(), "epsilon must be positive");
        }
        ensure!(!self.methods.is_empty(), "at least one method is required");
        let mut labels = HashSet::new();
        for m in &self.methods {
            let label = m.label();
            ensure!(
                !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)),
                "label `{label}` must be a plain file name"
            );
            ensure!(labels.insert(label.clone()), "duplicate method label `{label}`");
            if m.is_scheduled() {
                ensure!(self.epsilon.is_some(), "`{label}`: the radius schedule needs `epsilon`");
            } else {
                ensure!(m.rounds.is_some(), "`{label}`: `rounds` is required");
            }
            let quantized = m.method == MethodKind::QuantizedRgd || m.method.baseline().is_some_and(Method::is_quantized);
            if quantized && !m.is_scheduled() {
                ensure!(m.bits_per_coord.is_some(), "`{label}`: `bits_per_coord` is required");
            }
            if let Some(eta) = m.step_size {
                ensure!(eta > 0.0 && eta.is_finite(), "`{label}`: step_size must be positive");
            }
        }
        Ok(())
    }
}
