use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use msh_core::dynamics::{IntegratorConfig, ModelKind, ModelSpec};
use msh_core::experiments::{StudyConfig, SweepAxis};
use msh_core::forcing::{ForcingComponent, ForcingKind, ForcingModel};
use msh_core::recurrence::DistanceNorm;
use msh_core::spectral::{DomainSpec, SpectralSpace};
use msh_core::{Field, Forcing, Model, Space};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "zero_seed")]
    pub seeds: Vec<SeedSpec>,
    pub model: ModelConfig,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig<f64>,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub recurrence: RecurrenceSection,
    #[serde(default)]
    pub study: StudyConfig<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn zero_seed() -> Vec<SeedSpec> {
    vec![SeedSpec::Zero]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dimension: usize,
    /// Side lengths; π on every axis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    pub modes: Vec<usize>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            lengths: None,
            modes: vec![128],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    pub kind: ForcingKind,
    #[serde(default)]
    pub components: Vec<ComponentConfig>,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            kind: ForcingKind::Zero,
            components: Vec::new(),
        }
    }
}

/// `amplitude · cos(frequency·t + phase)` times a unit-L² sine mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
    pub mode: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analyses {
    pub bounds: bool,
    pub recurrence: bool,
    pub morse: bool,
    pub duhamel: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecurrenceSection {
    pub eps: Vec<f64>,
    pub burn_in: f64,
    pub norm: DistanceNorm,
}

impl Default for RecurrenceSection {
    fn default() -> Self {
        Self {
            eps: vec![0.1, 0.05],
            burn_in: 0.0,
            norm: DistanceNorm::L2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Ndjson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Ndjson],
        }
    }
}

/// Initial condition: `zero`, `equilibrium:<id>`, `mode:<k[,k2],amp>` or
/// `random:<seed,scale>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SeedSpec {
    Zero,
    Equilibrium(usize),
    Mode { k: Vec<usize>, amp: f64 },
    Random { seed: u64, scale: f64 },
}

impl FromStr for SeedSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad seed {s:?}: expected zero | equilibrium:<id> | mode:<k,amp> | random:<seed,scale>");
        let (head, args) = s.split_once(':').unwrap_or((s, ""));
        let parts: Vec<&str> = args.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        match (head.trim(), parts.as_slice()) {
            ("zero", []) => Ok(SeedSpec::Zero),
            ("equilibrium", [id]) => id.parse().map(SeedSpec::Equilibrium).map_err(|_| bad()),
            ("mode", [ks @ .., amp]) if !ks.is_empty() => {
                let k = ks.iter().map(|k| k.parse()).collect::<Result<Vec<usize>, _>>().map_err(|_| bad())?;
                let amp = amp.parse().map_err(|_| bad())?;
                Ok(SeedSpec::Mode { k, amp })
            }
            ("random", [seed, scale]) => Ok(SeedSpec::Random {
                seed: seed.parse().map_err(|_| bad())?,
                scale: scale.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for SeedSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<SeedSpec> for String {
    fn from(s: SeedSpec) -> String {
        s.to_string()
    }
}

impl fmt::Display for SeedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedSpec::Zero => write!(f, "zero"),
            SeedSpec::Equilibrium(id) => write!(f, "equilibrium:{id}"),
            SeedSpec::Mode { k, amp } => {
                write!(f, "mode:")?;
                for ki in k {
                    write!(f, "{ki},")?;
                }
                write!(f, "{amp:?}")
            }
            SeedSpec::Random { seed, scale } => write!(f, "random:{seed},{scale:?}"),
        }
    }
}

impl SeedSpec {
    /// Directory-safe label.
    pub fn label(&self) -> String {
        self.to_string().replace([':', ','], "_")
    }

    pub fn needs_equilibria(&self) -> bool {
        matches!(self, SeedSpec::Equilibrium(_))
    }

    pub fn build(&self, space: &Space, equilibria: &[msh_core::Equilibrium]) -> Result<Field, CliError> {
        match self {
            SeedSpec::Zero => Ok(space.zeros()),
            SeedSpec::Equilibrium(id) => equilibria
                .get(*id)
                .map(|e| e.state.clone())
                .ok_or_else(|| CliError::Config(format!("equilibrium:{id} does not exist ({} found)", equilibria.len()))),
            SeedSpec::Mode { k, amp } => space.mode(k, *amp).map_err(|e| CliError::Config(e.to_string())),
            SeedSpec::Random { seed, scale } => Ok(space.random_smooth(&mut ChaCha8Rng::seed_from_u64(*seed), *scale)),
        }
    }
}

/// Everything a run needs, built from a validated config.
pub struct Built {
    pub space: Space,
    pub model: Model,
    pub forcing: Forcing,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.build()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn domain_spec(&self) -> Result<DomainSpec<f64>, CliError> {
        let d = &self.domain;
        let lengths = d.lengths.clone().unwrap_or_else(|| vec![std::f64::consts::PI; d.dimension]);
        if lengths.len() != d.dimension || d.modes.len() != d.dimension {
            return Err(CliError::Config(format!(
                "domain.dimension = {} but {} lengths and {} mode counts given",
                d.dimension,
                lengths.len(),
                d.modes.len()
            )));
        }
        DomainSpec::new(lengths, d.modes.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Validates every section and builds the space, model and forcing.
    pub fn build(&self) -> Result<Built, CliError> {
        let space = SpectralSpace::new(self.domain_spec()?).map_err(|e| CliError::Config(e.to_string()))?;
        let model = ModelSpec {
            kind: self.model.kind,
            a: self.model.a,
            b: if self.model.kind == ModelKind::ChafeeInfante { 0.0 } else { self.model.b },
        };
        model.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.integrator.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let forcing = self.forcing_model(&space)?;
        if self.recurrence.eps.iter().any(|e| !(*e > 0.0)) || self.study.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(CliError::Config("recurrence eps values must be positive".into()));
        }
        if !(self.recurrence.burn_in >= 0.0) {
            return Err(CliError::Config("recurrence.burn_in must be >= 0".into()));
        }
        let st = &self.study;
        if !(st.horizon > st.burn_in && st.burn_in >= 0.0 && st.dt > 0.0 && st.tracking_h > 0.0 && st.sample_step > 0.0) {
            return Err(CliError::Config("study needs horizon > burn_in >= 0 and positive steps".into()));
        }
        if let Some(sw) = &self.sweep {
            if sw.grid.is_empty() || sw.grid.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config("sweep.grid must be a nonempty list of finite values".into()));
            }
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        for s in &self.seeds {
            if let SeedSpec::Mode { k, .. } = s {
                if k.len() != self.domain.dimension {
                    return Err(CliError::Config(format!("seed {s} needs {} mode indices", self.domain.dimension)));
                }
            }
        }
        Ok(Built { space, model, forcing })
    }

    pub fn forcing_model(&self, space: &Space) -> Result<Forcing, CliError> {
        let f = &self.forcing;
        if f.kind == ForcingKind::Zero {
            if !f.components.is_empty() {
                return Err(CliError::Config("forcing.kind = zero takes no components".into()));
            }
            return Ok(ForcingModel::zero(space.shape()));
        }
        let components = f
            .components
            .iter()
            .map(|c| {
                let raw = space.mode(&c.mode, 1.0).map_err(|e| CliError::Config(e.to_string()))?;
                Ok(ForcingComponent {
                    amplitude: c.amplitude,
                    frequency: c.frequency,
                    phase: c.phase,
                    profile: raw.scaled(1.0 / space.l2_norm(&raw)),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        ForcingModel::new(f.kind, components, space.shape()).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Rescales the forcing amplitudes so the forcing bound equals `m`.
    pub fn set_forcing_bound(&mut self, m: f64) -> Result<(), CliError> {
        let total: f64 = self.forcing.components.iter().map(|c| c.amplitude.abs()).sum();
        if total == 0.0 {
            if m != 0.0 {
                return Err(CliError::Config("--M needs forcing components to rescale".into()));
            }
            return Ok(());
        }
        for c in &mut self.forcing.components {
            c.amplitude *= m / total;
        }
        Ok(())
    }

    /// The two-orbit desk scenario on (0, π) with 128 modes.
    pub fn two_orbit_default() -> Self {
        Self {
            seeds: zero_seed(),
            model: ModelConfig {
                kind: ModelKind::ModifiedSwiftHohenberg,
                a: 0.5,
                b: 0.05,
            },
            domain: DomainConfig::default(),
            forcing: two_frequency(0.03, 0.02),
            integrator: IntegratorConfig::default(),
            analyses: Analyses::default(),
            recurrence: RecurrenceSection::default(),
            study: StudyConfig::default(),
            sweep: None,
            output: OutputConfig::default(),
        }
    }

    /// The three-orbit Chafee–Infante desk scenario.
    pub fn three_orbit_default() -> Self {
        Self {
            model: ModelConfig {
                kind: ModelKind::ChafeeInfante,
                a: 2.0,
                b: 0.0,
            },
            forcing: two_frequency(0.006, 0.004),
            ..Self::two_orbit_default()
        }
    }
}

fn two_frequency(a1: f64, a2: f64) -> ForcingConfig {
    ForcingConfig {
        kind: ForcingKind::Quasiperiodic,
        components: vec![
            ComponentConfig {
                amplitude: a1,
                frequency: 1.0,
                phase: 0.0,
                mode: vec![1],
            },
            ComponentConfig {
                amplitude: a2,
                frequency: std::f64::consts::SQRT_2,
                phase: 0.0,
                mode: vec![2],
            },
        ],
    }
}
