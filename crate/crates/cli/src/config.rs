//! Run configuration: JSON document plus command-line overrides.

use std::path::PathBuf;

use ergoflux_core::channels::bose_occupation;
use ergoflux_core::ergotropy::pure_qubit;
use ergoflux_core::region::GridSpec;
use ergoflux_core::state::{bloch_to_density, BlochVector, DensityMatrix, QutritDiagonal};
use ergoflux_core::{ChannelSpec, Gadc, NonMarkovAdc, Pauli, QutritAdc};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Traj,
    Crossings,
    Region,
    Verify,
    Spectrum,
}

impl std::str::FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| CliError::Usage(format!("unknown command {s:?}")))
    }
}

fn one() -> f64 {
    1.0
}

/// Channel block. `n` and `temperature` are alternatives for the thermal
/// occupation; both default to the zero-temperature bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelConfig {
    #[serde(rename = "gadc")]
    Gadc(GadcConfig),
    Pauli(PauliConfig),
    QutritAdc(QutritConfig),
    NonMarkovAdc(NonMarkovConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadcConfig {
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default = "one")]
    pub h_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliConfig {
    pub gamma_perp: f64,
    pub gamma_z: f64,
    #[serde(default = "one")]
    pub h_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QutritConfig {
    pub gamma: f64,
    #[serde(default = "one")]
    pub h_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonMarkovConfig {
    pub gamma: f64,
    pub lambda: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "one")]
    pub h_z: f64,
}

impl ChannelConfig {
    pub fn to_spec(&self) -> CliResult<ChannelSpec> {
        let phys = |e: ergoflux_core::Error| CliError::Physics(e.to_string());
        Ok(match self {
            ChannelConfig::Gadc(c) => {
                let n = match (c.n, c.temperature) {
                    (Some(_), Some(_)) => {
                        return Err(CliError::Physics(
                            "give either n or temperature for the gadc channel, not both".into(),
                        ))
                    }
                    (Some(n), None) => n,
                    (None, Some(t)) => bose_occupation(t, c.h_z).map_err(phys)?,
                    (None, None) => 0.0,
                };
                ChannelSpec::Gadc(Gadc::new(c.gamma, n, c.h_z).map_err(phys)?)
            }
            ChannelConfig::Pauli(c) => ChannelSpec::Pauli(Pauli::new(c.gamma_perp, c.gamma_z, c.h_z).map_err(phys)?),
            ChannelConfig::QutritAdc(c) => ChannelSpec::QutritAdc(QutritAdc::new(c.gamma, c.h_z).map_err(phys)?),
            ChannelConfig::NonMarkovAdc(c) => {
                ChannelSpec::NonMarkovAdc(NonMarkovAdc::new(c.gamma, c.lambda, c.delta, c.h_z).map_err(phys)?)
            }
        })
    }

    /// `--gamma` override: the base rate of the channel (`γ_⊥` for Pauli).
    pub fn set_gamma(&mut self, g: f64) {
        match self {
            ChannelConfig::Gadc(c) => c.gamma = g,
            ChannelConfig::Pauli(c) => c.gamma_perp = g,
            ChannelConfig::QutritAdc(c) => c.gamma = g,
            ChannelConfig::NonMarkovAdc(c) => c.gamma = g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `(m_x, m_y, m_z)`
    Bloch([f64; 3]),
    /// `(p1, p2)`: populations of the top and middle levels.
    Qutrit([f64; 2]),
    /// `(θ, φ)`
    Pure([f64; 2]),
}

impl StateSpec {
    pub fn dim(&self) -> usize {
        match self {
            StateSpec::Qutrit(_) => 3,
            _ => 2,
        }
    }

    pub fn to_density(&self) -> CliResult<DensityMatrix> {
        let phys = |e: ergoflux_core::Error| CliError::Physics(e.to_string());
        match *self {
            StateSpec::Bloch([x, y, z]) => bloch_to_density(BlochVector::new(x, y, z).map_err(phys)?).map_err(phys),
            StateSpec::Qutrit([p1, p2]) => QutritDiagonal::new(p1, p2).and_then(|q| q.to_density()).map_err(phys),
            StateSpec::Pure([theta, phi]) => {
                if !(0.0..=std::f64::consts::PI).contains(&theta) || !phi.is_finite() {
                    return Err(CliError::Physics(format!(
                        "pure state angles ({theta}, {phi}) need θ in [0, π]"
                    )));
                }
                pure_qubit(theta, phi).map_err(phys)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory receiving the artifacts.
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

/// Which sweep a `region` run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    Emc,
    StateVsEmc,
    CrossingCount,
    QutritSimplex,
    MpembaParameter,
}

fn default_points() -> usize {
    1001
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_points")]
    pub n_points: usize,
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub properties: Vec<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// Values given on the command line; they win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub command: Option<Command>,
    pub gamma: Option<f64>,
    pub t_max: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn line_col(src: &str, e: &serde_json::Error) -> (usize, usize) {
    let (line, col) = (e.line(), e.column());
    if line > 0 {
        return (line, col);
    }
    let lines = src.lines().count().max(1);
    (lines, src.lines().last().map_or(0, |l| l.chars().count()))
}

/// Parses and validates a configuration document.
pub fn parse_config(source: &str) -> CliResult<RunConfig> {
    let cfg = parse_unchecked(source)?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_unchecked(source: &str) -> CliResult<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(source).map_err(|e| {
        let (line, column) = line_col(source, &e);
        CliError::Syntax {
            line,
            column,
            message: e.to_string(),
        }
    })?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema {
            message: e.into_inner().to_string(),
            path,
        }
    })
}

/// Parses, applies overrides, then validates.
pub fn load_config(source: &str, o: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = parse_unchecked(source)?;
    cfg.apply(o);
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(c) = o.command {
            self.command = Some(c);
        }
        if let Some(g) = o.gamma {
            self.channel.set_gamma(g);
        }
        if let Some(t) = o.t_max {
            self.horizon = Some(t);
        }
        if let Some(p) = &o.out {
            self.output.path = p.clone();
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
    }

    pub fn command(&self) -> CliResult<Command> {
        self.command
            .ok_or_else(|| CliError::Usage("no command given in the file or on the command line".into()))
    }

    pub fn channel_spec(&self) -> CliResult<ChannelSpec> {
        self.channel.to_spec()
    }

    pub fn densities(&self) -> CliResult<Vec<DensityMatrix>> {
        self.states.iter().map(|s| s.to_density()).collect()
    }

    pub fn scan_kind(&self, c: &ChannelSpec) -> ScanKind {
        self.scan.unwrap_or(match c {
            ChannelSpec::QutritAdc(_) => ScanKind::QutritSimplex,
            ChannelSpec::NonMarkovAdc(_) => ScanKind::CrossingCount,
            _ => ScanKind::Emc,
        })
    }

    /// Physics and arity checks.
    pub fn validate(&self) -> CliResult<()> {
        let c = self.channel_spec()?;
        for (k, s) in self.states.iter().enumerate() {
            if s.dim() != c.dim() {
                return Err(CliError::Physics(format!(
                    "state {k} has dimension {} but the {} channel acts on dimension {}",
                    s.dim(),
                    c.name(),
                    c.dim()
                )));
            }
            s.to_density()?;
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Physics(format!("horizon {h} must be positive")));
            }
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| CliError::Physics(e.to_string()))?;
        }
        let Some(cmd) = self.command else {
            return Ok(());
        };
        let n = self.states.len();
        let arity = |ok: bool, want: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Schema {
                    path: "states".into(),
                    message: format!("{cmd:?} needs {want}, got {n}").to_lowercase(),
                })
            }
        };
        match cmd {
            Command::Traj => {
                arity(n >= 1, "at least one state")?;
                if self.n_points < 2 {
                    return Err(CliError::Schema {
                        path: "n_points".into(),
                        message: "n_points must be at least 2".into(),
                    });
                }
            }
            Command::Crossings => arity(n == 2, "exactly two states")?,
            Command::Region => {
                if self.grid.is_none() {
                    return Err(CliError::Schema {
                        path: "grid".into(),
                        message: "region runs need a grid".into(),
                    });
                }
                if self.scan_kind(&c) == ScanKind::MpembaParameter {
                    arity(n == 0, "no states")?;
                } else {
                    arity(n == 1, "exactly one reference state")?;
                }
            }
            Command::Verify => {
                if self.properties.is_empty() {
                    return Err(CliError::Schema {
                        path: "properties".into(),
                        message: "verify runs need at least one property".into(),
                    });
                }
            }
            Command::Spectrum => {
                if !c.is_markovian() {
                    return Err(CliError::Physics(
                        "the non-Markovian channel has no time-independent generator".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}
