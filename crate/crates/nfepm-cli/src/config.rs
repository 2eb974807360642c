//! Experiment configuration: a TOML file with one section per component.
//!
//! ```toml
//! scenario = "ecrb"
//! snr_db = [30.0]
//!
//! [wave]
//! lambda = 0.1
//!
//! [array]
//! d_r = 5.0
//! l_s = 0.1
//!
//! [prior]
//! h1 = 3.0
//! h2 = 5.0
//! ```
//!
//! Missing sections take the library defaults. `d_r = inf` selects the
//! unbounded strip.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use nfepm_core::ecrb::{ExpectationGrid, SingularPolicy};
use nfepm_core::map::MapGrid;
use nfepm_core::numerics::{QuadratureSpec, T_EPS};
use nfepm_core::zzb::ZzbGrid;
use nfepm_core::{ArrayGeometry, PriorUniform, Wave};

use crate::error::{at, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Channel,
    Solve,
    Zzb,
    Ecrb,
    MapMc,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Channel => "channel",
            Scenario::Solve => "solve",
            Scenario::Zzb => "zzb",
            Scenario::Ecrb => "ecrb",
            Scenario::MapMc => "map-mc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output file name inside the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    pub wave: WaveCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<ArrayCfg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorCfg>,
    #[serde(default)]
    pub channel: ChannelCfg,
    #[serde(default)]
    pub solve: SolveCfg,
    #[serde(default)]
    pub zzb: ZzbCfg,
    #[serde(default)]
    pub ecrb: EcrbCfg,
    #[serde(default)]
    pub map: MapCfg,
}

fn default_seed() -> u64 {
    2024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveCfg {
    pub lambda: f64,
    #[serde(default = "one")]
    pub e_in: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayCfg {
    pub d_r: f64,
    pub l_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorCfg {
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelCfg {
    pub z_t: Vec<f64>,
    pub t_z: f64,
    pub x_r: f64,
    pub y_r: f64,
}

impl Default for ChannelCfg {
    fn default() -> Self {
        Self { z_t: Vec::new(), t_z: 0.5, x_r: 0.0, y_r: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    Auto,
    Case1,
    Case2Pa,
    Case2Sc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveCfg {
    pub u: usize,
    pub v: usize,
    /// Element pair; `0` selects the default `(1, N/2)`.
    pub alpha: usize,
    pub beta: usize,
    pub solver: SolverChoice,
}

impl Default for SolveCfg {
    fn default() -> Self {
        Self { u: 200, v: 200, alpha: 0, beta: 0, solver: SolverChoice::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZzbCfg {
    pub n_delta: usize,
    pub n_theta_z: usize,
    pub n_theta_t: usize,
    pub n_max_search: usize,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for ZzbCfg {
    fn default() -> Self {
        let g = ZzbGrid::default();
        Self {
            n_delta: g.n_delta,
            n_theta_z: g.n_theta_z,
            n_theta_t: g.n_theta_t,
            n_max_search: g.n_max_search,
            rel_tol: g.quad.rel_tol,
            max_subdivisions: g.quad.max_subdivisions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EcrbCfg {
    pub n_z: usize,
    pub n_t: usize,
    pub eps: f64,
    pub skip_singular: bool,
}

impl Default for EcrbCfg {
    fn default() -> Self {
        let g = ExpectationGrid::default();
        Self { n_z: g.n_z, n_t: g.n_t, eps: T_EPS, skip_singular: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapCfg {
    pub n_z: usize,
    pub n_t: usize,
    pub refine_levels: usize,
    pub trials: usize,
}

impl Default for MapCfg {
    fn default() -> Self {
        let g = MapGrid::default();
        Self { n_z: g.n_z, n_t: g.n_t, refine_levels: g.refine_levels, trials: 500 }
    }
}

/// Reads a config file and applies `key=value` overrides before typing it.
pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse(&text, &path.display().to_string(), overrides)
}

pub fn parse(text: &str, origin: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig, CliError> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Parse { path: origin.to_string(), message: e.to_string() })?;
    for (k, v) in overrides {
        apply_override(&mut table, k, v)?;
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Parse { path: origin.to_string(), message: e.to_string() })
}

/// Splits `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String), CliError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Usage(format!("override `{s}` is not of the form key=value"))),
    }
}

/// Sets a dotted key, creating sections as needed. The value is read as a
/// TOML literal, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<(), CliError> {
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for s in sections {
        let entry = cur.entry(s.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::invariant(key, format!("`{s}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn wave(&self) -> Result<Wave, CliError> {
        Wave::new(self.wave.lambda, self.wave.e_in).map_err(at("wave"))
    }

    pub fn geometry(&self) -> Result<ArrayGeometry, CliError> {
        let a = self
            .array
            .as_ref()
            .ok_or_else(|| CliError::invariant("array", "section required for this scenario"))?;
        if a.d_r == f64::INFINITY {
            ArrayGeometry::unbounded(a.l_s).map_err(at("array.l_s"))
        } else {
            ArrayGeometry::new(a.d_r, a.l_s).map_err(at("array"))
        }
    }

    pub fn prior(&self) -> Result<PriorUniform, CliError> {
        let p = self
            .prior
            .as_ref()
            .ok_or_else(|| CliError::invariant("prior", "section required for this scenario"))?;
        PriorUniform::new(p.h1, p.h2).map_err(at("prior"))
    }

    pub fn snrs_db(&self) -> Result<&[f64], CliError> {
        if self.snr_db.is_empty() {
            return Err(CliError::invariant("snr_db", "SNR list must be non-empty"));
        }
        if let Some(x) = self.snr_db.iter().find(|x| !x.is_finite()) {
            return Err(CliError::invariant("snr_db", format!("non-finite entry {x}")));
        }
        Ok(&self.snr_db)
    }

    pub fn zzb_grid(&self) -> Result<ZzbGrid, CliError> {
        let c = &self.zzb;
        let quad = QuadratureSpec::new(1e-300, c.rel_tol, c.max_subdivisions).map_err(at("zzb"))?;
        let g = ZzbGrid { n_delta: c.n_delta, n_theta_z: c.n_theta_z, n_theta_t: c.n_theta_t, n_max_search: c.n_max_search, quad };
        g.validate().map_err(at("zzb"))?;
        Ok(g)
    }

    pub fn expectation_grid(&self) -> Result<ExpectationGrid, CliError> {
        let c = &self.ecrb;
        if c.n_z == 0 || c.n_t == 0 {
            return Err(CliError::invariant("ecrb", "n_z and n_t must be >= 1"));
        }
        if !(c.eps > 0.0 && c.eps < 1.0) {
            return Err(CliError::invariant("ecrb.eps", format!("need 0 < eps < 1, got {}", c.eps)));
        }
        Ok(ExpectationGrid { n_z: c.n_z, n_t: c.n_t, eps: c.eps })
    }

    pub fn singular_policy(&self) -> SingularPolicy {
        if self.ecrb.skip_singular {
            SingularPolicy::Skip
        } else {
            SingularPolicy::Error
        }
    }

    pub fn map_grid(&self) -> Result<MapGrid, CliError> {
        if self.map.trials == 0 {
            return Err(CliError::invariant("map.trials", "must be >= 1"));
        }
        MapGrid::new(self.map.n_z, self.map.n_t, self.map.refine_levels).map_err(at("map"))
    }
}
