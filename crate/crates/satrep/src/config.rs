//! Scenario configuration files.
//!
//! A configuration is a TOML document with the sections `geometry`,
//! `channel`, `repetition`, `budget`, `constellation`, `sim`, `sweep` and
//! `output`. Every key is optional and defaults to the reference scenario.
//! Keys carry their unit in the name (`_km`, `_dbm`, `_db`, `_deg`, `_mhz`,
//! `_per_km2`); this module is the only place where those units are
//! converted to the SI, linear and radian values the model uses.

use std::fmt::Write as _;
use std::path::Path;

use satrep_core::channel::ChannelParams;
use satrep_core::geometry::{cap_fraction, ElevationAngle, OrbitGeometry};
use satrep_core::link_analysis::{LinkBudget, Scenario};
use satrep_core::montecarlo::{EstimatorOutputs, InterferenceMode, SimConfig};
use satrep_core::repetition::{admittance_bound, RepetitionPolicy};
use satrep_core::sweep::{logspace, SweepGrid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid `{field}` = {value}: {reason}")]
    Invalid {
        field: String,
        value: String,
        reason: String,
    },
    #[error("bad override `{0}`: expected --section.key=value")]
    Override(String),
}

fn invalid(field: &str, value: impl std::fmt::Display, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            earth_radius_km: 6371.0,
            altitude_km: 550.0,
        }
    }
}

/// Placeholder suburban-like values; the clutter and shadowing parameters
/// depend on the deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub beta: f64,
    pub mu_los_db: f64,
    pub sigma_los_db: f64,
    pub mu_nlos_db: f64,
    pub sigma_nlos_db: f64,
    pub frequency_mhz: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let c = ChannelParams::default();
        ChannelConfig {
            beta: c.beta,
            mu_los_db: c.mu_los_db,
            sigma_los_db: c.sigma_los_db,
            mu_nlos_db: c.mu_nlos_db,
            sigma_nlos_db: c.sigma_nlos_db,
            frequency_mhz: 2000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepetitionConfig {
    pub d0: f64,
    pub a: f64,
    pub theta_min_deg: f64,
}

impl Default for RepetitionConfig {
    fn default() -> Self {
        RepetitionConfig {
            d0: 1e-6,
            a: 5e-5,
            theta_min_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub sinr_threshold_db: f64,
    pub kappa: f64,
    pub lambda0_per_km2: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            tx_power_dbm: 23.0,
            noise_dbm: -138.0,
            sinr_threshold_db: -10.0,
            kappa: 1.0,
            lambda0_per_km2: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub k: u32,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        ConstellationConfig { k: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceModel {
    MeanField,
    PerRepeatField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub seed: u64,
    pub realizations: u64,
    pub trials: u64,
    pub zenith_samples: u64,
    /// Largest candidate count drawn for one field; 0 disables the cap.
    pub device_cap: u64,
    pub interference: InterferenceModel,
    pub zenith_cdf: bool,
    pub mean_interference: bool,
    pub p_success: bool,
    pub p_global: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        let s = SimConfig::default();
        SimSection {
            seed: s.seed,
            realizations: s.n_realizations,
            trials: s.n_trials,
            zenith_samples: s.n_zenith_samples,
            device_cap: s.n_devices_cap.unwrap_or(0),
            interference: InterferenceModel::MeanField,
            zenith_cdf: true,
            mean_interference: true,
            p_success: true,
            p_global: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub a_min: f64,
    pub a_max: f64,
    pub a_points: usize,
    pub theta_min_start_deg: f64,
    pub theta_min_stop_deg: f64,
    pub theta_min_step_deg: f64,
    pub refine_levels: u32,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            a_min: 1e-6,
            a_max: 1e-2,
            a_points: 25,
            theta_min_start_deg: 1.0,
            theta_min_stop_deg: 45.0,
            theta_min_step_deg: 1.0,
            refine_levels: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: ".".to_string(),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub repetition: RepetitionConfig,
    pub budget: BudgetConfig,
    pub constellation: ConstellationConfig,
    pub sim: SimSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, v, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, v, "must be positive"))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, v, "must be non-negative"))
    }
}

/// Parses an override value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies a `section.key=value` override (leading dashes allowed).
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let body = spec.trim_start_matches('-');
    let (path, raw) = body
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    let (section, key) = path
        .split_once('.')
        .ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    if section.is_empty() || key.is_empty() || key.contains('.') {
        return Err(ConfigError::Override(spec.to_string()));
    }
    let table = doc
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let toml::Value::Table(table) = table else {
        return Err(ConfigError::Override(spec.to_string()));
    };
    table.insert(key.to_string(), parse_value(raw));
    Ok(())
}

impl Config {
    /// Parses a TOML document, applies overrides and validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let parse = |e: toml::de::Error| ConfigError::Parse(e.to_string());
        // the first pass keeps source spans in schema errors
        let mut cfg: Config = toml::from_str(text).map_err(parse)?;
        if !overrides.is_empty() {
            let mut doc: toml::Table = text.parse().map_err(parse)?;
            for o in overrides {
                apply_override(&mut doc, o)?;
            }
            cfg = doc.try_into().map_err(parse)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_toml_string())
    }

    /// SHA-256 of the canonical serialization, in hex. The `[output]`
    /// section does not affect results and is left out.
    pub fn hash(&self) -> String {
        let canonical = Config {
            output: OutputSection::default(),
            ..self.clone()
        };
        let digest = Sha256::digest(canonical.to_toml_string().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        positive("geometry.earth_radius_km", g.earth_radius_km)?;
        positive("geometry.altitude_km", g.altitude_km)?;

        let c = &self.channel;
        positive("channel.beta", c.beta)?;
        finite("channel.mu_los_db", c.mu_los_db)?;
        non_negative("channel.sigma_los_db", c.sigma_los_db)?;
        finite("channel.mu_nlos_db", c.mu_nlos_db)?;
        non_negative("channel.sigma_nlos_db", c.sigma_nlos_db)?;
        positive("channel.frequency_mhz", c.frequency_mhz)?;

        let r = &self.repetition;
        if !(r.d0 > 0.0 && r.d0 <= 1.0) {
            return Err(invalid("repetition.d0", r.d0, "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&r.a) {
            return Err(invalid("repetition.a", r.a, "must lie in [0, 1]"));
        }
        if !(0.0..90.0).contains(&r.theta_min_deg) {
            return Err(invalid(
                "repetition.theta_min_deg",
                r.theta_min_deg,
                "must lie in [0, 90)",
            ));
        }

        let b = &self.budget;
        finite("budget.tx_power_dbm", b.tx_power_dbm)?;
        finite("budget.noise_dbm", b.noise_dbm)?;
        finite("budget.sinr_threshold_db", b.sinr_threshold_db)?;
        if !(b.kappa > 0.0 && b.kappa <= 1.0) {
            return Err(invalid("budget.kappa", b.kappa, "must lie in (0, 1]"));
        }
        positive("budget.lambda0_per_km2", b.lambda0_per_km2)?;

        let k = self.constellation.k;
        if k == 0 {
            return Err(invalid("constellation.k", k, "need at least one satellite"));
        }
        let geom = self.geometry()?;
        let phi_max = geom.zenith_from_elevation(self.theta_min()?);
        let coverage = f64::from(k) * cap_fraction(phi_max);
        if coverage > 1.0 + 1e-12 {
            return Err(invalid(
                "constellation.k",
                k,
                "disjoint admittance regions would cover more than the whole sphere",
            ));
        }

        let s = &self.sim;
        for (field, v) in [
            ("sim.realizations", s.realizations),
            ("sim.trials", s.trials),
            ("sim.zenith_samples", s.zenith_samples),
        ] {
            if v == 0 {
                return Err(invalid(field, v, "must be at least 1"));
            }
        }

        let w = &self.sweep;
        if !(w.a_min > 0.0 && w.a_min <= 1.0) {
            return Err(invalid("sweep.a_min", w.a_min, "must lie in (0, 1]"));
        }
        if !(w.a_max >= w.a_min && w.a_max <= 1.0) {
            return Err(invalid("sweep.a_max", w.a_max, "must lie in [a_min, 1]"));
        }
        if w.a_points == 0 || (w.a_points == 1 && w.a_max != w.a_min) {
            return Err(invalid(
                "sweep.a_points",
                w.a_points,
                "must be at least 2 unless a_min = a_max",
            ));
        }
        if !(0.0..90.0).contains(&w.theta_min_start_deg) {
            return Err(invalid(
                "sweep.theta_min_start_deg",
                w.theta_min_start_deg,
                "must lie in [0, 90)",
            ));
        }
        if !(w.theta_min_stop_deg >= w.theta_min_start_deg && w.theta_min_stop_deg < 90.0) {
            return Err(invalid(
                "sweep.theta_min_stop_deg",
                w.theta_min_stop_deg,
                "must lie in [theta_min_start_deg, 90)",
            ));
        }
        positive("sweep.theta_min_step_deg", w.theta_min_step_deg)?;
        if w.refine_levels > 30 {
            return Err(invalid("sweep.refine_levels", w.refine_levels, "must be at most 30"));
        }

        if self.output.dir.is_empty() {
            return Err(invalid("output.dir", "\"\"", "must not be empty"));
        }
        self.scenario()?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<OrbitGeometry, ConfigError> {
        OrbitGeometry::new(self.geometry.earth_radius_km * 1e3, self.geometry.altitude_km * 1e3)
            .map_err(|e| invalid("geometry", e, "invalid orbit"))
    }

    pub fn theta_min(&self) -> Result<ElevationAngle, ConfigError> {
        ElevationAngle::new(self.repetition.theta_min_deg.to_radians()).map_err(|_| {
            invalid(
                "repetition.theta_min_deg",
                self.repetition.theta_min_deg,
                "must lie in [0, 90)",
            )
        })
    }

    pub fn channel_params(&self) -> ChannelParams {
        let c = &self.channel;
        ChannelParams {
            beta: c.beta,
            mu_los_db: c.mu_los_db,
            sigma_los_db: c.sigma_los_db,
            mu_nlos_db: c.mu_nlos_db,
            sigma_nlos_db: c.sigma_nlos_db,
            frequency_hz: c.frequency_mhz * 1e6,
        }
    }

    pub fn budget(&self) -> LinkBudget {
        let b = &self.budget;
        LinkBudget {
            tx_power_w: dbm_to_w(b.tx_power_dbm),
            noise_power_w: dbm_to_w(b.noise_dbm),
            sinr_threshold: db_to_linear(b.sinr_threshold_db),
            kappa: b.kappa,
        }
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let geometry = self.geometry()?;
        let r = &self.repetition;
        let policy = RepetitionPolicy {
            d0: r.d0,
            a: r.a,
            phi_max_rad: admittance_bound(&geometry, self.theta_min()?),
            lambda0: self.budget.lambda0_per_km2 * 1e-6,
        };
        Scenario::new(geometry, self.channel_params(), policy, self.budget())
            .map_err(|e| invalid("scenario", e, "rejected by the model"))
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.sim;
        SimConfig {
            seed: s.seed,
            n_realizations: s.realizations,
            n_trials: s.trials,
            n_zenith_samples: s.zenith_samples,
            n_devices_cap: (s.device_cap > 0).then_some(s.device_cap),
            interference: match s.interference {
                InterferenceModel::MeanField => InterferenceMode::MeanField,
                InterferenceModel::PerRepeatField => InterferenceMode::PerRepeatField,
            },
            outputs: EstimatorOutputs {
                zenith_cdf: s.zenith_cdf,
                interference: s.mean_interference,
                p_success: s.p_success,
                p_global: s.p_global,
            },
        }
    }

    pub fn sweep_grid(&self) -> SweepGrid {
        let w = &self.sweep;
        let a_values = if w.a_points == 1 {
            vec![w.a_min]
        } else {
            logspace(w.a_min, w.a_max, w.a_points)
        };
        let steps = ((w.theta_min_stop_deg - w.theta_min_start_deg) / w.theta_min_step_deg + 1e-9).floor() as usize;
        let theta_min_values_rad = (0..=steps)
            .map(|i| (w.theta_min_start_deg + i as f64 * w.theta_min_step_deg).to_radians())
            .collect();
        SweepGrid {
            a_values,
            theta_min_values_rad,
            k: self.constellation.k,
            refine_levels: w.refine_levels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_reference_scenario() {
        let cfg = Config::from_toml_str("", &[]).unwrap();
        assert_eq!(cfg, Config::default());
        let s = cfg.scenario().unwrap();
        let r = Scenario::reference();
        let close = |x: f64, y: f64| ((x - y) / y).abs() < 1e-14;
        assert!(close(s.budget.tx_power_w, r.budget.tx_power_w));
        assert!(close(s.budget.noise_power_w, r.budget.noise_power_w));
        assert!(close(s.budget.sinr_threshold, r.budget.sinr_threshold));
        assert!(close(s.policy.lambda0, r.policy.lambda0));
        assert!(close(s.policy.phi_max_rad, r.policy.phi_max_rad));
        assert_eq!(s.geometry, r.geometry);
        assert_eq!(s.channel, r.channel);
    }

    #[test]
    fn negative_min_elevation_names_field() {
        let e = Config::from_toml_str("[repetition]\ntheta_min_deg = -5\n", &[]).unwrap_err();
        assert!(e.to_string().contains("repetition.theta_min_deg"), "{e}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Config::from_toml_str("[geometry]\naltitude_km = 550\nearth_radius_km = = 1\n", &[]).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = Config::from_toml_str("[geometry]\n\naltitude = 550\n", &[]).unwrap_err();
        assert!(
            e.to_string().contains("line 3") && e.to_string().contains("altitude"),
            "{e}"
        );
    }

    #[test]
    fn overrides() {
        let cfg = Config::from_toml_str(
            "[repetition]\na = 0.0\n",
            &[
                "--repetition.a=2e-4".into(),
                "--output.format=json".into(),
                "--sim.seed=9".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.repetition.a, 2e-4);
        assert_eq!(cfg.output.format, Format::Json);
        assert_eq!(cfg.sim.seed, 9);
        assert!(Config::from_toml_str("", &["--repetition.bogus=1".into()]).is_err());
        assert!(Config::from_toml_str("", &["--repetition=1".into()]).is_err());
        let e = Config::from_toml_str("", &["--budget.kappa=0".into()]).unwrap_err();
        assert!(e.to_string().contains("budget.kappa"));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut cfg = Config::default();
        cfg.geometry.altitude_km = 550.0;
        cfg.channel.frequency_mhz = 2000.0;
        cfg.repetition.a = 0.1 + 0.2;
        cfg.budget.lambda0_per_km2 = 1.0 / 3.0;
        let back = Config::from_toml_str(&cfg.to_toml_string(), &[]).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.repetition.a.to_bits(), cfg.repetition.a.to_bits());
        assert_eq!(back.hash(), cfg.hash());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        cfg.save(&path).unwrap();
        assert_eq!(Config::load(&path, &[]).unwrap(), cfg);
    }

    #[test]
    fn hash_ignores_output_section() {
        let cfg = Config::default();
        let mut moved = cfg.clone();
        moved.output.dir = "elsewhere".into();
        assert_eq!(moved.hash(), cfg.hash());
        let mut tuned = cfg.clone();
        tuned.repetition.a = 1e-4;
        assert_ne!(tuned.hash(), cfg.hash());
    }

    #[test]
    fn overlapping_constellation_is_rejected() {
        let e = Config::from_toml_str("[constellation]\nk = 40\n[repetition]\ntheta_min_deg = 0\n", &[]).unwrap_err();
        assert!(e.to_string().contains("constellation.k"), "{e}");
    }

    #[test]
    fn sweep_grid_defaults() {
        let g = Config::default().sweep_grid();
        assert_eq!(g.a_values.len(), 25);
        assert_eq!(g.theta_min_values_rad.len(), 45);
        assert_eq!(g.theta_min_values_rad[44], 45f64.to_radians());
        g.validate().unwrap();
    }

    #[test]
    fn missing_file_names_path() {
        let e = Config::load(Path::new("/nonexistent/x.toml"), &[]).unwrap_err();
        assert!(e.to_string().contains("/nonexistent/x.toml"));
    }
}
