//! Scenario configuration file.
//!
//! A TOML document with one section per block. Every section is optional and
//! defaults to the shipped values; unknown keys are rejected. The presence of
//! a `[sweep]` or `[timeseries]` section selects the run mode.
//!
//! ```toml
//! [link]
//! length_km = 50.0
//!
//! [comb]
//! n_channels = 60
//! power = { total_dbm = 16.8 }
//!
//! [sweep]
//! variable = "length"
//! values = [20.0, 50.0, 70.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::{shipped_params, Anchor, FreeParam};
use crate::error::{Error, Result};
use crate::optics::{
    fiber_input_power, AttenuationTable, CombFill, FiberLink, PowerDbm, WdmComb, AUX_TO_FIBER_INSERTION_LOSS_DB,
};
use crate::qkd::{DetectorParams, ProtocolParams};
use crate::simulate::{NoiseSettings, SystemParams};

/// The shipped default scenario: 50 km, 60 channels at 16.8 dBm, fitted parameters.
pub const DEFAULT_CONFIG: &str = include_str!("../../config/default.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub length_km: f64,
    pub fixed_loss_classical_db: f64,
    pub fixed_loss_quantum_db: f64,
    /// `[wavelength nm, attenuation dB/km]` knots.
    pub attenuation: AttenuationTable,
}

impl Default for LinkConfig {
    fn default() -> Self {
        let link = FiberLink::default();
        LinkConfig {
            length_km: link.length_km,
            fixed_loss_classical_db: link.fixed_loss_classical_db,
            fixed_loss_quantum_db: link.fixed_loss_quantum_db,
            attenuation: link.attenuation,
        }
    }
}

/// How the comb power is specified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CombPower {
    /// Aggregate power launched into the fiber.
    TotalDbm(f64),
    /// Power of each channel at the fiber launch.
    PerChannelDbm(f64),
    /// Aggregate power at the auxiliary input, before the insertion loss.
    AuxRxDbm(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombConfig {
    pub enabled: bool,
    /// 30 or 60.
    pub n_channels: usize,
    pub power: CombPower,
    pub aux_insertion_loss_db: f64,
    /// Count the two supervisory channels toward the aggregate.
    pub include_service_channels: bool,
    pub service_channel_power_dbm: f64,
}

impl Default for CombConfig {
    fn default() -> Self {
        CombConfig {
            enabled: true,
            n_channels: 60,
            power: CombPower::TotalDbm(16.8),
            aux_insertion_loss_db: AUX_TO_FIBER_INSERTION_LOSS_DB,
            include_service_channels: false,
            service_channel_power_dbm: 0.0,
        }
    }
}

impl CombConfig {
    /// Aggregate data-channel power at the fiber launch.
    pub fn launch_power(&self) -> PowerDbm {
        match self.power {
            CombPower::TotalDbm(p) => PowerDbm(p),
            CombPower::PerChannelDbm(p) => PowerDbm(p + 10.0 * (self.n_channels as f64).log10()),
            CombPower::AuxRxDbm(p) => fiber_input_power(PowerDbm(p), self.aux_insertion_loss_db),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    /// Fiber length, km.
    Length,
    /// Aggregate launch power, dBm.
    Power,
    /// Channel count, 30 or 60, at fixed aggregate power.
    Channels,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeseriesConfig {
    pub duration_s: f64,
    pub interval_s: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Calibration settings read by `calibrate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub tolerance: f64,
    pub max_evals: usize,
    pub seeds: Vec<u64>,
    /// Empty means the standard free set.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub free_params: Vec<FreeParam>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tolerance: 0.10,
            max_evals: 20_000,
            seeds: vec![0, 1, 2, 3],
            free_params: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Point,
    Sweep,
    Timeseries,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Point => "fixed-point",
            Mode::Sweep => "sweep",
            Mode::Timeseries => "timeseries",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub link: LinkConfig,
    pub comb: CombConfig,
    pub protocol: ProtocolParams,
    pub detector: DetectorParams,
    pub noise: NoiseSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeseries: Option<TimeseriesConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<Anchor>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let params = shipped_params();
        ScenarioConfig {
            link: LinkConfig::default(),
            comb: CombConfig::default(),
            protocol: params.protocol,
            detector: params.detector,
            noise: params.noise,
            sweep: None,
            timeseries: None,
            fit: None,
            anchors: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    /// Parse and validate a config document. `origin` is used in messages.
    ///
    /// `[protocol]`, `[detector]` and `[noise]` may list only some keys; the
    /// rest come from the shipped fitted parameters.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            file: origin.to_path_buf(),
            message,
        };
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
        let shipped = shipped_params();
        overlay(&mut doc, "protocol", &shipped.protocol).map_err(parse_err)?;
        overlay(&mut doc, "detector", &shipped.detector).map_err(parse_err)?;
        overlay(&mut doc, "noise", &shipped.noise).map_err(parse_err)?;
        let cfg: ScenarioConfig = doc.try_into().map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ScenarioConfig::parse(&text, path)
    }

    /// Serialize with every defaulted field written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// Replace the fitted quantities with those from a parameter file.
    /// Feed direction and filter leakage stay as configured.
    pub fn apply_fitted(&mut self, fitted: &SystemParams) {
        self.protocol = fitted.protocol;
        self.detector = fitted.detector;
        self.noise.beta_per_km_nm = fitted.noise.beta_per_km_nm;
        self.noise.filter_bandwidth_nm = fitted.noise.filter_bandwidth_nm;
    }

    pub fn mode(&self) -> Result<Mode> {
        match (&self.sweep, &self.timeseries) {
            (None, None) => Ok(Mode::Point),
            (Some(_), None) => Ok(Mode::Sweep),
            (None, Some(_)) => Ok(Mode::Timeseries),
            (Some(_), Some(_)) => Err(Error::config(
                "sweep, timeseries",
                "a scenario is either a sweep or a time series, not both",
            )),
        }
    }

    pub fn system(&self) -> SystemParams {
        SystemParams {
            protocol: self.protocol,
            detector: self.detector,
            noise: self.noise,
        }
    }

    pub fn fiber_link(&self) -> Result<FiberLink> {
        let l = &self.link;
        let link = FiberLink {
            length_km: l.length_km,
            attenuation: l.attenuation.clone(),
            fixed_loss_classical_db: l.fixed_loss_classical_db,
            fixed_loss_quantum_db: l.fixed_loss_quantum_db,
        };
        link.validated().map_err(|e| Error::config("link", strip_domain(e)))
    }

    /// Build the comb at the configured power.
    pub fn wdm_comb(&self) -> Result<WdmComb> {
        self.comb_with(self.comb.n_channels, self.comb.launch_power())
    }

    pub(crate) fn comb_with(&self, n_channels: usize, launch: PowerDbm) -> Result<WdmComb> {
        let fill = CombFill::from_count(n_channels).map_err(|e| Error::config("comb.n_channels", strip_domain(e)))?;
        let power = if self.comb.enabled { launch } else { PowerDbm::OFF };
        let comb = WdmComb::reference(fill, power).map_err(|e| Error::config("comb.power", strip_domain(e)))?;
        Ok(comb.with_service_channels(
            PowerDbm(self.comb.service_channel_power_dbm),
            self.comb.enabled && self.comb.include_service_channels,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        self.mode()?;
        self.fiber_link()?;
        self.wdm_comb()?;
        let finite = |path: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be a finite number, got {v}")))
            }
        };
        match self.comb.power {
            CombPower::TotalDbm(p) => finite("comb.power.total_dbm", p)?,
            CombPower::PerChannelDbm(p) => finite("comb.power.per_channel_dbm", p)?,
            CombPower::AuxRxDbm(p) => finite("comb.power.aux_rx_dbm", p)?,
        }
        if !(self.comb.aux_insertion_loss_db >= 0.0) {
            return Err(Error::config("comb.aux_insertion_loss_db", "must be >= 0 dB"));
        }
        finite("comb.service_channel_power_dbm", self.comb.service_channel_power_dbm)?;
        self.protocol
            .validate()
            .map_err(|e| Error::config("protocol", strip_domain(e)))?;
        self.detector
            .validate()
            .map_err(|e| Error::config("detector", strip_domain(e)))?;
        self.system()
            .validate()
            .map_err(|e| Error::config("noise", strip_domain(e)))?;
        let duty = self.detector.gate_width_s * self.protocol.pulse_rate_hz;
        if duty > 1.0 {
            return Err(Error::config(
                "detector.gate_width_s",
                format!("gate duty factor {duty} exceeds 1 at the configured pulse rate"),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("sweep.values", "sweep needs at least one value"));
            }
            for (i, &v) in sweep.values.iter().enumerate() {
                let path = format!("sweep.values[{i}]");
                finite(&path, v)?;
                match sweep.variable {
                    SweepVariable::Length if v < 0.0 => return Err(Error::config(path, "length must be >= 0 km")),
                    SweepVariable::Channels if v != 30.0 && v != 60.0 => {
                        return Err(Error::config(path, "channel count must be 30 or 60"))
                    }
                    _ => {}
                }
            }
        }
        if let Some(ts) = &self.timeseries {
            if !(ts.interval_s > 0.0) || !ts.interval_s.is_finite() {
                return Err(Error::config("timeseries.interval_s", "interval must be > 0 s"));
            }
            if !(ts.duration_s >= 0.0) || !ts.duration_s.is_finite() {
                return Err(Error::config("timeseries.duration_s", "duration must be >= 0 s"));
            }
        }
        if let Some(fit) = &self.fit {
            if !(fit.tolerance > 0.0) {
                return Err(Error::config("fit.tolerance", "must be > 0"));
            }
            if fit.seeds.is_empty() {
                return Err(Error::config("fit.seeds", "at least one seed is required"));
            }
        }
        for a in &self.anchors {
            a.validate()?;
        }
        Ok(())
    }
}

/// Fill missing keys of `doc[section]` from `base`.
fn overlay<T: Serialize>(doc: &mut toml::Table, section: &str, base: &T) -> std::result::Result<(), String> {
    let Some(user) = doc.get(section) else {
        return Ok(());
    };
    let toml::Value::Table(user) = user else {
        return Err(format!("`{section}` must be a table"));
    };
    let mut merged = toml::Table::try_from(base).map_err(|e| e.to_string())?;
    merged.extend(user.clone());
    doc.insert(section.to_string(), toml::Value::Table(merged));
    Ok(())
}

fn strip_domain(e: Error) -> String {
    match e {
        Error::Domain(msg) => msg,
        other => other.to_string(),
    }
}
