//! Power units, the DWDM channel plan and fiber link-budget arithmetic.
//!
//! Powers are carried as [`PowerDbm`] (logarithmic, may be `-inf` for a dark
//! source) or [`PowerMw`] (linear, never negative). A [`WdmComb`] stores its
//! channel grid in wavelength and validates it in frequency. A [`FiberLink`]
//! owns a piecewise-linear attenuation table plus one lumped loss per band.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Insertion loss between the Alice auxiliary input and the fiber launch point.
pub const AUX_TO_FIBER_INSERTION_LOSS_DB: f64 = 1.7;

/// Shortest and longest wavelength a default attenuation table must cover.
pub const TABLE_MIN_NM: f64 = 1260.0;
pub const TABLE_MAX_NM: f64 = 1625.0;

/// Frequency of the 50 GHz grid slots used for the 60-channel comb, THz.
const COMB_LOW_THZ: f64 = 192.55;
const COMB_GRID_GHZ: f64 = 50.0;
const COMB_FULL_CHANNELS: usize = 60;

/// Tolerance on grid uniformity when validating a comb.
const GRID_TOLERANCE_GHZ: f64 = 0.1;

/// Absolute optical power in dBm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerDbm(pub f64);

/// Absolute optical power in mW. Always finite and non-negative.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct PowerMw(f64);

impl PowerMw {
    pub const ZERO: PowerMw = PowerMw(0.0);

    pub fn new(mw: f64) -> Result<Self> {
        if mw.is_finite() && mw >= 0.0 {
            Ok(PowerMw(mw))
        } else {
            Err(Error::domain(format!("power must be finite and >= 0 mW, got {mw}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Power in watts.
    pub fn watts(self) -> f64 {
        self.0 * 1e-3
    }
}

impl std::ops::Add for PowerMw {
    type Output = PowerMw;
    fn add(self, rhs: PowerMw) -> PowerMw {
        PowerMw(self.0 + rhs.0)
    }
}

impl PowerDbm {
    /// A source that is switched off.
    pub const OFF: PowerDbm = PowerDbm(f64::NEG_INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_mw(self) -> PowerMw {
        dbm_to_mw(self)
    }

    /// Subtract a loss in dB.
    pub fn attenuate(self, loss_db: f64) -> PowerDbm {
        PowerDbm(self.0 - loss_db)
    }
}

pub fn dbm_to_mw(p: PowerDbm) -> PowerMw {
    PowerMw(10f64.powf(p.0 / 10.0))
}

/// `0 mW` maps to [`PowerDbm::OFF`].
pub fn mw_to_dbm(p: PowerMw) -> PowerDbm {
    PowerDbm(10.0 * p.0.log10())
}

/// Convert a vacuum wavelength in nm to an optical frequency in GHz.
pub fn wavelength_to_ghz(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength_nm
}

/// Convert an optical frequency in GHz to a vacuum wavelength in nm.
pub fn ghz_to_wavelength(freq_ghz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_ghz
}

/// One classical carrier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub wavelength_nm: f64,
    pub power: PowerDbm,
}

/// Supported fills of the reference comb.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombFill {
    /// 60 channels on the 50 GHz grid.
    Full,
    /// 30 channels on the 100 GHz grid, every other slot of the full comb.
    Half,
}

impl CombFill {
    pub fn from_count(n: usize) -> Result<Self> {
        match n {
            60 => Ok(CombFill::Full),
            30 => Ok(CombFill::Half),
            other => Err(Error::domain(format!(
                "unsupported channel count {other}; the comb is built with 30 or 60 channels"
            ))),
        }
    }

    pub fn channel_count(self) -> usize {
        match self {
            CombFill::Full => COMB_FULL_CHANNELS,
            CombFill::Half => COMB_FULL_CHANNELS / 2,
        }
    }
}

/// A DWDM channel plan.
///
/// Channels are kept sorted by wavelength. The aggregate launch power is
/// fixed at construction so that two combs built for the same total power
/// report bit-identical aggregates regardless of how many channels share it.
#[derive(Clone, Debug, PartialEq)]
pub struct WdmComb {
    channels: Vec<Channel>,
    grid_spacing_ghz: f64,
    service_channels: Vec<Channel>,
    include_service: bool,
    data_total_mw: f64,
}

impl WdmComb {
    /// Build a comb from explicit channels. Wavelengths must be distinct and,
    /// once sorted, sit on a uniform frequency grid of `grid_spacing_ghz`.
    pub fn new(mut channels: Vec<Channel>, grid_spacing_ghz: f64) -> Result<Self> {
        if !(grid_spacing_ghz > 0.0) {
            return Err(Error::domain("grid spacing must be > 0 GHz"));
        }
        for ch in &channels {
            if !(ch.wavelength_nm > 0.0) || !ch.wavelength_nm.is_finite() {
                return Err(Error::domain(format!(
                    "channel wavelength must be positive, got {}",
                    ch.wavelength_nm
                )));
            }
            if ch.power.0.is_nan() || ch.power.0 == f64::INFINITY {
                return Err(Error::domain("channel power must be a number or -inf"));
            }
        }
        channels.sort_by(|a, b| a.wavelength_nm.total_cmp(&b.wavelength_nm));
        for pair in channels.windows(2) {
            if pair[1].wavelength_nm <= pair[0].wavelength_nm {
                return Err(Error::domain(format!(
                    "duplicate channel at {} nm",
                    pair[0].wavelength_nm
                )));
            }
            let df = wavelength_to_ghz(pair[0].wavelength_nm) - wavelength_to_ghz(pair[1].wavelength_nm);
            if (df - grid_spacing_ghz).abs() > GRID_TOLERANCE_GHZ {
                return Err(Error::domain(format!(
                    "channels at {} and {} nm are {df:.3} GHz apart, grid is {grid_spacing_ghz} GHz",
                    pair[0].wavelength_nm, pair[1].wavelength_nm
                )));
            }
        }
        let data_total_mw = channels.iter().map(|c| dbm_to_mw(c.power).0).sum();
        Ok(WdmComb {
            channels,
            grid_spacing_ghz,
            service_channels: Vec::new(),
            include_service: false,
            data_total_mw,
        })
    }

    /// The experimental comb: 60 channels on the ITU 50 GHz grid from
    /// 192.55 to 195.50 THz (1556.96 down to 1533.47 nm), or its 30-channel
    /// 100 GHz half. Per-channel power is uniform and the aggregate equals
    /// `total_power` exactly.
    pub fn reference(fill: CombFill, total_power: PowerDbm) -> Result<Self> {
        if total_power.0.is_nan() || !dbm_to_mw(total_power).0.is_finite() {
            return Err(Error::domain(format!(
                "total comb power must be finite in mW or -inf dBm, got {} dBm",
                total_power.0
            )));
        }
        let n = fill.channel_count();
        let per_channel = PowerDbm(total_power.0 - 10.0 * (n as f64).log10());
        let (start, step) = match fill {
            CombFill::Full => (0, 1),
            // odd slots fall on the 100 GHz grid
            CombFill::Half => (1, 2),
        };
        let channels = (start..COMB_FULL_CHANNELS)
            .step_by(step)
            .map(|slot| {
                let f_ghz = COMB_LOW_THZ * 1e3 + slot as f64 * COMB_GRID_GHZ;
                Channel {
                    wavelength_nm: ghz_to_wavelength(f_ghz),
                    power: per_channel,
                }
            })
            .collect();
        let mut comb = WdmComb::new(channels, COMB_GRID_GHZ * step as f64)?;
        comb.data_total_mw = dbm_to_mw(total_power).0;
        Ok(comb)
    }

    /// A comb with every channel switched off.
    pub fn dark(fill: CombFill) -> Result<Self> {
        WdmComb::reference(fill, PowerDbm::OFF)
    }

    /// Attach the two supervisory channels (ITU C59 and C60). They count
    /// toward the aggregate only when `include` is set.
    pub fn with_service_channels(mut self, power: PowerDbm, include: bool) -> Self {
        self.service_channels = [195.9e3, 196.0e3]
            .iter()
            .map(|&f| Channel {
                wavelength_nm: ghz_to_wavelength(f),
                power,
            })
            .collect();
        self.include_service = include;
        self
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn service_channels(&self) -> &[Channel] {
        &self.service_channels
    }

    pub fn grid_spacing_ghz(&self) -> f64 {
        self.grid_spacing_ghz
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Channel center frequencies in GHz, in wavelength order.
    pub fn frequencies_ghz(&self) -> Vec<f64> {
        self.channels
            .iter()
            .map(|c| wavelength_to_ghz(c.wavelength_nm))
            .collect()
    }

    /// Total launched classical power in mW.
    pub fn aggregate_mw(&self) -> Result<PowerMw> {
        if self.channels.is_empty() {
            return Err(Error::domain("aggregate power of an empty comb"));
        }
        let service: f64 = if self.include_service {
            self.service_channels.iter().map(|c| dbm_to_mw(c.power).0).sum()
        } else {
            0.0
        };
        Ok(PowerMw(self.data_total_mw + service))
    }

    pub fn aggregate_power(&self) -> Result<PowerDbm> {
        self.aggregate_mw().map(mw_to_dbm)
    }

    /// Power-weighted mean wavelength; the plain mean when the comb is dark.
    pub fn centroid_nm(&self) -> Result<f64> {
        if self.channels.is_empty() {
            return Err(Error::domain("centroid of an empty comb"));
        }
        let weights: Vec<f64> = self.channels.iter().map(|c| dbm_to_mw(c.power).0).collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            Ok(self
                .channels
                .iter()
                .zip(&weights)
                .map(|(c, w)| c.wavelength_nm * w)
                .sum::<f64>()
                / total)
        } else {
            Ok(self.channels.iter().map(|c| c.wavelength_nm).sum::<f64>() / self.channels.len() as f64)
        }
    }
}

/// Convenience form of [`WdmComb::reference`] taking a channel count.
pub fn build_reference_comb(n_channels: usize, total_power: PowerDbm) -> Result<WdmComb> {
    WdmComb::reference(CombFill::from_count(n_channels)?, total_power)
}

/// Wavelength band a loss figure applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Classical,
    Quantum,
}

/// Fiber attenuation versus wavelength, linearly interpolated between knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct AttenuationTable {
    knots: Vec<(f64, f64)>,
}

impl AttenuationTable {
    /// `knots` are `(wavelength nm, alpha dB/km)` pairs with strictly
    /// increasing wavelength, alpha in (0, 1), spanning 1260 to 1625 nm.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::domain("attenuation table needs at least two knots"));
        }
        for pair in knots.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::domain("attenuation table wavelengths must strictly increase"));
            }
        }
        if let Some(&(wl, alpha)) = knots.iter().find(|(_, a)| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::domain(format!(
                "attenuation at {wl} nm is {alpha} dB/km, must be in (0, 1)"
            )));
        }
        if knots[0].0 > TABLE_MIN_NM || knots[knots.len() - 1].0 < TABLE_MAX_NM {
            return Err(Error::domain(format!(
                "attenuation table must cover {TABLE_MIN_NM} to {TABLE_MAX_NM} nm"
            )));
        }
        Ok(AttenuationTable { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn range_nm(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    /// Interpolated attenuation in dB/km.
    pub fn at(&self, wavelength_nm: f64) -> Result<f64> {
        let (lo, hi) = self.range_nm();
        if !(wavelength_nm >= lo && wavelength_nm <= hi) {
            return Err(Error::domain(format!(
                "wavelength {wavelength_nm} nm outside attenuation table [{lo}, {hi}] nm"
            )));
        }
        let idx = self.knots.partition_point(|&(wl, _)| wl <= wavelength_nm);
        if idx == 0 {
            return Ok(self.knots[0].1);
        }
        let (w0, a0) = self.knots[idx - 1];
        if idx == self.knots.len() || w0 == wavelength_nm {
            return Ok(a0);
        }
        let (w1, a1) = self.knots[idx];
        let t = (wavelength_nm - w0) / (w1 - w0);
        Ok(a0 + (a1 - a0) * t)
    }
}

impl Default for AttenuationTable {
    /// Standard single-mode fiber: 0.33 dB/km in the O-band at 1310 nm,
    /// flat 0.20 dB/km across the C-band.
    fn default() -> Self {
        AttenuationTable {
            knots: vec![
                (1260.0, 0.36),
                (1310.0, 0.33),
                (1400.0, 0.27),
                (1500.0, 0.21),
                (1530.0, 0.20),
                (1565.0, 0.20),
                (1625.0, 0.22),
            ],
        }
    }
}

impl TryFrom<Vec<[f64; 2]>> for AttenuationTable {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        AttenuationTable::new(v.into_iter().map(|[w, a]| (w, a)).collect())
    }
}

impl From<AttenuationTable> for Vec<[f64; 2]> {
    fn from(t: AttenuationTable) -> Self {
        t.knots.into_iter().map(|(w, a)| [w, a]).collect()
    }
}

/// A single fiber span between the QKD transmitter and receiver ports.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberLink {
    pub length_km: f64,
    pub attenuation: AttenuationTable,
    /// Lumped connector/mux loss seen by the classical band, dB.
    pub fixed_loss_classical_db: f64,
    /// Lumped connector/mux loss seen by the quantum channel, dB.
    pub fixed_loss_quantum_db: f64,
}

impl FiberLink {
    pub const DEFAULT_FIXED_LOSS_CLASSICAL_DB: f64 = 3.5;
    pub const DEFAULT_FIXED_LOSS_QUANTUM_DB: f64 = 2.6;

    pub fn new(length_km: f64) -> Result<Self> {
        FiberLink {
            length_km,
            ..FiberLink::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.length_km >= 0.0) || !self.length_km.is_finite() {
            return Err(Error::domain(format!(
                "link length must be >= 0 km, got {}",
                self.length_km
            )));
        }
        for (name, v) in [
            ("classical", self.fixed_loss_classical_db),
            ("quantum", self.fixed_loss_quantum_db),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} fixed loss must be >= 0 dB, got {v}")));
            }
        }
        Ok(self)
    }

    pub fn with_length(&self, length_km: f64) -> Result<Self> {
        FiberLink {
            length_km,
            ..self.clone()
        }
        .validated()
    }

    pub fn attenuation_at(&self, wavelength_nm: f64) -> Result<f64> {
        self.attenuation.at(wavelength_nm)
    }

    pub fn fixed_loss(&self, band: Band) -> f64 {
        match band {
            Band::Classical => self.fixed_loss_classical_db,
            Band::Quantum => self.fixed_loss_quantum_db,
        }
    }

    /// Fiber attenuation plus the band's lumped loss, dB.
    pub fn end_to_end_loss(&self, wavelength_nm: f64, band: Band) -> Result<f64> {
        Ok(self.length_km * self.attenuation_at(wavelength_nm)? + self.fixed_loss(band))
    }

    /// Power transmittance of the quantum path, linear.
    pub fn transmittance(&self, wavelength_nm: f64, band: Band) -> Result<f64> {
        Ok(10f64.powf(-self.end_to_end_loss(wavelength_nm, band)? / 10.0))
    }
}

impl Default for FiberLink {
    fn default() -> Self {
        FiberLink {
            length_km: 50.0,
            attenuation: AttenuationTable::default(),
            fixed_loss_classical_db: Self::DEFAULT_FIXED_LOSS_CLASSICAL_DB,
            fixed_loss_quantum_db: Self::DEFAULT_FIXED_LOSS_QUANTUM_DB,
        }
    }
}

/// Power launched into the fiber given the power at the auxiliary input.
pub fn fiber_input_power(aux_rx_power: PowerDbm, insertion_loss_db: f64) -> PowerDbm {
    aux_rx_power.attenuate(insertion_loss_db)
}

/// Convert an attenuation in dB/km to a natural-log coefficient in 1/km.
pub fn db_per_km_to_natural(alpha_db_km: f64) -> f64 {
    alpha_db_km * std::f64::consts::LN_10 / 10.0
}
