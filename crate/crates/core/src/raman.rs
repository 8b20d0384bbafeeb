//! Spontaneous Raman noise generated by the classical comb inside the
//! quantum channel's filter passband, and its conversion to detector counts.
//!
//! The comb is treated as a single pump of total power `P0`. With natural
//! attenuation coefficients `a_p` (pump) and `a_q` (quantum band), the
//! noise power reaching the far end of a span of length `L` is
//!
//! ```text
//! forward:  P0·β·Δλ · e^(−a_q·L) · (e^((a_q−a_p)·L) − 1) / (a_q − a_p)
//! backward: P0·β·Δλ · (1 − e^(−(a_p+a_q)·L)) / (a_p + a_q)
//! ```
//!
//! where `β` is the effective scattering coefficient per km per nm of
//! filter bandwidth `Δλ`. Only total pump power enters; the channel count
//! never does.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{db_per_km_to_natural, PowerMw, SPEED_OF_LIGHT};

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamanParams {
    /// Effective scattering coefficient, 1/(km·nm).
    pub beta_per_km_nm: f64,
    pub filter_bandwidth_nm: f64,
    pub alpha_pump_db_km: f64,
    pub alpha_quantum_db_km: f64,
}

impl RamanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_per_km_nm >= 0.0) || !self.beta_per_km_nm.is_finite() {
            return Err(Error::domain(format!("beta must be >= 0, got {}", self.beta_per_km_nm)));
        }
        if !(self.filter_bandwidth_nm > 0.0) || !self.filter_bandwidth_nm.is_finite() {
            return Err(Error::domain(format!(
                "filter bandwidth must be > 0 nm, got {}",
                self.filter_bandwidth_nm
            )));
        }
        for (name, a) in [("pump", self.alpha_pump_db_km), ("quantum", self.alpha_quantum_db_km)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::domain(format!("{name} attenuation {a} dB/km outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// Noise power per unit pump power per km, before fiber attenuation.
    fn source_strength(&self) -> f64 {
        self.beta_per_km_nm * self.filter_bandwidth_nm
    }
}

fn check_length(length_km: f64) -> Result<()> {
    if length_km >= 0.0 && !length_km.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!("fiber length must be >= 0 km, got {length_km}")))
    }
}

/// Raman noise co-propagating with the pump, at the far end of the span.
pub fn forward_raman_power(pump_in: PowerMw, length_km: f64, params: &RamanParams) -> Result<PowerMw> {
    check_length(length_km)?;
    params.validate()?;
    if length_km == 0.0 {
        return Ok(PowerMw::ZERO);
    }
    let a_p = db_per_km_to_natural(params.alpha_pump_db_km);
    let a_q = db_per_km_to_natural(params.alpha_quantum_db_km);
    let d = a_q - a_p;
    // (e^(dL) - 1)/d, continuous through d = 0
    let growth = if d == 0.0 {
        length_km
    } else {
        (d * length_km).exp_m1() / d
    };
    let p = pump_in.value() * params.source_strength() * (-a_q * length_km).exp() * growth;
    PowerMw::new(p.max(0.0))
}

/// Raman noise scattered back toward the pump's launch end.
pub fn backward_raman_power(pump_in: PowerMw, length_km: f64, params: &RamanParams) -> Result<PowerMw> {
    check_length(length_km)?;
    params.validate()?;
    let s = db_per_km_to_natural(params.alpha_pump_db_km) + db_per_km_to_natural(params.alpha_quantum_db_km);
    let p = pump_in.value() * params.source_strength() * -(-s * length_km).exp_m1() / s;
    PowerMw::new(p.max(0.0))
}

/// Out-of-band classical light that gets through the receiver filter.
pub fn leakage_power(classical_at_receiver: PowerMw, extinction: f64) -> Result<PowerMw> {
    if !(0.0..=1.0).contains(&extinction) {
        return Err(Error::domain(format!(
            "filter leakage factor must be in [0, 1], got {extinction}"
        )));
    }
    PowerMw::new(classical_at_receiver.value() * extinction)
}

/// Photon energy `h·c/λ` in joules.
pub fn photon_energy(wavelength_nm: f64) -> Result<f64> {
    if !(wavelength_nm > 0.0) || !wavelength_nm.is_finite() {
        return Err(Error::domain(format!("wavelength must be > 0 nm, got {wavelength_nm}")));
    }
    Ok(PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9))
}

/// Photons per second carried by `noise_power` at `wavelength_nm`.
pub fn noise_photon_rate(noise_power: PowerMw, wavelength_nm: f64) -> Result<f64> {
    Ok(noise_power.watts() / photon_energy(wavelength_nm)?)
}

/// Expected noise clicks per detector gate. Noise is uniform in time, so only
/// the fraction of photons arriving inside a gate can click.
pub fn noise_per_gate(rate: f64, gate_width_s: f64, gate_rate_hz: f64, detector_efficiency: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(Error::domain(format!("photon rate must be >= 0, got {rate}")));
    }
    if !(gate_width_s > 0.0) || !(gate_rate_hz > 0.0) {
        return Err(Error::domain("gate width and gate rate must be > 0"));
    }
    let duty = gate_width_s * gate_rate_hz;
    // allow the ungated limit gate_width = 1/gate_rate through rounding
    if duty > 1.0 + 1e-12 {
        return Err(Error::domain(format!("gate duty factor {duty} exceeds 1")));
    }
    if !(0.0..=1.0).contains(&detector_efficiency) {
        return Err(Error::domain(format!(
            "detector efficiency must be in [0, 1], got {detector_efficiency}"
        )));
    }
    Ok(rate * gate_width_s * detector_efficiency)
}

/// Noise contributions at the quantum receiver for one operating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub forward_raman: PowerMw,
    pub backward_raman: PowerMw,
    pub leakage: PowerMw,
    /// Noise photons per second inside the receiver passband.
    pub photon_rate: f64,
}

impl NoiseBudget {
    pub fn new(forward_raman: PowerMw, backward_raman: PowerMw, leakage: PowerMw, wavelength_nm: f64) -> Result<Self> {
        let total = forward_raman + backward_raman + leakage;
        Ok(NoiseBudget {
            forward_raman,
            backward_raman,
            leakage,
            photon_rate: noise_photon_rate(total, wavelength_nm)?,
        })
    }

    pub fn total(&self) -> PowerMw {
        self.forward_raman + self.backward_raman + self.leakage
    }
}
