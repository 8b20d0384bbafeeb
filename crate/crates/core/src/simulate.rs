//! End-to-end evaluation of one operating point: link budget, Raman noise,
//! detection statistics, decoy bounds, key rate and co-propagation efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{dbm_to_mw, mw_to_dbm, Band, FiberLink, PowerDbm, PowerMw, WdmComb};
use crate::qkd::{
    decoy_bounds, observe, secure_key_rate, ChannelStats, DetectorParams, Diagnostics, KeyRateResult, ProtocolParams,
};
use crate::raman::{
    backward_raman_power, forward_raman_power, leakage_power, noise_per_gate, NoiseBudget, RamanParams,
};

/// Quantum channel wavelength, nm.
pub const QUANTUM_WAVELENGTH_NM: f64 = 1310.0;
/// Wavelength at which the classical-band loss is reported, nm.
pub const CLASSICAL_REFERENCE_NM: f64 = 1550.0;

/// Published CE of the earlier terabit co-propagation experiment
/// (Wang et al., Phys. Rev. A 95, 012301, 2017), Mb/s·mW·km.
/// Quoted for comparison; not recomputed.
pub const PRIOR_WORK_CE: f64 = 9.3;

/// Which end of the link the classical comb is launched from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedDirection {
    /// Comb launched at the QKD transmitter, co-propagating with the quantum signal.
    #[default]
    Forward,
    /// Comb launched at the QKD receiver, counter-propagating.
    Backward,
}

/// Raman and receiver-filter settings that are independent of the link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    /// Effective scattering coefficient, 1/(km·nm). Fitted.
    pub beta_per_km_nm: f64,
    pub filter_bandwidth_nm: f64,
    /// Fraction of classical power at the receiver leaking through the filter.
    #[serde(default)]
    pub leakage_extinction: f64,
    #[serde(default)]
    pub feed: FeedDirection,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        NoiseSettings {
            beta_per_km_nm: 3e-12,
            filter_bandwidth_nm: 1.0,
            leakage_extinction: 0.0,
            feed: FeedDirection::Forward,
        }
    }
}

/// Everything about the QKD system that is not the fiber or the comb.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub protocol: ProtocolParams,
    pub detector: DetectorParams,
    pub noise: NoiseSettings,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        self.detector.validate()?;
        if !(self.noise.beta_per_km_nm >= 0.0) || !(self.noise.filter_bandwidth_nm > 0.0) {
            return Err(Error::domain("raman beta must be >= 0 and filter bandwidth > 0"));
        }
        if !(0.0..=1.0).contains(&self.noise.leakage_extinction) {
            return Err(Error::domain("leakage extinction must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Predicted observables for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoexistenceResult {
    pub length_km: f64,
    /// Aggregate classical power launched into the fiber.
    pub p_wdm: PowerDbm,
    /// Data channels carrying power; 0 for a dark comb.
    pub n_channels: usize,
    pub skr_bps: f64,
    /// QBER of the signal state.
    pub qber: f64,
    pub noise: NoiseBudget,
    pub loss_quantum_db: f64,
    pub loss_classical_db: f64,
    pub stats: ChannelStats,
    pub key: KeyRateResult,
    /// Co-propagation efficiency, Mb/s·mW·km.
    pub ce: f64,
    pub flags: Diagnostics,
}

impl CoexistenceResult {
    pub fn secure(&self) -> bool {
        self.key.secure
    }
}

/// Co-propagation efficiency: key rate (Mb/s) × classical power (mW) × length (km).
pub fn compute_ce(skr_bps: f64, p_wdm: PowerDbm, length_km: f64) -> Result<f64> {
    compute_ce_mw(skr_bps, dbm_to_mw(p_wdm), length_km)
}

pub fn compute_ce_mw(skr_bps: f64, p_wdm: PowerMw, length_km: f64) -> Result<f64> {
    if !(skr_bps >= 0.0) || !(length_km >= 0.0) {
        return Err(Error::domain(format!(
            "CE needs non-negative key rate and length, got {skr_bps} bit/s, {length_km} km"
        )));
    }
    Ok(skr_bps / 1e6 * p_wdm.value() * length_km)
}

/// Human-readable CE line with the prior-work comparison.
pub fn ce_report(skr_bps: f64, p_wdm: PowerDbm, length_km: f64) -> Result<String> {
    let ce = compute_ce(skr_bps, p_wdm, length_km)?;
    Ok(format!(
        "CE = {ce:.1} Mb/s·mW·km  ({:.3} Mb/s × {:.2} mW × {length_km} km)\n\
         prior work: {PRIOR_WORK_CE} Mb/s·mW·km, ratio {:.1}\n",
        skr_bps / 1e6,
        dbm_to_mw(p_wdm).value(),
        ce / PRIOR_WORK_CE
    ))
}

/// Evaluate one operating point. The comb enters only through its
/// aggregate launch power and its centroid (for pump attenuation).
pub fn simulate_point(link: &FiberLink, comb: &WdmComb, params: &SystemParams) -> Result<CoexistenceResult> {
    params.validate()?;
    let loss_quantum_db = link.end_to_end_loss(QUANTUM_WAVELENGTH_NM, Band::Quantum)?;
    let loss_classical_db = link.end_to_end_loss(CLASSICAL_REFERENCE_NM, Band::Classical)?;
    let transmittance = 10f64.powf(-loss_quantum_db / 10.0);
    if !(transmittance > 0.0) {
        return Err(Error::Numeric(format!(
            "quantum transmittance underflows at {loss_quantum_db:.1} dB ({} km)",
            link.length_km
        )));
    }

    let pump = comb.aggregate_mw()?;
    let raman = RamanParams {
        beta_per_km_nm: params.noise.beta_per_km_nm,
        filter_bandwidth_nm: params.noise.filter_bandwidth_nm,
        alpha_pump_db_km: link.attenuation_at(comb.centroid_nm()?)?,
        alpha_quantum_db_km: link.attenuation_at(QUANTUM_WAVELENGTH_NM)?,
    };
    let (forward, backward, classical_at_rx) = match params.noise.feed {
        FeedDirection::Forward => (
            forward_raman_power(pump, link.length_km, &raman)?,
            PowerMw::ZERO,
            PowerMw::new(pump.value() * 10f64.powf(-loss_classical_db / 10.0))?,
        ),
        FeedDirection::Backward => (PowerMw::ZERO, backward_raman_power(pump, link.length_km, &raman)?, pump),
    };
    let leakage = leakage_power(classical_at_rx, params.noise.leakage_extinction)?;
    let noise = NoiseBudget::new(forward, backward, leakage, QUANTUM_WAVELENGTH_NM)?;
    let npg = noise_per_gate(
        noise.photon_rate,
        params.detector.gate_width_s,
        params.protocol.pulse_rate_hz,
        params.detector.efficiency,
    )?;

    let (stats, obs_flags) = observe(transmittance, &params.protocol, &params.detector, npg)?;
    let bounds = decoy_bounds(&stats, &params.protocol)?;
    let key = secure_key_rate(&stats, &bounds, &params.protocol);
    if !key.skr_bps.is_finite() || !stats.e_mu.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite result at L={} km, P={} mW",
            link.length_km,
            pump.value()
        )));
    }
    let ce = compute_ce_mw(key.skr_bps, pump, link.length_km)?;
    if !ce.is_finite() {
        return Err(Error::Numeric(format!("non-finite CE at L={} km", link.length_km)));
    }
    Ok(CoexistenceResult {
        length_km: link.length_km,
        p_wdm: mw_to_dbm(pump),
        n_channels: if pump.value() > 0.0 { comb.len() } else { 0 },
        skr_bps: key.skr_bps,
        qber: stats.e_mu,
        noise,
        loss_quantum_db,
        loss_classical_db,
        stats,
        key,
        ce,
        flags: obs_flags.merge(key.flags),
    })
}
