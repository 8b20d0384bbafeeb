//! Decoy-state BB84 statistics: detection gains, QBER, weak+vacuum decoy
//! bounds on the single-photon contribution, and the asymptotic key rate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Error rate assigned to background (vacuum) clicks.
pub const VACUUM_ERROR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    /// Signal mean photon number.
    pub mu: f64,
    /// Weak decoy mean photon number.
    pub nu: f64,
    pub pulse_rate_hz: f64,
    /// Probability of choosing the majority basis (same on both sides).
    pub basis_bias: f64,
    /// Error-correction inefficiency.
    pub f_ec: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            mu: 0.4,
            nu: 0.1,
            pulse_rate_hz: 1e9,
            basis_bias: 0.9,
            f_ec: 1.16,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < self.mu) || !self.mu.is_finite() {
            return Err(Error::domain(format!(
                "intensities need 0 < nu < mu, got mu={} nu={}",
                self.mu, self.nu
            )));
        }
        if !(0.5..1.0).contains(&self.basis_bias) {
            return Err(Error::domain(format!(
                "basis bias {} outside [0.5, 1)",
                self.basis_bias
            )));
        }
        if !(self.pulse_rate_hz > 0.0) || !self.pulse_rate_hz.is_finite() {
            return Err(Error::domain("pulse rate must be > 0"));
        }
        if !(self.f_ec >= 1.0) || !self.f_ec.is_finite() {
            return Err(Error::domain(format!("f_ec must be >= 1, got {}", self.f_ec)));
        }
        Ok(())
    }

    /// Fraction of detections kept after basis reconciliation.
    pub fn sift_factor(&self) -> f64 {
        self.basis_bias * self.basis_bias
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    pub efficiency: f64,
    /// Dark-click probability per gate.
    pub dark_prob: f64,
    /// Optical misalignment error probability.
    pub misalignment_error: f64,
    pub gate_width_s: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            efficiency: 0.20,
            dark_prob: 1e-5,
            misalignment_error: 0.025,
            gate_width_s: 100e-12,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v, hi) in [
            ("efficiency", self.efficiency, 1.0),
            ("dark_prob", self.dark_prob, 1.0),
            ("misalignment_error", self.misalignment_error, 0.5),
        ] {
            if !(0.0..=hi).contains(&v) {
                return Err(Error::domain(format!("detector {name} = {v} outside [0, {hi}]")));
            }
        }
        if !(self.gate_width_s > 0.0) {
            return Err(Error::domain("gate width must be > 0"));
        }
        Ok(())
    }
}

/// Clamp diagnostics raised while evaluating one operating point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Background click probability exceeded 1.
    pub background_clamped: bool,
    /// Single-photon yield bound left [0, 1].
    pub y1_clamped: bool,
    /// Single-photon error bound left [0, 0.5].
    pub e1_clamped: bool,
    /// Key rate formula was negative.
    pub rate_clamped: bool,
}

impl Diagnostics {
    pub fn any(&self) -> bool {
        self.background_clamped || self.y1_clamped || self.e1_clamped || self.rate_clamped
    }

    pub fn merge(self, other: Diagnostics) -> Diagnostics {
        Diagnostics {
            background_clamped: self.background_clamped || other.background_clamped,
            y1_clamped: self.y1_clamped || other.y1_clamped,
            e1_clamped: self.e1_clamped || other.e1_clamped,
            rate_clamped: self.rate_clamped || other.rate_clamped,
        }
    }

    /// Parse the `|`-joined form produced by `Display`.
    pub fn parse(s: &str) -> Result<Diagnostics> {
        let mut d = Diagnostics::default();
        for tok in s.split('|').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "background_clamped" => d.background_clamped = true,
                "y1_clamped" => d.y1_clamped = true,
                "e1_clamped" => d.e1_clamped = true,
                "rate_clamped" => d.rate_clamped = true,
                other => return Err(Error::domain(format!("unknown diagnostic flag `{other}`"))),
            }
        }
        Ok(d)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = [
            (self.background_clamped, "background_clamped"),
            (self.y1_clamped, "y1_clamped"),
            (self.e1_clamped, "e1_clamped"),
            (self.rate_clamped, "rate_clamped"),
        ];
        let set: Vec<&str> = names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect();
        f.write_str(&set.join("|"))
    }
}

/// Gain and QBER of one intensity class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Detection {
    pub gain: f64,
    pub qber: f64,
    /// Background click probability per gate (dark + noise).
    pub y0: f64,
    pub background_clamped: bool,
}

/// Observables for signal and decoy intensities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelStats {
    pub q_mu: f64,
    pub q_nu: f64,
    pub e_mu: f64,
    pub e_nu: f64,
    pub y0: f64,
    pub noise_per_gate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecoyBounds {
    pub y1_lower: f64,
    pub e1_upper: f64,
    pub flags: Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyRateResult {
    pub skr_bps: f64,
    /// Lower bound on the single-photon gain of the signal state.
    pub q1_lower: f64,
    pub e1_upper: f64,
    pub secure: bool,
    pub flags: Diagnostics,
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("entropy argument {p} outside [0, 1]")));
    }
    Ok(binary_entropy(p))
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Poissonian-source detection model for one intensity.
///
/// Background clicks (dark + noise) fire independently of the signal:
/// `Q = 1 − (1 − y0)·e^(−η·μ)`, and errors are half the background plus
/// the misaligned fraction of signal clicks.
pub fn channel_stats(
    intensity: f64,
    transmittance: f64,
    det: &DetectorParams,
    noise_per_gate: f64,
) -> Result<Detection> {
    if !(transmittance > 0.0 && transmittance <= 1.0) {
        return Err(Error::domain(format!("transmittance {transmittance} outside (0, 1]")));
    }
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(Error::domain(format!("intensity must be >= 0, got {intensity}")));
    }
    if !(noise_per_gate >= 0.0) {
        return Err(Error::domain(format!(
            "noise per gate must be >= 0, got {noise_per_gate}"
        )));
    }
    det.validate()?;
    let raw_y0 = det.dark_prob + noise_per_gate;
    let y0 = raw_y0.min(1.0);
    let eta = transmittance * det.efficiency;
    let gain = 1.0 - (1.0 - y0) * (-eta * intensity).exp();
    let qber = if gain > 0.0 {
        (VACUUM_ERROR * y0 + det.misalignment_error * (gain - y0)) / gain
    } else {
        VACUUM_ERROR
    };
    Ok(Detection {
        gain,
        qber,
        y0,
        background_clamped: raw_y0 > 1.0,
    })
}

/// Weak+vacuum decoy analytic bounds on the single-photon yield and error.
pub fn decoy_bounds(stats: &ChannelStats, proto: &ProtocolParams) -> Result<DecoyBounds> {
    let (mu, nu) = (proto.mu, proto.nu);
    if !(nu > 0.0 && nu < mu) {
        return Err(Error::domain(format!(
            "decoy bounds need 0 < nu < mu, got mu={mu} nu={nu}"
        )));
    }
    let mut flags = Diagnostics::default();
    let mu2 = mu * mu;
    let raw_y1 = mu / (mu * nu - nu * nu)
        * (stats.q_nu * nu.exp() - stats.q_mu * mu.exp() * nu * nu / mu2 - (mu2 - nu * nu) / mu2 * stats.y0);
    let y1_lower = if raw_y1.is_nan() {
        flags.y1_clamped = true;
        0.0
    } else {
        if !(0.0..=1.0).contains(&raw_y1) {
            flags.y1_clamped = true;
        }
        raw_y1.clamp(0.0, 1.0)
    };

    let e1_upper = if y1_lower > 0.0 {
        let raw = (stats.e_nu * stats.q_nu * nu.exp() - VACUUM_ERROR * stats.y0) / (y1_lower * nu);
        if !(0.0..=0.5).contains(&raw) {
            flags.e1_clamped = true;
        }
        raw.clamp(0.0, 0.5)
    } else {
        // nothing certified about single photons; assume the worst
        flags.e1_clamped = true;
        0.5
    };
    Ok(DecoyBounds {
        y1_lower,
        e1_upper,
        flags,
    })
}

/// Asymptotic GLLP key rate for efficient (biased-basis) BB84, bit/s.
pub fn secure_key_rate(stats: &ChannelStats, bounds: &DecoyBounds, proto: &ProtocolParams) -> KeyRateResult {
    let mu = proto.mu;
    let q1_lower = bounds.y1_lower * mu * (-mu).exp();
    let e_mu = stats.e_mu.clamp(0.0, 1.0);
    let per_pulse = q1_lower * (1.0 - binary_entropy(bounds.e1_upper)) - proto.f_ec * stats.q_mu * binary_entropy(e_mu);
    let raw = proto.pulse_rate_hz * proto.sift_factor() * per_pulse;
    let mut flags = bounds.flags;
    let skr_bps = if raw > 0.0 {
        raw
    } else {
        flags.rate_clamped = raw < 0.0;
        0.0
    };
    KeyRateResult {
        skr_bps,
        q1_lower,
        e1_upper: bounds.e1_upper,
        secure: skr_bps > 0.0,
        flags,
    }
}

/// Build signal and decoy observables for one channel.
pub fn observe(
    transmittance: f64,
    proto: &ProtocolParams,
    det: &DetectorParams,
    noise_per_gate: f64,
) -> Result<(ChannelStats, Diagnostics)> {
    let sig = channel_stats(proto.mu, transmittance, det, noise_per_gate)?;
    let dec = channel_stats(proto.nu, transmittance, det, noise_per_gate)?;
    let flags = Diagnostics {
        background_clamped: sig.background_clamped,
        ..Diagnostics::default()
    };
    Ok((
        ChannelStats {
            q_mu: sig.gain,
            q_nu: dec.gain,
            e_mu: sig.qber,
            e_nu: dec.qber,
            y0: sig.y0,
            noise_per_gate,
        },
        flags,
    ))
}
