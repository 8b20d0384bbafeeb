//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::LN_10;
use std::path::Path;

use qkd_coexistence::calibration::{Anchor, AnchorComb};
use qkd_coexistence::qkd::{ChannelStats, ProtocolParams, VACUUM_ERROR};
use qkd_coexistence::raman::RamanParams;
use qkd_coexistence::scenario::ScenarioConfig;
use qkd_coexistence::{DetectorParams, NoiseSettings, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

pub fn cfg(text: &str) -> ScenarioConfig {
    ScenarioConfig::parse(text, Path::new("inline.toml")).expect("test config parses")
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn rk4(mut y: f64, z0: f64, z1: f64, steps: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = (z1 - z0) / steps as f64;
    for i in 0..steps {
        let z = z0 + i as f64 * h;
        let k1 = f(z, y);
        let k2 = f(z + h / 2.0, y + h / 2.0 * k1);
        let k3 = f(z + h / 2.0, y + h / 2.0 * k2);
        let k4 = f(z + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

/// Forward Raman power from the propagation ODE
/// `dP/dz = β·Δλ·P_pump(z) − a_q·P`, integrated from 0 to L.
pub fn raman_forward_ode(p0_mw: f64, length_km: f64, p: &RamanParams) -> f64 {
    let a_p = p.alpha_pump_db_km * LN_10 / 10.0;
    let a_q = p.alpha_quantum_db_km * LN_10 / 10.0;
    let k = p.beta_per_km_nm * p.filter_bandwidth_nm * p0_mw;
    rk4(0.0, 0.0, length_km, 100_000, |z, y| k * (-a_p * z).exp() - a_q * y)
}

/// Backscattered power at z = 0: integrate `dP/dz = −β·Δλ·P_pump(z) + a_q·P`
/// from z = L (where it vanishes) back to 0.
pub fn raman_backward_ode(p0_mw: f64, length_km: f64, p: &RamanParams) -> f64 {
    let a_p = p.alpha_pump_db_km * LN_10 / 10.0;
    let a_q = p.alpha_quantum_db_km * LN_10 / 10.0;
    let k = p.beta_per_km_nm * p.filter_bandwidth_nm * p0_mw;
    rk4(0.0, length_km, 0.0, 100_000, |z, y| -k * (-a_p * z).exp() + a_q * y)
}

/// Pulse-by-pulse click simulation: Poisson photon number, binomial survival
/// with overall efficiency `eta`, independent background click with `y0`.
pub fn monte_carlo_gain(mu: f64, eta: f64, y0: f64, pulses: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let photons = Poisson::new(mu).unwrap();
    let mut clicks = 0u64;
    for _ in 0..pulses {
        let n = photons.sample(&mut rng) as u64;
        let survived = n > 0 && Binomial::new(n, eta).unwrap().sample(&mut rng) > 0;
        let background = rng.random::<f64>() < y0;
        if survived || background {
            clicks += 1;
        }
    }
    clicks as f64 / pulses as f64
}

pub struct GainCheck {
    pub mc: f64,
    pub model: f64,
    pub std_err: f64,
}

/// Five random parameter draws compared against a 1e7-pulse simulation.
pub fn gain_checks(seed: u64) -> Vec<GainCheck> {
    let mut draw = ChaCha8Rng::seed_from_u64(seed);
    let pulses = 10_000_000u64;
    (0..5)
        .map(|i| {
            let mu = draw.random_range(0.05..0.9);
            let t = draw.random_range(0.01..0.8);
            let det = DetectorParams {
                efficiency: draw.random_range(0.1..0.6),
                dark_prob: draw.random_range(1e-7..1e-3),
                misalignment_error: 0.02,
                gate_width_s: 1e-10,
            };
            let noise = draw.random_range(0.0..1e-3);
            let model = qkd_coexistence::qkd::channel_stats(mu, t, &det, noise).unwrap().gain;
            let mc = monte_carlo_gain(mu, t * det.efficiency, det.dark_prob + noise, pulses, seed * 100 + i);
            GainCheck {
                mc,
                model,
                std_err: (model * (1.0 - model) / pulses as f64).sqrt(),
            }
        })
        .collect()
}

fn poisson_pmf(n: usize, mean: f64) -> f64 {
    (1..=n).fold((-mean).exp(), |p, k| p * mean / k as f64)
}

/// A channel with arbitrary photon-number yields and error rates, observed
/// through signal/decoy/vacuum intensities. Returns the observables and the
/// true single-photon yield and error.
pub fn synthetic_channel(rng: &mut ChaCha8Rng) -> (ChannelStats, ProtocolParams, f64, f64) {
    let mu = rng.random_range(0.1..1.0);
    let nu = rng.random_range(0.01..0.95) * mu;
    let y0 = rng.random_range(0.0..1e-2);
    let mut yields = vec![y0];
    let mut errors = vec![VACUUM_ERROR];
    for _ in 1..=50 {
        yields.push(rng.random_range(0.0..1.0));
        errors.push(rng.random_range(0.0..0.5));
    }
    let gain = |m: f64| (0..=50).map(|n| poisson_pmf(n, m) * yields[n]).sum::<f64>();
    let err = |m: f64| (0..=50).map(|n| poisson_pmf(n, m) * yields[n] * errors[n]).sum::<f64>();
    let stats = ChannelStats {
        q_mu: gain(mu),
        q_nu: gain(nu),
        e_mu: err(mu) / gain(mu),
        e_nu: err(nu) / gain(nu),
        y0,
        noise_per_gate: 0.0,
    };
    let proto = ProtocolParams {
        mu,
        nu,
        ..ProtocolParams::default()
    };
    (stats, proto, yields[1], errors[1])
}

/// Count channels where the decoy bounds are not conservative.
pub fn decoy_violations(n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .filter(|_| {
            let (stats, proto, y1, e1) = synthetic_channel(&mut rng);
            let b = qkd_coexistence::qkd::decoy_bounds(&stats, &proto).unwrap();
            b.y1_lower > y1 + 1e-12 || b.e1_upper + 1e-12 < e1
        })
        .count()
}

/// Interior parameter set used as ground truth for synthetic calibration.
pub fn known_params() -> SystemParams {
    SystemParams {
        protocol: ProtocolParams {
            mu: 0.45,
            nu: 0.08,
            ..ProtocolParams::default()
        },
        detector: DetectorParams {
            efficiency: 0.22,
            dark_prob: 2e-6,
            misalignment_error: 0.02,
            gate_width_s: 1e-10,
        },
        noise: NoiseSettings {
            beta_per_km_nm: 2.5e-12,
            ..NoiseSettings::default()
        },
    }
}

/// The measured configurations plus a 70 km point, with targets taken from
/// the model at `truth`.
pub fn synthetic_anchors(truth: &SystemParams) -> Vec<Anchor> {
    let link = qkd_coexistence::FiberLink::default();
    let on = |power_dbm, n_channels| AnchorComb::On { power_dbm, n_channels };
    [
        ("50km_off", 50.0, AnchorComb::Off),
        ("50km_16.8", 50.0, on(16.8, 60)),
        ("20km_15.3", 20.0, on(15.3, 60)),
        ("70km_15.8", 70.0, on(15.8, 60)),
        ("20km_off", 20.0, AnchorComb::Off),
    ]
    .into_iter()
    .map(|(label, length_km, comb)| {
        let mut a = Anchor {
            label: label.into(),
            length_km,
            comb,
            target_skr_bps: None,
            target_qber: Some(1.0),
            weight: 1.0,
        };
        let r = a.simulate(&link, truth).unwrap();
        a.target_skr_bps = Some(r.skr_bps);
        a.target_qber = Some(r.qber);
        a
    })
    .collect()
}

/// Every free parameter of the standard set moved 20% off the truth.
pub fn perturbed(truth: &SystemParams) -> SystemParams {
    let mut p = *truth;
    p.protocol.mu *= 1.2;
    p.protocol.nu *= 0.8;
    p.detector.efficiency *= 1.2;
    p.detector.dark_prob *= 0.8;
    p.detector.misalignment_error *= 1.2;
    p.noise.beta_per_km_nm *= 0.8;
    p
}
