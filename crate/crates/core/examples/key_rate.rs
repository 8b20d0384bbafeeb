//! Step through the decoy-state estimate for one channel: gains, error
//! rates, single-photon bounds and the resulting key rate.
//!
//! ```bash
//! cargo run --example key_rate -- 50 16.8
//! ```

use qkd_coexistence::calibration::shipped_params;
use qkd_coexistence::qkd::{decoy_bounds, observe, secure_key_rate};
use qkd_coexistence::raman::{forward_raman_power, noise_per_gate, noise_photon_rate, RamanParams};
use qkd_coexistence::simulate::QUANTUM_WAVELENGTH_NM;
use qkd_coexistence::{build_reference_comb, Band, FiberLink, PowerDbm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let length: f64 = args.next().map_or(Ok(50.0), |s| s.parse())?;
    let power: f64 = args.next().map_or(Ok(16.8), |s| s.parse())?;
    let p = shipped_params();

    let link = FiberLink::new(length)?;
    let comb = build_reference_comb(60, PowerDbm(power))?;
    let raman = RamanParams {
        beta_per_km_nm: p.noise.beta_per_km_nm,
        filter_bandwidth_nm: p.noise.filter_bandwidth_nm,
        alpha_pump_db_km: link.attenuation_at(comb.centroid_nm()?)?,
        alpha_quantum_db_km: link.attenuation_at(QUANTUM_WAVELENGTH_NM)?,
    };
    let noise = forward_raman_power(comb.aggregate_mw()?, length, &raman)?;
    let rate = noise_photon_rate(noise, QUANTUM_WAVELENGTH_NM)?;
    let npg = noise_per_gate(
        rate,
        p.detector.gate_width_s,
        p.protocol.pulse_rate_hz,
        p.detector.efficiency,
    )?;
    let t = link.transmittance(QUANTUM_WAVELENGTH_NM, Band::Quantum)?;

    let (stats, _) = observe(t, &p.protocol, &p.detector, npg)?;
    let bounds = decoy_bounds(&stats, &p.protocol)?;
    let key = secure_key_rate(&stats, &bounds, &p.protocol);

    println!("{length} km, {power} dBm: transmittance {t:.4e}, noise {rate:.4e} photons/s, {npg:.3e} per gate");
    println!(
        "mu = {:.4}: Q = {:.4e}, E = {:.4}",
        p.protocol.mu, stats.q_mu, stats.e_mu
    );
    println!(
        "nu = {:.4}: Q = {:.4e}, E = {:.4}",
        p.protocol.nu, stats.q_nu, stats.e_nu
    );
    println!("Y0 = {:.4e}", stats.y0);
    println!(
        "Y1 >= {:.4e}, e1 <= {:.4}, Q1 >= {:.4e}",
        bounds.y1_lower, bounds.e1_upper, key.q1_lower
    );
    println!(
        "SKR = {:.1} kb/s{}",
        key.skr_bps / 1e3,
        if key.flags.any() {
            format!("  [{}]", key.flags)
        } else {
            String::new()
        }
    );
    Ok(())
}
