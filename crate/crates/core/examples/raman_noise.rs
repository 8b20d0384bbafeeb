//! Forward and backward Raman noise at 1310 nm versus length for a 16.8 dBm
//! comb, using the shipped scattering coefficient.

use qkd_coexistence::calibration::shipped_params;
use qkd_coexistence::raman::{backward_raman_power, forward_raman_power, noise_photon_rate, RamanParams};
use qkd_coexistence::simulate::QUANTUM_WAVELENGTH_NM;
use qkd_coexistence::{build_reference_comb, FiberLink, PowerDbm};

fn main() -> qkd_coexistence::Result<()> {
    let noise = shipped_params().noise;
    let comb = build_reference_comb(60, PowerDbm(16.8))?;
    let pump = comb.aggregate_mw()?;
    let link = FiberLink::default();
    let params = RamanParams {
        beta_per_km_nm: noise.beta_per_km_nm,
        filter_bandwidth_nm: noise.filter_bandwidth_nm,
        alpha_pump_db_km: link.attenuation_at(comb.centroid_nm()?)?,
        alpha_quantum_db_km: link.attenuation_at(QUANTUM_WAVELENGTH_NM)?,
    };
    println!(
        "pump {:.2} mW, beta {:.3e} /(km nm), filter {} nm",
        pump.value(),
        params.beta_per_km_nm,
        params.filter_bandwidth_nm
    );
    println!(
        "{:>6} {:>14} {:>14} {:>14} {:>14}",
        "km", "forward pW", "fwd photons/s", "backward pW", "bwd photons/s"
    );
    for length in [1.0, 10.0, 20.0, 30.0, 50.0, 70.0, 100.0, 150.0] {
        let f = forward_raman_power(pump, length, &params)?;
        let b = backward_raman_power(pump, length, &params)?;
        println!(
            "{:>6} {:>14.4} {:>14.4e} {:>14.4} {:>14.4e}",
            length,
            f.value() * 1e9,
            noise_photon_rate(f, QUANTUM_WAVELENGTH_NM)?,
            b.value() * 1e9,
            noise_photon_rate(b, QUANTUM_WAVELENGTH_NM)?,
        );
    }
    Ok(())
}
