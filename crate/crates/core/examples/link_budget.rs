//! End-to-end losses for the quantum (1310 nm) and classical (1550 nm) bands
//! on the reference spools.

use qkd_coexistence::simulate::{CLASSICAL_REFERENCE_NM, QUANTUM_WAVELENGTH_NM};
use qkd_coexistence::{Band, FiberLink};

fn main() -> qkd_coexistence::Result<()> {
    println!(
        "{:>6} {:>12} {:>12} {:>14}",
        "km", "1310 nm dB", "1550 nm dB", "T quantum"
    );
    for length in [0.0, 20.0, 50.0, 70.0, 100.0] {
        let link = FiberLink::new(length)?;
        println!(
            "{:>6} {:>12.2} {:>12.2} {:>14.4e}",
            length,
            link.end_to_end_loss(QUANTUM_WAVELENGTH_NM, Band::Quantum)?,
            link.end_to_end_loss(CLASSICAL_REFERENCE_NM, Band::Classical)?,
            link.transmittance(QUANTUM_WAVELENGTH_NM, Band::Quantum)?,
        );
    }
    Ok(())
}
