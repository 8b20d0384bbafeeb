//! Print the 30- and 60-channel comb plans and the per-channel power needed
//! for a given aggregate.
//!
//! ```bash
//! cargo run --example channel_plan -- 16.8
//! ```

use qkd_coexistence::optics::{mw_to_dbm, PowerDbm};
use qkd_coexistence::{build_reference_comb, WdmComb};

fn summary(comb: &WdmComb) -> Result<(), Box<dyn std::error::Error>> {
    let ch = comb.channels();
    let per_channel = mw_to_dbm(qkd_coexistence::PowerMw::new(
        comb.aggregate_mw()?.value() / ch.len() as f64,
    )?);
    println!(
        "{:>2} channels, {:.0} GHz grid, {:.2}–{:.2} nm, centroid {:.2} nm",
        ch.len(),
        comb.grid_spacing_ghz(),
        ch[0].wavelength_nm,
        ch[ch.len() - 1].wavelength_nm,
        comb.centroid_nm()?
    );
    println!(
        "   aggregate {:.2} dBm, {:.2} dBm per channel",
        comb.aggregate_power()?.0,
        per_channel.0
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let total: f64 = std::env::args().nth(1).map_or(Ok(16.8), |s| s.parse())?;
    let full = build_reference_comb(60, PowerDbm(total))?;
    let half = build_reference_comb(30, PowerDbm(total))?;
    summary(&full)?;
    summary(&half)?;

    println!("\n  #  wavelength nm  frequency THz");
    for (i, (c, f)) in full.channels().iter().zip(full.frequencies_ghz()).enumerate() {
        let in_half = half.channels().iter().any(|h| h.wavelength_nm == c.wavelength_nm);
        println!(
            "{:>3}  {:>13.3}  {:>13.3} {}",
            i + 1,
            c.wavelength_nm,
            f / 1e3,
            if in_half { "*" } else { "" }
        );
    }
    println!("(* = kept in the 30-channel plan)");
    Ok(())
}
