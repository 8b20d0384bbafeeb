//! Fit the unpublished system parameters to the measured anchors and print
//! the residual table. Pass a path to also write the fitted-parameter file.
//!
//! ```bash
//! cargo run --release --example calibrate -- /tmp/fitted.toml
//! ```

use qkd_coexistence::calibration::{fit_restarts, reference_anchors, FitSpec, FittedParamsFile};
use qkd_coexistence::SystemParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // start from the generic seed values, not the shipped fit
    let spec = FitSpec::standard(SystemParams::default());
    let report = fit_restarts(&spec, &reference_anchors(), &[0, 1, 2, 3])?;
    print!("{}", report.table());
    println!("{:#?}", report.params);

    if let Some(path) = std::env::args().nth(1) {
        FittedParamsFile::from_report(&report).write(path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
