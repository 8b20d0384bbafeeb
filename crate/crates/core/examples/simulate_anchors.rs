//! Evaluate the measured operating points with the shipped parameters.

use qkd_coexistence::calibration::{reference_anchors, shipped_params};
use qkd_coexistence::FiberLink;

fn main() -> qkd_coexistence::Result<()> {
    let params = shipped_params();
    let link = FiberLink::default();
    println!(
        "{:<20} {:>10} {:>10} {:>8} {:>8} {:>8}",
        "point", "SKR kb/s", "target", "QBER %", "target", "CE"
    );
    for anchor in reference_anchors() {
        let r = anchor.simulate(&link, &params)?;
        let fmt = |v: Option<f64>, s: f64| v.map_or("-".into(), |v| format!("{:.1}", v * s));
        println!(
            "{:<20} {:>10.1} {:>10} {:>8.2} {:>8} {:>8.1}",
            anchor.label,
            r.skr_bps / 1e3,
            fmt(anchor.target_skr_bps, 1e-3),
            r.qber * 100.0,
            fmt(anchor.target_qber, 100.0),
            r.ce
        );
    }
    Ok(())
}
