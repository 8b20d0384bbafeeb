//! SKR, QBER and CE against aggregate comb power on the 50 km link. CE peaks
//! where the key-rate loss starts to outpace the power gain.

use std::path::Path;

use qkd_coexistence::scenario::{run_sweep, ScenarioConfig};

fn main() -> qkd_coexistence::Result<()> {
    let values: Vec<String> = (0..=44).map(|i| format!("{:.1}", i as f64 * 0.5)).collect();
    let text = format!("[sweep]\nvariable = \"power\"\nvalues = [{}]\n", values.join(", "));
    let rows = run_sweep(&ScenarioConfig::parse(&text, Path::new("power_sweep"))?)?;

    println!("{:>8} {:>10} {:>8} {:>8}", "dBm", "SKR kb/s", "QBER %", "CE");
    for r in &rows {
        println!(
            "{:>8.1} {:>10.2} {:>8.3} {:>8.1}",
            r.p_wdm.0,
            r.skr_bps / 1e3,
            r.qber * 100.0,
            r.ce
        );
    }
    let best = rows
        .iter()
        .max_by(|a, b| a.ce.total_cmp(&b.ce))
        .expect("non-empty sweep");
    println!("max CE {:.1} at {:.1} dBm", best.ce, best.p_wdm.0);
    Ok(())
}
