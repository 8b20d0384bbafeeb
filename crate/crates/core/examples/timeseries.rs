//! Emulate a day of 60 s windows at 50 km / 16.8 dBm and summarize the
//! spread of the sampled key rate and QBER.

use std::path::Path;

use qkd_coexistence::scenario::{run_scenario, run_timeseries, ScenarioConfig};

fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn main() -> qkd_coexistence::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let text = "[timeseries]\nduration_s = 86400.0\ninterval_s = 60.0\n";
    let cfg = ScenarioConfig::parse(text, Path::new("timeseries"))?;
    let samples = run_timeseries(&cfg, Some(seed))?;

    let mut point = cfg.clone();
    point.timeseries = None;
    let expected = run_scenario(&point)?;

    let (skr, skr_sd) = mean_sd(samples.iter().map(|s| s.skr_bps));
    let (qber, qber_sd) = mean_sd(samples.iter().map(|s| s.qber));
    println!("{} windows of 60 s, seed {seed}", samples.len());
    println!(
        "SKR  {:.2} ± {:.2} kb/s   (model {:.2})",
        skr / 1e3,
        skr_sd / 1e3,
        expected.skr_bps / 1e3
    );
    println!(
        "QBER {:.4} ± {:.4} %     (model {:.4})",
        qber * 100.0,
        qber_sd * 100.0,
        expected.qber * 100.0
    );
    for s in samples.iter().step_by(120) {
        println!(
            "t = {:>6.0} s  SKR {:>8.2} kb/s  QBER {:.3} %",
            s.t,
            s.skr_bps / 1e3,
            s.qber * 100.0
        );
    }
    Ok(())
}
