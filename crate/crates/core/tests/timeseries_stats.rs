mod common;

use common::cfg;
use qkd_coexistence::run_scenario;
use qkd_coexistence::scenario::run_timeseries;

fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn sample_means_track_the_model() {
    for (body, seed) in [
        ("[link]\nlength_km = 50.0\n", 11),
        ("[link]\nlength_km = 20.0\n[comb]\npower = { total_dbm = 15.3 }\n", 12),
        ("[link]\nlength_km = 70.0\n[comb]\npower = { total_dbm = 15.8 }\n", 13),
    ] {
        let expected = run_scenario(&cfg(body)).unwrap();
        let ts = cfg(&format!("{body}[timeseries]\nduration_s = 1000.0\ninterval_s = 1.0\n"));
        let samples = run_timeseries(&ts, Some(seed)).unwrap();
        assert_eq!(samples.len(), 1000);

        let skr: Vec<f64> = samples.iter().map(|s| s.skr_bps).collect();
        let (m, se) = mean_and_std_err(&skr);
        assert!(
            (m - expected.skr_bps).abs() < 3.0 * se,
            "{body}: SKR mean {m} ± {se}, model {}",
            expected.skr_bps
        );

        let qber: Vec<f64> = samples.iter().map(|s| s.qber).collect();
        let (m, se) = mean_and_std_err(&qber);
        assert!(
            (m - expected.qber).abs() < 3.0 * se,
            "{body}: QBER mean {m} ± {se}, model {}",
            expected.qber
        );
    }
}

#[test]
fn short_windows_are_noisier() {
    let spread = |interval: f64| {
        let c = cfg(&format!(
            "[timeseries]\nduration_s = {}\ninterval_s = {interval}\n",
            interval * 200.0
        ));
        let skr: Vec<f64> = run_timeseries(&c, Some(5)).unwrap().iter().map(|s| s.skr_bps).collect();
        let (_, se) = mean_and_std_err(&skr);
        se
    };
    assert!(spread(0.1) > 2.0 * spread(10.0));
}
