mod common;

use common::cfg;
use proptest::prelude::*;
use qkd_coexistence::optics::{dbm_to_mw, mw_to_dbm};
use qkd_coexistence::scenario::{run_sweep, run_timeseries, sweep_point, ScenarioConfig, SweepVariable};
use qkd_coexistence::{compute_ce, CoexistenceResult, PowerDbm, PowerMw};

fn point(length: f64, power: f64) -> CoexistenceResult {
    let c = cfg(&format!(
        "[link]\nlength_km = {length}\n[comb]\npower = {{ total_dbm = {power} }}\n"
    ));
    qkd_coexistence::run_scenario(&c).unwrap()
}

fn sweep_cfg(variable: &str, values: &[f64]) -> ScenarioConfig {
    let list: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    cfg(&format!(
        "[sweep]\nvariable = \"{variable}\"\nvalues = [{}]\n",
        list.join(", ")
    ))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn skr_non_increasing_in_length(a in 0.0f64..150.0, b in 0.0f64..150.0, p in -10.0f64..25.0) {
        let (short, long) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(point(long, p).skr_bps <= point(short, p).skr_bps);
    }

    #[test]
    fn power_monotonicity(a in -20.0f64..28.0, b in -20.0f64..28.0, l in 1.0f64..120.0) {
        let (low, high) = if a <= b { (a, b) } else { (b, a) };
        let (lo, hi) = (point(l, low), point(l, high));
        prop_assert!(hi.skr_bps <= lo.skr_bps);
        prop_assert!(hi.qber >= lo.qber);
    }

    #[test]
    fn dbm_round_trip(p in -80.0f64..40.0) {
        let back = mw_to_dbm(dbm_to_mw(PowerDbm(p))).0;
        prop_assert!((back - p).abs() < 1e-9);
        let mw = dbm_to_mw(PowerDbm(p)).value();
        prop_assert!((dbm_to_mw(mw_to_dbm(PowerMw::new(mw).unwrap())).value() / mw - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ce_is_trilinear(skr in 0.0f64..1e7, p in -10.0f64..25.0, l in 0.0f64..200.0, k in 0.1f64..10.0) {
        let base = compute_ce(skr, PowerDbm(p), l).unwrap();
        let tol = 1e-12 * base.abs().max(1e-300);
        prop_assert!((compute_ce(k * skr, PowerDbm(p), l).unwrap() - k * base).abs() <= 4.0 * tol * k);
        prop_assert!((compute_ce(skr, PowerDbm(p), k * l).unwrap() - k * base).abs() <= 4.0 * tol * k);
        let p_scaled = mw_to_dbm(PowerMw::new(k * dbm_to_mw(PowerDbm(p)).value()).unwrap());
        prop_assert!((compute_ce(skr, p_scaled, l).unwrap() - k * base).abs() <= 1e-9 * k * base.max(1e-300));
    }

    #[test]
    fn sweep_order_and_parallelism(values in prop::collection::vec(0.0f64..120.0, 1..24)) {
        let c = sweep_cfg("length", &values);
        let serial = in_pool(1, || run_sweep(&c).unwrap());
        let parallel = in_pool(4, || run_sweep(&c).unwrap());
        prop_assert_eq!(&serial, &parallel);
        for (row, &v) in serial.iter().zip(&values) {
            prop_assert_eq!(row, &sweep_point(&c, SweepVariable::Length, v).unwrap());
        }
        let reversed: Vec<f64> = values.iter().rev().copied().collect();
        let back = run_sweep(&sweep_cfg("length", &reversed)).unwrap();
        prop_assert!(back.iter().rev().eq(serial.iter()));
    }

    #[test]
    fn timeseries_seed_determinism(seed in any::<u64>()) {
        let c = cfg("[timeseries]\nduration_s = 20.0\ninterval_s = 1.0\n");
        let a = in_pool(1, || run_timeseries(&c, Some(seed)).unwrap());
        let b = in_pool(3, || run_timeseries(&c, Some(seed)).unwrap());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn thirty_and_sixty_channels_coincide() {
    for (l, p) in [(20.0, 15.3), (50.0, 16.8), (70.0, 15.8), (35.0, 0.0)] {
        let text = |n| format!("[link]\nlength_km = {l}\n[comb]\nn_channels = {n}\npower = {{ total_dbm = {p} }}\n");
        let a = qkd_coexistence::run_scenario(&cfg(&text(30))).unwrap();
        let b = qkd_coexistence::run_scenario(&cfg(&text(60))).unwrap();
        assert_eq!(a.skr_bps.to_bits(), b.skr_bps.to_bits());
        assert_eq!(a.qber.to_bits(), b.qber.to_bits());
    }
}

#[test]
fn seventy_km_sits_below_fifty_km() {
    let l70 = point(70.0, 15.8);
    let l50 = point(50.0, 15.8);
    assert!(l70.skr_bps > 0.0);
    assert!(l70.skr_bps < l50.skr_bps);
    let skr: Vec<f64> = [20.0, 50.0, 70.0].iter().map(|&l| point(l, 15.3).skr_bps).collect();
    assert!(skr[0] > skr[1] && skr[1] > skr[2], "{skr:?}");
}
