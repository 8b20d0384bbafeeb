//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{
    cfg, decoy_violations, gain_checks, known_params, perturbed, raman_backward_ode, raman_forward_ode, rel,
    synthetic_anchors,
};
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use qkd_coexistence::calibration::{fit_restarts, reference_anchors, shipped_params, Anchor, AnchorComb, FitSpec};
use qkd_coexistence::optics::{dbm_to_mw, mw_to_dbm};
use qkd_coexistence::raman::{backward_raman_power, forward_raman_power, RamanParams};
use qkd_coexistence::scenario::{run_sweep, run_timeseries};
use qkd_coexistence::simulate::{ce_report, CLASSICAL_REFERENCE_NM, QUANTUM_WAVELENGTH_NM};
use qkd_coexistence::{compute_ce, run_scenario, Band, CoexistenceResult, FiberLink, PowerDbm, PowerMw, SystemParams};

type Outcome = Result<String, String>;

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, id: &str, what: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS  {id:<4} {what}: {detail} [{ms} ms]"),
            Err(reason) => {
                self.failures += 1;
                println!("FAIL  {id:<4} {what}: {reason} [{ms} ms]");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn anchor_point(params: &SystemParams, length: f64, comb: AnchorComb) -> Result<CoexistenceResult, String> {
    Anchor {
        label: String::new(),
        length_km: length,
        comb,
        target_skr_bps: Some(1.0),
        target_qber: None,
        weight: 1.0,
    }
    .simulate(&FiberLink::default(), params)
    .map_err(|e| e.to_string())
}

fn on(power_dbm: f64, n_channels: usize) -> AnchorComb {
    AnchorComb::On { power_dbm, n_channels }
}

fn skr_qber(r: &CoexistenceResult, skr: f64, skr_tol: f64, qber: f64) -> Outcome {
    let detail = format!(
        "SKR {:.1} kb/s ({:+.2}%), QBER {:.3}% ({:+.3} pp)",
        r.skr_bps / 1e3,
        (r.skr_bps / skr - 1.0) * 100.0,
        r.qber * 100.0,
        (r.qber - qber) * 100.0
    );
    ensure(
        rel(r.skr_bps, skr) <= skr_tol,
        format!("SKR out of ±{}%: {detail}", skr_tol * 100.0),
    )?;
    ensure((r.qber - qber).abs() <= 0.004, format!("QBER out of ±0.4 pp: {detail}"))?;
    Ok(detail)
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn prop(cases: u32, result: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Outcome {
    result.map(|()| format!("{cases} cases")).map_err(|e| e.to_string())
}

fn point(length: f64, power: f64) -> CoexistenceResult {
    run_scenario(&cfg(&format!(
        "[link]\nlength_km = {length}\n[comb]\npower = {{ total_dbm = {power} }}\n"
    )))
    .unwrap()
}

fn criterion_1(gate: &mut Gate) {
    let start = Instant::now();
    let p = shipped_params();
    gate.check("1a", "50 km, comb off", || {
        skr_qber(&anchor_point(&p, 50.0, AnchorComb::Off)?, 169e3, 0.10, 0.034)
    });
    gate.check("1b", "50 km, 16.8 dBm, 60 ch", || {
        skr_qber(&anchor_point(&p, 50.0, on(16.8, 60))?, 106e3, 0.10, 0.054)
    });
    gate.check("1c", "50 km, 16.8 dBm, 30 ch identical to 60 ch", || {
        let a = anchor_point(&p, 50.0, on(16.8, 30))?;
        let b = anchor_point(&p, 50.0, on(16.8, 60))?;
        ensure(a.skr_bps.to_bits() == b.skr_bps.to_bits(), "SKR differs")?;
        ensure(a.qber.to_bits() == b.qber.to_bits(), "QBER differs")?;
        ensure(a.noise == b.noise, "noise budget differs")?;
        Ok(format!(
            "SKR {:.1} kb/s, QBER {:.3}% in both",
            a.skr_bps / 1e3,
            a.qber * 100.0
        ))
    });
    gate.check("1d", "20 km, 15.3 dBm, 60 ch", || {
        let r = anchor_point(&p, 20.0, on(15.3, 60))?;
        let e = r.skr_bps / 1.47e6 - 1.0;
        ensure(
            e.abs() <= 0.15,
            format!("SKR {:.3} Mb/s off by {:+.2}%", r.skr_bps / 1e6, e * 100.0),
        )?;
        Ok(format!("SKR {:.3} Mb/s ({:+.2}%)", r.skr_bps / 1e6, e * 100.0))
    });
    gate.check("1e", "70 km link losses", || {
        let link = FiberLink::new(70.0).map_err(|e| e.to_string())?;
        let c = link
            .end_to_end_loss(CLASSICAL_REFERENCE_NM, Band::Classical)
            .map_err(|e| e.to_string())?;
        let q = link
            .end_to_end_loss(QUANTUM_WAVELENGTH_NM, Band::Quantum)
            .map_err(|e| e.to_string())?;
        ensure(
            (c - 17.5).abs() < 1e-12 && (q - 25.7).abs() < 1e-12,
            format!("{c} dB / {q} dB"),
        )?;
        Ok(format!("{c:.6} dB at 1550 nm, {q:.6} dB at 1310 nm"))
    });
    let elapsed = start.elapsed();
    gate.check("1f", "anchor reproduction runtime", || {
        ensure(elapsed < Duration::from_secs(10), format!("{elapsed:?} >= 10 s"))?;
        Ok(format!("{elapsed:?} < 10 s"))
    });
}

fn criterion_2(gate: &mut Gate) {
    gate.check("2a", "CE(106 kb/s, 16.8 dBm, 50 km)", || {
        let ce = compute_ce(106e3, PowerDbm(16.8), 50.0).map_err(|e| e.to_string())?;
        ensure((ce - 253.7).abs() <= 0.2, format!("{ce}"))?;
        Ok(format!("{ce:.3} Mb/s·mW·km"))
    });
    gate.check("2b", "CE report quotes prior work", || {
        let report = ce_report(106e3, PowerDbm(16.8), 50.0).map_err(|e| e.to_string())?;
        ensure(report.contains("9.3") && report.contains("253.7"), report.clone())?;
        Ok(report.lines().nth(1).unwrap_or_default().to_string())
    });
}

fn criterion_3(gate: &mut Gate) {
    let start = Instant::now();
    gate.check("3a", "Raman closed forms vs ODE integration", || {
        let params = RamanParams {
            beta_per_km_nm: shipped_params().noise.beta_per_km_nm,
            filter_bandwidth_nm: 1.0,
            alpha_pump_db_km: 0.2,
            alpha_quantum_db_km: 0.33,
        };
        let p0 = PowerMw::new(47.86).unwrap();
        let mut worst = 0.0f64;
        for l in [1.0, 20.0, 50.0, 70.0, 100.0] {
            let f = forward_raman_power(p0, l, &params).map_err(|e| e.to_string())?.value();
            let b = backward_raman_power(p0, l, &params).map_err(|e| e.to_string())?.value();
            let ef = rel(f, raman_forward_ode(p0.value(), l, &params));
            let eb = rel(b, raman_backward_ode(p0.value(), l, &params));
            ensure(
                ef < 1e-6 && eb < 1e-6,
                format!("L={l}: forward {ef:.2e}, backward {eb:.2e}"),
            )?;
            worst = worst.max(ef).max(eb);
        }
        Ok(format!("max relative error {worst:.2e} over 5 lengths"))
    });
    gate.check("3b", "gain vs 1e7-pulse Monte Carlo", || {
        let checks = gain_checks(31);
        let mut worst = 0.0f64;
        for (i, c) in checks.iter().enumerate() {
            let z = (c.mc - c.model).abs() / c.std_err;
            ensure(z < 3.0, format!("draw {i}: {z:.2} standard errors"))?;
            worst = worst.max(z);
        }
        Ok(format!("5 draws, max deviation {worst:.2} standard errors"))
    });
    gate.check("3c", "decoy bounds on 100 synthetic channels", || {
        let v = decoy_violations(100, 77);
        ensure(v == 0, format!("{v} violations"))?;
        Ok("0 violations".into())
    });
    let elapsed = start.elapsed();
    gate.check("3d", "oracle runtime", || {
        ensure(elapsed < Duration::from_secs(60), format!("{elapsed:?} >= 60 s"))?;
        Ok(format!("{elapsed:?} < 60 s"))
    });
}

fn criterion_4(gate: &mut Gate) {
    gate.check("4a", "SKR non-increasing in length", || {
        let r = runner(200).run(&(0.0f64..150.0, 0.0f64..150.0, -10.0f64..25.0), |(a, b, p)| {
            let (s, l) = if a <= b { (a, b) } else { (b, a) };
            if point(l, p).skr_bps > point(s, p).skr_bps {
                return Err(TestCaseError::fail(format!("L {s} -> {l} at {p} dBm")));
            }
            Ok(())
        });
        prop(200, r)
    });
    gate.check("4b", "SKR non-increasing, QBER non-decreasing in power", || {
        let r = runner(200).run(&(-20.0f64..28.0, -20.0f64..28.0, 1.0f64..120.0), |(a, b, l)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (x, y) = (point(l, lo), point(l, hi));
            if y.skr_bps > x.skr_bps || y.qber < x.qber {
                return Err(TestCaseError::fail(format!("{lo} -> {hi} dBm at {l} km")));
            }
            Ok(())
        });
        prop(200, r)
    });
    gate.check("4c", "dBm round-trip within 1e-9", || {
        let r = runner(1000).run(&(-80.0f64..40.0), |p| {
            let back = mw_to_dbm(dbm_to_mw(PowerDbm(p))).0;
            if (back - p).abs() >= 1e-9 {
                return Err(TestCaseError::fail(format!("{p} -> {back}")));
            }
            Ok(())
        });
        prop(1000, r)
    });
    gate.check("4d", "CE trilinear", || {
        let r = runner(500).run(
            &(0.0f64..1e7, -10.0f64..25.0, 0.0f64..200.0, 0.1f64..10.0),
            |(skr, p, l, k)| {
                let ce = |s: f64, mw: f64, l: f64| compute_ce(s, mw_to_dbm(PowerMw::new(mw).unwrap()), l).unwrap();
                let mw = dbm_to_mw(PowerDbm(p)).value();
                let base = ce(skr, mw, l);
                for scaled in [ce(k * skr, mw, l), ce(skr, k * mw, l), ce(skr, mw, k * l)] {
                    if (scaled - k * base).abs() > 1e-9 * (k * base).max(1e-300) {
                        return Err(TestCaseError::fail(format!("{scaled} vs {}", k * base)));
                    }
                }
                Ok(())
            },
        );
        prop(500, r)
    });
    gate.check("4e", "sweep order and parallelism determinism", || {
        let r = runner(40).run(&proptest::collection::vec(0.0f64..120.0, 1..32), |values| {
            let list: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
            let c = cfg(&format!(
                "[sweep]\nvariable = \"length\"\nvalues = [{}]\n",
                list.join(", ")
            ));
            let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            let one = pool(1).install(|| run_sweep(&c).unwrap());
            let many = pool(8).install(|| run_sweep(&c).unwrap());
            if one != many || one.iter().zip(&values).any(|(r, &v)| r.length_km != v) {
                return Err(TestCaseError::fail("sweep output depends on scheduling"));
            }
            Ok(())
        });
        prop(40, r)
    });
    gate.check("4f", "timeseries seed determinism", || {
        let c = cfg("[timeseries]\nduration_s = 50.0\ninterval_s = 1.0\n");
        let r = runner(50).run(&proptest::num::u64::ANY, |seed| {
            if run_timeseries(&c, Some(seed)).unwrap() != run_timeseries(&c, Some(seed)).unwrap() {
                return Err(TestCaseError::fail(format!("seed {seed}")));
            }
            Ok(())
        });
        prop(50, r)
    });
    gate.check("4g", "timeseries mean within 3σ of model (1000 intervals)", || {
        let c = cfg("[timeseries]\nduration_s = 1000.0\ninterval_s = 1.0\nseed = 42\n");
        let mut point_cfg = c.clone();
        point_cfg.timeseries = None;
        let expected = run_scenario(&point_cfg).map_err(|e| e.to_string())?;
        let s = run_timeseries(&c, None).map_err(|e| e.to_string())?;
        let n = s.len() as f64;
        let mean = s.iter().map(|x| x.skr_bps).sum::<f64>() / n;
        let se = (s.iter().map(|x| (x.skr_bps - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let z = (mean - expected.skr_bps) / se;
        ensure(
            z.abs() < 3.0,
            format!("mean {mean:.1} vs {:.1}, z = {z:.2}", expected.skr_bps),
        )?;
        Ok(format!(
            "mean {:.2} kb/s vs model {:.2} kb/s, z = {z:+.2}",
            mean / 1e3,
            expected.skr_bps / 1e3
        ))
    });
    gate.check("4h", "70 km at 15.8 dBm: 0 < SKR < 50 km SKR", || {
        let (l70, l50) = (point(70.0, 15.8), point(50.0, 15.8));
        ensure(
            l70.skr_bps > 0.0 && l70.skr_bps < l50.skr_bps,
            format!("{} vs {}", l70.skr_bps, l50.skr_bps),
        )?;
        Ok(format!("{:.1} kb/s < {:.1} kb/s", l70.skr_bps / 1e3, l50.skr_bps / 1e3))
    });
    gate.check("4i", "SKR strictly decreasing over 20, 50, 70 km at 15.3 dBm", || {
        let s: Vec<f64> = [20.0, 50.0, 70.0].iter().map(|&l| point(l, 15.3).skr_bps).collect();
        ensure(s[0] > s[1] && s[1] > s[2], format!("{s:?}"))?;
        Ok(format!(
            "{:.1} > {:.1} > {:.1} kb/s",
            s[0] / 1e3,
            s[1] / 1e3,
            s[2] / 1e3
        ))
    });
}

fn criterion_5(gate: &mut Gate) {
    gate.check("5a", "synthetic anchors, 20% perturbed start, SKR within 1%", || {
        let truth = known_params();
        let anchors = synthetic_anchors(&truth);
        let mut spec = FitSpec::standard(perturbed(&truth));
        spec.tolerance = 0.01;
        let report = fit_restarts(&spec, &anchors, &[0, 1]).map_err(|e| e.to_string())?;
        let worst = report
            .anchors
            .iter()
            .map(|a| a.skr_rel_error.unwrap_or(f64::INFINITY).abs())
            .fold(0.0, f64::max);
        ensure(
            worst < 0.01,
            format!("worst SKR error {:.3}%\n{}", worst * 100.0, report.table()),
        )?;
        Ok(format!(
            "{} anchors, worst SKR error {:.2e}, start residual {:.2e}",
            anchors.len(),
            worst,
            report.start_residual
        ))
    });
    gate.check("5b", "measured-anchor fit: within 10% or binding-anchor report", || {
        let report = fit_restarts(
            &FitSpec::standard(SystemParams::default()),
            &reference_anchors(),
            &[0, 1, 2, 3],
        )
        .map_err(|e| e.to_string())?;
        let binding = report.binding_anchor().ok_or("no anchors in report")?;
        if report.within_tolerance {
            Ok(format!(
                "all targets within 10%, residual {:.2e}, largest error {:.2}% ({})",
                report.residual,
                binding.worst() * 100.0,
                binding.label
            ))
        } else if report.table().contains(&binding.label) {
            Ok(format!(
                "binding anchor {} at {:.2}%",
                binding.label,
                binding.worst() * 100.0
            ))
        } else {
            Err("neither tolerance met nor binding anchor reported".into())
        }
    });
}

fn main() {
    let mut gate = Gate { failures: 0 };
    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate);
    criterion_4(&mut gate);
    criterion_5(&mut gate);
    if gate.failures > 0 {
        println!("acceptance: {} criteria failed", gate.failures);
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
