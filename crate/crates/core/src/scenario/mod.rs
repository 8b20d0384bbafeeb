//! Running configured scenarios: single points, sweeps and emulated time
//! series, plus CSV emission.

mod config;
mod csv_out;
mod timeseries;

use rayon::prelude::*;

pub use config::{
    CombConfig, CombPower, FitConfig, LinkConfig, Mode, ScenarioConfig, SweepConfig, SweepVariable, TimeseriesConfig,
    DEFAULT_CONFIG,
};
pub use csv_out::{
    emit_csv, emit_timeseries_csv, format_sig, read_csv, write_csv, write_timeseries_csv, CsvRow, CSV_HEADER,
    TIMESERIES_HEADER,
};
pub use timeseries::{run_timeseries, TimeseriesSample};

use crate::error::{Error, Result};
use crate::optics::PowerDbm;
use crate::simulate::{simulate_point, CoexistenceResult};

fn require_mode(config: &ScenarioConfig, wanted: Mode) -> Result<()> {
    let mode = config.mode()?;
    if mode == wanted {
        Ok(())
    } else {
        Err(Error::config(
            "mode",
            format!(
                "expected a {} scenario, the config describes a {} scenario",
                wanted.name(),
                mode.name()
            ),
        ))
    }
}

/// Evaluate the configured fixed point.
pub fn run_scenario(config: &ScenarioConfig) -> Result<CoexistenceResult> {
    require_mode(config, Mode::Point)?;
    simulate_point(&config.fiber_link()?, &config.wdm_comb()?, &config.system())
}

/// Evaluate one row of a sweep, with the swept variable substituted.
pub fn sweep_point(config: &ScenarioConfig, variable: SweepVariable, value: f64) -> Result<CoexistenceResult> {
    let mut link = config.fiber_link()?;
    let mut n_channels = config.comb.n_channels;
    let mut launch = config.comb.launch_power();
    match variable {
        SweepVariable::Length => link = link.with_length(value)?,
        SweepVariable::Power => launch = PowerDbm(value),
        SweepVariable::Channels => n_channels = value as usize,
    }
    simulate_point(&link, &config.comb_with(n_channels, launch)?, &config.system())
}

/// Evaluate every sweep value. Rows are computed independently (in
/// parallel) and returned in input order.
pub fn run_sweep(config: &ScenarioConfig) -> Result<Vec<CoexistenceResult>> {
    require_mode(config, Mode::Sweep)?;
    let sweep = config.sweep.as_ref().expect("sweep mode has a sweep section");
    if sweep.values.is_empty() {
        return Err(Error::config("sweep.values", "sweep needs at least one value"));
    }
    sweep
        .values
        .par_iter()
        .map(|&v| sweep_point(config, sweep.variable, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn cfg(text: &str) -> ScenarioConfig {
        ScenarioConfig::parse(text, Path::new("t.toml")).unwrap()
    }

    #[test]
    fn mode_mismatch_is_a_config_error() {
        let sweep = cfg("[sweep]\nvariable = \"length\"\nvalues = [20.0]\n");
        assert!(matches!(run_scenario(&sweep), Err(Error::Config { .. })));
        assert!(matches!(run_sweep(&cfg("")), Err(Error::Config { .. })));
    }

    #[test]
    fn single_value_sweep_equals_point() {
        let point = run_scenario(&cfg("[link]\nlength_km = 35.0\n")).unwrap();
        let sweep = run_sweep(&cfg("[sweep]\nvariable = \"length\"\nvalues = [35.0]\n")).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0], point);
    }

    #[test]
    fn comb_off_has_zero_ce() {
        let r = run_scenario(&cfg("[comb]\nenabled = false\n")).unwrap();
        assert_eq!(r.ce, 0.0);
        assert!(r.skr_bps > 0.0);
    }

    #[test]
    fn channel_sweep_is_flat() {
        let rows = run_sweep(&cfg("[sweep]\nvariable = \"channels\"\nvalues = [30.0, 60.0]\n")).unwrap();
        assert_eq!(rows[0].skr_bps.to_bits(), rows[1].skr_bps.to_bits());
        assert_eq!(rows[0].n_channels, 30);
        assert_eq!(rows[1].n_channels, 60);
    }

    #[test]
    fn power_sweep_qber_rises() {
        let rows = run_sweep(&cfg(
            "[sweep]\nvariable = \"power\"\nvalues = [0.0, 5.0, 10.0, 15.0, 16.8, 20.0, 25.0]\n",
        ))
        .unwrap();
        for w in rows.windows(2) {
            assert!(w[1].qber >= w[0].qber);
            assert!(w[1].skr_bps <= w[0].skr_bps);
        }
    }
}
