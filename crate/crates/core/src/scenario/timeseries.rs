//! Stochastic emulation of a long-running link.
//!
//! Each interval draws click counts for the signal, decoy and vacuum states
//! from Poisson distributions around the model expectations, and error counts
//! from binomials over those clicks. The decoy bounds and key rate are then
//! re-evaluated from the sampled observables. Every intensity class is
//! credited with the full pulse budget of the interval, consistent with the
//! asymptotic key-rate expression.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::Serialize;

use super::config::{Mode, ScenarioConfig};
use super::require_mode;
use crate::error::{Error, Result};
use crate::qkd::{decoy_bounds, secure_key_rate, ChannelStats, Diagnostics, VACUUM_ERROR};
use crate::simulate::simulate_point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeseriesSample {
    /// End of the interval, seconds from start.
    pub t: f64,
    pub skr_bps: f64,
    pub qber: f64,
    pub flags: Diagnostics,
}

fn draw_clicks(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::Numeric(format!("click distribution with mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

fn draw_errors(rng: &mut ChaCha8Rng, clicks: u64, p: f64) -> Result<u64> {
    if clicks == 0 {
        return Ok(0);
    }
    let dist = Binomial::new(clicks, p.clamp(0.0, 1.0))
        .map_err(|e| Error::Numeric(format!("error distribution with p {p}: {e}")))?;
    Ok(dist.sample(rng))
}

fn ratio(num: u64, den: u64, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

/// Emulate the configured time series. `seed` overrides the config seed.
pub fn run_timeseries(config: &ScenarioConfig, seed: Option<u64>) -> Result<Vec<TimeseriesSample>> {
    require_mode(config, Mode::Timeseries)?;
    let ts = config.timeseries.expect("timeseries mode has a timeseries section");
    if !(ts.interval_s > 0.0) || !ts.interval_s.is_finite() {
        return Err(Error::config("timeseries.interval_s", "interval must be > 0 s"));
    }
    if !(ts.duration_s >= 0.0) || !ts.duration_s.is_finite() {
        return Err(Error::config("timeseries.duration_s", "duration must be >= 0 s"));
    }
    let n_intervals = (ts.duration_s / ts.interval_s + 1e-9).floor() as usize;
    if n_intervals == 0 {
        return Ok(Vec::new());
    }

    let params = config.system();
    let expected = simulate_point(&config.fiber_link()?, &config.wdm_comb()?, &params)?;
    let exp = expected.stats;
    let pulses = params.protocol.pulse_rate_hz * ts.interval_s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(ts.seed));

    let mut out = Vec::with_capacity(n_intervals);
    for i in 0..n_intervals {
        let clicks_mu = draw_clicks(&mut rng, pulses * exp.q_mu)?;
        let errors_mu = draw_errors(&mut rng, clicks_mu, exp.e_mu)?;
        let clicks_nu = draw_clicks(&mut rng, pulses * exp.q_nu)?;
        let errors_nu = draw_errors(&mut rng, clicks_nu, exp.e_nu)?;
        let clicks_vac = draw_clicks(&mut rng, pulses * exp.y0)?;

        let n = pulses.max(1.0);
        let stats = ChannelStats {
            q_mu: clicks_mu as f64 / n,
            q_nu: clicks_nu as f64 / n,
            e_mu: ratio(errors_mu, clicks_mu, VACUUM_ERROR),
            e_nu: ratio(errors_nu, clicks_nu, VACUUM_ERROR),
            y0: clicks_vac as f64 / n,
            noise_per_gate: exp.noise_per_gate,
        };
        let bounds = decoy_bounds(&stats, &params.protocol)?;
        let key = secure_key_rate(&stats, &bounds, &params.protocol);
        out.push(TimeseriesSample {
            t: (i + 1) as f64 * ts.interval_s,
            skr_bps: key.skr_bps,
            qber: stats.e_mu,
            flags: key.flags,
        });
    }
    Ok(out)
}
