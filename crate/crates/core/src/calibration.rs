//! Fitting the unpublished system parameters to measured operating points.
//!
//! Free parameters are mapped onto the real line through a logistic
//! transform of their box (of `log10` of the box for log-scaled
//! parameters) and minimized with a Nelder–Mead simplex. The objective is
//! the weighted sum of squared relative errors over all anchor targets.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{CombFill, FiberLink, PowerDbm, WdmComb};
use crate::simulate::{simulate_point, CoexistenceResult, SystemParams};

mod nelder_mead;

pub use nelder_mead::{minimize, NelderMeadOptions, Outcome, StopReason};

/// The fitted parameter file shipped with the crate.
pub const SHIPPED_PARAMS: &str = include_str!("../config/fitted_params.toml");

/// Comb state of an anchor configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase", deny_unknown_fields)]
pub enum AnchorComb {
    Off,
    On { power_dbm: f64, n_channels: usize },
}

/// One measured configuration and its observed outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub label: String,
    pub length_km: f64,
    pub comb: AnchorComb,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_skr_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_qber: Option<f64>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl Anchor {
    pub fn validate(&self) -> Result<()> {
        if self.target_skr_bps.is_none() && self.target_qber.is_none() {
            return Err(Error::config(
                format!("anchors.{}", self.label),
                "anchor needs at least one of target_skr_bps, target_qber",
            ));
        }
        if !(self.weight > 0.0) || !self.weight.is_finite() {
            return Err(Error::config(
                format!("anchors.{}.weight", self.label),
                "weight must be > 0",
            ));
        }
        for (field, v) in [
            ("target_skr_bps", self.target_skr_bps),
            ("target_qber", self.target_qber),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::config(
                        format!("anchors.{}.{field}", self.label),
                        "target must be > 0",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn comb(&self) -> Result<WdmComb> {
        match self.comb {
            AnchorComb::Off => WdmComb::dark(CombFill::Full),
            AnchorComb::On { power_dbm, n_channels } => {
                WdmComb::reference(CombFill::from_count(n_channels)?, PowerDbm(power_dbm))
            }
        }
    }

    pub fn simulate(&self, link: &FiberLink, params: &SystemParams) -> Result<CoexistenceResult> {
        simulate_point(&link.with_length(self.length_km)?, &self.comb()?, params)
    }
}

/// Measured anchors from the co-propagation experiment.
///
/// The 30-channel point carries only its QBER: the model output is a
/// function of aggregate power alone, so that point coincides with the
/// 60-channel one. The 60-channel key rate defines the reported CE and is
/// weighted to be reproduced almost exactly.
pub fn reference_anchors() -> Vec<Anchor> {
    let on = |power_dbm, n_channels| AnchorComb::On { power_dbm, n_channels };
    vec![
        Anchor {
            label: "50km_no_wdm".into(),
            length_km: 50.0,
            comb: AnchorComb::Off,
            target_skr_bps: Some(169e3),
            target_qber: Some(0.034),
            weight: 1.0,
        },
        Anchor {
            label: "50km_60ch_16.8dBm".into(),
            length_km: 50.0,
            comb: on(16.8, 60),
            target_skr_bps: Some(106e3),
            target_qber: Some(0.054),
            weight: 100.0,
        },
        Anchor {
            label: "50km_30ch_16.8dBm".into(),
            length_km: 50.0,
            comb: on(16.8, 30),
            target_skr_bps: None,
            target_qber: Some(0.054),
            weight: 1.0,
        },
        Anchor {
            label: "20km_60ch_15.3dBm".into(),
            length_km: 20.0,
            comb: on(15.3, 60),
            target_skr_bps: Some(1.47e6),
            target_qber: None,
            weight: 1.0,
        },
    ]
}

/// Parameters that can be freed during a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    Beta,
    Efficiency,
    DarkProb,
    MisalignmentError,
    Mu,
    Nu,
    FilterBandwidth,
    LeakageExtinction,
    FEc,
}

impl ParamName {
    pub fn get(self, p: &SystemParams) -> f64 {
        match self {
            ParamName::Beta => p.noise.beta_per_km_nm,
            ParamName::Efficiency => p.detector.efficiency,
            ParamName::DarkProb => p.detector.dark_prob,
            ParamName::MisalignmentError => p.detector.misalignment_error,
            ParamName::Mu => p.protocol.mu,
            ParamName::Nu => p.protocol.nu,
            ParamName::FilterBandwidth => p.noise.filter_bandwidth_nm,
            ParamName::LeakageExtinction => p.noise.leakage_extinction,
            ParamName::FEc => p.protocol.f_ec,
        }
    }

    pub fn set(self, p: &mut SystemParams, v: f64) {
        match self {
            ParamName::Beta => p.noise.beta_per_km_nm = v,
            ParamName::Efficiency => p.detector.efficiency = v,
            ParamName::DarkProb => p.detector.dark_prob = v,
            ParamName::MisalignmentError => p.detector.misalignment_error = v,
            ParamName::Mu => p.protocol.mu = v,
            ParamName::Nu => p.protocol.nu = v,
            ParamName::FilterBandwidth => p.noise.filter_bandwidth_nm = v,
            ParamName::LeakageExtinction => p.noise.leakage_extinction = v,
            ParamName::FEc => p.protocol.f_ec = v,
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParamName::Beta => "beta",
            ParamName::Efficiency => "efficiency",
            ParamName::DarkProb => "dark_prob",
            ParamName::MisalignmentError => "misalignment_error",
            ParamName::Mu => "mu",
            ParamName::Nu => "nu",
            ParamName::FilterBandwidth => "filter_bandwidth",
            ParamName::LeakageExtinction => "leakage_extinction",
            ParamName::FEc => "f_ec",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParam {
    pub name: ParamName,
    pub lower: f64,
    pub upper: f64,
    /// Search in `log10` space; requires `lower > 0`.
    #[serde(default)]
    pub log_scale: bool,
}

impl FreeParam {
    pub fn new(name: ParamName, lower: f64, upper: f64, log_scale: bool) -> Self {
        FreeParam {
            name,
            lower,
            upper,
            log_scale,
        }
    }

    fn bounds(&self) -> (f64, f64) {
        if self.log_scale {
            (self.lower.log10(), self.upper.log10())
        } else {
            (self.lower, self.upper)
        }
    }

    /// Unbounded search coordinate to parameter value.
    fn decode(&self, u: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let s = 1.0 / (1.0 + (-u).exp());
        let v = lo + (hi - lo) * s;
        let x = if self.log_scale { 10f64.powf(v) } else { v };
        x.clamp(self.lower, self.upper)
    }

    fn encode(&self, x: f64) -> f64 {
        let (lo, hi) = self.bounds();
        let v = if self.log_scale { x.log10() } else { x };
        // keep off the asymptotes of the logistic
        let s = ((v - lo) / (hi - lo)).clamp(1e-9, 1.0 - 1e-9);
        (s / (1.0 - s)).ln()
    }
}

/// What to fit and how hard to try.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSpec {
    pub free: Vec<FreeParam>,
    /// Starting point; non-free entries stay fixed.
    pub start: SystemParams,
    /// Fiber template; each anchor substitutes its own length.
    pub link: FiberLink,
    /// Largest acceptable per-target relative error.
    pub tolerance: f64,
    pub max_evals: usize,
    pub seed: u64,
}

impl FitSpec {
    /// Default free set: Raman coefficient, detector efficiency, dark
    /// probability, misalignment and both intensities.
    pub fn standard(start: SystemParams) -> Self {
        FitSpec {
            free: vec![
                FreeParam::new(ParamName::Beta, 1e-14, 1e-9, true),
                FreeParam::new(ParamName::Efficiency, 0.05, 0.6, false),
                FreeParam::new(ParamName::DarkProb, 1e-8, 1e-3, true),
                FreeParam::new(ParamName::MisalignmentError, 1e-3, 0.1, false),
                FreeParam::new(ParamName::Mu, 0.1, 0.9, false),
                FreeParam::new(ParamName::Nu, 0.01, 0.3, false),
            ],
            start,
            link: FiberLink::default(),
            tolerance: 0.10,
            max_evals: 20_000,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(Error::config(
                "fit.free_params",
                "at least one free parameter is required",
            ));
        }
        for fp in &self.free {
            let ok = fp.lower.is_finite()
                && fp.upper.is_finite()
                && fp.lower < fp.upper
                && (!fp.log_scale || fp.lower > 0.0);
            if !ok {
                return Err(Error::config(
                    format!("fit.free_params.{}", fp.name),
                    format!("invalid bounds [{}, {}]", fp.lower, fp.upper),
                ));
            }
        }
        Ok(())
    }

    fn decode(&self, u: &[f64]) -> SystemParams {
        let mut p = self.start;
        for (fp, &ui) in self.free.iter().zip(u) {
            fp.name.set(&mut p, fp.decode(ui));
        }
        p
    }
}

/// Relative errors of one anchor against a parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorResidual {
    pub label: String,
    pub length_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_skr_bps: Option<f64>,
    pub sim_skr_bps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skr_rel_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_qber: Option<f64>,
    pub sim_qber: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qber_rel_error: Option<f64>,
    pub weight: f64,
}

impl AnchorResidual {
    /// Largest absolute relative error across this anchor's targets.
    pub fn worst(&self) -> f64 {
        self.skr_rel_error
            .unwrap_or(0.0)
            .abs()
            .max(self.qber_rel_error.unwrap_or(0.0).abs())
    }

    fn loss(&self) -> f64 {
        self.weight * (self.skr_rel_error.unwrap_or(0.0).powi(2) + self.qber_rel_error.unwrap_or(0.0).powi(2))
    }
}

pub fn anchor_residuals(params: &SystemParams, link: &FiberLink, anchors: &[Anchor]) -> Result<Vec<AnchorResidual>> {
    anchors
        .iter()
        .map(|a| {
            a.validate()?;
            let r = a.simulate(link, params)?;
            Ok(AnchorResidual {
                label: a.label.clone(),
                length_km: a.length_km,
                target_skr_bps: a.target_skr_bps,
                sim_skr_bps: r.skr_bps,
                skr_rel_error: a.target_skr_bps.map(|t| r.skr_bps / t - 1.0),
                target_qber: a.target_qber,
                sim_qber: r.qber,
                qber_rel_error: a.target_qber.map(|t| (r.qber - t) / t),
                weight: a.weight,
            })
        })
        .collect()
}

/// Weighted sum of squared relative errors over all anchor targets.
pub fn residual(params: &SystemParams, link: &FiberLink, anchors: &[Anchor]) -> Result<f64> {
    Ok(anchor_residuals(params, link, anchors)?
        .iter()
        .map(AnchorResidual::loss)
        .sum())
}

/// Outcome of a calibration run.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub params: SystemParams,
    pub residual: f64,
    pub start_residual: f64,
    pub evaluations: usize,
    pub stop: StopReason,
    /// Every target is within `tolerance` relative error.
    pub within_tolerance: bool,
    pub tolerance: f64,
    pub anchors: Vec<AnchorResidual>,
    pub seed: u64,
}

impl FitReport {
    /// The anchor with the largest relative error; it binds the fit.
    pub fn binding_anchor(&self) -> Option<&AnchorResidual> {
        self.anchors.iter().max_by(|a, b| a.worst().total_cmp(&b.worst()))
    }

    /// Residual table with one line per anchor, SKR in kb/s and QBER in %.
    pub fn table(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "residual {:.3e} (start {:.3e}) after {} evaluations, stop = {:?}, seed {}",
            self.residual, self.start_residual, self.evaluations, self.stop, self.seed
        );
        let _ = writeln!(
            out,
            "{:<22} {:>10} {:>10} {:>8} {:>7} {:>7} {:>8}",
            "anchor", "SKR kb/s", "sim", "err %", "QBER %", "sim", "err %"
        );
        let opt = |v: Option<f64>, scale: f64| v.map_or("-".to_string(), |v| format!("{:.3}", v * scale));
        for a in &self.anchors {
            let _ = writeln!(
                out,
                "{:<22} {:>10} {:>10.3} {:>8} {:>7} {:>7.3} {:>8}",
                a.label,
                opt(a.target_skr_bps, 1e-3),
                a.sim_skr_bps * 1e-3,
                opt(a.skr_rel_error, 100.0),
                opt(a.target_qber, 100.0),
                a.sim_qber * 100.0,
                opt(a.qber_rel_error, 100.0),
            );
        }
        if self.within_tolerance {
            let _ = writeln!(out, "all targets within {}%", self.tolerance * 100.0);
        } else if let Some(b) = self.binding_anchor() {
            let _ = writeln!(
                out,
                "tolerance {}% not met; binding anchor {} at {:.2}%",
                self.tolerance * 100.0,
                b.label,
                b.worst() * 100.0
            );
        }
        out
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

/// Fit `spec.free` to `anchors`.
pub fn fit(spec: &FitSpec, anchors: &[Anchor]) -> Result<FitReport> {
    if anchors.is_empty() {
        return Err(Error::config("anchors", "at least one anchor is required"));
    }
    spec.validate()?;
    for a in anchors {
        a.validate()?;
    }
    // clamp the start into the box before measuring it
    let u0: Vec<f64> = spec.free.iter().map(|fp| fp.encode(fp.name.get(&spec.start))).collect();
    let start_params = spec.decode(&u0);
    let start_residual = residual(&start_params, &spec.link, anchors)?;

    let objective = |u: &[f64]| -> f64 {
        let p = spec.decode(u);
        if p.validate().is_err() {
            return f64::INFINITY;
        }
        residual(&p, &spec.link, anchors).unwrap_or(f64::INFINITY)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let steps: Vec<f64> = (0..u0.len())
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * rng.random_range(0.4..0.8)
        })
        .collect();

    let options = NelderMeadOptions {
        max_evals: spec.max_evals,
        ..NelderMeadOptions::default()
    };
    let outcome = minimize(objective, &u0, &steps, &options);
    // the simplex keeps the start vertex, so this only guards against NaN plumbing
    let (u_best, best) = if outcome.value <= start_residual {
        (outcome.point, outcome.value)
    } else {
        (u0, start_residual)
    };
    let params = spec.decode(&u_best);
    let table = anchor_residuals(&params, &spec.link, anchors)?;
    let within_tolerance = table.iter().all(|a| a.worst() <= spec.tolerance);
    Ok(FitReport {
        params,
        residual: best,
        start_residual,
        evaluations: outcome.evaluations,
        stop: outcome.stop,
        within_tolerance,
        tolerance: spec.tolerance,
        anchors: table,
        seed: spec.seed,
    })
}

/// Independent fits from several seeds, merged by lowest residual.
/// Ties keep the earlier seed.
pub fn fit_restarts(spec: &FitSpec, anchors: &[Anchor], seeds: &[u64]) -> Result<FitReport> {
    let reports: Vec<FitReport> = seeds
        .par_iter()
        .map(|&seed| fit(&FitSpec { seed, ..spec.clone() }, anchors))
        .collect::<Result<_>>()?;
    reports
        .into_iter()
        .reduce(|best, r| if r.residual < best.residual { r } else { best })
        .ok_or_else(|| Error::config("seeds", "at least one seed is required"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitSummary {
    residual: f64,
    start_residual: f64,
    evaluations: usize,
    stop: StopReason,
    tolerance: f64,
    within_tolerance: bool,
    binding_anchor: String,
    seed: u64,
}

/// On-disk form of a fitted parameter set with its residual table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedParamsFile {
    pub params: SystemParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fit: Option<FitSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<AnchorResidual>,
}

impl FittedParamsFile {
    pub fn from_report(report: &FitReport) -> Self {
        FittedParamsFile {
            params: report.params,
            fit: Some(FitSummary {
                residual: report.residual,
                start_residual: report.start_residual,
                evaluations: report.evaluations,
                stop: report.stop,
                tolerance: report.tolerance,
                within_tolerance: report.within_tolerance,
                binding_anchor: report.binding_anchor().map(|a| a.label.clone()).unwrap_or_default(),
                seed: report.seed,
            }),
            anchors: report.anchors.clone(),
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let file: FittedParamsFile = toml::from_str(text).map_err(|e| Error::Parse {
            file: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        file.params
            .validate()
            .map_err(|e| Error::config("params", e.to_string()))?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        FittedParamsFile::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        let body = toml::to_string(self).expect("fitted parameter file serializes");
        format!(
            "# Fitted system parameters. Generated by `qkd-coexistence calibrate`.\n\
             # The [[anchors]] table records target and simulated values per anchor.\n\n{body}"
        )
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn within_tolerance(&self) -> Option<bool> {
        self.fit.as_ref().map(|f| f.within_tolerance)
    }
}

/// The fitted parameters shipped with the crate.
pub fn shipped_params() -> SystemParams {
    FittedParamsFile::parse(SHIPPED_PARAMS, Path::new("config/fitted_params.toml"))
        .expect("shipped fitted parameters are valid")
        .params
}
