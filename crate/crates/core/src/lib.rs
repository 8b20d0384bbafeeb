//! Simulator for a decoy-state BB84 quantum channel at 1310 nm sharing a
//! standard single-mode fiber with a C-band DWDM comb.
//!
//! The model chains a link budget ([`optics`]), spontaneous Raman noise from
//! the comb ([`raman`]), decoy-state key-rate statistics ([`qkd`]) and the
//! co-propagation efficiency metric ([`simulate`]). Unpublished physical
//! parameters are fitted to measured anchors by [`calibration`], and
//! [`scenario`] runs configured points, sweeps and time series and writes CSV.

// negated comparisons double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod optics;
pub mod qkd;
pub mod raman;
pub mod scenario;
pub mod simulate;

pub use error::{Error, Result};
pub use optics::{build_reference_comb, Band, CombFill, FiberLink, PowerDbm, PowerMw, WdmComb};
pub use qkd::{DetectorParams, ProtocolParams};
pub use scenario::{emit_csv, run_scenario, run_sweep, run_timeseries, ScenarioConfig};
pub use simulate::{compute_ce, simulate_point, CoexistenceResult, NoiseSettings, SystemParams};
