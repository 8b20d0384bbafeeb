//! Plot-ready CSV output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::timeseries::TimeseriesSample;
use crate::error::{Error, Result};
use crate::qkd::Diagnostics;
use crate::simulate::CoexistenceResult;

pub const CSV_HEADER: [&str; 10] = [
    "length_km",
    "p_wdm_dbm",
    "n_channels",
    "skr_bps",
    "qber",
    "ce",
    "forward_raman_mw",
    "loss_q_db",
    "loss_c_db",
    "flags",
];

pub const TIMESERIES_HEADER: [&str; 4] = ["t_s", "skr_bps", "qber", "flags"];

/// Six significant digits, `%g` style: fixed notation for decimal exponents
/// in [-4, 6), scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One parsed row of a results CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub length_km: f64,
    pub p_wdm_dbm: f64,
    pub n_channels: usize,
    pub skr_bps: f64,
    pub qber: f64,
    pub ce: f64,
    pub forward_raman_mw: f64,
    pub loss_q_db: f64,
    pub loss_c_db: f64,
    pub flags: Diagnostics,
}

fn record(r: &CoexistenceResult) -> [String; 10] {
    [
        format_sig(r.length_km),
        format_sig(r.p_wdm.0),
        r.n_channels.to_string(),
        format_sig(r.skr_bps),
        format_sig(r.qber),
        format_sig(r.ce),
        format_sig(r.noise.forward_raman.value()),
        format_sig(r.loss_quantum_db),
        format_sig(r.loss_classical_db),
        r.flags.to_string(),
    ]
}

/// Write results to any sink.
pub fn write_csv<W: Write>(results: &[CoexistenceResult], sink: W) -> Result<()> {
    if results.is_empty() {
        return Err(Error::domain("no results to write"));
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in results {
        w.write_record(record(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Write results to `path`, one row each, preceded by the header.
pub fn emit_csv(results: &[CoexistenceResult], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(results, file)
}

pub fn write_timeseries_csv<W: Write>(samples: &[TimeseriesSample], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TIMESERIES_HEADER)?;
    for s in samples {
        w.write_record([
            format_sig(s.t),
            format_sig(s.skr_bps),
            format_sig(s.qber),
            s.flags.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn emit_timeseries_csv(samples: &[TimeseriesSample], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_timeseries_csv(samples, file)
}

/// Parse a results CSV written by [`emit_csv`].
pub fn read_csv<R: Read>(source: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(source);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::domain(format!(
            "unexpected CSV header `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::domain(format!("column {}: `{}` is not a number", CSV_HEADER[i], &rec[i])))
        };
        rows.push(CsvRow {
            length_km: num(0)?,
            p_wdm_dbm: num(1)?,
            n_channels: rec[2]
                .parse()
                .map_err(|_| Error::domain(format!("column n_channels: `{}` is not a count", &rec[2])))?,
            skr_bps: num(3)?,
            qber: num(4)?,
            ce: num(5)?,
            forward_raman_mw: num(6)?,
            loss_q_db: num(7)?,
            loss_c_db: num(8)?,
            flags: Diagnostics::parse(&rec[9])?,
        });
    }
    Ok(rows)
}
