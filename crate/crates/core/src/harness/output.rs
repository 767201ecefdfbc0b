//! CSV artifacts.

use std::path::Path;

use crate::error::Result;
use crate::monitor::LyapunovSample;
use crate::solver::BoundaryRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub t: f64,
    pub z: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorRow {
    pub sample: LyapunovSample,
    pub d_norm: f64,
    pub dss_rhs: Option<f64>,
    pub dss_slack: Option<f64>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

/// Columns `t,z,X1..Xn`.
pub fn write_field_csv(path: &Path, n: usize, rows: &[FieldRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = ["t".to_string(), "z".to_string()].into_iter().chain(indexed("X", n)).collect();
    w.write_record(&header)?;
    for r in rows {
        let rec: Vec<String> = [num(r.t), num(r.z)].into_iter().chain(r.x.iter().copied().map(num)).collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t,X1(1)..,eta..,u..,d..`.
pub fn write_boundary_csv(path: &Path, n: usize, m: usize, rows: &[BoundaryRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("X{i}_1")))
        .chain(indexed("eta", n))
        .chain(indexed("u", m))
        .chain(indexed("d", n))
        .collect();
    w.write_record(&header)?;
    for r in rows {
        let rec: Vec<String> = std::iter::once(num(r.t))
            .chain(r.x1.iter().chain(&r.eta).chain(&r.u).chain(&r.d).copied().map(num))
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub const MONITOR_HEADER: [&str; 11] = [
    "t", "V1", "V2", "V3", "V", "maxnorm", "d_norm", "in_SM", "in_SDelta", "dss_rhs", "dss_slack",
];

pub fn write_monitor_csv(path: &Path, rows: &[MonitorRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MONITOR_HEADER)?;
    for r in rows {
        let s = &r.sample;
        w.write_record([
            num(s.t),
            num(s.v1),
            num(s.v2),
            num(s.v3),
            num(s.v),
            num(s.maxnorm),
            num(r.d_norm),
            u8::from(s.in_sm).to_string(),
            u8::from(s.in_sdelta).to_string(),
            opt(r.dss_rhs),
            opt(r.dss_slack),
        ])?;
    }
    w.flush()?;
    Ok(())
}
