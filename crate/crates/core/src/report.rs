//! Output formats: per-run raw series, summaries, event logs, CDFs and sweep tables.
//!
//! Everything here works on byte buffers; writing to disk is the caller's job.

use crate::config::SweepPoint;
use crate::controller::EventRecord;
use crate::engine::RunConfig;
use crate::error::{Error, Result};
use crate::handover::Policy;
use crate::metrics::{MetricsRecord, RawRecord};
use serde::{Deserialize, Serialize};

pub const RAW_FILE: &str = "raw.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CDF_FILE: &str = "gbr_cdf.csv";

pub fn raw_csv(raw: &[RawRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in raw {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Parses a `raw.csv` document. Errors carry the offending record's line.
pub fn parse_raw_csv(bytes: &[u8]) -> Result<Vec<RawRecord>> {
    let mut rd = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        let r: RawRecord = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse(format!("raw.csv line {line}: {e}"))
        })?;
        out.push(r);
    }
    Ok(out)
}

fn pretty_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn summary_json(m: &MetricsRecord) -> Result<Vec<u8>> {
    pretty_json(m)
}

pub fn parse_summary_json(bytes: &[u8]) -> Result<MetricsRecord> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("summary.json: {e}")))
}

pub fn events_jsonl(events: &[EventRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for ev in events {
        serde_json::to_writer(&mut out, ev).map_err(|e| Error::Io(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Parses one JSON event per line; blank lines are skipped.
pub fn parse_event_log(text: &str) -> Result<Vec<EventRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("events.jsonl line {}: {e}", i + 1))))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CdfRow {
    rate_bps: f64,
    cumulative_fraction: f64,
}

pub fn cdf_csv(cdf: &[(f64, f64)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for &(rate_bps, cumulative_fraction) in cdf {
        w.serialize(CdfRow { rate_bps, cumulative_fraction }).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Reads a CDF file back and checks it is sorted, non-decreasing and ends at one.
pub fn validate_cdf_csv(bytes: &[u8]) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_reader(bytes);
    let mut rows = Vec::new();
    for rec in rd.deserialize() {
        let r: CdfRow = rec.map_err(|e| Error::Parse(format!("cdf: {e}")))?;
        rows.push((r.rate_bps, r.cumulative_fraction));
    }
    for w in rows.windows(2) {
        if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
            return Err(Error::Parse(format!("cdf not monotone at rate {}", w[1].0)));
        }
    }
    match rows.last() {
        None => Ok(rows),
        Some(&(_, f)) if (f - 1.0).abs() < 1e-12 => Ok(rows),
        Some(&(_, f)) => Err(Error::Parse(format!("cdf ends at {f}, not 1"))),
    }
}

/// Directory name of one run inside the output directory.
pub fn run_id(point: &SweepPoint, policy: Policy, seed: u64) -> String {
    let doa = match point.doa {
        Some(d) => format!("doa{d}"),
        None => "uniform".into(),
    };
    format!("{policy}_n{}_{doa}_gbr{}_seed{seed}", point.num_users, point.gbr_fraction)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub status: RunStatus,
    pub error: Option<String>,
    pub files: Vec<String>,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        pretty_json(self)
    }
}

/// Top-level record of a sweep; written after every run so a failure leaves
/// an accurate account of what finished.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub planned_runs: usize,
    pub runs: Vec<SweepRunEntry>,
    pub summary_files: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRunEntry {
    pub run_id: String,
    pub status: RunStatus,
    pub error: Option<String>,
}

impl SweepManifest {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        pretty_json(self)
    }
}

pub fn comparison_json(c: &crate::engine::Comparison) -> Result<Vec<u8>> {
    pretty_json(c)
}

/// Relative improvement of `a` over `b`; undefined when `b` is zero.
pub fn improvement(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| (a - b) / b)
}

/// Seed-averaged figures for one policy at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: Policy,
    pub num_users: usize,
    pub doa: Option<f64>,
    pub gbr_fraction: f64,
    pub seeds: usize,
    pub avg_gbr_rate_bps: f64,
    pub edge_aggregate_bps: f64,
    pub outage_fraction: f64,
    pub system_throughput_bps: f64,
    pub http_rate_bps: f64,
    pub ftp_rate_bps: f64,
    pub handovers: f64,
    pub gbr_vs_qos_aware: Option<f64>,
    pub gbr_vs_max_rsrq: Option<f64>,
    pub edge_vs_qos_aware: Option<f64>,
    pub edge_vs_max_rsrq: Option<f64>,
}

/// Averages each (point, policy) group over its seeds and fills the
/// improvement columns against the baselines at the same point.
pub fn summarize(groups: &[(SweepPoint, Policy, Vec<MetricsRecord>)]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = groups
        .iter()
        .filter(|(_, _, ms)| !ms.is_empty())
        .map(|(p, policy, ms)| {
            let n = ms.len() as f64;
            let mean = |f: fn(&MetricsRecord) -> f64| ms.iter().map(f).sum::<f64>() / n;
            SummaryRow {
                policy: *policy,
                num_users: p.num_users,
                doa: p.doa,
                gbr_fraction: p.gbr_fraction,
                seeds: ms.len(),
                avg_gbr_rate_bps: mean(|m| m.avg_gbr_rate_bps),
                edge_aggregate_bps: mean(|m| m.edge_aggregate_bps),
                outage_fraction: mean(|m| m.outage_fraction),
                system_throughput_bps: mean(|m| m.system_throughput_bps),
                http_rate_bps: mean(|m| m.http_rate_bps),
                ftp_rate_bps: mean(|m| m.ftp_rate_bps),
                handovers: mean(|m| m.handovers as f64),
                gbr_vs_qos_aware: None,
                gbr_vs_max_rsrq: None,
                edge_vs_qos_aware: None,
                edge_vs_max_rsrq: None,
            }
        })
        .collect();
    let same_point = |a: &SummaryRow, b: &SummaryRow| {
        a.num_users == b.num_users && a.doa == b.doa && a.gbr_fraction == b.gbr_fraction
    };
    let snapshot = rows.clone();
    for r in &mut rows {
        let find = |p: Policy, r: &SummaryRow| snapshot.iter().find(|b| b.policy == p && same_point(b, r));
        if let Some(b) = find(Policy::QosAware, r) {
            r.gbr_vs_qos_aware = improvement(r.avg_gbr_rate_bps, b.avg_gbr_rate_bps);
            r.edge_vs_qos_aware = improvement(r.edge_aggregate_bps, b.edge_aggregate_bps);
        }
        if let Some(b) = find(Policy::MaxRsrq, r) {
            r.gbr_vs_max_rsrq = improvement(r.avg_gbr_rate_bps, b.avg_gbr_rate_bps);
            r.edge_vs_max_rsrq = improvement(r.edge_aggregate_bps, b.edge_aggregate_bps);
        }
    }
    rows
}

pub fn summary_table_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn summary_table_json(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    pretty_json(&rows)
}

pub fn parse_summary_table_csv(bytes: &[u8]) -> Result<Vec<SummaryRow>> {
    let mut rd = csv::Reader::from_reader(bytes);
    rd.deserialize().map(|r| r.map_err(|e| Error::Parse(format!("summary table: {e}")))).collect()
}
