//! Per-period raw series and the figures derived from them.

use crate::ids::{CellId, UserId};
use crate::topology::{NgbrApp, UserKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Average rate below which a GBR user counts as in outage.
pub const OUTAGE_THRESHOLD_BPS: f64 = 90_000.0;
/// Share of GBR users, lowest rates first, that make up the edge set.
pub const EDGE_FRACTION: f64 = 0.4;

/// One user in one LB period. This is the row format of `raw.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub period: u64,
    pub user: UserId,
    pub cell: CellId,
    pub kind: UserKind,
    pub app: Option<NgbrApp>,
    /// Whether the bearer had a backhaul path during the period.
    pub admitted: bool,
    /// Bits the access scheduler delivered.
    pub access_bits: u64,
    /// Bits that made it through the backhaul meters.
    pub served_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserRate {
    pub user: UserId,
    pub kind: UserKind,
    pub app: Option<NgbrApp>,
    pub rate_bps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub measured_periods: u64,
    pub num_gbr: usize,
    pub num_ngbr: usize,
    pub avg_gbr_rate_bps: f64,
    pub edge_count: usize,
    pub edge_aggregate_bps: f64,
    pub outage_fraction: f64,
    pub system_throughput_bps: f64,
    pub http_rate_bps: f64,
    pub ftp_rate_bps: f64,
    pub handovers: u64,
    pub user_rates: Vec<UserRate>,
    /// CDF of GBR users' mean rates.
    pub gbr_cdf: Vec<(f64, f64)>,
}

/// Derives every metric from the raw series. Periods before `warmup` are skipped.
pub fn compute_metrics(raw: &[RawRecord], warmup: u64, period_s: f64) -> MetricsRecord {
    struct Acc {
        kind: UserKind,
        app: Option<NgbrApp>,
        bits: u64,
        periods: u64,
    }
    let mut per_user: BTreeMap<UserId, Acc> = BTreeMap::new();
    let mut last_cell: BTreeMap<UserId, CellId> = BTreeMap::new();
    let mut handovers = 0;
    let mut periods = std::collections::BTreeSet::new();
    let mut sorted: Vec<&RawRecord> = raw.iter().collect();
    sorted.sort_by_key(|r| (r.period, r.user));
    for r in sorted {
        if let Some(prev) = last_cell.insert(r.user, r.cell) {
            if prev != r.cell && r.period >= warmup {
                handovers += 1;
            }
        }
        let a = per_user.entry(r.user).or_insert(Acc { kind: r.kind, app: r.app, bits: 0, periods: 0 });
        if r.period >= warmup {
            a.bits += r.served_bits;
            a.periods += 1;
            periods.insert(r.period);
        }
    }
    let user_rates: Vec<UserRate> = per_user
        .iter()
        .map(|(&user, a)| UserRate {
            user,
            kind: a.kind,
            app: a.app,
            rate_bps: if a.periods == 0 { 0.0 } else { a.bits as f64 / (a.periods as f64 * period_s) },
        })
        .collect();
    let mut gbr: Vec<f64> = user_rates.iter().filter(|u| u.kind == UserKind::Gbr).map(|u| u.rate_bps).collect();
    gbr.sort_by(f64::total_cmp);
    let num_gbr = gbr.len();
    let edge_count = (EDGE_FRACTION * num_gbr as f64 + 1e-9).floor() as usize;
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let class_sum = |app| user_rates.iter().filter(|u| u.app == Some(app)).map(|u| u.rate_bps).sum::<f64>();
    MetricsRecord {
        measured_periods: periods.len() as u64,
        num_gbr,
        num_ngbr: user_rates.len() - num_gbr,
        avg_gbr_rate_bps: mean(&gbr),
        edge_count,
        edge_aggregate_bps: gbr[..edge_count].iter().sum(),
        outage_fraction: if num_gbr == 0 {
            0.0
        } else {
            gbr.iter().filter(|&&r| r < OUTAGE_THRESHOLD_BPS).count() as f64 / num_gbr as f64
        },
        system_throughput_bps: user_rates.iter().map(|u| u.rate_bps).sum(),
        http_rate_bps: class_sum(NgbrApp::Http),
        ftp_rate_bps: class_sum(NgbrApp::Ftp),
        handovers,
        gbr_cdf: rate_cdf(&gbr),
        user_rates,
    }
}

/// Empirical CDF as (rate, fraction of users at or below rate) steps,
/// starting with a zero row at the lowest rate.
pub fn rate_cdf(rates: &[f64]) -> Vec<(f64, f64)> {
    let mut r: Vec<f64> = rates.to_vec();
    r.sort_by(f64::total_cmp);
    let Some(&first) = r.first() else {
        return Vec::new();
    };
    let n = r.len() as f64;
    let mut out = vec![(first, 0.0)];
    for (k, &x) in r.iter().enumerate() {
        let f = (k + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x && k > 0 => last.1 = f,
            _ => out.push((x, f)),
        }
    }
    out
}
