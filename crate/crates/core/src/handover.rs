//! Handover policies and the exhaustive association oracle.
//!
//! Three policies are provided: the proposed gain-based policy (access and
//! backhaul aware), a fairness-only QoS-aware baseline and the A2/A4
//! Max-RSRQ baseline. Decisions are pure functions of the inputs.

use crate::error::{Error, Result};
use crate::ids::{CellId, UserId};
use crate::load::{jain_fairness, multiuser_diversity_gain, ngbr_rate, objective, GbrUsage, Load, LoadLedger};
use crate::radio::db_to_linear;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Proposed,
    #[serde(alias = "qos-aware")]
    QosAware,
    #[serde(alias = "max-rsrq")]
    MaxRsrq,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Proposed, Policy::QosAware, Policy::MaxRsrq];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Proposed => "proposed",
            Policy::QosAware => "qos_aware",
            Policy::MaxRsrq => "max_rsrq",
        }
    }

    /// Whether the policy sees backhaul capacity.
    pub fn backhaul_aware(self) -> bool {
        self == Policy::Proposed
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "proposed" => Ok(Policy::Proposed),
            "qos_aware" => Ok(Policy::QosAware),
            "max_rsrq" => Ok(Policy::MaxRsrq),
            _ => Err(Error::Config(format!("unknown policy {s:?} (valid: proposed, qos_aware, max_rsrq)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandoverConfig {
    pub policy: Policy,
    pub delta_gbr: f64,
    pub hysteresis_db: f64,
    pub rsrq_thresh_db: f64,
    pub lb_period_s: f64,
}

impl Default for HandoverConfig {
    fn default() -> Self {
        Self { policy: Policy::Proposed, delta_gbr: 0.002, hysteresis_db: 1.0, rsrq_thresh_db: 25.0, lb_period_s: 1.0 }
    }
}

impl HandoverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_gbr >= 0.0 && self.delta_gbr.is_finite()) {
            return Err(Error::Config(format!("handover.delta_gbr = {} must be >= 0", self.delta_gbr)));
        }
        if !(self.lb_period_s > 0.0 && self.lb_period_s.is_finite()) {
            return Err(Error::Config(format!("handover.lb_period_s = {} must be > 0", self.lb_period_s)));
        }
        if !self.hysteresis_db.is_finite() || !self.rsrq_thresh_db.is_finite() {
            return Err(Error::Config("handover thresholds must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportKind {
    A2,
    A4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub user: UserId,
    pub serving: CellId,
    pub serving_rsrq: f64,
    pub neighbor_rsrq: BTreeMap<CellId, f64>,
    pub report_kind: Option<ReportKind>,
}

impl MeasurementReport {
    /// Builds a report from RSRQ values of every cell (dB, indexed by cell).
    pub fn new(user: UserId, serving: CellId, neighbors: &BTreeSet<CellId>, rsrq_db: &[f64], thresh: f64) -> Self {
        let serving_rsrq = rsrq_db[serving.index()];
        let neighbor_rsrq: BTreeMap<CellId, f64> = neighbors.iter().map(|&c| (c, rsrq_db[c.index()])).collect();
        let report_kind = if serving_rsrq < thresh {
            Some(ReportKind::A2)
        } else if neighbor_rsrq.values().any(|&r| r > thresh) {
            Some(ReportKind::A4)
        } else {
            None
        };
        Self { user, serving, serving_rsrq, neighbor_rsrq, report_kind }
    }

    pub fn rsrq(&self, cell: CellId) -> Option<f64> {
        if cell == self.serving {
            Some(self.serving_rsrq)
        } else {
            self.neighbor_rsrq.get(&cell).copied()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    GainBelowThreshold,
    AdmissionRejected,
    NoCandidate,
    Accepted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandoverDecision {
    pub user: UserId,
    pub source: CellId,
    pub target: Option<CellId>,
    pub gain: Option<f64>,
    pub reason: Reason,
}

impl HandoverDecision {
    fn reject(user: UserId, source: CellId, gain: Option<f64>, reason: Reason) -> Self {
        Self { user, source, target: None, gain, reason }
    }

    fn accept(user: UserId, source: CellId, target: CellId, gain: Option<f64>) -> Self {
        Self { user, source, target: Some(target), gain, reason: Reason::Accepted }
    }
}

/// Spectral efficiency a BS infers for a cell from a reported RSRQ.
pub fn eta_from_rsrq(rsrq_db: f64) -> f64 {
    (1.0 + db_to_linear(rsrq_db)).log2()
}

/// Usage and load of a GBR user after moving to `target`, as the serving
/// BS can estimate it: used RBs scale with the linear RSRQ ratio.
pub fn estimate_target_load(
    usage: &GbrUsage,
    rsrq_source_db: f64,
    rsrq_target_db: f64,
    target: CellId,
    ledger: &LoadLedger,
) -> (GbrUsage, Load) {
    let lin_s = db_to_linear(rsrq_source_db);
    let lin_t = db_to_linear(rsrq_target_db);
    let mut est = ledger.usage_at(target, usage.demand_bps, eta_from_rsrq(rsrq_target_db));
    est.used_rbs = if lin_t > 0.0 { usage.used_rbs.map(|w| w * lin_s / lin_t) } else { Load::Unservable };
    let load = est.load(&ledger.cells[target.index()]);
    (est, load)
}

/// Objective ratio after/before moving a user whose load is `rho_src` at
/// `source` and `rho_tgt` at `target`. `None` when the objective is not
/// positive before or after (no load, or average load reaching one).
pub fn gbr_handover_gain(
    cell_loads: &[f64],
    source: CellId,
    target: CellId,
    rho_src: f64,
    rho_tgt: f64,
) -> Option<f64> {
    let (i, c) = (source.index(), target.index());
    if i == c || i >= cell_loads.len() || c >= cell_loads.len() {
        return None;
    }
    let m = cell_loads.len() as f64;
    let x: f64 = cell_loads.iter().sum();
    let y: f64 = cell_loads.iter().map(|r| r * r).sum();
    let delta = rho_tgt - rho_src;
    // Same summation order as y, so an unchanged state gives exactly 1.
    let z: f64 = cell_loads
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let r = if k == i {
                r - rho_src
            } else if k == c {
                r + rho_tgt
            } else {
                r
            };
            r * r
        })
        .sum();
    if x <= 0.0 || x >= m || x + delta >= m || z <= 0.0 {
        return None;
    }
    let xd = x + delta;
    Some((y * xd * xd * (m - x - delta)) / (z * x * x * (m - x)))
}

/// Access admission at the target: `min(w_AC, w_BH) − w_used ≥ w_required`.
pub fn admit_gbr(net_rbs: f64, used_total: f64, required: f64) -> bool {
    net_rbs - used_total >= required
}

/// Backhaul figures a BS holds for its neighbours (from controller notifications).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BackhaulView {
    pub residual_bps: BTreeMap<CellId, u64>,
}

/// Proposed policy for a GBR user.
pub fn decide_gbr(
    report: &MeasurementReport,
    neighbors: &BTreeSet<CellId>,
    ledger: &LoadLedger,
    backhaul: Option<&BackhaulView>,
    cfg: &HandoverConfig,
) -> HandoverDecision {
    let (user, source) = (report.user, report.serving);
    let reject = |gain, reason| HandoverDecision::reject(user, source, gain, reason);
    let Some(usage) = ledger.gbr.get(&user) else {
        return reject(None, Reason::NoCandidate);
    };
    let Some(loads) = ledger.report().finite_cell_loads() else {
        return reject(None, Reason::NoCandidate);
    };
    let Some(rho_src) = usage.load(&ledger.cells[source.index()]).value() else {
        return reject(None, Reason::NoCandidate);
    };
    let mut best: Option<(CellId, f64, GbrUsage)> = None;
    let mut best_any: Option<f64> = None;
    for &c in neighbors {
        let Some(rsrq_c) = report.rsrq(c) else { continue };
        let (est, load) = estimate_target_load(usage, report.serving_rsrq, rsrq_c, c, ledger);
        let Some(rho_tgt) = load.value() else { continue };
        let Some(g) = gbr_handover_gain(&loads, source, c, rho_src, rho_tgt) else { continue };
        best_any = Some(best_any.map_or(g, |b: f64| b.max(g)));
        if g > 1.0 + cfg.delta_gbr && best.as_ref().is_none_or(|b| g > b.1) {
            best = Some((c, g, est));
        }
    }
    let Some((k, g, est)) = best else {
        let reason = if best_any.is_some() { Reason::GainBelowThreshold } else { Reason::NoCandidate };
        return reject(best_any, reason);
    };
    let used_k = ledger.used_total(k).value().unwrap_or(f64::INFINITY);
    let required = est.used_rbs.value().unwrap_or(f64::INFINITY);
    let access_ok = admit_gbr(ledger.net(&est), used_k, required);
    let backhaul_ok = backhaul.is_none_or(|b| b.residual_bps.get(&k).is_some_and(|&r| usage.demand_bps <= r as f64));
    if access_ok && backhaul_ok {
        HandoverDecision::accept(user, source, k, Some(g))
    } else {
        reject(Some(g), Reason::AdmissionRejected)
    }
}

/// Per-cell inputs of the NGBR handover condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NgbrCellState {
    /// RBs left after GBR usage.
    pub residual_rbs: f64,
    /// NGBR users currently served.
    pub n_ngbr: usize,
}

/// Left side of the NGBR condition for a candidate target.
pub fn ngbr_target_score(rsrq_db: f64, cell: &NgbrCellState) -> f64 {
    let n = cell.n_ngbr + 1;
    db_to_linear(rsrq_db) * (cell.residual_rbs / n as f64) * multiuser_diversity_gain(n)
}

/// Right side for the serving cell; a lone user compares against the full residual.
pub fn ngbr_source_score(rsrq_db: f64, cell: &NgbrCellState) -> f64 {
    let lin = db_to_linear(rsrq_db);
    if cell.n_ngbr <= 1 {
        return lin * cell.residual_rbs;
    }
    let n = cell.n_ngbr - 1;
    lin * (cell.residual_rbs / n as f64) * multiuser_diversity_gain(n)
}

/// Proposed policy for an NGBR user: move to the neighbour with the largest
/// target score if it beats the serving score; ties stay.
pub fn decide_ngbr(
    report: &MeasurementReport,
    neighbors: &BTreeSet<CellId>,
    cells: &[NgbrCellState],
) -> HandoverDecision {
    let (user, source) = (report.user, report.serving);
    let rhs = ngbr_source_score(report.serving_rsrq, &cells[source.index()]);
    let mut best: Option<(CellId, f64)> = None;
    for &c in neighbors {
        let Some(r) = report.rsrq(c) else { continue };
        let lhs = ngbr_target_score(r, &cells[c.index()]);
        if best.is_none_or(|b| lhs > b.1) {
            best = Some((c, lhs));
        }
    }
    match best {
        None => HandoverDecision::reject(user, source, None, Reason::NoCandidate),
        Some((k, lhs)) if lhs > rhs => HandoverDecision::accept(user, source, k, Some(lhs / rhs)),
        Some((_, lhs)) => {
            let g = if rhs > 0.0 { Some(lhs / rhs) } else { None };
            HandoverDecision::reject(user, source, g, Reason::GainBelowThreshold)
        }
    }
}

/// A2/A4 Max-RSRQ with hysteresis.
pub fn decide_max_rsrq(
    report: &MeasurementReport,
    neighbors: &BTreeSet<CellId>,
    cfg: &HandoverConfig,
) -> HandoverDecision {
    let (user, source) = (report.user, report.serving);
    let best = neighbors
        .iter()
        .filter_map(|&c| report.rsrq(c).map(|r| (c, r)))
        .fold(None::<(CellId, f64)>, |b, (c, r)| if b.is_none_or(|b| r > b.1) { Some((c, r)) } else { b });
    let Some((k, r_k)) = best else {
        return HandoverDecision::reject(user, source, None, Reason::NoCandidate);
    };
    let r_i = report.serving_rsrq;
    let t = cfg.rsrq_thresh_db;
    if r_k > r_i + cfg.hysteresis_db && (r_k > t || r_i < t) {
        HandoverDecision::accept(user, source, k, None)
    } else {
        HandoverDecision::reject(user, source, None, Reason::GainBelowThreshold)
    }
}

/// Fairness-only baseline for GBR users: move to the neighbour that gives
/// the highest Jain index, if that beats the current index and the target
/// has access resources.
pub fn decide_qos_aware(
    report: &MeasurementReport,
    neighbors: &BTreeSet<CellId>,
    ledger: &LoadLedger,
) -> HandoverDecision {
    let (user, source) = (report.user, report.serving);
    let reject = |gain, reason| HandoverDecision::reject(user, source, gain, reason);
    let (Some(usage), Some(loads)) = (ledger.gbr.get(&user), ledger.report().finite_cell_loads()) else {
        return reject(None, Reason::NoCandidate);
    };
    let Some(rho_src) = usage.load(&ledger.cells[source.index()]).value() else {
        return reject(None, Reason::NoCandidate);
    };
    let xi_old = jain_fairness(&loads);
    let mut best: Option<(CellId, f64, GbrUsage)> = None;
    for &c in neighbors {
        let Some(r) = report.rsrq(c) else { continue };
        let (est, load) = estimate_target_load(usage, report.serving_rsrq, r, c, ledger);
        let Some(rho_tgt) = load.value() else { continue };
        let mut after = loads.clone();
        after[source.index()] -= rho_src;
        after[c.index()] += rho_tgt;
        let xi = jain_fairness(&after);
        if best.as_ref().is_none_or(|b| xi > b.1) {
            best = Some((c, xi, est));
        }
    }
    let Some((k, xi_new, est)) = best else {
        return reject(None, Reason::NoCandidate);
    };
    let ratio = Some(xi_new / xi_old);
    if xi_new <= xi_old {
        return reject(ratio, Reason::GainBelowThreshold);
    }
    let used_k = ledger.used_total(k).value().unwrap_or(f64::INFINITY);
    if admit_gbr(ledger.net(&est), used_k, est.used_rbs.value().unwrap_or(f64::INFINITY)) {
        HandoverDecision::accept(user, source, k, ratio)
    } else {
        reject(ratio, Reason::AdmissionRejected)
    }
}

/// Frozen snapshot the exhaustive search runs over.
#[derive(Clone, Debug)]
pub struct OracleInput {
    pub ledger_template: LoadLedger,
    /// For each GBR user, its usage at every cell (indexed by cell).
    pub gbr: Vec<(UserId, Vec<GbrUsage>)>,
    /// For each NGBR user, its spectral efficiency at every cell.
    pub ngbr: Vec<(UserId, Vec<f64>)>,
    /// GBR backhaul capacity per cell, for the per-cell demand constraint.
    pub gbr_backhaul_bps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub assoc: BTreeMap<UserId, CellId>,
    pub objective: f64,
    /// False when no assignment satisfied the capacity constraints and the
    /// best unconstrained one was returned.
    pub feasible: bool,
}

pub const DEFAULT_ORACLE_BUDGET: u64 = 2_000_000;

/// Per-cell loads for a full GBR assignment (`choice[u]` = cell index).
pub fn assignment_loads(input: &OracleInput, choice: &[usize]) -> Vec<f64> {
    let m = input.ledger_template.num_cells();
    let mut loads = vec![0.0; m];
    for ((_, per_cell), &c) in input.gbr.iter().zip(choice) {
        let u = &per_cell[c];
        loads[c] += u.load(&input.ledger_template.cells[c]).value().unwrap_or(f64::INFINITY);
    }
    loads
}

/// Exhaustive search over all GBR associations for the best objective
/// among those meeting every cell's RB and backhaul budgets; NGBR users are
/// then placed greedily by estimated rate. Ties keep the lexicographically
/// smallest assignment.
pub fn global_oracle(input: &OracleInput, budget: u64) -> Result<OracleResult> {
    let m = input.ledger_template.num_cells();
    let n = input.gbr.len();
    let outcomes = (m as f64).powi(n as i32);
    if outcomes > budget as f64 {
        return Err(Error::OracleBudget { outcomes, budget });
    }
    if m == 0 {
        return Err(Error::Domain("no cells".into()));
    }
    let cells = &input.ledger_template.cells;
    // Per (user, cell): load, used RBs, demand.
    let terms: Vec<Vec<(f64, f64, f64)>> = input
        .gbr
        .iter()
        .map(|(_, per)| {
            per.iter()
                .enumerate()
                .map(|(c, u)| {
                    (
                        u.load(&cells[c]).value().unwrap_or(f64::INFINITY),
                        u.used_rbs.value().unwrap_or(f64::INFINITY),
                        u.demand_bps,
                    )
                })
                .collect()
        })
        .collect();

    struct Search<'a> {
        terms: &'a [Vec<(f64, f64, f64)>],
        w_ac: Vec<f64>,
        bh: &'a [f64],
        load: Vec<f64>,
        used: Vec<f64>,
        demand: Vec<f64>,
        choice: Vec<usize>,
        best: Option<(bool, f64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, u: usize) {
            let m = self.load.len();
            if u == self.terms.len() {
                let feasible = (0..m).all(|c| self.used[c] <= self.w_ac[c] && self.demand[c] <= self.bh[c]);
                let obj =
                    if self.load.iter().all(|l| l.is_finite()) { objective(&self.load) } else { f64::NEG_INFINITY };
                let better = match &self.best {
                    None => true,
                    Some((bf, bo, _)) => (feasible && !bf) || (feasible == *bf && obj > *bo),
                };
                if better {
                    self.best = Some((feasible, obj, self.choice.clone()));
                }
                return;
            }
            for c in 0..m {
                let (l, w, d) = self.terms[u][c];
                self.load[c] += l;
                self.used[c] += w;
                self.demand[c] += d;
                self.choice.push(c);
                self.go(u + 1);
                self.choice.pop();
                self.load[c] -= l;
                self.used[c] -= w;
                self.demand[c] -= d;
            }
        }
    }
    let mut s = Search {
        terms: &terms,
        w_ac: cells.iter().map(|b| b.w_ac).collect(),
        bh: &input.gbr_backhaul_bps,
        load: vec![0.0; m],
        used: vec![0.0; m],
        demand: vec![0.0; m],
        choice: Vec::with_capacity(n),
        best: None,
    };
    s.go(0);
    let (feasible, _, choice) = s.best.expect("at least one outcome");
    // Recompute from scratch so accumulated rounding does not leak into the result.
    let objective_value = objective(&assignment_loads(input, &choice));

    let mut assoc: BTreeMap<UserId, CellId> =
        input.gbr.iter().zip(&choice).map(|((u, _), &c)| (*u, CellId::from(c))).collect();
    let mut used = vec![0.0; m];
    for ((_, per), &c) in input.gbr.iter().zip(&choice) {
        used[c] += per[c].used_rbs.value().unwrap_or(0.0);
    }
    let mut n_ngbr = vec![0usize; m];
    for (u, etas) in &input.ngbr {
        let best = (0..m)
            .map(|c| {
                let residual = (cells[c].w_ac - used[c]).max(0.0);
                (c, ngbr_rate(etas[c], input.ledger_template.rb_bandwidth_hz, residual, n_ngbr[c] + 1))
            })
            .fold((0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
        n_ngbr[best.0] += 1;
        assoc.insert(*u, CellId::from(best.0));
    }
    Ok(OracleResult { assoc, objective: objective_value, feasible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::CellBudget;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    /// Independent recomputation of the objective ratio from scratch.
    fn ratio_oracle(loads: &[f64], i: usize, c: usize, rs: f64, rt: f64) -> f64 {
        let before = objective(loads);
        let mut after = loads.to_vec();
        after[i] -= rs;
        after[c] += rt;
        objective(&after) / before
    }

    #[test]
    fn gain_examples() {
        let g = gbr_handover_gain(&[0.5, 0.3], CellId(0), CellId(1), 0.1, 0.1).unwrap();
        assert!(close(g, 0.34 / 0.32));
        assert!(close(g, 0.6 / (0.8 * 0.8 / (2.0 * 0.34) * 0.6)));
        let g = gbr_handover_gain(&[0.4, 0.4], CellId(0), CellId(1), 0.1, 0.1).unwrap();
        assert!(close(g, 0.32 / 0.34) && g < 1.0);
        assert_eq!(gbr_handover_gain(&[0.4, 0.2, 0.7], CellId(0), CellId(2), 0.0, 0.0), Some(1.0));
    }

    #[test]
    fn gain_undefined_cases() {
        assert_eq!(gbr_handover_gain(&[0.0, 0.0], CellId(0), CellId(1), 0.0, 0.0), None);
        assert_eq!(gbr_handover_gain(&[1.5, 0.4], CellId(0), CellId(1), 0.1, 0.2), None);
        assert_eq!(gbr_handover_gain(&[0.5, 0.3], CellId(0), CellId(0), 0.1, 0.1), None);
    }

    #[test]
    fn target_load_estimate() {
        let ledger = LoadLedger::new(180e3, vec![CellBudget { w_ac: 100.0, c_bh_bps: None }; 2]);
        let u = GbrUsage {
            cell: CellId(0),
            demand_bps: 1.0,
            eta: 1.0,
            used_rbs: Load::Finite(10.0),
            net_rbs: f64::INFINITY,
        };
        let (e, _) = estimate_target_load(&u, 10.0, 10.0, CellId(1), &ledger);
        assert_eq!(e.used_rbs, Load::Finite(10.0));
        let (e, l) = estimate_target_load(&u, 10.0 + 10.0 * 2f64.log10(), 10.0, CellId(1), &ledger);
        assert!(close(e.used_rbs.value().unwrap(), 20.0));
        assert!(close(l.value().unwrap(), 0.2));
    }

    #[test]
    fn admission_boundaries() {
        assert!(admit_gbr(50.0, 45.0, 5.0));
        assert!(!admit_gbr(50.0, 45.0, 6.0));
        assert!(admit_gbr(50.0, 50.0, 0.0));
    }

    fn report(serving: u32, rsrq: &[f64]) -> (MeasurementReport, BTreeSet<CellId>) {
        let nb: BTreeSet<CellId> = (0..rsrq.len() as u32).filter(|&c| c != serving).map(CellId).collect();
        (MeasurementReport::new(UserId(0), CellId(serving), &nb, rsrq, 25.0), nb)
    }

    #[test]
    fn max_rsrq_truth_table() {
        let cfg = HandoverConfig::default();
        let (r, nb) = report(0, &[20.0, 20.5]);
        assert_eq!(decide_max_rsrq(&r, &nb, &cfg).target, None);
        let (r, nb) = report(0, &[20.0, 22.0]);
        assert_eq!(decide_max_rsrq(&r, &nb, &cfg).target, Some(CellId(1)));
        let (r, nb) = report(0, &[30.0, 32.0]);
        assert_eq!(decide_max_rsrq(&r, &nb, &cfg).target, Some(CellId(1)));
        // Both below threshold only matters via the serving side.
        let (r, nb) = report(0, &[26.0, 25.5]);
        assert_eq!(decide_max_rsrq(&r, &nb, &cfg).target, None);
    }

    fn ledger_with(loads: &[(u32, u32, f64)], cells: usize) -> LoadLedger {
        // Users with used RBs = 100·load, access-only budget of 100 RBs.
        let mut l = LoadLedger::new(180e3, vec![CellBudget { w_ac: 100.0, c_bh_bps: None }; cells]);
        for &(u, c, rho) in loads {
            let eta = 1.0;
            l.insert_gbr(UserId(u), CellId(c), rho * 100.0 * 180e3 * eta, eta);
        }
        l
    }

    #[test]
    fn gbr_policy_moves_off_loaded_cell() {
        let l = ledger_with(&[(0, 0, 0.1), (1, 0, 0.4), (2, 1, 0.3)], 2);
        let (r, nb) = report(0, &[10.0, 10.0]);
        let d = decide_gbr(&r, &nb, &l, None, &HandoverConfig { delta_gbr: 0.05, ..Default::default() });
        assert_eq!((d.target, d.reason), (Some(CellId(1)), Reason::Accepted));
        assert!(close(d.gain.unwrap(), 0.34 / 0.32));
    }

    #[test]
    fn gbr_policy_balanced_rejects() {
        let l = ledger_with(&[(0, 0, 0.1), (1, 0, 0.3), (2, 1, 0.4)], 2);
        let (r, nb) = report(0, &[10.0, 10.0]);
        let d = decide_gbr(&r, &nb, &l, None, &HandoverConfig::default());
        assert_eq!(d.reason, Reason::GainBelowThreshold);
        assert_eq!(d.target, None);
    }

    #[test]
    fn gbr_policy_picks_argmax() {
        // Cell 2 is emptier than cell 1, so moving there gains more.
        let l = ledger_with(&[(0, 0, 0.1), (1, 0, 0.5), (2, 1, 0.3), (3, 2, 0.1)], 3);
        let (r, nb) = report(0, &[10.0, 10.0, 10.0]);
        let loads = l.report().finite_cell_loads().unwrap();
        let g1 = gbr_handover_gain(&loads, CellId(0), CellId(1), 0.1, 0.1).unwrap();
        let g2 = gbr_handover_gain(&loads, CellId(0), CellId(2), 0.1, 0.1).unwrap();
        assert!(g2 > g1 && g1 > 1.05);
        let d = decide_gbr(&r, &nb, &l, None, &HandoverConfig { delta_gbr: 0.05, ..Default::default() });
        assert_eq!(d.target, Some(CellId(2)));
    }

    #[test]
    fn gbr_policy_admission_gate() {
        let l = ledger_with(&[(0, 0, 0.1), (1, 0, 0.5), (2, 1, 0.3)], 2);
        let (r, nb) = report(0, &[10.0, 10.0]);
        let view = BackhaulView { residual_bps: BTreeMap::from([(CellId(1), 1)]) };
        let d = decide_gbr(&r, &nb, &l, Some(&view), &HandoverConfig::default());
        assert_eq!((d.target, d.reason), (None, Reason::AdmissionRejected));
    }

    #[test]
    fn ngbr_policy() {
        let cells = [NgbrCellState { residual_rbs: 50.0, n_ngbr: 2 }, NgbrCellState { residual_rbs: 50.0, n_ngbr: 1 }];
        let (r, nb) = report(0, &[10.0, 10.0]);
        // Identical cells, equal populations after the move: stay.
        let eq = [NgbrCellState { residual_rbs: 50.0, n_ngbr: 2 }; 2];
        assert_eq!(decide_ngbr(&r, &nb, &eq).target, None);
        // Target has double the residual.
        let dbl = [NgbrCellState { residual_rbs: 50.0, n_ngbr: 2 }, NgbrCellState { residual_rbs: 100.0, n_ngbr: 2 }];
        let lhs = ngbr_target_score(10.0, &dbl[1]);
        let rhs = ngbr_source_score(10.0, &dbl[0]);
        assert!(close(lhs, 10.0 * 100.0 / 3.0 * (1.0 + 0.5 + 1.0 / 3.0)));
        assert!(close(rhs, 10.0 * 50.0));
        assert_eq!(decide_ngbr(&r, &nb, &dbl).target, Some(CellId(1)));
        let _ = cells;
        let (r, nb) = report(0, &[10.0, -300.0]);
        assert_eq!(decide_ngbr(&r, &nb, &dbl).target, None);
    }

    #[test]
    fn qos_aware_policy() {
        let l = ledger_with(&[(0, 0, 0.1), (1, 0, 0.4), (2, 1, 0.3)], 2);
        let (r, nb) = report(0, &[10.0, 10.0]);
        let d = decide_qos_aware(&r, &nb, &l);
        assert_eq!(d.target, Some(CellId(1)));
        assert!(close(d.gain.unwrap(), 1.0 / (0.64 / (2.0 * 0.34))));
        let l = ledger_with(&[(0, 0, 0.1), (1, 0, 0.3), (2, 1, 0.4)], 2);
        assert_eq!(decide_qos_aware(&r, &nb, &l).target, None);
        let l = ledger_with(&[(0, 0, 0.1)], 1);
        let (r, nb) = report(0, &[10.0]);
        assert_eq!(decide_qos_aware(&r, &nb, &l).reason, Reason::NoCandidate);
    }

    fn oracle_input(users: &[[f64; 2]]) -> OracleInput {
        let template = LoadLedger::new(180e3, vec![CellBudget { w_ac: 100.0, c_bh_bps: None }; users[0].len()]);
        let gbr = users
            .iter()
            .enumerate()
            .map(|(u, per)| {
                let v = per
                    .iter()
                    .enumerate()
                    .map(|(c, &rho)| template.usage_at(CellId::from(c), rho * 100.0 * 180e3, 1.0))
                    .collect();
                (UserId::from(u), v)
            })
            .collect();
        OracleInput {
            ledger_template: template,
            gbr,
            ngbr: vec![],
            gbr_backhaul_bps: vec![f64::INFINITY; users[0].len()],
        }
    }

    #[test]
    fn oracle_identical_split() {
        let r = global_oracle(&oracle_input(&[[0.1, 0.1], [0.1, 0.1]]), DEFAULT_ORACLE_BUDGET).unwrap();
        assert_ne!(r.assoc[&UserId(0)], r.assoc[&UserId(1)]);
        assert_eq!(r.assoc[&UserId(0)], CellId(0));
        assert!(r.feasible);
    }

    #[test]
    fn oracle_single_cell() {
        let template = LoadLedger::new(180e3, vec![CellBudget { w_ac: 100.0, c_bh_bps: None }]);
        let gbr = (0..4).map(|u| (UserId(u), vec![template.usage_at(CellId(0), 1e5, 1.0)])).collect();
        let input = OracleInput {
            ledger_template: template,
            gbr,
            ngbr: vec![(UserId(9), vec![1.0])],
            gbr_backhaul_bps: vec![1e12],
        };
        let r = global_oracle(&input, 10).unwrap();
        assert!(r.assoc.values().all(|&c| c == CellId(0)));
        assert_eq!(r.assoc.len(), 5);
    }

    #[test]
    fn oracle_budget_refuses() {
        let input = oracle_input(&[[0.1, 0.1]; 12]);
        assert!(matches!(global_oracle(&input, 1000), Err(Error::OracleBudget { .. })));
    }

    #[test]
    fn policy_parse() {
        assert_eq!("max-rsrq".parse::<Policy>().unwrap(), Policy::MaxRsrq);
        let e = "best".parse::<Policy>().unwrap_err().to_string();
        assert!(e.contains("proposed") && e.contains("qos_aware") && e.contains("max_rsrq"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (Vec<f64>, usize, usize, f64, f64)> {
            (2usize..7)
                .prop_flat_map(|m| (proptest::collection::vec(0.0f64..0.9, m), 0..m, 0..m, 0.0f64..1.0, 0.0f64..0.3))
                .prop_filter("distinct cells", |(_, i, c, _, _)| i != c)
                .prop_map(|(mut loads, i, c, frac, rt)| {
                    let rs = loads[i] * frac;
                    if loads.iter().sum::<f64>() == 0.0 {
                        loads[i] = 0.1;
                    }
                    (loads, i, c, rs, rt)
                })
        }

        proptest! {
            #[test]
            fn gain_equals_objective_ratio((loads, i, c, rs, rt) in instance()) {
                if let Some(g) = gbr_handover_gain(&loads, CellId::from(i), CellId::from(c), rs, rt) {
                    let o = ratio_oracle(&loads, i, c, rs, rt);
                    prop_assert!((g - o).abs() <= 1e-9 * o.abs(), "g={g} o={o}");
                }
            }

            #[test]
            fn gain_above_one_iff_tradeoff_condition((loads, i, c, rs, rt) in instance()) {
                if let Some(g) = gbr_handover_gain(&loads, CellId::from(i), CellId::from(c), rs, rt) {
                    let m = loads.len() as f64;
                    let mut after = loads.clone();
                    after[i] -= rs;
                    after[c] += rt;
                    let xi_ratio = jain_fairness(&after) / jain_fairness(&loads);
                    let avg = |v: &[f64]| v.iter().sum::<f64>() / m;
                    let load_ratio = (1.0 - avg(&loads)) / (1.0 - avg(&after));
                    let margin = (xi_ratio - load_ratio).abs();
                    prop_assume!(margin > 1e-9 && (g - 1.0).abs() > 1e-9);
                    prop_assert_eq!(g > 1.0, xi_ratio > load_ratio);
                }
            }

            #[test]
            fn decisions_stay_in_neighbourhood(rsrq in proptest::collection::vec(-30.0f64..50.0, 3..7), serving in 0u32..3, loads in proptest::collection::vec(0.01f64..0.3, 3..7)) {
                let m = rsrq.len().min(loads.len());
                let rsrq = &rsrq[..m];
                let nb: BTreeSet<CellId> = [(serving + 1) % m as u32].into_iter().map(CellId).collect();
                let r = MeasurementReport::new(UserId(0), CellId(serving), &nb, rsrq, 25.0);
                let mut l = LoadLedger::new(180e3, vec![CellBudget { w_ac: 100.0, c_bh_bps: None }; m]);
                l.insert_gbr(UserId(0), CellId(serving), loads[0] * 100.0 * 180e3, 1.0);
                for (k, &rho) in loads[..m].iter().enumerate().skip(1) {
                    l.insert_gbr(UserId(k as u32), CellId::from(k % m), rho * 100.0 * 180e3, 1.0);
                }
                let cfg = HandoverConfig::default();
                let ng = vec![NgbrCellState { residual_rbs: 40.0, n_ngbr: 2 }; m];
                for d in [decide_gbr(&r, &nb, &l, None, &cfg), decide_qos_aware(&r, &nb, &l), decide_max_rsrq(&r, &nb, &cfg), decide_ngbr(&r, &nb, &ng)] {
                    prop_assert_eq!(d.target.is_some(), d.reason == Reason::Accepted);
                    if let Some(t) = d.target {
                        prop_assert!(nb.contains(&t));
                    }
                }
            }

            #[test]
            fn oracle_dominates_every_assignment(users in proptest::collection::vec(proptest::array::uniform2(0.01f64..0.3), 1..7), pick in any::<u64>()) {
                let input = oracle_input(&users);
                let r = global_oracle(&input, DEFAULT_ORACLE_BUDGET).unwrap();
                let choice: Vec<usize> = (0..users.len()).map(|u| ((pick >> u) & 1) as usize).collect();
                let other = objective(&assignment_loads(&input, &choice));
                prop_assert!(r.objective >= other - 1e-12);
            }
        }
    }
}
