//! SDN controller: bearer registry, routing and admission, abstract flow
//! rules, meters, congestion handling and capacity notifications.
//!
//! The controller is a single serial event handler. Controller-to-switch
//! and controller-to-BS latency are zero, so every base station's cached
//! backhaul figures are refreshed within the event that changed them.

use crate::backhaul::{
    apply_meter, class_capacity, residual_capacity, spf_route, split_ngbr_meters, BackhaulGraph, LinkUsage, Meter,
    MeterKind, Path, TrafficClass,
};
use crate::ids::{CellId, FlowId, LinkId, MeterId, SwitchId, UserId};
use crate::topology::{NgbrApp, UserKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Per-NGBR-flow bandwidth below which a link counts as congested.
    pub congestion_threshold_bps: u64,
    /// Clear LB periods before class meters merge back into one.
    pub merge_after_periods: u32,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self { congestion_threshold_bps: 500_000, merge_after_periods: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub flow_id: FlowId,
    pub user: UserId,
    pub kind: UserKind,
    pub app: Option<NgbrApp>,
    pub cell: CellId,
    /// `None` while the flow is dropped.
    pub path: Option<Path>,
    pub meter: MeterId,
    pub demand_bps: u64,
    pub qos_weight: f64,
}

impl FlowEntry {
    pub fn class(&self) -> TrafficClass {
        match self.kind {
            UserKind::Gbr => TrafficClass::Gbr,
            UserKind::Ngbr => TrafficClass::Ngbr,
        }
    }

    pub fn admitted(&self) -> bool {
        self.path.is_some()
    }
}

/// Abstract match-action entry on one switch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub switch: SwitchId,
    pub match_tunnel: u64,
    pub set_tunnel: u64,
    /// Next link toward the eNodeB; `None` on the last switch (local port).
    pub out_link: Option<LinkId>,
    pub meter: MeterId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCapacity {
    pub c_bh_bps: u64,
    pub c_residual_bps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityNotification {
    pub cell: CellId,
    pub c_bh_bps: u64,
    pub c_residual_bps: u64,
    pub epoch: u64,
    pub recipients: BTreeSet<CellId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Decision {
        user: UserId,
        source: CellId,
        target: Option<CellId>,
        gain: Option<f64>,
        reason: crate::handover::Reason,
    },
    Admission {
        user: UserId,
        flow: FlowId,
        cell: CellId,
        admitted: bool,
    },
    FlowDropped {
        user: UserId,
        flow: FlowId,
        cell: CellId,
    },
    RulesInstalled {
        flow: FlowId,
        switches: Vec<SwitchId>,
    },
    RulesRemoved {
        flow: FlowId,
        switches: Vec<SwitchId>,
    },
    Notification(CapacityNotification),
    MeterSplit {
        link: LinkId,
        rates_bps: Vec<(NgbrApp, u64)>,
    },
    MeterMerge {
        link: LinkId,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub tti: u64,
    pub seq: u64,
    #[serde(flatten)]
    pub event: Event,
}

const LINK_METER_BASE: u64 = 1 << 40;

fn aggregate_meter(link: LinkId) -> MeterId {
    MeterId(LINK_METER_BASE + 4 * link.0 as u64)
}

fn class_meter(link: LinkId, app: NgbrApp) -> MeterId {
    MeterId(LINK_METER_BASE + 4 * link.0 as u64 + 1 + app as u64)
}

#[derive(Clone, Debug)]
pub struct Controller {
    cfg: ControllerConfig,
    graph: BackhaulGraph,
    usage: LinkUsage,
    neighbors: Vec<BTreeSet<CellId>>,
    flows: BTreeMap<FlowId, FlowEntry>,
    bearers: BTreeMap<UserId, FlowId>,
    rules: BTreeMap<SwitchId, BTreeMap<FlowId, Rule>>,
    capacity: BTreeMap<CellId, CellCapacity>,
    /// What each BS believes about itself and its neighbours.
    bs_cache: Vec<BTreeMap<CellId, CellCapacity>>,
    /// Links running class meters, with their count of clear periods.
    split: BTreeMap<LinkId, u32>,
    next_flow: u64,
    seq: u64,
    epoch: u64,
    log: Vec<EventRecord>,
}

impl Controller {
    pub fn new(graph: BackhaulGraph, neighbors: Vec<BTreeSet<CellId>>, cfg: ControllerConfig) -> Self {
        let usage = LinkUsage::new(&graph);
        let n = neighbors.len();
        let mut c = Self {
            cfg,
            graph,
            usage,
            neighbors,
            flows: BTreeMap::new(),
            bearers: BTreeMap::new(),
            rules: BTreeMap::new(),
            capacity: BTreeMap::new(),
            bs_cache: vec![BTreeMap::new(); n],
            split: BTreeMap::new(),
            next_flow: 1,
            seq: 0,
            epoch: 0,
            log: Vec::new(),
        };
        c.capacity = c.recompute_capacities();
        for cell in 0..n {
            let cell = CellId::from(cell);
            let mut view = vec![cell];
            view.extend(c.neighbors[cell.index()].iter().copied());
            for v in view {
                let cap = c.capacity[&v];
                c.bs_cache[cell.index()].insert(v, cap);
            }
        }
        c
    }

    pub fn graph(&self) -> &BackhaulGraph {
        &self.graph
    }

    pub fn usage(&self) -> &LinkUsage {
        &self.usage
    }

    pub fn flows(&self) -> &BTreeMap<FlowId, FlowEntry> {
        &self.flows
    }

    pub fn flow_of(&self, user: UserId) -> Option<&FlowEntry> {
        self.bearers.get(&user).and_then(|f| self.flows.get(f))
    }

    pub fn rules(&self) -> &BTreeMap<SwitchId, BTreeMap<FlowId, Rule>> {
        &self.rules
    }

    pub fn capacity(&self, cell: CellId) -> CellCapacity {
        self.capacity[&cell]
    }

    pub fn bs_cache(&self, cell: CellId) -> &BTreeMap<CellId, CellCapacity> {
        &self.bs_cache[cell.index()]
    }

    pub fn split_links(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.split.keys().copied()
    }

    pub fn set_epoch(&mut self, epoch: u64) {
        self.epoch = epoch;
    }

    pub fn log(&self) -> &[EventRecord] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<EventRecord> {
        std::mem::take(&mut self.log)
    }

    pub fn record(&mut self, tti: u64, event: Event) {
        self.log.push(EventRecord { tti, seq: self.seq, event });
        self.seq += 1;
    }

    /// GBR-class capacity figures of every cell, from scratch.
    pub fn recompute_capacities(&self) -> BTreeMap<CellId, CellCapacity> {
        self.graph
            .cell_attachments()
            .keys()
            .map(|&c| {
                let c_bh_bps = class_capacity(c, &self.graph, TrafficClass::Gbr).unwrap_or(0);
                let c_residual_bps = residual_capacity(c, &self.graph, &self.usage, TrafficClass::Gbr).unwrap_or(0);
                (c, CellCapacity { c_bh_bps, c_residual_bps })
            })
            .collect()
    }

    /// Registers a bearer for a user at `cell` and tries to route it.
    #[allow(clippy::too_many_arguments)]
    pub fn attach_bearer(
        &mut self,
        user: UserId,
        kind: UserKind,
        app: Option<NgbrApp>,
        qos_weight: f64,
        demand_bps: u64,
        cell: CellId,
        tti: u64,
    ) -> bool {
        let flow_id = FlowId(self.next_flow);
        self.next_flow += 1;
        let meter = MeterId(flow_id.0);
        let entry = FlowEntry { flow_id, user, kind, app, cell, path: None, meter, demand_bps, qos_weight };
        self.flows.insert(flow_id, entry);
        self.bearers.insert(user, flow_id);
        let touched = self.route_and_admit(flow_id, tti);
        self.update_and_notify(&touched, tti);
        self.flows[&flow_id].admitted()
    }

    /// Handover of `user` to `target`: release the old path, route and admit
    /// on the new one, swap rules and notify.
    pub fn on_path_switch_request(&mut self, user: UserId, target: CellId, tti: u64) -> bool {
        let Some(&flow_id) = self.bearers.get(&user) else {
            return false;
        };
        let mut touched = self.release(flow_id, tti);
        self.flows.get_mut(&flow_id).expect("registered").cell = target;
        touched.extend(self.route_and_admit(flow_id, tti));
        self.update_and_notify(&touched, tti);
        self.flows[&flow_id].admitted()
    }

    /// Retries admission of every dropped GBR bearer at its current cell, in user order.
    pub fn retry_dropped(&mut self, tti: u64) {
        let dropped: Vec<FlowId> = self.bearers.values().copied().filter(|f| !self.flows[f].admitted()).collect();
        let mut touched = BTreeSet::new();
        for f in dropped {
            touched.extend(self.route_and_admit(f, tti));
        }
        self.update_and_notify(&touched, tti);
    }

    fn release(&mut self, flow_id: FlowId, tti: u64) -> BTreeSet<LinkId> {
        let flow = self.flows.get_mut(&flow_id).expect("registered");
        let Some(path) = flow.path.take() else {
            return BTreeSet::new();
        };
        if flow.kind == UserKind::Gbr {
            self.usage.release(&path, TrafficClass::Gbr, flow.demand_bps);
        }
        for s in &path.switches {
            if let Some(t) = self.rules.get_mut(s) {
                t.remove(&flow_id);
                if t.is_empty() {
                    self.rules.remove(s);
                }
            }
        }
        self.record(tti, Event::RulesRemoved { flow: flow_id, switches: path.switches.clone() });
        path.links.iter().copied().collect()
    }

    fn route_and_admit(&mut self, flow_id: FlowId, tti: u64) -> BTreeSet<LinkId> {
        let f = self.flows[&flow_id].clone();
        let demand = if f.kind == UserKind::Gbr { f.demand_bps } else { 0 };
        let route = spf_route(f.cell, &self.graph, &self.usage, f.class(), demand);
        let admitted = match route {
            Ok(path) => {
                if f.kind == UserKind::Gbr {
                    self.usage
                        .reserve(&self.graph, &path, TrafficClass::Gbr, f.demand_bps)
                        .expect("route feasible for demand");
                }
                let entry = self.flows.get_mut(&flow_id).expect("registered");
                if entry.kind == UserKind::Ngbr {
                    entry.meter = path.links.last().map_or(entry.meter, |&l| aggregate_meter(l));
                }
                entry.path = Some(path);
                self.install_flow_rules(flow_id);
                true
            }
            Err(_) => false,
        };
        self.record(tti, Event::Admission { user: f.user, flow: flow_id, cell: f.cell, admitted });
        if admitted {
            let switches = self.flows[&flow_id].path.as_ref().expect("admitted").switches.clone();
            self.record(tti, Event::RulesInstalled { flow: flow_id, switches });
            self.flows[&flow_id].path.as_ref().expect("admitted").links.iter().copied().collect()
        } else {
            self.record(tti, Event::FlowDropped { user: f.user, flow: flow_id, cell: f.cell });
            BTreeSet::new()
        }
    }

    /// One rule per switch on the flow's path; re-installing is idempotent.
    pub fn install_flow_rules(&mut self, flow_id: FlowId) -> Vec<Rule> {
        let flow = &self.flows[&flow_id];
        let Some(path) = &flow.path else {
            return Vec::new();
        };
        let rules: Vec<Rule> = path
            .switches
            .iter()
            .enumerate()
            .map(|(k, &s)| Rule {
                switch: s,
                match_tunnel: flow_id.0,
                set_tunnel: flow_id.0,
                out_link: path.links.get(k).copied(),
                meter: flow.meter,
            })
            .collect();
        for r in &rules {
            self.rules.entry(r.switch).or_default().insert(flow_id, r.clone());
        }
        rules
    }

    /// Recomputes capacities and notifies each cell that changed or routes
    /// over a touched link, together with its neighbours.
    pub fn update_and_notify(&mut self, touched: &BTreeSet<LinkId>, tti: u64) -> Vec<CapacityNotification> {
        let fresh = self.recompute_capacities();
        let mut affected: BTreeSet<CellId> =
            fresh.iter().filter(|(c, v)| self.capacity.get(c) != Some(v)).map(|(&c, _)| c).collect();
        if !touched.is_empty() {
            let empty = LinkUsage::new(&self.graph);
            for &c in fresh.keys() {
                if let Ok(p) = spf_route(c, &self.graph, &empty, TrafficClass::Gbr, 0) {
                    if p.links.iter().any(|l| touched.contains(l)) {
                        affected.insert(c);
                    }
                }
            }
        }
        self.capacity = fresh;
        let mut out = Vec::new();
        for c in affected {
            let cap = self.capacity[&c];
            let mut recipients: BTreeSet<CellId> = self.neighbors[c.index()].clone();
            recipients.insert(c);
            for &r in &recipients {
                self.bs_cache[r.index()].insert(c, cap);
            }
            let n = CapacityNotification {
                cell: c,
                c_bh_bps: cap.c_bh_bps,
                c_residual_bps: cap.c_residual_bps,
                epoch: self.epoch,
                recipients,
            };
            self.record(tti, Event::Notification(n.clone()));
            out.push(n);
        }
        out
    }

    /// NGBR flows currently routed over each link.
    fn ngbr_flows_per_link(&self) -> BTreeMap<LinkId, Vec<FlowId>> {
        let mut out: BTreeMap<LinkId, Vec<FlowId>> = BTreeMap::new();
        for f in self.flows.values().filter(|f| f.kind == UserKind::Ngbr) {
            if let Some(p) = &f.path {
                for &l in &p.links {
                    out.entry(l).or_default().push(f.flow_id);
                }
            }
        }
        out
    }

    /// Links whose NGBR share per flow is below the threshold.
    pub fn detect_congestion(&self) -> BTreeSet<LinkId> {
        self.ngbr_flows_per_link()
            .into_iter()
            .filter(|(l, fl)| {
                let cap = self.graph.class_cap(*l, TrafficClass::Ngbr);
                !fl.is_empty() && cap / (fl.len() as u64).max(1) < self.cfg.congestion_threshold_bps
            })
            .map(|(l, _)| l)
            .collect()
    }

    /// NGBR classes present on a link with their QoS weights.
    fn classes_on(&self, flows: &[FlowId]) -> Vec<(NgbrApp, f64)> {
        let mut w: BTreeMap<NgbrApp, f64> = BTreeMap::new();
        for f in flows {
            let e = &self.flows[f];
            if let Some(app) = e.app {
                w.insert(app, e.qos_weight);
            }
        }
        w.into_iter().collect()
    }

    /// End-of-period congestion handling: split meters on congested links,
    /// merge them back after enough clear periods.
    pub fn period_tick(&mut self, tti: u64) {
        let congested = self.detect_congestion();
        let per_link = self.ngbr_flows_per_link();
        for &l in &congested {
            if self.split.insert(l, 0).is_none() {
                let classes = self.classes_on(per_link.get(&l).map_or(&[][..], |v| v));
                let rates_bps = split_ngbr_meters(&classes, self.graph.class_cap(l, TrafficClass::Ngbr));
                self.record(tti, Event::MeterSplit { link: l, rates_bps });
            }
        }
        let clear: Vec<LinkId> = self.split.keys().copied().filter(|l| !congested.contains(l)).collect();
        for l in clear {
            let n = self.split.get_mut(&l).expect("split");
            *n += 1;
            if *n >= self.cfg.merge_after_periods {
                self.split.remove(&l);
                self.record(tti, Event::MeterMerge { link: l });
            }
        }
    }

    /// Meters currently configured: one per admitted GBR flow, plus an
    /// aggregate or per-class meter set on every link carrying NGBR flows.
    pub fn meters(&self) -> Vec<Meter> {
        let mut out = Vec::new();
        for f in self.flows.values().filter(|f| f.kind == UserKind::Gbr && f.admitted()) {
            out.push(Meter {
                id: f.meter,
                rate_bps: f.demand_bps,
                kind: MeterKind::GbrDedicated,
                member_flows: [f.flow_id].into(),
            });
        }
        for (l, flows) in self.ngbr_flows_per_link() {
            let cap = self.graph.class_cap(l, TrafficClass::Ngbr);
            if self.split.contains_key(&l) {
                for (app, rate) in split_ngbr_meters(&self.classes_on(&flows), cap) {
                    let members = flows.iter().copied().filter(|f| self.flows[f].app == Some(app)).collect();
                    out.push(Meter {
                        id: class_meter(l, app),
                        rate_bps: rate,
                        kind: MeterKind::NgbrClass(app),
                        member_flows: members,
                    });
                }
            } else {
                out.push(Meter {
                    id: aggregate_meter(l),
                    rate_bps: cap,
                    kind: MeterKind::NgbrAggregate,
                    member_flows: flows.into_iter().collect(),
                });
            }
        }
        out
    }

    /// Bits each user gets through the backhaul in a period of `period_s`
    /// seconds, given the bits the access network offered. NGBR flows are
    /// limited by the meter share on every link of their path.
    pub fn serve_backhaul(&mut self, offered_bits: &BTreeMap<UserId, f64>, period_s: f64) -> BTreeMap<UserId, f64> {
        let mut served: BTreeMap<UserId, f64> = BTreeMap::new();
        let mut ngbr_limit: BTreeMap<FlowId, u64> = BTreeMap::new();
        let offered_of = |f: &FlowEntry| offered_bits.get(&f.user).copied().unwrap_or(0.0).max(0.0);
        for meter in self.meters() {
            let members: Vec<FlowId> = meter.member_flows.iter().copied().collect();
            let offers: Vec<u64> = members.iter().map(|f| offered_of(&self.flows[f]).floor() as u64).collect();
            let rate_bits = (meter.rate_bps as f64 * period_s).floor() as u64;
            let got = apply_meter(meter.kind, rate_bits, &offers);
            match meter.kind {
                MeterKind::GbrDedicated => {
                    let f = &self.flows[&members[0]];
                    served.insert(f.user, (got[0] as f64).min(offered_of(f)));
                }
                MeterKind::NgbrAggregate | MeterKind::NgbrClass(_) => {
                    for (f, g) in members.iter().zip(got) {
                        let e = ngbr_limit.entry(*f).or_insert(u64::MAX);
                        *e = (*e).min(g);
                    }
                }
            }
        }
        for (f, lim) in ngbr_limit {
            let e = &self.flows[&f];
            served.insert(e.user, (lim as f64).min(offered_of(e)));
        }
        // Measured NGBR usage per link, in bits per second.
        for l in 0..self.graph.links().len() {
            self.usage.set_ngbr_used(LinkId(l as u32), 0);
        }
        for f in self.flows.values().filter(|f| f.kind == UserKind::Ngbr) {
            if let (Some(p), Some(&s)) = (&f.path, served.get(&f.user)) {
                for &l in &p.links {
                    let cur = self.usage.used(l, TrafficClass::Ngbr);
                    let add = (s / period_s).floor() as u64;
                    let cap = self.graph.class_cap(l, TrafficClass::Ngbr);
                    self.usage.set_ngbr_used(l, (cur + add).min(cap));
                }
            }
        }
        for f in self.flows.values() {
            served.entry(f.user).or_insert(0.0);
        }
        served
    }

    /// Checks internal consistency; returns a description of the first violation.
    pub fn audit(&self) -> Result<(), String> {
        // Reservations match admitted GBR flows and respect caps.
        let mut expect = LinkUsage::new(&self.graph);
        for f in self.flows.values().filter(|f| f.kind == UserKind::Gbr) {
            if let Some(p) = &f.path {
                expect
                    .reserve(&self.graph, p, TrafficClass::Gbr, f.demand_bps)
                    .map_err(|_| format!("{} over-commits its path", f.flow_id))?;
            }
        }
        for l in self.graph.links() {
            let (a, b) = (expect.used(l.id, TrafficClass::Gbr), self.usage.used(l.id, TrafficClass::Gbr));
            if a != b {
                return Err(format!("{}: GBR usage {b} != recomputed {a}", l.id));
            }
            if b > self.graph.class_cap(l.id, TrafficClass::Gbr) {
                return Err(format!("{}: GBR usage {b} above cap", l.id));
            }
        }
        // Rules describe exactly the admitted paths.
        let mut want: BTreeMap<SwitchId, BTreeSet<FlowId>> = BTreeMap::new();
        for f in self.flows.values() {
            if let Some(p) = &f.path {
                if p.switches.first() != Some(&self.graph.pgw())
                    || p.switches.last() != Some(&self.graph.switch_of(f.cell).map_err(|e| e.to_string())?)
                {
                    return Err(format!("{} path endpoints wrong", f.flow_id));
                }
                for &s in &p.switches {
                    want.entry(s).or_default().insert(f.flow_id);
                }
            }
        }
        let have: BTreeMap<SwitchId, BTreeSet<FlowId>> =
            self.rules.iter().map(|(s, t)| (*s, t.keys().copied().collect())).collect();
        if want != have {
            return Err("rule tables differ from admitted paths".into());
        }
        // Registry is a bijection between users and flows.
        if self.bearers.len() != self.flows.len() || self.bearers.iter().any(|(u, f)| self.flows[f].user != *u) {
            return Err("bearer registry inconsistent".into());
        }
        // Caches agree with the database.
        if self.capacity != self.recompute_capacities() {
            return Err("capacity database stale".into());
        }
        for (i, cache) in self.bs_cache.iter().enumerate() {
            for (c, v) in cache {
                if self.capacity[c] != *v {
                    return Err(format!("cache of cell{i} stale for {c}"));
                }
            }
        }
        Ok(())
    }
}
