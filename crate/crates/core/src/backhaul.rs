//! SDN backhaul model.
//!
//! Switches are joined by capacity-annotated links. Downlink traffic flows
//! from the PGW switch toward the switch a cell is attached to. Each link's
//! capacity is split between uplink and downlink (`dl_share`), and the
//! downlink part is partitioned into a GBR reservation and an NGBR share.
//!
//! A cell's backhaul capacity is the sum over link-disjoint paths of each
//! path's bottleneck; we compute it as the max-flow value from the PGW to the
//! cell's switch, which coincides with that sum whenever the paths are
//! disjoint and also accounts for partially shared links.
//!
//! All rates are integer bits per second so that reservations and releases
//! are exact.

use crate::error::{Error, Result};
use crate::ids::{CellId, FlowId, LinkId, MeterId, SwitchId};
use crate::topology::NgbrApp;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub const DEFAULT_DL_SHARE: f64 = 0.5;
pub const DEFAULT_GBR_SHARE: f64 = 0.6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficClass {
    Gbr,
    Ngbr,
}

/// Undirected backhaul link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub a: SwitchId,
    pub b: SwitchId,
    pub capacity_bps: u64,
    pub dl_share: f64,
}

impl Link {
    pub fn other(&self, s: SwitchId) -> SwitchId {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug)]
pub struct BackhaulGraph {
    switch_names: Vec<String>,
    links: Vec<Link>,
    cell_attachments: BTreeMap<CellId, SwitchId>,
    pgw: SwitchId,
    gbr_share: f64,
    adjacency: Vec<Vec<(SwitchId, LinkId)>>,
}

impl BackhaulGraph {
    /// Builds and validates a graph. Links are given as `(a, b, capacity_bps, dl_share)`.
    pub fn new(
        switch_names: Vec<String>,
        links: Vec<(SwitchId, SwitchId, u64, f64)>,
        cell_attachments: BTreeMap<CellId, SwitchId>,
        pgw: SwitchId,
        gbr_share: f64,
    ) -> Result<Self> {
        let n = switch_names.len();
        let topo = |m: String| Err(Error::Topology(m));
        if n == 0 {
            return topo("no switches".into());
        }
        let unique: BTreeSet<&String> = switch_names.iter().collect();
        if unique.len() != n {
            return topo("duplicate switch names".into());
        }
        if pgw.index() >= n {
            return topo(format!("pgw {pgw} out of range"));
        }
        if !(gbr_share > 0.0 && gbr_share < 1.0) {
            return topo(format!("gbr_share {gbr_share} outside (0,1)"));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut out = Vec::with_capacity(links.len());
        for (i, (a, b, cap, dl)) in links.into_iter().enumerate() {
            if a.index() >= n || b.index() >= n {
                return topo(format!("link {i} references unknown switch"));
            }
            if a == b {
                return topo(format!("link {i} is a self loop"));
            }
            if cap == 0 {
                return topo(format!("link {i} has zero capacity"));
            }
            if !(dl > 0.0 && dl < 1.0) {
                return topo(format!("link {i} dl_share {dl} outside (0,1)"));
            }
            let id = LinkId(i as u32);
            adjacency[a.index()].push((b, id));
            adjacency[b.index()].push((a, id));
            out.push(Link { id, a, b, capacity_bps: cap, dl_share: dl });
        }
        for adj in &mut adjacency {
            adj.sort();
        }
        for (c, s) in &cell_attachments {
            if s.index() >= n {
                return topo(format!("{c} attached to unknown switch"));
            }
        }
        let g = Self { switch_names, links: out, cell_attachments, pgw, gbr_share, adjacency };
        if !g.is_connected() {
            return topo("graph is not connected".into());
        }
        Ok(g)
    }

    pub fn num_switches(&self) -> usize {
        self.switch_names.len()
    }

    pub fn switch_name(&self, s: SwitchId) -> &str {
        &self.switch_names[s.index()]
    }

    pub fn switch_by_name(&self, name: &str) -> Option<SwitchId> {
        self.switch_names.iter().position(|n| n == name).map(SwitchId::from)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    pub fn pgw(&self) -> SwitchId {
        self.pgw
    }

    pub fn gbr_share(&self) -> f64 {
        self.gbr_share
    }

    pub fn cell_attachments(&self) -> &BTreeMap<CellId, SwitchId> {
        &self.cell_attachments
    }

    pub fn switch_of(&self, cell: CellId) -> Result<SwitchId> {
        self.cell_attachments.get(&cell).copied().ok_or(Error::UnknownCell(cell))
    }

    /// Neighbors of `s` sorted by (switch id, link id).
    pub fn adjacency(&self, s: SwitchId) -> &[(SwitchId, LinkId)] {
        &self.adjacency[s.index()]
    }

    pub fn dl_capacity(&self, link: LinkId) -> u64 {
        let l = self.link(link);
        (l.capacity_bps as f64 * l.dl_share).round() as u64
    }

    /// Downlink capacity reserved for a class; the two class caps sum to the DL share.
    pub fn class_cap(&self, link: LinkId, class: TrafficClass) -> u64 {
        let dl = self.dl_capacity(link);
        let gbr = ((dl as f64) * self.gbr_share).round() as u64;
        match class {
            TrafficClass::Gbr => gbr.min(dl),
            TrafficClass::Ngbr => dl - gbr.min(dl),
        }
    }

    /// Copy with one link's capacity replaced.
    pub fn with_capacity(&self, link: LinkId, capacity_bps: u64) -> Self {
        let mut g = self.clone();
        g.links[link.index()].capacity_bps = capacity_bps;
        g
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_switches()];
        let mut queue = VecDeque::from([self.pgw]);
        seen[self.pgw.index()] = true;
        while let Some(s) = queue.pop_front() {
            for &(t, _) in self.adjacency(s) {
                if !seen[t.index()] {
                    seen[t.index()] = true;
                    queue.push_back(t);
                }
            }
        }
        seen.iter().all(|&v| v)
    }

    /// Cells whose attachment switch is `s`.
    pub fn cells_at(&self, s: SwitchId) -> impl Iterator<Item = CellId> + '_ {
        self.cell_attachments.iter().filter(move |(_, &sw)| sw == s).map(|(&c, _)| c)
    }
}

/// Per-link class usage in bits per second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkUsage {
    used_gbr: Vec<u64>,
    used_ngbr: Vec<u64>,
}

impl LinkUsage {
    pub fn new(graph: &BackhaulGraph) -> Self {
        let n = graph.links().len();
        Self { used_gbr: vec![0; n], used_ngbr: vec![0; n] }
    }

    pub fn used(&self, link: LinkId, class: TrafficClass) -> u64 {
        match class {
            TrafficClass::Gbr => self.used_gbr[link.index()],
            TrafficClass::Ngbr => self.used_ngbr[link.index()],
        }
    }

    pub fn residual(&self, graph: &BackhaulGraph, link: LinkId, class: TrafficClass) -> u64 {
        graph.class_cap(link, class).saturating_sub(self.used(link, class))
    }

    /// Reserves `bps` of `class` on every link of `path`; all-or-nothing.
    pub fn reserve(&mut self, graph: &BackhaulGraph, path: &Path, class: TrafficClass, bps: u64) -> Result<()> {
        if path.links.iter().any(|&l| self.residual(graph, l, class) < bps) {
            return Err(Error::Domain(format!("reservation of {bps} bps exceeds residual")));
        }
        for &l in &path.links {
            *self.slot(l, class) += bps;
        }
        Ok(())
    }

    pub fn release(&mut self, path: &Path, class: TrafficClass, bps: u64) {
        for &l in &path.links {
            let v = self.slot(l, class);
            debug_assert!(*v >= bps, "release underflow on {l}");
            *v = v.saturating_sub(bps);
        }
    }

    /// Overwrites the measured NGBR load of a link.
    pub fn set_ngbr_used(&mut self, link: LinkId, bps: u64) {
        self.used_ngbr[link.index()] = bps;
    }

    fn slot(&mut self, link: LinkId, class: TrafficClass) -> &mut u64 {
        match class {
            TrafficClass::Gbr => &mut self.used_gbr[link.index()],
            TrafficClass::Ngbr => &mut self.used_ngbr[link.index()],
        }
    }
}

/// Max-flow value from the PGW to `sink` with per-link capacities given by
/// `cap` (Edmonds–Karp; undirected links become two opposing arcs).
pub fn max_flow(graph: &BackhaulGraph, sink: SwitchId, cap: impl Fn(LinkId) -> u64) -> u64 {
    let source = graph.pgw();
    if source == sink {
        return u64::MAX;
    }
    let nl = graph.links().len();
    // flow[l] > 0 means flow from link.a to link.b
    let mut flow = vec![0i128; nl];
    let caps: Vec<i128> = (0..nl).map(|l| cap(LinkId(l as u32)) as i128).collect();
    let residual = |flow: &[i128], l: LinkId, from: SwitchId| -> i128 {
        let link = graph.link(l);
        let f = if link.a == from { flow[l.index()] } else { -flow[l.index()] };
        caps[l.index()] - f
    };
    let mut total: i128 = 0;
    loop {
        let mut parent: Vec<Option<(SwitchId, LinkId)>> = vec![None; graph.num_switches()];
        let mut seen = vec![false; graph.num_switches()];
        seen[source.index()] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(s) = queue.pop_front() {
            if s == sink {
                break;
            }
            for &(t, l) in graph.adjacency(s) {
                if !seen[t.index()] && residual(&flow, l, s) > 0 {
                    seen[t.index()] = true;
                    parent[t.index()] = Some((s, l));
                    queue.push_back(t);
                }
            }
        }
        if !seen[sink.index()] {
            break;
        }
        let mut bottleneck = i128::MAX;
        let mut v = sink;
        while let Some((u, l)) = parent[v.index()] {
            bottleneck = bottleneck.min(residual(&flow, l, u));
            v = u;
        }
        let mut v = sink;
        while let Some((u, l)) = parent[v.index()] {
            if graph.link(l).a == u {
                flow[l.index()] += bottleneck;
            } else {
                flow[l.index()] -= bottleneck;
            }
            v = u;
        }
        total += bottleneck;
    }
    total as u64
}

/// Total backhaul capacity toward `cell` over raw link capacities.
/// A cell with no path gets zero.
pub fn bottleneck_capacity(cell: CellId, graph: &BackhaulGraph) -> Result<u64> {
    let sink = graph.switch_of(cell)?;
    Ok(max_flow(graph, sink, |l| graph.link(l).capacity_bps))
}

/// Backhaul capacity toward `cell` available to one traffic class.
pub fn class_capacity(cell: CellId, graph: &BackhaulGraph, class: TrafficClass) -> Result<u64> {
    let sink = graph.switch_of(cell)?;
    Ok(max_flow(graph, sink, |l| graph.class_cap(l, class)))
}

/// Class capacity toward `cell` left after the bandwidth already used on
/// each link by every flow crossing it. Floors at zero.
pub fn residual_capacity(cell: CellId, graph: &BackhaulGraph, usage: &LinkUsage, class: TrafficClass) -> Result<u64> {
    let sink = graph.switch_of(cell)?;
    Ok(max_flow(graph, sink, |l| usage.residual(graph, l, class)))
}

/// Ordered switch sequence from the PGW to a cell's switch and the links between them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub switches: Vec<SwitchId>,
    pub links: Vec<LinkId>,
}

impl Path {
    /// Number of forwarding hops, one per switch (the last one delivers to the eNodeB).
    pub fn hop_count(&self) -> usize {
        self.switches.len()
    }

    pub fn contains_link(&self, l: LinkId) -> bool {
        self.links.contains(&l)
    }
}

/// Minimum-hop route from the PGW to `cell` using only links whose class
/// residual covers `demand_bps`. Among equal-length routes the
/// lexicographically smallest switch sequence wins.
pub fn spf_route(
    cell: CellId,
    graph: &BackhaulGraph,
    usage: &LinkUsage,
    class: TrafficClass,
    demand_bps: u64,
) -> Result<Path> {
    let sink = graph.switch_of(cell)?;
    let source = graph.pgw();
    let n = graph.num_switches();
    let mut parent: Vec<Option<(SwitchId, LinkId)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[source.index()] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(s) = queue.pop_front() {
        if s == sink {
            break;
        }
        for &(t, l) in graph.adjacency(s) {
            if !seen[t.index()] && usage.residual(graph, l, class) >= demand_bps {
                seen[t.index()] = true;
                parent[t.index()] = Some((s, l));
                queue.push_back(t);
            }
        }
    }
    if !seen[sink.index()] {
        return Err(Error::RouteNotFound(cell));
    }
    let mut switches = vec![sink];
    let mut links = Vec::new();
    let mut v = sink;
    while let Some((u, l)) = parent[v.index()] {
        switches.push(u);
        links.push(l);
        v = u;
    }
    switches.reverse();
    links.reverse();
    Ok(Path { switches, links })
}

/// Backhaul admission: a GBR flow is admitted iff its demand fits the class
/// residual of every link on its path, and is then reserved. NGBR flows are
/// always admitted into the aggregate share.
pub fn admit_flow_backhaul(
    class: TrafficClass,
    demand_bps: u64,
    path: &Path,
    graph: &BackhaulGraph,
    usage: &mut LinkUsage,
) -> bool {
    match class {
        TrafficClass::Ngbr => true,
        TrafficClass::Gbr => usage.reserve(graph, path, TrafficClass::Gbr, demand_bps).is_ok(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeterKind {
    GbrDedicated,
    NgbrAggregate,
    NgbrClass(NgbrApp),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meter {
    pub id: MeterId,
    pub rate_bps: u64,
    pub kind: MeterKind,
    pub member_flows: BTreeSet<FlowId>,
}

/// Splits `total` proportionally to `weights` into integers summing to
/// `total` exactly (largest remainder, ties to the lower index).
pub fn largest_remainder(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if !(sum > 0.0) {
        let mut out = vec![0; weights.len()];
        out[0] = total;
        return out;
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut left = total.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut i = 0;
    while left > 0 {
        out[order[i % order.len()]] += 1;
        left -= 1;
        i += 1;
    }
    out
}

/// Congestion-aware NGBR meter rates: each class gets `Q_f / ΣQ` of the
/// link's NGBR capacity. Empty input yields no meters.
pub fn split_ngbr_meters(classes: &[(NgbrApp, f64)], ngbr_cap_bps: u64) -> Vec<(NgbrApp, u64)> {
    let weights: Vec<f64> = classes.iter().map(|(_, q)| *q).collect();
    let rates = largest_remainder(&weights, ngbr_cap_bps);
    classes.iter().map(|(c, _)| *c).zip(rates).collect()
}

/// Bits served per flow by one meter during a period.
///
/// A dedicated meter caps each flow at its rate. An aggregate meter serves
/// everything while the total offer fits; otherwise it shares its rate in
/// proportion to each flow's offer.
pub fn apply_meter(kind: MeterKind, rate_bits: u64, offered_bits: &[u64]) -> Vec<u64> {
    match kind {
        MeterKind::GbrDedicated => offered_bits.iter().map(|&o| o.min(rate_bits)).collect(),
        MeterKind::NgbrAggregate | MeterKind::NgbrClass(_) => {
            let total: u128 = offered_bits.iter().map(|&o| o as u128).sum();
            if total <= rate_bits as u128 {
                return offered_bits.to_vec();
            }
            let mut out: Vec<u64> =
                offered_bits.iter().map(|&o| ((o as u128 * rate_bits as u128) / total) as u64).collect();
            let mut left = rate_bits - out.iter().sum::<u64>();
            let mut order: Vec<usize> = (0..out.len()).collect();
            let rem = |i: usize| (offered_bits[i] as u128 * rate_bits as u128) % total;
            order.sort_by(|&a, &b| rem(b).cmp(&rem(a)).then(a.cmp(&b)));
            for &i in order.iter().cycle() {
                if left == 0 {
                    break;
                }
                if out[i] < offered_bits[i] {
                    out[i] += 1;
                    left -= 1;
                }
            }
            out
        }
    }
}
