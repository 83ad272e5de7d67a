//! Brute-force reference implementations and random generators shared by
//! the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdnlte::backhaul::{BackhaulGraph, LinkUsage, Path, TrafficClass};
use sdnlte::controller::{Controller, ControllerConfig};
use sdnlte::ids::{CellId, LinkId, SwitchId, UserId};
use sdnlte::topology::{NgbrApp, UserKind};
use std::collections::{BTreeMap, BTreeSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected random graph: a random spanning tree plus extra (possibly
/// parallel) links. Capacities come from a small set so ties are common.
pub fn random_graph(r: &mut ChaCha8Rng, max_switches: usize, num_cells: usize) -> BackhaulGraph {
    let n = r.gen_range(2..=max_switches);
    let caps = [4_000_000u64, 10_000_000, 10_000_000, 25_000_000, 50_000_000];
    let mut links = Vec::new();
    for i in 1..n {
        let j = r.gen_range(0..i);
        links.push((SwitchId(i as u32), SwitchId(j as u32), caps[r.gen_range(0..caps.len())], 0.5));
    }
    for _ in 0..r.gen_range(0..=n.min(8)) {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        if a != b {
            links.push((SwitchId(a as u32), SwitchId(b as u32), caps[r.gen_range(0..caps.len())], 0.5));
        }
    }
    let attach = (0..num_cells).map(|c| (CellId(c as u32), SwitchId(r.gen_range(1..n) as u32))).collect();
    let names = (0..n).map(|i| format!("s{i}")).collect();
    BackhaulGraph::new(names, links, attach, SwitchId(0), 0.6).expect("valid random graph")
}

/// Exhaustive search over simple paths by increasing length. Among the
/// shortest feasible paths the smallest (switches, links) sequence wins.
pub fn shortest_path_oracle(
    g: &BackhaulGraph,
    u: &LinkUsage,
    class: TrafficClass,
    demand: u64,
    cell: CellId,
) -> Option<Path> {
    let sink = g.switch_of(cell).ok()?;
    let src = g.pgw();
    if src == sink {
        return Some(Path { switches: vec![src], links: vec![] });
    }
    let n = g.num_switches();
    for len in 1..n {
        let mut best: Option<(Vec<SwitchId>, Vec<LinkId>)> = None;
        let mut sw = vec![src];
        let mut ls = Vec::new();
        extend(g, u, class, demand, sink, len, &mut sw, &mut ls, &mut best);
        if let Some((switches, links)) = best {
            return Some(Path { switches, links });
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn extend(
    g: &BackhaulGraph,
    u: &LinkUsage,
    class: TrafficClass,
    demand: u64,
    sink: SwitchId,
    len: usize,
    sw: &mut Vec<SwitchId>,
    ls: &mut Vec<LinkId>,
    best: &mut Option<(Vec<SwitchId>, Vec<LinkId>)>,
) {
    let here = *sw.last().unwrap();
    if ls.len() == len {
        if here == sink {
            let cand = (sw.clone(), ls.clone());
            if best.as_ref().is_none_or(|b| cand < *b) {
                *best = Some(cand);
            }
        }
        return;
    }
    if here == sink {
        return;
    }
    for l in g.links() {
        let next = if l.a == here {
            l.b
        } else if l.b == here {
            l.a
        } else {
            continue;
        };
        if sw.contains(&next) || u.residual(g, l.id, class) < demand {
            continue;
        }
        sw.push(next);
        ls.push(l.id);
        extend(g, u, class, demand, sink, len, sw, ls, best);
        sw.pop();
        ls.pop();
    }
}

/// Minimum cut between the PGW and `sink`, by enumerating every switch
/// subset that contains the PGW and not the sink.
pub fn min_cut(g: &BackhaulGraph, sink: SwitchId, cap: impl Fn(LinkId) -> u64) -> u64 {
    let src = g.pgw();
    if src == sink {
        return u64::MAX;
    }
    let n = g.num_switches();
    let mut best = u64::MAX;
    for mask in 0u32..(1 << n) {
        let inside = |s: SwitchId| mask & (1 << s.0) != 0;
        if !inside(src) || inside(sink) {
            continue;
        }
        let cut: u64 = g.links().iter().filter(|l| inside(l.a) != inside(l.b)).map(|l| cap(l.id)).sum();
        best = best.min(cut);
    }
    best
}

/// GBR-class capacity and residual toward `cell`, from the cut oracle.
pub fn capacity_oracle(g: &BackhaulGraph, u: &LinkUsage, cell: CellId) -> (u64, u64) {
    let sink = g.switch_of(cell).unwrap();
    let total = min_cut(g, sink, |l| g.class_cap(l, TrafficClass::Gbr));
    let residual = min_cut(g, sink, |l| g.class_cap(l, TrafficClass::Gbr).saturating_sub(u.used(l, TrafficClass::Gbr)));
    (total, residual)
}

pub fn ring_neighbors(num_cells: usize) -> Vec<BTreeSet<CellId>> {
    (0..num_cells)
        .map(|c| {
            let mut s = BTreeSet::new();
            if num_cells > 1 {
                s.insert(CellId(((c + 1) % num_cells) as u32));
                s.insert(CellId(((c + num_cells - 1) % num_cells) as u32));
            }
            s.remove(&CellId(c as u32));
            s
        })
        .collect()
}

/// One randomized step against a controller.
#[derive(Clone, Copy, Debug)]
pub enum Op {
    Attach { user: u32, gbr: bool, http: bool, demand: u64, cell: u32 },
    Switch { user: u32, cell: u32 },
    Retry,
    Tick,
    Serve,
}

pub fn random_op(r: &mut ChaCha8Rng, users: u32, cells: u32) -> Op {
    match r.gen_range(0..10) {
        0..=3 => Op::Attach {
            user: r.gen_range(0..users),
            gbr: r.gen_bool(0.7),
            http: r.gen_bool(0.5),
            demand: [250_000u64, 1_000_000, 3_000_000][r.gen_range(0..3)],
            cell: r.gen_range(0..cells),
        },
        4..=6 => Op::Switch { user: r.gen_range(0..users), cell: r.gen_range(0..cells) },
        7 => Op::Retry,
        8 => Op::Tick,
        _ => Op::Serve,
    }
}

/// Applies an op. Attaching an already registered user is turned into a move.
pub fn apply(c: &mut Controller, op: Op, tti: u64) {
    match op {
        Op::Attach { user, gbr, http, demand, cell } => {
            if c.flow_of(UserId(user)).is_some() {
                c.on_path_switch_request(UserId(user), CellId(cell), tti);
            } else {
                let (kind, app, w) = if gbr {
                    (UserKind::Gbr, None, 1.0)
                } else if http {
                    (UserKind::Ngbr, Some(NgbrApp::Http), 5.0)
                } else {
                    (UserKind::Ngbr, Some(NgbrApp::Ftp), 1.0)
                };
                c.attach_bearer(UserId(user), kind, app, w, demand, CellId(cell), tti);
            }
        }
        Op::Switch { user, cell } => {
            c.on_path_switch_request(UserId(user), CellId(cell), tti);
        }
        Op::Retry => c.retry_dropped(tti),
        Op::Tick => c.period_tick(tti),
        Op::Serve => {
            let offered: BTreeMap<UserId, f64> = c.flows().values().map(|f| (f.user, 2_000_000.0)).collect();
            c.serve_backhaul(&offered, 1.0);
        }
    }
}

pub fn random_controller(r: &mut ChaCha8Rng, num_cells: usize) -> Controller {
    let g = random_graph(r, 8, num_cells);
    Controller::new(g, ring_neighbors(num_cells), ControllerConfig::default())
}

/// Independent check that admitted GBR demand fits every link's GBR cap.
pub fn gbr_overcommit(c: &Controller) -> Option<LinkId> {
    let mut load: BTreeMap<LinkId, u64> = BTreeMap::new();
    for f in c.flows().values().filter(|f| f.kind == UserKind::Gbr) {
        if let Some(p) = &f.path {
            for &l in &p.links {
                *load.entry(l).or_default() += f.demand_bps;
            }
        }
    }
    load.into_iter().find(|&(l, v)| v > c.graph().class_cap(l, TrafficClass::Gbr)).map(|(l, _)| l)
}

/// Capacity database against the cut oracle, cell by cell.
pub fn capacity_mismatch(c: &Controller) -> Option<CellId> {
    c.graph().cell_attachments().keys().copied().find(|&cell| {
        let (t, r) = capacity_oracle(c.graph(), c.usage(), cell);
        let have = c.capacity(cell);
        have.c_bh_bps != t || have.c_residual_bps != r
    })
}
