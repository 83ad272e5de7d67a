//! Cell layouts, backhaul presets and initial user placement.
//!
//! Sites are omnidirectional and sit on a hexagonal grid with a 500 m
//! inter-site distance. Scenario 1 has three mutually adjacent cells;
//! scenarios 2 and 3 have a centre cell (id 3) and a ring of six.

use crate::backhaul::{largest_remainder, BackhaulGraph, DEFAULT_DL_SHARE, DEFAULT_GBR_SHARE};
use crate::error::{Error, Result};
use crate::ids::{CellId, SwitchId, UserId};
use crate::rng::{stream_rng, Stream};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const INTER_SITE_DISTANCE_M: f64 = 500.0;
pub const CELL_RADIUS_M: f64 = 250.0;
pub const INNER_RADIUS_M: f64 = 170.0;
pub const UNIFORM_RADIUS_M: f64 = 200.0;
pub const MOBILITY_MARGIN_M: f64 = 50.0;
pub const VEHICULAR_SPEED_MPS: f64 = 30_000.0 / 3600.0;
pub const PEDESTRIAN_SPEED_MPS: f64 = 0.9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn polar(center: Point, r: f64, angle: f64) -> Self {
        Self::new(center.x + r * angle.cos(), center.y + r * angle.sin())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserKind {
    Gbr,
    Ngbr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgbrApp {
    Http,
    Ftp,
}

impl NgbrApp {
    pub fn as_str(self) -> &'static str {
        match self {
            NgbrApp::Http => "http",
            NgbrApp::Ftp => "ftp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedClass {
    Vehicular,
    Pedestrian,
    Stationary,
}

impl SpeedClass {
    pub fn speed_mps(self) -> f64 {
        match self {
            SpeedClass::Vehicular => VEHICULAR_SPEED_MPS,
            SpeedClass::Pedestrian => PEDESTRIAN_SPEED_MPS,
            SpeedClass::Stationary => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: CellId,
    pub position: Point,
    pub radius_m: f64,
    pub neighbors: BTreeSet<CellId>,
    pub attached_switch: SwitchId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub id: UserId,
    pub kind: UserKind,
    pub gbr_demand_bps: u64,
    pub ngbr_app: Option<NgbrApp>,
    pub qos_weight: f64,
    pub speed_class: SpeedClass,
    pub position: Point,
    pub velocity: Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    Asymmetric,
}

/// What to simulate: layout, population and its mix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub scenario: u8,
    pub num_users: usize,
    pub distribution: Distribution,
    /// Share of users placed in the loaded cell; only read with `asymmetric`.
    pub doa: Option<f64>,
    pub gbr_fraction: f64,
    /// Share of NGBR users running HTTP; the rest run FTP.
    pub http_fraction: f64,
    pub gbr_demand_bps: u64,
    pub http_weight: f64,
    pub ftp_weight: f64,
    pub vehicular_fraction: f64,
    pub pedestrian_fraction: f64,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            scenario: 1,
            num_users: 150,
            distribution: Distribution::Uniform,
            doa: None,
            gbr_fraction: 0.9,
            http_fraction: 0.5,
            gbr_demand_bps: 250_000,
            http_weight: 5.0,
            ftp_weight: 1.0,
            vehicular_fraction: 0.7,
            pedestrian_fraction: 0.2,
            seed: 1,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(1..=3).contains(&self.scenario) {
            return Err(Error::UnknownScenario(self.scenario));
        }
        for (name, v) in [
            ("gbr_fraction", self.gbr_fraction),
            ("http_fraction", self.http_fraction),
            ("vehicular_fraction", self.vehicular_fraction),
            ("pedestrian_fraction", self.pedestrian_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("scenario.{name} = {v} outside [0, 1]"));
            }
        }
        if self.vehicular_fraction + self.pedestrian_fraction > 1.0 + 1e-12 {
            return bad("vehicular_fraction + pedestrian_fraction exceeds 1".into());
        }
        if !(self.http_weight > 0.0 && self.ftp_weight > 0.0) {
            return bad("QoS weights must be positive".into());
        }
        if self.gbr_demand_bps == 0 {
            return bad("scenario.gbr_demand_bps must be positive".into());
        }
        if let Some(doa) = self.doa {
            let min = 1.0 / num_cells(self.scenario) as f64;
            if !(doa >= min - 1e-12 && doa <= 1.0) {
                return Err(Error::DoaOutOfRange { doa, min });
            }
        }
        Ok(())
    }
}

/// Backhaul capacities for the built-in scenarios, or a custom graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackhaulConfig {
    pub dl_share: f64,
    pub gbr_share: f64,
    pub core_bps: u64,
    pub access_bps: u64,
    /// Scenario 2 centre-cell link.
    pub center_bps: u64,
    /// Scenario 3 aggregation ring.
    pub aggregation_bps: u64,
    pub custom: Option<CustomTopology>,
}

impl Default for BackhaulConfig {
    fn default() -> Self {
        Self {
            dl_share: DEFAULT_DL_SHARE,
            gbr_share: DEFAULT_GBR_SHARE,
            core_bps: 1_000_000_000,
            access_bps: 50_000_000,
            center_bps: 25_000_000,
            aggregation_bps: 100_000_000,
            custom: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomLink {
    pub a: String,
    pub b: String,
    pub capacity_bps: u64,
}

/// User-supplied switch graph. `attach[i]` names the switch of cell `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomTopology {
    pub switches: Vec<String>,
    pub links: Vec<CustomLink>,
    pub attach: Vec<String>,
    pub pgw: String,
}

/// Area users may occupy: the union of disks around cell sites.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub centers: Vec<Point>,
    pub radius: f64,
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        self.centers.iter().any(|c| c.dist(p) <= self.radius + 1e-9)
    }

    pub fn nearest_center(&self, p: Point) -> Point {
        *self.centers.iter().min_by(|a, b| a.dist(p).total_cmp(&b.dist(p))).expect("region has at least one center")
    }
}

/// Static part of a scenario: cells and backhaul.
#[derive(Clone, Debug)]
pub struct Layout {
    pub scenario: u8,
    pub cells: Vec<Cell>,
    pub graph: BackhaulGraph,
    /// Cell that asymmetric placements overload.
    pub loaded_cell: CellId,
    /// Center of the uniform placement disk used in scenario 1.
    pub centroid: Point,
    pub region: Region,
}

pub fn num_cells(scenario: u8) -> usize {
    if scenario == 1 {
        3
    } else {
        7
    }
}

fn site_positions(scenario: u8) -> Vec<Point> {
    let d = INTER_SITE_DISTANCE_M;
    if scenario == 1 {
        return vec![Point::new(0.0, 0.0), Point::new(d, 0.0), Point::new(d / 2.0, d * 3f64.sqrt() / 2.0)];
    }
    let ring = |k: usize| Point::polar(Point::default(), d, k as f64 * std::f64::consts::PI / 3.0);
    vec![ring(0), ring(1), ring(2), Point::default(), ring(3), ring(4), ring(5)]
}

fn hex_neighbors(positions: &[Point]) -> Vec<BTreeSet<CellId>> {
    positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            positions
                .iter()
                .enumerate()
                .filter(|&(j, q)| j != i && p.dist(*q) <= INTER_SITE_DISTANCE_M * 1.01)
                .map(|(j, _)| CellId::from(j))
                .collect()
        })
        .collect()
}

fn preset_graph(scenario: u8, cfg: &BackhaulConfig) -> Result<BackhaulGraph> {
    let mut names: Vec<String> = vec!["pgw".into(), "sgw".into()];
    let mut links: Vec<(usize, usize, u64)> = vec![(0, 1, cfg.core_bps)];
    let n = num_cells(scenario);
    let first_access = match scenario {
        1 | 2 => 2,
        _ => 4,
    };
    if scenario == 3 {
        names.extend(["agg1".to_string(), "agg2".to_string()]);
        links.extend([(1, 2, cfg.aggregation_bps), (2, 3, cfg.aggregation_bps), (3, 1, cfg.aggregation_bps)]);
    }
    names.extend((0..n).map(|i| format!("s{i}")));
    let s = |i: usize| first_access + i;
    match scenario {
        1 => links.extend((0..n).map(|i| (1, s(i), cfg.access_bps))),
        2 => links.extend((0..n).map(|i| (1, s(i), if i == 3 { cfg.center_bps } else { cfg.access_bps }))),
        _ => {
            let ring_a = [2, s(0), s(1), s(2), s(3), 2];
            let ring_b = [3, s(4), s(5), s(6), 3];
            for ring in [&ring_a[..], &ring_b[..]] {
                links.extend(ring.windows(2).map(|w| (w[0], w[1], cfg.access_bps)));
            }
        }
    }
    let attach = (0..n).map(|i| (CellId::from(i), SwitchId::from(s(i)))).collect();
    let links = links.into_iter().map(|(a, b, c)| (SwitchId::from(a), SwitchId::from(b), c, cfg.dl_share)).collect();
    BackhaulGraph::new(names, links, attach, SwitchId(0), cfg.gbr_share)
}

fn custom_graph(n: usize, t: &CustomTopology, cfg: &BackhaulConfig) -> Result<BackhaulGraph> {
    let idx = |name: &str| {
        t.switches
            .iter()
            .position(|s| s == name)
            .map(SwitchId::from)
            .ok_or_else(|| Error::Topology(format!("unknown switch {name:?}")))
    };
    if t.attach.len() != n {
        return Err(Error::Topology(format!("attach lists {} cells, layout has {n}", t.attach.len())));
    }
    let links = t
        .links
        .iter()
        .map(|l| Ok((idx(&l.a)?, idx(&l.b)?, l.capacity_bps, cfg.dl_share)))
        .collect::<Result<Vec<_>>>()?;
    let attach: BTreeMap<CellId, SwitchId> =
        t.attach.iter().enumerate().map(|(i, s)| Ok((CellId::from(i), idx(s)?))).collect::<Result<_>>()?;
    BackhaulGraph::new(t.switches.clone(), links, attach, idx(&t.pgw)?, cfg.gbr_share)
}

/// Builds cells and backhaul for a scenario.
pub fn build_layout(scenario: u8, backhaul: &BackhaulConfig) -> Result<Layout> {
    if !(1..=3).contains(&scenario) {
        return Err(Error::UnknownScenario(scenario));
    }
    let positions = site_positions(scenario);
    let neighbors = hex_neighbors(&positions);
    let graph = match &backhaul.custom {
        Some(t) => custom_graph(positions.len(), t, backhaul)?,
        None => preset_graph(scenario, backhaul)?,
    };
    let cells = positions
        .iter()
        .zip(neighbors)
        .enumerate()
        .map(|(i, (&position, neighbors))| {
            let id = CellId::from(i);
            Ok(Cell { id, position, radius_m: CELL_RADIUS_M, neighbors, attached_switch: graph.switch_of(id)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let loaded_cell = if scenario == 1 { CellId(0) } else { CellId(3) };
    let n = positions.len() as f64;
    let centroid =
        Point::new(positions.iter().map(|p| p.x).sum::<f64>() / n, positions.iter().map(|p| p.y).sum::<f64>() / n);
    let region = Region { centers: positions, radius: CELL_RADIUS_M + MOBILITY_MARGIN_M };
    Ok(Layout { scenario, cells, graph, loaded_cell, centroid, region })
}

/// Layout plus users.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub layout: Layout,
    pub users: Vec<UserProfile>,
}

pub fn build_scenario(spec: &ScenarioSpec, backhaul: &BackhaulConfig) -> Result<Scenario> {
    spec.validate()?;
    let layout = build_layout(spec.scenario, backhaul)?;
    let users = place_users(spec, &layout)?;
    Ok(Scenario { layout, users })
}

/// Uniform point in the annulus `r_min..=r_max` around `center`.
fn sample_annulus<R: Rng>(rng: &mut R, center: Point, r_min: f64, r_max: f64) -> Point {
    let u: f64 = rng.gen();
    let r = (r_min * r_min + u * (r_max * r_max - r_min * r_min)).sqrt();
    let a = rng.gen::<f64>() * std::f64::consts::TAU;
    Point::polar(center, r, a)
}

/// Uniform point over the union of all cell disks (cell chosen uniformly).
fn sample_any_cell<R: Rng>(rng: &mut R, cells: &[Cell]) -> Point {
    let c = &cells[rng.gen_range(0..cells.len())];
    sample_annulus(rng, c.position, 0.0, c.radius_m)
}

fn counts(fractions: &[f64], n: usize) -> Vec<usize> {
    largest_remainder(fractions, n as u64).into_iter().map(|c| c as usize).collect()
}

/// Per-cell user counts for a degree-of-asymmetry placement.
pub fn doa_counts(doa: f64, num_users: usize, num_cells: usize, loaded: CellId) -> Result<Vec<usize>> {
    let min = 1.0 / num_cells as f64;
    if !(doa >= min - 1e-12 && doa <= 1.0) {
        return Err(Error::DoaOutOfRange { doa, min });
    }
    let rest = if num_cells > 1 { (1.0 - doa) / (num_cells - 1) as f64 } else { 0.0 };
    let fr: Vec<f64> = (0..num_cells).map(|i| if i == loaded.index() { doa } else { rest }).collect();
    Ok(counts(&fr, num_users))
}

/// Positions according to the fraction `doa` of users in the loaded cell,
/// the remainder spread evenly over the other cells.
pub fn degree_of_asymmetry_placement<R: Rng>(
    rng: &mut R,
    doa: f64,
    num_users: usize,
    layout: &Layout,
) -> Result<Vec<Point>> {
    let per_cell = doa_counts(doa, num_users, layout.cells.len(), layout.loaded_cell)?;
    let mut out = Vec::with_capacity(num_users);
    for (cell, &k) in layout.cells.iter().zip(&per_cell) {
        for _ in 0..k {
            out.push(sample_annulus(rng, cell.position, 0.0, cell.radius_m));
        }
    }
    Ok(out)
}

fn positions(spec: &ScenarioSpec, layout: &Layout) -> Result<Vec<Point>> {
    let mut rng = stream_rng(spec.seed, Stream::Placement, &[]);
    let n = spec.num_users;
    let loaded = layout.cells[layout.loaded_cell.index()].position;
    match (spec.distribution, spec.doa) {
        (Distribution::Asymmetric, Some(doa)) => degree_of_asymmetry_placement(&mut rng, doa, n, layout),
        (Distribution::Asymmetric, None) => {
            let k = counts(&[0.5, 0.3, 0.2], n);
            let mut out = Vec::with_capacity(n);
            out.extend((0..k[0]).map(|_| sample_annulus(&mut rng, loaded, INNER_RADIUS_M, CELL_RADIUS_M)));
            out.extend((0..k[1]).map(|_| sample_any_cell(&mut rng, &layout.cells)));
            out.extend((0..k[2]).map(|_| sample_annulus(&mut rng, loaded, 0.0, INNER_RADIUS_M)));
            Ok(out)
        }
        (Distribution::Uniform, _) if layout.scenario == 1 => {
            Ok((0..n).map(|_| sample_annulus(&mut rng, layout.centroid, 0.0, UNIFORM_RADIUS_M)).collect())
        }
        (Distribution::Uniform, _) => Ok((0..n).map(|_| sample_any_cell(&mut rng, &layout.cells)).collect()),
    }
}

/// Creates the user population: positions, bearer kinds, NGBR apps and speed classes.
///
/// Category counts are exact (largest remainder); which users get which
/// category is a seeded shuffle so categories are independent of region.
pub fn place_users(spec: &ScenarioSpec, layout: &Layout) -> Result<Vec<UserProfile>> {
    spec.validate()?;
    let n = spec.num_users;
    let pos = positions(spec, layout)?;
    let mut rng = stream_rng(spec.seed, Stream::Categories, &[]);

    let k = counts(&[spec.gbr_fraction, 1.0 - spec.gbr_fraction], n);
    let n_ngbr = k[1];
    let apps = counts(&[spec.http_fraction, 1.0 - spec.http_fraction], n_ngbr);
    let mut kinds: Vec<(UserKind, Option<NgbrApp>)> = Vec::with_capacity(n);
    kinds.extend((0..k[0]).map(|_| (UserKind::Gbr, None)));
    kinds.extend((0..apps[0]).map(|_| (UserKind::Ngbr, Some(NgbrApp::Http))));
    kinds.extend((0..apps[1]).map(|_| (UserKind::Ngbr, Some(NgbrApp::Ftp))));
    kinds.shuffle(&mut rng);

    let stationary = (1.0 - spec.vehicular_fraction - spec.pedestrian_fraction).max(0.0);
    let s = counts(&[spec.vehicular_fraction, spec.pedestrian_fraction, stationary], n);
    let mut speeds: Vec<SpeedClass> = Vec::with_capacity(n);
    speeds.extend(std::iter::repeat_n(SpeedClass::Vehicular, s[0]));
    speeds.extend(std::iter::repeat_n(SpeedClass::Pedestrian, s[1]));
    speeds.extend(std::iter::repeat_n(SpeedClass::Stationary, s[2]));
    speeds.shuffle(&mut rng);

    Ok((0..n)
        .map(|i| {
            let (kind, app) = kinds[i];
            let qos_weight = match app {
                Some(NgbrApp::Http) => spec.http_weight,
                Some(NgbrApp::Ftp) => spec.ftp_weight,
                None => 0.0,
            };
            UserProfile {
                id: UserId::from(i),
                kind,
                gbr_demand_bps: if kind == UserKind::Gbr { spec.gbr_demand_bps } else { 0 },
                ngbr_app: app,
                qos_weight,
                speed_class: speeds[i],
                position: pos[i],
                velocity: Point::default(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backhaul::bottleneck_capacity;

    fn spec(scenario: u8, n: usize, dist: Distribution) -> ScenarioSpec {
        ScenarioSpec { scenario, num_users: n, distribution: dist, ..Default::default() }
    }

    #[test]
    fn scenario_one_shape() {
        let l = build_layout(1, &BackhaulConfig::default()).unwrap();
        assert_eq!(l.cells.len(), 3);
        assert_eq!(l.graph.num_switches(), 5);
        for c in &l.cells {
            assert_eq!(c.neighbors.len(), 2);
        }
    }

    #[test]
    fn scenario_two_center_is_half() {
        let l = build_layout(2, &BackhaulConfig::default()).unwrap();
        let center = bottleneck_capacity(CellId(3), &l.graph).unwrap();
        for c in [0, 1, 2, 4, 5, 6] {
            assert_eq!(2 * center, bottleneck_capacity(CellId(c), &l.graph).unwrap());
        }
        assert_eq!(l.cells[3].neighbors.len(), 6);
        assert_eq!(l.cells[0].neighbors.len(), 3);
    }

    #[test]
    fn scenario_three_rings() {
        let l = build_layout(3, &BackhaulConfig::default()).unwrap();
        let caps: BTreeSet<u64> = l.graph.links().iter().map(|k| k.capacity_bps).collect();
        assert!(caps.contains(&100_000_000) && caps.contains(&50_000_000));
        // Two link-disjoint access paths per cell.
        assert_eq!(bottleneck_capacity(CellId(0), &l.graph).unwrap(), 100_000_000);
    }

    #[test]
    fn unknown_scenario() {
        assert_eq!(build_layout(4, &BackhaulConfig::default()).unwrap_err(), Error::UnknownScenario(4));
    }

    #[test]
    fn neighbors_symmetric_and_irreflexive() {
        for s in 1..=3 {
            let l = build_layout(s, &BackhaulConfig::default()).unwrap();
            for c in &l.cells {
                assert!(!c.neighbors.contains(&c.id));
                for n in &c.neighbors {
                    assert!(l.cells[n.index()].neighbors.contains(&c.id));
                }
            }
        }
    }

    #[test]
    fn category_counts() {
        let sp = spec(1, 100, Distribution::Uniform);
        let l = build_layout(1, &BackhaulConfig::default()).unwrap();
        let u = place_users(&sp, &l).unwrap();
        assert_eq!(u.iter().filter(|u| u.kind == UserKind::Gbr).count(), 90);
        let by = |c: SpeedClass| u.iter().filter(|u| u.speed_class == c).count();
        assert_eq!((by(SpeedClass::Vehicular), by(SpeedClass::Pedestrian), by(SpeedClass::Stationary)), (70, 20, 10));
    }

    #[test]
    fn asymmetric_regions() {
        let sp = spec(1, 100, Distribution::Asymmetric);
        let l = build_layout(1, &BackhaulConfig::default()).unwrap();
        let u = place_users(&sp, &l).unwrap();
        let c = l.cells[0].position;
        let outer =
            u[..50].iter().filter(|u| (INNER_RADIUS_M..=CELL_RADIUS_M + 1e-9).contains(&u.position.dist(c))).count();
        let inner = u[80..].iter().filter(|u| u.position.dist(c) <= INNER_RADIUS_M + 1e-9).count();
        assert_eq!((outer, inner), (50, 20));
    }

    #[test]
    fn doa_examples() {
        assert_eq!(doa_counts(0.6, 150, 3, CellId(0)).unwrap(), vec![90, 30, 30]);
        assert_eq!(doa_counts(1.0, 150, 3, CellId(0)).unwrap(), vec![150, 0, 0]);
        assert_eq!(doa_counts(1.0 / 3.0, 150, 3, CellId(0)).unwrap(), vec![50, 50, 50]);
        assert!(matches!(doa_counts(0.2, 150, 3, CellId(0)), Err(Error::DoaOutOfRange { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn placements_lie_in_declared_regions(seed in any::<u64>(), n in 0usize..200, scenario in 1u8..=3, asym in any::<bool>()) {
                let dist = if asym { Distribution::Asymmetric } else { Distribution::Uniform };
                let sp = ScenarioSpec { seed, ..spec(scenario, n, dist) };
                let l = build_layout(scenario, &BackhaulConfig::default()).unwrap();
                let u = place_users(&sp, &l).unwrap();
                prop_assert_eq!(u.len(), n);
                let cell_area = Region { centers: l.region.centers.clone(), radius: CELL_RADIUS_M };
                for p in &u {
                    prop_assert!(cell_area.contains(p.position) || (scenario == 1 && !asym && p.position.dist(l.centroid) <= UNIFORM_RADIUS_M + 1e-9));
                }
                let gbr = u.iter().filter(|u| u.kind == UserKind::Gbr).count();
                prop_assert!((gbr as f64 - 0.9 * n as f64).abs() <= 1.0);
            }

            #[test]
            fn doa_counts_sum(doa in 0.34f64..=1.0, n in 0usize..500) {
                let c = doa_counts(doa, n, 3, CellId(0)).unwrap();
                prop_assert_eq!(c.iter().sum::<usize>(), n);
                prop_assert!((c[0] as f64 - doa * n as f64).abs() <= 1.0);
            }
        }
    }
}
