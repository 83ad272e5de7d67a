//! Resource usage and load algebra.
//!
//! RB quantities are fractional averages over an LB period. Rounding is
//! applied only to the backhaul RB budget (ceiling) and the per-user NGBR
//! share (floor).

use crate::ids::{CellId, UserId};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// A load value, or the sentinel for a user that cannot be served at all.
/// `Unservable` orders above every finite load.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Load {
    Finite(f64),
    Unservable,
}

impl Load {
    pub const ZERO: Load = Load::Finite(0.0);

    pub fn value(self) -> Option<f64> {
        match self {
            Load::Finite(v) => Some(v),
            Load::Unservable => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Load::Finite(_))
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Load {
        match self {
            Load::Finite(v) => Load::Finite(f(v)),
            Load::Unservable => Load::Unservable,
        }
    }

    /// Smallest integer not below the value.
    pub fn whole_rbs(self) -> Option<u64> {
        self.value().map(|v| v.ceil() as u64)
    }
}

impl std::ops::Add for Load {
    type Output = Load;
    fn add(self, o: Load) -> Load {
        match (self, o) {
            (Load::Finite(a), Load::Finite(b)) => Load::Finite(a + b),
            _ => Load::Unservable,
        }
    }
}

impl std::iter::Sum for Load {
    fn sum<I: Iterator<Item = Load>>(iter: I) -> Load {
        iter.fold(Load::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for Load {
    fn partial_cmp(&self, o: &Load) -> Option<Ordering> {
        match (self, o) {
            (Load::Finite(a), Load::Finite(b)) => a.partial_cmp(b),
            (Load::Finite(_), Load::Unservable) => Some(Ordering::Less),
            (Load::Unservable, Load::Finite(_)) => Some(Ordering::Greater),
            (Load::Unservable, Load::Unservable) => Some(Ordering::Equal),
        }
    }
}

/// RBs per TTI a GBR user needs: demand over the smaller of the per-RB
/// access rate and the backhaul rate available to it (`None` = unconstrained).
pub fn used_rbs_gbr(demand_bps: f64, eta: f64, bh_rate_bps: Option<f64>, rb_bandwidth_hz: f64) -> Load {
    if demand_bps <= 0.0 {
        return Load::ZERO;
    }
    let access = rb_bandwidth_hz * eta;
    let denom = bh_rate_bps.map_or(access, |b| access.min(b));
    if denom > 0.0 {
        Load::Finite(demand_bps / denom)
    } else {
        Load::Unservable
    }
}

/// Access RBs usable by a user as seen from the backhaul: `⌈C_BH / (BW·η)⌉`.
/// Unconstrained backhaul or zero efficiency yields infinity.
pub fn backhaul_rbs(c_bh_bps: Option<f64>, eta: f64, rb_bandwidth_hz: f64) -> f64 {
    match c_bh_bps {
        Some(c) if eta > 0.0 => (c / (rb_bandwidth_hz * eta)).ceil(),
        _ => f64::INFINITY,
    }
}

/// Fraction of the net RB budget `min(w_AC, w_BH)` occupied by `used` RBs.
pub fn user_load(used: Load, w_ac: f64, w_bh: f64) -> Load {
    match used {
        Load::Unservable => Load::Unservable,
        Load::Finite(0.0) => Load::ZERO,
        Load::Finite(u) => {
            let net = w_ac.min(w_bh);
            if net > 0.0 {
                Load::Finite(u / net)
            } else {
                Load::Unservable
            }
        }
    }
}

/// Mean per-cell load; zero for an empty network.
pub fn average_load(cell_loads: &[Load]) -> Load {
    if cell_loads.is_empty() {
        return Load::ZERO;
    }
    cell_loads.iter().copied().sum::<Load>().map(|s| s / cell_loads.len() as f64)
}

/// Jain's index over per-cell loads. All-zero (or empty) input is perfectly fair.
pub fn jain_fairness(cell_loads: &[f64]) -> f64 {
    let s: f64 = cell_loads.iter().sum();
    let sq: f64 = cell_loads.iter().map(|x| x * x).sum();
    if sq == 0.0 {
        return 1.0;
    }
    s * s / (cell_loads.len() as f64 * sq)
}

/// GBR objective `ξ·(1 − ρ̄)`.
pub fn objective(cell_loads: &[f64]) -> f64 {
    if cell_loads.is_empty() {
        return 1.0;
    }
    let avg = cell_loads.iter().sum::<f64>() / cell_loads.len() as f64;
    jain_fairness(cell_loads) * (1.0 - avg)
}

/// Harmonic number `Σ_{j=1..n} 1/j`.
pub fn multiuser_diversity_gain(n: usize) -> f64 {
    (1..=n).map(|j| 1.0 / j as f64).sum()
}

/// Proportional-fair NGBR rate estimate for one of `n_ngbr` users sharing
/// `residual_rbs` RBs.
pub fn ngbr_rate(eta: f64, rb_bandwidth_hz: f64, residual_rbs: f64, n_ngbr: usize) -> f64 {
    if n_ngbr == 0 || residual_rbs <= 0.0 {
        return 0.0;
    }
    let share = (residual_rbs / n_ngbr as f64).floor();
    eta * rb_bandwidth_hz * share * multiuser_diversity_gain(n_ngbr)
}

/// RB budget of one cell. `c_bh_bps = None` ignores the backhaul.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellBudget {
    pub w_ac: f64,
    pub c_bh_bps: Option<f64>,
}

/// One GBR user's resource usage at its cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbrUsage {
    pub cell: CellId,
    pub demand_bps: f64,
    pub eta: f64,
    pub used_rbs: Load,
    pub net_rbs: f64,
}

impl GbrUsage {
    pub fn load(&self, budget: &CellBudget) -> Load {
        user_load(self.used_rbs, budget.w_ac, self.net_rbs)
    }
}

/// Per-LB-period accounting of GBR RB usage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadLedger {
    pub rb_bandwidth_hz: f64,
    pub cells: Vec<CellBudget>,
    pub gbr: BTreeMap<UserId, GbrUsage>,
}

impl LoadLedger {
    pub fn new(rb_bandwidth_hz: f64, cells: Vec<CellBudget>) -> Self {
        Self { rb_bandwidth_hz, cells, gbr: BTreeMap::new() }
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Usage a GBR user would have at `cell` with efficiency `eta`.
    pub fn usage_at(&self, cell: CellId, demand_bps: f64, eta: f64) -> GbrUsage {
        let b = &self.cells[cell.index()];
        GbrUsage {
            cell,
            demand_bps,
            eta,
            used_rbs: used_rbs_gbr(demand_bps, eta, b.c_bh_bps, self.rb_bandwidth_hz),
            net_rbs: backhaul_rbs(b.c_bh_bps, eta, self.rb_bandwidth_hz),
        }
    }

    pub fn insert_gbr(&mut self, user: UserId, cell: CellId, demand_bps: f64, eta: f64) {
        let u = self.usage_at(cell, demand_bps, eta);
        self.gbr.insert(user, u);
    }

    pub fn set_gbr(&mut self, user: UserId, usage: GbrUsage) {
        self.gbr.insert(user, usage);
    }

    pub fn remove(&mut self, user: UserId) -> Option<GbrUsage> {
        self.gbr.remove(&user)
    }

    /// Net RBs `min(w_AC, w_BH)` of a usage record.
    pub fn net(&self, u: &GbrUsage) -> f64 {
        self.cells[u.cell.index()].w_ac.min(u.net_rbs)
    }

    pub fn user_load(&self, user: UserId) -> Option<Load> {
        self.gbr.get(&user).map(|u| u.load(&self.cells[u.cell.index()]))
    }

    /// Total GBR RBs in use at a cell.
    pub fn used_total(&self, cell: CellId) -> Load {
        self.gbr.values().filter(|u| u.cell == cell).map(|u| u.used_rbs).sum()
    }

    pub fn cell_loads(&self) -> Vec<Load> {
        let mut out = vec![Load::ZERO; self.cells.len()];
        for u in self.gbr.values() {
            let i = u.cell.index();
            out[i] = out[i] + u.load(&self.cells[i]);
        }
        out
    }

    pub fn report(&self) -> LoadReport {
        let rho = self.gbr.keys().map(|&k| (k, self.user_load(k).expect("present"))).collect();
        LoadReport::from_cell_loads(rho, self.cell_loads())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rho: BTreeMap<UserId, Load>,
    pub rho_cell: Vec<Load>,
    pub rho_avg: Load,
    /// `None` when some cell is unservable.
    pub fairness: Option<f64>,
}

impl LoadReport {
    pub fn from_cell_loads(rho: BTreeMap<UserId, Load>, rho_cell: Vec<Load>) -> Self {
        let finite: Option<Vec<f64>> = rho_cell.iter().map(|l| l.value()).collect();
        Self { rho, rho_avg: average_load(&rho_cell), fairness: finite.map(|f| jain_fairness(&f)), rho_cell }
    }

    pub fn finite_cell_loads(&self) -> Option<Vec<f64>> {
        self.rho_cell.iter().map(|l| l.value()).collect()
    }

    pub fn objective(&self) -> Option<f64> {
        self.finite_cell_loads().map(|l| objective(&l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn used_rbs_examples() {
        let l = used_rbs_gbr(250e3, 2.0, None, 180e3);
        assert_eq!(l.whole_rbs(), Some(1));
        assert_eq!(used_rbs_gbr(0.0, 2.0, None, 180e3), Load::ZERO);
        assert_eq!(used_rbs_gbr(250e3, 2.0, Some(100e3), 180e3), Load::Finite(2.5));
        assert_eq!(used_rbs_gbr(250e3, 0.0, Some(0.0), 180e3), Load::Unservable);
    }

    #[test]
    fn user_load_examples() {
        assert_eq!(user_load(Load::Finite(10.0), 100.0, 200.0), Load::Finite(0.1));
        assert_eq!(user_load(Load::Finite(10.0), 100.0, 50.0), Load::Finite(0.2));
        assert_eq!(user_load(Load::ZERO, 100.0, 0.0), Load::ZERO);
        assert_eq!(user_load(Load::Finite(1.0), 0.0, 10.0), Load::Unservable);
    }

    #[test]
    fn backhaul_rbs_rounds_up() {
        assert_eq!(backhaul_rbs(Some(15e6), 2.0, 180e3), 42.0);
        assert_eq!(backhaul_rbs(None, 2.0, 180e3), f64::INFINITY);
    }

    #[test]
    fn averages() {
        let f = |v: &[f64]| v.iter().map(|&x| Load::Finite(x)).collect::<Vec<_>>();
        assert_eq!(average_load(&f(&[0.3, 0.3, 0.3])).value().map(|v| (v * 1e12).round()), Some(0.3e12));
        assert!(close(average_load(&f(&[0.2, 0.4])).value().unwrap(), 0.3, 1e-12));
        assert_eq!(average_load(&[]), Load::ZERO);
        assert_eq!(average_load(&[Load::ZERO, Load::Unservable]), Load::Unservable);
    }

    #[test]
    fn jain_examples() {
        assert!(close(jain_fairness(&[0.3, 0.3, 0.3]), 1.0, 1e-12));
        assert!(close(jain_fairness(&[0.0, 0.7, 0.0]), 1.0 / 3.0, 1e-12));
        // (1.0)^2 / (3 * 0.36)
        assert!(close(jain_fairness(&[0.2, 0.4, 0.4]), 0.925_925_925_925_925_9, 1e-12));
        assert_eq!(jain_fairness(&[0.0, 0.0]), 1.0);
    }

    #[test]
    fn diversity_gain_and_ngbr_rate() {
        assert_eq!(multiuser_diversity_gain(0), 0.0);
        assert_eq!(multiuser_diversity_gain(1), 1.0);
        assert_eq!(multiuser_diversity_gain(2), 1.5);
        assert!(close(multiuser_diversity_gain(5), 137.0 / 60.0, 1e-12));
        let r = ngbr_rate(2.0, 180e3, 50.0, 5);
        assert!(close(r, 2.0 * 180e3 * 10.0 * 137.0 / 60.0, 1e-12));
        assert!((r - 8.22e6).abs() < 0.005e6);
        assert_eq!(ngbr_rate(2.0, 180e3, 0.0, 1), 0.0);
        assert!(close(ngbr_rate(4.0, 180e3, 50.0, 5), 2.0 * r, 1e-12));
    }

    #[test]
    fn unservable_orders_last() {
        assert!(Load::Unservable > Load::Finite(1e300));
        assert!(Load::Finite(0.1) < Load::Finite(0.2));
    }

    #[test]
    fn ledger_report() {
        let mut l = LoadLedger::new(180e3, vec![CellBudget { w_ac: 100.0, c_bh_bps: None }; 2]);
        l.insert_gbr(UserId(0), CellId(0), 180e3 * 10.0, 1.0);
        l.insert_gbr(UserId(1), CellId(1), 180e3 * 20.0, 1.0);
        let r = l.report();
        assert_eq!(r.rho_cell, vec![Load::Finite(0.1), Load::Finite(0.2)]);
        assert!(close(r.fairness.unwrap(), 0.09 / (2.0 * 0.05), 1e-12));
        assert_eq!(l.used_total(CellId(0)), Load::Finite(10.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn loads() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(0.0f64..2.0, 1..8)
        }

        proptest! {
            #[test]
            fn jain_scale_invariant(v in loads(), c in 0.01f64..100.0) {
                let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
                prop_assert!(close(jain_fairness(&v), jain_fairness(&scaled), 1e-9));
            }

            #[test]
            fn jain_bounds(v in loads()) {
                let j = jain_fairness(&v);
                let m = v.len() as f64;
                prop_assert!(j >= 1.0 / m - 1e-12 && j <= 1.0 + 1e-12);
            }

            #[test]
            fn permutation_invariant(mut v in loads(), seed in any::<u64>()) {
                let j = jain_fairness(&v);
                let a = average_load(&v.iter().map(|&x| Load::Finite(x)).collect::<Vec<_>>());
                use rand::{seq::SliceRandom, SeedableRng};
                v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                prop_assert!(close(jain_fairness(&v), j, 1e-12));
                let b = average_load(&v.iter().map(|&x| Load::Finite(x)).collect::<Vec<_>>());
                prop_assert!(close(a.value().unwrap(), b.value().unwrap(), 1e-12));
            }

            #[test]
            fn rb_conservation(users in proptest::collection::vec((0u32..3, 1e3f64..1e6, 0.1f64..6.0), 0..40)) {
                let mut l = LoadLedger::new(180e3, vec![CellBudget { w_ac: 100.0, c_bh_bps: Some(15e6) }; 3]);
                for (i, &(c, d, e)) in users.iter().enumerate() {
                    l.insert_gbr(UserId(i as u32), CellId(c), d, e);
                }
                for c in 0..3 {
                    let sum: f64 = l.gbr.values().filter(|u| u.cell == CellId(c)).map(|u| u.used_rbs.value().unwrap()).sum();
                    prop_assert!(close(l.used_total(CellId(c)).value().unwrap(), sum, 1e-12));
                }
            }

            #[test]
            fn user_load_monotone(d in 1e3f64..1e6, eta in 0.1f64..6.0, w_ac in 1.0f64..200.0, c in 1e5f64..1e8, k in 1.0f64..4.0) {
                let used = used_rbs_gbr(d, eta, Some(c), 180e3);
                let base = user_load(used, w_ac, backhaul_rbs(Some(c), eta, 180e3));
                let more_ac = user_load(used, w_ac * k, backhaul_rbs(Some(c), eta, 180e3));
                let used_c = used_rbs_gbr(d, eta, Some(c * k), 180e3);
                let more_bh = user_load(used_c, w_ac, backhaul_rbs(Some(c * k), eta, 180e3));
                let more_d = user_load(used_rbs_gbr(d * k, eta, Some(c), 180e3), w_ac, backhaul_rbs(Some(c), eta, 180e3));
                prop_assert!(more_ac <= base);
                prop_assert!(more_bh.value().unwrap() <= base.value().unwrap() * (1.0 + 1e-12));
                prop_assert!(more_d >= base);
            }

            // The floored share can rise on a plateau because G(n) keeps growing,
            // so monotonicity holds for the continuous share, which bounds the rate.
            #[test]
            fn ngbr_rate_bounded_by_decreasing_share(eta in 0.1f64..6.0, res in 0.0f64..100.0, n in 1usize..50) {
                let cont = |n: usize| eta * 180e3 * res / n as f64 * multiuser_diversity_gain(n);
                prop_assert!(cont(n + 1) <= cont(n) * (1.0 + 1e-12));
                prop_assert!(ngbr_rate(eta, 180e3, res, n) <= cont(n) * (1.0 + 1e-12));
            }

            #[test]
            fn ngbr_rate_non_increasing_across_share_steps(eta in 0.1f64..6.0, res in 1.0f64..100.0, n in 1usize..50) {
                let share = |n: usize| (res / n as f64).floor();
                let mut m = n + 1;
                while m < 200 && share(m) == share(n) {
                    m += 1;
                }
                prop_assume!(m < 200 && share(n) > 0.0);
                prop_assert!(ngbr_rate(eta, 180e3, res, m) <= ngbr_rate(eta, 180e3, res, n) * (1.0 + 1e-12) || share(m) == 0.0);
            }
        }
    }
}
