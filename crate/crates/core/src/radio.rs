//! Downlink radio model: free-space path loss, Rayleigh block fading, SINR
//! with full frequency reuse, Shannon spectral efficiency and a wideband
//! quality indicator used in measurement reports.
//!
//! Fading is flat: one power gain per (cell, user, TTI) shared by every
//! resource block. The quality indicator is computed from large-scale gains
//! only, which is what a layer-3 filtered measurement converges to.

use crate::error::{Error, Result};
use crate::ids::{CellId, UserId};
use crate::rng::{derive, unit_open};
use serde::{Deserialize, Serialize};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radio parameters shared by every cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    /// Total transmit power per cell, spread evenly over the RBs.
    pub tx_power_dbm: f64,
    /// Bandwidth of one resource block.
    pub rb_bandwidth_hz: f64,
    pub num_rbs: u32,
    /// Channel bandwidth; informational, must hold all RBs.
    pub system_bandwidth_hz: f64,
    /// Noise power spectral density in W/Hz (thermal floor plus receiver noise figure).
    pub noise_psd: f64,
    pub carrier_freq_hz: f64,
    pub reuse_factor: u32,
    /// Quality indicator clamp range.
    pub rsrq_floor_db: f64,
    pub rsrq_cap_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 40.0,
            rb_bandwidth_hz: 180e3,
            num_rbs: 100,
            system_bandwidth_hz: 20e6,
            // -174 dBm/Hz thermal + 9 dB noise figure
            noise_psd: 10f64.powf((-174.0 + 9.0 - 30.0) / 10.0),
            carrier_freq_hz: 2e9,
            reuse_factor: 1,
            rsrq_floor_db: -30.0,
            rsrq_cap_db: 50.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("radio: {m}")));
        if !self.tx_power_dbm.is_finite() {
            return bad("tx_power_dbm must be finite");
        }
        if self.num_rbs == 0 {
            return bad("num_rbs must be > 0");
        }
        if !(self.noise_psd > 0.0) || !self.noise_psd.is_finite() {
            return bad("noise_psd must be > 0");
        }
        if !(self.rb_bandwidth_hz > 0.0) || !(self.carrier_freq_hz > 0.0) {
            return bad("bandwidths and carrier frequency must be > 0");
        }
        if self.rb_bandwidth_hz * self.num_rbs as f64 > self.system_bandwidth_hz * (1.0 + 1e-9) {
            return bad("num_rbs * rb_bandwidth_hz exceeds system_bandwidth_hz");
        }
        if self.reuse_factor != 1 {
            return bad("only reuse factor 1 is modeled");
        }
        if !(self.rsrq_floor_db < self.rsrq_cap_db) {
            return bad("rsrq_floor_db must be below rsrq_cap_db");
        }
        Ok(())
    }

    /// Per-RB transmit power in watts.
    pub fn tx_power_per_rb_w(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm) / self.num_rbs as f64
    }

    /// Noise power over one RB (BW · N_o).
    pub fn noise_per_rb_w(&self) -> f64 {
        self.rb_bandwidth_hz * self.noise_psd
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Friis free-space power gain `(λ / 4πd)²`. A zero (or non-positive)
/// distance is treated as 1 m.
pub fn path_loss(distance_m: f64, config: &RadioConfig) -> f64 {
    let d = if distance_m > 0.0 { distance_m } else { 1.0 };
    let r = config.wavelength_m() / (4.0 * std::f64::consts::PI * d);
    r * r
}

/// Rayleigh block-fading power gain `|h|²` for one TTI.
///
/// The amplitude is Rayleigh distributed with unit mean power, so the power
/// gain is exponential with mean 1. Pure function of its arguments.
pub fn sample_fading(seed: u64, user: UserId, tti: u64) -> f64 {
    let u = unit_open(derive(seed, &[user.0 as u64, tti]));
    -u.ln()
}

/// Seed of the fading process on the link between `cell` and every user.
pub fn link_fading_seed(fading_seed: u64, cell: CellId) -> u64 {
    derive(fading_seed, &[0x6c69_6e6b, cell.0 as u64])
}

/// `log₂(1 + sinr)`.
pub fn spectral_efficiency(avg_sinr: f64) -> Result<f64> {
    if avg_sinr.is_nan() || avg_sinr < 0.0 {
        return Err(Error::Domain(format!("sinr must be >= 0, got {avg_sinr}")));
    }
    Ok((1.0 + avg_sinr).log2())
}

/// Signal over interference plus noise, all in watts.
pub fn sinr_from_powers(signal_w: f64, interference_w: f64, noise_w: f64) -> f64 {
    let denom = interference_w + noise_w;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    signal_w / denom
}

/// Channel gains for every (cell, user) pair.
///
/// The gain seen on RB `r` is `large_scale · fading`; with flat fading the
/// RB index does not change the value.
#[derive(Clone, Debug)]
pub struct ChannelState {
    num_cells: usize,
    num_users: usize,
    num_rbs: usize,
    large_scale: Vec<f64>,
    fading: Vec<f64>,
    pub fading_seed: u64,
}

impl ChannelState {
    pub fn new(num_cells: usize, num_users: usize, num_rbs: usize, fading_seed: u64) -> Self {
        Self {
            num_cells,
            num_users,
            num_rbs,
            large_scale: vec![0.0; num_cells * num_users],
            fading: vec![1.0; num_cells * num_users],
            fading_seed,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_rbs(&self) -> usize {
        self.num_rbs
    }

    fn idx(&self, cell: CellId, user: UserId) -> Result<usize> {
        if cell.index() >= self.num_cells {
            return Err(Error::UnknownCell(cell));
        }
        if user.index() >= self.num_users {
            return Err(Error::UnknownUser(user));
        }
        Ok(cell.index() * self.num_users + user.index())
    }

    pub fn set_large_scale(&mut self, cell: CellId, user: UserId, gain: f64) -> Result<()> {
        let i = self.idx(cell, user)?;
        self.large_scale[i] = gain.max(0.0);
        Ok(())
    }

    pub fn large_scale(&self, cell: CellId, user: UserId) -> Result<f64> {
        Ok(self.large_scale[self.idx(cell, user)?])
    }

    pub fn set_fading(&mut self, cell: CellId, user: UserId, gain: f64) -> Result<()> {
        let i = self.idx(cell, user)?;
        self.fading[i] = gain.max(0.0);
        Ok(())
    }

    /// `|h|²` between `cell` and `user` on `rb` for the current TTI.
    pub fn gain(&self, cell: CellId, user: UserId, rb: usize) -> Result<f64> {
        if rb >= self.num_rbs {
            return Err(Error::Domain(format!("rb {rb} out of range")));
        }
        let i = self.idx(cell, user)?;
        Ok(self.large_scale[i] * self.fading[i])
    }

    /// Current TTI gain without bounds checks on the RB index (flat fading).
    #[inline]
    pub fn gain_flat(&self, cell: usize, user: usize) -> f64 {
        let i = cell * self.num_users + user;
        self.large_scale[i] * self.fading[i]
    }

    /// Draws fresh fading for every link at `tti`.
    pub fn regenerate_fading(&mut self, tti: u64) {
        for c in 0..self.num_cells {
            let seed = link_fading_seed(self.fading_seed, CellId(c as u32));
            let row = &mut self.fading[c * self.num_users..(c + 1) * self.num_users];
            for (u, f) in row.iter_mut().enumerate() {
                *f = sample_fading(seed, UserId(u as u32), tti);
            }
        }
    }
}

/// Instantaneous SINR of `user` served by `cell` on `rb`; every other cell
/// interferes (reuse 1).
pub fn compute_sinr(
    cell: CellId,
    user: UserId,
    rb: usize,
    channel: &ChannelState,
    config: &RadioConfig,
) -> Result<f64> {
    let p = config.tx_power_per_rb_w();
    let signal = p * channel.gain(cell, user, rb)?;
    let mut interference = 0.0;
    for k in 0..channel.num_cells() {
        if k != cell.index() {
            interference += p * channel.gain(CellId(k as u32), user, rb)?;
        }
    }
    Ok(sinr_from_powers(signal, interference, config.noise_per_rb_w()))
}

/// Wideband quality indicator in dB: received power from `cell` over the
/// power from all other cells plus noise, averaged over RBs and clamped to
/// the configured range.
pub fn compute_rsrq(cell: CellId, user: UserId, channel: &ChannelState, config: &RadioConfig) -> Result<f64> {
    let p = config.tx_power_per_rb_w();
    let signal = p * channel.large_scale(cell, user)?;
    let mut interference = 0.0;
    for k in 0..channel.num_cells() {
        if k != cell.index() {
            interference += p * channel.large_scale(CellId(k as u32), user)?;
        }
    }
    Ok(rsrq_from_powers(signal, interference, config.noise_per_rb_w(), config))
}

pub fn rsrq_from_powers(signal_w: f64, interference_w: f64, noise_w: f64, config: &RadioConfig) -> f64 {
    let ratio = sinr_from_powers(signal_w, interference_w, noise_w);
    if ratio.is_infinite() {
        return config.rsrq_cap_db;
    }
    if ratio <= 0.0 {
        return config.rsrq_floor_db;
    }
    linear_to_db(ratio).clamp(config.rsrq_floor_db, config.rsrq_cap_db)
}
