//! Experiment configuration file (TOML).
//!
//! Every section is optional and falls back to its defaults, so an empty
//! file is a valid config. Unknown keys are rejected.

use crate::controller::ControllerConfig;
use crate::engine::{RunConfig, SimConfig};
use crate::error::{Error, Result};
use crate::handover::{HandoverConfig, Policy};
use crate::radio::RadioConfig;
use crate::scheduler::SchedulerConfig;
use crate::topology::{BackhaulConfig, Distribution, ScenarioSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Axes of a sweep. An empty axis means "use the value from the scenario section".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub num_users: Vec<usize>,
    pub doa: Vec<f64>,
    pub gbr_fraction: Vec<f64>,
    pub policies: Vec<Policy>,
    pub seeds: Vec<u64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        Self {
            num_users: Vec::new(),
            doa: Vec::new(),
            gbr_fraction: Vec::new(),
            policies: Policy::ALL.to_vec(),
            seeds: vec![1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub output_dir: String,
    pub scenario: ScenarioSpec,
    pub handover: HandoverConfig,
    pub radio: RadioConfig,
    pub sim: SimConfig,
    pub backhaul: BackhaulConfig,
    pub scheduler: SchedulerConfig,
    pub controller: ControllerConfig,
    pub sweep: SweepAxes,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            output_dir: "out".into(),
            scenario: ScenarioSpec::default(),
            handover: HandoverConfig::default(),
            radio: RadioConfig::default(),
            sim: SimConfig::default(),
            backhaul: BackhaulConfig::default(),
            scheduler: SchedulerConfig::default(),
            controller: ControllerConfig::default(),
            sweep: SweepAxes::default(),
        }
    }
}

/// One point of the sweep grid, before policies and seeds are applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub num_users: usize,
    pub doa: Option<f64>,
    pub gbr_fraction: f64,
}

impl ExperimentConfig {
    /// The single-run config described by the sections (sweep axes ignored).
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            scenario: self.scenario.clone(),
            handover: self.handover.clone(),
            radio: self.radio.clone(),
            sim: self.sim.clone(),
            backhaul: self.backhaul.clone(),
            scheduler: self.scheduler.clone(),
            controller: self.controller.clone(),
        }
    }

    /// Cartesian product of the user-count, DoA and GBR-mix axes.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let or = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let users =
            if self.sweep.num_users.is_empty() { vec![self.scenario.num_users] } else { self.sweep.num_users.clone() };
        let doas: Vec<Option<f64>> = if self.sweep.doa.is_empty() {
            vec![self.scenario.doa]
        } else {
            self.sweep.doa.iter().map(|&d| Some(d)).collect()
        };
        let mut out = Vec::new();
        for &num_users in &users {
            for &doa in &doas {
                for gbr_fraction in or(&self.sweep.gbr_fraction, self.scenario.gbr_fraction) {
                    out.push(SweepPoint { num_users, doa, gbr_fraction });
                }
            }
        }
        out
    }

    /// Run config for one grid cell.
    pub fn point_config(&self, p: &SweepPoint, policy: Policy, seed: u64) -> RunConfig {
        let mut c = self.run_config();
        c.scenario.num_users = p.num_users;
        c.scenario.gbr_fraction = p.gbr_fraction;
        if let Some(d) = p.doa {
            c.scenario.doa = Some(d);
            c.scenario.distribution = Distribution::Asymmetric;
        }
        c.handover.policy = policy;
        c.scenario.seed = seed;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version = {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.sweep.policies.is_empty() {
            return Err(Error::Config("sweep.policies must name at least one policy".into()));
        }
        if self.sweep.seeds.is_empty() {
            return Err(Error::Config("sweep.seeds must list at least one seed".into()));
        }
        self.run_config().validate()?;
        let base = self.run_config();
        for p in self.sweep_points() {
            let c = self.point_config(&p, base.handover.policy, base.scenario.seed);
            c.scenario.validate()?;
        }
        Ok(())
    }
}

/// Parses and validates a config document.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_toml_string(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))
}
