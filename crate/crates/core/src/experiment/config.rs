use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pursuit::{Algorithm, DEFAULT_ITERATION_CAP};

/// How each trial picks its iteration count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltingRule {
    /// `ceil(log2(||x||_2 / (sqrt(K) sigma)))` with the true `||x||_2`.
    TrueNorm,
    /// The same count with `||y||_2` standing in for `||x||_2`.
    MeasurementNorm,
    /// `iterations` passes regardless of the data.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalModelKind {
    /// `K` spikes `10 eps (1 + |n|)` on a uniformly random support.
    Spikes,
    /// Every entry nonzero, magnitudes `10 (j+1)^(-decay)` in random
    /// positions with random signs.
    Compressible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SignalModel {
    Spikes,
    Compressible { decay: f64 },
}

/// Which RIP constant feeds the bound columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaSource {
    /// Each algorithm's condition threshold, giving its worst admissible
    /// constant.
    Threshold,
    /// A Monte-Carlo lower bound on `delta_{3K}` / `delta_{4K}` of the
    /// experiment dictionary.
    MonteCarlo,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Sp, Algorithm::Cosamp, Algorithm::Iht, Algorithm::Oracle]
}
fn default_a() -> f64 {
    1.0
}
fn default_halting() -> HaltingRule {
    HaltingRule::TrueNorm
}
fn default_iterations() -> usize {
    30
}
fn default_cap() -> usize {
    DEFAULT_ITERATION_CAP
}
fn default_signal_model() -> SignalModelKind {
    SignalModelKind::Spikes
}
fn default_decay() -> f64 {
    1.0
}
fn default_delta_source() -> DeltaSource {
    DeltaSource::Threshold
}
fn default_mc_trials() -> usize {
    2000
}

/// A full sweep over `k_values x sigma_values`. Loads from flat TOML with
/// these field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n_atoms: usize,
    pub k_values: Vec<usize>,
    pub sigma_values: Vec<f64>,
    pub trials_per_point: usize,
    pub seed: u64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_halting")]
    pub halting: HaltingRule,
    /// Used when `halting = "fixed"`.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_cap")]
    pub iteration_cap: usize,
    #[serde(default = "default_signal_model")]
    pub signal_model: SignalModelKind,
    /// Used when `signal_model = "compressible"`.
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_delta_source")]
    pub delta_source: DeltaSource,
    /// Supports sampled per RIP estimate when `delta_source = "monte_carlo"`.
    #[serde(default = "default_mc_trials")]
    pub delta_mc_trials: usize,
}

impl ExperimentConfig {
    /// `m = 128`, `N = 256`, 200 trials, `K in {5, 10, 15, 20}`, `sigma = 1`.
    pub fn scaled() -> Self {
        ExperimentConfig {
            m: 128,
            n_atoms: 256,
            k_values: vec![5, 10, 15, 20],
            sigma_values: vec![1.0],
            trials_per_point: 200,
            seed: 2024,
            algorithms: default_algorithms(),
            a: 1.0,
            halting: HaltingRule::TrueNorm,
            iterations: default_iterations(),
            iteration_cap: DEFAULT_ITERATION_CAP,
            signal_model: SignalModelKind::Spikes,
            decay: default_decay(),
            delta_source: DeltaSource::Threshold,
            delta_mc_trials: default_mc_trials(),
        }
    }

    /// `m = 512`, `N = 1024`, 1500 trials, `K in {5, 10, 15, 20}`, `sigma = 1`.
    pub fn full_scale() -> Self {
        ExperimentConfig {
            m: 512,
            n_atoms: 1024,
            trials_per_point: 1500,
            ..Self::scaled()
        }
    }

    /// `K = 10` at 512 x 1024, `sigma^2 in {1/16, 1/4, 1, 4, 16}`.
    pub fn noise_sweep() -> Self {
        ExperimentConfig {
            k_values: vec![10],
            sigma_values: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            trials_per_point: 300,
            ..Self::full_scale()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn signal(&self) -> SignalModel {
        match self.signal_model {
            SignalModelKind::Spikes => SignalModel::Spikes,
            SignalModelKind::Compressible => SignalModel::Compressible { decay: self.decay },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n_atoms == 0 {
            return bad("m and n_atoms must be positive".into());
        }
        if self.m > self.n_atoms {
            return bad(format!("m = {} exceeds n_atoms = {}", self.m, self.n_atoms));
        }
        if self.trials_per_point == 0 {
            return bad("trials_per_point must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty".into());
        }
        if self.k_values.is_empty() || self.sigma_values.is_empty() {
            return bad("k_values and sigma_values must not be empty".into());
        }
        if let Some(s) = self.sigma_values.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return bad(format!("sigma values must be finite and non-negative, got {s}"));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return bad(format!("a must be positive, got {}", self.a));
        }
        if self.iteration_cap == 0 {
            return bad("iteration_cap must be at least 1".into());
        }
        if self.halting == HaltingRule::Fixed && !(1..=self.iteration_cap).contains(&self.iterations) {
            return bad(format!(
                "iterations = {} must lie in [1, iteration_cap = {}]",
                self.iterations, self.iteration_cap
            ));
        }
        if self.signal_model == SignalModelKind::Compressible && !(self.decay > 0.0) {
            return bad(format!("decay must be positive, got {}", self.decay));
        }
        if self.delta_source == DeltaSource::MonteCarlo && self.delta_mc_trials == 0 {
            return bad("delta_mc_trials must be at least 1".into());
        }
        for &k in &self.k_values {
            if k == 0 {
                return bad("k values must be positive".into());
            }
            for &alg in &self.algorithms {
                let limit = alg.max_sparsity(self.m);
                if k > limit {
                    return bad(format!(
                        "K = {k} is too large for {alg} at m = {} (limit {limit})",
                        self.m
                    ));
                }
            }
        }
        Ok(())
    }
}
