use std::path::{Path, PathBuf};

use rfim_core::bounds::{beta_saturating, plan_upper, summary_g, DEFAULT_B};
use rfim_core::lattice::DEFAULT_J1;
use rfim_core::{DisorderKind, InitialState, UpdateRule};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// How the inverse temperature is chosen for each `(alpha, theta)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    Fixed(f64),
    /// `beta = zeta(alpha) / (256 theta^2)`.
    Saturate,
}

impl BetaRule {
    pub fn beta(&self, alpha: f64, theta: f64) -> Result<f64, HarnessError> {
        match *self {
            BetaRule::Fixed(b) => Ok(b),
            BetaRule::Saturate => Ok(beta_saturating(alpha, theta)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSettings {
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub rule: UpdateRule,
    pub initial: InitialState,
}

fn default_j1() -> f64 {
    DEFAULT_J1
}

fn default_kind() -> DisorderKind {
    DisorderKind::Bernoulli
}

fn default_bootstrap() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alphas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub beta: BetaRule,
    #[serde(default = "default_j1")]
    pub j1: f64,
    /// Number of sites; the window is centred on the origin.
    pub window: usize,
    pub disorder_seeds: usize,
    #[serde(default = "default_kind")]
    pub disorder: DisorderKind,
    pub chain: ChainSettings,
    pub master_seed: u64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    /// Accept windows shorter than three times the planned `L_max`.
    #[serde(default)]
    pub allow_small_window: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The qualitative scaling experiment: `alpha = 0`, `beta = 2`,
    /// `theta` in {0.5, 0.35, 0.25}, 20 disorder seeds, 2000 sites.
    pub fn scaling_default() -> Self {
        Self {
            alphas: vec![0.0],
            thetas: vec![0.5, 0.35, 0.25],
            beta: BetaRule::Fixed(2.0),
            j1: DEFAULT_J1,
            window: 2000,
            disorder_seeds: 20,
            disorder: DisorderKind::Bernoulli,
            chain: ChainSettings {
                sweeps: 2000,
                burn_in: 1000,
                thinning: 50,
                rule: UpdateRule::HeatBath,
                initial: InitialState::Random,
            },
            master_seed: 20_240_601,
            bootstrap: 1000,
            allow_small_window: true,
            output_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path.to_path_buf(), e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Checks the configuration and returns warnings for the output header.
    pub fn validate(&self) -> Result<Vec<String>, HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.alphas.is_empty() || self.thetas.is_empty() {
            return bad("alpha and theta lists must be non-empty".into());
        }
        if self.disorder_seeds == 0 {
            return bad("at least one disorder seed is needed".into());
        }
        if self.window < 3 {
            return bad(format!("window must have at least 3 sites, got {}", self.window));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return bad(format!("alpha must lie in [0, 1), got {a}"));
        }
        if let Some(t) = self.thetas.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return bad(format!("theta must be finite and non-negative, got {t}"));
        }
        let c = &self.chain;
        if c.sweeps == 0 || c.thinning == 0 || c.burn_in >= c.sweeps {
            return bad("chain needs sweeps > burn_in and thinning > 0".into());
        }
        if self.bootstrap == 0 {
            return bad("bootstrap needs at least one resample".into());
        }

        let mut warnings = Vec::new();
        for &alpha in &self.alphas {
            for &theta in &self.thetas {
                let beta = self.beta.beta(alpha, theta)?;
                match plan_upper(alpha, theta, self.j1, beta, DEFAULT_B, &|t| summary_g(alpha, t)) {
                    Ok(plan) => {
                        let need = 3f64.ln() + plan.ln_l_max;
                        if (self.window as f64).ln() < need {
                            let msg = format!(
                                "window {} is below 3 L_max = {:.3e} at alpha {alpha}, theta {theta}",
                                self.window,
                                need.exp()
                            );
                            if !self.allow_small_window {
                                return bad(msg + " (set allow_small_window to override)");
                            }
                            warnings.push(msg);
                        }
                    }
                    Err(e) => warnings.push(format!("no upper plan at alpha {alpha}, theta {theta}: {e}")),
                }
            }
        }
        Ok(warnings)
    }
}
