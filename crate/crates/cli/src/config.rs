//! Experiment configuration: schema, parsing, and validation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

/// A fully parsed experiment description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub master_seed: u64,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    pub model: ModelConfig,
    #[serde(default)]
    pub analysis: Vec<AnalysisConfig>,
}

fn default_realizations() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// GUE Hamiltonian plus random traceless jumps.
    RandomLiouvillian { dim: usize, n_jumps: usize, beta: f64, g_eff: f64 },
    /// Boundary-driven XXZ chain with impurity and dephasing, restricted to
    /// one super-magnetization sector.
    XxzChain {
        n_sites: usize,
        coupling: f64,
        anisotropy: f64,
        impurity_field: f64,
        gamma_1_plus: f64,
        gamma_1_minus: f64,
        gamma_n_plus: f64,
        gamma_n_minus: f64,
        gamma_dephasing: f64,
        #[serde(default)]
        charge: i64,
    },
    /// Hermitian reference spectrum.
    GueReference { dim: usize },
    /// Non-Hermitian reference spectrum.
    GinibreReference { size: usize },
    /// Uncorrelated 2D reference spectrum on the unit box.
    Poisson2dReference { n_points: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalysisConfig {
    /// Complex spacing ratios (and, for real spectra, the r-ratio).
    SpectrumStats,
    /// ⟨r⟩(d) over a width grid; locates d_max.
    StripeSweep {
        #[serde(default = "default_grid_points")]
        d_grid_points: usize,
        /// Explicit grid; overrides `d_grid_points` when present.
        #[serde(default)]
        d_grid: Vec<f64>,
    },
    /// Diagonal matrix elements over a frequency window.
    EthDiag {
        observable: ObservableConfig,
        form: SuperForm,
        omega_cutoff: f64,
    },
    /// Off-diagonal matrix elements at fixed frequency separation.
    EthOffdiag {
        observable: ObservableConfig,
        form: SuperForm,
        omega_center: f64,
        delta_omega: f64,
        /// Optional stripe restriction: only pairs with `|Γ_α − Γ_β|` below
        /// this value are pooled.
        #[serde(default)]
        gamma_window: Option<f64>,
    },
    /// Spectral-sum dynamics, stripe weights, and stripe-restricted dynamics.
    Dynamics {
        observable: ObservableConfig,
        initial_state: InitialStateConfig,
        t_max: f64,
        n_times: usize,
        /// Stripe width for the weight/stripe-dynamics breakdown; when absent
        /// only the global time series is produced.
        #[serde(default)]
        stripe_width: Option<f64>,
    },
}

fn default_grid_points() -> usize {
    40
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SuperForm {
    Coherent,
    Measurement,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    /// `σ^x ⊗ 𝟙_{D/2}` on a generic even-dimensional space.
    SigmaXBlock,
    /// `σ^x` on one chain site (1-based).
    SigmaXSite { site: usize },
    /// `σ^z` on one chain site (1-based).
    SigmaZSite { site: usize },
    /// Boundary spin current `i(σ⁺_1 σ⁻_N - σ⁺_N σ⁻_1)`.
    BoundaryCurrent,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateConfig {
    /// `|↑…↑⟩⟨↑…↑|`.
    AllUp,
    /// Maximally mixed state.
    MaximallyMixed,
}

/// A configuration problem, with the path of the offending key.
#[derive(Debug)]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(location: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { location: location.to_string(), message: message.into() }
}

impl ExperimentConfig {
    /// Parse and validate a TOML config file body.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| err("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field validation beyond what the type system enforces.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_realizations == 0 {
            return Err(err("n_realizations", "must be at least 1"));
        }
        match &self.model {
            ModelConfig::RandomLiouvillian { dim, n_jumps, beta, g_eff } => {
                if *dim < 2 || dim % 2 != 0 {
                    return Err(err("model.dim", format!("must be even and >= 2, got {dim}")));
                }
                if *n_jumps == 0 {
                    return Err(err("model.n_jumps", "must be at least 1"));
                }
                if !(*beta > 0.0) {
                    return Err(err("model.beta", format!("must be positive, got {beta}")));
                }
                if !(*g_eff > 0.0) {
                    return Err(err("model.g_eff", format!("must be positive, got {g_eff}")));
                }
            }
            ModelConfig::XxzChain {
                n_sites,
                gamma_1_plus,
                gamma_1_minus,
                gamma_n_plus,
                gamma_n_minus,
                gamma_dephasing,
                charge,
                ..
            } => {
                if !(2..=10).contains(n_sites) {
                    return Err(err("model.n_sites", format!("must be in 2..=10, got {n_sites}")));
                }
                for (name, g) in [
                    ("gamma_1_plus", gamma_1_plus),
                    ("gamma_1_minus", gamma_1_minus),
                    ("gamma_n_plus", gamma_n_plus),
                    ("gamma_n_minus", gamma_n_minus),
                    ("gamma_dephasing", gamma_dephasing),
                ] {
                    if *g < 0.0 {
                        return Err(err(
                            &format!("model.{name}"),
                            format!("rate must be nonnegative, got {g}"),
                        ));
                    }
                }
                let n = *n_sites as i64;
                if charge.abs() > 2 * n || charge.rem_euclid(2) != 0 {
                    return Err(err(
                        "model.charge",
                        format!("must be even with |charge| <= {}, got {charge}", 2 * n),
                    ));
                }
            }
            ModelConfig::GueReference { dim } => {
                if *dim < 3 {
                    return Err(err("model.dim", format!("must be >= 3, got {dim}")));
                }
            }
            ModelConfig::GinibreReference { size } => {
                if *size < 3 {
                    return Err(err("model.size", format!("must be >= 3, got {size}")));
                }
            }
            ModelConfig::Poisson2dReference { n_points } => {
                if *n_points < 3 {
                    return Err(err("model.n_points", format!("must be >= 3, got {n_points}")));
                }
            }
        }
        for (k, a) in self.analysis.iter().enumerate() {
            let loc = |field: &str| format!("analysis[{k}].{field}");
            match a {
                AnalysisConfig::SpectrumStats => {}
                AnalysisConfig::StripeSweep { d_grid_points, d_grid } => {
                    if d_grid.is_empty() && *d_grid_points < 2 {
                        return Err(err(&loc("d_grid_points"), "must be at least 2"));
                    }
                    if d_grid.iter().any(|d| !(*d > 0.0)) {
                        return Err(err(&loc("d_grid"), "all widths must be positive"));
                    }
                }
                AnalysisConfig::EthDiag { observable, omega_cutoff, .. } => {
                    if !(*omega_cutoff > 0.0) {
                        return Err(err(&loc("omega_cutoff"), "must be positive"));
                    }
                    self.check_observable(observable, &loc("observable"))?;
                    self.check_eigenvector_support(&loc("kind"))?;
                }
                AnalysisConfig::EthOffdiag {
                    observable,
                    omega_center,
                    delta_omega,
                    gamma_window,
                    ..
                } => {
                    if *omega_center < 0.0 {
                        return Err(err(&loc("omega_center"), "must be nonnegative"));
                    }
                    if !(*delta_omega > 0.0) {
                        return Err(err(&loc("delta_omega"), "must be positive"));
                    }
                    if let Some(g) = gamma_window {
                        if !(*g > 0.0) {
                            return Err(err(&loc("gamma_window"), "must be positive"));
                        }
                    }
                    self.check_observable(observable, &loc("observable"))?;
                    self.check_eigenvector_support(&loc("kind"))?;
                }
                AnalysisConfig::Dynamics { observable, t_max, n_times, stripe_width, .. } => {
                    if !(*t_max > 0.0) {
                        return Err(err(&loc("t_max"), "must be positive"));
                    }
                    if *n_times < 2 {
                        return Err(err(&loc("n_times"), "must be at least 2"));
                    }
                    if let Some(w) = stripe_width {
                        if !(*w > 0.0) {
                            return Err(err(&loc("stripe_width"), "must be positive"));
                        }
                    }
                    self.check_observable(observable, &loc("observable"))?;
                    self.check_eigenvector_support(&loc("kind"))?;
                }
            }
        }
        Ok(())
    }

    fn check_eigenvector_support(&self, location: &str) -> Result<(), ConfigError> {
        match self.model {
            ModelConfig::RandomLiouvillian { .. }
            | ModelConfig::XxzChain { .. }
            | ModelConfig::GueReference { .. } => Ok(()),
            _ => Err(err(
                location,
                "this analysis needs eigenvectors; reference point clouds provide only spectra",
            )),
        }
    }

    fn check_observable(
        &self,
        obs: &ObservableConfig,
        location: &str,
    ) -> Result<(), ConfigError> {
        match (obs, &self.model) {
            (ObservableConfig::SigmaXBlock, ModelConfig::RandomLiouvillian { .. })
            | (ObservableConfig::SigmaXBlock, ModelConfig::GueReference { .. }) => Ok(()),
            (
                ObservableConfig::SigmaXSite { site } | ObservableConfig::SigmaZSite { site },
                ModelConfig::XxzChain { n_sites, .. },
            ) => {
                if (1..=*n_sites).contains(site) {
                    Ok(())
                } else {
                    Err(err(location, format!("site {site} outside 1..={n_sites}")))
                }
            }
            (ObservableConfig::BoundaryCurrent, ModelConfig::XxzChain { .. }) => Ok(()),
            _ => Err(err(location, "observable not defined for this model kind")),
        }
    }
}
