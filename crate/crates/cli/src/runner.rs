//! Experiment execution: realization fan-out, analysis dispatch, artifact
//! writing, and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use liouville_core::dynamics as dyn_core;
use liouville_core::ensembles::{Box2D, EnsembleSeed, sample_ginibre, sample_gue, sample_poisson2d};
use liouville_core::eth;
use liouville_core::lindblad::{self, SuperMatrix, XxzChainParams};
use liouville_core::matrix::{C64, CMatrix, pauli_x};
use liouville_core::spectral::{self, SpectralDecomposition};
use liouville_core::stats;
use liouville_core::stripes;

use crate::artifacts::{CsvTable, cell, write_json};
use crate::config::{
    AnalysisConfig, ExperimentConfig, InitialStateConfig, ModelConfig, ObservableConfig, SuperForm,
};

/// Threshold used when reporting how many spectral weights are significant.
pub const WEIGHT_REPORT_CUTOFF: f64 = 1e-10;

#[derive(Debug)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub completed: usize,
    pub failed: usize,
}

/// The spectrum (and eigenvectors when needed) of one disorder realization.
struct ModelData {
    eigenvalues: Vec<C64>,
    decomposition: Option<SpectralDecomposition>,
    /// Super-basis labels when the model is a vectorized Liouvillian; `None`
    /// for plain-matrix references (GUE, Ginibre, point clouds).
    labels: Option<Vec<(usize, usize)>>,
    hilbert_dim: usize,
}

enum AnalysisOutput {
    Spectrum {
        n_levels: usize,
        mean_cos_theta: f64,
        bulk_cos_theta: f64,
        mean_modulus: f64,
        mean_r_real: f64,
    },
    Sweep {
        points: Vec<stripes::SweepPoint>,
        d_max: f64,
        r_at_d_max: f64,
        stripes_at_d_max: Vec<stripes::StripeRatio>,
    },
    EthDiag {
        rows: Vec<(f64, f64)>,
        n: usize,
        mean: f64,
        variance: f64,
        super_dim: usize,
    },
    EthOffdiag {
        values: Vec<f64>,
        n: usize,
        variance: f64,
        excess_kurtosis: f64,
        ks_distance: f64,
        super_dim: usize,
    },
    Dynamics {
        series: Vec<(f64, Complex64)>,
        weights: Vec<StripeWeightRow>,
        stripe_series: Vec<(usize, f64, Complex64)>,
    },
}

struct StripeWeightRow {
    stripe_id: usize,
    gamma_center: f64,
    n_members: usize,
    weight_sum: f64,
    n_above: usize,
}

struct RealizationOutput {
    index: usize,
    spectrum: Vec<C64>,
    analyses: Vec<AnalysisOutput>,
}

/// ⟨cos θ⟩ of the complex spacing ratios over the central region of the
/// cloud (10th–90th percentile rectangle on both axes).
fn bulk_cos_theta(spectrum: &[C64]) -> f64 {
    stats::bulk_mean_cos_theta(spectrum).unwrap_or(f64::NAN)
}

fn needs_vectors(cfg: &ExperimentConfig) -> bool {
    cfg.analysis.iter().any(|a| {
        matches!(
            a,
            AnalysisConfig::EthDiag { .. }
                | AnalysisConfig::EthOffdiag { .. }
                | AnalysisConfig::Dynamics { .. }
        )
    })
}

fn build_model(cfg: &ExperimentConfig, realization: usize) -> Result<ModelData, String> {
    let seed = EnsembleSeed::new(cfg.master_seed, realization as u64);
    let with_vectors = needs_vectors(cfg);
    let fail = |e: &dyn std::fmt::Display| format!("realization {realization}: {e}");
    match &cfg.model {
        ModelConfig::RandomLiouvillian { dim, n_jumps, beta, g_eff } => {
            let lind = lindblad::random_liouvillian(*dim, *n_jumps, *beta, *g_eff, seed)
                .map_err(|e| fail(&e))?;
            let sup = lind.vectorize();
            let (eigenvalues, decomposition) = decompose(&sup, with_vectors).map_err(|e| fail(&e))?;
            Ok(ModelData {
                eigenvalues,
                decomposition,
                labels: Some(sup.labels),
                hilbert_dim: *dim,
            })
        }
        ModelConfig::XxzChain {
            n_sites,
            coupling,
            anisotropy,
            impurity_field,
            gamma_1_plus,
            gamma_1_minus,
            gamma_n_plus,
            gamma_n_minus,
            gamma_dephasing,
            charge,
        } => {
            let lind = lindblad::xxz_impurity_chain(XxzChainParams {
                n_sites: *n_sites,
                coupling: *coupling,
                anisotropy: *anisotropy,
                impurity_field: *impurity_field,
                gamma_1_plus: *gamma_1_plus,
                gamma_1_minus: *gamma_1_minus,
                gamma_n_plus: *gamma_n_plus,
                gamma_n_minus: *gamma_n_minus,
                gamma_dephasing: *gamma_dephasing,
            })
            .map_err(|e| fail(&e))?;
            let (sup, _map) =
                lindblad::sector_liouvillian(&lind, *n_sites, *charge).map_err(|e| fail(&e))?;
            let (eigenvalues, decomposition) = decompose(&sup, with_vectors).map_err(|e| fail(&e))?;
            Ok(ModelData {
                eigenvalues,
                decomposition,
                labels: Some(sup.labels),
                hilbert_dim: 1 << n_sites,
            })
        }
        ModelConfig::GueReference { dim } => {
            let h = sample_gue(*dim, seed);
            let (eigenvalues, decomposition) = if with_vectors {
                let d = spectral::eig_nonhermitian(&h).map_err(|e| fail(&e))?;
                (d.eigenvalues.clone(), Some(d))
            } else {
                (spectral::eigenvalues(&h).map_err(|e| fail(&e))?, None)
            };
            Ok(ModelData {
                eigenvalues,
                decomposition,
                labels: None,
                hilbert_dim: *dim,
            })
        }
        ModelConfig::GinibreReference { size } => {
            // normalized so the spectral disk has unit radius
            let g = sample_ginibre(*size, *size, seed)
                .scale(C64::new(1.0 / (*size as f64).sqrt(), 0.0));
            let eigenvalues = spectral::eigenvalues(&g).map_err(|e| fail(&e))?;
            Ok(ModelData {
                eigenvalues,
                decomposition: None,
                labels: None,
                hilbert_dim: *size,
            })
        }
        ModelConfig::Poisson2dReference { n_points } => {
            let pts = sample_poisson2d(*n_points, Box2D::unit(), seed).map_err(|e| fail(&e))?;
            Ok(ModelData {
                eigenvalues: pts,
                decomposition: None,
                labels: None,
                hilbert_dim: 0,
            })
        }
    }
}

fn decompose(
    sup: &SuperMatrix,
    with_vectors: bool,
) -> liouville_core::error::Result<(Vec<C64>, Option<SpectralDecomposition>)> {
    if with_vectors {
        let d = sup.decompose()?;
        Ok((d.eigenvalues.clone(), Some(d)))
    } else {
        Ok((sup.eigenvalues()?, None))
    }
}

/// The Hilbert-space observable named by the config.
fn build_observable(obs: &ObservableConfig, model: &ModelData) -> Result<CMatrix, String> {
    let d = model.hilbert_dim;
    match obs {
        ObservableConfig::SigmaXBlock => {
            if d % 2 != 0 || d == 0 {
                return Err(format!("sigma_x_block needs even Hilbert dimension, got {d}"));
            }
            Ok(pauli_x().kron(&CMatrix::identity(d / 2)))
        }
        ObservableConfig::SigmaXSite { site } => {
            Ok(lindblad::site_operator(log2(d)?, *site, &pauli_x()))
        }
        ObservableConfig::SigmaZSite { site } => Ok(dyn_core::site_sz(log2(d)?, *site)),
        ObservableConfig::BoundaryCurrent => Ok(dyn_core::boundary_current(log2(d)?)),
    }
}

fn log2(d: usize) -> Result<usize, String> {
    if d.is_power_of_two() && d >= 2 {
        Ok(d.trailing_zeros() as usize)
    } else {
        Err(format!("dimension {d} is not a power of two"))
    }
}

/// Superoperator of the observable in the basis of the model's decomposition.
fn build_superop(
    obs: &CMatrix,
    form: SuperForm,
    model: &ModelData,
) -> Result<CMatrix, String> {
    let core_form = match form {
        SuperForm::Coherent => eth::SuperOperatorForm::Coherent,
        SuperForm::Measurement => eth::SuperOperatorForm::Measurement,
    };
    match &model.labels {
        Some(labels) => eth::build_superoperator_on_labels(obs, core_form, labels)
            .map_err(|e| e.to_string()),
        // Hermitian reference: matrix elements of the plain operator between
        // Hamiltonian eigenvectors; the superoperator form does not apply
        None => Ok(obs.clone()),
    }
}

fn run_analysis(
    a: &AnalysisConfig,
    model: &ModelData,
) -> Result<AnalysisOutput, String> {
    match a {
        AnalysisConfig::SpectrumStats => {
            let csr = stats::complex_spacing_ratios(&model.eigenvalues)
                .map_err(|e| e.to_string())?;
            // the r-ratio of the real parts is meaningful for (near-)real
            // spectra such as the GUE reference
            let max_im = model.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            let scale = model.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mean_r_real = if max_im <= 1e-8 * scale.max(1.0) {
                let res: Vec<f64> = model.eigenvalues.iter().map(|z| z.re).collect();
                stats::r_ratio(&res).map(|s| s.mean_r).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            Ok(AnalysisOutput::Spectrum {
                n_levels: model.eigenvalues.len(),
                mean_cos_theta: csr.mean_cos_theta,
                bulk_cos_theta: bulk_cos_theta(&model.eigenvalues),
                mean_modulus: csr.mean_modulus,
                mean_r_real,
            })
        }
        AnalysisConfig::StripeSweep { d_grid_points, d_grid } => {
            let grid = if d_grid.is_empty() {
                stripes::default_d_grid(&model.eigenvalues, *d_grid_points)
                    .map_err(|e| e.to_string())?
            } else {
                d_grid.clone()
            };
            let sweep =
                stripes::sweep_width(&model.eigenvalues, &grid).map_err(|e| e.to_string())?;
            let parts = stripes::partition_stripes(&model.eigenvalues, sweep.d_max)
                .map_err(|e| e.to_string())?;
            let (per, _) = stripes::stripe_r(&parts).map_err(|e| e.to_string())?;
            Ok(AnalysisOutput::Sweep {
                points: sweep.points,
                d_max: sweep.d_max,
                r_at_d_max: sweep.r_at_d_max,
                stripes_at_d_max: per,
            })
        }
        AnalysisConfig::EthDiag { observable, form, omega_cutoff } => {
            let d = model
                .decomposition
                .as_ref()
                .ok_or("internal: decomposition missing for eth analysis")?;
            let obs = build_observable(observable, model)?;
            let superop = build_superop(&obs, *form, model)?;
            let m = eth::matrix_elements(d, &superop, eth::ElementConvention::RightRight)
                .map_err(|e| e.to_string())?;
            let s = eth::diagonal_statistics(d, &m, *omega_cutoff).map_err(|e| e.to_string())?;
            let rows: Vec<(f64, f64)> = (0..d.dim())
                .filter(|&a| !d.is_defective(a) && d.eigenvalues[a].im.abs() < *omega_cutoff)
                .map(|a| (d.eigenvalues[a].im, m.get(a, a).re))
                .collect();
            Ok(AnalysisOutput::EthDiag {
                rows,
                n: s.n,
                mean: s.mean,
                variance: s.variance,
                super_dim: d.dim(),
            })
        }
        AnalysisConfig::EthOffdiag { observable, form, omega_center, delta_omega, gamma_window } => {
            let d = model
                .decomposition
                .as_ref()
                .ok_or("internal: decomposition missing for eth analysis")?;
            let obs = build_observable(observable, model)?;
            let superop = build_superop(&obs, *form, model)?;
            let m = eth::matrix_elements(d, &superop, eth::ElementConvention::RightRight)
                .map_err(|e| e.to_string())?;
            let s = eth::offdiagonal_statistics_windowed(
                d,
                &m,
                *omega_center,
                *delta_omega,
                *gamma_window,
            )
            .map_err(|e| e.to_string())?;
            Ok(AnalysisOutput::EthOffdiag {
                n: s.n,
                variance: s.variance,
                excess_kurtosis: s.excess_kurtosis,
                ks_distance: s.ks_distance,
                values: s.values,
                super_dim: d.dim(),
            })
        }
        AnalysisConfig::Dynamics { observable, initial_state, t_max, n_times, stripe_width } => {
            let d = model
                .decomposition
                .as_ref()
                .ok_or("internal: decomposition missing for dynamics")?;
            let obs = build_observable(observable, model)?;
            let hd = model.hilbert_dim;
            let rho0 = match initial_state {
                InitialStateConfig::AllUp => dyn_core::all_up_state(log2(hd)?),
                InitialStateConfig::MaximallyMixed => {
                    CMatrix::identity(hd).scale(C64::new(1.0 / hd as f64, 0.0))
                }
            };
            let labels: Vec<(usize, usize)> = match &model.labels {
                Some(l) => l.clone(),
                None => return Err("dynamics needs a Liouvillian model".into()),
            };
            // coefficient vectors in the decomposition's (sector) basis
            let obs_vec = dyn_core::transpose_on_labels(&obs, &labels);
            let rho0_vec: Vec<C64> = labels.iter().map(|&(i, j)| rho0.get(i, j)).collect();
            // weight of the initial state lost to the projection
            let kept: f64 = rho0_vec.iter().map(|z| z.norm_sqr()).sum();
            let total = rho0.frobenius_norm().powi(2);
            if (total - kept).abs() > 1e-10 * total.max(1.0) {
                return Err("initial state has weight outside the symmetry sector".into());
            }
            let w = dyn_core::spectral_weights(d, &obs_vec, &rho0_vec)
                .map_err(|e| e.to_string())?;
            let times: Vec<f64> = (0..*n_times)
                .map(|k| t_max * k as f64 / (*n_times - 1) as f64)
                .collect();
            let series_vals = dyn_core::expectation_series(&w, &times);
            let series = times.iter().cloned().zip(series_vals).collect();

            let mut weights = Vec::new();
            let mut stripe_series = Vec::new();
            if let Some(width) = stripe_width {
                let members = dyn_core::stripe_members(&d.eigenvalues, *width)
                    .map_err(|e| e.to_string())?;
                let sums = dyn_core::stripe_weight_sums(&w, &members);
                for (k, m) in members.iter().enumerate() {
                    let n_above = m
                        .iter()
                        .filter(|&&a| w.products[a].norm() > WEIGHT_REPORT_CUTOFF)
                        .count();
                    let gamma_center = if m.is_empty() {
                        f64::NAN
                    } else {
                        m.iter().map(|&a| d.eigenvalues[a].re).sum::<f64>() / m.len() as f64
                    };
                    weights.push(StripeWeightRow {
                        stripe_id: k,
                        gamma_center,
                        n_members: m.len(),
                        weight_sum: sums[k],
                        n_above,
                    });
                    if m.len() >= stripes::MIN_STRIPE_MEMBERS {
                        if let Ok(f) = dyn_core::stripe_dynamics(&w, m, &times) {
                            for (t, v) in times.iter().zip(f) {
                                stripe_series.push((k, *t, v));
                            }
                        }
                    }
                }
            }
            Ok(AnalysisOutput::Dynamics { series, weights, stripe_series })
        }
    }
}

fn run_realization(cfg: &ExperimentConfig, index: usize) -> Result<RealizationOutput, String> {
    let model = build_model(cfg, index)?;
    let mut analyses = Vec::with_capacity(cfg.analysis.len());
    for a in &cfg.analysis {
        analyses.push(run_analysis(a, &model)?);
    }
    Ok(RealizationOutput { index, spectrum: model.eigenvalues, analyses })
}

fn analysis_dir(k: usize, a: &AnalysisConfig) -> String {
    let kind = match a {
        AnalysisConfig::SpectrumStats => "spectrum_stats",
        AnalysisConfig::StripeSweep { .. } => "stripe_sweep",
        AnalysisConfig::EthDiag { .. } => "eth_diag",
        AnalysisConfig::EthOffdiag { .. } => "eth_offdiag",
        AnalysisConfig::Dynamics { .. } => "dynamics",
    };
    format!("analysis_{k:02}_{kind}")
}

/// Execute the full experiment. Realizations are distributed over `workers`
/// threads (hardware parallelism when `None`); aggregation is ordered by
/// realization index, so results do not depend on completion order.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<RunOutcome, String> {
    let started = Instant::now();
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).map_err(|e| format!("creating {}: {e}", out.display()))?;

    // crash-safety: mark the run incomplete until everything is written
    let manifest_path = out.join("manifest.json");
    let config_echo = serde_json::to_value(cfg).map_err(|e| e.to_string())?;
    write_json(
        &manifest_path,
        &serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "status": "incomplete",
            "config": config_echo,
        }),
    )
    .map_err(|e| e.to_string())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| e.to_string())?;
    let results: Vec<Result<RealizationOutput, String>> = pool.install(|| {
        (0..cfg.n_realizations)
            .into_par_iter()
            .map(|i| run_realization(cfg, i))
            .collect()
    });

    let mut failures: Vec<serde_json::Value> = Vec::new();
    let mut ok: Vec<RealizationOutput> = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => ok.push(o),
            Err(msg) => {
                eprintln!("warning: realization {i} failed: {msg}");
                failures.push(serde_json::json!({ "realization": i, "error": msg }));
            }
        }
    }
    if ok.is_empty() {
        write_json(
            &manifest_path,
            &serde_json::json!({
                "version": env!("CARGO_PKG_VERSION"),
                "status": "failed",
                "config": config_echo,
                "failed_realizations": failures,
            }),
        )
        .map_err(|e| e.to_string())?;
        return Err("all realizations failed".into());
    }

    let mut artifact_list: Vec<String> = Vec::new();
    write_artifacts(cfg, &ok, out, &mut artifact_list).map_err(|e| e.to_string())?;

    write_json(
        &manifest_path,
        &serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "status": "complete",
            "config": config_echo,
            "master_seed": cfg.master_seed,
            "completed_realizations": ok.len(),
            "failed_realizations": failures,
            "artifacts": artifact_list,
            "wall_seconds": started.elapsed().as_secs_f64(),
        }),
    )
    .map_err(|e| e.to_string())?;

    Ok(RunOutcome {
        output_dir: out.clone(),
        completed: ok.len(),
        failed: failures.len(),
    })
}

fn write_artifacts(
    cfg: &ExperimentConfig,
    runs: &[RealizationOutput],
    out: &Path,
    artifact_list: &mut Vec<String>,
) -> std::io::Result<()> {
    let mut track = |p: &Path| {
        artifact_list.push(p.strip_prefix(out).unwrap_or(p).display().to_string());
    };

    // raw spectra, shared by several analyses and exports
    let mut spec = CsvTable::new(&["realization", "re", "im"]);
    for r in runs {
        for z in &r.spectrum {
            spec.push(vec![r.index.to_string(), cell(z.re), cell(z.im)]);
        }
    }
    let p = out.join("spectrum.csv");
    spec.write_to(&p)?;
    track(&p);

    for (k, a) in cfg.analysis.iter().enumerate() {
        let dir = out.join(analysis_dir(k, a));
        match a {
            AnalysisConfig::SpectrumStats => {
                let mut t = CsvTable::new(&[
                    "realization",
                    "n_levels",
                    "mean_cos_theta",
                    "bulk_cos_theta",
                    "mean_modulus",
                    "mean_r_real",
                ]);
                for r in runs {
                    if let AnalysisOutput::Spectrum {
                        n_levels,
                        mean_cos_theta,
                        bulk_cos_theta,
                        mean_modulus,
                        mean_r_real,
                    } = &r.analyses[k]
                    {
                        t.push(vec![
                            r.index.to_string(),
                            n_levels.to_string(),
                            cell(*mean_cos_theta),
                            cell(*bulk_cos_theta),
                            cell(*mean_modulus),
                            cell(*mean_r_real),
                        ]);
                    }
                }
                let p = dir.join("stats.csv");
                t.write_to(&p)?;
                track(&p);
            }
            AnalysisConfig::StripeSweep { .. } => {
                let mut sweep =
                    CsvTable::new(&["realization", "d", "mean_r", "n_stripes_used", "n_ratios"]);
                let mut summary = CsvTable::new(&["realization", "d_max", "r_at_d_max"]);
                let mut per_stripe = CsvTable::new(&[
                    "realization",
                    "stripe_id",
                    "gamma_bar",
                    "d",
                    "n_members",
                    "mean_r",
                ]);
                for r in runs {
                    if let AnalysisOutput::Sweep { points, d_max, r_at_d_max, stripes_at_d_max } =
                        &r.analyses[k]
                    {
                        for pnt in points {
                            sweep.push(vec![
                                r.index.to_string(),
                                cell(pnt.d),
                                cell(pnt.mean_r),
                                pnt.n_stripes_used.to_string(),
                                pnt.n_ratios.to_string(),
                            ]);
                        }
                        summary.push(vec![
                            r.index.to_string(),
                            cell(*d_max),
                            cell(*r_at_d_max),
                        ]);
                        for sr in stripes_at_d_max {
                            per_stripe.push(vec![
                                r.index.to_string(),
                                sr.stripe_index.to_string(),
                                cell(sr.gamma_center),
                                cell(*d_max),
                                sr.n_members.to_string(),
                                cell(sr.mean_r),
                            ]);
                        }
                    }
                }
                for (name, table) in [
                    ("sweep.csv", &sweep),
                    ("summary.csv", &summary),
                    ("stripes_at_dmax.csv", &per_stripe),
                ] {
                    let p = dir.join(name);
                    table.write_to(&p)?;
                    track(&p);
                }
            }
            AnalysisConfig::EthDiag { .. } => {
                let mut rows_t = CsvTable::new(&["realization", "omega", "value"]);
                let mut summary =
                    CsvTable::new(&["realization", "n", "mean", "variance", "super_dim"]);
                let mut pooled_vals = Vec::new();
                let mut super_dim_any = 0usize;
                for r in runs {
                    if let AnalysisOutput::EthDiag { rows, n, mean, variance, super_dim } =
                        &r.analyses[k]
                    {
                        for (omega, v) in rows {
                            rows_t.push(vec![r.index.to_string(), cell(*omega), cell(*v)]);
                            pooled_vals.push(*v);
                        }
                        summary.push(vec![
                            r.index.to_string(),
                            n.to_string(),
                            cell(*mean),
                            cell(*variance),
                            super_dim.to_string(),
                        ]);
                        super_dim_any = *super_dim;
                    }
                }
                let mut pooled = CsvTable::new(&["n", "mean", "variance", "super_dim"]);
                let (n, mean, var) = pooled_stats(&pooled_vals);
                pooled.push(vec![
                    n.to_string(),
                    cell(mean),
                    cell(var),
                    super_dim_any.to_string(),
                ]);
                for (name, table) in [
                    ("diag_elements.csv", &rows_t),
                    ("summary.csv", &summary),
                    ("pooled.csv", &pooled),
                ] {
                    let p = dir.join(name);
                    table.write_to(&p)?;
                    track(&p);
                }
            }
            AnalysisConfig::EthOffdiag { .. } => {
                let mut rows_t = CsvTable::new(&["realization", "value"]);
                let mut summary = CsvTable::new(&[
                    "realization",
                    "n",
                    "variance",
                    "excess_kurtosis",
                    "ks_distance",
                    "super_dim",
                ]);
                let mut pooled_vals = Vec::new();
                let mut super_dim_any = 0usize;
                for r in runs {
                    if let AnalysisOutput::EthOffdiag {
                        values,
                        n,
                        variance,
                        excess_kurtosis,
                        ks_distance,
                        super_dim,
                    } = &r.analyses[k]
                    {
                        for v in values {
                            rows_t.push(vec![r.index.to_string(), cell(*v)]);
                            pooled_vals.push(*v);
                        }
                        summary.push(vec![
                            r.index.to_string(),
                            n.to_string(),
                            cell(*variance),
                            cell(*excess_kurtosis),
                            cell(*ks_distance),
                            super_dim.to_string(),
                        ]);
                        super_dim_any = *super_dim;
                    }
                }
                let mut pooled = CsvTable::new(&[
                    "n",
                    "variance",
                    "excess_kurtosis",
                    "ks_distance",
                    "super_dim",
                ]);
                let (n, _mean, var) = pooled_stats(&pooled_vals);
                let (kurt, ks) = pooled_shape(&pooled_vals);
                pooled.push(vec![
                    n.to_string(),
                    cell(var),
                    cell(kurt),
                    cell(ks),
                    super_dim_any.to_string(),
                ]);
                for (name, table) in [
                    ("offdiag_values.csv", &rows_t),
                    ("summary.csv", &summary),
                    ("pooled.csv", &pooled),
                ] {
                    let p = dir.join(name);
                    table.write_to(&p)?;
                    track(&p);
                }
            }
            AnalysisConfig::Dynamics { .. } => {
                let mut series_t = CsvTable::new(&["realization", "t", "re", "im"]);
                let mut weights_t = CsvTable::new(&[
                    "realization",
                    "stripe_id",
                    "gamma_bar",
                    "n_members",
                    "weight_sum",
                    "n_above_cutoff",
                ]);
                let mut stripe_t =
                    CsvTable::new(&["realization", "stripe_id", "t", "re", "im", "abs"]);
                for r in runs {
                    if let AnalysisOutput::Dynamics { series, weights, stripe_series } =
                        &r.analyses[k]
                    {
                        for (t, v) in series {
                            series_t.push(vec![
                                r.index.to_string(),
                                cell(*t),
                                cell(v.re),
                                cell(v.im),
                            ]);
                        }
                        for wr in weights {
                            weights_t.push(vec![
                                r.index.to_string(),
                                wr.stripe_id.to_string(),
                                cell(wr.gamma_center),
                                wr.n_members.to_string(),
                                cell(wr.weight_sum),
                                wr.n_above.to_string(),
                            ]);
                        }
                        for (sid, t, v) in stripe_series {
                            stripe_t.push(vec![
                                r.index.to_string(),
                                sid.to_string(),
                                cell(*t),
                                cell(v.re),
                                cell(v.im),
                                cell(v.norm()),
                            ]);
                        }
                    }
                }
                for (name, table) in [
                    ("series.csv", &series_t),
                    ("stripe_weights.csv", &weights_t),
                    ("stripe_series.csv", &stripe_t),
                ] {
                    let p = dir.join(name);
                    table.write_to(&p)?;
                    track(&p);
                }
            }
        }
    }
    Ok(())
}

fn pooled_stats(values: &[f64]) -> (usize, f64, f64) {
    let n = values.len();
    if n < 2 {
        return (n, values.first().copied().unwrap_or(f64::NAN), f64::NAN);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (n, mean, var)
}

fn pooled_shape(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n < 4 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
    let kurt = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    let sigma0 = (values.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
    (kurt, eth::ks_distance_to_normal(values, 0.0, sigma0))
}
