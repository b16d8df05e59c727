//! Figure exports: turn run artifacts into per-panel plot data (CSV) plus a
//! self-contained SVG rendering.

use std::path::{Path, PathBuf};

use crate::artifacts::{CsvTable, cell};
use crate::plot::{self, Figure, Layer};

#[derive(Debug)]
pub enum ExportError {
    MissingArtifact(String),
    UnknownFigure(String),
    Io(std::io::Error),
    Malformed(String),
}

impl std::fmt::Display for ExportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExportError::MissingArtifact(p) => write!(f, "missing artifact: {p}"),
            ExportError::UnknownFigure(id) => write!(
                f,
                "unknown figure id {id}; known: fig1a, fig1b, fig2a, fig2b, fig3a, fig3b, fig4c"
            ),
            ExportError::Io(e) => write!(f, "io error: {e}"),
            ExportError::Malformed(m) => write!(f, "malformed artifact: {m}"),
        }
    }
}

impl std::error::Error for ExportError {}

impl From<std::io::Error> for ExportError {
    fn from(e: std::io::Error) -> Self {
        ExportError::Io(e)
    }
}

/// A parsed CSV artifact: header plus string cells.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, ExportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| ExportError::MissingArtifact(path.display().to_string()))?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| ExportError::Malformed(format!("{} is empty", path.display())))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        Ok(Self { header, rows })
    }

    fn col(&self, name: &str) -> Result<usize, ExportError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ExportError::Malformed(format!("missing column {name}")))
    }

    fn f64s(&self, name: &str) -> Result<Vec<f64>, ExportError> {
        let c = self.col(name)?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|_| ExportError::Malformed(format!("bad float {}", r[c])))
            })
            .collect()
    }

    fn strings(&self, name: &str) -> Result<Vec<String>, ExportError> {
        let c = self.col(name)?;
        Ok(self.rows.iter().map(|r| r[c].clone()).collect())
    }
}

/// Directories of analyses of one kind, sorted by analysis index.
fn analysis_dirs(run_dir: &Path, kind: &str) -> Vec<PathBuf> {
    let suffix = format!("_{kind}");
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(run_dir)
        .into_iter()
        .flatten()
        .flatten()
        .map(|e| e.path())
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("analysis_") && n.ends_with(&suffix))
        })
        .collect();
    dirs.sort();
    dirs
}

fn export_paths(run_dir: &Path, figure_id: &str) -> std::io::Result<(PathBuf, PathBuf)> {
    let dir = run_dir.join("export");
    std::fs::create_dir_all(&dir)?;
    Ok((dir.join(format!("{figure_id}.csv")), dir.join(format!("{figure_id}.svg"))))
}

/// Diagonal-element scatter: (omega, value, size_label) pooled over every
/// diagonal-ETH analysis of the run.
fn export_diag_scatter(run_dir: &Path, figure_id: &str) -> Result<PathBuf, ExportError> {
    let dirs = analysis_dirs(run_dir, "eth_diag");
    if dirs.is_empty() {
        return Err(ExportError::MissingArtifact("analysis_*_eth_diag".into()));
    }
    let mut out = CsvTable::new(&["omega", "value", "size_label"]);
    let mut points = Vec::new();
    for d in &dirs {
        let rows = Table::read(&d.join("diag_elements.csv"))?;
        let pooled = Table::read(&d.join("pooled.csv"))?;
        let size = pooled
            .strings("super_dim")?
            .first()
            .cloned()
            .unwrap_or_default();
        let omegas = rows.f64s("omega")?;
        let values = rows.f64s("value")?;
        for (o, v) in omegas.iter().zip(&values) {
            out.push(vec![cell(*o), cell(*v), size.clone()]);
            points.push((*o, *v));
        }
    }
    let (csv_path, svg_path) = export_paths(run_dir, figure_id)?;
    out.write_to(&csv_path)?;
    let fig = Figure::new("Diagonal matrix elements", "Ω", "O_αα");
    let svg = plot::render(
        &fig,
        &[Layer::Scatter { points, color: "#1f77b4".into(), radius: 1.6, label: String::new() }],
    );
    std::fs::write(&svg_path, svg)?;
    Ok(csv_path)
}

/// Off-diagonal histogram with the fitted zero-mean normal overlaid:
/// (bin_left, bin_right, density, normal_density).
fn export_offdiag_histogram(run_dir: &Path, figure_id: &str) -> Result<PathBuf, ExportError> {
    let dirs = analysis_dirs(run_dir, "eth_offdiag");
    let dir = dirs
        .first()
        .ok_or_else(|| ExportError::MissingArtifact("analysis_*_eth_offdiag".into()))?;
    let rows = Table::read(&dir.join("offdiag_values.csv"))?;
    let values = rows.f64s("value")?;
    if values.is_empty() {
        return Err(ExportError::Malformed("no off-diagonal values".into()));
    }
    let sigma =
        (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    let bins = plot::histogram(&values, 60);
    let normal = |x: f64| {
        (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut out = CsvTable::new(&["bin_left", "bin_right", "density", "normal_density"]);
    for &(l, r, h) in &bins {
        out.push(vec![cell(l), cell(r), cell(h), cell(normal(0.5 * (l + r)))]);
    }
    let (csv_path, svg_path) = export_paths(run_dir, figure_id)?;
    out.write_to(&csv_path)?;
    let curve: Vec<(f64, f64)> = bins
        .iter()
        .map(|&(l, r, _)| {
            let x = 0.5 * (l + r);
            (x, normal(x))
        })
        .collect();
    let fig = Figure::new("Off-diagonal element distribution", "O_αβ", "density");
    let svg = plot::render(
        &fig,
        &[
            Layer::Histogram { bins, color: "#1f77b4".into(), label: "data".into() },
            Layer::Line { points: curve, color: "#d62728".into(), dashed: false, label: "normal fit".into() },
        ],
    );
    std::fs::write(&svg_path, svg)?;
    Ok(csv_path)
}

/// Stripe weights against the stripe decay rate: (gamma_bar, weight_sum,
/// n_members).
fn export_stripe_weights(run_dir: &Path, figure_id: &str) -> Result<PathBuf, ExportError> {
    let dirs = analysis_dirs(run_dir, "dynamics");
    let dir = dirs
        .first()
        .ok_or_else(|| ExportError::MissingArtifact("analysis_*_dynamics".into()))?;
    let rows = Table::read(&dir.join("stripe_weights.csv"))?;
    let gammas = rows.f64s("gamma_bar")?;
    let sums = rows.f64s("weight_sum")?;
    let members = rows.strings("n_members")?;
    let mut out = CsvTable::new(&["gamma_bar", "weight_sum", "n_members"]);
    let mut points = Vec::new();
    for ((g, w), m) in gammas.iter().zip(&sums).zip(&members) {
        out.push(vec![cell(*g), cell(*w), m.clone()]);
        if *w > 0.0 {
            points.push((*g, *w));
        }
    }
    let (csv_path, svg_path) = export_paths(run_dir, figure_id)?;
    out.write_to(&csv_path)?;
    let mut fig = Figure::new("Stripe spectral weights", "Γ̄", "Σ|c_α|");
    fig.y_log = true;
    let svg = plot::render(
        &fig,
        &[Layer::Scatter { points, color: "#2ca02c".into(), radius: 3.0, label: String::new() }],
    );
    std::fs::write(&svg_path, svg)?;
    Ok(csv_path)
}

/// The run's "most dynamical" bulk stripe: among occupied stripes that are
/// not the extremal ones, the one with the largest weight sum.
fn bulk_stripe_series(run_dir: &Path) -> Result<Vec<(f64, f64)>, ExportError> {
    let dirs = analysis_dirs(run_dir, "dynamics");
    let dir = dirs
        .first()
        .ok_or_else(|| ExportError::MissingArtifact("analysis_*_dynamics".into()))?;
    let weights = Table::read(&dir.join("stripe_weights.csv"))?;
    let ids = weights.strings("stripe_id")?;
    let sums = weights.f64s("weight_sum")?;
    let members = weights.f64s("n_members")?;
    let occupied: Vec<usize> = (0..ids.len()).filter(|&k| members[k] > 0.0).collect();
    if occupied.len() < 3 {
        return Err(ExportError::Malformed("too few occupied stripes for a bulk choice".into()));
    }
    let interior = &occupied[1..occupied.len() - 1];
    let best = interior
        .iter()
        .max_by(|&&a, &&b| sums[a].partial_cmp(&sums[b]).unwrap())
        .ok_or_else(|| ExportError::Malformed("no interior stripe".into()))?;
    let best_id = &ids[*best];
    let series = Table::read(&dir.join("stripe_series.csv"))?;
    let sids = series.strings("stripe_id")?;
    let ts = series.f64s("t")?;
    let abss = series.f64s("abs")?;
    let pts: Vec<(f64, f64)> = (0..sids.len())
        .filter(|&k| &sids[k] == best_id)
        .map(|k| (ts[k], abss[k]))
        .collect();
    if pts.is_empty() {
        return Err(ExportError::Malformed(format!(
            "no stripe series for bulk stripe {best_id}"
        )));
    }
    Ok(pts)
}

/// Renormalized bulk-stripe dynamics of the integrable and chaotic runs side
/// by side: (t, integrable_value, chaotic_value). Expects the two runs in
/// `<run-dir>/integrable` and `<run-dir>/chaotic`.
fn export_dynamics_contrast(run_dir: &Path, figure_id: &str) -> Result<PathBuf, ExportError> {
    let integrable = bulk_stripe_series(&run_dir.join("integrable"))?;
    let chaotic = bulk_stripe_series(&run_dir.join("chaotic"))?;
    let mut out = CsvTable::new(&["t", "integrable_value", "chaotic_value"]);
    for (k, (t, vi)) in integrable.iter().enumerate() {
        let vc = chaotic.get(k).map(|p| p.1).unwrap_or(f64::NAN);
        out.push(vec![cell(*t), cell(*vi), cell(vc)]);
    }
    let (csv_path, svg_path) = export_paths(run_dir, figure_id)?;
    out.write_to(&csv_path)?;
    let fig = Figure::new("Renormalized stripe dynamics", "t", "|f_s(t)|");
    let svg = plot::render(
        &fig,
        &[
            Layer::Line {
                points: integrable,
                color: "#1f77b4".into(),
                dashed: false,
                label: "integrable".into(),
            },
            Layer::Line {
                points: chaotic,
                color: "#d62728".into(),
                dashed: false,
                label: "chaotic".into(),
            },
        ],
    );
    std::fs::write(&svg_path, svg)?;
    Ok(csv_path)
}

/// ⟨r⟩ as a function of the stripe width: (d, mean_r, size), averaged over
/// realizations at each width.
fn export_width_sweep(run_dir: &Path, figure_id: &str) -> Result<PathBuf, ExportError> {
    let dirs = analysis_dirs(run_dir, "stripe_sweep");
    let dir = dirs
        .first()
        .ok_or_else(|| ExportError::MissingArtifact("analysis_*_stripe_sweep".into()))?;
    let rows = Table::read(&dir.join("sweep.csv"))?;
    let spectrum = Table::read(&run_dir.join("spectrum.csv"))?;
    let realizations = spectrum.strings("realization")?;
    let size = realizations.iter().filter(|r| r.as_str() == "0").count();
    let ds = rows.f64s("d")?;
    let rs = rows.f64s("mean_r")?;
    // group identical width strings so per-realization grids stay distinct
    let d_strings = rows.strings("d")?;
    let mut order: Vec<String> = Vec::new();
    let mut acc: std::collections::BTreeMap<String, (f64, f64, usize)> =
        std::collections::BTreeMap::new();
    for k in 0..ds.len() {
        let e = acc.entry(d_strings[k].clone()).or_insert_with(|| {
            order.push(d_strings[k].clone());
            (ds[k], 0.0, 0)
        });
        e.1 += rs[k];
        e.2 += 1;
    }
    let mut out = CsvTable::new(&["d", "mean_r", "size"]);
    let mut points = Vec::new();
    let mut entries: Vec<(f64, f64)> = acc
        .values()
        .map(|&(d, sum, n)| (d, sum / n as f64))
        .collect();
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (d, r) in entries {
        out.push(vec![cell(d), cell(r), size.to_string()]);
        points.push((d, r));
    }
    let (csv_path, svg_path) = export_paths(run_dir, figure_id)?;
    out.write_to(&csv_path)?;
    let mut fig = Figure::new("Stripe-width sweep", "d", "⟨r⟩");
    fig.x_log = true;
    let poisson: Vec<(f64, f64)> =
        points.iter().map(|&(d, _)| (d, 0.38629)).collect();
    let svg = plot::render(
        &fig,
        &[
            Layer::Line { points, color: "#1f77b4".into(), dashed: false, label: "⟨r⟩(d)".into() },
            Layer::Line {
                points: poisson,
                color: "#7f7f7f".into(),
                dashed: true,
                label: "Poisson".into(),
            },
        ],
    );
    std::fs::write(&svg_path, svg)?;
    Ok(csv_path)
}

/// Dispatch one figure id.
pub fn export_figure(run_dir: &Path, figure_id: &str) -> Result<PathBuf, ExportError> {
    match figure_id {
        "fig1a" | "fig2a" => export_diag_scatter(run_dir, figure_id),
        "fig1b" | "fig2b" => export_offdiag_histogram(run_dir, figure_id),
        "fig3a" => export_stripe_weights(run_dir, figure_id),
        "fig3b" => export_dynamics_contrast(run_dir, figure_id),
        "fig4c" => export_width_sweep(run_dir, figure_id),
        other => Err(ExportError::UnknownFigure(other.to_string())),
    }
}
