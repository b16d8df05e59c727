//! Level-spacing statistics for real and complex spectra.
//!
//! Two diagnostics are provided:
//!
//! * the consecutive-spacing ratio `r_n = min(s_n, s_{n+1}) / max(s_n, s_{n+1})`
//!   for ordered real levels, with reference means `⟨r⟩ ≈ 0.386` (Poisson)
//!   and `⟨r⟩ ≈ 0.53` (GOE);
//! * the complex spacing ratio `z = (λ^NN - λ) / (λ^NNN - λ)` built from the
//!   nearest and next-to-nearest neighbours of each complex eigenvalue, with
//!   `⟨cos θ⟩ ≈ 0` for uncorrelated 2D spectra and `⟨cos θ⟩ ≈ 0.24` for the
//!   Ginibre universality class.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Duplicate levels closer than this (relative to the spectral span) are
/// collapsed before forming ratios.
const DEDUP_REL_TOL: f64 = 1e-12;

/// Summary of the consecutive-spacing-ratio distribution of a real spectrum.
#[derive(Clone, Debug)]
pub struct RatioStats {
    pub mean_r: f64,
    pub n_ratios: usize,
    pub n_levels_used: usize,
    pub n_duplicates_dropped: usize,
}

/// `⟨r⟩` over consecutive spacings of the (sorted) real levels.
pub fn r_ratio(levels: &[f64]) -> Result<RatioStats> {
    if levels.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteData);
    }
    let mut sorted: Vec<f64> = levels.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let span = match (sorted.first(), sorted.last()) {
        (Some(a), Some(b)) => (b - a).max(f64::MIN_POSITIVE),
        _ => return Err(Error::TooFewLevels { got: 0, need: 3 }),
    };
    let tol = DEDUP_REL_TOL * span;
    let mut unique = Vec::with_capacity(sorted.len());
    for &x in &sorted {
        match unique.last() {
            Some(&last) if x - last <= tol => {}
            _ => unique.push(x),
        }
    }
    let dropped = sorted.len() - unique.len();
    if unique.len() < 3 {
        return Err(Error::TooFewLevels { got: unique.len(), need: 3 });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for w in unique.windows(3) {
        let s0 = w[1] - w[0];
        let s1 = w[2] - w[1];
        sum += s0.min(s1) / s0.max(s1);
        count += 1;
    }
    Ok(RatioStats {
        mean_r: sum / count as f64,
        n_ratios: count,
        n_levels_used: unique.len(),
        n_duplicates_dropped: dropped,
    })
}

/// Summary of the complex-spacing-ratio cloud of a complex spectrum.
#[derive(Clone, Debug)]
pub struct ComplexRatioStats {
    pub ratios: Vec<Complex64>,
    /// Index into the input spectrum of the point each ratio belongs to
    /// (skipped degenerate points leave gaps), so callers can restrict
    /// averages to a spectral region while neighbours are still found in
    /// the full cloud.
    pub point_indices: Vec<usize>,
    /// `⟨cos θ⟩` with `θ = arg(−z)`: the mean cosine of the angle between
    /// the nearest-neighbour displacement and the *reversed* next-to-nearest
    /// displacement. With this sign convention uncorrelated 2D spectra give
    /// ≈ 0 and Ginibre-type level repulsion gives ≈ +0.24.
    pub mean_cos_theta: f64,
    pub mean_modulus: f64,
    pub n_degenerate_skipped: usize,
}

/// Complex spacing ratios `z_k = (λ_k^NN - λ_k)/(λ_k^NNN - λ_k)` for every
/// eigenvalue, plus the angular and radial means of the cloud.
///
/// Points whose next-to-nearest neighbour coincides with them (within
/// `1e-12` of the cloud scale) are skipped and counted.
pub fn complex_spacing_ratios(spectrum: &[Complex64]) -> Result<ComplexRatioStats> {
    let n = spectrum.len();
    if n < 3 {
        return Err(Error::TooFewLevels { got: n, need: 3 });
    }
    if spectrum.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteData);
    }
    let scale = cloud_scale(spectrum);
    let tol = DEDUP_REL_TOL * scale;

    let neighbours = if n <= 5000 {
        two_nearest_brute(spectrum)
    } else {
        two_nearest_grid(spectrum)
    };

    let mut ratios = Vec::with_capacity(n);
    let mut point_indices = Vec::with_capacity(n);
    let mut skipped = 0usize;
    let (mut sum_cos, mut sum_mod) = (0.0, 0.0);
    for (k, &(nn, nnn)) in neighbours.iter().enumerate() {
        let d_nn = spectrum[nn] - spectrum[k];
        let d_nnn = spectrum[nnn] - spectrum[k];
        if d_nnn.norm() <= tol {
            skipped += 1;
            continue;
        }
        let z = d_nn / d_nnn;
        sum_cos += (-z).arg().cos();
        sum_mod += z.norm();
        ratios.push(z);
        point_indices.push(k);
    }
    if ratios.is_empty() {
        return Err(Error::TooFewLevels { got: 0, need: 3 });
    }
    let m = ratios.len() as f64;
    Ok(ComplexRatioStats {
        mean_cos_theta: sum_cos / m,
        mean_modulus: sum_mod / m,
        ratios,
        point_indices,
        n_degenerate_skipped: skipped,
    })
}

/// `⟨cos θ⟩` of the spectral bulk: neighbours are found in the full cloud,
/// but the average runs only over points inside the 10th-90th percentile
/// rectangle of the cloud (both axes). This cuts the boundary layer, whose
/// ratios are biased toward the uncorrelated value, without creating an
/// artificial edge the way filtering the point set itself would.
pub fn bulk_mean_cos_theta(spectrum: &[Complex64]) -> Result<f64> {
    let s = complex_spacing_ratios(spectrum)?;
    let mut res: Vec<f64> = spectrum.iter().map(|z| z.re).collect();
    let mut ims: Vec<f64> = spectrum.iter().map(|z| z.im).collect();
    res.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |v: &[f64], p: f64| v[((v.len() - 1) as f64 * p) as usize];
    let (r0, r1) = (q(&res, 0.10), q(&res, 0.90));
    let (i0, i1) = (q(&ims, 0.10), q(&ims, 0.90));
    let (mut sum, mut count) = (0.0, 0usize);
    for (z, &k) in s.ratios.iter().zip(&s.point_indices) {
        let p = spectrum[k];
        if p.re >= r0 && p.re <= r1 && p.im >= i0 && p.im <= i1 {
            sum += (-z).arg().cos();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::TooFewLevels { got: 0, need: 3 });
    }
    Ok(sum / count as f64)
}

fn cloud_scale(spectrum: &[Complex64]) -> f64 {
    let (mut re_min, mut re_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut im_min, mut im_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in spectrum {
        re_min = re_min.min(z.re);
        re_max = re_max.max(z.re);
        im_min = im_min.min(z.im);
        im_max = im_max.max(z.im);
    }
    ((re_max - re_min).hypot(im_max - im_min)).max(f64::MIN_POSITIVE)
}

/// Indices of the nearest and next-to-nearest neighbour of each point,
/// by exhaustive search. Ties are broken by index order, which keeps the
/// result deterministic.
fn two_nearest_brute(pts: &[Complex64]) -> Vec<(usize, usize)> {
    let n = pts.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (mut b1, mut d1) = (usize::MAX, f64::INFINITY);
        let (mut b2, mut d2) = (usize::MAX, f64::INFINITY);
        for j in 0..n {
            if j == k {
                continue;
            }
            let d = (pts[j] - pts[k]).norm_sqr();
            if d < d1 {
                (b2, d2) = (b1, d1);
                (b1, d1) = (j, d);
            } else if d < d2 {
                (b2, d2) = (j, d);
            }
        }
        out.push((b1, b2));
    }
    out
}

/// Same as [`two_nearest_brute`] but with a uniform grid bucket index, so
/// large clouds (10^5 points and up) stay near-linear in cost.
fn two_nearest_grid(pts: &[Complex64]) -> Vec<(usize, usize)> {
    let n = pts.len();
    let (mut re_min, mut re_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut im_min, mut im_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in pts {
        re_min = re_min.min(z.re);
        re_max = re_max.max(z.re);
        im_min = im_min.min(z.im);
        im_max = im_max.max(z.im);
    }
    let w = (re_max - re_min).max(f64::MIN_POSITIVE);
    let h = (im_max - im_min).max(f64::MIN_POSITIVE);
    // aim for a few points per cell
    let cells = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let (nx, ny) = (cells, cells);
    let cell_of = |z: &Complex64| -> (usize, usize) {
        let cx = (((z.re - re_min) / w * nx as f64) as usize).min(nx - 1);
        let cy = (((z.im - im_min) / h * ny as f64) as usize).min(ny - 1);
        (cx, cy)
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
    for (k, z) in pts.iter().enumerate() {
        let (cx, cy) = cell_of(z);
        buckets[cy * nx + cx].push(k);
    }
    let cell_w = w / nx as f64;
    let cell_h = h / ny as f64;

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (cx, cy) = cell_of(&pts[k]);
        let (mut b1, mut d1) = (usize::MAX, f64::INFINITY);
        let (mut b2, mut d2) = (usize::MAX, f64::INFINITY);
        // expand rings until the found distances are certified by the ring radius
        let mut ring = 0usize;
        loop {
            let mut any_cell = false;
            for dy in -(ring as isize)..=ring as isize {
                for dx in -(ring as isize)..=ring as isize {
                    if dx.unsigned_abs() != ring && dy.unsigned_abs() != ring {
                        continue; // only the boundary of the ring
                    }
                    let x = cx as isize + dx;
                    let y = cy as isize + dy;
                    if x < 0 || y < 0 || x as usize >= nx || y as usize >= ny {
                        continue;
                    }
                    any_cell = true;
                    for &j in &buckets[y as usize * nx + x as usize] {
                        if j == k {
                            continue;
                        }
                        let d = (pts[j] - pts[k]).norm_sqr();
                        if d < d1 || (d == d1 && j < b1) {
                            (b2, d2) = (b1, d1);
                            (b1, d1) = (j, d);
                        } else if d < d2 || (d == d2 && j < b2) {
                            (b2, d2) = (j, d);
                        }
                    }
                }
            }
            // distance to the nearest unexplored ring boundary
            let certified = ring as f64 * cell_w.min(cell_h);
            if (b2 != usize::MAX && d2.sqrt() <= certified) || (!any_cell && ring > nx + ny) {
                break;
            }
            ring += 1;
        }
        out.push((b1, b2));
    }
    out
}
