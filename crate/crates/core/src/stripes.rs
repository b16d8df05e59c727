//! Liouvillian stripes: decay-rate tiling of a complex spectrum and the
//! stripe-resolved spacing-ratio diagnostic.
//!
//! The spectrum `λ_α = Γ_α + iΩ_α` is partitioned into vertical boxes
//! ("stripes") of width `d` along the decay-rate axis. Within each stripe the
//! decay rate is gauged away and the ordered frequencies `Ω` are analysed with
//! the real spacing-ratio statistic. Sweeping `d` produces a curve `⟨r⟩(d)`
//! whose maximum identifies the natural stripe width: chaotic Liouvillians
//! reach `⟨r⟩(d_max) ≈ 0.51` while integrable ones stay at the Poisson value
//! `≈ 0.386` for every width.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stats::r_ratio;

/// Minimum stripe population for the r-statistic to be formed.
pub const MIN_STRIPE_MEMBERS: usize = 3;

/// One decay-rate box of the tiling.
#[derive(Clone, Debug)]
pub struct Stripe {
    pub index: usize,
    /// Center of the box on the decay-rate axis.
    pub gamma_center: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    /// Frequencies `Ω` of the members, sorted ascending.
    pub frequencies: Vec<f64>,
}

impl Stripe {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Tile `[min Γ, max Γ]` with boxes of width `d`, starting at `min Γ`; the
/// last box is widened to absorb the remainder so every eigenvalue lands in
/// exactly one stripe.
pub fn partition_stripes(spectrum: &[Complex64], d: f64) -> Result<Vec<Stripe>> {
    if spectrum.len() < MIN_STRIPE_MEMBERS {
        return Err(Error::TooFewLevels { got: spectrum.len(), need: MIN_STRIPE_MEMBERS });
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("stripe width must be positive, got {d}")));
    }
    if spectrum.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteData);
    }
    let g_min = spectrum.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let g_max = spectrum.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let width = g_max - g_min;
    let n_boxes = if width == 0.0 { 1 } else { (width / d).ceil() as usize };
    let n_boxes = n_boxes.max(1);
    let mut stripes: Vec<Stripe> = (0..n_boxes)
        .map(|k| {
            let lo = g_min + k as f64 * d;
            let hi = if k + 1 == n_boxes { g_max } else { lo + d };
            Stripe {
                index: k,
                gamma_center: 0.5 * (lo + hi),
                gamma_lo: lo,
                gamma_hi: hi,
                frequencies: Vec::new(),
            }
        })
        .collect();
    for z in spectrum {
        let mut k = if width == 0.0 {
            0
        } else {
            (((z.re - g_min) / d) as usize).min(n_boxes - 1)
        };
        // guard against round-off pushing a point across its box edge
        while k > 0 && z.re < stripes[k].gamma_lo {
            k -= 1;
        }
        stripes[k].frequencies.push(z.im);
    }
    for s in &mut stripes {
        s.frequencies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    Ok(stripes)
}

/// Per-stripe mean spacing ratio over the sorted frequencies.
#[derive(Clone, Debug)]
pub struct StripeRatio {
    pub stripe_index: usize,
    pub gamma_center: f64,
    pub n_members: usize,
    pub mean_r: f64,
}

/// Stripe-resolved and pooled `⟨r⟩` for a tiling. Stripes with fewer than
/// [`MIN_STRIPE_MEMBERS`] members are ignored; the pooled mean weights each
/// ratio (not each stripe) equally.
pub fn stripe_r(stripes: &[Stripe]) -> Result<(Vec<StripeRatio>, f64)> {
    let mut per = Vec::new();
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in stripes {
        if s.len() < MIN_STRIPE_MEMBERS {
            continue;
        }
        match r_ratio(&s.frequencies) {
            Ok(stats) => {
                per.push(StripeRatio {
                    stripe_index: s.index,
                    gamma_center: s.gamma_center,
                    n_members: s.len(),
                    mean_r: stats.mean_r,
                });
                sum += stats.mean_r * stats.n_ratios as f64;
                count += stats.n_ratios;
            }
            // all members degenerate after dedup: treat like an underfilled stripe
            Err(Error::TooFewLevels { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if count == 0 {
        return Err(Error::NoUsableStripe);
    }
    Ok((per, sum / count as f64))
}

/// One point of the width sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub d: f64,
    pub mean_r: f64,
    pub n_stripes_used: usize,
    pub n_ratios: usize,
}

/// Result of sweeping the stripe width over a grid.
#[derive(Clone, Debug)]
pub struct WidthSweep {
    pub points: Vec<SweepPoint>,
    /// Width of the maximum of `⟨r⟩(d)`.
    pub d_max: f64,
    /// `⟨r⟩` at the maximum.
    pub r_at_d_max: f64,
}

/// Evaluate the pooled `⟨r⟩` on every width of `d_grid` and locate the
/// maximum. Widths on which no stripe is usable are skipped.
pub fn sweep_width(spectrum: &[Complex64], d_grid: &[f64]) -> Result<WidthSweep> {
    if d_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut points = Vec::with_capacity(d_grid.len());
    for &d in d_grid {
        let stripes = partition_stripes(spectrum, d)?;
        match stripe_r(&stripes) {
            Ok((per, pooled)) => {
                let n_ratios = per.iter().map(|p| p.n_members - 2).sum();
                points.push(SweepPoint {
                    d,
                    mean_r: pooled,
                    n_stripes_used: per.len(),
                    n_ratios,
                });
            }
            Err(Error::NoUsableStripe) => continue,
            Err(e) => return Err(e),
        }
    }
    let best = points
        .iter()
        .max_by(|a, b| a.mean_r.partial_cmp(&b.mean_r).unwrap())
        .ok_or(Error::NoUsableStripe)?;
    let (d_max, r_at_d_max) = (best.d, best.mean_r);
    Ok(WidthSweep { points, d_max, r_at_d_max })
}

/// Default log-spaced width grid: from twice the median consecutive gap of
/// the sorted decay rates up to the full decay-rate span.
pub fn default_d_grid(spectrum: &[Complex64], n_points: usize) -> Result<Vec<f64>> {
    if spectrum.len() < MIN_STRIPE_MEMBERS {
        return Err(Error::TooFewLevels { got: spectrum.len(), need: MIN_STRIPE_MEMBERS });
    }
    if n_points < 2 {
        return Err(Error::InvalidParameter("need at least 2 grid points".into()));
    }
    let mut gammas: Vec<f64> = spectrum.iter().map(|z| z.re).collect();
    gammas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let span = gammas.last().unwrap() - gammas.first().unwrap();
    if !(span > 0.0) {
        return Err(Error::DegenerateBox);
    }
    let mut gaps: Vec<f64> = gammas.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.0).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_gap = gaps[gaps.len() / 2];
    let lo = (2.0 * median_gap).min(span / 2.0);
    let hi = span;
    let ratio = (hi / lo).ln();
    Ok((0..n_points)
        .map(|k| lo * (ratio * k as f64 / (n_points - 1) as f64).exp())
        .collect())
}

/// Drop the stripes touching the spectral edges (the steady-state stripe and
/// the fastest-decaying stripe) and any stripe below `min_members`; used to
/// restrict statistics to the bulk of the decay-rate axis.
pub fn select_bulk_stripes(stripes: &[Stripe], min_members: usize) -> Vec<Stripe> {
    let occupied: Vec<&Stripe> = stripes.iter().filter(|s| !s.is_empty()).collect();
    if occupied.len() <= 2 {
        return Vec::new();
    }
    occupied[1..occupied.len() - 1]
        .iter()
        .filter(|s| s.len() >= min_members)
        .map(|s| (*s).clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{Box2D, EnsembleSeed, sample_poisson2d};

    fn grid_cloud(nx: usize, ny: usize) -> Vec<Complex64> {
        let mut v = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                v.push(Complex64::new(i as f64, j as f64 + 0.01 * i as f64));
            }
        }
        v
    }

    #[test]
    fn partition_conserves_members() {
        let pts = sample_poisson2d(500, Box2D::unit(), EnsembleSeed::new(31, 0)).unwrap();
        for d in [0.01, 0.13, 0.5, 2.0] {
            let stripes = partition_stripes(&pts, d).unwrap();
            let total: usize = stripes.iter().map(Stripe::len).sum();
            assert_eq!(total, pts.len());
            for s in &stripes {
                assert!(s.frequencies.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn wide_box_recovers_global_statistic() {
        let pts = sample_poisson2d(2000, Box2D::unit(), EnsembleSeed::new(31, 1)).unwrap();
        let stripes = partition_stripes(&pts, 10.0).unwrap();
        assert_eq!(stripes.len(), 1);
        let (per, pooled) = stripe_r(&stripes).unwrap();
        assert_eq!(per.len(), 1);
        let direct = crate::stats::r_ratio(
            &pts.iter().map(|z| z.im).collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((pooled - direct.mean_r).abs() < 1e-12);
    }

    #[test]
    fn gauge_independence() {
        // shifting all decay rates, or all frequencies, must not change ⟨r⟩
        let pts = sample_poisson2d(800, Box2D::unit(), EnsembleSeed::new(31, 2)).unwrap();
        let d = 0.11;
        let base = stripe_r(&partition_stripes(&pts, d).unwrap()).unwrap().1;
        let shifted: Vec<Complex64> = pts.iter().map(|z| z + Complex64::new(-7.3, 4.1)).collect();
        let moved = stripe_r(&partition_stripes(&shifted, d).unwrap()).unwrap().1;
        assert!((base - moved).abs() < 1e-12);
    }

    #[test]
    fn exact_grid_stripes() {
        // 10 columns at integer Γ span [0, 9]; width 1 tiles into 9 boxes and
        // the widened last box absorbs the columns at Γ = 8 and Γ = 9
        let pts = grid_cloud(10, 20);
        let stripes = partition_stripes(&pts, 1.0).unwrap();
        let occupied: Vec<_> = stripes.iter().filter(|s| !s.is_empty()).collect();
        assert_eq!(occupied.len(), 9);
        assert!(occupied[..8].iter().all(|s| s.len() == 20));
        assert_eq!(occupied[8].len(), 40);
    }

    #[test]
    fn sweep_flat_for_poisson() {
        // Uncorrelated spectra keep ⟨r⟩ near 0.386 at every usable width.
        let pts = sample_poisson2d(20_000, Box2D::unit(), EnsembleSeed::new(32, 0)).unwrap();
        let grid = default_d_grid(&pts, 12).unwrap();
        let sweep = sweep_width(&pts, &grid).unwrap();
        for p in &sweep.points {
            if p.n_ratios > 2000 {
                assert!((p.mean_r - 0.386).abs() < 0.02, "d={} r={}", p.d, p.mean_r);
            }
        }
    }

    #[test]
    fn select_bulk_drops_edges() {
        // Γ span [0, 4], width 1: 4 boxes, the last holding columns 3 and 4;
        // dropping both edge stripes leaves the two middle ones
        let pts = grid_cloud(5, 10);
        let stripes = partition_stripes(&pts, 1.0).unwrap();
        let bulk = select_bulk_stripes(&stripes, 3);
        assert_eq!(bulk.len(), 2);
        assert!(bulk.iter().all(|s| s.len() == 10));
        let centers: Vec<f64> = bulk.iter().map(|s| s.gamma_center).collect();
        assert!(centers.iter().all(|c| (0.5..2.51).contains(c)));
    }

    #[test]
    fn invalid_inputs_rejected() {
        let pts = grid_cloud(2, 2);
        assert!(partition_stripes(&pts, 0.0).is_err());
        assert!(partition_stripes(&pts[..2], 1.0).is_err());
        assert!(sweep_width(&pts, &[]).is_err());
    }
}
