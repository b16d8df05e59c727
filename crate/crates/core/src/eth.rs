//! Eigenstate-thermalization statistics of superoperator matrix elements.
//!
//! For an operator `Ô` two superoperator forms are analysed:
//!
//! * coherent,    `𝒪 = Ô⊗𝟙 - 𝟙⊗Ôᵀ`   (acts as `ρ ↦ [Ô, ρ]`);
//! * measurement, `𝒪 = Ô⊗Ô*`          (acts as `ρ ↦ Ô ρ Ô†`).
//!
//! Matrix elements `𝒪_αβ = ⟨η_α|𝒪 η_β⟩` are taken between unit-norm right
//! eigenvectors of the Liouvillian. Their diagonal variance shrinks as `1/𝒟`
//! and their off-diagonal distribution at fixed frequency separation
//! `ω = Ω_α - Ω_β` is Gaussian when the Liouvillian is chaotic; both
//! signatures are broken in the integrable case.

use crate::error::{Error, Result};
use crate::lindblad::{SuperMatrix, sector_cross_norm};
use crate::matrix::{C64, CMatrix};
use crate::spectral::SpectralDecomposition;

/// Which superoperator is built from the base operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuperOperatorForm {
    /// `Ô⊗𝟙 - 𝟙⊗Ôᵀ`, the commutator action.
    Coherent,
    /// `Ô⊗Ô*`, the sandwich (measurement) action.
    Measurement,
}

/// Which vectors supply the bra side of a matrix element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementConvention {
    /// `⟨η_α|𝒪 η_β⟩` with unit-norm right eigenvectors on both sides.
    RightRight,
    /// `⟨σ_α|𝒪 η_β⟩` with the biorthogonal left eigenvectors as bras.
    Biorthogonal,
}

/// Dense superoperator on the full `D²`-dimensional space.
pub fn build_superoperator(op: &CMatrix, form: SuperOperatorForm) -> Result<CMatrix> {
    if !op.is_square() {
        return Err(Error::NotSquare { rows: op.nrows(), cols: op.ncols() });
    }
    let id = CMatrix::identity(op.nrows());
    Ok(match form {
        SuperOperatorForm::Coherent => &op.try_kron(&id)? - &id.try_kron(&op.transpose())?,
        SuperOperatorForm::Measurement => op.try_kron(&op.conj())?,
    })
}

/// Superoperator entries on a labelled sub-basis, built element-wise:
///
/// ```text
/// coherent:     𝒪[(i,j),(k,l)] = O[i,k] δ_jl - δ_ik O[l,j]
/// measurement:  𝒪[(i,j),(k,l)] = O[i,k] · conj(O[j,l])
/// ```
///
/// This is the projection `P 𝒪 P` of the full superoperator onto the span of
/// the listed super-basis elements; it avoids materializing the `D² x D²`
/// matrix when only a symmetry sector is needed.
pub fn build_superoperator_on_labels(
    op: &CMatrix,
    form: SuperOperatorForm,
    labels: &[(usize, usize)],
) -> Result<CMatrix> {
    if !op.is_square() {
        return Err(Error::NotSquare { rows: op.nrows(), cols: op.ncols() });
    }
    let d = op.nrows();
    for &(i, j) in labels {
        if i >= d || j >= d {
            return Err(Error::IndexOutOfRange { index: i.max(j), dim: d });
        }
    }
    let n = labels.len();
    let zero = C64::new(0.0, 0.0);
    Ok(match form {
        SuperOperatorForm::Coherent => CMatrix::from_fn(n, n, |r, c| {
            let (i, j) = labels[r];
            let (k, l) = labels[c];
            let mut v = zero;
            if j == l {
                v += op.get(i, k);
            }
            if i == k {
                v -= op.get(l, j);
            }
            v
        }),
        SuperOperatorForm::Measurement => CMatrix::from_fn(n, n, |r, c| {
            let (i, j) = labels[r];
            let (k, l) = labels[c];
            op.get(i, k) * op.get(j, l).conj()
        }),
    })
}

/// Restrict a full superoperator to the sub-basis of `sector`, demanding that
/// it is block diagonal there (cross-block entries ≤ 1e-10 of the scale).
pub fn restrict_to_sector(superop: &CMatrix, sector: &SuperMatrix) -> Result<CMatrix> {
    let kept: Vec<usize> = sector
        .labels
        .iter()
        .map(|&(i, j)| i * sector.hilbert_dim + j)
        .collect();
    if superop.nrows() != sector.hilbert_dim * sector.hilbert_dim {
        return Err(Error::DimensionMismatch {
            left: format!("superoperator dim {}", superop.nrows()),
            right: format!("expected {}", sector.hilbert_dim * sector.hilbert_dim),
        });
    }
    let cross = sector_cross_norm(superop, &kept);
    if cross > 1e-10 * superop.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::SectorNotPreserved { norm: cross });
    }
    Ok(CMatrix::from_fn(kept.len(), kept.len(), |r, c| {
        superop.get(kept[r], kept[c])
    }))
}

/// Matrix of elements `M_αβ` between the eigenvectors of `d` through the
/// superoperator `superop` (already expressed in the same basis).
pub fn matrix_elements(
    d: &SpectralDecomposition,
    superop: &CMatrix,
    convention: ElementConvention,
) -> Result<CMatrix> {
    let n = d.dim();
    if superop.nrows() != n || superop.ncols() != n {
        return Err(Error::DimensionMismatch {
            left: format!("decomposition dim {n}"),
            right: format!("superoperator {}x{}", superop.nrows(), superop.ncols()),
        });
    }
    let bras = match convention {
        ElementConvention::RightRight => &d.right,
        ElementConvention::Biorthogonal => {
            if !d.biorthonormal {
                return Err(Error::NotBiorthonormal);
            }
            &d.left
        }
    };
    Ok(&bras.dagger() * &(superop * &d.right))
}

/// Moments of one set of real matrix-element samples.
#[derive(Clone, Debug)]
pub struct ElementStatistics {
    pub n: usize,
    pub mean: f64,
    /// Sample variance (about the mean).
    pub variance: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov-Smirnov distance to a zero-mean normal with the sample's
    /// second moment.
    pub ks_distance: f64,
    pub values: Vec<f64>,
}

fn summarize(values: Vec<f64>) -> Result<ElementStatistics> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: n });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
    let variance = m2 * nf / (nf - 1.0);
    let excess_kurtosis = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    let sigma0 = (values.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
    let ks_distance = ks_distance_to_normal(&values, 0.0, sigma0);
    Ok(ElementStatistics { n, mean, variance, excess_kurtosis, ks_distance, values })
}

/// KS distance between the empirical distribution of `values` and
/// `N(mu, sigma²)`.
pub fn ks_distance_to_normal(values: &[f64], mu: f64, sigma: f64) -> f64 {
    if values.is_empty() || !(sigma > 0.0) {
        return 1.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = normal_cdf((x - mu) / sigma);
        worst = worst.max((f - k as f64 / n).abs());
        worst = worst.max(((k + 1) as f64 / n - f).abs());
    }
    worst
}

/// Standard normal CDF via `erfc` (Abramowitz-Stegun 7.1.26 rational fit,
/// absolute error < 1.5e-7 — far below the KS resolution of these samples).
fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc_as(-z / std::f64::consts::SQRT_2)
}

fn erfc_as(x: f64) -> f64 {
    let ax = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * ax);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let e = poly * (-ax * ax).exp();
    if x >= 0.0 { e } else { 2.0 - e }
}

/// Statistics of the diagonal elements `M_αα` over eigenvalues with
/// `|Ω_α| < omega_cutoff`, skipping defective eigenvectors.
pub fn diagonal_statistics(
    d: &SpectralDecomposition,
    elements: &CMatrix,
    omega_cutoff: f64,
) -> Result<ElementStatistics> {
    let values: Vec<f64> = (0..d.dim())
        .filter(|&a| !d.is_defective(a) && d.eigenvalues[a].im.abs() < omega_cutoff)
        .map(|a| elements.get(a, a).re)
        .collect();
    summarize(values)
}

/// Statistics of the off-diagonal elements `M_αβ` (`α ≠ β`) whose frequency
/// separation satisfies `| |Ω_α - Ω_β| - omega_center | ≤ half_width`,
/// skipping defective eigenvectors.
pub fn offdiagonal_statistics(
    d: &SpectralDecomposition,
    elements: &CMatrix,
    omega_center: f64,
    half_width: f64,
) -> Result<ElementStatistics> {
    offdiagonal_statistics_windowed(d, elements, omega_center, half_width, None)
}

/// Like [`offdiagonal_statistics`], additionally restricting pairs to a
/// common Liouvillian stripe: `|Γ_α - Γ_β| ≤ gamma_half_width`. Pooling
/// pairs across the whole decay-rate range mixes stripes with different
/// local variances, which inflates the kurtosis of the pooled sample even
/// when each stripe is Gaussian.
pub fn offdiagonal_statistics_windowed(
    d: &SpectralDecomposition,
    elements: &CMatrix,
    omega_center: f64,
    half_width: f64,
    gamma_half_width: Option<f64>,
) -> Result<ElementStatistics> {
    let n = d.dim();
    let ghalf = gamma_half_width.unwrap_or(f64::INFINITY);
    let mut values = Vec::new();
    for b in 0..n {
        if d.is_defective(b) {
            continue;
        }
        for a in 0..n {
            if a == b || d.is_defective(a) {
                continue;
            }
            let omega = (d.eigenvalues[a].im - d.eigenvalues[b].im).abs();
            if (omega - omega_center).abs() <= half_width
                && (d.eigenvalues[a].re - d.eigenvalues[b].re).abs() <= ghalf
            {
                values.push(elements.get(a, b).re);
            }
        }
    }
    summarize(values)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: xs.len().min(ys.len()) });
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::NonFiniteData);
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateBox);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{EnsembleSeed, sample_gue};
    use crate::matrix::pauli_x;
    use crate::spectral::eig_nonhermitian;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn superoperator_forms_act_correctly() {
        // compare against the operator-form actions [O,ρ] and OρO†
        let dim = 3;
        let op = crate::ensembles::sample_ginibre(dim, dim, EnsembleSeed::new(41, 0));
        let rho = crate::ensembles::sample_ginibre(dim, dim, EnsembleSeed::new(41, 1));
        let v = rho.vectorize();
        let apply = |m: &CMatrix| -> Vec<C64> {
            (0..dim * dim)
                .map(|i| (0..dim * dim).map(|j| m.get(i, j) * v[j]).sum())
                .collect()
        };
        let coh = build_superoperator(&op, SuperOperatorForm::Coherent).unwrap();
        let want = op.commutator(&rho).vectorize();
        for (a, b) in apply(&coh).iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        let meas = build_superoperator(&op, SuperOperatorForm::Measurement).unwrap();
        let want = (&(&op * &rho) * &op.dagger()).vectorize();
        for (a, b) in apply(&meas).iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn label_builder_matches_full_projection() {
        let dim = 4;
        let op = crate::ensembles::sample_ginibre(dim, dim, EnsembleSeed::new(42, 0));
        // an arbitrary sub-basis
        let labels: Vec<(usize, usize)> = vec![(0, 0), (1, 2), (3, 1), (2, 2), (0, 3)];
        for form in [SuperOperatorForm::Coherent, SuperOperatorForm::Measurement] {
            let full = build_superoperator(&op, form).unwrap();
            let small = build_superoperator_on_labels(&op, form, &labels).unwrap();
            for (r, &(i, j)) in labels.iter().enumerate() {
                for (col, &(k, l)) in labels.iter().enumerate() {
                    let want = full.get(i * dim + j, k * dim + l);
                    assert!((small.get(r, col) - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn hermitian_baseline_diagonal_variance() {
        // GUE eigenvector thermalization: var of ⟨E_α|O|E_α⟩ scales as 1/D
        let dim = 128;
        let h = sample_gue(dim, EnsembleSeed::new(43, 0));
        let d = eig_nonhermitian(&h).unwrap();
        let op = pauli_x().kron(&CMatrix::identity(dim / 2));
        let m = matrix_elements(&d, &op, ElementConvention::RightRight).unwrap();
        let stats = diagonal_statistics(&d, &m, f64::INFINITY).unwrap();
        assert_eq!(stats.n, dim);
        let expect = 1.0 / dim as f64;
        assert!(
            stats.variance > expect / 3.0 && stats.variance < expect * 3.0,
            "variance {} vs 1/D {}",
            stats.variance,
            expect
        );
        // off-diagonal elements near Gaussian
        let off = offdiagonal_statistics(&d, &m, 0.0, f64::INFINITY).unwrap();
        assert!(off.mean.abs() < 0.05, "mean {}", off.mean);
        assert!(off.excess_kurtosis.abs() < 0.5, "kurt {}", off.excess_kurtosis);
        assert!(off.ks_distance < 0.05, "ks {}", off.ks_distance);
    }

    #[test]
    fn gaussian_samples_pass_ks() {
        let mut rng = EnsembleSeed::new(44, 0).rng();
        let values: Vec<f64> = (0..20_000)
            .map(|_| {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                2.5 * g
            })
            .collect();
        let stats = summarize(values).unwrap();
        assert!(stats.ks_distance < 0.02, "ks {}", stats.ks_distance);
        assert!(stats.excess_kurtosis.abs() < 0.2);
        // a uniform sample is far from the fitted normal
        let uni: Vec<f64> = (0..20_000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let stats = summarize(uni).unwrap();
        assert!(stats.ks_distance > 0.05, "ks {}", stats.ks_distance);
        assert!(stats.excess_kurtosis < -0.5);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.0) - 0.841344746).abs() < 1e-6);
        assert!((normal_cdf(-1.96) - 0.024997895).abs() < 1e-6);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 / x).collect();
        let s = log_log_slope(&xs, &ys).unwrap();
        assert!((s + 1.0).abs() < 1e-12);
    }

    #[test]
    fn defective_indices_are_skipped() {
        // Jordan block: defective eigenvectors must not enter the statistics
        let mut m = CMatrix::zeros(6, 6);
        for k in 0..5 {
            m.set(k, k + 1, c(1.0, 0.0));
        }
        for k in 0..6 {
            m.set(k, k, c(k as f64 % 2.0, 0.0));
        }
        let d = eig_nonhermitian(&m).unwrap();
        let op = CMatrix::identity(6);
        let elems = matrix_elements(&d, &op, ElementConvention::RightRight).unwrap();
        if !d.defective.is_empty() {
            let stats = diagonal_statistics(&d, &elems, f64::INFINITY);
            if let Ok(s) = stats {
                assert!(s.n <= 6 - d.defective.len());
            }
        }
    }
}
