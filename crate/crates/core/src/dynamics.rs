//! Spectral decomposition of observable dynamics, stripe-restricted dynamics,
//! and direct integration of the master equation.
//!
//! With biorthonormal eigenpairs `{λ_α, η_α, σ_α}` of the Liouvillian and an
//! initial state `ρ(0)`, any observable evolves as
//!
//! ```text
//! ⟨Ô⟩(t) = Σ_α e^{λ_α t} c^η_α c^σ_α ,   c^η_α = Tr[Ô η_α],  c^σ_α = ⟨σ_α|ρ(0)⟩.
//! ```
//!
//! Restricting the sum to one decay-rate stripe and gauging out `Γ` gives the
//! stripe-resolved signal `f_s(t) = Σ_{α∈s} c_α e^{iΩ_α t} / Σ_{α∈s} |c_α|`,
//! which dephases for chaotic spectra and revives for integrable ones.

use crate::error::{Error, Result};
use crate::lindblad::Lindbladian;
use crate::matrix::{C64, CMatrix, vec_inner};
use crate::spectral::SpectralDecomposition;

/// Largest Hilbert dimension accepted by the direct integrators.
pub const MAX_ODE_DIM: usize = 64;

/// Stripe weight sums below this are considered vanishing and make the
/// renormalized stripe dynamics undefined.
pub const WEIGHT_CUTOFF: f64 = 1e-30;

/// Check Hermiticity, unit trace, and positive semidefiniteness (up to
/// `-1e-10` on the spectrum) of a density matrix.
pub fn validate_density_matrix(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidDensityMatrix("not square".into()));
    }
    if !rho.is_hermitian(1e-10) {
        return Err(Error::InvalidDensityMatrix("not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
    }
    let eigs = crate::spectral::eigenvalues(rho)?;
    if let Some(bad) = eigs.iter().find(|z| z.re < -1e-10) {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {bad}")));
    }
    Ok(())
}

/// Per-eigenmode weights of one observable/initial-state pair.
#[derive(Clone, Debug)]
pub struct SpectralWeights {
    pub eigenvalues: Vec<C64>,
    /// `c^η_α = Tr[Ô η_α]`.
    pub observable_weights: Vec<C64>,
    /// `c^σ_α = ⟨σ_α|ρ(0)⟩`.
    pub initial_weights: Vec<C64>,
    /// `c_α = c^η_α c^σ_α`, the coefficient of `e^{λ_α t}`.
    pub products: Vec<C64>,
}

/// Weights of the spectral sum.
///
/// `obs_trace_vec` is the observable prepared with [`transpose_on_labels`]
/// (so that `Tr[Ô η] = Σ_s obs_trace_vec[s] · η[s]`); `rho0_vec` is the
/// initial state as a plain coefficient vector over the decomposition's
/// super-basis.
pub fn spectral_weights(
    d: &SpectralDecomposition,
    obs_trace_vec: &[C64],
    rho0_vec: &[C64],
) -> Result<SpectralWeights> {
    let n = d.dim();
    if obs_trace_vec.len() != n || rho0_vec.len() != n {
        return Err(Error::DimensionMismatch {
            left: format!("decomposition dim {n}"),
            right: format!("vectors {} and {}", obs_trace_vec.len(), rho0_vec.len()),
        });
    }
    let mut observable_weights = Vec::with_capacity(n);
    let mut initial_weights = Vec::with_capacity(n);
    let mut products = Vec::with_capacity(n);
    for a in 0..n {
        // Defective pairs have no usable biorthogonal partner; they are
        // excluded from the expansion (zero weight) so the caller can report
        // the dropped mass via the defective flags.
        if d.is_defective(a) {
            observable_weights.push(C64::new(0.0, 0.0));
            initial_weights.push(C64::new(0.0, 0.0));
            products.push(C64::new(0.0, 0.0));
            continue;
        }
        let eta = d.right_vector(a);
        let sigma = d.left_vector(a);
        let c_eta: C64 = obs_trace_vec.iter().zip(&eta).map(|(o, e)| o * e).sum();
        let c_sigma = vec_inner(&sigma, rho0_vec);
        observable_weights.push(c_eta);
        initial_weights.push(c_sigma);
        products.push(c_eta * c_sigma);
    }
    Ok(SpectralWeights {
        eigenvalues: d.eigenvalues.clone(),
        observable_weights,
        initial_weights,
        products,
    })
}

/// Contraction vector for `Tr[Ô η]` over a label basis: the trace pairs
/// `Ô_(j,i)` with `η_(i,j)`, so entry `s = (i, j)` receives `Ô_(j, i)`.
pub fn transpose_on_labels(obs: &CMatrix, labels: &[(usize, usize)]) -> Vec<C64> {
    labels.iter().map(|&(i, j)| obs.get(j, i)).collect()
}

/// Evaluate the spectral sum at the given times.
pub fn expectation_series(w: &SpectralWeights, times: &[f64]) -> Vec<C64> {
    times
        .iter()
        .map(|&t| {
            w.eigenvalues
                .iter()
                .zip(&w.products)
                .map(|(lam, c)| c * (lam * t).exp())
                .sum()
        })
        .collect()
}

/// Decay-rate stripe membership of each eigenvalue under the same tiling as
/// [`crate::stripes::partition_stripes`]: index `α` is in `members[k]` when
/// `Γ_α` falls in the `k`-th box of width `d`.
pub fn stripe_members(eigenvalues: &[C64], d: f64) -> Result<Vec<Vec<usize>>> {
    if eigenvalues.len() < 1 {
        return Err(Error::EmptySpectra);
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("stripe width must be positive, got {d}")));
    }
    let g_min = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let g_max = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let width = g_max - g_min;
    let n_boxes = if width == 0.0 { 1 } else { ((width / d).ceil() as usize).max(1) };
    let mut members = vec![Vec::new(); n_boxes];
    for (a, z) in eigenvalues.iter().enumerate() {
        let k = if width == 0.0 {
            0
        } else {
            (((z.re - g_min) / d) as usize).min(n_boxes - 1)
        };
        members[k].push(a);
    }
    Ok(members)
}

/// Total weight `Σ_{α∈s} |c_α|` of each stripe.
pub fn stripe_weight_sums(w: &SpectralWeights, members: &[Vec<usize>]) -> Vec<f64> {
    members
        .iter()
        .map(|m| m.iter().map(|&a| w.products[a].norm()).sum())
        .collect()
}

/// Gauge-invariant dynamics of one stripe:
/// `f_s(t) = Σ_{α∈s} c_α e^{iΩ_α t} / Σ_{α∈s} |c_α|`.
pub fn stripe_dynamics(
    w: &SpectralWeights,
    members: &[usize],
    times: &[f64],
) -> Result<Vec<C64>> {
    let norm: f64 = members.iter().map(|&a| w.products[a].norm()).sum();
    if norm <= WEIGHT_CUTOFF {
        return Err(Error::VanishingWeight);
    }
    Ok(times
        .iter()
        .map(|&t| {
            let s: C64 = members
                .iter()
                .map(|&a| w.products[a] * C64::new(0.0, w.eigenvalues[a].im * t).exp())
                .sum();
            s / norm
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Direct integrators (oracles for the spectral sum)
// ---------------------------------------------------------------------------

/// Integrate the master equation with an adaptive Dormand-Prince 5(4) pair,
/// returning the state at each requested time. `times` must be nondecreasing
/// and start at ≥ 0.
pub fn lindblad_ode(
    lind: &Lindbladian,
    rho0: &CMatrix,
    times: &[f64],
    tol: f64,
) -> Result<Vec<CMatrix>> {
    if lind.dim() > MAX_ODE_DIM {
        return Err(Error::InvalidParameter(format!(
            "direct integration capped at dimension {MAX_ODE_DIM}, got {}",
            lind.dim()
        )));
    }
    validate_density_matrix(rho0)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("times must be nondecreasing and >= 0".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }

    // Dormand-Prince 5(4) tableau
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut y = rho0.clone();
    let mut h: f64 = 1e-3;
    let mut k0 = lind.apply(&y);

    for &target in times {
        if target == 0.0 {
            out.push(y.clone());
            continue;
        }
        while t < target {
            let step = h.min(target - t);
            let mut ks: Vec<CMatrix> = Vec::with_capacity(7);
            ks.push(k0.clone());
            for stage in 0..6 {
                let mut arg = y.clone();
                for (j, kj) in ks.iter().enumerate() {
                    let a = A[stage][j];
                    if a != 0.0 {
                        arg = &arg + &kj.scale(C64::new(step * a, 0.0));
                    }
                }
                ks.push(lind.apply(&arg));
            }
            let mut y5 = y.clone();
            let mut err = CMatrix::zeros(y.nrows(), y.ncols());
            for (j, kj) in ks.iter().enumerate() {
                if B5[j] != 0.0 {
                    y5 = &y5 + &kj.scale(C64::new(step * B5[j], 0.0));
                }
                let db = B5[j] - B4[j];
                if db != 0.0 {
                    err = &err + &kj.scale(C64::new(step * db, 0.0));
                }
            }
            let scale = tol * (1.0 + y.frobenius_norm());
            let e = err.frobenius_norm() / scale;
            if e <= 1.0 {
                t += step;
                y = y5;
                // first-same-as-last property of the pair
                k0 = ks[6].clone();
            }
            let factor = if e > 0.0 { 0.9 * e.powf(-0.2) } else { 5.0 };
            h = (step * factor.clamp(0.2, 5.0)).max(1e-12);
            if h < 1e-11 && e > 1.0 {
                return Err(Error::OdeFailure(format!("step size underflow at t = {t}")));
            }
        }
        let drift = (y.trace() - rho0.trace()).norm();
        if drift > 1e-8 {
            return Err(Error::OdeFailure(format!("trace drift {drift} at t = {t}")));
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Dense matrix exponential `exp(m)` by scaling and squaring with a Taylor
/// series on the scaled matrix.
pub fn matrix_exponential(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let n = m.nrows();
    let norm = m.max_abs() * n as f64;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(C64::new(0.5f64.powi(s as i32), 0.0));
    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=40 {
        term = &term * &scaled;
        term = term.scale(C64::new(1.0 / k as f64, 0.0));
        result = &result + &term;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    Ok(result)
}

/// `⟨Ô⟩(t) = Tr[Ô ρ(t)]` with `ρ(t)` from the matrix exponential of the
/// vectorized Liouvillian; a second, independent oracle for the spectral sum.
pub fn expectation_via_expm(
    lind: &Lindbladian,
    obs: &CMatrix,
    rho0: &CMatrix,
    times: &[f64],
) -> Result<Vec<C64>> {
    validate_density_matrix(rho0)?;
    let sup = lind.vectorize();
    let v0 = rho0.vectorize();
    let d = lind.dim();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let u = matrix_exponential(&sup.matrix.scale(C64::new(t, 0.0)))?;
        let vt: Vec<C64> = (0..d * d)
            .map(|i| (0..d * d).map(|j| u.get(i, j) * v0[j]).sum())
            .collect();
        let rho_t = CMatrix::unvectorize(d, &vt);
        out.push((obs * &rho_t).trace());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Observables and initial states used throughout
// ---------------------------------------------------------------------------

/// Boundary spin current `i (σ⁺_1 σ⁻_N - σ⁺_N σ⁻_1)` of an `n`-site chain.
pub fn boundary_current(n: usize) -> CMatrix {
    use crate::lindblad::site_operator;
    use crate::matrix::{sigma_minus, sigma_plus};
    let a = &site_operator(n, 1, &sigma_plus()) * &site_operator(n, n, &sigma_minus());
    let b = &site_operator(n, n, &sigma_plus()) * &site_operator(n, 1, &sigma_minus());
    (&a - &b).scale(C64::new(0.0, 1.0))
}

/// `σ^z` on one site (1-based) of an `n`-site chain.
pub fn site_sz(n: usize, site: usize) -> CMatrix {
    crate::lindblad::site_operator(n, site, &crate::matrix::pauli_z())
}

/// Product state `|↑…↑⟩⟨↑…↑|` of `n` spins.
pub fn all_up_state(n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut rho = CMatrix::zeros(dim, dim);
    rho.set(0, 0, C64::new(1.0, 0.0));
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{EnsembleSeed, sample_ginibre};
    use crate::lindblad::{Jump, Lindbladian};
    use crate::matrix::{pauli_z, sigma_minus};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn damped_qubit(gamma: f64) -> Lindbladian {
        Lindbladian::new(
            CMatrix::zeros(2, 2),
            vec![Jump { operator: sigma_minus(), rate: gamma }],
        )
        .unwrap()
    }

    #[test]
    fn density_matrix_validation() {
        assert!(validate_density_matrix(&all_up_state(2)).is_ok());
        let mut bad = all_up_state(2);
        bad.set(0, 0, c(2.0, 0.0));
        assert!(validate_density_matrix(&bad).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg.set(0, 0, c(1.5, 0.0));
        neg.set(1, 1, c(-0.5, 0.0));
        assert!(validate_density_matrix(&neg).is_err());
    }

    #[test]
    fn damped_qubit_analytic_solution() {
        // ⟨σz⟩(t) = 2 e^{-γt} - 1 starting from |↑⟩⟨↑|
        let gamma = 0.8;
        let lind = damped_qubit(gamma);
        let rho0 = all_up_state(1);
        let sz = pauli_z();
        let times: Vec<f64> = (0..21).map(|k| 0.25 * k as f64).collect();

        let sup = lind.vectorize();
        let d = sup.decompose().unwrap();
        let w = spectral_weights(
            &d,
            &transpose_on_labels(&sz, &sup.labels),
            &rho0.vectorize(),
        )
        .unwrap();
        let series = expectation_series(&w, &times);
        for (&t, z) in times.iter().zip(&series) {
            let want = 2.0 * (-gamma * t).exp() - 1.0;
            assert!((z - c(want, 0.0)).norm() < 1e-10, "t={t}: {z} vs {want}");
        }

        let states = lindblad_ode(&lind, &rho0, &times, 1e-10).unwrap();
        for (state, &t) in states.iter().zip(&times) {
            let got = (&sz * state).trace().re;
            let want = 2.0 * (-gamma * t).exp() - 1.0;
            assert!((got - want).abs() < 1e-8, "t={t}");
        }
    }

    fn random_lindbladian(dim: usize, seed: u64) -> Lindbladian {
        let a = sample_ginibre(dim, dim, EnsembleSeed::new(seed, 0));
        let h = (&a + &a.dagger()).scale(c(0.5, 0.0));
        let l1 = sample_ginibre(dim, dim, EnsembleSeed::new(seed, 1));
        let l2 = sample_ginibre(dim, dim, EnsembleSeed::new(seed, 2));
        Lindbladian::new(
            h,
            vec![Jump { operator: l1, rate: 0.4 }, Jump { operator: l2, rate: 0.9 }],
        )
        .unwrap()
    }

    #[test]
    fn spectral_sum_matches_integrators() {
        let lind = random_lindbladian(4, 51);
        let obs = {
            let g = sample_ginibre(4, 4, EnsembleSeed::new(52, 0));
            &g + &g.dagger()
        };
        let rho0 = {
            // normalized projector mixture
            let g = sample_ginibre(4, 4, EnsembleSeed::new(52, 1));
            let p = &g * &g.dagger();
            let tr = p.trace();
            p.scale(c(1.0, 0.0) / tr)
        };
        let times: Vec<f64> = (0..11).map(|k| 0.3 * k as f64).collect();

        let sup = lind.vectorize();
        let d = sup.decompose().unwrap();
        let w =
            spectral_weights(&d, &transpose_on_labels(&obs, &sup.labels), &rho0.vectorize())
                .unwrap();
        let series = expectation_series(&w, &times);

        let states = lindblad_ode(&lind, &rho0, &times, 1e-11).unwrap();
        let via_expm = expectation_via_expm(&lind, &obs, &rho0, &times).unwrap();
        for k in 0..times.len() {
            let ode_val = (&obs * &states[k]).trace();
            assert!((series[k] - ode_val).norm() < 1e-7, "t={} spectral vs ode", times[k]);
            assert!((via_expm[k] - ode_val).norm() < 1e-7, "t={} expm vs ode", times[k]);
            assert!(series[k].im.abs() < 1e-8); // Hermitian observable
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let mut m = CMatrix::zeros(3, 3);
        m.set(0, 0, c(0.3, 0.0));
        m.set(1, 1, c(-1.0, 2.0));
        m.set(2, 2, c(4.0, -0.5));
        let e = matrix_exponential(&m).unwrap();
        for k in 0..3 {
            let want = m.get(k, k).exp();
            assert!((e.get(k, k) - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn stripe_machinery() {
        let lind = random_lindbladian(4, 53);
        let sup = lind.vectorize();
        let d = sup.decompose().unwrap();
        let rho0 = all_up_state(2);
        let obs = site_sz(2, 1);
        let w =
            spectral_weights(&d, &transpose_on_labels(&obs, &sup.labels), &rho0.vectorize())
                .unwrap();
        let members = stripe_members(&d.eigenvalues, 0.7).unwrap();
        let total: usize = members.iter().map(Vec::len).sum();
        assert_eq!(total, d.dim());
        let sums = stripe_weight_sums(&w, &members);
        assert_eq!(sums.len(), members.len());
        // the renormalized stripe signal starts inside the unit disk
        for m in members.iter().filter(|m| !m.is_empty()) {
            match stripe_dynamics(&w, m, &[0.0, 1.0, 5.0]) {
                Ok(f) => assert!(f[0].norm() <= 1.0 + 1e-12),
                Err(Error::VanishingWeight) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn current_operator_is_hermitian() {
        for n in [2usize, 4] {
            let j = boundary_current(n);
            assert!(j.is_hermitian(1e-14));
            assert!(j.trace().norm() < 1e-14);
        }
    }
}
