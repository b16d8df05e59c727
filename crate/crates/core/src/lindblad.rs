//! Lindblad generators: operator form, vectorized superoperator form, the two
//! physical model families, and magnetization symmetry sectors.
//!
//! The generator is
//!
//! ```text
//! dρ/dt = 𝓛ρ = -i[H, ρ] + Σ_j γ_j (L_j ρ L_j† - ½{L_j†L_j, ρ})
//! ```
//!
//! and its row-major vectorization is
//!
//! ```text
//! 𝓛 = -i(H⊗𝟙 - 𝟙⊗Hᵀ) + Σ_j γ_j (L_j⊗L_j* - ½ L_j†L_j⊗𝟙 - ½ 𝟙⊗(L_j†L_j)ᵀ)
//! ```

use crate::ensembles::{EnsembleSeed, sample_ginibre_with, sample_gue_with};
use crate::error::{Error, Result};
use crate::matrix::{C64, CMatrix, pauli_x, pauli_y, pauli_z, sigma_minus, sigma_plus};
use crate::spectral::{self, SpectralDecomposition};

const HERMITICITY_TOL: f64 = 1e-12;

/// One dissipation channel: jump operator plus rate.
#[derive(Clone, Debug)]
pub struct Jump {
    pub operator: CMatrix,
    pub rate: f64,
}

/// Hamiltonian plus weighted jump operators on a `dim`-dimensional Hilbert
/// space.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    dim: usize,
    pub hamiltonian: CMatrix,
    pub jumps: Vec<Jump>,
}

impl Lindbladian {
    pub fn new(hamiltonian: CMatrix, jumps: Vec<Jump>) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(Error::NotSquare {
                rows: hamiltonian.nrows(),
                cols: hamiltonian.cols_for_err(),
            });
        }
        let dim = hamiltonian.nrows();
        let dev = (&hamiltonian - &hamiltonian.dagger()).frobenius_norm();
        if dev > HERMITICITY_TOL * hamiltonian.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian {
                deviation: dev / hamiltonian.frobenius_norm().max(1.0),
            });
        }
        for j in &jumps {
            if j.rate < 0.0 {
                return Err(Error::NegativeRate(j.rate));
            }
            if j.operator.nrows() != dim || j.operator.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    left: format!("H is {dim}x{dim}"),
                    right: format!("jump is {}x{}", j.operator.nrows(), j.operator.ncols()),
                });
            }
        }
        Ok(Self { dim, hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Operator-form right-hand side of the master equation.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mi = C64::new(0.0, -1.0);
        let mut out = self.hamiltonian.commutator(rho).scale(mi);
        for j in &self.jumps {
            let l = &j.operator;
            let ld = l.dagger();
            let sandwich = &(l * rho) * &ld;
            let m = &ld * l;
            let anti = m.anticommutator(rho);
            out = &out + &(&sandwich - &anti.scale(C64::new(0.5, 0.0))).scale(C64::new(j.rate, 0.0));
        }
        out
    }

    /// Dense vectorized Liouvillian of dimension `dim² x dim²`.
    pub fn vectorize(&self) -> SuperMatrix {
        let d = self.dim;
        let id = CMatrix::identity(d);
        let mi = C64::new(0.0, -1.0);
        let h = &self.hamiltonian;
        let mut m = (&h.kron(&id) - &id.kron(&h.transpose())).scale(mi);
        for j in &self.jumps {
            let l = &j.operator;
            let ll = &l.dagger() * l;
            let g = C64::new(j.rate, 0.0);
            let half = C64::new(0.5 * j.rate, 0.0);
            m = &m + &l.kron(&l.conj()).scale(g);
            m = &m - &ll.kron(&id).scale(half);
            m = &m - &id.kron(&ll.transpose()).scale(half);
        }
        SuperMatrix { matrix: m, labels: full_labels(d), hilbert_dim: d }
    }
}

// small helper so the NotSquare error above can be built without borrow fuss
impl CMatrix {
    fn cols_for_err(&self) -> usize {
        self.ncols()
    }
}

fn full_labels(d: usize) -> Vec<(usize, usize)> {
    (0..d * d).map(|s| (s / d, s % d)).collect()
}

/// A superoperator as a dense matrix over a labelled super-basis.
///
/// `labels[s] = (bra, ket)` identifies super-basis element `|bra⟩⟨ket|`;
/// for the full space `s = bra * D + ket` (row-major vectorization).
#[derive(Clone, Debug)]
pub struct SuperMatrix {
    pub matrix: CMatrix,
    pub labels: Vec<(usize, usize)>,
    pub hilbert_dim: usize,
}

impl SuperMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖vec(𝟙)† 𝓛‖ / ‖𝓛‖`: zero for any trace-preserving generator whose
    /// super-basis contains the identity's support.
    pub fn trace_preservation_residual(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for col in 0..n {
            let mut sum = C64::new(0.0, 0.0);
            for (s, &(i, j)) in self.labels.iter().enumerate() {
                if i == j {
                    sum += self.matrix.get(s, col);
                }
            }
            acc += sum.norm_sqr();
        }
        acc.sqrt() / self.matrix.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    /// Full eigendecomposition, via the real representation when available.
    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        spectral::eig_hermiticity_preserving(&self.matrix, &self.labels)
    }

    /// Eigenvalues only.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        spectral::eigenvalues_hermiticity_preserving(&self.matrix, &self.labels)
    }

    /// Project a full-space vectorized operator onto this super-basis.
    pub fn project_full_vector(&self, full: &CMatrix) -> Vec<C64> {
        let d = self.hilbert_dim;
        assert_eq!(full.nrows(), d);
        assert_eq!(full.ncols(), d);
        self.labels.iter().map(|&(i, j)| full.get(i, j)).collect()
    }
}

// ---------------------------------------------------------------------------
// Operator bases
// ---------------------------------------------------------------------------

/// Hilbert-Schmidt-orthonormal Hermitian basis `{G_k}` with `G_0 = 𝟙/√D`
/// and `Tr G_k = 0` for `k ≥ 1` (generalized Gell-Mann matrices).
pub fn gell_mann_basis(dim: usize) -> Vec<CMatrix> {
    assert!(dim >= 2);
    let mut basis = Vec::with_capacity(dim * dim);
    let norm = 1.0 / (dim as f64).sqrt();
    basis.push(CMatrix::identity(dim).scale(C64::new(norm, 0.0)));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 1..dim {
        for i in 0..j {
            let mut x = CMatrix::zeros(dim, dim);
            x.set(i, j, C64::new(s, 0.0));
            x.set(j, i, C64::new(s, 0.0));
            basis.push(x);
            let mut y = CMatrix::zeros(dim, dim);
            y.set(i, j, C64::new(0.0, -s));
            y.set(j, i, C64::new(0.0, s));
            basis.push(y);
        }
        // diagonal generator: (Σ_{k<j} E_kk - j E_jj) / √(j(j+1))
        let nj = 1.0 / ((j * (j + 1)) as f64).sqrt();
        let mut z = CMatrix::zeros(dim, dim);
        for k in 0..j {
            z.set(k, k, C64::new(nj, 0.0));
        }
        z.set(j, j, C64::new(-(j as f64) * nj, 0.0));
        basis.push(z);
    }
    basis
}

// ---------------------------------------------------------------------------
// Model builders
// ---------------------------------------------------------------------------

/// Random Liouvillian: GUE Hamiltonian with unit entry variance (spectral
/// radius `2√D`, so coherent frequencies grow with `D` and fixed-frequency
/// windows like `|Ω| < 10` stay meaningful across sizes) plus `r` traceless
/// random jump operators `L_j = g Σ_{k≥1} G_k w_{k,j}` with `w` Ginibre and
/// `g = g_eff / (2 r β D)^{1/4}`.
pub fn random_liouvillian(
    dim: usize,
    n_jumps: usize,
    beta: f64,
    g_eff: f64,
    seed: EnsembleSeed,
) -> Result<Lindbladian> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "Hilbert dimension must be even and >= 2, got {dim}"
        )));
    }
    if n_jumps < 1 {
        return Err(Error::InvalidParameter("need at least one jump".into()));
    }
    if !(g_eff > 0.0) || !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need g_eff > 0 and beta > 0, got {g_eff}, {beta}"
        )));
    }
    let mut rng = seed.rng();
    let h = sample_gue_with(dim, &mut rng).scale(C64::new((dim as f64).sqrt(), 0.0));
    let w = sample_ginibre_with(dim * dim - 1, n_jumps, &mut rng);
    let g = g_eff / (2.0 * n_jumps as f64 * beta * dim as f64).powf(0.25);
    let basis = gell_mann_basis(dim);
    let mut jumps = Vec::with_capacity(n_jumps);
    for j in 0..n_jumps {
        let mut l = CMatrix::zeros(dim, dim);
        for k in 1..dim * dim {
            let coeff = w.get(k - 1, j) * g;
            let gk = &basis[k];
            for c in 0..dim {
                for r in 0..dim {
                    let v = gk.get(r, c);
                    if v != C64::new(0.0, 0.0) {
                        let cur = l.get(r, c);
                        l.set(r, c, cur + coeff * v);
                    }
                }
            }
        }
        jumps.push(Jump { operator: l, rate: 1.0 });
    }
    Lindbladian::new(h, jumps)
}

/// Parameters of the boundary-driven XXZ chain with one magnetic impurity
/// and dephasing on every site.
#[derive(Clone, Copy, Debug)]
pub struct XxzChainParams {
    pub n_sites: usize,
    pub coupling: f64,
    pub anisotropy: f64,
    pub impurity_field: f64,
    pub gamma_1_plus: f64,
    pub gamma_1_minus: f64,
    pub gamma_n_plus: f64,
    pub gamma_n_minus: f64,
    pub gamma_dephasing: f64,
}

/// Operator acting as `op` on `site` (1-based) of an `n`-qubit chain.
pub fn site_operator(n: usize, site: usize, op: &CMatrix) -> CMatrix {
    assert!((1..=n).contains(&site));
    let left = 1usize << (site - 1);
    let right = 1usize << (n - site);
    CMatrix::identity(left)
        .kron(op)
        .kron(&CMatrix::identity(right))
}

/// Driven-dissipative XXZ chain.
///
/// `H = J Σ_j (σx_j σx_{j+1} + σy_j σy_{j+1} + Δ σz_j σz_{j+1}) + h σz_imp`
/// with the impurity on site `⌈N/2⌉`, raising/lowering jumps on the two
/// boundary sites and `σz` dephasing everywhere.
pub fn xxz_impurity_chain(p: XxzChainParams) -> Result<Lindbladian> {
    let n = p.n_sites;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 sites, got {n}")));
    }
    for rate in [
        p.gamma_1_plus,
        p.gamma_1_minus,
        p.gamma_n_plus,
        p.gamma_n_minus,
        p.gamma_dephasing,
    ] {
        if rate < 0.0 {
            return Err(Error::NegativeRate(rate));
        }
    }
    let dim = 1usize << n;
    let mut h = CMatrix::zeros(dim, dim);
    let jc = C64::new(p.coupling, 0.0);
    let dc = C64::new(p.coupling * p.anisotropy, 0.0);
    for site in 1..n {
        let xx = &site_operator(n, site, &pauli_x()) * &site_operator(n, site + 1, &pauli_x());
        let yy = &site_operator(n, site, &pauli_y()) * &site_operator(n, site + 1, &pauli_y());
        let zz = &site_operator(n, site, &pauli_z()) * &site_operator(n, site + 1, &pauli_z());
        h = &h + &(&xx + &yy).scale(jc);
        h = &h + &zz.scale(dc);
    }
    let impurity_site = n.div_ceil(2);
    h = &h + &site_operator(n, impurity_site, &pauli_z()).scale(C64::new(p.impurity_field, 0.0));

    let mut jumps = vec![
        Jump { operator: site_operator(n, 1, &sigma_plus()), rate: p.gamma_1_plus },
        Jump { operator: site_operator(n, 1, &sigma_minus()), rate: p.gamma_1_minus },
        Jump { operator: site_operator(n, n, &sigma_plus()), rate: p.gamma_n_plus },
        Jump { operator: site_operator(n, n, &sigma_minus()), rate: p.gamma_n_minus },
    ];
    for site in 1..=n {
        jumps.push(Jump {
            operator: site_operator(n, site, &pauli_z()),
            rate: p.gamma_dephasing,
        });
    }
    Lindbladian::new(h, jumps)
}

// ---------------------------------------------------------------------------
// Super-magnetization sectors
// ---------------------------------------------------------------------------

/// A super-magnetization eigenspace of an `N`-qubit super-basis.
#[derive(Clone, Debug)]
pub struct SectorMap {
    pub charge: i64,
    /// Super-basis indices of the full space kept in this sector,
    /// lexicographic over (bra, ket).
    pub kept_indices: Vec<usize>,
    pub dimension: usize,
    pub hilbert_dim: usize,
}

/// Magnetization `⟨Sz⟩` of computational-basis state `b` (spin up = bit 0).
fn magnetization(n_sites: usize, b: usize) -> i64 {
    n_sites as i64 - 2 * (b.count_ones() as i64)
}

fn sector_labels(n_sites: usize, charge: i64) -> (Vec<usize>, Vec<(usize, usize)>) {
    let dim = 1usize << n_sites;
    let ms: Vec<i64> = (0..dim).map(|b| magnetization(n_sites, b)).collect();
    let mut kept = Vec::new();
    let mut labels = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            if ms[i] - ms[j] == charge {
                kept.push(i * dim + j);
                labels.push((i, j));
            }
        }
    }
    (kept, labels)
}

/// Restrict a full `4^N`-dimensional superoperator to one super-magnetization
/// sector, verifying block-diagonality (cross-block entries ≤ 1e-10 of the
/// matrix scale).
pub fn supermagnetization_sector(
    sup: &SuperMatrix,
    n_sites: usize,
    charge: i64,
) -> Result<(SuperMatrix, SectorMap)> {
    let dim = 1usize << n_sites;
    if sup.hilbert_dim != dim {
        return Err(Error::DimensionMismatch {
            left: format!("superoperator over dim {}", sup.hilbert_dim),
            right: format!("{n_sites}-site chain (dim {dim})"),
        });
    }
    let (kept, labels) = sector_labels(n_sites, charge);
    if kept.is_empty() {
        return Err(Error::EmptySector(charge));
    }
    let cross = sector_cross_norm(&sup.matrix, &kept);
    let scale = sup.matrix.max_abs().max(f64::MIN_POSITIVE);
    if cross > 1e-10 * scale {
        return Err(Error::SectorNotPreserved { norm: cross });
    }
    let block = extract_block(&sup.matrix, &kept);
    let map = SectorMap {
        charge,
        dimension: kept.len(),
        kept_indices: kept,
        hilbert_dim: dim,
    };
    Ok((
        SuperMatrix { matrix: block, labels, hilbert_dim: dim },
        map,
    ))
}

/// Largest cross-block entry magnitude for the given kept index set.
pub(crate) fn sector_cross_norm(m: &CMatrix, kept: &[usize]) -> f64 {
    let n = m.nrows();
    let in_sector = {
        let mut v = vec![false; n];
        for &k in kept {
            v[k] = true;
        }
        v
    };
    let mut worst: f64 = 0.0;
    for col in 0..n {
        for row in 0..n {
            if in_sector[row] != in_sector[col] {
                worst = worst.max(m.get(row, col).norm());
            }
        }
    }
    worst
}

pub(crate) fn extract_block(m: &CMatrix, kept: &[usize]) -> CMatrix {
    CMatrix::from_fn(kept.len(), kept.len(), |r, c| m.get(kept[r], kept[c]))
}

/// Build the sector block of the Liouvillian directly, without materializing
/// the `4^N x 4^N` superoperator. Needed from `N = 7` up, where the full
/// matrix would not fit in memory.
pub fn sector_liouvillian(
    lind: &Lindbladian,
    n_sites: usize,
    charge: i64,
) -> Result<(SuperMatrix, SectorMap)> {
    let dim = 1usize << n_sites;
    if lind.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: format!("Lindbladian dim {}", lind.dim()),
            right: format!("{n_sites}-site chain (dim {dim})"),
        });
    }
    let (kept, labels) = sector_labels(n_sites, charge);
    if kept.is_empty() {
        return Err(Error::EmptySector(charge));
    }
    let ns = kept.len();
    let h = &lind.hamiltonian;
    let mi = C64::new(0.0, -1.0);
    let pi = C64::new(0.0, 1.0);

    // Precompute L and L†L per channel (rates folded in below).
    let channels: Vec<(&CMatrix, CMatrix, f64)> = lind
        .jumps
        .iter()
        .map(|jmp| (&jmp.operator, &jmp.operator.dagger() * &jmp.operator, jmp.rate))
        .collect();

    let mut block = CMatrix::zeros(ns, ns);
    let mut buf = vec![C64::new(0.0, 0.0); dim * dim];
    for (c, &(k, l)) in labels.iter().enumerate() {
        buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        // -i H E_kl: column l picks up H[:,k];  +i E_kl H: row k picks up H[l,:]
        for i in 0..dim {
            buf[i * dim + l] += mi * h.get(i, k);
            buf[k * dim + i] += pi * h.get(l, i);
        }
        for (lop, ll, rate) in &channels {
            if *rate == 0.0 {
                continue;
            }
            let g = C64::new(*rate, 0.0);
            let half = C64::new(0.5 * rate, 0.0);
            // γ L E_kl L† is the outer product of L[:,k] and conj(L[j,l])
            for i in 0..dim {
                let lik = lop.get(i, k);
                if lik == C64::new(0.0, 0.0) {
                    continue;
                }
                let gi = g * lik;
                for j in 0..dim {
                    buf[i * dim + j] += gi * lop.get(j, l).conj();
                }
            }
            // -γ/2 (L†L) E_kl and -γ/2 E_kl (L†L)
            for i in 0..dim {
                buf[i * dim + l] -= half * ll.get(i, k);
                buf[k * dim + i] -= half * ll.get(l, i);
            }
        }
        for (r, &s) in kept.iter().enumerate() {
            block.set(r, c, buf[s]);
        }
    }
    let map = SectorMap {
        charge,
        dimension: ns,
        kept_indices: kept,
        hilbert_dim: dim,
    };
    Ok((
        SuperMatrix { matrix: block, labels, hilbert_dim: dim },
        map,
    ))
}

/// `binomial(2N, N)`, the zero-sector dimension of an N-site chain.
pub fn zero_sector_dimension(n_sites: usize) -> usize {
    let n = n_sites as u128;
    let mut acc: u128 = 1;
    for k in 1..=n {
        acc = acc * (n + k) / k;
    }
    acc as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_ginibre;
    use crate::matrix::hs_inner;
    use crate::spectral::eig_nonhermitian;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn damped_qubit(gamma: f64, omega0: f64) -> Lindbladian {
        let h = pauli_z().scale(c(omega0 / 2.0, 0.0));
        Lindbladian::new(h, vec![Jump { operator: sigma_minus(), rate: gamma }]).unwrap()
    }

    #[test]
    fn single_qubit_decay_spectrum() {
        let lind = damped_qubit(1.0, 0.0);
        let sup = lind.vectorize();
        let mut eigs = sup.eigenvalues().unwrap();
        eigs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let expect = [c(-1.0, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(0.0, 0.0)];
        for (got, want) in eigs.iter().zip(expect) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn damped_qubit_coherence_eigenvalues() {
        let (gamma, omega0) = (0.3, 1.7);
        let sup = damped_qubit(gamma, omega0).vectorize();
        let eigs = sup.eigenvalues().unwrap();
        for sign in [-1.0, 1.0] {
            let want = c(-gamma / 2.0, sign * omega0);
            assert!(
                eigs.iter().any(|z| (z - want).norm() < 1e-10),
                "missing {want} in {eigs:?}"
            );
        }
    }

    #[test]
    fn vectorize_matches_operator_form() {
        // random D=3 Lindbladian against the operator-form right-hand side
        let dim = 3;
        let a = sample_ginibre(dim, dim, EnsembleSeed::new(21, 0));
        let h = &a + &a.dagger();
        let l1 = sample_ginibre(dim, dim, EnsembleSeed::new(21, 1));
        let l2 = sample_ginibre(dim, dim, EnsembleSeed::new(21, 2));
        let lind = Lindbladian::new(
            h,
            vec![
                Jump { operator: l1, rate: 0.7 },
                Jump { operator: l2, rate: 1.3 },
            ],
        )
        .unwrap();
        let sup = lind.vectorize();
        for trial in 0..100 {
            let g = sample_ginibre(dim, dim, EnsembleSeed::new(22, trial));
            let rho = &(&g * &g.dagger()).scale(c(0.5, 0.0)) + &CMatrix::identity(dim);
            let direct = lind.apply(&rho).vectorize();
            let v = rho.vectorize();
            let n2 = dim * dim;
            for i in 0..n2 {
                let via: C64 = (0..n2).map(|j| sup.matrix.get(i, j) * v[j]).sum();
                assert!((via - direct[i]).norm() < 1e-12 * sup.matrix.frobenius_norm());
            }
        }
    }

    #[test]
    fn trace_preservation_and_left_half_plane() {
        let lind = random_liouvillian(4, 2, 2.0, 1.05, EnsembleSeed::new(23, 0)).unwrap();
        let sup = lind.vectorize();
        assert!(sup.trace_preservation_residual() < 1e-8);
        let eigs = sup.eigenvalues().unwrap();
        for z in &eigs {
            assert!(z.re <= 1e-8, "eigenvalue {z} in right half-plane");
        }
        // exactly one (near-)zero eigenvalue in the generic case
        let zero_count = eigs.iter().filter(|z| z.norm() < 1e-8).count();
        assert_eq!(zero_count, 1);
    }

    #[test]
    fn gell_mann_qubit_basis_is_paulis() {
        let b = gell_mann_basis(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [
            CMatrix::identity(2).scale(c(s, 0.0)),
            pauli_x().scale(c(s, 0.0)),
            pauli_y().scale(c(s, 0.0)),
            pauli_z().scale(c(s, 0.0)),
        ];
        for (got, want) in b.iter().zip(&want) {
            assert!((got - want).frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn gell_mann_orthonormal_and_traceless() {
        for dim in [2usize, 3, 5] {
            let b = gell_mann_basis(dim);
            assert_eq!(b.len(), dim * dim);
            for (i, gi) in b.iter().enumerate() {
                if i > 0 {
                    assert!(gi.trace().norm() < 1e-12, "G_{i} not traceless");
                }
                for (j, gj) in b.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let ip = hs_inner(gi, gj).unwrap();
                    assert!((ip - c(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_liouvillian_jumps_traceless() {
        let lind = random_liouvillian(6, 3, 2.0, 1.05, EnsembleSeed::new(24, 0)).unwrap();
        for j in &lind.jumps {
            assert!(
                j.operator.trace().norm() <= 1e-10 * j.operator.frobenius_norm(),
                "trace {}",
                j.operator.trace()
            );
        }
    }

    fn chain_for_tests(n: usize) -> Lindbladian {
        xxz_impurity_chain(XxzChainParams {
            n_sites: n,
            coupling: 1.0,
            anisotropy: 0.8,
            impurity_field: 1.0,
            gamma_1_plus: 0.5,
            gamma_1_minus: 1.2,
            gamma_n_plus: 1.0,
            gamma_n_minus: 0.8,
            gamma_dephasing: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn two_site_xx_hamiltonian() {
        let lind = xxz_impurity_chain(XxzChainParams {
            n_sites: 2,
            coupling: 1.0,
            anisotropy: 0.0,
            impurity_field: 0.0,
            gamma_1_plus: 0.0,
            gamma_1_minus: 0.0,
            gamma_n_plus: 0.0,
            gamma_n_minus: 0.0,
            gamma_dephasing: 0.0,
        })
        .unwrap();
        // σx⊗σx + σy⊗σy exchanges |↑↓⟩ and |↓↑⟩ with amplitude 2
        let mut want = CMatrix::zeros(4, 4);
        want.set(1, 2, c(2.0, 0.0));
        want.set(2, 1, c(2.0, 0.0));
        assert!((&lind.hamiltonian - &want).frobenius_norm() < 1e-14);
    }

    #[test]
    fn sector_dimensions() {
        let lind = chain_for_tests(2);
        let sup = lind.vectorize();
        let (block, map) = supermagnetization_sector(&sup, 2, 0).unwrap();
        assert_eq!(map.dimension, 6); // binomial(4, 2)
        assert_eq!(block.dim(), 6);
        assert_eq!(zero_sector_dimension(7), 3432);
        // union of all charge blocks (q = -4, -2, 0, 2, 4) covers the space
        let total: usize = (-2..=2i64)
            .map(|h| supermagnetization_sector(&sup, 2, 2 * h).unwrap().1.dimension)
            .sum();
        assert_eq!(total, 16);
    }

    #[test]
    fn sector_charge_empty() {
        let sup = chain_for_tests(2).vectorize();
        assert!(matches!(
            supermagnetization_sector(&sup, 2, 1),
            Err(Error::EmptySector(1))
        ));
    }

    #[test]
    fn direct_sector_build_matches_projection() {
        for n in [2usize, 3] {
            let lind = chain_for_tests(n);
            let sup = lind.vectorize();
            let (block, map) = supermagnetization_sector(&sup, n, 0).unwrap();
            let (direct, dmap) = sector_liouvillian(&lind, n, 0).unwrap();
            assert_eq!(map.kept_indices, dmap.kept_indices);
            let dev = (&block.matrix - &direct.matrix).frobenius_norm();
            assert!(dev < 1e-12 * block.matrix.frobenius_norm(), "dev {dev}");
        }
    }

    #[test]
    fn sector_block_spectrum_well_formed() {
        let lind = chain_for_tests(4);
        let (block, _) = sector_liouvillian(&lind, 4, 0).unwrap();
        assert!(block.trace_preservation_residual() < 1e-8);
        let d = eig_nonhermitian(&block.matrix).unwrap();
        for z in &d.eigenvalues {
            assert!(z.re <= 1e-8 * block.matrix.frobenius_norm());
        }
        // conjugation symmetry within the zero sector
        let scale = block.matrix.frobenius_norm();
        for z in &d.eigenvalues {
            assert!(
                d.eigenvalues.iter().any(|w| (w - z.conj()).norm() < 1e-7 * scale),
                "missing conjugate of {z}"
            );
        }
    }
}
