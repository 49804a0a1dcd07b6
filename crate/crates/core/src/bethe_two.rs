//! Closed-form low-excitation spectra of models 8, 9 and 10.
//!
//! States are built over the vacuum `φ₁⊗…⊗φ₁`. A `ψ` carries one excitation and a `φ₂`
//! carries two, so the `p = 2` sector holds one `φ₂` or two `ψ`s.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{build_hamiltonian_density, hsu2_row, CatalogError, HamiltonianParams, ModelSpec};
use crate::spectrum::{
    cluster_eigenvalues, expand, multiset_distance, reduced_from_density, sector_basis, sector_spectrum, Cluster,
    SectorBasis, SpectrumError, CLUSTER_TOL, MERGE_TOL,
};
use crate::tensor::{eigen_spectrum, null_space, real, ComplexMatrix, TensorError, C64, LOCAL_DIM};

pub const SUPPORTED_MODELS: [u8; 3] = [8, 9, 10];
pub const MIN_BLOCK_LENGTH: usize = 3;
/// Relative singular-value cutoff for block eigenvectors.
pub const KERNEL_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum BetheError {
    #[error("model {0} is outside the two-excitation construction (models 8, 9, 10)")]
    UnsupportedModel(u8),
    #[error("chain length {length} below the minimum {min}")]
    TooShort { length: usize, min: usize },
    #[error("the construction needs G = H = K = L = 0")]
    MixedBonds,
    #[error("case counts {counted} do not fill the p = 2 sector of dimension {dimension}")]
    Multiplicity { counted: usize, dimension: usize },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

fn ab(p: &HamiltonianParams) -> C64 {
    p.a + p.b
}

/// `L (A + B)`.
pub fn vacuum_energy(p: &HamiltonianParams, length: usize) -> C64 {
    ab(p) * length as f64
}

/// One `ψ` on the vacuum: energy `(L - 2)(A + B)`, degeneracy `2L`.
pub fn one_excitation(p: &HamiltonianParams, length: usize) -> (C64, usize) {
    (ab(p) * (length as f64 - 2.0), 2 * length)
}

/// Two `ψ`s on non-adjacent sites; only realisable for `L > 3`.
pub fn two_exc_separated(p: &HamiltonianParams, length: usize) -> (C64, bool) {
    (ab(p) * (length as f64 - 4.0), length > 3)
}

/// `ψ_α ψ_α` on a bond.
pub fn two_exc_equal_adjacent(p: &HamiltonianParams, length: usize) -> C64 {
    ab(p) * (length as f64 - 3.0) + p.d + p.e
}

/// Coupled `(c, h₁₂, h₂₁)` block; `c_j` is the `φ₂` amplitude at `j`, `h_{αβ,j}` the amplitude of
/// `ψ_α` at `j` and `ψ_β` at `j + 1`, all indices cyclic.
#[derive(Debug, Clone)]
pub struct BetheTwoBlock {
    pub length: usize,
    pub params: HamiltonianParams,
    pub block: ComplexMatrix,
}

impl BetheTwoBlock {
    pub fn c_index(&self, j: usize) -> usize {
        j % self.length
    }

    /// `alpha`, `beta` in `{1, 2}`, distinct.
    pub fn h_index(&self, alpha: usize, j: usize) -> usize {
        self.length * alpha + j % self.length
    }
}

pub fn two_exc_block(p: &HamiltonianParams, length: usize) -> Result<BetheTwoBlock, BetheError> {
    if length < MIN_BLOCK_LENGTH {
        return Err(BetheError::TooShort { length, min: MIN_BLOCK_LENGTH });
    }
    let l = length;
    let mut m = ComplexMatrix::zeros(3 * l, 3 * l);
    let c_diag = ab(p) * (l as f64 - 2.0) + p.a * 2.0;
    let h_diag = ab(p) * (l as f64 - 3.0) + p.d;
    let (c, h12, h21) = (0, l, 2 * l);
    for j in 0..l {
        let next = (j + 1) % l;
        let prev = (j + l - 1) % l;
        m[(c + j, c + j)] += c_diag;
        m[(c + j, c + next)] += p.b;
        m[(c + j, c + prev)] += p.b;
        m[(c + j, h12 + prev)] += p.f;
        m[(c + j, h21 + prev)] -= p.f;
        m[(c + j, h12 + j)] -= p.f;
        m[(c + j, h21 + j)] += p.f;

        for (row, other, eps) in [(h12, h21, 1.0), (h21, h12, -1.0)] {
            m[(row + j, row + j)] += h_diag;
            m[(row + j, other + j)] += p.e;
            m[(row + j, c + next)] += p.c * eps;
            m[(row + j, c + j)] -= p.c * eps;
        }
    }
    Ok(BetheTwoBlock { length, params: *p, block: m })
}

fn basis_index(labels: &[usize]) -> usize {
    labels.iter().fold(0, |acc, &s| acc * LOCAL_DIM + s)
}

const PHI2: usize = 1;
const PSI: [usize; 2] = [2, 3];

/// Coordinates of a block vector in the `p = 2` sector basis.
pub fn reconstruct(block: &BetheTwoBlock, coords: &[C64], basis: &SectorBasis) -> Vec<C64> {
    let l = block.length;
    let mut out = vec![real(0.0); basis.dim()];
    let mut put = |labels: &[usize], z: C64| {
        let pos = basis.position(basis_index(labels)).expect("p = 2 state");
        out[pos] += z;
    };
    for j in 0..l {
        let mut s = vec![0; l];
        s[j] = PHI2;
        put(&s, coords[block.c_index(j)]);
        for (alpha, beta) in [(0, 1), (1, 0)] {
            let mut s = vec![0; l];
            s[j] = PSI[alpha];
            s[(j + 1) % l] = PSI[beta];
            put(&s, coords[block.h_index(alpha + 1, j)]);
        }
    }
    out
}

/// Explicit Case 1 and Case 2 states as `(labels, energy)`.
fn diagonal_states(p: &HamiltonianParams, length: usize) -> Vec<(Vec<usize>, C64)> {
    let mut out = Vec::new();
    let (sep, _) = two_exc_separated(p, length);
    for i in 0..length {
        for j in i + 2..length {
            if i == 0 && j == length - 1 {
                continue;
            }
            for a in PSI {
                for b in PSI {
                    let mut s = vec![0; length];
                    s[i] = a;
                    s[j] = b;
                    out.push((s, sep));
                }
            }
        }
    }
    let eq = two_exc_equal_adjacent(p, length);
    for j in 0..length {
        for a in PSI {
            let mut s = vec![0; length];
            s[j] = a;
            s[(j + 1) % length] = a;
            out.push((s, eq));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub case: u8,
    pub count: usize,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheTwoReport {
    pub model: u8,
    pub label: String,
    pub length: usize,
    pub vacuum: C64,
    pub one_excitation: (C64, usize),
    pub cases: Vec<CaseSummary>,
    /// Union of the three cases.
    pub predicted: Vec<Cluster>,
    pub sector: Vec<Cluster>,
    pub distance: f64,
    /// Independent block eigenvectors; fewer than `3L` when the block is defective.
    pub block_eigenvectors: usize,
    /// Largest `‖Hv - Λv‖ / ‖v‖` over the reconstructed states.
    pub max_residual: f64,
}

impl BetheTwoReport {
    pub fn passed(&self, distance_tol: f64, residual_tol: f64) -> bool {
        self.distance < distance_tol && self.max_residual < residual_tol
    }
}

fn params_for(spec: &ModelSpec) -> Result<HamiltonianParams, BetheError> {
    if !SUPPORTED_MODELS.contains(&spec.model) {
        return Err(BetheError::UnsupportedModel(spec.model));
    }
    let p = hsu2_row(spec)?;
    if [p.g, p.h, p.k, p.l].iter().any(|z| z.norm() > 0.0) {
        return Err(BetheError::MixedBonds);
    }
    Ok(p)
}

fn relative_residual(h: &ComplexMatrix, v: &[C64], lambda: C64) -> f64 {
    let hv = h.mul_vec(v);
    let num: f64 = hv.iter().zip(v).map(|(x, y)| (x - lambda * y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Builds all three cases, checks the state count and compares against the exact `p = 2` sector.
pub fn two_exc_compare(spec: &ModelSpec, length: usize) -> Result<BetheTwoReport, BetheError> {
    let p = params_for(spec)?;
    let block = two_exc_block(&p, length)?;
    let basis = sector_basis(length, 2)?;
    let reduced = reduced_from_density(&build_hamiltonian_density(spec)?, &basis)?;
    let h = &reduced.matrix;

    let explicit = diagonal_states(&p, length);
    let mut max_residual = 0.0f64;
    let mut case1 = Vec::new();
    let mut case2 = Vec::new();
    for (labels, energy) in &explicit {
        let mut v = vec![real(0.0); basis.dim()];
        v[basis.position(basis_index(labels)).expect("p = 2 state")] = real(1.0);
        max_residual = max_residual.max(relative_residual(h, &v, *energy));
        let adjacent = (0..length).any(|j| labels[j] != 0 && labels[(j + 1) % length] != 0);
        if adjacent {
            case2.push(*energy);
        } else {
            case1.push(*energy);
        }
    }

    let case3 = eigen_spectrum(&block.block)?;
    let scale = block.block.max_abs().max(1.0);
    let mut eigenvectors = 0;
    for cluster in cluster_eigenvalues(&case3, CLUSTER_TOL, MERGE_TOL) {
        // Defective eigenvalues split under rounding; the cluster mean is accurate, so take the kernel there.
        let shifted = &block.block - &ComplexMatrix::identity(3 * length).scale(cluster.value);
        let kernel = null_space(&shifted, KERNEL_TOL * scale);
        if kernel.is_empty() {
            max_residual = f64::INFINITY;
        }
        for k in &kernel {
            let v = reconstruct(&block, k, &basis);
            max_residual = max_residual.max(relative_residual(h, &v, cluster.value));
        }
        eigenvectors += kernel.len();
    }

    let counted = case1.len() + case2.len() + case3.len();
    if counted != basis.dim() {
        return Err(BetheError::Multiplicity { counted, dimension: basis.dim() });
    }
    let summary = |case, values: &[C64]| CaseSummary {
        case,
        count: values.len(),
        clusters: cluster_eigenvalues(values, CLUSTER_TOL, MERGE_TOL),
    };
    let cases = vec![summary(1, &case1), summary(2, &case2), summary(3, &case3)];
    let mut union: Vec<C64> = Vec::with_capacity(counted);
    for c in &cases {
        union.extend(expand(&c.clusters));
    }
    let predicted = cluster_eigenvalues(&union, CLUSTER_TOL, MERGE_TOL);
    let sector = sector_spectrum(spec, length, 2, CLUSTER_TOL)?.clusters;
    let distance = multiset_distance(&union, &expand(&sector));
    Ok(BetheTwoReport {
        model: spec.model,
        label: spec.label(),
        length,
        vacuum: vacuum_energy(&p, length),
        one_excitation: one_excitation(&p, length),
        cases,
        predicted,
        sector,
        distance,
        block_eigenvectors: eigenvectors,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::cplx;

    fn params(model: u8) -> HamiltonianParams {
        hsu2_row(&ModelSpec::real(model, &[("rho", 1.0), ("phi", 0.0)])).unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn closed_form_examples() {
        let (m9, m10) = (params(9), params(10));
        for l in 2..7 {
            assert!(close(vacuum_energy(&m9, l), real(0.0)));
            assert_eq!(one_excitation(&m9, l), (real(0.0), 2 * l));
        }
        assert!(close(vacuum_energy(&m10, 4), real(3.0)));
        let (e, d) = one_excitation(&m10, 3);
        assert!(close(e, real(0.75)) && d == 6);
        assert_eq!(one_excitation(&m10, 2).1, 4);
        assert!(close(one_excitation(&m10, 2).0, real(0.0)));
        assert!(!two_exc_separated(&m10, 3).1);
        let (e, ok) = two_exc_separated(&m10, 5);
        assert!(ok && close(e, real(0.75)));
        assert!(close(two_exc_separated(&m10, 4).0, real(0.0)));
        assert!(close(two_exc_equal_adjacent(&m9, 4), real(0.0)));
        assert!(close(two_exc_equal_adjacent(&m10, 3), real(0.75)));
    }

    #[test]
    fn case_counts_fill_the_sector() {
        let p = params(10);
        for l in 3..=6 {
            let explicit = diagonal_states(&p, l).len();
            assert_eq!(explicit + 3 * l, 2 * l * l - l, "L={l}");
        }
    }

    #[test]
    fn uncoupled_block_is_circulant() {
        let mut p = params(10);
        p.c = real(0.0);
        p.f = real(0.0);
        p.a = cplx(0.4, 0.1);
        p.b = cplx(-0.3, 0.2);
        let l = 5;
        let block = two_exc_block(&p, l).unwrap();
        for j in 0..l {
            for k in l..3 * l {
                assert_eq!(block.block[(j, k)], real(0.0));
                assert_eq!(block.block[(k, j)], real(0.0));
            }
        }
        // Plane waves diagonalize the c-sector with symbol (L-2)(A+B) + 2A + 2B cos k.
        for n in 0..l {
            let k = 2.0 * std::f64::consts::PI * n as f64 / l as f64;
            let wave: Vec<C64> = (0..l).map(|j| cplx(0.0, k * j as f64).exp()).collect();
            let symbol = (p.a + p.b) * (l as f64 - 2.0) + p.a * 2.0 + p.b * (2.0 * k.cos());
            for j in 0..l {
                let row: C64 = (0..l).map(|i| block.block[(j, i)] * wave[i]).sum();
                assert!((row - symbol * wave[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn block_matches_dense_chain() {
        use crate::charges::{assemble_charge, ChargeDensity};
        let spec = ModelSpec::real(8, &[("rho", 0.7), ("phi", 0.3)]);
        let p = params_for(&spec).unwrap();
        let l = 4;
        let block = two_exc_block(&p, l).unwrap();
        let basis = sector_basis(l, 2).unwrap();
        let chain = assemble_charge(&ChargeDensity::new(build_hamiltonian_density(&spec).unwrap()).unwrap(), l, true).unwrap();
        for col in 0..3 * l {
            let mut e = vec![real(0.0); 3 * l];
            e[col] = real(1.0);
            let v = reconstruct(&block, &e, &basis);
            let mut full = vec![real(0.0); chain.matrix().rows()];
            for (pos, &i) in basis.indices.iter().enumerate() {
                full[i] = v[pos];
            }
            let hv = chain.matrix().mul_vec(&full);
            let image = reconstruct(&block, &block.block.column(col), &basis);
            for (pos, &i) in basis.indices.iter().enumerate() {
                assert!((hv[i] - image[pos]).norm() < 1e-12, "column {col}");
            }
        }
    }

    #[test]
    fn compare_model8_l3() {
        let spec = ModelSpec::real(8, &[("rho", 1.0), ("phi", 0.0)]);
        let r = two_exc_compare(&spec, 3).unwrap();
        assert!(r.distance < 1e-8, "{}", r.distance);
        assert!(r.max_residual < 1e-9, "{}", r.max_residual);
        let want = [(-2.0, 1), (0.0, 12), (1.0, 2)];
        assert_eq!(r.sector.len(), want.len());
        for (c, (v, m)) in r.sector.iter().zip(want) {
            assert!((c.value - real(v)).norm() < 1e-8);
            assert_eq!(c.multiplicity, m);
        }
    }

    #[test]
    fn unsupported_inputs() {
        let spec = ModelSpec::default_for(4, None).unwrap();
        assert!(matches!(two_exc_compare(&spec, 4), Err(BetheError::UnsupportedModel(4))));
        assert!(matches!(two_exc_block(&params(9), 2), Err(BetheError::TooShort { .. })));
    }
}
