//! Graded (2|2) formalism: graded permutation, graded R-matrices and graded chains.

use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogError, LocalOperator, RMatrixFn};
use crate::tensor::{
    cplx, embed_with_swap, kron, real, ChainOperator, ComplexMatrix, TensorError, C64, LOCAL_DIM,
};
use crate::verifier::{derivative_at_zero, ybe_from_matrices, Extraction, EXTRACTION_STEP};

/// Parity of each local basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingConvention {
    pub parity: [u8; 4],
}

impl Default for GradingConvention {
    fn default() -> Self {
        Self { parity: [0, 0, 1, 1] }
    }
}

impl GradingConvention {
    pub fn p(&self, i: usize) -> u8 {
        self.parity[i] & 1
    }

    /// `diag((-1)^{p(i)})`.
    pub fn parity_operator(&self) -> ComplexMatrix {
        ComplexMatrix::diagonal(&self.parity.map(|p| real(if p & 1 == 1 { -1.0 } else { 1.0 })))
    }

    fn sign(odd: bool) -> f64 {
        if odd {
            -1.0
        } else {
            1.0
        }
    }

    /// Sign attached to the entry `((a, b), (c, d))` of a graded two-site matrix.
    pub fn r_sign(&self, a: usize, b: usize, c: usize) -> f64 {
        Self::sign(self.p(c) * (1 + self.p(a) + self.p(b)) % 2 == 1)
    }
}

/// Graded permutation for a convention.
pub fn graded_permutation_with(g: &GradingConvention) -> ComplexMatrix {
    let d = LOCAL_DIM;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            m[(d * b + a, d * a + b)] = real(GradingConvention::sign(g.p(a) * g.p(b) == 1));
        }
    }
    m
}

/// Graded permutation for the standard convention.
pub fn graded_permutation() -> ComplexMatrix {
    graded_permutation_with(&GradingConvention::default())
}

/// Largest entry of odd total parity.
pub fn parity_violation(m: &ComplexMatrix, g: &GradingConvention) -> f64 {
    let mut worst = 0.0f64;
    for row in 0..16 {
        for col in 0..16 {
            let total = g.p(row / 4) + g.p(row % 4) + g.p(col / 4) + g.p(col % 4);
            if total % 2 == 1 {
                worst = worst.max(m[(row, col)].norm());
            }
        }
    }
    worst
}

/// Entrywise sign dressing of a two-site matrix.
pub fn grade_matrix(m: &ComplexMatrix, g: &GradingConvention) -> ComplexMatrix {
    ComplexMatrix::from_fn(16, 16, |row, col| m[(row, col)] * g.r_sign(row / 4, row % 4, col / 4))
}

pub const COMPATIBILITY_SAMPLES: [f64; 3] = [0.13, -0.21, 0.37];
pub const COMPATIBILITY_TOL: f64 = 1e-12;

pub fn compatibility_check_with(r: &RMatrixFn, g: &GradingConvention) -> bool {
    COMPATIBILITY_SAMPLES.iter().all(|&u| match r.at(real(u)) {
        Ok(m) => parity_violation(&m, g) <= COMPATIBILITY_TOL * m.max_abs().max(1.0),
        Err(_) => false,
    })
}

pub fn compatibility_check(r: &RMatrixFn) -> bool {
    compatibility_check_with(r, &GradingConvention::default())
}

pub fn grade_r_matrix_with(r: &RMatrixFn, g: &GradingConvention) -> Result<RMatrixFn, CatalogError> {
    if !compatibility_check_with(r, g) {
        return Err(CatalogError::Constraint { model: 0, reason: format!("{} violates the grading compatibility condition", r.label()) });
    }
    let g = *g;
    Ok(r.map(format!("{} (graded)", r.label()), move |_, m| grade_matrix(&m, &g)))
}

pub fn grade_r_matrix(r: &RMatrixFn) -> Result<RMatrixFn, CatalogError> {
    grade_r_matrix_with(r, &GradingConvention::default())
}

/// `R^f₁₃ = P^f₁₂ R^f₂₃ P^f₁₂`.
pub fn graded_leg13(rf: &ComplexMatrix) -> ComplexMatrix {
    let pf12 = kron(&graded_permutation(), &ComplexMatrix::identity(4));
    let r23 = kron(&ComplexMatrix::identity(4), rf);
    &(&pf12 * &r23) * &pf12
}

pub fn graded_ybe_residual(rf: &RMatrixFn, u: C64, v: C64) -> Result<f64, CatalogError> {
    let r13 = graded_leg13(&rf.at(u)?);
    Ok(ybe_from_matrices(&rf.at(u - v)?, &r13, &rf.at(v)?))
}

pub fn graded_regularity_residual(rf: &RMatrixFn) -> Result<f64, CatalogError> {
    Ok(rf.at(real(0.0))?.max_abs_diff(&graded_permutation()))
}

/// `d/du (P^f R^f(u))|₀`.
pub fn graded_hamiltonian(rf: &RMatrixFn) -> Result<Extraction, CatalogError> {
    let pf = graded_permutation();
    derivative_at_zero(|u| Ok(&pf * &rf.at(u)?), EXTRACTION_STEP)
}

/// `diag(1, i, 1, i)`, the per-site phase relating graded model 18 to its fermionic density.
pub fn model18_phase() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[real(1.0), cplx(0.0, 1.0), real(1.0), cplx(0.0, 1.0)])
}

/// Embed a two-site graded density at `site` (1-based); the periodic wrap is transported with `P^f`.
pub fn embed_graded(op: &LocalOperator, site: usize, length: usize, periodic: bool) -> Result<ChainOperator, TensorError> {
    let m = embed_with_swap(op, LOCAL_DIM, site, length, periodic, &graded_permutation())?;
    ChainOperator::new(length, m)
}

/// `Σ_n H_{n,n+1}` with the graded periodic wrap.
pub fn graded_chain_hamiltonian(density: &LocalOperator, length: usize) -> Result<ChainOperator, TensorError> {
    let mut total = ChainOperator::zeros(length);
    for n in 1..=length {
        total.add_assign(&embed_graded(density, n, length, true)?)?;
    }
    Ok(total)
}
