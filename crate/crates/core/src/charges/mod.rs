//! Conserved charges from the boost construction and the `[Q2, Q3] = 0` test.

mod poly;
mod symbolic;

use rayon::prelude::*;
use thiserror::Error;

use crate::worker_pool;
use crate::catalog::{build_hamiltonian_density, CatalogError, LocalOperator, ModelSpec};
use crate::tensor::{
    embed_local, kron, periodic_sites, real, ChainOperator, ComplexMatrix, LocalAction, TensorError, C64, LOCAL_DIM,
};

pub use poly::{export_equations, grlex, EquationExport, Exponents, MultiPoly};
pub use symbolic::{
    assignment_for, check_solution, check_solution_values, emit_integrability_equations, Ansatz, EquationSystem,
    SymbolicDensity,
};

/// Chain length used for the integrability test and equation emission.
pub const DEFAULT_LENGTH: usize = 6;
#[derive(Debug, Error)]
pub enum ChargeError {
    #[error("charge density has range {got}, expected {expected}")]
    WrongRange { expected: usize, got: usize },
    #[error("charge density must act on 2 or 3 sites, got dimension {0}")]
    UnsupportedRange(usize),
    #[error("chain of length {length} is too short for a range-{range} density")]
    ChainTooShort { length: usize, range: usize },
    #[error("assignment is missing variable {0}")]
    MissingVariable(String),
    #[error("ansatz basis entry ({row}, {col}) = {value} is not an integer")]
    NonIntegerBasis { row: usize, col: usize, value: C64 },
    #[error("model {0} is not covered by the {1} ansatz")]
    NotInAnsatz(u8, &'static str),
    #[error("unknown ansatz {0:?}")]
    UnknownAnsatz(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Density of a charge acting on `range` adjacent sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeDensity {
    range: usize,
    matrix: ComplexMatrix,
}

impl ChargeDensity {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, ChargeError> {
        let range = match matrix.rows() {
            16 => 2,
            64 => 3,
            n => return Err(ChargeError::UnsupportedRange(n)),
        };
        if !matrix.is_square() {
            return Err(TensorError::NotSquare(matrix.rows(), matrix.cols()).into());
        }
        Ok(Self { range, matrix })
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `[H₁₂, H₂₃]`.
pub fn q3_density(h: &ChargeDensity) -> Result<ChargeDensity, ChargeError> {
    if h.range != 2 {
        return Err(ChargeError::WrongRange { expected: 2, got: h.range });
    }
    let id = ComplexMatrix::identity(LOCAL_DIM);
    let h12 = kron(&h.matrix, &id);
    let h23 = kron(&id, &h.matrix);
    ChargeDensity::new(&(&h12 * &h23) - &(&h23 * &h12))
}

/// `Σₙ d_{n..n+k-1}`; periodic sums run over all `L` positions.
pub fn assemble_charge(d: &ChargeDensity, length: usize, periodic: bool) -> Result<ChainOperator, ChargeError> {
    if length < d.range {
        return Err(ChargeError::ChainTooShort { length, range: d.range });
    }
    let last = if periodic { length } else { length - d.range + 1 };
    let mut total = ChainOperator::zeros(length);
    for n in 1..=last {
        total.add_assign(&embed_local(&d.matrix, n, length, periodic)?)?;
    }
    Ok(total)
}

/// Basis states that are lexicographically smallest among their cyclic shifts.
pub fn orbit_representatives(length: usize) -> Vec<usize> {
    let dim = LOCAL_DIM.pow(length as u32);
    let top = dim / LOCAL_DIM;
    (0..dim)
        .filter(|&c| {
            let mut s = c;
            for _ in 1..length {
                s = (s % top) * LOCAL_DIM + s / top;
                if s < c {
                    return false;
                }
            }
            true
        })
        .collect()
}

/// Periodic sum of a local action applied to one basis state.
pub(crate) fn apply_periodic<T>(a: &LocalAction<T>, index: usize, length: usize, mut emit: impl FnMut(usize, &T)) {
    for n in 0..length {
        a.apply(index, &periodic_sites(n, a.range(), length), length, &mut emit);
    }
}

fn commutator_column_norm(h: &LocalAction, q3: &LocalAction, c: usize, length: usize, scratch: &mut [C64]) -> f64 {
    let mut touched = Vec::new();
    let push = |scratch: &mut [C64], touched: &mut Vec<usize>, r: usize, z: C64| {
        if scratch[r] == real(0.0) {
            touched.push(r);
        }
        scratch[r] += z;
    };
    let mut first = Vec::new();
    apply_periodic(q3, c, length, |r, z| first.push((r, *z)));
    for &(r, z) in &first {
        apply_periodic(h, r, length, |s, w| push(scratch, &mut touched, s, w * z));
    }
    first.clear();
    apply_periodic(h, c, length, |r, z| first.push((r, *z)));
    for &(r, z) in &first {
        apply_periodic(q3, r, length, |s, w| push(scratch, &mut touched, s, -(w * z)));
    }
    let mut worst = 0.0f64;
    for r in touched {
        worst = worst.max(scratch[r].norm());
        scratch[r] = real(0.0);
    }
    worst
}

/// Max entry of `[Q2, Q3]` on the periodic chain, from translation-orbit representative columns.
pub fn q2q3_norm_density(h: &LocalOperator, length: usize) -> Result<f64, ChargeError> {
    let hd = ChargeDensity::new(h.clone())?;
    if hd.range != 2 {
        return Err(ChargeError::WrongRange { expected: 2, got: hd.range });
    }
    if length < 3 {
        return Err(ChargeError::ChainTooShort { length, range: 3 });
    }
    let q3 = q3_density(&hd)?;
    let ha = LocalAction::new(h, LOCAL_DIM)?;
    let qa = LocalAction::new(q3.matrix(), LOCAL_DIM)?;
    let dim = LOCAL_DIM.pow(length as u32);
    let reps = orbit_representatives(length);
    let worst = worker_pool().install(|| {
        reps.par_iter()
            .map_init(|| vec![real(0.0); dim], |scratch, &c| commutator_column_norm(&ha, &qa, c, length, scratch))
            .reduce(|| 0.0, f64::max)
    });
    Ok(worst)
}

/// Same quantity from dense assembled charges; practical up to `L = 5`.
pub fn q2q3_norm_dense(h: &LocalOperator, length: usize) -> Result<f64, ChargeError> {
    let hd = ChargeDensity::new(h.clone())?;
    let q2 = assemble_charge(&hd, length, true)?;
    let q3 = assemble_charge(&q3_density(&hd)?, length, true)?;
    Ok(q2.commutator(&q3)?.matrix().max_abs())
}

pub fn q2q3_commutator_norm(spec: &ModelSpec, length: usize) -> Result<f64, ChargeError> {
    q2q3_norm_density(&build_hamiltonian_density(spec)?, length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::hsu2_density;
    use crate::tensor::{cplx, permutation_operator};

    #[test]
    fn q3_examples() {
        let id = ChargeDensity::new(ComplexMatrix::identity(16)).unwrap();
        assert_eq!(q3_density(&id).unwrap().matrix().max_abs(), 0.0);
        let diag = ChargeDensity::new(ComplexMatrix::diagonal(&(0..16).map(|i| real(i as f64)).collect::<Vec<_>>())).unwrap();
        assert_eq!(q3_density(&diag).unwrap().matrix().max_abs(), 0.0);

        let p = permutation_operator(4);
        let q = q3_density(&ChargeDensity::new(p.clone()).unwrap()).unwrap();
        let p3 = |a: usize, b: usize| {
            ComplexMatrix::from_fn(64, 64, |r, c| {
                let mut digits = [c / 16, (c / 4) % 4, c % 4];
                digits.swap(a, b);
                if r == digits[0] * 16 + digits[1] * 4 + digits[2] {
                    real(1.0)
                } else {
                    real(0.0)
                }
            })
        };
        let want = &(&p3(0, 1) * &p3(1, 2)) - &(&p3(1, 2) * &p3(0, 1));
        assert!(q.matrix().approx_eq(&want, 0.0));
        assert!(q.matrix().max_abs() > 0.5);
        assert!(matches!(q3_density(&q), Err(ChargeError::WrongRange { .. })));
    }

    #[test]
    fn assemble_examples() {
        let d = ChargeDensity::new(ComplexMatrix::from_fn(16, 16, |r, c| cplx((r * 3 + c) as f64, (r + 5 * c) as f64 * 0.1))).unwrap();
        let q = assemble_charge(&d, 2, true).unwrap();
        let p = permutation_operator(4);
        let want = d.matrix() + &(&(&p * d.matrix()) * &p);
        assert!(q.matrix().approx_eq(&want, 1e-12));
        let z = ChargeDensity::new(ComplexMatrix::zeros(16, 16)).unwrap();
        assert_eq!(assemble_charge(&z, 4, true).unwrap().matrix().max_abs(), 0.0);
        let d3 = q3_density(&d).unwrap();
        assert!(matches!(assemble_charge(&d3, 2, true), Err(ChargeError::ChainTooShort { .. })));
    }

    #[test]
    fn model9_vacuum_is_annihilated() {
        let h = build_hamiltonian_density(&ModelSpec::real(9, &[("rho", 1.0), ("phi", 0.0)])).unwrap();
        let q2 = assemble_charge(&ChargeDensity::new(h).unwrap(), 3, true).unwrap();
        assert!(q2.matrix().column(0).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn orbit_representatives_cover_everything() {
        for l in 1..=5 {
            let reps = orbit_representatives(l);
            let dim = 4usize.pow(l as u32);
            let top = dim / 4;
            let mut seen = vec![false; dim];
            for &c in &reps {
                let mut s = c;
                for _ in 0..l {
                    seen[s] = true;
                    s = (s % top) * 4 + s / top;
                }
            }
            assert!(seen.iter().all(|&b| b));
        }
        assert_eq!(orbit_representatives(2).len(), 10);
    }

    #[test]
    fn sparse_agrees_with_dense() {
        let mut p = crate::catalog::HamiltonianParams::from_array([
            real(0.3), real(-0.7), real(0.2), real(1.1), real(0.4), real(-0.5), real(0.9), real(0.6), real(-0.2), real(0.8),
        ]);
        let h = hsu2_density(&p);
        for l in [3, 4] {
            let a = q2q3_norm_density(&h, l).unwrap();
            let b = q2q3_norm_dense(&h, l).unwrap();
            assert!((a - b).abs() < 1e-12 * b.max(1.0), "L={l}: {a} vs {b}");
            assert!(a > 1e-3);
        }
        p.e = real(0.0);
        let h = hsu2_density(&p);
        let a = q2q3_norm_density(&h, 4).unwrap();
        let b = q2q3_norm_dense(&h, 4).unwrap();
        assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }

    #[test]
    fn diagonal_model_commutes() {
        let spec = ModelSpec::default_for(3, None).unwrap();
        assert!(q2q3_commutator_norm(&spec, 6).unwrap() < 1e-12);
    }
}
