use std::fmt;
use std::sync::Arc;

use super::{fermion, CatalogError, LocalOperator, RMatrixFn};
use crate::grading::graded_permutation;
use crate::tensor::{commutator, cplx, kron, matrix_unit, permutation_operator, real, ComplexMatrix, C64};

/// Sample points for the twist precondition.
const TWIST_SAMPLES: [f64; 3] = [0.13, -0.21, 0.37];
const TWIST_TOL: f64 = 1e-9;

type ScalarFn = dyn Fn(C64) -> C64 + Send + Sync;

/// Transformations mapping solutions to solutions.
#[derive(Clone)]
pub enum Transform {
    /// `R ↦ f(u) R`.
    Normalization(Arc<ScalarFn>),
    /// `R(u) ↦ R(s u)`.
    Reparametrization(C64),
    /// `R ↦ (V⊗V) R (V⁻¹⊗V⁻¹)`.
    BasisChange(ComplexMatrix),
    /// `R ↦ P R P`.
    Prp,
    /// `R ↦ Rᵀ`.
    Transpose,
    /// `R ↦ (V⊗W) R (W⁻¹⊗V⁻¹)`, needs `[R, V⊗V] = [R, W⊗W] = 0`.
    Twist { v: ComplexMatrix, w: ComplexMatrix },
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Normalization(_) => write!(f, "Normalization"),
            Transform::Reparametrization(s) => write!(f, "Reparametrization({s})"),
            Transform::BasisChange(_) => write!(f, "BasisChange"),
            Transform::Prp => write!(f, "Prp"),
            Transform::Transpose => write!(f, "Transpose"),
            Transform::Twist { .. } => write!(f, "Twist"),
        }
    }
}

impl Transform {
    pub fn normalization(f: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        Transform::Normalization(Arc::new(f))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Transform::Normalization(_) => "normalization",
            Transform::Reparametrization(_) => "reparametrization",
            Transform::BasisChange(_) => "basis_change",
            Transform::Prp => "prp",
            Transform::Transpose => "transpose",
            Transform::Twist { .. } => "twist",
        }
    }
}

fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix, CatalogError> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(CatalogError::Tensor(crate::tensor::TensorError::DimensionMismatch(m.rows(), m.cols(), 4, 4)));
    }
    m.inverse().ok_or(CatalogError::SingularBasisChange)
}

fn commutes_with_square(x: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64, CatalogError> {
    Ok(commutator(x, &kron(v, v))?.max_abs())
}

/// Largest `|[R(u), V⊗V]|`, `|[R(u), W⊗W]|` over the sample points.
pub fn twist_violation(r: &RMatrixFn, v: &ComplexMatrix, w: &ComplexMatrix) -> Result<f64, CatalogError> {
    let mut worst = 0.0f64;
    for u in TWIST_SAMPLES {
        let m = r.at(real(u))?;
        worst = worst.max(commutes_with_square(&m, v)?).max(commutes_with_square(&m, w)?);
    }
    Ok(worst)
}

/// Apply a transform to an R-matrix; the result evaluates lazily.
pub fn apply_to_r(t: &Transform, r: &RMatrixFn) -> Result<RMatrixFn, CatalogError> {
    let label = format!("{} [{}]", r.label(), t.name());
    Ok(match t {
        Transform::Normalization(f) => {
            let f = f.clone();
            r.map(label, move |u, m| m.scale(f(u)))
        }
        Transform::Reparametrization(s) => r.rescale(label, *s),
        Transform::BasisChange(v) => {
            let vi = invert(v)?;
            let (a, b) = (kron(v, v), kron(&vi, &vi));
            r.map(label, move |_, m| &(&a * &m) * &b)
        }
        Transform::Prp => {
            let p = permutation_operator(4);
            r.map(label, move |_, m| &(&p * &m) * &p)
        }
        Transform::Transpose => r.map(label, |_, m| m.transpose()),
        Transform::Twist { v, w } => {
            let bad = twist_violation(r, v, w)?;
            if bad > TWIST_TOL {
                return Err(CatalogError::TwistPrecondition(bad));
            }
            let (vi, wi) = (invert(v)?, invert(w)?);
            let (a, b) = (kron(v, w), kron(&wi, &vi));
            r.map(label, move |_, m| &(&a * &m) * &b)
        }
    })
}

/// Image of a Hamiltonian density under the transform induced on `d/du (P R)|₀`.
pub fn apply_to_density(t: &Transform, h: &LocalOperator) -> Result<LocalOperator, CatalogError> {
    Ok(match t {
        Transform::Normalization(f) => {
            let step = 1e-4;
            let d = |s: f64| (f(real(s)) - f(real(-s))) / (2.0 * s);
            let slope = (d(step / 2.0) * 4.0 - d(step)) / 3.0;
            let mut out = h.scale(f(real(0.0)));
            out.add_scaled(&ComplexMatrix::identity(16), slope);
            out
        }
        Transform::Reparametrization(s) => h.scale(*s),
        Transform::BasisChange(v) => {
            let vi = invert(v)?;
            &(&kron(v, v) * h) * &kron(&vi, &vi)
        }
        Transform::Prp => {
            let p = permutation_operator(4);
            &(&p * h) * &p
        }
        Transform::Transpose => {
            let p = permutation_operator(4);
            &(&p * &h.transpose()) * &p
        }
        Transform::Twist { v, w } => {
            let bad = commutes_with_square(h, v)?.max(commutes_with_square(h, w)?);
            if bad > TWIST_TOL {
                return Err(CatalogError::TwistPrecondition(bad));
            }
            let (vi, wi) = (invert(v)?, invert(w)?);
            &(&kron(w, v) * h) * &kron(&wi, &vi)
        }
    })
}

fn conj_pair(u: &ComplexMatrix, h: &ComplexMatrix) -> ComplexMatrix {
    let ui = u.inverse().expect("invertible local map");
    &(&kron(u, u) * h) * &kron(&ui, &ui)
}

/// `(3ρ/2) [1 - (U⊗U) H^{sp(4)} (U⁻¹⊗U⁻¹)]` with `H^{sp(4)} = P - P K'/3`.
pub fn model11_sp4_density(rho: C64, phi: C64) -> LocalOperator {
    let theta = [1.0, 1.0, -1.0, -1.0];
    let mut kp = ComplexMatrix::zeros(16, 16);
    for i in 0..4 {
        for j in 0..4 {
            kp.add_scaled(&kron(&matrix_unit(4, i, j), &matrix_unit(4, 3 - i, 3 - j)), real(theta[i] * theta[j]));
        }
    }
    let p = permutation_operator(4);
    let mut hsp = p.clone();
    hsp.add_scaled(&(&p * &kp), real(-1.0 / 3.0));
    let half = phi * 0.5;
    let u = ComplexMatrix::from_entries(4, &[(0, 0, real(1.0)), (1, 3, half.exp()), (2, 2, real(1.0)), (3, 1, (-half).exp())]);
    let mut out = ComplexMatrix::identity(16);
    out.add_scaled(&conj_pair(&u, &hsp), real(-1.0));
    out.scale(rho * 1.5)
}

/// `(U⊗U)(i V₁ H V₁⁻¹)(U⊗U)⁻¹` with `V₁ = diag(1, -1, i, i) ⊗ 1`; equals `ρ K_Hub`
/// when `H` is the graded model 12 density.
pub fn model12_free_hubbard_image(h_graded: &LocalOperator, phi: C64) -> LocalOperator {
    let v = ComplexMatrix::diagonal(&[real(1.0), real(-1.0), cplx(0.0, 1.0), cplx(0.0, 1.0)]);
    let v1 = kron(&v, &ComplexMatrix::identity(4));
    let v1i = v1.inverse().expect("diagonal unitary");
    let twisted = (&(&v1 * h_graded) * &v1i).scale(cplx(0.0, 1.0));
    let e = (-phi * 0.5).exp();
    let i = cplx(0.0, 1.0);
    let u = ComplexMatrix::from_entries(4, &[(0, 1, e), (1, 0, e), (2, 2, i), (3, 3, i)]);
    conj_pair(&u, &twisted)
}

/// Free-Hubbard kinetic density, the target of [`model12_free_hubbard_image`].
pub fn free_hubbard_kinetic(rho: C64) -> LocalOperator {
    fermion::k_hub().scale(rho)
}

/// `Rev H Rev + ρ (P - P^f)`, where `Rev` reverses the site basis; maps model 4 at
/// `(ρ, a, φ)` to model 6 at `(ρ, 2ρ - a, -φ)`.
pub fn model4_to_model6(h4: &LocalOperator, rho: C64) -> LocalOperator {
    let rev = ComplexMatrix::from_entries(4, &[(3, 0, real(1.0)), (2, 1, real(1.0)), (1, 2, real(1.0)), (0, 3, real(1.0))]);
    let rr = kron(&rev, &rev);
    let mut out = &(&rr * h4) * &rr;
    out.add_scaled(&permutation_operator(4), rho);
    out.add_scaled(&graded_permutation(), -rho);
    out
}
