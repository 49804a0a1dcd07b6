use serde::Serialize;

use super::{fermion, so4, Branch, CatalogError, LocalOperator, ModelSpec};
use crate::tensor::{real, ComplexMatrix, C64};

/// Coefficients A..L of the su(2)xsu(2) invariant density.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HamiltonianParams {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub e: C64,
    pub f: C64,
    pub g: C64,
    pub h: C64,
    pub k: C64,
    pub l: C64,
}

pub const HSU2_SYMBOLS: [&str; 10] = ["A", "B", "C", "D", "E", "F", "G", "H", "K", "L"];

impl HamiltonianParams {
    pub fn from_array(v: [C64; 10]) -> Self {
        let [a, b, c, d, e, f, g, h, k, l] = v;
        Self { a, b, c, d, e, f, g, h, k, l }
    }

    pub fn to_array(&self) -> [C64; 10] {
        [self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h, self.k, self.l]
    }

    /// Unit vector in coefficient `i` (0 = A, ..., 9 = L).
    pub fn unit(i: usize) -> Self {
        let mut v = [real(0.0); 10];
        v[i] = real(1.0);
        Self::from_array(v)
    }
}

/// Positions of A..L in the 16x16 density; values are linear in the coefficients.
pub(crate) fn hsu2_entries(p: &HamiltonianParams) -> [(usize, usize, C64); 36] {
    let HamiltonianParams { a, b, c, d, e, f, g, h, k, l } = *p;
    [
        (0, 0, a + b),
        (1, 1, a),
        (1, 4, b),
        (1, 11, f),
        (1, 14, -f),
        (2, 2, g),
        (2, 8, l),
        (3, 3, g),
        (3, 12, l),
        (4, 1, b),
        (4, 4, a),
        (4, 11, -f),
        (4, 14, f),
        (5, 5, a + b),
        (6, 6, g),
        (6, 9, l),
        (7, 7, g),
        (7, 13, l),
        (8, 2, h),
        (8, 8, k),
        (9, 6, h),
        (9, 9, k),
        (10, 10, d + e),
        (11, 1, c),
        (11, 4, -c),
        (11, 11, d),
        (11, 14, e),
        (12, 3, h),
        (12, 12, k),
        (13, 7, h),
        (13, 13, k),
        (14, 1, -c),
        (14, 4, c),
        (14, 11, e),
        (14, 14, d),
        (15, 15, d + e),
    ]
}

pub fn hsu2_density(p: &HamiltonianParams) -> LocalOperator {
    ComplexMatrix::from_entries(16, &hsu2_entries(p))
}

/// Density coefficients of models 1..12.
pub fn hsu2_row(spec: &ModelSpec) -> Result<HamiltonianParams, CatalogError> {
    spec.validate()?;
    let z = real(0.0);
    let g = |n: &str| spec.get(n);
    let row = match spec.model {
        1 => {
            let (a, d) = (g("a")?, g("d")?);
            match spec.effective_branch() {
                Some(Branch::BZero) => HamiltonianParams { g: a, k: g("c")?, l: d, ..Default::default() },
                Some(Branch::APlusCZero) => HamiltonianParams { g: a, h: g("b")?, k: -a, l: d, ..Default::default() },
                _ => HamiltonianParams { g: a, h: g("b")?, k: g("c")?, l: d, ..Default::default() },
            }
        }
        2 => {
            let (a, c, d) = (g("a")?, g("c")?, g("d")?);
            let b = if spec.effective_branch() == Some(Branch::BZero) { z } else { g("b")? };
            HamiltonianParams { d: a + c, g: a, h: b, k: c, l: d, ..Default::default() }
        }
        3 => HamiltonianParams { d: g("a")?, g: g("b")?, k: g("c")?, ..Default::default() },
        4..=7 => {
            let (rho, a, phi) = (g("rho")?, g("a")?, g("phi")?);
            let base = HamiltonianParams { g: a, h: rho * (-phi).exp(), k: rho * 2.0 - a, l: rho * phi.exp(), ..Default::default() };
            match spec.model {
                4 => HamiltonianParams { a: rho, b: -rho, ..base },
                5 => HamiltonianParams { a: rho, b: -rho, d: rho, e: -rho, ..base },
                6 => HamiltonianParams { d: rho, e: rho, ..base },
                _ => HamiltonianParams { a: rho, b: -rho, d: rho, e: rho, ..base },
            }
        }
        8..=12 => {
            let (rho, phi) = (g("rho")?, g("phi")?);
            let (em, ep) = ((-phi).exp(), phi.exp());
            match spec.model {
                8 => HamiltonianParams { a: rho, b: -rho, c: rho * em, d: -rho, e: rho, f: -rho * ep, ..Default::default() },
                9 => HamiltonianParams { a: rho, b: -rho, c: rho * em, d: rho, e: -rho, f: rho * ep, ..Default::default() },
                10 => HamiltonianParams {
                    a: rho * 1.75,
                    b: -rho,
                    c: rho * em * 0.5,
                    d: rho * 1.75,
                    e: -rho,
                    f: rho * ep * 0.5,
                    ..Default::default()
                },
                11 => HamiltonianParams {
                    a: rho,
                    b: -rho,
                    c: rho * em * 0.5,
                    d: rho,
                    e: -rho,
                    f: rho * ep * 0.5,
                    g: rho * 1.5,
                    h: -rho * 1.5,
                    k: rho * 1.5,
                    l: -rho * 1.5,
                },
                _ => HamiltonianParams { c: -rho * em, f: rho * ep, h: rho, l: -rho, ..Default::default() },
            }
        }
        m => {
            return Err(CatalogError::Constraint { model: m, reason: "not an su(2)xsu(2) model".into() });
        }
    };
    Ok(row)
}

/// Two-site density of any catalog model.
///
/// Model 14 parameters are those of its R-matrix; the density is `B K`.
/// Model 18 given by `(theta, a2)` uses the couplings `a = sin(theta)`, `b = -a2`.
pub fn build_hamiltonian_density(spec: &ModelSpec) -> Result<LocalOperator, CatalogError> {
    spec.validate()?;
    let g = |n: &str| spec.get(n);
    Ok(match spec.model {
        1..=12 => hsu2_density(&hsu2_row(spec)?),
        13 => so4::h13(g("A")?, g("B")?, g("C")?),
        14 => so4::k_operator().scale(g("B")?),
        15..=17 => fermion::h15_17(spec.model, [g("a1")?, g("a2")?, g("a3")?, g("a4")?]),
        18 => {
            let (a, b) = model18_couplings(spec)?;
            fermion::h18(a, b)
        }
        m => return Err(CatalogError::UnknownModel(m)),
    })
}

/// `(a, b)` couplings of model 18.
pub fn model18_couplings(spec: &ModelSpec) -> Result<(C64, C64), CatalogError> {
    if spec.model18_by_couplings() {
        Ok((spec.get("a")?, spec.get("b")?))
    } else {
        Ok((spec.get("theta")?.sin(), -spec.get("a2")?))
    }
}

/// Oscillator-basis coefficients C0..C9.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OscillatorCoeffs(pub [C64; 10]);

pub fn oscillator_coeffs(p: &HamiltonianParams) -> OscillatorCoeffs {
    let HamiltonianParams { a, b, c, d, e, f, g, h, k, l } = *p;
    OscillatorCoeffs([
        (b + g + k) * 0.5,
        (l - h) * 0.5,
        (c - f + h - l) * 0.5,
        (h + l - c - f) * 0.5,
        (c + f + h + l) * 0.5,
        -b,
        e,
        a * 2.0 + b - k * 2.0,
        a * 2.0 + b - g * 2.0,
        a + b + d + e - g - k,
    ])
}
