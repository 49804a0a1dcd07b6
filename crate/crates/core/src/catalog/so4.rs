//! Operators for the so(4) models, with C^4 = C^2_a ⊗ C^2_b.
//!
//! The factor state `2a + b` is the basis state `FACTOR_LABEL[2a + b]`, so the excitation number
//! of a site is `a + b` and every operator here conserves it.

use super::{representation, Generator, Side, SymmetryRep};
use crate::tensor::{kron, permutation_operator, real, ComplexMatrix, C64};

/// φ₁ = |00⟩, ψ₁ = |01⟩, ψ₂ = |10⟩, φ₂ = |11⟩.
pub const FACTOR_LABEL: [usize; 4] = [0, 2, 3, 1];

/// Permutation sending factor state `2a + b` to its basis label.
pub fn factor_embedding() -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(4, 4);
    for (x, &label) in FACTOR_LABEL.iter().enumerate() {
        u[(label, x)] = real(1.0);
    }
    u
}

fn factor_permutation(swap_a: bool) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(16, 16);
    for i in 0..4 {
        for j in 0..4 {
            let (a1, b1) = (i / 2, i % 2);
            let (a2, b2) = (j / 2, j % 2);
            let (x1, x2) = if swap_a { ((a2, b1), (a1, b2)) } else { ((a1, b2), (a2, b1)) };
            let row = FACTOR_LABEL[2 * x1.0 + x1.1] * 4 + FACTOR_LABEL[2 * x2.0 + x2.1];
            m[(row, FACTOR_LABEL[i] * 4 + FACTOR_LABEL[j])] = real(1.0);
        }
    }
    m
}

/// Swap of the `a` factors between the two sites.
pub fn p_a() -> ComplexMatrix {
    factor_permutation(true)
}

/// Swap of the `b` factors between the two sites.
pub fn p_b() -> ComplexMatrix {
    factor_permutation(false)
}

/// `K = (1 - P_a)(1 - P_b)`.
pub fn k_operator() -> ComplexMatrix {
    let one = ComplexMatrix::identity(16);
    &(&one - &p_a()) * &(&one - &p_b())
}

/// `E = P_a - P_b`.
pub fn epsilon_operator() -> ComplexMatrix {
    &p_a() - &p_b()
}

/// `A 1 - B P + B K + C E`.
pub fn h13(a: C64, b: C64, c: C64) -> ComplexMatrix {
    let mut h = ComplexMatrix::identity(16).scale(a);
    h.add_scaled(&permutation_operator(4), -b);
    h.add_scaled(&k_operator(), b);
    h.add_scaled(&epsilon_operator(), c);
    h
}

/// `A 1 + 2 Σᵢ [(B + C) tᴸᵢ⊗tᴸᵢ + (B - C) tᴿᵢ⊗tᴿᵢ]` in the `2⊕2` representation.
pub fn two_xxx_form(a: C64, b: C64, c: C64) -> ComplexMatrix {
    let mut h = ComplexMatrix::identity(16).scale(a);
    for index in 1..=3 {
        for (side, coeff) in [(Side::Left, b + c), (Side::Right, b - c)] {
            let t = representation(SymmetryRep::TwoTwo, Generator { side, index });
            h.add_scaled(&kron(&t, &t), coeff * 2.0);
        }
    }
    h
}
