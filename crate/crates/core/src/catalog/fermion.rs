//! Two-site fermionic oscillators on C^4 ⊗ C^4.
//!
//! Site states: φ1 = |0⟩, φ2 = c†↑ c†↓ |0⟩, ψ1 = c†↑ |0⟩, ψ2 = c†↓ |0⟩.
//! The site-2 operators carry the parity string `Q = diag(1, 1, -1, -1)` on site 1.

use crate::tensor::{kron, real, ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

pub const SPINS: [Spin; 2] = [Spin::Up, Spin::Down];

fn single_site_creation(s: Spin) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    match s {
        Spin::Up => {
            m[(2, 0)] = real(1.0);
            m[(1, 3)] = real(1.0);
        }
        Spin::Down => {
            m[(3, 0)] = real(1.0);
            m[(1, 2)] = real(-1.0);
        }
    }
    m
}

pub fn parity() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[real(1.0), real(1.0), real(-1.0), real(-1.0)])
}

/// Annihilator `c_{s,site}` with `site` in {1, 2}.
pub fn annihilator(s: Spin, site: usize) -> ComplexMatrix {
    let c = single_site_creation(s).transpose();
    match site {
        1 => kron(&c, &ComplexMatrix::identity(4)),
        2 => kron(&parity(), &c),
        _ => panic!("two-site oscillators live on sites 1 and 2"),
    }
}

pub fn creator(s: Spin, site: usize) -> ComplexMatrix {
    annihilator(s, site).adjoint()
}

pub fn number(s: Spin, site: usize) -> ComplexMatrix {
    &creator(s, site) * &annihilator(s, site)
}

fn product(ops: &[ComplexMatrix]) -> ComplexMatrix {
    ops.iter().skip(1).fold(ops[0].clone(), |acc, m| &acc * m)
}

/// Σ_s (c†_{s,1} c_{s,2} + c†_{s,2} c_{s,1}).
pub fn k_hub() -> ComplexMatrix {
    let mut k = ComplexMatrix::zeros(16, 16);
    for s in SPINS {
        k.add_scaled(&(&creator(s, 1) * &annihilator(s, 2)), real(1.0));
        k.add_scaled(&(&creator(s, 2) * &annihilator(s, 1)), real(1.0));
    }
    k
}

/// The two pair-hopping terms, in the order of their couplings A1, A2.
pub fn pair_terms() -> [ComplexMatrix; 2] {
    use Spin::*;
    [
        product(&[creator(Up, 1), creator(Down, 1), annihilator(Up, 2), annihilator(Down, 2)]),
        product(&[creator(Up, 2), creator(Down, 2), annihilator(Up, 1), annihilator(Down, 1)]),
    ]
}

/// The four spin-flip terms, in the order of their couplings A3..A6.
pub fn flip_terms() -> [ComplexMatrix; 4] {
    use Spin::*;
    [
        product(&[creator(Up, 1), creator(Down, 2), annihilator(Down, 1), annihilator(Up, 2)]),
        product(&[creator(Down, 1), creator(Up, 2), annihilator(Up, 1), annihilator(Down, 2)]),
        product(&[creator(Up, 1), creator(Up, 2), annihilator(Down, 1), annihilator(Down, 2)]),
        product(&[creator(Down, 1), creator(Down, 2), annihilator(Up, 1), annihilator(Up, 2)]),
    ]
}

/// The sixteen potential monomials, in the order of their couplings B1..B16.
pub fn potential_terms() -> [ComplexMatrix; 16] {
    use Spin::*;
    let nu1 = number(Up, 1);
    let nd1 = number(Down, 1);
    let nu2 = number(Up, 2);
    let nd2 = number(Down, 2);
    let one = ComplexMatrix::identity(16);
    let p = |xs: &[&ComplexMatrix]| xs.iter().skip(1).fold(xs[0].clone(), |acc, m| &acc * *m);
    [
        one,
        nu1.clone(),
        nd1.clone(),
        p(&[&nu1, &nd1]),
        nu2.clone(),
        p(&[&nu1, &nu2]),
        p(&[&nd1, &nu2]),
        p(&[&nu1, &nd1, &nu2]),
        nd2.clone(),
        p(&[&nu1, &nd2]),
        p(&[&nd1, &nd2]),
        p(&[&nu1, &nd1, &nd2]),
        p(&[&nu2, &nd2]),
        p(&[&nu1, &nu2, &nd2]),
        p(&[&nd1, &nu2, &nd2]),
        p(&[&nu1, &nd1, &nu2, &nd2]),
    ]
}

pub const HUBBARD_SYMBOLS: [&str; 22] = [
    "A1", "A2", "A3", "A4", "A5", "A6", "B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8", "B9", "B10", "B11", "B12",
    "B13", "B14", "B15", "B16",
];

/// Basis of the 22-parameter ansatz `K_Hub + K_pair + K_flip + V`, one matrix per symbol.
pub fn hubbard_ansatz_basis() -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = pair_terms().into_iter().collect();
    out.extend(flip_terms());
    out.extend(potential_terms());
    out
}

/// `K_Hub + Σ x_i M_i` over the ansatz basis.
pub fn hubbard_ansatz_density(x: &[C64; 22]) -> ComplexMatrix {
    let mut h = k_hub();
    for (m, &v) in hubbard_ansatz_basis().iter().zip(x) {
        h.add_scaled(m, v);
    }
    h
}

/// Ansatz coordinates of models 15..17.
pub fn h15_17_coords(model: u8, a: [C64; 4]) -> [C64; 22] {
    let mut x = [real(0.0); 22];
    let b = |i: usize| 5 + i;
    let [a1, a2, a3, a4] = a;
    // up species
    if model == 17 {
        x[b(2)] += a1;
        x[b(5)] += a1;
    } else {
        x[b(2)] += a1;
        x[b(5)] += a1;
        x[b(6)] -= a1 * 2.0;
    }
    x[b(2)] += a2;
    x[b(5)] -= a2;
    // down species
    if model == 15 {
        x[b(3)] += a3;
        x[b(9)] += a3;
        x[b(11)] -= a3 * 2.0;
    } else {
        x[b(3)] += a3;
        x[b(9)] += a3;
    }
    x[b(3)] += a4;
    x[b(9)] -= a4;
    x
}

/// Ansatz coordinates of model 18.
pub fn h18_coords(a: C64, bb: C64) -> [C64; 22] {
    let mut x = [real(0.0); 22];
    x[2..6].fill(a);
    let b = |i: usize| 5 + i;
    x[b(2)] = a * 2.0 - bb;
    x[b(3)] = a * 2.0 - bb;
    x[b(5)] = bb;
    x[b(9)] = bb;
    for i in [6, 7, 10, 11] {
        x[b(i)] = -a;
    }
    x
}

/// Densities of models 15, 16, 17 written directly from number operators.
pub fn h15_17(model: u8, a: [C64; 4]) -> ComplexMatrix {
    use Spin::*;
    let du = &number(Up, 1) - &number(Up, 2);
    let su = &number(Up, 1) + &number(Up, 2);
    let dd = &number(Down, 1) - &number(Down, 2);
    let sd = &number(Down, 1) + &number(Down, 2);
    let mut h = k_hub();
    if model == 17 {
        h.add_scaled(&su, a[0]);
    } else {
        h.add_scaled(&(&du * &du), a[0]);
    }
    h.add_scaled(&du, a[1]);
    if model == 15 {
        h.add_scaled(&(&dd * &dd), a[2]);
    } else {
        h.add_scaled(&sd, a[2]);
    }
    h.add_scaled(&dd, a[3]);
    h
}

/// `K_Hub + a K_flip + (2a - b) N1 + b N2 - a N1 N2` with all flip couplings equal.
pub fn h18(a: C64, b: C64) -> ComplexMatrix {
    use Spin::*;
    let n1 = &number(Up, 1) + &number(Down, 1);
    let n2 = &number(Up, 2) + &number(Down, 2);
    let mut h = k_hub();
    for f in flip_terms() {
        h.add_scaled(&f, a);
    }
    h.add_scaled(&n1, a * 2.0 - b);
    h.add_scaled(&n2, b);
    h.add_scaled(&(&n1 * &n2), -a);
    h
}

/// Single-species pieces of models 15..17 on C^2 ⊗ C^2 (basis |0⟩, |1⟩), for the separability check.
pub fn species_density(model: u8, s: Spin, a: [C64; 4]) -> ComplexMatrix {
    let cdag = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).expect("2x2");
    let z = ComplexMatrix::diagonal(&[real(1.0), real(-1.0)]);
    let i2 = ComplexMatrix::identity(2);
    let c1 = kron(&cdag.transpose(), &i2);
    let c2 = kron(&z, &cdag.transpose());
    let n1 = &c1.adjoint() * &c1;
    let n2 = &c2.adjoint() * &c2;
    let mut h = &(&c1.adjoint() * &c2) + &(&c2.adjoint() * &c1);
    let diff = &n1 - &n2;
    let sum = &n1 + &n2;
    let (quad, lin, squared) = match s {
        Spin::Up => (a[0], a[1], model != 17),
        Spin::Down => (a[2], a[3], model == 15),
    };
    let quad_op = if squared { &diff * &diff } else { sum };
    h.add_scaled(&quad_op, quad);
    h.add_scaled(&diff, lin);
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anti(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        &(a * b) + &(b * a)
    }

    #[test]
    fn canonical_anticommutators() {
        let one = ComplexMatrix::identity(16);
        let zero = ComplexMatrix::zeros(16, 16);
        for s in SPINS {
            for i in 1..=2 {
                for t in SPINS {
                    for j in 1..=2 {
                        let want = if s == t && i == j { &one } else { &zero };
                        assert!(anti(&creator(s, i), &annihilator(t, j)).approx_eq(want, 0.0));
                        assert!(anti(&annihilator(s, i), &annihilator(t, j)).approx_eq(&zero, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn states_match_oscillator_labels() {
        let vac: Vec<C64> = (0..4).map(|i| real(if i == 0 { 1.0 } else { 0.0 })).collect();
        let up = single_site_creation(Spin::Up);
        let dn = single_site_creation(Spin::Down);
        assert_eq!(up.mul_vec(&vac)[2], real(1.0));
        assert_eq!(dn.mul_vec(&vac)[3], real(1.0));
        assert_eq!((&up * &dn).mul_vec(&vac)[1], real(1.0));
    }

    #[test]
    fn coordinates_reproduce_direct_densities() {
        let a = [C64::new(0.3, 0.1), real(0.7), real(-0.4), C64::new(0.2, -0.3)];
        for m in 15..=17 {
            let direct = h15_17(m, a);
            let via = hubbard_ansatz_density(&h15_17_coords(m, a));
            assert!(direct.approx_eq(&via, 1e-14), "model {m}");
        }
        let (x, y) = (C64::new(0.37, 0.0), C64::new(-0.21, 0.05));
        assert!(h18(x, y).approx_eq(&hubbard_ansatz_density(&h18_coords(x, y)), 1e-14));
    }

    #[test]
    fn models_15_to_17_separate() {
        let a = [real(0.3), real(0.7), real(0.4), real(-0.2)];
        for m in 15..=17 {
            let hu = species_density(m, Spin::Up, a);
            let hd = species_density(m, Spin::Down, a);
            // site ordering (up1 dn1)(up2 dn2) vs (up1 up2)(dn1 dn2): compare spectra
            let mut sum: Vec<f64> = Vec::new();
            let eu = crate::tensor::eigen_spectrum(&hu).unwrap();
            let ed = crate::tensor::eigen_spectrum(&hd).unwrap();
            for x in &eu {
                for y in &ed {
                    sum.push((x + y).re);
                }
            }
            let mut full: Vec<f64> = crate::tensor::eigen_spectrum(&h15_17(m, a)).unwrap().iter().map(|z| z.re).collect();
            sum.sort_by(f64::total_cmp);
            full.sort_by(f64::total_cmp);
            for (p, q) in sum.iter().zip(&full) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }
}
