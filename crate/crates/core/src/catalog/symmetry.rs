use serde::{Deserialize, Serialize};

use crate::tensor::{cplx, kron, real, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryRep {
    /// ρ₂ ⊕ 0 for the left factor, 0 ⊕ ρ₂ for the right factor.
    #[serde(rename = "2+1+1")]
    TwoOneOne,
    /// 1 ⊗ ρ₂ for the left factor, ρ₂ ⊗ 1 for the right factor.
    #[serde(rename = "2+2")]
    TwoTwo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// One of the six generators t^L_{1,2,3}, t^R_{1,2,3}; `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub side: Side,
    pub index: usize,
}

impl Generator {
    pub fn all() -> [Generator; 6] {
        let g = |side, index| Generator { side, index };
        [g(Side::Left, 1), g(Side::Left, 2), g(Side::Left, 3), g(Side::Right, 1), g(Side::Right, 2), g(Side::Right, 3)]
    }
}

/// ρ₂(t_i) = -(i/2) σ_i, so that [t_i, t_j] = ε_ijk t_k.
pub fn rho2(i: usize) -> ComplexMatrix {
    let entries = match i {
        1 => [real(0.0), cplx(0.0, -0.5), cplx(0.0, -0.5), real(0.0)],
        2 => [real(0.0), real(-0.5), real(0.5), real(0.0)],
        3 => [cplx(0.0, -0.5), real(0.0), real(0.0), cplx(0.0, 0.5)],
        _ => panic!("su(2) generator index must be 1, 2 or 3"),
    };
    ComplexMatrix::from_vec(2, 2, entries.to_vec()).expect("2x2")
}

fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.rows(), b.rows());
    ComplexMatrix::from_fn(n + m, n + m, |r, c| {
        if r < n && c < n {
            a[(r, c)]
        } else if r >= n && c >= n {
            b[(r - n, c - n)]
        } else {
            real(0.0)
        }
    })
}

/// 4x4 image of a generator.
pub fn representation(rep: SymmetryRep, g: Generator) -> ComplexMatrix {
    let t = rho2(g.index);
    let z = ComplexMatrix::zeros(2, 2);
    let i2 = ComplexMatrix::identity(2);
    match (rep, g.side) {
        (SymmetryRep::TwoOneOne, Side::Left) => direct_sum(&t, &z),
        (SymmetryRep::TwoOneOne, Side::Right) => direct_sum(&z, &t),
        (SymmetryRep::TwoTwo, side) => {
            let u = super::so4::factor_embedding();
            let f = if side == Side::Left { kron(&i2, &t) } else { kron(&t, &i2) };
            &(&u * &f) * &u.transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::commutator;

    fn levi(i: usize, j: usize, k: usize) -> f64 {
        match (i, j, k) {
            (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
            (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn structure_constants_and_commuting_factors() {
        for rep in [SymmetryRep::TwoOneOne, SymmetryRep::TwoTwo] {
            for side in [Side::Left, Side::Right] {
                for i in 1..=3 {
                    for j in 1..=3 {
                        let ti = representation(rep, Generator { side, index: i });
                        let tj = representation(rep, Generator { side, index: j });
                        let mut want = ComplexMatrix::zeros(4, 4);
                        for k in 1..=3 {
                            want.add_scaled(&representation(rep, Generator { side, index: k }), real(levi(i, j, k)));
                        }
                        assert!(commutator(&ti, &tj).unwrap().approx_eq(&want, 1e-12));
                    }
                }
            }
            for i in 1..=3 {
                for j in 1..=3 {
                    let l = representation(rep, Generator { side: Side::Left, index: i });
                    let r = representation(rep, Generator { side: Side::Right, index: j });
                    assert_eq!(commutator(&l, &r).unwrap().max_abs(), 0.0);
                }
            }
        }
    }

    fn u_label(x: usize) -> usize {
        crate::catalog::so4::FACTOR_LABEL[x]
    }

    #[test]
    fn block_shapes() {
        for i in 1..=3 {
            let l = representation(SymmetryRep::TwoOneOne, Generator { side: Side::Left, index: i });
            for r in 2..4 {
                for c in 2..4 {
                    assert_eq!(l[(r, c)], real(0.0));
                }
            }
            let l22 = representation(SymmetryRep::TwoTwo, Generator { side: Side::Left, index: i });
            let u = crate::catalog::so4::factor_embedding();
            let f = kron(&ComplexMatrix::identity(2), &rho2(i));
            for x in 0..4 {
                for y in 0..4 {
                    assert_eq!(l22[(u_label(x), u_label(y))], f[(x, y)]);
                }
            }
            assert_eq!(&u.transpose() * &u, ComplexMatrix::identity(4));
        }
    }
}
