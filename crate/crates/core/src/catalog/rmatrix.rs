use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use super::{so4, Branch, CatalogError, ModelSpec};
use crate::tensor::{cplx, permutation_operator, real, ComplexMatrix, C64};

/// Points closer than this to a declared pole are refused.
pub const POLE_GUARD: f64 = 1e-6;

type Eval = dyn Fn(C64) -> ComplexMatrix + Send + Sync;

/// Spectral-parameter evaluator `u ↦ R(u)` with a declared pole set.
#[derive(Clone)]
pub struct RMatrixFn {
    label: String,
    eval: Arc<Eval>,
    poles: Vec<C64>,
    pole_note: String,
}

impl fmt::Debug for RMatrixFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RMatrixFn").field("label", &self.label).field("poles", &self.poles).finish()
    }
}

impl RMatrixFn {
    pub fn new(
        label: impl Into<String>,
        poles: Vec<C64>,
        pole_note: impl Into<String>,
        eval: impl Fn(C64) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), eval: Arc::new(eval), poles, pole_note: pole_note.into() }
    }

    /// The constant evaluator `R ≡ P`.
    pub fn permutation() -> Self {
        let p = permutation_operator(4);
        Self::new("P", Vec::new(), "entire", move |_| p.clone())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn pole_note(&self) -> &str {
        &self.pole_note
    }

    pub fn pole_distance(&self, u: C64) -> f64 {
        self.poles.iter().map(|p| (u - p).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Evaluate, refusing points near a declared pole or with non-finite entries.
    pub fn at(&self, u: C64) -> Result<ComplexMatrix, CatalogError> {
        let distance = self.pole_distance(u);
        if distance < POLE_GUARD {
            return Err(CatalogError::Pole { label: self.label.clone(), u, distance });
        }
        let m = (self.eval)(u);
        if !m.is_finite() {
            return Err(CatalogError::Pole { label: self.label.clone(), u, distance });
        }
        Ok(m)
    }

    /// Compose with a matrix map, keeping the pole set.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(C64, ComplexMatrix) -> ComplexMatrix + Send + Sync + 'static) -> Self {
        let inner = self.eval.clone();
        Self {
            label: label.into(),
            eval: Arc::new(move |u| f(u, inner(u))),
            poles: self.poles.clone(),
            pole_note: self.pole_note.clone(),
        }
    }

    /// Substitute `u ↦ s u`; poles move to `p / s`.
    pub fn rescale(&self, label: impl Into<String>, s: C64) -> Self {
        let inner = self.eval.clone();
        Self {
            label: label.into(),
            eval: Arc::new(move |u| inner(u * s)),
            poles: self.poles.iter().map(|p| p / s).collect(),
            pole_note: format!("{} (rescaled)", self.pole_note),
        }
    }
}

/// Coefficients `r_1..r_10` placed on the su(2)xsu(2) template layout.
pub fn r_template(r: &[C64; 10]) -> ComplexMatrix {
    let [r1, r2, r3, r4, r5, r6, r7, r8, r9, r10] = *r;
    ComplexMatrix::from_entries(
        16,
        &[
            (0, 0, r1 + r2),
            (1, 1, r1),
            (1, 4, r2),
            (1, 11, -r8),
            (1, 14, r8),
            (2, 2, r4),
            (2, 8, r10),
            (3, 3, r4),
            (3, 12, r10),
            (4, 1, r2),
            (4, 4, r1),
            (4, 11, r8),
            (4, 14, -r8),
            (5, 5, r1 + r2),
            (6, 6, r4),
            (6, 9, r10),
            (7, 7, r4),
            (7, 13, r10),
            (8, 2, r7),
            (8, 8, r3),
            (9, 6, r7),
            (9, 9, r3),
            (10, 10, r5 + r6),
            (11, 1, -r9),
            (11, 4, r9),
            (11, 11, r5),
            (11, 14, r6),
            (12, 3, r7),
            (12, 12, r3),
            (13, 7, r7),
            (13, 13, r3),
            (14, 1, r9),
            (14, 4, -r9),
            (14, 11, r6),
            (14, 14, r5),
            (15, 15, r5 + r6),
        ],
    )
}

fn tmpl(pairs: &[(usize, C64)]) -> ComplexMatrix {
    let mut r = [real(0.0); 10];
    for &(i, v) in pairs {
        r[i - 1] = v;
    }
    r_template(&r)
}

fn cot(z: C64) -> C64 {
    z.cos() / z.sin()
}

/// `(e^{x u} - 1) / x`, continuous at `x = 0`.
fn exp_ratio(x: C64, u: C64) -> C64 {
    if x.norm() < 1e-300 {
        u
    } else {
        ((x * u).exp() - 1.0) / x
    }
}

const K_RANGE: std::ops::RangeInclusive<i32> = -3..=3;

fn lattice(base: C64, step: C64) -> Vec<C64> {
    K_RANGE.map(|k| base + step * k as f64).collect()
}

/// Closed-form R-matrix of a catalog model.
pub fn build_r_matrix(spec: &ModelSpec) -> Result<RMatrixFn, CatalogError> {
    spec.validate()?;
    let g = |n: &str| spec.get(n);
    let label = spec.label();
    let one = real(1.0);
    let r = match spec.model {
        1 => match spec.effective_branch() {
            Some(Branch::BZero) => {
                let (a, c, d) = (g("a")?, g("c")?, g("d")?);
                RMatrixFn::new(label, Vec::new(), "entire", move |u| {
                    tmpl(&[(2, one), (6, one), (3, d * exp_ratio(a + c, u)), (7, (a * u).exp()), (10, (c * u).exp())])
                })
            }
            Some(Branch::APlusCZero) => {
                let (a, b, d) = (g("a")?, g("b")?, g("d")?);
                let s = (b * d).sqrt();
                let ratio = (d / b).sqrt();
                let poles = lattice(real(FRAC_PI_2) / s, real(PI) / s);
                RMatrixFn::new(label, poles, "cos(sqrt(bd) u) = 0", move |u| {
                    let r3 = ratio * (s * u).tan();
                    let r7 = (a * u).exp() / (s * u).cos();
                    tmpl(&[(2, one), (6, one), (3, r3), (4, b / d * r3), (7, r7), (10, (-a * u * 2.0).exp() * r7)])
                })
            }
            _ => {
                let (a, b, c, d) = (g("a")?, g("b")?, g("c")?, g("d")?);
                let eta = ((a + c) / ((b * d).sqrt() * 2.0)).asin();
                let slope = (a + c) * cot(eta) * 0.5;
                // zeros of sin g(u), g(u) = π/2 - η - slope u
                let poles = lattice((real(FRAC_PI_2) - eta) / slope, real(-PI) / slope);
                RMatrixFn::new(label, poles, "sin g(u) = 0", move |u| {
                    let gu = real(FRAC_PI_2) - eta - slope * u;
                    let r3 = (a + c) / (b * 2.0) * (cot(eta) * cot(gu) - 1.0);
                    let r4 = b * 2.0 / (a + c) * eta.sin() / gu.sin() * (gu + eta).cos();
                    let r7 = ((a - c) * u * 0.5).exp() * eta.cos() / gu.sin();
                    let r10 = (-(a - c) * u).exp() * r7;
                    tmpl(&[(2, one), (6, one), (3, r3), (4, r4), (7, r7), (10, r10)])
                })
            }
        },
        2 => match spec.effective_branch() {
            Some(Branch::BZero) => {
                let (a, c, d) = (g("a")?, g("c")?, g("d")?);
                RMatrixFn::new(label, Vec::new(), "entire", move |u| {
                    tmpl(&[
                        (2, one),
                        (3, d * exp_ratio(a + c, u)),
                        (6, ((a + c) * u).exp()),
                        (7, (a * u).exp()),
                        (10, (c * u).exp()),
                    ])
                })
            }
            _ => {
                let (a, b, c, d) = (g("a")?, g("b")?, g("c")?, g("d")?);
                let eta = ((a + c) / ((b * d).sqrt() * 2.0)).acosh();
                let slope = (a + c) * eta.tanh() * 0.5;
                // zeros of sinh(η - slope u)
                let poles = lattice(eta / slope, cplx(0.0, -PI) / slope);
                RMatrixFn::new(label, poles, "sinh(eta - u (a+c) tanh(eta)/2) = 0", move |u| {
                    let gg = one / (eta - slope * u).sinh();
                    let h = (slope * u).sinh();
                    let r3 = (a + c) / (b * 2.0) * gg * h / eta.cosh();
                    let r4 = b * 2.0 / (a + c) * gg * h * eta.cosh();
                    let r6 = gg * (slope * u + eta).sinh();
                    let r7 = ((a - c) * u * 0.5).exp() * gg * eta.sinh();
                    let r10 = ((c - a) * u * 0.5).exp() * gg * eta.sinh();
                    tmpl(&[(2, one), (3, r3), (4, r4), (6, r6), (7, r7), (10, r10)])
                })
            }
        },
        3 => {
            let (a, b, c) = (g("a")?, g("b")?, g("c")?);
            RMatrixFn::new(label, Vec::new(), "entire", move |u| {
                tmpl(&[(2, one), (6, (a * u).exp()), (7, (b * u).exp()), (10, (c * u).exp())])
            })
        }
        4..=7 => {
            let (rho, a, phi) = (g("rho")?, g("a")?, g("phi")?);
            let model = spec.model;
            RMatrixFn::new(label, vec![one / rho], "u = 1/rho", move |u| {
                let q = one / (one - u * rho);
                let p = u * rho * q;
                let r7 = (u * (a - rho)).exp() * q;
                let r10 = (u * (rho - a)).exp() * q;
                match model {
                    4 => tmpl(&[(1, -p), (2, q), (3, phi.exp() * p), (4, (-phi).exp() * p), (6, one), (7, r7), (10, r10)]),
                    5 => tmpl(&[(1, -p), (5, -p), (2, q), (6, q), (3, phi.exp() * p), (4, (-phi).exp() * p), (7, r7), (10, r10)]),
                    6 => tmpl(&[(2, one), (6, q), (5, p), (3, phi.exp() * p), (4, (-phi).exp() * p), (7, r7), (10, r10)]),
                    _ => tmpl(&[(1, -p), (5, p), (2, q), (6, q), (3, phi.exp() * p), (4, (-phi).exp() * p), (7, r7), (10, r10)]),
                }
            })
        }
        8 => {
            let (rho, phi) = (g("rho")?, g("phi")?);
            let poles = lattice(real(FRAC_PI_2) / rho, real(PI) / rho);
            RMatrixFn::new(label, poles, "cos(rho u) = 0", move |u| {
                let r1 = -(u * rho).tan();
                tmpl(&[(1, r1), (5, -r1), (2, one - r1), (6, one + r1), (7, one), (10, one), (8, phi.exp() * r1), (9, -(-phi).exp() * r1)])
            })
        }
        9 => {
            let (rho, phi) = (g("rho")?, g("phi")?);
            let s3 = 3f64.sqrt();
            let shift = (2.0 - s3).ln();
            let poles = lattice(real(-shift) / (rho * s3), cplx(0.0, PI) / (rho * s3));
            RMatrixFn::new(label, poles, "sinh(sqrt(3) rho u + log(2 - sqrt(3))) = 0", move |u| {
                let r1 = 2.0 + s3 / (rho * u * s3 + shift).tanh();
                tmpl(&[(1, r1), (5, r1), (2, one - r1), (6, one - r1), (7, one), (10, one), (8, -phi.exp() * r1), (9, -(-phi).exp() * r1)])
            })
        }
        10 => {
            let (rho, phi) = (g("rho")?, g("phi")?);
            let poles = lattice(real(4f64.ln()) / (rho * 1.5), cplx(0.0, 2.0 * PI) / (rho * 1.5));
            RMatrixFn::new(label, poles, "exp(3 rho u / 2) = 4", move |u| {
                let x = (rho * u * 1.5).exp();
                let r1 = (x - 1.0) * 2.0 / (x - 4.0);
                let r2 = -(x + 2.0) / (x - 4.0);
                let r7 = (-rho * u * 0.75).exp();
                let r8 = -(rho * u * 0.75 + phi).exp() * r1 * 0.5;
                let r9 = (-phi * 2.0).exp() * r8;
                tmpl(&[(1, r1), (5, r1), (2, r2), (6, r2), (7, r7), (10, r7), (8, r8), (9, r9)])
            })
        }
        11 => {
            let (rho, phi) = (g("rho")?, g("phi")?);
            RMatrixFn::new(label, vec![real(2.0) / rho, real(2.0) / (rho * 3.0)], "u = 2/rho, 2/(3 rho)", move |u| {
                let x = rho * u;
                let f = one / ((x - 2.0) * (x * 3.0 - 2.0));
                let r1 = x * (x * 3.0 - 4.0) * f;
                let r2 = (one - x) * 4.0 * f;
                let r7 = -2.0 / (x * 3.0 - 2.0);
                let r3 = -x * 1.5 * r7;
                let r8 = x * 2.0 * phi.exp() * f;
                let r9 = (-phi * 2.0).exp() * r8;
                tmpl(&[(1, r1), (5, r1), (2, r2), (6, r2), (3, r3), (4, r3), (7, r7), (10, r7), (8, r8), (9, r9)])
            })
        }
        12 => {
            let (rho, phi) = (g("rho")?, g("phi")?);
            let poles = lattice(cplx(0.0, FRAC_PI_2) / rho, cplx(0.0, PI) / rho);
            RMatrixFn::new(label, poles, "cosh(rho u) = 0", move |u| {
                let t = (u * rho).tanh();
                let s = one / (u * rho).cosh();
                tmpl(&[(1, t * t), (5, t * t), (3, -t), (4, t), (2, s * s), (6, s * s), (7, s), (10, s), (8, phi.exp() * t * s), (9, -(-phi).exp() * t * s)])
            })
        }
        13 => {
            let (a, b, c) = (g("A")?, g("B")?, g("C")?);
            let (id, p, k, e) = (ComplexMatrix::identity(16), permutation_operator(4), so4::k_operator(), so4::epsilon_operator());
            let poles = if b.norm() > 0.0 { vec![one / b] } else { Vec::new() };
            RMatrixFn::new(label, poles, "u = 1/B", move |u| {
                let den = one - b * u;
                let mut m = id.scale(u * (u * (b * b - c * c) - b) / den);
                m.add_scaled(&p, one);
                m.add_scaled(&k, u * b / den);
                m.add_scaled(&e, -u * c / den);
                m.scale(one + a * u)
            })
        }
        14 => {
            let (a, b) = (g("A")?, g("B")?);
            let (p, k) = (permutation_operator(4), so4::k_operator());
            let s3 = 3f64.sqrt();
            let poles = if b.norm() > 0.0 {
                // tanh(sqrt(3) B u) = sqrt(3)
                let z0 = real(s3).atanh();
                lattice(z0 / (b * s3), cplx(0.0, PI) / (b * s3))
            } else {
                Vec::new()
            };
            RMatrixFn::new(label, poles, "tanh(sqrt(3) B u) = sqrt(3)", move |u| {
                let th = (b * u * s3).tanh();
                let t = th / (s3 - th);
                let mut m = p.scale(one - t);
                m.add_scaled(&k, t);
                m.scale(one + a * u)
            })
        }
        15..=17 => return Err(CatalogError::NoRMatrix(spec.model)),
        18 => {
            if spec.model18_by_couplings() {
                return Err(CatalogError::MissingParam { model: 18, name: "theta".into() });
            }
            let (th, a2) = (g("theta")?, g("a2")?);
            let ct = th.cos();
            let poles = lattice((real(FRAC_PI_2) - th) / ct, real(PI) / ct);
            RMatrixFn::new(label, poles, "cos(theta + u cos(theta)) = 0", move |u| r18(th, a2, ct, u))
        }
        m => return Err(CatalogError::UnknownModel(m)),
    };
    Ok(r)
}

fn r18(th: C64, a2: C64, ct: C64, u: C64) -> ComplexMatrix {
    let one = real(1.0);
    let w = th + u * ct;
    let r1 = w.cos();
    let r3 = (u * ct).sin();
    let r2 = r3 * r3 / r1;
    let r4 = ct * (u * ct).cos();
    let r5 = -ct * w.tan() * r3;
    let r7 = ct * (u * (a2 + th.sin())).exp();
    let s7 = ct * (-u * (a2 + th.sin())).exp();
    let r6 = r7 * r7 / r1;
    let r8 = r7 / r1 * r3;
    let r9 = s7 / r1 * r3;
    let r10 = th.sin() * r3;
    let r11 = ((th * 2.0).cos() - (u * ct * 2.0).cos() + (w * 2.0).cos() + 3.0) * 0.25 / r1;
    let r12 = s7 * s7 / r1;
    let f = (a2 * u * 2.0 + one) / w.cos();
    let m = ComplexMatrix::from_entries(
        16,
        &[
            (0, 0, r1),
            (1, 1, r2),
            (1, 4, r6),
            (1, 11, -r8),
            (1, 14, r8),
            (2, 2, r3),
            (2, 8, r7),
            (3, 3, r3),
            (3, 12, r7),
            (4, 1, r12),
            (4, 4, r2),
            (4, 11, -r9),
            (4, 14, r9),
            (5, 5, r1),
            (6, 6, -r3),
            (6, 9, s7),
            (7, 7, -r3),
            (7, 13, s7),
            (8, 2, s7),
            (8, 8, r3),
            (9, 6, r7),
            (9, 9, -r3),
            (10, 10, r4),
            (10, 15, r10),
            (11, 1, r9),
            (11, 4, r8),
            (11, 11, r5),
            (11, 14, r11),
            (12, 3, s7),
            (12, 12, r3),
            (13, 7, r7),
            (13, 13, -r3),
            (14, 1, -r9),
            (14, 4, -r8),
            (14, 11, r11),
            (14, 14, r5),
            (15, 10, r10),
            (15, 15, r4),
        ],
    );
    m.scale(f)
}

/// Nonzero positions of the r_1..r_10 template, for layout checks.
pub fn template_support() -> Vec<(usize, usize)> {
    let r = r_template(&std::array::from_fn(|i| real(1.0 + i as f64 * 0.37)));
    let mut out = Vec::new();
    for i in 0..16 {
        for j in 0..16 {
            if r[(i, j)].norm() > 0.0 {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_at_origin() {
        let p = permutation_operator(4);
        for spec in ModelSpec::catalog() {
            if matches!(spec.model, 15..=17) {
                continue;
            }
            let r = build_r_matrix(&spec).unwrap();
            let res = r.at(real(0.0)).unwrap().max_abs_diff(&p);
            assert!(res < 1e-12, "{} residual {res:e}", spec.label());
        }
    }

    #[test]
    fn model3_functions() {
        let spec = ModelSpec::real(3, &[("a", 0.3), ("b", 0.5), ("c", 0.7)]);
        let r = build_r_matrix(&spec).unwrap();
        let u = 0.4;
        let m = r.at(real(u)).unwrap();
        let want = tmpl(&[(2, real(1.0)), (6, real((0.3 * u).exp())), (7, real((0.5 * u).exp())), (10, real((0.7 * u).exp()))]);
        assert!(m.approx_eq(&want, 1e-15));
    }

    #[test]
    fn pattern_within_template() {
        let support = template_support();
        for spec in ModelSpec::catalog().into_iter().filter(|s| s.model <= 12) {
            let m = build_r_matrix(&spec).unwrap().at(real(0.23)).unwrap();
            for i in 0..16 {
                for j in 0..16 {
                    if m[(i, j)].norm() > 0.0 {
                        assert!(support.contains(&(i, j)), "{} entry ({i},{j})", spec.label());
                    }
                }
            }
        }
    }

    #[test]
    fn poles_are_refused() {
        let spec = ModelSpec::real(4, &[("rho", 0.5), ("a", 0.3), ("phi", 0.0)]);
        let r = build_r_matrix(&spec).unwrap();
        assert!(matches!(r.at(real(2.0)), Err(CatalogError::Pole { .. })));
        assert!(r.at(real(1.9)).is_ok());
        assert!(matches!(build_r_matrix(&ModelSpec::default_for(15, None).unwrap()), Err(CatalogError::NoRMatrix(15))));
    }

    #[test]
    fn declared_poles_are_singular() {
        for spec in ModelSpec::catalog() {
            let Ok(r) = build_r_matrix(&spec) else { continue };
            for &p in r.poles().iter().take(3) {
                let near = (r.eval)(p + cplx(1e-7, 1e-7)).max_abs();
                assert!(near > 1e3, "{} pole {p} gives {near}", spec.label());
            }
        }
    }
}
