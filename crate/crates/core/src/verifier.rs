//! Numeric checks of R-matrix properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{
    build_hamiltonian_density, build_r_matrix, representation, symmetry_rep_for, CatalogError, Generator, LocalOperator,
    ModelSpec, RMatrixFn, SymmetryRep,
};
use crate::grading;
use crate::tensor::{commutator, kron, permutation_operator, real, ComplexMatrix, C64};

/// Finite-difference step for Hamiltonian extraction.
pub const EXTRACTION_STEP: f64 = 1e-4;
pub const GRID_POINTS: usize = 20;
pub const GRID_RADIUS: f64 = 0.5;
pub const GRID_POLE_MARGIN: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 20_190_912;

/// `P₂₃ (R ⊗ 1) P₂₃`.
pub fn leg13(r: &ComplexMatrix) -> ComplexMatrix {
    let p23 = kron(&ComplexMatrix::identity(4), &permutation_operator(4));
    &(&p23 * &kron(r, &ComplexMatrix::identity(4))) * &p23
}

/// Max-entry of `R₁₂(u-v) R₁₃(u) R₂₃(v) - R₂₃(v) R₁₃(u) R₁₂(u-v)` from evaluated matrices.
pub fn ybe_from_matrices(r_uv: &ComplexMatrix, r13: &ComplexMatrix, r_v: &ComplexMatrix) -> f64 {
    let id = ComplexMatrix::identity(4);
    let r12 = kron(r_uv, &id);
    let r23 = kron(&id, r_v);
    let lhs = &(&r12 * r13) * &r23;
    let rhs = &(&r23 * r13) * &r12;
    lhs.max_abs_diff(&rhs)
}

pub fn ybe_residual(r: &RMatrixFn, u: C64, v: C64) -> Result<f64, CatalogError> {
    let r13 = leg13(&r.at(u)?);
    Ok(ybe_from_matrices(&r.at(u - v)?, &r13, &r.at(v)?))
}

pub fn regularity_residual(r: &RMatrixFn) -> Result<f64, CatalogError> {
    Ok(r.at(real(0.0))?.max_abs_diff(&permutation_operator(4)))
}

/// Best scalar `c` with `R(u) P R(-u) P ≈ c 1`, and the fit residual.
pub fn braiding_unitarity(r: &RMatrixFn, u: C64) -> Result<(C64, f64), CatalogError> {
    let p = permutation_operator(4);
    let m = &(&(&r.at(u)? * &p) * &r.at(-u)?) * &p;
    let c = m.trace() / 16.0;
    Ok((c, m.max_abs_diff(&ComplexMatrix::identity(16).scale(c))))
}

/// Derivative at zero with its truncation estimate.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub density: LocalOperator,
    pub truncation: f64,
}

/// `d/du f(u)|₀` by central differences at `h` and `h/2`, Richardson-combined.
pub fn derivative_at_zero(
    f: impl Fn(C64) -> Result<ComplexMatrix, CatalogError>,
    h: f64,
) -> Result<Extraction, CatalogError> {
    let d = |s: f64| -> Result<ComplexMatrix, CatalogError> { Ok((&f(real(s))? - &f(real(-s))?).scale_re(1.0 / (2.0 * s))) };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    let mut est = fine.scale_re(4.0 / 3.0);
    est.add_scaled(&coarse, real(-1.0 / 3.0));
    let truncation = est.max_abs_diff(&fine);
    Ok(Extraction { density: est, truncation })
}

/// `d/du (P R(u))|₀`.
pub fn hamiltonian_from_r(r: &RMatrixFn) -> Result<Extraction, CatalogError> {
    let p = permutation_operator(4);
    derivative_at_zero(|u| Ok(&p * &r.at(u)?), EXTRACTION_STEP)
}

/// Least-squares fit `x ≈ scale · target + shift · 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalarShiftFit {
    pub scale: C64,
    pub shift: C64,
    pub residual: f64,
}

pub fn fit_scalar_shift(x: &ComplexMatrix, target: &ComplexMatrix) -> ScalarShiftFit {
    let n = target.rows();
    let tt: C64 = target.data().iter().map(|z| z.norm_sqr()).sum::<f64>().into();
    let ti: C64 = (0..n).map(|i| target[(i, i)].conj()).sum();
    let ii = real(n as f64);
    let tx: C64 = target.data().iter().zip(x.data()).map(|(a, b)| a.conj() * b).sum();
    let ix: C64 = (0..n).map(|i| x[(i, i)]).sum();
    let det = tt * ii - ti * ti.conj();
    let (scale, shift) = if det.norm() > 1e-12 * (tt.norm() * ii.norm()).max(1e-300) {
        ((tx * ii - ti * ix) / det, (tt * ix - ti.conj() * tx) / det)
    } else if tt.norm() > 0.0 {
        // target proportional to the identity: only the combination is determined
        (real(0.0), ix / ii)
    } else {
        (real(0.0), ix / ii)
    };
    let mut model = target.scale(scale);
    model.add_scaled(&ComplexMatrix::identity(n), shift);
    ScalarShiftFit { scale, shift, residual: model.max_abs_diff(x) }
}

/// Residual of `R(u)` against `n(u) P (1 + uH + u²H²/2)`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    /// `(u, max residual over ±u)`.
    pub samples: Vec<(f64, f64)>,
    pub max_residual: f64,
    /// Residual at `u` over residual at `u/2`; `None` when both vanish.
    pub ratio: Option<f64>,
}

pub fn series_consistency(r: &RMatrixFn) -> Result<SeriesReport, CatalogError> {
    let h = hamiltonian_from_r(r)?.density;
    let p = permutation_operator(4);
    let h2 = &h * &h;
    let one = ComplexMatrix::identity(16);
    let residual = |u: f64| -> Result<f64, CatalogError> {
        let mut worst = 0.0f64;
        for s in [u, -u] {
            let mut series = one.clone();
            series.add_scaled(&h, real(s));
            series.add_scaled(&h2, real(s * s / 2.0));
            let ps = &p * &series;
            let ru = r.at(real(s))?;
            let norm = (&p * &ru).trace() / series.trace();
            worst = worst.max(ru.max_abs_diff(&ps.scale(norm)));
        }
        Ok(worst)
    };
    let samples = vec![(1e-2, residual(1e-2)?), (5e-3, residual(5e-3)?)];
    let max_residual = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let ratio = if samples[1].1 > 1e-15 { Some(samples[0].1 / samples[1].1) } else { None };
    Ok(SeriesReport { samples, max_residual, ratio })
}

/// Max over the six generators of `|[H, t⊗1 + 1⊗t]|`.
pub fn symmetry_residual(h: &LocalOperator, rep: SymmetryRep) -> f64 {
    let id = ComplexMatrix::identity(4);
    Generator::all()
        .iter()
        .map(|&g| {
            let t = representation(rep, g);
            let total = &kron(&t, &id) + &kron(&id, &t);
            commutator(h, &total).expect("16x16 operators").max_abs()
        })
        .fold(0.0, f64::max)
}

/// Seeded `(u, v)` points with `|u|, |v| ≤ 0.5` keeping `u`, `v`, `u - v` away from the poles.
pub fn verification_grid(r: &RMatrixFn, n: usize, seed: u64) -> Vec<(C64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 100_000 {
        attempts += 1;
        let u = real(rng.random_range(-GRID_RADIUS..GRID_RADIUS));
        let v = real(rng.random_range(-GRID_RADIUS..GRID_RADIUS));
        if [u, v, u - v].iter().all(|&z| r.pole_distance(z) >= GRID_POLE_MARGIN) {
            out.push((u, v));
        }
    }
    out
}

pub fn default_grid(r: &RMatrixFn) -> Vec<(C64, C64)> {
    verification_grid(r, GRID_POINTS, DEFAULT_SEED)
}

/// Extracted density and the catalog density it should match up to scale and shift.
///
/// Model 18 compares the graded extraction, conjugated by `diag(1, i, 1, i)` on each site.
pub fn extraction_pair(spec: &ModelSpec) -> Result<(Extraction, LocalOperator), CatalogError> {
    let r = build_r_matrix(spec)?;
    let catalog = build_hamiltonian_density(spec)?;
    if spec.model == 18 {
        let rf = grading::grade_r_matrix(&r)?;
        let ex = grading::graded_hamiltonian(&rf)?;
        let v = grading::model18_phase();
        let vv = kron(&v, &v);
        let vvi = vv.inverse().expect("diagonal unitary");
        let density = &(&vv * &ex.density) * &vvi;
        return Ok((Extraction { density, truncation: ex.truncation }, catalog));
    }
    Ok((hamiltonian_from_r(&r)?, catalog))
}

/// Expected braiding-unitarity scalar, where the catalog asserts one.
pub fn expected_unitarity(spec: &ModelSpec, u: C64) -> Option<C64> {
    match spec.model {
        1..=12 => Some(real(1.0)),
        18 if !spec.model18_by_couplings() => {
            let a2 = spec.get("a2").ok()?;
            Some(real(1.0) - a2 * a2 * u * u * 4.0)
        }
        _ => None,
    }
}

/// Tolerances for [`verify_spec`]; the defaults are the acceptance thresholds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub regularity: f64,
    pub ybe: f64,
    pub unitarity: f64,
    pub extraction: f64,
    pub symmetry: f64,
    /// Allowed deviation of the series ratio from 8.
    pub series_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { regularity: 1e-12, ybe: 1e-9, unitarity: 1e-9, extraction: 1e-7, symmetry: 1e-11, series_ratio: 1.0 }
    }
}

impl Tolerances {
    /// Same threshold for every residual check.
    pub fn uniform(tol: f64) -> Self {
        Self { regularity: tol, ybe: tol, unitarity: tol, extraction: tol, symmetry: tol, series_ratio: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Rough numeric floor of the check, for diagnosing unattainable tolerances.
    pub floor: f64,
}

impl CheckResult {
    fn below(name: &str, value: f64, tolerance: f64, floor: f64) -> Self {
        Self { name: name.to_string(), value, tolerance, passed: value.is_finite() && value < tolerance, floor }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitaritySample {
    pub u: f64,
    pub c: C64,
    pub expected: Option<C64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradedReport {
    pub compatible: bool,
    pub regularity: f64,
    pub ybe_max: f64,
}

/// Per-model verification results.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub model: u8,
    pub label: String,
    pub spec: ModelSpec,
    pub regularity: Option<f64>,
    pub ybe_max: Option<f64>,
    pub grid_points: usize,
    pub unitarity_c_samples: Vec<UnitaritySample>,
    pub extraction: Option<ScalarShiftFit>,
    pub extraction_truncation: Option<f64>,
    pub series: Option<SeriesReport>,
    pub symmetry: Option<f64>,
    pub graded: Option<GradedReport>,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub const UNITARITY_SAMPLES: [f64; 10] = [-0.45, -0.35, -0.25, -0.15, -0.05, 0.05, 0.15, 0.25, 0.35, 0.45];

/// Run every applicable check on one catalog entry.
pub fn verify_spec(spec: &ModelSpec, tol: &Tolerances, seed: u64) -> Result<VerificationReport, CatalogError> {
    let density = build_hamiltonian_density(spec)?;
    let mut checks = Vec::new();
    let symmetry = symmetry_rep_for(spec.model).map(|rep| symmetry_residual(&density, rep));
    if let Some(s) = symmetry {
        checks.push(CheckResult::below("symmetry", s, tol.symmetry, 1e-15 * density.max_abs().max(1.0)));
    }
    let mut report = VerificationReport {
        model: spec.model,
        label: spec.label(),
        spec: spec.clone(),
        regularity: None,
        ybe_max: None,
        grid_points: 0,
        unitarity_c_samples: Vec::new(),
        extraction: None,
        extraction_truncation: None,
        series: None,
        symmetry,
        graded: None,
        checks: Vec::new(),
    };
    let r = match build_r_matrix(spec) {
        Ok(r) => r,
        Err(CatalogError::NoRMatrix(_)) => {
            report.checks = checks;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let reg = regularity_residual(&r)?;
    checks.push(CheckResult::below("regularity", reg, tol.regularity, 1e-16));
    report.regularity = Some(reg);

    let grid = verification_grid(&r, GRID_POINTS, seed);
    let mut ybe_max = 0.0f64;
    for &(u, v) in &grid {
        ybe_max = ybe_max.max(ybe_residual(&r, u, v)?);
    }
    checks.push(CheckResult::below("ybe", ybe_max, tol.ybe, 1e-15));
    report.ybe_max = Some(ybe_max);
    report.grid_points = grid.len();

    let mut worst_c = 0.0f64;
    for u in UNITARITY_SAMPLES {
        let (c, residual) = braiding_unitarity(&r, real(u))?;
        let expected = expected_unitarity(spec, real(u));
        if let Some(e) = expected {
            worst_c = worst_c.max((c - e).norm()).max(residual);
        }
        report.unitarity_c_samples.push(UnitaritySample { u, c, expected, residual });
    }
    if expected_unitarity(spec, real(0.1)).is_some() {
        checks.push(CheckResult::below("unitarity", worst_c, tol.unitarity, 1e-15));
    }

    let (ex, target) = extraction_pair(spec)?;
    let fit = fit_scalar_shift(&ex.density, &target);
    checks.push(CheckResult::below("extraction", fit.residual, tol.extraction, ex.truncation));
    report.extraction = Some(fit);
    report.extraction_truncation = Some(ex.truncation);

    let series = series_consistency(&r)?;
    let ratio_ok = series.ratio.map(|q| (q - 8.0).abs() <= tol.series_ratio).unwrap_or(series.max_residual < 1e-12);
    checks.push(CheckResult {
        name: "series_ratio".into(),
        value: series.ratio.unwrap_or(8.0),
        tolerance: tol.series_ratio,
        passed: ratio_ok,
        floor: 0.0,
    });
    report.series = Some(series);

    if grading::compatibility_check(&r) {
        let rf = grading::grade_r_matrix(&r)?;
        let greg = grading::graded_regularity_residual(&rf)?;
        let mut gmax = 0.0f64;
        for &(u, v) in &grid {
            gmax = gmax.max(grading::graded_ybe_residual(&rf, u, v)?);
        }
        checks.push(CheckResult::below("graded_regularity", greg, tol.regularity, 1e-16));
        checks.push(CheckResult::below("graded_ybe", gmax, tol.ybe, 1e-15));
        report.graded = Some(GradedReport { compatible: true, regularity: greg, ybe_max: gmax });
    } else {
        report.graded = Some(GradedReport { compatible: false, regularity: f64::NAN, ybe_max: f64::NAN });
    }
    report.checks = checks;
    Ok(report)
}
