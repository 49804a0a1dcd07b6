use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use yangkit::catalog::{branches, Branch};
use yangkit::charges::{assignment_for, check_solution_values, EquationExport};
use yangkit::spectrum::{compare_golden, parse_golden, stored_table, GoldenMismatch, MAX_LENGTH};
use yangkit::verifier::{CheckResult, Tolerances};
use yangkit::{
    emit_integrability_equations, q2q3_commutator_norm, sector_spectrum, two_exc_compare, verify_spec, worker_pool,
    Ansatz, BetheTwoReport, ModelSpec, Report, SpectrumReport, VerificationReport, C64,
};

use crate::output::{complex12, emit, format_for, json, round12, sci, sig12};
use crate::{
    Bethe2Args, ChargesArgs, ClassifyArgs, Ctx, Failure, Format, ModelArgs, ModelSel, SpectrumArgs, VerifyArgs,
    EXIT_FAILED, EXIT_GOLDEN,
};

type CmdResult = Result<u8, Failure>;

fn error(e: impl std::fmt::Display) -> Failure {
    Failure::Error(e.to_string())
}

fn parse_value(s: &str) -> Option<C64> {
    match s.split_once(',') {
        Some((re, im)) => Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?)),
        None => Some(C64::new(s.trim().parse().ok()?, 0.0)),
    }
}

fn apply_params(mut spec: ModelSpec, params: &[String]) -> Result<ModelSpec, Failure> {
    for p in params {
        let (name, value) = p.split_once('=').ok_or_else(|| Failure::Usage(format!("--param `{p}` is not NAME=VALUE")))?;
        let value = parse_value(value).ok_or_else(|| Failure::Usage(format!("--param `{p}`: bad number")))?;
        if spec.model == 18 && (name == "a" || name == "b") {
            spec.params.remove("theta");
            spec.params.remove("a2");
        }
        spec = spec.with_param(name.trim(), value);
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

/// Catalog entries selected on the command line.
///
/// `table_point` starts models 8-12 at rho = 1, phi = 0, the point of the stored spectrum tables.
fn select(sel: ModelSel, args: &ModelArgs, table_point: bool) -> Result<Vec<ModelSpec>, Failure> {
    let branch = match &args.branch {
        Some(b) => Some(Branch::parse(b).ok_or_else(|| Failure::Usage(format!("unknown branch `{b}`")))?),
        None => None,
    };
    let model = match sel {
        ModelSel::All if branch.is_some() || !args.params.is_empty() => {
            return Err(Failure::Usage("--branch and --param need a single --model".into()))
        }
        ModelSel::All => return Ok(ModelSpec::catalog()),
        ModelSel::One(m) => m,
    };
    let wanted: Vec<Option<Branch>> = match branch {
        Some(b) => vec![Some(b)],
        None if branches(model).is_empty() => vec![None],
        None => branches(model).iter().map(|&b| Some(b)).collect(),
    };
    wanted
        .into_iter()
        .map(|b| {
            let mut s = ModelSpec::default_for(model, b).map_err(|e| Failure::Usage(e.to_string()))?;
            if table_point && (8..=12).contains(&model) {
                s = ModelSpec::real(model, &[("rho", 1.0), ("phi", 0.0)]);
            }
            apply_params(s, &args.params)
        })
        .collect()
}

fn single(model: u8, args: &ModelArgs) -> Result<ModelSpec, Failure> {
    let mut specs = select(ModelSel::One(model), args, true)?;
    if specs.len() > 1 {
        return Err(Failure::Usage(format!("model {model} has several branches; pick one with --branch")));
    }
    Ok(specs.remove(0))
}

fn length(l: u64) -> usize {
    usize::try_from(l).unwrap_or(usize::MAX)
}

#[derive(Serialize)]
struct VerifyBody {
    tolerances: Tolerances,
    models: Vec<VerificationReport>,
}

fn floor_note(c: &CheckResult) -> String {
    if c.tolerance <= c.floor * 10.0 {
        format!(" (tolerance is at or below the numeric floor ~{} of this check)", sci(c.floor))
    } else {
        String::new()
    }
}

pub fn verify(ctx: &Ctx, a: &VerifyArgs) -> CmdResult {
    let format = format_for(ctx, Format::Text, &[Format::Text, Format::Json], "verify")?;
    let tol = match a.tol {
        Some(t) if t > 0.0 => Tolerances::uniform(t),
        Some(t) => return Err(Failure::Usage(format!("--tol must be positive, got {t}"))),
        None => Tolerances::default(),
    };
    let specs = select(a.model, &a.spec, false)?;
    let reports: Vec<VerificationReport> = worker_pool()
        .install(|| specs.par_iter().map(|s| verify_spec(s, &tol, ctx.seed)).collect::<Result<Vec<_>, _>>())
        .map_err(error)?;
    let passed = reports.iter().all(VerificationReport::passed);
    for r in &reports {
        for c in r.failures() {
            eprintln!(
                "FAIL {} {}: {} not below {}{}",
                r.label,
                c.name,
                sci(c.value),
                sci(c.tolerance),
                floor_note(c)
            );
        }
    }
    let text = match format {
        Format::Json => json(&Report::new("verify", Some(ctx.seed), passed, VerifyBody { tolerances: tol, models: reports })),
        _ => {
            let mut s = String::new();
            for r in &reports {
                let mut checks: Vec<String> = r.checks.iter().map(|c| format!("{} {}", c.name, sci(c.value))).collect();
                if r.regularity.is_none() {
                    checks.push("no R-matrix".into());
                }
                let _ = writeln!(s, "{:<22} {}  {}", r.label, if r.passed() { "pass" } else { "FAIL" }, checks.join(", "));
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            let _ = writeln!(s, "{} entries, {} failed", reports.len(), failed);
            s
        }
    };
    emit(ctx, &text)?;
    Ok(if passed { 0 } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct ClusterRow {
    re: f64,
    im: f64,
    mult: usize,
}

#[derive(Serialize)]
struct SectorRow {
    p: usize,
    dimension: usize,
    hermitian: bool,
    clusters: Vec<ClusterRow>,
}

#[derive(Serialize)]
struct GoldenSummary {
    rows: usize,
    mismatches: Vec<GoldenMismatch>,
}

#[derive(Serialize)]
struct SpectrumBody {
    spec: ModelSpec,
    length: usize,
    cluster_tol: f64,
    sectors: Vec<SectorRow>,
    golden: Option<GoldenSummary>,
}

fn spectrum_csv(reports: &[SpectrumReport]) -> String {
    let mut s = String::from("model,L,p,re,im,mult\n");
    for r in reports {
        for c in &r.clusters {
            let _ = writeln!(s, "{},{},{},{},{},{}", r.model, r.length, r.p, sig12(c.value.re), sig12(c.value.im), c.multiplicity);
        }
    }
    s
}

fn spectrum_text(reports: &[SpectrumReport]) -> String {
    let mut s = String::new();
    if let Some(r) = reports.first() {
        let _ = writeln!(s, "{}, L = {}", r.label, r.length);
    }
    for r in reports {
        let body: Vec<String> = r.clusters.iter().map(|c| format!("{}({})", c.multiplicity, complex12(c.value))).collect();
        let _ = writeln!(s, "p = {} [{}]: {}", r.p, r.dimension, body.join(", "));
    }
    s
}

pub fn spectrum(ctx: &Ctx, a: &SpectrumArgs) -> CmdResult {
    let format = format_for(ctx, Format::Csv, &[Format::Text, Format::Json, Format::Csv], "spectrum")?;
    let spec = single(a.model, &a.spec)?;
    let l = length(a.length);
    if l > MAX_LENGTH {
        return Err(error(format!("chain length {l} exceeds the limit of {MAX_LENGTH} sites")));
    }
    if let Some(p) = a.sector {
        if p > 2 * l {
            return Err(Failure::Usage(format!("sector {p} is empty for L = {l} (p ranges over 0..={})", 2 * l)));
        }
    }
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", a.tol)));
    }
    let golden = if a.golden {
        let table = stored_table(a.model, l).ok_or_else(|| error(format!("no stored table for model {} at L = {l}", a.model)))?;
        let rows = parse_golden(table).map_err(error)?;
        Some(rows.into_iter().filter(|g| a.sector.is_none_or(|p| g.p == p)).collect::<Vec<_>>())
    } else {
        None
    };
    let sectors: Vec<usize> = match a.sector {
        Some(p) => vec![p],
        None => (0..=2 * l).collect(),
    };
    let reports: Vec<SpectrumReport> = worker_pool()
        .install(|| sectors.par_iter().map(|&p| sector_spectrum(&spec, l, p, a.tol)).collect::<Result<Vec<_>, _>>())
        .map_err(error)?;
    let golden = golden.map(|rows| GoldenSummary { rows: rows.len(), mismatches: compare_golden(&reports, &rows) });
    let mismatched = golden.as_ref().is_some_and(|g| !g.mismatches.is_empty());
    if let Some(g) = &golden {
        for m in &g.mismatches {
            eprintln!(
                "MISMATCH p = {} value {}: stored multiplicity {}, found {} ({})",
                m.p,
                complex12(m.value),
                m.expected,
                m.found,
                m.detail
            );
        }
        if !mismatched {
            eprintln!("stored table: {} rows reproduced", g.rows);
        }
    }
    let text = match format {
        Format::Csv => spectrum_csv(&reports),
        Format::Text => spectrum_text(&reports),
        Format::Json => {
            let sectors = reports
                .iter()
                .map(|r| SectorRow {
                    p: r.p,
                    dimension: r.dimension,
                    hermitian: r.hermitian,
                    clusters: r
                        .clusters
                        .iter()
                        .map(|c| ClusterRow { re: round12(c.value.re), im: round12(c.value.im), mult: c.multiplicity })
                        .collect(),
                })
                .collect();
            let body = SpectrumBody { spec, length: l, cluster_tol: a.tol, sectors, golden };
            json(&Report::new("spectrum", None, !mismatched, body))
        }
    };
    emit(ctx, &text)?;
    Ok(if mismatched { EXIT_GOLDEN } else { 0 })
}

/// The entry itself followed by `n` seeded draws on the same branch, each with a row label.
fn with_draws(spec: ModelSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(String, ModelSpec)>, Failure> {
    let mut out = Vec::with_capacity(n + 1);
    for k in 1..=n {
        let d = ModelSpec::random(spec.model, spec.branch, rng).map_err(error)?;
        out.push((format!("{} draw {k}", spec.label()), d));
    }
    out.insert(0, (spec.label(), spec));
    Ok(out)
}

#[derive(Serialize)]
struct NormRow {
    label: String,
    spec: ModelSpec,
    norm: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ChargesBody {
    length: usize,
    tolerance: f64,
    rows: Vec<NormRow>,
}

pub fn charges(ctx: &Ctx, a: &ChargesArgs) -> CmdResult {
    let format = format_for(ctx, Format::Text, &[Format::Text, Format::Json], "charges")?;
    let l = length(a.length);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut specs = Vec::new();
    for s in select(a.model, &a.spec, false)? {
        specs.extend(with_draws(s, a.draws, &mut rng)?);
    }
    let norms: Vec<f64> = worker_pool()
        .install(|| specs.par_iter().map(|(_, s)| q2q3_commutator_norm(s, l)).collect::<Result<Vec<_>, _>>())
        .map_err(error)?;
    let rows: Vec<NormRow> = specs
        .into_iter()
        .zip(norms)
        .map(|((label, spec), norm)| NormRow { label, passed: norm < a.tol, spec, norm })
        .collect();
    let passed = rows.iter().all(|r| r.passed);
    let text = match format {
        Format::Json => json(&Report::new("charges", Some(ctx.seed), passed, ChargesBody { length: l, tolerance: a.tol, rows })),
        _ => {
            let mut s = String::new();
            for r in &rows {
                let _ = writeln!(s, "{:<30} ||[Q2,Q3]|| = {}  {}", r.label, sci(r.norm), if r.passed { "pass" } else { "FAIL" });
            }
            s
        }
    };
    emit(ctx, &text)?;
    Ok(if passed { 0 } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct SubstitutionRow {
    label: String,
    residual: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ClassifyBody {
    ansatz: Ansatz,
    length: usize,
    raw_count: usize,
    max_degree: Option<u32>,
    system: EquationExport,
    substitution: Option<Vec<SubstitutionRow>>,
}

pub fn classify(ctx: &Ctx, a: &ClassifyArgs) -> CmdResult {
    let format = format_for(ctx, Format::Json, &[Format::Text, Format::Json], "classify")?;
    let ansatz: Ansatz = a.ansatz.parse().map_err(|e: yangkit::charges::ChargeError| Failure::Usage(e.to_string()))?;
    let l = length(a.length);
    let system = emit_integrability_equations(&ansatz.density(), l).map_err(error)?;
    let substitution = if a.check_table1 {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let mut rows = Vec::new();
        for s in ModelSpec::catalog().into_iter().filter(|s| ansatz.models().contains(&s.model)) {
            for (label, d) in with_draws(s, a.draws, &mut rng)? {
                let x = assignment_for(ansatz, &d).map_err(error)?;
                let residual = check_solution_values(&system.equations, &x);
                rows.push(SubstitutionRow { label, residual, passed: residual < a.tol });
            }
        }
        Some(rows)
    } else {
        None
    };
    let passed = substitution.as_ref().is_none_or(|rows| rows.iter().all(|r| r.passed));
    let text = match format {
        Format::Json => {
            let body = ClassifyBody {
                ansatz,
                length: l,
                raw_count: system.raw_count,
                max_degree: system.max_degree(),
                system: system.export(),
                substitution,
            };
            json(&Report::new("classify", Some(ctx.seed), passed, body))
        }
        _ => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} ansatz, L = {}: {} equations ({} raw entries), max degree {}",
                ansatz.name(),
                l,
                system.equations.len(),
                system.raw_count,
                system.max_degree().map_or("-".to_string(), |d| d.to_string())
            );
            for e in &system.equations {
                let _ = writeln!(s, "  {e} = 0");
            }
            for r in substitution.iter().flatten() {
                let _ = writeln!(s, "{:<30} residual {}  {}", r.label, sci(r.residual), if r.passed { "pass" } else { "FAIL" });
            }
            s
        }
    };
    emit(ctx, &text)?;
    Ok(if passed { 0 } else { EXIT_FAILED })
}

#[derive(Serialize)]
struct BetheBody {
    distance_tol: f64,
    residual_tol: f64,
    report: BetheTwoReport,
}

pub fn bethe2(ctx: &Ctx, a: &Bethe2Args) -> CmdResult {
    let format = format_for(ctx, Format::Text, &[Format::Text, Format::Json], "bethe2")?;
    let spec = single(a.model, &a.spec)?;
    let report = two_exc_compare(&spec, length(a.length)).map_err(error)?;
    let passed = report.passed(a.tol, a.residual_tol);
    let text = match format {
        Format::Json => json(&Report::new(
            "bethe2",
            None,
            passed,
            BetheBody { distance_tol: a.tol, residual_tol: a.residual_tol, report },
        )),
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "{}, L = {}", report.label, report.length);
            let _ = writeln!(s, "vacuum {}", complex12(report.vacuum));
            let _ = writeln!(s, "one excitation {} ({}-fold)", complex12(report.one_excitation.0), report.one_excitation.1);
            for c in &report.cases {
                let body: Vec<String> = c.clusters.iter().map(|k| format!("{}({})", k.multiplicity, complex12(k.value))).collect();
                let _ = writeln!(s, "case {}: {} states: {}", c.case, c.count, body.join(", "));
            }
            let _ = writeln!(s, "block eigenvectors {}", report.block_eigenvectors);
            let _ = writeln!(
                s,
                "distance {}, eigen-residual {}  {}",
                sci(report.distance),
                sci(report.max_residual),
                if passed { "pass" } else { "FAIL" }
            );
            s
        }
    };
    emit(ctx, &text)?;
    Ok(if passed { 0 } else { EXIT_FAILED })
}
