//! Excitation sectors, reduced Hamiltonians and clustered spectra of periodic chains.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::fermion::{species_density, Spin};
use crate::catalog::{build_hamiltonian_density, CatalogError, LocalOperator, ModelSpec};
use crate::grading::graded_chain_hamiltonian;
use crate::tensor::{
    eigen_spectrum, embed_with_swap, periodic_sites, real, ChainOperator, ComplexMatrix, LocalAction, TensorError, C64,
    LOCAL_DIM,
};
use crate::worker_pool;

/// Excitations carried by φ₁, φ₂, ψ₁, ψ₂.
pub const EXCITATION_WEIGHT: [usize; 4] = [0, 2, 1, 1];
pub const MAX_LENGTH: usize = 6;
/// Largest chain diagonalized through dense `4^L` matrices.
pub const MAX_DENSE_LENGTH: usize = 5;
pub const CLUSTER_TOL: f64 = 1e-8;
/// Second-stage merge radius for cluster centroids, absorbing splitting of defective eigenvalues.
pub const MERGE_TOL: f64 = 1e-6;
pub const LEAKAGE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("excitation number {p} outside 0..={max} for L = {length}")]
    SectorOutOfRange { p: usize, length: usize, max: usize },
    #[error("chain length {length} exceeds the limit {max}")]
    LengthGuard { length: usize, max: usize },
    #[error("chain length must be positive")]
    EmptyChain,
    #[error("Hamiltonian leaks out of sector p = {p} (max entry {leakage:e})")]
    Leakage { p: usize, leakage: f64 },
    #[error("model {0} has no two-species decomposition")]
    NotSeparable(u8),
    #[error("golden file line {line}: {reason}")]
    GoldenParse { line: usize, reason: String },
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Periodic wrap convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Closing bond transported with the plain permutation.
    #[default]
    Periodic,
    /// Closing bond transported with the graded permutation (fermionic chain).
    Graded,
}

pub fn excitation_of(index: usize, length: usize) -> usize {
    let mut rest = index;
    let mut total = 0;
    for _ in 0..length {
        total += EXCITATION_WEIGHT[rest % LOCAL_DIM];
        rest /= LOCAL_DIM;
    }
    total
}

/// Basis states of one excitation sector, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectorBasis {
    pub length: usize,
    pub p: usize,
    /// Site labels 0..3 for φ₁, φ₂, ψ₁, ψ₂.
    pub states: Vec<Vec<u8>>,
    /// Tensor-product index of each state; increasing.
    pub indices: Vec<usize>,
}

fn check_length(length: usize) -> Result<(), SpectrumError> {
    if length == 0 {
        return Err(SpectrumError::EmptyChain);
    }
    if length > MAX_LENGTH {
        return Err(SpectrumError::LengthGuard { length, max: MAX_LENGTH });
    }
    Ok(())
}

pub fn sector_basis(length: usize, p: usize) -> Result<SectorBasis, SpectrumError> {
    check_length(length)?;
    if p > 2 * length {
        return Err(SpectrumError::SectorOutOfRange { p, length, max: 2 * length });
    }
    let indices: Vec<usize> = (0..LOCAL_DIM.pow(length as u32)).filter(|&i| excitation_of(i, length) == p).collect();
    let states = indices
        .iter()
        .map(|&i| (0..length).map(|s| ((i / LOCAL_DIM.pow((length - 1 - s) as u32)) % LOCAL_DIM) as u8).collect())
        .collect();
    Ok(SectorBasis { length, p, states, indices })
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, index: usize) -> Option<usize> {
        self.indices.binary_search(&index).ok()
    }

    /// `4^L x dim` matrix whose columns are the sector basis vectors.
    pub fn isometry(&self) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(LOCAL_DIM.pow(self.length as u32), self.dim());
        for (j, &i) in self.indices.iter().enumerate() {
            v[(i, j)] = real(1.0);
        }
        v
    }
}

/// Reduced matrix and the largest entry mapping the sector outside itself.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub matrix: ComplexMatrix,
    pub leakage: f64,
}

fn check_leakage(r: Reduced, p: usize) -> Result<ComplexMatrix, SpectrumError> {
    if r.leakage > LEAKAGE_TOL {
        return Err(SpectrumError::Leakage { p, leakage: r.leakage });
    }
    Ok(r.matrix)
}

/// `vᵀ H v` of a dense chain operator.
pub fn reduced_hamiltonian(h: &ChainOperator, basis: &SectorBasis) -> Result<ComplexMatrix, SpectrumError> {
    check_leakage(reduce_dense(h.matrix(), basis), basis.p)
}

fn reduce_dense(h: &ComplexMatrix, basis: &SectorBasis) -> Reduced {
    let n = basis.dim();
    let mut matrix = ComplexMatrix::zeros(n, n);
    let mut leakage = 0.0f64;
    for (j, &c) in basis.indices.iter().enumerate() {
        for r in 0..h.rows() {
            let z = h[(r, c)];
            if z == real(0.0) {
                continue;
            }
            match basis.position(r) {
                Some(i) => matrix[(i, j)] = z,
                None => leakage = leakage.max(z.norm()),
            }
        }
    }
    Reduced { matrix, leakage }
}

/// Reduced periodic-chain Hamiltonian straight from a two-site density, without the `4^L` matrix.
pub fn reduced_from_density(h: &LocalOperator, basis: &SectorBasis) -> Result<Reduced, SpectrumError> {
    let action = LocalAction::new(h, LOCAL_DIM)?;
    let n = basis.dim();
    let length = basis.length;
    let mut matrix = ComplexMatrix::zeros(n, n);
    let mut outside: BTreeMap<usize, C64> = BTreeMap::new();
    let mut leakage = 0.0f64;
    for (j, &c) in basis.indices.iter().enumerate() {
        outside.clear();
        for site in 0..length {
            action.apply(c, &periodic_sites(site, 2, length), length, |r, z| match basis.position(r) {
                Some(i) => matrix[(i, j)] += *z,
                None => *outside.entry(r).or_insert(real(0.0)) += *z,
            });
        }
        leakage = outside.values().map(|z| z.norm()).fold(leakage, f64::max);
    }
    Ok(Reduced { matrix, leakage })
}

fn chain_reduced(h: &LocalOperator, basis: &SectorBasis, boundary: Boundary) -> Result<ComplexMatrix, SpectrumError> {
    let reduced = match boundary {
        Boundary::Periodic => reduced_from_density(h, basis)?,
        Boundary::Graded => {
            if basis.length > MAX_DENSE_LENGTH {
                return Err(SpectrumError::LengthGuard { length: basis.length, max: MAX_DENSE_LENGTH });
            }
            reduce_dense(graded_chain_hamiltonian(h, basis.length)?.matrix(), basis)
        }
    };
    check_leakage(reduced, basis.p)
}

/// An eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: C64,
    pub multiplicity: usize,
    /// Largest distance of a member from the cluster value.
    pub spread: f64,
}

fn order(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn single_linkage(points: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| order(&points[a], &points[b]));
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, &a) in idx.iter().enumerate() {
        for &b in &idx[k + 1..] {
            if points[b].re - points[a].re > tol {
                break;
            }
            if (points[a] - points[b]).norm() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..points.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Single-linkage clustering at `link_tol`, then merging of clusters whose means lie within `merge_tol`.
pub fn cluster_eigenvalues(values: &[C64], link_tol: f64, merge_tol: f64) -> Vec<Cluster> {
    let first = single_linkage(values, link_tol);
    let mean = |members: &[usize]| members.iter().map(|&i| values[i]).sum::<C64>() / members.len() as f64;
    let centroids: Vec<C64> = first.iter().map(|g| mean(g)).collect();
    let second = single_linkage(&centroids, merge_tol.max(link_tol));
    let mut out: Vec<Cluster> = second
        .iter()
        .map(|g| {
            let members: Vec<usize> = g.iter().flat_map(|&c| first[c].iter().copied()).collect();
            let value = mean(&members);
            let spread = members.iter().map(|&i| (values[i] - value).norm()).fold(0.0, f64::max);
            Cluster { value, multiplicity: members.len(), spread }
        })
        .collect();
    out.sort_by(|a, b| order(&a.value, &b.value));
    out
}

pub fn expand(clusters: &[Cluster]) -> Vec<C64> {
    clusters.iter().flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity)).collect()
}

/// Bottleneck distance between two multisets, matching greedily in sorted order; infinite when sizes differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    a.sort_by(order);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("equal sizes");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

pub fn cluster_distance(a: &[Cluster], b: &[Cluster]) -> f64 {
    multiset_distance(&expand(a), &expand(b))
}

/// Clustered spectrum of one excitation sector.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub model: u8,
    pub label: String,
    pub length: usize,
    pub p: usize,
    pub dimension: usize,
    pub boundary: Boundary,
    pub tolerance: f64,
    pub hermitian: bool,
    pub clusters: Vec<Cluster>,
}

impl SpectrumReport {
    pub fn values(&self) -> Vec<C64> {
        expand(&self.clusters)
    }

    pub fn total_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    pub fn max_spread(&self) -> f64 {
        self.clusters.iter().map(|c| c.spread).fold(0.0, f64::max)
    }

    pub fn ground(&self) -> Option<C64> {
        self.clusters.iter().map(|c| c.value).min_by(|a, b| a.re.total_cmp(&b.re))
    }
}

/// Spectrum of one sector for an arbitrary density.
pub fn density_sector_spectrum(
    h: &LocalOperator,
    model: u8,
    label: &str,
    length: usize,
    p: usize,
    cluster_tol: f64,
    boundary: Boundary,
) -> Result<SpectrumReport, SpectrumError> {
    let basis = sector_basis(length, p)?;
    let m = chain_reduced(h, &basis, boundary)?;
    let hermitian = m.is_hermitian(1e-12 * m.max_abs().max(1.0));
    let values = eigen_spectrum(&m)?;
    Ok(SpectrumReport {
        model,
        label: label.to_string(),
        length,
        p,
        dimension: basis.dim(),
        boundary,
        tolerance: cluster_tol,
        hermitian,
        clusters: cluster_eigenvalues(&values, cluster_tol, MERGE_TOL),
    })
}

pub fn sector_spectrum(spec: &ModelSpec, length: usize, p: usize, cluster_tol: f64) -> Result<SpectrumReport, SpectrumError> {
    let h = build_hamiltonian_density(spec)?;
    density_sector_spectrum(&h, spec.model, &spec.label(), length, p, cluster_tol, Boundary::Periodic)
}

pub fn full_density_spectrum(
    h: &LocalOperator,
    model: u8,
    label: &str,
    length: usize,
    boundary: Boundary,
) -> Result<Vec<SpectrumReport>, SpectrumError> {
    check_length(length)?;
    worker_pool().install(|| {
        (0..=2 * length)
            .into_par_iter()
            .map(|p| density_sector_spectrum(h, model, label, length, p, CLUSTER_TOL, boundary))
            .collect()
    })
}

/// Reports for every sector `p = 0..=2L`.
pub fn full_spectrum(spec: &ModelSpec, length: usize) -> Result<Vec<SpectrumReport>, SpectrumError> {
    full_density_spectrum(&build_hamiltonian_density(spec)?, spec.model, &spec.label(), length, Boundary::Periodic)
}

/// Max distance between sectors `p` and `2L - p`.
pub fn check_p_reflection(reports: &[SpectrumReport]) -> f64 {
    let by_p: BTreeMap<usize, &SpectrumReport> = reports.iter().map(|r| (r.p, r)).collect();
    let mut worst = 0.0f64;
    for r in reports {
        if let Some(mirror) = by_p.get(&(2 * r.length - r.p)) {
            worst = worst.max(cluster_distance(&r.clusters, &mirror.clusters));
        }
    }
    worst
}

/// Distance between a spectrum and its complex conjugate.
pub fn conjugation_asymmetry(report: &SpectrumReport) -> f64 {
    let v = report.values();
    let c: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    multiset_distance(&v, &c)
}

/// Distance between the graded chain spectrum of models 15..17 and the pairwise sums of the two
/// single-species chains.
pub fn separability_residual(spec: &ModelSpec, length: usize) -> Result<f64, SpectrumError> {
    if !(15..=17).contains(&spec.model) {
        return Err(SpectrumError::NotSeparable(spec.model));
    }
    if length == 0 {
        return Err(SpectrumError::EmptyChain);
    }
    if length > 4 {
        return Err(SpectrumError::LengthGuard { length, max: 4 });
    }
    let a = ["a1", "a2", "a3", "a4"].map(|n| spec.get(n));
    let a = [a[0].clone()?, a[1].clone()?, a[2].clone()?, a[3].clone()?];
    let full = graded_chain_hamiltonian(&build_hamiltonian_density(spec)?, length)?;
    let swap = ComplexMatrix::from_real(4, 4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., -1.])?;
    let species = |s: Spin| -> Result<Vec<C64>, SpectrumError> {
        let h = species_density(spec.model, s, a);
        let n = 2usize.pow(length as u32);
        let mut m = ComplexMatrix::zeros(n, n);
        for site in 1..=length {
            m.add_scaled(&embed_with_swap(&h, 2, site, length, true, &swap)?, real(1.0));
        }
        Ok(eigen_spectrum(&m)?)
    };
    let up = species(Spin::Up)?;
    let down = species(Spin::Down)?;
    let sums: Vec<C64> = up.iter().flat_map(|x| down.iter().map(move |y| x + y)).collect();
    Ok(multiset_distance(&eigen_spectrum(full.matrix())?, &sums))
}

/// One row of a stored spectrum table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub model: u8,
    pub length: usize,
    pub p: usize,
    pub value: C64,
    pub multiplicity: usize,
    pub tol: f64,
}

pub const CSV_HEADER: &str = "model,L,p,re,im,mult,tol";

pub fn parse_golden(text: &str) -> Result<Vec<GoldenEntry>, SpectrumError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (n == 0 && line == CSV_HEADER) {
            continue;
        }
        let bad = |reason: &str| SpectrumError::GoldenParse { line: n + 1, reason: reason.to_string() };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad("integer field"));
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad("numeric field"));
        out.push(GoldenEntry {
            model: f[0].parse().map_err(|_| bad("model"))?,
            length: int(f[1])?,
            p: int(f[2])?,
            value: C64::new(float(f[3])?, float(f[4])?),
            multiplicity: int(f[5])?,
            tol: float(f[6])?,
        });
    }
    Ok(out)
}

/// Stored tables shipped with the crate, keyed by (model, L).
pub fn stored_table(model: u8, length: usize) -> Option<&'static str> {
    Some(match (model, length) {
        (8, 3) => include_str!("../golden/model8_L3.csv"),
        (8, 4) => include_str!("../golden/model8_L4.csv"),
        (8, 5) => include_str!("../golden/model8_L5.csv"),
        (9, 3) => include_str!("../golden/model9_L3.csv"),
        (9, 4) => include_str!("../golden/model9_L4.csv"),
        (9, 5) => include_str!("../golden/model9_L5.csv"),
        (10, 3) => include_str!("../golden/model10_L3.csv"),
        (10, 4) => include_str!("../golden/model10_L4.csv"),
        (10, 5) => include_str!("../golden/model10_L5.csv"),
        _ => return None,
    })
}

pub fn load_golden(path: impl AsRef<Path>) -> Result<Vec<GoldenEntry>, SpectrumError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SpectrumError::Io { path: path.display().to_string(), source })?;
    parse_golden(&text)
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldenMismatch {
    pub p: usize,
    pub value: C64,
    pub expected: usize,
    pub found: usize,
    pub detail: String,
}

/// Compare reports with stored rows; every stored row must be met by clusters of equal total
/// multiplicity within its tolerance, and each stored sector must be complete.
pub fn compare_golden(reports: &[SpectrumReport], golden: &[GoldenEntry]) -> Vec<GoldenMismatch> {
    let mut out = Vec::new();
    let mut sectors: BTreeMap<usize, Vec<&GoldenEntry>> = BTreeMap::new();
    for g in golden {
        sectors.entry(g.p).or_default().push(g);
    }
    for (p, rows) in sectors {
        let Some(report) = reports.iter().find(|r| r.p == p) else {
            out.push(GoldenMismatch { p, value: real(0.0), expected: 0, found: 0, detail: "sector not computed".into() });
            continue;
        };
        let stored: usize = rows.iter().map(|g| g.multiplicity).sum();
        if stored != report.dimension {
            out.push(GoldenMismatch {
                p,
                value: real(0.0),
                expected: stored,
                found: report.dimension,
                detail: "stored multiplicities do not fill the sector".into(),
            });
        }
        let mut claimed = vec![false; report.clusters.len()];
        for g in rows {
            let found: usize = report
                .clusters
                .iter()
                .enumerate()
                .filter(|(_, c)| (c.value - g.value).norm() <= g.tol)
                .map(|(i, c)| {
                    claimed[i] = true;
                    c.multiplicity
                })
                .sum();
            if found != g.multiplicity {
                out.push(GoldenMismatch { p, value: g.value, expected: g.multiplicity, found, detail: "multiplicity".into() });
            }
        }
        for (c, _) in report.clusters.iter().zip(&claimed).filter(|(_, &k)| !k) {
            out.push(GoldenMismatch { p, value: c.value, expected: 0, found: c.multiplicity, detail: "unexpected eigenvalue".into() });
        }
    }
    out
}

/// CSV in the stored-table layout.
pub fn reports_to_csv(reports: &[SpectrumReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        for c in &r.clusters {
            let _ = writeln!(s, "{},{},{},{:.15},{:.15},{},{:e}", r.model, r.length, r.p, c.value.re, c.value.im, c.multiplicity, r.tolerance);
        }
    }
    s
}

pub fn reports_to_json(reports: &[SpectrumReport]) -> serde_json::Value {
    serde_json::to_value(reports).expect("serializable reports")
}
