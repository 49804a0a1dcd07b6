//! Exact polynomial equations from `[Q2, Q3] = 0` over a linear density ansatz.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use super::poly::{export_equations, EquationExport, Exponents, MultiPoly};
use super::{apply_periodic, orbit_representatives, ChargeError};
use crate::worker_pool;
use crate::catalog::fermion::{h15_17_coords, h18_coords, hubbard_ansatz_basis, k_hub, HUBBARD_SYMBOLS};
use crate::catalog::{hsu2_density, model18_couplings, hsu2_row, HamiltonianParams, ModelSpec, HSU2_SYMBOLS};
use crate::tensor::{ComplexMatrix, LocalAction, C64, LOCAL_DIM};

/// Monomial of degree at most three: sorted 1-based variable slots packed into bytes, 0 = empty.
type Key = u32;
/// Sparse integer form over [`Key`] monomials, sorted by key without zeros.
type Form = Vec<(Key, i64)>;

fn key_mul(a: Key, b: Key) -> Key {
    let mut slots = [0u8; 6];
    let mut n = 0;
    for k in [a, b] {
        for s in k.to_be_bytes() {
            if s != 0 {
                slots[n] = s;
                n += 1;
            }
        }
    }
    assert!(n <= 3, "monomial degree above three");
    slots[..n].sort_unstable();
    let mut out = [0u8; 4];
    out[4 - n..].copy_from_slice(&slots[..n]);
    u32::from_be_bytes(out)
}

fn canonical(mut terms: Form) -> Form {
    terms.sort_unstable_by_key(|t| t.0);
    let mut out: Form = Vec::with_capacity(terms.len());
    for (k, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += c,
            _ => out.push((k, c)),
        }
    }
    out.retain(|t| t.1 != 0);
    out
}

fn form_mul(a: &Form, b: &Form, sign: i64, into: &mut Form) {
    for &(ka, ca) in a {
        for &(kb, cb) in b {
            into.push((key_mul(ka, kb), sign * ca * cb));
        }
    }
}

/// `H = M₀ + Σ_v x_v M_v` with integer matrices.
#[derive(Debug, Clone)]
pub struct SymbolicDensity {
    variables: Arc<[String]>,
    constant: Option<ComplexMatrix>,
    basis: Vec<ComplexMatrix>,
}

impl SymbolicDensity {
    pub fn new(variables: Vec<String>, constant: Option<ComplexMatrix>, basis: Vec<ComplexMatrix>) -> Self {
        assert_eq!(variables.len(), basis.len(), "one basis matrix per variable");
        assert!(variables.len() < 255, "too many variables");
        Self { variables: variables.into(), constant, basis }
    }

    pub fn variables(&self) -> &Arc<[String]> {
        &self.variables
    }

    pub fn evaluate(&self, values: &[C64]) -> ComplexMatrix {
        let mut h = self.constant.clone().unwrap_or_else(|| ComplexMatrix::zeros(16, 16));
        for (m, &x) in self.basis.iter().zip(values) {
            h.add_scaled(m, x);
        }
        h
    }

    fn integer(m: &ComplexMatrix, row: usize, col: usize) -> Result<i64, ChargeError> {
        let z = m[(row, col)];
        if z.im != 0.0 || z.re.fract() != 0.0 || z.re.abs() > 1e9 {
            return Err(ChargeError::NonIntegerBasis { row, col, value: z });
        }
        Ok(z.re as i64)
    }

    fn linear_action(&self) -> Result<LocalAction<Form>, ChargeError> {
        let mut columns = vec![Vec::new(); 16];
        for (col, column) in columns.iter_mut().enumerate() {
            for row in 0..16 {
                let mut terms = Form::new();
                if let Some(m0) = &self.constant {
                    terms.push((0, Self::integer(m0, row, col)?));
                }
                for (v, m) in self.basis.iter().enumerate() {
                    terms.push((v as Key + 1, Self::integer(m, row, col)?));
                }
                let f = canonical(terms);
                if !f.is_empty() {
                    column.push((row, f));
                }
            }
        }
        Ok(LocalAction::from_columns(LOCAL_DIM, columns)?)
    }
}

fn q3_action(h: &LocalAction<Form>) -> LocalAction<Form> {
    let columns = (0..64)
        .map(|c| {
            let mut acc: BTreeMap<usize, Form> = BTreeMap::new();
            for (first, second, sign) in [([1, 2], [0, 1], 1), ([0, 1], [1, 2], -1)] {
                h.apply(c, &first, 3, |r, f| {
                    h.apply(r, &second, 3, |s, g| form_mul(g, f, sign, acc.entry(s).or_default()));
                });
            }
            acc.into_iter().map(|(r, f)| (r, canonical(f))).filter(|(_, f)| !f.is_empty()).collect()
        })
        .collect();
    LocalAction::from_columns(LOCAL_DIM, columns).expect("64 columns")
}

fn commutator_column(h: &LocalAction<Form>, q3: &LocalAction<Form>, c: usize, length: usize) -> Vec<Form> {
    let collect = |a: &LocalAction<Form>, index: usize| {
        let mut acc: HashMap<usize, Form> = HashMap::new();
        apply_periodic(a, index, length, |r, f| acc.entry(r).or_default().extend_from_slice(f));
        acc.into_iter().map(|(r, f)| (r, canonical(f))).filter(|(_, f)| !f.is_empty()).collect::<Vec<_>>()
    };
    let mut out: HashMap<usize, Form> = HashMap::new();
    for (r, f) in collect(q3, c) {
        apply_periodic(h, r, length, |s, g| form_mul(g, &f, 1, out.entry(s).or_default()));
    }
    for (r, f) in collect(h, c) {
        apply_periodic(q3, r, length, |s, g| form_mul(g, &f, -1, out.entry(s).or_default()));
    }
    let mut rows: Vec<_> = out.into_iter().collect();
    rows.sort_unstable_by_key(|r| r.0);
    rows.into_iter().map(|(_, f)| canonical(f)).filter(|f| !f.is_empty()).collect()
}

fn to_multipoly(f: &Form, variables: &Arc<[String]>) -> MultiPoly {
    let n = variables.len();
    MultiPoly::from_terms(
        variables.clone(),
        f.iter().map(|&(k, c)| {
            let mut e: Exponents = vec![0; n];
            for s in k.to_be_bytes() {
                if s != 0 {
                    e[s as usize - 1] += 1;
                }
            }
            (e, Rational64::from_integer(c))
        }),
    )
}

/// Deduplicated polynomial system.
#[derive(Debug, Clone)]
pub struct EquationSystem {
    pub variables: Arc<[String]>,
    pub equations: Vec<MultiPoly>,
    pub length: usize,
    /// Nonzero entries before deduplication.
    pub raw_count: usize,
}

impl EquationSystem {
    pub fn export(&self) -> EquationExport {
        export_equations(&self.variables, &self.equations)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.equations.iter().filter_map(MultiPoly::degree).max()
    }
}

/// Every distinct entry of `[Q2, Q3]` on the periodic chain as a polynomial in the ansatz variables.
///
/// Polynomials equal up to a rational factor are merged; the kept member is the one with the
/// largest leading coefficient, so the system's residual at a point equals the max entry of the
/// numeric commutator.
pub fn emit_integrability_equations(ansatz: &SymbolicDensity, length: usize) -> Result<EquationSystem, ChargeError> {
    if length < 3 {
        return Err(ChargeError::ChainTooShort { length, range: 3 });
    }
    let h = ansatz.linear_action()?;
    let q3 = q3_action(&h);
    let reps = orbit_representatives(length);
    let columns: Vec<Vec<Form>> =
        worker_pool().install(|| reps.par_iter().map(|&c| commutator_column(&h, &q3, c, length)).collect());
    let raw_count = columns.iter().map(Vec::len).sum();

    let mut index: HashMap<Vec<(Exponents, Rational64)>, usize> = HashMap::new();
    let mut equations: Vec<MultiPoly> = Vec::new();
    for f in columns.iter().flatten() {
        let p = to_multipoly(f, &ansatz.variables);
        let monic = p.monic();
        let key: Vec<_> = monic.terms().iter().map(|(e, c)| (e.clone(), *c)).collect();
        let lc = |q: &MultiPoly| q.leading_term().map(|t| t.1.abs()).unwrap_or_default();
        match index.get(&key) {
            Some(&i) => {
                if lc(&p) > lc(&equations[i]) {
                    equations[i] = p;
                }
            }
            None => {
                index.insert(key, equations.len());
                equations.push(p);
            }
        }
    }
    Ok(EquationSystem { variables: ansatz.variables.clone(), equations, length, raw_count })
}

/// Max `|p(x)|` over the system, with values in variable order.
pub fn check_solution_values(eqs: &[MultiPoly], values: &[C64]) -> f64 {
    eqs.iter().map(|p| p.evaluate(values).norm()).fold(0.0, f64::max)
}

/// Max `|p(x)|` over the system for a named assignment.
pub fn check_solution(eqs: &[MultiPoly], assignment: &BTreeMap<String, C64>) -> Result<f64, ChargeError> {
    let Some(first) = eqs.first() else {
        return Ok(0.0);
    };
    let values = first
        .variables()
        .iter()
        .map(|v| assignment.get(v).copied().ok_or_else(|| ChargeError::MissingVariable(v.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(check_solution_values(eqs, &values))
}

/// Built-in ansätze.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ansatz {
    /// The ten-parameter su(2)×su(2) density with symbols A..L.
    #[serde(rename = "su2xsu2")]
    Su2xSu2,
    /// `K_Hub` plus pair hopping, spin flips and potentials, symbols A1..A6, B1..B16.
    #[serde(rename = "hubbard")]
    Hubbard,
}

impl FromStr for Ansatz {
    type Err = ChargeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "su2xsu2" => Ok(Ansatz::Su2xSu2),
            "hubbard" => Ok(Ansatz::Hubbard),
            _ => Err(ChargeError::UnknownAnsatz(s.to_string())),
        }
    }
}

impl Ansatz {
    pub fn name(self) -> &'static str {
        match self {
            Ansatz::Su2xSu2 => "su2xsu2",
            Ansatz::Hubbard => "hubbard",
        }
    }

    pub fn density(self) -> SymbolicDensity {
        match self {
            Ansatz::Su2xSu2 => SymbolicDensity::new(
                HSU2_SYMBOLS.iter().map(|s| s.to_string()).collect(),
                None,
                (0..10).map(|i| hsu2_density(&HamiltonianParams::unit(i))).collect(),
            ),
            Ansatz::Hubbard => SymbolicDensity::new(
                HUBBARD_SYMBOLS.iter().map(|s| s.to_string()).collect(),
                Some(k_hub()),
                hubbard_ansatz_basis(),
            ),
        }
    }

    /// Models whose densities lie in this ansatz.
    pub fn models(self) -> &'static [u8] {
        match self {
            Ansatz::Su2xSu2 => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
            Ansatz::Hubbard => &[15, 16, 17, 18],
        }
    }
}

/// Ansatz coordinates of a catalog entry.
pub fn assignment_for(ansatz: Ansatz, spec: &ModelSpec) -> Result<Vec<C64>, ChargeError> {
    match (ansatz, spec.model) {
        (Ansatz::Su2xSu2, 1..=12) => Ok(hsu2_row(spec)?.to_array().to_vec()),
        (Ansatz::Hubbard, 15..=17) => {
            let a = ["a1", "a2", "a3", "a4"].map(|n| spec.get(n));
            let a = [a[0].clone()?, a[1].clone()?, a[2].clone()?, a[3].clone()?];
            Ok(h15_17_coords(spec.model, a).to_vec())
        }
        (Ansatz::Hubbard, 18) => {
            let (a, b) = model18_couplings(spec)?;
            Ok(h18_coords(a, b).to_vec())
        }
        (a, m) => Err(ChargeError::NotInAnsatz(m, a.name())),
    }
}
