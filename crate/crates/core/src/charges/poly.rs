use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::tensor::{real, C64};

/// Exponent vector, one entry per variable.
pub type Exponents = Vec<u8>;

/// Graded-lex: total degree first, then lexicographic.
pub fn grlex(a: &[u8], b: &[u8]) -> Ordering {
    let da: u32 = a.iter().map(|&e| e as u32).sum();
    let db: u32 = b.iter().map(|&e| e as u32).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    variables: Arc<[String]>,
    terms: BTreeMap<Exponents, Rational64>,
}

impl MultiPoly {
    pub fn zero(variables: Arc<[String]>) -> Self {
        Self { variables, terms: BTreeMap::new() }
    }

    pub fn constant(variables: Arc<[String]>, c: Rational64) -> Self {
        let n = variables.len();
        Self::from_terms(variables, [(vec![0; n], c)])
    }

    pub fn variable(variables: Arc<[String]>, index: usize) -> Self {
        let mut e = vec![0; variables.len()];
        e[index] = 1;
        Self::from_terms(variables, [(e, Rational64::one())])
    }

    /// Sums repeated exponents and drops zero coefficients.
    pub fn from_terms(variables: Arc<[String]>, terms: impl IntoIterator<Item = (Exponents, Rational64)>) -> Self {
        let mut p = Self::zero(variables);
        for (e, c) in terms {
            assert_eq!(e.len(), p.variables.len(), "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: Rational64) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    pub fn variables(&self) -> &Arc<[String]> {
        &self.variables
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Rational64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum::<u32>());
        match degs.next() {
            Some(d) => degs.all(|x| x == d),
            None => true,
        }
    }

    /// Largest term under graded-lex order.
    pub fn leading_term(&self) -> Option<(&Exponents, &Rational64)> {
        self.terms.iter().max_by(|a, b| grlex(a.0, b.0))
    }

    pub fn scale(&self, s: Rational64) -> Self {
        if s.is_zero() {
            return Self::zero(self.variables.clone());
        }
        Self { variables: self.variables.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    /// Scaled to leading coefficient one.
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            Some((_, lc)) => self.scale(lc.recip()),
            None => self.clone(),
        }
    }

    pub fn evaluate(&self, values: &[C64]) -> C64 {
        assert_eq!(values.len(), self.variables.len(), "one value per variable");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mono = e.iter().zip(values).fold(real(1.0), |acc, (&k, &x)| acc * x.powu(k as u32));
                mono * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum()
    }

    fn check_ring(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.variables, &other.variables) || self.variables == other.variables,
            "polynomials over different variable lists"
        );
    }

    /// `{"monomials": [{"exps", "num", "den"}]}`; the variable order is exported once per system.
    pub fn monomials_json(&self) -> serde_json::Value {
        let monomials: Vec<_> = self
            .terms
            .iter()
            .map(|(e, c)| serde_json::json!({ "exps": e, "num": c.numer(), "den": c.denom() }))
            .collect();
        serde_json::json!({ "monomials": monomials })
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_ring(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-Rational64::one())
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_ring(rhs);
        let mut out = MultiPoly::zero(self.variables.clone());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                #[allow(clippy::suspicious_arithmetic_impl)]
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| grlex(b.0, a.0));
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { self.variables[v].clone() } else { format!("{}^{k}", self.variables[v]) })
                .collect();
            if mono.is_empty() || !mag.is_one() {
                write!(f, "{mag}")?;
                if !mono.is_empty() {
                    write!(f, "*")?;
                }
            }
            write!(f, "{}", mono.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

/// JSON form of an equation system: the variable order and one monomial list per polynomial.
#[derive(Debug, Clone, Serialize)]
pub struct EquationExport {
    pub variables: Vec<String>,
    pub equations: Vec<serde_json::Value>,
}

pub fn export_equations(variables: &[String], eqs: &[MultiPoly]) -> EquationExport {
    EquationExport { variables: variables.to_vec(), equations: eqs.iter().map(MultiPoly::monomials_json).collect() }
}
