//! Model catalog: parameter records, Hamiltonian densities, R-matrices, symmetry
//! representations and transforms.

mod density;
pub mod fermion;
mod rmatrix;
pub mod so4;
mod symmetry;
mod transform;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::tensor::{real, TensorError, C64};

pub use density::{
    build_hamiltonian_density, hsu2_density, model18_couplings, oscillator_coeffs, hsu2_row, HamiltonianParams,
    OscillatorCoeffs, HSU2_SYMBOLS,
};
pub use rmatrix::{build_r_matrix, r_template, template_support, RMatrixFn, POLE_GUARD};
pub use symmetry::{representation, rho2, Generator, Side, SymmetryRep};
pub use transform::{
    apply_to_density, apply_to_r, free_hubbard_kinetic, model11_sp4_density, model12_free_hubbard_image,
    model4_to_model6, twist_violation, Transform,
};

/// 16x16 two-site operator.
pub type LocalOperator = crate::tensor::ComplexMatrix;

pub const ALL_MODELS: [u8; 18] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown model id {0}")]
    UnknownModel(u8),
    #[error("model {model}: missing parameter `{name}`")]
    MissingParam { model: u8, name: String },
    #[error("model {model}: unexpected parameter `{name}`")]
    UnexpectedParam { model: u8, name: String },
    #[error("model {model}: branch {branch:?} is not available")]
    InvalidBranch { model: u8, branch: Option<Branch> },
    #[error("model {model}: {reason}")]
    Constraint { model: u8, reason: String },
    #[error("model {0} has no R-matrix in the catalog")]
    NoRMatrix(u8),
    #[error("{label}: u = {u} is within {distance:.3e} of a pole")]
    Pole { label: String, u: C64, distance: f64 },
    #[error("twist precondition violated: |[R, X⊗X]| = {0:.3e}")]
    TwistPrecondition(f64),
    #[error("basis change matrix is singular")]
    SingularBasisChange,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Degenerate sub-cases of models 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Generic,
    BZero,
    APlusCZero,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Generic => "generic",
            Branch::BZero => "b=0",
            Branch::APlusCZero => "a+c=0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "generic" => Some(Branch::Generic),
            "b=0" => Some(Branch::BZero),
            "a+c=0" => Some(Branch::APlusCZero),
            _ => None,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Branch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Branch::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown branch `{s}`")))
    }
}

/// Branches a model admits; the first entry is the default.
pub fn branches(model: u8) -> &'static [Branch] {
    match model {
        1 => &[Branch::Generic, Branch::BZero, Branch::APlusCZero],
        2 => &[Branch::Generic, Branch::BZero],
        _ => &[],
    }
}

/// Parameter names expected by `model` on `branch`.
pub fn param_names(model: u8, branch: Option<Branch>) -> Result<&'static [&'static str], CatalogError> {
    let b = resolve_branch(model, branch)?;
    Ok(match (model, b) {
        (1, Some(Branch::Generic)) | (2, Some(Branch::Generic)) => &["a", "b", "c", "d"],
        (1, Some(Branch::BZero)) | (2, Some(Branch::BZero)) => &["a", "c", "d"],
        (1, Some(Branch::APlusCZero)) => &["a", "b", "d"],
        (3, _) => &["a", "b", "c"],
        (4..=7, _) => &["rho", "a", "phi"],
        (8..=12, _) => &["rho", "phi"],
        (13, _) => &["A", "B", "C"],
        (14, _) => &["A", "B"],
        (15..=17, _) => &["a1", "a2", "a3", "a4"],
        (18, _) => &["theta", "a2"],
        _ => return Err(CatalogError::UnknownModel(model)),
    })
}

/// Model 18 may alternatively be given through its Hamiltonian couplings.
const MODEL18_HAMILTONIAN_PARAMS: [&str; 2] = ["a", "b"];

fn resolve_branch(model: u8, branch: Option<Branch>) -> Result<Option<Branch>, CatalogError> {
    if !ALL_MODELS.contains(&model) {
        return Err(CatalogError::UnknownModel(model));
    }
    let allowed = branches(model);
    match branch {
        None if allowed.is_empty() => Ok(None),
        None => Ok(Some(allowed[0])),
        Some(b) if allowed.contains(&b) => Ok(Some(b)),
        Some(_) => Err(CatalogError::InvalidBranch { model, branch }),
    }
}

/// A catalog entry: model id, optional branch and named parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: u8,
    #[serde(default)]
    pub branch: Option<Branch>,
    #[serde(serialize_with = "ser_params", deserialize_with = "de_params")]
    pub params: BTreeMap<String, C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParamValue {
    Real(f64),
    Pair([f64; 2]),
    Object { re: f64, im: f64 },
}

fn ser_params<S: Serializer>(params: &BTreeMap<String, C64>, s: S) -> Result<S::Ok, S::Error> {
    let out: BTreeMap<&str, ParamValue> = params
        .iter()
        .map(|(k, v)| (k.as_str(), if v.im == 0.0 { ParamValue::Real(v.re) } else { ParamValue::Pair([v.re, v.im]) }))
        .collect();
    out.serialize(s)
}

fn de_params<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, C64>, D::Error> {
    let raw = BTreeMap::<String, ParamValue>::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| {
            let z = match v {
                ParamValue::Real(x) => real(x),
                ParamValue::Pair([re, im]) | ParamValue::Object { re, im } => C64::new(re, im),
            };
            (k, z)
        })
        .collect())
}

impl ModelSpec {
    pub fn new(model: u8, params: &[(&str, C64)]) -> Self {
        Self { model, branch: None, params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    pub fn real(model: u8, params: &[(&str, f64)]) -> Self {
        Self { model, branch: None, params: params.iter().map(|(k, v)| (k.to_string(), real(*v))).collect() }
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = Some(branch);
        self
    }

    pub fn with_param(mut self, name: &str, value: C64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Branch after defaulting (`generic` for models 1 and 2).
    pub fn effective_branch(&self) -> Option<Branch> {
        resolve_branch(self.model, self.branch).ok().flatten()
    }

    pub fn get(&self, name: &str) -> Result<C64, CatalogError> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| CatalogError::MissingParam { model: self.model, name: name.to_string() })
    }

    /// True when model 18 is specified through (a, b) rather than (theta, a2).
    pub fn model18_by_couplings(&self) -> bool {
        self.model == 18 && self.params.contains_key("a") && !self.params.contains_key("theta")
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let names: &[&str] =
            if self.model18_by_couplings() { &MODEL18_HAMILTONIAN_PARAMS } else { param_names(self.model, self.branch)? };
        for n in names {
            let v = self.get(n)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(CatalogError::Constraint { model: self.model, reason: format!("parameter `{n}` is not finite") });
            }
        }
        if let Some(extra) = self.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(CatalogError::UnexpectedParam { model: self.model, name: extra.clone() });
        }
        let nonzero = |n: &str, why: &str| -> Result<(), CatalogError> {
            if self.get(n)?.norm() < 1e-12 {
                Err(CatalogError::Constraint { model: self.model, reason: why.to_string() })
            } else {
                Ok(())
            }
        };
        match (self.model, self.effective_branch()) {
            (1 | 2, Some(Branch::Generic)) => {
                nonzero("b", "generic branch needs b != 0 (use branch b=0)")?;
                nonzero("d", "generic branch needs d != 0")?;
                if (self.get("a")? + self.get("c")?).norm() < 1e-12 {
                    return Err(CatalogError::Constraint {
                        model: self.model,
                        reason: "generic branch needs a + c != 0 (use branch a+c=0)".into(),
                    });
                }
            }
            (1, Some(Branch::APlusCZero)) => {
                nonzero("b", "branch a+c=0 needs b != 0")?;
                nonzero("d", "branch a+c=0 needs d != 0")?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Reference parameter point used by the verification suites.
    pub fn default_for(model: u8, branch: Option<Branch>) -> Result<Self, CatalogError> {
        let b = resolve_branch(model, branch)?;
        let s = match (model, b) {
            (1, Some(Branch::Generic)) => Self::real(1, &[("a", 0.3), ("b", 0.7), ("c", 0.5), ("d", 1.1)]),
            (1, Some(Branch::BZero)) => Self::real(1, &[("a", 0.3), ("c", 0.5), ("d", 1.1)]),
            (1, Some(Branch::APlusCZero)) => Self::real(1, &[("a", 0.3), ("b", 0.7), ("d", 1.1)]),
            (2, Some(Branch::Generic)) => Self::real(2, &[("a", 0.3), ("b", 0.7), ("c", 0.5), ("d", 0.1)]),
            (2, Some(Branch::BZero)) => Self::real(2, &[("a", 0.3), ("c", 0.5), ("d", 1.1)]),
            (3, _) => Self::real(3, &[("a", 0.3), ("b", 0.5), ("c", 0.7)]),
            (4..=7, _) => Self::real(model, &[("rho", 0.7), ("a", 0.3), ("phi", 0.4)]),
            (8..=12, _) => Self::real(model, &[("rho", 0.7), ("phi", 0.4)]),
            (13, _) => Self::real(13, &[("A", 0.3), ("B", 0.7), ("C", 0.2)]),
            (14, _) => Self::real(14, &[("A", 0.3), ("B", 0.6)]),
            (15..=17, _) => Self::real(model, &[("a1", 0.3), ("a2", 0.7), ("a3", 0.4), ("a4", -0.2)]),
            (18, _) => Self::real(18, &[("theta", 0.4), ("a2", 0.2)]),
            _ => return Err(CatalogError::UnknownModel(model)),
        };
        Ok(Self { branch: if branch.is_some() { b } else { None }, ..s })
    }

    /// Random parameter point; magnitudes in [0.2, 1.2] with random sign, twist angles in [-1, 1].
    pub fn random<R: Rng + ?Sized>(model: u8, branch: Option<Branch>, rng: &mut R) -> Result<Self, CatalogError> {
        let names = param_names(model, branch)?;
        loop {
            let mut params = BTreeMap::new();
            for &n in names {
                let v = if n == "phi" || n == "theta" {
                    rng.random_range(-1.0..1.0)
                } else {
                    let m: f64 = rng.random_range(0.2..1.2);
                    if rng.random_bool(0.5) {
                        m
                    } else {
                        -m
                    }
                };
                params.insert(n.to_string(), real(v));
            }
            let spec = Self { model, branch, params };
            if spec.validate().is_ok() {
                return Ok(spec);
            }
        }
    }

    /// Every catalog entry at its reference point, one per branch.
    pub fn catalog() -> Vec<Self> {
        let mut out = Vec::new();
        for m in ALL_MODELS {
            let bs = branches(m);
            if bs.is_empty() {
                out.push(Self::default_for(m, None).expect("known model"));
            } else {
                for &b in bs {
                    out.push(Self::default_for(m, Some(b)).expect("known model"));
                }
            }
        }
        out
    }

    pub fn label(&self) -> String {
        match self.branch {
            Some(b) => format!("model {} ({})", self.model, b),
            None => format!("model {}", self.model),
        }
    }
}

/// Which symmetry representation the model's density commutes with, if any.
pub fn symmetry_rep_for(model: u8) -> Option<SymmetryRep> {
    match model {
        1..=12 => Some(SymmetryRep::TwoOneOne),
        13 | 14 => Some(SymmetryRep::TwoTwo),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"model": 9, "branch": null, "params": {"rho": 1.0, "phi": 0.0}}"#;
        let spec: ModelSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec, ModelSpec::real(9, &[("rho", 1.0), ("phi", 0.0)]));
        let back: ModelSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let cx: ModelSpec =
            serde_json::from_str(r#"{"model": 5, "params": {"rho": -1, "a": -1, "phi": [0, 2.5]}}"#).unwrap();
        assert_eq!(cx.get("phi").unwrap(), C64::new(0.0, 2.5));
        let br: ModelSpec =
            serde_json::from_str(r#"{"model": 1, "branch": "b=0", "params": {"a": 1, "c": 2, "d": {"re": 3, "im": 0}}}"#)
                .unwrap();
        assert_eq!(br.branch, Some(Branch::BZero));
        assert!(br.validate().is_ok());
    }

    #[test]
    fn validation() {
        assert_eq!(ModelSpec::real(99, &[]).validate(), Err(CatalogError::UnknownModel(99)));
        let m = ModelSpec::real(9, &[("rho", 1.0)]);
        assert!(matches!(m.validate(), Err(CatalogError::MissingParam { .. })));
        let m = ModelSpec::real(1, &[("a", 1.0), ("c", 1.0), ("d", 1.0), ("b", 0.5)]).with_branch(Branch::BZero);
        assert!(matches!(m.validate(), Err(CatalogError::UnexpectedParam { .. })));
        let m = ModelSpec::real(9, &[("rho", 1.0), ("phi", 0.0)]).with_branch(Branch::BZero);
        assert!(matches!(m.validate(), Err(CatalogError::InvalidBranch { .. })));
        let m = ModelSpec::real(2, &[("a", 1.0), ("b", 1.0), ("c", -1.0), ("d", 1.0)]);
        assert!(matches!(m.validate(), Err(CatalogError::Constraint { .. })));
        assert!(ModelSpec::real(18, &[("a", 0.3), ("b", 0.1)]).validate().is_ok());
        for s in ModelSpec::catalog() {
            s.validate().unwrap();
        }
    }
}
