use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tensor factor of a system: a labeled Hilbert space (or classical
/// alphabet) of a fixed dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

impl Factor {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

/// Ordered list of labeled factors. The empty type is the trivial system.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct SystemType {
    factors: Vec<Factor>,
}

impl TryFrom<Vec<Factor>> for SystemType {
    type Error = Error;
    fn try_from(factors: Vec<Factor>) -> Result<Self> {
        Self::new(factors)
    }
}

impl From<SystemType> for Vec<Factor> {
    fn from(s: SystemType) -> Self {
        s.factors
    }
}

impl SystemType {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &factors {
            if f.dim == 0 {
                return Err(Error::InvalidDimension(format!(
                    "factor `{}` has dim 0",
                    f.label
                )));
            }
            if !seen.insert(f.label.as_str()) {
                return Err(Error::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    /// Single-factor type.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new(vec![Factor::new(label, dim)])
    }

    /// Builds a type from `(label, dim)` pairs.
    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(l, d)| Factor::new(l, d)).collect())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    pub fn get(&self, label: &str) -> Option<&Factor> {
        self.factors.iter().find(|f| f.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.get(label)
            .map(|f| f.dim)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Monoidal product of objects: factors of `self` followed by `other`.
    pub fn concat(&self, other: &SystemType) -> Result<Self> {
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        Self::new(f)
    }

    /// Factors whose labels are not in `labels`, order preserved.
    pub fn without(&self, labels: &[&str]) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .filter(|f| !labels.contains(&f.label.as_str()))
                .cloned()
                .collect(),
        }
    }

    /// Factors named by `labels`, in the order of `labels`.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let f = labels
            .iter()
            .map(|l| {
                self.get(l)
                    .cloned()
                    .ok_or_else(|| Error::UnknownLabel(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(f)
    }

    /// Same dims, labels mapped through `f`.
    pub fn map_labels(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .map(|x| Factor::new(f(&x.label), x.dim))
                .collect(),
        )
    }

    /// The dual system: same dims, labels suffixed with `*`.
    pub fn dual(&self) -> Self {
        self.map_labels(dual_label)
            .expect("dualizing preserves label uniqueness")
    }

    /// Equal as sets of `(label, dim)`, ignoring order.
    pub fn same_factors(&self, other: &SystemType) -> bool {
        self.len() == other.len() && self.factors.iter().all(|f| other.get(&f.label) == Some(f))
    }
}

impl fmt::Display for SystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| format!("{}[{}]", x.label, x.dim))
            .collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

/// Label of the dual of a factor.
pub fn dual_label(label: &str) -> String {
    format!("{label}*")
}
