//! JSON file formats for losses, surrogates, set functions and links.
//!
//! Every value is written as an exact rational string. Emitting a parsed file
//! reproduces the original bytes whenever the original was itself emitted by
//! this module.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::discrete::DiscreteLoss;
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::geometry::{Norm, Vector};
use crate::polyhedral::{AffinePiece, PolyhedralLoss};
use crate::rational::Rational;
use crate::zoo::lovasz::SetFunction;

/// Discrete loss file: `{outcomes, reports, matrix, embedding?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub outcomes: Vec<String>,
    pub reports: Vec<String>,
    pub matrix: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<BTreeMap<String, Vector>>,
}

impl LossSpec {
    pub fn new(loss: &DiscreteLoss, embedding: Option<&Embedding>) -> Self {
        LossSpec {
            outcomes: loss.outcomes.clone(),
            reports: loss.reports.clone(),
            matrix: loss.matrix.clone(),
            embedding: embedding.map(Embedding::to_map),
        }
    }

    pub fn loss(&self) -> Result<DiscreteLoss> {
        DiscreteLoss::new(self.outcomes.clone(), self.reports.clone(), self.matrix.clone())
    }

    pub fn embedding(&self) -> Result<Option<Embedding>> {
        self.embedding.as_ref().map(Embedding::from_map).transpose()
    }
}

/// Polyhedral loss file: `{d, outcomes, pieces, embedding?}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateSpec {
    pub d: usize,
    pub outcomes: Vec<String>,
    pub pieces: Vec<Vec<AffinePiece>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<BTreeMap<String, Vector>>,
}

impl SurrogateSpec {
    pub fn new(surrogate: &PolyhedralLoss, embedding: Option<&Embedding>) -> Self {
        SurrogateSpec {
            d: surrogate.dim,
            outcomes: surrogate.outcomes.clone(),
            pieces: surrogate.pieces.clone(),
            embedding: embedding.map(Embedding::to_map),
        }
    }

    pub fn surrogate(&self) -> Result<PolyhedralLoss> {
        PolyhedralLoss::new(self.d, self.outcomes.clone(), self.pieces.clone())
    }

    pub fn embedding(&self) -> Result<Option<Embedding>> {
        self.embedding.as_ref().map(Embedding::from_map).transpose()
    }
}

/// Set function file: `{k, values}` with `values[mask] = f(S)`, where bit
/// `i` of `mask` marks element `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFunctionSpec {
    pub k: usize,
    pub values: Vec<Rational>,
}

impl SetFunctionSpec {
    pub fn new(f: &SetFunction) -> Self {
        SetFunctionSpec { k: f.k, values: f.values.clone() }
    }

    pub fn set_function(&self) -> Result<SetFunction> {
        SetFunction::new(self.k, self.values.clone())
    }
}

/// Link file. `thickened` is rebuilt from the surrogate's optimal-set family
/// at resolution `grid_m`; the other kinds are closed-form links.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LinkSpec {
    Thickened {
        norm: Norm,
        epsilon: Rational,
        grid_m: u32,
        /// Reports preferred when the envelope has several elements, in order.
        #[serde(default)]
        tie_break: Vec<String>,
        embedding: BTreeMap<String, Vector>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        certificate: Option<CertificateSpec>,
    },
    Abstain {
        n: usize,
        norm: Norm,
    },
    Sign {
        k: usize,
        /// Coordinates equal to 0 count as `+1` when set.
        #[serde(default = "default_true")]
        zero_positive: bool,
    },
    TopK {
        n: usize,
        k: usize,
    },
    Hinge,
}

fn default_true() -> bool {
    true
}

/// Summary of an epsilon validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub ladder: Vec<Rational>,
    pub critical_radius: Option<Rational>,
    /// Member indices of each minimal subfamily with empty intersection.
    pub subfamilies: Vec<SubfamilySpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubfamilySpec {
    pub members: Vec<usize>,
    pub radius: Rational,
}

/// Canonical JSON text (pretty-printed, trailing newline).
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
