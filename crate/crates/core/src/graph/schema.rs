//! JSON document format for graphs, weights and boundary data.
//!
//! ```json
//! {
//!   "layers": [[0, 2], [-1, 1, 3], [0, 2]],
//!   "edges": [[[0, 0], [0, 1], [1, 1], [1, 2]], [[0, 0], [1, 0], [1, 1], [2, 1]]],
//!   "weights": [[[1, 1], [1, 1], [1, 1], [1, 1]], [[1, 1], [1, 1], [1, 1], [1, 1]]],
//!   "sources": [0, 1],
//!   "sinks": [0, 1],
//!   "psi": [[[1, 1], [0, 1]], [[0, 1], [1, 1]]],
//!   "phi": [[[1, 1], [0, 1]], [[0, 1], [1, 1]]],
//!   "q": [[[0, 1], [0, 1]], [[1, 2], [0, 1], [0, 1]]]
//! }
//! ```
//!
//! Rationals are `[numerator, denominator]` pairs, a bare integer, or a
//! `"n/d"` string. `sources`/`sinks` default to all of `V_0`/`V_T`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BoundaryData, EdgeValues, LayeredDigraph};
use crate::error::{Error, Result};
use crate::exact::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Pair([i64; 2]),
    Int(i64),
    Text(String),
}

impl RationalRepr {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Self::Pair([_, 0]) => Err(Error::InvalidArgument("zero denominator".into())),
            Self::Pair([n, d]) => Ok(Rational::new(BigInt::from(*n), BigInt::from(*d))),
            Self::Int(n) => Ok(Rational::from_integer(BigInt::from(*n))),
            Self::Text(s) => parse_rational(s),
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Self::Pair([n, d]),
            _ => Self::Text(format_rational(r)),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("cannot parse rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serializes a rational as an exact `"n/d"` string.
pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn de_rational<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    RationalRepr::deserialize(d)?
        .to_rational()
        .map_err(serde::de::Error::custom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub layers: Vec<Vec<i64>>,
    pub edges: Vec<Vec<[usize; 2]>>,
    pub weights: Vec<Vec<RationalRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sinks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<Vec<RationalRepr>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<RationalRepr>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<RationalRepr>>>,
    /// Per-edge path functional `f_n(e)`, shaped like `weights`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<Vec<RationalRepr>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn convert(rows: &[Vec<RationalRepr>]) -> Result<Vec<Vec<Rational>>> {
    rows.iter()
        .map(|r| r.iter().map(RationalRepr::to_rational).collect())
        .collect()
}

fn unconvert(rows: &[Vec<Rational>]) -> Vec<Vec<RationalRepr>> {
    rows.iter()
        .map(|r| r.iter().map(RationalRepr::from_rational).collect())
        .collect()
}

impl GraphDocument {
    pub fn graph(&self) -> Result<LayeredDigraph> {
        LayeredDigraph::new(
            self.layers.clone(),
            self.edges
                .iter()
                .map(|gap| gap.iter().map(|&[a, b]| (a, b)).collect())
                .collect(),
        )
    }

    pub fn weighting(&self, g: &LayeredDigraph) -> Result<EdgeValues> {
        EdgeValues::new(g, convert(&self.weights)?)
    }

    pub fn source_set(&self, g: &LayeredDigraph) -> Vec<usize> {
        self.sources
            .clone()
            .unwrap_or_else(|| (0..g.layer_len(0)).collect())
    }

    pub fn sink_set(&self, g: &LayeredDigraph) -> Vec<usize> {
        self.sinks
            .clone()
            .unwrap_or_else(|| (0..g.layer_len(g.layer_count())).collect())
    }

    /// Boundary data, if both `psi` and `phi` are present.
    pub fn boundary(&self, g: &LayeredDigraph) -> Result<Option<BoundaryData>> {
        match (&self.psi, &self.phi) {
            (Some(psi), Some(phi)) => Ok(Some(BoundaryData::new(
                g,
                self.source_set(g),
                self.sink_set(g),
                convert(psi)?,
                convert(phi)?,
            )?)),
            (None, None) => Ok(None),
            _ => Err(Error::InvalidBoundary("psi and phi must be given together".into())),
        }
    }

    pub fn multipliers(&self) -> Result<Option<Vec<Vec<Rational>>>> {
        self.q.as_deref().map(convert).transpose()
    }

    pub fn path_functional(&self, g: &LayeredDigraph) -> Result<Option<EdgeValues>> {
        self.functional
            .as_deref()
            .map(|f| EdgeValues::new(g, convert(f)?))
            .transpose()
    }

    pub fn from_parts(g: &LayeredDigraph, w: &EdgeValues, bd: Option<&BoundaryData>) -> Self {
        Self {
            layers: (0..=g.layer_count()).map(|n| g.positions(n).to_vec()).collect(),
            edges: (0..g.layer_count())
                .map(|n| g.edges(n).iter().map(|&(a, b)| [a, b]).collect())
                .collect(),
            weights: unconvert(&w.values),
            sources: bd.map(|b| b.sources().to_vec()),
            sinks: bd.map(|b| b.sinks().to_vec()),
            psi: bd.map(|b| unconvert(b.psi())),
            phi: bd.map(|b| unconvert(b.phi())),
            q: None,
            functional: None,
            seed: None,
        }
    }

    pub fn with_multipliers(mut self, q: &[Vec<Rational>]) -> Self {
        self.q = Some(unconvert(q));
        self
    }

    pub fn with_functional(mut self, f: &EdgeValues) -> Self {
        self.functional = Some(unconvert(&f.values));
        self
    }
}
