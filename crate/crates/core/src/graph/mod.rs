//! Non-intersecting path ensembles on finite layered planar DAGs, in exact
//! rational arithmetic.
//!
//! Every determinantal identity here comes paired with a brute-force
//! enumeration over vertex-disjoint path systems, so each side can be checked
//! against the other with `==` on [`Rational`]s.

mod ensemble;
mod paths;
pub mod random;
pub mod schema;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exact::Rational;

pub use ensemble::{layer_transition, lgv_check, path_weight, Ensemble, EynardMehtaReport, LgvReport};
pub use paths::{enumerate_ensemble, enumerate_path_systems, PathSystem};

/// A layered DAG `V_0, ..., V_T` with edges only between consecutive layers.
///
/// Each vertex carries an integer position; within a gap no two edges may
/// strictly cross, which makes vertex-disjoint path systems order preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredDigraph {
    positions: Vec<Vec<i64>>,
    edges: Vec<Vec<(usize, usize)>>,
    successors: Vec<Vec<Vec<(usize, usize)>>>,
    lookup: Vec<HashMap<(usize, usize), usize>>,
}

impl LayeredDigraph {
    /// `layers[n]` lists the positions of the vertices of `V_n`;
    /// `edges[n]` lists `(source, target)` index pairs for the gap `n -> n+1`.
    pub fn new(layers: Vec<Vec<i64>>, edges: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidGraph("need at least two layers (T >= 1)".into()));
        }
        if edges.len() != layers.len() - 1 {
            return Err(Error::InvalidGraph(format!(
                "{} layers need {} edge gaps, got {}",
                layers.len(),
                layers.len() - 1,
                edges.len()
            )));
        }
        for (n, layer) in layers.iter().enumerate() {
            let mut sorted = layer.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate position in layer {n}")));
            }
        }
        let mut successors = Vec::with_capacity(edges.len());
        let mut lookup = Vec::with_capacity(edges.len());
        for (n, gap) in edges.iter().enumerate() {
            let (src, dst) = (&layers[n], &layers[n + 1]);
            let mut map = HashMap::with_capacity(gap.len());
            let mut succ = vec![Vec::new(); src.len()];
            for (k, &(a, b)) in gap.iter().enumerate() {
                if a >= src.len() || b >= dst.len() {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({a},{b}) in gap {n} references a missing vertex"
                    )));
                }
                if map.insert((a, b), k).is_some() {
                    return Err(Error::InvalidGraph(format!(
                        "duplicate edge ({a},{b}) in gap {n}"
                    )));
                }
                succ[a].push((b, k));
            }
            for (k1, &(a, b)) in gap.iter().enumerate() {
                for &(c, d) in &gap[k1 + 1..] {
                    let crosses = (src[a] < src[c] && dst[b] > dst[d])
                        || (src[c] < src[a] && dst[d] > dst[b]);
                    if crosses {
                        return Err(Error::InvalidGraph(format!(
                            "edges ({a},{b}) and ({c},{d}) in gap {n} cross"
                        )));
                    }
                }
            }
            for s in &mut succ {
                s.sort_unstable();
            }
            successors.push(succ);
            lookup.push(map);
        }
        Ok(Self {
            positions: layers,
            edges,
            successors,
            lookup,
        })
    }

    /// `T`, the index of the last layer.
    pub fn layer_count(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn layer_len(&self, n: usize) -> usize {
        self.positions[n].len()
    }

    pub fn positions(&self, n: usize) -> &[i64] {
        &self.positions[n]
    }

    pub fn edges(&self, gap: usize) -> &[(usize, usize)] {
        &self.edges[gap]
    }

    pub fn edge_index(&self, gap: usize, from: usize, to: usize) -> Option<usize> {
        self.lookup[gap].get(&(from, to)).copied()
    }

    /// Successors of vertex `v` of layer `gap`, as `(target, edge index)` sorted by target.
    pub fn successors(&self, gap: usize, v: usize) -> &[(usize, usize)] {
        &self.successors[gap][v]
    }

    pub(crate) fn check_layer(&self, n: usize) -> Result<()> {
        if n > self.layer_count() {
            return Err(Error::LayerOutOfRange {
                index: n,
                last: self.layer_count(),
            });
        }
        Ok(())
    }

    /// Sorts vertex indices of layer `n` by position (the planar order).
    pub fn planar_order(&self, n: usize, vertices: &[usize]) -> Vec<usize> {
        let mut v = vertices.to_vec();
        v.sort_by_key(|&i| self.positions[n][i]);
        v
    }
}

/// Per-edge rational values shaped like the graph's edge lists. Used both for
/// edge weights `w_e` and for path functionals `f_n(e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeValues {
    values: Vec<Vec<Rational>>,
}

pub type EdgeWeighting = EdgeValues;
pub type PathFunctional = EdgeValues;

impl EdgeValues {
    pub fn new(graph: &LayeredDigraph, values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() != graph.layer_count()
            || values
                .iter()
                .enumerate()
                .any(|(n, v)| v.len() != graph.edges(n).len())
        {
            return Err(Error::InvalidGraph(
                "edge values must give exactly one value per edge".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn constant(graph: &LayeredDigraph, value: Rational) -> Self {
        Self {
            values: (0..graph.layer_count())
                .map(|n| vec![value.clone(); graph.edges(n).len()])
                .collect(),
        }
    }

    pub fn get(&self, gap: usize, edge: usize) -> &Rational {
        &self.values[gap][edge]
    }

    pub fn gap(&self, gap: usize) -> &[Rational] {
        &self.values[gap]
    }

    /// Edgewise product, e.g. `w~_e = f_n(e) w_e`.
    pub fn times(&self, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).collect())
                .collect(),
        }
    }
}

/// Boundary functions `psi_i` on the source set and `phi_j` on the sink set.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    n: usize,
    sources: Vec<usize>,
    sinks: Vec<usize>,
    psi: Vec<Vec<Rational>>,
    phi: Vec<Vec<Rational>>,
}

impl BoundaryData {
    /// `sources` index `V_0`, `sinks` index `V_T`; `psi[i][k]` is `psi_i(sources[k])`
    /// and `phi[j][k]` is `phi_j(sinks[k])`.
    pub fn new(
        graph: &LayeredDigraph,
        sources: Vec<usize>,
        sinks: Vec<usize>,
        psi: Vec<Vec<Rational>>,
        phi: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let n = psi.len();
        if n == 0 {
            return Err(Error::InvalidBoundary("N must be positive".into()));
        }
        if phi.len() != n {
            return Err(Error::InvalidBoundary(format!(
                "{} psi functions but {} phi functions",
                n,
                phi.len()
            )));
        }
        if sources.len() < n || sinks.len() < n {
            return Err(Error::InvalidBoundary(format!(
                "need at least N = {n} sources and sinks"
            )));
        }
        let t = graph.layer_count();
        check_vertex_set(&sources, graph.layer_len(0), "source")?;
        check_vertex_set(&sinks, graph.layer_len(t), "sink")?;
        if psi.iter().any(|p| p.len() != sources.len()) {
            return Err(Error::InvalidBoundary("psi length != number of sources".into()));
        }
        if phi.iter().any(|p| p.len() != sinks.len()) {
            return Err(Error::InvalidBoundary("phi length != number of sinks".into()));
        }
        Ok(Self {
            n,
            sources,
            sinks,
            psi,
            phi,
        })
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn psi(&self) -> &[Vec<Rational>] {
        &self.psi
    }

    pub fn phi(&self) -> &[Vec<Rational>] {
        &self.phi
    }

    pub(crate) fn with_psi(&self, psi: Vec<Vec<Rational>>) -> Self {
        Self {
            psi,
            ..self.clone()
        }
    }

    /// `psi_i` as a function on all of `V_0` (zero off the source set).
    pub(crate) fn psi_on_layer(&self, i: usize, width: usize) -> Vec<Rational> {
        spread(&self.sources, &self.psi[i], width)
    }

    pub(crate) fn phi_on_layer(&self, j: usize, width: usize) -> Vec<Rational> {
        spread(&self.sinks, &self.phi[j], width)
    }
}

fn spread(support: &[usize], values: &[Rational], width: usize) -> Vec<Rational> {
    let mut out = vec![Rational::default(); width];
    for (&v, x) in support.iter().zip(values) {
        out[v] = x.clone();
    }
    out
}

fn check_vertex_set(set: &[usize], width: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; width];
    for &v in set {
        if v >= width {
            return Err(Error::InvalidBoundary(format!("{what} vertex {v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidBoundary(format!("duplicate {what} vertex {v}")));
        }
    }
    Ok(())
}
