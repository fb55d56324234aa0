use num_traits::{One, Zero};
use serde::Serialize;

use super::paths::{enumerate_ensemble, enumerate_path_systems, PathSystem};
use super::{BoundaryData, EdgeWeighting, LayeredDigraph, PathFunctional};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::linalg::Matrix;

/// Transfer matrix of the gap `n -> n+1`.
fn gap_matrix(g: &LayeredDigraph, w: &EdgeWeighting, n: usize) -> Matrix<Rational> {
    let mut m = Matrix::zeros(g.layer_len(n), g.layer_len(n + 1));
    for (k, &(a, b)) in g.edges(n).iter().enumerate() {
        m[(a, b)] = w.get(n, k).clone();
    }
    m
}

/// `W(x, y)` for `x` in `V_m`, `y` in `V_n`: the weighted sum over directed
/// paths, as a product of per-gap transfer matrices.
pub fn layer_transition(
    g: &LayeredDigraph,
    w: &EdgeWeighting,
    m: usize,
    n: usize,
) -> Result<Matrix<Rational>> {
    g.check_layer(m)?;
    g.check_layer(n)?;
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "transition from layer {m} back to layer {n}"
        )));
    }
    let mut acc = Matrix::identity(g.layer_len(m));
    for gap in m..n {
        acc = &acc * &gap_matrix(g, w, gap);
    }
    Ok(acc)
}

/// Product of the edge weights along a single path.
pub fn path_weight(w: &EdgeWeighting, g: &LayeredDigraph, path: &[usize]) -> Rational {
    path.windows(2)
        .enumerate()
        .map(|(n, e)| {
            g.edge_index(n, e[0], e[1])
                .map(|k| w.get(n, k).clone())
                .unwrap_or_else(Rational::zero)
        })
        .fold(Rational::one(), |a, b| a * b)
}

fn system_weight(w: &EdgeWeighting, g: &LayeredDigraph, s: &PathSystem) -> Rational {
    s.paths
        .iter()
        .map(|p| path_weight(w, g, p))
        .fold(Rational::one(), |a, b| a * b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LgvReport {
    #[serde(serialize_with = "crate::graph::schema::ser_rational")]
    pub determinant: Rational,
    #[serde(serialize_with = "crate::graph::schema::ser_rational")]
    pub brute_sum: Rational,
    pub equal: bool,
    pub systems: usize,
}

/// Compares `det[W(x_i, y_j)]` with the weighted count of disjoint path systems.
/// `xs` and `ys` are put into planar order first.
pub fn lgv_check(
    g: &LayeredDigraph,
    w: &EdgeWeighting,
    xs: &[usize],
    ys: &[usize],
) -> Result<LgvReport> {
    let t = g.layer_count();
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "{} sources but {} sinks",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().any(|&x| x >= g.layer_len(0)) || ys.iter().any(|&y| y >= g.layer_len(t)) {
        return Err(Error::InvalidArgument("source or sink out of range".into()));
    }
    let xs = g.planar_order(0, xs);
    let ys = g.planar_order(t, ys);
    let full = layer_transition(g, w, 0, t)?;
    let m = Matrix::from_fn(xs.len(), ys.len(), |i, j| full[(xs[i], ys[j])].clone());
    let determinant = m.determinant();
    let systems = enumerate_path_systems(g, xs.len(), &xs, &ys);
    let brute_sum = systems
        .iter()
        .map(|s| system_weight(w, g, s))
        .fold(Rational::zero(), |a, b| a + b);
    Ok(LgvReport {
        equal: determinant == brute_sum,
        determinant,
        brute_sum,
        systems: systems.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EynardMehtaReport {
    #[serde(serialize_with = "crate::graph::schema::ser_rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "crate::graph::schema::ser_rational")]
    pub rhs: Rational,
    pub equal: bool,
}

/// A weighted graph together with boundary data: the measure
/// `nu(Pi) = det[psi_i(pi_j(b))] prod w(pi_i) det[phi_i(pi_j(d))]`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    graph: LayeredDigraph,
    weights: EdgeWeighting,
    boundary: BoundaryData,
    gaps: Vec<Matrix<Rational>>,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn mat_vec(m: &Matrix<Rational>, v: &[Rational]) -> Vec<Rational> {
    (0..m.rows()).map(|i| dot(m.row(i), v)).collect()
}

fn vec_mat(v: &[Rational], m: &Matrix<Rational>) -> Vec<Rational> {
    (0..m.cols())
        .map(|j| (0..m.rows()).fold(Rational::zero(), |acc, i| acc + &v[i] * &m[(i, j)]))
        .collect()
}

/// `sum_i a_i (x) b_i` as a matrix.
fn outer_sum(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Matrix<Rational> {
    let (r, c) = (a[0].len(), b[0].len());
    Matrix::from_fn(r, c, |x, y| {
        a.iter()
            .zip(b)
            .fold(Rational::zero(), |acc, (ai, bi)| acc + &ai[x] * &bi[y])
    })
}

impl Ensemble {
    pub fn new(graph: LayeredDigraph, weights: EdgeWeighting, boundary: BoundaryData) -> Result<Self> {
        // re-validate shapes: the pieces may have been built against different graphs
        let weights = EdgeWeighting::new(&graph, weights.values)?;
        let boundary = BoundaryData::new(
            &graph,
            boundary.sources,
            boundary.sinks,
            boundary.psi,
            boundary.phi,
        )?;
        let gaps = (0..graph.layer_count())
            .map(|n| gap_matrix(&graph, &weights, n))
            .collect();
        Ok(Self {
            graph,
            weights,
            boundary,
            gaps,
        })
    }

    pub fn graph(&self) -> &LayeredDigraph {
        &self.graph
    }

    pub fn weights(&self) -> &EdgeWeighting {
        &self.weights
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn particles(&self) -> usize {
        self.boundary.particles()
    }

    /// `W_{m,n}` for `m <= n`.
    pub fn transition(&self, m: usize, n: usize) -> Result<Matrix<Rational>> {
        self.graph.check_layer(m)?;
        self.graph.check_layer(n)?;
        if m > n {
            return Err(Error::InvalidArgument(format!(
                "transition from layer {m} back to layer {n}"
            )));
        }
        Ok(self.gaps[m..n]
            .iter()
            .fold(Matrix::identity(self.graph.layer_len(m)), |acc, g| &acc * g))
    }

    /// `phi_j` pushed back to layer `n`: `W_{n,T} phi_j` on all of `V_n`.
    pub fn phi_at(&self, n: usize) -> Result<Vec<Vec<Rational>>> {
        let t = self.graph.layer_count();
        let w = self.transition(n, t)?;
        Ok((0..self.particles())
            .map(|j| mat_vec(&w, &self.boundary.phi_on_layer(j, self.graph.layer_len(t))))
            .collect())
    }

    /// `psi_i` pushed forward to layer `n`: `psi_i W_{0,n}` on all of `V_n`.
    pub fn psi_at(&self, n: usize) -> Result<Vec<Vec<Rational>>> {
        let w = self.transition(0, n)?;
        Ok((0..self.particles())
            .map(|i| vec_mat(&self.boundary.psi_on_layer(i, self.graph.layer_len(0)), &w))
            .collect())
    }

    /// `phi_j^(b)` restricted to the source set.
    pub fn varphi_b(&self) -> Vec<Vec<Rational>> {
        let full = self.phi_at(0).expect("layer 0 exists");
        full.into_iter()
            .map(|f| self.boundary.sources().iter().map(|&x| f[x].clone()).collect())
            .collect()
    }

    /// `G_ij = <psi_i, phi_j^(b)>`.
    pub fn gram(&self) -> Matrix<Rational> {
        let vb = self.varphi_b();
        let n = self.particles();
        Matrix::from_fn(n, n, |i, j| dot(&self.boundary.psi()[i], &vb[j]))
    }

    pub fn is_biorthogonal(&self) -> bool {
        self.gram() == Matrix::identity(self.particles())
    }

    /// Replaces `psi` by `G^{-1} psi`, after which `<psi_i, phi_j^(b)> = delta_ij`.
    pub fn biorthogonalize(&self) -> Result<Self> {
        let g = self.gram();
        let inv = exact::inverse(&g).ok_or(Error::SingularGram)?;
        let psi = self.boundary.psi();
        let n = self.particles();
        let width = psi[0].len();
        let new_psi = (0..n)
            .map(|i| {
                (0..width)
                    .map(|x| (0..n).fold(Rational::zero(), |acc, k| acc + &inv[(i, k)] * &psi[k][x]))
                    .collect()
            })
            .collect();
        Ok(Self {
            boundary: self.boundary.with_psi(new_psi),
            ..self.clone()
        })
    }

    fn normalized(&self) -> Result<Self> {
        if self.is_biorthogonal() {
            Ok(self.clone())
        } else {
            self.biorthogonalize()
        }
    }

    /// `K(x1, x2) = sum_i phi_i^(b)(x1) psi_i(x2)` on the source set.
    pub fn correlation_projector(&self) -> Matrix<Rational> {
        outer_sum(&self.varphi_b(), self.boundary.psi())
    }

    fn nu(&self, s: &PathSystem, w: &EdgeWeighting) -> Rational {
        let src_pos = |v: usize| self.boundary.sources().iter().position(|&x| x == v).unwrap();
        let dst_pos = |v: usize| self.boundary.sinks().iter().position(|&y| y == v).unwrap();
        let starts: Vec<usize> = s.starts().into_iter().map(src_pos).collect();
        let ends: Vec<usize> = s.ends().into_iter().map(dst_pos).collect();
        let n = self.particles();
        let a = Matrix::from_fn(n, n, |i, j| self.boundary.psi()[i][starts[j]].clone());
        let b = Matrix::from_fn(n, n, |i, j| self.boundary.phi()[i][ends[j]].clone());
        a.determinant() * system_weight(w, &self.graph, s) * b.determinant()
    }

    fn systems(&self) -> Vec<PathSystem> {
        enumerate_ensemble(
            &self.graph,
            self.particles(),
            self.boundary.sources(),
            self.boundary.sinks(),
        )
    }

    /// `Z = sum_Pi nu(Pi)` by enumeration.
    pub fn partition_function(&self) -> Rational {
        self.systems()
            .iter()
            .map(|s| self.nu(s, &self.weights))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// `Z = det G` (Cauchy-Binet), independent of enumeration.
    pub fn partition_function_cauchy_binet(&self) -> Rational {
        self.gram().determinant()
    }

    /// `sum_Pi prod_i f(pi_i) nu(Pi) / Z` by enumeration, i.e. `Z~/Z` with
    /// `w~_e = f_n(e) w_e`. Equals the expectation under `nu` when `Z = 1`.
    pub fn functional_expectation_bruteforce(&self, f: &PathFunctional) -> Result<Rational> {
        let tilde = self.weights.times(f);
        let mut z = Rational::zero();
        let mut zt = Rational::zero();
        for s in self.systems() {
            z += self.nu(&s, &self.weights);
            zt += self.nu(&s, &tilde);
        }
        if z.is_zero() {
            return Err(Error::SingularGram);
        }
        Ok(zt / z)
    }

    /// `det(I - K + W~ W^{-1} K)` on the source set, with
    /// `W^{-1} K h = sum_i <psi_i, h> phi_i`.
    pub fn path_integral_determinant(&self, f: &PathFunctional) -> Result<Rational> {
        let ens = self.normalized()?;
        let t = ens.graph.layer_count();
        let tilde = ens.weights.times(f);
        let wt = layer_transition(&ens.graph, &tilde, 0, t)?;
        let sources = ens.boundary.sources();
        let width = ens.graph.layer_len(t);
        let wt_phi: Vec<Vec<Rational>> = (0..ens.particles())
            .map(|j| {
                let full = mat_vec(&wt, &ens.boundary.phi_on_layer(j, width));
                sources.iter().map(|&x| full[x].clone()).collect()
            })
            .collect();
        let k = ens.correlation_projector();
        let m = outer_sum(&wt_phi, ens.boundary.psi());
        let id = Matrix::identity(sources.len());
        Ok((&(&id - &k) + &m).determinant())
    }

    /// `K_n = sum_i phi^(n)_i (x) psi^(n)_i` on `V_n`.
    pub fn kernel_at(&self, n: usize) -> Result<Matrix<Rational>> {
        self.cross_kernel(n, n)
    }

    /// `W_{i,j} K_j = sum_k phi^(i)_k (x) psi^(j)_k`, valid for every order of `i`, `j`.
    pub fn cross_kernel(&self, i: usize, j: usize) -> Result<Matrix<Rational>> {
        Ok(outer_sum(&self.phi_at(i)?, &self.psi_at(j)?))
    }

    /// The extended kernel block `K^ext(i, .; j, .)`: `W_{i,j} K_j` for
    /// `i >= j` and `-W_{i,j}(I - K_j)` for `i < j`.
    pub fn extended_kernel_graph(&self, i: usize, j: usize) -> Result<Matrix<Rational>> {
        let wk = self.cross_kernel(i, j)?;
        if i >= j {
            Ok(wk)
        } else {
            Ok(&wk - &self.transition(i, j)?)
        }
    }

    /// `rho(v)`: the normalized `nu`-mass of systems passing through `v` in layer `n`.
    pub fn one_point_correlation(&self, n: usize, v: usize) -> Result<Rational> {
        self.graph.check_layer(n)?;
        let mut z = Rational::zero();
        let mut hit = Rational::zero();
        for s in self.systems() {
            let nu = self.nu(&s, &self.weights);
            if s.touches(n, v) {
                hit += &nu;
            }
            z += nu;
        }
        if z.is_zero() {
            return Err(Error::SingularGram);
        }
        Ok(hit / z)
    }

    /// Compares `E[prod_i prod_n (1 - q_n(pi_i(n)))]` by enumeration with
    /// `det(I - Q K^ext)` over the layers `0..T`.
    pub fn eynard_mehta_check(&self, q: &[Vec<Rational>]) -> Result<EynardMehtaReport> {
        let t = self.graph.layer_count();
        if q.len() != t || q.iter().enumerate().any(|(n, qn)| qn.len() != self.graph.layer_len(n)) {
            return Err(Error::DimensionMismatch(
                "q must give one value per vertex of layers 0..T-1".into(),
            ));
        }
        let ens = self.normalized()?;
        let qbar: Vec<Vec<Rational>> = q
            .iter()
            .map(|qn| qn.iter().map(|v| Rational::one() - v).collect())
            .collect();
        let mut lhs = Rational::zero();
        for s in ens.systems() {
            let weight = s.paths.iter().fold(Rational::one(), |acc, p| {
                (0..t).fold(acc, |acc, n| acc * &qbar[n][p[n]])
            });
            if !weight.is_zero() {
                lhs += weight * ens.nu(&s, &ens.weights);
            }
        }
        let blocks = (0..t)
            .map(|i| {
                (0..t)
                    .map(|j| {
                        let k = ens.extended_kernel_graph(i, j)?;
                        let qk = k.scale_rows_cols(&q[i], &vec![Rational::one(); k.cols()]);
                        Ok(if i == j {
                            &Matrix::identity(k.rows()) - &qk
                        } else {
                            qk.map(|v| -v.clone())
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let rhs = Matrix::from_blocks(&blocks)?.determinant();
        Ok(EynardMehtaReport {
            equal: lhs == rhs,
            lhs,
            rhs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{indicator_boundary, simple_walk, unit};
    use super::super::EdgeValues;
    use super::*;
    use crate::exact::{int, rat};

    fn walk_ensemble() -> Ensemble {
        let g = simple_walk();
        let w = unit(&g);
        let bd = indicator_boundary(&g);
        Ensemble::new(g, w, bd).unwrap()
    }

    #[test]
    fn transition_counts_paths() {
        let g = simple_walk();
        let w = layer_transition(&g, &unit(&g), 0, 2).unwrap();
        assert_eq!(w[(0, 0)], int(2));
        assert_eq!(w[(0, 1)], int(1));
        assert_eq!(w[(1, 0)], int(1));
        assert_eq!(w[(1, 1)], int(2));
        assert_eq!(w.determinant(), int(3));
        assert_eq!(layer_transition(&g, &unit(&g), 1, 1).unwrap(), Matrix::identity(3));
        assert!(matches!(
            layer_transition(&g, &unit(&g), 0, 3),
            Err(Error::LayerOutOfRange { index: 3, last: 2 })
        ));
    }

    #[test]
    fn lgv_on_simple_walk() {
        let g = simple_walk();
        let r = lgv_check(&g, &unit(&g), &[0, 1], &[0, 1]).unwrap();
        assert_eq!(r.determinant, int(3));
        assert!(r.equal);
        let single = lgv_check(&g, &unit(&g), &[1], &[0]).unwrap();
        assert_eq!(single.determinant, int(1));
        assert!(single.equal);
    }

    #[test]
    fn lgv_funnel_is_zero() {
        let g = LayeredDigraph::new(
            vec![vec![0, 1], vec![0], vec![0, 1]],
            vec![vec![(0, 0), (1, 0)], vec![(0, 0), (0, 1)]],
        )
        .unwrap();
        let w = EdgeValues::new(&g, vec![vec![int(2), rat(1, 3)], vec![int(5), rat(-1, 2)]]).unwrap();
        let r = lgv_check(&g, &w, &[0, 1], &[0, 1]).unwrap();
        assert!(r.determinant.is_zero() && r.equal);
    }

    #[test]
    fn partition_and_biorthogonalization() {
        let ens = walk_ensemble();
        assert_eq!(ens.partition_function(), int(3));
        assert_eq!(ens.partition_function_cauchy_binet(), int(3));
        let b = ens.biorthogonalize().unwrap();
        assert!(b.is_biorthogonal());
        assert_eq!(b.partition_function(), int(1));
        assert_eq!(b.biorthogonalize().unwrap().boundary(), b.boundary());
        let k = b.correlation_projector();
        assert_eq!(&k * &k, k);
        assert_eq!(k.trace(), int(2));
    }

    #[test]
    fn single_delta_boundary() {
        let g = simple_walk();
        let w = EdgeValues::constant(&g, rat(1, 2));
        let bd = BoundaryData::new(&g, vec![0], vec![1], vec![vec![int(1)]], vec![vec![int(1)]]).unwrap();
        let ens = Ensemble::new(g, w, bd).unwrap();
        assert_eq!(ens.partition_function(), rat(1, 4));
        let b = ens.biorthogonalize().unwrap();
        assert_eq!(b.boundary().psi()[0][0], int(4));
        assert_eq!(b.correlation_projector().trace(), int(1));
    }

    #[test]
    fn zero_phi_is_singular() {
        let g = simple_walk();
        let bd = BoundaryData::new(&g, vec![0], vec![0], vec![vec![int(1)]], vec![vec![int(0)]]).unwrap();
        let ens = Ensemble::new(g.clone(), unit(&g), bd).unwrap();
        assert_eq!(ens.biorthogonalize().unwrap_err(), Error::SingularGram);
        assert_eq!(
            ens.path_integral_determinant(&unit(&g)).unwrap_err(),
            Error::SingularGram
        );
    }

    #[test]
    fn functional_trivial_cases() {
        let ens = walk_ensemble();
        let g = ens.graph().clone();
        let one = EdgeValues::constant(&g, int(1));
        assert_eq!(ens.functional_expectation_bruteforce(&one).unwrap(), int(1));
        assert_eq!(ens.path_integral_determinant(&one).unwrap(), int(1));
        let zero = EdgeValues::constant(&g, int(0));
        assert_eq!(ens.functional_expectation_bruteforce(&zero).unwrap(), int(0));
        assert_eq!(ens.path_integral_determinant(&zero).unwrap(), int(0));
    }

    #[test]
    fn avoiding_a_vertex() {
        let ens = walk_ensemble();
        let g = ens.graph().clone();
        // f kills every edge into V_1 vertex 1 (position 1)
        let f = EdgeValues::new(
            &g,
            vec![
                g.edges(0).iter().map(|&(_, b)| int(i64::from(b != 1))).collect(),
                vec![int(1); g.edges(1).len()],
            ],
        )
        .unwrap();
        let rho = ens.one_point_correlation(1, 1).unwrap();
        let brute = ens.functional_expectation_bruteforce(&f).unwrap();
        assert_eq!(brute, int(1) - rho);
        assert_eq!(ens.path_integral_determinant(&f).unwrap(), brute);
    }

    #[test]
    fn extended_kernel_structure() {
        let ens = walk_ensemble().biorthogonalize().unwrap();
        for n in 0..=2 {
            let k = ens.kernel_at(n).unwrap();
            assert_eq!(&k * &k, k);
            assert_eq!(ens.extended_kernel_graph(n, n).unwrap(), k);
            for v in 0..ens.graph().layer_len(n) {
                assert_eq!(k[(v, v)], ens.one_point_correlation(n, v).unwrap());
            }
        }
        // projector relations between layers
        for m in 0..=2 {
            for n in m..=2 {
                let w = ens.transition(m, n).unwrap();
                let km = ens.kernel_at(m).unwrap();
                let kn = ens.kernel_at(n).unwrap();
                assert_eq!(&w * &kn, &km * &w);
                let back = ens.cross_kernel(n, m).unwrap();
                assert_eq!(&w * &back, km);
            }
        }
    }

    #[test]
    fn eynard_mehta_cases() {
        let ens = walk_ensemble();
        let zero = vec![vec![int(0); 2], vec![int(0); 3]];
        let r = ens.eynard_mehta_check(&zero).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone()), (int(1), int(1)));
        let mut single = zero.clone();
        single[1][1] = int(1);
        let r = ens.eynard_mehta_check(&single).unwrap();
        let b = ens.biorthogonalize().unwrap();
        assert_eq!(r.rhs, int(1) - b.extended_kernel_graph(1, 1).unwrap()[(1, 1)].clone());
        assert!(r.equal);
        let q = vec![vec![rat(1, 3), rat(-2, 5)], vec![rat(3, 4), rat(1, 7), int(2)]];
        assert!(ens.eynard_mehta_check(&q).unwrap().equal);
    }
}
