//! Random planar layered graphs and boundary data for property suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BoundaryData, EdgeValues, Ensemble, LayeredDigraph};
use crate::exact::{rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomGraphParams {
    pub max_layers: usize,
    pub max_width: usize,
    pub max_particles: usize,
    pub edge_probability: f64,
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        Self {
            max_layers: 4,
            max_width: 6,
            max_particles: 3,
            edge_probability: 0.6,
        }
    }
}

/// Small nonzero rational with numerator in `-3..=5` and denominator in `1..=4`.
pub fn random_rational(rng: &mut impl Rng) -> Rational {
    let n = loop {
        let n = rng.random_range(-3i64..=5);
        if n != 0 {
            break n;
        }
    };
    rat(n, rng.random_range(1i64..=4))
}

/// Random rational in `[0, 1]` with denominator at most 6; zero is common.
pub fn random_unit_rational(rng: &mut impl Rng) -> Rational {
    let d = rng.random_range(1i64..=6);
    rat(rng.random_range(0..=d), d)
}

/// A random graph with `T` in `1..=max_layers` and widths in `1..=max_width`.
/// Vertex indices are shuffled relative to positions; edges are drawn in random
/// order and kept when they cross nothing already accepted.
pub fn random_graph(rng: &mut impl Rng, p: &RandomGraphParams) -> LayeredDigraph {
    let t = rng.random_range(1..=p.max_layers);
    let layers: Vec<Vec<i64>> = (0..=t)
        .map(|_| {
            let w = rng.random_range(1..=p.max_width);
            let mut pool: Vec<i64> = (0..2 * p.max_width as i64).collect();
            pool.shuffle(rng);
            pool.truncate(w);
            pool
        })
        .collect();
    let edges = (0..t)
        .map(|n| {
            let (src, dst) = (&layers[n], &layers[n + 1]);
            let mut candidates: Vec<(usize, usize)> = (0..src.len())
                .flat_map(|a| (0..dst.len()).map(move |b| (a, b)))
                .collect();
            candidates.shuffle(rng);
            let mut kept: Vec<(usize, usize)> = Vec::new();
            for (a, b) in candidates {
                if !rng.random_bool(p.edge_probability) {
                    continue;
                }
                let crosses = kept.iter().any(|&(c, d)| {
                    (src[a] < src[c] && dst[b] > dst[d]) || (src[c] < src[a] && dst[d] > dst[b])
                });
                if !crosses {
                    kept.push((a, b));
                }
            }
            kept.sort_unstable();
            kept
        })
        .collect();
    LayeredDigraph::new(layers, edges).expect("generator only emits planar graphs")
}

pub fn random_weights(rng: &mut impl Rng, g: &LayeredDigraph) -> EdgeValues {
    let values = (0..g.layer_count())
        .map(|n| g.edges(n).iter().map(|_| random_rational(rng)).collect())
        .collect();
    EdgeValues::new(g, values).expect("shape matches graph")
}

/// Random path functional; each value is zero with probability 1/4.
pub fn random_functional(rng: &mut impl Rng, g: &LayeredDigraph) -> EdgeValues {
    let values = (0..g.layer_count())
        .map(|n| {
            g.edges(n)
                .iter()
                .map(|_| {
                    if rng.random_bool(0.25) {
                        Rational::default()
                    } else {
                        random_rational(rng)
                    }
                })
                .collect()
        })
        .collect();
    EdgeValues::new(g, values).expect("shape matches graph")
}

/// Random `q_n` on layers `0..T`.
pub fn random_multipliers(rng: &mut impl Rng, g: &LayeredDigraph) -> Vec<Vec<Rational>> {
    (0..g.layer_count())
        .map(|n| (0..g.layer_len(n)).map(|_| random_unit_rational(rng)).collect())
        .collect()
}

fn random_subset(rng: &mut impl Rng, width: usize, min: usize) -> Vec<usize> {
    let k = rng.random_range(min..=width);
    let mut v = rand::seq::index::sample(rng, width, k).into_vec();
    v.sort_unstable();
    v
}

/// Random boundary data with `N` in `1..=max_particles`, or `None` when the
/// end layers are too narrow.
pub fn random_boundary(
    rng: &mut impl Rng,
    g: &LayeredDigraph,
    max_particles: usize,
) -> Option<BoundaryData> {
    let t = g.layer_count();
    let cap = max_particles.min(g.layer_len(0)).min(g.layer_len(t));
    if cap == 0 {
        return None;
    }
    let n = rng.random_range(1..=cap);
    let sources = random_subset(rng, g.layer_len(0), n);
    let sinks = random_subset(rng, g.layer_len(t), n);
    let psi = (0..n)
        .map(|_| sources.iter().map(|_| random_rational(rng)).collect())
        .collect();
    let phi = (0..n)
        .map(|_| sinks.iter().map(|_| random_rational(rng)).collect())
        .collect();
    BoundaryData::new(g, sources, sinks, psi, phi).ok()
}

/// Graph, weights, boundary data (with nonsingular Gram matrix), functional
/// and multipliers, all derived from one seed.
#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub seed: u64,
    pub ensemble: Ensemble,
    pub functional: EdgeValues,
    pub multipliers: Vec<Vec<Rational>>,
}

pub fn random_instance(seed: u64, p: &RandomGraphParams) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let g = random_graph(&mut rng, p);
        let w = random_weights(&mut rng, &g);
        let Some(bd) = random_boundary(&mut rng, &g, p.max_particles) else {
            continue;
        };
        let ens = Ensemble::new(g.clone(), w, bd).expect("consistent shapes");
        if num_traits::Zero::is_zero(&ens.partition_function_cauchy_binet()) {
            continue;
        }
        return RandomInstance {
            seed,
            functional: random_functional(&mut rng, &g),
            multipliers: random_multipliers(&mut rng, &g),
            ensemble: ens,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let p = RandomGraphParams::default();
        let a = random_instance(7, &p);
        let b = random_instance(7, &p);
        assert_eq!(a.ensemble.graph(), b.ensemble.graph());
        assert_eq!(a.ensemble.boundary(), b.ensemble.boundary());
        assert_eq!(a.functional, b.functional);
    }

    #[test]
    fn respects_bounds() {
        let p = RandomGraphParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let g = random_graph(&mut rng, &p);
            assert!((1..=4).contains(&g.layer_count()));
            assert!((0..=g.layer_count()).all(|n| (1..=6).contains(&g.layer_len(n))));
        }
    }
}
