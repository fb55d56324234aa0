use super::LayeredDigraph;

/// `N` vertex-disjoint directed paths, each listing one vertex index per layer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathSystem {
    pub paths: Vec<Vec<usize>>,
}

impl PathSystem {
    /// Starting vertices `pi_i(b)` in `V_0`.
    pub fn starts(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p[0]).collect()
    }

    /// Terminal vertices `pi_i(d)` in `V_T`.
    pub fn ends(&self) -> Vec<usize> {
        self.paths.iter().map(|p| *p.last().unwrap()).collect()
    }

    /// Whether some path passes through vertex `v` of layer `n`.
    pub fn touches(&self, n: usize, v: usize) -> bool {
        self.paths.iter().any(|p| p[n] == v)
    }
}

/// Advances all paths one layer at a time, keeping the vertices at each layer
/// pairwise distinct, and calls `emit` for every complete system.
fn extend(
    g: &LayeredDigraph,
    layer: usize,
    k: usize,
    paths: &mut Vec<Vec<usize>>,
    used: &mut Vec<bool>,
    accept_end: &dyn Fn(usize) -> bool,
    emit: &mut dyn FnMut(&[Vec<usize>]),
) {
    let t = g.layer_count();
    if layer == t {
        emit(paths);
        return;
    }
    if k == paths.len() {
        let width = if layer + 2 <= t { g.layer_len(layer + 2) } else { 0 };
        let mut next_used = vec![false; width];
        extend(g, layer + 1, 0, paths, &mut next_used, accept_end, emit);
        return;
    }
    let from = paths[k][layer];
    for &(to, _) in g.successors(layer, from) {
        if used[to] || (layer + 1 == t && !accept_end(to)) {
            continue;
        }
        used[to] = true;
        paths[k].push(to);
        extend(g, layer, k + 1, paths, used, accept_end, emit);
        paths[k].pop();
        used[to] = false;
    }
}

fn systems_from(
    g: &LayeredDigraph,
    starts: &[usize],
    accept_end: &dyn Fn(usize) -> bool,
    out: &mut Vec<PathSystem>,
) {
    let mut paths: Vec<Vec<usize>> = starts.iter().map(|&s| vec![s]).collect();
    let mut used = vec![false; g.layer_len(1)];
    extend(g, 0, 0, &mut paths, &mut used, accept_end, &mut |p| {
        out.push(PathSystem { paths: p.to_vec() })
    });
}

/// All vertex-disjoint systems whose `i`-th path starts at `xs[i]` and whose
/// endpoints are exactly the set `ys` (in any matching), in lexicographic order.
pub fn enumerate_path_systems(
    g: &LayeredDigraph,
    n: usize,
    xs: &[usize],
    ys: &[usize],
) -> Vec<PathSystem> {
    if xs.len() != n || ys.len() != n {
        return Vec::new();
    }
    let t = g.layer_count();
    let mut sinks = vec![false; g.layer_len(t)];
    for &y in ys {
        sinks[y] = true;
    }
    let mut out = Vec::new();
    // disjoint paths ending in an n-element set cover it
    systems_from(g, xs, &|v| sinks[v], &mut out);
    out.sort();
    out
}

/// All unordered systems of `n` disjoint paths from `sources` to `sinks`.
/// Each system is listed once, paths ordered by starting vertex index.
pub fn enumerate_ensemble(
    g: &LayeredDigraph,
    n: usize,
    sources: &[usize],
    sinks: &[usize],
) -> Vec<PathSystem> {
    let t = g.layer_count();
    let mut is_sink = vec![false; g.layer_len(t)];
    for &y in sinks {
        is_sink[y] = true;
    }
    let mut pool = sources.to_vec();
    pool.sort_unstable();
    let mut out = Vec::new();
    for starts in combinations(&pool, n) {
        systems_from(g, &starts, &|v| is_sink[v], &mut out);
    }
    out.sort();
    out
}

/// `k`-element subsets of `items` in lexicographic order.
pub(crate) fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}
