//! Random fixture generators used by the test suite, the examples and the
//! scaling harness. Every generator returns its witness decomposition so
//! callers never have to re-derive one.

use crate::decomp::{PathDecomposition, TreeDecomposition, TreePartitionDecomposition};
use crate::field::Field;
use crate::graph::{DiGraph, Graph};
use crate::sparse::SparseMatrix;
use rand::Rng;

/// Random partial k-tree: build a k-tree by gluing vertices onto k-cliques,
/// then keep each non-skeleton edge with probability `keep`. The returned
/// decomposition (width k) is valid for every subgraph.
pub fn partial_k_tree<R: Rng>(
    n: usize,
    k: usize,
    keep: f64,
    rng: &mut R,
) -> (Graph, TreeDecomposition) {
    assert!(n >= 1);
    let k = k.min(n.saturating_sub(1));
    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut tree = Graph::empty(n.max(1));
    let mut full = Graph::empty(n);
    let base: Vec<usize> = (0..(k + 1).min(n)).collect();
    for &u in &base {
        for &v in &base {
            if u < v {
                full.add_edge(u, v).unwrap();
            }
        }
    }
    bags.push(base.clone());
    let mut parents: Vec<usize> = vec![0];
    for v in (k + 1).min(n)..n {
        let pick = rng.gen_range(0..bags.len());
        let mut attach = bags[pick].clone();
        if attach.len() > k {
            let drop = rng.gen_range(0..attach.len());
            attach.remove(drop);
        }
        for &u in &attach {
            full.add_edge(u, v).unwrap();
        }
        attach.push(v);
        attach.sort_unstable();
        bags.push(attach);
        parents.push(pick);
    }
    for (i, &p) in parents.iter().enumerate().skip(1) {
        tree.add_edge(i, p).unwrap();
    }
    let tree = if bags.len() == tree.n() {
        tree
    } else {
        // fewer bags than reserved nodes (tiny n); shrink
        let mut t = Graph::empty(bags.len());
        for (i, &p) in parents.iter().enumerate().skip(1) {
            t.add_edge(i, p).unwrap();
        }
        t
    };
    let mut g = Graph::empty(n);
    for (u, v) in full.edges() {
        if rng.gen_bool(keep) {
            g.add_edge(u, v).unwrap();
        }
    }
    (g, TreeDecomposition::new(tree, bags))
}

/// Band graph: vertices 0..n with edges within distance `band`, subsampled.
/// Comes with the natural sliding-window path decomposition of width `band`.
pub fn band_graph<R: Rng>(
    n: usize,
    band: usize,
    keep: f64,
    rng: &mut R,
) -> (Graph, PathDecomposition) {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for d in 1..=band {
            let v = u + d;
            if v < n && rng.gen_bool(keep) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    let q = n.saturating_sub(band).max(1);
    let mut bags = Vec::with_capacity(q);
    for i in 0..q {
        bags.push((i..(i + band + 1).min(n)).collect());
    }
    (g, PathDecomposition::new(bags))
}

/// Random sparse matrix whose bipartite graph lives inside a sliding window
/// over rows and columns interleaved; width of the decomposition is `width`.
/// Returned entries are nonzero field samples.
pub fn banded_matrix<F: Field, R: Rng>(
    n_rows: usize,
    n_cols: usize,
    width: usize,
    fill: f64,
    field: &F,
    mut sample: impl FnMut(&mut R) -> F::Elem,
    rng: &mut R,
) -> (SparseMatrix<F>, PathDecomposition) {
    // bipartite vertices: row i at 2i, col j at 2j+1 along a line
    let total = n_rows + n_cols;
    let line = |v: usize| if v % 2 == 0 { v / 2 } else { n_rows + v / 2 }; // to graph label
    let mut entries = Vec::new();
    for i in 0..n_rows {
        let a = 2 * i;
        for b in a.saturating_sub(width)..=(a + width).min(total - 1) {
            if b % 2 == 1 {
                let j = b / 2;
                if j < n_cols && rng.gen_bool(fill) {
                    let mut v = sample(rng);
                    while field.is_zero(&v) {
                        v = sample(rng);
                    }
                    entries.push((i, j, v));
                }
            }
        }
    }
    // guarantee a nonzero diagonal-ish structure so ranks are interesting
    for i in 0..n_rows.min(n_cols) {
        if !entries.iter().any(|&(r, c, _)| r == i && c == i) {
            let mut v = sample(rng);
            while field.is_zero(&v) {
                v = sample(rng);
            }
            entries.push((i, i, v));
        }
    }
    let m = SparseMatrix::from_entries(n_rows, n_cols, entries, field).unwrap();
    // sliding window over the interleaved line gives a path decomposition
    let mut bags = Vec::new();
    let q = total.saturating_sub(width).max(1);
    for s in 0..q {
        let mut bag: Vec<usize> = (s..(s + width + 1).min(total)).map(line).collect();
        bag.sort_unstable();
        bags.push(bag);
    }
    (m, PathDecomposition::new(bags))
}

/// Random tree-partition decomposition plus a graph respecting it: bags of
/// size up to `width` along a random tree, edges inside bags and across
/// tree edges subsampled.
pub fn random_tpd_graph<R: Rng>(
    bags_count: usize,
    width: usize,
    edge_prob: f64,
    rng: &mut R,
) -> (Graph, TreePartitionDecomposition) {
    assert!(bags_count >= 1 && width >= 1);
    let mut tree = Graph::empty(bags_count);
    for v in 1..bags_count {
        let p = rng.gen_range(0..v);
        tree.add_edge(p, v).unwrap();
    }
    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut next = 0usize;
    for _ in 0..bags_count {
        let size = rng.gen_range(1..=width);
        bags.push((next..next + size).collect());
        next += size;
    }
    let mut g = Graph::empty(next);
    for bag in &bags {
        for (i, &u) in bag.iter().enumerate() {
            for &v in &bag[i + 1..] {
                if rng.gen_bool(edge_prob) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
    }
    for (x, y) in tree.edges() {
        for &u in &bags[x] {
            for &v in &bags[y] {
                if rng.gen_bool(edge_prob) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
    }
    (g, TreePartitionDecomposition::new(tree, bags))
}

/// Random orientation-rich digraph over a partial k-tree skeleton: each
/// edge becomes one or both arcs.
pub fn random_low_tw_digraph<R: Rng>(
    n: usize,
    k: usize,
    keep: f64,
    rng: &mut R,
) -> (DiGraph, TreeDecomposition) {
    let (g, td) = partial_k_tree(n, k, keep, rng);
    let mut d = DiGraph::empty(n);
    for (u, v) in g.edges() {
        match rng.gen_range(0..3) {
            0 => d.add_arc(u, v).unwrap(),
            1 => d.add_arc(v, u).unwrap(),
            _ => {
                d.add_arc(u, v).unwrap();
                d.add_arc(v, u).unwrap();
            }
        }
    }
    (d, td)
}

/// n x n grid graph with its vertices in row-major order.
pub fn grid_graph(rows: usize, cols: usize) -> Graph {
    let mut g = Graph::empty(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                g.add_edge(v, v + 1).unwrap();
            }
            if r + 1 < rows {
                g.add_edge(v, v + cols).unwrap();
            }
        }
    }
    g
}

/// Complete graph on n vertices.
pub fn complete_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in 0..u {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{validate_pd, validate_td, validate_tpd};
    use crate::field::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partial_k_tree_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (g, td) = partial_k_tree(30, 3, 0.7, &mut rng);
            validate_td(&td, &g).unwrap();
            assert!(td.width().unwrap() <= 3);
        }
    }

    #[test]
    fn band_graph_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (g, pd) = band_graph(40, 4, 0.5, &mut rng);
        validate_pd(&pd, &g).unwrap();
        assert!(pd.width().unwrap() <= 4);
    }

    #[test]
    fn banded_matrix_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = PrimeField::new(97).unwrap();
        let (m, pd) = banded_matrix(20, 20, 5, 0.6, &f, |r| r.gen_range(0..97), &mut rng);
        let gm = m.bipartite_graph();
        validate_pd(&pd, &gm).unwrap();
    }

    #[test]
    fn random_tpd_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let (g, tpd) = random_tpd_graph(12, 4, 0.5, &mut rng);
            validate_tpd(&tpd, &g).unwrap();
        }
    }
}
