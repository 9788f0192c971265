//! Brute-force reference implementations. These deliberately share no code
//! with the main algorithms: dense full-pivot elimination, blossom-style
//! augmenting-path matching, repeated-augmentation max flow, subset-DP
//! treewidth, and an independently coded strong-ordering checker.

use crate::error::Error;
use crate::field::Field;
use crate::flow::{augment_once, AugmentOutcome, VertexCut, VertexFlow};
use crate::graph::{DiGraph, Graph};

/// Row-major dense matrix over a field.
#[derive(Debug, Clone)]
pub struct DenseMatrix<F: Field> {
    pub rows: Vec<Vec<F::Elem>>,
    pub n_cols: usize,
}

impl<F: Field> DenseMatrix<F> {
    pub fn new(rows: Vec<Vec<F::Elem>>, n_cols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == n_cols));
        DenseMatrix { rows, n_cols }
    }

    pub fn from_sparse(m: &crate::sparse::SparseMatrix<F>, field: &F) -> Self {
        DenseMatrix { rows: m.to_dense(field), n_cols: m.n_cols() }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Textbook full-pivot elimination: rank, and determinant when square.
pub fn dense_rank_det<F: Field>(
    m: &DenseMatrix<F>,
    field: &F,
) -> (usize, Option<F::Elem>) {
    let n = m.n_rows();
    let w = m.n_cols;
    let mut a = m.rows.clone();
    let mut det = if n == w { Some(field.one()) } else { None };
    let mut rank = 0;
    let mut row = 0;
    for col in 0..w {
        // find a pivot in this column at or below `row`
        let Some(piv) = (row..n).find(|&r| !field.is_zero(&a[r][col])) else {
            if n == w {
                det = Some(field.zero());
            }
            continue;
        };
        if piv != row {
            a.swap(piv, row);
            if let Some(d) = det.take() {
                det = Some(field.neg(&d));
            }
        }
        if let Some(d) = det.take() {
            det = Some(field.mul(&d, &a[row][col]));
        }
        let inv = field.inv(&a[row][col]).expect("pivot is nonzero");
        for r in 0..n {
            if r != row && !field.is_zero(&a[r][col]) {
                let factor = field.mul(&a[r][col], &inv);
                for c in col..w {
                    let sub = field.mul(&factor, &a[row][c]);
                    a[r][c] = field.sub(&a[r][c], &sub);
                }
            }
        }
        rank += 1;
        row += 1;
        if row == n {
            break;
        }
    }
    if n == w && rank < n {
        det = Some(field.zero());
    }
    (rank, det)
}

/// Determinant by cofactor expansion; cross-check for tiny matrices.
pub fn cofactor_det<F: Field>(m: &DenseMatrix<F>, field: &F) -> F::Elem {
    let n = m.n_rows();
    assert_eq!(n, m.n_cols, "cofactor expansion needs a square matrix");
    assert!(n <= 8, "cofactor expansion is exponential");
    fn go<F: Field>(a: &[Vec<F::Elem>], cols: &mut Vec<usize>, field: &F, row: usize) -> F::Elem {
        if cols.is_empty() {
            return field.one();
        }
        let mut acc = field.zero();
        for i in 0..cols.len() {
            let c = cols[i];
            if field.is_zero(&a[row][c]) {
                continue;
            }
            cols.remove(i);
            let minor = go(a, cols, field, row + 1);
            cols.insert(i, c);
            let term = field.mul(&a[row][c], &minor);
            acc = if i % 2 == 0 { field.add(&acc, &term) } else { field.sub(&acc, &term) };
        }
        acc
    }
    let mut cols: Vec<usize> = (0..n).collect();
    go(&m.rows, &mut cols, field, 0)
}

/// Maximum matching by repeated augmenting-path search with blossom
/// contraction; classical and exact on general graphs.
pub fn brute_matching(g: &Graph) -> Result<Vec<(usize, usize)>, Error> {
    let n = g.n();
    if n > 2000 {
        return Err(Error::OracleLimit(format!("brute_matching on n={n}")));
    }
    let mut mate = vec![usize::MAX; n];
    for u in 0..n {
        if mate[u] == usize::MAX {
            augment_from(g, u, &mut mate);
        }
    }
    let mut out = Vec::new();
    for u in 0..n {
        if mate[u] != usize::MAX && u < mate[u] {
            out.push((u, mate[u]));
        }
    }
    Ok(out)
}

/// One round of blossom search from `root`; returns true when an
/// augmenting path was found and flipped.
fn augment_from(g: &Graph, root: usize, mate: &mut [usize]) -> bool {
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut base: Vec<usize> = (0..n).collect();
    let mut in_queue = vec![false; n];
    in_queue[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);

    fn lca(base: &[usize], parent: &[usize], mate: &[usize], mut a: usize, mut b: usize) -> usize {
        let mut used = vec![false; base.len()];
        loop {
            a = base[a];
            used[a] = true;
            if mate[a] == usize::MAX {
                break;
            }
            a = parent[mate[a]];
        }
        loop {
            b = base[b];
            if used[b] {
                return b;
            }
            b = parent[mate[b]];
        }
    }

    fn mark_path(
        base: &mut [usize],
        parent: &mut [usize],
        in_queue: &mut [bool],
        queue: &mut std::collections::VecDeque<usize>,
        mate: &[usize],
        mut v: usize,
        b: usize,
        mut child: usize,
    ) {
        while base[v] != b {
            parent[v] = child;
            let m = mate[v];
            if !in_queue[m] {
                in_queue[m] = true;
                queue.push_back(m);
            }
            let bv = base[v];
            let bm = base[m];
            for x in 0..base.len() {
                if base[x] == bv || base[x] == bm {
                    base[x] = b;
                }
            }
            child = m;
            v = parent[m];
        }
    }

    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if base[u] == base[v] || mate[u] == v {
                continue;
            }
            if v == root || (mate[v] != usize::MAX && parent[mate[v]] != usize::MAX) {
                // odd cycle: contract the blossom
                let b = lca(&base, &parent, mate, u, v);
                mark_path(&mut base, &mut parent, &mut in_queue, &mut queue, mate, u, b, v);
                mark_path(&mut base, &mut parent, &mut in_queue, &mut queue, mate, v, b, u);
            } else if parent[v] == usize::MAX {
                parent[v] = u;
                if mate[v] == usize::MAX {
                    // augmenting path found: flip along parents
                    let mut v = v;
                    while v != usize::MAX {
                        let pv = parent[v];
                        let ppv = mate[pv];
                        mate[v] = pv;
                        mate[pv] = v;
                        v = ppv;
                    }
                    return true;
                } else {
                    let m = mate[v];
                    if !in_queue[m] {
                        in_queue[m] = true;
                        queue.push_back(m);
                    }
                }
            }
        }
    }
    false
}

/// All perfect matchings of a small graph, by branching on the smallest
/// uncovered vertex. Exponential; guarded.
pub fn enumerate_perfect_matchings(g: &Graph) -> Result<Vec<Vec<(usize, usize)>>, Error> {
    let n = g.n();
    if n > 16 {
        return Err(Error::OracleLimit(format!("enumerate_perfect_matchings on n={n}")));
    }
    fn go(
        g: &Graph,
        covered: &mut [bool],
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let Some(u) = covered.iter().position(|&c| !c) else {
            out.push(cur.clone());
            return;
        };
        covered[u] = true;
        for &v in g.neighbors(u) {
            if !covered[v] {
                covered[v] = true;
                cur.push((u, v));
                go(g, covered, cur, out);
                cur.pop();
                covered[v] = false;
            }
        }
        covered[u] = false;
    }
    let mut out = Vec::new();
    let mut covered = vec![false; n];
    let mut cur = Vec::new();
    go(g, &mut covered, &mut cur, &mut out);
    if n % 2 == 1 {
        out.clear();
    }
    Ok(out)
}

/// Maximum flow and minimum cut by running the basic augmentation until it
/// certifies; independent of the divide-and-conquer route.
pub fn brute_maxflow(
    g: &DiGraph,
    sources: &[usize],
    sinks: &[usize],
) -> Result<(VertexFlow, VertexCut), Error> {
    let mut flow = VertexFlow::default();
    loop {
        match augment_once(g, sources, sinks, &flow)? {
            AugmentOutcome::Augmented(f) => flow = f,
            AugmentOutcome::Certified(cut) => return Ok((flow, cut)),
        }
    }
}

/// Exact treewidth by dynamic programming over vertex subsets along
/// elimination orderings. Exponential; limited to 16 vertices.
pub fn exact_treewidth(g: &Graph) -> Result<usize, Error> {
    let n = g.n();
    if n == 0 {
        return Ok(0);
    }
    if n > 16 {
        return Err(Error::OracleLimit(format!("exact_treewidth on n={n}")));
    }
    // q(s, v) = number of vertices outside s∪{v} reachable from v through s
    let q = |s: u32, v: usize| -> usize {
        let mut seen = 1u32 << v;
        let mut stack = vec![v];
        let mut count = 0;
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                let bit = 1u32 << w;
                if seen & bit != 0 {
                    continue;
                }
                seen |= bit;
                if s & bit != 0 {
                    stack.push(w);
                } else {
                    count += 1;
                }
            }
        }
        count
    };
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut f = vec![usize::MAX; full as usize + 1];
    f[0] = 0;
    for s in 1..=full {
        let mut best = usize::MAX;
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let prev = s & !(1 << v);
            if f[prev as usize] == usize::MAX {
                continue;
            }
            let cost = f[prev as usize].max(q(prev, v));
            best = best.min(cost);
        }
        f[s as usize] = best;
    }
    Ok(f[full as usize])
}

/// Exhaustive restatement of the strong-ordering condition, coded
/// independently of the constructive checker: for every i, j, k with
/// ij, ik edges and j before k, every neighbor of j at or after i must
/// also neighbor k.
pub fn brute_strongness(
    h: &Graph,
    position: &[usize],
) -> Result<(), (usize, usize, usize, usize)> {
    let n = h.n();
    assert!(n <= 400, "quadruple enumeration is test-scale only");
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if j == k || !h.has_edge(i, j) || !h.has_edge(i, k) {
                    continue;
                }
                if position[j] > position[k] {
                    continue;
                }
                for l in 0..n {
                    if l == k {
                        continue; // a vertex trivially inherits itself
                    }
                    if h.has_edge(j, l) && position[i] <= position[l] && !h.has_edge(k, l) {
                        return Err((i, j, k, l));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The Petersen graph; a handy fixture with a known maximum matching.
pub fn petersen_graph() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5)); // outer cycle
        edges.push((i, i + 5)); // spokes
        edges.push((i + 5, (i + 2) % 5 + 5)); // inner pentagram
    }
    Graph::from_edges(10, &edges).unwrap()
}
