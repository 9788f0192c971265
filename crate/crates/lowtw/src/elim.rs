//! Gaussian elimination guided by a strong ordering of a completion of the
//! matrix's bipartite graph. The ordering pins all pivoting, fill-in stays
//! inside the completion, and the per-vertex arrays of late neighbors give
//! the field-operation bound.

use crate::decomp::{validate_pd, validate_tpd, PathDecomposition, TreePartitionDecomposition};
use crate::error::Error;
use crate::field::Field;
use crate::graph::Graph;
use crate::sparse::{permutation_sign, SparseMatrix};

/// A completion H of the bipartite graph of a matrix together with a total
/// order on its vertices (rows 0..n_rows, then columns). Cross-side
/// comparisons only matter inside the width and strongness conditions;
/// the elimination itself never compares a row with a column.
#[derive(Debug, Clone)]
pub struct StrongOrdering {
    pub h: Graph,
    /// position[v] = rank of vertex v in the order.
    pub position: Vec<usize>,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Upper bound on the ordering's width; sizes the late-neighbor arrays.
    pub width_bound: usize,
    /// Measured degeneracy (max number of later neighbors).
    pub degeneracy: usize,
}

impl StrongOrdering {
    fn measure_degeneracy(h: &Graph, position: &[usize]) -> usize {
        (0..h.n())
            .map(|v| h.neighbors(v).iter().filter(|&&u| position[u] >= position[v]).count())
            .max()
            .unwrap_or(0)
    }
}

/// Strong ordering from a path decomposition of the bipartite graph: bags
/// become cliques and vertices are ordered by the index of their last bag.
/// Degeneracy is at most the decomposition width.
pub fn ordering_from_path_decomp<F: Field>(
    m: &SparseMatrix<F>,
    pd: &PathDecomposition,
) -> Result<StrongOrdering, Error> {
    let gm = m.bipartite_graph();
    validate_pd(pd, &gm).map_err(Error::from)?;
    let v_count = gm.n();
    let b = pd.width().unwrap_or(0);
    let (first, last) = pd.intervals(v_count);

    // H has an edge between any two vertices sharing a bag, i.e. whenever
    // the occurrence intervals intersect; sweep over bags to enumerate
    // each such pair once
    let mut h = Graph::empty(v_count);
    let mut by_first: Vec<Vec<usize>> = vec![Vec::new(); pd.bags.len()];
    for v in 0..v_count {
        by_first[first[v]].push(v);
    }
    let mut active: Vec<usize> = Vec::new();
    for i in 0..pd.bags.len() {
        active.retain(|&u| last[u] >= i);
        for &v in &by_first[i] {
            for &u in &active {
                h.add_edge(u, v)?;
            }
            active.push(v);
        }
    }
    assert!(h.m() <= 2 * b.max(1) * v_count.max(1), "completion has too many edges");

    let mut verts: Vec<usize> = (0..v_count).collect();
    verts.sort_by_key(|&v| (last[v], v));
    let mut position = vec![0usize; v_count];
    for (pos, &v) in verts.iter().enumerate() {
        position[v] = pos;
    }
    let degeneracy = StrongOrdering::measure_degeneracy(&h, &position);
    assert!(degeneracy <= b.max(0), "degeneracy exceeded the path width");
    Ok(StrongOrdering {
        h,
        position,
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        width_bound: b,
        degeneracy,
    })
}

/// Strong ordering from a tree-partition decomposition: cliques on bags,
/// bicliques across tree edges, vertices ordered upward from the leaves of
/// the tree rooted at node 0. Degeneracy is at most twice the width.
pub fn ordering_from_tpd<F: Field>(
    m: &SparseMatrix<F>,
    tpd: &TreePartitionDecomposition,
) -> Result<StrongOrdering, Error> {
    let gm = m.bipartite_graph();
    validate_tpd(tpd, &gm).map_err(Error::from)?;
    let v_count = gm.n();
    let b = tpd.width();
    let q = tpd.num_nodes();

    let mut h = Graph::empty(v_count);
    for bag in &tpd.bags {
        for (i, &u) in bag.iter().enumerate() {
            for &v in &bag[i + 1..] {
                h.add_edge(u, v)?;
            }
        }
    }
    for (x, y) in tpd.tree.edges() {
        for &u in &tpd.bags[x] {
            for &v in &tpd.bags[y] {
                if !h.has_edge(u, v) {
                    h.add_edge(u, v)?;
                }
            }
        }
    }
    assert!(h.m() <= 2 * b.max(1) * v_count.max(1), "completion has too many edges");

    // post-order of the tree rooted at 0, children ascending
    let mut post = Vec::with_capacity(q);
    let mut seen = vec![false; q];
    let mut stack = vec![(0usize, false)];
    seen[0] = true;
    while let Some((x, expanded)) = stack.pop() {
        if expanded {
            post.push(x);
            continue;
        }
        stack.push((x, true));
        let mut cs: Vec<usize> =
            tpd.tree.neighbors(x).iter().copied().filter(|&y| !seen[y]).collect();
        cs.sort_unstable();
        for &c in cs.iter().rev() {
            seen[c] = true;
            stack.push((c, false));
        }
    }
    let mut position = vec![0usize; v_count];
    let mut pos = 0;
    for &x in &post {
        for &v in &tpd.bags[x] {
            position[v] = pos;
            pos += 1;
        }
    }
    let degeneracy = StrongOrdering::measure_degeneracy(&h, &position);
    assert!(degeneracy <= 2 * b, "degeneracy exceeded twice the tree-partition width");
    Ok(StrongOrdering {
        h,
        position,
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        width_bound: 2 * b,
        degeneracy,
    })
}

/// Exhaustive strongness verification; test-scale only. Returns the first
/// counterexample (i, j, k, l) if one exists.
pub fn check_strong_ordering(so: &StrongOrdering) -> Result<(), (usize, usize, usize, usize)> {
    let h = &so.h;
    let pos = &so.position;
    for i in 0..h.n() {
        let nbrs = h.neighbors(i);
        for &j in nbrs {
            for &k in nbrs {
                if j == k || pos[j] > pos[k] {
                    continue;
                }
                for &l in h.neighbors(j) {
                    if l != k && pos[l] >= pos[i] && !h.has_edge(k, l) {
                        return Err((i, j, k, l));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Output of the guided elimination: U is the eliminated matrix, L holds
/// the multipliers (unit diagonal), and the removal orders drive the PLUQ
/// refinement.
#[derive(Debug)]
pub struct EliminationResult<F: Field> {
    pub u: SparseMatrix<F>,
    pub l: SparseMatrix<F>,
    pub row_removal_order: Vec<usize>,
    pub col_removal_order: Vec<usize>,
    /// Number of pivot pairs; equals the rank of the matrix.
    pub pivots: usize,
    pub h_edges: usize,
    pub h_vertices: usize,
}

/// Algorithm: process columns in order; the earliest row with a nonzero
/// entry in the column eliminates all other nonzeros there, then the pivot
/// row and column are removed together. Fill-in provably stays inside H;
/// this is asserted by counting update coverage on every pivot.
pub fn guided_elimination<F: Field>(
    m: &SparseMatrix<F>,
    so: &StrongOrdering,
    field: &F,
) -> Result<EliminationResult<F>, Error> {
    let n_rows = m.n_rows();
    let n_cols = m.n_cols();
    if so.n_rows != n_rows || so.n_cols != n_cols {
        return Err(Error::DimensionMismatch { expected: n_rows + n_cols, got: so.n_rows + so.n_cols });
    }
    let v_count = n_rows + n_cols;
    let h = &so.h;
    let pos = &so.position;
    let is_col = |v: usize| v >= n_rows;

    // edge records for the row-column edges of H
    let mut rec_rows: Vec<usize> = Vec::new();
    let mut rec_cols: Vec<usize> = Vec::new();
    let mut rec_val: Vec<F::Elem> = Vec::new();
    let mut adj_rec: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v_count]; // (nbr, rec)
    for (u, v) in h.edges() {
        if is_col(u) == is_col(v) {
            continue; // same-side completion edge, never holds a value
        }
        let (r, c) = if is_col(u) { (v, u - n_rows) } else { (u, v - n_rows) };
        let rec = rec_val.len();
        rec_rows.push(r);
        rec_cols.push(c);
        rec_val.push(m.get(r, c).cloned().unwrap_or_else(|| field.zero()));
        adj_rec[r].push((n_rows + c, rec));
        adj_rec[n_rows + c].push((r, rec));
    }
    // matrix entries must all lie on H edges
    let placed: usize = rec_val.iter().filter(|v| !field.is_zero(v)).count();
    if placed != m.nnz() {
        return Err(Error::Precondition(
            "some matrix entry lies outside the completion graph".into(),
        ));
    }
    for l in adj_rec.iter_mut() {
        l.sort_by_key(|&(nbr, _)| pos[nbr]);
    }

    // p-arrays: the last width_bound neighbors of every vertex (all of H,
    // both sides), each carrying its edge record when one exists
    let w = so.width_bound.max(1);
    let mut p_arr: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v_count];
    for v in 0..v_count {
        let mut nbrs: Vec<usize> = h.neighbors(v).to_vec();
        nbrs.sort_by_key(|&u| pos[u]);
        let start = nbrs.len().saturating_sub(w);
        for &u in &nbrs[start..] {
            let rec = adj_rec[v]
                .iter()
                .find(|&&(nbr, _)| nbr == u)
                .map(|&(_, r)| r)
                .unwrap_or(usize::MAX);
            p_arr[v].push((u, rec));
        }
    }

    let mut removed = vec![false; v_count];
    let mut a_val: Vec<F::Elem> = vec![field.zero(); v_count];
    let mut a_mark: Vec<usize> = vec![usize::MAX; v_count];
    let mut rec_mark: Vec<usize> = vec![usize::MAX; rec_val.len()];

    let mut cols_in_order: Vec<usize> = (n_rows..v_count).collect();
    cols_in_order.sort_by_key(|&v| pos[v]);

    let mut l_entries: Vec<(usize, usize, F::Elem)> = Vec::new();
    let mut row_removal: Vec<usize> = Vec::new();
    let mut col_removal: Vec<usize> = Vec::new();
    let mut pivots = 0usize;

    for (step, &iv) in cols_in_order.iter().enumerate() {
        // earliest unremoved row with a nonzero entry in this column
        let mut pivot: Option<(usize, usize)> = None; // (row vertex, rec)
        for &(rv, rec) in &adj_rec[iv] {
            if !removed[rv] && !field.is_zero(&rec_val[rec]) {
                pivot = Some((rv, rec));
                break; // adj_rec is sorted by position
            }
        }
        let Some((jv, pivot_rec)) = pivot else {
            removed[iv] = true;
            col_removal.push(iv - n_rows);
            continue;
        };

        let piv_inv = field.inv(&rec_val[pivot_rec])?;

        // R: other rows with nonzero in column i; C: columns with nonzero
        // in row j (including i itself)
        let mut r_rows: Vec<usize> = Vec::new();
        for &(rv, rec) in &adj_rec[iv] {
            if rv != jv && !removed[rv] && !field.is_zero(&rec_val[rec]) {
                a_val[rv] = field.mul(&rec_val[rec], &piv_inv);
                a_mark[rv] = step;
                l_entries.push((rv, jv, a_val[rv].clone()));
                r_rows.push(rv);
            }
        }
        let mut c_cols: Vec<usize> = Vec::new();
        for &(cv, rec) in &adj_rec[jv] {
            if !removed[cv] && !field.is_zero(&rec_val[rec]) {
                a_val[cv] = rec_val[rec].clone();
                a_mark[cv] = step;
                c_cols.push(cv);
            }
        }

        // entry updates over R x C, found through the p-arrays; every pair
        // must be an H edge or the ordering was not strong
        let expected = r_rows.len() * c_cols.len();
        let mut performed = 0usize;
        for &kv in &r_rows {
            for &(nbr, rec) in &p_arr[kv] {
                if rec != usize::MAX
                    && is_col(nbr)
                    && a_mark[nbr] == step
                    && rec_mark[rec] != step
                {
                    rec_mark[rec] = step;
                    let delta = field.mul(&a_val[kv], &a_val[nbr]);
                    rec_val[rec] = field.sub(&rec_val[rec], &delta);
                    performed += 1;
                }
            }
        }
        for &cv in &c_cols {
            for &(nbr, rec) in &p_arr[cv] {
                if rec != usize::MAX
                    && !is_col(nbr)
                    && a_mark[nbr] == step
                    && rec_mark[rec] != step
                {
                    rec_mark[rec] = step;
                    let delta = field.mul(&a_val[nbr], &a_val[cv]);
                    rec_val[rec] = field.sub(&rec_val[rec], &delta);
                    performed += 1;
                }
            }
        }
        assert_eq!(
            performed, expected,
            "fill-in outside the completion: the ordering is not strong"
        );

        removed[iv] = true;
        removed[jv] = true;
        col_removal.push(iv - n_rows);
        row_removal.push(jv);
        pivots += 1;
    }

    // remaining rows must be empty; remove them in position order
    let mut rest: Vec<usize> = (0..n_rows).filter(|&r| !removed[r]).collect();
    rest.sort_by_key(|&r| pos[r]);
    for &rv in &rest {
        for &(_, rec) in &adj_rec[rv] {
            assert!(
                field.is_zero(&rec_val[rec]),
                "left-over row {rv} is not empty; the ordering was not strong"
            );
        }
        row_removal.push(rv);
    }

    let mut u_entries = Vec::new();
    for (rec, val) in rec_val.iter().enumerate() {
        if !field.is_zero(val) {
            u_entries.push((rec_rows[rec], rec_cols[rec], val.clone()));
        }
    }
    let u = SparseMatrix::from_entries(n_rows, n_cols, u_entries, field)?;
    let mut l = SparseMatrix::identity(n_rows, field);
    for (k, j, val) in l_entries {
        l.set(k, j, val, field);
    }
    assert!(
        l.nnz() <= h.m() + v_count,
        "L exceeded the |E(H)|+|V(H)| bound"
    );

    Ok(EliminationResult {
        u,
        l,
        row_removal_order: row_removal,
        col_removal_order: col_removal,
        pivots,
        h_edges: h.m(),
        h_vertices: v_count,
    })
}

/// M = P * L' * U' * Q with permutations P, Q taken from the removal
/// orders, L' unit lower-triangular (column-echelon) and U' row-echelon.
#[derive(Debug)]
pub struct PluqFactorization<F: Field> {
    /// p[t] = original row removed t-th.
    pub p: Vec<usize>,
    pub l: SparseMatrix<F>,
    pub u: SparseMatrix<F>,
    /// q[s] = original column removed s-th.
    pub q: Vec<usize>,
    pub rank: usize,
}

pub fn pluq<F: Field>(res: &EliminationResult<F>, field: &F) -> PluqFactorization<F> {
    let p = res.row_removal_order.clone();
    let q = res.col_removal_order.clone();
    let u = res.u.permute_rows(&p).permute_cols(&q);
    // L' = P L P^{-1}: entry (t1, t2) = L[p[t1], p[t2]]
    let n = res.l.n_rows();
    let mut pos_p = vec![0usize; n];
    for (t, &r) in p.iter().enumerate() {
        pos_p[r] = t;
    }
    let mut l_entries = Vec::new();
    for (r, c, v) in res.l.entries() {
        l_entries.push((pos_p[r], pos_p[c], v));
    }
    let l = SparseMatrix::from_entries(n, n, l_entries, field).expect("permuted L is valid");
    PluqFactorization { p, l, u, q, rank: res.pivots }
}

impl<F: Field> PluqFactorization<F> {
    /// Recomposes P * L' * U' * Q; test-scale verification helper.
    pub fn product(&self, field: &F) -> SparseMatrix<F> {
        let lu = self.l.multiply(&self.u, field).expect("L'U' dimensions");
        // rows: original row p[t] takes reindexed row t; columns symmetric
        lu.permute_rows(&invert_perm(&self.p)).permute_cols(&invert_perm(&self.q))
    }

    pub fn is_shape_valid(&self, field: &F) -> bool {
        is_row_echelon(&self.u, field) && is_unit_lower_triangular(&self.l, field)
    }
}

pub fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

pub fn is_row_echelon<F: Field>(m: &SparseMatrix<F>, _field: &F) -> bool {
    let mut prev: Option<usize> = None;
    let mut seen_zero_row = false;
    for r in 0..m.n_rows() {
        match m.row(r).first() {
            None => seen_zero_row = true,
            Some(&(c, _)) => {
                if seen_zero_row {
                    return false; // nonzero row below a zero row
                }
                if let Some(pc) = prev {
                    if c <= pc {
                        return false;
                    }
                }
                prev = Some(c);
            }
        }
    }
    true
}

pub fn is_unit_lower_triangular<F: Field>(m: &SparseMatrix<F>, field: &F) -> bool {
    if !m.is_square() {
        return false;
    }
    for r in 0..m.n_rows() {
        match m.get(r, r) {
            Some(v) if *v == field.one() => {}
            _ => return false,
        }
        if m.row(r).iter().any(|&(c, _)| c > r) {
            return false;
        }
    }
    true
}

/// Rank, determinant (square matrices), and a maximal nonsingular
/// submatrix given by original row and column index sets.
pub fn rank_det_maxsubmatrix<F: Field>(
    f: &PluqFactorization<F>,
    field: &F,
) -> (usize, Option<F::Elem>, Vec<usize>, Vec<usize>) {
    let rank = f.rank;
    let n = f.l.n_rows();
    let m = f.u.n_cols();
    let det = if n == m {
        if rank < n {
            Some(field.zero())
        } else {
            let mut d = field.one();
            for t in 0..n {
                d = field.mul(&d, f.u.get(t, t).expect("full-rank echelon diagonal"));
            }
            let sign = permutation_sign(&f.p) * permutation_sign(&f.q);
            if sign < 0 {
                d = field.neg(&d);
            }
            Some(d)
        }
    } else {
        None
    };
    let mut rows = Vec::with_capacity(rank);
    let mut cols = Vec::with_capacity(rank);
    for t in 0..rank {
        rows.push(f.p[t]);
        let (lead, _) = f.u.row(t).first().expect("pivot row is nonzero");
        cols.push(f.q[*lead]);
    }
    rows.sort_unstable();
    cols.sort_unstable();
    (rank, det, rows, cols)
}

#[derive(Debug, PartialEq)]
pub enum SolveOutcome<F: Field> {
    Solution(Vec<F::Elem>),
    Inconsistent,
}

/// Solves M x = r through the factorization: permute, forward-substitute
/// through L', back-substitute through U' (free variables pinned to zero,
/// zero rows demand zero right-hand sides), permute back.
pub fn solve<F: Field>(
    f: &PluqFactorization<F>,
    r: &[F::Elem],
    field: &F,
) -> Result<SolveOutcome<F>, Error> {
    let n = f.l.n_rows();
    let m = f.u.n_cols();
    if r.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: r.len() });
    }
    // v = P^{-1} r
    let mut v: Vec<F::Elem> = f.p.iter().map(|&orig| r[orig].clone()).collect();
    // forward: L' w = v, unit diagonal; v becomes w in place
    for t in 0..n {
        let mut acc = v[t].clone();
        for (t2, val) in f.l.row(t) {
            if *t2 < t {
                acc = field.sub(&acc, &field.mul(val, &v[*t2]));
            }
        }
        v[t] = acc;
    }
    // back: U' z = w
    for t in f.rank..n {
        if !field.is_zero(&v[t]) {
            return Ok(SolveOutcome::Inconsistent);
        }
    }
    let mut z = vec![field.zero(); m];
    for t in (0..f.rank).rev() {
        let row = f.u.row(t);
        let (lead, lead_val) = row.first().expect("pivot row");
        let mut acc = v[t].clone();
        for (c, val) in &row[1..] {
            acc = field.sub(&acc, &field.mul(val, &z[*c]));
        }
        z[*lead] = field.div(&acc, lead_val)?;
    }
    // x = Q z
    let mut x = vec![field.zero(); m];
    for (s, &orig) in f.q.iter().enumerate() {
        x[orig] = z[s].clone();
    }
    Ok(SolveOutcome::Solution(x))
}
