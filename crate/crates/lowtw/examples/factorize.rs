//! Guided Gaussian elimination on a banded matrix: build the strong
//! ordering from the path decomposition, factor, and read off rank,
//! determinant, a maximal nonsingular submatrix and a solution.

use lowtw::elim::{
    guided_elimination, ordering_from_path_decomp, pluq, rank_det_maxsubmatrix, solve,
    SolveOutcome,
};
use lowtw::field::{Field, PrimeField};
use lowtw::gen;
use rand::{Rng, SeedableRng};

fn main() {
    let field = PrimeField::new(1_000_003).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let n = 400;
    let (m, pd) = gen::banded_matrix(n, n, 5, 0.7, &field, |r| r.gen_range(0..1_000_003), &mut rng);
    println!("matrix: {}x{} with {} nonzeros, path width {}", n, n, m.nnz(), pd.width().unwrap());

    let so = ordering_from_path_decomp(&m, &pd).unwrap();
    println!(
        "completion H: {} edges, ordering degeneracy {}",
        so.h.m(),
        so.degeneracy
    );

    let res = guided_elimination(&m, &so, &field).unwrap();
    println!(
        "eliminated: nnz(U) = {}, nnz(L) = {} (bound {})",
        res.u.nnz(),
        res.l.nnz(),
        res.h_edges + res.h_vertices
    );

    let fac = pluq(&res, &field);
    assert_eq!(fac.product(&field), m, "P L U Q must reproduce the matrix");
    let (rank, det, rows, cols) = rank_det_maxsubmatrix(&fac, &field);
    println!("rank {rank}, det {:?}", det);
    println!("maximal nonsingular submatrix: {} rows x {} cols", rows.len(), cols.len());

    let x0: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1_000_003)).collect();
    let rhs = m.mat_vec(&x0, &field).unwrap();
    match solve(&fac, &rhs, &field).unwrap() {
        SolveOutcome::Solution(x) => {
            assert_eq!(m.mat_vec(&x, &field).unwrap(), rhs);
            println!("solved M x = r, residual is exactly zero");
        }
        SolveOutcome::Inconsistent => unreachable!("constructed system is consistent"),
    }
    let _ = field.one();
}
