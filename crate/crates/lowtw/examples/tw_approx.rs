//! Approximate the treewidth of a grid and of a random partial 3-tree:
//! either a validated decomposition with bags of size at most 1800k^2, or
//! a verdict that the treewidth is at least k.

use lowtw::decomp::validate_td;
use lowtw::gen;
use lowtw::tw_approx::{approximate_treewidth_with_stats, ApproxResult};
use rand::SeedableRng;

fn main() {
    // small enough for the single-bag base case: eta = 100k^2 dominates
    let grid = gen::grid_graph(12, 12);
    report("12x12 grid", &grid, 13);

    // large enough that the recursion actually splits
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut tree = lowtw::graph::Graph::empty(3000);
    for v in 1..3000 {
        use rand::Rng;
        let p = rng.gen_range(0..v);
        tree.add_edge(p, v).unwrap();
    }
    report("random tree on 3000 vertices", &tree, 2);

    let k9 = gen::complete_graph(9);
    report("K9 with k = 3 (must report the verdict)", &k9, 3);
}

fn report(name: &str, g: &lowtw::graph::Graph, k: usize) {
    println!("== {name}, n = {}, m = {}, k = {k}", g.n(), g.m());
    match approximate_treewidth_with_stats(g, k).unwrap() {
        (ApproxResult::Decomposition(td), stats) => {
            validate_td(&td, g).unwrap();
            println!(
                "   decomposition: {} nodes, width {} (bound {}), recursion depth {}",
                td.num_nodes(),
                td.width().unwrap_or(0),
                1800 * k * k - 1,
                stats.max_depth,
            );
        }
        (ApproxResult::TreewidthAtLeastK, _) => {
            println!("   verdict: treewidth >= {k}");
        }
    }
}
