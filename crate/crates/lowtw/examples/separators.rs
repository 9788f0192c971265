//! Balanced separators: run the approximation on grids and inspect the
//! outcome and its verified balance.

use lowtw::gen;
use lowtw::graph::Measure;
use lowtw::separators::{find_balanced_separator, verify_outcome, SeparatorOutcome};

fn main() {
    // k = 2 exercises the full round structure (no vertex holds a 1/(100k)
    // fraction of the measure); k = 40 short-circuits on the heavy-vertex
    // check and returns a single-vertex separator
    for n in [15usize, 20] {
        let g = gen::grid_graph(n, n);
        let mu = Measure::uniform(n * n);
        for k in [2usize, 40] {
            let out = find_balanced_separator(&g, &mu, k).unwrap();
            verify_outcome(&g, &mu, k, &out).unwrap();
            let desc = match &out {
                SeparatorOutcome::LargeSep(y) => {
                    format!("7/8-balanced separator of {} vertices (cap {})", y.len(), 100 * k * k)
                }
                SeparatorOutcome::SmallSep(x) => {
                    format!("(1 - 1/{}k)-balanced separator of {} vertices", 100, x.len())
                }
                SeparatorOutcome::TreewidthAtLeastK => "treewidth >= k".to_string(),
            };
            println!("{n}x{n} grid, k = {k}: {desc}");
        }
    }
    // on a tree, small cuts between far-apart pieces exist, so the search
    // returns a tiny separator through the pair-cut branch
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(9);
    let mut tree = lowtw::graph::Graph::empty(2000);
    for v in 1..2000 {
        let p = rand::Rng::gen_range(&mut rng, 0..v);
        tree.add_edge(p, v).unwrap();
    }
    let mu = Measure::uniform(2000);
    let out = find_balanced_separator(&tree, &mu, 2).unwrap();
    verify_outcome(&tree, &mu, 2, &out).unwrap();
    match out {
        SeparatorOutcome::SmallSep(x) => println!("random tree, k = 2: small separator {x:?}"),
        SeparatorOutcome::LargeSep(y) => println!("random tree, k = 2: large separator of {} vertices", y.len()),
        SeparatorOutcome::TreewidthAtLeastK => unreachable!("trees have treewidth 1"),
    }
}
