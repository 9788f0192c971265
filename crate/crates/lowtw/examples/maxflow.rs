//! Maximum vertex flow by divide and conquer on the decomposition tree,
//! with the Menger certificate checked explicitly.

use lowtw::flow::max_vertex_flow_td;
use lowtw::gen;
use lowtw::oracle::brute_maxflow;
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for trial in 0..5 {
        let (d, td) = gen::random_low_tw_digraph(120, 4, 0.8, &mut rng);
        // pick non-adjacent terminals
        let (s, t) = loop {
            let s = rng.gen_range(0..d.n());
            let t = rng.gen_range(0..d.n());
            if s != t && !d.has_arc(s, t) && !d.has_arc(t, s) {
                break (s, t);
            }
        };
        let (flow, cut) = max_vertex_flow_td(&d, s, t, &td, false).unwrap();
        flow.validate(&d, &[s], &[t]).unwrap();
        assert!(cut.separates(&d, &[s], &[t]));
        assert_eq!(flow.size(), cut.vertices.len(), "Menger certificate");
        let (oracle_flow, _) = brute_maxflow(&d, &[s], &[t]).unwrap();
        assert_eq!(flow.size(), oracle_flow.size(), "oracle agreement");
        println!(
            "trial {trial}: n = {}, arcs = {}, flow({s},{t}) = {} = |cut|, oracle agrees",
            d.n(),
            d.arc_count(),
            flow.size()
        );
    }
}
