//! Randomized maximum matching on low-treewidth graphs: size via the rank
//! of a Tutte sample, reconstruction via splitting + ousting, checked
//! against the blossom oracle.

use lowtw::gen;
use lowtw::matching::{matching_size, max_matching, MatchingParams};
use lowtw::oracle::brute_matching;
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let params = MatchingParams { error_exponent: 2, seed: 2024, parallel: false };

    for trial in 0..5 {
        let (g, td) = gen::partial_k_tree(50, 4, 0.6, &mut rng);
        let optimum = brute_matching(&g).unwrap().len();
        let size = matching_size(&g, &td, &params).unwrap();
        let m = max_matching(&g, &td, &params).unwrap();
        m.validate(&g).unwrap();
        println!(
            "trial {trial}: n = {}, m = {}, oracle = {optimum}, size = {size}, reconstructed = {}",
            g.n(),
            g.m(),
            m.len()
        );
        assert!(size <= optimum, "one-sided: never overestimates");
        assert!(m.len() <= optimum);
    }

    // same seed, same matching; parallel recursion agrees with sequential
    let (g, td) = gen::partial_k_tree(60, 3, 0.7, &mut rng);
    let m1 = max_matching(&g, &td, &params).unwrap();
    let m2 = max_matching(&g, &td, &params).unwrap();
    let par = MatchingParams { parallel: true, ..params };
    let m3 = max_matching(&g, &td, &par).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(m1, m3);
    println!("determinism: sequential twice and parallel once all agree ({} edges)", m1.len());
}
