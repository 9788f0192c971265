//! Treewidth approximation: given G and k, either a tree decomposition
//! with bags of size at most 1800k^2, or a correct verdict that the
//! treewidth is at least k. Recursive decomposition through balanced
//! separators, with the interface set S kept inside the root bag.

use crate::decomp::{validate_td, TreeDecomposition};
use crate::error::Error;
use crate::graph::{Graph, Measure};
use crate::separators::{find_balanced_separator, SeparatorOutcome};

#[derive(Debug, Clone)]
pub enum ApproxResult {
    Decomposition(TreeDecomposition),
    TreewidthAtLeastK,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ApproxStats {
    pub max_depth: usize,
    pub subcalls: usize,
}

pub fn approximate_treewidth(g: &Graph, k: usize) -> Result<ApproxResult, Error> {
    approximate_treewidth_with_stats(g, k).map(|(r, _)| r)
}

/// Same, also reporting the recursion depth and call count.
pub fn approximate_treewidth_with_stats(
    g: &Graph,
    k: usize,
) -> Result<(ApproxResult, ApproxStats), Error> {
    if k == 0 {
        return Err(Error::Precondition("target width k must be positive".into()));
    }
    if g.n() == 0 {
        return Ok((
            ApproxResult::Decomposition(TreeDecomposition::trivial(0)),
            ApproxStats::default(),
        ));
    }
    if g.m() > k * g.n() {
        // more than kn edges already certifies treewidth >= k
        return Ok((ApproxResult::TreewidthAtLeastK, ApproxStats::default()));
    }
    let eta = 100 * k * k;
    let mut stats = ApproxStats::default();

    struct Frame {
        h: Graph,
        /// interface vertices, h-local labels, sorted
        s: Vec<usize>,
        /// h-local label -> G label
        map: Vec<usize>,
        parent: Option<usize>,
        depth: usize,
    }

    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut parents: Vec<Option<usize>> = Vec::new();
    let mut stack = vec![Frame {
        h: g.clone(),
        s: Vec::new(),
        map: (0..g.n()).collect(),
        parent: None,
        depth: 0,
    }];

    while let Some(frame) = stack.pop() {
        let Frame { h, s, map, parent, depth } = frame;
        stats.subcalls += 1;
        stats.max_depth = stats.max_depth.max(depth);
        let n_h = h.n();
        debug_assert!(s.len() <= 17 * eta && s.len() < n_h);
        if h.m() > k * n_h {
            return Ok((ApproxResult::TreewidthAtLeastK, stats));
        }

        let mut in_s = vec![false; n_h];
        for &v in &s {
            in_s[v] = true;
        }

        // leaf case: few vertices outside the interface
        if n_h - s.len() <= eta {
            let bag: Vec<usize> = map.clone();
            debug_assert!(bag.len() <= 18 * eta);
            bags.push(sorted(bag));
            parents.push(parent);
            continue;
        }

        // pick the separator by measuring either the outside or the
        // interface, depending on how crowded the interface is
        let case_ii = s.len() <= 16 * eta;
        let mu = if case_ii {
            Measure::new(in_s.iter().map(|&b| u64::from(!b)).collect())?
        } else {
            Measure::new(in_s.iter().map(|&b| u64::from(b)).collect())?
        };
        let sep = match find_balanced_separator(&h, &mu, k)? {
            SeparatorOutcome::TreewidthAtLeastK => {
                return Ok((ApproxResult::TreewidthAtLeastK, stats));
            }
            SeparatorOutcome::LargeSep(y) => y,
            SeparatorOutcome::SmallSep(x) => x,
        };
        assert!(sep.len() <= eta, "separator exceeded eta");

        let mut in_b = in_s.clone();
        for &v in &sep {
            in_b[v] = true;
        }
        let b: Vec<usize> = (0..n_h).filter(|&v| in_b[v]).collect();
        assert!(b.len() <= 18 * eta, "bag exceeded 18*eta");

        let node = bags.len();
        bags.push(sorted(b.iter().map(|&v| map[v]).collect()));
        parents.push(parent);

        let comps = h.components_avoiding(&in_b);
        let h_x = n_h - s.len();
        // push in reverse so components are processed smallest-first
        for comp in comps.iter().rev() {
            // neighborhood of the component inside B
            let mut in_comp = vec![false; n_h];
            for &v in comp {
                in_comp[v] = true;
            }
            let mut boundary: Vec<usize> = Vec::new();
            let mut seen_b = vec![false; n_h];
            for &v in comp {
                for &u in h.neighbors(v) {
                    if in_b[u] && !seen_b[u] {
                        seen_b[u] = true;
                        boundary.push(u);
                    }
                }
            }
            boundary.sort_unstable();

            // recursion invariants
            if case_ii {
                assert!(
                    100 * k * comp.len() <= (100 * k - 1) * h_x,
                    "child outside-size did not shrink by the balance factor"
                );
            } else {
                assert!(
                    boundary.len() + k <= s.len(),
                    "child interface did not shrink by k"
                );
            }

            let mut verts = comp.clone();
            verts.extend(boundary.iter().copied());
            verts.sort_unstable();
            let (h_c, submap) = h.induced_subgraph(&verts)?;
            let mut local = vec![usize::MAX; n_h];
            for (i, &v) in submap.iter().enumerate() {
                local[v] = i;
            }
            let s_c: Vec<usize> = boundary.iter().map(|&v| local[v]).collect();
            let map_c: Vec<usize> = submap.iter().map(|&v| map[v]).collect();
            stack.push(Frame {
                h: h_c,
                s: sorted(s_c),
                map: map_c,
                parent: Some(node),
                depth: depth + 1,
            });
        }
    }

    let mut tree = Graph::empty(bags.len());
    for (child, parent) in parents.iter().enumerate() {
        if let Some(p) = parent {
            tree.add_edge(*p, child)?;
        }
    }
    let mut td = TreeDecomposition::new(tree, bags);
    td.root = Some(0);
    debug_assert!(validate_td(&td, g).is_ok());
    Ok((ApproxResult::Decomposition(td), stats))
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}
