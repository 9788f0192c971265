//! Unit-capacity vertex flows in directed graphs: single augmentation via
//! the residual network, bounded max-flow, and the decomposition-guided
//! divide-and-conquer maximum (s,t)-vertex flow.

use crate::decomp::{balanced_tree_node, clean, validate_td, TreeDecomposition};
use crate::error::Error;
use crate::graph::{DiGraph, Graph, Measure};

/// Family of internally vertex-disjoint S-to-T paths. Paths may share
/// endpoints inside S or T but no internal vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexFlow {
    pub paths: Vec<Vec<usize>>,
}

impl VertexFlow {
    pub fn size(&self) -> usize {
        self.paths.len()
    }

    /// Checks the flow invariants against a graph and terminal sets.
    pub fn validate(&self, g: &DiGraph, sources: &[usize], sinks: &[usize]) -> Result<(), Error> {
        let in_s: std::collections::HashSet<usize> = sources.iter().copied().collect();
        let in_t: std::collections::HashSet<usize> = sinks.iter().copied().collect();
        let mut used = std::collections::HashSet::new();
        for path in &self.paths {
            if path.len() < 2 {
                return Err(Error::InvalidFlow("path with fewer than two vertices".into()));
            }
            if !in_s.contains(&path[0]) {
                return Err(Error::InvalidFlow(format!("path does not start in S: {path:?}")));
            }
            if !in_t.contains(path.last().unwrap()) {
                return Err(Error::InvalidFlow(format!("path does not end in T: {path:?}")));
            }
            for w in path.windows(2) {
                if !g.has_arc(w[0], w[1]) {
                    return Err(Error::InvalidFlow(format!("missing arc {}->{}", w[0], w[1])));
                }
            }
            for &v in &path[1..path.len() - 1] {
                if in_s.contains(&v) || in_t.contains(&v) {
                    return Err(Error::InvalidFlow(format!(
                        "internal vertex {v} lies in S or T"
                    )));
                }
                if !used.insert(v) {
                    return Err(Error::InvalidFlow(format!("vertex {v} used twice")));
                }
            }
        }
        Ok(())
    }
}

/// Vertex set outside S and T whose removal cuts all S-to-T paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCut {
    pub vertices: Vec<usize>,
}

impl VertexCut {
    /// BFS check that no sink is reachable once the cut is removed.
    pub fn separates(&self, g: &DiGraph, sources: &[usize], sinks: &[usize]) -> bool {
        let mut blocked = vec![false; g.n()];
        for &v in &self.vertices {
            blocked[v] = true;
        }
        let mut seen = vec![false; g.n()];
        let mut queue: std::collections::VecDeque<usize> = Default::default();
        for &s in sources {
            if !blocked[s] && !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in g.out_neighbors(u) {
                if !blocked[v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        sinks.iter().all(|&t| !seen[t])
    }
}

#[derive(Debug, Clone)]
pub enum AugmentOutcome {
    Augmented(VertexFlow),
    Certified(VertexCut),
}

#[derive(Debug, Clone)]
pub enum BoundedFlowOutcome {
    MaxFlowCut { flow: VertexFlow, cut: VertexCut },
    ExceedsK,
}

fn check_terminals(g: &DiGraph, sources: &[usize], sinks: &[usize]) -> Result<(), Error> {
    let in_t: std::collections::HashSet<usize> = sinks.iter().copied().collect();
    if let Some(&v) = sources.iter().find(|v| in_t.contains(v)) {
        return Err(Error::TerminalOverlap { vertex: v });
    }
    for &s in sources {
        for &v in g.out_neighbors(s) {
            if in_t.contains(&v) {
                return Err(Error::ArcFromSourceToSink { u: s, v });
            }
        }
    }
    Ok(())
}

/// One round of flow augmentation: either grows the flow by one path or
/// certifies maximality with a cut of exactly the flow's size. Runs a
/// single BFS on the vertex-split residual network.
pub fn augment_once(
    g: &DiGraph,
    sources: &[usize],
    sinks: &[usize],
    flow: &VertexFlow,
) -> Result<AugmentOutcome, Error> {
    check_terminals(g, sources, sinks)?;
    flow.validate(g, sources, sinks)?;

    let n = g.n();
    let mut is_s = vec![false; n];
    let mut is_t = vec![false; n];
    for &s in sources {
        is_s[s] = true;
    }
    for &t in sinks {
        is_t[t] = true;
    }

    // arc-level flow: f[u] holds the sorted list of v with unit flow u->v
    let mut fin: Vec<Vec<usize>> = vec![Vec::new(); n];
    for path in &flow.paths {
        for w in path.windows(2) {
            fin[w[1]].push(w[0]);
        }
    }
    for l in fin.iter_mut() {
        l.sort_unstable();
    }

    // Residual BFS over split nodes: node 2v = v_in, 2v+1 = v_out.
    // Forward residual arcs: u_out -> v_in for arcs without flow,
    // v_in -> v_out when the internal edge is unsaturated (or v in S∪T),
    // and reverse arcs v_in -> u_out / v_out -> v_in where flow exists.
    let idx_in = |v: usize| 2 * v;
    let idx_out = |v: usize| 2 * v + 1;
    let mut parent = vec![usize::MAX; 2 * n];
    let mut seen = vec![false; 2 * n];
    let mut queue: std::collections::VecDeque<usize> = Default::default();
    for &s in sources {
        if !seen[idx_out(s)] {
            seen[idx_out(s)] = true;
            queue.push_back(idx_out(s));
        }
    }
    let mut reached_sink = usize::MAX;
    'bfs: while let Some(x) = queue.pop_front() {
        let v = x / 2;
        if x % 2 == 1 {
            // v_out: graph arcs carry unbounded capacity, only vertices are
            // unit; every out-arc is traversable
            for &w in g.out_neighbors(v) {
                let y = idx_in(w);
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    if is_t[w] {
                        reached_sink = y;
                        break 'bfs;
                    }
                    queue.push_back(y);
                }
            }
            // reverse of the internal edge: v_out -> v_in when flow passes v
            if !fin[v].is_empty() && !is_s[v] && !is_t[v] {
                let y = idx_in(v);
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        } else {
            // v_in: internal edge forward when no flow passes through v
            let saturated = !is_s[v] && !is_t[v] && !fin[v].is_empty();
            if !saturated {
                let y = idx_out(v);
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
            // reverse arcs: v_in -> u_out for flow arcs u->v
            for &u in &fin[v] {
                let y = idx_out(u);
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
    }

    if reached_sink == usize::MAX {
        // cut: internal vertices whose in-node is reached but out-node is not
        let mut cut = Vec::new();
        for v in 0..n {
            if !is_s[v] && !is_t[v] && seen[idx_in(v)] && !seen[idx_out(v)] {
                cut.push(v);
            }
        }
        let cut = VertexCut { vertices: cut };
        debug_assert_eq!(cut.vertices.len(), flow.size());
        debug_assert!(cut.separates(g, sources, sinks));
        return Ok(AugmentOutcome::Certified(cut));
    }

    // walk back the augmenting path, toggling arc flow
    let mut arcs: std::collections::BTreeSet<(usize, usize)> = Default::default();
    for path in &flow.paths {
        for w in path.windows(2) {
            arcs.insert((w[0], w[1]));
        }
    }
    let mut x = reached_sink;
    while parent[x] != usize::MAX {
        let p = parent[x];
        let (pv, xv) = (p / 2, x / 2);
        if pv != xv {
            // graph arc traversal: forward p=u_out -> x=v_in adds flow,
            // reverse p=v_in -> x=u_out removes it
            if p % 2 == 1 {
                let fresh = arcs.insert((pv, xv));
                debug_assert!(fresh, "augmenting path reused a flow arc");
            } else {
                let had = arcs.remove(&(xv, pv));
                debug_assert!(had, "reverse step without flow");
            }
        }
        x = p;
    }

    // rebuild paths from the arc set
    let mut nxt: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut starts: Vec<usize> = Vec::new();
    for &(u, v) in &arcs {
        nxt[u].push(v);
        if is_s[u] {
            starts.push(u);
        }
    }
    for l in &mut nxt {
        l.sort_unstable();
        l.reverse(); // pop from the back gives ascending order
    }
    starts.sort_unstable();
    starts.dedup();
    let mut paths = Vec::new();
    for s in starts {
        while let Some(first) = nxt[s].pop() {
            let mut path = vec![s, first];
            let mut cur = first;
            while !is_t[cur] {
                let next = nxt[cur].pop().expect("flow conservation");
                path.push(next);
                cur = next;
            }
            paths.push(path);
        }
    }
    let new_flow = VertexFlow { paths };
    debug_assert_eq!(new_flow.size(), flow.size() + 1);
    debug_assert!(new_flow.validate(g, sources, sinks).is_ok());
    Ok(AugmentOutcome::Augmented(new_flow))
}

/// Repeated augmentation with an early exit: either the maximum flow and a
/// matching minimum cut (when the value is at most k), or `ExceedsK`.
pub fn flow_up_to_k(
    g: &DiGraph,
    sources: &[usize],
    sinks: &[usize],
    k: usize,
) -> Result<BoundedFlowOutcome, Error> {
    let mut flow = VertexFlow::default();
    loop {
        if flow.size() > k {
            return Ok(BoundedFlowOutcome::ExceedsK);
        }
        match augment_once(g, sources, sinks, &flow)? {
            AugmentOutcome::Augmented(f) => flow = f,
            AugmentOutcome::Certified(cut) => {
                return Ok(BoundedFlowOutcome::MaxFlowCut { flow, cut });
            }
        }
    }
}

/// Contracts the sets S and T into fresh single terminals s and t. Arcs
/// inside a set disappear; arcs between the sets become an s->t arc (which
/// downstream flow preconditions then reject). Vertices keep their labels,
/// s and t are appended at indices n and n+1 of the result.
pub fn collapse_terminals(
    g: &DiGraph,
    sources: &[usize],
    sinks: &[usize],
) -> Result<(DiGraph, usize, usize), Error> {
    let in_s: std::collections::HashSet<usize> = sources.iter().copied().collect();
    let in_t: std::collections::HashSet<usize> = sinks.iter().copied().collect();
    if let Some(&v) = sources.iter().find(|v| in_t.contains(v)) {
        return Err(Error::TerminalOverlap { vertex: v });
    }
    let n = g.n();
    let (s, t) = (n, n + 1);
    let repr = |v: usize| {
        if in_s.contains(&v) {
            s
        } else if in_t.contains(&v) {
            t
        } else {
            v
        }
    };
    let mut arcs: std::collections::BTreeSet<(usize, usize)> = Default::default();
    for (u, v) in g.arcs() {
        let (a, b) = (repr(u), repr(v));
        if a != b {
            arcs.insert((a, b));
        }
    }
    let collapsed = DiGraph::from_arcs(n + 2, &arcs.into_iter().collect::<Vec<_>>())?;
    Ok((collapsed, s, t))
}

/// Inserts two vertices into every bag; used after [`collapse_terminals`].
pub fn patch_decomposition(td: &TreeDecomposition, s: usize, t: usize) -> TreeDecomposition {
    let bags = td
        .bags
        .iter()
        .map(|bag| {
            let mut b = bag.clone();
            b.push(s);
            b.push(t);
            b.sort_unstable();
            b.dedup();
            b
        })
        .collect();
    TreeDecomposition::new(td.tree.clone(), bags)
}

/// Maximum (s,t)-vertex flow with a minimum cut certificate, by divide and
/// conquer on the nodes of the decomposition whose bags contain both
/// terminals. `parallel` runs the component recursion on the rayon pool.
pub fn max_vertex_flow_td(
    g: &DiGraph,
    s: usize,
    t: usize,
    td: &TreeDecomposition,
    parallel: bool,
) -> Result<(VertexFlow, VertexCut), Error> {
    if s == t || g.has_arc(s, t) {
        return Err(Error::BadTerminals);
    }
    let und = g.underlying_undirected();
    validate_td(td, &und).map_err(Error::from)?;
    let td = clean(td, &und)?;
    let width = td.width().unwrap_or(0);
    rec_flow(g, s, t, &td, width, parallel)
}

fn rec_flow(
    g: &DiGraph,
    s: usize,
    t: usize,
    td: &TreeDecomposition,
    width: usize,
    parallel: bool,
) -> Result<(VertexFlow, VertexCut), Error> {
    let q = td.num_nodes();
    let contains = |x: usize| {
        td.bags[x].binary_search(&s).is_ok() && td.bags[x].binary_search(&t).is_ok()
    };
    let l_nodes: Vec<usize> = (0..q).filter(|&x| contains(x)).collect();

    if l_nodes.is_empty() {
        // both-terminal bags absent: the flow value is at most the width
        let k = width;
        return match flow_up_to_k(g, &[s], &[t], k)? {
            BoundedFlowOutcome::MaxFlowCut { flow, cut } => Ok((flow, cut)),
            BoundedFlowOutcome::ExceedsK => Err(Error::Precondition(
                "flow exceeded the width bound; decomposition invalid".into(),
            )),
        };
    }

    let mu = Measure::indicator(q, &l_nodes)?;
    let x = balanced_tree_node(&td.tree, &mu)?;
    debug_assert!(contains(x), "the balanced node must contain both terminals");

    // vertices whose whole occurrence subtree lies inside one component of
    // tree - x; occurrences are contiguous, so count per component suffices
    let mut removed_node = vec![false; q];
    removed_node[x] = true;
    let comps = td.tree.components_avoiding(&removed_node);
    let mut comp_of_node = vec![usize::MAX; q];
    for (ci, comp) in comps.iter().enumerate() {
        for &y in comp {
            comp_of_node[y] = ci;
        }
    }
    let n = g.n();
    let mut occ_total = vec![0usize; n];
    let mut occ_in_comp: Vec<std::collections::HashMap<usize, usize>> = vec![Default::default(); 0];
    occ_in_comp.resize_with(comps.len(), Default::default);
    for y in 0..q {
        for &v in &td.bags[y] {
            occ_total[v] += 1;
            if y != x {
                *occ_in_comp[comp_of_node[y]].entry(v).or_insert(0) += 1;
            }
        }
    }

    let mut important: Vec<(usize, Vec<usize>)> = Vec::new(); // (component, W_C)
    for (ci, comp) in comps.iter().enumerate() {
        let y_c = comp
            .iter()
            .copied()
            .find(|&y| td.tree.has_edge(x, y))
            .expect("component touches x");
        if !contains(y_c) {
            continue; // unimportant
        }
        let w_c: Vec<usize> = occ_in_comp[ci]
            .iter()
            .filter(|&(&v, &cnt)| cnt == occ_total[v] && v != s && v != t)
            .map(|(&v, _)| v)
            .collect();
        important.push((ci, w_c));
    }
    important.sort_by_key(|(ci, _)| comps[*ci][0]);

    let solve_child = |(_ci, w_c): &(usize, Vec<usize>)| -> Result<(VertexFlow, Vec<usize>), Error> {
        let mut verts = w_c.clone();
        verts.push(s);
        verts.push(t);
        verts.sort_unstable();
        verts.dedup();
        let (sub_g, map) = g.induced_subgraph(&verts)?;
        let inv: std::collections::HashMap<usize, usize> =
            map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        // restrict the component's bags to W_C ∪ {s,t}
        let comp = &comps[*_ci];
        let keep: std::collections::HashSet<usize> = verts.iter().copied().collect();
        let mut bags = Vec::with_capacity(comp.len());
        for &y in comp {
            let bag: Vec<usize> =
                td.bags[y].iter().filter(|v| keep.contains(v)).map(|v| inv[v]).collect();
            bags.push(bag);
        }
        let mut node_id = std::collections::HashMap::new();
        for (i, &y) in comp.iter().enumerate() {
            node_id.insert(y, i);
        }
        let mut sub_tree = Graph::empty(comp.len());
        for &y in comp {
            for &z in td.tree.neighbors(y) {
                if z != x && y < z {
                    sub_tree.add_edge(node_id[&y], node_id[&z])?;
                }
            }
        }
        let sub_td = clean(&TreeDecomposition::new(sub_tree, bags), &sub_g.underlying_undirected())?;
        let (flow, _cut) = rec_flow(
            &sub_g,
            inv[&s],
            inv[&t],
            &sub_td,
            width,
            parallel,
        )?;
        Ok((flow, map))
    };

    let results: Vec<Result<(VertexFlow, Vec<usize>), Error>> = if parallel {
        use rayon::prelude::*;
        important.par_iter().map(solve_child).collect()
    } else {
        important.iter().map(solve_child).collect()
    };

    let mut apx = VertexFlow::default();
    for r in results {
        let (flow, map) = r?;
        for path in flow.paths {
            apx.paths.push(path.into_iter().map(|v| map[v]).collect());
        }
    }

    // at most width-1 successful augmentations remain
    let mut flow = apx;
    let mut successes = 0usize;
    loop {
        match augment_once(g, &[s], &[t], &flow)? {
            AugmentOutcome::Augmented(f) => {
                flow = f;
                successes += 1;
                assert!(
                    successes <= width.max(1),
                    "augmentation count exceeded the width bound"
                );
            }
            AugmentOutcome::Certified(cut) => return Ok((flow, cut)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn augment_examples() {
        // s -> a -> t from the empty flow
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        match augment_once(&g, &[0], &[2], &VertexFlow::default()).unwrap() {
            AugmentOutcome::Augmented(f) => assert_eq!(f.paths, vec![vec![0, 1, 2]]),
            _ => panic!("expected augmentation"),
        }

        // two paths with a crossing arc a->b
        let g = DiGraph::from_arcs(4, &[(0, 1), (1, 3), (0, 2), (2, 3), (1, 2)]).unwrap();
        let f1 = VertexFlow { paths: vec![vec![0, 1, 3]] };
        match augment_once(&g, &[0], &[3], &f1).unwrap() {
            AugmentOutcome::Augmented(f) => {
                assert_eq!(f.size(), 2);
                f.validate(&g, &[0], &[3]).unwrap();
            }
            _ => panic!("expected augmentation"),
        }

        // saturated single path certifies a unit cut
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let f1 = VertexFlow { paths: vec![vec![0, 1, 2]] };
        match augment_once(&g, &[0], &[2], &f1).unwrap() {
            AugmentOutcome::Certified(cut) => {
                assert_eq!(cut.vertices, vec![1]);
                assert!(cut.separates(&g, &[0], &[2]));
            }
            _ => panic!("expected certificate"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = DiGraph::from_arcs(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        // arc from S to T
        assert!(matches!(
            augment_once(&g, &[0], &[2], &VertexFlow::default()),
            Err(Error::ArcFromSourceToSink { .. })
        ));
        let g2 = DiGraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let junk = VertexFlow { paths: vec![vec![0, 2]] };
        assert!(augment_once(&g2, &[0], &[2], &junk).is_err());
    }

    #[test]
    fn flow_up_to_k_examples() {
        // three internally disjoint s-t paths
        let mut arcs = Vec::new();
        for i in 0..3 {
            arcs.push((0, 1 + i));
            arcs.push((1 + i, 4));
        }
        let g = DiGraph::from_arcs(5, &arcs).unwrap();
        match flow_up_to_k(&g, &[0], &[4], 5).unwrap() {
            BoundedFlowOutcome::MaxFlowCut { flow, cut } => {
                assert_eq!(flow.size(), 3);
                assert_eq!(cut.vertices.len(), 3);
            }
            _ => panic!("expected flow"),
        }
        assert!(matches!(
            flow_up_to_k(&g, &[0], &[4], 2).unwrap(),
            BoundedFlowOutcome::ExceedsK
        ));
    }

    #[test]
    fn collapse_examples() {
        // S = {0,1}, T = {2}, star through 3
        let g = DiGraph::from_arcs(4, &[(0, 3), (1, 3), (3, 2)]).unwrap();
        let (cg, s, t) = collapse_terminals(&g, &[0, 1], &[2]).unwrap();
        assert_eq!((s, t), (4, 5));
        assert!(cg.has_arc(s, 3));
        assert!(cg.has_arc(3, t));
        assert!(collapse_terminals(&g, &[0, 2], &[2]).is_err());
    }

    #[test]
    fn maxflow_c6() {
        // C6 with both arc directions; s=0 and t=3 are opposite
        let mut arcs = Vec::new();
        for i in 0..6 {
            arcs.push((i, (i + 1) % 6));
            arcs.push(((i + 1) % 6, i));
        }
        let g = DiGraph::from_arcs(6, &arcs).unwrap();
        let und = g.underlying_undirected();
        let order: Vec<usize> = (0..6).collect();
        let td = crate::decomp::td_from_elimination_order(&und, &order).unwrap();
        let (flow, cut) = max_vertex_flow_td(&g, 0, 3, &td, false).unwrap();
        assert_eq!(flow.size(), 2);
        assert_eq!(cut.vertices.len(), 2);
        flow.validate(&g, &[0], &[3]).unwrap();
        assert!(cut.separates(&g, &[0], &[3]));
    }
}
