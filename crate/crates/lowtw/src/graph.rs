//! Simple undirected and directed graphs with dense 0-based vertex labels,
//! plus vertex measures used by the balancing routines.

use crate::error::Error;

/// Undirected simple graph. Adjacency lists are kept sorted so that all
/// downstream tie-breaking is reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, Error> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), Error> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::VertexOutOfRange { vertex: u.max(v), n });
        }
        if u == v {
            return Err(Error::SelfLoop { vertex: u });
        }
        if self.has_edge(u, v) {
            return Err(Error::DuplicateEdge { u, v });
        }
        let pos = self.adj[u].binary_search(&v).unwrap_err();
        self.adj[u].insert(pos, v);
        let pos = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(pos, u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as sorted pairs (u < v), in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m());
        for u in 0..self.n() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_tree(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return false;
        }
        self.m() == n - 1 && self.connected_components().len() == 1
    }

    /// Maximal connected vertex sets, each sorted, ordered by smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Connected components of the graph with `removed` vertices deleted.
    pub fn components_avoiding(&self, removed: &[bool]) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] || removed[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in &self.adj[u] {
                    if !seen[v] && !removed[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Subgraph induced by `vs`; the returned map sends new labels back to
    /// the original ones.
    pub fn induced_subgraph(&self, vs: &[usize]) -> Result<(Graph, Vec<usize>), Error> {
        let n = self.n();
        let mut vs = vs.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if let Some(&bad) = vs.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: bad, n });
        }
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in vs.iter().enumerate() {
            pos[v] = i;
        }
        let mut g = Graph::empty(vs.len());
        for (i, &v) in vs.iter().enumerate() {
            for &w in &self.adj[v] {
                if pos[w] != usize::MAX {
                    g.adj[i].push(pos[w]);
                }
            }
            g.adj[i].sort_unstable();
        }
        Ok((g, vs))
    }

    /// Replaces every edge uv by a path u - w_uv - v. Returns the new graph
    /// together with the map from original edges to their subdivision vertex.
    pub fn one_subdivision(&self) -> Result<(Graph, Vec<((usize, usize), usize)>), Error> {
        if !self.is_tree() {
            return Err(Error::NotATree);
        }
        let n = self.n();
        let edges = self.edges();
        let mut g = Graph::empty(n + edges.len());
        let mut map = Vec::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            let w = n + i;
            g.add_edge(u, w)?;
            g.add_edge(w, v)?;
            map.push(((u, v), w));
        }
        Ok((g, map))
    }

    /// BFS spanning tree of a connected component, rooted at its smallest
    /// vertex. The result is a graph on the same vertex set as `self` whose
    /// edges form a tree over `component`.
    pub fn spanning_tree(&self, component: &[usize]) -> Result<Graph, Error> {
        let n = self.n();
        let mut inside = vec![false; n];
        for &v in component {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            inside[v] = true;
        }
        let Some(&root) = component.iter().min() else {
            return Err(Error::EmptyInput);
        };
        let mut tree = Graph::empty(n);
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if inside[v] && !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    tree.add_edge(u, v)?;
                    queue.push_back(v);
                }
            }
        }
        if reached != component.iter().filter(|&&v| inside[v]).count() {
            return Err(Error::DisconnectedSet);
        }
        Ok(tree)
    }
}

/// Directed simple graph (no loops, no parallel arcs).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl DiGraph {
    pub fn empty(n: usize) -> Self {
        DiGraph { out_adj: vec![Vec::new(); n], in_adj: vec![Vec::new(); n] }
    }

    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self, Error> {
        let mut g = DiGraph::empty(n);
        for &(u, v) in arcs {
            g.add_arc(u, v)?;
        }
        Ok(g)
    }

    /// Both orientations of every edge of an undirected graph.
    pub fn from_undirected(g: &Graph) -> Self {
        let mut d = DiGraph::empty(g.n());
        for u in 0..g.n() {
            d.out_adj[u] = g.neighbors(u).to_vec();
            d.in_adj[u] = g.neighbors(u).to_vec();
        }
        d
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<(), Error> {
        let n = self.n();
        if u >= n || v >= n {
            return Err(Error::VertexOutOfRange { vertex: u.max(v), n });
        }
        if u == v {
            return Err(Error::SelfLoop { vertex: u });
        }
        if self.has_arc(u, v) {
            return Err(Error::DuplicateEdge { u, v });
        }
        let pos = self.out_adj[u].binary_search(&v).unwrap_err();
        self.out_adj[u].insert(pos, v);
        let pos = self.in_adj[v].binary_search(&u).unwrap_err();
        self.in_adj[v].insert(pos, u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.out_adj.len()
    }

    pub fn arc_count(&self) -> usize {
        self.out_adj.iter().map(|a| a.len()).sum()
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, u: usize) -> &[usize] {
        &self.in_adj[u]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.out_adj[u].binary_search(&v).is_ok()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.arc_count());
        for u in 0..self.n() {
            for &v in &self.out_adj[u] {
                out.push((u, v));
            }
        }
        out
    }

    /// The undirected graph obtained by forgetting arc directions.
    pub fn underlying_undirected(&self) -> Graph {
        let mut g = Graph::empty(self.n());
        for u in 0..self.n() {
            for &v in &self.out_adj[u] {
                if !g.has_edge(u, v) {
                    g.add_edge(u, v).expect("valid arc");
                }
            }
        }
        g
    }

    pub fn induced_subgraph(&self, vs: &[usize]) -> Result<(DiGraph, Vec<usize>), Error> {
        let n = self.n();
        let mut vs = vs.to_vec();
        vs.sort_unstable();
        vs.dedup();
        if let Some(&bad) = vs.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: bad, n });
        }
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in vs.iter().enumerate() {
            pos[v] = i;
        }
        let mut g = DiGraph::empty(vs.len());
        for (i, &v) in vs.iter().enumerate() {
            for &w in &self.out_adj[v] {
                if pos[w] != usize::MAX {
                    g.out_adj[i].push(pos[w]);
                }
            }
            for &w in &self.in_adj[v] {
                if pos[w] != usize::MAX {
                    g.in_adj[i].push(pos[w]);
                }
            }
            g.out_adj[i].sort_unstable();
            g.in_adj[i].sort_unstable();
        }
        Ok((g, vs))
    }
}

/// Nonnegative integer vertex weights. Balance thresholds such as 7/8 of the
/// total are tested exactly by cross-multiplying in 128 bits, never through
/// floating point.
#[derive(Debug, Clone)]
pub struct Measure {
    weights: Vec<u64>,
}

impl Measure {
    pub fn new(weights: Vec<u64>) -> Result<Self, Error> {
        if weights.iter().all(|&w| w == 0) {
            return Err(Error::ZeroMeasure);
        }
        Ok(Measure { weights })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "measure needs at least one vertex");
        Measure { weights: vec![1; n] }
    }

    /// 1 on the given set, 0 elsewhere.
    pub fn indicator(n: usize, set: &[usize]) -> Result<Self, Error> {
        let mut weights = vec![0u64; n];
        for &v in set {
            weights[v] = 1;
        }
        Measure::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, v: usize) -> u64 {
        self.weights[v]
    }

    pub fn total(&self) -> u128 {
        self.weights.iter().map(|&w| w as u128).sum()
    }

    pub fn sum(&self, set: &[usize]) -> u128 {
        set.iter().map(|&v| self.weights[v] as u128).sum()
    }
}

/// True when `part` is at most `num/den` of `whole`, compared exactly.
pub fn frac_le(part: u128, whole: u128, num: u128, den: u128) -> bool {
    part * den <= whole * num
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_basic() {
        let g = Graph::empty(0);
        assert!(g.connected_components().is_empty());

        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(p3.connected_components(), vec![vec![0, 1, 2]]);

        let two = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(two.connected_components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn degree_sum_counts_edges_twice() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let sum: usize = (0..g.n()).map(|u| g.degree(u)).sum();
        assert_eq!(sum, 2 * g.m());
    }

    #[test]
    fn induced_subgraph_examples() {
        let k3 = Graph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let (sub, map) = k3.induced_subgraph(&[0, 1]).unwrap();
        assert_eq!(sub.m(), 1);
        assert_eq!(map, vec![0, 1]);

        let (copy, _) = k3.induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(copy, k3);

        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let (p3, _) = c5.induced_subgraph(&[1, 2, 3]).unwrap();
        assert_eq!(p3.m(), 2);

        assert!(k3.induced_subgraph(&[5]).is_err());
    }

    #[test]
    fn induced_subgraph_restores_edges() {
        let g = Graph::from_edges(6, &[(0, 2), (2, 4), (4, 5), (1, 3), (0, 5)]).unwrap();
        let vs = vec![0, 2, 4, 5];
        let (sub, map) = g.induced_subgraph(&vs).unwrap();
        let restored: Vec<(usize, usize)> = sub
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (map[a], map[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        let mut expected: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .filter(|&(a, b)| vs.contains(&a) && vs.contains(&b))
            .collect();
        expected.sort_unstable();
        let mut restored = restored;
        restored.sort_unstable();
        assert_eq!(restored, expected);
    }

    #[test]
    fn one_subdivision_examples() {
        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let (p3, map) = e.one_subdivision().unwrap();
        assert_eq!(p3.n(), 3);
        assert_eq!(p3.m(), 2);
        assert_eq!(map, vec![((0, 1), 2)]);

        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let (spider, _) = star.one_subdivision().unwrap();
        assert_eq!(spider.n(), 7);
        assert_eq!(spider.m(), 6);

        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let (p5, _) = p3.one_subdivision().unwrap();
        assert_eq!(p5.n(), 5);
        assert_eq!(p5.m(), 4);

        let c3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(c3.one_subdivision().is_err());
    }

    #[test]
    fn spanning_tree_examples() {
        let tree = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let t = tree.spanning_tree(&[0, 1, 2, 3]).unwrap();
        assert_eq!(t, tree);

        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let t = c4.spanning_tree(&[0, 1, 2, 3]).unwrap();
        assert_eq!(t.m(), 3);
        assert_eq!(t.connected_components().len(), 1);

        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let t = k4.spanning_tree(&[0, 1, 2, 3]).unwrap();
        // BFS from vertex 0 on a clique gives the star at 0
        assert_eq!(t.edges(), vec![(0, 1), (0, 2), (0, 3)]);
        for (u, v) in t.edges() {
            assert!(k4.has_edge(u, v));
        }

        let disc = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(disc.spanning_tree(&[0, 1, 2]).is_err());
    }

    #[test]
    fn digraph_basics() {
        let d = DiGraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(d.out_neighbors(0), &[1]);
        assert_eq!(d.in_neighbors(0), &[2]);
        assert!(DiGraph::from_arcs(2, &[(0, 0)]).is_err());
        assert!(DiGraph::from_arcs(2, &[(0, 1), (0, 1)]).is_err());
        let und = d.underlying_undirected();
        assert_eq!(und.m(), 3);
    }

    #[test]
    fn measure_rejects_all_zero() {
        assert!(Measure::new(vec![0, 0]).is_err());
        let m = Measure::new(vec![0, 3, 1]).unwrap();
        assert_eq!(m.total(), 4);
        assert_eq!(m.sum(&[1, 2]), 4);
    }
}
