//! Tree, path and tree-partition decompositions: validation, cleaning,
//! nice-form transformation and balanced-node selection.

use crate::error::Error;
use crate::graph::{Graph, Measure};

/// Tree decomposition; optionally rooted with an explicit child order.
#[derive(Debug, Clone)]
pub struct TreeDecomposition {
    pub tree: Graph,
    /// Sorted vertex list per node.
    pub bags: Vec<Vec<usize>>,
    pub root: Option<usize>,
    /// Ordered children per node; only meaningful when rooted.
    pub child_order: Option<Vec<Vec<usize>>>,
}

impl TreeDecomposition {
    pub fn new(tree: Graph, mut bags: Vec<Vec<usize>>) -> Self {
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        TreeDecomposition { tree, bags, root: None, child_order: None }
    }

    /// Single bag containing all of 0..n.
    pub fn trivial(n: usize) -> Self {
        TreeDecomposition::new(Graph::empty(1), vec![(0..n).collect()])
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    /// max bag size - 1; a decomposition with only empty bags has width -1,
    /// reported here as None.
    pub fn width(&self) -> Option<usize> {
        self.bags.iter().map(|b| b.len()).max().and_then(|m| m.checked_sub(1))
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0)
    }
}

/// Ordered bags B_1..B_q with the interval property.
#[derive(Debug, Clone)]
pub struct PathDecomposition {
    pub bags: Vec<Vec<usize>>,
}

impl PathDecomposition {
    pub fn new(mut bags: Vec<Vec<usize>>) -> Self {
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        PathDecomposition { bags }
    }

    pub fn width(&self) -> Option<usize> {
        self.bags.iter().map(|b| b.len()).max().and_then(|m| m.checked_sub(1))
    }

    /// First and last bag index containing each vertex.
    pub fn intervals(&self, n: usize) -> (Vec<usize>, Vec<usize>) {
        let mut first = vec![usize::MAX; n];
        let mut last = vec![usize::MAX; n];
        for (i, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if first[v] == usize::MAX {
                    first[v] = i;
                }
                last[v] = i;
            }
        }
        (first, last)
    }

    pub fn as_tree_decomposition(&self) -> TreeDecomposition {
        let q = self.bags.len().max(1);
        let mut tree = Graph::empty(q);
        for i in 1..q {
            tree.add_edge(i - 1, i).expect("path edges");
        }
        let bags = if self.bags.is_empty() { vec![Vec::new()] } else { self.bags.clone() };
        TreeDecomposition::new(tree, bags)
    }
}

/// Bags partition the vertices; width counts bag size without the -1.
#[derive(Debug, Clone)]
pub struct TreePartitionDecomposition {
    pub tree: Graph,
    pub bags: Vec<Vec<usize>>,
}

impl TreePartitionDecomposition {
    pub fn new(tree: Graph, mut bags: Vec<Vec<usize>>) -> Self {
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        TreePartitionDecomposition { tree, bags }
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }
}

/// First violated decomposition clause, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotATree,
    BagCount { nodes: usize, bags: usize },
    VertexOutOfRange { node: usize, vertex: usize },
    VertexNotCovered { vertex: usize },
    SubtreeDisconnected { vertex: usize },
    EdgeNotCovered { u: usize, v: usize },
    NotAPartition { vertex: usize, count: usize },
    IntervalBroken { vertex: usize, bag: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NotATree => write!(f, "decomposition tree is not a tree"),
            Violation::BagCount { nodes, bags } => {
                write!(f, "tree has {nodes} nodes but {bags} bags")
            }
            Violation::VertexOutOfRange { node, vertex } => {
                write!(f, "bag {node} contains out-of-range vertex {vertex}")
            }
            Violation::VertexNotCovered { vertex } => {
                write!(f, "vertex {vertex} appears in no bag")
            }
            Violation::SubtreeDisconnected { vertex } => {
                write!(f, "nodes containing vertex {vertex} induce a disconnected subtree")
            }
            Violation::EdgeNotCovered { u, v } => {
                write!(f, "edge {u}-{v} not covered by any bag")
            }
            Violation::NotAPartition { vertex, count } => {
                write!(f, "vertex {vertex} appears in {count} bags (must be exactly 1)")
            }
            Violation::IntervalBroken { vertex, bag } => {
                write!(f, "vertex {vertex} missing from bag {bag} inside its interval")
            }
        }
    }
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Error {
        Error::InvalidDecomposition(v.to_string())
    }
}

pub fn validate_td(td: &TreeDecomposition, g: &Graph) -> Result<(), Violation> {
    if td.tree.n() == 0 || !td.tree.is_tree() {
        return Err(Violation::NotATree);
    }
    if td.bags.len() != td.tree.n() {
        return Err(Violation::BagCount { nodes: td.tree.n(), bags: td.bags.len() });
    }
    for (x, bag) in td.bags.iter().enumerate() {
        if let Some(&v) = bag.iter().find(|&&v| v >= g.n()) {
            return Err(Violation::VertexOutOfRange { node: x, vertex: v });
        }
    }
    // occurrence lists per vertex
    let mut occ: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (x, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            occ[v].push(x);
        }
    }
    for v in 0..g.n() {
        if occ[v].is_empty() {
            return Err(Violation::VertexNotCovered { vertex: v });
        }
        if !nodes_connected(&td.tree, &occ[v]) {
            return Err(Violation::SubtreeDisconnected { vertex: v });
        }
    }
    for (u, v) in g.edges() {
        // walk the shorter occurrence list
        let (a, b) = if occ[u].len() <= occ[v].len() { (u, v) } else { (v, u) };
        let covered = occ[a].iter().any(|&x| td.bags[x].binary_search(&b).is_ok());
        if !covered {
            return Err(Violation::EdgeNotCovered { u, v });
        }
    }
    Ok(())
}

pub fn validate_pd(pd: &PathDecomposition, g: &Graph) -> Result<(), Violation> {
    for (x, bag) in pd.bags.iter().enumerate() {
        if let Some(&v) = bag.iter().find(|&&v| v >= g.n()) {
            return Err(Violation::VertexOutOfRange { node: x, vertex: v });
        }
    }
    let (first, last) = pd.intervals(g.n());
    for v in 0..g.n() {
        if first[v] == usize::MAX {
            return Err(Violation::VertexNotCovered { vertex: v });
        }
        for i in first[v]..=last[v] {
            if pd.bags[i].binary_search(&v).is_err() {
                return Err(Violation::IntervalBroken { vertex: v, bag: i });
            }
        }
    }
    for (u, v) in g.edges() {
        let lo = first[u].max(first[v]);
        let hi = last[u].min(last[v]);
        if lo > hi {
            return Err(Violation::EdgeNotCovered { u, v });
        }
    }
    Ok(())
}

pub fn validate_tpd(tpd: &TreePartitionDecomposition, g: &Graph) -> Result<(), Violation> {
    if tpd.tree.n() == 0 || !tpd.tree.is_tree() {
        return Err(Violation::NotATree);
    }
    if tpd.bags.len() != tpd.tree.n() {
        return Err(Violation::BagCount { nodes: tpd.tree.n(), bags: tpd.bags.len() });
    }
    for (x, bag) in tpd.bags.iter().enumerate() {
        if let Some(&v) = bag.iter().find(|&&v| v >= g.n()) {
            return Err(Violation::VertexOutOfRange { node: x, vertex: v });
        }
    }
    let mut count = vec![0usize; g.n()];
    let mut node_of = vec![usize::MAX; g.n()];
    for (x, bag) in tpd.bags.iter().enumerate() {
        for &v in bag {
            count[v] += 1;
            node_of[v] = x;
        }
    }
    for v in 0..g.n() {
        if count[v] != 1 {
            return Err(Violation::NotAPartition { vertex: v, count: count[v] });
        }
    }
    for (u, v) in g.edges() {
        let (x, y) = (node_of[u], node_of[v]);
        if x != y && !tpd.tree.has_edge(x, y) {
            return Err(Violation::EdgeNotCovered { u, v });
        }
    }
    Ok(())
}

fn nodes_connected(tree: &Graph, nodes: &[usize]) -> bool {
    if nodes.is_empty() {
        return false;
    }
    let inside: std::collections::HashSet<usize> = nodes.iter().copied().collect();
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![nodes[0]];
    seen.insert(nodes[0]);
    while let Some(x) = stack.pop() {
        for &y in tree.neighbors(x) {
            if inside.contains(&y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == nodes.len()
}

/// Contracts every tree edge whose bags are in a subset relation (this also
/// merges equal adjacent bags and absorbs empty ones). Width is preserved
/// and the result has at most max(n, 1) nodes.
pub fn clean(td: &TreeDecomposition, g: &Graph) -> Result<TreeDecomposition, Error> {
    validate_td(td, g).map_err(Error::from)?;
    let q = td.num_nodes();
    let mut alive = vec![true; q];
    let mut bags: Vec<Vec<usize>> = td.bags.clone();
    let mut nbrs: Vec<std::collections::BTreeSet<usize>> =
        (0..q).map(|x| td.tree.neighbors(x).iter().copied().collect()).collect();
    let mut queue: std::collections::VecDeque<(usize, usize)> =
        td.tree.edges().into_iter().collect();
    while let Some((x, y)) = queue.pop_front() {
        if !alive[x] || !alive[y] || !nbrs[x].contains(&y) {
            continue;
        }
        let (dead, keep) = if subset(&bags[x], &bags[y]) {
            (x, y)
        } else if subset(&bags[y], &bags[x]) {
            (y, x)
        } else {
            continue;
        };
        alive[dead] = false;
        nbrs[keep].remove(&dead);
        let moved: Vec<usize> = nbrs[dead].iter().copied().filter(|&z| z != keep).collect();
        nbrs[dead].clear();
        for z in moved {
            nbrs[z].remove(&dead);
            nbrs[z].insert(keep);
            nbrs[keep].insert(z);
            queue.push_back((keep, z));
        }
        // the merge may have created a fresh subset relation with keep's
        // other neighbors
        for &z in &nbrs[keep] {
            queue.push_back((keep, z));
        }
    }
    let live: Vec<usize> = (0..q).filter(|&x| alive[x]).collect();
    let mut new_id = vec![usize::MAX; q];
    for (i, &x) in live.iter().enumerate() {
        new_id[x] = i;
    }
    let mut tree = Graph::empty(live.len());
    for &x in &live {
        for &y in &nbrs[x] {
            if x < y {
                tree.add_edge(new_id[x], new_id[y])?;
            }
        }
    }
    let new_bags: Vec<Vec<usize>> = live.iter().map(|&x| std::mem::take(&mut bags[x])).collect();
    let out = TreeDecomposition::new(tree, new_bags);
    debug_assert!(validate_td(&out, g).is_ok());
    Ok(out)
}

/// True when no bag is a subset of an adjacent bag.
pub fn is_clean(td: &TreeDecomposition) -> bool {
    td.tree.edges().into_iter().all(|(x, y)| {
        !subset(&td.bags[x], &td.bags[y]) && !subset(&td.bags[y], &td.bags[x])
    })
}

fn subset(a: &[usize], b: &[usize]) -> bool {
    // both sorted
    if a.len() > b.len() {
        return false;
    }
    let mut it = b.iter();
    'outer: for x in a {
        for y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

/// Rooted, ordered decomposition where every node has at most two children,
/// distinct vertices have distinct topmost bags (so at most `width` edges
/// have any fixed node as their topmost common bag), and the root is an
/// empty bag reached by a path of shrinking bags.
pub fn nice_form(td: &TreeDecomposition, g: &Graph) -> Result<TreeDecomposition, Error> {
    let cleaned = clean(td, g)?;
    let q = cleaned.num_nodes();

    // arena of nodes under construction
    struct Node {
        bag: Vec<usize>,
        children: Vec<usize>,
    }
    let mut nodes: Vec<Node> = Vec::with_capacity(2 * q);
    for x in 0..q {
        nodes.push(Node { bag: cleaned.bags[x].clone(), children: Vec::new() });
    }
    // root at 0, children sorted ascending
    let root = 0usize;
    {
        let mut seen = vec![false; q];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            let mut cs: Vec<usize> =
                cleaned.tree.neighbors(x).iter().copied().filter(|&y| !seen[y]).collect();
            cs.sort_unstable();
            for &c in &cs {
                seen[c] = true;
                stack.push(c);
            }
            nodes[x].children = cs;
        }
    }

    // binarize: a node with more than two children keeps the first and
    // delegates the rest to a copy of itself
    let mut work: Vec<usize> = (0..q).collect();
    while let Some(x) = work.pop() {
        if nodes[x].children.len() > 2 {
            let rest: Vec<usize> = nodes[x].children.split_off(1);
            let copy = nodes.len();
            nodes.push(Node { bag: nodes[x].bag.clone(), children: rest });
            nodes[x].children.push(copy);
            work.push(copy);
        }
    }

    // topmost node per vertex (minimal depth in the rooted tree)
    let total = nodes.len();
    let mut depth = vec![0usize; total];
    let mut order = vec![root];
    {
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &c in &nodes[x].children {
                depth[c] = depth[x] + 1;
                order.push(c);
            }
        }
    }
    let mut topmost = vec![usize::MAX; g.n()];
    for &x in &order {
        for &v in &nodes[x].bag {
            if topmost[v] == usize::MAX || depth[x] < depth[topmost[v]] {
                topmost[v] = x;
            }
        }
    }
    let mut forgets: Vec<Vec<usize>> = vec![Vec::new(); total];
    for v in 0..g.n() {
        if topmost[v] != usize::MAX {
            forgets[topmost[v]].push(v);
        }
    }

    // parent pointers for chain insertion
    let mut parent = vec![usize::MAX; total];
    for &x in &order {
        for &c in &nodes[x].children {
            parent[c] = x;
        }
    }

    // insert a forget chain above every non-root node that is topmost for
    // more than one vertex
    for x in 0..total {
        if x == root || forgets[x].len() < 2 {
            continue;
        }
        let f = forgets[x].clone(); // ascending
        let mut below = x;
        let mut bag: Vec<usize> = nodes[x].bag.clone();
        for &v in f.iter().take(f.len() - 1) {
            bag.retain(|&u| u != v);
            let id = nodes.len();
            nodes.push(Node { bag: bag.clone(), children: vec![below] });
            below = id;
        }
        let p = parent[x];
        let slot = nodes[p].children.iter().position(|&c| c == x).expect("child link");
        nodes[p].children[slot] = below;
    }

    // shrinking path above the root, ending in an empty bag
    let mut new_root = root;
    {
        let mut bag = nodes[root].bag.clone();
        let to_remove = bag.clone();
        for v in to_remove {
            bag.retain(|&u| u != v);
            let id = nodes.len();
            nodes.push(Node { bag: bag.clone(), children: vec![new_root] });
            new_root = id;
        }
    }

    // order children by smallest bag vertex (empty bags last), then node id
    let keys: Vec<usize> =
        nodes.iter().map(|n| n.bag.first().copied().unwrap_or(usize::MAX)).collect();
    for node in &mut nodes {
        node.children.sort_by_key(|&c| (keys[c], c));
    }

    // renumber in pre-order from the new root
    let total = nodes.len();
    let mut new_id = vec![usize::MAX; total];
    let mut pre = Vec::with_capacity(total);
    let mut stack = vec![new_root];
    while let Some(x) = stack.pop() {
        new_id[x] = pre.len();
        pre.push(x);
        for &c in nodes[x].children.iter().rev() {
            stack.push(c);
        }
    }
    let count = pre.len();
    let mut tree = Graph::empty(count);
    let mut bags = vec![Vec::new(); count];
    let mut child_order = vec![Vec::new(); count];
    for &x in &pre {
        bags[new_id[x]] = nodes[x].bag.clone();
        child_order[new_id[x]] = nodes[x].children.iter().map(|&c| new_id[c]).collect();
        for &c in &nodes[x].children {
            tree.add_edge(new_id[x], new_id[c])?;
        }
    }
    let out = TreeDecomposition {
        tree,
        bags,
        root: Some(0),
        child_order: Some(child_order),
    };
    debug_assert!(validate_td(&out, g).is_ok());
    Ok(out)
}

/// Topmost node of a rooted decomposition containing each vertex, and per
/// node the number of graph edges whose topmost common bag it is.
pub fn topmost_edge_counts(td: &TreeDecomposition, g: &Graph) -> (Vec<usize>, Vec<usize>) {
    let root = td.root.unwrap_or(0);
    let q = td.num_nodes();
    let mut depth = vec![usize::MAX; q];
    depth[root] = 0;
    let mut order = vec![root];
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        for &y in td.tree.neighbors(x) {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                order.push(y);
            }
        }
    }
    let mut topmost = vec![usize::MAX; g.n()];
    for &x in &order {
        for &v in &td.bags[x] {
            if topmost[v] == usize::MAX || depth[x] < depth[topmost[v]] {
                topmost[v] = x;
            }
        }
    }
    let mut counts = vec![0usize; q];
    for (u, v) in g.edges() {
        if let Some(t) = topmost_common(td, &depth, u, v) {
            counts[t] += 1;
        }
    }
    (topmost, counts)
}

/// Topmost (minimum depth) node whose bag contains both u and v.
pub fn topmost_common(
    td: &TreeDecomposition,
    depth: &[usize],
    u: usize,
    v: usize,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (x, bag) in td.bags.iter().enumerate() {
        if bag.binary_search(&u).is_ok() && bag.binary_search(&v).is_ok() {
            if best.map_or(true, |b| depth[x] < depth[b]) {
                best = Some(x);
            }
        }
    }
    best
}

/// Node x of a tree such that every component of tree - x has measure at
/// most half of the total; smallest such index is returned.
pub fn balanced_tree_node(tree: &Graph, mu: &Measure) -> Result<usize, Error> {
    if !tree.is_tree() {
        return Err(Error::NotATree);
    }
    let q = tree.n();
    if mu.len() != q {
        return Err(Error::DimensionMismatch { expected: q, got: mu.len() });
    }
    let total = mu.total();
    // subtree sums w.r.t. root 0, computed iteratively
    let mut parent = vec![usize::MAX; q];
    let mut order = vec![0usize];
    {
        let mut seen = vec![false; q];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &y in tree.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    order.push(y);
                }
            }
        }
    }
    let mut down = vec![0u128; q];
    for &x in order.iter().rev() {
        down[x] += mu.weight(x) as u128;
        if parent[x] != usize::MAX {
            let d = down[x];
            down[parent[x]] += d;
        }
    }
    for x in 0..q {
        let mut ok = true;
        for &y in tree.neighbors(x) {
            let side = if parent[y] == x { down[y] } else { total - down[x] };
            if 2 * side > total {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(x);
        }
    }
    unreachable!("a balanced node always exists in a tree")
}

/// Decomposition of the bipartite graph of a square matrix from one of its
/// symmetric graph: every vertex is replaced by its row copy (same index)
/// and column copy (index + n). Width at most doubles plus one.
pub fn bipartite_decomp_from_symmetric(td: &TreeDecomposition, n: usize) -> TreeDecomposition {
    let bags = td
        .bags
        .iter()
        .map(|bag| {
            let mut b: Vec<usize> = bag.iter().flat_map(|&v| [v, n + v]).collect();
            b.sort_unstable();
            b
        })
        .collect();
    TreeDecomposition { tree: td.tree.clone(), bags, root: td.root, child_order: td.child_order.clone() }
}

/// Tree-partition analogue of [`bipartite_decomp_from_symmetric`].
pub fn bipartite_tpd_from_symmetric(
    tpd: &TreePartitionDecomposition,
    n: usize,
) -> TreePartitionDecomposition {
    let bags = tpd
        .bags
        .iter()
        .map(|bag| {
            let mut b: Vec<usize> = bag.iter().flat_map(|&v| [v, n + v]).collect();
            b.sort_unstable();
            b
        })
        .collect();
    TreePartitionDecomposition { tree: tpd.tree.clone(), bags }
}

/// Tree decomposition from an elimination order: the bag of v is v plus its
/// not-yet-eliminated neighbors in the fill graph at elimination time.
/// Useful for building fixture decompositions of moderate width.
pub fn td_from_elimination_order(g: &Graph, order: &[usize]) -> Result<TreeDecomposition, Error> {
    let n = g.n();
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: order.len() });
    }
    if n == 0 {
        return Ok(TreeDecomposition::trivial(0));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(Error::Precondition("order must be a permutation".into()));
        }
        pos[v] = i;
    }
    let mut later: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    for (u, v) in g.edges() {
        if pos[u] < pos[v] {
            later[u].insert(v);
        } else {
            later[v].insert(u);
        }
    }
    let mut bags: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &v in order {
        let nb: Vec<usize> = later[v].iter().copied().collect();
        let mut bag = nb.clone();
        bag.push(v);
        bag.sort_unstable();
        bags[v] = bag;
        // make the higher neighborhood a clique in the fill graph
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                let (a, b) = (nb[i], nb[j]);
                if pos[a] < pos[b] {
                    later[a].insert(b);
                } else {
                    later[b].insert(a);
                }
            }
        }
    }
    // parent of v = earliest-eliminated higher neighbor; roots chain together
    let mut tree = Graph::empty(n);
    let mut roots = Vec::new();
    for &v in order {
        let p = later[v].iter().copied().min_by_key(|&u| pos[u]);
        match p {
            Some(u) => tree.add_edge(v, u)?,
            None => roots.push(v),
        }
    }
    for w in roots.windows(2) {
        tree.add_edge(w[0], w[1])?;
    }
    let td = TreeDecomposition::new(tree, bags);
    debug_assert!(validate_td(&td, g).is_ok());
    Ok(td)
}
