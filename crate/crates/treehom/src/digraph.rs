//! Digraphs, levelings, oriented walks, up-components and the layered product graph.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate arc {0}->{1}")]
    DuplicateArc(usize, usize),
    #[error("arc endpoint {0} out of range for {1} vertices")]
    OutOfRange(usize, usize),
    #[error("digraph is not connected")]
    Disconnected,
    #[error("not leveled: vertex {witness} is reached with net lengths {first} and {second}")]
    NotLeveled { witness: usize, first: i64, second: i64 },
    #[error("not an oriented tree")]
    NotTree,
    #[error("arc level {index} out of range for height {height}")]
    LevelOutOfRange { index: usize, height: usize },
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),
}

#[derive(Clone, Debug)]
pub struct Digraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    arc_set: HashSet<(usize, usize)>,
}

impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.arc_set == other.arc_set
    }
}

impl Eq for Digraph {}

impl Digraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut g = Digraph::empty(n);
        for (u, v) in arcs {
            g.add_arc(u, v)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Digraph {
            n,
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
            arc_set: HashSet::new(),
        }
    }

    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.n {
            return Err(GraphError::OutOfRange(u, self.n));
        }
        if v >= self.n {
            return Err(GraphError::OutOfRange(v, self.n));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !self.arc_set.insert((u, v)) {
            return Err(GraphError::DuplicateArc(u, v));
        }
        self.arcs.push((u, v));
        self.out[u].push(v);
        self.inn[v].push(u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.arc_set.contains(&(u, v))
    }

    /// Underlying-graph neighbours; the flag is true when the arc leaves `v`.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.out[v]
            .iter()
            .map(|&w| (w, true))
            .chain(self.inn[v].iter().map(|&w| (w, false)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.out[v].len() + self.inn[v].len()
    }

    /// r(G): every arc reversed.
    pub fn reversed(&self) -> Digraph {
        let mut g = Digraph::empty(self.n);
        for &(u, v) in &self.arcs {
            g.add_arc(v, u).expect("reversal keeps a valid digraph");
        }
        g
    }

    pub fn sorted_arcs(&self) -> Vec<(usize, usize)> {
        let mut a = self.arcs.clone();
        a.sort_unstable();
        a
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let seen = self.reach_undirected(0, |_| true);
        seen.iter().all(|&b| b)
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.arcs.len() == self.n - 1 && self.is_connected()
    }

    /// Subgraph induced by `vertices`, compacted, remembering original ids.
    pub fn induced(&self, vertices: &[usize]) -> Subgraph {
        let mut ids = vertices.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in ids.iter().enumerate() {
            local[v] = i;
        }
        let mut g = Digraph::empty(ids.len());
        for &(u, v) in &self.arcs {
            if local[u] != usize::MAX && local[v] != usize::MAX {
                g.add_arc(local[u], local[v]).expect("induced arcs are valid");
            }
        }
        Subgraph { graph: g, ids }
    }

    fn reach_undirected(&self, start: usize, allowed: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for (w, _) in self.neighbors(v) {
                if !seen[w] && allowed(w) {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// A compacted subgraph together with the original id of each local vertex.
/// `ids` is always sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgraph {
    pub graph: Digraph,
    pub ids: Vec<usize>,
}

impl Subgraph {
    pub fn whole(g: &Digraph) -> Subgraph {
        Subgraph {
            graph: g.clone(),
            ids: (0..g.n()).collect(),
        }
    }

    pub fn local(&self, original: usize) -> Option<usize> {
        self.ids.binary_search(&original).ok()
    }

    pub fn original(&self, local: usize) -> usize {
        self.ids[local]
    }

    /// Arcs renamed to original ids, sorted.
    pub fn original_arcs(&self) -> Vec<(usize, usize)> {
        let mut a: Vec<_> = self
            .graph
            .arcs()
            .iter()
            .map(|&(u, v)| (self.ids[u], self.ids[v]))
            .collect();
        a.sort_unstable();
        a
    }
}

/// Components of the underlying undirected graph, ordered by smallest vertex.
pub fn components(g: &Digraph) -> Vec<Subgraph> {
    let mut comp = vec![usize::MAX; g.n()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for s in 0..g.n() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            i += 1;
            for (w, _) in g.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
        }
        groups.push(members);
    }
    groups.iter().map(|m| g.induced(m)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leveling {
    pub level: Vec<usize>,
    pub height: usize,
}

impl Leveling {
    pub fn vertices_at(&self, i: usize) -> Vec<usize> {
        (0..self.level.len()).filter(|&v| self.level[v] == i).collect()
    }
}

/// Net-length labelling from vertex 0, then every arc is validated.
pub fn compute_leveling(g: &Digraph) -> Result<Leveling, GraphError> {
    let n = g.n();
    if n == 0 {
        return Ok(Leveling { level: Vec::new(), height: 0 });
    }
    let mut net: Vec<Option<i64>> = vec![None; n];
    net[0] = Some(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let base = net[v].unwrap();
        for (w, fwd) in g.neighbors(v) {
            if net[w].is_none() {
                net[w] = Some(if fwd { base + 1 } else { base - 1 });
                queue.push_back(w);
            }
        }
    }
    if net.iter().any(|x| x.is_none()) {
        return Err(GraphError::Disconnected);
    }
    let net: Vec<i64> = net.into_iter().map(|x| x.unwrap()).collect();
    for &(u, v) in g.arcs() {
        if net[v] != net[u] + 1 {
            return Err(GraphError::NotLeveled {
                witness: v,
                first: net[v],
                second: net[u] + 1,
            });
        }
    }
    let min = *net.iter().min().unwrap();
    let level: Vec<usize> = net.iter().map(|&x| (x - min) as usize).collect();
    let height = *level.iter().max().unwrap();
    Ok(Leveling { level, height })
}

/// The i-th arc level: arcs from L_i to L_{i+1}; isolated vertices are dropped.
pub fn arc_level(g: &Digraph, lv: &Leveling, i: usize) -> Result<Subgraph, GraphError> {
    if i >= lv.height {
        return Err(GraphError::LevelOutOfRange { index: i, height: lv.height });
    }
    let mut verts = Vec::new();
    for &(u, v) in g.arcs() {
        if lv.level[u] == i {
            verts.push(u);
            verts.push(v);
        }
    }
    Ok(g.induced(&verts))
}

/// Vertices reachable from `v` by walks that never leave levels >= level(v).
pub fn up_component(g: &Digraph, lv: &Leveling, v: usize) -> Vec<usize> {
    let floor = lv.level[v];
    let seen = g.reach_undirected(v, |w| lv.level[w] >= floor);
    (0..g.n()).filter(|&w| seen[w]).collect()
}

/// Vertices reachable from `v` by walks that never leave levels <= level(v).
pub fn down_component(g: &Digraph, lv: &Leveling, v: usize) -> Vec<usize> {
    let ceil = lv.level[v];
    let seen = g.reach_undirected(v, |w| lv.level[w] <= ceil);
    (0..g.n()).filter(|&w| seen[w]).collect()
}

/// An oriented walk: `forward[i]` says whether step i follows the arc direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    pub vertices: Vec<usize>,
    pub forward: Vec<bool>,
}

impl Walk {
    pub fn single(v: usize) -> Walk {
        Walk { vertices: vec![v], forward: Vec::new() }
    }

    pub fn new(vertices: Vec<usize>, forward: Vec<bool>) -> Walk {
        assert_eq!(vertices.len(), forward.len() + 1, "walk needs one direction per step");
        Walk { vertices, forward }
    }

    /// Directions read off `g`; a forward arc wins if both exist.
    pub fn from_vertices(g: &Digraph, vertices: &[usize]) -> Result<Walk, GraphError> {
        let mut forward = Vec::with_capacity(vertices.len().saturating_sub(1));
        for w in vertices.windows(2) {
            if g.has_arc(w[0], w[1]) {
                forward.push(true);
            } else if g.has_arc(w[1], w[0]) {
                forward.push(false);
            } else {
                return Err(GraphError::NotAdjacent(w[0], w[1]));
            }
        }
        Ok(Walk { vertices: vertices.to_vec(), forward })
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    pub fn net(&self) -> i64 {
        self.forward.iter().map(|&f| if f { 1 } else { -1 }).sum()
    }

    /// Prefix net lengths, starting with 0.
    pub fn prefix_nets(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.vertices.len());
        let mut c = 0i64;
        out.push(0);
        for &f in &self.forward {
            c += if f { 1 } else { -1 };
            out.push(c);
        }
        out
    }

    /// Level of each position within the walk's own leveling.
    pub fn levels(&self) -> Vec<usize> {
        let p = self.prefix_nets();
        let min = *p.iter().min().unwrap();
        p.iter().map(|&x| (x - min) as usize).collect()
    }

    pub fn height(&self) -> usize {
        *self.levels().iter().max().unwrap()
    }

    /// W-bar: the same walk traversed backwards.
    pub fn reversed(&self) -> Walk {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let forward = self.forward.iter().rev().map(|&f| !f).collect();
        Walk { vertices, forward }
    }

    /// Same vertex sequence with every step direction flipped (the walk in r(G)).
    pub fn flipped(&self) -> Walk {
        Walk {
            vertices: self.vertices.clone(),
            forward: self.forward.iter().map(|&f| !f).collect(),
        }
    }

    /// Concatenation sharing the endpoint `self.last() == other.first()`.
    pub fn concat(&self, other: &Walk) -> Option<Walk> {
        if self.last() != other.first() {
            return None;
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        let mut forward = self.forward.clone();
        forward.extend_from_slice(&other.forward);
        Some(Walk { vertices, forward })
    }

    /// Sub-walk between positions `i..=j`.
    pub fn slice(&self, i: usize, j: usize) -> Walk {
        Walk {
            vertices: self.vertices[i..=j].to_vec(),
            forward: self.forward[i..j].to_vec(),
        }
    }

    pub fn is_valid_in(&self, g: &Digraph) -> bool {
        self.vertices.windows(2).zip(&self.forward).all(|(w, &f)| {
            if f {
                g.has_arc(w[0], w[1])
            } else {
                g.has_arc(w[1], w[0])
            }
        })
    }

    pub fn is_path(&self) -> bool {
        let mut seen = HashSet::new();
        self.vertices.iter().all(|v| seen.insert(*v))
    }

    /// The path as a digraph on positions 0..len.
    pub fn to_digraph(&self) -> Digraph {
        let mut g = Digraph::empty(self.vertices.len());
        for (i, &f) in self.forward.iter().enumerate() {
            let (u, v) = if f { (i, i + 1) } else { (i + 1, i) };
            g.add_arc(u, v).expect("positions are distinct");
        }
        g
    }
}

/// The unique oriented path P(a, b) in a tree.
pub fn path_between(t: &Digraph, a: usize, b: usize) -> Result<Walk, GraphError> {
    if !t.is_tree() {
        return Err(GraphError::NotTree);
    }
    let parent = bfs_parents(t, a);
    Ok(path_from_parents(&parent, a, b))
}

/// Parent pointers (with the arc direction from parent to child) of a BFS tree rooted at `root`.
pub(crate) fn bfs_parents(t: &Digraph, root: usize) -> Vec<(usize, bool)> {
    let mut parent = vec![(usize::MAX, false); t.n()];
    parent[root] = (root, false);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for (w, fwd) in t.neighbors(v) {
            if parent[w].0 == usize::MAX {
                parent[w] = (v, fwd);
                queue.push_back(w);
            }
        }
    }
    parent
}

pub(crate) fn path_from_parents(parent: &[(usize, bool)], a: usize, b: usize) -> Walk {
    let mut vertices = vec![b];
    let mut forward = Vec::new();
    let mut cur = b;
    while cur != a {
        let (p, fwd) = parent[cur];
        vertices.push(p);
        forward.push(fwd);
        cur = p;
    }
    vertices.reverse();
    forward.reverse();
    Walk { vertices, forward }
}

/// The layered product graph with nodes I_j(v), 0 <= j <= d.
#[derive(Clone, Debug)]
pub struct LayeredProductGraph {
    pub base_n: usize,
    pub d: usize,
    adj: Vec<Vec<usize>>,
    edges: Vec<((usize, usize), (usize, usize))>,
}

impl LayeredProductGraph {
    pub fn node(&self, j: usize, v: usize) -> usize {
        j * self.base_n + v
    }

    pub fn node_count(&self) -> usize {
        (self.d + 1) * self.base_n
    }

    /// Edges as pairs of (layer, vertex).
    pub fn edges(&self) -> &[((usize, usize), (usize, usize))] {
        &self.edges
    }

    pub fn reachable(&self, sources: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }
}

pub fn build_gg(g: &Digraph, d: usize) -> LayeredProductGraph {
    let n = g.n();
    let mut adj = vec![Vec::new(); (d + 1) * n];
    let mut edges = Vec::new();
    for &(u, v) in g.arcs() {
        for j in 0..d {
            let a = j * n + u;
            let b = (j + 1) * n + v;
            adj[a].push(b);
            adj[b].push(a);
            edges.push(((j, u), (j + 1, v)));
        }
    }
    LayeredProductGraph { base_n: n, d, adj, edges }
}

/// True iff no I_0 node reaches an I_{d+1} node in the product graph of depth d+1.
pub fn gg_height_check(g: &Digraph, d: usize) -> bool {
    let gg = build_gg(g, d + 1);
    let sources: Vec<usize> = (0..g.n()).map(|v| gg.node(0, v)).collect();
    let seen = gg.reachable(&sources);
    (0..g.n()).all(|v| !seen[gg.node(d + 1, v)])
}

/// Up-component of `v` read off reachability from I_0(v) in the product graph.
pub fn gg_up_component(g: &Digraph, lv: &Leveling, v: usize) -> Vec<usize> {
    let gg = build_gg(g, lv.height);
    let seen = gg.reachable(&[gg.node(0, v)]);
    (0..g.n())
        .filter(|&u| (0..=lv.height).any(|j| seen[gg.node(j, u)]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z6() -> Digraph {
        Digraph::new(6, [(0, 1), (2, 1), (2, 3), (4, 3), (4, 5)]).unwrap()
    }

    #[test]
    fn rejects_loops_and_duplicates() {
        assert_eq!(Digraph::new(2, [(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Digraph::new(2, [(0, 1), (0, 1)]),
            Err(GraphError::DuplicateArc(0, 1))
        );
        assert_eq!(Digraph::new(2, [(0, 2)]), Err(GraphError::OutOfRange(2, 2)));
    }

    #[test]
    fn leveling_examples() {
        let p = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let lv = compute_leveling(&p).unwrap();
        assert_eq!(lv.level, vec![0, 1, 2]);
        assert_eq!(lv.height, 2);

        let tri = Digraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        match compute_leveling(&tri) {
            Err(GraphError::NotLeveled { witness, .. }) => assert_eq!(witness, 2),
            other => panic!("unexpected {other:?}"),
        }

        let lv = compute_leveling(&z6()).unwrap();
        assert_eq!(lv.level, vec![0, 1, 0, 1, 0, 1]);
        assert_eq!(lv.height, 1);

        let split = Digraph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(compute_leveling(&split), Err(GraphError::Disconnected));
    }

    #[test]
    fn components_examples() {
        let g = Digraph::new(4, [(0, 1), (2, 3)]).unwrap();
        let cs = components(&g);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[1].ids, vec![2, 3]);
        assert_eq!(components(&z6()).len(), 1);
        assert_eq!(components(&Digraph::empty(3)).len(), 3);
    }

    #[test]
    fn arc_level_examples() {
        let g = z6();
        let lv = compute_leveling(&g).unwrap();
        assert_eq!(arc_level(&g, &lv, 0).unwrap().graph.arcs().len(), 5);

        let p = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let lv = compute_leveling(&p).unwrap();
        let a = arc_level(&p, &lv, 1).unwrap();
        assert_eq!(a.ids, vec![1, 2]);
        assert_eq!(a.original_arcs(), vec![(1, 2)]);
        assert!(arc_level(&p, &lv, 2).is_err());

        let n7 = Digraph::new(7, [(0, 1), (1, 2), (3, 2), (4, 3), (4, 5), (5, 6)]).unwrap();
        let lv = compute_leveling(&n7).unwrap();
        let a0 = arc_level(&n7, &lv, 0).unwrap();
        assert_eq!(a0.original_arcs(), vec![(0, 1), (4, 3), (4, 5)]);
        assert_eq!(components(&a0.graph).len(), 2);
    }

    #[test]
    fn up_component_examples() {
        let p = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let lv = compute_leveling(&p).unwrap();
        assert_eq!(up_component(&p, &lv, 1), vec![1, 2]);
        assert_eq!(up_component(&p, &lv, 2), vec![2]);
        assert_eq!(down_component(&p, &lv, 1), vec![0, 1]);

        let g = z6();
        let lv = compute_leveling(&g).unwrap();
        assert_eq!(up_component(&g, &lv, 0), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(up_component(&g, &lv, 1), vec![1]);
    }

    #[test]
    fn gg_examples() {
        let arc = Digraph::new(2, [(0, 1)]).unwrap();
        let gg = build_gg(&arc, 1);
        assert_eq!(gg.node_count(), 4);
        assert_eq!(gg.edges(), &[((0, 0), (1, 1))]);
        let gg = build_gg(&arc, 2);
        assert_eq!((gg.node_count(), gg.edges().len()), (6, 2));

        let p = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let mut e = build_gg(&p, 2).edges().to_vec();
        e.sort();
        let mut want = vec![
            ((0, 0), (1, 1)),
            ((1, 1), (2, 2)),
            ((0, 1), (1, 2)),
            ((1, 0), (2, 1)),
        ];
        want.sort();
        assert_eq!(e, want);

        assert!(gg_height_check(&p, 2));
        assert!(!gg_height_check(&p, 1));
        let tri = Digraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        for d in 2..6 {
            assert!(!gg_height_check(&tri, d));
        }
    }

    #[test]
    fn path_between_examples() {
        let g = z6();
        let p = path_between(&g, 0, 5).unwrap();
        assert_eq!(p.vertices, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(p.forward, vec![true, false, true, false, true]);
        assert_eq!(path_between(&g, 3, 3).unwrap(), Walk::single(3));

        let star = Digraph::new(3, [(1, 0), (2, 0)]).unwrap();
        let p = path_between(&star, 1, 2).unwrap();
        assert_eq!(p.vertices, vec![1, 0, 2]);
        assert_eq!(p.forward, vec![true, false]);

        let tri = Digraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(path_between(&tri, 0, 2), Err(GraphError::NotTree));
    }

    #[test]
    fn walk_algebra() {
        let g = z6();
        let w = Walk::from_vertices(&g, &[0, 1, 2, 3]).unwrap();
        assert_eq!(w.net(), 1);
        assert_eq!(w.reversed().net(), -1);
        assert_eq!(w.height(), 1);
        let tail = Walk::from_vertices(&g, &[3, 4, 5]).unwrap();
        let full = w.concat(&tail).unwrap();
        assert_eq!(full.net(), w.net() + tail.net());
        assert!(full.is_valid_in(&g));
        assert!(w.concat(&w).is_none());
        assert!(Walk::from_vertices(&g, &[0, 2]).is_err());
    }
}
