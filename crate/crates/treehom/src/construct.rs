//! Up-joins and down-joins of oriented trees, and decomposition of
//! pattern-free trees into join derivations.

use std::fmt;

use thiserror::Error;

use crate::digraph::{
    arc_level, components, compute_leveling, down_component, up_component, Digraph, GraphError,
    Leveling, Subgraph,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("input is not an oriented tree")]
    NotTree,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("central vertex {0} is not in the required extreme level of the central tree")]
    CentralVertex(usize),
    #[error("join vertex {vertex} of part {part} violates the join condition")]
    JoinVertex { part: usize, vertex: usize },
    #[error("vertex {0} appears in more than one subtree")]
    Overlap(usize),
    #[error("vertex {0} is not in its subtree")]
    Missing(usize),
    #[error("a join needs at least one part")]
    NoParts,
    #[error("no arc level has a single component")]
    NoSingleComponentLevel,
    #[error("arc level {0} is neither an in-spider nor an out-spider")]
    NotSpider(usize),
    #[error("spider classification needs a connected digraph of height 1")]
    NotHeightOne,
    #[error("decomposition claim failed: {0}")]
    Claim(String),
    #[error("derivation does not realize the template tree")]
    Mismatch,
    #[error("derivation parse error at token {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JoinKind {
    Up,
    Down,
}

impl JoinKind {
    pub fn flip(self) -> JoinKind {
        match self {
            JoinKind::Up => JoinKind::Down,
            JoinKind::Down => JoinKind::Up,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Leaf(usize),
    Join {
        kind: JoinKind,
        central: Box<Derivation>,
        v0: usize,
        parts: Vec<(Derivation, usize)>,
        /// Level of v0 in the realized tree.
        level: usize,
    },
}

fn build(mut ids: Vec<usize>, arcs: &[(usize, usize)]) -> Subgraph {
    ids.sort_unstable();
    let mut g = Digraph::empty(ids.len());
    for &(u, v) in arcs {
        let a = ids.binary_search(&u).unwrap();
        let b = ids.binary_search(&v).unwrap();
        g.add_arc(a, b).expect("realized arcs are distinct");
    }
    Subgraph { graph: g, ids }
}

/// Whether `v` may serve as a join vertex of `part` for the given kind.
fn valid_join_vertex(part: &Subgraph, lv: &Leveling, v: usize, kind: JoinKind) -> bool {
    let l = lv.level[v];
    let extreme = match kind {
        JoinKind::Up => lv.height,
        JoinKind::Down => 0,
    };
    if l == extreme {
        return true;
    }
    let active = |w: usize| match kind {
        JoinKind::Up => !part.graph.out_neighbors(w).is_empty(),
        JoinKind::Down => !part.graph.in_neighbors(w).is_empty(),
    };
    active(v) && (0..part.ids.len()).all(|w| w == v || lv.level[w] != l || !active(w))
}

pub fn join(
    kind: JoinKind,
    central: Derivation,
    v0: usize,
    parts: Vec<(Derivation, usize)>,
) -> Result<Derivation, ConstructError> {
    if parts.is_empty() {
        return Err(ConstructError::NoParts);
    }
    let c = central.realize()?;
    let clv = compute_leveling(&c.graph)?;
    let lc = c.local(v0).ok_or(ConstructError::Missing(v0))?;
    let want = match kind {
        JoinKind::Up => 0,
        JoinKind::Down => clv.height,
    };
    if clv.level[lc] != want {
        return Err(ConstructError::CentralVertex(v0));
    }
    let mut ids = c.ids.clone();
    let mut arcs = c.original_arcs();
    for (i, (d, vi)) in parts.iter().enumerate() {
        let p = d.realize()?;
        let plv = compute_leveling(&p.graph)?;
        let lp = p.local(*vi).ok_or(ConstructError::Missing(*vi))?;
        if !valid_join_vertex(&p, &plv, lp, kind) {
            return Err(ConstructError::JoinVertex { part: i + 1, vertex: *vi });
        }
        ids.extend_from_slice(&p.ids);
        arcs.extend(p.original_arcs());
        arcs.push(match kind {
            JoinKind::Up => (*vi, v0),
            JoinKind::Down => (v0, *vi),
        });
    }
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(ConstructError::Overlap(w[0]));
    }
    let whole = build(ids, &arcs);
    let lv = compute_leveling(&whole.graph)?;
    let level = lv.level[whole.local(v0).unwrap()];
    Ok(Derivation::Join { kind, central: Box::new(central), v0, parts, level })
}

pub fn up_join(
    central: Derivation,
    v0: usize,
    parts: Vec<(Derivation, usize)>,
) -> Result<Derivation, ConstructError> {
    join(JoinKind::Up, central, v0, parts)
}

pub fn down_join(
    central: Derivation,
    v0: usize,
    parts: Vec<(Derivation, usize)>,
) -> Result<Derivation, ConstructError> {
    join(JoinKind::Down, central, v0, parts)
}

/// Vertices of the derivation's tree usable as v0 for a join of this kind.
pub fn central_candidates(d: &Derivation, kind: JoinKind) -> Result<Vec<usize>, ConstructError> {
    let c = d.realize()?;
    let lv = compute_leveling(&c.graph)?;
    let want = match kind {
        JoinKind::Up => 0,
        JoinKind::Down => lv.height,
    };
    Ok(lv.vertices_at(want).into_iter().map(|v| c.ids[v]).collect())
}

/// Vertices usable as the join vertex when the tree is a part of a join of this kind.
pub fn join_candidates(d: &Derivation, kind: JoinKind) -> Result<Vec<usize>, ConstructError> {
    let p = d.realize()?;
    let lv = compute_leveling(&p.graph)?;
    Ok((0..p.ids.len())
        .filter(|&v| valid_join_vertex(&p, &lv, v, kind))
        .map(|v| p.ids[v])
        .collect())
}

impl Derivation {
    pub fn realize(&self) -> Result<Subgraph, ConstructError> {
        let mut ids = Vec::new();
        let mut arcs = Vec::new();
        self.collect(&mut ids, &mut arcs);
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ConstructError::Overlap(w[0]));
        }
        Ok(build(ids, &arcs))
    }

    fn collect(&self, ids: &mut Vec<usize>, arcs: &mut Vec<(usize, usize)>) {
        match self {
            Derivation::Leaf(k) => ids.push(*k),
            Derivation::Join { kind, central, v0, parts, .. } => {
                central.collect(ids, arcs);
                for (d, vi) in parts {
                    d.collect(ids, arcs);
                    arcs.push(match kind {
                        JoinKind::Up => (*vi, *v0),
                        JoinKind::Down => (*v0, *vi),
                    });
                }
            }
        }
    }

    pub fn vertices(&self) -> Vec<usize> {
        let mut ids = Vec::new();
        self.collect(&mut ids, &mut Vec::new());
        ids.sort_unstable();
        ids
    }

    /// The derivation of r(T): every join kind flipped.
    pub fn mirrored(&self) -> Derivation {
        match self {
            Derivation::Leaf(k) => Derivation::Leaf(*k),
            Derivation::Join { kind, central, v0, parts, .. } => join(
                kind.flip(),
                central.mirrored(),
                *v0,
                parts.iter().map(|(d, vi)| (d.mirrored(), *vi)).collect(),
            )
            .expect("mirroring preserves join conditions"),
        }
    }

    /// The same derivation with every vertex id `v` replaced by `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Derivation {
        match self {
            Derivation::Leaf(k) => Derivation::Leaf(perm[*k]),
            Derivation::Join { kind, central, v0, parts, level } => Derivation::Join {
                kind: *kind,
                central: Box::new(central.relabeled(perm)),
                v0: perm[*v0],
                parts: parts.iter().map(|(d, vi)| (d.relabeled(perm), perm[*vi])).collect(),
                level: *level,
            },
        }
    }

    pub fn join_count(&self) -> usize {
        match self {
            Derivation::Leaf(_) => 0,
            Derivation::Join { central, parts, .. } => {
                1 + central.join_count() + parts.iter().map(|(d, _)| d.join_count()).sum::<usize>()
            }
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Derivation::Leaf(k) => write!(f, "(leaf {k})"),
            Derivation::Join { kind, central, v0, parts, .. } => {
                let tag = match kind {
                    JoinKind::Up => "up",
                    JoinKind::Down => "down",
                };
                write!(f, "({tag} {v0} (central {central})")?;
                for (d, vi) in parts {
                    write!(f, " (part {vi} {d})")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn parse_derivation(text: &str) -> Result<Derivation, ConstructError> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut pos = 0;
    let d = parse_node(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(ConstructError::Parse { pos, msg: "trailing input".into() });
    }
    Ok(d)
}

fn expect(tokens: &[&str], pos: &mut usize, want: &str) -> Result<(), ConstructError> {
    match tokens.get(*pos) {
        Some(t) if *t == want => {
            *pos += 1;
            Ok(())
        }
        other => Err(ConstructError::Parse {
            pos: *pos,
            msg: format!("expected `{want}`, found {other:?}"),
        }),
    }
}

fn number(tokens: &[&str], pos: &mut usize) -> Result<usize, ConstructError> {
    let t = tokens.get(*pos).ok_or(ConstructError::Parse {
        pos: *pos,
        msg: "unexpected end of input".into(),
    })?;
    let v = t.parse().map_err(|_| ConstructError::Parse {
        pos: *pos,
        msg: format!("expected a vertex id, found `{t}`"),
    })?;
    *pos += 1;
    Ok(v)
}

fn parse_node(tokens: &[&str], pos: &mut usize) -> Result<Derivation, ConstructError> {
    expect(tokens, pos, "(")?;
    let head = tokens.get(*pos).copied().unwrap_or("");
    *pos += 1;
    match head {
        "leaf" => {
            let k = number(tokens, pos)?;
            expect(tokens, pos, ")")?;
            Ok(Derivation::Leaf(k))
        }
        "up" | "down" => {
            let kind = if head == "up" { JoinKind::Up } else { JoinKind::Down };
            let v0 = number(tokens, pos)?;
            expect(tokens, pos, "(")?;
            expect(tokens, pos, "central")?;
            let central = parse_node(tokens, pos)?;
            expect(tokens, pos, ")")?;
            let mut parts = Vec::new();
            while tokens.get(*pos) == Some(&"(") {
                *pos += 1;
                expect(tokens, pos, "part")?;
                let vi = number(tokens, pos)?;
                let d = parse_node(tokens, pos)?;
                expect(tokens, pos, ")")?;
                parts.push((d, vi));
            }
            expect(tokens, pos, ")")?;
            join(kind, central, v0, parts)
        }
        other => Err(ConstructError::Parse {
            pos: *pos - 1,
            msg: format!("unknown form `{other}`"),
        }),
    }
}

/// Smallest arc level index whose arc-level digraph is connected.
pub fn find_single_component_arc_level(t: &Digraph, lv: &Leveling) -> Option<usize> {
    (0..lv.height).find(|&i| {
        arc_level(t, lv, i)
            .map(|r| components(&r.graph).len() == 1)
            .unwrap_or(false)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpiderKind {
    InSpider,
    OutSpider,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpiderShape {
    pub kind: SpiderKind,
    pub center: usize,
    pub bottom: Vec<usize>,
    pub top: Vec<usize>,
}

pub fn classify_spider(r: &Digraph) -> Result<Option<SpiderShape>, ConstructError> {
    let lv = compute_leveling(r).map_err(|_| ConstructError::NotHeightOne)?;
    if lv.height != 1 {
        return Err(ConstructError::NotHeightOne);
    }
    let bottom = lv.vertices_at(0);
    let top = lv.vertices_at(1);
    if let Some(&c) = top.iter().find(|&&t| r.in_neighbors(t).len() == bottom.len()) {
        return Ok(Some(SpiderShape { kind: SpiderKind::InSpider, center: c, bottom, top }));
    }
    if let Some(&c) = bottom.iter().find(|&&b| r.out_neighbors(b).len() == top.len()) {
        return Ok(Some(SpiderShape { kind: SpiderKind::OutSpider, center: c, bottom, top }));
    }
    Ok(None)
}

/// Restricts a subgraph to some of its local vertices, keeping original ids.
fn restrict(sub: &Subgraph, local: &[usize]) -> Subgraph {
    let inner = sub.graph.induced(local);
    let ids = inner.ids.iter().map(|&i| sub.ids[i]).collect();
    Subgraph { graph: inner.graph, ids }
}

pub fn decompose(t: &Digraph) -> Result<Derivation, ConstructError> {
    if !t.is_tree() {
        return Err(ConstructError::NotTree);
    }
    decompose_sub(&Subgraph::whole(t))
}

fn decompose_sub(sub: &Subgraph) -> Result<Derivation, ConstructError> {
    let g = &sub.graph;
    if g.n() == 1 {
        return Ok(Derivation::Leaf(sub.ids[0]));
    }
    let lv = compute_leveling(g)?;
    let alpha = find_single_component_arc_level(g, &lv).ok_or(ConstructError::NoSingleComponentLevel)?;
    let r = arc_level(g, &lv, alpha)?;
    let spider = classify_spider(&r.graph)?.ok_or(ConstructError::NotSpider(alpha))?;
    let center = r.ids[spider.center];
    let (kind, leaves, central_set) = match spider.kind {
        SpiderKind::InSpider => (
            JoinKind::Up,
            spider.bottom.iter().map(|&x| r.ids[x]).collect::<Vec<_>>(),
            up_component(g, &lv, center),
        ),
        SpiderKind::OutSpider => (
            JoinKind::Down,
            spider.top.iter().map(|&x| r.ids[x]).collect::<Vec<_>>(),
            down_component(g, &lv, center),
        ),
    };
    let mut in_central = vec![false; g.n()];
    for &v in &central_set {
        in_central[v] = true;
    }
    let rest: Vec<usize> = (0..g.n()).filter(|&v| !in_central[v]).collect();
    let rest_sub = g.induced(&rest);
    let side_level = match kind {
        JoinKind::Up => lv.level[center] - 1,
        JoinKind::Down => lv.level[center] + 1,
    };
    let mut parts = Vec::new();
    for comp in components(&rest_sub.graph) {
        let local: Vec<usize> = comp.ids.iter().map(|&i| rest_sub.ids[i]).collect();
        let joins: Vec<usize> = local.iter().copied().filter(|v| leaves.contains(v)).collect();
        if joins.len() != 1 {
            return Err(ConstructError::Claim(format!(
                "part containing vertex {} holds {} spider leaves",
                sub.ids[local[0]],
                joins.len()
            )));
        }
        let vi = joins[0];
        for &w in &local {
            let active = match kind {
                JoinKind::Up => !g.out_neighbors(w).is_empty(),
                JoinKind::Down => !g.in_neighbors(w).is_empty(),
            };
            if w != vi && lv.level[w] == side_level && active {
                return Err(ConstructError::Claim(format!(
                    "vertex {} beside the join level is active",
                    sub.ids[w]
                )));
            }
        }
        let part = decompose_sub(&restrict(sub, &local))?;
        parts.push((part, sub.ids[vi]));
    }
    let central = decompose_sub(&restrict(sub, &central_set))?;
    join(kind, central, sub.ids[center], parts)
}

/// A derivation flattened into an arena, with vertex sets over the template tree.
#[derive(Clone, Debug)]
pub struct IndexedNode {
    pub kind: Option<JoinKind>,
    pub v0: usize,
    pub central: usize,
    pub parts: Vec<(usize, usize)>,
    pub verts: Vec<usize>,
    pub mask: Vec<bool>,
    /// Child index (0 = central, i = part i) owning each vertex; usize::MAX outside.
    pub owner: Vec<usize>,
    pub min_level: usize,
    pub max_level: usize,
}

impl IndexedNode {
    pub fn height(&self) -> usize {
        self.max_level - self.min_level
    }

    pub fn children(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.central)
            .filter(move |_| self.kind.is_some())
            .chain(self.parts.iter().map(|&(c, _)| c))
    }
}

#[derive(Clone, Debug)]
pub struct DerivationIndex {
    pub nodes: Vec<IndexedNode>,
    pub root: usize,
    pub level: Vec<usize>,
    pub height: usize,
}

impl DerivationIndex {
    pub fn new(d: &Derivation, t: &Digraph) -> Result<Self, ConstructError> {
        let real = d.realize()?;
        if real.ids != (0..t.n()).collect::<Vec<_>>() || real.original_arcs() != t.sorted_arcs() {
            return Err(ConstructError::Mismatch);
        }
        let lv = compute_leveling(t)?;
        let mut idx = DerivationIndex {
            nodes: Vec::new(),
            root: 0,
            level: lv.level,
            height: lv.height,
        };
        idx.root = idx.add(d, t.n());
        Ok(idx)
    }

    fn add(&mut self, d: &Derivation, n: usize) -> usize {
        let (kind, v0, central, parts) = match d {
            Derivation::Leaf(k) => (None, *k, usize::MAX, Vec::new()),
            Derivation::Join { kind, central, v0, parts, .. } => {
                let c = self.add(central, n);
                let ps = parts.iter().map(|(p, vi)| (self.add(p, n), *vi)).collect();
                (Some(*kind), *v0, c, ps)
            }
        };
        let verts = d.vertices();
        let mut mask = vec![false; n];
        for &v in &verts {
            mask[v] = true;
        }
        let mut owner = vec![usize::MAX; n];
        if kind.is_some() {
            for &v in &self.nodes[central].verts {
                owner[v] = 0;
            }
            for (i, &(p, _)) in parts.iter().enumerate() {
                for &v in &self.nodes[p].verts {
                    owner[v] = i + 1;
                }
            }
        }
        let min_level = verts.iter().map(|&v| self.level[v]).min().unwrap();
        let max_level = verts.iter().map(|&v| self.level[v]).max().unwrap();
        self.nodes.push(IndexedNode { kind, v0, central, parts, verts, mask, owner, min_level, max_level });
        self.nodes.len() - 1
    }
}
