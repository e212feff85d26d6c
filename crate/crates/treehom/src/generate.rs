//! Seeded generators for trees, paths and list instances.
//!
//! All randomness comes from SplitMix64: the state advances by
//! 0x9E3779B97F4A7C15 per draw and each output is the state passed through
//! the mixer `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) *
//! 0x94D049BB133111EB; z ^ (z >> 31)`. A fixed config always yields the same output.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::construct::{central_candidates, join, join_candidates, Derivation, JoinKind};
use crate::digraph::Digraph;
use crate::solver::ListInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenMode {
    Arbitrary,
    PatternFree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub n: usize,
    pub list_density: f64,
    pub mode: GenMode,
}

impl GenConfig {
    pub fn new(seed: u64, n: usize) -> GenConfig {
        GenConfig { seed, n, list_density: 1.0, mode: GenMode::Arbitrary }
    }

    pub fn density(mut self, d: f64) -> GenConfig {
        self.list_density = d;
        self
    }

    pub fn mode(mut self, mode: GenMode) -> GenConfig {
        self.mode = mode;
        self
    }

    pub fn rng(&self) -> SplitMix64 {
        SplitMix64::seed_from_u64(self.seed)
    }
}

/// Undirected edges of a uniform random labeled tree on n vertices.
fn tree_edges<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let Reverse(leaf) = leaves.pop().unwrap();
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.push(Reverse(c));
        }
    }
    let Reverse(a) = leaves.pop().unwrap();
    let Reverse(b) = leaves.pop().unwrap();
    edges.push((a, b));
    edges
}

fn orient<R: Rng>(rng: &mut R, n: usize, edges: &[(usize, usize)]) -> Digraph {
    Digraph::new(n, edges.iter().map(|&(a, b)| if rng.gen_bool(0.5) { (a, b) } else { (b, a) }))
        .expect("tree edges are distinct")
}

pub fn random_tree(cfg: &GenConfig) -> Digraph {
    let mut rng = cfg.rng();
    let edges = tree_edges(&mut rng, cfg.n.max(1));
    orient(&mut rng, cfg.n.max(1), &edges)
}

/// An oriented path on vertices 0..n in order, each arc oriented uniformly.
pub fn random_path(cfg: &GenConfig) -> Digraph {
    let mut rng = cfg.rng();
    let n = cfg.n.max(1);
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    orient(&mut rng, n, &edges)
}

/// A tree built from random joins, with its derivation.
pub fn random_pattern_free(cfg: &GenConfig) -> (Digraph, Derivation) {
    let mut rng = cfg.rng();
    let n = cfg.n.max(1);
    let mut pool: Vec<Derivation> = (0..n).map(Derivation::Leaf).collect();
    while pool.len() > 1 {
        let ci = rng.gen_range(0..pool.len());
        let central = pool.swap_remove(ci);
        let kind = if rng.gen_bool(0.5) { JoinKind::Up } else { JoinKind::Down };
        let v0 = *central_candidates(&central, kind).unwrap().choose(&mut rng).unwrap();
        let mut k = 1;
        while k < pool.len() && rng.gen_bool(0.5) {
            k += 1;
        }
        let mut parts = Vec::with_capacity(k);
        for _ in 0..k {
            let part = pool.swap_remove(rng.gen_range(0..pool.len()));
            let vi = *join_candidates(&part, kind).unwrap().choose(&mut rng).unwrap();
            parts.push((part, vi));
        }
        pool.push(join(kind, central, v0, parts).expect("candidates satisfy the join conditions"));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let d = pool.pop().unwrap().relabeled(&perm);
    let t = d.realize().expect("joins of disjoint trees").graph;
    (t, d)
}

pub fn random_pattern_free_tree(cfg: &GenConfig) -> Digraph {
    random_pattern_free(cfg).0
}

/// Dispatches on the config mode.
pub fn generate_tree(cfg: &GenConfig) -> Digraph {
    match cfg.mode {
        GenMode::Arbitrary => random_tree(cfg),
        GenMode::PatternFree => random_pattern_free_tree(cfg),
    }
}

fn random_lists<R: Rng>(rng: &mut R, g_n: usize, t_n: usize, density: f64) -> Vec<Vec<usize>> {
    let p = density.clamp(0.0, 1.0);
    (0..g_n).map(|_| (0..t_n).filter(|_| rng.gen_bool(p)).collect()).collect()
}

/// A random digraph on `cfg.n` vertices with random lists over V(t).
///
/// The digraph is a random oriented tree, sometimes with extra arcs (which may
/// break leveling) and sometimes with one arc removed.
pub fn random_instance(t: &Digraph, cfg: &GenConfig) -> ListInstance {
    let mut rng = cfg.rng();
    let n = cfg.n;
    let edges = tree_edges(&mut rng, n);
    let mut g = orient(&mut rng, n, &edges);
    if n >= 3 && rng.gen_bool(0.3) {
        let extra = rng.gen_range(1..=n / 3 + 1);
        for _ in 0..extra {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b && !g.has_arc(a, b) && !g.has_arc(b, a) {
                g.add_arc(a, b).unwrap();
            }
        }
    }
    if n >= 2 && rng.gen_bool(0.3) {
        let drop = rng.gen_range(0..g.arcs().len());
        let arcs: Vec<_> = g.arcs().iter().copied().enumerate().filter(|&(i, _)| i != drop).map(|(_, a)| a).collect();
        g = Digraph::new(n, arcs).unwrap();
    }
    let lists = random_lists(&mut rng, n, t.n(), cfg.list_density);
    ListInstance::new(g, lists)
}

/// An instance with a planted list homomorphism, returned alongside it.
pub fn planted_instance(t: &Digraph, cfg: &GenConfig) -> (ListInstance, Vec<usize>) {
    let mut rng = cfg.rng();
    let n = cfg.n;
    let mut h = Vec::with_capacity(n);
    let mut arcs = Vec::new();
    for v in 0..n {
        if v == 0 || t.n() == 1 || rng.gen_bool(0.05) {
            h.push(rng.gen_range(0..t.n()));
            continue;
        }
        let u = rng.gen_range(0..v);
        let nb: Vec<(usize, bool)> = t.neighbors(h[u]).collect();
        let (y, fwd) = nb[rng.gen_range(0..nb.len())];
        h.push(y);
        arcs.push(if fwd { (u, v) } else { (v, u) });
    }
    let mut g = Digraph::new(n, arcs).unwrap();
    if n >= 3 {
        for _ in 0..rng.gen_range(0..=n / 4) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b && t.has_arc(h[a], h[b]) && !g.has_arc(a, b) && !g.has_arc(b, a) {
                g.add_arc(a, b).unwrap();
            }
        }
    }
    let mut lists = random_lists(&mut rng, n, t.n(), cfg.list_density);
    for (v, l) in lists.iter_mut().enumerate() {
        l.push(h[v]);
    }
    (ListInstance::new(g, lists), h)
}
