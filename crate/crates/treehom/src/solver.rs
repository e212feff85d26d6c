//! List homomorphism to a constructible tree, driven by its derivation,
//! and an independent backtracking oracle.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::construct::{ConstructError, Derivation, DerivationIndex, JoinKind};
use crate::digraph::{components, compute_leveling, down_component, up_component, Digraph, Leveling, Subgraph};

pub const ORACLE_SOLVE_LIMIT: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("derivation does not match the template: {0}")]
    Mismatch(#[from] ConstructError),
    #[error("list of vertex {vertex} names template vertex {target} out of range")]
    ListOutOfRange { vertex: usize, target: usize },
    #[error("instance has {got} lists for {want} vertices")]
    ListCount { got: usize, want: usize },
    #[error("instance too large for the oracle ({0} vertices)")]
    TooLarge(usize),
    #[error("level pinning needs a connected leveled instance")]
    NotLeveled,
    #[error("level index {alpha} out of range for instance height {height}")]
    AlphaOutOfRange { alpha: usize, height: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListInstance {
    pub g: Digraph,
    /// Sorted list of template vertices for each instance vertex.
    pub lists: Vec<Vec<usize>>,
}

impl ListInstance {
    pub fn new(g: Digraph, mut lists: Vec<Vec<usize>>) -> ListInstance {
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        ListInstance { g, lists }
    }

    pub fn full(g: Digraph, t_n: usize) -> ListInstance {
        let lists = vec![(0..t_n).collect(); g.n()];
        ListInstance { g, lists }
    }

    pub fn validate(&self, t_n: usize) -> Result<(), SolverError> {
        if self.lists.len() != self.g.n() {
            return Err(SolverError::ListCount { got: self.lists.len(), want: self.g.n() });
        }
        for (vertex, l) in self.lists.iter().enumerate() {
            if let Some(&target) = l.iter().find(|&&x| x >= t_n) {
                return Err(SolverError::ListOutOfRange { vertex, target });
            }
        }
        Ok(())
    }

    /// Whether `map` is a list homomorphism from g to t.
    pub fn is_homomorphism(&self, t: &Digraph, map: &[usize]) -> bool {
        map.len() == self.g.n()
            && map.iter().enumerate().all(|(v, x)| self.lists[v].binary_search(x).is_ok())
            && self.g.arcs().iter().all(|&(u, v)| t.has_arc(map[u], map[v]))
    }

    fn bitsets(&self, t_n: usize) -> Vec<FixedBitSet> {
        self.lists
            .iter()
            .map(|l| {
                let mut b = FixedBitSet::with_capacity(t_n);
                for &x in l {
                    b.insert(x);
                }
                b
            })
            .collect()
    }
}

/// Filters every list to template vertices at level `target_level + ℓ(w) - alpha`.
pub fn restrict_lists_by_level(
    inst: &ListInstance,
    lv_g: &Leveling,
    alpha: usize,
    target_level: usize,
    lv_t: &Leveling,
) -> ListInstance {
    let lists = inst
        .lists
        .iter()
        .enumerate()
        .map(|(w, l)| {
            let want = (target_level + lv_g.level[w]) as i64 - alpha as i64;
            l.iter().copied().filter(|&x| lv_t.level[x] as i64 == want).collect()
        })
        .collect();
    ListInstance { g: inst.g.clone(), lists }
}

type MemoKey = (usize, Vec<usize>, Vec<FixedBitSet>);

/// Reusable solver for one template and derivation.
pub struct Solver<'a> {
    t: &'a Digraph,
    idx: DerivationIndex,
    memo: HashMap<MemoKey, bool>,
}

impl<'a> Solver<'a> {
    pub fn new(d: &Derivation, t: &'a Digraph) -> Result<Solver<'a>, SolverError> {
        Ok(Solver { t, idx: DerivationIndex::new(d, t)?, memo: HashMap::new() })
    }

    pub fn index(&self) -> &DerivationIndex {
        &self.idx
    }

    pub fn solve(&mut self, inst: &ListInstance) -> Result<bool, SolverError> {
        inst.validate(self.t.n())?;
        self.memo.clear();
        let verts: Vec<usize> = (0..inst.g.n()).collect();
        let lists = inst.bitsets(self.t.n());
        let mut run = Run { idx: &self.idx, g: &inst.g, memo: &mut self.memo };
        Ok(run.solve_node(self.idx.root, &verts, &lists))
    }

    pub fn solve_level_pinned(&mut self, inst: &ListInstance, alpha: usize) -> Result<bool, SolverError> {
        inst.validate(self.t.n())?;
        let lv = compute_leveling(&inst.g).map_err(|_| SolverError::NotLeveled)?;
        if alpha >= lv.height {
            return Err(SolverError::AlphaOutOfRange { alpha, height: lv.height });
        }
        let root = &self.idx.nodes[self.idx.root];
        let Some(kind) = root.kind else {
            return Ok(false);
        };
        self.memo.clear();
        let lists = inst.bitsets(self.t.n());
        let sub = Subgraph::whole(&inst.g);
        let mut run = Run { idx: &self.idx, g: &inst.g, memo: &mut self.memo };
        Ok(run.pinned(self.idx.root, kind, &sub, &lv, &lists, alpha))
    }
}

pub fn solve(d: &Derivation, t: &Digraph, inst: &ListInstance) -> Result<bool, SolverError> {
    Solver::new(d, t)?.solve(inst)
}

pub fn solve_level_pinned(
    d: &Derivation,
    t: &Digraph,
    inst: &ListInstance,
    alpha: usize,
) -> Result<bool, SolverError> {
    Solver::new(d, t)?.solve_level_pinned(inst, alpha)
}

struct Run<'r> {
    idx: &'r DerivationIndex,
    g: &'r Digraph,
    memo: &'r mut HashMap<MemoKey, bool>,
}

impl Run<'_> {
    /// `verts` are sorted instance ids; `lists` run parallel to them.
    fn solve_node(&mut self, node: usize, verts: &[usize], lists: &[FixedBitSet]) -> bool {
        if lists.iter().any(|l| l.is_clear()) {
            return false;
        }
        let sub = self.g.induced(verts);
        for comp in components(&sub.graph) {
            let cv: Vec<usize> = comp.ids.iter().map(|&i| sub.ids[i]).collect();
            let cl: Vec<FixedBitSet> = comp.ids.iter().map(|&i| lists[i].clone()).collect();
            if !self.solve_component(node, cv, cl) {
                return false;
            }
        }
        true
    }

    fn solve_component(&mut self, node: usize, verts: Vec<usize>, lists: Vec<FixedBitSet>) -> bool {
        let key = (node, verts, lists);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let (_, verts, lists) = &key;
        let nd = &self.idx.nodes[node];
        let result = match nd.kind {
            None => verts.len() == 1 && lists[0].contains(nd.v0),
            Some(kind) => {
                let sub = self.g.induced(verts);
                match compute_leveling(&sub.graph) {
                    Err(_) => false,
                    Ok(lv) if lv.height > nd.height() => false,
                    Ok(lv) => {
                        (0..lv.height).any(|alpha| self.pinned(node, kind, &sub, &lv, lists, alpha))
                            || nd.children().collect::<Vec<_>>().into_iter().any(|c| {
                                let mask = &self.idx.nodes[c].mask;
                                let restricted = restrict_mask(lists, mask);
                                self.solve_node(c, verts, &restricted)
                            })
                    }
                }
            }
        };
        self.memo.insert(key, result);
        result
    }

    /// Whether the connected leveled component `sub` maps to the node's tree with
    /// instance level `alpha` (Up) or `alpha + 1` (Down) sent to the join level of the parts.
    fn pinned(
        &mut self,
        node: usize,
        kind: JoinKind,
        sub: &Subgraph,
        lv: &Leveling,
        lists: &[FixedBitSet],
        alpha: usize,
    ) -> bool {
        let nd = &self.idx.nodes[node];
        let v0 = nd.v0;
        let central = nd.central;
        let parts: Vec<usize> = nd.parts.iter().map(|&(p, _)| p).collect();
        let g = &sub.graph;
        let (seed_level, part_level) = match kind {
            JoinKind::Up => (alpha + 1, alpha),
            JoinKind::Down => (alpha, alpha + 1),
        };
        let join_t_level = match kind {
            JoinKind::Up => self.idx.level[v0] as i64 - 1,
            JoinKind::Down => self.idx.level[v0] as i64 + 1,
        };

        let mut covered = vec![false; g.n()];
        let mut removed = vec![false; g.n()];
        for s in 0..g.n() {
            if lv.level[s] != seed_level || covered[s] {
                continue;
            }
            let comp = match kind {
                JoinKind::Up => up_component(g, lv, s),
                JoinKind::Down => down_component(g, lv, s),
            };
            for &w in &comp {
                covered[w] = true;
            }
            let cmask = mask_bits(&self.idx.nodes[central].mask);
            let cv: Vec<usize> = comp.iter().map(|&w| sub.ids[w]).collect();
            let cl: Vec<FixedBitSet> = comp
                .iter()
                .map(|&w| {
                    let mut l = lists[w].clone();
                    l.intersect_with(&cmask);
                    let forced = lv.level[w] == seed_level
                        && match kind {
                            JoinKind::Up => !g.in_neighbors(w).is_empty(),
                            JoinKind::Down => !g.out_neighbors(w).is_empty(),
                        };
                    if forced {
                        let keep = l.contains(v0);
                        l.clear();
                        if keep {
                            l.insert(v0);
                        }
                    }
                    l
                })
                .collect();
            if self.solve_node(central, &cv, &cl) {
                for &w in &comp {
                    removed[w] = true;
                }
            }
        }

        let join_vertices: Vec<usize> = self.idx.nodes[node].parts.iter().map(|&(_, vi)| vi).collect();
        let rest: Vec<usize> = (0..g.n()).filter(|&w| !removed[w]).collect();
        let rest_sub = g.induced(&rest);
        for comp in components(&rest_sub.graph) {
            let local: Vec<usize> = comp.ids.iter().map(|&i| rest_sub.ids[i]).collect();
            let meets = local.iter().any(|&w| lv.level[w] == part_level);
            let cv: Vec<usize> = local.iter().map(|&w| sub.ids[w]).collect();
            let base: Vec<FixedBitSet> = local
                .iter()
                .map(|&w| {
                    let mut l = lists[w].clone();
                    let glued = match kind {
                        JoinKind::Up => g.out_neighbors(w).iter().any(|&u| removed[u]),
                        JoinKind::Down => g.in_neighbors(w).iter().any(|&u| removed[u]),
                    };
                    if glued {
                        let keep: Vec<usize> = join_vertices.iter().copied().filter(|&x| l.contains(x)).collect();
                        l.clear();
                        l.extend(keep);
                    }
                    if meets {
                        let want = join_t_level + lv.level[w] as i64 - part_level as i64;
                        let drop: Vec<usize> =
                            l.ones().filter(|&x| self.idx.level[x] as i64 != want).collect();
                        for x in drop {
                            l.set(x, false);
                        }
                    }
                    l
                })
                .collect();
            let ok = parts.iter().any(|&p| {
                let restricted = restrict_mask(&base, &self.idx.nodes[p].mask);
                self.solve_node(p, &cv, &restricted)
            });
            if !ok {
                return false;
            }
        }
        true
    }
}

fn mask_bits(mask: &[bool]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(mask.len());
    b.extend(mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i));
    b
}

fn restrict_mask(lists: &[FixedBitSet], mask: &[bool]) -> Vec<FixedBitSet> {
    let m = mask_bits(mask);
    lists
        .iter()
        .map(|l| {
            let mut l = l.clone();
            l.intersect_with(&m);
            l
        })
        .collect()
}

/// Backtracking with arc consistency maintained after every assignment.
pub fn oracle_solve(t: &Digraph, inst: &ListInstance) -> Result<Option<Vec<usize>>, SolverError> {
    inst.validate(t.n())?;
    if inst.g.n() > ORACLE_SOLVE_LIMIT {
        return Err(SolverError::TooLarge(inst.g.n()));
    }
    let mut domains = inst.bitsets(t.n());
    if !propagate(t, &inst.g, &mut domains) {
        return Ok(None);
    }
    let found = search(t, &inst.g, domains);
    if let Some(map) = &found {
        assert!(inst.is_homomorphism(t, map), "oracle produced an invalid map");
    }
    Ok(found)
}

fn propagate(t: &Digraph, g: &Digraph, d: &mut [FixedBitSet]) -> bool {
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in g.arcs() {
            let keep_u: Vec<usize> =
                d[u].ones().filter(|&x| t.out_neighbors(x).iter().any(|&y| d[v].contains(y))).collect();
            if keep_u.len() != d[u].count_ones(..) {
                d[u].clear();
                d[u].extend(keep_u);
                changed = true;
            }
            let keep_v: Vec<usize> =
                d[v].ones().filter(|&y| t.in_neighbors(y).iter().any(|&x| d[u].contains(x))).collect();
            if keep_v.len() != d[v].count_ones(..) {
                d[v].clear();
                d[v].extend(keep_v);
                changed = true;
            }
            if d[u].is_clear() || d[v].is_clear() {
                return false;
            }
        }
    }
    d.iter().all(|x| !x.is_clear())
}

fn search(t: &Digraph, g: &Digraph, d: Vec<FixedBitSet>) -> Option<Vec<usize>> {
    let pick = (0..g.n())
        .filter(|&v| d[v].count_ones(..) > 1)
        .min_by_key(|&v| d[v].count_ones(..));
    let Some(v) = pick else {
        return Some(d.iter().map(|b| b.ones().next().unwrap()).collect());
    };
    for x in d[v].ones() {
        let mut next = d.clone();
        next[v].clear();
        next[v].insert(x);
        if propagate(t, g, &mut next) {
            if let Some(m) = search(t, g, next) {
                return Some(m);
            }
        }
    }
    None
}
