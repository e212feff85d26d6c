//! Congruent walks, avoidance and protection, and circular N witnesses.

use std::collections::VecDeque;

use thiserror::Error;

use crate::digraph::{Digraph, Walk};
use crate::pattern::{detect_pattern, find_fuzzy_n_in_tree, FuzzyN, PatternError, PatternKind, PatternWitness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircularError {
    #[error("walks are not congruent")]
    NotCongruent,
    #[error("vertices do not induce a Z6")]
    NotZ6,
    #[error("not a fuzzy N")]
    NotFuzzyN,
    #[error("no homomorphism for {0}")]
    NoHomomorphism(&'static str),
    #[error("extracted witness failed verification")]
    Unverified,
    #[error("pattern located but no fuzzy N found on any path")]
    FuzzyNMissing,
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

pub fn congruent(x: &Walk, y: &Walk) -> bool {
    x.vertices.len() == y.vertices.len() && x.forward == y.forward
}

fn faithful(h: &Digraph, forward: bool, a: usize, b: usize) -> bool {
    if forward {
        h.has_arc(a, b)
    } else {
        h.has_arc(b, a)
    }
}

/// Steps i with a faithful arc x_i y_{i+1}.
fn faithful_steps(x: &Walk, y: &Walk, h: &Digraph) -> Vec<usize> {
    (0..x.len())
        .filter(|&i| faithful(h, x.forward[i], x.vertices[i], y.vertices[i + 1]))
        .collect()
}

pub fn avoids(x: &Walk, y: &Walk, h: &Digraph) -> Result<bool, CircularError> {
    if !congruent(x, y) {
        return Err(CircularError::NotCongruent);
    }
    Ok(faithful_steps(x, y, h).is_empty())
}

/// Faithful arcs x_i z_{i+1} and z_j y_{j+1} only occur with j <= i.
pub fn protects(z: &Walk, y: &Walk, x: &Walk, h: &Digraph) -> Result<bool, CircularError> {
    if !congruent(x, y) || !congruent(x, z) {
        return Err(CircularError::NotCongruent);
    }
    let xz = faithful_steps(x, z, h);
    let zy = faithful_steps(z, y, h);
    let direct = xz.iter().all(|&i| zy.iter().all(|&j| j <= i));
    debug_assert_eq!(direct, protects_split(z, y, x, h)?);
    Ok(direct)
}

/// Some s has x_0..x_s avoiding z_0..z_s and z_{s+1}..z_n avoiding y_{s+1}..y_n.
pub fn protects_split(z: &Walk, y: &Walk, x: &Walk, h: &Digraph) -> Result<bool, CircularError> {
    if !congruent(x, y) || !congruent(x, z) {
        return Err(CircularError::NotCongruent);
    }
    let n = x.len();
    Ok((0..=n).any(|s| {
        let head = avoids(&x.slice(0, s), &z.slice(0, s), h).unwrap();
        let tail = s + 1 > n || avoids(&z.slice(s + 1, n), &y.slice(s + 1, n), h).unwrap();
        head && tail
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircularNWitness {
    pub x: Walk,
    pub y: Walk,
    pub z: Walk,
}

pub fn verify_circular_n(w: &CircularNWitness, h: &Digraph) -> bool {
    let (x, y, z) = (&w.x, &w.y, &w.z);
    if !(x.is_valid_in(h) && y.is_valid_in(h) && z.is_valid_in(h)) {
        return false;
    }
    if !congruent(x, y) || !congruent(x, z) {
        return false;
    }
    let (xv, yv) = (x.first(), y.first());
    xv != yv
        && x.last() == xv
        && y.last() == yv
        && z.first() == yv
        && z.last() == xv
        && avoids(x, y, h).unwrap()
        && protects(z, y, x, h).unwrap()
}

/// List homomorphism from an oriented path with the given step directions.
pub fn path_list_hom(forward: &[bool], lists: &[Vec<usize>], h: &Digraph) -> Option<Vec<usize>> {
    assert_eq!(lists.len(), forward.len() + 1);
    let mut pred: Vec<Vec<(usize, usize)>> = vec![lists[0].iter().map(|&v| (v, usize::MAX)).collect()];
    for (i, &f) in forward.iter().enumerate() {
        let prev = &pred[i];
        let next: Vec<(usize, usize)> = lists[i + 1]
            .iter()
            .filter_map(|&v| {
                prev.iter().find(|&&(u, _)| faithful(h, f, u, v)).map(|&(u, _)| (v, u))
            })
            .collect();
        if next.is_empty() {
            return None;
        }
        pred.push(next);
    }
    let mut map = vec![pred.last()?.first()?.0; forward.len() + 1];
    for i in (1..=forward.len()).rev() {
        let v = map[i];
        let &(_, u) = pred[i].iter().find(|&&(w, _)| w == v).unwrap();
        map[i - 1] = u;
    }
    Some(map)
}

/// The canonical witness on a Z6 given as its six path vertices.
pub fn witness_from_z6(h: &Digraph, ids: &[usize]) -> Result<CircularNWitness, CircularError> {
    if ids.len() != 6 {
        return Err(CircularError::NotZ6);
    }
    let mut v: Vec<usize> = ids.to_vec();
    if h.has_arc(v[1], v[0]) {
        v.reverse();
    }
    let arcs = [(0, 1), (2, 1), (2, 3), (4, 3), (4, 5)];
    if !arcs.iter().all(|&(a, b)| h.has_arc(v[a], v[b])) {
        return Err(CircularError::NotZ6);
    }
    for a in 0..6 {
        for b in 0..6 {
            if h.has_arc(v[a], v[b]) && !arcs.contains(&(a, b)) {
                return Err(CircularError::NotZ6);
            }
        }
    }
    let steps = vec![true, false, true, false];
    let walk = |idx: [usize; 5]| Walk::new(idx.iter().map(|&i| v[i]).collect(), steps.clone());
    let w = CircularNWitness { x: walk([0, 1, 0, 1, 0]), y: walk([4, 5, 4, 5, 4]), z: walk([4, 3, 2, 1, 0]) };
    if !verify_circular_n(&w, h) {
        return Err(CircularError::Unverified);
    }
    Ok(w)
}

/// Step directions of Q' (h blocks of forward, backward, forward) followed by its reversal.
fn q_steps(height: usize) -> Vec<bool> {
    let half: Vec<bool> = (0..height).flat_map(|_| [true, false, true]).collect();
    let back: Vec<bool> = half.iter().rev().map(|&f| !f).collect();
    half.into_iter().chain(back).collect()
}

fn distinct(walks: &[&Walk]) -> Vec<usize> {
    let mut v: Vec<usize> = walks.iter().flat_map(|w| w.vertices.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn witness_from_fuzzy_n(h: &Digraph, n: &FuzzyN) -> Result<CircularNWitness, CircularError> {
    if !n.is_valid() || !n.whole().is_valid_in(h) {
        return Err(CircularError::NotFuzzyN);
    }
    let height = n.height();
    let steps = q_steps(height);
    let len = steps.len();
    let mid = len / 2;
    let x0 = n.p1.first();
    let y0 = n.p3.first();

    let pinned = |region: Vec<usize>, start: usize, end: usize| -> Vec<Vec<usize>> {
        (0..=len)
            .map(|i| match i {
                0 => vec![start],
                i if i == len => vec![end],
                _ => region.clone(),
            })
            .collect()
    };
    let h1 = path_list_hom(&steps, &pinned(distinct(&[&n.p1]), x0, x0), h)
        .ok_or(CircularError::NoHomomorphism("Q into P1"))?;
    let h3 = path_list_hom(&steps, &pinned(distinct(&[&n.p3]), y0, y0), h)
        .ok_or(CircularError::NoHomomorphism("Q into P3"))?;

    let near = distinct(&[&n.p2_bar, &n.b]);
    let far = distinct(&[&n.t, &n.p1, &Walk::single(n.p2_bar.first())]);
    let meet: Vec<usize> = near.iter().copied().filter(|v| far.contains(v)).collect();
    let mut lists = pinned(Vec::new(), y0, x0);
    for (i, l) in lists.iter_mut().enumerate().take(len).skip(1) {
        *l = match i.cmp(&mid) {
            std::cmp::Ordering::Less => near.clone(),
            std::cmp::Ordering::Equal => meet.clone(),
            std::cmp::Ordering::Greater => far.clone(),
        };
    }
    let h2 = path_list_hom(&steps, &lists, h)
        .or_else(|| {
            let wide = distinct(&[&n.p2_bar, &n.b, &n.t, &n.p1]);
            path_list_hom(&steps, &pinned(wide, y0, x0), h)
        })
        .ok_or(CircularError::NoHomomorphism("Q into P2 then P1"))?;

    let w = CircularNWitness {
        x: Walk::new(h1, steps.clone()),
        y: Walk::new(h3, steps.clone()),
        z: Walk::new(h2, steps),
    };
    if !verify_circular_n(&w, h) {
        return Err(CircularError::Unverified);
    }
    Ok(w)
}

pub fn witness_from_pattern(t: &Digraph, p: &PatternWitness) -> Result<CircularNWitness, CircularError> {
    match p.kind {
        PatternKind::Z6 => witness_from_z6(t, &p.markers),
        PatternKind::FuzzyN => {
            let n = find_fuzzy_n_in_tree(t, Some(&p.path)).ok_or(CircularError::FuzzyNMissing)?;
            witness_from_fuzzy_n(t, &n)
        }
    }
}

/// Runs the recognizer and, when it fires, extracts a verified witness.
pub fn extract_witness(t: &Digraph) -> Result<Option<CircularNWitness>, CircularError> {
    match detect_pattern(t)? {
        None => Ok(None),
        Some(p) => witness_from_pattern(t, &p).map(Some),
    }
}

/// The implication property read off a witness: on a path congruent to the
/// walks with lists {x_i, y_i, z_i}, the endpoint pairs (x,x), (y,y), (y,x)
/// extend to list homomorphisms and (x,y) does not.
pub fn implication_check(w: &CircularNWitness, h: &Digraph) -> bool {
    let n = w.x.len();
    let (x, y) = (w.x.first(), w.y.first());
    let base: Vec<Vec<usize>> = (0..=n)
        .map(|i| {
            let mut l = vec![w.x.vertices[i], w.y.vertices[i], w.z.vertices[i]];
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();
    let ends = |a: usize, b: usize| {
        let mut l = base.clone();
        l[0].retain(|&v| v == a);
        l[n].retain(|&v| v == b);
        path_list_hom(&w.x.forward, &l, h).is_some()
    };
    ends(x, x) && ends(y, y) && ends(y, x) && !ends(x, y)
}

/// Exhaustive search for a circular N of any length, by reachability over
/// triples (x_i, y_i, z_i) with a phase bit for the protection split.
pub fn has_circular_n_exhaustive(h: &Digraph) -> bool {
    let n = h.n();
    let id = |x: usize, y: usize, z: usize, p: usize| ((x * n + y) * n + z) * 2 + p;
    for x0 in 0..n {
        for y0 in 0..n {
            if x0 == y0 {
                continue;
            }
            let mut seen = vec![false; n * n * n * 2];
            let mut queue = VecDeque::new();
            seen[id(x0, y0, y0, 0)] = true;
            queue.push_back((x0, y0, y0, 0));
            while let Some((x, y, z, p)) = queue.pop_front() {
                for f in [true, false] {
                    let nb = |v: usize| if f { h.out_neighbors(v) } else { h.in_neighbors(v) };
                    for &x2 in nb(x) {
                        for &y2 in nb(y) {
                            if faithful(h, f, x, y2) {
                                continue;
                            }
                            for &z2 in nb(z) {
                                let xz = faithful(h, f, x, z2);
                                let zy = faithful(h, f, z, y2);
                                let mut next = Vec::with_capacity(2);
                                if p == 0 && !xz {
                                    next.push(0);
                                }
                                if p == 0 || !zy {
                                    next.push(1);
                                }
                                for q in next {
                                    if x2 == x0 && y2 == y0 && z2 == x0 {
                                        return true;
                                    }
                                    let k = id(x2, y2, z2, q);
                                    if !seen[k] {
                                        seen[k] = true;
                                        queue.push_back((x2, y2, z2, q));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    false
}
