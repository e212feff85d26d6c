//! Recognition of the forbidden patterns Z6 and fuzzy N in oriented trees.

use thiserror::Error;

use crate::digraph::{bfs_parents, path_between, path_from_parents, Digraph, Walk};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("input is not an oriented tree")]
    NotTree,
    #[error("oracle size guard exceeded: {0} vertices (limit {ORACLE_LIMIT})")]
    TooLarge(usize),
}

pub const ORACLE_LIMIT: usize = 64;

/// Shape of a Z path. For Z1 both flags are false.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZShape {
    pub len: usize,
    pub first_top: bool,
    pub last_top: bool,
}

pub fn is_z_path(p: &Walk) -> Option<ZShape> {
    if p.forward.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    let lv = p.levels();
    Some(ZShape {
        len: p.vertices.len(),
        first_top: lv[0] == 1,
        last_top: *lv.last().unwrap() == 1,
    })
}

fn has_alternating_six(forward: &[bool]) -> bool {
    let mut run = 0;
    for i in 0..forward.len() {
        if i > 0 && forward[i] != forward[i - 1] {
            run += 1;
        } else {
            run = 1;
        }
        if run >= 5 {
            return true;
        }
    }
    false
}

/// Level condition in traversal order: no vertex lies more than one level
/// below an earlier vertex, and no alternating run of six vertices.
pub fn is_ascending_fuzzy(p: &Walk) -> bool {
    if has_alternating_six(&p.forward) {
        return false;
    }
    let nets = p.prefix_nets();
    let mut best = i64::MIN;
    for &c in &nets {
        if best > c + 1 {
            return false;
        }
        best = best.max(c);
    }
    true
}

pub fn is_fuzzy_path(p: &Walk) -> bool {
    is_ascending_fuzzy(p) || is_ascending_fuzzy(&p.reversed())
}

/// Block-decomposition reading of fuzzy paths, used as an oracle for the level condition.
pub fn is_fuzzy_path_blocks(p: &Walk) -> bool {
    parse_blocks(&p.forward) || parse_blocks(&p.reversed().forward)
}

fn alternating(steps: &[bool]) -> bool {
    steps.windows(2).all(|w| w[0] != w[1])
}

fn parse_blocks(f: &[bool]) -> bool {
    let m = f.len();
    if m < 5 && alternating(f) {
        return true;
    }
    // reach[i]: a prefix ending at vertex i is a first block followed by middle blocks
    let mut reach = vec![false; m + 1];
    for j in 0..=m.min(4) {
        let s = &f[..j];
        if alternating(s) && (j == 0 || s[j - 1]) {
            reach[j] = true;
        }
    }
    for i in 0..=m {
        if !reach[i] {
            continue;
        }
        if i < m && f[i] {
            reach[i + 1] = true;
        }
        if i + 3 <= m && f[i] && !f[i + 1] && f[i + 2] {
            reach[i + 3] = true;
        }
    }
    (0..=m).any(|i| {
        let s = &f[i..];
        reach[i] && s.len() < 5 && alternating(s) && (s.is_empty() || s[0])
    })
}

pub fn is_minimal_fuzzy(p: &Walk) -> bool {
    if !is_fuzzy_path(p) {
        return false;
    }
    let lv = p.levels();
    let h = *lv.iter().max().unwrap();
    lv.iter().filter(|&&l| l == 0).count() == 1 && lv.iter().filter(|&&l| l == h).count() == 1
}

/// Minimal fuzzy path running from its unique bottom vertex to its unique top vertex.
pub fn is_climbing(p: &Walk) -> bool {
    let lv = p.levels();
    let h = *lv.iter().max().unwrap();
    lv[0] == 0
        && *lv.last().unwrap() == h
        && lv.iter().filter(|&&l| l == 0).count() == 1
        && lv.iter().filter(|&&l| l == h).count() == 1
        && is_ascending_fuzzy(p)
}

pub fn quad_condition(p: &Walk, b1: usize, t1: usize, b2: usize, t2: usize) -> bool {
    let pos = |x: usize| p.vertices.iter().position(|&v| v == x);
    let (Some(i1), Some(i2), Some(i3), Some(i4)) = (pos(b1), pos(t1), pos(b2), pos(t2)) else {
        return false;
    };
    if !(i1 < i2 && i2 < i3 && i3 < i4) {
        return false;
    }
    let lv = p.levels();
    let (x, y) = (lv[i1], lv[i2]);
    lv[i3] == x && lv[i4] == y && y >= x + 2 && lv[i1..=i4].iter().all(|&l| x <= l && l <= y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternKind {
    Z6,
    FuzzyN,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternWitness {
    pub kind: PatternKind,
    pub path: Walk,
    /// The six path vertices for Z6, or (b1, t1, b2, t2) for a fuzzy N.
    pub markers: Vec<usize>,
}

impl PatternWitness {
    pub fn pair(&self) -> (usize, usize) {
        (self.path.first(), self.path.last())
    }

    pub fn is_consistent(&self) -> bool {
        match self.kind {
            PatternKind::Z6 => {
                is_z_path(&self.path).map(|z| z.len) == Some(6) && self.markers == self.path.vertices
            }
            PatternKind::FuzzyN => {
                self.markers.len() == 4
                    && quad_condition(
                        &self.path,
                        self.markers[0],
                        self.markers[1],
                        self.markers[2],
                        self.markers[3],
                    )
            }
        }
    }
}

/// Counter scan of one path, as vertex and direction slices.
fn scan_path(verts: &[usize], fwd: &[bool]) -> Option<PatternWitness> {
    if verts.len() == 6 && alternating(fwd) {
        return Some(PatternWitness {
            kind: PatternKind::Z6,
            path: Walk::new(verts.to_vec(), fwd.to_vec()),
            markers: verts.to_vec(),
        });
    }
    let mut c = 0i64;
    let mut m = 0i64;
    for &f in fwd {
        c += if f { 1 } else { -1 };
        if c < 0 {
            return None;
        }
        m = m.max(c);
    }
    if m <= 1 {
        return None;
    }
    let mut c = 0i64;
    let (mut t1, mut b2, mut t2) = (None, None, None);
    for (k, &f) in fwd.iter().enumerate() {
        c += if f { 1 } else { -1 };
        let idx = k + 1;
        if t1.is_none() {
            if c == m {
                t1 = Some(idx);
            }
        } else if b2.is_none() {
            if c == 0 {
                b2 = Some(idx);
            }
        } else if c == m {
            t2 = Some(idx);
            break;
        }
    }
    let (t1, b2, t2) = (t1?, b2?, t2?);
    Some(PatternWitness {
        kind: PatternKind::FuzzyN,
        path: Walk::new(verts.to_vec(), fwd.to_vec()),
        markers: vec![verts[0], verts[t1], verts[b2], verts[t2]],
    })
}

fn scan_root(t: &Digraph, u: usize) -> Option<PatternWitness> {
    let parent = bfs_parents(t, u);
    let mut verts = Vec::new();
    let mut fwd = Vec::new();
    for v in 0..t.n() {
        if v == u {
            continue;
        }
        verts.clear();
        fwd.clear();
        let mut cur = v;
        verts.push(v);
        while cur != u {
            let (p, f) = parent[cur];
            verts.push(p);
            fwd.push(f);
            cur = p;
        }
        verts.reverse();
        fwd.reverse();
        if let Some(w) = scan_path(&verts, &fwd) {
            return Some(w);
        }
    }
    None
}

pub use crate::exec::Exec;

/// The cubic recognizer; the first witness in lexicographic pair order wins.
pub fn detect_pattern(t: &Digraph) -> Result<Option<PatternWitness>, PatternError> {
    detect_pattern_with(t, Exec::Parallel)
}

pub fn detect_pattern_with(t: &Digraph, exec: Exec) -> Result<Option<PatternWitness>, PatternError> {
    if !t.is_tree() {
        return Err(PatternError::NotTree);
    }
    Ok(exec.find_map_first(t.n(), |u| scan_root(t, u)))
}

/// Exhaustive check: every 6-vertex path against the Z definition and every
/// path P(u, v) for a quadruple with b1 = u and t2 = v.
pub fn oracle_detect_pattern(t: &Digraph) -> Result<Option<PatternWitness>, PatternError> {
    if !t.is_tree() {
        return Err(PatternError::NotTree);
    }
    if t.n() > ORACLE_LIMIT {
        return Err(PatternError::TooLarge(t.n()));
    }
    for u in 0..t.n() {
        let parent = bfs_parents(t, u);
        for v in 0..t.n() {
            if u == v {
                continue;
            }
            let p = path_from_parents(&parent, u, v);
            if p.vertices.len() == 6 && is_z_path(&p).is_some() {
                return Ok(Some(PatternWitness {
                    kind: PatternKind::Z6,
                    markers: p.vertices.clone(),
                    path: p,
                }));
            }
            if let Some(markers) = quad_with_ends(&p) {
                return Ok(Some(PatternWitness { kind: PatternKind::FuzzyN, path: p, markers }));
            }
        }
    }
    Ok(None)
}

fn quad_with_ends(p: &Walk) -> Option<Vec<usize>> {
    let lv = p.levels();
    let last = lv.len() - 1;
    let (x, y) = (lv[0], lv[last]);
    if y < x + 2 || lv.iter().any(|&l| l < x || l > y) {
        return None;
    }
    for i in 1..last {
        if lv[i] != y {
            continue;
        }
        for j in i + 1..last {
            if lv[j] == x {
                let cand = [p.vertices[0], p.vertices[i], p.vertices[j], p.vertices[last]];
                debug_assert!(quad_condition(p, cand[0], cand[1], cand[2], cand[3]));
                return Some(cand.to_vec());
            }
        }
    }
    None
}

/// A fuzzy N P1 T P2-bar B P3 located on a path; the pieces share endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzyN {
    pub p1: Walk,
    pub t: Walk,
    pub p2_bar: Walk,
    pub b: Walk,
    pub p3: Walk,
}

impl FuzzyN {
    pub fn height(&self) -> usize {
        self.p1.height()
    }

    pub fn whole(&self) -> Walk {
        [&self.t, &self.p2_bar, &self.b, &self.p3]
            .iter()
            .fold(self.p1.clone(), |acc, w| acc.concat(w).expect("pieces share endpoints"))
    }

    /// Structural check of the defining shape.
    pub fn is_valid(&self) -> bool {
        let h = self.p1.height();
        let t_ok = self.t.is_empty()
            || (self.t.len() == 2 && !self.t.forward[0] && self.t.forward[1]);
        let b_ok = self.b.is_empty()
            || (self.b.len() == 2 && self.b.forward[0] && !self.b.forward[1]);
        h >= 2
            && is_climbing(&self.p1)
            && is_climbing(&self.p2_bar.reversed())
            && is_climbing(&self.p3)
            && self.p2_bar.height() == h
            && self.p3.height() == h
            && t_ok
            && b_ok
            && self.whole().is_path()
    }
}

/// Finds a fuzzy N occurring as a contiguous piece of `p`, read in its given direction.
pub fn find_fuzzy_n(p: &Walk) -> Option<FuzzyN> {
    let len = p.vertices.len();
    let mut climb = vec![vec![0usize; len]; len];
    let mut fall = vec![vec![0usize; len]; len];
    for i in 0..len {
        for j in i + 2..len {
            let s = p.slice(i, j);
            if is_climbing(&s) {
                climb[i][j] = s.height();
            }
            if is_climbing(&s.reversed()) {
                fall[i][j] = s.height();
            }
        }
    }
    let t_end = |b: usize| -> Vec<usize> {
        let mut v = vec![b];
        if b + 2 < len && !p.forward[b] && p.forward[b + 1] {
            v.push(b + 2);
        }
        v
    };
    let b_end = |d: usize| -> Vec<usize> {
        let mut v = vec![d];
        if d + 2 < len && p.forward[d] && !p.forward[d + 1] {
            v.push(d + 2);
        }
        v
    };
    for a in 0..len {
        for b in a + 2..len {
            let h = climb[a][b];
            if h < 2 {
                continue;
            }
            for c in t_end(b) {
                for d in c + 2..len {
                    if fall[c][d] != h {
                        continue;
                    }
                    for e in b_end(d) {
                        for f in e + 2..len {
                            if climb[e][f] == h {
                                let n = FuzzyN {
                                    p1: p.slice(a, b),
                                    t: p.slice(b, c),
                                    p2_bar: p.slice(c, d),
                                    b: p.slice(d, e),
                                    p3: p.slice(e, f),
                                };
                                debug_assert!(n.is_valid());
                                return Some(n);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Locates a fuzzy N in a tree: first on the given path (both directions),
/// then on every path of the tree.
pub fn find_fuzzy_n_in_tree(t: &Digraph, hint: Option<&Walk>) -> Option<FuzzyN> {
    if let Some(p) = hint {
        if let Some(n) = find_fuzzy_n(p).or_else(|| find_fuzzy_n(&p.reversed())) {
            return Some(n);
        }
    }
    for u in 0..t.n() {
        for v in 0..t.n() {
            if u == v {
                continue;
            }
            let p = path_between(t, u, v).ok()?;
            if let Some(n) = find_fuzzy_n(&p) {
                return Some(n);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(g: &Digraph, vs: &[usize]) -> Walk {
        Walk::from_vertices(g, vs).unwrap()
    }

    fn z6() -> Digraph {
        Digraph::new(6, [(0, 1), (2, 1), (2, 3), (4, 3), (4, 5)]).unwrap()
    }

    fn n7() -> Digraph {
        Digraph::new(7, [(0, 1), (1, 2), (3, 2), (4, 3), (4, 5), (5, 6)]).unwrap()
    }

    #[test]
    fn z_path_examples() {
        assert_eq!(is_z_path(&Walk::single(0)).unwrap().len, 1);
        let z = is_z_path(&walk(&z6(), &[0, 1, 2, 3, 4, 5])).unwrap();
        assert_eq!((z.len, z.first_top), (6, false));
        let p = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(is_z_path(&walk(&p, &[0, 1, 2])).is_none());
    }

    #[test]
    fn fuzzy_examples() {
        let p = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(is_fuzzy_path(&walk(&p, &[0, 1, 2])));
        let g = z6();
        assert!(is_fuzzy_path(&walk(&g, &[0, 1, 2, 3, 4])));
        assert!(!is_fuzzy_path(&walk(&g, &[0, 1, 2, 3, 4, 5])));

        assert!(is_minimal_fuzzy(&walk(&p, &[0, 1, 2])));
        assert!(!is_minimal_fuzzy(&walk(&g, &[0, 1, 2])));
        assert!(is_minimal_fuzzy(&Walk::single(4)));
    }

    #[test]
    fn quad_examples() {
        let g = n7();
        let p = walk(&g, &[0, 1, 2, 3, 4, 5, 6]);
        assert!(quad_condition(&p, 0, 2, 4, 6));
        assert!(!quad_condition(&p, 0, 1, 4, 6));
        assert!(!quad_condition(&p, 0, 2, 6, 4));
    }

    #[test]
    fn detect_examples() {
        let w = detect_pattern(&z6()).unwrap().unwrap();
        assert_eq!(w.kind, PatternKind::Z6);
        assert_eq!(w.markers, vec![0, 1, 2, 3, 4, 5]);

        let w = detect_pattern(&n7()).unwrap().unwrap();
        assert_eq!(w.kind, PatternKind::FuzzyN);
        assert_eq!(w.markers, vec![0, 2, 4, 6]);
        assert_eq!(w.pair(), (0, 6));
        assert!(w.is_consistent());

        let dp = Digraph::new(6, (0..5).map(|i| (i, i + 1))).unwrap();
        assert!(detect_pattern(&dp).unwrap().is_none());
        assert_eq!(
            detect_pattern(&Digraph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()),
            Err(PatternError::NotTree)
        );
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(oracle_detect_pattern(&z6()).unwrap().unwrap().kind, PatternKind::Z6);
        assert_eq!(oracle_detect_pattern(&n7()).unwrap().unwrap().kind, PatternKind::FuzzyN);
        let star = Digraph::new(5, [(1, 0), (2, 0), (3, 0), (4, 0)]).unwrap();
        assert!(oracle_detect_pattern(&star).unwrap().is_none());
    }

    #[test]
    fn fuzzy_n_located_on_the_seven_vertex_path() {
        let g = n7();
        let n = find_fuzzy_n(&walk(&g, &[0, 1, 2, 3, 4, 5, 6])).unwrap();
        assert!(n.is_valid());
        assert_eq!(n.p1.vertices, vec![0, 1, 2]);
        assert_eq!(n.p2_bar.vertices, vec![2, 3, 4]);
        assert_eq!(n.p3.vertices, vec![4, 5, 6]);
    }
}
