//! Waves and the template decomposition of pattern-free oriented paths.
//!
//! Positions index the vertices of a walk; block ranges are inclusive
//! position pairs within the walk they belong to.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::construct::{decompose, join, Derivation, JoinKind};
use crate::digraph::{Digraph, Walk};
use crate::pattern::is_climbing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WaveError {
    #[error("digraph is not an oriented path")]
    NotPath,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// A whole wave of height at most one.
    Z,
    /// Minimal fuzzy block.
    Q,
    /// Connector.
    A,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub start: usize,
    pub end: usize,
    pub height: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaveDecomposition {
    pub u: Walk,
    pub a: Walk,
    pub v: Walk,
    /// The template applies to r(p) rather than p.
    pub reversed: bool,
    pub u_blocks: Vec<Block>,
    pub v_blocks: Vec<Block>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    U,
    V,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WaveFailure {
    /// Six consecutive vertices alternate, starting at this position.
    AlternatingRun { start: usize },
    /// More than two minimal fuzzy subpaths reach the full height.
    Peaks { count: usize },
    /// Two full-height subpaths that do not meet in a valley.
    Junction,
    NotWave(Side),
}

impl WaveDecomposition {
    /// Ū A V, flipped back when `reversed`.
    pub fn reassemble(&self) -> Option<Walk> {
        let w = self.u.reversed().concat(&self.a)?.concat(&self.v)?;
        Some(if self.reversed { w.flipped() } else { w })
    }
}

fn fmt_blocks(f: &mut fmt::Formatter<'_>, name: &str, w: &Walk, blocks: &[Block]) -> fmt::Result {
    write!(f, "{name}:")?;
    for b in blocks {
        let tag = match b.kind {
            BlockKind::Z => 'Z',
            BlockKind::Q => 'Q',
            BlockKind::A => 'A',
        };
        write!(f, " {tag}{}[", b.height)?;
        for (k, v) in w.vertices[b.start..=b.end].iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")?;
    }
    writeln!(f)
}

impl fmt::Display for WaveDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "reversed: {}", self.reversed)?;
        fmt_blocks(f, "U", &self.u, &self.u_blocks)?;
        let a: Vec<String> = self.a.vertices.iter().map(|v| v.to_string()).collect();
        writeln!(f, "A: [{}]", a.join(" "))?;
        fmt_blocks(f, "V", &self.v, &self.v_blocks)
    }
}

/// Reads an oriented path digraph as a walk from its smaller-id endpoint.
pub fn walk_of_path(g: &Digraph) -> Result<Walk, WaveError> {
    if !g.is_tree() || (0..g.n()).any(|v| g.degree(v) > 2) {
        return Err(WaveError::NotPath);
    }
    let start = (0..g.n()).find(|&v| g.degree(v) <= 1).ok_or(WaveError::NotPath)?;
    let mut order = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some((next, _)) = g.neighbors(cur).find(|&(w, _)| w != prev) {
        prev = cur;
        cur = next;
        order.push(cur);
    }
    Walk::from_vertices(g, &order).map_err(|_| WaveError::NotPath)
}

fn alternating_run(w: &Walk) -> Option<usize> {
    let f = &w.forward;
    (0..f.len().saturating_sub(4)).find(|&i| (i..i + 4).all(|k| f[k] != f[k + 1]))
}

/// Odd blocks climb, even blocks descend.
fn is_q_block(s: &Walk, odd: bool) -> bool {
    !s.is_empty() && if odd { is_climbing(s) } else { is_climbing(&s.reversed()) }
}

/// Z3 connector starting at the top (odd) or bottom (even).
fn is_connector(s: &Walk, odd: bool) -> bool {
    s.forward == if odd { [false, true] } else { [true, false] }
}

fn is_final_connector(s: &Walk, odd: bool) -> bool {
    if s.is_empty() {
        return true;
    }
    s.vertices.len() <= 4 && s.height() == 1 && (s.levels()[0] == 1) == odd
}

/// Whether `w` is a wave, by dynamic programming over block boundaries.
pub fn is_wave(w: &Walk) -> bool {
    if w.height() <= 1 && w.vertices.len() <= 5 {
        return true;
    }
    let mut memo = HashMap::new();
    parse_wave(w, 0, true, usize::MAX, &mut memo)
}

fn parse_wave(
    w: &Walk,
    pos: usize,
    odd: bool,
    bound: usize,
    memo: &mut HashMap<(usize, bool, usize), bool>,
) -> bool {
    if let Some(&r) = memo.get(&(pos, odd, bound)) {
        return r;
    }
    let m = w.len();
    let mut ok = false;
    for j in pos + 1..=m {
        let q = w.slice(pos, j);
        let h = q.height();
        if h >= bound || !is_q_block(&q, odd) {
            continue;
        }
        if is_final_connector(&w.slice(j, m), odd) {
            ok = true;
        } else {
            ok = parse_wave(w, j, !odd, h, memo)
                || (j + 2 < m && is_connector(&w.slice(j, j + 2), odd) && parse_wave(w, j + 2, !odd, h, memo));
        }
        if ok {
            break;
        }
    }
    memo.insert((pos, odd, bound), ok);
    ok
}

/// Greedy blocks: maximal Q blocks, Z3 connectors when available.
fn wave_blocks(w: &Walk) -> Option<Vec<Block>> {
    let m = w.len();
    if w.height() <= 1 {
        return Some(vec![Block { kind: BlockKind::Z, start: 0, end: m, height: w.height() }]);
    }
    let mut blocks = Vec::new();
    let mut pos = 0;
    let mut odd = true;
    loop {
        let end = (pos + 1..=m).rev().find(|&j| is_q_block(&w.slice(pos, j), odd))?;
        blocks.push(Block { kind: BlockKind::Q, start: pos, end, height: w.slice(pos, end).height() });
        pos = end;
        let rest = w.slice(pos, m);
        if rest.height() <= 1 {
            blocks.push(Block { kind: BlockKind::A, start: pos, end: m, height: rest.height() });
            return Some(blocks);
        }
        let a_end = if is_connector(&w.slice(pos, pos + 2), odd) { pos + 2 } else { pos };
        blocks.push(Block { kind: BlockKind::A, start: pos, end: a_end, height: usize::from(a_end > pos) });
        pos = a_end;
        odd = !odd;
    }
}

/// Strictly decreasing Q heights and a short final connector.
fn blocks_form_wave(w: &Walk, blocks: &[Block]) -> bool {
    if let [b] = blocks {
        return b.kind == BlockKind::Z && w.vertices.len() <= 5;
    }
    let qs: Vec<usize> = blocks.iter().filter(|b| b.kind == BlockKind::Q).map(|b| b.height).collect();
    let odd = qs.len() % 2 == 1;
    let last = blocks.last().unwrap();
    qs.windows(2).all(|p| p[0] > p[1]) && is_final_connector(&w.slice(last.start, last.end), odd)
}

fn full_height_blocks(p: &Walk) -> Vec<(usize, usize)> {
    let lv = p.levels();
    let h = p.height();
    let m = p.len();
    let mut out = Vec::new();
    for i in 0..m {
        if lv[i] != 0 && lv[i] != h {
            continue;
        }
        for j in i + 1..=m {
            if lv[i] + lv[j] == h && lv[i] != lv[j] {
                let s = p.slice(i, j);
                let ok = if lv[i] == 0 { is_climbing(&s) } else { is_climbing(&s.reversed()) };
                if ok {
                    out.push((i, j));
                }
            }
        }
    }
    out
}

/// Splits a path into Ū A V (or r(Ū A V)) with waves U and V.
pub fn wave_decompose(p: &Walk) -> Result<WaveDecomposition, WaveFailure> {
    if let Some(start) = alternating_run(p) {
        return Err(WaveFailure::AlternatingRun { start });
    }
    let m = p.len();
    if p.height() <= 1 {
        let reversed = p.levels()[0] == 1;
        let work = if reversed { p.flipped() } else { p.clone() };
        let first = Walk::single(p.first());
        return Ok(WaveDecomposition {
            u: first.clone(),
            a: first,
            v: work,
            reversed,
            u_blocks: vec![Block { kind: BlockKind::Z, start: 0, end: 0, height: 0 }],
            v_blocks: vec![Block { kind: BlockKind::Z, start: 0, end: m, height: p.height() }],
        });
    }
    let peaks = full_height_blocks(p);
    let lv = p.levels();
    let (reversed, u_end, a_end, v_start) = match peaks[..] {
        [(i1, _)] => {
            let reversed = lv[i1] != 0;
            let work = if reversed { p.flipped() } else { p.clone() };
            let wl = work.levels();
            if i1 >= 2 && wl[i1 - 1] == wl[i1] + 1 && wl[i1 - 2] == wl[i1] {
                (reversed, i1 - 2, i1, i1)
            } else {
                (reversed, i1, i1, i1)
            }
        }
        [(i1, j1), (i2, _)] => {
            let reversed = lv[i1] == 0;
            let work = if reversed { p.flipped() } else { p.clone() };
            let wl = work.levels();
            if wl[i2] != 0 {
                return Err(WaveFailure::Junction);
            }
            if i2 == j1 || (i2 == j1 + 2 && is_connector(&work.slice(j1, i2), false)) {
                (reversed, j1, i2, i2)
            } else {
                return Err(WaveFailure::Junction);
            }
        }
        _ => return Err(WaveFailure::Peaks { count: peaks.len() }),
    };
    let work = if reversed { p.flipped() } else { p.clone() };
    let u = work.slice(0, u_end).reversed();
    let a = work.slice(u_end, a_end);
    let v = work.slice(v_start, m);
    let u_blocks = wave_blocks(&u).filter(|b| blocks_form_wave(&u, b)).ok_or(WaveFailure::NotWave(Side::U))?;
    let v_blocks = wave_blocks(&v).filter(|b| blocks_form_wave(&v, b)).ok_or(WaveFailure::NotWave(Side::V))?;
    Ok(WaveDecomposition { u, a, v, reversed, u_blocks, v_blocks })
}

/// Interval statistics of prefix nets: (min, max, count at min, count at max).
struct Extremes {
    m: usize,
    table: Vec<(i64, i64, u32, u32)>,
}

impl Extremes {
    fn new(p: &Walk) -> Extremes {
        let nets = p.prefix_nets();
        let m = nets.len();
        let mut table = vec![(0, 0, 0, 0); m * m];
        for a in 0..m {
            let (mut lo, mut hi, mut cl, mut ch) = (nets[a], nets[a], 1, 1);
            table[a * m + a] = (lo, hi, cl, ch);
            for b in a + 1..m {
                let x = nets[b];
                if x < lo {
                    lo = x;
                    cl = 0;
                }
                if x > hi {
                    hi = x;
                    ch = 0;
                }
                cl += u32::from(x == lo);
                ch += u32::from(x == hi);
                table[a * m + b] = (lo, hi, cl, ch);
            }
        }
        Extremes { m, table }
    }

    /// Whether c may join a part spanning a..=b for the given kind: on the
    /// extreme level facing away from the join, or alone on the opposite extreme.
    fn attach(&self, nets: &[i64], a: usize, b: usize, c: usize, up: bool) -> bool {
        let (lo, hi, cl, ch) = self.table[a * self.m + b];
        if up {
            nets[c] == hi || (nets[c] == lo && cl == 1)
        } else {
            nets[c] == lo || (nets[c] == hi && ch == 1)
        }
    }
}

/// A derivation of the path from top and bottom up- and down-joins, over
/// vertex ids taken from the walk.
pub fn path_derivation(p: &Walk) -> Option<Derivation> {
    let m = p.vertices.len();
    let nets = p.prefix_nets();
    let ext = Extremes::new(p);
    // choice[a][b]: join vertex and kind for the interval a..=b
    let mut ok = vec![false; m * m];
    let mut choice: Vec<Option<(usize, JoinKind)>> = vec![None; m * m];
    for len in 0..m {
        for a in 0..m - len {
            let b = a + len;
            if len == 0 {
                ok[a * m + b] = true;
                continue;
            }
            for v0 in a..=b {
                let left_in = (v0 > a).then(|| p.forward[v0 - 1]);
                let right_in = (v0 < b).then(|| !p.forward[v0]);
                let kind = match (left_in, right_in) {
                    (Some(x), Some(y)) if x != y => continue,
                    (Some(x), _) | (_, Some(x)) => x,
                    (None, None) => unreachable!(),
                };
                let mut fine = true;
                if v0 > a {
                    fine &= ok[a * m + v0 - 1] && ext.attach(&nets, a, v0 - 1, v0 - 1, kind);
                }
                if v0 < b {
                    fine &= ok[(v0 + 1) * m + b] && ext.attach(&nets, v0 + 1, b, v0 + 1, kind);
                }
                if fine {
                    ok[a * m + b] = true;
                    choice[a * m + b] = Some((v0, if kind { JoinKind::Up } else { JoinKind::Down }));
                    break;
                }
            }
        }
    }
    ok[m - 1].then(|| build_path_derivation(p, &choice, m, 0, m - 1))
}

fn build_path_derivation(
    p: &Walk,
    choice: &[Option<(usize, JoinKind)>],
    m: usize,
    a: usize,
    b: usize,
) -> Derivation {
    let Some((v0, kind)) = choice[a * m + b] else {
        return Derivation::Leaf(p.vertices[a]);
    };
    let mut parts = Vec::new();
    if v0 > a {
        parts.push((build_path_derivation(p, choice, m, a, v0 - 1), p.vertices[v0 - 1]));
    }
    if v0 < b {
        parts.push((build_path_derivation(p, choice, m, v0 + 1, b), p.vertices[v0 + 1]));
    }
    join(kind, Derivation::Leaf(p.vertices[v0]), p.vertices[v0], parts).expect("path joins are joins")
}

/// Constructible both as a tree and through path joins alone.
pub fn path_constructibility_check(p: &Walk) -> bool {
    decompose(&p.to_digraph()).is_ok() && path_derivation(p).is_some()
}
