//! Ladders: digraphs with an HM chain of length n+1 but none of length n.
//!
//! Vertex ids: a_j = j and b_j = n + 1 + j for 0 <= j <= n.

use thiserror::Error;

use crate::digraph::Digraph;
use crate::hm::{HMChain, TableOp, TernaryOp};

pub const SEARCH_MAX_VERTICES: usize = 6;
pub const SEARCH_MAX_LENGTH: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LadderError {
    #[error("ladder height must be at least 1")]
    HeightTooSmall,
    #[error("search guard exceeded: {vertices} vertices, chain length {length}")]
    GuardExceeded { vertices: usize, length: usize },
}

pub fn a(j: usize) -> usize {
    j
}

pub fn b(n: usize, j: usize) -> usize {
    n + 1 + j
}

pub fn make_ladder(n: usize) -> Result<Digraph, LadderError> {
    if n < 1 {
        return Err(LadderError::HeightTooSmall);
    }
    let arcs = (0..n).flat_map(|j| [(a(j), a(j + 1)), (b(n, j), b(n, j + 1)), (b(n, j), a(j + 1))]);
    Ok(Digraph::new(2 * (n + 1), arcs).expect("ladder arcs are distinct"))
}

/// Level and side (true for a) of a vertex.
fn split(n: usize, v: usize) -> (usize, bool) {
    if v <= n {
        (v, true)
    } else {
        (v - n - 1, false)
    }
}

/// f_i on a same-level triple; `i` is 1-based.
fn table(n: usize, i: usize, j: usize, x: bool, y: bool, z: bool) -> bool {
    let (i, j, n) = (i as i64, j as i64, n as i64);
    match (x, y, z) {
        (true, true, false) => j + 1 > i,
        (true, false, false) => j + 1 >= i,
        (false, true, false) => j + 1 > i && i > n - j + 1,
        (false, false, true) => n - j < i,
        (false, true, true) => n - j + 1 < i,
        (true, false, true) => !(n - j + 1 > i && i > j + 1),
        (s, _, _) => s,
    }
}

/// f_i of the ladder chain, extended from same-level triples.
pub fn ladder_op(n: usize, i: usize, x: usize, y: usize, z: usize) -> usize {
    let (lx, sx) = split(n, x);
    let (ly, sy) = split(n, y);
    let (lz, sz) = split(n, z);
    if lx == ly && ly == lz {
        return if table(n, i, lx, sx, sy, sz) { a(lx) } else { b(n, lx) };
    }
    if i == 1 && ly == lz {
        x
    } else {
        z
    }
}

struct LadderOp {
    n: usize,
    i: usize,
}

impl TernaryOp for LadderOp {
    fn apply(&self, x: usize, y: usize, z: usize) -> usize {
        ladder_op(self.n, self.i, x, y, z)
    }
}

pub fn ladder_hm_chain(n: usize) -> Result<HMChain, LadderError> {
    if n < 1 {
        return Err(LadderError::HeightTooSmall);
    }
    let ops = (1..=n + 1).map(|i| Box::new(LadderOp { n, i }) as Box<dyn TernaryOp>).collect();
    Ok(HMChain { ops, domain: 2 * (n + 1) })
}

/// One forced value: f_op(args) = value, because f_op(premise_args) =
/// premise_value and `arcs` is an arc triple from premise_args to args.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcedStep {
    pub op: usize,
    pub premise_args: [usize; 3],
    pub premise_value: usize,
    pub arcs: [(usize, usize); 3],
    pub args: [usize; 3],
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTrace {
    pub n: usize,
    pub steps: Vec<ForcedStep>,
    /// f_n(a_n, a_n, b_n) is forced to `forced` but the last identity needs `required`.
    pub forced: usize,
    pub required: usize,
}

impl ProofTrace {
    pub fn contradicts(&self) -> bool {
        self.forced != self.required
    }
}

/// Replays why no chain of length n exists, deriving each forced value from
/// conservativity and the cited arc triple.
pub fn ladder_no_shorter_chain(n: usize) -> Result<ProofTrace, LadderError> {
    let h = make_ladder(n)?;
    let mut steps = Vec::with_capacity(n);
    let mut premise_value = a(0);
    for i in 1..=n {
        let p = [a(i - 1), b(n, i - 1), b(n, i - 1)];
        let args = [a(i), a(i), b(n, i)];
        let arcs = [(p[0], args[0]), (p[1], args[1]), (p[2], args[2])];
        let value = forced_value(&h, premise_value, &args).expect("the ladder forces a unique value");
        steps.push(ForcedStep { op: i, premise_args: p, premise_value, arcs, args, value });
        premise_value = value;
    }
    Ok(ProofTrace { n, steps, forced: premise_value, required: b(n, n) })
}

/// The unique argument that `from` has an arc to, if unique.
fn forced_value(h: &Digraph, from: usize, args: &[usize; 3]) -> Option<usize> {
    let mut c: Vec<usize> = args.iter().copied().filter(|&v| h.has_arc(from, v)).collect();
    c.sort_unstable();
    c.dedup();
    (c.len() == 1).then(|| c[0])
}

/// Checks every step mechanically against the ladder.
pub fn validate_trace(trace: &ProofTrace) -> bool {
    let Ok(h) = make_ladder(trace.n) else { return false };
    let n = trace.n;
    let mut expected_premise = a(0);
    for (k, s) in trace.steps.iter().enumerate() {
        let i = k + 1;
        // i = 1: f_1(x,y,y) = x. i > 1: f_{i-1}(x,x,y) = f_i(x,y,y) with the previous value.
        let premise_ok = s.op == i
            && s.premise_args == [a(i - 1), b(n, i - 1), b(n, i - 1)]
            && s.premise_value == expected_premise;
        let arcs_ok = s.arcs.iter().all(|&(u, v)| h.has_arc(u, v))
            && (0..3).all(|t| s.arcs[t] == (s.premise_args[t], s.args[t]));
        let conservative_ok = s.args.contains(&s.value);
        let forced_ok = forced_value(&h, s.premise_value, &s.args) == Some(s.value);
        if !(premise_ok && arcs_ok && conservative_ok && forced_ok) {
            return false;
        }
        expected_premise = s.value;
    }
    trace.steps.len() == n
        && trace.steps.last().map(|s| s.args) == Some([a(n), a(n), b(n, n)])
        && trace.forced == expected_premise
        && trace.required == b(n, n)
        && trace.contradicts()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            self.0[rx] = ry;
        }
    }
}

/// Backtracking search for a conservative HM chain of length k on a tiny digraph.
pub fn brute_force_hm_search(g: &Digraph, k: usize) -> Result<Option<HMChain>, LadderError> {
    let n = g.n();
    if n > SEARCH_MAX_VERTICES || k > SEARCH_MAX_LENGTH || k == 0 {
        return Err(LadderError::GuardExceeded { vertices: n, length: k });
    }
    let cells = n * n * n;
    let cell = |op: usize, x: usize, y: usize, z: usize| op * cells + (x * n + y) * n + z;
    let total = k * cells;
    let mut uf = UnionFind((0..total).collect());
    let mut fixed: Vec<Option<usize>> = vec![None; total];
    for x in 0..n {
        for y in 0..n {
            fixed[cell(0, x, y, y)] = Some(x);
            for i in 0..k - 1 {
                uf.union(cell(i, x, x, y), cell(i + 1, x, y, y));
            }
            let last = cell(k - 1, x, x, y);
            if let Some(v) = fixed[last] {
                if v != y {
                    return Ok(None);
                }
            }
            fixed[last] = Some(y);
        }
    }
    let mut domain: Vec<u64> = vec![u64::MAX; total];
    for op in 0..k {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let c = cell(op, x, y, z);
                    let mut d = (1u64 << x) | (1u64 << y) | (1u64 << z);
                    if let Some(v) = fixed[c] {
                        d &= 1u64 << v;
                    }
                    let r = uf.find(c);
                    domain[r] &= d;
                }
            }
        }
    }
    let roots: Vec<usize> = (0..total).map(|c| uf.find(c)).collect();
    if roots.iter().any(|&r| domain[r] == 0) {
        return Ok(None);
    }
    let mut constraints = Vec::new();
    for op in 0..k {
        for &(x, x2) in g.arcs() {
            for &(y, y2) in g.arcs() {
                for &(z, z2) in g.arcs() {
                    constraints.push((roots[cell(op, x, y, z)], roots[cell(op, x2, y2, z2)]));
                }
            }
        }
    }
    constraints.sort_unstable();
    constraints.dedup();
    let mut vars: Vec<usize> = roots.clone();
    vars.sort_unstable();
    vars.dedup();
    let Some(sol) = csp_search(g, &constraints, &vars, domain) else {
        return Ok(None);
    };
    let ops = (0..k)
        .map(|op| {
            Box::new(TableOp::from_fn(n, |x, y, z| sol[roots[cell(op, x, y, z)]].trailing_zeros() as usize))
                as Box<dyn TernaryOp>
        })
        .collect();
    Ok(Some(HMChain { ops, domain: n }))
}

fn revise(g: &Digraph, constraints: &[(usize, usize)], d: &mut [u64]) -> bool {
    let succ = |set: u64| -> u64 {
        (0..64).filter(|&v| set >> v & 1 == 1).fold(0, |acc, v| {
            g.out_neighbors(v).iter().fold(acc, |a, &w| a | 1 << w)
        })
    };
    let pred = |set: u64| -> u64 {
        (0..64).filter(|&v| set >> v & 1 == 1).fold(0, |acc, v| {
            g.in_neighbors(v).iter().fold(acc, |a, &w| a | 1 << w)
        })
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in constraints {
            let nu = d[u] & pred(d[v]);
            let nv = d[v] & succ(d[u]);
            if nu != d[u] || nv != d[v] {
                d[u] = nu;
                d[v] = nv;
                changed = true;
            }
            if nu == 0 || nv == 0 {
                return false;
            }
        }
    }
    true
}

fn csp_search(g: &Digraph, constraints: &[(usize, usize)], vars: &[usize], mut d: Vec<u64>) -> Option<Vec<u64>> {
    if !revise(g, constraints, &mut d) {
        return None;
    }
    let Some(&v) = vars.iter().find(|&&v| d[v].count_ones() > 1) else {
        return Some(d);
    };
    for val in 0..64 {
        if d[v] >> val & 1 == 0 {
            continue;
        }
        let mut next = d.clone();
        next[v] = 1 << val;
        if let Some(s) = csp_search(g, constraints, vars, next) {
            return Some(s);
        }
    }
    None
}
