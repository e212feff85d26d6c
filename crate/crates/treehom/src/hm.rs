//! Conservative ternary polymorphisms and Hagemann-Mitschke chains.

use std::fmt;
use std::sync::Arc;

use crate::construct::{ConstructError, Derivation, DerivationIndex};
use crate::digraph::Digraph;
use crate::exec::Exec;

pub trait TernaryOp: Send + Sync {
    fn apply(&self, x: usize, y: usize, z: usize) -> usize;
}

/// Operation given by a full |V|^3 table, indexed `(x * n + y) * n + z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableOp {
    pub n: usize,
    pub table: Vec<usize>,
}

impl TableOp {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> usize) -> TableOp {
        let mut table = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    table.push(f(x, y, z));
                }
            }
        }
        TableOp { n, table }
    }

    pub fn tabulate(op: &dyn TernaryOp, n: usize) -> TableOp {
        TableOp::from_fn(n, |x, y, z| op.apply(x, y, z))
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, v: usize) {
        let n = self.n;
        self.table[(x * n + y) * n + z] = v;
    }
}

impl TernaryOp for TableOp {
    fn apply(&self, x: usize, y: usize, z: usize) -> usize {
        let n = self.n;
        self.table[(x * n + y) * n + z]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Projection(pub usize);

impl TernaryOp for Projection {
    fn apply(&self, x: usize, y: usize, z: usize) -> usize {
        [x, y, z][self.0]
    }
}

pub struct HMChain {
    pub ops: Vec<Box<dyn TernaryOp>>,
    /// Operations are defined on 0..domain.
    pub domain: usize,
}

impl HMChain {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn apply(&self, i: usize, x: usize, y: usize, z: usize) -> usize {
        self.ops[i].apply(x, y, z)
    }
}

impl fmt::Debug for HMChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HMChain {{ len: {}, domain: {} }}", self.ops.len(), self.domain)
    }
}

struct TreeChain {
    idx: DerivationIndex,
}

struct TreeOp {
    chain: Arc<TreeChain>,
    s: usize,
}

impl TernaryOp for TreeOp {
    fn apply(&self, x: usize, y: usize, z: usize) -> usize {
        self.chain.eval(self.s, self.chain.idx.root, x, y, z)
    }
}

impl TreeChain {
    /// Operation `s` (1, 2 or 3) of the node's tree, on a triple inside it.
    fn eval(&self, s: usize, node: usize, x: usize, y: usize, z: usize) -> usize {
        let nd = &self.idx.nodes[node];
        if nd.kind.is_none() {
            return x;
        }
        let lv = &self.idx.level;
        if !(lv[x] == lv[y] && lv[y] == lv[z]) {
            return match s {
                1 => x,
                3 => z,
                _ if lv[x] == lv[y] => z,
                _ => x,
            };
        }
        let c = |w: usize| nd.owner[w] == 0;
        let (cx, cy, cz) = (c(x), c(y), c(z));
        match s {
            1 => {
                if cx && cy && cz {
                    self.eval(1, nd.central, x, y, z)
                } else if !cx && !cy && !cz {
                    self.eval_union(1, node, x, y, z)
                } else if cx || (cy && cz) {
                    x
                } else if cy {
                    y
                } else {
                    z
                }
            }
            3 => {
                if cx && cy && cz {
                    self.eval(3, nd.central, x, y, z)
                } else if !cx && !cy && !cz {
                    self.eval_union(3, node, x, y, z)
                } else if cz || (cx && cy) {
                    z
                } else if cx {
                    x
                } else {
                    y
                }
            }
            _ => {
                if (!cx && cy && cz) || (cx && !cy && !cz) {
                    self.eval(1, node, x, x, z)
                } else if (cx && cy && !cz) || (!cx && !cy && cz) {
                    self.eval(3, node, x, z, z)
                } else if cx && cy && cz {
                    self.eval(2, nd.central, x, y, z)
                } else if !cx && !cy && !cz {
                    self.eval_union(2, node, x, y, z)
                } else if cx {
                    x
                } else if cy {
                    y
                } else {
                    z
                }
            }
        }
    }

    /// The disjoint union of the parts of a join node.
    fn eval_union(&self, s: usize, node: usize, x: usize, y: usize, z: usize) -> usize {
        let nd = &self.idx.nodes[node];
        let (px, py, pz) = (nd.owner[x], nd.owner[y], nd.owner[z]);
        if px == py && py == pz {
            return self.eval(s, nd.parts[px - 1].0, x, y, z);
        }
        match s {
            1 => x,
            3 => z,
            _ if px == py => z,
            _ => x,
        }
    }
}

/// The length-3 chain built along the derivation of a pattern-free tree.
pub fn build_hm_chain(d: &Derivation, t: &Digraph) -> Result<HMChain, ConstructError> {
    let chain = Arc::new(TreeChain { idx: DerivationIndex::new(d, t)? });
    let ops: Vec<Box<dyn TernaryOp>> = (1..=3)
        .map(|s| Box::new(TreeOp { chain: Arc::clone(&chain), s }) as Box<dyn TernaryOp>)
        .collect();
    Ok(HMChain { ops, domain: t.n() })
}

pub fn find_polymorphism_violation(
    f: &dyn TernaryOp,
    t: &Digraph,
    exec: Exec,
) -> Option<[(usize, usize); 3]> {
    let arcs = t.arcs();
    exec.find_map_first(arcs.len(), |i| {
        let (x, x2) = arcs[i];
        for &(y, y2) in arcs {
            for &(z, z2) in arcs {
                if !t.has_arc(f.apply(x, y, z), f.apply(x2, y2, z2)) {
                    return Some([(x, x2), (y, y2), (z, z2)]);
                }
            }
        }
        None
    })
}

pub fn is_polymorphism(f: &dyn TernaryOp, t: &Digraph) -> bool {
    find_polymorphism_violation(f, t, Exec::default()).is_none()
}

pub fn find_conservativity_violation(f: &dyn TernaryOp, n: usize, exec: Exec) -> Option<(usize, usize, usize)> {
    exec.find_map_first(n, |x| {
        for y in 0..n {
            for z in 0..n {
                let v = f.apply(x, y, z);
                if v != x && v != y && v != z {
                    return Some((x, y, z));
                }
            }
        }
        None
    })
}

pub fn is_conservative(f: &dyn TernaryOp, n: usize) -> bool {
    find_conservativity_violation(f, n, Exec::default()).is_none()
}

/// A failed identity: `index` 0 is f1(x,y,y) = x, `index` i in 1..k is
/// f_i(x,x,y) = f_{i+1}(x,y,y), and `index` k is f_k(x,x,y) = y.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityViolation {
    pub index: usize,
    pub x: usize,
    pub y: usize,
}

pub fn find_identity_violation(chain: &HMChain) -> Option<IdentityViolation> {
    let k = chain.len();
    if k == 0 {
        return Some(IdentityViolation { index: 0, x: 0, y: 0 });
    }
    let n = chain.domain;
    for x in 0..n {
        for y in 0..n {
            if chain.apply(0, x, y, y) != x {
                return Some(IdentityViolation { index: 0, x, y });
            }
            for i in 1..k {
                if chain.apply(i - 1, x, x, y) != chain.apply(i, x, y, y) {
                    return Some(IdentityViolation { index: i, x, y });
                }
            }
            if chain.apply(k - 1, x, x, y) != y {
                return Some(IdentityViolation { index: k, x, y });
            }
        }
    }
    None
}

pub fn check_hm_identities(chain: &HMChain) -> bool {
    find_identity_violation(chain).is_none()
}

/// Outcome of the full check on a chain and template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainCheck {
    Ok,
    NotConservative { op: usize, triple: (usize, usize, usize) },
    NotPolymorphism { op: usize, arcs: [(usize, usize); 3] },
    Identity(IdentityViolation),
}

pub fn verify_chain(chain: &HMChain, t: &Digraph, exec: Exec) -> ChainCheck {
    for (i, op) in chain.ops.iter().enumerate() {
        if let Some(triple) = find_conservativity_violation(op.as_ref(), chain.domain, exec) {
            return ChainCheck::NotConservative { op: i + 1, triple };
        }
        if let Some(arcs) = find_polymorphism_violation(op.as_ref(), t, exec) {
            return ChainCheck::NotPolymorphism { op: i + 1, arcs };
        }
    }
    match find_identity_violation(chain) {
        Some(v) => ChainCheck::Identity(v),
        None => ChainCheck::Ok,
    }
}
