//! NRE evaluation over graph databases.
//!
//! [`eval`] materializes the full binary relation of a query by structural
//! induction, with composition through adjacency indexes and star as a
//! worklist transitive closure. [`eval_check`] answers a single
//! `(source, target)` question in time linear in `|G|·|R|`: nesting
//! subexpressions are resolved innermost-first into node sets by backward
//! reachability over a product graph, and the top level is one forward
//! search; no star closure is ever materialized.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::graph::{GraphDb, GraphError, KBranchSemipath, NodeId};
use crate::syntax::{Nre, Symbol};

/// A finite binary relation over node ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeRelation {
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl NodeRelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(iter: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        NodeRelation {
            pairs: iter.into_iter().collect(),
        }
    }

    pub fn contains(&self, u: &str, v: &str) -> bool {
        self.pairs.contains(&(u.to_string(), v.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(NodeId, NodeId)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) {
        self.pairs.insert((u, v));
    }

    pub fn union(&self, other: &NodeRelation) -> NodeRelation {
        NodeRelation {
            pairs: self.pairs.union(&other.pairs).cloned().collect(),
        }
    }

    pub fn compose(&self, other: &NodeRelation) -> NodeRelation {
        let mut by_src: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
        for (u, v) in &other.pairs {
            by_src.entry(u).or_default().push(v);
        }
        let mut out = BTreeSet::new();
        for (u, w) in &self.pairs {
            if let Some(vs) = by_src.get(w) {
                for v in vs {
                    out.insert((u.clone(), (*v).clone()));
                }
            }
        }
        NodeRelation { pairs: out }
    }

    pub fn transpose(&self) -> NodeRelation {
        NodeRelation {
            pairs: self.pairs.iter().map(|(u, v)| (v.clone(), u.clone())).collect(),
        }
    }

    pub fn is_subset(&self, other: &NodeRelation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }
}

impl FromIterator<(NodeId, NodeId)> for NodeRelation {
    fn from_iter<I: IntoIterator<Item = (NodeId, NodeId)>>(iter: I) -> Self {
        NodeRelation::from_pairs(iter)
    }
}

/// The full relation `⟦e⟧_G`.
pub fn eval(e: &Nre, g: &GraphDb) -> NodeRelation {
    let idx = GraphIndex::build(g);
    eval_rec(e, g, &idx)
}

fn eval_rec(e: &Nre, g: &GraphDb, idx: &GraphIndex) -> NodeRelation {
    match e {
        Nre::Epsilon => NodeRelation::from_pairs(g.nodes().map(|n| (n.clone(), n.clone()))),
        Nre::Atom(sym) => idx.atom_relation(sym),
        Nre::Concat(a, b) => eval_rec(a, g, idx).compose(&eval_rec(b, g, idx)),
        Nre::Alt(a, b) => eval_rec(a, g, idx).union(&eval_rec(b, g, idx)),
        Nre::Star(inner) => {
            // Worklist closure per source node over the step relation.
            let step = eval_rec(inner, g, idx);
            let mut succ: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
            for (u, v) in step.iter() {
                succ.entry(u).or_default().push(v);
            }
            let mut out = NodeRelation::new();
            for start in g.nodes() {
                let mut seen: BTreeSet<&NodeId> = BTreeSet::new();
                let mut queue: VecDeque<&NodeId> = VecDeque::new();
                seen.insert(start);
                queue.push_back(start);
                while let Some(n) = queue.pop_front() {
                    out.insert(start.clone(), n.clone());
                    if let Some(vs) = succ.get(n) {
                        for v in vs {
                            if seen.insert(v) {
                                queue.push_back(v);
                            }
                        }
                    }
                }
            }
            out
        }
        Nre::Nest(inner) => {
            let rel = eval_rec(inner, g, idx);
            let sources: BTreeSet<NodeId> = rel.iter().map(|(u, _)| u.clone()).collect();
            NodeRelation::from_pairs(sources.into_iter().map(|u| (u.clone(), u)))
        }
    }
}

struct GraphIndex {
    nodes: Vec<NodeId>,
    node_ix: HashMap<NodeId, usize>,
    /// label -> forward adjacency (src index -> dst indices)
    fwd: HashMap<String, Vec<Vec<u32>>>,
    /// label -> backward adjacency
    bwd: HashMap<String, Vec<Vec<u32>>>,
}

impl GraphIndex {
    fn build(g: &GraphDb) -> Self {
        let nodes: Vec<NodeId> = g.nodes().cloned().collect();
        let node_ix: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut fwd: HashMap<String, Vec<Vec<u32>>> = HashMap::new();
        let mut bwd: HashMap<String, Vec<Vec<u32>>> = HashMap::new();
        for (s, l, t) in g.edges() {
            let si = node_ix[s] as u32;
            let ti = node_ix[t] as u32;
            fwd.entry(l.to_string())
                .or_insert_with(|| vec![Vec::new(); nodes.len()])[si as usize]
                .push(ti);
            bwd.entry(l.to_string())
                .or_insert_with(|| vec![Vec::new(); nodes.len()])[ti as usize]
                .push(si);
        }
        GraphIndex {
            nodes,
            node_ix,
            fwd,
            bwd,
        }
    }

    fn atom_relation(&self, sym: &Symbol) -> NodeRelation {
        let table = if sym.is_inverse() {
            self.bwd.get(sym.base())
        } else {
            self.fwd.get(sym.base())
        };
        let mut out = NodeRelation::new();
        if let Some(table) = table {
            for (src, dsts) in table.iter().enumerate() {
                for d in dsts {
                    out.insert(self.nodes[src].clone(), self.nodes[*d as usize].clone());
                }
            }
        }
        out
    }

    fn step(&self, sym: &Symbol, node: u32) -> &[u32] {
        let table = if sym.is_inverse() {
            self.bwd.get(sym.base())
        } else {
            self.fwd.get(sym.base())
        };
        table.map(|t| t[node as usize].as_slice()).unwrap_or(&[])
    }
}

/// A small one-way NFA over query letters plus resolved nesting tests,
/// used only by `eval_check`.
struct PathNfa {
    initial: usize,
    accept: usize,
    /// state -> (letter edge, next state)
    sym_edges: Vec<Vec<(Symbol, usize)>>,
    /// state -> (nesting test id, next state)
    test_edges: Vec<Vec<(usize, usize)>>,
    eps_edges: Vec<Vec<usize>>,
}

impl PathNfa {
    fn new() -> Self {
        PathNfa {
            initial: 0,
            accept: 0,
            sym_edges: Vec::new(),
            test_edges: Vec::new(),
            eps_edges: Vec::new(),
        }
    }

    fn fresh(&mut self) -> usize {
        self.sym_edges.push(Vec::new());
        self.test_edges.push(Vec::new());
        self.eps_edges.push(Vec::new());
        self.sym_edges.len() - 1
    }

    fn len(&self) -> usize {
        self.sym_edges.len()
    }
}

/// Thompson-style construction where `[e]` becomes a reference to a
/// pre-resolved node set.
fn build_path_nfa(e: &Nre, tests: &mut Vec<Nre>) -> PathNfa {
    let mut nfa = PathNfa::new();
    let start = nfa.fresh();
    let end = build_into(e, start, &mut nfa, tests);
    nfa.initial = start;
    nfa.accept = end;
    nfa
}

fn build_into(e: &Nre, from: usize, nfa: &mut PathNfa, tests: &mut Vec<Nre>) -> usize {
    match e {
        Nre::Epsilon => {
            let to = nfa.fresh();
            nfa.eps_edges[from].push(to);
            to
        }
        Nre::Atom(sym) => {
            let to = nfa.fresh();
            nfa.sym_edges[from].push((sym.clone(), to));
            to
        }
        Nre::Concat(a, b) => {
            let mid = build_into(a, from, nfa, tests);
            build_into(b, mid, nfa, tests)
        }
        Nre::Alt(a, b) => {
            let out = nfa.fresh();
            let ea = build_into(a, from, nfa, tests);
            let eb = build_into(b, from, nfa, tests);
            nfa.eps_edges[ea].push(out);
            nfa.eps_edges[eb].push(out);
            out
        }
        Nre::Star(inner) => {
            let hub = nfa.fresh();
            nfa.eps_edges[from].push(hub);
            let back = build_into(inner, hub, nfa, tests);
            nfa.eps_edges[back].push(hub);
            hub
        }
        Nre::Nest(inner) => {
            let id = tests.len();
            tests.push((**inner).clone());
            let to = nfa.fresh();
            nfa.test_edges[from].push((id, to));
            to
        }
    }
}

/// True iff `(u, v) ∈ ⟦e⟧_G`, by product reachability.
pub fn eval_check(e: &Nre, g: &GraphDb, u: &str, v: &str) -> Result<bool, GraphError> {
    if !g.has_node(u) {
        return Err(GraphError::UnknownNode(u.to_string()));
    }
    if !g.has_node(v) {
        return Err(GraphError::UnknownNode(v.to_string()));
    }
    let idx = GraphIndex::build(g);
    Ok(check_with_index(e, &idx, idx.node_ix[u] as u32, idx.node_ix[v] as u32))
}

fn check_with_index(e: &Nre, idx: &GraphIndex, u: u32, v: u32) -> bool {
    let mut tests = Vec::new();
    let nfa = build_path_nfa(e, &mut tests);
    // Nesting tests at this level; deeper tests resolve recursively.
    let sat: Vec<HashSet<u32>> = tests
        .iter()
        .map(|inner| test_sources(inner, idx))
        .collect();
    let target = (nfa.accept, v);
    forward_search(&nfa, &sat, idx, nfa.initial, u, Some(target)).0
}

/// Nodes that can start a match of `e` (the sources of `⟦e⟧`).
fn test_sources(e: &Nre, idx: &GraphIndex) -> HashSet<u32> {
    let mut tests = Vec::new();
    let nfa = build_path_nfa(e, &mut tests);
    let sat: Vec<HashSet<u32>> = tests
        .iter()
        .map(|inner| test_sources(inner, idx))
        .collect();
    // Backward reachability from every (accept, node) configuration.
    let n_nodes = idx.nodes.len();
    let mut rev_sym: Vec<Vec<(Symbol, usize)>> = vec![Vec::new(); nfa.len()];
    let mut rev_test: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nfa.len()];
    let mut rev_eps: Vec<Vec<usize>> = vec![Vec::new(); nfa.len()];
    for q in 0..nfa.len() {
        for (s, p) in &nfa.sym_edges[q] {
            rev_sym[*p].push((s.clone(), q));
        }
        for (t, p) in &nfa.test_edges[q] {
            rev_test[*p].push((*t, q));
        }
        for p in &nfa.eps_edges[q] {
            rev_eps[*p].push(q);
        }
    }
    let mut seen = vec![false; nfa.len() * n_nodes];
    let mut queue = VecDeque::new();
    for node in 0..n_nodes as u32 {
        let c = nfa.accept * n_nodes + node as usize;
        if !seen[c] {
            seen[c] = true;
            queue.push_back((nfa.accept, node));
        }
    }
    while let Some((q, node)) = queue.pop_front() {
        for (sym, p) in &rev_sym[q] {
            // Backward over a sym edge: predecessors step INTO `node`.
            for &prev in idx.step(&sym.invert(), node) {
                let c = *p * n_nodes + prev as usize;
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back((*p, prev));
                }
            }
        }
        for (t, p) in &rev_test[q] {
            if sat[*t].contains(&node) {
                let c = *p * n_nodes + node as usize;
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back((*p, node));
                }
            }
        }
        for p in &rev_eps[q] {
            let c = *p * n_nodes + node as usize;
            if !seen[c] {
                seen[c] = true;
                queue.push_back((*p, node));
            }
        }
    }
    (0..n_nodes as u32)
        .filter(|node| seen[nfa.initial * n_nodes + *node as usize])
        .collect()
}

fn forward_search(
    nfa: &PathNfa,
    sat: &[HashSet<u32>],
    idx: &GraphIndex,
    q0: usize,
    n0: u32,
    target: Option<(usize, u32)>,
) -> (bool, Vec<bool>) {
    let n_nodes = idx.nodes.len();
    let mut seen = vec![false; nfa.len() * n_nodes];
    let mut queue = VecDeque::new();
    seen[q0 * n_nodes + n0 as usize] = true;
    queue.push_back((q0, n0));
    while let Some((q, node)) = queue.pop_front() {
        if target == Some((q, node)) {
            return (true, seen);
        }
        let mut push = |q: usize, n: u32, seen: &mut Vec<bool>, queue: &mut VecDeque<(usize, u32)>| {
            let c = q * n_nodes + n as usize;
            if !seen[c] {
                seen[c] = true;
                queue.push_back((q, n));
            }
        };
        for (sym, p) in &nfa.sym_edges[q] {
            for &next in idx.step(sym, node) {
                push(*p, next, &mut seen, &mut queue);
            }
        }
        for (t, p) in &nfa.test_edges[q] {
            if sat[*t].contains(&node) {
                push(*p, node, &mut seen, &mut queue);
            }
        }
        for p in &nfa.eps_edges[q] {
            push(*p, node, &mut seen, &mut queue);
        }
    }
    (false, seen)
}

/// Shape check: is the tree canonical for `e`?
///
/// Follows the inductive definition: atoms need exactly one matching edge,
/// alternation either branch, concatenation a split element, star a chain
/// of canonical segments (or a single node), nesting recurses.
pub fn is_canonical(t: &KBranchSemipath, e: &Nre) -> bool {
    use crate::graph::TreeLabel;
    match e {
        Nre::Epsilon => t.edge_count() == 0,
        Nre::Atom(sym) => {
            if t.edge_count() != 1 {
                return false;
            }
            let (_, _, label) = &t.edge_list()[0];
            label == &TreeLabel::Sym(sym.clone())
        }
        Nre::Alt(a, b) => is_canonical(t, a) || is_canonical(t, b),
        Nre::Concat(a, b) => t.domain().any(|w| {
            let (top, bottom) = split_at(t, w);
            is_canonical(&top, a) && is_canonical(&bottom, b)
        }),
        Nre::Star(inner) => {
            if t.edge_count() == 0 {
                return true;
            }
            // A chain of canonical segments: cut off one canonical prefix
            // and recurse on the remaining subtree.
            t.domain().any(|w| {
                if w == "1" {
                    return false;
                }
                let (top, bottom) = split_at(t, w);
                is_canonical(&top, inner) && is_canonical(&bottom, e)
            }) || is_canonical(t, inner)
        }
        Nre::Nest(inner) => is_canonical(t, inner),
    }
}

/// Splits a tree at element `w` into the part outside `w`'s subtree
/// (with `w` as a leaf) and the subtree rooted at `w`, renormalized.
fn split_at(t: &KBranchSemipath, w: &str) -> (KBranchSemipath, KBranchSemipath) {
    use crate::graph::class_of;
    // Top keeps every edge not strictly inside w's subtree; w becomes a leaf.
    let top_edges: Vec<_> = t
        .edge_list()
        .into_iter()
        .filter(|(_, c, _)| !(c.len() > w.len() && c.starts_with(w)))
        .collect();
    let top = KBranchSemipath::new(t.k(), &top_edges).expect("top split is valid");

    // The subtree rooted at w, with digits shifted so its root is `1`.
    let shift = class_of(w) - 1;
    let rename = |el: &str| -> String {
        let suffix = &el[w.len()..];
        let mut out = String::from("1");
        for ch in suffix.chars() {
            let d = ch.to_digit(10).unwrap() as u8 - shift;
            out.push((b'0' + d) as char);
        }
        out
    };
    let bottom_edges: Vec<_> = t
        .edge_list()
        .into_iter()
        .filter(|(p, _, _)| p.len() >= w.len() && p.starts_with(w))
        .map(|(p, c, l)| (rename(&p), rename(&c), l))
        .collect();
    let bottom = KBranchSemipath::new(t.k(), &bottom_edges).expect("bottom split is valid");
    (top, bottom)
}
