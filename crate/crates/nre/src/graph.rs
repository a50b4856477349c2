//! Graph databases, semipaths, k-branch semipaths and their string encoding.
//!
//! A graph database is a finite edge-labeled directed graph. Edge labels
//! are always forward symbols; inverse traversal is a query-level notion.
//!
//! A k-branch semipath is a tree over a prefix-closed domain of digit
//! strings rooted at `1`, with digit-monotone branching bounded by `k`.
//! `trans` encodes such a tree as a word over `K × (Σ ∪ {$}) × K`,
//! delimited by `%` and `&`. `decode` inverts it and `expand_markers`
//! splices `S`/`E` pseudo-edges in to pin a node pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{validate_label, Symbol, SyntaxError};

pub type NodeId = String;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: malformed edge line (expected `source<TAB>label<TAB>target`)")]
    Malformed { line: usize },
    #[error("line {line}: {source}")]
    BadLabel {
        line: usize,
        source: SyntaxError,
    },
    #[error("node `{0}` is not in the graph")]
    UnknownNode(NodeId),
    #[error("invalid k-branch structure: {0}")]
    InvalidTree(String),
}

/// A finite edge-labeled directed graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphDb {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<(NodeId, String, NodeId)>,
}

impl GraphDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: impl Into<NodeId>) {
        self.nodes.insert(id.into());
    }

    /// Inserts an edge along with its endpoints. Labels must be plain
    /// forward labels.
    pub fn add_edge(
        &mut self,
        src: impl Into<NodeId>,
        label: &str,
        dst: impl Into<NodeId>,
    ) -> Result<(), SyntaxError> {
        validate_label(label)?;
        let (src, dst) = (src.into(), dst.into());
        self.nodes.insert(src.clone());
        self.nodes.insert(dst.clone());
        self.edges.insert((src, label.to_string(), dst));
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.iter()
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.contains(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &str, &NodeId)> {
        self.edges.iter().map(|(s, l, t)| (s, l.as_str(), t))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Distinct edge labels, sorted.
    pub fn labels(&self) -> Vec<String> {
        let set: BTreeSet<_> = self.edges.iter().map(|(_, l, _)| l.clone()).collect();
        set.into_iter().collect()
    }

    /// Parses the TSV edge-list format: one `source<TAB>label<TAB>target`
    /// per line, `#` comments and blank lines ignored, duplicates collapse.
    pub fn from_tsv(text: &str) -> Result<Self, GraphError> {
        let mut g = GraphDb::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split('\t');
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(l), Some(t), None) if !s.is_empty() && !t.is_empty() => {
                    g.add_edge(s, l, t)
                        .map_err(|source| GraphError::BadLabel { line, source })?;
                }
                // A bare id declares an isolated node, so graphs without
                // edges (single-node counterexamples) stay loadable.
                (Some(n), None, None, None) if !n.trim().is_empty() => {
                    g.add_node(n.trim());
                }
                _ => return Err(GraphError::Malformed { line }),
            }
        }
        Ok(g)
    }

    /// Serializes to the TSV edge-list format; isolated nodes appear as
    /// bare-id lines so the output is loadable by `from_tsv`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let touched: BTreeSet<_> = self
            .edges
            .iter()
            .flat_map(|(s, _, t)| [s.clone(), t.clone()])
            .collect();
        for n in self.nodes.difference(&touched) {
            out.push_str(&format!("{n}\n"));
        }
        for (s, l, t) in &self.edges {
            out.push_str(&format!("{s}\t{l}\t{t}\n"));
        }
        out
    }

    /// Containment of node and edge sets.
    pub fn subgraph_of(&self, other: &GraphDb) -> bool {
        self.nodes.is_subset(&other.nodes) && self.edges.is_subset(&other.edges)
    }
}

/// A simple semipath: distinct nodes `u1..u{m+1}` connected by letters
/// that may traverse edges in either direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semipath {
    pub nodes: Vec<NodeId>,
    pub letters: Vec<Symbol>,
}

impl Semipath {
    /// A semipath over canonical node ids `u1..u{n+1}`.
    pub fn canonical(letters: Vec<Symbol>) -> Self {
        let nodes = (1..=letters.len() + 1).map(|i| format!("u{i}")).collect();
        Semipath { nodes, letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The graph this semipath describes: inverse letters become
    /// forward edges pointing the other way.
    pub fn to_graph(&self) -> GraphDb {
        let mut g = GraphDb::new();
        for n in &self.nodes {
            g.add_node(n.clone());
        }
        for (i, sym) in self.letters.iter().enumerate() {
            let (u, v) = (&self.nodes[i], &self.nodes[i + 1]);
            if sym.is_inverse() {
                g.add_edge(v.clone(), sym.base(), u.clone()).unwrap();
            } else {
                g.add_edge(u.clone(), sym.base(), v.clone()).unwrap();
            }
        }
        g
    }
}

/// Returns the witnessing simple semipath if the graph's nodes and edges
/// are exactly those of one, starting from the lexicographically smaller
/// endpoint.
pub fn resembles_semipath(g: &GraphDb) -> Option<Semipath> {
    let nodes: Vec<&NodeId> = g.nodes.iter().collect();
    if nodes.is_empty() {
        return None;
    }
    if nodes.len() == 1 {
        if g.edges.is_empty() {
            return Some(Semipath {
                nodes: vec![nodes[0].clone()],
                letters: vec![],
            });
        }
        return None;
    }
    if g.edges.len() != nodes.len() - 1 {
        return None;
    }
    // Undirected adjacency; a path has exactly two degree-1 endpoints and
    // no parallel edges.
    let mut adj: BTreeMap<&NodeId, Vec<(&NodeId, &str, bool)>> = BTreeMap::new();
    for (s, l, t) in g.edges() {
        if s == t {
            return None;
        }
        adj.entry(s).or_default().push((t, l, false));
        adj.entry(t).or_default().push((s, l, true));
    }
    let mut ends: Vec<&NodeId> = Vec::new();
    for n in &nodes {
        match adj.get(n).map(|v| v.len()).unwrap_or(0) {
            1 => ends.push(n),
            2 => {}
            _ => return None,
        }
    }
    if ends.len() != 2 {
        return None;
    }
    ends.sort();
    let start = ends[0];
    let mut path_nodes = vec![start.clone()];
    let mut letters = Vec::new();
    let mut prev: Option<&NodeId> = None;
    let mut cur = start;
    for _ in 0..g.edges.len() {
        let next = adj[cur]
            .iter()
            .find(|(n, _, _)| Some(*n) != prev)?;
        let (n, label, rev) = *next;
        let sym = if rev {
            Symbol::inverse(label).ok()?
        } else {
            Symbol::forward(label).ok()?
        };
        letters.push(sym);
        path_nodes.push(n.clone());
        prev = Some(cur);
        cur = n;
    }
    // Connectivity: the walk must have visited every node.
    if path_nodes.len() != nodes.len() {
        return None;
    }
    let seen: BTreeSet<_> = path_nodes.iter().collect();
    if seen.len() != path_nodes.len() {
        return None;
    }
    Some(Semipath {
        nodes: path_nodes,
        letters,
    })
}

/// A tree-domain element: a digit string over `1..=k` starting with `1`.
pub type Element = String;

/// An edge label in an expanded tree: a query symbol, or one of the
/// `S`/`E` endpoint markers spliced in by [`KBranchSemipath::expand_markers`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeLabel {
    Sym(Symbol),
    MarkS,
    MarkE,
}

impl fmt::Display for TreeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeLabel::Sym(s) => write!(f, "{s}"),
            TreeLabel::MarkS => write!(f, "S"),
            TreeLabel::MarkE => write!(f, "E"),
        }
    }
}

/// A k-branch semipath: a labeled tree over a k-branch domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KBranchSemipath {
    k: u8,
    /// parent element -> child element -> label; children keyed by their
    /// final digit implicitly via element names.
    edges: BTreeMap<Element, BTreeMap<Element, TreeLabel>>,
    domain: BTreeSet<Element>,
}

/// Serde mirror of the external JSON schema.
#[derive(Serialize, Deserialize)]
struct TreeJson {
    k: u8,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    parent: String,
    child: String,
    label: String,
}

impl KBranchSemipath {
    /// Builds and validates a tree from its edge list. The domain is the
    /// set of mentioned elements plus the root `1`.
    pub fn new(k: u8, edge_list: &[(Element, Element, TreeLabel)]) -> Result<Self, GraphError> {
        if k == 0 || k > 9 {
            return Err(GraphError::InvalidTree(format!(
                "k must be between 1 and 9, got {k}"
            )));
        }
        let mut domain: BTreeSet<Element> = BTreeSet::new();
        domain.insert("1".to_string());
        let mut edges: BTreeMap<Element, BTreeMap<Element, TreeLabel>> = BTreeMap::new();
        for (parent, child, label) in edge_list {
            domain.insert(parent.clone());
            domain.insert(child.clone());
            if child.len() != parent.len() + 1 || !child.starts_with(parent.as_str()) {
                return Err(GraphError::InvalidTree(format!(
                    "edge {parent} -> {child} does not connect a parent to its child"
                )));
            }
            if edges
                .entry(parent.clone())
                .or_default()
                .insert(child.clone(), label.clone())
                .is_some()
            {
                return Err(GraphError::InvalidTree(format!(
                    "duplicate edge {parent} -> {child}"
                )));
            }
        }
        let t = KBranchSemipath { k, edges, domain };
        t.validate()?;
        Ok(t)
    }

    /// The single-node tree `{1}`.
    pub fn single_node(k: u8) -> Self {
        KBranchSemipath::new(k, &[]).expect("single node tree is valid")
    }

    fn validate(&self) -> Result<(), GraphError> {
        let fail = |msg: String| Err(GraphError::InvalidTree(msg));
        for el in &self.domain {
            if !el.starts_with('1') {
                return fail(format!("element {el} does not start with 1"));
            }
            let mut digits = Vec::new();
            for ch in el.chars() {
                match ch.to_digit(10) {
                    Some(d) if d >= 1 && d <= self.k as u32 => digits.push(d),
                    _ => return fail(format!("element {el} has digits outside 1..={}", self.k)),
                }
            }
            // Condition 1: digits never decrease along an element.
            if digits.windows(2).any(|w| w[0] > w[1]) {
                return fail(format!("element {el} violates digit monotonicity"));
            }
            // Prefix closure.
            if el.len() > 1 && !self.domain.contains(&el[..el.len() - 1]) {
                return fail(format!("domain is not prefix closed at {el}"));
            }
        }
        for el in &self.domain {
            let children: Vec<&Element> = self
                .domain
                .iter()
                .filter(|c| c.len() == el.len() + 1 && c.starts_with(el.as_str()))
                .collect();
            // Condition 2: a node with any proper descendant has its
            // class-continuing child.
            if !children.is_empty() {
                let class_child = format!("{el}{}", class_of(el));
                if !self.domain.contains(&class_child) {
                    return fail(format!("{el} has descendants but no child {class_child}"));
                }
            }
            // Every non-leaf has exactly one edge to each child; leaves none.
            let edge_children: BTreeSet<&Element> = self
                .edges
                .get(el)
                .map(|m| m.keys().collect())
                .unwrap_or_default();
            let child_set: BTreeSet<&Element> = children.iter().copied().collect();
            if edge_children != child_set {
                return fail(format!("edges out of {el} do not match its children"));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn domain(&self) -> impl Iterator<Item = &Element> {
        self.domain.iter()
    }

    pub fn contains(&self, el: &str) -> bool {
        self.domain.contains(el)
    }

    pub fn edge_count(&self) -> usize {
        self.domain.len() - 1
    }

    pub fn edge_label(&self, parent: &str, child: &str) -> Option<&TreeLabel> {
        self.edges.get(parent).and_then(|m| m.get(child))
    }

    /// Children of an element in ascending digit order.
    pub fn children(&self, el: &str) -> Vec<&Element> {
        self.edges
            .get(el)
            .map(|m| m.keys().collect())
            .unwrap_or_default()
    }

    pub fn edge_list(&self) -> Vec<(Element, Element, TreeLabel)> {
        self.edges
            .iter()
            .flat_map(|(p, m)| {
                m.iter()
                    .map(move |(c, l)| (p.clone(), c.clone(), l.clone()))
            })
            .collect()
    }

    /// The graph database this tree describes. Marker labels are mapped to
    /// ordinary forward edges labeled `S`/`E` only if present; trees fed to
    /// evaluation should not contain markers.
    pub fn to_graph(&self) -> GraphDb {
        let mut g = GraphDb::new();
        for el in &self.domain {
            g.add_node(el.clone());
        }
        for (p, m) in &self.edges {
            for (c, label) in m {
                match label {
                    TreeLabel::Sym(sym) => {
                        if sym.is_inverse() {
                            g.add_edge(c.clone(), sym.base(), p.clone()).unwrap();
                        } else {
                            g.add_edge(p.clone(), sym.base(), c.clone()).unwrap();
                        }
                    }
                    // Marker edges only arise in expanded trees, which are
                    // never evaluated as graphs; keep them forward.
                    TreeLabel::MarkS => {
                        g.add_node(c.clone());
                    }
                    TreeLabel::MarkE => {
                        g.add_node(c.clone());
                    }
                }
            }
        }
        g
    }

    pub fn to_json(&self) -> String {
        let edges = self
            .edge_list()
            .into_iter()
            .map(|(p, c, l)| EdgeJson {
                parent: p,
                child: c,
                label: l.to_string(),
            })
            .collect();
        serde_json::to_string(&TreeJson { k: self.k, edges }).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let tj: TreeJson = serde_json::from_str(text)
            .map_err(|e| GraphError::InvalidTree(format!("bad JSON: {e}")))?;
        let mut edges = Vec::new();
        for e in tj.edges {
            let label = match e.label.as_str() {
                "S" => TreeLabel::MarkS,
                "E" => TreeLabel::MarkE,
                other => {
                    let sym = if let Some(base) = other.strip_suffix("^-") {
                        Symbol::inverse(base)
                    } else {
                        Symbol::forward(other)
                    }
                    .map_err(|err| GraphError::InvalidTree(format!("bad label: {err}")))?;
                    TreeLabel::Sym(sym)
                }
            };
            edges.push((e.parent, e.child, label));
        }
        KBranchSemipath::new(tj.k, &edges)
    }

    /// The `trans` encoding: `% trans(1) &`, where a leaf of class `i`
    /// emits `(i,$,i)` and a non-leaf emits its non-class children in
    /// ascending order followed by the class-continuing child, each
    /// prefixed by its edge token.
    pub fn trans(&self) -> EncodedWord {
        let mut tokens = Vec::new();
        self.trans_node("1", &mut tokens);
        EncodedWord {
            k: self.k,
            tokens,
        }
    }

    fn trans_node(&self, el: &str, out: &mut Vec<GammaToken>) {
        let class = class_of(el);
        let children = self.children(el);
        if children.is_empty() {
            out.push(GammaToken {
                from: class,
                mid: GammaMid::Dollar,
                to: class,
            });
            return;
        }
        let class_child = format!("{el}{class}");
        let mut ordered: Vec<&Element> = children
            .iter()
            .copied()
            .filter(|c| **c != class_child)
            .collect();
        ordered.push(&class_child);
        for child in ordered {
            let label = self.edge_label(el, child).expect("edge exists").clone();
            out.push(GammaToken {
                from: class,
                mid: match label {
                    TreeLabel::Sym(s) => GammaMid::Sym(s),
                    TreeLabel::MarkS => GammaMid::MarkS,
                    TreeLabel::MarkE => GammaMid::MarkE,
                },
                to: class_of(child),
            });
            self.trans_node(child, out);
        }
    }

    /// 1-based position of the first token of `trans(node)` within the
    /// marked word (the `%` marker is index 1).
    pub fn pos(&self, node: &str) -> Result<usize, GraphError> {
        if !self.domain.contains(node) {
            return Err(GraphError::UnknownNode(node.to_string()));
        }
        let mut at = 2; // index of trans(1)'s first token
        let mut cursor = "1".to_string();
        // Walk down from the root, adding the sizes of earlier siblings.
        while cursor != node {
            let next_digit = node.as_bytes()[cursor.len()];
            let target = format!("{cursor}{}", next_digit as char);
            let class = class_of(&cursor);
            let class_child = format!("{cursor}{class}");
            let mut ordered: Vec<Element> = self
                .children(&cursor)
                .into_iter()
                .filter(|c| **c != class_child)
                .cloned()
                .collect();
            ordered.push(class_child);
            for child in ordered {
                at += 1; // the edge token into `child`
                if child == target {
                    break;
                }
                at += self.subtree_token_count(&child);
            }
            cursor = target;
        }
        Ok(at)
    }

    fn subtree_token_count(&self, el: &str) -> usize {
        let children = self.children(el);
        if children.is_empty() {
            return 1;
        }
        children
            .iter()
            .map(|c| 1 + self.subtree_token_count(c))
            .sum()
    }

    /// `T[u -> S, v -> E]`: gives `u` a single `S`-labeled class child that
    /// adopts its former children (renamed to stay prefix-closed), then the
    /// same for `v` with `E`. When `u == v` the `E` expansion applies to
    /// the freshly inserted `S` child.
    pub fn expand_markers(&self, u: &str, v: &str) -> Result<KBranchSemipath, GraphError> {
        if !self.domain.contains(u) {
            return Err(GraphError::UnknownNode(u.to_string()));
        }
        if !self.domain.contains(v) {
            return Err(GraphError::UnknownNode(v.to_string()));
        }
        let (after_s, s_child) = self.splice(u, TreeLabel::MarkS);
        let v_new = if v == u {
            s_child
        } else {
            rename_after_splice(v, u)
        };
        let (done, _) = after_s.splice(&v_new, TreeLabel::MarkE);
        Ok(done)
    }

    /// Inserts a marker edge below `node`, returning the new tree and the
    /// inserted child's name. Parents are re-derived from the renamed child
    /// names, so the former children of `node` reattach to the new child.
    fn splice(&self, node: &str, label: TreeLabel) -> (KBranchSemipath, Element) {
        let class = class_of(node);
        let new_child = format!("{node}{class}");
        let mut edge_list = Vec::new();
        for (_, c, l) in self.edge_list() {
            let c2 = rename_after_splice(&c, node);
            let parent = c2[..c2.len() - 1].to_string();
            edge_list.push((parent, c2, l));
        }
        edge_list.push((node.to_string(), new_child.clone(), label));
        let t = KBranchSemipath::new(self.k, &edge_list)
            .expect("marker splice preserves k-branch invariants");
        (t, new_child)
    }
}

/// After splicing a child under `at`, every proper descendant of `at`
/// gains the class digit of `at` right after it.
fn rename_after_splice(el: &str, at: &str) -> Element {
    if el.len() > at.len() && el.starts_with(at) {
        format!("{}{}{}", at, class_of(at), &el[at.len()..])
    } else {
        el.to_string()
    }
}

/// The class of a domain element: its final digit.
pub fn class_of(el: &str) -> u8 {
    el.as_bytes()[el.len() - 1] - b'0'
}

/// Middle component of an encoding token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GammaMid {
    Sym(Symbol),
    Dollar,
    MarkS,
    MarkE,
}

impl fmt::Display for GammaMid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaMid::Sym(s) => write!(f, "{s}"),
            GammaMid::Dollar => write!(f, "$"),
            GammaMid::MarkS => write!(f, "S"),
            GammaMid::MarkE => write!(f, "E"),
        }
    }
}

/// One token of the tree encoding alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaToken {
    pub from: u8,
    pub mid: GammaMid,
    pub to: u8,
}

impl fmt::Display for GammaToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.from, self.mid, self.to)
    }
}

/// An encoded k-branch semipath: the tokens between `%` and `&`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedWord {
    pub k: u8,
    pub tokens: Vec<GammaToken>,
}

impl fmt::Display for EncodedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "%")?;
        for t in &self.tokens {
            write!(f, "{t}")?;
        }
        write!(f, "&")
    }
}

/// Reconstructs the tree whose `trans` encoding is `w`, if any.
///
/// This is a structural recursive-descent inverse of `trans`, independent
/// of the automaton-based encoding validator.
pub fn decode(w: &EncodedWord) -> Option<KBranchSemipath> {
    let mut edges: Vec<(Element, Element, TreeLabel)> = Vec::new();
    let mut at = 0usize;
    decode_node(w, "1", &mut at, &mut edges)?;
    if at != w.tokens.len() {
        return None;
    }
    KBranchSemipath::new(w.k, &edges).ok()
}

fn decode_node(
    w: &EncodedWord,
    el: &str,
    at: &mut usize,
    edges: &mut Vec<(Element, Element, TreeLabel)>,
) -> Option<()> {
    let class = class_of(el);
    let first = w.tokens.get(*at)?;
    if first.mid == GammaMid::Dollar {
        // Leaf terminator.
        if first.from != class || first.to != class {
            return None;
        }
        *at += 1;
        return Some(());
    }
    // Non-leaf: non-class children ascending, then the class child last.
    let mut last_digit: Option<u8> = None;
    loop {
        let tok = w.tokens.get(*at)?.clone();
        let label = match &tok.mid {
            GammaMid::Sym(s) => TreeLabel::Sym(s.clone()),
            GammaMid::MarkS => TreeLabel::MarkS,
            GammaMid::MarkE => TreeLabel::MarkE,
            GammaMid::Dollar => return None,
        };
        if tok.from != class || tok.to < class {
            return None;
        }
        let digit = tok.to;
        let is_tail = digit == class;
        if !is_tail {
            // Ascending order among non-class children.
            if let Some(prev) = last_digit {
                if digit <= prev {
                    return None;
                }
            }
            last_digit = Some(digit);
        }
        *at += 1;
        let child = format!("{el}{digit}");
        edges.push((el.to_string(), child.clone(), label));
        decode_node(w, &child, at, edges)?;
        if is_tail {
            return Some(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fwd(s: &str) -> TreeLabel {
        TreeLabel::Sym(Symbol::forward(s).unwrap())
    }

    fn tree(k: u8, edges: &[(&str, &str, &str)]) -> KBranchSemipath {
        let list: Vec<_> = edges
            .iter()
            .map(|(p, c, l)| {
                let label = if let Some(b) = l.strip_suffix("^-") {
                    TreeLabel::Sym(Symbol::inverse(b).unwrap())
                } else {
                    fwd(l)
                };
                (p.to_string(), c.to_string(), label)
            })
            .collect();
        KBranchSemipath::new(k, &list).unwrap()
    }

    #[test]
    fn tsv_roundtrip_and_collapse() {
        let g = GraphDb::from_tsv("1\ta\t2\n2\tb\t3").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);

        assert_eq!(GraphDb::from_tsv("").unwrap(), GraphDb::new());

        let dup = GraphDb::from_tsv("1\ta\t2\n1\ta\t2").unwrap();
        assert_eq!(dup.edge_count(), 1);
    }

    #[test]
    fn tsv_errors() {
        match GraphDb::from_tsv("1\ta") {
            Err(GraphError::Malformed { line }) => assert_eq!(line, 1),
            other => panic!("expected malformed error, got {other:?}"),
        }
        assert!(matches!(
            GraphDb::from_tsv("1\ta%b\t2"),
            Err(GraphError::BadLabel { line: 1, .. })
        ));
    }

    #[test]
    fn resembles_simple_cases() {
        let g = GraphDb::from_tsv("1\ta\t2").unwrap();
        let sp = resembles_semipath(&g).unwrap();
        assert_eq!(sp.nodes, vec!["1", "2"]);
        assert_eq!(sp.letters, vec![Symbol::forward("a").unwrap()]);

        // Reversed edge read from the smaller endpoint is an inverse letter.
        let g = GraphDb::from_tsv("2\ta\t1").unwrap();
        let sp = resembles_semipath(&g).unwrap();
        assert_eq!(sp.nodes, vec!["1", "2"]);
        assert_eq!(sp.letters, vec![Symbol::inverse("a").unwrap()]);
    }

    #[test]
    fn resembles_three_nodes_with_reversal() {
        // Checked against the definition by enumerating all orderings of
        // {1,2,3}: only 1,2,3 (and its mirror) witness these edges.
        let g = GraphDb::from_tsv("1\ta\t2\n3\ta\t2").unwrap();
        let sp = resembles_semipath(&g).unwrap();
        assert_eq!(sp.nodes, vec!["1", "2", "3"]);
        assert_eq!(
            sp.letters,
            vec![Symbol::forward("a").unwrap(), Symbol::inverse("a").unwrap()]
        );
        assert_eq!(sp.to_graph(), g);
    }

    #[test]
    fn resembles_rejects_non_paths() {
        // A triangle.
        let g = GraphDb::from_tsv("1\ta\t2\n2\ta\t3\n3\ta\t1").unwrap();
        assert!(resembles_semipath(&g).is_none());
        // A star.
        let g = GraphDb::from_tsv("c\ta\tx\nc\ta\ty\nc\ta\tz").unwrap();
        assert!(resembles_semipath(&g).is_none());
        // Antiparallel pair.
        let g = GraphDb::from_tsv("1\ta\t2\n2\tb\t1").unwrap();
        assert!(resembles_semipath(&g).is_none());
    }

    #[test]
    fn trans_linear_chain() {
        let t = tree(1, &[("1", "11", "a"), ("11", "111", "b")]);
        assert_eq!(t.trans().to_string(), "%(1,a,1)(1,b,1)(1,$,1)&");
    }

    #[test]
    fn trans_branching_order() {
        let t = tree(2, &[("1", "11", "a"), ("1", "12", "b")]);
        assert_eq!(t.trans().to_string(), "%(1,b,2)(2,$,2)(1,a,1)(1,$,1)&");
    }

    #[test]
    fn trans_single_node() {
        let t = KBranchSemipath::single_node(1);
        assert_eq!(t.trans().to_string(), "%(1,$,1)&");
    }

    #[test]
    fn token_count_is_edges_plus_leaves() {
        let t = tree(2, &[("1", "11", "a"), ("1", "12", "b"), ("12", "122", "a")]);
        let leaves = t
            .domain()
            .filter(|el| t.children(el).is_empty())
            .count();
        assert_eq!(t.trans().tokens.len(), t.edge_count() + leaves);
    }

    #[test]
    fn pos_examples() {
        let lin = tree(1, &[("1", "11", "a"), ("11", "111", "b")]);
        assert_eq!(lin.pos("1").unwrap(), 2);
        assert_eq!(lin.pos("111").unwrap(), 4);

        let br = tree(2, &[("1", "11", "a"), ("1", "12", "b")]);
        assert_eq!(br.pos("12").unwrap(), 3);
        assert!(br.pos("21").is_err());
    }

    #[test]
    fn decode_inverts_trans() {
        let t = tree(2, &[("1", "11", "a"), ("1", "12", "b"), ("12", "122", "a^-")]);
        assert_eq!(decode(&t.trans()).unwrap(), t);
    }

    #[test]
    fn decode_rejects_missing_terminator() {
        // %(1,a,2)(1,$,1)& lacks the (2,$,2) terminator for the 2-branch.
        let w = EncodedWord {
            k: 2,
            tokens: vec![
                GammaToken {
                    from: 1,
                    mid: GammaMid::Sym(Symbol::forward("a").unwrap()),
                    to: 2,
                },
                GammaToken {
                    from: 1,
                    mid: GammaMid::Dollar,
                    to: 1,
                },
            ],
        };
        assert!(decode(&w).is_none());
    }

    #[test]
    fn expand_markers_linear() {
        let t = tree(1, &[("1", "11", "a")]);
        let ex = t.expand_markers("1", "11").unwrap();
        assert_eq!(
            ex.trans().to_string(),
            "%(1,S,1)(1,a,1)(1,E,1)(1,$,1)&"
        );
    }

    #[test]
    fn expand_markers_same_node() {
        let t = KBranchSemipath::single_node(1);
        let ex = t.expand_markers("1", "1").unwrap();
        assert_eq!(ex.trans().to_string(), "%(1,S,1)(1,E,1)(1,$,1)&");
        assert_eq!(ex.edge_count(), 2);
    }

    #[test]
    fn invalid_trees_rejected() {
        // Digit decreasing inside an element.
        assert!(KBranchSemipath::new(
            2,
            &[
                ("1".into(), "12".into(), fwd("a")),
                ("12".into(), "121".into(), fwd("b")),
            ]
        )
        .is_err());
        // Missing class-continuing child (condition 2).
        assert!(KBranchSemipath::new(
            2,
            &[("1".into(), "12".into(), fwd("a"))]
        )
        .is_err());
        assert!(KBranchSemipath::new(
            2,
            &[
                ("1".into(), "11".into(), fwd("a")),
                ("1".into(), "12".into(), fwd("b")),
            ]
        )
        .is_ok());
    }
}
