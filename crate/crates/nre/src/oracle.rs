//! Brute-force ground truth: a direct transcription of the NRE semantics
//! plus exhaustive semipath and k-branch enumeration.
//!
//! Everything here trades speed for obvious correctness. The main
//! pipelines never call into this module except to double-check
//! counterexamples before reporting them.

use std::collections::BTreeSet;

use crate::eval::NodeRelation;
use crate::graph::{GraphDb, KBranchSemipath, NodeId, Semipath, TreeLabel};
use crate::par;
use crate::syntax::{Nre, Symbol};

/// Bounds for exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct EnumSpec {
    /// Base alphabet (forward labels).
    pub labels: Vec<String>,
    /// Maximum letter count (semipaths) or edge count (trees).
    pub max_len: usize,
    /// Branching bound for tree enumeration.
    pub k: u8,
    /// Whether inverse letters appear on edges.
    pub include_inverses: bool,
}

impl EnumSpec {
    pub fn new(labels: &[&str], max_len: usize, k: u8, include_inverses: bool) -> Self {
        EnumSpec {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            max_len,
            k,
            include_inverses,
        }
    }

    fn letters(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        for l in &self.labels {
            out.push(Symbol::forward(l).expect("valid label"));
            if self.include_inverses {
                out.push(Symbol::inverse(l).expect("valid label"));
            }
        }
        out.sort();
        out
    }
}

/// Literal inductive semantics, star as iterated union to fixpoint.
pub fn naive_eval(e: &Nre, g: &GraphDb) -> NodeRelation {
    match e {
        Nre::Epsilon => NodeRelation::from_pairs(g.nodes().map(|n| (n.clone(), n.clone()))),
        Nre::Atom(sym) => {
            if sym.is_inverse() {
                NodeRelation::from_pairs(
                    g.edges()
                        .filter(|(_, l, _)| *l == sym.base())
                        .map(|(s, _, t)| (t.clone(), s.clone())),
                )
            } else {
                NodeRelation::from_pairs(
                    g.edges()
                        .filter(|(_, l, _)| *l == sym.base())
                        .map(|(s, _, t)| (s.clone(), t.clone())),
                )
            }
        }
        Nre::Concat(a, b) => naive_eval(a, g).compose(&naive_eval(b, g)),
        Nre::Alt(a, b) => naive_eval(a, g).union(&naive_eval(b, g)),
        Nre::Star(inner) => {
            let step = naive_eval(inner, g);
            let mut acc = NodeRelation::from_pairs(g.nodes().map(|n| (n.clone(), n.clone())));
            loop {
                let next = acc.union(&acc.compose(&step));
                if next == acc {
                    return acc;
                }
                acc = next;
            }
        }
        Nre::Nest(inner) => {
            let rel = naive_eval(inner, g);
            let sources: BTreeSet<NodeId> = rel.iter().map(|(u, _)| u.clone()).collect();
            NodeRelation::from_pairs(sources.into_iter().map(|u| (u.clone(), u)))
        }
    }
}

/// All simple semipaths with canonical node ids, lengths `0..=max_len`,
/// in deterministic order (by length, then lexicographically by letters).
pub fn enum_semipaths(spec: &EnumSpec) -> Vec<Semipath> {
    let letters = spec.letters();
    let mut out = vec![Semipath::canonical(vec![])];
    let mut layer: Vec<Vec<Symbol>> = vec![vec![]];
    for _ in 1..=spec.max_len {
        let mut next = Vec::new();
        for word in &layer {
            for l in &letters {
                let mut w = word.clone();
                w.push(l.clone());
                next.push(w);
            }
        }
        out.extend(next.iter().cloned().map(Semipath::canonical));
        layer = next;
    }
    out
}

/// All valid k-branch semipaths with up to `max_len` edges over the
/// given letters, single-node tree included, in deterministic order.
pub fn enum_kbranch(spec: &EnumSpec) -> Vec<KBranchSemipath> {
    let letters = spec.letters();
    let mut shapes: Vec<Vec<String>> = Vec::new();
    grow_domains(&mut vec!["1".to_string()], spec.k, spec.max_len, &mut shapes);
    shapes.sort_by_key(|d| (d.len(), d.clone()));
    shapes.dedup();

    let mut out = Vec::new();
    for domain in shapes {
        // Edges are (parent, child) pairs implied by the domain; label each
        // edge in every possible way.
        let mut edges: Vec<(String, String)> = Vec::new();
        for el in &domain {
            if el.len() > 1 {
                edges.push((el[..el.len() - 1].to_string(), el.clone()));
            }
        }
        edges.sort();
        let m = edges.len();
        let base = letters.len();
        if base == 0 && m > 0 {
            continue;
        }
        let combos = if m == 0 { 1 } else { base.pow(m as u32) };
        for idx in 0..combos {
            let mut labeled = Vec::new();
            let mut rest = idx;
            for (p, c) in &edges {
                let sym = letters[rest % base].clone();
                rest /= base;
                labeled.push((p.clone(), c.clone(), TreeLabel::Sym(sym)));
            }
            match KBranchSemipath::new(spec.k, &labeled) {
                Ok(t) => out.push(t),
                Err(e) => unreachable!("enumerated domain must be valid: {e}"),
            }
        }
    }
    out
}

/// Recursively extends domains by adding children to the frontier element
/// in all admissible ways.
fn grow_domains(current: &mut Vec<String>, k: u8, budget: usize, out: &mut Vec<Vec<String>>) {
    // Emit the current domain if it satisfies condition 2 everywhere.
    if domain_is_closed(current) {
        out.push(current.clone());
    }
    if current.len() > budget {
        return;
    }
    // Try adding one more element: any child of an existing element whose
    // digits stay monotone and which is not already present.
    let existing: BTreeSet<String> = current.iter().cloned().collect();
    let mut candidates = BTreeSet::new();
    for el in current.iter() {
        let class = el.as_bytes()[el.len() - 1] - b'0';
        for d in class..=k {
            let child = format!("{el}{d}");
            if !existing.contains(&child) {
                candidates.insert(child);
            }
        }
    }
    for cand in candidates {
        // Keep a canonical growth order to avoid duplicates: only extend
        // with elements lexicographically greater than the last addition.
        if let Some(last) = current.last() {
            if cand < *last && !cand.starts_with(last.as_str()) {
                continue;
            }
        }
        current.push(cand);
        grow_domains(current, k, budget, out);
        current.pop();
    }
}

fn domain_is_closed(domain: &[String]) -> bool {
    let set: BTreeSet<&String> = domain.iter().collect();
    for el in domain {
        let has_desc = domain
            .iter()
            .any(|d| d.len() > el.len() && d.starts_with(el.as_str()));
        if has_desc {
            let class = el.as_bytes()[el.len() - 1] - b'0';
            let class_child = format!("{el}{}", (b'0' + class) as char);
            if !set.contains(&class_child) {
                return false;
            }
        }
    }
    true
}

/// Which graph family a containment question ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Semipath,
    KBranch,
}

/// The oracle's verdict: `None` means no violation up to the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleWitness {
    pub graph: GraphDb,
    pub pair: (NodeId, NodeId),
}

/// Enumerates graphs per `mode` and returns the first pair present in
/// `⟦e1⟧` but not `⟦e2⟧`, or `None` if every enumerated graph agrees.
pub fn oracle_contains(
    e1: &Nre,
    e2: &Nre,
    spec: &EnumSpec,
    mode: OracleMode,
) -> Option<OracleWitness> {
    let graphs: Vec<GraphDb> = match mode {
        OracleMode::Semipath => enum_semipaths(spec)
            .into_iter()
            .map(|s| s.to_graph())
            .collect(),
        OracleMode::KBranch => enum_kbranch(spec)
            .into_iter()
            .map(|t| t.to_graph())
            .collect(),
    };
    par::find_map_first(&graphs, |g| check_violation(e1, e2, g))
}

/// Sequential variant, kept public for differential benchmarks.
pub fn oracle_contains_seq(
    e1: &Nre,
    e2: &Nre,
    spec: &EnumSpec,
    mode: OracleMode,
) -> Option<OracleWitness> {
    let graphs: Vec<GraphDb> = match mode {
        OracleMode::Semipath => enum_semipaths(spec)
            .into_iter()
            .map(|s| s.to_graph())
            .collect(),
        OracleMode::KBranch => enum_kbranch(spec)
            .into_iter()
            .map(|t| t.to_graph())
            .collect(),
    };
    graphs.iter().find_map(|g| check_violation(e1, e2, g))
}

fn check_violation(e1: &Nre, e2: &Nre, g: &GraphDb) -> Option<OracleWitness> {
    let r1 = naive_eval(e1, g);
    let r2 = naive_eval(e2, g);
    for (u, v) in r1.iter() {
        if !r2.contains(u, v) {
            // Re-verify the violating pair before handing it out.
            debug_assert!(naive_eval(e1, g).contains(u, v));
            return Some(OracleWitness {
                graph: g.clone(),
                pair: (u.clone(), v.clone()),
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn spec2(max_len: usize) -> EnumSpec {
        EnumSpec::new(&["a", "b"], max_len, 1, true)
    }

    #[test]
    fn semipath_counts() {
        // 1 empty + 4 length-1 + 16 length-2. The empty semipath is
        // included so that single-node counterexamples are reachable.
        assert_eq!(enum_semipaths(&spec2(2)).len(), 21);
        assert_eq!(enum_semipaths(&spec2(0)).len(), 1);
    }

    #[test]
    fn every_semipath_resembles_itself() {
        for sp in enum_semipaths(&spec2(2)) {
            let g = sp.to_graph();
            assert!(
                crate::graph::resembles_semipath(&g).is_some(),
                "{:?} should resemble a semipath",
                sp.letters
            );
        }
    }

    #[test]
    fn kbranch_k1_matches_semipath_counts() {
        let spec = EnumSpec::new(&["a", "b"], 3, 1, true);
        let trees = enum_kbranch(&spec);
        let paths = enum_semipaths(&spec);
        assert_eq!(trees.len(), paths.len());
    }

    #[test]
    fn kbranch_two_edge_domains() {
        let spec = EnumSpec::new(&["a"], 2, 2, false);
        let trees = enum_kbranch(&spec);
        let has = |dom: &[&str]| {
            trees.iter().any(|t| {
                let d: Vec<&str> = t.domain().map(|s| s.as_str()).collect();
                d == dom
            })
        };
        assert!(has(&["1", "11", "111"]));
        assert!(has(&["1", "11", "12"]));
    }

    #[test]
    fn kbranch_roundtrip_decode() {
        let spec = EnumSpec::new(&["a", "b"], 3, 2, true);
        for t in enum_kbranch(&spec) {
            assert_eq!(crate::graph::decode(&t.trans()).as_ref(), Some(&t));
        }
    }

    #[test]
    fn star_on_cycle() {
        let g = GraphDb::from_tsv("1\ta\t2\n2\ta\t3\n3\ta\t1").unwrap();
        let rel = naive_eval(&parse("a*").unwrap(), &g);
        assert_eq!(rel.len(), 9);
    }

    #[test]
    fn nest_is_subidentity() {
        let g = GraphDb::from_tsv("1\ta\t2\n2\tb\t3\n3\ta\t1").unwrap();
        for e in ["[a]", "[a . b]", "[(a | b)*]", "[a^-]"] {
            let rel = naive_eval(&parse(e).unwrap(), &g);
            assert!(rel.iter().all(|(u, v)| u == v), "{e} must be sub-identity");
        }
    }

    #[test]
    fn oracle_basic_verdicts() {
        let spec = spec2(3);
        let a = parse("a").unwrap();
        let ab = parse("a | b").unwrap();
        assert!(oracle_contains(&a, &ab, &spec, OracleMode::Semipath).is_none());
        assert!(oracle_contains(&ab, &a, &spec, OracleMode::Semipath).is_some());
        assert!(oracle_contains(&a, &a, &spec, OracleMode::Semipath).is_none());

        // b is not contained in [a].b: the single-b semipath has no a-edge.
        let b = parse("b").unwrap();
        let nested = parse("[a] . b").unwrap();
        let w = oracle_contains(&b, &nested, &spec, OracleMode::Semipath).unwrap();
        assert_eq!(w.graph.edge_count(), 1);
    }
}
