//! Query corpora for the test suites and benchmarks: a fixed set of
//! containment pairs over `{a, b}`, and seeded random generators for
//! expressions, graphs and token noise.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::graph::GraphDb;
use crate::syntax::{parse, Nre, Symbol};

/// The fixed containment corpus: pairs `(lhs, rhs)` over `Σ' = {a, b}`,
/// sizes ≤ 8, nesting depth ≤ 2, mixing plain, inverse, starred and
/// nested shapes. Expected verdicts are never hardcoded; tests compare
/// the deciders against the brute-force oracle.
pub fn containment_pairs() -> Vec<(Nre, Nre)> {
    SP_PAIRS
        .iter()
        .map(|(l, r)| (parse(l).expect(l), parse(r).expect(r)))
        .collect()
}

const SP_PAIRS: &[(&str, &str)] = &[
    ("a", "a | b"),
    ("a | b", "a"),
    ("a", "a"),
    ("eps", "a*"),
    ("a*", "eps"),
    ("eps", "a"),
    ("a . b", "a . (b | a)"),
    ("a . (b | a)", "a . b"),
    ("a+", "a*"),
    ("a*", "a+"),
    ("a . a*", "a+"),
    ("(a | b)*", "a* . (b . a*)*"),
    ("a* . (b . a*)*", "(a | b)*"),
    ("a^-", "a^- | b"),
    ("a^- . a", "a^- . (a | b)"),
    ("a . a^-", "a . b"),
    ("[a]", "eps"),
    ("eps", "[a]"),
    ("[a] . b", "b"),
    ("b", "[a] . b"),
    ("[a . b]", "[a]"),
    ("[a]", "[a . b]"),
    ("[a | b]", "[a] | [b]"),
    ("[a] | [b]", "[a | b]"),
    ("[[a] . b]", "[b]"),
    ("[b]", "[[a] . b]"),
    ("a . [b]", "a"),
    ("a", "a . [b]"),
    ("[a^-] . b", "b"),
    ("b . [a^-]", "b"),
    ("(a . [b])*", "a*"),
    ("a*", "(a . [b])*"),
    ("[a] . [b]", "[b] . [a]"),
    ("a . b . a", "a . (b | eps) . a"),
    ("a . a", "a+"),
    ("b^- . b", "b^- . b | eps"),
];

/// Pairs exercised by the general (k-branch) decision; nesting depth ≤ 2
/// keeps `k ≤ 2`.
pub fn gen_containment_pairs() -> Vec<(Nre, Nre)> {
    GEN_PAIRS
        .iter()
        .map(|(l, r)| (parse(l).expect(l), parse(r).expect(r)))
        .collect()
}

const GEN_PAIRS: &[(&str, &str)] = &[
    ("a", "a | b"),
    ("a | b", "a"),
    ("a", "a"),
    ("eps", "[a]"),
    ("[a]", "eps"),
    ("[a . b]", "[a]"),
    ("[a]", "[a . b]"),
    ("[a] . b", "b"),
    ("b", "[a] . b"),
    ("a . [b]", "a"),
    ("a", "a . [b]"),
    ("[a | b]", "[a] | [b]"),
    ("[a] | [b]", "[a | b]"),
    ("[[a] . b]", "[b]"),
    ("[b]", "[[a] . b]"),
    ("[a^-]", "[a^- | b]"),
    ("a^- . [b]", "a^-"),
    ("[a] . [a]", "[a]"),
];

/// A deterministic random NRE over the given labels.
pub fn random_nre(rng: &mut ChaCha8Rng, labels: &[&str], max_size: usize, max_depth: usize) -> Nre {
    let size = rng.gen_range(1..=max_size);
    random_nre_sized(rng, labels, size, max_depth)
}

fn random_nre_sized(
    rng: &mut ChaCha8Rng,
    labels: &[&str],
    size: usize,
    depth_left: usize,
) -> Nre {
    if size <= 1 {
        return match rng.gen_range(0..6) {
            0 => Nre::Epsilon,
            _ => {
                let l = labels[rng.gen_range(0..labels.len())];
                let sym = if rng.gen_bool(0.3) {
                    Symbol::inverse(l).unwrap()
                } else {
                    Symbol::forward(l).unwrap()
                };
                Nre::Atom(sym)
            }
        };
    }
    let choices = if depth_left > 0 { 4 } else { 3 };
    match rng.gen_range(0..choices) {
        0 => {
            let left = rng.gen_range(1..size);
            let a = random_nre_sized(rng, labels, left, depth_left);
            let b = random_nre_sized(rng, labels, size - 1 - left.min(size - 1), depth_left);
            Nre::concat(a, b)
        }
        1 => {
            let left = rng.gen_range(1..size);
            let a = random_nre_sized(rng, labels, left, depth_left);
            let b = random_nre_sized(rng, labels, size - 1 - left.min(size - 1), depth_left);
            Nre::alt(a, b)
        }
        2 => Nre::star(random_nre_sized(rng, labels, size - 1, depth_left)),
        _ => Nre::nest(random_nre_sized(rng, labels, size - 1, depth_left - 1)),
    }
}

/// A deterministic random graph with up to `max_nodes` nodes and
/// `max_edges` edges over the labels.
pub fn random_graph(
    rng: &mut ChaCha8Rng,
    labels: &[&str],
    max_nodes: usize,
    max_edges: usize,
) -> GraphDb {
    let n = rng.gen_range(1..=max_nodes);
    let mut g = GraphDb::new();
    for i in 1..=n {
        g.add_node(format!("n{i}"));
    }
    let m = rng.gen_range(0..=max_edges);
    for _ in 0..m {
        let s = format!("n{}", rng.gen_range(1..=n));
        let t = format!("n{}", rng.gen_range(1..=n));
        let l = labels[rng.gen_range(0..labels.len())];
        g.add_edge(s, l, t).unwrap();
    }
    g
}

/// Seeded generator entry point used by tests and the corpus subcommand.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_meets_size_bounds() {
        let pairs = containment_pairs();
        assert!(pairs.len() >= 30);
        for (l, r) in &pairs {
            assert!(l.size() <= 8 && r.size() <= 8, "{l} vs {r}");
            assert!(l.nesting_depth() <= 2 && r.nesting_depth() <= 2);
        }
        let gen_pairs = gen_containment_pairs();
        assert!(gen_pairs.len() >= 15);
        for (l, r) in &gen_pairs {
            assert!(l.nesting_depth() <= 2 && r.nesting_depth() <= 2);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let mut r1 = rng(7);
        let mut r2 = rng(7);
        for _ in 0..20 {
            assert_eq!(
                random_nre(&mut r1, &["a", "b"], 8, 2),
                random_nre(&mut r2, &["a", "b"], 8, 2)
            );
        }
    }
}
