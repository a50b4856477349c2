//! Compilation of NREs into alternating two-way automata.
//!
//! The semipath compiler ([`compile_sp`]) works over plain letter words;
//! the general compiler ([`gen::compile_gen`]) works over tree-encoding
//! words and threads branch-skipping helper automata through its base
//! cases. Both share the inductive cases for alternation, concatenation,
//! star and nesting, the backward-scan wrapper, and the endpoint-marking
//! construction in [`mark`].
//!
//! Every step keeps exactly one *marked* final state: the state whose
//! visit marks where the match of the whole expression ends. Marking is
//! what lets concatenation and star splice sub-automata, and what the
//! `S`/`E` construction pins the matched segment's endpoints to.

pub mod gen;
pub mod mark;
pub mod validators;

use std::collections::BTreeSet;

use crate::automata::{A2fa, StateId, Token};
use crate::syntax::{Nre, Symbol};

pub use mark::{mark_se, mark_se_gen};

/// A compiled automaton plus construction bookkeeping: the single marked
/// state and the pre-wrapper initial state the marking construction pins
/// the tacit start to.
#[derive(Debug, Clone)]
pub struct MarkedA2fa {
    pub automaton: A2fa,
    pub marked: StateId,
    pub inner_start: StateId,
}

/// The query alphabet for a containment problem: all base labels of both
/// expressions, with a fixed fallback so automata stay non-degenerate.
pub fn query_labels(e1: &Nre, e2: &Nre) -> Vec<String> {
    let mut labels = e1.base_labels();
    labels.extend(e2.base_labels());
    labels.sort();
    labels.dedup();
    if labels.is_empty() {
        labels.push("a".to_string());
    }
    labels
}

/// The closed letter set: forward and inverse symbols over the labels.
pub fn letter_set(labels: &[String]) -> Vec<Symbol> {
    let mut out = Vec::new();
    for l in labels {
        out.push(Symbol::forward(l).expect("valid label"));
        out.push(Symbol::inverse(l).expect("valid label"));
    }
    out.sort();
    out
}

pub(crate) struct Frag {
    pub(crate) start: StateId,
    pub(crate) marked: StateId,
}

/// Compiles an NRE for evaluation over semipath words, wrapper included:
/// a fresh initial state scans backward from the end marker to guess the
/// tacit start, and every final state runs forward to the end.
pub fn compile_sp(e: &Nre, labels: &[String]) -> MarkedA2fa {
    let letters = letter_set(labels);
    let alphabet: Vec<Token> = letters.iter().cloned().map(Token::Letter).collect();
    let mut aut = A2fa::new(alphabet);
    let frag = build_sp(e, &letters, &mut aut);
    finish_wrapper(aut, frag)
}

pub(crate) fn finish_wrapper(mut aut: A2fa, frag: Frag) -> MarkedA2fa {
    // Backward-scan wrapper: from the end marker, either start here or
    // keep scanning left.
    let q0w = aut.fresh_state("q0'");
    let scan: Vec<Token> = aut
        .base_alphabet()
        .cloned()
        .chain([Token::Amp])
        .collect();
    for t in &scan {
        aut.add(q0w, t.clone(), frag.start, 0);
        aut.add(q0w, t.clone(), q0w, -1);
    }
    // Every final state runs forward to the end of the word.
    let finals: BTreeSet<StateId> = aut.finals.clone();
    for f in finals {
        for t in &scan {
            aut.add(f, t.clone(), f, 1);
        }
    }
    aut.initial = q0w;
    aut.marked = Some(frag.marked);
    MarkedA2fa {
        automaton: aut,
        marked: frag.marked,
        inner_start: frag.start,
    }
}

fn build_sp(e: &Nre, letters: &[Symbol], aut: &mut A2fa) -> Frag {
    match e {
        Nre::Epsilon => {
            let q0 = aut.fresh_state("q0");
            let qf = aut.fresh_state("qf");
            aut.add_eps(q0, qf);
            aut.finals.insert(qf);
            Frag {
                start: q0,
                marked: qf,
            }
        }
        Nre::Atom(x) => {
            let q0 = aut.fresh_state("q0");
            let qf = aut.fresh_state("qf");
            let qr = aut.fresh_state("qr");
            for b in letters {
                if b == x {
                    aut.add(q0, Token::Letter(b.clone()), qf, 1);
                }
                aut.add(q0, Token::Letter(b.clone()), qr, -1);
            }
            // The tacit start may be the last node, whose position is the
            // end marker; the backward option must fire there too.
            aut.add(q0, Token::Amp, qr, -1);
            aut.add(qr, Token::Letter(x.invert()), qf, 0);
            aut.finals.insert(qf);
            Frag {
                start: q0,
                marked: qf,
            }
        }
        Nre::Alt(a, b) => {
            let fa = build_sp(a, letters, aut);
            let fb = build_sp(b, letters, aut);
            combine_alt(aut, fa, fb)
        }
        Nre::Concat(a, b) => {
            let fa = build_sp(a, letters, aut);
            let fb = build_sp(b, letters, aut);
            combine_concat(aut, fa, fb)
        }
        Nre::Star(inner) => {
            let f = build_sp(inner, letters, aut);
            combine_star(aut, f)
        }
        Nre::Nest(inner) => {
            let f = build_sp(inner, letters, aut);
            combine_nest(aut, f)
        }
    }
}

pub(crate) fn combine_alt(aut: &mut A2fa, fa: Frag, fb: Frag) -> Frag {
    let q0 = aut.fresh_state("q0");
    let qf = aut.fresh_state("qf");
    aut.add_eps(q0, fa.start);
    aut.add_eps(q0, fb.start);
    aut.add_eps(fa.marked, qf);
    aut.add_eps(fb.marked, qf);
    aut.finals.remove(&fa.marked);
    aut.finals.remove(&fb.marked);
    aut.finals.insert(qf);
    Frag {
        start: q0,
        marked: qf,
    }
}

pub(crate) fn combine_concat(aut: &mut A2fa, fa: Frag, fb: Frag) -> Frag {
    let q0 = aut.fresh_state("q0");
    let qf = aut.fresh_state("qf");
    aut.add_eps(q0, fa.start);
    aut.add_eps(fa.marked, fb.start);
    aut.add_eps(fb.marked, qf);
    aut.finals.remove(&fa.marked);
    aut.finals.remove(&fb.marked);
    aut.finals.insert(qf);
    Frag {
        start: q0,
        marked: qf,
    }
}

pub(crate) fn combine_star(aut: &mut A2fa, f: Frag) -> Frag {
    let q0 = aut.fresh_state("q0");
    let qf = aut.fresh_state("qf");
    aut.add_eps(q0, f.start);
    aut.add_eps(f.start, qf);
    aut.add_eps(f.marked, qf);
    aut.add_eps(f.marked, f.start);
    aut.finals.remove(&f.marked);
    aut.finals.insert(qf);
    Frag {
        start: q0,
        marked: qf,
    }
}

/// The nesting test forks universally: one branch continues the main
/// computation in place, the other runs the sub-automaton as an
/// existence check, whose former marked state then free-runs to the end
/// of the word and stays final.
pub(crate) fn combine_nest(aut: &mut A2fa, f: Frag) -> Frag {
    let q0 = aut.fresh_state("q0");
    let p = aut.fresh_state("p");
    let qf = aut.fresh_state("qf");
    aut.universal.insert(p);
    aut.add_eps(q0, p);
    aut.add_eps(p, qf);
    aut.add_eps(p, f.start);
    let forward: Vec<Token> = aut
        .base_alphabet()
        .cloned()
        .chain([Token::Amp])
        .collect();
    for t in forward {
        aut.add(f.marked, t, f.marked, 1);
    }
    // The sub-automaton's marked state stays final here.
    aut.finals.insert(qf);
    Frag {
        start: q0,
        marked: qf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn letters_ab() -> Vec<String> {
        vec!["a".to_string(), "b".to_string()]
    }

    fn word(s: &str) -> Vec<Token> {
        s.split_whitespace()
            .map(|part| {
                let sym = if let Some(base) = part.strip_suffix("^-") {
                    Symbol::inverse(base).unwrap()
                } else {
                    Symbol::forward(part).unwrap()
                };
                Token::Letter(sym)
            })
            .collect()
    }

    #[test]
    fn atom_accepts_its_letter_anywhere() {
        let m = compile_sp(&parse("a").unwrap(), &letters_ab());
        let a = &m.automaton;
        assert!(a.accepts(&word("a")));
        assert!(!a.accepts(&[]));
        // Wrapper scans back and matches at position 2.
        assert!(a.accepts(&word("b a")));
        assert!(a.accepts(&word("a b")));
        assert!(!a.accepts(&word("b")));
        // A reversed edge also witnesses `a`.
        assert!(a.accepts(&word("a^-")));
        assert!(!a.accepts(&word("b^-")));
    }

    #[test]
    fn concatenation_and_star() {
        let m = compile_sp(&parse("a . b").unwrap(), &letters_ab());
        assert!(m.automaton.accepts(&word("a b")));
        assert!(!m.automaton.accepts(&word("a a")));
        assert!(m.automaton.accepts(&word("b a b")));

        let m = compile_sp(&parse("a*").unwrap(), &letters_ab());
        assert!(m.automaton.accepts(&[]));
        assert!(m.automaton.accepts(&word("a a a")));
        // Star matches the empty segment anywhere.
        assert!(m.automaton.accepts(&word("b")));
    }

    #[test]
    fn nesting_checks_a_branch() {
        let m = compile_sp(&parse("[a]").unwrap(), &letters_ab());
        assert!(m.automaton.accepts(&word("a")));
        assert!(!m.automaton.accepts(&word("b")));
        // [a] holds at the source of the reversed edge as well.
        assert!(m.automaton.accepts(&word("a^-")));
    }

    #[test]
    fn single_mark_invariant() {
        for q in ["a", "a . b", "(a | b)*", "[a . [b]]", "a^- . (b | eps)"] {
            let m = compile_sp(&parse(q).unwrap(), &letters_ab());
            assert_eq!(m.automaton.marked, Some(m.marked));
            assert!(m.automaton.finals.contains(&m.marked), "{q}");
        }
    }
}
