//! The general compiler: NREs into automata over tree-encoding words.
//!
//! The inductive cases are shared with the semipath compiler; only the
//! base cases differ. Matching an edge inside an encoded tree means the
//! head must first skip over the encodings of earlier-emitted sibling
//! branches. Forward skipping consumes whole `L_(i,j)` blocks — an edge
//! token departing from level `i` to level `j`, a run of tokens at
//! levels `≥ j`, and the `(j,$,j)` terminator — via the looped automata
//! `B_i`. Backward skipping walks block-by-block from a `(j,$,j)`
//! terminator back to the block's opening token via the two-way scanners
//! `B_j⁻`.

use crate::automata::{A2fa, StateId, Token};
use crate::graph::{GammaMid, GammaToken};
use crate::syntax::{Nre, Symbol};

use super::{
    combine_alt, combine_concat, combine_nest, combine_star, finish_wrapper, letter_set, Frag,
    MarkedA2fa,
};

/// Options for the general construction.
#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    /// Whether leaf terminator tokens count as block-interior tokens.
    /// Branch encodings contain the terminators of their sub-branches,
    /// so skipping needs this on; the letters-only reading is kept for
    /// comparison in tests.
    pub dollar_in_interior: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            dollar_in_interior: true,
        }
    }
}

fn gamma(from: u8, mid: GammaMid, to: u8) -> Token {
    Token::Gamma(GammaToken { from, mid, to })
}

/// All well-formed encoding tokens over the letter closure of `labels`:
/// `(i,x,j)` for `i ≤ j` and `(i,$,i)`.
pub fn gamma_alphabet(k: u8, labels: &[String]) -> Vec<Token> {
    let letters = letter_set(labels);
    let mut out = Vec::new();
    for i in 1..=k {
        for j in i..=k {
            for x in &letters {
                out.push(gamma(i, GammaMid::Sym(x.clone()), j));
            }
        }
        out.push(gamma(i, GammaMid::Dollar, i));
    }
    out
}

/// Compiles an NRE for evaluation over encodings of k-branch semipaths,
/// wrapper included. Requires `k ≥ nesting_depth(e)` for completeness of
/// the containment pipeline, but compiles for any `k ≥ 1`.
pub fn compile_gen(e: &Nre, k: u8, labels: &[String], opts: GenOptions) -> MarkedA2fa {
    let letters = letter_set(labels);
    let mut aut = A2fa::new(gamma_alphabet(k, labels));
    let frag = build_gen(e, k, &letters, opts, &mut aut);
    finish_wrapper(aut, frag)
}

fn build_gen(e: &Nre, k: u8, letters: &[Symbol], opts: GenOptions, aut: &mut A2fa) -> Frag {
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
        Nre::Atom(x) => atom_gen(x, k, letters, opts, aut),
        Nre::Alt(a, b) => {
            let fa = build_gen(a, k, letters, opts, aut);
            let fb = build_gen(b, k, letters, opts, aut);
            combine_alt(aut, fa, fb)
        }
        Nre::Concat(a, b) => {
            let fa = build_gen(a, k, letters, opts, aut);
            let fb = build_gen(b, k, letters, opts, aut);
            combine_concat(aut, fa, fb)
        }
        Nre::Star(inner) => {
            let f = build_gen(inner, k, letters, opts, aut);
            combine_star(aut, f)
        }
        Nre::Nest(inner) => {
            let f = build_gen(inner, k, letters, opts, aut);
            combine_nest(aut, f)
        }
    }
}

/// Block-interior tokens for level `j`: every token that can occur inside
/// an `L_(i,j)` block between its opener and terminator.
fn interior_tokens(j: u8, k: u8, letters: &[Symbol], opts: GenOptions) -> Vec<Token> {
    let mut out = Vec::new();
    for l in j..=k {
        for l2 in l..=k {
            for x in letters {
                out.push(gamma(l, GammaMid::Sym(x.clone()), l2));
            }
        }
        if opts.dollar_in_interior {
            out.push(gamma(l, GammaMid::Dollar, l));
        }
    }
    out
}

/// The base case: match one `x`-labeled edge, in either direction,
/// skipping sibling branches as needed.
fn atom_gen(x: &Symbol, k: u8, letters: &[Symbol], opts: GenOptions, aut: &mut A2fa) -> Frag {
    let q0 = aut.fresh_state("q0");
    let qf = aut.fresh_state("qf");
    let qr1 = aut.fresh_state("qr1");
    let qr2 = aut.fresh_state("qr2");
    aut.finals.insert(qf);

    let inv = x.invert();
    for i in 1..=k {
        for j in i..=k {
            for b in letters {
                let tok = gamma(i, GammaMid::Sym(b.clone()), j);
                if b == x {
                    aut.add(q0, tok.clone(), qf, 1);
                }
                aut.add(q0, tok.clone(), qr1, -1);
                if *b == inv {
                    aut.add(qr1, tok.clone(), qr2, 0);
                }
            }
        }
        // The tacit start can sit on a leaf terminator; the backward
        // option must fire there too.
        aut.add(q0, gamma(i, GammaMid::Dollar, i), qr1, -1);
    }
    aut.add_eps(qr2, qf);

    // Forward branch skipping: B_i loops consume whole sibling blocks.
    for i in 1..=k {
        let (entry, exit) = build_b_forward(i, k, letters, opts, aut);
        aut.add_eps(q0, entry);
        aut.add_eps(exit, q0);
    }
    // Backward branch skipping: B_j⁻ scanners walk back over one block.
    for j in 1..=k {
        let (entry, exit) = build_b_backward(j, k, letters, opts, aut);
        aut.add_eps(qr2, entry);
        aut.add_eps(exit, qr2);
    }
    Frag {
        start: q0,
        marked: qf,
    }
}

/// `B_i = (L_(i,i) + … + L_(i,k))*` as a forward-reading fragment.
fn build_b_forward(
    i: u8,
    k: u8,
    letters: &[Symbol],
    opts: GenOptions,
    aut: &mut A2fa,
) -> (StateId, StateId) {
    let entry = aut.fresh_state(format!("B{i}.in"));
    let exit = aut.fresh_state(format!("B{i}.out"));
    aut.add_eps(entry, exit);
    for j in i..=k {
        let open = aut.fresh_state(format!("B{i}.L{j}.open"));
        let body = aut.fresh_state(format!("B{i}.L{j}.body"));
        let done = aut.fresh_state(format!("B{i}.L{j}.done"));
        aut.add_eps(entry, open);
        for x in letters {
            aut.add(open, gamma(i, GammaMid::Sym(x.clone()), j), body, 1);
        }
        for t in interior_tokens(j, k, letters, opts) {
            aut.add(body, t, body, 1);
        }
        aut.add(body, gamma(j, GammaMid::Dollar, j), done, 1);
        aut.add_eps(done, entry);
    }
    (entry, exit)
}

/// `B_j⁻`: step one left, require the `(j,$,j)` terminator, walk back
/// over the block interior, stop on the block's opening token.
fn build_b_backward(
    j: u8,
    k: u8,
    letters: &[Symbol],
    opts: GenOptions,
    aut: &mut A2fa,
) -> (StateId, StateId) {
    let q0 = aut.fresh_state(format!("B{j}-.q0"));
    let q1 = aut.fresh_state(format!("B{j}-.q1"));
    let q2 = aut.fresh_state(format!("B{j}-.q2"));
    let qf = aut.fresh_state(format!("B{j}-.qf"));
    // One step back from wherever the computation stands.
    for t in gamma_tokens_all(k, letters) {
        aut.add(q0, t, q1, -1);
    }
    aut.add(q1, gamma(j, GammaMid::Dollar, j), q2, -1);
    for t in interior_tokens(j, k, letters, opts) {
        aut.add(q2, t, q2, -1);
    }
    for i in 1..j {
        for a in letters {
            aut.add(q2, gamma(i, GammaMid::Sym(a.clone()), j), qf, 0);
        }
    }
    (q0, qf)
}

fn gamma_tokens_all(k: u8, letters: &[Symbol]) -> Vec<Token> {
    let mut out = Vec::new();
    for i in 1..=k {
        for j in i..=k {
            for x in letters {
                out.push(gamma(i, GammaMid::Sym(x.clone()), j));
            }
        }
        out.push(gamma(i, GammaMid::Dollar, i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{KBranchSemipath, TreeLabel};
    use crate::syntax::parse;
    use crate::translate::mark_se_gen;

    fn labels() -> Vec<String> {
        vec!["a".to_string(), "b".to_string()]
    }

    fn tree(k: u8, edges: &[(&str, &str, &str)]) -> KBranchSemipath {
        let list: Vec<_> = edges
            .iter()
            .map(|(p, c, l)| {
                let label = if let Some(base) = l.strip_suffix("^-") {
                    TreeLabel::Sym(Symbol::inverse(base).unwrap())
                } else {
                    TreeLabel::Sym(Symbol::forward(l).unwrap())
                };
                (p.to_string(), c.to_string(), label)
            })
            .collect();
        KBranchSemipath::new(k, &list).unwrap()
    }

    #[test]
    fn atom_on_single_edge_tree() {
        let m = compile_gen(&parse("a").unwrap(), 1, &labels(), GenOptions::default());
        let t = tree(1, &[("1", "11", "a")]);
        assert!(m.automaton.accepts(&Token::from_encoded(&t.trans())));
        let t = tree(1, &[("1", "11", "b")]);
        assert!(!m.automaton.accepts(&Token::from_encoded(&t.trans())));
        // The inverse-labeled edge also witnesses `a` (backwards).
        let t = tree(1, &[("1", "11", "a^-")]);
        assert!(m.automaton.accepts(&Token::from_encoded(&t.trans())));
    }

    #[test]
    fn atom_skips_sibling_branch() {
        // Root has branches b (class 2, emitted first) and a (class 1):
        // matching `a` from the root must skip the b-block.
        let m = compile_gen(&parse("a").unwrap(), 2, &labels(), GenOptions::default());
        let t = tree(2, &[("1", "11", "a"), ("1", "12", "b")]);
        assert!(m.automaton.accepts(&Token::from_encoded(&t.trans())));
        let t = tree(2, &[("1", "11", "b"), ("1", "12", "b")]);
        assert!(!m.automaton.accepts(&Token::from_encoded(&t.trans())));
    }

    #[test]
    fn marked_acceptance_matches_expansion() {
        // Lemma-style check on the single a-edge tree: only the pair
        // (1, 11) satisfies `a`.
        let m = compile_gen(&parse("a").unwrap(), 1, &labels(), GenOptions::default());
        let se = mark_se_gen(&m, 1);
        let t = tree(1, &[("1", "11", "a")]);
        let ok = t.expand_markers("1", "11").unwrap();
        assert!(se.accepts(&Token::from_encoded(&ok.trans())));
        let back = t.expand_markers("11", "1").unwrap();
        assert!(!se.accepts(&Token::from_encoded(&back.trans())));
        let refl = t.expand_markers("1", "1").unwrap();
        assert!(!se.accepts(&Token::from_encoded(&refl.trans())));
    }

    #[test]
    fn marked_acceptance_inverse_atom() {
        let m = compile_gen(&parse("a^-").unwrap(), 1, &labels(), GenOptions::default());
        let se = mark_se_gen(&m, 1);
        let t = tree(1, &[("1", "11", "a")]);
        assert!(se.accepts(&Token::from_encoded(&t.expand_markers("11", "1").unwrap().trans())));
        assert!(!se.accepts(&Token::from_encoded(&t.expand_markers("1", "11").unwrap().trans())));
    }
}
