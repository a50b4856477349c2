//! Word-shape automata for the containment pipelines.
//!
//! `shape_sp` accepts `w1 S w2 E w3` over letters. `shape_gen` is its
//! tree-encoding analogue and additionally requires that neither marker
//! token directly follows a leaf terminator — in an encoding that is
//! exactly the condition for the marker edge's parent to have no other
//! children, which makes the word an expansion `trans(T[u→S, v→E])` of a
//! plain tree rather than an arbitrary marked encoding.
//!
//! `encoding_validator` accepts exactly the encodings of k-branch
//! semipaths with at least one edge. It is a small stack machine made
//! finite by the branching discipline: pending sibling contexts have
//! strictly increasing classes, so the stack never exceeds depth `k`.

use std::collections::HashMap;

use crate::automata::oneway::Nfa;
use crate::automata::{Marker, Token};
use crate::graph::GammaMid;
use crate::syntax::Symbol;

use super::letter_set;

/// Accepts `w1 S w2 E w3` over the letter closure of `labels`.
pub fn shape_sp(labels: &[String]) -> Nfa {
    let letters: Vec<Token> = letter_set(labels)
        .into_iter()
        .map(Token::Letter)
        .collect();
    let mut n = Nfa::new(
        letters
            .iter()
            .cloned()
            .chain([Token::Mark(Marker::S), Token::Mark(Marker::E)]),
    );
    let pre = n.fresh_state("pre");
    let w1 = n.fresh_state("w1");
    let w2 = n.fresh_state("w2");
    let w3 = n.fresh_state("w3");
    let acc = n.fresh_state("acc");
    n.initial = pre;
    n.finals.insert(acc);
    n.add(pre, Token::Pct, w1);
    for l in &letters {
        n.add(w1, l.clone(), w1);
        n.add(w2, l.clone(), w2);
        n.add(w3, l.clone(), w3);
    }
    n.add(w1, Token::Mark(Marker::S), w2);
    n.add(w2, Token::Mark(Marker::E), w3);
    n.add(w3, Token::Amp, acc);
    n
}

/// Tree-encoding analogue of [`shape_sp`]: exactly one `(i,S,i)` then one
/// `(j,E,j)`, and no marker directly after a `$` terminator.
pub fn shape_gen(k: u8, labels: &[String]) -> Nfa {
    let base = super::gen::gamma_alphabet(k, labels);
    let s_toks: Vec<Token> = (1..=k)
        .map(|i| {
            Token::Gamma(crate::graph::GammaToken {
                from: i,
                mid: GammaMid::MarkS,
                to: i,
            })
        })
        .collect();
    let e_toks: Vec<Token> = (1..=k)
        .map(|i| {
            Token::Gamma(crate::graph::GammaToken {
                from: i,
                mid: GammaMid::MarkE,
                to: i,
            })
        })
        .collect();
    let mut n = Nfa::new(
        base.iter()
            .cloned()
            .chain(s_toks.iter().cloned())
            .chain(e_toks.iter().cloned()),
    );
    // Phase 1/2/3 × whether the previous token was a terminator.
    let pre = n.fresh_state("pre");
    let mut phase = Vec::new();
    for ph in 1..=3 {
        let plain = n.fresh_state(format!("w{ph}"));
        let dollar = n.fresh_state(format!("w{ph}$"));
        phase.push((plain, dollar));
    }
    let acc = n.fresh_state("acc");
    n.initial = pre;
    n.finals.insert(acc);
    n.add(pre, Token::Pct, phase[0].0);
    for (i, (plain, dollar)) in phase.iter().enumerate() {
        for t in &base {
            let is_dollar = matches!(t, Token::Gamma(g) if g.mid == GammaMid::Dollar);
            let to = if is_dollar { *dollar } else { *plain };
            n.add(*plain, t.clone(), to);
            n.add(*dollar, t.clone(), to);
        }
        // Markers only from a non-terminator predecessor.
        if i == 0 {
            for s in &s_toks {
                n.add(*plain, s.clone(), phase[1].0);
            }
        }
        if i == 1 {
            for e in &e_toks {
                n.add(*plain, e.clone(), phase[2].0);
            }
        }
        if i == 2 {
            n.add(*plain, Token::Amp, acc);
            n.add(*dollar, Token::Amp, acc);
        }
    }
    n
}

/// One frame of the validator's context stack: the class of the node
/// being emitted and the largest non-class child branch opened so far.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Ctx {
    class: u8,
    last: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum VState {
    Pre,
    /// Root context opened, no token consumed yet (the root must not be
    /// a leaf, so its terminator is rejected here).
    RootFresh,
    Run(Vec<Ctx>),
    ExpectEnd,
    Accept,
}

/// A deterministic automaton accepting exactly `{trans(t)}` over trees
/// with at least one edge, labels drawn from `labels` (pass the marker
/// labels too when validating expansions).
pub fn encoding_validator(k: u8, labels: &[String], with_markers: bool) -> Nfa {
    let mut tokens = super::gen::gamma_alphabet(k, labels);
    if with_markers {
        for i in 1..=k {
            tokens.push(Token::Gamma(crate::graph::GammaToken {
                from: i,
                mid: GammaMid::MarkS,
                to: i,
            }));
            tokens.push(Token::Gamma(crate::graph::GammaToken {
                from: i,
                mid: GammaMid::MarkE,
                to: i,
            }));
        }
    }
    let mut n = Nfa::new(tokens.iter().cloned());

    struct Interner {
        ids: HashMap<VState, u32>,
        order: Vec<VState>,
    }
    impl Interner {
        fn get(&mut self, n: &mut Nfa, st: VState) -> u32 {
            if let Some(&id) = self.ids.get(&st) {
                return id;
            }
            let id = n.fresh_state(format!("v{}", self.order.len()));
            self.ids.insert(st.clone(), id);
            self.order.push(st);
            id
        }
    }
    let mut it = Interner {
        ids: HashMap::new(),
        order: Vec::new(),
    };

    let pre = it.get(&mut n, VState::Pre);
    n.initial = pre;
    let mut at = 0usize;
    // BFS over reachable validator states.
    while at < it.order.len() {
        let st = it.order[at].clone();
        let from = it.ids[&st];
        at += 1;
        match &st {
            VState::Pre => {
                let to = it.get(&mut n, VState::RootFresh);
                n.add(from, Token::Pct, to);
            }
            VState::Accept => {}
            VState::ExpectEnd => {
                let to = it.get(&mut n, VState::Accept);
                n.add(from, Token::Amp, to);
                n.finals.insert(to);
            }
            VState::RootFresh | VState::Run(_) => {
                let (stack, fresh_root) = match &st {
                    VState::RootFresh => (vec![Ctx { class: 1, last: 0 }], true),
                    VState::Run(s) => (s.clone(), false),
                    _ => unreachable!(),
                };
                let top = stack.last().expect("run state has a context").clone();
                for tok in &tokens {
                    let g = match tok {
                        Token::Gamma(g) => g,
                        _ => continue,
                    };
                    let next = if g.mid == GammaMid::Dollar {
                        // Leaf terminator: only for a context with no
                        // children opened, and never for the fresh root.
                        if fresh_root || g.from != top.class || g.to != top.class || top.last != 0
                        {
                            continue;
                        }
                        let mut s2 = stack.clone();
                        s2.pop();
                        if s2.is_empty() {
                            VState::ExpectEnd
                        } else {
                            VState::Run(s2)
                        }
                    } else {
                        // Edge token: from the current class, to the
                        // class child (tail call) or a strictly larger
                        // branch in ascending order (push).
                        if g.from != top.class {
                            continue;
                        }
                        let mut s2 = stack.clone();
                        if g.to == top.class {
                            *s2.last_mut().unwrap() = Ctx {
                                class: top.class,
                                last: 0,
                            };
                        } else if g.to > top.class && g.to > top.last && g.to <= k {
                            s2.last_mut().unwrap().last = g.to;
                            s2.push(Ctx {
                                class: g.to,
                                last: 0,
                            });
                        } else {
                            continue;
                        }
                        VState::Run(s2)
                    };
                    let to = it.get(&mut n, next);
                    n.add(from, tok.clone(), to);
                }
            }
        }
    }
    n
}

/// Convenience: validate one encoded word (framed automatically).
pub fn validates(k: u8, labels: &[String], with_markers: bool, tokens: &[Token]) -> bool {
    encoding_validator(k, labels, with_markers).accepts(tokens)
}

/// Letters as tokens, for tests and the CLI.
pub fn letter_tokens(labels: &[String]) -> Vec<Token> {
    letter_set(labels).into_iter().map(Token::Letter).collect()
}

#[allow(unused)]
fn _sym(s: &str) -> Symbol {
    Symbol::forward(s).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{decode, EncodedWord, GammaToken, KBranchSemipath, TreeLabel};
    use crate::oracle::{enum_kbranch, EnumSpec};

    fn labels() -> Vec<String> {
        vec!["a".to_string()]
    }

    fn tok(s: &str) -> Token {
        match s {
            "S" => Token::Mark(Marker::S),
            "E" => Token::Mark(Marker::E),
            _ => Token::Letter(Symbol::forward(s).unwrap()),
        }
    }

    #[test]
    fn shape_sp_examples() {
        let n = shape_sp(&labels());
        assert!(n.accepts(&[tok("S"), tok("E")]));
        assert!(!n.accepts(&[tok("a"), tok("E"), tok("S")]));
        assert!(!n.accepts(&[tok("S"), tok("a"), tok("S"), tok("E")]));
        assert!(n.accepts(&[tok("a"), tok("S"), tok("a"), tok("E"), tok("a")]));
    }

    fn gtok(from: u8, mid: &str, to: u8) -> Token {
        let mid = match mid {
            "$" => GammaMid::Dollar,
            "S" => GammaMid::MarkS,
            "E" => GammaMid::MarkE,
            s => GammaMid::Sym(Symbol::forward(s).unwrap()),
        };
        Token::Gamma(GammaToken { from, mid, to })
    }

    #[test]
    fn validator_minimal_examples() {
        let v1 = encoding_validator(1, &labels(), false);
        assert!(v1.accepts(&[gtok(1, "a", 1), gtok(1, "$", 1)]));
        assert!(!v1.accepts(&[gtok(1, "a", 1)]));
        assert!(!v1.accepts(&[gtok(1, "$", 1)]));

        let v2 = encoding_validator(2, &labels(), false);
        assert!(v2.accepts(&[
            gtok(1, "a", 2),
            gtok(2, "$", 2),
            gtok(1, "a", 1),
            gtok(1, "$", 1)
        ]));
        // Missing the (2,$,2) terminator.
        assert!(!v2.accepts(&[gtok(1, "a", 2), gtok(1, "a", 1), gtok(1, "$", 1)]));
        // Sibling branches out of ascending order are not canonical.
        assert!(!v2.accepts(&[
            gtok(1, "a", 1),
            gtok(1, "$", 1),
            gtok(1, "a", 2),
            gtok(2, "$", 2)
        ]));
    }

    #[test]
    fn validator_accepts_all_enumerated_encodings() {
        let spec = EnumSpec::new(&["a", "b"], 4, 2, true);
        let v = encoding_validator(2, &["a".into(), "b".into()], false);
        for t in enum_kbranch(&spec) {
            if t.edge_count() == 0 {
                continue;
            }
            let w = t.trans();
            assert!(
                v.accepts(&crate::automata::Token::from_encoded(&w)),
                "validator must accept {w}"
            );
            assert_eq!(decode(&w).as_ref(), Some(&t));
        }
    }

    #[test]
    fn validator_agrees_with_decode_on_random_words() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let base = super::super::gen::gamma_alphabet(2, &["a".into(), "b".into()]);
        let v = encoding_validator(2, &["a".into(), "b".into()], false);
        for _ in 0..500 {
            let len = rng.gen_range(0..=8);
            let tokens: Vec<Token> = (0..len)
                .map(|_| base[rng.gen_range(0..base.len())].clone())
                .collect();
            let gammas: Vec<GammaToken> = tokens
                .iter()
                .map(|t| match t {
                    Token::Gamma(g) => g.clone(),
                    _ => unreachable!(),
                })
                .collect();
            let word = EncodedWord {
                k: 2,
                tokens: gammas,
            };
            let decoded = decode(&word);
            let structurally_valid =
                decoded.map(|t| t.edge_count() >= 1).unwrap_or(false);
            assert_eq!(
                v.accepts(&tokens),
                structurally_valid,
                "validator and decoder disagree on {word}"
            );
        }
    }

    #[test]
    fn validator_with_markers_accepts_expansions() {
        let v = encoding_validator(1, &labels(), true);
        let t = KBranchSemipath::new(
            1,
            &[(
                "1".to_string(),
                "11".to_string(),
                TreeLabel::Sym(Symbol::forward("a").unwrap()),
            )],
        )
        .unwrap();
        for (u, vv) in [("1", "11"), ("11", "1"), ("1", "1"), ("11", "11")] {
            let ex = t.expand_markers(u, vv).unwrap();
            assert!(
                v.accepts(&crate::automata::Token::from_encoded(&ex.trans())),
                "expansion {u}->{vv}"
            );
        }
    }

    #[test]
    fn shape_gen_requires_expansion_shape() {
        let n = shape_gen(2, &labels());
        // A marker edge straight after a terminator means the marked node
        // kept an earlier sibling — not an expansion.
        assert!(!n.accepts(&[
            gtok(1, "a", 2),
            gtok(2, "$", 2),
            gtok(1, "S", 1),
            gtok(1, "E", 1),
            gtok(1, "$", 1)
        ]));
        // The straightforward expansion of the single-node tree.
        assert!(n.accepts(&[gtok(1, "S", 1), gtok(1, "E", 1), gtok(1, "$", 1)]));
    }
}
