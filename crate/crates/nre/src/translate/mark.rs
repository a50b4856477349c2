//! The endpoint-marking construction.
//!
//! `A^{S,E}` runs over words with an `S` marker at the matched segment's
//! start node and an `E` marker at its end node. A fresh initial state
//! scans backward from the end frame to the `S` marker and enters the
//! compiled automaton's original initial state just past it; the marked
//! state must consume the `E` marker (read directly, or peeked one step
//! to the left when the match arrived from the right) into a fresh final
//! state that runs to the end.
//!
//! Marker tokens must otherwise be transparent to the inner computation,
//! in both directions of head motion. Forward transparency is a `+1`
//! self-loop on markers for every non-pinned existential state. Backward
//! transparency cannot reuse those loops (bouncing a backward arrival
//! forward again would silently turn a `-1` move into a stay and admit
//! wrong matches), so every `-1` transition is rerouted through a glide
//! state that keeps moving left over markers and re-enters the original
//! target on the first real token.

use crate::automata::{A2fa, Marker, StateId, Token};
use crate::graph::{GammaMid, GammaToken};

use super::MarkedA2fa;

/// Marking over plain letter words: markers are the standalone `S`/`E`
/// tokens.
pub fn mark_se(m: &MarkedA2fa) -> A2fa {
    mark_with(
        m,
        vec![Token::Mark(Marker::S)],
        vec![Token::Mark(Marker::E)],
    )
}

/// Marking over tree-encoding words: markers are the class-preserving
/// `(i,S,i)` and `(i,E,i)` tokens, `1 ≤ i ≤ k`.
pub fn mark_se_gen(m: &MarkedA2fa, k: u8) -> A2fa {
    let s_toks = (1..=k)
        .map(|i| {
            Token::Gamma(GammaToken {
                from: i,
                mid: GammaMid::MarkS,
                to: i,
            })
        })
        .collect();
    let e_toks = (1..=k)
        .map(|i| {
            Token::Gamma(GammaToken {
                from: i,
                mid: GammaMid::MarkE,
                to: i,
            })
        })
        .collect();
    mark_with(m, s_toks, e_toks)
}

fn mark_with(m: &MarkedA2fa, s_toks: Vec<Token>, e_toks: Vec<Token>) -> A2fa {
    let mut aut = m.automaton.clone();
    let original_states: Vec<StateId> = aut.states().collect();
    let markers: Vec<Token> = s_toks.iter().chain(e_toks.iter()).cloned().collect();

    // Extend the alphabet first so transitions on markers are accepted.
    let mut rebuilt = A2fa::new(
        aut.base_alphabet()
            .cloned()
            .chain(markers.iter().cloned()),
    );
    for q in aut.states() {
        let id = rebuilt.fresh_state(aut.state_name(q).to_string());
        debug_assert_eq!(id, q);
    }
    rebuilt.initial = aut.initial;
    rebuilt.finals = aut.finals.clone();
    rebuilt.universal = aut.universal.clone();
    for ((q, tok), entries) in aut.delta_iter() {
        for (p, mv) in entries {
            // The marked state loses its run-to-the-end forwarding: it
            // must consume E exactly where the match rests, not slide
            // right to a later marker.
            if *q == m.marked && *p == m.marked && *mv == 1 {
                continue;
            }
            match tok {
                Some(t) => rebuilt.add(*q, t.clone(), *p, *mv),
                None => rebuilt.add_eps(*q, *p),
            }
        }
    }
    let mut aut = rebuilt;

    // Backward transparency: reroute every -1 move through a glide state.
    let glide_markers = markers.clone();
    let non_marker: Vec<Token> = aut
        .alphabet()
        .iter()
        .filter(|t| t.marker().is_none())
        .cloned()
        .collect();
    aut.retarget_backward_moves(|a, p| {
        let g = a.fresh_state(format!("bwd({})", a.state_name(p).to_owned()));
        for mk in &glide_markers {
            a.add(g, mk.clone(), g, -1);
        }
        for t in &non_marker {
            a.add(g, t.clone(), p, 0);
        }
        g
    });

    // Forward transparency: parked skips for non-pinned existential states.
    for q in &original_states {
        if aut.universal.contains(q) || *q == m.inner_start || *q == m.marked {
            continue;
        }
        for mk in &markers {
            aut.add(*q, mk.clone(), *q, 1);
        }
    }

    // New initial state: scan backward to the S marker, enter the
    // original initial state just past it.
    let q0s = aut.fresh_state("q0^S");
    for t in aut
        .alphabet()
        .clone()
        .iter()
        .filter(|t| **t != Token::Pct && t.marker() != Some(Marker::S))
    {
        aut.add(q0s, t.clone(), q0s, -1);
    }
    for s in &s_toks {
        aut.add(q0s, s.clone(), m.inner_start, 1);
    }

    // The marked state consumes E — directly, or peeked one step left —
    // into a fresh final that runs to the end.
    let qfe = aut.fresh_state("qf^E");
    let peek = aut.fresh_state("qm_peek");
    for e in &e_toks {
        aut.add(m.marked, e.clone(), qfe, 1);
        aut.add(peek, e.clone(), qfe, 1);
    }
    for t in &non_marker {
        if *t != Token::Pct {
            aut.add(m.marked, t.clone(), peek, -1);
        }
    }
    for t in aut.alphabet().clone() {
        if t != Token::Pct {
            aut.add(qfe, t, qfe, 1);
        }
    }

    aut.finals.remove(&m.marked);
    aut.finals.insert(qfe);
    aut.initial = q0s;
    aut.marked = None;
    aut
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, Symbol};
    use crate::translate::compile_sp;

    fn labels() -> Vec<String> {
        vec!["a".to_string(), "b".to_string()]
    }

    fn marked(q: &str) -> A2fa {
        mark_se(&compile_sp(&parse(q).unwrap(), &labels()))
    }

    fn tok(s: &str) -> Token {
        match s {
            "S" => Token::Mark(Marker::S),
            "E" => Token::Mark(Marker::E),
            _ => {
                if let Some(base) = s.strip_suffix("^-") {
                    Token::Letter(Symbol::inverse(base).unwrap())
                } else {
                    Token::Letter(Symbol::forward(s).unwrap())
                }
            }
        }
    }

    fn word(s: &str) -> Vec<Token> {
        s.split_whitespace().map(tok).collect()
    }

    #[test]
    fn atom_accepts_only_its_segment() {
        let a = marked("a");
        assert!(a.accepts(&word("S a E")));
        assert!(!a.accepts(&word("a S E")));
        assert!(!a.accepts(&word("S E a")));
        assert!(a.accepts(&word("b S a E")));
        assert!(a.accepts(&word("S a E b")));
    }

    #[test]
    fn epsilon_pins_equal_endpoints() {
        let a = marked("eps");
        assert!(a.accepts(&word("S E a")));
        assert!(a.accepts(&word("a S E")));
        assert!(!a.accepts(&word("S a E")));
    }

    #[test]
    fn backward_match_with_markers_reversed() {
        // a^- matched on the single-a semipath runs right-to-left, so the
        // E marker sits before the S marker in the word.
        let a = marked("a^-");
        assert!(a.accepts(&word("E a S")));
        assert!(!a.accepts(&word("S a E")));
    }

    #[test]
    fn concat_places_markers_around_whole_match() {
        let a = marked("a . b");
        assert!(a.accepts(&word("S a b E")));
        assert!(!a.accepts(&word("S a E b")));
        assert!(!a.accepts(&word("a S b E")));
        assert!(a.accepts(&word("a S a b E")));
    }

    /// Two-way sub-matches must cross markers transparently in both
    /// directions: a.[a^-] matches (u1,u2) on the single-a semipath, with
    /// the nested check running backward over the E marker.
    #[test]
    fn nested_backward_check_crosses_markers() {
        let a = marked("a . [a^-]");
        assert!(a.accepts(&word("S a E")));
        assert!(!a.accepts(&word("E a S")));

        // Sanity for the unsound-bounce pitfall: a.[a] must NOT accept on
        // the single-a semipath (there is no a-edge out of u2).
        let b = marked("a . [a]");
        assert!(!b.accepts(&word("S a E")));
    }

    #[test]
    fn star_allows_empty_segment_at_either_end() {
        let a = marked("a*");
        assert!(a.accepts(&word("S E a")));
        assert!(a.accepts(&word("a S E")));
        assert!(a.accepts(&word("S a E")));
        assert!(!a.accepts(&word("E a S")));
    }
}
