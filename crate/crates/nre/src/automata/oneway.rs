//! One-way nondeterministic automata over framed words, with the
//! standard algebra: determinization, complement and product.
//!
//! Every language handled here lives inside the framed universe
//! `% base* &`; complementation is taken relative to that universe so
//! that ill-formed token sequences never leak into intersections.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{AutomataError, StateId, Token};

#[derive(Debug, Clone)]
pub struct Nfa {
    names: Vec<String>,
    pub initial: StateId,
    pub finals: BTreeSet<StateId>,
    alphabet: BTreeSet<Token>,
    delta: BTreeMap<(StateId, Token), BTreeSet<StateId>>,
}

impl Nfa {
    pub fn new(alphabet: impl IntoIterator<Item = Token>) -> Self {
        let mut alphabet: BTreeSet<Token> = alphabet.into_iter().collect();
        alphabet.insert(Token::Pct);
        alphabet.insert(Token::Amp);
        Nfa {
            names: Vec::new(),
            initial: 0,
            finals: BTreeSet::new(),
            alphabet,
            delta: BTreeMap::new(),
        }
    }

    pub fn fresh_state(&mut self, name: impl Into<String>) -> StateId {
        self.names.push(name.into());
        (self.names.len() - 1) as StateId
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.names[q as usize]
    }

    pub fn alphabet(&self) -> &BTreeSet<Token> {
        &self.alphabet
    }

    pub fn add(&mut self, q: StateId, tok: Token, p: StateId) {
        self.delta.entry((q, tok)).or_default().insert(p);
    }

    pub fn next(&self, q: StateId, tok: &Token) -> impl Iterator<Item = StateId> + '_ {
        self.delta
            .get(&(q, tok.clone()))
            .into_iter()
            .flatten()
            .copied()
    }

    /// Membership of a framed word.
    pub fn accepts_framed(&self, framed: &[Token]) -> bool {
        let mut cur: BTreeSet<StateId> = BTreeSet::new();
        cur.insert(self.initial);
        for tok in framed {
            let mut next = BTreeSet::new();
            for q in &cur {
                next.extend(self.next(*q, tok));
            }
            cur = next;
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|q| self.finals.contains(q))
    }

    /// Membership of a base word (framed automatically).
    pub fn accepts(&self, word: &[Token]) -> bool {
        let mut framed = Vec::with_capacity(word.len() + 2);
        framed.push(Token::Pct);
        framed.extend_from_slice(word);
        framed.push(Token::Amp);
        self.accepts_framed(&framed)
    }

    /// Subset construction. The result is deterministic (at most one
    /// successor per token); unreachable subsets are never materialized.
    pub fn determinize(&self, budget: usize) -> Result<Nfa, AutomataError> {
        let mut out = Nfa::new(self.alphabet.iter().filter(|t| !t.is_frame()).cloned());
        let mut index: HashMap<BTreeSet<StateId>, StateId> = HashMap::new();
        let mut queue: VecDeque<BTreeSet<StateId>> = VecDeque::new();
        let start: BTreeSet<StateId> = [self.initial].into();
        let s0 = out.fresh_state(format!("{{{}}}", self.state_name(self.initial)));
        index.insert(start.clone(), s0);
        out.initial = s0;
        if start.iter().any(|q| self.finals.contains(q)) {
            out.finals.insert(s0);
        }
        queue.push_back(start);
        while let Some(set) = queue.pop_front() {
            let from = index[&set];
            for tok in self.alphabet.iter() {
                let mut next: BTreeSet<StateId> = BTreeSet::new();
                for q in &set {
                    next.extend(self.next(*q, tok));
                }
                if next.is_empty() {
                    continue;
                }
                let to = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if index.len() >= budget {
                            return Err(AutomataError::BudgetExceeded {
                                used: index.len(),
                                budget,
                            });
                        }
                        let id = out.fresh_state(format!("d{}", index.len()));
                        if next.iter().any(|q| self.finals.contains(q)) {
                            out.finals.insert(id);
                        }
                        index.insert(next.clone(), id);
                        queue.push_back(next.clone());
                        id
                    }
                };
                out.add(from, tok.clone(), to);
            }
        }
        Ok(out)
    }

    /// Language complement relative to the framed universe
    /// `% base* &` over this automaton's alphabet.
    pub fn complement(&self, budget: usize) -> Result<Nfa, AutomataError> {
        let det = self.determinize(budget)?;
        // Totalize with a sink, flip finals, then cut back to the universe.
        let mut flipped = Nfa::new(det.alphabet.iter().filter(|t| !t.is_frame()).cloned());
        for q in 0..det.state_count() as StateId {
            let id = flipped.fresh_state(det.state_name(q).to_string());
            debug_assert_eq!(id, q);
        }
        let sink = flipped.fresh_state("sink");
        flipped.initial = det.initial;
        for q in 0..det.state_count() as StateId {
            if !det.finals.contains(&q) {
                flipped.finals.insert(q);
            }
            for tok in det.alphabet.iter() {
                let mut any = false;
                for p in det.next(q, tok) {
                    flipped.add(q, tok.clone(), p);
                    any = true;
                }
                if !any {
                    flipped.add(q, tok.clone(), sink);
                }
            }
        }
        for tok in det.alphabet.iter() {
            flipped.add(sink, tok.clone(), sink);
        }
        flipped.finals.insert(sink);
        Ok(intersect(&flipped, &framed_universe(&det.alphabet)))
    }

    /// Shortest accepted framed word, or `None` when the language is
    /// empty. Breadth-first, tokens tried in sorted order, so the result
    /// is deterministic.
    pub fn shortest_word(&self) -> Option<Vec<Token>> {
        let mut seen: BTreeSet<StateId> = BTreeSet::new();
        let mut queue: VecDeque<(StateId, Vec<Token>)> = VecDeque::new();
        seen.insert(self.initial);
        queue.push_back((self.initial, Vec::new()));
        while let Some((q, word)) = queue.pop_front() {
            if self.finals.contains(&q) {
                return Some(word);
            }
            for tok in self.alphabet.iter() {
                for p in self.next(q, tok) {
                    if seen.insert(p) {
                        let mut w = word.clone();
                        w.push(tok.clone());
                        queue.push_back((p, w));
                    }
                }
            }
        }
        None
    }

    pub fn is_empty_language(&self) -> bool {
        self.shortest_word().is_none()
    }
}

/// The automaton for `% base* &` over the given alphabet.
pub fn framed_universe(alphabet: &BTreeSet<Token>) -> Nfa {
    let mut u = Nfa::new(alphabet.iter().filter(|t| !t.is_frame()).cloned());
    let s0 = u.fresh_state("pre");
    let s1 = u.fresh_state("mid");
    let s2 = u.fresh_state("post");
    u.initial = s0;
    u.finals.insert(s2);
    u.add(s0, Token::Pct, s1);
    for tok in alphabet.iter().filter(|t| !t.is_frame()) {
        u.add(s1, tok.clone(), s1);
    }
    u.add(s1, Token::Amp, s2);
    u
}

/// Product intersection over the union of the two alphabets.
pub fn intersect(a: &Nfa, b: &Nfa) -> Nfa {
    let alphabet: BTreeSet<Token> = a.alphabet.union(&b.alphabet).cloned().collect();
    let mut out = Nfa::new(alphabet.iter().filter(|t| !t.is_frame()).cloned());
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue: VecDeque<(StateId, StateId)> = VecDeque::new();
    let start = (a.initial, b.initial);
    let s0 = out.fresh_state("p0");
    index.insert(start, s0);
    out.initial = s0;
    if a.finals.contains(&a.initial) && b.finals.contains(&b.initial) {
        out.finals.insert(s0);
    }
    queue.push_back(start);
    while let Some((qa, qb)) = queue.pop_front() {
        let from = index[&(qa, qb)];
        for tok in alphabet.iter() {
            for pa in a.next(qa, tok) {
                for pb in b.next(qb, tok) {
                    let key = (pa, pb);
                    let to = *index.entry(key).or_insert_with(|| {
                        let id = out.fresh_state(format!("p{}", queue.len()));
                        queue.push_back(key);
                        id
                    });
                    // Name collisions are harmless; renumber for determinism.
                    if a.finals.contains(&pa) && b.finals.contains(&pb) {
                        out.finals.insert(to);
                    }
                    out.add(from, tok.clone(), to);
                }
            }
        }
    }
    out
}

/// n-ary intersection.
pub fn intersect_all(nfas: &[&Nfa]) -> Nfa {
    assert!(!nfas.is_empty());
    let mut acc = nfas[0].clone();
    for n in &nfas[1..] {
        acc = intersect(&acc, n);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Symbol;

    fn letter(s: &str) -> Token {
        Token::Letter(Symbol::forward(s).unwrap())
    }

    /// NFA for the base language {a, ab} over {a,b}.
    fn sample() -> Nfa {
        let (a, b) = (letter("a"), letter("b"));
        let mut n = Nfa::new([a.clone(), b.clone()]);
        let s0 = n.fresh_state("s0");
        let s1 = n.fresh_state("s1");
        let s2 = n.fresh_state("s2");
        let s3 = n.fresh_state("s3");
        let acc = n.fresh_state("acc");
        n.initial = s0;
        n.finals.insert(acc);
        n.add(s0, Token::Pct, s1);
        n.add(s1, a.clone(), s2);
        n.add(s2, Token::Amp, acc);
        n.add(s2, b.clone(), s3);
        n.add(s3, Token::Amp, acc);
        n
    }

    fn all_words(max_len: usize) -> Vec<Vec<Token>> {
        let letters = [letter("a"), letter("b")];
        let mut layer: Vec<Vec<Token>> = vec![vec![]];
        let mut out = layer.clone();
        for _ in 0..max_len {
            layer = layer
                .into_iter()
                .flat_map(|w| {
                    letters.iter().map(move |l| {
                        let mut w2 = w.clone();
                        w2.push(l.clone());
                        w2
                    })
                })
                .collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    #[test]
    fn determinize_preserves_language() {
        let n = sample();
        let d = n.determinize(1000).unwrap();
        for w in all_words(4) {
            assert_eq!(n.accepts(&w), d.accepts(&w), "{w:?}");
        }
    }

    #[test]
    fn complement_flips_membership() {
        let n = sample();
        let c = n.complement(1000).unwrap();
        for w in all_words(5) {
            assert_eq!(n.accepts(&w), !c.accepts(&w), "{w:?}");
        }
    }

    #[test]
    fn intersect_with_universe_is_identity() {
        let n = sample();
        let u = framed_universe(n.alphabet());
        let i = intersect(&n, &u);
        for w in all_words(4) {
            assert_eq!(n.accepts(&w), i.accepts(&w));
        }
    }

    #[test]
    fn intersect_with_complement_is_empty() {
        let n = sample();
        let c = n.complement(1000).unwrap();
        assert!(intersect(&n, &c).is_empty_language());
    }

    #[test]
    fn empty_finals_empty_language() {
        let mut n = sample();
        n.finals.clear();
        assert!(n.is_empty_language());
    }

    #[test]
    fn shortest_word_is_shortest() {
        let n = sample();
        let w = n.shortest_word().unwrap();
        // Framed: % a &
        assert_eq!(w, vec![Token::Pct, letter("a"), Token::Amp]);
    }
}
