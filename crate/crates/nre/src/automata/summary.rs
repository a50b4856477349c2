//! Conversion of (ε-free) alternating two-way automata into one-way
//! automata by prefix-behavior summarization.
//!
//! Acceptance demands a finite computation tree whose every leaf sits
//! past the end marker, so any subtree rooted inside a prefix must push
//! all of its branches out of the prefix to the right. The behavior of a
//! prefix is therefore captured, per state `q`, by the family of *exit
//! sets*: sets `X` of states such that the existential player, entering
//! the prefix on its last token in state `q`, can force every branch to
//! leave rightwards in a state from `X`. Families are upward closed and
//! kept as antichains of minimal sets.
//!
//! Appending a token maps one summary table to the next: moves right
//! exit, stationary moves recurse within the new layer, and moves left
//! re-enter the old prefix through its table, whose exit sets land back
//! on the new token. Universal states combine the guarantees of all
//! their successors (unions), existential states choose one. After the
//! end marker is appended, the word is accepted iff the initial state —
//! which starts positioned on `&` — can force an exit set consisting of
//! final states only.
//!
//! Summary evolution is deterministic, so the construction yields a DFA
//! over reachable summaries, interned and memoized, with a configurable
//! budget. Worst-case blowup is exponential; the corpus sizes here stay
//! small.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::rc::Rc;

use super::oneway::Nfa;
use super::{A2fa, AutomataError, StateId, Token};

/// A set of exit states as a bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct BitSet(Box<[u64]>);

impl BitSet {
    fn empty(words: usize) -> Self {
        BitSet(vec![0u64; words].into_boxed_slice())
    }

    fn singleton(words: usize, ix: usize) -> Self {
        let mut b = Self::empty(words);
        b.0[ix / 64] |= 1 << (ix % 64);
        b
    }

    fn union(&self, other: &BitSet) -> BitSet {
        BitSet(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a | b)
                .collect(),
        )
    }

    fn is_subset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, bits)| {
            (0..64).filter_map(move |b| {
                if bits & (1 << b) != 0 {
                    Some(w * 64 + b)
                } else {
                    None
                }
            })
        })
    }
}

/// An upward-closed family of exit sets, stored as its minimal elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
struct Antichain(Vec<BitSet>);

impl Antichain {
    fn empty() -> Self {
        Antichain(Vec::new())
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inserts a set, dropping it if some member is a subset of it and
    /// evicting members it subsumes.
    fn insert(&mut self, set: BitSet) {
        if self.0.iter().any(|m| m.is_subset(&set)) {
            return;
        }
        self.0.retain(|m| !set.is_subset(m));
        self.0.push(set);
    }

    fn union_of(mut acc: Antichain, other: &Antichain) -> Antichain {
        for s in &other.0 {
            acc.insert(s.clone());
        }
        acc
    }

    /// `{ A ∪ B : A ∈ self, B ∈ other }`, minimized. Empty families
    /// annihilate (no guarantee can be combined with an impossible one).
    fn cross_union(&self, other: &Antichain) -> Antichain {
        let mut out = Antichain::empty();
        for a in &self.0 {
            for b in &other.0 {
                out.insert(a.union(b));
            }
        }
        out
    }

    fn canonicalize(&mut self) {
        self.0.sort();
    }
}

/// One summary table: an exit-set family for every left-enterable state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Table(Vec<Antichain>);

/// Incremental summarizer for one automaton.
pub struct Summarizer<'a> {
    aut: &'a A2fa,
    exits: Vec<StateId>,
    exit_ix: HashMap<StateId, usize>,
    lefts: Vec<StateId>,
    left_ix: HashMap<StateId, usize>,
    words: usize,
    final_mask: BitSet,
    tables: Vec<Rc<Table>>,
    table_ix: HashMap<Rc<Table>, usize>,
    step_memo: HashMap<(usize, Token), usize>,
    accept_memo: HashMap<usize, bool>,
    start: Option<usize>,
    budget: usize,
}

impl<'a> Summarizer<'a> {
    pub fn new(aut: &'a A2fa, budget: usize) -> Result<Self, AutomataError> {
        if aut.has_epsilon() {
            return Err(AutomataError::EpsilonPresent);
        }
        let mut exits: BTreeSet<StateId> = BTreeSet::new();
        let mut lefts: BTreeSet<StateId> = BTreeSet::new();
        for ((_, _), entries) in aut.delta_iter() {
            for (p, m) in entries {
                match m {
                    1 => {
                        exits.insert(*p);
                    }
                    -1 => {
                        lefts.insert(*p);
                    }
                    _ => {}
                }
            }
        }
        let exits: Vec<StateId> = exits.into_iter().collect();
        let exit_ix: HashMap<StateId, usize> =
            exits.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let lefts: Vec<StateId> = lefts.into_iter().collect();
        let left_ix: HashMap<StateId, usize> =
            lefts.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let words = exits.len().div_ceil(64).max(1);
        let mut final_mask = BitSet::empty(words);
        for (i, q) in exits.iter().enumerate() {
            if aut.finals.contains(q) {
                final_mask.0[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(Summarizer {
            aut,
            exits,
            exit_ix,
            lefts,
            left_ix,
            words,
            final_mask,
            tables: Vec::new(),
            table_ix: HashMap::new(),
            step_memo: HashMap::new(),
            accept_memo: HashMap::new(),
            start: None,
            budget,
        })
    }

    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    fn intern(&mut self, t: Table) -> Result<usize, AutomataError> {
        let rc = Rc::new(t);
        if let Some(&id) = self.table_ix.get(&rc) {
            return Ok(id);
        }
        if self.tables.len() >= self.budget {
            return Err(AutomataError::BudgetExceeded {
                used: self.tables.len(),
                budget: self.budget,
            });
        }
        let id = self.tables.len();
        self.tables.push(rc.clone());
        self.table_ix.insert(rc, id);
        Ok(id)
    }

    /// Summary after reading `%`.
    pub fn start(&mut self) -> Result<usize, AutomataError> {
        if let Some(s) = self.start {
            return Ok(s);
        }
        let empty_prev = Table(vec![Antichain::empty(); self.lefts.len()]);
        let full = self.layer(&empty_prev, &Token::Pct, true);
        let id = self.intern(self.restrict(full))?;
        self.start = Some(id);
        Ok(id)
    }

    /// Summary after appending one base token.
    pub fn step(&mut self, from: usize, tok: &Token) -> Result<usize, AutomataError> {
        if let Some(&id) = self.step_memo.get(&(from, tok.clone())) {
            return Ok(id);
        }
        let prev = self.tables[from].clone();
        let full = self.layer(&prev, tok, false);
        let id = self.intern(self.restrict(full))?;
        self.step_memo.insert((from, tok.clone()), id);
        Ok(id)
    }

    /// Does appending `&` to a word with this summary accept?
    pub fn accepts_at_end(&mut self, from: usize) -> bool {
        if let Some(&b) = self.accept_memo.get(&from) {
            return b;
        }
        let prev = self.tables[from].clone();
        let full = self.layer(&prev, &Token::Amp, false);
        let fam = &full[self.aut.initial as usize];
        let ok = fam.0.iter().any(|x| x.is_subset(&self.final_mask));
        self.accept_memo.insert(from, ok);
        ok
    }

    fn restrict(&self, full: Vec<Antichain>) -> Table {
        let mut rows = Vec::with_capacity(self.lefts.len());
        for q in &self.lefts {
            let mut fam = full[*q as usize].clone();
            fam.canonicalize();
            rows.push(fam);
        }
        Table(rows)
    }

    /// Least fixpoint of the exit-set equations for the layer holding
    /// `tok`, given the previous prefix's table. At the first layer
    /// (position 1) left moves are not transitions at all and are
    /// dropped rather than treated as unsatisfiable.
    fn layer(&self, prev: &Table, tok: &Token, first: bool) -> Vec<Antichain> {
        let n = self.aut.state_count();
        let mut e: Vec<Antichain> = vec![Antichain::empty(); n];
        loop {
            let mut changed = false;
            for q in 0..n as StateId {
                let fam = self.state_family(q, tok, &e, prev, first);
                if fam != e[q as usize] {
                    e[q as usize] = fam;
                    changed = true;
                }
            }
            if !changed {
                return e;
            }
        }
    }

    fn state_family(
        &self,
        q: StateId,
        tok: &Token,
        e: &[Antichain],
        prev: &Table,
        first: bool,
    ) -> Antichain {
        let options: Vec<(StateId, i8)> = self
            .aut
            .entries(q, tok)
            .filter(|(_, m)| !(first && *m == -1))
            .collect();
        if options.is_empty() {
            return Antichain::empty();
        }
        let families: Vec<Antichain> = options
            .iter()
            .map(|(p, m)| self.option_family(*p, *m, e, prev))
            .collect();
        if self.aut.universal.contains(&q) {
            // Every successor must be satisfied: combine guarantees.
            let mut acc = Antichain(vec![BitSet::empty(self.words)]);
            for f in &families {
                acc = acc.cross_union(f);
                if acc.is_empty() {
                    return acc;
                }
            }
            acc
        } else {
            let mut acc = Antichain::empty();
            for f in &families {
                acc = Antichain::union_of(acc, f);
            }
            acc
        }
    }

    fn option_family(&self, p: StateId, m: i8, e: &[Antichain], prev: &Table) -> Antichain {
        match m {
            1 => {
                let ix = self.exit_ix[&p];
                Antichain(vec![BitSet::singleton(self.words, ix)])
            }
            0 => e[p as usize].clone(),
            -1 => {
                // Dive into the old prefix; its exits land back on this
                // token and continue with the current layer's families.
                let fam = &prev.0[self.left_ix[&p]];
                let mut out = Antichain::empty();
                for x in &fam.0 {
                    let mut combined = Antichain(vec![BitSet::empty(self.words)]);
                    for r_ix in x.iter_ones() {
                        let r = self.exits[r_ix];
                        combined = combined.cross_union(&e[r as usize]);
                        if combined.is_empty() {
                            break;
                        }
                    }
                    out = Antichain::union_of(out, &combined);
                }
                out
            }
            _ => unreachable!("moves are -1, 0, or 1"),
        }
    }
}

/// Materializes the summary DFA as a one-way automaton over framed words,
/// language-equal to the input. Requires an ε-free input.
pub fn to_nfa(aut: &A2fa, budget: usize) -> Result<Nfa, AutomataError> {
    let mut conv = Summarizer::new(aut, budget)?;
    let base: Vec<Token> = aut.base_alphabet().cloned().collect();

    let mut out = Nfa::new(base.iter().cloned());
    let pre = out.fresh_state("pre");
    out.initial = pre;
    let acc = out.fresh_state("acc");
    out.finals.insert(acc);

    let start = conv.start()?;
    let mut nfa_state: HashMap<usize, StateId> = HashMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let s0 = out.fresh_state(format!("s{start}"));
    nfa_state.insert(start, s0);
    out.add(pre, Token::Pct, s0);
    queue.push_back(start);
    let mut seen: BTreeSet<usize> = [start].into();
    while let Some(t) = queue.pop_front() {
        let from = nfa_state[&t];
        if conv.accepts_at_end(t) {
            out.add(from, Token::Amp, acc);
        }
        for tok in &base {
            let next = conv.step(t, tok)?;
            let to = *nfa_state.entry(next).or_insert_with(|| {
                out.fresh_state(format!("s{next}"))
            });
            out.add(from, tok.clone(), to);
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    Ok(out)
}

/// Exact emptiness: `None` iff the language is empty, otherwise a
/// shortest accepted (unframed) word.
pub fn is_empty_exact(aut: &A2fa, budget: usize) -> Result<Option<Vec<Token>>, AutomataError> {
    let nfa = to_nfa(aut, budget)?;
    Ok(nfa.shortest_word().map(strip_frame))
}

/// Bounded emptiness: a shortest accepted word of length ≤ `max_len`,
/// found by direct membership tests. Sound for non-emptiness only.
pub fn find_word_bounded(aut: &A2fa, max_len: usize) -> Option<Vec<Token>> {
    let base: Vec<Token> = aut.base_alphabet().cloned().collect();
    let mut layer: Vec<Vec<Token>> = vec![vec![]];
    for len in 0..=max_len {
        for w in &layer {
            if aut.accepts(w) {
                return Some(w.clone());
            }
        }
        if len == max_len {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|w| {
                base.iter().map(move |t| {
                    let mut w2 = w.clone();
                    w2.push(t.clone());
                    w2
                })
            })
            .collect();
    }
    None
}

pub fn strip_frame(framed: Vec<Token>) -> Vec<Token> {
    framed.into_iter().filter(|t| !t.is_frame()).collect()
}
