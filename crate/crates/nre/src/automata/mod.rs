//! Alternating two-way finite automata over marker-delimited words.
//!
//! Words are framed as `% w &`. Positions are 1-based over the framed
//! word; a run starts in the initial state positioned on the `&` and
//! accepts by assembling a finite computation tree all of whose leaves
//! sit past the end marker (position `|w|+2 + 1`) in final states.
//! Universal states require every transition-successor to accept,
//! existential states any one.
//!
//! Membership is decided as alternating reachability on the finite
//! configuration graph: a least fixpoint propagated backwards from
//! accepting configurations.

pub mod epsilon;
pub mod oneway;
pub mod summary;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::GammaToken;
use crate::syntax::Symbol;

#[derive(Debug, Error)]
pub enum AutomataError {
    #[error("state budget exceeded: {used} states (budget {budget})")]
    BudgetExceeded { used: usize, budget: usize },
    #[error("node budget exceeded while extracting a computation tree")]
    TreeBudgetExceeded,
    #[error("operation requires an epsilon-free automaton")]
    EpsilonPresent,
}

/// Endpoint marker symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Marker {
    S,
    E,
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marker::S => write!(f, "S"),
            Marker::E => write!(f, "E"),
        }
    }
}

/// One input token. A single type covers both word shapes handled by the
/// compilers: plain letters with optional `S`/`E` markers (semipaths) and
/// tree-encoding triples (k-branch semipaths).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    /// `%`, the start frame.
    Pct,
    /// `&`, the end frame.
    Amp,
    /// A letter from `Σ` (forward or inverse).
    Letter(Symbol),
    /// A standalone endpoint marker.
    Mark(Marker),
    /// A tree-encoding token.
    Gamma(GammaToken),
}

impl Token {
    /// The endpoint marker this token carries, if any. Tree-encoding
    /// tokens carry markers in their middle component.
    pub fn marker(&self) -> Option<Marker> {
        match self {
            Token::Mark(m) => Some(*m),
            Token::Gamma(g) => match g.mid {
                crate::graph::GammaMid::MarkS => Some(Marker::S),
                crate::graph::GammaMid::MarkE => Some(Marker::E),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_frame(&self) -> bool {
        matches!(self, Token::Pct | Token::Amp)
    }

    /// The token sequence of an encoded tree word.
    pub fn from_encoded(w: &crate::graph::EncodedWord) -> Vec<Token> {
        w.tokens.iter().cloned().map(Token::Gamma).collect()
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Pct => write!(f, "%"),
            Token::Amp => write!(f, "&"),
            Token::Letter(s) => write!(f, "{s}"),
            Token::Mark(m) => write!(f, "{m}"),
            Token::Gamma(g) => write!(f, "{g}"),
        }
    }
}

pub type StateId = u32;
pub type Move = i8;

/// An instantaneous description: state plus 1-based head position over
/// the framed word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    pub state: StateId,
    pub pos: usize,
}

/// A finite computation-tree witness.
#[derive(Debug, Clone)]
pub struct ComputationTree {
    pub config: Config,
    pub children: Vec<ComputationTree>,
}

impl ComputationTree {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn leaves(&self) -> Vec<&Config> {
        if self.children.is_empty() {
            vec![&self.config]
        } else {
            self.children.iter().flat_map(|c| c.leaves()).collect()
        }
    }
}

/// An alternating two-way finite automaton. `delta` keys pair a state
/// with either a token or `None` for an ε-transition; ε applies at every
/// readable position without consuming.
#[derive(Debug, Clone)]
pub struct A2fa {
    names: Vec<String>,
    pub universal: BTreeSet<StateId>,
    pub initial: StateId,
    pub finals: BTreeSet<StateId>,
    /// Construction bookkeeping: the single marked state, when present.
    pub marked: Option<StateId>,
    alphabet: BTreeSet<Token>,
    delta: BTreeMap<(StateId, Option<Token>), BTreeSet<(StateId, Move)>>,
}

impl A2fa {
    /// An automaton over the given non-frame tokens; `%` and `&` are
    /// added to the alphabet automatically.
    pub fn new(alphabet: impl IntoIterator<Item = Token>) -> Self {
        let mut alphabet: BTreeSet<Token> = alphabet.into_iter().collect();
        alphabet.insert(Token::Pct);
        alphabet.insert(Token::Amp);
        A2fa {
            names: Vec::new(),
            universal: BTreeSet::new(),
            initial: 0,
            finals: BTreeSet::new(),
            marked: None,
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

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.names.len() as StateId
    }

    pub fn alphabet(&self) -> &BTreeSet<Token> {
        &self.alphabet
    }

    /// Non-frame tokens.
    pub fn base_alphabet(&self) -> impl Iterator<Item = &Token> {
        self.alphabet.iter().filter(|t| !t.is_frame())
    }

    pub fn add(&mut self, q: StateId, tok: Token, p: StateId, mv: Move) {
        debug_assert!(matches!(mv, -1 | 0 | 1));
        debug_assert!(self.alphabet.contains(&tok), "token {tok} not in alphabet");
        self.delta.entry((q, Some(tok))).or_default().insert((p, mv));
    }

    pub fn add_eps(&mut self, q: StateId, p: StateId) {
        self.delta.entry((q, None)).or_default().insert((p, 0));
    }

    pub fn entries(&self, q: StateId, tok: &Token) -> impl Iterator<Item = (StateId, Move)> + '_ {
        self.delta
            .get(&(q, Some(tok.clone())))
            .into_iter()
            .flatten()
            .copied()
    }

    pub fn eps_entries(&self, q: StateId) -> impl Iterator<Item = (StateId, Move)> + '_ {
        self.delta.get(&(q, None)).into_iter().flatten().copied()
    }

    pub fn has_epsilon(&self) -> bool {
        self.delta.keys().any(|(_, t)| t.is_none())
    }

    pub fn delta_iter(
        &self,
    ) -> impl Iterator<Item = (&(StateId, Option<Token>), &BTreeSet<(StateId, Move)>)> {
        self.delta.iter()
    }

    /// Rewrites every `-1` entry to land in `via` instead of its target,
    /// returning the displaced (target, token) pairs. Used by the marking
    /// construction to make markers transparent to backward motion.
    pub(crate) fn retarget_backward_moves(
        &mut self,
        mut make_glide: impl FnMut(&mut Self, StateId) -> StateId,
    ) {
        let keys: Vec<(StateId, Option<Token>)> = self.delta.keys().cloned().collect();
        let mut glides: BTreeMap<StateId, StateId> = BTreeMap::new();
        for key in keys {
            let entries = self.delta.get(&key).cloned().unwrap_or_default();
            let mut rewritten = BTreeSet::new();
            for (p, m) in entries {
                if m == -1 {
                    let g = *glides
                        .entry(p)
                        .or_insert_with(|| make_glide(self, p));
                    rewritten.insert((g, -1));
                } else {
                    rewritten.insert((p, m));
                }
            }
            self.delta.insert(key, rewritten);
        }
    }

    /// The framed word for a base word.
    pub fn frame(word: &[Token]) -> Vec<Token> {
        let mut w = Vec::with_capacity(word.len() + 2);
        w.push(Token::Pct);
        w.extend_from_slice(word);
        w.push(Token::Amp);
        w
    }

    /// All transition-relation successors of a configuration over the
    /// framed word. ε-entries apply at any readable position.
    pub fn step(&self, framed: &[Token], c: &Config) -> Vec<Config> {
        let n = framed.len();
        let mut out = Vec::new();
        if c.pos < 1 || c.pos > n {
            return out;
        }
        let tok = &framed[c.pos - 1];
        let token_moves = self.entries(c.state, tok);
        let eps_moves = self.eps_entries(c.state);
        for (p, m) in token_moves.chain(eps_moves) {
            match m {
                0 => out.push(Config { state: p, pos: c.pos }),
                1 => out.push(Config {
                    state: p,
                    pos: c.pos + 1,
                }),
                -1 if c.pos > 1 => out.push(Config {
                    state: p,
                    pos: c.pos - 1,
                }),
                _ => {}
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn is_accepting_config(&self, n: usize, c: &Config) -> bool {
        c.pos == n + 1 && self.finals.contains(&c.state)
    }

    /// Membership of an unframed word.
    pub fn accepts(&self, word: &[Token]) -> bool {
        self.solve(word).0
    }

    /// Backward least-fixpoint over the configuration graph. Returns the
    /// verdict plus per-config winning rounds and existential choices,
    /// which `accepting_tree` replays.
    fn solve(&self, word: &[Token]) -> (bool, WinTable) {
        assert!(
            word.iter().all(|t| !t.is_frame()),
            "input word must not contain frame markers"
        );
        let framed = Self::frame(word);
        let n = framed.len();
        let nstates = self.state_count();
        let idx = |c: &Config| (c.state as usize) * (n + 1) + (c.pos - 1);

        // Forward adjacency and predecessor lists.
        let mut succs: Vec<Vec<Config>> = vec![Vec::new(); nstates * (n + 1)];
        let mut preds: Vec<Vec<Config>> = vec![Vec::new(); nstates * (n + 1)];
        for q in self.states() {
            for pos in 1..=n {
                let c = Config { state: q, pos };
                let ss = self.step(&framed, &c);
                for s in &ss {
                    preds[idx(s)].push(c);
                }
                succs[idx(&c)] = ss;
            }
        }

        let mut win = vec![false; nstates * (n + 1)];
        let mut round = vec![0u32; nstates * (n + 1)];
        let mut choice: Vec<Option<Config>> = vec![None; nstates * (n + 1)];
        let mut pending: Vec<usize> = succs.iter().map(|s| s.len()).collect();
        let mut queue: VecDeque<Config> = VecDeque::new();

        for &f in &self.finals {
            let c = Config {
                state: f,
                pos: n + 1,
            };
            win[idx(&c)] = true;
            queue.push_back(c);
        }

        while let Some(c) = queue.pop_front() {
            for &p in &preds[idx(&c)] {
                let pi = idx(&p);
                if win[pi] {
                    continue;
                }
                if self.universal.contains(&p.state) {
                    pending[pi] -= 1;
                    if pending[pi] == 0 {
                        win[pi] = true;
                        round[pi] = round[idx(&c)] + 1;
                        queue.push_back(p);
                    }
                } else {
                    win[pi] = true;
                    round[pi] = round[idx(&c)] + 1;
                    choice[pi] = Some(c);
                    queue.push_back(p);
                }
            }
        }

        let root = Config {
            state: self.initial,
            pos: n,
        };
        let accepted = win[idx(&root)];
        (
            accepted,
            WinTable {
                n,
                win,
                round,
                choice,
                succs,
            },
        )
    }

    /// Extracts some accepting computation tree, or `None` when the word
    /// is rejected. The node budget bounds pathological blowup and is
    /// reported distinctly.
    pub fn accepting_tree(
        &self,
        word: &[Token],
        node_budget: usize,
    ) -> Result<Option<ComputationTree>, AutomataError> {
        let (accepted, table) = self.solve(word);
        if !accepted {
            return Ok(None);
        }
        let root = Config {
            state: self.initial,
            pos: table.n,
        };
        let mut used = 0usize;
        let tree = self.build_tree(&table, root, node_budget, &mut used)?;
        Ok(Some(tree))
    }

    fn build_tree(
        &self,
        table: &WinTable,
        c: Config,
        budget: usize,
        used: &mut usize,
    ) -> Result<ComputationTree, AutomataError> {
        *used += 1;
        if *used > budget {
            return Err(AutomataError::TreeBudgetExceeded);
        }
        let idx = (c.state as usize) * (table.n + 1) + (c.pos - 1);
        // Accepting leaves have round 0.
        if table.round[idx] == 0 {
            return Ok(ComputationTree {
                config: c,
                children: Vec::new(),
            });
        }
        let mut children = Vec::new();
        if self.universal.contains(&c.state) {
            for s in &table.succs[idx] {
                children.push(self.build_tree(table, *s, budget, used)?);
            }
        } else {
            let next = table.choice[idx].expect("winning existential config has a choice");
            children.push(self.build_tree(table, next, budget, used)?);
        }
        Ok(ComputationTree { config: c, children })
    }

    /// GraphViz rendering: universal states double-circled, moves
    /// annotated with -1/0/+1, ε edges dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph a2fa {\n  rankdir=LR;\n");
        for q in self.states() {
            let shape = if self.universal.contains(&q) {
                "doublecircle"
            } else {
                "circle"
            };
            let style = if self.finals.contains(&q) {
                ",penwidth=2"
            } else {
                ""
            };
            let marked = if self.marked == Some(q) { " (marked)" } else { "" };
            out.push_str(&format!(
                "  q{} [label=\"{}{}\",shape={}{}];\n",
                q,
                self.state_name(q),
                marked,
                shape,
                style
            ));
        }
        out.push_str(&format!("  init [shape=point]; init -> q{};\n", self.initial));
        for ((q, tok), entries) in &self.delta {
            for (p, m) in entries {
                let label = match tok {
                    Some(t) => format!("{t}/{m:+}"),
                    None => format!("ε/{m:+}"),
                };
                let style = if tok.is_none() { ",style=dashed" } else { "" };
                out.push_str(&format!(
                    "  q{q} -> q{p} [label=\"{label}\"{style}];\n"
                ));
            }
        }
        out.push_str("}\n");
        out
    }

    /// JSON export of the full tuple, deterministic field order.
    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .states()
            .map(|q| {
                serde_json::json!({
                    "id": q,
                    "name": self.state_name(q),
                    "universal": self.universal.contains(&q),
                    "final": self.finals.contains(&q),
                    "marked": self.marked == Some(q),
                })
            })
            .collect();
        let transitions: Vec<serde_json::Value> = self
            .delta
            .iter()
            .flat_map(|((q, tok), entries)| {
                let tok = tok.as_ref().map(|t| t.to_string());
                entries.iter().map(move |(p, m)| {
                    serde_json::json!({
                        "from": q,
                        "token": tok.clone().unwrap_or_else(|| "ε".to_string()),
                        "to": p,
                        "move": m,
                    })
                })
            })
            .collect();
        serde_json::json!({
            "initial": self.initial,
            "alphabet": self.alphabet.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "states": states,
            "transitions": transitions,
        })
    }
}

struct WinTable {
    n: usize,
    #[allow(dead_code)]
    win: Vec<bool>,
    round: Vec<u32>,
    choice: Vec<Option<Config>>,
    succs: Vec<Vec<Config>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letter(s: &str) -> Token {
        Token::Letter(Symbol::forward(s).unwrap())
    }

    /// Hand-built two-way automaton accepting words whose last letter is
    /// `x`: scan one step back from &, read x, run to the end.
    fn ends_with_x() -> A2fa {
        let x = letter("x");
        let y = letter("y");
        let mut a = A2fa::new([x.clone(), y.clone()]);
        let q0 = a.fresh_state("q0");
        let q1 = a.fresh_state("q1");
        let qf = a.fresh_state("qf");
        a.initial = q0;
        a.finals.insert(qf);
        // From &, step back onto the last letter.
        a.add(q0, Token::Amp, q1, -1);
        a.add(q1, x.clone(), qf, 1);
        a.add(qf, Token::Amp, qf, 1);
        a
    }

    #[test]
    fn step_rules() {
        let a = ends_with_x();
        let framed = A2fa::frame(&[letter("x")]);
        // δ(q1,x) = {(qf,+1)} at position 2 moves to position 3.
        let succ = a.step(&framed, &Config { state: 1, pos: 2 });
        assert_eq!(succ, vec![Config { state: 2, pos: 3 }]);
        // -1 at position 1 is excluded.
        let mut a2 = ends_with_x();
        a2.add(1, Token::Pct, 0, -1);
        assert!(a2.step(&framed, &Config { state: 1, pos: 1 }).is_empty());
        // No delta entry: empty successor set.
        assert!(a.step(&framed, &Config { state: 2, pos: 1 }).is_empty());
    }

    #[test]
    fn accepts_last_letter_check() {
        let a = ends_with_x();
        assert!(a.accepts(&[letter("x")]));
        assert!(a.accepts(&[letter("y"), letter("x")]));
        assert!(!a.accepts(&[]));
        assert!(!a.accepts(&[letter("x"), letter("y")]));
    }

    #[test]
    fn universal_state_requires_all_branches() {
        // From &, a universal state forks to two checks: one expects x at
        // position 2, the other expects y — only "xy"… cannot both hold at
        // the same position, so build: u step -1 twice lands on first
        // letter; branch A accepts x there, branch B moves right then
        // accepts y. Word must be exactly "x y".
        let x = letter("x");
        let y = letter("y");
        let mut a = A2fa::new([x.clone(), y.clone()]);
        let u = a.fresh_state("u");
        let b1 = a.fresh_state("b1");
        let b2 = a.fresh_state("b2");
        let mid = a.fresh_state("mid");
        let qf = a.fresh_state("qf");
        a.initial = u;
        a.universal.insert(u);
        a.finals.insert(qf);
        a.add(u, Token::Amp, b1, -1);
        a.add(u, Token::Amp, b2, -1);
        // b1: walk left to %, check x right after it.
        a.add(b1, x.clone(), b1, -1);
        a.add(b1, y.clone(), b1, -1);
        a.add(b1, Token::Pct, mid, 1);
        a.add(mid, x.clone(), qf, 1);
        // b2: expect y directly before &.
        a.add(b2, y.clone(), qf, 1);
        // run to the end
        a.add(qf, x.clone(), qf, 1);
        a.add(qf, y.clone(), qf, 1);
        a.add(qf, Token::Amp, qf, 1);

        assert!(a.accepts(&[x.clone(), y.clone()]));
        assert!(!a.accepts(&[x.clone(), x.clone()]));
        assert!(!a.accepts(&[y.clone(), y.clone()]));

        let tree = a
            .accepting_tree(&[x.clone(), y.clone()], 10_000)
            .unwrap()
            .unwrap();
        // The universal root has exactly its two successors as children.
        assert_eq!(tree.children.len(), 2);
        let framed_len = 4;
        for leaf in tree.leaves() {
            assert_eq!(leaf.pos, framed_len + 1);
            assert!(a.finals.contains(&leaf.state));
        }
    }

    #[test]
    fn tree_none_when_rejected() {
        let a = single_x();
        assert!(a.accepting_tree(&[], 1000).unwrap().is_none());
    }
}
