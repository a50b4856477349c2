//! Abstract syntax of nested regular expressions and their concrete syntax.
//!
//! The grammar, in EBNF:
//!
//! ```text
//! expr := alt
//! alt  := cat ("|" cat)*
//! cat  := post ("." post)*
//! post := prim ("*" | "+")*
//! prim := "eps" | "(" expr ")" | "[" expr "]" | label ["^-"]
//! ```
//!
//! Postfix `*`/`+` bind tightest, then `.`, then `|`. `[e]` is the
//! existential nesting test, `eps` the empty expression, and `label^-`
//! an inverse symbol. `e+` is sugar for `e . e*` and is expanded at
//! parse time; it never appears in the AST.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Characters that may not appear in an edge label.
pub const RESERVED_CHARS: &[char] = &[
    '^', '.', '|', '*', '+', '[', ']', '(', ')', '%', '&', '$',
];

/// Label strings that are reserved outright.
const RESERVED_WORDS: &[&str] = &["eps", "S", "E"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("reserved character `{ch}` in label at position {pos}")]
    ReservedChar { pos: usize, ch: char },
    #[error("`{word}` is reserved and cannot be used as a label")]
    ReservedWord { word: String },
    #[error("empty input")]
    Empty,
}

/// A directed edge symbol: a base label read forwards or backwards.
///
/// The full query alphabet is the base alphabet closed under inversion;
/// graph databases themselves only carry forward labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    base: String,
    inverse: bool,
}

impl Symbol {
    /// A forward symbol. Errors if the label contains reserved characters,
    /// whitespace, or is a reserved word.
    pub fn forward(label: &str) -> Result<Self, SyntaxError> {
        validate_label(label)?;
        Ok(Symbol {
            base: label.to_string(),
            inverse: false,
        })
    }

    /// An inverse symbol over the given base label.
    pub fn inverse(label: &str) -> Result<Self, SyntaxError> {
        Ok(Symbol::forward(label)?.invert())
    }

    /// Flips direction: `invert(invert(s)) == s`.
    pub fn invert(&self) -> Self {
        Symbol {
            base: self.base.clone(),
            inverse: !self.inverse,
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}^-", self.base)
        } else {
            write!(f, "{}", self.base)
        }
    }
}

pub fn validate_label(label: &str) -> Result<(), SyntaxError> {
    if label.is_empty() {
        return Err(SyntaxError::Parse {
            pos: 0,
            msg: "empty label".into(),
        });
    }
    if RESERVED_WORDS.contains(&label) {
        return Err(SyntaxError::ReservedWord {
            word: label.to_string(),
        });
    }
    for (i, ch) in label.char_indices() {
        if ch.is_whitespace() {
            return Err(SyntaxError::Parse {
                pos: i,
                msg: "whitespace in label".into(),
            });
        }
        if RESERVED_CHARS.contains(&ch) {
            return Err(SyntaxError::ReservedChar { pos: i, ch });
        }
    }
    Ok(())
}

/// A nested regular expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nre {
    Epsilon,
    Atom(Symbol),
    Concat(Box<Nre>, Box<Nre>),
    Alt(Box<Nre>, Box<Nre>),
    Star(Box<Nre>),
    Nest(Box<Nre>),
}

impl Nre {
    pub fn atom(sym: Symbol) -> Nre {
        Nre::Atom(sym)
    }

    pub fn concat(a: Nre, b: Nre) -> Nre {
        Nre::Concat(Box::new(a), Box::new(b))
    }

    pub fn alt(a: Nre, b: Nre) -> Nre {
        Nre::Alt(Box::new(a), Box::new(b))
    }

    pub fn star(e: Nre) -> Nre {
        Nre::Star(Box::new(e))
    }

    pub fn nest(e: Nre) -> Nre {
        Nre::Nest(Box::new(e))
    }

    /// `e+` as `e . e*`.
    pub fn plus(e: Nre) -> Nre {
        Nre::concat(e.clone(), Nre::star(e))
    }

    /// Node count of the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Nre::Epsilon | Nre::Atom(_) => 1,
            Nre::Concat(a, b) | Nre::Alt(a, b) => 1 + a.size() + b.size(),
            Nre::Star(e) | Nre::Nest(e) => 1 + e.size(),
        }
    }

    /// Nesting depth. Atoms (and epsilon) have depth 1, star preserves,
    /// concatenation and alternation take the maximum, and each nesting
    /// test adds one.
    pub fn nesting_depth(&self) -> usize {
        match self {
            Nre::Epsilon | Nre::Atom(_) => 1,
            Nre::Concat(a, b) | Nre::Alt(a, b) => a.nesting_depth().max(b.nesting_depth()),
            Nre::Star(e) => e.nesting_depth(),
            Nre::Nest(e) => e.nesting_depth() + 1,
        }
    }

    /// The set of base labels mentioned, sorted and deduplicated.
    pub fn base_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_labels(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_labels(&self, out: &mut Vec<String>) {
        match self {
            Nre::Epsilon => {}
            Nre::Atom(s) => out.push(s.base().to_string()),
            Nre::Concat(a, b) | Nre::Alt(a, b) => {
                a.collect_labels(out);
                b.collect_labels(out);
            }
            Nre::Star(e) | Nre::Nest(e) => e.collect_labels(out),
        }
    }
}

/// Parse the concrete syntax into an AST.
pub fn parse(text: &str) -> Result<Nre, SyntaxError> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        at: 0,
    };
    p.skip_ws();
    if p.eof() {
        return Err(SyntaxError::Empty);
    }
    let e = p.alt()?;
    p.skip_ws();
    if !p.eof() {
        return Err(SyntaxError::Parse {
            pos: p.pos(),
            msg: format!("unexpected `{}`", p.peek().unwrap()),
        });
    }
    Ok(e)
}

struct Parser {
    chars: Vec<(usize, char)>,
    at: usize,
}

impl Parser {
    fn eof(&self) -> bool {
        self.at >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars
            .get(self.at)
            .map(|&(i, _)| i)
            .unwrap_or_else(|| self.chars.last().map(|&(i, c)| i + c.len_utf8()).unwrap_or(0))
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.at += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.at += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.at += 1;
            Ok(())
        } else {
            Err(SyntaxError::Parse {
                pos: self.pos(),
                msg: format!("expected `{c}`"),
            })
        }
    }

    fn alt(&mut self) -> Result<Nre, SyntaxError> {
        let first = self.cat()?;
        self.skip_ws();
        if self.peek() == Some('|') {
            self.bump();
            let rest = self.alt()?;
            Ok(Nre::alt(first, rest))
        } else {
            Ok(first)
        }
    }

    fn cat(&mut self) -> Result<Nre, SyntaxError> {
        let first = self.post()?;
        self.skip_ws();
        if self.peek() == Some('.') {
            self.bump();
            let rest = self.cat()?;
            Ok(Nre::concat(first, rest))
        } else {
            Ok(first)
        }
    }

    fn post(&mut self) -> Result<Nre, SyntaxError> {
        let mut e = self.prim()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.bump();
                    e = Nre::star(e);
                }
                Some('+') => {
                    self.bump();
                    e = Nre::plus(e);
                }
                _ => return Ok(e),
            }
        }
    }

    fn prim(&mut self) -> Result<Nre, SyntaxError> {
        self.skip_ws();
        match self.peek() {
            None => Err(SyntaxError::Parse {
                pos: self.pos(),
                msg: "expected expression".into(),
            }),
            Some('(') => {
                self.bump();
                self.skip_ws();
                // `()` is an alternative spelling of eps
                if self.peek() == Some(')') {
                    self.bump();
                    return Ok(Nre::Epsilon);
                }
                let e = self.alt()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('[') => {
                self.bump();
                let e = self.alt()?;
                self.expect(']')?;
                Ok(Nre::nest(e))
            }
            Some(c) if c.is_whitespace() => unreachable!(),
            Some(_) => self.label(),
        }
    }

    fn label(&mut self) -> Result<Nre, SyntaxError> {
        let start = self.pos();
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() || RESERVED_CHARS.contains(&c) {
                break;
            }
            label.push(c);
            self.bump();
        }
        if label.is_empty() {
            return Err(SyntaxError::Parse {
                pos: start,
                msg: format!("expected label, found `{}`", self.peek().unwrap()),
            });
        }
        if label == "eps" {
            return Ok(Nre::Epsilon);
        }
        let inverse = if self.peek() == Some('^') {
            self.bump();
            if self.peek() == Some('-') {
                self.bump();
                true
            } else {
                return Err(SyntaxError::Parse {
                    pos: self.pos(),
                    msg: "expected `-` after `^`".into(),
                });
            }
        } else {
            false
        };
        let sym = if inverse {
            Symbol::inverse(&label)
        } else {
            Symbol::forward(&label)
        }
        .map_err(|e| match e {
            SyntaxError::ReservedChar { pos, ch } => SyntaxError::ReservedChar {
                pos: start + pos,
                ch,
            },
            other => other,
        })?;
        Ok(Nre::Atom(sym))
    }
}

/// Render an AST back to concrete syntax, with canonical parenthesization
/// so that `parse(render(e)) == e`.
pub fn render(e: &Nre) -> String {
    let mut s = String::new();
    render_prec(e, 0, &mut s);
    s
}

// Precedence levels: 0 alternation, 1 concatenation, 2 postfix.
fn render_prec(e: &Nre, min: u8, out: &mut String) {
    let prec = match e {
        Nre::Alt(..) => 0,
        Nre::Concat(..) => 1,
        _ => 2,
    };
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match e {
        Nre::Epsilon => out.push_str("eps"),
        Nre::Atom(s) => out.push_str(&s.to_string()),
        Nre::Alt(a, b) => {
            render_prec(a, 1, out);
            out.push_str(" | ");
            render_prec(b, 0, out);
        }
        Nre::Concat(a, b) => {
            render_prec(a, 2, out);
            out.push_str(" . ");
            render_prec(b, 1, out);
        }
        Nre::Star(inner) => {
            render_prec(inner, 2, out);
            // Stars of stars need no parens, but atoms/eps don't either;
            // only lower-precedence children were parenthesized above.
            out.push('*');
        }
        Nre::Nest(inner) => {
            out.push('[');
            render_prec(inner, 0, out);
            out.push(']');
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Nre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> Symbol {
        Symbol::forward(s).unwrap()
    }

    #[test]
    fn parse_example_one_query() {
        let e = parse("creator^- . partOf . series").unwrap();
        assert_eq!(
            e,
            Nre::concat(
                Nre::Atom(Symbol::inverse("creator").unwrap()),
                Nre::concat(Nre::Atom(sym("partOf")), Nre::Atom(sym("series"))),
            )
        );
    }

    #[test]
    fn parse_eps_forms() {
        assert_eq!(parse("eps").unwrap(), Nre::Epsilon);
        assert_eq!(parse("()").unwrap(), Nre::Epsilon);
    }

    #[test]
    fn parse_star_alt_nest() {
        let e = parse("(a | b)* . [c^-]").unwrap();
        assert_eq!(
            e,
            Nre::concat(
                Nre::star(Nre::alt(Nre::Atom(sym("a")), Nre::Atom(sym("b")))),
                Nre::nest(Nre::Atom(Symbol::inverse("c").unwrap())),
            )
        );
    }

    #[test]
    fn plus_is_sugar() {
        let e = parse("a+").unwrap();
        assert_eq!(
            e,
            Nre::concat(Nre::Atom(sym("a")), Nre::star(Nre::Atom(sym("a"))))
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse("a . . b") {
            Err(SyntaxError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert_eq!(parse(""), Err(SyntaxError::Empty));
        assert_eq!(parse("   "), Err(SyntaxError::Empty));
    }

    #[test]
    fn reserved_characters_rejected() {
        for bad in ["a%b", "a&b", "a$b"] {
            assert!(
                matches!(parse(bad), Err(SyntaxError::ReservedChar { .. })),
                "{bad} should be rejected"
            );
        }
        // `S` and `E` are reserved words.
        assert!(parse("S").is_err());
        assert!(parse("E . a").is_err());
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Nre::Epsilon), "eps");
        assert_eq!(render(&Nre::Atom(Symbol::inverse("a").unwrap())), "a^-");
        assert_eq!(
            render(&Nre::star(Nre::alt(Nre::Atom(sym("a")), Nre::Atom(sym("b"))))),
            "(a | b)*"
        );
    }

    #[test]
    fn nesting_depth_rules() {
        assert_eq!(parse("a").unwrap().nesting_depth(), 1);
        assert_eq!(parse("[[a] . b]").unwrap().nesting_depth(), 3);
        assert_eq!(parse("(a . [b])*").unwrap().nesting_depth(), 2);
        assert_eq!(parse("eps").unwrap().nesting_depth(), 1);
    }

    #[test]
    fn symbol_double_inverse() {
        let s = sym("a");
        assert_eq!(s.invert().invert(), s);
    }
}
