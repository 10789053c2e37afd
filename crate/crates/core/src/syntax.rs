//! Signatures, terms and substitution.
//!
//! A [`Term`] is a finite tree of operation symbols whose leaves carry an
//! arbitrary payload. The same type covers rule terms (`Term<Var>`), closed
//! terms (`Term<Infallible>`, see [`ClosedTerm`]), terms over states of some
//! carrier and terms whose leaves are formal sums.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::convert::Infallible;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An action label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: &str) -> Self {
        Label(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An operation symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpSym(Arc<str>);

impl OpSym {
    pub fn new(name: &str) -> Self {
        OpSym(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for OpSym {
    fn from(s: &str) -> Self {
        OpSym::new(s)
    }
}

impl fmt::Debug for OpSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for OpSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite signature together with the label alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    ops: Vec<(OpSym, usize)>,
    labels: Vec<Label>,
    arity: HashMap<OpSym, usize>,
}

impl Signature {
    pub fn new(ops: Vec<(OpSym, usize)>, labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Signature("at least one label is required".into()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Signature(format!("duplicate label `{l}`")));
            }
        }
        let mut arity = HashMap::new();
        for (op, n) in &ops {
            if Var::parse(op.as_str()).is_some() {
                return Err(Error::Signature(format!(
                    "`{op}` is reserved for variables"
                )));
            }
            if arity.insert(op.clone(), *n).is_some() {
                return Err(Error::Signature(format!("duplicate operation `{op}`")));
            }
        }
        Ok(Signature { ops, labels, arity })
    }

    /// Operations in declaration order.
    pub fn ops(&self) -> &[(OpSym, usize)] {
        &self.ops
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn arity(&self, op: &OpSym) -> Option<usize> {
        self.arity.get(op).copied()
    }

    pub fn op(&self, name: &str) -> Option<OpSym> {
        self.ops
            .iter()
            .find(|(o, _)| o.as_str() == name)
            .map(|(o, _)| o.clone())
    }

    pub fn label(&self, name: &str) -> Option<Label> {
        self.labels.iter().find(|l| l.as_str() == name).cloned()
    }

    pub fn has_label(&self, label: &Label) -> bool {
        self.labels.contains(label)
    }

    /// Checks that every node names a declared operation with the right
    /// number of children.
    pub fn check_term<L>(&self, term: &Term<L>) -> Result<()> {
        match term {
            Term::Leaf(_) => Ok(()),
            Term::Node(op, children) => {
                let expected = self
                    .arity(op)
                    .ok_or_else(|| Error::UnknownOp(op.to_string()))?;
                if expected != children.len() {
                    return Err(Error::Arity {
                        op: op.to_string(),
                        expected,
                        found: children.len(),
                    });
                }
                children.iter().try_for_each(|c| self.check_term(c))
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarKind {
    /// Source variables `x_i`: the arguments of the operation.
    X,
    /// Successor variables `y_i`: where argument `i` moved to.
    Y,
}

/// A rule variable `x<i>` or `y<i>` with `i >= 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub kind: VarKind,
    pub index: usize,
}

impl Var {
    pub fn x(index: usize) -> Self {
        Var {
            kind: VarKind::X,
            index,
        }
    }

    pub fn y(index: usize) -> Self {
        Var {
            kind: VarKind::Y,
            index,
        }
    }

    /// Recognises `x<digits>` / `y<digits>`. Index zero is returned as well
    /// so callers can report it.
    pub fn parse(text: &str) -> Option<Var> {
        let kind = match text.as_bytes().first()? {
            b'x' => VarKind::X,
            b'y' => VarKind::Y,
            _ => return None,
        };
        let digits = &text[1..];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(Var {
            kind,
            index: digits.parse().ok()?,
        })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            VarKind::X => 'x',
            VarKind::Y => 'y',
        };
        write!(f, "{k}{}", self.index)
    }
}

/// A finite tree over a signature with payload-carrying leaves.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term<L> {
    Leaf(L),
    Node(OpSym, Vec<Term<L>>),
}

/// A term without leaves.
pub type ClosedTerm = Term<Infallible>;

/// Simultaneous assignment of terms to variables.
pub type Substitution<L> = BTreeMap<Var, Term<L>>;

impl<L> Term<L> {
    pub fn node(op: impl Into<OpSym>, children: Vec<Term<L>>) -> Self {
        Term::Node(op.into(), children)
    }

    pub fn constant(op: impl Into<OpSym>) -> Self {
        Term::Node(op.into(), Vec::new())
    }

    /// Number of nodes and leaves.
    pub fn size(&self) -> usize {
        match self {
            Term::Leaf(_) => 1,
            Term::Node(_, cs) => 1 + cs.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Term::Leaf(l) => out.push(l),
            Term::Node(_, cs) => cs.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn map_leaves<M>(&self, f: &mut impl FnMut(&L) -> M) -> Term<M> {
        match self {
            Term::Leaf(l) => Term::Leaf(f(l)),
            Term::Node(op, cs) => {
                Term::Node(op.clone(), cs.iter().map(|c| c.map_leaves(f)).collect())
            }
        }
    }

    /// Replaces every leaf by a term.
    pub fn bind<M, E>(&self, f: &mut impl FnMut(&L) -> Result<Term<M>, E>) -> Result<Term<M>, E> {
        match self {
            Term::Leaf(l) => f(l),
            Term::Node(op, cs) => Ok(Term::Node(
                op.clone(),
                cs.iter().map(|c| c.bind(f)).collect::<Result<_, E>>()?,
            )),
        }
    }

    /// The term without leaves, if it has none.
    pub fn to_closed(&self) -> Option<ClosedTerm> {
        match self {
            Term::Leaf(_) => None,
            Term::Node(op, cs) => Some(Term::Node(
                op.clone(),
                cs.iter().map(Term::to_closed).collect::<Option<_>>()?,
            )),
        }
    }
}

impl<L: Clone> Term<Term<L>> {
    /// Flattens a term of terms (the multiplication of the free monad).
    pub fn join(&self) -> Term<L> {
        match self {
            Term::Leaf(t) => t.clone(),
            Term::Node(op, cs) => Term::Node(op.clone(), cs.iter().map(Term::join).collect()),
        }
    }
}

impl ClosedTerm {
    /// Views a closed term as a term over any leaf type.
    pub fn embed<M>(&self) -> Term<M> {
        self.map_leaves(&mut |never| match *never {})
    }
}

impl<L: fmt::Display> fmt::Display for Term<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Leaf(l) => write!(f, "{l}"),
            Term::Node(op, cs) if cs.is_empty() => write!(f, "{op}"),
            Term::Node(op, cs) => {
                write!(f, "{op}(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// True iff no variable occurs more than once.
pub fn is_affine_term(t: &Term<Var>) -> bool {
    let mut seen = HashSet::new();
    t.leaves().into_iter().all(|v| seen.insert(*v))
}

/// Simultaneous substitution; every variable of `t` must be bound.
pub fn substitute<L: Clone>(t: &Term<Var>, sigma: &Substitution<L>) -> Result<Term<L>> {
    t.bind(&mut |v| {
        sigma
            .get(v)
            .cloned()
            .ok_or_else(|| Error::UnboundVariable(v.to_string()))
    })
}

/// All closed terms with at most `max_size` nodes, ordered by size, then
/// operation declaration order, then lexicographically on the children's
/// positions in this same order.
pub fn enumerate_closed_terms(sig: &Signature, max_size: usize) -> Vec<ClosedTerm> {
    let mut by_size: Vec<Vec<ClosedTerm>> = vec![Vec::new()];
    for size in 1..=max_size {
        let mut layer = Vec::new();
        for (op, arity) in sig.ops() {
            if *arity == 0 {
                if size == 1 {
                    layer.push(Term::Node(op.clone(), Vec::new()));
                }
            } else if size > *arity {
                let mut prefix = Vec::with_capacity(*arity);
                children_tuples(&by_size, size - 1, *arity, &mut prefix, &mut |cs| {
                    layer.push(Term::Node(op.clone(), cs.to_vec()))
                });
            }
        }
        by_size.push(layer);
    }
    by_size.into_iter().flatten().collect()
}

fn children_tuples(
    by_size: &[Vec<ClosedTerm>],
    remaining: usize,
    slots: usize,
    prefix: &mut Vec<ClosedTerm>,
    emit: &mut impl FnMut(&[ClosedTerm]),
) {
    if slots == 1 {
        for t in &by_size[remaining] {
            prefix.push(t.clone());
            emit(prefix);
            prefix.pop();
        }
        return;
    }
    for k in 1..=remaining - (slots - 1) {
        for t in &by_size[k] {
            prefix.push(t.clone());
            children_tuples(by_size, remaining - k, slots - 1, prefix, emit);
            prefix.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing and term parsing, shared with the rule file parser.

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Meta(String),
    Number(String),
    /// Raw text between `[` and `]`.
    Bracket(String),
    LParen,
    RParen,
    Comma,
    Star,
    Colon,
    Minus,
    Arrow,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Meta(s) => write!(f, "`@{s}`"),
            Tok::Bracket(s) => write!(f, "`[{s}]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Arrow => f.write_str("`->`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Token stream for one line of input. Columns are 1-based.
pub(crate) struct Tokens {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Tokens {
    pub(crate) fn lex(text: &str, line: usize) -> Result<Self> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        let err = |col: usize, msg: String| Error::Syntax {
            line,
            column: col + 1,
            message: msg,
        };
        while i < chars.len() {
            let c = chars[i];
            let start = i;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let tok = if is_ident_start(c) {
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                Tok::Ident(chars[start..i].iter().collect())
            } else if c == '@' {
                i += 1;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                if i == start + 1 {
                    return Err(err(start, "expected metavariable name after `@`".into()));
                }
                Tok::Meta(chars[start + 1..i].iter().collect())
            } else if c.is_ascii_digit() {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                Tok::Number(chars[start..i].iter().collect())
            } else if c == '[' {
                let close = chars[i..]
                    .iter()
                    .position(|&d| d == ']')
                    .ok_or_else(|| err(start, "unterminated `[`".into()))?;
                i += close + 1;
                Tok::Bracket(chars[start + 1..i - 1].iter().collect())
            } else {
                i += 1;
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '*' => Tok::Star,
                    ':' => Tok::Colon,
                    '-' if chars.get(i) == Some(&'>') => {
                        i += 1;
                        Tok::Arrow
                    }
                    '-' => Tok::Minus,
                    other => return Err(err(start, format!("unexpected character `{other}`"))),
                }
            };
            toks.push((tok, start + 1));
        }
        Ok(Tokens {
            toks,
            pos: 0,
            line,
            end_col: chars.len() + 1,
        })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    pub(crate) fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Column of the next token (or end of line).
    pub(crate) fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.column(), message)
    }

    pub(crate) fn error_at(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    pub(crate) fn expect(&mut self, tok: Tok, wanted: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    pub(crate) fn ident(&mut self, wanted: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    /// `term ::= var | ident [ '(' term { ',' term } ')' ]`
    pub(crate) fn term(&mut self) -> Result<Term<Var>> {
        let col = self.column();
        let name = self.ident("a term")?;
        if let Some(v) = Var::parse(&name) {
            if v.index == 0 {
                return Err(
                    self.error_at(col, format!("variable `{name}` must have a positive index"))
                );
            }
            if self.peek() == Some(&Tok::LParen) {
                return Err(self.error(format!("variable `{name}` cannot take arguments")));
            }
            return Ok(Term::Leaf(v));
        }
        let mut children = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                children.push(self.term()?);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.unexpected("`,` or `)`")),
                }
            }
        }
        Ok(Term::Node(OpSym::new(&name), children))
    }
}

/// Parses a term in the text grammar: identifiers with optional
/// parenthesised, comma-separated children; `x<n>` and `y<n>` are variables.
pub fn parse_term(text: &str) -> Result<Term<Var>> {
    let mut toks = Tokens::lex(text, 1)?;
    let t = toks.term()?;
    if !toks.at_end() {
        return Err(toks.unexpected("end of input"));
    }
    Ok(t)
}

/// Canonical text of a term; inverse of [`parse_term`].
pub fn print_term<L: fmt::Display>(t: &Term<L>) -> String {
    t.to_string()
}

/// Parses a closed term and checks it against the signature.
pub fn parse_closed_term(sig: &Signature, text: &str) -> Result<ClosedTerm> {
    let t = parse_term(text)?;
    if let Some(v) = t.leaves().first() {
        return Err(Error::InvalidArgument(format!(
            "term `{text}` is not closed (contains `{v}`)"
        )));
    }
    sig.check_term(&t)?;
    Ok(t.to_closed().expect("no leaves"))
}
