//! Bounded trace equivalence, congruence testing under contexts, and
//! counterexample search.
//!
//! A bounded comparison at depth `d` looks at words shorter than `d`. A
//! difference found there is definitive; agreement is evidence only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::rules::SemiringKind;
use crate::semiring::Semiring;
use crate::syntax::{enumerate_closed_terms, ClosedTerm, Signature, Term, Var};
use crate::trace::{trace_bounded, trace_direct, TraceTable, Word};

/// The hole of a [`Context`], printed `[]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Hole;

impl fmt::Display for Hole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[]")
    }
}

/// A closed term with exactly one hole.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Context {
    term: Term<Hole>,
}

impl Context {
    pub fn new(term: Term<Hole>) -> Result<Self> {
        let holes = term.leaves().len();
        if holes != 1 {
            return Err(Error::InvalidArgument(format!(
                "a context needs exactly one hole, found {holes}"
            )));
        }
        Ok(Context { term })
    }

    /// Reads a context from a term with a single variable occurrence,
    /// which becomes the hole: `par(x1, nil)`.
    pub fn from_var_term(term: &Term<Var>) -> Result<Self> {
        Context::new(term.map_leaves(&mut |_| Hole))
    }

    pub fn term(&self) -> &Term<Hole> {
        &self.term
    }

    /// `C[t]`
    pub fn fill(&self, t: &ClosedTerm) -> ClosedTerm {
        fill(&self.term, t)
    }

    /// Number of operations above the hole.
    pub fn hole_depth(&self) -> usize {
        fn go(t: &Term<Hole>) -> Option<usize> {
            match t {
                Term::Leaf(_) => Some(0),
                Term::Node(_, cs) => cs.iter().find_map(go).map(|d| d + 1),
            }
        }
        go(&self.term).expect("one hole")
    }

    pub fn size(&self) -> usize {
        self.term.size()
    }
}

fn fill(c: &Term<Hole>, t: &ClosedTerm) -> ClosedTerm {
    match c {
        Term::Leaf(_) => t.clone(),
        Term::Node(op, cs) => Term::Node(op.clone(), cs.iter().map(|c| fill(c, t)).collect()),
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.term)
    }
}

/// Equality of the bounded trace tables of `t` and `s`.
pub fn trace_equiv_bounded<W: Semiring>(
    model: &Model<W>,
    t: &ClosedTerm,
    s: &ClosedTerm,
    depth: usize,
) -> Result<bool> {
    Ok(trace_bounded(model, t, depth)? == trace_bounded(model, s, depth)?)
}

/// The least word (shorter first) on which two tables disagree, with both
/// weights.
pub fn distinguishing_word<W: Semiring>(
    a: &TraceTable<W>,
    b: &TraceTable<W>,
) -> Option<(Word, W, W)> {
    let words: BTreeSet<&Word> = a.support().chain(b.support()).collect();
    words.into_iter().find_map(|w| {
        let (x, y) = (a.weight(w), b.weight(w));
        (x != y).then(|| (w.clone(), x, y))
    })
}

/// Contexts for congruence tests, deterministic in `seed`.
///
/// First come all depth-one contexts `f(c₁, …, [], …, cₙ)` with the other
/// arguments filled by constants, in operation order; then random contexts
/// of size at most `max_size` until `count` are collected or fresh ones
/// stop turning up.
pub fn generate_contexts(
    sig: &Signature,
    count: usize,
    max_size: usize,
    seed: u64,
) -> Result<Vec<Context>> {
    if count == 0 {
        return Err(Error::InvalidArgument("context count must be at least 1".into()));
    }
    let constants: Vec<ClosedTerm> = sig
        .ops()
        .iter()
        .filter(|(_, n)| *n == 0)
        .map(|(op, _)| Term::Node(op.clone(), Vec::new()))
        .collect();
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (op, n) in sig.ops() {
        for pos in 0..*n {
            let mut idx = vec![0usize; n - 1];
            if *n > 1 && constants.is_empty() {
                continue;
            }
            loop {
                let mut others = idx.iter().map(|&i| constants[i].embed::<Hole>());
                let children: Vec<Term<Hole>> = (0..*n)
                    .map(|i| {
                        if i == pos {
                            Term::Leaf(Hole)
                        } else {
                            others.next().expect("n - 1 fillers")
                        }
                    })
                    .collect();
                let c = Context {
                    term: Term::Node(op.clone(), children),
                };
                if seen.insert(c.clone()) {
                    out.push(c);
                }
                if !bump(&mut idx, constants.len()) {
                    break;
                }
            }
        }
    }
    out.truncate(count);

    let wrappers: Vec<_> = sig.ops().iter().filter(|(_, n)| *n > 0).collect();
    let fillers = enumerate_closed_terms(sig, 3);
    if wrappers.is_empty() || (fillers.is_empty() && wrappers.iter().all(|(_, n)| *n > 1)) {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut misses = 0;
    while out.len() < count && misses < 1000 {
        let layers = rng.random_range(1..=max_size.max(2) - 1);
        let mut term = Term::Leaf(Hole);
        for _ in 0..layers {
            let (op, n) = wrappers[rng.random_range(0..wrappers.len())];
            if *n > 1 && fillers.is_empty() {
                continue;
            }
            let pos = rng.random_range(0..*n);
            let mut inner = Some(term.clone());
            let children: Vec<Term<Hole>> = (0..*n)
                .map(|i| {
                    if i == pos {
                        inner.take().expect("hole child")
                    } else {
                        fillers[rng.random_range(0..fillers.len())].embed()
                    }
                })
                .collect();
            let wrapped = Term::Node(op.clone(), children);
            if wrapped.size() > max_size {
                break;
            }
            term = wrapped;
        }
        let c = Context { term };
        if matches!(c.term, Term::Leaf(_)) || !seen.insert(c.clone()) {
            misses += 1;
            continue;
        }
        out.push(c);
    }
    Ok(out)
}

fn bump(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Two equivalent terms told apart by a context.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CongruenceViolation<W: Semiring> {
    pub left: ClosedTerm,
    pub right: ClosedTerm,
    pub context: Context,
    /// Least word on which `C[left]` and `C[right]` disagree.
    pub word: Word,
    pub left_weight: W,
    pub right_weight: W,
    /// Both weights were recomputed by path enumeration and matched.
    pub verified: bool,
}

impl<W: Semiring> CongruenceViolation<W> {
    pub fn left_filled(&self) -> ClosedTerm {
        self.context.fill(&self.left)
    }

    pub fn right_filled(&self) -> ClosedTerm {
        self.context.fill(&self.right)
    }
}

impl<W: Semiring> fmt::Display for CongruenceViolation<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} and {} differ under {} on word {}: {} vs {}",
            self.left, self.right, self.context, self.word, self.left_weight, self.right_weight
        )
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CongruenceReport<W: Semiring> {
    pub depth: usize,
    pub pairs_tested: usize,
    pub contexts_tested: usize,
    /// Supplied pairs that were not equivalent at the test depth.
    pub skipped: Vec<(ClosedTerm, ClosedTerm)>,
    pub violations: Vec<CongruenceViolation<W>>,
}

impl<W: Semiring> CongruenceReport<W> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations under deeper contexts for pairs that no depth-one
    /// context separates.
    pub fn anomalies(&self) -> Vec<&CongruenceViolation<W>> {
        let shallow: BTreeSet<(&ClosedTerm, &ClosedTerm)> = self
            .violations
            .iter()
            .filter(|v| v.context.hole_depth() == 1)
            .map(|v| (&v.left, &v.right))
            .collect();
        self.violations
            .iter()
            .filter(|v| v.context.hole_depth() > 1 && !shallow.contains(&(&v.left, &v.right)))
            .collect()
    }
}

/// Checks `C[t] ≈ C[s]` at `depth` for every pair and context.
pub fn congruence_test<W: Semiring>(
    model: &Model<W>,
    pairs: &[(ClosedTerm, ClosedTerm)],
    contexts: &[Context],
    depth: usize,
) -> Result<CongruenceReport<W>> {
    let mut report = CongruenceReport {
        depth,
        pairs_tested: 0,
        contexts_tested: contexts.len(),
        skipped: Vec::new(),
        violations: Vec::new(),
    };
    for (t, s) in pairs {
        if !trace_equiv_bounded(model, t, s, depth)? {
            report.skipped.push((t.clone(), s.clone()));
            continue;
        }
        report.pairs_tested += 1;
        for c in contexts {
            if let Some(v) = check_context(model, t, s, c, depth)? {
                report.violations.push(v);
            }
        }
    }
    Ok(report)
}

fn check_context<W: Semiring>(
    model: &Model<W>,
    t: &ClosedTerm,
    s: &ClosedTerm,
    c: &Context,
    depth: usize,
) -> Result<Option<CongruenceViolation<W>>> {
    let (ct, cs) = (c.fill(t), c.fill(s));
    let a = trace_bounded(model, &ct, depth)?;
    let b = trace_bounded(model, &cs, depth)?;
    let Some((word, x, y)) = distinguishing_word(&a, &b) else {
        return Ok(None);
    };
    let max_len = depth.saturating_sub(1);
    let verified = trace_direct(model, &ct, max_len)?.weight(&word) == x
        && trace_direct(model, &cs, max_len)?.weight(&word) == y;
    Ok(Some(CongruenceViolation {
        left: t.clone(),
        right: s.clone(),
        context: c.clone(),
        word,
        left_weight: x,
        right_weight: y,
        verified,
    }))
}

/// Whether the bounded table can stand in for the full trace. In the
/// rational semiring only tables of mass one qualify: then nothing is
/// left for longer words. Boolean tables always qualify (partial traces
/// are prefix closed).
fn complete<W: Semiring>(model: &Model<W>, table: &TraceTable<W>) -> bool {
    model.spec().semiring == SemiringKind::Boolean || table.total().is_one()
}

/// Pairs of distinct terms of size at most `size_bound` with equal
/// bounded traces. Terms are bucketed by trace table; each bucket's first
/// term is paired with every other member. Buckets are visited round
/// robin so the first pairs come from different classes.
pub fn equivalent_pairs<W: Semiring>(
    model: &Model<W>,
    size_bound: usize,
    depth: usize,
    max_pairs: usize,
) -> Result<Vec<(ClosedTerm, ClosedTerm)>> {
    let mut buckets: BTreeMap<Arc<TraceTable<W>>, Vec<ClosedTerm>> = BTreeMap::new();
    let mut order: Vec<Arc<TraceTable<W>>> = Vec::new();
    for t in enumerate_closed_terms(&model.spec().signature, size_bound) {
        let table = trace_bounded(model, &t, depth)?;
        if !complete(model, &table) {
            continue;
        }
        let bucket = buckets.entry(table.clone()).or_default();
        if bucket.is_empty() {
            order.push(table);
        }
        bucket.push(t);
    }
    let mut queues: Vec<(ClosedTerm, std::vec::IntoIter<ClosedTerm>)> = order
        .iter()
        .filter_map(|k| {
            let members = buckets.remove(k).expect("bucket");
            let mut it = members.into_iter();
            let rep = it.next()?;
            Some((rep, it.collect::<Vec<_>>().into_iter()))
        })
        .collect();
    let mut out = Vec::new();
    while out.len() < max_pairs {
        let mut progressed = false;
        for (rep, rest) in queues.iter_mut() {
            if out.len() == max_pairs {
                break;
            }
            if let Some(m) = rest.next() {
                out.push((rep.clone(), m));
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    Ok(out)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CounterexampleReport<W: Semiring> {
    pub size_bound: usize,
    pub depth: usize,
    pub terms_enumerated: usize,
    pub pairs_tested: usize,
    pub violation: Option<CongruenceViolation<W>>,
}

/// Streams the terms of size at most `size_bound` in enumeration order;
/// each term whose bounded traces match an earlier term is tested against
/// that earlier term under every context. Returns at the first
/// violation.
pub fn counterexample_search<W: Semiring>(
    model: &Model<W>,
    size_bound: usize,
    depth: usize,
    contexts: &[Context],
) -> Result<CounterexampleReport<W>> {
    let mut reps: BTreeMap<Arc<TraceTable<W>>, ClosedTerm> = BTreeMap::new();
    let mut report = CounterexampleReport {
        size_bound,
        depth,
        terms_enumerated: 0,
        pairs_tested: 0,
        violation: None,
    };
    for t in enumerate_closed_terms(&model.spec().signature, size_bound) {
        report.terms_enumerated += 1;
        let table = trace_bounded(model, &t, depth)?;
        if !complete(model, &table) {
            continue;
        }
        let Some(rep) = reps.get(&table) else {
            reps.insert(table, t);
            continue;
        };
        report.pairs_tested += 1;
        for c in contexts {
            if let Some(v) = check_context(model, rep, &t, c, depth)? {
                report.violation = Some(v);
                return Ok(report);
            }
        }
    }
    Ok(report)
}
