//! Depth-bounded trace semantics.
//!
//! `trace_bounded(t, n)` is the `n`-th iterate of the trace functional
//! from the empty table: the weights of completed traces of length below
//! `n`. In the `desimone` dialect every state may terminate, so these are
//! the partial traces. Words are stored first action first.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::model::{Model, StepResult};
use crate::monad::{dist_b, BElem, FormalSum};
use crate::semiring::{ExtRational, Semiring};
use crate::syntax::{ClosedTerm, Label};

/// A finite label word. Ordered by length first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(pub Vec<Label>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `a·w`
    pub fn prepend(&self, a: &Label) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a.clone());
        v.extend(self.0.iter().cloned());
        Word(v)
    }

    /// Labels as plain strings.
    pub fn letters(&self) -> Vec<&str> {
        self.0.iter().map(Label::as_str).collect()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    /// Single-letter labels are concatenated (`abc`); longer ones are
    /// separated by dots. The empty word prints as `ε`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let sep = if self.0.iter().all(|l| l.as_str().chars().count() == 1) {
            ""
        } else {
            "."
        };
        f.write_str(&self.letters().join(sep))
    }
}

/// Weights of label words.
pub type TraceTable<W> = FormalSum<Word, W>;

/// One application of the trace functional at `t`:
/// `Tβ ∘ μ ∘ T(δ^B ∘ Bf) ∘ γ`. Terms for which `f` yields `None` contribute
/// the empty table.
pub fn trace_functional<W: Semiring>(
    model: &Model<W>,
    t: &ClosedTerm,
    f: &mut dyn FnMut(&ClosedTerm) -> Result<Option<Arc<TraceTable<W>>>>,
) -> Result<TraceTable<W>> {
    apply_functional(&*model.step(t)?, f)
}

fn apply_functional<W: Semiring>(
    step: &StepResult<W>,
    f: &mut dyn FnMut(&ClosedTerm) -> Result<Option<Arc<TraceTable<W>>>>,
) -> Result<TraceTable<W>> {
    let mut pushed: FormalSum<FormalSum<BElem<Word>, W>, W> = FormalSum::zero();
    for (e, w) in step.iter() {
        let bf: BElem<TraceTable<W>> = match e {
            BElem::Stop => BElem::Stop,
            BElem::Step(a, u) => BElem::Step(
                a.clone(),
                f(u)?.map(|tt| (*tt).clone()).unwrap_or_default(),
            ),
        };
        pushed.add_entry(dist_b(&bf), w.clone());
    }
    Ok(pushed.flatten().map(|e| match e {
        BElem::Stop => Word::empty(),
        BElem::Step(a, w) => w.prepend(a),
    }))
}

/// The `depth`-fold iterate of the trace functional from `⊥`, memoized
/// in the model.
pub fn trace_bounded<W: Semiring>(
    model: &Model<W>,
    t: &ClosedTerm,
    depth: usize,
) -> Result<Arc<TraceTable<W>>> {
    model.spec().signature.check_term(t)?;
    bounded_rec(model, t, depth)
}

fn bounded_rec<W: Semiring>(
    model: &Model<W>,
    t: &ClosedTerm,
    depth: usize,
) -> Result<Arc<TraceTable<W>>> {
    if depth == 0 {
        return Ok(Arc::new(TraceTable::zero()));
    }
    let key = (t.clone(), depth);
    if let Some(hit) = model.traces.read().expect("lock").get(&key) {
        return Ok(hit.clone());
    }
    let step = model.step_checked(t)?;
    let table = apply_functional(&step, &mut |u| {
        bounded_rec(model, u, depth - 1).map(Some)
    })?;
    let table = Arc::new(table);
    model
        .traces
        .write()
        .expect("lock")
        .insert(key, table.clone());
    Ok(table)
}

/// Sum over all paths of length at most `max_len`: each path
/// `t = t₀ -a₁-> t₁ ⋯ -aₖ-> tₖ` contributes the product of its step weights
/// times the termination weight of `tₖ` to the word `a₁⋯aₖ`.
pub fn trace_direct<W: Semiring>(
    model: &Model<W>,
    t: &ClosedTerm,
    max_len: usize,
) -> Result<TraceTable<W>> {
    model.spec().signature.check_term(t)?;
    let mut out = TraceTable::zero();
    let mut stack = vec![(t.clone(), Vec::<Label>::new(), W::one())];
    while let Some((u, word, weight)) = stack.pop() {
        let step = model.step_checked(&u)?;
        for (e, w) in step.iter() {
            match e {
                BElem::Stop => out.add_entry(Word(word.clone()), weight.mul(w)),
                BElem::Step(a, v) if word.len() < max_len => {
                    let mut next = word.clone();
                    next.push(a.clone());
                    stack.push((v.clone(), next, weight.mul(w)));
                }
                BElem::Step(..) => {}
            }
        }
    }
    Ok(out)
}

pub fn total_mass<W: Semiring>(tt: &TraceTable<W>) -> W {
    tt.total()
}

/// Masses at or above `1 - AST_TOLERANCE` count as reaching one when no
/// exact answer is available.
pub const AST_TOLERANCE: f64 = 1e-6;

/// Largest reachable state space solved exactly.
pub const AST_STATE_CAP: usize = 10_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AstVerdict {
    /// Mass reached one (exactly, or within tolerance).
    Consistent,
    /// The termination probability is provably below one.
    NonAst,
    Inconclusive,
}

impl fmt::Display for AstVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AstVerdict::Consistent => "a.s.t.-consistent",
            AstVerdict::NonAst => "non-a.s.t.",
            AstVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AstReport {
    /// `(n, mass of trace_bounded(t, n))` for `n = 1..=max_depth`.
    pub masses: Vec<(usize, ExtRational)>,
    pub verdict: AstVerdict,
    /// True when the last mass is exactly one.
    pub exact: bool,
    /// Exact termination probability, when the reachable state space is
    /// finite and sub-probabilistic.
    pub limit: Option<ExtRational>,
    /// Size of the reachable state space, if finite (below the cap).
    pub reachable_states: Option<usize>,
    pub acyclic: Option<bool>,
}

/// Mass sequence and termination verdict for `t`.
///
/// With a finite reachable state space the termination probability is
/// solved exactly; a value below one is a definitive non-a.s.t. witness.
/// Otherwise the verdict rests on the bounded masses alone.
pub fn ast_estimate(
    model: &Model<ExtRational>,
    t: &ClosedTerm,
    max_depth: usize,
) -> Result<AstReport> {
    let mut masses = Vec::with_capacity(max_depth);
    for n in 1..=max_depth {
        let m = total_mass(&*trace_bounded(model, t, n)?);
        if let Some((_, prev)) = masses.last() {
            assert!(*prev <= m, "bounded trace masses must be monotone");
        }
        masses.push((n, m));
    }
    let last = masses
        .last()
        .map(|(_, m)| m.clone())
        .unwrap_or_else(ExtRational::zero);
    let exact = last.is_one();
    let near_one = exact || last.approx() >= 1.0 - AST_TOLERANCE;

    let graph = explore(model, t)?;
    let (reachable_states, acyclic, limit) = match &graph {
        Some(g) => (Some(g.states.len()), Some(g.acyclic()), g.absorption(0)),
        None => (None, None, None),
    };
    let verdict = match &limit {
        Some(p) if p.is_one() => AstVerdict::Consistent,
        Some(_) => AstVerdict::NonAst,
        None if near_one => AstVerdict::Consistent,
        None => AstVerdict::Inconclusive,
    };
    Ok(AstReport {
        masses,
        verdict,
        exact,
        limit,
        reachable_states,
        acyclic,
    })
}

struct Graph {
    states: Vec<ClosedTerm>,
    /// Per state: termination weight and weighted successor indices.
    stop: Vec<ExtRational>,
    succ: Vec<Vec<(usize, ExtRational)>>,
}

fn explore(model: &Model<ExtRational>, t: &ClosedTerm) -> Result<Option<Graph>> {
    let mut index: HashMap<ClosedTerm, usize> = HashMap::new();
    let mut g = Graph {
        states: vec![t.clone()],
        stop: Vec::new(),
        succ: Vec::new(),
    };
    index.insert(t.clone(), 0);
    let mut i = 0;
    while i < g.states.len() {
        if g.states.len() > AST_STATE_CAP {
            return Ok(None);
        }
        let step = model.step(&g.states[i])?;
        let mut succ: BTreeMap<usize, ExtRational> = BTreeMap::new();
        for (e, w) in step.iter() {
            if let BElem::Step(_, u) = e {
                let j = *index.entry(u.clone()).or_insert_with(|| {
                    g.states.push(u.clone());
                    g.states.len() - 1
                });
                let acc = succ.entry(j).or_insert_with(ExtRational::zero);
                *acc = acc.add(w);
            }
        }
        g.stop.push(step.weight(&BElem::Stop));
        g.succ.push(succ.into_iter().collect());
        i += 1;
    }
    Ok(Some(g))
}

impl Graph {
    fn acyclic(&self) -> bool {
        // Kahn's algorithm.
        let n = self.states.len();
        let mut indeg = vec![0usize; n];
        for s in &self.succ {
            for (j, _) in s {
                indeg[*j] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop() {
            seen += 1;
            for (j, _) in &self.succ[i] {
                indeg[*j] -= 1;
                if indeg[*j] == 0 {
                    queue.push(*j);
                }
            }
        }
        seen == n
    }

    /// Termination probability of `start`, solving `p = s + P p` over the
    /// states that can reach termination. `None` unless every weight is
    /// finite and every state has total outgoing weight at most one.
    fn absorption(&self, start: usize) -> Option<ExtRational> {
        let n = self.states.len();
        let mut stop = Vec::with_capacity(n);
        let mut succ: Vec<Vec<(usize, BigRational)>> = Vec::with_capacity(n);
        for i in 0..n {
            let s = self.stop[i].as_rational()?.clone();
            let mut total = s.clone();
            let mut row = Vec::new();
            for (j, w) in &self.succ[i] {
                let w = w.as_rational()?.clone();
                total += &w;
                row.push((*j, w));
            }
            if total > BigRational::one() {
                return None;
            }
            stop.push(s);
            succ.push(row);
        }

        // States from which termination has positive probability.
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, row) in succ.iter().enumerate() {
            for (j, _) in row {
                pred[*j].push(i);
            }
        }
        let mut live: BTreeSet<usize> = (0..n).filter(|&i| !stop[i].is_zero()).collect();
        let mut work: Vec<usize> = live.iter().copied().collect();
        while let Some(j) = work.pop() {
            for &i in &pred[j] {
                if live.insert(i) {
                    work.push(i);
                }
            }
        }
        if !live.contains(&start) {
            return Some(ExtRational::zero());
        }

        let order: Vec<usize> = live.iter().copied().collect();
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let m = order.len();
        // Augmented matrix [I - P | s].
        let mut a = vec![vec![BigRational::zero(); m + 1]; m];
        for (k, &i) in order.iter().enumerate() {
            a[k][k] = BigRational::one();
            for (j, w) in &succ[i] {
                if let Some(&c) = pos.get(j) {
                    a[k][c] -= w;
                }
            }
            a[k][m] = stop[i].clone();
        }
        let x = solve(a)?;
        Some(ExtRational::Finite(x[pos[&start]].clone()))
    }
}

/// Gauss-Jordan elimination on an augmented square system.
fn solve(mut a: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = BigRational::one() / &a[col][col];
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..=m {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[m].clone()).collect())
}
