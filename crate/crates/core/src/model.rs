//! The operational model on closed terms.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::law::Law;
use crate::monad::{BElem, FormalSum};
use crate::rules::{Conclusion, Dialect, Premise, RuleSpec, SemiringKind};
use crate::semiring::{Boolean, ExtRational, Semiring};
use crate::syntax::{enumerate_closed_terms, substitute, ClosedTerm, Substitution, Term, Var};
use crate::trace::TraceTable;

/// `γ(t)`: the weighted one-step behaviour of a closed term.
pub type StepResult<W> = FormalSum<BElem<ClosedTerm>, W>;

/// A compiled rule file with memo tables for steps and bounded traces.
///
/// Caches only ever hold values equal to a fresh recomputation, so a
/// shared model can be used from several threads.
#[derive(Debug)]
pub struct Model<W: Semiring> {
    law: Law<W>,
    steps: RwLock<HashMap<ClosedTerm, Arc<StepResult<W>>>>,
    pub(crate) traces: RwLock<HashMap<(ClosedTerm, usize), Arc<TraceTable<W>>>>,
}

impl<W: Semiring> Model<W> {
    pub fn new(spec: &RuleSpec) -> Result<Self> {
        Ok(Model {
            law: Law::new(spec)?,
            steps: RwLock::default(),
            traces: RwLock::default(),
        })
    }

    pub fn law(&self) -> &Law<W> {
        &self.law
    }

    pub fn spec(&self) -> &RuleSpec {
        self.law.spec()
    }

    /// `γ(f(t₁, …, tₙ))` via the composite law applied to the children and
    /// their (recursively computed) behaviours. Memoized.
    pub fn step(&self, t: &ClosedTerm) -> Result<Arc<StepResult<W>>> {
        self.spec().signature.check_term(t)?;
        self.step_checked(t)
    }

    pub(crate) fn step_checked(&self, t: &ClosedTerm) -> Result<Arc<StepResult<W>>> {
        if let Some(hit) = self.steps.read().expect("lock").get(t) {
            return Ok(hit.clone());
        }
        let (op, cs) = match t {
            Term::Node(op, cs) => (op, cs),
            Term::Leaf(never) => match *never {},
        };
        let mut args = Vec::with_capacity(cs.len());
        for c in cs {
            args.push((c.clone(), (*self.step_checked(c)?).clone()));
        }
        let result = Arc::new(self.law.bar_rho_step(op, &args)?.map(|e| e.map(Term::join)));
        self.steps
            .write()
            .expect("lock")
            .insert(t.clone(), result.clone());
        Ok(result)
    }

    /// Same as [`step`](Self::step) without touching the memo table.
    pub fn step_uncached(&self, t: &ClosedTerm) -> Result<StepResult<W>> {
        self.spec().signature.check_term(t)?;
        self.step_uncached_rec(t)
    }

    fn step_uncached_rec(&self, t: &ClosedTerm) -> Result<StepResult<W>> {
        let (op, cs) = match t {
            Term::Node(op, cs) => (op, cs),
            Term::Leaf(never) => match *never {},
        };
        let mut args = Vec::with_capacity(cs.len());
        for c in cs {
            args.push((c.clone(), self.step_uncached_rec(c)?));
        }
        Ok(self.law.bar_rho_step(op, &args)?.map(|e| e.map(Term::join)))
    }

    /// The per-rule summation formula, evaluated straight from the rule
    /// list: each rule contributes its weight times the product of the
    /// premise weights, for every choice of premise successors.
    pub fn step_direct(&self, t: &ClosedTerm) -> Result<StepResult<W>> {
        self.spec().signature.check_term(t)?;
        self.step_direct_rec(t)
    }

    fn step_direct_rec(&self, t: &ClosedTerm) -> Result<StepResult<W>> {
        let (op, cs) = match t {
            Term::Node(op, cs) => (op, cs),
            Term::Leaf(never) => match *never {},
        };
        let children: Vec<StepResult<W>> = cs
            .iter()
            .map(|c| self.step_direct_rec(c))
            .collect::<Result<_>>()?;
        let spec = self.spec();
        let mut out = FormalSum::zero();
        if spec.dialect == Dialect::DeSimone {
            out.add_entry(BElem::Stop, W::one());
        }
        for rule in spec.rules.iter().filter(|r| r.op == *op) {
            // Partial products: (weight so far, chosen successors).
            let mut partial: Vec<(W, Vec<(usize, ClosedTerm)>)> = vec![(W::one(), Vec::new())];
            for p in &rule.premises {
                let mut next = Vec::new();
                match p {
                    Premise::Trans { src, label, .. } => {
                        for (e, w) in children[src - 1].iter() {
                            if let BElem::Step(a, s) = e {
                                if a == label {
                                    for (acc, chosen) in &partial {
                                        let mut chosen = chosen.clone();
                                        chosen.push((*src, s.clone()));
                                        next.push((acc.mul(w), chosen));
                                    }
                                }
                            }
                        }
                    }
                    Premise::Term { src } => {
                        let w = children[src - 1].weight(&BElem::Stop);
                        for (acc, chosen) in &partial {
                            next.push((acc.mul(&w), chosen.clone()));
                        }
                    }
                }
                partial = next;
            }
            for (acc, chosen) in partial {
                match &rule.conclusion {
                    Conclusion::Labeled {
                        label,
                        weight,
                        target,
                    } => {
                        let mut sigma: Substitution<std::convert::Infallible> = Substitution::new();
                        for (i, c) in cs.iter().enumerate() {
                            sigma.insert(Var::x(i + 1), c.clone());
                        }
                        for (i, s) in chosen {
                            sigma.insert(Var::y(i), s);
                        }
                        let w = W::from_literal(weight).mul(&acc);
                        out.add_entry(BElem::Step(label.clone(), substitute(target, &sigma)?), w);
                    }
                    Conclusion::Terminate { weight } => {
                        out.add_entry(BElem::Stop, W::from_literal(weight).mul(&acc));
                    }
                    Conclusion::LabelledTermination { .. } => {
                        unreachable!("models are only built from executable rules")
                    }
                }
            }
        }
        Ok(out)
    }

    /// All terms reachable from `t` in at most `depth` transitions of
    /// nonzero weight, `t` included.
    pub fn reachable(&self, t: &ClosedTerm, depth: usize) -> Result<BTreeSet<ClosedTerm>> {
        self.spec().signature.check_term(t)?;
        let mut seen = BTreeSet::from([t.clone()]);
        let mut queue = VecDeque::from([(t.clone(), 0)]);
        while let Some((u, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for (e, _) in self.step_checked(&u)?.iter() {
                if let BElem::Step(_, v) = e {
                    if seen.insert(v.clone()) {
                        queue.push_back((v.clone(), d + 1));
                    }
                }
            }
        }
        Ok(seen)
    }

    /// Checks that every step result has total weight one, over all
    /// closed terms of size at most `size_bound` and everything they
    /// reach within `size_bound` transitions.
    pub fn check_probabilistic(&self, size_bound: usize) -> Result<ProbabilisticReport<W>> {
        if self.spec().semiring != SemiringKind::Rational {
            return Err(Error::NotApplicable(
                "probabilistic checks need the rational semiring".into(),
            ));
        }
        let mut checked = BTreeSet::new();
        for t in enumerate_closed_terms(&self.spec().signature, size_bound) {
            for u in self.reachable(&t, size_bound)? {
                if !checked.insert(u.clone()) {
                    continue;
                }
                let step = self.step_checked(&u)?;
                if !step.is_affine() {
                    return Ok(ProbabilisticReport {
                        size_bound,
                        terms_checked: checked.len(),
                        violator: Some((u, step.total())),
                    });
                }
            }
        }
        Ok(ProbabilisticReport {
            size_bound,
            terms_checked: checked.len(),
            violator: None,
        })
    }

    /// Drops all memoized steps and traces.
    pub fn clear_cache(&self) {
        self.steps.write().expect("lock").clear();
        self.traces.write().expect("lock").clear();
    }
}

/// Outcome of [`Model::check_probabilistic`]; the check is only as strong
/// as its size bound.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProbabilisticReport<W: Semiring> {
    pub size_bound: usize,
    pub terms_checked: usize,
    /// First term whose step mass is not one, with that mass.
    pub violator: Option<(ClosedTerm, W)>,
}

impl<W: Semiring> ProbabilisticReport<W> {
    pub fn passed(&self) -> bool {
        self.violator.is_none()
    }
}

/// A model over whichever semiring the rule file declares.
#[derive(Debug)]
pub enum AnyModel {
    Boolean(Model<Boolean>),
    Rational(Model<ExtRational>),
}

impl AnyModel {
    pub fn new(spec: &RuleSpec) -> Result<Self> {
        Ok(match spec.semiring {
            SemiringKind::Boolean => AnyModel::Boolean(Model::new(spec)?),
            SemiringKind::Rational => AnyModel::Rational(Model::new(spec)?),
        })
    }

    pub fn spec(&self) -> &RuleSpec {
        match self {
            AnyModel::Boolean(m) => m.spec(),
            AnyModel::Rational(m) => m.spec(),
        }
    }
}
