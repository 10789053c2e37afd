//! Finite formal sums as a monad, the one-step behaviour functors and the
//! distributive laws that push formal sums through syntax and behaviour.
//!
//! A [`FormalSum`] over the [`Boolean`](crate::Boolean) semiring is a finite
//! set; over [`ExtRational`](crate::ExtRational) it is a finitely supported
//! weight function into `[0, inf]`. Sums are always kept canonical: no entry
//! carries weight zero, so derived equality is semantic equality.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::Semiring;
use crate::syntax::{Label, OpSym, Signature, Term};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FormalSum<X: Ord, W> {
    entries: BTreeMap<X, W>,
}

impl<X: Ord, W: Semiring> Default for FormalSum<X, W> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<X: Ord, W: Semiring> FormalSum<X, W> {
    /// The empty sum, which is also the least element `⊥`.
    pub fn zero() -> Self {
        FormalSum {
            entries: BTreeMap::new(),
        }
    }

    /// `x ↦ 1·x`.
    pub fn unit(x: X) -> Self {
        let mut s = Self::zero();
        s.entries.insert(x, W::one());
        s
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (X, W)>) -> Self {
        let mut s = Self::zero();
        for (x, w) in entries {
            s.add_entry(x, w);
        }
        s
    }

    /// Adds `w·x`, merging with an existing entry for `x`.
    pub fn add_entry(&mut self, x: X, w: W) {
        if w.is_zero() {
            return;
        }
        match self.entries.get_mut(&x) {
            Some(old) => {
                *old = old.add(&w);
                if old.is_zero() {
                    self.entries.remove(&x);
                }
            }
            None => {
                self.entries.insert(x, w);
            }
        }
    }

    pub fn weight(&self, x: &X) -> W {
        self.entries.get(x).cloned().unwrap_or_else(W::zero)
    }

    pub fn contains(&self, x: &X) -> bool {
        self.entries.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&X, &W)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &X> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Functor action; weights of colliding images add up.
    pub fn map<Y: Ord>(&self, mut f: impl FnMut(&X) -> Y) -> FormalSum<Y, W> {
        FormalSum::from_entries(self.entries.iter().map(|(x, w)| (f(x), w.clone())))
    }

    /// Kleisli extension: `Σ rᵢ·xᵢ ↦ Σ rᵢ·f(xᵢ)` computed inside the monad.
    pub fn bind<Y: Ord>(&self, mut f: impl FnMut(&X) -> FormalSum<Y, W>) -> FormalSum<Y, W> {
        let mut out = FormalSum::zero();
        for (x, w) in &self.entries {
            for (y, v) in f(x).entries {
                out.add_entry(y, w.mul(&v));
            }
        }
        out
    }

    /// Fallible variant of [`bind`](Self::bind).
    pub fn try_bind<Y: Ord, E>(
        &self,
        mut f: impl FnMut(&X) -> Result<FormalSum<Y, W>, E>,
    ) -> Result<FormalSum<Y, W>, E> {
        let mut out = FormalSum::zero();
        for (x, w) in &self.entries {
            for (y, v) in f(x)?.entries {
                out.add_entry(y, w.mul(&v));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, r: &W) -> Self
    where
        X: Clone,
    {
        FormalSum::from_entries(self.entries.iter().map(|(x, w)| (x.clone(), r.mul(w))))
    }

    /// Pointwise sum.
    pub fn plus(&self, other: &Self) -> Self
    where
        X: Clone,
    {
        let mut out = self.clone();
        for (x, w) in &other.entries {
            out.add_entry(x.clone(), w.clone());
        }
        out
    }

    /// Semiring sum of all weights.
    pub fn total(&self) -> W {
        self.entries.values().fold(W::zero(), |acc, w| acc.add(w))
    }

    /// Total weight equals one: a nonempty set, or a probability
    /// distribution.
    pub fn is_affine(&self) -> bool {
        self.total().is_one()
    }

    /// Pointwise order `⊑`.
    pub fn le(&self, other: &Self) -> bool {
        self.entries.iter().all(|(x, w)| *w <= other.weight(x))
    }

    pub fn into_entries(self) -> impl Iterator<Item = (X, W)> {
        self.entries.into_iter()
    }
}

impl<X: Ord + Clone, W: Semiring> FormalSum<FormalSum<X, W>, W> {
    /// Monad multiplication: `Σ rᵢ·(Σ rᵢⱼ·xᵢⱼ) ↦ Σ Σ rᵢ·rᵢⱼ·xᵢⱼ`.
    pub fn flatten(&self) -> FormalSum<X, W> {
        self.bind(|inner| inner.clone())
    }
}

impl<X: Ord + fmt::Display, W: fmt::Display> fmt::Display for FormalSum<X, W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, w)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}: {w}")?;
        }
        f.write_str("}")
    }
}

/// Tagged disjoint union `X ⊎ Y`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Either<X, Y> {
    Left(X),
    Right(Y),
}

/// `j : TX × TY ≅ T(X ⊎ Y)`.
pub fn pair_join<X: Ord + Clone, Y: Ord + Clone, W: Semiring>(
    s: &FormalSum<X, W>,
    t: &FormalSum<Y, W>,
) -> FormalSum<Either<X, Y>, W> {
    let left = s.iter().map(|(x, w)| (Either::Left(x.clone()), w.clone()));
    let right = t.iter().map(|(y, w)| (Either::Right(y.clone()), w.clone()));
    FormalSum::from_entries(left.chain(right))
}

/// Inverse of [`pair_join`].
pub fn pair_split<X: Ord + Clone, Y: Ord + Clone, W: Semiring>(
    s: &FormalSum<Either<X, Y>, W>,
) -> (FormalSum<X, W>, FormalSum<Y, W>) {
    let mut left = FormalSum::zero();
    let mut right = FormalSum::zero();
    for (e, w) in s.iter() {
        match e {
            Either::Left(x) => left.add_entry(x.clone(), w.clone()),
            Either::Right(y) => right.add_entry(y.clone(), w.clone()),
        }
    }
    (left, right)
}

/// Independent product of sums: every choice of one entry per factor,
/// weighted by the product of the chosen weights.
pub fn product<X: Ord + Clone, W: Semiring>(factors: &[FormalSum<X, W>]) -> FormalSum<Vec<X>, W> {
    let mut acc: Vec<(Vec<X>, W)> = vec![(Vec::with_capacity(factors.len()), W::one())];
    for factor in factors {
        let mut next = Vec::with_capacity(acc.len() * factor.len());
        for (prefix, w) in &acc {
            for (x, v) in factor.iter() {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push((p, w.mul(v)));
            }
        }
        acc = next;
    }
    FormalSum::from_entries(acc)
}

/// One observable step: a labelled successor or termination.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BElem<X> {
    Step(Label, X),
    Stop,
}

impl<X> BElem<X> {
    pub fn map<Y>(&self, f: impl FnOnce(&X) -> Y) -> BElem<Y> {
        match self {
            BElem::Step(a, x) => BElem::Step(a.clone(), f(x)),
            BElem::Stop => BElem::Stop,
        }
    }
}

impl<X: fmt::Display> fmt::Display for BElem<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BElem::Step(a, x) => write!(f, "({a}, {x})"),
            BElem::Stop => f.write_str("*"),
        }
    }
}

/// A pure state or an observed step.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum B0Elem<X> {
    Pure(X),
    Obs(BElem<X>),
}

impl<X> B0Elem<X> {
    pub fn map<Y>(&self, f: impl FnOnce(&X) -> Y) -> B0Elem<Y> {
        match self {
            B0Elem::Pure(x) => B0Elem::Pure(f(x)),
            B0Elem::Obs(e) => B0Elem::Obs(e.map(f)),
        }
    }
}

impl<X: fmt::Display> fmt::Display for B0Elem<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            B0Elem::Pure(x) => write!(f, "{x}"),
            B0Elem::Obs(e) => write!(f, "{e}"),
        }
    }
}

/// A single operation applied to payloads: one layer of syntax.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FlatTerm<X> {
    pub op: OpSym,
    pub args: Vec<X>,
}

impl<X: Clone> FlatTerm<X> {
    pub fn to_term(&self) -> Term<X> {
        Term::Node(
            self.op.clone(),
            self.args.iter().cloned().map(Term::Leaf).collect(),
        )
    }
}

impl<X: fmt::Display> fmt::Display for FlatTerm<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.op)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// `δ^B`: `(a, Σ rᵢ·xᵢ) ↦ Σ rᵢ·(a, xᵢ)`, `* ↦ 1·*`.
pub fn dist_b<X: Ord + Clone, W: Semiring>(e: &BElem<FormalSum<X, W>>) -> FormalSum<BElem<X>, W> {
    match e {
        BElem::Step(a, s) => s.map(|x| BElem::Step(a.clone(), x.clone())),
        BElem::Stop => FormalSum::unit(BElem::Stop),
    }
}

/// `δ^{B₀}`: pure sums keep their tag, observations go through `δ^B`.
pub fn dist_b0<X: Ord + Clone, W: Semiring>(
    e: &B0Elem<FormalSum<X, W>>,
) -> FormalSum<B0Elem<X>, W> {
    match e {
        B0Elem::Pure(s) => s.map(|x| B0Elem::Pure(x.clone())),
        B0Elem::Obs(b) => dist_b(b).map(|b| B0Elem::Obs(b.clone())),
    }
}

/// `δ^Σ`: `f(φ₁, …, φₙ) ↦ Σ r¹ᵢ₁⋯rⁿᵢₙ · f(x¹ᵢ₁, …, xⁿᵢₙ)`.
pub fn dist_sigma<X: Ord + Clone, W: Semiring>(
    sig: &Signature,
    op: &OpSym,
    args: &[FormalSum<X, W>],
) -> Result<FormalSum<FlatTerm<X>, W>> {
    let arity = sig
        .arity(op)
        .ok_or_else(|| Error::UnknownOp(op.to_string()))?;
    if arity != args.len() {
        return Err(Error::Arity {
            op: op.to_string(),
            expected: arity,
            found: args.len(),
        });
    }
    Ok(product(args).map(|xs| FlatTerm {
        op: op.clone(),
        args: xs.clone(),
    }))
}

/// `δ^{Σ*}`: every leaf occurrence chooses independently.
pub fn dist_sigma_star<X: Ord + Clone, W: Semiring>(
    t: &Term<FormalSum<X, W>>,
) -> FormalSum<Term<X>, W> {
    match t {
        Term::Leaf(s) => s.map(|x| Term::Leaf(x.clone())),
        Term::Node(op, cs) => {
            let children: Vec<_> = cs.iter().map(dist_sigma_star).collect();
            product(&children).map(|ts| Term::Node(op.clone(), ts.clone()))
        }
    }
}
