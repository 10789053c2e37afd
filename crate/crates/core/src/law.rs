//! The law induced by a rule file: one-layer evaluation `ρ`, its composite
//! form over formal sums of behaviours, the free extension to deep terms,
//! and a brute-force naturality checker over small carriers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::monad::{dist_b, dist_b0, dist_sigma, dist_sigma_star, pair_join, B0Elem, BElem};
use crate::monad::{Either, FormalSum};
use crate::rules::{errors, is_executable, validate_format, Conclusion, Dialect, Premise, RuleSpec};
use crate::semiring::{ExtRational, Semiring};
use crate::syntax::{substitute, Label, OpSym, Signature, Substitution, Term, Var};

/// `TBΣ*X`: weighted one-step behaviours whose successors are terms.
pub type LawOutput<X, W> = FormalSum<BElem<Term<X>>, W>;

/// A formal sum of one-step behaviours.
pub type Behaviour<X, W> = FormalSum<BElem<X>, W>;

#[derive(Clone, Debug)]
enum Output<W> {
    Step(Label, W, Term<Var>),
    Stop(W),
}

#[derive(Clone, Debug)]
struct Compiled<W> {
    trans: BTreeMap<usize, Label>,
    term: BTreeSet<usize>,
    output: Output<W>,
}

/// An executable law compiled from a rule file.
#[derive(Clone, Debug)]
pub struct Law<W: Semiring> {
    spec: Arc<RuleSpec>,
    rules: BTreeMap<OpSym, Vec<Compiled<W>>>,
}

impl<W: Semiring> Law<W> {
    /// Compiles the rules. The weight type must match the file's semiring,
    /// and the rules must be executable: non-affine targets are accepted,
    /// every other format error is not.
    pub fn new(spec: &RuleSpec) -> Result<Self> {
        if spec.semiring.to_string() != W::NAME {
            return Err(Error::InvalidArgument(format!(
                "rule file uses the {} semiring, not {}",
                spec.semiring,
                W::NAME
            )));
        }
        let violations = validate_format(spec);
        if !is_executable(&violations) {
            let first = errors(&violations)
                .find(|v| v.condition != crate::rules::Condition::NonAffineTarget)
                .expect("non-executable implies an error");
            return Err(Error::NotExecutable(first.to_string()));
        }
        let mut rules: BTreeMap<OpSym, Vec<Compiled<W>>> = BTreeMap::new();
        for r in &spec.rules {
            let mut trans = BTreeMap::new();
            let mut term = BTreeSet::new();
            for p in &r.premises {
                match p {
                    Premise::Trans { src, label, .. } => {
                        trans.insert(*src, label.clone());
                    }
                    Premise::Term { src } => {
                        term.insert(*src);
                    }
                }
            }
            let output = match &r.conclusion {
                Conclusion::Labeled {
                    label,
                    weight,
                    target,
                } => Output::Step(label.clone(), W::from_literal(weight), target.clone()),
                Conclusion::Terminate { weight } => Output::Stop(W::from_literal(weight)),
                Conclusion::LabelledTermination { .. } => unreachable!("rejected above"),
            };
            rules.entry(r.op.clone()).or_default().push(Compiled {
                trans,
                term,
                output,
            });
        }
        Ok(Law {
            spec: Arc::new(spec.clone()),
            rules,
        })
    }

    pub fn spec(&self) -> &RuleSpec {
        &self.spec
    }

    pub fn signature(&self) -> &Signature {
        &self.spec.signature
    }

    pub fn dialect(&self) -> Dialect {
        self.spec.dialect
    }

    fn check_arity(&self, op: &OpSym, found: usize) -> Result<()> {
        let expected = self
            .signature()
            .arity(op)
            .ok_or_else(|| Error::UnknownOp(op.to_string()))?;
        if expected != found {
            return Err(Error::Arity {
                op: op.to_string(),
                expected,
                found,
            });
        }
        Ok(())
    }

    /// `ρ_X` on one input `f(u₁, …, uₙ)`.
    ///
    /// In the `desimone` dialect any terminated argument forces `{*}`, and
    /// otherwise `*` is always present. In the weighted dialect a rule
    /// fires only when its transition and termination premises cover
    /// exactly the observed and terminated arguments.
    pub fn rho_apply<X: Ord + Clone>(
        &self,
        op: &OpSym,
        args: &[B0Elem<X>],
    ) -> Result<LawOutput<X, W>> {
        self.check_arity(op, args.len())?;
        let mut steps: BTreeMap<usize, &Label> = BTreeMap::new();
        let mut stops = BTreeSet::new();
        for (i, u) in args.iter().enumerate() {
            match u {
                B0Elem::Obs(BElem::Step(a, _)) => {
                    steps.insert(i + 1, a);
                }
                B0Elem::Obs(BElem::Stop) => {
                    stops.insert(i + 1);
                }
                B0Elem::Pure(_) => {}
            }
        }

        let mut out = FormalSum::zero();
        if self.dialect() == Dialect::DeSimone {
            if !stops.is_empty() {
                return Ok(FormalSum::unit(BElem::Stop));
            }
            out.add_entry(BElem::Stop, W::one());
        }

        for rule in self.rules.get(op).map(Vec::as_slice).unwrap_or_default() {
            let matches = rule.term == stops
                && rule.trans.len() == steps.len()
                && rule.trans.iter().all(|(i, a)| steps.get(i) == Some(&a));
            if !matches {
                continue;
            }
            match &rule.output {
                Output::Stop(w) => out.add_entry(BElem::Stop, w.clone()),
                Output::Step(a, w, target) => {
                    let mut sigma: Substitution<X> = Substitution::new();
                    for (i, u) in args.iter().enumerate() {
                        match u {
                            B0Elem::Pure(x) => {
                                sigma.insert(Var::x(i + 1), Term::Leaf(x.clone()));
                            }
                            B0Elem::Obs(BElem::Step(_, x)) => {
                                sigma.insert(Var::y(i + 1), Term::Leaf(x.clone()));
                            }
                            B0Elem::Obs(BElem::Stop) => {}
                        }
                    }
                    out.add_entry(BElem::Step(a.clone(), substitute(target, &sigma)?), w.clone());
                }
            }
        }
        Ok(out)
    }

    /// `μ ∘ Tρ_X ∘ δ^Σ ∘ Σj ∘ Σ(η × id)`: the law applied to arguments
    /// given as states paired with their behaviours.
    pub fn bar_rho_step<X: Ord + Clone>(
        &self,
        op: &OpSym,
        args: &[(X, Behaviour<X, W>)],
    ) -> Result<LawOutput<X, W>> {
        let joined: Vec<FormalSum<B0Elem<X>, W>> = args
            .iter()
            .map(|(x, b)| {
                pair_join(&FormalSum::unit(x.clone()), b).map(|e| match e {
                    Either::Left(x) => B0Elem::Pure(x.clone()),
                    Either::Right(b) => B0Elem::Obs(b.clone()),
                })
            })
            .collect();
        let flat = dist_sigma(self.signature(), op, &joined)?;
        let mut nested: FormalSum<LawOutput<X, W>, W> = FormalSum::zero();
        for (ft, w) in flat.iter() {
            nested.add_entry(self.rho_apply(&ft.op, &ft.args)?, w.clone());
        }
        Ok(nested.flatten())
    }

    /// The free extension of the law to terms over `X × TBX`.
    ///
    /// A leaf returns its own behaviour; a node evaluates its children
    /// recursively and applies [`bar_rho_step`](Self::bar_rho_step) over
    /// the carrier of terms, then flattens the nested terms.
    pub fn law_star<X: Ord + Clone>(
        &self,
        t: &Term<(X, Behaviour<X, W>)>,
    ) -> Result<LawOutput<X, W>> {
        match t {
            Term::Leaf((_, b)) => Ok(b.map(|e| e.map(|x| Term::Leaf(x.clone())))),
            Term::Node(op, cs) => {
                let mut args = Vec::with_capacity(cs.len());
                for c in cs {
                    let projected = c.map_leaves(&mut |(x, _)| x.clone());
                    args.push((projected, self.law_star(c)?));
                }
                let nested = self.bar_rho_step(op, &args)?;
                Ok(nested.map(|e| e.map(Term::join)))
            }
        }
    }

    /// Both legs of the naturality square on one input over `TX`.
    ///
    /// Leg 1 is `μ ∘ Tδ^B ∘ TBδ^{Σ*} ∘ ρ_{TX}`, leg 2 is
    /// `μ ∘ Tρ_X ∘ δ^Σ ∘ Σδ^{B₀}`.
    pub fn naturality_legs<X: Ord + Clone>(
        &self,
        op: &OpSym,
        args: &[B0Elem<FormalSum<X, W>>],
    ) -> Result<(LawOutput<X, W>, LawOutput<X, W>)> {
        let leg1 = self
            .rho_apply(op, args)?
            .bind(|e| dist_b(&e.map(dist_sigma_star)));
        let pushed: Vec<FormalSum<B0Elem<X>, W>> = args.iter().map(dist_b0).collect();
        let leg2 = dist_sigma(self.signature(), op, &pushed)?
            .try_bind(|ft| self.rho_apply(&ft.op, &ft.args))?;
        Ok((leg1, leg2))
    }

    /// Enumerates every input `f(u₁, …, uₙ)` over a carrier of the given
    /// size and reports the first one where the two legs differ.
    ///
    /// A reported witness refutes naturality. A pass is evidence only: the
    /// inputs are a finite sample of the (infinite, in rational mode)
    /// space of formal sums.
    pub fn naturality_check(
        &self,
        carrier: usize,
        mode: NaturalityMode,
    ) -> Result<NaturalityReport<W>> {
        if carrier > MAX_CARRIER {
            return Err(Error::CarrierTooLarge {
                size: carrier,
                limit: MAX_CARRIER,
            });
        }
        if carrier == 0 {
            return Err(Error::InvalidArgument("carrier must be nonempty".into()));
        }
        let sums = carrier_sums::<W>(carrier, mode);
        let labels = self.signature().labels().to_vec();
        let mut choices: Vec<B0Elem<CarrierSum<W>>> =
            sums.iter().cloned().map(B0Elem::Pure).collect();
        for a in &labels {
            for s in &sums {
                choices.push(B0Elem::Obs(BElem::Step(a.clone(), s.clone())));
            }
        }
        choices.push(B0Elem::Obs(BElem::Stop));

        let mut checked = 0;
        for (op, arity) in self.signature().ops() {
            let mut idx = vec![0usize; *arity];
            loop {
                let args: Vec<_> = idx.iter().map(|&i| choices[i].clone()).collect();
                let (leg1, leg2) = self.naturality_legs(op, &args)?;
                checked += 1;
                if leg1 != leg2 {
                    return Ok(NaturalityReport {
                        carrier,
                        mode,
                        inputs_checked: checked,
                        witness: Some(NaturalityWitness {
                            input: NaturalityInput {
                                op: op.clone(),
                                args,
                            },
                            leg1,
                            leg2,
                        }),
                    });
                }
                if !advance(&mut idx, choices.len()) {
                    break;
                }
            }
        }
        Ok(NaturalityReport {
            carrier,
            mode,
            inputs_checked: checked,
            witness: None,
        })
    }
}

/// Odometer step; false once every position has wrapped.
fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Largest carrier the naturality checker accepts.
pub const MAX_CARRIER: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NaturalityMode {
    AffineOnly,
    IncludeNonaffine,
}

impl fmt::Display for NaturalityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NaturalityMode::AffineOnly => "affine-only",
            NaturalityMode::IncludeNonaffine => "include-nonaffine",
        })
    }
}

/// An element of a small test carrier, printed `v1`, `v2`, ….
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Point(pub u8);

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0 + 1)
    }
}

pub type CarrierSum<W> = FormalSum<Point, W>;

/// The formal sums the checker feeds in.
///
/// Weights range over the quarter grid `{0, 1/4, 1/2, 3/4, 1}`; in the
/// boolean semiring that is exactly the powerset. Affine sums come first.
/// The non-affine extension adds the empty sum and sums of total weight
/// below one.
pub fn carrier_sums<W: Semiring>(carrier: usize, mode: NaturalityMode) -> Vec<CarrierSum<W>> {
    let grid: Vec<W> = ["0", "1/4", "1/2", "3/4", "1"]
        .iter()
        .map(|s| W::from_literal(&s.parse::<ExtRational>().expect("literal")))
        .collect();
    let mut affine = BTreeSet::new();
    let mut other = BTreeSet::new();
    let mut idx = vec![0usize; carrier];
    loop {
        let s = CarrierSum::from_entries(
            idx.iter()
                .enumerate()
                .map(|(p, &g)| (Point(p as u8), grid[g].clone())),
        );
        if s.is_affine() {
            affine.insert(s);
        } else if s.total() < W::one() {
            other.insert(s);
        }
        if !advance(&mut idx, grid.len()) {
            break;
        }
    }
    let mut out: Vec<_> = affine.into_iter().collect();
    if mode == NaturalityMode::IncludeNonaffine {
        out.extend(other);
    }
    out
}

/// `f(u₁, …, uₙ)` with arguments over formal sums of carrier points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NaturalityInput<W: Semiring> {
    pub op: OpSym,
    pub args: Vec<B0Elem<CarrierSum<W>>>,
}

impl<W: Semiring> fmt::Display for NaturalityInput<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.op)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
            write!(f, "({})", args.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NaturalityWitness<W: Semiring> {
    pub input: NaturalityInput<W>,
    pub leg1: LawOutput<Point, W>,
    pub leg2: LawOutput<Point, W>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NaturalityReport<W: Semiring> {
    pub carrier: usize,
    pub mode: NaturalityMode,
    pub inputs_checked: usize,
    pub witness: Option<NaturalityWitness<W>>,
}

impl<W: Semiring> NaturalityReport<W> {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_spec;
    use crate::semiring::Boolean;

    type B = Boolean;
    type Q = ExtRational;

    const SHIFT: &str = "dialect desimone\nlabels a, a1\nop f : 2\nop nil : 0\n\
                          rule f(x1, x2) -a-> f(y1, x2) when x1 -a1-> y1\n";
    const COPY: &str = "dialect desimone\nlabels a, a1\nop f : 2\nop nil : 0\n\
                          rule f(x1, x2) -a-> f(y1, y1) when x1 -a1-> y1\n";
    const PROB: &str = "dialect weighted\nsemiring rational\nlabels a, b\n\
                        op nil : 0\nop pre_a : 1\nop pre_b : 1\nop par : 2\n\
                        rule nil -[1]-> *\n\
                        rule pre_a(x1) -a[1]-> x1\n\
                        rule pre_b(x1) -b[1]-> x1\n\
                        rule par(x1, x2) -@l[1/2]-> par(y1, x2) when x1 -@l-> y1\n\
                        rule par(x1, x2) -[1/2]-> * when x1 -> *\n\
                        rule par(x1, x2) -@l[1/2]-> par(x1, y2) when x2 -@l-> y2\n\
                        rule par(x1, x2) -[1/2]-> * when x2 -> *\n";

    fn law<W: Semiring>(text: &str) -> Law<W> {
        Law::new(&parse_spec(text).unwrap()).unwrap()
    }

    fn l(s: &str) -> Label {
        Label::new(s)
    }

    fn f() -> OpSym {
        OpSym::new("f")
    }

    fn leaf<X>(x: X) -> Term<X> {
        Term::Leaf(x)
    }

    fn set<X: Ord + Clone>(xs: &[X]) -> FormalSum<X, B> {
        FormalSum::from_entries(xs.iter().cloned().map(|x| (x, Boolean(true))))
    }

    #[test]
    fn shift_fires_with_stop() {
        let law = law::<B>(SHIFT);
        let out = law
            .rho_apply(
                &f(),
                &[B0Elem::Obs(BElem::Step(l("a1"), "v1")), B0Elem::Pure("u2")],
            )
            .unwrap();
        let fired = Term::node("f", vec![leaf("v1"), leaf("u2")]);
        assert_eq!(
            out,
            set(&[BElem::Stop, BElem::Step(l("a"), fired)])
        );
    }

    #[test]
    fn terminated_argument_forces_stop() {
        let law = law::<B>(SHIFT);
        let out = law
            .rho_apply(&f(), &[B0Elem::Obs(BElem::Stop), B0Elem::Pure("u")])
            .unwrap();
        assert_eq!(out, set(&[BElem::Stop]));
    }

    #[test]
    fn wrong_label_does_not_fire() {
        let law = law::<B>(SHIFT);
        let out = law
            .rho_apply(
                &f(),
                &[B0Elem::Obs(BElem::Step(l("a"), "v")), B0Elem::Pure("u")],
            )
            .unwrap();
        assert_eq!(out, set(&[BElem::Stop]));
    }

    #[test]
    fn weighted_matching_is_exact() {
        let law = law::<Q>(PROB);
        let par = OpSym::new("par");
        let out = law
            .rho_apply(&par, &[B0Elem::Obs(BElem::Stop), B0Elem::Pure("q")])
            .unwrap();
        assert_eq!(out, FormalSum::from_entries([(BElem::Stop, Q::ratio(1, 2))]));
        let both = law
            .rho_apply(
                &par,
                &[
                    B0Elem::Obs(BElem::Step(l("a"), "p")),
                    B0Elem::Obs(BElem::Step(l("b"), "q")),
                ],
            )
            .unwrap();
        assert!(both.is_empty());
    }

    #[test]
    fn arity_is_checked() {
        let law = law::<B>(SHIFT);
        assert!(matches!(
            law.rho_apply(&f(), &[B0Elem::Pure("x")]),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn semiring_must_match() {
        let spec = parse_spec(PROB).unwrap();
        assert!(Law::<B>::new(&spec).is_err());
    }

    #[test]
    fn bar_rho_with_empty_behaviours_keeps_stop() {
        let law = law::<B>(SHIFT);
        let out = law
            .bar_rho_step(&f(), &[("p", FormalSum::zero()), ("q", FormalSum::zero())])
            .unwrap();
        assert_eq!(out, set(&[BElem::Stop]));
    }

    #[test]
    fn bar_rho_probabilistic_par() {
        let law = law::<Q>(PROB);
        let out = law
            .bar_rho_step(
                &OpSym::new("par"),
                &[
                    ("p", FormalSum::unit(BElem::Step(l("a"), "p1"))),
                    ("q", FormalSum::unit(BElem::Step(l("b"), "q1"))),
                ],
            )
            .unwrap();
        let left = Term::node("par", vec![leaf("p1"), leaf("q")]);
        let right = Term::node("par", vec![leaf("p"), leaf("q1")]);
        assert_eq!(
            out,
            FormalSum::from_entries([
                (BElem::Step(l("a"), left), Q::ratio(1, 2)),
                (BElem::Step(l("b"), right), Q::ratio(1, 2)),
            ])
        );
    }

    #[test]
    fn law_star_leaf_and_flat() {
        let law = law::<B>(SHIFT);
        let b = set(&[BElem::Step(l("a1"), "p1")]);
        let out = law.law_star(&leaf(("p", b.clone()))).unwrap();
        assert_eq!(out, set(&[BElem::Step(l("a1"), leaf("p1"))]));

        let empty = FormalSum::zero();
        let t = Term::node("f", vec![leaf(("p", b.clone())), leaf(("q", empty.clone()))]);
        assert_eq!(
            law.law_star(&t).unwrap(),
            law.bar_rho_step(&f(), &[("p", b), ("q", empty)]).unwrap()
        );
    }

    #[test]
    fn shift_is_natural() {
        let law = law::<B>(SHIFT);
        for n in 1..=3 {
            assert!(law.naturality_check(n, NaturalityMode::AffineOnly).unwrap().passed());
        }
    }

    #[test]
    fn copy_witness() {
        let law = law::<B>(COPY);
        assert!(law.naturality_check(1, NaturalityMode::AffineOnly).unwrap().passed());
        let report = law.naturality_check(2, NaturalityMode::AffineOnly).unwrap();
        let w = report.witness.expect("witness");
        let v = |i| leaf(Point(i));
        let fv = |i, j| BElem::Step(l("a"), Term::node("f", vec![v(i), v(j)]));
        assert_eq!(
            w.leg1,
            set(&[BElem::Stop, fv(0, 0), fv(0, 1), fv(1, 0), fv(1, 1)])
        );
        assert_eq!(w.leg2, set(&[BElem::Stop, fv(0, 0), fv(1, 1)]));
    }

    #[test]
    fn empty_sum_breaks_shift() {
        let law = law::<B>(SHIFT);
        let report = law.naturality_check(1, NaturalityMode::IncludeNonaffine).unwrap();
        let w = report.witness.expect("witness");
        assert_eq!(w.leg1, set(&[BElem::Stop]));
        assert!(w.leg2.is_empty());
    }

    #[test]
    fn carrier_cap() {
        let law = law::<B>(SHIFT);
        assert!(matches!(
            law.naturality_check(4, NaturalityMode::AffineOnly),
            Err(Error::CarrierTooLarge { size: 4, limit: 3 })
        ));
    }

    #[test]
    fn carrier_sum_counts() {
        assert_eq!(carrier_sums::<B>(3, NaturalityMode::AffineOnly).len(), 7);
        assert_eq!(carrier_sums::<B>(3, NaturalityMode::IncludeNonaffine).len(), 8);
        assert_eq!(carrier_sums::<Q>(1, NaturalityMode::AffineOnly).len(), 1);
        assert_eq!(carrier_sums::<Q>(2, NaturalityMode::AffineOnly).len(), 5);
        assert_eq!(carrier_sums::<Q>(3, NaturalityMode::AffineOnly).len(), 15);
    }

    #[test]
    fn probabilistic_par_is_natural() {
        let law = law::<Q>(PROB);
        for n in 1..=2 {
            assert!(law.naturality_check(n, NaturalityMode::AffineOnly).unwrap().passed());
        }
    }
}
