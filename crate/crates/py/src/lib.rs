//! Python bindings. Weights cross the boundary as exact strings
//! ("1/3", "inf", "1"); use `fractions.Fraction` on the Python side.

use desimone::analysis::distinguishing_word;
use desimone::rules::{errors, Severity};
use desimone::{
    ast_estimate, parse_closed_term, parse_spec, trace_bounded, AnyModel, BElem, ClosedTerm, Error,
    Law, Model, NaturalityMode, RuleSpec, Semiring, SemiringKind,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Step entry: `(label, target, weight)`, with `label` and `target` both
/// `None` for termination.
pub type Entry = (Option<String>, Option<String>, String);

/// A violation: `(rule number, severity, clause, message)`.
pub type ViolationTuple = (usize, String, String, String);

/// A parsed rule file together with its executable model.
#[pyclass(frozen)]
pub struct Spec {
    spec: RuleSpec,
    model: Result<AnyModel, String>,
}

macro_rules! with_model {
    ($self:expr, $m:ident => $body:expr) => {
        match $self.model()? {
            AnyModel::Boolean($m) => $body,
            AnyModel::Rational($m) => $body,
        }
    };
}

impl Spec {
    pub fn from_text(text: &str) -> Result<Self, Error> {
        let spec = parse_spec(text)?;
        let model = AnyModel::new(&spec).map_err(|e| e.to_string());
        Ok(Spec { spec, model })
    }

    fn model(&self) -> PyResult<&AnyModel> {
        self.model.as_ref().map_err(|e| PyValueError::new_err(e.clone()))
    }

    fn term(&self, text: &str) -> PyResult<ClosedTerm> {
        parse_closed_term(&self.spec.signature, text).map_err(err)
    }
}

fn entries<W: Semiring>(m: &Model<W>, t: &ClosedTerm) -> Result<Vec<Entry>, Error> {
    Ok(m.step(t)?
        .iter()
        .map(|(e, w)| match e {
            BElem::Stop => (None, None, w.to_string()),
            BElem::Step(a, u) => (Some(a.to_string()), Some(u.to_string()), w.to_string()),
        })
        .collect())
}

fn traces<W: Semiring>(m: &Model<W>, t: &ClosedTerm, depth: usize) -> Result<Vec<(String, String)>, Error> {
    Ok(trace_bounded(m, t, depth)?
        .iter()
        .map(|(w, x)| (w.0.iter().map(|a| a.to_string()).collect(), x.to_string()))
        .collect())
}

fn equiv<W: Semiring>(
    m: &Model<W>,
    t: &ClosedTerm,
    s: &ClosedTerm,
    depth: usize,
) -> Result<Option<(String, String, String)>, Error> {
    let a = trace_bounded(m, t, depth)?;
    let b = trace_bounded(m, s, depth)?;
    Ok(distinguishing_word(&a, &b).map(|(w, x, y)| {
        let word = w.0.iter().map(|a| a.to_string()).collect();
        (word, x.to_string(), y.to_string())
    }))
}

fn natural<W: Semiring>(spec: &RuleSpec, carrier: usize, mode: NaturalityMode) -> Result<Option<String>, Error> {
    let report = Law::<W>::new(spec)?.naturality_check(carrier, mode)?;
    Ok(report.witness.map(|w| w.input.to_string()))
}

#[pymethods]
impl Spec {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Spec::from_text(text).map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        Self::new(&text)
    }

    #[getter]
    fn semiring(&self) -> &'static str {
        match self.spec.semiring {
            SemiringKind::Boolean => "boolean",
            SemiringKind::Rational => "rational",
        }
    }

    #[getter]
    fn rules(&self) -> usize {
        self.spec.rules.len()
    }

    /// Every format violation, warnings included.
    fn violations(&self) -> Vec<ViolationTuple> {
        desimone::validate_format(&self.spec)
            .iter()
            .map(|v| {
                let sev = match v.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                (v.rule + 1, sev.to_string(), v.condition.clause().to_string(), v.to_string())
            })
            .collect()
    }

    fn is_valid(&self) -> bool {
        errors(&desimone::validate_format(&self.spec)).next().is_none()
    }

    fn step(&self, term: &str) -> PyResult<Vec<Entry>> {
        let t = self.term(term)?;
        with_model!(self, m => entries(m, &t)).map_err(err)
    }

    /// Bounded trace table as `(word, weight)` pairs, words in shortlex order.
    #[pyo3(signature = (term, depth = 4))]
    fn traces(&self, term: &str, depth: usize) -> PyResult<Vec<(String, String)>> {
        let t = self.term(term)?;
        with_model!(self, m => traces(m, &t, depth)).map_err(err)
    }

    /// `None` when equivalent up to `depth`, else `(word, left, right)`.
    #[pyo3(signature = (left, right, depth = 4))]
    fn distinguish(&self, left: &str, right: &str, depth: usize) -> PyResult<Option<(String, String, String)>> {
        let (t, s) = (self.term(left)?, self.term(right)?);
        with_model!(self, m => equiv(m, &t, &s, depth)).map_err(err)
    }

    /// `None` when natural, else the offending input.
    #[pyo3(signature = (carrier = 2, include_nonaffine = false))]
    fn naturality_witness(&self, carrier: usize, include_nonaffine: bool) -> PyResult<Option<String>> {
        let mode = if include_nonaffine {
            NaturalityMode::IncludeNonaffine
        } else {
            NaturalityMode::AffineOnly
        };
        match self.spec.semiring {
            SemiringKind::Boolean => natural::<desimone::Boolean>(&self.spec, carrier, mode),
            SemiringKind::Rational => natural::<desimone::ExtRational>(&self.spec, carrier, mode),
        }
        .map_err(err)
    }

    /// Termination masses up to `depth` and the verdict string.
    #[pyo3(signature = (term, depth = 30))]
    fn termination(&self, term: &str, depth: usize) -> PyResult<(Vec<String>, String)> {
        let t = self.term(term)?;
        let AnyModel::Rational(m) = self.model()? else {
            return Err(PyValueError::new_err("termination needs a rational rule file"));
        };
        let report = ast_estimate(m, &t, depth).map_err(err)?;
        let masses = report.masses.iter().map(|(_, w)| w.to_string()).collect();
        Ok((masses, report.verdict.to_string()))
    }
}

#[pymodule]
fn desimone_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Spec>()?;
    Ok(())
}
