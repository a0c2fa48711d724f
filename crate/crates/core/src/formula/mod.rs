//! Quantifier-free semialgebraic descriptions: boolean combinations of
//! polynomial sign conditions over base variables `x1..xm`.

mod parser;

use std::fmt;

use num_traits::{Signed, Zero};

use crate::poly::Polynomial;
use crate::rational::Rational;

pub use parser::{parse, parse_polynomial, parse_with_dim, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("point has {got} coordinates, formula has base dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Sign condition of an atom `p rel 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ge,
    Gt,
    Le,
    Lt,
    Ne,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ne => "!=",
        }
    }

    pub fn holds(self, value: &Rational) -> bool {
        match self {
            Rel::Eq => value.is_zero(),
            Rel::Ge => !value.is_negative(),
            Rel::Gt => value.is_positive(),
            Rel::Le => !value.is_positive(),
            Rel::Lt => value.is_negative(),
            Rel::Ne => !value.is_zero(),
        }
    }

    pub fn holds_f64(self, value: f64) -> bool {
        match self {
            Rel::Eq => value == 0.0,
            Rel::Ge => value >= 0.0,
            Rel::Gt => value > 0.0,
            Rel::Le => value <= 0.0,
            Rel::Lt => value < 0.0,
            Rel::Ne => value != 0.0,
        }
    }
}

/// Three-valued membership answer of the float oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    True,
    False,
    /// Some atom the answer depends on is within the band of its zero set.
    Boundary,
}

impl Tri {
    fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Boundary => Tri::Boundary,
        }
    }

    fn and(items: impl Iterator<Item = Tri>) -> Tri {
        let mut out = Tri::True;
        for t in items {
            match t {
                Tri::False => return Tri::False,
                Tri::Boundary => out = Tri::Boundary,
                Tri::True => {}
            }
        }
        out
    }

    fn or(items: impl Iterator<Item = Tri>) -> Tri {
        let mut out = Tri::False;
        for t in items {
            match t {
                Tri::True => return Tri::True,
                Tri::Boundary => out = Tri::Boundary,
                Tri::False => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom {
        poly: Polynomial,
        rel: Rel,
    },
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    /// Set difference `left \ right`.
    Diff(Box<Formula>, Box<Formula>),
}

/// Negation normal form: only `And`/`Or` over `=`, `>=`, `>`, `!=` atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NnfFormula {
    Atom { poly: Polynomial, rel: Rel },
    And(Vec<NnfFormula>),
    Or(Vec<NnfFormula>),
}

impl Formula {
    pub fn atom(poly: Polynomial, rel: Rel) -> Formula {
        Formula::Atom { poly, rel }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn diff(a: Formula, b: Formula) -> Formula {
        Formula::Diff(Box::new(a), Box::new(b))
    }

    /// Number of base variables; every atom is a polynomial over `x1..xm`.
    pub fn base_dim(&self) -> usize {
        match self {
            Formula::Atom { poly, .. } => poly.nvars(),
            Formula::And(c) | Formula::Or(c) => c.first().map_or(0, Formula::base_dim),
            Formula::Not(c) => c.base_dim(),
            Formula::Diff(a, _) => a.base_dim(),
        }
    }

    pub fn atoms(&self) -> Vec<(&Polynomial, Rel)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a Polynomial, Rel)>) {
        match self {
            Formula::Atom { poly, rel } => out.push((poly, *rel)),
            Formula::And(c) | Formula::Or(c) => c.iter().for_each(|f| f.collect_atoms(out)),
            Formula::Not(c) => c.collect_atoms(out),
            Formula::Diff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    fn check_dim(&self, got: usize) -> Result<(), FormulaError> {
        let expected = self.base_dim();
        if got != expected {
            return Err(FormulaError::Dimension { expected, got });
        }
        Ok(())
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[Rational]) -> Result<bool, FormulaError> {
        self.check_dim(x.len())?;
        Ok(self.contains_unchecked(x))
    }

    fn contains_unchecked(&self, x: &[Rational]) -> bool {
        match self {
            Formula::Atom { poly, rel } => rel.holds(&poly.eval(x).expect("dimension checked")),
            Formula::And(c) => c.iter().all(|f| f.contains_unchecked(x)),
            Formula::Or(c) => c.iter().any(|f| f.contains_unchecked(x)),
            Formula::Not(c) => !c.contains_unchecked(x),
            Formula::Diff(a, b) => a.contains_unchecked(x) && !b.contains_unchecked(x),
        }
    }

    /// Float membership with a boundary band: atoms whose value lies within
    /// `tau` of zero are undecided, and the answer is `Boundary` when the
    /// result depends on one of them.
    pub fn classify(&self, x: &[f64], tau: f64) -> Result<Tri, FormulaError> {
        self.check_dim(x.len())?;
        Ok(self.classify_unchecked(x, tau))
    }

    fn classify_unchecked(&self, x: &[f64], tau: f64) -> Tri {
        match self {
            Formula::Atom { poly, rel } => {
                let v = poly.eval_f64(x).expect("dimension checked");
                if v.abs() <= tau {
                    Tri::Boundary
                } else if rel.holds_f64(v) {
                    Tri::True
                } else {
                    Tri::False
                }
            }
            Formula::And(c) => Tri::and(c.iter().map(|f| f.classify_unchecked(x, tau))),
            Formula::Or(c) => Tri::or(c.iter().map(|f| f.classify_unchecked(x, tau))),
            Formula::Not(c) => c.classify_unchecked(x, tau).not(),
            Formula::Diff(a, b) => {
                Tri::and([a.classify_unchecked(x, tau), b.classify_unchecked(x, tau).not()].into_iter())
            }
        }
    }

    /// Float membership with atom values inside the band rounded to zero.
    pub fn contains_snapped(&self, x: &[f64], tau: f64) -> Result<bool, FormulaError> {
        self.check_dim(x.len())?;
        Ok(self.snapped_unchecked(x, tau))
    }

    fn snapped_unchecked(&self, x: &[f64], tau: f64) -> bool {
        match self {
            Formula::Atom { poly, rel } => {
                let v = poly.eval_f64(x).expect("dimension checked");
                rel.holds_f64(if v.abs() <= tau { 0.0 } else { v })
            }
            Formula::And(c) => c.iter().all(|f| f.snapped_unchecked(x, tau)),
            Formula::Or(c) => c.iter().any(|f| f.snapped_unchecked(x, tau)),
            Formula::Not(c) => !c.snapped_unchecked(x, tau),
            Formula::Diff(a, b) => a.snapped_unchecked(x, tau) && !b.snapped_unchecked(x, tau),
        }
    }

    /// Smallest `|p(x)|` over all atoms.
    pub fn nearest_atom_value(&self, x: &[f64]) -> Result<f64, FormulaError> {
        self.check_dim(x.len())?;
        Ok(self
            .atoms()
            .iter()
            .map(|(p, _)| p.eval_f64(x).expect("dimension checked").abs())
            .fold(f64::INFINITY, f64::min))
    }

    pub fn to_nnf(&self) -> NnfFormula {
        nnf(self, false)
    }
}

fn nnf(f: &Formula, negate: bool) -> NnfFormula {
    match f {
        Formula::Atom { poly, rel } => {
            let (poly, rel) = match (rel, negate) {
                (Rel::Eq, false) => (poly.clone(), Rel::Eq),
                (Rel::Ge, false) => (poly.clone(), Rel::Ge),
                (Rel::Gt, false) => (poly.clone(), Rel::Gt),
                (Rel::Ne, false) => (poly.clone(), Rel::Ne),
                (Rel::Le, false) => (poly.neg(), Rel::Ge),
                (Rel::Lt, false) => (poly.neg(), Rel::Gt),
                (Rel::Eq, true) => (poly.clone(), Rel::Ne),
                (Rel::Ne, true) => (poly.clone(), Rel::Eq),
                (Rel::Ge, true) => (poly.neg(), Rel::Gt),
                (Rel::Gt, true) => (poly.neg(), Rel::Ge),
                (Rel::Le, true) => (poly.clone(), Rel::Gt),
                (Rel::Lt, true) => (poly.clone(), Rel::Ge),
            };
            NnfFormula::Atom { poly, rel }
        }
        Formula::And(c) => {
            let kids = c.iter().map(|g| nnf(g, negate)).collect();
            if negate {
                NnfFormula::Or(kids)
            } else {
                NnfFormula::And(kids)
            }
        }
        Formula::Or(c) => {
            let kids = c.iter().map(|g| nnf(g, negate)).collect();
            if negate {
                NnfFormula::And(kids)
            } else {
                NnfFormula::Or(kids)
            }
        }
        Formula::Not(c) => nnf(c, !negate),
        Formula::Diff(a, b) => {
            if negate {
                NnfFormula::Or(vec![nnf(a, true), nnf(b, false)])
            } else {
                NnfFormula::And(vec![nnf(a, false), nnf(b, true)])
            }
        }
    }
}

impl NnfFormula {
    pub fn base_dim(&self) -> usize {
        match self {
            NnfFormula::Atom { poly, .. } => poly.nvars(),
            NnfFormula::And(c) | NnfFormula::Or(c) => c.first().map_or(0, NnfFormula::base_dim),
        }
    }

    pub fn contains(&self, x: &[Rational]) -> Result<bool, FormulaError> {
        if x.len() != self.base_dim() {
            return Err(FormulaError::Dimension { expected: self.base_dim(), got: x.len() });
        }
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[Rational]) -> bool {
        match self {
            NnfFormula::Atom { poly, rel } => rel.holds(&poly.eval(x).expect("dimension checked")),
            NnfFormula::And(c) => c.iter().all(|f| f.contains_unchecked(x)),
            NnfFormula::Or(c) => c.iter().any(|f| f.contains_unchecked(x)),
        }
    }

    /// True when only `=` and `!=` atoms occur.
    pub fn is_equational(&self) -> bool {
        match self {
            NnfFormula::Atom { rel, .. } => matches!(rel, Rel::Eq | Rel::Ne),
            NnfFormula::And(c) | NnfFormula::Or(c) => c.iter().all(NnfFormula::is_equational),
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            NnfFormula::Atom { poly, rel } => Formula::Atom { poly: poly.clone(), rel: *rel },
            NnfFormula::And(c) => Formula::And(c.iter().map(NnfFormula::to_formula).collect()),
            NnfFormula::Or(c) => Formula::Or(c.iter().map(NnfFormula::to_formula).collect()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn joined(f: &mut fmt::Formatter<'_>, kids: &[Formula], sep: &str) -> fmt::Result {
            for (i, k) in kids.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "({k})")?;
            }
            Ok(())
        }
        match self {
            Formula::Atom { poly, rel } => write!(f, "{poly} {} 0", rel.symbol()),
            Formula::And(c) => joined(f, c, " & "),
            Formula::Or(c) => joined(f, c, " | "),
            Formula::Not(c) => write!(f, "!({c})"),
            Formula::Diff(a, b) => write!(f, "({a}) \\ ({b})"),
        }
    }
}

impl fmt::Display for NnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_formula().fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn closed_condition_holds_on_boundary() {
        assert!(f("1 - x1^2 >= 0").contains(&[int(1)]).unwrap());
        assert!(!f("x1 > 0").contains(&[int(0)]).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(f("x1 + x2 > 0").contains(&[int(1)]), Err(FormulaError::Dimension { expected: 2, got: 1 }));
    }

    #[test]
    fn negated_closed_half_line_is_open() {
        let n = f("!(x1 >= 0)").to_nnf();
        assert_eq!(n.to_string(), "-x1 > 0");
    }

    #[test]
    fn diff_pushes_negation_into_atoms() {
        let n = f("0 = 0 \\ x1 != 0").to_nnf();
        assert_eq!(n.to_string(), "(0 = 0) & (x1 = 0)");
    }

    #[test]
    fn de_morgan() {
        let n = f("!((x1 >= 0) & (x2 > 1))").to_nnf();
        assert_eq!(n.to_string(), "(-x1 > 0) | (-x2 + 1 >= 0)");
        let n = f("!(!(x1 = 0) | x2 <= 0)").to_nnf();
        assert_eq!(n.to_string(), "(x1 = 0) & (x2 > 0)");
    }

    #[test]
    fn le_and_lt_are_rewritten() {
        let n = f("x1^2 + x2^2 <= 1").to_nnf();
        assert_eq!(n.to_string(), "-x1^2 - x2^2 + 1 >= 0");
        let n = f("x1 < 2").to_nnf();
        assert_eq!(n.to_string(), "-x1 + 2 > 0");
    }

    #[test]
    fn tri_state_respects_band() {
        let g = f("x1 >= 0 & x2 > 0");
        assert_eq!(g.classify(&[0.5, 0.5], 1e-6).unwrap(), Tri::True);
        assert_eq!(g.classify(&[1e-9, 0.5], 1e-6).unwrap(), Tri::Boundary);
        assert_eq!(g.classify(&[1e-9, -0.5], 1e-6).unwrap(), Tri::False);
        assert!(g.contains_snapped(&[-1e-9, 0.5], 1e-6).unwrap());
        assert!(!g.contains_snapped(&[0.5, 1e-9], 1e-6).unwrap());
    }

    #[test]
    fn nearest_atom_value() {
        let g = f("x1 - 1 >= 0 | x1 + 3 = 0");
        assert_eq!(g.nearest_atom_value(&[-2.5]).unwrap(), 0.5);
    }

    #[test]
    fn equational_detection() {
        assert!(f("x1 = 0 | x1 != 1").to_nnf().is_equational());
        assert!(!f("!(x1 = 0) & x1 >= 0").to_nnf().is_equational());
        assert!(f("!(x1 != 0 & x1 - 1 = 0)").to_nnf().is_equational());
    }

    #[test]
    fn nnf_agrees_on_fixed_points() {
        let g = f("(x1^2 + x2^2 <= 1 \\ x1^2 + x2^2 < 1/4) | !(x1 > 0)");
        let n = g.to_nnf();
        for a in -4..=4 {
            for b in -4..=4 {
                let pt = [frac(a, 4), frac(b, 4)];
                assert_eq!(g.contains(&pt).unwrap(), n.contains(&pt).unwrap(), "{pt:?}");
            }
        }
    }
}
