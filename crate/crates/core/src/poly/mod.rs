//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept in a map keyed by exponent vectors ordered
//! graded-lexicographically, so two equal polynomials over the same variable
//! list always print and serialize identically.

mod affine;
mod plan;
mod serial;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

pub use affine::AffineMap;
pub use plan::{CompiledPlan, EvalPlan, LinearForm, PlanError, PlanNode};
pub use serial::{PolyRecord, TermRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("variable lists differ: [{}] vs [{}]", .left.join(", "), .right.join(", "))]
    Alignment { left: Vec<String>, right: Vec<String> },
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    PointLength { expected: usize, got: usize },
    #[error("affine map is singular")]
    SingularMap,
    #[error("affine map has dimension {map}, variable block has {block}")]
    BlockSize { map: usize, block: usize },
    #[error("variable index {0} out of range")]
    VarIndex(usize),
    #[error("malformed polynomial record: {0}")]
    Record(String),
}

/// Exponent vector ordered graded-lexicographically: higher total degree is
/// greater, ties broken lexicographically with the first variable most
/// significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Rational>,
}

/// `x1..xm` followed by `t1..tk`.
pub fn lift_var_names(base_dim: usize, aux_dim: usize) -> Vec<String> {
    (1..=base_dim).map(|i| format!("x{i}")).chain((1..=aux_dim).map(|i| format!("t{i}"))).collect()
}

impl Polynomial {
    pub fn zero(vars: Vec<String>) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Vec<String>, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        let one = Monomial::one(p.nvars());
        p.add_term(one, c);
        p
    }

    /// The polynomial consisting of the single variable `vars[index]`.
    pub fn var(vars: Vec<String>, index: usize) -> Result<Self, PolyError> {
        if index >= vars.len() {
            return Err(PolyError::VarIndex(index));
        }
        let mut exps = vec![0; vars.len()];
        exps[index] = 1;
        let mut p = Self::zero(vars);
        p.add_term(Monomial(exps), Rational::one());
        Ok(p)
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(vars: Vec<String>, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Rational, Vec<u32>)>,
    {
        let mut p = Self::zero(vars);
        for (c, exps) in terms {
            if exps.len() != p.nvars() {
                return Err(PolyError::Record(format!(
                    "exponent vector of length {} for {} variables",
                    exps.len(),
                    p.nvars()
                )));
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (descending graded-lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, Monomial::degree)
    }

    /// Maximum exponent of each variable.
    pub fn var_degrees(&self) -> Vec<u32> {
        let mut out = vec![0; self.nvars()];
        for m in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(&m.0) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// Whether variable `index` occurs in some term.
    pub fn mentions(&self, index: usize) -> bool {
        self.terms.keys().any(|m| m.0[index] > 0)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::one(self.nvars())).cloned().unwrap_or_else(Rational::zero)
    }

    fn check_aligned(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::Alignment { left: self.vars.clone(), right: other.vars.clone() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_aligned(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_aligned(other)?;
        let mut out = Polynomial::zero(self.vars.clone());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.vars.clone());
        }
        Polynomial { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn add_constant(&self, c: &Rational) -> Polynomial {
        let mut out = self.clone();
        out.add_term(Monomial::one(self.nvars()), c.clone());
        out
    }

    pub fn square(&self) -> Polynomial {
        self.mul(self).expect("a polynomial is aligned with itself")
    }

    pub fn pow(&self, mut n: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::constant(self.vars.clone(), Rational::one());
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base).expect("aligned");
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Re-expresses the polynomial over `vars`, sending old variable `i` to
    /// new position `positions[i]`. Variables not hit by `positions` get
    /// exponent zero everywhere.
    pub fn embed(&self, vars: Vec<String>, positions: &[usize]) -> Result<Polynomial, PolyError> {
        if positions.len() != self.nvars() {
            return Err(PolyError::Record(format!("{} positions for {} variables", positions.len(), self.nvars())));
        }
        if let Some(&bad) = positions.iter().find(|&&p| p >= vars.len()) {
            return Err(PolyError::VarIndex(bad));
        }
        let mut out = Polynomial::zero(vars);
        for (m, c) in &self.terms {
            let mut exps = vec![0; out.nvars()];
            for (i, &e) in m.0.iter().enumerate() {
                exps[positions[i]] += e;
            }
            out.add_term(Monomial(exps), c.clone());
        }
        Ok(out)
    }

    /// Same terms over a renamed variable list of equal length.
    pub fn rename(&self, vars: Vec<String>) -> Result<Polynomial, PolyError> {
        if vars.len() != self.nvars() {
            return Err(PolyError::Alignment { left: self.vars.clone(), right: vars });
        }
        Ok(Polynomial { vars, terms: self.terms.clone() })
    }

    /// Substitutes `replacements[i]` for variable `i`. All replacements must
    /// share one variable list, which becomes the result's.
    pub(crate) fn compose(&self, replacements: &[Polynomial]) -> Result<Polynomial, PolyError> {
        if replacements.len() != self.nvars() {
            return Err(PolyError::Record(format!(
                "{} replacements for {} variables",
                replacements.len(),
                self.nvars()
            )));
        }
        let target = match replacements.first() {
            Some(r) => r.vars.clone(),
            None => return Ok(self.clone()),
        };
        for r in replacements {
            if r.vars != target {
                return Err(PolyError::Alignment { left: target, right: r.vars.clone() });
            }
        }
        let max = self.var_degrees();
        let powers: Vec<Vec<Polynomial>> = replacements
            .iter()
            .zip(&max)
            .map(|(r, &d)| {
                let mut v = Vec::with_capacity(d as usize + 1);
                v.push(Polynomial::constant(target.clone(), Rational::one()));
                for k in 1..=d as usize {
                    let next = v[k - 1].mul(r).expect("aligned");
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(target.clone());
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target.clone(), c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize])?;
                }
            }
            for (mm, cc) in t.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        self.check_point(point.len())?;
        let degs = self.var_degrees();
        let powers: Vec<Vec<Rational>> = point
            .iter()
            .zip(&degs)
            .map(|(x, &d)| {
                let mut v = vec![Rational::one()];
                for k in 1..=d as usize {
                    let next = &v[k - 1] * x;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation. Coefficients are rounded to `f64`.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        self.check_point(point.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                m.0.iter()
                    .zip(point)
                    .filter(|(&e, _)| e > 0)
                    .fold(rational::to_f64(c), |acc, (&e, &x)| acc * x.powi(e as i32))
            })
            .sum())
    }

    fn check_point(&self, got: usize) -> Result<(), PolyError> {
        if got != self.nvars() {
            return Err(PolyError::PointLength { expected: self.nvars(), got });
        }
        Ok(())
    }

    pub fn derivative(&self, index: usize) -> Result<Polynomial, PolyError> {
        if index >= self.nvars() {
            return Err(PolyError::VarIndex(index));
        }
        let mut out = Polynomial::zero(self.vars.clone());
        for (m, c) in &self.terms {
            let e = m.0[index];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[index] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    /// Partial derivatives in variable order.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars()).map(|i| self.derivative(i).expect("index in range")).collect()
    }

    /// Replaces the variables at `block` by `A⁻¹(v)`, so the zero set of the
    /// result is the image of the zero set of `self` under `A` acting on that
    /// block.
    pub fn substitute_affine(&self, block: &[usize], map: &AffineMap) -> Result<Polynomial, PolyError> {
        affine::substitute(self, block, map)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let abs = c.abs();
            let factors: Vec<String> =
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], e) })
                    .collect();
            if factors.is_empty() {
                f.write_str(&rational::to_short_string(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", rational::to_short_string(&abs))?;
                }
                f.write_str(&factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    fn x(i: usize, n: usize) -> Polynomial {
        Polynomial::var(names(n), i).unwrap()
    }

    fn c(v: i64, n: usize) -> Polynomial {
        Polynomial::constant(names(n), int(v))
    }

    #[test]
    fn cancellation_gives_zero() {
        let p = x(0, 1).add(&x(0, 1).neg()).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.to_string(), "0");
    }

    #[test]
    fn difference_of_squares() {
        let a = x(0, 1).add(&c(1, 1)).unwrap();
        let b = x(0, 1).sub(&c(1, 1)).unwrap();
        assert_eq!(a.mul(&b).unwrap().to_string(), "x1^2 - 1");
    }

    #[test]
    fn scaling_is_linear() {
        let p = x(0, 2).square().add(&x(1, 2)).unwrap();
        assert_eq!(p.scale(&frac(1, 2)).to_string(), "1/2*x1^2 + 1/2*x2");
    }

    #[test]
    fn mismatched_variables_are_rejected() {
        let err = x(0, 1).add(&x(0, 2)).unwrap_err();
        assert!(matches!(err, PolyError::Alignment { .. }));
    }

    #[test]
    fn canonical_text_matches_expected_layout() {
        let vars = lift_var_names(1, 1);
        let p = Polynomial::from_terms(vars, [(frac(3, 2), vec![2, 1]), (int(-1), vec![0, 0])]).unwrap();
        assert_eq!(p.to_string(), "3/2*x1^2*t1 - 1");
    }

    #[test]
    fn graded_lex_order_puts_high_degree_first() {
        let p = Polynomial::from_terms(
            names(2),
            [(int(1), vec![0, 1]), (int(1), vec![1, 0]), (int(1), vec![0, 2]), (int(1), vec![1, 1])],
        )
        .unwrap();
        assert_eq!(p.to_string(), "x1*x2 + x2^2 + x1 + x2");
    }

    #[test]
    fn exact_evaluation() {
        let vars = vec!["x".to_string(), "t".to_string()];
        let circle =
            Polynomial::from_terms(vars.clone(), [(int(1), vec![2, 0]), (int(1), vec![0, 2]), (int(-1), vec![0, 0])])
                .unwrap();
        assert_eq!(circle.eval(&[int(0), int(1)]).unwrap(), int(0));
        // t^2 - (1 - x^2) at (1/2, 0)
        assert_eq!(circle.eval(&[frac(1, 2), int(0)]).unwrap(), frac(-3, 4));
        let zero = Polynomial::zero(vars);
        assert_eq!(zero.eval(&[int(7), int(-3)]).unwrap(), int(0));
        assert!(matches!(circle.eval(&[int(0)]), Err(PolyError::PointLength { expected: 2, got: 1 })));
    }

    #[test]
    fn gradients() {
        let g = x(0, 1).square().gradient();
        assert_eq!(g[0].to_string(), "2*x1");
        let xt = x(0, 2).mul(&x(1, 2)).unwrap().gradient();
        assert_eq!(xt[0].to_string(), "x2");
        assert_eq!(xt[1].to_string(), "x1");
        assert!(c(5, 3).gradient().iter().all(Polynomial::is_zero));
    }

    #[test]
    fn embed_moves_variables() {
        let p = x(0, 2).mul(&x(1, 2).square()).unwrap();
        let q = p.embed(names(3), &[2, 0]).unwrap();
        assert_eq!(q.to_string(), "x1^2*x3");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let p = x(0, 2).add(&x(1, 2)).unwrap().add(&c(-1, 2)).unwrap();
        let mut r = c(1, 2);
        for _ in 0..5 {
            r = r.mul(&p).unwrap();
        }
        assert_eq!(p.pow(5), r);
        assert_eq!(p.pow(0), c(1, 2));
    }
}
