//! Structured evaluation plans.
//!
//! A lift polynomial is built out of squares, sums, products and affine
//! changes of variables applied to small leaf polynomials. Expanding that
//! structure gives the exact polynomial; keeping it gives a float evaluator
//! whose cost and rounding error track the construction rather than the
//! (much larger) expanded term list.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{PolyError, Polynomial};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("plan node has arity {got}, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("empty {0} node")]
    Empty(&'static str),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `constant + Σ coeff·outer[index]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    #[serde(with = "indexed_fractions")]
    pub terms: Vec<(usize, Rational)>,
    #[serde(with = "rational::serde_fraction")]
    pub constant: Rational,
}

mod indexed_fractions {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[(usize, Rational)], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<(usize, String)> = v.iter().map(|(i, c)| (*i, rational::to_fraction_string(c))).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, Rational)>, D::Error> {
        let raw = Vec::<(usize, String)>::deserialize(d)?;
        raw.into_iter().map(|(i, c)| Ok((i, rational::parse_rational(&c).map_err(serde::de::Error::custom)?))).collect()
    }
}

impl LinearForm {
    pub fn select(index: usize) -> Self {
        LinearForm { terms: vec![(index, Rational::one())], constant: Rational::zero() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanNode {
    Poly(Polynomial),
    Sum(Vec<PlanNode>),
    Product(Vec<PlanNode>),
    Square(Box<PlanNode>),
    /// Evaluates `inner` at the point whose i-th coordinate is `rows[i]`
    /// applied to the outer point.
    Affine {
        arity: usize,
        rows: Vec<LinearForm>,
        inner: Box<PlanNode>,
    },
}

impl PlanNode {
    pub fn arity(&self) -> usize {
        match self {
            PlanNode::Poly(p) => p.nvars(),
            PlanNode::Sum(c) | PlanNode::Product(c) => c.first().map_or(0, PlanNode::arity),
            PlanNode::Square(c) => c.arity(),
            PlanNode::Affine { arity, .. } => *arity,
        }
    }

    /// Wraps `self` so it reads its variables from positions `positions` of
    /// an `arity`-variable point.
    pub fn embedded(self, arity: usize, positions: &[usize]) -> PlanNode {
        if let PlanNode::Poly(p) = &self {
            let names = (0..arity).map(|i| format!("_{i}")).collect();
            if let Ok(q) = p.embed(names, positions) {
                return PlanNode::Poly(q);
            }
        }
        PlanNode::Affine {
            arity,
            rows: positions.iter().map(|&i| LinearForm::select(i)).collect(),
            inner: Box::new(self),
        }
    }

    fn validate(&self) -> Result<(), PlanError> {
        match self {
            PlanNode::Poly(_) => Ok(()),
            PlanNode::Sum(c) | PlanNode::Product(c) => {
                let Some(first) = c.first() else {
                    return Err(PlanError::Empty(if matches!(self, PlanNode::Sum(_)) { "sum" } else { "product" }));
                };
                let n = first.arity();
                for child in c {
                    child.validate()?;
                    if child.arity() != n {
                        return Err(PlanError::Arity { expected: n, got: child.arity() });
                    }
                }
                Ok(())
            }
            PlanNode::Square(c) => c.validate(),
            PlanNode::Affine { arity, rows, inner } => {
                inner.validate()?;
                if rows.len() != inner.arity() {
                    return Err(PlanError::Arity { expected: inner.arity(), got: rows.len() });
                }
                if let Some(&(bad, _)) = rows.iter().flat_map(|r| &r.terms).find(|(i, _)| i >= arity) {
                    return Err(PlanError::Poly(PolyError::VarIndex(bad)));
                }
                Ok(())
            }
        }
    }

    fn expand(&self, vars: &[String]) -> Result<Polynomial, PolyError> {
        match self {
            PlanNode::Poly(p) => p.rename(vars.to_vec()),
            PlanNode::Sum(c) => {
                let mut acc = Polynomial::zero(vars.to_vec());
                for child in c {
                    acc = acc.add(&child.expand(vars)?)?;
                }
                Ok(acc)
            }
            PlanNode::Product(c) => {
                let mut acc = Polynomial::constant(vars.to_vec(), Rational::one());
                for child in c {
                    acc = acc.mul(&child.expand(vars)?)?;
                }
                Ok(acc)
            }
            PlanNode::Square(c) => Ok(c.expand(vars)?.square()),
            PlanNode::Affine { rows, inner, .. } => {
                let inner_vars: Vec<String> = (0..rows.len()).map(|i| format!("_{i}")).collect();
                let p = inner.expand(&inner_vars)?;
                let forms = rows
                    .iter()
                    .map(|r| {
                        let mut f = Polynomial::constant(vars.to_vec(), r.constant.clone());
                        for (i, c) in &r.terms {
                            f = f.add(&Polynomial::var(vars.to_vec(), *i)?.scale(c))?;
                        }
                        Ok(f)
                    })
                    .collect::<Result<Vec<_>, PolyError>>()?;
                if forms.is_empty() {
                    return Ok(Polynomial::constant(vars.to_vec(), p.constant_term()));
                }
                p.compose(&forms)
            }
        }
    }

    fn eval_exact(&self, x: &[Rational]) -> Result<Rational, PolyError> {
        Ok(match self {
            PlanNode::Poly(p) => p.eval(x)?,
            PlanNode::Sum(c) => {
                let mut acc = Rational::zero();
                for child in c {
                    acc += child.eval_exact(x)?;
                }
                acc
            }
            PlanNode::Product(c) => {
                let mut acc = Rational::one();
                for child in c {
                    acc *= child.eval_exact(x)?;
                }
                acc
            }
            PlanNode::Square(c) => {
                let v = c.eval_exact(x)?;
                &v * &v
            }
            PlanNode::Affine { rows, inner, .. } => {
                let y: Vec<Rational> = rows
                    .iter()
                    .map(|r| r.terms.iter().fold(r.constant.clone(), |acc, (i, c)| acc + c * &x[*i]))
                    .collect();
                inner.eval_exact(&y)?
            }
        })
    }
}

/// A validated plan over a fixed variable list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PlanNode", into = "PlanNode")]
pub struct EvalPlan {
    root: PlanNode,
}

impl TryFrom<PlanNode> for EvalPlan {
    type Error = PlanError;

    fn try_from(root: PlanNode) -> Result<Self, PlanError> {
        EvalPlan::new(root)
    }
}

impl From<EvalPlan> for PlanNode {
    fn from(p: EvalPlan) -> Self {
        p.root
    }
}

impl EvalPlan {
    pub fn new(root: PlanNode) -> Result<Self, PlanError> {
        root.validate()?;
        Ok(EvalPlan { root })
    }

    pub fn leaf(p: Polynomial) -> Self {
        EvalPlan { root: PlanNode::Poly(p) }
    }

    pub fn root(&self) -> &PlanNode {
        &self.root
    }

    pub fn into_root(self) -> PlanNode {
        self.root
    }

    pub fn arity(&self) -> usize {
        self.root.arity()
    }

    /// The exact polynomial the plan denotes, over `vars`.
    pub fn expand(&self, vars: &[String]) -> Result<Polynomial, PolyError> {
        if vars.len() != self.arity() {
            return Err(PolyError::PointLength { expected: self.arity(), got: vars.len() });
        }
        self.root.expand(vars)
    }

    /// Exact evaluation without expanding.
    pub fn eval_exact(&self, x: &[Rational]) -> Result<Rational, PolyError> {
        if x.len() != self.arity() {
            return Err(PolyError::PointLength { expected: self.arity(), got: x.len() });
        }
        self.root.eval_exact(x)
    }

    pub fn compile(&self) -> CompiledPlan {
        CompiledPlan { arity: self.arity(), root: FloatNode::from_plan(&self.root) }
    }
}

#[derive(Debug, Clone)]
struct FloatTerm {
    coeff: f64,
    factors: Vec<(usize, i32)>,
}

#[derive(Debug, Clone)]
enum FloatNode {
    Poly { arity: usize, terms: Vec<FloatTerm> },
    Sum(Vec<FloatNode>),
    Product(Vec<FloatNode>),
    Square(Box<FloatNode>),
    Affine { rows: Vec<(Vec<(usize, f64)>, f64)>, inner: Box<FloatNode>, inner_arity: usize },
}

impl FloatNode {
    fn from_plan(node: &PlanNode) -> FloatNode {
        match node {
            PlanNode::Poly(p) => FloatNode::Poly {
                arity: p.nvars(),
                terms: p
                    .terms()
                    .map(|(m, c)| FloatTerm {
                        coeff: rational::to_f64(c),
                        factors: m
                            .exps()
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(i, &e)| (i, e as i32))
                            .collect(),
                    })
                    .collect(),
            },
            PlanNode::Sum(c) => FloatNode::Sum(c.iter().map(FloatNode::from_plan).collect()),
            PlanNode::Product(c) => FloatNode::Product(c.iter().map(FloatNode::from_plan).collect()),
            PlanNode::Square(c) => FloatNode::Square(Box::new(FloatNode::from_plan(c))),
            PlanNode::Affine { rows, inner, .. } => FloatNode::Affine {
                rows: rows
                    .iter()
                    .map(|r| {
                        (
                            r.terms.iter().map(|(i, c)| (*i, rational::to_f64(c))).collect(),
                            rational::to_f64(&r.constant),
                        )
                    })
                    .collect(),
                inner_arity: inner.arity(),
                inner: Box::new(FloatNode::from_plan(inner)),
            },
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FloatNode::Poly { terms, .. } => {
                terms.iter().map(|t| t.factors.iter().fold(t.coeff, |acc, &(i, e)| acc * x[i].powi(e))).sum()
            }
            FloatNode::Sum(c) => c.iter().map(|n| n.eval(x)).sum(),
            FloatNode::Product(c) => c.iter().map(|n| n.eval(x)).product(),
            FloatNode::Square(c) => {
                let v = c.eval(x);
                v * v
            }
            FloatNode::Affine { rows, inner, .. } => inner.eval(&apply_rows(rows, x)),
        }
    }

    /// Value, with the gradient accumulated into `grad` (length = arity).
    fn eval_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            FloatNode::Poly { terms, arity } => {
                debug_assert_eq!(*arity, x.len());
                let mut value = 0.0;
                for t in terms {
                    let pows: Vec<f64> = t.factors.iter().map(|&(i, e)| x[i].powi(e)).collect();
                    value += pows.iter().fold(t.coeff, |a, b| a * b);
                    for (k, &(i, e)) in t.factors.iter().enumerate() {
                        let mut d = t.coeff * e as f64 * x[i].powi(e - 1);
                        for (l, p) in pows.iter().enumerate() {
                            if l != k {
                                d *= p;
                            }
                        }
                        grad[i] += d;
                    }
                }
                value
            }
            FloatNode::Sum(c) => c.iter().map(|n| n.eval_grad(x, grad)).sum(),
            FloatNode::Product(c) => {
                let n = x.len();
                let mut values = Vec::with_capacity(c.len());
                let mut grads = Vec::with_capacity(c.len());
                for child in c {
                    let mut g = vec![0.0; n];
                    values.push(child.eval_grad(x, &mut g));
                    grads.push(g);
                }
                // prefix/suffix products keep zero factors exact
                let mut prefix = vec![1.0; c.len() + 1];
                for i in 0..c.len() {
                    prefix[i + 1] = prefix[i] * values[i];
                }
                let mut suffix = 1.0;
                for i in (0..c.len()).rev() {
                    let others = prefix[i] * suffix;
                    for (gj, cj) in grad.iter_mut().zip(&grads[i]) {
                        *gj += others * cj;
                    }
                    suffix *= values[i];
                }
                prefix[c.len()]
            }
            FloatNode::Square(c) => {
                let mut g = vec![0.0; x.len()];
                let v = c.eval_grad(x, &mut g);
                for (gj, cj) in grad.iter_mut().zip(&g) {
                    *gj += 2.0 * v * cj;
                }
                v * v
            }
            FloatNode::Affine { rows, inner, inner_arity } => {
                let y = apply_rows(rows, x);
                let mut g = vec![0.0; *inner_arity];
                let v = inner.eval_grad(&y, &mut g);
                for (row, gi) in rows.iter().zip(&g) {
                    for &(j, c) in &row.0 {
                        grad[j] += c * gi;
                    }
                }
                v
            }
        }
    }
}

fn apply_rows(rows: &[(Vec<(usize, f64)>, f64)], x: &[f64]) -> Vec<f64> {
    rows.iter().map(|(terms, c)| terms.iter().fold(*c, |acc, &(i, a)| acc + a * x[i])).collect()
}

/// Float evaluator built from an [`EvalPlan`].
#[derive(Debug, Clone)]
pub struct CompiledPlan {
    arity: usize,
    root: FloatNode,
}

impl CompiledPlan {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.arity, "point length does not match plan arity");
        self.root.eval(x)
    }

    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(x.len(), self.arity, "point length does not match plan arity");
        let mut g = vec![0.0; self.arity];
        let v = self.root.eval_grad(x, &mut g);
        (v, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::lift_var_names;
    use crate::rational::{frac, int};

    fn sample_plan() -> EvalPlan {
        // ((x1 - t1)^2 + 1) * (x1*t1 - 1/2), then t1 ↦ 2*t1 - 1
        let vars = lift_var_names(1, 1);
        let a = Polynomial::from_terms(vars.clone(), [(int(1), vec![1, 0]), (int(-1), vec![0, 1])]).unwrap();
        let b = Polynomial::from_terms(vars, [(int(1), vec![1, 1]), (frac(-1, 2), vec![0, 0])]).unwrap();
        let one = Polynomial::constant(a.vars().to_vec(), int(1));
        let inner = PlanNode::Product(vec![
            PlanNode::Sum(vec![PlanNode::Square(Box::new(PlanNode::Poly(a))), PlanNode::Poly(one)]),
            PlanNode::Poly(b),
        ]);
        EvalPlan::new(PlanNode::Affine {
            arity: 2,
            rows: vec![LinearForm::select(0), LinearForm { terms: vec![(1, int(2))], constant: int(-1) }],
            inner: Box::new(inner),
        })
        .unwrap()
    }

    #[test]
    fn expansion_agrees_with_structured_evaluation() {
        let plan = sample_plan();
        let vars = lift_var_names(1, 1);
        let p = plan.expand(&vars).unwrap();
        let compiled = plan.compile();
        for (a, b) in [(0, 0), (1, 2), (-3, 5), (7, -1)] {
            let pt = [frac(a, 3), frac(b, 2)];
            assert_eq!(p.eval(&pt).unwrap(), plan.eval_exact(&pt).unwrap());
            let fpt: Vec<f64> = pt.iter().map(rational::to_f64).collect();
            let exact = rational::to_f64(&p.eval(&pt).unwrap());
            assert!((compiled.eval(&fpt) - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn gradient_matches_expanded_derivatives() {
        let plan = sample_plan();
        let vars = lift_var_names(1, 1);
        let grad_polys = plan.expand(&vars).unwrap().gradient();
        let compiled = plan.compile();
        for pt in [[0.3, -0.7], [1.5, 2.0], [-2.0, 0.25]] {
            let (_, g) = compiled.eval_grad(&pt);
            for (gi, pi) in g.iter().zip(&grad_polys) {
                let want = pi.eval_f64(&pt).unwrap();
                assert!((gi - want).abs() <= 1e-10 * (1.0 + want.abs()), "{gi} vs {want}");
            }
        }
    }

    #[test]
    fn product_gradient_with_zero_factor() {
        let vars = lift_var_names(1, 0);
        let x = Polynomial::var(vars, 0).unwrap();
        let plan = EvalPlan::new(PlanNode::Product(vec![PlanNode::Poly(x.clone()), PlanNode::Poly(x)])).unwrap();
        let (v, g) = plan.compile().eval_grad(&[0.0]);
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0]);
        let (v, g) = plan.compile().eval_grad(&[3.0]);
        assert_eq!((v, g[0]), (9.0, 6.0));
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let a = Polynomial::var(lift_var_names(1, 0), 0).unwrap();
        let b = Polynomial::var(lift_var_names(1, 1), 0).unwrap();
        assert!(matches!(
            EvalPlan::new(PlanNode::Sum(vec![PlanNode::Poly(a), PlanNode::Poly(b)])),
            Err(PlanError::Arity { .. })
        ));
        assert!(matches!(EvalPlan::new(PlanNode::Product(vec![])), Err(PlanError::Empty(_))));
    }

    #[test]
    fn serde_round_trip() {
        let plan = sample_plan();
        let s = serde_json::to_string(&plan).unwrap();
        assert_eq!(serde_json::from_str::<EvalPlan>(&s).unwrap(), plan);
    }
}
