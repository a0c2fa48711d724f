//! The lift compiler.
//!
//! A [`Lift`] is one polynomial `P(x, t)` over base variables `x1..xm` and
//! auxiliary variables `t1..tk` such that `x` lies in the source set exactly
//! when `P(x, t) = 0` for some `t`.
//!
//! Atoms lift as
//!
//! | atom     | polynomial    | witness        |
//! |----------|---------------|----------------|
//! | `p = 0`  | `p`           | none           |
//! | `p >= 0` | `t² - p`      | `t = √p`       |
//! | `p > 0`  | `t²·p - 1`    | `t = 1/√p`     |
//! | `p != 0` | `t·p - 1`     | `t = 1/p`      |
//!
//! A conjunction of lifts with disjoint aux blocks is the sum of their
//! squares. A disjunction is the product, over the branches, of the branch's
//! squared polynomial plus the squared coordinates of every *other* branch's
//! aux block, so that a zero of the product lies on one branch with all
//! foreign aux coordinates pinned to zero.
//!
//! Set difference only appears at atoms: negation normal form turns
//! `A \ B` into `A ∧ ¬B` with `¬` pushed onto sign conditions, where the
//! `t·q = 1` trick is exact. Applying that trick to a subtrahend that carries
//! its own aux variables over-projects; see [`unrestricted_difference`].

mod serial;
mod witness;

use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::formula::{Formula, NnfFormula, ParseError, Rel};
use crate::poly::{lift_var_names, CompiledPlan, EvalPlan, PlanError, PlanNode, PolyError, Polynomial};
use crate::rational::Rational;

pub use serial::{LiftFile, WitnessRecord, LIFT_FORMAT};
pub use witness::{all_exact, AuxValue, OrBranch, WitnessError, WitnessProgram, SQRT_BITS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiftError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("base dimensions differ: {expected} vs {got}")]
    BaseDim { expected: usize, got: usize },
    #[error("formula is not in negation normal form: {0}")]
    NotNnf(String),
    #[error("cannot combine an empty list of lifts")]
    Empty,
    #[error("difference is only exact for subtrahends without auxiliary variables (got {aux_dim})")]
    NonAtomicSubtrahend { aux_dim: usize },
    #[error("malformed lift file: {0}")]
    Format(String),
}

#[derive(Debug, Clone)]
pub struct Lift {
    base_dim: usize,
    aux_dim: usize,
    plan: EvalPlan,
    vars: Vec<String>,
    /// Expanded form, built on first use: nested disjunctions expand to
    /// very many terms, and only serialization needs them.
    poly: OnceLock<Polynomial>,
    compiled: CompiledPlan,
    witness: Option<WitnessProgram>,
    source: NnfFormula,
}

impl PartialEq for Lift {
    fn eq(&self, other: &Self) -> bool {
        self.base_dim == other.base_dim
            && self.aux_dim == other.aux_dim
            && self.plan == other.plan
            && self.witness == other.witness
            && self.source == other.source
    }
}

fn base_poly(p: &Polynomial) -> Result<Polynomial, LiftError> {
    Ok(p.rename(lift_var_names(p.nvars(), 0))?)
}

/// `p` over `x1..xm` re-expressed over `x1..xm, t1..tk`.
fn widen(p: &Polynomial, aux_dim: usize) -> Result<Polynomial, LiftError> {
    let m = p.nvars();
    let positions: Vec<usize> = (0..m).collect();
    Ok(p.embed(lift_var_names(m, aux_dim), &positions)?)
}

/// Sum of squares of the aux variables at 0-based aux indices `aux`.
fn aux_norm_squared(base_dim: usize, aux_dim: usize, aux: impl Iterator<Item = usize>) -> Polynomial {
    let vars = lift_var_names(base_dim, aux_dim);
    let mut acc = Polynomial::zero(vars.clone());
    for j in aux {
        let t = Polynomial::var(vars.clone(), base_dim + j).expect("aux index in range");
        acc = acc.add(&t.square()).expect("aligned");
    }
    acc
}

impl Lift {
    pub(crate) fn from_parts(
        base_dim: usize,
        aux_dim: usize,
        root: PlanNode,
        witness: Option<WitnessProgram>,
        source: NnfFormula,
    ) -> Result<Lift, LiftError> {
        let plan = EvalPlan::new(root)?;
        if plan.arity() != base_dim + aux_dim {
            return Err(PlanError::Arity { expected: base_dim + aux_dim, got: plan.arity() }.into());
        }
        if source.base_dim() != base_dim {
            return Err(LiftError::BaseDim { expected: base_dim, got: source.base_dim() });
        }
        let vars = lift_var_names(base_dim, aux_dim);
        let compiled = plan.compile();
        Ok(Lift { base_dim, aux_dim, plan, vars, poly: OnceLock::new(), compiled, witness, source })
    }

    /// A hand-built lift: `poly` over `base_dim` base variables followed by
    /// auxiliary ones, claimed to project onto `source`.
    pub fn custom(
        poly: Polynomial,
        base_dim: usize,
        source: NnfFormula,
        witness: Option<WitnessProgram>,
    ) -> Result<Lift, LiftError> {
        if poly.nvars() < base_dim {
            return Err(LiftError::BaseDim { expected: base_dim, got: poly.nvars() });
        }
        let aux_dim = poly.nvars() - base_dim;
        let poly = poly.rename(lift_var_names(base_dim, aux_dim))?;
        Lift::from_parts(base_dim, aux_dim, PlanNode::Poly(poly), witness, source)
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    /// The expanded polynomial over `x1..xm, t1..tk`.
    pub fn poly(&self) -> &Polynomial {
        self.poly.get_or_init(|| self.plan.expand(&self.vars).expect("validated plan expands"))
    }

    pub fn plan(&self) -> &EvalPlan {
        &self.plan
    }

    pub fn compiled(&self) -> &CompiledPlan {
        &self.compiled
    }

    pub fn witness(&self) -> Option<&WitnessProgram> {
        self.witness.as_ref()
    }

    pub fn source(&self) -> &NnfFormula {
        &self.source
    }

    pub fn degree(&self) -> u32 {
        self.poly().degree()
    }

    pub fn var_names(&self) -> &[String] {
        &self.vars
    }

    /// Exact value of `P` at a full (base ++ aux) rational point.
    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        self.plan.eval_exact(point)
    }

    /// Float value of `P` at a full point, evaluated structurally.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.compiled.eval(point)
    }

    /// Auxiliary coordinates placing `x` on the variety.
    pub fn synth_witness(&self, x: &[Rational]) -> Result<Vec<AuxValue>, WitnessError> {
        if x.len() != self.base_dim {
            return Err(WitnessError::Dimension { expected: self.base_dim, got: x.len() });
        }
        if !self.source.contains_unchecked(x) {
            return Err(WitnessError::NotInSet);
        }
        let program = self.witness.as_ref().ok_or(WitnessError::NoProgram)?;
        let mut aux = vec![AuxValue::Exact(Rational::zero()); self.aux_dim];
        program.fill(x, &mut aux)?;
        Ok(aux)
    }

    /// `|P(x, aux)|`, evaluated exactly.
    pub fn residual(&self, x: &[Rational], aux: &[AuxValue]) -> f64 {
        let mut pt = x.to_vec();
        pt.extend(aux.iter().map(|a| a.value().clone()));
        crate::rational::to_f64(&self.plan.eval_exact(&pt).expect("dimensions match")).abs()
    }
}

/// `p = 0` lifts to itself.
pub fn lift_eq(p: &Polynomial) -> Result<Lift, LiftError> {
    let p = base_poly(p)?;
    let m = p.nvars();
    Lift::from_parts(
        m,
        0,
        PlanNode::Poly(p.clone()),
        Some(WitnessProgram::Eq),
        NnfFormula::Atom { poly: p, rel: Rel::Eq },
    )
}

fn one_aux_lift(p: &Polynomial, rel: Rel) -> Result<Lift, LiftError> {
    let p = base_poly(p)?;
    let m = p.nvars();
    let wide = widen(&p, 1)?;
    let t = Polynomial::var(lift_var_names(m, 1), m)?;
    let one = Rational::one();
    let (body, witness) = match rel {
        Rel::Ge => (t.square().sub(&wide)?, WitnessProgram::Ge { slot: 1, poly: p.clone() }),
        Rel::Gt => (t.square().mul(&wide)?.add_constant(&-one), WitnessProgram::Gt { slot: 1, poly: p.clone() }),
        Rel::Ne => (t.mul(&wide)?.add_constant(&-one), WitnessProgram::Ne { slot: 1, poly: p.clone() }),
        other => unreachable!("no single-aux lift for {other:?}"),
    };
    Lift::from_parts(m, 1, PlanNode::Poly(body), Some(witness), NnfFormula::Atom { poly: p, rel })
}

/// `p >= 0` lifts to `t² - p(x)`.
pub fn lift_ge(p: &Polynomial) -> Result<Lift, LiftError> {
    one_aux_lift(p, Rel::Ge)
}

/// `p > 0` lifts to `t²·p(x) - 1`.
pub fn lift_gt(p: &Polynomial) -> Result<Lift, LiftError> {
    one_aux_lift(p, Rel::Gt)
}

/// `p != 0` lifts to `t·p(x) - 1`.
pub fn lift_ne(p: &Polynomial) -> Result<Lift, LiftError> {
    one_aux_lift(p, Rel::Ne)
}

pub fn lift_and(a: &Lift, b: &Lift) -> Result<Lift, LiftError> {
    lift_and_all(&[a.clone(), b.clone()])
}

pub fn lift_or(a: &Lift, b: &Lift) -> Result<Lift, LiftError> {
    lift_or_all(&[a.clone(), b.clone()])
}

struct Layout {
    base_dim: usize,
    aux_dim: usize,
    offsets: Vec<usize>,
}

fn layout(parts: &[Lift]) -> Result<Layout, LiftError> {
    let first = parts.first().ok_or(LiftError::Empty)?;
    let base_dim = first.base_dim;
    let mut offsets = Vec::with_capacity(parts.len());
    let mut aux_dim = 0;
    for p in parts {
        if p.base_dim != base_dim {
            return Err(LiftError::BaseDim { expected: base_dim, got: p.base_dim });
        }
        offsets.push(aux_dim);
        aux_dim += p.aux_dim;
    }
    Ok(Layout { base_dim, aux_dim, offsets })
}

/// The part's plan read from the combined variable list, with its aux block
/// starting after `offset` aux variables.
fn embedded(part: &Lift, lay: &Layout, offset: usize) -> PlanNode {
    let positions: Vec<usize> = (0..lay.base_dim).chain((0..part.aux_dim).map(|j| lay.base_dim + offset + j)).collect();
    part.plan.root().clone().embedded(lay.base_dim + lay.aux_dim, &positions)
}

/// Conjunction: `Σ Pᵢ²` over disjoint aux blocks.
pub fn lift_and_all(parts: &[Lift]) -> Result<Lift, LiftError> {
    let lay = layout(parts)?;
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    let root = PlanNode::Sum(
        parts.iter().zip(&lay.offsets).map(|(p, &off)| PlanNode::Square(Box::new(embedded(p, &lay, off)))).collect(),
    );
    let witness = parts
        .iter()
        .zip(&lay.offsets)
        .map(|(p, &off)| p.witness.as_ref().map(|w| w.shifted(off)))
        .collect::<Option<Vec<_>>>()
        .map(WitnessProgram::And);
    let source = NnfFormula::And(parts.iter().map(|p| p.source.clone()).collect());
    Lift::from_parts(lay.base_dim, lay.aux_dim, root, witness, source)
}

/// Disjunction: `Π (Pᵢ² + |foreign aux|²)`.
pub fn lift_or_all(parts: &[Lift]) -> Result<Lift, LiftError> {
    let lay = layout(parts)?;
    if parts.len() == 1 {
        return Ok(parts[0].clone());
    }
    let factors = parts
        .iter()
        .zip(&lay.offsets)
        .map(|(p, &off)| {
            let sq = PlanNode::Square(Box::new(embedded(p, &lay, off)));
            if lay.aux_dim == p.aux_dim {
                sq
            } else {
                let foreign = (0..lay.aux_dim).filter(|j| *j < off || *j >= off + p.aux_dim);
                let pad = aux_norm_squared(lay.base_dim, lay.aux_dim, foreign);
                PlanNode::Sum(vec![sq, PlanNode::Poly(pad)])
            }
        })
        .collect();
    let witness = parts
        .iter()
        .zip(&lay.offsets)
        .map(|(p, &off)| {
            p.witness.as_ref().map(|w| OrBranch {
                guard: p.source.clone(),
                slots: (off + 1..=off + p.aux_dim).collect(),
                program: w.shifted(off),
            })
        })
        .collect::<Option<Vec<_>>>()
        .map(WitnessProgram::Or);
    let source = NnfFormula::Or(parts.iter().map(|p| p.source.clone()).collect());
    Lift::from_parts(lay.base_dim, lay.aux_dim, PlanNode::Product(factors), witness, source)
}

/// `Y \ Z` for a subtrahend lift without auxiliary variables: `Z` is then
/// the zero set of one polynomial `q`, and the result is `Y ∧ (q != 0)`.
pub fn lift_diff(a: &Lift, b: &Lift) -> Result<Lift, LiftError> {
    if b.aux_dim > 0 {
        return Err(LiftError::NonAtomicSubtrahend { aux_dim: b.aux_dim });
    }
    lift_and(a, &lift_ne(b.poly())?)
}

/// The difference construction `{p(x, y) = 0, t·q(x, z) = 1}` applied
/// without restriction, as `P_a(x, y)² + (t·P_b(x, z) - 1)²` over
/// `x, y, z, t`.
///
/// When `b` has auxiliary variables this projects to
/// `Y ∩ {x : ∃z, q(x, z) ≠ 0}`, which is generally larger than `Y \ Z`.
/// It exists to document that failure; the compiler never uses it.
pub fn unrestricted_difference(a: &Lift, b: &Lift) -> Result<Polynomial, LiftError> {
    if a.base_dim != b.base_dim {
        return Err(LiftError::BaseDim { expected: a.base_dim, got: b.base_dim });
    }
    let m = a.base_dim;
    let k = a.aux_dim + b.aux_dim + 1;
    let vars = lift_var_names(m, k);
    let pa_pos: Vec<usize> = (0..m).chain((0..a.aux_dim).map(|j| m + j)).collect();
    let pb_pos: Vec<usize> = (0..m).chain((0..b.aux_dim).map(|j| m + a.aux_dim + j)).collect();
    let pa = a.poly().embed(vars.clone(), &pa_pos)?;
    let pb = b.poly().embed(vars.clone(), &pb_pos)?;
    let t = Polynomial::var(vars, m + k - 1)?;
    let tq = t.mul(&pb)?.add_constant(&-Rational::one());
    Ok(pa.square().add(&tq.square())?)
}

/// Compiles a negation-normal-form formula by structural recursion; aux
/// variables are numbered left to right in depth-first order.
pub fn compile(f: &NnfFormula) -> Result<Lift, LiftError> {
    match f {
        NnfFormula::Atom { poly, rel } => match rel {
            Rel::Eq => lift_eq(poly),
            Rel::Ge => lift_ge(poly),
            Rel::Gt => lift_gt(poly),
            Rel::Ne => lift_ne(poly),
            Rel::Le | Rel::Lt => Err(LiftError::NotNnf(format!("atom `{poly} {} 0`", rel.symbol()))),
        },
        NnfFormula::And(c) => lift_and_all(&c.iter().map(compile).collect::<Result<Vec<_>, _>>()?),
        NnfFormula::Or(c) => lift_or_all(&c.iter().map(compile).collect::<Result<Vec<_>, _>>()?),
    }
}

/// `compile(f.to_nnf())`.
pub fn compile_formula(f: &Formula) -> Result<Lift, LiftError> {
    compile(&f.to_nnf())
}

#[cfg(test)]
mod tests;
