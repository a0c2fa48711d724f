//! Joining components of a lift with a bridging circle.
//!
//! Given a lift `X` and two of its points `(x, y1)`, `(x, y2)` over the same
//! base point, an affine change of the aux coordinates sends `y1` to `0` and
//! `y2` to `e1`. The circle
//!
//! ```text
//! Y = { (u, v, t) : u = x, v1² + t² = v1, v_i = 0 for i > 1 }
//! ```
//!
//! passes through both normalized points, lies over the single base point
//! `x`, and so `Y ∪ X × {0}` has the same projection as `X` while joining
//! the components containing the two points.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::lift::{Lift, LiftError, WitnessProgram};
use crate::poly::{lift_var_names, AffineMap, LinearForm, PlanNode, PolyError, Polynomial};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GadgetError {
    #[error("degenerate pair: y1 = y2")]
    DegeneratePair,
    #[error("lift has no auxiliary variables to normalize")]
    NoAuxSpace,
    #[error("pair dimension mismatch: {0}")]
    Dimension(String),
    #[error("point (x, {which}) is off the variety: |P| = {residual:e} > {delta:e}")]
    OffVariety { which: &'static str, residual: f64, delta: f64 },
    #[error("witness pair {index} is invalid")]
    InvalidPair { index: usize, source: Box<GadgetError> },
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Two points of a lift over the same base point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPair {
    #[serde(with = "rational::serde_fraction_vec")]
    pub x: Vec<Rational>,
    #[serde(with = "rational::serde_fraction_vec")]
    pub y1: Vec<Rational>,
    #[serde(with = "rational::serde_fraction_vec")]
    pub y2: Vec<Rational>,
}

impl WitnessPair {
    pub fn new(x: Vec<Rational>, y1: Vec<Rational>, y2: Vec<Rational>) -> Self {
        WitnessPair { x, y1, y2 }
    }

    /// Checks dimensions, distinctness, and `|P(x, yi)| <= delta` (exactly).
    pub fn validate(&self, lift: &Lift, delta: f64) -> Result<(), GadgetError> {
        if self.x.len() != lift.base_dim() {
            return Err(GadgetError::Dimension(format!(
                "x has {} coordinates, lift base dimension is {}",
                self.x.len(),
                lift.base_dim()
            )));
        }
        for (name, y) in [("y1", &self.y1), ("y2", &self.y2)] {
            if y.len() != lift.aux_dim() {
                return Err(GadgetError::Dimension(format!(
                    "{name} has {} coordinates, lift aux dimension is {}",
                    y.len(),
                    lift.aux_dim()
                )));
            }
        }
        if lift.aux_dim() == 0 {
            return Err(GadgetError::NoAuxSpace);
        }
        if self.y1 == self.y2 {
            return Err(GadgetError::DegeneratePair);
        }
        let bound = rational::from_f64(delta).unwrap_or_else(Rational::zero);
        for (which, y) in [("y1", &self.y1), ("y2", &self.y2)] {
            let mut pt = self.x.clone();
            pt.extend(y.iter().cloned());
            let v = lift.plan().eval_exact(&pt)?;
            if v.abs() > bound {
                return Err(GadgetError::OffVariety { which, residual: rational::to_f64(&v).abs(), delta });
            }
        }
        Ok(())
    }
}

/// The affine map `A(v) = M(v - y1)` with `A(y1) = 0` and `A(y2) = e1`,
/// where `M` swaps coordinate 1 with the pivot `j = argmax |y2_j - y1_j|`
/// and then eliminates the other coordinates of the difference.
pub fn build_normalizing_affine(y1: &[Rational], y2: &[Rational]) -> Result<AffineMap, GadgetError> {
    let k = y1.len();
    if k == 0 {
        return Err(GadgetError::NoAuxSpace);
    }
    if y2.len() != k {
        return Err(GadgetError::Dimension(format!("y1 has {k} coordinates, y2 has {}", y2.len())));
    }
    let d: Vec<Rational> = y2.iter().zip(y1).map(|(b, a)| b - a).collect();
    let mut pivot = 0;
    for j in 1..k {
        if d[j].abs() > d[pivot].abs() {
            pivot = j;
        }
    }
    if d[pivot].is_zero() {
        return Err(GadgetError::DegeneratePair);
    }
    // P: swap 0 <-> pivot; E: row 0 scaled by 1/d'_0, rows i>0 minus d'_i/d'_0 · row 0.
    let mut perm: Vec<usize> = (0..k).collect();
    perm.swap(0, pivot);
    let dp: Vec<Rational> = perm.iter().map(|&i| d[i].clone()).collect();
    let lead = dp[0].clone();
    let mut m = vec![vec![Rational::zero(); k]; k];
    // (E·P)[i][j] = Σ_l E[i][l] P[l][j], P[l][j] = 1 iff perm[l] = j
    for i in 0..k {
        for l in 0..k {
            let e = if i == 0 {
                if l == 0 {
                    Rational::one() / &lead
                } else {
                    Rational::zero()
                }
            } else if l == 0 {
                -(&dp[i] / &lead)
            } else if l == i {
                Rational::one()
            } else {
                Rational::zero()
            };
            if !e.is_zero() {
                m[i][perm[l]] += e;
            }
        }
    }
    let offset: Vec<Rational> =
        m.iter().map(|row| -row.iter().zip(y1).fold(Rational::zero(), |acc, (a, y)| acc + a * y)).collect();
    Ok(AffineMap::new(m, offset)?)
}

/// Splices the bridging circle for `pair` into `lift`.
///
/// The result lives on `m + k + 1` variables: the old aux block replaced by
/// normalized coordinates `v = A(y)` and one fresh `t`:
///
/// `P' = (Q(u, v)² + t²) · C(u, v, t)` with `Q(u, v) = P(u, A⁻¹v)` and
/// `C = Σ (u_i - x_i)² + (v1² + t² - v1)² + Σ_{i≥2} v_i²`.
pub fn circle_bridge(lift: &Lift, pair: &WitnessPair, delta: f64) -> Result<Lift, GadgetError> {
    pair.validate(lift, delta)?;
    let a = build_normalizing_affine(&pair.y1, &pair.y2)?;
    Ok(bridge_with_map(lift, pair, &a)?)
}

fn bridge_with_map(lift: &Lift, pair: &WitnessPair, a: &AffineMap) -> Result<Lift, LiftError> {
    let m = lift.base_dim();
    let k = lift.aux_dim();
    let n = m + k + 1;
    let vars = lift_var_names(m, k + 1);
    let inv = a.inverse();

    // Q: old plan read at (u, A⁻¹ v)
    let mut rows: Vec<LinearForm> = (0..m).map(LinearForm::select).collect();
    for i in 0..k {
        rows.push(LinearForm {
            terms: (0..k)
                .filter(|&j| !inv.matrix()[i][j].is_zero())
                .map(|j| (m + j, inv.matrix()[i][j].clone()))
                .collect(),
            constant: inv.offset()[i].clone(),
        });
    }
    let q = PlanNode::Affine { arity: n, rows, inner: Box::new(lift.plan().root().clone()) };

    let var = |i: usize| Polynomial::var(vars.clone(), i).expect("index in range");
    let t = var(m + k);
    let v1 = var(m);
    let mut circle = Polynomial::zero(vars.clone());
    for (i, xi) in pair.x.iter().enumerate() {
        circle = circle.add(&var(i).add_constant(&-xi.clone()).square())?;
    }
    let ring = v1.square().add(&t.square())?.sub(&v1)?;
    circle = circle.add(&ring.square())?;
    for i in 1..k {
        circle = circle.add(&var(m + i).square())?;
    }

    let root = PlanNode::Product(vec![
        PlanNode::Sum(vec![PlanNode::Square(Box::new(q)), PlanNode::Poly(t.square())]),
        PlanNode::Poly(circle),
    ]);
    let witness =
        lift.witness().map(|w| WitnessProgram::Bridge { inner: Box::new(w.clone()), map: a.clone(), slot: k + 1 });
    Lift::from_parts(m, k + 1, root, witness, lift.source().clone())
}

/// Applies one bridge per pair in order. Pairs are given in the original
/// lift's coordinates and are carried through every earlier bridge (mapped by
/// its affine normalization and extended by a zero `t`) before validation.
pub fn reduce_components(lift: &Lift, pairs: &[WitnessPair], delta: f64) -> Result<Lift, GadgetError> {
    let mut current = lift.clone();
    let mut maps: Vec<AffineMap> = Vec::new();
    for (index, pair) in pairs.iter().enumerate() {
        let carry = |y: &[Rational]| -> Vec<Rational> {
            maps.iter().fold(y.to_vec(), |acc, a| {
                let mut next = a.apply(&acc);
                next.push(Rational::zero());
                next
            })
        };
        if pair.y1.len() != lift.aux_dim() || pair.y2.len() != lift.aux_dim() {
            return Err(GadgetError::InvalidPair {
                index,
                source: Box::new(GadgetError::Dimension(format!(
                    "pair aux coordinates must have length {}",
                    lift.aux_dim()
                ))),
            });
        }
        let carried = WitnessPair::new(pair.x.clone(), carry(&pair.y1), carry(&pair.y2));
        carried.validate(&current, delta).map_err(|e| GadgetError::InvalidPair { index, source: Box::new(e) })?;
        let a = build_normalizing_affine(&carried.y1, &carried.y2)
            .map_err(|e| GadgetError::InvalidPair { index, source: Box::new(e) })?;
        current = bridge_with_map(&current, &carried, &a)?;
        maps.push(a);
    }
    Ok(current)
}
