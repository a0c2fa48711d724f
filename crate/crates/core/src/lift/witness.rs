//! Witness programs: recipes producing auxiliary coordinates above a base
//! point of the described set.

use num_traits::{One, Signed, Zero};

use crate::formula::NnfFormula;
use crate::poly::{AffineMap, Polynomial};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WitnessError {
    #[error("point is not in the lift's source set")]
    NotInSet,
    #[error("witness undefined: {0}")]
    Undefined(String),
    #[error("lift carries no witness program")]
    NoProgram,
    #[error("point has {got} coordinates, lift has base dimension {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Bits of precision for square roots that are not rational.
pub const SQRT_BITS: u32 = 128;

/// One auxiliary coordinate: exact when every step producing it was
/// rational, otherwise a rational approximation (square roots are taken to
/// [`SQRT_BITS`] bits).
#[derive(Debug, Clone, PartialEq)]
pub enum AuxValue {
    Exact(Rational),
    Approx(Rational),
}

impl AuxValue {
    pub fn value(&self) -> &Rational {
        match self {
            AuxValue::Exact(r) | AuxValue::Approx(r) => r,
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(self.value())
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            AuxValue::Exact(r) => Some(r),
            AuxValue::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AuxValue::Exact(_))
    }
}

/// Rational coordinates when every entry is exact.
pub fn all_exact(values: &[AuxValue]) -> Option<Vec<Rational>> {
    values.iter().map(|v| v.exact().cloned()).collect()
}

/// A branch of an `Or` node: its guard formula, the aux slots it owns, and
/// the program filling them.
#[derive(Debug, Clone, PartialEq)]
pub struct OrBranch {
    pub guard: NnfFormula,
    pub slots: Vec<usize>,
    pub program: WitnessProgram,
}

/// Slots are 1-based and name auxiliary variables (`slot 3` is `t3`).
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessProgram {
    /// `p = 0`: no auxiliary variable.
    Eq,
    /// `t² = p`: `t = √p(x)`.
    Ge {
        slot: usize,
        poly: Polynomial,
    },
    /// `t²·p = 1`: `t = 1/√p(x)`.
    Gt {
        slot: usize,
        poly: Polynomial,
    },
    /// `t·p = 1`: `t = 1/p(x)`.
    Ne {
        slot: usize,
        poly: Polynomial,
    },
    And(Vec<WitnessProgram>),
    /// Fill the first branch whose guard holds; zero every other slot.
    Or(Vec<OrBranch>),
    /// The same auxiliary point for every base point.
    Constant(Vec<Rational>),
    /// Runs `inner`, maps its aux vector through `map`, and sets the extra
    /// slot `slot` to zero.
    Bridge {
        inner: Box<WitnessProgram>,
        map: AffineMap,
        slot: usize,
    },
    /// `inner` with every slot moved up by the offset.
    Shifted(usize, Box<WitnessProgram>),
}

fn put(out: &mut [AuxValue], offset: usize, slot: usize, v: AuxValue) -> Result<(), WitnessError> {
    match out.get_mut(slot + offset - 1) {
        Some(cell) => {
            *cell = v;
            Ok(())
        }
        None => Err(WitnessError::Undefined(format!("slot {} outside the aux block", slot + offset))),
    }
}

impl WitnessProgram {
    /// Renumbers every slot by `offset`.
    pub fn shifted(&self, offset: usize) -> WitnessProgram {
        if offset == 0 {
            return self.clone();
        }
        match self {
            WitnessProgram::Eq => WitnessProgram::Eq,
            WitnessProgram::Ge { slot, poly } => WitnessProgram::Ge { slot: slot + offset, poly: poly.clone() },
            WitnessProgram::Gt { slot, poly } => WitnessProgram::Gt { slot: slot + offset, poly: poly.clone() },
            WitnessProgram::Ne { slot, poly } => WitnessProgram::Ne { slot: slot + offset, poly: poly.clone() },
            WitnessProgram::And(c) => WitnessProgram::And(c.iter().map(|p| p.shifted(offset)).collect()),
            WitnessProgram::Or(b) => WitnessProgram::Or(
                b.iter()
                    .map(|br| OrBranch {
                        guard: br.guard.clone(),
                        slots: br.slots.iter().map(|s| s + offset).collect(),
                        program: br.program.shifted(offset),
                    })
                    .collect(),
            ),
            // constant and bridge programs own a leading block; shifting
            // them is expressed by wrapping
            WitnessProgram::Constant(_) | WitnessProgram::Bridge { .. } => {
                WitnessProgram::Shifted(offset, Box::new(self.clone()))
            }
            WitnessProgram::Shifted(o, inner) => WitnessProgram::Shifted(o + offset, inner.clone()),
        }
    }

    /// Every slot written by this program, in writing order.
    pub fn slots(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_slots(0, &mut out);
        out
    }

    fn collect_slots(&self, offset: usize, out: &mut Vec<usize>) {
        match self {
            WitnessProgram::Eq => {}
            WitnessProgram::Ge { slot, .. } | WitnessProgram::Gt { slot, .. } | WitnessProgram::Ne { slot, .. } => {
                out.push(slot + offset)
            }
            WitnessProgram::And(c) => c.iter().for_each(|p| p.collect_slots(offset, out)),
            WitnessProgram::Or(b) => b.iter().for_each(|br| br.program.collect_slots(offset, out)),
            WitnessProgram::Constant(v) => out.extend((1..=v.len()).map(|s| s + offset)),
            WitnessProgram::Bridge { inner, slot, .. } => {
                inner.collect_slots(offset, out);
                out.push(slot + offset);
            }
            WitnessProgram::Shifted(o, inner) => inner.collect_slots(offset + o, out),
        }
    }

    /// Writes this program's slots of `out` (indexed from slot 1 at
    /// `out[0]`) for the base point `x`.
    pub(crate) fn fill(&self, x: &[Rational], out: &mut [AuxValue]) -> Result<(), WitnessError> {
        self.fill_at(x, out, 0)
    }

    fn fill_at(&self, x: &[Rational], out: &mut [AuxValue], offset: usize) -> Result<(), WitnessError> {
        let eval = |p: &Polynomial| p.eval(x).map_err(|e| WitnessError::Undefined(e.to_string()));
        match self {
            WitnessProgram::Eq => Ok(()),
            WitnessProgram::Ge { slot, poly } => {
                let v = eval(poly)?;
                if v.is_negative() {
                    return Err(WitnessError::Undefined(format!("t{} = sqrt of a negative value", slot + offset)));
                }
                let t = match rational::sqrt_exact(&v) {
                    Some(s) => AuxValue::Exact(s),
                    None => AuxValue::Approx(rational::sqrt_approx(&v, SQRT_BITS).expect("non-negative")),
                };
                put(out, offset, *slot, t)
            }
            WitnessProgram::Gt { slot, poly } => {
                let v = eval(poly)?;
                if !v.is_positive() {
                    return Err(WitnessError::Undefined(format!(
                        "t{} = 1/sqrt of a non-positive value",
                        slot + offset
                    )));
                }
                let t = match rational::sqrt_exact(&v) {
                    Some(s) => AuxValue::Exact(Rational::one() / s),
                    None => AuxValue::Approx(rational::sqrt_approx(&v.recip(), SQRT_BITS).expect("positive")),
                };
                put(out, offset, *slot, t)
            }
            WitnessProgram::Ne { slot, poly } => {
                let v = eval(poly)?;
                if v.is_zero() {
                    return Err(WitnessError::Undefined(format!("t{} = 1/0", slot + offset)));
                }
                put(out, offset, *slot, AuxValue::Exact(Rational::one() / v))
            }
            WitnessProgram::And(c) => c.iter().try_for_each(|p| p.fill_at(x, out, offset)),
            WitnessProgram::Or(branches) => {
                let chosen = branches
                    .iter()
                    .position(|b| b.guard.contains(x).unwrap_or(false))
                    .ok_or_else(|| WitnessError::Undefined("no branch of a disjunction holds".into()))?;
                for (i, b) in branches.iter().enumerate() {
                    if i == chosen {
                        b.program.fill_at(x, out, offset)?;
                    } else {
                        for &s in &b.slots {
                            put(out, offset, s, AuxValue::Exact(Rational::zero()))?;
                        }
                    }
                }
                Ok(())
            }
            WitnessProgram::Constant(v) => {
                for (i, r) in v.iter().enumerate() {
                    put(out, offset, i + 1, AuxValue::Exact(r.clone()))?;
                }
                Ok(())
            }
            WitnessProgram::Bridge { inner, map, slot } => {
                let k = map.dim();
                let mut old = vec![AuxValue::Exact(Rational::zero()); k];
                inner.fill_at(x, &mut old, 0)?;
                let exact = old.iter().all(AuxValue::is_exact);
                let values: Vec<Rational> = old.iter().map(|v| v.value().clone()).collect();
                let mapped =
                    map.apply(&values)
                        .into_iter()
                        .map(|r| if exact { AuxValue::Exact(r) } else { AuxValue::Approx(r) });
                for (i, v) in mapped.enumerate() {
                    put(out, offset, i + 1, v)?;
                }
                put(out, offset, *slot, AuxValue::Exact(Rational::zero()))
            }
            WitnessProgram::Shifted(o, inner) => inner.fill_at(x, out, offset + o),
        }
    }
}
