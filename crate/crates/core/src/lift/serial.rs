use serde::{Deserialize, Serialize};

use super::{Lift, LiftError, OrBranch, WitnessProgram};
use crate::formula::{parse_polynomial, parse_with_dim};
use crate::poly::{AffineMap, PlanNode, PolyRecord, Polynomial, TermRecord};
use crate::rational;

pub const LIFT_FORMAT: &str = "unsemi-lift/1";

/// On-disk form of a [`Lift`]. Field order is part of the format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftFile {
    pub format: String,
    pub base_dim: usize,
    pub aux_dim: usize,
    pub var_names: Vec<String>,
    pub terms: Vec<TermRecord>,
    pub source_text: String,
    #[serde(default)]
    pub witness_tree: Option<WitnessRecord>,
    /// Structured form of the polynomial; a single leaf when absent.
    #[serde(default)]
    pub plan: Option<PlanNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessRecord {
    Eq,
    Ge { slot: usize, poly: String },
    Gt { slot: usize, poly: String },
    Ne { slot: usize, poly: String },
    And { children: Vec<WitnessRecord> },
    Or { branches: Vec<BranchRecord> },
    Constant { values: Vec<String> },
    Bridge { slot: usize, map: AffineMap, inner: Box<WitnessRecord> },
    Shifted { offset: usize, inner: Box<WitnessRecord> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub guard: String,
    pub slots: Vec<usize>,
    pub program: WitnessRecord,
}

impl WitnessRecord {
    fn from_program(p: &WitnessProgram) -> WitnessRecord {
        match p {
            WitnessProgram::Eq => WitnessRecord::Eq,
            WitnessProgram::Ge { slot, poly } => WitnessRecord::Ge { slot: *slot, poly: poly.to_string() },
            WitnessProgram::Gt { slot, poly } => WitnessRecord::Gt { slot: *slot, poly: poly.to_string() },
            WitnessProgram::Ne { slot, poly } => WitnessRecord::Ne { slot: *slot, poly: poly.to_string() },
            WitnessProgram::And(c) => {
                WitnessRecord::And { children: c.iter().map(WitnessRecord::from_program).collect() }
            }
            WitnessProgram::Or(b) => WitnessRecord::Or {
                branches: b
                    .iter()
                    .map(|br| BranchRecord {
                        guard: br.guard.to_string(),
                        slots: br.slots.clone(),
                        program: WitnessRecord::from_program(&br.program),
                    })
                    .collect(),
            },
            WitnessProgram::Constant(v) => {
                WitnessRecord::Constant { values: v.iter().map(rational::to_fraction_string).collect() }
            }
            WitnessProgram::Bridge { inner, map, slot } => WitnessRecord::Bridge {
                slot: *slot,
                map: map.clone(),
                inner: Box::new(WitnessRecord::from_program(inner)),
            },
            WitnessProgram::Shifted(o, inner) => {
                WitnessRecord::Shifted { offset: *o, inner: Box::new(WitnessRecord::from_program(inner)) }
            }
        }
    }

    fn to_program(&self, base_dim: usize) -> Result<WitnessProgram, LiftError> {
        let poly = |s: &str| -> Result<Polynomial, LiftError> { Ok(parse_polynomial(s, Some(base_dim))?) };
        Ok(match self {
            WitnessRecord::Eq => WitnessProgram::Eq,
            WitnessRecord::Ge { slot, poly: p } => WitnessProgram::Ge { slot: *slot, poly: poly(p)? },
            WitnessRecord::Gt { slot, poly: p } => WitnessProgram::Gt { slot: *slot, poly: poly(p)? },
            WitnessRecord::Ne { slot, poly: p } => WitnessProgram::Ne { slot: *slot, poly: poly(p)? },
            WitnessRecord::And { children } => {
                WitnessProgram::And(children.iter().map(|c| c.to_program(base_dim)).collect::<Result<_, _>>()?)
            }
            WitnessRecord::Or { branches } => WitnessProgram::Or(
                branches
                    .iter()
                    .map(|b| {
                        Ok(OrBranch {
                            guard: parse_with_dim(&b.guard, base_dim)?.to_nnf(),
                            slots: b.slots.clone(),
                            program: b.program.to_program(base_dim)?,
                        })
                    })
                    .collect::<Result<_, LiftError>>()?,
            ),
            WitnessRecord::Constant { values } => WitnessProgram::Constant(
                values
                    .iter()
                    .map(|v| rational::parse_rational(v).map_err(|e| LiftError::Format(e.to_string())))
                    .collect::<Result<_, _>>()?,
            ),
            WitnessRecord::Bridge { slot, map, inner } => {
                WitnessProgram::Bridge { inner: Box::new(inner.to_program(base_dim)?), map: map.clone(), slot: *slot }
            }
            WitnessRecord::Shifted { offset, inner } => {
                WitnessProgram::Shifted(*offset, Box::new(inner.to_program(base_dim)?))
            }
        })
    }
}

impl Lift {
    pub fn to_file(&self) -> LiftFile {
        let rec = PolyRecord::from(self.poly());
        LiftFile {
            format: LIFT_FORMAT.to_string(),
            base_dim: self.base_dim,
            aux_dim: self.aux_dim,
            var_names: rec.var_names,
            terms: rec.terms,
            source_text: self.source.to_string(),
            witness_tree: self.witness.as_ref().map(WitnessRecord::from_program),
            plan: Some(self.plan.root().clone()),
        }
    }

    /// Pretty JSON with a trailing newline; byte-identical for equal lifts.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("lift serializes");
        s.push('\n');
        s
    }

    pub fn from_file(file: LiftFile) -> Result<Lift, LiftError> {
        if file.format != LIFT_FORMAT {
            return Err(LiftError::Format(format!("unsupported format `{}`", file.format)));
        }
        if file.var_names.len() != file.base_dim + file.aux_dim {
            return Err(LiftError::Format(format!(
                "{} variable names for base_dim {} + aux_dim {}",
                file.var_names.len(),
                file.base_dim,
                file.aux_dim
            )));
        }
        let poly = Polynomial::try_from(PolyRecord { var_names: file.var_names, terms: file.terms })?;
        let source = parse_with_dim(&file.source_text, file.base_dim)?.to_nnf();
        let witness = file.witness_tree.map(|w| w.to_program(file.base_dim)).transpose()?;
        let root = match file.plan {
            Some(root) => root,
            None => PlanNode::Poly(poly.clone()),
        };
        let lift = Lift::from_parts(file.base_dim, file.aux_dim, root, witness, source)?;
        if lift.poly() != &poly.rename(lift.var_names().to_vec())? {
            return Err(LiftError::Format("plan does not expand to the stored polynomial".into()));
        }
        Ok(lift)
    }

    pub fn from_json(s: &str) -> Result<Lift, LiftError> {
        let file: LiftFile = serde_json::from_str(s).map_err(|e| LiftError::Format(e.to_string()))?;
        Lift::from_file(file)
    }
}
