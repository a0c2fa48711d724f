use serde::{Deserialize, Serialize};

use super::{Monomial, PolyError, Polynomial};
use crate::rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coeff: String,
    pub exps: Vec<u32>,
}

/// Structured form of a polynomial: variable names plus terms in canonical
/// order with `"num/den"` coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub var_names: Vec<String>,
    pub terms: Vec<TermRecord>,
}

impl From<&Polynomial> for PolyRecord {
    fn from(p: &Polynomial) -> Self {
        PolyRecord {
            var_names: p.vars.clone(),
            terms: p
                .terms()
                .map(|(m, c)| TermRecord { coeff: rational::to_fraction_string(c), exps: m.0.clone() })
                .collect(),
        }
    }
}

impl TryFrom<PolyRecord> for Polynomial {
    type Error = PolyError;

    fn try_from(r: PolyRecord) -> Result<Self, PolyError> {
        let n = r.var_names.len();
        let mut p = Polynomial::zero(r.var_names);
        for t in r.terms {
            if t.exps.len() != n {
                return Err(PolyError::Record(format!(
                    "term `{}` has {} exponents for {n} variables",
                    t.coeff,
                    t.exps.len()
                )));
            }
            let c = rational::parse_rational(&t.coeff).map_err(|e| PolyError::Record(e.to_string()))?;
            p.add_term(Monomial(t.exps), c);
        }
        Ok(p)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = PolyRecord::deserialize(d)?;
        Polynomial::try_from(r).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::lift_var_names;
    use crate::rational::{frac, int};

    #[test]
    fn record_layout_is_stable() {
        let p =
            Polynomial::from_terms(lift_var_names(1, 1), [(int(-1), vec![0, 0]), (frac(3, 2), vec![2, 1])]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"var_names":["x1","t1"],"terms":[{"coeff":"3/2","exps":[2,1]},{"coeff":"-1/1","exps":[0,0]}]}"#
        );
        assert_eq!(serde_json::from_str::<Polynomial>(&s).unwrap(), p);
    }

    #[test]
    fn bad_records_are_rejected() {
        let s = r#"{"var_names":["x1"],"terms":[{"coeff":"1/1","exps":[1,2]}]}"#;
        assert!(serde_json::from_str::<Polynomial>(s).is_err());
        let s = r#"{"var_names":["x1"],"terms":[{"coeff":"one","exps":[1]}]}"#;
        assert!(serde_json::from_str::<Polynomial>(s).is_err());
    }
}
