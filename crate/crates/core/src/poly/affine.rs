use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{PolyError, Polynomial};
use crate::rational::{self, Rational};

/// Invertible affine map `v ↦ matrix·v + offset` with exact entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AffineRecord", into = "AffineRecord")]
pub struct AffineMap {
    matrix: Vec<Vec<Rational>>,
    offset: Vec<Rational>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<Rational>>, offset: Vec<Rational>) -> Result<Self, PolyError> {
        let k = offset.len();
        if matrix.len() != k || matrix.iter().any(|row| row.len() != k) {
            return Err(PolyError::BlockSize { map: matrix.len(), block: k });
        }
        if determinant(&matrix).is_zero() {
            return Err(PolyError::SingularMap);
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn identity(k: usize) -> Self {
        let matrix =
            (0..k).map(|i| (0..k).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
        AffineMap { matrix, offset: vec![Rational::zero(); k] }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[Rational] {
        &self.offset
    }

    pub fn determinant(&self) -> Rational {
        determinant(&self.matrix)
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.dim(), "affine map applied to a vector of the wrong length");
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(v).fold(b.clone(), |acc, (a, x)| acc + a * x))
            .collect()
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim(), "affine map applied to a vector of the wrong length");
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(v).fold(rational::to_f64(b), |acc, (a, x)| acc + rational::to_f64(a) * x))
            .collect()
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = invert(&self.matrix).expect("AffineMap is invertible by construction");
        let offset = inv
            .iter()
            .map(|row| -row.iter().zip(&self.offset).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect();
        AffineMap { matrix: inv, offset }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let k = self.dim();
        assert_eq!(k, inner.dim());
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).fold(Rational::zero(), |acc, l| acc + &self.matrix[i][l] * &inner.matrix[l][j]))
                    .collect()
            })
            .collect();
        let offset = self.apply(&inner.offset);
        AffineMap { matrix, offset }
    }
}

fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &a[col][col];
            let (top, bottom) = a.split_at_mut(r);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= &factor * src;
            }
        }
    }
    det
}

fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] /= &p;
            inv[col][c] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let da = &factor * &a[col][c];
                a[r][c] -= da;
                let di = &factor * &inv[col][c];
                inv[r][c] -= di;
            }
        }
    }
    Some(inv)
}

pub(super) fn substitute(p: &Polynomial, block: &[usize], map: &AffineMap) -> Result<Polynomial, PolyError> {
    if block.len() != map.dim() {
        return Err(PolyError::BlockSize { map: map.dim(), block: block.len() });
    }
    if let Some(&bad) = block.iter().find(|&&i| i >= p.nvars()) {
        return Err(PolyError::VarIndex(bad));
    }
    let inv = map.inverse();
    let vars = p.vars().to_vec();
    let mut replacements: Vec<Polynomial> =
        (0..p.nvars()).map(|i| Polynomial::var(vars.clone(), i)).collect::<Result<_, _>>()?;
    for (row, &target) in block.iter().enumerate() {
        let mut form = Polynomial::constant(vars.clone(), inv.offset[row].clone());
        for (j, &src) in block.iter().enumerate() {
            let v = Polynomial::var(vars.clone(), src)?;
            form = form.add(&v.scale(&inv.matrix[row][j]))?;
        }
        replacements[target] = form;
    }
    p.compose(&replacements)
}

#[derive(Serialize, Deserialize)]
struct AffineRecord {
    matrix: Vec<Vec<String>>,
    offset: Vec<String>,
}

impl From<AffineMap> for AffineRecord {
    fn from(a: AffineMap) -> Self {
        AffineRecord {
            matrix: a.matrix.iter().map(|row| row.iter().map(rational::to_fraction_string).collect()).collect(),
            offset: a.offset.iter().map(rational::to_fraction_string).collect(),
        }
    }
}

impl TryFrom<AffineRecord> for AffineMap {
    type Error = String;

    fn try_from(r: AffineRecord) -> Result<Self, Self::Error> {
        let parse = |s: &String| rational::parse_rational(s).map_err(|e| e.to_string());
        let matrix = r
            .matrix
            .iter()
            .map(|row| row.iter().map(parse).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let offset = r.offset.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
        AffineMap::new(matrix, offset).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn vars2() -> Vec<String> {
        vec!["v1".into(), "v2".into()]
    }

    #[test]
    fn identity_substitution_is_a_no_op() {
        let p = Polynomial::from_terms(vars2(), [(int(3), vec![2, 1]), (frac(-1, 2), vec![0, 1])]).unwrap();
        assert_eq!(p.substitute_affine(&[0, 1], &AffineMap::identity(2)).unwrap(), p);
    }

    #[test]
    fn translation() {
        // A(v) = v - c, so A⁻¹(v) = v + c.
        let c = [frac(1, 3), int(2)];
        let a = AffineMap::new(AffineMap::identity(2).matrix, c.iter().map(|x| -x.clone()).collect()).unwrap();
        let p = Polynomial::var(vars2(), 0).unwrap();
        assert_eq!(p.substitute_affine(&[0, 1], &a).unwrap().to_string(), "v1 + 1/3");
    }

    #[test]
    fn swap() {
        let swap = AffineMap::new(vec![vec![int(0), int(1)], vec![int(1), int(0)]], vec![int(0), int(0)]).unwrap();
        let p = Polynomial::var(vars2(), 0).unwrap().square();
        assert_eq!(p.substitute_affine(&[0, 1], &swap).unwrap().to_string(), "v2^2");
    }

    #[test]
    fn singular_maps_are_rejected() {
        let err = AffineMap::new(vec![vec![int(1), int(2)], vec![int(2), int(4)]], vec![int(0), int(0)]);
        assert_eq!(err.unwrap_err(), PolyError::SingularMap);
    }

    #[test]
    fn block_size_is_checked() {
        let p = Polynomial::var(vars2(), 0).unwrap();
        assert!(matches!(p.substitute_affine(&[0], &AffineMap::identity(2)), Err(PolyError::BlockSize { .. })));
    }

    #[test]
    fn inverse_round_trip() {
        let a = AffineMap::new(vec![vec![int(2), int(1)], vec![int(1), int(1)]], vec![frac(1, 2), int(-3)]).unwrap();
        let v = vec![frac(7, 3), int(-5)];
        assert_eq!(a.inverse().apply(&a.apply(&v)), v);
        assert_eq!(a.compose(&a.inverse()), AffineMap::identity(2));
        assert_eq!(a.determinant(), int(1));
    }

    #[test]
    fn serde_round_trip() {
        let a = AffineMap::new(vec![vec![int(0), frac(1, 2)], vec![int(1), int(0)]], vec![int(-1), int(0)]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"matrix":[["0/1","1/2"],["1/1","0/1"]],"offset":["-1/1","0/1"]}"#);
        assert_eq!(serde_json::from_str::<AffineMap>(&s).unwrap(), a);
    }
}
