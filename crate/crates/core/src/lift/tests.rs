use super::*;
use crate::formula::{parse, parse_polynomial};
use crate::rational::{frac, int};

fn poly(s: &str, m: usize) -> Polynomial {
    parse_polynomial(s, Some(m)).unwrap()
}

fn witness_residual(lift: &Lift, x: &[Rational]) -> f64 {
    let aux = lift.synth_witness(x).unwrap();
    lift.residual(x, &aux)
}

/// Every grid point of `[lo, hi]^1` inside the formula gets a witness on the
/// variety; every point outside is refused.
fn check_grid_1d(text: &str, lift: &Lift, lo: i64, hi: i64, steps: i64) {
    let f = parse(text).unwrap();
    for i in 0..=steps {
        let x = vec![int(lo) + frac((hi - lo) * i, steps)];
        if f.contains(&x).unwrap() {
            let r = witness_residual(lift, &x);
            assert!(r <= 1e-10, "{text}: residual {r} at {}", x[0]);
        } else {
            assert_eq!(lift.synth_witness(&x), Err(WitnessError::NotInSet));
        }
    }
}

#[test]
fn eq_atom_is_the_polynomial() {
    let l = lift_eq(&poly("x1", 1)).unwrap();
    assert_eq!(l.aux_dim(), 0);
    assert_eq!(l.poly().to_string(), "x1");
    let c = lift_eq(&poly("x1^2 + x2^2 - 1", 2)).unwrap();
    assert_eq!(c.eval_exact(&[frac(3, 5), frac(4, 5)]).unwrap(), int(0));
    // empty variety: x² + 1 > 0 everywhere
    let e = lift_eq(&poly("x1^2 + 1", 1)).unwrap();
    assert!(e.eval_exact(&[int(0)]).unwrap() >= int(1));
}

#[test]
fn ge_atom() {
    let l = lift_ge(&poly("1 - x1^2", 1)).unwrap();
    assert_eq!(l.poly().to_string(), "x1^2 + t1^2 - 1");
    let aux = l.synth_witness(&[frac(3, 5)]).unwrap();
    assert_eq!(aux, vec![AuxValue::Exact(frac(4, 5))]);
    let ray = lift_ge(&poly("x1", 1)).unwrap();
    assert_eq!(ray.synth_witness(&[int(4)]).unwrap(), vec![AuxValue::Exact(int(2))]);
    // irrational root falls back to a float value
    let aux = ray.synth_witness(&[int(2)]).unwrap();
    assert!(aux[0].exact().is_none());
    assert!(ray.residual(&[int(2)], &aux) <= 1e-10);
    assert_eq!(ray.synth_witness(&[int(-1)]), Err(WitnessError::NotInSet));
    // -1 - x² >= 0 is empty; t² + 1 + x² >= 1
    let e = lift_ge(&poly("-1 - x1^2", 1)).unwrap();
    assert!(e.eval_exact(&[int(0), int(0)]).unwrap() >= int(1));
}

#[test]
fn gt_atom() {
    let l = lift_gt(&poly("x1", 1)).unwrap();
    assert_eq!(l.poly().to_string(), "x1*t1^2 - 1");
    assert_eq!(l.synth_witness(&[int(4)]).unwrap(), vec![AuxValue::Exact(frac(1, 2))]);
    assert_eq!(l.synth_witness(&[int(0)]), Err(WitnessError::NotInSet));
    let one = lift_gt(&poly("1", 1)).unwrap();
    assert_eq!(one.synth_witness(&[int(7)]).unwrap(), vec![AuxValue::Exact(int(1))]);
    // -x² > 0 is empty: P = -x²t² - 1 <= -1
    let e = lift_gt(&poly("-x1^2", 1)).unwrap();
    assert!(e.eval_exact(&[int(3), int(5)]).unwrap() <= int(-1));
}

#[test]
fn ne_atom() {
    let l = lift_ne(&poly("x1", 1)).unwrap();
    assert_eq!(l.poly().to_string(), "x1*t1 - 1");
    assert_eq!(l.synth_witness(&[int(2)]).unwrap(), vec![AuxValue::Exact(frac(1, 2))]);
    assert_eq!(l.synth_witness(&[int(0)]), Err(WitnessError::NotInSet));
    let q = lift_ne(&poly("x1^2 + 1", 1)).unwrap();
    assert_eq!(q.synth_witness(&[int(2)]).unwrap(), vec![AuxValue::Exact(frac(1, 5))]);
    let c = lift_ne(&poly("1", 1)).unwrap();
    assert_eq!(c.synth_witness(&[int(9)]).unwrap(), vec![AuxValue::Exact(int(1))]);
}

#[test]
fn interval_conjunction() {
    let text = "1 - x1^2 >= 0 & x1 >= 0";
    let l = compile_formula(&parse(text).unwrap()).unwrap();
    assert_eq!(l.aux_dim(), 2);
    let expected = poly("(x1^2 + x2^2 - 1)^2 + (x3^2 - x1)^2", 3);
    assert_eq!(l.poly(), &expected.rename(lift_var_names(1, 2)).unwrap());
    check_grid_1d(text, &l, -2, 2, 400);
}

#[test]
fn union_of_two_points() {
    let text = "x1 = 0 | x1 - 1 = 0";
    let l = compile_formula(&parse(text).unwrap()).unwrap();
    assert_eq!(l.aux_dim(), 0);
    assert_eq!(l.poly(), &poly("x1^2 * (x1 - 1)^2", 1));
    assert_eq!(l.synth_witness(&[int(1)]).unwrap(), vec![]);
    check_grid_1d(text, &l, -2, 2, 400);
}

#[test]
fn union_pins_foreign_aux_to_zero() {
    let text = "x1 + 1 >= 0 & -x1 >= 0 | x1 - 1 > 0";
    let l = compile_formula(&parse(text).unwrap()).unwrap();
    assert_eq!(l.aux_dim(), 3);
    // second branch at x = 5: t3 = 1/2, t1 = t2 = 0
    let aux = l.synth_witness(&[int(5)]).unwrap();
    assert_eq!(aux, vec![AuxValue::Exact(int(0)), AuxValue::Exact(int(0)), AuxValue::Exact(frac(1, 2))]);
    // first branch wins when both hold; here only the first does
    let aux = l.synth_witness(&[frac(-3, 4)]).unwrap();
    assert_eq!(aux[2], AuxValue::Exact(int(0)));
    check_grid_1d(text, &l, -3, 3, 600);
    // a zero of one factor with nonzero foreign aux is not a zero of P
    let v = l.eval_exact(&[int(5), int(1), int(0), frac(1, 2)]).unwrap();
    assert!(v > int(0));
}

#[test]
fn annulus_conjunction() {
    let f = parse("x1^2 + x2^2 >= 1 & 4 - x1^2 - x2^2 >= 0").unwrap();
    let l = compile_formula(&f).unwrap();
    assert_eq!(l.aux_dim(), 2);
    assert_eq!(l.degree(), 4);
    let aux = l.synth_witness(&[int(0), frac(3, 2)]).unwrap();
    assert!(l.residual(&[int(0), frac(3, 2)], &aux) <= 1e-10);
    assert_eq!(l.synth_witness(&[int(0), int(0)]), Err(WitnessError::NotInSet));
    assert_eq!(l.synth_witness(&[int(3), int(0)]), Err(WitnessError::NotInSet));
}

#[test]
fn aux_blocks_are_disjoint_and_cover() {
    let f = parse("(x1 >= 0 & x2 > 0) | (x1 != 1 & (x2 = 0 | x1 - x2 >= 0))").unwrap();
    let l = compile_formula(&f).unwrap();
    let w = l.witness().unwrap();
    let mut slots = w.slots();
    assert_eq!(slots.len(), l.aux_dim());
    slots.sort();
    assert_eq!(slots, (1..=l.aux_dim()).collect::<Vec<_>>());
    // depth-first left-to-right numbering
    assert_eq!(w.slots(), vec![1, 2, 3, 4]);
}

#[test]
fn degree_accounting() {
    // atoms: deg p, deg p + 1 (ge with deg p >= 2 gives deg p), ...
    let ge = lift_ge(&poly("x1^3", 1)).unwrap();
    assert_eq!(ge.degree(), 3);
    let gt = lift_gt(&poly("x1^3", 1)).unwrap();
    assert_eq!(gt.degree(), 5);
    let ne = lift_ne(&poly("x1^3", 1)).unwrap();
    assert_eq!(ne.degree(), 4);
    let and = lift_and(&gt, &ne).unwrap();
    assert_eq!(and.degree(), 10);
    let or = lift_or(&gt, &ne).unwrap();
    assert_eq!(or.degree(), 18);
}

#[test]
fn equational_lifts_have_exact_witnesses() {
    let f = parse("x1 * x2 != 1 & (x1 - x2 = 0 | x1 + x2 != 0)").unwrap();
    let nnf = f.to_nnf();
    assert!(nnf.is_equational());
    let l = compile(&nnf).unwrap();
    for (a, b) in [(frac(1, 3), frac(1, 3)), (int(2), int(5)), (frac(-7, 2), frac(1, 9))] {
        let x = vec![a, b];
        let aux = l.synth_witness(&x).unwrap();
        let exact = all_exact(&aux).unwrap();
        let mut pt = x.clone();
        pt.extend(exact);
        assert_eq!(l.eval_exact(&pt).unwrap(), int(0));
    }
}

#[test]
fn difference_compiles_through_nnf() {
    let f = parse("0 = 0 \\ x1 != 0").unwrap();
    let l = compile_formula(&f).unwrap();
    check_grid_1d("0 = 0 \\ x1 != 0", &l, -2, 2, 400);
    assert!(l.synth_witness(&[int(0)]).is_ok());
}

#[test]
fn naive_difference_over_projects() {
    // Y = everything (p ≡ 0), Z = {x != 0} through q = x·z - 1
    let y = lift_eq(&poly("0", 1)).unwrap();
    let z = lift_ne(&poly("x1", 1)).unwrap();
    let naive = unrestricted_difference(&y, &z).unwrap();
    assert_eq!(naive.nvars(), 3);
    // x = 1/2 is in Z, so not in Y \ Z, yet (z, t) = (0, -1) is a zero
    assert_eq!(naive.eval(&[frac(1, 2), int(0), int(-1)]).unwrap(), int(0));
    assert_eq!(lift_diff(&y, &z), Err(LiftError::NonAtomicSubtrahend { aux_dim: 1 }));
    // atomic subtrahend is exact
    let zero = lift_eq(&poly("x1", 1)).unwrap();
    let d = lift_diff(&y, &zero).unwrap();
    assert!(d.synth_witness(&[frac(1, 2)]).is_ok());
}

#[test]
fn non_nnf_atoms_are_rejected() {
    let f = NnfFormula::Atom { poly: poly("x1", 1), rel: Rel::Le };
    assert!(matches!(compile(&f), Err(LiftError::NotNnf(_))));
}

#[test]
fn mismatched_base_dimensions() {
    let a = lift_eq(&poly("x1", 1)).unwrap();
    let b = lift_eq(&poly("x2", 2)).unwrap();
    assert_eq!(lift_and(&a, &b), Err(LiftError::BaseDim { expected: 1, got: 2 }));
    assert_eq!(lift_and_all(&[]), Err(LiftError::Empty));
}

#[test]
fn serialization_round_trip() {
    for text in [
        "x1 >= 0 & 1 - x1 >= 0",
        "x1^2 + x2^2 <= 1 \\ x1^2 + x2^2 < 1/4",
        "(x1 = 0 | x1 - 1 = 0) & x1 != 3",
        "!(x1 > 0 | x2 = 1)",
    ] {
        let l = compile_formula(&parse(text).unwrap()).unwrap();
        let json = l.to_json();
        let back = Lift::from_json(&json).unwrap();
        assert_eq!(back, l, "{text}");
        assert_eq!(back.to_json(), json);
    }
}

#[test]
fn compile_is_deterministic() {
    let text = "(x1 + 3/2 >= 0 & -1/2 - x1 >= 0) | (x1 - 1/2 >= 0 & 3/2 - x1 >= 0)";
    let a = compile_formula(&parse(text).unwrap()).unwrap().to_json();
    let b = compile_formula(&parse(text).unwrap()).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn tampered_file_is_rejected() {
    let l = compile_formula(&parse("x1 >= 0").unwrap()).unwrap();
    let mut file = l.to_file();
    file.terms.pop();
    assert!(matches!(Lift::from_file(file), Err(LiftError::Format(_))));
    let mut file = l.to_file();
    file.format = "other".into();
    assert!(Lift::from_file(file).is_err());
}
