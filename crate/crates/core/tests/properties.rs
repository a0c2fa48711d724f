mod common;

use num_traits::One;
use proptest::prelude::*;
use unsemi_core::formula::{parse_with_dim, Formula};
use unsemi_core::lift::compile;
use unsemi_core::poly::{lift_var_names, AffineMap, Polynomial};
use unsemi_core::rational::{frac, to_f64, Rational};

const M: usize = 3;

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| frac(n, d))
}

fn polynomial() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((rational(), prop::collection::vec(0u32..=3, M)), 0..6)
        .prop_map(|terms| Polynomial::from_terms(lift_var_names(M, 0), terms).unwrap())
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), M)
}

fn invertible_map(k: usize) -> impl Strategy<Value = AffineMap> {
    (prop::collection::vec(prop::collection::vec(rational(), k), k), prop::collection::vec(rational(), k))
        .prop_filter_map("singular", |(m, b)| AffineMap::new(m, b).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(p in polynomial(), q in polynomial(), r in polynomial()) {
        let zero = Polynomial::zero(lift_var_names(M, 0));
        let one = Polynomial::constant(lift_var_names(M, 0), Rational::one());
        prop_assert_eq!(p.add(&q).unwrap(), q.add(&p).unwrap());
        prop_assert_eq!(p.mul(&q).unwrap(), q.mul(&p).unwrap());
        prop_assert_eq!(p.add(&q).unwrap().add(&r).unwrap(), p.add(&q.add(&r).unwrap()).unwrap());
        prop_assert_eq!(p.mul(&q).unwrap().mul(&r).unwrap(), p.mul(&q.mul(&r).unwrap()).unwrap());
        prop_assert_eq!(
            p.mul(&q.add(&r).unwrap()).unwrap(),
            p.mul(&q).unwrap().add(&p.mul(&r).unwrap()).unwrap()
        );
        prop_assert_eq!(p.add(&zero).unwrap(), p.clone());
        prop_assert_eq!(p.mul(&one).unwrap(), p.clone());
        prop_assert!(p.sub(&p).unwrap().is_zero());
        prop_assert_eq!(p.add(&p.neg()).unwrap(), zero);
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in polynomial(), q in polynomial(), x in point()) {
        let (pv, qv) = (p.eval(&x).unwrap(), q.eval(&x).unwrap());
        prop_assert_eq!(p.add(&q).unwrap().eval(&x).unwrap(), &pv + &qv);
        prop_assert_eq!(p.mul(&q).unwrap().eval(&x).unwrap(), &pv * &qv);
        prop_assert_eq!(p.square().eval(&x).unwrap(), &pv * &pv);
    }

    #[test]
    fn text_and_record_forms_round_trip(p in polynomial()) {
        let text = p.to_string();
        prop_assert_eq!(unsemi_core::formula::parse_polynomial(&text, Some(M)).unwrap(), p.clone());
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<Polynomial>(&json).unwrap(), p);
    }

    #[test]
    fn gradient_matches_central_differences(p in polynomial(), x in point()) {
        // exact central differences leave only the O(h²) truncation term
        let h = frac(1, 100_000_000);
        let grad = p.gradient();
        let xf: Vec<f64> = x.iter().map(to_f64).collect();
        let plan = unsemi_core::poly::EvalPlan::leaf(p.clone()).compile();
        let (_, fast) = plan.eval_grad(&xf);
        for i in 0..M {
            let mut up = x.clone();
            let mut down = x.clone();
            up[i] += &h;
            down[i] -= &h;
            let fd = to_f64(&((p.eval(&up).unwrap() - p.eval(&down).unwrap()) / (frac(2, 1) * &h)));
            let exact = to_f64(&grad[i].eval(&x).unwrap());
            prop_assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1.0), "d/dx{} exact {} fd {}", i + 1, exact, fd);
            prop_assert!((fast[i] - fd).abs() <= 1e-6 * fd.abs().max(1.0), "d/dx{} plan {} fd {}", i + 1, fast[i], fd);
        }
    }

    #[test]
    fn affine_substitution_round_trips(p in polynomial(), a in invertible_map(2), y in point()) {
        // Q(u, v) = P(u, A⁻¹ v), so Q(u, A y) = P(u, y)
        let block = [1, 2];
        let q = p.substitute_affine(&block, &a).unwrap();
        let ay = a.apply(&y[1..]);
        let moved = vec![y[0].clone(), ay[0].clone(), ay[1].clone()];
        prop_assert_eq!(q.eval(&moved).unwrap(), p.eval(&y).unwrap());
        prop_assert_eq!(q.substitute_affine(&block, &a.inverse()).unwrap(), p);
        prop_assert_eq!(a.inverse().apply(&a.apply(&y[1..])), y[1..].to_vec());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn nnf_preserves_membership(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let f = common::formula(&mut rng, 2, 4);
        let g = f.to_nnf();
        for _ in 0..8 {
            let x = common::point(&mut rng, 2);
            prop_assert_eq!(f.contains(&x).unwrap(), g.contains(&x).unwrap(), "{}", f);
        }
    }

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let f = common::formula(&mut rng, 2, 3);
        let text = f.to_string();
        let back: Formula = parse_with_dim(&text, 2).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        for _ in 0..4 {
            let x = common::point(&mut rng, 2);
            prop_assert_eq!(back.contains(&x).unwrap(), f.contains(&x).unwrap(), "{}", text);
        }
    }

    #[test]
    fn witnesses_land_on_the_variety(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let f = common::formula(&mut rng, 2, 3);
        let lift = compile(&f.to_nnf()).unwrap();
        for _ in 0..8 {
            let x = common::point(&mut rng, 2);
            match lift.synth_witness(&x) {
                Ok(aux) => prop_assert!(lift.residual(&x, &aux) <= 1e-10, "{} at {:?}", f, x),
                Err(e) => prop_assert!(!f.contains(&x).unwrap(), "{}: {}", f, e),
            }
        }
    }

    #[test]
    fn aux_slots_partition(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let f = common::formula(&mut rng, 2, 4);
        let lift = compile(&f.to_nnf()).unwrap();
        let mut slots = lift.witness().unwrap().slots();
        slots.sort_unstable();
        prop_assert_eq!(slots, (1..=lift.aux_dim()).collect::<Vec<_>>());
    }
}
