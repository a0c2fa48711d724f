//! Seeded random generators shared by the integration suites.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use unsemi_core::formula::{Formula, NnfFormula, Rel};
use unsemi_core::poly::{lift_var_names, Polynomial};
use unsemi_core::rational::{frac, int, Rational};

pub const RELS: [Rel; 6] = [Rel::Eq, Rel::Ge, Rel::Gt, Rel::Le, Rel::Lt, Rel::Ne];

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    frac(rng.random_range(-6..=6), rng.random_range(1..=4))
}

pub fn point(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    (0..m).map(|_| small_rational(rng)).collect()
}

/// A polynomial over `x1..xm` with up to `max_terms` terms of degree at
/// most 3.
pub fn poly(rng: &mut ChaCha8Rng, m: usize, max_terms: usize) -> Polynomial {
    let n = rng.random_range(0..=max_terms);
    let terms = (0..n).map(|_| {
        let exps = (0..m)
            .map(|_| {
                let top = if rng.random_bool(0.3) { 2 } else { 1 };
                rng.random_range(0..=top)
            })
            .collect();
        (int(rng.random_range(-3..=3)), exps)
    });
    Polynomial::from_terms(lift_var_names(m, 0), terms).unwrap()
}

/// A formula using every connective and relation.
pub fn formula(rng: &mut ChaCha8Rng, m: usize, depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        let rel = RELS[rng.random_range(0..RELS.len())];
        return Formula::atom(poly(rng, m, 3), rel);
    }
    match rng.random_range(0..4) {
        0 => Formula::And((0..rng.random_range(2..=3)).map(|_| formula(rng, m, depth - 1)).collect()),
        1 => Formula::Or((0..rng.random_range(2..=3)).map(|_| formula(rng, m, depth - 1)).collect()),
        2 => Formula::not(formula(rng, m, depth - 1)),
        _ => Formula::diff(formula(rng, m, depth - 1), formula(rng, m, depth - 1)),
    }
}

/// An `=`/`!=` formula in negation normal form, biased to hold at `anchor`:
/// each `=` atom is shifted to vanish there.
pub fn equational(rng: &mut ChaCha8Rng, anchor: &[Rational], depth: u32) -> NnfFormula {
    let m = anchor.len();
    if depth == 0 || rng.random_bool(0.35) {
        let p = poly(rng, m, 3);
        if rng.random_bool(0.5) {
            let shift = -p.eval(anchor).unwrap();
            return NnfFormula::Atom { poly: p.add_constant(&shift), rel: Rel::Eq };
        }
        return NnfFormula::Atom { poly: p, rel: Rel::Ne };
    }
    let kids = (0..rng.random_range(2..=3)).map(|_| equational(rng, anchor, depth - 1)).collect();
    if rng.random_bool(0.5) {
        NnfFormula::And(kids)
    } else {
        NnfFormula::Or(kids)
    }
}
