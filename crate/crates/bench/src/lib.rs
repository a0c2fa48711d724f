//! Fixtures shared by the pipeline benchmarks.

use unsemi_core::formula::{parse, parse_polynomial};
use unsemi_core::gallery::GALLERY;
use unsemi_core::lift::compile_formula;
use unsemi_core::rational::int;
use unsemi_core::verify::Interval;
use unsemi_core::{Formula, Lift, VerifyConfig, WitnessPair, WitnessProgram};

/// Every gallery formula, parsed.
pub fn gallery_formulas() -> Vec<(&'static str, Formula)> {
    GALLERY.iter().map(|c| (c.name, c.formula())).collect()
}

pub fn gallery_lift(name: &str) -> (Formula, Lift) {
    let case = unsemi_core::gallery::case(name).expect("known gallery case");
    let f = case.formula();
    let lift = compile_formula(&f).expect("gallery formulas compile");
    (f, lift)
}

/// `x1^2 + (t1 (t1 - 1))^2`: two points above `x1 = 0`, and the pair joining them.
pub fn two_points() -> (Lift, WitnessPair) {
    let p = parse_polynomial("x1^2 + (x2*(x2 - 1))^2", None).expect("fixture parses");
    let source = parse("x1 = 0").expect("fixture parses").to_nnf();
    let lift = Lift::custom(p, 1, source, Some(WitnessProgram::Constant(vec![int(0)]))).expect("fixture lift");
    (lift, WitnessPair::new(vec![int(0)], vec![int(0)], vec![int(1)]))
}

/// A configuration small enough to time repeatedly.
pub fn small_config(half_width: i64) -> VerifyConfig {
    VerifyConfig {
        base_box: vec![Interval::symmetric(half_width)],
        grid_res: 41,
        n_samples: 200,
        ..VerifyConfig::default()
    }
}
