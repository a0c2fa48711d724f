//! Numerical verification of the projection contract.
//!
//! Completeness is checked exactly: every rational grid point of the base
//! box inside the formula must receive a witness on the variety. Soundness
//! is checked by sampling: seeded random starts in `box × aux_box` are
//! driven onto the variety and the projected points are classified by the
//! float membership oracle. Both passes run point-parallel and merge in
//! index order, so reports are a pure function of the inputs and the seed.

mod components;
mod sample;
mod solver;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formula::{Formula, Tri};
use crate::lift::Lift;
use crate::rational::{self, Rational};

pub use components::{proximity_components, DisjointSet};
pub use sample::{axis, grid, sample_formula};
pub use solver::{solve_on_variety, SearchBox, Solution, SolveFailure, MAX_ITERATIONS};

pub const MAX_FAILURES: usize = 100;
/// Fraction of examined points above which boundary skips raise a warning.
pub const BOUNDARY_WARN_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("formula has base dimension {formula}, lift has {lift}")]
    Dimension { formula: usize, lift: usize },
}

/// Closed rational interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rational::serde_fraction")]
    pub lo: Rational,
    #[serde(with = "rational::serde_fraction")]
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, VerifyError> {
        if lo >= hi {
            return Err(VerifyError::Config(format!(
                "degenerate interval [{}, {}]",
                rational::to_short_string(&lo),
                rational::to_short_string(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn symmetric(r: i64) -> Self {
        Interval { lo: rational::int(-r), hi: rational::int(r) }
    }

    pub fn lo_f64(&self) -> f64 {
        rational::to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        rational::to_f64(&self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    /// One interval per base variable, or a single interval for all of them.
    #[serde(rename = "box")]
    pub base_box: Vec<Interval>,
    pub grid_res: usize,
    pub n_samples: usize,
    pub delta_variety: f64,
    pub tau_membership: f64,
    pub eps_boundary: f64,
    pub eps_proximity: f64,
    pub seed: u64,
    /// Bounds for every auxiliary variable while solving.
    pub aux_box: Interval,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            base_box: vec![Interval::symmetric(2)],
            grid_res: 201,
            n_samples: 10_000,
            delta_variety: 1e-8,
            tau_membership: 1e-6,
            eps_boundary: 1e-3,
            eps_proximity: 0.05,
            seed: 0,
            aux_box: Interval::symmetric(10),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        for (name, v) in [
            ("delta_variety", self.delta_variety),
            ("tau_membership", self.tau_membership),
            ("eps_boundary", self.eps_boundary),
            ("eps_proximity", self.eps_proximity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(VerifyError::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.grid_res < 2 {
            return Err(VerifyError::Config(format!("grid_res must be at least 2, got {}", self.grid_res)));
        }
        for iv in self.base_box.iter().chain(std::iter::once(&self.aux_box)) {
            Interval::new(iv.lo.clone(), iv.hi.clone())?;
        }
        Ok(())
    }

    /// The base box for `m` variables.
    pub fn base_bounds(&self, m: usize) -> Result<Vec<Interval>, VerifyError> {
        match self.base_box.len() {
            1 => Ok(vec![self.base_box[0].clone(); m]),
            n if n == m => Ok(self.base_box.clone()),
            n => Err(VerifyError::Config(format!("box has {n} intervals for {m} base variables"))),
        }
    }

    pub fn search_box(&self, lift: &Lift) -> Result<SearchBox, VerifyError> {
        let base = self.base_bounds(lift.base_dim())?;
        let aux = std::iter::repeat_n(&self.aux_box, lift.aux_dim());
        let all: Vec<&Interval> = base.iter().chain(aux).collect();
        Ok(SearchBox { lo: all.iter().map(|i| i.lo_f64()).collect(), hi: all.iter().map(|i| i.hi_f64()).collect() })
    }
}

/// Accepted solver points, in start-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct VarietySample {
    pub starts: usize,
    pub accepted: Vec<Solution>,
}

/// The start for sample `index`: uniform in the search box, drawn from its
/// own ChaCha stream so that samples are independent of scheduling.
pub fn sample_start(bounds: &SearchBox, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    bounds.lo.iter().zip(&bounds.hi).map(|(l, h)| rng.random_range(*l..=*h)).collect()
}

/// Runs the solver from `n_samples` seeded starts.
pub fn sample_variety(lift: &Lift, cfg: &VerifyConfig) -> Result<VarietySample, VerifyError> {
    cfg.validate()?;
    let bounds = cfg.search_box(lift)?;
    let accepted: Vec<Solution> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| solve_on_variety(lift, &sample_start(&bounds, cfg.seed, i), &bounds, cfg.delta_variety).ok())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    assert!(accepted.iter().all(|s| s.residual <= cfg.delta_variety), "solver accepted a point off the variety");
    Ok(VarietySample { starts: cfg.n_samples, accepted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentEstimate {
    pub count: usize,
    /// First accepted point of each component, in component-label order.
    pub representatives: Vec<Vec<f64>>,
    pub accepted: usize,
    /// Set when no start was accepted, so that `count = 0` says nothing.
    pub no_points: bool,
}

/// Components of the proximity graph on `points` after mapping every axis
/// of `bounds` onto `[-1, 1]`.
pub fn components_of(points: &[Vec<f64>], bounds: &SearchBox, eps: f64) -> ComponentEstimate {
    let normalized: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(bounds.lo.iter().zip(&bounds.hi))
                .map(|(v, (l, h))| (v - (l + h) / 2.0) / ((h - l) / 2.0))
                .collect()
        })
        .collect();
    let (count, labels) = proximity_components(&normalized, eps);
    let mut representatives = Vec::with_capacity(count);
    for (p, &label) in points.iter().zip(&labels) {
        if label == representatives.len() {
            representatives.push(p.clone());
        }
    }
    ComponentEstimate { count, representatives, accepted: points.len(), no_points: points.is_empty() }
}

/// Number of connected components of the lift's zero set inside the search
/// box, as seen by the solver's samples. Box-relative and lower-bound-like:
/// components never reached by a start are missed.
pub fn estimate_components(lift: &Lift, cfg: &VerifyConfig) -> Result<ComponentEstimate, VerifyError> {
    let sample = sample_variety(lift, cfg)?;
    let bounds = cfg.search_box(lift)?;
    let points: Vec<Vec<f64>> = sample.accepted.into_iter().map(|s| s.point).collect();
    Ok(components_of(&points, &bounds, cfg.eps_proximity))
}

/// Completeness verdict for one base grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum GridClass {
    Outside,
    Witnessed,
    WitnessFailed { detail: String },
}

/// Per-point completeness classification of the base grid, in grid order.
pub fn classify_grid(f: &Formula, lift: &Lift, cfg: &VerifyConfig) -> Result<Vec<GridClass>, VerifyError> {
    cfg.validate()?;
    check_dims(f, lift)?;
    let bounds = cfg.base_bounds(lift.base_dim())?;
    let pts = grid(&bounds, cfg.grid_res);
    Ok(pts.par_iter().map(|x| classify_grid_point(f, lift, x, cfg.delta_variety)).collect())
}

fn classify_grid_point(f: &Formula, lift: &Lift, x: &[Rational], delta: f64) -> GridClass {
    if !f.contains(x).expect("dimension checked") {
        return GridClass::Outside;
    }
    match lift.synth_witness(x) {
        Ok(aux) => {
            let r = lift.residual(x, &aux);
            if r <= delta {
                GridClass::Witnessed
            } else {
                GridClass::WitnessFailed { detail: format!("|P(x, witness)| = {r:e} > {delta:e}") }
            }
        }
        Err(e) => GridClass::WitnessFailed { detail: format!("no witness: {e}") },
    }
}

fn check_dims(f: &Formula, lift: &Lift) -> Result<(), VerifyError> {
    if f.base_dim() != lift.base_dim() {
        return Err(VerifyError::Dimension { formula: f.base_dim(), lift: lift.base_dim() });
    }
    Ok(())
}

/// Soundness verdict for one accepted solver point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoundClass {
    Hit,
    Miss,
    BoundarySkipped,
}

/// Classifies the base projection `x` of a point on the variety. Atom values
/// within `tau` of zero are snapped to zero; points the oracle rejects but
/// that lie within `eps_boundary` of some atom's zero set are skipped.
pub fn classify_solution(f: &Formula, x: &[f64], cfg: &VerifyConfig) -> SoundClass {
    let near = || f.nearest_atom_value(x).expect("dimension checked") <= cfg.eps_boundary;
    match f.classify(x, cfg.tau_membership).expect("dimension checked") {
        Tri::True => SoundClass::Hit,
        Tri::Boundary if f.contains_snapped(x, cfg.tau_membership).expect("dimension checked") => SoundClass::Hit,
        Tri::Boundary => SoundClass::BoundarySkipped,
        Tri::False if near() => SoundClass::BoundarySkipped,
        Tri::False => SoundClass::Miss,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub in_set_witnessed: usize,
    pub in_set_witness_failed: usize,
    pub sound_hits: usize,
    pub sound_misses: usize,
    pub boundary_skipped: usize,
}

impl Counts {
    /// Points examined by either pass; the five counts partition them.
    pub fn examined(&self) -> usize {
        self.in_set_witnessed + self.in_set_witness_failed + self.sound_hits + self.sound_misses + self.boundary_skipped
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pass {
    Completeness,
    Soundness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub pass: Pass,
    /// Base coordinates: exact fractions for grid points, decimals for
    /// solver points.
    pub point: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub base_dim: usize,
    pub aux_dim: usize,
    pub config: VerifyConfig,
    pub grid_points: usize,
    pub in_set_grid_points: usize,
    pub solver_starts: usize,
    pub solver_accepted: usize,
    pub counts: Counts,
    pub examined: usize,
    pub component_estimate: usize,
    pub component_note: String,
    pub warnings: Vec<String>,
    pub failures: Vec<Failure>,
    pub failures_omitted: usize,
}

const COMPONENT_NOTE: &str =
    "estimated from solver samples inside box x aux_box; components outside the box or never reached are not counted";

impl VerifyReport {
    /// 0 when every check passed, 1 on any failure, 2 on warnings only.
    pub fn exit_status(&self) -> i32 {
        if self.counts.in_set_witness_failed > 0 || self.counts.sound_misses > 0 {
            1
        } else if !self.warnings.is_empty() {
            2
        } else {
            0
        }
    }

    pub fn boundary_fraction(&self) -> f64 {
        if self.examined == 0 {
            0.0
        } else {
            self.counts.boundary_skipped as f64 / self.examined as f64
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs the completeness and soundness passes of `lift` against `f`.
pub fn check_projection(f: &Formula, lift: &Lift, cfg: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    cfg.validate()?;
    check_dims(f, lift)?;
    let bounds = cfg.base_bounds(lift.base_dim())?;
    let grid_pts = grid(&bounds, cfg.grid_res);
    let classes: Vec<GridClass> =
        grid_pts.par_iter().map(|x| classify_grid_point(f, lift, x, cfg.delta_variety)).collect();

    let mut counts = Counts::default();
    let mut failures = Vec::new();
    let mut failure_total = 0usize;
    let mut push = |failure: Failure| {
        failure_total += 1;
        if failures.len() < MAX_FAILURES {
            failures.push(failure);
        }
    };
    for (x, class) in grid_pts.iter().zip(&classes) {
        match class {
            GridClass::Outside => {}
            GridClass::Witnessed => counts.in_set_witnessed += 1,
            GridClass::WitnessFailed { detail } => {
                counts.in_set_witness_failed += 1;
                push(Failure {
                    pass: Pass::Completeness,
                    point: x.iter().map(rational::to_short_string).collect(),
                    detail: detail.clone(),
                });
            }
        }
    }
    let in_set = counts.in_set_witnessed + counts.in_set_witness_failed;

    let sample = sample_variety(lift, cfg)?;
    let m = lift.base_dim();
    let sound: Vec<SoundClass> = sample.accepted.par_iter().map(|s| classify_solution(f, &s.point[..m], cfg)).collect();
    for (s, class) in sample.accepted.iter().zip(&sound) {
        match class {
            SoundClass::Hit => counts.sound_hits += 1,
            SoundClass::BoundarySkipped => counts.boundary_skipped += 1,
            SoundClass::Miss => {
                counts.sound_misses += 1;
                let x = &s.point[..m];
                push(Failure {
                    pass: Pass::Soundness,
                    point: x.iter().map(|v| v.to_string()).collect(),
                    detail: format!(
                        "projection of a variety point (|P| = {:e}) is outside the set; nearest atom value {:e}",
                        s.residual,
                        f.nearest_atom_value(x).expect("dimension checked")
                    ),
                });
            }
        }
    }

    let search = cfg.search_box(lift)?;
    let points: Vec<Vec<f64>> = sample.accepted.iter().map(|s| s.point.clone()).collect();
    let components = components_of(&points, &search, cfg.eps_proximity);

    let examined = counts.examined();
    let mut warnings = Vec::new();
    if components.no_points && in_set > 0 {
        warnings.push("no solver start reached the variety; component estimate 0 is uninformative".to_string());
    }
    let mut report = VerifyReport {
        base_dim: m,
        aux_dim: lift.aux_dim(),
        config: cfg.clone(),
        grid_points: grid_pts.len(),
        in_set_grid_points: in_set,
        solver_starts: sample.starts,
        solver_accepted: sample.accepted.len(),
        counts,
        examined,
        component_estimate: components.count,
        component_note: COMPONENT_NOTE.to_string(),
        warnings,
        failures,
        failures_omitted: failure_total.saturating_sub(MAX_FAILURES),
    };
    if report.boundary_fraction() > BOUNDARY_WARN_FRACTION {
        report.warnings.push(format!(
            "boundary_skipped is {:.2}% of examined points (limit {:.0}%)",
            100.0 * report.boundary_fraction(),
            100.0 * BOUNDARY_WARN_FRACTION
        ));
    }
    Ok(report)
}
