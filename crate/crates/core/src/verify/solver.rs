//! Local descent onto the zero set of a lift.

use crate::lift::Lift;
use crate::poly::CompiledPlan;

pub const MAX_ITERATIONS: usize = 500;
/// Once inside the acceptance band the solver keeps refining towards this
/// fraction of `delta`, so that sums and products of squares resolve their
/// individual factors well below the boundary band.
const POLISH_FACTOR: f64 = 1e-16;
/// Inside the acceptance band, polishing stops once a step gains less
/// than this factor.
const STALL_RATIO: f64 = 0.9;
const MAX_HALVINGS: usize = 60;
const MAX_DOUBLINGS: usize = 4;
const MAX_DAMPING_RAISES: usize = 12;
const LAMBDA_START: f64 = 1e-3;
const LAMBDA_MIN: f64 = 1e-12;
/// Relative forward-difference step for the Hessian of `P`.
const FD_STEP: f64 = 1e-7;
const FD_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveFailure {
    #[error("start has {got} coordinates, lift has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("start lies outside the search box")]
    StartOutsideBox,
    #[error("no convergence: |P| = {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("converged outside the search box")]
    LeftBox,
}

/// Axis-aligned bounds over all lift variables (base then aux).
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SearchBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }
}

/// Damped Newton descent on `φ = P²/2`.
///
/// The Hessian of `φ` is `∇P ∇Pᵀ + P ∇²P`, with `∇²P` taken by forward
/// differences of the exact gradient. Zeros of the compiled sums and
/// products of squares are degenerate and badly scaled, where plain
/// gradient steps zig-zag; the Newton step rescales every direction. Each
/// step solves `(H + λ·s·I) d = -P ∇P` with Levenberg-Marquardt damping `λ`
/// (raised until the step is a descent step for `|P|`), and the step length
/// is then doubled while `|P|` keeps dropping. If no damping works, the
/// Gauss-Newton step `-P ∇P / |∇P|²` with step halving is tried. The solver
/// stops at the polish target, when no step improves `|P|`, when progress
/// inside the acceptance band stalls, or after
/// [`MAX_ITERATIONS`].
pub fn solve_on_variety(lift: &Lift, start: &[f64], bounds: &SearchBox, delta: f64) -> Result<Solution, SolveFailure> {
    let n = lift.base_dim() + lift.aux_dim();
    if start.len() != n {
        return Err(SolveFailure::Dimension { expected: n, got: start.len() });
    }
    if !bounds.contains(start) {
        return Err(SolveFailure::StartOutsideBox);
    }
    let plan = lift.compiled();
    let target = delta * POLISH_FACTOR;
    let mut x = start.to_vec();
    let (mut p, mut g) = plan.eval_grad(&x);
    let mut lambda = LAMBDA_START;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && p.abs() > target && p.is_finite() {
        let step = newton_step(plan, &x, p, &g, &mut lambda).or_else(|| gradient_step(plan, &x, p, &g));
        let Some(y) = step else { break };
        iterations += 1;
        x = y;
        let previous = p;
        (p, g) = plan.eval_grad(&x);
        if p.abs() <= delta && p.abs() > STALL_RATIO * previous.abs() {
            break;
        }
    }
    if p.is_nan() || p.abs() > delta {
        return Err(SolveFailure::NoConvergence { residual: p.abs(), iterations });
    }
    if !bounds.contains(&x) {
        return Err(SolveFailure::LeftBox);
    }
    Ok(Solution { point: x, residual: p.abs(), iterations })
}

fn along(x: &[f64], d: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

/// The first improving point along `d`, stretched while it keeps improving.
fn line_search(plan: &CompiledPlan, x: &[f64], d: &[f64], p: f64, halvings: usize) -> Option<Vec<f64>> {
    let mut alpha = 1.0;
    for k in 0..=halvings {
        let y = along(x, d, alpha);
        let v = plan.eval(&y);
        if v.abs() < p.abs() {
            let (mut best, mut best_v) = (y, v);
            if k == 0 {
                for _ in 0..MAX_DOUBLINGS {
                    alpha *= 2.0;
                    let y2 = along(x, d, alpha);
                    let v2 = plan.eval(&y2);
                    if v2.abs() >= best_v.abs() {
                        break;
                    }
                    best = y2;
                    best_v = v2;
                }
            }
            return Some(best);
        }
        alpha *= 0.5;
    }
    None
}

fn newton_step(plan: &CompiledPlan, x: &[f64], p: f64, g: &[f64], lambda: &mut f64) -> Option<Vec<f64>> {
    let n = x.len();
    let mut hess_p = vec![vec![0.0; n]; n];
    for j in 0..n {
        let h = FD_STEP * x[j].abs().max(FD_FLOOR);
        let mut y = x.to_vec();
        y[j] += h;
        let (_, gy) = plan.eval_grad(&y);
        for i in 0..n {
            hess_p[i][j] = (gy[i] - g[i]) / h;
        }
    }
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = g[i] * g[j] + p * 0.5 * (hess_p[i][j] + hess_p[j][i]);
        }
    }
    let rhs: Vec<f64> = g.iter().map(|gi| -p * gi).collect();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    for _ in 0..MAX_DAMPING_RAISES {
        let mut m = a.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += *lambda * scale;
        }
        if let Some(d) = cholesky_solve(m, &rhs) {
            if let Some(y) = line_search(plan, x, &d, p, 0) {
                *lambda = (*lambda / 3.0).max(LAMBDA_MIN);
                return Some(y);
            }
        }
        *lambda *= 8.0;
    }
    *lambda = LAMBDA_START;
    None
}

fn gradient_step(plan: &CompiledPlan, x: &[f64], p: f64, g: &[f64]) -> Option<Vec<f64>> {
    let g2: f64 = g.iter().map(|v| v * v).sum();
    if !(g2 > 0.0 && g2.is_finite()) {
        return None;
    }
    let d: Vec<f64> = g.iter().map(|gi| -p * gi / g2).collect();
    line_search(plan, x, &d, p, MAX_HALVINGS)
}

/// Solves `m x = b` for symmetric positive definite `m`; `None` otherwise.
fn cholesky_solve(mut m: Vec<Vec<f64>>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for j in 0..n {
        let s = m[j][..j].iter().fold(m[j][j], |s, v| s - v * v);
        if !s.is_finite() || s <= 0.0 {
            return None;
        }
        let d = s.sqrt();
        m[j][j] = d;
        for i in j + 1..n {
            let s = m[i][..j].iter().zip(&m[j][..j]).fold(m[i][j], |s, (a, b)| s - a * b);
            m[i][j] = s / d;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = b[i] - (0..i).map(|k| m[i][k] * y[k]).sum::<f64>();
        y[i] = s / m[i][i];
    }
    let mut z = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = y[i] - (i + 1..n).map(|k| m[k][i] * z[k]).sum::<f64>();
        z[i] = s / m[i][i];
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, parse_polynomial};
    use crate::lift::{compile_formula, lift_eq};

    fn square_box(n: usize, r: f64) -> SearchBox {
        SearchBox { lo: vec![-r; n], hi: vec![r; n] }
    }

    #[test]
    fn converges_onto_circle() {
        let l = lift_eq(&parse_polynomial("x1^2 + x2^2 - 1", None).unwrap()).unwrap();
        let s = solve_on_variety(&l, &[0.9, 0.9], &square_box(2, 2.0), 1e-8).unwrap();
        let [x, t] = [s.point[0], s.point[1]];
        assert!((x * x + t * t - 1.0).abs() <= 1e-8);
        assert!(s.residual <= 1e-8);
    }

    #[test]
    fn empty_variety_fails() {
        let l = lift_eq(&parse_polynomial("x1^2 + 1", None).unwrap()).unwrap();
        for start in [-1.5, 0.0, 0.3, 1.9] {
            assert!(matches!(
                solve_on_variety(&l, &[start], &square_box(1, 2.0), 1e-8),
                Err(SolveFailure::NoConvergence { .. })
            ));
        }
    }

    #[test]
    fn start_on_variety_is_unchanged() {
        let l = lift_eq(&parse_polynomial("x1^2 + x2^2 - 1", None).unwrap()).unwrap();
        let s = solve_on_variety(&l, &[0.6, 0.8], &square_box(2, 2.0), 1e-8);
        let s = s.unwrap();
        assert_eq!(s.iterations, 0);
        assert_eq!(s.point, vec![0.6, 0.8]);
    }

    #[test]
    fn rejects_bad_starts() {
        let l = lift_eq(&parse_polynomial("x1", None).unwrap()).unwrap();
        assert_eq!(solve_on_variety(&l, &[3.0], &square_box(1, 2.0), 1e-8), Err(SolveFailure::StartOutsideBox));
        assert_eq!(
            solve_on_variety(&l, &[0.0, 1.0], &square_box(2, 2.0), 1e-8),
            Err(SolveFailure::Dimension { expected: 1, got: 2 })
        );
    }

    #[test]
    fn leaves_box_is_rejected() {
        // x = 3 is the only zero; the box stops at 2
        let l = lift_eq(&parse_polynomial("x1 - 3", None).unwrap()).unwrap();
        assert_eq!(solve_on_variety(&l, &[1.0], &square_box(1, 2.0), 1e-8), Err(SolveFailure::LeftBox));
    }

    #[test]
    fn polishes_products_of_squares() {
        let f = parse("(x1 + 3/2 >= 0 & -1/2 - x1 >= 0) | (x1 - 1/2 >= 0 & 3/2 - x1 >= 0)").unwrap();
        let l = compile_formula(&f).unwrap();
        let b = SearchBox { lo: vec![-2.0, -10.0, -10.0, -10.0, -10.0], hi: vec![2.0, 10.0, 10.0, 10.0, 10.0] };
        let s = solve_on_variety(&l, &[1.2, 0.5, 0.3, 0.7, 0.2], &b, 1e-8).unwrap();
        assert!(s.residual <= 1e-8);
        let x = s.point[0];
        assert!(f.classify(&[x], 1e-6).unwrap() != crate::formula::Tri::False, "x = {x}");
    }
}
