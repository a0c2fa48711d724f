//! Rational grids over the base box.

use num_traits::Zero;
use rayon::prelude::*;

use super::Interval;
use crate::formula::Formula;
use crate::rational::{int, Rational};

/// The `res` equally spaced rational points of `[lo, hi]`, endpoints included.
pub fn axis(iv: &Interval, res: usize) -> Vec<Rational> {
    let steps = (res - 1) as i64;
    let width = &iv.hi - &iv.lo;
    (0..res as i64).map(|i| &iv.lo + &width * int(i) / int(steps)).collect()
}

/// Row-major Cartesian product of one axis per box side; the last
/// coordinate varies fastest. A zero-dimensional box has one empty point.
pub fn grid(bounds: &[Interval], res: usize) -> Vec<Vec<Rational>> {
    let axes: Vec<Vec<Rational>> = bounds.iter().map(|iv| axis(iv, res)).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    (0..total)
        .map(|mut idx| {
            let mut pt = vec![Rational::zero(); axes.len()];
            for (d, ax) in axes.iter().enumerate().rev() {
                pt[d] = ax[idx % ax.len()].clone();
                idx /= ax.len();
            }
            pt
        })
        .collect()
}

/// Grid points at which the formula holds exactly, in grid order.
pub fn sample_formula(f: &Formula, bounds: &[Interval], res: usize) -> Vec<Vec<Rational>> {
    let pts = grid(bounds, res);
    let keep: Vec<bool> = pts.par_iter().map(|x| f.contains(x).unwrap_or(false)).collect();
    pts.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn unit_box() -> Vec<Interval> {
        vec![Interval::new(int(-2), int(2)).unwrap()]
    }

    fn ints(pts: &[Vec<Rational>]) -> Vec<Rational> {
        pts.iter().map(|p| p[0].clone()).collect()
    }

    #[test]
    fn disk_on_coarse_grid() {
        let pts = sample_formula(&parse("1 - x1^2 >= 0").unwrap(), &unit_box(), 5);
        assert_eq!(ints(&pts), vec![int(-1), int(0), int(1)]);
    }

    #[test]
    fn strict_ray_on_coarse_grid() {
        let pts = sample_formula(&parse("x1 > 0").unwrap(), &unit_box(), 5);
        assert_eq!(ints(&pts), vec![int(1), int(2)]);
    }

    #[test]
    fn empty_formula() {
        assert!(sample_formula(&parse("x1^2 + 1 = 0").unwrap(), &unit_box(), 201).is_empty());
    }

    #[test]
    fn grid_order_and_size() {
        let b = vec![Interval::new(int(0), int(1)).unwrap(), Interval::new(int(0), int(2)).unwrap()];
        let g = grid(&b, 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[1], vec![int(0), int(1)]);
        assert_eq!(g[3], vec![crate::rational::frac(1, 2), int(0)]);
        assert_eq!(grid(&[], 7), vec![Vec::<Rational>::new()]);
    }

    #[test]
    fn default_grid_hits_the_endpoints_exactly() {
        let a = axis(&unit_box()[0], 201);
        assert_eq!(a[0], int(-2));
        assert_eq!(a[100], int(0));
        assert_eq!(a[150], int(1));
        assert_eq!(a[200], int(2));
    }
}
