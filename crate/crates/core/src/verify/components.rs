//! Proximity-graph connected components.

use std::cmp::Ordering;

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), size: vec![1; n], sets: n }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Returns `true` when `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn count(&self) -> usize {
        self.sets
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Component labels of the graph joining points at Euclidean distance
/// `<= eps`. Labels are numbered by first occurrence in input order.
pub fn proximity_components(points: &[Vec<f64>], eps: f64) -> (usize, Vec<usize>) {
    let n = points.len();
    let mut ds = DisjointSet::new(n);
    // sweep along the widest axis so that points stacked on one coordinate
    // do not degrade the scan to all pairs
    let dim = points.first().map_or(0, Vec::len);
    let spread = |d: usize| {
        let (lo, hi) =
            points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[d]), hi.max(p[d])));
        hi - lo
    };
    let axis = (0..dim).max_by(|&a, &b| spread(a).partial_cmp(&spread(b)).unwrap_or(Ordering::Equal)).unwrap_or(0);
    let key = |i: usize| points[i].get(axis).copied().unwrap_or(0.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let eps2 = eps * eps;
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if key(j) - key(i) > eps {
                break;
            }
            if dist2(&points[i], &points[j]) <= eps2 {
                ds.union(i, j);
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let labels = (0..n)
        .map(|i| {
            let r = ds.find(i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            label_of_root[r]
        })
        .collect();
    (ds.count(), labels)
}
