use std::cmp::Ordering;

use crate::engine::DesignMetrics;
use crate::error::Result;

use super::Objective;

/// `a` dominates `b` when it is no worse everywhere and better somewhere.
/// All coordinates are minimized.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).unwrap_or(Ordering::Equal) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Indices of non-dominated points, ascending. Equal points are all kept.
pub fn pareto_indices(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // A dominating point sorts lexicographically before every point it
    // dominates, so one pass against the front found so far suffices.
    order.sort_by(|&i, &j| lex(&points[i], &points[j]).then(i.cmp(&j)));
    let mut front: Vec<usize> = Vec::new();
    if points.first().is_some_and(|p| p.len() == 2) {
        // Two objectives: the front is a staircase in y.
        let mut best_y = f64::INFINITY;
        let mut k = 0;
        while k < order.len() {
            let x = points[order[k]][0];
            let group_end = order[k..].iter().position(|&i| points[i][0] != x).map_or(order.len(), |p| k + p);
            let gy = points[order[k]][1];
            if gy < best_y {
                front.extend(order[k..group_end].iter().copied().filter(|&i| points[i][1] == gy));
                best_y = gy;
            }
            k = group_end;
        }
    } else {
        for &i in &order {
            if !front.iter().any(|&f| dominates(&points[f], &points[i])) {
                front.push(i);
            }
        }
    }
    front.sort_unstable();
    front
}

/// Pareto-optimal rows for `objectives`, in table order.
pub fn pareto_front<'a>(rows: &'a [DesignMetrics], objectives: &[Objective]) -> Result<Vec<&'a DesignMetrics>> {
    super::pareto_rows(rows, objectives)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[Vec<f64>]) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| !(0..points.len()).any(|j| dominates(&points[j], &points[i])))
            .collect()
    }

    #[test]
    fn single_point() {
        assert_eq!(pareto_indices(&[vec![1.0, 2.0]]), vec![0]);
    }

    #[test]
    fn duplicates_are_kept() {
        let p = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![2.0, 0.5], vec![2.0, 2.0]];
        assert_eq!(pareto_indices(&p), vec![0, 1, 2]);
    }

    fn grid_points(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        // Small integer grids force ties.
        prop::collection::vec(prop::collection::vec((0u8..6).prop_map(f64::from), dim), 0..60)
    }

    proptest! {
        #[test]
        fn matches_brute_force_2d(p in grid_points(2)) {
            prop_assert_eq!(pareto_indices(&p), brute(&p));
        }

        #[test]
        fn matches_brute_force_4d(p in grid_points(4)) {
            prop_assert_eq!(pareto_indices(&p), brute(&p));
        }

        #[test]
        fn idempotent(p in grid_points(3)) {
            let front: Vec<Vec<f64>> = pareto_indices(&p).into_iter().map(|i| p[i].clone()).collect();
            prop_assert_eq!(pareto_indices(&front).len(), front.len());
        }

        #[test]
        fn dominated_point_changes_nothing(p in grid_points(2), dx in 0u8..3, dy in 1u8..3) {
            prop_assume!(!p.is_empty());
            let front: Vec<Vec<f64>> = pareto_indices(&p).into_iter().map(|i| p[i].clone()).collect();
            let mut q = p.clone();
            q.push(vec![p[0][0] + f64::from(dx), p[0][1] + f64::from(dy)]);
            let front_q: Vec<Vec<f64>> = pareto_indices(&q).into_iter().map(|i| q[i].clone()).collect();
            prop_assert_eq!(front, front_q);
        }
    }
}
