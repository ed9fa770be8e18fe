//! Optimal pairing of estimated and true times of arrival on the circle.

/// Distance between `a` and `b` on a circle of circumference `period`.
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToaMatching {
    /// `pairing[k]` is the estimate assigned to true path `k`.
    pub pairing: Vec<usize>,
    /// Circular error of each true path, in the units of the inputs.
    pub errors: Vec<f64>,
}

/// Minimum total circular distance assignment between equally many true and
/// estimated ToAs (Hungarian algorithm).
///
/// Assignments whose totals agree to within `1e-9 * period` are tied; among
/// those, the earliest true path gets the smallest error, then the next, so
/// the result does not hinge on rounding when an estimate lands far from
/// every true path.
///
/// # Panics
///
/// When the two slices differ in length.
pub fn match_toas(truth: &[f64], estimated: &[f64], period: f64) -> ToaMatching {
    assert_eq!(truth.len(), estimated.len(), "match_toas needs equally many estimates");
    let n = truth.len();
    let cost: Vec<Vec<f64>> = truth
        .iter()
        .map(|&t| estimated.iter().map(|&e| circular_distance(t, e, period)).collect())
        .collect();
    let optimum = assignment_cost(&cost, &hungarian(&cost));
    let tol = 1e-9 * period;
    let mut pairing = vec![usize::MAX; n];
    let mut fixed = 0.0;
    for k in 0..n {
        let free_cols: Vec<usize> = (0..n).filter(|j| !pairing.contains(j)).collect();
        let mut candidates = free_cols.clone();
        candidates.sort_by(|&a, &b| cost[k][a].total_cmp(&cost[k][b]));
        for &j in &candidates {
            let rest_rows: Vec<usize> = (k + 1..n).collect();
            let rest_cols: Vec<usize> = free_cols.iter().copied().filter(|&c| c != j).collect();
            let sub: Vec<Vec<f64>> = rest_rows
                .iter()
                .map(|&r| rest_cols.iter().map(|&c| cost[r][c]).collect())
                .collect();
            let rest = assignment_cost(&sub, &hungarian(&sub));
            if fixed + cost[k][j] + rest <= optimum + tol {
                pairing[k] = j;
                fixed += cost[k][j];
                break;
            }
        }
    }
    let errors = pairing.iter().enumerate().map(|(k, &j)| cost[k][j]).collect();
    ToaMatching { pairing, errors }
}

fn assignment_cost(cost: &[Vec<f64>], pairing: &[usize]) -> f64 {
    pairing.iter().enumerate().map(|(k, &j)| cost[k][j]).sum()
}

/// Square assignment problem with potentials, `O(n^3)`; returns the column
/// of each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays with a virtual column 0.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        while col0 != 0 {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
        }
    }
    let mut pairing = vec![0; n];
    for j in 1..=n {
        pairing[owner[j] - 1] = j - 1;
    }
    pairing
}
