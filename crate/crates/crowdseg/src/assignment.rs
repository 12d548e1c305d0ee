//! Exact minimum-cost assignment.
//!
//! O(n^3) potentials formulation of the Hungarian method. Rectangular inputs
//! are padded to square with zero-cost dummies; pairs touching a dummy row or
//! column are dropped from the result, which leaves exactly `min(m, n)` real
//! pairs.

/// Solve the min-cost assignment for an `m x n` row-major cost matrix.
/// Returns the optimal pairs `(row, col)` sorted by row index.
pub fn solve_min_cost(cost: &[f64], m: usize, n: usize) -> Vec<(usize, usize)> {
    assert_eq!(cost.len(), m * n, "cost matrix shape mismatch");
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let dim = m.max(n);
    let at = |i: usize, j: usize| -> f64 {
        if i < m && j < n {
            cost[i * n + j]
        } else {
            0.0
        }
    };

    // 1-based arrays; index 0 is the virtual start column / unassigned row.
    let mut u = vec![0.0f64; dim + 1];
    let mut v = vec![0.0f64; dim + 1];
    let mut row_of = vec![0usize; dim + 1]; // row assigned to each column
    let mut way = vec![0usize; dim + 1];

    for i in 1..=dim {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; dim + 1];
        let mut used = vec![false; dim + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=dim {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=dim {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        // augment along the found path
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=dim)
        .filter_map(|j| {
            let i = row_of[j];
            (i >= 1 && i - 1 < m && j - 1 < n).then(|| (i - 1, j - 1))
        })
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Total cost of a pair set, summed in row order.
pub fn total_cost(cost: &[f64], n: usize, pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(i, j)| cost[i * n + j]).sum()
}
