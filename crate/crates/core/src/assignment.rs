//! Linear assignment solvers.
//!
//! [`min_cost_assignment`] is a shortest-augmenting-path Hungarian method with
//! row/column potentials over a dense rectangular matrix. The gated solvers build
//! on it: infeasible cells are priced above any feasible total so the optimum
//! first maximizes the number of feasible pairs, then minimizes their cost.

/// Dense row-major cost matrix with a feasibility gate `cost <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    cost: Vec<f64>,
    threshold: f64,
}

impl CostMatrix {
    /// Panics if `cost.len() != rows * cols`.
    pub fn new(rows: usize, cols: usize, cost: Vec<f64>, threshold: f64) -> Self {
        assert_eq!(cost.len(), rows * cols, "cost buffer does not match shape");
        CostMatrix { rows, cols, cost, threshold }
    }

    pub fn from_rows(rows: &[Vec<f64>], threshold: f64) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let flat: Vec<f64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::new(r, c, flat, threshold)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn cost(&self, row: usize, col: usize) -> f64 {
        self.cost[row * self.cols + col]
    }

    pub fn feasible(&self, row: usize, col: usize) -> bool {
        self.cost(row, col) <= self.threshold
    }

    /// Sum of cell costs over `pairs`, in the given order.
    pub fn total(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(r, c)| self.cost(r, c)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Hungarian,
    Greedy,
}

/// Solves with the chosen strategy. Every returned pair is feasible; pairs are
/// sorted by row.
pub fn solve_assignment(m: &CostMatrix, solver: Solver) -> Vec<(usize, usize)> {
    match solver {
        Solver::Hungarian => solve_hungarian(m),
        Solver::Greedy => solve_greedy(m),
    }
}

/// Maximum-cardinality feasible pairing of minimum total cost.
pub fn solve_hungarian(m: &CostMatrix) -> Vec<(usize, usize)> {
    if m.rows == 0 || m.cols == 0 {
        return Vec::new();
    }
    let max_feasible = m
        .cost
        .iter()
        .copied()
        .filter(|&c| c <= m.threshold)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))));
    let Some(max_feasible) = max_feasible else {
        return Vec::new();
    };
    // Any pairing has at most min(rows, cols) feasible cells, so one infeasible
    // cell outweighs every feasible total.
    let big = (m.rows.min(m.cols) as f64 + 1.0) * (max_feasible.abs() + 1.0);
    let priced: Vec<f64> = m.cost.iter().map(|&c| if c <= m.threshold { c } else { big }).collect();
    let mut pairs: Vec<(usize, usize)> =
        min_cost_assignment(m.rows, m.cols, &priced).into_iter().filter(|&(r, c)| m.feasible(r, c)).collect();
    pairs.sort_unstable();
    pairs
}

/// Takes feasible cells in ascending cost, ties broken by lower row then lower column.
pub fn solve_greedy(m: &CostMatrix) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = (0..m.rows)
        .flat_map(|r| (0..m.cols).map(move |c| (r, c)))
        .filter(|&(r, c)| m.feasible(r, c))
        .collect();
    cells.sort_by(|a, b| m.cost(a.0, a.1).total_cmp(&m.cost(b.0, b.1)).then(a.cmp(b)));
    let mut row_used = vec![false; m.rows];
    let mut col_used = vec![false; m.cols];
    let mut pairs = Vec::new();
    for (r, c) in cells {
        if !row_used[r] && !col_used[c] {
            row_used[r] = true;
            col_used[c] = true;
            pairs.push((r, c));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Rectangular linear sum assignment over a row-major `rows x cols` buffer.
/// Assigns `min(rows, cols)` pairs minimizing the total cost. Costs must be finite.
pub fn min_cost_assignment(rows: usize, cols: usize, cost: &[f64]) -> Vec<(usize, usize)> {
    assert_eq!(cost.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    if rows <= cols {
        hungarian_wide(rows, cols, |i, j| cost[i * cols + j])
    } else {
        let mut t: Vec<(usize, usize)> =
            hungarian_wide(cols, rows, |i, j| cost[j * cols + i]).into_iter().map(|(c, r)| (r, c)).collect();
        t.sort_unstable();
        t
    }
}

// Requires n <= m. Uses 1-based potentials with a virtual column 0.
fn hungarian_wide(n: usize, m: usize, a: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    // p[j]: row assigned to column j (1-based, 0 = none)
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut out: Vec<(usize, usize)> = (1..=m).filter(|&j| p[j] != 0).map(|j| (p[j] - 1, j - 1)).collect();
    out.sort_unstable();
    out
}
