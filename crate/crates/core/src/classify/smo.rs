//! Sequential minimal optimization for the soft-margin RBF-kernel dual.
//!
//! Maximizes W(a) = sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij subject to
//! 0 <= a_i <= C and sum(a_i y_i) = 0, two multipliers at a time. Pair
//! selection is deterministic: the first multiplier is the point with the
//! largest KKT violation, the second maximizes |E1 - E2| among the rest;
//! when that pair makes no numerical progress the solver sweeps every other
//! candidate pairing before declaring itself stalled. Ties break toward the
//! lower index, so a fixed input order yields a bit-identical solution.

use ndarray::ArrayView2;

/// RBF kernel exp(-gamma * ||a - b||^2).
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, z)| (x - z) * (x - z)).sum();
    (-gamma * sq).exp()
}

/// Dual solution state returned by [`solve`].
#[derive(Debug, Clone)]
pub struct SmoSolution {
    /// Lagrange multipliers, one per training point, in [0, c].
    pub alpha: Vec<f64>,
    /// Decision-function offset.
    pub bias: f64,
    /// Whether every point satisfies the KKT conditions within the
    /// tolerance at exit.
    pub converged: bool,
    /// Dual objective W(a) at exit.
    pub objective: f64,
}

/// Ignore multiplier updates smaller than this; prevents thrashing on
/// rounding noise without affecting KKT satisfaction at practical tolerances.
const STEP_EPS: f64 = 1e-12;

struct Solver<'a> {
    y: &'a [f64],
    c: f64,
    tol: f64,
    kernel: Vec<f64>, // n x n, row-major
    n: usize,
    alpha: Vec<f64>,
    /// u_i = sum_j alpha_j y_j K_ij (decision value without bias)
    u: Vec<f64>,
    bias: f64,
}

impl<'a> Solver<'a> {
    fn k(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.n + j]
    }

    /// KKT violation magnitude of point `i` beyond the tolerance band.
    fn violation(&self, i: usize) -> f64 {
        let margin = self.y[i] * (self.u[i] + self.bias);
        let mut v: f64 = 0.0;
        if self.alpha[i] < self.c {
            v = v.max((1.0 - self.tol) - margin);
        }
        if self.alpha[i] > 0.0 {
            v = v.max(margin - (1.0 + self.tol));
        }
        v
    }

    fn max_violator(&self) -> (usize, f64) {
        let mut best = (0usize, 0.0f64);
        for i in 0..self.n {
            let v = self.violation(i);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    fn error(&self, i: usize) -> f64 {
        self.u[i] + self.bias - self.y[i]
    }

    /// Jointly optimize the pair (i, j). Returns true on a real update.
    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (y1, y2) = (self.y[i], self.y[j]);
        let (a1, a2) = (self.alpha[i], self.alpha[j]);
        let e1 = self.error(i);
        let e2 = self.error(j);
        let s = y1 * y2;

        let (lo, hi) = if (y1 - y2).abs() > f64::EPSILON {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a1 + a2 - self.c).max(0.0), (a1 + a2).min(self.c))
        };
        if lo >= hi {
            return false;
        }

        let k11 = self.k(i, i);
        let k12 = self.k(i, j);
        let k22 = self.k(j, j);
        let eta = k11 + k22 - 2.0 * k12;

        let a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // Degenerate curvature (duplicate points): compare the dual
            // objective change at both clip bounds directly.
            let g1 = y1 * self.u[i] - 1.0; // d(-W)/da1
            let g2 = y2 * self.u[j] - 1.0;
            let delta_obj = |a2c: f64| -> f64 {
                let d2 = a2c - a2;
                let d1 = -s * d2;
                g1 * d1 + g2 * d2 + 0.5 * (k11 * d1 * d1 + k22 * d2 * d2) + s * k12 * d1 * d2
            };
            let (dl, dh) = (delta_obj(lo), delta_obj(hi));
            if dl < dh - 1e-12 {
                lo
            } else if dh < dl - 1e-12 {
                hi
            } else {
                return false;
            }
        };

        if (a2_new - a2).abs() < STEP_EPS * (a2_new + a2 + STEP_EPS) {
            return false;
        }
        let mut a1_new = a1 + s * (a2 - a2_new);
        // guard against rounding drift outside the box
        a1_new = a1_new.clamp(0.0, self.c);

        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);

        let b1 = self.bias - e1 - d1 * k11 - d2 * k12;
        let b2 = self.bias - e2 - d1 * k12 - d2 * k22;
        self.bias = if a1_new > 0.0 && a1_new < self.c {
            b1
        } else if a2_new > 0.0 && a2_new < self.c {
            b2
        } else {
            0.5 * (b1 + b2)
        };

        for k in 0..self.n {
            self.u[k] += d1 * self.k(i, k) + d2 * self.k(j, k);
        }
        self.alpha[i] = a1_new;
        self.alpha[j] = a2_new;
        true
    }

    /// Second-choice heuristic, then a full sweep of partners for `i`.
    fn examine(&mut self, i: usize) -> bool {
        let e1 = self.error(i);
        let mut best = (usize::MAX, -1.0f64);
        for j in 0..self.n {
            if j == i {
                continue;
            }
            let gap = (e1 - self.error(j)).abs();
            if gap > best.1 {
                best = (j, gap);
            }
        }
        if best.0 != usize::MAX && self.take_step(i, best.0) {
            return true;
        }
        for j in 0..self.n {
            if j != i && self.take_step(i, j) {
                return true;
            }
        }
        false
    }

    fn objective(&self) -> f64 {
        let mut w = 0.0;
        for i in 0..self.n {
            w += self.alpha[i] - 0.5 * self.alpha[i] * self.y[i] * self.u[i];
        }
        w
    }
}

/// Solve the dual on a training matrix (rows = points) with labels in
/// {-1, +1}. `max_passes` scales the step budget: up to `max_passes * n`
/// successful pair updates before giving up.
pub fn solve(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    gamma: f64,
    c: f64,
    kkt_tol: f64,
    max_passes: usize,
) -> SmoSolution {
    let n = x.nrows();
    assert_eq!(n, y.len(), "label count must match row count");
    assert!(n >= 2, "need at least two training points");

    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rbf_kernel(&rows[i], &rows[j], gamma);
            kernel[i * n + j] = v;
            kernel[j * n + i] = v;
        }
    }

    let mut solver = Solver {
        y,
        c,
        tol: kkt_tol,
        kernel,
        n,
        alpha: vec![0.0; n],
        u: vec![0.0; n],
        bias: 0.0,
    };

    let max_steps = max_passes.saturating_mul(n);
    let mut steps = 0usize;
    loop {
        let (i, v) = solver.max_violator();
        if v <= 0.0 {
            break; // all KKT conditions hold within the tolerance
        }
        if steps >= max_steps {
            break;
        }
        if solver.examine(i) {
            steps += 1;
            continue;
        }
        // The top violator is stuck; sweep the remaining violators in
        // decreasing order before declaring a stall.
        let mut order: Vec<(usize, f64)> = (0..solver.n)
            .filter(|&k| k != i)
            .map(|k| (k, solver.violation(k)))
            .filter(|&(_, vk)| vk > 0.0)
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut progressed = false;
        for (k, _) in order {
            if solver.examine(k) {
                progressed = true;
                steps += 1;
                break;
            }
        }
        if !progressed {
            break; // numerically stalled; convergence flag reports the state
        }
    }

    let converged = solver.max_violator().1 <= 0.0;
    SmoSolution {
        objective: solver.objective(),
        bias: solver.bias,
        alpha: solver.alpha,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rbf_kernel_basics() {
        assert_eq!(rbf_kernel(&[1.0, 2.0], &[1.0, 2.0], 0.7), 1.0);
        let v = rbf_kernel(&[0.0], &[2.0], 0.5);
        assert!((v - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn separable_pair_satisfies_kkt() {
        let x = array![[-1.0], [1.0]];
        let y = [-1.0, 1.0];
        let sol = solve(x.view(), &y, 1.0, 10.0, 1e-3, 200);
        assert!(sol.converged);
        // equality constraint and box
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum();
        assert!(balance.abs() < 1e-8);
        for a in &sol.alpha {
            assert!((0.0..=10.0).contains(a));
        }
        // both points end up support vectors with margin ~1
        for i in 0..2 {
            let f: f64 = (0..2)
                .map(|j| sol.alpha[j] * y[j] * rbf_kernel(&[x[[j, 0]]], &[x[[i, 0]]], 1.0))
                .sum::<f64>()
                + sol.bias;
            assert!((y[i] * f - 1.0).abs() < 1e-3, "margin {}", y[i] * f);
        }
    }

    #[test]
    fn well_separated_clusters_reach_perfect_training_accuracy() {
        let x = array![
            [2.0, 2.0],
            [2.1, 1.9],
            [1.9, 2.1],
            [-2.0, -2.0],
            [-2.1, -1.9],
            [-1.9, -2.1]
        ];
        let y = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        let sol = solve(x.view(), &y, 1.0, 1.0, 1e-3, 200);
        assert!(sol.converged);
        for i in 0..6 {
            let f: f64 = (0..6)
                .map(|j| {
                    sol.alpha[j] * y[j] * rbf_kernel(x.row(j).as_slice().unwrap(), x.row(i).as_slice().unwrap(), 1.0)
                })
                .sum::<f64>()
                + sol.bias;
            assert!(f * y[i] > 0.0);
        }
    }

    #[test]
    fn xor_with_rbf_is_fit_exactly() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let sol = solve(x.view(), &y, 1.0, 10.0, 1e-3, 200);
        assert!(sol.converged);
        for i in 0..4 {
            let f: f64 = (0..4)
                .map(|j| {
                    sol.alpha[j] * y[j] * rbf_kernel(x.row(j).as_slice().unwrap(), x.row(i).as_slice().unwrap(), 1.0)
                })
                .sum::<f64>()
                + sol.bias;
            assert!(f * y[i] > 0.0, "point {i} misclassified, f = {f}");
        }
    }

    #[test]
    fn duplicate_points_do_not_break_the_solver() {
        let x = array![[1.0], [1.0], [-1.0], [-1.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let sol = solve(x.view(), &y, 0.5, 1.0, 1e-3, 200);
        assert!(sol.converged);
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum();
        assert!(balance.abs() < 1e-8);
    }

    #[test]
    fn identical_runs_produce_identical_solutions() {
        let x = array![
            [0.3, -1.2],
            [0.5, 0.7],
            [-0.8, 0.1],
            [1.4, 1.1],
            [-1.0, -0.4]
        ];
        let y = [1.0, -1.0, 1.0, -1.0, 1.0];
        let a = solve(x.view(), &y, 0.8, 2.0, 1e-3, 200);
        let b = solve(x.view(), &y, 0.8, 2.0, 1e-3, 200);
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.bias, b.bias);
    }
}
