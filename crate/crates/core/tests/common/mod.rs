//! Independent oracles and fixture builders shared by the integration and
//! acceptance suites. Everything here deliberately avoids the library's own
//! numerical paths: the eigensolver oracle is power iteration with
//! deflation, the SVM oracle solves the dual exactly by enumerating
//! active-set patterns, and correlations are computed pairwise from scratch.

#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView2};
use tdec_core::rng::Xoshiro256StarStar;
use tdec_core::spectrum::FeatureInstance;
use tdec_core::types::{ClassLabel, Modality};

/// Pearson correlation of two equal-length slices (population form).
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, z) in a.iter().zip(b) {
        cov += (x - ma) * (z - mb);
        va += (x - ma) * (x - ma);
        vb += (z - mb) * (z - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}

fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// All eigenvalues of a symmetric PSD matrix by power iteration with
/// deflation, sorted descending. Independent of the library's Jacobi path.
///
/// Each eigenpair iterates until the residual ||Av - rho v|| falls below
/// 1e-10 of the matrix scale, which keeps the accumulated deflation error
/// well inside the 1e-8 comparisons the callers make.
pub fn power_iteration_eigenvalues(m: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.to_owned();
    let scale = frobenius(&a).max(1.0);
    let mut out = Vec::with_capacity(n);

    for k in 0..n {
        if frobenius(&a) <= 1e-11 * scale {
            out.resize(n, 0.0);
            break;
        }
        // deterministic, deflation-step-dependent start vector
        let mut v: Array1<f64> =
            Array1::from_shape_fn(n, |i| 1.0 + 0.013 * (i as f64 + 1.0) + 0.007 * (k as f64 + 1.0) * (i as f64).sin());
        let norm = v.dot(&v).sqrt();
        v.mapv_inplace(|x| x / norm);

        let mut rho = 0.0;
        let mut converged = false;
        for _ in 0..500_000 {
            let w = a.dot(&v);
            let wnorm = w.dot(&w).sqrt();
            if wnorm <= 1e-13 * scale {
                rho = 0.0;
                converged = true;
                break;
            }
            rho = v.dot(&w);
            let residual: f64 = (&w - &(&v * rho)).iter().map(|r| r * r).sum::<f64>().sqrt();
            v = &w / wnorm;
            if residual <= 1e-10 * scale {
                converged = true;
                break;
            }
        }
        assert!(converged, "power iteration stalled at eigenvalue {k}");
        out.push(rho);
        // deflate the found component
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] -= rho * v[i] * v[j];
            }
        }
    }
    out.truncate(n);
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// Random correlation-like matrix: z-scored columns of seeded Gaussian data,
/// Gram matrix divided by the row count, mirrored exactly symmetric.
pub fn random_normalized_gram(dim: usize, rows: usize, seed: u64) -> Array2<f64> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut data = Array2::zeros((rows, dim));
    for i in 0..rows {
        for j in 0..dim {
            data[[i, j]] = rng.next_normal();
        }
    }
    let n = rows as f64;
    for mut col in data.columns_mut() {
        let mean = col.sum() / n;
        col.mapv_inplace(|v| v - mean);
        let ss: f64 = col.iter().map(|v| v * v).sum();
        let inv = 1.0 / (ss / n).sqrt();
        col.mapv_inplace(|v| v * inv);
    }
    let mut gram = data.t().dot(&data);
    gram.mapv_inplace(|v| v / n);
    for i in 0..dim {
        for j in (i + 1)..dim {
            gram[[j, i]] = gram[[i, j]];
        }
    }
    gram
}

/// Exact solution of the SVM dual for tiny problems (n <= 12, practical at
/// n <= 8) by enumerating every {lower-bound, upper-bound, free} pattern,
/// solving the equality-constrained stationarity system on each face, and
/// keeping the best feasible candidate. The dual is concave, so its maximum
/// over the box-plus-equality polytope is stationary on some face and this
/// enumeration must visit it.
pub struct QpOracle {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

pub fn qp_oracle(kernel: &Array2<f64>, y: &[f64], c: f64) -> QpOracle {
    let n = y.len();
    assert!(n <= 12, "enumeration oracle is exponential; keep fixtures tiny");
    let h = {
        let mut h = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                h[[i, j]] = y[i] * y[j] * kernel[[i, j]];
            }
        }
        h
    };
    let objective = |alpha: &[f64]| -> f64 {
        let mut w = 0.0;
        for i in 0..n {
            w += alpha[i];
            for j in 0..n {
                w -= 0.5 * alpha[i] * h[[i, j]] * alpha[j];
            }
        }
        w
    };

    #[derive(Clone, Copy, PartialEq)]
    enum Slot {
        Lo,
        Hi,
        Free,
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pattern = vec![Slot::Lo; n];
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut rem = code;
        for slot in pattern.iter_mut() {
            *slot = match rem % 3 {
                0 => Slot::Lo,
                1 => Slot::Hi,
                _ => Slot::Free,
            };
            rem /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == Slot::Free).collect();
        let mut alpha: Vec<f64> = pattern
            .iter()
            .map(|s| if *s == Slot::Hi { c } else { 0.0 })
            .collect();

        if free.is_empty() {
            let balance: f64 = alpha.iter().zip(y).map(|(a, yi)| a * yi).sum();
            if balance.abs() < 1e-9 {
                let w = objective(&alpha);
                if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                    best = Some((w, alpha));
                }
            }
            continue;
        }

        // stationarity on the face: [H_FF  y_F; y_F^T  0] [a_F; nu] = rhs
        let m = free.len();
        let mut mat = vec![vec![0.0f64; m + 2]; m + 1]; // augmented
        for (r, &i) in free.iter().enumerate() {
            for (cidx, &j) in free.iter().enumerate() {
                mat[r][cidx] = h[[i, j]];
            }
            mat[r][m] = y[i];
            let mut rhs = 1.0;
            for j in 0..n {
                if pattern[j] == Slot::Hi {
                    rhs -= h[[i, j]] * c;
                }
            }
            mat[r][m + 1] = rhs;
        }
        for (cidx, &j) in free.iter().enumerate() {
            mat[m][cidx] = y[j];
        }
        mat[m][m] = 0.0;
        let mut eq = 0.0;
        for j in 0..n {
            if pattern[j] == Slot::Hi {
                eq -= y[j] * c;
            }
        }
        mat[m][m + 1] = eq;

        if let Some(solution) = gauss_solve(&mut mat) {
            let mut feasible = true;
            for (cidx, &i) in free.iter().enumerate() {
                let a = solution[cidx];
                if !(-1e-9..=c + 1e-9).contains(&a) {
                    feasible = false;
                    break;
                }
                alpha[i] = a.clamp(0.0, c);
            }
            if feasible {
                let w = objective(&alpha);
                if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                    best = Some((w, alpha));
                }
            }
        }
    }

    let (objective_value, alpha) = best.expect("alpha = 0 is always feasible");
    let bias = oracle_bias(kernel, y, c, &alpha);
    QpOracle {
        alpha,
        bias,
        objective: objective_value,
    }
}

/// Gaussian elimination with partial pivoting on an augmented matrix
/// (last column = rhs). Returns None when singular.
fn gauss_solve(mat: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = mat.len();
    for col in 0..n {
        let pivot_row = (col..n).max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))?;
        if mat[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        mat.swap(col, pivot_row);
        let pivot = mat[col][col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = mat[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            #[allow(clippy::needless_range_loop)]
            for k in col..=n {
                let upper = mat[col][k];
                mat[row][k] -= factor * upper;
            }
        }
    }
    Some((0..n).map(|i| mat[i][n] / mat[i][i]).collect())
}

/// Decision-function offset consistent with the oracle multipliers: read it
/// off a free support vector when one exists, otherwise take the midpoint of
/// the interval the bound constraints allow.
fn oracle_bias(kernel: &Array2<f64>, y: &[f64], c: f64, alpha: &[f64]) -> f64 {
    let n = y.len();
    let u = |i: usize| -> f64 {
        (0..n).map(|j| alpha[j] * y[j] * kernel[[j, i]]).sum()
    };
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > 1e-9 && alpha[i] < c - 1e-9)
        .collect();
    if !free.is_empty() {
        return free.iter().map(|&i| y[i] - u(i)).sum::<f64>() / free.len() as f64;
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let target = y[i] - u(i); // b where the margin is exactly 1
        let at_lower = alpha[i] <= 1e-9;
        if (y[i] > 0.0) == at_lower {
            lo = lo.max(target);
        } else {
            hi = hi.min(target);
        }
    }
    if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo
    } else {
        hi
    }
}

/// Dual objective from multipliers, for comparing solver output to oracle.
pub fn dual_objective(kernel: &Array2<f64>, y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut w = 0.0;
    for i in 0..n {
        w += alpha[i];
        for j in 0..n {
            w -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * kernel[[i, j]];
        }
    }
    w
}

/// RBF kernel matrix of a point set.
pub fn kernel_matrix(points: &[Vec<f64>], gamma: f64) -> Array2<f64> {
    let n = points.len();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let sq: f64 = points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (-gamma * sq).exp()
    })
}

/// Build a feature instance for classifier fixtures.
pub fn instance(subject: &str, seg: usize, label: ClassLabel, features: &[f64]) -> FeatureInstance {
    FeatureInstance {
        subject_id: subject.to_string(),
        label,
        modality: Modality::Other,
        segment_id: format!("seg{seg:03}"),
        features: features.to_vec(),
    }
}

/// Class-balanced separable cohort: `subjects_per_class` per label, each
/// with `segments` instances, features clustered by class with per-instance
/// jitter drawn from the seeded portable generator.
pub fn separable_cohort(
    subjects_per_class: usize,
    segments: usize,
    margin: f64,
    jitter: f64,
    seed: u64,
) -> Vec<FeatureInstance> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut out = Vec::new();
    for s in 0..subjects_per_class {
        for (label, sign, prefix) in [(ClassLabel::Sz, 1.0, "sz"), (ClassLabel::Hc, -1.0, "hc")] {
            for g in 0..segments {
                let features = vec![
                    sign * margin + jitter * rng.next_normal(),
                    -sign * margin + jitter * rng.next_normal(),
                ];
                out.push(instance(&format!("{prefix}{s:02}"), g, label, &features));
            }
        }
    }
    out
}

/// Binomial tail P(X >= wins) for X ~ Binomial(trials, 1/2); the one-sided
/// sign-test p-value.
pub fn sign_test_p(wins: usize, trials: usize) -> f64 {
    let mut total = 0.0f64;
    for k in wins..=trials {
        let mut log_choose = 0.0f64;
        for i in 0..k.min(trials - k) {
            log_choose += ((trials - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        total += (log_choose - (trials as f64) * 2.0f64.ln()).exp();
    }
    total.min(1.0)
}
