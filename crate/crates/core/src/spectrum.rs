//! Eigenspectra of correlation matrices and the features pooled from them.
//!
//! A few dominant eigenvalues mean coordination lives in a low-dimensional
//! subspace (simple coupling); mass spread into the high-rank tail means a
//! higher-dimensional, more complex coordination pattern. Features are
//! averages of the trace-normalized spectrum over normalized index ranges.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::CorrelationMatrix;
use crate::types::{ClassLabel, Modality};
use crate::util::fmt_sig12;

/// Floor applied before taking log10 of near-zero eigenvalues, so
/// rank-deficient spectra stay plottable.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not positive semidefinite: eigenvalue {0} below -1e-8")]
    NotPositiveSemidefinite(f64),
    #[error("eigenvalues are not sorted in descending order at index {0}")]
    NotSorted(usize),
    #[error("eigenvalue at index {index} is {value}, outside the valid range")]
    BadEigenvalue { index: usize, value: f64 },
    #[error("normalized spectrum sums to {0}, expected 1 within 1e-9")]
    BadNormalizedSum(f64),
    #[error("spectrum sum {0} is not positive")]
    NonPositiveSum(f64),
    #[error("expected a normalized spectrum")]
    NotNormalized,
    #[error("expected a raw spectrum")]
    NotRaw,
    #[error("cannot average an empty list of spectra")]
    EmptyAverage,
    #[error("spectra disagree in dimension or normalization flag")]
    MixedSpectra,
    #[error("index range [{lo}, {hi}] is invalid; need 0 <= lo <= hi <= 1")]
    BadRange { lo: f64, hi: f64 },
    #[error("cannot parse {0:?} as an index range (expected \"lo:hi\")")]
    BadRangeSyntax(String),
    #[error("index range [{lo}, {hi}] selects no indices at dimension {dim}")]
    EmptyRange { lo: f64, hi: f64, dim: usize },
    #[error("reference group {0} is missing")]
    MissingReference(ClassLabel),
    #[error("spectra CSV row {row}: {message}")]
    BadSpectraCsv { row: usize, message: String },
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm falls below 1e-12 of the
/// full Frobenius norm, capped at 100 sweeps. Unconditionally stable for the
/// symmetric matrices produced here (up to a few hundred rows). Returned
/// values are unsorted.
pub fn jacobi_eigenvalues(matrix: ArrayView2<'_, f64>) -> Result<Vec<f64>, SpectrumError> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(SpectrumError::NotSquare {
            rows: n,
            cols: matrix.ncols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = matrix.to_owned();
    let total_norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();

    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += 2.0 * a[[i, j]] * a[[i, j]];
                }
            }
            s.sqrt()
        };
        if off <= 1e-12 * total_norm {
            return Ok((0..n).map(|i| a[[i, i]]).collect());
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                // rotation annihilating a[p][q]
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[[p, p]];
                let aqq = a[[q, q]];
                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let g = a[[j, p]];
                    let h = a[[j, q]];
                    let gp = g - s * (h + tau * g);
                    let hq = h + s * (g - tau * h);
                    a[[j, p]] = gp;
                    a[[p, j]] = gp;
                    a[[j, q]] = hq;
                    a[[q, j]] = hq;
                }
            }
        }
    }
    Err(SpectrumError::NoConvergence(MAX_SWEEPS))
}

/// Rank-ordered eigenvalues, raw or trace-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspectrum {
    values: Vec<f64>,
    normalized: bool,
}

impl Eigenspectrum {
    /// Eigendecompose a correlation matrix into its raw spectrum.
    ///
    /// Values are sorted descending; small negative values within -1e-8 are
    /// rounding artifacts of a semidefinite matrix and are clamped to zero.
    pub fn from_matrix(m: &CorrelationMatrix) -> Result<Self, SpectrumError> {
        let mut values = jacobi_eigenvalues(m.values())?;
        values.sort_by(|a, b| b.total_cmp(a));
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-8 {
                    return Err(SpectrumError::NotPositiveSemidefinite(*v));
                }
                *v = 0.0;
            }
        }
        Ok(Self {
            values,
            normalized: false,
        })
    }

    /// Wrap explicit values, enforcing the spectrum invariants: sorted
    /// descending, nonnegative, finite; normalized spectra additionally sum
    /// to 1 within 1e-9 with entries in [0, 1]. (Raw spectra of correlation
    /// matrices also sum to their trace; that is a property of the source
    /// matrix, not a constraint on this container.)
    pub fn from_values(values: Vec<f64>, normalized: bool) -> Result<Self, SpectrumError> {
        for (i, w) in values.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(SpectrumError::NotSorted(i + 1));
            }
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 || (normalized && value > 1.0) {
                return Err(SpectrumError::BadEigenvalue { index, value });
            }
        }
        if normalized {
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(SpectrumError::BadNormalizedSum(sum));
            }
        }
        Ok(Self { values, normalized })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Divide by the eigenvalue sum (the matrix trace), so entries sum to 1.
    pub fn normalize(&self) -> Result<Self, SpectrumError> {
        if self.normalized {
            return Err(SpectrumError::NotRaw);
        }
        let sum: f64 = self.values.iter().sum();
        if sum <= 0.0 {
            return Err(SpectrumError::NonPositiveSum(sum));
        }
        Ok(Self {
            values: self.values.iter().map(|v| v / sum).collect(),
            normalized: true,
        })
    }
}

/// Element-wise mean of spectra sharing dimension and normalization flag.
/// The mean of descending-sorted vectors is itself descending-sorted.
pub fn average_spectra(specs: &[Eigenspectrum]) -> Result<Eigenspectrum, SpectrumError> {
    let first = specs.first().ok_or(SpectrumError::EmptyAverage)?;
    let dim = first.dim();
    let normalized = first.is_normalized();
    let mut acc = vec![0.0f64; dim];
    for spec in specs {
        if spec.dim() != dim || spec.is_normalized() != normalized {
            return Err(SpectrumError::MixedSpectra);
        }
        for (a, v) in acc.iter_mut().zip(spec.values()) {
            *a += v;
        }
    }
    let k = specs.len() as f64;
    let values: Vec<f64> = acc.into_iter().map(|v| v / k).collect();
    Ok(Eigenspectrum { values, normalized })
}

/// A closed interval of normalized rank positions in [0, 1].
///
/// At dimension `dim`, index `j` sits at position `j / (dim - 1)`, so 0
/// selects the largest eigenvalue and 1 the smallest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexRange {
    lo: f64,
    hi: f64,
}

impl IndexRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SpectrumError> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(SpectrumError::BadRange { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl FromStr for IndexRange {
    type Err = SpectrumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| SpectrumError::BadRangeSyntax(s.to_string()))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| SpectrumError::BadRangeSyntax(s.to_string()))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| SpectrumError::BadRangeSyntax(s.to_string()))?;
        IndexRange::new(lo, hi)
    }
}

/// Parse a comma-separated list like `"0:0.03,0.95:1"`.
pub fn parse_ranges(s: &str) -> Result<Vec<IndexRange>, SpectrumError> {
    s.split(',').map(|tok| tok.trim().parse()).collect()
}

/// The 0-based indices a range selects at dimension `dim`.
pub fn range_indices(dim: usize, range: &IndexRange) -> Vec<usize> {
    (0..dim)
        .filter(|&j| {
            let pos = if dim == 1 {
                0.0
            } else {
                j as f64 / (dim - 1) as f64
            };
            range.lo <= pos && pos <= range.hi
        })
        .collect()
}

/// One classification instance: pooled features plus identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureInstance {
    pub subject_id: String,
    pub label: ClassLabel,
    pub modality: Modality,
    pub segment_id: String,
    pub features: Vec<f64>,
}

/// Average a normalized spectrum over each index range.
pub fn pool_features(
    spec: &Eigenspectrum,
    ranges: &[IndexRange],
    subject_id: &str,
    label: ClassLabel,
    modality: Modality,
    segment_id: &str,
) -> Result<FeatureInstance, SpectrumError> {
    if !spec.is_normalized() {
        return Err(SpectrumError::NotNormalized);
    }
    let dim = spec.dim();
    let mut features = Vec::with_capacity(ranges.len());
    for range in ranges {
        let idx = range_indices(dim, range);
        if idx.is_empty() {
            return Err(SpectrumError::EmptyRange {
                lo: range.lo,
                hi: range.hi,
                dim,
            });
        }
        let sum: f64 = idx.iter().map(|&j| spec.values()[j]).sum();
        features.push(sum / idx.len() as f64);
    }
    Ok(FeatureInstance {
        subject_id: subject_id.to_string(),
        label,
        modality,
        segment_id: segment_id.to_string(),
        features,
    })
}

fn log10_floored(v: f64) -> f64 {
    v.max(LOG_FLOOR).log10()
}

/// Per-group log10 difference curves relative to a reference group.
///
/// Input spectra must share dimension; eigenvalues are floored at
/// [`LOG_FLOOR`] before taking logs. The reference group is not included in
/// the output.
pub fn difference_curves(
    group_means: &BTreeMap<ClassLabel, Eigenspectrum>,
    reference: ClassLabel,
) -> Result<BTreeMap<ClassLabel, Vec<f64>>, SpectrumError> {
    let reference_spec = group_means
        .get(&reference)
        .ok_or(SpectrumError::MissingReference(reference))?;
    let dim = reference_spec.dim();
    let ref_log: Vec<f64> = reference_spec.values().iter().map(|&v| log10_floored(v)).collect();
    let mut out = BTreeMap::new();
    for (&label, spec) in group_means {
        if label == reference {
            continue;
        }
        if spec.dim() != dim {
            return Err(SpectrumError::MixedSpectra);
        }
        let diff: Vec<f64> = spec
            .values()
            .iter()
            .zip(&ref_log)
            .map(|(&v, &r)| log10_floored(v) - r)
            .collect();
        out.insert(label, diff);
    }
    Ok(out)
}

/// One spectra-CSV record: a raw eigenspectrum plus instance identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub segment_id: String,
    pub subject_id: String,
    pub label: ClassLabel,
    pub modality: Modality,
    pub eigenvalues: Vec<f64>,
}

/// Write spectra rows: `segment_id,subject_id,label,modality` followed by
/// the raw eigenvalues in rank order.
pub fn write_spectra_csv(rows: &[SpectrumRow]) -> String {
    let dim = rows.first().map_or(0, |r| r.eigenvalues.len());
    let mut out = String::from("segment_id,subject_id,label,modality");
    for j in 0..dim {
        let _ = write!(out, ",lambda{j}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{}", r.segment_id, r.subject_id, r.label, r.modality);
        for &v in &r.eigenvalues {
            out.push(',');
            out.push_str(&fmt_sig12(v));
        }
        out.push('\n');
    }
    out
}

/// Parse a spectra CSV produced by [`write_spectra_csv`].
pub fn parse_spectra_csv(text: &str) -> Result<Vec<SpectrumRow>, SpectrumError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with("segment_id,") {
            continue;
        }
        let row = i + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 5 {
            return Err(SpectrumError::BadSpectraCsv {
                row,
                message: "expected segment_id, subject_id, label, modality and eigenvalues".into(),
            });
        }
        let label: ClassLabel = cells[2].trim().parse().map_err(|e| SpectrumError::BadSpectraCsv {
            row,
            message: format!("{e}"),
        })?;
        let modality: Modality = cells[3].trim().parse().map_err(|e| SpectrumError::BadSpectraCsv {
            row,
            message: format!("{e}"),
        })?;
        let eigenvalues = cells[4..]
            .iter()
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| SpectrumError::BadSpectraCsv {
                    row,
                    message: format!("cannot parse {:?} as a number", c.trim()),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(SpectrumRow {
            segment_id: cells[0].trim().to_string(),
            subject_id: cells[1].trim().to_string(),
            label,
            modality,
            eigenvalues,
        });
    }
    Ok(rows)
}

/// Group mean spectra for plotting: normalize each row's spectrum, average
/// the segments of each subject, then average subjects within each group.
pub fn group_mean_spectra(
    rows: &[SpectrumRow],
) -> Result<BTreeMap<ClassLabel, Eigenspectrum>, SpectrumError> {
    let mut per_subject: BTreeMap<(ClassLabel, &str), Vec<Eigenspectrum>> = BTreeMap::new();
    for r in rows {
        let spec = Eigenspectrum::from_values(r.eigenvalues.clone(), false)?.normalize()?;
        per_subject
            .entry((r.label, r.subject_id.as_str()))
            .or_default()
            .push(spec);
    }
    let mut per_group: BTreeMap<ClassLabel, Vec<Eigenspectrum>> = BTreeMap::new();
    for ((label, _), specs) in &per_subject {
        per_group
            .entry(*label)
            .or_default()
            .push(average_spectra(specs)?);
    }
    per_group
        .into_iter()
        .map(|(label, subject_means)| Ok((label, average_spectra(&subject_means)?)))
        .collect()
}

/// Plot-data CSV: `index,normalized_index`, one `log10_<group>` column per
/// group, and one `diff_<group>` column per non-reference group.
pub fn plot_data_csv(
    group_means: &BTreeMap<ClassLabel, Eigenspectrum>,
    reference: ClassLabel,
) -> Result<String, SpectrumError> {
    let diffs = difference_curves(group_means, reference)?;
    let dim = group_means[&reference].dim();
    for spec in group_means.values() {
        if spec.dim() != dim {
            return Err(SpectrumError::MixedSpectra);
        }
    }

    let mut out = String::from("index,normalized_index");
    for label in group_means.keys() {
        let _ = write!(out, ",log10_{label}");
    }
    for label in diffs.keys() {
        let _ = write!(out, ",diff_{label}");
    }
    out.push('\n');

    for j in 0..dim {
        let pos = if dim == 1 {
            0.0
        } else {
            j as f64 / (dim - 1) as f64
        };
        let _ = write!(out, "{j},{}", fmt_sig12(pos));
        for spec in group_means.values() {
            let _ = write!(out, ",{}", fmt_sig12(log10_floored(spec.values()[j])));
        }
        for diff in diffs.values() {
            let _ = write!(out, ",{}", fmt_sig12(diff[j]));
        }
        out.push('\n');
    }
    Ok(out)
}
