//! Time-delay embedding and channel-delay correlation matrices.
//!
//! Each channel is augmented with lagged copies of itself before computing a
//! Pearson correlation matrix, so the matrix captures cross-channel *timing*
//! structure as well as instantaneous coupling. With `C` channels and `D`
//! delays at scale `d`, the matrix is `(C*D) x (C*D)`; its eigenvalue
//! spectrum is the downstream coordination feature.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Segment;
use crate::util::fmt_sig12;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("delay scale must be at least 1 sample")]
    BadDelayScale,
    #[error("number of delays must be at least 1")]
    BadNumDelays,
    #[error("segment has {len} samples but the embedding needs at least {required}")]
    InsufficientLength { len: usize, required: usize },
    #[error("channel {channel:?} at lag {lag} samples has zero variance over the embedded support")]
    DegenerateChannel { channel: String, lag: usize },
    #[error("matrix CSV row {row}: {message}")]
    BadMatrixCsv { row: usize, message: String },
    #[error("matrix sidecar is not valid JSON: {0}")]
    BadSidecar(String),
    #[error("matrix is {rows}x{cols} but sidecar implies {dim}x{dim}")]
    DimensionMismatch { rows: usize, cols: usize, dim: usize },
    #[error("matrix entry ({row}, {col}) breaks symmetry by {delta:e}")]
    NotSymmetric { row: usize, col: usize, delta: f64 },
    #[error("matrix diagonal entry {index} is {value}, expected 1 within 1e-12")]
    BadDiagonal { index: usize, value: f64 },
}

/// Delay-embedding geometry: `num_delays` copies per channel, successive
/// copies `delay_scale` samples apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    delay_scale: usize,
    num_delays: usize,
}

impl EmbeddingConfig {
    pub fn new(delay_scale: usize, num_delays: usize) -> Result<Self, EmbeddingError> {
        if delay_scale < 1 {
            return Err(EmbeddingError::BadDelayScale);
        }
        if num_delays < 1 {
            return Err(EmbeddingError::BadNumDelays);
        }
        Ok(Self {
            delay_scale,
            num_delays,
        })
    }

    pub fn delay_scale(&self) -> usize {
        self.delay_scale
    }

    pub fn num_delays(&self) -> usize {
        self.num_delays
    }

    /// Smallest segment length that yields at least one embedded row.
    pub fn min_segment_len(&self) -> usize {
        (self.num_delays - 1) * self.delay_scale + 1
    }
}

/// Build the delay-embedded ensemble of a segment.
///
/// Output rows are the valid time points (`L - (D-1)*d` of them); column
/// `c*D + k` holds channel `c` lagged by `k*d` samples, so lag ordering is
/// channel-major. Row `i` corresponds to source time `i + (D-1)*d`, the
/// common support over which every lagged copy is defined.
pub fn embed(samples: ArrayView2<'_, f64>, config: &EmbeddingConfig) -> Result<Array2<f64>, EmbeddingError> {
    let len = samples.nrows();
    let channels = samples.ncols();
    let d = config.delay_scale;
    let nd = config.num_delays;
    let required = config.min_segment_len();
    if len < required {
        return Err(EmbeddingError::InsufficientLength { len, required });
    }
    let rows = len - (nd - 1) * d;
    let max_lag = (nd - 1) * d;
    let mut out = Array2::zeros((rows, channels * nd));
    for c in 0..channels {
        for k in 0..nd {
            let offset = max_lag - k * d;
            let col = c * nd + k;
            for i in 0..rows {
                out[[i, col]] = samples[[i + offset, c]];
            }
        }
    }
    Ok(out)
}

/// Channel-delay correlation matrix of one segment at a fixed delay scale.
///
/// Symmetric with unit diagonal and positive semidefinite up to rounding:
/// it is the Gram matrix of the mean-centered, unit-variance embedded
/// columns divided by the ensemble row count.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: Array2<f64>,
    config: EmbeddingConfig,
    channel_count: usize,
    sample_rate_hz: f64,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Row-major CSV of the `dim x dim` values, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.rows() {
            let mut first = true;
            for &v in row {
                if !first {
                    out.push(',');
                }
                out.push_str(&fmt_sig12(v));
                first = false;
            }
            out.push('\n');
        }
        out
    }

    /// JSON sidecar describing the matrix geometry.
    pub fn sidecar_json(&self) -> String {
        let sidecar = Sidecar {
            channels: self.channel_count,
            num_delays: self.config.num_delays,
            delay_scale: self.config.delay_scale,
            sample_rate_hz: self.sample_rate_hz,
        };
        serde_json::to_string_pretty(&sidecar).expect("sidecar serializes")
    }

    /// Reassemble a matrix from its CSV body and JSON sidecar.
    ///
    /// Symmetry and unit diagonal are checked to 1e-12; the upper triangle
    /// is then mirrored so the loaded matrix is exactly symmetric again.
    pub fn from_parts(csv: &str, sidecar_json: &str) -> Result<Self, EmbeddingError> {
        let sidecar: Sidecar = serde_json::from_str(sidecar_json)
            .map_err(|e| EmbeddingError::BadSidecar(e.to_string()))?;
        let config = EmbeddingConfig::new(sidecar.delay_scale, sidecar.num_delays)?;
        let dim = sidecar.channels * sidecar.num_delays;

        let mut values = Vec::with_capacity(dim * dim);
        let mut rows = 0usize;
        for (i, line) in csv.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != dim {
                return Err(EmbeddingError::BadMatrixCsv {
                    row: i + 1,
                    message: format!("expected {dim} columns, found {}", cells.len()),
                });
            }
            for cell in cells {
                let v: f64 = cell.trim().parse().map_err(|_| EmbeddingError::BadMatrixCsv {
                    row: i + 1,
                    message: format!("cannot parse {:?} as a number", cell.trim()),
                })?;
                values.push(v);
            }
            rows += 1;
        }
        if rows != dim {
            return Err(EmbeddingError::DimensionMismatch {
                rows,
                cols: dim,
                dim,
            });
        }
        let mut m = Array2::from_shape_vec((dim, dim), values).expect("shape checked");
        for i in 0..dim {
            let diag = m[[i, i]];
            if (diag - 1.0).abs() > 1e-12 {
                return Err(EmbeddingError::BadDiagonal { index: i, value: diag });
            }
            for j in (i + 1)..dim {
                let delta = (m[[i, j]] - m[[j, i]]).abs();
                if delta > 1e-12 {
                    return Err(EmbeddingError::NotSymmetric { row: i, col: j, delta });
                }
                m[[j, i]] = m[[i, j]];
            }
        }
        Ok(Self {
            values: m,
            config,
            channel_count: sidecar.channels,
            sample_rate_hz: sidecar.sample_rate_hz,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    channels: usize,
    num_delays: usize,
    delay_scale: usize,
    sample_rate_hz: f64,
}

/// Compute the channel-delay correlation matrix of a segment.
///
/// Every embedded column is centered and scaled to unit variance over the
/// ensemble rows (population normalization), then the Gram matrix divided by
/// the row count gives Pearson correlations. The upper triangle is mirrored
/// so the result equals its transpose exactly.
pub fn channel_delay_correlation(
    segment: &Segment<'_>,
    config: &EmbeddingConfig,
) -> Result<CorrelationMatrix, EmbeddingError> {
    let samples = segment.samples();
    let len = samples.nrows();
    // correlation needs at least two ensemble rows
    let required = config.min_segment_len() + 1;
    if len < required {
        return Err(EmbeddingError::InsufficientLength { len, required });
    }
    let mut ensemble = embed(samples, config)?;
    let n = ensemble.nrows() as f64;
    let names = segment.source().channel_names();

    for (col, mut column) in ensemble.columns_mut().into_iter().enumerate() {
        let mean = column.sum() / n;
        column.mapv_inplace(|v| v - mean);
        let ss: f64 = column.iter().map(|v| v * v).sum();
        if ss == 0.0 {
            let channel_idx = col / config.num_delays;
            let k = col % config.num_delays;
            return Err(EmbeddingError::DegenerateChannel {
                channel: names[channel_idx].clone(),
                lag: k * config.delay_scale,
            });
        }
        let inv_std = 1.0 / (ss / n).sqrt();
        column.mapv_inplace(|v| v * inv_std);
    }

    let mut gram = ensemble.t().dot(&ensemble);
    gram.mapv_inplace(|v| v / n);
    // mirror the upper triangle; blocked matmul may leave ulp-level asymmetry
    let dim = gram.nrows();
    for i in 0..dim {
        for j in (i + 1)..dim {
            gram[[j, i]] = gram[[i, j]];
        }
    }

    Ok(CorrelationMatrix {
        values: gram,
        config: *config,
        channel_count: samples.ncols(),
        sample_rate_hz: segment.source().sample_rate_hz(),
    })
}
