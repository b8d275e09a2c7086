//! Channel time-series ingestion and diarization-driven segment extraction.
//!
//! Input formats:
//! * channel CSV — UTF-8, comma separated, first row holds channel names,
//!   every following row is one sample in time order. There is no time
//!   column; the sampling rate arrives out of band.
//! * segment manifest — JSON array of `{"speaker", "start_s", "end_s"}`
//!   objects, one per diarized turn.

use std::fmt::Write as _;

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::Modality;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("empty input: expected a header row of channel names")]
    Empty,
    #[error("no data rows after the header")]
    NoRows,
    #[error("duplicate channel name {name:?} in header")]
    DuplicateChannel { name: String },
    #[error("blank channel name at header column {col}")]
    BlankChannel { col: usize },
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {col}: cannot parse {cell:?} as a number")]
    BadNumber { row: usize, col: usize, cell: String },
    #[error("row {row}, column {col}: non-finite value is not allowed")]
    NonFinite { row: usize, col: usize },
    #[error("sample rate must be positive and finite, got {0}")]
    BadSampleRate(f64),
    #[error("manifest is not valid JSON: {0}")]
    BadManifestJson(String),
    #[error("manifest entry {index} (speaker {speaker:?}): timestamps must be finite and start nonnegative")]
    BadTimestamp { index: usize, speaker: String },
    #[error("manifest entry {index} (speaker {speaker:?}): end {end_s} s must be greater than start {start_s} s")]
    ReversedEntry {
        index: usize,
        speaker: String,
        start_s: f64,
        end_s: f64,
    },
    #[error("speaker {speaker:?}: entries [{a_start}, {a_end}] s and [{b_start}, {b_end}] s overlap")]
    OverlappingEntries {
        speaker: String,
        a_start: f64,
        a_end: f64,
        b_start: f64,
        b_end: f64,
    },
}

/// A uniformly sampled multichannel time series. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    sample_rate_hz: f64,
    channel_names: Vec<String>,
    samples: Array2<f64>,
    modality: Modality,
}

impl ChannelSet {
    /// Build from validated parts. Rows are time, columns are channels.
    pub fn new(
        sample_rate_hz: f64,
        channel_names: Vec<String>,
        samples: Array2<f64>,
        modality: Modality,
    ) -> Result<Self, IngestError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(IngestError::BadSampleRate(sample_rate_hz));
        }
        if channel_names.is_empty() {
            return Err(IngestError::Empty);
        }
        for (col, name) in channel_names.iter().enumerate() {
            if name.is_empty() {
                return Err(IngestError::BlankChannel { col: col + 1 });
            }
            if channel_names[..col].contains(name) {
                return Err(IngestError::DuplicateChannel { name: name.clone() });
            }
        }
        if samples.nrows() == 0 {
            return Err(IngestError::NoRows);
        }
        if samples.ncols() != channel_names.len() {
            return Err(IngestError::RaggedRow {
                row: 1,
                expected: channel_names.len(),
                found: samples.ncols(),
            });
        }
        for ((row, col), &v) in samples.indexed_iter() {
            if !v.is_finite() {
                return Err(IngestError::NonFinite { row: row + 1, col: col + 1 });
            }
        }
        Ok(Self {
            sample_rate_hz,
            channel_names,
            samples,
            modality,
        })
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn samples(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn num_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_channels(&self) -> usize {
        self.samples.ncols()
    }

    /// One segment spanning the whole recording.
    pub fn full_segment(&self) -> Segment<'_> {
        Segment {
            source: self,
            start: 0,
            end: self.num_samples(),
        }
    }

    /// Serialize back to the channel CSV format.
    ///
    /// Values use shortest round-trip formatting, so parsing the output
    /// reproduces the in-memory samples exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.channel_names.join(","));
        out.push('\n');
        for row in self.samples.rows() {
            let mut first = true;
            for &v in row {
                if !first {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Parse a channel CSV stream. Row/column numbers in errors are 1-based and
/// count data rows (the header is row 0).
pub fn parse_channel_csv(
    text: &str,
    sample_rate_hz: f64,
    modality: Modality,
) -> Result<ChannelSet, IngestError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header = lines.next().ok_or(IngestError::Empty)?;
    if header.trim().is_empty() {
        return Err(IngestError::Empty);
    }
    let channel_names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let ncols = channel_names.len();

    let mut values: Vec<f64> = Vec::new();
    let mut nrows = 0usize;
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue; // tolerate trailing blank lines
        }
        let row = i + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ncols {
            return Err(IngestError::RaggedRow {
                row,
                expected: ncols,
                found: cells.len(),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| IngestError::BadNumber {
                row,
                col: j + 1,
                cell: cell.trim().to_string(),
            })?;
            if !v.is_finite() {
                return Err(IngestError::NonFinite { row, col: j + 1 });
            }
            values.push(v);
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(IngestError::NoRows);
    }
    let samples = Array2::from_shape_vec((nrows, ncols), values).expect("shape checked above");
    ChannelSet::new(sample_rate_hz, channel_names, samples, modality)
}

/// One diarized turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub speaker: String,
    pub start_s: f64,
    pub end_s: f64,
}

/// Validated diarization manifest. Entries are sorted by (speaker, start)
/// and per-speaker entries are pairwise disjoint; turns of different
/// speakers may interleave freely.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentManifest {
    entries: Vec<ManifestEntry>,
}

impl SegmentManifest {
    pub fn from_entries(mut entries: Vec<ManifestEntry>) -> Result<Self, IngestError> {
        for (index, e) in entries.iter().enumerate() {
            if !e.start_s.is_finite() || !e.end_s.is_finite() || e.start_s < 0.0 {
                return Err(IngestError::BadTimestamp {
                    index,
                    speaker: e.speaker.clone(),
                });
            }
            if e.end_s <= e.start_s {
                return Err(IngestError::ReversedEntry {
                    index,
                    speaker: e.speaker.clone(),
                    start_s: e.start_s,
                    end_s: e.end_s,
                });
            }
        }
        entries.sort_by(|a, b| {
            a.speaker
                .cmp(&b.speaker)
                .then(a.start_s.total_cmp(&b.start_s))
        });
        for w in entries.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.speaker == b.speaker && b.start_s < a.end_s {
                return Err(IngestError::OverlappingEntries {
                    speaker: a.speaker.clone(),
                    a_start: a.start_s,
                    a_end: a.end_s,
                    b_start: b.start_s,
                    b_end: b.end_s,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("manifest serializes")
    }
}

/// Parse and validate a JSON segment manifest.
pub fn parse_segment_manifest(text: &str) -> Result<SegmentManifest, IngestError> {
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(text).map_err(|e| IngestError::BadManifestJson(e.to_string()))?;
    SegmentManifest::from_entries(entries)
}

/// A half-open sample-index window into a [`ChannelSet`].
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    source: &'a ChannelSet,
    start: usize,
    end: usize,
}

impl<'a> Segment<'a> {
    pub fn source(&self) -> &'a ChannelSet {
        self.source
    }

    pub fn start_index(&self) -> usize {
        self.start
    }

    pub fn end_index(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.source.sample_rate_hz()
    }

    /// A view of this segment's rows; bit-identical to the source slice.
    pub fn samples(&self) -> ArrayView2<'a, f64> {
        self.source.samples.slice(s![self.start..self.end, ..])
    }
}

/// Slice a speaker's turns out of a recording, keeping only turns whose
/// duration is strictly greater than `min_duration_s`.
///
/// Timestamps convert to sample indices by round-to-nearest; the end index
/// is clamped to the recording length. An unknown speaker yields an empty
/// list, not an error.
pub fn extract_segments<'a>(
    cs: &'a ChannelSet,
    manifest: &SegmentManifest,
    speaker_id: &str,
    min_duration_s: f64,
) -> Vec<Segment<'a>> {
    let rate = cs.sample_rate_hz();
    let rows = cs.num_samples();
    let mut out = Vec::new();
    for e in manifest.entries().iter().filter(|e| e.speaker == speaker_id) {
        let start = ((e.start_s * rate).round() as usize).min(rows);
        let end = ((e.end_s * rate).round() as usize).min(rows);
        if end <= start {
            continue;
        }
        let seg = Segment {
            source: cs,
            start,
            end,
        };
        if seg.duration_s() > min_duration_s {
            out.push(seg);
        }
    }
    out
}
