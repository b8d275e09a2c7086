//! Labels and modality tags shared across the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Signal modality of a multichannel recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    /// Vocal-tract variable trajectories.
    #[serde(rename = "TV")]
    Tv,
    /// Facial action unit intensities.
    #[serde(rename = "FAU")]
    Fau,
    /// Anything else (synthetic data, custom sensors).
    #[serde(rename = "OTHER")]
    Other,
}

impl Modality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Modality::Tv => "TV",
            Modality::Fau => "FAU",
            Modality::Other => "OTHER",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = ParseTagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TV" => Ok(Modality::Tv),
            "FAU" => Ok(Modality::Fau),
            "OTHER" => Ok(Modality::Other),
            _ => Err(ParseTagError {
                kind: "modality",
                token: s.to_string(),
            }),
        }
    }
}

/// Subject class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    /// Schizophrenia.
    #[serde(rename = "SZ")]
    Sz,
    /// Healthy control.
    #[serde(rename = "HC")]
    Hc,
    /// Major depressive disorder (plot groups only; not a classification target).
    #[serde(rename = "MDD")]
    Mdd,
}

impl ClassLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassLabel::Sz => "SZ",
            ClassLabel::Hc => "HC",
            ClassLabel::Mdd => "MDD",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = ParseTagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SZ" => Ok(ClassLabel::Sz),
            "HC" => Ok(ClassLabel::Hc),
            "MDD" => Ok(ClassLabel::Mdd),
            _ => Err(ParseTagError {
                kind: "class label",
                token: s.to_string(),
            }),
        }
    }
}

/// Failure to parse a modality or class-label token.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} {token:?}")]
pub struct ParseTagError {
    kind: &'static str,
    token: String,
}
