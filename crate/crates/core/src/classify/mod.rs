//! Binary classification of pooled eigenspectrum features.
//!
//! An RBF-kernel soft-margin SVM trained by sequential minimal optimization,
//! evaluated with leave-one-subject-out cross-validation. The positive class
//! is SZ, the negative class HC.

pub mod smo;

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectrum::FeatureInstance;
use crate::types::ClassLabel;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("need at least {needed} instances, got {got}")]
    TooFewInstances { needed: usize, got: usize },
    #[error("feature {index} has zero variance across instances")]
    DegenerateFeature { index: usize },
    #[error("instances disagree in feature dimension: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training data contains a single class only")]
    SingleClass,
    #[error("label {0} is not a binary classification target")]
    NonBinaryLabel(ClassLabel),
    #[error("fold for subject {subject:?}: training split contains a single class")]
    Fold { subject: String },
    #[error("need at least two subjects for leave-one-subject-out evaluation")]
    TooFewSubjects,
    #[error("predictions and labels have different lengths ({preds} vs {labels})")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid parameter: {0}")]
    BadParams(String),
    #[error("model file is not valid JSON: {0}")]
    BadModelJson(String),
}

/// Kernel width parameter: fixed, or derived from the data as
/// `1 / (num_features * mean feature variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gamma {
    #[serde(with = "auto_tag")]
    Auto,
    Fixed(f64),
}

mod auto_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let tag = String::deserialize(d)?;
        if tag == "auto" {
            Ok(())
        } else {
            Err(D::Error::custom("expected \"auto\""))
        }
    }
}

/// Soft-margin SVM hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: Gamma,
    pub kkt_tol: f64,
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: Gamma::Auto,
            kkt_tol: 1e-3,
            max_passes: 200,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(ClassifyError::BadParams(format!("c must be positive, got {}", self.c)));
        }
        if let Gamma::Fixed(g) = self.gamma {
            if !(g.is_finite() && g > 0.0) {
                return Err(ClassifyError::BadParams(format!("gamma must be positive, got {g}")));
            }
        }
        if !(self.kkt_tol.is_finite() && self.kkt_tol > 0.0) {
            return Err(ClassifyError::BadParams("kkt_tol must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(ClassifyError::BadParams("max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// Map a label to its training target. Only SZ/HC participate in
/// classification.
pub fn label_to_y(label: ClassLabel) -> Result<f64, ClassifyError> {
    match label {
        ClassLabel::Sz => Ok(1.0),
        ClassLabel::Hc => Ok(-1.0),
        other => Err(ClassifyError::NonBinaryLabel(other)),
    }
}

fn y_to_label(y: f64) -> ClassLabel {
    if y >= 0.0 {
        ClassLabel::Sz
    } else {
        ClassLabel::Hc
    }
}

/// Per-feature (mean, population std) pairs fit on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    /// Fit on instances: per-feature mean and population standard deviation.
    pub fn fit(instances: &[FeatureInstance]) -> Result<Self, ClassifyError> {
        let x = feature_matrix(instances)?;
        Self::fit_matrix(x.view())
    }

    pub fn fit_matrix(x: ArrayView2<'_, f64>) -> Result<Self, ClassifyError> {
        let n = x.nrows();
        if n < 2 {
            return Err(ClassifyError::TooFewInstances { needed: 2, got: n });
        }
        let mut means = Vec::with_capacity(x.ncols());
        let mut stds = Vec::with_capacity(x.ncols());
        for (index, col) in x.columns().into_iter().enumerate() {
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            if var == 0.0 {
                return Err(ClassifyError::DegenerateFeature { index });
            }
            means.push(mean);
            stds.push(var.sqrt());
        }
        Ok(Self { means, stds })
    }

    pub fn transform(&self, features: &[f64]) -> Result<Vec<f64>, ClassifyError> {
        if features.len() != self.means.len() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.means.len(),
                got: features.len(),
            });
        }
        Ok(features
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn transform_matrix(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>, ClassifyError> {
        if x.ncols() != self.means.len() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.means.len(),
                got: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.means.iter().copied().zip(self.stds.iter().copied()).collect()
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, ClassifyError> {
        if pairs.iter().any(|&(_, s)| !(s.is_finite() && s > 0.0)) {
            return Err(ClassifyError::BadParams("standardizer stds must be positive".into()));
        }
        Ok(Self {
            means: pairs.iter().map(|p| p.0).collect(),
            stds: pairs.iter().map(|p| p.1).collect(),
        })
    }
}

fn feature_matrix(instances: &[FeatureInstance]) -> Result<Array2<f64>, ClassifyError> {
    let first = instances.first().ok_or(ClassifyError::EmptyInput)?;
    let k = first.features.len();
    let mut data = Vec::with_capacity(instances.len() * k);
    for inst in instances {
        if inst.features.len() != k {
            return Err(ClassifyError::DimensionMismatch {
                expected: k,
                got: inst.features.len(),
            });
        }
        data.extend_from_slice(&inst.features);
    }
    Ok(Array2::from_shape_vec((instances.len(), k), data).expect("shape consistent"))
}

/// Resolve `Gamma::Auto` on a training matrix.
pub fn resolve_gamma(x: ArrayView2<'_, f64>, gamma: Gamma) -> Result<f64, ClassifyError> {
    match gamma {
        Gamma::Fixed(g) => Ok(g),
        Gamma::Auto => {
            let n = x.nrows() as f64;
            let k = x.ncols();
            let mut mean_var = 0.0;
            for col in x.columns() {
                let mean = col.sum() / n;
                mean_var += col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            }
            mean_var /= k as f64;
            if mean_var <= 0.0 {
                return Err(ClassifyError::BadParams(
                    "auto gamma undefined: zero mean feature variance".into(),
                ));
            }
            Ok(1.0 / (k as f64 * mean_var))
        }
    }
}

/// A trained RBF SVM together with the standardizer fit on its training
/// split. Decision inputs are raw (unstandardized) feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    support_vectors: Array2<f64>,
    dual_coefficients: Vec<f64>,
    bias: f64,
    gamma: f64,
    standardizer: Standardizer,
    params: SvmParams,
    converged: bool,
}

impl SvmModel {
    /// Standardize, resolve gamma, and run the SMO solver.
    pub fn train(instances: &[FeatureInstance], params: &SvmParams) -> Result<Self, ClassifyError> {
        let standardizer = Standardizer::fit(instances)?;
        Self::train_with_standardizer(instances, params, standardizer)
    }

    /// Train with a caller-provided standardizer instead of fitting one on
    /// `instances` (used to reproduce the leaky all-instances protocol).
    pub fn train_with_standardizer(
        instances: &[FeatureInstance],
        params: &SvmParams,
        standardizer: Standardizer,
    ) -> Result<Self, ClassifyError> {
        params.validate()?;
        if instances.len() < 2 {
            return Err(ClassifyError::TooFewInstances {
                needed: 2,
                got: instances.len(),
            });
        }
        let y: Vec<f64> = instances
            .iter()
            .map(|i| label_to_y(i.label))
            .collect::<Result<_, _>>()?;
        if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v < 0.0) {
            return Err(ClassifyError::SingleClass);
        }
        let raw = feature_matrix(instances)?;
        let x = standardizer.transform_matrix(raw.view())?;
        let gamma = resolve_gamma(x.view(), params.gamma)?;

        let sol = smo::solve(x.view(), &y, gamma, params.c, params.kkt_tol, params.max_passes);

        let mut sv_rows = Vec::new();
        let mut dual = Vec::new();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 1e-10 {
                sv_rows.push(i);
                dual.push(a * y[i]);
            }
        }
        let k = x.ncols();
        let mut sv = Array2::zeros((sv_rows.len(), k));
        for (r, &i) in sv_rows.iter().enumerate() {
            sv.row_mut(r).assign(&x.row(i));
        }
        Ok(Self {
            support_vectors: sv,
            dual_coefficients: dual,
            bias: sol.bias,
            gamma,
            standardizer,
            params: *params,
            converged: sol.converged,
        })
    }

    /// Signed decision value; positive means SZ.
    pub fn decision(&self, features: &[f64]) -> Result<f64, ClassifyError> {
        let z = self.standardizer.transform(features)?;
        let mut f = self.bias;
        for (row, coef) in self.support_vectors.rows().into_iter().zip(&self.dual_coefficients) {
            f += coef * smo::rbf_kernel(row.as_slice().expect("contiguous row"), &z, self.gamma);
        }
        Ok(f)
    }

    pub fn predict(&self, features: &[f64]) -> Result<ClassLabel, ClassifyError> {
        Ok(y_to_label(self.decision(features)?))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn num_support_vectors(&self) -> usize {
        self.support_vectors.nrows()
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            gamma: self.gamma,
            bias: self.bias,
            standardizer: self.standardizer.pairs().iter().map(|&(m, s)| vec![m, s]).collect(),
            support_vectors: self
                .support_vectors
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            dual_coefficients: self.dual_coefficients.clone(),
            params: self.params,
            convergence_flag: self.converged,
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| ClassifyError::BadModelJson(e.to_string()))?;
        let pairs: Vec<(f64, f64)> = file
            .standardizer
            .iter()
            .map(|p| {
                if p.len() == 2 {
                    Ok((p[0], p[1]))
                } else {
                    Err(ClassifyError::BadModelJson("standardizer entries must be [mean, std]".into()))
                }
            })
            .collect::<Result<_, _>>()?;
        let k = pairs.len();
        let mut sv = Array2::zeros((file.support_vectors.len(), k));
        for (r, row) in file.support_vectors.iter().enumerate() {
            if row.len() != k {
                return Err(ClassifyError::BadModelJson("support vector width mismatch".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                sv[[r, c]] = v;
            }
        }
        if file.dual_coefficients.len() != file.support_vectors.len() {
            return Err(ClassifyError::BadModelJson("coefficient count mismatch".into()));
        }
        Ok(Self {
            support_vectors: sv,
            dual_coefficients: file.dual_coefficients,
            bias: file.bias,
            gamma: file.gamma,
            standardizer: Standardizer::from_pairs(&pairs)?,
            params: file.params,
            converged: file.convergence_flag,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    gamma: f64,
    bias: f64,
    standardizer: Vec<Vec<f64>>,
    support_vectors: Vec<Vec<f64>>,
    dual_coefficients: Vec<f64>,
    params: SvmParams,
    convergence_flag: bool,
}

/// Accuracy plus per-class F1 over the observed label set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1_per_class: BTreeMap<ClassLabel, f64>,
}

/// Fraction correct and per-class F1 = 2PR/(P+R), with F1 = 0 where
/// precision + recall is 0.
pub fn metrics(predictions: &[ClassLabel], labels: &[ClassLabel]) -> Result<Metrics, ClassifyError> {
    if predictions.len() != labels.len() {
        return Err(ClassifyError::LengthMismatch {
            preds: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(ClassifyError::EmptyInput);
    }
    let correct = predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    let accuracy = correct as f64 / labels.len() as f64;

    let classes: BTreeSet<ClassLabel> = labels.iter().chain(predictions).copied().collect();
    let mut f1_per_class = BTreeMap::new();
    for class in classes {
        let tp = predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| **p == class && **l == class)
            .count() as f64;
        let fp = predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| **p == class && **l != class)
            .count() as f64;
        let fn_ = predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| **p != class && **l == class)
            .count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        f1_per_class.insert(class, f1);
    }
    Ok(Metrics { accuracy, f1_per_class })
}

/// One held-out prediction within a fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstancePrediction {
    pub segment_id: String,
    pub predicted: ClassLabel,
    pub actual: ClassLabel,
    pub score: f64,
}

/// One leave-one-subject-out fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub subject: String,
    pub accuracy: f64,
    pub converged: bool,
    pub predictions: Vec<InstancePrediction>,
}

/// Cross-validation outcome. `mean_accuracy` averages per-fold accuracies;
/// F1 comes from the confusion matrix pooled across folds (per-fold F1 is
/// ill-defined when a held-out subject has a single class).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    pub mean_accuracy: f64,
    pub f1_per_class: BTreeMap<ClassLabel, f64>,
}

impl CvReport {
    pub fn from_folds(folds: Vec<FoldReport>) -> Result<Self, ClassifyError> {
        if folds.is_empty() {
            return Err(ClassifyError::EmptyInput);
        }
        let mean_accuracy = folds.iter().map(|f| f.accuracy).sum::<f64>() / folds.len() as f64;
        let preds: Vec<ClassLabel> = folds
            .iter()
            .flat_map(|f| f.predictions.iter().map(|p| p.predicted))
            .collect();
        let actuals: Vec<ClassLabel> = folds
            .iter()
            .flat_map(|f| f.predictions.iter().map(|p| p.actual))
            .collect();
        let m = metrics(&preds, &actuals)?;
        Ok(Self {
            folds,
            mean_accuracy,
            f1_per_class: m.f1_per_class,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Where the standardizer statistics come from during cross-validation.
///
/// `PerFold` fits them on each fold's training split only (no information
/// from the held-out subject). `Global` fits them once on every instance
/// before splitting — the leaky variant, kept for protocol comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardizationMode {
    PerFold,
    Global,
}

/// Leave-one-subject-out cross-validation: one fold per distinct subject.
pub fn loso_cv(
    instances: &[FeatureInstance],
    params: &SvmParams,
    mode: StandardizationMode,
) -> Result<CvReport, ClassifyError> {
    Ok(loso_cv_detailed(instances, params, mode)?.0)
}

/// As [`loso_cv`], also returning each fold's trained model (keyed by the
/// held-out subject), so callers can verify that held-out data never leaks
/// into fold training.
pub fn loso_cv_detailed(
    instances: &[FeatureInstance],
    params: &SvmParams,
    mode: StandardizationMode,
) -> Result<(CvReport, Vec<(String, SvmModel)>), ClassifyError> {
    let subjects: BTreeSet<&str> = instances.iter().map(|i| i.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(ClassifyError::TooFewSubjects);
    }
    let global = match mode {
        StandardizationMode::Global => Some(Standardizer::fit(instances)?),
        StandardizationMode::PerFold => None,
    };

    let mut folds = Vec::with_capacity(subjects.len());
    let mut models = Vec::with_capacity(subjects.len());
    for subject in subjects {
        let (train, test): (Vec<&FeatureInstance>, Vec<&FeatureInstance>) =
            instances.iter().partition(|i| i.subject_id != subject);
        let train_owned: Vec<FeatureInstance> = train.into_iter().cloned().collect();
        let has_pos = train_owned.iter().any(|i| i.label == ClassLabel::Sz);
        let has_neg = train_owned.iter().any(|i| i.label == ClassLabel::Hc);
        if !(has_pos && has_neg) {
            return Err(ClassifyError::Fold {
                subject: subject.to_string(),
            });
        }
        let model = match &global {
            Some(std) => SvmModel::train_with_standardizer(&train_owned, params, std.clone())?,
            None => SvmModel::train(&train_owned, params)?,
        };
        let mut predictions = Vec::with_capacity(test.len());
        let mut correct = 0usize;
        for inst in &test {
            let score = model.decision(&inst.features)?;
            let predicted = y_to_label(score);
            if predicted == inst.label {
                correct += 1;
            }
            predictions.push(InstancePrediction {
                segment_id: inst.segment_id.clone(),
                predicted,
                actual: inst.label,
                score,
            });
        }
        folds.push(FoldReport {
            subject: subject.to_string(),
            accuracy: correct as f64 / test.len() as f64,
            converged: model.converged(),
            predictions,
        });
        models.push((subject.to_string(), model));
    }
    Ok((CvReport::from_folds(folds)?, models))
}
