//! Stacking fusion of per-modality SVMs.
//!
//! Base models produce signed decision values; a logistic-regression
//! meta-model combines them into one fused score. Meta-features are
//! generated out-of-fold by an inner leave-one-subject-out pass, so no
//! instance's meta-feature ever comes from a base model that saw that
//! instance's subject.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    label_to_y, ClassifyError, CvReport, FoldReport, InstancePrediction, SvmModel, SvmParams,
};
use crate::spectrum::FeatureInstance;
use crate::types::{ClassLabel, Modality};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("stacking needs at least two modalities, got {0}")]
    TooFewModalities(usize),
    #[error("modality {modality} is missing instance keys: {missing:?}")]
    Alignment { modality: Modality, missing: Vec<String> },
    #[error("duplicate instance key {key:?} in modality {modality}")]
    DuplicateKey { modality: Modality, key: String },
    #[error("instance {key:?} has conflicting labels across modalities")]
    LabelConflict { key: String },
    #[error("prediction input is missing modality {0}")]
    MissingModality(Modality),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("stacking model file is not valid JSON: {0}")]
    BadModelJson(String),
}

fn key_of(inst: &FeatureInstance) -> String {
    format!("{}\u{1f}{}", inst.subject_id, inst.segment_id)
}

/// Check that every modality covers exactly the same (subject, segment)
/// keys with consistent labels, and return the sorted key list.
fn align(datasets: &BTreeMap<Modality, Vec<FeatureInstance>>) -> Result<Vec<String>, FusionError> {
    if datasets.len() < 2 {
        return Err(FusionError::TooFewModalities(datasets.len()));
    }
    let mut keysets: BTreeMap<Modality, BTreeSet<String>> = BTreeMap::new();
    let mut labels: BTreeMap<String, ClassLabel> = BTreeMap::new();
    for (&modality, instances) in datasets {
        let mut keys = BTreeSet::new();
        for inst in instances {
            let key = key_of(inst);
            if !keys.insert(key.clone()) {
                return Err(FusionError::DuplicateKey {
                    modality,
                    key: display_key(&key),
                });
            }
            match labels.get(&key) {
                Some(&l) if l != inst.label => {
                    return Err(FusionError::LabelConflict {
                        key: display_key(&key),
                    })
                }
                Some(_) => {}
                None => {
                    labels.insert(key, inst.label);
                }
            }
        }
        keysets.insert(modality, keys);
    }
    let union: BTreeSet<String> = keysets.values().flatten().cloned().collect();
    for (&modality, keys) in &keysets {
        let missing: Vec<String> = union.difference(keys).map(|k| display_key(k)).collect();
        if !missing.is_empty() {
            return Err(FusionError::Alignment { modality, missing });
        }
    }
    Ok(union.into_iter().collect())
}

fn display_key(key: &str) -> String {
    key.replace('\u{1f}', "/")
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Full-batch gradient descent on mean cross-entropy: learning rate 0.1,
/// up to 5000 iterations, stopping when the gradient norm drops below 1e-8.
fn logistic_fit(meta: &Array2<f64>, targets: &[f64]) -> (Vec<f64>, f64) {
    let n = meta.nrows();
    let k = meta.ncols();
    let mut w = vec![0.0f64; k];
    let mut intercept = 0.0f64;
    let lr = 0.1;
    for _ in 0..5000 {
        let mut gw = vec![0.0f64; k];
        let mut gb = 0.0f64;
        for (row, &t) in meta.rows().into_iter().zip(targets) {
            let z: f64 = row.iter().zip(&w).map(|(x, wi)| x * wi).sum::<f64>() + intercept;
            let err = sigmoid(z) - t;
            for (g, x) in gw.iter_mut().zip(row) {
                *g += err * x;
            }
            gb += err;
        }
        let scale = 1.0 / n as f64;
        for g in gw.iter_mut() {
            *g *= scale;
        }
        gb *= scale;
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm < 1e-8 {
            break;
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= lr * g;
        }
        intercept -= lr * gb;
    }
    (w, intercept)
}

/// Two-level fused classifier: per-modality SVMs plus a logistic meta-model
/// over their decision values (modalities in sorted order).
#[derive(Debug, Clone, PartialEq)]
pub struct StackingModel {
    base_models: BTreeMap<Modality, SvmModel>,
    meta_weights: Vec<f64>,
    meta_intercept: f64,
}

impl StackingModel {
    /// Assemble from parts. Weight order must match the sorted modality
    /// order of `base_models`.
    pub fn from_parts(
        base_models: BTreeMap<Modality, SvmModel>,
        meta_weights: Vec<f64>,
        meta_intercept: f64,
    ) -> Result<Self, FusionError> {
        if base_models.len() < 2 {
            return Err(FusionError::TooFewModalities(base_models.len()));
        }
        if meta_weights.len() != base_models.len() || !meta_weights.iter().all(|w| w.is_finite()) {
            return Err(FusionError::BadModelJson(
                "meta weights must be finite, one per modality".into(),
            ));
        }
        Ok(Self {
            base_models,
            meta_weights,
            meta_intercept,
        })
    }

    /// Train base models and the stacking meta-model.
    ///
    /// Meta-features are out-of-fold decision values from an inner
    /// leave-one-subject-out pass over the training subjects; the final base
    /// models are then refit on all training data.
    pub fn train(
        datasets: &BTreeMap<Modality, Vec<FeatureInstance>>,
        params: &BTreeMap<Modality, SvmParams>,
    ) -> Result<Self, FusionError> {
        let keys = align(datasets)?;
        let modalities: Vec<Modality> = datasets.keys().copied().collect();
        for m in &modalities {
            if !params.contains_key(m) {
                return Err(FusionError::MissingModality(*m));
            }
        }

        // per modality: key -> instance
        let by_key: BTreeMap<Modality, BTreeMap<String, &FeatureInstance>> = datasets
            .iter()
            .map(|(&m, instances)| (m, instances.iter().map(|i| (key_of(i), i)).collect()))
            .collect();

        let subjects: BTreeSet<String> = datasets[&modalities[0]]
            .iter()
            .map(|i| i.subject_id.clone())
            .collect();

        let mut meta = Array2::zeros((keys.len(), modalities.len()));
        let mut targets = vec![0.0f64; keys.len()];
        let key_index: BTreeMap<&String, usize> =
            keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
        for key in &keys {
            let inst = by_key[&modalities[0]][key];
            targets[key_index[key]] = if label_to_y(inst.label)? > 0.0 { 1.0 } else { 0.0 };
        }

        for held_out in &subjects {
            for (col, &modality) in modalities.iter().enumerate() {
                let train: Vec<FeatureInstance> = datasets[&modality]
                    .iter()
                    .filter(|i| &i.subject_id != held_out)
                    .cloned()
                    .collect();
                let has_pos = train.iter().any(|i| i.label == ClassLabel::Sz);
                let has_neg = train.iter().any(|i| i.label == ClassLabel::Hc);
                if !(has_pos && has_neg) {
                    return Err(ClassifyError::Fold {
                        subject: held_out.clone(),
                    }
                    .into());
                }
                let model = SvmModel::train(&train, &params[&modality])?;
                for inst in datasets[&modality].iter().filter(|i| &i.subject_id == held_out) {
                    let row = key_index[&key_of(inst)];
                    meta[[row, col]] = model.decision(&inst.features)?;
                }
            }
        }

        let (meta_weights, meta_intercept) = logistic_fit(&meta, &targets);

        let mut base_models = BTreeMap::new();
        for &modality in &modalities {
            base_models.insert(modality, SvmModel::train(&datasets[&modality], &params[&modality])?);
        }
        Ok(Self {
            base_models,
            meta_weights,
            meta_intercept,
        })
    }

    pub fn modalities(&self) -> Vec<Modality> {
        self.base_models.keys().copied().collect()
    }

    pub fn base_model(&self, modality: Modality) -> Option<&SvmModel> {
        self.base_models.get(&modality)
    }

    pub fn meta_weights(&self) -> (&[f64], f64) {
        (&self.meta_weights, self.meta_intercept)
    }

    /// Base decision values in sorted modality order.
    pub fn base_decisions(
        &self,
        features: &BTreeMap<Modality, Vec<f64>>,
    ) -> Result<Vec<f64>, FusionError> {
        let mut out = Vec::with_capacity(self.base_models.len());
        for (&modality, model) in &self.base_models {
            let f = features
                .get(&modality)
                .ok_or(FusionError::MissingModality(modality))?;
            out.push(model.decision(f)?);
        }
        Ok(out)
    }

    /// Fused score in [0, 1] and the label (SZ at score >= 0.5).
    pub fn predict(
        &self,
        features: &BTreeMap<Modality, Vec<f64>>,
    ) -> Result<(ClassLabel, f64), FusionError> {
        let decisions = self.base_decisions(features)?;
        let score = self.score_from_decisions(&decisions);
        let label = if score >= 0.5 { ClassLabel::Sz } else { ClassLabel::Hc };
        Ok((label, score))
    }

    pub fn score_from_decisions(&self, decisions: &[f64]) -> f64 {
        let z: f64 = decisions
            .iter()
            .zip(&self.meta_weights)
            .map(|(d, w)| d * w)
            .sum::<f64>()
            + self.meta_intercept;
        sigmoid(z)
    }

    pub fn to_json(&self) -> String {
        let file = StackingFile {
            base_models: self
                .base_models
                .iter()
                .map(|(m, model)| {
                    (
                        m.as_str().to_string(),
                        serde_json::from_str(&model.to_json()).expect("model JSON value"),
                    )
                })
                .collect(),
            meta: MetaFile {
                weights: self.meta_weights.clone(),
                intercept: self.meta_intercept,
            },
        };
        serde_json::to_string_pretty(&file).expect("stacking model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FusionError> {
        let file: StackingFile =
            serde_json::from_str(text).map_err(|e| FusionError::BadModelJson(e.to_string()))?;
        let mut base_models = BTreeMap::new();
        for (name, value) in file.base_models {
            let modality: Modality = name
                .parse()
                .map_err(|e| FusionError::BadModelJson(format!("{e}")))?;
            let model = SvmModel::from_json(&value.to_string())?;
            base_models.insert(modality, model);
        }
        Self::from_parts(base_models, file.meta.weights, file.meta.intercept)
    }
}

#[derive(Serialize, Deserialize)]
struct StackingFile {
    base_models: BTreeMap<String, serde_json::Value>,
    meta: MetaFile,
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    weights: Vec<f64>,
    intercept: f64,
}

/// Outer leave-one-subject-out evaluation of the fused model. Each fold's
/// stacking model trains on the remaining subjects only (its inner pass
/// therefore never sees the held-out subject).
pub fn fused_loso_cv(
    datasets: &BTreeMap<Modality, Vec<FeatureInstance>>,
    params: &BTreeMap<Modality, SvmParams>,
) -> Result<CvReport, FusionError> {
    align(datasets)?;
    let modalities: Vec<Modality> = datasets.keys().copied().collect();
    let subjects: BTreeSet<String> = datasets[&modalities[0]]
        .iter()
        .map(|i| i.subject_id.clone())
        .collect();
    if subjects.len() < 2 {
        return Err(ClassifyError::TooFewSubjects.into());
    }

    let mut folds = Vec::with_capacity(subjects.len());
    for held_out in &subjects {
        let train: BTreeMap<Modality, Vec<FeatureInstance>> = datasets
            .iter()
            .map(|(&m, instances)| {
                (
                    m,
                    instances
                        .iter()
                        .filter(|i| &i.subject_id != held_out)
                        .cloned()
                        .collect(),
                )
            })
            .collect();
        let model = StackingModel::train(&train, params)?;

        // held-out instances, keyed by segment for cross-modality lookup
        let primary: Vec<&FeatureInstance> = datasets[&modalities[0]]
            .iter()
            .filter(|i| &i.subject_id == held_out)
            .collect();
        let mut predictions = Vec::with_capacity(primary.len());
        let mut correct = 0usize;
        for inst in primary {
            let mut features = BTreeMap::new();
            for &m in &modalities {
                let peer = datasets[&m]
                    .iter()
                    .find(|i| i.subject_id == inst.subject_id && i.segment_id == inst.segment_id)
                    .expect("aligned datasets share keys");
                features.insert(m, peer.features.clone());
            }
            let (predicted, score) = model.predict(&features)?;
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
        let count = predictions.len();
        folds.push(FoldReport {
            subject: held_out.clone(),
            accuracy: correct as f64 / count as f64,
            converged: model.base_models.values().all(|m| m.converged()),
            predictions,
        });
    }
    Ok(CvReport::from_folds(folds)?)
}
