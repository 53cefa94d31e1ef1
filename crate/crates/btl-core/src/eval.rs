//! Evaluation metrics: action-type accuracy (Type), click-point accuracy on
//! coordinate actions (GR), step success rate (SR) and grounding accuracy.
//!
//! SR reuses the link-reward predicate verbatim, so SR <= Type holds on
//! every dataset by construction.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{ActionCall, ActionKind};
use crate::format::{parse_btl_with, BtlOutput};
use crate::geometry::{BBox, Point};
use crate::records::{read_jsonl, GtRecord, PredictionRecord, RecordError, StepId};
use crate::reward::{coordinate_hit, reward_link_with, GroundTruthStep, RewardConfig};
use crate::scalar::Scalar;

/// A completion paired with its parse result; `parsed` is present exactly
/// when the dual format check passes.
#[derive(Debug, Clone)]
pub struct StepPrediction<T = f64> {
    pub raw_completion: String,
    pub parsed: Option<BtlOutput<T>>,
}

impl<T: Scalar> StepPrediction<T> {
    pub fn from_raw(raw: impl Into<String>, lambda_max: usize) -> Self {
        let raw = raw.into();
        let parsed = parse_btl_with(&raw, lambda_max).ok();
        Self {
            raw_completion: raw,
            parsed,
        }
    }

    pub fn action(&self) -> Option<&ActionCall<T>> {
        self.parsed.as_ref().map(BtlOutput::primary_action)
    }
}

/// Type metric: exact match of action types.
pub fn metric_type<T: Scalar>(pred: &ActionCall<T>, gt: &ActionCall<T>) -> u8 {
    u8::from(pred.kind() == gt.kind())
}

/// GR metric with the default click tolerance; `None` when the ground-truth
/// action is not a coordinate action (such steps leave the GR denominator).
pub fn metric_gr<T: Scalar>(pred: &ActionCall<T>, gt: &GroundTruthStep<T>) -> Option<u8> {
    metric_gr_with(pred, gt, RewardConfig::default().coord_tolerance)
}

/// [`metric_gr`] with an explicit tolerance fraction. The predicted click
/// point must satisfy the same coordinate predicate as the link reward; a
/// prediction without a position scores 0.
pub fn metric_gr_with<T: Scalar>(
    pred: &ActionCall<T>,
    gt: &GroundTruthStep<T>,
    tol_frac: T,
) -> Option<u8> {
    if !matches!(gt.gt_action.kind(), ActionKind::Tap | ActionKind::LongPress) {
        return None;
    }
    let hit = pred
        .position()
        .map(|p| coordinate_hit(p, gt, tol_frac))
        .unwrap_or(false);
    Some(u8::from(hit))
}

/// SR metric: identical predicate to the link reward.
pub fn metric_sr<T: Scalar>(pred: &ActionCall<T>, gt: &GroundTruthStep<T>) -> u8 {
    metric_sr_with(pred, gt, RewardConfig::default().coord_tolerance)
}

/// [`metric_sr`] with an explicit tolerance fraction.
pub fn metric_sr_with<T: Scalar>(pred: &ActionCall<T>, gt: &GroundTruthStep<T>, tol_frac: T) -> u8 {
    reward_link_with(pred, gt, tol_frac)
}

/// Grounding accuracy for one click: boundary-inclusive point-in-box.
pub fn grounding_accuracy<T: Scalar>(pred_point: Point<T>, gt_bbox: &BBox<T>) -> u8 {
    u8::from(gt_bbox.contains(pred_point))
}

/// Aggregated metrics. `gr_acc` is `None` when no step has a coordinate
/// ground-truth action; `grounding_acc` is `None` when no step carries a
/// target element box. `confusion` maps ground-truth action type to
/// predicted action type (or `unparsed`) counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_steps: usize,
    pub type_acc: f64,
    pub gr_acc: Option<f64>,
    pub sr_acc: f64,
    pub grounding_acc: Option<f64>,
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("join error: {0}")]
    Join(String),
    #[error("dataset is empty")]
    EmptyDataset,
}

#[derive(Default)]
struct Tally {
    n_steps: usize,
    type_correct: usize,
    sr_correct: usize,
    gr_total: usize,
    gr_correct: usize,
    grounding_total: usize,
    grounding_correct: usize,
    confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

impl Tally {
    fn add<T: Scalar>(&mut self, gt: &GroundTruthStep<T>, pred: &StepPrediction<T>, tol: T) {
        self.n_steps += 1;
        let action = pred.action();
        let pred_label = action
            .map(|a| a.kind().to_string())
            .unwrap_or_else(|| "unparsed".to_string());
        *self
            .confusion
            .entry(gt.gt_action.kind().to_string())
            .or_default()
            .entry(pred_label)
            .or_default() += 1;

        if let Some(action) = action {
            self.type_correct += metric_type(action, &gt.gt_action) as usize;
            self.sr_correct += metric_sr_with(action, gt, tol) as usize;
        }
        if matches!(gt.gt_action.kind(), ActionKind::Tap | ActionKind::LongPress) {
            self.gr_total += 1;
            if let Some(action) = action {
                self.gr_correct += metric_gr_with(action, gt, tol).unwrap_or(0) as usize;
            }
        }
        if let Some(bbox) = &gt.gt_element_bbox {
            self.grounding_total += 1;
            if let Some(point) = action.and_then(|a| a.position()) {
                self.grounding_correct += grounding_accuracy(point, bbox) as usize;
            }
        }
    }

    fn report(self) -> EvalReport {
        let ratio = |num: usize, den: usize| num as f64 / den as f64;
        EvalReport {
            n_steps: self.n_steps,
            type_acc: ratio(self.type_correct, self.n_steps),
            gr_acc: (self.gr_total > 0).then(|| ratio(self.gr_correct, self.gr_total)),
            sr_acc: ratio(self.sr_correct, self.n_steps),
            grounding_acc: (self.grounding_total > 0)
                .then(|| ratio(self.grounding_correct, self.grounding_total)),
            confusion: self.confusion,
        }
    }
}

/// Scores already-joined (ground truth, completion) pairs.
pub fn evaluate_steps<T: Scalar>(
    steps: &[(GroundTruthStep<T>, String)],
    cfg: &RewardConfig<T>,
) -> Result<EvalReport, EvalError> {
    if steps.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let mut tally = Tally::default();
    for (gt, completion) in steps {
        let pred = StepPrediction::from_raw(completion.clone(), cfg.lambda_max);
        tally.add(gt, &pred, cfg.coord_tolerance);
    }
    Ok(tally.report())
}

/// Loads a ground-truth dataset and a prediction file (both JSONL), joins
/// them by step id and aggregates the metrics. The two files must cover the
/// same id set.
pub fn evaluate<T: Scalar>(
    dataset_path: &Path,
    predictions_path: &Path,
    cfg: &RewardConfig<T>,
) -> Result<EvalReport, EvalError> {
    let gts: Vec<GtRecord<T>> = read_jsonl(dataset_path)?;
    let preds: Vec<PredictionRecord> = read_jsonl(predictions_path)?;
    if gts.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    if gts.len() != preds.len() {
        return Err(EvalError::Join(format!(
            "record counts differ: {} ground-truth steps vs {} predictions",
            gts.len(),
            preds.len()
        )));
    }
    let mut by_id: BTreeMap<StepId, GroundTruthStep<T>> = BTreeMap::new();
    for record in gts {
        if by_id.insert(record.id.clone(), record.step).is_some() {
            return Err(EvalError::Join(format!(
                "duplicate ground-truth id {}",
                record.id
            )));
        }
    }
    let mut joined = Vec::with_capacity(preds.len());
    let mut seen = std::collections::BTreeSet::new();
    for pred in preds {
        if !seen.insert(pred.id.clone()) {
            return Err(EvalError::Join(format!("duplicate prediction id {}", pred.id)));
        }
        let gt = by_id
            .get(&pred.id)
            .ok_or_else(|| EvalError::Join(format!("prediction id {} has no ground truth", pred.id)))?;
        joined.push((gt.clone(), pred.completion));
    }
    evaluate_steps(&joined, cfg)
}
