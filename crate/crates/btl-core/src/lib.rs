//! Model-agnostic toolkit for the Blink-Think-Link GUI-agent contract:
//! parsing and validating the three-phase structured output, computing the
//! rule-based reward (dual format + blink + link), group-relative advantage
//! math, blink ROI annotation, and step-level evaluation metrics.
//!
//! All numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! public types default their scalar parameter to `f64`, so `BBox`,
//! `BtlOutput`, `RewardBreakdown` etc. name the double-precision variants.

pub mod action;
pub mod annotate;
pub mod client;
pub mod eval;
pub mod format;
pub mod geometry;
pub mod grpo;
pub mod matching;
pub mod records;
pub mod reward;
pub mod scalar;

pub use action::{ActionCall, ActionKind, Direction};
pub use annotate::{
    annotate_dataset, filter_rois, heuristic_rank, AnnotateOptions, AnnotateSummary,
    AnnotationRequest, AnnotationResult, HeuristicRanker, Provenance, RankError, RoiRanker,
    UiElement,
};
pub use client::{ModelClient, ModelEndpointConfig};
pub use eval::{
    evaluate, evaluate_steps, grounding_accuracy, metric_gr, metric_sr, metric_type, EvalError,
    EvalReport, StepPrediction,
};
pub use format::{
    check_content, check_template, parse_btl, serialize_blink, validate_completion, BlinkBlock,
    BlinkElement, BtlOutput, Caption, LinkStep, ParseError, ValidationReport, DEFAULT_LAMBDA_MAX,
};
pub use geometry::{iou, BBox, Point, Size};
pub use grpo::{
    group_advantages, grpo_objective, kl_estimate, CompletionStats, GrpoConfig, GrpoError,
    RewardGroup,
};
pub use matching::{hungarian_match, MatchedPair, Matching};
pub use records::{read_jsonl, GtRecord, PredictionRecord, StepId};
pub use reward::{
    allocation_s, reward_blink, reward_format, reward_link, reward_total, GroundTruthStep,
    RankedRoi, RewardBreakdown, RewardConfig,
};
pub use scalar::Scalar;
