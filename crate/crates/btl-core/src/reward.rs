//! The three-part rule-based reward: dual format + blink + link.
//!
//! `r_total = r_format + r_blink + r_link`, with the blink and link parts
//! gated on the format part: an unparseable completion earns nothing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::ActionCall;
use crate::format::{check_content_with, parse_btl_with, BtlOutput, DEFAULT_LAMBDA_MAX};
use crate::geometry::{BBox, Point, Size};
use crate::matching::hungarian_match;
use crate::scalar::Scalar;

/// Default IoU threshold for blink matching.
pub const DEFAULT_TAU: f64 = 0.5;
/// Default click tolerance as a fraction of screen width, used when a step
/// carries no target element box.
pub const DEFAULT_COORD_TOLERANCE: f64 = 0.14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("allocation rank {rank} out of range 1..={total}")]
    RankOutOfRange { rank: usize, total: usize },
}

/// Ground-truth ROI with its priority rank (1 = most relevant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RankedRoi<T = f64> {
    pub bbox: BBox<T>,
    pub rank: u32,
}

/// Everything needed to score one step: the instruction context, the
/// ground-truth action, the priority-ranked ROI annotations and screen size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
#[serde(try_from = "RawGroundTruthStep<T>")]
pub struct GroundTruthStep<T = f64> {
    pub instruction: String,
    #[serde(default)]
    pub history: Vec<String>,
    pub gt_action: ActionCall<T>,
    #[serde(default)]
    pub gt_rois: Vec<RankedRoi<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_element_bbox: Option<BBox<T>>,
    pub screen_size: Size<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct RawGroundTruthStep<T> {
    instruction: String,
    #[serde(default)]
    history: Vec<String>,
    gt_action: ActionCall<T>,
    #[serde(default)]
    gt_rois: Vec<RankedRoi<T>>,
    #[serde(default)]
    gt_element_bbox: Option<BBox<T>>,
    screen_size: Size<T>,
}

impl<T: Scalar> TryFrom<RawGroundTruthStep<T>> for GroundTruthStep<T> {
    type Error = String;

    fn try_from(raw: RawGroundTruthStep<T>) -> Result<Self, String> {
        let step = GroundTruthStep {
            instruction: raw.instruction,
            history: raw.history,
            gt_action: raw.gt_action,
            gt_rois: raw.gt_rois,
            gt_element_bbox: raw.gt_element_bbox,
            screen_size: raw.screen_size,
        };
        step.validate()?;
        Ok(step)
    }
}

impl<T: Scalar> GroundTruthStep<T> {
    /// Checks the step invariants: ranks form `1..=len` with no gaps and the
    /// target element box, when present, lies within the screen.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.screen_size.width > T::zero() && self.screen_size.height > T::zero()) {
            return Err("screen_size must be positive".to_string());
        }
        let mut ranks: Vec<u32> = self.gt_rois.iter().map(|r| r.rank).collect();
        ranks.sort_unstable();
        for (i, rank) in ranks.iter().enumerate() {
            if *rank as usize != i + 1 {
                return Err(format!(
                    "gt_rois ranks must be 1..={} with no gaps",
                    self.gt_rois.len()
                ));
            }
        }
        if let Some(bbox) = &self.gt_element_bbox {
            if !bbox.within_screen(self.screen_size) {
                return Err("gt_element_bbox lies outside the screen".to_string());
            }
        }
        Ok(())
    }
}

/// Per-completion reward components and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RewardBreakdown<T = f64> {
    pub r_format: T,
    pub r_blink: T,
    pub r_link: T,
    pub r_total: T,
}

impl<T: Scalar> RewardBreakdown<T> {
    pub fn new(r_format: T, r_blink: T, r_link: T) -> Self {
        Self {
            r_format,
            r_blink,
            r_link,
            r_total: r_format + r_blink + r_link,
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }
}

/// Scoring knobs; the defaults match the shipped configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig<T = f64> {
    /// IoU threshold for the blink matcher, in `(0, 1]`.
    pub tau: T,
    /// Click tolerance as a fraction of screen width, in `(0, 1)`.
    pub coord_tolerance: T,
    /// Maximum number of blink elements accepted by the format check.
    pub lambda_max: usize,
}

impl<T: Scalar> Default for RewardConfig<T> {
    fn default() -> Self {
        Self {
            tau: T::from_f64_lossy(DEFAULT_TAU),
            coord_tolerance: T::from_f64_lossy(DEFAULT_COORD_TOLERANCE),
            lambda_max: DEFAULT_LAMBDA_MAX,
        }
    }
}

/// Dual format reward: 1 iff the completion passes both the template and
/// content checks (default element cap).
pub fn reward_format(raw: &str) -> u8 {
    reward_format_with(raw, DEFAULT_LAMBDA_MAX)
}

/// [`reward_format`] with an explicit element cap.
pub fn reward_format_with(raw: &str, lambda_max: usize) -> u8 {
    u8::from(check_content_with(raw, lambda_max))
}

/// Reward allocation by priority: `(total - rank + 1) / total`, linear in
/// rank so the top priority earns 1.0.
pub fn allocation_s<T: Scalar>(rank: usize, total: usize) -> Result<T, DomainError> {
    if rank == 0 || total == 0 || rank > total {
        return Err(DomainError::RankOutOfRange { rank, total });
    }
    let num = T::from_usize(total - rank + 1).expect("count fits scalar");
    let den = T::from_usize(total).expect("count fits scalar");
    Ok(num / den)
}

/// Blink reward per the matching rules:
///
/// * no predictions and (no ground-truth ROIs or a non-interactive
///   ground-truth action) → 1;
/// * predictions and ground-truth ROIs both present → the best allocation
///   value among threshold-surviving matched ROIs, 0 if none survive;
/// * otherwise → 0.
///
/// `gt` must satisfy [`GroundTruthStep::validate`].
pub fn reward_blink<T: Scalar>(output: &BtlOutput<T>, gt: &GroundTruthStep<T>, tau: T) -> T {
    let preds: Vec<BBox<T>> = output.blink.elements().iter().map(|e| e.bbox).collect();
    if preds.is_empty() {
        return if gt.gt_rois.is_empty() || gt.gt_action.kind().is_non_interactive() {
            T::one()
        } else {
            T::zero()
        };
    }
    if gt.gt_rois.is_empty() {
        return T::zero();
    }
    let gt_boxes: Vec<BBox<T>> = gt.gt_rois.iter().map(|r| r.bbox).collect();
    let matching = hungarian_match(&preds, &gt_boxes, tau);
    matching
        .matched_gt_indices
        .iter()
        .map(|&y| {
            allocation_s::<T>(gt.gt_rois[y].rank as usize, gt.gt_rois.len())
                .expect("validated gt ranks")
        })
        .fold(T::zero(), T::max)
}

/// The coordinate-correctness predicate shared by the link reward and the
/// grounding metric: inside the target element box when one is annotated,
/// otherwise within `tol_frac * screen_width` of the ground-truth point.
pub fn coordinate_hit<T: Scalar>(point: Point<T>, gt: &GroundTruthStep<T>, tol_frac: T) -> bool {
    if let Some(bbox) = &gt.gt_element_bbox {
        return bbox.contains(point);
    }
    match gt.gt_action.position() {
        Some(target) => point.distance_to(target) <= tol_frac * gt.screen_size.width,
        None => false,
    }
}

/// Link reward: 1 iff the action type matches and the arguments are correct
/// (all-or-nothing, default click tolerance).
pub fn reward_link<T: Scalar>(pred: &ActionCall<T>, gt: &GroundTruthStep<T>) -> u8 {
    reward_link_with(pred, gt, T::from_f64_lossy(DEFAULT_COORD_TOLERANCE))
}

/// [`reward_link`] with an explicit click tolerance fraction.
pub fn reward_link_with<T: Scalar>(pred: &ActionCall<T>, gt: &GroundTruthStep<T>, tol_frac: T) -> u8 {
    if pred.kind() != gt.gt_action.kind() {
        return 0;
    }
    let ok = match (pred, &gt.gt_action) {
        (ActionCall::Back, ActionCall::Back) | (ActionCall::Home, ActionCall::Home) => true,
        (ActionCall::Swipe { direction: a }, ActionCall::Swipe { direction: b }) => a == b,
        (ActionCall::Type { text: a }, ActionCall::Type { text: b }) => a.trim() == b.trim(),
        (ActionCall::Tap { position }, ActionCall::Tap { .. })
        | (ActionCall::LongPress { position }, ActionCall::LongPress { .. }) => {
            coordinate_hit(*position, gt, tol_frac)
        }
        _ => false,
    };
    u8::from(ok)
}

/// Full BTL reward for one completion, with default configuration except
/// the matcher threshold.
pub fn reward_total<T: Scalar>(raw: &str, gt: &GroundTruthStep<T>, tau: T) -> RewardBreakdown<T> {
    let cfg = RewardConfig {
        tau,
        ..RewardConfig::default()
    };
    reward_total_with(raw, gt, &cfg)
}

/// Full BTL reward for one completion. A format failure gates everything:
/// the breakdown is all zeros.
pub fn reward_total_with<T: Scalar>(
    raw: &str,
    gt: &GroundTruthStep<T>,
    cfg: &RewardConfig<T>,
) -> RewardBreakdown<T> {
    let output = match parse_btl_with::<T>(raw, cfg.lambda_max) {
        Ok(out) => out,
        Err(_) => return RewardBreakdown::zero(),
    };
    let r_blink = reward_blink(&output, gt, cfg.tau);
    let r_link = T::from(reward_link_with(output.primary_action(), gt, cfg.coord_tolerance))
        .expect("0/1 fits scalar");
    RewardBreakdown::new(T::one(), r_blink, r_link)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Direction;
    use crate::format::{serialize_blink, BlinkBlock, BlinkElement, Caption, LinkStep};

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox<f64> {
        BBox::try_new(x0, y0, x1, y1).unwrap()
    }

    fn step(gt_action: ActionCall<f64>, rois: Vec<BBox<f64>>) -> GroundTruthStep<f64> {
        let gt_rois = rois
            .into_iter()
            .enumerate()
            .map(|(i, bbox)| RankedRoi {
                bbox,
                rank: (i + 1) as u32,
            })
            .collect();
        let s = GroundTruthStep {
            instruction: "do the thing".into(),
            history: vec![],
            gt_action,
            gt_rois,
            gt_element_bbox: None,
            screen_size: Size::new(1080.0, 2400.0),
        };
        s.validate().unwrap();
        s
    }

    fn output_with_boxes(boxes: &[BBox<f64>]) -> BtlOutput<f64> {
        let elements: Vec<_> = boxes
            .iter()
            .enumerate()
            .map(|(i, b)| BlinkElement::new((i + 1) as u64, *b, Caption::Dynamic).unwrap())
            .collect();
        BtlOutput::try_new(
            BlinkBlock::try_new(elements, DEFAULT_LAMBDA_MAX).unwrap(),
            "reasoning",
            vec![LinkStep {
                plan: "p".into(),
                action: ActionCall::Back,
            }],
        )
        .unwrap()
    }

    const VALID: &str = "<blink><element><id>1</id><bbox>[10, 20, 110, 60]</bbox><caption>dynamic</caption></element></blink><think>tap the app</think><link>answer([{\"Plan\": \"tap app\", \"Action\": {\"function\": \"Tap\", \"position\": [60, 40]}}])</link>";

    #[test]
    fn format_reward_examples() {
        assert_eq!(reward_format(VALID), 1);
        let bad_link = "<blink>None</blink><think>t</think><link>answer([{\"Plan\": \"x\", \"Action\": {\"function\": \"Tap\"}])</link>";
        assert_eq!(reward_format(bad_link), 0);
        assert_eq!(reward_format(""), 0);
    }

    #[test]
    fn allocation_examples_match_grid_enumeration() {
        assert_eq!(allocation_s::<f64>(1, 5).unwrap(), 1.0);
        assert_eq!(allocation_s::<f64>(5, 5).unwrap(), 0.2);
        assert_eq!(allocation_s::<f64>(2, 5).unwrap(), 0.8);
        // full grid against the closed form computed independently
        for total in 1..=8usize {
            for rank in 1..=total {
                let expected = (total - rank + 1) as f64 / total as f64;
                assert_eq!(allocation_s::<f64>(rank, total).unwrap(), expected);
            }
        }
        assert!(allocation_s::<f64>(0, 5).is_err());
        assert!(allocation_s::<f64>(6, 5).is_err());
        assert!(allocation_s::<f64>(1, 0).is_err());
    }

    #[test]
    fn blink_branch_no_preds_no_gt() {
        let out = output_with_boxes(&[]);
        let gt = step(ActionCall::Back, vec![]);
        assert_eq!(reward_blink(&out, &gt, 0.5), 1.0);
    }

    #[test]
    fn blink_branch_no_preds_non_interactive_action() {
        let out = output_with_boxes(&[]);
        let gt = step(
            ActionCall::Swipe {
                direction: Direction::Up,
            },
            vec![bb(0.0, 0.0, 10.0, 10.0)],
        );
        assert_eq!(reward_blink(&out, &gt, 0.5), 1.0);
    }

    #[test]
    fn blink_branch_no_preds_interactive_action_with_gt() {
        let out = output_with_boxes(&[]);
        let gt = step(
            ActionCall::Tap {
                position: Point::new(5.0, 5.0),
            },
            vec![bb(0.0, 0.0, 10.0, 10.0)],
        );
        assert_eq!(reward_blink(&out, &gt, 0.5), 0.0);
    }

    #[test]
    fn blink_branch_preds_but_no_gt() {
        let out = output_with_boxes(&[bb(0.0, 0.0, 10.0, 10.0)]);
        let gt = step(ActionCall::Back, vec![]);
        assert_eq!(reward_blink(&out, &gt, 0.5), 0.0);
    }

    #[test]
    fn blink_single_match_on_rank_two_of_five() {
        let rois: Vec<BBox<f64>> = (0..5)
            .map(|i| bb(100.0 * i as f64, 0.0, 100.0 * i as f64 + 50.0, 50.0))
            .collect();
        let gt = step(ActionCall::Back, rois.clone());
        let out = output_with_boxes(&[rois[1]]);
        assert_eq!(reward_blink(&out, &gt, 0.5), 0.8);
    }

    #[test]
    fn blink_no_pair_survives_threshold() {
        let gt = step(ActionCall::Back, vec![bb(0.0, 0.0, 10.0, 10.0)]);
        let out = output_with_boxes(&[bb(500.0, 500.0, 510.0, 510.0)]);
        assert_eq!(reward_blink(&out, &gt, 0.5), 0.0);
    }

    #[test]
    fn blink_depends_on_gt_priority_order() {
        let a = bb(0.0, 0.0, 50.0, 50.0);
        let b = bb(100.0, 0.0, 150.0, 50.0);
        let gt_ab = step(ActionCall::Back, vec![a, b]);
        let gt_ba = step(ActionCall::Back, vec![b, a]);
        let out = output_with_boxes(&[a]);
        assert_eq!(reward_blink(&out, &gt_ab, 0.5), 1.0);
        assert_eq!(reward_blink(&out, &gt_ba, 0.5), 0.5);
    }

    /// Assignment is total-IoU optimal, then threshold-filtered. Adding a
    /// prediction can re-route the assignment and lower the reward; this
    /// pins that semantics.
    #[test]
    fn blink_assignment_reroute_after_adding_prediction() {
        let a = bb(100.0, 0.0, 200.0, 100.0); // rank 1
        let b = bb(200.0, 0.0, 300.0, 100.0); // rank 2
        let gt = step(ActionCall::Back, vec![a, b]);

        // spans both targets: iou 0.5625 with A, 6/19 ~ 0.3158 with B
        let p1 = bb(110.0, 0.0, 260.0, 100.0);
        let out1 = output_with_boxes(&[p1]);
        assert_eq!(reward_blink(&out1, &gt, 0.31), 1.0);

        // p2 overlaps only A at 0.3, below the threshold; the optimal total
        // (0.3158 + 0.3 > 0.5625) re-routes p1 to B and the p2-A pair is
        // then filtered out, leaving only the rank-2 match
        let p2 = bb(100.0, 0.0, 200.0, 30.0);
        let out2 = output_with_boxes(&[p1, p2]);
        assert_eq!(reward_blink(&out2, &gt, 0.31), 0.5);
    }

    #[test]
    fn link_tap_inside_element_bbox() {
        let mut gt = step(
            ActionCall::Tap {
                position: Point::new(60.0, 40.0),
            },
            vec![],
        );
        gt.gt_element_bbox = Some(bb(10.0, 20.0, 110.0, 60.0));
        gt.validate().unwrap();
        let pred = ActionCall::Tap {
            position: Point::new(60.0, 40.0),
        };
        assert_eq!(reward_link(&pred, &gt), 1);
        let off = ActionCall::Tap {
            position: Point::new(500.0, 500.0),
        };
        assert_eq!(reward_link(&off, &gt), 0);
    }

    #[test]
    fn link_type_mismatch_scores_zero() {
        let gt = step(
            ActionCall::Swipe {
                direction: Direction::Up,
            },
            vec![],
        );
        let pred = ActionCall::Tap {
            position: Point::new(1.0, 1.0),
        };
        assert_eq!(reward_link(&pred, &gt), 0);
    }

    #[test]
    fn link_type_text_trims_surrounding_whitespace() {
        let gt = step(
            ActionCall::Type {
                text: "94.3 FM".into(),
            },
            vec![],
        );
        let pred = ActionCall::Type {
            text: " 94.3 FM ".into(),
        };
        assert_eq!(reward_link(&pred, &gt), 1);
        let wrong_case = ActionCall::Type {
            text: "94.3 fm".into(),
        };
        assert_eq!(reward_link(&wrong_case, &gt), 0);
    }

    #[test]
    fn link_tap_distance_fallback_uses_screen_width() {
        // no element bbox: within 0.14 * 1000 = 140 pixels of the gt point
        let mut gt = step(
            ActionCall::Tap {
                position: Point::new(500.0, 500.0),
            },
            vec![],
        );
        gt.screen_size = Size::new(1000.0, 2000.0);
        let near = ActionCall::Tap {
            position: Point::new(600.0, 500.0),
        };
        let boundary = ActionCall::Tap {
            position: Point::new(640.0, 500.0),
        };
        let far = ActionCall::Tap {
            position: Point::new(641.0, 500.0),
        };
        assert_eq!(reward_link(&near, &gt), 1);
        assert_eq!(reward_link(&boundary, &gt), 1);
        assert_eq!(reward_link(&far, &gt), 0);
    }

    #[test]
    fn link_swipe_and_back_semantics() {
        let gt = step(
            ActionCall::Swipe {
                direction: Direction::Left,
            },
            vec![],
        );
        assert_eq!(
            reward_link(
                &ActionCall::Swipe {
                    direction: Direction::Left
                },
                &gt
            ),
            1
        );
        assert_eq!(
            reward_link(
                &ActionCall::Swipe {
                    direction: Direction::Right
                },
                &gt
            ),
            0
        );
        let gt_back = step(ActionCall::Back, vec![]);
        assert_eq!(reward_link(&ActionCall::Back, &gt_back), 1);
    }

    #[test]
    fn total_composes_components() {
        // blink matches rank 2 of 5, link correct: 1 + 0.8 + 1 = 2.8
        let rois: Vec<BBox<f64>> = (0..5)
            .map(|i| bb(100.0 * i as f64, 200.0, 100.0 * i as f64 + 50.0, 260.0))
            .collect();
        let mut gt = step(
            ActionCall::Tap {
                position: Point::new(125.0, 230.0),
            },
            rois.clone(),
        );
        gt.gt_element_bbox = Some(rois[1]);
        gt.validate().unwrap();

        let el = BlinkElement::new(1, rois[1], Caption::Dynamic).unwrap();
        let raw = format!(
            "<blink>{}</blink><think>tap the second target</think><link>answer([{{\"Plan\": \"tap\", \"Action\": {{\"function\": \"Tap\", \"position\": [125, 230]}}}}])</link>",
            serialize_blink(&[el]).unwrap()
        );
        let breakdown = reward_total(&raw, &gt, 0.5);
        assert_eq!(breakdown.r_format, 1.0);
        assert_eq!(breakdown.r_blink, 0.8);
        assert_eq!(breakdown.r_link, 1.0);
        assert!((breakdown.r_total - 2.8).abs() < 1e-12);
        assert_eq!(
            breakdown.r_total,
            breakdown.r_format + breakdown.r_blink + breakdown.r_link
        );
    }

    #[test]
    fn total_gates_on_format() {
        let gt = step(ActionCall::Back, vec![]);
        let breakdown = reward_total("complete garbage", &gt, 0.5);
        assert_eq!(breakdown, RewardBreakdown::zero());
    }

    #[test]
    fn total_perfect_back_step() {
        let gt = step(ActionCall::Back, vec![]);
        let raw = "<blink>None</blink><think>go back</think><link>answer([{\"Plan\": \"back\", \"Action\": {\"function\": \"Back\"}}])</link>";
        let b = reward_total(raw, &gt, 0.5);
        assert_eq!((b.r_format, b.r_blink, b.r_link, b.r_total), (1.0, 1.0, 1.0, 3.0));
    }

    #[test]
    fn multiple_link_steps_score_only_the_first() {
        let gt = step(ActionCall::Back, vec![]);
        let raw = "<blink>None</blink><think>t</think><link>answer([{\"Plan\": \"a\", \"Action\": {\"function\": \"Home\"}}, {\"Plan\": \"b\", \"Action\": {\"function\": \"Back\"}}])</link>";
        let b = reward_total(raw, &gt, 0.5);
        assert_eq!(b.r_link, 0.0);
    }

    #[test]
    fn reward_pipeline_runs_in_single_precision() {
        let gt: GroundTruthStep<f32> = GroundTruthStep {
            instruction: "tap it".into(),
            history: vec![],
            gt_action: ActionCall::Tap {
                position: Point::new(60.0f32, 40.0),
            },
            gt_rois: vec![RankedRoi {
                bbox: BBox::try_new(10.0f32, 20.0, 110.0, 60.0).unwrap(),
                rank: 1,
            }],
            gt_element_bbox: Some(BBox::try_new(10.0f32, 20.0, 110.0, 60.0).unwrap()),
            screen_size: Size::new(1080.0f32, 2400.0),
        };
        let raw = "<blink><element><id>1</id><bbox>[10, 20, 110, 60]</bbox><caption>dynamic</caption></element></blink><think>tap</think><link>answer([{\"Plan\": \"tap\", \"Action\": {\"function\": \"Tap\", \"position\": [60, 40]}}])</link>";
        let b: RewardBreakdown<f32> = reward_total(raw, &gt, 0.5f32);
        assert_eq!((b.r_format, b.r_blink, b.r_link, b.r_total), (1.0, 1.0, 1.0, 3.0));
    }

    #[test]
    fn gt_step_validation_rules() {
        let mut s = step(ActionCall::Back, vec![bb(0.0, 0.0, 10.0, 10.0)]);
        s.gt_rois[0].rank = 2;
        assert!(s.validate().is_err());

        let json = r#"{
            "instruction": "i",
            "gt_action": {"function": "Back"},
            "gt_rois": [{"bbox": [0,0,10,10], "rank": 1}],
            "screen_size": [100, 200]
        }"#;
        let parsed: GroundTruthStep<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(parsed.gt_rois.len(), 1);

        let bad = r#"{
            "instruction": "i",
            "gt_action": {"function": "Back"},
            "gt_rois": [{"bbox": [0,0,10,10], "rank": 3}],
            "screen_size": [100, 200]
        }"#;
        assert!(serde_json::from_str::<GroundTruthStep<f64>>(bad).is_err());

        let outside = r#"{
            "instruction": "i",
            "gt_action": {"function": "Back"},
            "gt_element_bbox": [0, 0, 150, 50],
            "screen_size": [100, 200]
        }"#;
        assert!(serde_json::from_str::<GroundTruthStep<f64>>(outside).is_err());
    }
}
