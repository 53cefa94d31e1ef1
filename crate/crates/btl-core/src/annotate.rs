//! The blink data generation pipeline: rank pre-parsed UI elements by task
//! relevance and emit priority-ordered ROI annotations.
//!
//! Ranking is pluggable: an HTTP analysis-model client or the deterministic
//! offline heuristic. Stage one (screenshot -> element list) is consumed,
//! not performed; records arrive with their elements already extracted.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{serialize_blink, BlinkElement, Caption};
use crate::geometry::BBox;
use crate::scalar::Scalar;

/// A parsed UI element as produced by a screen-parsing stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct UiElement<T = f64> {
    pub id: i64,
    pub bbox: BBox<T>,
    pub elem_type: String,
    pub caption: String,
    pub interactivity: bool,
}

/// One annotation request: the element list plus its task context.
/// `screen_ref` is bookkeeping only and never sent to the model endpoint.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct AnnotationRequest<T = f64> {
    pub elements: Vec<UiElement<T>>,
    pub instruction: String,
    pub history: Vec<String>,
    pub lambda: usize,
    #[serde(skip)]
    pub screen_ref: Option<String>,
}

/// Which ranking path produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Model,
    Heuristic,
}

/// Priority-ordered ROI annotations for one screen; ids renumbered `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationResult<T = f64> {
    pub roi: Vec<BlinkElement<T>>,
    pub provenance: Provenance,
    pub raw_model_reply: Option<String>,
}

impl<T: Scalar> AnnotationResult<T> {
    /// The blink body text for this annotation (`None` when no ROI).
    pub fn blink_body(&self) -> String {
        serialize_blink(&self.roi).expect("renumbered ids are unique")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("model endpoint unavailable after {attempts} attempt(s): {reason}")]
    ModelUnavailable { attempts: u32, reason: String },
    #[error("invalid model reply: {0}")]
    InvalidReply(String),
    #[error("invalid annotation request: {0}")]
    InvalidRequest(String),
    #[error("endpoint configuration: {0}")]
    Config(String),
}

impl RankError {
    /// Whether switching to the offline heuristic is a sensible recovery.
    pub fn is_fallback_eligible(&self) -> bool {
        matches!(
            self,
            RankError::ModelUnavailable { .. } | RankError::InvalidReply(_) | RankError::Config(_)
        )
    }
}

/// Ranked element ids, most relevant first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankerOutcome {
    pub ranked_ids: Vec<i64>,
    pub raw_reply: Option<String>,
}

/// A stage-two ranker: orders the elements of a request by task relevance.
pub trait RoiRanker<T: Scalar>: Sync {
    fn rank(&self, req: &AnnotationRequest<T>) -> Result<RankerOutcome, RankError>;
    fn provenance(&self) -> Provenance;
}

fn tokens(s: &str) -> BTreeSet<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Deterministic offline relevance ranking: token overlap between the
/// element's caption plus type and the instruction
/// (`|intersection| / |instruction tokens|`), with a +0.1 bonus for
/// interactive elements. Sorted by score descending, then id ascending.
pub fn heuristic_rank<T: Scalar>(
    elements: &[UiElement<T>],
    instruction: &str,
) -> Vec<(i64, T)> {
    let instr = tokens(instruction);
    let mut scored: Vec<(i64, T)> = elements
        .iter()
        .map(|el| {
            let mut element_tokens = tokens(&el.caption);
            element_tokens.extend(tokens(&el.elem_type));
            let overlap = element_tokens.intersection(&instr).count();
            let base = if instr.is_empty() {
                T::zero()
            } else {
                T::from_usize(overlap).expect("count fits scalar")
                    / T::from_usize(instr.len()).expect("count fits scalar")
            };
            let bonus = if el.interactivity {
                T::from_f64_lossy(0.1)
            } else {
                T::zero()
            };
            (el.id, base + bonus)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then(a.0.cmp(&b.0))
    });
    scored
}

/// The offline ranking path: positive-score elements only.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicRanker;

impl<T: Scalar> RoiRanker<T> for HeuristicRanker {
    fn rank(&self, req: &AnnotationRequest<T>) -> Result<RankerOutcome, RankError> {
        let ranked_ids = heuristic_rank(&req.elements, &req.instruction)
            .into_iter()
            .filter(|(_, score)| *score > T::zero())
            .map(|(id, _)| id)
            .collect();
        Ok(RankerOutcome {
            ranked_ids,
            raw_reply: None,
        })
    }

    fn provenance(&self) -> Provenance {
        Provenance::Heuristic
    }
}

/// Runs a ranker and converts the top-`lambda` elements into blink
/// annotations, renumbering ids `1..=k` in priority order. Captions are
/// derived from interactivity: `dynamic` when interactive, else `static`.
pub fn filter_rois<T: Scalar>(
    req: &AnnotationRequest<T>,
    ranker: &dyn RoiRanker<T>,
) -> Result<AnnotationResult<T>, RankError> {
    let mut by_id = BTreeMap::new();
    for el in &req.elements {
        if by_id.insert(el.id, el).is_some() {
            return Err(RankError::InvalidRequest(format!(
                "duplicate element id {}",
                el.id
            )));
        }
    }
    let outcome = ranker.rank(req)?;
    let mut seen = BTreeSet::new();
    let mut roi = Vec::new();
    for id in outcome.ranked_ids {
        if roi.len() == req.lambda {
            break;
        }
        if !seen.insert(id) {
            return Err(RankError::InvalidReply(format!("id {id} ranked twice")));
        }
        let el = by_id
            .get(&id)
            .ok_or_else(|| RankError::InvalidReply(format!("unknown element id {id}")))?;
        let caption = if el.interactivity {
            Caption::Dynamic
        } else {
            Caption::Static
        };
        let element = BlinkElement::new((roi.len() + 1) as u64, el.bbox, caption)
            .expect("renumbered ids start at 1");
        roi.push(element);
    }
    Ok(AnnotationResult {
        roi,
        provenance: ranker.provenance(),
        raw_model_reply: outcome.raw_reply,
    })
}

/// Batch annotation knobs.
#[derive(Debug, Clone)]
pub struct AnnotateOptions {
    /// ROI cap per screen.
    pub lambda: usize,
    /// Bounded worker parallelism; output order always equals input order.
    pub concurrency: usize,
    /// Fall back to the heuristic when the model path fails.
    pub fallback: bool,
}

impl Default for AnnotateOptions {
    fn default() -> Self {
        Self {
            lambda: crate::format::DEFAULT_LAMBDA_MAX,
            concurrency: 4,
            fallback: true,
        }
    }
}

/// Batch outcome counts. `succeeded` counts written records and includes
/// the `fell_back` ones; `failed` records are skipped, never fatal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnnotateSummary {
    pub processed: usize,
    pub succeeded: usize,
    pub fell_back: usize,
    pub failed: usize,
}

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct AnnotateRecord<T> {
    #[serde(default)]
    screen_ref: Option<String>,
    instruction: String,
    #[serde(default)]
    history: Vec<String>,
    elements: Vec<UiElement<T>>,
}

enum LineOutcome {
    Written { line: String, fell_back: bool },
    Failed,
}

fn annotate_line<T: Scalar>(
    line: &str,
    primary: &dyn RoiRanker<T>,
    fallback: Option<&dyn RoiRanker<T>>,
    lambda: usize,
) -> LineOutcome {
    let mut value: serde_json::Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(_) => return LineOutcome::Failed,
    };
    let record: AnnotateRecord<T> = match serde_json::from_value(value.clone()) {
        Ok(r) => r,
        Err(_) => return LineOutcome::Failed,
    };
    let req = AnnotationRequest {
        elements: record.elements,
        instruction: record.instruction,
        history: record.history,
        lambda,
        screen_ref: record.screen_ref,
    };
    let (result, fell_back) = match filter_rois(&req, primary) {
        Ok(r) => (r, false),
        Err(e) if e.is_fallback_eligible() => match fallback {
            Some(fb) => match filter_rois(&req, fb) {
                Ok(r) => (r, true),
                Err(_) => return LineOutcome::Failed,
            },
            None => return LineOutcome::Failed,
        },
        Err(_) => return LineOutcome::Failed,
    };
    let obj = value.as_object_mut().expect("parsed from an object");
    obj.insert(
        "blink".to_string(),
        serde_json::Value::String(result.blink_body()),
    );
    obj.insert(
        "provenance".to_string(),
        serde_json::to_value(result.provenance).expect("provenance serializes"),
    );
    LineOutcome::Written {
        line: serde_json::to_string(&value).expect("record serializes"),
        fell_back,
    }
}

/// Annotates a line-delimited JSON dataset. Each input record gains a
/// `blink` field with the XML body and a `provenance` field; malformed or
/// unrankable records are counted as failed and skipped. Deterministic for
/// identical inputs under the heuristic ranker.
pub fn annotate_dataset<T: Scalar>(
    input: &Path,
    output: &Path,
    primary: &dyn RoiRanker<T>,
    fallback: Option<&dyn RoiRanker<T>>,
    opts: &AnnotateOptions,
) -> Result<AnnotateSummary, AnnotateError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| AnnotateError::Io {
            path: path.clone(),
            source,
        }
    };
    let reader = BufReader::new(File::open(input).map_err(io_err(input))?);
    let mut writer = BufWriter::new(File::create(output).map_err(io_err(output))?);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.concurrency.max(1))
        .build()
        .expect("worker pool");

    let mut summary = AnnotateSummary::default();
    let mut lines = reader.lines();
    loop {
        // bounded batches keep memory flat while preserving input order
        let mut batch = Vec::with_capacity(BATCH);
        for line in lines.by_ref() {
            batch.push(line.map_err(io_err(input))?);
            if batch.len() == BATCH {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let outcomes: Vec<LineOutcome> = pool.install(|| {
            batch
                .par_iter()
                .map(|line| annotate_line::<T>(line, primary, fallback, opts.lambda))
                .collect()
        });
        for outcome in outcomes {
            summary.processed += 1;
            match outcome {
                LineOutcome::Written { line, fell_back } => {
                    writeln!(writer, "{line}").map_err(io_err(output))?;
                    summary.succeeded += 1;
                    if fell_back {
                        summary.fell_back += 1;
                    }
                }
                LineOutcome::Failed => summary.failed += 1,
            }
        }
    }
    writer.flush().map_err(io_err(output))?;
    Ok(summary)
}

const BATCH: usize = 256;

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;

    fn el(id: i64, caption: &str, interactive: bool) -> UiElement<f64> {
        UiElement {
            id,
            bbox: BBox::try_new(10.0 * id as f64, 0.0, 10.0 * id as f64 + 8.0, 8.0).unwrap(),
            elem_type: "icon".into(),
            caption: caption.into(),
            interactivity: interactive,
        }
    }

    fn request(elements: Vec<UiElement<f64>>, instruction: &str, lambda: usize) -> AnnotationRequest<f64> {
        AnnotationRequest {
            elements,
            instruction: instruction.into(),
            history: vec![],
            lambda,
            screen_ref: None,
        }
    }

    #[test]
    fn heuristic_prefers_token_overlap() {
        let elements = vec![
            el(1, "Maps & Navigation", false),
            el(2, "Lyft", false),
            el(3, "Settings", false),
        ];
        let ranked = heuristic_rank(&elements, "open maps");
        assert_eq!(ranked[0].0, 1);
        assert_eq!(ranked[0].1, 0.5); // {maps} over {open, maps}
    }

    #[test]
    fn heuristic_empty_elements_empty_ranking() {
        assert!(heuristic_rank::<f64>(&[], "anything").is_empty());
    }

    #[test]
    fn heuristic_breaks_ties_by_ascending_id() {
        let elements = vec![el(7, "Camera", false), el(3, "Camera", false)];
        let ranked = heuristic_rank(&elements, "open the camera");
        assert_eq!(ranked[0].0, 3);
        assert_eq!(ranked[1].0, 7);
    }

    #[test]
    fn heuristic_empty_instruction_scores_zero_overlap() {
        let elements = vec![el(1, "Phone", true)];
        let ranked = heuristic_rank(&elements, "");
        assert!((ranked[0].1 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn filter_renumbers_and_maps_captions() {
        let elements = vec![el(9, "Maps & Navigation", true), el(4, "Status bar", false)];
        let req = request(elements, "open maps now", 5);
        let result = filter_rois(&req, &HeuristicRanker).unwrap();
        // the status bar has zero overlap and no bonus, so only one ROI
        assert_eq!(result.roi.len(), 1);
        assert_eq!(result.roi[0].id(), 1);
        assert_eq!(result.roi[0].caption, Caption::Dynamic);
        assert_eq!(result.provenance, Provenance::Heuristic);
    }

    #[test]
    fn filter_caps_at_lambda() {
        let elements: Vec<_> = (1..=4).map(|i| el(i, "maps maps", true)).collect();
        let req = request(elements, "maps", 2);
        let result = filter_rois(&req, &HeuristicRanker).unwrap();
        assert_eq!(result.roi.len(), 2);
        assert_eq!(result.roi[0].id(), 1);
        assert_eq!(result.roi[1].id(), 2);
    }

    #[test]
    fn filter_cannot_exceed_element_count() {
        let elements = vec![el(1, "maps", true), el(2, "maps", true), el(3, "maps", true)];
        let req = request(elements, "maps", 5);
        let result = filter_rois(&req, &HeuristicRanker).unwrap();
        assert_eq!(result.roi.len(), 3);
    }

    #[test]
    fn filter_all_zero_scores_yields_empty_roi_and_none_body() {
        let elements = vec![el(1, "Clock", false), el(2, "Battery", false)];
        let req = request(elements, "open maps", 5);
        let result = filter_rois(&req, &HeuristicRanker).unwrap();
        assert!(result.roi.is_empty());
        assert_eq!(result.blink_body(), "None");
    }

    #[test]
    fn filter_rejects_duplicate_element_ids() {
        let elements = vec![el(1, "a", false), el(1, "b", false)];
        let req = request(elements, "a", 5);
        assert!(matches!(
            filter_rois(&req, &HeuristicRanker),
            Err(RankError::InvalidRequest(_))
        ));
    }

    /// The two-stage pipeline's canonical scenario: a GPS/museum instruction
    /// must surface the "Maps & Navigation" app first.
    #[test]
    fn gps_museum_instruction_ranks_maps_app_first() {
        let elements = vec![
            el(3, "10:30", false),
            el(5, "Maps & Navigation", true),
            el(8, "Weather widget", false),
            el(11, "Phone", true),
        ];
        let instruction = "Use the GPS to locate a nearby museum and then book a ride with Lyft.";
        let ranked = heuristic_rank(&elements, instruction);
        assert_eq!(ranked[0].0, 5);

        let req = request(elements, instruction, 5);
        let result = filter_rois(&req, &HeuristicRanker).unwrap();
        assert_eq!(result.roi[0].id(), 1);
        assert_eq!(result.roi[0].caption, Caption::Dynamic);
        assert!(!result.roi.is_empty());
    }

    #[test]
    fn annotated_blink_validates_inside_full_template() {
        let elements = vec![el(9, "Maps & Navigation", true)];
        let req = request(elements, "open maps", 5);
        let result = filter_rois(&req, &HeuristicRanker).unwrap();
        let raw = format!(
            "<blink>{}</blink><think>t</think><link>answer([{{\"Plan\": \"x\", \"Action\": {{\"function\": \"Back\"}}}}])</link>",
            result.blink_body()
        );
        assert!(crate::format::check_content(&raw));
    }

    #[test]
    fn dataset_annotation_counts_and_isolation() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.jsonl");
        let output = dir.path().join("out.jsonl");
        let good = r#"{"screen_ref": "s0", "instruction": "open maps", "history": [], "elements": [{"id": 1, "bbox": [0, 0, 10, 10], "elem_type": "icon", "caption": "Maps", "interactivity": true}]}"#;
        std::fs::write(&input, format!("{good}\nnot json at all\n{good}\n")).unwrap();

        let summary = annotate_dataset::<f64>(
            &input,
            &output,
            &HeuristicRanker,
            None,
            &AnnotateOptions::default(),
        )
        .unwrap();
        assert_eq!(summary.processed, 3);
        assert_eq!(summary.succeeded, 2);
        assert_eq!(summary.fell_back, 0);
        assert_eq!(summary.failed, 1);

        let mut written = String::new();
        File::open(&output)
            .unwrap()
            .read_to_string(&mut written)
            .unwrap();
        assert_eq!(written.lines().count(), 2);
        for line in written.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["blink"].as_str().unwrap().contains("<element>"));
            assert_eq!(v["provenance"], "heuristic");
            assert_eq!(v["screen_ref"], "s0");
        }
    }

    #[test]
    fn dataset_annotation_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.jsonl");
        let lines: Vec<String> = (0..20)
            .map(|i| {
                format!(
                    r#"{{"instruction": "tap the save button", "elements": [{{"id": {}, "bbox": [0, 0, 10, 10], "elem_type": "button", "caption": "Save", "interactivity": true}}, {{"id": {}, "bbox": [20, 0, 30, 10], "elem_type": "text", "caption": "title", "interactivity": false}}]}}"#,
                    i + 1,
                    i + 100
                )
            })
            .collect();
        std::fs::write(&input, lines.join("\n")).unwrap();

        let out1 = dir.path().join("a.jsonl");
        let out2 = dir.path().join("b.jsonl");
        for (out, conc) in [(&out1, 1usize), (&out2, 8usize)] {
            let opts = AnnotateOptions {
                concurrency: conc,
                ..AnnotateOptions::default()
            };
            annotate_dataset::<f64>(&input, out, &HeuristicRanker, None, &opts).unwrap();
        }
        assert_eq!(
            std::fs::read(&out1).unwrap(),
            std::fs::read(&out2).unwrap()
        );
    }
}
