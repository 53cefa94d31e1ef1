//! The Blink-Think-Link structured output grammar.
//!
//! A completion is three blocks, in order, with nothing but whitespace
//! outside them:
//!
//! ```text
//! <blink>
//! <element><id>1</id><bbox>[x0, y0, x1, y1]</bbox><caption>dynamic</caption></element>
//! </blink>
//! <think> reasoning process here </think>
//! <link> answer([{"Plan": ..., "Action": {"function": ..., ...}}]) </link>
//! ```
//!
//! The blink body is either the literal `None` or a sequence of `<element>`
//! records; the link body is an `answer([...])` wrapper around a JSON array
//! of plan/action steps. Tag names are case-sensitive; whitespace around
//! tags and between tokens is tolerated.

mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::ActionCall;
use crate::geometry::{BBox, GeometryError};
use crate::scalar::Scalar;

pub use parse::{
    check_content, check_content_with, check_template, parse_btl, parse_btl_with,
    validate_completion, validate_completion_with,
};

/// Default cap on the number of blink elements (`0 <= N <= 5`).
pub const DEFAULT_LAMBDA_MAX: usize = 5;

/// Violation of a structural invariant while building BTL values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("element id must be a positive integer")]
    NonPositiveId,
    #[error("duplicate element id {0}")]
    DuplicateId(u64),
    #[error("blink lists {found} elements, limit is {lambda_max}")]
    TooManyElements { found: usize, lambda_max: usize },
    #[error("think text must be non-empty")]
    EmptyThink,
    #[error("link must contain at least one step")]
    EmptyLink,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Parse failure with the first offending location, e.g. `blink.element[2].bbox`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("at {location}: {message}")]
pub struct ParseError {
    pub location: String,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            location: location.into(),
            message: message.into(),
        }
    }
}

/// Whether a blink element marks an interactive (`dynamic`) or
/// non-interactive (`static`) region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Caption {
    Dynamic,
    Static,
}

impl Caption {
    pub fn as_str(&self) -> &'static str {
        match self {
            Caption::Dynamic => "dynamic",
            Caption::Static => "static",
        }
    }

    pub fn from_str_exact(s: &str) -> Option<Self> {
        match s {
            "dynamic" => Some(Caption::Dynamic),
            "static" => Some(Caption::Static),
            _ => None,
        }
    }
}

impl fmt::Display for Caption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One `<element>` record of a blink block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlinkElement<T = f64> {
    id: u64,
    pub bbox: BBox<T>,
    pub caption: Caption,
}

impl<T: Scalar> BlinkElement<T> {
    pub fn new(id: u64, bbox: BBox<T>, caption: Caption) -> Result<Self, InvariantError> {
        if id == 0 {
            return Err(InvariantError::NonPositiveId);
        }
        Ok(Self { id, bbox, caption })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// `<element><id>…</id><bbox>[…]</bbox><caption>…</caption></element>`
    pub fn to_xml(&self) -> String {
        format!(
            "<element><id>{}</id><bbox>{}</bbox><caption>{}</caption></element>",
            self.id,
            self.bbox.to_bracket_string(),
            self.caption
        )
    }
}

/// Ordered blink elements; list order is priority order (first = highest).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlinkBlock<T = f64> {
    elements: Vec<BlinkElement<T>>,
}

impl<T: Scalar> BlinkBlock<T> {
    /// Validates id uniqueness and the element-count cap.
    pub fn try_new(
        elements: Vec<BlinkElement<T>>,
        lambda_max: usize,
    ) -> Result<Self, InvariantError> {
        if elements.len() > lambda_max {
            return Err(InvariantError::TooManyElements {
                found: elements.len(),
                lambda_max,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for el in &elements {
            if !seen.insert(el.id) {
                return Err(InvariantError::DuplicateId(el.id));
            }
        }
        Ok(Self { elements })
    }

    pub fn empty() -> Self {
        Self {
            elements: Vec::new(),
        }
    }

    pub fn elements(&self) -> &[BlinkElement<T>] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// The blink body text: `None` for an empty block.
    pub fn body_string(&self) -> String {
        serialize_blink(&self.elements).expect("validated at construction")
    }
}

/// One step of the link payload: a textual plan plus its executable action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct LinkStep<T = f64> {
    #[serde(rename = "Plan")]
    pub plan: String,
    #[serde(rename = "Action")]
    pub action: ActionCall<T>,
}

/// A fully parsed three-phase completion.
///
/// Equality ignores the original text: two outputs are equal when their
/// blink, think and link parts are equal.
#[derive(Debug, Clone)]
pub struct BtlOutput<T = f64> {
    pub blink: BlinkBlock<T>,
    pub think: String,
    pub link: Vec<LinkStep<T>>,
    raw: String,
}

impl<T: Scalar> PartialEq for BtlOutput<T> {
    fn eq(&self, other: &Self) -> bool {
        self.blink == other.blink && self.think == other.think && self.link == other.link
    }
}

impl<T: Scalar> BtlOutput<T> {
    /// Builds a value and stamps `raw` with its canonical serialization.
    pub fn try_new(
        blink: BlinkBlock<T>,
        think: impl Into<String>,
        link: Vec<LinkStep<T>>,
    ) -> Result<Self, InvariantError> {
        let think = think.into();
        if think.trim().is_empty() {
            return Err(InvariantError::EmptyThink);
        }
        if link.is_empty() {
            return Err(InvariantError::EmptyLink);
        }
        let mut out = Self {
            blink,
            think,
            link,
            raw: String::new(),
        };
        out.raw = out.render();
        Ok(out)
    }

    pub(crate) fn from_parsed(
        blink: BlinkBlock<T>,
        think: String,
        link: Vec<LinkStep<T>>,
        raw: String,
    ) -> Self {
        Self {
            blink,
            think,
            link,
            raw,
        }
    }

    /// The original completion text this value was parsed from (or the
    /// canonical serialization when constructed directly).
    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// First link step's action, the one that gets executed and scored.
    pub fn primary_action(&self) -> &ActionCall<T> {
        &self.link[0].action
    }

    /// Canonical template serialization; reparsing yields an equal value.
    pub fn render(&self) -> String {
        let payload = serde_json::to_string(&self.link).expect("link steps serialize");
        format!(
            "<blink>{}</blink>\n<think>{}</think>\n<link>answer({})</link>",
            self.blink.body_string(),
            self.think,
            payload
        )
    }
}

/// Serializes blink elements to their body text: the exact `<element>…`
/// concatenation in list order, or the literal `None` when empty.
pub fn serialize_blink<T: Scalar>(elements: &[BlinkElement<T>]) -> Result<String, InvariantError> {
    let mut seen = std::collections::BTreeSet::new();
    for el in elements {
        if !seen.insert(el.id) {
            return Err(InvariantError::DuplicateId(el.id));
        }
    }
    if elements.is_empty() {
        return Ok("None".to_string());
    }
    Ok(elements.iter().map(BlinkElement::to_xml).collect())
}

/// One problem found while validating a completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

/// Outcome of the dual format check; `template_ok && content_ok` holds
/// exactly when `issues` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub template_ok: bool,
    pub content_ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.template_ok && self.content_ok
    }
}
