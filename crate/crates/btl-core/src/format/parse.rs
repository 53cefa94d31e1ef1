//! Template splitting, body parsing and validation for BTL completions.

use crate::geometry::BBox;
use crate::scalar::Scalar;

use super::{
    BlinkBlock, BlinkElement, BtlOutput, Caption, Issue, LinkStep, ParseError, ValidationReport,
    DEFAULT_LAMBDA_MAX,
};

const TAGS: [(&str, &str, &str); 3] = [
    ("blink", "<blink>", "</blink>"),
    ("think", "<think>", "</think>"),
    ("link", "<link>", "</link>"),
];

struct Blocks<'a> {
    blink: &'a str,
    think: &'a str,
    link: &'a str,
}

/// Splits a completion into its three block bodies, or reports every
/// template-level problem found.
fn split_blocks(raw: &str) -> Result<Blocks<'_>, Vec<Issue>> {
    let mut issues = Vec::new();
    let mut spans = [(0usize, 0usize); 6];
    for (i, (name, open, close)) in TAGS.iter().enumerate() {
        for (slot, tag) in [(2 * i, open), (2 * i + 1, close)] {
            let found: Vec<usize> = raw.match_indices(tag).map(|(p, _)| p).collect();
            if found.len() != 1 {
                issues.push(Issue {
                    location: (*name).to_string(),
                    message: format!("expected exactly one {tag} tag, found {}", found.len()),
                });
            } else {
                spans[slot] = (found[0], found[0] + tag.len());
            }
        }
    }
    if !issues.is_empty() {
        return Err(issues);
    }

    let ordered = spans.windows(2).all(|w| w[0].1 <= w[1].0);
    if !ordered {
        issues.push(Issue {
            location: "template".to_string(),
            message: "blocks must appear as <blink>…</blink><think>…</think><link>…</link>"
                .to_string(),
        });
        return Err(issues);
    }

    let outside = [
        &raw[..spans[0].0],
        &raw[spans[1].1..spans[2].0],
        &raw[spans[3].1..spans[4].0],
        &raw[spans[5].1..],
    ];
    if outside.iter().any(|s| !s.trim().is_empty()) {
        issues.push(Issue {
            location: "template".to_string(),
            message: "only whitespace is allowed outside the three blocks".to_string(),
        });
        return Err(issues);
    }

    Ok(Blocks {
        blink: &raw[spans[0].1..spans[1].0],
        think: &raw[spans[2].1..spans[3].0],
        link: &raw[spans[4].1..spans[5].0],
    })
}

/// True iff the completion has exactly one blink, think and link block, in
/// that order, with only whitespace outside them.
pub fn check_template(raw: &str) -> bool {
    split_blocks(raw).is_ok()
}

/// True iff the template holds *and* the blink body is `None` or well-formed
/// `<element>` records and the link body is a valid `answer([...])` payload.
/// Uses the default element cap of [`DEFAULT_LAMBDA_MAX`].
pub fn check_content(raw: &str) -> bool {
    check_content_with(raw, DEFAULT_LAMBDA_MAX)
}

/// [`check_content`] with an explicit element cap.
pub fn check_content_with(raw: &str, lambda_max: usize) -> bool {
    parse_btl_with::<f64>(raw, lambda_max).is_ok()
}

/// Parses a completion with the default element cap.
pub fn parse_btl<T: Scalar>(raw: &str) -> Result<BtlOutput<T>, ParseError> {
    parse_btl_with(raw, DEFAULT_LAMBDA_MAX)
}

/// Parses a completion into a [`BtlOutput`], reporting the first offending
/// location on failure.
pub fn parse_btl_with<T: Scalar>(raw: &str, lambda_max: usize) -> Result<BtlOutput<T>, ParseError> {
    let blocks = split_blocks(raw).map_err(|issues| {
        let first = &issues[0];
        ParseError::new(first.location.clone(), first.message.clone())
    })?;
    let elements = parse_blink_body(blocks.blink)?;
    let blink = BlinkBlock::try_new(elements, lambda_max)
        .map_err(|e| ParseError::new("blink", e.to_string()))?;
    if blocks.think.trim().is_empty() {
        return Err(ParseError::new("think", "think text must be non-empty"));
    }
    let link = parse_link_body(blocks.link)?;
    Ok(BtlOutput::from_parsed(
        blink,
        blocks.think.to_string(),
        link,
        raw.to_string(),
    ))
}

/// Collects every format and content problem in one pass. The returned
/// report satisfies `template_ok && content_ok <=> issues.is_empty()`.
pub fn validate_completion(raw: &str) -> ValidationReport {
    validate_completion_with(raw, DEFAULT_LAMBDA_MAX)
}

/// [`validate_completion`] with an explicit element cap.
pub fn validate_completion_with(raw: &str, lambda_max: usize) -> ValidationReport {
    let blocks = match split_blocks(raw) {
        Ok(b) => b,
        Err(issues) => {
            return ValidationReport {
                template_ok: false,
                content_ok: false,
                issues,
            }
        }
    };
    let mut issues = Vec::new();
    match parse_blink_body::<f64>(blocks.blink) {
        Ok(elements) => {
            if let Err(e) = BlinkBlock::try_new(elements, lambda_max) {
                issues.push(Issue {
                    location: "blink".to_string(),
                    message: e.to_string(),
                });
            }
        }
        Err(e) => issues.push(Issue {
            location: e.location,
            message: e.message,
        }),
    }
    if blocks.think.trim().is_empty() {
        issues.push(Issue {
            location: "think".to_string(),
            message: "think text must be non-empty".to_string(),
        });
    }
    if let Err(e) = parse_link_body::<f64>(blocks.link) {
        issues.push(Issue {
            location: e.location,
            message: e.message,
        });
    }
    ValidationReport {
        template_ok: true,
        content_ok: issues.is_empty(),
        issues,
    }
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
    }

    fn done(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    /// Consumes up to and including `token`, returning the text before it.
    fn take_until(&mut self, token: &str) -> Option<&'a str> {
        let rest = self.rest();
        let at = rest.find(token)?;
        let taken = &rest[..at];
        self.pos += at + token.len();
        Some(taken)
    }

    fn take_digits(&mut self) -> &'a str {
        let rest = self.rest();
        let end = rest
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    /// A number in integer or decimal notation: `digits` or `digits.digits`.
    fn take_number(&mut self) -> Option<&'a str> {
        let start = self.pos;
        let int_part = self.take_digits();
        if int_part.is_empty() {
            return None;
        }
        if self.rest().starts_with('.') {
            self.pos += 1;
            if self.take_digits().is_empty() {
                self.pos = start;
                return None;
            }
        }
        Some(&self.src[start..self.pos])
    }
}

/// Parses a blink body: the literal `None` or a sequence of `<element>`
/// records. Count and id-uniqueness are checked by the caller via
/// [`BlinkBlock::try_new`].
fn parse_blink_body<T: Scalar>(body: &str) -> Result<Vec<BlinkElement<T>>, ParseError> {
    if body.trim() == "None" {
        return Ok(Vec::new());
    }
    let mut sc = Scanner::new(body);
    let mut elements = Vec::new();
    loop {
        sc.skip_ws();
        if sc.done() {
            break;
        }
        let loc = format!("blink.element[{}]", elements.len());
        if !sc.eat("<element>") {
            return Err(ParseError::new(
                loc,
                "expected <element> record or the literal None",
            ));
        }
        let inner = sc
            .take_until("</element>")
            .ok_or_else(|| ParseError::new(loc.clone(), "unterminated <element> record"))?;
        elements.push(parse_element(inner, &loc)?);
    }
    Ok(elements)
}

fn parse_element<T: Scalar>(inner: &str, loc: &str) -> Result<BlinkElement<T>, ParseError> {
    let mut sc = Scanner::new(inner);
    let expect = |sc: &mut Scanner, token: &str, at: &str| {
        sc.skip_ws();
        if sc.eat(token) {
            Ok(())
        } else {
            Err(ParseError::new(at, format!("expected {token}")))
        }
    };

    let id_loc = format!("{loc}.id");
    expect(&mut sc, "<id>", &id_loc)?;
    sc.skip_ws();
    let digits = sc.take_digits();
    if digits.is_empty() {
        return Err(ParseError::new(&id_loc, "id must be a positive integer"));
    }
    let id: u64 = digits
        .parse()
        .map_err(|_| ParseError::new(&id_loc, "id out of range"))?;
    expect(&mut sc, "</id>", &id_loc)?;

    let bbox_loc = format!("{loc}.bbox");
    expect(&mut sc, "<bbox>", &bbox_loc)?;
    expect(&mut sc, "[", &bbox_loc)?;
    let mut coords = [0.0f64; 4];
    for (k, coord) in coords.iter_mut().enumerate() {
        sc.skip_ws();
        let num = sc.take_number().ok_or_else(|| {
            ParseError::new(&bbox_loc, "coordinates must be non-negative reals")
        })?;
        *coord = num
            .parse()
            .map_err(|_| ParseError::new(&bbox_loc, "unreadable coordinate"))?;
        if k < 3 {
            expect(&mut sc, ",", &bbox_loc)?;
        }
    }
    expect(&mut sc, "]", &bbox_loc)?;
    expect(&mut sc, "</bbox>", &bbox_loc)?;
    let bbox = BBox::try_new(
        T::from_f64_lossy(coords[0]),
        T::from_f64_lossy(coords[1]),
        T::from_f64_lossy(coords[2]),
        T::from_f64_lossy(coords[3]),
    )
    .map_err(|e| ParseError::new(&bbox_loc, e.to_string()))?;

    let cap_loc = format!("{loc}.caption");
    expect(&mut sc, "<caption>", &cap_loc)?;
    let cap_body = sc
        .take_until("</caption>")
        .ok_or_else(|| ParseError::new(&cap_loc, "unterminated <caption>"))?;
    let caption = Caption::from_str_exact(cap_body.trim()).ok_or_else(|| {
        ParseError::new(&cap_loc, "caption must be one of [dynamic, static]")
    })?;

    sc.skip_ws();
    if !sc.done() {
        return Err(ParseError::new(loc, "unexpected content after </caption>"));
    }
    BlinkElement::new(id, bbox, caption).map_err(|e| ParseError::new(loc, e.to_string()))
}

/// Parses a link body: `answer([ ... ])` around a non-empty JSON array of
/// plan/action steps.
fn parse_link_body<T: Scalar>(body: &str) -> Result<Vec<LinkStep<T>>, ParseError> {
    let trimmed = body.trim();
    let payload = trimmed
        .strip_prefix("answer(")
        .and_then(|rest| rest.strip_suffix(')'))
        .ok_or_else(|| {
            ParseError::new("link", "link body must use the answer([…]) wrapper")
        })?;
    let payload = payload.trim();
    if !payload.starts_with('[') {
        return Err(ParseError::new("link", "answer payload must be a JSON array"));
    }
    let steps: Vec<LinkStep<T>> = serde_json::from_str(payload)
        .map_err(|e| ParseError::new("link", format!("invalid step payload: {e}")))?;
    if steps.is_empty() {
        return Err(ParseError::new("link", "link must contain at least one step"));
    }
    Ok(steps)
}
