//! Raw model responses: dump files and robust parsing for every task.
//!
//! Model output is unconstrained text, so every parser here is total: it
//! either extracts a structured result or reports the miss (skipped lines
//! are counted, unusable verdicts become abstentions), and it never panics
//! on arbitrary input.
//!
//! Parsing is structured-first: if the response carries a JSON object or
//! array, fields are read through lenient key aliases; otherwise a line
//! grammar accepts `<start> <sep> <end>: <caption>` with `sep` one of
//! `-`, `–`, `to`, times as plain seconds (optional `s` suffix) or `MM:SS`,
//! and decimal points only (locale commas are rejected, not repaired).

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::temporal::{ActionSegment, TimeInterval};

/// The three evaluated capabilities plus procedure identification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ProcedureId,
    DenseCaption,
    MissingEvent,
    OrderCorrection,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TaskKind::ProcedureId => "procedure-id",
            TaskKind::DenseCaption => "dense-caption",
            TaskKind::MissingEvent => "missing-event",
            TaskKind::OrderCorrection => "order-correction",
        };
        f.write_str(s)
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "procedure-id" => Ok(TaskKind::ProcedureId),
            "dense-caption" => Ok(TaskKind::DenseCaption),
            "missing-event" => Ok(TaskKind::MissingEvent),
            "order-correction" => Ok(TaskKind::OrderCorrection),
            other => Err(Error::InvalidConfig(format!("unknown task '{other}'"))),
        }
    }
}

/// One model response as captured from the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawModelResponse {
    pub task: TaskKind,
    pub sample_id: String,
    pub text: String,
}

pub const DUMP_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseStatus {
    Ok,
    Failed,
}

/// One line of the raw response dump. The dump is append-only and
/// replayable: evaluation needs no network once it exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub schema_version: u32,
    pub task: TaskKind,
    pub sample_id: String,
    pub status: ResponseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

impl DumpRecord {
    pub fn ok(task: TaskKind, sample_id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            schema_version: DUMP_SCHEMA_VERSION,
            task,
            sample_id: sample_id.into(),
            status: ResponseStatus::Ok,
            text: Some(text.into()),
            error: None,
            model: None,
        }
    }

    pub fn failed(task: TaskKind, sample_id: impl Into<String>, error: impl Into<String>) -> Self {
        Self {
            schema_version: DUMP_SCHEMA_VERSION,
            task,
            sample_id: sample_id.into(),
            status: ResponseStatus::Failed,
            text: None,
            error: Some(error.into()),
            model: None,
        }
    }
}

/// Reads a dump; the file must exist and every line must be a dump record.
pub fn read_dump(path: &Path) -> Result<Vec<DumpRecord>> {
    let file = std::fs::File::open(path)?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DumpRecord = serde_json::from_str(&line).map_err(|e| {
            Error::ParseFailure(format!(
                "{} line {}: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Appends records to a dump, creating it if needed.
pub fn append_dump(path: &Path, records: &[DumpRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    for rec in records {
        writeln!(file, "{}", serde_json::to_string(rec)?)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Time and line grammar
// ---------------------------------------------------------------------------

/// Accepts `12`, `12.5`, `12.5s`, and `MM:SS(.fff)`. Decimal commas and
/// negative values are rejected by the caller's interval validation.
pub fn parse_time_token(token: &str) -> Option<f64> {
    let t = token.trim();
    let t = t.strip_suffix(['s', 'S']).unwrap_or(t).trim();
    if let Some((mins, secs)) = t.split_once(':') {
        let mins: u32 = mins.trim().parse().ok()?;
        let secs: f64 = secs.trim().parse().ok()?;
        if !secs.is_finite() || secs < 0.0 {
            return None;
        }
        Some(f64::from(mins) * 60.0 + secs)
    } else {
        let v: f64 = t.parse().ok()?;
        v.is_finite().then_some(v)
    }
}

static SEGMENT_LINE: LazyLock<Regex> = LazyLock::new(|| {
    let time = r"\d+:\d+(?:\.\d+)?|\d+(?:\.\d+)?\s*[sS]?";
    Regex::new(&format!(
        r"^\s*(?:(?:\d+[.)]|[-*•])\s+)?\[?\s*(?P<t1>{time})\s*(?:-|–|—|(?i:to))\s*(?P<t2>{time})\s*\]?\s*[:：\-–]\s*(?P<cap>.+?)\s*$"
    ))
    .expect("segment line regex")
});

/// Segments recovered from one response plus the number of lines (or
/// structured entries) that could not be used.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedSegments {
    pub segments: Vec<ActionSegment>,
    pub malformed: usize,
}

/// Extracts action segments from arbitrary response text. Never fails;
/// zero recovered segments is the caller's parse-failure signal.
pub fn parse_segment_list(text: &str) -> ParsedSegments {
    if let Some(value) = extract_json(text) {
        if let Some(items) = json_segment_items(&value) {
            return segments_from_json(items);
        }
    }
    let mut out = ParsedSegments::default();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_segment_line(line) {
            Some(seg) => out.segments.push(seg),
            None => out.malformed += 1,
        }
    }
    out
}

/// One line of the `<start> <sep> <end>: <caption>` grammar.
pub fn parse_segment_line(line: &str) -> Option<ActionSegment> {
    let caps = SEGMENT_LINE.captures(line)?;
    let start = parse_time_token(&caps["t1"])?;
    let end = parse_time_token(&caps["t2"])?;
    // No silent repair: invalid intervals reject the whole line.
    let interval = TimeInterval::new(start, end).ok()?;
    ActionSegment::new(interval, &caps["cap"]).ok()
}

fn segments_from_json(items: &[Value]) -> ParsedSegments {
    let mut out = ParsedSegments::default();
    for item in items {
        match segment_from_json(item) {
            Some(seg) => out.segments.push(seg),
            None => out.malformed += 1,
        }
    }
    out
}

fn segment_from_json(item: &Value) -> Option<ActionSegment> {
    let obj = item.as_object()?;
    let start = json_time(obj, &["start", "start_time", "begin", "from", "start_sec"])?;
    let end = json_time(obj, &["end", "end_time", "stop", "until", "finish", "end_sec"])?;
    let caption = json_str(
        obj,
        &["caption", "description", "text", "label", "action", "event"],
    )?;
    let interval = TimeInterval::new(start, end).ok()?;
    ActionSegment::new(interval, caption).ok()
}

fn json_time(obj: &serde_json::Map<String, Value>, keys: &[&str]) -> Option<f64> {
    let v = lookup(obj, keys)?;
    match v {
        Value::Number(n) => n.as_f64().filter(|x| x.is_finite()),
        Value::String(s) => parse_time_token(s),
        _ => None,
    }
}

fn json_str(obj: &serde_json::Map<String, Value>, keys: &[&str]) -> Option<String> {
    match lookup(obj, keys)? {
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Case-insensitive key lookup across aliases.
fn lookup<'a>(obj: &'a serde_json::Map<String, Value>, keys: &[&str]) -> Option<&'a Value> {
    for key in keys {
        for (k, v) in obj {
            if k.eq_ignore_ascii_case(key) {
                return Some(v);
            }
        }
    }
    None
}

/// Items of a `segments`-like array within the JSON value, or the array
/// itself.
fn json_segment_items(value: &Value) -> Option<&[Value]> {
    match value {
        Value::Array(items) => Some(items),
        Value::Object(obj) => {
            match lookup(obj, &["segments", "actions", "events", "steps"])? {
                Value::Array(items) => Some(items),
                _ => None,
            }
        }
        _ => None,
    }
}

/// First parsable JSON object or array embedded in the text, markdown
/// fences included.
pub fn extract_json(text: &str) -> Option<Value> {
    let trimmed = text.trim();
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        if v.is_object() || v.is_array() {
            return Some(v);
        }
    }
    for open in ['{', '['] {
        let mut search_from = 0;
        while let Some(rel) = text[search_from..].find(open) {
            let begin = search_from + rel;
            if let Some(slice) = balanced_slice(&text[begin..], open) {
                if let Ok(v) = serde_json::from_str::<Value>(slice) {
                    return Some(v);
                }
            }
            search_from = begin + 1;
        }
    }
    None
}

/// Longest balanced `{...}`/`[...]` prefix, string-literal aware.
fn balanced_slice(text: &str, open: char) -> Option<&str> {
    let close = if open == '{' { '}' } else { ']' };
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            c if c == open => depth += 1,
            c if c == close => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return Some(&text[..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Procedure identification
// ---------------------------------------------------------------------------

/// Parsed procedure-identification response.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProcedureResponse {
    pub procedure: Option<String>,
    pub segments: ParsedSegments,
}

static PROCEDURE_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?im)^\s*procedure(?:\s+name|\s+label)?\s*[:\-]\s*(?P<label>.+?)\s*$")
        .expect("procedure line regex")
});

/// Extracts the procedure label and any coarse segments.
pub fn parse_procedure_response(text: &str) -> ProcedureResponse {
    if let Some(Value::Object(obj)) = extract_json(text) {
        let procedure = json_str(
            &obj,
            &["procedure", "procedure_label", "procedure_name", "label", "name", "skill"],
        );
        let segments = json_segment_items(&Value::Object(obj.clone()))
            .map(segments_from_json)
            .unwrap_or_default();
        if procedure.is_some() || !segments.segments.is_empty() {
            return ProcedureResponse {
                procedure,
                segments,
            };
        }
    }

    let mut procedure = PROCEDURE_LINE
        .captures(text)
        .map(|c| c["label"].trim().to_string());
    let mut remainder: Vec<&str> = Vec::new();
    for line in text.lines() {
        if PROCEDURE_LINE.is_match(line) {
            continue;
        }
        if procedure.is_none() && !line.trim().is_empty() && parse_segment_line(line).is_none() {
            // First non-segment line doubles as the label when none is tagged.
            procedure = Some(line.trim().to_string());
            continue;
        }
        remainder.push(line);
    }
    ProcedureResponse {
        procedure,
        segments: parse_segment_list(&remainder.join("\n")),
    }
}

// ---------------------------------------------------------------------------
// Order-correction verdicts
// ---------------------------------------------------------------------------

/// Structured verdict on sequence correctness.
///
/// `corrected_order`, when present, is a valid zero-based permutation;
/// responses listing one-based positions are normalized. A `None` from the
/// parser is an abstention and scores as a miss by default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub is_correct: bool,
    pub misplaced: Vec<usize>,
    pub corrected_order: Option<Vec<usize>>,
    pub reasoning: String,
}

pub fn parse_order_verdict(text: &str) -> Option<OrderVerdict> {
    if let Some(Value::Object(obj)) = extract_json(text) {
        let is_correct = lookup(
            &obj,
            &["is_correct", "correct", "sequence_correct", "is_sequence_correct", "order_correct"],
        )
        .and_then(parse_boolean_lenient);
        let misplaced = lookup(
            &obj,
            &["misplaced", "misplaced_indices", "misplaced_segments", "wrong_positions"],
        )
        .and_then(index_list);
        let corrected = lookup(
            &obj,
            &["corrected_order", "correct_order", "correct_sequence", "corrected_sequence"],
        )
        .and_then(index_list)
        .and_then(normalize_permutation);
        let reasoning = json_str(&obj, &["reasoning", "rationale", "explanation", "reason"])
            .unwrap_or_default();

        let is_correct = match (is_correct, &misplaced) {
            (Some(b), _) => Some(b),
            (None, Some(m)) => Some(m.is_empty()),
            (None, None) => None,
        };
        if let Some(is_correct) = is_correct {
            return Some(OrderVerdict {
                is_correct,
                misplaced: misplaced.unwrap_or_default(),
                corrected_order: corrected,
                reasoning,
            });
        }
    }
    prose_order_verdict(text)
}

fn prose_order_verdict(text: &str) -> Option<OrderVerdict> {
    let lower = text.to_lowercase();
    let negative = [
        "not correct",
        "incorrect",
        "out of order",
        "wrong order",
        "misordered",
        "not in the right order",
        "not chronological",
    ];
    let positive = [
        "sequence is correct",
        "order is correct",
        "correct order",
        "correctly ordered",
        "in the correct order",
        "no errors",
        "chronologically correct",
    ];
    let verdict = if negative.iter().any(|p| lower.contains(p)) {
        false
    } else if positive.iter().any(|p| lower.contains(p)) {
        true
    } else {
        return None;
    };
    Some(OrderVerdict {
        is_correct: verdict,
        misplaced: vec![],
        corrected_order: None,
        reasoning: text.trim().to_string(),
    })
}

/// Non-negative integers from a JSON array (numbers or digit strings).
fn index_list(v: &Value) -> Option<Vec<usize>> {
    let items = v.as_array()?;
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let idx = match item {
            Value::Number(n) => n.as_u64()? as usize,
            Value::String(s) => s.trim().parse().ok()?,
            _ => return None,
        };
        out.push(idx);
    }
    Some(out)
}

/// Accepts a zero-based permutation as-is and shifts a one-based one down;
/// anything else is dropped.
fn normalize_permutation(list: Vec<usize>) -> Option<Vec<usize>> {
    let n = list.len();
    if n == 0 {
        return None;
    }
    let is_perm_of = |offset: usize| {
        let mut seen = vec![false; n];
        list.iter().all(|&v| {
            v.checked_sub(offset)
                .filter(|&i| i < n && !std::mem::replace(&mut seen[i], true))
                .is_some()
        })
    };
    if is_perm_of(0) {
        Some(list)
    } else if is_perm_of(1) {
        Some(list.into_iter().map(|v| v - 1).collect())
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Missing-event verdicts
// ---------------------------------------------------------------------------

/// Structured verdict on procedural completeness.
///
/// The invariant `has_missing ⇒ predicted_caption present` is enforced at
/// parse time: a positive claim without a caption is an abstention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingVerdict {
    pub has_missing: bool,
    pub predicted_interval: Option<TimeInterval>,
    pub predicted_caption: Option<String>,
    pub reasoning: String,
}

pub fn parse_missing_verdict(text: &str) -> Option<MissingVerdict> {
    if let Some(Value::Object(obj)) = extract_json(text) {
        let has_missing = lookup(
            &obj,
            &["has_missing", "missing", "is_missing", "has_missing_event", "missing_action"],
        )
        .and_then(parse_boolean_lenient);
        let interval = json_interval(&obj);
        let caption = json_str(
            &obj,
            &["predicted_caption", "caption", "missing_caption", "description", "predicted_action"],
        )
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty());
        let reasoning = json_str(&obj, &["reasoning", "rationale", "explanation", "reason"])
            .unwrap_or_default();
        if let Some(has_missing) = has_missing {
            if has_missing && caption.is_none() {
                return None;
            }
            return Some(MissingVerdict {
                has_missing,
                predicted_interval: interval,
                predicted_caption: caption,
                reasoning,
            });
        }
    }
    prose_missing_verdict(text)
}

fn prose_missing_verdict(text: &str) -> Option<MissingVerdict> {
    let lower = text.to_lowercase();
    let negative = [
        "no missing",
        "nothing is missing",
        "not missing",
        "no action is missing",
        "sequence is complete",
        "procedure is complete",
    ];
    if negative.iter().any(|p| lower.contains(p)) {
        return Some(MissingVerdict {
            has_missing: false,
            predicted_interval: None,
            predicted_caption: None,
            reasoning: text.trim().to_string(),
        });
    }
    if lower.contains("missing") {
        // A positive prose claim must still yield interval and caption.
        let seg = text.lines().find_map(parse_segment_line)?;
        return Some(MissingVerdict {
            has_missing: true,
            predicted_interval: Some(seg.interval()),
            predicted_caption: Some(seg.caption().to_string()),
            reasoning: text.trim().to_string(),
        });
    }
    None
}

fn json_interval(obj: &serde_json::Map<String, Value>) -> Option<TimeInterval> {
    if let Some(v) = lookup(
        obj,
        &["predicted_interval", "interval", "missing_interval", "timespan", "time_range"],
    ) {
        match v {
            Value::Object(inner) => {
                let start = json_time(inner, &["start", "start_time", "begin", "from"])?;
                let end = json_time(inner, &["end", "end_time", "stop", "until"])?;
                return TimeInterval::new(start, end).ok();
            }
            Value::Array(items) if items.len() == 2 => {
                let start = time_value(&items[0])?;
                let end = time_value(&items[1])?;
                return TimeInterval::new(start, end).ok();
            }
            Value::String(s) => {
                let caps = SEGMENT_LINE.captures(&format!("{s}: x"))?;
                let start = parse_time_token(&caps["t1"])?;
                let end = parse_time_token(&caps["t2"])?;
                return TimeInterval::new(start, end).ok();
            }
            _ => return None,
        }
    }
    let start = json_time(obj, &["start", "start_time"])?;
    let end = json_time(obj, &["end", "end_time"])?;
    TimeInterval::new(start, end).ok()
}

fn time_value(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64().filter(|x| x.is_finite()),
        Value::String(s) => parse_time_token(s),
        _ => None,
    }
}

/// Booleans from JSON bools, numbers, or yes/no/correct/incorrect strings.
pub fn parse_boolean_lenient(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => n.as_f64().map(|x| x != 0.0),
        Value::String(s) => match s.trim().to_ascii_lowercase().as_str() {
            "true" | "yes" | "correct" | "y" => Some(true),
            "false" | "no" | "incorrect" | "n" => Some(false),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_line_grammar() {
        let seg = parse_segment_line("12.0 - 18.5: cleans the skin with an alcohol swab").unwrap();
        assert_eq!(seg.interval().start(), 12.0);
        assert_eq!(seg.interval().end(), 18.5);
        assert_eq!(seg.caption(), "cleans the skin with an alcohol swab");

        let seg = parse_segment_line("00:05 to 00:09: dons sterile gloves").unwrap();
        assert_eq!(seg.interval().start(), 5.0);
        assert_eq!(seg.interval().end(), 9.0);

        let seg = parse_segment_line("3s – 7s: flushes the line").unwrap();
        assert_eq!(seg.interval().start(), 3.0);
        assert_eq!(seg.interval().end(), 7.0);

        assert!(parse_segment_line("the nurse prepares the tray").is_none());
        // Backwards and zero-length intervals are rejected, not repaired.
        assert!(parse_segment_line("9 - 5: backwards").is_none());
        assert!(parse_segment_line("5 - 5: empty").is_none());
        // Locale commas are rejected.
        assert!(parse_segment_line("12,5 - 15: comma decimal").is_none());
    }

    #[test]
    fn segment_list_counts_malformed_lines() {
        let text = "Here are the actions:\n1. 0 - 4: washes hands\nno times here\n5 - 9: dries hands\n";
        let parsed = parse_segment_list(text);
        assert_eq!(parsed.segments.len(), 2);
        assert_eq!(parsed.malformed, 2);
    }

    #[test]
    fn segment_list_prefers_structured_json() {
        let text = r#"Sure! ```json
        {"segments": [
           {"start": 1.0, "end": 4.0, "caption": "opens kit"},
           {"start_time": "00:06", "end_time": "00:09", "description": "applies tourniquet"},
           {"start": 9.0, "end": 7.0, "caption": "bad interval"}
        ]}
        ``` hope that helps"#;
        let parsed = parse_segment_list(text);
        assert_eq!(parsed.segments.len(), 2);
        assert_eq!(parsed.malformed, 1);
        assert_eq!(parsed.segments[1].interval().start(), 6.0);
    }

    #[test]
    fn segment_list_never_fails_on_garbage() {
        for text in ["", "\n\n", "{{{{", "][", "12:::4", "🙂 🙃"] {
            let parsed = parse_segment_list(text);
            assert!(parsed.segments.is_empty());
        }
    }

    #[test]
    fn procedure_response_variants() {
        let p = parse_procedure_response(r#"{"procedure": "venipuncture", "segments": []}"#);
        assert_eq!(p.procedure.as_deref(), Some("venipuncture"));

        let p = parse_procedure_response("Procedure: wound care\n0 - 5: cleans wound\n");
        assert_eq!(p.procedure.as_deref(), Some("wound care"));
        assert_eq!(p.segments.segments.len(), 1);

        let p = parse_procedure_response("catheterization\n2 - 6: inserts catheter\n");
        assert_eq!(p.procedure.as_deref(), Some("catheterization"));
        assert_eq!(p.segments.segments.len(), 1);
    }

    #[test]
    fn order_verdict_structured() {
        let v = parse_order_verdict(
            r#"{"is_correct": false, "misplaced": [1, 3], "corrected_order": [0, 3, 2, 1], "reasoning": "swapped"}"#,
        )
        .unwrap();
        assert!(!v.is_correct);
        assert_eq!(v.misplaced, vec![1, 3]);
        assert_eq!(v.corrected_order, Some(vec![0, 3, 2, 1]));

        // One-based permutations are normalized.
        let v = parse_order_verdict(
            r#"{"correct": "no", "misplaced_segments": [0], "correct_sequence": [2, 1, 3]}"#,
        )
        .unwrap();
        assert_eq!(v.corrected_order, Some(vec![1, 0, 2]));

        // Invalid permutations are dropped but the verdict survives.
        let v = parse_order_verdict(r#"{"is_correct": false, "corrected_order": [5, 5, 5]}"#)
            .unwrap();
        assert_eq!(v.corrected_order, None);
    }

    #[test]
    fn order_verdict_prose_and_abstention() {
        let v = parse_order_verdict("The sequence is correct.").unwrap();
        assert!(v.is_correct);
        assert!(v.misplaced.is_empty());

        let v = parse_order_verdict("Steps appear out of order here.").unwrap();
        assert!(!v.is_correct);

        assert!(parse_order_verdict("?????").is_none());
        assert!(parse_order_verdict("").is_none());
    }

    #[test]
    fn missing_verdict_variants() {
        let v = parse_missing_verdict(
            r#"{"has_missing": true, "predicted_interval": {"start": 5, "end": 8},
                "predicted_caption": "applies tourniquet", "reasoning": "gap in workflow"}"#,
        )
        .unwrap();
        assert!(v.has_missing);
        assert_eq!(v.predicted_interval.unwrap().start(), 5.0);

        let v = parse_missing_verdict(r#"{"missing": "no"}"#).unwrap();
        assert!(!v.has_missing);

        // Positive claim without caption violates the invariant: abstain.
        assert!(parse_missing_verdict(r#"{"has_missing": true}"#).is_none());

        let v = parse_missing_verdict(
            "There is a missing step.\n5.0 - 8.0: applies tourniquet\n",
        )
        .unwrap();
        assert!(v.has_missing);
        assert_eq!(v.predicted_caption.as_deref(), Some("applies tourniquet"));

        let v = parse_missing_verdict("Nothing is missing from this procedure.").unwrap();
        assert!(!v.has_missing);

        assert!(parse_missing_verdict("hard to say").is_none());
    }

    #[test]
    fn dump_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("dump.jsonl");
        let records = vec![
            DumpRecord::ok(TaskKind::DenseCaption, "v1", "0 - 5: works"),
            DumpRecord::failed(TaskKind::DenseCaption, "v2", "HTTP 401"),
        ];
        append_dump(&path, &records).unwrap();
        append_dump(&path, &[DumpRecord::ok(TaskKind::DenseCaption, "v3", "hi")]).unwrap();
        let loaded = read_dump(&path).unwrap();
        assert_eq!(loaded.len(), 3);
        assert_eq!(loaded[..2], records[..]);
    }

    #[test]
    fn task_kind_round_trip() {
        for (s, t) in [
            ("procedure-id", TaskKind::ProcedureId),
            ("dense_caption", TaskKind::DenseCaption),
            ("missing-event", TaskKind::MissingEvent),
            ("order-correction", TaskKind::OrderCorrection),
        ] {
            assert_eq!(TaskKind::from_str(s).unwrap(), t);
        }
        assert!(TaskKind::from_str("nope").is_err());
    }
}
