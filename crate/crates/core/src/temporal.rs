//! Value types and interval algebra shared by every other module.
//!
//! Intervals are half-open `[start, end)` in seconds on a video timeline.
//! Touching intervals do not overlap and have IoU 0, which keeps frame
//! accounting free of double counting. All arithmetic is 64-bit floating
//! seconds; equality-style comparisons use [`TIME_EPSILON`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for comparisons on timeline seconds.
pub const TIME_EPSILON: f64 = 1e-9;

/// Half-open span `[start, end)` in seconds on a video timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct TimeInterval {
    start: f64,
    end: f64,
}

#[derive(Deserialize)]
struct RawInterval {
    start: f64,
    end: f64,
}

impl TryFrom<RawInterval> for TimeInterval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Self> {
        TimeInterval::new(raw.start, raw.end)
    }
}

impl TimeInterval {
    /// Builds a validated interval. Zero- and negative-length spans are
    /// rejected rather than clamped so corrupted annotations surface early.
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidInterval {
                start,
                end,
                reason: "non-finite endpoint",
            });
        }
        if start < 0.0 {
            return Err(Error::InvalidInterval {
                start,
                end,
                reason: "negative start",
            });
        }
        if end <= start {
            return Err(Error::InvalidInterval {
                start,
                end,
                reason: "end must exceed start",
            });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// Length of the overlap with `other`; zero for disjoint or touching spans.
    pub fn intersection_length(&self, other: &TimeInterval) -> f64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0.0)
    }
}

/// One annotated or predicted action: a timeline span plus its caption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSegment", into = "RawSegment")]
pub struct ActionSegment {
    interval: TimeInterval,
    caption: String,
}

/// Flat on-disk shape: `{start, end, caption}`.
#[derive(Serialize, Deserialize)]
struct RawSegment {
    start: f64,
    end: f64,
    caption: String,
}

impl TryFrom<RawSegment> for ActionSegment {
    type Error = Error;

    fn try_from(raw: RawSegment) -> Result<Self> {
        ActionSegment::new(TimeInterval::new(raw.start, raw.end)?, raw.caption)
    }
}

impl From<ActionSegment> for RawSegment {
    fn from(seg: ActionSegment) -> Self {
        RawSegment {
            start: seg.interval.start(),
            end: seg.interval.end(),
            caption: seg.caption,
        }
    }
}

impl ActionSegment {
    /// Captions are stored trimmed and must be non-empty.
    pub fn new(interval: TimeInterval, caption: impl Into<String>) -> Result<Self> {
        let caption = caption.into().trim().to_string();
        if caption.is_empty() {
            return Err(Error::EmptyCaption);
        }
        Ok(Self { interval, caption })
    }

    pub fn interval(&self) -> TimeInterval {
        self.interval
    }

    pub fn caption(&self) -> &str {
        &self.caption
    }
}

/// One video's ground truth: procedure label, duration, and its ordered
/// action segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnnotationRecord")]
pub struct AnnotationRecord {
    video_id: String,
    procedure_label: String,
    duration: f64,
    segments: Vec<ActionSegment>,
}

#[derive(Deserialize)]
struct RawAnnotationRecord {
    video_id: String,
    procedure_label: String,
    duration: f64,
    segments: Vec<RawSegment>,
}

impl TryFrom<RawAnnotationRecord> for AnnotationRecord {
    type Error = Error;

    fn try_from(raw: RawAnnotationRecord) -> Result<Self> {
        let video_id = raw.video_id.clone();
        let segments: Vec<ActionSegment> = raw
            .segments
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                ActionSegment::try_from(s).map_err(|e| Error::InvalidAnnotation {
                    video_id: video_id.clone(),
                    segment: Some(i),
                    detail: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        AnnotationRecord::new(raw.video_id, raw.procedure_label, raw.duration, segments)
    }
}

impl AnnotationRecord {
    /// Validates bounds and sorts segments by start time. Segments reaching
    /// outside `[0, duration]` are rejected, not clipped.
    pub fn new(
        video_id: impl Into<String>,
        procedure_label: impl Into<String>,
        duration: f64,
        mut segments: Vec<ActionSegment>,
    ) -> Result<Self> {
        let video_id = video_id.into();
        if !duration.is_finite() || duration <= 0.0 {
            return Err(Error::InvalidAnnotation {
                video_id,
                segment: None,
                detail: format!("duration must be positive, got {duration}"),
            });
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.interval().end() > duration + TIME_EPSILON {
                return Err(Error::InvalidAnnotation {
                    video_id,
                    segment: Some(i),
                    detail: format!(
                        "segment ends at {} but video duration is {}",
                        seg.interval().end(),
                        duration
                    ),
                });
            }
        }
        segments.sort_by(|a, b| {
            a.interval()
                .start()
                .total_cmp(&b.interval().start())
                .then(a.interval().end().total_cmp(&b.interval().end()))
        });
        Ok(Self {
            video_id,
            procedure_label: procedure_label.into(),
            duration,
            segments,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn procedure_label(&self) -> &str {
        &self.procedure_label
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn segments(&self) -> &[ActionSegment] {
        &self.segments
    }

    pub fn intervals(&self) -> Vec<TimeInterval> {
        self.segments.iter().map(|s| s.interval()).collect()
    }

    pub fn captions(&self) -> Vec<String> {
        self.segments.iter().map(|s| s.caption().to_string()).collect()
    }
}

/// Contiguous half-open range of frame indices on the sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameIndexRange {
    pub first: usize,
    pub last_exclusive: usize,
}

impl FrameIndexRange {
    pub fn len(&self) -> usize {
        self.last_exclusive - self.first
    }

    pub fn is_empty(&self) -> bool {
        self.last_exclusive <= self.first
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.first..self.last_exclusive
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= self.first && index < self.last_exclusive
    }
}

/// Temporal intersection-over-union of two half-open spans.
///
/// The union is measured as the total length of the covered set, i.e.
/// `len(a) + len(b) - len(a ∩ b)` for two intervals. Touching spans have
/// IoU 0 under the half-open convention.
pub fn iou(a: &TimeInterval, b: &TimeInterval) -> f64 {
    let inter = a.intersection_length(b);
    let union = a.length() + b.length() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Fraction of the ground-truth union covered by the prediction union.
///
/// Returns `len(union(pred) ∩ union(gt)) / len(union(gt))`, and 0 when the
/// ground truth is empty.
pub fn coverage_fraction(gt: &[TimeInterval], pred: &[TimeInterval]) -> f64 {
    let gt_union = merge_intervals(gt);
    let gt_len: f64 = gt_union.iter().map(|(s, e)| e - s).sum();
    if gt_len <= 0.0 {
        return 0.0;
    }
    let pred_union = merge_intervals(pred);
    let covered = intersection_length_of_sets(&gt_union, &pred_union);
    (covered / gt_len).clamp(0.0, 1.0)
}

/// Merges intervals into a sorted list of disjoint `(start, end)` spans.
fn merge_intervals(intervals: &[TimeInterval]) -> Vec<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = intervals.iter().map(|i| (i.start(), i.end())).collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for (s, e) in spans {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

/// Total overlap length between two sorted disjoint span lists.
fn intersection_length_of_sets(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            total += hi - lo;
        }
        if a[i].1 <= b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Maps a timeline span onto the sampling grid where frame `i` covers
/// `[i/fps, (i+1)/fps)`.
///
/// Returns `first = floor(start·fps)` and `last_exclusive = ceil(end·fps)`,
/// guarded against representation error by [`TIME_EPSILON`]. The result is
/// never empty: sub-frame spans snap to the single frame containing them.
pub fn seconds_to_frames(interval: &TimeInterval, fps: f64) -> FrameIndexRange {
    debug_assert!(fps > 0.0, "fps must be positive");
    let first = ((interval.start() * fps) + TIME_EPSILON).floor().max(0.0) as usize;
    let mut last_exclusive = ((interval.end() * fps) - TIME_EPSILON).ceil().max(0.0) as usize;
    if last_exclusive <= first {
        last_exclusive = first + 1;
    }
    FrameIndexRange {
        first,
        last_exclusive,
    }
}

/// Number of frames on the grid for a video of the given duration.
pub fn frame_count_for_duration(duration: f64, fps: f64) -> usize {
    debug_assert!(fps > 0.0, "fps must be positive");
    (((duration * fps) - TIME_EPSILON).ceil().max(1.0)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ti(s: f64, e: f64) -> TimeInterval {
        TimeInterval::new(s, e).unwrap()
    }

    #[test]
    fn interval_construction_rejects_degenerate_spans() {
        assert!(TimeInterval::new(-1.0, 2.0).is_err());
        assert!(TimeInterval::new(3.0, 3.0).is_err());
        assert!(TimeInterval::new(5.0, 4.0).is_err());
        assert!(TimeInterval::new(0.0, f64::NAN).is_err());
        assert!(TimeInterval::new(0.0, 0.5).is_ok());
    }

    #[test]
    fn iou_identity_and_disjoint() {
        assert_eq!(iou(&ti(0.0, 10.0), &ti(0.0, 10.0)), 1.0);
        // Half-open touch: no overlap.
        assert_eq!(iou(&ti(0.0, 5.0), &ti(5.0, 10.0)), 0.0);
    }

    #[test]
    fn iou_partial_overlap() {
        // Intersection 2, union 6.
        let v = iou(&ti(0.0, 4.0), &ti(2.0, 6.0));
        assert!((v - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn coverage_examples() {
        let gt = vec![ti(0.0, 10.0)];
        assert!((coverage_fraction(&gt, &[ti(0.0, 5.0), ti(7.0, 9.0)]) - 0.7).abs() < 1e-9);
        assert_eq!(coverage_fraction(&gt, &[ti(0.0, 10.0)]), 1.0);
        assert_eq!(coverage_fraction(&gt, &[]), 0.0);
        assert_eq!(coverage_fraction(&[], &[ti(0.0, 1.0)]), 0.0);
    }

    #[test]
    fn coverage_merges_overlapping_predictions() {
        let gt = vec![ti(0.0, 10.0)];
        let pred = vec![ti(0.0, 6.0), ti(4.0, 8.0)];
        assert!((coverage_fraction(&gt, &pred) - 0.8).abs() < 1e-9);
    }

    #[test]
    fn frames_examples() {
        let r = seconds_to_frames(&ti(5.0, 8.0), 1.0);
        assert_eq!((r.first, r.last_exclusive), (5, 8));
        let r = seconds_to_frames(&ti(2.3, 2.6), 1.0);
        assert_eq!((r.first, r.last_exclusive), (2, 3));
        let r = seconds_to_frames(&ti(0.0, 10.0), 1.0);
        assert_eq!((r.first, r.last_exclusive), (0, 10));
        // 2 fps: frame grid halves.
        let r = seconds_to_frames(&ti(1.0, 2.5), 2.0);
        assert_eq!((r.first, r.last_exclusive), (2, 5));
    }

    #[test]
    fn frames_never_empty() {
        let r = seconds_to_frames(&ti(2.0, 2.0000000001), 1.0);
        assert!(r.len() >= 1);
    }

    #[test]
    fn record_sorts_and_validates() {
        let segs = vec![
            ActionSegment::new(ti(5.0, 8.0), "b").unwrap(),
            ActionSegment::new(ti(0.0, 4.0), "a").unwrap(),
        ];
        let rec = AnnotationRecord::new("v1", "p", 10.0, segs).unwrap();
        assert_eq!(rec.segments()[0].caption(), "a");
        assert_eq!(rec.segments()[1].caption(), "b");

        let too_long = vec![ActionSegment::new(ti(0.0, 12.0), "x").unwrap()];
        let err = AnnotationRecord::new("v2", "p", 10.0, too_long).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("v2") && msg.contains("segment 0"), "{msg}");
    }

    #[test]
    fn caption_trimming() {
        assert!(ActionSegment::new(ti(0.0, 1.0), "   ").is_err());
        let s = ActionSegment::new(ti(0.0, 1.0), "  washes hands  ").unwrap();
        assert_eq!(s.caption(), "washes hands");
    }

    #[test]
    fn frame_count_examples() {
        assert_eq!(frame_count_for_duration(10.0, 1.0), 10);
        assert_eq!(frame_count_for_duration(10.4, 1.0), 11);
        assert_eq!(frame_count_for_duration(0.3, 1.0), 1);
    }
}
