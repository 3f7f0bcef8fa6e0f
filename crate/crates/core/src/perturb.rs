//! Synthesis of perturbed procedural-video samples with machine-readable
//! ground truth.
//!
//! Four kinds are supported: `mask` blanks one segment's frames, `swap`
//! exchanges two segment blocks, `shift` rotates all segments left by one,
//! and `keep` passes the sequence through unchanged. Generation is a pure
//! function of `(record, seed, kind)`; frame I/O happens only in
//! [`apply_frame_plan`]. Seeded randomness uses ChaCha8, named in every
//! emitted manifest header.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal::{
    frame_count_for_duration, seconds_to_frames, ActionSegment, AnnotationRecord,
    FrameIndexRange, TimeInterval,
};

/// Caption stand-in at the masked position of the visible list.
pub const MASK_PLACEHOLDER: &str = "[MASKED]";

/// Name of the seeded generator recorded in dataset headers.
pub const RNG_ALGORITHM: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Mask,
    Swap,
    Shift,
    Keep,
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PerturbationKind::Mask => "mask",
            PerturbationKind::Swap => "swap",
            PerturbationKind::Shift => "shift",
            PerturbationKind::Keep => "keep",
        };
        f.write_str(s)
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mask" => Ok(PerturbationKind::Mask),
            "swap" => Ok(PerturbationKind::Swap),
            "shift" => Ok(PerturbationKind::Shift),
            "keep" => Ok(PerturbationKind::Keep),
            other => Err(Error::InvalidConfig(format!(
                "unknown perturbation kind '{other}'"
            ))),
        }
    }
}

/// Requested perturbation: kind, seed, and kind-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub seed: u64,
    /// Explicit segment pair for `swap`; picked from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap_indices: Option<(usize, usize)>,
}

/// One playback slot: a source frame index, or a blank substitute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Option<usize>", into = "Option<usize>")]
pub enum FramePlanEntry {
    Source(usize),
    Blank,
}

impl From<Option<usize>> for FramePlanEntry {
    fn from(v: Option<usize>) -> Self {
        match v {
            Some(i) => FramePlanEntry::Source(i),
            None => FramePlanEntry::Blank,
        }
    }
}

impl From<FramePlanEntry> for Option<usize> {
    fn from(e: FramePlanEntry) -> Self {
        match e {
            FramePlanEntry::Source(i) => Some(i),
            FramePlanEntry::Blank => None,
        }
    }
}

/// Machine-readable answer key emitted with every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroundTruthLabel {
    /// One segment hidden: which one, where, and what it said. The visible
    /// caption list carries [`MASK_PLACEHOLDER`] at the masked position.
    Mask {
        masked_index: usize,
        masked_interval: TimeInterval,
        hidden_caption: String,
        visible_captions: Vec<String>,
    },
    /// Playback-order verdict for swap/shift/keep. `segments` lists the
    /// shown sequence with its post-reorder timeline intervals;
    /// `correct_order[k]` is the shown position holding the segment that
    /// chronologically belongs at position `k`.
    Order {
        is_correct: bool,
        misplaced_indices: Vec<usize>,
        correct_order: Vec<usize>,
        segments: Vec<ActionSegment>,
    },
}

impl GroundTruthLabel {
    pub fn is_correct_order(&self) -> Option<bool> {
        match self {
            GroundTruthLabel::Order { is_correct, .. } => Some(*is_correct),
            GroundTruthLabel::Mask { .. } => None,
        }
    }
}

/// A fully specified perturbed sample: frame plan plus ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedSample {
    pub sample_id: String,
    pub source_video_id: String,
    pub kind: PerturbationKind,
    pub seed: u64,
    pub fps: f64,
    pub frame_count: usize,
    pub frame_plan: Vec<FramePlanEntry>,
    pub ground_truth: GroundTruthLabel,
}

fn sample_id(record: &AnnotationRecord, kind: PerturbationKind, seed: u64) -> String {
    format!("{}--{}--{:016x}", record.video_id(), kind, seed)
}

/// Dispatches on the spec's kind.
pub fn synthesize(
    record: &AnnotationRecord,
    spec: &PerturbationSpec,
    fps: f64,
) -> Result<PerturbedSample> {
    match spec.kind {
        PerturbationKind::Mask => gen_mask(record, spec.seed, fps),
        PerturbationKind::Swap => gen_swap(record, spec.seed, spec.swap_indices, fps),
        PerturbationKind::Shift => gen_shift(record, spec.seed, fps),
        PerturbationKind::Keep => gen_keep(record, spec.seed, fps),
    }
}

/// Blanks the frames of one uniformly chosen segment.
///
/// Requires at least two segments; masking the only segment would leave no
/// context to reason from.
pub fn gen_mask(record: &AnnotationRecord, seed: u64, fps: f64) -> Result<PerturbedSample> {
    let n = record.segments().len();
    if n < 2 {
        return Err(Error::TooFewSegments {
            video_id: record.video_id().to_string(),
            have: n,
            need: 2,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let masked_index = rng.random_range(0..n);
    let masked = &record.segments()[masked_index];
    let blanked = seconds_to_frames(&masked.interval(), fps);
    let frame_count = frame_count_for_duration(record.duration(), fps);
    let frame_plan = (0..frame_count)
        .map(|i| {
            if blanked.contains(i) {
                FramePlanEntry::Blank
            } else {
                FramePlanEntry::Source(i)
            }
        })
        .collect();
    let visible_captions = record
        .segments()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if i == masked_index {
                MASK_PLACEHOLDER.to_string()
            } else {
                s.caption().to_string()
            }
        })
        .collect();
    Ok(PerturbedSample {
        sample_id: sample_id(record, PerturbationKind::Mask, seed),
        source_video_id: record.video_id().to_string(),
        kind: PerturbationKind::Mask,
        seed,
        fps,
        frame_count,
        frame_plan,
        ground_truth: GroundTruthLabel::Mask {
            masked_index,
            masked_interval: masked.interval(),
            hidden_caption: masked.caption().to_string(),
            visible_captions,
        },
    })
}

/// Exchanges two segments, seeded or caller-chosen.
pub fn gen_swap(
    record: &AnnotationRecord,
    seed: u64,
    indices: Option<(usize, usize)>,
    fps: f64,
) -> Result<PerturbedSample> {
    let n = record.segments().len();
    if n < 2 {
        return Err(Error::TooFewSegments {
            video_id: record.video_id().to_string(),
            have: n,
            need: 2,
        });
    }
    let (a, b) = match indices {
        Some((a, b)) => {
            if a == b {
                return Err(Error::InvalidSwapIndices {
                    a,
                    b,
                    len: n,
                    reason: "indices must be distinct",
                });
            }
            if a >= n || b >= n {
                return Err(Error::InvalidSwapIndices {
                    a,
                    b,
                    len: n,
                    reason: "index out of range",
                });
            }
            (a, b)
        }
        None => {
            // Uniform distinct pair without replacement.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        }
    };
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(a, b);
    let misplaced = vec![a.min(b), a.max(b)];
    order_sample(record, PerturbationKind::Swap, seed, perm, misplaced, fps)
}

/// Rotates playback left by one: the first segment moves to the end.
pub fn gen_shift(record: &AnnotationRecord, seed: u64, fps: f64) -> Result<PerturbedSample> {
    let n = record.segments().len();
    if n < 2 {
        return Err(Error::TooFewSegments {
            video_id: record.video_id().to_string(),
            have: n,
            need: 2,
        });
    }
    let perm: Vec<usize> = (1..n).chain(std::iter::once(0)).collect();
    // No fixed points exist for n >= 2: every position is misplaced.
    let misplaced: Vec<usize> = (0..n).collect();
    order_sample(record, PerturbationKind::Shift, seed, perm, misplaced, fps)
}

/// Pass-through sample: identity plan, correct-order ground truth.
pub fn gen_keep(record: &AnnotationRecord, seed: u64, fps: f64) -> Result<PerturbedSample> {
    let n = record.segments().len();
    if n < 1 {
        return Err(Error::TooFewSegments {
            video_id: record.video_id().to_string(),
            have: n,
            need: 1,
        });
    }
    let frame_count = frame_count_for_duration(record.duration(), fps);
    Ok(PerturbedSample {
        sample_id: sample_id(record, PerturbationKind::Keep, seed),
        source_video_id: record.video_id().to_string(),
        kind: PerturbationKind::Keep,
        seed,
        fps,
        frame_count,
        frame_plan: (0..frame_count).map(FramePlanEntry::Source).collect(),
        ground_truth: GroundTruthLabel::Order {
            is_correct: true,
            misplaced_indices: vec![],
            correct_order: (0..n).collect(),
            segments: record.segments().to_vec(),
        },
    })
}

/// Disjoint frame blocks per segment; a boundary frame shared by two
/// segments on the grid belongs to the earlier one.
fn segment_frame_blocks(record: &AnnotationRecord, fps: f64) -> Result<Vec<FrameIndexRange>> {
    let frame_count = frame_count_for_duration(record.duration(), fps);
    let mut blocks = Vec::with_capacity(record.segments().len());
    let mut prev_end = 0usize;
    for (i, seg) in record.segments().iter().enumerate() {
        let r = seconds_to_frames(&seg.interval(), fps);
        let first = r.first.max(prev_end);
        let last_exclusive = r.last_exclusive.min(frame_count);
        if last_exclusive <= first {
            return Err(Error::FrameGridCollision {
                video_id: record.video_id().to_string(),
                segment: i,
                fps,
            });
        }
        blocks.push(FrameIndexRange {
            first,
            last_exclusive,
        });
        prev_end = last_exclusive;
    }
    Ok(blocks)
}

/// Builds a reordered sample from a playback permutation.
///
/// `perm[slot]` names the original segment shown at `slot`. Gap frames
/// between segment blocks keep their slot order; unequal block lengths shift
/// subsequent boundaries, and the emitted ground truth records each shown
/// segment's interval on the reordered timeline.
fn order_sample(
    record: &AnnotationRecord,
    kind: PerturbationKind,
    seed: u64,
    perm: Vec<usize>,
    misplaced_indices: Vec<usize>,
    fps: f64,
) -> Result<PerturbedSample> {
    let frame_count = frame_count_for_duration(record.duration(), fps);
    let blocks = segment_frame_blocks(record, fps)?;
    let n = blocks.len();
    debug_assert_eq!(perm.len(), n);

    let mut frame_plan: Vec<FramePlanEntry> = Vec::with_capacity(frame_count);
    let mut segments = Vec::with_capacity(n);
    let mut gap_start = 0usize;
    for (slot, &orig) in perm.iter().enumerate() {
        frame_plan.extend((gap_start..blocks[slot].first).map(FramePlanEntry::Source));
        let out_first = frame_plan.len();
        frame_plan.extend(blocks[orig].indices().map(FramePlanEntry::Source));
        let out_last = frame_plan.len();
        let interval = TimeInterval::new(out_first as f64 / fps, out_last as f64 / fps)?;
        segments.push(ActionSegment::new(
            interval,
            record.segments()[orig].caption(),
        )?);
        gap_start = blocks[slot].last_exclusive;
    }
    frame_plan.extend((gap_start..frame_count).map(FramePlanEntry::Source));
    debug_assert_eq!(frame_plan.len(), frame_count);

    let mut correct_order = vec![0usize; n];
    for (slot, &orig) in perm.iter().enumerate() {
        correct_order[orig] = slot;
    }
    let is_correct = misplaced_indices.is_empty();
    Ok(PerturbedSample {
        sample_id: sample_id(record, kind, seed),
        source_video_id: record.video_id().to_string(),
        kind,
        seed,
        fps,
        frame_count,
        frame_plan,
        ground_truth: GroundTruthLabel::Order {
            is_correct,
            misplaced_indices,
            correct_order,
            segments,
        },
    })
}

/// Restores chronological order: `restored[k] = shown[correct_order[k]]`.
pub fn apply_correct_order<T: Clone>(correct_order: &[usize], shown: &[T]) -> Vec<T> {
    correct_order.iter().map(|&i| shown[i].clone()).collect()
}

/// Materializes a frame plan: copies source frames in plan order and writes
/// all-zero images for blanks.
///
/// The source directory must hold exactly `frame_count` frames named
/// `frame_%06d.png`, all of one resolution. Source entries are copied
/// byte-identically; blanks are encoded at the source resolution.
pub fn apply_frame_plan(sample: &PerturbedSample, src_dir: &Path, out_dir: &Path) -> Result<()> {
    let frame_name = |i: usize| format!("frame_{i:06}.png");
    let available = count_plan_frames(src_dir)?;
    if available != sample.frame_count {
        return Err(Error::FramePlan(format!(
            "{} holds {} frames but the plan expects {}",
            src_dir.display(),
            available,
            sample.frame_count
        )));
    }
    for entry in &sample.frame_plan {
        if let FramePlanEntry::Source(i) = entry {
            if *i >= available {
                return Err(Error::FramePlan(format!(
                    "plan references frame {i} but only {available} exist"
                )));
            }
        }
    }

    // All source frames must share one resolution; blanks adopt it.
    let mut dims: Option<(u32, u32)> = None;
    for i in 0..available {
        let path = src_dir.join(frame_name(i));
        let img = image::open(&path).map_err(|e| {
            Error::FramePlan(format!("unreadable frame {}: {e}", path.display()))
        })?;
        let d = (img.width(), img.height());
        match dims {
            None => dims = Some(d),
            Some(expect) if expect != d => {
                return Err(Error::FramePlan(format!(
                    "frame {} is {}x{} but earlier frames are {}x{}",
                    path.display(),
                    d.0,
                    d.1,
                    expect.0,
                    expect.1
                )));
            }
            _ => {}
        }
    }
    let (w, h) = dims.ok_or_else(|| Error::FramePlan("no source frames".into()))?;

    std::fs::create_dir_all(out_dir)?;
    let blank = image::RgbImage::new(w, h);
    for (pos, entry) in sample.frame_plan.iter().enumerate() {
        let out_path = out_dir.join(frame_name(pos));
        match entry {
            FramePlanEntry::Source(i) => {
                std::fs::copy(src_dir.join(frame_name(*i)), &out_path)?;
            }
            FramePlanEntry::Blank => {
                blank.save(&out_path)?;
            }
        }
    }
    Ok(())
}

/// Number of consecutively named `frame_%06d.png` files starting at 0.
fn count_plan_frames(dir: &Path) -> Result<usize> {
    let mut n = 0usize;
    while dir.join(format!("frame_{n:06}.png")).is_file() {
        n += 1;
    }
    Ok(n)
}
