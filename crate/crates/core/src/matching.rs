//! Greedy segment matching and localization metrics.
//!
//! Predictions are paired to ground truth one-to-one in globally descending
//! IoU order, ties broken by lower prediction index then lower ground-truth
//! index. Precision/recall/F1 are micro-aggregated: true/false counts are
//! summed over the whole dataset before the ratios are taken.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal::{iou, TimeInterval};

/// One accepted prediction/ground-truth pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub pred_index: usize,
    pub gt_index: usize,
    pub iou: f64,
}

/// Outcome of greedy one-to-one matching for a single video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.pairs.len()
    }
}

/// Pairs predictions with ground truth greedily by descending IoU.
///
/// Only pairs with IoU at or above `threshold` are candidates; each side is
/// used at most once. Deterministic for fixed inputs: ties resolve to the
/// lower prediction index, then the lower ground-truth index.
pub fn greedy_match(
    preds: &[TimeInterval],
    gts: &[TimeInterval],
    threshold: f64,
) -> MatchResult {
    assert!(
        threshold > 0.0 && threshold <= 1.0,
        "IoU threshold must lie in (0, 1], got {threshold}"
    );
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (p, pi) in preds.iter().enumerate().map(|(i, p)| (p, i)) {
        for (g, gi) in gts.iter().enumerate().map(|(i, g)| (g, i)) {
            let v = iou(p, g);
            if v >= threshold {
                candidates.push((v, pi, gi));
            }
        }
    }
    candidates.sort_unstable_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });

    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for (v, pi, gi) in candidates {
        if !pred_used[pi] && !gt_used[gi] {
            pred_used[pi] = true;
            gt_used[gi] = true;
            pairs.push(MatchedPair {
                pred_index: pi,
                gt_index: gi,
                iou: v,
            });
        }
    }
    MatchResult {
        pairs,
        unmatched_pred: (0..preds.len()).filter(|&i| !pred_used[i]).collect(),
        unmatched_gt: (0..gts.len()).filter(|&i| !gt_used[i]).collect(),
    }
}

/// Counts and ratios at one IoU threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdedPrf {
    pub threshold: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ThresholdedPrf {
    /// Builds the ratios from raw counts; zero denominators yield zero.
    pub fn from_counts(threshold: f64, tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            threshold,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Default IoU thresholds for localization metrics.
pub const DEFAULT_IOU_THRESHOLDS: [f64; 3] = [0.3, 0.5, 0.7];

/// Micro-aggregated precision/recall/F1 over a dataset of per-video
/// (predictions, ground truth) interval lists.
pub fn prf_at_thresholds(
    dataset: &[(Vec<TimeInterval>, Vec<TimeInterval>)],
    thresholds: &[f64],
) -> Vec<ThresholdedPrf> {
    assert!(!thresholds.is_empty(), "at least one threshold required");
    thresholds
        .iter()
        .map(|&th| {
            let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
            for (preds, gts) in dataset {
                let m = greedy_match(preds, gts, th);
                tp += m.pairs.len();
                fp += m.unmatched_pred.len();
                fn_ += m.unmatched_gt.len();
            }
            ThresholdedPrf::from_counts(th, tp, fp, fn_)
        })
        .collect()
}

/// Hit counts at one start-time tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitRatioResult {
    pub tolerance: f64,
    pub hits: usize,
    pub total_gt: usize,
    pub ratio: f64,
}

/// Default start-time tolerance windows, in seconds.
pub const DEFAULT_HIT_TOLERANCES: [f64; 3] = [0.5, 1.0, 2.0];

/// Counts ground-truth events hit by predictions within `tolerance` seconds.
///
/// Predictions are consumed in order; each claims at most one ground-truth
/// event, the nearest still-unhit one within the window (ties to the earlier
/// event).
pub fn count_hits(pred_starts: &[f64], gt_starts: &[f64], tolerance: f64) -> usize {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let mut hit = vec![false; gt_starts.len()];
    let mut hits = 0;
    for &s in pred_starts {
        let mut best: Option<(usize, f64)> = None;
        for (i, &g) in gt_starts.iter().enumerate() {
            if hit[i] {
                continue;
            }
            let d = (s - g).abs();
            if d <= tolerance && best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        if let Some((i, _)) = best {
            hit[i] = true;
            hits += 1;
        }
    }
    hits
}

/// Hit ratios over a single event list at each tolerance.
///
/// Errors when `gt_starts` is empty: the ratio is undefined.
pub fn hit_ratio(
    pred_starts: &[f64],
    gt_starts: &[f64],
    tolerances: &[f64],
) -> Result<Vec<HitRatioResult>> {
    if gt_starts.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(tolerances
        .iter()
        .map(|&tol| {
            let hits = count_hits(pred_starts, gt_starts, tol);
            HitRatioResult {
                tolerance: tol,
                hits,
                total_gt: gt_starts.len(),
                ratio: hits as f64 / gt_starts.len() as f64,
            }
        })
        .collect())
}

/// Micro-aggregated hit ratios: per-video hits and totals are summed before
/// the ratio is taken. Errors when the dataset holds no ground-truth events.
pub fn hit_ratio_micro(
    dataset: &[(Vec<f64>, Vec<f64>)],
    tolerances: &[f64],
) -> Result<Vec<HitRatioResult>> {
    let total_gt: usize = dataset.iter().map(|(_, g)| g.len()).sum();
    if total_gt == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(tolerances
        .iter()
        .map(|&tol| {
            let hits: usize = dataset
                .iter()
                .map(|(p, g)| count_hits(p, g, tol))
                .sum();
            HitRatioResult {
                tolerance: tol,
                hits,
                total_gt,
                ratio: hits as f64 / total_gt as f64,
            }
        })
        .collect())
}

/// Fraction of positions where the normalized labels agree.
///
/// Normalization lowercases, trims, and collapses internal whitespace.
/// Errors on a length mismatch or empty inputs.
pub fn top1_accuracy<P: AsRef<str>, G: AsRef<str>>(
    pred_labels: &[P],
    gt_labels: &[G],
) -> Result<f64> {
    if pred_labels.len() != gt_labels.len() {
        return Err(Error::LengthMismatch {
            left: pred_labels.len(),
            right: gt_labels.len(),
        });
    }
    if gt_labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let matches = pred_labels
        .iter()
        .zip(gt_labels)
        .filter(|(p, g)| normalize_label(p.as_ref()) == normalize_label(g.as_ref()))
        .count();
    Ok(matches as f64 / gt_labels.len() as f64)
}

/// Lowercased, trimmed, internal whitespace collapsed to single spaces.
pub fn normalize_label(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::TimeInterval;

    fn ti(s: f64, e: f64) -> TimeInterval {
        TimeInterval::new(s, e).unwrap()
    }

    #[test]
    fn greedy_matches_both_pairs() {
        let preds = vec![ti(0.0, 9.0), ti(11.0, 20.0)];
        let gts = vec![ti(0.0, 10.0), ti(10.0, 20.0)];
        let m = greedy_match(&preds, &gts, 0.5);
        assert_eq!(m.pairs.len(), 2);
        assert!(m.unmatched_pred.is_empty() && m.unmatched_gt.is_empty());
        for p in &m.pairs {
            assert!((p.iou - 0.9).abs() < 1e-9);
        }
    }

    #[test]
    fn greedy_empty_preds() {
        let m = greedy_match(&[], &[ti(0.0, 10.0)], 0.5);
        assert!(m.pairs.is_empty());
        assert_eq!(m.unmatched_gt, vec![0]);
    }

    #[test]
    fn greedy_identity() {
        let m = greedy_match(&[ti(0.0, 10.0)], &[ti(0.0, 10.0)], 0.7);
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.pairs[0].iou, 1.0);
    }

    #[test]
    fn prf_micro_aggregation() {
        // One perfect video, one with a stray prediction and a missed gt.
        let dataset = vec![
            (vec![ti(0.0, 10.0)], vec![ti(0.0, 10.0)]),
            (vec![ti(50.0, 55.0)], vec![ti(20.0, 30.0)]),
        ];
        let prf = prf_at_thresholds(&dataset, &[0.5]);
        assert_eq!(prf[0].true_positives, 1);
        assert_eq!(prf[0].false_positives, 1);
        assert_eq!(prf[0].false_negatives, 1);
        assert_eq!(prf[0].precision, 0.5);
        assert_eq!(prf[0].recall, 0.5);
        assert!((prf[0].f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn prf_perfect_and_empty() {
        let dataset = vec![(vec![ti(0.0, 5.0)], vec![ti(0.0, 5.0)])];
        for prf in prf_at_thresholds(&dataset, &DEFAULT_IOU_THRESHOLDS) {
            assert_eq!(prf.f1, 1.0);
        }
        for prf in prf_at_thresholds(&[], &DEFAULT_IOU_THRESHOLDS) {
            assert_eq!(prf.true_positives, 0);
            assert_eq!(prf.f1, 0.0);
        }
    }

    #[test]
    fn hit_ratio_examples() {
        let r = hit_ratio(&[0.3, 11.2], &[0.0, 10.0], &[0.5]).unwrap();
        assert_eq!(r[0].hits, 1);
        assert_eq!(r[0].ratio, 0.5);
        let r = hit_ratio(&[0.3, 11.2], &[0.0, 10.0], &[2.0]).unwrap();
        assert_eq!(r[0].ratio, 1.0);
        assert!(hit_ratio(&[1.0], &[], &[0.5]).is_err());
    }

    #[test]
    fn hit_ratio_identity() {
        let starts = [0.0, 5.5, 9.25];
        for tol in DEFAULT_HIT_TOLERANCES {
            let r = hit_ratio(&starts, &starts, &[tol]).unwrap();
            assert_eq!(r[0].ratio, 1.0);
        }
    }

    #[test]
    fn each_prediction_hits_at_most_one_event() {
        // Two predictions near one event: only one may claim it.
        assert_eq!(count_hits(&[1.0, 1.1], &[1.0], 0.5), 1);
        // One prediction cannot hit two events.
        assert_eq!(count_hits(&[1.0], &[0.9, 1.1], 0.5), 1);
    }

    #[test]
    fn top1_examples() {
        let a = top1_accuracy(
            &["venipuncture", "wound care"],
            &["venipuncture", "catheterization"],
        )
        .unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(top1_accuracy(&["x"], &["x"]).unwrap(), 1.0);
        assert_eq!(
            top1_accuracy(&["  Venipuncture "], &["venipuncture"]).unwrap(),
            1.0
        );
        assert_eq!(
            top1_accuracy(&["wound  CARE"], &["Wound Care"]).unwrap(),
            1.0
        );
        assert!(top1_accuracy(&["a"], &["a", "b"]).is_err());
        assert!(top1_accuracy::<&str, &str>(&[], &[]).is_err());
    }
}
