//! Caption-quality scoring: Rouge-L and token-level F1.
//!
//! Scores apply only to caption pairs whose segments were matched by the
//! localization step; unmatched segments contribute nothing. Tokenization is
//! deliberately plain: lowercase, strip punctuation, split on whitespace.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::matching::MatchResult;
use crate::temporal::ActionSegment;

/// Tokens produced by [`normalize`]; the only way to build one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lowercases, maps every non-alphanumeric character to a space, and splits
/// on whitespace. Empty input yields an empty sequence.
pub fn normalize(text: &str) -> TokenSequence {
    let cleaned: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    TokenSequence(
        cleaned
            .split_whitespace()
            .map(|t| t.to_lowercase())
            .collect(),
    )
}

/// Rouge-L: F-measure (β = 1) over the longest common subsequence.
///
/// With `L` the LCS length, recall is `L/|reference|`, precision is
/// `L/|candidate|`, and the score is their harmonic mean; 0 when either
/// sequence is empty.
pub fn rouge_l(reference: &TokenSequence, candidate: &TokenSequence) -> f64 {
    if reference.is_empty() || candidate.is_empty() {
        return 0.0;
    }
    let l = lcs_length(reference.tokens(), candidate.tokens()) as f64;
    let recall = l / reference.len() as f64;
    let precision = l / candidate.len() as f64;
    if precision + recall <= 0.0 {
        return 0.0;
    }
    2.0 * precision * recall / (precision + recall)
}

/// Token-level F1 over multiset overlap.
///
/// Duplicate tokens count up to their multiplicity on each side.
pub fn token_f1(reference: &TokenSequence, candidate: &TokenSequence) -> f64 {
    if reference.is_empty() || candidate.is_empty() {
        return 0.0;
    }
    let mut ref_counts: HashMap<&str, usize> = HashMap::new();
    for t in reference.tokens() {
        *ref_counts.entry(t.as_str()).or_insert(0) += 1;
    }
    let mut overlap = 0usize;
    for t in candidate.tokens() {
        if let Some(c) = ref_counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / candidate.len() as f64;
    let recall = overlap as f64 / reference.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// LCS length with a rolling row; O(|a|·|b|) time, O(min) memory.
fn lcs_length(a: &[String], b: &[String]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; short.len() + 1];
    let mut curr = vec![0usize; short.len() + 1];
    for x in long {
        for (j, y) in short.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// Averaged Rouge-L and token F1 over matched caption pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CaptionScore {
    pub rouge_l: f64,
    pub token_f1: f64,
}

/// Scores every matched (prediction, ground truth) caption pair.
///
/// Indices in `matches` must refer into the given segment lists.
pub fn caption_pair_scores(
    matches: &MatchResult,
    pred_segments: &[ActionSegment],
    gt_segments: &[ActionSegment],
) -> Vec<CaptionScore> {
    matches
        .pairs
        .iter()
        .map(|p| {
            let reference = normalize(gt_segments[p.gt_index].caption());
            let candidate = normalize(pred_segments[p.pred_index].caption());
            CaptionScore {
                rouge_l: rouge_l(&reference, &candidate),
                token_f1: token_f1(&reference, &candidate),
            }
        })
        .collect()
}

/// Arithmetic mean of the matched-pair scores; zeros when nothing matched.
pub fn score_matched_captions(
    matches: &MatchResult,
    pred_segments: &[ActionSegment],
    gt_segments: &[ActionSegment],
) -> CaptionScore {
    mean_caption_score(&caption_pair_scores(matches, pred_segments, gt_segments))
}

/// Mean of individual pair scores; zeros for an empty list.
pub fn mean_caption_score(scores: &[CaptionScore]) -> CaptionScore {
    if scores.is_empty() {
        return CaptionScore::default();
    }
    let n = scores.len() as f64;
    CaptionScore {
        rouge_l: scores.iter().map(|s| s.rouge_l).sum::<f64>() / n,
        token_f1: scores.iter().map(|s| s.token_f1).sum::<f64>() / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::greedy_match;
    use crate::temporal::TimeInterval;

    #[test]
    fn normalize_examples() {
        assert_eq!(
            normalize("Cleans the site, with alcohol.").tokens(),
            ["cleans", "the", "site", "with", "alcohol"]
        );
        assert!(normalize("").is_empty());
        assert_eq!(normalize("HAND   hygiene").tokens(), ["hand", "hygiene"]);
        assert_eq!(normalize("...!!!").tokens(), Vec::<String>::new().as_slice());
    }

    #[test]
    fn rouge_l_examples() {
        let r = normalize("cleans the site with alcohol");
        assert_eq!(rouge_l(&r, &r), 1.0);

        let c = normalize("cleans site with alcohol");
        // LCS 4: recall 0.8, precision 1.0.
        assert!((rouge_l(&r, &c) - 8.0 / 9.0).abs() < 1e-6);

        let d = normalize("unrelated words entirely");
        assert_eq!(rouge_l(&r, &d), 0.0);
        assert_eq!(rouge_l(&normalize(""), &r), 0.0);
    }

    #[test]
    fn token_f1_examples() {
        let r = normalize("a b c");
        let c = normalize("a b d");
        assert!((token_f1(&r, &c) - 2.0 / 3.0).abs() < 1e-6);

        assert_eq!(token_f1(&r, &r), 1.0);

        // Multiset counting respects duplicates: overlap 1, P=1, R=1/3.
        let r = normalize("a a b");
        let c = normalize("a");
        assert!((token_f1(&r, &c) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn token_f1_order_insensitive() {
        let r = normalize("c b a");
        let c = normalize("a b c");
        assert_eq!(token_f1(&r, &c), 1.0);
        assert!(rouge_l(&r, &c) < 1.0);
    }

    #[test]
    fn matched_caption_aggregation() {
        let ti = |s, e| TimeInterval::new(s, e).unwrap();
        let gt = vec![
            ActionSegment::new(ti(0.0, 5.0), "washes hands").unwrap(),
            ActionSegment::new(ti(5.0, 10.0), "applies gloves").unwrap(),
        ];
        let pred = vec![
            ActionSegment::new(ti(0.0, 5.0), "washes hands").unwrap(),
            ActionSegment::new(ti(5.0, 10.0), "removes gloves").unwrap(),
        ];
        let m = greedy_match(
            &pred.iter().map(|s| s.interval()).collect::<Vec<_>>(),
            &gt.iter().map(|s| s.interval()).collect::<Vec<_>>(),
            0.3,
        );
        let score = score_matched_captions(&m, &pred, &gt);
        // Pair scores are 1.0 and 0.5; the mean is 0.75.
        assert!((score.rouge_l - 0.75).abs() < 1e-12);
        assert!((score.token_f1 - 0.75).abs() < 1e-12);

        let empty = MatchResult {
            pairs: vec![],
            unmatched_pred: vec![],
            unmatched_gt: vec![],
        };
        let zeros = score_matched_captions(&empty, &pred, &gt);
        assert_eq!(zeros, CaptionScore::default());
    }
}
