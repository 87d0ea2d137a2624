//! Boundary-detection scoring: tolerance-matched precision, recall and
//! F-measure, plus the per-sequence sweep over segment counts that reports
//! the cut with maximal F.
//!
//! Matching is one-to-one: a predicted boundary `p` may pair with a ground
//! truth boundary `g` when `|p - g| <= tolerance` (inclusive). Pairs are
//! chosen by ascending distance (ties toward the smaller predicted, then
//! truth, index), skipping any pick that would leave fewer total matches
//! than the maximum attainable, so the reported cardinality always equals
//! that of an optimal assignment.

use crate::error::{Error, Result};
use crate::segtree::{cut_tree, MergeTree, Segmentation};

/// Outcome of scoring one segmentation against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// Matched `(predicted, truth)` boundary pairs, sorted by predicted index.
    pub matches: Vec<(usize, usize)>,
    /// Segment count of the scored segmentation.
    pub n_segments: usize,
    /// Matching tolerance in frames.
    pub tolerance: usize,
}

fn check_same_len(predicted: &Segmentation, truth: &Segmentation) -> Result<()> {
    if predicted.n_frames() != truth.n_frames() {
        return Err(Error::MismatchedSequenceLength {
            left: predicted.n_frames(),
            right: truth.n_frames(),
        });
    }
    Ok(())
}

/// Size of a maximum one-to-one matching between two sorted boundary lists
/// under the tolerance. The two-pointer sweep is optimal here: whenever the
/// current heads are within tolerance, some maximum matching pairs them.
fn max_matching_size(pred: &[usize], truth: &[usize], tolerance: usize) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < pred.len() && j < truth.len() {
        if pred[i].abs_diff(truth[j]) <= tolerance {
            count += 1;
            i += 1;
            j += 1;
        } else if pred[i] < truth[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    count
}

/// Maximum-cardinality one-to-one matching between predicted and truth
/// boundaries subject to `|p - g| <= tolerance`, preferring pairs with the
/// smallest distance (ties: smaller predicted index, then smaller truth
/// index).
pub fn match_boundaries(
    predicted: &Segmentation,
    truth: &Segmentation,
    tolerance: usize,
) -> Result<Vec<(usize, usize)>> {
    check_same_len(predicted, truth)?;
    let pred = predicted.boundaries();
    let gt = truth.boundaries();

    let target = max_matching_size(pred, gt, tolerance);
    if target == 0 {
        return Ok(Vec::new());
    }

    let mut pairs = Vec::new();
    for (pi, &p) in pred.iter().enumerate() {
        for (gi, &g) in gt.iter().enumerate() {
            if p.abs_diff(g) <= tolerance {
                pairs.push((p.abs_diff(g), pi, gi));
            }
        }
    }
    pairs.sort_unstable_by_key(|&(d, pi, gi)| (d, pred[pi], gt[gi]));

    let mut used_p = vec![false; pred.len()];
    let mut used_g = vec![false; gt.len()];
    let mut selected: Vec<(usize, usize)> = Vec::with_capacity(target);
    let mut scratch_p = Vec::with_capacity(pred.len());
    let mut scratch_g = Vec::with_capacity(gt.len());
    for &(_, pi, gi) in &pairs {
        if selected.len() == target {
            break;
        }
        if used_p[pi] || used_g[gi] {
            continue;
        }
        used_p[pi] = true;
        used_g[gi] = true;
        scratch_p.clear();
        scratch_g.clear();
        scratch_p.extend(pred.iter().enumerate().filter(|(i, _)| !used_p[*i]).map(|(_, &v)| v));
        scratch_g.extend(gt.iter().enumerate().filter(|(i, _)| !used_g[*i]).map(|(_, &v)| v));
        let rest = max_matching_size(&scratch_p, &scratch_g, tolerance);
        if selected.len() + 1 + rest == target {
            selected.push((pred[pi], gt[gi]));
        } else {
            // Taking this pair would cost a match elsewhere; skip it.
            used_p[pi] = false;
            used_g[gi] = false;
        }
    }

    selected.sort_unstable();
    Ok(selected)
}

/// Score `predicted` against `truth`: precision over predicted boundaries,
/// recall over truth boundaries, F-measure as their harmonic mean with the
/// 0/0 case defined as 0.
pub fn f_measure(
    predicted: &Segmentation,
    truth: &Segmentation,
    tolerance: usize,
) -> Result<EvalReport> {
    check_same_len(predicted, truth)?;
    let matches = match_boundaries(predicted, truth, tolerance)?;
    let n_matched = matches.len() as f64;
    let precision = if predicted.boundaries().is_empty() {
        0.0
    } else {
        n_matched / predicted.boundaries().len() as f64
    };
    let recall = if truth.boundaries().is_empty() {
        0.0
    } else {
        n_matched / truth.boundaries().len() as f64
    };
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(EvalReport {
        precision,
        recall,
        f_measure: f,
        matches,
        n_segments: predicted.n_segments(),
        tolerance,
    })
}

/// Evaluate every cut of the tree at `1..=max_segments` segments and
/// return the report with maximal F-measure (ties: smallest segment
/// count).
pub fn best_f_over_cuts(
    tree: &MergeTree,
    truth: &Segmentation,
    tolerance: usize,
    max_segments: usize,
) -> Result<EvalReport> {
    if max_segments < 1 || max_segments > tree.n_frames() {
        return Err(Error::SegmentCountOutOfRange {
            got: max_segments,
            max: tree.n_frames(),
        });
    }
    let mut best: Option<EvalReport> = None;
    for n in 1..=max_segments {
        let cut = cut_tree(tree, n)?;
        let report = f_measure(&cut, truth, tolerance)?;
        let better = match &best {
            None => true,
            Some(b) => report.f_measure > b.f_measure,
        };
        if better {
            best = Some(report);
        }
    }
    Ok(best.expect("sweep covers at least one cut"))
}

/// Default sweep ceiling: `min(K, 2 * truth boundary count + 20)`, keeping
/// per-sequence sweeps cheap while comfortably covering the true count.
pub fn default_max_segments(n_frames: usize, n_truth_boundaries: usize) -> usize {
    n_frames.min(2 * n_truth_boundaries + 20)
}
