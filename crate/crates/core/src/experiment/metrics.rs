//! Ranking metrics: AUC and ROC curves.

use crate::error::{Error, Result};

/// Area under the ROC curve by the rank-sum (Mann-Whitney) route, with the
/// standard tie correction: a tied positive-negative pair contributes 1/2.
///
/// All bookkeeping stays in integer half-units until the final division,
/// so the result equals the pairwise definition
/// `(#(p > n) + 0.5 * #(p == n)) / (P * N)` exactly, not merely within
/// rounding. Scores are expected to be finite.
pub fn compute_auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::InvalidArgument(
            "AUC needs at least one positive and one negative score".to_string(),
        ));
    }
    let mut combined: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    combined.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sum of average ranks of the positives, doubled to stay integral:
    // a tie group occupying 1-based ranks lo..=hi has average rank
    // (lo + hi) / 2, so twice the rank sum adds (lo + hi) per member.
    let mut twice_rank_sum: u64 = 0;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i;
        while j < combined.len() && combined[j].0.total_cmp(&combined[i].0).is_eq() {
            j += 1;
        }
        let lo = (i + 1) as u64;
        let hi = j as u64;
        let group_positives = combined[i..j].iter().filter(|(_, pos)| *pos).count() as u64;
        twice_rank_sum += (lo + hi) * group_positives;
        i = j;
    }

    let p = positives.len() as u64;
    let n = negatives.len() as u64;
    // U = rank_sum - P(P+1)/2; AUC = U / (P*N). In half-units:
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2 * p * n) as f64)
}

/// ROC points swept from the strictest threshold to the loosest: one point
/// per distinct score, ties grouped, with a leading `(0, 0)`. Coordinates
/// are `(false positive rate, true positive rate)`; the last point is
/// always `(1, 1)`.
pub fn roc_points(positives: &[f64], negatives: &[f64]) -> Result<Vec<(f64, f64)>> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::InvalidArgument(
            "ROC needs at least one positive and one negative score".to_string(),
        ));
    }
    let mut combined: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    combined.sort_by(|a, b| b.0.total_cmp(&a.0));

    let p = positives.len() as f64;
    let n = negatives.len() as f64;
    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i;
        while j < combined.len() && combined[j].0.total_cmp(&combined[i].0).is_eq() {
            j += 1;
        }
        for (_, positive) in &combined[i..j] {
            if *positive {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        points.push((fp as f64 / n, tp as f64 / p));
        i = j;
    }
    Ok(points)
}

/// Trapezoid area under a ROC polyline; used to cross-check [`compute_auc`].
pub fn roc_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}
