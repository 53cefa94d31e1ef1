//! Optimal one-to-one assignment between predicted and ground-truth boxes.
//!
//! The assignment maximizes summed IoU over all one-to-one pairings
//! (Kuhn-Munkres on the negated IoU matrix); pairs below the IoU threshold
//! are dropped *after* the assignment, so the assignment itself is
//! threshold-independent.

use std::collections::BTreeSet;

use crate::geometry::{iou, BBox};
use crate::scalar::Scalar;

/// One surviving prediction/ground-truth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair<T = f64> {
    pub pred_index: usize,
    pub gt_index: usize,
    pub iou: T,
}

/// Result of [`hungarian_match`]: each index appears at most once and every
/// surviving pair has `iou >= tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching<T = f64> {
    pub pairs: Vec<MatchedPair<T>>,
    pub matched_gt_indices: BTreeSet<usize>,
}

impl<T> Default for Matching<T> {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            matched_gt_indices: BTreeSet::new(),
        }
    }
}

impl<T: Scalar> Matching<T> {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Summed IoU over the surviving pairs.
    pub fn total_iou(&self) -> T {
        self.pairs
            .iter()
            .fold(T::zero(), |acc, p| acc + p.iou)
    }
}

/// Optimal assignment between `preds` and `gts`, keeping pairs with
/// `iou >= tau`. Requires `0 < tau <= 1`. Empty inputs yield an empty matching.
pub fn hungarian_match<T: Scalar>(preds: &[BBox<T>], gts: &[BBox<T>], tau: T) -> Matching<T> {
    debug_assert!(tau > T::zero() && tau <= T::one(), "tau must be in (0, 1]");
    if preds.is_empty() || gts.is_empty() {
        return Matching::default();
    }

    let scores: Vec<Vec<T>> = preds
        .iter()
        .map(|p| gts.iter().map(|g| iou(p, g)).collect())
        .collect();

    // The solver wants rows <= cols; transpose when predictions outnumber gts.
    let assigned: Vec<(usize, usize)> = if preds.len() <= gts.len() {
        let cost: Vec<Vec<T>> = scores
            .iter()
            .map(|row| row.iter().map(|&s| -s).collect())
            .collect();
        assign_min_cost(&cost).into_iter().enumerate().collect()
    } else {
        let cost: Vec<Vec<T>> = (0..gts.len())
            .map(|j| (0..preds.len()).map(|i| -scores[i][j]).collect())
            .collect();
        assign_min_cost(&cost)
            .into_iter()
            .enumerate()
            .map(|(gt, pred)| (pred, gt))
            .collect()
    };

    let mut pairs: Vec<MatchedPair<T>> = assigned
        .into_iter()
        .filter_map(|(pred_index, gt_index)| {
            let score = scores[pred_index][gt_index];
            (score >= tau).then_some(MatchedPair {
                pred_index,
                gt_index,
                iou: score,
            })
        })
        .collect();
    pairs.sort_by_key(|p| p.pred_index);
    let matched_gt_indices = pairs.iter().map(|p| p.gt_index).collect();
    Matching {
        pairs,
        matched_gt_indices,
    }
}

/// Kuhn-Munkres with potentials for a rectangular cost matrix with
/// `rows <= cols`. Returns the column assigned to each row; the assignment
/// minimizes total cost over all pairings that match every row.
fn assign_min_cost<T: Scalar>(cost: &[Vec<T>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    debug_assert!(n <= m);
    let inf = T::infinity();
    let none = usize::MAX;

    let mut row_potential = vec![T::zero(); n];
    let mut col_potential = vec![T::zero(); m + 1];
    // Row assigned to each column; index m is the virtual start column.
    let mut col_to_row = vec![none; m + 1];
    let mut prev_col = vec![0usize; m + 1];

    for row in 0..n {
        col_to_row[m] = row;
        let mut j0 = m;
        let mut min_reduced = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_to_row[j0];
            let mut delta = inf;
            let mut j1 = m;
            for j in 0..m {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0][j] - row_potential[i0] - col_potential[j];
                if reduced < min_reduced[j] {
                    min_reduced[j] = reduced;
                    prev_col[j] = j0;
                }
                if min_reduced[j] < delta {
                    delta = min_reduced[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    row_potential[col_to_row[j]] = row_potential[col_to_row[j]] + delta;
                    col_potential[j] = col_potential[j] - delta;
                } else {
                    min_reduced[j] = min_reduced[j] - delta;
                }
            }
            j0 = j1;
            if col_to_row[j0] == none {
                break;
            }
        }
        // Walk back along the alternating path, flipping assignments.
        while j0 != m {
            let j1 = prev_col[j0];
            col_to_row[j0] = col_to_row[j1];
            j0 = j1;
        }
    }

    let mut row_to_col = vec![none; n];
    for j in 0..m {
        if col_to_row[j] != none {
            row_to_col[col_to_row[j]] = j;
        }
    }
    row_to_col
}
