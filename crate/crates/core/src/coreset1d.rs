//! Single-`p` coreset for p-Centrum with one center on the line.
//!
//! The `p` points farthest from an optimal center `y*` are split by
//! cumulative error (those left of `y*` scanned left to right, those right
//! of it right to left); the remaining points are split by length. Each
//! interval is replaced by its mean, weighted by its cardinality.

use crate::centers::exact_center_1d;
use crate::error::{Error, Result};
use crate::splitting::{split_by_delta, split_by_length, Direction, IntervalSet};
use crate::types::WeightedCoreset;

/// The split of the input around an optimal center.
///
/// Coordinates in each part are sorted ascending; the matching `*_index`
/// vectors hold the positions in the original input.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition1D {
    pub y_star: f64,
    pub opt: f64,
    pub p: u64,
    /// Selected points at or left of `y_star`.
    pub left: Vec<f64>,
    pub left_index: Vec<usize>,
    /// Points not among the `p` farthest.
    pub middle: Vec<f64>,
    pub middle_index: Vec<usize>,
    /// Selected points right of `y_star`.
    pub right: Vec<f64>,
    pub right_index: Vec<usize>,
}

/// Split `coords` into the `p` points farthest from the optimal center
/// (ties broken by lowest index) and the rest.
pub fn partition_lqr(coords: &[f64], p: u64) -> Result<Partition1D> {
    let sol = exact_center_1d(coords, p)?;
    let y = sol.centers[0].coords()[0];
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = ((coords[a] - y).abs(), (coords[b] - y).abs());
        db.total_cmp(&da).then(a.cmp(&b))
    });
    let mut selected = vec![false; coords.len()];
    for &i in &order[..p as usize] {
        selected[i] = true;
    }
    let mut by_coord: Vec<usize> = (0..coords.len()).collect();
    by_coord.sort_by(|&a, &b| coords[a].total_cmp(&coords[b]).then(a.cmp(&b)));
    let mut part = Partition1D {
        y_star: y,
        opt: sol.objective,
        p,
        left: vec![],
        left_index: vec![],
        middle: vec![],
        middle_index: vec![],
        right: vec![],
        right_index: vec![],
    };
    for i in by_coord {
        let x = coords[i];
        let (vals, idx) = if !selected[i] {
            (&mut part.middle, &mut part.middle_index)
        } else if x <= y {
            (&mut part.left, &mut part.left_index)
        } else {
            (&mut part.right, &mut part.right_index)
        };
        vals.push(x);
        idx.push(i);
    }
    Ok(part)
}

/// A 1D coreset together with the partition and interval sets behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Coreset1D {
    pub coreset: WeightedCoreset,
    pub partition: Partition1D,
    pub left: IntervalSet,
    pub middle: IntervalSet,
    pub right: IntervalSet,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

/// Coreset for `cost_p` with an arbitrary single center on the line.
pub fn build_coreset_1d(coords: &[f64], p: u64, eps: f64) -> Result<WeightedCoreset> {
    build_coreset_1d_detailed(coords, p, eps, 1.0).map(|c| c.coreset)
}

/// As [`build_coreset_1d`], with both thresholds scaled by `slack`.
pub fn build_coreset_1d_detailed(
    coords: &[f64],
    p: u64,
    eps: f64,
    slack: f64,
) -> Result<Coreset1D> {
    check_eps(eps)?;
    if !(slack.is_finite() && slack > 0.0) {
        return Err(Error::InvalidThreshold(slack));
    }
    let partition = partition_lqr(coords, p)?;
    let delta_t = slack * 2.0 * eps * partition.opt / 21.0;
    let length_t = slack * eps * partition.opt / (3.0 * p as f64);
    let split = |vals: &[f64], dir: Direction, by_length: bool| -> Result<IntervalSet> {
        if vals.is_empty() {
            return Ok(IntervalSet::default());
        }
        let w = vec![1.0; vals.len()];
        // Zero thresholds leave one interval per distinct coordinate.
        if by_length && length_t > 0.0 {
            split_by_length(vals, &w, length_t)
        } else {
            split_by_delta(vals, &w, if by_length { 0.0 } else { delta_t }, dir)
        }
    };
    let left = split(&partition.left, Direction::LeftToRight, false)?;
    let middle = split(&partition.middle, Direction::LeftToRight, true)?;
    let right = split(&partition.right, Direction::RightToLeft, false)?;
    let entries = [&left, &middle, &right]
        .into_iter()
        .flat_map(|set| set.intervals.iter())
        .map(|iv| (vec![iv.stats.mean], iv.len() as u64));
    let coreset = WeightedCoreset::from_entries(1, entries)?;
    Ok(Coreset1D {
        coreset,
        partition,
        left,
        middle,
        right,
    })
}
