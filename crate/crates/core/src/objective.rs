//! Clustering objectives and the 1D interval statistics they are built on.
//!
//! `cost_p` is the p-Centrum objective (sum of the `p` largest point-to-center
//! distances over the expanded multiset) and `cost_v` the ordered weighted
//! objective `sum_i v_i * d(x_(i), C)` with distances sorted non-increasing.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::types::{IntervalStats, Point, WeightVector, WeightedPoints};

/// Sum of the `p` largest entries of `values`.
///
/// The selected entries are summed in non-increasing order, so the result is
/// bit-identical to sorting the whole slice and summing its first `p`
/// entries.
pub fn top_p(values: &[f64], p: usize) -> Result<f64> {
    if p == 0 || p > values.len() {
        return Err(Error::POutOfRange {
            p: p as u64,
            n: values.len() as u64,
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let mut scratch = values.to_vec();
    Ok(top_p_in_place(&mut scratch, p))
}

fn top_p_in_place(values: &mut [f64], p: usize) -> f64 {
    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    if p < values.len() {
        values.select_nth_unstable_by(p - 1, desc);
    }
    let top = &mut values[..p];
    top.sort_unstable_by(desc);
    top.iter().sum()
}

/// Euclidean distance from `x` to the nearest center.
#[inline]
pub fn dist_to_centers(x: &[f64], centers: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for c in centers {
        let d2: f64 = x
            .iter()
            .zip(c.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if d2 < best {
            best = d2;
        }
    }
    best.sqrt()
}

pub(crate) fn check_centers(dim: usize, centers: &[Point]) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    if let Some(c) = centers.iter().find(|c| c.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: c.dim(),
        });
    }
    Ok(())
}

/// `d(x, C)` for every stored point, in storage order.
pub fn distances<D: WeightedPoints + ?Sized>(data: &D, centers: &[Point]) -> Result<Vec<f64>> {
    check_centers(data.dim(), centers)?;
    Ok((0..data.len())
        .map(|i| dist_to_centers(data.point(i), centers))
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ranked {
    pub dist: f64,
    pub weight: u64,
    pub index: usize,
}

/// Farther first; ties broken by lowest index.
#[inline]
pub(crate) fn rank_cmp(a: &Ranked, b: &Ranked) -> Ordering {
    b.dist.total_cmp(&a.dist).then(a.index.cmp(&b.index))
}

/// Weighted top-`p` sum by iterated selection, expected linear time.
///
/// Returns the sum and the boundary item together with how much of its
/// weight was taken, so callers can recover membership of the top-`p` set.
pub(crate) fn weighted_top_p(items: &mut [Ranked], p: u64) -> (f64, Ranked, u64) {
    debug_assert!(p >= 1);
    let mut lo = 0usize;
    let mut hi = items.len();
    let mut remaining = p;
    let mut acc = 0.0;
    loop {
        if hi - lo <= 32 {
            items[lo..hi].sort_unstable_by(rank_cmp);
            for it in &items[lo..hi] {
                let take = it.weight.min(remaining);
                acc += it.dist * take as f64;
                remaining -= take;
                if remaining == 0 {
                    return (acc, *it, take);
                }
            }
            unreachable!("total weight below p");
        }
        let mid = lo + (hi - lo) / 2;
        items[lo..hi].select_nth_unstable_by(mid - lo, rank_cmp);
        let w_left: u64 = items[lo..mid].iter().map(|it| it.weight).sum();
        if w_left >= remaining {
            hi = mid;
            continue;
        }
        acc += items[lo..mid]
            .iter()
            .map(|it| it.dist * it.weight as f64)
            .sum::<f64>();
        remaining -= w_left;
        let pivot = items[mid];
        let take = pivot.weight.min(remaining);
        acc += pivot.dist * take as f64;
        remaining -= take;
        if remaining == 0 {
            return (acc, pivot, take);
        }
        lo = mid + 1;
    }
}

fn check_p(p: u64, n: u64) -> Result<()> {
    if p == 0 || p > n {
        return Err(Error::POutOfRange { p, n });
    }
    Ok(())
}

/// p-Centrum cost: sum of the `p` largest `d(x, C)` over the expanded
/// multiset.
pub fn cost_p<D: WeightedPoints + ?Sized>(data: &D, centers: &[Point], p: u64) -> Result<f64> {
    check_p(p, data.total_weight())?;
    let dists = distances(data, centers)?;
    if data.is_unit_weight() {
        let mut dists = dists;
        return Ok(top_p_in_place(&mut dists, p as usize));
    }
    let mut items: Vec<(f64, u64)> = dists
        .into_iter()
        .enumerate()
        .map(|(i, d)| (d, data.weight(i)))
        .collect();
    Ok(weighted_top_sum(&mut items, p))
}

/// The value of [`weighted_top_p`] without the tie order, which does not
/// affect the sum.
fn weighted_top_sum(items: &mut [(f64, u64)], p: u64) -> f64 {
    let by_dist_desc = |a: &(f64, u64), b: &(f64, u64)| b.0.total_cmp(&a.0);
    let (mut lo, mut hi, mut remaining, mut acc) = (0usize, items.len(), p, 0.0);
    loop {
        if hi - lo <= 32 {
            items[lo..hi].sort_unstable_by(by_dist_desc);
            for &(d, w) in &items[lo..hi] {
                let take = w.min(remaining);
                acc += d * take as f64;
                remaining -= take;
                if remaining == 0 {
                    return acc;
                }
            }
            unreachable!("total weight below p");
        }
        let mid = lo + (hi - lo) / 2;
        items[lo..hi].select_nth_unstable_by(mid - lo, by_dist_desc);
        let w_left: u64 = items[lo..mid].iter().map(|it| it.1).sum();
        if w_left >= remaining {
            hi = mid;
            continue;
        }
        acc += items[lo..mid]
            .iter()
            .map(|&(d, w)| d * w as f64)
            .sum::<f64>();
        remaining -= w_left;
        let (d, w) = items[mid];
        let take = w.min(remaining);
        acc += d * take as f64;
        remaining -= take;
        if remaining == 0 {
            return acc;
        }
        lo = mid + 1;
    }
}

/// Stored points sorted by non-increasing distance to `centers` (ties by
/// lowest index), as `(distance, multiplicity)` pairs.
pub fn sorted_distances<D: WeightedPoints + ?Sized>(
    data: &D,
    centers: &[Point],
) -> Result<Vec<(f64, u64)>> {
    let dists = distances(data, centers)?;
    let mut items: Vec<Ranked> = dists
        .into_iter()
        .enumerate()
        .map(|(index, dist)| Ranked {
            dist,
            weight: data.weight(index),
            index,
        })
        .collect();
    items.sort_unstable_by(rank_cmp);
    Ok(items.into_iter().map(|it| (it.dist, it.weight)).collect())
}

/// Ordered weighted cost `sum_i v_i * d(x_(i), C)`.
pub fn cost_v<D: WeightedPoints + ?Sized>(
    data: &D,
    centers: &[Point],
    v: &WeightVector,
) -> Result<f64> {
    let n = data.total_weight();
    if v.len() as u64 != n {
        return Err(Error::WeightLength {
            expected: n,
            got: v.len(),
        });
    }
    let v = v.entries();
    if data.is_unit_weight() {
        let mut dists = distances(data, centers)?;
        dists.sort_unstable_by(|a, b| b.total_cmp(a));
        return Ok(dists.iter().zip(v).map(|(d, w)| d * w).sum());
    }
    let sorted = sorted_distances(data, centers)?;
    let mut prefix = Vec::with_capacity(v.len() + 1);
    prefix.push(0.0);
    let mut run = 0.0;
    for &w in v {
        run += w;
        prefix.push(run);
    }
    let mut rank = 0usize;
    let mut acc = 0.0;
    for (d, w) in sorted {
        let end = rank + w as usize;
        acc += d * (prefix[end] - prefix[rank]);
        rank = end;
    }
    Ok(acc)
}

/// Decompose an OWA weight vector into p-Centrum terms: every `p` with
/// `v_p - v_{p+1} > 0` (taking `v_{n+1} = 0`) paired with that difference.
pub fn owa_decompose(v: &WeightVector) -> Vec<(u64, f64)> {
    let e = v.entries();
    (0..e.len())
        .filter_map(|i| {
            let next = e.get(i + 1).copied().unwrap_or(0.0);
            let diff = e[i] - next;
            (diff > 0.0).then_some((i as u64 + 1, diff))
        })
        .collect()
}

/// Weighted mean, cumulative error about the weighted mean, and hull.
pub fn interval_stats(coords: &[f64], weights: &[f64]) -> Result<IntervalStats> {
    if coords.is_empty() {
        return Err(Error::EmptyInput);
    }
    if coords.len() != weights.len() {
        return Err(Error::WeightLength {
            expected: coords.len() as u64,
            got: weights.len(),
        });
    }
    for (index, (&y, &w)) in coords.iter().zip(weights).enumerate() {
        if !y.is_finite() || !w.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if w <= 0.0 {
            return Err(Error::InvalidWeight {
                index,
                reason: "interval weights must be positive",
            });
        }
    }
    Ok(stats_unchecked(
        coords.iter().copied().zip(weights.iter().copied()),
    ))
}

/// Stats over `(coordinate, weight)` pairs; caller guarantees non-empty
/// input with positive finite weights.
pub(crate) fn stats_unchecked<I>(items: I) -> IntervalStats
where
    I: Iterator<Item = (f64, f64)> + Clone,
{
    let origin = items.clone().next().map(|(y, _)| y).unwrap_or(0.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut w_sum = 0.0;
    let mut s_sum = 0.0;
    for (y, w) in items.clone() {
        lo = lo.min(y);
        hi = hi.max(y);
        w_sum += w;
        s_sum += w * (y - origin);
    }
    let mean = (origin + s_sum / w_sum).clamp(lo, hi);
    let delta = items.map(|(y, w)| w * (y - mean).abs()).sum();
    IntervalStats {
        mean,
        delta,
        lo,
        hi,
    }
}

/// Geometric grid of `p` values: starts at 1, ends at `n`, and each entry
/// is `ceil((1 + eps) * previous)` (capped at `n`), so every integer in
/// `[1, n]` is either on the grid or at most `(1 + eps)` times the grid
/// value below it.
pub fn p_grid(n: u64, eps: f64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let mut grid = vec![1u64];
    let mut p = 1u64;
    while p < n {
        let next = ((1.0 + eps) * p as f64).ceil() as u64;
        p = next.max(p + 1).min(n);
        grid.push(p);
    }
    Ok(grid)
}
