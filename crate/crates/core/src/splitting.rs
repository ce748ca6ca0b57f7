//! Greedy 1D interval splitting.
//!
//! Inputs are sorted coordinates with positive weights. Runs of equal
//! coordinates ("atoms") are never split across intervals, so a threshold
//! of zero yields one interval per distinct coordinate.

use crate::error::{Error, Result};
use crate::objective::stats_unchecked;
use crate::types::IntervalStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Cumulative error at most the delta threshold.
    DeltaBounded,
    /// Length at most the length threshold.
    LengthBounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// A contiguous range `start..end` of the sorted input.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
    pub weight: f64,
    pub stats: IntervalStats,
    pub rule: Rule,
}

impl Interval {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    fn build(coords: &[f64], weights: &[f64], start: usize, end: usize, rule: Rule) -> Self {
        let stats = range_stats(coords, weights, start, end);
        Self {
            start,
            end,
            weight: weights[start..end].iter().sum(),
            stats,
            rule,
        }
    }
}

/// An ordered partition of one line's sorted points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    pub intervals: Vec<Interval>,
    pub delta_threshold: Option<f64>,
    pub length_threshold: Option<f64>,
}

impl IntervalSet {
    /// Build from exclusive end positions (the last must be `coords.len()`)
    /// and the rule bounding each range.
    pub fn from_cuts(coords: &[f64], weights: &[f64], cuts: &[(usize, Rule)]) -> Self {
        let mut start = 0;
        let intervals = cuts
            .iter()
            .map(|&(end, rule)| {
                let iv = Interval::build(coords, weights, start, end, rule);
                start = end;
                iv
            })
            .collect();
        Self {
            intervals,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Exclusive end of every interval.
    pub fn ends(&self) -> Vec<usize> {
        self.intervals.iter().map(|iv| iv.end).collect()
    }

    /// Check that the intervals partition `0..n` in order and that each
    /// respects the recorded threshold of its rule.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut expected = 0;
        for iv in &self.intervals {
            if iv.start != expected || iv.end <= iv.start {
                return Err(Error::PlanMismatch(format!(
                    "interval {}..{} does not continue at {expected}",
                    iv.start, iv.end
                )));
            }
            expected = iv.end;
            let bound = match iv.rule {
                Rule::DeltaBounded => self.delta_threshold.map(|t| (iv.stats.delta, t)),
                Rule::LengthBounded => self.length_threshold.map(|t| (iv.stats.len(), t)),
            };
            if let Some((value, t)) = bound {
                if value > t {
                    return Err(Error::PlanMismatch(format!(
                        "interval {}..{} has {value} above its threshold {t}",
                        iv.start, iv.end
                    )));
                }
            }
        }
        if expected != n {
            return Err(Error::PlanMismatch(format!(
                "intervals cover {expected} of {n} points"
            )));
        }
        Ok(())
    }
}

pub(crate) fn range_stats(
    coords: &[f64],
    weights: &[f64],
    start: usize,
    end: usize,
) -> IntervalStats {
    stats_unchecked(
        coords[start..end]
            .iter()
            .copied()
            .zip(weights[start..end].iter().copied()),
    )
}

fn validate_input(coords: &[f64], weights: &[f64]) -> Result<()> {
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
                reason: "weights must be positive",
            });
        }
        if index > 0 && y < coords[index - 1] {
            return Err(Error::NotSorted { index });
        }
    }
    Ok(())
}

/// Runs of equal coordinates as `(coordinate, total weight, exclusive end)`.
fn atoms(coords: &[f64], weights: &[f64]) -> Vec<(f64, f64, usize)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for (i, (&y, &w)) in coords.iter().zip(weights).enumerate() {
        match out.last_mut() {
            Some(last) if last.0 == y => {
                last.1 += w;
                last.2 = i + 1;
            }
            _ => out.push((y, w, i + 1)),
        }
    }
    out
}

/// Cumulative error of a group grown by appending points at its right end.
///
/// Coordinates are shifted by the first one pushed. The split pointer
/// separating points at or below the mean only moves right, since the mean
/// never decreases under such pushes.
#[derive(Debug, Default)]
struct RunningDelta {
    origin: f64,
    ys: Vec<f64>,
    ws: Vec<f64>,
    w_sum: f64,
    s_sum: f64,
    split: usize,
    w_left: f64,
    s_left: f64,
}

#[derive(Debug, Clone, Copy)]
struct Snapshot {
    len: usize,
    w_sum: f64,
    s_sum: f64,
    split: usize,
    w_left: f64,
    s_left: f64,
}

impl RunningDelta {
    fn reset(&mut self, origin: f64) {
        self.origin = origin;
        self.ys.clear();
        self.ws.clear();
        self.w_sum = 0.0;
        self.s_sum = 0.0;
        self.split = 0;
        self.w_left = 0.0;
        self.s_left = 0.0;
    }

    fn push(&mut self, y: f64, w: f64) {
        let s = y - self.origin;
        self.ys.push(s);
        self.ws.push(w);
        self.w_sum += w;
        self.s_sum += w * s;
        let mean = self.s_sum / self.w_sum;
        while self.split < self.ys.len() && self.ys[self.split] <= mean {
            self.w_left += self.ws[self.split];
            self.s_left += self.ws[self.split] * self.ys[self.split];
            self.split += 1;
        }
    }

    fn delta(&self) -> f64 {
        let mean = self.s_sum / self.w_sum;
        let d = mean * self.w_left - self.s_left + (self.s_sum - self.s_left)
            - mean * (self.w_sum - self.w_left);
        d.max(0.0)
    }

    /// Magnitude of the terms cancelling in [`Self::delta`].
    fn scale(&self) -> f64 {
        self.w_sum * self.ys.last().copied().unwrap_or(0.0).abs()
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            len: self.ys.len(),
            w_sum: self.w_sum,
            s_sum: self.s_sum,
            split: self.split,
            w_left: self.w_left,
            s_left: self.s_left,
        }
    }

    fn restore(&mut self, s: Snapshot) {
        self.ys.truncate(s.len);
        self.ws.truncate(s.len);
        self.w_sum = s.w_sum;
        self.s_sum = s.s_sum;
        self.split = s.split;
        self.w_left = s.w_left;
        self.s_left = s.s_left;
    }

    /// Whether the current group's error is within `threshold`. Rounding
    /// near the threshold is settled by the two-pass `exact` evaluation.
    fn fits(&self, threshold: f64, exact: impl FnOnce() -> f64) -> bool {
        let d = self.delta();
        let band = 1e-9 * threshold + 1e-12 * self.scale();
        if d < threshold - band {
            true
        } else if d > threshold + band {
            false
        } else {
            exact() <= threshold
        }
    }
}

/// Greedy cut positions for a delta-bounded split of ascending `ys`.
/// `exact(s, e)` returns the authoritative cumulative error of `s..e`.
fn greedy_delta_cuts(
    ys: &[f64],
    ws: &[f64],
    threshold: f64,
    exact: impl Fn(usize, usize) -> f64,
) -> Vec<usize> {
    let atoms = atoms(ys, ws);
    let mut cuts = Vec::new();
    let mut rd = RunningDelta::default();
    rd.reset(atoms[0].0);
    rd.push(atoms[0].0, atoms[0].1);
    let mut start = 0;
    for j in 1..atoms.len() {
        let (y, w, end) = atoms[j];
        let snap = rd.snapshot();
        rd.push(y, w);
        if !rd.fits(threshold, || exact(start, end)) {
            rd.restore(snap);
            start = atoms[j - 1].2;
            cuts.push(start);
            rd.reset(y);
            rd.push(y, w);
        }
    }
    cuts.push(ys.len());
    cuts
}

/// Cut positions (exclusive ends) of the greedy delta split.
pub(crate) fn delta_cuts(
    coords: &[f64],
    weights: &[f64],
    threshold: f64,
    direction: Direction,
) -> Vec<usize> {
    let n = coords.len();
    match direction {
        Direction::LeftToRight => greedy_delta_cuts(coords, weights, threshold, |s, e| {
            range_stats(coords, weights, s, e).delta
        }),
        Direction::RightToLeft => {
            let ys: Vec<f64> = coords.iter().rev().map(|&y| -y).collect();
            let ws: Vec<f64> = weights.iter().rev().copied().collect();
            let mirrored = greedy_delta_cuts(&ys, &ws, threshold, |s, e| {
                range_stats(coords, weights, n - e, n - s).delta
            });
            let mut cuts: Vec<usize> = mirrored
                .iter()
                .filter(|&&e| e < n)
                .map(|&e| n - e)
                .collect();
            cuts.reverse();
            cuts.push(n);
            cuts
        }
    }
}

/// Cut positions (exclusive ends) of the greedy length split.
pub(crate) fn length_cuts(coords: &[f64], max_len: f64) -> Vec<usize> {
    let mut cuts = Vec::new();
    let mut lo = coords[0];
    for (i, &y) in coords.iter().enumerate().skip(1) {
        if y - lo > max_len && y != coords[i - 1] {
            cuts.push(i);
            lo = y;
        }
    }
    cuts.push(coords.len());
    cuts
}

fn check_threshold(t: f64, allow_zero: bool) -> Result<()> {
    let ok = t.is_finite() && (t > 0.0 || (allow_zero && t == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(t))
    }
}

/// Greedy maximal packing so every interval has cumulative error at most
/// `threshold`, scanning in `direction`.
pub fn split_by_delta(
    coords: &[f64],
    weights: &[f64],
    threshold: f64,
    direction: Direction,
) -> Result<IntervalSet> {
    validate_input(coords, weights)?;
    check_threshold(threshold, true)?;
    let cuts: Vec<(usize, Rule)> = delta_cuts(coords, weights, threshold, direction)
        .into_iter()
        .map(|e| (e, Rule::DeltaBounded))
        .collect();
    let mut set = IntervalSet::from_cuts(coords, weights, &cuts);
    set.delta_threshold = Some(threshold);
    Ok(set)
}

/// Greedy left-to-right maximal packing so every interval has length at
/// most `max_len`.
pub fn split_by_length(coords: &[f64], weights: &[f64], max_len: f64) -> Result<IntervalSet> {
    validate_input(coords, weights)?;
    check_threshold(max_len, false)?;
    let cuts: Vec<(usize, Rule)> = length_cuts(coords, max_len)
        .into_iter()
        .map(|e| (e, Rule::LengthBounded))
        .collect();
    let mut set = IntervalSet::from_cuts(coords, weights, &cuts);
    set.length_threshold = Some(max_len);
    Ok(set)
}

/// Number of intervals when points may be split fractionally, so that every
/// interval but the last has cumulative error exactly `threshold`.
///
/// Each breakpoint is found by bisection on the mass of the next point that
/// joins the current interval; the error grows monotonically with it.
pub fn fractional_split_count(coords: &[f64], weights: &[f64], threshold: f64) -> Result<usize> {
    validate_input(coords, weights)?;
    check_threshold(threshold, false)?;
    let atoms = atoms(coords, weights);
    let mut rd = RunningDelta::default();
    let stored_delta = |rd: &RunningDelta| {
        stats_unchecked(
            rd.ys
                .iter()
                .map(|s| s + rd.origin)
                .zip(rd.ws.iter().copied()),
        )
        .delta
    };
    rd.reset(atoms[0].0);
    rd.push(atoms[0].0, atoms[0].1);
    let mut count = 1;
    for &(y, w, _) in &atoms[1..] {
        let snap = rd.snapshot();
        rd.push(y, w);
        if rd.fits(threshold, || stored_delta(&rd)) {
            continue;
        }
        rd.restore(snap);
        let (mut lo, mut hi) = (0.0, w);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            rd.push(y, mid);
            let d = rd.delta();
            rd.restore(snap);
            if (d - threshold).abs() <= 1e-12 * threshold {
                lo = mid;
                break;
            }
            if d <= threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        count += 1;
        rd.reset(y);
        rd.push(y, w - lo);
    }
    Ok(count)
}
