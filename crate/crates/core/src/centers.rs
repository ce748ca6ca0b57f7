//! Initial center sets for the coreset constructions.
//!
//! Three providers are available: the exact single-facility solver for the
//! line, the random-sampling heuristic (best of `num_samples` random
//! `k`-subsets of the data), and a fixed user-supplied set.

use std::sync::{Arc, Mutex};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::{check_centers, cost_p};
use crate::types::{Dataset, Point, WeightedPoints};

/// Default number of random candidate subsets for [`SampledCenters`].
pub const DEFAULT_NUM_SAMPLES: usize = 30;

/// Up to this many points the exact 1D solver scans every candidate.
const EXHAUSTIVE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMethod {
    Exact1d,
    Sampled,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterSolution {
    pub centers: Vec<Point>,
    /// `cost_p(data, centers, p)`.
    pub objective: f64,
    pub p: u64,
    pub method: CenterMethod,
}

/// Supplies the approximate centers a coreset construction is built around.
pub trait CenterProvider {
    fn provide(&self, data: &Dataset, k: usize, p: u64) -> Result<CenterSolution>;
}

/// Sorted coordinates with prefix sums, for fast evaluation of
/// `y -> cost_p(X, {y})` on a line.
#[derive(Debug, Clone)]
pub struct SortedLine {
    xs: Vec<f64>,
    prefix: Vec<f64>,
}

impl SortedLine {
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let mut xs = coords.to_vec();
        xs.sort_unstable_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(xs.len() + 1);
        let mut run = 0.0;
        prefix.push(run);
        for &x in &xs {
            run += x;
            prefix.push(run);
        }
        Ok(Self { xs, prefix })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.xs
    }

    fn check_p(&self, p: u64) -> Result<usize> {
        let n = self.xs.len();
        if p == 0 || p > n as u64 {
            return Err(Error::POutOfRange { p, n: n as u64 });
        }
        Ok(p as usize)
    }

    /// `cost_p` for the single center `y` in `O(log n)`, via prefix sums.
    ///
    /// The top-`p` set is always some `a` smallest plus `p - a` largest
    /// coordinates; `a` is located by binary search.
    pub fn fast_cost(&self, y: f64, p: usize) -> f64 {
        let xs = &self.xs;
        let n = xs.len();
        let j = xs.partition_point(|&x| x <= y);
        let right = n - j;
        let mut lo = p.saturating_sub(right);
        let mut hi = p.min(j);
        // Largest a in [lo, hi] whose a-th left distance is at least the
        // best right distance left out.
        while lo < hi {
            let a = lo + (hi - lo).div_ceil(2);
            let left_d = y - xs[a - 1];
            let excluded_right = p - a;
            let take = if excluded_right < right {
                left_d >= xs[n - 1 - excluded_right] - y
            } else {
                true
            };
            if take {
                lo = a;
            } else {
                hi = a - 1;
            }
        }
        let a = lo;
        let b = p - a;
        let left = a as f64 * y - self.prefix[a];
        let right_sum = (self.prefix[n] - self.prefix[n - b]) - b as f64 * y;
        left + right_sum
    }

    /// `cost_p` for the single center `y`, summing the `p` largest
    /// distances in non-increasing order with two pointers.
    pub fn cost(&self, y: f64, p: u64) -> Result<f64> {
        let p = self.check_p(p)?;
        Ok(self.direct_cost(y, p))
    }

    fn direct_cost(&self, y: f64, p: usize) -> f64 {
        let xs = &self.xs;
        let (mut i, mut r) = (0usize, xs.len() - 1);
        let mut acc = 0.0;
        for _ in 0..p {
            let dl = (y - xs[i]).abs();
            let dr = (xs[r] - y).abs();
            if dl >= dr {
                acc += dl;
                i += 1;
            } else {
                acc += dr;
                r = r.wrapping_sub(1);
            }
        }
        acc
    }

    /// The exact minimizer of `y -> cost_p(X, {y})` and its cost.
    ///
    /// The objective is convex and piecewise linear with breakpoints among
    /// the data points and the midpoints `(x_(a) + x_(n-p+a)) / 2`, where the
    /// top-`p` set trades a right point for a left one. Both candidate lists
    /// are sorted; small inputs are scanned, larger ones searched by
    /// bisection on the convex sequence of candidate values.
    pub fn best_center(&self, p: u64) -> Result<(f64, f64)> {
        let p = self.check_p(p)?;
        let n = self.xs.len();
        let mids: Vec<f64> = (0..p)
            .map(|a| 0.5 * (self.xs[a] + self.xs[n - p + a]))
            .collect();
        let best = if n <= EXHAUSTIVE_LIMIT {
            let mut best = (self.xs[0], f64::INFINITY);
            for &y in self.xs.iter().chain(&mids) {
                let c = self.fast_cost(y, p);
                if c < best.1 || (c == best.1 && y < best.0) {
                    best = (y, c);
                }
            }
            best.0
        } else {
            let a = self.search_sorted(&self.xs, p);
            let b = self.search_sorted(&mids, p);
            let (ca, cb) = (self.fast_cost(a, p), self.fast_cost(b, p));
            if cb < ca || (cb == ca && b < a) {
                b
            } else {
                a
            }
        };
        Ok((best, self.direct_cost(best, p)))
    }

    /// Minimum of a convex function over sorted sample points.
    fn search_sorted(&self, cands: &[f64], p: usize) -> f64 {
        let (mut lo, mut hi) = (0usize, cands.len() - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.fast_cost(cands[mid], p) <= self.fast_cost(cands[mid + 1], p) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        // Rounding can make the sequence marginally non-unimodal; polish
        // within a small window.
        let from = lo.saturating_sub(4);
        let to = (lo + 5).min(cands.len());
        let mut best = (cands[lo], self.fast_cost(cands[lo], p));
        for &y in &cands[from..to] {
            let c = self.fast_cost(y, p);
            if c < best.1 {
                best = (y, c);
            }
        }
        best.0
    }
}

/// Exact optimal single center for p-Centrum on the line.
pub fn exact_center_1d(coords: &[f64], p: u64) -> Result<CenterSolution> {
    let line = SortedLine::new(coords)?;
    solution_from_line(&line, p)
}

fn solution_from_line(line: &SortedLine, p: u64) -> Result<CenterSolution> {
    let (y, objective) = line.best_center(p)?;
    Ok(CenterSolution {
        centers: vec![Point::new(vec![y])?],
        objective,
        p,
        method: CenterMethod::Exact1d,
    })
}

/// The candidate index subsets drawn by [`sample_best_centers`], in order.
///
/// Each candidate is `k` distinct stored-point indices drawn uniformly with
/// ChaCha8 seeded from `seed`; candidate `i` is the `i`-th draw of one
/// stream, so shorter runs see a prefix of longer ones.
pub fn sample_candidates(
    n: usize,
    k: usize,
    num_samples: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    if num_samples == 0 {
        return Err(Error::Precondition("num_samples must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..num_samples)
        .map(|_| sample(&mut rng, n, k).into_vec())
        .collect())
}

/// Centers at the given stored-point indices, with coincident points merged.
pub fn centers_from_indices<D: WeightedPoints + ?Sized>(data: &D, indices: &[usize]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(indices.len());
    for &i in indices {
        let c = data.point(i);
        if !out.iter().any(|q| q.coords() == c) {
            out.push(Point::new(c.to_vec()).expect("dataset points are finite"));
        }
    }
    out
}

/// Best of `num_samples` random `k`-subsets of the data points under
/// `cost_p`; ties go to the earliest sample.
pub fn sample_best_centers(
    data: &Dataset,
    k: usize,
    p: u64,
    num_samples: usize,
    seed: u64,
) -> Result<CenterSolution> {
    if p == 0 || p > data.total_weight() {
        return Err(Error::POutOfRange {
            p,
            n: data.total_weight(),
        });
    }
    let mut best: Option<(Vec<Point>, f64)> = None;
    for idx in sample_candidates(data.len(), k, num_samples, seed)? {
        let centers = centers_from_indices(data, &idx);
        let c = cost_p(data, &centers, p)?;
        if best.as_ref().is_none_or(|(_, b)| c < *b) {
            best = Some((centers, c));
        }
    }
    let (centers, objective) = best.expect("at least one sample");
    Ok(CenterSolution {
        centers,
        objective,
        p,
        method: CenterMethod::Sampled,
    })
}

/// The sampling heuristic as a provider. Every `p` sees the same candidate
/// subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampledCenters {
    pub num_samples: usize,
    pub seed: u64,
}

impl SampledCenters {
    pub fn new(seed: u64) -> Self {
        Self {
            num_samples: DEFAULT_NUM_SAMPLES,
            seed,
        }
    }

    pub fn with_samples(mut self, num_samples: usize) -> Self {
        self.num_samples = num_samples;
        self
    }
}

impl CenterProvider for SampledCenters {
    fn provide(&self, data: &Dataset, k: usize, p: u64) -> Result<CenterSolution> {
        sample_best_centers(data, k, p, self.num_samples, self.seed)
    }
}

/// The exact solver as a provider; only valid for `k = 1` on the line.
///
/// The sorted (expanded) coordinates of the last dataset seen are cached,
/// so repeated calls for many `p` on one dataset sort only once.
#[derive(Debug, Default)]
pub struct Exact1dCenters {
    cache: Mutex<Option<(Dataset, Arc<SortedLine>)>>,
}

impl Exact1dCenters {
    pub fn new() -> Self {
        Self::default()
    }

    fn line_for(&self, data: &Dataset) -> Result<Arc<SortedLine>> {
        let mut guard = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((cached, line)) = guard.as_ref() {
            if cached == data {
                return Ok(Arc::clone(line));
            }
        }
        let expanded: Vec<f64> = data
            .coords()
            .iter()
            .zip(data.weights())
            .flat_map(|(&c, &w)| std::iter::repeat_n(c, w as usize))
            .collect();
        let line = Arc::new(SortedLine::new(&expanded)?);
        *guard = Some((data.clone(), Arc::clone(&line)));
        Ok(line)
    }
}

impl CenterProvider for Exact1dCenters {
    fn provide(&self, data: &Dataset, k: usize, p: u64) -> Result<CenterSolution> {
        if data.dim() != 1 || k != 1 {
            return Err(Error::Precondition(format!(
                "exact solver needs d = 1 and k = 1, got d = {} and k = {k}",
                data.dim()
            )));
        }
        solution_from_line(self.line_for(data)?.as_ref(), p)
    }
}

/// A fixed center set, used for every `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedCenters(pub Vec<Point>);

impl CenterProvider for FixedCenters {
    fn provide(&self, data: &Dataset, _k: usize, p: u64) -> Result<CenterSolution> {
        check_centers(data.dim(), &self.0)?;
        Ok(CenterSolution {
            centers: self.0.clone(),
            objective: cost_p(data, &self.0, p)?,
            p,
            method: CenterMethod::Fixed,
        })
    }
}
