//! Coresets in `R^d`: the single-`p` p-Centrum coreset and the simultaneous
//! coreset for every non-increasing weight vector.
//!
//! Points are first projected onto lines through approximate centers. On
//! each line, the points among the `p` farthest from the centers are split
//! by cumulative error, the others by length, and each interval becomes its
//! weighted mean. The simultaneous build overlays the splits for every `p`
//! on a geometric grid.

use std::cmp::Ordering;

use crate::centers::{CenterProvider, CenterSolution};
use crate::error::{Error, Result};
use crate::objective::{dist_to_centers, p_grid, rank_cmp, weighted_top_p, Ranked};
use crate::projection::{project_with_cap, ProjectedInstance, DEFAULT_MAX_LINES};
use crate::splitting::{delta_cuts, length_cuts, range_stats, Direction, IntervalSet, Rule};
use crate::types::{Dataset, Point, WeightedCoreset, WeightedPoints};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoresetParams {
    pub eps: f64,
    /// Net parameter for the projection; defaults to `eps`.
    pub net_eps: Option<f64>,
    /// Multiplier applied to both split thresholds.
    pub slack: f64,
    pub max_lines: usize,
}

impl CoresetParams {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            net_eps: None,
            slack: 1.0,
            max_lines: DEFAULT_MAX_LINES,
        }
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    pub fn with_net_eps(mut self, net_eps: f64) -> Self {
        self.net_eps = Some(net_eps);
        self
    }

    pub fn net_eps(&self) -> f64 {
        self.net_eps.unwrap_or(self.eps)
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidEpsilon(self.eps));
        }
        let net = self.net_eps();
        if !(net.is_finite() && net > 0.0) {
            return Err(Error::InvalidEpsilon(net));
        }
        if !(self.slack.is_finite() && self.slack > 0.0) {
            return Err(Error::InvalidThreshold(self.slack));
        }
        Ok(())
    }
}

/// The split of one line for one `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePlan {
    /// Intervals over the line's entries in sorted order.
    pub intervals: IntervalSet,
    /// Contribution of this line's points to `apx`.
    pub apx_l: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSplitPlan {
    pub p: u64,
    pub k: usize,
    pub eps: f64,
    /// `cost_p` of the projected points with respect to the centers.
    pub apx: f64,
    pub lines: Vec<LinePlan>,
}

impl LineSplitPlan {
    pub fn num_intervals(&self) -> usize {
        self.lines.iter().map(|l| l.intervals.len()).sum()
    }
}

/// Per-line arrays derived once from a projection.
struct LineData {
    anchor: Vec<f64>,
    direction: Vec<f64>,
    coords: Vec<f64>,
    weights: Vec<f64>,
    counts: Vec<u64>,
    sources: Vec<usize>,
    /// Projected points, row-major.
    points: Vec<f64>,
    /// Exclusive ends of runs of equal coordinates.
    atom_ends: Vec<usize>,
}

fn line_data(proj: &ProjectedInstance) -> Vec<LineData> {
    proj.lines
        .iter()
        .zip(&proj.entries)
        .map(|(line, entries)| {
            let coords: Vec<f64> = entries.iter().map(|e| e.coord).collect();
            let mut atom_ends = Vec::new();
            for i in 1..=coords.len() {
                if i == coords.len() || coords[i] != coords[i - 1] {
                    atom_ends.push(i);
                }
            }
            LineData {
                anchor: line.anchor.coords().to_vec(),
                direction: line.direction.clone(),
                points: entries
                    .iter()
                    .flat_map(|e| line.point_at(e.coord))
                    .collect(),
                weights: entries.iter().map(|e| e.weight as f64).collect(),
                counts: entries.iter().map(|e| e.weight).collect(),
                sources: entries.iter().map(|e| e.source).collect(),
                coords,
                atom_ends,
            }
        })
        .collect()
}

/// Cut positions for every line under one `p`.
struct PlanCuts {
    apx: f64,
    apx_l: Vec<f64>,
    delta_t: Vec<f64>,
    length_t: f64,
    cuts: Vec<Vec<(usize, Rule)>>,
}

fn plan_cuts(
    lines: &[LineData],
    centers: &[Point],
    p: u64,
    k: usize,
    params: &CoresetParams,
) -> Result<PlanCuts> {
    let dim = centers.first().ok_or(Error::EmptyCenters)?.dim();
    let n: u64 = lines.iter().flat_map(|l| &l.counts).sum();
    if p == 0 || p > n {
        return Err(Error::POutOfRange { p, n });
    }
    if k == 0 {
        return Err(Error::KOutOfRange { k, n: n as usize });
    }
    let dists: Vec<Vec<f64>> = lines
        .iter()
        .map(|l| {
            l.points
                .chunks_exact(dim)
                .map(|x| dist_to_centers(x, centers))
                .collect()
        })
        .collect();
    let mut items: Vec<Ranked> = Vec::with_capacity(lines.iter().map(|l| l.coords.len()).sum());
    for (l, d) in lines.iter().zip(&dists) {
        for (j, &dist) in d.iter().enumerate() {
            items.push(Ranked {
                dist,
                weight: l.counts[j],
                index: l.sources[j],
            });
        }
    }
    let (_, pivot, take) = weighted_top_p(&mut items, p);
    drop(items);

    let mut apx_l = vec![0.0; lines.len()];
    let mut in_top: Vec<Vec<bool>> = Vec::with_capacity(lines.len());
    for (li, (l, d)) in lines.iter().zip(&dists).enumerate() {
        let mut flags = vec![false; d.len()];
        for (j, &dist) in d.iter().enumerate() {
            let r = Ranked {
                dist,
                weight: l.counts[j],
                index: l.sources[j],
            };
            match rank_cmp(&r, &pivot) {
                Ordering::Less => {
                    flags[j] = true;
                    apx_l[li] += dist * l.counts[j] as f64;
                }
                Ordering::Equal => {
                    flags[j] = true;
                    apx_l[li] += dist * take as f64;
                }
                Ordering::Greater => {}
            }
        }
        in_top.push(flags);
    }
    let apx: f64 = apx_l.iter().sum();
    let length_t = params.slack * params.eps * apx / (3.0 * p as f64);
    let delta_t: Vec<f64> = apx_l
        .iter()
        .map(|a| params.slack * 2.0 * params.eps * a / (21.0 * k as f64))
        .collect();

    let cuts = lines
        .iter()
        .enumerate()
        .map(|(li, l)| {
            if apx == 0.0 {
                return l
                    .atom_ends
                    .iter()
                    .map(|&e| (e, Rule::DeltaBounded))
                    .collect();
            }
            let mut tcs: Vec<f64> = centers
                .iter()
                .map(|c| {
                    c.coords()
                        .iter()
                        .zip(&l.anchor)
                        .zip(&l.direction)
                        .map(|((c, a), u)| (c - a) * u)
                        .sum()
                })
                .collect();
            tcs.sort_by(f64::total_cmp);
            tcs.dedup();
            cut_line(l, &in_top[li], &tcs, delta_t[li], length_t)
        })
        .collect();
    Ok(PlanCuts {
        apx,
        apx_l,
        delta_t,
        length_t,
        cuts,
    })
}

/// Segment a line into same-class runs (far runs also cut at projected
/// centers) and split each run by its rule.
fn cut_line(
    l: &LineData,
    in_top: &[bool],
    tcs: &[f64],
    delta_t: f64,
    length_t: f64,
) -> Vec<(usize, Rule)> {
    let mut segments: Vec<(usize, usize, bool)> = Vec::new();
    let mut start = 0;
    for &end in &l.atom_ends {
        let far = in_top[start..end].iter().any(|&b| b);
        let y = l.coords[start];
        match segments.last_mut() {
            Some(seg) if seg.2 == far && !(far && crosses_center(tcs, l.coords[seg.1 - 1], y)) => {
                seg.1 = end
            }
            _ => segments.push((start, end, far)),
        }
        start = end;
    }
    let mut cuts = Vec::new();
    for (s, e, far) in segments {
        let ys = &l.coords[s..e];
        if far {
            let (lo, hi) = (ys[0], ys[ys.len() - 1]);
            let right = tcs.get(tcs.partition_point(|&t| t < hi)).map(|&t| t - hi);
            let left = tcs[..tcs.partition_point(|&t| t < lo)]
                .last()
                .map(|&t| lo - t);
            let dir = match (left, right) {
                (_, Some(r)) if left.is_none_or(|lft| r <= lft) => Direction::LeftToRight,
                _ => Direction::RightToLeft,
            };
            cuts.extend(
                delta_cuts(ys, &l.weights[s..e], delta_t, dir)
                    .into_iter()
                    .map(|c| (s + c, Rule::DeltaBounded)),
            );
        } else {
            cuts.extend(
                length_cuts(ys, length_t)
                    .into_iter()
                    .map(|c| (s + c, Rule::LengthBounded)),
            );
        }
    }
    cuts
}

/// Whether some projected center `t` satisfies `prev <= t < next`.
fn crosses_center(tcs: &[f64], prev: f64, next: f64) -> bool {
    let i = tcs.partition_point(|&t| t < prev);
    tcs.get(i).is_some_and(|&t| t < next)
}

fn emit(lines: &[LineData], dim: usize, ends_per_line: &[Vec<usize>]) -> Result<WeightedCoreset> {
    let mut entries = Vec::new();
    for (l, ends) in lines.iter().zip(ends_per_line) {
        let mut start = 0;
        for &end in ends {
            let mean = range_stats(&l.coords, &l.weights, start, end).mean;
            let weight: u64 = l.counts[start..end].iter().sum();
            let point: Vec<f64> = l
                .anchor
                .iter()
                .zip(&l.direction)
                .map(|(a, u)| a + mean * u)
                .collect();
            entries.push((point, weight));
            start = end;
        }
    }
    WeightedCoreset::from_entries(dim, entries)
}

fn to_plan(lines: &[LineData], cuts: PlanCuts, p: u64, k: usize, eps: f64) -> LineSplitPlan {
    let PlanCuts {
        apx,
        apx_l,
        delta_t,
        length_t,
        cuts,
    } = cuts;
    let plans = lines
        .iter()
        .zip(cuts)
        .enumerate()
        .map(|(li, (l, c))| {
            let mut intervals = IntervalSet::from_cuts(&l.coords, &l.weights, &c);
            intervals.delta_threshold = Some(delta_t[li]);
            intervals.length_threshold = Some(length_t);
            LinePlan {
                intervals,
                apx_l: apx_l[li],
            }
        })
        .collect();
    LineSplitPlan {
        p,
        k,
        eps,
        apx,
        lines: plans,
    }
}

/// Split every line of `proj` for one `p` around the centers `centers`
/// (the set the projection was built from, or a subset of it).
pub fn split_lines_for_p(
    proj: &ProjectedInstance,
    centers: &[Point],
    p: u64,
    k: usize,
    params: &CoresetParams,
) -> Result<LineSplitPlan> {
    params.validate()?;
    let lines = line_data(proj);
    let cuts = plan_cuts(&lines, centers, p, k, params)?;
    Ok(to_plan(&lines, cuts, p, k, params.eps))
}

/// The coreset a plan describes: weighted means of its intervals.
pub fn coreset_from_plan(
    proj: &ProjectedInstance,
    plan: &LineSplitPlan,
) -> Result<WeightedCoreset> {
    let lines = line_data(proj);
    let ends: Vec<Vec<usize>> = plan.lines.iter().map(|l| l.intervals.ends()).collect();
    emit(&lines, proj.dim, &ends)
}

/// A p-Centrum coreset with the intermediate artifacts of its build.
#[derive(Debug, Clone, PartialEq)]
pub struct PcentrumBuild {
    pub coreset: WeightedCoreset,
    pub centers: CenterSolution,
    pub projection: ProjectedInstance,
    pub plan: LineSplitPlan,
}

/// Coreset for `cost_p` with any `k` centers.
pub fn build_pcentrum_coreset(
    data: &Dataset,
    k: usize,
    p: u64,
    params: &CoresetParams,
    provider: &dyn CenterProvider,
) -> Result<WeightedCoreset> {
    build_pcentrum_coreset_detailed(data, k, p, params, provider).map(|b| b.coreset)
}

pub fn build_pcentrum_coreset_detailed(
    data: &Dataset,
    k: usize,
    p: u64,
    params: &CoresetParams,
    provider: &dyn CenterProvider,
) -> Result<PcentrumBuild> {
    params.validate()?;
    let centers = provider.provide(data, k, p)?;
    let projection = project_with_cap(data, &centers.centers, params.net_eps(), params.max_lines)?;
    let lines = line_data(&projection);
    let cuts = plan_cuts(&lines, &centers.centers, p, k, params)?;
    let plan = to_plan(&lines, cuts, p, k, params.eps);
    let ends: Vec<Vec<usize>> = plan.lines.iter().map(|l| l.intervals.ends()).collect();
    let coreset = emit(&lines, data.dim(), &ends)?;
    Ok(PcentrumBuild {
        coreset,
        centers,
        projection,
        plan,
    })
}

/// Common refinement of partitions of the same `n` sorted points: the
/// union of all cut positions. Every output interval is a subset of one
/// interval of each input and carries the rule of its interval in the
/// first input.
pub fn combine_interval_sets(
    plans: &[IntervalSet],
    coords: &[f64],
    weights: &[f64],
) -> Result<IntervalSet> {
    let n = coords.len();
    if weights.len() != n {
        return Err(Error::WeightLength {
            expected: n as u64,
            got: weights.len(),
        });
    }
    let first = plans
        .first()
        .ok_or(Error::PlanMismatch("no plans given".into()))?;
    for plan in plans {
        let structural = IntervalSet {
            intervals: plan.intervals.clone(),
            delta_threshold: None,
            length_threshold: None,
        };
        structural.validate(n)?;
    }
    let mut ends: Vec<usize> = plans.iter().flat_map(|p| p.ends()).collect();
    ends.sort_unstable();
    ends.dedup();
    let mut parent = 0;
    let cuts: Vec<(usize, Rule)> = ends
        .into_iter()
        .map(|e| {
            while first.intervals[parent].end < e {
                parent += 1;
            }
            (e, first.intervals[parent].rule)
        })
        .collect();
    Ok(IntervalSet::from_cuts(coords, weights, &cuts))
}

/// A simultaneous coreset with the intermediate artifacts of its build.
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousBuild {
    pub coreset: WeightedCoreset,
    /// The grid of `p` values the coreset was built for.
    pub grid: Vec<u64>,
    /// Union of the per-`p` centers.
    pub centers: Vec<Point>,
    pub num_lines: usize,
}

/// Coreset for every `cost_p` and hence every Ordered k-Median objective.
pub fn build_simultaneous_coreset(
    data: &Dataset,
    k: usize,
    params: &CoresetParams,
    provider: &dyn CenterProvider,
) -> Result<WeightedCoreset> {
    build_simultaneous_coreset_detailed(data, k, params, provider).map(|b| b.coreset)
}

pub fn build_simultaneous_coreset_detailed(
    data: &Dataset,
    k: usize,
    params: &CoresetParams,
    provider: &dyn CenterProvider,
) -> Result<SimultaneousBuild> {
    params.validate()?;
    let grid = p_grid(data.total_weight(), params.eps)?;
    let per_p: Vec<CenterSolution> = grid
        .iter()
        .map(|&p| provider.provide(data, k, p))
        .collect::<Result<_>>()?;
    let mut union: Vec<Point> = Vec::new();
    for sol in &per_p {
        for c in &sol.centers {
            if !union.iter().any(|u| u.coords() == c.coords()) {
                union.push(c.clone());
            }
        }
    }
    let projection = project_with_cap(data, &union, params.net_eps(), params.max_lines)?;
    let lines = line_data(&projection);
    let mut ends: Vec<Vec<usize>> = vec![Vec::new(); lines.len()];
    for (sol, &p) in per_p.iter().zip(&grid) {
        let cuts = plan_cuts(&lines, &sol.centers, p, k, params)?;
        for (acc, c) in ends.iter_mut().zip(&cuts.cuts) {
            acc.extend(c.iter().map(|&(e, _)| e));
            acc.sort_unstable();
            acc.dedup();
        }
    }
    let coreset = emit(&lines, data.dim(), &ends)?;
    Ok(SimultaneousBuild {
        coreset,
        grid,
        centers: union,
        num_lines: projection.lines.len(),
    })
}
