//! Reduction to lines: every point moves to its nearest line among the lines
//! through each center along the directions of an `eps`-net.

use crate::error::{Error, Result};
use crate::objective::check_centers;
use crate::types::{Dataset, Point, WeightedPoints};

/// Default cap on the number of lines a projection may create.
pub const DEFAULT_MAX_LINES: usize = 1_000_000;

/// Unit vectors covering the half-sphere: every unit `u` has a member `w`
/// with `min(|u - w|, |u + w|) <= eps`.
///
/// In the plane this is a uniform angular grid over `[0, pi)`. From three
/// dimensions on it is a lattice of cell centers on the `d` positive faces
/// of the cube `[-1, 1]^d`, pushed radially onto the sphere.
pub fn direction_net(d: usize, eps: f64) -> Result<Vec<Vec<f64>>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    Ok(match d {
        1 => vec![vec![1.0]],
        2 => {
            let m = planar_count(eps);
            (0..m)
                .map(|j| {
                    let a = std::f64::consts::PI * j as f64 / m as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect()
        }
        _ => {
            let m = face_cells(d, eps);
            let cells = m.pow((d - 1) as u32);
            let mut out = Vec::with_capacity(d * cells);
            for axis in 0..d {
                for cell in 0..cells {
                    let mut v = Vec::with_capacity(d);
                    let mut rest = cell;
                    for j in 0..d {
                        if j == axis {
                            v.push(1.0);
                        } else {
                            let i = rest % m;
                            rest /= m;
                            v.push(-1.0 + (2 * i + 1) as f64 / m as f64);
                        }
                    }
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|x| *x /= norm);
                    out.push(v);
                }
            }
            out
        }
    })
}

fn planar_count(eps: f64) -> usize {
    if eps >= 2.0 {
        return 1;
    }
    let theta = 2.0 * (eps / 2.0).asin();
    (std::f64::consts::PI / theta).ceil() as usize
}

fn face_cells(d: usize, eps: f64) -> usize {
    (((d - 1) as f64).sqrt() / eps).ceil().max(1.0) as usize
}

/// Size of [`direction_net`] without building it, as a float so huge
/// counts do not overflow.
pub fn direction_net_size(d: usize, eps: f64) -> f64 {
    match d {
        0 => 0.0,
        1 => 1.0,
        2 => planar_count(eps) as f64,
        _ => d as f64 * (face_cells(d, eps) as f64).powi((d - 1) as i32),
    }
}

/// The line through `anchor` along the unit vector `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub index: usize,
    pub anchor: Point,
    pub direction: Vec<f64>,
}

impl Line {
    /// The point at signed offset `t` from the anchor.
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.anchor
            .coords()
            .iter()
            .zip(&self.direction)
            .map(|(a, u)| a + t * u)
            .collect()
    }

    /// Signed offset of the orthogonal projection of `x`.
    pub fn coordinate_of(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.anchor.coords())
            .zip(&self.direction)
            .map(|((x, a), u)| (x - a) * u)
            .sum()
    }
}

/// One projected input point on a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineEntry {
    /// Signed offset from the line's anchor.
    pub coord: f64,
    pub weight: u64,
    /// Index of the stored point in the input dataset.
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedInstance {
    pub dim: usize,
    pub lines: Vec<Line>,
    /// Per line, entries sorted by `(coord, source)`.
    pub entries: Vec<Vec<LineEntry>>,
    /// Line of every input point.
    pub assignment: Vec<usize>,
    pub net_eps: f64,
}

impl ProjectedInstance {
    /// The projected dataset in input order, multiplicities kept.
    pub fn to_dataset(&self) -> Dataset {
        let n = self.assignment.len();
        let mut coords = vec![0.0; n * self.dim];
        let mut weights = vec![0; n];
        for (line, entries) in self.lines.iter().zip(&self.entries) {
            for e in entries {
                coords[e.source * self.dim..(e.source + 1) * self.dim]
                    .copy_from_slice(&line.point_at(e.coord));
                weights[e.source] = e.weight;
            }
        }
        Dataset::with_multiplicities(self.dim, coords, weights)
            .expect("projection preserves validity")
    }

    /// Lines that received at least one point.
    pub fn occupied_lines(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_empty()).count()
    }
}

/// Project with the default line cap.
pub fn project<D: WeightedPoints + ?Sized>(
    data: &D,
    centers: &[Point],
    eps: f64,
) -> Result<ProjectedInstance> {
    project_with_cap(data, centers, eps, DEFAULT_MAX_LINES)
}

/// Build the lines through every distinct center along every net direction
/// and move each point to its nearest line (ties to the lowest line index).
pub fn project_with_cap<D: WeightedPoints + ?Sized>(
    data: &D,
    centers: &[Point],
    eps: f64,
    max_lines: usize,
) -> Result<ProjectedInstance> {
    check_centers(data.dim(), centers)?;
    let d = data.dim();
    let mut distinct: Vec<&Point> = Vec::new();
    for c in centers {
        if !distinct.iter().any(|q| q.coords() == c.coords()) {
            distinct.push(c);
        }
    }
    let predicted = direction_net_size(d, eps) * distinct.len() as f64;
    if predicted.is_nan() || predicted > max_lines as f64 {
        return Err(Error::TooManyLines {
            count: predicted.min(usize::MAX as f64) as usize,
            cap: max_lines,
        });
    }
    let net = direction_net(d, eps)?;
    let lines = build_lines(&distinct, &net);
    let mut inst = project_onto(data, lines)?;
    inst.net_eps = eps;
    Ok(inst)
}

/// Lines through the anchors along the directions, dropping any line that
/// coincides with an earlier one.
fn build_lines(anchors: &[&Point], net: &[Vec<f64>]) -> Vec<Line> {
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for (ci, c) in anchors.iter().enumerate() {
        for (ui, u) in net.iter().enumerate() {
            let duplicate = kept.iter().any(|&(cj, uj)| {
                uj == ui && {
                    let diff: Vec<f64> = c
                        .coords()
                        .iter()
                        .zip(anchors[cj].coords())
                        .map(|(a, b)| a - b)
                        .collect();
                    let along: f64 = diff.iter().zip(u).map(|(a, b)| a * b).sum();
                    let norm2: f64 = diff.iter().map(|a| a * a).sum();
                    let perp2 = (norm2 - along * along).max(0.0);
                    perp2.sqrt() <= 1e-12 * norm2.sqrt()
                }
            });
            if !duplicate {
                kept.push((ci, ui));
            }
        }
    }
    kept.into_iter()
        .enumerate()
        .map(|(index, (ci, ui))| Line {
            index,
            anchor: anchors[ci].clone(),
            direction: net[ui].clone(),
        })
        .collect()
}

/// Project every point of `data` onto its nearest line among `lines`.
pub fn project_onto<D: WeightedPoints + ?Sized>(
    data: &D,
    lines: Vec<Line>,
) -> Result<ProjectedInstance> {
    let d = data.dim();
    if lines.is_empty() {
        return Err(Error::EmptyCenters);
    }
    if let Some(l) = lines
        .iter()
        .find(|l| l.anchor.dim() != d || l.direction.len() != d)
    {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: l.anchor.dim(),
        });
    }
    // Lines grouped by anchor so |x - anchor|^2 is computed once per anchor.
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for l in &lines {
        match groups
            .iter_mut()
            .find(|(a, _)| a.as_slice() == l.anchor.coords())
        {
            Some((_, members)) => members.push(l.index),
            None => groups.push((l.anchor.coords().to_vec(), vec![l.index])),
        }
    }
    let mut entries: Vec<Vec<LineEntry>> = vec![Vec::new(); lines.len()];
    let mut assignment = Vec::with_capacity(data.len());
    let mut v = vec![0.0; d];
    for i in 0..data.len() {
        let x = data.point(i);
        let mut best = (f64::INFINITY, usize::MAX, 0.0);
        for (anchor, members) in &groups {
            for ((vj, xj), aj) in v.iter_mut().zip(x).zip(anchor) {
                *vj = xj - aj;
            }
            let norm2: f64 = v.iter().map(|a| a * a).sum();
            for &li in members {
                let t: f64 = v.iter().zip(&lines[li].direction).map(|(a, b)| a * b).sum();
                let dist2 = (norm2 - t * t).max(0.0);
                if dist2 < best.0 || (dist2 == best.0 && li < best.1) {
                    best = (dist2, li, t);
                }
            }
        }
        let (_, li, t) = best;
        entries[li].push(LineEntry {
            coord: t,
            weight: data.weight(i),
            source: i,
        });
        assignment.push(li);
    }
    for e in &mut entries {
        e.sort_by(|a, b| a.coord.total_cmp(&b.coord).then(a.source.cmp(&b.source)));
    }
    Ok(ProjectedInstance {
        dim: d,
        lines,
        entries,
        assignment,
        net_eps: f64::NAN,
    })
}
