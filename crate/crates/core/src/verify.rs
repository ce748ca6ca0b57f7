//! Evaluation and hardness tooling: empirical coreset error, brute-force
//! cost oracles, the square-root instance and the linear-piece checks
//! behind the logarithmic size lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::objective::{check_centers, cost_p, cost_v, dist_to_centers, sorted_distances};
use crate::types::{Dataset, Point, WeightVector, WeightedPoints};

/// The objective a coreset is evaluated under.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    TopP(u64),
    /// The maximum error over several values of `p`.
    TopPList(Vec<u64>),
    Weights(WeightVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `max |cost(coreset, C) / cost(data, C) - 1|` over the sample.
    pub max_error: f64,
    /// Index of the maximizing center set in the sample.
    pub argmax_center: usize,
    /// Maximizing `p` for `p`-based objectives.
    pub argmax_p: Option<u64>,
    pub num_centers: usize,
    pub description: String,
    pub seed: Option<u64>,
}

/// `|approx / exact - 1|`, taken as zero when both vanish.
pub fn relative_error(exact: f64, approx: f64) -> f64 {
    if exact == 0.0 {
        if approx == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (approx / exact - 1.0).abs()
    }
}

/// `k`-center sets drawn uniformly per axis from the bounding box, with
/// ChaCha8 seeded from `seed`.
pub fn random_center_sets(data: &Dataset, k: usize, count: usize, seed: u64) -> Vec<Vec<Point>> {
    let bbox = data.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let c = bbox
                        .iter()
                        .map(|&(lo, hi)| {
                            if lo < hi {
                                rng.random_range(lo..=hi)
                            } else {
                                lo
                            }
                        })
                        .collect();
                    Point::new(c).expect("bounding box is finite")
                })
                .collect()
        })
        .collect()
}

/// `cost_p` for every `p` in `ps` from one sorted distance list.
///
/// Every `p` must lie in `1..=total_weight`.
pub fn cost_p_many<D: WeightedPoints + ?Sized>(
    data: &D,
    centers: &[Point],
    ps: &[u64],
) -> Result<Vec<f64>> {
    let sorted = sorted_distances(data, centers)?;
    let mut order: Vec<usize> = (0..ps.len()).collect();
    order.sort_by_key(|&i| ps[i]);
    let mut out = vec![0.0; ps.len()];
    let (mut pos, mut taken_in, mut taken, mut acc) = (0usize, 0u64, 0u64, 0.0);
    for i in order {
        let target = ps[i];
        while taken < target {
            let (d, w) = sorted[pos];
            let take = (w - taken_in).min(target - taken);
            acc += d * take as f64;
            taken += take;
            taken_in += take;
            if taken_in == w {
                pos += 1;
                taken_in = 0;
            }
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Maximum relative error of `coreset` against `data` over the center sets.
pub fn coreset_error<A, B>(
    data: &A,
    coreset: &B,
    center_sets: &[Vec<Point>],
    objective: &Objective,
) -> Result<ErrorReport>
where
    A: WeightedPoints + ?Sized,
    B: WeightedPoints + ?Sized,
{
    if center_sets.is_empty() {
        return Err(Error::EmptyCenters);
    }
    if data.dim() != coreset.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: coreset.dim(),
        });
    }
    if data.total_weight() != coreset.total_weight() {
        return Err(Error::Precondition(format!(
            "coreset weight {} differs from dataset size {}",
            coreset.total_weight(),
            data.total_weight()
        )));
    }
    let mut best = (f64::NEG_INFINITY, 0usize, None);
    for (ci, centers) in center_sets.iter().enumerate() {
        check_centers(data.dim(), centers)?;
        match objective {
            Objective::TopP(p) => {
                let e = relative_error(cost_p(data, centers, *p)?, cost_p(coreset, centers, *p)?);
                if e > best.0 {
                    best = (e, ci, Some(*p));
                }
            }
            Objective::TopPList(ps) => {
                if let Some(&p) = ps.iter().find(|&&p| p == 0 || p > data.total_weight()) {
                    return Err(Error::POutOfRange {
                        p,
                        n: data.total_weight(),
                    });
                }
                let a = cost_p_many(data, centers, ps)?;
                let b = cost_p_many(coreset, centers, ps)?;
                for ((&p, &x), &y) in ps.iter().zip(&a).zip(&b) {
                    let e = relative_error(x, y);
                    if e > best.0 {
                        best = (e, ci, Some(p));
                    }
                }
            }
            Objective::Weights(v) => {
                let e = relative_error(cost_v(data, centers, v)?, cost_v(coreset, centers, v)?);
                if e > best.0 {
                    best = (e, ci, None);
                }
            }
        }
    }
    let description = match objective {
        Objective::TopP(p) => format!("top-{p} cost"),
        Objective::TopPList(ps) => format!("top-p cost over {} values of p", ps.len()),
        Objective::Weights(v) => format!("ordered weighted cost, {} weights", v.len()),
    };
    Ok(ErrorReport {
        max_error: best.0,
        argmax_center: best.1,
        argmax_p: best.2,
        num_centers: center_sets.len(),
        description,
        seed: None,
    })
}

fn expanded_distances<D: WeightedPoints + ?Sized>(data: &D, centers: &[Point]) -> Vec<f64> {
    let mut d: Vec<f64> = (0..data.len())
        .flat_map(|i| {
            std::iter::repeat_n(
                dist_to_centers(data.point(i), centers),
                data.weight(i) as usize,
            )
        })
        .collect();
    d.sort_by(|a, b| b.total_cmp(a));
    d
}

/// `cost_p` by expanding multiplicities and sorting every distance.
pub fn brute_cost_p<D: WeightedPoints + ?Sized>(data: &D, centers: &[Point], p: u64) -> f64 {
    expanded_distances(data, centers)[..p as usize].iter().sum()
}

/// `cost_v` by expanding multiplicities and sorting every distance.
pub fn brute_cost_v<D: WeightedPoints + ?Sized>(
    data: &D,
    centers: &[Point],
    v: &WeightVector,
) -> f64 {
    expanded_distances(data, centers)
        .iter()
        .zip(v.entries())
        .map(|(d, w)| d * w)
        .sum()
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Points `x_i = sqrt(i) - sqrt(i - 1)`, so with center `0` the top-`p`
/// cost is exactly `sqrt(p)`.
pub fn sqrt_instance(n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let xs: Vec<f64> = (1..=n)
        .map(|i| {
            let i = i as f64;
            1.0 / (i.sqrt() + (i - 1.0).sqrt())
        })
        .collect();
    Dataset::from_coords_1d(&xs)
}

/// `W(p) = cost_p(., c)` for `p = 1..=n` and its number of linear pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct CostProfile {
    /// `values[p - 1] = W(p)`.
    pub values: Vec<f64>,
    /// Maximal runs of `p` over which `W(p) - W(p - 1)` is constant.
    pub pieces: usize,
}

impl CostProfile {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `max_p |W_other(p) / W_self(p) - 1|` and the first maximizing `p`.
    pub fn max_error(&self, other: &CostProfile) -> Result<(f64, u64)> {
        if self.n() != other.n() {
            return Err(Error::WeightLength {
                expected: self.n() as u64,
                got: other.n(),
            });
        }
        let mut best = (f64::NEG_INFINITY, 1u64);
        for (i, (&a, &b)) in self.values.iter().zip(&other.values).enumerate() {
            let e = relative_error(a, b);
            if e > best.0 {
                best = (e, i as u64 + 1);
            }
        }
        Ok(best)
    }
}

/// The cost profile of `data` against the single center `center`, with
/// compensated prefix sums. Increments are the sorted distances, so the
/// piece count is the number of runs of equal distance.
pub fn profile_pieces<D: WeightedPoints + ?Sized>(data: &D, center: &Point) -> Result<CostProfile> {
    let sorted = sorted_distances(data, std::slice::from_ref(center))?;
    let mut values = Vec::with_capacity(data.total_weight() as usize);
    let mut acc = CompensatedSum::default();
    let mut pieces = 0;
    let mut last = None;
    for (d, w) in sorted {
        if last != Some(d) {
            pieces += 1;
            last = Some(d);
        }
        for _ in 0..w {
            acc.add(d);
            values.push(acc.value());
        }
    }
    Ok(CostProfile { values, pieces })
}

/// Outcome of testing the best linear function through the tolerance
/// tubes at `a` and `b` at the point `p_hat = floor(sqrt(a * b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaimCheck {
    pub p_hat: u64,
    /// True when even the best admissible linear function leaves the
    /// `(1 +- eps)` tube of `sqrt` at `p_hat`.
    pub violated: bool,
    /// Largest achievable `g(p_hat) / sqrt(p_hat)`.
    pub ratio: f64,
}

/// Largest `g(p) / sqrt(p)` over linear `g` with `g(a)` and `g(b)` inside
/// `(1 +- eps) * sqrt`. `g(p)` is a positive combination of the endpoint
/// values, so both sit at their upper limits.
pub fn best_linear_ratio(a: u64, b: u64, p: u64, eps: f64) -> f64 {
    let (af, bf, pf) = (a as f64, b as f64, p as f64);
    let g = ((pf - af) * bf.sqrt() + (bf - pf) * af.sqrt()) / (bf - af);
    (1.0 + eps) * g / pf.sqrt()
}

/// Check that no linear function stays within `(1 +- eps) * sqrt(p)` over
/// all of `[a, b]`.
pub fn claim_check(a: u64, b: u64, eps: f64) -> Result<ClaimCheck> {
    if !(eps.is_finite() && eps > 0.0 && eps < 0.5) {
        return Err(Error::Precondition(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    if a < 1 {
        return Err(Error::Precondition("a >= 1 is required".into()));
    }
    let floor_b = (1.0 + 1.0 / eps).powi(2);
    if (b as f64) < floor_b {
        return Err(Error::Precondition(format!(
            "b >= (1 + 1/eps)^2 = {floor_b} is required, got b = {b}"
        )));
    }
    let ratio_min = (1.0 + 12.0 * eps.sqrt()).powi(4);
    if (b as f64) < ratio_min * a as f64 {
        return Err(Error::Precondition(format!(
            "b / a >= (1 + 12 sqrt(eps))^4 = {ratio_min} is required, got {}",
            b as f64 / a as f64
        )));
    }
    let p_hat = ((a as f64) * (b as f64)).sqrt().floor() as u64;
    let p_hat = p_hat.clamp(a, b);
    let ratio = best_linear_ratio(a, b, p_hat, eps);
    Ok(ClaimCheck {
        p_hat,
        violated: ratio < 1.0 - eps,
        ratio,
    })
}

/// Fewest linear pieces any profile within `(1 +- eps)` of `sqrt(p)` on
/// `[1, n]` can have: pieces ending at or above `(1 + 1/eps)^2` shrink by
/// at least `(1 + 12 sqrt(eps))^4` from end to start, and one more piece
/// covers the rest.
pub fn certified_piece_lower_bound(n: u64, eps: f64) -> usize {
    let floor_b = (1.0 + 1.0 / eps).powi(2);
    let r = (1.0 + 12.0 * eps.sqrt()).powi(4);
    let mut count = 0;
    let mut b = n as f64;
    while b >= floor_b {
        count += 1;
        // The piece ending at b starts above b / r; the next ends below that.
        let start = (b / r).floor() + 1.0;
        b = start - 1.0;
    }
    if b >= 1.0 {
        count += 1;
    }
    count
}

/// `0.5 * ln(eps^2 n) / ln(1 + 12 sqrt(eps))`, the reference growth rate of
/// the lower bound.
pub fn reference_piece_bound(n: u64, eps: f64) -> f64 {
    0.5 * (eps * eps * n as f64).ln() / (1.0 + 12.0 * eps.sqrt()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::WeightedCoreset;

    fn pt(x: f64) -> Point {
        Point::new(vec![x]).unwrap()
    }

    #[test]
    fn self_error_is_zero() {
        let data = Dataset::from_rows(&[vec![0.0, 1.0], vec![2.0, 5.0], vec![-1.0, 3.0]]).unwrap();
        let centers = random_center_sets(&data, 2, 20, 1);
        for obj in [
            Objective::TopP(2),
            Objective::TopPList(vec![1, 2, 3]),
            Objective::Weights(WeightVector::power_law(3, 1.0).unwrap()),
        ] {
            let r = coreset_error(&data, &data.as_coreset(), &centers, &obj).unwrap();
            assert_eq!(r.max_error, 0.0);
            assert_eq!(r.num_centers, 20);
        }
    }

    #[test]
    fn identical_points_singleton_coreset() {
        let data = Dataset::from_coords_1d(&[4.0; 5]).unwrap();
        let core = WeightedCoreset::new(1, vec![4.0], vec![5]).unwrap();
        let centers: Vec<Vec<Point>> = (0..10).map(|i| vec![pt(i as f64)]).collect();
        let r = coreset_error(
            &data,
            &core,
            &centers,
            &Objective::TopPList((1..=5).collect()),
        )
        .unwrap();
        assert_eq!(r.max_error, 0.0);
    }

    #[test]
    fn sqrt_instance_values() {
        let x = sqrt_instance(4).unwrap();
        assert_eq!(x.coords()[0], 1.0);
        assert!((x.coords()[1] - 0.414_213_56).abs() < 1e-8);
        let prof = profile_pieces(&x, &pt(0.0)).unwrap();
        for p in [1usize, 2, 3, 4] {
            assert!((prof.values[p - 1] - (p as f64).sqrt()).abs() < 1e-12);
        }
        assert_eq!(prof.pieces, 4);
    }

    #[test]
    fn claim_example() {
        let c = claim_check(1000, 30000, 0.01).unwrap();
        assert_eq!(c.p_hat, 5477);
        assert!(c.violated);
        assert!(matches!(
            claim_check(1000, 2000, 0.01),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            claim_check(1, 10, 0.01),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn piece_bounds() {
        assert_eq!(certified_piece_lower_bound(1_000_000, 0.01), 3);
        assert!((reference_piece_bound(1_000_000, 0.01) - 2.92).abs() < 0.01);
    }

    #[test]
    fn singleton_profile_is_one_piece() {
        let core = WeightedCoreset::new(1, vec![3.0], vec![9]).unwrap();
        let prof = profile_pieces(&core, &pt(0.0)).unwrap();
        assert_eq!(prof.pieces, 1);
        assert_eq!(prof.values.len(), 9);
        assert_eq!(prof.values[8], 27.0);
    }
}
