//! Point sets, coresets and weight vectors.
//!
//! Both [`Dataset`] and [`WeightedCoreset`] store coordinates in one flat
//! row-major buffer together with positive integer multiplicities. The
//! objectives in [`crate::objective`] accept either through
//! [`WeightedPoints`].

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A point in `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

/// Read access shared by datasets and coresets: stored points with
/// positive integer multiplicities.
pub trait WeightedPoints {
    fn dim(&self) -> usize;
    /// Number of stored (not expanded) points.
    fn len(&self) -> usize;
    fn point(&self, i: usize) -> &[f64];
    fn weight(&self, i: usize) -> u64;
    /// Sum of all multiplicities, i.e. the size of the expanded multiset.
    fn total_weight(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when every multiplicity is one.
    fn is_unit_weight(&self) -> bool {
        self.total_weight() == self.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Storage {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<u64>,
    total: u64,
}

impl Storage {
    fn new(dim: usize, coords: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if coords.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: index / dim });
        }
        let n = coords.len() / dim;
        if weights.len() != n {
            return Err(Error::WeightLength {
                expected: n as u64,
                got: weights.len(),
            });
        }
        if let Some(index) = weights.iter().position(|&w| w == 0) {
            return Err(Error::InvalidWeight {
                index,
                reason: "multiplicity must be positive",
            });
        }
        let total = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or(Error::InvalidWeight {
                index: n - 1,
                reason: "total multiplicity overflows u64",
            })?;
        Ok(Self {
            dim,
            coords,
            weights,
            total,
        })
    }

    fn from_points(points: &[Point], weights: Vec<u64>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let dim = first.dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            coords.extend_from_slice(p.coords());
        }
        Self::new(dim, coords, weights)
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

macro_rules! impl_weighted_points {
    ($ty:ty) => {
        impl WeightedPoints for $ty {
            fn dim(&self) -> usize {
                self.0.dim
            }
            fn len(&self) -> usize {
                self.0.weights.len()
            }
            fn point(&self, i: usize) -> &[f64] {
                self.0.point(i)
            }
            fn weight(&self, i: usize) -> u64 {
                self.0.weights[i]
            }
            fn total_weight(&self) -> u64 {
                self.0.total
            }
        }
    };
}

/// An input point set, optionally with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset(Storage);

impl Dataset {
    /// Build from a row-major coordinate buffer with unit multiplicities.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let n = coords.len().checked_div(dim).unwrap_or(0);
        Storage::new(dim, coords, vec![1; n]).map(Self)
    }

    pub fn with_multiplicities(dim: usize, coords: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        Storage::new(dim, coords, weights).map(Self)
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        Storage::from_points(points, vec![1; points.len()]).map(Self)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().ok_or(Error::EmptyInput)?.len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_coords_1d(coords: &[f64]) -> Result<Self> {
        Self::from_flat(1, coords.to_vec())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0.coords
    }

    pub fn weights(&self) -> &[u64] {
        &self.0.weights
    }

    /// The dataset viewed as a (trivial) coreset of itself.
    pub fn as_coreset(&self) -> WeightedCoreset {
        WeightedCoreset::from_entries(
            self.0.dim,
            (0..self.len()).map(|i| (self.point(i).to_vec(), self.weight(i))),
        )
        .expect("a valid dataset is a valid coreset")
    }

    /// Per-axis `(min, max)` over all stored points.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let dim = self.0.dim;
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for row in self.0.coords.chunks_exact(dim) {
            for (b, &c) in bounds.iter_mut().zip(row) {
                b.0 = b.0.min(c);
                b.1 = b.1.max(c);
            }
        }
        bounds
    }
}

impl_weighted_points!(Dataset);

/// A weighted summary: distinct points with positive integer weights.
///
/// The constructors merge coincident points and store them in
/// lexicographic order, so two coresets with the same content compare (and
/// serialize) identically.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoreset(Storage);

impl WeightedCoreset {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<u64>) -> Result<Self> {
        let storage = Storage::new(dim, coords, weights)?;
        let entries =
            (0..storage.weights.len()).map(|i| (storage.point(i).to_vec(), storage.weights[i]));
        Self::from_entries(dim, entries)
    }

    /// Build from `(coordinates, weight)` pairs, merging exact duplicates.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, u64)>,
    {
        let mut entries: Vec<(Vec<f64>, u64)> = entries.into_iter().collect();
        for (i, (c, _)) in entries.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
        }
        entries.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut coords = Vec::with_capacity(entries.len() * dim);
        let mut weights: Vec<u64> = Vec::with_capacity(entries.len());
        let mut last: Option<Vec<f64>> = None;
        for (c, w) in entries {
            if last.as_ref() == Some(&c) {
                let index = weights.len() - 1;
                weights[index] = weights[index].checked_add(w).ok_or(Error::InvalidWeight {
                    index,
                    reason: "weight overflows u64",
                })?;
            } else {
                coords.extend_from_slice(&c);
                weights.push(w);
                last = Some(c);
            }
        }
        Storage::new(dim, coords, weights).map(Self)
    }

    /// Number of distinct points.
    pub fn size(&self) -> usize {
        self.0.weights.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0.coords
    }

    pub fn weights(&self) -> &[u64] {
        &self.0.weights
    }

    /// Reuse the coreset as a weighted input dataset.
    pub fn to_dataset(&self) -> Dataset {
        Dataset(self.0.clone())
    }
}

impl_weighted_points!(WeightedCoreset);

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Non-increasing, non-negative rank weights `v_1 >= ... >= v_n >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (index, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if v < 0.0 {
                return Err(Error::InvalidWeight {
                    index,
                    reason: "weights must be non-negative",
                });
            }
            if index > 0 && v > entries[index - 1] {
                return Err(Error::InvalidWeight {
                    index,
                    reason: "weights must be non-increasing",
                });
            }
        }
        Ok(Self(entries))
    }

    /// `v_i = 1` for all `i` (k-Median).
    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n.max(1)])
    }

    /// First `p` weights one, the rest zero (p-Centrum).
    pub fn top_p(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::POutOfRange {
                p: p as u64,
                n: n as u64,
            });
        }
        Ok(Self(
            (0..n).map(|i| if i < p { 1.0 } else { 0.0 }).collect(),
        ))
    }

    /// `v_i = 1 / i^alpha`.
    pub fn power_law(n: usize, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Precondition(format!(
                "power-law exponent must be finite and >= 0, got {alpha}"
            )));
        }
        Self::new((1..=n.max(1)).map(|i| (i as f64).powf(-alpha)).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weighted mean, cumulative error and hull of a 1D group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalStats {
    pub mean: f64,
    /// `sum w(y) * |y - mean|`.
    pub delta: f64,
    pub lo: f64,
    pub hi: f64,
}

impl IntervalStats {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, z: f64) -> bool {
        self.lo <= z && z <= self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_rejects_non_finite_and_empty() {
        assert_eq!(Point::new(vec![]), Err(Error::ZeroDimension));
        assert_eq!(
            Point::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn dataset_rejects_mixed_dimensions() {
        let err = Dataset::from_rows(&[vec![0.0, 1.0], vec![2.0]]).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn dataset_rejects_zero_multiplicity() {
        let err = Dataset::with_multiplicities(1, vec![0.0, 1.0], vec![1, 0]).unwrap_err();
        assert!(matches!(err, Error::InvalidWeight { index: 1, .. }));
    }

    #[test]
    fn coreset_merges_duplicates_in_canonical_order() {
        let c = WeightedCoreset::new(2, vec![1.0, 0.0, 0.0, 5.0, 1.0, 0.0], vec![2, 3, 4]).unwrap();
        assert_eq!(c.size(), 2);
        assert_eq!(c.coords(), &[0.0, 5.0, 1.0, 0.0]);
        assert_eq!(c.weights(), &[3, 6]);
        assert_eq!(c.total_weight(), 9);
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![3.0, 2.0, 2.0, 0.0]).is_ok());
        assert!(matches!(
            WeightVector::new(vec![1.0, 2.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        assert!(matches!(
            WeightVector::new(vec![1.0, -1.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        let v = WeightVector::power_law(4, 1.0).unwrap();
        assert_eq!(v.entries(), &[1.0, 0.5, 1.0 / 3.0, 0.25]);
    }

    #[test]
    fn bounding_box_per_axis() {
        let d = Dataset::from_rows(&[vec![0.0, 5.0], vec![3.0, -1.0]]).unwrap();
        assert_eq!(d.bounding_box(), vec![(0.0, 3.0), (-1.0, 5.0)]);
    }
}
