//! Equispaced spatial grids, centered frequency windows and the index
//! bookkeeping between them.
//!
//! The spatial grid has `n_r` points per dimension on the box `[-T, T]^D`,
//! point `k` sitting at `-T + 2T k / n_r`. The frequency window holds
//! `n_lambda` integers per dimension centered on zero. All multi-dimensional
//! sets are ordered row-major (last component fastest).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the bounding box.
pub const DEFAULT_HALF_WIDTH: f64 = 2.0;

/// Shape of the discretization: dimension, samples and frequencies per
/// dimension, and the half-width `T` of the bounding box `[-T, T]^D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n_r: usize,
    n_lambda: usize,
    half_width: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n_r: usize, n_lambda: usize, half_width: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        if n_r == 0 || n_lambda == 0 {
            return Err(Error::InvalidSpec(format!(
                "grid sizes must be positive (n_r = {n_r}, n_lambda = {n_lambda})"
            )));
        }
        if n_lambda > n_r {
            return Err(Error::InvalidSpec(format!(
                "n_lambda = {n_lambda} exceeds n_r = {n_r}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "box half-width must be positive, got {half_width}"
            )));
        }
        // n_r^D must fit comfortably in memory-addressable sizes.
        if (n_r as u128).pow(dim as u32) > (u32::MAX as u128) {
            return Err(Error::InvalidSpec(format!(
                "n_r^D = {n_r}^{dim} is too large"
            )));
        }
        Ok(Self {
            dim,
            n_r,
            n_lambda,
            half_width,
        })
    }

    /// Two-dimensional grid on the default box `[-2, 2]^2`.
    pub fn square(n_r: usize, n_lambda: usize) -> Result<Self> {
        Self::new(2, n_r, n_lambda, DEFAULT_HALF_WIDTH)
    }

    pub fn with_half_width(self, half_width: f64) -> Result<Self> {
        Self::new(self.dim, self.n_r, self.n_lambda, half_width)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_lambda(&self) -> usize {
        self.n_lambda
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `N_R = n_r^D`.
    pub fn num_spatial(&self) -> usize {
        self.n_r.pow(self.dim as u32)
    }

    /// `N_lambda = n_lambda^D`.
    pub fn num_freq(&self) -> usize {
        self.n_lambda.pow(self.dim as u32)
    }

    /// Physical spacing between neighbouring grid points.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_r as f64
    }

    /// Physical coordinate of the grid index `k` along one axis.
    pub fn coordinate_1d(&self, k: usize) -> f64 {
        -self.half_width + 2.0 * self.half_width * k as f64 / self.n_r as f64
    }

    /// Maps a physical coordinate to the unit-box variable `u = (x + T) / 2T`.
    pub fn to_unit(&self, x: f64) -> f64 {
        (x + self.half_width) / (2.0 * self.half_width)
    }

    pub fn coordinate(&self, k: &MultiIndex) -> Vec<f64> {
        k.0.iter()
            .map(|&ki| self.coordinate_1d(ki as usize))
            .collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x.iter()
                .all(|&xi| xi.is_finite() && xi >= -self.half_width && xi <= self.half_width)
    }

    /// Inclusive range of the centered 1D frequency window.
    pub fn freq_range(&self) -> (i64, i64) {
        let n = self.n_lambda as i64;
        let lo = -(n / 2);
        (lo, lo + n - 1)
    }
}

/// A D-dimensional integer index, either a spatial grid index or a frequency.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn new(components: impl Into<Vec<i64>>) -> Self {
        Self(components.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i64]> for MultiIndex {
    fn from(value: &[i64]) -> Self {
        Self(value.to_vec())
    }
}

/// Row-major flat index of a spatial multi-index.
pub fn flat_index(k: &MultiIndex, spec: &GridSpec) -> Result<usize> {
    if k.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            what: "multi-index",
            expected: spec.dim(),
            found: k.dim(),
        });
    }
    let n = spec.n_r() as i64;
    let mut flat = 0usize;
    for &c in &k.0 {
        if c < 0 || c >= n {
            return Err(Error::IndexOutOfRange {
                index: k.0.clone(),
                size: spec.n_r(),
            });
        }
        flat = flat * spec.n_r() + c as usize;
    }
    Ok(flat)
}

/// Inverse of [`flat_index`].
pub fn unflatten(index: usize, spec: &GridSpec) -> Result<MultiIndex> {
    let len = spec.num_spatial();
    if index >= len {
        return Err(Error::FlatIndexOutOfRange { index, len });
    }
    let n = spec.n_r();
    let mut comps = vec![0i64; spec.dim()];
    let mut rest = index;
    for c in comps.iter_mut().rev() {
        *c = (rest % n) as i64;
        rest /= n;
    }
    Ok(MultiIndex(comps))
}

/// All `N_R` grid points in row-major order with their physical coordinates.
pub fn build_spatial_grid(spec: &GridSpec) -> Vec<(MultiIndex, Vec<f64>)> {
    (0..spec.num_spatial())
        .map(|i| {
            let k = unflatten(i, spec).expect("index within grid");
            let x = spec.coordinate(&k);
            (k, x)
        })
        .collect()
}

/// The frequency set `P_lambda`: a tensor product of identical centered
/// integer ranges, ordered lexicographically.
///
/// Odd `n_lambda` gives the symmetric window `-(n-1)/2 ..= (n-1)/2`; even
/// `n_lambda` gives `-n/2 ..= n/2 - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreqWindow {
    dim: usize,
    n_lambda: usize,
    lo: i64,
    indices: Vec<MultiIndex>,
}

impl FreqWindow {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_lambda(&self) -> usize {
        self.n_lambda
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Inclusive 1D range of the window.
    pub fn range_1d(&self) -> (i64, i64) {
        (self.lo, self.lo + self.n_lambda as i64 - 1)
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_lambda % 2 == 1
    }

    /// Position of a frequency in window order, if present.
    pub fn position(&self, l: &MultiIndex) -> Option<usize> {
        if l.dim() != self.dim {
            return None;
        }
        let mut pos = 0usize;
        for &c in &l.0 {
            let off = c - self.lo;
            if off < 0 || off >= self.n_lambda as i64 {
                return None;
            }
            pos = pos * self.n_lambda + off as usize;
        }
        Some(pos)
    }
}

pub fn build_freq_window(spec: &GridSpec) -> FreqWindow {
    let (lo, _) = spec.freq_range();
    let n = spec.n_lambda();
    let indices = (0..spec.num_freq())
        .map(|mut j| {
            let mut comps = vec![0i64; spec.dim()];
            for c in comps.iter_mut().rev() {
                *c = lo + (j % n) as i64;
                j /= n;
            }
            MultiIndex(comps)
        })
        .collect();
    FreqWindow {
        dim: spec.dim(),
        n_lambda: n,
        lo,
        indices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_coordinates() {
        let spec = GridSpec::new(1, 4, 1, 0.5).unwrap();
        let xs: Vec<f64> = build_spatial_grid(&spec)
            .into_iter()
            .map(|(_, x)| x[0])
            .collect();
        assert_eq!(xs, vec![-0.5, -0.25, 0.0, 0.25]);
    }

    #[test]
    fn two_dimensional_ordering_is_row_major() {
        let spec = GridSpec::new(2, 2, 1, 1.0).unwrap();
        let ks: Vec<Vec<i64>> = build_spatial_grid(&spec)
            .into_iter()
            .map(|(k, _)| k.0)
            .collect();
        assert_eq!(ks, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn grid_extremes() {
        let spec = GridSpec::square(16, 3).unwrap();
        let pts = build_spatial_grid(&spec);
        assert_eq!(pts.len(), 256);
        let max = pts
            .iter()
            .flat_map(|(_, x)| x.iter().copied())
            .fold(f64::MIN, f64::max);
        let min = pts
            .iter()
            .flat_map(|(_, x)| x.iter().copied())
            .fold(f64::MAX, f64::min);
        assert_eq!(max, 1.75);
        assert_eq!(min, -2.0);
    }

    #[test]
    fn odd_and_even_windows() {
        let w3 = build_freq_window(&GridSpec::new(1, 8, 3, 1.0).unwrap());
        let v3: Vec<i64> = w3.indices().iter().map(|l| l.0[0]).collect();
        assert_eq!(v3, vec![-1, 0, 1]);
        let w4 = build_freq_window(&GridSpec::new(1, 8, 4, 1.0).unwrap());
        let v4: Vec<i64> = w4.indices().iter().map(|l| l.0[0]).collect();
        assert_eq!(v4, vec![-2, -1, 0, 1]);
    }

    #[test]
    fn two_dimensional_window_is_lexicographic() {
        let w = build_freq_window(&GridSpec::new(2, 8, 3, 1.0).unwrap());
        assert_eq!(w.len(), 9);
        assert_eq!(w.indices()[0].0, vec![-1, -1]);
        assert_eq!(w.indices()[1].0, vec![-1, 0]);
        assert_eq!(w.indices()[8].0, vec![1, 1]);
        let mut sorted = w.indices().to_vec();
        sorted.sort();
        assert_eq!(sorted, w.indices());
        for (i, l) in w.indices().iter().enumerate() {
            assert_eq!(w.position(l), Some(i));
        }
    }

    #[test]
    fn odd_window_closed_under_negation() {
        for n in [1usize, 3, 5, 9] {
            let w = build_freq_window(&GridSpec::new(2, 16, n, 1.0).unwrap());
            for l in w.indices() {
                let neg = MultiIndex(l.0.iter().map(|c| -c).collect());
                assert!(w.position(&neg).is_some());
            }
        }
    }

    #[test]
    fn flat_index_examples() {
        let spec = GridSpec::new(2, 4, 1, 1.0).unwrap();
        assert_eq!(flat_index(&MultiIndex::new([0, 0]), &spec).unwrap(), 0);
        assert_eq!(flat_index(&MultiIndex::new([1, 2]), &spec).unwrap(), 6);
        assert!(matches!(
            flat_index(&MultiIndex::new([4, 0]), &spec),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            flat_index(&MultiIndex::new([-1, 0]), &spec),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(unflatten(16, &spec).is_err());
    }

    #[test]
    fn flat_index_round_trip_exhaustive() {
        for dim in 1..=3 {
            for n in 1..=8 {
                let spec = GridSpec::new(dim, n, 1, 1.0).unwrap();
                for i in 0..spec.num_spatial() {
                    let k = unflatten(i, &spec).unwrap();
                    assert_eq!(flat_index(&k, &spec).unwrap(), i);
                }
            }
        }
    }

    #[test]
    fn sizes_match() {
        for dim in 1..=3 {
            let spec = GridSpec::new(dim, 6, 5, 2.0).unwrap();
            assert_eq!(build_spatial_grid(&spec).len(), 6usize.pow(dim as u32));
            assert_eq!(build_freq_window(&spec).len(), 5usize.pow(dim as u32));
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(GridSpec::square(4, 9).is_err());
        assert!(GridSpec::new(0, 4, 2, 1.0).is_err());
        assert!(GridSpec::new(2, 4, 2, 0.0).is_err());
        assert!(GridSpec::new(2, 0, 0, 1.0).is_err());
    }
}
