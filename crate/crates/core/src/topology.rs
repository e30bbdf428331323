//! Digital topology of 2D masks: chessboard distance layers, the boundary
//! set, 8-connected components, holes, the layer-count bound and a
//! box-counting estimate of the boundary dimension.
//!
//! Layer `S_i` holds the cells whose chessboard distance to the nearest
//! exterior cell is exactly `i`; `S_1` is the boundary set. Cells outside
//! the grid count as exterior.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::domain::{rasterize, DomainMask, DomainSpec};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::stats::loglog_slope;

/// Distance map and layer sizes of a mask.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerDecomposition {
    n_r: usize,
    distance: Vec<u32>,
    sizes: Vec<usize>,
    components: usize,
    holes: usize,
}

impl LayerDecomposition {
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Chessboard distance of every grid cell to the exterior; 0 outside.
    pub fn distance(&self) -> &[u32] {
        &self.distance
    }

    /// `|S_1|, |S_2|, ...` (entry `i - 1` is `|S_i|`).
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `|S_i|` for `i >= 1`, zero past the deepest layer.
    pub fn layer(&self, i: usize) -> usize {
        assert!(i >= 1, "layers are numbered from 1");
        self.sizes.get(i - 1).copied().unwrap_or(0)
    }

    /// `N_deltaOmega = |S_1|`.
    pub fn n_boundary(&self) -> usize {
        self.layer(1)
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len()
    }

    /// Sizes of the nested sets `S_i ∪ S_{i+1} ∪ ...`.
    pub fn cumulative_sizes(&self) -> Vec<usize> {
        let mut acc = 0;
        let mut out: Vec<usize> = self
            .sizes
            .iter()
            .rev()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        out.reverse();
        out
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn holes(&self) -> usize {
        self.holes
    }

    /// CSV with columns `i,size`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,size\n");
        for (i, s) in self.sizes.iter().enumerate() {
            let _ = writeln!(out, "{},{}", i + 1, s);
        }
        out
    }
}

/// A layer `i` where `|S_{i+1}| > |S_i| - 4 (c - h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerViolation {
    pub layer: usize,
    pub next_size: usize,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerBoundReport {
    pub components: usize,
    pub holes: usize,
    pub sizes: Vec<usize>,
    /// Number of layers `i` tested (those with non-empty `S_{i+1}`).
    pub checked: usize,
    pub violations: Vec<LayerViolation>,
}

impl LayerBoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn require_2d(mask: &DomainMask, op: &'static str) -> Result<usize> {
    let spec = mask.spec();
    if spec.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            op,
            dim: spec.dim(),
        });
    }
    Ok(spec.n_r())
}

/// Exact chessboard distance transform by two raster passes.
pub fn chessboard_distance(mask: &DomainMask) -> Result<Vec<u32>> {
    let n = require_2d(mask, "distance transform")?;
    let inside = mask.inside();
    let mut d: Vec<u32> = inside
        .iter()
        .map(|&b| if b { u32::MAX } else { 0 })
        .collect();
    let at = |d: &[u32], r: isize, c: isize| -> u32 {
        if r < 0 || c < 0 || r >= n as isize || c >= n as isize {
            0
        } else {
            d[r as usize * n + c as usize]
        }
    };
    for r in 0..n as isize {
        for c in 0..n as isize {
            let i = r as usize * n + c as usize;
            if d[i] == 0 {
                continue;
            }
            let m = at(&d, r - 1, c - 1)
                .min(at(&d, r - 1, c))
                .min(at(&d, r - 1, c + 1))
                .min(at(&d, r, c - 1));
            d[i] = d[i].min(m.saturating_add(1));
        }
    }
    for r in (0..n as isize).rev() {
        for c in (0..n as isize).rev() {
            let i = r as usize * n + c as usize;
            if d[i] == 0 {
                continue;
            }
            let m = at(&d, r + 1, c + 1)
                .min(at(&d, r + 1, c))
                .min(at(&d, r + 1, c - 1))
                .min(at(&d, r, c + 1));
            d[i] = d[i].min(m.saturating_add(1));
        }
    }
    Ok(d)
}

/// Distance map, layer sizes, components and holes of a 2D mask.
pub fn distance_layers(mask: &DomainMask) -> Result<LayerDecomposition> {
    let n = require_2d(mask, "distance layers")?;
    let distance = chessboard_distance(mask)?;
    let depth = distance.iter().copied().max().unwrap_or(0) as usize;
    let mut sizes = vec![0usize; depth];
    for &d in &distance {
        if d > 0 {
            sizes[d as usize - 1] += 1;
        }
    }
    let (components, holes) = components_and_holes(mask)?;
    Ok(LayerDecomposition {
        n_r: n,
        distance,
        sizes,
        components,
        holes,
    })
}

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];
const NEIGHBORS_4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

/// Labels the connected components of cells equal to `value`. Returns the
/// number of components and, for each, whether it touches the grid border.
fn label_components(
    cells: &[bool],
    n: usize,
    value: bool,
    neighbors: &[(isize, isize)],
) -> Vec<bool> {
    let mut seen = vec![false; cells.len()];
    let mut touches = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..cells.len() {
        if cells[start] != value || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut border = false;
        while let Some(i) = queue.pop_front() {
            let (r, c) = ((i / n) as isize, (i % n) as isize);
            if r == 0 || c == 0 || r == n as isize - 1 || c == n as isize - 1 {
                border = true;
            }
            for &(dr, dc) in neighbors {
                let (rr, cc) = (r + dr, c + dc);
                if rr < 0 || cc < 0 || rr >= n as isize || cc >= n as isize {
                    continue;
                }
                let j = rr as usize * n + cc as usize;
                if cells[j] == value && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        touches.push(border);
    }
    touches
}

/// `(c, h)`: 8-connected components of the mask and 4-connected components
/// of its complement that do not reach the grid border.
pub fn components_and_holes(mask: &DomainMask) -> Result<(usize, usize)> {
    let n = require_2d(mask, "component labelling")?;
    let c = label_components(mask.inside(), n, true, &NEIGHBORS_8).len();
    let h = label_components(mask.inside(), n, false, &NEIGHBORS_4)
        .into_iter()
        .filter(|&border| !border)
        .count();
    Ok((c, h))
}

/// Checks `|S_{i+1}| <= |S_i| - 4 (c - h)` for every `i` with a non-empty
/// successor layer.
pub fn verify_layer_bound(mask: &DomainMask) -> Result<LayerBoundReport> {
    let layers = distance_layers(mask)?;
    Ok(check_layer_sizes(
        layers.sizes(),
        layers.components(),
        layers.holes(),
    ))
}

/// The layer-count inequality on given measurements.
pub fn check_layer_sizes(sizes: &[usize], components: usize, holes: usize) -> LayerBoundReport {
    let shift = 4 * (components as i64 - holes as i64);
    let violations = sizes
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let bound = w[0] as i64 - shift;
            (w[1] as i64 > bound).then_some(LayerViolation {
                layer: i + 1,
                next_size: w[1],
                bound,
            })
        })
        .collect();
    LayerBoundReport {
        components,
        holes,
        sizes: sizes.to_vec(),
        checked: sizes.len().saturating_sub(1),
        violations,
    }
}

/// `N_deltaOmega` of a domain rasterized at `n_r` points per side.
pub fn boundary_count(domain: &DomainSpec, n_r: usize, half_width: f64) -> Result<usize> {
    let spec = GridSpec::new(2, n_r, 1, half_width)?;
    let mask = rasterize(domain, &spec)?;
    let d = chessboard_distance(&mask)?;
    Ok(d.iter().filter(|&&v| v == 1).count())
}

/// Box-counting slope of `ln N_deltaOmega(n)` against `ln n`.
pub fn boundary_dimension_estimate(
    domain: &DomainSpec,
    n_list: &[usize],
    half_width: f64,
) -> Result<f64> {
    if n_list.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "boundary dimension needs at least 3 resolutions, got {}",
            n_list.len()
        )));
    }
    let counts = n_list
        .iter()
        .map(|&n| boundary_count(domain, n, half_width).map(|c| c as f64))
        .collect::<Result<Vec<f64>>>()?;
    let ns: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    loglog_slope(&ns, &counts)
}
