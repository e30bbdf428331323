//! Spatial domains and their rasterization onto the sample grid.
//!
//! The builtin test shapes all have area 4 and sit inside the default box
//! `[-2, 2]^2`. A domain is rasterized by evaluating its membership predicate
//! at every grid point; boundary points count as inside.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{unflatten, GridSpec};

/// The five builtin test domains, each normalized to area 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `[-1, 1]^2`.
    Square,
    /// `|x| + |y| <= sqrt(2)`.
    Diamond,
    /// Radius `2 / sqrt(pi)`.
    Disk,
    /// Annulus with radii `1/2` and `sqrt(4/pi + 1/4)`.
    Ring,
    /// Eight-lobed "double asteroid" given by a piecewise polar formula over
    /// 45 degree sectors; the tips reach radius `1.449^2`.
    Star,
}

impl Shape {
    pub const ALL: [Shape; 5] = [
        Shape::Square,
        Shape::Diamond,
        Shape::Disk,
        Shape::Ring,
        Shape::Star,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Square => "square",
            Shape::Diamond => "diamond",
            Shape::Disk => "disk",
            Shape::Ring => "ring",
            Shape::Star => "star",
        }
    }

    /// Nominal area of the continuous shape.
    pub fn area(&self) -> f64 {
        4.0
    }

    pub fn disk_radius() -> f64 {
        2.0 / PI.sqrt()
    }

    pub fn ring_radii() -> (f64, f64) {
        (0.5, (4.0 / PI + 0.25).sqrt())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Square => x.abs() <= 1.0 && y.abs() <= 1.0,
            Shape::Diamond => x.abs() + y.abs() <= SQRT_2,
            Shape::Disk => x * x + y * y <= 4.0 / PI,
            Shape::Ring => {
                let (inner, outer) = Self::ring_radii();
                let r2 = x * x + y * y;
                r2 >= inner * inner && r2 <= outer * outer
            }
            Shape::Star => x.hypot(y) <= star_radius(y.atan2(x)),
        }
    }
}

/// Boundary radius of the star at polar angle `theta` (radians).
pub fn star_radius(theta: f64) -> f64 {
    let deg = theta.to_degrees().rem_euclid(360.0);
    let sector = (deg / 45.0).floor() as i64;
    let sign = if sector % 2 == 0 { -1.0 } else { 1.0 };
    let a = (deg + sign * 22.5).to_radians();
    let b = (2.0 * deg + sign * 45.0).to_radians();
    let denom = a.cos().abs() + a.sin().abs() + 2.0 * (b.sin().abs() / 2.0).sqrt();
    1.449 * 1.449 / denom
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "domain",
                name: s.to_string(),
            })
    }
}

type PredicateFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A membership test over physical coordinates.
#[derive(Clone)]
pub struct Predicate(Arc<PredicateFn>);

impl Predicate {
    pub fn new(f: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> bool {
        (self.0)(x)
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Predicate(..)")
    }
}

/// Where a domain comes from.
#[derive(Clone, Debug)]
pub enum DomainSpec {
    Builtin(Shape),
    Predicate(Predicate),
    /// A previously rasterized mask; membership of an arbitrary point is
    /// decided by the nearest grid cell.
    Raster(Arc<DomainMask>),
}

impl DomainSpec {
    pub fn predicate(f: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        DomainSpec::Predicate(Predicate::new(f))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainSpec::Builtin(shape) => x.len() == 2 && shape.contains(x[0], x[1]),
            DomainSpec::Predicate(p) => p.eval(x),
            DomainSpec::Raster(mask) => mask.contains_point(x),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DomainSpec::Builtin(shape) => shape.name().to_string(),
            DomainSpec::Predicate(_) => "predicate".to_string(),
            DomainSpec::Raster(_) => "mask".to_string(),
        }
    }
}

impl From<Shape> for DomainSpec {
    fn from(shape: Shape) -> Self {
        DomainSpec::Builtin(shape)
    }
}

/// The characteristic set `P_omega` of a domain on the sample grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainMask {
    spec: GridSpec,
    inside: Vec<bool>,
    samples: Vec<usize>,
}

impl DomainMask {
    /// Builds a mask from a flat membership array in grid order.
    pub fn from_inside(spec: GridSpec, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != spec.num_spatial() {
            return Err(Error::LengthMismatch {
                expected: spec.num_spatial(),
                found: inside.len(),
            });
        }
        let samples: Vec<usize> = inside
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        if samples.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(Self {
            spec,
            inside,
            samples,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    /// Flat indices of the grid points inside the domain, ascending.
    pub fn samples(&self) -> &[usize] {
        &self.samples
    }

    /// `N_omega`.
    pub fn n_omega(&self) -> usize {
        self.samples.len()
    }

    pub fn is_inside(&self, flat: usize) -> bool {
        self.inside.get(flat).copied().unwrap_or(false)
    }

    /// `N_omega / N_R`.
    pub fn fill_fraction(&self) -> f64 {
        self.n_omega() as f64 / self.spec.num_spatial() as f64
    }

    /// Whether there are at least as many samples as coefficients.
    pub fn is_oversampled(&self) -> bool {
        self.n_omega() >= self.spec.num_freq()
    }

    /// The same mask paired with a different frequency count.
    pub fn with_n_lambda(&self, n_lambda: usize) -> Result<Self> {
        let spec = GridSpec::new(
            self.spec.dim(),
            self.spec.n_r(),
            n_lambda,
            self.spec.half_width(),
        )?;
        Ok(Self {
            spec,
            inside: self.inside.clone(),
            samples: self.samples.clone(),
        })
    }

    /// Nearest-cell membership of an arbitrary physical point.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        if !self.spec.contains_point(x) {
            return false;
        }
        let n = self.spec.n_r();
        let h = self.spec.spacing();
        let mut flat = 0usize;
        for &xi in x {
            let k = ((xi + self.spec.half_width()) / h).round() as i64;
            // The grid is periodic in the box; the right edge wraps to index 0.
            let k = k.rem_euclid(n as i64) as usize;
            flat = flat * n + k;
        }
        self.inside[flat]
    }
}

/// Evaluates the domain at every grid point.
pub fn rasterize(domain: &DomainSpec, spec: &GridSpec) -> Result<DomainMask> {
    let inside = (0..spec.num_spatial())
        .map(|i| {
            let k = unflatten(i, spec).expect("index within grid");
            domain.contains(&spec.coordinate(&k))
        })
        .collect();
    DomainMask::from_inside(*spec, inside)
}

const MASK_MAGIC: &str = "MASK";

/// Serializes a 2D mask as `MASK n n` followed by `n` rows of `0`/`1`.
pub fn format_mask(mask: &DomainMask) -> Result<String> {
    let spec = mask.spec();
    if spec.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            op: "mask files",
            dim: spec.dim(),
        });
    }
    let n = spec.n_r();
    let mut out = String::with_capacity(n * (n + 1) + 16);
    out.push_str(&format!("{MASK_MAGIC} {n} {n}\n"));
    for row in mask.inside().chunks(n) {
        out.extend(row.iter().map(|&b| if b { '1' } else { '0' }));
        out.push('\n');
    }
    Ok(out)
}

pub fn save_mask(mask: &DomainMask, path: impl AsRef<Path>) -> Result<()> {
    let text = format_mask(mask)?;
    let mut file = fs::File::create(path.as_ref())?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Parses a mask file written by [`save_mask`]. Its size must match
/// `spec.n_r()` in both directions.
pub fn parse_mask(text: &str, spec: &GridSpec, path: &Path) -> Result<DomainMask> {
    if spec.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            op: "mask files",
            dim: spec.dim(),
        });
    }
    let bad = |line: usize, message: String| Error::MaskFormat {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != MASK_MAGIC {
        return Err(bad(
            1,
            format!("expected `{MASK_MAGIC} <rows> <cols>`, got `{header}`"),
        ));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| bad(1, format!("invalid size `{s}`")))
    };
    let (rows, cols) = (parse_dim(fields[1])?, parse_dim(fields[2])?);
    let n = spec.n_r();
    if rows != n {
        return Err(Error::DimensionMismatch {
            what: "mask rows",
            expected: n,
            found: rows,
        });
    }
    if cols != n {
        return Err(Error::DimensionMismatch {
            what: "mask columns",
            expected: n,
            found: cols,
        });
    }
    let body: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
    if body.len() != n {
        return Err(Error::DimensionMismatch {
            what: "mask rows",
            expected: n,
            found: body.len(),
        });
    }
    let mut inside = Vec::with_capacity(n * n);
    for (r, line) in body.iter().enumerate() {
        let line = line.trim_end();
        if line.chars().count() != n {
            return Err(Error::DimensionMismatch {
                what: "mask columns",
                expected: n,
                found: line.chars().count(),
            });
        }
        for ch in line.chars() {
            match ch {
                '0' => inside.push(false),
                '1' => inside.push(true),
                other => return Err(bad(r + 2, format!("unexpected character `{other}`"))),
            }
        }
    }
    DomainMask::from_inside(*spec, inside)
}

pub fn load_mask(path: impl AsRef<Path>, spec: &GridSpec) -> Result<DomainMask> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_mask(&text, spec, path)
}

/// Reads only the header of a mask file and returns its side length.
pub fn mask_file_size(path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or_default();
    let fields: Vec<&str> = header.split_whitespace().collect();
    match fields.as_slice() {
        [MASK_MAGIC, rows, _] => rows.parse().map_err(|_| Error::MaskFormat {
            path: path.to_path_buf(),
            line: 1,
            message: format!("invalid size `{rows}`"),
        }),
        _ => Err(Error::MaskFormat {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected `{MASK_MAGIC} <rows> <cols>`"),
        }),
    }
}

/// Whether any sample lies on the outermost ring of grid cells. Valid
/// domains lie strictly inside the box.
pub fn touches_border(mask: &DomainMask) -> bool {
    let spec = mask.spec();
    let n = spec.n_r();
    mask.samples().iter().any(|&i| {
        let k = unflatten(i, spec).expect("sample within grid");
        k.0.iter().any(|&c| c == 0 || c as usize == n - 1)
    })
}
