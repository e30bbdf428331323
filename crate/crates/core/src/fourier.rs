//! The collocation operator `A`, its adjoint, and the plunge projection
//! `P = A A^* - I`, applied matrix-free through FFTs.
//!
//! `A` maps frequency coefficients to samples on `P_omega`:
//! `(A c)_k = N_R^{-1/2} sum_l c_l exp(2 pi i k.l / n_r)`, which is exactly a
//! row/column subblock of the unitary D-dimensional DFT. Applying it means
//! scattering `c` into an `N_R` array at the slots `l mod n_r`, running an
//! unnormalized inverse FFT, and gathering the samples inside the mask.
//! The adjoint runs the opposite path with a forward FFT.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::domain::DomainMask;
use crate::error::{Error, Result};
use crate::grid::{build_freq_window, unflatten, FreqWindow, GridSpec, MultiIndex};
use crate::linalg::{CMat, ZERO};

/// Default bound on the number of entries of any dense materialization.
pub const DEFAULT_DENSE_CAP: usize = 1 << 24;

macro_rules! complex_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, Default, PartialEq)]
        pub struct $name(pub Vec<Complex64>);

        impl $name {
            pub fn zeros(len: usize) -> Self {
                Self(vec![ZERO; len])
            }

            pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
                Self(values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
            }

            pub fn norm(&self) -> f64 {
                crate::linalg::norm2(&self.0)
            }

            pub fn into_inner(self) -> Vec<Complex64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [Complex64];

            fn deref(&self) -> &[Complex64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [Complex64] {
                &mut self.0
            }
        }

        impl From<Vec<Complex64>> for $name {
            fn from(v: Vec<Complex64>) -> Self {
                Self(v)
            }
        }
    };
}

complex_vector!(
    /// Coefficients indexed by the frequency window, length `N_lambda`.
    CoeffVector
);
complex_vector!(
    /// Values on the sample set `P_omega` in mask order, length `N_omega`.
    SampleVector
);

/// The collocation operator for one grid and mask.
#[derive(Clone)]
pub struct FrameOperator {
    spec: GridSpec,
    mask: Arc<DomainMask>,
    window: FreqWindow,
    /// Flat grid slot of each frequency (`l mod n_r` per component).
    freq_slots: Vec<usize>,
    scale: f64,
    dense_cap: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FrameOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameOperator")
            .field("spec", &self.spec)
            .field("n_omega", &self.mask.n_omega())
            .field("dense_cap", &self.dense_cap)
            .finish()
    }
}

/// FFT workspaces for one thread of operator applications.
#[derive(Clone)]
pub struct ApplyContext {
    grid: Vec<Complex64>,
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

impl FrameOperator {
    pub fn new(mask: DomainMask) -> Self {
        Self::from_shared(Arc::new(mask))
    }

    pub fn from_shared(mask: Arc<DomainMask>) -> Self {
        let spec = *mask.spec();
        let window = build_freq_window(&spec);
        let n = spec.n_r() as i64;
        let freq_slots = window
            .indices()
            .iter()
            .map(|l| {
                l.components().iter().fold(0usize, |acc, &c| {
                    acc * spec.n_r() + c.rem_euclid(n) as usize
                })
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(spec.n_r());
        let inverse = planner.plan_fft_inverse(spec.n_r());
        Self {
            scale: 1.0 / (spec.num_spatial() as f64).sqrt(),
            spec,
            mask,
            window,
            freq_slots,
            dense_cap: DEFAULT_DENSE_CAP,
            forward,
            inverse,
        }
    }

    pub fn with_dense_cap(mut self, cap: usize) -> Self {
        self.dense_cap = cap;
        self
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn shared_mask(&self) -> Arc<DomainMask> {
        Arc::clone(&self.mask)
    }

    pub fn window(&self) -> &FreqWindow {
        &self.window
    }

    pub fn dense_cap(&self) -> usize {
        self.dense_cap
    }

    /// `N_omega`, the number of rows of `A`.
    pub fn n_rows(&self) -> usize {
        self.mask.n_omega()
    }

    /// `N_lambda`, the number of columns of `A`.
    pub fn n_cols(&self) -> usize {
        self.window.len()
    }

    /// The normalization `1 / sqrt(N_R)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn context(&self) -> ApplyContext {
        let scratch_len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        ApplyContext {
            grid: vec![ZERO; self.spec.num_spatial()],
            scratch: vec![ZERO; scratch_len],
            line: vec![ZERO; self.spec.n_r()],
            coeffs: vec![ZERO; self.n_cols()],
        }
    }

    /// `out = A c`.
    pub fn apply_a_into(
        &self,
        ctx: &mut ApplyContext,
        c: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        check_len(self.n_cols(), c.len())?;
        check_len(self.n_rows(), out.len())?;
        ctx.grid.fill(ZERO);
        for (&slot, &v) in self.freq_slots.iter().zip(c) {
            ctx.grid[slot] = v;
        }
        self.transform(ctx, Direction::Synthesis);
        for (o, &i) in out.iter_mut().zip(self.mask.samples()) {
            *o = ctx.grid[i] * self.scale;
        }
        Ok(())
    }

    /// `out = A^* s`.
    pub fn apply_adjoint_into(
        &self,
        ctx: &mut ApplyContext,
        s: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        check_len(self.n_rows(), s.len())?;
        check_len(self.n_cols(), out.len())?;
        ctx.grid.fill(ZERO);
        for (&i, &v) in self.mask.samples().iter().zip(s) {
            ctx.grid[i] = v;
        }
        self.transform(ctx, Direction::Analysis);
        for (o, &slot) in out.iter_mut().zip(&self.freq_slots) {
            *o = ctx.grid[slot] * self.scale;
        }
        Ok(())
    }

    /// `out = A A^* s - s`.
    pub fn apply_p_into(
        &self,
        ctx: &mut ApplyContext,
        s: &[Complex64],
        out: &mut [Complex64],
    ) -> Result<()> {
        check_len(self.n_rows(), s.len())?;
        let mut coeffs = std::mem::take(&mut ctx.coeffs);
        let res = self
            .apply_adjoint_into(ctx, s, &mut coeffs)
            .and_then(|_| self.apply_a_into(ctx, &coeffs, out));
        ctx.coeffs = coeffs;
        res?;
        for (o, &v) in out.iter_mut().zip(s) {
            *o -= v;
        }
        Ok(())
    }

    pub fn apply_a(&self, c: &CoeffVector) -> Result<SampleVector> {
        let mut out = SampleVector::zeros(self.n_rows());
        self.apply_a_into(&mut self.context(), c, &mut out)?;
        Ok(out)
    }

    pub fn apply_adjoint(&self, s: &SampleVector) -> Result<CoeffVector> {
        let mut out = CoeffVector::zeros(self.n_cols());
        self.apply_adjoint_into(&mut self.context(), s, &mut out)?;
        Ok(out)
    }

    pub fn apply_p(&self, s: &SampleVector) -> Result<SampleVector> {
        let mut out = SampleVector::zeros(self.n_rows());
        self.apply_p_into(&mut self.context(), s, &mut out)?;
        Ok(out)
    }

    /// Dense `N_omega x N_lambda` matrix of `A`.
    pub fn materialize_a_dense(&self) -> Result<CMat> {
        let entries = self.n_rows() * self.n_cols();
        self.check_cap(entries)?;
        let n = self.spec.n_r();
        let twiddle: Vec<Complex64> = (0..n)
            .map(|m| Complex64::from_polar(self.scale, 2.0 * PI * m as f64 / n as f64))
            .collect();
        let rows = self.sample_indices();
        let cols: Vec<Vec<usize>> = self
            .window
            .indices()
            .iter()
            .map(|l| {
                l.components()
                    .iter()
                    .map(|&c| c.rem_euclid(n as i64) as usize)
                    .collect()
            })
            .collect();
        Ok(CMat::from_fn(self.n_rows(), self.n_cols(), |i, j| {
            let m = rows[i]
                .iter()
                .zip(&cols[j])
                .fold(0usize, |acc, (&k, &l)| (acc + k * l) % n);
            twiddle[m]
        }))
    }

    /// Dense `N_omega x N_omega` matrix `T B T` with entries `B(k - l)`
    /// from the Dirichlet kernel. Only equal to `A A^*` for odd `n_lambda`.
    pub fn materialize_tbt(&self) -> Result<faer::Mat<f64>> {
        if self.spec.n_lambda() % 2 == 0 {
            return Err(Error::InvalidConfig(
                "the Dirichlet kernel form of A A^* requires odd n_lambda".into(),
            ));
        }
        let n_omega = self.n_rows();
        self.check_cap(n_omega * n_omega)?;
        let table = DirichletTable::new(&self.spec);
        let rows = self.sample_indices();
        Ok(faer::Mat::from_fn(n_omega, n_omega, |i, j| {
            table.product(&rows[i], &rows[j])
        }))
    }

    /// Spatial multi-indices of the samples, in mask order.
    pub fn sample_indices(&self) -> Vec<Vec<usize>> {
        self.mask
            .samples()
            .iter()
            .map(|&i| {
                unflatten(i, &self.spec)
                    .expect("sample within grid")
                    .components()
                    .iter()
                    .map(|&c| c as usize)
                    .collect()
            })
            .collect()
    }

    fn check_cap(&self, entries: usize) -> Result<()> {
        if entries > self.dense_cap {
            return Err(Error::DenseCapExceeded {
                entries,
                cap: self.dense_cap,
            });
        }
        Ok(())
    }

    /// In-place D-dimensional transform of `ctx.grid`, axis by axis.
    fn transform(&self, ctx: &mut ApplyContext, direction: Direction) {
        let fft = match direction {
            Direction::Synthesis => &self.inverse,
            Direction::Analysis => &self.forward,
        };
        let n = self.spec.n_r();
        let dim = self.spec.dim();
        let total = ctx.grid.len();
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(&mut ctx.grid, &mut ctx.scratch);
                continue;
            }
            let block = stride * n;
            for start in (0..total).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (i, v) in ctx.line.iter_mut().enumerate() {
                        *v = ctx.grid[base + i * stride];
                    }
                    fft.process_with_scratch(&mut ctx.line, &mut ctx.scratch);
                    for (i, v) in ctx.line.iter().enumerate() {
                        ctx.grid[base + i * stride] = *v;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    /// Coefficients to samples (`exp(+2 pi i ...)`).
    Synthesis,
    /// Samples to coefficients (`exp(-2 pi i ...)`).
    Analysis,
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Univariate Dirichlet kernel `sin(pi n_lambda k / n_r) / (n_r sin(pi k / n_r))`,
/// extended periodically with period `n_r` and with value `n_lambda / n_r`
/// at multiples of `n_r`.
pub fn dirichlet_b(k: i64, n_r: usize, n_lambda: usize) -> f64 {
    let mut m = k.rem_euclid(n_r as i64) as usize;
    if m == 0 {
        return n_lambda as f64 / n_r as f64;
    }
    // Fold onto [0, n_r / 2] so that b(-k) and b(k) are computed from the
    // same arguments; b(n_r - m) = (-1)^(n_lambda + 1) b(m).
    let mut sign = 1.0;
    if 2 * m > n_r {
        m = n_r - m;
        if n_lambda % 2 == 0 {
            sign = -1.0;
        }
    }
    let x = PI * m as f64 / n_r as f64;
    sign * (n_lambda as f64 * x).sin() / (n_r as f64 * x.sin())
}

/// Multivariate kernel `B(k) = prod_d b(k_d)`.
pub fn kernel_b(k: &MultiIndex, spec: &GridSpec) -> f64 {
    k.components()
        .iter()
        .map(|&c| dirichlet_b(c, spec.n_r(), spec.n_lambda()))
        .product()
}

/// Precomputed `b(d)` for all differences `d` in `(-n_r, n_r)`.
#[derive(Clone, Debug)]
pub(crate) struct DirichletTable {
    values: Vec<f64>,
    offset: usize,
}

impl DirichletTable {
    pub(crate) fn new(spec: &GridSpec) -> Self {
        let n = spec.n_r();
        let values = (0..2 * n - 1)
            .map(|i| dirichlet_b(i as i64 - (n as i64 - 1), n, spec.n_lambda()))
            .collect();
        Self {
            values,
            offset: n - 1,
        }
    }

    #[inline]
    pub(crate) fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k + self.offset - l]
    }

    pub(crate) fn product(&self, k: &[usize], l: &[usize]) -> f64 {
        k.iter().zip(l).map(|(&a, &b)| self.get(a, b)).product()
    }
}
