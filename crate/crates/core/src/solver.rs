//! Least-squares Fourier extension solvers.
//!
//! The fast solver projects the right-hand side onto the plunge region with
//! `P = A A^* - I`, solves the small-rank system `P A y = P b` through a
//! randomized range sketch, and finishes with the adjoint correction
//! `x = y + A^* (b - A y)`. The dense truncated SVD is the reference oracle.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::fourier::{CoeffVector, FrameOperator, SampleVector};
use crate::grid::{build_freq_window, unflatten, GridSpec};
use crate::linalg::{orthonormalize, thin_svd, CMat, ZERO};
use crate::topology::distance_layers;

/// Parameters of the fast solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative singular-value cutoff.
    pub eps: f64,
    /// Starting sketch rank; estimated from the boundary size when absent.
    pub rank_estimate: Option<usize>,
    /// Extra sketch columns beyond the rank estimate.
    pub oversampling: usize,
    /// Double the sketch width until it captures the numerical rank.
    pub adaptive: bool,
    pub seed: u64,
    /// Constant `c` in the rank estimate `c N_deltaOmega ln n_r`.
    pub rank_constant: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: 1e-14,
            rank_estimate: None,
            oversampling: 10,
            adaptive: true,
            seed: 0,
            rank_constant: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if !(self.rank_constant > 0.0 && self.rank_constant.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "rank constant must be positive, got {}",
                self.rank_constant
            )));
        }
        if self.rank_estimate == Some(0) {
            return Err(Error::InvalidConfig(
                "rank estimate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Wall-clock seconds spent in each stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub project: f64,
    pub sketch: f64,
    pub factor: f64,
    pub correct: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Number of singular values retained.
    pub rank_used: usize,
    /// Final sketch width (equals `rank_used` for dense solves).
    pub sketch_width: usize,
    /// `||A x - b||_2`.
    pub residual_norm: f64,
    /// `||x||_2`.
    pub coefficient_norm: f64,
    /// Number of adaptive width doublings.
    pub doublings: usize,
    pub adaptive_triggered: bool,
    pub timings: StageTimings,
}

/// Low-rank solution of `P A y = P b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlungeSolution {
    pub y: CoeffVector,
    pub rank: usize,
    pub width: usize,
    pub doublings: usize,
    pub sketch_seconds: f64,
    pub factor_seconds: f64,
}

/// `ceil(c * n_boundary * ln n_r)`.
pub fn plunge_rank_formula(n_boundary: usize, n_r: usize, c: f64) -> usize {
    (c * n_boundary as f64 * (n_r as f64).ln()).ceil() as usize
}

/// Starting rank for the sketch: the boundary-size heuristic clamped to
/// `[1, min(N_omega, N_lambda)]`. The cutoff only enters through `c`.
pub fn estimate_plunge_rank(op: &FrameOperator, c: f64) -> Result<usize> {
    let layers = distance_layers(op.mask())?;
    let raw = plunge_rank_formula(layers.n_boundary(), op.spec().n_r(), c);
    Ok(raw.clamp(1, op.n_rows().min(op.n_cols()).max(1)))
}

/// Seeded Gaussian `rows x cols` matrix with orthonormalized columns. The
/// entries are drawn column by column, so a wider sketch with the same seed
/// extends a narrower one.
fn gaussian_sketch(rows: usize, cols: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let v: f64 = StandardNormal.sample(&mut rng);
            g[(i, j)] = Complex64::new(v, 0.0);
        }
    }
    orthonormalize(&g)
}

/// Columns `P A q_j` of the sketched operator.
fn sketch_plunge(op: &FrameOperator, q: &CMat) -> Result<CMat> {
    let m = op.n_rows();
    let cols: Vec<Vec<Complex64>> = (0..q.ncols())
        .into_par_iter()
        .map_init(
            || (op.context(), vec![ZERO; m]),
            |(ctx, tmp), j| {
                let qj: Vec<Complex64> = q.col(j).iter().copied().collect();
                let mut out = vec![ZERO; m];
                op.apply_a_into(ctx, &qj, tmp)?;
                op.apply_p_into(ctx, tmp, &mut out)?;
                Ok(out)
            },
        )
        .collect::<Result<_>>()?;
    Ok(CMat::from_fn(m, cols.len(), |i, j| cols[j][i]))
}

/// Solves `P A y = P b` in the range of a seeded random sketch, truncating
/// singular values of `W = P A Q` below `eps * sigma_max(W)`.
pub fn randomized_plunge_solve(
    op: &FrameOperator,
    pb: &SampleVector,
    cfg: &SolverConfig,
) -> Result<PlungeSolution> {
    cfg.validate()?;
    if pb.len() != op.n_rows() {
        return Err(Error::LengthMismatch {
            expected: op.n_rows(),
            found: pb.len(),
        });
    }
    let n = op.n_cols();
    let limit = op.n_rows().min(n);
    let zero = |width, doublings, sketch_seconds, factor_seconds| PlungeSolution {
        y: CoeffVector::zeros(n),
        rank: 0,
        width,
        doublings,
        sketch_seconds,
        factor_seconds,
    };
    if pb.iter().all(|z| *z == ZERO) {
        return Ok(zero(0, 0, 0.0, 0.0));
    }
    let start = match cfg.rank_estimate {
        Some(r) => r,
        None if op.spec().dim() == 2 => estimate_plunge_rank(op, cfg.rank_constant)?,
        None => limit,
    };
    let mut width = (start + cfg.oversampling).clamp(1, n);
    let mut doublings = 0;
    let mut sketch_seconds = 0.0;
    let mut factor_seconds = 0.0;
    loop {
        let t = Instant::now();
        let q = gaussian_sketch(n, width, cfg.seed);
        let w = sketch_plunge(op, &q)?;
        sketch_seconds += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let svd = thin_svd(&w)?;
        factor_seconds += t.elapsed().as_secs_f64();
        let s_max = svd.s.first().copied().unwrap_or(0.0);
        if s_max <= cfg.eps {
            // P A vanishes numerically: the adjoint correction alone solves it.
            return Ok(zero(width, doublings, sketch_seconds, factor_seconds));
        }
        let s_min = svd.s.last().copied().unwrap_or(0.0);
        let captured = s_min / s_max <= cfg.eps;
        if !captured && cfg.adaptive && width < n {
            width = (2 * width).min(n);
            doublings += 1;
            continue;
        }
        if !captured && op.n_rows() < n && svd.s.len() >= op.n_rows() {
            return Err(Error::RankExceeded {
                needed: width,
                limit,
            });
        }

        let t = Instant::now();
        let rank = svd.s.iter().take_while(|&&s| s > cfg.eps * s_max).count();
        // y = Q V_r diag(1/s) U_r^* Pb
        let mut t_r: Vec<Complex64> = (0..rank)
            .map(|k| {
                let uk = svd.u.col(k);
                uk.iter()
                    .zip(pb.iter())
                    .map(|(u, b)| u.conj() * b)
                    .sum::<Complex64>()
                    / svd.s[k]
            })
            .collect();
        let mut vt = vec![ZERO; width];
        for (k, tk) in t_r.drain(..).enumerate() {
            for (i, v) in svd.v.col(k).iter().enumerate() {
                vt[i] += v * tk;
            }
        }
        let mut y = vec![ZERO; n];
        for (j, &c) in vt.iter().enumerate() {
            for (i, qij) in q.col(j).iter().enumerate() {
                y[i] += qij * c;
            }
        }
        factor_seconds += t.elapsed().as_secs_f64();
        return Ok(PlungeSolution {
            y: CoeffVector(y),
            rank,
            width,
            doublings,
            sketch_seconds,
            factor_seconds,
        });
    }
}

/// The plunge-projection solver: `y` from the projected system, then
/// `x = y + A^* (b - A y)`.
pub fn solve_algorithm1(
    op: &FrameOperator,
    b: &SampleVector,
    cfg: &SolverConfig,
) -> Result<(CoeffVector, SolveReport)> {
    cfg.validate()?;
    if b.len() != op.n_rows() {
        return Err(Error::LengthMismatch {
            expected: op.n_rows(),
            found: b.len(),
        });
    }
    let total = Instant::now();
    let mut ctx = op.context();

    let t = Instant::now();
    let mut pb = SampleVector::zeros(op.n_rows());
    op.apply_p_into(&mut ctx, b, &mut pb)?;
    let project = t.elapsed().as_secs_f64();

    let plunge = randomized_plunge_solve(op, &pb, cfg)?;

    let t = Instant::now();
    let mut r = SampleVector::zeros(op.n_rows());
    op.apply_a_into(&mut ctx, &plunge.y, &mut r)?;
    for (ri, bi) in r.iter_mut().zip(b.iter()) {
        *ri = bi - *ri;
    }
    let mut x = CoeffVector::zeros(op.n_cols());
    op.apply_adjoint_into(&mut ctx, &r, &mut x)?;
    for (xi, yi) in x.iter_mut().zip(plunge.y.iter()) {
        *xi += yi;
    }
    let correct = t.elapsed().as_secs_f64();

    let residual_norm = residual(op, &x, b)?;
    let report = SolveReport {
        rank_used: plunge.rank,
        sketch_width: plunge.width,
        residual_norm,
        coefficient_norm: x.norm(),
        doublings: plunge.doublings,
        adaptive_triggered: plunge.doublings > 0,
        timings: StageTimings {
            project,
            sketch: plunge.sketch_seconds,
            factor: plunge.factor_seconds,
            correct,
            total: total.elapsed().as_secs_f64(),
        },
    };
    Ok((x, report))
}

/// Truncated SVD solution `x = sum_{sigma_i >= eps} v_i (u_i^* b) / sigma_i`
/// of the dense system.
pub fn solve_dense_tsvd(
    op: &FrameOperator,
    b: &SampleVector,
    eps: f64,
) -> Result<(CoeffVector, SolveReport)> {
    if b.len() != op.n_rows() {
        return Err(Error::LengthMismatch {
            expected: op.n_rows(),
            found: b.len(),
        });
    }
    let total = Instant::now();
    let a = op.materialize_a_dense()?;
    let t = Instant::now();
    let svd = thin_svd(&a)?;
    let factor = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let rank = svd.s.iter().take_while(|&&s| s >= eps).count();
    let mut x = vec![ZERO; op.n_cols()];
    for k in 0..rank {
        let coef = svd
            .u
            .col(k)
            .iter()
            .zip(b.iter())
            .map(|(u, bi)| u.conj() * bi)
            .sum::<Complex64>()
            / svd.s[k];
        for (xi, v) in x.iter_mut().zip(svd.v.col(k).iter()) {
            *xi += v * coef;
        }
    }
    let x = CoeffVector(x);
    let correct = t.elapsed().as_secs_f64();
    let report = SolveReport {
        rank_used: rank,
        sketch_width: rank,
        residual_norm: residual(op, &x, b)?,
        coefficient_norm: x.norm(),
        doublings: 0,
        adaptive_triggered: false,
        timings: StageTimings {
            project: 0.0,
            sketch: 0.0,
            factor,
            correct,
            total: total.elapsed().as_secs_f64(),
        },
    };
    Ok((x, report))
}

/// `||A x - b||_2`.
pub fn residual(op: &FrameOperator, x: &CoeffVector, b: &SampleVector) -> Result<f64> {
    let ax = op.apply_a(x)?;
    Ok(ax
        .iter()
        .zip(b.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Samples of `f` on `P_omega`, in mask order.
pub fn sample_on_mask(op: &FrameOperator, f: impl Fn(&[f64]) -> f64) -> SampleVector {
    let spec = op.spec();
    SampleVector::from_real(op.mask().samples().iter().map(|&i| {
        let k = unflatten(i, spec).expect("sample within grid");
        f(&spec.coordinate(&k))
    }))
}

/// Direct summation of `sum_l c_l exp(2 pi i l . u(x))` at physical points.
/// The approximant of a least-squares solution is this value over
/// `sqrt(N_R)`.
pub fn evaluate_series(
    spec: &GridSpec,
    c: &CoeffVector,
    points: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    let window = build_freq_window(spec);
    if c.len() != window.len() {
        return Err(Error::LengthMismatch {
            expected: window.len(),
            found: c.len(),
        });
    }
    let (lo, _) = spec.freq_range();
    let n_lambda = spec.n_lambda();
    let digits: Vec<Vec<usize>> = window
        .indices()
        .iter()
        .map(|l| l.components().iter().map(|&v| (v - lo) as usize).collect())
        .collect();
    let mut phases = vec![ZERO; spec.dim() * n_lambda];
    points
        .iter()
        .map(|x| {
            if !spec.contains_point(x) {
                return Err(Error::PointOutsideBox(x.clone()));
            }
            for (d, &xd) in x.iter().enumerate() {
                let u = spec.to_unit(xd);
                for j in 0..n_lambda {
                    let l = lo + j as i64;
                    phases[d * n_lambda + j] =
                        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 * u);
                }
            }
            Ok(c.iter()
                .zip(&digits)
                .map(|(cl, ds)| {
                    ds.iter()
                        .enumerate()
                        .fold(*cl, |acc, (d, &j)| acc * phases[d * n_lambda + j])
                })
                .sum())
        })
        .collect()
}

/// Uniform random points of a domain by rejection from the bounding box.
pub fn sample_interior(
    domain: &DomainSpec,
    spec: &GridSpec,
    n_samples: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = spec.half_width();
    let dist = Uniform::new(-t, t).expect("non-empty box");
    let mut out = Vec::with_capacity(n_samples);
    let max_tries = n_samples.saturating_mul(10_000).max(10_000);
    for _ in 0..max_tries {
        if out.len() == n_samples {
            break;
        }
        let x: Vec<f64> = (0..spec.dim()).map(|_| dist.sample(&mut rng)).collect();
        if domain.contains(&x) {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// `||A c - b||_2` with `b = f` on `P_omega`.
    pub residual: f64,
    /// Largest `|f(x) - approximant(x)|` over random interior points.
    pub max_error: f64,
    pub n_points: usize,
}

/// Residual on the grid and maximum pointwise error at seeded random
/// interior points.
pub fn error_metrics(
    op: &FrameOperator,
    domain: &DomainSpec,
    c: &CoeffVector,
    f: impl Fn(&[f64]) -> f64,
    n_samples: usize,
    seed: u64,
) -> Result<ErrorMetrics> {
    let b = sample_on_mask(op, &f);
    let residual = residual(op, c, &b)?;
    let points = sample_interior(domain, op.spec(), n_samples, seed);
    let values = evaluate_series(op.spec(), c, &points)?;
    let scale = op.scale();
    let max_error = points
        .iter()
        .zip(&values)
        .map(|(x, v)| (v * scale - f(x)).norm())
        .fold(0.0, f64::max);
    Ok(ErrorMetrics {
        residual,
        max_error,
        n_points: points.len(),
    })
}
