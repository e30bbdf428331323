//! Spectral diagnostics of the collocation matrix: singular-value profiles
//! and plunge counts, the trace identities of the time-frequency limiting
//! operator `T B T = A A^*`, the eigenvalue counting bounds, and the
//! periodic discrete prolate spheroidal sequences.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{DirichletTable, FrameOperator};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, singular_values, CMat};

/// Singular values of `A`, descending, split at `eps` and `1 - eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub sigma: Vec<f64>,
    pub eps: f64,
    /// `#{sigma >= 1 - eps}`.
    pub n_upper: usize,
    /// `#{eps < sigma < 1 - eps}`, the plunge region size.
    pub eta: usize,
    /// `#{sigma <= eps}`.
    pub n_lower: usize,
}

impl SpectralProfile {
    pub fn from_singular_values(mut sigma: Vec<f64>, eps: f64) -> Self {
        sigma.sort_by(|a, b| b.total_cmp(a));
        let n_upper = sigma.iter().filter(|&&s| s >= 1.0 - eps).count();
        let n_lower = sigma.iter().filter(|&&s| s <= eps).count();
        let eta = sigma.len() - n_upper - n_lower;
        Self {
            sigma,
            eps,
            n_upper,
            eta,
            n_lower,
        }
    }

    /// `lambda_i = sigma_i^2`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.sigma.iter().map(|s| s * s).collect()
    }

    /// CSV with columns `index,sigma` and a footer with the counts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,sigma\n");
        for (i, s) in self.sigma.iter().enumerate() {
            let _ = writeln!(out, "{},{:.16e}", i + 1, s);
        }
        let _ = writeln!(
            out,
            "# eps={:e}, upper={}, eta={}, lower={}",
            self.eps, self.n_upper, self.eta, self.n_lower
        );
        out
    }
}

/// Dense SVD profile of `A`.
pub fn singular_profile(op: &FrameOperator, eps: f64) -> Result<SpectralProfile> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidConfig(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let a = op.materialize_a_dense()?;
    Ok(SpectralProfile::from_singular_values(
        singular_values(&a)?,
        eps,
    ))
}

/// Plunge count from eigenvalues of `A A^*`, with the `sigma` thresholds
/// mapped to `(eps^2, (1 - eps)^2)`.
pub fn plunge_count_from_eigenvalues(lambda: &[f64], eps: f64) -> usize {
    let (lo, hi) = (eps * eps, (1.0 - eps) * (1.0 - eps));
    lambda.iter().filter(|&&l| l > lo && l < hi).count()
}

/// The `min(N_omega, N_lambda)` eigenvalues of `A A^*` that are not
/// structurally zero, descending. They are taken from the smaller of the
/// two Gram matrices: the structural zeros of the larger one come out as
/// roundoff of size `1e-16`, far above `eps^2` for small `eps`.
pub fn gram_eigenvalues(op: &FrameOperator) -> Result<Vec<f64>> {
    let r = op.n_rows().min(op.n_cols());
    check_cap(op, r * r)?;
    let a = op.materialize_a_dense()?;
    if op.n_cols() <= op.n_rows() {
        hermitian_eigenvalues(&(a.adjoint() * &a))
    } else {
        hermitian_eigenvalues(&(&a * a.adjoint()))
    }
}

/// `tr(T B T) = N_omega N_lambda / N_R`.
pub fn trace_tbt(op: &FrameOperator) -> f64 {
    op.n_rows() as f64 * op.spec().num_freq() as f64 / op.spec().num_spatial() as f64
}

/// `sum sigma_i^2` from the dense singular values.
pub fn trace_tbt_dense(op: &FrameOperator) -> Result<f64> {
    let a = op.materialize_a_dense()?;
    Ok(singular_values(&a)?.iter().map(|s| s * s).sum())
}

/// `tr((T B T)^2) = sum_{k,l in P_omega} B(k - l)^2`. Uses the kernel for odd
/// `n_lambda` and the dense singular values otherwise.
pub fn trace_tbt_squared(op: &FrameOperator) -> Result<f64> {
    if op.spec().n_lambda() % 2 == 1 {
        Ok(trace_tbt_squared_kernel(op))
    } else {
        trace_tbt_squared_dense(op)
    }
}

/// Direct `O(N_omega^2)` kernel sum; only meaningful for odd `n_lambda`.
pub fn trace_tbt_squared_kernel(op: &FrameOperator) -> f64 {
    let table = DirichletTable::new(op.spec());
    let rows = op.sample_indices();
    rows.iter()
        .map(|k| {
            rows.iter()
                .map(|l| table.product(k, l).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// `sum sigma_i^4` from the dense singular values.
pub fn trace_tbt_squared_dense(op: &FrameOperator) -> Result<f64> {
    let a = op.materialize_a_dense()?;
    Ok(singular_values(&a)?.iter().map(|s| s.powi(4)).sum())
}

/// Eigenvalue counting bounds with `delta = eps^2`.
///
/// With `g = tr(TBT) - tr((TBT)^2)`, the index of the first eigenvalue below
/// `1 - delta` satisfies `k_min >= tr - g / delta` and the number of
/// eigenvalues above `delta` satisfies `k_max <= tr + g / delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlungeBoundReport {
    pub eps: f64,
    pub delta: f64,
    pub trace: f64,
    pub trace_squared: f64,
    pub g: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl PlungeBoundReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

pub fn plunge_bound_check(op: &FrameOperator, eps: f64) -> Result<PlungeBoundReport> {
    let a = op.materialize_a_dense()?;
    let sigma = singular_values(&a)?;
    let trace = trace_tbt(op);
    let trace_squared = trace_tbt_squared(op)?;
    Ok(plunge_bound_from_lambdas(
        &sigma.iter().map(|s| s * s).collect::<Vec<_>>(),
        trace,
        trace_squared,
        eps,
    ))
}

/// The counting bounds evaluated on a measured eigenvalue profile.
pub fn plunge_bound_from_lambdas(
    lambda: &[f64],
    trace: f64,
    trace_squared: f64,
    eps: f64,
) -> PlungeBoundReport {
    let delta = eps * eps;
    let g = trace - trace_squared;
    let k_min = lambda.iter().filter(|&&l| l >= 1.0 - delta).count() + 1;
    let k_max = lambda.iter().filter(|&&l| l > delta).count();
    let lower_bound = trace - g / delta;
    let upper_bound = trace + g / delta;
    // Roundoff slack: at g = 0 (the unitary case) both sides coincide.
    let slack = 1e-9 * trace.abs().max(1.0);
    PlungeBoundReport {
        eps,
        delta,
        trace,
        trace_squared,
        g,
        k_min,
        k_max,
        lower_bound,
        upper_bound,
        lower_holds: k_min as f64 >= lower_bound - slack,
        upper_holds: k_max as f64 <= upper_bound + slack,
    }
}

/// Paired eigenvectors of `A^* A` (coefficient side) and `A A^*` (sample
/// side) with eigenvalues descending. The coefficient vectors are
/// orthonormal; the sample vectors are `A v_i`, so that
/// `<phi_i, phi_j>_omega = lambda_i delta_ij`.
#[derive(Clone, Debug)]
pub struct ProlateSet {
    pub eigenvalues: Vec<f64>,
    /// `N_lambda x r`.
    pub coeff_vectors: CMat,
    /// `N_omega x r`.
    pub sample_vectors: CMat,
}

impl ProlateSet {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sample_vector(&self, i: usize) -> Vec<Complex64> {
        self.sample_vectors.col(i).iter().copied().collect()
    }

    pub fn coeff_vector(&self, i: usize) -> Vec<Complex64> {
        self.coeff_vectors.col(i).iter().copied().collect()
    }

    /// Index of the eigenvalue closest to `target`.
    pub fn nearest(&self, target: f64) -> Option<usize> {
        (0..self.len()).min_by(|&i, &j| {
            (self.eigenvalues[i] - target)
                .abs()
                .total_cmp(&(self.eigenvalues[j] - target).abs())
        })
    }
}

/// Tolerance for matching the spectra of `A^* A` and `A A^*`.
pub const PAIRING_TOLERANCE: f64 = 1e-8;

pub fn prolate_decomposition(op: &FrameOperator) -> Result<ProlateSet> {
    let (m, n) = (op.n_rows(), op.n_cols());
    check_cap(op, m.max(n).pow(2))?;
    let a = op.materialize_a_dense()?;
    let (lambda, v) = hermitian_eigen(&(a.adjoint() * &a))?;
    let lambda_sample = hermitian_eigenvalues(&(&a * a.adjoint()))?;
    let r = m.min(n);
    for i in 0..r {
        if (lambda[i] - lambda_sample[i]).abs() > PAIRING_TOLERANCE {
            return Err(Error::Linalg(format!(
                "eigenvalue {i} of A^*A ({}) does not pair with A A^* ({})",
                lambda[i], lambda_sample[i]
            )));
        }
    }
    let coeff_vectors = CMat::from_fn(n, r, |i, j| v[(i, j)]);
    let sample_vectors = &a * &coeff_vectors;
    Ok(ProlateSet {
        eigenvalues: lambda[..r].to_vec(),
        coeff_vectors,
        sample_vectors,
    })
}

fn check_cap(op: &FrameOperator, entries: usize) -> Result<()> {
    if entries > op.dense_cap() {
        return Err(Error::DenseCapExceeded {
            entries,
            cap: op.dense_cap(),
        });
    }
    Ok(())
}
