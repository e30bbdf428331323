//! Dense complex linear algebra used by the oracles and the low-rank solve.
//!
//! Thin wrappers over `faer` that fix the ordering conventions used in the
//! rest of the crate: singular values and eigenvalues are returned in
//! descending order with their vectors permuted to match.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Mat<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `U diag(s) V^*` with `s` descending.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn thin_svd(a: &CMat) -> Result<ThinSvd> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(ThinSvd {
            u: CMat::zeros(a.nrows(), 0),
            s: Vec::new(),
            v: CMat::zeros(a.ncols(), 0),
        });
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Linalg(format!("svd did not converge: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let order = descending_order(&s);
    Ok(ThinSvd {
        u: permute_columns(svd.U(), &order),
        s: order.iter().map(|&i| s[i]).collect(),
        v: permute_columns(svd.V(), &order),
    })
}

pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut s = a
        .singular_values()
        .map_err(|e| Error::Linalg(format!("svd did not converge: {e:?}")))?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Eigenpairs of a Hermitian matrix (lower triangle referenced), eigenvalues
/// descending.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e:?}")))?;
    let w: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let order = descending_order(&w);
    Ok((
        order.iter().map(|&i| w[i]).collect(),
        permute_columns(evd.U(), &order),
    ))
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let mut w = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e:?}")))?;
    w.sort_by(|x, y| y.total_cmp(x));
    Ok(w)
}

/// Orthonormal basis for the column space of a full-column-rank `a`
/// (thin Householder Q).
pub fn orthonormalize(a: &CMat) -> CMat {
    a.qr().compute_thin_Q()
}

pub fn matvec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![ZERO; a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == ZERO {
            continue;
        }
        let col = a.col(j);
        for (yi, aij) in y.iter_mut().zip(col.iter()) {
            *yi += aij * xj;
        }
    }
    y
}

pub fn adjoint_matvec(a: &CMat, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.nrows(), x.len());
    (0..a.ncols())
        .map(|j| inner(a.col(j).iter().copied(), x.iter().copied()))
        .collect()
}

/// `sum conj(x_i) y_i`.
pub fn inner(
    x: impl IntoIterator<Item = Complex64>,
    y: impl IntoIterator<Item = Complex64>,
) -> Complex64 {
    x.into_iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order
}

fn permute_columns(m: faer::MatRef<'_, Complex64>, order: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), order.len(), |i, j| m[(i, order[j])])
}
