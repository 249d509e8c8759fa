//! Dense complex linear algebra used by the precoders and rate evaluators.
//!
//! Hermitian positive definite systems are handled by an in-crate Cholesky
//! factorization so that one factor can be reused for many column solves.
//! Null spaces and pseudo-inverses go through nalgebra's SVD.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Relative singular-value cutoff for null spaces and pseudo-inverses.
pub const RANK_TOL: f64 = 1e-12;

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `(A + A^H) / 2`.
pub fn hermitize(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Gram matrix `H H^H`, symmetrized.
pub fn gram(h: &ComplexMatrix) -> ComplexMatrix {
    hermitize(&(h * h.adjoint()))
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.norm()
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Adds a real diagonal to a square matrix.
pub fn add_diagonal(a: &ComplexMatrix, diag: &[f64]) -> ComplexMatrix {
    assert_eq!(a.nrows(), diag.len());
    let mut out = a.clone();
    for (i, d) in diag.iter().enumerate() {
        out[(i, i)] += Complex64::new(*d, 0.0);
    }
    out
}

/// Stacks matrices with equal column counts on top of each other.
pub fn vstack<'a, I>(blocks: I, cols: usize) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    let blocks: Vec<&ComplexMatrix> = blocks.into_iter().collect();
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut row = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column count mismatch");
        out.rows_mut(row, b.nrows()).copy_from(b);
        row += b.nrows();
    }
    out
}

/// Lower-triangular Cholesky factor `A = L L^H` of a Hermitian positive
/// definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: ComplexMatrix,
}

impl Cholesky {
    /// Factors `(A + A^H)/2`. A pivot at or below `n * eps * max_i A_ii` is
    /// treated as non-positive.
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "cholesky of a {}x{} matrix",
                n,
                a.ncols()
            )));
        }
        let a = hermitize(a);
        let max_diag = (0..n).map(|i| a[(i, i)].re).fold(0.0_f64, f64::max);
        let floor = n as f64 * f64::EPSILON * max_diag;

        let mut l = zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for p in 0..j {
                d -= l[(j, p)].norm_sqr();
            }
            if !(d > floor) {
                return Err(Error::NotPositiveDefinite { index: j, pivot: d });
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &ComplexMatrix {
        &self.l
    }

    /// Solves `A X = B` in place of a copy of `B`.
    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        assert_eq!(b.nrows(), n);
        let mut x = b.clone();
        for c in 0..x.ncols() {
            // L y = b
            for i in 0..n {
                let mut s = x[(i, c)];
                for p in 0..i {
                    s -= self.l[(i, p)] * x[(p, c)];
                }
                x[(i, c)] = s / self.l[(i, i)].re;
            }
            // L^H x = y
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for p in (i + 1)..n {
                    s -= self.l[(p, i)].conj() * x[(p, c)];
                }
                x[(i, c)] = s / self.l[(i, i)].re;
            }
        }
        x
    }

    /// Columns `cols` of `A^{-1}`, one unit-vector solve per column.
    pub fn inverse_columns(&self, cols: &[usize]) -> ComplexMatrix {
        let n = self.dim();
        let mut e = zeros(n, cols.len());
        for (j, &c) in cols.iter().enumerate() {
            assert!(c < n, "column index {c} out of range for dimension {n}");
            e[(c, j)] = Complex64::new(1.0, 0.0);
        }
        self.solve(&e)
    }

    /// Natural log of `det(A)`.
    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.l[(i, i)].re.ln()).sum::<f64>()
    }
}

/// Selected columns (0-based) of `A^{-1}` for Hermitian positive definite `A`.
pub fn chol_solve_columns(a: &ComplexMatrix, cols: &[usize]) -> Result<ComplexMatrix> {
    Ok(Cholesky::factor(a)?.inverse_columns(cols))
}

/// Natural-log determinant of a Hermitian positive definite matrix.
pub fn logdet_hpd(a: &ComplexMatrix) -> Result<f64> {
    Ok(Cholesky::factor(a)?.logdet())
}

/// Singular values (descending) with the matching left and right singular
/// vectors as columns of `u` and `v`.
struct SortedSvd {
    u: ComplexMatrix,
    sigma: Vec<f64>,
    v: ComplexMatrix,
}

fn sorted_svd(a: &ComplexMatrix) -> SortedSvd {
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut us = zeros(u.nrows(), order.len());
    let mut vs = zeros(v_t.ncols(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &v_t.row(src).adjoint());
    }
    SortedSvd {
        u: us,
        sigma,
        v: vs,
    }
}

/// Singular values of `a`, descending.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank: singular values above `tol * sigma_max`.
pub fn rank(a: &ComplexMatrix, tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// Orthonormal basis (as columns) of the numerical null space of `a`
/// (`r x n`): right singular vectors with `sigma <= tol * sigma_max`.
/// Returns an `n x 0` matrix when the null space is trivial.
pub fn nullspace_basis(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let n = a.ncols();
    if a.nrows() == 0 {
        return identity(n);
    }
    // Pad to square so the SVD returns a full set of right singular vectors.
    let padded;
    let a = if a.nrows() < n {
        let mut p = zeros(n, n);
        p.rows_mut(0, a.nrows()).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = sorted_svd(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = svd
        .sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= tol * smax)
        .map(|(i, _)| i)
        .collect();
    let mut basis = zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &svd.v.column(src));
    }
    basis
}

/// Moore-Penrose pseudo-inverse with singular values below
/// `tol * sigma_max` treated as zero.
pub fn pinv_with_tol(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let svd = sorted_svd(a);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let mut out = zeros(a.ncols(), a.nrows());
    if smax == 0.0 {
        return out;
    }
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s > tol * smax {
            let v = svd.v.column(i);
            let u = svd.u.column(i);
            out += (v * u.adjoint()) * Complex64::new(1.0 / s, 0.0);
        }
    }
    out
}

pub fn pinv(a: &ComplexMatrix) -> ComplexMatrix {
    pinv_with_tol(a, RANK_TOL)
}

/// Right singular vectors of the `count` largest singular values.
pub fn top_right_singular_vectors(a: &ComplexMatrix, count: usize) -> ComplexMatrix {
    let svd = sorted_svd(a);
    assert!(count <= svd.v.ncols());
    svd.v.columns(0, count).into_owned()
}
