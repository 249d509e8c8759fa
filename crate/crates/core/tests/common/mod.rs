//! Independent reference implementations used by the integration tests.
//! Everything here is deliberately naive: triple loops, Gauss-Jordan and LU
//! with partial pivoting, no shared code with the library's numerics.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srzf_core::ComplexMatrix;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with independent standard normal real and imaginary parts
/// (Box-Muller, to stay independent of the library's sampler).
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let mut normal = || {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(normal(), normal()))
}

pub fn random_blocks<R: Rng>(rng: &mut R, users: usize, m: usize, n: usize) -> Vec<ComplexMatrix> {
    (0..users).map(|_| random_matrix(rng, m, n)).collect()
}

pub fn naive_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = ComplexMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..a.ncols() {
                s += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

pub fn naive_adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn naive_gram(h: &ComplexMatrix) -> ComplexMatrix {
    naive_mul(h, &naive_adjoint(h))
}

pub fn naive_vstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n = blocks[0].ncols();
    let m: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(m, n);
    let mut r = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..n {
                out[(r + i, j)] = b[(i, j)];
            }
        }
        r += b.nrows();
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n, n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[(x, col)].norm().partial_cmp(&m[(y, col)].norm()).unwrap())
            .unwrap();
        m.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let p = m[(col, col)];
        assert!(p.norm() > 0.0, "singular matrix in oracle");
        for j in 0..n {
            m[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = m[(i, col)];
                if f.norm() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let (mc, ic) = (m[(col, j)], inv[(col, j)]);
                    m[(i, j)] -= f * mc;
                    inv[(i, j)] -= f * ic;
                }
            }
        }
    }
    inv
}

/// `ln |det a|` and the determinant's phase from an LU factorization.
pub fn lu_logdet(a: &ComplexMatrix) -> (f64, Complex64) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut logabs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[(x, col)].norm().partial_cmp(&m[(y, col)].norm()).unwrap())
            .unwrap();
        if pivot != col {
            m.swap_rows(col, pivot);
            phase = -phase;
        }
        let p = m[(col, col)];
        logabs += p.norm().ln();
        phase *= p / p.norm();
        for i in col + 1..n {
            let f = m[(i, col)] / p;
            for j in col..n {
                let v = m[(col, j)];
                m[(i, j)] -= f * v;
            }
        }
    }
    (logabs, phase)
}

/// Rate in bits from the explicit-inverse expression
/// `log2 det(I + G G^H N^{-1})`, `N = sigma^2 I + sum_i G_i G_i^H`.
pub fn explicit_inverse_rate(
    desired: &ComplexMatrix,
    interference: &[ComplexMatrix],
    sigma2: f64,
) -> f64 {
    let m = desired.nrows();
    let mut noise = ComplexMatrix::identity(m, m) * c(sigma2);
    for g in interference {
        noise += naive_mul(g, &naive_adjoint(g));
    }
    let inner = ComplexMatrix::identity(m, m)
        + naive_mul(
            &naive_mul(desired, &naive_adjoint(desired)),
            &gauss_jordan_inverse(&noise),
        );
    lu_logdet(&inner).0 / std::f64::consts::LN_2
}

/// SRZF written straight from its definition: columns of
/// `(H H^H + alpha_k J_k)^{-1}`, `J_k` ones from row `m_k` on (zero for the
/// last user), then equal power `pt / M` per normalized column.
pub fn srzf_oracle(blocks: &[ComplexMatrix], alphas: &[f64], pt: f64) -> Vec<ComplexMatrix> {
    let h = naive_vstack(blocks);
    let m = h.nrows();
    let g = naive_gram(&h);
    let hh = naive_adjoint(&h);
    let mut start = 0;
    let mut out = Vec::new();
    for (k, b) in blocks.iter().enumerate() {
        let mut a = g.clone();
        if k + 1 < blocks.len() {
            for i in start..m {
                a[(i, i)] += c(alphas[k]);
            }
        }
        let inv = gauss_jordan_inverse(&a);
        let phi = inv.columns(start, b.nrows()).into_owned();
        let mut p = naive_mul(&hh, &phi);
        for mut col in p.column_iter_mut() {
            let norm2: f64 = col.iter().map(|x| x.norm_sqr()).sum();
            col *= c((pt / (m as f64 * norm2)).sqrt());
        }
        out.push(p);
        start += b.nrows();
    }
    out
}

/// `H^H (H H^H + alpha I)^{-1}` with equal column power, split per user.
pub fn rzf_oracle(blocks: &[ComplexMatrix], alpha: f64, pt: f64) -> Vec<ComplexMatrix> {
    let h = naive_vstack(blocks);
    let m = h.nrows();
    let mut a = naive_gram(&h);
    for i in 0..m {
        a[(i, i)] += c(alpha);
    }
    let mut dirs = naive_mul(&naive_adjoint(&h), &gauss_jordan_inverse(&a));
    for mut col in dirs.column_iter_mut() {
        let norm2: f64 = col.iter().map(|x| x.norm_sqr()).sum();
        col *= c((pt / (m as f64 * norm2)).sqrt());
    }
    let mut start = 0;
    blocks
        .iter()
        .map(|b| {
            let p = dirs.columns(start, b.nrows()).into_owned();
            start += b.nrows();
            p
        })
        .collect()
}

pub fn rel_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn hstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    naive_adjoint(&naive_vstack(
        &blocks.iter().map(naive_adjoint).collect::<Vec<_>>(),
    ))
}
