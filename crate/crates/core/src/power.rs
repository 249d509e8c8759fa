//! Fixed power allocation and transmit-power bookkeeping.
//!
//! Every precoding column is normalized to unit norm and given `P_T / M`,
//! where `M` is the total number of columns over all users.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::precoding::PrecoderSet;

/// Smallest direction norm FPA will normalize.
pub const MIN_DIRECTION_NORM: f64 = 1e-300;

/// Diagonal power loading per user; `d[k][l]` scales column `l` of user `k`'s
/// direction matrix by `sqrt(d[k][l])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub d: Vec<Vec<f64>>,
}

impl PowerAllocation {
    /// `P_k = V_k D_k^{1/2}` for every user.
    pub fn apply(&self, directions: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
        directions
            .iter()
            .zip(&self.d)
            .map(|(v, d)| {
                let mut p = v.clone();
                for (l, &dl) in d.iter().enumerate() {
                    p.column_mut(l).scale_mut(dl.sqrt());
                }
                p
            })
            .collect()
    }
}

/// `[D_k]_{l,l} = P_T / (M * ||v_{k,l}||^2)`.
///
/// `||v||^2` equals `tr(H^H phi phi^H H)` for `v = H^H phi`, so this is the
/// trace-normalized loading written in terms of the direction vectors.
pub fn fpa(directions: &[ComplexMatrix], pt_mw: f64) -> Result<PowerAllocation> {
    let total_columns: usize = directions.iter().map(|v| v.ncols()).sum();
    let mut d = Vec::with_capacity(directions.len());
    for (user, v) in directions.iter().enumerate() {
        let mut dk = Vec::with_capacity(v.ncols());
        for (column, col) in v.column_iter().enumerate() {
            let norm2 = col.norm_squared();
            if !(norm2.sqrt() > MIN_DIRECTION_NORM) || !norm2.is_finite() {
                return Err(Error::ZeroDirection { user, column });
            }
            dk.push(pt_mw / (total_columns as f64 * norm2));
        }
        d.push(dk);
    }
    Ok(PowerAllocation { d })
}

/// `sum_k ||P_k||_F^2` in milliwatts.
pub fn total_power(p: &PrecoderSet) -> f64 {
    precoders_power(&p.p)
}

pub fn precoders_power(p: &[ComplexMatrix]) -> f64 {
    p.iter().map(|pk| pk.norm_squared()).sum()
}

/// Scales a whole precoder list so its total power is exactly `pt_mw`.
/// Returns the applied amplitude factor.
pub fn scale_to_budget(p: &mut [ComplexMatrix], pt_mw: f64) -> f64 {
    let used = precoders_power(p);
    let beta = (pt_mw / used).sqrt();
    for pk in p.iter_mut() {
        *pk *= Complex64::new(beta, 0.0);
    }
    beta
}
