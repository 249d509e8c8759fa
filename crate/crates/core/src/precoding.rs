//! Linear precoders: successively-regularized zero forcing (SRZF) and the
//! ZF, RZF, WF, BD and fixed-combiner SNS baselines.
//!
//! All schemes work on the BS-side channel estimates. Users are stacked in a
//! chosen order (see [`order_users`]); everything indexed by "position" below
//! refers to that stacking order, and `permutation[pos]` gives the original
//! user index.
//!
//! SRZF for the user at position `k` takes columns `m_k .. m_k + M_k - 1` of
//! `(H H^H + alpha_k J_k)^{-1}`, where `J_k` is diagonal with ones on rows
//! `m_k .. M` (and `J_K = 0`). Rows of already-served users are therefore not
//! regularized and those users see no interference from user `k` when the
//! CSI is perfect. The Gram matrix is formed once and each user only pays for
//! one Cholesky factorization plus `M_k` column solves.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{self, Cholesky, ComplexMatrix, RANK_TOL};
use crate::power;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Srzf,
    Zf,
    Rzf,
    Wf,
    Bd,
    SnsFixed,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Srzf,
        Scheme::Zf,
        Scheme::Rzf,
        Scheme::Wf,
        Scheme::Bd,
        Scheme::SnsFixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Srzf => "srzf",
            Scheme::Zf => "zf",
            Scheme::Rzf => "rzf",
            Scheme::Wf => "wf",
            Scheme::Bd => "bd",
            Scheme::SnsFixed => "sns_fixed",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| {
                format!("unknown scheme `{s}` (expected srzf, zf, rzf, wf, bd or sns_fixed)")
            })
    }
}

/// How the per-user regularization constants are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaPolicy {
    /// `alpha_k = M sigma^2 / P_T` for every user.
    NoiseToPower,
    /// One value per original user index.
    Explicit(Vec<f64>),
}

/// The diagonal matrix multiplying `alpha_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum RegMatrixPolicy {
    /// Ones from the user's first stacked row to the end, `J_K = 0`.
    SuccessiveJ,
    /// `I_M` for every user (turns SRZF into RZF).
    Identity,
    /// One length-`M` diagonal per stacking position.
    ExplicitDiagonal(Vec<Vec<f64>>),
}

/// `M sigma^2 / P_T`.
pub fn default_alpha(total_antennas: usize, sigma2_mw: f64, pt_mw: f64) -> f64 {
    total_antennas as f64 * sigma2_mw / pt_mw
}

/// Single-user rate proxy used for ordering:
/// `log2 det(I + P_T / (M_k L_k sigma^2) * H_k H_k^H)`.
pub fn single_user_rate(hbar: &ComplexMatrix, path_loss: f64, pt_mw: f64, sigma2_mw: f64) -> f64 {
    let m_k = hbar.nrows();
    let snr = pt_mw / (m_k as f64 * path_loss * sigma2_mw);
    let a = numerics::identity(m_k) + numerics::gram(hbar) * Complex64::new(snr, 0.0);
    numerics::logdet_hpd(&a).expect("I + c*G is positive definite for c >= 0")
        / std::f64::consts::LN_2
}

/// User indices sorted by descending single-user rate; ties keep ascending
/// index order.
pub fn order_users(
    hbar: &[ComplexMatrix],
    path_loss: &[f64],
    pt_mw: f64,
    sigma2_mw: f64,
) -> Vec<usize> {
    let rates: Vec<f64> = hbar
        .iter()
        .zip(path_loss)
        .map(|(h, &l)| single_user_rate(h, l, pt_mw, sigma2_mw))
        .collect();
    let mut order: Vec<usize> = (0..hbar.len()).collect();
    order.sort_by(|&a, &b| rates[b].total_cmp(&rates[a]).then(a.cmp(&b)));
    order
}

/// Row-stack of the per-user estimates in a given order.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedCsi {
    pub hbar: ComplexMatrix,
    /// 0-based first row of each position.
    pub row_offsets: Vec<usize>,
    pub sizes: Vec<usize>,
    pub permutation: Vec<usize>,
}

impl StackedCsi {
    /// Stacks `blocks[permutation[0]]`, `blocks[permutation[1]]`, ...
    pub fn new(blocks: &[ComplexMatrix], permutation: &[usize]) -> Self {
        assert_eq!(blocks.len(), permutation.len());
        let n = blocks.first().map_or(0, |b| b.ncols());
        let sizes: Vec<usize> = permutation.iter().map(|&k| blocks[k].nrows()).collect();
        let row_offsets = sizes
            .iter()
            .scan(0, |acc, &m| {
                let off = *acc;
                *acc += m;
                Some(off)
            })
            .collect();
        let hbar = numerics::vstack(permutation.iter().map(|&k| &blocks[k]), n);
        Self {
            hbar,
            row_offsets,
            sizes,
            permutation: permutation.to_vec(),
        }
    }

    pub fn in_order(blocks: &[ComplexMatrix]) -> Self {
        let identity: Vec<usize> = (0..blocks.len()).collect();
        Self::new(blocks, &identity)
    }

    pub fn users(&self) -> usize {
        self.sizes.len()
    }

    pub fn total_rows(&self) -> usize {
        self.hbar.nrows()
    }

    pub fn bs_antennas(&self) -> usize {
        self.hbar.ncols()
    }

    pub fn rows(&self, pos: usize) -> std::ops::Range<usize> {
        self.row_offsets[pos]..self.row_offsets[pos] + self.sizes[pos]
    }

    pub fn block(&self, pos: usize) -> ComplexMatrix {
        self.hbar
            .rows(self.row_offsets[pos], self.sizes[pos])
            .into_owned()
    }

    /// All blocks except position `pos`, stacked.
    pub fn others(&self, pos: usize) -> ComplexMatrix {
        let blocks: Vec<ComplexMatrix> = (0..self.users())
            .filter(|&j| j != pos)
            .map(|j| self.block(j))
            .collect();
        numerics::vstack(&blocks, self.bs_antennas())
    }

    /// Blocks at positions `0..pos`, stacked.
    pub fn preceding(&self, pos: usize) -> ComplexMatrix {
        self.hbar.rows(0, self.row_offsets[pos]).into_owned()
    }
}

/// Per-position regularization constants and diagonal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationPlan {
    pub alphas: Vec<f64>,
    pub diags: Vec<Vec<f64>>,
}

impl RegularizationPlan {
    /// `J_k`: ones on rows `m_k..M`, except `J_K = 0`.
    pub fn successive(sizes: &[usize], alphas: Vec<f64>) -> Self {
        assert_eq!(sizes.len(), alphas.len());
        let m: usize = sizes.iter().sum();
        let k_total = sizes.len();
        let mut offset = 0;
        let diags = sizes
            .iter()
            .enumerate()
            .map(|(k, &mk)| {
                let d = if k + 1 == k_total {
                    vec![0.0; m]
                } else {
                    (0..m)
                        .map(|i| if i >= offset { 1.0 } else { 0.0 })
                        .collect()
                };
                offset += mk;
                d
            })
            .collect();
        Self { alphas, diags }
    }

    pub fn identity(sizes: &[usize], alphas: Vec<f64>) -> Self {
        let m: usize = sizes.iter().sum();
        Self {
            diags: vec![vec![1.0; m]; sizes.len()],
            alphas,
        }
    }

    pub fn uniform_alpha(alpha: f64, users: usize) -> Vec<f64> {
        vec![alpha; users]
    }

    /// Resolves scenario policies for a concrete stacking order. Explicit
    /// alphas follow the user through the permutation; explicit diagonals are
    /// taken per position.
    pub fn from_policy(
        alpha: &AlphaPolicy,
        reg: &RegMatrixPolicy,
        stacked: &StackedCsi,
        pt_mw: f64,
        sigma2_mw: f64,
    ) -> Self {
        let alphas = match alpha {
            AlphaPolicy::NoiseToPower => Self::uniform_alpha(
                default_alpha(stacked.total_rows(), sigma2_mw, pt_mw),
                stacked.users(),
            ),
            AlphaPolicy::Explicit(a) => stacked.permutation.iter().map(|&k| a[k]).collect(),
        };
        match reg {
            RegMatrixPolicy::SuccessiveJ => Self::successive(&stacked.sizes, alphas),
            RegMatrixPolicy::Identity => Self::identity(&stacked.sizes, alphas),
            RegMatrixPolicy::ExplicitDiagonal(d) => Self {
                alphas,
                diags: d.clone(),
            },
        }
    }

    /// `alpha_k * diag_k`.
    pub fn loading(&self, pos: usize) -> Vec<f64> {
        self.diags[pos]
            .iter()
            .map(|d| d * self.alphas[pos])
            .collect()
    }
}

/// Precoders for every stacking position plus what produced them.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub scheme: Scheme,
    /// `N x M_k` per position.
    pub p: Vec<ComplexMatrix>,
    /// Unnormalized precoding directions (`H^H Phi_k` for inverse-based schemes).
    pub directions: Vec<ComplexMatrix>,
    /// Selected inverse columns `Phi_k` (`M x M_k`) for srzf, zf, rzf and wf.
    pub phi: Option<Vec<ComplexMatrix>>,
    /// Diagonal power loading per position.
    pub d: Vec<Vec<f64>>,
    pub permutation: Vec<usize>,
}

impl PrecoderSet {
    pub fn users(&self) -> usize {
        self.p.len()
    }

    pub fn total_power(&self) -> f64 {
        power::total_power(self)
    }

    /// Precoders re-indexed by original user.
    pub fn by_user(&self) -> Vec<ComplexMatrix> {
        let mut out = vec![ComplexMatrix::zeros(0, 0); self.users()];
        for (pos, &k) in self.permutation.iter().enumerate() {
            out[k] = self.p[pos].clone();
        }
        out
    }

    /// Stacks the precoders column-wise into one `N x M` matrix.
    pub fn stacked(&self) -> ComplexMatrix {
        let n = self.p.first().map_or(0, |p| p.nrows());
        let m = self.p.iter().map(|p| p.ncols()).sum();
        let mut out = numerics::zeros(n, m);
        let mut col = 0;
        for p in &self.p {
            out.columns_mut(col, p.ncols()).copy_from(p);
            col += p.ncols();
        }
        out
    }
}

fn split_columns(m: &ComplexMatrix, stacked: &StackedCsi) -> Vec<ComplexMatrix> {
    (0..stacked.users())
        .map(|pos| {
            m.columns(stacked.row_offsets[pos], stacked.sizes[pos])
                .into_owned()
        })
        .collect()
}

fn with_fpa(
    scheme: Scheme,
    directions: Vec<ComplexMatrix>,
    phi: Option<Vec<ComplexMatrix>>,
    stacked: &StackedCsi,
    pt_mw: f64,
) -> Result<PrecoderSet> {
    let pa = power::fpa(&directions, pt_mw).map_err(|e| match e {
        Error::ZeroDirection { user, column } => Error::ZeroDirection {
            user: stacked.permutation[user],
            column,
        },
        other => other,
    })?;
    Ok(PrecoderSet {
        scheme,
        p: pa.apply(&directions),
        directions,
        phi,
        d: pa.d,
        permutation: stacked.permutation.clone(),
    })
}

/// Successively-regularized zero forcing with fixed power allocation.
pub fn srzf(stacked: &StackedCsi, plan: &RegularizationPlan, pt_mw: f64) -> Result<PrecoderSet> {
    assert_eq!(plan.alphas.len(), stacked.users());
    let gram = numerics::gram(&stacked.hbar);
    let hbar_h = stacked.hbar.adjoint();

    let mut cached: Option<(Vec<f64>, Cholesky)> = None;
    let mut phis = Vec::with_capacity(stacked.users());
    let mut directions = Vec::with_capacity(stacked.users());
    for pos in 0..stacked.users() {
        let loading = plan.loading(pos);
        let reuse = matches!(&cached, Some((l, _)) if *l == loading);
        if !reuse {
            let chol = Cholesky::factor(&numerics::add_diagonal(&gram, &loading))?;
            cached = Some((loading, chol));
        }
        let (_, chol) = cached.as_ref().expect("factor cached above");
        let cols: Vec<usize> = stacked.rows(pos).collect();
        let phi = chol.inverse_columns(&cols);
        directions.push(&hbar_h * &phi);
        phis.push(phi);
    }
    with_fpa(Scheme::Srzf, directions, Some(phis), stacked, pt_mw)
}

/// `H^H (H H^H + alpha I)^{-1}`, split into per-position column groups,
/// together with the matching inverse columns.
fn regularized_pinv_directions(
    stacked: &StackedCsi,
    alpha: f64,
) -> Result<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> {
    let m = stacked.total_rows();
    let gram = numerics::gram(&stacked.hbar);
    let chol = Cholesky::factor(&numerics::add_diagonal(&gram, &vec![alpha; m]))?;
    let inv = chol.solve(&numerics::identity(m));
    let dirs = stacked.hbar.adjoint() * &inv;
    Ok((split_columns(&dirs, stacked), split_columns(&inv, stacked)))
}

/// Zero forcing: directions are the columns of `H^+ = H^H (H H^H)^{-1}`.
pub fn zf(stacked: &StackedCsi, pt_mw: f64) -> Result<PrecoderSet> {
    let (dirs, phi) = regularized_pinv_directions(stacked, 0.0)?;
    with_fpa(Scheme::Zf, dirs, Some(phi), stacked, pt_mw)
}

/// Regularized zero forcing with scalar loading `alpha`.
pub fn rzf(stacked: &StackedCsi, alpha: f64, pt_mw: f64) -> Result<PrecoderSet> {
    let (dirs, phi) = regularized_pinv_directions(stacked, alpha)?;
    with_fpa(Scheme::Rzf, dirs, Some(phi), stacked, pt_mw)
}

/// Transmit Wiener filter: `beta * H^H (H H^H + M sigma^2 / P_T I)^{-1}`
/// with one global `beta` meeting the power budget.
pub fn wf(stacked: &StackedCsi, pt_mw: f64, sigma2_mw: f64) -> Result<PrecoderSet> {
    let alpha = default_alpha(stacked.total_rows(), sigma2_mw, pt_mw);
    let (dirs, phi) = regularized_pinv_directions(stacked, alpha)?;
    let mut p = dirs.clone();
    let beta = power::scale_to_budget(&mut p, pt_mw);
    let d = stacked
        .sizes
        .iter()
        .map(|&mk| vec![beta * beta; mk])
        .collect();
    Ok(PrecoderSet {
        scheme: Scheme::Wf,
        p,
        directions: dirs,
        phi: Some(phi),
        d,
        permutation: stacked.permutation.clone(),
    })
}

/// Block diagonalization: each user transmits in the null space of every
/// other user's channel, along the dominant right singular vectors of its
/// projected channel.
pub fn bd(stacked: &StackedCsi, pt_mw: f64) -> Result<PrecoderSet> {
    let mut directions = Vec::with_capacity(stacked.users());
    for pos in 0..stacked.users() {
        let basis = numerics::nullspace_basis(&stacked.others(pos), RANK_TOL);
        let needed = stacked.sizes[pos];
        if basis.ncols() < needed {
            return Err(Error::InsufficientNullSpace {
                user: stacked.permutation[pos],
                available: basis.ncols(),
                needed,
            });
        }
        let projected = stacked.block(pos) * &basis;
        let v = numerics::top_right_singular_vectors(&projected, needed);
        directions.push(&basis * v);
    }
    with_fpa(Scheme::Bd, directions, None, stacked, pt_mw)
}

/// Successive null space precoding with a fixed combiner: user `k` lives in
/// the null space of users `1..k-1` and zero-forces its own projected
/// channel there.
pub fn sns_fixed(stacked: &StackedCsi, pt_mw: f64) -> Result<PrecoderSet> {
    let n = stacked.bs_antennas();
    let mut directions = Vec::with_capacity(stacked.users());
    for pos in 0..stacked.users() {
        let psi = if pos == 0 {
            numerics::identity(n)
        } else {
            numerics::nullspace_basis(&stacked.preceding(pos), RANK_TOL)
        };
        let needed = stacked.sizes[pos];
        if psi.ncols() < needed {
            return Err(Error::InsufficientNullSpace {
                user: stacked.permutation[pos],
                available: psi.ncols(),
                needed,
            });
        }
        let projected = stacked.block(pos) * &psi;
        directions.push(&psi * numerics::pinv(&projected));
    }
    with_fpa(Scheme::SnsFixed, directions, None, stacked, pt_mw)
}

/// Builds any scheme. RZF uses the scalar `M sigma^2 / P_T`; SRZF uses `plan`.
pub fn build(
    scheme: Scheme,
    stacked: &StackedCsi,
    plan: &RegularizationPlan,
    pt_mw: f64,
    sigma2_mw: f64,
) -> Result<PrecoderSet> {
    match scheme {
        Scheme::Srzf => srzf(stacked, plan, pt_mw),
        Scheme::Zf => zf(stacked, pt_mw),
        Scheme::Rzf => rzf(
            stacked,
            default_alpha(stacked.total_rows(), sigma2_mw, pt_mw),
            pt_mw,
        ),
        Scheme::Wf => wf(stacked, pt_mw, sigma2_mw),
        Scheme::Bd => bd(stacked, pt_mw),
        Scheme::SnsFixed => sns_fixed(stacked, pt_mw),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn col(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_iterator(values.len(), 1, values.iter().map(|&v| c(v)))
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn identity_users(n: usize, per_user: usize) -> StackedCsi {
        let eye = numerics::identity(n);
        let blocks: Vec<ComplexMatrix> = (0..n / per_user)
            .map(|k| eye.rows(k * per_user, per_user).into_owned())
            .collect();
        StackedCsi::in_order(&blocks)
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("mmse".parse::<Scheme>().is_err());
    }

    #[test]
    fn default_alpha_values() {
        assert!((default_alpha(2, 1.0, 2.0) - 1.0).abs() < 1e-15);
        let a = default_alpha(128, 10f64.powf(-3.5), 1000.0);
        assert!((a - 4.04772e-5).abs() < 1e-10);
        assert!(default_alpha(8, 1.0, 1e300) < 1e-290);
    }

    #[test]
    fn successive_plan_structure() {
        let plan = RegularizationPlan::successive(&[2, 1, 2], vec![0.1; 3]);
        assert_eq!(plan.diags[0], vec![1.0; 5]);
        assert_eq!(plan.diags[1], vec![0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(plan.diags[2], vec![0.0; 5]);
    }

    #[test]
    fn stacking_offsets() {
        let blocks = vec![
            numerics::zeros(2, 4),
            numerics::zeros(1, 4),
            numerics::zeros(3, 4),
        ];
        let s = StackedCsi::new(&blocks, &[2, 0, 1]);
        assert_eq!(s.sizes, vec![3, 2, 1]);
        assert_eq!(s.row_offsets, vec![0, 3, 5]);
        assert_eq!(s.total_rows(), 6);
    }

    #[test]
    fn srzf_identity_channel_worked_example() {
        let s = identity_users(2, 1);
        let plan = RegularizationPlan::successive(&s.sizes, vec![0.5, 0.5]);
        let p = srzf(&s, &plan, 2.0).unwrap();
        let phi = p.phi.as_ref().unwrap();
        assert!(close(&phi[0], &col(&[2.0 / 3.0, 0.0]), 1e-15));
        assert!(close(&phi[1], &col(&[0.0, 1.0]), 1e-15));
        assert!((p.d[0][0] - 9.0 / 4.0).abs() < 1e-14);
        assert!((p.d[1][0] - 1.0).abs() < 1e-14);
        assert!(close(&p.p[0], &col(&[1.0, 0.0]), 1e-14));
        assert!(close(&p.p[1], &col(&[0.0, 1.0]), 1e-14));
        assert!((p.total_power() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zf_identity_channel() {
        let s = identity_users(2, 1);
        let p = zf(&s, 8.0).unwrap();
        assert!(close(
            &p.stacked(),
            &(numerics::identity(2) * c(2.0)),
            1e-14
        ));
    }

    #[test]
    fn rzf_identity_channel() {
        let s = identity_users(2, 1);
        let p = rzf(&s, 1.0, 8.0).unwrap();
        assert!(close(&p.directions[0], &col(&[0.5, 0.0]), 1e-15));
        assert!(close(
            &p.stacked(),
            &(numerics::identity(2) * c(2.0)),
            1e-14
        ));
    }

    #[test]
    fn wf_identity_channel() {
        let s = identity_users(2, 1);
        let p = wf(&s, 8.0, 0.3).unwrap();
        assert!(close(
            &p.stacked(),
            &(numerics::identity(2) * c(2.0)),
            1e-14
        ));
    }

    #[test]
    fn bd_identity_two_by_two() {
        let s = identity_users(4, 2);
        let p = bd(&s, 4.0).unwrap();
        let stacked = p.stacked();
        // block diagonal up to a unitary rotation inside each block
        for i in 0..4 {
            for j in 0..4 {
                if (i < 2) != (j < 2) {
                    assert!(stacked[(i, j)].norm() < 1e-14);
                }
            }
        }
        for pk in &p.p {
            assert!(close(&(pk.adjoint() * pk), &numerics::identity(2), 1e-13));
        }
    }

    #[test]
    fn sns_identity_support() {
        let s = identity_users(4, 2);
        let p = sns_fixed(&s, 4.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(p.p[1][(i, j)].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn bd_needs_enough_null_space() {
        let blocks = vec![
            numerics::identity(3).rows(0, 2).into_owned(),
            numerics::identity(3),
        ];
        let s = StackedCsi::in_order(&blocks);
        assert!(matches!(
            bd(&s, 1.0),
            Err(Error::InsufficientNullSpace {
                user: 0,
                available: 0,
                needed: 2
            })
        ));
    }

    #[test]
    fn zf_reports_rank_deficiency() {
        let row = numerics::identity(3).rows(0, 1).into_owned();
        let s = StackedCsi::in_order(&[row.clone(), row]);
        assert!(matches!(
            zf(&s, 1.0),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(rzf(&s, 0.1, 1.0).is_ok());
    }

    #[test]
    fn ordering_prefers_near_user() {
        let h = ComplexMatrix::from_element(1, 4, c(1.0));
        let order = order_users(&[h.clone(), h], &[2500.0, 62500.0], 1000.0, 3e-4);
        assert_eq!(order, vec![0, 1]);
        let h2 = ComplexMatrix::from_element(1, 4, c(1.0));
        let order = order_users(
            &[h2.clone(), h2.clone(), h2],
            &[62500.0, 2500.0, 62500.0],
            1.0,
            1.0,
        );
        assert_eq!(order, vec![1, 0, 2]);
    }
}
