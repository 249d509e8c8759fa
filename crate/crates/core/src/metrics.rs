//! Achievable rates, inter-user interference and the two structural
//! properties of SRZF: one-directional interference under perfect CSI and the
//! bound on extra interference caused by one user's CSI error.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{self, ChannelSet, Scenario};
use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix};
use crate::precoding::{self, PrecoderSet, RegularizationPlan, StackedCsi};

/// `(1 / sqrt(L_k)) H_k P_k'`.
pub fn effective_channel(h_k: &ComplexMatrix, path_loss: f64, p: &ComplexMatrix) -> ComplexMatrix {
    (h_k * p) * Complex64::new(1.0 / path_loss.sqrt(), 0.0)
}

/// Rate in bits of one user treating interference as Gaussian noise,
/// evaluated as `log det(N + G G^H) - log det(N)` with
/// `N = sigma^2 I + sum G_i G_i^H` over the interfering blocks.
pub fn user_rate(
    desired: &ComplexMatrix,
    interference: &[ComplexMatrix],
    sigma2_mw: f64,
) -> Result<f64> {
    let m = desired.nrows();
    let mut noise = numerics::identity(m) * Complex64::new(sigma2_mw, 0.0);
    for g in interference {
        noise += g * g.adjoint();
    }
    let signal_plus_noise = &noise + desired * desired.adjoint();
    let r = (numerics::logdet_hpd(&signal_plus_noise)? - numerics::logdet_hpd(&noise)?)
        / std::f64::consts::LN_2;
    Ok(r.max(0.0))
}

#[derive(Debug, Clone)]
pub struct RateReport {
    /// Bits per channel use, by original user index.
    pub rates: Vec<f64>,
    pub sum_rate: f64,
    /// `iui_norms[k][k'] = ||H_k P_k'||_F / sqrt(L_k)`, original indices.
    pub iui_norms: Vec<Vec<f64>>,
    pub power_used: f64,
}

/// Evaluates precoders (built from estimates) against the true channels.
pub fn sum_rate(ch: &ChannelSet, p: &PrecoderSet, sigma2_mw: f64) -> Result<RateReport> {
    let k_total = ch.users();
    if p.users() != k_total {
        return Err(Error::DimensionMismatch(format!(
            "{} precoders for {} users",
            p.users(),
            k_total
        )));
    }
    let by_user = p.by_user();
    let mut rates = Vec::with_capacity(k_total);
    let mut iui_norms = Vec::with_capacity(k_total);
    for k in 0..k_total {
        let g: Vec<ComplexMatrix> = by_user
            .iter()
            .map(|pk| effective_channel(&ch.h[k], ch.path_loss[k], pk))
            .collect();
        iui_norms.push(g.iter().map(numerics::frobenius).collect());
        let interference: Vec<ComplexMatrix> = g
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, gj)| gj.clone())
            .collect();
        rates.push(user_rate(&g[k], &interference, sigma2_mw)?);
    }
    Ok(RateReport {
        sum_rate: rates.iter().sum(),
        rates,
        iui_norms,
        power_used: p.total_power(),
    })
}

/// Relative deviations of `H_k P_k'` from its predicted form, indexed by
/// stacking position `[k][k']`.
#[derive(Debug, Clone)]
pub struct Prop1Table {
    pub residuals: Vec<Vec<f64>>,
    pub precoders: PrecoderSet,
}

impl Prop1Table {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Predicted `H_k P_k'` for SRZF built from the same `H`:
/// `(delta_{kk'} I - alpha_k' diag(J_k' rows of k) Omega_k'k) D_k'^{1/2}`
/// where `Omega` holds rows of user `k` in `Phi_k'`. For the successive
/// plan this is `-alpha Omega D^{1/2}` below the diagonal,
/// `(I - alpha Omega) D^{1/2}` on it (with `J_K = 0` for the last user) and
/// zero above it.
pub fn predicted_interference(
    stacked: &StackedCsi,
    plan: &RegularizationPlan,
    p: &PrecoderSet,
    k: usize,
    kp: usize,
) -> ComplexMatrix {
    let phi = p.phi.as_ref().expect("srzf keeps its inverse columns");
    let rows = stacked.rows(k);
    let omega = phi[kp].rows(rows.start, rows.len()).into_owned();
    let mut out = if k == kp {
        numerics::identity(rows.len())
    } else {
        numerics::zeros(rows.len(), stacked.sizes[kp])
    };
    for (i, row) in rows.clone().enumerate() {
        let w = plan.alphas[kp] * plan.diags[kp][row];
        for j in 0..stacked.sizes[kp] {
            out[(i, j)] -= omega[(i, j)] * w;
        }
    }
    for (j, &dj) in p.d[kp].iter().enumerate() {
        out.column_mut(j).scale_mut(dj.sqrt());
    }
    out
}

/// Builds SRZF from the true channels stacked as given and compares every
/// `H_k P_k'` to its prediction, relative to `||P_k'||_F`.
pub fn prop1_residuals(
    stacked_true: &StackedCsi,
    plan: &RegularizationPlan,
    pt_mw: f64,
) -> Result<Prop1Table> {
    let p = precoding::srzf(stacked_true, plan, pt_mw)?;
    let users = stacked_true.users();
    let residuals = (0..users)
        .map(|k| {
            let hk = stacked_true.block(k);
            (0..users)
                .map(|kp| {
                    let actual = &hk * &p.p[kp];
                    let expected = predicted_interference(stacked_true, plan, &p, k, kp);
                    (actual - expected).norm() / p.p[kp].norm()
                })
                .collect()
        })
        .collect();
    Ok(Prop1Table {
        residuals,
        precoders: p,
    })
}

/// Relative slack allowed on the per-pair bound for floating-point error.
pub const PROP2_SLACK: f64 = 1e-8;

/// One trial of the CSI-error experiment for user `k` (stacking position,
/// natural order).
#[derive(Debug, Clone, PartialEq)]
pub struct Prop2Record {
    pub mu2: f64,
    pub trial: u64,
    /// `sum_{k' > k} ||H_k (P_k' - P̆_k')||_F`.
    pub measured_gap: f64,
    /// `||Delta_k||_F * sum_{k' > k} ||P_k'||_F`.
    pub upper_bound: f64,
    /// `(k', measured, bound)` for every `k' > k`.
    pub pair_terms: Vec<(usize, f64, f64)>,
}

impl Prop2Record {
    pub fn violations(&self) -> usize {
        self.pair_terms
            .iter()
            .filter(|(_, measured, bound)| *measured > bound + PROP2_SLACK * bound)
            .count()
    }
}

/// Runs one trial: precoders from the full estimate set against precoders
/// where only user `k`'s estimate is replaced by the truth. All other random
/// draws are shared.
pub fn prop2_trial(s: &Scenario, user: usize, mu2_user: f64, trial: u64) -> Result<Prop2Record> {
    let ch = channel::generate_channels(s, trial)?;
    let mut mu2 = s.mu2.clone();
    mu2[user] = mu2_user;
    let no_mask = vec![false; s.users];
    let mut user_mask = no_mask.clone();
    user_mask[user] = true;

    let csi = channel::apply_csi_error(&ch, &mu2, &no_mask, s.seed, trial);
    let csi_k = channel::apply_csi_error(&ch, &mu2, &user_mask, s.seed, trial);

    let (pt, sigma2) = (s.pt_mw(), s.sigma2_mw());
    let view = |hbar: &[ComplexMatrix]| s.precoder_channel.apply(hbar, &ch.path_loss);
    let stacked = StackedCsi::in_order(&view(&csi.hbar));
    let stacked_k = StackedCsi::in_order(&view(&csi_k.hbar));
    let plan = RegularizationPlan::from_policy(
        &s.alpha_policy,
        &s.reg_matrix_policy,
        &stacked,
        pt,
        sigma2,
    );
    let p = precoding::srzf(&stacked, &plan, pt)?;
    let p_k = precoding::srzf(&stacked_k, &plan, pt)?;

    let hk = &ch.h[user];
    let delta_norm = csi.delta[user].norm();
    let pair_terms: Vec<(usize, f64, f64)> = ((user + 1)..s.users)
        .map(|kp| {
            let measured = (hk * (&p.p[kp] - &p_k.p[kp])).norm();
            (kp, measured, delta_norm * p.p[kp].norm())
        })
        .collect();
    Ok(Prop2Record {
        mu2: mu2_user,
        trial,
        measured_gap: pair_terms.iter().map(|t| t.1).sum(),
        upper_bound: pair_terms.iter().map(|t| t.2).sum(),
        pair_terms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop2Summary {
    pub mu2: f64,
    pub gap_min: f64,
    pub gap_mean: f64,
    pub gap_max: f64,
    pub ub_mean: f64,
    pub trials: usize,
    pub pairs: usize,
    pub violations: usize,
    /// First violating trial, if any.
    pub first_violation: Option<u64>,
}

pub fn summarize_prop2(mu2: f64, records: &[Prop2Record]) -> Prop2Summary {
    let n = records.len() as f64;
    let gaps = records.iter().map(|r| r.measured_gap);
    Prop2Summary {
        mu2,
        gap_min: gaps.clone().fold(f64::INFINITY, f64::min),
        gap_mean: gaps.clone().sum::<f64>() / n,
        gap_max: gaps.fold(f64::NEG_INFINITY, f64::max),
        ub_mean: records.iter().map(|r| r.upper_bound).sum::<f64>() / n,
        trials: records.len(),
        pairs: records.iter().map(|r| r.pair_terms.len()).sum(),
        violations: records.iter().map(Prop2Record::violations).sum(),
        first_violation: records.iter().find(|r| r.violations() > 0).map(|r| r.trial),
    }
}

/// Sweeps user `k`'s error variance over `mu2_sweep`, `trials` realizations
/// per point. Trials run in parallel; results are reduced in trial order.
pub fn prop2_experiment(
    s: &Scenario,
    user: usize,
    mu2_sweep: &[f64],
    trials: usize,
) -> Result<Vec<Prop2Summary>> {
    if user >= s.users {
        return Err(Error::DimensionMismatch(format!(
            "user {} out of range 1..={}",
            user + 1,
            s.users
        )));
    }
    mu2_sweep
        .iter()
        .map(|&mu2| {
            let records = (0..trials as u64)
                .into_par_iter()
                .map(|t| prop2_trial(s, user, mu2, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize_prop2(mu2, &records))
        })
        .collect()
}
