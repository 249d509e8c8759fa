//! Scenario description, correlated channel generation and the additive CSI
//! error model.
//!
//! Channels follow a finite-ray geometric model on half-wavelength uniform
//! linear arrays at both ends:
//!
//! ```text
//! H_k = sqrt(N * M_k / P) * sum_p g_p * a_r(phi_p) * a_t(theta_p)^H
//! ```
//!
//! with `g_p ~ CN(0, 1)`, departure angles uniform in
//! `azimuth_k +/- spread / 2`, arrival angles uniform over the full circle and
//! unit-norm steering vectors, so that `E ||H_k||_F^2 = N * M_k`. Users whose
//! azimuths differ by a fraction of a beamwidth get strongly correlated row
//! spaces, which is what makes the stacked channel ill-conditioned.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix, RANK_TOL};
use crate::precoding::{AlphaPolicy, RegMatrixPolicy};
use crate::rng::{self, Purpose};

/// Regeneration budget for the full-row-rank requirement.
pub const MAX_RANK_ATTEMPTS: usize = 100;

pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Path loss `d^2` for a distance in meters.
pub fn path_loss(distance_m: f64) -> f64 {
    distance_m * distance_m
}

/// Full experiment description. Powers are kept in dBm here and converted to
/// milliwatts through [`Scenario::pt_mw`] / [`Scenario::sigma2_mw`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub users: usize,
    pub bs_antennas: usize,
    pub user_antennas: Vec<usize>,
    pub pt_dbm: f64,
    pub sigma2_dbm: f64,
    pub distances_m: Vec<f64>,
    pub azimuths_deg: Vec<f64>,
    pub angular_spread_deg: f64,
    pub paired_offset_deg: f64,
    pub n_paths: usize,
    pub mu2: Vec<f64>,
    pub alpha_policy: AlphaPolicy,
    pub reg_matrix_policy: RegMatrixPolicy,
    pub seed: u64,
    pub n_trials: usize,
    /// `(source, target)` pairs, 0-based: after generation the target user's
    /// channel is overwritten with a copy of the source's. Forces an exactly
    /// rank-deficient stack.
    pub duplicate_users: Vec<(usize, usize)>,
    pub precoder_channel: PrecoderChannel,
}

/// Which channel matrices the BS feeds into the precoder construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrecoderChannel {
    /// The small-scale estimates `H̄_k` as they are.
    #[default]
    Unweighted,
    /// `H̄_k / sqrt(L_k)`, the channels the users actually see.
    Weighted,
}

impl PrecoderChannel {
    pub fn apply(self, hbar: &[ComplexMatrix], path_loss: &[f64]) -> Vec<ComplexMatrix> {
        match self {
            Self::Unweighted => hbar.to_vec(),
            Self::Weighted => hbar
                .iter()
                .zip(path_loss)
                .map(|(h, l)| h * Complex64::new(1.0 / l.sqrt(), 0.0))
                .collect(),
        }
    }
}

pub const DEFAULT_NEAR_M: f64 = 50.0;
pub const DEFAULT_FAR_M: f64 = 250.0;
pub const DEFAULT_SPREAD_DEG: f64 = 0.5;
pub const DEFAULT_PAIR_OFFSET_DEG: f64 = 0.5;
pub const DEFAULT_PATHS: usize = 10;

/// Paired-user geometry: the first `K - K/2` users are spread evenly around
/// the BS, user `K - K/2 + j` sits `offset_deg` away from user `j`.
///
/// The evenly spaced grid is rotated by a quarter step. A ULA cannot tell
/// `theta` from `180 - theta`, and an unrotated symmetric grid would place
/// unrelated users on exactly aliased directions.
pub fn paired_azimuths(users: usize, offset_deg: f64) -> Vec<f64> {
    let base = users - users / 2;
    let step = 360.0 / base as f64;
    let mut az: Vec<f64> = (0..base).map(|j| step * (j as f64 + 0.25)).collect();
    for j in 0..users / 2 {
        az.push(az[j] + offset_deg);
    }
    az
}

pub fn paired_distances(users: usize, near_m: f64, far_m: f64) -> Vec<f64> {
    let base = users - users / 2;
    (0..users)
        .map(|k| if k < base { near_m } else { far_m })
        .collect()
}

impl Scenario {
    /// The paired near/far layout with library defaults for everything that
    /// is not a dimension.
    pub fn paired(users: usize, bs_antennas: usize, antennas_per_user: usize) -> Self {
        Self {
            users,
            bs_antennas,
            user_antennas: vec![antennas_per_user; users],
            pt_dbm: 30.0,
            sigma2_dbm: -35.0,
            distances_m: paired_distances(users, DEFAULT_NEAR_M, DEFAULT_FAR_M),
            azimuths_deg: paired_azimuths(users, DEFAULT_PAIR_OFFSET_DEG),
            angular_spread_deg: DEFAULT_SPREAD_DEG,
            paired_offset_deg: DEFAULT_PAIR_OFFSET_DEG,
            n_paths: DEFAULT_PATHS,
            mu2: vec![0.0; users],
            alpha_policy: AlphaPolicy::NoiseToPower,
            reg_matrix_policy: RegMatrixPolicy::SuccessiveJ,
            seed: 1,
            n_trials: 200,
            duplicate_users: Vec::new(),
            precoder_channel: PrecoderChannel::Unweighted,
        }
    }

    pub fn total_user_antennas(&self) -> usize {
        self.user_antennas.iter().sum()
    }

    pub fn pt_mw(&self) -> f64 {
        dbm_to_linear(self.pt_dbm)
    }

    pub fn sigma2_mw(&self) -> f64 {
        dbm_to_linear(self.sigma2_dbm)
    }

    pub fn path_losses(&self) -> Vec<f64> {
        self.distances_m.iter().map(|&d| path_loss(d)).collect()
    }

    /// Checks dimensions and ranges; the message names the offending field.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let k = self.users;
        if k == 0 {
            return Err("users must be at least 1".into());
        }
        if self.bs_antennas == 0 {
            return Err("bs_antennas must be at least 1".into());
        }
        for (name, len) in [
            ("user_antennas", self.user_antennas.len()),
            ("distances_m", self.distances_m.len()),
            ("azimuths_deg", self.azimuths_deg.len()),
            ("mu2", self.mu2.len()),
        ] {
            if len != k {
                return Err(format!("{name} has {len} entries, expected {k}"));
            }
        }
        if self.user_antennas.contains(&0) {
            return Err("user_antennas entries must be at least 1".into());
        }
        let m = self.total_user_antennas();
        if m > self.bs_antennas {
            return Err(format!(
                "user_antennas: total {m} exceeds bs_antennas {} (overloaded)",
                self.bs_antennas
            ));
        }
        if self
            .distances_m
            .iter()
            .any(|&d| !(d > 0.0) || !d.is_finite())
        {
            return Err("distances_m entries must be positive".into());
        }
        if self.mu2.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err("mu2 entries must be non-negative".into());
        }
        if self.n_paths == 0 {
            return Err("n_paths must be at least 1".into());
        }
        if self.n_trials == 0 {
            return Err("n_trials must be at least 1".into());
        }
        if !self.pt_dbm.is_finite() || !self.sigma2_dbm.is_finite() {
            return Err("pt_dbm and sigma2_dbm must be finite".into());
        }
        if let AlphaPolicy::Explicit(a) = &self.alpha_policy {
            if a.len() != k || a.iter().any(|&x| !(x >= 0.0)) {
                return Err(format!("alpha: expected {k} non-negative values"));
            }
        }
        if let RegMatrixPolicy::ExplicitDiagonal(d) = &self.reg_matrix_policy {
            if d.len() != k
                || d.iter()
                    .any(|row| row.len() != m || row.iter().any(|&x| !(x >= 0.0)))
            {
                return Err(format!(
                    "reg_diagonal: expected {m} or {} non-negative values",
                    k * m
                ));
            }
        }
        for &(s, t) in &self.duplicate_users {
            if s >= k || t >= k || s == t || self.user_antennas[s] != self.user_antennas[t] {
                return Err(format!("duplicate_users: invalid pair {}:{}", s + 1, t + 1));
            }
        }
        Ok(())
    }
}

/// True small-scale channels and path losses.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `M_k x N` per user.
    pub h: Vec<ComplexMatrix>,
    pub path_loss: Vec<f64>,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.h.len()
    }

    pub fn bs_antennas(&self) -> usize {
        self.h.first().map_or(0, |h| h.ncols())
    }
}

/// Channels as seen by the BS. `hbar[k] == h[k] + delta[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiSet {
    pub hbar: Vec<ComplexMatrix>,
    pub delta: Vec<ComplexMatrix>,
    pub perfect_mask: Vec<bool>,
}

impl CsiSet {
    pub fn perfect(ch: &ChannelSet) -> Self {
        Self {
            hbar: ch.h.clone(),
            delta: ch
                .h
                .iter()
                .map(|h| numerics::zeros(h.nrows(), h.ncols()))
                .collect(),
            perfect_mask: vec![true; ch.users()],
        }
    }

    pub fn users(&self) -> usize {
        self.hbar.len()
    }
}

/// Unit-norm half-wavelength ULA steering vector.
pub fn steering_vector(len: usize, angle_deg: f64) -> Vec<Complex64> {
    let phase = PI * angle_deg.to_radians().sin();
    let scale = 1.0 / (len as f64).sqrt();
    (0..len)
        .map(|n| Complex64::from_polar(scale, phase * n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub gain: Complex64,
    pub departure_deg: f64,
    pub arrival_deg: f64,
}

/// `sqrt(N M / P) * sum_p g_p a_r(arrival_p) a_t(departure_p)^H`.
pub fn ray_channel(bs_antennas: usize, user_antennas: usize, rays: &[Ray]) -> ComplexMatrix {
    let scale = ((bs_antennas * user_antennas) as f64 / rays.len() as f64).sqrt();
    let mut h = numerics::zeros(user_antennas, bs_antennas);
    for ray in rays {
        let ar = steering_vector(user_antennas, ray.arrival_deg);
        let at = steering_vector(bs_antennas, ray.departure_deg);
        for (i, a) in ar.iter().enumerate() {
            for (j, t) in at.iter().enumerate() {
                h[(i, j)] += ray.gain * a * t.conj();
            }
        }
    }
    h * Complex64::new(scale, 0.0)
}

/// Draws one user's rays and builds the channel, without the rank check.
pub fn draw_user_channel<R: Rng + ?Sized>(
    rng: &mut R,
    bs_antennas: usize,
    user_antennas: usize,
    azimuth_deg: f64,
    spread_deg: f64,
    n_paths: usize,
) -> ComplexMatrix {
    let rays: Vec<Ray> = (0..n_paths)
        .map(|_| {
            let gain = rng::complex_normal(rng);
            let departure_deg = azimuth_deg + spread_deg * (rng.random::<f64>() - 0.5);
            let arrival_deg = 360.0 * rng.random::<f64>();
            Ray {
                gain,
                departure_deg,
                arrival_deg,
            }
        })
        .collect();
    ray_channel(bs_antennas, user_antennas, &rays)
}

/// True channels for one trial. Each user draws from its own substream and
/// is redrawn until it has full row rank.
pub fn generate_channels(s: &Scenario, trial: u64) -> Result<ChannelSet> {
    let mut h = Vec::with_capacity(s.users);
    for k in 0..s.users {
        let mut rng = rng::substream(s.seed, trial, k as u64, Purpose::Channel);
        let m_k = s.user_antennas[k];
        let mut accepted = None;
        for _ in 0..MAX_RANK_ATTEMPTS {
            let hk = draw_user_channel(
                &mut rng,
                s.bs_antennas,
                m_k,
                s.azimuths_deg[k],
                s.angular_spread_deg,
                s.n_paths,
            );
            if numerics::rank(&hk, RANK_TOL) == m_k {
                accepted = Some(hk);
                break;
            }
        }
        match accepted {
            Some(hk) => h.push(hk),
            None => {
                return Err(Error::RankDeficiencyPersistent {
                    user: k,
                    attempts: MAX_RANK_ATTEMPTS,
                })
            }
        }
    }
    for &(src, dst) in &s.duplicate_users {
        h[dst] = h[src].clone();
    }
    Ok(ChannelSet {
        h,
        path_loss: s.path_losses(),
    })
}

/// Adds i.i.d. `CN(0, mu2[k])` errors to every unmasked user.
///
/// The unit-variance draws are taken for every user regardless of `mu2` or
/// the mask, so two calls that differ only in one user's variance or mask
/// share all other errors exactly.
pub fn apply_csi_error(
    ch: &ChannelSet,
    mu2: &[f64],
    perfect_mask: &[bool],
    seed: u64,
    trial: u64,
) -> CsiSet {
    assert_eq!(mu2.len(), ch.users());
    assert_eq!(perfect_mask.len(), ch.users());
    let mut hbar = Vec::with_capacity(ch.users());
    let mut delta = Vec::with_capacity(ch.users());
    for (k, h) in ch.h.iter().enumerate() {
        let mut rng = rng::substream(seed, trial, k as u64, Purpose::CsiError);
        let unit = rng::complex_normal_matrix(&mut rng, h.nrows(), h.ncols(), 1.0);
        let d = if perfect_mask[k] || mu2[k] == 0.0 {
            numerics::zeros(h.nrows(), h.ncols())
        } else {
            unit * Complex64::new(mu2[k].sqrt(), 0.0)
        };
        hbar.push(h + &d);
        delta.push(d);
    }
    CsiSet {
        hbar,
        delta,
        perfect_mask: perfect_mask.to_vec(),
    }
}
