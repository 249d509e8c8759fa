//! Monte-Carlo drivers behind the `srzf` command line tool.
//!
//! Trials run in parallel on independent RNG substreams and are reduced in
//! trial order, so the numbers written to CSV depend only on the scenario,
//! the seed and the grids. Wall-clock time is returned separately and never
//! written to CSV.
//!
//! CSV schemas:
//!
//! ```text
//! sumrate: scheme,pt_dbm,csi_mode,mean_sr_bits,stderr_sr_bits,trials,failures
//! prop2:   mu2,gap_min,gap_mean,gap_max,ub_mean,trials
//! ```

use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{self, ChannelSet, CsiSet, Scenario};
use crate::error::{Error, Result};
use crate::metrics::{self, Prop2Summary};
use crate::numerics::{self, RANK_TOL};
use crate::precoding::{
    self, order_users, RegMatrixPolicy, RegularizationPlan, Scheme, StackedCsi,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    Perfect,
    Imperfect,
}

impl CsiMode {
    pub const BOTH: [CsiMode; 2] = [CsiMode::Perfect, CsiMode::Imperfect];
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Imperfect => "imperfect",
        })
    }
}

/// One `(scheme, P_T, CSI mode)` cell of the sum-rate sweep. The mean and
/// standard error are over the trials that succeeded; `trials` counts all
/// attempted trials. A cell with no successful trial has a NaN mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateRow {
    pub scheme: String,
    pub pt_dbm: f64,
    pub csi_mode: CsiMode,
    pub mean_sr_bits: f64,
    pub stderr_sr_bits: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop2Row {
    pub mu2: f64,
    pub gap_min: f64,
    pub gap_mean: f64,
    pub gap_max: f64,
    pub ub_mean: f64,
    pub trials: usize,
}

impl From<&Prop2Summary> for Prop2Row {
    fn from(s: &Prop2Summary) -> Self {
        Self {
            mu2: s.mu2,
            gap_min: s.gap_min,
            gap_mean: s.gap_mean,
            gap_max: s.gap_max,
            ub_mean: s.ub_mean,
            trials: s.trials,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult<R> {
    pub tag: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<R>,
    pub wall_clock: Duration,
}

impl<R: Serialize> ExperimentResult<R> {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

impl ExperimentResult<SumRateRow> {
    pub fn row(&self, scheme: Scheme, pt_dbm: f64, mode: CsiMode) -> Option<&SumRateRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme.name() && r.pt_dbm == pt_dbm && r.csi_mode == mode)
    }
}

/// Builds one scheme from a CSI set for the given `P_T` and evaluates it
/// against the true channels.
pub fn evaluate_scheme(
    s: &Scenario,
    ch: &ChannelSet,
    csi: &CsiSet,
    scheme: Scheme,
    pt_mw: f64,
) -> Result<f64> {
    let sigma2 = s.sigma2_mw();
    let perm = order_users(&csi.hbar, &ch.path_loss, pt_mw, sigma2);
    let view = s.precoder_channel.apply(&csi.hbar, &ch.path_loss);
    let stacked = StackedCsi::new(&view, &perm);
    let plan = RegularizationPlan::from_policy(
        &s.alpha_policy,
        &s.reg_matrix_policy,
        &stacked,
        pt_mw,
        sigma2,
    );
    let p = precoding::build(scheme, &stacked, &plan, pt_mw, sigma2)?;
    Ok(metrics::sum_rate(ch, &p, sigma2)?.sum_rate)
}

/// Per-trial sum rates indexed `[mode][pt][scheme]`, `None` on failure.
fn sumrate_trial(
    s: &Scenario,
    schemes: &[Scheme],
    pt_grid_dbm: &[f64],
    trial: u64,
) -> Vec<Vec<Vec<Option<f64>>>> {
    let ch = match channel::generate_channels(s, trial) {
        Ok(ch) => ch,
        Err(_) => return vec![vec![vec![None; schemes.len()]; pt_grid_dbm.len()]; 2],
    };
    let no_mask = vec![false; s.users];
    let imperfect = channel::apply_csi_error(&ch, &s.mu2, &no_mask, s.seed, trial);
    let perfect = CsiSet::perfect(&ch);
    CsiMode::BOTH
        .iter()
        .map(|mode| {
            let csi = match mode {
                CsiMode::Perfect => &perfect,
                CsiMode::Imperfect => &imperfect,
            };
            pt_grid_dbm
                .iter()
                .map(|&pt_dbm| {
                    let pt = channel::dbm_to_linear(pt_dbm);
                    schemes
                        .iter()
                        .map(|&sc| evaluate_scheme(s, &ch, csi, sc, pt).ok())
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: usize,
    sum: f64,
    sum_sq: f64,
    failures: usize,
}

impl Accumulator {
    fn push(&mut self, x: Option<f64>) {
        match x {
            Some(v) if v.is_finite() => {
                self.n += 1;
                self.sum += v;
                self.sum_sq += v * v;
            }
            _ => self.failures += 1,
        }
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum / self.n as f64
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Average sum rate per scheme, transmit power and CSI mode. The same
/// channel and error draws are reused across the whole power grid; the
/// imperfect mode uses the scenario's `mu2`.
pub fn run_sumrate_sweep(
    s: &Scenario,
    schemes: &[Scheme],
    pt_grid_dbm: &[f64],
    trials: usize,
) -> ExperimentResult<SumRateRow> {
    let start = Instant::now();
    let per_trial: Vec<_> = (0..trials as u64)
        .into_par_iter()
        .map(|t| sumrate_trial(s, schemes, pt_grid_dbm, t))
        .collect();

    let mut rows = Vec::new();
    for (mi, &mode) in CsiMode::BOTH.iter().enumerate() {
        for (pi, &pt_dbm) in pt_grid_dbm.iter().enumerate() {
            for (si, &scheme) in schemes.iter().enumerate() {
                let mut acc = Accumulator::default();
                for t in &per_trial {
                    acc.push(t[mi][pi][si]);
                }
                rows.push(SumRateRow {
                    scheme: scheme.name().to_string(),
                    pt_dbm,
                    csi_mode: mode,
                    mean_sr_bits: acc.mean(),
                    stderr_sr_bits: acc.stderr(),
                    trials,
                    failures: acc.failures,
                });
            }
        }
    }
    ExperimentResult {
        tag: "sumrate",
        seed: s.seed,
        trials,
        rows,
        wall_clock: start.elapsed(),
    }
}

/// Extra interference caused by user `user`'s CSI error (0-based), swept
/// over its error variance.
pub fn run_prop2_sweep(
    s: &Scenario,
    user: usize,
    mu2_grid: &[f64],
    trials: usize,
) -> Result<(ExperimentResult<Prop2Row>, Vec<Prop2Summary>)> {
    let start = Instant::now();
    let summaries = metrics::prop2_experiment(s, user, mu2_grid, trials)?;
    let result = ExperimentResult {
        tag: "prop2",
        seed: s.seed,
        trials,
        rows: summaries.iter().map(Prop2Row::from).collect(),
        wall_clock: start.elapsed(),
    };
    Ok((result, summaries))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
    /// Reproduction hint for the first failing instance.
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct PropertyReport {
    pub checks: Vec<CheckOutcome>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Failed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Passed => "PASS",
                CheckStatus::Failed => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            writeln!(f, "{tag} {:<24} {}", c.name, c.detail)?;
            if let Some(cx) = &c.counterexample {
                writeln!(f, "     counterexample: {cx}")?;
            }
        }
        Ok(())
    }
}

pub const PROP1_TOL: f64 = 1e-8;
pub const POWER_TOL: f64 = 1e-10;
pub const FPA_TOL: f64 = 1e-12;
pub const DEGENERACY_TOL: f64 = 1e-9;
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Worst value seen over instances plus where it happened.
struct Tracker {
    name: &'static str,
    tol: f64,
    worst: f64,
    first_bad: Option<String>,
    instances: usize,
    skipped: usize,
    skip_reason: Option<String>,
}

impl Tracker {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: 0.0,
            first_bad: None,
            instances: 0,
            skipped: 0,
            skip_reason: None,
        }
    }

    fn record(&mut self, value: f64, where_: impl FnOnce() -> String) {
        self.instances += 1;
        if value > self.worst || value.is_nan() {
            self.worst = if value.is_nan() { f64::INFINITY } else { value };
        }
        if !(value <= self.tol) && self.first_bad.is_none() {
            self.first_bad = Some(format!("{} (value {value:.3e})", where_()));
        }
    }

    fn skip(&mut self, reason: String) {
        self.skipped += 1;
        self.skip_reason.get_or_insert(reason);
    }

    fn finish(self) -> CheckOutcome {
        let status = if self.first_bad.is_some() {
            CheckStatus::Failed
        } else if self.instances == 0 {
            CheckStatus::Skipped
        } else {
            CheckStatus::Passed
        };
        let mut detail = format!(
            "worst {:.3e} <= {:.0e} over {} instances",
            self.worst, self.tol, self.instances
        );
        if self.skipped > 0 {
            detail.push_str(&format!(
                ", {} skipped ({})",
                self.skipped,
                self.skip_reason.unwrap_or_default()
            ));
        }
        CheckOutcome {
            name: self.name,
            status,
            detail,
            counterexample: self.first_bad,
        }
    }
}

fn relative_diff(a: &numerics::ComplexMatrix, b: &numerics::ComplexMatrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Runs every structural check on `instances` realizations of the scenario,
/// plus a CSI-error bound check on user 1.
///
/// The structural checks treat the channel the BS sees (`H` plus the
/// scenario's CSI error) as the true channel, since they are identities of
/// the stack a precoder is built from. With `mu2 = 0` this is the true
/// channel itself.
///
/// With `duplicate_users` set and no CSI error on the duplicated users, the
/// stack is rank deficient by construction. The ZF path must then report
/// `NotPositiveDefinite`, and checks that need full row rank are skipped.
pub fn run_property_suite(s: &Scenario, instances: usize) -> PropertyReport {
    let degenerate = !s.duplicate_users.is_empty()
        && s.duplicate_users
            .iter()
            .all(|&(a, b)| s.mu2[a] == 0.0 && s.mu2[b] == 0.0);
    let (pt, sigma2) = (s.pt_mw(), s.sigma2_mw());
    let m = s.total_user_antennas();

    let mut prop1 = Tracker::new("prop1_residual", PROP1_TOL);
    let mut power = Tracker::new("power_budget", POWER_TOL);
    let mut fpa = Tracker::new("fpa_equal_columns", FPA_TOL);
    let mut zf_chain = Tracker::new("srzf_alpha0_is_zf", DEGENERACY_TOL);
    let mut rzf_chain = Tracker::new("srzf_identity_is_rzf", DEGENERACY_TOL);
    let mut nullspace = Tracker::new("nullspace_orthonormal", ORTHONORMAL_TOL);
    let mut expected_failure = None;

    for trial in 0..instances as u64 {
        let at = |extra: &str| format!("seed={} trial={trial}{extra}", s.seed);
        let ch = match channel::generate_channels(s, trial) {
            Ok(ch) => ch,
            Err(e) => {
                for t in [
                    &mut prop1,
                    &mut power,
                    &mut fpa,
                    &mut zf_chain,
                    &mut rzf_chain,
                    &mut nullspace,
                ] {
                    t.skip(format!("channel generation: {e}"));
                }
                continue;
            }
        };
        let seen = channel::apply_csi_error(&ch, &s.mu2, &vec![false; s.users], s.seed, trial);
        let ch = ChannelSet {
            h: seen.hbar,
            path_loss: ch.path_loss,
        };
        let perm = order_users(&ch.h, &ch.path_loss, pt, sigma2);
        let view = s.precoder_channel.apply(&ch.h, &ch.path_loss);
        let stacked = StackedCsi::new(&view, &perm);
        let plan = RegularizationPlan::from_policy(
            &s.alpha_policy,
            &s.reg_matrix_policy,
            &stacked,
            pt,
            sigma2,
        );

        if degenerate {
            let outcome = precoding::zf(&stacked, pt);
            if expected_failure.is_none()
                || !matches!(outcome, Err(Error::NotPositiveDefinite { .. }))
            {
                expected_failure = Some((trial, outcome.map(|_| ())));
            }
        }

        match metrics::prop1_residuals(&stacked, &plan, pt) {
            Ok(table) if !degenerate => {
                let (mut worst, mut pair) = (0.0, (0, 0));
                for (k, row) in table.residuals.iter().enumerate() {
                    for (kp, &r) in row.iter().enumerate() {
                        if r > worst || r.is_nan() {
                            worst = r;
                            pair = (perm[k] + 1, perm[kp] + 1);
                        }
                    }
                }
                prop1.record(worst, || at(&format!(" users k={} k'={}", pair.0, pair.1)));
            }
            Ok(_) => prop1.skip("rank-deficient stack".into()),
            Err(e) => prop1.skip(e.to_string()),
        }

        for &scheme in &Scheme::ALL {
            let built = precoding::build(scheme, &stacked, &plan, pt, sigma2);
            let p = match built {
                Ok(p) => p,
                Err(e) => {
                    power.skip(format!("{scheme}: {e}"));
                    continue;
                }
            };
            power.record((p.total_power() - pt).abs() / pt, || {
                at(&format!(" scheme={scheme}"))
            });
            if scheme != Scheme::Wf {
                let target = pt / m as f64;
                let worst =
                    p.p.iter()
                        .flat_map(|pk| {
                            pk.column_iter()
                                .map(|c| c.norm_squared())
                                .collect::<Vec<_>>()
                        })
                        .map(|c| (c - target).abs() / target)
                        .fold(0.0, f64::max);
                fpa.record(worst, || at(&format!(" scheme={scheme}")));
            }
        }

        if degenerate {
            zf_chain.skip("rank-deficient stack".into());
        } else {
            let zero = RegularizationPlan::successive(&stacked.sizes, vec![0.0; stacked.users()]);
            match (
                precoding::srzf(&stacked, &zero, pt),
                precoding::zf(&stacked, pt),
            ) {
                (Ok(a), Ok(b)) => {
                    zf_chain.record(relative_diff(&a.stacked(), &b.stacked()), || at(""))
                }
                (Err(e), _) | (_, Err(e)) => zf_chain.skip(e.to_string()),
            }
        }

        let alpha = precoding::default_alpha(m, sigma2, pt);
        let ident = RegularizationPlan::identity(&stacked.sizes, vec![alpha; stacked.users()]);
        match (
            precoding::srzf(&stacked, &ident, pt),
            precoding::rzf(&stacked, alpha, pt),
        ) {
            (Ok(a), Ok(b)) => {
                rzf_chain.record(relative_diff(&a.stacked(), &b.stacked()), || at(""))
            }
            (Err(e), _) | (_, Err(e)) => rzf_chain.skip(e.to_string()),
        }

        for pos in 0..stacked.users() {
            for (label, a) in [
                ("others", stacked.others(pos)),
                ("preceding", stacked.preceding(pos)),
            ] {
                if a.nrows() == 0 {
                    continue;
                }
                let basis = numerics::nullspace_basis(&a, RANK_TOL);
                if basis.ncols() == 0 {
                    continue;
                }
                let gram_err =
                    (basis.adjoint() * &basis - numerics::identity(basis.ncols())).norm();
                let leak = (&a * &basis).norm() / a.norm();
                nullspace.record(gram_err.max(leak), || {
                    at(&format!(" user={} {label}", perm[pos] + 1))
                });
            }
        }
    }

    let mut checks = vec![prop1.finish()];
    checks.push(prop2_check(s, instances, degenerate));
    checks.extend([
        power.finish(),
        fpa.finish(),
        zf_chain.finish(),
        rzf_chain.finish(),
        nullspace.finish(),
    ]);
    if matches!(s.reg_matrix_policy, RegMatrixPolicy::Identity) {
        checks.push(identity_policy_check(s, instances));
    }
    if degenerate {
        checks.push(match expected_failure {
            Some((_, Err(Error::NotPositiveDefinite { .. }))) => CheckOutcome {
                name: "zf_rank_deficient",
                status: CheckStatus::Passed,
                detail: "zf reports NotPositiveDefinite on every duplicated stack".into(),
                counterexample: None,
            },
            Some((trial, outcome)) => CheckOutcome {
                name: "zf_rank_deficient",
                status: CheckStatus::Failed,
                detail: format!("expected NotPositiveDefinite, got {outcome:?}"),
                counterexample: Some(format!("seed={} trial={trial}", s.seed)),
            },
            None => CheckOutcome {
                name: "zf_rank_deficient",
                status: CheckStatus::Skipped,
                detail: "no instances".into(),
                counterexample: None,
            },
        });
    }
    PropertyReport { checks }
}

/// With the identity regularization policy the scenario's own SRZF must
/// coincide with RZF at the same per-user `alpha`.
fn identity_policy_check(s: &Scenario, instances: usize) -> CheckOutcome {
    let (pt, sigma2) = (s.pt_mw(), s.sigma2_mw());
    let mut t = Tracker::new("policy_identity_is_rzf", DEGENERACY_TOL);
    for trial in 0..instances as u64 {
        let Ok(ch) = channel::generate_channels(s, trial) else {
            continue;
        };
        let view = s.precoder_channel.apply(&ch.h, &ch.path_loss);
        let stacked = StackedCsi::in_order(&view);
        let plan = RegularizationPlan::from_policy(
            &s.alpha_policy,
            &s.reg_matrix_policy,
            &stacked,
            pt,
            sigma2,
        );
        if plan.alphas.iter().any(|&a| a != plan.alphas[0]) {
            t.skip("per-user alpha differs".into());
            continue;
        }
        match (
            precoding::srzf(&stacked, &plan, pt),
            precoding::rzf(&stacked, plan.alphas[0], pt),
        ) {
            (Ok(a), Ok(b)) => t.record(relative_diff(&a.stacked(), &b.stacked()), || {
                format!("seed={} trial={trial}", s.seed)
            }),
            (Err(e), _) | (_, Err(e)) => t.skip(e.to_string()),
        }
    }
    t.finish()
}

fn prop2_check(s: &Scenario, instances: usize, degenerate: bool) -> CheckOutcome {
    let name = "prop2_zero_violations";
    if degenerate {
        return CheckOutcome {
            name,
            status: CheckStatus::Skipped,
            detail: "rank-deficient stack".into(),
            counterexample: None,
        };
    }
    let mu2 = if s.mu2[0] > 0.0 { s.mu2[0] } else { 1e-2 };
    match metrics::prop2_experiment(s, 0, &[mu2], instances) {
        Ok(summary) => {
            let sm = &summary[0];
            CheckOutcome {
                name,
                status: if sm.violations == 0 {
                    CheckStatus::Passed
                } else {
                    CheckStatus::Failed
                },
                detail: format!(
                    "{} violations over {} pairs (user 1, mu2 = {mu2:e})",
                    sm.violations, sm.pairs
                ),
                counterexample: sm
                    .first_violation
                    .map(|t| format!("seed={} trial={t} user=1 mu2={mu2:e}", s.seed)),
            }
        }
        Err(e) => CheckOutcome {
            name,
            status: CheckStatus::Skipped,
            detail: e.to_string(),
            counterexample: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Scenario {
        let mut s = Scenario::paired(4, 8, 2);
        s.angular_spread_deg = 40.0;
        s.mu2 = vec![1e-2; 4];
        s
    }

    #[test]
    fn accumulator_statistics() {
        let mut a = Accumulator::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            a.push(Some(x));
        }
        a.push(None);
        a.push(Some(f64::NAN));
        assert_eq!(a.failures, 2);
        assert!((a.mean() - 2.5).abs() < 1e-15);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((a.stderr() - sd / 2.0).abs() < 1e-15);
        assert!(Accumulator::default().mean().is_nan());
    }

    #[test]
    fn sweep_shape_and_order() {
        let s = small();
        let r = run_sumrate_sweep(&s, &[Scheme::Srzf, Scheme::Zf], &[10.0, 20.0], 3);
        assert_eq!(r.rows.len(), 2 * 2 * 2);
        assert_eq!(r.rows[0].scheme, "srzf");
        assert_eq!(r.rows[0].csi_mode, CsiMode::Perfect);
        assert_eq!(r.rows[7].csi_mode, CsiMode::Imperfect);
        assert!(r.rows.iter().all(|row| row.trials == 3));
        let csv = r.to_csv_string().unwrap();
        assert!(
            csv.starts_with("scheme,pt_dbm,csi_mode,mean_sr_bits,stderr_sr_bits,trials,failures\n")
        );
        assert!(csv.contains("srzf,10.0,perfect,"));
    }

    #[test]
    fn single_user_schemes_coincide() {
        let mut s = Scenario::paired(1, 4, 1);
        s.angular_spread_deg = 60.0;
        s.mu2 = vec![1e-2];
        let schemes = Scheme::ALL;
        let r = run_sumrate_sweep(&s, &schemes, &[20.0], 4);
        for mode in CsiMode::BOTH {
            let base = r.row(Scheme::Zf, 20.0, mode).unwrap().mean_sr_bits;
            for sc in schemes {
                let v = r.row(sc, 20.0, mode).unwrap().mean_sr_bits;
                assert!((v - base).abs() < 1e-6, "{sc} {mode}: {v} vs {base}");
            }
        }
    }

    #[test]
    fn prop2_zero_grid_is_all_zero() {
        let (r, _) = run_prop2_sweep(&small(), 0, &[0.0], 4).unwrap();
        let row = &r.rows[0];
        assert_eq!(
            (row.gap_min, row.gap_mean, row.gap_max, row.ub_mean),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert!(r
            .to_csv_string()
            .unwrap()
            .starts_with("mu2,gap_min,gap_mean,gap_max,ub_mean,trials\n"));
    }

    #[test]
    fn property_suite_passes_on_well_conditioned_scenario() {
        let report = run_property_suite(&small(), 5);
        assert!(report.all_passed(), "{report}");
        assert_eq!(
            report.get("prop1_residual").unwrap().status,
            CheckStatus::Passed
        );
    }

    #[test]
    fn duplicated_users_make_zf_fail_as_expected() {
        let mut s = small();
        s.mu2 = vec![0.0; 4];
        s.duplicate_users = vec![(0, 1)];
        let report = run_property_suite(&s, 3);
        assert_eq!(
            report.get("zf_rank_deficient").unwrap().status,
            CheckStatus::Passed,
            "{report}"
        );
        assert_eq!(
            report.get("prop1_residual").unwrap().status,
            CheckStatus::Skipped
        );
    }
}
