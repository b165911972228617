//! Quadrature verification of the hidden-variable model.
//!
//! Every check integrates the model densities from [`crate::model`] directly
//! and compares the result with a closed-form target from
//! [`crate::quantum`] or with an exact normalisation constant. Checks are
//! independent and pure, so they fan out over [`crate::exec`] and are merged
//! by sorting on their (stable) names.

use std::f64::consts::{FRAC_PI_2, PI, TAU as TWO_PI};

use serde::Serialize;

use crate::exec::{self, Execution};
use crate::model::{
    self, inverse_n, p_density, phase_crossings_in_lambda, phase_crossings_in_time, q_shape, rho_marginal, Flavour,
    HiddenVariable, ModelParams, PairClass, TIME_CUTOFF,
};
use crate::quad::{self, QuadOptions};
use crate::quantum;
use crate::{Error, Result};

/// Tolerance for lambda-integral reconstructions of the joint density.
pub const TOL_JOINT: f64 = 1e-8;
/// Tolerance for normalisation identities.
pub const TOL_NORM: f64 = 1e-9;
/// Tolerance for the smooth `I_kl` integrals.
pub const TOL_IKL: f64 = 1e-10;
/// Tolerance for the conditional-from-joint identity (pure arithmetic).
pub const TOL_CONDITIONAL: f64 = 1e-12;
/// Number of `s` values for the `I_kl` checks, spread over `[0, 4pi]`.
pub const IKL_SAMPLES: usize = 64;
/// Number of stratified lambda values for the per-lambda normalisations.
pub const NORM_LAMBDA_SAMPLES: usize = 64;

fn opts() -> QuadOptions {
    QuadOptions {
        epsabs: 1e-13,
        epsrel: 1e-13,
        limit: 4000,
    }
}

/// One named comparison of a computed value with its target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub target: f64,
    pub computed: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, target: f64, computed: f64, tolerance: f64) -> Self {
        let residual = (target - computed).abs();
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        Self {
            name: name.into(),
            target,
            computed,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }

    fn from_result(name: String, target: f64, computed: Result<f64>, tolerance: f64) -> Self {
        Check::new(name, target, computed.unwrap_or(f64::NAN), tolerance)
    }
}

/// Collection of checks plus the truncation metadata of the time integrals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureReport {
    pub tau: f64,
    pub delta_m: f64,
    /// Upper limit of the time integrals.
    pub time_cutoff: f64,
    /// Bound on the neglected tail, relative to the full integral.
    pub tail_bound: f64,
    pub checks: Vec<Check>,
}

impl QuadratureReport {
    pub fn new(params: &ModelParams, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        Self {
            tau: params.tau(),
            delta_m: params.delta_m(),
            time_cutoff: TIME_CUTOFF * params.tau(),
            tail_bound: model::tail_bound(),
            checks,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    /// Largest residual among checks whose name starts with `prefix`.
    pub fn max_residual_of(&self, prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Merges another report for the same parameters; entries are re-sorted.
    pub fn merge(mut self, other: QuadratureReport) -> Self {
        self.checks.extend(other.checks);
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self
    }
}

/// Sampling grid for [`full_verification`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_max: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    /// `t in [0, 5 tau]`, 21 points per axis.
    pub fn default_for(params: &ModelParams) -> Self {
        Self {
            t_max: 5.0 * params.tau(),
            points_per_axis: 21,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.points_per_axis;
        (0..n).map(|i| self.t_max * i as f64 / (n - 1) as f64).collect()
    }
}

/// Rebuilds `r_kl(t1, t2)` from the hidden-variable integral. After the delta
/// function collapses `lambda_1 = lambda_2`, the `N(lambda)` factors of the
/// weight and of `Q_l` cancel and the integrand is
/// `p_density(k, lambda, t1) * q_shape(l, lambda, t2) / (4 tau)`.
pub fn reconstruct_joint(k: Flavour, l: Flavour, t1: f64, t2: f64, params: &ModelParams) -> Result<f64> {
    let mut breaks = phase_crossings_in_lambda(t1, params).to_vec();
    breaks.extend(phase_crossings_in_lambda(t2, params));
    let scale = 1.0 / (4.0 * params.tau());
    let integrand = |lam: f64| {
        let h = HiddenVariable::new(lam);
        scale * p_density(k, h, t1, params) * q_shape(l, h, t2, params)
    };
    Ok(quad::integrate(integrand, 0.0, TWO_PI, &breaks, opts())?.value)
}

/// `I_kl(s) = int_{-pi/2}^{pi/2} [cos(x + (k - l - 1) pi + s)]_+ dx` by
/// quadrature, paired with the closed form.
pub fn check_i_kl(k: Flavour, l: Flavour, s: f64) -> Result<(f64, f64)> {
    let shift = (k.index() as f64 - l.index() as f64 - 1.0) * PI + s;
    // zeros of cos(x + shift): x = pi/2 + m pi - shift
    let m_lo = ((-PI - shift) / PI).floor() as i64 - 1;
    let m_hi = ((PI - shift) / PI).ceil() as i64 + 1;
    let breaks: Vec<f64> = (m_lo..=m_hi).map(|m| FRAC_PI_2 + m as f64 * PI - shift).collect();
    let computed = quad::integrate(|x| (x + shift).cos().max(0.0), -FRAC_PI_2, FRAC_PI_2, &breaks, opts())?.value;
    Ok((computed, quantum::i_kl(k, l, s)))
}

#[derive(Debug, Clone, Copy)]
enum NormJob {
    RhoIntegral,
    InverseNLambdaOuter,
    InverseNTimeOuter,
    PerLambda(usize),
}

fn inverse_n_lambda_outer(params: &ModelParams) -> Result<f64> {
    let kinks = [FRAC_PI_2, 1.5 * PI];
    let f = |lam| inverse_n(HiddenVariable::new(lam), params);
    Ok(quad::integrate_fallible(f, 0.0, TWO_PI, &kinks, opts())?.value)
}

fn inverse_n_time_outer(params: &ModelParams) -> Result<f64> {
    let tau = params.tau();
    let dm = params.delta_m();
    let outer = |t: f64| -> Result<f64> {
        let breaks = phase_crossings_in_lambda(t, params);
        let inner = quad::integrate(|lam| (lam - dm * t).cos().abs(), 0.0, TWO_PI, &breaks, opts())?.value;
        Ok((-t / tau).exp() * inner)
    };
    Ok(quad::integrate_fallible(outer, 0.0, TIME_CUTOFF * tau, &[], opts())?.value)
}

fn rho_integral(params: &ModelParams) -> Result<f64> {
    let kinks = [FRAC_PI_2, 1.5 * PI];
    let f = |lam| rho_marginal(HiddenVariable::new(lam), params);
    Ok(quad::integrate_fallible(f, 0.0, TWO_PI, &kinks, opts())?.value)
}

fn per_lambda_norms(lambda: HiddenVariable, params: &ModelParams) -> (Result<f64>, Result<f64>) {
    let t_hi = TIME_CUTOFF * params.tau();
    let breaks = phase_crossings_in_time(lambda, params, 0.0, t_hi);
    let p_total = quad::integrate(
        |t| Flavour::ALL.iter().map(|&k| p_density(k, lambda, t, params)).sum(),
        0.0,
        t_hi,
        &breaks,
        opts(),
    )
    .map(|r| r.value);
    let q_total = quad::integrate(
        |t| Flavour::ALL.iter().map(|&l| q_shape(l, lambda, t, params)).sum(),
        0.0,
        t_hi,
        &breaks,
        opts(),
    )
    .map(|r| r.value)
    .and_then(|q| Ok(q / inverse_n(lambda, params)?));
    (p_total, q_total)
}

fn index_width(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len()
}

/// Normalisation identities: the hidden-variable weight integrates to one,
/// both laws are normalised for each of `lambda_samples` stratified lambda
/// values, and `int 1/N dlambda = 4 tau` in both integration orders.
pub fn check_normalizations(params: &ModelParams, lambda_samples: usize, exec: Execution) -> Result<QuadratureReport> {
    if lambda_samples == 0 {
        return Err(Error::param("lambda_samples", 0, "at least one lambda sample is required"));
    }
    let mut jobs = vec![NormJob::RhoIntegral, NormJob::InverseNLambdaOuter, NormJob::InverseNTimeOuter];
    jobs.extend((0..lambda_samples).map(NormJob::PerLambda));
    let width = index_width(lambda_samples);
    let four_tau = 4.0 * params.tau();

    let results = exec::map_slice(&jobs, exec, |job| match *job {
        NormJob::RhoIntegral => vec![Check::from_result("norm.rho_marginal".into(), 1.0, rho_integral(params), TOL_NORM)],
        NormJob::InverseNLambdaOuter => {
            let v = inverse_n_lambda_outer(params);
            vec![Check::from_result("norm.inverse_n.lambda_outer".into(), four_tau, v, TOL_NORM)]
        }
        NormJob::InverseNTimeOuter => {
            let v = inverse_n_time_outer(params);
            vec![Check::from_result("norm.inverse_n.time_outer".into(), four_tau, v, TOL_NORM)]
        }
        NormJob::PerLambda(j) => {
            let lam = HiddenVariable::new(TWO_PI * (j as f64 + 0.5) / lambda_samples as f64);
            let (p, q) = per_lambda_norms(lam, params);
            vec![
                Check::from_result(format!("norm.p.lambda{j:0width$}"), 1.0, p, TOL_NORM),
                Check::from_result(format!("norm.q.lambda{j:0width$}"), 1.0, q, TOL_NORM),
            ]
        }
    });
    let mut checks: Vec<Check> = results.into_iter().flatten().collect();

    // the two evaluation orders against each other
    let lambda_outer = checks.iter().find(|c| c.name == "norm.inverse_n.lambda_outer").map(|c| c.computed);
    let time_outer = checks.iter().find(|c| c.name == "norm.inverse_n.time_outer").map(|c| c.computed);
    if let (Some(a), Some(b)) = (lambda_outer, time_outer) {
        checks.push(Check::new("norm.inverse_n.orders_agree", a, b, TOL_NORM));
    }
    Ok(QuadratureReport::new(params, checks))
}

#[derive(Debug, Clone, Copy)]
enum GridJob {
    Joint { i: usize, j: usize },
    Ikl { m: usize },
}

/// Runs every check: joint reconstruction and the conditional relation on
/// the full `(k, l, t1, t2)` grid, `I_kl` at 64 values of `s` in `[0, 4pi]`,
/// and [`check_normalizations`] at 64 stratified lambda values.
pub fn full_verification(params: &ModelParams, grid: GridSpec, exec: Execution) -> Result<QuadratureReport> {
    if grid.points_per_axis < 2 {
        return Err(Error::param("points_per_axis", grid.points_per_axis, "grid needs at least two points per axis"));
    }
    if !(grid.t_max.is_finite() && grid.t_max > 0.0) {
        return Err(Error::param("t_max", grid.t_max, "grid extent must be finite and > 0"));
    }
    let ts = grid.points();
    let n = ts.len();
    let w = index_width(n);
    let sw = index_width(IKL_SAMPLES);

    let mut jobs: Vec<GridJob> = (0..n).flat_map(|i| (0..n).map(move |j| GridJob::Joint { i, j })).collect();
    jobs.extend((0..IKL_SAMPLES).map(|m| GridJob::Ikl { m }));

    let results = exec::map_slice(&jobs, exec, |job| {
        let mut out = Vec::with_capacity(8);
        match *job {
            GridJob::Joint { i, j } => {
                let (t1, t2) = (ts[i], ts[j]);
                for k in Flavour::ALL {
                    for l in Flavour::ALL {
                        let tag = format!("k{}l{}.t1_{i:0w$}.t2_{j:0w$}", k.index(), l.index());
                        let target = quantum::joint_density(k, l, t1, t2, params);
                        let computed = reconstruct_joint(k, l, t1, t2, params);
                        out.push(Check::from_result(format!("joint.{tag}"), target, computed, TOL_JOINT));
                        let cond = quantum::conditional_rate(PairClass::of(k, l), (t1 - t2).abs(), params);
                        let from_joint = quantum::conditional_from_joint(k, l, t1, t2, params);
                        out.push(Check::new(format!("conditional.{tag}"), cond, from_joint, TOL_CONDITIONAL));
                    }
                }
            }
            GridJob::Ikl { m } => {
                let s = 4.0 * PI * m as f64 / (IKL_SAMPLES - 1) as f64;
                for k in Flavour::ALL {
                    for l in Flavour::ALL {
                        let name = format!("ikl.k{}l{}.s{m:0sw$}", k.index(), l.index());
                        let check = match check_i_kl(k, l, s) {
                            Ok((computed, closed)) => Check::new(name, closed, computed, TOL_IKL),
                            Err(_) => Check::new(name, quantum::i_kl(k, l, s), f64::NAN, TOL_IKL),
                        };
                        out.push(check);
                    }
                }
            }
        }
        out
    });
    let grid_report = QuadratureReport::new(params, results.into_iter().flatten().collect());
    Ok(grid_report.merge(check_normalizations(params, NORM_LAMBDA_SAMPLES, exec)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Flavour::*;

    fn unit() -> ModelParams {
        ModelParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn reconstruct_joint_examples() {
        let p = unit();
        assert!(reconstruct_joint(B0, B0, 1.0, 1.0, &p).unwrap().abs() < 1e-9);
        assert!((reconstruct_joint(B0, B0bar, 0.0, 0.0, &p).unwrap() - 0.5).abs() < 1e-9);
        let r = reconstruct_joint(B0, B0, 2.0, 1.0, &p).unwrap();
        assert!((r - quantum::joint_density(B0, B0, 2.0, 1.0, &p)).abs() < 1e-9);
        assert!((r - 0.005_721_750_131_573_084).abs() < 1e-9);
    }

    #[test]
    fn reconstruct_joint_nontrivial_tau() {
        let p = ModelParams::new(1.6, 0.45).unwrap();
        for &(t1, t2) in &[(0.3, 4.1), (7.0, 2.2), (3.3, 3.3), (0.0, 9.5)] {
            for k in Flavour::ALL {
                for l in Flavour::ALL {
                    let r = reconstruct_joint(k, l, t1, t2, &p).unwrap();
                    let q = quantum::joint_density(k, l, t1, t2, &p);
                    assert!((r - q).abs() < 1e-10, "{k} {l} {t1} {t2}: {r} vs {q}");
                }
            }
        }
    }

    #[test]
    fn i_kl_examples() {
        let (c, f) = check_i_kl(B0, B0, 0.0).unwrap();
        assert!(c.abs() < 1e-10 && f == 0.0);
        let (c, f) = check_i_kl(B0, B0bar, FRAC_PI_2).unwrap();
        assert!((c - 1.0).abs() < 1e-10 && (f - 1.0).abs() < 1e-15);
        let (c, f) = check_i_kl(B0bar, B0bar, 4.0).unwrap();
        assert!((f - 1.653_643_620_863_612).abs() < 1e-14);
        assert!((c - f).abs() < 1e-10);
    }

    #[test]
    fn normalization_targets() {
        let p = ModelParams::new(2.0, 0.6).unwrap();
        let r = check_normalizations(&p, 8, Execution::Parallel).unwrap();
        let find = |n: &str| r.checks.iter().find(|c| c.name == n).unwrap().clone();
        assert_eq!(find("norm.inverse_n.lambda_outer").target, 8.0);
        assert_eq!(find("norm.inverse_n.time_outer").target, 8.0);
        assert_eq!(find("norm.rho_marginal").target, 1.0);
        assert_eq!(r.checks.len(), 3 + 1 + 2 * 8);
        assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(check_normalizations(&p, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn check_semantics() {
        let c = Check::new("a", 1.0, 1.0 + 2e-9, 1e-9);
        assert!(!c.passed);
        assert!((c.residual - 2e-9).abs() < 1e-15);
        let c = Check::new("b", 1.0, f64::NAN, 1e-9);
        assert!(!c.passed && c.residual.is_infinite());
    }

    #[test]
    fn full_verification_small_grid() {
        let p = ModelParams::from_mixing(0.776).unwrap();
        let grid = GridSpec {
            t_max: 5.0,
            points_per_axis: 5,
        };
        let seq = full_verification(&p, grid, Execution::Sequential).unwrap();
        let par = full_verification(&p, grid, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert!(seq.all_passed());
        assert!(seq.checks.windows(2).all(|w| w[0].name < w[1].name));
        assert!(full_verification(&p, GridSpec { t_max: 5.0, points_per_axis: 1 }, Execution::Sequential).is_err());
    }
}
