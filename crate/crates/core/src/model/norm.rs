//! The side-2 normaliser `N(lambda)`.
//!
//! Only the reciprocal is needed anywhere:
//!
//! ```text
//! 1/N(lambda) = int_0^inf exp(-t/tau) |cos(lambda - delta_m t)| dt
//!             = tau * f(lambda; x),   x = delta_m * tau
//! ```
//!
//! `f` is evaluated by breakpoint quadrature over `u = t/tau in [0, 60]`. For
//! sampling, [`NormTable`] caches `f` on a 4096-point lambda grid and
//! interpolates with cubic Hermite polynomials, using the exact slope
//! `f' = (|cos lambda| - f) / x` that follows from differentiating the
//! integral with respect to its upper limit after `v = lambda - x u`.

use std::f64::consts::{FRAC_PI_2, PI, TAU as TWO_PI};

use super::types::{reduce_angle, HiddenVariable, ModelParams};
use crate::exec::{self, Execution};
use crate::quad::{self, QuadOptions};
use crate::Result;

/// Upper limit of the time integrals, in units of `tau`. The neglected tail
/// is below `exp(-60)`.
pub const TIME_CUTOFF: f64 = 60.0;

/// Absolute quadrature tolerance for `1/N`.
pub const INVERSE_N_EPSABS: f64 = 1e-10;

/// Number of lambda nodes in [`NormTable`].
pub const TABLE_SIZE: usize = 4096;

/// Bound on the truncated tail of every time integral.
pub fn tail_bound() -> f64 {
    (-TIME_CUTOFF).exp()
}

/// Zeros of `cos(lambda - x u)` in `u in (0, TIME_CUTOFF)`.
fn cosine_zeros(lambda: f64, x: f64) -> Vec<f64> {
    let base = lambda - FRAC_PI_2;
    let m_lo = ((base - x * TIME_CUTOFF) / PI).ceil() as i64;
    let m_hi = (base / PI).floor() as i64;
    (m_lo..=m_hi)
        .rev()
        .map(|m| (base - m as f64 * PI) / x)
        .filter(|u| *u > 0.0 && *u < TIME_CUTOFF)
        .collect()
}

/// Dimensionless `f(lambda; x) = int_0^60 e^{-u} |cos(lambda - x u)| du`.
pub fn inverse_n_dimensionless(lambda: f64, x: f64) -> Result<f64> {
    let zeros = cosine_zeros(lambda, x);
    let opts = QuadOptions {
        epsabs: INVERSE_N_EPSABS,
        epsrel: 1e-13,
        limit: zeros.len() + 2000,
    };
    let r = quad::integrate(|u| (-u).exp() * (lambda - x * u).cos().abs(), 0.0, TIME_CUTOFF, &zeros, opts)?;
    Ok(r.value)
}

/// `1/N(lambda)`, recomputed by quadrature on every call. Lies in `(0, tau]`.
pub fn inverse_n(lambda: HiddenVariable, params: &ModelParams) -> Result<f64> {
    Ok(params.tau() * inverse_n_dimensionless(lambda.value(), params.mixing())?)
}

/// Marginal density of the shared hidden variable, `(1/N(lambda)) / (4 tau)`.
/// Integrates to one over `[0, 2pi)` and never exceeds `1/4`.
pub fn rho_marginal(lambda: HiddenVariable, params: &ModelParams) -> Result<f64> {
    Ok(inverse_n(lambda, params)? / (4.0 * params.tau()))
}

/// Cached `1/N` on a uniform lambda grid, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct NormTable {
    params: ModelParams,
    step: f64,
    /// Dimensionless `f` at `lambda_j = j * step`, `j = 0..=TABLE_SIZE`
    /// (the last node repeats the first).
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl NormTable {
    pub fn new(params: ModelParams, exec: Execution) -> Result<Self> {
        let x = params.mixing();
        let step = TWO_PI / TABLE_SIZE as f64;
        let mut values = exec::map_range(0, TABLE_SIZE as u64, exec, |j| {
            inverse_n_dimensionless(j as f64 * step, x)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        values.push(values[0]);
        let slopes = values
            .iter()
            .enumerate()
            .map(|(j, f)| ((j as f64 * step).cos().abs() - f) / x)
            .collect();
        Ok(Self {
            params,
            step,
            values,
            slopes,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Interpolated dimensionless `f(lambda)`, clamped to `(0, 1]`.
    #[inline]
    pub fn dimensionless(&self, lambda: f64) -> f64 {
        let lam = reduce_angle(lambda);
        let pos = lam / self.step;
        let j = (pos as usize).min(TABLE_SIZE - 1);
        let s = pos - j as f64;
        let (f0, f1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (self.slopes[j] * self.step, self.slopes[j + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let v = h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1;
        v.clamp(f64::MIN_POSITIVE, 1.0)
    }

    /// Interpolated `1/N(lambda)`.
    #[inline]
    pub fn inverse_n(&self, lambda: HiddenVariable) -> f64 {
        self.params.tau() * self.dimensionless(lambda.value())
    }

    /// Interpolated `rho_marginal(lambda)`.
    #[inline]
    pub fn rho_marginal(&self, lambda: HiddenVariable) -> f64 {
        self.dimensionless(lambda.value()) / 4.0
    }

    /// Grid nodes and tabulated dimensionless values.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(j, v)| (j as f64 * self.step, *v))
    }
}
