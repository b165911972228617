//! The two single-particle decay laws of the model.
//!
//! Side 1 follows a pure exponential whose flavour is fixed by which half of
//! the oscillation cycle the phase `lambda - delta_m * t` falls in. Side 2
//! follows an exponential modulated by a positive-part cosine and normalised
//! by `N(lambda)` (see [`super::norm`]).

use std::f64::consts::{FRAC_PI_2, PI};

use super::types::{reduce_angle, Flavour, HiddenVariable, ModelParams};

const THREE_FRAC_PI_2: f64 = 3.0 * FRAC_PI_2;

/// Oscillation phase `lambda - delta_m * t` reduced to `[0, 2pi)`.
#[inline]
pub fn phase(lambda: HiddenVariable, t: f64, params: &ModelParams) -> f64 {
    reduce_angle(lambda.value() - params.delta_m() * t)
}

/// Flavour selected by the side-1 window law at time `t`.
///
/// `B0bar` on `phi in [0, pi/2) U [3pi/2, 2pi)`, `B0` on `[pi/2, 3pi/2)`. The
/// half-open convention settles the measure-zero boundaries.
#[inline]
pub fn flavour_window(lambda: HiddenVariable, t: f64, params: &ModelParams) -> Flavour {
    window_of_phase(phase(lambda, t, params))
}

#[inline]
pub(crate) fn window_of_phase(phi: f64) -> Flavour {
    if !(FRAC_PI_2..THREE_FRAC_PI_2).contains(&phi) {
        Flavour::B0bar
    } else {
        Flavour::B0
    }
}

/// Side-1 density `P_k(lambda, t)`.
pub fn p_density(k: Flavour, lambda: HiddenVariable, t: f64, params: &ModelParams) -> f64 {
    if t < 0.0 || flavour_window(lambda, t, params) != k {
        return 0.0;
    }
    (-t / params.tau()).exp() / params.tau()
}

/// Unnormalised side-2 law `Q_l(lambda, t) / N(lambda)`, i.e.
/// `exp(-t/tau) * [cos(lambda - (l+1) pi - delta_m t)]_+`.
pub fn q_shape(l: Flavour, lambda: HiddenVariable, t: f64, params: &ModelParams) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    // (l+1) pi is 2pi for B0 and 3pi for B0bar
    let c = phase(lambda, t, params).cos();
    let signed = match l {
        Flavour::B0 => c,
        Flavour::B0bar => -c,
    };
    if signed > 0.0 {
        (-t / params.tau()).exp() * signed
    } else {
        0.0
    }
}

/// Flavour with the non-vanishing side-2 law at time `t` (`None` exactly on a
/// cosine zero).
pub fn q_flavour(lambda: HiddenVariable, t: f64, params: &ModelParams) -> Option<Flavour> {
    let c = phase(lambda, t, params).cos();
    if c > 0.0 {
        Some(Flavour::B0)
    } else if c < 0.0 {
        Some(Flavour::B0bar)
    } else {
        None
    }
}

/// Times in `(t_lo, t_hi)` where the phase crosses `pi/2 + m pi`: window
/// edges of `P_k` and zeros of the cosine in `Q_l` for fixed `lambda`.
pub fn phase_crossings_in_time(lambda: HiddenVariable, params: &ModelParams, t_lo: f64, t_hi: f64) -> Vec<f64> {
    // lambda - dm t = pi/2 + m pi  =>  t = (lambda - pi/2 - m pi) / dm
    let dm = params.delta_m();
    let base = lambda.value() - FRAC_PI_2;
    let m_lo = ((base - dm * t_hi) / PI).ceil() as i64;
    let m_hi = ((base - dm * t_lo) / PI).floor() as i64;
    let mut out: Vec<f64> = (m_lo..=m_hi)
        .map(|m| (base - m as f64 * PI) / dm)
        .filter(|t| *t > t_lo && *t < t_hi)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Values of `lambda` in `[0, 2pi)` where the phase at time `t` crosses
/// `pi/2` or `3pi/2`.
pub fn phase_crossings_in_lambda(t: f64, params: &ModelParams) -> [f64; 2] {
    let shift = params.delta_m() * t;
    [reduce_angle(shift + FRAC_PI_2), reduce_angle(shift + THREE_FRAC_PI_2)]
}
