//! Closed-form quantum predictions for a flavour-entangled pair.

use serde::Serialize;

use crate::model::{Flavour, ModelParams, PairClass};

/// Conditional rate `R_i(dt) = exp(-dt/tau) (1 + (-1)^i cos(dm dt)) / (4 tau)`:
/// density of the second decay at `dt` after the first, for same (`i = 1`)
/// or opposite (`i = 2`) flavours.
pub fn conditional_rate(class: PairClass, delta_t: f64, params: &ModelParams) -> f64 {
    let tau = params.tau();
    (-delta_t / tau).exp() * (1.0 + class.sign() * (params.delta_m() * delta_t).cos()) / (4.0 * tau)
}

/// Joint density `r_kl(t1, t2)` of side 1 decaying as `k` at `t1` and side 2
/// as `l` at `t2`.
pub fn joint_density(k: Flavour, l: Flavour, t1: f64, t2: f64, params: &ModelParams) -> f64 {
    let tau = params.tau();
    let class = PairClass::of(k, l);
    let dt = (t1 - t2).abs();
    (-(t1 + t2) / tau).exp() * (1.0 + class.sign() * (params.delta_m() * dt).cos()) / (4.0 * tau * tau)
}

/// Overlap integral `I_kl(s)`: `1 - cos s` for `k = l`, `1 + cos s` otherwise.
pub fn i_kl(k: Flavour, l: Flavour, s: f64) -> f64 {
    1.0 + PairClass::of(k, l).sign() * s.cos()
}

/// Conditional rate recovered from the joint density,
/// `tau exp(2 t_first / tau) r_kl(t1, t2)` with `t_first = min(t1, t2)`.
pub fn conditional_from_joint(k: Flavour, l: Flavour, t1: f64, t2: f64, params: &ModelParams) -> f64 {
    let tau = params.tau();
    let first = t1.min(t2);
    tau * (2.0 * first / tau).exp() * joint_density(k, l, t1, t2, params)
}

/// Mixing asymmetry `(R_2 - R_1) / (R_2 + R_1) = cos(dm dt)`.
pub fn asymmetry(delta_t: f64, params: &ModelParams) -> f64 {
    (params.delta_m() * delta_t).cos()
}

/// Tabulated `R_1` and `R_2` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurve {
    pub delta_t_grid: Vec<f64>,
    pub values_same: Vec<f64>,
    pub values_opposite: Vec<f64>,
}

impl RateCurve {
    pub fn tabulate(grid: &[f64], params: &ModelParams) -> Self {
        Self {
            delta_t_grid: grid.to_vec(),
            values_same: grid.iter().map(|&t| conditional_rate(PairClass::Same, t, params)).collect(),
            values_opposite: grid.iter().map(|&t| conditional_rate(PairClass::Opposite, t, params)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU as TWO_PI};
    use Flavour::*;

    fn unit() -> ModelParams {
        ModelParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn conditional_rate_examples() {
        let p = unit();
        assert_eq!(conditional_rate(PairClass::Same, 0.0, &p), 0.0);
        assert_eq!(conditional_rate(PairClass::Opposite, 0.0, &p), 0.5);
        let v = conditional_rate(PairClass::Same, PI, &p);
        assert!((v - 0.021_606_959_131_886_12).abs() < 1e-15);
    }

    #[test]
    fn joint_density_examples() {
        let p = ModelParams::new(1.7, 0.4).unwrap();
        assert_eq!(joint_density(B0, B0, 2.0, 2.0, &p), 0.0);
        assert_eq!(joint_density(B0bar, B0bar, 0.3, 0.3, &p), 0.0);
        assert_eq!(joint_density(B0, B0bar, 0.0, 0.0, &unit()), 0.5);
        let v = joint_density(B0, B0, 2.0, 1.0, &unit());
        assert!((v - 0.005_721_750_131_573_084).abs() < 1e-16);
    }

    #[test]
    fn i_kl_examples() {
        assert_eq!(i_kl(B0, B0, 0.0), 0.0);
        assert_eq!(i_kl(B0, B0bar, 0.0), 2.0);
        assert_eq!(i_kl(B0bar, B0bar, PI), 2.0);
        assert!((i_kl(B0, B0bar, FRAC_PI_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_from_joint_examples() {
        let p = unit();
        assert!((conditional_from_joint(B0, B0bar, 3.0, 3.0, &p) - 0.5).abs() < 1e-15);
        assert_eq!(conditional_from_joint(B0, B0, 1.2, 1.2, &p), 0.0);
        let v = conditional_from_joint(B0, B0, 1.0, 1.0 + PI, &p);
        assert!((v - 0.021_606_959_131_886_12).abs() < 1e-15);
        assert!((v - conditional_rate(PairClass::Same, PI, &p)).abs() < 1e-16);
    }

    #[test]
    fn asymmetry_examples() {
        let p = unit();
        assert_eq!(asymmetry(0.0, &p), 1.0);
        assert!((asymmetry(PI, &p) + 1.0).abs() < 1e-15);
        assert!(asymmetry(FRAC_PI_2, &p).abs() < 1e-15);
    }

    #[test]
    fn rate_curve_shapes() {
        let grid: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let c = RateCurve::tabulate(&grid, &unit());
        assert_eq!(c.values_same.len(), grid.len());
        assert_eq!(c.values_opposite.len(), grid.len());
        assert!(c.values_same.iter().chain(&c.values_opposite).all(|v| *v >= 0.0));
    }

    fn params_strategy() -> impl Strategy<Value = ModelParams> {
        (0.2f64..3.0, 0.05f64..5.0).prop_map(|(tau, dm)| ModelParams::new(tau, dm).unwrap())
    }

    proptest! {
        #[test]
        fn joint_completeness(p in params_strategy(), t1 in 0.0f64..10.0, t2 in 0.0f64..10.0) {
            let sum: f64 = [B0, B0bar].iter()
                .flat_map(|&k| [B0, B0bar].map(move |l| (k, l)))
                .map(|(k, l)| joint_density(k, l, t1, t2, &p))
                .sum();
            let tau = p.tau();
            let expected = (-(t1 + t2) / tau).exp() / (tau * tau);
            prop_assert!((sum - expected).abs() <= 4.0 * f64::EPSILON * expected);
        }

        #[test]
        fn i_kl_symmetries(s in -20.0f64..20.0) {
            for k in Flavour::ALL {
                for l in Flavour::ALL {
                    prop_assert_eq!(i_kl(k, l, s), i_kl(l, k, s));
                    prop_assert!((i_kl(k, l, s) - i_kl(k, l, s + TWO_PI)).abs() < 1e-13);
                    prop_assert!(i_kl(k, l, s) >= 0.0);
                }
            }
            prop_assert!((i_kl(B0, B0, s) + i_kl(B0, B0bar, s) - 2.0).abs() < 1e-15);
        }

        #[test]
        fn conditional_consistency(p in params_strategy(), t1 in 0.0f64..8.0, t2 in 0.0f64..8.0) {
            for k in Flavour::ALL {
                for l in Flavour::ALL {
                    let a = conditional_from_joint(k, l, t1, t2, &p);
                    let b = conditional_rate(PairClass::of(k, l), (t1 - t2).abs(), &p);
                    prop_assert!((a - b).abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()) + 1e-300);
                }
            }
        }

        #[test]
        fn asymmetry_matches_rates(p in params_strategy(), dt in 0.0f64..10.0) {
            let a = asymmetry(dt, &p);
            prop_assert!((-1.0..=1.0).contains(&a));
            let r1 = conditional_rate(PairClass::Same, dt, &p);
            let r2 = conditional_rate(PairClass::Opposite, dt, &p);
            prop_assert!(r1 >= 0.0 && r2 >= 0.0);
            prop_assert!(((r2 - r1) / (r2 + r1) - a).abs() < 1e-12);
        }
    }
}
