//! Binned rates, quantum expectations and goodness-of-fit.
//!
//! Integrating the joint density over the earlier decay time at fixed
//! `dt = |t1 - t2|` (both orderings, both flavour assignments of a class)
//! gives the `dt` marginal
//!
//! ```text
//! p_i(dt) = exp(-dt/tau) (1 + (-1)^i cos(dm dt)) / (2 tau) = 2 R_i(dt)
//! ```
//!
//! whose bin integrals are available in closed form.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::exec::{self, Execution};
use crate::model::{ModelParams, PairClass, PairEvent};
use crate::montecarlo::EventBatch;
use crate::quantum;
use crate::{Error, Result};

/// Minimum expected count per compared bin; smaller bins merge rightward.
pub const MIN_EXPECTED: f64 = 10.0;
/// Minimum number of usable bins for a fit.
pub const MIN_FIT_BINS: usize = 3;

/// Histogram of `|t1 - t2|` split into same- and opposite-flavour pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedRates {
    pub edges: Vec<f64>,
    pub counts_same: Vec<u64>,
    pub counts_opposite: Vec<u64>,
    /// All events, including those outside the binned range.
    pub n_total: u64,
}

impl BinnedRates {
    pub fn empty(edges: &[f64]) -> Result<Self> {
        validate_edges(edges)?;
        let n = edges.len() - 1;
        Ok(Self {
            edges: edges.to_vec(),
            counts_same: vec![0; n],
            counts_opposite: vec![0; n],
            n_total: 0,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Sum of two histograms with identical edges.
    pub fn merge(mut self, other: &BinnedRates) -> Result<Self> {
        if self.edges != other.edges {
            return Err(Error::Binning("cannot merge histograms with different edges".into()));
        }
        for (a, b) in self.counts_same.iter_mut().zip(&other.counts_same) {
            *a += b;
        }
        for (a, b) in self.counts_opposite.iter_mut().zip(&other.counts_opposite) {
            *a += b;
        }
        self.n_total += other.n_total;
        Ok(self)
    }

    fn bin_of(&self, dt: f64) -> Option<usize> {
        if dt < self.edges[0] {
            return None;
        }
        // first edge strictly greater than dt
        let j = self.edges.partition_point(|e| *e <= dt);
        (j < self.edges.len()).then(|| j - 1)
    }

    fn add(&mut self, ev: &PairEvent) {
        self.n_total += 1;
        if let Some(j) = self.bin_of(ev.delta_t()) {
            match ev.class() {
                PairClass::Same => self.counts_same[j] += 1,
                PairClass::Opposite => self.counts_opposite[j] += 1,
            }
        }
    }
}

/// Edges must be strictly ascending and start at or above zero. Only the last
/// edge may be `+inf`.
pub fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::Binning("need at least two edges".into()));
    }
    if edges.iter().any(|e| e.is_nan()) || edges[..edges.len() - 1].iter().any(|e| !e.is_finite()) {
        return Err(Error::Binning("edges must be finite (the last may be +inf)".into()));
    }
    if edges[0] < 0.0 {
        return Err(Error::Binning(format!("first edge {} is negative", edges[0])));
    }
    if let Some(w) = edges.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Binning(format!("edges not strictly ascending at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

/// `bins` uniform bins on `[0, dt_max]`.
pub fn uniform_edges(bins: usize, dt_max: f64) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::param("bins", 0, "at least one bin is required"));
    }
    if !(dt_max.is_finite() && dt_max > 0.0) {
        return Err(Error::param("dt_max", dt_max, "must be finite and > 0"));
    }
    Ok((0..=bins).map(|i| dt_max * i as f64 / bins as f64).collect())
}

/// Histograms `|t1 - t2|` of `events` by flavour class.
pub fn bin_events(events: &[PairEvent], edges: &[f64], exec: Execution) -> Result<BinnedRates> {
    let empty = BinnedRates::empty(edges)?;
    let out = exec::fold_slice(
        events,
        exec,
        || empty.clone(),
        |mut acc, ev| {
            acc.add(ev);
            acc
        },
        |a, b| a.merge(&b).expect("accumulators share edges"),
    );
    Ok(out)
}

pub fn bin_batch(batch: &EventBatch, edges: &[f64], exec: Execution) -> Result<BinnedRates> {
    bin_events(&batch.events, edges, exec)
}

/// Density of `dt = |t1 - t2|` for one flavour class.
pub fn delta_t_density(class: PairClass, dt: f64, params: &ModelParams) -> f64 {
    2.0 * quantum::conditional_rate(class, dt, params)
}

/// Antiderivative of `exp(-u/tau) cos(dm u)`.
fn osc_antiderivative(u: f64, params: &ModelParams) -> f64 {
    if u.is_infinite() {
        return 0.0;
    }
    let a = 1.0 / params.tau();
    let w = params.delta_m();
    (-a * u).exp() * (-a * (w * u).cos() + w * (w * u).sin()) / (a * a + w * w)
}

fn exp_mass(lo: f64, hi: f64, params: &ModelParams) -> f64 {
    let tau = params.tau();
    let upper = if hi.is_infinite() { 0.0 } else { (-hi / tau).exp() };
    (-lo / tau).exp() - upper
}

/// Probability that a pair lands in class `class` with `dt in [lo, hi)`.
pub fn bin_probability(class: PairClass, lo: f64, hi: f64, params: &ModelParams) -> f64 {
    let tau = params.tau();
    let osc = osc_antiderivative(hi, params) - osc_antiderivative(lo, params);
    let p = 0.5 * exp_mass(lo, hi, params) + class.sign() * osc / (2.0 * tau);
    p.max(0.0)
}

/// Expected counts per bin for `n_total` pairs.
pub fn expected_counts(class: PairClass, edges: &[f64], n_total: f64, params: &ModelParams) -> Result<Vec<f64>> {
    validate_edges(edges)?;
    Ok(edges
        .windows(2)
        .map(|w| n_total * bin_probability(class, w[0], w[1], params))
        .collect())
}

/// Model asymmetry of a bin, `(E_opp - E_same) / (E_opp + E_same)`.
pub fn bin_asymmetry(lo: f64, hi: f64, params: &ModelParams) -> f64 {
    let osc = osc_antiderivative(hi, params) - osc_antiderivative(lo, params);
    osc / (params.tau() * exp_mass(lo, hi, params))
}

/// Pearson chi-square of `observed` against `expected`, merging bins
/// rightward until each group expects at least [`MIN_EXPECTED`]; a short
/// trailing group joins its left neighbour. Returns `(chi2, groups)`.
pub fn pearson_merged(observed: &[f64], expected: &[f64]) -> (f64, usize) {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob;
        e += ex;
        if e >= MIN_EXPECTED {
            groups.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => groups.push((o, e)),
        }
    }
    let chi2 = groups
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    (chi2, groups.len())
}

/// Two-sample Pearson chi-square `sum (a - b)^2 / (a + b)` over bins with
/// at least one count, for samples of equal size. Returns `(chi2, bins)`.
pub fn two_sample_chi2(a: &[f64], b: &[f64]) -> (f64, usize) {
    a.iter()
        .zip(b)
        .filter(|(x, y)| **x + **y > 0.0)
        .fold((0.0, 0), |(c, n), (x, y)| (c + (x - y) * (x - y) / (x + y), n + 1))
}

/// Outcome of [`goodness_of_fit`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub chi2_same: f64,
    pub chi2_opposite: f64,
    pub dof_same: usize,
    pub dof_opposite: usize,
    pub p_value_same: f64,
    pub p_value_opposite: f64,
    pub fitted_delta_m: f64,
    pub fitted_delta_m_err: f64,
    pub asym_chi2: f64,
    pub asym_dof: usize,
    pub asym_p_value: f64,
}

impl FitResult {
    pub fn chi2_per_dof_same(&self) -> f64 {
        self.chi2_same / self.dof_same as f64
    }

    pub fn chi2_per_dof_opposite(&self) -> f64 {
        self.chi2_opposite / self.dof_opposite as f64
    }
}

fn chi2_sf(chi2: f64, dof: usize) -> f64 {
    match ChiSquared::new(dof as f64) {
        Ok(d) => d.sf(chi2).clamp(0.0, 1.0),
        Err(_) => f64::NAN,
    }
}

/// One bin of the asymmetry curve.
#[derive(Debug, Clone, Copy)]
struct AsymPoint {
    lo: f64,
    hi: f64,
    value: f64,
    var: f64,
}

/// Observed asymmetry and its binomial variance. `None` for an empty bin.
fn observed_asymmetry(same: f64, opp: f64) -> Option<(f64, f64)> {
    let n = same + opp;
    if n <= 0.0 {
        return None;
    }
    let a = (opp - same) / n;
    Some((a, 4.0 * same * opp / (n * n * n)))
}

fn asym_objective(points: &[AsymPoint], delta_m: f64, tau: f64) -> f64 {
    let params = match ModelParams::new(tau, delta_m) {
        Ok(p) => p,
        Err(_) => return f64::INFINITY,
    };
    points
        .iter()
        .map(|p| {
            let r = p.value - bin_asymmetry(p.lo, p.hi, &params);
            r * r / p.var
        })
        .sum()
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fits `delta_m` to the per-bin asymmetry by weighted least squares: a
/// coarse scan followed by golden-section refinement. Returns
/// `(delta_m, standard error, chi2, points)`.
fn fit_asymmetry(edges: &[f64], same: &[f64], opp: &[f64], tau: f64) -> Result<(f64, f64, f64, usize)> {
    let points: Vec<AsymPoint> = edges
        .windows(2)
        .zip(same.iter().zip(opp))
        .filter(|(w, (s, o))| w[1].is_finite() && **s + **o >= MIN_EXPECTED)
        .filter_map(|(w, (&s, &o))| {
            observed_asymmetry(s, o).map(|(value, var)| AsymPoint {
                lo: w[0],
                hi: w[1],
                value,
                // one-count floor so a bin with a single class keeps finite weight
                var: var.max(1.0 / ((s + o) * (s + o))),
            })
        })
        .collect();
    if points.len() < MIN_FIT_BINS {
        return Err(Error::Fit(format!(
            "only {} bins with >= {MIN_EXPECTED} events for the asymmetry fit (need {MIN_FIT_BINS})",
            points.len()
        )));
    }
    let min_width = points.iter().map(|p| p.hi - p.lo).fold(f64::INFINITY, f64::min);
    let upper = (2.0 * std::f64::consts::PI / min_width).max(10.0 / tau);
    let lower = 1e-3 / tau;
    const SCAN: usize = 4000;
    let step = (upper - lower) / SCAN as f64;
    let grid = |i: usize| lower + step * i as f64;
    let objective = |m: f64| asym_objective(&points, m, tau);
    let best = (0..=SCAN)
        .map(|i| (i, objective(grid(i))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = grid(best.saturating_sub(1)).max(lower * 0.5);
    let hi = grid((best + 1).min(SCAN));
    let m = golden_section(objective, lo, hi, 1e-12 * upper);
    let chi2 = objective(m);
    let h = 1e-4 * m;
    let curvature = (objective(m + h) - 2.0 * chi2 + objective(m - h)) / (h * h);
    let err = if curvature > 0.0 {
        (2.0 / curvature).sqrt()
    } else {
        f64::NAN
    };
    Ok((m, err, chi2, points.len()))
}

/// Chi-square of both classes against [`expected_counts`] and a fit of
/// `delta_m` to the asymmetry curve. Counts are real-valued so synthetic
/// (e.g. exactly expected) histograms can be fed in directly.
pub fn fit_counts(edges: &[f64], same: &[f64], opposite: &[f64], n_total: f64, params: &ModelParams) -> Result<FitResult> {
    validate_edges(edges)?;
    if same.len() != edges.len() - 1 || opposite.len() != edges.len() - 1 {
        return Err(Error::Binning("count vectors do not match the edges".into()));
    }
    if n_total <= 0.0 {
        return Err(Error::Fit("no events".into()));
    }
    let exp_same = expected_counts(PairClass::Same, edges, n_total, params)?;
    let exp_opp = expected_counts(PairClass::Opposite, edges, n_total, params)?;
    let (chi2_same, groups_same) = pearson_merged(same, &exp_same);
    let (chi2_opposite, groups_opp) = pearson_merged(opposite, &exp_opp);
    if groups_same < MIN_FIT_BINS || groups_opp < MIN_FIT_BINS {
        return Err(Error::Fit(format!(
            "too few bins after merging to >= {MIN_EXPECTED} expected ({groups_same} same, {groups_opp} opposite; need {MIN_FIT_BINS})"
        )));
    }
    let dof_same = groups_same - 1;
    let dof_opposite = groups_opp - 1;
    let (fitted_delta_m, fitted_delta_m_err, asym_chi2, n_points) = fit_asymmetry(edges, same, opposite, params.tau())?;
    let asym_dof = n_points - 1;
    Ok(FitResult {
        chi2_same,
        chi2_opposite,
        dof_same,
        dof_opposite,
        p_value_same: chi2_sf(chi2_same, dof_same),
        p_value_opposite: chi2_sf(chi2_opposite, dof_opposite),
        fitted_delta_m,
        fitted_delta_m_err,
        asym_chi2,
        asym_dof,
        asym_p_value: chi2_sf(asym_chi2, asym_dof),
    })
}

pub fn goodness_of_fit(binned: &BinnedRates, params: &ModelParams) -> Result<FitResult> {
    let same: Vec<f64> = binned.counts_same.iter().map(|&c| c as f64).collect();
    let opp: Vec<f64> = binned.counts_opposite.iter().map(|&c| c as f64).collect();
    fit_counts(&binned.edges, &same, &opp, binned.n_total as f64, params)
}

/// Row of the per-bin table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinRow {
    pub dt_lo: f64,
    pub dt_hi: f64,
    pub n_same: u64,
    pub n_opp: u64,
    pub exp_same: f64,
    pub exp_opp: f64,
    pub asym: f64,
    pub asym_err: f64,
}

pub fn bin_table(binned: &BinnedRates, params: &ModelParams) -> Result<Vec<BinRow>> {
    let n = binned.n_total as f64;
    let exp_same = expected_counts(PairClass::Same, &binned.edges, n, params)?;
    let exp_opp = expected_counts(PairClass::Opposite, &binned.edges, n, params)?;
    Ok((0..binned.n_bins())
        .map(|j| {
            let (s, o) = (binned.counts_same[j], binned.counts_opposite[j]);
            let (asym, asym_err) = observed_asymmetry(s as f64, o as f64)
                .map(|(a, v)| (a, v.sqrt()))
                .unwrap_or((f64::NAN, f64::NAN));
            BinRow {
                dt_lo: binned.edges[j],
                dt_hi: binned.edges[j + 1],
                n_same: s,
                n_opp: o,
                exp_same: exp_same[j],
                exp_opp: exp_opp[j],
                asym,
                asym_err,
            }
        })
        .collect())
}

/// Plot-ready comparison of empirical rates with the conditional rates
/// `R_1`, `R_2` at bin centres. Empirical values are scaled by
/// `1 / (2 n_total width)` so they estimate `R_i` directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub dt_center: f64,
    pub rate_same: f64,
    pub rate_same_err: f64,
    pub rate_opp: f64,
    pub rate_opp_err: f64,
    pub model_same: f64,
    pub model_opp: f64,
}

pub fn rate_curves(binned: &BinnedRates, params: &ModelParams) -> Vec<CurvePoint> {
    let n = binned.n_total.max(1) as f64;
    binned
        .edges
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].is_finite())
        .map(|(j, w)| {
            let width = w[1] - w[0];
            let scale = 1.0 / (2.0 * n * width);
            let (s, o) = (binned.counts_same[j] as f64, binned.counts_opposite[j] as f64);
            let c = 0.5 * (w[0] + w[1]);
            CurvePoint {
                dt_center: c,
                rate_same: s * scale,
                rate_same_err: s.sqrt() * scale,
                rate_opp: o * scale,
                rate_opp_err: o.sqrt() * scale,
                model_same: quantum::conditional_rate(PairClass::Same, c, params),
                model_opp: quantum::conditional_rate(PairClass::Opposite, c, params),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Flavour, HiddenVariable};
    use crate::quad::{integrate, QuadOptions};
    use proptest::prelude::*;

    fn ev(t1: f64, f1: Flavour, t2: f64, f2: Flavour) -> PairEvent {
        PairEvent {
            lambda: HiddenVariable::new(0.0),
            t1,
            t2,
            flavour1: f1,
            flavour2: f2,
            swapped: false,
        }
    }

    fn x776() -> ModelParams {
        ModelParams::from_mixing(0.776).unwrap()
    }

    #[test]
    fn edge_validation() {
        assert!(validate_edges(&[0.0]).is_err());
        assert!(validate_edges(&[0.0, 1.0, 1.0]).is_err());
        assert!(validate_edges(&[0.0, 2.0, 1.0]).is_err());
        assert!(validate_edges(&[-0.1, 1.0]).is_err());
        assert!(validate_edges(&[0.0, f64::INFINITY, 2.0]).is_err());
        assert!(validate_edges(&[0.0, 1.0, f64::INFINITY]).is_ok());
        assert!(bin_events(&[], &[1.0, 0.5], Execution::Sequential).is_err());
        assert_eq!(uniform_edges(4, 2.0).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(uniform_edges(0, 2.0).is_err());
    }

    #[test]
    fn binning_examples() {
        let edges = uniform_edges(5, 5.0).unwrap();
        let empty = bin_events(&[], &edges, Execution::Sequential).unwrap();
        assert!(empty.counts_same.iter().chain(&empty.counts_opposite).all(|&c| c == 0));
        assert_eq!(empty.n_total, 0);

        let one = bin_events(&[ev(1.0, Flavour::B0, 1.0, Flavour::B0bar)], &edges, Execution::Sequential).unwrap();
        assert_eq!(one.counts_opposite[0], 1);
        assert_eq!(one.counts_same.iter().sum::<u64>(), 0);

        let evs = [
            ev(0.0, Flavour::B0, 7.0, Flavour::B0), // overflow
            ev(2.0, Flavour::B0bar, 0.5, Flavour::B0bar),
            ev(0.5, Flavour::B0bar, 2.0, Flavour::B0),
            ev(3.0, Flavour::B0, 4.0, Flavour::B0),
        ];
        let b = bin_events(&evs, &edges, Execution::Parallel).unwrap();
        assert_eq!(b.n_total, 4);
        assert_eq!(b.counts_same, vec![0, 2, 0, 0, 0]);
        assert_eq!(b.counts_opposite, vec![0, 1, 0, 0, 0]);
        assert!(b.counts_same.iter().sum::<u64>() + b.counts_opposite.iter().sum::<u64>() <= b.n_total);
    }

    /// dt marginal by 2-D quadrature of the joint density over the band
    /// `lo <= |t1 - t2| < hi`, using `t_min` and `dt` as coordinates.
    fn class_probability_2d(class: PairClass, lo: f64, hi: f64, params: &ModelParams) -> f64 {
        let pairs: Vec<(Flavour, Flavour)> = Flavour::ALL
            .iter()
            .flat_map(|&k| Flavour::ALL.map(move |l| (k, l)))
            .filter(|&(k, l)| PairClass::of(k, l) == class)
            .collect();
        let opts = QuadOptions {
            epsabs: 1e-13,
            epsrel: 1e-12,
            limit: 2000,
        };
        let inner = |dt: f64| {
            integrate(
                |tmin| {
                    pairs
                        .iter()
                        .map(|&(k, l)| {
                            quantum::joint_density(k, l, tmin, tmin + dt, params)
                                + quantum::joint_density(k, l, tmin + dt, tmin, params)
                        })
                        .sum::<f64>()
                },
                0.0,
                60.0 * params.tau(),
                &[],
                opts,
            )
            .unwrap()
            .value
        };
        integrate(inner, lo, hi, &[], opts).unwrap().value
    }

    fn class_probability_1d(class: PairClass, lo: f64, hi: f64, params: &ModelParams) -> f64 {
        integrate(|dt| delta_t_density(class, dt, params), lo, hi, &[], QuadOptions::default())
            .unwrap()
            .value
    }

    #[test]
    fn expected_counts_dual_quadrature() {
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let closed = expected_counts(PairClass::Opposite, &[0.0, 1.0], 1e6, &p).unwrap()[0];
        let one_d = 1e6 * class_probability_1d(PairClass::Opposite, 0.0, 1.0, &p);
        let two_d = 1e6 * class_probability_2d(PairClass::Opposite, 0.0, 1.0, &p);
        assert!((closed - 593_758.720_740_953_6).abs() < 1e-6, "{closed}");
        assert!((closed - one_d).abs() < 1e-6);
        assert!((closed - two_d).abs() < 1e-5, "{closed} vs {two_d}");

        let q = ModelParams::new(1.4, 0.6).unwrap();
        for class in PairClass::ALL {
            for &(lo, hi) in &[(0.0, 0.3), (0.7, 2.9), (4.0, 9.0)] {
                let c = bin_probability(class, lo, hi, &q);
                assert!((c - class_probability_1d(class, lo, hi, &q)).abs() < 1e-12);
                assert!((c - class_probability_2d(class, lo, hi, &q)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn expected_counts_total_probability() {
        let p = x776();
        let edges = [0.0, 0.5, 1.0, 3.0, 10.0, f64::INFINITY];
        let s: f64 = expected_counts(PairClass::Same, &edges, 1000.0, &p).unwrap().iter().sum();
        let o: f64 = expected_counts(PairClass::Opposite, &edges, 1000.0, &p).unwrap().iter().sum();
        assert!((s + o - 1000.0).abs() < 1e-10);
    }

    #[test]
    fn same_class_vanishes_cubically_near_zero() {
        let p = ModelParams::new(1.0, 1.0).unwrap();
        let a = expected_counts(PairClass::Same, &[0.0, 1e-2], 1.0, &p).unwrap()[0];
        let b = expected_counts(PairClass::Same, &[0.0, 1e-3], 1.0, &p).unwrap()[0];
        let ratio = a / b;
        assert!((ratio - 1000.0).abs() < 20.0, "{ratio}");
        // leading term dm^2 eps^3 / 12
        assert!((b / (1e-9 / 12.0) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn classes_sum_to_flavour_blind_exponential() {
        let p = ModelParams::new(2.0, 0.3).unwrap();
        let edges = uniform_edges(20, 10.0).unwrap();
        let s = expected_counts(PairClass::Same, &edges, 1.0, &p).unwrap();
        let o = expected_counts(PairClass::Opposite, &edges, 1.0, &p).unwrap();
        for (j, w) in edges.windows(2).enumerate() {
            let blind = integrate(|u| (-u / 2.0).exp() / 2.0, w[0], w[1], &[], QuadOptions::default()).unwrap().value;
            assert!((s[j] + o[j] - blind).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_expectation_fits_perfectly() {
        let p = x776();
        let edges = uniform_edges(50, 5.0).unwrap();
        let n = 1e6;
        let s = expected_counts(PairClass::Same, &edges, n, &p).unwrap();
        let o = expected_counts(PairClass::Opposite, &edges, n, &p).unwrap();
        let fit = fit_counts(&edges, &s, &o, n, &p).unwrap();
        assert!(fit.chi2_same.abs() < 1e-18 && fit.chi2_opposite.abs() < 1e-18);
        assert!((fit.fitted_delta_m - p.delta_m()).abs() < 1e-8, "{}", fit.fitted_delta_m);
        assert!(fit.fitted_delta_m_err > 0.0 && fit.fitted_delta_m_err < 0.05);
        assert_eq!(fit.dof_same, 49);
        assert!((fit.p_value_same - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_refused_with_too_few_bins() {
        let p = x776();
        let edges = uniform_edges(50, 5.0).unwrap();
        let s = expected_counts(PairClass::Same, &edges, 30.0, &p).unwrap();
        let o = expected_counts(PairClass::Opposite, &edges, 30.0, &p).unwrap();
        assert!(matches!(fit_counts(&edges, &s, &o, 30.0, &p), Err(Error::Fit(_))));
        let empty = BinnedRates::empty(&edges).unwrap();
        assert!(goodness_of_fit(&empty, &p).is_err());
    }

    #[test]
    fn chi2_scales_with_statistics() {
        let obs = [12.0, 30.0, 55.0, 41.0, 20.0];
        let exp = [10.0, 33.0, 50.0, 45.0, 18.0];
        let (c1, g1) = pearson_merged(&obs, &exp);
        let obs2: Vec<f64> = obs.iter().map(|x| 2.0 * x).collect();
        let exp2: Vec<f64> = exp.iter().map(|x| 2.0 * x).collect();
        let (c2, g2) = pearson_merged(&obs2, &exp2);
        assert_eq!(g1, g2);
        assert!((c2 - 2.0 * c1).abs() < 1e-12);
    }

    #[test]
    fn merge_rule_groups_small_bins() {
        let (chi2, groups) = pearson_merged(&[1.0, 2.0, 9.0, 30.0, 2.0], &[3.0, 3.0, 5.0, 30.0, 1.0]);
        // [3+3+5]=11, [30+1]=31 (trailing bin joins its neighbour)
        assert_eq!(groups, 2);
        assert!((chi2 - ((12.0f64 - 11.0).powi(2) / 11.0 + (32.0f64 - 31.0).powi(2) / 31.0)).abs() < 1e-12);
    }

    #[test]
    fn table_and_curves() {
        let p = x776();
        let edges = uniform_edges(4, 2.0).unwrap();
        let evs = [
            ev(0.0, Flavour::B0, 0.1, Flavour::B0bar),
            ev(0.0, Flavour::B0, 0.2, Flavour::B0bar),
            ev(0.0, Flavour::B0, 0.3, Flavour::B0),
        ];
        let b = bin_events(&evs, &edges, Execution::Sequential).unwrap();
        let rows = bin_table(&b, &p).unwrap();
        assert_eq!(rows.len(), 4);
        assert!((rows[0].asym - 1.0 / 3.0).abs() < 1e-15);
        assert!(rows[1].asym.is_nan());
        let curves = rate_curves(&b, &p);
        assert_eq!(curves.len(), 4);
        assert!((curves[0].rate_opp - 2.0 / (2.0 * 3.0 * 0.5)).abs() < 1e-15);
        assert!((curves[0].model_opp - quantum::conditional_rate(PairClass::Opposite, 0.25, &p)).abs() < 1e-16);
    }

    #[test]
    fn two_sample_statistic() {
        let (c, n) = two_sample_chi2(&[10.0, 0.0, 5.0], &[12.0, 0.0, 5.0]);
        assert_eq!(n, 2);
        assert!((c - 4.0 / 22.0).abs() < 1e-15);
    }

    fn event_strategy() -> impl Strategy<Value = PairEvent> {
        (0.0f64..8.0, any::<bool>(), 0.0f64..8.0, any::<bool>()).prop_map(|(t1, a, t2, b)| {
            let f = |x: bool| if x { Flavour::B0 } else { Flavour::B0bar };
            ev(t1, f(a), t2, f(b))
        })
    }

    proptest! {
        #[test]
        fn binning_is_order_and_split_invariant(mut evs in proptest::collection::vec(event_strategy(), 0..200), cut in 0usize..200) {
            let edges = uniform_edges(10, 5.0).unwrap();
            let whole = bin_events(&evs, &edges, Execution::Sequential).unwrap();
            let cut = cut.min(evs.len());
            let left = bin_events(&evs[..cut], &edges, Execution::Sequential).unwrap();
            let right = bin_events(&evs[cut..], &edges, Execution::Parallel).unwrap();
            prop_assert_eq!(&whole, &left.merge(&right).unwrap());
            evs.reverse();
            prop_assert_eq!(&whole, &bin_events(&evs, &edges, Execution::Parallel).unwrap());
        }
    }
}
