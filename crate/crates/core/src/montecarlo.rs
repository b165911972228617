//! Event generation for the hidden-variable model.
//!
//! Each event draws
//!
//! 1. `lambda` from the marginal weight `(1/N(lambda)) / (4 tau)` by rejection
//!    from a uniform proposal under the constant envelope `1/4`,
//! 2. the side-1 time from the exponential law, its flavour from the window,
//! 3. the side-2 time by thinning an exponential proposal with
//!    `|cos(lambda - delta_m t)|`, its flavour from the sign of that cosine.
//!
//! Randomness is counter-style: event `j` uses a ChaCha8 generator whose key
//! is expanded from the run seed by `SeedableRng::seed_from_u64` and whose
//! stream id is `j`. An event is therefore a pure function of `(seed, j)`,
//! independent of how the index range is split across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::exec::{self, Execution};
use crate::model::{flavour_window, phase, Flavour, HiddenVariable, ModelParams, NormTable, PairEvent};
use crate::{Error, Result};

pub const DEFAULT_MAX_REJECTION_ITERS: u64 = 10_000;

/// Parameters of one generation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub n_events: u64,
    pub seed: u64,
    /// Assign the P-law and Q-law to the two sides by a fair coin per event.
    pub symmetrized: bool,
    pub max_rejection_iters: u64,
}

impl SimConfig {
    pub fn new(params: ModelParams, n_events: u64, seed: u64) -> Self {
        Self {
            params,
            n_events,
            seed,
            symmetrized: false,
            max_rejection_iters: DEFAULT_MAX_REJECTION_ITERS,
        }
    }

    pub fn symmetrized(mut self, on: bool) -> Self {
        self.symmetrized = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_events == 0 {
            return Err(Error::param("n_events", 0, "at least one event is required"));
        }
        if self.max_rejection_iters == 0 {
            return Err(Error::param("max_rejection_iters", 0, "must be >= 1"));
        }
        Ok(())
    }

    /// Hex digest identifying this configuration.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "lhv-sim;tau={:?};delta_m={:?};n_events={};seed={};symmetrized={};max_rejection_iters={}",
            self.params.tau(),
            self.params.delta_m(),
            self.n_events,
            self.seed,
            self.symmetrized,
            self.max_rejection_iters
        );
        digest(&canonical)
    }
}

/// Hex digest identifying the physical parameters alone.
pub fn params_fingerprint(params: &ModelParams) -> String {
    digest(&format!("lhv-params;tau={:?};delta_m={:?}", params.tau(), params.delta_m()))
}

/// Truncated SHA-256 of `s`, hex encoded. Used for every fingerprint.
pub fn digest(s: &str) -> String {
    let d = Sha256::digest(s.as_bytes());
    hex::encode(&d[..16])
}

/// Proposal and acceptance counts of the two rejection samplers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RejectionCounts {
    pub lambda_proposals: u64,
    pub t2_proposals: u64,
    pub accepted: u64,
}

impl RejectionCounts {
    pub fn merge(self, o: Self) -> Self {
        Self {
            lambda_proposals: self.lambda_proposals + o.lambda_proposals,
            t2_proposals: self.t2_proposals + o.t2_proposals,
            accepted: self.accepted + o.accepted,
        }
    }

    pub fn stats(&self) -> RngStats {
        let rate = |p: u64| if p == 0 { 1.0 } else { self.accepted as f64 / p as f64 };
        RngStats {
            lambda_acceptance_rate: rate(self.lambda_proposals),
            t2_acceptance_rate: rate(self.t2_proposals),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RngStats {
    pub lambda_acceptance_rate: f64,
    pub t2_acceptance_rate: f64,
}

/// Generated events, in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct EventBatch {
    pub events: Vec<PairEvent>,
    /// Index of `events[0]`.
    pub first_index: u64,
    pub config_fingerprint: String,
    pub counts: RejectionCounts,
}

impl EventBatch {
    pub fn rng_stats(&self) -> RngStats {
        self.counts.stats()
    }

    /// Appends a batch that continues this one's index range.
    pub fn concat(mut self, other: EventBatch) -> Result<Self> {
        if other.config_fingerprint != self.config_fingerprint {
            return Err(Error::param("config_fingerprint", other.config_fingerprint, "batches come from different configurations"));
        }
        if other.first_index != self.first_index + self.events.len() as u64 {
            return Err(Error::param("first_index", other.first_index, "batches are not contiguous"));
        }
        self.events.extend(other.events);
        self.counts = self.counts.merge(other.counts);
        Ok(self)
    }
}

/// Independent generator for event `index` of a run with `seed`.
pub fn event_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform variate in `(0, 1]`.
#[inline]
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Draws `lambda` with density `rho_marginal`. Returns the value and the
/// number of proposals used. Mean acceptance is `2/pi`.
pub fn sample_lambda<R: Rng + ?Sized>(rng: &mut R, table: &NormTable, max_iters: u64) -> Result<(HiddenVariable, u64)> {
    for n in 1..=max_iters {
        let lam = std::f64::consts::TAU * rng.random::<f64>();
        // rho / (1/4) = f(lambda) in (0, 1]
        if rng.random::<f64>() < table.dimensionless(lam) {
            return Ok((HiddenVariable::new(lam), n));
        }
    }
    Err(Error::RejectionLimit {
        stage: "lambda",
        lambda: f64::NAN,
        iters: max_iters,
    })
}

/// Side-1 decay: exponential time, flavour fixed by the window law.
pub fn sample_side1<R: Rng + ?Sized>(rng: &mut R, lambda: HiddenVariable, params: &ModelParams) -> (f64, Flavour) {
    let t = -params.tau() * open_unit(rng).ln();
    (t, flavour_window(lambda, t, params))
}

/// Side-2 decay: exponential proposal accepted with `|cos(lambda - dm t)|`.
/// Returns time, flavour and the number of proposals used.
pub fn sample_side2<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: HiddenVariable,
    params: &ModelParams,
    max_iters: u64,
) -> Result<(f64, Flavour, u64)> {
    for n in 1..=max_iters {
        let t = -params.tau() * open_unit(rng).ln();
        let c = phase(lambda, t, params).cos();
        if rng.random::<f64>() < c.abs() {
            let flavour = if c > 0.0 { Flavour::B0 } else { Flavour::B0bar };
            return Ok((t, flavour, n));
        }
    }
    Err(Error::RejectionLimit {
        stage: "t2",
        lambda: lambda.value(),
        iters: max_iters,
    })
}

/// Reusable generator: the configuration plus its prebuilt `N` table.
#[derive(Debug, Clone)]
pub struct Generator {
    config: SimConfig,
    table: NormTable,
    fingerprint: String,
}

impl Generator {
    pub fn new(config: SimConfig, exec: Execution) -> Result<Self> {
        config.validate()?;
        let table = NormTable::new(config.params, exec)?;
        Ok(Self {
            fingerprint: config.fingerprint(),
            config,
            table,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn table(&self) -> &NormTable {
        &self.table
    }

    /// Event `index` together with its proposal counts.
    pub fn event(&self, index: u64) -> Result<(PairEvent, RejectionCounts)> {
        let cfg = &self.config;
        let mut rng = event_stream(cfg.seed, index);
        let swapped = cfg.symmetrized && rng.random::<bool>();
        let (lambda, n_lambda) = sample_lambda(&mut rng, &self.table, cfg.max_rejection_iters)?;
        let (tp, fp) = sample_side1(&mut rng, lambda, &cfg.params);
        let (tq, fq, n_t2) = sample_side2(&mut rng, lambda, &cfg.params, cfg.max_rejection_iters)?;
        let (t1, flavour1, t2, flavour2) = if swapped { (tq, fq, tp, fp) } else { (tp, fp, tq, fq) };
        let ev = PairEvent {
            lambda,
            t1,
            t2,
            flavour1,
            flavour2,
            swapped,
        };
        let counts = RejectionCounts {
            lambda_proposals: n_lambda,
            t2_proposals: n_t2,
            accepted: 1,
        };
        Ok((ev, counts))
    }

    /// Events with indices in `start..end`.
    pub fn range(&self, start: u64, end: u64, exec: Execution) -> Result<EventBatch> {
        let end = end.min(self.config.n_events);
        let start = start.min(end);
        let generated = exec::map_range(start, end, exec, |i| self.event(i));
        let mut events = Vec::with_capacity((end - start) as usize);
        let mut counts = RejectionCounts::default();
        for r in generated {
            let (ev, c) = r?;
            events.push(ev);
            counts = counts.merge(c);
        }
        Ok(EventBatch {
            events,
            first_index: start,
            config_fingerprint: self.fingerprint.clone(),
            counts,
        })
    }

    pub fn all(&self, exec: Execution) -> Result<EventBatch> {
        self.range(0, self.config.n_events, exec)
    }
}

/// Generates the full batch described by `config`.
pub fn generate(config: SimConfig, exec: Execution) -> Result<EventBatch> {
    Generator::new(config, exec)?.all(exec)
}
