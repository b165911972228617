//! Model parameters and the hidden-variable densities.
//!
//! Everything here is a pure function of its arguments. The only cached
//! state is [`NormTable`], which is immutable once built.

mod densities;
mod norm;
mod types;

pub use densities::{
    flavour_window, p_density, phase, phase_crossings_in_lambda, phase_crossings_in_time, q_flavour, q_shape,
};
pub use norm::{
    inverse_n, inverse_n_dimensionless, rho_marginal, tail_bound, NormTable, INVERSE_N_EPSABS, TABLE_SIZE, TIME_CUTOFF,
};
pub use types::{reduce_angle, Flavour, HiddenVariable, ModelParams, PairClass, PairEvent};
