//! The abcd system: parameters, state, initial data and right-hand side.

mod initial;
mod params;
mod rhs;
mod state;

pub use initial::{InitialSpec, Profile, VelocityProfile};
pub use params::{
    preset_quadruple, sgn, validate_params, AbcdParams, Classification, ExcludedPattern, GateFailure, ParamRecord,
    PRESETS,
};
pub(crate) use rhs::apply_mask;
pub use rhs::{rhs, rhs_masked, rhs_spectra, Tendency};
pub use state::{curl_residual, decompose_initial, WaveState};
