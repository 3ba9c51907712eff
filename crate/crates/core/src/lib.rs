//! Ergotropy dynamics of open quantum batteries and detection of
//! ergotropic Mpemba crossings.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail range checks

pub mod channels;
pub mod ergotropy;
pub mod error;
pub mod mpemba;
pub mod region;
pub mod state;

pub use channels::{steady_state, ChannelSpec, Gadc, NonMarkovAdc, Pauli, Propagator, QutritAdc};
pub use error::{Error, Result};
pub use state::{BatteryHamiltonian, BlochVector, DensityMatrix, QutritDiagonal};
