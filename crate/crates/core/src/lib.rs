//! Position and velocity selection of alkali atoms with microwave
//! magnetic-dipole pi-pulses in a static field gradient.
//!
//! Each pulse transfers only atoms near the position where the Zeeman-shifted
//! hyperfine splitting matches the microwave frequency; two pulses separated
//! by a delay select a cell in phase space. The crate covers the stretched
//! state energies ([`breit_rabi`]), single-pulse widths ([`pulse`]), motion
//! between pulses ([`dynamics`]), wavepacket-averaged transfer
//! ([`probability`]), the two-pulse geometry ([`phase_space`]), a seeded
//! ensemble simulation ([`monte_carlo`]) and coil / stability budgets
//! ([`apparatus`]).
//!
//! All quantities are SI.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apparatus;
pub mod breit_rabi;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod monte_carlo;
pub mod phase_space;
pub mod probability;
pub mod pulse;
pub mod quadrature;
pub mod roots;

pub use breit_rabi::{FieldConfig, Level, Sigma, StretchedBranch};
pub use constants::{get_species, AtomSpecies, CONSTANTS};
pub use error::{Error, Result};
pub use pulse::PulseSpec;
