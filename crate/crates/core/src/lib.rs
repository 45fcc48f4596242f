//! Rydberg excitation spectra of a thermal vapor driven on a two-photon
//! ladder, from an exact three-level reference and from a dressed two-atom
//! model with and without van der Waals interaction.
//!
//! Module map:
//! - [`physparams`]: laser, atom, vapor and interaction inputs; dressed frame
//! - [`liouville`]: Lindblad superoperators and steady states
//! - [`singleatom`]: exact `g → e → r` ladder
//! - [`twoatom`]: dressed pair model
//! - [`thermal`]: Maxwell–Boltzmann averaging (Monte Carlo and quadrature)
//! - [`antiblockade`]: blockade sphere shell model and probe dispersion
//! - [`spectra`]: scans, peak analytics, density scaling fits
//! - [`config`]: JSON configuration file

pub mod antiblockade;
pub mod config;
pub mod error;
pub mod liouville;
pub mod par;
pub mod physparams;
pub mod singleatom;
pub mod spectra;
pub mod thermal;
pub mod twoatom;
pub mod units;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
