//! Photon-pair source metrics for cavity-enhanced SPDC with an ultra-narrow
//! intra-cavity dissipative filter.
//!
//! The crate covers three regimes: the doubly-filtered degenerate source
//! ([`degenerate`]), the singly-filtered non-degenerate source
//! ([`nondegenerate`]) and the broadband-pumped singly-filtered source
//! ([`jsa`]). Every closed form has an independent numerical counterpart in
//! [`oracle`], and [`validation`] runs them against each other.
//!
//! All frequencies are angular (rad/s) inside the library. Configuration
//! documents carry Hz, converted with `value_rad_s = 2π · value_Hz`.

pub mod degenerate;
pub mod exec;
pub mod jsa;
pub mod lineshape;
pub mod nondegenerate;
pub mod oracle;
pub mod params;
pub mod report;
pub mod validation;

pub use exec::Execution;
pub use params::{ConfigError, DerivedParams, SystemParams};
