//! Analytical and Monte Carlo performance model of ultra-dense cellular
//! networks with line-of-sight / non-line-of-sight propagation.
//!
//! The analytical pipeline runs `propagation` → `distance_law` → `sinr`,
//! with `load` supplying the interferer density. `power` searches the
//! transmit power that makes a deployment interference limited, and
//! `energy` turns rates and powers into energy efficiency and its optima.
//! `montecarlo` is an independent brute-force simulator used as an oracle.

pub mod claims;
pub mod config;
pub mod distance_law;
pub mod energy;
pub mod error;
pub mod load;
pub mod montecarlo;
pub mod power;
pub mod propagation;
pub mod quadrature;
pub mod sinr;
pub mod sweep;

pub use error::{Error, Result};
