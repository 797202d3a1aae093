//! Powerset-lattice knowledge bases built from graded evidence.

pub mod evidence;
pub mod kbio;
pub mod label;
pub mod lattice;
pub mod metrics;
pub mod minimizer;
pub mod precision;
pub mod propagation;
pub mod roughset;
