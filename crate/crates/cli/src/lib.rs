//! Library surface of the experiment harness, shared by the binary and the
//! acceptance suite.

pub mod config;
pub mod plot;
pub mod run;
