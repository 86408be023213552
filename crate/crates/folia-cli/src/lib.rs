//! IO companion of the exact foliation kernel: JSON wire formats, command
//! implementations, and the scan runner used by the `folia` binary.

pub mod commands;
pub mod formats;
pub mod runner;
