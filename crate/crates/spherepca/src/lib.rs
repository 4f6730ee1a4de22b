//! IO, configuration, experiment runner and acceptance checks for
//! `spherepca-core`.

pub mod config;
pub mod csv_io;
pub mod experiment;
pub mod verify;
