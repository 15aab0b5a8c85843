//! Configuration, field files, boundary-data specifications, reports and the
//! command implementations behind the `mhs` binary.

pub mod commands;
pub mod config;
pub mod data_spec;
pub mod field_io;
pub mod report;
