//! Problem files, ket parsing and reports for the `macdfs` command.

pub mod commands;
pub mod error;
pub mod ket;
pub mod problem;
pub mod report;
