//! Command-line front end for `hahnbound-core`: bound evaluation and sweeps,
//! LP oracle runs, Hahn table dumps, distribution fixtures and the self-test
//! suite.

pub mod app;
pub mod fixture;
pub mod format;
pub mod report;
pub mod selftest;
pub mod sweep;
