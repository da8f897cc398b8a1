//! Library backing the `qqr` command-line tool: instance generation, the
//! QP3 file format, the benchmark harness, and performance profiles.
//!
//! The numerical solvers live in `qqr-core`; this crate adds IO, file
//! formats, and orchestration.

pub mod bench;
pub mod gen;
pub mod profile;
pub mod qp3;
