//! Library surface of the CLI: command implementations plus the
//! independent flat-space comparison loop.

pub mod commands;
pub mod flat;
