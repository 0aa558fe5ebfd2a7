//! Model files, the verification harness and the `fsk` command line built
//! on `fsk-core`.

pub mod cli;
pub mod corpus;
pub mod expr;
pub mod model;
pub mod verify;
