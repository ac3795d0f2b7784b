//! The `ahp` command-line tool and HTTP service.

pub mod ask;
pub mod cli;
pub mod ops;
pub mod server;

pub use ops::Failure;
