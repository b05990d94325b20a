//! Library surface of the command-line front end: JSON document schemas and
//! the command implementations, exposed for integration tests.

pub mod commands;
pub mod doc;
