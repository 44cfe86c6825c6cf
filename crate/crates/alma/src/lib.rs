//! Command-line driver for the Alma-0 interpreter, plus the corpus manifest
//! reader and the independent oracle checkers the acceptance tests use.

pub mod cli;
pub mod corpus;
pub mod oracles;
