pub mod bregman;
pub mod error;
pub mod harness;
pub mod kserver;
pub mod offline;
pub mod paging;
pub mod polytope;
pub mod setcover;
pub mod tree;

pub use error::{Error, Result};
