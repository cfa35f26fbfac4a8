pub mod bench;
pub mod changes;
pub mod cli;
pub mod error;
pub mod eval;
pub mod model;
pub mod ql;
pub mod rdf;
pub mod store;
pub mod translate;
pub mod vocab;

pub use error::{Error, Result};
