pub mod carlitz;
pub mod cli;
pub mod counting;
pub mod error;
pub mod gf;
pub mod lincomp;
pub mod poly;
pub mod selftest;
pub mod surd;
pub mod sweep;

pub use error::{Error, Result};
pub use gf::{make_field, Fe, FieldCtx};
pub use poly::{interpolate, Poly, ValueTable};
