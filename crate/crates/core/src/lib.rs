mod error;
pub mod numerics;

pub use error::{Error, Result};
pub use numerics::{BoundedValue, Rational, Value};
pub mod takagi;
pub mod groups;
pub mod boundary;
pub mod fclass;
mod parallel;
pub mod search;
