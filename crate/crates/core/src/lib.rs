pub mod densitylab;
pub mod discretize;
pub mod error;
pub mod hardness;
pub mod io;
pub mod model;
pub mod oracle;
pub mod posmatch;
pub mod randmatch;

pub use error::{Error, Result};
