pub mod error;
pub mod fluctuation;
pub mod linalg;
pub mod maps;
pub mod model;
pub mod multibaker;
pub mod observables;
pub mod periodic;
pub mod scalar;
pub mod sim;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{Family, Model};
pub use scalar::{LogMultiple, Rational};
