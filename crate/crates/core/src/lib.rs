//! Numerical laboratory for Q_α norms, Littlewood-Paley Morrey norms,
//! Campanato norms and the dyadic-cube kernel on the periodic torus.

pub mod corpus;
pub mod cubes;
pub mod error;
pub mod filterbank;
pub mod grid;
pub mod norms;
pub mod reduce;
pub mod verify;

pub use error::{Error, Result};
