//! Concurrence canonical decomposition toolkit for n-qubit unitaries.

pub mod capacity;
pub mod ccd;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod spinchain;
pub mod spinflip;
pub mod symplectic;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, Tolerances};
