//! q-analogues of the Eulerian functions.

pub mod classical;
pub mod cli;
pub mod error;
pub mod funceq;
pub mod qcore;
pub mod qdigamma;
pub mod qgamma;
pub mod qquotients;
pub mod qstirling;
pub mod quadrature;
pub mod reflection;
pub mod verify;

pub use error::{QError, Result};
pub use qcore::{Precision, QParam, Regime};
