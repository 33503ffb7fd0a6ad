//! Delivery schedules for the Wyner linear interference network, with and
//! without receiver caches, verified with exact rational arithmetic.

pub mod analysis;
pub mod decode;
pub mod error;
pub mod experiment;
pub mod net;
pub mod placement;
pub mod schedule;
pub mod window;

pub use error::{CoreError, Result};
