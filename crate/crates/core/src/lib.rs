//! Exact evolution of the cubic Szegő equation `i ∂ₜu = Π(|u|²u)` on the
//! real line for rational initial data.

pub mod action_angle;
pub mod asymptotics;
pub mod error;
pub mod flow;
pub mod hankel;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod poly;
pub mod rational;
pub mod sample;

pub use error::{Result, SzegoError};
