//! Ground-state mean-field analysis of N three-level lambda systems coupled to
//! two boson modes with diamagnetic self-interaction.

pub mod config;
pub mod edoracle;
pub mod error;
pub mod landscape;
pub mod model;
pub mod nogo;
pub mod phasemap;
pub mod solver;

pub use error::{Error, Result};
