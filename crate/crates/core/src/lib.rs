//! Numerical machinery for heavy-tailed stable Markov kernels: Cauchy-Poisson
//! and Lévy profiles, Harnack certification, concentration bounds, maximal
//! operators, and finite spaces of homogeneous type.

pub mod concentration;
pub mod error;
pub mod experiments;
pub mod harnack;
pub mod hom_space;
pub mod kernels;
pub mod maximal;
pub mod quad;
mod serde_float;
pub mod special;

pub use error::{Error, Result};
