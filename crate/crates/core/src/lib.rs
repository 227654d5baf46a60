//! Signs of Shimura-lifted half-integral weight Hilbert modular coefficients.
//!
//! Coefficients `lambda(tau, a^-1 p)` of a half-integral weight form are recovered
//! from the normalized eigenvalues `c(p)` of its integral weight lift through
//! `lambda(p) = c(p) - chi(p)/N(p)`, where `chi` is the quadratic character attached
//! to `F(sqrt tau)/F`. The crate computes those signs exactly and measures how
//! their densities and the normalized Sato–Tate coordinates behave.

pub mod app_io;
pub mod characters;
pub mod field_arith;
pub mod formal_series;
pub mod sato_tate;
pub mod sign_pipeline;

pub use characters::IdealCharacter;
pub use field_arith::{Ideal, PrimeIdeal, QuadField, QuadInt};
pub use formal_series::FormalSeries;
pub use sign_pipeline::{EigenvalueSeries, SignTally};
