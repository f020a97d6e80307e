//! Finite-volume toolkit for quantum spin-chain sources.
//!
//! A source is a consistent family of density operators `{ρ_m}` on `m`
//! consecutive lattice sites. This crate builds such families (product,
//! classically correlated, and channel-transformed), applies memoryless Kraus
//! channels site by site, and evaluates the finite trace criteria for
//! consistency, stationarity, ergodicity, weak mixing and strong mixing.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line runner and parallel sweeps live in the `qsource` companion crate.

#![no_std]

extern crate alloc;

pub mod channel;
pub mod classical;
pub mod ergodicity;
mod error;
pub mod expectation;
pub mod linalg;
pub mod operator;
pub mod source;

pub use channel::{KrausChannel, KrausReport, StandardChannel};
pub use classical::{ClassicalProcess, Classification, MeasureTable, StationaryDistribution};
pub use ergodicity::{Criterion, ErgodicityReport, Verdict, VerdictPolicy};
pub use error::{Error, Result};
pub use expectation::PinchingBasis;
pub use num_complex::Complex64;
pub use operator::{DensityOperator, DensityReport, Operator, SiteConfig};
pub use source::{AlphabetSpec, Backend, DensityFamily, QuantumSource};
