//! Numerical toolkit for radial and whole-plane Schramm--Loewner evolution.
//!
//! The crate is organized in four layers:
//!
//! * [`geometry`] -- closed-form analytic kernels: SLE exponents, the
//!   two-regime hitting kernel `P_y`, cylinder metric and conformal radius,
//!   annulus moduli and distortion bounds.
//! * [`loewner`] -- the numerical Loewner engine: seeded Brownian driving
//!   paths, the forward capacity flow, reverse-flow trace extraction, and the
//!   large-disc whole-plane approximant.
//! * [`bounds`] -- multipoint upper-bound kernels (constants stripped),
//!   nearest-distance sequences, and concentric circle families with their
//!   structural validation.
//! * [`mc`] -- Monte Carlo harness: hit-probability estimation, circle
//!   crossing extraction, Minkowski content and moments, power-law exponent
//!   fits, and reproducible persisted campaigns.

pub mod bounds;
pub mod geometry;
pub mod loewner;
pub mod mc;

pub use geometry::SleParams;
pub use loewner::{EngineConfig, Trace, WholePlaneConfig};
