//! Link-level simulation of MIMO links under separately correlated Rician
//! fading with co-channel interference, sector antenna patterns and a
//! frequency-reuse site layout.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below pin the common double-precision instantiations.

pub mod antenna;
pub mod channel;
pub mod matrixkit;
pub mod network;
pub mod scalar;
pub mod simulator;

pub use scalar::Real;

pub type ComplexMatrix64 = matrixkit::ComplexMatrix<f64>;
pub type ComplexMatrix32 = matrixkit::ComplexMatrix<f32>;
pub type HermitianPsd64 = matrixkit::HermitianPsd<f64>;
pub type HermitianPsd32 = matrixkit::HermitianPsd<f32>;
pub type ChannelSpec64 = channel::ChannelSpec<f64>;
pub type ChannelSpec32 = channel::ChannelSpec<f32>;
pub type NormalizedChannelSpec64 = channel::NormalizedChannelSpec<f64>;
pub type AntennaPattern64 = antenna::AntennaPattern<f64>;
pub type AntennaPattern32 = antenna::AntennaPattern<f32>;
pub type PathLossModel64 = network::PathLossModel<f64>;
pub type AggregateInterferer64 = channel::AggregateInterferer<f64>;
pub type BerCurve = simulator::BerCurve;
pub type SimConfig = simulator::SimConfig;
