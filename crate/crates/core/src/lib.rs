//! Calibration and evaluation of low-cost particulate-matter sensors against
//! collocated reference monitors.
//!
//! The crate is generic over the floating-point type through [`Real`]; the
//! aliases at the crate root fix it to `f64`, which is what the accuracy
//! guarantees in the module docs refer to.

pub mod calibrate;
pub mod cleanse;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod optics;
pub mod scalar;
pub mod statcore;
pub mod synthgen;
pub mod timeseries;

pub use calibrate::ModelKind;
pub use error::{Error, Result};
pub use scalar::Real;
pub use timeseries::{Channel, Timestamp};

pub type Sample = timeseries::Sample<f64>;
pub type Series = timeseries::Series<f64>;
pub type CollocatedPairs = timeseries::CollocatedPairs<f64>;
pub type SizeDistribution = optics::SizeDistribution<f64>;
pub type AerosolAssumptions = optics::AerosolAssumptions<f64>;
pub type OpticalGeometry = optics::OpticalGeometry<f64>;
pub type BinCounts = optics::BinCounts<f64>;
pub type TruthScenario = synthgen::TruthScenario<f64>;
pub type SensorProfile = synthgen::SensorProfile<f64>;
pub type FogEvent = synthgen::FogEvent<f64>;
pub type CleanseConfig = cleanse::CleanseConfig<f64>;
pub type RatioWindowState = cleanse::RatioWindowState<f64>;
pub type FittedModel = calibrate::FittedModel<f64>;
pub type EvaluationReport = evaluate::EvaluationReport<f64>;
pub type SampleStats = statcore::SampleStats<f64>;
