//! Simulator for a Mach-Zehnder interferometer whose output beam splitter is
//! switched while a long single-photon wave packet is passing through it.
//!
//! The part of the packet that arrives before the switch sees a closed
//! interferometer and shows a fringe in the arm phase `phi`; the part after it
//! sees an open interferometer and gives which-path statistics. The crate
//! provides both the closed-form predictions and a seeded photon-counting Monte
//! Carlo, along with the estimators (visibility, distinguishability, mixing
//! angle, heralded `g2`) used to compare them.
//!
//! Numerical types are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix them to `f64`.

// `!(x > 0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod montecarlo;
pub mod optics;
pub mod scalar;
pub mod source;
pub mod state;

pub use error::{Error, Result};
pub use scalar::Real;

pub use analysis::{
    distinguishability, eg_check, estimate_alpha, visibility_from_fringe, AnalysisSummary, EgCheck, FringePoint,
};
pub use montecarlo::{
    blocked_arm_counts, click_counts, histogram, run_trials, windowed_counts, ClickCounts, Detector, WindowCounts,
};
pub use optics::{analytic_intensity, analytic_state, eom_retardance, hwp_matrix, propagate, Arm, StateKind};
pub use source::{
    cauchy_schwarz_factor, g2_conditional, sample_detection_time, simulate_heralded_hbt, solve_decay_constant,
    CorrelationReport, HeraldCounts, SourceStats,
};

pub type TimeGrid = state::TimeGrid<f64>;
pub type PathAmplitudes = state::PathAmplitudes<f64>;
pub type WavepacketState = state::WavepacketState<f64>;
pub type JonesMatrix = optics::JonesMatrix<f64>;
pub type EomSchedule = optics::EomSchedule<f64>;
pub type PreparationParams = optics::PreparationParams<f64>;
pub type InterferometerConfig = optics::InterferometerConfig<f64>;
pub type Propagator = optics::Propagator<f64>;
pub type EnvelopeModel = source::EnvelopeModel<f64>;
pub type RunConfig = montecarlo::RunConfig<f64>;
pub type DetectionRecord = montecarlo::DetectionRecord<f64>;
pub type Histogram = montecarlo::Histogram<f64>;
pub type FringeScan = analysis::FringeScan<f64>;
pub type Estimate = analysis::Estimate<f64>;
pub type AnalysisResult = analysis::AnalysisResult<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type WavepacketState = crate::state::WavepacketState<f32>;
    pub type PreparationParams = crate::optics::PreparationParams<f32>;
    pub type InterferometerConfig = crate::optics::InterferometerConfig<f32>;
    pub type EnvelopeModel = crate::source::EnvelopeModel<f32>;
    pub type RunConfig = crate::montecarlo::RunConfig<f32>;
}
