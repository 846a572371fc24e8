//! Heavy-tailed driving-behavior modeling and crash-rate simulation.
//!
//! The crate covers the full pipeline for studying stochastic driving
//! behavior through normalized acceleration residuals:
//!
//! 1. [`traj`] — parse trajectory tables from dataset CSV exports and build
//!    fixed-length state windows (ego plus up to eight neighbors).
//! 2. [`predict`] — a pluggable mean/std acceleration predictor with a
//!    deterministic linear reference implementation, residual
//!    normalization, and residual-set export.
//! 3. [`law`] — the shifted power law over residuals (density, CDF,
//!    quantile, violation rate, sampling) plus standardized Gaussian,
//!    Laplace and Student-t baselines.
//! 4. [`fit`] — empirical violation curves and log-log fitting of the
//!    shifted power law (free-scale and fixed-scale modes, Risk Index).
//! 5. [`metrics`] — tail ratio (RP5), integral log-likelihood and KL
//!    divergence against histogram densities.
//! 6. [`sim`] — forward-rolling agent-based traffic simulation with
//!    collision detection, crash typing and VMT accounting.
//! 7. [`ztest`] — crash-rate Z-test against real-world baselines.
//!
//! The math core ([`law`], [`fit`], [`metrics`], [`ztest`]) is generic over
//! the scalar type via [`num::Real`]; the aliases below pin everything to
//! `f64`, which is what the data pipeline and the CLI use.

// `!(x > zero)` guards are deliberate: they treat NaN as invalid input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fit;
pub mod law;
pub mod metrics;
pub mod num;
pub mod predict;
pub mod sim;
pub mod traj;
pub mod ztest;

/// `f64` shifted power law.
pub type ShiftedPowerLaw = law::ShiftedPowerLaw<f64>;
/// `f64` residual law (shifted power law or baseline, optional truncation).
pub type ResidualLaw = law::ResidualLaw<f64>;
/// Baseline law tag (scalar-independent).
pub type BaselineLaw = law::BaselineLaw;
/// `f64` empirical violation curve.
pub type ViolationCurve = fit::ViolationCurve<f64>;
/// `f64` fit result.
pub type FitResult = fit::FitResult<f64>;
/// `f64` histogram density estimate.
pub type EmpiricalDensity = metrics::EmpiricalDensity<f64>;
/// `f64` metric report row.
pub type MetricReport = metrics::MetricReport<f64>;
/// `f64` crash-rate test outcome.
pub type RateTest = ztest::RateTest<f64>;
