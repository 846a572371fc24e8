//! Crash-rate hypothesis testing against a real-world baseline.
//!
//! Rates are per mile internally; reports display per million VMT. With a
//! baseline rate `p`, `n` observed crashes over `m` miles the statistic is
//! `z = (n/m - p) / sqrt(p (1 - p) / m)`, rejected two-sided at 95% when
//! `|z| > 1.96`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{c, Real};

/// Two-sided 95% critical value of the standard normal.
pub const Z_CRITICAL_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZtestError {
    #[error("baseline rate must lie strictly inside (0, 1) crashes per mile, got {p}")]
    BaselineOutOfRange { p: f64 },
    #[error("exposure must be strictly positive miles, got {miles}")]
    ExposureNotPositive { miles: f64 },
}

/// Outcome of one crash-rate Z-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTest<F> {
    /// Baseline rate, crashes per mile.
    pub baseline_per_mile: F,
    /// Observed crash count.
    pub crashes: u64,
    /// Exposure in miles.
    pub miles: F,
    /// Observed rate, crashes per mile.
    pub observed_per_mile: F,
    /// Observed rate, crashes per million VMT (display convention).
    pub observed_per_million_vmt: F,
    pub z: F,
    /// `|z| > 1.96`.
    pub reject: bool,
}

pub fn crash_rate_z_test<F: Real>(
    baseline_per_mile: F,
    crashes: u64,
    miles: F,
) -> Result<RateTest<F>, ZtestError> {
    if !(baseline_per_mile > F::zero() && baseline_per_mile < F::one()) {
        return Err(ZtestError::BaselineOutOfRange {
            p: baseline_per_mile.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(miles > F::zero()) || !miles.is_finite() {
        return Err(ZtestError::ExposureNotPositive {
            miles: miles.to_f64().unwrap_or(f64::NAN),
        });
    }
    let observed = c::<F>(crashes as f64) / miles;
    let std_err = (baseline_per_mile * (F::one() - baseline_per_mile) / miles).sqrt();
    let z = (observed - baseline_per_mile) / std_err;
    Ok(RateTest {
        baseline_per_mile,
        crashes,
        miles,
        observed_per_mile: observed,
        observed_per_million_vmt: observed * c(1e6),
        z,
        reject: z.abs() > c(Z_CRITICAL_95),
    })
}
