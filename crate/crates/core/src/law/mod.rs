//! Residual laws: the shifted power law and the standardized baselines.
//!
//! A residual law describes the distribution of the normalized acceleration
//! residual sigma-bar. All laws here are symmetric around zero and have unit
//! "natural" scale: the standard Gaussian, the standardized Laplace, the
//! standardized Student-t (unit variance), and the shifted power law with
//! scale `a` and decay exponent `k`.

mod baseline;
mod spl;

pub use baseline::BaselineLaw;
pub use spl::ShiftedPowerLaw;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use thiserror::Error;

use crate::num::Real;

/// Parameter validation failures for residual laws.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LawError {
    #[error("scale parameter must be strictly positive and finite, got {a}")]
    ScaleNotPositive { a: f64 },
    #[error("decay exponent must be strictly negative and finite, got {k}")]
    ExponentNotNegative { k: f64 },
    #[error(
        "student-t degrees of freedom must be >= 3 for unit-variance standardization, got {nu}"
    )]
    DofTooSmall { nu: u32 },
    #[error("truncation bound must be strictly positive and finite, got {bound}")]
    TruncationNotPositive { bound: f64 },
    #[error("probability must lie strictly inside (0, 1), got {p}")]
    ProbabilityOutOfRange { p: f64 },
}

/// A residual law plus an optional symmetric truncation bound.
///
/// The bound only constrains *sampling* (rejection resampling until
/// `|sigma| <= bound`, preserving the within-bound shape); densities, CDFs
/// and tail masses are always those of the untruncated law. Fitting and
/// metrics use no bound; the simulator defaults to a bound of 50 to keep
/// sampled accelerations physically plausible.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualLaw<F> {
    kind: LawKind<F>,
    truncation: Option<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LawKind<F> {
    ShiftedPowerLaw(ShiftedPowerLaw<F>),
    Baseline(BaselineLaw),
}

impl<F: Real> ResidualLaw<F> {
    pub fn shifted_power_law(a: F, k: F) -> Result<Self, LawError> {
        Ok(Self::from_kind(LawKind::ShiftedPowerLaw(
            ShiftedPowerLaw::new(a, k)?,
        )))
    }

    pub fn gaussian() -> Self {
        Self::from_kind(LawKind::Baseline(BaselineLaw::gaussian()))
    }

    pub fn laplace() -> Self {
        Self::from_kind(LawKind::Baseline(BaselineLaw::laplace()))
    }

    pub fn student_t(nu: u32) -> Result<Self, LawError> {
        Ok(Self::from_kind(LawKind::Baseline(BaselineLaw::student_t(
            nu,
        )?)))
    }

    pub fn from_kind(kind: LawKind<F>) -> Self {
        Self {
            kind,
            truncation: None,
        }
    }

    /// Attaches a sampling truncation bound.
    pub fn with_truncation(mut self, bound: F) -> Result<Self, LawError> {
        if !(bound > F::zero()) || !bound.is_finite() {
            return Err(LawError::TruncationNotPositive {
                bound: bound.to_f64().unwrap_or(f64::NAN),
            });
        }
        self.truncation = Some(bound);
        Ok(self)
    }

    pub fn kind(&self) -> &LawKind<F> {
        &self.kind
    }

    pub fn truncation(&self) -> Option<F> {
        self.truncation
    }

    pub fn pdf(&self, sigma: F) -> F {
        match &self.kind {
            LawKind::ShiftedPowerLaw(law) => law.pdf(sigma),
            LawKind::Baseline(law) => law.pdf(sigma),
        }
    }

    /// Natural log of the density, evaluated analytically.
    ///
    /// `pdf(sigma).ln()` underflows to `-inf` deep in thin tails (a Gaussian
    /// density is zero in `f64` beyond |sigma| ~ 38.6); the analytic form
    /// stays finite and is what the integral metrics need.
    pub fn log_pdf(&self, sigma: F) -> F {
        match &self.kind {
            LawKind::ShiftedPowerLaw(law) => law.log_pdf(sigma),
            LawKind::Baseline(law) => law.log_pdf(sigma),
        }
    }

    pub fn cdf(&self, sigma: F) -> F {
        match &self.kind {
            LawKind::ShiftedPowerLaw(law) => law.cdf(sigma),
            LawKind::Baseline(law) => law.cdf(sigma),
        }
    }

    /// P(|sigma-bar| > s) for `s >= 0`, from the closed-form tails.
    pub fn tail_mass(&self, s: F) -> F {
        match &self.kind {
            LawKind::ShiftedPowerLaw(law) => law.violation_rate(s),
            LawKind::Baseline(law) => law.tail_mass(s),
        }
    }

    /// Draws one value, rejection-resampling against the truncation bound.
    ///
    /// Each rejected draw consumes RNG state in a fixed order, so sequences
    /// are reproducible for a given seed.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F
    where
        StandardNormal: Distribution<F>,
        Exp1: Distribution<F>,
        Open01: Distribution<F>,
    {
        loop {
            let x = match &self.kind {
                LawKind::ShiftedPowerLaw(law) => law.sample(rng),
                LawKind::Baseline(law) => law.sample(rng),
            };
            match self.truncation {
                Some(bound) if x.abs() > bound => continue,
                _ => return x,
            }
        }
    }

    /// Human-readable tag used in reports and CSV rows.
    pub fn label(&self) -> String {
        let base = match &self.kind {
            LawKind::ShiftedPowerLaw(law) => format!("spl(a={},k={})", law.scale(), law.exponent()),
            LawKind::Baseline(BaselineLaw::Gaussian) => "gaussian".to_string(),
            LawKind::Baseline(BaselineLaw::Laplace) => "laplace".to_string(),
            LawKind::Baseline(BaselineLaw::StudentT { nu }) => format!("student-t({nu})"),
        };
        match self.truncation {
            Some(b) => format!("{base}|trunc={b}"),
            None => base,
        }
    }
}
