//! Standardized baseline residual laws: Gaussian, Laplace, Student-t.
//!
//! All three have unit variance so they are directly comparable to the
//! normalized residual scale. The Laplace density is
//! `(1/sqrt(2)) exp(-sqrt(2)|x|)`; the Student-t with `nu` degrees of
//! freedom is rescaled by `sqrt((nu-2)/nu)` to unit variance, which
//! requires `nu >= 3`.

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal, StudentT};

use super::LawError;
use crate::num::{c, erfc, Real};

/// A baseline law is a pure tag; evaluation is generic in the scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineLaw {
    Gaussian,
    Laplace,
    StudentT { nu: u32 },
}

impl BaselineLaw {
    pub fn gaussian() -> Self {
        Self::Gaussian
    }

    pub fn laplace() -> Self {
        Self::Laplace
    }

    pub fn student_t(nu: u32) -> Result<Self, LawError> {
        if nu < 3 {
            return Err(LawError::DofTooSmall { nu });
        }
        Ok(Self::StudentT { nu })
    }

    pub fn pdf<F: Real>(&self, x: F) -> F {
        match self {
            Self::Gaussian => {
                let inv_sqrt_2pi = c::<F>(0.3989422804014327);
                inv_sqrt_2pi * (-x * x * c::<F>(0.5)).exp()
            }
            Self::Laplace => {
                let sqrt2 = c::<F>(std::f64::consts::SQRT_2);
                sqrt2.recip() * (-sqrt2 * x.abs()).exp()
            }
            Self::StudentT { nu } => {
                let nu_f = c::<F>(f64::from(*nu));
                let vm2 = nu_f - c(2.0);
                student_coeff::<F>(*nu) * (F::one() + x * x / vm2).powf(-(nu_f + F::one()) * c(0.5))
            }
        }
    }

    /// Analytic log density; finite wherever `x` is.
    pub fn log_pdf<F: Real>(&self, x: F) -> F {
        match self {
            Self::Gaussian => c::<F>(-0.9189385332046727) - x * x * c(0.5),
            Self::Laplace => {
                let sqrt2 = c::<F>(std::f64::consts::SQRT_2);
                -c::<F>(0.5) * c::<F>(std::f64::consts::LN_2) - sqrt2 * x.abs()
            }
            Self::StudentT { nu } => {
                let nu_f = c::<F>(f64::from(*nu));
                let vm2 = nu_f - c(2.0);
                student_coeff::<F>(*nu).ln()
                    - (nu_f + F::one()) * c::<F>(0.5) * (x * x / vm2).ln_1p()
            }
        }
    }

    pub fn cdf<F: Real>(&self, x: F) -> F {
        match self {
            Self::Gaussian => c::<F>(0.5) * erfc(-x / c::<F>(std::f64::consts::SQRT_2)),
            Self::Laplace => {
                let sqrt2 = c::<F>(std::f64::consts::SQRT_2);
                let half = c::<F>(0.5);
                if x < F::zero() {
                    half * (sqrt2 * x).exp()
                } else {
                    F::one() - half * (-sqrt2 * x).exp()
                }
            }
            Self::StudentT { nu } => {
                let half = c::<F>(0.5);
                let two_tail = student_two_sided(self.to_standard_t(x.abs()), *nu);
                if x < F::zero() {
                    half * (F::one() - two_tail)
                } else {
                    half * (F::one() + two_tail)
                }
            }
        }
    }

    /// P(|X| > s) for `s >= 0`, with full relative accuracy in the tail.
    pub fn tail_mass<F: Real>(&self, s: F) -> F {
        let s = s.abs();
        match self {
            Self::Gaussian => erfc(s / c::<F>(std::f64::consts::SQRT_2)),
            Self::Laplace => (-c::<F>(std::f64::consts::SQRT_2) * s).exp(),
            Self::StudentT { nu } => F::one() - student_two_sided(self.to_standard_t(s), *nu),
        }
    }

    pub fn sample<F, R>(&self, rng: &mut R) -> F
    where
        F: Real,
        R: Rng + ?Sized,
        StandardNormal: Distribution<F>,
        Exp1: Distribution<F>,
        Open01: Distribution<F>,
    {
        match self {
            Self::Gaussian => rng.sample(StandardNormal),
            Self::Laplace => {
                // inverse transform of the standardized Laplace
                let u: F = rng.sample(Open01);
                let sqrt2 = c::<F>(std::f64::consts::SQRT_2);
                let half = c::<F>(0.5);
                if u < half {
                    (c::<F>(2.0) * u).ln() / sqrt2
                } else {
                    -((c::<F>(2.0) * (F::one() - u)).ln()) / sqrt2
                }
            }
            Self::StudentT { nu } => {
                let nu_f = c::<F>(f64::from(*nu));
                let t: F = rng.sample(StudentT::new(nu_f).expect("nu >= 3"));
                t * ((nu_f - c(2.0)) / nu_f).sqrt()
            }
        }
    }

    /// Maps a unit-variance coordinate onto the standard t scale.
    fn to_standard_t<F: Real>(self, x: F) -> F {
        match self {
            Self::StudentT { nu } => {
                let nu_f = c::<F>(f64::from(nu));
                x * (nu_f / (nu_f - c(2.0))).sqrt()
            }
            _ => x,
        }
    }
}

/// Normalization coefficient of the unit-variance Student-t density,
/// `Gamma((nu+1)/2) / (sqrt((nu-2) pi) Gamma(nu/2))`.
///
/// The gamma ratio is computed by the half-integer recurrence
/// `r(m) = ((m-1)/2) / r(m-1)` with `r(1) = 1/sqrt(pi)`, avoiding any
/// gamma-function evaluation.
fn student_coeff<F: Real>(nu: u32) -> F {
    let mut r = c::<F>(std::f64::consts::PI).sqrt().recip();
    for m in 2..=nu {
        r = (c::<F>(f64::from(m) - 1.0) * c::<F>(0.5)) / r;
    }
    let vm2 = c::<F>(f64::from(nu)) - c(2.0);
    r / (vm2 * c::<F>(std::f64::consts::PI)).sqrt()
}

/// Two-sided probability `P(|T| <= t)` of the standard Student-t with
/// integer degrees of freedom, via the classic trigonometric series
/// (finite, exact up to rounding for every integer `nu >= 1`).
fn student_two_sided<F: Real>(t: F, nu: u32) -> F {
    let theta = (t / c::<F>(f64::from(nu)).sqrt()).atan();
    let (sin_t, cos_t) = (theta.sin(), theta.cos());
    let cos2 = cos_t * cos_t;
    if nu % 2 == 1 {
        // odd: (2/pi) (theta + sin * sum c_i cos^(2i+1)), c_i = c_{i-1} * 2i/(2i+1)
        let mut sum = F::zero();
        let mut term = cos_t;
        let mut coef = F::one();
        let mut i = 0u32;
        while 2 * i < nu.saturating_sub(2) {
            sum = sum + coef * term;
            i += 1;
            coef = coef * c::<F>(f64::from(2 * i)) / c::<F>(f64::from(2 * i + 1));
            term = term * cos2;
        }
        c::<F>(std::f64::consts::FRAC_2_PI) * (theta + sin_t * sum)
    } else {
        // even: sin * sum d_i cos^(2i), d_i = d_{i-1} * (2i-1)/(2i)
        let mut sum = F::zero();
        let mut term = F::one();
        let mut coef = F::one();
        let mut i = 0u32;
        while 2 * i <= nu - 2 {
            sum = sum + coef * term;
            i += 1;
            coef = coef * c::<F>(f64::from(2 * i - 1)) / c::<F>(f64::from(2 * i));
            term = term * cos2;
        }
        sin_t * sum
    }
}
