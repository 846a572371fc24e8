//! The shifted power law over normalized residuals.
//!
//! The law links a symmetric threshold `sigma >= 0` to its violation rate
//! `delta = P(|sigma-bar| > sigma)` through `|sigma| = a * (delta^k - 1)`
//! with scale `a > 0` and decay exponent `k < 0`. Inverting gives
//! `delta(sigma) = (1 + |sigma|/a)^(1/k)`, from which the CDF, density and
//! quantile follow in closed form. The density tail decays like
//! `|sigma|^(1/k - 1)`, so more negative `k` means a heavier tail.

use rand::distr::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Open01;

use super::LawError;
use crate::num::{c, Real};

/// Probabilities are floored here before `ln` so extreme-tail quantiles
/// evaluate without hitting `ln(0)`.
const QUANTILE_PROB_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPowerLaw<F> {
    a: F,
    k: F,
}

impl<F: Real> ShiftedPowerLaw<F> {
    /// Validates `a > 0` and `k < 0` (both finite).
    pub fn new(a: F, k: F) -> Result<Self, LawError> {
        if !(a > F::zero()) || !a.is_finite() {
            return Err(LawError::ScaleNotPositive {
                a: a.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !(k < F::zero()) || !k.is_finite() {
            return Err(LawError::ExponentNotNegative {
                k: k.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { a, k })
    }

    pub fn scale(&self) -> F {
        self.a
    }

    pub fn exponent(&self) -> F {
        self.k
    }

    /// Exponent of the density tail, `1/k - 1`.
    pub fn tail_exponent(&self) -> F {
        self.k.recip() - F::one()
    }

    /// Density `-1/(2ak) * (1 + |sigma|/a)^(1/k - 1)`.
    pub fn pdf(&self, sigma: F) -> F {
        let coeff = -(c::<F>(2.0) * self.a * self.k).recip();
        coeff * (F::one() + sigma.abs() / self.a).powf(self.k.recip() - F::one())
    }

    /// Analytic `ln` of the density; finite for every finite `sigma`.
    pub fn log_pdf(&self, sigma: F) -> F {
        let coeff = -(c::<F>(2.0) * self.a * self.k).recip();
        coeff.ln() + (self.k.recip() - F::one()) * (sigma.abs() / self.a).ln_1p()
    }

    /// Piecewise CDF; `F(0) = 1/2`, limits 0 and 1 at -/+ infinity.
    pub fn cdf(&self, sigma: F) -> F {
        let half = c::<F>(0.5);
        if sigma >= F::zero() {
            F::one() - half * (F::one() + sigma / self.a).powf(self.k.recip())
        } else {
            half * (F::one() - sigma / self.a).powf(self.k.recip())
        }
    }

    /// Violation rate `delta(sigma) = P(|sigma-bar| > |sigma|)`.
    ///
    /// Equals `(1 + |sigma|/a)^(1/k)`; 1 at zero and strictly decreasing
    /// in `|sigma|`.
    pub fn violation_rate(&self, sigma: F) -> F {
        (F::one() + sigma.abs() / self.a).powf(self.k.recip())
    }

    /// Exact inverse of [`Self::cdf`] on `p` in (0, 1).
    pub fn quantile(&self, p: F) -> Result<F, LawError> {
        if !(p > F::zero() && p < F::one()) {
            return Err(LawError::ProbabilityOutOfRange {
                p: p.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: F) -> F {
        let half = c::<F>(0.5);
        if p >= half {
            self.a * (self.doubled_pow(F::one() - p) - F::one())
        } else {
            -(self.a * (self.doubled_pow(p) - F::one()))
        }
    }

    /// `(2q)^k` via `exp(k ln(2q))` with the probability floored, so the
    /// extreme tails stay finite.
    fn doubled_pow(&self, q: F) -> F {
        let q = q.max(c(QUANTILE_PROB_FLOOR));
        (self.k * (c::<F>(2.0) * q).ln()).exp()
    }

    /// Inverse-transform draw from one uniform variate in (0, 1).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F
    where
        Open01: Distribution<F>,
    {
        self.quantile_unchecked(rng.sample(Open01))
    }

    /// Seeded batch sampling with optional rejection truncation.
    pub fn sample_n(&self, seed: u64, n: usize, truncation: Option<F>) -> Vec<F>
    where
        Open01: Distribution<F>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| loop {
                let x = self.sample(&mut rng);
                match truncation {
                    Some(bound) if x.abs() > bound => continue,
                    _ => break x,
                }
            })
            .collect()
    }
}
