//! Distribution-versus-data evaluation metrics.
//!
//! Three complementary views of how well a residual law matches a sample:
//! the RP5 tail ratio (empirical over model probability mass on
//! `|sigma| >= 5`), the integral log-likelihood `int log f(sigma) dsigma`
//! over a symmetric domain (data-independent for a fixed domain), and the
//! KL divergence of a histogram density against the model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::law::ResidualLaw;
use crate::num::{c, Real};

/// Tail region boundary used by the RP5 ratio.
pub const RP5_THRESHOLD: f64 = 5.0;
/// Default histogram bin count.
pub const DEFAULT_BINS: usize = 401;
/// Default quadrature step of the integral log-likelihood.
pub const DEFAULT_LL_STEP: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("need at least {needed} residuals, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("histogram needs at least 2 bins, got {bins}")]
    BadBinning { bins: usize },
    #[error("integration half-domain must be strictly positive and finite, got {l}")]
    BadDomain { l: f64 },
    #[error("quadrature step must be strictly positive, got {step}")]
    BadStep { step: f64 },
}

/// Histogram binning request. `half_domain = None` uses
/// `max(10, max |residual|)` so every sample lands inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning<F> {
    pub half_domain: Option<F>,
    pub bins: usize,
}

impl<F: Real> Default for Binning<F> {
    fn default() -> Self {
        Binning {
            half_domain: None,
            bins: DEFAULT_BINS,
        }
    }
}

/// Normalized histogram density over `[-L, L]` uniform bins.
///
/// Raw counts are kept next to the densities: the RP5 tail mass comes from
/// counts, not from the histogram, so edge-bin truncation cannot bias it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity<F> {
    /// `bins + 1` strictly increasing edges.
    pub edges: Vec<F>,
    /// Per-bin density; `sum density * width = 1`.
    pub densities: Vec<F>,
    pub counts: Vec<u64>,
    pub n: usize,
    /// Count of samples with `|residual| >= 5`.
    pub tail_count_ge5: u64,
    pub max_abs: F,
}

impl<F: Real> EmpiricalDensity<F> {
    pub fn half_domain(&self) -> F {
        *self.edges.last().expect("non-empty edges")
    }

    pub fn bin_width(&self) -> F {
        self.edges[1] - self.edges[0]
    }

    pub fn bin_center(&self, i: usize) -> F {
        (self.edges[i] + self.edges[i + 1]) * c(0.5)
    }

    /// Empirical tail mass `#{|residual| >= 5} / n` from raw counts.
    pub fn tail_mass_ge5(&self) -> F {
        c::<F>(self.tail_count_ge5 as f64) / c::<F>(self.n as f64)
    }
}

/// Builds the normalized histogram of a residual sample.
///
/// Non-finite values are ignored. With an explicit `half_domain`, samples
/// beyond it are clamped into the end bins so normalization still holds.
pub fn empirical_density<F: Real>(
    residuals: &[F],
    binning: &Binning<F>,
) -> Result<EmpiricalDensity<F>, MetricsError> {
    if binning.bins < 2 {
        return Err(MetricsError::BadBinning { bins: binning.bins });
    }
    let finite: Vec<F> = residuals
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let n = finite.len();
    if n < 100 {
        return Err(MetricsError::InsufficientData {
            needed: 100,
            got: n,
        });
    }
    let max_abs = finite.iter().fold(
        F::zero(),
        |acc, v| if v.abs() > acc { v.abs() } else { acc },
    );
    let l = match binning.half_domain {
        Some(l) if l > F::zero() && l.is_finite() => l,
        Some(l) => {
            return Err(MetricsError::BadDomain {
                l: l.to_f64().unwrap_or(f64::NAN),
            })
        }
        None => max_abs.max(c(10.0)),
    };

    let bins = binning.bins;
    let width = c::<F>(2.0) * l / c::<F>(bins as f64);
    let mut counts = vec![0u64; bins];
    let mut tail = 0u64;
    for &x in &finite {
        if x.abs() >= c(RP5_THRESHOLD) {
            tail += 1;
        }
        let idx = ((x + l) / width).floor().to_f64().unwrap_or(0.0) as i64;
        let idx = idx.clamp(0, bins as i64 - 1) as usize;
        counts[idx] += 1;
    }

    let edges: Vec<F> = (0..=bins).map(|i| -l + width * c::<F>(i as f64)).collect();
    let norm = (c::<F>(n as f64) * width).recip();
    let densities = counts.iter().map(|&k| c::<F>(k as f64) * norm).collect();

    Ok(EmpiricalDensity {
        edges,
        densities,
        counts,
        n,
        tail_count_ge5: tail,
        max_abs,
    })
}

/// RP5 outcome: the ratio plus a flag for an empty empirical tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRatio<F> {
    pub value: F,
    /// Set when no sample reached `|residual| >= 5`; the ratio is then 0
    /// and should be read as "tail unobserved", not "tail overestimated".
    pub empirical_tail_empty: bool,
}

/// Ratio of empirical to model probability mass on `|sigma| >= 5`.
///
/// The model mass comes from the closed-form tail; every supported law has
/// strictly positive tail mass.
pub fn rp5<F: Real>(density: &EmpiricalDensity<F>, model: &ResidualLaw<F>) -> TailRatio<F> {
    let model_mass = model.tail_mass(c(RP5_THRESHOLD));
    let empirical = density.tail_mass_ge5();
    TailRatio {
        value: empirical / model_mass,
        empirical_tail_empty: density.tail_count_ge5 == 0,
    }
}

/// Midpoint quadrature of `log f_model` over `[-l, l]`.
///
/// There is no data term: for a fixed domain the value depends only on the
/// model, so one model scores identically against every dataset.
pub fn integral_log_likelihood<F: Real>(
    model: &ResidualLaw<F>,
    l: F,
    step: F,
) -> Result<F, MetricsError> {
    if !(l > F::zero()) || !l.is_finite() {
        return Err(MetricsError::BadDomain {
            l: l.to_f64().unwrap_or(f64::NAN),
        });
    }
    if !(step > F::zero()) {
        return Err(MetricsError::BadStep {
            step: step.to_f64().unwrap_or(f64::NAN),
        });
    }
    let cells = ((c::<F>(2.0) * l / step).ceil().to_f64().unwrap_or(2.0) as usize).max(2);
    let h = c::<F>(2.0) * l / c::<F>(cells as f64);
    let mut acc = F::zero();
    for i in 0..cells {
        let x = -l + h * (c::<F>(i as f64) + c(0.5));
        acc = acc + model.log_pdf(x);
    }
    Ok(acc * h)
}

/// KL divergence of the histogram against the model. Empty bins
/// contribute zero.
///
/// The model's per-bin mass is taken exactly from its closed-form tails,
/// which keeps the estimate non-negative for any binning (the summed model
/// mass never exceeds one, so the Gibbs bound applies). Center evaluation
/// of the density would dip visibly negative once heavy-tailed samples
/// stretch the default domain and coarsen the bins. Where a bin's mass
/// underflows to zero the analytic log density at the bin center steps in,
/// so the value stays finite even for a Gaussian scored deep in a heavy
/// tail.
pub fn kl_divergence<F: Real>(density: &EmpiricalDensity<F>, model: &ResidualLaw<F>) -> F {
    let n = c::<F>(density.n as f64);
    let ln_w = density.bin_width().ln();
    let mut acc = F::zero();
    for i in 0..density.counts.len() {
        if density.counts[i] == 0 {
            continue;
        }
        let q = c::<F>(density.counts[i] as f64) / n;
        let m = model_bin_mass(model, density.edges[i], density.edges[i + 1]);
        let ln_m = if m > F::zero() {
            m.ln()
        } else {
            model.log_pdf(density.bin_center(i)) + ln_w
        };
        acc = acc + q * (q.ln() - ln_m);
    }
    acc
}

/// Model probability mass of one bin, computed from one-sided survivals so
/// tail bins keep full relative precision.
fn model_bin_mass<F: Real>(model: &ResidualLaw<F>, lo: F, hi: F) -> F {
    let half = c::<F>(0.5);
    if lo >= F::zero() {
        half * (model.tail_mass(lo) - model.tail_mass(hi))
    } else if hi <= F::zero() {
        half * (model.tail_mass(-hi) - model.tail_mass(-lo))
    } else {
        F::one() - half * (model.tail_mass(hi) + model.tail_mass(-lo))
    }
}

/// Midpoint-rule KL against an arbitrary log-density; lets callers score a
/// histogram against its own piecewise-constant density (which is exactly
/// zero) or against reference implementations.
pub fn kl_divergence_against<F: Real>(
    density: &EmpiricalDensity<F>,
    log_pdf: impl Fn(F) -> F,
) -> F {
    let w = density.bin_width();
    let mut acc = F::zero();
    for i in 0..density.counts.len() {
        if density.counts[i] == 0 {
            continue;
        }
        let p = density.densities[i];
        acc = acc + p * w * (p.ln() - log_pdf(density.bin_center(i)));
    }
    acc
}

/// One evaluated (dataset, model) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport<F> {
    pub model: String,
    pub dataset: String,
    pub rp5: F,
    pub rp5_tail_empty: bool,
    pub log_likelihood: F,
    /// Half-width of the integration domain the log-likelihood used.
    pub domain_l: F,
    pub kl: F,
}

/// Scores one model against one residual sample.
pub fn evaluate<F: Real>(
    residuals: &[F],
    model: &ResidualLaw<F>,
    dataset: &str,
    binning: &Binning<F>,
    ll_step: F,
) -> Result<MetricReport<F>, MetricsError> {
    let density = empirical_density(residuals, binning)?;
    let l = density.half_domain();
    let tail = rp5(&density, model);
    let ll = integral_log_likelihood(model, l, ll_step)?;
    let kl = kl_divergence(&density, model);
    Ok(MetricReport {
        model: model.label(),
        dataset: dataset.to_string(),
        rp5: tail.value,
        rp5_tail_empty: tail.empirical_tail_empty,
        log_likelihood: ll,
        domain_l: l,
        kl,
    })
}

/// Long-format comparison matrix: one row per (dataset, model, metric).
pub fn write_comparison_matrix<F: Real, W: std::io::Write>(
    reports: &[MetricReport<F>],
    writer: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["dataset", "model", "metric", "value"])?;
    for r in reports {
        w.write_record([&r.dataset, &r.model, "rp5", &format!("{}", r.rp5)])?;
        w.write_record([
            &r.dataset,
            &r.model,
            "log_likelihood",
            &format!("{}", r.log_likelihood),
        ])?;
        w.write_record([&r.dataset, &r.model, "kl", &format!("{}", r.kl)])?;
    }
    w.flush()?;
    Ok(())
}
