//! Mean/std acceleration prediction and residual normalization.
//!
//! A predictor handle maps a state window to a `(mean, std)` acceleration
//! prediction. The deterministic reference predictor makes the whole
//! pipeline runnable without any learned model: a linear gap-and-speed
//! rule for the longitudinal direction, a proportional lateral-velocity
//! damping rule for the lateral one, with the predicted std taken from
//! speed-binned residual spread. Handles load and save as versioned JSON,
//! so externally trained predictors can plug in through the same file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traj::{Direction, NeighborSlot, StateWindow};

/// Default std floor applied before dividing by the predicted std.
pub const DEFAULT_EPSILON: f64 = 1e-6;
/// Number of speed bins the reference predictor uses for its std model.
pub const STD_BINS: usize = 10;
/// Current predictor parameter file version.
pub const PREDICTOR_FILE_VERSION: u32 = 1;
/// Default linear-gap gains: relative-speed gain (1/s), gap gain (1/s^2),
/// desired time headway (s).
pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_TAU: f64 = 1.5;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("window direction {window} does not match predictor direction {handle}")]
    DirectionMismatch { handle: String, window: String },
    #[error("need at least {needed} windows to fit the reference predictor, got {got}")]
    TooFewWindows { needed: usize, got: usize },
    #[error("reference fit is degenerate: {message}")]
    DegenerateFit { message: String },
    #[error("unsupported predictor file version {found} (expected {expected})")]
    BadVersion { found: u32, expected: u32 },
    #[error("residual file row {row}: {message}")]
    BadResidualFile { row: usize, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One-step prediction: mean and non-negative std of the next
/// acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
}

impl Prediction {
    /// Clamps a negative std to zero; the floor happens at normalization.
    pub fn new(mean: f64, std: f64) -> Self {
        Prediction {
            mean,
            std: std.max(0.0),
        }
    }
}

/// Normalized residual `(y - mean) / max(std, epsilon)`.
pub fn normalize_residual(observed: f64, p: &Prediction, epsilon: f64) -> f64 {
    (observed - p.mean) / p.std.max(epsilon)
}

/// Reconstruction `mean + std * sigma`, the inverse of
/// [`normalize_residual`] whenever `std >= epsilon`.
pub fn reconstruct(p: &Prediction, sigma: f64) -> f64 {
    p.mean + p.std * sigma
}

/// The prediction rule families a handle can carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Rule {
    /// `mean = alpha (v_lead - v_ego) + beta (gap - v_ego tau)`, zero with
    /// no leader.
    LinearGap { alpha: f64, beta: f64, tau: f64 },
    /// `mean = -gain * vy_ego`: proportional pull of the lateral velocity
    /// back to zero (state windows carry no lateral offset, so the pull
    /// acts on velocity rather than position).
    LateralDamping { gain: f64 },
    /// Fixed output regardless of the window; for baselines and tests.
    Constant { mean: f64, std: f64 },
}

/// Piecewise-constant std over ego-speed bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdBins {
    /// `len = bins + 1`, strictly increasing.
    pub edges: Vec<f64>,
    pub stds: Vec<f64>,
    /// Used outside the edge range or for bins that had too little data.
    pub fallback: f64,
}

impl StdBins {
    pub fn constant(std: f64) -> Self {
        StdBins {
            edges: vec![0.0, 1.0],
            stds: vec![std],
            fallback: std,
        }
    }

    pub fn lookup(&self, speed: f64) -> f64 {
        if self.edges.len() < 2 || speed < self.edges[0] || speed > *self.edges.last().unwrap() {
            return self.fallback;
        }
        let idx = self
            .edges
            .partition_point(|e| *e <= speed)
            .saturating_sub(1)
            .min(self.stds.len() - 1);
        self.stds[idx]
    }
}

/// A deterministic (window -> prediction) map plus its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorHandle {
    pub version: u32,
    pub name: String,
    pub direction: Direction,
    pub dt: f64,
    pub t_steps: usize,
    pub rule: Rule,
    pub std_bins: StdBins,
}

impl PredictorHandle {
    /// Longitudinal reference predictor with the default gains and a
    /// constant predicted std; usable without any fitting step.
    pub fn reference_longitudinal(dt: f64, t_steps: usize, std: f64) -> Self {
        PredictorHandle {
            version: PREDICTOR_FILE_VERSION,
            name: "reference-linear".to_string(),
            direction: Direction::Longitudinal,
            dt,
            t_steps,
            rule: Rule::LinearGap {
                alpha: DEFAULT_ALPHA,
                beta: DEFAULT_BETA,
                tau: DEFAULT_TAU,
            },
            std_bins: StdBins::constant(std),
        }
    }

    pub fn predict(&self, window: &StateWindow) -> Result<Prediction, PredictError> {
        if window.direction != self.direction {
            return Err(PredictError::DirectionMismatch {
                handle: self.direction.as_str().to_string(),
                window: window.direction.as_str().to_string(),
            });
        }
        Ok(self.predict_unchecked(window))
    }

    /// Prediction without the direction guard; the simulator builds its
    /// windows to match by construction.
    pub fn predict_unchecked(&self, window: &StateWindow) -> Prediction {
        let ego = window.last_ego();
        let mean = match &self.rule {
            Rule::LinearGap { alpha, beta, tau } => {
                let lead = window.neighbor(NeighborSlot::Preceding);
                if lead.present {
                    let step = lead.steps.last().expect("non-empty track");
                    alpha * (step.vx - ego.vx) + beta * (step.dist - ego.vx * tau)
                } else {
                    0.0
                }
            }
            Rule::LateralDamping { gain } => -gain * ego.vy,
            Rule::Constant { mean, .. } => *mean,
        };
        let std = match &self.rule {
            Rule::Constant { std, .. } => *std,
            _ => self.std_bins.lookup(ego.vx),
        };
        Prediction::new(mean, std)
    }

    pub fn save(&self, path: &Path) -> Result<(), PredictError> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PredictError> {
        let text = std::fs::read_to_string(path)?;
        let handle: PredictorHandle = serde_json::from_str(&text)?;
        if handle.version != PREDICTOR_FILE_VERSION {
            return Err(PredictError::BadVersion {
                found: handle.version,
                expected: PREDICTOR_FILE_VERSION,
            });
        }
        Ok(handle)
    }
}

/// Fits the reference predictor to windows of one direction.
///
/// Longitudinal: least squares of the observed next-step acceleration on
/// `(v_lead - v_ego, gap, v_ego)` over windows that have a leader, mapped
/// back to `(alpha, beta, tau)`. Lateral: one-dimensional least squares of
/// the damping gain. The std model is the per-speed-bin standard deviation
/// of the in-sample residuals. Everything is plain arithmetic over the
/// window sequence, so refits on identical input are identical.
pub fn fit_reference_predictor(
    windows: &[StateWindow],
    dt: f64,
) -> Result<PredictorHandle, PredictError> {
    if windows.len() < 100 {
        return Err(PredictError::TooFewWindows {
            needed: 100,
            got: windows.len(),
        });
    }
    let direction = windows[0].direction;
    let t_steps = windows[0].t_steps();

    // the linear gap rule only models windows that have a leader; both the
    // regression and the std bins are scoped to those
    let modeled: Vec<&StateWindow> = match direction {
        Direction::Longitudinal => windows
            .iter()
            .filter(|w| w.neighbor(NeighborSlot::Preceding).present)
            .collect(),
        Direction::Lateral => windows.iter().collect(),
    };
    let rule = match direction {
        Direction::Longitudinal => fit_linear_gap(&modeled)?,
        Direction::Lateral => fit_lateral_damping(&modeled)?,
    };

    // in-sample residuals, then std per ego-speed bin
    let probe = PredictorHandle {
        version: PREDICTOR_FILE_VERSION,
        name: String::new(),
        direction,
        dt,
        t_steps,
        rule: rule.clone(),
        std_bins: StdBins::constant(0.0),
    };
    let residuals: Vec<(f64, f64)> = modeled
        .iter()
        .map(|w| {
            let p = probe.predict_unchecked(w);
            (w.last_ego().vx, w.target - p.mean)
        })
        .collect();
    let std_bins = bin_residual_std(&residuals);

    Ok(PredictorHandle {
        version: PREDICTOR_FILE_VERSION,
        name: match direction {
            Direction::Longitudinal => "reference-linear".to_string(),
            Direction::Lateral => "reference-lateral".to_string(),
        },
        direction,
        dt,
        t_steps,
        rule,
        std_bins,
    })
}

fn fit_linear_gap(windows: &[&StateWindow]) -> Result<Rule, PredictError> {
    // regress target on f = (dv, gap, v_ego): target = c0 dv + c1 gap + c2 v
    let mut xtx = [[0.0f64; 3]; 3];
    let mut xty = [0.0f64; 3];
    if windows.len() < 10 {
        return Err(PredictError::DegenerateFit {
            message: format!("only {} windows have a leader", windows.len()),
        });
    }
    for w in windows {
        let lead = w.neighbor(NeighborSlot::Preceding);
        let ego = w.last_ego();
        let step = lead.steps.last().expect("non-empty track");
        let f = [step.vx - ego.vx, step.dist, ego.vx];
        for i in 0..3 {
            for j in 0..3 {
                xtx[i][j] += f[i] * f[j];
            }
            xty[i] += f[i] * w.target;
        }
    }
    let coef = solve3(xtx, xty).ok_or_else(|| PredictError::DegenerateFit {
        message: "singular normal equations".to_string(),
    })?;
    let (alpha, beta, c2) = (coef[0], coef[1], coef[2]);
    if beta.abs() < 1e-12 {
        return Err(PredictError::DegenerateFit {
            message: "gap coefficient vanished".to_string(),
        });
    }
    Ok(Rule::LinearGap {
        alpha,
        beta,
        tau: -c2 / beta,
    })
}

fn fit_lateral_damping(windows: &[&StateWindow]) -> Result<Rule, PredictError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for w in windows {
        let vy = w.last_ego().vy;
        num += w.target * vy;
        den += vy * vy;
    }
    if den < 1e-12 {
        // no lateral motion at all: a zero-gain rule predicts zero
        return Ok(Rule::LateralDamping { gain: 0.0 });
    }
    Ok(Rule::LateralDamping { gain: -num / den })
}

/// Gaussian elimination with partial pivoting for the 3x3 normal
/// equations.
#[allow(clippy::needless_range_loop)] // updates two rows of `a` in place
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite")
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for rowi in col + 1..3 {
            let factor = a[rowi][col] / a[col][col];
            for k in col..3 {
                a[rowi][k] -= factor * a[col][k];
            }
            b[rowi] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut acc = b[i];
        for j in i + 1..3 {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Some(x)
}

fn bin_residual_std(samples: &[(f64, f64)]) -> StdBins {
    let n = samples.len() as f64;
    let global_var = samples.iter().map(|(_, r)| r * r).sum::<f64>() / n
        - (samples.iter().map(|(_, r)| r).sum::<f64>() / n).powi(2);
    let fallback = global_var.max(0.0).sqrt();

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (v, _) in samples {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    if !(hi > lo) {
        return StdBins::constant(fallback);
    }
    let width = (hi - lo) / STD_BINS as f64;
    let mut count = [0usize; STD_BINS];
    let mut sum = [0.0f64; STD_BINS];
    let mut sum2 = [0.0f64; STD_BINS];
    for (v, r) in samples {
        let idx = (((v - lo) / width) as usize).min(STD_BINS - 1);
        count[idx] += 1;
        sum[idx] += r;
        sum2[idx] += r * r;
    }
    let stds = (0..STD_BINS)
        .map(|i| {
            if count[i] < 2 {
                fallback
            } else {
                let m = sum[i] / count[i] as f64;
                (sum2[i] / count[i] as f64 - m * m).max(0.0).sqrt()
            }
        })
        .collect();
    StdBins {
        edges: (0..=STD_BINS).map(|i| lo + width * i as f64).collect(),
        stds,
        fallback,
    }
}

/// Residual set provenance recorded next to the values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: String,
    pub direction: Direction,
    pub dt: f64,
    pub predictor: String,
    pub epsilon: f64,
    pub n: usize,
}

/// Normalized residuals plus where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl ResidualSet {
    /// One-column CSV (`sigma` header), full round-trip float formatting.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["sigma"])?;
        for v in &self.values {
            w.write_record([v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(
        reader: R,
        provenance: Provenance,
    ) -> Result<Self, PredictError> {
        let mut r = csv::Reader::from_reader(reader);
        let mut values = Vec::new();
        for (i, record) in r.records().enumerate() {
            let record = record.map_err(|e| PredictError::BadResidualFile {
                row: i + 1,
                message: e.to_string(),
            })?;
            let field = record.get(0).unwrap_or("");
            let value: f64 = field.parse().map_err(|_| PredictError::BadResidualFile {
                row: i + 1,
                message: format!("non-numeric residual `{field}`"),
            })?;
            values.push(value);
        }
        Ok(ResidualSet { values, provenance })
    }
}

/// Runs the predictor over windows and normalizes the residuals.
/// Non-finite residuals are dropped; the recorded count reflects that.
pub fn compute_residuals(
    handle: &PredictorHandle,
    windows: &[StateWindow],
    epsilon: f64,
    dataset: &str,
) -> Result<ResidualSet, PredictError> {
    let mut values = Vec::with_capacity(windows.len());
    for w in windows {
        let p = handle.predict(w)?;
        let sigma = normalize_residual(w.target, &p, epsilon);
        if sigma.is_finite() {
            values.push(sigma);
        }
    }
    let n = values.len();
    Ok(ResidualSet {
        values,
        provenance: Provenance {
            dataset: dataset.to_string(),
            direction: handle.direction,
            dt: handle.dt,
            predictor: handle.name.clone(),
            epsilon,
            n,
        },
    })
}

/// Multiset fingerprint used by order-independence checks.
pub fn residual_multiset(set: &ResidualSet) -> BTreeMap<u64, usize> {
    let mut map = BTreeMap::new();
    for v in &set.values {
        *map.entry(v.to_bits()).or_insert(0) += 1;
    }
    map
}
