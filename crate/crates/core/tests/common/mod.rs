//! Shared fixtures for the integration and acceptance suites.

use drivetail::predict::{PredictorHandle, Rule, StdBins, PREDICTOR_FILE_VERSION};
use drivetail::traj::{Direction, TrajRow, TrajectoryTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

/// Single-lane platoon at 5 Hz: each follower tracks its leader with the
/// linear gap rule at the given `(alpha, beta, tau)` gains; the head
/// vehicle holds a gently varying speed. Gaussian behavioral noise of the
/// given std is injected into every acceleration.
pub fn platoon_table(
    vehicles: usize,
    frames: usize,
    spacing: f64,
    speed: f64,
    noise_std: f64,
    seed: u64,
    gains: (f64, f64, f64),
) -> TrajectoryTable {
    let dt = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..vehicles).map(|i| i as f64 * spacing).collect();
    let mut vs: Vec<f64> = vec![speed; vehicles];
    let mut accs: Vec<f64> = vec![0.0; vehicles];
    let mut rows = Vec::with_capacity(vehicles * frames);
    for f in 0..frames {
        for i in 0..vehicles {
            rows.push(TrajRow {
                frame: f as i64,
                id: i as u64,
                x: xs[i],
                y: 0.0,
                vx: vs[i],
                vy: 0.0,
                ax: accs[i],
                ay: 0.0,
                lane: 1,
                length: 4.5,
                width: 2.0,
            });
        }
        let mut next = vec![0.0; vehicles];
        for i in 0..vehicles {
            let base = if i + 1 < vehicles {
                let gap = xs[i + 1] - xs[i];
                gains.0 * (vs[i + 1] - vs[i]) + gains.1 * (gap - vs[i] * gains.2)
            } else {
                0.3 * (0.05 * f as f64).sin()
            };
            let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
            next[i] = base + noise_std * z;
        }
        for i in 0..vehicles {
            xs[i] += vs[i] * dt;
            vs[i] = (vs[i] + next[i] * dt).max(0.0);
            accs[i] = next[i];
        }
    }
    TrajectoryTable::new(rows, dt).expect("well-formed platoon table")
}

/// Reference predictor with the given linear gains and a constant
/// predicted std.
pub fn reference_model(std: f64, gains: (f64, f64, f64)) -> PredictorHandle {
    PredictorHandle {
        version: PREDICTOR_FILE_VERSION,
        name: "reference-linear".to_string(),
        direction: Direction::Longitudinal,
        dt: 0.2,
        t_steps: 12,
        rule: Rule::LinearGap {
            alpha: gains.0,
            beta: gains.1,
            tau: gains.2,
        },
        std_bins: StdBins::constant(std),
    }
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a CDF.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = sample.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max(((i + 1) as f64 / n - f).abs());
        sup = sup.max((i as f64 / n - f).abs());
    }
    sup
}
