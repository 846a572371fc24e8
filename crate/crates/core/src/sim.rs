//! Forward-rolling agent-based traffic simulation.
//!
//! A rollout starts from a recorded frame sequence: every vehicle with a
//! full history window at a seed-selected frame becomes an agent carrying
//! its recorded kinematic history. Each step, every live agent gets a
//! mean/std acceleration prediction from its state window, a residual is
//! sampled from the configured law, and the reconstructed acceleration
//! (clamped to physical bounds) drives a constant-jerk kinematic update.
//! The road is a periodic segment so density stays constant. Collisions
//! are strict rectangle overlaps, typed rear-end when the pair shared a
//! lane on the previous step, and crashed vehicles freeze in place as
//! obstacles while their mileage stops accruing.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::law::ResidualLaw;
use crate::predict::{Prediction, PredictorHandle};
use crate::traj::{
    assign_neighbor_slots, Direction, EgoStep, NeighborStep, NeighborTrack, SlotAgent, StateWindow,
    TrajectoryTable, NEIGHBOR_SLOTS,
};
use crate::ztest::RateTest;

/// Meters per statute mile.
pub const METERS_PER_MILE: f64 = 1609.344;
/// Residual laws run in the simulator default to this truncation bound
/// when none is set; unbounded heavy-tail draws produce non-physical
/// accelerations.
pub const DEFAULT_SIM_TRUNCATION: f64 = 50.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("table has no frame with a full {t_steps}-step history for any vehicle")]
    NoViableStartFrame { t_steps: usize },
    #[error("config: {0}")]
    BadConfig(String),
}

/// Acceleration clamp bounds in m/s^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clamps {
    pub long_min: f64,
    pub long_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl Default for Clamps {
    fn default() -> Self {
        Clamps {
            long_min: -8.0,
            long_max: 5.0,
            lat_min: -4.0,
            lat_max: 4.0,
        }
    }
}

/// Per-rollout simulation options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub dt: f64,
    pub t_steps: usize,
    pub clamps: Clamps,
    /// 2D mode: sample lateral acceleration too. Car-following datasets
    /// run longitudinal-only.
    pub lateral_enabled: bool,
    /// Wrap length of the periodic road; derived from the seed frame's
    /// extent plus a margin when absent.
    pub road_length: Option<f64>,
    /// Pin the rollout anchor to this recorded frame instead of sampling
    /// one; for replay runs and reproducible experiments.
    pub start_frame: Option<i64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            dt: 0.2,
            t_steps: 12,
            clamps: Clamps::default(),
            lateral_enabled: false,
            road_length: None,
            start_frame: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleAgent {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub lane: i64,
    pub length: f64,
    pub width: f64,
    /// Meters traveled since rollout start; stops accruing once frozen.
    pub odometer: f64,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HistStep {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    ax: f64,
    ay: f64,
    lane: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrashKind {
    RearEnd,
    Lateral,
}

impl CrashKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CrashKind::RearEnd => "rear-end",
            CrashKind::Lateral => "lateral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrashEvent {
    /// Rollout the event happened in (0 within a single world).
    pub rollout: usize,
    pub step: usize,
    pub vehicle_a: u64,
    pub vehicle_b: u64,
    pub kind: CrashKind,
    pub x: f64,
    pub y: f64,
}

/// One live simulation world.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub step: usize,
    pub time: f64,
    pub agents: Vec<VehicleAgent>,
    pub neighbors: Vec<[Option<usize>; NEIGHBOR_SLOTS]>,
    pub road_length: f64,
    pub events: Vec<CrashEvent>,
    pub tainted: bool,
    histories: Vec<VecDeque<HistStep>>,
    prev_lanes: Vec<i64>,
    /// Pairs currently overlapping; an episode is recorded once when the
    /// pair enters this set.
    overlapping: BTreeSet<(u64, u64)>,
    lane_centers: Vec<(i64, f64)>,
    rng: ChaCha8Rng,
    t_steps: usize,
}

impl WorldState {
    pub fn alive_count(&self) -> usize {
        self.agents.iter().filter(|a| a.alive).count()
    }

    pub fn history_len(&self, agent: usize) -> usize {
        self.histories[agent].len()
    }

    /// Total meters traveled by the fleet so far.
    pub fn fleet_meters(&self) -> f64 {
        self.agents.iter().map(|a| a.odometer).sum()
    }
}

/// Behavioral core of an agent: state window in, prediction out.
///
/// The simulator builds windows carrying both components and tagged
/// longitudinal, so implementations must read the features they need
/// rather than trusting the direction tag. `step` is the world step about
/// to be produced (0 on the first call), which lets replay-style models
/// schedule accelerations.
pub trait AccelModel: Sync {
    fn predict(&self, agent: &VehicleAgent, window: &StateWindow, step: usize) -> Prediction;
}

impl AccelModel for PredictorHandle {
    fn predict(&self, _agent: &VehicleAgent, window: &StateWindow, _step: usize) -> Prediction {
        self.predict_unchecked(window)
    }
}

/// One constant-jerk kinematic step: acceleration ramps linearly from
/// `a_cur` to `a_next` across `dt`.
///
/// Returns `(new_position, new_velocity)`:
/// `v' = v + a_cur dt + (a_next - a_cur) dt / 2`,
/// `x' = x + v dt + a_cur dt^2 / 2 + (a_next - a_cur) dt^2 / 6`.
#[inline]
pub fn constant_jerk_step(x: f64, v: f64, a_cur: f64, a_next: f64, dt: f64) -> (f64, f64) {
    let da = a_next - a_cur;
    let v_next = v + a_cur * dt + 0.5 * da * dt;
    let x_next = x + v * dt + 0.5 * a_cur * dt * dt + da * dt * dt / 6.0;
    (x_next, v_next)
}

/// Initializes a rollout from a seed-selected recorded frame.
///
/// The anchor frame is drawn uniformly from all frames at which at least
/// one vehicle has `t_steps` recorded history; agents are every vehicle
/// with full history there, id order, histories preloaded.
pub fn init_rollout(
    table: &TrajectoryTable,
    seed: u64,
    opts: &SimOptions,
) -> Result<WorldState, SimError> {
    if opts.t_steps < 1 {
        return Err(SimError::BadConfig("t_steps must be >= 1".to_string()));
    }
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(SimError::BadConfig(format!(
            "dt must be > 0, got {}",
            opts.dt
        )));
    }
    let rows = table.rows();
    let vehicles = table.vehicles();

    // anchor candidates: frames where some vehicle has t_steps of history
    let mut candidates = BTreeSet::new();
    for range in vehicles.values() {
        if range.len() < opts.t_steps {
            continue;
        }
        let first = rows[range.start].frame;
        let last = rows[range.end - 1].frame;
        for f in (first + opts.t_steps as i64 - 1)..=last {
            candidates.insert(f);
        }
    }
    let candidates: Vec<i64> = candidates.into_iter().collect();
    if candidates.is_empty() {
        return Err(SimError::NoViableStartFrame {
            t_steps: opts.t_steps,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchor = match opts.start_frame {
        Some(frame) => {
            if !candidates.contains(&frame) {
                return Err(SimError::BadConfig(format!(
                    "start_frame {frame} has no vehicle with a full history window"
                )));
            }
            frame
        }
        None => candidates[rng.random_range(0..candidates.len())],
    };

    // agents: vehicles covering [anchor - t_steps + 1, anchor], id order
    let mut agents = Vec::new();
    let mut histories = Vec::new();
    for range in vehicles.values() {
        let first = rows[range.start].frame;
        let last = rows[range.end - 1].frame;
        if first > anchor - opts.t_steps as i64 + 1 || last < anchor {
            continue;
        }
        let offset = (anchor - first) as usize;
        let hist_rows = &rows[range.start + offset + 1 - opts.t_steps..=range.start + offset];
        let cur = hist_rows.last().expect("t_steps >= 1");
        agents.push(VehicleAgent {
            id: cur.id,
            x: cur.x,
            y: cur.y,
            vx: cur.vx,
            vy: cur.vy,
            ax: cur.ax,
            ay: cur.ay,
            lane: cur.lane,
            length: cur.length,
            width: cur.width,
            odometer: 0.0,
            alive: true,
        });
        histories.push(
            hist_rows
                .iter()
                .map(|r| HistStep {
                    x: r.x,
                    y: r.y,
                    vx: r.vx,
                    vy: r.vy,
                    ax: r.ax,
                    ay: r.ay,
                    lane: r.lane,
                })
                .collect::<VecDeque<_>>(),
        );
    }
    debug_assert!(!agents.is_empty(), "anchor guarantees one eligible vehicle");

    // periodic road: seed extent plus a margin, re-centered to [0, L)
    let min_x = agents.iter().map(|a| a.x).fold(f64::INFINITY, f64::min);
    let max_x = agents.iter().map(|a| a.x).fold(f64::NEG_INFINITY, f64::max);
    let margin = 50.0f64.max(4.0 * agents.iter().map(|a| a.length).fold(0.0, f64::max));
    let road_length = match opts.road_length {
        Some(l) if l > max_x - min_x => l,
        Some(l) => {
            return Err(SimError::BadConfig(format!(
                "road_length {l} shorter than seed-frame extent {}",
                max_x - min_x
            )))
        }
        None => (max_x - min_x) + margin,
    };
    let shift = -min_x + margin * 0.5;
    for a in &mut agents {
        a.x = (a.x + shift).rem_euclid(road_length);
    }
    for h in &mut histories {
        for s in h.iter_mut() {
            s.x = (s.x + shift).rem_euclid(road_length);
        }
    }

    // lane centers over the whole table, for lane re-assignment in 2D mode
    let mut lane_sum: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = lane_sum.entry(r.lane).or_insert((0.0, 0));
        e.0 += r.y;
        e.1 += 1;
    }
    let lane_centers = lane_sum
        .into_iter()
        .map(|(lane, (sum, count))| (lane, sum / count as f64))
        .collect();

    let prev_lanes = agents.iter().map(|a| a.lane).collect();
    let mut world = WorldState {
        step: 0,
        time: 0.0,
        agents,
        neighbors: Vec::new(),
        road_length,
        events: Vec::new(),
        tainted: false,
        histories,
        prev_lanes,
        overlapping: BTreeSet::new(),
        lane_centers,
        rng,
        t_steps: opts.t_steps,
    };
    world.rebuild_neighbors();
    // recorded frames may already contain contacts; count them as episodes
    // in progress, not as simulated crashes
    world.overlapping = overlapping_pairs(&world);
    Ok(world)
}

fn slot_agents(world: &WorldState) -> Vec<SlotAgent> {
    world
        .agents
        .iter()
        .map(|a| SlotAgent {
            id: a.id,
            lane: a.lane,
            x: a.x,
            y: a.y,
            length: a.length,
        })
        .collect()
}

impl WorldState {
    fn rebuild_neighbors(&mut self) {
        let agents = slot_agents(self);
        self.neighbors = agents
            .iter()
            .map(|ego| assign_neighbor_slots(ego, &agents, Some(self.road_length)))
            .collect();
    }

    /// Assembles the prediction window of one agent from the history
    /// buffers and the current neighbor table.
    fn window(&self, idx: usize) -> StateWindow {
        let hist = &self.histories[idx];
        let ego: Vec<EgoStep> = hist
            .iter()
            .map(|h| EgoStep {
                vx: h.vx,
                vy: h.vy,
                ax: h.ax,
                ay: h.ay,
                lane: h.lane,
            })
            .collect();
        let mut neighbors: [NeighborTrack; NEIGHBOR_SLOTS] =
            std::array::from_fn(|_| NeighborTrack {
                present: false,
                steps: vec![NeighborStep::default(); self.t_steps],
            });
        for (slot, cand) in self.neighbors[idx].iter().enumerate() {
            let Some(nb_idx) = cand else { continue };
            let nb_hist = &self.histories[*nb_idx];
            let steps = hist
                .iter()
                .zip(nb_hist.iter())
                .map(|(e, n)| {
                    let mut dx = n.x - e.x;
                    dx -= self.road_length * (dx / self.road_length).round();
                    NeighborStep {
                        vx: n.vx,
                        vy: n.vy,
                        ax: n.ax,
                        ay: n.ay,
                        dist: (dx * dx + (n.y - e.y).powi(2)).sqrt(),
                    }
                })
                .collect();
            neighbors[slot] = NeighborTrack {
                present: true,
                steps,
            };
        }
        StateWindow {
            ego,
            neighbors,
            direction: Direction::Longitudinal,
            target: 0.0,
        }
    }
}

fn overlapping_pairs(world: &WorldState) -> BTreeSet<(u64, u64)> {
    let mut pairs = BTreeSet::new();
    let n = world.agents.len();
    for i in 0..n {
        for j in i + 1..n {
            let a = &world.agents[i];
            let b = &world.agents[j];
            let mut dx = b.x - a.x;
            dx -= world.road_length * (dx / world.road_length).round();
            let dy = b.y - a.y;
            // strict interior overlap: touching edges is not a crash
            if dx.abs() < 0.5 * (a.length + b.length) && dy.abs() < 0.5 * (a.width + b.width) {
                pairs.insert((a.id.min(b.id), a.id.max(b.id)));
            }
        }
    }
    pairs
}

/// Contacts that would be recorded now: overlapping pairs not already in
/// an episode, typed by the previous step's lanes. Pure; `step` advances
/// the episode bookkeeping.
pub fn detect_collisions(world: &WorldState) -> Vec<CrashEvent> {
    let by_id: BTreeMap<u64, usize> = world
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id, i))
        .collect();
    overlapping_pairs(world)
        .into_iter()
        .filter(|pair| !world.overlapping.contains(pair))
        .map(|(ida, idb)| {
            let (i, j) = (by_id[&ida], by_id[&idb]);
            let kind = if world.prev_lanes[i] == world.prev_lanes[j] {
                CrashKind::RearEnd
            } else {
                CrashKind::Lateral
            };
            let a = &world.agents[i];
            let b = &world.agents[j];
            let mut dx = b.x - a.x;
            dx -= world.road_length * (dx / world.road_length).round();
            CrashEvent {
                rollout: 0,
                step: world.step,
                vehicle_a: ida,
                vehicle_b: idb,
                kind,
                x: (a.x + 0.5 * dx).rem_euclid(world.road_length),
                y: 0.5 * (a.y + b.y),
            }
        })
        .collect()
}

/// Advances the world by one step under the given models and residual law.
pub fn step(
    world: &mut WorldState,
    long_model: &dyn AccelModel,
    lat_model: Option<&dyn AccelModel>,
    law: &ResidualLaw<f64>,
    opts: &SimOptions,
) {
    let n = world.agents.len();
    world.prev_lanes = world.agents.iter().map(|a| a.lane).collect();

    // predictions and residual draws, fixed agent order
    let mut next_accel = vec![(0.0f64, 0.0f64); n];
    #[allow(clippy::needless_range_loop)] // rng draws interleave with agent reads
    for i in 0..n {
        if !world.agents[i].alive {
            continue;
        }
        let window = world.window(i);
        let agent = &world.agents[i];
        let p_long = long_model.predict(agent, &window, world.step);
        let sigma_long: f64 = law.sample(&mut world.rng);
        let mut ax = p_long.mean + p_long.std * sigma_long;
        let mut ay = 0.0;
        if opts.lateral_enabled {
            if let Some(model) = lat_model {
                let p_lat = model.predict(agent, &window, world.step);
                let sigma_lat: f64 = law.sample(&mut world.rng);
                ay = p_lat.mean + p_lat.std * sigma_lat;
            }
        }
        if !ax.is_finite() || !ay.is_finite() {
            world.agents[i].alive = false;
            world.tainted = true;
            ax = 0.0;
            ay = 0.0;
        }
        next_accel[i] = (
            ax.clamp(opts.clamps.long_min, opts.clamps.long_max),
            ay.clamp(opts.clamps.lat_min, opts.clamps.lat_max),
        );
    }

    // kinematic update
    for (i, &(ax_next, ay_next)) in next_accel.iter().enumerate() {
        let agent = &mut world.agents[i];
        if agent.alive {
            let (x_new, vx_new) = constant_jerk_step(agent.x, agent.vx, agent.ax, ax_next, opts.dt);
            let (y_new, vy_new) = if opts.lateral_enabled {
                constant_jerk_step(agent.y, agent.vy, agent.ay, ay_next, opts.dt)
            } else {
                (agent.y, agent.vy)
            };
            agent.odometer += ((x_new - agent.x).powi(2) + (y_new - agent.y).powi(2)).sqrt();
            agent.x = x_new.rem_euclid(world.road_length);
            agent.y = y_new;
            agent.vx = vx_new;
            agent.vy = vy_new;
            agent.ax = ax_next;
            agent.ay = ay_next;
            if opts.lateral_enabled && !world.lane_centers.is_empty() {
                agent.lane = world
                    .lane_centers
                    .iter()
                    .min_by(|(_, ca), (_, cb)| {
                        (agent.y - ca)
                            .abs()
                            .partial_cmp(&(agent.y - cb).abs())
                            .expect("finite lane centers")
                    })
                    .map(|(lane, _)| *lane)
                    .expect("non-empty lane centers");
            }
        }
        let agent = &world.agents[i];
        let snapshot = HistStep {
            x: agent.x,
            y: agent.y,
            vx: agent.vx,
            vy: agent.vy,
            ax: agent.ax,
            ay: agent.ay,
            lane: agent.lane,
        };
        let hist = &mut world.histories[i];
        hist.pop_front();
        hist.push_back(snapshot);
    }

    world.step += 1;
    world.time += opts.dt;
    world.rebuild_neighbors();

    // collisions: record new episodes, freeze participants
    let events = detect_collisions(world);
    let current = overlapping_pairs(world);
    for event in &events {
        for agent in world.agents.iter_mut() {
            if agent.id == event.vehicle_a || agent.id == event.vehicle_b {
                agent.alive = false;
            }
        }
    }
    world.events.extend(events);
    world.overlapping = current;
}

/// Full rollout campaign configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutConfig {
    pub n_rollouts: usize,
    pub steps_per_rollout: usize,
    /// One seed per rollout.
    pub seeds: Vec<u64>,
    pub law: ResidualLaw<f64>,
    pub opts: SimOptions,
}

/// Aggregated crash accounting over a rollout campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashReport {
    pub vmt_miles: f64,
    pub crash_count: u64,
    /// `crash_count / (vmt_miles / 1e6)`.
    pub rate_per_million_vmt: f64,
    pub rate_per_mile: f64,
    pub rear_end_fraction: f64,
    pub lateral_fraction: f64,
    pub law: String,
    pub n_rollouts: usize,
    pub steps_per_rollout: usize,
    pub dt: f64,
    pub seeds: Vec<u64>,
    pub tainted: bool,
    pub config_digest: String,
    pub rollouts: Vec<RolloutSummary>,
    pub events: Vec<CrashEvent>,
    /// Filled in by the crash-rate Z-test command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_test: Option<RateTest<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutSummary {
    pub seed: u64,
    pub vmt_miles: f64,
    pub crashes: u64,
    pub tainted: bool,
}

/// Runs independent seeded rollouts (in parallel) and merges their
/// outcomes in seed order.
pub fn run_rollouts(
    table: &TrajectoryTable,
    long_model: &dyn AccelModel,
    lat_model: Option<&dyn AccelModel>,
    config: &RolloutConfig,
) -> Result<CrashReport, SimError> {
    if config.n_rollouts == 0 {
        return Err(SimError::BadConfig("n_rollouts must be >= 1".to_string()));
    }
    if config.seeds.len() != config.n_rollouts {
        return Err(SimError::BadConfig(format!(
            "need exactly one seed per rollout: {} seeds for {} rollouts",
            config.seeds.len(),
            config.n_rollouts
        )));
    }
    let law = match config.law.truncation() {
        Some(_) => config.law.clone(),
        None => config
            .law
            .clone()
            .with_truncation(DEFAULT_SIM_TRUNCATION)
            .expect("positive default bound"),
    };

    let worlds: Result<Vec<WorldState>, SimError> = config
        .seeds
        .par_iter()
        .enumerate()
        .map(|(rollout, &seed)| {
            let mut world = init_rollout(table, seed, &config.opts)?;
            for _ in 0..config.steps_per_rollout {
                step(&mut world, long_model, lat_model, &law, &config.opts);
            }
            for e in &mut world.events {
                e.rollout = rollout;
            }
            Ok(world)
        })
        .collect();
    let worlds = worlds?;

    let mut events = Vec::new();
    let mut rollouts = Vec::new();
    let mut meters = 0.0;
    let mut tainted = false;
    for (world, &seed) in worlds.iter().zip(&config.seeds) {
        let rollout_meters = world.fleet_meters();
        meters += rollout_meters;
        tainted |= world.tainted;
        rollouts.push(RolloutSummary {
            seed,
            vmt_miles: rollout_meters / METERS_PER_MILE,
            crashes: world.events.len() as u64,
            tainted: world.tainted,
        });
        events.extend(world.events.iter().copied());
    }

    let vmt_miles = meters / METERS_PER_MILE;
    let crash_count = events.len() as u64;
    let rear = events
        .iter()
        .filter(|e| e.kind == CrashKind::RearEnd)
        .count() as f64;
    let (rear_end_fraction, lateral_fraction) = if crash_count > 0 {
        let total = crash_count as f64;
        (rear / total, (total - rear) / total)
    } else {
        (0.0, 0.0)
    };
    let (rate_per_million_vmt, rate_per_mile) = if vmt_miles > 0.0 {
        (
            crash_count as f64 / (vmt_miles / 1e6),
            crash_count as f64 / vmt_miles,
        )
    } else {
        (0.0, 0.0)
    };

    Ok(CrashReport {
        vmt_miles,
        crash_count,
        rate_per_million_vmt,
        rate_per_mile,
        rear_end_fraction,
        lateral_fraction,
        law: law.label(),
        n_rollouts: config.n_rollouts,
        steps_per_rollout: config.steps_per_rollout,
        dt: config.opts.dt,
        seeds: config.seeds.clone(),
        tainted,
        config_digest: config_digest(config, &law.label()),
        rollouts,
        events,
        rate_test: None,
    })
}

fn config_digest(config: &RolloutConfig, law_label: &str) -> String {
    let echo = format!(
        "law={law_label};n={};steps={};seeds={:?};dt={};t_steps={};clamps={:?};lateral={};road={:?}",
        config.n_rollouts,
        config.steps_per_rollout,
        config.seeds,
        config.opts.dt,
        config.opts.t_steps,
        config.opts.clamps,
        config.opts.lateral_enabled,
        config.opts.road_length,
    );
    let digest = Sha256::digest(echo.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the per-event CSV (`step,vehicle_a,vehicle_b,type,x,y`).
pub fn write_events_csv<W: std::io::Write>(events: &[CrashEvent], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "vehicle_a", "vehicle_b", "type", "x", "y"])?;
    for e in events {
        w.write_record([
            e.step.to_string(),
            e.vehicle_a.to_string(),
            e.vehicle_b.to_string(),
            e.kind.as_str().to_string(),
            e.x.to_string(),
            e.y.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
