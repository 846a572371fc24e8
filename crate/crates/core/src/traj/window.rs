//! Fixed-length state windows: ego history plus eight neighbor slots.
//!
//! A window covers `T` consecutive history steps and one future step whose
//! observed acceleration is the prediction target. Neighbors occupy eight
//! fixed slots around the ego, assigned at the last history frame:
//! preceding, following, then (preceding, alongside, following) on the
//! left and right adjacent lanes. "Alongside" means the candidate's
//! longitudinal center lies within half the ego length of the ego center;
//! the nearest candidate by |longitudinal gap| wins a contested slot, ties
//! going to the lower vehicle id. Lane ids are opaque integers; id - 1 is
//! treated as the left lane, id + 1 as the right.

use serde::{Deserialize, Serialize};

use super::table::TrajectoryTable;

pub const NEIGHBOR_SLOTS: usize = 8;

/// Slot order within a window's neighbor array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(usize)]
pub enum NeighborSlot {
    Preceding = 0,
    Following = 1,
    LeftPreceding = 2,
    LeftAlongside = 3,
    LeftFollowing = 4,
    RightPreceding = 5,
    RightAlongside = 6,
    RightFollowing = 7,
}

/// Which acceleration component the window predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Longitudinal,
    Lateral,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Longitudinal => "longitudinal",
            Direction::Lateral => "lateral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "longitudinal" => Some(Direction::Longitudinal),
            "lateral" => Some(Direction::Lateral),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EgoStep {
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub lane: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NeighborStep {
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    /// Center-to-center Euclidean distance to the ego at this step; zero
    /// where either vehicle has no record.
    pub dist: f64,
}

/// One neighbor slot's track over the window. Absent slots have
/// `present = false` and all-zero steps.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTrack {
    pub present: bool,
    pub steps: Vec<NeighborStep>,
}

impl NeighborTrack {
    fn absent(t_steps: usize) -> Self {
        NeighborTrack {
            present: false,
            steps: vec![NeighborStep::default(); t_steps],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateWindow {
    /// Ego features over the `T` history steps, oldest first.
    pub ego: Vec<EgoStep>,
    /// The eight neighbor slots in [`NeighborSlot`] order.
    pub neighbors: [NeighborTrack; NEIGHBOR_SLOTS],
    pub direction: Direction,
    /// Observed next-step acceleration (the component named by
    /// `direction`).
    pub target: f64,
}

impl StateWindow {
    pub fn t_steps(&self) -> usize {
        self.ego.len()
    }

    pub fn last_ego(&self) -> &EgoStep {
        self.ego.last().expect("windows have at least one step")
    }

    pub fn neighbor(&self, slot: NeighborSlot) -> &NeighborTrack {
        &self.neighbors[slot as usize]
    }
}

/// Minimal view of a vehicle used by slot assignment; shared between
/// recorded tables and live simulation state.
#[derive(Debug, Clone, Copy)]
pub struct SlotAgent {
    pub id: u64,
    pub lane: i64,
    pub x: f64,
    pub y: f64,
    pub length: f64,
}

/// Assigns up to eight neighbor slots around `ego`. Returns indices into
/// `others`. `wrap` treats x as periodic with the given circumference
/// (longitudinal gaps then live in [-wrap/2, wrap/2)).
pub fn assign_neighbor_slots(
    ego: &SlotAgent,
    others: &[SlotAgent],
    wrap: Option<f64>,
) -> [Option<usize>; NEIGHBOR_SLOTS] {
    let mut slots: [Option<(usize, f64, u64)>; NEIGHBOR_SLOTS] = [None; NEIGHBOR_SLOTS];
    for (idx, other) in others.iter().enumerate() {
        if other.id == ego.id {
            continue;
        }
        let mut dx = other.x - ego.x;
        if let Some(period) = wrap {
            dx -= period * (dx / period).round();
        }
        let slot = match other.lane - ego.lane {
            0 => {
                if dx >= 0.0 {
                    NeighborSlot::Preceding
                } else {
                    NeighborSlot::Following
                }
            }
            -1 => side_slot(
                dx,
                ego.length,
                NeighborSlot::LeftPreceding,
                NeighborSlot::LeftAlongside,
                NeighborSlot::LeftFollowing,
            ),
            1 => side_slot(
                dx,
                ego.length,
                NeighborSlot::RightPreceding,
                NeighborSlot::RightAlongside,
                NeighborSlot::RightFollowing,
            ),
            _ => continue,
        };
        let cand = (idx, dx.abs(), other.id);
        let cell = &mut slots[slot as usize];
        let better = match cell {
            None => true,
            Some((_, best_gap, best_id)) => {
                cand.1 < *best_gap || (cand.1 == *best_gap && cand.2 < *best_id)
            }
        };
        if better {
            *cell = Some(cand);
        }
    }
    slots.map(|s| s.map(|(idx, _, _)| idx))
}

fn side_slot(
    dx: f64,
    ego_length: f64,
    preceding: NeighborSlot,
    alongside: NeighborSlot,
    following: NeighborSlot,
) -> NeighborSlot {
    if dx.abs() <= ego_length * 0.5 {
        alongside
    } else if dx > 0.0 {
        preceding
    } else {
        following
    }
}

/// Cuts the table into state windows of `t_steps` history plus one target
/// step. Vehicles with fewer than `t_steps + 1` frames yield no windows,
/// so the total count is `sum_vehicles max(0, frames - t_steps)`.
pub fn build_state_windows(
    table: &TrajectoryTable,
    t_steps: usize,
    direction: Direction,
) -> Vec<StateWindow> {
    assert!(t_steps >= 1, "windows need at least one history step");
    let rows = table.rows();
    let vehicles = table.vehicles();
    let frames = table.frames();

    let mut windows = Vec::new();
    for range in vehicles.values() {
        let len = range.len();
        if len < t_steps + 1 {
            continue;
        }
        for offset in 0..(len - t_steps) {
            let history = range.start + offset..range.start + offset + t_steps;
            let target_row = &rows[range.start + offset + t_steps];
            let anchor = &rows[history.end - 1];

            // slot assignment among vehicles present at the anchor frame
            let peers: Vec<usize> = frames[&anchor.frame].clone();
            let agents: Vec<SlotAgent> = peers
                .iter()
                .map(|&i| SlotAgent {
                    id: rows[i].id,
                    lane: rows[i].lane,
                    x: rows[i].x,
                    y: rows[i].y,
                    length: rows[i].length,
                })
                .collect();
            let ego_agent = SlotAgent {
                id: anchor.id,
                lane: anchor.lane,
                x: anchor.x,
                y: anchor.y,
                length: anchor.length,
            };
            let assignment = assign_neighbor_slots(&ego_agent, &agents, None);

            let ego: Vec<EgoStep> = rows[history.clone()]
                .iter()
                .map(|r| EgoStep {
                    vx: r.vx,
                    vy: r.vy,
                    ax: r.ax,
                    ay: r.ay,
                    lane: r.lane,
                })
                .collect();

            let mut neighbors: [NeighborTrack; NEIGHBOR_SLOTS] =
                std::array::from_fn(|_| NeighborTrack::absent(t_steps));
            for (slot, cand) in assignment.iter().enumerate() {
                let Some(cand_idx) = cand else { continue };
                let nb_id = rows[peers[*cand_idx]].id;
                let nb_range = &vehicles[&nb_id];
                let nb_first = rows[nb_range.start].frame;
                let mut steps = vec![NeighborStep::default(); t_steps];
                for (s, ego_row) in rows[history.clone()].iter().enumerate() {
                    let frame = ego_row.frame;
                    let pos = frame - nb_first;
                    if pos < 0 || pos as usize >= nb_range.len() {
                        continue; // neighbor not yet (or no longer) recorded
                    }
                    let nb = &rows[nb_range.start + pos as usize];
                    steps[s] = NeighborStep {
                        vx: nb.vx,
                        vy: nb.vy,
                        ax: nb.ax,
                        ay: nb.ay,
                        dist: ((nb.x - ego_row.x).powi(2) + (nb.y - ego_row.y).powi(2)).sqrt(),
                    };
                }
                neighbors[slot] = NeighborTrack {
                    present: true,
                    steps,
                };
            }

            windows.push(StateWindow {
                ego,
                neighbors,
                direction,
                target: match direction {
                    Direction::Longitudinal => target_row.ax,
                    Direction::Lateral => target_row.ay,
                },
            });
        }
    }
    windows
}
