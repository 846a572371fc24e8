//! Column maps from dataset export formats onto the neutral schema.
//!
//! A schema names the source column for each neutral field together with a
//! multiplicative factor into SI units. Kinematic columns may be absent;
//! the parser then derives them by central differences at the recording
//! rate. The `acc` schema is different in kind: ego-leader car-following
//! logs carry one vehicle pair per file, which the parser expands into a
//! two-vehicle table.

use super::TrajError;

/// One source column plus its unit conversion into SI.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub source: String,
    pub scale: f64,
}

impl ColumnSpec {
    pub fn new(source: &str, scale: f64) -> Self {
        Self {
            source: source.to_string(),
            scale,
        }
    }

    pub fn si(source: &str) -> Self {
        Self::new(source, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaMap {
    pub name: String,
    /// Recording timestep assumed when the caller does not override it.
    pub default_recording_dt: f64,
    pub kind: SchemaKind,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)] // built a handful of times per run
pub enum SchemaKind {
    /// One row per (frame, vehicle).
    Table {
        frame: ColumnSpec,
        id: ColumnSpec,
        x: ColumnSpec,
        y: ColumnSpec,
        vx: Option<ColumnSpec>,
        vy: Option<ColumnSpec>,
        ax: Option<ColumnSpec>,
        ay: Option<ColumnSpec>,
        lane: Option<ColumnSpec>,
        length: Option<ColumnSpec>,
        width: Option<ColumnSpec>,
        default_length: f64,
        default_width: f64,
    },
    /// One row per time point of an ego-leader pair: time, speeds, gap.
    EgoLeaderLog {
        time: ColumnSpec,
        ego_speed: ColumnSpec,
        lead_speed: ColumnSpec,
        gap: ColumnSpec,
        default_length: f64,
        default_width: f64,
    },
}

impl SchemaMap {
    pub fn by_name(name: &str) -> Result<Self, TrajError> {
        match name {
            "highd" => Ok(highd_schema()),
            "citysim" => Ok(citysim_schema()),
            "acc" => Ok(acc_schema()),
            "neutral" => Ok(neutral_schema()),
            other => Err(TrajError::UnknownSchema {
                name: other.to_string(),
            }),
        }
    }
}

/// highD-like drone recordings: SI units, 25 Hz, the source `width` and
/// `height` columns are the vehicle's x- and y-extent.
pub fn highd_schema() -> SchemaMap {
    SchemaMap {
        name: "highd".to_string(),
        default_recording_dt: 0.04,
        kind: SchemaKind::Table {
            frame: ColumnSpec::si("frame"),
            id: ColumnSpec::si("id"),
            x: ColumnSpec::si("x"),
            y: ColumnSpec::si("y"),
            vx: Some(ColumnSpec::si("xVelocity")),
            vy: Some(ColumnSpec::si("yVelocity")),
            ax: Some(ColumnSpec::si("xAcceleration")),
            ay: Some(ColumnSpec::si("yAcceleration")),
            lane: Some(ColumnSpec::si("laneId")),
            length: Some(ColumnSpec::si("width")),
            width: Some(ColumnSpec::si("height")),
            default_length: 4.5,
            default_width: 2.0,
        },
    }
}

/// CitySim-like drone recordings: positions in feet at 30 fps; velocities
/// and accelerations are derived from positions. Lane ids are taken as
/// opaque integers.
pub fn citysim_schema() -> SchemaMap {
    const FT_TO_M: f64 = 0.3048;
    SchemaMap {
        name: "citysim".to_string(),
        default_recording_dt: 1.0 / 30.0,
        kind: SchemaKind::Table {
            frame: ColumnSpec::si("frameNum"),
            id: ColumnSpec::si("carId"),
            x: ColumnSpec::new("carCenterXft", FT_TO_M),
            y: ColumnSpec::new("carCenterYft", FT_TO_M),
            vx: None,
            vy: None,
            ax: None,
            ay: None,
            lane: Some(ColumnSpec::si("laneId")),
            length: None,
            width: None,
            default_length: 4.5,
            default_width: 2.0,
        },
    }
}

/// Generic ego-leader ACC log: `time` (s), `ego_speed`/`lead_speed` (m/s),
/// `gap` (m, bumper to bumper).
pub fn acc_schema() -> SchemaMap {
    SchemaMap {
        name: "acc".to_string(),
        default_recording_dt: 0.1,
        kind: SchemaKind::EgoLeaderLog {
            time: ColumnSpec::si("time"),
            ego_speed: ColumnSpec::si("ego_speed"),
            lead_speed: ColumnSpec::si("lead_speed"),
            gap: ColumnSpec::si("gap"),
            default_length: 4.5,
            default_width: 2.0,
        },
    }
}

/// The neutral schema itself (identity mapping), as produced by
/// [`super::write_neutral_csv`].
pub fn neutral_schema() -> SchemaMap {
    SchemaMap {
        name: "neutral".to_string(),
        default_recording_dt: 0.2,
        kind: SchemaKind::Table {
            frame: ColumnSpec::si("frame"),
            id: ColumnSpec::si("id"),
            x: ColumnSpec::si("x"),
            y: ColumnSpec::si("y"),
            vx: Some(ColumnSpec::si("vx")),
            vy: Some(ColumnSpec::si("vy")),
            ax: Some(ColumnSpec::si("ax")),
            ay: Some(ColumnSpec::si("ay")),
            lane: Some(ColumnSpec::si("lane")),
            length: Some(ColumnSpec::si("length")),
            width: Some(ColumnSpec::si("width")),
            default_length: 4.5,
            default_width: 2.0,
        },
    }
}
