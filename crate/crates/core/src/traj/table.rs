//! The neutral trajectory table and its CSV round trip.

use std::collections::BTreeMap;
use std::io::Write;

use super::schema::{ColumnSpec, SchemaKind, SchemaMap};
use super::TrajError;

/// Fixed column order of the neutral CSV export.
pub const NEUTRAL_HEADER: [&str; 11] = [
    "frame", "id", "x", "y", "vx", "vy", "ax", "ay", "lane", "length", "width",
];

/// One (frame, vehicle) record in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajRow {
    pub frame: i64,
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
}

/// Rows sorted by (id, frame), gap-free per vehicle, plus the recording
/// timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    rows: Vec<TrajRow>,
    dt: f64,
}

impl TrajectoryTable {
    /// Sorts, validates per-vehicle frame contiguity and positive vehicle
    /// extents, and wraps the rows.
    pub fn new(mut rows: Vec<TrajRow>, dt: f64) -> Result<Self, TrajError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(TrajError::BadTimestep { dt });
        }
        if rows.is_empty() {
            return Err(TrajError::EmptyTable);
        }
        for (i, row) in rows.iter().enumerate() {
            if !(row.length > 0.0) || !(row.width > 0.0) {
                return Err(TrajError::BadRow {
                    row: i + 1,
                    message: format!(
                        "vehicle {} needs positive extents, got length {} width {}",
                        row.id, row.length, row.width
                    ),
                });
            }
        }
        rows.sort_by_key(|r| (r.id, r.frame));
        for (i, pair) in rows.windows(2).enumerate() {
            if pair[0].id == pair[1].id && pair[1].frame != pair[0].frame + 1 {
                return Err(TrajError::BadRow {
                    row: i + 1,
                    message: format!(
                        "vehicle {} frames not strictly increasing and gap-free: {} then {}",
                        pair[0].id, pair[0].frame, pair[1].frame
                    ),
                });
            }
        }
        Ok(Self { rows, dt })
    }

    pub fn rows(&self) -> &[TrajRow] {
        &self.rows
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Row index ranges per vehicle, in vehicle-id order.
    pub fn vehicles(&self) -> BTreeMap<u64, std::ops::Range<usize>> {
        let mut map = BTreeMap::new();
        let mut start = 0usize;
        for i in 1..=self.rows.len() {
            if i == self.rows.len() || self.rows[i].id != self.rows[start].id {
                map.insert(self.rows[start].id, start..i);
                start = i;
            }
        }
        map
    }

    /// Row indices per frame, in frame order; each bucket is id-ordered.
    pub fn frames(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            map.entry(row.frame).or_default().push(i);
        }
        map
    }
}

/// Parses a dataset CSV export through a schema map into the neutral table.
///
/// `recording_dt` overrides the schema's default timestep; ego-leader logs
/// always infer it from their time column.
pub fn parse_trajectory_csv(
    bytes: &[u8],
    schema: &SchemaMap,
    recording_dt: Option<f64>,
) -> Result<TrajectoryTable, TrajError> {
    match &schema.kind {
        SchemaKind::Table { .. } => parse_table(bytes, schema, recording_dt),
        SchemaKind::EgoLeaderLog { .. } => parse_ego_leader(bytes, schema),
    }
}

struct Field {
    index: usize,
    scale: f64,
}

fn resolve(
    headers: &csv::StringRecord,
    spec: &ColumnSpec,
    schema: &str,
) -> Result<Field, TrajError> {
    headers
        .iter()
        .position(|h| h.trim() == spec.source)
        .map(|index| Field {
            index,
            scale: spec.scale,
        })
        .ok_or_else(|| TrajError::MissingColumn {
            schema: schema.to_string(),
            column: spec.source.clone(),
        })
}

fn resolve_opt(
    headers: &csv::StringRecord,
    spec: &Option<ColumnSpec>,
    schema: &str,
) -> Result<Option<Field>, TrajError> {
    match spec {
        Some(s) => resolve(headers, s, schema).map(Some),
        None => Ok(None),
    }
}

fn numeric(
    record: &csv::StringRecord,
    field: &Field,
    row: usize,
    name: &str,
) -> Result<f64, TrajError> {
    let raw = record.get(field.index).unwrap_or("");
    raw.trim()
        .parse::<f64>()
        .map(|v| v * field.scale)
        .map_err(|_| TrajError::BadCell {
            row,
            column: name.to_string(),
            value: raw.to_string(),
        })
}

fn integer(
    record: &csv::StringRecord,
    field: &Field,
    row: usize,
    name: &str,
) -> Result<i64, TrajError> {
    let v = numeric(record, field, row, name)?;
    if v.fract().abs() > 1e-9 {
        return Err(TrajError::BadCell {
            row,
            column: name.to_string(),
            value: format!("{v}"),
        });
    }
    Ok(v.round() as i64)
}

fn parse_table(
    bytes: &[u8],
    schema: &SchemaMap,
    recording_dt: Option<f64>,
) -> Result<TrajectoryTable, TrajError> {
    let SchemaKind::Table {
        frame,
        id,
        x,
        y,
        vx,
        vy,
        ax,
        ay,
        lane,
        length,
        width,
        default_length,
        default_width,
    } = &schema.kind
    else {
        unreachable!("caller dispatched on kind");
    };
    let dt = recording_dt.unwrap_or(schema.default_recording_dt);
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(TrajError::BadTimestep { dt });
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    let f_frame = resolve(&headers, frame, &schema.name)?;
    let f_id = resolve(&headers, id, &schema.name)?;
    let f_x = resolve(&headers, x, &schema.name)?;
    let f_y = resolve(&headers, y, &schema.name)?;
    let f_vx = resolve_opt(&headers, vx, &schema.name)?;
    let f_vy = resolve_opt(&headers, vy, &schema.name)?;
    let f_ax = resolve_opt(&headers, ax, &schema.name)?;
    let f_ay = resolve_opt(&headers, ay, &schema.name)?;
    let f_lane = resolve_opt(&headers, lane, &schema.name)?;
    let f_length = resolve_opt(&headers, length, &schema.name)?;
    let f_width = resolve_opt(&headers, width, &schema.name)?;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        let get_opt = |field: &Option<Field>, name: &str, default: f64| -> Result<f64, TrajError> {
            match field {
                Some(f) => numeric(&record, f, row_no, name),
                None => Ok(default),
            }
        };
        rows.push(TrajRow {
            frame: integer(&record, &f_frame, row_no, &frame.source)?,
            id: integer(&record, &f_id, row_no, &id.source)? as u64,
            x: numeric(&record, &f_x, row_no, &x.source)?,
            y: numeric(&record, &f_y, row_no, &y.source)?,
            vx: get_opt(&f_vx, "vx", f64::NAN)?,
            vy: get_opt(&f_vy, "vy", f64::NAN)?,
            ax: get_opt(&f_ax, "ax", f64::NAN)?,
            ay: get_opt(&f_ay, "ay", f64::NAN)?,
            lane: match &f_lane {
                Some(f) => integer(&record, f, row_no, "lane")?,
                None => 1,
            },
            length: get_opt(&f_length, "length", *default_length)?,
            width: get_opt(&f_width, "width", *default_width)?,
        });
    }

    let table = TrajectoryTable::new(rows, dt)?;
    Ok(derive_missing_kinematics(
        table,
        f_vx.is_none(),
        f_vy.is_none(),
        f_ax.is_none(),
        f_ay.is_none(),
    ))
}

/// Fills velocity from position and acceleration from velocity by central
/// differences at the recording rate (one-sided at segment ends).
fn derive_missing_kinematics(
    mut table: TrajectoryTable,
    need_vx: bool,
    need_vy: bool,
    need_ax: bool,
    need_ay: bool,
) -> TrajectoryTable {
    if !(need_vx || need_vy || need_ax || need_ay) {
        return table;
    }
    let dt = table.dt;
    let ranges: Vec<_> = table.vehicles().into_values().collect();
    for range in ranges {
        let rows = &mut table.rows[range];
        if need_vx {
            let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
            let d = central_diff(&xs, dt);
            rows.iter_mut().zip(d).for_each(|(r, v)| r.vx = v);
        }
        if need_vy {
            let ys: Vec<f64> = rows.iter().map(|r| r.y).collect();
            let d = central_diff(&ys, dt);
            rows.iter_mut().zip(d).for_each(|(r, v)| r.vy = v);
        }
        if need_ax {
            let vs: Vec<f64> = rows.iter().map(|r| r.vx).collect();
            let d = central_diff(&vs, dt);
            rows.iter_mut().zip(d).for_each(|(r, a)| r.ax = a);
        }
        if need_ay {
            let vs: Vec<f64> = rows.iter().map(|r| r.vy).collect();
            let d = central_diff(&vs, dt);
            rows.iter_mut().zip(d).for_each(|(r, a)| r.ay = a);
        }
    }
    table
}

fn central_diff(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n == 1 {
        return out;
    }
    out[0] = (values[1] - values[0]) / dt;
    out[n - 1] = (values[n - 1] - values[n - 2]) / dt;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
    }
    out
}

fn parse_ego_leader(bytes: &[u8], schema: &SchemaMap) -> Result<TrajectoryTable, TrajError> {
    let SchemaKind::EgoLeaderLog {
        time,
        ego_speed,
        lead_speed,
        gap,
        default_length,
        default_width,
    } = &schema.kind
    else {
        unreachable!("caller dispatched on kind");
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    let f_time = resolve(&headers, time, &schema.name)?;
    let f_ego = resolve(&headers, ego_speed, &schema.name)?;
    let f_lead = resolve(&headers, lead_speed, &schema.name)?;
    let f_gap = resolve(&headers, gap, &schema.name)?;

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 1;
        samples.push((
            numeric(&record, &f_time, row_no, &time.source)?,
            numeric(&record, &f_ego, row_no, &ego_speed.source)?,
            numeric(&record, &f_lead, row_no, &lead_speed.source)?,
            numeric(&record, &f_gap, row_no, &gap.source)?,
        ));
    }
    if samples.len() < 2 {
        return Err(TrajError::EmptyTable);
    }
    let dt = samples[1].0 - samples[0].0;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(TrajError::BadTimestep { dt });
    }
    for (i, pair) in samples.windows(2).enumerate() {
        let step = pair[1].0 - pair[0].0;
        if (step - dt).abs() > 1e-6 * dt.max(1.0) {
            return Err(TrajError::BadRow {
                row: i + 2,
                message: format!("non-uniform time step {step} (expected {dt})"),
            });
        }
    }

    // integrate ego position; leader center sits one gap plus one vehicle
    // length ahead
    let n = samples.len();
    let mut x_ego = vec![0.0f64; n];
    for i in 1..n {
        x_ego[i] = x_ego[i - 1] + 0.5 * (samples[i - 1].1 + samples[i].1) * dt;
    }
    let v_ego: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let v_lead: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let a_ego = central_diff(&v_ego, dt);
    let a_lead = central_diff(&v_lead, dt);

    let mut rows = Vec::with_capacity(2 * n);
    for i in 0..n {
        rows.push(TrajRow {
            frame: i as i64,
            id: 0,
            x: x_ego[i],
            y: 0.0,
            vx: v_ego[i],
            vy: 0.0,
            ax: a_ego[i],
            ay: 0.0,
            lane: 1,
            length: *default_length,
            width: *default_width,
        });
        rows.push(TrajRow {
            frame: i as i64,
            id: 1,
            x: x_ego[i] + samples[i].3 + *default_length,
            y: 0.0,
            vx: v_lead[i],
            vy: 0.0,
            ax: a_lead[i],
            ay: 0.0,
            lane: 1,
            length: *default_length,
            width: *default_width,
        });
    }
    TrajectoryTable::new(rows, dt)
}

/// Decimates the table to `target_dt`, which must be an integer multiple
/// of the recording timestep. Retained frames are the global multiples of
/// the ratio, renumbered to stay gap-free.
pub fn resample(table: &TrajectoryTable, target_dt: f64) -> Result<TrajectoryTable, TrajError> {
    if !(target_dt > 0.0) || !target_dt.is_finite() {
        return Err(TrajError::BadTimestep { dt: target_dt });
    }
    let ratio = target_dt / table.dt;
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > 1e-6 * ratio {
        return Err(TrajError::NonIntegerRatio {
            target: target_dt,
            recording: table.dt,
        });
    }
    let r = r as i64;
    if r == 1 {
        return Ok(table.clone());
    }
    let rows: Vec<TrajRow> = table
        .rows
        .iter()
        .filter(|row| row.frame.rem_euclid(r) == 0)
        .map(|row| TrajRow {
            frame: row.frame.div_euclid(r),
            ..*row
        })
        .collect();
    TrajectoryTable::new(rows, target_dt)
}

/// Writes the neutral CSV (`frame,id,x,y,vx,vy,ax,ay,lane,length,width`).
///
/// Floats use Rust's shortest round-trip formatting, so a parse of the
/// output reproduces the table bit for bit.
pub fn write_neutral_csv<W: Write>(table: &TrajectoryTable, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(NEUTRAL_HEADER)?;
    for r in table.rows() {
        w.write_record([
            r.frame.to_string(),
            r.id.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.vx.to_string(),
            r.vy.to_string(),
            r.ax.to_string(),
            r.ay.to_string(),
            r.lane.to_string(),
            r.length.to_string(),
            r.width.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::schema::{
        acc_schema, citysim_schema, highd_schema, neutral_schema, SchemaMap,
    };
    use super::*;

    fn neutral_csv(rows: &[(i64, u64, f64, f64)]) -> String {
        let mut s = String::from("frame,id,x,y,vx,vy,ax,ay,lane,length,width\n");
        for (f, id, x, v) in rows {
            s.push_str(&format!("{f},{id},{x},0,{v},0,0,0,1,4.5,2\n"));
        }
        s
    }

    #[test]
    fn identity_parse_of_well_formed_file() {
        let csv = neutral_csv(&[(0, 1, 0.0, 20.0), (1, 1, 4.0, 20.0)]);
        let table = parse_trajectory_csv(csv.as_bytes(), &neutral_schema(), Some(0.2)).unwrap();
        assert_eq!(table.rows().len(), 2);
        assert_eq!(table.rows()[0].vx, 20.0);
        assert_eq!(table.dt(), 0.2);
    }

    #[test]
    fn missing_column_error_names_the_column() {
        let csv = "frame,id,x,y,yVelocity\n0,1,0,0,0\n";
        let err = parse_trajectory_csv(csv.as_bytes(), &highd_schema(), None).unwrap_err();
        match err {
            TrajError::MissingColumn { schema, column } => {
                assert_eq!(schema, "highd");
                assert_eq!(column, "xVelocity");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_cell_error_names_the_row() {
        let csv = "frame,id,x,y,vx,vy,ax,ay,lane,length,width\n0,1,0,0,20,0,0,0,1,4.5,2\n1,1,oops,0,20,0,0,0,1,4.5,2\n";
        let err = parse_trajectory_csv(csv.as_bytes(), &neutral_schema(), Some(0.2)).unwrap_err();
        match err {
            TrajError::BadCell { row, column, value } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
                assert_eq!(value, "oops");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn resample_identity_when_dt_matches() {
        let csv = neutral_csv(&[(0, 1, 0.0, 20.0), (1, 1, 4.0, 20.0)]);
        let table = parse_trajectory_csv(csv.as_bytes(), &neutral_schema(), Some(0.2)).unwrap();
        let same = resample(&table, 0.2).unwrap();
        assert_eq!(same, table);
    }

    #[test]
    fn resample_decimates_25hz_to_5hz() {
        // 26 frames at 25 Hz -> frames 0,5,10,15,20,25 retained = ceil(26/5)
        let rows: Vec<(i64, u64, f64, f64)> = (0..26).map(|f| (f, 7u64, f as f64, 25.0)).collect();
        let csv = neutral_csv(&rows);
        let table = parse_trajectory_csv(csv.as_bytes(), &neutral_schema(), Some(0.04)).unwrap();
        let down = resample(&table, 0.2).unwrap();
        assert_eq!(down.rows().len(), 26usize.div_ceil(5));
        assert_eq!(down.dt(), 0.2);
        let frames: Vec<i64> = down.rows().iter().map(|r| r.frame).collect();
        assert_eq!(frames, vec![0, 1, 2, 3, 4, 5]);
        // every 5th source position
        assert_eq!(down.rows()[1].x, 5.0);
    }

    #[test]
    fn resample_rejects_non_integer_ratio() {
        let csv = neutral_csv(&[(0, 1, 0.0, 20.0), (1, 1, 4.0, 20.0)]);
        let table = parse_trajectory_csv(csv.as_bytes(), &neutral_schema(), Some(0.08)).unwrap();
        assert!(matches!(
            resample(&table, 0.2),
            Err(TrajError::NonIntegerRatio { .. })
        ));
    }

    #[test]
    fn non_positive_extents_are_rejected() {
        let mut row = TrajRow {
            frame: 0,
            id: 1,
            x: 0.0,
            y: 0.0,
            vx: 20.0,
            vy: 0.0,
            ax: 0.0,
            ay: 0.0,
            lane: 1,
            length: 0.0,
            width: 2.0,
        };
        assert!(matches!(
            TrajectoryTable::new(vec![row], 0.2),
            Err(TrajError::BadRow { .. })
        ));
        row.length = 4.5;
        row.width = -1.0;
        assert!(TrajectoryTable::new(vec![row], 0.2).is_err());
        row.width = 2.0;
        assert!(TrajectoryTable::new(vec![row], 0.2).is_ok());
    }

    #[test]
    fn gap_in_frames_is_rejected() {
        let csv = neutral_csv(&[(0, 1, 0.0, 20.0), (2, 1, 4.0, 20.0)]);
        assert!(matches!(
            parse_trajectory_csv(csv.as_bytes(), &neutral_schema(), Some(0.2)),
            Err(TrajError::BadRow { .. })
        ));
    }

    #[test]
    fn neutral_round_trip_is_lossless() {
        let rows = vec![
            TrajRow {
                frame: 0,
                id: 3,
                x: 1.2345678901234,
                y: -0.333_333_333_333,
                vx: 29.987654321,
                vy: -0.01,
                ax: 0.123456789,
                ay: -0.987654321,
                lane: 2,
                length: 4.23,
                width: 1.87,
            },
            TrajRow {
                frame: 1,
                id: 3,
                x: 7.230000000001,
                y: -0.30000000001,
                vx: 30.0,
                vy: 0.02,
                ax: 0.1,
                ay: -0.9,
                lane: 2,
                length: 4.23,
                width: 1.87,
            },
        ];
        let table = TrajectoryTable::new(rows, 0.2).unwrap();
        let mut buf = Vec::new();
        write_neutral_csv(&table, &mut buf).unwrap();
        let reparsed = parse_trajectory_csv(&buf, &neutral_schema(), Some(0.2)).unwrap();
        assert_eq!(reparsed, table);
    }

    #[test]
    fn derived_kinematics_from_positions() {
        // constant-speed motion in x encoded as positions only
        let mut csv = String::from("frameNum,carId,carCenterXft,carCenterYft,laneId\n");
        for f in 0..10 {
            // 10 ft per frame at 30 fps -> 300 ft/s -> 91.44 m/s
            csv.push_str(&format!("{f},5,{},0,2\n", 10.0 * f as f64));
        }
        let table = parse_trajectory_csv(csv.as_bytes(), &citysim_schema(), None).unwrap();
        let expect_v = 10.0 * 0.3048 * 30.0;
        for row in table.rows() {
            assert!((row.vx - expect_v).abs() < 1e-9, "vx={}", row.vx);
            assert!(row.ax.abs() < 1e-9);
            assert_eq!(row.lane, 2);
        }
    }

    #[test]
    fn ego_leader_log_builds_two_vehicles() {
        let mut csv = String::from("time,ego_speed,lead_speed,gap\n");
        for i in 0..20 {
            csv.push_str(&format!("{},20,21,30\n", i as f64 * 0.1));
        }
        let table = parse_trajectory_csv(csv.as_bytes(), &acc_schema(), None).unwrap();
        assert_eq!(table.dt(), 0.1);
        let vehicles = table.vehicles();
        assert_eq!(vehicles.len(), 2);
        let rows = table.rows();
        // leader ahead of ego by gap + length at every frame
        for frame in table.frames().values() {
            let ego = rows[frame[0]];
            let lead = rows[frame[1]];
            assert_eq!(ego.id, 0);
            assert_eq!(lead.id, 1);
            assert!((lead.x - ego.x - 34.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_schema_is_an_error() {
        assert!(matches!(
            SchemaMap::by_name("mystery"),
            Err(TrajError::UnknownSchema { .. })
        ));
    }
}
