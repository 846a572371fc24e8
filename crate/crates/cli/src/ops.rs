//! Command implementations: load, compute, write outputs plus manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use drivetail::fit::{
    empirical_violation_curve, fit_shifted_power_law, write_curve_csv, write_loglog_csv, FitMode,
    ThresholdPolicy,
};
use drivetail::law::LawError;
use drivetail::metrics::{evaluate, Binning};
use drivetail::predict::{compute_residuals, fit_reference_predictor, PredictorHandle};
use drivetail::sim::{
    run_rollouts, write_events_csv, AccelModel, Clamps, CrashReport, RolloutConfig, SimOptions,
};
use drivetail::traj::{build_state_windows, parse_trajectory_csv, resample, Direction, SchemaMap};
use drivetail::ztest::{crash_rate_z_test, ZtestError};
use drivetail::{ResidualLaw, ViolationCurve};

use crate::{EvalArgs, FitArgs, ResidualsArgs, SimulateArgs, ZtestArgs};

/// Failures split by exit code: 2 for validation, 3 for runtime/data.
#[derive(Debug)]
pub enum CliError {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

fn invalid<E: Into<anyhow::Error>>(err: E) -> CliError {
    CliError::Validation(err.into())
}

fn runtime<E: Into<anyhow::Error>>(err: E) -> CliError {
    CliError::Runtime(err.into())
}

type CliResult = Result<(), CliError>;

/// One manifest is written next to each command's outputs.
#[derive(Debug, Serialize)]
struct RunManifest {
    command: String,
    tool_version: String,
    config: serde_json::Value,
    input_digests: BTreeMap<String, String>,
    output_paths: Vec<String>,
    output_digests: BTreeMap<String, String>,
    duration_seconds: f64,
}

struct ManifestBuilder {
    command: &'static str,
    started: Instant,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
}

impl ManifestBuilder {
    fn new(command: &'static str, config: serde_json::Value) -> Self {
        ManifestBuilder {
            command,
            started: Instant::now(),
            config,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs
            .insert(path.display().to_string(), hex_digest(bytes));
    }

    fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    fn write(self, out_dir: &Path) -> anyhow::Result<()> {
        let mut output_digests = BTreeMap::new();
        for path in &self.outputs {
            let bytes = std::fs::read(path)
                .with_context(|| format!("reading back output {}", path.display()))?;
            output_digests.insert(path.display().to_string(), hex_digest(&bytes));
        }
        let manifest = RunManifest {
            command: self.command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config,
            input_digests: self.inputs,
            output_paths: self
                .outputs
                .iter()
                .map(|p| p.display().to_string())
                .collect(),
            output_digests,
            duration_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = out_dir.join(format!("{}.manifest.json", self.command));
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
        .map_err(runtime)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

fn write_file(path: &Path, bytes: &[u8], manifest: &mut ManifestBuilder) -> CliResult {
    std::fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)?;
    manifest.output(path);
    Ok(())
}

fn read_residual_values(path: &Path) -> Result<(Vec<f64>, Vec<u8>), CliError> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading residual file {}", path.display()))
        .map_err(invalid)?;
    let mut reader = csv::Reader::from_reader(&bytes[..]);
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(invalid)?;
        let field = record.get(0).unwrap_or("");
        let value: f64 = field
            .parse()
            .map_err(|_| invalid(anyhow!("row {}: non-numeric residual `{field}`", i + 1)))?;
        values.push(value);
    }
    if values.is_empty() {
        return Err(invalid(anyhow!(
            "residual file {} has no rows",
            path.display()
        )));
    }
    Ok((values, bytes))
}

pub fn residuals(args: &ResidualsArgs) -> CliResult {
    ensure_out_dir(&args.out_dir)?;
    let direction = Direction::parse(&args.direction)
        .ok_or_else(|| invalid(anyhow!("unknown direction `{}`", args.direction)))?;
    let schema = SchemaMap::by_name(&args.schema).map_err(invalid)?;

    let mut manifest = ManifestBuilder::new(
        "residuals",
        serde_json::json!({
            "data": args.data.display().to_string(),
            "schema": args.schema,
            "predictor": args.predictor,
            "direction": args.direction,
            "dt": args.dt,
            "t_steps": args.t_steps,
            "recording_dt": args.recording_dt,
            "epsilon": args.epsilon,
        }),
    );

    let bytes = std::fs::read(&args.data)
        .with_context(|| format!("reading dataset {}", args.data.display()))
        .map_err(invalid)?;
    manifest.input(&args.data, &bytes);

    let table = parse_trajectory_csv(&bytes, &schema, args.recording_dt).map_err(invalid)?;
    let table = resample(&table, args.dt).map_err(invalid)?;
    let windows = build_state_windows(&table, args.t_steps, direction);
    if windows.is_empty() {
        return Err(runtime(anyhow!(
            "no state windows: no vehicle has {} consecutive frames plus a target",
            args.t_steps
        )));
    }

    let handle = if args.predictor == "reference" {
        let handle = fit_reference_predictor(&windows, args.dt).map_err(runtime)?;
        let path = args.out_dir.join("predictor.json");
        handle.save(&path).map_err(runtime)?;
        manifest.output(&path);
        handle
    } else {
        let path = PathBuf::from(&args.predictor);
        let pred_bytes = std::fs::read(&path)
            .with_context(|| format!("reading predictor {}", path.display()))
            .map_err(invalid)?;
        manifest.input(&path, &pred_bytes);
        let handle = PredictorHandle::load(&path).map_err(invalid)?;
        if handle.direction != direction {
            return Err(invalid(anyhow!(
                "predictor `{}` is {}, requested {}",
                handle.name,
                handle.direction.as_str(),
                direction.as_str()
            )));
        }
        handle
    };

    let set = compute_residuals(&handle, &windows, args.epsilon, &file_stem(&args.data))
        .map_err(runtime)?;

    let csv_path = args.out_dir.join("residuals.csv");
    let mut buf = Vec::new();
    set.write_csv(&mut buf).map_err(runtime)?;
    write_file(&csv_path, &buf, &mut manifest)?;

    let prov_path = args.out_dir.join("residuals.provenance.json");
    let prov = serde_json::to_string_pretty(&set.provenance).map_err(runtime)?;
    write_file(&prov_path, prov.as_bytes(), &mut manifest)?;

    manifest.write(&args.out_dir).map_err(runtime)
}

/// Parses a `sigma,delta` CSV into a violation curve. The sample count is
/// unknown for external curves and recorded as zero.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail validation
fn read_curve_csv(path: &Path) -> Result<(ViolationCurve, Vec<u8>), CliError> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading curve file {}", path.display()))
        .map_err(invalid)?;
    let mut reader = csv::Reader::from_reader(&bytes[..]);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(invalid)?;
        let parse = |idx: usize, name: &str| -> Result<f64, CliError> {
            let field = record.get(idx).unwrap_or("");
            field
                .parse()
                .map_err(|_| invalid(anyhow!("row {}: non-numeric {name} `{field}`", i + 1)))
        };
        let sigma = parse(0, "sigma")?;
        let delta = parse(1, "delta")?;
        if !(sigma >= 0.0) || !(delta > 0.0 && delta <= 1.0) {
            return Err(invalid(anyhow!(
                "row {}: need sigma >= 0 and delta in (0, 1], got ({sigma}, {delta})",
                i + 1
            )));
        }
        if let Some(&(prev, _)) = points.last() {
            if sigma <= prev {
                return Err(invalid(anyhow!(
                    "row {}: sigma must be strictly increasing",
                    i + 1
                )));
            }
        }
        points.push((sigma, delta));
    }
    Ok((
        ViolationCurve {
            points,
            n: 0,
            policy: "external".to_string(),
        },
        bytes,
    ))
}

pub fn fit(args: &FitArgs) -> CliResult {
    ensure_out_dir(&args.out_dir)?;
    let mode = match args.fixed_a {
        Some(a0) if a0 > 0.0 && a0.is_finite() => FitMode::FixedA(a0),
        Some(a0) => return Err(invalid(anyhow!("--fixed-a must be > 0, got {a0}"))),
        None => FitMode::FreeA,
    };
    let input = match (&args.residuals, &args.curve) {
        (Some(r), None) => r.clone(),
        (None, Some(c)) => c.clone(),
        _ => {
            return Err(invalid(anyhow!(
                "exactly one of --residuals or --curve is required"
            )))
        }
    };
    let mut manifest = ManifestBuilder::new(
        "fit",
        serde_json::json!({
            "input": input.display().to_string(),
            "input_kind": if args.curve.is_some() { "curve" } else { "residuals" },
            "mode": mode.label(),
            "points": args.points,
        }),
    );
    let curve = if let Some(path) = &args.curve {
        let (curve, bytes) = read_curve_csv(path)?;
        manifest.input(path, &bytes);
        curve
    } else {
        let (values, bytes) = read_residual_values(&input)?;
        manifest.input(&input, &bytes);
        let policy = ThresholdPolicy::Quantile {
            points: args.points,
            min_tail_count: 10,
            delta_floor: 1e-6,
        };
        empirical_violation_curve(&values, &policy).map_err(runtime)?
    };
    let result = fit_shifted_power_law(&curve, mode).map_err(runtime)?;

    let fit_path = args.out_dir.join("fit.json");
    let fit_json = serde_json::to_string_pretty(&result).map_err(runtime)?;
    write_file(&fit_path, fit_json.as_bytes(), &mut manifest)?;

    let curve_path = args.out_dir.join("violation_curve.csv");
    let mut buf = Vec::new();
    write_curve_csv(&curve, &mut buf).map_err(runtime)?;
    write_file(&curve_path, &buf, &mut manifest)?;

    let loglog_path = args.out_dir.join("violation_curve_loglog.csv");
    let mut buf = Vec::new();
    write_loglog_csv(&curve, result.a, &mut buf).map_err(runtime)?;
    write_file(&loglog_path, &buf, &mut manifest)?;

    manifest.write(&args.out_dir).map_err(runtime)
}

/// Parses a model spec: `gaussian`, `laplace`, `student-t:<nu>`,
/// `spl:<a>,<k>`, or `spl:fit` (free-scale fit on the scored residuals).
fn parse_model_spec(spec: &str, values: &[f64]) -> Result<ResidualLaw, CliError> {
    let bad = |msg: String| invalid(anyhow!("model spec `{spec}`: {msg}"));
    match spec {
        "gaussian" => Ok(ResidualLaw::gaussian()),
        "laplace" => Ok(ResidualLaw::laplace()),
        "spl:fit" => {
            let curve =
                empirical_violation_curve(values, &ThresholdPolicy::default()).map_err(runtime)?;
            let fitted = fit_shifted_power_law(&curve, FitMode::FreeA).map_err(runtime)?;
            ResidualLaw::shifted_power_law(fitted.a, fitted.k).map_err(runtime)
        }
        _ => {
            if let Some(nu) = spec.strip_prefix("student-t:") {
                let nu: u32 = nu
                    .parse()
                    .map_err(|_| bad(format!("degrees of freedom `{nu}` not an integer")))?;
                return ResidualLaw::student_t(nu).map_err(|e: LawError| bad(e.to_string()));
            }
            if let Some(params) = spec.strip_prefix("spl:") {
                let parts: Vec<&str> = params.split(',').collect();
                if parts.len() != 2 {
                    return Err(bad("expected spl:<a>,<k>".to_string()));
                }
                let a: f64 = parts[0]
                    .parse()
                    .map_err(|_| bad(format!("scale `{}` not numeric", parts[0])))?;
                let k: f64 = parts[1]
                    .parse()
                    .map_err(|_| bad(format!("exponent `{}` not numeric", parts[1])))?;
                return ResidualLaw::shifted_power_law(a, k)
                    .map_err(|e: LawError| bad(e.to_string()));
            }
            Err(bad(
                "expected gaussian | laplace | student-t:<nu> | spl:<a>,<k> | spl:fit".to_string(),
            ))
        }
    }
}

pub fn eval(args: &EvalArgs) -> CliResult {
    ensure_out_dir(&args.out_dir)?;
    if args.models.is_empty() {
        return Err(invalid(anyhow!("at least one --model is required")));
    }
    let mut manifest = ManifestBuilder::new(
        "eval",
        serde_json::json!({
            "residuals": args.residuals.display().to_string(),
            "models": args.models,
            "bins": args.bins,
            "ll_step": args.ll_step,
        }),
    );
    let (values, bytes) = read_residual_values(&args.residuals)?;
    manifest.input(&args.residuals, &bytes);
    let dataset = file_stem(&args.residuals);

    let binning = Binning {
        half_domain: None,
        bins: args.bins,
    };
    let mut rows = Vec::new();
    for spec in &args.models {
        let law = parse_model_spec(spec, &values)?;
        let report = evaluate(&values, &law, &dataset, &binning, args.ll_step).map_err(runtime)?;
        rows.push(report);
    }

    let metrics_path = args.out_dir.join("metrics.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "model",
        "rp5",
        "rp5_tail_empty",
        "log_likelihood",
        "domain_l",
        "kl",
    ])
    .map_err(runtime)?;
    for r in &rows {
        w.write_record([
            r.model.clone(),
            r.rp5.to_string(),
            r.rp5_tail_empty.to_string(),
            r.log_likelihood.to_string(),
            r.domain_l.to_string(),
            r.kl.to_string(),
        ])
        .map_err(runtime)?;
    }
    let buf = w.into_inner().map_err(|e| runtime(anyhow!("{e}")))?;
    write_file(&metrics_path, &buf, &mut manifest)?;

    let json_path = args.out_dir.join("metrics.json");
    let json = serde_json::to_string_pretty(&rows).map_err(runtime)?;
    write_file(&json_path, json.as_bytes(), &mut manifest)?;

    manifest.write(&args.out_dir).map_err(runtime)
}

/// Simulation config file schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SimFileConfig {
    dataset: PathBuf,
    schema: String,
    #[serde(default)]
    recording_dt: Option<f64>,
    predictor: PathBuf,
    #[serde(default)]
    predictor_lateral: Option<PathBuf>,
    law: LawSpec,
    n_rollouts: usize,
    steps_per_rollout: usize,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default = "default_t_steps")]
    t_steps: usize,
    #[serde(default)]
    clamps: Option<Clamps>,
    seeds: Vec<u64>,
    #[serde(default)]
    lateral_enabled: bool,
    #[serde(default)]
    road_length: Option<f64>,
    #[serde(default)]
    start_frame: Option<i64>,
}

fn default_dt() -> f64 {
    0.2
}

fn default_t_steps() -> usize {
    12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum LawSpec {
    Spl {
        a: f64,
        k: f64,
        #[serde(default)]
        truncation: Option<f64>,
    },
    Gaussian {
        #[serde(default)]
        truncation: Option<f64>,
    },
    Laplace {
        #[serde(default)]
        truncation: Option<f64>,
    },
    StudentT {
        nu: u32,
        #[serde(default)]
        truncation: Option<f64>,
    },
}

impl LawSpec {
    fn build(&self) -> Result<ResidualLaw, LawError> {
        let (law, trunc) = match self {
            LawSpec::Spl { a, k, truncation } => {
                (ResidualLaw::shifted_power_law(*a, *k)?, *truncation)
            }
            LawSpec::Gaussian { truncation } => (ResidualLaw::gaussian(), *truncation),
            LawSpec::Laplace { truncation } => (ResidualLaw::laplace(), *truncation),
            LawSpec::StudentT { nu, truncation } => (ResidualLaw::student_t(*nu)?, *truncation),
        };
        match trunc {
            Some(bound) => law.with_truncation(bound),
            None => Ok(law),
        }
    }
}

pub fn simulate(args: &SimulateArgs) -> CliResult {
    ensure_out_dir(&args.out_dir)?;
    let config_bytes = std::fs::read(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))
        .map_err(invalid)?;
    let config: SimFileConfig = serde_json::from_slice(&config_bytes)
        .with_context(|| format!("parsing config {}", args.config.display()))
        .map_err(invalid)?;

    let mut manifest =
        ManifestBuilder::new("simulate", serde_json::to_value(&config).map_err(runtime)?);
    manifest.input(&args.config, &config_bytes);

    if config.seeds.len() != config.n_rollouts {
        return Err(invalid(anyhow!(
            "config: need exactly one seed per rollout ({} seeds, {} rollouts)",
            config.seeds.len(),
            config.n_rollouts
        )));
    }
    let law = config.law.build().map_err(invalid)?;
    let schema = SchemaMap::by_name(&config.schema).map_err(invalid)?;

    let data_bytes = std::fs::read(&config.dataset)
        .with_context(|| format!("reading dataset {}", config.dataset.display()))
        .map_err(invalid)?;
    manifest.input(&config.dataset, &data_bytes);
    let table = parse_trajectory_csv(&data_bytes, &schema, config.recording_dt).map_err(invalid)?;
    let table = resample(&table, config.dt).map_err(invalid)?;

    let pred_bytes = std::fs::read(&config.predictor)
        .with_context(|| format!("reading predictor {}", config.predictor.display()))
        .map_err(invalid)?;
    manifest.input(&config.predictor, &pred_bytes);
    let long_model = PredictorHandle::load(&config.predictor).map_err(invalid)?;
    if long_model.direction != Direction::Longitudinal {
        return Err(invalid(anyhow!(
            "longitudinal predictor file carries direction {}",
            long_model.direction.as_str()
        )));
    }
    let lat_model = match (&config.predictor_lateral, config.lateral_enabled) {
        (Some(path), _) => {
            let bytes = std::fs::read(path)
                .with_context(|| format!("reading predictor {}", path.display()))
                .map_err(invalid)?;
            manifest.input(path, &bytes);
            let handle = PredictorHandle::load(path).map_err(invalid)?;
            if handle.direction != Direction::Lateral {
                return Err(invalid(anyhow!(
                    "lateral predictor file carries direction {}",
                    handle.direction.as_str()
                )));
            }
            Some(handle)
        }
        (None, true) => {
            return Err(invalid(anyhow!(
                "lateral_enabled requires predictor_lateral"
            )))
        }
        (None, false) => None,
    };

    let rollout_config = RolloutConfig {
        n_rollouts: config.n_rollouts,
        steps_per_rollout: config.steps_per_rollout,
        seeds: config.seeds.clone(),
        law,
        opts: SimOptions {
            dt: config.dt,
            t_steps: config.t_steps,
            clamps: config.clamps.unwrap_or_default(),
            lateral_enabled: config.lateral_enabled,
            road_length: config.road_length,
            start_frame: config.start_frame,
        },
    };
    let report = run_rollouts(
        &table,
        &long_model,
        lat_model.as_ref().map(|h| h as &dyn AccelModel),
        &rollout_config,
    )
    .map_err(runtime)?;

    let report_path = args.out_dir.join("crash_report.json");
    let report_json = serde_json::to_string_pretty(&report).map_err(runtime)?;
    write_file(&report_path, report_json.as_bytes(), &mut manifest)?;

    let events_path = args.out_dir.join("crash_events.csv");
    let mut buf = Vec::new();
    write_events_csv(&report.events, &mut buf).map_err(runtime)?;
    write_file(&events_path, &buf, &mut manifest)?;

    manifest.write(&args.out_dir).map_err(runtime)
}

pub fn ztest(args: &ZtestArgs) -> CliResult {
    ensure_out_dir(&args.out_dir)?;
    let mut manifest = ManifestBuilder::new(
        "ztest",
        serde_json::json!({
            "report": args.report.display().to_string(),
            "baseline_per_mile": args.baseline,
        }),
    );
    let report_bytes = std::fs::read(&args.report)
        .with_context(|| format!("reading report {}", args.report.display()))
        .map_err(invalid)?;
    manifest.input(&args.report, &report_bytes);
    let mut report: CrashReport = serde_json::from_slice(&report_bytes)
        .with_context(|| format!("parsing report {}", args.report.display()))
        .map_err(invalid)?;

    let test = crash_rate_z_test(args.baseline, report.crash_count, report.vmt_miles).map_err(
        |e| match e {
            ZtestError::BaselineOutOfRange { .. } => invalid(e),
            ZtestError::ExposureNotPositive { .. } => runtime(e),
        },
    )?;
    println!(
        "z = {:.4} ({}; observed {:.4}/M VMT vs baseline {:.4}/M VMT over {:.1} mi)",
        test.z,
        if test.reject {
            "reject at 95%"
        } else {
            "consistent at 95%"
        },
        test.observed_per_million_vmt,
        args.baseline * 1e6,
        test.miles,
    );
    report.rate_test = Some(test);

    let out_path = args.out_dir.join("crash_report_ztest.json");
    let json = serde_json::to_string_pretty(&report).map_err(runtime)?;
    write_file(&out_path, json.as_bytes(), &mut manifest)?;

    manifest.write(&args.out_dir).map_err(runtime)
}
