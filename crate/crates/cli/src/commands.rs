use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use socmed_core::one_phase::{
    bisect_threshold, calibrate_null, monthly_smi, read_posts_csv, sensitivity_sweep, sigma_from_cv, bundled_series,
    validation_test, CalibrationSummary, IndexSeries, PairedSeries, SensitivityCurve, TestResult,
};
use socmed_core::quality::{assess_quality, QualityReport};
use socmed_core::simulator::{generate, GroundTruth, SimConfig, SimOutput};
use socmed_core::two_phase::{
    build_pseudo_survey, merge_clean, read_geo_jsonl, read_jsonl, write_json, write_jsonl, Gazetteer,
    PipelineErrorReport, PipelineParams, PseudoSurveyRecord,
};

use crate::args::*;
use crate::manifest::{manifest_path, ManifestBuilder};
use crate::usage;

pub const BUILTIN_SERIES: &str = "@bundled";

pub fn dispatch(cli: &Cli) -> Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| usage("--out is required"))?;
    match &cli.command {
        Command::Smi(a) => smi(a, out, cli.format.unwrap_or(Format::Csv)).map(drop),
        Command::Validate(a) => validate(a, out, cli.format.unwrap_or(Format::Json)).map(|v| {
            println!("{}", serde_json::to_string(&v).expect("serializable"));
        }),
        Command::Sensitivity(a) => sensitivity(a, out, cli.format.unwrap_or(Format::Csv)).map(|s| {
            println!("{}", serde_json::to_string(&s.threshold).expect("serializable"));
        }),
        Command::Calibrate(a) => {
            let seed = cli.seed.ok_or_else(|| usage("calibrate needs an explicit --seed"))?;
            calibrate(a, out, seed).map(|s| {
                println!("{}", serde_json::to_string(&s).expect("serializable"));
            })
        }
        Command::Pipeline(a) => pipeline(a, out).map(|p| {
            if !p.rejects.is_empty() {
                eprintln!(
                    "warning: {} malformed record(s) rejected, see {}",
                    p.rejects.len(),
                    out.join(REJECTS_FILE).display()
                );
            }
        }),
        Command::Simulate(a) => simulate(a, out, cli.seed).map(drop),
        Command::Quality(a) => quality(a, out).map(|q| {
            println!("{}", serde_json::to_string(&q).expect("serializable"));
        }),
    }
}

fn write_manifest(builder: ManifestBuilder, out: &Path, is_dir: bool, outputs: Vec<PathBuf>) -> Result<()> {
    let manifest = builder.finish(outputs);
    write_json(&manifest_path(out, is_dir), &manifest)?;
    Ok(())
}

fn load_series(spec: &str) -> Result<PairedSeries> {
    if spec == BUILTIN_SERIES {
        return Ok(bundled_series());
    }
    PairedSeries::from_csv(Path::new(spec)).with_context(|| format!("reading series {spec}"))
}

fn choose_sigma(series: &PairedSeries, cv: Option<f64>, sigma_column: bool) -> Result<Vec<f64>> {
    match (cv, sigma_column) {
        (Some(_), true) | (None, false) => Err(usage("give exactly one of --cv and --sigma-column")),
        (Some(eta), false) => Ok(sigma_from_cv(&series.cci_series(), eta)?),
        (None, true) => series
            .sigma
            .clone()
            .ok_or_else(|| usage("--sigma-column given but the series has no sigma column")),
    }
}

pub fn smi(args: &SmiArgs, out: &Path, format: Format) -> Result<IndexSeries> {
    let mut m = ManifestBuilder::start("smi", args, None);
    m.input(&args.posts);
    let (posts, rejects) = read_posts_csv(&args.posts)?;
    if !rejects.is_empty() {
        let lines: Vec<String> = rejects.iter().map(|r| r.to_string()).collect();
        bail!("{}: {} bad record(s)\n{}", args.posts.display(), rejects.len(), lines.join("\n"));
    }
    if posts.is_empty() {
        bail!("no posts");
    }
    let series = monthly_smi(&posts)?;
    match format {
        Format::Csv => series.write_smi_csv(out)?,
        Format::Json => write_json(out, &series)?,
    }
    write_manifest(m, out, false, vec![out.to_path_buf()])?;
    Ok(series)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidateOutput {
    #[serde(flatten)]
    pub result: TestResult,
    pub alpha: f64,
    pub reject: bool,
    pub cv: Option<f64>,
}

pub fn validate(args: &ValidateArgs, out: &Path, format: Format) -> Result<ValidateOutput> {
    let mut m = ManifestBuilder::start("validate", args, None);
    m.input(&args.input.series);
    let series = load_series(&args.input.series)?;
    let sigma = choose_sigma(&series, args.cv, args.sigma_column)?;
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(usage(format!("alpha must lie in [0, 1], got {}", args.alpha)));
    }
    let result = validation_test(&series.cci_series(), &series.smi_series(), &sigma, args.deleted_index)?;
    let output = ValidateOutput {
        reject: result.rejects(args.alpha),
        result,
        alpha: args.alpha,
        cv: args.cv,
    };
    match format {
        Format::Json => write_json(out, &output)?,
        Format::Csv => {
            let r = &output.result;
            let body = format!(
                "D,df,p_value,deleted_index,alpha,reject\n{},{},{},{},{},{}\n",
                r.statistic, r.df, r.p_value, r.deleted_index, output.alpha, output.reject
            );
            fs::write(out, body).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    write_manifest(m, out, false, vec![out.to_path_buf()])?;
    Ok(output)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdSummary {
    /// Closed form from the scale law.
    pub threshold_eta: Option<f64>,
    /// Bisection on direct test runs, seeded from the grid.
    pub threshold_eta_grid: Option<f64>,
    pub alpha: f64,
    pub df: u32,
    pub unit_statistic: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityOutput {
    pub curve: SensitivityCurve,
    pub threshold: ThresholdSummary,
}

pub fn threshold_path(out: &Path) -> PathBuf {
    out.with_extension("threshold.json")
}

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

pub fn sensitivity(args: &SensitivityArgs, out: &Path, format: Format) -> Result<SensitivityOutput> {
    if !(args.eta_min > 0.0 && args.eta_min < args.eta_max) {
        return Err(usage(format!(
            "need 0 < eta_min < eta_max, got {} and {}",
            args.eta_min, args.eta_max
        )));
    }
    if args.steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    let mut m = ManifestBuilder::start("sensitivity", args, None);
    m.input(&args.input.series);
    let series = load_series(&args.input.series)?;
    let (cci, smi) = (series.cci_series(), series.smi_series());
    let grid = linspace(args.eta_min, args.eta_max, args.steps);
    let curve = sensitivity_sweep(&cci, &smi, &grid, args.alpha)?;
    let threshold = ThresholdSummary {
        threshold_eta: curve.threshold_eta,
        threshold_eta_grid: bisect_threshold(&cci, &smi, &grid, args.alpha, 1e-10)?,
        alpha: args.alpha,
        df: curve.df,
        unit_statistic: curve.unit_statistic,
    };
    let tpath = threshold_path(out);
    match format {
        Format::Csv => curve.write_csv(out)?,
        Format::Json => write_json(out, &curve)?,
    }
    write_json(&tpath, &threshold)?;
    write_manifest(m, out, false, vec![out.to_path_buf(), tpath])?;
    Ok(SensitivityOutput { curve, threshold })
}

pub fn calibrate(args: &CalibrateArgs, out: &Path, seed: u64) -> Result<CalibrationSummary> {
    let mut m = ManifestBuilder::start("calibrate", args, Some(seed));
    m.input(&args.input.series);
    let series = load_series(&args.input.series)?;
    let sigma = choose_sigma(&series, args.cv, args.sigma_column)?;
    let summary = calibrate_null(&sigma, args.mu, args.sims, args.alpha, seed)?;
    write_json(out, &summary)?;
    write_manifest(m, out, false, vec![out.to_path_buf()])?;
    Ok(summary)
}

pub const RECORDS_FILE: &str = "pseudo_survey.jsonl";
pub const REPORT_FILE: &str = "error_report.json";
pub const REJECTS_FILE: &str = "rejects.jsonl";

#[derive(Clone, Debug, Serialize)]
pub struct RejectedRecord {
    pub file: PathBuf,
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub records: Vec<PseudoSurveyRecord>,
    pub report: PipelineErrorReport,
    pub rejects: Vec<RejectedRecord>,
}

pub fn pipeline(args: &PipelineArgs, out_dir: &Path) -> Result<PipelineOutput> {
    let mut m = ManifestBuilder::start("pipeline", args, None);
    for p in [&args.api, &args.broker, &args.gazetteer] {
        m.input(p);
    }
    let params = PipelineParams {
        eps_meters: args.eps,
        min_points: args.min_points,
    };
    if !(params.eps_meters > 0.0) || params.min_points < 1 {
        return Err(usage("need --eps > 0 and --min-points >= 1"));
    }
    let (api, api_bad) = read_geo_jsonl(&args.api)?;
    let (broker, broker_bad) = read_geo_jsonl(&args.broker)?;
    let gazetteer = Gazetteer::from_csv(&args.gazetteer)?;

    let mut rejects: Vec<RejectedRecord> = Vec::new();
    for (file, bad) in [(&args.api, api_bad), (&args.broker, broker_bad)] {
        rejects.extend(bad.into_iter().map(|r| RejectedRecord {
            file: file.clone(),
            line: r.line,
            message: r.message,
        }));
    }
    let parse_rejects = rejects.len();

    let merged = merge_clean(&api, &broker, &args.country);
    for r in &merged.rejects {
        let (file, line) = if r.line <= api.len() {
            (&args.api, r.line)
        } else {
            (&args.broker, r.line - api.len())
        };
        // positions among parsed records, not file lines
        rejects.push(RejectedRecord {
            file: file.clone(),
            line,
            message: format!("record #{line}: {}", r.message),
        });
    }
    let mut report = merged.report;
    report.raw_posts += parse_rejects;
    report.rejected_malformed += parse_rejects;

    let (records, clustering) = build_pseudo_survey(&merged.clean, &gazetteer, params)?;
    report.absorb_clustering(&clustering);

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let outputs = vec![out_dir.join(RECORDS_FILE), out_dir.join(REPORT_FILE), out_dir.join(REJECTS_FILE)];
    write_jsonl(&outputs[0], &records)?;
    write_json(&outputs[1], &report)?;
    write_jsonl(&outputs[2], &rejects)?;
    write_manifest(m, out_dir, true, outputs)?;
    Ok(PipelineOutput {
        records,
        report,
        rejects,
    })
}

pub fn simulate(args: &SimulateArgs, out_dir: &Path, seed: Option<u64>) -> Result<SimOutput> {
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let raw: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: not valid JSON: {e}", args.config.display())))?;
    let mut cfg: SimConfig = serde_json::from_value(raw.clone())
        .map_err(|e| usage(format!("{}: {e}", args.config.display())))?;
    match seed {
        Some(s) => cfg.seed = s,
        None if raw.get("seed").is_none() => {
            return Err(usage("simulate needs a seed, in the config or via --seed"));
        }
        None => {}
    }
    let mut m = ManifestBuilder::start("simulate", &cfg, Some(cfg.seed));
    m.input(&args.config);
    let sim = generate(&cfg)?;
    let mut outputs = sim.write_to_dir(out_dir)?;
    let cfg_path = out_dir.join("sim_config.json");
    write_json(&cfg_path, &cfg)?;
    outputs.push(cfg_path);
    write_manifest(m, out_dir, true, outputs)?;
    Ok(sim)
}

pub fn quality(args: &QualityArgs, out: &Path) -> Result<QualityReport> {
    let mut m = ManifestBuilder::start("quality", args, None);
    m.input(&args.records);
    m.input(&args.ground_truth);
    let (records, bad) = read_jsonl::<PseudoSurveyRecord>(&args.records)?;
    if let Some(first) = bad.first() {
        return Err(usage(format!(
            "{} is not a pseudo survey file ({} bad line(s), first: {first})",
            args.records.display(),
            bad.len()
        )));
    }
    let gt = GroundTruth::from_json_file(&args.ground_truth)
        .map_err(|e| usage(format!("ground truth does not match the expected schema: {e}")))?;
    let report = assess_quality(&records, &gt);
    write_json(out, &report)?;
    write_manifest(m, out, false, vec![out.to_path_buf()])?;
    Ok(report)
}
