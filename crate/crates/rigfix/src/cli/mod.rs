//! Command-line front end: match, solve, rectify, simulate, and model
//! comparison over files on disk.
//!
//! Exit codes: 0 success, 2 I/O error, 3 config error, 4 mono-fallback
//! (the gate rejected the solution; the report is still written).

mod config;

pub use config::PipelineConfig;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::camera::Intrinsics;
use crate::correspond::{harris_corners, match_hierarchical, MatchSet};
use crate::error::{Error, Result};
use crate::gate::{evaluate, GateDecision};
use crate::gray::GrayImage;
use crate::io::{
    load_gray, read_matches, save_gray, scatter_svg, write_matches, write_scatter, SceneFile,
    SolveReport, StatsReport, TruthReport,
};
use crate::rectify::{apply_to_matches, build_maps, crop_valid, stats, warp};
use crate::sim::{generate_scene, render_matches, render_texture_pair, SimConfig};
use crate::solver::{robust_solve, ModelKind, RectificationSolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_FALLBACK: i32 = 4;

/// Maps an error to the documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Image(_) | Error::Parse(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(name = "rigfix", version, about = "Online stereo self-rectification")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect corners in the left image and match them into the right.
    Match(MatchArgs),
    /// Estimate rig corrections from a match CSV and gate the result.
    Solve(SolveArgs),
    /// Warp a stereo pair with a solve report and measure dy statistics.
    Rectify(RectifyArgs),
    /// Generate ground-truth scenarios, match fixtures, and image pairs.
    Simulate(SimulateArgs),
    /// Run the 3- and 4-parameter models over a fixture directory.
    CompareModels(CompareArgs),
}

#[derive(Debug, Args, Clone)]
struct ConfigArgs {
    /// JSON pipeline config; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Left camera focal length, pixels.
    #[arg(long)]
    f0: Option<f64>,
    #[arg(long)]
    cx0: Option<f64>,
    #[arg(long)]
    cy0: Option<f64>,
    /// Right camera focal length, pixels.
    #[arg(long)]
    f1: Option<f64>,
    #[arg(long)]
    cx1: Option<f64>,
    #[arg(long)]
    cy1: Option<f64>,
    /// Model: three_param, four_param, five_param, six_param.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on detected corners.
    #[arg(long)]
    max_corners: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let file = File::open(path)?;
                serde_json::from_reader(BufReader::new(file))?
            }
            None => PipelineConfig::default(),
        };
        if let Some(f) = self.f0 {
            cfg.k0.get_or_insert(PipelineConfig::default_k()).f = f;
        }
        if let Some(cx) = self.cx0 {
            cfg.k0.get_or_insert(PipelineConfig::default_k()).cx = cx;
        }
        if let Some(cy) = self.cy0 {
            cfg.k0.get_or_insert(PipelineConfig::default_k()).cy = cy;
        }
        if let Some(f) = self.f1 {
            cfg.k1.get_or_insert(PipelineConfig::default_k()).f = f;
        }
        if let Some(cx) = self.cx1 {
            cfg.k1.get_or_insert(PipelineConfig::default_k()).cx = cx;
        }
        if let Some(cy) = self.cy1 {
            cfg.k1.get_or_insert(PipelineConfig::default_k()).cy = cy;
        }
        if let Some(model) = &self.model {
            cfg.solver.model = parse_model(model)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(mc) = self.max_corners {
            cfg.detector.max_corners = mc;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_model(s: &str) -> Result<ModelKind> {
    match s {
        "three" | "three_param" | "3" => Ok(ModelKind::ThreeParam),
        "four" | "four_param" | "4" => Ok(ModelKind::FourParam),
        "five" | "five_param" | "5" => Ok(ModelKind::FiveParam),
        "six" | "six_param" | "6" => Ok(ModelKind::SixParam),
        other => Err(Error::Config(format!("unknown model '{other}'"))),
    }
}

#[derive(Debug, Args)]
struct MatchArgs {
    left: PathBuf,
    right: PathBuf,
    /// Output match CSV.
    #[arg(long, default_value = "matches.csv")]
    out: PathBuf,
    #[command(flatten)]
    common: ConfigArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    matches: PathBuf,
    /// Output JSON report.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[command(flatten)]
    common: ConfigArgs,
}

#[derive(Debug, Args)]
struct RectifyArgs {
    left: PathBuf,
    right: PathBuf,
    report: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "rectified")]
    out_dir: PathBuf,
    #[command(flatten)]
    common: ConfigArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario config JSON (defaults apply when omitted).
    sim_config: Option<PathBuf>,
    #[arg(long, default_value = "simulated")]
    out_dir: PathBuf,
    /// Run N scenarios with consecutive seeds and emit a model-comparison
    /// success table alongside the per-scenario fixtures.
    #[arg(long)]
    batch: Option<usize>,
    #[command(flatten)]
    common: ConfigArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Directory of match CSV fixtures (optional `<stem>.truth.json`
    /// sidecars enable the focal-drift error column).
    fixtures: PathBuf,
    #[arg(long, default_value = "table.csv")]
    out: PathBuf,
    #[command(flatten)]
    common: ConfigArgs,
}

/// Parses argv and runs the selected command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version go to stdout with success.
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Match(args) => cmd_match(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Rectify(args) => cmd_rectify(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::CompareModels(args) => cmd_compare_models(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rigfix: {e}");
            exit_code(&e)
        }
    }
}

fn intrinsics_or_default(k: Option<Intrinsics>, img: &GrayImage) -> Result<Intrinsics> {
    let k = k.unwrap_or(Intrinsics {
        f: img.width.max(img.height) as f64,
        cx: img.width as f64 / 2.0,
        cy: img.height as f64 / 2.0,
    });
    k.validate()?;
    Ok(k)
}

fn match_pair(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<MatchSet> {
    let k0 = intrinsics_or_default(cfg.k0, left)?;
    let k1 = intrinsics_or_default(cfg.k1, right)?;
    let corners = harris_corners(left, &cfg.detector)?;
    match_hierarchical(left, right, &corners, &cfg.matcher, &k0, &k1)
}

fn cmd_match(args: &MatchArgs) -> Result<i32> {
    let cfg = args.common.load()?;
    let (left, _) = load_gray(&args.left)?;
    let (right, _) = load_gray(&args.right)?;
    let set = match_pair(&left, &right, &cfg)?;
    let mut out = BufWriter::new(File::create(&args.out)?);
    write_matches(&mut out, &set)?;
    out.flush()?;
    println!("{} matches -> {}", set.len(), args.out.display());
    Ok(EXIT_OK)
}

fn solve_and_gate(set: &MatchSet, cfg: &PipelineConfig) -> (SolveReport, bool) {
    match robust_solve(set, &cfg.solver) {
        Ok(sol) => {
            let gate = evaluate(&sol, &cfg.gate);
            let stereo = gate.is_stereo();
            (SolveReport::from_solution(&sol, gate, set.k1.f), stereo)
        }
        Err(e) => (
            SolveReport::from_failure(cfg.solver.model, set.len(), e.to_string()),
            false,
        ),
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let cfg = args.common.load()?;
    let k0 = cfg.k0.unwrap_or(PipelineConfig::default_k());
    let k1 = cfg.k1.unwrap_or(PipelineConfig::default_k());
    let file = BufReader::new(File::open(&args.matches)?);
    let set = read_matches(file, k0, k1, 0, 0)?;

    let (report, stereo) = solve_and_gate(&set, &cfg);
    let mut out = BufWriter::new(File::create(&args.out)?);
    serde_json::to_writer_pretty(&mut out, &report)?;
    out.write_all(b"\n")?;
    out.flush()?;
    println!(
        "{}: {} ({} matches, {:.1}% inliers) -> {}",
        if stereo { "stereo" } else { "mono-fallback" },
        format_reasons(&report.gate),
        report.match_count,
        report.inlier_rate * 100.0,
        args.out.display()
    );
    Ok(if stereo { EXIT_OK } else { EXIT_FALLBACK })
}

fn format_reasons(gate: &GateDecision) -> String {
    if gate.reasons.is_empty() {
        "accepted".to_string()
    } else {
        format!("{:?}", gate.reasons)
    }
}

fn output_name(dir: &Path, stem: &str, input: &Path) -> PathBuf {
    let ext = input
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("pgm");
    dir.join(format!("{stem}.{ext}"))
}

fn cmd_rectify(args: &RectifyArgs) -> Result<i32> {
    let cfg = args.common.load()?;
    let report: SolveReport =
        serde_json::from_reader(BufReader::new(File::open(&args.report)?))?;
    if !report.gate.is_stereo() {
        eprintln!(
            "rigfix: report is a mono-fallback ({}); not rectifying",
            format_reasons(&report.gate)
        );
        return Ok(EXIT_FALLBACK);
    }
    let sol: RectificationSolution = report.to_solution();

    let (left, depth_l) = load_gray(&args.left)?;
    let (right, depth_r) = load_gray(&args.right)?;
    let k0 = intrinsics_or_default(cfg.k0, &left)?;
    let k1 = intrinsics_or_default(cfg.k1, &right)?;

    fs::create_dir_all(&args.out_dir)?;
    let (map0, map1) = build_maps(&k0, &k1, &sol)?;
    let warped_l = warp(&left, &map0);
    let warped_r = warp(&right, &map1);
    save_gray(
        &output_name(&args.out_dir, "left_rectified", &args.left),
        &warped_l.image,
        depth_l,
    )?;
    save_gray(
        &output_name(&args.out_dir, "right_rectified", &args.right),
        &warped_r.image,
        depth_r,
    )?;
    let (crop_l, _) = crop_valid(&warped_l)?;
    let (crop_r, _) = crop_valid(&warped_r)?;
    save_gray(
        &output_name(&args.out_dir, "left_rectified_cropped", &args.left),
        &crop_l,
        depth_l,
    )?;
    save_gray(
        &output_name(&args.out_dir, "right_rectified_cropped", &args.right),
        &crop_r,
        depth_r,
    )?;

    // Before/after analysis on freshly matched features.
    let before = match_pair(&left, &right, &cfg)?;
    if before.is_empty() {
        eprintln!("rigfix: no matches for the scatter analysis; images written");
        return Ok(EXIT_OK);
    }
    let after = apply_to_matches(&before, &sol)?;
    let stats_report = StatsReport {
        before: stats(&before, before.k1.f)?,
        after: stats(&after, after.k1.f)?,
    };
    let mut out = BufWriter::new(File::create(args.out_dir.join("stats.json"))?);
    serde_json::to_writer_pretty(&mut out, &stats_report)?;
    out.write_all(b"\n")?;
    out.flush()?;

    let px = |set: &MatchSet| -> Vec<(f64, f64)> {
        let f = set.k1.f;
        set.matches.iter().map(|m| (m.dx * f, m.dy * f)).collect()
    };
    let before_px = px(&before);
    let after_px = px(&after);
    let mut sc = BufWriter::new(File::create(args.out_dir.join("scatter.csv"))?);
    write_scatter(&mut sc, &before_px, &after_px)?;
    sc.flush()?;
    fs::write(
        args.out_dir.join("scatter.svg"),
        scatter_svg(&before_px, &after_px),
    )?;

    println!(
        "rectified pair -> {} (|dy|<1px: {:.1}% -> {:.1}%)",
        args.out_dir.display(),
        stats_report.before.fraction_dy_below_1px * 100.0,
        stats_report.after.fraction_dy_below_1px * 100.0
    );
    Ok(EXIT_OK)
}

fn load_sim_config(args: &SimulateArgs, cfg: &PipelineConfig) -> Result<SimConfig> {
    let mut sim: SimConfig = match &args.sim_config {
        Some(path) => serde_json::from_reader(BufReader::new(File::open(path)?))?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cfg.seed {
        sim.seed = seed;
    }
    if let Ok(seed) = std::env::var("RIGFIX_SEED") {
        sim.seed = seed
            .parse()
            .map_err(|e| Error::Config(format!("RIGFIX_SEED: {e}")))?;
    }
    Ok(sim)
}

fn write_fixture(dir: &Path, stem: &str, set: &MatchSet, truth: &TruthReport) -> Result<()> {
    let mut csv = BufWriter::new(File::create(dir.join(format!("{stem}.csv")))?);
    write_matches(&mut csv, set)?;
    csv.flush()?;
    let mut t = BufWriter::new(File::create(dir.join(format!("{stem}.truth.json")))?);
    serde_json::to_writer_pretty(&mut t, truth)?;
    t.write_all(b"\n")?;
    t.flush()?;
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let cfg = args.common.load()?;
    let sim = load_sim_config(args, &cfg)?;
    fs::create_dir_all(&args.out_dir)?;

    if let Some(n) = args.batch {
        if n == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        let rows = run_batch(&sim, n, &cfg, &args.out_dir)?;
        let table_path = args.out_dir.join("table.csv");
        write_model_table(&table_path, &rows)?;
        print_model_table(&rows);
        return Ok(EXIT_OK);
    }

    let scene = generate_scene(&sim)?;
    let rendered = render_matches(&scene, sim.linearized)?;
    let truth = TruthReport::from_scene(&scene);
    write_fixture(&args.out_dir, "matches", &rendered.set, &truth)?;

    let scene_file = SceneFile {
        config: sim.clone(),
        truth,
        points: scene.points.clone(),
    };
    let mut out = BufWriter::new(File::create(args.out_dir.join("scene.json"))?);
    serde_json::to_writer_pretty(&mut out, &scene_file)?;
    out.write_all(b"\n")?;
    out.flush()?;

    if sim.emit_images {
        let (left, right, _) = render_texture_pair(&sim)?;
        save_gray(
            &args.out_dir.join("left.pgm"),
            &left,
            crate::io::ImageDepth::Eight,
        )?;
        save_gray(
            &args.out_dir.join("right.pgm"),
            &right,
            crate::io::ImageDepth::Eight,
        )?;
    }
    println!(
        "scenario seed {} ({} matches, {} skipped) -> {}",
        sim.seed,
        rendered.set.len(),
        rendered.skipped,
        args.out_dir.display()
    );
    Ok(EXIT_OK)
}

/// Aggregate row of the model-comparison table.
#[derive(Debug, Clone)]
pub struct ModelRow {
    pub model: ModelKind,
    pub scenarios: usize,
    pub successes: usize,
    pub median_inlier_rate: f64,
    /// Mean |d_f error| over gated-successful scenarios with truth, when
    /// available.
    pub mean_abs_df_error: Option<f64>,
}

fn summarize_model(
    model: ModelKind,
    outcomes: &[ModelOutcome],
) -> ModelRow {
    let successes: Vec<&ModelOutcome> =
        outcomes.iter().filter(|(ok, _, _)| *ok).collect();
    let mut inlier_rates: Vec<f64> = successes.iter().map(|(_, r, _)| *r).collect();
    inlier_rates.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let median_inlier = if inlier_rates.is_empty() {
        0.0
    } else if inlier_rates.len() % 2 == 1 {
        inlier_rates[inlier_rates.len() / 2]
    } else {
        0.5 * (inlier_rates[inlier_rates.len() / 2 - 1] + inlier_rates[inlier_rates.len() / 2])
    };
    let df_errors: Vec<f64> = successes.iter().filter_map(|(_, _, e)| *e).collect();
    let mean_df = if df_errors.is_empty() {
        None
    } else {
        Some(df_errors.iter().sum::<f64>() / df_errors.len() as f64)
    };
    ModelRow {
        model,
        scenarios: outcomes.len(),
        successes: successes.len(),
        median_inlier_rate: median_inlier,
        mean_abs_df_error: mean_df,
    }
}

/// (gated success, inlier rate, |d_f| error when truth is known).
type ModelOutcome = (bool, f64, Option<f64>);

/// Runs both comparison models over one fixture.
fn eval_models(
    set: &MatchSet,
    truth_df: Option<f64>,
    cfg: &PipelineConfig,
) -> Vec<(ModelKind, ModelOutcome)> {
    [ModelKind::ThreeParam, ModelKind::FourParam]
        .into_iter()
        .map(|model| {
            let mut solver_cfg = cfg.solver.clone();
            solver_cfg.model = model;
            let outcome = match robust_solve(set, &solver_cfg) {
                Ok(sol) => {
                    let gate = evaluate(&sol, &cfg.gate);
                    let df_err = truth_df.map(|t| (sol.d_f - t).abs());
                    (gate.is_stereo(), sol.inlier_rate, df_err)
                }
                Err(_) => (false, 0.0, None),
            };
            (model, outcome)
        })
        .collect()
}

fn run_batch(
    base: &SimConfig,
    n: usize,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<Vec<ModelRow>> {
    let mut three = Vec::with_capacity(n);
    let mut four = Vec::with_capacity(n);
    for i in 0..n {
        let sim = SimConfig {
            seed: base.seed.wrapping_add(i as u64),
            ..base.clone()
        };
        let scene = generate_scene(&sim)?;
        let rendered = render_matches(&scene, sim.linearized)?;
        let truth = TruthReport::from_scene(&scene);
        write_fixture(out_dir, &format!("scenario_{i:03}"), &rendered.set, &truth)?;
        for (model, outcome) in eval_models(&rendered.set, Some(scene.d_f), cfg) {
            match model {
                ModelKind::ThreeParam => three.push(outcome),
                _ => four.push(outcome),
            }
        }
    }
    Ok(vec![
        summarize_model(ModelKind::ThreeParam, &three),
        summarize_model(ModelKind::FourParam, &four),
    ])
}

fn model_label(m: ModelKind) -> &'static str {
    match m {
        ModelKind::ThreeParam => "three_param",
        ModelKind::FourParam => "four_param",
        ModelKind::FiveParam => "five_param",
        ModelKind::SixParam => "six_param",
    }
}

fn write_model_table(path: &Path, rows: &[ModelRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "model,scenarios,successes,success_rate,median_inlier_rate,mean_abs_df_error"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{}",
            model_label(r.model),
            r.scenarios,
            r.successes,
            r.successes as f64 / r.scenarios.max(1) as f64,
            r.median_inlier_rate,
            r.mean_abs_df_error
                .map_or("n/a".to_string(), |e| format!("{e:.8}")),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn print_model_table(rows: &[ModelRow]) {
    println!("model        success         median inliers   |d_f| error");
    for r in rows {
        println!(
            "{:<12} {:>3}/{:<3} = {:>5.1}%   {:>6.1}%          {}",
            model_label(r.model),
            r.successes,
            r.scenarios,
            100.0 * r.successes as f64 / r.scenarios.max(1) as f64,
            100.0 * r.median_inlier_rate,
            r.mean_abs_df_error
                .map_or("n/a".to_string(), |e| format!("{:.4}%", e * 100.0)),
        );
    }
}

fn cmd_compare_models(args: &CompareArgs) -> Result<i32> {
    let cfg = args.common.load()?;
    let k0 = cfg.k0.unwrap_or(PipelineConfig::default_k());
    let k1 = cfg.k1.unwrap_or(PipelineConfig::default_k());

    let mut fixtures: Vec<PathBuf> = fs::read_dir(&args.fixtures)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n != "table.csv")
        })
        .collect();
    fixtures.sort();
    if fixtures.is_empty() {
        return Err(Error::Config(format!(
            "no match CSV fixtures in {}",
            args.fixtures.display()
        )));
    }

    let mut three = Vec::new();
    let mut four = Vec::new();
    for path in &fixtures {
        let file = BufReader::new(File::open(path)?);
        let set = read_matches(file, k0, k1, 0, 0)?;
        let truth_path = path.with_extension("truth.json");
        let truth_df = if truth_path.exists() {
            let t: TruthReport =
                serde_json::from_reader(BufReader::new(File::open(&truth_path)?))?;
            Some(t.d_f)
        } else {
            None
        };
        for (model, outcome) in eval_models(&set, truth_df, &cfg) {
            match model {
                ModelKind::ThreeParam => three.push(outcome),
                _ => four.push(outcome),
            }
        }
    }
    let rows = vec![
        summarize_model(ModelKind::ThreeParam, &three),
        summarize_model(ModelKind::FourParam, &four),
    ];
    write_model_table(&args.out, &rows)?;
    print_model_table(&rows);
    Ok(EXIT_OK)
}
