//! Command-line front end for the zero-sheet deconvolution library.
//!
//! Subcommands: `gen` writes a reproducible test scene, `convolve` applies
//! a kernel, `detect` runs the determinant-test sweep and reports how many
//! factor zeros each axis carries, `restore` removes the detected factor,
//! and `verify` compares a restored image against a reference.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use zerodeconv::detect::{detect, CEAxis, CEConfig, CEReport, CESize};
use zerodeconv::image::{
    gen_test_scene, read_image, write_atomic, write_image, Image, ImageFormat,
};
use zerodeconv::num::PrecisionContext;
use zerodeconv::restore::{restore, verify, RestoreMode};
use zerodeconv::track::{Direction, SamplingPlan, Stepping};

#[derive(Parser)]
#[command(
    name = "zerodeconv",
    version,
    about = "Blind deconvolution via zero-sheet factor detection"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a reproducible test scene (sharp image, kernels, observed image).
    Gen(GenArgs),
    /// Convolve an image with a kernel.
    Convolve(ConvolveArgs),
    /// Run the detection sweep and write score reports.
    Detect(DetectArgs),
    /// Detect and remove the blur factor, writing the restored image.
    Restore(RestoreArgs),
    /// Compare a restored image against a reference.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Seed for the scene generator.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Draw kernels that separate per axis (exact for literal mode).
    #[arg(long)]
    separable: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ConvolveArgs {
    /// Input image (.pgm or .csv).
    #[arg(long)]
    image: PathBuf,
    /// Kernel image (.pgm or .csv).
    #[arg(long)]
    kernel: PathBuf,
    /// Output path; format follows the extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    U,
    V,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SteppingArg {
    Rotational,
    Additive,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Clockwise,
    Counterclockwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sequential,
    Literal,
}

/// Numerical configuration shared by detect and restore.
#[derive(Args)]
struct CfgArgs {
    /// Probed factor size as ROWSxCOLS; the sample cluster has rows*cols points.
    #[arg(long, default_value = "2x3", value_parser = parse_size)]
    size: (usize, usize),
    /// Angular step between cluster points in radians (default pi/2150).
    #[arg(long)]
    dphi: Option<f64>,
    /// Sample circle radius.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Decimal digits of working precision (minimum 30).
    #[arg(long, default_value_t = 120)]
    digits: u32,
    /// Multiplier applied to |E| before log compression.
    #[arg(long, default_value_t = 1e50)]
    scale: f64,
    /// Flagging threshold on the log score.
    #[arg(long, default_value_t = 5.0)]
    tau: f64,
    /// Number of sweep angles for the consensus vote.
    #[arg(long, default_value_t = 64)]
    sweep: usize,
    /// How consecutive cluster points are generated.
    #[arg(long, value_enum, default_value_t = SteppingArg::Rotational)]
    stepping: SteppingArg,
    /// Direction the cluster advances.
    #[arg(long, value_enum, default_value_t = DirectionArg::Clockwise)]
    direction: DirectionArg,
}

#[derive(Args)]
struct DetectArgs {
    /// Observed image.
    #[arg(long)]
    input: PathBuf,
    /// Which determinant form(s) to run: u tests column zeros, v row zeros.
    #[arg(long, value_enum, default_value_t = AxisArg::Both)]
    axis: AxisArg,
    #[command(flatten)]
    cfg: CfgArgs,
    /// Output directory for report.json and scores.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RestoreArgs {
    /// Observed image.
    #[arg(long)]
    input: PathBuf,
    /// Deflation strategy.
    #[arg(long, value_enum, default_value_t = ModeArg::Sequential)]
    mode: ModeArg,
    #[command(flatten)]
    cfg: CfgArgs,
    /// Output directory for restored.pgm and diagnostics.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restored image.
    #[arg(long)]
    restored: PathBuf,
    /// Reference image to compare against.
    #[arg(long)]
    reference: PathBuf,
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| "expected ROWSxCOLS, e.g. 2x3".to_string())?;
    let m: usize = m.trim().parse().map_err(|_| "bad row count".to_string())?;
    let n: usize = n.trim().parse().map_err(|_| "bad column count".to_string())?;
    if m == 0 || n == 0 {
        return Err("size components must be positive".into());
    }
    Ok((m, n))
}

impl CfgArgs {
    fn build(&self) -> Result<(CEConfig, PrecisionContext)> {
        if self.digits < 30 {
            bail!("--digits must be at least 30");
        }
        let (m, n) = self.size;
        let cfg = CEConfig {
            size: CESize { m, n },
            plan: SamplingPlan {
                rho: self.rho,
                dphi: self.dphi.unwrap_or(std::f64::consts::PI / 2150.0),
                count: m * n,
                direction: match self.direction {
                    DirectionArg::Clockwise => Direction::Clockwise,
                    DirectionArg::Counterclockwise => Direction::Counterclockwise,
                },
                stepping: match self.stepping {
                    SteppingArg::Rotational => Stepping::Rotational,
                    SteppingArg::Additive => Stepping::Additive,
                },
            },
            scale: self.scale,
            tau: self.tau,
            sweep_count: self.sweep,
        };
        cfg.validate()?;
        Ok((cfg, PrecisionContext::new(self.digits)))
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Command::Gen(args) => cmd_gen(args),
        Command::Convolve(args) => cmd_convolve(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Restore(args) => cmd_restore(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    rows: usize,
    cols: usize,
    sum: f64,
    max_pixel: f64,
}

#[derive(Serialize)]
struct Manifest {
    seed: u64,
    separable: bool,
    true_image: ManifestEntry,
    kernels: Vec<ManifestEntry>,
    observed: ManifestEntry,
}

fn entry(img: &Image, path: &str) -> ManifestEntry {
    ManifestEntry {
        path: path.to_string(),
        rows: img.rows(),
        cols: img.cols(),
        sum: img.sum(),
        max_pixel: img.max_pixel(),
    }
}

fn read_img(path: &std::path::Path) -> Result<Image> {
    let fmt = ImageFormat::from_path(path)?;
    read_image(path, fmt).with_context(|| format!("reading {}", path.display()))
}

fn write_img(img: &Image, path: &std::path::Path) -> Result<()> {
    let fmt = ImageFormat::from_path(path)?;
    write_image(img, path, fmt).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let scene = gen_test_scene(args.seed, args.separable);
    let mut kernels = Vec::new();
    write_img(&scene.true_image, &args.out.join("true.pgm"))?;
    for blur in &scene.blurs {
        let name = format!("blur_{}x{}.csv", blur.rows(), blur.cols());
        write_img(blur, &args.out.join(&name))?;
        kernels.push(entry(blur, &name));
    }
    write_img(&scene.observed, &args.out.join("observed.pgm"))?;
    let manifest = Manifest {
        seed: scene.seed,
        separable: scene.separable,
        true_image: entry(&scene.true_image, "true.pgm"),
        kernels,
        observed: entry(&scene.observed, "observed.pgm"),
    };
    write_atomic(
        &args.out.join("manifest.json"),
        &serde_json::to_vec_pretty(&manifest)?,
    )?;
    println!(
        "scene seed {} written to {} ({}x{} observed)",
        scene.seed,
        args.out.display(),
        scene.observed.rows(),
        scene.observed.cols()
    );
    Ok(0)
}

fn cmd_convolve(args: ConvolveArgs) -> Result<i32> {
    let image = read_img(&args.image)?;
    let kernel = read_img(&args.kernel)?;
    let out = image.convolve(&kernel);
    write_img(&out, &args.out)?;
    println!(
        "wrote {} ({}x{})",
        args.out.display(),
        out.rows(),
        out.cols()
    );
    Ok(0)
}

fn requested_axes(axis: AxisArg) -> Vec<CEAxis> {
    match axis {
        AxisArg::U => vec![CEAxis::UForm],
        AxisArg::V => vec![CEAxis::VForm],
        AxisArg::Both => vec![CEAxis::UForm, CEAxis::VForm],
    }
}

fn axis_name(axis: CEAxis) -> &'static str {
    match axis {
        CEAxis::UForm => "u_form",
        CEAxis::VForm => "v_form",
    }
}

fn scores_csv(reports: &[CEReport]) -> String {
    let mut out = String::from("axis,phi_index,phi,branch,absE,score,flagged\n");
    for report in reports {
        let name = axis_name(report.axis);
        for angle in &report.angles {
            for b in &angle.branches {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    name, angle.phi_index, angle.phi, b.branch, b.abs_e, b.score, b.flagged
                ));
            }
        }
    }
    out
}

fn cmd_detect(args: DetectArgs) -> Result<i32> {
    let (cfg, ctx) = args.cfg.build()?;
    let img = read_img(&args.input)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut reports = Vec::new();
    for axis in requested_axes(args.axis) {
        let report = detect(&img, &cfg, axis, &ctx)
            .with_context(|| format!("detection on {}", axis_name(axis)))?;
        println!(
            "{}: consensus {} over {} angles",
            axis_name(axis),
            report.consensus_count,
            report.sweep_count
        );
        reports.push(report);
    }

    let mut json = serde_json::Map::new();
    for report in &reports {
        json.insert(
            axis_name(report.axis).to_string(),
            serde_json::to_value(report)?,
        );
    }
    write_atomic(
        &args.out.join("report.json"),
        &serde_json::to_vec_pretty(&serde_json::Value::Object(json))?,
    )?;
    write_atomic(&args.out.join("scores.csv"), scores_csv(&reports).as_bytes())?;

    let any_detected = reports.iter().any(|r| r.consensus_count >= 1);
    Ok(if any_detected { 0 } else { 1 })
}

#[derive(Serialize)]
struct AxisSummary {
    consensus_count: usize,
    skipped_phi_indices: Vec<usize>,
    angles_at_consensus: usize,
}

#[derive(Serialize)]
struct Diagnostics {
    mode: RestoreMode,
    v_zero_count: usize,
    u_zero_count: usize,
    normalization: NormalizationJson,
    max_imag_residual: f64,
    coerced_v_points: Vec<usize>,
    coerced_u_points: Vec<usize>,
    restored_rows: usize,
    restored_cols: usize,
    u_form: AxisSummary,
    v_form: AxisSummary,
}

#[derive(Serialize)]
struct NormalizationJson {
    re: f64,
    im: f64,
}

fn summarize(report: &CEReport) -> AxisSummary {
    AxisSummary {
        consensus_count: report.consensus_count,
        skipped_phi_indices: report
            .angles
            .iter()
            .filter(|a| a.skipped)
            .map(|a| a.phi_index)
            .collect(),
        angles_at_consensus: report
            .angles
            .iter()
            .filter(|a| !a.skipped && a.flagged_count == report.consensus_count)
            .count(),
    }
}

fn cmd_restore(args: RestoreArgs) -> Result<i32> {
    let (cfg, ctx) = args.cfg.build()?;
    let img = read_img(&args.input)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mode = match args.mode {
        ModeArg::Sequential => RestoreMode::Sequential,
        ModeArg::Literal => RestoreMode::Literal,
    };
    let result = restore(&img, &cfg, mode, &ctx).context("restoration failed")?;
    write_img(&result.restored, &args.out.join("restored.pgm"))?;
    let diagnostics = Diagnostics {
        mode: result.mode,
        v_zero_count: result.v_zero_count,
        u_zero_count: result.u_zero_count,
        normalization: NormalizationJson {
            re: result.normalization.0,
            im: result.normalization.1,
        },
        max_imag_residual: result.max_imag_residual,
        coerced_v_points: result.coerced_v_points.clone(),
        coerced_u_points: result.coerced_u_points.clone(),
        restored_rows: result.restored.rows(),
        restored_cols: result.restored.cols(),
        u_form: summarize(&result.v_report),
        v_form: summarize(&result.u_report),
    };
    write_atomic(
        &args.out.join("diagnostics.json"),
        &serde_json::to_vec_pretty(&diagnostics)?,
    )?;
    println!(
        "restored {}x{} image with {} column and {} row zeros removed",
        result.restored.rows(),
        result.restored.cols(),
        result.v_zero_count,
        result.u_zero_count
    );
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let restored = read_img(&args.restored)?;
    let reference = read_img(&args.reference)?;
    let report = verify(&restored, &reference)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}
