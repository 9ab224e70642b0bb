use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bsar_core::estimate::DEFAULT_TAPER;
use bsar_core::focus::{focus_with, FocusParameters};
use bsar_core::io::{self, EstimateDocument, FLAG_FOCUSED};
use bsar_core::quality::{Region, DEFAULT_WINDOW};
use bsar_core::{
    analyze_point_target, blind_estimate, compare_images, simulate_raw, Error, EstimateOptions, GroundTruth,
    Provenance, RcmModel, Result, SimulationDocument,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bsar", version, about = "Blind SAR focusing from the leading singular vectors of raw data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate raw data for a configured scene.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Ground truth JSON, usable with `focus --oracle`.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Estimate focusing parameters blindly.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = EstimateOptions::default().k)]
        k: usize,
        /// Minimum σ1/σ2.
        #[arg(long, default_value_t = EstimateOptions::default().gate)]
        gate: f64,
        /// Singular value spectrum as CSV.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Focus raw data with blind or oracle parameters.
    Focus(FocusArgs),
    /// Point-target metrics around a pixel.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        col: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Compare two focused images.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Center of a square comparison window; the whole image when absent.
        #[arg(long, requires = "col")]
        row: Option<usize>,
        #[arg(long, requires = "row")]
        col: Option<usize>,
        #[arg(long, default_value_t = 64)]
        window: usize,
    },
    /// Render magnitude in dB as an 8-bit PGM.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -40.0)]
        db: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FocusArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Estimate JSON from `estimate`.
    #[arg(long, required_unless_present = "oracle", conflicts_with = "oracle")]
    est: Option<PathBuf>,
    /// Ground truth JSON from `simulate --truth`.
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Directory for intermediate products.
    #[arg(long)]
    dump_stages: Option<PathBuf>,
    /// Raised-cosine taper fraction of the references.
    #[arg(long, default_value_t = DEFAULT_TAPER)]
    taper: f64,
    /// Provenance and migration model as JSON.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Serialize)]
struct FocusMetadata {
    provenance: Provenance,
    estimate_hash: String,
    taper_fraction: f64,
    rcm: RcmModel,
}

fn existing<'a>(flag: &str, path: &'a Path) -> Result<&'a Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Parameter(format!("{flag}: file not found: {}", path.display())))
    }
}

fn simulate(config: &Path, out: &Path, truth: Option<&Path>) -> Result<()> {
    let doc: SimulationDocument = io::read_json(existing("--config", config)?)?;
    let (raw, gt) = simulate_raw(&doc.acquisition, &doc.scene)?;
    io::write_matrix(&raw, out, 0)?;
    if let Some(path) = truth {
        io::write_json(&gt, path)?;
    }
    Ok(())
}

fn estimate(input: &Path, out: &Path, k: usize, gate: f64, spectrum: Option<&Path>) -> Result<()> {
    let (raw, _) = io::read_matrix(existing("--in", input)?)?;
    let opts = EstimateOptions {
        k,
        gate,
        ..EstimateOptions::default()
    };
    let est = blind_estimate(&raw, &opts)?;
    if let Some(path) = spectrum {
        let mut csv = String::from("index,singular_value\n");
        for (i, s) in est.singular_values.iter().enumerate() {
            writeln!(csv, "{},{s:e}", i + 1).expect("write to string");
        }
        fs::write(path, csv)?;
    }
    io::write_json(&EstimateDocument::new(opts, est)?, out)
}

fn focus(args: &FocusArgs) -> Result<()> {
    let (params, provenance, hash) = match (&args.est, &args.oracle) {
        (Some(path), _) => {
            let doc: EstimateDocument = io::read_json(existing("--est", path)?)?;
            let hash = doc.estimate_hash()?;
            (FocusParameters::from_estimate(&doc.estimate, args.taper)?, Provenance::Blind, hash)
        }
        (None, Some(path)) => {
            let truth: GroundTruth = io::read_json(existing("--oracle", path)?)?;
            let hash = io::sha256_hex(&fs::read(path)?);
            (FocusParameters::oracle(&truth, args.taper)?, Provenance::Oracle, hash)
        }
        (None, None) => return Err(Error::Parameter("one of --est or --oracle is required".into())),
    };
    let (raw, _) = io::read_matrix(existing("--in", &args.input)?)?;
    let run = focus_with(&raw, &params, args.dump_stages.is_some())?;
    io::write_matrix(&run.image, &args.out, FLAG_FOCUSED)?;
    if let (Some(dir), Some(stages)) = (&args.dump_stages, &run.stages) {
        fs::create_dir_all(dir)?;
        io::write_matrix(&stages.range_compressed, dir.join("range_compressed.bsar"), 0)?;
        io::write_matrix(&stages.range_doppler, dir.join("range_doppler.bsar"), 0)?;
        io::write_json(&run.rcm, dir.join("rcm.json"))?;
    }
    if let Some(path) = &args.meta {
        let meta = FocusMetadata {
            provenance,
            estimate_hash: hash,
            taper_fraction: args.taper,
            rcm: run.rcm,
        };
        io::write_json(&meta, path)?;
    }
    Ok(())
}

fn analyze(input: &Path, row: usize, col: usize, out: &Path, window: usize) -> Result<()> {
    let (img, _) = io::read_matrix(existing("--in", input)?)?;
    if row >= img.rows() || col >= img.cols() {
        return Err(Error::Parameter(format!("--row/--col: ({row}, {col}) outside {:?}", img.shape())));
    }
    let r = analyze_point_target(&img, (row, col), window)?;
    let csv = format!(
        "peak_row,peak_col,peak_magnitude,irw_range,irw_azimuth,pslr_range,pslr_azimuth,islr_range,islr_azimuth,oversample_factor\n\
         {},{},{:e},{},{},{},{},{},{},{}\n",
        r.peak_position.0,
        r.peak_position.1,
        r.peak_magnitude,
        r.irw_range,
        r.irw_azimuth,
        r.pslr_range,
        r.pslr_azimuth,
        r.islr_range,
        r.islr_azimuth,
        r.oversample_factor
    );
    fs::write(out, csv)?;
    Ok(())
}

fn compare(a: &Path, b: &Path, out: &Path, center: Option<(usize, usize)>, window: usize) -> Result<()> {
    let (ia, _) = io::read_matrix(existing("--a", a)?)?;
    let (ib, _) = io::read_matrix(existing("--b", b)?)?;
    let region = center.map(|(r, c)| Region::centered(r, c, window, ia.shape()));
    io::write_json(&compare_images(&ia, &ib, region)?, out)
}

fn render(input: &Path, db: f64, out: &Path) -> Result<()> {
    let (m, _) = io::read_matrix(existing("--in", input)?)?;
    let (pgm, nonzero) = io::render_pgm(&m, db)?;
    if !nonzero {
        eprintln!("bsar: warning: {} is all zero, rendering a black image", input.display());
    }
    fs::write(out, pgm)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, truth } => simulate(&config, &out, truth.as_deref()),
        Command::Estimate {
            input,
            out,
            k,
            gate,
            spectrum,
        } => estimate(&input, &out, k, gate, spectrum.as_deref()),
        Command::Focus(args) => focus(&args),
        Command::Analyze {
            input,
            row,
            col,
            out,
            window,
        } => analyze(&input, row, col, &out, window),
        Command::Compare {
            a,
            b,
            out,
            row,
            col,
            window,
        } => compare(&a, &b, &out, row.zip(col), window),
        Command::Render { input, db, out } => render(&input, db, &out),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Parameter(_) | Error::Configuration(_) => 2,
        Error::Format { .. } | Error::Io(_) | Error::Json(_) => 3,
        Error::Convergence { .. } => 5,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("bsar: parameter-error: {}", msg.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bsar: {}: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::from(exit_code(&e))
        }
    }
}
