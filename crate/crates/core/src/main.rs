use clap::{Args, Parser, Subcommand};
use qvoronoi::bloch::SampleScheme;
use qvoronoi::run::{self, RunConfig, RunError};
use qvoronoi::verify::{self, VerifyConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qvoronoi",
    about = "Voronoi diagrams of pure quantum states and Holevo capacity estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// State-space dimension (2 for the qubit, >= 3 for the section).
    #[arg(long)]
    d: Option<usize>,
    /// Built-in example site configuration (1, 2 or 3).
    #[arg(long)]
    example: Option<u32>,
    /// Distance kind; repeat for several
    /// (divergence | euclidean | geodesic | hilbert-schmidt).
    #[arg(long = "kind")]
    kinds: Vec<String>,
    /// Number of sample points.
    #[arg(long)]
    n: Option<usize>,
    /// Shrink radius for the divergence-limit diagram.
    #[arg(long)]
    r: Option<f64>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Boundary-grid resolution.
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute Voronoi diagrams and write CSV/SVG/JSON outputs.
    Diagram(CommonOpts),
    /// Estimate the Holevo capacity of a one-qubit channel.
    Capacity {
        /// Channel JSON: {"m": [9 reals, row-major], "b": [3 reals]}.
        #[arg(long)]
        channel: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the self-verification suite.
    Verify {
        /// Tolerance for the closed-form eigenvalue comparison.
        #[arg(long, default_value_t = 1e-9)]
        eigen_tol: f64,
        /// Optional path for the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write sampled sphere points as CSV.
    Sample {
        /// Sampling scheme (fibonacci | uniform-random).
        #[arg(long, default_value = "fibonacci")]
        scheme: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn load_config(opts: &CommonOpts) -> Result<RunConfig, RunError> {
    let mut cfg = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| RunError::Parse {
                path: path.display().to_string(),
                source: e,
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(d) = opts.d {
        cfg.d = d;
    }
    if opts.example.is_some() {
        cfg.example = opts.example;
    }
    if !opts.kinds.is_empty() {
        cfg.kinds = opts.kinds.clone();
    }
    if let Some(n) = opts.n {
        cfg.n = n;
    }
    if let Some(r) = opts.r {
        cfg.shrink = r;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.out = out.clone();
    }
    if let Some(res) = opts.resolution {
        cfg.resolution = res;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn usage_error(e: &RunError) -> bool {
    matches!(
        e,
        RunError::Config(_)
            | RunError::UnknownKind(_)
            | RunError::UnknownExample(_)
            | RunError::Parse { .. }
    )
}

fn exec() -> Result<ExitCode, RunError> {
    match Cli::parse().command {
        Command::Diagram(opts) => {
            let cfg = load_config(&opts)?;
            let out = run::cmd_diagram(&cfg)?;
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            for c in &out.comparisons {
                println!(
                    "{} vs {}: {} agree, {} disagree, {} boundary-flagged{}",
                    c.kinds.0,
                    c.kinds.1,
                    c.report.agree,
                    c.report.disagree,
                    c.report.boundary_flagged,
                    if c.identical { " (identical)" } else { "" },
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Capacity { channel, common } => {
            let cfg = load_config(&common)?;
            let report = run::cmd_capacity(&channel, &cfg)?;
            println!(
                "capacity: {:.6} nats ({:.6} bits), {} samples, gap {:.2e}, converged: {}",
                report.estimate.nats,
                report.estimate.bits,
                report.estimate.samples,
                report.estimate.gap,
                report.estimate.converged,
            );
            println!("wrote {}", cfg.out.join("capacity.json").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { eigen_tol, report } => {
            let vr = verify::run_all(&VerifyConfig { eigen_tolerance: eigen_tol });
            for c in &vr.checks {
                println!(
                    "criterion {:2}: {} — {}",
                    c.id,
                    if c.passed { "pass" } else { "FAIL" },
                    c.name,
                );
                println!("              {}", c.details);
            }
            for f in &vr.findings {
                println!("finding: {} — {}", f.title, f.details);
            }
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&vr)?)?;
                println!("wrote {}", path.display());
            }
            Ok(if vr.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Sample { scheme, common } => {
            let cfg = load_config(&common)?;
            let scheme = match scheme.as_str() {
                "fibonacci" => SampleScheme::Fibonacci,
                "uniform-random" => SampleScheme::UniformRandom,
                other => {
                    return Err(RunError::Config(format!(
                        "unknown sampling scheme '{other}'"
                    )))
                }
            };
            let path = run::cmd_sample(&cfg, scheme)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match exec() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
