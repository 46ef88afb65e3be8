use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use saddlecheck::pipeline::{export, parse_stages, run, CachePolicy, Export, Overrides, RunConfig, RunReport, Stage};

#[derive(Parser)]
#[command(
    name = "saddlecheck",
    version,
    about = "Solve and verify saddle solutions of the Allen-Cahn equation in R^2m"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the reduced equation.
    Solve(Common),
    /// Run the inequality suite, plus the supersolution check when n ∈ {8, 10, 12}.
    Verify(Common),
    /// Estimate the bottom of the weighted linearized spectrum.
    Spectrum(Common),
    /// Run the interval proofs of the candidate sign claims.
    Rigor(Common),
    /// Print a saved report and exit with its verdict.
    Report { path: PathBuf },
    /// Write the candidate sign maps as SVG and CSV.
    Plot(Common),
    /// Run the stages from --stages or the config file. With --out, every
    /// subcommand writes report.json plus the exports its stages produce.
    Run(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Candidate (ambient) dimension, 2m.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Domain size.
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Newton residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated: solve,suite,supersolution,spectrum,rigor,certificate,plots.
    #[arg(long)]
    stages: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// use, refresh or off.
    #[arg(long)]
    cache: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    println!("SUMMARY status=ERROR");
    ExitCode::from(2)
}

fn resolve(c: &Common, preset: Option<&[Stage]>) -> Result<RunConfig, String> {
    let text = match &c.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => None,
    };
    let stages = match (&c.stages, preset) {
        (Some(s), _) => Some(parse_stages(s).map_err(|e| e.to_string())?),
        (None, Some(p)) => Some(p.to_vec()),
        (None, None) => None,
    };
    let cache = c.cache.as_deref().map(str::parse::<CachePolicy>).transpose().map_err(|e| e.to_string())?;
    let o = Overrides {
        m: c.m,
        n: c.n,
        r: c.r,
        h: c.h,
        newton_tol: c.tol,
        stages,
        checks: None,
        out: c.out.clone(),
        cache,
        cache_dir: None,
        threads: c.threads,
    };
    RunConfig::resolve(text.as_deref(), &o).map_err(|e| e.to_string())
}

fn print_report(r: &RunReport) {
    for v in &r.verdicts {
        println!("{:<14} {:<4} {}", v.stage.name(), if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).collect();
    for c in failed {
        println!(
            "  check {:<4} margin {:+.3e} tol {:.3e} at ({}, {})  {}",
            c.id, c.worst_margin, c.tolerance_used, c.worst_point.0, c.worst_point.1, c.statement
        );
    }
    println!("{}", r.summary_line());
}

fn exit_for(r: &RunReport) -> ExitCode {
    if r.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn execute(c: &Common, preset: Option<&[Stage]>, default_out: Option<&Path>) -> ExitCode {
    let mut cfg = match resolve(c, preset) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    if cfg.out.is_none() {
        cfg.out = default_out.map(Path::to_path_buf);
    }
    let art = match run(&cfg) {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let plan = cfg.plan();
    let exports: Vec<Export> =
        [(Stage::Solve, Export::Fields), (Stage::Spectrum, Export::Eigenvector), (Stage::Plots, Export::SignMaps)]
            .into_iter()
            .filter(|(stage, _)| plan.contains(stage))
            .map(|(_, what)| what)
            .collect();
    if let Some(dir) = &cfg.out {
        for &what in [Export::Report].iter().chain(&exports) {
            match export(&art, what, dir) {
                Ok(paths) => {
                    for p in paths {
                        eprintln!("wrote {}", p.display());
                    }
                }
                Err(e) => return fail(e),
            }
        }
    }
    print_report(&art.report);
    exit_for(&art.report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(c) => execute(c, Some(&[Stage::Solve]), None),
        Command::Verify(c) => {
            // the supersolution check needs a candidate dimension
            let with_candidate = matches!(c.n, Some(8 | 10 | 12)) || matches!(c.m, Some(4..=6));
            let stages: &[Stage] = if with_candidate { &[Stage::Suite, Stage::Supersolution] } else { &[Stage::Suite] };
            execute(c, Some(stages), None)
        }
        Command::Spectrum(c) => execute(c, Some(&[Stage::Spectrum]), None),
        Command::Rigor(c) => execute(c, Some(&[Stage::Rigor]), None),
        Command::Plot(c) => execute(c, Some(&[Stage::Plots]), Some(Path::new("plots"))),
        Command::Run(c) => execute(c, None, None),
        Command::Report { path } => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", path.display())),
            };
            match RunReport::from_json(&text) {
                Ok(r) => {
                    print_report(&r);
                    exit_for(&r)
                }
                Err(e) => fail(e),
            }
        }
    }
}
