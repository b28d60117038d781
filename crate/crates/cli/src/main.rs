mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_meshes, Format, Settings};
use xhdg::cases::CaseId;
use xhdg::solver::SolverMethod;
use xhdg::spaces::Scheme;
use xhdg::study::{dump_solution, run_convergence_study};
use xhdg::Result;

/// Convergence studies for the X-HDG interface solver.
#[derive(Debug, Parser)]
#[command(name = "xhdg", version)]
struct Args {
    /// key = value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// circle-homog, circle-jump, segment, polygon or manufactured-uncut.
    #[arg(long)]
    case: Option<CaseId>,
    /// Polynomial degree (1 to 4).
    #[arg(long)]
    k: Option<usize>,
    /// standard or modified.
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    alpha2: Option<f64>,
    /// Subdivisions per side, e.g. 8,16,32.
    #[arg(long)]
    meshes: Option<String>,
    /// direct or iterative.
    #[arg(long)]
    solver: Option<SolverMethod>,
    /// Relative residual target of the iterative solver.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "geo-tol")]
    geo_tol: Option<f64>,
    /// Table destination (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write x,y,u_h samples on the finest mesh to this file.
    #[arg(long = "dump-solution")]
    dump_solution: Option<PathBuf>,
    /// Samples per element edge in the dump.
    #[arg(long = "dump-resolution")]
    dump_resolution: Option<usize>,
    /// csv or md.
    #[arg(long)]
    format: Option<Format>,
}

fn run(args: Args) -> Result<()> {
    let file = match &args.config {
        Some(path) => Settings::from_config_str(&fs::read_to_string(path)?)
            .map_err(|e| e.context(path.display().to_string()))?,
        None => Settings::default(),
    };
    let flags = Settings {
        case: args.case,
        k: args.k,
        scheme: args.scheme,
        alpha1: args.alpha1,
        alpha2: args.alpha2,
        meshes: args.meshes.as_deref().map(parse_meshes).transpose()?,
        solver: args.solver,
        tol: args.tol,
        geo_tol: args.geo_tol,
        out: args.out,
        dump_solution: args.dump_solution,
        dump_resolution: args.dump_resolution,
        format: args.format,
    };
    let settings = file.overridden_by(flags);
    let config = settings.run_config()?;
    let (report, solves) = run_convergence_study(&config)?;

    let table = match settings.format.unwrap_or_default() {
        Format::Csv => report.to_csv(),
        Format::Md => report.to_markdown(),
    };
    match &settings.out {
        Some(path) => fs::write(path, table)?,
        None => io::stdout().write_all(table.as_bytes())?,
    }

    if let (Some(path), Some(res), Some(last)) = (
        &settings.dump_solution,
        config.dump_resolution,
        solves.last(),
    ) {
        let case = config.problem()?;
        let file = fs::File::create(path)?;
        dump_solution(
            io::BufWriter::new(file),
            &last.mesh,
            &case.levelset,
            &last.solution,
            res,
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
