use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wulffflow::harness::{self, export, EquivarianceReport, Scenario, Simulation};
use wulffflow::{AffineMap, Anisotropy, Error, Result};

/// Weighted curvature flow of plane curves and affine-equivariance checks.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Wulff shape of an anisotropy as JSON and SVG.
    Wulff {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve a scenario and write its trace.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run a scenario against its affine image with pulled-back energy and mobility.
    VerifyAffine {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// Also run a refinement study with this many levels.
        #[arg(long)]
        refinements: Option<usize>,
        /// Largest acceptable normalized defect.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
    /// Run a power-law scenario against its image under an area-preserving map.
    CompareSt {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
    /// Equivariance defect under successive halvings of the time step.
    Convergence {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        refinements: usize,
    },
}

fn load_map(path: &Path) -> Result<AffineMap> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn print_report(report: &EquivarianceReport) {
    println!("t,defect,defect_normalized");
    for r in &report.rows {
        println!("{:e},{:e},{:e}", r.t, r.defect, r.defect_normalized);
    }
    for m in &report.mismatches {
        eprintln!("event mismatch: {m}");
    }
}

/// Exit code 2 when the defect exceeds `tol` or the twin runs disagree on events.
fn judge(report: &EquivarianceReport, tol: f64) -> u8 {
    let worst = report.max_normalized();
    if worst > tol || !report.mismatches.is_empty() {
        eprintln!("max normalized defect {worst:e} exceeds {tol:e} or events differ");
        2
    } else {
        println!("max normalized defect {worst:e} within {tol:e}");
        0
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Wulff { phi, out } => {
            let text = std::fs::read_to_string(&phi).map_err(|source| Error::Io {
                path: phi.clone(),
                source,
            })?;
            let phi: Anisotropy = serde_json::from_str(&text).map_err(|source| Error::Parse {
                path: phi.clone(),
                source,
            })?;
            for p in export::write_wulff(&phi.wulff_shape(), &out)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Simulate { scenario } => {
            let s = Scenario::load(&scenario)?;
            let written = match harness::simulate(&s)? {
                Simulation::Polygon(t) => export::write_trace(&t, &s.output)?,
                Simulation::Curve(t) => export::write_trace(&t, &s.output)?,
            };
            for p in written {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::VerifyAffine {
            scenario,
            map,
            refinements,
            tol,
        } => {
            let s = Scenario::load(&scenario)?;
            let map = load_map(&map)?;
            let report = harness::run_pair(&s, Some(&map))?;
            export::write_report(&report, &s.output)?;
            print_report(&report);
            if let Some(k) = refinements {
                let table = harness::convergence_order(&s, Some(&map), k)?;
                export::write_convergence(&table, &s.output)?;
                println!("convergence slope: {}", export::slope_label(&table.fit));
            }
            Ok(judge(&report, tol))
        }
        Command::CompareSt { scenario, map, tol } => {
            let s = Scenario::load(&scenario)?;
            let map = load_map(&map)?;
            let report = harness::compare_st(&s, Some(&map))?;
            export::write_report(&report, &s.output)?;
            print_report(&report);
            Ok(judge(&report, tol))
        }
        Command::Convergence {
            scenario,
            map,
            refinements,
        } => {
            let s = Scenario::load(&scenario)?;
            let map = load_map(&map)?;
            let table = harness::convergence_order(&s, Some(&map), refinements)?;
            export::write_convergence(&table, &s.output)?;
            print!("{}", export::convergence_csv(&table));
            println!("slope: {}", export::slope_label(&table.fit));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
