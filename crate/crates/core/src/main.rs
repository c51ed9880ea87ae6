use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use perfhom::csv::{energy_csv, q_matrix_csv};
use perfhom::error::{Error, Result};
use perfhom::fem::{assemble_surface_mass, assemble_surface_stiffness, solve_spd};
use perfhom::field::write_field_file;
use perfhom::homogenize::{cell_system, homogenize};
use perfhom::mesh::{
    build_cell_mesh, build_periodic_map, tile_domain_mesh, write_mesh_file, BoundaryChain, CellGeometry,
};
use perfhom::nonlinearity::validate_nonlinearity;
use perfhom::oracles::{
    circle_spectrum_oracle, dense_solve_oracle, dilute_limit_oracle, smallest_nonzero_generalized_eigenvalue,
    OracleResult,
};
use perfhom::study::{
    export_report, load_config, load_eps_config, load_limit_config, load_validate_g_config, run_convergence_study,
    summary_text,
};

#[derive(Parser)]
#[command(
    name = "perfhom",
    version,
    about = "Homogenization of reaction-diffusion in perforated domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh the unit cell, or the domain tiled by m x m cells.
    Mesh {
        #[arg(long)]
        cell_n: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        tile: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve both cell problems and write Q and the correctors.
    Cell {
        #[arg(long)]
        cell_n: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the perforated problem at one eps.
    SolveEps {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the homogenized problem.
    SolveLimit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a full convergence study.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        parallel: bool,
    },
    /// Check the growth and Lipschitz conditions on a nonlinearity.
    ValidateG {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate one reference oracle.
    Oracle {
        #[command(subcommand)]
        oracle: OracleCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    CircleSpectrum {
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        k: u32,
    },
    DiluteLimit {
        #[arg(long)]
        radius: f64,
    },
    /// Smallest nonzero eigenvalue of the assembled circle operators against k = 1.
    SurfaceSpectrum {
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
        #[arg(long, default_value_t = 256)]
        segments: usize,
    },
    /// CG against dense elimination on the constrained cell system.
    DenseSolve {
        #[arg(long, default_value_t = 8)]
        cell_n: usize,
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: PathBuf, text: &str) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn oracle(cmd: OracleCommand) -> Result<OracleResult> {
    Ok(match cmd {
        OracleCommand::CircleSpectrum { radius, k } => {
            let v = circle_spectrum_oracle(radius, k)?;
            OracleResult::absolute("circle-spectrum", vec![v], vec![v], 0.0)
        }
        OracleCommand::DiluteLimit { radius } => {
            let v = dilute_limit_oracle(radius)?;
            OracleResult::absolute("dilute-limit", vec![v], vec![v], 0.0)
        }
        OracleCommand::SurfaceSpectrum { radius, segments } => {
            let (chain, _) = BoundaryChain::inscribed_circle([0.0, 0.0], radius, segments)?;
            let chains = [chain];
            let a = assemble_surface_stiffness(&chains, segments)?.to_dense();
            let m = assemble_surface_mass(&chains, segments)?.to_dense();
            let lambda = smallest_nonzero_generalized_eigenvalue(&a, &m)?;
            OracleResult::relative(
                "surface-spectrum",
                vec![lambda],
                vec![circle_spectrum_oracle(radius, 1)?],
                5e-3,
            )
        }
        OracleCommand::DenseSolve { cell_n, radius, delta } => {
            let mesh = build_cell_mesh(&CellGeometry::new(cell_n, radius)?)?;
            let map = build_periodic_map(&mesh)?;
            let sys = cell_system(&mesh, &map, delta, 0)?;
            let cg = solve_spd(&sys.op, &sys.rhs, 1e-13)?;
            let dense = dense_solve_oracle(&sys.op.to_dense(), &sys.rhs)?;
            OracleResult::absolute("dense-solve", cg, dense, 1e-8)
        }
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Mesh {
            cell_n,
            radius,
            tile,
            out,
        } => {
            let cell = build_cell_mesh(&CellGeometry::new(cell_n, radius)?)?;
            let mesh = match tile {
                Some(m) => tile_domain_mesh(&cell, m)?,
                None => cell,
            };
            write_mesh_file(&mesh, &out)?;
            println!(
                "{} vertices, {} triangles -> {}",
                mesh.num_vertices(),
                mesh.triangles.len(),
                out.display()
            );
            Ok(true)
        }
        Command::Cell {
            cell_n,
            radius,
            delta,
            out,
        } => {
            let mesh = build_cell_mesh(&CellGeometry::new(cell_n, radius)?)?;
            let (data, [w0, w1]) = homogenize(&mesh, delta, true)?;
            create_dir(&out)?;
            write_text(out.join("q_matrix.csv"), &q_matrix_csv(&data))?;
            write_field_file(&w0.corrector, &out.join("corrector_1.field"))?;
            write_field_file(&w1.corrector, &out.join("corrector_2.field"))?;
            write_mesh_file(&mesh, &out.join("cell.mesh"))?;
            print!("{}", q_matrix_csv(&data));
            Ok(true)
        }
        Command::SolveEps { config, out } => {
            let spec = load_eps_config(&config)?;
            let (ops, run) = perfhom::eps::run(&spec)?;
            create_dir(&out)?;
            write_text(out.join("energy.csv"), &energy_csv(&run.trace))?;
            write_field_file(&run.state.u, &out.join("u_final.field"))?;
            write_mesh_file(&ops.mesh, &out.join("domain.mesh"))?;
            println!(
                "eps = 1/{}, {} steps of tau = {}, max H-norm = {}",
                spec.m,
                run.state.step,
                run.tau,
                run.hnorm_max()
            );
            Ok(true)
        }
        Command::SolveLimit { config, out } => {
            let spec = load_limit_config(&config)?;
            let run = perfhom::limit::run_limit(&spec)?;
            create_dir(&out)?;
            write_text(out.join("energy.csv"), &energy_csv(&run.trace))?;
            write_field_file(&run.state.u, &out.join("u_final.field"))?;
            write_mesh_file(&run.operators.mesh, &out.join("omega.mesh"))?;
            println!(
                "{} steps of tau = {}, ||u(T)||_L2 = {}",
                run.state.step,
                run.tau,
                run.l2_norm()
            );
            Ok(true)
        }
        Command::Converge { config, parallel } => {
            let config = load_config(&config)?;
            let report = run_convergence_study(&config, parallel)?;
            export_report(&report, &config.output_dir)?;
            print!("{}", summary_text(&report));
            Ok(report.verdict())
        }
        Command::ValidateG { config } => {
            let cfg = load_validate_g_config(&config)?;
            let report = validate_nonlinearity(&cfg.g, cfg.range, cfg.samples);
            println!("{}", json(&report)?);
            Ok(report.passed)
        }
        Command::Oracle { oracle: cmd } => {
            let result = oracle(cmd)?;
            println!("{}", json(&result)?);
            Ok(result.passed)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
