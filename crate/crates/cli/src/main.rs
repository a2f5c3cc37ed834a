use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use convdiff_cli::config::{ExperimentConfig, MeshSource};
use convdiff_cli::runner;

/// Finite element experiments for 2D diffusion and convection-diffusion
/// problems with diagonal-times-Toeplitz preconditioning.
#[derive(Parser)]
#[command(name = "convdiff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (TOML); the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Domain: hexagon | unit-square.
    #[arg(long)]
    domain: Option<String>,
    /// Mesh source: structured | perturbed | unstructured-file.
    #[arg(long)]
    mesh: Option<String>,
    /// Base subdivisions per side at level 0 (structured and perturbed).
    #[arg(long)]
    base: Option<u32>,
    /// Perturbation amplitude in [0, 0.5) (perturbed only).
    #[arg(long)]
    alpha: Option<f64>,
    /// Node file in Triangle format (unstructured-file only).
    #[arg(long)]
    node: Option<PathBuf>,
    /// Element file in Triangle format (unstructured-file only).
    #[arg(long)]
    ele: Option<PathBuf>,
    /// Number of refinement levels to run.
    #[arg(long)]
    levels: Option<u32>,
    /// Diffusion coefficient: a1 | a2 | a3 | const:<v>.
    #[arg(long)]
    a: Option<String>,
    /// Convective field: linear | none.
    #[arg(long)]
    b: Option<String>,
    /// Solver: pcg | pgmres.
    #[arg(long)]
    method: Option<String>,
    /// Preconditioner: exact | surrogate | none.
    #[arg(long)]
    precond: Option<String>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for perturbed meshes.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(domain) = &self.domain {
            config.domain = domain.parse()?;
        }
        if let Some(kind) = &self.mesh {
            config.mesh = match kind.as_str() {
                "structured" => MeshSource::Structured {
                    base: self.base.unwrap_or(4),
                },
                "perturbed" => MeshSource::Perturbed {
                    base: self.base.unwrap_or(4),
                    alpha: self.alpha.unwrap_or(0.1),
                },
                "unstructured-file" => MeshSource::UnstructuredFile {
                    node: self
                        .node
                        .clone()
                        .ok_or("unstructured-file requires --node")?,
                    ele: self.ele.clone().ok_or("unstructured-file requires --ele")?,
                },
                other => return Err(format!("unknown mesh source {other:?}")),
            };
        } else {
            match (&mut config.mesh, self.base, self.alpha) {
                (MeshSource::Structured { base }, Some(b), _) => *base = b,
                (MeshSource::Perturbed { base, alpha }, b, a) => {
                    if let Some(b) = b {
                        *base = b;
                    }
                    if let Some(a) = a {
                        *alpha = a;
                    }
                }
                _ => {}
            }
        }
        if let Some(levels) = self.levels {
            config.levels = levels;
        }
        if let Some(a) = &self.a {
            config.a = a.parse()?;
        }
        if let Some(b) = &self.b {
            config.b = b.parse()?;
        }
        if let Some(method) = &self.method {
            config.method = method.parse()?;
        }
        if let Some(precond) = &self.precond {
            config.preconditioner = precond.parse()?;
        }
        if let Some(tol) = self.tol {
            config.tol = tol;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the level meshes and write them in Triangle format.
    Mesh {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write the canonical line-oriented dump per level.
        #[arg(long)]
        canonical: bool,
    },
    /// Assemble the operators of one level and write them with the load
    /// vector.
    Assemble {
        #[command(flatten)]
        config: ConfigArgs,
        /// Refinement level (0-based).
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a single refinement level and print the iteration report.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        level: u32,
    },
    /// Run all refinement levels and emit one CSV row per level.
    Table {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory for table.csv (defaults to stdout only).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense spectrum of the preconditioned operator at one level.
    Spectrum {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        level: u32,
        /// Directory for spectrum.csv and spectrum_summary.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the assembled matrices of one level in Matrix Market format.
    Export {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<bool, String> {
    match command {
        Command::Mesh {
            config,
            out,
            canonical,
        } => {
            let config = config.resolve()?;
            let files =
                runner::write_meshes(&config, &out, canonical).map_err(|e| e.to_string())?;
            println!("wrote {} files to {}", files.len(), out.display());
            Ok(true)
        }
        Command::Assemble { config, level, out } => {
            let config = config.resolve()?;
            let meshes = runner::mesh_levels(&config).map_err(|e| e.to_string())?;
            let mesh = meshes
                .get(level as usize)
                .ok_or(format!("level {level} outside configured levels"))?;
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            let a = config.scalar_a();
            let theta =
                convdiff::assembly::assemble_diffusion(mesh, &a).map_err(|e| e.to_string())?;
            convdiff::market::write_matrix_market_file(&theta, &out.join("theta.mtx"))
                .map_err(|e| e.to_string())?;
            if let Some(b) = config.velocity() {
                let psi =
                    convdiff::assembly::assemble_convection(mesh, &b).map_err(|e| e.to_string())?;
                convdiff::market::write_matrix_market_file(&psi, &out.join("psi.mtx"))
                    .map_err(|e| e.to_string())?;
            }
            let rhs = convdiff::assembly::assemble_rhs(mesh, &convdiff::ScalarField::Constant(1.0));
            std::fs::write(out.join("rhs.txt"), convdiff::market::write_vector(&rhs))
                .map_err(|e| e.to_string())?;
            println!("assembled n = {} into {}", mesh.n_interior(), out.display());
            Ok(true)
        }
        Command::Solve { config, level } => {
            let config = config.resolve()?;
            let meshes = runner::mesh_levels(&config).map_err(|e| e.to_string())?;
            let mesh = meshes
                .get(level as usize)
                .ok_or(format!("level {level} outside configured levels"))?;
            let report = runner::solve_level(&config, mesh).map_err(|e| e.to_string())?;
            println!(
                "n = {}, method = {}, preconditioner = {}",
                mesh.n_interior(),
                config.method.id(),
                config.preconditioner.id()
            );
            println!(
                "iterations = {}, converged = {}, true relres = {:e}, time = {:.3}s",
                report.iterations,
                report.converged,
                report.final_true_residual,
                report.wall_time.as_secs_f64()
            );
            if let Some(p) = report.final_preconditioned_residual {
                println!("preconditioned relres = {p:e}");
            }
            Ok(report.converged)
        }
        Command::Table { config, out } => {
            let config = config.resolve()?;
            let result = runner::run_table(&config).map_err(|e| e.to_string())?;
            print!("{}", result.csv);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                std::fs::write(dir.join("table.csv"), &result.csv).map_err(|e| e.to_string())?;
            }
            if !result.all_converged {
                eprintln!("warning: at least one level did not converge");
            }
            Ok(result.all_converged)
        }
        Command::Spectrum { config, level, out } => {
            let config = config.resolve()?;
            let result = runner::run_spectrum(&config, level).map_err(|e| e.to_string())?;
            print!("{}", result.summary_csv);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
                std::fs::write(dir.join("spectrum.csv"), &result.scatter_csv)
                    .map_err(|e| e.to_string())?;
                std::fs::write(dir.join("spectrum_summary.csv"), &result.summary_csv)
                    .map_err(|e| e.to_string())?;
            }
            Ok(true)
        }
        Command::Export { config, level, out } => {
            let config = config.resolve()?;
            let files = runner::export_matrices(&config, level, &out).map_err(|e| e.to_string())?;
            println!(
                "exported {} matrices to {} (see manifest.txt)",
                files.len(),
                out.display()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
