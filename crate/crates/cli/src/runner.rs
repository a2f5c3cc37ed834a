//! Experiment pipelines behind the CLI subcommands.
//!
//! Every run is deterministic under a fixed config: reruns produce
//! byte-identical CSV except for the trailing wall-time column.

use std::path::Path;

use convdiff::assembly::{assemble_diffusion, assemble_rhs, system_matrix};
use convdiff::krylov::{pcg, pgmres, SolveOptions, SolveReport};
use convdiff::market;
use convdiff::spectral::{preconditioned_spectrum, OUTLIER_EPSILONS};
use convdiff::structure::{build_toeplitz, embed_hex, Symbol, ToeplitzSpec};
use convdiff::{Error, Mesh, MeshFamily, Preconditioner, Result, ScalarField};

use crate::config::{Domain, ExperimentConfig, MeshSource, Method, PrecondChoice};

pub const TABLE_HEADER: &str =
    "family,m,n,a,b,method,preconditioner,iterations,converged,relres,time_s";

#[derive(Clone, Debug)]
pub struct LevelResult {
    pub level: u32,
    pub m: Option<u32>,
    pub n: usize,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct TableResult {
    pub levels: Vec<LevelResult>,
    pub csv: String,
    pub all_converged: bool,
}

fn family_id(family: MeshFamily) -> &'static str {
    match family {
        MeshFamily::HexStructured(_) => "hex-structured",
        MeshFamily::SquareFk(_) => "square-fk",
        MeshFamily::Unstructured => "unstructured",
        MeshFamily::Perturbed => "perturbed",
    }
}

/// Meshes of all refinement levels, level 0 first.
///
/// Structured and file-based sources refine the base mesh by midpoints. The
/// perturbed source jitters every level independently at its own scale
/// (displacements up to `alpha * h_level`), which keeps the family
/// quasi-uniform the way generator output is, instead of freezing the
/// coarse-level displacement into all refinements.
pub fn mesh_levels(config: &ExperimentConfig) -> Result<Vec<Mesh>> {
    if let MeshSource::Perturbed { base, alpha } = &config.mesh {
        let structured = |m: u32| match config.domain {
            Domain::Hexagon => Mesh::hex_structured(m),
            Domain::UnitSquare => Mesh::square_fk(m),
        };
        let mut structured_level = structured(*base)?;
        let mut meshes = vec![structured_level.perturb(*alpha, config.seed)?];
        for _ in 1..config.levels {
            structured_level = structured_level.refine_midpoint();
            meshes.push(structured_level.perturb(*alpha, config.seed)?);
        }
        return Ok(meshes);
    }
    let mut meshes = vec![config.base_mesh()?];
    for _ in 1..config.levels {
        meshes.push(meshes.last().unwrap().refine_midpoint());
    }
    Ok(meshes)
}

pub fn build_preconditioner(
    config: &ExperimentConfig,
    mesh: &Mesh,
    a: &ScalarField,
) -> Result<Preconditioner> {
    match config.preconditioner {
        PrecondChoice::Exact => Preconditioner::exact(mesh, a),
        PrecondChoice::Surrogate => Preconditioner::surrogate(mesh, a),
        PrecondChoice::None => Ok(Preconditioner::identity(mesh.n_interior())),
    }
}

/// Solves one level of the configured experiment.
pub fn solve_level(config: &ExperimentConfig, mesh: &Mesh) -> Result<SolveReport> {
    let a = config.scalar_a();
    let b = config.velocity();
    let matrix = system_matrix(mesh, &a, b.as_ref())?;
    let rhs = assemble_rhs(mesh, &ScalarField::Constant(1.0));
    let precond = build_preconditioner(config, mesh, &a)?;
    let opts = SolveOptions {
        tol: config.tol,
        ..Default::default()
    };
    match config.method {
        Method::Pcg => pcg(&matrix, &rhs, &precond, &opts),
        Method::Pgmres => pgmres(&matrix, &rhs, &precond, &opts),
    }
}

/// Runs every refinement level and collects one CSV row per level.
pub fn run_table(config: &ExperimentConfig) -> Result<TableResult> {
    let mut csv = String::from(TABLE_HEADER);
    csv.push('\n');
    let mut levels = Vec::new();
    let mut all_converged = true;
    let meshes = mesh_levels(config)?;
    for (level, mesh) in meshes.iter().enumerate() {
        let report = solve_level(config, mesh)?;
        all_converged &= report.converged;
        let m = config.m_at_level(level as u32);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:e},{:.3}\n",
            family_id(mesh.family()),
            m.map_or_else(|| format!("level{level}"), |m| m.to_string()),
            mesh.n_interior(),
            config.a,
            config.b.id(),
            config.method.id(),
            config.preconditioner.id(),
            report.iterations,
            report.converged,
            report.final_true_residual,
            report.wall_time.as_secs_f64(),
        ));
        levels.push(LevelResult {
            level: level as u32,
            m,
            n: mesh.n_interior(),
            report,
        });
    }
    Ok(TableResult {
        levels,
        csv,
        all_converged,
    })
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub n: usize,
    /// One `re,im` row per eigenvalue.
    pub scatter_csv: String,
    /// Outlier counts and spectrum extents.
    pub summary_csv: String,
    pub min_re: f64,
}

/// Dense spectrum of the preconditioned operator at one refinement level.
pub fn run_spectrum(config: &ExperimentConfig, level: u32) -> Result<SpectrumResult> {
    if level >= config.levels {
        return Err(Error::InvalidParameter(format!(
            "level {level} outside the configured {} levels",
            config.levels
        )));
    }
    let meshes = mesh_levels(config)?;
    let mesh = &meshes[level as usize];
    let a = config.scalar_a();
    let b = config.velocity();
    let matrix = system_matrix(mesh, &a, b.as_ref())?;
    let precond = build_preconditioner(config, mesh, &a)?;
    let report = preconditioned_spectrum(&matrix, &precond, convdiff::Complex::new(1.0, 0.0))?;

    let mut scatter = String::from("re,im\n");
    for l in &report.eigenvalues {
        scatter.push_str(&format!("{:e},{:e}\n", l.re, l.im));
    }
    let mut summary = String::from("epsilon,outliers\n");
    for &eps in &OUTLIER_EPSILONS {
        summary.push_str(&format!("{eps},{}\n", report.outliers_at(eps)));
    }
    summary.push_str(&format!(
        "min_re,{:e}\nmax_re,{:e}\nmax_abs_im,{:e}\n",
        report.min_re, report.max_re, report.max_abs_im
    ));
    Ok(SpectrumResult {
        n: mesh.n_interior(),
        scatter_csv: scatter,
        summary_csv: summary,
        min_re: report.min_re,
    })
}

/// Writes the assembled operators of one level in Matrix Market format plus
/// a manifest: the variable-coefficient stiffness matrix, the convection
/// matrix (when configured), the unit-coefficient matrix, the scaling
/// diagonal, and (structured hexagon) the generating Toeplitz matrix.
pub fn export_matrices(
    config: &ExperimentConfig,
    level: u32,
    out_dir: &Path,
) -> Result<Vec<String>> {
    if level >= config.levels {
        return Err(Error::InvalidParameter(format!(
            "level {level} outside the configured {} levels",
            config.levels
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let meshes = mesh_levels(config)?;
    let mesh = &meshes[level as usize];
    let a = config.scalar_a();

    let mut files = Vec::new();
    let mut write = |name: &str, matrix: &convdiff::SparseMatrix| -> Result<()> {
        market::write_matrix_market_file(matrix, &out_dir.join(name))?;
        files.push(name.to_string());
        Ok(())
    };

    let theta = assemble_diffusion(mesh, &a)?;
    write("theta.mtx", &theta)?;
    if let Some(b) = config.velocity() {
        let psi = convdiff::assembly::assemble_convection(mesh, &b)?;
        write("psi.mtx", &psi)?;
    }
    let a_one = assemble_diffusion(mesh, &ScalarField::Constant(1.0))?;
    write("a_one.mtx", &a_one)?;
    let d = convdiff::precond::scaling_diagonal(&theta, &a_one)?;
    let d_matrix = convdiff::SparseMatrix::from_rows(
        d.len(),
        d.len(),
        d.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect(),
    );
    write("d.mtx", &d_matrix)?;
    if matches!(mesh.family(), MeshFamily::HexStructured(_)) && config.domain == Domain::Hexagon {
        let embedding = embed_hex(mesh)?;
        let (n1, n2) = embedding.outer.dims();
        let toeplitz = build_toeplitz(&ToeplitzSpec {
            symbol: Symbol::Ftilde,
            n1,
            n2,
        })?;
        write("toeplitz.mtx", &toeplitz)?;
    }

    let mut manifest = String::new();
    for f in &files {
        manifest.push_str(f);
        manifest.push('\n');
    }
    std::fs::write(out_dir.join("manifest.txt"), manifest)?;
    Ok(files)
}

/// Writes the level meshes in Triangle format (and a canonical dump when
/// asked); returns the written file names.
pub fn write_meshes(
    config: &ExperimentConfig,
    out_dir: &Path,
    canonical: bool,
) -> Result<Vec<String>> {
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for (level, mesh) in mesh_levels(config)?.iter().enumerate() {
        let (node, ele) = convdiff::mesh_io::export_triangle(mesh);
        let node_name = format!("level{level}.node");
        let ele_name = format!("level{level}.ele");
        std::fs::write(out_dir.join(&node_name), node)?;
        std::fs::write(out_dir.join(&ele_name), ele)?;
        files.push(node_name);
        files.push(ele_name);
        if canonical {
            let dump_name = format!("level{level}.dump");
            std::fs::write(
                out_dir.join(&dump_name),
                convdiff::mesh_io::canonical_dump(mesh),
            )?;
            files.push(dump_name);
        }
    }
    Ok(files)
}

/// CSV text with the trailing time column removed from every row; reruns of
/// a config are byte-identical under this projection.
pub fn strip_time_column(csv: &str) -> String {
    let mut out = String::new();
    for line in csv.lines() {
        match line.rfind(',') {
            Some(pos) => out.push_str(&line[..pos]),
            None => out.push_str(line),
        }
        out.push('\n');
    }
    out
}
