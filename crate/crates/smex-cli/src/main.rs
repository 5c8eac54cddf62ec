//! Command-line driver: mesh generation, well-posedness analysis, single
//! solves and convergence benchmarks. All output is plain text (the mesh
//! format, key=value lines, CSV) and every command is deterministic, so runs
//! can be diffed byte-for-byte.

use clap::{Args, Parser, Subcommand, ValueEnum};
use smex::analysis::{annulus_wellposed, corner_wellposed};
use smex::bench::{
    case_circular, case_corner, case_flat, run_convergence, ConvergenceOptions, ManufacturedCase,
};
use smex::fem::export_vertex_values;
use smex::mesh::{
    generate_corner_halfdisk, generate_disk_annulus, generate_square_split, read_mesh,
    refine_uniform, validate, write_mesh, Mesh,
};
use smex::optimize::{lambda_of, minimize, Method, OptimizerOptions, Schedule};
use smex::transmission::{prepare, Control, TransmissionProblem};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "smex",
    about = "Smooth-extension optimal-control solver for sign-changing transmission problems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh, report its quality, and write it to a file.
    Mesh(MeshArgs),
    /// Well-posedness diagnostics for the two closed-form geometries.
    Analyze(AnalyzeArgs),
    /// Solve one benchmark problem and export the composite solution.
    Solve(SolveArgs),
    /// Run a convergence sweep and write its CSV report.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Geometry {
    SquareSplit,
    DiskAnnulus,
    Corner,
}

#[derive(Args)]
struct MeshArgs {
    /// Geometry to generate.
    #[arg(long, value_enum)]
    geom: Geometry,
    /// Resolution parameter of the generator.
    #[arg(long)]
    n: usize,
    /// Number of uniform refinements to apply after generation.
    #[arg(long, default_value_t = 0)]
    refine: usize,
    /// Output path for the mesh file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(subcommand)]
    geometry: AnalyzeGeometry,
}

#[derive(Subcommand)]
enum AnalyzeGeometry {
    /// Disk-in-annulus interface: forbidden contrast set.
    Annulus {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
        /// Half-width of the ill-posedness window around forbidden values.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Interface meeting the boundary at the pi/4 corner.
    Corner {
        #[arg(long, allow_negative_numbers = true)]
        kappa: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Flat,
    Circular,
    Corner,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lbfgs,
    Cg,
}

#[derive(Args)]
struct SolverFlags {
    /// Schedule constant C in lambda = C h^q (default: the case preset).
    #[arg(long)]
    c: Option<f64>,
    /// Schedule exponent q in lambda = C h^q (default: the case preset).
    #[arg(long)]
    q: Option<f64>,
    /// Extension coefficient override (default: source-side magnitude).
    #[arg(long)]
    eps_tilde: Option<f64>,
    /// Minimization method.
    #[arg(long, value_enum, default_value = "lbfgs")]
    method: MethodArg,
    /// Relative gradient tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Sufficient-decrease constant of the backtracking line search.
    #[arg(long, default_value_t = 1e-4)]
    sufficient_decrease: f64,
    /// Step-halving factor of the backtracking line search.
    #[arg(long, default_value_t = 0.5)]
    backtrack_factor: f64,
    /// Maximum step trials per line search.
    #[arg(long, default_value_t = 40)]
    max_line_search: usize,
    /// Quasi-Newton memory depth.
    #[arg(long, default_value_t = 10)]
    memory: usize,
    /// Apply the reference optimizer configuration of the original
    /// experiments (eps = 1e-6, nbiter = 10, nbiterline = 1).
    #[arg(long, default_value_t = false)]
    preset_paper_freefem: bool,
}

impl SolverFlags {
    fn optimizer(&self) -> OptimizerOptions {
        let mut opts = if self.preset_paper_freefem {
            OptimizerOptions::paper_freefem()
        } else {
            OptimizerOptions {
                method: Method::Lbfgs,
                tolerance: self.tol,
                max_iterations: self.max_iters,
                sufficient_decrease: self.sufficient_decrease,
                backtrack_factor: self.backtrack_factor,
                max_line_search: self.max_line_search,
                memory: self.memory,
            }
        };
        opts.method = match self.method {
            MethodArg::Lbfgs => Method::Lbfgs,
            MethodArg::Cg => Method::Cg,
        };
        opts
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Benchmark case supplying the coefficients, source and exact solution.
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Contrast eps2 / eps1.
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    /// Generator resolution (default: the case's base resolution).
    #[arg(long)]
    n: Option<usize>,
    /// Solve on a mesh file instead of a generated mesh. The mesh must
    /// conform to the case's interface.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Output path for the composite solution (x y value per vertex).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output path for the per-iteration history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    case: CaseArg,
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    /// Number of mesh levels (>= 3).
    #[arg(long)]
    levels: usize,
    /// Base generator resolution (default: the case's base resolution).
    #[arg(long)]
    n: Option<usize>,
    /// Levels solved concurrently; 1 runs sequentially with warm starts.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output path for the report CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh(args) => cmd_mesh(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn generate(geom: Geometry, n: usize) -> Result<Mesh, String> {
    let mesh = match geom {
        Geometry::SquareSplit => generate_square_split(n),
        Geometry::DiskAnnulus => generate_disk_annulus(n),
        Geometry::Corner => generate_corner_halfdisk(n),
    };
    mesh.map_err(|e| e.to_string())
}

fn cmd_mesh(args: MeshArgs) -> Result<(), String> {
    let mut mesh = generate(args.geom, args.n)?;
    for _ in 0..args.refine {
        mesh = refine_uniform(&mesh);
    }
    let report = validate(&mesh).map_err(|e| e.to_string())?;
    std::fs::write(&args.out, write_mesh(&mesh))
        .map_err(|e| format!("writing {}: {e}", args.out.display()))?;
    println!("vertices={}", mesh.num_vertices());
    println!("triangles={}", mesh.triangles().len());
    println!("h={:.6e}", mesh.meshsize());
    println!("{report}");
    if !report.conforming {
        return Err("generated mesh failed validation".into());
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), String> {
    match args.geometry {
        AnalyzeGeometry::Annulus { kappa, tol } => {
            let v = annulus_wellposed(kappa, tol).map_err(|e| e.to_string())?;
            println!("verdict={}", v.verdict);
            println!("distance={:.12e}", v.distance);
        }
        AnalyzeGeometry::Corner { kappa } => {
            let v = corner_wellposed(kappa).map_err(|e| e.to_string())?;
            println!("verdict={}", v.verdict);
            println!("distance={:.12e}", v.distance);
            if let Some(sigma) = v.regularity_exponent {
                println!("sigma_D={sigma:.6}");
                // convex domain and convex extension target: sigma = 1
                let (lo, hi) = smex::optimize::recommended_q(sigma.min(1.0), 1.0)
                    .map_err(|e| e.to_string())?;
                println!("q_interval=({lo},{hi:.6})");
            }
        }
    }
    Ok(())
}

fn build_case(case: CaseArg, kappa: f64) -> Result<ManufacturedCase, String> {
    let built = match case {
        CaseArg::Flat => case_flat(kappa),
        CaseArg::Circular => case_circular(kappa),
        CaseArg::Corner => case_corner(kappa),
    };
    built.map_err(|e| e.to_string())
}

fn build_problem(
    case: &ManufacturedCase,
    eps_tilde: Option<f64>,
) -> Result<TransmissionProblem, String> {
    match eps_tilde {
        Some(et) => TransmissionProblem::with_extension_coefficient(
            1.0,
            case.kappa,
            et,
            case.source.clone(),
            case.extension_source,
        )
        .map_err(|e| e.to_string()),
        None => case.problem().map_err(|e| e.to_string()),
    }
}

fn schedule_of(case: &ManufacturedCase, flags: &SolverFlags) -> Result<Schedule, String> {
    let schedule = Schedule::new(
        flags.c.unwrap_or(case.schedule.c),
        flags.q.unwrap_or(case.schedule.q),
    )
    .map_err(|e| e.to_string())?;
    if schedule.outside_admissible(case.admissible_q_max) {
        eprintln!(
            "warning: schedule exponent q = {} is outside the admissible interval (0, {:.4})",
            schedule.q, case.admissible_q_max
        );
    }
    Ok(schedule)
}

fn cmd_solve(args: SolveArgs) -> Result<(), String> {
    let case = build_case(args.case, args.kappa)?;
    let mesh = match &args.mesh {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            read_mesh(&text).map_err(|e| e.to_string())?
        }
        None => case
            .base_mesh(args.n.unwrap_or_else(|| case.default_base_resolution()))
            .map_err(|e| e.to_string())?,
    };
    let problem = build_problem(&case, args.solver.eps_tilde)?;
    let schedule = schedule_of(&case, &args.solver)?;

    let ops = prepare(&problem, Arc::new(mesh), case.quadrature).map_err(|e| e.to_string())?;
    let lambda = lambda_of(schedule, ops.meshsize()).map_err(|e| e.to_string())?;
    let result = minimize(
        &ops,
        lambda,
        Control::zeros(ops.control_dimension()),
        &args.solver.optimizer(),
    )
    .map_err(|e| e.to_string())?;

    let last = result
        .history
        .records
        .last()
        .expect("history is never empty");
    println!("h={:.6e}", ops.meshsize());
    println!("lambda={:.6e}", lambda);
    println!("iterations={}", result.history.iterations());
    println!("termination={}", result.history.termination);
    println!("cost={:.6e}", last.cost);
    println!("misfit={:.6e}", last.misfit);
    println!("control_norm={:.6e}", ops.control_norm(&result.control));

    if let Some(path) = &args.out {
        let text = export_vertex_values(&ops.composite(&result.state));
        std::fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    if let Some(path) = &args.history {
        std::fs::write(path, result.history.to_csv())
            .map_err(|e| format!("writing {}: {e}", path.display()))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), String> {
    let case = build_case(args.case, args.kappa)?;
    if args.solver.eps_tilde.is_some() {
        // the sweep rebuilds the problem per level from the case itself
        return Err("--eps-tilde is not supported by bench; edit the case instead".into());
    }
    let mut case = case;
    case.schedule = schedule_of(&case, &args.solver)?;
    let mut opts = ConvergenceOptions::new(
        args.levels,
        args.n.unwrap_or_else(|| case.default_base_resolution()),
    );
    opts.optimizer = args.solver.optimizer();
    opts.jobs = args.jobs.max(1);

    let report = run_convergence(&case, &opts).map_err(|e| e.to_string())?;
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| format!("writing {}: {e}", path.display()))?
        }
        None => print!("{csv}"),
    }
    println!("relL2_rate={:.4}", report.l2_fit.slope);
    println!("relH1_rate={:.4}", report.h1_fit.slope);
    Ok(())
}
