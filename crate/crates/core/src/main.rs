//! Batch front end for the micropolar spectral solver.
//!
//! Subcommands: `run` (full loading program from a config file or
//! preset), `scan-lengths` (length-scale heatmap), `bench` (wall-time
//! scaling), `iterations` (iteration count vs hardening contrast),
//! `mnms-verify` (manufactured-solution closure), `convergence`
//! (space × time refinement tables), and `gen-geom` (voxel-file
//! export).  All tabular output is CSV with `#` metadata lines.

use clap::{Parser, Subcommand, ValueEnum};
use polarfft::config::{ConfigError, RunConfig};
use polarfft::material::{MaterialTable, PhaseParams};
use polarfft::microstructure::{gen_four_spheres, gen_laminate, save_voxels};
use polarfft::solver::{
    ErrorMetric, LoadingPath, Solver, SolverConfig, SolverError, SolverReport,
};
use polarfft::tensors::Tensor2;
use polarfft::verification::{convergence_study, mnms_run, ConvGeometry};
use polarfft::vtk::{standard_fields, write_vtk};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "polarfft",
    about = "Periodic FFT spectral solver for micropolar elastoplastic composites",
    version
)]
struct Cli {
    /// Output directory for CSV/VTK files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (falls back to POLARFFT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized geometry generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a loading program described by a config file or preset.
    Run {
        /// Config file path (flat key = value format).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in experiment preset name.
        #[arg(long)]
        preset: Option<String>,
        /// Steps at which VTK field snapshots are written
        /// (comma-separated; overrides output.vtk_steps).
        #[arg(long, value_delimiter = ',')]
        snapshot_steps: Vec<usize>,
    },
    /// Scan elastic/plastic internal length scales on the four-sphere cell.
    ScanLengths {
        /// Elastic length-scale values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.25, 0.5, 1.0])]
        le: Vec<f64>,
        /// Plastic length-scale values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.25, 0.5, 1.0])]
        lp: Vec<f64>,
        /// Voxels per axis.
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1e-5)]
        epsilon: f64,
    },
    /// Measure wall time per resolution on a laminate cell.
    Bench {
        /// Voxels per axis for each resolution.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8, 16, 32])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Iteration counts per step as hardening moduli go to zero.
    Iterations {
        /// Hardening contrast values x (phase-2 t_H = m_H = x).
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.001, 0.005, 0.01, 0.05, 0.1])]
        hardening: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1e-8)]
        epsilon: f64,
    },
    /// Manufactured-solution closure check on the centered-cube cell.
    MnmsVerify {
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Loading scale (1.0 standard; 0.01 keeps the cell elastic).
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Space × time convergence table.
    Convergence {
        #[arg(long, value_enum, default_value_t = ConvKind::Laminate)]
        geometry: ConvKind,
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16])]
        space: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 30, 100])]
        time: Vec<usize>,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
    },
    /// Build the configured geometry and write it as a voxel file.
    GenGeom {
        #[arg(long)]
        config: PathBuf,
        /// Output file name (within --out).
        #[arg(long, default_value = "cell.mpvx")]
        name: String,
        #[arg(long)]
        binary: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvKind {
    Laminate,
    Sphere,
}

/// Process failure with the exit code mandated for its category.
enum CmdError {
    Config(String),
    NonConvergence(String),
    Io(String),
    Other(String),
}

impl CmdError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::NonConvergence(_) => 3,
            Self::Io(_) => 4,
            Self::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::NonConvergence(m) | Self::Io(m) | Self::Other(m) => m,
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(io) => Self::Io(io.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<SolverError> for CmdError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NonConvergence { .. } => Self::NonConvergence(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("POLARFFT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: could not set thread count: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CmdError> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.cmd {
        Cmd::Run {
            config,
            preset,
            snapshot_steps,
        } => cmd_run(cli, config.as_deref(), preset.as_deref(), snapshot_steps),
        Cmd::ScanLengths {
            le,
            lp,
            n,
            steps,
            epsilon,
        } => cmd_scan_lengths(cli, le, lp, *n, *steps, *epsilon),
        Cmd::Bench {
            sizes,
            repeats,
            steps,
        } => cmd_bench(cli, sizes, *repeats, *steps),
        Cmd::Iterations {
            hardening,
            steps,
            epsilon,
        } => cmd_iterations(cli, hardening, *steps, *epsilon),
        Cmd::MnmsVerify {
            epsilon,
            steps,
            dt,
            amplitude,
        } => cmd_mnms(cli, *epsilon, *steps, *dt, *amplitude),
        Cmd::Convergence {
            geometry,
            space,
            time,
            epsilon,
        } => cmd_convergence(cli, *geometry, space, time, *epsilon),
        Cmd::GenGeom {
            config,
            name,
            binary,
        } => cmd_gen_geom(cli, config, name, *binary),
    }
}

fn metric_name(m: ErrorMetric) -> &'static str {
    match m {
        ErrorMetric::Local => "local",
        ErrorMetric::Average => "average",
    }
}

fn report_csv(report: &SolverReport, meta: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s.push_str("step,time");
    for f in ["e", "g", "t", "m"] {
        for k in 1..=3 {
            for l in 1..=3 {
                let _ = write!(s, ",{f}{k}{l}");
            }
        }
    }
    s.push_str(",t_eq,m_eq,p,q,iterations,err,dissipation\n");
    for r in &report.steps {
        let _ = write!(s, "{},{:.17e}", r.step, r.time);
        for t in [&r.e_avg, &r.g_avg, &r.t_avg, &r.m_avg] {
            for k in 0..3 {
                for l in 0..3 {
                    let _ = write!(s, ",{:.17e}", t[(k, l)]);
                }
            }
        }
        let _ = writeln!(
            s,
            ",{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e}",
            r.t_eq_avg, r.m_eq_avg, r.p_avg, r.q_avg, r.iterations, r.err, r.dissipation
        );
    }
    s
}

fn cmd_run(
    cli: &Cli,
    config: Option<&Path>,
    preset: Option<&str>,
    snapshot_flag: &[usize],
) -> Result<(), CmdError> {
    let cfg = match (config, preset) {
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        _ => {
            return Err(CmdError::Config(
                "exactly one of --config or --preset is required".into(),
            ))
        }
    };
    let grid = cfg.geometry.build(cli.seed)?;
    cfg.validate_grid(&grid)?;
    let snapshots: Vec<usize> = if snapshot_flag.is_empty() {
        cfg.output.vtk_steps.clone()
    } else {
        snapshot_flag.to_vec()
    };

    let params: Vec<PhaseParams> = grid
        .phases
        .iter()
        .map(|&id| *cfg.materials.phase(id).expect("validated phase id"))
        .collect();
    let loading = cfg.loading.to_path();
    let solver = Solver::new(grid, cfg.materials.clone(), cfg.solver)?;

    let mut vtk_error: Option<std::io::Error> = None;
    let (report, _) = solver.run_with(&loading, |step, _time, fields| {
        if snapshots.contains(&step) && vtk_error.is_none() {
            let path = cli.out.join(format!("fields_step{step:05}.vtk"));
            if let Err(e) = write_vtk(&solver.grid, &standard_fields(&params, fields), &path) {
                vtk_error = Some(std::io::Error::other(e.to_string()));
            }
        }
    })?;
    if let Some(e) = vtk_error {
        return Err(e.into());
    }

    let meta = vec![
        (
            "preset".to_string(),
            cfg.preset_name.clone().unwrap_or_else(|| "none".into()),
        ),
        ("material".to_string(), cfg.material_name.clone()),
        ("seed".to_string(), cli.seed.to_string()),
        ("epsilon".to_string(), format!("{:e}", cfg.solver.epsilon)),
        ("metric".to_string(), metric_name(cfg.solver.metric).into()),
    ];
    let csv = report_csv(&report, &meta);
    std::fs::write(cli.out.join(&cfg.output.report), csv)?;
    println!(
        "completed {} steps; report written to {}",
        report.steps.len(),
        cli.out.join(&cfg.output.report).display()
    );
    Ok(())
}

fn cmd_scan_lengths(
    cli: &Cli,
    le: &[f64],
    lp: &[f64],
    n: usize,
    steps: usize,
    epsilon: f64,
) -> Result<(), CmdError> {
    if le.iter().chain(lp).any(|&v| v <= 0.0) {
        return Err(CmdError::Config("length scales must be positive".into()));
    }
    let grid = gen_four_spheres(n);
    let mut e_rate = Tensor2::ZERO;
    e_rate[(2, 1)] = 1.0;
    let mut g_rate = Tensor2::ZERO;
    g_rate[(0, 0)] = 1.0;
    let loading = LoadingPath::monotonic(e_rate, g_rate, 0.01, steps);
    let config = SolverConfig {
        epsilon,
        metric: ErrorMetric::Local,
        max_iters: 10_000,
    };

    let mut csv = String::from("# scan = length-scales (four-sphere cell)\n");
    let _ = writeln!(csv, "# n = {n}");
    csv.push_str("l_e,l_p,t32,m11\n");
    for &e in le {
        for &p in lp {
            let materials = MaterialTable::table3(e, p);
            let solver = Solver::new(grid.clone(), materials, config)?;
            let (report, _) = solver.run(&loading)?;
            let last = report.steps.last().unwrap();
            let _ = writeln!(
                csv,
                "{e:.6e},{p:.6e},{:.17e},{:.17e}",
                last.t_avg[(2, 1)],
                last.m_avg[(0, 0)]
            );
            println!(
                "l_e = {e:<6} l_p = {p:<6} T32 = {:>12.6} M11 = {:>12.6}",
                last.t_avg[(2, 1)],
                last.m_avg[(0, 0)]
            );
        }
    }
    std::fs::write(cli.out.join("scan_lengths.csv"), csv)?;
    Ok(())
}

fn cmd_bench(cli: &Cli, sizes: &[usize], repeats: usize, steps: usize) -> Result<(), CmdError> {
    if repeats == 0 {
        return Err(CmdError::Config("need at least one repeat".into()));
    }
    let mut e_rate = Tensor2::ZERO;
    e_rate[(0, 1)] = 1.0;
    let loading = LoadingPath::monotonic(e_rate, Tensor2::ZERO, 0.01, steps);
    let config = SolverConfig::default();

    let mut csv = String::from("# bench = laminate wall-time scaling\n");
    csv.push_str("voxels,n_log_n,mean_seconds,min_seconds,max_seconds\n");
    for &n in sizes {
        let (grid, _) = gen_laminate([n, n, n], [1.0; 3], 0.5, 0);
        let voxels = grid.len();
        let mut times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let solver = Solver::new(grid.clone(), MaterialTable::table4(), config)?;
            let start = Instant::now();
            solver.run(&loading)?;
            times.push(start.elapsed().as_secs_f64());
        }
        let mean = times.iter().sum::<f64>() / repeats as f64;
        let min = times.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = times.iter().cloned().fold(0.0, f64::max);
        let nlogn = voxels as f64 * (voxels as f64).ln().max(1.0);
        let _ = writeln!(csv, "{voxels},{nlogn:.6e},{mean:.6e},{min:.6e},{max:.6e}");
        println!("{voxels:>7} voxels: {mean:.4} s (min {min:.4}, max {max:.4})");
    }
    std::fs::write(cli.out.join("bench.csv"), csv)?;
    Ok(())
}

fn cmd_iterations(
    cli: &Cli,
    hardening: &[f64],
    steps: usize,
    epsilon: f64,
) -> Result<(), CmdError> {
    let (grid, _) = gen_laminate([8, 8, 8], [1.0; 3], 0.5, 0);
    let mut e_rate = Tensor2::ZERO;
    e_rate[(0, 2)] = 1.0;
    let mut g_rate = Tensor2::ZERO;
    g_rate[(2, 1)] = 1.0;
    let loading = LoadingPath::monotonic(e_rate, g_rate, 0.01, steps);
    let config = SolverConfig {
        epsilon,
        metric: ErrorMetric::Local,
        max_iters: 10_000,
    };

    let mut csv = String::from("# iterations = hardening-contrast study (8x8x8 laminate)\n");
    csv.push_str("hardening,step,iterations\n");
    for &x in hardening {
        if x < 0.0 {
            return Err(CmdError::Config("hardening must be nonnegative".into()));
        }
        let solver = Solver::new(grid.clone(), MaterialTable::table5(x), config)?;
        let (report, _) = solver.run(&loading)?;
        for r in &report.steps {
            let _ = writeln!(csv, "{x:.6e},{},{}", r.step, r.iterations);
        }
        let last = report.steps.last().unwrap();
        println!("x = {x:<8} final-step iterations: {}", last.iterations);
    }
    std::fs::write(cli.out.join("iterations.csv"), csv)?;
    Ok(())
}

fn cmd_mnms(
    cli: &Cli,
    epsilon: f64,
    steps: usize,
    dt: f64,
    amplitude: f64,
) -> Result<(), CmdError> {
    let report = mnms_run(epsilon, steps, dt, amplitude, 1e-12)
        .map_err(|e| CmdError::Other(e.to_string()))?;
    let mut csv = String::from("# verification = manufactured-solution closure\n");
    let _ = writeln!(csv, "# epsilon = {epsilon:e}");
    csv.push_str("step,time,err_e,err_gamma,err_t,err_m,iterations\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{:.17e},{:.6e},{:.6e},{:.6e},{:.6e},{}",
            r.step, r.time, r.err_e, r.err_gamma, r.err_t, r.err_m, r.iterations
        );
    }
    std::fs::write(cli.out.join("mnms.csv"), csv)?;
    println!(
        "max field error over all steps/voxels/components: {:.3e} (threshold {epsilon:.1e})",
        report.max_error
    );
    if report.max_error <= epsilon {
        println!("closure: PASS");
        Ok(())
    } else {
        Err(CmdError::Other("closure: FAIL".into()))
    }
}

fn cmd_convergence(
    cli: &Cli,
    kind: ConvKind,
    space: &[usize],
    time: &[usize],
    epsilon: f64,
) -> Result<(), CmdError> {
    let (geom, name) = match kind {
        ConvKind::Laminate => (ConvGeometry::Laminate50, "laminate"),
        ConvKind::Sphere => (ConvGeometry::CenteredSphere, "sphere"),
    };
    let table = convergence_study(geom, space, time, epsilon)?;
    let mut csv = format!("# convergence = {name}\n");
    let _ = writeln!(csv, "# reference_t12 = {:.17e}", table.reference_t12);
    csv.push_str("space,time,abs_error\n");
    for (si, &ns) in table.space_levels.iter().enumerate() {
        for (ti, &nt) in table.time_levels.iter().enumerate() {
            let _ = writeln!(csv, "{ns},{nt},{:.6e}", table.errors[si][ti]);
        }
    }
    std::fs::write(cli.out.join(format!("convergence_{name}.csv")), csv)?;
    let (spatial, temporal) = table.axis_variations();
    println!("{name}: spatial-axis variation {spatial:.3e}, temporal-axis variation {temporal:.3e}");
    Ok(())
}

fn cmd_gen_geom(cli: &Cli, config: &Path, name: &str, binary: bool) -> Result<(), CmdError> {
    let cfg = RunConfig::load(config)?;
    let grid = cfg.geometry.build(cli.seed)?;
    cfg.validate_grid(&grid)?;
    let path = cli.out.join(name);
    save_voxels(&grid, &path, binary).map_err(|e| CmdError::Io(e.to_string()))?;
    println!(
        "wrote {} ({}x{}x{} voxels, {} phases)",
        path.display(),
        grid.dims[0],
        grid.dims[1],
        grid.dims[2],
        grid.num_phases()
    );
    Ok(())
}
