//! `ads`: mesh export, simulation runs, convergence sweeps and the invariant
//! check suite.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage error, 3 runtime error.

mod checks;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ads_core::evolve::{evolve, initial_state, StepPreconditioner};
use ads_core::mesh::write_vtk;
use ads_core::sparsela::io::write_triplets;
use ads_core::sparsela::SolverOptions;
use ads_core::{
    build_operator, build_shell_mesh, lemma_monitor, mesh_statistics, setup_problem, LatticeSpec, SimReport,
    SimulationConfig,
};

#[derive(Parser)]
#[command(name = "ads", version, about = "Decaying Maxwell solutions with impedance boundary conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the shell mesh, print tag counts and optionally write VTK.
    Mesh {
        /// Mesh exponent: 2^J cells per axis.
        #[arg(long = "J", alias = "level", default_value_t = 3, value_parser = clap::value_parser!(u32).range(2..=9))]
        level: u32,
        #[arg(long, default_value_t = LatticeSpec::DEFAULT_OUTER_RADIUS, value_parser = outer_radius)]
        outer_radius: f64,
        /// Legacy VTK output path.
        #[arg(long)]
        vtk: Option<PathBuf>,
    },
    /// Run the time-stepping experiment; writes CSV and prints the norm table.
    Run {
        #[command(flatten)]
        sim: SimArgs,
        /// CSV output path (`-` for stdout, which suppresses the table).
        #[arg(long, default_value = "run.csv")]
        csv: PathBuf,
        /// Write the final state (harmonic form and p at vertices) as VTK.
        #[arg(long)]
        export_vtk: Option<PathBuf>,
        /// Write assembled matrices as triplet files into this directory.
        #[arg(long)]
        dump_matrices: Option<PathBuf>,
    },
    /// Run several levels and tabulate the final energy against h.
    Convergence {
        #[command(flatten)]
        sim: SimArgs,
        /// Mesh exponents to run.
        #[arg(long, value_delimiter = ',', default_values_t = [3u32, 4], value_parser = clap::value_parser!(u32).range(2..=9))]
        levels: Vec<u32>,
        #[arg(long, default_value = "convergence.csv")]
        csv: PathBuf,
    },
    /// Run the invariant suite; nonzero exit on failure.
    Check {
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Args, Clone)]
struct SimArgs {
    #[arg(long = "J", alias = "level", default_value_t = 3, value_parser = clap::value_parser!(u32).range(2..=9))]
    level: u32,
    #[arg(long, default_value_t = 0.05, value_parser = positive)]
    gamma: f64,
    #[arg(long, default_value_t = 0.1, value_parser = positive)]
    tau: f64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = LatticeSpec::DEFAULT_OUTER_RADIUS, value_parser = outer_radius)]
    outer_radius: f64,
    /// Relative tolerance of the CG solves (harmonic form, projection).
    #[arg(long, default_value_t = 1e-12, value_parser = tolerance)]
    cg_tol: f64,
    /// Relative tolerance of the MINRES solve in each step.
    #[arg(long, default_value_t = 1e-10, value_parser = tolerance)]
    minres_tol: f64,
    /// Drop the boundary term (energy-conserving mode).
    #[arg(long)]
    zero_impedance: bool,
    /// Skip the projection of the initial field.
    #[arg(long)]
    negative_control: bool,
    #[arg(long, value_enum, default_value_t = Precond::BlockIc)]
    preconditioner: Precond,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precond {
    None,
    Jacobi,
    BlockIc,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn outer_radius(s: &str) -> Result<f64, String> {
    let v = positive(s)?;
    if v > 2.0 {
        Ok(v)
    } else {
        Err(format!("must exceed 2, got {v}"))
    }
}

fn tolerance(s: &str) -> Result<f64, String> {
    let v = positive(s)?;
    if v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {v}"))
    }
}

impl SimArgs {
    fn config(&self) -> SimulationConfig {
        SimulationConfig {
            level: self.level,
            outer_radius: self.outer_radius,
            gamma: self.gamma,
            tau: self.tau,
            steps: self.steps,
            cg: SolverOptions::cg_default().with_tol(self.cg_tol),
            minres: SolverOptions::minres_default().with_tol(self.minres_tol),
            zero_impedance: self.zero_impedance,
            unprojected: self.negative_control,
            preconditioner: match self.preconditioner {
                Precond::None => StepPreconditioner::None,
                Precond::Jacobi => StepPreconditioner::Jacobi,
                Precond::BlockIc => StepPreconditioner::BlockIncompleteCholesky,
            },
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn cmd_mesh(level: u32, outer_radius: f64, vtk: Option<&Path>) -> Result<()> {
    let spec = LatticeSpec::new(level)?.with_outer_radius(outer_radius)?;
    let mesh = build_shell_mesh::<f64>(&spec)?;
    print!("{}", mesh_statistics(&mesh));
    if let Some(path) = vtk {
        let mut out = create(path)?;
        write_vtk(&mut out, &mesh, &[]).with_context(|| format!("writing {}", path.display()))?;
        out.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_report(report: &SimReport, csv: &Path) -> Result<()> {
    if csv == Path::new("-") {
        report.write_csv(&mut io::stdout().lock())?;
        return Ok(());
    }
    let mut out = create(csv)?;
    report.write_csv(&mut out).with_context(|| format!("writing {}", csv.display()))?;
    out.flush()?;
    report.write_table(&mut io::stdout().lock())?;
    Ok(())
}

fn cmd_run(sim: &SimArgs, csv: &Path, vtk: Option<&Path>, dump: Option<&Path>) -> Result<()> {
    let config = sim.config();
    let problem = setup_problem::<f64>(&config)?;
    let u0 = initial_state(&problem, &config)?;
    let mut op = build_operator(&problem.matrices, &problem.incidence, config.tau, config.zero_impedance)?;
    op.set_preconditioner(config.preconditioner)?;

    if let Some(dir) = dump {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let m = &problem.matrices;
        for (name, a) in [
            ("mass_v", &m.mass_v),
            ("mass_e", &m.mass_e),
            ("mass_f", &m.mass_f),
            ("stiffness_v", &m.stiffness_v),
            ("impedance", &m.impedance),
            ("grad", &problem.incidence.grad),
            ("curl", &problem.incidence.curl),
            ("system", &op.lhs),
        ] {
            let path = dir.join(format!("{name}.txt"));
            let mut out = create(&path)?;
            write_triplets(&mut out, a).with_context(|| format!("writing {}", path.display()))?;
            out.flush()?;
        }
    }

    let (report, u) = evolve(&problem, &op, u0, config.steps, &config.minres)?;
    write_report(&report, csv)?;

    if let Some(path) = vtk {
        let mut p = vec![0.0; problem.mesh.n_vertices()];
        for (d, &v) in problem.dofs.vertex.entities().iter().enumerate() {
            p[v] = u.p()[d];
        }
        let mut out = create(path)?;
        write_vtk(&mut out, &problem.mesh, &[("harmonic", &problem.harmonic.nodal), ("p", &p)])
            .with_context(|| format!("writing {}", path.display()))?;
        out.flush()?;
    }
    let lemma = lemma_monitor(&report);
    if !lemma.passed() {
        eprintln!(
            "note: divergence invariants not preserved (p ratio {:.3e}, div ratio {:.3e})",
            lemma.max_p_ratio, lemma.max_div_ratio
        );
    }
    Ok(())
}

/// Returns whether every level succeeded.
fn cmd_convergence(sim: &SimArgs, levels: &[u32], csv: &Path) -> Result<bool> {
    let mut rows = Vec::new();
    let mut all_ok = true;
    for &level in levels {
        let config = SimulationConfig {
            level,
            ..sim.config()
        };
        match ads_core::run_simulation::<f64>(&config) {
            Ok(report) => {
                let last = report.last().expect("step 0 is always recorded");
                let h = LatticeSpec::new(level)?.h();
                println!("J={level} h={h} energy={}", ads_core::fmt::format_e6(last.energy));
                rows.push((level, h, last.energy));
            }
            Err(e) => {
                all_ok = false;
                eprintln!("J={level}: {e}");
            }
        }
    }
    let mut out: Box<dyn Write> = if csv == Path::new("-") {
        Box::new(io::stdout().lock())
    } else {
        Box::new(create(csv)?)
    };
    writeln!(out, "J,h,energy")?;
    for (level, h, energy) in rows {
        writeln!(
            out,
            "{level},{},{}",
            ads_core::fmt::format_e6(h),
            ads_core::fmt::format_e6(energy)
        )?;
    }
    out.flush()?;
    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mesh {
            level,
            outer_radius,
            vtk,
        } => cmd_mesh(*level, *outer_radius, vtk.as_deref()).map(|_| true),
        Command::Run {
            sim,
            csv,
            export_vtk,
            dump_matrices,
        } => cmd_run(sim, csv, export_vtk.as_deref(), dump_matrices.as_deref()).map(|_| true),
        Command::Convergence { sim, levels, csv } => cmd_convergence(sim, levels, csv),
        Command::Check { sim } => checks::run(&sim.config()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
