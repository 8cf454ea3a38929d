//! Crank–Nicolson time stepping of the semi-discrete system
//! `M u' = −(A + Z) u` for `u = (E, B, p)`.
//!
//! Each step solves `J (M/τ + (A+Z)/2) u_k = J (M/τ − (A+Z)/2) u_{k−1}` with
//! `J = diag(I, −I, −I)`, which makes the system matrix symmetric
//! (indefinite) so MINRES applies. `p` is carried as an unknown; with
//! divergence-free initial data it stays zero up to solver tolerance, and the
//! report tracks that.

use std::io::Write;
use std::sync::Arc;

use crate::assembly::{assemble_system, SystemMatrices};
use crate::derham::{enumerate_dofs, incidence, interpolate_edge_field, DofMaps, IncidenceMatrices};
use crate::error::{Error, Result};
use crate::fields::{discrete_harmonic_form, initial_b, project_initial_e, AdsParameters, HarmonicForm};
use crate::fmt::format_e6;
use crate::mesh::{build_shell_mesh, LatticeSpec, Mesh};
use crate::scalar::Real;
use crate::sparsela::{
    dot, minres_solve_with, norm2, BlockDiagonal, BlockVector, CsrMatrix, IncompleteCholesky, Jacobi, Preconditioner,
    SolveStats, SolverOptions,
};

pub const CSV_HEADER: &str = "step,time,E_L2,B_L2,p_L2,energy,minres_iters,div_residual";

/// Preconditioner for the MINRES solve of each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepPreconditioner {
    None,
    /// `diag(|a_ii|)` of the full symmetric system.
    Jacobi,
    /// Zero fill-in incomplete Cholesky of the three diagonal blocks
    /// `M_e/τ + Z/2`, `M_f/τ`, `M_v/τ`.
    #[default]
    BlockIncompleteCholesky,
}

/// Symmetrized Crank–Nicolson operators.
#[derive(Clone)]
pub struct EvolutionOperator<T: Real = f64> {
    /// `J (M/τ + (A+Z)/2)`, symmetric.
    pub lhs: CsrMatrix<T>,
    /// `J (M/τ − (A+Z)/2)`.
    pub rhs: CsrMatrix<T>,
    /// `diag(M_e, M_f, M_v)`.
    pub mass: CsrMatrix<T>,
    pub tau: T,
    pub sizes: [usize; 3],
    pub impedance_active: bool,
    preconditioner: Arc<dyn Preconditioner<T>>,
    preconditioner_kind: StepPreconditioner,
    diagonal_blocks: [CsrMatrix<T>; 3],
}

impl<T: Real> std::fmt::Debug for EvolutionOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolutionOperator")
            .field("sizes", &self.sizes)
            .field("tau", &self.tau)
            .field("nnz", &self.lhs.nnz())
            .field("impedance_active", &self.impedance_active)
            .field("preconditioner", &self.preconditioner_kind)
            .finish()
    }
}

struct Blocks<T: Real> {
    /// `M_f K`
    c: CsrMatrix<T>,
    /// `K^T M_f`
    ct: CsrMatrix<T>,
    /// `M_e G`
    d: CsrMatrix<T>,
    /// `G^T M_e`
    dt: CsrMatrix<T>,
}

fn coupling_blocks<T: Real>(m: &SystemMatrices<T>, inc: &IncidenceMatrices<T>) -> Result<Blocks<T>> {
    let c = m.mass_f.matmul(&inc.curl)?;
    let d = m.mass_e.matmul(&inc.grad)?;
    Ok(Blocks {
        ct: c.transpose(),
        dt: d.transpose(),
        c,
        d,
    })
}

fn sizes_of<T: Real>(m: &SystemMatrices<T>) -> [usize; 3] {
    [m.mass_e.nrows(), m.mass_f.nrows(), m.mass_v.nrows()]
}

/// The skew-symmetric operator `A` of `M u' = −(A + Z) u`:
/// `[[0, −KᵀM_f, M_e G], [M_f K, 0, 0], [−Gᵀ M_e, 0, 0]]`.
pub fn skew_operator<T: Real>(m: &SystemMatrices<T>, inc: &IncidenceMatrices<T>) -> Result<CsrMatrix<T>> {
    let b = coupling_blocks(m, inc)?;
    let s = sizes_of(m);
    let neg = -T::one();
    let mct = b.ct.scaled(neg);
    let mdt = b.dt.scaled(neg);
    CsrMatrix::from_blocks(
        &s,
        &s,
        &[
            vec![None, Some(&mct), Some(&b.d)],
            vec![Some(&b.c), None, None],
            vec![Some(&mdt), None, None],
        ],
    )
}

pub fn block_mass<T: Real>(m: &SystemMatrices<T>) -> Result<CsrMatrix<T>> {
    let s = sizes_of(m);
    CsrMatrix::from_blocks(
        &s,
        &s,
        &[
            vec![Some(&m.mass_e), None, None],
            vec![None, Some(&m.mass_f), None],
            vec![None, None, Some(&m.mass_v)],
        ],
    )
}

/// Builds `J·LHS` and `J·RHS`. With `zero_impedance` the boundary term is
/// dropped (conservative test mode).
pub fn build_operator<T: Real>(
    m: &SystemMatrices<T>,
    inc: &IncidenceMatrices<T>,
    tau: T,
    zero_impedance: bool,
) -> Result<EvolutionOperator<T>> {
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
    }
    let b = coupling_blocks(m, inc)?;
    let s = sizes_of(m);
    let half = T::lit(0.5);
    let inv_tau = T::one() / tau;

    let me_tau = m.mass_e.scaled(inv_tau);
    let (ee_lhs, ee_rhs) = if zero_impedance {
        (me_tau.clone(), me_tau)
    } else {
        (
            me_tau.add_scaled(T::one(), &m.impedance, half)?,
            me_tau.add_scaled(T::one(), &m.impedance, -half)?,
        )
    };
    let mf_tau = m.mass_f.scaled(inv_tau);
    let mv_tau = m.mass_v.scaled(inv_tau);
    let mf_neg = mf_tau.scaled(-T::one());
    let mv_neg = mv_tau.scaled(-T::one());
    let ct_half = b.ct.scaled(half);
    let ct_half_neg = b.ct.scaled(-half);
    let c_half = b.c.scaled(half);
    let c_half_neg = b.c.scaled(-half);
    let d_half = b.d.scaled(half);
    let d_half_neg = b.d.scaled(-half);
    let dt_half = b.dt.scaled(half);
    let dt_half_neg = b.dt.scaled(-half);

    let lhs = CsrMatrix::from_blocks(
        &s,
        &s,
        &[
            vec![Some(&ee_lhs), Some(&ct_half_neg), Some(&d_half)],
            vec![Some(&c_half_neg), Some(&mf_neg), None],
            vec![Some(&dt_half), None, Some(&mv_neg)],
        ],
    )?;
    let rhs = CsrMatrix::from_blocks(
        &s,
        &s,
        &[
            vec![Some(&ee_rhs), Some(&ct_half), Some(&d_half_neg)],
            vec![Some(&c_half), Some(&mf_neg), None],
            vec![Some(&dt_half_neg), None, Some(&mv_neg)],
        ],
    )?;
    let mut op = EvolutionOperator {
        lhs,
        rhs,
        mass: block_mass(m)?,
        tau,
        sizes: s,
        impedance_active: !zero_impedance,
        preconditioner: Arc::new(crate::sparsela::precond::Identity(s.iter().sum())),
        preconditioner_kind: StepPreconditioner::None,
        diagonal_blocks: [ee_lhs, mf_tau, mv_tau],
    };
    op.set_preconditioner(StepPreconditioner::default())?;
    Ok(op)
}

impl<T: Real> EvolutionOperator<T> {
    pub fn preconditioner_kind(&self) -> StepPreconditioner {
        self.preconditioner_kind
    }

    pub fn set_preconditioner(&mut self, kind: StepPreconditioner) -> Result<()> {
        self.preconditioner = match kind {
            StepPreconditioner::None => Arc::new(crate::sparsela::precond::Identity(self.lhs.nrows())),
            StepPreconditioner::Jacobi => Arc::new(Jacobi::new(&self.lhs)),
            StepPreconditioner::BlockIncompleteCholesky => {
                let mut blocks: Vec<Box<dyn Preconditioner<T>>> = Vec::with_capacity(3);
                for b in &self.diagonal_blocks {
                    blocks.push(Box::new(IncompleteCholesky::new(b)?));
                }
                Arc::new(BlockDiagonal::new(blocks))
            }
        };
        self.preconditioner_kind = kind;
        Ok(())
    }

    /// Undoes the `J` row scaling: returns `(LHS, RHS)` before
    /// symmetrization.
    pub fn unsymmetrized(&self) -> (CsrMatrix<T>, CsrMatrix<T>) {
        let n = self.lhs.nrows();
        let j: Vec<T> = (0..n)
            .map(|i| if i < self.sizes[0] { T::one() } else { -T::one() })
            .collect();
        let ones = vec![T::one(); n];
        (
            self.lhs.scale_rows_cols(&j, &ones).expect("square"),
            self.rhs.scale_rows_cols(&j, &ones).expect("square"),
        )
    }

    /// `‖u‖²_M`
    pub fn energy(&self, u: &BlockVector<T>) -> T {
        let mu = self.mass.spmv(u.as_slice()).expect("state length");
        dot(u.as_slice(), &mu)
    }
}

/// One Crank–Nicolson step, warm-started from `u_prev`. `opts.jacobi` is
/// ignored; the operator's own preconditioner is used.
pub fn cn_step<T: Real>(
    op: &EvolutionOperator<T>,
    u_prev: &BlockVector<T>,
    opts: &SolverOptions<T>,
) -> Result<(BlockVector<T>, SolveStats)> {
    if u_prev.sizes() != op.sizes {
        return Err(Error::DimensionMismatch {
            expected: op.lhs.nrows(),
            actual: u_prev.len(),
        });
    }
    if !u_prev.is_finite() {
        return Err(Error::InvalidParameter("state contains non-finite values".into()));
    }
    let rhs = op.rhs.spmv(u_prev.as_slice())?;
    let (x, stats) = minres_solve_with(&op.lhs, &rhs, Some(u_prev.as_slice()), opts, op.preconditioner.as_ref())?;
    Ok((BlockVector::from_vec(x, op.sizes), stats))
}

/// Library-level run configuration. Defaults reproduce the reference
/// experiment: `J = 3`, `γ = 0.05`, `τ = 0.1`, 20 steps.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub level: u32,
    pub outer_radius: f64,
    pub gamma: f64,
    pub tau: f64,
    pub steps: usize,
    pub cg: SolverOptions<f64>,
    pub minres: SolverOptions<f64>,
    /// Drop the impedance term (energy-conserving test mode).
    pub zero_impedance: bool,
    /// Skip the divergence/harmonic projection of the initial field.
    pub unprojected: bool,
    pub preconditioner: StepPreconditioner,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            level: 3,
            outer_radius: LatticeSpec::DEFAULT_OUTER_RADIUS,
            gamma: 0.05,
            tau: 0.1,
            steps: 20,
            cg: SolverOptions::cg_default(),
            minres: SolverOptions::minres_default(),
            zero_impedance: false,
            unprojected: false,
            preconditioner: StepPreconditioner::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        LatticeSpec {
            level: self.level,
            outer_radius: self.outer_radius,
        }
        .validate()?;
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {}", self.tau)));
        }
        for tol in [self.cg.tol, self.minres.tol] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::InvalidParameter(format!("solver tolerance must lie in (0, 1), got {tol}")));
            }
        }
        Ok(())
    }

    fn solver_opts<T: Real>(o: &SolverOptions<f64>) -> SolverOptions<T> {
        SolverOptions {
            tol: T::lit(o.tol),
            max_iter: o.max_iter,
            jacobi: o.jacobi,
        }
    }
}

/// Everything assembled for one mesh level.
#[derive(Debug, Clone)]
pub struct Problem<T: Real = f64> {
    pub mesh: Mesh<T>,
    pub dofs: DofMaps<T>,
    pub incidence: IncidenceMatrices<T>,
    pub matrices: SystemMatrices<T>,
    pub harmonic: HarmonicForm<T>,
    pub params: AdsParameters<T>,
}

pub fn setup_problem<T: Real>(config: &SimulationConfig) -> Result<Problem<T>> {
    config.validate()?;
    let spec = LatticeSpec {
        level: config.level,
        outer_radius: config.outer_radius,
    };
    let mesh = build_shell_mesh::<T>(&spec).map_err(|e| e.in_stage("mesh"))?;
    let dofs = enumerate_dofs(&mesh);
    let inc = incidence(&mesh, &dofs).map_err(|e| e.in_stage("incidence"))?;
    let params = AdsParameters::new(T::lit(config.gamma))?;
    let matrices = assemble_system(&mesh, &dofs, params.gamma).map_err(|e| e.in_stage("assembly"))?;
    let cg = SimulationConfig::solver_opts::<T>(&config.cg);
    let harmonic =
        discrete_harmonic_form(&mesh, &dofs, &matrices, &inc, &cg).map_err(|e| e.in_stage("harmonic form"))?;
    Ok(Problem {
        mesh,
        dofs,
        incidence: inc,
        matrices,
        harmonic,
        params,
    })
}

/// Interpolated, projected initial state `(E₀, B₀, 0)`.
pub fn initial_state<T: Real>(problem: &Problem<T>, config: &SimulationConfig) -> Result<BlockVector<T>> {
    let params = problem.params;
    let e_tilde = interpolate_edge_field(|x| params.e_star(T::zero(), x), &problem.mesh, &problem.dofs);
    let e0 = if config.unprojected {
        e_tilde
    } else {
        let cg = SimulationConfig::solver_opts::<T>(&config.cg);
        project_initial_e(&e_tilde, &problem.matrices, &problem.incidence, &problem.harmonic, &cg)
            .map_err(|e| e.in_stage("projection"))?
    };
    let b0 = initial_b(&e0, params.r, &problem.incidence)?;
    let p0 = vec![T::zero(); problem.dofs.n_vertex()];
    Ok(BlockVector::from_parts(&e0, &b0, &p0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub e_norm: f64,
    pub b_norm: f64,
    pub p_norm: f64,
    /// `‖E‖² + ‖B‖²`
    pub energy: f64,
    pub minres_iters: usize,
    /// `‖Gᵀ M_e E‖₂`
    pub div_residual: f64,
    /// `|(E, grad 𝔥)|`
    pub harmonic_residual: f64,
}

impl StepRecord {
    /// `‖u‖²_M = ‖E‖² + ‖B‖² + ‖p‖²`
    pub fn total_energy(&self) -> f64 {
        self.energy + self.p_norm * self.p_norm
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimReport {
    pub records: Vec<StepRecord>,
    /// `‖M_e E₀‖₂`, the scale for the divergence residuals.
    pub initial_me_e_norm: f64,
}

impl SimReport {
    pub fn initial(&self) -> Option<&StepRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.step,
                format_e6(r.time),
                format_e6(r.e_norm),
                format_e6(r.b_norm),
                format_e6(r.p_norm),
                format_e6(r.energy),
                r.minres_iters,
                format_e6(r.div_residual)
            )?;
        }
        Ok(())
    }

    /// Console table with three decimals: `Step  ‖E‖  ‖B‖`.
    pub fn write_table<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{:>4}  {:>8}  {:>8}", "Step", "||E||", "||B||")?;
        for r in &self.records {
            writeln!(out, "{:>4}  {:>8.3}  {:>8.3}", r.step, r.e_norm, r.b_norm)?;
        }
        Ok(())
    }
}

fn record<T: Real>(
    problem: &Problem<T>,
    u: &BlockVector<T>,
    step: usize,
    tau: f64,
    minres_iters: usize,
) -> Result<StepRecord> {
    let m = &problem.matrices;
    let me_e = m.mass_e.spmv(u.e())?;
    let mf_b = m.mass_f.spmv(u.b())?;
    let mv_p = m.mass_v.spmv(u.p())?;
    let e2 = dot(u.e(), &me_e).max(T::zero());
    let b2 = dot(u.b(), &mf_b).max(T::zero());
    let p2 = dot(u.p(), &mv_p).max(T::zero());
    let div = norm2(&problem.incidence.grad.spmv_transpose(&me_e)?);
    let harm = dot(&problem.harmonic.gradient, &me_e).abs();
    Ok(StepRecord {
        step,
        time: step as f64 * tau,
        e_norm: e2.sqrt().as_f64(),
        b_norm: b2.sqrt().as_f64(),
        p_norm: p2.sqrt().as_f64(),
        energy: (e2 + b2).as_f64(),
        minres_iters,
        div_residual: div.as_f64(),
        harmonic_residual: harm.as_f64(),
    })
}

/// Runs `steps` Crank–Nicolson steps from `u0`, recording step 0 as well.
pub fn evolve<T: Real>(
    problem: &Problem<T>,
    op: &EvolutionOperator<T>,
    u0: BlockVector<T>,
    steps: usize,
    opts: &SolverOptions<T>,
) -> Result<(SimReport, BlockVector<T>)> {
    let tau = op.tau.as_f64();
    let me_e0 = problem.matrices.mass_e.spmv(u0.e())?;
    let mut report = SimReport {
        records: vec![record(problem, &u0, 0, tau, 0)?],
        initial_me_e_norm: norm2(&me_e0).as_f64(),
    };
    let mut u = u0;
    for k in 1..=steps {
        let (next, stats) = cn_step(op, &u, opts).map_err(|e| Error::Step {
            step: k,
            source: Box::new(e),
        })?;
        u = next;
        report.records.push(record(problem, &u, k, tau, stats.iterations)?);
    }
    Ok((report, u))
}

/// Full pipeline: mesh, assembly, initial data, time stepping.
pub fn run_simulation<T: Real>(config: &SimulationConfig) -> Result<SimReport> {
    let problem = setup_problem::<T>(config)?;
    let u0 = initial_state(&problem, config)?;
    let mut op = build_operator(
        &problem.matrices,
        &problem.incidence,
        T::lit(config.tau),
        config.zero_impedance,
    )
    .map_err(|e| e.in_stage("operator"))?;
    op.set_preconditioner(config.preconditioner)
        .map_err(|e| e.in_stage("operator"))?;
    let opts = SimulationConfig::solver_opts::<T>(&config.minres);
    let (report, _) = evolve(&problem, &op, u0, config.steps, &opts).map_err(|e| e.in_stage("time stepping"))?;
    Ok(report)
}

/// Outcome of checking the discrete divergence invariants on a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaDiagnostics {
    /// `max_k ‖p_k‖_{M_v} / ‖E₀‖_{M_e}`
    pub max_p_ratio: f64,
    /// `max_k ‖Gᵀ M_e E_k‖ / ‖M_e E₀‖`
    pub max_div_ratio: f64,
    /// `max_k |(E_k, grad 𝔥)| / ‖M_e E₀‖`
    pub max_harmonic_ratio: f64,
    pub p_ok: bool,
    pub div_ok: bool,
    pub harmonic_ok: bool,
}

impl LemmaDiagnostics {
    pub const P_TOL: f64 = 1e-8;
    pub const DIV_TOL: f64 = 1e-7;
    pub const HARMONIC_TOL: f64 = 1e-7;

    pub fn passed(&self) -> bool {
        self.p_ok && self.div_ok && self.harmonic_ok
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Checks that `p_k` stays zero and `E_k` stays weakly divergence-free and
/// orthogonal to `grad 𝔥`.
pub fn lemma_monitor(report: &SimReport) -> LemmaDiagnostics {
    let e0 = report.initial().map_or(0.0, |r| r.e_norm);
    let me0 = report.initial_me_e_norm;
    let fold = |f: &dyn Fn(&StepRecord) -> f64| report.records.iter().map(f).fold(0.0, f64::max);
    let max_p_ratio = fold(&|r| ratio(r.p_norm, e0));
    let max_div_ratio = fold(&|r| ratio(r.div_residual, me0));
    let max_harmonic_ratio = fold(&|r| ratio(r.harmonic_residual, me0));
    LemmaDiagnostics {
        max_p_ratio,
        max_div_ratio,
        max_harmonic_ratio,
        p_ok: max_p_ratio <= LemmaDiagnostics::P_TOL,
        div_ok: max_div_ratio <= LemmaDiagnostics::DIV_TOL,
        harmonic_ok: max_harmonic_ratio <= LemmaDiagnostics::HARMONIC_TOL,
    }
}

/// Largest step-to-step increase of `‖u_k‖²_M`, relative to `‖u₀‖²_M`.
pub fn max_energy_increase(report: &SimReport) -> f64 {
    let e0 = report.initial().map_or(0.0, |r| r.total_energy());
    let inc = report
        .records
        .windows(2)
        .map(|w| w[1].total_energy() - w[0].total_energy())
        .fold(0.0, f64::max);
    ratio(inc, e0)
}

/// Largest deviation of `‖u_k‖_M` from `‖u₀‖_M`, relative to `‖u₀‖_M`.
pub fn max_norm_drift(report: &SimReport) -> f64 {
    let n0 = report.initial().map_or(0.0, |r| r.total_energy().sqrt());
    let d = report
        .records
        .iter()
        .map(|r| (r.total_energy().sqrt() - n0).abs())
        .fold(0.0, f64::max);
    ratio(d, n0)
}
