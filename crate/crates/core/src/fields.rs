//! The analytic decaying solution outside the unit sphere, the discrete
//! harmonic form and the construction of discrete initial data.

use crate::assembly::{assemble_stiffness_on, SystemMatrices};
use crate::derham::{DofMap, DofMaps, IncidenceMatrices};
use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::mesh::{Mesh, Tag};
use crate::scalar::Real;
use crate::sparsela::{cg_solve, dot, SolveStats, SolverOptions};

/// Decay rate `r = (1 − √(1 + 4/γ)) / 2` of the decaying mode for impedance
/// parameter `γ`. It satisfies `r² − r = 1/γ` and is negative for all `γ > 0`.
pub fn r_of_gamma<T: Real>(gamma: T) -> Result<T> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let four = T::lit(4.0);
    Ok((T::one() - (T::one() + four / gamma).sqrt()) / T::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdsParameters<T = f64> {
    pub gamma: T,
    pub r: T,
}

impl<T: Real> AdsParameters<T> {
    pub fn new(gamma: T) -> Result<Self> {
        Ok(Self {
            gamma,
            r: r_of_gamma(gamma)?,
        })
    }

    pub fn e_star(&self, t: T, x: Vec3<T>) -> Vec3<T> {
        eval_e_star(t, x, self.r)
    }

    pub fn b_star(&self, t: T, x: Vec3<T>) -> Vec3<T> {
        eval_b_star(t, x, self.r)
    }
}

/// The exact fields are only a model solution for `|x| ≥ 1`; callers may
/// still evaluate them inside (the polyhedral boundary dips below radius 1).
pub fn in_model_domain<T: Real>(x: Vec3<T>) -> bool {
    geom::norm(x) >= T::one()
}

/// `E*(t,x) = e^{r(|x|+t)} / |x|² · (r² − r/|x|) · (0, z, −y)`.
pub fn eval_e_star<T: Real>(t: T, x: Vec3<T>, r: T) -> Vec3<T> {
    let rho = geom::norm(x);
    let f = (r * (rho + t)).exp() / (rho * rho) * (r * r - r / rho);
    [T::zero(), f * x[2], -f * x[1]]
}

/// `B*(t,x) = −(1/r) curl E*(t,x)`:
/// `e^{r(|x|+t)} [ (r² − 3r/|x| + 3/|x|²)/|x|³ · (y²+z², −xy, −xz) + (2r/|x|² − 2/|x|³, 0, 0) ]`.
pub fn eval_b_star<T: Real>(t: T, x: Vec3<T>, r: T) -> Vec3<T> {
    let rho = geom::norm(x);
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let rho2 = rho * rho;
    let rho3 = rho2 * rho;
    let decay = (r * (rho + t)).exp();
    let a = (r * r - three * r / rho + three / rho2) / rho3;
    let c = two * r / rho2 - two / rho3;
    let [x0, y, z] = x;
    [
        decay * (a * (y * y + z * z) + c),
        decay * (-a * x0 * y),
        decay * (-a * x0 * z),
    ]
}

/// Discrete harmonic form: piecewise linear, 1 on `Γ_i`, 0 on `Γ_o`,
/// discrete-harmonic at interior vertices.
#[derive(Debug, Clone)]
pub struct HarmonicForm<T = f64> {
    /// Values at every mesh vertex.
    pub nodal: Vec<T>,
    /// Coefficients of its gradient in the edge space.
    pub gradient: Vec<T>,
    /// `‖grad 𝔥‖²` in the `M_e` inner product.
    pub gradient_norm_sq: T,
    pub stats: SolveStats,
}

pub fn discrete_harmonic_form<T: Real>(
    mesh: &Mesh<T>,
    dofs: &DofMaps<T>,
    matrices: &SystemMatrices<T>,
    incidence: &IncidenceMatrices<T>,
    opts: &SolverOptions<T>,
) -> Result<HarmonicForm<T>> {
    let all = DofMap::all(mesh.n_vertices());
    let full = assemble_stiffness_on(mesh, &all)?;
    let lifted: Vec<T> = mesh
        .vertex_tags()
        .iter()
        .map(|t| if *t == Tag::GammaI { T::one() } else { T::zero() })
        .collect();
    let load = full.spmv(&lifted)?;
    let rhs: Vec<T> = dofs.vertex.entities().iter().map(|&v| -load[v]).collect();
    let (interior, stats) = cg_solve(&matrices.stiffness_v, &rhs, None, opts)?;

    let mut nodal = lifted;
    for (d, &v) in dofs.vertex.entities().iter().enumerate() {
        nodal[v] = interior[d];
    }
    let gradient: Vec<T> = dofs
        .edge
        .entities()
        .iter()
        .map(|&e| {
            let [tail, head] = mesh.edges()[e];
            (nodal[head] - nodal[tail]) / dofs.edge_length(e)
        })
        .collect();
    let me_g = matrices.mass_e.spmv(&gradient)?;
    let gradient_norm_sq = dot(&gradient, &me_g);
    debug_assert!(incidence.grad.nrows() == gradient.len());
    Ok(HarmonicForm {
        nodal,
        gradient,
        gradient_norm_sq,
        stats,
    })
}

/// Removes from an edge field its discrete gradient part and its component
/// along `grad 𝔥`, both in the `M_e` inner product.
///
/// Solves `L s = Gᵀ M_e Ẽ`, forms `Ẽ − G s`, then subtracts the `grad 𝔥`
/// component. The two parts are `M_e`-orthogonal, so the order is immaterial.
pub fn project_initial_e<T: Real>(
    e_tilde: &[T],
    matrices: &SystemMatrices<T>,
    incidence: &IncidenceMatrices<T>,
    harmonic: &HarmonicForm<T>,
    opts: &SolverOptions<T>,
) -> Result<Vec<T>> {
    let me_e = matrices.mass_e.spmv(e_tilde)?;
    let rhs = incidence.grad.spmv_transpose(&me_e)?;
    let (s, _) = cg_solve(&matrices.stiffness_v, &rhs, None, opts)?;
    let gs = incidence.grad.spmv(&s)?;
    let mut e: Vec<T> = e_tilde.iter().zip(&gs).map(|(&a, &b)| a - b).collect();

    if harmonic.gradient_norm_sq > T::zero() {
        let me_e = matrices.mass_e.spmv(&e)?;
        let c = dot(&harmonic.gradient, &me_e) / harmonic.gradient_norm_sq;
        for (ei, &gi) in e.iter_mut().zip(&harmonic.gradient) {
            *ei -= c * gi;
        }
    }
    Ok(e)
}

/// `B₀ = −(1/r) curl E₀`, the face field matching the `e^{rt}` time
/// dependence of Faraday's law.
pub fn initial_b<T: Real>(e0: &[T], r: T, incidence: &IncidenceMatrices<T>) -> Result<Vec<T>> {
    if r == T::zero() || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("decay rate must be finite and nonzero, got {r}")));
    }
    let mut b = incidence.curl.spmv(e0)?;
    let s = -T::one() / r;
    for v in b.iter_mut() {
        *v *= s;
    }
    Ok(b)
}
