//! The `check` subcommand: invariant suite over one configuration.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ads_core::assembly::{local_edge_mass, local_face_mass, local_vertex_mass};
use ads_core::evolve::{evolve, initial_state, max_energy_increase, max_norm_drift, skew_operator};
use ads_core::fields::{eval_b_star, eval_e_star};
use ads_core::geom::{self, Vec3};
use ads_core::quadrature::quadrature_element_matrices;
use ads_core::sparsela::dot;
use ads_core::whitney::ElementBasis;
use ads_core::{build_operator, lemma_monitor, setup_problem, Problem64, SimulationConfig};

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn complex(p: &Problem64) -> Result<Check> {
    let cg = p.incidence.d_curl.matmul(&p.incidence.d_grad)?;
    let nonzero = cg.values().iter().filter(|&&v| v != 0).count();
    Ok(Check {
        name: "curl grad = 0",
        pass: nonzero == 0,
        detail: format!("{nonzero} nonzero entries"),
    })
}

fn rel_entry<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> f64 {
    let scale = b.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}

fn mass_oracle(p: &Problem64, rng: &mut ChaCha8Rng) -> Check {
    let m = &p.mesh;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = rng.gen_range(0..m.n_tets());
        let b = ElementBasis::new(m, t);
        let (mv, me, mf, _) = quadrature_element_matrices(m, t);
        worst = worst
            .max(rel_entry(&local_vertex_mass(m.volume(t)), &mv))
            .max(rel_entry(&local_edge_mass(&b), &me))
            .max(rel_entry(&local_face_mass(&b), &mf));
    }
    Check {
        name: "element masses vs quadrature",
        pass: worst <= 1e-12,
        detail: format!("max relative deviation {worst:.1e}"),
    }
}

fn skewness(p: &Problem64, rng: &mut ChaCha8Rng) -> Result<Check> {
    let a = skew_operator(&p.matrices, &p.incidence)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = random_vec(rng, a.nrows());
        let ax = a.spmv(&x)?;
        worst = worst.max(dot(&x, &ax).abs() / (dot(&x, &x).sqrt() * dot(&ax, &ax).sqrt()));
    }
    Ok(Check {
        name: "generator skewness",
        pass: worst <= 1e-12,
        detail: format!("max |x'Ax|/(|x||Ax|) {worst:.1e}"),
    })
}

fn impedance(p: &Problem64, rng: &mut ChaCha8Rng) -> Result<Check> {
    let z = &p.matrices.impedance;
    let zd = z.matmul(&p.incidence.d_grad.map(f64::from))?.max_abs();
    let mut min = f64::INFINITY;
    for _ in 0..100 {
        let x = random_vec(rng, z.nrows());
        min = min.min(z.bilinear(&x, &x)?);
    }
    Ok(Check {
        name: "impedance kernel and sign",
        pass: zd <= 1e-14 && min >= -1e-14 && z.is_symmetric(),
        detail: format!("|Z D_grad| {zd:.1e}, min x'Zx {min:.3e}"),
    })
}

fn analytic(p: &Problem64, rng: &mut ChaCha8Rng) -> Check {
    let (gamma, r) = (p.params.gamma, p.params.r);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut bc = 0.0f64;
    for i in 0..50 {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / 50.0;
        let s = (1.0 - z * z).sqrt();
        let x = [s * (golden * i as f64).cos(), s * (golden * i as f64).sin(), z];
        let n = geom::scale(-1.0, x);
        let e = eval_e_star(0.0, x, r);
        let e_tan = geom::sub(e, geom::scale(geom::dot(e, n), n));
        let res = geom::add(geom::scale(1.0 + gamma, e_tan), geom::cross(n, eval_b_star(0.0, x, r)));
        bc = bc.max(geom::norm(res));
    }
    let partial = |f: &dyn Fn(Vec3<f64>) -> Vec3<f64>, x: Vec3<f64>, k: usize| {
        let (mut a, mut b) = (x, x);
        a[k] += 1e-4;
        b[k] -= 1e-4;
        geom::scale(0.5e4, geom::sub(f(a), f(b)))
    };
    let e = |x| eval_e_star(0.0, x, r);
    let b = |x| eval_b_star(0.0, x, r);
    let (mut div, mut curl) = (0.0f64, 0.0f64);
    let mut n = 0;
    while n < 50 {
        let x = [0, 1, 2].map(|_| rng.gen_range(-3.0..3.0));
        if !(1.05..3.0).contains(&geom::norm(x)) {
            continue;
        }
        n += 1;
        let de = [0, 1, 2].map(|k| partial(&e, x, k));
        let db = [0, 1, 2].map(|k| partial(&b, x, k));
        div = div.max((de[0][0] + de[1][1] + de[2][2]).abs());
        div = div.max((db[0][0] + db[1][1] + db[2][2]).abs());
        let c = [de[1][2] - de[2][1], de[2][0] - de[0][2], de[0][1] - de[1][0]];
        curl = curl.max(geom::norm(geom::add(c, geom::scale(r, b(x)))));
    }
    Check {
        name: "analytic solution identities",
        pass: bc <= 1e-12 && div <= 1e-6 && curl <= 1e-6,
        detail: format!("boundary {bc:.1e}, div {div:.1e}, curl E + rB {curl:.1e}"),
    }
}

fn dynamics(p: &Problem64, config: &SimulationConfig) -> Result<Vec<Check>> {
    let u0 = initial_state(p, config)?;
    let mut op = build_operator(&p.matrices, &p.incidence, config.tau, config.zero_impedance)?;
    op.set_preconditioner(config.preconditioner)?;
    let (report, _) = evolve(p, &op, u0, config.steps, &config.minres)?;
    let lemma = lemma_monitor(&report);
    let detail = format!(
        "max p ratio {:.2e}, div ratio {:.2e}, harmonic ratio {:.2e}",
        lemma.max_p_ratio, lemma.max_div_ratio, lemma.max_harmonic_ratio
    );
    let divergence = if config.unprojected {
        Check {
            name: "negative control flagged",
            pass: !lemma.p_ok,
            detail: format!("{detail} (violation expected)"),
        }
    } else {
        Check {
            name: "divergence invariants",
            pass: lemma.passed(),
            detail,
        }
    };
    let energy = if config.zero_impedance {
        let drift = max_norm_drift(&report);
        Check {
            name: "energy conservation",
            pass: drift <= 1e-8,
            detail: format!("max relative drift {drift:.1e}"),
        }
    } else {
        let inc = max_energy_increase(&report);
        Check {
            name: "energy dissipation",
            pass: inc <= 1e-8,
            detail: format!("max relative increase {inc:.1e}"),
        }
    };
    Ok(vec![divergence, energy])
}

/// Prints one line per check; `Ok(false)` when any check fails.
pub fn run(config: &SimulationConfig) -> Result<bool> {
    let p = setup_problem::<f64>(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checks = vec![
        complex(&p)?,
        mass_oracle(&p, &mut rng),
        skewness(&p, &mut rng)?,
        impedance(&p, &mut rng)?,
        analytic(&p, &mut rng),
    ];
    checks.extend(dynamics(&p, config)?);
    for c in &checks {
        println!("[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.pass))
}
