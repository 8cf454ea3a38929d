mod common;

use ads_core::assembly::assemble_stiffness_on;
use ads_core::derham::{interpolate_edge_field, interpolate_face_field, DofMap};
use ads_core::fields::{
    discrete_harmonic_form, eval_b_star, eval_e_star, initial_b, project_initial_e, r_of_gamma, AdsParameters,
};
use ads_core::geom::{self, Vec3};
use ads_core::sparsela::{dot, norm2, SolverOptions};
use ads_core::{assemble_system, enumerate_dofs, incidence, setup_problem, Error, Problem64, SimulationConfig, Tag};
use common::*;
use rand::Rng;

/// Fibonacci lattice on the sphere of radius `rho`.
fn sphere_points(n: usize, rho: f64) -> Vec<Vec3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [rho * s * phi.cos(), rho * s * phi.sin(), rho * z]
        })
        .collect()
}

fn shell_points(n: usize, seed: u64) -> Vec<Vec3<f64>> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| loop {
            let x = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
            let rho = geom::norm(x);
            if (1.1..3.0).contains(&rho) {
                break x;
            }
        })
        .collect()
}

fn partial(f: impl Fn(Vec3<f64>) -> Vec3<f64>, x: Vec3<f64>, axis: usize, h: f64) -> Vec3<f64> {
    let mut p = x;
    let mut m = x;
    p[axis] += h;
    m[axis] -= h;
    geom::scale(0.5 / h, geom::sub(f(p), f(m)))
}

fn fd_div(f: impl Fn(Vec3<f64>) -> Vec3<f64> + Copy, x: Vec3<f64>) -> f64 {
    (0..3).map(|k| partial(f, x, k, 1e-4)[k]).sum()
}

fn fd_curl(f: impl Fn(Vec3<f64>) -> Vec3<f64> + Copy, x: Vec3<f64>) -> Vec3<f64> {
    let d = [0, 1, 2].map(|k| partial(f, x, k, 1e-4));
    [d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]]
}

fn j3() -> Problem64 {
    setup_problem(&SimulationConfig::default()).unwrap()
}

fn me_norm(p: &Problem64, e: &[f64]) -> f64 {
    p.matrices.mass_e.bilinear(e, e).unwrap().sqrt()
}

#[test]
fn decay_rate_closed_forms() {
    assert_eq!(r_of_gamma(0.05).unwrap(), -4.0);
    assert_eq!(r_of_gamma(0.5).unwrap(), -1.0);
    assert!((r_of_gamma(1.0 / 6.0).unwrap() + 2.0f64).abs() < 1e-15);
    for g in [1e-4, 0.01, 0.3, 2.0, 50.0] {
        let r: f64 = r_of_gamma(g).unwrap();
        assert!(r < 0.0);
        assert!((r * r - r - 1.0 / g).abs() <= 1e-10 * (1.0 / g));
    }
    assert!(matches!(r_of_gamma(0.0), Err(Error::InvalidParameter(_))));
    assert!(AdsParameters::new(-0.1).is_err());
}

#[test]
fn analytic_point_values() {
    let p = AdsParameters::new(0.05).unwrap();
    assert_eq!(p.e_star(1.3, [2.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
    let e = p.e_star(0.0, [0.0, 1.0, 0.0]);
    assert!((e[2] + 20.0 * (-4.0f64).exp()).abs() < 1e-15);
    let b = p.b_star(0.0, [2.0, 0.0, 0.0]);
    assert!((b[0] + 2.25 * (-8.0f64).exp()).abs() < 1e-17);
}

#[test]
fn impedance_condition_holds_on_unit_sphere() {
    for gamma in [0.05, 0.5] {
        let r = r_of_gamma(gamma).unwrap();
        for x in sphere_points(50, 1.0) {
            for t in [0.0, 0.4] {
                let n = geom::scale(-1.0, x);
                let e = eval_e_star(t, x, r);
                let b = eval_b_star(t, x, r);
                let e_tan = geom::sub(e, geom::scale(geom::dot(e, n), n));
                let res = geom::add(geom::scale(1.0 + gamma, e_tan), geom::cross(n, b));
                assert!(geom::norm(res) <= 1e-12, "gamma {gamma} x {x:?}: {res:?}");
            }
        }
    }
}

#[test]
fn analytic_fields_are_solenoidal_and_satisfy_faraday() {
    for gamma in [0.05, 0.5] {
        let r = r_of_gamma(gamma).unwrap();
        let e = move |x| eval_e_star(0.0, x, r);
        let b = move |x| eval_b_star(0.0, x, r);
        for x in shell_points(40, 31) {
            let scale_e = geom::norm(e(x)).max(1e-300);
            let scale_b = geom::norm(b(x)).max(1e-300);
            assert!(fd_div(e, x).abs() <= 1e-6 * scale_e.max(1.0));
            assert!(fd_div(b, x).abs() <= 1e-6 * scale_b.max(1.0));
            let res = geom::add(fd_curl(e, x), geom::scale(r, b(x)));
            assert!(geom::norm(res) <= 1e-6, "{x:?}: {res:?}");
        }
    }
}

#[test]
fn time_dependence_is_a_scalar_factor() {
    let r: f64 = -4.0;
    for x in shell_points(20, 32) {
        for t in [0.1, 0.5, 2.0] {
            let f = (r * t).exp();
            let (e0, e1) = (eval_e_star(0.0, x, r), eval_e_star(t, x, r));
            let (b0, b1) = (eval_b_star(0.0, x, r), eval_b_star(t, x, r));
            for k in 0..3 {
                assert!((e1[k] - f * e0[k]).abs() <= 1e-14 * geom::norm(e0));
                assert!((b1[k] - f * b0[k]).abs() <= 1e-14 * geom::norm(b0));
            }
        }
    }
}

#[test]
fn harmonic_form_boundary_values_and_interior_residual() {
    let p = j3();
    let h = &p.harmonic;
    for (v, tag) in p.mesh.vertex_tags().iter().enumerate() {
        match tag {
            Tag::GammaI => assert_eq!(h.nodal[v], 1.0),
            Tag::GammaO => assert_eq!(h.nodal[v], 0.0),
            _ => assert!((-1e-9..=1.0 + 1e-9).contains(&h.nodal[v])),
        }
    }
    let full = assemble_stiffness_on(&p.mesh, &DofMap::all(p.mesh.n_vertices())).unwrap();
    let lh = full.spmv(&h.nodal).unwrap();
    let interior: Vec<f64> = p.dofs.vertex.entities().iter().map(|&v| lh[v]).collect();
    let lifted: Vec<f64> = p
        .mesh
        .vertex_tags()
        .iter()
        .map(|t| if *t == Tag::GammaI { 1.0 } else { 0.0 })
        .collect();
    let load = full.spmv(&lifted).unwrap();
    let load_norm = norm2(&p.dofs.vertex.entities().iter().map(|&v| load[v]).collect::<Vec<_>>());
    assert!(norm2(&interior) <= 1e-12 * load_norm);
}

#[test]
fn harmonic_form_gradient_coefficients_are_vertex_differences() {
    let p = j3();
    for (d, &e) in p.dofs.edge.entities().iter().enumerate() {
        let [a, b] = p.mesh.edges()[e];
        let want = (p.harmonic.nodal[b] - p.harmonic.nodal[a]) / p.dofs.edge_length(e);
        assert_eq!(p.harmonic.gradient[d], want);
    }
}

#[test]
fn harmonic_form_is_galerkin_orthogonal_to_gradients() {
    let p = j3();
    let g = &p.harmonic.gradient;
    let mut r = rng(33);
    for _ in 0..20 {
        let q = random_vec(&mut r, p.dofs.n_vertex());
        let gq = p.incidence.grad.spmv(&q).unwrap();
        let v = p.matrices.mass_e.bilinear(g, &gq).unwrap();
        assert!(v.abs() <= 1e-10 * me_norm(&p, g) * me_norm(&p, &gq));
    }
}

#[test]
fn swapping_boundaries_complements_harmonic_form() {
    let spec = ads_core::LatticeSpec::new(3).unwrap();
    let mesh = ads_core::build_shell_mesh::<f64>(&spec).unwrap();
    let swapped = mesh.swap_boundaries();
    let opts = SolverOptions::cg_default();
    let solve = |m: &ads_core::Mesh64| {
        let d = enumerate_dofs(m);
        let inc = incidence(m, &d).unwrap();
        let s = assemble_system(m, &d, 0.05).unwrap();
        discrete_harmonic_form(m, &d, &s, &inc, &opts).unwrap()
    };
    let (h, hs) = (solve(&mesh), solve(&swapped));
    for v in 0..mesh.n_vertices() {
        assert!((h.nodal[v] + hs.nodal[v] - 1.0).abs() < 1e-10, "vertex {v}");
    }
}

#[test]
fn projection_annihilates_gradients_and_the_harmonic_field() {
    let p = j3();
    let opts = SolverOptions::cg_default();
    let q = random_vec(&mut rng(34), p.dofs.n_vertex());
    let gq = p.incidence.grad.spmv(&q).unwrap();
    let out = project_initial_e(&gq, &p.matrices, &p.incidence, &p.harmonic, &opts).unwrap();
    assert!(me_norm(&p, &out) <= 1e-10 * me_norm(&p, &gq));
    let out = project_initial_e(&p.harmonic.gradient, &p.matrices, &p.incidence, &p.harmonic, &opts).unwrap();
    assert!(me_norm(&p, &out) <= 1e-10 * me_norm(&p, &p.harmonic.gradient));
}

#[test]
fn projection_is_idempotent_and_meets_residual_bounds() {
    let p = j3();
    let opts = SolverOptions::cg_default();
    let x = random_vec(&mut rng(35), p.dofs.n_edge());
    let once = project_initial_e(&x, &p.matrices, &p.incidence, &p.harmonic, &opts).unwrap();
    let twice = project_initial_e(&once, &p.matrices, &p.incidence, &p.harmonic, &opts).unwrap();
    assert!(max_abs_diff(&once, &twice) <= 1e-12 * inf_norm(&once));

    let e_star = interpolate_edge_field(|y| p.params.e_star(0.0, y), &p.mesh, &p.dofs);
    for e in [once, project_initial_e(&e_star, &p.matrices, &p.incidence, &p.harmonic, &opts).unwrap()] {
        let me = p.matrices.mass_e.spmv(&e).unwrap();
        let div = p.incidence.grad.spmv_transpose(&me).unwrap();
        assert!(norm2(&div) <= 1e-10 * norm2(&me));
        assert!(dot(&p.harmonic.gradient, &me).abs() <= 1e-10 * norm2(&me));
    }
}

#[test]
fn initial_b_of_zero_and_gradients_vanish() {
    let p = j3();
    let zero = vec![0.0; p.dofs.n_edge()];
    assert!(initial_b(&zero, -4.0, &p.incidence).unwrap().iter().all(|&v| v == 0.0));
    let q = random_vec(&mut rng(36), p.dofs.n_vertex());
    let gq = p.incidence.grad.spmv(&q).unwrap();
    let b = initial_b(&gq, -4.0, &p.incidence).unwrap();
    assert!(inf_norm(&b) <= 1e-12 * inf_norm(&gq));
    assert!(initial_b(&zero, 0.0, &p.incidence).is_err());
}

#[test]
fn initial_b_sign_matches_face_interpolant() {
    let p: Problem64 = setup_problem(&SimulationConfig {
        level: 4,
        ..Default::default()
    })
    .unwrap();
    let r = p.params.r;
    let e = interpolate_edge_field(|y| p.params.e_star(0.0, y), &p.mesh, &p.dofs);
    let b_star = interpolate_face_field(|y| p.params.b_star(0.0, y), &p.mesh, &p.dofs);
    let mf = |v: &[f64]| p.matrices.mass_f.bilinear(v, v).unwrap().sqrt();
    let scale = mf(&b_star);
    let err = |b: Vec<f64>| mf(&b.iter().zip(&b_star).map(|(x, y)| x - y).collect::<Vec<_>>()) / scale;
    let minus = err(initial_b(&e, r, &p.incidence).unwrap());
    let plus = err(initial_b(&e, -r, &p.incidence).unwrap());
    let h = ads_core::LatticeSpec::new(4).unwrap().h();
    assert!(minus <= h, "relative error {minus}");
    assert!(plus > 1.0, "relative error {plus}");
}
