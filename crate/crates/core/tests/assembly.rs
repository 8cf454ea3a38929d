#![allow(clippy::needless_range_loop)]

mod common;

use ads_core::assembly::{
    assemble_impedance, assemble_mass, assemble_stiffness_nodal, local_edge_mass, local_face_mass, local_stiffness,
    local_vertex_mass,
};
use ads_core::mesh::{LOCAL_EDGES, LOCAL_FACES};
use ads_core::quadrature::{integrate_triangle, quadrature_element_matrices, triangle_rule, PointwiseBasis};
use ads_core::sparsela::{cg_solve, SolverOptions};
use ads_core::whitney::ElementBasis;
use ads_core::{
    assemble_system, build_shell_mesh, enumerate_dofs, geom, incidence, DofMaps, Error, LatticeSpec, Mesh, Space, Tag,
};
use common::*;

fn shell(level: u32) -> Mesh<f64> {
    build_shell_mesh(&LatticeSpec::new(level).unwrap()).unwrap()
}

fn reference_tet() -> Mesh<f64> {
    Mesh::from_tets(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        vec![[0, 1, 2, 3]],
        vec![Tag::Interior; 4],
    )
    .unwrap()
}

fn rel_close<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N], tol: f64) -> bool {
    let scale = a.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    a.iter().flatten().zip(b.iter().flatten()).all(|(p, q)| (p - q).abs() <= tol * scale)
}

#[test]
fn reference_vertex_mass_and_stiffness() {
    let m = reference_tet();
    let v = 1.0 / 6.0;
    let mv = local_vertex_mass(v);
    for i in 0..4 {
        for j in 0..4 {
            let want: f64 = if i == j { v / 10.0 } else { v / 20.0 };
            assert!((mv[i][j] - want).abs() < 1e-16);
        }
    }
    let k = local_stiffness(&ElementBasis::new(&m, 0));
    let g = [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for i in 0..4 {
        for j in 0..4 {
            assert!((k[i][j] - v * geom::dot(g[i], g[j])).abs() < 1e-15);
        }
    }
}

#[test]
fn reference_element_matches_quadrature_oracle() {
    let m = reference_tet();
    let b = ElementBasis::new(&m, 0);
    let (mv, me, mf, kv) = quadrature_element_matrices(&m, 0);
    assert!(rel_close(&local_vertex_mass(m.volume(0)), &mv, 1e-13));
    assert!(rel_close(&local_edge_mass(&b), &me, 1e-13));
    assert!(rel_close(&local_face_mass(&b), &mf, 1e-13));
    assert!(rel_close(&local_stiffness(&b), &kv, 1e-13));
}

#[test]
fn every_element_matches_quadrature_oracle() {
    let m = shell(3);
    for t in 0..m.n_tets() {
        let b = ElementBasis::new(&m, t);
        let (mv, me, mf, kv) = quadrature_element_matrices(&m, t);
        assert!(rel_close(&local_vertex_mass(m.volume(t)), &mv, 1e-12), "tet {t}");
        assert!(rel_close(&local_edge_mass(&b), &me, 1e-12), "tet {t}");
        assert!(rel_close(&local_face_mass(&b), &mf, 1e-12), "tet {t}");
        assert!(rel_close(&local_stiffness(&b), &kv, 1e-12), "tet {t}");
    }
}

#[test]
fn mass_matrices_are_symmetric_and_positive() {
    let m = shell(3);
    let d = enumerate_dofs(&m);
    let s = assemble_system(&m, &d, 0.05).unwrap();
    let mut r = rng(21);
    for a in [&s.mass_v, &s.mass_e, &s.mass_f, &s.stiffness_v] {
        assert!(a.is_symmetric());
        for _ in 0..20 {
            let x = random_vec(&mut r, a.nrows());
            assert!(a.bilinear(&x, &x).unwrap() > 0.0);
        }
    }
    assert!(s.impedance.is_symmetric());
}

#[test]
fn vertex_mass_sums_to_volume() {
    let m = shell(3);
    let d = DofMaps::unrestricted(&m);
    let mv = assemble_mass(&m, &d, Space::Vertex).unwrap();
    let total: f64 = mv.values().iter().sum();
    assert!((total - m.total_volume()).abs() < 1e-12 * m.total_volume());
}

#[test]
fn stiffness_factors_through_gradient() {
    let m = shell(3);
    for d in [DofMaps::unrestricted(&m), enumerate_dofs(&m)] {
        let inc = incidence(&m, &d).unwrap();
        let me = assemble_mass(&m, &d, Space::Edge).unwrap();
        let l = assemble_stiffness_nodal(&m, &d).unwrap();
        let gmg = inc.grad.transpose().matmul(&me.matmul(&inc.grad).unwrap()).unwrap();
        let diff = gmg.add_scaled(1.0, &l, -1.0).unwrap();
        assert!(diff.max_abs() <= 1e-12 * l.max_abs(), "{}", diff.max_abs());
    }
}

#[test]
fn stiffness_solve_matches_dense_cholesky() {
    let m = shell(3);
    let d = enumerate_dofs(&m);
    let l = assemble_stiffness_nodal(&m, &d).unwrap();
    let b = random_vec(&mut rng(22), l.nrows());
    let (x, _) = cg_solve(&l, &b, None, &SolverOptions::cg_default()).unwrap();
    let want = cholesky_solve(&l.to_dense(), &b);
    assert!(max_abs_diff(&x, &want) <= 1e-10 * inf_norm(&want));
}

#[test]
fn impedance_annihilates_gradients_and_is_psd() {
    let m = shell(3);
    let d = enumerate_dofs(&m);
    let inc = incidence(&m, &d).unwrap();
    let z = assemble_impedance(&m, &d, 0.05).unwrap();
    let zg = z.matmul(&inc.grad).unwrap();
    assert!(zg.max_abs() <= 1e-14 * z.max_abs().max(1.0));
    let mut r = rng(23);
    for _ in 0..100 {
        let x = random_vec(&mut r, z.nrows());
        assert!(z.bilinear(&x, &x).unwrap() >= -1e-14);
    }
}

#[test]
fn impedance_is_supported_on_gamma_i_edge_pairs() {
    let m = shell(3);
    let d = enumerate_dofs(&m);
    let z = assemble_impedance(&m, &d, 0.05).unwrap();
    let mut share = std::collections::HashSet::new();
    for (f, face) in m.faces().iter().enumerate() {
        if m.face_tags()[f] != Tag::GammaI {
            continue;
        }
        let [a, b, c] = *face;
        let es = [[a, b], [b, c], [a, c]].map(|e| d.edge.dof(m.edges().binary_search(&e).unwrap()).unwrap());
        for &p in &es {
            for &q in &es {
                share.insert((p, q));
            }
        }
    }
    for (i, j, v) in z.triplets() {
        assert_ne!(v, 0.0);
        assert!(share.contains(&(i, j)), "entry ({i}, {j})");
        assert_eq!(m.edge_tags()[d.edge.entity(i)], Tag::GammaI);
    }
}

#[test]
fn impedance_scales_with_one_plus_gamma() {
    let m = shell(2);
    let d = enumerate_dofs(&m);
    let z1 = assemble_impedance(&m, &d, 0.05).unwrap();
    let z2 = assemble_impedance(&m, &d, 0.5).unwrap();
    let scaled = z2.scaled(1.05 / 1.5);
    assert!(scaled.add_scaled(1.0, &z1, -1.0).unwrap().max_abs() <= 1e-14 * z1.max_abs());
    assert!(matches!(assemble_impedance(&m, &d, 0.0), Err(Error::InvalidParameter(_))));
    assert!(assemble_impedance(&m, &d, -1.0).is_err());
}

#[test]
fn impedance_matches_surface_quadrature_oracle() {
    let m = shell(3);
    let d = enumerate_dofs(&m);
    let gamma = 0.05;
    let z = assemble_impedance(&m, &d, gamma).unwrap();
    let rule = triangle_rule(4);
    let mut oracle: std::collections::HashMap<(usize, usize), f64> = Default::default();
    for f in 0..m.n_faces() {
        if m.face_tags()[f] != Tag::GammaI {
            continue;
        }
        let t = m.face_tets(f).0;
        let pb = PointwiseBasis::new(&m, t);
        let k = m.tet_faces(t).iter().position(|&g| g == f).unwrap();
        let n = d.face_normal(f);
        let tri = LOCAL_FACES[k].map(|l| pb.points()[l]);
        let tan = |v: [f64; 3]| geom::sub(v, geom::scale(geom::dot(v, n), n));
        for (a, _) in LOCAL_EDGES.iter().enumerate() {
            for (b, _) in LOCAL_EDGES.iter().enumerate() {
                let val = (1.0 + gamma)
                    * integrate_triangle(&tri, &rule, |x| geom::dot(tan(pb.edge(a, x)), tan(pb.edge(b, x))));
                let (Some(i), Some(j)) = (d.edge.dof(m.tet_edges(t)[a]), d.edge.dof(m.tet_edges(t)[b])) else {
                    continue;
                };
                *oracle.entry((i, j)).or_default() += val;
            }
        }
    }
    let scale = z.max_abs();
    for (&(i, j), &v) in &oracle {
        assert!((z.get(i, j) - v).abs() <= 1e-12 * scale, "({i}, {j}): {} vs {v}", z.get(i, j));
    }
    for (i, j, v) in z.triplets() {
        assert!((oracle.get(&(i, j)).copied().unwrap_or(0.0) - v).abs() <= 1e-12 * scale);
    }
}

#[test]
fn assembly_is_bitwise_reproducible() {
    let m = shell(3);
    let d = enumerate_dofs(&m);
    let a = assemble_system(&m, &d, 0.05).unwrap();
    let b = assemble_system(&m, &d, 0.05).unwrap();
    assert_eq!(a.mass_e.values(), b.mass_e.values());
    assert_eq!(a.mass_f.values(), b.mass_f.values());
    assert_eq!(a.impedance.values(), b.impedance.values());
}
