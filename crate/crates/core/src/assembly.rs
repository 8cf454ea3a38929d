//! Mass, stiffness and impedance matrices.
//!
//! All volume integrands are polynomials of degree at most two on each
//! tetrahedron and are integrated exactly with barycentric moment formulas.
//! Element contributions are accumulated in element order and each local
//! matrix is filled from its upper triangle, so assembled matrices are
//! bitwise symmetric and reproducible.

use crate::derham::{triangle3, DofMap, DofMaps, Space};
use crate::error::{Error, Result};
use crate::geom;
use crate::mesh::{Mesh, Tag, LOCAL_EDGES, LOCAL_FACES};
use crate::scalar::Real;
use crate::sparsela::CsrMatrix;
use crate::whitney::{affine_inner, barycentric_moment, ElementBasis};

#[derive(Debug, Clone)]
pub struct SystemMatrices<T: Real = f64> {
    pub mass_v: CsrMatrix<T>,
    pub mass_e: CsrMatrix<T>,
    pub mass_f: CsrMatrix<T>,
    pub stiffness_v: CsrMatrix<T>,
    pub impedance: CsrMatrix<T>,
    pub gamma: T,
}

pub fn assemble_system<T: Real>(mesh: &Mesh<T>, dofs: &DofMaps<T>, gamma: T) -> Result<SystemMatrices<T>> {
    Ok(SystemMatrices {
        mass_v: assemble_mass(mesh, dofs, Space::Vertex)?,
        mass_e: assemble_mass(mesh, dofs, Space::Edge)?,
        mass_f: assemble_mass(mesh, dofs, Space::Face)?,
        stiffness_v: assemble_stiffness_nodal(mesh, dofs)?,
        impedance: assemble_impedance(mesh, dofs, gamma)?,
        gamma,
    })
}

pub fn local_vertex_mass<T: Real>(volume: T) -> [[T; 4]; 4] {
    let mut m = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = barycentric_moment(volume, i, j);
        }
    }
    m
}

pub fn local_edge_mass<T: Real>(b: &ElementBasis<T>) -> [[T; 6]; 6] {
    let mut m = [[T::zero(); 6]; 6];
    for i in 0..6 {
        for j in i..6 {
            m[i][j] = affine_inner(b.volume, &b.edge[i], &b.edge[j]);
            m[j][i] = m[i][j];
        }
    }
    m
}

pub fn local_face_mass<T: Real>(b: &ElementBasis<T>) -> [[T; 4]; 4] {
    let mut m = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            m[i][j] = affine_inner(b.volume, &b.face[i], &b.face[j]);
            m[j][i] = m[i][j];
        }
    }
    m
}

/// `V ∇λ_i · ∇λ_j`
pub fn local_stiffness<T: Real>(b: &ElementBasis<T>) -> [[T; 4]; 4] {
    let mut m = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            m[i][j] = b.volume * geom::dot(b.grads[i], b.grads[j]);
            m[j][i] = m[i][j];
        }
    }
    m
}

fn element_basis<T: Real>(mesh: &Mesh<T>, t: usize) -> Result<ElementBasis<T>> {
    let b = ElementBasis::new(mesh, t);
    if !(b.volume > T::zero()) {
        return Err(Error::DegenerateTet {
            index: t,
            volume: b.volume.as_f64(),
        });
    }
    Ok(b)
}

fn scatter<T: Real, const N: usize>(
    triplets: &mut Vec<(usize, usize, T)>,
    local: &[[T; N]; N],
    entities: &[usize; N],
    map: &DofMap,
) {
    let d = entities.map(|e| map.dof(e));
    for i in 0..N {
        let Some(r) = d[i] else { continue };
        for j in 0..N {
            if let Some(c) = d[j] {
                triplets.push((r, c, local[i][j]));
            }
        }
    }
}

/// Gram matrix of the chosen space's basis.
pub fn assemble_mass<T: Real>(mesh: &Mesh<T>, dofs: &DofMaps<T>, space: Space) -> Result<CsrMatrix<T>> {
    let n = dofs.len(space);
    let mut trip = Vec::new();
    for t in 0..mesh.n_tets() {
        match space {
            Space::Vertex => {
                let vol = mesh.volume(t);
                if !(vol > T::zero()) {
                    return Err(Error::DegenerateTet {
                        index: t,
                        volume: vol.as_f64(),
                    });
                }
                scatter(&mut trip, &local_vertex_mass(vol), &mesh.tets()[t], &dofs.vertex);
            }
            Space::Edge => {
                let b = element_basis(mesh, t)?;
                scatter(&mut trip, &local_edge_mass(&b), mesh.tet_edges(t), &dofs.edge);
            }
            Space::Face => {
                let b = element_basis(mesh, t)?;
                scatter(&mut trip, &local_face_mass(&b), mesh.tet_faces(t), &dofs.face);
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &trip)
}

/// Nodal stiffness restricted to vertex DoFs.
pub fn assemble_stiffness_nodal<T: Real>(mesh: &Mesh<T>, dofs: &DofMaps<T>) -> Result<CsrMatrix<T>> {
    assemble_stiffness_on(mesh, &dofs.vertex)
}

/// Nodal stiffness over the vertices selected by `map` (all vertices for the
/// lifting of boundary data).
pub fn assemble_stiffness_on<T: Real>(mesh: &Mesh<T>, map: &DofMap) -> Result<CsrMatrix<T>> {
    let mut trip = Vec::new();
    for t in 0..mesh.n_tets() {
        let b = element_basis(mesh, t)?;
        scatter(&mut trip, &local_stiffness(&b), &mesh.tets()[t], map);
    }
    CsrMatrix::from_triplets(map.len(), map.len(), &trip)
}

/// `(1+γ) ∫_{Γ_i} ψ_tan · ψ'_tan` on edge DoFs.
///
/// Only the tangential projection enters, so the orientation of the
/// boundary normal is irrelevant.
pub fn assemble_impedance<T: Real>(mesh: &Mesh<T>, dofs: &DofMaps<T>, gamma: T) -> Result<CsrMatrix<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let factor = T::one() + gamma;
    let rule = triangle3::<T>();
    let third = T::one() / T::lit(3.0);
    let mut trip = Vec::new();
    for f in 0..mesh.n_faces() {
        if mesh.face_tags()[f] != Tag::GammaI {
            continue;
        }
        let t = mesh.face_tets(f).0;
        let b = element_basis(mesh, t)?;
        let k = mesh.tet_faces(t).iter().position(|&g| g == f).expect("face in its tet");
        let n = dofs.face_normal(f);
        let area = dofs.face_area(f);
        let proj = |v: geom::Vec3<T>| geom::sub(v, geom::scale(geom::dot(v, n), n));

        // local edges lying in face k: those not touching local vertex k
        let in_face: Vec<usize> = (0..6)
            .filter(|&le| LOCAL_EDGES[le].0 != k && LOCAL_EDGES[le].1 != k)
            .collect();
        let tang: Vec<[geom::Vec3<T>; 4]> = in_face.iter().map(|&le| b.edge[le].map(proj)).collect();
        let mut local = [[T::zero(); 3]; 3];
        for q in &rule {
            let mut lam = [T::zero(); 4];
            for (m, &lv) in LOCAL_FACES[k].iter().enumerate() {
                lam[lv] = q[m];
            }
            let vals: Vec<geom::Vec3<T>> = tang
                .iter()
                .map(|c| {
                    let mut v = geom::zero();
                    for m in 0..4 {
                        v = geom::add(v, geom::scale(lam[m], c[m]));
                    }
                    v
                })
                .collect();
            for i in 0..3 {
                for j in i..3 {
                    local[i][j] += third * geom::dot(vals[i], vals[j]);
                }
            }
        }
        let ents = [0, 1, 2].map(|i| mesh.tet_edges(t)[in_face[i]]);
        for i in 0..3 {
            for j in i..3 {
                local[i][j] *= factor * area;
                local[j][i] = local[i][j];
            }
        }
        scatter(&mut trip, &local, &ents, &dofs.edge);
    }
    let n = dofs.n_edge();
    CsrMatrix::from_triplets(n, n, &trip)
}
