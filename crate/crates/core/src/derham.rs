//! Degrees of freedom of the lowest-order de Rham complex, incidence
//! matrices, interpolation of smooth fields and evaluation of discrete
//! fields.
//!
//! Vertex DoFs are point values at interior vertices. Edge DoFs are tangential
//! averages `(1/|e|) ∫_e v·τ` on every edge not on the outer sphere; face DoFs
//! are normal averages `(1/|f|) ∫_f v·n` on every face not on the outer
//! sphere.

use crate::error::Result;
use crate::geom::{self, Vec3};
use crate::mesh::{Mesh, Tag, LOCAL_EDGES, LOCAL_FACES};
use crate::scalar::Real;
use crate::sparsela::CsrMatrix;
use crate::whitney::ElementBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Vertex,
    Edge,
    Face,
}

/// Numbering of one discrete space: entity → DoF and back.
#[derive(Debug, Clone, Default)]
pub struct DofMap {
    dof_of: Vec<Option<usize>>,
    entity_of: Vec<usize>,
}

impl DofMap {
    fn from_mask(keep: impl Iterator<Item = bool>) -> Self {
        let mut dof_of = Vec::new();
        let mut entity_of = Vec::new();
        for (e, k) in keep.enumerate() {
            if k {
                dof_of.push(Some(entity_of.len()));
                entity_of.push(e);
            } else {
                dof_of.push(None);
            }
        }
        Self { dof_of, entity_of }
    }

    /// Every entity is a DoF.
    pub fn all(n: usize) -> Self {
        Self::from_mask(std::iter::repeat_n(true, n))
    }

    pub fn len(&self) -> usize {
        self.entity_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entity_of.is_empty()
    }

    #[inline]
    pub fn dof(&self, entity: usize) -> Option<usize> {
        self.dof_of[entity]
    }

    #[inline]
    pub fn entity(&self, dof: usize) -> usize {
        self.entity_of[dof]
    }

    pub fn entities(&self) -> &[usize] {
        &self.entity_of
    }
}

#[derive(Debug, Clone)]
pub struct DofMaps<T: Real = f64> {
    pub vertex: DofMap,
    pub edge: DofMap,
    pub face: DofMap,
    edge_length: Vec<T>,
    edge_tangent: Vec<Vec3<T>>,
    face_area: Vec<T>,
    face_normal: Vec<Vec3<T>>,
}

/// Standard restrictions: vertex DoFs avoid both spheres, edge and face DoFs
/// avoid only the outer one.
pub fn enumerate_dofs<T: Real>(mesh: &Mesh<T>) -> DofMaps<T> {
    DofMaps::build(
        mesh,
        mesh.vertex_tags().iter().map(|t| *t == Tag::Interior),
        mesh.edge_tags().iter().map(|t| *t != Tag::GammaO),
        mesh.face_tags().iter().map(|t| *t != Tag::GammaO),
    )
}

impl<T: Real> DofMaps<T> {
    /// Every entity is a DoF (the unrestricted complex).
    pub fn unrestricted(mesh: &Mesh<T>) -> Self {
        Self::build(
            mesh,
            std::iter::repeat_n(true, mesh.n_vertices()),
            std::iter::repeat_n(true, mesh.n_edges()),
            std::iter::repeat_n(true, mesh.n_faces()),
        )
    }

    fn build(
        mesh: &Mesh<T>,
        vmask: impl Iterator<Item = bool>,
        emask: impl Iterator<Item = bool>,
        fmask: impl Iterator<Item = bool>,
    ) -> Self {
        let x = mesh.vertices();
        let mut edge_length = Vec::with_capacity(mesh.n_edges());
        let mut edge_tangent = Vec::with_capacity(mesh.n_edges());
        for &[i, j] in mesh.edges() {
            let d = geom::sub(x[j], x[i]);
            let len = geom::norm(d);
            edge_length.push(len);
            edge_tangent.push(geom::scale(T::one() / len, d));
        }
        let mut face_area = Vec::with_capacity(mesh.n_faces());
        let mut face_normal = Vec::with_capacity(mesh.n_faces());
        for &[i, j, k] in mesh.faces() {
            let n = geom::cross(geom::sub(x[j], x[i]), geom::sub(x[k], x[i]));
            let twice = geom::norm(n);
            face_area.push(twice / T::lit(2.0));
            face_normal.push(geom::scale(T::one() / twice, n));
        }
        Self {
            vertex: DofMap::from_mask(vmask),
            edge: DofMap::from_mask(emask),
            face: DofMap::from_mask(fmask),
            edge_length,
            edge_tangent,
            face_area,
            face_normal,
        }
    }

    pub fn n_vertex(&self) -> usize {
        self.vertex.len()
    }
    pub fn n_edge(&self) -> usize {
        self.edge.len()
    }
    pub fn n_face(&self) -> usize {
        self.face.len()
    }

    /// `|e|` of mesh edge `e`.
    pub fn edge_length(&self, e: usize) -> T {
        self.edge_length[e]
    }
    /// Unit tangent of mesh edge `e`, from its lower to its higher vertex.
    pub fn edge_tangent(&self, e: usize) -> Vec3<T> {
        self.edge_tangent[e]
    }
    pub fn face_area(&self, f: usize) -> T {
        self.face_area[f]
    }
    /// Unit normal of mesh face `f` by the right-hand rule on its ascending
    /// vertex order.
    pub fn face_normal(&self, f: usize) -> Vec3<T> {
        self.face_normal[f]
    }

    /// `|e|` per edge DoF.
    pub fn edge_dof_lengths(&self) -> Vec<T> {
        self.edge.entities().iter().map(|&e| self.edge_length[e]).collect()
    }

    /// `|f|` per face DoF.
    pub fn face_dof_areas(&self) -> Vec<T> {
        self.face.entities().iter().map(|&f| self.face_area[f]).collect()
    }

    pub fn len(&self, space: Space) -> usize {
        match space {
            Space::Vertex => self.n_vertex(),
            Space::Edge => self.n_edge(),
            Space::Face => self.n_face(),
        }
    }
}

/// Exterior derivatives of the complex.
///
/// `d_grad` and `d_curl` are the signed incidence matrices (exact integers).
/// `grad` and `curl` are the same maps expressed in the normalized bases,
/// i.e. the matrices that take coefficient vectors to coefficient vectors:
/// `grad = diag(1/|e|) d_grad` and `curl = diag(1/|f|) d_curl diag(|e|)`.
#[derive(Debug, Clone)]
pub struct IncidenceMatrices<T: Real = f64> {
    pub d_grad: CsrMatrix<i32>,
    pub d_curl: CsrMatrix<i32>,
    pub grad: CsrMatrix<T>,
    pub curl: CsrMatrix<T>,
}

pub fn incidence<T: Real>(mesh: &Mesh<T>, dofs: &DofMaps<T>) -> Result<IncidenceMatrices<T>> {
    let mut g = Vec::with_capacity(2 * dofs.n_edge());
    for (ed, &e) in dofs.edge.entities().iter().enumerate() {
        let [tail, head] = mesh.edges()[e];
        if let Some(v) = dofs.vertex.dof(tail) {
            g.push((ed, v, -1));
        }
        if let Some(v) = dofs.vertex.dof(head) {
            g.push((ed, v, 1));
        }
    }
    let d_grad = CsrMatrix::from_triplets(dofs.n_edge(), dofs.n_vertex(), &g)?;

    let mut c = Vec::with_capacity(3 * dofs.n_face());
    for (fd, &f) in dofs.face.entities().iter().enumerate() {
        let [a, b, cc] = mesh.faces()[f];
        // boundary cycle a → b → c → a against ascending-stored edges
        for (p, q, sign) in [(a, b, 1), (b, cc, 1), (a, cc, -1)] {
            let e = mesh.edges().binary_search(&[p, q]).expect("face edge present");
            if let Some(ed) = dofs.edge.dof(e) {
                c.push((fd, ed, sign));
            }
        }
    }
    let d_curl = CsrMatrix::from_triplets(dofs.n_face(), dofs.n_edge(), &c)?;

    let len = dofs.edge_dof_lengths();
    let inv_len: Vec<T> = len.iter().map(|&l| T::one() / l).collect();
    let inv_area: Vec<T> = dofs.face_dof_areas().iter().map(|&a| T::one() / a).collect();
    let ones_v = vec![T::one(); dofs.n_vertex()];
    let grad = d_grad.map(|v| T::lit(v as f64)).scale_rows_cols(&inv_len, &ones_v)?;
    let curl = d_curl.map(|v| T::lit(v as f64)).scale_rows_cols(&inv_area, &len)?;
    Ok(IncidenceMatrices {
        d_grad,
        d_curl,
        grad,
        curl,
    })
}

// Gauss-Legendre on [0, 1], three points.
fn gauss3<T: Real>() -> [(T, T); 3] {
    let d = T::lit(0.6).sqrt() / T::lit(2.0);
    let h = T::lit(0.5);
    [
        (h - d, T::lit(5.0 / 18.0)),
        (h, T::lit(8.0 / 18.0)),
        (h + d, T::lit(5.0 / 18.0)),
    ]
}

/// Degree-2 exact triangle rule: barycentric points `(2/3, 1/6, 1/6)` and
/// permutations, equal weights.
pub(crate) fn triangle3<T: Real>() -> [[T; 3]; 3] {
    let a = T::lit(2.0 / 3.0);
    let b = T::lit(1.0 / 6.0);
    [[a, b, b], [b, a, b], [b, b, a]]
}

/// Edge DoFs of a smooth field: tangential averages by 3-point Gauss.
pub fn interpolate_edge_field<T: Real>(f: impl Fn(Vec3<T>) -> Vec3<T>, mesh: &Mesh<T>, dofs: &DofMaps<T>) -> Vec<T> {
    let x = mesh.vertices();
    let rule = gauss3::<T>();
    dofs.edge
        .entities()
        .iter()
        .map(|&e| {
            let [i, j] = mesh.edges()[e];
            let d = geom::sub(x[j], x[i]);
            let tau = dofs.edge_tangent(e);
            rule.iter()
                .map(|&(s, w)| w * geom::dot(f(geom::add(x[i], geom::scale(s, d))), tau))
                .sum()
        })
        .collect()
}

/// Face DoFs of a smooth field: normal averages by the 3-point triangle rule.
pub fn interpolate_face_field<T: Real>(f: impl Fn(Vec3<T>) -> Vec3<T>, mesh: &Mesh<T>, dofs: &DofMaps<T>) -> Vec<T> {
    let x = mesh.vertices();
    let rule = triangle3::<T>();
    let third = T::one() / T::lit(3.0);
    dofs.face
        .entities()
        .iter()
        .map(|&fc| {
            let [a, b, c] = mesh.faces()[fc];
            let n = dofs.face_normal(fc);
            rule.iter()
                .map(|l| {
                    let p = geom::add(
                        geom::add(geom::scale(l[0], x[a]), geom::scale(l[1], x[b])),
                        geom::scale(l[2], x[c]),
                    );
                    third * geom::dot(f(p), n)
                })
                .sum()
        })
        .collect()
}

/// Vertex DoFs of a smooth scalar function.
pub fn interpolate_vertex_field<T: Real>(f: impl Fn(Vec3<T>) -> T, mesh: &Mesh<T>, dofs: &DofMaps<T>) -> Vec<T> {
    dofs.vertex.entities().iter().map(|&v| f(mesh.vertices()[v])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldValue<T> {
    Scalar(T),
    Vector(Vec3<T>),
}

/// Evaluates the discrete field with the given DoF coefficients at `x`.
/// Returns `None` when `x` lies outside the mesh.
pub fn evaluate_field<T: Real>(
    coefficients: &[T],
    space: Space,
    mesh: &Mesh<T>,
    dofs: &DofMaps<T>,
    x: Vec3<T>,
) -> Option<FieldValue<T>> {
    let (t, lam) = mesh.locate(x)?;
    Some(evaluate_in_tet(coefficients, space, mesh, dofs, t, &lam))
}

/// Evaluates inside a known tetrahedron at barycentric coordinates `lam`.
pub fn evaluate_in_tet<T: Real>(
    coefficients: &[T],
    space: Space,
    mesh: &Mesh<T>,
    dofs: &DofMaps<T>,
    t: usize,
    lam: &[T; 4],
) -> FieldValue<T> {
    assert_eq!(coefficients.len(), dofs.len(space), "coefficient length");
    match space {
        Space::Vertex => {
            let verts = mesh.tets()[t];
            let v = (0..4)
                .filter_map(|m| dofs.vertex.dof(verts[m]).map(|d| coefficients[d] * lam[m]))
                .sum();
            FieldValue::Scalar(v)
        }
        Space::Edge => {
            let basis = ElementBasis::new(mesh, t);
            let mut v = geom::zero();
            for k in 0..LOCAL_EDGES.len() {
                if let Some(d) = dofs.edge.dof(mesh.tet_edges(t)[k]) {
                    v = geom::add(v, geom::scale(coefficients[d], basis.edge_value(k, lam)));
                }
            }
            FieldValue::Vector(v)
        }
        Space::Face => {
            let basis = ElementBasis::new(mesh, t);
            let mut v = geom::zero();
            for k in 0..LOCAL_FACES.len() {
                if let Some(d) = dofs.face.dof(mesh.tet_faces(t)[k]) {
                    v = geom::add(v, geom::scale(coefficients[d], basis.face_value(k, lam)));
                }
            }
            FieldValue::Vector(v)
        }
    }
}
