//! Tetrahedral meshes of the spherical shell `1 < |x| < R`.
//!
//! The shell is built from a cubic lattice over `[-2, 2]^3` with the central
//! cells removed. Every lattice cell is split into six tetrahedra along its
//! main diagonal (Kuhn/Freudenthal), which makes neighbouring cells
//! face-compatible, and the lattice is then pushed radially onto the shell.
//! Boundary classification happens on the integer lattice, before mapping.

mod vtk;

pub use vtk::write_vtk;

use std::fmt;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::scalar::Real;

/// Local vertex pairs of the six tetrahedron edges.
pub const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Local vertex triples of the four tetrahedron faces; face `k` is opposite
/// local vertex `k`.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Interior,
    /// Inner (obstacle) sphere.
    GammaI,
    /// Outer (truncation) sphere.
    GammaO,
}

impl Tag {
    pub fn is_boundary(self) -> bool {
        self != Tag::Interior
    }

    pub fn code(self) -> i32 {
        match self {
            Tag::Interior => 0,
            Tag::GammaI => 1,
            Tag::GammaO => 2,
        }
    }
}

/// Shell lattice parameters: `n = 2^J` cells per axis over `[-2, 2]^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub level: u32,
    pub outer_radius: f64,
}

impl LatticeSpec {
    pub const DEFAULT_OUTER_RADIUS: f64 = 4.0;

    pub fn new(level: u32) -> Result<Self> {
        let spec = Self {
            level,
            outer_radius: Self::DEFAULT_OUTER_RADIUS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_outer_radius(mut self, r: f64) -> Result<Self> {
        self.outer_radius = r;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.level < 2 {
            return Err(Error::InvalidLattice(format!("J must be at least 2, got {}", self.level)));
        }
        if self.level > 10 {
            return Err(Error::InvalidLattice(format!("J = {} is too large", self.level)));
        }
        if !(self.outer_radius.is_finite() && self.outer_radius > 1.0) {
            return Err(Error::InvalidLattice(format!(
                "outer radius must exceed 1, got {}",
                self.outer_radius
            )));
        }
        Ok(())
    }

    pub fn cells_per_axis(&self) -> usize {
        1 << self.level
    }

    /// Mesh parameter `h = 2^-J`.
    pub fn h(&self) -> f64 {
        (self.level as f64).exp2().recip()
    }

    /// Half-open range of removed cell indices per axis: every cell meeting
    /// the open cube `(-1/2, 1/2)^3`.
    pub fn hole_cells(&self) -> (usize, usize) {
        let n = self.cells_per_axis();
        ((3 * n) / 8, (5 * n).div_ceil(8))
    }

    /// Closed-form vertex count `(n+1)^3 - (hole_width - 1)^3`.
    pub fn expected_vertex_count(&self) -> usize {
        let n = self.cells_per_axis();
        let (lo, hi) = self.hole_cells();
        (n + 1).pow(3) - (hi - lo - 1).pow(3)
    }
}

/// Immutable tetrahedral mesh with derived edges and faces.
///
/// Edges and faces store ascending global vertex indices; that order fixes
/// the edge tangent (low to high index) and the face normal (right-hand
/// rule). Tetrahedra have positive signed volume in stored order.
#[derive(Debug, Clone)]
pub struct Mesh<T: Real = f64> {
    vertices: Vec<Vec3<T>>,
    tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    vertex_tags: Vec<Tag>,
    edge_tags: Vec<Tag>,
    face_tags: Vec<Tag>,
    tet_edges: Vec<[usize; 6]>,
    tet_faces: Vec<[usize; 4]>,
    face_tets: Vec<(usize, Option<usize>)>,
    volumes: Vec<T>,
    lattice: Option<Vec<[i64; 3]>>,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh from raw tetrahedra. Negatively oriented tetrahedra are
    /// reordered; degenerate ones are rejected. Boundary faces whose three
    /// vertices share a boundary tag inherit it, and so do their edges.
    pub fn from_tets(vertices: Vec<Vec3<T>>, mut tets: Vec<[usize; 4]>, vertex_tags: Vec<Tag>) -> Result<Self> {
        for t in tets.iter_mut() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidParameter("tetrahedron references a missing vertex".into()));
            }
            let p = t.map(|v| vertices[v]);
            if geom::signed_volume(p[0], p[1], p[2], p[3]) < T::zero() {
                t.swap(2, 3);
            }
        }
        Self::from_oriented_tets(vertices, tets, vertex_tags, None)
    }

    fn from_oriented_tets(
        vertices: Vec<Vec3<T>>,
        tets: Vec<[usize; 4]>,
        vertex_tags: Vec<Tag>,
        lattice: Option<Vec<[i64; 3]>>,
    ) -> Result<Self> {
        if vertex_tags.len() != vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: vertices.len(),
                actual: vertex_tags.len(),
            });
        }
        let mut volumes = Vec::with_capacity(tets.len());
        for (index, t) in tets.iter().enumerate() {
            let p = t.map(|v| vertices[v]);
            let vol = geom::signed_volume(p[0], p[1], p[2], p[3]);
            if !(vol > T::zero()) {
                return Err(Error::DegenerateTet {
                    index,
                    volume: vol.as_f64(),
                });
            }
            volumes.push(vol);
        }

        let mut edges: Vec<[usize; 2]> = Vec::with_capacity(tets.len() * 2);
        let mut faces: Vec<[usize; 3]> = Vec::with_capacity(tets.len() * 3);
        for t in &tets {
            for &(a, b) in &LOCAL_EDGES {
                edges.push(sorted2(t[a], t[b]));
            }
            for lf in &LOCAL_FACES {
                faces.push(sorted3(t[lf[0]], t[lf[1]], t[lf[2]]));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        faces.sort_unstable();
        faces.dedup();

        let mut tet_edges = Vec::with_capacity(tets.len());
        let mut tet_faces = Vec::with_capacity(tets.len());
        let mut face_tets: Vec<(usize, Option<usize>)> = vec![(usize::MAX, None); faces.len()];
        for (ti, t) in tets.iter().enumerate() {
            let te = LOCAL_EDGES.map(|(a, b)| {
                edges.binary_search(&sorted2(t[a], t[b])).expect("edge present")
            });
            let tf = LOCAL_FACES.map(|lf| {
                faces.binary_search(&sorted3(t[lf[0]], t[lf[1]], t[lf[2]])).expect("face present")
            });
            for &f in &tf {
                let slot = &mut face_tets[f];
                if slot.0 == usize::MAX {
                    slot.0 = ti;
                } else if slot.1.is_none() {
                    slot.1 = Some(ti);
                } else {
                    return Err(Error::InvalidParameter(format!(
                        "face {:?} is shared by more than two tetrahedra",
                        faces[f]
                    )));
                }
            }
            tet_edges.push(te);
            tet_faces.push(tf);
        }

        let mut face_tags = vec![Tag::Interior; faces.len()];
        let mut edge_tags = vec![Tag::Interior; edges.len()];
        for (f, face) in faces.iter().enumerate() {
            if face_tets[f].1.is_some() {
                continue;
            }
            let tag = vertex_tags[face[0]];
            if tag.is_boundary() && face.iter().all(|&v| vertex_tags[v] == tag) {
                face_tags[f] = tag;
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    let e = edges.binary_search(&[face[a], face[b]]).expect("edge present");
                    edge_tags[e] = edge_tags[e].max(tag);
                }
            }
        }

        Ok(Self {
            vertices,
            tets,
            edges,
            faces,
            vertex_tags,
            edge_tags,
            face_tags,
            tet_edges,
            tet_faces,
            face_tets,
            volumes,
            lattice,
        })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }
    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn vertex_tags(&self) -> &[Tag] {
        &self.vertex_tags
    }
    pub fn edge_tags(&self) -> &[Tag] {
        &self.edge_tags
    }
    pub fn face_tags(&self) -> &[Tag] {
        &self.face_tags
    }
    /// Global edge indices of tetrahedron `t` in [`LOCAL_EDGES`] order.
    pub fn tet_edges(&self, t: usize) -> &[usize; 6] {
        &self.tet_edges[t]
    }
    /// Global face indices of tetrahedron `t` in [`LOCAL_FACES`] order.
    pub fn tet_faces(&self, t: usize) -> &[usize; 4] {
        &self.tet_faces[t]
    }
    /// Tetrahedra adjacent to face `f`; the second is `None` on the boundary.
    pub fn face_tets(&self, f: usize) -> (usize, Option<usize>) {
        self.face_tets[f]
    }
    pub fn volume(&self, t: usize) -> T {
        self.volumes[t]
    }
    pub fn total_volume(&self) -> T {
        self.volumes.iter().copied().sum()
    }
    pub fn tet_points(&self, t: usize) -> [Vec3<T>; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }
    /// Integer lattice coordinates of each vertex, for lattice-built meshes.
    pub fn lattice_coords(&self) -> Option<&[[i64; 3]]> {
        self.lattice.as_deref()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    /// Same geometry with the roles of the inner and outer boundaries
    /// exchanged.
    pub fn swap_boundaries(&self) -> Self {
        let swap = |t: &Tag| match t {
            Tag::GammaI => Tag::GammaO,
            Tag::GammaO => Tag::GammaI,
            Tag::Interior => Tag::Interior,
        };
        let mut m = self.clone();
        m.vertex_tags = self.vertex_tags.iter().map(swap).collect();
        m.edge_tags = self.edge_tags.iter().map(swap).collect();
        m.face_tags = self.face_tags.iter().map(swap).collect();
        m
    }

    /// Finds a tetrahedron containing `x` and the barycentric coordinates of
    /// `x` in it. Linear scan with a bounding-box prefilter.
    pub fn locate(&self, x: Vec3<T>) -> Option<(usize, [T; 4])> {
        let tol = T::lit(1e-12);
        for t in 0..self.tets.len() {
            let p = self.tet_points(t);
            let outside = (0..3).any(|d| {
                let lo = p.iter().fold(T::infinity(), |m, q| m.min(q[d]));
                let hi = p.iter().fold(T::neg_infinity(), |m, q| m.max(q[d]));
                x[d] < lo - tol || x[d] > hi + tol
            });
            if outside {
                continue;
            }
            let lam = geom::barycentric_coordinates(&p, x);
            if lam.iter().all(|&l| l >= -tol) {
                return Some((t, lam));
            }
        }
        None
    }
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn sorted3(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut s = [a, b, c];
    s.sort_unstable();
    s
}

/// The six Kuhn tetrahedra of the unit cube, one per axis permutation, as
/// lattice offsets. All cells use the same main diagonal `(0,0,0)-(1,1,1)`.
fn kuhn_offsets() -> [[[i64; 3]; 4]; 6] {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.map(|perm| {
        let mut pts = [[0i64; 3]; 4];
        for k in 0..3 {
            pts[k + 1] = pts[k];
            pts[k + 1][perm[k]] += 1;
        }
        pts
    })
}

fn int_orientation(p: &[[i64; 3]; 4]) -> i64 {
    let d = |a: [i64; 3], b: [i64; 3]| [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let (u, v, w) = (d(p[0], p[1]), d(p[0], p[2]), d(p[0], p[3]));
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])
}

/// Builds the mapped shell mesh.
///
/// Lattice point `i` sits at `-2 + 4 i / n`. After splitting, each vertex is
/// pushed along its ray to radius `1 + (R-1)(s - a)/(2 - a)`, where `s` is its
/// `ℓ∞` norm and `a` the hole half-width; for `J ≥ 3` this is `2 s`.
pub fn build_shell_mesh<T: Real>(spec: &LatticeSpec) -> Result<Mesh<T>> {
    spec.validate()?;
    let n = spec.cells_per_axis();
    let (lo, hi) = spec.hole_cells();
    let in_hole_cell = |c: [usize; 3]| c.iter().all(|&k| k >= lo && k < hi);
    let strictly_in_hole = |v: [usize; 3]| v.iter().all(|&k| k > lo && k < hi);
    let in_closed_hole = |v: [usize; 3]| v.iter().all(|&k| k >= lo && k <= hi);

    let np = n + 1;
    let mut index = vec![usize::MAX; np * np * np];
    let lin = |v: [usize; 3]| (v[0] * np + v[1]) * np + v[2];
    let mut lattice = Vec::new();
    let mut tags = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                let v = [i, j, k];
                if strictly_in_hole(v) {
                    continue;
                }
                index[lin(v)] = lattice.len();
                lattice.push([i as i64, j as i64, k as i64]);
                let tag = if v.iter().any(|&c| c == 0 || c == n) {
                    Tag::GammaO
                } else if in_closed_hole(v) {
                    Tag::GammaI
                } else {
                    Tag::Interior
                };
                tags.push(tag);
            }
        }
    }

    let offsets = kuhn_offsets();
    let mut tets = Vec::with_capacity(6 * (n.pow(3) - (hi - lo).pow(3)));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if in_hole_cell([i, j, k]) {
                    continue;
                }
                for off in &offsets {
                    let pts = off.map(|o| [i as i64 + o[0], j as i64 + o[1], k as i64 + o[2]]);
                    let mut t = pts.map(|p| index[lin([p[0] as usize, p[1] as usize, p[2] as usize])]);
                    if int_orientation(&pts) < 0 {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }

    let cell = T::lit(4.0) / T::lit(n as f64);
    let two = T::lit(2.0);
    let hole_half = T::lit((hi - lo) as f64) * cell / two;
    let outer = T::lit(spec.outer_radius);
    let vertices = lattice
        .iter()
        .map(|c| {
            let x = c.map(|ci| T::lit(ci as f64) * cell - two);
            let s = geom::norm_inf(x);
            let rho = T::one() + (outer - T::one()) * (s - hole_half) / (two - hole_half);
            geom::scale(rho / geom::norm(x), x)
        })
        .collect();

    Mesh::from_oriented_tets(vertices, tets, tags, Some(lattice))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TagCounts {
    pub interior: usize,
    pub gamma_i: usize,
    pub gamma_o: usize,
}

impl TagCounts {
    fn from_tags(tags: &[Tag]) -> Self {
        let mut c = Self::default();
        for t in tags {
            match t {
                Tag::Interior => c.interior += 1,
                Tag::GammaI => c.gamma_i += 1,
                Tag::GammaO => c.gamma_o += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.interior + self.gamma_i + self.gamma_o
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshStatistics {
    pub vertices: TagCounts,
    pub edges: TagCounts,
    pub faces: TagCounts,
    pub tets: usize,
}

pub fn mesh_statistics<T: Real>(mesh: &Mesh<T>) -> MeshStatistics {
    MeshStatistics {
        vertices: TagCounts::from_tags(&mesh.vertex_tags),
        edges: TagCounts::from_tags(&mesh.edge_tags),
        faces: TagCounts::from_tags(&mesh.face_tags),
        tets: mesh.tets.len(),
    }
}

impl fmt::Display for MeshStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |f: &mut fmt::Formatter<'_>, name: &str, c: &TagCounts| {
            writeln!(
                f,
                "{name}: {} (interior {}, gamma_i {}, gamma_o {})",
                c.total(),
                c.interior,
                c.gamma_i,
                c.gamma_o
            )
        };
        row(f, "vertices", &self.vertices)?;
        row(f, "edges", &self.edges)?;
        row(f, "faces", &self.faces)?;
        writeln!(f, "tets: {}", self.tets)
    }
}
