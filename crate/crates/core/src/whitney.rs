//! Lowest-order Whitney bases on a single tetrahedron.
//!
//! Every edge and face basis function is affine on the element and is stored
//! as `Σ_m λ_m c_m` with one constant vector `c_m` per vertex, which makes
//! both pointwise evaluation and exact moment integrals cheap:
//!
//! * edge `(a → b)`: `ψ = |e| (λ_a ∇λ_b − λ_b ∇λ_a)`
//! * face `(a, b, c)`: `ξ = 2|f| (λ_a ∇λ_b×∇λ_c + λ_b ∇λ_c×∇λ_a + λ_c ∇λ_a×∇λ_b)`
//!
//! The `|e|`, `|f|` factors make each function dual to the averaged tangential
//! (normal) component over its own edge (face).

use crate::geom::{self, Vec3};
use crate::mesh::{Mesh, LOCAL_EDGES, LOCAL_FACES};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct ElementBasis<T: Real> {
    pub grads: [Vec3<T>; 4],
    pub volume: T,
    /// Vertex coefficients of the six edge functions, globally oriented.
    pub edge: [[Vec3<T>; 4]; 6],
    /// Vertex coefficients of the four face functions, globally oriented.
    pub face: [[Vec3<T>; 4]; 4],
    /// Constant curl of each edge function.
    pub edge_curl: [Vec3<T>; 6],
}

impl<T: Real> ElementBasis<T> {
    pub fn new(mesh: &Mesh<T>, t: usize) -> Self {
        let p = mesh.tet_points(t);
        let verts = mesh.tets()[t];
        let (grads, volume) = geom::barycentric_gradients(&p);
        let two = T::lit(2.0);

        let mut edge = [[geom::zero(); 4]; 6];
        let mut edge_curl = [geom::zero(); 6];
        for (k, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
            let (a, b) = if verts[i] < verts[j] { (i, j) } else { (j, i) };
            let len = geom::norm(geom::sub(p[b], p[a]));
            edge[k][a] = geom::scale(len, grads[b]);
            edge[k][b] = geom::scale(-len, grads[a]);
            edge_curl[k] = geom::scale(two * len, geom::cross(grads[a], grads[b]));
        }

        let mut face = [[geom::zero(); 4]; 4];
        for (k, lf) in LOCAL_FACES.iter().enumerate() {
            let mut loc = *lf;
            loc.sort_by_key(|&l| verts[l]);
            let [a, b, c] = loc;
            let area = geom::norm(geom::cross(geom::sub(p[b], p[a]), geom::sub(p[c], p[a]))) / two;
            let s = two * area;
            face[k][a] = geom::scale(s, geom::cross(grads[b], grads[c]));
            face[k][b] = geom::scale(s, geom::cross(grads[c], grads[a]));
            face[k][c] = geom::scale(s, geom::cross(grads[a], grads[b]));
        }

        Self {
            grads,
            volume,
            edge,
            face,
            edge_curl,
        }
    }

    pub fn edge_value(&self, k: usize, lam: &[T; 4]) -> Vec3<T> {
        combine(&self.edge[k], lam)
    }

    pub fn face_value(&self, k: usize, lam: &[T; 4]) -> Vec3<T> {
        combine(&self.face[k], lam)
    }
}

fn combine<T: Real>(c: &[Vec3<T>; 4], lam: &[T; 4]) -> Vec3<T> {
    let mut v = geom::zero();
    for m in 0..4 {
        v = geom::add(v, geom::scale(lam[m], c[m]));
    }
    v
}

/// `∫_K λ_m λ_n = V (1 + δ_mn) / 20`.
pub fn barycentric_moment<T: Real>(volume: T, m: usize, n: usize) -> T {
    let num = if m == n { T::lit(2.0) } else { T::one() };
    volume * num / T::lit(20.0)
}

/// Exact `∫_K u · v` for two affine fields in vertex-coefficient form.
pub fn affine_inner<T: Real>(volume: T, u: &[Vec3<T>; 4], v: &[Vec3<T>; 4]) -> T {
    let mut acc = T::zero();
    for m in 0..4 {
        for n in 0..4 {
            acc += barycentric_moment(volume, m, n) * geom::dot(u[m], v[n]);
        }
    }
    acc
}
