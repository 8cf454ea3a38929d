//! Tensor-product Gauss rules on collapsed coordinates, plus pointwise
//! Whitney bases built from the textbook formulas. Used as an independent
//! check on the closed-form element matrices.

use crate::geom::{self, Vec3};
use crate::mesh::{Mesh, LOCAL_EDGES, LOCAL_FACES};
use crate::scalar::Real;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// A rule on the reference simplex in barycentric form; weights sum to one.
#[derive(Debug, Clone)]
pub struct SimplexRule<const N: usize> {
    pub points: Vec<[f64; N]>,
    pub weights: Vec<f64>,
}

/// Collapsed Gauss rule on the tetrahedron with `n³` points, exact for
/// polynomials of degree `2n − 3`.
pub fn tet_rule(n: usize) -> SimplexRule<4> {
    let (x, w) = gauss_legendre01(n);
    let mut points = Vec::with_capacity(n * n * n);
    let mut weights = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (u, v, s) = (x[i], x[j], x[k]);
                let l1 = u;
                let l2 = v * (1.0 - u);
                let l3 = s * (1.0 - u) * (1.0 - v);
                points.push([1.0 - l1 - l2 - l3, l1, l2, l3]);
                weights.push(6.0 * w[i] * w[j] * w[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
            }
        }
    }
    SimplexRule { points, weights }
}

/// Collapsed Gauss rule on the triangle with `n²` points, exact for degree
/// `2n − 2`.
pub fn triangle_rule(n: usize) -> SimplexRule<3> {
    let (x, w) = gauss_legendre01(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let l1 = x[i];
            let l2 = x[j] * (1.0 - x[i]);
            points.push([1.0 - l1 - l2, l1, l2]);
            weights.push(2.0 * w[i] * w[j] * (1.0 - x[i]));
        }
    }
    SimplexRule { points, weights }
}

fn affine_point<T: Real, const N: usize>(p: &[Vec3<T>; N], lam: &[f64; N]) -> Vec3<T> {
    let mut x = geom::zero();
    for m in 0..N {
        x = geom::add(x, geom::scale(T::lit(lam[m]), p[m]));
    }
    x
}

/// `∫_K f` over the tetrahedron with vertices `p`.
pub fn integrate_tet<T: Real>(p: &[Vec3<T>; 4], rule: &SimplexRule<4>, f: impl Fn(Vec3<T>) -> T) -> T {
    let vol = geom::signed_volume(p[0], p[1], p[2], p[3]).abs();
    let mut acc = T::zero();
    for (lam, &w) in rule.points.iter().zip(&rule.weights) {
        acc += T::lit(w) * f(affine_point(p, lam));
    }
    acc * vol
}

/// `∫_f g` over the triangle with vertices `p`.
pub fn integrate_triangle<T: Real>(p: &[Vec3<T>; 3], rule: &SimplexRule<3>, g: impl Fn(Vec3<T>) -> T) -> T {
    let area = geom::norm(geom::cross(geom::sub(p[1], p[0]), geom::sub(p[2], p[0]))) / T::lit(2.0);
    let mut acc = T::zero();
    for (lam, &w) in rule.points.iter().zip(&rule.weights) {
        acc += T::lit(w) * g(affine_point(p, lam));
    }
    acc * area
}

/// Pointwise Whitney bases of one element, globally oriented and normalized
/// like the assembled spaces. Gradients come from outward face normals and
/// face functions from the Raviart–Thomas form `(x − x_k) / 3V`.
#[derive(Debug, Clone)]
pub struct PointwiseBasis<T: Real> {
    p: [Vec3<T>; 4],
    volume: T,
    grads: [Vec3<T>; 4],
    edges: [(usize, usize, T); 6],
    faces: [(usize, T); 4],
}

impl<T: Real> PointwiseBasis<T> {
    pub fn new(mesh: &Mesh<T>, t: usize) -> Self {
        let p = mesh.tet_points(t);
        let verts = mesh.tets()[t];
        let volume = geom::signed_volume(p[0], p[1], p[2], p[3]).abs();
        let three_v = T::lit(3.0) * volume;
        let two = T::lit(2.0);

        let mut grads = [geom::zero(); 4];
        let mut faces = [(0, T::zero()); 4];
        for (k, lf) in LOCAL_FACES.iter().enumerate() {
            let [a, b, c] = *lf;
            let mut n = geom::cross(geom::sub(p[b], p[a]), geom::sub(p[c], p[a]));
            if geom::dot(n, geom::sub(p[a], p[k])) < T::zero() {
                n = geom::scale(-T::one(), n);
            }
            // |n| = 2 · area, outward from vertex k
            grads[k] = geom::scale(-T::one() / (two * three_v), n);

            let mut g = *lf;
            g.sort_by_key(|&l| verts[l]);
            let on = geom::cross(geom::sub(p[g[1]], p[g[0]]), geom::sub(p[g[2]], p[g[0]]));
            let area = geom::norm(on) / two;
            let sign = if geom::dot(on, geom::sub(p[g[0]], p[k])) > T::zero() {
                T::one()
            } else {
                -T::one()
            };
            faces[k] = (k, sign * area / three_v);
        }

        let mut edges = [(0, 0, T::zero()); 6];
        for (k, &(i, j)) in LOCAL_EDGES.iter().enumerate() {
            let (a, b) = if verts[i] < verts[j] { (i, j) } else { (j, i) };
            edges[k] = (a, b, geom::norm(geom::sub(p[b], p[a])));
        }
        Self {
            p,
            volume,
            grads,
            edges,
            faces,
        }
    }

    pub fn points(&self) -> &[Vec3<T>; 4] {
        &self.p
    }

    pub fn volume(&self) -> T {
        self.volume
    }

    pub fn grad_lambda(&self, m: usize) -> Vec3<T> {
        self.grads[m]
    }

    pub fn lambda(&self, x: Vec3<T>) -> [T; 4] {
        let mut lam = [T::zero(); 4];
        for (k, l) in lam.iter_mut().enumerate() {
            let opp = LOCAL_FACES[k][0];
            *l = geom::dot(self.grads[k], geom::sub(x, self.p[opp]));
        }
        lam
    }

    pub fn edge(&self, k: usize, x: Vec3<T>) -> Vec3<T> {
        let (a, b, len) = self.edges[k];
        let lam = self.lambda(x);
        geom::scale(
            len,
            geom::sub(geom::scale(lam[a], self.grads[b]), geom::scale(lam[b], self.grads[a])),
        )
    }

    pub fn face(&self, k: usize, x: Vec3<T>) -> Vec3<T> {
        let (opp, s) = self.faces[k];
        geom::scale(s, geom::sub(x, self.p[opp]))
    }
}

/// Element matrices by quadrature (exact to degree 7): vertex mass, edge
/// mass, face mass and nodal stiffness.
#[allow(clippy::type_complexity)]
pub fn quadrature_element_matrices<T: Real>(
    mesh: &Mesh<T>,
    t: usize,
) -> ([[T; 4]; 4], [[T; 6]; 6], [[T; 4]; 4], [[T; 4]; 4]) {
    let rule = tet_rule(5);
    let b = PointwiseBasis::new(mesh, t);
    let p = *b.points();
    let mut mv = [[T::zero(); 4]; 4];
    let mut me = [[T::zero(); 6]; 6];
    let mut mf = [[T::zero(); 4]; 4];
    let mut kv = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            mv[i][j] = integrate_tet(&p, &rule, |x| {
                let l = b.lambda(x);
                l[i] * l[j]
            });
            mf[i][j] = integrate_tet(&p, &rule, |x| geom::dot(b.face(i, x), b.face(j, x)));
            kv[i][j] = b.volume() * geom::dot(b.grad_lambda(i), b.grad_lambda(j));
        }
    }
    for i in 0..6 {
        for j in 0..6 {
            me[i][j] = integrate_tet(&p, &rule, |x| geom::dot(b.edge(i, x), b.edge(j, x)));
        }
    }
    (mv, me, mf, kv)
}
