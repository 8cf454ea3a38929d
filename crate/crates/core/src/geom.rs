//! Small fixed-size vector helpers on `[T; 3]`.

use crate::scalar::Real;

pub type Vec3<T> = [T; 3];

#[inline]
pub fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Real>(s: T, a: Vec3<T>) -> Vec3<T> {
    [s * a[0], s * a[1], s * a[2]]
}

#[inline]
pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm<T: Real>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf<T: Real>(a: Vec3<T>) -> T {
    a[0].abs().max(a[1].abs()).max(a[2].abs())
}

#[inline]
pub fn zero<T: Real>() -> Vec3<T> {
    [T::zero(); 3]
}

/// Signed volume of the tetrahedron `(a, b, c, d)`.
pub fn signed_volume<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>, d: Vec3<T>) -> T {
    dot(sub(b, a), cross(sub(c, a), sub(d, a))) / T::lit(6.0)
}

/// Gradients of the four barycentric coordinates of a tetrahedron together
/// with its signed volume.
///
/// `grad λ_i = n_i / (3V)` where `n_i` is the area-weighted inward normal of
/// the face opposite vertex `i`.
pub fn barycentric_gradients<T: Real>(p: &[Vec3<T>; 4]) -> ([Vec3<T>; 4], T) {
    let vol = signed_volume(p[0], p[1], p[2], p[3]);
    let six_v = T::lit(6.0) * vol;
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let e3 = sub(p[3], p[0]);
    let g1 = scale(T::one() / six_v, cross(e2, e3));
    let g2 = scale(T::one() / six_v, cross(e3, e1));
    let g3 = scale(T::one() / six_v, cross(e1, e2));
    let g0 = scale(-T::one(), add(add(g1, g2), g3));
    ([g0, g1, g2, g3], vol)
}

/// Barycentric coordinates of `x` in the tetrahedron `p`.
pub fn barycentric_coordinates<T: Real>(p: &[Vec3<T>; 4], x: Vec3<T>) -> [T; 4] {
    let (g, _) = barycentric_gradients(p);
    let mut lam = [T::zero(); 4];
    for i in 1..4 {
        lam[i] = dot(g[i], sub(x, p[0]));
    }
    lam[0] = T::one() - lam[1] - lam[2] - lam[3];
    lam
}
