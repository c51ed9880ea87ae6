//! Triangle quadrature for error norms against analytic functions.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

/// Six-point rule exact for polynomials of degree four, as
/// `(barycentric, weight)` with weights summing to one.
const RULE: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_965;
    const WA: f64 = 0.223_381_589_678_011;
    const B: f64 = 0.091_576_213_509_771;
    const WB: f64 = 0.109_951_743_655_322;
    [
        ([1.0 - 2.0 * A, A, A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([A, A, 1.0 - 2.0 * A], WA),
        ([1.0 - 2.0 * B, B, B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([B, B, 1.0 - 2.0 * B], WB),
    ]
};

/// `int_mesh f dx`.
pub fn integrate(mesh: &Mesh, f: impl Fn(Point) -> f64) -> f64 {
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        let [a, b, c] = tri.map(|v| mesh.vertices[v]);
        for (lam, w) in RULE {
            let p = [
                lam[0] * a[0] + lam[1] * b[0] + lam[2] * c[0],
                lam[0] * a[1] + lam[1] * b[1] + lam[2] * c[1],
            ];
            total += area * w * f(p);
        }
    }
    total
}

/// `|| u_h - u ||_{L2}` for a P1 field `u_h`.
pub fn l2_error(mesh: &Mesh, uh: &[f64], exact: impl Fn(Point) -> f64) -> f64 {
    assert_eq!(uh.len(), mesh.num_vertices());
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        let [a, b, c] = tri.map(|v| mesh.vertices[v]);
        let vals = tri.map(|v| uh[v]);
        for (lam, w) in RULE {
            let p = [
                lam[0] * a[0] + lam[1] * b[0] + lam[2] * c[0],
                lam[0] * a[1] + lam[1] * b[1] + lam[2] * c[1],
            ];
            let uhp = lam[0] * vals[0] + lam[1] * vals[1] + lam[2] * vals[2];
            let d = uhp - exact(p);
            total += area * w * d * d;
        }
    }
    total.sqrt()
}

/// Checked variant of [`l2_error`].
pub fn try_l2_error(mesh: &Mesh, uh: &[f64], exact: impl Fn(Point) -> f64) -> Result<f64> {
    if uh.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_vertices(),
            got: uh.len(),
        });
    }
    Ok(l2_error(mesh, uh, exact))
}
