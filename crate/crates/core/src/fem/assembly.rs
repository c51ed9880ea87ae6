//! P1 bulk forms on triangle meshes.

use crate::error::{Error, Result};
use crate::fem::sparse::{SparseOperator, TripletBuilder};
use crate::mesh::Mesh;

/// Constant symmetric 2x2 diffusion tensor.
pub type Tensor2 = [[f64; 2]; 2];

pub const IDENTITY: Tensor2 = [[1.0, 0.0], [0.0, 1.0]];

/// Local stiffness `A |T| grad(phi_i) . Q grad(phi_j)` of one P1 triangle.
pub fn element_stiffness(area: f64, grads: &[[f64; 2]; 3], q: &Tensor2) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        let qg = [
            q[0][0] * grads[i][0] + q[0][1] * grads[i][1],
            q[1][0] * grads[i][0] + q[1][1] * grads[i][1],
        ];
        for j in 0..3 {
            k[i][j] = area * (qg[0] * grads[j][0] + qg[1] * grads[j][1]);
        }
    }
    k
}

/// Exact P1 mass matrix `|T|/12 (1 + delta_ij)`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

fn check_areas(mesh: &Mesh) -> Result<()> {
    for t in 0..mesh.num_triangles() {
        let area = mesh.triangle_area(t);
        if !(area > 0.0) {
            return Err(Error::DegenerateTriangle { triangle: t, area });
        }
    }
    Ok(())
}

pub fn assemble_bulk_stiffness(mesh: &Mesh) -> Result<SparseOperator> {
    assemble_tensor_stiffness(mesh, &IDENTITY)
}

/// Stiffness of `(Q grad u, grad v)` with a constant tensor `Q`.
pub fn assemble_tensor_stiffness(mesh: &Mesh, q: &Tensor2) -> Result<SparseOperator> {
    check_areas(mesh)?;
    let mut b = TripletBuilder::with_capacity(mesh.num_vertices(), 9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let k = element_stiffness(mesh.triangle_area(t), &mesh.hat_gradients(t), q);
        for i in 0..3 {
            for j in 0..3 {
                b.add(tri[i], tri[j], k[i][j]);
            }
        }
    }
    Ok(b.build())
}

pub fn assemble_bulk_mass(mesh: &Mesh) -> Result<SparseOperator> {
    check_areas(mesh)?;
    let mut b = TripletBuilder::with_capacity(mesh.num_vertices(), 9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let m = element_mass(mesh.triangle_area(t));
        for i in 0..3 {
            for j in 0..3 {
                b.add(tri[i], tri[j], m[i][j]);
            }
        }
    }
    Ok(b.build())
}

/// Row-sum lumped bulk mass, `|T|/3` per triangle corner.
pub fn assemble_bulk_lumped_mass(mesh: &Mesh) -> Result<Vec<f64>> {
    check_areas(mesh)?;
    let mut d = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.triangle_area(t) / 3.0;
        for &v in tri {
            d[v] += a;
        }
    }
    Ok(d)
}

/// `int e . grad(phi_v) dx` for every hat function `phi_v`, with `e` a
/// constant vector.
pub fn assemble_bulk_direction_load(mesh: &Mesh, direction: [f64; 2]) -> Result<Vec<f64>> {
    check_areas(mesh)?;
    let mut load = vec![0.0; mesh.num_vertices()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        let g = mesh.hat_gradients(t);
        for k in 0..3 {
            load[tri[k]] += area * (direction[0] * g[k][0] + direction[1] * g[k][1]);
        }
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{apply_constraints, solve_spd, ConstraintSet};
    use crate::mesh::{build_cell_mesh, CellGeometry};
    use std::f64::consts::PI;

    fn grid(n: usize, r: f64) -> Mesh {
        build_cell_mesh(&CellGeometry::new(n, r).unwrap()).unwrap()
    }

    #[test]
    fn unit_right_triangle_stiffness() {
        let grads = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let k = element_stiffness(0.5, &grads, &IDENTITY);
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_in_kernel_and_mass_sums_to_area() {
        let mesh = grid(16, 0.25);
        let k = assemble_bulk_stiffness(&mesh).unwrap();
        let m = assemble_bulk_mass(&mesh).unwrap();
        assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12));
        let area: f64 = (0..mesh.num_triangles()).map(|t| mesh.triangle_area(t)).sum();
        assert!((m.total_sum() - area).abs() < 1e-13);
        assert!(k.max_asymmetry() <= 1e-12 && m.max_asymmetry() <= 1e-12);
        let lumped: f64 = assemble_bulk_lumped_mass(&mesh).unwrap().iter().sum();
        assert!((lumped - area).abs() < 1e-13);
    }

    #[test]
    fn tensor_stiffness_is_linear_in_q() {
        let mesh = grid(8, 0.2);
        let k1 = assemble_bulk_stiffness(&mesh).unwrap();
        let k2 = assemble_tensor_stiffness(&mesh, &[[2.0, 0.0], [0.0, 2.0]]).unwrap();
        for (i, j, v) in k1.triplets() {
            assert!((k2.get(i, j) - 2.0 * v).abs() <= 1e-12);
        }
        let ka = assemble_tensor_stiffness(&mesh, &[[1.0, 0.3], [0.3, 2.0]]).unwrap();
        assert!(ka.max_asymmetry() <= 1e-12);
    }

    #[test]
    fn direction_load_equals_stiffness_times_linear_profile() {
        // int e_x . grad(phi) = (grad x, grad phi) = (K x)_phi
        let mesh = grid(8, 0.2);
        let k = assemble_bulk_stiffness(&mesh).unwrap();
        let xs: Vec<f64> = mesh.vertices.iter().map(|p| p[0]).collect();
        let kx = k.apply(&xs);
        let load = assemble_bulk_direction_load(&mesh, [1.0, 0.0]).unwrap();
        for (a, b) in kx.iter().zip(&load) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    fn poisson_l2_error(n: usize) -> f64 {
        // -Lap u = 2 pi^2 u, u = sin(pi x) sin(pi y), homogeneous Dirichlet data.
        let mesh = grid(n, 0.0);
        let k = assemble_bulk_stiffness(&mesh).unwrap();
        let m = assemble_bulk_mass(&mesh).unwrap();
        let exact: Vec<f64> = mesh
            .vertices
            .iter()
            .map(|p| (PI * p[0]).sin() * (PI * p[1]).sin())
            .collect();
        let f: Vec<f64> = exact.iter().map(|u| 2.0 * PI * PI * u).collect();
        let rhs = m.apply(&f);
        let c = ConstraintSet::new().dirichlet_zero(mesh.outer_boundary.iter().copied());
        let sys = apply_constraints(&k, &rhs, &c).unwrap();
        let x = solve_spd(&sys.op, &sys.rhs, 1e-12).unwrap();
        let u = sys.map.expand(&x);
        crate::fem::l2_error(&mesh, &u, |p| (PI * p[0]).sin() * (PI * p[1]).sin())
    }

    #[test]
    fn manufactured_poisson_converges_at_second_order() {
        let (e16, e32) = (poisson_l2_error(16), poisson_l2_error(32));
        assert!(e16 / e32 >= 3.6, "ratio {}", e16 / e32);
    }
}
