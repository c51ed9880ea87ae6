use serde::Serialize;

use crate::mesh::{min_angle_degrees, Mesh};

/// Discrete measures of a mesh. These polygonal values are the ones every
/// downstream coefficient uses, never the analytic disk values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshMetrics {
    pub area_fluid: f64,
    pub hole_perimeter_total: f64,
    pub min_angle_degrees: f64,
    pub num_vertices: usize,
    pub num_triangles: usize,
}

pub fn mesh_metrics(mesh: &Mesh) -> MeshMetrics {
    let area_fluid = (0..mesh.num_triangles()).map(|t| mesh.triangle_area(t)).sum();
    let hole_perimeter_total = mesh.chains.iter().map(|c| c.perimeter()).sum();
    let min_angle = mesh
        .triangles
        .iter()
        .map(|t| min_angle_degrees(&mesh.vertices, t))
        .fold(f64::INFINITY, f64::min);
    MeshMetrics {
        area_fluid,
        hole_perimeter_total,
        min_angle_degrees: min_angle,
        num_vertices: mesh.num_vertices(),
        num_triangles: mesh.num_triangles(),
    }
}
