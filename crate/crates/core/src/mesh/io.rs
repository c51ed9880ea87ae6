use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{HoleEdge, Mesh};

pub const MESH_HEADER: &str = "perfhom-mesh v1";

/// Serializes a mesh in the `perfhom-mesh v1` text format. Floats use the
/// shortest round-trip representation, so write/read is lossless.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MESH_HEADER}");
    let _ = writeln!(out, "V {}", mesh.num_vertices());
    for p in &mesh.vertices {
        let _ = writeln!(out, "{} {}", p[0], p[1]);
    }
    let _ = writeln!(out, "T {}", mesh.num_triangles());
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "HB {}", mesh.hole_edges.len());
    for e in &mesh.hole_edges {
        let _ = writeln!(out, "{} {} {}", e.a, e.b, e.chain);
    }
    let _ = writeln!(out, "OB {}", mesh.outer_boundary.len());
    for v in &mesh.outer_boundary {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn write_mesh_file(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh(mesh)).map_err(|e| Error::io(path, e))
}

/// Parses the `perfhom-mesh v1` format. Cell ids and grid metadata are not
/// part of the format, so the caller supplies the grid parameters and every
/// triangle is assigned to cell 0.
pub fn read_mesh(text: &str, cells_per_side: usize, cell_resolution: usize) -> Result<Mesh> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let ctx = "perfhom-mesh";
    match lines.next() {
        Some(MESH_HEADER) => {}
        other => return Err(Error::parse(ctx, format!("bad header {other:?}"))),
    }
    let mut section = |tag: &str| -> Result<Vec<Vec<String>>> {
        let head = lines
            .next()
            .ok_or_else(|| Error::parse(ctx, format!("missing section {tag}")))?;
        let mut it = head.split_whitespace();
        if it.next() != Some(tag) {
            return Err(Error::parse(ctx, format!("expected section {tag}, got {head:?}")));
        }
        let count: usize = it
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| Error::parse(ctx, format!("bad count in {head:?}")))?;
        (0..count)
            .map(|_| {
                lines
                    .next()
                    .map(|l| l.split_whitespace().map(String::from).collect())
                    .ok_or_else(|| Error::parse(ctx, format!("section {tag} truncated")))
            })
            .collect()
    };
    fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| Error::parse("perfhom-mesh", format!("bad number {s:?}")))
    }
    fn fields<const K: usize>(row: &[String]) -> Result<&[String; K]> {
        row.try_into()
            .map_err(|_| Error::parse("perfhom-mesh", format!("expected {K} fields, got {row:?}")))
    }

    let vertices = section("V")?
        .iter()
        .map(|r| fields::<2>(r).and_then(|f| Ok([num(&f[0])?, num(&f[1])?])))
        .collect::<Result<Vec<_>>>()?;
    let triangles = section("T")?
        .iter()
        .map(|r| fields::<3>(r).and_then(|f| Ok([num(&f[0])?, num(&f[1])?, num(&f[2])?])))
        .collect::<Result<Vec<_>>>()?;
    let hole_edges = section("HB")?
        .iter()
        .map(|r| {
            fields::<3>(r).and_then(|f| {
                Ok(HoleEdge {
                    a: num(&f[0])?,
                    b: num(&f[1])?,
                    chain: num(&f[2])?,
                })
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let outer: Vec<usize> = section("OB")?
        .iter()
        .map(|r| fields::<1>(r).and_then(|f| num(&f[0])))
        .collect::<Result<Vec<_>>>()?;

    let ntri = triangles.len();
    let mesh = Mesh::from_parts(
        vertices,
        triangles,
        hole_edges,
        vec![0; ntri],
        cells_per_side,
        cell_resolution,
    )?;
    if mesh.outer_boundary != outer {
        return Err(Error::parse(ctx, "OB section disagrees with vertex coordinates"));
    }
    Ok(mesh)
}
