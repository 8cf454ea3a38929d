use std::io::Write;

use super::Mesh;
use crate::error::{Error, Result};
use crate::scalar::Real;

const VTK_TETRA: u8 = 10;

/// Writes a legacy ASCII VTK unstructured grid. Vertices and tetrahedra are
/// emitted in stored order; the boundary tag is always attached as point
/// data, followed by any extra per-vertex scalar fields.
pub fn write_vtk<T: Real, W: Write>(out: &mut W, mesh: &Mesh<T>, point_fields: &[(&str, &[T])]) -> Result<()> {
    for (name, values) in point_fields {
        if values.len() != mesh.n_vertices() {
            return Err(Error::DimensionMismatch {
                expected: mesh.n_vertices(),
                actual: values.len(),
            });
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!("invalid VTK field name {name:?}")));
        }
    }
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "spherical shell tetrahedral mesh")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(out, "{} {} {}", p[0], p[1], p[2])?;
    }
    let nt = mesh.n_tets();
    writeln!(out, "CELLS {} {}", nt, 5 * nt)?;
    for t in mesh.tets() {
        writeln!(out, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "{VTK_TETRA}")?;
    }
    writeln!(out, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(out, "SCALARS boundary_tag int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for t in mesh.vertex_tags() {
        writeln!(out, "{}", t.code())?;
    }
    for (name, values) in point_fields {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in values.iter() {
            writeln!(out, "{v}")?;
        }
    }
    Ok(())
}
