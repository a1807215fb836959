//! Legacy ASCII VTK output (unstructured grid with line or triangle cells).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

const VTK_LINE: u8 = 3;
const VTK_TRIANGLE: u8 = 5;

/// Writes `mesh` with optional nodal scalar fields.
pub fn write_vtk<W: Write>(mut w: W, mesh: &SurfaceMesh, fields: &[(&str, &[f64])]) -> Result<()> {
    let n = mesh.num_vertices();
    for (name, values) in fields {
        if values.len() != n {
            return Err(Error::Dimension { expected: n, got: values.len() });
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::param("field", format!("invalid VTK field name `{name}`")));
        }
    }
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", mesh.id())?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    let nv = mesh.dim() + 1;
    let nc = mesh.num_simplices();
    writeln!(w, "CELLS {nc} {}", nc * (nv + 1))?;
    for s in mesh.simplices() {
        write!(w, "{nv}")?;
        for v in s {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    let cell_type = if mesh.dim() == 1 { VTK_LINE } else { VTK_TRIANGLE };
    for _ in 0..nc {
        writeln!(w, "{cell_type}")?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {n}")?;
        for (name, values) in fields {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in values.iter() {
                writeln!(w, "{v}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_vtk_file(path: &Path, mesh: &SurfaceMesh, fields: &[(&str, &[f64])]) -> Result<()> {
    write_vtk(BufWriter::new(File::create(path)?), mesh, fields)
}
