//! Legacy VTK (ASCII, STRUCTURED_POINTS) field output.
//!
//! Per-voxel quantities are written as CELL_DATA scalar arrays so the
//! files load directly in standard viewers.  A minimal header reparser
//! is included for round-trip checks of the emitted format.

use crate::material::PhaseParams;
use crate::microstructure::VoxelGrid;
use crate::plasticity::{equivalent_couple_stress, equivalent_stress, PointState};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VtkError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed VTK file: {0}")]
    Format(String),
}

/// One named per-voxel scalar array.
#[derive(Clone, Debug)]
pub struct VtkField {
    pub name: String,
    pub values: Vec<f64>,
}

/// The standard output set: cumulative plastic strains, equivalent
/// stresses, and all force-/couple-stress components.
pub fn standard_fields(params: &[PhaseParams], states: &[PointState]) -> Vec<VtkField> {
    assert_eq!(params.len(), states.len());
    let mut fields = vec![
        VtkField {
            name: "p".into(),
            values: states.iter().map(|s| s.p).collect(),
        },
        VtkField {
            name: "q".into(),
            values: states.iter().map(|s| s.q).collect(),
        },
        VtkField {
            name: "t_eq".into(),
            values: states
                .iter()
                .zip(params)
                .map(|(s, p)| equivalent_stress(p, &s.t))
                .collect(),
        },
        VtkField {
            name: "m_eq".into(),
            values: states
                .iter()
                .zip(params)
                .map(|(s, p)| equivalent_couple_stress(p, &s.m))
                .collect(),
        },
    ];
    for k in 0..3 {
        for l in 0..3 {
            fields.push(VtkField {
                name: format!("t_{}{}", k + 1, l + 1),
                values: states.iter().map(|s| s.t[(k, l)]).collect(),
            });
            fields.push(VtkField {
                name: format!("m_{}{}", k + 1, l + 1),
                values: states.iter().map(|s| s.m[(k, l)]).collect(),
            });
        }
    }
    fields
}

/// Writes the grid and per-voxel fields as a legacy ASCII
/// STRUCTURED_POINTS file.  Point dimensions are `N+1` per axis; all
/// arrays are CELL_DATA.
pub fn write_vtk(grid: &VoxelGrid, fields: &[VtkField], path: &Path) -> Result<(), VtkError> {
    for f in fields {
        if f.values.len() != grid.len() {
            return Err(VtkError::Format(format!(
                "field '{}' has {} values for {} voxels",
                f.name,
                f.values.len(),
                grid.len()
            )));
        }
    }
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let [n1, n2, n3] = grid.dims;
    let h = [
        grid.lengths[0] / n1 as f64,
        grid.lengths[1] / n2 as f64,
        grid.lengths[2] / n3 as f64,
    ];
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "micropolar voxel fields")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} {}", n1 + 1, n2 + 1, n3 + 1)?;
    writeln!(w, "ORIGIN 0 0 0")?;
    writeln!(w, "SPACING {:.17e} {:.17e} {:.17e}", h[0], h[1], h[2])?;
    writeln!(w, "CELL_DATA {}", grid.len())?;
    for f in fields {
        writeln!(w, "SCALARS {} double 1", f.name)?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &f.values {
            writeln!(w, "{v:.17e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parsed summary of an emitted file: grid shape plus the names and
/// value counts of the CELL_DATA arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct VtkSummary {
    pub point_dims: [usize; 3],
    pub spacing: [f64; 3],
    pub cell_count: usize,
    pub fields: Vec<(String, usize)>,
}

/// Reparses a file produced by [`write_vtk`].
pub fn read_vtk_summary(path: &Path) -> Result<VtkSummary, VtkError> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let mut next = |what: &str| -> Result<String, VtkError> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| VtkError::Format(format!("unexpected end of file before {what}")))
    };
    let magic = next("version line")?;
    if !magic.starts_with("# vtk DataFile") {
        return Err(VtkError::Format("missing '# vtk DataFile' magic".into()));
    }
    let _title = next("title")?;
    let format = next("format")?;
    if format.trim() != "ASCII" {
        return Err(VtkError::Format(format!("expected ASCII, found '{format}'")));
    }
    let dataset = next("dataset")?;
    if dataset.trim() != "DATASET STRUCTURED_POINTS" {
        return Err(VtkError::Format(format!("unexpected dataset '{dataset}'")));
    }

    let mut point_dims = [0usize; 3];
    let mut spacing = [0.0f64; 3];
    let cell_count;
    loop {
        let line = next("CELL_DATA")?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("DIMENSIONS") => {
                for d in point_dims.iter_mut() {
                    *d = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| VtkError::Format("bad DIMENSIONS".into()))?;
                }
            }
            Some("ORIGIN") => {}
            Some("SPACING") => {
                for s in spacing.iter_mut() {
                    *s = it
                        .next()
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| VtkError::Format("bad SPACING".into()))?;
                }
            }
            Some("CELL_DATA") => {
                cell_count = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| VtkError::Format("bad CELL_DATA".into()))?;
                break;
            }
            other => {
                return Err(VtkError::Format(format!(
                    "unexpected header line '{}'",
                    other.unwrap_or("")
                )))
            }
        }
    }

    let mut fields = Vec::new();
    while let Some(line) = lines.next().transpose()? {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("SCALARS") => {
                let name = it
                    .next()
                    .ok_or_else(|| VtkError::Format("SCALARS without a name".into()))?
                    .to_string();
                let lut = lines
                    .next()
                    .transpose()?
                    .ok_or_else(|| VtkError::Format("missing LOOKUP_TABLE".into()))?;
                if !lut.starts_with("LOOKUP_TABLE") {
                    return Err(VtkError::Format("missing LOOKUP_TABLE".into()));
                }
                let mut count = 0usize;
                for _ in 0..cell_count {
                    let v = lines
                        .next()
                        .transpose()?
                        .ok_or_else(|| VtkError::Format(format!("truncated array '{name}'")))?;
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| VtkError::Format(format!("bad value in '{name}'")))?;
                    count += 1;
                }
                fields.push((name, count));
            }
            None => {}
            Some(tok) => {
                return Err(VtkError::Format(format!("unexpected token '{tok}'")));
            }
        }
    }
    Ok(VtkSummary {
        point_dims,
        spacing,
        cell_count,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::MaterialTable;
    use crate::microstructure::gen_laminate;

    #[test]
    fn round_trip_summary() {
        let (grid, _) = gen_laminate([4, 3, 2], [1.0, 1.0, 0.5], 0.5, 2);
        let params: Vec<PhaseParams> = grid
            .phases
            .iter()
            .map(|&id| *MaterialTable::table1().phase(id).unwrap())
            .collect();
        let states = vec![PointState::zero(); grid.len()];
        let fields = standard_fields(&params, &states);
        let dir = std::env::temp_dir().join("vtk_round_trip_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("fields.vtk");
        write_vtk(&grid, &fields, &path).unwrap();
        let summary = read_vtk_summary(&path).unwrap();
        assert_eq!(summary.point_dims, [5, 4, 3]);
        assert_eq!(summary.cell_count, 24);
        assert_eq!(summary.fields.len(), 4 + 18);
        assert_eq!(summary.fields[0], ("p".to_string(), 24));
        assert!((summary.spacing[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_field_list_is_valid() {
        let (grid, _) = gen_laminate([2, 2, 2], [1.0; 3], 0.5, 0);
        let dir = std::env::temp_dir().join("vtk_empty_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.vtk");
        write_vtk(&grid, &[], &path).unwrap();
        let summary = read_vtk_summary(&path).unwrap();
        assert_eq!(summary.cell_count, 8);
        assert!(summary.fields.is_empty());
    }

    #[test]
    fn wrong_length_rejected() {
        let (grid, _) = gen_laminate([2, 2, 2], [1.0; 3], 0.5, 0);
        let bad = VtkField {
            name: "p".into(),
            values: vec![0.0; 3],
        };
        let dir = std::env::temp_dir().join("vtk_bad_test");
        std::fs::create_dir_all(&dir).unwrap();
        let err = write_vtk(&grid, &[bad], &dir.join("bad.vtk"));
        assert!(matches!(err, Err(VtkError::Format(_))));
    }
}
