//! Voxelized periodic unit cells: generators for the standard test
//! geometries and a minimal lossless file format ("MPVX v1").
//!
//! Voxels are stored row-major with `x₁` fastest; membership tests use
//! voxel centers and the periodic (minimum-image) metric.  2D problems
//! are grids with `N₃ = 1`.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VoxelError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed MPVX header: {0}")]
    Header(String),
    #[error("unsupported MPVX version '{0}'")]
    Version(String),
    #[error("payload mismatch: expected {expected} phase IDs, found {found}")]
    PayloadCount { expected: usize, found: usize },
    #[error("phase ID {0} exceeds declared phase count {1}")]
    PhaseRange(u8, usize),
}

/// Periodic voxel lattice of material phase IDs.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    pub dims: [usize; 3],
    pub lengths: [f64; 3],
    pub phases: Vec<u8>,
}

impl VoxelGrid {
    pub fn uniform(dims: [usize; 3], lengths: [f64; 3], phase: u8) -> Self {
        Self {
            dims,
            lengths,
            phases: vec![phase; dims[0] * dims[1] * dims[2]],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Voxel-center coordinate of the flat index.
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let [n1, n2, _] = self.dims;
        let i = idx % n1;
        let j = (idx / n1) % n2;
        let k = idx / (n1 * n2);
        [
            (i as f64 + 0.5) * self.lengths[0] / self.dims[0] as f64,
            (j as f64 + 0.5) * self.lengths[1] / self.dims[1] as f64,
            (k as f64 + 0.5) * self.lengths[2] / self.dims[2] as f64,
        ]
    }

    /// Volume fraction of a given phase ID.
    pub fn volume_fraction(&self, phase: u8) -> f64 {
        self.phases.iter().filter(|&&p| p == phase).count() as f64 / self.len() as f64
    }

    pub fn num_phases(&self) -> usize {
        self.phases.iter().copied().max().map_or(1, |m| m as usize + 1)
    }
}

/// Minimum-image distance between two points on the periodic cell.
fn periodic_distance(a: &[f64; 3], b: &[f64; 3], lengths: &[f64; 3]) -> f64 {
    let mut d2 = 0.0;
    for c in 0..3 {
        let mut d = (a[c] - b[c]).abs() % lengths[c];
        if d > 0.5 * lengths[c] {
            d = lengths[c] - d;
        }
        d2 += d * d;
    }
    d2.sqrt()
}

/// Layered two-phase cell normal to `axis`; phase 1 occupies
/// `floor(vf·N + 0.5)` layers.  Returns the grid and the realized
/// volume fraction.
pub fn gen_laminate(
    dims: [usize; 3],
    lengths: [f64; 3],
    vf: f64,
    axis: usize,
) -> (VoxelGrid, f64) {
    assert!(axis < 3);
    assert!((0.0..=1.0).contains(&vf));
    let n = dims[axis];
    let layers = ((vf * n as f64) + 0.5).floor() as usize;
    let mut grid = VoxelGrid::uniform(dims, lengths, 0);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let along = [i, j, k][axis];
                if along >= n - layers {
                    let idx = grid.index(i, j, k);
                    grid.phases[idx] = 1;
                }
            }
        }
    }
    let realized = layers as f64 / n as f64;
    (grid, realized)
}

/// Spherical inclusions (phase 1) in a matrix (phase 0), periodic
/// wrap applied.
pub fn gen_spheres(
    dims: [usize; 3],
    lengths: [f64; 3],
    centers: &[[f64; 3]],
    radii: &[f64],
) -> VoxelGrid {
    assert_eq!(centers.len(), radii.len());
    let mut grid = VoxelGrid::uniform(dims, lengths, 0);
    for idx in 0..grid.len() {
        let x = grid.center(idx);
        for (c, &r) in centers.iter().zip(radii.iter()) {
            if periodic_distance(&x, c, &lengths) <= r {
                grid.phases[idx] = 1;
                break;
            }
        }
    }
    grid
}

/// Randomly placed equal-radius spheres with a deterministic seed.
/// Centers are drawn uniformly; no overlap check is performed.
pub fn gen_random_spheres(
    dims: [usize; 3],
    lengths: [f64; 3],
    count: usize,
    radius: f64,
    seed: u64,
) -> VoxelGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 3]> = (0..count)
        .map(|_| {
            [
                rng.gen_range(0.0..lengths[0]),
                rng.gen_range(0.0..lengths[1]),
                rng.gen_range(0.0..lengths[2]),
            ]
        })
        .collect();
    let radii = vec![radius; count];
    gen_spheres(dims, lengths, &centers, &radii)
}

/// Centered cube (phase 0) inside an outer shell (phase 1): voxels
/// whose centers lie within `inner_extent/2` of the cell center along
/// every axis belong to the inner phase.
pub fn gen_centered_cube(dims: [usize; 3], lengths: [f64; 3], inner_extent: [f64; 3]) -> VoxelGrid {
    let mut grid = VoxelGrid::uniform(dims, lengths, 1);
    let mid = [lengths[0] / 2.0, lengths[1] / 2.0, lengths[2] / 2.0];
    for idx in 0..grid.len() {
        let x = grid.center(idx);
        let inside = (0..3).all(|c| (x[c] - mid[c]).abs() <= inner_extent[c] / 2.0 + 1e-12);
        if inside {
            grid.phases[idx] = 0;
        }
    }
    grid
}

/// Four equal spheres at tetrahedrally arranged centers in a unit
/// cell, ~20% inclusion volume fraction.
pub fn gen_four_spheres(n: usize) -> VoxelGrid {
    let centers = [
        [0.25, 0.25, 0.25],
        [0.75, 0.75, 0.25],
        [0.75, 0.25, 0.75],
        [0.25, 0.75, 0.75],
    ];
    // 4·(4/3)πr³ = 0.2  →  r ≈ 0.2285
    let r = (0.2 * 3.0 / (16.0 * std::f64::consts::PI)).cbrt();
    gen_spheres([n, n, n], [1.0; 3], &centers, &[r; 4])
}

/// Single sphere of radius `r` at the cell center (inclusion phase 1).
pub fn gen_centered_sphere(dims: [usize; 3], lengths: [f64; 3], r: f64) -> VoxelGrid {
    let mid = [lengths[0] / 2.0, lengths[1] / 2.0, lengths[2] / 2.0];
    gen_spheres(dims, lengths, &[mid], &[r])
}

/// Off-centered circular inclusion on an `N×N×1` grid (2D case).
pub fn gen_circle_2d(n: usize, length: f64, center: [f64; 2], r: f64) -> VoxelGrid {
    let dims = [n, n, 1];
    let lengths = [length, length, length / n as f64];
    let mut grid = VoxelGrid::uniform(dims, lengths, 0);
    for idx in 0..grid.len() {
        let x = grid.center(idx);
        let c = [center[0], center[1], x[2]];
        if periodic_distance(&x, &c, &lengths) <= r {
            grid.phases[idx] = 1;
        }
    }
    grid
}

/// Writes a grid in MPVX v1 format.
pub fn save_voxels(grid: &VoxelGrid, path: &Path, binary: bool) -> Result<(), VoxelError> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "MPVX 1")?;
    writeln!(w, "dims {} {} {}", grid.dims[0], grid.dims[1], grid.dims[2])?;
    writeln!(w, "length {} {} {}", grid.lengths[0], grid.lengths[1], grid.lengths[2])?;
    writeln!(w, "phases {}", grid.num_phases())?;
    if binary {
        writeln!(w, "data binary")?;
        w.write_all(&grid.phases)?;
    } else {
        writeln!(w, "data ascii")?;
        for (i, p) in grid.phases.iter().enumerate() {
            if i > 0 {
                let sep = if i % grid.dims[0] == 0 { '\n' } else { ' ' };
                write!(w, "{sep}")?;
            }
            write!(w, "{p}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads an MPVX v1 file.
pub fn load_voxels(path: &Path) -> Result<VoxelGrid, VoxelError> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut line = String::new();

    let read_line = |r: &mut BufReader<std::fs::File>, line: &mut String| -> Result<String, VoxelError> {
        line.clear();
        r.read_line(line)?;
        Ok(line.trim().to_string())
    };

    let magic = read_line(&mut r, &mut line)?;
    let mut parts = magic.split_whitespace();
    if parts.next() != Some("MPVX") {
        return Err(VoxelError::Header(format!("bad magic line '{magic}'")));
    }
    match parts.next() {
        Some("1") => {}
        Some(v) => return Err(VoxelError::Version(v.to_string())),
        None => return Err(VoxelError::Header("missing version".into())),
    }

    let parse3 = |text: &str, key: &str| -> Result<[String; 3], VoxelError> {
        let mut it = text.split_whitespace();
        if it.next() != Some(key) {
            return Err(VoxelError::Header(format!("expected '{key}' line, got '{text}'")));
        }
        let vals: Vec<&str> = it.collect();
        if vals.len() != 3 {
            return Err(VoxelError::Header(format!("'{key}' needs 3 values, got {}", vals.len())));
        }
        Ok([vals[0].into(), vals[1].into(), vals[2].into()])
    };

    let dims_line = read_line(&mut r, &mut line)?;
    let d = parse3(&dims_line, "dims")?;
    let mut dims = [0usize; 3];
    for c in 0..3 {
        dims[c] = d[c]
            .parse()
            .map_err(|_| VoxelError::Header(format!("bad dim '{}'", d[c])))?;
        if dims[c] == 0 {
            return Err(VoxelError::Header("dims must be >= 1".into()));
        }
    }

    let len_line = read_line(&mut r, &mut line)?;
    let l = parse3(&len_line, "length")?;
    let mut lengths = [0.0f64; 3];
    for c in 0..3 {
        lengths[c] = l[c]
            .parse()
            .map_err(|_| VoxelError::Header(format!("bad length '{}'", l[c])))?;
    }

    let phases_line = read_line(&mut r, &mut line)?;
    let mut it = phases_line.split_whitespace();
    if it.next() != Some("phases") {
        return Err(VoxelError::Header(format!("expected 'phases' line, got '{phases_line}'")));
    }
    let phase_count: usize = it
        .next()
        .ok_or_else(|| VoxelError::Header("missing phase count".into()))?
        .parse()
        .map_err(|_| VoxelError::Header("bad phase count".into()))?;

    let data_line = read_line(&mut r, &mut line)?;
    let n = dims[0] * dims[1] * dims[2];
    let phases = match data_line.as_str() {
        "data ascii" => {
            let mut text = String::new();
            r.read_to_string(&mut text)?;
            let vals: Result<Vec<u8>, _> = text.split_whitespace().map(str::parse).collect();
            vals.map_err(|_| VoxelError::Header("non-numeric phase ID in payload".into()))?
        }
        "data binary" => {
            let mut bytes = Vec::new();
            r.read_to_end(&mut bytes)?;
            bytes
        }
        other => return Err(VoxelError::Header(format!("bad data line '{other}'"))),
    };
    if phases.len() != n {
        return Err(VoxelError::PayloadCount {
            expected: n,
            found: phases.len(),
        });
    }
    for &p in &phases {
        if p as usize >= phase_count {
            return Err(VoxelError::PhaseRange(p, phase_count));
        }
    }
    Ok(VoxelGrid {
        dims,
        lengths,
        phases,
    })
}
