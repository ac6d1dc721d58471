//! Flat key-value run configuration.
//!
//! The format is line-oriented: `section.key = value`, `#` comments,
//! blank lines ignored.  When a key appears twice the last occurrence
//! wins, which lets a file start from a named preset (`preset = ...`)
//! and override individual values below it.

use crate::material::{MaterialTable, PhaseParams};
use crate::microstructure::{
    gen_centered_cube, gen_centered_sphere, gen_circle_2d, gen_laminate, gen_random_spheres,
    load_voxels, VoxelGrid,
};
use crate::solver::{ErrorMetric, LoadingPath, SolverConfig};
use crate::tensors::Tensor2;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("i/o error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error("key '{key}': {msg}")]
    Invalid { key: String, msg: String },
    #[error("unknown keys: {0}")]
    Unknown(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

/// Parses the raw text into a key → value map (last occurrence wins).
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: ln + 1,
            msg: format!("expected 'key = value', found '{line}'"),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Parse {
                line: ln + 1,
                msg: format!("malformed key '{key}'"),
            });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Key lookup wrapper that tracks which keys were consumed so unknown
/// keys can be reported as errors.
struct Keys {
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Keys {
    fn get(&mut self, key: &str) -> Option<String> {
        let v = self.map.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.get(key).ok_or_else(|| ConfigError::Missing(key.into()))
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        let v = self.require(key)?;
        v.parse().map_err(|_| ConfigError::Invalid {
            key: key.into(),
            msg: format!("cannot parse '{v}'"),
        })
    }

    fn parse_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::Invalid {
                key: key.into(),
                msg: format!("cannot parse '{v}'"),
            }),
        }
    }

    fn parse_list<T: FromStr>(&mut self, key: &str, n: usize) -> Result<Vec<T>, ConfigError> {
        let v = self.require(key)?;
        let items: Result<Vec<T>, _> = v.split_whitespace().map(str::parse).collect();
        let items = items.map_err(|_| ConfigError::Invalid {
            key: key.into(),
            msg: format!("cannot parse list '{v}'"),
        })?;
        if items.len() != n {
            return Err(ConfigError::Invalid {
                key: key.into(),
                msg: format!("expected {n} values, found {}", items.len()),
            });
        }
        Ok(items)
    }

    fn finish(self) -> Result<(), ConfigError> {
        let unknown: Vec<String> = self
            .map
            .keys()
            .filter(|k| !self.used.contains(*k))
            .cloned()
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Unknown(unknown.join(", ")))
        }
    }
}

fn dims3(keys: &mut Keys) -> Result<([usize; 3], [f64; 3]), ConfigError> {
    let d: Vec<usize> = keys.parse_list("geometry.dims", 3)?;
    let l: Vec<f64> = match keys.get("geometry.lengths") {
        None => vec![1.0, 1.0, 1.0],
        Some(v) => {
            let items: Result<Vec<f64>, _> = v.split_whitespace().map(str::parse).collect();
            let items = items.map_err(|_| ConfigError::Invalid {
                key: "geometry.lengths".into(),
                msg: format!("cannot parse '{v}'"),
            })?;
            if items.len() != 3 {
                return Err(ConfigError::Invalid {
                    key: "geometry.lengths".into(),
                    msg: "expected 3 values".into(),
                });
            }
            items
        }
    };
    if d.iter().any(|&n| n == 0) || l.iter().any(|&x| x <= 0.0) {
        return Err(ConfigError::Invalid {
            key: "geometry.dims".into(),
            msg: "dimensions and lengths must be positive".into(),
        });
    }
    Ok(([d[0], d[1], d[2]], [l[0], l[1], l[2]]))
}

/// Geometry description; built into a voxel grid on demand (random
/// generators take the run seed).
#[derive(Clone, Debug)]
pub enum GeometrySpec {
    Uniform {
        dims: [usize; 3],
        lengths: [f64; 3],
    },
    Laminate {
        dims: [usize; 3],
        lengths: [f64; 3],
        vf: f64,
        axis: usize,
    },
    CenteredCube {
        dims: [usize; 3],
        lengths: [f64; 3],
        inner: [f64; 3],
    },
    CenteredSphere {
        dims: [usize; 3],
        lengths: [f64; 3],
        radius: f64,
    },
    RandomSpheres {
        dims: [usize; 3],
        lengths: [f64; 3],
        count: usize,
        radius: f64,
    },
    Circle2d {
        n: usize,
        length: f64,
        center: [f64; 2],
        radius: f64,
    },
    File {
        path: String,
    },
}

impl GeometrySpec {
    pub fn build(&self, seed: u64) -> Result<VoxelGrid, ConfigError> {
        let grid = match self {
            Self::Uniform { dims, lengths } => VoxelGrid::uniform(*dims, *lengths, 0),
            Self::Laminate {
                dims,
                lengths,
                vf,
                axis,
            } => gen_laminate(*dims, *lengths, *vf, *axis).0,
            Self::CenteredCube {
                dims,
                lengths,
                inner,
            } => gen_centered_cube(*dims, *lengths, *inner),
            Self::CenteredSphere {
                dims,
                lengths,
                radius,
            } => gen_centered_sphere(*dims, *lengths, *radius),
            Self::RandomSpheres {
                dims,
                lengths,
                count,
                radius,
            } => gen_random_spheres(*dims, *lengths, *count, *radius, seed),
            Self::Circle2d {
                n,
                length,
                center,
                radius,
            } => gen_circle_2d(*n, *length, *center, *radius),
            Self::File { path } => load_voxels(Path::new(path)).map_err(|e| {
                ConfigError::Invalid {
                    key: "geometry.path".into(),
                    msg: e.to_string(),
                }
            })?,
        };
        Ok(grid)
    }

    fn from_keys(keys: &mut Keys) -> Result<Self, ConfigError> {
        let kind = keys.require("geometry.kind")?;
        match kind.as_str() {
            "uniform" => {
                let (dims, lengths) = dims3(keys)?;
                Ok(Self::Uniform { dims, lengths })
            }
            "laminate" => {
                let (dims, lengths) = dims3(keys)?;
                let vf: f64 = keys.parse("geometry.vf")?;
                let axis: usize = keys.parse_or("geometry.axis", 0)?;
                if !(0.0..=1.0).contains(&vf) || axis > 2 {
                    return Err(ConfigError::Invalid {
                        key: "geometry.vf".into(),
                        msg: "need vf in [0,1] and axis in 0..=2".into(),
                    });
                }
                Ok(Self::Laminate {
                    dims,
                    lengths,
                    vf,
                    axis,
                })
            }
            "centered_cube" => {
                let (dims, lengths) = dims3(keys)?;
                let inner: Vec<f64> = keys.parse_list("geometry.inner", 3)?;
                Ok(Self::CenteredCube {
                    dims,
                    lengths,
                    inner: [inner[0], inner[1], inner[2]],
                })
            }
            "centered_sphere" => {
                let (dims, lengths) = dims3(keys)?;
                Ok(Self::CenteredSphere {
                    dims,
                    lengths,
                    radius: keys.parse("geometry.radius")?,
                })
            }
            "random_spheres" => {
                let (dims, lengths) = dims3(keys)?;
                Ok(Self::RandomSpheres {
                    dims,
                    lengths,
                    count: keys.parse("geometry.count")?,
                    radius: keys.parse("geometry.radius")?,
                })
            }
            "circle2d" => {
                let c: Vec<f64> = keys.parse_list("geometry.center", 2)?;
                Ok(Self::Circle2d {
                    n: keys.parse("geometry.n")?,
                    length: keys.parse_or("geometry.length", 1.0)?,
                    center: [c[0], c[1]],
                    radius: keys.parse("geometry.radius")?,
                })
            }
            "file" => Ok(Self::File {
                path: keys.require("geometry.path")?,
            }),
            other => Err(ConfigError::Invalid {
                key: "geometry.kind".into(),
                msg: format!("unknown geometry kind '{other}'"),
            }),
        }
    }
}

/// Loading program description.
#[derive(Clone, Debug)]
pub enum LoadingSpec {
    Monotonic {
        e_rate: Tensor2,
        g_rate: Tensor2,
        dt: f64,
        steps: usize,
    },
    Cyclic {
        e_rate: Tensor2,
        g_rate: Tensor2,
        period: f64,
        cycles: usize,
        dt: f64,
    },
}

impl LoadingSpec {
    pub fn to_path(&self) -> LoadingPath {
        match self {
            Self::Monotonic {
                e_rate,
                g_rate,
                dt,
                steps,
            } => LoadingPath::monotonic(*e_rate, *g_rate, *dt, *steps),
            Self::Cyclic {
                e_rate,
                g_rate,
                period,
                cycles,
                dt,
            } => LoadingPath::cyclic(*e_rate, *g_rate, *period, *cycles, *dt),
        }
    }

    fn from_keys(keys: &mut Keys) -> Result<Self, ConfigError> {
        let rate = |keys: &mut Keys, key: &str| -> Result<Tensor2, ConfigError> {
            match keys.get(key) {
                None => Ok(Tensor2::ZERO),
                Some(v) => {
                    let items: Result<Vec<f64>, _> =
                        v.split_whitespace().map(str::parse).collect();
                    let items = items.map_err(|_| ConfigError::Invalid {
                        key: key.into(),
                        msg: format!("cannot parse '{v}'"),
                    })?;
                    if items.len() != 9 {
                        return Err(ConfigError::Invalid {
                            key: key.into(),
                            msg: "expected 9 row-major components".into(),
                        });
                    }
                    let mut a = [0.0; 9];
                    a.copy_from_slice(&items);
                    Ok(Tensor2(a))
                }
            }
        };
        let kind = keys.parse_or("loading.kind", "monotonic".to_string())?;
        let e_rate = rate(keys, "loading.e_rate")?;
        let g_rate = rate(keys, "loading.g_rate")?;
        let dt: f64 = keys.parse("loading.dt")?;
        if dt <= 0.0 {
            return Err(ConfigError::Invalid {
                key: "loading.dt".into(),
                msg: "time step must be positive".into(),
            });
        }
        match kind.as_str() {
            "monotonic" => {
                let steps: usize = keys.parse("loading.steps")?;
                if steps == 0 {
                    return Err(ConfigError::Invalid {
                        key: "loading.steps".into(),
                        msg: "need at least one step".into(),
                    });
                }
                Ok(Self::Monotonic {
                    e_rate,
                    g_rate,
                    dt,
                    steps,
                })
            }
            "cyclic" => {
                let period: f64 = keys.parse("loading.period")?;
                let cycles: usize = keys.parse("loading.cycles")?;
                if period <= 0.0 || cycles == 0 {
                    return Err(ConfigError::Invalid {
                        key: "loading.period".into(),
                        msg: "need positive period and at least one cycle".into(),
                    });
                }
                Ok(Self::Cyclic {
                    e_rate,
                    g_rate,
                    period,
                    cycles,
                    dt,
                })
            }
            other => Err(ConfigError::Invalid {
                key: "loading.kind".into(),
                msg: format!("unknown loading kind '{other}'"),
            }),
        }
    }
}

/// Output selections: report file name and the steps at which field
/// snapshots are written.
#[derive(Clone, Debug, Default)]
pub struct OutputSpec {
    pub report: String,
    pub vtk_steps: Vec<usize>,
}

/// Fully parsed run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub preset_name: Option<String>,
    pub geometry: GeometrySpec,
    pub materials: MaterialTable,
    pub material_name: String,
    pub loading: LoadingSpec,
    pub solver: SolverConfig,
    pub output: OutputSpec,
}

const PHASE_FIELDS: [&str; 12] = [
    "lambda", "mu", "kappa", "alpha", "beta", "gamma", "t_y", "t_h", "m_y", "m_h", "a1", "b1",
];

fn field_mut<'a>(p: &'a mut PhaseParams, name: &str) -> Option<&'a mut f64> {
    Some(match name {
        "lambda" => &mut p.lambda,
        "mu" => &mut p.mu,
        "kappa" => &mut p.kappa,
        "alpha" => &mut p.alpha,
        "beta" => &mut p.beta,
        "gamma" => &mut p.gamma,
        "t_y" => &mut p.t_y,
        "t_h" => &mut p.t_h,
        "m_y" => &mut p.m_y,
        "m_h" => &mut p.m_h,
        "a1" => &mut p.a1,
        "b1" => &mut p.b1,
        _ => return None,
    })
}

fn materials_from_keys(keys: &mut Keys) -> Result<(MaterialTable, String), ConfigError> {
    let (mut phases, mut name) = if let Some(preset) = keys.get("material.preset") {
        let table = MaterialTable::preset(&preset).map_err(|e| ConfigError::Invalid {
            key: "material.preset".into(),
            msg: e.to_string(),
        })?;
        (table.phases, preset)
    } else {
        let count: usize = keys.parse("material.count")?;
        if count == 0 || count > 255 {
            return Err(ConfigError::Invalid {
                key: "material.count".into(),
                msg: "need 1..=255 phases".into(),
            });
        }
        let mut phases = Vec::with_capacity(count);
        for i in 1..=count {
            let mut p = PhaseParams {
                lambda: 0.0,
                mu: 0.0,
                kappa: 0.0,
                alpha: 0.0,
                beta: 0.0,
                gamma: 0.0,
                t_y: 0.0,
                t_h: 0.0,
                m_y: 0.0,
                m_h: 0.0,
                a1: 0.0,
                b1: 0.0,
            };
            for f in PHASE_FIELDS {
                let key = format!("material.phase{i}.{f}");
                *field_mut(&mut p, f).unwrap() = keys.parse(&key)?;
            }
            phases.push(p);
        }
        (phases, "inline".to_string())
    };
    // blanket overrides applied to every phase
    for f in PHASE_FIELDS {
        let key = format!("material.override.{f}");
        if let Some(v) = keys.get(&key) {
            let value: f64 = v.parse().map_err(|_| ConfigError::Invalid {
                key: key.clone(),
                msg: format!("cannot parse '{v}'"),
            })?;
            for p in phases.iter_mut() {
                *field_mut(p, f).unwrap() = value;
            }
            name = format!("{name}+{f}={v}");
        }
    }
    let table = MaterialTable::new(phases).map_err(|e| ConfigError::Invalid {
        key: "material".into(),
        msg: e.to_string(),
    })?;
    Ok((table, name))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let outer = parse_kv(text)?.remove("preset");
        let map = resolve_map(text, 0)?;
        let mut cfg = Self::from_map(map)?;
        cfg.preset_name = outer;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        Self::parse(&format!("preset = {name}\n"))
    }

    fn from_map(map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let mut keys = Keys {
            map,
            used: BTreeSet::new(),
        };
        let geometry = GeometrySpec::from_keys(&mut keys)?;
        let (materials, material_name) = materials_from_keys(&mut keys)?;
        let loading = LoadingSpec::from_keys(&mut keys)?;

        let epsilon: f64 = keys.parse_or("solver.epsilon", 1e-6)?;
        if epsilon <= 0.0 {
            return Err(ConfigError::Invalid {
                key: "solver.epsilon".into(),
                msg: "threshold must be positive".into(),
            });
        }
        let metric = match keys.parse_or("solver.metric", "local".to_string())?.as_str() {
            "local" => ErrorMetric::Local,
            "average" => ErrorMetric::Average,
            other => {
                return Err(ConfigError::Invalid {
                    key: "solver.metric".into(),
                    msg: format!("unknown metric '{other}'"),
                })
            }
        };
        let max_iters: usize = keys.parse_or("solver.max_iters", 10_000)?;

        let report = keys.parse_or("output.report", "report.csv".to_string())?;
        let vtk_steps: Vec<usize> = match keys.get("output.vtk_steps") {
            None => Vec::new(),
            Some(v) => {
                let items: Result<Vec<usize>, _> = v.split_whitespace().map(str::parse).collect();
                items.map_err(|_| ConfigError::Invalid {
                    key: "output.vtk_steps".into(),
                    msg: format!("cannot parse '{v}'"),
                })?
            }
        };

        keys.finish()?;
        Ok(Self {
            preset_name: None,
            geometry,
            materials,
            material_name,
            loading,
            solver: SolverConfig {
                epsilon,
                metric,
                max_iters,
            },
            output: OutputSpec { report, vtk_steps },
        })
    }

    /// Cross-checks the built grid against the material table.
    pub fn validate_grid(&self, grid: &VoxelGrid) -> Result<(), ConfigError> {
        if grid.num_phases() > self.materials.phases.len() {
            return Err(ConfigError::Invalid {
                key: "material".into(),
                msg: format!(
                    "grid references {} phases but only {} are defined",
                    grid.num_phases(),
                    self.materials.phases.len()
                ),
            });
        }
        Ok(())
    }
}

/// Expands `preset = name` lines (presets may themselves extend other
/// presets); explicitly given keys override the preset's values.
fn resolve_map(text: &str, depth: usize) -> Result<BTreeMap<String, String>, ConfigError> {
    if depth > 4 {
        return Err(ConfigError::UnknownPreset("preset nesting too deep".into()));
    }
    let mut map = parse_kv(text)?;
    if let Some(name) = map.remove("preset") {
        let base = preset_text(&name).ok_or(ConfigError::UnknownPreset(name))?;
        let mut merged = resolve_map(base, depth + 1)?;
        merged.append(&mut map);
        return Ok(merged);
    }
    Ok(map)
}

fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1.circle" => {
            "geometry.kind = circle2d\n\
             geometry.n = 100\n\
             geometry.length = 1.0\n\
             geometry.center = 0.6 0.6\n\
             geometry.radius = 0.25\n\
             material.preset = table1\n\
             loading.kind = monotonic\n\
             loading.e_rate = 0 1 0 0 0 0 0 0 0\n\
             loading.dt = 0.01\n\
             loading.steps = 100\n\
             solver.epsilon = 1e-6\n\
             solver.metric = local\n"
        }
        "fig1.circle.cauchy" => {
            "geometry.kind = circle2d\n\
             geometry.n = 100\n\
             geometry.length = 1.0\n\
             geometry.center = 0.6 0.6\n\
             geometry.radius = 0.25\n\
             material.preset = table1.cauchy\n\
             loading.kind = monotonic\n\
             loading.e_rate = 0 1 0 1 0 0 0 0 0\n\
             loading.dt = 0.01\n\
             loading.steps = 100\n\
             solver.epsilon = 1e-6\n\
             solver.metric = local\n"
        }
        "fig3.ratchet" => {
            "geometry.kind = laminate\n\
             geometry.dims = 4 4 4\n\
             geometry.vf = 0.5\n\
             geometry.axis = 1\n\
             material.preset = table2\n\
             loading.kind = cyclic\n\
             loading.e_rate = 0 1 0 0 0 0 0 0 0\n\
             loading.period = 1.0\n\
             loading.cycles = 10\n\
             loading.dt = 0.01\n\
             solver.epsilon = 1e-5\n\
             solver.metric = local\n"
        }
        "fig3.ratchet.elastic" => {
            // all-elastic control: yield limits far above the load scale
            "preset = fig3.ratchet\n\
             material.override.t_y = 1e6\n\
             material.override.m_y = 1e6\n"
        }
        "fig4.fatigue.mh0" => {
            "preset = fig3.ratchet\n\
             material.override.t_y = 1.9\n\
             material.override.m_h = 0.0\n\
             loading.cycles = 50\n"
        }
        "fig4.fatigue.mh0025" => {
            "preset = fig3.ratchet\n\
             material.override.t_y = 1.9\n\
             material.override.m_h = 0.0025\n\
             loading.cycles = 50\n"
        }
        _ => return None,
    })
}

/// The preset catalog (for `--help` text and tests).
pub const PRESET_NAMES: [&str; 6] = [
    "fig1.circle",
    "fig1.circle.cauchy",
    "fig3.ratchet",
    "fig3.ratchet.elastic",
    "fig4.fatigue.mh0",
    "fig4.fatigue.mh0025",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::parse(
            "geometry.kind = laminate\n\
             geometry.dims = 4 4 4\n\
             geometry.vf = 0.5\n\
             material.preset = table1\n\
             loading.e_rate = 0 1 0 0 0 0 0 0 0\n\
             loading.dt = 0.01\n\
             loading.steps = 10\n",
        )
        .unwrap();
        assert_eq!(cfg.solver.epsilon, 1e-6);
        assert!(matches!(cfg.loading, LoadingSpec::Monotonic { steps: 10, .. }));
        let grid = cfg.geometry.build(0).unwrap();
        cfg.validate_grid(&grid).unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        let err = RunConfig::parse(
            "geometry.kind = laminate\n\
             geometry.dims = 4 4 4\n\
             geometry.vf = 0.5\n\
             geometry.bogus = 1\n\
             material.preset = table1\n\
             loading.dt = 0.01\n\
             loading.steps = 10\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Unknown(_)));
    }

    #[test]
    fn bad_line_reports_location() {
        let err = parse_kv("geometry.kind = laminate\nnot a key value line\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn all_presets_parse_and_build() {
        for name in PRESET_NAMES {
            let cfg = RunConfig::preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            let grid = cfg.geometry.build(42).unwrap();
            cfg.validate_grid(&grid).unwrap();
            for p in &cfg.materials.phases {
                p.validate().unwrap();
            }
        }
    }

    #[test]
    fn preset_override_applies() {
        let cfg = RunConfig::parse("preset = fig3.ratchet\nsolver.epsilon = 1e-3\n").unwrap();
        assert_eq!(cfg.solver.epsilon, 1e-3);
        assert_eq!(cfg.preset_name.as_deref(), Some("fig3.ratchet"));
    }

    #[test]
    fn fatigue_preset_overrides_yield() {
        let cfg = RunConfig::preset("fig4.fatigue.mh0").unwrap();
        for p in &cfg.materials.phases {
            assert_eq!(p.t_y, 1.9);
            assert_eq!(p.m_h, 0.0);
        }
        match cfg.loading {
            LoadingSpec::Cyclic { cycles, .. } => assert_eq!(cycles, 50),
            _ => panic!("expected cyclic loading"),
        }
    }

    #[test]
    fn inline_material_table() {
        let mut text = String::from(
            "geometry.kind = uniform\n\
             geometry.dims = 2 2 2\n\
             material.count = 1\n\
             loading.e_rate = 0 1 0 0 0 0 0 0 0\n\
             loading.dt = 0.1\n\
             loading.steps = 2\n",
        );
        for (f, v) in [
            ("lambda", 1.0),
            ("mu", 1.0),
            ("kappa", 0.5),
            ("alpha", 0.0),
            ("beta", 0.25),
            ("gamma", 1.0),
            ("t_y", 0.5),
            ("t_h", 0.1),
            ("m_y", 0.5),
            ("m_h", 0.1),
            ("a1", 1.5),
            ("b1", 1.5),
        ] {
            text.push_str(&format!("material.phase1.{f} = {v}\n"));
        }
        let cfg = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg.materials.phases.len(), 1);
        assert_eq!(cfg.materials.phases[0].beta, 0.25);
    }
}
