//! Periodic voxel-based spectral solver for micropolar (Cosserat)
//! elastoplastic composites.
//!
//! The crate is organized bottom-up: dense rank-2/rank-4 tensor algebra
//! (`tensors`), isotropic micropolar constitutive data (`material`), the
//! two-level radial-return mapping (`plasticity`), the periodic Green
//! operator in Fourier space (`spectral`), voxel unit cells
//! (`microstructure`), the time-stepped fixed-point scheme (`solver`),
//! the manufactured-solution verification harness (`verification`), and
//! batch-run configuration plus output writers (`config`, `vtk`).

pub mod config;
pub mod material;
pub mod microstructure;
pub mod plasticity;
pub mod solver;
pub mod spectral;
pub mod tensors;
pub mod verification;
pub mod vtk;

pub use material::{MaterialTable, PhaseParams};
pub use microstructure::VoxelGrid;
pub use solver::{ErrorMetric, LoadingPath, Solver, SolverConfig, SolverReport};
pub use tensors::{Tensor2, Tensor4};
