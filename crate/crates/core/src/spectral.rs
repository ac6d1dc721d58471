//! Periodic frequency grid, componentwise 3D FFTs, and the micropolar
//! reference-medium Green operator.
//!
//! Rather than closed-form Green tensors, the operator is realized per
//! frequency `ξ ≠ 0` as a factorized complex 6×6 solve in the
//! displacement/micro-rotation fluctuation amplitudes `(û_l, φ̂_l)`:
//!
//! ```text
//! iξ_k [A⁰_klmn ê_mn + τ̂_kl] = 0
//! iξ_k [B⁰_klmn γ̂_mn + μ̂_kl] + ε_lkm [A⁰_kmrs ê_rs + τ̂_km] = 0
//! ê_kl = iξ_k û_l + ε_lkm φ̂_m ,   γ̂_kl = iξ_l φ̂_k
//! ```
//!
//! The `ξ = 0` bin is forced to zero (zero-mean fluctuations);
//! prescribed averages are added back in real space by the solver.

use crate::tensors::{levi_civita, Tensor2, Tensor4};
use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("field has {got} entries but grid has {want} voxels")]
    DimensionMismatch { got: usize, want: usize },
    #[error("singular Green system at frequency index {0} (inadmissible reference medium?)")]
    SingularFrequency(usize),
}

/// Discrete periodic frequency lattice with continuous angular
/// wavevectors `ξ = 2π k̃ / L` (standard FFT index ordering; the
/// Nyquist index of an even dimension maps to `k̃ = -N/2`).
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub dims: [usize; 3],
    pub lengths: [f64; 3],
}

impl FrequencyGrid {
    pub fn new(dims: [usize; 3], lengths: [f64; 3]) -> Self {
        assert!(dims.iter().all(|&n| n >= 1));
        assert!(lengths.iter().all(|&l| l > 0.0));
        Self { dims, lengths }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed integer frequency for position `i` along a dimension of
    /// size `n`.
    #[inline]
    pub fn signed_index(i: usize, n: usize) -> i64 {
        if i < (n + 1) / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Angular wavevector of the flat frequency index.
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let [n1, n2, n3] = self.dims;
        let i1 = idx % n1;
        let i2 = (idx / n1) % n2;
        let i3 = idx / (n1 * n2);
        debug_assert!(i3 < n3);
        let two_pi = 2.0 * std::f64::consts::PI;
        [
            two_pi * Self::signed_index(i1, n1) as f64 / self.lengths[0],
            two_pi * Self::signed_index(i2, n2) as f64 / self.lengths[1],
            two_pi * Self::signed_index(i3, n3) as f64 / self.lengths[2],
        ]
    }
}

/// Complex tensor field, one `Tensor2`'s worth of components per voxel
/// or frequency bin.
#[derive(Clone, Debug)]
pub struct ComplexField2 {
    pub data: Vec<[Complex64; 9]>,
}

impl ComplexField2 {
    pub fn zeros(n: usize) -> Self {
        Self {
            data: vec![[Complex64::ZERO; 9]; n],
        }
    }
}

/// Planned forward/inverse 3D FFTs for one grid.
pub struct Fft3 {
    dims: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = [
            planner.plan_fft_forward(dims[0]),
            planner.plan_fft_forward(dims[1]),
            planner.plan_fft_forward(dims[2]),
        ];
        let inv = [
            planner.plan_fft_inverse(dims[0]),
            planner.plan_fft_inverse(dims[1]),
            planner.plan_fft_inverse(dims[2]),
        ];
        Self { dims, fwd, inv }
    }

    fn n(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// In-place 3D transform of a scalar complex buffer.
    fn transform3(&self, buf: &mut [Complex64], inverse: bool) {
        let [n1, n2, n3] = self.dims;
        let plans = if inverse { &self.inv } else { &self.fwd };

        // Axis 0: contiguous rows.
        if n1 > 1 {
            let mut scratch = vec![Complex64::ZERO; plans[0].get_inplace_scratch_len()];
            for row in buf.chunks_exact_mut(n1) {
                plans[0].process_with_scratch(row, &mut scratch);
            }
        }
        // Axis 1: stride n1 within each (i3) slab.
        if n2 > 1 {
            let mut scratch = vec![Complex64::ZERO; plans[1].get_inplace_scratch_len()];
            let mut line = vec![Complex64::ZERO; n2];
            for i3 in 0..n3 {
                for i1 in 0..n1 {
                    let base = i1 + n1 * n2 * i3;
                    for j in 0..n2 {
                        line[j] = buf[base + n1 * j];
                    }
                    plans[1].process_with_scratch(&mut line, &mut scratch);
                    for j in 0..n2 {
                        buf[base + n1 * j] = line[j];
                    }
                }
            }
        }
        // Axis 2: stride n1*n2.
        if n3 > 1 {
            let mut scratch = vec![Complex64::ZERO; plans[2].get_inplace_scratch_len()];
            let mut line = vec![Complex64::ZERO; n3];
            for i2 in 0..n2 {
                for i1 in 0..n1 {
                    let base = i1 + n1 * i2;
                    for j in 0..n3 {
                        line[j] = buf[base + n1 * n2 * j];
                    }
                    plans[2].process_with_scratch(&mut line, &mut scratch);
                    for j in 0..n3 {
                        buf[base + n1 * n2 * j] = line[j];
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / self.n() as f64;
            for v in buf.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Componentwise forward transform of a real tensor field.
    pub fn forward_field(&self, field: &[Tensor2]) -> Result<ComplexField2, SpectralError> {
        if field.len() != self.n() {
            return Err(SpectralError::DimensionMismatch {
                got: field.len(),
                want: self.n(),
            });
        }
        let mut out = ComplexField2::zeros(self.n());
        let mut buf = vec![Complex64::ZERO; self.n()];
        for c in 0..9 {
            for (b, t) in buf.iter_mut().zip(field.iter()) {
                *b = Complex64::new(t.0[c], 0.0);
            }
            self.transform3(&mut buf, false);
            for (o, b) in out.data.iter_mut().zip(buf.iter()) {
                o[c] = *b;
            }
        }
        Ok(out)
    }

    /// Componentwise inverse transform; keeps the real part.
    pub fn inverse_field(&self, spec: &ComplexField2) -> Result<Vec<Tensor2>, SpectralError> {
        if spec.data.len() != self.n() {
            return Err(SpectralError::DimensionMismatch {
                got: spec.data.len(),
                want: self.n(),
            });
        }
        let mut out = vec![Tensor2::ZERO; self.n()];
        let mut buf = vec![Complex64::ZERO; self.n()];
        for c in 0..9 {
            for (b, s) in buf.iter_mut().zip(spec.data.iter()) {
                *b = s[c];
            }
            self.transform3(&mut buf, true);
            for (o, b) in out.iter_mut().zip(buf.iter()) {
                o.0[c] = b.re;
            }
        }
        Ok(out)
    }
}

#[inline]
fn t2c_idx(k: usize, l: usize) -> usize {
    3 * k + l
}

/// Double contraction of a real rank-4 tensor with a complex rank-2.
fn contract4_c(c: &Tensor4, v: &[Complex64; 9]) -> [Complex64; 9] {
    let mut out = [Complex64::ZERO; 9];
    for k in 0..3 {
        for l in 0..3 {
            let mut s = Complex64::ZERO;
            for m in 0..3 {
                for n in 0..3 {
                    s += v[t2c_idx(m, n)] * c[(k, l, m, n)];
                }
            }
            out[t2c_idx(k, l)] = s;
        }
    }
    out
}

/// Kinematic maps `ê_kl = iξ_k û_l + ε_lkm φ̂_m`, `γ̂_kl = iξ_l φ̂_k`.
fn kinematics(xi: &[f64; 3], w: &Vector6<Complex64>) -> ([Complex64; 9], [Complex64; 9]) {
    let i = Complex64::new(0.0, 1.0);
    let mut e = [Complex64::ZERO; 9];
    let mut g = [Complex64::ZERO; 9];
    for k in 0..3 {
        for l in 0..3 {
            let mut v = i * xi[k] * w[l];
            for m in 0..3 {
                let lc = levi_civita(l, k, m);
                if lc != 0.0 {
                    v += w[3 + m] * lc;
                }
            }
            e[t2c_idx(k, l)] = v;
            g[t2c_idx(k, l)] = i * xi[l] * w[3 + k];
        }
    }
    (e, g)
}

/// Balance residual rows for reference stresses plus sources.
fn balance(
    a0: &Tensor4,
    b0: &Tensor4,
    xi: &[f64; 3],
    e_hat: &[Complex64; 9],
    g_hat: &[Complex64; 9],
    tau: &[Complex64; 9],
    mu: &[Complex64; 9],
) -> Vector6<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut t0 = contract4_c(a0, e_hat);
    let mut m0 = contract4_c(b0, g_hat);
    for c in 0..9 {
        t0[c] += tau[c];
        m0[c] += mu[c];
    }
    let mut rows = Vector6::from_element(Complex64::ZERO);
    for l in 0..3 {
        let mut lin = Complex64::ZERO;
        let mut ang = Complex64::ZERO;
        for k in 0..3 {
            lin += i * xi[k] * t0[t2c_idx(k, l)];
            ang += i * xi[k] * m0[t2c_idx(k, l)];
            for m in 0..3 {
                let lc = levi_civita(l, k, m);
                if lc != 0.0 {
                    ang += t0[t2c_idx(k, m)] * lc;
                }
            }
        }
        rows[l] = lin;
        rows[3 + l] = ang;
    }
    rows
}

/// Precomputed per-frequency inverse operators of the reference medium.
pub struct GreensCache {
    pub grid: FrequencyGrid,
    pub a0: Tensor4,
    pub b0: Tensor4,
    /// Inverse of the 6×6 balance matrix per frequency; the ξ=0 slot
    /// holds zeros (fluctuations there are forced to zero).
    inv: Vec<Matrix6<Complex64>>,
}

/// Builds the cache by probing the balance operator with unit
/// amplitudes and inverting the resulting 6×6 matrix per frequency.
pub fn build_greens_cache(
    a0: &Tensor4,
    b0: &Tensor4,
    grid: &FrequencyGrid,
) -> Result<GreensCache, SpectralError> {
    let zero_src = [Complex64::ZERO; 9];
    let inv: Vec<Matrix6<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let xi = grid.xi(idx);
            if xi == [0.0; 3] {
                return Ok(Matrix6::from_element(Complex64::ZERO));
            }
            let mut m = Matrix6::from_element(Complex64::ZERO);
            for col in 0..6 {
                let mut w = Vector6::from_element(Complex64::ZERO);
                w[col] = Complex64::new(1.0, 0.0);
                let (e_hat, g_hat) = kinematics(&xi, &w);
                let rows = balance(a0, b0, &xi, &e_hat, &g_hat, &zero_src, &zero_src);
                for r in 0..6 {
                    m[(r, col)] = rows[r];
                }
            }
            m.try_inverse().ok_or(SpectralError::SingularFrequency(idx))
        })
        .collect::<Result<_, _>>()?;
    Ok(GreensCache {
        grid: grid.clone(),
        a0: a0.clone(),
        b0: b0.clone(),
        inv,
    })
}

impl GreensCache {
    /// Solves for the fluctuation amplitudes at one frequency and
    /// returns the kinematic fluctuation fields `(ê, γ̂)`.
    fn solve_one(
        &self,
        idx: usize,
        tau: &[Complex64; 9],
        mu: &[Complex64; 9],
    ) -> ([Complex64; 9], [Complex64; 9]) {
        let xi = self.grid.xi(idx);
        if xi == [0.0; 3] {
            return ([Complex64::ZERO; 9], [Complex64::ZERO; 9]);
        }
        let i = Complex64::new(0.0, 1.0);
        let mut rhs = Vector6::from_element(Complex64::ZERO);
        for l in 0..3 {
            let mut lin = Complex64::ZERO;
            let mut ang = Complex64::ZERO;
            for k in 0..3 {
                lin += i * xi[k] * tau[t2c_idx(k, l)];
                ang += i * xi[k] * mu[t2c_idx(k, l)];
                for m in 0..3 {
                    let lc = levi_civita(l, k, m);
                    if lc != 0.0 {
                        ang += tau[t2c_idx(k, m)] * lc;
                    }
                }
            }
            rhs[l] = -lin;
            rhs[3 + l] = -ang;
        }
        let w = self.inv[idx] * rhs;
        kinematics(&xi, &w)
    }
}

/// Applies the Green operator to spectral polarization fields,
/// returning spectral strain and curvature fluctuations (zero at ξ=0).
pub fn apply_greens(
    cache: &GreensCache,
    tau_hat: &ComplexField2,
    mu_hat: &ComplexField2,
) -> (ComplexField2, ComplexField2) {
    let n = cache.grid.len();
    assert_eq!(tau_hat.data.len(), n);
    assert_eq!(mu_hat.data.len(), n);
    let pairs: Vec<([Complex64; 9], [Complex64; 9])> = (0..n)
        .into_par_iter()
        .map(|idx| cache.solve_one(idx, &tau_hat.data[idx], &mu_hat.data[idx]))
        .collect();
    let mut e = ComplexField2::zeros(n);
    let mut g = ComplexField2::zeros(n);
    for (idx, (eh, gh)) in pairs.into_iter().enumerate() {
        e.data[idx] = eh;
        g.data[idx] = gh;
    }
    (e, g)
}

/// Balance residual norms `(linear, angular)` of the reference-medium
/// stresses at one frequency, used by tests and debug assertions.
pub fn balance_residual(
    cache: &GreensCache,
    idx: usize,
    e_hat: &[Complex64; 9],
    g_hat: &[Complex64; 9],
    tau: &[Complex64; 9],
    mu: &[Complex64; 9],
) -> (f64, f64) {
    let xi = cache.grid.xi(idx);
    let rows = balance(&cache.a0, &cache.b0, &xi, e_hat, g_hat, tau, mu);
    let lin = (0..3).map(|l| rows[l].norm_sqr()).sum::<f64>().sqrt();
    let ang = (0..3).map(|l| rows[3 + l].norm_sqr()).sum::<f64>().sqrt();
    (lin, ang)
}
