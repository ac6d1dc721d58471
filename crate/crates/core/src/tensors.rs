//! Dense rank-2 and rank-4 tensor algebra in three dimensions.
//!
//! Micropolar strain and stress measures are generally *asymmetric*, so
//! no Voigt-style symmetry reduction is possible.  Rank-2 tensors keep
//! all nine components in row-major order (`T[3*k + l]` holds `T_kl`),
//! rank-4 tensors all eighty-one (`C[((k*3+l)*3+m)*3+n]` holds
//! `C_klmn`).

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

/// Permutation (Levi-Civita) symbol `ε_ijk` with zero-based indices.
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Rank-2 tensor with nine independent components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2(pub [f64; 9]);

impl Tensor2 {
    pub const ZERO: Tensor2 = Tensor2([0.0; 9]);

    #[inline]
    pub fn zero() -> Self {
        Self::ZERO
    }

    #[inline]
    pub fn identity() -> Self {
        let mut t = Self::ZERO;
        t[(0, 0)] = 1.0;
        t[(1, 1)] = 1.0;
        t[(2, 2)] = 1.0;
        t
    }

    /// Builds a tensor from a component function `f(k, l) -> T_kl`.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::ZERO;
        for k in 0..3 {
            for l in 0..3 {
                t[(k, l)] = f(k, l);
            }
        }
        t
    }

    /// Builds a tensor from rows `[[T_11, T_12, T_13], ...]`.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Self::from_fn(|k, l| rows[k][l])
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self[(0, 0)] + self[(1, 1)] + self[(2, 2)]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|k, l| self[(l, k)])
    }

    /// Symmetric part `T_(kl) = (T_kl + T_lk) / 2`.
    pub fn sym(&self) -> Self {
        Self::from_fn(|k, l| 0.5 * (self[(k, l)] + self[(l, k)]))
    }

    /// Skew-symmetric part `T_[kl] = (T_kl - T_lk) / 2`.
    pub fn skew(&self) -> Self {
        Self::from_fn(|k, l| 0.5 * (self[(k, l)] - self[(l, k)]))
    }

    /// Deviatoric part `T_kl - (T_nn / 3) δ_kl`.
    pub fn deviator(&self) -> Self {
        let h = self.trace() / 3.0;
        let mut d = *self;
        d[(0, 0)] -= h;
        d[(1, 1)] -= h;
        d[(2, 2)] -= h;
        d
    }

    /// Full contraction `A_kl B_kl`.
    #[inline]
    pub fn frobenius(&self, other: &Tensor2) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Frobenius norm `sqrt(T_kl T_kl)`.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.frobenius(self).sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Tensor2 {
    type Output = f64;
    #[inline]
    fn index(&self, (k, l): (usize, usize)) -> &f64 {
        &self.0[3 * k + l]
    }
}

impl IndexMut<(usize, usize)> for Tensor2 {
    #[inline]
    fn index_mut(&mut self, (k, l): (usize, usize)) -> &mut f64 {
        &mut self.0[3 * k + l]
    }
}

impl Add for Tensor2 {
    type Output = Tensor2;
    fn add(mut self, rhs: Tensor2) -> Tensor2 {
        self += rhs;
        self
    }
}

impl AddAssign for Tensor2 {
    fn add_assign(&mut self, rhs: Tensor2) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
    }
}

impl Sub for Tensor2 {
    type Output = Tensor2;
    fn sub(mut self, rhs: Tensor2) -> Tensor2 {
        self -= rhs;
        self
    }
}

impl SubAssign for Tensor2 {
    fn sub_assign(&mut self, rhs: Tensor2) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a -= b;
        }
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Tensor2;
    fn mul(mut self, s: f64) -> Tensor2 {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl Neg for Tensor2 {
    type Output = Tensor2;
    fn neg(self) -> Tensor2 {
        self * -1.0
    }
}

/// Rank-4 tensor with eighty-one independent components.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4(pub [f64; 81]);

impl Tensor4 {
    #[inline]
    fn idx(k: usize, l: usize, m: usize, n: usize) -> usize {
        ((k * 3 + l) * 3 + m) * 3 + n
    }

    pub fn zero() -> Self {
        Tensor4([0.0; 81])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut c = Self::zero();
        for k in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    for n in 0..3 {
                        c[(k, l, m, n)] = f(k, l, m, n);
                    }
                }
            }
        }
        c
    }

    /// Isotropic family `c1 δ_kl δ_mn + c2 δ_km δ_ln + c3 δ_kn δ_lm`.
    ///
    /// The micropolar stiffness is `iso(λ, μ+κ, μ-κ)`; the couple-stress
    /// stiffness, written so that it contracts curvature on its last two
    /// indices, is `iso(α, β, γ)`.
    pub fn isotropic(c1: f64, c2: f64, c3: f64) -> Self {
        Self::from_fn(|k, l, m, n| {
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            c1 * d(k, l) * d(m, n) + c2 * d(k, m) * d(l, n) + c3 * d(k, n) * d(l, m)
        })
    }

    /// Double contraction `(C : V)_kl = C_klmn V_mn`.
    pub fn contract(&self, v: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::ZERO;
        for k in 0..3 {
            for l in 0..3 {
                let mut s = 0.0;
                for m in 0..3 {
                    for n in 0..3 {
                        s += self[(k, l, m, n)] * v[(m, n)];
                    }
                }
                out[(k, l)] = s;
            }
        }
        out
    }

    /// Left double contraction `(V : C)_mn = V_kl C_klmn`.
    pub fn contract_left(&self, v: &Tensor2) -> Tensor2 {
        let mut out = Tensor2::ZERO;
        for m in 0..3 {
            for n in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += v[(k, l)] * self[(k, l, m, n)];
                    }
                }
                out[(m, n)] = s;
            }
        }
        out
    }

    /// Dyadic product `(a ⊗ b)_klmn = a_kl b_mn`.
    pub fn outer(a: &Tensor2, b: &Tensor2) -> Self {
        Self::from_fn(|k, l, m, n| a[(k, l)] * b[(m, n)])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.clone();
        for v in c.0.iter_mut() {
            *v *= s;
        }
        c
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    #[inline]
    fn index(&self, (k, l, m, n): (usize, usize, usize, usize)) -> &f64 {
        &self.0[Self::idx(k, l, m, n)]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, (k, l, m, n): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.0[Self::idx(k, l, m, n)]
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(mut self, rhs: Tensor4) -> Tensor4 {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(mut self, rhs: Tensor4) -> Tensor4 {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a -= b;
        }
        self
    }
}
