//! Isotropic micropolar elastoplastic phase parameters and stiffness
//! assembly.
//!
//! Each phase carries six elastic moduli `(λ, μ, κ, α, β, γ)`, the
//! macro yield/hardening pair `(t_Y, t_H)`, the micro yield/hardening
//! pair `(m_Y, m_H)` and the yield-surface shape factors `(a1, b1)`.
//! The companion factors are *derived* so that the radial-return update
//! admits a closed form:
//!
//! ```text
//! a2 = a1 μ / κ          b2 = b1 (γ + β) / (γ - β)
//! ```
//!
//! Stress and couple stress follow from the elastic strain `e` and
//! elastic curvature `γ` as
//!
//! ```text
//! t = λ tr(e) δ + 2μ sym(e) + 2κ skew(e)
//! m = α tr(γ) δ + (β + γ) sym(γ) + (β - γ) skew(γ)
//! ```

use crate::tensors::{Tensor2, Tensor4};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MaterialError {
    #[error("inadmissible elastic moduli: {0}")]
    Inadmissible(String),
    #[error("unknown material preset '{0}'")]
    UnknownPreset(String),
    #[error("phase id {0} out of range for material table with {1} phases")]
    PhaseOutOfRange(u8, usize),
}

/// Full parameter set of one isotropic micropolar elastoplastic phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseParams {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Initial macro yield stress.
    pub t_y: f64,
    /// Linear macro hardening modulus.
    pub t_h: f64,
    /// Initial micro (couple-stress) yield value.
    pub m_y: f64,
    /// Linear micro hardening modulus.
    pub m_h: f64,
    /// Symmetric-part weight of the macro yield surface.
    pub a1: f64,
    /// Symmetric-part weight of the micro yield surface.
    pub b1: f64,
}

impl PhaseParams {
    /// Checks the energetic admissibility bounds on the elastic moduli
    /// plus positivity of the plastic parameters.
    pub fn validate(&self) -> Result<(), MaterialError> {
        let fail = |msg: String| Err(MaterialError::Inadmissible(msg));
        if !(3.0 * self.lambda + 2.0 * self.mu > 0.0) {
            return fail(format!("3λ + 2μ = {} must be > 0", 3.0 * self.lambda + 2.0 * self.mu));
        }
        if !(self.mu > 0.0) {
            return fail(format!("μ = {} must be > 0", self.mu));
        }
        if !(self.kappa > 0.0) {
            return fail(format!("κ = {} must be > 0", self.kappa));
        }
        if !(3.0 * self.alpha + self.beta + self.gamma > 0.0) {
            return fail(format!(
                "3α + β + γ = {} must be > 0",
                3.0 * self.alpha + self.beta + self.gamma
            ));
        }
        if !(self.gamma + self.beta > 0.0) {
            return fail(format!("γ + β = {} must be > 0", self.gamma + self.beta));
        }
        if !(self.gamma - self.beta > 0.0) {
            return fail(format!("γ - β = {} must be > 0", self.gamma - self.beta));
        }
        if !(self.t_y > 0.0) || !(self.m_y > 0.0) {
            return fail("yield stresses t_Y, m_Y must be > 0".to_string());
        }
        if self.t_h < 0.0 || self.m_h < 0.0 {
            return fail("hardening moduli t_H, m_H must be >= 0".to_string());
        }
        if !(self.a1 > 0.0) || !(self.b1 > 0.0) {
            return fail("yield shape factors a1, b1 must be > 0".to_string());
        }
        Ok(())
    }

    /// Skew-part weight of the macro yield surface, `a2 = a1 μ / κ`.
    #[inline]
    pub fn a2(&self) -> f64 {
        self.a1 * self.mu / self.kappa
    }

    /// Skew-part weight of the micro yield surface,
    /// `b2 = b1 (γ + β) / (γ - β)`.
    #[inline]
    pub fn b2(&self) -> f64 {
        self.b1 * (self.gamma + self.beta) / (self.gamma - self.beta)
    }

    /// Dense stiffness tensors `(A, B)`; `t = A : e` and `m = B : γ`
    /// where `B` contracts the curvature on its last two indices.
    pub fn assemble_stiffness(&self) -> (Tensor4, Tensor4) {
        let a = Tensor4::isotropic(self.lambda, self.mu + self.kappa, self.mu - self.kappa);
        let b = Tensor4::isotropic(self.alpha, self.beta, self.gamma);
        (a, b)
    }

    /// Stress and couple stress from elastic strain and curvature,
    /// evaluated in closed isotropic form.
    pub fn elastic_stress(&self, e: &Tensor2, g: &Tensor2) -> (Tensor2, Tensor2) {
        let t = Tensor2::identity() * (self.lambda * e.trace())
            + e.sym() * (2.0 * self.mu)
            + e.skew() * (2.0 * self.kappa);
        let m = Tensor2::identity() * (self.alpha * g.trace())
            + g.sym() * (self.beta + self.gamma)
            + g.skew() * (self.beta - self.gamma);
        (t, m)
    }

    /// Inverse of the stress map: elastic strain producing `t`.
    pub fn elastic_strain_from_stress(&self, t: &Tensor2) -> Tensor2 {
        let tr = t.trace() / (3.0 * self.lambda + 2.0 * self.mu);
        let s = t.deviator();
        s.sym() * (0.5 / self.mu) + s.skew() * (0.5 / self.kappa) + Tensor2::identity() * (tr / 3.0)
    }

    /// Inverse of the couple-stress map: elastic curvature producing `m`.
    pub fn elastic_curvature_from_couple(&self, m: &Tensor2) -> Tensor2 {
        let tr = m.trace() / (3.0 * self.alpha + self.beta + self.gamma);
        let d = m.deviator();
        d.sym() * (1.0 / (self.beta + self.gamma))
            + d.skew() * (1.0 / (self.beta - self.gamma))
            + Tensor2::identity() * (tr / 3.0)
    }

    /// Characteristic elastic and plastic length scales
    /// `l_e = sqrt(γ / μ)`, `l_p = sqrt(a1 / b1)`.
    pub fn length_scales(&self) -> (f64, f64) {
        ((self.gamma / self.mu).sqrt(), (self.a1 / self.b1).sqrt())
    }
}

/// Ordered list of phases; voxel phase IDs index into it.
#[derive(Clone, Debug)]
pub struct MaterialTable {
    pub phases: Vec<PhaseParams>,
}

impl MaterialTable {
    pub fn new(phases: Vec<PhaseParams>) -> Result<Self, MaterialError> {
        for p in &phases {
            p.validate()?;
        }
        Ok(Self { phases })
    }

    pub fn phase(&self, id: u8) -> Result<&PhaseParams, MaterialError> {
        self.phases
            .get(id as usize)
            .ok_or(MaterialError::PhaseOutOfRange(id, self.phases.len()))
    }

    /// Two-phase composite for the plastic-zone maps: a soft matrix
    /// phase and a stiff inclusion phase with doubled elastic moduli.
    pub fn table1() -> Self {
        let p1 = PhaseParams {
            lambda: 1.0,
            mu: 1.0,
            kappa: 1.0,
            alpha: 0.0,
            beta: 0.0,
            gamma: 1.0,
            t_y: 0.5,
            t_h: 0.125,
            m_y: 0.5,
            m_h: 0.125,
            a1: 1.5,
            b1: 1.5,
        };
        let p2 = PhaseParams {
            lambda: 2.0,
            mu: 2.0,
            kappa: 2.0,
            gamma: 2.0,
            t_y: 0.75,
            t_h: 0.25,
            m_y: 0.75,
            m_h: 0.25,
            ..p1
        };
        Self::new(vec![p1, p2]).expect("table1 phases are admissible")
    }

    /// `table1` driven towards the classical Cauchy limit: vanishing
    /// rotational stiffness and an inert couple-stress yield surface.
    pub fn table1_cauchy() -> Self {
        let base = Self::table1();
        let phases = base
            .phases
            .iter()
            .map(|p| PhaseParams {
                kappa: 1e-4,
                gamma: 1e-4,
                beta: 0.0,
                m_y: 1000.0,
                m_h: 0.0,
                b1: 1000.0,
                ..*p
            })
            .collect();
        Self::new(phases).expect("cauchy-limit phases are admissible")
    }

    /// Two-phase laminate for the cyclic micro-ratcheting study: high
    /// macro yield (macroscopically elastic) with a very soft micro
    /// yield surface.
    pub fn table2() -> Self {
        let p1 = PhaseParams {
            lambda: 1.0,
            mu: 1.0,
            kappa: 1.0,
            alpha: 0.0,
            beta: 1.0,
            gamma: 2.0,
            t_y: 2.5,
            t_h: 0.0,
            m_y: 0.005,
            m_h: 0.0025,
            a1: 1.5,
            b1: 1.5,
        };
        let p2 = PhaseParams {
            lambda: 2.0,
            mu: 2.0,
            kappa: 2.0,
            beta: 2.0,
            gamma: 4.0,
            ..p1
        };
        Self::new(vec![p1, p2]).expect("table2 phases are admissible")
    }

    /// Length-scale scan composite parameterized by the elastic length
    /// `l_e = sqrt(γ/μ)` and plastic length `l_p = sqrt(a1/b1)`.  The
    /// rotational moduli are held fixed (`γ` of 1.0 and 2.0) while the
    /// classical moduli and yield-shape factors move with the lengths.
    pub fn table3(l_e: f64, l_p: f64) -> Self {
        let b1 = 1.5;
        let mk = |gamma: f64, t_y: f64, t_h: f64| PhaseParams {
            lambda: gamma / (l_e * l_e),
            mu: gamma / (l_e * l_e),
            kappa: gamma / (l_e * l_e),
            alpha: 0.0,
            beta: gamma / 2.0,
            gamma,
            t_y,
            t_h,
            m_y: t_y,
            m_h: t_h,
            a1: b1 * l_p * l_p,
            b1,
        };
        Self::new(vec![mk(1.0, 0.5, 0.125), mk(2.0, 0.75, 0.25)])
            .expect("table3 phases are admissible")
    }

    /// Two-phase laminate used for runtime complexity measurements.
    pub fn table4() -> Self {
        let p1 = PhaseParams {
            lambda: 1.0,
            mu: 1.0,
            kappa: 1.0,
            alpha: 0.0,
            beta: 0.5,
            gamma: 1.0,
            t_y: 0.5,
            t_h: 0.125,
            m_y: 0.5,
            m_h: 0.125,
            a1: 1.5,
            b1: 1.5,
        };
        let p2 = PhaseParams {
            lambda: 2.0,
            mu: 2.0,
            kappa: 2.0,
            beta: 1.0,
            gamma: 2.0,
            t_y: 0.75,
            t_h: 0.25,
            m_y: 0.75,
            m_h: 0.25,
            ..p1
        };
        Self::new(vec![p1, p2]).expect("table4 phases are admissible")
    }

    /// Iteration-count study: phase 1 has fixed hardening 0.1 while
    /// both hardening moduli of phase 2 sweep through `x`.
    pub fn table5(x: f64) -> Self {
        let p1 = PhaseParams {
            lambda: 1.0,
            mu: 1.0,
            kappa: 1.0,
            alpha: 0.0,
            beta: 0.05,
            gamma: 0.1,
            t_y: 0.5,
            t_h: 0.1,
            m_y: 0.5,
            m_h: 0.1,
            a1: 1.5,
            b1: 1.5,
        };
        let p2 = PhaseParams {
            beta: 0.5,
            gamma: 1.0,
            t_h: x,
            m_h: x,
            ..p1
        };
        Self::new(vec![p1, p2]).expect("table5 phases are admissible")
    }

    /// Code-verification composite: inner cube (phase ID 0) inside an
    /// outer shell (phase ID 1), yield high enough that roughly the
    /// second half of the load path is plastic.
    pub fn appendix_d_codeverif() -> Self {
        let p1 = PhaseParams {
            lambda: 1.0,
            mu: 1.0,
            kappa: 0.5,
            alpha: 0.0,
            beta: 0.5,
            gamma: 1.0,
            t_y: 4.0,
            t_h: 0.0,
            m_y: 4.0,
            m_h: 0.0,
            a1: 1.5,
            b1: 1.5,
        };
        let p2 = PhaseParams {
            lambda: 1.5,
            mu: 1.5,
            kappa: 0.75,
            beta: 0.25,
            gamma: 1.5,
            t_y: 4.5,
            m_y: 4.5,
            ..p1
        };
        Self::new(vec![p1, p2]).expect("code-verification phases are admissible")
    }

    /// Discretization-convergence composite: same elastic moduli as the
    /// code-verification pair but with low, perfectly plastic yields.
    pub fn appendix_d_convergence() -> Self {
        let base = Self::appendix_d_codeverif();
        let p1 = PhaseParams {
            t_y: 1.0,
            m_y: 1.0,
            ..base.phases[0]
        };
        let p2 = PhaseParams {
            t_y: 1.5,
            m_y: 1.5,
            ..base.phases[1]
        };
        Self::new(vec![p1, p2]).expect("convergence phases are admissible")
    }

    /// Looks a preset up by name, e.g. `"table1"` or
    /// `"appendixD.codeverif"`.  `table3` and `table5` take their
    /// parameters separately and default to `l_e = l_p = 1` and
    /// `x = 0.1` here.
    pub fn preset(name: &str) -> Result<Self, MaterialError> {
        match name {
            "table1" => Ok(Self::table1()),
            "table1.cauchy" => Ok(Self::table1_cauchy()),
            "table2" => Ok(Self::table2()),
            "table3" => Ok(Self::table3(1.0, 1.0)),
            "table4" => Ok(Self::table4()),
            "table5" => Ok(Self::table5(0.1)),
            "appendixD.codeverif" => Ok(Self::appendix_d_codeverif()),
            "appendixD.convergence" => Ok(Self::appendix_d_convergence()),
            other => Err(MaterialError::UnknownPreset(other.to_string())),
        }
    }

    /// Volume-averaged reference stiffness pair over a voxel phase map.
    pub fn average_stiffness(&self, phase_ids: &[u8]) -> Result<(Tensor4, Tensor4), MaterialError> {
        let mut a0 = Tensor4::zero();
        let mut b0 = Tensor4::zero();
        for &id in phase_ids {
            let (a, b) = self.phase(id)?.assemble_stiffness();
            a0 = a0 + a;
            b0 = b0 + b;
        }
        let w = 1.0 / phase_ids.len() as f64;
        Ok((a0.scale(w), b0.scale(w)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::Tensor2;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_tensor(rng: &mut impl Rng) -> Tensor2 {
        Tensor2::from_fn(|_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn table1_component_values() {
        let t = MaterialTable::table1();
        let (a, _b) = t.phases[0].assemble_stiffness();
        // A_1212 = μ + κ = 2, A_1221 = μ - κ = 0, A_1122 = λ = 1
        assert_abs_diff_eq!(a[(0, 1, 0, 1)], 2.0);
        assert_abs_diff_eq!(a[(0, 1, 1, 0)], 0.0);
        assert_abs_diff_eq!(a[(0, 0, 1, 1)], 1.0);
        assert_abs_diff_eq!(a[(0, 0, 0, 0)], 3.0); // λ + 2μ
    }

    #[test]
    fn couple_stress_uniaxial_curvature() {
        // Phase 1 of table1: γ_11 = 1 gives m_11 = α + β + γ = 1.
        let p = MaterialTable::table1().phases[0];
        let g = Tensor2::from_rows([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let (_, m) = p.elastic_stress(&Tensor2::ZERO, &g);
        assert_abs_diff_eq!(m[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn direct_form_matches_tensor_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for table in [
            MaterialTable::table1(),
            MaterialTable::table2(),
            MaterialTable::table3(0.5, 2.0),
            MaterialTable::appendix_d_codeverif(),
        ] {
            for p in &table.phases {
                let (a, b) = p.assemble_stiffness();
                for _ in 0..20 {
                    let e = random_tensor(&mut rng);
                    let g = random_tensor(&mut rng);
                    let (t, m) = p.elastic_stress(&e, &g);
                    let t_ref = a.contract(&e);
                    let m_ref = b.contract(&g);
                    for i in 0..9 {
                        assert_abs_diff_eq!(t.0[i], t_ref.0[i], epsilon = 1e-12);
                        assert_abs_diff_eq!(m.0[i], m_ref.0[i], epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn compliance_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in &MaterialTable::table4().phases {
            for _ in 0..50 {
                let e = random_tensor(&mut rng);
                let g = random_tensor(&mut rng);
                let (t, m) = p.elastic_stress(&e, &g);
                let e_back = p.elastic_strain_from_stress(&t);
                let g_back = p.elastic_curvature_from_couple(&m);
                for i in 0..9 {
                    assert_abs_diff_eq!(e_back.0[i], e.0[i], epsilon = 1e-12);
                    assert_abs_diff_eq!(g_back.0[i], g.0[i], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn strain_energy_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for table in [
            MaterialTable::table1(),
            MaterialTable::table1_cauchy(),
            MaterialTable::table2(),
            MaterialTable::table5(0.0),
        ] {
            for p in &table.phases {
                for _ in 0..200 {
                    let e = random_tensor(&mut rng);
                    let g = random_tensor(&mut rng);
                    if e.norm() + g.norm() < 1e-8 {
                        continue;
                    }
                    let (t, m) = p.elastic_stress(&e, &g);
                    let w = 0.5 * (t.frobenius(&e) + m.frobenius(&g));
                    assert!(w > 0.0, "w = {w} for {p:?}");
                }
            }
        }
    }

    #[test]
    fn inadmissible_moduli_rejected() {
        let mut p = MaterialTable::table1().phases[0];
        p.kappa = 0.0;
        assert!(matches!(p.validate(), Err(MaterialError::Inadmissible(_))));
        let mut p = MaterialTable::table1().phases[0];
        p.beta = 2.0; // γ - β = -1 violates the bound
        assert!(matches!(p.validate(), Err(MaterialError::Inadmissible(_))));
        let mut p = MaterialTable::table1().phases[0];
        p.mu = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn derived_shape_factors() {
        let p = MaterialTable::table1().phases[0];
        assert_abs_diff_eq!(p.a2(), 1.5); // a1 μ / κ with μ = κ
        assert_abs_diff_eq!(p.b2(), 1.5); // β = 0 ⇒ b2 = b1
        let p = MaterialTable::table2().phases[0];
        assert_abs_diff_eq!(p.b2(), 1.5 * 3.0 / 1.0); // (γ+β)/(γ-β) = 3
    }

    #[test]
    fn length_scales_round_trip() {
        let (l_e, l_p) = (0.25, 3.0);
        let t = MaterialTable::table3(l_e, l_p);
        for p in &t.phases {
            let (le, lp) = p.length_scales();
            assert_abs_diff_eq!(le, l_e, epsilon = 1e-12);
            assert_abs_diff_eq!(lp, l_p, epsilon = 1e-12);
        }
    }

    #[test]
    fn cauchy_limit_moduli() {
        let t = MaterialTable::table1_cauchy();
        assert_abs_diff_eq!(t.phases[0].kappa, 1e-4);
        assert_abs_diff_eq!(t.phases[0].gamma, 1e-4);
        assert_abs_diff_eq!(t.phases[0].m_y, 1000.0);
        assert!(t.phases[0].validate().is_ok());
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(matches!(
            MaterialTable::preset("table9"),
            Err(MaterialError::UnknownPreset(_))
        ));
    }

    #[test]
    fn average_stiffness_of_fifty_fifty_mix() {
        let t = MaterialTable::table1();
        let ids = [0u8, 1, 0, 1];
        let (a0, _) = t.average_stiffness(&ids).unwrap();
        // mean of A_1212: (2 + 4) / 2 = 3
        assert_abs_diff_eq!(a0[(0, 1, 0, 1)], 3.0);
    }
}
