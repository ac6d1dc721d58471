//! Two-level micropolar plasticity: yield functions, the closed-form
//! radial-return mapping, continuum tangents, and a brute-force
//! implicit backward-Euler oracle used for testing.
//!
//! The macro (force-stress) and micro (couple-stress) yield surfaces
//! are fully decoupled:
//!
//! ```text
//! f = t_eq - (t_Y + t_H p),   t_eq = sqrt(a1 s_(kl)s_(kl) + a2 s_[kl]s_[kl])
//! g = m_eq - (m_Y + m_H q),   m_eq = sqrt(b1 m_(kl)m_(kl) + b2 m_[kl]m_[kl])
//! ```
//!
//! with `s = deviator(t)` and the *full* couple stress `m`.  With
//! `a2 = a1 μ/κ`, `b2 = b1 (γ+β)/(γ-β)` and `α = 0` the backward-Euler
//! update has the closed form
//!
//! ```text
//! p = p⁽ⁿ⁾ 2a1μ/(t_H + 2a1μ) + (t_eq(trial) - t_Y)/(t_H + 2a1μ)
//! q = q⁽ⁿ⁾ b1(γ+β)/(m_H + b1(γ+β)) + (m_eq(trial) - m_Y)/(m_H + b1(γ+β))
//! ```
//!
//! followed by a radial rescaling of the sym/skew deviator parts.

use crate::material::{MaterialError, PhaseParams};
use crate::tensors::{Tensor2, Tensor4};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlasticityError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("closed-form return mapping requires α = 0, got α = {0}")]
    NonzeroAlpha(f64),
    #[error("implicit oracle root-finding failed to converge: {0}")]
    OracleDiverged(String),
}

/// Full mechanical state of one material point at an accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointState {
    /// Total micropolar strain.
    pub e: Tensor2,
    /// Total curvature (micro-rotation gradient).
    pub gamma: Tensor2,
    /// Force stress.
    pub t: Tensor2,
    /// Couple stress.
    pub m: Tensor2,
    /// Cumulative macro plastic strain.
    pub p: f64,
    /// Cumulative micro plastic strain.
    pub q: f64,
}

impl PointState {
    pub fn zero() -> Self {
        Self {
            e: Tensor2::ZERO,
            gamma: Tensor2::ZERO,
            t: Tensor2::ZERO,
            m: Tensor2::ZERO,
            p: 0.0,
            q: 0.0,
        }
    }
}

/// Elastic trial stresses for one strain increment.
#[derive(Clone, Copy, Debug)]
pub struct TrialState {
    pub t_trial: Tensor2,
    pub m_trial: Tensor2,
}

/// Elastic predictor: stresses assuming the whole increment is elastic.
pub fn trial_state(p: &PhaseParams, e_new: &Tensor2, g_new: &Tensor2, prev: &PointState) -> TrialState {
    let (dt, dm) = p.elastic_stress(&(*e_new - prev.e), &(*g_new - prev.gamma));
    TrialState {
        t_trial: prev.t + dt,
        m_trial: prev.m + dm,
    }
}

/// Equivalent stress `sqrt(a1 s_(kl)s_(kl) + a2 s_[kl]s_[kl])` of the
/// deviator `s = deviator(t)`.
pub fn equivalent_stress(p: &PhaseParams, t: &Tensor2) -> f64 {
    let s = t.deviator();
    let sym = s.sym();
    let skw = s.skew();
    (p.a1 * sym.frobenius(&sym) + p.a2() * skw.frobenius(&skw)).sqrt()
}

/// Equivalent couple stress over the *full* couple-stress tensor.
pub fn equivalent_couple_stress(p: &PhaseParams, m: &Tensor2) -> f64 {
    let sym = m.sym();
    let skw = m.skew();
    (p.b1 * sym.frobenius(&sym) + p.b2() * skw.frobenius(&skw)).sqrt()
}

/// Macro yield function `f = t_eq - (t_Y + t_H p)`.
pub fn yield_f(p: &PhaseParams, t: &Tensor2, pl: f64) -> f64 {
    equivalent_stress(p, t) - (p.t_y + p.t_h * pl)
}

/// Micro yield function `g = m_eq - (m_Y + m_H q)`.
pub fn yield_g(p: &PhaseParams, m: &Tensor2, q: f64) -> f64 {
    equivalent_couple_stress(p, m) - (p.m_y + p.m_h * q)
}

/// Macro flow direction `∂f/∂t = (a1 s_(kl) + a2 s_[kl]) / t_eq`.
pub fn flow_direction_macro(p: &PhaseParams, t: &Tensor2) -> Tensor2 {
    let s = t.deviator();
    let teq = equivalent_stress(p, t);
    assert!(teq > 0.0, "flow direction undefined at t_eq = 0");
    (s.sym() * p.a1 + s.skew() * p.a2()) * (1.0 / teq)
}

/// Micro flow direction `∂g/∂m = (b1 m_(kl) + b2 m_[kl]) / m_eq`.
pub fn flow_direction_micro(p: &PhaseParams, m: &Tensor2) -> Tensor2 {
    let meq = equivalent_couple_stress(p, m);
    assert!(meq > 0.0, "flow direction undefined at m_eq = 0");
    (m.sym() * p.b1 + m.skew() * p.b2()) * (1.0 / meq)
}

fn check_params(p: &PhaseParams) -> Result<(), PlasticityError> {
    p.validate()?;
    if p.alpha != 0.0 {
        return Err(PlasticityError::NonzeroAlpha(p.alpha));
    }
    Ok(())
}

/// Closed-form micropolar radial-return update.
///
/// `prev` is the accepted state of the previous time step; `e_new`,
/// `g_new` are the total strain and curvature of the current iterate.
/// The macro and micro updates are fully independent.
pub fn radial_return(
    p: &PhaseParams,
    e_new: &Tensor2,
    g_new: &Tensor2,
    prev: &PointState,
) -> Result<PointState, PlasticityError> {
    check_params(p)?;
    let trial = trial_state(p, e_new, g_new, prev);

    // Macro branch.
    let teq_tr = equivalent_stress(p, &trial.t_trial);
    let (t_new, p_new) = if teq_tr < p.t_y + p.t_h * prev.p {
        (trial.t_trial, prev.p)
    } else {
        let denom = p.t_h + 2.0 * p.a1 * p.mu;
        let pl = prev.p * 2.0 * p.a1 * p.mu / denom + (teq_tr - p.t_y) / denom;
        let radius = p.t_y + p.t_h * pl;
        let dp = pl - prev.p;
        let s_tr = trial.t_trial.deviator();
        let f_sym = radius / (radius + 2.0 * dp * p.a1 * p.mu);
        let f_skw = radius / (radius + 2.0 * dp * p.a2() * p.kappa);
        let hydro = trial.t_trial.trace() / 3.0;
        let t = Tensor2::identity() * hydro + s_tr.sym() * f_sym + s_tr.skew() * f_skw;
        (t, pl)
    };

    // Micro branch.
    let meq_tr = equivalent_couple_stress(p, &trial.m_trial);
    let (m_new, q_new) = if meq_tr < p.m_y + p.m_h * prev.q {
        (trial.m_trial, prev.q)
    } else {
        let bg = p.b1 * (p.gamma + p.beta);
        let denom = p.m_h + bg;
        let q = prev.q * bg / denom + (meq_tr - p.m_y) / denom;
        let radius = p.m_y + p.m_h * q;
        let dq = q - prev.q;
        let f_sym = radius / (radius + dq * p.b1 * (p.gamma + p.beta));
        let f_skw = radius / (radius + dq * p.b2() * (p.gamma - p.beta));
        let m = trial.m_trial.sym() * f_sym + trial.m_trial.skew() * f_skw;
        (m, q)
    };

    Ok(PointState {
        e: *e_new,
        gamma: *g_new,
        t: t_new,
        m: m_new,
        p: p_new,
        q: q_new,
    })
}

/// Safeguarded Newton iteration with a bisection fallback on a bracket
/// `[lo, hi]` with `r(lo) > 0 > r(hi)`.
fn safeguarded_newton(
    mut lo: f64,
    mut hi: f64,
    residual: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<f64, PlasticityError> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = residual(x);
        if r.abs() <= tol {
            return Ok(x);
        }
        if r > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // Newton step from a central-difference slope, clamped to the
        // bracket; fall back to bisection when it escapes.
        let h = 1e-7 * (hi - lo).max(1e-12);
        let slope = (residual(x + h) - residual(x - h)) / (2.0 * h);
        let newton = if slope != 0.0 { x - r / slope } else { f64::NAN };
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi.max(1.0) {
            return Ok(x);
        }
    }
    Err(PlasticityError::OracleDiverged(format!(
        "bracket [{lo}, {hi}] did not close"
    )))
}

/// Independent implicit backward-Euler solution of the return mapping.
///
/// Solves the discrete consistency conditions by scalar root-finding on
/// `Δp` and `Δq` without using the closed-form update; exists purely to
/// cross-check `radial_return`.
pub fn implicit_eb_oracle(
    p: &PhaseParams,
    e_new: &Tensor2,
    g_new: &Tensor2,
    prev: &PointState,
) -> Result<PointState, PlasticityError> {
    check_params(p)?;
    let trial = trial_state(p, e_new, g_new, prev);
    let (a1, a2) = (p.a1, p.a2());
    let (b1, b2) = (p.b1, p.b2());

    // Macro: the backward-Euler equations reduce to
    //   s_sym = s_sym_tr · T/(T + 2Δp a1 μ),  s_skw = s_skw_tr · T/(T + 2Δp a2 κ)
    // with T = t_Y + t_H (p⁽ⁿ⁾+Δp) enforced by consistency t_eq = T.
    let teq_tr = equivalent_stress(p, &trial.t_trial);
    let (t_new, p_new) = if teq_tr < p.t_y + p.t_h * prev.p {
        (trial.t_trial, prev.p)
    } else {
        let s_tr = trial.t_trial.deviator();
        let sym2 = {
            let s = s_tr.sym();
            s.frobenius(&s)
        };
        let skw2 = {
            let s = s_tr.skew();
            s.frobenius(&s)
        };
        let residual = |dp: f64| {
            let radius = p.t_y + p.t_h * (prev.p + dp);
            let fs = radius / (radius + 2.0 * dp * a1 * p.mu);
            let fk = radius / (radius + 2.0 * dp * a2 * p.kappa);
            a1 * sym2 * fs * fs + a2 * skw2 * fk * fk - radius * radius
        };
        let hi = teq_tr / (2.0 * a1 * p.mu);
        let dp = safeguarded_newton(0.0, hi, residual, 1e-15 * p.t_y * p.t_y)?;
        let radius = p.t_y + p.t_h * (prev.p + dp);
        let fs = radius / (radius + 2.0 * dp * a1 * p.mu);
        let fk = radius / (radius + 2.0 * dp * a2 * p.kappa);
        let hydro = trial.t_trial.trace() / 3.0;
        let t = Tensor2::identity() * hydro + s_tr.sym() * fs + s_tr.skew() * fk;
        (t, prev.p + dp)
    };

    // Micro: identical structure on the full couple stress.
    let meq_tr = equivalent_couple_stress(p, &trial.m_trial);
    let (m_new, q_new) = if meq_tr < p.m_y + p.m_h * prev.q {
        (trial.m_trial, prev.q)
    } else {
        let sym2 = {
            let s = trial.m_trial.sym();
            s.frobenius(&s)
        };
        let skw2 = {
            let s = trial.m_trial.skew();
            s.frobenius(&s)
        };
        let residual = |dq: f64| {
            let radius = p.m_y + p.m_h * (prev.q + dq);
            let fs = radius / (radius + dq * b1 * (p.gamma + p.beta));
            let fk = radius / (radius + dq * b2 * (p.gamma - p.beta));
            b1 * sym2 * fs * fs + b2 * skw2 * fk * fk - radius * radius
        };
        let hi = meq_tr / (b1 * (p.gamma + p.beta));
        let dq = safeguarded_newton(0.0, hi, residual, 1e-15 * p.m_y * p.m_y)?;
        let radius = p.m_y + p.m_h * (prev.q + dq);
        let fs = radius / (radius + dq * b1 * (p.gamma + p.beta));
        let fk = radius / (radius + dq * b2 * (p.gamma - p.beta));
        let m = trial.m_trial.sym() * fs + trial.m_trial.skew() * fk;
        (m, prev.q + dq)
    };

    Ok(PointState {
        e: *e_new,
        gamma: *g_new,
        t: t_new,
        m: m_new,
        p: p_new,
        q: q_new,
    })
}

/// Continuum elastoplastic tangent moduli `(A_ep, B_ep)` at a state
/// that satisfies `f ≤ 0`, `g ≤ 0`.
///
/// On the yield surface the moduli carry the rank-one correction
///
/// ```text
/// A_ep = A - (A:n)⊗(n:A) / (n:A:n + t_H),        n = ∂f/∂t
/// B_ep = B - (B:gᵀ)⊗(g:B) / (gᵀ:(B:g) + m_H),    g = ∂g/∂m
/// ```
///
/// where `B` contracts curvature on its last two indices (so the
/// micro flow increment enters transposed).
pub fn continuum_tangents(
    p: &PhaseParams,
    t: &Tensor2,
    m: &Tensor2,
    pl: f64,
    q: f64,
) -> (Tensor4, Tensor4) {
    let (a, b) = p.assemble_stiffness();
    let band_f = 1e-9 * p.t_y;
    let band_g = 1e-9 * p.m_y;

    let a_ep = if yield_f(p, t, pl) >= -band_f {
        let n = flow_direction_macro(p, t);
        let an = a.contract(&n);
        let denom = n.frobenius(&an) + p.t_h;
        a.clone() - Tensor4::outer(&an, &an).scale(1.0 / denom)
    } else {
        a
    };

    let b_ep = if yield_g(p, m, q) >= -band_g {
        let g = flow_direction_micro(p, m);
        let bg = b.contract(&g);
        let bgt = b.contract(&g.transpose());
        let denom = g.transpose().frobenius(&bg) + p.m_h;
        b.clone() - Tensor4::outer(&bgt, &bg).scale(1.0 / denom)
    } else {
        b
    };

    (a_ep, b_ep)
}

/// Discrete mechanical dissipation rate between two accepted states.
///
/// Plastic strain increments are reconstructed from the elastic
/// compliances; the result is `t:Δe^p/Δt + m_kl Δγ^p_lk/Δt - t_H p
/// Δp/Δt - m_H q Δq/Δt`, evaluated with end-of-step stresses.
pub fn dissipation_increment(p: &PhaseParams, prev: &PointState, next: &PointState, dt: f64) -> f64 {
    let de_el = p.elastic_strain_from_stress(&next.t) - p.elastic_strain_from_stress(&prev.t);
    let dg_el = p.elastic_curvature_from_couple(&next.m) - p.elastic_curvature_from_couple(&prev.m);
    let de_p = (next.e - prev.e) - de_el;
    let dg_p = (next.gamma - prev.gamma) - dg_el;
    let dp = next.p - prev.p;
    let dq = next.q - prev.q;
    (next.t.frobenius(&de_p) + next.m.frobenius(&dg_p.transpose())
        - p.t_h * next.p * dp
        - p.m_h * next.q * dq)
        / dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::MaterialTable;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn phase1() -> PhaseParams {
        MaterialTable::table1().phases[0]
    }

    fn e12(v: f64) -> Tensor2 {
        let mut e = Tensor2::ZERO;
        e[(0, 1)] = v;
        e
    }

    #[test]
    fn equivalent_stress_examples() {
        let p = phase1();
        // hydrostatic → 0
        let t = Tensor2::identity() * 5.0;
        assert_abs_diff_eq!(equivalent_stress(&p, &t), 0.0, epsilon = 1e-12);
        // t_12 = 2 only → sqrt(6) for a1 = a2 = 1.5
        let mut t = Tensor2::ZERO;
        t[(0, 1)] = 2.0;
        assert_abs_diff_eq!(equivalent_stress(&p, &t), 6.0f64.sqrt(), epsilon = 1e-12);
        // homogeneity
        assert_abs_diff_eq!(
            equivalent_stress(&p, &(t * 3.0)),
            3.0 * 6.0f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn equivalent_couple_stress_examples() {
        let p = phase1();
        assert_abs_diff_eq!(equivalent_couple_stress(&p, &Tensor2::ZERO), 0.0);
        let mut m = Tensor2::ZERO;
        m[(0, 0)] = 1.0;
        // full m, no deviator: sqrt(b1)
        assert_abs_diff_eq!(equivalent_couple_stress(&p, &m), 1.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn yield_function_examples() {
        let p = phase1();
        assert_abs_diff_eq!(yield_f(&p, &Tensor2::ZERO, 0.0), -0.5);
        let mut t = Tensor2::ZERO;
        t[(0, 1)] = 2.0;
        assert_abs_diff_eq!(yield_f(&p, &t, 0.0), 6.0f64.sqrt() - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn elastic_step_passes_trial_through() {
        let p = phase1();
        let next = radial_return(&p, &e12(0.1), &Tensor2::ZERO, &PointState::zero()).unwrap();
        // t_eq(trial) = 0.1 sqrt(6) ≈ 0.245 < 0.5
        assert_eq!(next.p, 0.0);
        assert_abs_diff_eq!(next.t[(0, 1)], 0.2, epsilon = 1e-12); // (μ+κ) e12
        assert_abs_diff_eq!(next.t[(1, 0)], 0.0, epsilon = 1e-12); // (μ-κ) e12
    }

    #[test]
    fn plastic_step_closed_form_value() {
        let p = phase1();
        let next = radial_return(&p, &e12(1.0), &Tensor2::ZERO, &PointState::zero()).unwrap();
        let expected = (6.0f64.sqrt() - 0.5) / (0.125 + 2.0 * 1.5 * 1.0);
        assert_abs_diff_eq!(next.p, expected, epsilon = 1e-12);
        // consistency: t_eq = t_Y + t_H p
        assert_abs_diff_eq!(
            equivalent_stress(&p, &next.t),
            p.t_y + p.t_h * next.p,
            epsilon = 1e-10 * p.t_y
        );
    }

    #[test]
    fn boundary_case_is_elastic_and_continuous() {
        let p = phase1();
        // pick e12 so that t_eq(trial) = t_Y exactly: e12 sqrt(6) = 0.5
        let e = e12(0.5 / 6.0f64.sqrt());
        let next = radial_return(&p, &e, &Tensor2::ZERO, &PointState::zero()).unwrap();
        assert_eq!(next.p, 0.0);
        // the closed-form multiplier also gives p = 0 there.
        let teq = equivalent_stress(&p, &next.t);
        assert_abs_diff_eq!((teq - p.t_y) / (p.t_h + 2.0 * p.a1 * p.mu), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn macro_micro_branches_decouple() {
        let p = MaterialTable::table2().phases[0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let e = Tensor2::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let g = Tensor2::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let with_g = radial_return(&p, &e, &g, &PointState::zero()).unwrap();
            let without_g = radial_return(&p, &e, &Tensor2::ZERO, &PointState::zero()).unwrap();
            assert_eq!(with_g.t, without_g.t);
            assert_eq!(with_g.p, without_g.p);
        }
    }

    #[test]
    fn trace_is_preserved() {
        let p = phase1();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let e = Tensor2::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let prev = PointState::zero();
            let trial = trial_state(&p, &e, &Tensor2::ZERO, &prev);
            let next = radial_return(&p, &e, &Tensor2::ZERO, &prev).unwrap();
            assert_abs_diff_eq!(next.t.trace(), trial.t_trial.trace(), epsilon = 1e-10);
        }
    }

    #[test]
    fn return_direction_collinear_with_trial() {
        let p = phase1();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let e = Tensor2::from_fn(|_, _| rng.gen_range(-3.0..3.0));
            let prev = PointState::zero();
            let trial = trial_state(&p, &e, &Tensor2::ZERO, &prev);
            let next = radial_return(&p, &e, &Tensor2::ZERO, &prev).unwrap();
            if next.p == 0.0 {
                continue;
            }
            let s_tr = trial.t_trial.deviator().sym();
            let s = next.t.deviator().sym();
            if s_tr.norm() < 1e-9 {
                continue;
            }
            // s = c · s_tr with 0 < c ≤ 1
            let c = s.frobenius(&s_tr) / s_tr.frobenius(&s_tr);
            assert!(c > 0.0 && c <= 1.0 + 1e-12, "c = {c}");
            assert_abs_diff_eq!((s - s_tr * c).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn kkt_conditions_hold() {
        let p = MaterialTable::table4().phases[1];
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut prev = PointState::zero();
        for _ in 0..200 {
            let e = prev.e + Tensor2::from_fn(|_, _| rng.gen_range(-0.3..0.3));
            let g = prev.gamma + Tensor2::from_fn(|_, _| rng.gen_range(-0.3..0.3));
            let next = radial_return(&p, &e, &g, &prev).unwrap();
            let dp = next.p - prev.p;
            let dq = next.q - prev.q;
            assert!(dp >= 0.0 && dq >= 0.0);
            let f = yield_f(&p, &next.t, next.p);
            let g_val = yield_g(&p, &next.m, next.q);
            assert!(f <= 1e-10 * p.t_y, "f = {f}");
            assert!(g_val <= 1e-10 * p.m_y, "g = {g_val}");
            assert!((dp * f).abs() <= 1e-10, "complementarity violated: {}", dp * f);
            assert!((dq * g_val).abs() <= 1e-10);
            prev = next;
        }
    }

    #[test]
    fn oracle_matches_closed_form_on_pinned_cases() {
        let p = phase1();
        for amp in [0.1, 1.0, 2.5] {
            let e = e12(amp);
            let a = radial_return(&p, &e, &Tensor2::ZERO, &PointState::zero()).unwrap();
            let b = implicit_eb_oracle(&p, &e, &Tensor2::ZERO, &PointState::zero()).unwrap();
            assert_abs_diff_eq!(a.p, b.p, epsilon = 1e-12);
            for i in 0..9 {
                assert_abs_diff_eq!(a.t.0[i], b.t.0[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn oracle_matches_closed_form_randomized() {
        let tables = [
            MaterialTable::table1(),
            MaterialTable::table2(),
            MaterialTable::table4(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut worst: f64 = 0.0;
        for _ in 0..2000 {
            let table = &tables[rng.gen_range(0..tables.len())];
            let p = table.phases[rng.gen_range(0..table.phases.len())];
            let mut prev = PointState::zero();
            for _ in 0..3 {
                let e = prev.e + Tensor2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                let g = prev.gamma + Tensor2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
                let a = radial_return(&p, &e, &g, &prev).unwrap();
                let b = implicit_eb_oracle(&p, &e, &g, &prev).unwrap();
                worst = worst
                    .max((a.p - b.p).abs())
                    .max((a.q - b.q).abs())
                    .max((a.t - b.t).max_abs())
                    .max((a.m - b.m).max_abs());
                prev = a;
            }
        }
        assert!(worst <= 1e-12, "max discrepancy {worst}");
    }

    #[test]
    fn nonzero_alpha_rejected() {
        let mut p = phase1();
        p.alpha = 0.1;
        let r = radial_return(&p, &e12(1.0), &Tensor2::ZERO, &PointState::zero());
        assert!(matches!(r, Err(PlasticityError::NonzeroAlpha(_))));
    }

    #[test]
    fn tangent_elastic_interior() {
        let p = phase1();
        let t = e12(0.01); // tiny stress, well inside the surface
        let (a_ep, _) = continuum_tangents(&p, &t, &Tensor2::ZERO, 0.0, 0.0);
        let (a, _) = p.assemble_stiffness();
        assert_eq!(a_ep, a);
    }

    #[test]
    fn tangent_softens_along_flow_direction() {
        let p = phase1();
        let next = radial_return(&p, &e12(1.0), &Tensor2::ZERO, &PointState::zero()).unwrap();
        let (a_ep, _) = continuum_tangents(&p, &next.t, &next.m, next.p, next.q);
        let (a, _) = p.assemble_stiffness();
        let n = flow_direction_macro(&p, &next.t);
        let full = n.frobenius(&a.contract(&n));
        let reduced = n.frobenius(&a_ep.contract(&n));
        assert!(reduced < full, "{reduced} !< {full}");
        assert!(reduced >= 0.0);
    }

    #[test]
    fn tangent_matches_finite_difference_secant() {
        let p = phase1();
        let prev = radial_return(&p, &e12(1.0), &Tensor2::ZERO, &PointState::zero()).unwrap();
        let (a_ep, _) = continuum_tangents(&p, &prev.t, &prev.m, prev.p, prev.q);
        // continue loading in the same direction
        let h = 1e-6;
        let de = e12(h);
        let next = radial_return(&p, &(prev.e + de), &Tensor2::ZERO, &prev).unwrap();
        let dt_fd = next.t - prev.t;
        let dt_tan = a_ep.contract(&de);
        for i in 0..9 {
            assert_abs_diff_eq!(dt_tan.0[i], dt_fd.0[i], epsilon = 1e-3 * h.max(dt_fd.max_abs()));
        }
    }

    #[test]
    fn micro_tangent_matches_finite_difference_secant() {
        let p = MaterialTable::table2().phases[0];
        let mut g0 = Tensor2::ZERO;
        g0[(2, 1)] = 0.5;
        g0[(1, 2)] = -0.2;
        let prev = radial_return(&p, &Tensor2::ZERO, &g0, &PointState::zero()).unwrap();
        assert!(prev.q > 0.0);
        let (_, b_ep) = continuum_tangents(&p, &prev.t, &prev.m, prev.p, prev.q);
        let h = 1e-6;
        let dg = g0 * (h / g0.norm());
        let next = radial_return(&p, &Tensor2::ZERO, &(g0 + dg), &prev).unwrap();
        let dm_fd = next.m - prev.m;
        let dm_tan = b_ep.contract(&dg);
        for i in 0..9 {
            assert_abs_diff_eq!(dm_tan.0[i], dm_fd.0[i], epsilon = 1e-3 * h.max(dm_fd.max_abs()));
        }
    }

    #[test]
    fn dissipation_zero_for_elastic_step() {
        let p = phase1();
        let prev = PointState::zero();
        let next = radial_return(&p, &e12(0.1), &Tensor2::ZERO, &prev).unwrap();
        assert_abs_diff_eq!(dissipation_increment(&p, &prev, &next, 0.01), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn dissipation_positive_for_plastic_step() {
        let p = phase1();
        let prev = PointState::zero();
        let next = radial_return(&p, &e12(1.0), &Tensor2::ZERO, &prev).unwrap();
        let d = dissipation_increment(&p, &prev, &next, 0.01);
        assert!(d > 0.0);
        // exact discrete identity: d·Δt = t_Y Δp + m_Y Δq
        assert_abs_diff_eq!(d * 0.01, p.t_y * next.p, epsilon = 1e-10);
    }

    #[test]
    fn dissipation_nonnegative_randomized() {
        let p = MaterialTable::table4().phases[0];
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut prev = PointState::zero();
        for _ in 0..500 {
            let e = prev.e + Tensor2::from_fn(|_, _| rng.gen_range(-0.5..0.5));
            let g = prev.gamma + Tensor2::from_fn(|_, _| rng.gen_range(-0.5..0.5));
            let next = radial_return(&p, &e, &g, &prev).unwrap();
            let d = dissipation_increment(&p, &prev, &next, 0.01);
            assert!(d >= -1e-10, "d = {d}");
            prev = next;
        }
    }
}
