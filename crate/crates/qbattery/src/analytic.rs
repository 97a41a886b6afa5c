//! Closed-form charging dynamics at the one-way operating point.
//!
//! When both reduced detunings vanish and the backward coupling is nulled,
//! the driven charger obeys a scalar linear ODE and feeds the battery
//! through a one-way channel, so every moment has an explicit solution.
//! The textbook way to write the battery occupation is a sum of decaying
//! exponentials weighted by coefficients A₁..A₄ with denominators Λ_a−Λ_b;
//! those coefficients blow up for equal rates even though the occupation
//! itself is perfectly smooth there. This module therefore evaluates the
//! solutions through the kernel
//!
//!   φ₁(h) = (1 − e^(−h))/h,   φ₁(0) = 1,
//!
//! which is finite for all rate pairs; [`coefficients`] still exposes the
//! raw A's (with degeneracy flags) because downstream tooling expects them.

use num_complex::Complex;

use crate::dynamics;
use crate::error::{ConditionResiduals, Error, Result};
use crate::model::EffectiveParams;
use crate::scalar::Real;
use crate::tol;

/// Exponential weights for the battery occupation written as a sum of
/// decaying terms. Singular where the denominators Λ_a−Λ_b vanish; the
/// flags report proximity to those points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCoefficients<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub a4: T,
    pub lambda_a: T,
    pub lambda_b: T,
    /// Λ_b within [`tol::RATE_DEGENERACY`] of Λ_a: a2, a3, a4 are unreliable.
    pub rate_degenerate: bool,
    /// Λ_b within tolerance of Λ_a/2. The A's stay finite here; the flag
    /// marks the point because the exponent Λ_b − Λ_a/2 crosses zero and
    /// sum-of-exponential fits against these weights become ill-conditioned.
    pub half_rate_degenerate: bool,
}

/// Raw exponential weights for decay rates Λ_a, Λ_b (both must be positive).
///
/// Exact identities, useful as checks: A₁ = 1/Λ_b, A₁+A₂+A₃ = 0, and
/// A₁+A₂+A₃+A₄ = A₄.
pub fn coefficients<T: Real>(lambda_a: T, lambda_b: T) -> Result<AnalyticCoefficients<T>> {
    for (name, value) in [("lambda_a", lambda_a), ("lambda_b", lambda_b)] {
        if !(value > T::zero()) {
            return Err(Error::NonpositiveRate {
                name,
                value: value.as_f64(),
            });
        }
    }
    let scale = lambda_a.max(lambda_b);
    let d = lambda_a - lambda_b;
    let half = T::of(0.5);
    let a1 = T::one() / lambda_b;
    let a2 = (lambda_b * T::of(2.0) - lambda_a) / (lambda_b * d);
    let a3 = -T::one() / d;
    let a4 = -lambda_a / (lambda_b * d);
    Ok(AnalyticCoefficients {
        a1,
        a2,
        a3,
        a4,
        lambda_a,
        lambda_b,
        rate_degenerate: d.abs() <= T::of(tol::RATE_DEGENERACY) * scale,
        half_rate_degenerate: (lambda_b - lambda_a * half).abs()
            <= T::of(tol::RATE_DEGENERACY) * scale,
    })
}

/// All first and second moments at time `t` under the closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormMoments<T> {
    pub amp_a: Complex<T>,
    pub amp_b: Complex<T>,
    pub n_aa: T,
    pub n_bb: T,
    pub n_ab: Complex<T>,
    pub e_a: T,
    pub e_b: T,
    pub eta: T,
}

/// Steady energies; `closed_form` records which branch produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyEnergies<T> {
    pub e_a: T,
    pub e_b: T,
    pub eta: T,
    /// True when the one-way resonant formulas applied; false when the
    /// values came from the general linear steady-state solve.
    pub closed_form: bool,
}

/// φ₁(h) = (1 − e^(−h))/h, the finite kernel behind the equal-rate limit.
fn phi1<T: Real>(h: T) -> T {
    if h == T::zero() {
        T::one()
    } else {
        -(-h).exp_m1() / h
    }
}

/// Shared time kernel: S(t) with S(0) = 0, S(∞) = 1/Λ_b, plus the decay
/// factors. The battery amplitude is proportional to S.
fn s_kernel<T: Real>(t: T, lambda_a: T, lambda_b: T) -> (T, T, T) {
    let half = T::of(0.5);
    let u = (-lambda_a * half * t).exp();
    let w = (-lambda_b * half * t).exp();
    let one_minus_w = -(-lambda_b * half * t).exp_m1();
    let h = (lambda_b - lambda_a) * half * t;
    // u·φ₁(h) without overflow: for |h| ≥ 1 the direct difference quotient
    // (u − w)/h has no cancellation and avoids e^(−h) blowing up.
    let u_phi = if h.abs() < T::one() {
        u * phi1(h)
    } else {
        (u - w) / h
    };
    let s = one_minus_w / lambda_b - half * t * u_phi;
    (s, u, one_minus_w)
}

fn check_rates<T: Real>(eff: &EffectiveParams<T>) -> Result<()> {
    for (name, value) in [("lambda_a", eff.lambda_a), ("lambda_b", eff.lambda_b)] {
        if !(value > T::zero()) {
            return Err(Error::NonpositiveRate {
                name,
                value: value.as_f64(),
            });
        }
    }
    Ok(())
}

/// Residuals of the three closed-form preconditions: reduced detunings zero
/// and backward coupling nulled.
pub fn closed_form_residuals<T: Real>(eff: &EffectiveParams<T>) -> ConditionResiduals {
    ConditionResiduals {
        detuning_a: eff.delta_a_p.abs().as_f64(),
        detuning_b: eff.delta_b_p.abs().as_f64(),
        backward_coupling: eff.coupling_amplitudes().backward.norm().as_f64(),
    }
}

fn check_conditions<T: Real>(eff: &EffectiveParams<T>) -> Result<()> {
    check_rates(eff)?;
    let res = closed_form_residuals(eff);
    let worst = res
        .detuning_a
        .max(res.detuning_b)
        .max(res.backward_coupling);
    if worst > tol::CLOSED_FORM_CONDITIONS {
        return Err(Error::ConditionsNotMet(res));
    }
    Ok(())
}

/// Closed-form moments of the vacuum-start charge cycle at time `t`.
///
/// Requires the one-way resonant conditions; fails with the measured
/// residuals otherwise so callers can report how far off they are.
pub fn closed_form_moments<T: Real>(
    t: T,
    eff: &EffectiveParams<T>,
) -> Result<ClosedFormMoments<T>> {
    check_conditions(eff)?;
    if t < T::zero() {
        return Err(Error::InvalidParam {
            name: "t",
            message: format!("time must be nonnegative, got {t}"),
        });
    }
    let i = Complex::new(T::zero(), T::one());
    let (la, lb) = (eff.lambda_a, eff.lambda_b);
    let (s, _u, one_minus_u_a) = {
        // 1 − u computed with expm1 for small t.
        let half = T::of(0.5);
        let (s, u, _) = s_kernel(t, la, lb);
        (s, u, -(-la * half * t).exp_m1())
    };
    let gamma = eff.gamma_diss;
    let eps = eff.epsilon;
    let phase = Complex::from_polar(T::one(), eff.phi);

    let amp_a = -i * (T::of(2.0) * eps / la) * one_minus_u_a;
    let amp_b = i * phase * (T::of(4.0) * eps * gamma / la) * s;
    let n_aa = T::of(4.0) * eps * eps / (la * la) * one_minus_u_a * one_minus_u_a;
    let k = T::of(4.0) * eps * gamma / la;
    let n_bb = k * k * s * s;
    let n_ab = -phase * (T::of(8.0) * eps * eps * gamma / (la * la)) * one_minus_u_a * s;

    let e_a = eff.omega_a * n_aa;
    let e_b = eff.omega_b * n_bb;
    let total = e_a + e_b;
    let eta = if total.abs() < T::of(tol::RATIO_FLOOR) {
        T::zero()
    } else {
        e_b / total
    };
    Ok(ClosedFormMoments {
        amp_a,
        amp_b,
        n_aa,
        n_bb,
        n_ab,
        e_a,
        e_b,
        eta,
    })
}

/// Instantaneous charging power dE_B/dt in closed form. Zero at t = 0 and
/// as t → ∞.
pub fn power_analytic<T: Real>(t: T, eff: &EffectiveParams<T>) -> Result<T> {
    check_conditions(eff)?;
    if t < T::zero() {
        return Err(Error::InvalidParam {
            name: "t",
            message: format!("time must be nonnegative, got {t}"),
        });
    }
    let (la, lb) = (eff.lambda_a, eff.lambda_b);
    let (s, _u, _) = s_kernel(t, la, lb);
    let half = T::of(0.5);
    let one_minus_u = -(-la * half * t).exp_m1();
    let k = T::of(4.0) * eff.epsilon * eff.gamma_diss / la;
    // dS/dt = [(1 − u) − Λ_b S]/2, so d(S²)/dt = S[(1 − u) − Λ_b S].
    Ok(eff.omega_b * k * k * s * (one_minus_u - lb * s))
}

/// Steady energies. Uses the one-way resonant formulas when they apply,
/// otherwise the general linear solve (with its stability check).
pub fn steady_energies<T: Real>(eff: &EffectiveParams<T>) -> Result<SteadyEnergies<T>> {
    if check_conditions(eff).is_ok() {
        let (la, lb) = (eff.lambda_a, eff.lambda_b);
        let eps = eff.epsilon;
        let gamma = eff.gamma_diss;
        let e_a = eff.omega_a * T::of(4.0) * eps * eps / (la * la);
        let k = T::of(4.0) * eps * gamma / (la * lb);
        let e_b = eff.omega_b * k * k;
        let total = e_a + e_b;
        let eta = if total.abs() < T::of(tol::RATIO_FLOOR) {
            T::zero()
        } else {
            e_b / total
        };
        Ok(SteadyEnergies {
            e_a,
            e_b,
            eta,
            closed_form: true,
        })
    } else {
        let s = dynamics::steady_state(eff)?;
        Ok(SteadyEnergies {
            e_a: s.e_a,
            e_b: s.e_b,
            eta: s.eta,
            closed_form: false,
        })
    }
}

/// Driven charger amplitude for arbitrary reduced detuning Δ′_a, valid
/// whenever the backward coupling is nulled (the charger then never sees
/// the battery): ⟨a⟩(t) = −iε(1 − e^(−σt))/σ with σ = iΔ′_a + Λ_a/2.
pub fn charger_amp<T: Real>(t: T, eff: &EffectiveParams<T>) -> Complex<T> {
    let i = Complex::new(T::zero(), T::one());
    let sigma = Complex::new(eff.lambda_a * T::of(0.5), eff.delta_a_p);
    let drive = -i * eff.epsilon;
    if (sigma.norm() * t).abs() < T::of(1e-8) {
        // σ → 0 limit: linear growth −iεt, next order −iεt·(1 − σt/2).
        drive * t * (Complex::new(T::one(), T::zero()) - sigma * t * T::of(0.5))
    } else {
        drive * (Complex::new(T::one(), T::zero()) - (-sigma * t).exp()) / sigma
    }
}

/// Charger occupation |⟨a⟩|² for arbitrary reduced detuning.
pub fn charger_occupation<T: Real>(t: T, eff: &EffectiveParams<T>) -> T {
    charger_amp(t, eff).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, Grid, IntegrationOptions, MomentModel, MomentState};
    use crate::model::SystemParams;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn baseline_eff() -> EffectiveParams<f64> {
        SystemParams::baseline().reduce_to_effective().unwrap()
    }

    #[test]
    fn coefficient_values_at_reference_rates() {
        let c = coefficients(0.043_f64, 0.07).unwrap();
        assert_relative_eq!(c.a1, 14.285714285714286, max_relative = 1e-14);
        assert_relative_eq!(c.a2, -51.32275132275133, max_relative = 1e-13);
        assert_relative_eq!(c.a3, 37.03703703703704, max_relative = 1e-13);
        assert_relative_eq!(c.a4, 22.751322751322753, max_relative = 1e-13);
        assert!(!c.rate_degenerate);
        assert!(!c.half_rate_degenerate);
    }

    #[test]
    fn coefficient_identities() {
        // A₁ = 1/Λ_b, A₁+A₂+A₃ = 0, and the total sum collapses to A₄.
        let pairs = [
            (0.043, 0.07),
            (0.1, 0.0031),
            (2.5, 0.4),
            (1e-3, 1e-1),
            (7.0, 3.4999),
        ];
        for (la, lb) in pairs {
            let c = coefficients(la, lb).unwrap();
            assert_relative_eq!(c.a1, 1.0 / lb, max_relative = 1e-14);
            assert_abs_diff_eq!(c.a1 + c.a2 + c.a3, 0.0, epsilon = 1e-10 * f64::abs(c.a3));
            assert_relative_eq!(c.a1 + c.a2 + c.a3 + c.a4, c.a4, max_relative = 1e-9);
        }
    }

    #[test]
    fn coefficient_degeneracy_flags() {
        assert!(coefficients(0.05_f64, 0.05 + 1e-9).unwrap().rate_degenerate);
        assert!(coefficients(0.08_f64, 0.04).unwrap().half_rate_degenerate);
        assert!(matches!(
            coefficients(0.0_f64, 0.1),
            Err(Error::NonpositiveRate {
                name: "lambda_a",
                ..
            })
        ));
    }

    /// The raw sum-of-exponentials expressions, written out with A₁..A₄
    /// exactly as they are normally quoted, must agree with the kernel
    /// evaluation away from the degenerate rates.
    #[test]
    fn kernel_matches_raw_exponential_sums() {
        let eff = baseline_eff().with_r(10.0).unwrap(); // Λ_b = 0.07
        let (la, lb) = (eff.lambda_a, eff.lambda_b);
        let c = coefficients(la, lb).unwrap();
        let eps = eff.epsilon;
        let gamma = eff.gamma_diss;
        let pref_bb = 16.0 * eps * eps * gamma * gamma / (la * la);
        let pref_ab = 8.0 * eps * eps * gamma / (la * la);
        let sum_a = c.a1 + c.a2 + c.a3 + c.a4;
        for &t in &[0.5, 3.0, 17.0, 60.0, 240.0] {
            let m = closed_form_moments(t, &eff).unwrap();
            let e = |x: f64| (-x).exp();
            let bb_groups = [
                c.a1 / lb * (1.0 - e(lb * t)),
                c.a2 / (lb - la / 2.0) * (e(la * t / 2.0) - e(lb * t)),
                c.a3 / (lb - la) * (e(la * t) - e(lb * t)),
                2.0 * c.a4 / lb * (e(lb * t / 2.0) - e(lb * t)),
                -2.0 * sum_a / (lb - la) * (e((la + lb) * t / 2.0) - e(lb * t)),
            ];
            let raw_bb = pref_bb * bb_groups.iter().sum::<f64>();
            let cross = e((la + lb) * t / 2.0);
            let ab_groups = [
                c.a1 * (1.0 - cross),
                c.a2 * (e(la * t / 2.0) - cross),
                c.a3 * (e(la * t) - cross),
                c.a4 * (e(lb * t / 2.0) - cross),
            ];
            let raw_ab =
                -(Complex::from_polar(1.0, eff.phi)) * pref_ab * ab_groups.iter().sum::<f64>();
            // The raw sums cancel heavily at small t (that is what the
            // kernel form is for), so compare at the cancellation scale.
            let bb_scale = pref_bb * bb_groups.iter().map(|g| g.abs()).sum::<f64>();
            let ab_scale = pref_ab * ab_groups.iter().map(|g| g.abs()).sum::<f64>();
            assert_abs_diff_eq!(m.n_bb, raw_bb, epsilon = 1e-13 * bb_scale);
            assert_abs_diff_eq!(m.n_ab.re, raw_ab.re, epsilon = 1e-13 * ab_scale);
            assert_abs_diff_eq!(m.n_ab.im, raw_ab.im, epsilon = 1e-13 * ab_scale);
        }
    }

    #[test]
    fn moments_match_integration_baseline() {
        closed_forms_match_ode(&baseline_eff(), 1e-6);
    }

    #[test]
    fn moments_match_integration_asymmetric_rates() {
        closed_forms_match_ode(&baseline_eff().with_r(10.0).unwrap(), 1e-6);
    }

    fn closed_forms_match_ode(eff: &EffectiveParams<f64>, rtol: f64) {
        let model = MomentModel::from_effective(eff);
        let grid = Grid::Uniform {
            t_end: 200.0,
            samples: 81,
        };
        let traj = integrate(
            &model,
            &MomentState::vacuum(2),
            &grid,
            &IntegrationOptions::default(),
        )
        .unwrap();
        let scale_b = traj.e_b.iter().cloned().fold(0.0, f64::max);
        for (k, &t) in traj.times.iter().enumerate() {
            let m = closed_form_moments(t, eff).unwrap();
            assert_abs_diff_eq!(m.e_b, traj.e_b[k], epsilon = rtol * scale_b);
            assert_abs_diff_eq!(
                (m.amp_a - traj.states[k].amp(0)).norm(),
                0.0,
                epsilon = rtol * 10.0
            );
            assert_abs_diff_eq!(
                (m.amp_b - traj.states[k].amp(1)).norm(),
                0.0,
                epsilon = rtol * 10.0
            );
            assert_abs_diff_eq!(
                (m.n_ab - traj.states[k].cross(0, 1)).norm(),
                0.0,
                epsilon = rtol * scale_b
            );
        }
    }

    #[test]
    fn equal_rate_limit_is_continuous() {
        // κ_b = κ_a makes Λ_b = Λ_a exactly; nearby rate ratios must give
        // nearby occupations (the raw A's blow up here, the kernel doesn't).
        let center = baseline_eff(); // r = 1: equal rates
        assert_eq!(center.lambda_a, center.lambda_b);
        let t = 80.0;
        let mid = closed_form_moments(t, &center).unwrap().n_bb;
        assert!(mid.is_finite());
        for sign in [-1.0, 1.0] {
            let r = 1.0 + sign * 1e-9;
            let near = closed_form_moments(t, &center.with_r(r).unwrap())
                .unwrap()
                .n_bb;
            assert_relative_eq!(near, mid, max_relative = 1e-6);
        }
    }

    #[test]
    fn conditions_gate_the_closed_forms() {
        let detuned = baseline_eff().with_delta_b_p(0.02);
        match closed_form_moments(1.0, &detuned) {
            Err(Error::ConditionsNotMet(res)) => {
                assert_abs_diff_eq!(res.detuning_b, 0.02, epsilon = 1e-15);
                assert!(res.detuning_a < 1e-12);
            }
            other => panic!("expected ConditionsNotMet, got {other:?}"),
        }
        // A generic phase leaves backward coupling on.
        let reciprocal = baseline_eff().with_phase(std::f64::consts::FRAC_PI_4);
        assert!(matches!(
            power_analytic(1.0, &reciprocal),
            Err(Error::ConditionsNotMet(_))
        ));
        assert!(closed_form_moments(-1.0, &baseline_eff()).is_err());
    }

    #[test]
    fn steady_energies_baseline() {
        let s = steady_energies(&baseline_eff()).unwrap();
        assert!(s.closed_form);
        assert_relative_eq!(s.e_a, 21.633315, max_relative = 1e-6);
        assert_relative_eq!(s.e_b, 74.880036, max_relative = 1e-6);
        assert_relative_eq!(s.eta, 0.775852, max_relative = 1e-5);
        // The familiar two-term way of writing E_B agrees with the product
        // form used in the code.
        let eff = baseline_eff();
        let (la, lb) = (eff.lambda_a, eff.lambda_b);
        let num = 16.0 * eff.epsilon.powi(2) * eff.gamma_diss.powi(2);
        let two_term = num / (la * la * lb * (la + lb)) + num / (la * lb * lb * (la + lb));
        assert_relative_eq!(s.e_b, two_term, max_relative = 1e-13);
    }

    #[test]
    fn steady_energies_general_branch() {
        let detuned = baseline_eff().with_delta_b_p(0.1);
        let s = steady_energies(&detuned).unwrap();
        assert!(!s.closed_form);
        assert_relative_eq!(s.e_b, 3.3084, max_relative = 1e-3);
        // Battery detuning suppression: E_B/E_A = Γ²/(Δ² + Λ_b²/4).
        let gamma = detuned.gamma_diss;
        let expect = gamma * gamma / (0.1f64.powi(2) + detuned.lambda_b.powi(2) / 4.0);
        assert_relative_eq!(s.e_b / s.e_a, expect, max_relative = 1e-12);
    }

    #[test]
    fn power_matches_derivative_of_energy() {
        let eff = baseline_eff().with_r(3.0).unwrap();
        let h = 1e-4;
        for &t in &[0.5, 10.0, 50.0, 150.0] {
            let plus = closed_form_moments(t + h, &eff).unwrap().e_b;
            let minus = closed_form_moments(t - h, &eff).unwrap().e_b;
            let fd = (plus - minus) / (2.0 * h);
            let p = power_analytic(t, &eff).unwrap();
            assert_abs_diff_eq!(p, fd, epsilon = 1e-7);
        }
        assert_eq!(power_analytic(0.0, &eff).unwrap(), 0.0);
    }

    #[test]
    fn power_peak_baseline() {
        // The baseline charge cycle peaks near two coupling periods.
        let eff = baseline_eff();
        let p100 = power_analytic(100.0, &eff).unwrap();
        assert_relative_eq!(p100, 0.5105, max_relative = 2e-3);
        let grid: Vec<f64> = (0..=500).map(|k| k as f64).collect();
        let max = grid
            .iter()
            .map(|&t| power_analytic(t, &eff).unwrap())
            .fold(0.0, f64::max);
        assert!(max >= p100 && max < 0.6, "max power {max}");
    }

    #[test]
    fn detuned_charger_matches_integration() {
        let eff = baseline_eff().with_delta_a_p(0.25);
        let model = MomentModel::from_effective(&eff);
        let grid = Grid::Uniform {
            t_end: 120.0,
            samples: 41,
        };
        let traj = integrate(
            &model,
            &MomentState::vacuum(2),
            &grid,
            &IntegrationOptions::default(),
        )
        .unwrap();
        for (k, &t) in traj.times.iter().enumerate() {
            let amp = charger_amp(t, &eff);
            assert_abs_diff_eq!((amp - traj.states[k].amp(0)).norm(), 0.0, epsilon = 1e-7);
            assert_abs_diff_eq!(
                charger_occupation(t, &eff),
                traj.states[k].occupation(0),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn charger_amp_small_sigma_limit() {
        // With no decay and no detuning the amplitude grows linearly.
        let eff = EffectiveParams::resonant_nonreciprocal(1.0, 0.0, 0.0, 0.1)
            .unwrap()
            .with_gamma(0.0)
            .unwrap()
            .with_j(0.0);
        let amp = charger_amp(2.0, &eff);
        assert_abs_diff_eq!((amp - Complex::new(0.0, -0.2)).norm(), 0.0, epsilon = 1e-12);
    }
}
