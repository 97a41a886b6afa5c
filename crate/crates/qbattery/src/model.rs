//! Physical parameters and the reduction from three modes to two.
//!
//! [`SystemParams`] describes the full device: driven charger `a`, battery
//! `b`, and the strongly damped auxiliary cavity `c` that both couple to.
//! Integrating out the fast cavity (projection onto the `{a, b}` subspace,
//! with γ = γ_m/2) yields [`EffectiveParams`]: shifted detunings Δ′, induced
//! decays Γ_a, Γ_b, a coherent induced coupling G, a dissipative coupling Γ,
//! and the combined couplings J± = J − G·e^(±iφ).
//!
//! The backward influence of the battery on the charger carries amplitude
//! −iJ₋ − (Γ/2)e^(−iφ). Choosing J and φ so that J₋ = i(Γ/2)e^(−iφ) makes it
//! vanish exactly: energy then flows one way, charger → battery.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tol;

/// Full three-mode parameters. All rates are in units of a reference ω;
/// `omega_a`, `omega_b` only enter the energy bookkeeping E = ω⟨x†x⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams<T> {
    /// Detuning ω_a − ω_L of the charger from the drive.
    pub delta_a: T,
    /// Detuning of the battery.
    pub delta_b: T,
    /// Detuning of the auxiliary cavity.
    pub delta_c: T,
    /// Charger–cavity coupling rate (≥ 0; the phase lives in `phi`).
    pub g_a: T,
    /// Battery–cavity coupling rate (≥ 0).
    pub g_b: T,
    /// Direct charger–battery coupling.
    pub j: T,
    /// Phase of the charger–cavity coupling, stored in [0, 2π).
    pub phi: T,
    /// Coherent drive amplitude on the charger (≥ 0).
    pub epsilon: T,
    /// Charger local decay rate (≥ 0).
    pub kappa_a: T,
    /// Battery local decay rate (≥ 0).
    pub kappa_b: T,
    /// Auxiliary-cavity decay rate (> 0; the fast scale).
    pub gamma_m: T,
    /// Charger frequency for energy bookkeeping.
    pub omega_a: T,
    /// Battery frequency for energy bookkeeping.
    pub omega_b: T,
}

/// Reduced two-mode parameters produced by [`SystemParams::reduce_to_effective`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams<T> {
    /// Shifted charger detuning Δ′_a = Δ_a − g_a²Δ_c/(Δ_c²+γ²).
    pub delta_a_p: T,
    /// Shifted battery detuning Δ′_b.
    pub delta_b_p: T,
    /// Cavity-induced charger decay Γ_a = g_a²γ/(Δ_c²+γ²).
    pub gamma_a_eff: T,
    /// Cavity-induced battery decay Γ_b.
    pub gamma_b_eff: T,
    /// Coherent induced coupling G = g_a g_b Δ_c/(Δ_c²+γ²).
    pub g_coh: T,
    /// Dissipative coupling Γ = γ g_a g_b/(Δ_c²+γ²); satisfies Γ² = Γ_a·Γ_b.
    pub gamma_diss: T,
    /// Direct coupling J before the induced part is folded in.
    pub j_direct: T,
    /// J₊ = J − G·e^(+iφ).
    pub j_plus: Complex<T>,
    /// J₋ = J − G·e^(−iφ) = conj(J₊).
    pub j_minus: Complex<T>,
    /// Total charger decay Λ_a = Γ_a + κ_a.
    pub lambda_a: T,
    /// Total battery decay Λ_b = Γ_b + κ_b.
    pub lambda_b: T,
    /// Coupling phase, carried through.
    pub phi: T,
    /// Drive amplitude, carried through.
    pub epsilon: T,
    /// Charger local decay, kept so Λ_a can be rebuilt by modifiers.
    pub kappa_a: T,
    /// Battery local decay.
    pub kappa_b: T,
    /// Charger frequency for energy bookkeeping.
    pub omega_a: T,
    /// Battery frequency for energy bookkeeping.
    pub omega_b: T,
}

/// Forward/backward coupling amplitudes seen by the first moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingAmplitudes<T> {
    /// Coefficient of ⟨a⟩ in d⟨b⟩/dt: −iJ₊ − (Γ/2)e^(+iφ).
    pub forward: Complex<T>,
    /// Coefficient of ⟨b⟩ in d⟨a⟩/dt: −iJ₋ − (Γ/2)e^(−iφ).
    pub backward: Complex<T>,
    /// |backward|/|forward|; 0 when both vanish, ∞ when only forward does.
    pub isolation: T,
}

/// Timescale-separation report. Advisory only: a failing margin means the
/// two-mode reduction is questionable, not that computation must stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport<T> {
    /// γ_m / max(κ_a, κ_b); ∞ when both local decays vanish.
    pub loss_margin: T,
    /// |Δ_c − iγ_m/2| / max(g_a, g_b); ∞ when both couplings vanish.
    pub coupling_margin: T,
    /// Threshold the loss margin was tested against.
    pub loss_threshold: T,
    /// Threshold the coupling margin was tested against.
    pub coupling_threshold: T,
    /// loss_margin ≥ loss_threshold.
    pub loss_ok: bool,
    /// coupling_margin ≥ coupling_threshold.
    pub coupling_ok: bool,
}

impl<T: Real> RegimeReport<T> {
    /// Both separation margins clear their thresholds.
    pub fn pass(&self) -> bool {
        self.loss_ok && self.coupling_ok
    }
}

/// How the one-way condition should treat the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhasePolicy<T> {
    /// Solve for the phase that admits a real J.
    Free,
    /// Keep this phase; fail if no real J cancels the backward coupling.
    Pinned(T),
}

/// Wrap an angle into [0, 2π).
pub fn wrap_angle<T: Real>(phi: T) -> T {
    let tau = T::PI() + T::PI();
    let mut x = phi % tau;
    if x < T::zero() {
        x += tau;
    }
    // x == tau can survive rounding when phi is a tiny negative number.
    if x >= tau {
        x -= tau;
    }
    x
}

fn check_nonneg<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value < T::zero() || !value.is_finite() {
        return Err(Error::InvalidParam {
            name,
            message: format!("must be finite and ≥ 0, got {value}"),
        });
    }
    Ok(())
}

impl<T: Real> SystemParams<T> {
    /// All-zero rates with unit frequencies; a starting point for config
    /// files. Not valid on its own (`gamma_m` must become positive).
    pub fn zeroed() -> Self {
        Self {
            delta_a: T::zero(),
            delta_b: T::zero(),
            delta_c: T::zero(),
            g_a: T::zero(),
            g_b: T::zero(),
            j: T::zero(),
            phi: T::zero(),
            epsilon: T::zero(),
            kappa_a: T::zero(),
            kappa_b: T::zero(),
            gamma_m: T::zero(),
            omega_a: T::one(),
            omega_b: T::one(),
        }
    }

    /// Resonant one-way working point: γ_m = 20, g = √0.4 (so Γ = 0.04),
    /// J = Γ/2 = 0.02, φ = π/2, ε = 0.1, κ_a = κ_b = 0.003, unit frequencies.
    pub fn baseline() -> Self {
        Self {
            g_a: T::of(0.4).sqrt(),
            g_b: T::of(0.4).sqrt(),
            j: T::of(0.02),
            phi: T::FRAC_PI_2(),
            epsilon: T::of(0.1),
            kappa_a: T::of(0.003),
            kappa_b: T::of(0.003),
            gamma_m: T::of(20.0),
            ..Self::zeroed()
        }
    }

    /// Circuit-QED numbers (all rates in MHz of their /2π values): a qubit
    /// battery and bus-resonator charger sharing a readout resonator with
    /// κ_a = 0.08, κ_b = 0.06, γ_m = 5, g = 0.33, J = 0.01. The drive
    /// amplitude is not part of the published set; 0.01 is a placeholder at
    /// the same order as J.
    pub fn superconducting() -> Self {
        Self {
            g_a: T::of(0.33),
            g_b: T::of(0.33),
            j: T::of(0.01),
            phi: T::FRAC_PI_2(),
            epsilon: T::of(0.01),
            kappa_a: T::of(0.08),
            kappa_b: T::of(0.06),
            gamma_m: T::of(5.0),
            ..Self::zeroed()
        }
    }

    /// Look up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "baseline" => Ok(Self::baseline()),
            "superconducting" => Ok(Self::superconducting()),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Validate ranges and normalize the phase into [0, 2π).
    pub fn checked(mut self) -> Result<Self> {
        check_nonneg("kappa_a", self.kappa_a)?;
        check_nonneg("kappa_b", self.kappa_b)?;
        check_nonneg("g_a", self.g_a)?;
        check_nonneg("g_b", self.g_b)?;
        check_nonneg("epsilon", self.epsilon)?;
        if !(self.gamma_m > T::zero()) || !self.gamma_m.is_finite() {
            return Err(Error::NonpositiveRate {
                name: "gamma_m",
                value: self.gamma_m.as_f64(),
            });
        }
        for (name, v) in [
            ("delta_a", self.delta_a),
            ("delta_b", self.delta_b),
            ("delta_c", self.delta_c),
            ("j", self.j),
            ("phi", self.phi),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    message: format!("must be finite, got {v}"),
                });
            }
        }
        self.phi = wrap_angle(self.phi);
        Ok(self)
    }

    /// Integrate out the auxiliary cavity.
    ///
    /// With γ = γ_m/2 and D = Δ_c² + γ²: Δ′_i = Δ_i − g_i²Δ_c/D,
    /// Γ_i = g_i²γ/D, G = g_a g_b Δ_c/D, Γ = γ g_a g_b/D,
    /// J± = J − G·e^(±iφ), Λ_i = Γ_i + κ_i.
    pub fn reduce_to_effective(&self) -> Result<EffectiveParams<T>> {
        if !(self.gamma_m > T::zero()) {
            return Err(Error::NonpositiveRate {
                name: "gamma_m",
                value: self.gamma_m.as_f64(),
            });
        }
        let gamma = self.gamma_m / T::of(2.0);
        let denom = self.delta_c * self.delta_c + gamma * gamma;
        let gamma_a_eff = self.g_a * self.g_a * gamma / denom;
        let gamma_b_eff = self.g_b * self.g_b * gamma / denom;
        let mut eff = EffectiveParams {
            delta_a_p: self.delta_a - self.g_a * self.g_a * self.delta_c / denom,
            delta_b_p: self.delta_b - self.g_b * self.g_b * self.delta_c / denom,
            gamma_a_eff,
            gamma_b_eff,
            g_coh: self.g_a * self.g_b * self.delta_c / denom,
            gamma_diss: gamma * self.g_a * self.g_b / denom,
            j_direct: self.j,
            j_plus: Complex::new(T::zero(), T::zero()),
            j_minus: Complex::new(T::zero(), T::zero()),
            lambda_a: T::zero(),
            lambda_b: T::zero(),
            phi: self.phi,
            epsilon: self.epsilon,
            kappa_a: self.kappa_a,
            kappa_b: self.kappa_b,
            omega_a: self.omega_a,
            omega_b: self.omega_b,
        };
        eff.rebuild_derived();
        Ok(eff)
    }

    /// Construct a three-mode system whose eliminated dynamics reproduce
    /// `eff` for a chosen cavity decay rate.
    ///
    /// Inverts the reduction at Δ_c = 0: Γ_i = g_i²/γ with γ = γ_m/2 gives
    /// g_i = √(Γ_i·γ_m/2). The steady states of the two descriptions then
    /// coincide exactly and trajectories converge as γ_m grows. Requires
    /// G = 0, since Δ_c = 0 induces no coherent part.
    pub fn from_effective(eff: &EffectiveParams<T>, gamma_m: T) -> Result<Self> {
        if !(gamma_m > T::zero()) {
            return Err(Error::NonpositiveRate {
                name: "gamma_m",
                value: gamma_m.as_f64(),
            });
        }
        if eff.g_coh.abs() > T::of(tol::PHASE_RESIDUAL) {
            return Err(Error::InvalidParam {
                name: "g_coh",
                message: format!(
                    "only a resonant cavity (G = 0) can be reconstructed, got G = {}",
                    eff.g_coh
                ),
            });
        }
        let half = T::of(0.5);
        Ok(Self {
            delta_a: eff.delta_a_p,
            delta_b: eff.delta_b_p,
            delta_c: T::zero(),
            g_a: (eff.gamma_a_eff * gamma_m * half).sqrt(),
            g_b: (eff.gamma_b_eff * gamma_m * half).sqrt(),
            j: eff.j_direct,
            phi: eff.phi,
            epsilon: eff.epsilon,
            kappa_a: eff.kappa_a,
            kappa_b: eff.kappa_b,
            gamma_m,
            omega_a: eff.omega_a,
            omega_b: eff.omega_b,
        })
    }

    /// Timescale-separation margins with the default thresholds.
    pub fn validate_adiabatic(&self) -> RegimeReport<T> {
        let r = T::of(tol::ADIABATIC_MARGIN);
        self.validate_adiabatic_with(r, r)
    }

    /// Margins with caller-chosen thresholds: γ_m/max(κ) against
    /// `loss_threshold` and |Δ_c − iγ_m/2|/max(g) against `coupling_threshold`.
    pub fn validate_adiabatic_with(
        &self,
        loss_threshold: T,
        coupling_threshold: T,
    ) -> RegimeReport<T> {
        let kappa_max = self.kappa_a.max(self.kappa_b);
        let g_max = self.g_a.max(self.g_b);
        let loss_margin = if kappa_max > T::zero() {
            self.gamma_m / kappa_max
        } else {
            T::infinity()
        };
        let cavity_scale = self.delta_c.hypot(self.gamma_m / T::of(2.0));
        let coupling_margin = if g_max > T::zero() {
            cavity_scale / g_max
        } else {
            T::infinity()
        };
        RegimeReport {
            loss_margin,
            coupling_margin,
            loss_threshold,
            coupling_threshold,
            loss_ok: loss_margin >= loss_threshold,
            coupling_ok: coupling_margin >= coupling_threshold,
        }
    }
}

impl<T: Real> EffectiveParams<T> {
    /// Two-mode system directly on the one-way resonant line: Γ_a = Γ_b = Γ
    /// = `gamma`, G = 0, φ = π/2, J = Γ/2, both detunings zero.
    pub fn resonant_nonreciprocal(gamma: T, kappa_a: T, kappa_b: T, epsilon: T) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(Error::NonpositiveRate {
                name: "gamma_diss",
                value: gamma.as_f64(),
            });
        }
        check_nonneg("kappa_a", kappa_a)?;
        check_nonneg("kappa_b", kappa_b)?;
        check_nonneg("epsilon", epsilon)?;
        let mut eff = EffectiveParams {
            delta_a_p: T::zero(),
            delta_b_p: T::zero(),
            gamma_a_eff: gamma,
            gamma_b_eff: gamma,
            g_coh: T::zero(),
            gamma_diss: gamma,
            j_direct: gamma / T::of(2.0),
            j_plus: Complex::new(T::zero(), T::zero()),
            j_minus: Complex::new(T::zero(), T::zero()),
            lambda_a: T::zero(),
            lambda_b: T::zero(),
            phi: T::FRAC_PI_2(),
            epsilon,
            kappa_a,
            kappa_b,
            omega_a: T::one(),
            omega_b: T::one(),
        };
        eff.rebuild_derived();
        Ok(eff)
    }

    /// Recompute J± and Λ from the primitive fields. Every modifier funnels
    /// through here so the derived fields can never go stale.
    fn rebuild_derived(&mut self) {
        let (sin, cos) = self.phi.sin_cos();
        // e^{±iφ} = cos φ ± i sin φ
        self.j_plus = Complex::new(self.j_direct - self.g_coh * cos, -self.g_coh * sin);
        self.j_minus = Complex::new(self.j_direct - self.g_coh * cos, self.g_coh * sin);
        self.lambda_a = self.gamma_a_eff + self.kappa_a;
        self.lambda_b = self.gamma_b_eff + self.kappa_b;
    }

    /// Same parameters with the battery detuning replaced.
    pub fn with_delta_b_p(mut self, delta: T) -> Self {
        self.delta_b_p = delta;
        self
    }

    /// Same parameters with the charger detuning replaced.
    pub fn with_delta_a_p(mut self, delta: T) -> Self {
        self.delta_a_p = delta;
        self
    }

    /// Same parameters with a new phase (wrapped into [0, 2π)).
    pub fn with_phase(mut self, phi: T) -> Self {
        self.phi = wrap_angle(phi);
        self.rebuild_derived();
        self
    }

    /// Same parameters with a new direct coupling.
    pub fn with_j(mut self, j: T) -> Self {
        self.j_direct = j;
        self.rebuild_derived();
        self
    }

    /// Same parameters with a new battery local decay.
    pub fn with_kappa_b(mut self, kappa_b: T) -> Result<Self> {
        check_nonneg("kappa_b", kappa_b)?;
        self.kappa_b = kappa_b;
        self.rebuild_derived();
        Ok(self)
    }

    /// Same parameters with the damping ratio r = κ_b/κ_a applied.
    pub fn with_r(self, r: T) -> Result<Self> {
        check_nonneg("r", r)?;
        let kappa_a = self.kappa_a;
        self.with_kappa_b(r * kappa_a)
    }

    /// Same parameters with a new drive amplitude.
    pub fn with_epsilon(mut self, epsilon: T) -> Result<Self> {
        check_nonneg("epsilon", epsilon)?;
        self.epsilon = epsilon;
        Ok(self)
    }

    /// Same parameters with the dissipative coupling (and both induced
    /// decays, keeping Γ_a = Γ_b = Γ) replaced.
    pub fn with_gamma(mut self, gamma: T) -> Result<Self> {
        check_nonneg("gamma_diss", gamma)?;
        self.gamma_diss = gamma;
        self.gamma_a_eff = gamma;
        self.gamma_b_eff = gamma;
        self.rebuild_derived();
        Ok(self)
    }

    /// Damping ratio κ_b/κ_a (∞ when κ_a = 0 and κ_b > 0, 1 when both 0).
    pub fn r(&self) -> T {
        if self.kappa_a > T::zero() {
            self.kappa_b / self.kappa_a
        } else if self.kappa_b > T::zero() {
            T::infinity()
        } else {
            T::one()
        }
    }

    /// Effective coupling amplitudes and the isolation ratio between them.
    pub fn coupling_amplitudes(&self) -> CouplingAmplitudes<T> {
        let i = Complex::new(T::zero(), T::one());
        let half_gamma = self.gamma_diss / T::of(2.0);
        let phase = Complex::from_polar(T::one(), self.phi);
        let backward = -i * self.j_minus - phase.conj() * half_gamma;
        let forward = -i * self.j_plus - phase * half_gamma;
        let bn = backward.norm();
        let fn_ = forward.norm();
        let isolation = if bn == T::zero() {
            T::zero()
        } else if fn_ == T::zero() {
            T::infinity()
        } else {
            bn / fn_
        };
        CouplingAmplitudes {
            forward,
            backward,
            isolation,
        }
    }

    /// Solve the one-way condition J₋ = i(Γ/2)e^(−iφ) for (J, φ).
    ///
    /// A real J exists iff Im[(G + iΓ/2)e^(−iφ)] = 0. With the phase free
    /// that picks tan φ = Γ/(2G) (φ = π/2 at G = 0) and
    /// J = √(G² + Γ²/4); with the phase pinned the imaginary part is
    /// reported as the infeasibility residual.
    pub fn solve_nonreciprocal(&self, policy: PhasePolicy<T>) -> Result<(T, T)> {
        if !(self.gamma_diss > T::zero()) {
            return Err(Error::NonpositiveRate {
                name: "gamma_diss",
                value: self.gamma_diss.as_f64(),
            });
        }
        let half_gamma = self.gamma_diss / T::of(2.0);
        match policy {
            PhasePolicy::Free => {
                let phi = wrap_angle(half_gamma.atan2(self.g_coh));
                let j = self.g_coh.hypot(half_gamma);
                Ok((j, phi))
            }
            PhasePolicy::Pinned(phi) => {
                let target =
                    Complex::new(self.g_coh, half_gamma) * Complex::from_polar(T::one(), -phi);
                if target.im.abs() > T::of(tol::PHASE_RESIDUAL) {
                    return Err(Error::IncompatiblePhase {
                        residual: target.im.abs().as_f64(),
                    });
                }
                Ok((target.re, wrap_angle(phi)))
            }
        }
    }

    /// Same parameters moved onto the one-way line by solving for (J, φ).
    pub fn nonreciprocal_locked(mut self, policy: PhasePolicy<T>) -> Result<Self> {
        let (j, phi) = self.solve_nonreciprocal(policy)?;
        self.j_direct = j;
        self.phi = phi;
        self.rebuild_derived();
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type P = SystemParams<f64>;

    #[test]
    fn baseline_reduction() {
        let eff = P::baseline().reduce_to_effective().unwrap();
        assert_relative_eq!(eff.gamma_a_eff, 0.04, max_relative = 1e-14);
        assert_relative_eq!(eff.gamma_b_eff, 0.04, max_relative = 1e-14);
        assert_relative_eq!(eff.gamma_diss, 0.04, max_relative = 1e-14);
        assert_eq!(eff.g_coh, 0.0);
        assert_eq!(eff.delta_a_p, 0.0);
        assert_eq!(eff.delta_b_p, 0.0);
        assert_relative_eq!(eff.lambda_a, 0.043, max_relative = 1e-14);
        assert_relative_eq!(eff.lambda_b, 0.043, max_relative = 1e-14);
        assert_relative_eq!(eff.j_plus.re, 0.02, max_relative = 1e-14);
        assert_eq!(eff.j_plus.im, 0.0);
        assert_eq!(eff.j_minus, eff.j_plus.conj());
    }

    #[test]
    fn decoupled_charger_reduction() {
        let p = P {
            g_a: 0.0,
            ..P::baseline()
        };
        let eff = p.reduce_to_effective().unwrap();
        assert_eq!(eff.gamma_a_eff, 0.0);
        assert_eq!(eff.g_coh, 0.0);
        assert_eq!(eff.gamma_diss, 0.0);
        assert_eq!(eff.lambda_a, p.kappa_a);
    }

    #[test]
    fn detuned_cavity_reduction() {
        // Δ_c = γ = 10 splits the induced weight evenly: Γ = G = 0.05.
        let p = P {
            delta_c: 10.0,
            g_a: 1.0,
            g_b: 1.0,
            gamma_m: 20.0,
            ..P::zeroed()
        };
        let eff = p.reduce_to_effective().unwrap();
        assert_relative_eq!(eff.gamma_a_eff, 0.05, max_relative = 1e-14);
        assert_relative_eq!(eff.gamma_b_eff, 0.05, max_relative = 1e-14);
        assert_relative_eq!(eff.gamma_diss, 0.05, max_relative = 1e-14);
        assert_relative_eq!(eff.g_coh, 0.05, max_relative = 1e-14);
        assert_relative_eq!(eff.delta_a_p, -0.05, max_relative = 1e-14);
    }

    #[test]
    fn reduction_identities_hold_off_axis() {
        let p = P {
            delta_a: 0.3,
            delta_b: -0.2,
            delta_c: 7.0,
            g_a: 0.9,
            g_b: 0.4,
            j: 0.05,
            phi: 1.1,
            gamma_m: 14.0,
            kappa_a: 0.01,
            kappa_b: 0.02,
            ..P::zeroed()
        };
        let eff = p.reduce_to_effective().unwrap();
        assert_relative_eq!(
            eff.gamma_diss * eff.gamma_diss,
            eff.gamma_a_eff * eff.gamma_b_eff,
            max_relative = 1e-14
        );
        // G·γ = Γ·Δ_c ties the coherent and dissipative induced parts together.
        assert_relative_eq!(
            eff.g_coh * (p.gamma_m / 2.0),
            eff.gamma_diss * p.delta_c,
            max_relative = 1e-14
        );
        assert_eq!(eff.j_minus, eff.j_plus.conj());
        assert!(eff.lambda_a >= p.kappa_a && eff.lambda_b >= p.kappa_b);
    }

    #[test]
    fn gamma_m_must_be_positive() {
        let p = P {
            gamma_m: 0.0,
            ..P::baseline()
        };
        assert!(matches!(
            p.reduce_to_effective(),
            Err(Error::NonpositiveRate {
                name: "gamma_m",
                ..
            })
        ));
        assert!(p.checked().is_err());
    }

    #[test]
    fn phase_wraps_into_principal_range() {
        let p = P {
            phi: -std::f64::consts::FRAC_PI_2,
            ..P::baseline()
        }
        .checked()
        .unwrap();
        assert_relative_eq!(p.phi, 1.5 * std::f64::consts::PI, max_relative = 1e-15);
        assert_eq!(wrap_angle(7.0 * std::f64::consts::PI), std::f64::consts::PI);
        assert!(wrap_angle(-1e-18) < 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn adiabatic_margins_baseline() {
        let report = P::baseline().validate_adiabatic();
        assert_relative_eq!(report.loss_margin, 20.0 / 0.003, max_relative = 1e-14);
        assert_relative_eq!(
            report.coupling_margin,
            10.0 / 0.4f64.sqrt(),
            max_relative = 1e-14
        );
        assert!(report.pass());
    }

    #[test]
    fn adiabatic_margins_infinite_when_decoupled() {
        let p = P {
            g_a: 0.0,
            g_b: 0.0,
            kappa_a: 0.0,
            kappa_b: 0.0,
            ..P::baseline()
        };
        let report = p.validate_adiabatic();
        assert!(report.loss_margin.is_infinite());
        assert!(report.coupling_margin.is_infinite());
        assert!(report.pass());
    }

    #[test]
    fn adiabatic_margins_fail_when_slow() {
        let p = P {
            gamma_m: 1.0,
            g_a: 1.0,
            g_b: 1.0,
            kappa_a: 0.5,
            kappa_b: 0.5,
            ..P::zeroed()
        };
        let report = p.validate_adiabatic();
        assert_relative_eq!(report.loss_margin, 2.0, max_relative = 1e-14);
        assert_relative_eq!(report.coupling_margin, 0.5, max_relative = 1e-14);
        assert!(!report.loss_ok && !report.coupling_ok && !report.pass());
    }

    #[test]
    fn baseline_coupling_is_one_way() {
        let eff = P::baseline().reduce_to_effective().unwrap();
        let amps = eff.coupling_amplitudes();
        assert!(amps.backward.norm() < 1e-15);
        assert_relative_eq!(amps.forward.im, -0.04, max_relative = 1e-14);
        assert!(amps.forward.re.abs() < 1e-15);
        // cos(π/2) is not exactly zero in floats; neither is the isolation.
        assert!(amps.isolation < 1e-13);
    }

    #[test]
    fn reciprocal_limit_coupling() {
        let eff = EffectiveParams::resonant_nonreciprocal(0.04, 0.003, 0.003, 0.1)
            .unwrap()
            .with_gamma(0.0)
            .unwrap()
            .with_j(0.02);
        let amps = eff.coupling_amplitudes();
        assert_eq!(amps.forward, Complex::new(0.0, -0.02));
        assert_eq!(amps.backward, Complex::new(0.0, -0.02));
        assert_relative_eq!(amps.isolation, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_phase_gives_no_isolation() {
        let eff = EffectiveParams::resonant_nonreciprocal(0.04, 0.0, 0.0, 0.1)
            .unwrap()
            .with_phase(0.0)
            .with_j(0.02);
        let amps = eff.coupling_amplitudes();
        assert_relative_eq!(amps.backward.re, -0.02, max_relative = 1e-14);
        assert_relative_eq!(amps.backward.im, -0.02, max_relative = 1e-14);
        assert_eq!(amps.forward, amps.backward);
        assert_relative_eq!(amps.isolation, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn solve_one_way_free_phase() {
        let eff = P::baseline().reduce_to_effective().unwrap();
        let (j, phi) = eff.solve_nonreciprocal(PhasePolicy::Free).unwrap();
        assert_relative_eq!(j, 0.02, max_relative = 1e-14);
        assert_relative_eq!(phi, std::f64::consts::FRAC_PI_2, max_relative = 1e-14);
    }

    #[test]
    fn solve_one_way_with_coherent_part() {
        // G = 0.05, Γ = 0.1 → tan φ = 1, J = 0.05·√2.
        let mut eff = EffectiveParams::resonant_nonreciprocal(0.1, 0.0, 0.0, 0.1).unwrap();
        eff.g_coh = 0.05;
        eff.rebuild_derived();
        let (j, phi) = eff.solve_nonreciprocal(PhasePolicy::Free).unwrap();
        assert_relative_eq!(phi, std::f64::consts::FRAC_PI_4, max_relative = 1e-14);
        assert_relative_eq!(j, 0.05 * 2.0f64.sqrt(), max_relative = 1e-14);
        let locked = eff.nonreciprocal_locked(PhasePolicy::Free).unwrap();
        assert!(locked.coupling_amplitudes().backward.norm() < 1e-15);
    }

    #[test]
    fn pinned_zero_phase_is_incompatible() {
        let eff = P::baseline().reduce_to_effective().unwrap();
        let err = eff
            .solve_nonreciprocal(PhasePolicy::Pinned(0.0))
            .unwrap_err();
        match err {
            Error::IncompatiblePhase { residual } => {
                assert_relative_eq!(residual, 0.02, max_relative = 1e-12)
            }
            other => panic!("expected IncompatiblePhase, got {other:?}"),
        }
    }

    #[test]
    fn pinned_compatible_phase_recovers_free_solution() {
        let eff = P::baseline().reduce_to_effective().unwrap();
        let (j, phi) = eff
            .solve_nonreciprocal(PhasePolicy::Pinned(std::f64::consts::FRAC_PI_2))
            .unwrap();
        assert_relative_eq!(j, 0.02, max_relative = 1e-14);
        assert_relative_eq!(phi, std::f64::consts::FRAC_PI_2, max_relative = 1e-14);
    }

    #[test]
    fn from_effective_round_trip_shape() {
        let eff = P::baseline().reduce_to_effective().unwrap();
        let full = P::from_effective(&eff, 50.0).unwrap();
        assert_eq!(full.delta_c, 0.0);
        assert_relative_eq!(
            full.g_a,
            (0.04f64 * 50.0 / 2.0).sqrt(),
            max_relative = 1e-14
        );
        assert_eq!(full.j, 0.02);
        assert_eq!(full.kappa_b, 0.003);
        // Reducing the reconstruction recovers the effective rates, and at
        // the system's own γ_m it reproduces the original couplings.
        let back = full.reduce_to_effective().unwrap();
        assert_relative_eq!(back.gamma_a_eff, eff.gamma_a_eff, max_relative = 1e-14);
        assert_relative_eq!(back.gamma_diss, eff.gamma_diss, max_relative = 1e-14);
        let same = P::from_effective(&eff, 20.0).unwrap();
        assert_relative_eq!(same.g_a, P::baseline().g_a, max_relative = 1e-14);
        assert_relative_eq!(same.g_b, P::baseline().g_b, max_relative = 1e-14);
        // A detuned cavity induces G ≠ 0, which no Δ_c = 0 system matches.
        let p = P {
            delta_c: 10.0,
            g_a: 1.0,
            g_b: 1.0,
            gamma_m: 20.0,
            ..P::zeroed()
        };
        let detuned = p.reduce_to_effective().unwrap();
        assert!(P::from_effective(&detuned, 20.0).is_err());
    }

    #[test]
    fn superconducting_margins() {
        let p = P::superconducting();
        let eff = p.reduce_to_effective().unwrap();
        assert_relative_eq!(eff.gamma_diss, 0.33 * 0.33 / 2.5, max_relative = 1e-14);
        let report = p.validate_adiabatic();
        assert_relative_eq!(report.loss_margin, 62.5, max_relative = 1e-14);
        assert_relative_eq!(report.coupling_margin, 2.5 / 0.33, max_relative = 1e-14);
        assert!(report.loss_ok);
        assert!(!report.coupling_ok);
    }

    #[test]
    fn preset_lookup() {
        assert!(P::preset("baseline").is_ok());
        assert!(P::preset("superconducting").is_ok());
        assert!(matches!(
            P::preset("nonexistent"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn damping_ratio_edge_cases() {
        let eff = P::baseline().reduce_to_effective().unwrap();
        assert_relative_eq!(eff.r(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            eff.with_r(10.0).unwrap().lambda_b,
            0.07,
            max_relative = 1e-14
        );
        let mut no_loss = eff;
        no_loss.kappa_a = 0.0;
        no_loss.kappa_b = 0.0;
        no_loss.rebuild_derived();
        assert_eq!(no_loss.r(), 1.0);
        assert_eq!(no_loss.with_kappa_b(0.01).unwrap().r(), f64::INFINITY);
    }

    #[test]
    fn works_in_f32() {
        let eff = SystemParams::<f32>::baseline()
            .reduce_to_effective()
            .unwrap();
        assert!((eff.gamma_diss - 0.04).abs() < 1e-7);
        assert!((eff.lambda_a - 0.043).abs() < 1e-7);
        let (j, phi) = eff.solve_nonreciprocal(PhasePolicy::Free).unwrap();
        assert!((j - 0.02).abs() < 1e-7);
        assert!((phi - std::f32::consts::FRAC_PI_2).abs() < 1e-6);
    }
}
