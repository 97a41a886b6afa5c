//! Structural invariants checked over random parameter draws.
//!
//! Unit tests pin specific working points; these properties assert the
//! relations that must hold for *any* admissible parameters: reduction
//! identities, round trips, one-way isolation at the locked phase,
//! closed forms against direct integration, and EP residuals.

use num_complex::Complex;
use proptest::prelude::*;

use qbattery::analytic;
use qbattery::dynamics::{self, Grid, IntegrationOptions, MomentModel, MomentState};
use qbattery::experiments::{self, AxisSpec, ModelChoice, OutputKind, Spacing, SweepSpec};
use qbattery::model::{PhasePolicy, SystemParams};
use qbattery::ode::Options as OdeOptions;
use qbattery::spectrum::{self, DriftMatrix, EpVariable};

type Params = SystemParams<f64>;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// A fully random three-mode parameter set, always `checked`-valid.
fn any_params() -> impl Strategy<Value = Params> {
    (
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64),
        (0.0..1.5f64, 0.0..1.5f64),
        (0.0..0.2f64, -3.2..3.2f64, 0.0..0.5f64),
        (0.0..0.3f64, 0.0..0.3f64, 0.5..60.0f64),
    )
        .prop_map(|((da, db, dc), (ga, gb), (j, phi, eps), (ka, kb, gm))| {
            SystemParams {
                delta_a: da,
                delta_b: db,
                delta_c: dc,
                g_a: ga,
                g_b: gb,
                j,
                phi,
                epsilon: eps,
                kappa_a: ka,
                kappa_b: kb,
                gamma_m: gm,
                omega_a: 1.0,
                omega_b: 1.0,
            }
            .checked()
            .expect("draw is admissible")
        })
}

/// Like `any_params`, but with the auxiliary mode on resonance so the
/// coherent part of the mediated coupling vanishes (G = 0).
fn resonant_cavity_params() -> impl Strategy<Value = Params> {
    any_params().prop_map(|mut p| {
        p.delta_c = 0.0;
        p
    })
}

proptest! {
    /// Consistency relations of the adiabatic reduction. None of these
    /// restate the elimination formulas; they are cross-checks between
    /// derived quantities.
    #[test]
    fn reduction_identities(p in any_params()) {
        let eff = p.reduce_to_effective().unwrap();
        let gamma = p.gamma_m / 2.0;
        let scale = eff.gamma_a_eff.max(eff.gamma_b_eff).max(1e-12);

        // Induced decay is nonnegative and Γ² = Γ_a Γ_b.
        prop_assert!(eff.gamma_a_eff >= 0.0);
        prop_assert!(eff.gamma_b_eff >= 0.0);
        prop_assert!(
            (eff.gamma_diss.powi(2) - eff.gamma_a_eff * eff.gamma_b_eff).abs()
                <= 1e-12 * scale * scale.max(1.0)
        );

        // Coherent and dissipative mediated parts share one origin: Gγ = ΓΔ_c.
        prop_assert!(
            (eff.g_coh * gamma - eff.gamma_diss * p.delta_c).abs()
                <= 1e-12 * (gamma + p.delta_c.abs()) * scale.max(1.0)
        );

        // Total linewidths and the conjugate pair of direction-resolved couplings.
        prop_assert!((eff.lambda_a - (eff.gamma_a_eff + p.kappa_a)).abs() <= 1e-14 * (1.0 + eff.lambda_a));
        prop_assert!((eff.lambda_b - (eff.gamma_b_eff + p.kappa_b)).abs() <= 1e-14 * (1.0 + eff.lambda_b));
        prop_assert!((eff.j_plus - eff.j_minus.conj()).norm() <= 1e-14 * (1.0 + eff.j_plus.norm()));

        // Both detuning shifts are pulled by the same cavity pole, so they
        // are proportional to the respective g²: (Δ_a−Δ′_a) g_b² = (Δ_b−Δ′_b) g_a².
        // Each shift is a difference of stored detunings, so its absolute
        // error floor is set by |Δ|, not by the (possibly tiny) shift itself.
        let shift_a = p.delta_a - eff.delta_a_p;
        let shift_b = p.delta_b - eff.delta_b_p;
        prop_assert!(
            (shift_a * p.g_b.powi(2) - shift_b * p.g_a.powi(2)).abs()
                <= 1e-13 * (p.delta_a.abs() + p.delta_b.abs() + 1.0) * (p.g_a.powi(2) + p.g_b.powi(2) + 1.0)
        );
    }

    /// Reconstructing a three-mode system from its reduction and reducing
    /// again lands on the same effective parameters.
    #[test]
    fn reduction_round_trips(p in resonant_cavity_params(), gm2 in 0.5..80.0f64) {
        let eff = p.reduce_to_effective().unwrap();
        // Round trip at a different mechanical linewidth: the effective
        // description does not remember γ_m.
        let rebuilt = SystemParams::from_effective(&eff, gm2).unwrap();
        let eff2 = rebuilt.reduce_to_effective().unwrap();

        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * (1.0 + x.abs().max(y.abs()));
        prop_assert!(close(eff2.delta_a_p, eff.delta_a_p));
        prop_assert!(close(eff2.delta_b_p, eff.delta_b_p));
        prop_assert!(close(eff2.gamma_a_eff, eff.gamma_a_eff));
        prop_assert!(close(eff2.gamma_b_eff, eff.gamma_b_eff));
        prop_assert!(close(eff2.gamma_diss, eff.gamma_diss));
        prop_assert!(close(eff2.j_direct, eff.j_direct));
        prop_assert!(close(eff2.phi, eff.phi));
        prop_assert!(close(eff2.kappa_a, eff.kappa_a));
        prop_assert!(close(eff2.kappa_b, eff.kappa_b));
        prop_assert!(close(eff2.epsilon, eff.epsilon));
    }

    /// The free-phase lock suppresses the backward coupling regardless of
    /// where the parameters started, and returns an admissible (J, φ).
    #[test]
    fn free_phase_lock_is_one_way(p in any_params()) {
        let eff = p.reduce_to_effective().unwrap();
        prop_assume!(eff.gamma_diss > 1e-6);

        let locked = eff.nonreciprocal_locked(PhasePolicy::Free).unwrap();
        let amps = locked.coupling_amplitudes();
        prop_assert!(locked.j_direct >= 0.0);
        prop_assert!(locked.phi > -std::f64::consts::PI && locked.phi <= std::f64::consts::PI);
        prop_assert!(amps.backward.norm() <= 1e-12 * amps.forward.norm());
        // At the lock J and φ conspire so the forward magnitude is exactly Γ.
        prop_assert!((amps.forward.norm() - eff.gamma_diss).abs() <= 1e-9 * eff.gamma_diss);
    }

    /// Exceptional points reported by the solver really are defective:
    /// the re-evaluated discriminant vanishes and the spectral report
    /// agrees.
    #[test]
    fn ep_solutions_zero_the_discriminant(r in 0.2..8.0f64, delta in -0.03..0.03f64) {
        let eff = Params::baseline()
            .reduce_to_effective()
            .unwrap()
            .with_r(r)
            .unwrap()
            .with_delta_b_p(delta);

        let sols = match spectrum::solve_ep(&eff, &[EpVariable::J]) {
            Ok(s) => s,
            Err(_) => return Ok(()), // detuning outside the feasible band for this r
        };
        prop_assert!(!sols.is_empty());
        for sol in &sols {
            prop_assert!(sol.residual <= 1e-10);
            let dm = DriftMatrix::from_effective(&sol.params);
            prop_assert!(dm.discriminant().norm() <= 1e-12);
            let report = spectrum::spectral(&dm, 1e-8);
            prop_assert!(report.is_ep);
            prop_assert!(sol.params.j_direct >= 0.0);
        }
    }
}

proptest! {
    // Each case integrates a trajectory; keep the sample count modest.
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Closed-form charging curves track direct integration at any rates,
    /// not just the published working point.
    #[test]
    fn closed_forms_track_integration(
        (ga, gb) in (0.3..1.0f64, 0.3..1.0f64),
        (ka, kb) in (0.01..0.1f64, 0.01..0.1f64),
        eps in 0.01..0.3f64,
        gm in 5.0..30.0f64,
    ) {
        let p = SystemParams {
            delta_a: 0.0,
            delta_b: 0.0,
            delta_c: 0.0,
            g_a: ga,
            g_b: gb,
            j: 0.0,
            phi: 0.0,
            epsilon: eps,
            kappa_a: ka,
            kappa_b: kb,
            gamma_m: gm,
            omega_a: 1.0,
            omega_b: 1.0,
        }
        .checked()
        .unwrap();
        let eff = p
            .reduce_to_effective()
            .unwrap()
            .nonreciprocal_locked(PhasePolicy::Free)
            .unwrap();

        let t_end = 4.0 / eff.lambda_a.min(eff.lambda_b);
        let grid = Grid::Uniform { t_end, samples: 9 };
        let model = MomentModel::from_effective(&eff);
        let traj = dynamics::integrate(
            &model,
            &MomentState::vacuum(2),
            &grid,
            &IntegrationOptions::default(),
        )
        .unwrap();

        for (k, &t) in traj.times.iter().enumerate() {
            let cf = analytic::closed_form_moments(t, &eff).unwrap();
            let s = &traj.states[k];
            let floor = 1e-12;
            prop_assert!((cf.amp_a - s.amp(0)).norm() <= 1e-6 * (cf.amp_a.norm() + floor));
            prop_assert!((cf.amp_b - s.amp(1)).norm() <= 1e-6 * (cf.amp_b.norm() + floor));
            prop_assert!((cf.n_bb - s.occupation(1)).abs() <= 1e-6 * (cf.n_bb.abs() + floor));
            prop_assert!((cf.n_ab - s.cross(0, 1)).norm() <= 1e-6 * (cf.n_ab.norm() + floor));
        }
    }

    /// The steady-state formulas and the linear-solve steady state are
    /// independent code paths; they must agree wherever both apply.
    #[test]
    fn steady_formulas_agree_with_linear_solve(p in any_params()) {
        let eff = p.reduce_to_effective().unwrap();
        let by_solve = dynamics::steady_state(&eff);
        let by_formula = analytic::steady_energies(&eff);
        prop_assume!(by_solve.is_ok() && by_formula.is_ok());
        let (s, f) = (by_solve.unwrap(), by_formula.unwrap());

        prop_assert!((s.e_a - f.e_a).abs() <= 1e-9 * (1.0 + f.e_a));
        prop_assert!((s.e_b - f.e_b).abs() <= 1e-9 * (1.0 + f.e_b));
        prop_assert!((s.eta - f.eta).abs() <= 1e-9);
    }

    /// With every loss channel off the two directly coupled modes trade
    /// excitation back and forth without creating or destroying energy.
    #[test]
    fn lossless_exchange_conserves_energy(
        j in 0.005..0.08f64,
        phi in -3.0..3.0f64,
        (ra, ia) in (-1.5..1.5f64, -1.5..1.5f64),
        (rb, ib) in (-1.5..1.5f64, -1.5..1.5f64),
    ) {
        let p = SystemParams {
            j,
            phi,
            gamma_m: 1.0, // irrelevant: the couplings to the lossy mode are zero
            ..SystemParams::zeroed()
        }
        .checked()
        .unwrap();
        let e0 = ra * ra + ia * ia + rb * rb + ib * ib;
        prop_assume!(e0 > 0.2);

        let eff = p.reduce_to_effective().unwrap();
        let model = MomentModel::from_effective(&eff);
        let state = MomentState::coherent(&[c(ra, ia), c(rb, ib)]);
        let opts = IntegrationOptions {
            ode: OdeOptions {
                rtol: 1e-11,
                atol: 1e-14,
                ..OdeOptions::default()
            },
            ..IntegrationOptions::default()
        };
        let traj = dynamics::integrate(
            &model,
            &state,
            &Grid::Uniform { t_end: 50.0, samples: 11 },
            &opts,
        )
        .unwrap();

        for k in 0..traj.times.len() {
            let e = traj.e_a[k] + traj.e_b[k];
            prop_assert!((e - e0).abs() <= 1e-8 * e0);
        }
    }

    /// Sweep grids of any shape produce exactly one row per lattice point
    /// and are reproducible.
    #[test]
    fn sweeps_cover_the_grid(ca in 2usize..6, cb in 2usize..6) {
        let mut spec = SweepSpec::point(Params::baseline());
        spec.axes = vec![
            AxisSpec { name: "j".into(), min: 0.01, max: 0.03, count: ca, spacing: Spacing::Linear },
            AxisSpec { name: "delta_b_p".into(), min: -0.01, max: 0.01, count: cb, spacing: Spacing::Linear },
        ];
        spec.outputs = vec![OutputKind::EB];
        spec.model = ModelChoice::Effective;

        let out = experiments::run_sweep(&spec).unwrap();
        prop_assert_eq!(out.table.rows.len(), ca * cb);
        prop_assert_eq!(out.meta.points, ca * cb);
        prop_assert_eq!(out.failures, 0);

        let again = experiments::run_sweep(&spec).unwrap();
        prop_assert_eq!(out.table.to_csv_string(), again.table.to_csv_string());
    }
}
