//! Quantitative self-checks shared by the test suite and the CLI.
//!
//! Each criterion re-derives a published or independently computed number
//! and compares against a fixed band. Hard criteria gate releases; soft
//! ones are reported (values near literature numbers whose exact
//! provenance allows more drift). `tol_scale` multiplies every acceptance
//! band: 1.0 is the contract, smaller values tighten it (0 makes every
//! inequality unsatisfiable, handy for exercising failure reporting).

use std::time::Instant;

use num_complex::Complex;

use crate::analytic;
use crate::dynamics::{self, Grid, IntegrationOptions, Method, MomentModel, MomentState};
use crate::model::{PhasePolicy, SystemParams};
use crate::ode;
use crate::spectrum::{self, DriftMatrix, EpVariable};
use crate::tol;

/// Result of one validation criterion.
#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: &'static str,
    /// Hard criteria must pass; soft ones are informational.
    pub hard: bool,
    pub passed: bool,
    /// What was measured, with the numbers.
    pub measured: String,
    /// The acceptance band.
    pub requirement: String,
}

impl CriterionOutcome {
    /// One-line report: `H2 PASS  E_A=21.633... [E_A=21.63±0.01 ...]`.
    pub fn line(&self) -> String {
        let status = match (self.hard, self.passed) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, true) => "pass",
            (false, false) => "FLAG",
        };
        format!(
            "{:<3} {}  {}  [{}]",
            self.id, status, self.measured, self.requirement
        )
    }
}

type Eff = crate::model::EffectiveParams<f64>;

fn baseline_eff() -> Eff {
    SystemParams::<f64>::baseline()
        .reduce_to_effective()
        .expect("baseline reduces")
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// Run every criterion. Takes a few seconds; single-threaded.
pub fn run_all(tol_scale: f64) -> Vec<CriterionOutcome> {
    vec![
        h1(tol_scale),
        h2(tol_scale),
        h3(tol_scale),
        h4(tol_scale),
        h5(tol_scale),
        h6(tol_scale),
        h7(tol_scale),
        h8(tol_scale),
        s1(tol_scale),
        s2(tol_scale),
        s3(tol_scale),
    ]
}

/// Closed-form moments against direct integration on the working point.
fn h1(s: f64) -> CriterionOutcome {
    let start = Instant::now();
    let eff = baseline_eff();
    let model = MomentModel::from_effective(&eff);
    let grid = Grid::Uniform {
        t_end: 200.0,
        samples: 2001,
    };
    let traj = dynamics::integrate(
        &model,
        &MomentState::vacuum(2),
        &grid,
        &IntegrationOptions::default(),
    )
    .expect("baseline integrates");

    // Sup-norm relative error per quantity: sup|Δ| / sup|value|.
    let mut num = [0.0f64; 5];
    let mut den = [0.0f64; 5];
    for (k, &t) in traj.times.iter().enumerate() {
        let cf = analytic::closed_form_moments(t, &eff).expect("closed form applies");
        let st = &traj.states[k];
        let pairs: [(f64, f64); 5] = [
            ((st.amp(0) - cf.amp_a).norm(), cf.amp_a.norm()),
            ((st.amp(1) - cf.amp_b).norm(), cf.amp_b.norm()),
            ((st.occupation(0) - cf.n_aa).abs(), cf.n_aa.abs()),
            ((st.occupation(1) - cf.n_bb).abs(), cf.n_bb.abs()),
            ((st.cross(0, 1) - cf.n_ab).norm(), cf.n_ab.norm()),
        ];
        for (i, (d, v)) in pairs.iter().enumerate() {
            num[i] = num[i].max(*d);
            den[i] = den[i].max(*v);
        }
    }
    let worst = (0..5).map(|i| num[i] / den[i]).fold(0.0f64, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    CriterionOutcome {
        id: "H1",
        hard: true,
        passed: worst <= 1e-6 * s && elapsed < 1.0,
        measured: format!("max rel deviation {worst:.3e} in {elapsed:.3} s"),
        requirement: "closed forms vs integration ≤ 1e-6 over [0,200], under 1 s".into(),
    }
}

/// Steady energies and efficiency on the working point.
fn h2(s: f64) -> CriterionOutcome {
    let st = analytic::steady_energies(&baseline_eff()).expect("steady exists");
    let checks = [
        (st.e_a - 21.63).abs() <= 0.01 * s,
        (st.e_b - 74.88).abs() <= 0.01 * s,
        (st.eta - 0.776).abs() <= 0.001 * s,
        (st.e_b - 75.9).abs() / 75.9 <= 0.02 * s,
        (st.eta - 0.78).abs() / 0.78 <= 0.02 * s,
    ];
    CriterionOutcome {
        id: "H2",
        hard: true,
        passed: checks.iter().all(|&b| b),
        measured: format!("E_A={:.4} E_B={:.4} eta={:.5}", st.e_a, st.e_b, st.eta),
        requirement: "21.63±0.01, 74.88±0.01, 0.776±0.001; within 2% of 75.9 / 0.78".into(),
    }
}

/// Steady battery energy under battery detuning.
fn h3(s: f64) -> CriterionOutcome {
    let eff = baseline_eff();
    let e1 = analytic::steady_energies(&eff.with_delta_b_p(0.01))
        .expect("stable")
        .e_b;
    let e2 = analytic::steady_energies(&eff.with_delta_b_p(0.1))
        .expect("stable")
        .e_b;
    let ok1 = (e1 - 61.6).abs() / 61.6 <= 0.02 * s;
    let ok2 = (e2 - 3.31).abs() / 3.31 <= 0.02 * s;
    CriterionOutcome {
        id: "H3",
        hard: true,
        passed: ok1 && ok2,
        measured: format!("E_B(0.01)={e1:.3} E_B(0.1)={e2:.4}"),
        requirement: "61.6±2% and 3.31±2%".into(),
    }
}

/// One-way isolation: battery-side perturbations must not reach the charger.
fn h4(s: f64) -> CriterionOutcome {
    let run = |eff: &Eff, amp_b: f64| {
        let model = MomentModel::from_effective(eff);
        let init = MomentState::coherent(&[c(0.0, 0.0), c(amp_b, 0.0)]);
        let opts = IntegrationOptions {
            method: Method::FixedRk4 { substeps: 40 },
            ..IntegrationOptions::default()
        };
        let grid = Grid::Uniform {
            t_end: 100.0,
            samples: 26,
        };
        dynamics::integrate(&model, &init, &grid, &opts).expect("integrates")
    };
    let rel_change = |eff: &Eff| {
        let quiet = run(eff, 0.0);
        let loud = run(eff, 1e3);
        let mut drift = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..quiet.times.len() {
            drift = drift.max((loud.states[k].amp(0) - quiet.states[k].amp(0)).norm());
            scale = scale.max(quiet.states[k].amp(0).norm());
        }
        drift / scale
    };
    let eff = baseline_eff();
    let locked = rel_change(&eff);
    let broken = rel_change(&eff.with_phase(std::f64::consts::FRAC_PI_4));
    CriterionOutcome {
        id: "H4",
        hard: true,
        passed: locked < 1e-12 * s && broken > 1e-3,
        measured: format!("rel change {locked:.3e} locked, {broken:.3e} at phi=pi/4"),
        requirement: "<1e-12 at the one-way point, >1e-3 off it (⟨b⟩(0)=1e3)".into(),
    }
}

/// Coherent-state factorization N = v*vᵀ is preserved from vacuum.
fn h5(s: f64) -> CriterionOutcome {
    let eff = baseline_eff();
    let grid = Grid::Uniform {
        t_end: 200.0,
        samples: 201,
    };
    let opts = IntegrationOptions::default();
    let worst_of = |model: &MomentModel<f64>, n: usize| -> f64 {
        let traj = dynamics::integrate(model, &MomentState::vacuum(n), &grid, &opts).expect("runs");
        traj.states
            .iter()
            .map(|st| st.factorization_defect())
            .fold(0.0, f64::max)
    };
    let d_eff = worst_of(&MomentModel::from_effective(&eff), 2);
    let full = SystemParams::from_effective(&eff, 20.0).expect("resonant");
    let d_full = worst_of(&MomentModel::from_full(&full), 3);
    let worst = d_eff.max(d_full);
    CriterionOutcome {
        id: "H5",
        hard: true,
        passed: worst < 1e-8 * s,
        measured: format!("defect {d_eff:.2e} (two-mode), {d_full:.2e} (three-mode)"),
        requirement: "‖N − v̄vᵀ‖∞ < 1e-8 from vacuum, both models".into(),
    }
}

/// Adiabatic elimination converges: the three-mode model approaches the
/// two-mode one as the auxiliary decay grows with Γ held fixed. The steady
/// states agree identically by construction, so the comparison point is the
/// mid-charge energy E_B(t=200), where the elimination is only approximate.
fn h6(s: f64) -> CriterionOutcome {
    let eff = baseline_eff();
    let e_ref = analytic::closed_form_moments(200.0, &eff)
        .expect("closed form applies")
        .e_b;
    let tight = IntegrationOptions {
        ode: ode::Options {
            rtol: 1e-10,
            atol: 1e-13,
            ..ode::Options::default()
        },
        ..IntegrationOptions::default()
    };
    let grid = Grid::Explicit(vec![200.0]);
    let mut errs = Vec::new();
    for gm in [20.0, 50.0, 100.0] {
        let p = SystemParams::from_effective(&eff, gm).expect("resonant");
        let traj = dynamics::integrate(
            &MomentModel::from_full(&p),
            &MomentState::vacuum(3),
            &grid,
            &tight,
        )
        .expect("integrates");
        errs.push((traj.e_b[0] - e_ref).abs() / e_ref);
    }
    let passed = errs[0] < 0.05 * s && errs[0] > errs[1] && errs[1] > errs[2];
    CriterionOutcome {
        id: "H6",
        hard: true,
        passed,
        measured: format!(
            "E_B(200) rel err {:.3e} / {:.3e} / {:.3e} at gamma_m = 20/50/100",
            errs[0], errs[1], errs[2]
        ),
        requirement: "<5% at gamma_m=20 and strictly decreasing".into(),
    }
}

/// Exceptional-point solving in J.
fn h7(s: f64) -> CriterionOutcome {
    let eff = baseline_eff();
    let mut notes = Vec::new();
    let mut ok = true;

    // Balanced losses: the EP sits exactly at J = Γ/2.
    match spectrum::solve_ep(&eff, &[EpVariable::J]) {
        Ok(sols) => {
            let j = sols[0].values[0];
            let target = eff.gamma_diss / 2.0;
            ok &= (j - target).abs() <= 1e-10 * s;
            notes.push(format!("J_EP(r=1)={j:.6}"));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("r=1 solve failed: {e}"));
        }
    }

    // Asymmetric losses shift it to ½√(Γ² + δΛ²/4).
    let eff10 = eff.with_r(10.0).expect("valid ratio");
    match spectrum::solve_ep(&eff10, &[EpVariable::J]) {
        Ok(sols) => {
            let j = sols[0].values[0];
            let dl = eff10.lambda_a - eff10.lambda_b;
            let target = 0.5 * (eff10.gamma_diss.powi(2) + 0.25 * dl * dl).sqrt();
            ok &= (j - target).abs() <= 1e-10 * s;
            let dm = DriftMatrix::from_effective(&sols[0].params);
            let disc = dm.discriminant().norm();
            let rep = spectrum::spectral(&dm, tol::EP_DISCRIMINANT);
            ok &= disc < 1e-12 * s;
            ok &= rep.eigvec_overlap > 0.9999;
            notes.push(format!(
                "J_EP(r=10)={j:.6} |disc|={disc:.1e} overlap={:.6}",
                rep.eigvec_overlap
            ));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("r=10 solve failed: {e}"));
        }
    }

    // Past the critical detuning no real J closes the gap.
    let detuned = eff.with_delta_b_p(0.05);
    let infeasible = matches!(
        spectrum::solve_ep(&detuned, &[EpVariable::J]),
        Err(crate::error::Error::NoRealSolution)
    );
    ok &= infeasible;
    notes.push(format!("detuned 0.05 infeasible: {infeasible}"));

    CriterionOutcome {
        id: "H7",
        hard: true,
        passed: ok,
        measured: notes.join("; "),
        requirement: "J_EP=Γ/2 (r=1), shifted root with |disc|<1e-12 & overlap>0.9999 (r=10), no real solution past |Δ|>Γ".into(),
    }
}

/// Energy conservation with dissipation and drive switched off.
fn h8(s: f64) -> CriterionOutcome {
    let mut p = SystemParams::<f64>::zeroed();
    p.j = 0.02;
    p.gamma_m = 1.0; // irrelevant: the couplings to the lossy mode are zero
    let eff = p.reduce_to_effective().expect("reduces");
    let model = MomentModel::from_effective(&eff);
    let init = MomentState::coherent(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let opts = IntegrationOptions {
        ode: ode::Options {
            rtol: 1e-11,
            atol: 1e-14,
            ..ode::Options::default()
        },
        ..IntegrationOptions::default()
    };
    let grid = Grid::Uniform {
        t_end: 2500.0,
        samples: 251,
    };
    let traj = dynamics::integrate(&model, &init, &grid, &opts).expect("integrates");
    let drift = traj
        .e_a
        .iter()
        .zip(&traj.e_b)
        .map(|(a, b)| (a + b - 1.0).abs())
        .fold(0.0f64, f64::max);
    CriterionOutcome {
        id: "H8",
        hard: true,
        passed: drift < 1e-9 * s,
        measured: format!("max |E_A+E_B − 1| = {drift:.3e} over Jt ∈ [0,50]"),
        requirement: "conservative dynamics drift < 1e-9".into(),
    }
}

fn power_peak(eff: &Eff) -> (f64, f64, usize) {
    let model = MomentModel::from_effective(eff);
    let grid = Grid::Uniform {
        t_end: 250.0,
        samples: 2001,
    };
    let traj = dynamics::integrate(
        &model,
        &MomentState::vacuum(2),
        &grid,
        &IntegrationOptions::default(),
    )
    .expect("integrates");
    let mut peak = f64::NEG_INFINITY;
    let mut at = 0.0;
    let mut maxima = 0;
    for k in 0..traj.power.len() {
        if traj.power[k] > peak {
            peak = traj.power[k];
            at = traj.times[k];
        }
        if k > 0
            && k + 1 < traj.power.len()
            && traj.power[k] > traj.power[k - 1]
            && traj.power[k] > traj.power[k + 1]
            && traj.power[k] > 5e-3
        {
            maxima += 1;
        }
    }
    (peak, at * eff.j_direct, maxima)
}

/// Charging-power peaks against the published curve readings.
fn s1(s: f64) -> CriterionOutcome {
    let eff = baseline_eff();
    let (p0, jt0, _) = power_peak(&eff);
    let (p1, _, _) = power_peak(&eff.with_delta_b_p(0.01));
    let (p2, _, m2) = power_peak(&eff.with_delta_b_p(0.1));
    let ok = (p0 - 0.52).abs() <= 0.052 * s
        && (jt0 - 2.0).abs() <= 0.3
        && (p1 - 0.486).abs() <= 0.0486 * s
        && (p2 - 0.06).abs() <= 0.03 * s
        && m2 >= 2;
    CriterionOutcome {
        id: "S1",
        hard: false,
        passed: ok,
        measured: format!("peaks {p0:.4}@Jt={jt0:.2}, {p1:.4}, {p2:.4} with {m2} maxima"),
        requirement: "0.52±10% at Jt=2±0.3; 0.486±10%; ≈0.06±50% oscillating".into(),
    }
}

/// Strongly asymmetric loss ratios against the published curve readings.
/// The r=10 literature value 14.8 is not reproduced by either model here;
/// both give ≈26–28, so it is reported as a known discrepancy.
fn s2(s: f64) -> CriterionOutcome {
    let eff = baseline_eff();
    let low = eff.with_r(0.01).expect("valid ratio");
    let e_low_traj = analytic::closed_form_moments(200.0, &low)
        .expect("closed form")
        .e_b;
    let e_low_steady = analytic::steady_energies(&low).expect("stable").e_b;
    let high = eff.with_r(10.0).expect("valid ratio");
    let e_high_traj = analytic::closed_form_moments(200.0, &high)
        .expect("closed form")
        .e_b;
    let e_high_steady = analytic::steady_energies(&high).expect("stable").e_b;
    // The r=0.01 reference 87 matches the charging plateau, not the
    // mid-transient: check the plateau and report both.
    let ok = (e_low_steady - 87.0).abs() / 87.0 <= 0.15 * s;
    CriterionOutcome {
        id: "S2",
        hard: false,
        passed: ok,
        measured: format!(
            "r=0.01: E_B(Jt=4)={e_low_traj:.1}, plateau {e_low_steady:.1}; r=10: {e_high_traj:.1}/{e_high_steady:.1} vs quoted 14.8"
        ),
        requirement: "r=0.01 plateau within 15% of 87; r=10 reported, known discrepancy".into(),
    }
}

/// One-way lock vs exceptional-point lock across the feasible detuning band.
fn s3(s: f64) -> CriterionOutcome {
    let eff = baseline_eff();
    let steady_eb = |e: &Eff| analytic::steady_energies(e).map(|v| v.e_b);

    let nr0 = eff
        .nonreciprocal_locked(PhasePolicy::Free)
        .and_then(|e| steady_eb(&e))
        .expect("stable");
    let ep0 = spectrum::solve_ep(&eff, &[EpVariable::J])
        .map(|sols| sols[0].params)
        .and_then(|e| steady_eb(&e))
        .expect("feasible at zero detuning");
    let coincide = (ep0 - nr0).abs() / nr0 < 1e-3 * s;

    let mut feasible = 0usize;
    let mut violations = 0usize;
    let mut max_gain = 0.0f64;
    // Where the EP advantage stops: the largest |Δ| with the EP curve still on
    // top, and the deficit at the worst sample beyond it.
    let mut win_band = 0.0f64;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let n = 81;
    for k in 0..n {
        let delta = -0.04 + 0.08 * k as f64 / (n - 1) as f64;
        if delta == 0.0 {
            continue;
        }
        let base = eff.with_delta_b_p(delta);
        let e_nr = match base
            .nonreciprocal_locked(PhasePolicy::Free)
            .and_then(|e| steady_eb(&e))
        {
            Ok(v) => v,
            Err(_) => continue,
        };
        let e_ep = match spectrum::solve_ep(&base, &[EpVariable::J])
            .map(|sols| sols[0].params)
            .and_then(|e| steady_eb(&e))
        {
            Ok(v) => v,
            Err(_) => continue, // infeasible detuning
        };
        feasible += 1;
        if e_ep < e_nr - 1e-9 {
            violations += 1;
            if e_nr - e_ep > worst.2 - worst.1 {
                worst = (delta, e_ep, e_nr);
            }
        } else {
            win_band = win_band.max(delta.abs());
        }
        max_gain = max_gain.max(e_ep - e_nr);
    }
    let ok = coincide && violations == 0 && feasible >= 70;
    CriterionOutcome {
        id: "S3",
        hard: false,
        passed: ok,
        measured: format!(
            "Δ=0 rel gap {:.1e}; {feasible} feasible detunings, max gain {max_gain:.2}, but EP wins only for |Δ| ≤ {win_band:.3}: \
             {violations} samples below the one-way curve (worst Δ={:.3}: {:.1} vs {:.1}; J_EP → 0 as |Δ| → Γ)",
            (ep0 - nr0).abs() / nr0,
            worst.0,
            worst.1,
            worst.2
        ),
        requirement: "curves coincide at Δ=0 (<0.1%), EP lock never lower elsewhere".into(),
    }
}
