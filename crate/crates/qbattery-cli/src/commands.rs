//! One function per subcommand; each returns the process exit code.

use qbattery::csvio::{Table, Value};
use qbattery::dynamics::{self, Grid, IntegrationOptions, MomentModel, MomentState};
use qbattery::experiments::{self, ModelChoice, SweepSpec, TimeSpec, FIGURE_NAMES};
use qbattery::spectrum::{self, DriftMatrix};
use qbattery::{analytic, tol, validate as checks};
use qbattery::{Error, Result, SystemParams64};

use crate::output::{
    self, point_meta, trajectory_table, write_meta, write_table, EFF_TRAJ_COLUMNS,
};
use crate::params;
use crate::{
    AnalyticArgs, EpArgs, FiguresArgs, ReduceArgs, SimulateArgs, SteadyArgs, SweepArgs,
    ValidateArgs,
};

fn kv(name: &str, value: impl std::fmt::Display) {
    println!("  {name:<16} {value}");
}

fn complex_str(z: num_complex::Complex<f64>) -> String {
    // + 0.0 folds negative zero so the sign of a vanishing part is not noise
    format!("{}{:+}i", z.re + 0.0, z.im + 0.0)
}

pub fn reduce(args: &ReduceArgs) -> Result<u8> {
    let p = args.params.resolve()?;
    let eff = p.reduce_to_effective()?;
    let report = p.validate_adiabatic();

    println!("reduced two-mode parameters");
    kv("delta_a_p", eff.delta_a_p);
    kv("delta_b_p", eff.delta_b_p);
    kv("gamma_a_eff", eff.gamma_a_eff);
    kv("gamma_b_eff", eff.gamma_b_eff);
    kv("g_coh", eff.g_coh);
    kv("gamma_diss", eff.gamma_diss);
    kv("j_direct", eff.j_direct);
    kv("phi", eff.phi);
    kv("j_plus", complex_str(eff.j_plus));
    kv("j_minus", complex_str(eff.j_minus));
    kv("lambda_a", eff.lambda_a);
    kv("lambda_b", eff.lambda_b);
    kv("epsilon", eff.epsilon);
    kv("kappa_a", eff.kappa_a);
    kv("kappa_b", eff.kappa_b);

    println!("timescale separation");
    kv(
        "loss margin",
        format!(
            "{:.3} (threshold {}, {})",
            report.loss_margin,
            report.loss_threshold,
            if report.loss_ok { "ok" } else { "violated" }
        ),
    );
    kv(
        "coupling margin",
        format!(
            "{:.3} (threshold {}, {})",
            report.coupling_margin,
            report.coupling_threshold,
            if report.coupling_ok { "ok" } else { "violated" }
        ),
    );
    kv("regime", if report.pass() { "pass" } else { "marginal" });

    if args.json {
        let mut effective = experiments::effective_param_map(&eff);
        effective.insert("re_j_plus".into(), eff.j_plus.re);
        effective.insert("im_j_plus".into(), eff.j_plus.im);
        effective.insert("re_j_minus".into(), eff.j_minus.re);
        effective.insert("im_j_minus".into(), eff.j_minus.im);
        let body = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "base_params": experiments::system_param_map(&p),
            "effective_params": effective,
            "adiabatic": {
                "loss_margin": report.loss_margin,
                "loss_threshold": report.loss_threshold,
                "loss_ok": report.loss_ok,
                "coupling_margin": report.coupling_margin,
                "coupling_threshold": report.coupling_threshold,
                "coupling_ok": report.coupling_ok,
                "pass": report.pass(),
            },
            "tolerances": experiments::tolerance_map(),
            "timestamp_unix": output::now_unix(),
        });
        std::fs::create_dir_all(&args.out.out_dir)?;
        let path = args.out.out_dir.join("reduce.json");
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&body).expect("plain data") + "\n",
        )?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn integration_options(rtol: Option<f64>, atol: Option<f64>) -> IntegrationOptions<f64> {
    let mut opts = IntegrationOptions::default();
    if let Some(r) = rtol {
        opts.ode.rtol = r;
    }
    if let Some(a) = atol {
        opts.ode.atol = a;
    }
    opts
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    let p = args.params.resolve()?;
    let eff = p.reduce_to_effective()?;
    let model = params::parse_model(&args.model)?;
    let grid = Grid::Uniform {
        t_end: args.t_end,
        samples: args.samples,
    };
    let opts = integration_options(args.rtol, args.atol);
    let time = TimeSpec {
        t_end: args.t_end,
        samples: args.samples,
    };
    let dir = &args.out.out_dir;

    let emit = |name: &str, traj: &dynamics::Trajectory<f64>, which: ModelChoice| -> Result<()> {
        let csv = write_table(dir, name, &trajectory_table(traj))?;
        write_meta(
            dir,
            name,
            point_meta(name, &p, &eff, which, &time, &["trajectory"]),
        )?;
        println!("wrote {}", csv.display());
        Ok(())
    };

    match model {
        ModelChoice::Effective => {
            let m = MomentModel::from_effective(&eff);
            let traj = dynamics::integrate(&m, &MomentState::vacuum(2), &grid, &opts)?;
            emit(&args.name, &traj, model)?;
            report_endpoint(&traj);
        }
        ModelChoice::Full => {
            let m = MomentModel::from_full(&p);
            let traj = dynamics::integrate(&m, &MomentState::vacuum(3), &grid, &opts)?;
            emit(&args.name, &traj, model)?;
            report_endpoint(&traj);
        }
        ModelChoice::Both => {
            // Matched pair: the three-mode system is rebuilt from the reduced
            // parameters so the two trajectories describe the same physics.
            let full_p = SystemParams64::from_effective(&eff, p.gamma_m)?;
            let m_eff = MomentModel::from_effective(&eff);
            let m_full = MomentModel::from_full(&full_p);
            let t_eff = dynamics::integrate(&m_eff, &MomentState::vacuum(2), &grid, &opts)?;
            let t_full = dynamics::integrate(&m_full, &MomentState::vacuum(3), &grid, &opts)?;
            emit(
                &format!("{}_eff", args.name),
                &t_eff,
                ModelChoice::Effective,
            )?;
            emit(&format!("{}_full", args.name), &t_full, ModelChoice::Full)?;
            let scale = t_eff
                .e_b
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max)
                .max(1e-300);
            let dev = t_eff
                .e_b
                .iter()
                .zip(&t_full.e_b)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale;
            println!("max relative E_B deviation (full vs effective): {dev:.3e}");
        }
    }
    Ok(0)
}

fn report_endpoint(traj: &dynamics::Trajectory<f64>) {
    if let (Some(t), Some(eb), Some(eta)) = (traj.times.last(), traj.e_b.last(), traj.eta.last()) {
        println!("E_B({t}) = {eb:.6}, eta = {eta:.6}");
    }
}

pub fn analytic(args: &AnalyticArgs) -> Result<u8> {
    let p = args.params.resolve()?;
    let eff = p.reduce_to_effective()?;
    let times = Grid::Uniform {
        t_end: args.t_end,
        samples: args.samples,
    }
    .times()?;
    let mut table = Table::new(&EFF_TRAJ_COLUMNS);
    for &t in &times {
        let m = analytic::closed_form_moments(t, &eff)?;
        let power = analytic::power_analytic(t, &eff)?;
        table.push(
            vec![
                t, m.amp_a.re, m.amp_a.im, m.amp_b.re, m.amp_b.im, m.n_aa, m.n_bb, m.n_ab.re,
                m.n_ab.im, m.e_a, m.e_b, m.eta, power,
            ]
            .into_iter()
            .map(Value::from)
            .collect(),
        );
    }
    let time = TimeSpec {
        t_end: args.t_end,
        samples: args.samples,
    };
    let csv = write_table(&args.out.out_dir, &args.name, &table)?;
    write_meta(
        &args.out.out_dir,
        &args.name,
        point_meta(
            &args.name,
            &p,
            &eff,
            ModelChoice::Effective,
            &time,
            &["trajectory"],
        ),
    )?;
    println!("wrote {}", csv.display());
    Ok(0)
}

pub fn steady(args: &SteadyArgs) -> Result<u8> {
    let p = args.params.resolve()?;
    let eff = p.reduce_to_effective()?;
    let s = dynamics::steady_state(&eff)?;

    println!("steady state");
    kv("amp_a", complex_str(s.amp_a));
    kv("amp_b", complex_str(s.amp_b));
    kv("e_a", s.e_a);
    kv("e_b", s.e_b);
    kv("eta", s.eta);

    let mut table = Table::new(&["re_a", "im_a", "re_b", "im_b", "e_a", "e_b", "eta"]);
    table.push(
        vec![
            s.amp_a.re, s.amp_a.im, s.amp_b.re, s.amp_b.im, s.e_a, s.e_b, s.eta,
        ]
        .into_iter()
        .map(Value::from)
        .collect(),
    );
    let time = TimeSpec {
        t_end: f64::INFINITY,
        samples: 1,
    };
    let csv = write_table(&args.out.out_dir, &args.name, &table)?;
    write_meta(
        &args.out.out_dir,
        &args.name,
        point_meta(
            &args.name,
            &p,
            &eff,
            ModelChoice::Effective,
            &time,
            &["e_a", "e_b", "eta"],
        ),
    )?;
    println!("wrote {}", csv.display());
    Ok(0)
}

pub fn sweep(args: &SweepArgs) -> Result<u8> {
    let p = args.params.resolve()?;
    let mut spec = SweepSpec::point(p);
    spec.axes = args
        .axes
        .iter()
        .map(|s| params::parse_axis(s))
        .collect::<Result<_>>()?;
    if !args.outputs.is_empty() {
        spec.outputs = args
            .outputs
            .iter()
            .map(|s| params::parse_output(s))
            .collect::<Result<_>>()?;
    }
    spec.time = TimeSpec {
        t_end: args.t_end,
        samples: args.samples,
    };
    spec.model = params::parse_model(&args.model)?;
    match args.lock.as_str() {
        "none" => {}
        "nonreciprocal" => spec.nonreciprocal_lock = true,
        "ep" => spec.ep_lock = true,
        other => {
            return Err(Error::InvalidParam {
                name: "--lock",
                message: format!("expected none|nonreciprocal|ep, got `{other}`"),
            })
        }
    }

    let out = experiments::run_sweep(&spec)?;
    let failures = out.failures;
    let points = out.meta.points;
    let csv = write_table(&args.out.out_dir, &args.name, &out.table)?;
    write_meta(&args.out.out_dir, &args.name, out.meta)?;
    println!("wrote {}", csv.display());
    println!("{points} points, {failures} failed");
    Ok(if failures > 0 { 2 } else { 0 })
}

pub fn ep(args: &EpArgs) -> Result<u8> {
    let p = args.params.resolve()?;
    let eff = p.reduce_to_effective()?;
    let vars = args
        .free
        .iter()
        .map(|s| params::parse_ep_var(s))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(&["free_var", "value", "residual", "overlap"]);
    let solutions = match spectrum::solve_ep(&eff, &vars) {
        Ok(sols) => sols,
        Err(Error::NoRealSolution) => {
            println!(
                "no exceptional point is reachable by adjusting {:?}",
                args.free
            );
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    for sol in &solutions {
        let dm = DriftMatrix::from_effective(&sol.params);
        let overlap = spectrum::spectral(&dm, tol::EP_DISCRIMINANT).eigvec_overlap;
        let mut shown = Vec::new();
        for (&var, &value) in vars.iter().zip(&sol.values) {
            let name = params::ep_var_name(var);
            table.push(vec![
                Value::from(name),
                Value::Num(value),
                Value::Num(sol.residual),
                Value::Num(overlap),
            ]);
            shown.push(format!("{name} = {value}"));
        }
        println!(
            "{} (residual {:.2e}, eigenvector overlap {:.6})",
            shown.join(", "),
            sol.residual,
            overlap
        );
    }

    let time = TimeSpec {
        t_end: 0.0,
        samples: 0,
    };
    let names: Vec<&str> = args.free.iter().map(String::as_str).collect();
    let mut meta = point_meta(&args.name, &p, &eff, ModelChoice::Effective, &time, &names);
    meta.points = solutions.len();
    let csv = write_table(&args.out.out_dir, &args.name, &table)?;
    write_meta(&args.out.out_dir, &args.name, meta)?;
    println!("wrote {}", csv.display());
    Ok(0)
}

pub fn figures(args: &FiguresArgs) -> Result<u8> {
    let p = args.params.resolve()?;
    let model = params::parse_model(&args.model)?;
    let names: Vec<String> = if args.figures.is_empty() {
        FIGURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.figures.clone()
    };

    let mut failures = 0;
    for name in &names {
        let fig = experiments::figure_by_name(name, &p, model)?;
        failures += fig.meta.failures;
        let csv = write_table(&args.out.out_dir, &fig.name, &fig.table)?;
        write_meta(&args.out.out_dir, &fig.name, fig.meta)?;
        println!("wrote {}", csv.display());
    }
    if failures > 0 {
        println!("{failures} grid points failed; see the status columns");
    }
    Ok(if failures > 0 { 2 } else { 0 })
}

pub fn validate(args: &ValidateArgs) -> Result<u8> {
    let outcomes = checks::run_all(args.tol_scale);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let hard_failed = outcomes.iter().filter(|o| o.hard && !o.passed).count();
    let hard_total = outcomes.iter().filter(|o| o.hard).count();
    let soft_flagged = outcomes.iter().filter(|o| !o.hard && !o.passed).count();
    let soft_total = outcomes.len() - hard_total;
    println!(
        "hard: {}/{hard_total} passed; soft: {}/{soft_total} clean",
        hard_total - hard_failed,
        soft_total - soft_flagged
    );
    Ok(if hard_failed > 0 { 1 } else { 0 })
}
