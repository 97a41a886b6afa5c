//! Parameter sweeps and canned figure datasets.
//!
//! A sweep evaluates a grid of up to two axes over the reduced parameter
//! space. Scalar outputs are steady-state quantities (power is the peak of
//! the charging transient); requesting `trajectory` switches to one row per
//! time sample. Points fail individually: a point whose lock cannot be
//! solved or whose steady state does not exist gets a status flag and NaN
//! cells, never aborting the run. Output ordering is row-major over the
//! axes, so repeated runs are byte-identical.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analytic;
use crate::csvio::{Table, Value};
use crate::dynamics::{self, Grid, IntegrationOptions, MomentModel, MomentState, Trajectory};
use crate::error::{Error, Result};
use crate::model::{EffectiveParams, PhasePolicy, SystemParams};
use crate::scalar::Real;
use crate::spectrum::{self, EpVariable};
use crate::tol;

/// Axis point distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One swept variable. Axis names address the reduced model: `delta_a_p`,
/// `delta_b_p`, `j`, `phi`, `r`, `kappa_b`, `epsilon`, `gamma`.
#[derive(Debug, Clone)]
pub struct AxisSpec<T> {
    pub name: String,
    pub min: T,
    pub max: T,
    pub count: usize,
    pub spacing: Spacing,
}

/// Trajectory sampling window.
#[derive(Debug, Clone, Copy)]
pub struct TimeSpec<T> {
    pub t_end: T,
    pub samples: usize,
}

/// Which dynamical model evaluates each point. `Full` rebuilds the
/// three-mode system from the reduced parameters (resonant auxiliary
/// cavity); `Both` reports the two side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelChoice {
    Effective,
    Full,
    Both,
}

impl ModelChoice {
    fn suffixes(self) -> &'static [&'static str] {
        match self {
            ModelChoice::Effective | ModelChoice::Full => &[""],
            ModelChoice::Both => &["_eff", "_full"],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelChoice::Effective => "effective",
            ModelChoice::Full => "full",
            ModelChoice::Both => "both",
        }
    }
}

/// Requested outputs. Scalars are steady values (power: transient peak);
/// `Trajectory` emits one row per time sample instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    EA,
    EB,
    Eta,
    Power,
    Trajectory,
}

impl OutputKind {
    fn column(self) -> &'static str {
        match self {
            OutputKind::EA => "e_a",
            OutputKind::EB => "e_b",
            OutputKind::Eta => "eta",
            OutputKind::Power => "power",
            OutputKind::Trajectory => "trajectory",
        }
    }
}

/// A declarative sweep description.
#[derive(Debug, Clone)]
pub struct SweepSpec<T> {
    pub base: SystemParams<T>,
    pub axes: Vec<AxisSpec<T>>,
    pub time: TimeSpec<T>,
    pub outputs: Vec<OutputKind>,
    pub model: ModelChoice,
    /// Re-solve (J, φ) at every point for a vanishing backward coupling.
    pub nonreciprocal_lock: bool,
    /// Re-solve J at every point for an exceptional point.
    pub ep_lock: bool,
}

impl<T: Real> SweepSpec<T> {
    /// Single-point spec with steady-state outputs, ready to customize.
    pub fn point(base: SystemParams<T>) -> Self {
        SweepSpec {
            base,
            axes: Vec::new(),
            time: TimeSpec {
                t_end: T::of(200.0),
                samples: 201,
            },
            outputs: vec![OutputKind::EA, OutputKind::EB, OutputKind::Eta],
            model: ModelChoice::Effective,
            nonreciprocal_lock: false,
            ep_lock: false,
        }
    }
}

/// Descriptive sidecar stored next to each CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub name: String,
    pub version: String,
    pub model: String,
    pub base_params: BTreeMap<String, f64>,
    pub effective_params: BTreeMap<String, f64>,
    pub axes: Vec<AxisMeta>,
    pub time: TimeMeta,
    pub outputs: Vec<String>,
    pub nonreciprocal_lock: bool,
    pub ep_lock: bool,
    pub points: usize,
    pub failures: usize,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisMeta {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeMeta {
    pub t_end: f64,
    pub samples: usize,
}

/// Completed sweep: the data table, its metadata, and how many grid points
/// failed (their rows carry a non-`ok` status).
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub table: Table,
    pub meta: Meta,
    pub failures: usize,
}

const AXIS_NAMES: &[&str] = &[
    "delta_a_p",
    "delta_b_p",
    "j",
    "phi",
    "r",
    "kappa_b",
    "epsilon",
    "gamma",
];

fn apply_axis<T: Real>(
    eff: &EffectiveParams<T>,
    name: &str,
    value: T,
) -> Result<EffectiveParams<T>> {
    match name {
        "delta_a_p" => Ok(eff.with_delta_a_p(value)),
        "delta_b_p" => Ok(eff.with_delta_b_p(value)),
        "j" => Ok(eff.with_j(value)),
        "phi" => Ok(eff.with_phase(value)),
        "r" => eff.with_r(value),
        "kappa_b" => eff.with_kappa_b(value),
        "epsilon" => eff.with_epsilon(value),
        "gamma" => eff.with_gamma(value),
        other => Err(Error::InvalidSweep(format!("unknown axis '{other}'"))),
    }
}

fn axis_values<T: Real>(axis: &AxisSpec<T>) -> Result<Vec<T>> {
    if !AXIS_NAMES.contains(&axis.name.as_str()) {
        return Err(Error::InvalidSweep(format!(
            "unknown axis '{}' (expected one of {})",
            axis.name,
            AXIS_NAMES.join(", ")
        )));
    }
    if axis.count < 2 {
        return Err(Error::InvalidSweep(format!(
            "axis '{}' needs at least 2 points, got {}",
            axis.name, axis.count
        )));
    }
    if !(axis.min < axis.max) {
        return Err(Error::InvalidSweep(format!(
            "axis '{}' needs min < max",
            axis.name
        )));
    }
    let n = axis.count;
    let mut values = Vec::with_capacity(n);
    match axis.spacing {
        Spacing::Linear => {
            let step = (axis.max - axis.min) / T::of((n - 1) as f64);
            for k in 0..n {
                values.push(axis.min + step * T::of(k as f64));
            }
        }
        Spacing::Log => {
            if !(axis.min > T::zero()) {
                return Err(Error::InvalidSweep(format!(
                    "axis '{}' is log-spaced and needs min > 0",
                    axis.name
                )));
            }
            let (lo, hi) = (axis.min.ln(), axis.max.ln());
            let step = (hi - lo) / T::of((n - 1) as f64);
            for k in 0..n {
                values.push((lo + step * T::of(k as f64)).exp());
            }
        }
    }
    *values.last_mut().expect("n >= 2") = axis.max;
    values[0] = axis.min;
    Ok(values)
}

fn status_of(err: &Error) -> &'static str {
    match err {
        Error::NoRealSolution => "ep_infeasible",
        Error::UnstableSystem { .. } => "unstable",
        _ => "error",
    }
}

fn lock_point<T: Real>(
    spec: &SweepSpec<T>,
    eff0: &EffectiveParams<T>,
    assignments: &[(&str, T)],
) -> Result<EffectiveParams<T>> {
    let mut eff = *eff0;
    for (name, value) in assignments {
        eff = apply_axis(&eff, name, *value)?;
    }
    if spec.nonreciprocal_lock {
        eff = eff.nonreciprocal_locked(PhasePolicy::Free)?;
    }
    if spec.ep_lock {
        let sols = spectrum::solve_ep(&eff, &[EpVariable::J])?;
        eff = sols[0].params;
    }
    Ok(eff)
}

fn steady_triple<T: Real>(eff: &EffectiveParams<T>, gamma_m: T, full: bool) -> Result<(T, T, T)> {
    if full {
        let p = SystemParams::from_effective(eff, gamma_m)?;
        let model = MomentModel::from_full(&p);
        let v = dynamics::steady_first_moments(&model)?;
        let e_a = p.omega_a * v[0].norm_sqr();
        let e_b = p.omega_b * v[1].norm_sqr();
        let total = e_a + e_b;
        let eta = if total.abs() < T::of(tol::RATIO_FLOOR) {
            T::zero()
        } else {
            e_b / total
        };
        Ok((e_a, e_b, eta))
    } else {
        let s = analytic::steady_energies(eff)?;
        Ok((s.e_a, s.e_b, s.eta))
    }
}

fn integrate_model<T: Real>(
    eff: &EffectiveParams<T>,
    gamma_m: T,
    full: bool,
    grid: &Grid<T>,
) -> Result<Trajectory<T>> {
    let opts = IntegrationOptions::default();
    if full {
        let p = SystemParams::from_effective(eff, gamma_m)?;
        let model = MomentModel::from_full(&p);
        dynamics::integrate(&model, &MomentState::vacuum(3), grid, &opts)
    } else {
        let model = MomentModel::from_effective(eff);
        dynamics::integrate(&model, &MomentState::vacuum(2), grid, &opts)
    }
}

fn peak_power<T: Real>(traj: &Trajectory<T>) -> T {
    traj.power.iter().cloned().fold(T::neg_infinity(), T::max)
}

/// Run a sweep. See the module docs for the table layout.
pub fn run_sweep<T: Real>(spec: &SweepSpec<T>) -> Result<SweepOutcome> {
    if spec.axes.len() > 2 {
        return Err(Error::InvalidSweep(format!(
            "at most 2 axes, got {}",
            spec.axes.len()
        )));
    }
    if spec.axes.len() == 2 && spec.axes[0].name == spec.axes[1].name {
        return Err(Error::InvalidSweep(format!(
            "both axes sweep '{}'",
            spec.axes[0].name
        )));
    }
    if spec.nonreciprocal_lock && spec.ep_lock {
        return Err(Error::InvalidSweep(
            "nonreciprocal_lock and ep_lock are mutually exclusive".into(),
        ));
    }
    if spec.outputs.is_empty() {
        return Err(Error::InvalidSweep("no outputs requested".into()));
    }
    let want_traj = spec.outputs.contains(&OutputKind::Trajectory);
    let mut scalars: Vec<OutputKind> = Vec::new();
    for o in &spec.outputs {
        if *o != OutputKind::Trajectory && !scalars.contains(o) {
            scalars.push(*o);
        }
    }
    if want_traj && scalars.is_empty() {
        scalars = vec![
            OutputKind::EA,
            OutputKind::EB,
            OutputKind::Eta,
            OutputKind::Power,
        ];
    }
    let needs_time = want_traj || scalars.contains(&OutputKind::Power);
    if !(spec.time.t_end > T::zero()) {
        return Err(Error::InvalidSweep("t_end must be positive".into()));
    }
    if needs_time && spec.time.samples < 3 {
        return Err(Error::InvalidSweep(
            "need at least 3 time samples for trajectory or power output".into(),
        ));
    }

    let eff0 = spec.base.reduce_to_effective()?;
    let grids: Vec<Vec<T>> = spec
        .axes
        .iter()
        .map(axis_values)
        .collect::<Result<Vec<_>>>()?;

    let suffixes = spec.model.suffixes();
    let mut columns: Vec<String> = spec.axes.iter().map(|a| a.name.clone()).collect();
    if want_traj {
        columns.push("t".into());
    }
    for o in &scalars {
        for suf in suffixes {
            columns.push(format!("{}{}", o.column(), suf));
        }
    }
    columns.push("status".into());
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&col_refs);

    let counts: Vec<usize> = grids.iter().map(Vec::len).collect();
    let points: usize = counts.iter().product();
    let value_cols = scalars.len() * suffixes.len() + usize::from(want_traj);

    let mut failures = 0usize;
    for flat in 0..points {
        // Row-major: the first axis is the slow index.
        let assignment: Vec<(&str, T)> = match counts.len() {
            0 => Vec::new(),
            1 => vec![(spec.axes[0].name.as_str(), grids[0][flat])],
            _ => {
                let (i, j) = (flat / counts[1], flat % counts[1]);
                vec![
                    (spec.axes[0].name.as_str(), grids[0][i]),
                    (spec.axes[1].name.as_str(), grids[1][j]),
                ]
            }
        };
        let prefix: Vec<Value> = assignment
            .iter()
            .map(|(_, v)| Value::Num(v.as_f64()))
            .collect();

        let result = evaluate_point(spec, &eff0, &assignment, &scalars, want_traj);
        match result {
            Ok(rows) => {
                for data in rows {
                    let mut row = prefix.clone();
                    row.extend(data.into_iter().map(Value::Num));
                    row.push(Value::Text("ok".into()));
                    table.push(row);
                }
            }
            Err(err) => {
                failures += 1;
                let mut row = prefix.clone();
                row.extend(std::iter::repeat_n(Value::Num(f64::NAN), value_cols));
                row.push(Value::Text(status_of(&err).into()));
                table.push(row);
            }
        }
    }

    let meta = Meta {
        name: "sweep".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        model: spec.model.label().into(),
        base_params: system_param_map(&spec.base),
        effective_params: effective_param_map(&eff0),
        axes: spec
            .axes
            .iter()
            .map(|a| AxisMeta {
                name: a.name.clone(),
                min: a.min.as_f64(),
                max: a.max.as_f64(),
                count: a.count,
                spacing: match a.spacing {
                    Spacing::Linear => "linear".into(),
                    Spacing::Log => "log".into(),
                },
            })
            .collect(),
        time: TimeMeta {
            t_end: spec.time.t_end.as_f64(),
            samples: spec.time.samples,
        },
        outputs: spec.outputs.iter().map(|o| o.column().into()).collect(),
        nonreciprocal_lock: spec.nonreciprocal_lock,
        ep_lock: spec.ep_lock,
        points,
        failures,
        tolerances: tolerance_map(),
        timestamp_unix: None,
    };
    Ok(SweepOutcome {
        table,
        meta,
        failures,
    })
}

/// One grid point: either a single scalar row or one row per time sample.
fn evaluate_point<T: Real>(
    spec: &SweepSpec<T>,
    eff0: &EffectiveParams<T>,
    assignment: &[(&str, T)],
    scalars: &[OutputKind],
    want_traj: bool,
) -> Result<Vec<Vec<f64>>> {
    let eff = lock_point(spec, eff0, assignment)?;
    let gamma_m = spec.base.gamma_m;
    let grid = Grid::Uniform {
        t_end: spec.time.t_end,
        samples: spec.time.samples,
    };
    let full_flags: Vec<bool> = match spec.model {
        ModelChoice::Effective => vec![false],
        ModelChoice::Full => vec![true],
        ModelChoice::Both => vec![false, true],
    };

    if want_traj {
        let trajs: Vec<Trajectory<T>> = full_flags
            .iter()
            .map(|&full| integrate_model(&eff, gamma_m, full, &grid))
            .collect::<Result<Vec<_>>>()?;
        let n = trajs[0].times.len();
        let mut rows = Vec::with_capacity(n);
        for k in 0..n {
            let mut row = Vec::with_capacity(1 + scalars.len() * trajs.len());
            row.push(trajs[0].times[k].as_f64());
            for o in scalars {
                for traj in &trajs {
                    let v = match o {
                        OutputKind::EA => traj.e_a[k],
                        OutputKind::EB => traj.e_b[k],
                        OutputKind::Eta => traj.eta[k],
                        OutputKind::Power => traj.power[k],
                        OutputKind::Trajectory => unreachable!(),
                    };
                    row.push(v.as_f64());
                }
            }
            rows.push(row);
        }
        return Ok(rows);
    }

    let needs_power = scalars.contains(&OutputKind::Power);
    let mut per_model: Vec<(T, T, T, T)> = Vec::new();
    for &full in &full_flags {
        let (e_a, e_b, eta) = steady_triple(&eff, gamma_m, full)?;
        let peak = if needs_power {
            peak_power(&integrate_model(&eff, gamma_m, full, &grid)?)
        } else {
            T::zero()
        };
        per_model.push((e_a, e_b, eta, peak));
    }
    let mut row = Vec::with_capacity(scalars.len() * per_model.len());
    for o in scalars {
        for m in &per_model {
            let v = match o {
                OutputKind::EA => m.0,
                OutputKind::EB => m.1,
                OutputKind::Eta => m.2,
                OutputKind::Power => m.3,
                OutputKind::Trajectory => unreachable!(),
            };
            row.push(v.as_f64());
        }
    }
    Ok(vec![row])
}

/// Flat name-to-value view of the physical parameters, as stored in metadata.
pub fn system_param_map<T: Real>(p: &SystemParams<T>) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("delta_a".into(), p.delta_a.as_f64());
    m.insert("delta_b".into(), p.delta_b.as_f64());
    m.insert("delta_c".into(), p.delta_c.as_f64());
    m.insert("g_a".into(), p.g_a.as_f64());
    m.insert("g_b".into(), p.g_b.as_f64());
    m.insert("j".into(), p.j.as_f64());
    m.insert("phi".into(), p.phi.as_f64());
    m.insert("epsilon".into(), p.epsilon.as_f64());
    m.insert("kappa_a".into(), p.kappa_a.as_f64());
    m.insert("kappa_b".into(), p.kappa_b.as_f64());
    m.insert("gamma_m".into(), p.gamma_m.as_f64());
    m.insert("omega_a".into(), p.omega_a.as_f64());
    m.insert("omega_b".into(), p.omega_b.as_f64());
    m
}

/// Flat name-to-value view of the reduced parameters, as stored in metadata.
pub fn effective_param_map<T: Real>(eff: &EffectiveParams<T>) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("delta_a_p".into(), eff.delta_a_p.as_f64());
    m.insert("delta_b_p".into(), eff.delta_b_p.as_f64());
    m.insert("gamma_a_eff".into(), eff.gamma_a_eff.as_f64());
    m.insert("gamma_b_eff".into(), eff.gamma_b_eff.as_f64());
    m.insert("g_coh".into(), eff.g_coh.as_f64());
    m.insert("gamma_diss".into(), eff.gamma_diss.as_f64());
    m.insert("j_direct".into(), eff.j_direct.as_f64());
    m.insert("phi".into(), eff.phi.as_f64());
    m.insert("epsilon".into(), eff.epsilon.as_f64());
    m.insert("kappa_a".into(), eff.kappa_a.as_f64());
    m.insert("kappa_b".into(), eff.kappa_b.as_f64());
    m.insert("lambda_a".into(), eff.lambda_a.as_f64());
    m.insert("lambda_b".into(), eff.lambda_b.as_f64());
    m.insert("omega_a".into(), eff.omega_a.as_f64());
    m.insert("omega_b".into(), eff.omega_b.as_f64());
    m
}

/// The numerical tolerances in force, as stored in metadata.
pub fn tolerance_map() -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("ode_rtol".into(), tol::ODE_RTOL);
    m.insert("ode_atol".into(), tol::ODE_ATOL);
    m.insert("phase_residual".into(), tol::PHASE_RESIDUAL);
    m.insert("ep_discriminant".into(), tol::EP_DISCRIMINANT);
    m.insert("closed_form_conditions".into(), tol::CLOSED_FORM_CONDITIONS);
    m.insert("stability_margin".into(), tol::STABILITY_MARGIN);
    m
}

/// A named figure dataset.
#[derive(Debug, Clone)]
pub struct FigureData {
    pub name: String,
    pub table: Table,
    pub meta: Meta,
}

#[allow(clippy::too_many_arguments)]
fn figure_meta<T: Real>(
    name: &str,
    base: &SystemParams<T>,
    eff0: &EffectiveParams<T>,
    model: ModelChoice,
    axes: Vec<AxisMeta>,
    time: TimeMeta,
    outputs: &[&str],
    points: usize,
    failures: usize,
    ep_lock: bool,
) -> Meta {
    Meta {
        name: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        model: model.label().into(),
        base_params: system_param_map(base),
        effective_params: effective_param_map(eff0),
        axes,
        time,
        outputs: outputs.iter().map(|s| (*s).into()).collect(),
        nonreciprocal_lock: false,
        ep_lock,
        points,
        failures,
        tolerances: tolerance_map(),
        timestamp_unix: None,
    }
}

fn list_axis_meta<T: Real>(name: &str, values: &[T], spacing: &str) -> AxisMeta {
    AxisMeta {
        name: name.into(),
        min: values.first().map(|v| v.as_f64()).unwrap_or(f64::NAN),
        max: values.last().map(|v| v.as_f64()).unwrap_or(f64::NAN),
        count: values.len(),
        spacing: spacing.into(),
    }
}

/// Shared builder for the trajectory-family figures: one curve per
/// parameter value, rows (param, t, J·t, output...).
#[allow(clippy::too_many_arguments)]
fn curve_figure<T: Real>(
    name: &str,
    base: &SystemParams<T>,
    model: ModelChoice,
    param: &str,
    values: &[T],
    spacing: &str,
    output: OutputKind,
    jt_max: f64,
    samples: usize,
) -> Result<FigureData> {
    let eff0 = base.reduce_to_effective()?;
    let j0 = eff0.j_direct;
    if !(j0 > T::zero()) {
        return Err(Error::InvalidParam {
            name: "j",
            message: "figure time axes are expressed in J·t and need J > 0".into(),
        });
    }
    let t_end = T::of(jt_max) / j0;
    let grid = Grid::Uniform { t_end, samples };
    let suffixes = model.suffixes();

    let mut columns = vec![param.to_string(), "t".into(), "jt".into()];
    for suf in suffixes {
        columns.push(format!("{}{}", output.column(), suf));
    }
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&col_refs);

    for &v in values {
        let eff = apply_axis(&eff0, param, v)?;
        let full_flags: Vec<bool> = match model {
            ModelChoice::Effective => vec![false],
            ModelChoice::Full => vec![true],
            ModelChoice::Both => vec![false, true],
        };
        let trajs: Vec<Trajectory<T>> = full_flags
            .iter()
            .map(|&full| integrate_model(&eff, base.gamma_m, full, &grid))
            .collect::<Result<Vec<_>>>()?;
        for k in 0..trajs[0].times.len() {
            let t = trajs[0].times[k];
            let mut row = vec![
                Value::Num(v.as_f64()),
                Value::Num(t.as_f64()),
                Value::Num((j0 * t).as_f64()),
            ];
            for traj in &trajs {
                let y = match output {
                    OutputKind::EA => traj.e_a[k],
                    OutputKind::EB => traj.e_b[k],
                    OutputKind::Eta => traj.eta[k],
                    OutputKind::Power => traj.power[k],
                    OutputKind::Trajectory => unreachable!(),
                };
                row.push(Value::Num(y.as_f64()));
            }
            table.push(row);
        }
    }
    let meta = figure_meta(
        name,
        base,
        &eff0,
        model,
        vec![list_axis_meta(param, values, spacing)],
        TimeMeta {
            t_end: t_end.as_f64(),
            samples,
        },
        &[output.column()],
        values.len(),
        0,
        false,
    );
    Ok(FigureData {
        name: name.into(),
        table,
        meta,
    })
}

/// Steady-state curve vs a single parameter: rows (param, output...).
fn steady_figure<T: Real>(
    name: &str,
    base: &SystemParams<T>,
    model: ModelChoice,
    param: &str,
    values: &[T],
    spacing: &str,
    output: OutputKind,
) -> Result<FigureData> {
    let eff0 = base.reduce_to_effective()?;
    let suffixes = model.suffixes();
    let mut columns = vec![param.to_string()];
    for suf in suffixes {
        columns.push(format!("{}{}", output.column(), suf));
    }
    columns.push("status".into());
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&col_refs);

    let full_flags: Vec<bool> = match model {
        ModelChoice::Effective => vec![false],
        ModelChoice::Full => vec![true],
        ModelChoice::Both => vec![false, true],
    };
    let mut failures = 0;
    for &v in values {
        let mut row = vec![Value::Num(v.as_f64())];
        let point = (|| -> Result<Vec<f64>> {
            let eff = apply_axis(&eff0, param, v)?;
            let mut out = Vec::new();
            for &full in &full_flags {
                let (e_a, e_b, eta) = steady_triple(&eff, base.gamma_m, full)?;
                out.push(
                    match output {
                        OutputKind::EA => e_a,
                        OutputKind::EB => e_b,
                        OutputKind::Eta => eta,
                        _ => unreachable!("steady figures output energies"),
                    }
                    .as_f64(),
                );
            }
            Ok(out)
        })();
        match point {
            Ok(vals) => {
                row.extend(vals.into_iter().map(Value::Num));
                row.push(Value::Text("ok".into()));
            }
            Err(err) => {
                failures += 1;
                row.extend(std::iter::repeat_n(Value::Num(f64::NAN), full_flags.len()));
                row.push(Value::Text(status_of(&err).into()));
            }
        }
        table.push(row);
    }
    let meta = figure_meta(
        name,
        base,
        &eff0,
        model,
        vec![list_axis_meta(param, values, spacing)],
        TimeMeta {
            t_end: 0.0,
            samples: 0,
        },
        &[output.column()],
        values.len(),
        failures,
        false,
    );
    Ok(FigureData {
        name: name.into(),
        table,
        meta,
    })
}

/// Steady battery energy with J locked to the one-way point vs locked to
/// the exceptional point, swept over `param`. Rows:
/// (param, j_nr, e_b_nr..., j_ep, e_b_ep..., diff..., status).
fn ep_compare_figure<T: Real>(
    name: &str,
    base: &SystemParams<T>,
    model: ModelChoice,
    param: &str,
    values: &[T],
    spacing: &str,
) -> Result<FigureData> {
    let eff0 = base.reduce_to_effective()?;
    let suffixes = model.suffixes();
    let mut columns = vec![param.to_string(), "j_nr".to_string()];
    for suf in suffixes {
        columns.push(format!("e_b_nr{}", suf));
    }
    columns.push("j_ep".into());
    for suf in suffixes {
        columns.push(format!("e_b_ep{}", suf));
    }
    for suf in suffixes {
        columns.push(format!("diff{}", suf));
    }
    columns.push("status".into());
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&col_refs);

    let full_flags: Vec<bool> = match model {
        ModelChoice::Effective => vec![false],
        ModelChoice::Full => vec![true],
        ModelChoice::Both => vec![false, true],
    };
    let nm = full_flags.len();
    let mut failures = 0;
    for &v in values {
        let mut row = vec![Value::Num(v.as_f64())];
        let point = (|| -> Result<(f64, Vec<f64>, f64, Vec<f64>)> {
            let eff = apply_axis(&eff0, param, v)?;
            let nr = eff.nonreciprocal_locked(PhasePolicy::Free)?;
            let mut e_nr = Vec::new();
            for &full in &full_flags {
                e_nr.push(steady_triple(&nr, base.gamma_m, full)?.1.as_f64());
            }
            let ep = spectrum::solve_ep(&eff, &[EpVariable::J])?
                .swap_remove(0)
                .params;
            let mut e_ep = Vec::new();
            for &full in &full_flags {
                e_ep.push(steady_triple(&ep, base.gamma_m, full)?.1.as_f64());
            }
            Ok((nr.j_direct.as_f64(), e_nr, ep.j_direct.as_f64(), e_ep))
        })();
        match point {
            Ok((j_nr, e_nr, j_ep, e_ep)) => {
                row.push(Value::Num(j_nr));
                row.extend(e_nr.iter().copied().map(Value::Num));
                row.push(Value::Num(j_ep));
                row.extend(e_ep.iter().copied().map(Value::Num));
                for k in 0..nm {
                    row.push(Value::Num(e_ep[k] - e_nr[k]));
                }
                row.push(Value::Text("ok".into()));
            }
            Err(err) => {
                failures += 1;
                row.extend(std::iter::repeat_n(Value::Num(f64::NAN), 3 * nm + 2));
                row.push(Value::Text(status_of(&err).into()));
            }
        }
        table.push(row);
    }
    let meta = figure_meta(
        name,
        base,
        &eff0,
        model,
        vec![list_axis_meta(param, values, spacing)],
        TimeMeta {
            t_end: 0.0,
            samples: 0,
        },
        &["e_b_nr", "e_b_ep", "diff"],
        values.len(),
        failures,
        true,
    );
    Ok(FigureData {
        name: name.into(),
        table,
        meta,
    })
}

fn log_values<T: Real>(min: f64, max: f64, count: usize) -> Vec<T> {
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (count - 1) as f64;
    let mut v: Vec<T> = (0..count)
        .map(|k| T::of((lo + step * k as f64).exp()))
        .collect();
    v[0] = T::of(min);
    v[count - 1] = T::of(max);
    v
}

const FIG_SAMPLES: usize = 2001;

/// Battery charge curves and charging power vs time.
///
/// a: E_B(t) for battery detunings {0, 0.01, 0.1} over J·t ∈ [0, 20];
/// b: η(t) on the same grid; c: E_B(t) for phases {π/2, π/3, π/4} at fixed
/// J (nonreciprocity broken off π/2); d: P(t) for the three detunings over
/// J·t ∈ [0, 5].
pub fn figure2<T: Real>(
    variant: char,
    base: &SystemParams<T>,
    model: ModelChoice,
) -> Result<FigureData> {
    let deltas = [T::zero(), T::of(0.01), T::of(0.1)];
    let phis = [
        T::of(std::f64::consts::FRAC_PI_2),
        T::of(std::f64::consts::FRAC_PI_3),
        T::of(std::f64::consts::FRAC_PI_4),
    ];
    match variant {
        'a' => curve_figure(
            "fig2a",
            base,
            model,
            "delta_b_p",
            &deltas,
            "list",
            OutputKind::EB,
            20.0,
            FIG_SAMPLES,
        ),
        'b' => curve_figure(
            "fig2b",
            base,
            model,
            "delta_b_p",
            &deltas,
            "list",
            OutputKind::Eta,
            20.0,
            FIG_SAMPLES,
        ),
        'c' => curve_figure(
            "fig2c",
            base,
            model,
            "phi",
            &phis,
            "list",
            OutputKind::EB,
            20.0,
            FIG_SAMPLES,
        ),
        'd' => curve_figure(
            "fig2d",
            base,
            model,
            "delta_b_p",
            &deltas,
            "list",
            OutputKind::Power,
            5.0,
            FIG_SAMPLES,
        ),
        other => Err(Error::InvalidParam {
            name: "variant",
            message: format!("figure2 has variants a-d, got '{other}'"),
        }),
    }
}

/// Loss-ratio studies, r = κ_b/κ_a.
///
/// a: E_B over (r, J·t); b: η over the same grid; c, d: steady E_B and η
/// vs r ∈ [0.01, 1000]; e: P over (r, J·t ∈ [0, 5]); f: P(t) at
/// r ∈ {0.1, 1, 10}.
pub fn figure3<T: Real>(
    variant: char,
    base: &SystemParams<T>,
    model: ModelChoice,
) -> Result<FigureData> {
    let r_map: Vec<T> = log_values(0.01, 100.0, 41);
    let r_steady: Vec<T> = log_values(0.01, 1000.0, 121);
    let r_cuts = [T::of(0.1), T::one(), T::of(10.0)];
    match variant {
        'a' => curve_figure(
            "fig3a",
            base,
            model,
            "r",
            &r_map,
            "log",
            OutputKind::EB,
            20.0,
            FIG_SAMPLES,
        ),
        'b' => curve_figure(
            "fig3b",
            base,
            model,
            "r",
            &r_map,
            "log",
            OutputKind::Eta,
            20.0,
            FIG_SAMPLES,
        ),
        'c' => steady_figure("fig3c", base, model, "r", &r_steady, "log", OutputKind::EB),
        'd' => steady_figure("fig3d", base, model, "r", &r_steady, "log", OutputKind::Eta),
        'e' => curve_figure(
            "fig3e",
            base,
            model,
            "r",
            &r_map,
            "log",
            OutputKind::Power,
            5.0,
            FIG_SAMPLES,
        ),
        'f' => curve_figure(
            "fig3f",
            base,
            model,
            "r",
            &r_cuts,
            "list",
            OutputKind::Power,
            5.0,
            FIG_SAMPLES,
        ),
        other => Err(Error::InvalidParam {
            name: "variant",
            message: format!("figure3 has variants a-f, got '{other}'"),
        }),
    }
}

/// One-way lock vs exceptional-point lock, steady battery energy.
///
/// a: vs r ∈ [0.1, 10] at zero detuning; b: vs Δ′_b ∈ [−0.04, 0.04] at
/// r = 1, marking detunings where no real-J exceptional point exists.
pub fn figure4<T: Real>(
    variant: char,
    base: &SystemParams<T>,
    model: ModelChoice,
) -> Result<FigureData> {
    match variant {
        'a' => {
            let rs: Vec<T> = log_values(0.1, 10.0, 41);
            ep_compare_figure("fig4a", base, model, "r", &rs, "log")
        }
        'b' => {
            let n = 81;
            let step = 0.08 / (n - 1) as f64;
            let deltas: Vec<T> = (0..n).map(|k| T::of(-0.04 + step * k as f64)).collect();
            ep_compare_figure("fig4b", base, model, "delta_b_p", &deltas, "linear")
        }
        other => Err(Error::InvalidParam {
            name: "variant",
            message: format!("figure4 has variants a-b, got '{other}'"),
        }),
    }
}

/// All figure names accepted by [`figure_by_name`].
pub const FIGURE_NAMES: &[&str] = &[
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f",
    "fig4a", "fig4b",
];

/// Dispatch by dataset name ("fig2a" .. "fig4b").
pub fn figure_by_name<T: Real>(
    name: &str,
    base: &SystemParams<T>,
    model: ModelChoice,
) -> Result<FigureData> {
    let variant = name.chars().last().unwrap_or(' ');
    match name {
        "fig2a" | "fig2b" | "fig2c" | "fig2d" => figure2(variant, base, model),
        "fig3a" | "fig3b" | "fig3c" | "fig3d" | "fig3e" | "fig3f" => figure3(variant, base, model),
        "fig4a" | "fig4b" => figure4(variant, base, model),
        other => Err(Error::InvalidParam {
            name: "figure",
            message: format!(
                "unknown figure '{other}' (expected one of {})",
                FIGURE_NAMES.join(", ")
            ),
        }),
    }
}
