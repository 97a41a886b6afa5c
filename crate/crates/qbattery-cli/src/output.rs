//! CSV and metadata emission. Every artifact is a `<name>.csv` next to a
//! `<name>.meta.json`; reruns with the same inputs produce byte-identical
//! files except for the metadata timestamp.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use qbattery::csvio::{Table, Value};
use qbattery::dynamics::Trajectory;
use qbattery::experiments::{self, Meta, ModelChoice, TimeMeta, TimeSpec};
use qbattery::{EffectiveParams64, Result, SystemParams64};

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_table(dir: &Path, name: &str, table: &Table) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.csv"));
    fs::write(&path, table.to_csv_string())?;
    Ok(path)
}

pub fn write_meta(dir: &Path, name: &str, mut meta: Meta) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    meta.timestamp_unix = Some(now_unix());
    let path = dir.join(format!("{name}.meta.json"));
    let body = serde_json::to_string_pretty(&meta).expect("metadata is plain data");
    fs::write(&path, body + "\n")?;
    Ok(path)
}

/// Metadata for a single-dataset command (no sweep axes).
pub fn point_meta(
    name: &str,
    base: &SystemParams64,
    eff: &EffectiveParams64,
    model: ModelChoice,
    time: &TimeSpec<f64>,
    outputs: &[&str],
) -> Meta {
    Meta {
        name: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        model: model.label().into(),
        base_params: experiments::system_param_map(base),
        effective_params: experiments::effective_param_map(eff),
        axes: Vec::new(),
        time: TimeMeta {
            t_end: time.t_end,
            samples: time.samples,
        },
        outputs: outputs.iter().map(|s| (*s).to_string()).collect(),
        nonreciprocal_lock: false,
        ep_lock: false,
        points: 1,
        failures: 0,
        tolerances: experiments::tolerance_map(),
        timestamp_unix: None,
    }
}

pub const EFF_TRAJ_COLUMNS: [&str; 13] = [
    "t", "re_a", "im_a", "re_b", "im_b", "n_aa", "n_bb", "re_n_ab", "im_n_ab", "e_a", "e_b", "eta",
    "power",
];

pub const FULL_TRAJ_COLUMNS: [&str; 15] = [
    "t", "re_a", "im_a", "re_b", "im_b", "re_c", "im_c", "n_aa", "n_bb", "re_n_ab", "im_n_ab",
    "e_a", "e_b", "eta", "power",
];

/// One row per sample; three-mode states get the auxiliary amplitude columns.
pub fn trajectory_table(traj: &Trajectory<f64>) -> Table {
    let three_mode = traj
        .states
        .first()
        .map(|s| s.n_modes() == 3)
        .unwrap_or(false);
    let mut table = if three_mode {
        Table::new(&FULL_TRAJ_COLUMNS)
    } else {
        Table::new(&EFF_TRAJ_COLUMNS)
    };
    for (k, state) in traj.states.iter().enumerate() {
        let a = state.amp(0);
        let b = state.amp(1);
        let ab = state.cross(0, 1);
        let mut row = vec![traj.times[k], a.re, a.im, b.re, b.im];
        if three_mode {
            let c = state.amp(2);
            row.extend([c.re, c.im]);
        }
        row.extend([
            state.occupation(0),
            state.occupation(1),
            ab.re,
            ab.im,
            traj.e_a[k],
            traj.e_b[k],
            traj.eta[k],
            traj.power[k],
        ]);
        table.push(row.into_iter().map(Value::from).collect());
    }
    table
}
