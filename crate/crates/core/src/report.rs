//! CSV products of each command. Every file opens with a `#` comment line
//! naming the command, the config hash and the seed, then a header row.

use std::io::Write;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::harness::{
    improvement_report, run_stability_grid, sweep_strategies, StabilityMap, SweepOutcome,
};
use crate::lqg::GainSet;
use crate::planner::{plan_footprints, plan_walk, swing_position};
use crate::walker::{simulate_walk, Strategy, TrialResult};

/// A named CSV document.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub fn write_csv<W: Write, T: Serialize>(
    mut out: W,
    comment: &str,
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    writeln!(out, "# {comment}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_file<T: Serialize>(
    name: &str,
    comment: &str,
    rows: impl IntoIterator<Item = T>,
) -> Result<OutputFile> {
    let mut bytes = Vec::new();
    write_csv(&mut bytes, comment, rows)?;
    Ok(OutputFile {
        name: name.into(),
        bytes,
    })
}

fn comment(command: &str, cfg: &RunConfig) -> String {
    format!("dcmwalk {command} config={} seed={}", cfg.hash(), cfg.seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanRow {
    pub t: f64,
    pub zmp_x: f64,
    pub zmp_y: f64,
    pub com_x: f64,
    pub com_y: f64,
    pub comd_x: f64,
    pub comd_y: f64,
    pub dcm_x: f64,
    pub dcm_y: f64,
    pub swing_x: f64,
    pub swing_y: f64,
    pub swing_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FootprintRow {
    pub index: usize,
    pub side: &'static str,
    pub x: f64,
    pub y: f64,
}

/// Sampled reference of the configured example walk, to one second past
/// the final weight shift.
pub fn plan_rows(cfg: &RunConfig) -> Result<(Vec<PlanRow>, Vec<FootprintRow>)> {
    let setup = cfg.plan_setup();
    setup.validate()?;
    let omega = setup.omega()?;
    let plan = plan_footprints(setup.command, setup.n_steps, &setup.gait, Default::default())?;
    let reference = plan_walk(&plan, &setup.gait, 0.0, omega);
    let n = ((reference.end_time() + 1.0) / setup.dt).ceil() as usize;
    let rows = (0..=n)
        .map(|k| {
            let t = k as f64 * setup.dt;
            let f = reference.sample(t);
            let s = swing_position(&plan, &reference, t, setup.gait.swing_height);
            PlanRow {
                t,
                zmp_x: f.zmp.x,
                zmp_y: f.zmp.y,
                com_x: f.com.x,
                com_y: f.com.y,
                comd_x: f.com_velocity.x,
                comd_y: f.com_velocity.y,
                dcm_x: f.dcm.x,
                dcm_y: f.dcm.y,
                swing_x: s[0],
                swing_y: s[1],
                swing_z: s[2],
            }
        })
        .collect();
    let feet = plan
        .footprints
        .iter()
        .map(|f| FootprintRow {
            index: f.index,
            side: f.side.as_str(),
            x: f.position.x,
            y: f.position.y,
        })
        .collect();
    Ok((rows, feet))
}

pub fn plan_outputs(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let (rows, feet) = plan_rows(cfg)?;
    let c = comment("plan", cfg);
    Ok(vec![
        csv_file("plan.csv", &c, rows)?,
        csv_file("footprints.csv", &c, feet)?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainRow {
    pub matrix: &'static str,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

pub fn gain_rows(g: &GainSet) -> Vec<GainRow> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, rows: usize, cols: usize, at: &dyn Fn(usize, usize) -> f64| {
        for r in 0..rows {
            for c in 0..cols {
                out.push(GainRow {
                    matrix: name,
                    row: r,
                    col: c,
                    value: at(r, c),
                });
            }
        }
    };
    push("K", 1, 3, &|_, c| g.k[c]);
    push("L", 2, 2, &|r, c| g.l[(r, c)]);
    push("A_d", 2, 2, &|r, c| g.system.a[(r, c)]);
    push("B_d", 2, 1, &|r, _| g.system.b[r]);
    push("Q", 3, 3, &|r, c| g.q[(r, c)]);
    push("R", 1, 1, &|_, _| g.r);
    push("P_lqr", 3, 3, &|r, c| g.lqr_p[(r, c)]);
    push("P_kalman", 2, 2, &|r, c| g.kalman_p[(r, c)]);
    out
}

pub fn gains_output(cfg: &RunConfig, command: &str, g: &GainSet) -> Result<OutputFile> {
    csv_file("gains.csv", &comment(command, cfg), gain_rows(g))
}

/// Noisy forward walk; returns the trial and its files.
pub fn walk_outputs(cfg: &RunConfig) -> Result<(TrialResult, Vec<OutputFile>)> {
    let setup = cfg.walk_setup();
    let trial = simulate_walk(&setup, None, &[])?;
    let c = comment("walk", cfg);
    let files = vec![csv_file("walk.csv", &c, trial.log.iter())?];
    Ok((trial, files))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub c0: f64,
    pub cdot0: f64,
    pub verdict: &'static str,
    pub capturable: bool,
    pub settle_time: Option<f64>,
}

pub fn scenario1_outputs(cfg: &RunConfig) -> Result<(StabilityMap, Vec<OutputFile>)> {
    let map = run_stability_grid(&cfg.stance_setup(), &cfg.grid_spec(), cfg.seed)?;
    let rows: Vec<GridRow> = map
        .cells
        .iter()
        .map(|c| GridRow {
            c0: c.com,
            cdot0: c.com_velocity,
            verdict: if c.recovered { "recovered" } else { "fallen" },
            capturable: c.capturable,
            settle_time: c.settle_time,
        })
        .collect();
    let files = vec![csv_file("grid.csv", &comment("scenario1", cfg), rows)?];
    Ok((map, files))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// `probe`, `f_max` or `improvement`.
    pub kind: &'static str,
    pub strategy: String,
    pub force: Option<f64>,
    pub verdict: Option<&'static str>,
    /// Improvement in percent, for `improvement` rows.
    pub percent: Option<f64>,
}

pub fn sweep_rows(outcomes: &[SweepOutcome]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for o in outcomes {
        for (f, v) in &o.probes {
            rows.push(SweepRow {
                kind: "probe",
                strategy: o.strategy.as_str().into(),
                force: Some(*f),
                verdict: Some(v.as_str()),
                percent: None,
            });
        }
    }
    for o in outcomes {
        rows.push(SweepRow {
            kind: "f_max",
            strategy: o.strategy.as_str().into(),
            force: Some(o.f_max),
            verdict: None,
            percent: None,
        });
    }
    let find = |s: Strategy| outcomes.iter().find(|o| o.strategy == s).map(|o| o.f_max);
    if let (Some(a), Some(b), Some(c)) = (
        find(Strategy::TorqueOnly),
        find(Strategy::Location),
        find(Strategy::LocationTime),
    ) {
        let imp = improvement_report(a, b, c);
        for (name, pct) in [
            ("location/torque_only", imp.location_over_torque),
            ("location+time/location", imp.time_over_location),
            ("location+time/torque_only", imp.combined_over_torque),
        ] {
            rows.push(SweepRow {
                kind: "improvement",
                strategy: name.into(),
                force: None,
                verdict: None,
                percent: Some(pct),
            });
        }
    }
    rows
}

pub fn scenario2_outputs(cfg: &RunConfig) -> Result<(Vec<SweepOutcome>, Vec<OutputFile>)> {
    let strategies = cfg.strategies()?;
    let outcomes = sweep_strategies(
        &cfg.sweep_setup(),
        &cfg.sweep_spec(Strategy::TorqueOnly),
        &strategies,
    )?;
    let files = vec![csv_file(
        "sweep.csv",
        &comment("scenario2", cfg),
        sweep_rows(&outcomes),
    )?];
    Ok((outcomes, files))
}

/// Per-cycle log of one push trial at `force`.
pub fn push_trial_output(cfg: &RunConfig, strategy: Strategy, force: f64) -> Result<OutputFile> {
    let mut setup = cfg.sweep_setup();
    setup.log = true;
    let trial = crate::harness::run_push_trial(&setup, &cfg.sweep_spec(strategy), force)?;
    let name = format!("trial_{}_{:.0}N.csv", strategy.as_str().replace('+', "_"), force);
    csv_file(&name, &comment("scenario2", cfg), trial.log.iter())
}
