//! Experiment runs and their result files.
//!
//! Tables are written with `Display` formatting of the scalar so that rerunning
//! a scenario reproduces them byte for byte. Only `summary.json` carries the
//! wall-clock time.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::deployment::{evaluate_strategy, DeploymentResult, Strategy};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{Experiment, Scenario};
use crate::trajectory::{min_time_mission, MissionResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command-line overrides of a trajectory experiment.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrajectoryOverrides<T> {
    pub rate_target: Option<T>,
    pub slot_duration: Option<T>,
    pub max_time: Option<T>,
}

impl<T: Scalar> TrajectoryOverrides<T> {
    pub fn is_empty(&self) -> bool {
        self.rate_target.is_none() && self.slot_duration.is_none() && self.max_time.is_none()
    }

    /// Applies the overrides and revalidates the scenario.
    pub fn apply(&self, scenario: &mut Scenario<T>) -> Result<()> {
        let Experiment::Trajectory(e) = &mut scenario.experiment else {
            return Err(Error::config("overrides need a trajectory experiment"));
        };
        if let Some(v) = self.rate_target {
            e.rate_target = v;
        }
        if let Some(v) = self.slot_duration {
            e.slot_duration = v;
        }
        if let Some(v) = self.max_time {
            e.max_time = v;
        }
        scenario.validate()
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct TrajectoryOutcome<T> {
    pub node_ids: Vec<String>,
    pub rate_target: T,
    pub with_irs: MissionResult<T>,
    pub without_irs: Option<MissionResult<T>>,
}

impl<T> TrajectoryOutcome<T> {
    pub fn feasible(&self) -> bool {
        self.with_irs.feasible
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct DeploymentOutcome<T> {
    pub user_ids: Vec<String>,
    pub n_budget: u32,
    pub results: Vec<DeploymentResult<T>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar"))]
pub enum RunResult<T> {
    Trajectory(TrajectoryOutcome<T>),
    Deployment(DeploymentOutcome<T>),
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct ResultBundle<T> {
    pub scenario: String,
    pub scenario_digest: String,
    pub tool_version: String,
    pub wall_time: f64,
    pub result: RunResult<T>,
}

pub fn run_trajectory<T: Scalar>(scenario: &Scenario<T>) -> Result<TrajectoryOutcome<T>> {
    let e = scenario.trajectory_experiment()?;
    let model = scenario.data_collection_model()?;
    let constraints = scenario.trajectory_constraints()?;
    let opts = scenario.mission_options()?;
    let with_irs = min_time_mission(&model, &constraints, e.rate_target, &opts)?;
    let without_irs = if e.compare_without_irs {
        Some(min_time_mission(
            &model.without_reflectors(),
            &constraints,
            e.rate_target,
            &opts,
        )?)
    } else {
        None
    };
    Ok(TrajectoryOutcome {
        node_ids: model.links.iter().map(|l| l.id.clone()).collect(),
        rate_target: e.rate_target,
        with_irs,
        without_irs,
    })
}

/// Evaluates the requested strategies, or the scenario's own list if `None`.
pub fn run_deployment<T: Scalar>(
    scenario: &Scenario<T>,
    strategies: Option<&[Strategy]>,
) -> Result<DeploymentOutcome<T>> {
    let e = scenario.deployment_experiment()?;
    let model = scenario.deployment_model()?;
    let n_budget = scenario.n_budget()?;
    let strategies = strategies.unwrap_or(&e.strategies);
    let results = strategies
        .iter()
        .map(|&s| evaluate_strategy(&model, s, n_budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeploymentOutcome {
        user_ids: model.users.iter().map(|u| u.id.clone()).collect(),
        n_budget,
        results,
    })
}

/// Runs the scenario's experiment and times it.
pub fn run_bundle<T: Scalar>(
    scenario: &Scenario<T>,
    digest: &str,
    strategies: Option<&[Strategy]>,
) -> Result<ResultBundle<T>> {
    let started = Instant::now();
    let result = match &scenario.experiment {
        Experiment::Trajectory(_) => RunResult::Trajectory(run_trajectory(scenario)?),
        Experiment::Deployment(_) => RunResult::Deployment(run_deployment(scenario, strategies)?),
    };
    Ok(ResultBundle {
        scenario: scenario.name.clone(),
        scenario_digest: digest.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        wall_time: started.elapsed().as_secs_f64(),
        result,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// One row per waypoint; the terminal waypoint has no slot, so its
/// time-sharing cells are empty.
pub fn trajectory_csv<T: Scalar>(mission: &MissionResult<T>, node_ids: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["slot", "t_seconds", "x", "y", "z"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(node_ids.iter().map(|id| format!("tau_{id}")));
    w.write_record(&header).map_err(csv_error)?;
    let traj = &mission.trajectory;
    let slots = traj.slots();
    for (t, p) in traj.waypoints.iter().enumerate() {
        let mut row = vec![
            t.to_string(),
            (T::from_usize_lossy(t) * traj.slot_duration).to_string(),
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
        ];
        for k in 0..node_ids.len() {
            row.push(if t < slots {
                mission.schedule.fractions[k][t].to_string()
            } else {
                String::new()
            });
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

pub fn deployment_csv<T: Scalar>(outcome: &DeploymentOutcome<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["strategy", "n1", "n2", "altitude"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(outcome.user_ids.iter().map(|id| format!("rate_{id}")));
    header.push("min_rate".into());
    w.write_record(&header).map_err(csv_error)?;
    for r in &outcome.results {
        let mut row = vec![
            r.strategy.label().to_string(),
            r.plan.n1.to_string(),
            r.plan.n2.to_string(),
            r.plan.uirs_altitude.to_string(),
        ];
        row.extend(r.per_user_rates.iter().map(|v| v.to_string()));
        row.push(r.min_rate.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

fn write(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

/// Writes the result tables and `summary.json` into `dir`, creating it if
/// needed. Returns the written paths.
pub fn write_bundle<T: Scalar>(dir: &Path, bundle: &ResultBundle<T>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    match &bundle.result {
        RunResult::Trajectory(o) => {
            write(
                dir.join("trajectory.csv"),
                &trajectory_csv(&o.with_irs, &o.node_ids)?,
                &mut written,
            )?;
            if let Some(base) = &o.without_irs {
                write(
                    dir.join("trajectory_without_irs.csv"),
                    &trajectory_csv(base, &o.node_ids)?,
                    &mut written,
                )?;
            }
        }
        RunResult::Deployment(o) => write(dir.join("deployment.csv"), &deployment_csv(o)?, &mut written)?,
    }
    let json = serde_json::to_string_pretty(bundle).map_err(|e| Error::Io(e.to_string()))?;
    write(dir.join("summary.json"), &(json + "\n"), &mut written)?;
    Ok(written)
}
