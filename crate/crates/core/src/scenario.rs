//! Scenario files: TOML documents describing one experiment.
//!
//! Unknown keys are rejected. Every optional field is filled with its default
//! on load, so emitting a loaded scenario writes the defaults out explicitly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{
    path_gain, LinkState, LinkStateRule, LinkStateRules, NodePair, PathLossModel, Position3D, RadioParams,
};
use crate::deployment::{DeploymentModel, GroundUser, Strategy};
use crate::error::{Error, Result};
use crate::irs::{covers, IrsSurface, SurfaceKind};
use crate::scalar::Scalar;
use crate::trajectory::{
    DataCollectionModel, ImproveOptions, MissionOptions, ReflectedPath, SensorLink, TrajectoryConstraints,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Uav,
    Bs,
    SensorNode,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Node<T> {
    pub id: String,
    pub role: NodeRole,
    pub position: Position3D<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TrajectoryExperiment<T> {
    /// Id used for the UAV in link-state rules.
    #[serde(default = "default_uav_id")]
    pub uav: String,
    pub start: Position3D<T>,
    pub end: Position3D<T>,
    pub fixed_altitude: T,
    pub v_max: T,
    #[serde(default = "default_slot_duration")]
    pub slot_duration: T,
    /// Common per-node average rate target, bps/Hz.
    pub rate_target: T,
    #[serde(default = "default_max_time")]
    pub max_time: T,
    #[serde(default = "default_direct_class")]
    pub direct_class: String,
    #[serde(default = "default_uav_irs_class")]
    pub uav_irs_class: String,
    #[serde(default = "default_irs_node_class")]
    pub irs_node_class: String,
    /// Class used by any link that resolves to NLoS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nlos_class: Option<String>,
    /// Also solve the same mission with every surface switched off.
    #[serde(default)]
    pub compare_without_irs: bool,
    #[serde(default = "default_temperature")]
    pub temperature: T,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_relative_tolerance")]
    pub relative_tolerance: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentExperiment {
    pub bs: String,
    pub users: Vec<String>,
    pub aerial_surface: String,
    pub terrestrial_surface: String,
    pub n_budget: i64,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_los_class")]
    pub los_class: String,
    #[serde(default = "default_nlos_class")]
    pub nlos_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Experiment<T> {
    Trajectory(TrajectoryExperiment<T>),
    Deployment(DeploymentExperiment),
}

impl<T> Experiment<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Trajectory(_) => "trajectory",
            Experiment::Deployment(_) => "deployment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Scenario<T> {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub radio: RadioParams<T>,
    /// Link class name to path-loss model.
    pub path_loss: BTreeMap<String, PathLossModel<T>>,
    pub nodes: Vec<Node<T>>,
    #[serde(default)]
    pub surfaces: Vec<IrsSurface<T>>,
    #[serde(default)]
    pub link_state_rules: Vec<LinkStateRule<T>>,
    pub experiment: Experiment<T>,
}

fn default_uav_id() -> String {
    "uav".into()
}
fn default_slot_duration<T: Scalar>() -> T {
    T::lit(0.1)
}
fn default_max_time<T: Scalar>() -> T {
    T::lit(60.0)
}
fn default_direct_class() -> String {
    "uav_sn".into()
}
fn default_uav_irs_class() -> String {
    "uav_irs".into()
}
fn default_irs_node_class() -> String {
    "irs_sn".into()
}
fn default_temperature<T: Scalar>() -> T {
    T::lit(0.05)
}
fn default_max_iterations() -> usize {
    200
}
fn default_relative_tolerance<T: Scalar>() -> T {
    T::lit(1e-4)
}
fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}
fn default_los_class() -> String {
    "los".into()
}
fn default_nlos_class() -> String {
    "nlos".into()
}

/// Hex SHA-256 of a scenario file's bytes.
pub fn scenario_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario<T: Scalar>(path: impl AsRef<Path>) -> Result<Scenario<T>> {
    let text =
        std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    Scenario::from_toml_str(&text)
}

impl<T: Scalar> Scenario<T> {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn node(&self, id: &str) -> Option<&Node<T>> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn surface(&self, id: &str) -> Option<&IrsSurface<T>> {
        self.surfaces.iter().find(|s| s.id == id)
    }

    pub fn nodes_with_role(&self, role: NodeRole) -> impl Iterator<Item = &Node<T>> {
        self.nodes.iter().filter(move |n| n.role == role)
    }

    pub fn rules(&self) -> Result<LinkStateRules<T>> {
        LinkStateRules::new(self.link_state_rules.clone())
    }

    fn class(&self, field: &str, name: &str) -> Result<PathLossModel<T>> {
        self.path_loss
            .get(name)
            .copied()
            .ok_or_else(|| Error::validation(field, format!("unknown path-loss class `{name}`")))
    }

    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        for (name, model) in &self.path_loss {
            model
                .validate()
                .map_err(|_| Error::validation(format!("path_loss.{name}.exponent"), "must be finite and >= 1"))?;
        }
        let mut ids: Vec<&str> = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id.is_empty() {
                return Err(Error::validation(format!("nodes[{i}].id"), "must not be empty"));
            }
            if ids.contains(&n.id.as_str()) {
                return Err(Error::validation(
                    format!("nodes[{i}].id"),
                    format!("duplicate id `{}`", n.id),
                ));
            }
            if !n.position.is_finite() || n.position.z < T::zero() {
                return Err(Error::validation(
                    format!("nodes[{i}].position"),
                    "must be finite with z >= 0",
                ));
            }
            ids.push(&n.id);
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            if s.id.is_empty() || ids.contains(&s.id.as_str()) {
                return Err(Error::validation(
                    format!("surfaces[{i}].id"),
                    format!("empty or duplicate id `{}`", s.id),
                ));
            }
            s.validate()?;
            ids.push(&s.id);
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            for c in s.covered_node_ids.iter().flatten() {
                if self.node(c).is_none() {
                    return Err(Error::validation(
                        format!("surfaces[{i}].covered_node_ids"),
                        format!("unknown node `{c}`"),
                    ));
                }
            }
        }
        let rules = self.rules()?;
        match &self.experiment {
            Experiment::Trajectory(e) => {
                ids.push(&e.uav);
                self.validate_trajectory(e)?;
            }
            Experiment::Deployment(e) => self.validate_deployment(e)?,
        }
        for (i, r) in rules.iter().enumerate() {
            for end in &r.between {
                if !ids.contains(&end.as_str()) {
                    return Err(Error::validation(
                        format!("link_state_rules[{i}].between"),
                        format!("unknown endpoint `{end}`"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_trajectory(&self, e: &TrajectoryExperiment<T>) -> Result<()> {
        self.constraints_of(e).validate().map_err(|err| match err {
            Error::Validation { field, message } => {
                Error::validation(format!("experiment.trajectory.{field}"), message)
            }
            other => other,
        })?;
        if !(e.rate_target > T::zero()) || !e.rate_target.is_finite() {
            return Err(Error::validation("experiment.trajectory.rate_target", "must be > 0"));
        }
        if !(e.max_time > T::zero()) || !e.max_time.is_finite() {
            return Err(Error::validation("experiment.trajectory.max_time", "must be > 0"));
        }
        if !(e.temperature > T::zero()) {
            return Err(Error::validation("experiment.trajectory.temperature", "must be > 0"));
        }
        if !(e.relative_tolerance >= T::zero()) {
            return Err(Error::validation(
                "experiment.trajectory.relative_tolerance",
                "must be >= 0",
            ));
        }
        self.class("experiment.trajectory.direct_class", &e.direct_class)?;
        self.class("experiment.trajectory.uav_irs_class", &e.uav_irs_class)?;
        self.class("experiment.trajectory.irs_node_class", &e.irs_node_class)?;
        if let Some(c) = &e.nlos_class {
            self.class("experiment.trajectory.nlos_class", c)?;
        }
        if self.nodes_with_role(NodeRole::SensorNode).next().is_none() {
            return Err(Error::validation(
                "nodes",
                "trajectory experiment needs at least one sensor_node",
            ));
        }
        if self.node(&e.uav).is_some_and(|n| n.role != NodeRole::Uav) {
            return Err(Error::validation(
                "experiment.trajectory.uav",
                "id is used by a non-UAV node",
            ));
        }
        let min_time = e.start.distance(&e.end) / e.v_max;
        if min_time > e.max_time {
            return Err(Error::validation(
                "experiment.trajectory.max_time",
                "shorter than the straight flight at full speed",
            ));
        }
        self.data_collection_model().map(|_| ())
    }

    fn validate_deployment(&self, e: &DeploymentExperiment) -> Result<()> {
        if e.n_budget < 0 || e.n_budget > i64::from(u32::MAX) {
            return Err(Error::validation(
                "experiment.deployment.n_budget",
                "must be a nonnegative integer",
            ));
        }
        match self.node(&e.bs) {
            Some(n) if n.role == NodeRole::Bs => {}
            _ => {
                return Err(Error::validation(
                    "experiment.deployment.bs",
                    format!("`{}` is not a bs node", e.bs),
                ))
            }
        }
        if e.users.is_empty() {
            return Err(Error::validation(
                "experiment.deployment.users",
                "at least one user required",
            ));
        }
        for u in &e.users {
            match self.node(u) {
                Some(n) if n.role == NodeRole::User => {}
                _ => {
                    return Err(Error::validation(
                        "experiment.deployment.users",
                        format!("`{u}` is not a user node"),
                    ))
                }
            }
        }
        match self.surface(&e.aerial_surface) {
            Some(s) if s.kind == SurfaceKind::Aerial => {}
            _ => {
                return Err(Error::validation(
                    "experiment.deployment.aerial_surface",
                    "must name an aerial surface",
                ))
            }
        }
        match self.surface(&e.terrestrial_surface) {
            Some(s) if s.kind == SurfaceKind::Terrestrial => {}
            _ => {
                return Err(Error::validation(
                    "experiment.deployment.terrestrial_surface",
                    "must name a terrestrial surface",
                ))
            }
        }
        if e.strategies.is_empty() {
            return Err(Error::validation(
                "experiment.deployment.strategies",
                "must not be empty",
            ));
        }
        self.class("experiment.deployment.los_class", &e.los_class)?;
        self.class("experiment.deployment.nlos_class", &e.nlos_class)?;
        Ok(())
    }

    fn constraints_of(&self, e: &TrajectoryExperiment<T>) -> TrajectoryConstraints<T> {
        TrajectoryConstraints {
            start: e.start,
            end: e.end,
            fixed_altitude: e.fixed_altitude,
            v_max: e.v_max,
            slot_duration: e.slot_duration,
        }
    }

    pub fn trajectory_experiment(&self) -> Result<&TrajectoryExperiment<T>> {
        match &self.experiment {
            Experiment::Trajectory(e) => Ok(e),
            other => Err(Error::config(format!("scenario holds a {} experiment", other.kind()))),
        }
    }

    pub fn deployment_experiment(&self) -> Result<&DeploymentExperiment> {
        match &self.experiment {
            Experiment::Deployment(e) => Ok(e),
            other => Err(Error::config(format!("scenario holds a {} experiment", other.kind()))),
        }
    }

    pub fn trajectory_constraints(&self) -> Result<TrajectoryConstraints<T>> {
        Ok(self.constraints_of(self.trajectory_experiment()?))
    }

    pub fn mission_options(&self) -> Result<MissionOptions<T>> {
        let e = self.trajectory_experiment()?;
        Ok(MissionOptions {
            max_time: e.max_time,
            max_iterations: e.max_iterations,
            relative_tolerance: e.relative_tolerance,
            improve: ImproveOptions {
                temperature: e.temperature,
                step: e.v_max * e.slot_duration,
                ..ImproveOptions::default()
            },
            ..MissionOptions::default()
        })
    }

    /// Uplink channel model of the trajectory experiment. Each sensor node is
    /// served by the first surface (file order) that covers it and has
    /// unblocked legs.
    pub fn data_collection_model(&self) -> Result<DataCollectionModel<T>> {
        let e = self.trajectory_experiment()?;
        let rules = self.rules()?;
        let radio = self.radio;
        let class_for = |state: LinkState, los: &str| -> Result<Option<PathLossModel<T>>> {
            match state {
                LinkState::Los => Ok(Some(self.class("class", los)?)),
                LinkState::Nlos => match &e.nlos_class {
                    Some(c) => Ok(Some(self.class("experiment.trajectory.nlos_class", c)?)),
                    None => Err(Error::validation(
                        "experiment.trajectory.nlos_class",
                        "a link resolves to NLoS but no nlos_class is configured",
                    )),
                },
                LinkState::Blocked => Ok(None),
            }
        };
        let uav_alt = e.fixed_altitude;
        let mut links = Vec::new();
        for sn in self.nodes_with_role(NodeRole::SensorNode) {
            let direct_state = rules.resolve(
                &NodePair::new(e.uav.as_str(), sn.id.as_str()),
                uav_alt.max(sn.position.z),
            )?;
            let direct_exponent = class_for(direct_state, &e.direct_class)?.map(|m| m.exponent);
            let mut reflected = None;
            for s in &self.surfaces {
                let node_state = rules.resolve(
                    &NodePair::new(s.id.as_str(), sn.id.as_str()),
                    s.position.z.max(sn.position.z),
                )?;
                if !covers(s, &sn.id, &sn.position, node_state)? {
                    continue;
                }
                let uav_state =
                    rules.resolve(&NodePair::new(e.uav.as_str(), s.id.as_str()), uav_alt.max(s.position.z))?;
                let (Some(uav_leg), Some(node_leg)) = (
                    class_for(uav_state, &e.uav_irs_class)?,
                    class_for(node_state, &e.irs_node_class)?,
                ) else {
                    continue;
                };
                reflected = Some(ReflectedPath {
                    surface_position: s.position,
                    elements: s.num_elements,
                    uav_leg_exponent: uav_leg.exponent,
                    node_leg_gain: path_gain(s.position.distance(&sn.position), &node_leg, &radio)?,
                });
                break;
            }
            links.push(SensorLink {
                id: sn.id.clone(),
                position: sn.position,
                direct_exponent,
                reflected,
            });
        }
        Ok(DataCollectionModel { radio, links })
    }

    pub fn deployment_model(&self) -> Result<DeploymentModel<T>> {
        let e = self.deployment_experiment()?;
        let bs = self
            .node(&e.bs)
            .ok_or_else(|| Error::validation("experiment.deployment.bs", "unknown node"))?;
        let users = e
            .users
            .iter()
            .map(|u| {
                self.node(u)
                    .map(|n| GroundUser {
                        id: n.id.clone(),
                        position: n.position,
                    })
                    .ok_or_else(|| Error::validation("experiment.deployment.users", format!("unknown user `{u}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let surface = |id: &str, field: &str| {
            self.surface(id)
                .cloned()
                .ok_or_else(|| Error::validation(field, format!("unknown surface `{id}`")))
        };
        let model = DeploymentModel {
            radio: self.radio,
            los: self.class("experiment.deployment.los_class", &e.los_class)?,
            nlos: self.class("experiment.deployment.nlos_class", &e.nlos_class)?,
            bs_id: bs.id.clone(),
            bs: bs.position,
            users,
            aerial: surface(&e.aerial_surface, "experiment.deployment.aerial_surface")?,
            terrestrial: surface(&e.terrestrial_surface, "experiment.deployment.terrestrial_surface")?,
            rules: self.rules()?,
        };
        model.validate()?;
        Ok(model)
    }

    /// Element budget as an unsigned count.
    pub fn n_budget(&self) -> Result<u32> {
        let e = self.deployment_experiment()?;
        u32::try_from(e.n_budget).map_err(|_| Error::validation("experiment.deployment.n_budget", "out of range"))
    }
}
