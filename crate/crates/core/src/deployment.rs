//! Hybrid aerial/terrestrial IRS deployment for BS-to-user relaying.
//!
//! Users are served in equal orthogonal slots with their direct links
//! blocked, so each user's rate is `(1/K) log2(1 + snr)` over the reflected
//! path of its serving surface. A surface reconfigures per slot, so every
//! user it serves sees all of its elements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkState, LinkStateRules, NodePair, PathLossModel, Position3D, RadioParams};
use crate::error::{Error, Result};
use crate::irs::{covers, effective_snr, min_serving_altitude, CascadedLink, IrsSurface, SurfaceKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// All elements on the terrestrial surface near the users.
    UserSideOnly,
    /// All elements on the UAV-mounted surface near the BS.
    BsSideOnly,
    /// Elements split between both surfaces by exhaustive search.
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::UserSideOnly, Strategy::BsSideOnly, Strategy::Hybrid];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::UserSideOnly => "user_side_only",
            Strategy::BsSideOnly => "bs_side_only",
            Strategy::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "user" | "user_side_only" => Ok(Strategy::UserSideOnly),
            "bs" | "bs_side_only" => Ok(Strategy::BsSideOnly),
            "hybrid" => Ok(Strategy::Hybrid),
            other => Err(Error::domain(format!("unknown deployment strategy `{other}`"))),
        }
    }
}

/// Which of the two surfaces serves a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServingSurface {
    Aerial,
    Terrestrial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan<T> {
    /// Elements on the aerial surface.
    pub n1: u32,
    /// Elements on the terrestrial surface.
    pub n2: u32,
    pub uirs_altitude: T,
    /// Serving surface per user, in model order. `None` = unserved.
    pub assignment: Vec<Option<ServingSurface>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentResult<T> {
    pub strategy: Strategy,
    pub plan: DeploymentPlan<T>,
    pub per_user_rates: Vec<T>,
    pub min_rate: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundUser<T> {
    pub id: String,
    pub position: Position3D<T>,
}

/// Geometry and radio description of the relaying experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentModel<T> {
    pub radio: RadioParams<T>,
    pub los: PathLossModel<T>,
    pub nlos: PathLossModel<T>,
    pub bs_id: String,
    pub bs: Position3D<T>,
    pub users: Vec<GroundUser<T>>,
    /// UAV-mounted surface; its `z` is overridden by the plan altitude.
    pub aerial: IrsSurface<T>,
    pub terrestrial: IrsSurface<T>,
    pub rules: LinkStateRules<T>,
}

impl<T: Scalar> DeploymentModel<T> {
    pub fn validate(&self) -> Result<()> {
        if self.aerial.kind != SurfaceKind::Aerial {
            return Err(Error::validation("aerial_surface", "must reference an aerial surface"));
        }
        if self.terrestrial.kind != SurfaceKind::Terrestrial {
            return Err(Error::validation(
                "terrestrial_surface",
                "must reference a terrestrial surface",
            ));
        }
        if self.users.is_empty() {
            return Err(Error::validation("users", "at least one user required"));
        }
        self.aerial.validate()?;
        self.terrestrial.validate()
    }

    pub fn user_index(&self, user_id: &str) -> Result<usize> {
        self.users
            .iter()
            .position(|u| u.id == user_id)
            .ok_or_else(|| Error::domain(format!("unknown user `{user_id}`")))
    }

    fn link_state(&self, a: (&str, &Position3D<T>), b: (&str, &Position3D<T>)) -> Result<LinkState> {
        self.rules.resolve(&NodePair::new(a.0, b.0), a.1.z.max(b.1.z))
    }

    fn exponent_model(&self, state: LinkState) -> Option<PathLossModel<T>> {
        match state {
            LinkState::Los => Some(self.los),
            LinkState::Nlos => Some(self.nlos),
            LinkState::Blocked => None,
        }
    }

    fn surface(&self, which: ServingSurface, altitude: T) -> IrsSurface<T> {
        match which {
            ServingSurface::Aerial => IrsSurface {
                position: self.aerial.position.with_z(altitude),
                ..self.aerial.clone()
            },
            ServingSurface::Terrestrial => self.terrestrial.clone(),
        }
    }

    /// Whether `which` may serve user `idx` with the aerial surface at `altitude`.
    pub fn can_serve(&self, which: ServingSurface, idx: usize, altitude: T) -> Result<bool> {
        let s = self.surface(which, altitude);
        let u = &self.users[idx];
        let state = self.link_state((&s.id, &s.position), (&u.id, &u.position))?;
        covers(&s, &u.id, &u.position, state)
    }

    /// SNR of user `idx` through `which` carrying `elements` elements.
    fn snr_via(&self, which: ServingSurface, elements: u32, idx: usize, altitude: T) -> Result<T> {
        let s = self.surface(which, altitude);
        let u = &self.users[idx];
        let src_state = self.link_state((&self.bs_id, &self.bs), (&s.id, &s.position))?;
        let dst_state = self.link_state((&s.id, &s.position), (&u.id, &u.position))?;
        let (Some(src_model), Some(dst_model)) = (self.exponent_model(src_state), self.exponent_model(dst_state))
        else {
            return Ok(T::zero());
        };
        let link = CascadedLink {
            src_distance: self.bs.distance(&s.position),
            dst_distance: s.position.distance(&u.position),
            src_model,
            dst_model,
            elements,
        };
        effective_snr(T::zero(), Some(&link), &self.radio)
    }

    fn prelog(&self) -> T {
        T::one() / T::from_usize_lossy(self.users.len())
    }

    fn rate_via(&self, which: ServingSurface, elements: u32, idx: usize, altitude: T) -> Result<T> {
        Ok(self.prelog() * self.snr_via(which, elements, idx, altitude)?.ln_1p() / T::LN_2())
    }
}

/// Rate of `user_id` under `plan`, bps/Hz.
pub fn user_rate<T: Scalar>(model: &DeploymentModel<T>, plan: &DeploymentPlan<T>, user_id: &str) -> Result<T> {
    let idx = model.user_index(user_id)?;
    rate_of(model, plan, idx)
}

fn rate_of<T: Scalar>(model: &DeploymentModel<T>, plan: &DeploymentPlan<T>, idx: usize) -> Result<T> {
    let Some(which) = plan.assignment.get(idx).copied().flatten() else {
        return Ok(T::zero());
    };
    if !model.can_serve(which, idx, plan.uirs_altitude)? {
        return Err(Error::domain(format!(
            "user `{}` is assigned to a surface that cannot serve it",
            model.users[idx].id
        )));
    }
    let elements = match which {
        ServingSurface::Aerial => plan.n1,
        ServingSurface::Terrestrial => plan.n2,
    };
    model.rate_via(which, elements, idx, plan.uirs_altitude)
}

fn evaluate_plan<T: Scalar>(
    model: &DeploymentModel<T>,
    plan: DeploymentPlan<T>,
    strategy: Strategy,
) -> Result<DeploymentResult<T>> {
    let per_user_rates = (0..model.users.len())
        .map(|i| rate_of(model, &plan, i))
        .collect::<Result<Vec<_>>>()?;
    let min_rate = per_user_rates.iter().copied().fold(T::infinity(), T::min);
    Ok(DeploymentResult {
        strategy,
        plan,
        per_user_rates,
        min_rate,
    })
}

/// Assign every user to the better of the surfaces able to serve it (ties go
/// to the terrestrial surface); users with no useful surface stay unserved.
fn assign_at<T: Scalar>(
    model: &DeploymentModel<T>,
    n1: u32,
    n2: u32,
    altitude: T,
) -> Result<Vec<Option<ServingSurface>>> {
    (0..model.users.len())
        .map(|i| {
            let mut best: Option<(ServingSurface, T)> = None;
            for (which, n) in [(ServingSurface::Terrestrial, n2), (ServingSurface::Aerial, n1)] {
                if n == 0 || !model.can_serve(which, i, altitude)? {
                    continue;
                }
                let r = model.rate_via(which, n, i, altitude)?;
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((which, r));
                }
            }
            Ok(best.map(|(w, _)| w))
        })
        .collect()
}

/// Altitudes at which the aerial surface's LoS set changes.
fn candidate_altitudes<T: Scalar>(model: &DeploymentModel<T>) -> Vec<T> {
    let mut alts: Vec<T> = model
        .users
        .iter()
        .map(|u| {
            model
                .rules
                .rule_or_default(&NodePair::new(model.aerial.id.as_str(), u.id.as_str()))
                .min_altitude_for_los
        })
        .collect();
    alts.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
    alts.dedup();
    alts
}

/// Best plan for a fixed split: try each LoS threshold as the aerial
/// altitude, assign users, then lower the aerial surface to the minimum
/// LoS altitude of the users it actually serves.
fn hybrid_for_split<T: Scalar>(model: &DeploymentModel<T>, n1: u32, n2: u32) -> Result<DeploymentResult<T>> {
    let mut best: Option<DeploymentResult<T>> = None;
    for h in candidate_altitudes(model) {
        let assignment = assign_at(model, n1, n2, h)?;
        let served: Vec<&str> = assignment
            .iter()
            .zip(&model.users)
            .filter(|(a, _)| **a == Some(ServingSurface::Aerial))
            .map(|(_, u)| u.id.as_str())
            .collect();
        let altitude = if served.is_empty() {
            T::zero()
        } else {
            serving_altitude(model, &served)?
        };
        let plan = DeploymentPlan {
            n1,
            n2,
            uirs_altitude: altitude,
            assignment,
        };
        let result = evaluate_plan(model, plan, Strategy::Hybrid)?;
        let better = match &best {
            None => true,
            Some(b) => {
                result.min_rate > b.min_rate
                    || (result.min_rate == b.min_rate && result.plan.uirs_altitude < b.plan.uirs_altitude)
            }
        };
        if better {
            best = Some(result);
        }
    }
    best.ok_or_else(|| Error::config("no candidate altitude for the aerial surface"))
}

/// Like `min_serving_altitude` but treats users without an explicit rule as
/// LoS at any altitude.
fn serving_altitude<T: Scalar>(model: &DeploymentModel<T>, users: &[&str]) -> Result<T> {
    let explicit: Vec<&str> = users
        .iter()
        .copied()
        .filter(|u| model.rules.get(&NodePair::new(model.aerial.id.as_str(), *u)).is_ok())
        .collect();
    min_serving_altitude(&model.aerial, &explicit, &model.rules)
}

/// Exhaustive search over `n1 in 0..=n_budget`, `n2 = n_budget - n1`.
/// Ties go to the smallest `n1`.
pub fn exhaustive_allocate<T: Scalar>(model: &DeploymentModel<T>, n_budget: u32) -> Result<DeploymentResult<T>> {
    model.validate()?;
    let all: Vec<DeploymentResult<T>> = (0..=n_budget)
        .into_par_iter()
        .map(|n1| hybrid_for_split(model, n1, n_budget - n1))
        .collect::<Result<_>>()?;
    let mut best = &all[0];
    for r in &all[1..] {
        if r.min_rate > best.min_rate {
            best = r;
        }
    }
    Ok(best.clone())
}

/// Min-rate of the hybrid rule at every split, index = `n1`.
pub fn hybrid_min_rate_profile<T: Scalar>(model: &DeploymentModel<T>, n_budget: u32) -> Result<Vec<T>> {
    (0..=n_budget)
        .into_par_iter()
        .map(|n1| hybrid_for_split(model, n1, n_budget - n1).map(|r| r.min_rate))
        .collect()
}

pub fn evaluate_strategy<T: Scalar>(
    model: &DeploymentModel<T>,
    strategy: Strategy,
    n_budget: u32,
) -> Result<DeploymentResult<T>> {
    model.validate()?;
    match strategy {
        Strategy::UserSideOnly => {
            let assignment = assign_at(model, 0, n_budget, T::zero())?;
            let plan = DeploymentPlan {
                n1: 0,
                n2: n_budget,
                uirs_altitude: T::zero(),
                assignment,
            };
            evaluate_plan(model, plan, strategy)
        }
        Strategy::BsSideOnly => {
            let everyone: Vec<&str> = model.users.iter().map(|u| u.id.as_str()).collect();
            let altitude = serving_altitude(model, &everyone)?;
            let assignment = assign_at(model, n_budget, 0, altitude)?;
            let plan = DeploymentPlan {
                n1: n_budget,
                n2: 0,
                uirs_altitude: altitude,
                assignment,
            };
            evaluate_plan(model, plan, strategy)
        }
        Strategy::Hybrid => exhaustive_allocate(model, n_budget),
    }
}

/// Rate of user `idx` served by `which` with the given element count and
/// aerial altitude, ignoring coverage. Exposed for sensitivity sweeps.
pub fn rate_through<T: Scalar>(
    model: &DeploymentModel<T>,
    which: ServingSurface,
    elements: u32,
    user_id: &str,
    altitude: T,
) -> Result<T> {
    let idx = model.user_index(user_id)?;
    model.rate_via(which, elements, idx, altitude)
}
