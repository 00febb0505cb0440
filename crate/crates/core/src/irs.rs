//! Reflecting surfaces: coverage rules and coherent cascaded channels.
//!
//! Phase shifts are ideal and continuous, so the reflected contributions of
//! all `N` elements align with the direct path. Per-element channels are
//! identical in amplitude (far-field LoS), which collapses the cascaded sum to
//! `N * a` with `a` the per-element amplitude of the two-leg product link.

use serde::{Deserialize, Serialize};

use crate::channel::{path_gain, LinkState, LinkStateRules, NodePair, PathLossModel, Position3D, RadioParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    /// Fixed surface on a facade; serves its front half-space only.
    Terrestrial,
    /// UAV-mounted surface with panoramic coverage.
    Aerial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct IrsSurface<T> {
    pub id: String,
    pub kind: SurfaceKind,
    pub position: Position3D<T>,
    pub num_elements: u32,
    /// Outward normal of a terrestrial surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facing_normal: Option<Position3D<T>>,
    /// Coverage radius of a terrestrial surface, meters. Unbounded if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_radius: Option<T>,
    /// Explicit served set; overrides the geometric rule when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covered_node_ids: Option<Vec<String>>,
}

impl<T: Scalar> IrsSurface<T> {
    pub fn terrestrial(id: &str, position: Position3D<T>, num_elements: u32, facing_normal: Position3D<T>) -> Self {
        Self {
            id: id.to_owned(),
            kind: SurfaceKind::Terrestrial,
            position,
            num_elements,
            facing_normal: Some(facing_normal),
            coverage_radius: None,
            covered_node_ids: None,
        }
    }

    pub fn aerial(id: &str, position: Position3D<T>, num_elements: u32) -> Self {
        Self {
            id: id.to_owned(),
            kind: SurfaceKind::Aerial,
            position,
            num_elements,
            facing_normal: None,
            coverage_radius: None,
            covered_node_ids: None,
        }
    }

    pub fn with_elements(mut self, n: u32) -> Self {
        self.num_elements = n;
        self
    }

    pub fn with_covered(mut self, ids: &[&str]) -> Self {
        self.covered_node_ids = Some(ids.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn with_radius(mut self, r: T) -> Self {
        self.coverage_radius = Some(r);
        self
    }

    /// Moves an aerial surface to altitude `z`. Terrestrial surfaces are fixed.
    pub fn at_altitude(&self, z: T) -> Result<Self> {
        match self.kind {
            SurfaceKind::Aerial => Ok(Self {
                position: self.position.with_z(z),
                ..self.clone()
            }),
            SurfaceKind::Terrestrial => Err(Error::config(format!(
                "surface `{}` is terrestrial; its altitude is fixed",
                self.id
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("surfaces[{}].{f}", self.id);
        if !self.position.is_finite() || self.position.z < T::zero() {
            return Err(Error::validation(field("position"), "must be finite with z >= 0"));
        }
        if let Some(r) = self.coverage_radius {
            if !(r > T::zero()) {
                return Err(Error::validation(field("coverage_radius"), "must be > 0"));
            }
        }
        if self.kind == SurfaceKind::Terrestrial && self.covered_node_ids.is_none() {
            match self.facing_normal {
                None => {
                    return Err(Error::validation(
                        field("facing_normal"),
                        "required for terrestrial surfaces",
                    ))
                }
                Some(n) if !(n.norm() > T::zero()) || !n.is_finite() => {
                    return Err(Error::validation(
                        field("facing_normal"),
                        "must be a nonzero finite vector",
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Whether `surface` can serve the node `node_id` at `node_pos`.
///
/// `link_state` is the state of the surface-node link; only aerial surfaces
/// look at it.
pub fn covers<T: Scalar>(
    surface: &IrsSurface<T>,
    node_id: &str,
    node_pos: &Position3D<T>,
    link_state: LinkState,
) -> Result<bool> {
    if let Some(ids) = &surface.covered_node_ids {
        return Ok(ids.iter().any(|id| id == node_id));
    }
    match surface.kind {
        SurfaceKind::Aerial => Ok(link_state == LinkState::Los),
        SurfaceKind::Terrestrial => {
            let normal = surface
                .facing_normal
                .ok_or_else(|| Error::config(format!("terrestrial surface `{}` has no facing normal", surface.id)))?;
            let len = normal.norm();
            if !(len > T::zero()) || !len.is_finite() {
                return Err(Error::config(format!(
                    "surface `{}` has a zero-length facing normal",
                    surface.id
                )));
            }
            let offset = *node_pos - surface.position;
            let in_front = offset.dot(&normal) > T::zero();
            let in_range = surface.coverage_radius.is_none_or(|r| offset.norm() <= r);
            Ok(in_front && in_range)
        }
    }
}

/// Two-leg reflected link through a surface with `elements` elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadedLink<T> {
    /// Transmitter to surface, meters.
    pub src_distance: T,
    /// Surface to receiver, meters.
    pub dst_distance: T,
    pub src_model: PathLossModel<T>,
    pub dst_model: PathLossModel<T>,
    pub elements: u32,
}

impl<T: Scalar> CascadedLink<T> {
    /// Amplitude of one element's reflected path: product of the leg amplitudes.
    pub fn per_element_amplitude(&self, radio: &RadioParams<T>) -> Result<T> {
        let src = path_gain(self.src_distance, &self.src_model, radio)?;
        let dst = path_gain(self.dst_distance, &self.dst_model, radio)?;
        Ok(src.sqrt() * dst.sqrt())
    }

    pub fn amplitude(&self, radio: &RadioParams<T>) -> Result<T> {
        Ok(T::from_usize_lossy(self.elements as usize) * self.per_element_amplitude(radio)?)
    }
}

/// Receive SNR with the direct path and (optionally) a coherently aligned
/// reflected path.
pub fn effective_snr<T: Scalar>(
    direct_gain: T,
    cascaded: Option<&CascadedLink<T>>,
    radio: &RadioParams<T>,
) -> Result<T> {
    if direct_gain.is_nan() || direct_gain < T::zero() {
        return Err(Error::domain(format!("direct gain must be >= 0, got {direct_gain}")));
    }
    let reflected = match cascaded {
        Some(link) => link.amplitude(radio)?,
        None => T::zero(),
    };
    Ok(snr_from_amplitudes(direct_gain.sqrt(), reflected, radio))
}

/// `P * (a_direct + a_reflected)^2 / sigma^2`.
#[inline]
pub(crate) fn snr_from_amplitudes<T: Scalar>(direct_amp: T, reflected_amp: T, radio: &RadioParams<T>) -> T {
    let a = direct_amp + reflected_amp;
    radio.tx_power * a * a / radio.noise_power
}

/// Lowest altitude of an aerial surface at which every node in `required`
/// has a LoS link to it.
pub fn min_serving_altitude<T: Scalar>(
    surface: &IrsSurface<T>,
    required: &[&str],
    rules: &LinkStateRules<T>,
) -> Result<T> {
    if surface.kind != SurfaceKind::Aerial {
        return Err(Error::config(format!("surface `{}` is not aerial", surface.id)));
    }
    required.iter().try_fold(T::zero(), |acc, node| {
        let rule = rules.get(&NodePair::new(surface.id.as_str(), *node))?;
        Ok(acc.max(rule.min_altitude_for_los))
    })
}
