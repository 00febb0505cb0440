//! Geometry, large-scale path loss, binary link states and Shannon rates.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reference distance of the path-loss model, in meters.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

/// A point in a local east/north/up frame, meters. `z` is altitude.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[T; 3]", into = "[T; 3]")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Position3D<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Position3D<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn ground(x: T, y: T) -> Self {
        Self::new(x, y, T::zero())
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    pub fn horizontal_distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn with_z(self, z: T) -> Self {
        Self { z, ..self }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Linear interpolation, `s = 0` gives `self`.
    pub fn lerp(&self, other: &Self, s: T) -> Self {
        *self + (*other - *self) * s
    }
}

impl<T: Scalar> Add for Position3D<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Position3D<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Position3D<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T> From<[T; 3]> for Position3D<T> {
    fn from([x, y, z]: [T; 3]) -> Self {
        Self { x, y, z }
    }
}

impl<T> From<Position3D<T>> for [T; 3] {
    fn from(p: Position3D<T>) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Transmit/noise budget shared by every link of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct RadioParams<T> {
    /// Watts.
    #[serde(default = "RadioParams::<T>::default_tx_power")]
    pub tx_power: T,
    /// Watts.
    #[serde(default = "RadioParams::<T>::default_noise_power")]
    pub noise_power: T,
    /// Path gain at the 1 m reference distance, dB.
    #[serde(default = "RadioParams::<T>::default_ref_path_gain_db")]
    pub ref_path_gain_db: T,
}

impl<T: Scalar> RadioParams<T> {
    fn default_tx_power() -> T {
        T::lit(0.1)
    }
    fn default_noise_power() -> T {
        T::lit(1.0e-11)
    }
    fn default_ref_path_gain_db() -> T {
        T::lit(-30.0)
    }

    pub fn new(tx_power: T, noise_power: T, ref_path_gain_db: T) -> Result<Self> {
        let radio = Self {
            tx_power,
            noise_power,
            ref_path_gain_db,
        };
        radio.validate()?;
        Ok(radio)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tx_power > T::zero() && self.tx_power.is_finite()) {
            return Err(Error::validation("radio.tx_power", "must be finite and > 0"));
        }
        if !(self.noise_power > T::zero() && self.noise_power.is_finite()) {
            return Err(Error::validation("radio.noise_power", "must be finite and > 0"));
        }
        if !(self.ref_path_gain_db <= T::zero()) {
            return Err(Error::validation("radio.ref_path_gain_db", "must be <= 0 dB"));
        }
        Ok(())
    }

    /// Linear reference gain g0.
    pub fn ref_gain(&self) -> T {
        T::lit(10.0).powf(self.ref_path_gain_db / T::lit(10.0))
    }

    /// Transmit SNR scale `P / sigma^2`.
    pub fn snr_scale(&self) -> T {
        self.tx_power / self.noise_power
    }
}

impl<T: Scalar> Default for RadioParams<T> {
    fn default() -> Self {
        Self {
            tx_power: Self::default_tx_power(),
            noise_power: Self::default_noise_power(),
            ref_path_gain_db: Self::default_ref_path_gain_db(),
        }
    }
}

/// Distance-power-law large-scale model `g0 * d^-exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PathLossModel<T> {
    pub exponent: T,
}

impl<T: Scalar> PathLossModel<T> {
    pub fn new(exponent: T) -> Result<Self> {
        let m = Self { exponent };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent >= T::one() && self.exponent.is_finite()) {
            return Err(Error::validation(
                "exponent",
                "path-loss exponent must be finite and >= 1",
            ));
        }
        Ok(())
    }
}

/// Linear power gain over distance `d` meters.
///
/// Distances below the 1 m reference are clamped to it.
pub fn path_gain<T: Scalar>(d: T, model: &PathLossModel<T>, radio: &RadioParams<T>) -> Result<T> {
    if !d.is_finite() || d < T::zero() {
        return Err(Error::domain(format!("distance must be finite and >= 0, got {d}")));
    }
    Ok(path_gain_clamped(d, model.exponent, radio.ref_gain()))
}

/// Unchecked inner form used on hot paths where `d` is a computed norm.
#[inline]
pub(crate) fn path_gain_clamped<T: Scalar>(d: T, exponent: T, g0: T) -> T {
    let d = d.max(T::lit(REFERENCE_DISTANCE_M));
    g0 * d.powf(-exponent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Los,
    Nlos,
    Blocked,
}

/// State a link takes when its aerial endpoint is below the LoS threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FallbackState {
    Nlos,
    Blocked,
}

impl From<FallbackState> for LinkState {
    fn from(f: FallbackState) -> Self {
        match f {
            FallbackState::Nlos => LinkState::Nlos,
            FallbackState::Blocked => LinkState::Blocked,
        }
    }
}

/// Unordered pair of node (or surface) identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePair(String, String);

impl NodePair {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            NodePair(a, b)
        } else {
            NodePair(b, a)
        }
    }

    pub fn first(&self) -> &str {
        &self.0
    }

    pub fn second(&self) -> &str {
        &self.1
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0 == id || self.1 == id
    }
}

impl fmt::Display for NodePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<->{}", self.0, self.1)
    }
}

/// Altitude-threshold LoS rule for one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct LinkStateRule<T> {
    /// The two endpoint ids, order irrelevant.
    pub between: [String; 2],
    /// LoS iff the aerial endpoint flies at or above this altitude (m).
    pub min_altitude_for_los: T,
    pub fallback: FallbackState,
}

impl<T: Scalar> LinkStateRule<T> {
    pub fn new(a: &str, b: &str, min_altitude_for_los: T, fallback: FallbackState) -> Self {
        Self {
            between: [a.to_owned(), b.to_owned()],
            min_altitude_for_los,
            fallback,
        }
    }

    /// Rule applied to links with no explicit entry: always LoS.
    pub fn always_los(a: &str, b: &str) -> Self {
        Self::new(a, b, T::zero(), FallbackState::Nlos)
    }

    pub fn pair(&self) -> NodePair {
        NodePair::new(self.between[0].clone(), self.between[1].clone())
    }
}

/// Resolve the state of `pair` given the altitude of its aerial endpoint.
pub fn resolve_link_state<T: Scalar>(
    pair: &NodePair,
    aerial_altitude: T,
    rule: &LinkStateRule<T>,
) -> Result<LinkState> {
    if rule.pair() != *pair {
        return Err(Error::config(format!("no link-state rule for {pair}")));
    }
    if aerial_altitude.is_nan() {
        return Err(Error::domain("aerial altitude is NaN"));
    }
    Ok(if aerial_altitude >= rule.min_altitude_for_los {
        LinkState::Los
    } else {
        rule.fallback.into()
    })
}

/// The set of link-state rules of a scenario, at most one per pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkStateRules<T> {
    rules: Vec<LinkStateRule<T>>,
}

impl<T: Scalar> LinkStateRules<T> {
    pub fn new(rules: Vec<LinkStateRule<T>>) -> Result<Self> {
        for (i, r) in rules.iter().enumerate() {
            if r.between[0] == r.between[1] {
                return Err(Error::validation(
                    format!("link_state_rules[{i}].between"),
                    "a link needs two distinct endpoints",
                ));
            }
            if !r.min_altitude_for_los.is_finite() || r.min_altitude_for_los < T::zero() {
                return Err(Error::validation(
                    format!("link_state_rules[{i}].min_altitude_for_los"),
                    "must be finite and >= 0",
                ));
            }
            if rules[..i].iter().any(|o| o.pair() == r.pair()) {
                return Err(Error::validation(
                    format!("link_state_rules[{i}].between"),
                    format!("duplicate rule for {}", r.pair()),
                ));
            }
        }
        Ok(Self { rules })
    }

    pub fn get(&self, pair: &NodePair) -> Result<&LinkStateRule<T>> {
        self.rules
            .iter()
            .find(|r| r.pair() == *pair)
            .ok_or_else(|| Error::config(format!("no link-state rule for {pair}")))
    }

    /// Explicit rule for `pair`, or the LoS-at-any-altitude default.
    pub fn rule_or_default(&self, pair: &NodePair) -> LinkStateRule<T> {
        self.get(pair)
            .cloned()
            .unwrap_or_else(|_| LinkStateRule::always_los(pair.first(), pair.second()))
    }

    pub fn resolve(&self, pair: &NodePair, aerial_altitude: T) -> Result<LinkState> {
        resolve_link_state(pair, aerial_altitude, &self.rule_or_default(pair))
    }

    pub fn iter(&self) -> impl Iterator<Item = &LinkStateRule<T>> {
        self.rules.iter()
    }

    pub fn into_vec(self) -> Vec<LinkStateRule<T>> {
        self.rules
    }
}

/// Spectral efficiency of a link used for a fraction of the time.
pub fn rate_bps_hz<T: Scalar>(snr: T, time_fraction: T) -> Result<T> {
    if snr.is_nan() || snr < T::zero() {
        return Err(Error::domain(format!("snr must be >= 0, got {snr}")));
    }
    if time_fraction.is_nan() || time_fraction < T::zero() || time_fraction > T::one() {
        return Err(Error::domain(format!(
            "time fraction must lie in [0, 1], got {time_fraction}"
        )));
    }
    Ok(time_fraction * snr.ln_1p() / T::LN_2())
}
