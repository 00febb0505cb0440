//! Minimum-time UAV data collection under a common max-min rate target.
//!
//! The mission time is searched by bisection over whole slots. Each candidate
//! time is judged by block coordinate descent that alternates the exact
//! scheduling LP with a projected first-order update of the waypoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{path_gain_clamped, Position3D, RadioParams};
use crate::error::{Error, Result};
use crate::irs::snr_from_amplitudes;
use crate::scalar::Scalar;
use crate::schedule::{optimal_schedule, RateMatrix, Schedule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConstraints<T> {
    pub start: Position3D<T>,
    pub end: Position3D<T>,
    pub fixed_altitude: T,
    /// m/s
    pub v_max: T,
    /// Slot length, seconds.
    pub slot_duration: T,
}

impl<T: Scalar> TrajectoryConstraints<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > T::zero()) || !self.v_max.is_finite() {
            return Err(Error::validation("v_max", "must be finite and > 0"));
        }
        if !(self.slot_duration > T::zero()) || !self.slot_duration.is_finite() {
            return Err(Error::validation("slot_duration", "must be finite and > 0"));
        }
        if !self.start.is_finite() || !self.end.is_finite() || !(self.fixed_altitude >= T::zero()) {
            return Err(Error::validation("start/end", "must be finite with altitude >= 0"));
        }
        if self.start.z != self.fixed_altitude || self.end.z != self.fixed_altitude {
            return Err(Error::validation(
                "start/end",
                "endpoints must fly at the fixed altitude",
            ));
        }
        Ok(())
    }

    /// Longest distance flyable in one slot.
    pub fn max_step(&self) -> T {
        self.v_max * self.slot_duration
    }

    /// Fewest slots in which the straight flight is speed-feasible.
    pub fn min_slots(&self) -> usize {
        let ratio = self.start.distance(&self.end) / self.max_step();
        let m = (ratio - T::lit(1e-9)).ceil().to_f64_lossy().max(1.0);
        m as usize
    }
}

/// Discretized path: `M + 1` waypoints, slot `t` spent at waypoint `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct Trajectory<T> {
    pub waypoints: Vec<Position3D<T>>,
    pub slot_duration: T,
}

impl<T: Scalar> Trajectory<T> {
    /// Uniformly spaced straight line from `start` to `end` over `slots` slots.
    pub fn straight(start: Position3D<T>, end: Position3D<T>, slots: usize, slot_duration: T) -> Self {
        let m = T::from_usize_lossy(slots.max(1));
        let waypoints = (0..=slots)
            .map(|t| {
                if t == slots {
                    end
                } else {
                    start.lerp(&end, T::from_usize_lossy(t) / m)
                }
            })
            .collect();
        Self {
            waypoints,
            slot_duration,
        }
    }

    pub fn slots(&self) -> usize {
        self.waypoints.len().saturating_sub(1)
    }

    pub fn mission_time(&self) -> T {
        T::from_usize_lossy(self.slots()) * self.slot_duration
    }

    /// Longest distance covered in a single slot.
    pub fn max_segment(&self) -> T {
        self.waypoints
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .fold(T::zero(), T::max)
    }

    pub fn is_speed_feasible(&self, v_max: T, tol: T) -> bool {
        self.max_segment() <= v_max * self.slot_duration + tol
    }

    /// Same path re-timed onto `slots` slots by linear interpolation in time.
    pub fn resample(&self, slots: usize) -> Self {
        let src = self.slots();
        if src == 0 || src == slots {
            return self.clone();
        }
        let first = self.waypoints[0];
        let last = self.waypoints[src];
        let waypoints = (0..=slots)
            .map(|t| {
                if t == 0 {
                    return first;
                }
                if t == slots {
                    return last;
                }
                let s = T::from_usize_lossy(t) * T::from_usize_lossy(src) / T::from_usize_lossy(slots);
                let i = s.floor().to_f64_lossy() as usize;
                let i = i.min(src - 1);
                let frac = s - T::from_usize_lossy(i);
                self.waypoints[i].lerp(&self.waypoints[i + 1], frac)
            })
            .collect();
        Self {
            waypoints,
            slot_duration: self.slot_duration,
        }
    }

    /// Distance of the closest waypoint to `p`.
    pub fn closest_approach(&self, p: &Position3D<T>) -> T {
        self.waypoints.iter().map(|w| w.distance(p)).fold(T::infinity(), T::min)
    }

    /// Speed-feasible copy with the same endpoints, or `None` if the clipping
    /// does not settle (e.g. the endpoints are too far apart for the slots).
    pub fn project_to_speed_limit(&self, v_max: T) -> Option<Self> {
        let mut waypoints = self.waypoints.clone();
        let max_step = v_max * self.slot_duration;
        project_speed(
            &mut waypoints,
            max_step,
            ImproveOptions::<T>::default().max_projection_sweeps,
        )?;
        Some(Self {
            waypoints,
            slot_duration: self.slot_duration,
        })
    }
}

/// Reflected path from the UAV to one node through a serving surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedPath<T> {
    pub surface_position: Position3D<T>,
    pub elements: u32,
    /// Exponent of the UAV to surface leg.
    pub uav_leg_exponent: T,
    /// Power gain of the fixed surface to node leg.
    pub node_leg_gain: T,
}

/// Everything needed to evaluate one node's rate from any UAV position.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLink<T> {
    pub id: String,
    pub position: Position3D<T>,
    /// Exponent of the direct UAV-node link; `None` when it is blocked.
    pub direct_exponent: Option<T>,
    pub reflected: Option<ReflectedPath<T>>,
}

/// Uplink data-collection channel model for a set of ground nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCollectionModel<T> {
    pub radio: RadioParams<T>,
    pub links: Vec<SensorLink<T>>,
}

impl<T: Scalar> DataCollectionModel<T> {
    pub fn nodes(&self) -> usize {
        self.links.len()
    }

    /// SNR of node `k` with the UAV at `uav`.
    pub fn snr_at(&self, k: usize, uav: &Position3D<T>) -> T {
        let link = &self.links[k];
        let g0 = self.radio.ref_gain();
        let direct = link.direct_exponent.map_or(T::zero(), |a| {
            path_gain_clamped(uav.distance(&link.position), a, g0).sqrt()
        });
        let reflected = link.reflected.as_ref().map_or(T::zero(), |r| {
            if r.elements == 0 {
                return T::zero();
            }
            let uav_leg = path_gain_clamped(uav.distance(&r.surface_position), r.uav_leg_exponent, g0);
            T::from_usize_lossy(r.elements as usize) * (uav_leg * r.node_leg_gain).sqrt()
        });
        snr_from_amplitudes(direct, reflected, &self.radio)
    }

    /// Full-slot rate `log2(1 + snr)` of node `k` with the UAV at `uav`.
    pub fn rate_at(&self, k: usize, uav: &Position3D<T>) -> T {
        self.snr_at(k, uav).ln_1p() / T::LN_2()
    }

    /// Same model with every surface switched off.
    pub fn without_reflectors(&self) -> Self {
        Self {
            radio: self.radio,
            links: self
                .links
                .iter()
                .map(|l| SensorLink {
                    reflected: None,
                    ..l.clone()
                })
                .collect(),
        }
    }
}

/// Rate matrix `R[k][t]` along a trajectory, slot `t` at waypoint `t`.
pub fn per_slot_rates<T: Scalar>(model: &DataCollectionModel<T>, trajectory: &Trajectory<T>) -> Result<RateMatrix<T>> {
    let slots = trajectory.slots();
    let rows: Vec<Vec<T>> = (0..model.nodes())
        .into_par_iter()
        .map(|k| {
            trajectory.waypoints[..slots]
                .iter()
                .map(|w| model.rate_at(k, w))
                .collect()
        })
        .collect();
    RateMatrix::new(rows)
}

/// Tuning for one trajectory update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImproveOptions<T> {
    /// Softmin temperature over per-node average rates, bps/Hz.
    pub temperature: T,
    /// Largest waypoint displacement tried first, meters.
    pub step: T,
    pub shrink: T,
    pub max_backtracks: usize,
    /// Sweep limit of the speed projection.
    pub max_projection_sweeps: usize,
}

impl<T: Scalar> Default for ImproveOptions<T> {
    fn default() -> Self {
        Self {
            temperature: T::lit(0.05),
            step: T::lit(5.0),
            shrink: T::lit(0.5),
            max_backtracks: 30,
            max_projection_sweeps: 400,
        }
    }
}

/// Result of one improvement attempt.
#[derive(Debug, Clone)]
pub struct ImproveOutcome<T> {
    pub trajectory: Trajectory<T>,
    /// Displacement scale of the accepted step, zero if rejected.
    pub accepted_step: T,
}

/// Objectives of a trajectory under a fixed schedule.
struct FixedSchedule<'a, T> {
    model: &'a DataCollectionModel<T>,
    schedule: &'a Schedule<T>,
    mission_time: T,
    temperature: T,
}

impl<T: Scalar> FixedSchedule<'_, T> {
    fn throughput(&self, traj: &Trajectory<T>) -> Vec<T> {
        let delta = traj.slot_duration;
        (0..self.model.nodes())
            .into_par_iter()
            .map(|k| {
                self.schedule.fractions[k]
                    .iter()
                    .zip(&traj.waypoints)
                    .fold(T::zero(), |acc, (&tau, w)| {
                        if tau > T::zero() {
                            acc + tau * delta * self.model.rate_at(k, w)
                        } else {
                            acc
                        }
                    })
            })
            .collect()
    }

    fn hard(thr: &[T]) -> T {
        thr.iter().copied().fold(T::infinity(), T::min)
    }

    /// Softmin of average rates and the corresponding softmax weights.
    fn soft(&self, thr: &[T]) -> (T, Vec<T>) {
        let rates: Vec<T> = thr.iter().map(|&v| v / self.mission_time).collect();
        let lo = rates.iter().copied().fold(T::infinity(), T::min);
        let e: Vec<T> = rates.iter().map(|&r| (-(r - lo) / self.temperature).exp()).collect();
        let z = e.iter().fold(T::zero(), |a, &b| a + b);
        (lo - self.temperature * z.ln(), e.into_iter().map(|v| v / z).collect())
    }
}

/// Pulls waypoints back inside `{|w[t+1] - w[t]| <= max_step}` with fixed
/// endpoints by clipping violating segments.
///
/// A few symmetric sweeps (both ends of a long segment move) keep the result
/// close to the input; alternating one-sided passes anchored at the start and
/// at the end then finish the job. `None` if it does not settle.
pub(crate) fn project_speed<T: Scalar>(waypoints: &mut [Position3D<T>], max_step: T, max_sweeps: usize) -> Option<()> {
    let n = waypoints.len();
    if n < 2 {
        return Some(());
    }
    let tol = T::lit(1e-10).min(max_step * T::lit(1e-12));
    let target = max_step - tol;
    let feasible = |w: &[Position3D<T>]| w.windows(2).all(|s| s[0].distance(&s[1]) <= max_step);
    if n == 2 {
        return feasible(waypoints).then_some(());
    }
    if feasible(waypoints) {
        return Some(());
    }
    let (first, last) = (waypoints[0], waypoints[n - 1]);
    let segments = T::from_usize_lossy(n - 1);
    if first.distance(&last) >= target * segments {
        // No slack: only the evenly spaced straight line fits.
        for (i, w) in waypoints.iter_mut().enumerate().take(n - 1).skip(1) {
            *w = first.lerp(&last, T::from_usize_lossy(i) / segments);
        }
        return (first.distance(&last) / segments <= max_step + T::lit(1e-10)).then_some(());
    }

    const SYMMETRIC_SWEEPS: usize = 8;
    for _ in 0..SYMMETRIC_SWEEPS.min(max_sweeps) {
        for i in 0..n - 1 {
            let d = waypoints[i + 1] - waypoints[i];
            let len = d.norm();
            if len <= target {
                continue;
            }
            let unit = d * (T::one() / len);
            let excess = len - target;
            if i == 0 {
                waypoints[1] = waypoints[1] - unit * excess;
            } else if i + 2 == n {
                waypoints[i] = waypoints[i] + unit * excess;
            } else {
                let half = excess / T::lit(2.0);
                waypoints[i] = waypoints[i] + unit * half;
                waypoints[i + 1] = waypoints[i + 1] - unit * half;
            }
        }
    }

    let clip_toward = |w: &mut [Position3D<T>], moving: usize, anchor: usize| {
        let d = w[moving] - w[anchor];
        let len = d.norm();
        if len > target {
            w[moving] = w[anchor] + d * (target / len);
        }
    };
    for _ in 0..max_sweeps {
        if feasible(waypoints) {
            return Some(());
        }
        for i in 1..n - 1 {
            clip_toward(waypoints, i, i - 1);
        }
        for i in (1..n - 1).rev() {
            clip_toward(waypoints, i, i + 1);
        }
    }
    if feasible(waypoints) {
        return Some(());
    }

    // Clipping stalls when the slack is thin. Segment lengths are convex in
    // the blend weight and the straight line fits, so bisect on the smallest
    // blend toward it that is feasible.
    let line: Vec<Position3D<T>> = (0..n)
        .map(|i| first.lerp(&last, T::from_usize_lossy(i) / segments))
        .collect();
    let clipped = waypoints.to_vec();
    let blend = |lambda: T| -> Vec<Position3D<T>> {
        clipped
            .iter()
            .zip(&line)
            .map(|(w, l)| *w + (*l - *w) * lambda)
            .collect()
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..60 {
        let mid = (lo + hi) / T::lit(2.0);
        if feasible(&blend(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let best = blend(hi);
    waypoints.copy_from_slice(&best);
    // endpoints are untouched by the blend, pin them against rounding
    waypoints[0] = first;
    waypoints[n - 1] = last;
    feasible(waypoints).then_some(())
}

/// One block update of the interior waypoints for a fixed schedule.
///
/// Ascends the softmin of per-node average rates along a finite-difference
/// gradient, backtracks, projects onto the speed limit, and never accepts a
/// step that lowers the hard minimum throughput (the max-min value with the
/// schedule re-optimized for the candidate path). Returns the input unchanged
/// when no acceptable step exists.
pub fn improve_trajectory<T: Scalar>(
    model: &DataCollectionModel<T>,
    constraints: &TrajectoryConstraints<T>,
    trajectory: &Trajectory<T>,
    schedule: &Schedule<T>,
    options: &ImproveOptions<T>,
) -> Trajectory<T> {
    improve_step(model, constraints, trajectory, schedule, options).trajectory
}

pub fn improve_step<T: Scalar>(
    model: &DataCollectionModel<T>,
    constraints: &TrajectoryConstraints<T>,
    trajectory: &Trajectory<T>,
    schedule: &Schedule<T>,
    options: &ImproveOptions<T>,
) -> ImproveOutcome<T> {
    let unchanged = || ImproveOutcome {
        trajectory: trajectory.clone(),
        accepted_step: T::zero(),
    };
    let slots = trajectory.slots();
    if slots < 2 || !(options.step > T::zero()) || schedule.slots() != slots {
        return unchanged();
    }
    let obj = FixedSchedule {
        model,
        schedule,
        mission_time: trajectory.mission_time(),
        temperature: options.temperature,
    };
    let thr = obj.throughput(trajectory);
    let hard0 = FixedSchedule::<T>::hard(&thr);
    let (soft0, weights) = obj.soft(&thr);

    let grad = softmin_gradient(&obj, trajectory, &weights);
    let gmax = grad.iter().map(|g| g.0.hypot(g.1)).fold(T::zero(), T::max);
    if !(gmax > T::zero()) || !gmax.is_finite() {
        return unchanged();
    }

    let c1 = T::lit(1e-4);
    let mut step = options.step;
    for _ in 0..=options.max_backtracks {
        let scale = step / gmax;
        let mut cand = trajectory.clone();
        for (t, g) in grad.iter().enumerate() {
            let w = &mut cand.waypoints[t + 1];
            w.x = w.x + scale * g.0;
            w.y = w.y + scale * g.1;
        }
        if project_speed(
            &mut cand.waypoints,
            constraints.max_step(),
            options.max_projection_sweeps,
        )
        .is_some()
        {
            let predicted = grad.iter().enumerate().fold(T::zero(), |acc, (t, g)| {
                let d = cand.waypoints[t + 1] - trajectory.waypoints[t + 1];
                acc + g.0 * d.x + g.1 * d.y
            });
            let thr1 = obj.throughput(&cand);
            let (soft1, _) = obj.soft(&thr1);
            if soft1 > soft0 && soft1 >= soft0 + c1 * predicted {
                if let Some(value) = best_schedule_value(model, &cand) {
                    if value >= hard0 {
                        return ImproveOutcome {
                            trajectory: cand,
                            accepted_step: step,
                        };
                    }
                }
            }
        }
        step = step * options.shrink;
    }
    unchanged()
}

/// Max-min throughput of `traj` under its own optimal schedule.
fn best_schedule_value<T: Scalar>(model: &DataCollectionModel<T>, traj: &Trajectory<T>) -> Option<T> {
    let rates = per_slot_rates(model, traj).ok()?;
    optimal_schedule(&rates, traj.slot_duration).ok().map(|(_, v)| v)
}

/// Horizontal gradient of the softmin objective at interior waypoints
/// `1..slots`, by central differences of the per-waypoint rates.
fn softmin_gradient<T: Scalar>(obj: &FixedSchedule<'_, T>, traj: &Trajectory<T>, weights: &[T]) -> Vec<(T, T)> {
    let slots = traj.slots();
    let scale = obj.mission_time;
    let delta = traj.slot_duration;
    (1..slots)
        .into_par_iter()
        .map(|t| {
            let w = traj.waypoints[t];
            let h = T::epsilon().cbrt() * T::one().max(w.x.abs().max(w.y.abs()));
            let two_h = h + h;
            let mut gx = T::zero();
            let mut gy = T::zero();
            for (k, &p) in weights.iter().enumerate() {
                let tau = obj.schedule.fractions[k][t];
                if !(tau > T::zero()) || !(p > T::zero()) {
                    continue;
                }
                let coef = p * tau * delta / scale;
                let m = obj.model;
                let dx = (m.rate_at(k, &Position3D::new(w.x + h, w.y, w.z))
                    - m.rate_at(k, &Position3D::new(w.x - h, w.y, w.z)))
                    / two_h;
                let dy = (m.rate_at(k, &Position3D::new(w.x, w.y + h, w.z))
                    - m.rate_at(k, &Position3D::new(w.x, w.y - h, w.z)))
                    / two_h;
                gx = gx + coef * dx;
                gy = gy + coef * dy;
            }
            (gx, gy)
        })
        .collect()
}

/// Tuning of the outer search and inner descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionOptions<T> {
    /// Upper end of the time search, seconds.
    pub max_time: T,
    pub max_iterations: usize,
    /// Inner descent stops once the relative objective gain drops below this.
    pub relative_tolerance: T,
    /// Stop the inner descent as soon as the target is met.
    pub stop_when_feasible: bool,
    pub improve: ImproveOptions<T>,
}

impl<T: Scalar> Default for MissionOptions<T> {
    fn default() -> Self {
        Self {
            max_time: T::lit(60.0),
            max_iterations: 200,
            relative_tolerance: T::lit(1e-4),
            stop_when_feasible: true,
            improve: ImproveOptions::default(),
        }
    }
}

/// Record of one candidate mission time evaluated by the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe<T> {
    pub slots: usize,
    pub mission_time: T,
    pub achieved_min_rate: T,
    pub feasible: bool,
    pub iterations: usize,
    /// Hard-min throughput after each accepted descent iteration.
    pub objective_trace: Vec<T>,
}

impl<T: Scalar> Probe<T> {
    /// Number of places where the trace decreases.
    pub fn monotonicity_violations(&self) -> usize {
        self.objective_trace.windows(2).filter(|w| w[1] < w[0]).count()
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct MissionResult<T> {
    pub trajectory: Trajectory<T>,
    pub schedule: Schedule<T>,
    pub mission_time: T,
    pub achieved_min_rate: T,
    pub per_node_rates: Vec<T>,
    /// Descent iterations spent on the returned solution.
    pub iterations: usize,
    /// The search bracketed the minimum time to one slot.
    pub converged: bool,
    /// The returned time meets the target.
    pub feasible: bool,
    pub probes: Vec<Probe<T>>,
}

impl<T: Scalar> MissionResult<T> {
    pub fn probe_at(&self, slots: usize) -> Option<&Probe<T>> {
        self.probes.iter().find(|p| p.slots == slots)
    }
}

struct InnerSolution<T> {
    trajectory: Trajectory<T>,
    schedule: Schedule<T>,
    probe: Probe<T>,
}

/// Block coordinate descent at a fixed number of slots.
fn solve_fixed_time<T: Scalar>(
    model: &DataCollectionModel<T>,
    constraints: &TrajectoryConstraints<T>,
    init: Trajectory<T>,
    rate_target: T,
    options: &MissionOptions<T>,
) -> Result<InnerSolution<T>> {
    let delta = constraints.slot_duration;
    let mut traj = init;
    let mission_time = traj.mission_time();
    let rates = per_slot_rates(model, &traj)?;
    let (mut schedule, mut value) = optimal_schedule(&rates, delta)?;
    let mut trace = vec![value];
    let mut iterations = 0;
    let mut improve = options.improve;
    let step_cap = options.improve.step * T::lit(8.0);

    while iterations < options.max_iterations {
        if options.stop_when_feasible && value / mission_time >= rate_target {
            break;
        }
        let outcome = improve_step(model, constraints, &traj, &schedule, &improve);
        if outcome.accepted_step <= T::zero() {
            break;
        }
        iterations += 1;
        improve.step = (outcome.accepted_step * T::lit(2.0)).min(step_cap);
        let new_traj = outcome.trajectory;
        let new_rates = per_slot_rates(model, &new_traj)?;
        let (lp_schedule, lp_value) = optimal_schedule(&new_rates, delta)?;
        // the previous schedule stays feasible on the new path; keep whichever is better
        let kept_value = schedule.min_throughput(&new_rates, delta);
        let (new_schedule, new_value) = if lp_value >= kept_value {
            (lp_schedule, lp_value)
        } else {
            (schedule, kept_value)
        };
        let gain = (new_value - value) / value.abs().max(T::min_positive_value());
        traj = new_traj;
        schedule = new_schedule;
        value = new_value;
        trace.push(value);
        if gain < options.relative_tolerance {
            break;
        }
    }
    let achieved = value / mission_time;
    Ok(InnerSolution {
        probe: Probe {
            slots: traj.slots(),
            mission_time,
            achieved_min_rate: achieved,
            feasible: achieved >= rate_target,
            iterations,
            objective_trace: trace,
        },
        trajectory: traj,
        schedule,
    })
}

fn warm_start<T: Scalar>(from: &Trajectory<T>, slots: usize, constraints: &TrajectoryConstraints<T>) -> Trajectory<T> {
    let mut t = from.resample(slots);
    if project_speed(&mut t.waypoints, constraints.max_step(), 10_000).is_some() {
        t
    } else {
        Trajectory::straight(constraints.start, constraints.end, slots, constraints.slot_duration)
    }
}

/// Smallest mission time (a whole number of slots) at which every node's
/// time-averaged rate reaches `rate_target` bps/Hz.
///
/// When even `options.max_time` is infeasible the result has
/// `feasible = false` and carries the best rate achieved there.
pub fn min_time_mission<T: Scalar>(
    model: &DataCollectionModel<T>,
    constraints: &TrajectoryConstraints<T>,
    rate_target: T,
    options: &MissionOptions<T>,
) -> Result<MissionResult<T>> {
    constraints.validate()?;
    if !(rate_target > T::zero()) || !rate_target.is_finite() {
        return Err(Error::domain(format!("rate target must be > 0, got {rate_target}")));
    }
    if model.nodes() == 0 {
        return Err(Error::domain("no ground nodes to collect from"));
    }
    let lo_slots = constraints.min_slots();
    let hi_slots = (options.max_time / constraints.slot_duration + T::lit(1e-9))
        .floor()
        .to_f64_lossy() as usize;
    if hi_slots < lo_slots {
        return Err(Error::domain(format!(
            "max time {} s is shorter than the straight flight",
            options.max_time
        )));
    }

    let mut probes = Vec::new();
    let straight = Trajectory::straight(constraints.start, constraints.end, lo_slots, constraints.slot_duration);
    let lo_sol = solve_fixed_time(model, constraints, straight, rate_target, options)?;
    probes.push(lo_sol.probe.clone());
    if lo_sol.probe.feasible {
        return Ok(finish(model, lo_sol, true, probes));
    }

    let init = Trajectory::straight(constraints.start, constraints.end, hi_slots, constraints.slot_duration);
    let hi_sol = solve_fixed_time(model, constraints, init, rate_target, options)?;
    probes.push(hi_sol.probe.clone());
    if !hi_sol.probe.feasible {
        let best = if hi_sol.probe.achieved_min_rate >= lo_sol.probe.achieved_min_rate {
            hi_sol
        } else {
            lo_sol
        };
        return Ok(finish(model, best, false, probes));
    }

    let (mut lo, mut best) = (lo_slots, hi_sol);
    while best.probe.slots - lo > 1 {
        let mid = lo + (best.probe.slots - lo) / 2;
        let init = warm_start(&best.trajectory, mid, constraints);
        let sol = solve_fixed_time(model, constraints, init, rate_target, options)?;
        probes.push(sol.probe.clone());
        if sol.probe.feasible {
            best = sol;
        } else {
            lo = mid;
        }
    }
    Ok(finish(model, best, true, probes))
}

fn finish<T: Scalar>(
    model: &DataCollectionModel<T>,
    sol: InnerSolution<T>,
    converged: bool,
    probes: Vec<Probe<T>>,
) -> MissionResult<T> {
    let mission_time = sol.trajectory.mission_time();
    let rates = per_slot_rates(model, &sol.trajectory).expect("rates of a validated model");
    let per_node_rates: Vec<T> = sol
        .schedule
        .throughput(&rates, sol.trajectory.slot_duration)
        .into_iter()
        .map(|v| v / mission_time)
        .collect();
    MissionResult {
        achieved_min_rate: per_node_rates.iter().copied().fold(T::infinity(), T::min),
        per_node_rates,
        mission_time,
        iterations: sol.probe.iterations,
        converged,
        feasible: sol.probe.feasible,
        trajectory: sol.trajectory,
        schedule: sol.schedule,
        probes,
    }
}
