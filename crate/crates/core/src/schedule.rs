//! Max-min TDMA time sharing for a fixed trajectory.
//!
//! The scheduling LP
//!
//! ```text
//! max m  s.t.  sum_t tau[k][t] * delta * R[k][t] >= m   for every node k
//!              sum_k tau[k][t] <= 1                      for every slot t
//!              tau >= 0
//! ```
//!
//! has K*M variables but only K coupling rows. Its feasible throughput
//! vectors form a polytope whose vertices are pure assignments (each slot
//! handed to a single node), so it is solved exactly by column generation:
//! a K+1 row master over convex combinations of assignments, priced by a
//! per-slot argmax under the master's dual weights.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex;

/// Per-node, per-slot achievable rates in bps/Hz, `K` rows of `M` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix<T> {
    rows: Vec<Vec<T>>,
    slots: usize,
}

impl<T: Scalar> RateMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let slots = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != slots) {
            return Err(Error::domain("rate matrix rows differ in length"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::domain("rates must be finite and >= 0"));
        }
        Ok(Self { rows, slots })
    }

    pub fn nodes(&self) -> usize {
        self.rows.len()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn get(&self, node: usize, slot: usize) -> T {
        self.rows[node][slot]
    }

    pub fn row(&self, node: usize) -> &[T] {
        &self.rows[node]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }
}

/// Time-sharing fractions `tau[k][t]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule<T> {
    pub fractions: Vec<Vec<T>>,
}

impl<T: Scalar> Schedule<T> {
    pub fn nodes(&self) -> usize {
        self.fractions.len()
    }

    pub fn slots(&self) -> usize {
        self.fractions.first().map_or(0, Vec::len)
    }

    /// Every slot split evenly across nodes.
    pub fn uniform(nodes: usize, slots: usize) -> Self {
        let share = if nodes == 0 {
            T::zero()
        } else {
            T::one() / T::from_usize_lossy(nodes)
        };
        Self {
            fractions: vec![vec![share; slots]; nodes],
        }
    }

    /// Data delivered per node over the mission, bps/Hz * s.
    pub fn throughput(&self, rates: &RateMatrix<T>, slot_duration: T) -> Vec<T> {
        self.fractions
            .iter()
            .zip(rates.rows())
            .map(|(tau, r)| {
                tau.iter()
                    .zip(r)
                    .fold(T::zero(), |acc, (&f, &v)| acc + f * slot_duration * v)
            })
            .collect()
    }

    pub fn min_throughput(&self, rates: &RateMatrix<T>, slot_duration: T) -> T {
        self.throughput(rates, slot_duration)
            .into_iter()
            .fold(T::infinity(), T::min)
    }

    /// Checks `tau >= 0` and per-slot sums `<= 1` within `tol`.
    pub fn check_feasible(&self, tol: T) -> Result<()> {
        for t in 0..self.slots() {
            let mut sum = T::zero();
            for k in 0..self.nodes() {
                let f = self.fractions[k][t];
                if !(f >= -tol) {
                    return Err(Error::domain(format!("tau[{k}][{t}] = {f} < 0")));
                }
                sum = sum + f;
            }
            if sum > T::one() + tol {
                return Err(Error::domain(format!("slot {t} over-allocated: {sum}")));
            }
        }
        Ok(())
    }
}

const MAX_PRICING_ROUNDS: usize = 2000;

/// Solves the max-min scheduling LP. Returns the schedule and its optimal
/// minimum per-node throughput (bps/Hz * s).
///
/// A node whose rates are all zero pins the optimum at 0; that is not an
/// error.
pub fn optimal_schedule<T: Scalar>(rates: &RateMatrix<T>, slot_duration: T) -> Result<(Schedule<T>, T)> {
    if !(slot_duration > T::zero()) || !slot_duration.is_finite() {
        return Err(Error::domain("slot duration must be finite and > 0"));
    }
    let k_nodes = rates.nodes();
    let m_slots = rates.slots();
    if k_nodes == 0 {
        return Err(Error::domain("schedule needs at least one node"));
    }
    if m_slots == 0 {
        return Ok((
            Schedule {
                fractions: vec![Vec::new(); k_nodes],
            },
            T::zero(),
        ));
    }

    let weighted: Vec<Vec<T>> = rates
        .rows()
        .iter()
        .map(|r| r.iter().map(|&v| v * slot_duration).collect())
        .collect();

    let mut columns: Vec<Column<T>> = Vec::new();
    for k in 0..k_nodes {
        push_unique(&mut columns, Column::new(vec![k; m_slots], &weighted));
    }
    push_unique(&mut columns, price(&vec![T::one(); k_nodes], &weighted));

    let tol = T::tiny() * T::lit(100.0);
    let mut master = solve_master(&columns, k_nodes)?;
    for _ in 0..MAX_PRICING_ROUNDS {
        let candidate = price(&master.duals[..k_nodes], &weighted);
        let sigma = master.duals[k_nodes];
        let value = candidate
            .throughput
            .iter()
            .zip(&master.duals[..k_nodes])
            .fold(T::zero(), |acc, (&y, &w)| acc + y * w);
        if value <= sigma + tol * (T::one() + sigma.abs()) || !push_unique(&mut columns, candidate) {
            break;
        }
        master = solve_master(&columns, k_nodes)?;
    }

    let mut fractions = vec![vec![T::zero(); m_slots]; k_nodes];
    for (col, &lambda) in columns.iter().zip(&master.x[1..]) {
        if lambda > T::zero() {
            for (t, &k) in col.assignment.iter().enumerate() {
                fractions[k][t] = fractions[k][t] + lambda;
            }
        }
    }
    let schedule = Schedule { fractions };
    let value = schedule.min_throughput(rates, slot_duration);
    Ok((schedule, value))
}

#[derive(Debug, Clone)]
struct Column<T> {
    assignment: Vec<usize>,
    throughput: Vec<T>,
}

impl<T: Scalar> Column<T> {
    fn new(assignment: Vec<usize>, weighted: &[Vec<T>]) -> Self {
        let mut throughput = vec![T::zero(); weighted.len()];
        for (t, &k) in assignment.iter().enumerate() {
            throughput[k] = throughput[k] + weighted[k][t];
        }
        Self { assignment, throughput }
    }
}

fn push_unique<T: Scalar>(columns: &mut Vec<Column<T>>, col: Column<T>) -> bool {
    if columns.iter().any(|c| c.assignment == col.assignment) {
        return false;
    }
    columns.push(col);
    true
}

/// Best pure assignment under node weights: each slot goes to the node with
/// the largest weighted rate, lowest index on ties.
fn price<T: Scalar>(weights: &[T], weighted: &[Vec<T>]) -> Column<T> {
    let m_slots = weighted[0].len();
    let assignment = (0..m_slots)
        .map(|t| {
            let mut best = 0;
            let mut best_val = weights[0] * weighted[0][t];
            for k in 1..weights.len() {
                let v = weights[k] * weighted[k][t];
                if v > best_val {
                    best = k;
                    best_val = v;
                }
            }
            best
        })
        .collect();
    Column::new(assignment, weighted)
}

/// Master over the current columns: variables `[m, lambda_1..lambda_J]`.
fn solve_master<T: Scalar>(columns: &[Column<T>], k_nodes: usize) -> Result<simplex::LpSolution<T>> {
    let n_vars = columns.len() + 1;
    let mut c = vec![T::zero(); n_vars];
    c[0] = T::one();
    let mut a = Vec::with_capacity(k_nodes + 1);
    for k in 0..k_nodes {
        let mut row = Vec::with_capacity(n_vars);
        row.push(T::one());
        row.extend(columns.iter().map(|col| -col.throughput[k]));
        a.push(row);
    }
    let mut convexity = vec![T::one(); n_vars];
    convexity[0] = T::zero();
    a.push(convexity);
    let mut b = vec![T::zero(); k_nodes + 1];
    b[k_nodes] = T::one();
    simplex::maximize(&c, &a, &b)
}
