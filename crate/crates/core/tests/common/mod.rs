//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use irsuav::channel::FallbackState;
use irsuav::irs::SurfaceKind;
use irsuav::scenario::{load_scenario, Scenario};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

pub fn shipped(name: &str) -> Scenario<f64> {
    load_scenario(scenario_path(name)).expect("shipped scenario loads")
}

/// Id, position, facing normal, coverage radius, explicit served set.
type Facade = (String, [f64; 3], [f64; 3], Option<f64>, Option<Vec<String>>);

/// Straight-from-the-formulas evaluation of the hybrid deployment rule.
/// Reads only the raw scenario data; shares no code with the library's
/// deployment module.
pub struct ReferenceDeployment {
    g0: f64,
    snr_scale: f64,
    los: f64,
    nlos: f64,
    rules: Vec<(String, String, f64, FallbackState)>,
    bs: (String, [f64; 3]),
    users: Vec<(String, [f64; 3])>,
    aerial: (String, [f64; 3]),
    terrestrial: Facade,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSplit {
    pub n1: u32,
    pub altitude: f64,
    pub min_rate: f64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl ReferenceDeployment {
    pub fn from_scenario(s: &Scenario<f64>) -> Self {
        let e = s.deployment_experiment().unwrap();
        let pos = |id: &str| {
            let p = s.node(id).unwrap().position;
            [p.x, p.y, p.z]
        };
        let a = s.surface(&e.aerial_surface).unwrap();
        let t = s.surface(&e.terrestrial_surface).unwrap();
        assert_eq!(a.kind, SurfaceKind::Aerial);
        let n = t.facing_normal.unwrap();
        Self {
            g0: 10f64.powf(s.radio.ref_path_gain_db / 10.0),
            snr_scale: s.radio.tx_power / s.radio.noise_power,
            los: s.path_loss[&e.los_class].exponent,
            nlos: s.path_loss[&e.nlos_class].exponent,
            rules: s
                .link_state_rules
                .iter()
                .map(|r| {
                    (
                        r.between[0].clone(),
                        r.between[1].clone(),
                        r.min_altitude_for_los,
                        r.fallback,
                    )
                })
                .collect(),
            bs: (e.bs.clone(), pos(&e.bs)),
            users: e.users.iter().map(|u| (u.clone(), pos(u))).collect(),
            aerial: (a.id.clone(), [a.position.x, a.position.y, a.position.z]),
            terrestrial: (
                t.id.clone(),
                [t.position.x, t.position.y, t.position.z],
                [n.x, n.y, n.z],
                t.coverage_radius,
                t.covered_node_ids.clone(),
            ),
        }
    }

    fn rule(&self, a: &str, b: &str) -> (f64, FallbackState) {
        self.rules
            .iter()
            .find(|r| (r.0 == a && r.1 == b) || (r.0 == b && r.1 == a))
            .map(|r| (r.2, r.3))
            .unwrap_or((0.0, FallbackState::Nlos))
    }

    /// Exponent of a link, `None` if blocked.
    fn exponent(&self, a: (&str, [f64; 3]), b: (&str, [f64; 3])) -> Option<f64> {
        let (threshold, fallback) = self.rule(a.0, b.0);
        if a.1[2].max(b.1[2]) >= threshold {
            Some(self.los)
        } else {
            match fallback {
                FallbackState::Nlos => Some(self.nlos),
                FallbackState::Blocked => None,
            }
        }
    }

    fn gain(&self, d: f64, exponent: f64) -> f64 {
        self.g0 * d.max(1.0).powf(-exponent)
    }

    fn rate(&self, surface: (&str, [f64; 3]), elements: u32, user: usize) -> f64 {
        let u = (self.users[user].0.as_str(), self.users[user].1);
        let bs = (self.bs.0.as_str(), self.bs.1);
        let (Some(e1), Some(e2)) = (self.exponent(bs, surface), self.exponent(surface, u)) else {
            return 0.0;
        };
        let amp =
            elements as f64 * self.gain(dist(bs.1, surface.1), e1).sqrt() * self.gain(dist(surface.1, u.1), e2).sqrt();
        // ln_1p keeps low-SNR rates accurate
        (self.snr_scale * amp * amp).ln_1p() / std::f64::consts::LN_2 / self.users.len() as f64
    }

    fn terrestrial_covers(&self, user: usize) -> bool {
        let (_, p, n, radius, explicit) = &self.terrestrial;
        let (id, u) = &self.users[user];
        if let Some(list) = explicit {
            return list.contains(id);
        }
        let off = [u[0] - p[0], u[1] - p[1], u[2] - p[2]];
        let front = off[0] * n[0] + off[1] * n[1] + off[2] * n[2] > 0.0;
        front && radius.is_none_or(|r| dist(*u, *p) <= r)
    }

    fn aerial_at(&self, altitude: f64) -> [f64; 3] {
        [self.aerial.1[0], self.aerial.1[1], altitude]
    }

    fn aerial_los(&self, user: usize, altitude: f64) -> bool {
        let (threshold, _) = self.rule(&self.aerial.0, &self.users[user].0);
        altitude.max(self.users[user].1[2]) >= threshold
    }

    fn threshold(&self, user: usize) -> f64 {
        self.rule(&self.aerial.0, &self.users[user].0).0
    }

    /// Best min-rate for one split under the hybrid rule, and the altitude.
    pub fn split(&self, n1: u32, n2: u32) -> (f64, f64) {
        let mut candidates: Vec<f64> = (0..self.users.len()).map(|u| self.threshold(u)).collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let terrestrial = (self.terrestrial.0.as_str(), self.terrestrial.1);
        let mut best: Option<(f64, f64)> = None;
        for h in candidates {
            let mut on_aerial = Vec::new();
            let mut choice = Vec::new();
            for u in 0..self.users.len() {
                let t = (n2 > 0 && self.terrestrial_covers(u)).then(|| self.rate(terrestrial, n2, u));
                let a =
                    (n1 > 0 && self.aerial_los(u, h)).then(|| self.rate((&self.aerial.0, self.aerial_at(h)), n1, u));
                let pick_aerial = match (t, a) {
                    (Some(t), Some(a)) => a > t,
                    (None, Some(_)) => true,
                    _ => false,
                };
                if pick_aerial {
                    on_aerial.push(u);
                }
                choice.push(if pick_aerial {
                    1
                } else if t.is_some() {
                    2
                } else {
                    0
                });
            }
            let altitude = on_aerial.iter().map(|&u| self.threshold(u)).fold(0.0, f64::max);
            let min_rate = (0..self.users.len())
                .map(|u| match choice[u] {
                    1 => self.rate((&self.aerial.0, self.aerial_at(altitude)), n1, u),
                    2 => self.rate(terrestrial, n2, u),
                    _ => 0.0,
                })
                .fold(f64::INFINITY, f64::min);
            let better = match best {
                None => true,
                Some((r, a)) => min_rate > r || (min_rate == r && altitude < a),
            };
            if better {
                best = Some((min_rate, altitude));
            }
        }
        best.unwrap()
    }

    /// Sequential enumeration of every split; ties go to the smallest n1.
    pub fn best_split(&self, budget: u32) -> ReferenceSplit {
        let mut best = ReferenceSplit {
            n1: 0,
            altitude: 0.0,
            min_rate: f64::NEG_INFINITY,
        };
        for n1 in 0..=budget {
            let (min_rate, altitude) = self.split(n1, budget - n1);
            if min_rate > best.min_rate {
                best = ReferenceSplit { n1, altitude, min_rate };
            }
        }
        best
    }
}
