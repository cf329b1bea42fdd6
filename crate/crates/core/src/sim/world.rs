use std::fmt;

use crate::env::drone::{organ_delivery_model, surveillance_model, DeliveryParams, SurveillanceParams};
use crate::env::{Actions, State, TransitionSystem};

use super::scenario::{ScenarioConfig, Setup};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ending {
    Arrived,
    Landed,
    BatteryDepleted,
    PatrolComplete,
    StepCap,
}

impl fmt::Display for Ending {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ending::Arrived => "arrived",
            Ending::Landed => "landed",
            Ending::BatteryDepleted => "battery_depleted",
            Ending::PatrolComplete => "patrol_complete",
            Ending::StepCap => "step_cap",
        })
    }
}

/// Deterministic drone world. Ego motion and battery follow the scenario's
/// environment model; the world adds what the model holds fixed over a
/// prediction (chaser steering, required delivery speed) and measures
/// distances exactly.
#[derive(Debug, Clone)]
pub struct World {
    cfg: ScenarioConfig,
    model: TransitionSystem,
    state: State,
    clock: usize,
    waypoint: usize,
    ending: Option<Ending>,
}

const ARRIVAL_EPS: f64 = 1e-9;

impl World {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let (model, state) = match &cfg.setup {
            Setup::Delivery(d) => {
                let p = DeliveryParams {
                    max_speed: cfg.max_speed,
                    base_drain: d.base_drain,
                    speed_drain: d.speed_drain,
                    max_distance: d.route_length.max(1.0),
                    max_time: d.delivery_time + cfg.step_cap as f64 + 1.0,
                };
                let ts = organ_delivery_model(&p)?;
                let q = State(vec![d.route_length, d.battery, 0.0, 0.0, d.delivery_time, 0.0]);
                (ts, q)
            }
            Setup::Surveillance(s) => {
                let p = SurveillanceParams {
                    max_speed: cfg.max_speed,
                    chaser_speed: s.chaser_speed,
                    box_size: s.box_size,
                    distance: cfg.distance_mode,
                };
                let ts = surveillance_model(&p)?;
                let q = State(vec![s.ego.0, s.ego.1, s.chaser.0, s.chaser.1, 0.0, 0.0]);
                (ts, q)
            }
        };
        let mut w = World { cfg: cfg.clone(), model, state, clock: 0, waypoint: 0, ending: None };
        w.refresh();
        Ok(w)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn model(&self) -> &TransitionSystem {
        &self.model
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn clock(&self) -> usize {
        self.clock
    }

    pub fn ending(&self) -> Option<Ending> {
        self.ending
    }

    /// Trace columns: model states, then exact derived distances.
    pub fn variables(&self) -> Vec<String> {
        let mut v: Vec<String> = self.model.states().iter().map(|s| s.name.clone()).collect();
        if matches!(self.cfg.setup, Setup::Surveillance(_)) {
            v.push("distance_to_chaser".into());
            v.push("distance_to_boundary".into());
        }
        v
    }

    pub fn sample(&self) -> Vec<f64> {
        let mut row = self.state.0.clone();
        if let Setup::Surveillance(s) = &self.cfg.setup {
            let (e, c) = (self.ego(), self.chaser());
            row.push((e.0 - c.0).hypot(e.1 - c.1));
            row.push(e.0.min(s.box_size - e.0).min(e.1).min(s.box_size - e.1));
        }
        row
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        let i = self.variables().iter().position(|v| v == name)?;
        Some(self.sample()[i])
    }

    fn get(&self, name: &str) -> f64 {
        self.state.0[self.model.state_index(name).expect("model state")]
    }

    fn set(&mut self, name: &str, v: f64) {
        let i = self.model.state_index(name).expect("model state");
        self.state.0[i] = v;
    }

    pub fn ego(&self) -> (f64, f64) {
        (self.get("x"), self.get("y"))
    }

    pub fn chaser(&self) -> (f64, f64) {
        (self.get("chaser_x"), self.get("chaser_y"))
    }

    pub fn centre(&self) -> (f64, f64) {
        match &self.cfg.setup {
            Setup::Surveillance(s) => (s.box_size / 2.0, s.box_size / 2.0),
            Setup::Delivery(_) => (0.0, 0.0),
        }
    }

    pub fn waypoint(&self) -> Option<(f64, f64)> {
        match &self.cfg.setup {
            Setup::Surveillance(s) => s.waypoints.get(self.waypoint).copied(),
            Setup::Delivery(_) => None,
        }
    }

    /// Recomputes the quantities the model treats as constants.
    fn refresh(&mut self) {
        match &self.cfg.setup {
            Setup::Delivery(_) => {
                let req = self.get("distance_to_dest") / self.get("remaining_delivery_time").max(1.0);
                self.set("required_speed", req);
            }
            Setup::Surveillance(s) => {
                let (e, c) = (self.ego(), self.chaser());
                let (dx, dy) = (e.0 - c.0, e.1 - c.1);
                let d = dx.hypot(dy);
                let pursuing = self.clock >= s.pursuit_start && self.clock < s.pursuit_start + s.pursuit_steps;
                let (vx, vy) = if d < 1e-12 {
                    (0.0, 0.0)
                } else if pursuing {
                    let k = s.chaser_speed.min(d) / d;
                    (dx * k, dy * k)
                } else {
                    (-dx / d * s.chaser_speed, -dy / d * s.chaser_speed)
                };
                self.set("chaser_vx", vx);
                self.set("chaser_vy", vy);
            }
        }
    }

    /// Applies one action through the model and advances the clock.
    pub fn apply(&mut self, a: &Actions) -> Result<(), SimError> {
        if self.ending.is_some() {
            return Err(SimError::Finished);
        }
        self.state = self.model.step(&self.state, a)?.state;
        self.clock += 1;
        match &self.cfg.setup {
            Setup::Delivery(_) => {
                if self.get("is_landing") >= 1.0 {
                    self.ending = Some(Ending::Landed);
                } else if self.get("distance_to_dest") <= ARRIVAL_EPS {
                    self.ending = Some(Ending::Arrived);
                } else if self.get("battery") <= 0.0 {
                    // out of power: the drone drops
                    self.set("curr_speed", 0.0);
                    self.ending = Some(Ending::BatteryDepleted);
                }
            }
            Setup::Surveillance(s) => {
                if let Some(w) = self.waypoint() {
                    let e = self.ego();
                    if (e.0 - w.0).hypot(e.1 - w.1) < 1e-6 {
                        self.waypoint += 1;
                        if self.waypoint == s.waypoints.len() {
                            self.ending = Some(Ending::PatrolComplete);
                        }
                    }
                }
            }
        }
        if self.ending.is_none() && self.clock >= self.cfg.step_cap {
            self.ending = Some(Ending::StepCap);
        }
        self.refresh();
        Ok(())
    }
}
