//! Reference drone models for the two built-in case studies.
//!
//! Organ delivery flies a 1-D route: `distance_to_dest` shrinks by the
//! commanded speed, battery drains by `base + c * speed`, and the binary
//! `land` action starts an absorbing landing. `required_speed` is held
//! constant over a prediction; the simulator refreshes it every step from
//! `distance_to_dest / remaining_delivery_time`.
//!
//! Surveillance is planar. The ego picks speeds along eight compass
//! directions whose sum is capped, which covers the octagon inscribed in the
//! speed circle. The chaser keeps the velocity it had when the prediction
//! starts. Euclidean distance to the chaser is replaced by a linear lower
//! bound ([`DistanceMode`]); distance to the axis-aligned boundary is exact.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::stl::AffineExpr;

use super::{Actions, EnvError, OutputExpr, TransitionSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryParams {
    pub max_speed: f64,
    pub base_drain: f64,
    pub speed_drain: f64,
    pub max_distance: f64,
    pub max_time: f64,
}

impl Default for DeliveryParams {
    fn default() -> Self {
        Self { max_speed: 10.0, base_drain: 0.05, speed_drain: 0.02, max_distance: 10_000.0, max_time: 1000.0 }
    }
}

pub fn organ_delivery_model(p: &DeliveryParams) -> Result<TransitionSystem, EnvError> {
    let v = AffineExpr::var;
    let drain_moving = v("battery").offset(-p.base_drain).add(&AffineExpr::term("spd", -p.speed_drain));
    TransitionSystem::builder()
        .state("distance_to_dest", 0.0, p.max_distance)
        .state("battery", 0.0, 100.0)
        .state("is_landing", 0.0, 1.0)
        .state("curr_speed", 0.0, p.max_speed)
        .state("remaining_delivery_time", -p.max_time, p.max_time)
        .state("required_speed", 0.0, p.max_distance)
        .action("spd", 0.0, p.max_speed)
        .binary_action("land")
        .switched("distance_to_dest", "land", v("distance_to_dest"), v("distance_to_dest").sub(&v("spd")))
        .switched("battery", "land", v("battery").offset(-p.base_drain), drain_moving)
        .switched("is_landing", "land", AffineExpr::constant(1.0), v("is_landing"))
        .switched("curr_speed", "land", AffineExpr::constant(0.0), v("spd"))
        .next("remaining_delivery_time", v("remaining_delivery_time").offset(-1.0))
        .next("required_speed", v("required_speed"))
        .constraint(v("is_landing").sub(&v("land")), 0.0)
        .build()
}

/// Actions `[spd, land]` of the delivery model.
pub fn delivery_actions(speed: f64, land: bool) -> Actions {
    Actions(vec![speed, if land { 1.0 } else { 0.0 }])
}

/// Linear lower bound used for the ego-chaser distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMode {
    /// Largest projection on eight compass directions; at least 0.92 of the Euclidean distance.
    #[default]
    Octagonal,
    /// `max(|dx|, |dy|)`; at least 0.70 of the Euclidean distance.
    Linf,
}

impl std::str::FromStr for DistanceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "octagonal" => Ok(DistanceMode::Octagonal),
            "linf" => Ok(DistanceMode::Linf),
            _ => Err(format!("unknown distance mode `{s}` (octagonal or linf)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveillanceParams {
    pub max_speed: f64,
    pub chaser_speed: f64,
    pub box_size: f64,
    pub distance: DistanceMode,
}

impl Default for SurveillanceParams {
    fn default() -> Self {
        Self { max_speed: 5.0, chaser_speed: 6.0, box_size: 200.0, distance: DistanceMode::Octagonal }
    }
}

/// Names of the eight direction-speed actions, counter-clockwise from east.
pub const DIRECTIONS: [&str; 8] = ["u_e", "u_ne", "u_n", "u_nw", "u_w", "u_sw", "u_s", "u_se"];

fn unit(k: usize) -> (f64, f64) {
    const UNITS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        (0.0, 1.0),
        (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        (-1.0, 0.0),
        (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        (0.0, -1.0),
        (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    ];
    UNITS[k]
}

pub fn surveillance_model(p: &SurveillanceParams) -> Result<TransitionSystem, EnvError> {
    let v = AffineExpr::var;
    let l = p.box_size;
    let mut dx = v("x");
    let mut dy = v("y");
    let mut speed_sum = AffineExpr::constant(0.0);
    let mut b = TransitionSystem::builder()
        .state("x", 0.0, l)
        .state("y", 0.0, l)
        .state("chaser_x", -l, 2.0 * l)
        .state("chaser_y", -l, 2.0 * l)
        .state("chaser_vx", -p.chaser_speed, p.chaser_speed)
        .state("chaser_vy", -p.chaser_speed, p.chaser_speed);
    for (k, name) in DIRECTIONS.iter().enumerate() {
        b = b.action(name, 0.0, p.max_speed);
        let (c, s) = unit(k);
        dx.add_term(*name, c);
        dy.add_term(*name, s);
        speed_sum.add_term(*name, 1.0);
    }
    let rel_x = v("x").sub(&v("chaser_x"));
    let rel_y = v("y").sub(&v("chaser_y"));
    let chaser = match p.distance {
        DistanceMode::Octagonal => (0..8)
            .map(|k| {
                let (c, s) = unit(k);
                rel_x.scale(c).add(&rel_y.scale(s))
            })
            .collect(),
        DistanceMode::Linf => vec![rel_x.clone(), rel_x.scale(-1.0), rel_y.clone(), rel_y.scale(-1.0)],
    };
    b.next("x", dx)
        .next("y", dy)
        .next("chaser_x", v("chaser_x").add(&v("chaser_vx")))
        .next("chaser_y", v("chaser_y").add(&v("chaser_vy")))
        .next("chaser_vx", v("chaser_vx"))
        .next("chaser_vy", v("chaser_vy"))
        .output("distance_to_chaser", OutputExpr::Max(chaser))
        .output(
            "distance_to_boundary",
            OutputExpr::Min(vec![
                v("x"),
                v("x").scale(-1.0).offset(l),
                v("y"),
                v("y").scale(-1.0).offset(l),
            ]),
        )
        .constraint(speed_sum, p.max_speed)
        .build()
}

/// Splits a velocity over the two compass directions adjacent to it. The
/// result is scaled down if the direction speeds would exceed `max_speed`.
pub fn direction_speeds(vx: f64, vy: f64, max_speed: f64) -> Actions {
    let mut u = vec![0.0; 8];
    let norm = vx.hypot(vy);
    if norm > 1e-12 {
        let angle = vy.atan2(vx).rem_euclid(std::f64::consts::TAU);
        let sector = ((angle / std::f64::consts::FRAC_PI_4).floor() as usize).min(7);
        let (ax, ay) = unit(sector);
        let (bx, by) = unit((sector + 1) % 8);
        // solve [a b] (s, t) = v
        let det = ax * by - ay * bx;
        let s = ((vx * by - vy * bx) / det).max(0.0);
        let t = ((ax * vy - ay * vx) / det).max(0.0);
        let total = s + t;
        let k = if total > max_speed { max_speed / total } else { 1.0 };
        u[sector] = s * k;
        u[(sector + 1) % 8] = t * k;
    }
    Actions(u)
}

/// Ego velocity produced by direction speeds.
pub fn velocity_of(a: &Actions) -> (f64, f64) {
    a.0.iter().take(8).enumerate().fold((0.0, 0.0), |(x, y), (k, &s)| {
        let (c, d) = unit(k);
        (x + c * s, y + d * s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{parse_model, ActionSequence, State};

    #[test]
    fn shipped_models_match_builders() {
        let organ = organ_delivery_model(&DeliveryParams::default()).unwrap();
        let text = include_str!("../../../../models/organ_delivery.model");
        assert_eq!(parse_model(text).unwrap(), organ);
        let surv = surveillance_model(&SurveillanceParams::default()).unwrap();
        let text = include_str!("../../../../models/surveillance.model");
        assert_eq!(parse_model(text).unwrap(), surv);
    }

    #[test]
    fn delivery_dynamics() {
        let ts = organ_delivery_model(&DeliveryParams::default()).unwrap();
        let q = State(vec![100.0, 50.0, 0.0, 8.0, 20.0, 5.0]);
        let s = ts.step(&q, &delivery_actions(10.0, false)).unwrap().state;
        assert_eq!(s.0[0], 90.0);
        assert!((s.0[1] - 49.75).abs() < 1e-12);
        assert_eq!((s.0[2], s.0[3], s.0[4], s.0[5]), (0.0, 10.0, 19.0, 5.0));
        let l = ts.step(&q, &delivery_actions(10.0, true)).unwrap().state;
        assert_eq!((l.0[0], l.0[2], l.0[3]), (100.0, 1.0, 0.0));
        // landing cannot be aborted
        assert!(ts.step(&l, &delivery_actions(0.0, false)).is_err());
    }

    #[test]
    fn direction_split_reproduces_velocity() {
        for (vx, vy) in [(3.0, 0.0), (1.0, 2.0), (-2.5, 1.0), (-1.0, -4.0), (0.5, -0.2), (0.0, 0.0)] {
            let a = direction_speeds(vx, vy, 5.0);
            assert!(a.0.iter().sum::<f64>() <= 5.0 + 1e-12);
            let (x, y) = velocity_of(&a);
            assert!((x - vx).abs() < 1e-9 && (y - vy).abs() < 1e-9, "{vx},{vy} -> {x},{y}");
        }
        let a = direction_speeds(0.0, -20.0, 5.0);
        assert_eq!(velocity_of(&a), (0.0, -5.0));
    }

    #[test]
    fn chaser_moves_at_fixed_velocity() {
        let ts = surveillance_model(&SurveillanceParams::default()).unwrap();
        let q = State(vec![100.0, 100.0, 40.0, 100.0, 6.0, 0.0]);
        let hold = Actions(vec![0.0; 8]);
        let s = ts.predict(&q, &ActionSequence(vec![hold; 3])).unwrap();
        assert_eq!(s.column("chaser_x").unwrap(), vec![40.0, 46.0, 52.0, 58.0]);
        assert_eq!(s.value("distance_to_chaser", 0), Some(60.0));
        assert_eq!(s.value("distance_to_boundary", 0), Some(100.0));
    }

    #[test]
    fn distance_modes_bound_euclidean() {
        for mode in [DistanceMode::Octagonal, DistanceMode::Linf] {
            let ts = surveillance_model(&SurveillanceParams { distance: mode, ..Default::default() }).unwrap();
            for (dx, dy) in [(3.0, 4.0), (-7.0, 1.0), (5.0, 5.0), (0.0, -2.0)] {
                let q = State(vec![100.0, 100.0, 100.0 - dx, 100.0 - dy, 0.0, 0.0]);
                let d = ts.outputs_at(&q).unwrap()[0];
                let e = f64::hypot(dx, dy);
                let floor = if mode == DistanceMode::Octagonal { 0.92 } else { 0.70 };
                assert!(d <= e + 1e-9 && d >= floor * e, "{mode:?} {d} vs {e}");
            }
        }
    }
}
