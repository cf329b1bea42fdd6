//! The four built-in features: requirements with their weakening bounds,
//! activation conditions, and the action each feature asks for on its own.

use crate::env::drone::{delivery_actions, direction_speeds};
use crate::resolver::{Activation, FeatureAction, FeatureSpec};
use crate::weakstl::{param_specs, parse_weakstl, ParamKind};

use super::scenario::{CaseStudy, ScenarioConfig, Setup};
use super::world::World;

pub const LAND: &str = "G[0,1]((battery < 40){20} -> F[0,1](is_landing >= 1))";
pub const DELIVER: &str = "G[0,1](curr_speed > required_speed)";
pub const RUNAWAY: &str = "G[0,1]((distance_to_chaser > 10){8})";
pub const BOUNDARY: &str = "G[0,1](distance_to_boundary <= 20 -> F[0,1]((distance_to_boundary > 20){18}))";

/// Motion commands of both case studies share this action space.
pub const MOTION: &str = "motion";

fn spec(id: &str, req: &str, activation: &str) -> FeatureSpec {
    let requirement = parse_weakstl(req).expect("built-in requirement parses");
    let activation = Activation::parse(activation).expect("built-in activation parses");
    FeatureSpec::new(id, requirement, activation, MOTION)
}

/// Safe landing, delivery planner, runaway enforcer and boundary enforcer.
pub fn builtin_features() -> Vec<FeatureSpec> {
    vec![
        spec("land", LAND, "battery < 40 & is_landing < 1"),
        spec("deliver", DELIVER, "distance_to_dest > 0 & is_landing < 1"),
        spec("runaway", RUNAWAY, "distance_to_chaser < 30"),
        spec("boundary", BOUNDARY, "distance_to_boundary <= 20"),
    ]
}

/// The interacting pair of a scenario, with its detection radius applied.
pub fn scenario_features(cfg: &ScenarioConfig) -> [FeatureSpec; 2] {
    let all = builtin_features();
    let get = |id: &str| all.iter().find(|f| f.id == id).cloned().expect("built-in feature");
    let [a, b] = cfg.case().features();
    let mut pair = [get(a), get(b)];
    if let Setup::Surveillance(s) = &cfg.setup {
        pair[0].activation = Activation::parse(&format!("distance_to_chaser < {}", s.detect_radius)).expect("activation");
    }
    pair
}

/// Divisor that makes a requirement's robustness comparable across
/// features: its largest predicate slack in signal units, or for
/// unweakenable requirements the scenario's initial required speed.
pub fn normalization(spec: &FeatureSpec, cfg: &ScenarioConfig) -> f64 {
    let slack = param_specs(&spec.requirement)
        .iter()
        .filter_map(|p| match p.kind {
            ParamKind::PredSlack { scale } => Some(p.bound as f64 * scale),
            _ => None,
        })
        .fold(0.0, f64::max);
    if slack > 0.0 {
        return slack;
    }
    match &cfg.setup {
        Setup::Delivery(d) => d.route_length / d.delivery_time,
        Setup::Surveillance(_) => cfg.max_speed,
    }
}

fn toward(from: (f64, f64), to: (f64, f64), speed: f64) -> (f64, f64) {
    let (dx, dy) = (to.0 - from.0, to.1 - from.1);
    let d = dx.hypot(dy);
    if d < 1e-12 {
        return (0.0, 0.0);
    }
    let s = speed.min(d) / d;
    (dx * s, dy * s)
}

/// What `feature` would do on its own in the current world, with the
/// activation flag evaluated on the world's exact signal.
pub fn native_action(spec: &FeatureSpec, world: &World) -> FeatureAction {
    let cfg = world.config();
    let active = spec.activation.holds(|n| world.value(n)).unwrap_or(false);
    let vmax = cfg.max_speed;
    let mut a = match spec.id.as_str() {
        "deliver" => {
            let speed = vmax.min(world.value("distance_to_dest").unwrap_or(0.0));
            FeatureAction::vector(&spec.id, MOTION, vec![speed, 0.0]).with_command(delivery_actions(speed, false))
        }
        "land" => FeatureAction::vector(&spec.id, MOTION, vec![0.0, vmax]).with_command(delivery_actions(0.0, true)),
        "runaway" => {
            let ego = world.ego();
            let chaser = world.chaser();
            let away = toward(chaser, ego, 1.0);
            let v = if away == (0.0, 0.0) { toward(ego, world.centre(), vmax) } else { (away.0 * vmax, away.1 * vmax) };
            velocity(&spec.id, v, vmax)
        }
        "boundary" => velocity(&spec.id, toward(world.ego(), world.centre(), vmax), vmax),
        other => panic!("no behaviour for feature `{other}`"),
    };
    a.active = active;
    a
}

fn velocity(id: &str, v: (f64, f64), vmax: f64) -> FeatureAction {
    FeatureAction::vector(id, MOTION, vec![v.0, v.1]).with_command(direction_speeds(v.0, v.1, vmax))
}

/// Action when no feature is active: hover for delivery, patrol otherwise.
pub fn idle_action(world: &World) -> crate::env::Actions {
    let cfg = world.config();
    match cfg.case() {
        CaseStudy::OrganDelivery => delivery_actions(0.0, false),
        CaseStudy::Surveillance => {
            let target = world.waypoint().unwrap_or_else(|| world.centre());
            let v = toward(world.ego(), target, cfg.max_speed);
            direction_speeds(v.0, v.1, cfg.max_speed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weakstl::{minimal_requirement, weaken_param_count};

    #[test]
    fn builtin_bounds() {
        let f = builtin_features();
        let ids: Vec<&str> = f.iter().map(|x| x.id.as_str()).collect();
        assert_eq!(ids, ["land", "deliver", "runaway", "boundary"]);
        let bounds = |i: usize| param_specs(&f[i].requirement).iter().map(|p| p.bound).collect::<Vec<_>>();
        assert_eq!(bounds(0), vec![20]);
        assert_eq!(weaken_param_count(&f[1].requirement), 0);
        assert_eq!(bounds(2), vec![8]);
        assert_eq!(bounds(3), vec![18]);
        assert_eq!(minimal_requirement(&f[2].requirement).unwrap().to_string(), "G[0,1] (distance_to_chaser - 2 > 0)");
    }

    #[test]
    fn landing_minimal_form() {
        let land = &builtin_features()[0];
        let m = minimal_requirement(&land.requirement).unwrap();
        let s = crate::stl::Signal::new(
            vec!["battery".into(), "is_landing".into()],
            vec![vec![25.0, 0.0], vec![24.0, 0.0], vec![23.0, 0.0]],
        )
        .unwrap();
        // 25% is above the minimal 20% threshold, so not landing is fine
        assert!(crate::satisfied(&m, &s, 0).unwrap());
        assert!(!crate::satisfied(&land.requirement.strip(), &s, 0).unwrap());
    }
}
