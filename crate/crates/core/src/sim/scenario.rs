//! Scenario configuration and seeded generation.
//!
//! Scenario files hold one `key = value` pair per line (`#` comments).
//! Common keys: `case`, `seed`, `mode`, `horizon`, `step_cap`,
//! `distance_mode`, `max_speed`, `tolerance`. Organ delivery adds
//! `route_length`, `battery`, `delivery_time`, `base_drain`, `speed_drain`.
//! Surveillance adds `box_size`, `chaser_speed`, `ego`, `chaser`
//! (each `x y`), `pursuit_start`, `pursuit_steps`, `detect_radius`,
//! `waypoints` (`x y; x y; ...`) and `cornered`.
//!
//! `mode` is `weakening(<fallback feature>)` or `priority(<f1> > <f2>)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::drone::DistanceMode;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseStudy {
    OrganDelivery,
    Surveillance,
}

impl CaseStudy {
    /// The two interacting features, in resolution order.
    pub fn features(self) -> [&'static str; 2] {
        match self {
            CaseStudy::OrganDelivery => ["land", "deliver"],
            CaseStudy::Surveillance => ["runaway", "boundary"],
        }
    }

    /// Weakening with each fallback, then both priority orderings.
    pub fn modes(self) -> Vec<Mode> {
        let [a, b] = self.features();
        let (primary, other) = match self {
            CaseStudy::OrganDelivery => (b, a),
            CaseStudy::Surveillance => (a, b),
        };
        vec![
            Mode::Weakening { fallback: primary.into() },
            Mode::Weakening { fallback: other.into() },
            Mode::Priority { ordering: vec![a.into(), b.into()] },
            Mode::Priority { ordering: vec![b.into(), a.into()] },
        ]
    }

    /// The weakening configuration the headline comparison uses.
    pub fn primary_mode(self) -> Mode {
        self.modes().remove(0)
    }
}

impl fmt::Display for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseStudy::OrganDelivery => "organ_delivery",
            CaseStudy::Surveillance => "surveillance",
        })
    }
}

impl FromStr for CaseStudy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "organ_delivery" => Ok(CaseStudy::OrganDelivery),
            "surveillance" => Ok(CaseStudy::Surveillance),
            _ => Err(SimError::Config(format!("unknown case study `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Mode {
    Weakening { fallback: String },
    Priority { ordering: Vec<String> },
}

impl Mode {
    pub fn is_weakening(&self) -> bool {
        matches!(self, Mode::Weakening { .. })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Weakening { fallback } => write!(f, "weakening({fallback})"),
            Mode::Priority { ordering } => write!(f, "priority({})", ordering.join(">")),
        }
    }
}

impl FromStr for Mode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::Config(format!("bad mode `{s}`"));
        let s = s.trim();
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let inner = rest.strip_suffix(')').ok_or_else(bad)?.trim();
        match head.trim() {
            "weakening" if !inner.is_empty() => Ok(Mode::Weakening { fallback: inner.to_string() }),
            "priority" => {
                let ordering: Vec<String> = inner.split('>').map(|f| f.trim().to_string()).collect();
                if ordering.iter().any(String::is_empty) {
                    return Err(bad());
                }
                Ok(Mode::Priority { ordering })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeliverySetup {
    pub route_length: f64,
    pub battery: f64,
    pub delivery_time: f64,
    pub base_drain: f64,
    pub speed_drain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveillanceSetup {
    pub box_size: f64,
    pub chaser_speed: f64,
    pub ego: (f64, f64),
    pub chaser: (f64, f64),
    pub pursuit_start: usize,
    pub pursuit_steps: usize,
    pub detect_radius: f64,
    pub waypoints: Vec<(f64, f64)>,
    /// Generated to trap the ego in a corner; expected to be unrecoverable.
    pub cornered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Setup {
    Delivery(DeliverySetup),
    Surveillance(SurveillanceSetup),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub mode: Mode,
    pub horizon: usize,
    pub step_cap: usize,
    pub distance_mode: DistanceMode,
    pub max_speed: f64,
    /// Conflict tolerance on payload distance.
    pub tolerance: f64,
    pub setup: Setup,
}

pub const DEFAULT_HORIZON: usize = 2;
pub const DEFAULT_STEP_CAP: usize = 600;

impl ScenarioConfig {
    pub fn case(&self) -> CaseStudy {
        match self.setup {
            Setup::Delivery(_) => CaseStudy::OrganDelivery,
            Setup::Surveillance(_) => CaseStudy::Surveillance,
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.horizon == 0 || self.step_cap == 0 || !(self.max_speed > 0.0) {
            return bad("horizon, step_cap and max_speed must be positive");
        }
        let features = self.case().features();
        let known = |f: &String| features.contains(&f.as_str());
        match &self.mode {
            Mode::Weakening { fallback } if !known(fallback) => return bad("fallback is not a feature of this case"),
            Mode::Priority { ordering } if ordering.len() != 2 || !ordering.iter().all(known) || ordering[0] == ordering[1] => {
                return bad("priority ordering must rank both features of this case")
            }
            _ => {}
        }
        match &self.setup {
            Setup::Delivery(d) => {
                if !(d.route_length > 0.0 && d.delivery_time >= 1.0 && (0.0..=100.0).contains(&d.battery)) {
                    return bad("route_length, delivery_time or battery out of range");
                }
            }
            Setup::Surveillance(s) => {
                if !(s.chaser_speed > self.max_speed) {
                    return bad("the chaser must be faster than the ego");
                }
                let inside = |(x, y): (f64, f64)| (0.0..=s.box_size).contains(&x) && (0.0..=s.box_size).contains(&y);
                if !inside(s.ego) || !s.waypoints.iter().all(|&w| inside(w)) {
                    return bad("ego and waypoints must lie inside the boundary");
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SimError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(SimError::Config(format!("line {}: `{}` given twice", i + 1, k.trim())));
            }
        }
        let mut take = |k: &str| kv.remove(k);
        fn num<T: FromStr>(k: &str, v: Option<String>) -> Result<Option<T>, SimError> {
            v.map(|s| s.parse::<T>().map_err(|_| SimError::Config(format!("bad value for `{k}`: {s}")))).transpose()
        }
        let need = |k: &str, v: Option<String>| v.ok_or_else(|| SimError::Config(format!("missing `{k}`")));
        let case: CaseStudy = need("case", take("case"))?.parse()?;
        let mode = match take("mode") {
            Some(m) => m.parse()?,
            None => case.primary_mode(),
        };
        let seed = num("seed", take("seed"))?.unwrap_or(0);
        let horizon = num("horizon", take("horizon"))?.unwrap_or(DEFAULT_HORIZON);
        let step_cap = num("step_cap", take("step_cap"))?.unwrap_or(DEFAULT_STEP_CAP);
        let distance_mode = match take("distance_mode") {
            Some(s) => s.parse().map_err(SimError::Config)?,
            None => DistanceMode::default(),
        };
        let default_speed = match case {
            CaseStudy::OrganDelivery => 10.0,
            CaseStudy::Surveillance => 5.0,
        };
        let max_speed = num("max_speed", take("max_speed"))?.unwrap_or(default_speed);
        let tolerance = num("tolerance", take("tolerance"))?.unwrap_or(0.5 * max_speed);
        let setup = match case {
            CaseStudy::OrganDelivery => Setup::Delivery(DeliverySetup {
                route_length: num::<f64>("route_length", take("route_length"))?
                    .ok_or_else(|| SimError::Config("missing `route_length`".into()))?,
                battery: num("battery", take("battery"))?.unwrap_or(100.0),
                delivery_time: num::<f64>("delivery_time", take("delivery_time"))?
                    .ok_or_else(|| SimError::Config("missing `delivery_time`".into()))?,
                base_drain: num("base_drain", take("base_drain"))?.unwrap_or(0.05),
                speed_drain: num("speed_drain", take("speed_drain"))?.unwrap_or(0.02),
            }),
            CaseStudy::Surveillance => {
                let point = |k: &str, v: Option<String>| -> Result<(f64, f64), SimError> {
                    let v = need(k, v)?;
                    parse_point(&v).ok_or_else(|| SimError::Config(format!("bad point for `{k}`: {v}")))
                };
                let ego = point("ego", take("ego"))?;
                let chaser = point("chaser", take("chaser"))?;
                let waypoints = match take("waypoints") {
                    Some(w) => w
                        .split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|p| parse_point(p).ok_or_else(|| SimError::Config(format!("bad waypoint `{p}`"))))
                        .collect::<Result<Vec<_>, _>>()?,
                    None => Vec::new(),
                };
                Setup::Surveillance(SurveillanceSetup {
                    box_size: num("box_size", take("box_size"))?.unwrap_or(200.0),
                    chaser_speed: num("chaser_speed", take("chaser_speed"))?.unwrap_or(6.0),
                    ego,
                    chaser,
                    pursuit_start: num("pursuit_start", take("pursuit_start"))?.unwrap_or(0),
                    pursuit_steps: num("pursuit_steps", take("pursuit_steps"))?.unwrap_or(30),
                    detect_radius: num("detect_radius", take("detect_radius"))?.unwrap_or(30.0),
                    waypoints,
                    cornered: num("cornered", take("cornered"))?.unwrap_or(false),
                })
            }
        };
        if let Some(k) = kv.keys().next() {
            return Err(SimError::Config(format!("unknown key `{k}` for {case}")));
        }
        let cfg = ScenarioConfig { seed, mode, horizon, step_cap, distance_mode, max_speed, tolerance, setup };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_point(s: &str) -> Option<(f64, f64)> {
    let mut it = s.split_whitespace().map(str::parse::<f64>);
    let p = (it.next()?.ok()?, it.next()?.ok()?);
    it.next().is_none().then_some(p)
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "case = {}", self.case())?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "mode = {}", self.mode)?;
        writeln!(f, "horizon = {}", self.horizon)?;
        writeln!(f, "step_cap = {}", self.step_cap)?;
        let dm = match self.distance_mode {
            DistanceMode::Octagonal => "octagonal",
            DistanceMode::Linf => "linf",
        };
        writeln!(f, "distance_mode = {dm}")?;
        writeln!(f, "max_speed = {}", self.max_speed)?;
        writeln!(f, "tolerance = {}", self.tolerance)?;
        match &self.setup {
            Setup::Delivery(d) => {
                writeln!(f, "route_length = {}", d.route_length)?;
                writeln!(f, "battery = {}", d.battery)?;
                writeln!(f, "delivery_time = {}", d.delivery_time)?;
                writeln!(f, "base_drain = {}", d.base_drain)?;
                writeln!(f, "speed_drain = {}", d.speed_drain)
            }
            Setup::Surveillance(s) => {
                writeln!(f, "box_size = {}", s.box_size)?;
                writeln!(f, "chaser_speed = {}", s.chaser_speed)?;
                writeln!(f, "ego = {} {}", s.ego.0, s.ego.1)?;
                writeln!(f, "chaser = {} {}", s.chaser.0, s.chaser.1)?;
                writeln!(f, "pursuit_start = {}", s.pursuit_start)?;
                writeln!(f, "pursuit_steps = {}", s.pursuit_steps)?;
                writeln!(f, "detect_radius = {}", s.detect_radius)?;
                let w: Vec<String> = s.waypoints.iter().map(|(x, y)| format!("{x} {y}")).collect();
                writeln!(f, "waypoints = {}", w.join("; "))?;
                writeln!(f, "cornered = {}", s.cornered)
            }
        }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn delivery(rng: &mut ChaCha8Rng, max_speed: f64) -> DeliverySetup {
    let route_length = round2(rng.gen_range(1500.0..3000.0));
    // feasible at full speed with a 10-50% margin
    let margin = rng.gen_range(0.1..0.5);
    let delivery_time = (route_length / max_speed * (1.0 + margin)).ceil();
    DeliverySetup {
        route_length,
        battery: round2(rng.gen_range(55.0..95.0)),
        delivery_time,
        base_drain: 0.05,
        speed_drain: 0.02,
    }
}

fn surveillance(rng: &mut ChaCha8Rng, index: usize) -> SurveillanceSetup {
    let box_size = 200.0;
    let waypoints = (0..4).map(|_| (round2(rng.gen_range(30.0..170.0)), round2(rng.gen_range(30.0..170.0)))).collect();
    // every fifth scenario starts in a corner with the chaser close by
    if index % 5 == 0 {
        let (cx, cy) = [(0.0, 0.0), (box_size, 0.0), (0.0, box_size), (box_size, box_size)][rng.gen_range(0..4)];
        let inward = |c: f64, d: f64| if c == 0.0 { d } else { box_size - d };
        let ego = (round2(inward(cx, rng.gen_range(2.0..8.0))), round2(inward(cy, rng.gen_range(2.0..8.0))));
        let gap = rng.gen_range(20.0..26.0);
        let chaser = (round2(inward(cx, ego.0.min(box_size - ego.0) + gap)), round2(inward(cy, ego.1.min(box_size - ego.1) + gap)));
        return SurveillanceSetup {
            box_size,
            chaser_speed: 6.0,
            ego,
            chaser,
            pursuit_start: 0,
            pursuit_steps: 60,
            detect_radius: 30.0,
            waypoints,
            cornered: true,
        };
    }
    // otherwise near a wall, chaser coming from the interior
    let wall = rng.gen_range(0..4);
    let along = round2(rng.gen_range(40.0..160.0));
    let off = round2(rng.gen_range(8.0..30.0));
    let depth = round2(off + rng.gen_range(35.0..60.0));
    let place = |d: f64| match wall {
        0 => (along, d),
        1 => (box_size - d, along),
        2 => (along, box_size - d),
        _ => (d, along),
    };
    let chaser = place(depth);
    let lateral = round2(rng.gen_range(-20.0..20.0));
    let chaser = match wall {
        0 | 2 => (chaser.0 + lateral, chaser.1),
        _ => (chaser.0, chaser.1 + lateral),
    };
    SurveillanceSetup {
        box_size,
        chaser_speed: 6.0,
        ego: place(off),
        chaser,
        pursuit_start: rng.gen_range(0..10),
        pursuit_steps: rng.gen_range(10..25),
        detect_radius: 30.0,
        waypoints,
        cornered: false,
    }
}

/// `count` scenarios drawn from a generator seeded with `master_seed`; each
/// carries its own derived seed. Modes are set to the case's primary mode.
pub fn generate_scenarios(case: CaseStudy, count: usize, master_seed: u64) -> Vec<ScenarioConfig> {
    let mut master = ChaCha8Rng::seed_from_u64(master_seed);
    (0..count)
        .map(|i| {
            let seed: u64 = master.gen();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (max_speed, setup) = match case {
                CaseStudy::OrganDelivery => (10.0, Setup::Delivery(delivery(&mut rng, 10.0))),
                CaseStudy::Surveillance => (5.0, Setup::Surveillance(surveillance(&mut rng, i))),
            };
            ScenarioConfig {
                seed,
                mode: case.primary_mode(),
                horizon: DEFAULT_HORIZON,
                step_cap: DEFAULT_STEP_CAP,
                distance_mode: DistanceMode::default(),
                max_speed,
                tolerance: 0.5 * max_speed,
                setup,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_parse_and_print() {
        for m in CaseStudy::OrganDelivery.modes().into_iter().chain(CaseStudy::Surveillance.modes()) {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert_eq!("priority(land > deliver)".parse::<Mode>().unwrap(), Mode::Priority { ordering: vec!["land".into(), "deliver".into()] });
        assert!("weakening()".parse::<Mode>().is_err());
        assert!("greedy(x)".parse::<Mode>().is_err());
    }

    #[test]
    fn generation_is_deterministic_and_distinct() {
        for case in [CaseStudy::OrganDelivery, CaseStudy::Surveillance] {
            let a = generate_scenarios(case, 25, 42);
            assert_eq!(a, generate_scenarios(case, 25, 42));
            assert_ne!(a, generate_scenarios(case, 25, 43));
            for (i, x) in a.iter().enumerate() {
                x.validate().unwrap();
                assert!(a[i + 1..].iter().all(|y| y.setup != x.setup));
            }
        }
    }

    #[test]
    fn generated_ranges() {
        let c = &generate_scenarios(CaseStudy::OrganDelivery, 1, 7)[0];
        let Setup::Delivery(d) = &c.setup else { panic!() };
        assert!((1500.0..3000.0).contains(&d.route_length));
        assert!((55.0..95.0).contains(&d.battery));
        let slack = d.delivery_time * c.max_speed / d.route_length;
        assert!((1.1..=1.5 + 1e-2).contains(&slack), "{slack}");
        let s = generate_scenarios(CaseStudy::Surveillance, 10, 7);
        assert_eq!(s.iter().filter(|c| matches!(&c.setup, Setup::Surveillance(x) if x.cornered)).count(), 2);
    }

    #[test]
    fn config_file_roundtrip() {
        for case in [CaseStudy::OrganDelivery, CaseStudy::Surveillance] {
            for c in generate_scenarios(case, 6, 3) {
                assert_eq!(ScenarioConfig::parse(&c.to_string()).unwrap(), c);
            }
        }
        let minimal = "case = organ_delivery\nroute_length = 100\ndelivery_time = 20\n";
        let c = ScenarioConfig::parse(minimal).unwrap();
        assert_eq!(c.mode, Mode::Weakening { fallback: "deliver".into() });
        assert!(ScenarioConfig::parse("case = organ_delivery\nroute_length = 100\ndelivery_time = 20\nwind = 3\n").is_err());
        assert!(ScenarioConfig::parse("case = surveillance\nego = 1 1\nchaser = 5 5\nchaser_speed = 4\n").is_err());
    }
}
