//! Binding programs and baselines to the simulator.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::config::{ConfigError, Geometry, SimConfig};
use crate::expr::ExprTree;
use crate::rng::SimRng;
use crate::sim::{DogPolicy, WorldState};
use crate::vec2::Vec2;

/// The named inputs an evolved program can read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminalSet {
    /// Own position and nearest free sheep.
    SingleDog4,
    /// Own position, the two other dogs (nearest first), nearest free
    /// sheep, flock mean and steering point. Defined for three dogs.
    MultiDog12,
}

const SINGLE_LABELS: [&str; 4] = ["dog-x", "dog-y", "sheep-x", "sheep-y"];
const MULTI_LABELS: [&str; 12] = [
    "dog-x", "dog-y", "dog2-x", "dog2-y", "dog3-x", "dog3-y", "sheep-x", "sheep-y", "flock-x", "flock-y", "steer-x",
    "steer-y",
];

impl TerminalSet {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            TerminalSet::SingleDog4 => &SINGLE_LABELS,
            TerminalSet::MultiDog12 => &MULTI_LABELS,
        }
    }

    pub fn arity(self) -> usize {
        self.labels().len()
    }

    /// Default set for a dog count: 1 → SingleDog4, 3 → MultiDog12.
    pub fn for_dogs(n_dogs: usize) -> Result<Self, ConfigError> {
        match n_dogs {
            1 => Ok(TerminalSet::SingleDog4),
            3 => Ok(TerminalSet::MultiDog12),
            n => Err(ConfigError::new(
                "n_dogs",
                format!("has no default terminal set for {n} dogs (use 1 or 3, or pass --terminals)"),
            )),
        }
    }

    /// Whether the set can drive `n_dogs` dogs.
    pub fn check_dogs(self, n_dogs: usize) -> Result<(), ConfigError> {
        match self {
            TerminalSet::SingleDog4 => Ok(()),
            TerminalSet::MultiDog12 if n_dogs == 3 => Ok(()),
            TerminalSet::MultiDog12 => Err(ConfigError::new("n_dogs", "must be 3 for the multi12 terminal set")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TerminalSet::SingleDog4 => "single4",
            TerminalSet::MultiDog12 => "multi12",
        }
    }
}

impl FromStr for TerminalSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "single4" => Ok(TerminalSet::SingleDog4),
            "multi12" => Ok(TerminalSet::MultiDog12),
            other => Err(format!("unknown terminal set {other:?} (expected single4 or multi12)")),
        }
    }
}

impl fmt::Display for TerminalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Point `offset` beyond `sheep` on the ray from `anchor` through `sheep`.
/// A dog standing there pushes the sheep toward the anchor.
pub fn steering_point(sheep: Vec2, anchor: Vec2, offset: f64) -> Vec2 {
    match (sheep - anchor).unit() {
        Some(dir) => sheep + dir * offset,
        None => sheep,
    }
}

/// Nearest free sheep to `from`, ties to the lower index.
pub fn nearest_free_sheep(state: &WorldState, from: Vec2) -> Option<Vec2> {
    let mut best: Option<(f64, Vec2)> = None;
    for (_, s) in state.free_sheep() {
        let d = from.distance(s.pos);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, s.pos));
        }
    }
    best.map(|(_, p)| p)
}

/// Mean position of the free sheep.
pub fn flock_center(state: &WorldState) -> Option<Vec2> {
    let mut sum = Vec2::ZERO;
    let mut n = 0usize;
    for (_, s) in state.free_sheep() {
        sum += s.pos;
        n += 1;
    }
    (n > 0).then(|| sum * (1.0 / n as f64))
}

/// Fills the terminal values seen by dog `dog`. With no free sheep left the
/// sheep-derived entries fall back to the steering anchor.
pub fn extract_params(
    state: &WorldState,
    dog: usize,
    cfg: &SimConfig,
    geometry: &Geometry,
    terminals: TerminalSet,
) -> Vec<f64> {
    let me = state.dogs[dog].pos;
    let anchor = geometry.anchor(cfg.steering_anchor);
    let sheep = nearest_free_sheep(state, me).unwrap_or(anchor);
    match terminals {
        TerminalSet::SingleDog4 => vec![me.x, me.y, sheep.x, sheep.y],
        TerminalSet::MultiDog12 => {
            let mut others: Vec<(f64, usize)> = state
                .dogs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != dog)
                .map(|(i, d)| (me.distance(d.pos), i))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let other = |k: usize| others.get(k).map_or(me, |&(_, i)| state.dogs[i].pos);
            let (d2, d3) = (other(0), other(1));
            let flock = flock_center(state).unwrap_or(anchor);
            let steer = steering_point(sheep, anchor, cfg.steering_offset);
            vec![
                me.x, me.y, d2.x, d2.y, d3.x, d3.y, sheep.x, sheep.y, flock.x, flock.y, steer.x, steer.y,
            ]
        }
    }
}

/// Where the handcrafted dog heads, given its own position and the nearest
/// free sheep.
///
/// The target is the steering point behind the sheep relative to the
/// middle of the pen opening. While the dog is on the pen side of the
/// sheep it heads for a flank point `2 * steering_offset` out to the side,
/// perpendicular to the opening-sheep line.
pub fn simple_dog_target(me: Vec2, sheep: Vec2, cfg: &SimConfig, geometry: &Geometry) -> Vec2 {
    let anchor = geometry.pen_opening_mid();
    let Some(outward) = (sheep - anchor).unit() else {
        return sheep;
    };
    let rel = me - sheep;
    if rel.x * outward.x + rel.y * outward.y >= 0.0 {
        return sheep + outward * cfg.steering_offset;
    }
    let perp = Vec2::new(-outward.y, outward.x);
    let side = if rel.x * perp.x + rel.y * perp.y >= 0.0 {
        1.0
    } else {
        -1.0
    };
    sheep + perp * (side * 2.0 * cfg.steering_offset)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    /// One shared program, evaluated per dog on that dog's own view.
    Evolved { tree: ExprTree, terminals: TerminalSet },
    /// Handcrafted baseline, see [`simple_dog_target`].
    SimpleDog,
    /// Uniform random heading, magnitude uniform in `[0, v_d]`.
    RandDog,
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Evolved { .. } => "evolved",
            Controller::SimpleDog => "simple",
            Controller::RandDog => "random",
        }
    }

    /// Rejects programs that read terminals the configured dogs can't supply.
    pub fn check(&self, cfg: &SimConfig, d_max: usize) -> Result<(), ConfigError> {
        if let Controller::Evolved { tree, terminals } = self {
            terminals.check_dogs(cfg.n_dogs)?;
            tree.validate(terminals.arity(), d_max)
                .map_err(|e| ConfigError::new("controller", e.to_string()))?;
        }
        Ok(())
    }
}

impl DogPolicy for Controller {
    fn dog_force(
        &self,
        state: &WorldState,
        dog: usize,
        cfg: &SimConfig,
        geometry: &Geometry,
        rng: &mut SimRng,
    ) -> Vec2 {
        match self {
            Controller::Evolved { tree, terminals } => {
                let params = extract_params(state, dog, cfg, geometry, *terminals);
                let (fx, fy) = tree.eval(&params);
                Vec2::new(fx, fy).sanitized()
            }
            Controller::SimpleDog => {
                let me = state.dogs[dog].pos;
                let Some(sheep) = nearest_free_sheep(state, me) else {
                    return Vec2::ZERO;
                };
                let target = simple_dog_target(me, sheep, cfg, geometry);
                (target - me).unit().map_or(Vec2::ZERO, |dir| dir * cfg.v_d)
            }
            Controller::RandDog => {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let magnitude = rng.random_range(0.0..=cfg.v_d);
                Vec2::from_polar(angle, magnitude)
            }
        }
    }
}
