//! Discrete-time field simulation: sheep flocking forces, dog repulsion,
//! fence avoidance, collision clamping and pen capture.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Axis, Fence, Geometry, SimConfig, SpawnRegion};
use crate::rng::{rng_from_seed, SimRng};
use crate::vec2::Vec2;

/// Distance floor below which two agents count as coincident.
pub const COINCIDENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sheep {
    pub pos: Vec2,
    pub vel: Vec2,
    pub captured: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dog {
    pub pos: Vec2,
    pub vel: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub sheep: Vec<Sheep>,
    pub dogs: Vec<Dog>,
    pub step: usize,
}

impl WorldState {
    pub fn captured_count(&self) -> usize {
        self.sheep.iter().filter(|s| s.captured).count()
    }

    pub fn all_captured(&self) -> bool {
        self.sheep.iter().all(|s| s.captured)
    }

    /// `(index, sheep)` for every sheep still in play.
    pub fn free_sheep(&self) -> impl Iterator<Item = (usize, &Sheep)> {
        self.sheep.iter().enumerate().filter(|(_, s)| !s.captured)
    }
}

fn cluster_magnitude(r: f64, cfg: &SimConfig) -> f64 {
    cfg.f_a - cfg.f_r * (cfg.d_s * cfg.d_s / (r * r) - 1.0)
}

fn dog_magnitude(r: f64, cfg: &SimConfig) -> f64 {
    cfg.f_d * (cfg.d_d * cfg.d_d / (r * r) - 1.0)
}

/// Force on the sheep at `p1` due to the sheep at `p2`. Positive magnitude
/// pulls toward `p2`, negative pushes away.
pub fn sheep_cluster_force(p1: Vec2, p2: Vec2, cfg: &SimConfig) -> Vec2 {
    let delta = p2 - p1;
    let r_sq = delta.norm_sq();
    if r_sq > cfg.d_s * cfg.d_s {
        return Vec2::ZERO;
    }
    let r = r_sq.sqrt();
    if r < COINCIDENT_EPS {
        return Vec2::new(cluster_magnitude(COINCIDENT_EPS, cfg).abs(), 0.0);
    }
    delta * (cluster_magnitude(r, cfg) / r)
}

/// Repulsion on a sheep from a dog, directed from the dog toward the sheep.
pub fn dog_repulsion_force(sheep: Vec2, dog: Vec2, cfg: &SimConfig) -> Vec2 {
    let delta = sheep - dog;
    let r_sq = delta.norm_sq();
    if r_sq > cfg.d_d * cfg.d_d {
        return Vec2::ZERO;
    }
    let r = r_sq.sqrt();
    if r < COINCIDENT_EPS {
        return Vec2::new(dog_magnitude(COINCIDENT_EPS, cfg).abs(), 0.0);
    }
    delta * (dog_magnitude(r, cfg) / r)
}

/// Sum of repulsions from every fence within `d_f` whose perpendicular foot
/// lies on the fence segment.
pub fn fence_force(pos: Vec2, geometry: &Geometry, cfg: &SimConfig) -> Vec2 {
    let mut total = Vec2::ZERO;
    let mid = geometry.field_size / 2.0;
    for fence in &geometry.fences {
        let (across, along) = match fence.axis {
            Axis::Vertical => (pos.x, pos.y),
            Axis::Horizontal => (pos.y, pos.x),
        };
        if along < fence.lo || along > fence.hi {
            continue;
        }
        let d_perp = (across - fence.at).abs();
        if d_perp >= cfg.d_f {
            continue;
        }
        let magnitude = cfg.f_f * (cfg.d_f - d_perp) / cfg.d_f;
        // On the fence line itself, push toward the field interior.
        let side = if across > fence.at {
            1.0
        } else if across < fence.at {
            -1.0
        } else if mid >= fence.at {
            1.0
        } else {
            -1.0
        };
        total += match fence.axis {
            Axis::Vertical => Vec2::new(side * magnitude, 0.0),
            Axis::Horizontal => Vec2::new(0.0, side * magnitude),
        };
    }
    total
}

/// Moves an agent from `from` to `to`, clamping at the field walls and the
/// interior pen fence. Clamped coordinates land on the fence and the matching
/// velocity component is zeroed.
fn resolve_fences(from: Vec2, to: &mut Vec2, vel: &mut Vec2, geometry: &Geometry) {
    let size = geometry.field_size;
    if to.x < 0.0 {
        to.x = 0.0;
        vel.x = 0.0;
    } else if to.x > size {
        to.x = size;
        vel.x = 0.0;
    }
    if to.y < 0.0 {
        to.y = 0.0;
        vel.y = 0.0;
    } else if to.y > size {
        to.y = size;
        vel.y = 0.0;
    }

    let Fence { at, lo, hi, .. } = geometry.pen_fence();
    // An agent sitting exactly on the fence line counts as on the field side.
    let crosses = (from.x < at && to.x > at) || (from.x >= at && to.x < at);
    if crosses {
        let t = (at - from.x) / (to.x - from.x);
        let y_cross = from.y + t * (to.y - from.y);
        if (lo..=hi).contains(&y_cross) {
            to.x = at;
            vel.x = 0.0;
        }
    }
}

/// Advances the world by one step. `dog_forces` holds one force per dog,
/// computed by the caller from the pre-step state.
pub fn step_world(state: &mut WorldState, dog_forces: &[Vec2], cfg: &SimConfig, geometry: &Geometry) {
    assert_eq!(dog_forces.len(), state.dogs.len(), "one force per dog");

    let n = state.sheep.len();
    let mut forces = vec![Vec2::ZERO; n];
    for i in 0..n {
        if state.sheep[i].captured {
            continue;
        }
        let pi = state.sheep[i].pos;
        for j in (i + 1)..n {
            if state.sheep[j].captured {
                continue;
            }
            let f = sheep_cluster_force(pi, state.sheep[j].pos, cfg);
            forces[i] += f;
            forces[j] += -f;
        }
        for dog in &state.dogs {
            forces[i] += dog_repulsion_force(pi, dog.pos, cfg);
        }
        forces[i] += fence_force(pi, geometry, cfg);
    }

    for (sheep, force) in state.sheep.iter_mut().zip(&forces) {
        if sheep.captured {
            continue;
        }
        let mut vel = (sheep.vel + *force * cfg.dt).capped(cfg.v_s);
        let mut pos = sheep.pos + vel * cfg.dt;
        resolve_fences(sheep.pos, &mut pos, &mut vel, geometry);
        if geometry.in_pen(pos) {
            sheep.captured = true;
            sheep.pos = geometry.pen_corner();
            sheep.vel = Vec2::ZERO;
        } else {
            sheep.pos = pos;
            sheep.vel = vel;
        }
    }

    for (dog, force) in state.dogs.iter_mut().zip(dog_forces) {
        let force = if force.is_finite() {
            *force
        } else {
            log::debug!("non-finite dog force {force:?} replaced by zero");
            Vec2::ZERO
        };
        let mut vel = (dog.vel + force * cfg.dt).capped(cfg.v_d);
        let mut pos = dog.pos + vel * cfg.dt;
        resolve_fences(dog.pos, &mut pos, &mut vel, geometry);
        dog.pos = pos;
        dog.vel = vel;
    }

    state.step += 1;
}

/// Random initial placement: dogs at rest inside the pen, sheep in the
/// configured spawn region with a random heading and speed in `[0, v_s]`.
pub fn spawn(cfg: &SimConfig, geometry: &Geometry, rng: &mut SimRng) -> WorldState {
    let size = geometry.field_size;
    let dogs = (0..cfg.n_dogs)
        .map(|_| {
            let x = rng.random_range(0.0..=geometry.pen_size);
            let y = rng.random_range(geometry.pen_bottom()..=size);
            Dog {
                pos: Vec2::new(x, y),
                vel: Vec2::ZERO,
            }
        })
        .collect();
    let (xs, ys) = match cfg.sheep_spawn_region {
        SpawnRegion::RightHalf => ((size / 2.0, size), (0.0, size)),
        SpawnRegion::LowerHalf => ((0.0, size), (0.0, size / 2.0)),
    };
    let sheep = (0..cfg.n_sheep)
        .map(|_| {
            let x = rng.random_range(xs.0..=xs.1);
            let y = rng.random_range(ys.0..=ys.1);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let speed = rng.random_range(0.0..=cfg.v_s);
            Sheep {
                pos: Vec2::new(x, y),
                vel: Vec2::from_polar(angle, speed),
                captured: false,
            }
        })
        .collect();
    WorldState { sheep, dogs, step: 0 }
}

/// Anything that can steer the dogs.
pub trait DogPolicy {
    fn dog_force(&self, state: &WorldState, dog: usize, cfg: &SimConfig, geometry: &Geometry, rng: &mut SimRng)
        -> Vec2;
}

impl<F> DogPolicy for F
where
    F: Fn(&WorldState, usize) -> Vec2,
{
    fn dog_force(&self, state: &WorldState, dog: usize, _: &SimConfig, _: &Geometry, _: &mut SimRng) -> Vec2 {
        self(state, dog)
    }
}

/// Snapshot of agent positions at one step, as written to trajectory files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFrame {
    pub step: usize,
    pub sheep: Vec<(f64, f64, bool)>,
    pub dogs: Vec<(f64, f64)>,
}

impl TraceFrame {
    pub fn capture(state: &WorldState) -> Self {
        TraceFrame {
            step: state.step,
            sheep: state.sheep.iter().map(|s| (s.pos.x, s.pos.y, s.captured)).collect(),
            dogs: state.dogs.iter().map(|d| (d.pos.x, d.pos.y)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub captured: usize,
    pub n_sheep: usize,
    pub steps_run: usize,
    pub trace: Option<Vec<TraceFrame>>,
}

impl EpisodeResult {
    pub fn captured_fraction(&self) -> f64 {
        self.captured as f64 / self.n_sheep as f64
    }
}

/// Runs one seeded episode. The policy is queried once per dog per step on
/// the pre-step state; the episode stops early once every sheep is captured.
pub fn run_episode<P: DogPolicy + ?Sized>(
    policy: &P,
    cfg: &SimConfig,
    geometry: &Geometry,
    seed: u64,
    record_trace: bool,
) -> EpisodeResult {
    let mut rng = rng_from_seed(seed);
    let mut state = spawn(cfg, geometry, &mut rng);
    let mut trace = record_trace.then(|| vec![TraceFrame::capture(&state)]);
    let mut forces = vec![Vec2::ZERO; state.dogs.len()];
    for _ in 0..cfg.steps {
        if state.all_captured() {
            break;
        }
        for (dog, force) in forces.iter_mut().enumerate() {
            *force = policy.dog_force(&state, dog, cfg, geometry, &mut rng);
        }
        step_world(&mut state, &forces, cfg, geometry);
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceFrame::capture(&state));
        }
    }
    EpisodeResult {
        captured: state.captured_count(),
        n_sheep: state.sheep.len(),
        steps_run: state.step,
        trace,
    }
}
