//! Physical constants, geometry and agent counts for one simulated field.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec2::Vec2;

/// A configuration field failed validation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field} {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            field,
            message: message.into(),
        }
    }
}

/// Where sheep are placed at the start of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpawnRegion {
    /// x in [field/2, field], any y.
    RightHalf,
    /// y in [0, field/2], any x.
    LowerHalf,
}

/// The pen reference point the steering point is computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenAnchor {
    Center,
    /// The top-left corner, where captured sheep are parked.
    Corner,
    /// Midpoint of the open bottom edge.
    Opening,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Sheep-sheep attraction constant.
    pub f_a: f64,
    /// Sheep-sheep repulsion constant.
    pub f_r: f64,
    /// Dog repulsion constant.
    pub f_d: f64,
    /// Fence repulsion constant.
    pub f_f: f64,
    /// Sheep interaction radius.
    pub d_s: f64,
    /// Dog interaction radius.
    pub d_d: f64,
    /// Fence interaction radius.
    pub d_f: f64,
    /// Max sheep speed.
    pub v_s: f64,
    /// Max dog speed.
    pub v_d: f64,
    pub dt: f64,
    pub steps: usize,
    pub field_size: f64,
    pub pen_size: f64,
    pub n_sheep: usize,
    pub n_dogs: usize,
    pub sheep_spawn_region: SpawnRegion,
    pub steering_offset: f64,
    pub steering_anchor: PenAnchor,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            f_a: 0.1,
            f_r: 0.05,
            f_d: 5.0,
            f_f: 1.0,
            d_s: 20.0,
            d_d: 30.0,
            d_f: 5.0,
            v_s: 1.0,
            v_d: 3.0,
            dt: 1.0,
            steps: 500,
            field_size: 100.0,
            pen_size: 25.0,
            n_sheep: 20,
            n_dogs: 1,
            sheep_spawn_region: SpawnRegion::RightHalf,
            steering_offset: 10.0,
            steering_anchor: PenAnchor::Center,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("d_s", self.d_s),
            ("d_d", self.d_d),
            ("d_f", self.d_f),
            ("v_s", self.v_s),
            ("v_d", self.v_d),
            ("dt", self.dt),
            ("field_size", self.field_size),
            ("pen_size", self.pen_size),
            ("steering_offset", self.steering_offset),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::new(field, "must be a finite value > 0"));
            }
        }
        for (field, value) in [
            ("f_a", self.f_a),
            ("f_r", self.f_r),
            ("f_d", self.f_d),
            ("f_f", self.f_f),
        ] {
            if !value.is_finite() {
                return Err(ConfigError::new(field, "must be finite"));
            }
        }
        if self.steps < 1 {
            return Err(ConfigError::new("steps", "must be ≥ 1"));
        }
        if self.pen_size >= self.field_size {
            return Err(ConfigError::new("pen_size", "must be < field_size"));
        }
        if self.n_sheep < 1 {
            return Err(ConfigError::new("n_sheep", "must be ≥ 1"));
        }
        if self.n_dogs < 1 {
            return Err(ConfigError::new("n_dogs", "must be ≥ 1"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::new(self.field_size, self.pen_size)
    }
}

/// Orientation of a straight fence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// x = const.
    Vertical,
    /// y = const.
    Horizontal,
}

/// An axis-aligned fence segment. `at` is the fixed coordinate and
/// `[lo, hi]` the extent along the other axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fence {
    pub axis: Axis,
    pub at: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Field walls plus the interior pen fence. Origin bottom-left, y up; the
/// pen occupies the top-left corner and is open along its bottom edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub field_size: f64,
    pub pen_size: f64,
    pub fences: Vec<Fence>,
}

impl Geometry {
    pub fn new(field_size: f64, pen_size: f64) -> Self {
        let f = field_size;
        let fences = vec![
            Fence {
                axis: Axis::Vertical,
                at: 0.0,
                lo: 0.0,
                hi: f,
            },
            Fence {
                axis: Axis::Vertical,
                at: f,
                lo: 0.0,
                hi: f,
            },
            Fence {
                axis: Axis::Horizontal,
                at: 0.0,
                lo: 0.0,
                hi: f,
            },
            Fence {
                axis: Axis::Horizontal,
                at: f,
                lo: 0.0,
                hi: f,
            },
            Fence {
                axis: Axis::Vertical,
                at: pen_size,
                lo: f - pen_size,
                hi: f,
            },
        ];
        Geometry {
            field_size,
            pen_size,
            fences,
        }
    }

    /// The interior fence on the pen's right side.
    pub fn pen_fence(&self) -> Fence {
        self.fences[4]
    }

    /// Lower y bound of the pen (the opening).
    pub fn pen_bottom(&self) -> f64 {
        self.field_size - self.pen_size
    }

    /// Where captured sheep are parked.
    pub fn pen_corner(&self) -> Vec2 {
        Vec2::new(0.0, self.field_size)
    }

    pub fn pen_center(&self) -> Vec2 {
        Vec2::new(self.pen_size / 2.0, self.field_size - self.pen_size / 2.0)
    }

    pub fn pen_opening_mid(&self) -> Vec2 {
        Vec2::new(self.pen_size / 2.0, self.pen_bottom())
    }

    pub fn anchor(&self, anchor: PenAnchor) -> Vec2 {
        match anchor {
            PenAnchor::Center => self.pen_center(),
            PenAnchor::Corner => self.pen_corner(),
            PenAnchor::Opening => self.pen_opening_mid(),
        }
    }

    /// Capture test: left of the interior fence and above the opening.
    /// Both are strict; the outer walls already bound the other two sides.
    pub fn in_pen(&self, p: Vec2) -> bool {
        p.x < self.pen_size && p.y > self.pen_bottom()
    }

    /// Closed pen square, used for dog spawning.
    pub fn in_pen_closed(&self, p: Vec2) -> bool {
        (0.0..=self.pen_size).contains(&p.x) && (self.pen_bottom()..=self.field_size).contains(&p.y)
    }

    pub fn in_field(&self, p: Vec2) -> bool {
        (0.0..=self.field_size).contains(&p.x) && (0.0..=self.field_size).contains(&p.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_parameters() {
        let c = SimConfig::default();
        assert_eq!((c.f_a, c.f_r, c.f_d, c.f_f), (0.1, 0.05, 5.0, 1.0));
        assert_eq!((c.d_s, c.d_d, c.d_f), (20.0, 30.0, 5.0));
        assert_eq!((c.v_s, c.v_d), (1.0, 3.0));
        assert_eq!((c.dt, c.steps), (1.0, 500));
        assert_eq!((c.field_size, c.pen_size, c.steering_offset), (100.0, 25.0, 10.0));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation_names_field() {
        let c = SimConfig {
            pen_size: 100.0,
            ..SimConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().field, "pen_size");
        let c = SimConfig {
            v_d: 0.0,
            ..SimConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().field, "v_d");
        let c = SimConfig {
            steps: 0,
            ..SimConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().to_string(), "steps must be ≥ 1");
    }

    #[test]
    fn pen_geometry() {
        let g = SimConfig::default().geometry();
        assert_eq!(g.pen_center(), Vec2::new(12.5, 87.5));
        assert_eq!(g.pen_corner(), Vec2::new(0.0, 100.0));
        assert!(g.in_pen(Vec2::new(10.0, 80.0)));
        assert!(!g.in_pen(Vec2::new(25.0, 80.0)));
        assert!(!g.in_pen(Vec2::new(10.0, 75.0)));
        // the opening has no fence
        assert!(g
            .fences
            .iter()
            .all(|f| !(f.axis == Axis::Horizontal && f.at == g.pen_bottom())));
    }
}
