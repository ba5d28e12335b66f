use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A 2-D position, velocity or force in field units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_polar(angle: f64, magnitude: f64) -> Self {
        Vec2::new(magnitude * angle.cos(), magnitude * angle.sin())
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for a (near-)zero vector.
    pub fn unit(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Replaces each non-finite component with zero.
    pub fn sanitized(self) -> Vec2 {
        let fix = |v: f64| if v.is_finite() { v } else { 0.0 };
        Vec2::new(fix(self.x), fix(self.y))
    }

    /// Rescales to exactly `max` if the norm exceeds it.
    pub fn capped(self, max: f64) -> Vec2 {
        let n = self.norm();
        if n > max {
            self * (max / n)
        } else {
            self
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_rescales_to_exact_max() {
        let v = Vec2::new(3.0, 4.0).capped(1.0);
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert_eq!(Vec2::new(0.3, 0.4).capped(1.0), Vec2::new(0.3, 0.4));
    }

    #[test]
    fn sanitize_zeroes_non_finite() {
        let v = Vec2::new(f64::INFINITY, 3.0).sanitized();
        assert_eq!(v, Vec2::new(0.0, 3.0));
        assert_eq!(Vec2::new(f64::NAN, f64::NEG_INFINITY).sanitized(), Vec2::ZERO);
    }

    #[test]
    fn zero_has_no_unit() {
        assert!(Vec2::ZERO.unit().is_none());
        assert_eq!(Vec2::new(0.0, 2.0).unit(), Some(Vec2::new(0.0, 1.0)));
    }
}
