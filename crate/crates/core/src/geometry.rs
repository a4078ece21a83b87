//! Planar geometry for footprints: oriented rectangles, separating-axis
//! overlap and ray casting.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Self = Self { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Self::new(x, y)
    }
}

/// Oriented rectangle given by centre, half extents and rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Vec2,
    pub half: Vec2,
    pub yaw: f64,
}

/// Minimum translation separating two overlapping rectangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    /// Unit normal pointing from the first rectangle towards the second.
    pub normal: Vec2,
    pub depth: f64,
}

impl Obb {
    pub fn new(center: Vec2, length: f64, width: f64, yaw: f64) -> Self {
        Self {
            center,
            half: Vec2::new(length / 2.0, width / 2.0),
            yaw,
        }
    }

    pub fn axes(&self) -> [Vec2; 2] {
        let u = Vec2::from_angle(self.yaw);
        [u, u.perp()]
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let [u, v] = self.axes();
        let (a, b) = (u * self.half.x, v * self.half.y);
        let c = self.center;
        [c + a + b, c - a + b, c - a - b, c + a - b]
    }

    fn project_radius(&self, axis: Vec2) -> f64 {
        let [u, v] = self.axes();
        self.half.x * u.dot(axis).abs() + self.half.y * v.dot(axis).abs()
    }

    /// Separating-axis test. Touching rectangles do not count as overlapping.
    pub fn overlap(&self, other: &Obb) -> Option<Contact> {
        let d = other.center - self.center;
        let mut best: Option<Contact> = None;
        for axis in self.axes().into_iter().chain(other.axes()) {
            let dist = d.dot(axis);
            let depth = self.project_radius(axis) + other.project_radius(axis) - dist.abs();
            if depth <= 0.0 {
                return None;
            }
            if best.is_none_or(|b| depth < b.depth) {
                let normal = if dist < 0.0 { -axis } else { axis };
                best = Some(Contact { normal, depth });
            }
        }
        best
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let local = (p - self.center).rotate(-self.yaw);
        local.x.abs() <= self.half.x && local.y.abs() <= self.half.y
    }

    /// Distance along the half-line from `origin` in direction `bearing` to
    /// the rectangle boundary. An origin inside the rectangle hits at 0.
    pub fn raycast(&self, origin: Vec2, bearing: f64) -> Option<f64> {
        let o = (origin - self.center).rotate(-self.yaw);
        let dir = Vec2::from_angle(bearing - self.yaw);
        let mut t_min = 0.0_f64;
        let mut t_max = f64::INFINITY;
        for (o, d, h) in [(o.x, dir.x, self.half.x), (o.y, dir.y, self.half.y)] {
            if d.abs() < 1e-15 {
                if o.abs() > h {
                    return None;
                }
            } else {
                let t1 = (-h - o) / d;
                let t2 = (h - o) / d;
                let (near, far) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                t_min = t_min.max(near);
                t_max = t_max.min(far);
                if t_min > t_max {
                    return None;
                }
            }
        }
        Some(t_min)
    }
}
