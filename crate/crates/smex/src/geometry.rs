//! Small planar geometry primitives shared across the crate.

use std::fmt;

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Radial projection onto the circle of radius `r` about the origin.
    pub fn project_to_circle(self, r: f64) -> Point {
        let len = self.norm();
        if len == 0.0 {
            return self;
        }
        let s = r / len;
        Point::new(self.x * s, self.y * s)
    }
}

/// Subdomain label. The interface separates region 1 from region 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    One,
    Two,
}

impl Region {
    pub fn other(self) -> Region {
        match self {
            Region::One => Region::Two,
            Region::Two => Region::One,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Region::One => 1,
            Region::Two => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Region> {
        match v {
            1 => Some(Region::One),
            2 => Some(Region::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Twice the signed area of the triangle (a, b, c); positive when
/// counterclockwise.
pub fn signed_area_x2(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)
}

pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * signed_area_x2(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_area_orientation() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(1.0, 0.0);
        let c = Point::new(0.0, 1.0);
        assert_eq!(signed_area_x2(a, b, c), 1.0);
        assert_eq!(signed_area_x2(a, c, b), -1.0);
    }

    #[test]
    fn circle_projection_preserves_direction() {
        let p = Point::new(3.0, 4.0).project_to_circle(1.0);
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert!((p.x - 0.6).abs() < 1e-15 && (p.y - 0.8).abs() < 1e-15);
    }
}
