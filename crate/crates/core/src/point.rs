use std::fmt;

/// A point of the plane. `x2` is the vertical coordinate; the flat
/// reference interface is `x2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    /// Reflection through the flat interface.
    pub fn mirror(&self) -> Point {
        Point::new(self.x1, -self.x2)
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}
