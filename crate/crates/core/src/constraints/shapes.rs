use alloc::vec::Vec;

use super::expr::Comparison;
use super::Point;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineSide {
    /// Left of the directed line `start -> end` (counter-clockwise side).
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Up,
    Down,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParabolaSide {
    /// The convex region the parabola opens into.
    Inside,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Circle {
        cx: f64,
        cy: f64,
        radius: f64,
    },
    /// Semi-axes `a` (along the rotated x direction) and `b`; `angle` in
    /// radians, counter-clockwise.
    Ellipse {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        angle: f64,
    },
    Polygon {
        vertices: Vec<(f64, f64)>,
    },
    /// Half-plane bounded by the line through `start` and `end`.
    Line {
        start: (f64, f64),
        end: (f64, f64),
        side: LineSide,
    },
    /// Parabola with the given vertex and focal length.
    Parabola {
        vertex: (f64, f64),
        focal: f64,
        orientation: Orientation,
        side: ParabolaSide,
    },
    /// Finite cylinder around `axis`; `center` holds the two coordinates
    /// perpendicular to the axis (in x, y, z order) and `range` the extent
    /// along it.
    Cylinder {
        axis: Axis,
        center: (f64, f64),
        radius: f64,
        range: (f64, f64),
    },
    UserDefined(Comparison),
}

impl Shape {
    pub(crate) fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(alloc::format!("{what} must be positive, got {v}")))
            }
        };
        match self {
            Shape::Circle { radius, .. } => positive(*radius, "radius"),
            Shape::Ellipse { a, b, .. } => {
                positive(*a, "semi-axis a")?;
                positive(*b, "semi-axis b")
            }
            Shape::Polygon { vertices } => validate_polygon(vertices),
            Shape::Line { start, end, .. } => {
                if start == end {
                    Err(Error::invalid("line endpoints coincide"))
                } else {
                    Ok(())
                }
            }
            Shape::Parabola { focal, .. } => positive(*focal, "focal length"),
            Shape::Cylinder { radius, range, .. } => {
                positive(*radius, "radius")?;
                if range.0 > range.1 {
                    return Err(Error::invalid("cylinder range is reversed"));
                }
                Ok(())
            }
            Shape::UserDefined(_) => Ok(()),
        }
    }

    /// Number of coordinates a point must have.
    pub fn dims(&self) -> usize {
        match self {
            Shape::Cylinder { .. } => 3,
            Shape::UserDefined(c) if c.uses_z() => 3,
            _ => 2,
        }
    }

    pub(crate) fn contains(&self, p: &Point) -> Result<bool> {
        let accepts = match self {
            Shape::Cylinder { .. } => p.dims() == 3,
            Shape::UserDefined(c) => !c.uses_z() || p.dims() == 3,
            _ => p.dims() == 2,
        };
        if !accepts {
            return Err(Error::InvalidPoint {
                expected: self.dims(),
                got: p.dims(),
            });
        }
        let (x, y) = (p.x, p.y);
        Ok(match self {
            Shape::Circle { cx, cy, radius } => (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius,
            Shape::Ellipse { cx, cy, a, b, angle } => {
                let (s, c) = (libm::sin(*angle), libm::cos(*angle));
                let (dx, dy) = (x - cx, y - cy);
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                (u / a) * (u / a) + (v / b) * (v / b) <= 1.0
            }
            Shape::Polygon { vertices } => polygon_contains(vertices, x, y),
            Shape::Line { start, end, side } => {
                let cross = (end.0 - start.0) * (y - start.1) - (end.1 - start.1) * (x - start.0);
                match side {
                    LineSide::Left => cross >= 0.0,
                    LineSide::Right => cross <= 0.0,
                }
            }
            Shape::Parabola {
                vertex,
                focal,
                orientation,
                side,
            } => {
                let (dx, dy) = (x - vertex.0, y - vertex.1);
                // (along the opening direction, across it)
                let (along, across) = match orientation {
                    Orientation::Up => (dy, dx),
                    Orientation::Down => (-dy, dx),
                    Orientation::Right => (dx, dy),
                    Orientation::Left => (-dx, dy),
                };
                let curve = across * across / (4.0 * focal);
                match side {
                    ParabolaSide::Inside => along >= curve,
                    ParabolaSide::Outside => along <= curve,
                }
            }
            Shape::Cylinder {
                axis,
                center,
                radius,
                range,
            } => {
                let z = p.z.unwrap_or(0.0);
                let (u, v, w) = match axis {
                    Axis::X => (y, z, x),
                    Axis::Y => (x, z, y),
                    Axis::Z => (x, y, z),
                };
                let (du, dv) = (u - center.0, v - center.1);
                du * du + dv * dv <= radius * radius && w >= range.0 && w <= range.1
            }
            Shape::UserDefined(c) => c.holds(x, y, p.z.unwrap_or(0.0)),
        })
    }
}

fn validate_polygon(v: &[(f64, f64)]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(Error::invalid("polygon needs at least 3 vertices"));
    }
    if v.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("polygon vertex is not finite"));
    }
    let area2: f64 = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    if area2 == 0.0 {
        return Err(Error::invalid("polygon has zero area"));
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::invalid("polygon is self-intersecting"));
            }
        }
    }
    Ok(())
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    orient(a, b, p) == 0.0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(q1, q2, p1) || on_segment(q1, q2, p2) || on_segment(p1, p2, q1) || on_segment(p1, p2, q2)
}

/// Winding-number test; points on an edge are inside.
pub(crate) fn polygon_contains(v: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = v.len();
    let p = (x, y);
    let mut winding = 0i32;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if on_segment(a, b, p) {
            return true;
        }
        if a.1 <= y {
            if b.1 > y && orient(a, b, p) > 0.0 {
                winding += 1;
            }
        } else if b.1 <= y && orient(a, b, p) < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}
