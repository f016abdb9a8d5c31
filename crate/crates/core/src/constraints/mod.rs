//! Spatial constraint regions and the index sets they select.
//!
//! Image grids use `x = column`, `y = row` with the origin at the top-left
//! pixel; state index `i` is pixel `(i / width, i % width)`. Point clouds
//! carry explicit coordinates in field units. All regions are closed:
//! boundary points count as inside.

mod expr;
mod shapes;

use alloc::vec::Vec;

pub use expr::{parse_comparison, parse_constraint_expression, BinOp, CmpOp, Comparison, Expr, Func, Var};
pub use shapes::{Axis, LineSide, Orientation, ParabolaSide, Shape};

use crate::error::{Error, Result};

/// A location in 2-D or 3-D.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
}

impl Point {
    pub const fn xy(x: f64, y: f64) -> Self {
        Point { x, y, z: None }
    }

    pub const fn xyz(x: f64, y: f64, z: f64) -> Self {
        Point { x, y, z: Some(z) }
    }

    pub fn dims(&self) -> usize {
        if self.z.is_some() {
            3
        } else {
            2
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let dz = match (self.z, other.z) {
            (Some(a), Some(b)) => a - b,
            _ => 0.0,
        };
        libm::sqrt((self.x - other.x) * (self.x - other.x) + (self.y - other.y) * (self.y - other.y) + dz * dz)
    }
}

/// Whether a region selects its interior or its complement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Loc {
    #[default]
    In,
    Out,
}

/// Where the states live.
#[derive(Clone, Debug, PartialEq)]
pub enum GridGeometry {
    ImageGrid { height: usize, width: usize },
    PointCloud { coords: Vec<Point> },
}

impl GridGeometry {
    pub fn n_states(&self) -> usize {
        match self {
            GridGeometry::ImageGrid { height, width } => height * width,
            GridGeometry::PointCloud { coords } => coords.len(),
        }
    }

    pub fn point(&self, i: usize) -> Point {
        match self {
            GridGeometry::ImageGrid { width, .. } => Point::xy((i % width) as f64, (i / width) as f64),
            GridGeometry::PointCloud { coords } => coords[i],
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i).distance(&self.point(j))
    }

    pub(crate) fn check_states(&self, n: usize) -> Result<()> {
        if self.n_states() != n {
            return Err(Error::invalid(alloc::format!(
                "geometry covers {} states but the basis has {n}",
                self.n_states()
            )));
        }
        Ok(())
    }
}

/// A shape plus the side of it that is selected.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRegion {
    shape: Shape,
    loc: Loc,
}

impl ConstraintRegion {
    /// Validates the shape parameters.
    pub fn new(shape: Shape, loc: Loc) -> Result<Self> {
        shape.validate()?;
        Ok(ConstraintRegion { shape, loc })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn loc(&self) -> Loc {
        self.loc
    }

    pub fn with_loc(mut self, loc: Loc) -> Self {
        self.loc = loc;
        self
    }

    /// Closed-set membership, complemented for [`Loc::Out`].
    pub fn contains(&self, point: &Point) -> Result<bool> {
        let inside = self.shape.contains(point)?;
        Ok(match self.loc {
            Loc::In => inside,
            Loc::Out => !inside,
        })
    }
}

/// Indices of every state whose location lies in `region`, ascending.
pub fn get_constraint_indices(region: &ConstraintRegion, geometry: &GridGeometry) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..geometry.n_states() {
        if region.contains(&geometry.point(i))? {
            out.push(i);
        }
    }
    Ok(out)
}

/// How the constrained index set restricts a selection.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintMode {
    /// At most `s` sensors inside the constrained set.
    MaxN { s: usize },
    /// Exactly `s` sensors inside the constrained set.
    ExactN { s: usize },
    /// The first `s` sensors are fixed in advance.
    Predetermined { s: usize },
    /// Selected sensors are pairwise at least `d` apart.
    Distance { d: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpec {
    pub idx_constrained: Vec<usize>,
    pub mode: ConstraintMode,
    /// Required for [`ConstraintMode::Distance`].
    pub geometry: Option<GridGeometry>,
}

impl ConstraintSpec {
    pub fn new(idx_constrained: Vec<usize>, mode: ConstraintMode) -> Self {
        ConstraintSpec {
            idx_constrained,
            mode,
            geometry: None,
        }
    }

    pub fn with_geometry(mut self, geometry: GridGeometry) -> Self {
        self.geometry = Some(geometry);
        self
    }

    /// No constraint at all: max-n over an empty set.
    pub fn unconstrained() -> Self {
        ConstraintSpec::new(Vec::new(), ConstraintMode::MaxN { s: 0 })
    }
}
