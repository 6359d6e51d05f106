//! Planar workspace, disc collision model and free-space sampling.
//!
//! Every object is a disc of one shared radius. All placement checks go
//! through [`is_placement_valid`], which bumps a [`CollisionCounter`]; that
//! counter is the cost metric reported by every planner.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default table size in meters.
pub const DEFAULT_WIDTH: f64 = 0.60;
pub const DEFAULT_HEIGHT: f64 = 0.40;
/// Default collision radius shared by all objects.
pub const DEFAULT_RADIUS: f64 = 0.03;
/// Default sampling budget for [`sample_free_position`].
pub const DEFAULT_MAX_TRIES: usize = 100;

/// A 2D position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_squared(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(self, other: Point2) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

// Points travel as `[x, y]` pairs in every JSON document.
impl Serialize for Point2 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point2 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(deserializer)?;
        Ok(Point2 { x, y })
    }
}

/// Axis-aligned rectangular table area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Workspace {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: DEFAULT_WIDTH,
            y_min: 0.0,
            y_max: DEFAULT_HEIGHT,
        }
    }
}

impl Workspace {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self, Error> {
        let ws = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        if ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
            || x_min >= x_max
            || y_min >= y_max
        {
            return Err(Error::InvalidWorkspace(format!("{ws:?}")));
        }
        Ok(ws)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Checks the workspace can hold at least one disc of `radius` with room
    /// to spare.
    pub fn validate_for_radius(&self, radius: f64) -> Result<(), Error> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidWorkspace(format!("{self:?}")));
        }
        if self.width() <= 2.0 * radius || self.height() <= 2.0 * radius {
            return Err(Error::InvalidWorkspace(format!(
                "spans of {self:?} must exceed object diameter {}",
                2.0 * radius
            )));
        }
        Ok(())
    }

    /// Draws a point uniformly from the rectangle of admissible disc centers.
    pub fn sample_center<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> Point2 {
        Point2 {
            x: rng.gen_range((self.x_min + radius)..=(self.x_max - radius)),
            y: rng.gen_range((self.y_min + radius)..=(self.y_max - radius)),
        }
    }
}

/// Running count of placement checks for one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CollisionCounter {
    count: u64,
}

impl CollisionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn bump(&mut self) {
        self.count += 1;
    }
}

/// Two discs of `radius` overlap iff their centers are closer than `2·radius`.
/// Tangent discs do not overlap.
#[inline]
pub fn discs_overlap(a: Point2, b: Point2, radius: f64) -> bool {
    let d = 2.0 * radius;
    a.distance_squared(b) < d * d
}

/// True iff the whole disc lies inside the workspace; touching an edge is fine.
#[inline]
pub fn in_workspace(p: Point2, radius: f64, ws: &Workspace) -> bool {
    p.x - radius >= ws.x_min
        && p.x + radius <= ws.x_max
        && p.y - radius >= ws.y_min
        && p.y + radius <= ws.y_max
}

/// One collision check: the candidate disc is inside the workspace and free
/// of every disc in `others`. Always bumps `ctr` by one.
pub fn is_placement_valid<'a, I>(
    others: I,
    candidate: Point2,
    radius: f64,
    ws: &Workspace,
    ctr: &mut CollisionCounter,
) -> bool
where
    I: IntoIterator<Item = &'a Point2>,
{
    ctr.bump();
    in_workspace(candidate, radius, ws)
        && others
            .into_iter()
            .all(|&o| !discs_overlap(o, candidate, radius))
}

/// Rejection-samples a free disc center. Each try is one collision check.
///
/// `others` is re-iterated for every try, so pass something cheap to clone
/// (a slice iterator or a chain of them).
pub fn sample_free_position<'a, I, R>(
    others: I,
    radius: f64,
    ws: &Workspace,
    rng: &mut R,
    max_tries: usize,
    ctr: &mut CollisionCounter,
) -> Option<Point2>
where
    I: IntoIterator<Item = &'a Point2> + Clone,
    R: Rng + ?Sized,
{
    sample_free_in(others, radius, ws, ws, rng, max_tries, ctr)
}

/// Like [`sample_free_position`] but draws centers from `region` (clipped to
/// the admissible part of `ws`) while validating against `ws`.
pub(crate) fn sample_free_in<'a, I, R>(
    others: I,
    radius: f64,
    ws: &Workspace,
    region: &Workspace,
    rng: &mut R,
    max_tries: usize,
    ctr: &mut CollisionCounter,
) -> Option<Point2>
where
    I: IntoIterator<Item = &'a Point2> + Clone,
    R: Rng + ?Sized,
{
    let x_lo = region.x_min.max(ws.x_min + radius);
    let x_hi = region.x_max.min(ws.x_max - radius);
    let y_lo = region.y_min.max(ws.y_min + radius);
    let y_hi = region.y_max.min(ws.y_max - radius);
    if x_lo > x_hi || y_lo > y_hi {
        return None;
    }
    for _ in 0..max_tries {
        let p = Point2 {
            x: rng.gen_range(x_lo..=x_hi),
            y: rng.gen_range(y_lo..=y_hi),
        };
        if is_placement_valid(others.clone(), p, radius, ws, ctr) {
            return Some(p);
        }
    }
    None
}
