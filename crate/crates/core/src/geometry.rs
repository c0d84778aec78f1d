//! Marked points (closed balls), observation windows and finite configurations.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Coordinates of a germ. Inline storage covers d <= 3 without allocating.
pub type Coords<T> = SmallVec<[T; 3]>;

/// A germ `x` with its radius mark `R`, read as the closed ball `B(x, R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MarkedPoint<T: Scalar> {
    pub position: Coords<T>,
    pub radius: T,
}

impl<T: Scalar> MarkedPoint<T> {
    pub fn new(position: impl Into<Coords<T>>, radius: T) -> Result<Self> {
        let position = position.into();
        if position.iter().any(|c| !c.is_finite()) {
            return Err(invalid("germ coordinates must be finite"));
        }
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(invalid(format!("radius must be finite and >= 0, got {radius}")));
        }
        Ok(Self { position, radius })
    }

    /// Unvalidated constructor for samplers that build coordinates inside a
    /// known window.
    pub(crate) fn raw(position: Coords<T>, radius: T) -> Self {
        Self { position, radius }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    #[default]
    Free,
    Torus,
}

/// Axis-aligned box `[lower, upper]`, optionally with periodic identification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Window<T: Scalar> {
    lower: Coords<T>,
    upper: Coords<T>,
    topology: Topology,
}

impl<T: Scalar> Window<T> {
    pub fn new(lower: impl Into<Coords<T>>, upper: impl Into<Coords<T>>, topology: Topology) -> Result<Self> {
        let lower = lower.into();
        let upper = upper.into();
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.is_empty() {
            return Err(invalid("window must have at least one axis"));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(invalid(format!("window bounds must satisfy lower < upper, got [{lo}, {hi}]")));
            }
        }
        Ok(Self { lower, upper, topology })
    }

    /// `[0, side]^d` with free boundaries.
    pub fn cube(dim: usize, side: T) -> Result<Self> {
        Self::new(Coords::from_elem(T::zero(), dim), Coords::from_elem(side, dim), Topology::Free)
    }

    /// `[-half, half]^d`.
    pub fn centered_cube(dim: usize, half: T) -> Result<Self> {
        Self::new(Coords::from_elem(-half, dim), Coords::from_elem(half, dim), Topology::Free)
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_torus(&self) -> bool {
        self.topology == Topology::Torus
    }

    pub fn side(&self, axis: usize) -> T {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i).f64()).product()
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(c, (lo, hi))| lo <= c && c <= hi)
    }

    /// True when `inner` lies inside `self` (closed containment).
    pub fn contains_window(&self, inner: &Window<T>) -> bool {
        inner.dim() == self.dim() && self.contains(&inner.lower) && self.contains(&inner.upper)
    }

    /// Grows every side by `margin`; the result is always free.
    pub fn enlarged(&self, margin: T) -> Window<T> {
        Window {
            lower: self.lower.iter().map(|&v| v - margin).collect(),
            upper: self.upper.iter().map(|&v| v + margin).collect(),
            topology: Topology::Free,
        }
    }

    #[inline]
    pub(crate) fn axis_delta(&self, axis: usize, a: T, b: T) -> T {
        let d = (a - b).abs();
        match self.topology {
            Topology::Free => d,
            Topology::Torus => {
                let period = self.side(axis);
                let d = d % period;
                d.min(period - d)
            }
        }
    }

    /// Signed minimal-image displacement `b - a` along one axis.
    #[inline]
    pub(crate) fn axis_displacement(&self, axis: usize, a: T, b: T) -> T {
        let d = b - a;
        match self.topology {
            Topology::Free => d,
            Topology::Torus => {
                let period = self.side(axis);
                let half = period / (T::one() + T::one());
                let mut r = d % period;
                if r > half {
                    r -= period;
                } else if r < -half {
                    r += period;
                }
                r
            }
        }
    }

    /// Squared distance, periodic when the window is a torus.
    #[inline]
    pub fn distance_sq(&self, a: &[T], b: &[T]) -> T {
        let mut acc = T::zero();
        for axis in 0..a.len() {
            let d = self.axis_delta(axis, a[axis], b[axis]);
            acc += d * d;
        }
        acc
    }

    /// Squared free-space distance from `x` to the box.
    pub fn box_distance_sq(&self, x: &[T]) -> T {
        box_distance_sq(&self.lower, &self.upper, x)
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found });
        }
        Ok(())
    }
}

pub(crate) fn box_distance_sq<T: Scalar>(lower: &[T], upper: &[T], x: &[T]) -> T {
    let mut acc = T::zero();
    for ((&lo, &hi), &c) in lower.iter().zip(upper).zip(x) {
        let d = if c < lo {
            lo - c
        } else if c > hi {
            c - hi
        } else {
            T::zero()
        };
        acc += d * d;
    }
    acc
}

/// Closed-ball overlap test on the window's metric.
#[inline]
pub(crate) fn overlaps<T: Scalar>(window: &Window<T>, a: &MarkedPoint<T>, b: &MarkedPoint<T>) -> bool {
    let reach = a.radius + b.radius;
    window.distance_sq(&a.position, &b.position) <= reach * reach
}

/// `true` iff the closed balls of `a` and `b` intersect. Tangent balls overlap.
pub fn overlap<T: Scalar>(a: &MarkedPoint<T>, b: &MarkedPoint<T>, window: &Window<T>) -> Result<bool> {
    window.check_dim(a.dim())?;
    window.check_dim(b.dim())?;
    Ok(overlaps(window, a, b))
}

/// A finite configuration of marked points with germs inside `window`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Configuration<T: Scalar> {
    points: Vec<MarkedPoint<T>>,
    window: Window<T>,
}

impl<T: Scalar> Configuration<T> {
    pub fn new(window: Window<T>, points: Vec<MarkedPoint<T>>) -> Result<Self> {
        for p in &points {
            window.check_dim(p.dim())?;
            if !window.contains(&p.position) {
                return Err(invalid(format!("germ {:?} lies outside the window", p.position.as_slice())));
            }
        }
        Ok(Self { points, window })
    }

    pub fn empty(window: Window<T>) -> Self {
        Self { points: Vec::new(), window }
    }

    pub(crate) fn from_parts_unchecked(window: Window<T>, points: Vec<MarkedPoint<T>>) -> Self {
        Self { points, window }
    }

    pub fn points(&self) -> &[MarkedPoint<T>] {
        &self.points
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn push(&mut self, point: MarkedPoint<T>) -> Result<()> {
        self.window.check_dim(point.dim())?;
        if !self.window.contains(&point.position) {
            return Err(invalid("germ lies outside the window"));
        }
        self.points.push(point);
        Ok(())
    }

    pub fn remove(&mut self, index: usize) -> MarkedPoint<T> {
        self.points.remove(index)
    }

    /// The same points observed in a larger window.
    pub fn rewindowed(&self, window: Window<T>) -> Result<Self> {
        Self::new(window, self.points.clone())
    }

    /// Points whose germ lies in the closed `sub` window, and the rest.
    pub fn split_by(&self, sub: &Window<T>) -> (Vec<MarkedPoint<T>>, Vec<MarkedPoint<T>>) {
        self.points.iter().cloned().partition(|p| sub.contains(&p.position))
    }

    pub fn max_radius(&self) -> T {
        self.points.iter().map(|p| p.radius).fold(T::zero(), T::max)
    }

    pub fn into_points(self) -> Vec<MarkedPoint<T>> {
        self.points
    }
}

/// Fixed configuration outside the sampling window, conditioned upon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "points", rename_all = "lowercase", bound = "")]
pub enum BoundaryCondition<T: Scalar> {
    #[default]
    Empty,
    Fixed(Vec<MarkedPoint<T>>),
}

impl<T: Scalar> BoundaryCondition<T> {
    pub fn points(&self) -> &[MarkedPoint<T>] {
        match self {
            BoundaryCondition::Empty => &[],
            BoundaryCondition::Fixed(points) => points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    /// Checks that every germ lies strictly outside the window. Torus windows
    /// have no outside, so only the empty boundary is accepted there.
    pub fn validate(&self, window: &Window<T>) -> Result<()> {
        if window.is_torus() && !self.is_empty() {
            return Err(invalid("a torus window admits no outside boundary configuration"));
        }
        for p in self.points() {
            window.check_dim(p.dim())?;
            if p.position.iter().any(|c| !c.is_finite()) || !(p.radius >= T::zero()) {
                return Err(invalid("invalid boundary point"));
            }
            if window.contains(&p.position) {
                return Err(invalid(format!(
                    "boundary germ {:?} lies inside the window",
                    p.position.as_slice()
                )));
            }
        }
        Ok(())
    }

    /// Drops outside points that cannot touch any ball of radius at most
    /// `max_inner_radius` centred inside the window.
    pub fn pruned(&self, window: &Window<T>, max_inner_radius: T) -> Self {
        match self {
            BoundaryCondition::Empty => BoundaryCondition::Empty,
            BoundaryCondition::Fixed(points) => BoundaryCondition::Fixed(
                points
                    .iter()
                    .filter(|p| {
                        let reach = p.radius + max_inner_radius;
                        window.box_distance_sq(&p.position) <= reach * reach
                    })
                    .cloned()
                    .collect(),
            ),
        }
    }
}
