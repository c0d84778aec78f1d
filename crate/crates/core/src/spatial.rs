//! Uniform-grid spatial index for fixed-radius ball queries.
//!
//! Balls with radius at most half the cell width live in grid cells; larger
//! balls go to an overflow list that every query scans. A query for a ball of
//! radius `r` visits only cells within `r + cell/2` of its centre, so results
//! are exact after the final overlap filter.

use smallvec::SmallVec;

use crate::error::{invalid, Result};
use crate::geometry::{overlaps, Configuration, Coords, MarkedPoint, Window};
use crate::scalar::Scalar;

const MAX_CELLS: usize = 1 << 22;

#[derive(Clone, Debug)]
pub struct SpatialGrid<T: Scalar> {
    origin: Coords<T>,
    width: Coords<T>,
    dims: SmallVec<[usize; 3]>,
    strides: SmallVec<[usize; 3]>,
    periodic: bool,
    inline_limit: T,
    cells: Vec<Vec<u32>>,
    overflow: Vec<u32>,
    len: usize,
}

impl<T: Scalar> SpatialGrid<T> {
    /// Grid over `bounds`. Points outside the bounds are clamped to edge
    /// cells on free windows, which keeps queries exact.
    pub fn new(bounds: &Window<T>, cell_size: T) -> Result<Self> {
        if !(cell_size > T::zero()) || !cell_size.is_finite() {
            return Err(invalid("cell size must be positive and finite"));
        }
        let dim = bounds.dim();
        let periodic = bounds.is_torus();
        let mut cell_size = cell_size;
        loop {
            let mut dims = SmallVec::<[usize; 3]>::new();
            let mut width = Coords::<T>::new();
            for axis in 0..dim {
                let extent = bounds.side(axis);
                let ratio = (extent / cell_size).f64();
                let n = if periodic { ratio.floor() } else { ratio.ceil() }.clamp(1.0, 1e9) as usize;
                dims.push(n);
                width.push(if periodic { extent / T::of(n as f64) } else { cell_size });
            }
            let total: usize = dims.iter().product();
            if total > MAX_CELLS {
                cell_size = cell_size * T::of(2.0);
                continue;
            }
            let mut strides = SmallVec::<[usize; 3]>::new();
            let mut s = 1;
            for &n in &dims {
                strides.push(s);
                s *= n;
            }
            let inline_limit = width.iter().copied().fold(T::infinity(), T::min) / T::of(2.0);
            return Ok(Self {
                origin: bounds.lower().iter().copied().collect(),
                width,
                dims,
                strides,
                periodic,
                inline_limit,
                cells: vec![Vec::new(); total],
                overflow: Vec::new(),
                len: 0,
            });
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    fn axis_cell(&self, axis: usize, x: T) -> usize {
        let raw = ((x - self.origin[axis]) / self.width[axis]).floor().f64();
        let n = self.dims[axis] as f64;
        if self.periodic {
            raw.rem_euclid(n) as usize % self.dims[axis]
        } else {
            raw.clamp(0.0, n - 1.0) as usize
        }
    }

    fn cell_of(&self, x: &[T]) -> usize {
        (0..self.dims.len()).map(|a| self.axis_cell(a, x[a]) * self.strides[a]).sum()
    }

    pub fn insert(&mut self, id: u32, point: &MarkedPoint<T>) {
        if point.radius > self.inline_limit {
            self.overflow.push(id);
        } else {
            let c = self.cell_of(&point.position);
            self.cells[c].push(id);
        }
        self.len += 1;
    }

    fn bucket_mut(&mut self, point: &MarkedPoint<T>) -> &mut Vec<u32> {
        if point.radius > self.inline_limit {
            &mut self.overflow
        } else {
            let c = self.cell_of(&point.position);
            &mut self.cells[c]
        }
    }

    pub fn remove(&mut self, id: u32, point: &MarkedPoint<T>) -> bool {
        let bucket = self.bucket_mut(point);
        if let Some(i) = bucket.iter().position(|&v| v == id) {
            bucket.swap_remove(i);
            self.len -= 1;
            true
        } else {
            false
        }
    }

    /// Renames the stored id of `point` from `old` to `new`.
    pub fn relabel(&mut self, old: u32, new: u32, point: &MarkedPoint<T>) {
        let bucket = self.bucket_mut(point);
        if let Some(v) = bucket.iter_mut().find(|v| **v == old) {
            *v = new;
        }
    }

    /// Calls `f` once for every stored id whose ball could meet `B(center, radius)`.
    pub fn for_each_candidate(&self, center: &[T], radius: T, mut f: impl FnMut(u32)) {
        for &id in &self.overflow {
            f(id);
        }
        if self.len == self.overflow.len() {
            return;
        }
        let reach = radius + self.inline_limit;
        let mut ranges: SmallVec<[SmallVec<[usize; 8]>; 3]> = SmallVec::new();
        for axis in 0..self.dims.len() {
            let n = self.dims[axis] as i64;
            let lo = ((center[axis] - reach - self.origin[axis]) / self.width[axis]).floor().f64();
            let hi = ((center[axis] + reach - self.origin[axis]) / self.width[axis]).floor().f64();
            let mut axis_cells = SmallVec::<[usize; 8]>::new();
            if self.periodic {
                let (lo, hi) = (lo as i64, hi as i64);
                if hi - lo + 1 >= n {
                    axis_cells.extend(0..n as usize);
                } else {
                    axis_cells.extend((lo..=hi).map(|c| c.rem_euclid(n) as usize));
                }
            } else {
                let lo = lo.clamp(0.0, (n - 1) as f64) as usize;
                let hi = hi.clamp(0.0, (n - 1) as f64) as usize;
                axis_cells.extend(lo..=hi);
            }
            ranges.push(axis_cells);
        }
        let mut counter: SmallVec<[usize; 3]> = SmallVec::from_elem(0, ranges.len());
        loop {
            let cell: usize = counter.iter().enumerate().map(|(a, &k)| ranges[a][k] * self.strides[a]).sum();
            for &id in &self.cells[cell] {
                f(id);
            }
            let mut axis = 0;
            loop {
                if axis == counter.len() {
                    return;
                }
                counter[axis] += 1;
                if counter[axis] < ranges[axis].len() {
                    break;
                }
                counter[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// Static index over one configuration, answering exact overlap queries.
#[derive(Clone, Debug)]
pub struct SpatialIndex<T: Scalar> {
    grid: SpatialGrid<T>,
    points: Vec<MarkedPoint<T>>,
    window: Window<T>,
}

impl<T: Scalar> SpatialIndex<T> {
    /// Indices of all points whose closed ball meets `ball`, in increasing order.
    pub fn query(&self, ball: &MarkedPoint<T>) -> Vec<usize> {
        let mut out = Vec::new();
        self.grid.for_each_candidate(&ball.position, ball.radius, |id| {
            if overlaps(&self.window, &self.points[id as usize], ball) {
                out.push(id as usize);
            }
        });
        out.sort_unstable();
        out
    }

    pub fn occupied_cells(&self) -> usize {
        self.grid.occupied_cells()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Builds a grid index; a cell size of at least twice the largest radius
/// keeps every ball inline.
pub fn build_spatial_index<T: Scalar>(config: &Configuration<T>, cell_size: T) -> Result<SpatialIndex<T>> {
    let mut grid = SpatialGrid::new(config.window(), cell_size)?;
    for (i, p) in config.points().iter().enumerate() {
        grid.insert(i as u32, p);
    }
    Ok(SpatialIndex { grid, points: config.points().to_vec(), window: config.window().clone() })
}

/// Default cell size for a radius bound: twice the bound, with a floor for
/// degenerate zero radii.
pub fn default_cell_size<T: Scalar>(max_radius: T, window: &Window<T>) -> T {
    let floor = (0..window.dim()).map(|a| window.side(a)).fold(T::infinity(), T::min) / T::of(64.0);
    (max_radius * T::of(2.0)).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Topology;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(config: &Configuration<f64>, ball: &MarkedPoint<f64>) -> Vec<usize> {
        config
            .points()
            .iter()
            .enumerate()
            .filter(|(_, p)| overlaps(config.window(), p, ball))
            .map(|(i, _)| i)
            .collect()
    }

    fn random_config(rng: &mut ChaCha8Rng, n: usize, side: f64, rmax: f64, topology: Topology) -> Configuration<f64> {
        let w = Window::cube(2, side).unwrap().with_topology(topology);
        let pts = (0..n)
            .map(|_| {
                MarkedPoint::new(
                    Coords::from_slice(&[rng.random::<f64>() * side, rng.random::<f64>() * side]),
                    rng.random::<f64>() * rmax,
                )
                .unwrap()
            })
            .collect();
        Configuration::new(w, pts).unwrap()
    }

    #[test]
    fn empty_index_answers_nothing() {
        let c = Configuration::<f64>::empty(Window::cube(2, 5.0).unwrap());
        let idx = build_spatial_index(&c, 1.0).unwrap();
        assert_eq!(idx.occupied_cells(), 0);
        let q = MarkedPoint::new(Coords::from_slice(&[1.0, 1.0]), 3.0).unwrap();
        assert!(idx.query(&q).is_empty());
    }

    #[test]
    fn single_point_finds_itself() {
        let p = MarkedPoint::new(Coords::from_slice(&[1.0, 1.0]), 0.3).unwrap();
        let c = Configuration::new(Window::cube(2, 5.0).unwrap(), vec![p.clone()]).unwrap();
        let idx = build_spatial_index(&c, 1.0).unwrap();
        assert_eq!(idx.query(&p), vec![0]);
    }

    #[test]
    fn rejects_nonpositive_cell() {
        let c = Configuration::<f64>::empty(Window::cube(2, 5.0).unwrap());
        assert!(build_spatial_index(&c, 0.0).is_err());
    }

    #[test]
    fn hundred_points_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_config(&mut rng, 100, 10.0, 0.5, Topology::Free);
        let idx = build_spatial_index(&c, 1.0).unwrap();
        for _ in 0..20 {
            let q = MarkedPoint::new(
                Coords::from_slice(&[rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0]),
                rng.random::<f64>(),
            )
            .unwrap();
            assert_eq!(idx.query(&q), brute(&c, &q));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn index_equals_brute_force(seed in any::<u64>(), n in 0usize..500, cell in 0.2f64..3.0, torus in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let topology = if torus { Topology::Torus } else { Topology::Free };
            let c = random_config(&mut rng, n, 8.0, 0.8, topology);
            let idx = build_spatial_index(&c, cell).unwrap();
            for _ in 0..10 {
                let q = MarkedPoint::new(
                    Coords::from_slice(&[rng.random::<f64>() * 8.0, rng.random::<f64>() * 8.0]),
                    rng.random::<f64>() * 1.5,
                ).unwrap();
                prop_assert_eq!(idx.query(&q), brute(&c, &q));
            }
        }
    }

    #[test]
    fn grid_remove_and_relabel() {
        let w = Window::cube(2, 4.0).unwrap();
        let mut g = SpatialGrid::new(&w, 1.0).unwrap();
        let a = MarkedPoint::new(Coords::from_slice(&[0.5, 0.5]), 0.2).unwrap();
        let big = MarkedPoint::new(Coords::from_slice(&[3.5, 3.5]), 2.0).unwrap();
        g.insert(0, &a);
        g.insert(1, &big);
        g.relabel(0, 5, &a);
        let mut seen = vec![];
        g.for_each_candidate(&[0.5, 0.5], 0.1, |id| seen.push(id));
        seen.sort();
        assert_eq!(seen, vec![1, 5]);
        assert!(g.remove(5, &a));
        assert!(!g.remove(5, &a));
        assert_eq!(g.len(), 1);
    }
}
