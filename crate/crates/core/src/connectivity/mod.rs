//! Connected components of unions of closed balls.
//!
//! Two balls belong to one component when a finite chain of pairwise
//! overlapping balls joins them. [`ClusterIndex`] is the static partition of a
//! configuration (plus boundary); [`DynamicClusters`] maintains the partition
//! under the insertions and deletions of a birth–death chain.

mod dsu;
mod dynamic;

use std::io::Write;

use smallvec::SmallVec;

pub use dsu::DisjointSet;
pub use dynamic::{DynamicClusters, RemovalPlan};

use crate::error::{invalid, Result};
use crate::geometry::{overlaps, BoundaryCondition, Configuration, Coords, MarkedPoint, Topology, Window};
use crate::scalar::Scalar;
use crate::spatial::{default_cell_size, SpatialGrid};

/// Geometric summary of one component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentSummary<T: Scalar> {
    /// Smallest point index in the component; its stable identifier.
    pub id: usize,
    /// Number of points, boundary points included.
    pub size: usize,
    /// Number of points whose germ lies inside the window.
    pub interior_size: usize,
    /// Bounding box of the interior balls (empty box when `interior_size == 0`).
    pub ball_lower: Coords<T>,
    pub ball_upper: Coords<T>,
    pub touches_lower: SmallVec<[bool; 3]>,
    pub touches_upper: SmallVec<[bool; 3]>,
    /// Torus only: a cycle of overlaps winds around the axis.
    pub wraps: SmallVec<[bool; 3]>,
}

impl<T: Scalar> ComponentSummary<T> {
    pub fn crosses(&self, axis: usize) -> bool {
        self.touches_lower[axis] && self.touches_upper[axis]
    }

    fn crosses_window(&self, window: &Window<T>, axis: usize) -> bool {
        self.interior_size > 0
            && self.ball_lower[axis] <= window.lower()[axis]
            && self.ball_upper[axis] >= window.upper()[axis]
    }
}

/// Disjoint-set partition of interior points `0..n` followed by boundary
/// points `n..n+b`.
#[derive(Clone, Debug)]
pub struct ClusterIndex<T: Scalar> {
    window: Window<T>,
    points: Vec<MarkedPoint<T>>,
    interior: usize,
    parent: Vec<u32>,
    rank: Vec<u8>,
    labels: Vec<u32>,
    components: Vec<ComponentSummary<T>>,
    grid: SpatialGrid<T>,
}

/// Bounding window for a grid holding interior and boundary germs.
pub(crate) fn grid_bounds<T: Scalar>(window: &Window<T>, extra: &[MarkedPoint<T>]) -> Window<T> {
    if window.is_torus() || extra.is_empty() {
        return window.clone();
    }
    let mut lo: Coords<T> = window.lower().iter().copied().collect();
    let mut hi: Coords<T> = window.upper().iter().copied().collect();
    for p in extra {
        for a in 0..lo.len() {
            lo[a] = lo[a].min(p.position[a]);
            hi[a] = hi[a].max(p.position[a]);
        }
    }
    Window::new(lo, hi, Topology::Free).unwrap_or_else(|_| window.clone())
}

fn max_radius<T: Scalar>(points: &[MarkedPoint<T>]) -> T {
    points.iter().map(|p| p.radius).fold(T::zero(), T::max)
}

/// Offset-tracking union–find used to detect wrapping on a torus.
struct WindingSet<T: Scalar> {
    parent: Vec<u32>,
    offset: Vec<Coords<T>>,
    wraps: Vec<SmallVec<[bool; 3]>>,
}

impl<T: Scalar> WindingSet<T> {
    fn new(n: usize, dim: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            offset: vec![Coords::from_elem(T::zero(), dim); n],
            wraps: vec![SmallVec::from_elem(false, dim); n],
        }
    }

    /// Root of `x` and the unwrapped displacement from the root to `x`.
    fn find(&mut self, x: u32) -> (u32, Coords<T>) {
        let p = self.parent[x as usize];
        if p == x {
            return (x, self.offset[x as usize].clone());
        }
        let (root, parent_off) = self.find(p);
        let own = &mut self.offset[x as usize];
        for a in 0..own.len() {
            own[a] += parent_off[a];
        }
        self.parent[x as usize] = root;
        (root, own.clone())
    }

    fn union(&mut self, i: u32, j: u32, disp: &[T], window: &Window<T>) {
        let (ri, oi) = self.find(i);
        let (rj, oj) = self.find(j);
        if ri == rj {
            for a in 0..disp.len() {
                let mismatch = oi[a] + disp[a] - oj[a];
                if mismatch.abs() > window.side(a) / T::of(2.0) {
                    self.wraps[ri as usize][a] = true;
                }
            }
            return;
        }
        // place rj under ri: offset(rj) = oi + disp - oj
        self.parent[rj as usize] = ri;
        for a in 0..disp.len() {
            self.offset[rj as usize][a] = oi[a] + disp[a] - oj[a];
        }
        for a in 0..disp.len() {
            let w = self.wraps[rj as usize][a];
            self.wraps[ri as usize][a] |= w;
        }
    }
}

impl<T: Scalar> ClusterIndex<T> {
    pub fn build(window: &Window<T>, interior: &[MarkedPoint<T>], boundary: &[MarkedPoint<T>]) -> Self {
        let mut points = Vec::with_capacity(interior.len() + boundary.len());
        points.extend_from_slice(interior);
        points.extend_from_slice(boundary);
        let n = points.len();
        let dim = window.dim();
        let cell = default_cell_size(max_radius(interior), window);
        let bounds = grid_bounds(window, boundary);
        let mut grid = SpatialGrid::new(&bounds, cell).expect("positive cell size");
        for (i, p) in points.iter().enumerate() {
            grid.insert(i as u32, p);
        }
        let mut dsu = DisjointSet::new(n);
        let mut winding = window.is_torus().then(|| WindingSet::new(n, dim));
        let mut nbrs = Vec::new();
        for i in 0..n {
            nbrs.clear();
            grid.for_each_candidate(&points[i].position, points[i].radius, |j| {
                if (j as usize) < i && overlaps(window, &points[i], &points[j as usize]) {
                    nbrs.push(j);
                }
            });
            for &j in &nbrs {
                dsu.union(i as u32, j);
                if let Some(ws) = winding.as_mut() {
                    let disp: Coords<T> = (0..dim)
                        .map(|a| window.axis_displacement(a, points[i].position[a], points[j as usize].position[a]))
                        .collect();
                    ws.union(i as u32, j, &disp, window);
                }
            }
        }

        // label components in order of their smallest member
        let mut root_label = vec![u32::MAX; n];
        let mut labels = vec![0u32; n];
        let mut components: Vec<ComponentSummary<T>> = Vec::new();
        for i in 0..n {
            let r = dsu.find(i as u32) as usize;
            if root_label[r] == u32::MAX {
                root_label[r] = components.len() as u32;
                components.push(ComponentSummary {
                    id: i,
                    size: 0,
                    interior_size: 0,
                    ball_lower: Coords::from_elem(T::infinity(), dim),
                    ball_upper: Coords::from_elem(T::neg_infinity(), dim),
                    touches_lower: SmallVec::from_elem(false, dim),
                    touches_upper: SmallVec::from_elem(false, dim),
                    wraps: SmallVec::from_elem(false, dim),
                });
            }
            let label = root_label[r];
            labels[i] = label;
            let c = &mut components[label as usize];
            c.size += 1;
            if i < interior.len() {
                c.interior_size += 1;
                let p = &points[i];
                for a in 0..dim {
                    c.ball_lower[a] = c.ball_lower[a].min(p.position[a] - p.radius);
                    c.ball_upper[a] = c.ball_upper[a].max(p.position[a] + p.radius);
                }
            }
        }
        if let Some(mut ws) = winding {
            for i in 0..n {
                let (r, _) = ws.find(i as u32);
                let flags = ws.wraps[r as usize].clone();
                let c = &mut components[labels[i] as usize];
                for a in 0..dim {
                    c.wraps[a] |= flags[a];
                }
            }
        }
        for c in &mut components {
            for a in 0..dim {
                c.touches_lower[a] = c.interior_size > 0 && c.ball_lower[a] <= window.lower()[a];
                c.touches_upper[a] = c.interior_size > 0 && c.ball_upper[a] >= window.upper()[a];
            }
        }
        Self {
            window: window.clone(),
            interior: interior.len(),
            parent: dsu.parents().to_vec(),
            rank: dsu.ranks().to_vec(),
            points,
            labels,
            components,
            grid,
        }
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComponentSummary<T>] {
        &self.components
    }

    /// Dense component label of point `i` (interior first, then boundary).
    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    /// Component identifier (smallest member index) of point `i`.
    pub fn component_id(&self, i: usize) -> usize {
        self.components[self.labels[i] as usize].id
    }

    pub fn parent(&self) -> &[u32] {
        &self.parent
    }

    pub fn rank(&self) -> &[u8] {
        &self.rank
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn interior_len(&self) -> usize {
        self.interior
    }

    pub fn points(&self) -> &[MarkedPoint<T>] {
        &self.points
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    pub fn connected(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    /// Distinct components whose union meets `B(x)`; this is `k(x, ω)`.
    pub fn components_touching(&self, x: &MarkedPoint<T>) -> usize {
        let mut seen: SmallVec<[u32; 16]> = SmallVec::new();
        self.grid.for_each_candidate(&x.position, x.radius, |j| {
            if overlaps(&self.window, &self.points[j as usize], x) {
                let l = self.labels[j as usize];
                if !seen.contains(&l) {
                    seen.push(l);
                }
            }
        });
        seen.len()
    }

    /// Number of points in the largest component, interior points only.
    pub fn largest_interior_size(&self) -> usize {
        self.components.iter().map(|c| c.interior_size).max().unwrap_or(0)
    }

    /// Writes `point_id, x1..xd, R, component_id` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let dim = self.window.dim();
        let mut header = vec!["point_id".to_string()];
        header.extend((1..=dim).map(|a| format!("x{a}")));
        header.push("R".into());
        header.push("component_id".into());
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p.position.iter().map(|c| c.to_string()));
            row.push(p.radius.to_string());
            row.push(self.component_id(i).to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact partition of interior plus boundary points into components.
pub fn count_components<T: Scalar>(config: &Configuration<T>, boundary: &BoundaryCondition<T>) -> ClusterIndex<T> {
    ClusterIndex::build(config.window(), config.points(), boundary.points())
}

/// Number of components formed by a raw point list on `window`'s metric.
pub(crate) fn component_count_of<T: Scalar>(window: &Window<T>, points: &[MarkedPoint<T>]) -> usize {
    ClusterIndex::build(window, points, &[]).component_count()
}

/// `N_cc(ω) - N_cc(ω outside sub)`: the `sub`-local component count. It
/// equals the stabilised limit over growing windows because `ω` is finite.
pub fn local_component_count<T: Scalar>(config: &Configuration<T>, sub: &Window<T>) -> Result<i64> {
    if !config.window().contains_window(sub) {
        return Err(invalid("subwindow must lie inside the configuration window"));
    }
    let (_, outside) = config.split_by(sub);
    let all = component_count_of(config.window(), config.points()) as i64;
    let rest = component_count_of(config.window(), &outside) as i64;
    Ok(all - rest)
}

/// `k(x, ω)`: components of `L(ω)` overlapping `B(x)`.
pub fn overlap_component_count<T: Scalar>(x: &MarkedPoint<T>, config: &Configuration<T>) -> Result<usize> {
    config.window().check_dim(x.dim())?;
    if config.is_empty() {
        return Ok(0);
    }
    Ok(count_components(config, &BoundaryCondition::Empty).components_touching(x))
}

/// `(N_cc(ω + δ_x) - N_cc(ω), 1 - k(x, ω))`, computed independently.
pub fn insertion_delta_check<T: Scalar>(x: &MarkedPoint<T>, config: &Configuration<T>) -> Result<(i64, i64)> {
    let before = component_count_of(config.window(), config.points()) as i64;
    let mut with = config.points().to_vec();
    config.window().check_dim(x.dim())?;
    with.push(x.clone());
    let after = component_count_of(config.window(), &with) as i64;
    let k = overlap_component_count(x, config)? as i64;
    Ok((after - before, 1 - k))
}

/// Finite-volume percolation summary.
#[derive(Clone, Debug, PartialEq)]
pub struct PercolationReport {
    /// Some component touches both faces `x_i = lower_i` and `x_i = upper_i`.
    pub crosses: Vec<bool>,
    /// Per-axis winding; present on torus windows only.
    pub wraps: Option<Vec<bool>>,
    pub largest_fraction: f64,
    /// Components crossing (or wrapping) along at least one axis.
    pub spanning_component_count: usize,
}

impl PercolationReport {
    pub fn wrapping(&self) -> Result<&[bool]> {
        self.wraps.as_deref().ok_or_else(|| invalid("wrapping is defined only on torus windows"))
    }

    pub fn crosses_any(&self) -> bool {
        self.crosses.iter().any(|&c| c)
    }
}

/// Crossing and wrapping proxies for percolation of `index` in `window`.
pub fn percolation_report<T: Scalar>(index: &ClusterIndex<T>, window: &Window<T>) -> PercolationReport {
    let dim = window.dim();
    let mut crosses = vec![false; dim];
    let mut wraps = vec![false; dim];
    let mut spanning = 0;
    for c in index.components() {
        let mut spans = false;
        for a in 0..dim {
            if c.crosses_window(window, a) {
                crosses[a] = true;
                spans = true;
            }
            if window.is_torus() && c.wraps[a] {
                wraps[a] = true;
                spans = true;
            }
        }
        spanning += usize::from(spans);
    }
    let total = index.interior_len();
    let largest_fraction = if total == 0 { 0.0 } else { index.largest_interior_size() as f64 / total as f64 };
    PercolationReport {
        crosses,
        wraps: window.is_torus().then_some(wraps),
        largest_fraction,
        spanning_component_count: spanning,
    }
}

/// Component labels of points that span the window along some axis.
pub fn spanning_labels<T: Scalar>(index: &ClusterIndex<T>) -> Vec<bool> {
    let w = index.window();
    index
        .components()
        .iter()
        .map(|c| (0..w.dim()).any(|a| c.crosses_window(w, a) || (w.is_torus() && c.wraps[a])))
        .collect()
}
