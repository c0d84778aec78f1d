//! Block discretisations: cubes fully covered by their own balls, or cubes
//! met by no ball at all, and crossing of the resulting 0/1 lattice fields.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::connectivity::{count_components, percolation_report};
use crate::error::{invalid, Result};
use crate::geometry::{BoundaryCondition, Configuration, Window};
use crate::scalar::Scalar;

/// Depth of the coverage refinement; `2^9 = 64 · 8` cells per side.
const MAX_DEPTH: u32 = 9;
const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSemantics {
    /// `ξ = 1` iff the cube is covered by the balls centred in it.
    Covered,
    /// `ξ = 1` iff no ball meets the cube.
    Vacant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adjacency {
    NearestNeighbor,
    MaxNorm,
}

/// A lattice of cubes `origin + side·(i + [0,1]^d)`, `0 <= i < extent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub origin: Vec<f64>,
    pub cube_side: f64,
    pub extent: Vec<usize>,
    /// Upper corner of the lattice; the last cube along each axis ends here.
    pub end: Vec<f64>,
    /// Width of the layer around the lattice that makes up the outer window.
    pub padding: f64,
    pub semantics: BlockSemantics,
}

impl BlockSpec {
    pub fn new(origin: Vec<f64>, cube_side: f64, extent: Vec<usize>, padding: f64, semantics: BlockSemantics) -> Result<Self> {
        if !(cube_side > 0.0 && cube_side.is_finite()) {
            return Err(invalid("cube side must be positive"));
        }
        if origin.len() != extent.len() || extent.contains(&0) {
            return Err(invalid("lattice extent must be positive on every axis"));
        }
        if !(padding >= 0.0) {
            return Err(invalid("padding must be nonnegative"));
        }
        let end = origin.iter().zip(&extent).map(|(o, &e)| o + cube_side * e as f64).collect();
        Ok(Self { origin, cube_side, extent, end, padding, semantics })
    }

    fn tiling<T: Scalar>(window: &Window<T>, side: f64, semantics: BlockSemantics) -> Result<Self> {
        let mut extent = Vec::with_capacity(window.dim());
        for a in 0..window.dim() {
            let l = window.side(a).f64();
            let n = (l / side).round();
            if n < 1.0 || (n * side - l).abs() > TOL * l.max(1.0) {
                return Err(invalid(format!("cubes of side {side} do not tile the window along axis {a}")));
            }
            extent.push(n as usize);
        }
        let mut s = Self::new(window.lower().iter().map(|x| x.f64()).collect(), side, extent, 0.0, semantics)?;
        s.end = window.upper().iter().map(|x| x.f64()).collect();
        Ok(s)
    }

    /// Covered lattice tiling a cube window with the largest side not above
    /// `r1/√d`, so that any ball of radius `r1` centred in a cube covers it.
    pub fn covered_tiling<T: Scalar>(window: &Window<T>, r1: f64) -> Result<Self> {
        let l = window.side(0).f64();
        let target = r1 / (window.dim() as f64).sqrt();
        Self::tiling(window, l / (l / target).ceil(), BlockSemantics::Covered)
    }

    /// Vacant lattice tiling a cube window with the smallest side not below
    /// `2 max_radius`.
    pub fn vacant_tiling<T: Scalar>(window: &Window<T>, max_radius: f64) -> Result<Self> {
        let l = window.side(0).f64();
        let n = if max_radius > 0.0 { (l / (2.0 * max_radius)).floor() } else { l.ceil() };
        if n < 1.0 {
            return Err(invalid("window narrower than one vacant block"));
        }
        Self::tiling(window, l / n, BlockSemantics::Vacant)
    }

    /// The single unit cube `[-0.5, 0.5]^d` inside `[-8, 8]^d`.
    pub fn vacant_unit(dim: usize) -> Self {
        Self::new(vec![-0.5; dim], 1.0, vec![1; dim], 7.5, BlockSemantics::Vacant).expect("valid unit spec")
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    /// Number of cubes.
    pub fn len(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (a, e) in self.extent.iter().enumerate() {
            idx[a] = flat % e;
            flat /= e;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.extent).rev().fold(0, |acc, (&i, &e)| acc * e + i)
    }

    fn bounds_1d(&self, a: usize, i: usize) -> (f64, f64) {
        let lo = self.origin[a] + self.cube_side * i as f64;
        let hi = if i + 1 == self.extent[a] { self.end[a] } else { self.origin[a] + self.cube_side * (i + 1) as f64 };
        (lo, hi)
    }

    /// Closed cube with flat index `flat`.
    pub fn cube(&self, flat: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.unravel(flat);
        idx.iter().enumerate().map(|(a, &i)| self.bounds_1d(a, i)).unzip()
    }

    /// The lattice itself as a window.
    pub fn inner_window<T: Scalar>(&self) -> Result<Window<T>> {
        Window::new(
            self.origin.iter().map(|&x| T::of(x)).collect::<Vec<_>>(),
            self.end.iter().map(|&x| T::of(x)).collect::<Vec<_>>(),
            crate::geometry::Topology::Free,
        )
    }

    /// The lattice enlarged by the padding.
    pub fn outer_window<T: Scalar>(&self) -> Result<Window<T>> {
        Ok(self.inner_window::<T>()?.enlarged(T::of(self.padding)))
    }
}

/// 0/1 values on a block lattice, first axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockField {
    pub values: Vec<u8>,
    pub spec: BlockSpec,
}

impl BlockField {
    pub fn get(&self, idx: &[usize]) -> u8 {
        self.values[self.spec.ravel(idx)]
    }

    pub fn ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    pub fn complement(&self) -> BlockField {
        BlockField { values: self.values.iter().map(|v| 1 - v).collect(), spec: self.spec.clone() }
    }
}

struct Ball {
    centre: Vec<f64>,
    r: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn box_dist(lo: &[f64], hi: &[f64], x: &[f64]) -> f64 {
    lo.iter()
        .zip(hi)
        .zip(x)
        .map(|((l, h), c)| {
            let d = if c < l { l - c } else if c > h { c - h } else { 0.0 };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Conservative coverage test: `true` only if the closed box lies inside the
/// union of the balls. A box is accepted when one ball contains it whole and
/// rejected as soon as its centre is uncovered; undecided boxes are split.
fn box_covered(lo: &[f64], hi: &[f64], balls: &[&Ball], depth: u32) -> bool {
    let relevant: Vec<&Ball> = balls.iter().copied().filter(|b| box_dist(lo, hi, &b.centre) <= b.r).collect();
    if relevant.is_empty() {
        return false;
    }
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half_diag = 0.5 * dist(lo, hi);
    if relevant.iter().any(|b| dist(&mid, &b.centre) + half_diag <= b.r) {
        return true;
    }
    if depth == MAX_DEPTH || relevant.iter().all(|b| dist(&mid, &b.centre) > b.r) {
        return false;
    }
    let d = lo.len();
    (0..1usize << d).all(|corner| {
        let (clo, chi): (Vec<f64>, Vec<f64>) = (0..d)
            .map(|a| if corner >> a & 1 == 0 { (lo[a], mid[a]) } else { (mid[a], hi[a]) })
            .unzip();
        box_covered(&clo, &chi, &relevant, depth + 1)
    })
}

/// Evaluates the block field of `spec` on `config`.
pub fn block_field<T: Scalar>(config: &Configuration<T>, spec: &BlockSpec) -> Result<BlockField> {
    let w = config.window();
    w.check_dim(spec.dim())?;
    for a in 0..spec.dim() {
        if spec.origin[a] < w.lower()[a].f64() - TOL || spec.end[a] > w.upper()[a].f64() + TOL {
            return Err(invalid("block lattice does not fit inside the window"));
        }
    }
    let n = spec.len();
    let values = match spec.semantics {
        BlockSemantics::Covered => {
            let mut members: Vec<Vec<Ball>> = (0..n).map(|_| Vec::new()).collect();
            for p in config.points() {
                let x: Vec<f64> = p.position.iter().map(|c| c.f64()).collect();
                // cubes whose closed extent holds the germ (faces are shared)
                let mut ranges = Vec::with_capacity(spec.dim());
                for (a, &c) in x.iter().enumerate() {
                    let i = ((c - spec.origin[a]) / spec.cube_side).floor() as i64;
                    let cand: Vec<usize> = [i - 1, i, i + 1]
                        .into_iter()
                        .filter(|&j| j >= 0 && (j as usize) < spec.extent[a])
                        .map(|j| j as usize)
                        .filter(|&j| {
                            let (lo, hi) = spec.bounds_1d(a, j);
                            lo <= c && c <= hi
                        })
                        .collect();
                    ranges.push(cand);
                }
                let mut idx = vec![0usize; spec.dim()];
                for_each_product(&ranges, &mut idx, 0, &mut |idx| {
                    members[spec.ravel(idx)].push(Ball { centre: x.clone(), r: p.radius.f64() });
                });
            }
            members
                .iter()
                .enumerate()
                .map(|(flat, balls)| {
                    if balls.is_empty() {
                        return 0;
                    }
                    let (lo, hi) = spec.cube(flat);
                    let refs: Vec<&Ball> = balls.iter().collect();
                    u8::from(box_covered(&lo, &hi, &refs, 0))
                })
                .collect()
        }
        BlockSemantics::Vacant => (0..n)
            .map(|flat| {
                let (lo, hi) = spec.cube(flat);
                let mid: Vec<T> = lo.iter().zip(&hi).map(|(a, b)| T::of(0.5 * (a + b))).collect();
                let hit = config.points().iter().any(|p| {
                    // minimal image of the germ relative to the cube centre
                    let c: Vec<f64> = (0..spec.dim())
                        .map(|a| mid[a].f64() + w.axis_displacement(a, mid[a], p.position[a]).f64())
                        .collect();
                    box_dist(&lo, &hi, &c) <= p.radius.f64()
                });
                u8::from(!hit)
            })
            .collect(),
    };
    Ok(BlockField { values, spec: spec.clone() })
}

fn for_each_product(ranges: &[Vec<usize>], idx: &mut Vec<usize>, a: usize, f: &mut impl FnMut(&[usize])) {
    if a == ranges.len() {
        f(idx);
        return;
    }
    for &i in &ranges[a] {
        idx[a] = i;
        for_each_product(ranges, idx, a + 1, f);
    }
}

fn neighbours(spec: &BlockSpec, idx: &[usize], adjacency: Adjacency, out: &mut Vec<usize>) {
    out.clear();
    let d = spec.dim();
    match adjacency {
        Adjacency::NearestNeighbor => {
            for a in 0..d {
                let mut j = idx.to_vec();
                if idx[a] > 0 {
                    j[a] = idx[a] - 1;
                    out.push(spec.ravel(&j));
                }
                if idx[a] + 1 < spec.extent[a] {
                    j[a] = idx[a] + 1;
                    out.push(spec.ravel(&j));
                }
            }
        }
        Adjacency::MaxNorm => {
            let total = 3usize.pow(d as u32);
            'outer: for code in 0..total {
                let mut j = idx.to_vec();
                let mut c = code;
                let mut zero = true;
                for a in 0..d {
                    let step = (c % 3) as i64 - 1;
                    c /= 3;
                    zero &= step == 0;
                    let v = idx[a] as i64 + step;
                    if v < 0 || v >= spec.extent[a] as i64 {
                        continue 'outer;
                    }
                    j[a] = v as usize;
                }
                if !zero {
                    out.push(spec.ravel(&j));
                }
            }
        }
    }
}

/// A path of 1-blocks joins the faces `i_axis = 0` and `i_axis = extent - 1`.
pub fn lattice_crossing_axis(field: &BlockField, adjacency: Adjacency, axis: usize) -> bool {
    let spec = &field.spec;
    let n = spec.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for flat in 0..n {
        if field.values[flat] == 1 && spec.unravel(flat)[axis] == 0 {
            seen[flat] = true;
            queue.push_back(flat);
        }
    }
    let mut nbrs = Vec::new();
    while let Some(f) = queue.pop_front() {
        let idx = spec.unravel(f);
        if idx[axis] + 1 == spec.extent[axis] {
            return true;
        }
        neighbours(spec, &idx, adjacency, &mut nbrs);
        for &g in &nbrs {
            if !seen[g] && field.values[g] == 1 {
                seen[g] = true;
                queue.push_back(g);
            }
        }
    }
    false
}

/// Crossing along each axis.
pub fn crossing_axes(field: &BlockField, adjacency: Adjacency) -> Vec<bool> {
    (0..field.spec.dim()).map(|a| lattice_crossing_axis(field, adjacency, a)).collect()
}

/// Crossing along some axis.
pub fn lattice_crossing(field: &BlockField, adjacency: Adjacency) -> bool {
    crossing_axes(field, adjacency).into_iter().any(|c| c)
}

/// I.i.d. Bernoulli(`p`) field on a unit-cube lattice of the given extent.
pub fn bernoulli_field<R: Rng + ?Sized>(p: f64, extent: &[usize], rng: &mut R) -> Result<BlockField> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability {p} outside [0, 1]")));
    }
    let spec = BlockSpec::new(vec![0.0; extent.len()], 1.0, extent.to_vec(), 0.0, BlockSemantics::Covered)?;
    let values = (0..spec.len()).map(|_| u8::from(rng.random_bool(p))).collect();
    Ok(BlockField { values, spec })
}

/// Per-axis check of both block implications on one sample: covered-lattice
/// crossing implies continuum crossing, and continuum crossing implies a
/// max-norm crossing of non-vacant blocks. Returns the number of axes on
/// which an implication failed for each of the two.
pub fn block_implication_failures<T: Scalar>(
    config: &Configuration<T>,
    covered: &BlockSpec,
    vacant: &BlockSpec,
) -> Result<(usize, usize)> {
    let index = count_components(config, &BoundaryCondition::Empty);
    let cont = percolation_report(&index, config.window()).crosses;
    let cov = crossing_axes(&block_field(config, covered)?, Adjacency::NearestNeighbor);
    let occ = crossing_axes(&block_field(config, vacant)?.complement(), Adjacency::MaxNorm);
    let first = cov.iter().zip(&cont).filter(|(&l, &c)| l && !c).count();
    let second = cont.iter().zip(&occ).filter(|(&c, &o)| c && !o).count();
    Ok((first, second))
}
