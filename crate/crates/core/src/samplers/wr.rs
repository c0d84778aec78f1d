//! Widom–Rowlinson model: `q` colours with hard-core exclusion between
//! overlapping balls of different colours.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mcmc::{cell_size_hint, ChainOptions, MoveStats};
use super::poisson::uniform_marked_point;
use crate::connectivity::grid_bounds;
use crate::error::{invalid, Result};
use crate::geometry::{overlaps, Configuration, MarkedPoint, Window};
use crate::params::ModelParams;
use crate::rng::ChainRng;
use crate::scalar::Scalar;
use crate::spatial::SpatialGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ColoredPoint<T: Scalar> {
    pub point: MarkedPoint<T>,
    /// In `1..=q`.
    pub color: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ColoredConfiguration<T: Scalar> {
    pub points: Vec<ColoredPoint<T>>,
    pub window: Window<T>,
    pub colors: u32,
}

impl<T: Scalar> ColoredConfiguration<T> {
    pub fn new(window: Window<T>, colors: u32, points: Vec<ColoredPoint<T>>) -> Result<Self> {
        if colors == 0 {
            return Err(invalid("colour count must be positive"));
        }
        for p in &points {
            window.check_dim(p.point.dim())?;
            if !(1..=colors).contains(&p.color) {
                return Err(invalid(format!("colour {} outside 1..={colors}", p.color)));
            }
            if !window.contains(&p.point.position) {
                return Err(invalid("coloured germ outside the window"));
            }
        }
        Ok(Self { points, window, colors })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The event `𝒜`, checked by a full pairwise scan.
    pub fn satisfies_hard_core(&self) -> bool {
        self.points.iter().enumerate().all(|(i, a)| {
            self.points[..i]
                .iter()
                .all(|b| a.color == b.color || !overlaps(&self.window, &a.point, &b.point))
        })
    }

    /// Germ-grain configuration with colours forgotten.
    pub fn uncolored(&self) -> Configuration<T> {
        Configuration::from_parts_unchecked(self.window.clone(), self.points.iter().map(|p| p.point.clone()).collect())
    }
}

/// Birth–death chain for WR. Births draw `(x, R, colour)` from
/// `L^d ⊗ Q ⊗ U_q` and are accepted with `min(1, z|Λ|/(n+1))` when no ball of
/// a different colour is hit; deaths with `min(1, n/(z|Λ|))`.
#[derive(Clone, Debug)]
pub struct WrChain<T: Scalar> {
    window: Window<T>,
    points: Vec<ColoredPoint<T>>,
    fixed: usize,
    grid: SpatialGrid<T>,
    colors: u32,
    rng: ChainRng,
    step: u64,
    stats: MoveStats,
}

impl<T: Scalar> WrChain<T> {
    /// The boundary points of `params` all receive colour 1.
    pub fn new(params: &ModelParams<T>, rng: ChainRng) -> Result<Self> {
        let boundary = params
            .boundary
            .points()
            .iter()
            .map(|p| ColoredPoint { point: p.clone(), color: 1 })
            .collect::<Vec<_>>();
        Self::with_colored_boundary(params, &boundary, rng)
    }

    pub fn with_colored_boundary(params: &ModelParams<T>, boundary: &[ColoredPoint<T>], rng: ChainRng) -> Result<Self> {
        params.validate()?;
        let colors = params.colours()?;
        if boundary.iter().any(|p| !(1..=colors).contains(&p.color)) {
            return Err(invalid("boundary colour out of range"));
        }
        let plain: Vec<MarkedPoint<T>> = boundary.iter().map(|p| p.point.clone()).collect();
        crate::geometry::BoundaryCondition::Fixed(plain.clone()).validate(&params.window)?;
        let bounds = grid_bounds(&params.window, &plain);
        let mut grid = SpatialGrid::new(&bounds, cell_size_hint(&params.radius_law, &params.window))?;
        for (i, p) in boundary.iter().enumerate() {
            grid.insert(i as u32, &p.point);
        }
        Ok(Self {
            window: params.window.clone(),
            points: boundary.to_vec(),
            fixed: boundary.len(),
            grid,
            colors,
            rng,
            step: 0,
            stats: MoveStats::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() - self.fixed
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> &MoveStats {
        &self.stats
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn configuration(&self) -> ColoredConfiguration<T> {
        ColoredConfiguration { points: self.points[self.fixed..].to_vec(), window: self.window.clone(), colors: self.colors }
    }

    fn compatible(&self, x: &ColoredPoint<T>) -> bool {
        let mut ok = true;
        self.grid.for_each_candidate(&x.point.position, x.point.radius, |j| {
            let y = &self.points[j as usize];
            if ok && y.color != x.color && overlaps(&self.window, &y.point, &x.point) {
                ok = false;
            }
        });
        ok
    }

    pub fn step(&mut self, params: &ModelParams<T>) {
        let zv = params.z * params.window.volume();
        let n = self.len();
        if self.rng.random_bool(0.5) {
            self.stats.births_proposed += 1;
            let point = uniform_marked_point(&params.window, &params.radius_law, &mut self.rng);
            let color = 1 + self.rng.random_range(0..self.colors);
            let x = ColoredPoint { point, color };
            let a = (zv / (n + 1) as f64).min(1.0);
            if self.rng.random::<f64>() < a && self.compatible(&x) {
                self.grid.insert(self.points.len() as u32, &x.point);
                self.points.push(x);
                self.stats.births_accepted += 1;
            }
        } else {
            self.stats.deaths_proposed += 1;
            if n == 0 {
                self.stats.deaths_on_empty += 1;
            } else {
                let slot = self.fixed + self.rng.random_range(0..n);
                let a = (n as f64 / zv).min(1.0);
                if self.rng.random::<f64>() < a {
                    let last = self.points.len() - 1;
                    self.grid.remove(slot as u32, &self.points[slot].point);
                    if last != slot {
                        self.grid.relabel(last as u32, slot as u32, &self.points[last].point);
                    }
                    self.points.swap_remove(slot);
                    self.stats.deaths_accepted += 1;
                }
            }
        }
        self.step += 1;
    }
}

#[derive(Clone, Debug)]
pub struct WrRun<T: Scalar> {
    pub samples: Vec<ColoredConfiguration<T>>,
    pub stats: MoveStats,
}

/// Thinned post-burn-in WR configurations; `params.q` must be a positive
/// integer. Boundary points of `params` are coloured 1.
pub fn sample_wr<T: Scalar>(params: &ModelParams<T>, options: &ChainOptions<T>, rng: ChainRng) -> Result<WrRun<T>> {
    if options.thin == 0 || options.burn_in > options.steps {
        return Err(invalid("need thin >= 1 and burn_in <= steps"));
    }
    let mut chain = WrChain::new(params, rng)?;
    if let Some(init) = &options.initial {
        for p in init.points() {
            let x = ColoredPoint { point: p.clone(), color: 1 };
            if !chain.compatible(&x) {
                return Err(invalid("initial configuration violates the hard-core constraint"));
            }
            chain.grid.insert(chain.points.len() as u32, &x.point);
            chain.points.push(x);
        }
    }
    let mut samples = Vec::new();
    for t in 1..=options.steps {
        chain.step(params);
        if t > options.burn_in && (t - options.burn_in) % options.thin == 0 {
            samples.push(chain.configuration());
        }
    }
    Ok(WrRun { samples, stats: chain.stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radius::RadiusLaw;
    use crate::rng::SeedStream;

    fn params(z: f64, q: f64, side: f64) -> ModelParams<f64> {
        ModelParams::new(z, q, RadiusLaw::dirac(0.5).unwrap(), Window::cube(2, side).unwrap()).unwrap()
    }

    #[test]
    fn rejects_fractional_q() {
        assert!(WrChain::new(&params(1.0, 1.5, 2.0), SeedStream::new(1).stream(0)).is_err());
    }

    #[test]
    fn every_sample_is_hard_core() {
        let p = params(2.0, 3.0, 3.0);
        let run = sample_wr(&p, &ChainOptions::new(50_000, 1000, 10), SeedStream::new(2).stream(0)).unwrap();
        assert!(run.samples.iter().all(|c| c.satisfies_hard_core()));
        assert!(run.samples.iter().any(|c| c.len() > 3));
    }

    #[test]
    fn single_colour_is_poisson() {
        let p = params(1.0, 1.0, 2.0);
        let run = sample_wr(&p, &ChainOptions::new(400_000, 1000, 100), SeedStream::new(3).stream(0)).unwrap();
        let n = run.samples.len() as f64;
        let mean = run.samples.iter().map(|c| c.len() as f64).sum::<f64>() / n;
        assert!((mean - 4.0).abs() < 4.5 * (4.0 / n).sqrt(), "mean {mean}");
    }

    #[test]
    fn hard_core_scan() {
        let w = Window::<f64>::cube(2, 4.0).unwrap();
        let a = MarkedPoint::new(crate::geometry::Coords::from_slice(&[1.0, 1.0]), 0.5).unwrap();
        let b = MarkedPoint::new(crate::geometry::Coords::from_slice(&[1.5, 1.0]), 0.5).unwrap();
        let same = ColoredConfiguration::new(
            w.clone(),
            2,
            vec![ColoredPoint { point: a.clone(), color: 1 }, ColoredPoint { point: b.clone(), color: 1 }],
        )
        .unwrap();
        assert!(same.satisfies_hard_core());
        let diff = ColoredConfiguration::new(w.clone(), 2, vec![ColoredPoint { point: a, color: 1 }, ColoredPoint { point: b, color: 2 }]).unwrap();
        assert!(!diff.satisfies_hard_core());
        assert!(ColoredConfiguration::new(w, 2, vec![ColoredPoint { point: diff.points[0].point.clone(), color: 3 }]).is_err());
    }

    #[test]
    fn boundary_colour_blocks_births() {
        let p = params(3.0, 2.0, 1.0);
        let ring = vec![ColoredPoint { point: MarkedPoint::new(crate::geometry::Coords::from_slice(&[-0.1, 0.5]), 1.0).unwrap(), color: 2 }];
        let mut chain = WrChain::with_colored_boundary(&p, &ring, SeedStream::new(4).stream(0)).unwrap();
        for _ in 0..20_000 {
            chain.step(&p);
            let c = chain.configuration();
            for x in &c.points {
                if overlaps(&p.window, &x.point, &ring[0].point) {
                    assert_eq!(x.color, 2);
                }
            }
        }
    }
}
