//! Conditional block probabilities under stress-test boundary conditions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::blocks::{block_field, BlockSpec};
use super::report::{Comparison, TestReport};
use super::stats::Summary;
use crate::error::Result;
use crate::geometry::{BoundaryCondition, Coords, MarkedPoint};
use crate::params::ModelParams;
use crate::rng::SeedStream;
use crate::samplers::{run_chain_with, uniform_marked_point, ChainOptions};
use crate::scalar::Scalar;

/// Three outside configurations around `delta`: empty, a Poisson layer of
/// intensity `4z` and width `2 R_max`, and a shell of balls of radius
/// `R_max` at spacing `R_max` just outside the window.
pub fn stress_ensemble<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParams<T>,
    rng: &mut R,
) -> Vec<(String, BoundaryCondition<T>)> {
    let delta = &params.window;
    let law = &params.radius_law;
    let r_max = if law.is_bounded() { law.max_radius() } else { law.inverse_cdf(0.99) };
    let reach = T::of((2.0 * r_max).max(1e-3));
    let outer = delta.enlarged(reach);
    let n = crate::samplers::poisson_count(4.0 * params.z * outer.volume(), rng);
    let dense = (0..n)
        .map(|_| uniform_marked_point(&outer, law, rng))
        .filter(|p| !delta.contains(&p.position))
        .collect();
    let mut shell = Vec::new();
    if r_max > 0.0 {
        let ring = delta.enlarged(T::of(0.5 * r_max));
        let step = r_max;
        // germs on the faces of `ring`, on a grid of spacing `step`
        let d = delta.dim();
        for face in 0..d {
            for side in [ring.lower()[face], ring.upper()[face]] {
                let counts: Vec<usize> =
                    (0..d).map(|a| if a == face { 1 } else { (ring.side(a).f64() / step).ceil() as usize + 1 }).collect();
                let total: usize = counts.iter().product();
                for mut flat in 0..total {
                    let pos: Coords<T> = (0..d)
                        .map(|a| {
                            let i = flat % counts[a];
                            flat /= counts[a];
                            if a == face {
                                side
                            } else {
                                (ring.lower()[a] + T::of(i as f64 * step)).min(ring.upper()[a])
                            }
                        })
                        .collect();
                    shell.push(MarkedPoint::new(pos, T::of(r_max)).expect("finite shell point"));
                }
            }
        }
    }
    vec![
        ("empty".to_string(), BoundaryCondition::Empty),
        ("dense-poisson".to_string(), BoundaryCondition::Fixed(dense)),
        ("shell".to_string(), BoundaryCondition::Fixed(shell)),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBlockEstimate {
    pub z: f64,
    pub labels: Vec<String>,
    pub per_boundary: Vec<Summary>,
    /// Entry of `per_boundary` with the smallest mean.
    pub minimum: Summary,
}

impl ConditionalBlockEstimate {
    pub fn report(&self, name: &str) -> TestReport {
        let mut r = TestReport::new(name, self.minimum.mean, f64::NAN, self.minimum.stderr, Comparison::Describe, self.minimum.n)
            .with_detail("z", self.z);
        for (l, s) in self.labels.iter().zip(&self.per_boundary) {
            r = r.with_detail(format!("p[{l}]"), s.mean).with_detail(format!("se[{l}]"), s.stderr);
        }
        r
    }
}

/// Estimates `P(every block of spec is 1 | boundary)` on the window of
/// `params` by a conditional chain for each boundary of the ensemble.
pub fn conditional_block_probability<T: Scalar>(
    params: &ModelParams<T>,
    spec: &BlockSpec,
    ensemble: &[(String, BoundaryCondition<T>)],
    options: &ChainOptions<T>,
    seeds: &SeedStream,
) -> Result<ConditionalBlockEstimate> {
    let mut per = Vec::with_capacity(ensemble.len());
    for (i, (_, boundary)) in ensemble.iter().enumerate() {
        let p = params.clone().with_boundary(boundary.clone())?;
        let mut xs = Vec::new();
        let mut err = None;
        run_chain_with(&p, options, seeds.stream(i as u64), |s| match block_field(&s.configuration(), spec) {
            Ok(f) => xs.push(f64::from(u8::from(f.ones() == f.spec.len()))),
            Err(e) => err = Some(e),
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        per.push(Summary::batched(&xs, 50));
    }
    let minimum = per
        .iter()
        .copied()
        .min_by(|a, b| a.mean.total_cmp(&b.mean))
        .unwrap_or(Summary { mean: f64::NAN, stderr: f64::NAN, n: 0 });
    Ok(ConditionalBlockEstimate {
        z: params.z,
        labels: ensemble.iter().map(|(l, _)| l.clone()).collect(),
        per_boundary: per,
        minimum,
    })
}

/// Whether the minima are nondecreasing along the sequence up to `sigma`
/// combined standard errors.
pub fn nondecreasing_within(estimates: &[ConditionalBlockEstimate], sigma: f64) -> bool {
    estimates.windows(2).all(|w| {
        let (a, b) = (w[0].minimum, w[1].minimum);
        b.mean >= a.mean - sigma * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::blocks::BlockSemantics;
    use crate::radius::RadiusLaw;

    fn setup(z: f64, semantics: BlockSemantics, half: f64) -> (ModelParams<f64>, BlockSpec) {
        let spec = BlockSpec::new(vec![-0.5; 2], 1.0, vec![1, 1], half - 0.5, semantics).unwrap();
        let p = ModelParams::new(z, 2.0, RadiusLaw::dirac(0.5).unwrap(), spec.outer_window().unwrap()).unwrap();
        (p, spec)
    }

    #[test]
    fn small_intensity_limits() {
        let seeds = SeedStream::new(1);
        for (sem, check) in [(BlockSemantics::Covered, 0usize), (BlockSemantics::Vacant, 1)] {
            let (mut p, spec) = setup(1.0, sem, 8.0);
            p.z = 1e-3 / p.window.volume();
            let mut rng = seeds.stream(99);
            let ens = stress_ensemble(&p, &mut rng);
            assert_eq!(ens.len(), 3);
            let est = conditional_block_probability(&p, &spec, &ens, &ChainOptions::new(20_000, 1000, 10), &seeds).unwrap();
            if check == 0 {
                assert!(est.per_boundary.iter().all(|s| s.mean < 0.01));
            } else {
                // the shell touches only the outer layer, never the central cube
                assert!(est.per_boundary.iter().all(|s| s.mean > 0.99), "{est:?}");
            }
        }
    }

    #[test]
    fn covered_minimum_grows_with_z() {
        let seeds = SeedStream::new(2);
        let mut out = Vec::new();
        for z in [2.0, 4.0, 8.0, 16.0] {
            let (p, spec) = setup(z, BlockSemantics::Covered, 2.0);
            let mut rng = seeds.child(1).stream(z as u64);
            let ens = stress_ensemble(&p, &mut rng);
            let steps = 200 * (z * p.window.volume()) as u64;
            out.push(conditional_block_probability(&p, &spec, &ens, &ChainOptions::new(steps, steps / 5, 20), &seeds).unwrap());
        }
        assert!(nondecreasing_within(&out, 2.0), "{:?}", out.iter().map(|e| e.minimum).collect::<Vec<_>>());
        assert!(out[3].minimum.mean > out[0].minimum.mean);
    }
}
