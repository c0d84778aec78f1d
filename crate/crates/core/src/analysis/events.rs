use serde::{Deserialize, Serialize};

use super::report::{Comparison, TestReport};
use super::stats::Summary;
use crate::error::Result;
use crate::geometry::{Configuration, Window};
use crate::scalar::Scalar;

/// Frequencies of the events `C_R` (a ball of radius above `R` centred in
/// the inner window) and `B` (at least `count_threshold` balls of radius at
/// most `r` centred in the sample window but outside the inner window).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFrequencies {
    pub large_ball: Summary,
    pub small_balls: Summary,
}

impl EventFrequencies {
    pub fn reports(&self) -> Vec<TestReport> {
        [("event:large-ball", self.large_ball), ("event:small-balls", self.small_balls)]
            .into_iter()
            .map(|(name, s)| TestReport::new(name, s.mean, f64::NAN, s.stderr, Comparison::Describe, s.n))
            .collect()
    }
}

pub fn event_frequencies<T: Scalar>(
    samples: &[Configuration<T>],
    inner: &Window<T>,
    r_threshold: f64,
    small_r: f64,
    count_threshold: usize,
) -> Result<EventFrequencies> {
    let mut large = Vec::with_capacity(samples.len());
    let mut small = Vec::with_capacity(samples.len());
    for s in samples {
        inner.check_dim(s.dim())?;
        let c = s.points().iter().any(|p| inner.contains(&p.position) && p.radius.f64() > r_threshold);
        let b = s
            .points()
            .iter()
            .filter(|p| !inner.contains(&p.position) && p.radius.f64() <= small_r)
            .count()
            >= count_threshold;
        large.push(f64::from(u8::from(c)));
        small.push(f64::from(u8::from(b)));
    }
    Ok(EventFrequencies { large_ball: Summary::iid(&large), small_balls: Summary::iid(&small) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radius::RadiusLaw;
    use crate::samplers::sample_poisson_in;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_and_trivial_cases() {
        let w = Window::<f64>::cube(2, 3.0).unwrap();
        let inner = Window::new(vec![1.0, 1.0], vec![2.0, 2.0], crate::geometry::Topology::Free).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dirac = RadiusLaw::dirac(0.5).unwrap();
        let s: Vec<_> = (0..500).map(|_| sample_poisson_in(&w, 2.0, &dirac, &mut rng)).collect();
        let f = event_frequencies(&s, &inner, 1.0, 0.5, 0).unwrap();
        assert_eq!(f.large_ball.mean, 0.0);
        assert_eq!(f.small_balls.mean, 1.0);

        // balls centred in the inner unit square with R > 0.5 form a Poisson
        // process of mean z|Λ|/2
        let z = 1.2;
        let unif = RadiusLaw::uniform(0.0, 1.0).unwrap();
        let s: Vec<_> = (0..20_000).map(|_| sample_poisson_in(&w, z, &unif, &mut rng)).collect();
        let f = event_frequencies(&s, &inner, 0.5, 0.5, 3).unwrap();
        let expected = 1.0 - (-z * 1.0 / 2.0f64).exp();
        assert!((f.large_ball.mean - expected).abs() < 3.0 * f.large_ball.stderr, "{f:?}");
    }
}
