use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::connectivity::ClusterIndex;
use crate::geometry::{BoundaryCondition, Configuration, Coords, MarkedPoint, Window};
use crate::params::ModelParams;
use crate::radius::RadiusLaw;
use crate::scalar::Scalar;

/// Uniform germ in `window` with an independent radius from `law`.
pub fn uniform_marked_point<T: Scalar, R: Rng + ?Sized>(window: &Window<T>, law: &RadiusLaw, rng: &mut R) -> MarkedPoint<T> {
    let position: Coords<T> = (0..window.dim())
        .map(|a| {
            let u: f64 = rng.random();
            let x = window.lower()[a] + T::of(u) * window.side(a);
            // guard against rounding onto the open upper face of a torus
            if x > window.upper()[a] { window.upper()[a] } else { x }
        })
        .collect();
    MarkedPoint::raw(position, law.sample(rng))
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as usize
}

/// Marked Poisson process of intensity `z` on `window`.
pub fn sample_poisson_in<T: Scalar, R: Rng + ?Sized>(window: &Window<T>, z: f64, law: &RadiusLaw, rng: &mut R) -> Configuration<T> {
    let n = poisson_count(z * window.volume(), rng);
    let points = (0..n).map(|_| uniform_marked_point(window, law, rng)).collect();
    Configuration::from_parts_unchecked(window.clone(), points)
}

/// A draw from `π^{z,Q}` on the parameter window.
pub fn sample_poisson<T: Scalar, R: Rng + ?Sized>(params: &ModelParams<T>, rng: &mut R) -> Configuration<T> {
    sample_poisson_in(&params.window, params.z, &params.radius_law, rng)
}

/// Papangelou intensity ratio `q^{1 - k(x, ω)}`, with `ω` including the
/// boundary points. Multiply by `z` for the birth intensity.
pub fn papangelou_weight<T: Scalar>(
    x: &MarkedPoint<T>,
    config: &Configuration<T>,
    boundary: &BoundaryCondition<T>,
    q: f64,
) -> f64 {
    let k = if config.is_empty() && boundary.is_empty() {
        0
    } else {
        ClusterIndex::build(config.window(), config.points(), boundary.points()).components_touching(x)
    };
    q.powi(1 - k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(c: &[f64], r: f64) -> MarkedPoint<f64> {
        MarkedPoint::new(Coords::from_slice(c), r).unwrap()
    }

    #[test]
    fn tiny_intensity_is_almost_always_empty() {
        let w = Window::<f64>::cube(2, 1.0).unwrap();
        let law = RadiusLaw::dirac(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let empty = (0..10_000).filter(|_| sample_poisson_in(&w, 1e-6, &law, &mut rng).is_empty()).count();
        assert!(empty as f64 >= 0.9999 * 10_000.0);
    }

    #[test]
    fn count_mean_and_variance_are_poisson() {
        let w = Window::<f64>::cube(2, 2.0).unwrap();
        let law = RadiusLaw::dirac(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let counts: Vec<f64> = (0..n).map(|_| sample_poisson_in(&w, 1.0, &law, &mut rng).len() as f64).collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // sd of the mean is sqrt(4/n); sd of the sample variance is sqrt((mu4 - sigma^4)/n) with mu4 = 4 + 3*16
        assert!((mean - 4.0).abs() < 3.0 * (4.0 / n as f64).sqrt(), "mean {mean}");
        assert!((var - 4.0).abs() < 3.0 * ((52.0 - 16.0) / n as f64).sqrt(), "var {var}");
        let c = sample_poisson_in(&w, 5.0, &law, &mut rng);
        assert!(c.points().iter().all(|p| w.contains(&p.position)));
    }

    #[test]
    fn papangelou_examples() {
        let w = Window::<f64>::cube(2, 10.0).unwrap();
        let x = pt(&[5.0, 5.0], 1.0);
        let empty = Configuration::empty(w.clone());
        assert_eq!(papangelou_weight(&x, &empty, &BoundaryCondition::Empty, 3.0), 3.0);
        let one = Configuration::new(w.clone(), vec![pt(&[5.5, 5.0], 0.2)]).unwrap();
        assert_eq!(papangelou_weight(&x, &one, &BoundaryCondition::Empty, 0.3), 1.0);
        let three = Configuration::new(w.clone(), vec![pt(&[3.6, 5.0], 0.5), pt(&[6.4, 5.0], 0.5), pt(&[5.0, 6.4], 0.5)]).unwrap();
        assert_eq!(papangelou_weight(&x, &three, &BoundaryCondition::Empty, 2.0), 0.25);
    }
}
