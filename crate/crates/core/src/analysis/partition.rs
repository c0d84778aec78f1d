use rand::Rng;

use super::stats::Summary;
use crate::connectivity::{component_count_of, count_components};
use crate::error::{invalid, Result};
use crate::params::ModelParams;
use crate::samplers::sample_poisson;
use crate::scalar::Scalar;

/// Monte Carlo estimate of `Z_Λ = E_{π^{z,Q}}[q^{N_cc^Λ}]` given the
/// boundary of `params`, with its standard error. Exactly `(1, 0)` at `q = 1`.
pub fn estimate_partition_function<T: Scalar, R: Rng + ?Sized>(
    params: &ModelParams<T>,
    n_samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    params.validate()?;
    if n_samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    if params.q == 1.0 {
        return Ok((1.0, 0.0));
    }
    let outside = component_count_of(&params.window, params.boundary.points()) as i64;
    let values: Vec<f64> = (0..n_samples)
        .map(|_| {
            let c = sample_poisson(params, rng);
            let local = count_components(&c, &params.boundary).component_count() as i64 - outside;
            params.q.powi(local as i32)
        })
        .collect();
    let s = Summary::iid(&values);
    Ok((s.mean, s.stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::radius::RadiusLaw;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(z: f64, q: f64, side: f64) -> ModelParams<f64> {
        ModelParams::new(z, q, RadiusLaw::dirac(0.5).unwrap(), Window::cube(2, side).unwrap()).unwrap()
    }

    #[test]
    fn q_one_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(estimate_partition_function(&params(3.0, 1.0, 2.0), 10, &mut rng).unwrap(), (1.0, 0.0));
    }

    /// At `z|Λ| = ε` the estimate differs from 1 by about `(q-1)ε`, which is
    /// ten standard errors at this sample size, so the comparison is with
    /// the one-point expansion `e^{-ε}(1 + qε)` instead.
    #[test]
    fn tiny_intensity_is_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let eps = 1e-3;
        let (z, se) = estimate_partition_function(&params(eps, 2.0, 1.0), 100_000, &mut rng).unwrap();
        let expansion = (-eps).exp() * (1.0 + 2.0 * eps);
        assert!((z - expansion).abs() <= 3.0 * se + eps * eps, "{z} {se}");
        assert!((z - 1.0).abs() < 5e-3);
    }

    /// Stratified oracle on `[0,1]²`, radius 0.5: the empty and one-point
    /// strata are explicit, two points overlap unless at distance above 1
    /// (probability `1 - A`, `A = π - 13/6`), and the `n >= 3` strata are
    /// bracketed by `q <= q^{N_cc} <= q^n`.
    #[test]
    fn stratified_oracle() {
        let (z, q) = (0.5f64, 2.0f64);
        let a = std::f64::consts::PI - 13.0 / 6.0;
        let head = 1.0 + z * q + 0.5 * z * z * (q * a + q * q * (1.0 - a));
        let tail = |x: f64| x.exp() - 1.0 - x - 0.5 * x * x;
        let lo = (-z).exp() * (head + q * tail(z));
        let hi = (-z).exp() * (head + tail(q * z));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (est, se) = estimate_partition_function(&params(z, q, 1.0), 200_000, &mut rng).unwrap();
        assert!(est >= lo - 3.0 * se && est <= hi + 3.0 * se, "{est} ± {se} not in [{lo}, {hi}]");
    }
}
