use super::report::{Comparison, TestReport};
use super::stats::Summary;
use crate::connectivity::{count_components, percolation_report};
use crate::geometry::{BoundaryCondition, Configuration};
use crate::scalar::Scalar;

/// One-sided test of `E_A[stat] <= E_B[stat]` from summaries of an
/// increasing statistic. Passes unless `A` exceeds `B` by more than
/// `sigma` combined standard errors. Whether the statistic is increasing is
/// the caller's responsibility; it cannot be checked here.
pub fn domination_test(name: &str, a: Summary, b: Summary, sigma: f64) -> TestReport {
    let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
    TestReport::new(name, a.mean, b.mean, se, Comparison::AtMost, a.n.min(b.n))
        .with_sigma(sigma)
        .with_detail("n_a", a.n as f64)
        .with_detail("n_b", b.n as f64)
        .with_detail("stderr_a", a.stderr)
        .with_detail("stderr_b", b.stderr)
}

/// `#ω`.
pub fn count_statistic<T: Scalar>(c: &Configuration<T>) -> f64 {
    c.len() as f64
}

/// Indicator that some component crosses the window along `axis`.
pub fn crossing_statistic<T: Scalar>(c: &Configuration<T>, axis: usize) -> f64 {
    let index = count_components(c, &BoundaryCondition::Empty);
    f64::from(u8::from(percolation_report(&index, c.window()).crosses[axis]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::radius::RadiusLaw;
    use crate::samplers::sample_poisson_in;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_and_poisson_sets() {
        let w = Window::<f64>::cube(2, 2.0).unwrap();
        let law = RadiusLaw::dirac(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..4000).map(|_| count_statistic(&sample_poisson_in(&w, 1.0, &law, &mut rng))).collect();
        let same = domination_test("same", Summary::iid(&a), Summary::iid(&a), 3.0);
        assert!(same.passed() && same.lhs == same.rhs);
        let b: Vec<f64> = (0..4000).map(|_| count_statistic(&sample_poisson_in(&w, 2.0, &law, &mut rng))).collect();
        let r = domination_test("poisson", Summary::iid(&a), Summary::iid(&b), 3.0);
        assert!(r.passed());
        assert!((r.rhs - r.lhs - 4.0).abs() < 0.3);
        assert!(!domination_test("rev", Summary::iid(&b), Summary::iid(&a), 3.0).passed());
    }
}
