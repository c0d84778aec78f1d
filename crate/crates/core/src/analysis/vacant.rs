use super::blocks::BlockSpec;
use super::report::{Comparison, TestReport};
use super::stats::Summary;
use crate::connectivity::count_components;
use crate::error::{invalid, Result};
use crate::geometry::{box_distance_sq, BoundaryCondition, Configuration};
use crate::params::ModelParams;
use crate::scalar::Scalar;

/// Number of components of the union of balls of `config` that meet the
/// inner lattice window of `spec`.
pub fn components_meeting<T: Scalar>(config: &Configuration<T>, spec: &BlockSpec) -> Result<usize> {
    let lambda = spec.inner_window::<T>()?;
    let index = count_components(config, &BoundaryCondition::Empty);
    let mut hit = vec![false; index.component_count()];
    for (i, p) in config.points().iter().enumerate() {
        if box_distance_sq(lambda.lower(), lambda.upper(), &p.position) <= p.radius * p.radius {
            hit[index.label(i)] = true;
        }
    }
    Ok(hit.into_iter().filter(|&h| h).count())
}

/// Compares the mean number of components meeting `Λ` with the explicit
/// bound `z |Δ| q^{1-4^d}`, where `Δ` is the sample window. Only meaningful
/// for `q < 1` and bounded radii. The standard error uses batch means so
/// chain output can be passed directly.
pub fn vacant_cluster_count_bound<T: Scalar>(
    samples: &[Configuration<T>],
    params: &ModelParams<T>,
    spec: &BlockSpec,
) -> Result<TestReport> {
    if params.q >= 1.0 {
        return Err(invalid("the vacant cluster bound applies only to q < 1"));
    }
    if !params.radius_law.is_bounded() {
        return Err(invalid("the vacant cluster bound requires bounded radii"));
    }
    let counts = samples
        .iter()
        .map(|s| components_meeting(s, spec).map(|n| n as f64))
        .collect::<Result<Vec<_>>>()?;
    let s = Summary::batched(&counts, 50);
    let alpha = 4f64.powi(params.dimension as i32);
    let bound = params.z * params.window.volume() * params.q.powf(1.0 - alpha);
    Ok(TestReport::new("vacant-cluster-bound", s.mean, bound, s.stderr, Comparison::AtMost, s.n)
        .with_detail("alpha", alpha)
        .with_detail("z", params.z)
        .with_detail("q", params.q))
}
