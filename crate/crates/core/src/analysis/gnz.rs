//! Monte Carlo checks of the GNZ identity
//! `E Σ_{X∈ω} F(X, ω - δ_X) = z E ∫ F(X, ω) λ(X, ω) m(dX)`
//! with `λ = q^{1-k}` for the CRCM and `λ = 𝟙_𝒜(ω̃ + δ_X̃)` for WR.

use rand::Rng;

use super::report::{Comparison, TestReport};
use super::stats::Summary;
use crate::connectivity::DynamicClusters;
use crate::error::{invalid, Result};
use crate::geometry::{overlaps, Configuration, MarkedPoint};
use crate::params::ModelParams;
use crate::samplers::{uniform_marked_point, ColoredConfiguration, ColoredPoint};
use crate::scalar::Scalar;

const MAX_ABS: f64 = 1e12;

/// Arguments handed to a test function `F(X, ω)`.
pub struct GnzArgs<'a, P> {
    pub x: &'a P,
    /// `k(X, ω)`: components of `ω` (boundary included) touching `B(X)`.
    pub k: usize,
    /// The sample; when `excluded` is set, that entry is `X` itself and is
    /// not part of `ω`.
    pub others: &'a [P],
    pub excluded: Option<usize>,
}

/// Points carrying a germ-grain mark.
pub trait Marked<T: Scalar> {
    fn marked(&self) -> &MarkedPoint<T>;
}

impl<T: Scalar> Marked<T> for MarkedPoint<T> {
    fn marked(&self) -> &MarkedPoint<T> {
        self
    }
}

impl<T: Scalar> Marked<T> for ColoredPoint<T> {
    fn marked(&self) -> &MarkedPoint<T> {
        &self.point
    }
}

type Eval<P> = Box<dyn Fn(&GnzArgs<'_, P>) -> f64 + Send + Sync>;

/// A named bounded test function.
pub struct TestFunction<P> {
    pub name: String,
    f: Eval<P>,
}

impl<P> TestFunction<P> {
    pub fn new(name: impl Into<String>, f: impl Fn(&GnzArgs<'_, P>) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Box::new(f) }
    }

    fn eval(&self, args: &GnzArgs<'_, P>) -> Result<f64> {
        let v = (self.f)(args);
        if !v.is_finite() || v.abs() > MAX_ABS {
            return Err(invalid(format!("test function {} returned {v}; it must be bounded", self.name)));
        }
        Ok(v)
    }

    /// `F = 1`.
    pub fn constant() -> Self {
        Self::new("one", |_| 1.0)
    }

    /// `F = 𝟙{k(X, ω) = 0}`.
    pub fn isolated() -> Self {
        Self::new("isolated", |a| f64::from(u8::from(a.k == 0)))
    }
}

impl<P> TestFunction<P> {
    /// `F = 𝟙{R <= r}`.
    pub fn radius_at_most<T: Scalar>(r: f64) -> Self
    where
        P: Marked<T>,
    {
        Self::new(format!("radius<={r}"), move |a| f64::from(u8::from(a.x.marked().radius.f64() <= r)))
    }
}

impl<T: Scalar> TestFunction<ColoredPoint<T>> {
    /// `F = 𝟙{colour = c}`.
    pub fn color_is(c: u32) -> Self {
        Self::new(format!("color={c}"), move |a| f64::from(u8::from(a.x.color == c)))
    }
}

/// The three standard functions: `1`, `𝟙{R <= median}`, `𝟙{k = 0}`.
pub fn standard_test_functions<T: Scalar>(params: &ModelParams<T>) -> Vec<TestFunction<MarkedPoint<T>>> {
    vec![
        TestFunction::constant(),
        TestFunction::radius_at_most(params.radius_law.median()),
        TestFunction::isolated(),
    ]
}

fn reports<T: Scalar>(
    prefix: &str,
    names: impl Iterator<Item = String>,
    lhs: Vec<Vec<f64>>,
    rhs: Vec<Vec<f64>>,
    params: &ModelParams<T>,
) -> Vec<TestReport> {
    names
        .zip(lhs.into_iter().zip(rhs))
        .map(|(name, (l, r))| {
            let d: Vec<f64> = l.iter().zip(&r).map(|(a, b)| a - b).collect();
            let diff = Summary::batched(&d, 50);
            let (ls, rs) = (Summary::iid(&l), Summary::iid(&r));
            TestReport::new(format!("{prefix}:{name}"), ls.mean, rs.mean, diff.stderr, Comparison::TwoSided, l.len())
                .with_detail("z", params.z)
                .with_detail("q", params.q)
                .with_detail("lhs_stderr", ls.stderr)
                .with_detail("rhs_stderr", rs.stderr)
        })
        .collect()
}

/// GNZ residuals for CRCM samples of `params` (boundary included). The
/// right-hand side uses `proposals` fresh uniform marks per sample. The
/// reported standard error is that of the per-sample difference, by batch
/// means, so mildly correlated chain output is handled as well.
pub fn gnz_residual_crcm<T: Scalar, R: Rng + ?Sized>(
    samples: &[Configuration<T>],
    params: &ModelParams<T>,
    functions: &[TestFunction<MarkedPoint<T>>],
    proposals: usize,
    rng: &mut R,
) -> Result<Vec<TestReport>> {
    params.validate()?;
    if proposals == 0 {
        return Err(invalid("need at least one proposal per sample"));
    }
    let cell = crate::samplers::cell_size_hint(&params.radius_law, &params.window);
    let zv = params.z * params.window.volume();
    let mut lhs = vec![Vec::with_capacity(samples.len()); functions.len()];
    let mut rhs = lhs.clone();
    for s in samples {
        if s.window() != &params.window {
            return Err(invalid("sample window differs from the parameter window"));
        }
        let mut dc = DynamicClusters::from_configuration(s, params.boundary.points(), cell);
        let mut l = vec![0.0; functions.len()];
        for i in 0..s.len() {
            let k = dc.plan_removal(i).k;
            let args = GnzArgs { x: &s.points()[i], k, others: s.points(), excluded: Some(i) };
            for (acc, f) in l.iter_mut().zip(functions) {
                *acc += f.eval(&args)?;
            }
        }
        let mut r = vec![0.0; functions.len()];
        for _ in 0..proposals {
            let y = uniform_marked_point(&params.window, &params.radius_law, rng);
            let k = dc.touching_components(&y);
            let w = params.q.powi(1 - k as i32);
            let args = GnzArgs { x: &y, k, others: s.points(), excluded: None };
            for (acc, f) in r.iter_mut().zip(functions) {
                *acc += f.eval(&args)? * w;
            }
        }
        for j in 0..functions.len() {
            lhs[j].push(l[j]);
            rhs[j].push(r[j] * zv / proposals as f64);
        }
    }
    Ok(reports("gnz-crcm", functions.iter().map(|f| f.name.clone()), lhs, rhs, params))
}

/// GNZ residuals for WR samples; colour proposals are uniform on `1..=q`
/// and the boundary of `params` carries colour 1, as in the WR sampler.
pub fn gnz_residual_wr<T: Scalar, R: Rng + ?Sized>(
    samples: &[ColoredConfiguration<T>],
    params: &ModelParams<T>,
    functions: &[TestFunction<ColoredPoint<T>>],
    proposals: usize,
    rng: &mut R,
) -> Result<Vec<TestReport>> {
    params.validate()?;
    let q = params.colours()?;
    if proposals == 0 {
        return Err(invalid("need at least one proposal per sample"));
    }
    let cell = crate::samplers::cell_size_hint(&params.radius_law, &params.window);
    let zv = params.z * params.window.volume();
    let boundary = params.boundary.points();
    let mut lhs = vec![Vec::with_capacity(samples.len()); functions.len()];
    let mut rhs = lhs.clone();
    for s in samples {
        let plain = s.uncolored();
        let mut dc = DynamicClusters::from_configuration(&plain, boundary, cell);
        let mut l = vec![0.0; functions.len()];
        for i in 0..s.len() {
            let k = dc.plan_removal(i).k;
            let args = GnzArgs { x: &s.points[i], k, others: &s.points, excluded: Some(i) };
            for (acc, f) in l.iter_mut().zip(functions) {
                *acc += f.eval(&args)?;
            }
        }
        let mut r = vec![0.0; functions.len()];
        for _ in 0..proposals {
            let point = uniform_marked_point(&params.window, &params.radius_law, rng);
            let color = 1 + rng.random_range(0..q);
            let y = ColoredPoint { point, color };
            let clash = s.points.iter().any(|p| p.color != color && overlaps(&s.window, &p.point, &y.point))
                || (color != 1 && boundary.iter().any(|b| overlaps(&s.window, b, &y.point)));
            if clash {
                continue;
            }
            let k = dc.touching_components(&y.point);
            let args = GnzArgs { x: &y, k, others: &s.points, excluded: None };
            for (acc, f) in r.iter_mut().zip(functions) {
                *acc += f.eval(&args)?;
            }
        }
        for j in 0..functions.len() {
            lhs[j].push(l[j]);
            rhs[j].push(r[j] * zv / proposals as f64);
        }
    }
    Ok(reports("gnz-wr", functions.iter().map(|f| f.name.clone()), lhs, rhs, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::radius::RadiusLaw;
    use crate::rng::SeedStream;
    use crate::samplers::{sample_poisson, sample_wr, ChainOptions, ExactSampler};

    fn params(z: f64, q: f64, side: f64) -> ModelParams<f64> {
        ModelParams::new(z, q, RadiusLaw::dirac(0.5).unwrap(), Window::cube(2, side).unwrap()).unwrap()
    }

    #[test]
    fn poisson_mecke() {
        let p = params(1.0, 1.0, 3.0);
        let mut rng = SeedStream::new(1).stream(0);
        let samples: Vec<_> = (0..5000).map(|_| sample_poisson(&p, &mut rng)).collect();
        let reps = gnz_residual_crcm(&samples, &p, &standard_test_functions(&p), 20, &mut rng).unwrap();
        for r in &reps {
            assert!(r.passed(), "{r:?}");
        }
        assert!((reps[0].rhs - 9.0).abs() < 1e-9);
    }

    #[test]
    fn tiny_intensity() {
        let p = params(1e-3 / 9.0, 2.0, 3.0);
        let mut rng = SeedStream::new(2).stream(0);
        let samples: Vec<_> = (0..100_000).map(|_| sample_poisson(&p, &mut rng)).collect();
        let reps = gnz_residual_crcm(&samples, &p, &[TestFunction::constant()], 1, &mut rng).unwrap();
        assert!(reps[0].lhs < 2e-3 && reps[0].rhs < 2e-3, "{:?}", reps[0]);
    }

    #[test]
    fn exact_samples_satisfy_crcm_gnz() {
        let p = params(1.0, 2.0, 3.0);
        let mut rng = SeedStream::new(3).stream(0);
        let sampler = ExactSampler::new(&p, &mut rng).unwrap();
        let samples: Vec<_> = (0..3000).map(|_| sampler.sample(&mut rng).unwrap()).collect();
        for r in gnz_residual_crcm(&samples, &p, &standard_test_functions(&p), 20, &mut rng).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn wr_colour_symmetry_and_identity() {
        let p = params(1.0, 2.0, 2.0);
        let run = sample_wr(&p, &ChainOptions::new(600_000, 5000, 100), SeedStream::new(4).stream(0)).unwrap();
        let mut rng = SeedStream::new(4).stream(1);
        let fns = vec![TestFunction::constant(), TestFunction::color_is(1), TestFunction::isolated()];
        let reps = gnz_residual_wr(&run.samples, &p, &fns, 20, &mut rng).unwrap();
        for r in &reps {
            assert!(r.passed(), "{r:?}");
        }
        assert!((reps[1].lhs - 0.5 * reps[0].lhs).abs() < 3.0 * reps[0].details["lhs_stderr"] + 0.05);
    }

    #[test]
    fn unbounded_function_is_rejected() {
        let p = params(1.0, 1.0, 2.0);
        let mut rng = SeedStream::new(5).stream(0);
        let samples: Vec<_> = (0..10).map(|_| sample_poisson(&p, &mut rng)).collect();
        let bad = TestFunction::new("inf", |_| f64::INFINITY);
        assert!(gnz_residual_crcm(&samples, &p, &[bad], 1, &mut rng).is_err());
    }
}
