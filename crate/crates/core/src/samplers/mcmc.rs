//! Birth–death Metropolis–Hastings chain for the CRCM.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poisson::uniform_marked_point;
use crate::connectivity::DynamicClusters;
use crate::error::{invalid, Result};
use crate::geometry::{BoundaryCondition, Configuration, Window};
use crate::params::ModelParams;
use crate::radius::RadiusLaw;
use crate::rng::ChainRng;
use crate::scalar::Scalar;
use crate::spatial::default_cell_size;

/// Move counters of one chain.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    pub births_proposed: u64,
    pub births_accepted: u64,
    pub deaths_proposed: u64,
    pub deaths_accepted: u64,
    /// Deaths proposed on an empty interior; counted as rejected.
    pub deaths_on_empty: u64,
    pub audits: u64,
    pub audit_failures: u64,
}

impl MoveStats {
    pub fn birth_rate(&self) -> f64 {
        ratio(self.births_accepted, self.births_proposed)
    }

    pub fn death_rate(&self) -> f64 {
        ratio(self.deaths_accepted, self.deaths_proposed)
    }

    pub fn merge(&mut self, other: &MoveStats) {
        self.births_proposed += other.births_proposed;
        self.births_accepted += other.births_accepted;
        self.deaths_proposed += other.deaths_proposed;
        self.deaths_accepted += other.deaths_accepted;
        self.deaths_on_empty += other.deaths_on_empty;
        self.audits += other.audits;
        self.audit_failures += other.audit_failures;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// `min(1, z|Λ| q^{1-k} / (n+1))`.
pub fn birth_acceptance(z: f64, volume: f64, q: f64, n: usize, k: usize) -> f64 {
    (z * volume * q.powi(1 - k as i32) / (n + 1) as f64).min(1.0)
}

/// `min(1, n q^{k-1} / (z|Λ|))`, with `k = k(X, ω - δ_X)`.
pub fn death_acceptance(z: f64, volume: f64, q: f64, n: usize, k: usize) -> f64 {
    (n as f64 * q.powi(k as i32 - 1) / (z * volume)).min(1.0)
}

/// `ln(z^{#ω} q^{N_cc^Λ} / #ω!)`, the log of the unnormalised target.
pub fn log_target_density<T: Scalar>(config: &Configuration<T>, boundary: &BoundaryCondition<T>, params: &ModelParams<T>) -> f64 {
    let n = config.len();
    let local = {
        let all = crate::connectivity::count_components(config, boundary).component_count() as i64;
        let out = crate::connectivity::component_count_of(config.window(), boundary.points()) as i64;
        all - out
    };
    let ln_fact: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
    n as f64 * params.z.ln() + local as f64 * params.q.ln() - ln_fact
}

/// Grid cell size suited to a radius law; unbounded laws use a high quantile
/// and rely on the grid overflow list for the rare larger balls.
pub fn cell_size_hint<T: Scalar>(law: &RadiusLaw, window: &Window<T>) -> T {
    let r = if law.is_bounded() { law.max_radius() } else { law.inverse_cdf(0.999) };
    default_cell_size(T::of(r), window)
}

/// Default number of burn-in steps: `20 ⌈z|Λ|⌉`, about `10 z|Λ|` expected
/// births. No claim of sufficient mixing is made.
pub fn default_burn_in<T: Scalar>(params: &ModelParams<T>) -> u64 {
    20 * params.mean_count().ceil().max(1.0) as u64
}

/// State of one chain: current interior, fixed boundary, incremental
/// component structure, counters and the chain's own random stream.
#[derive(Clone, Debug)]
pub struct ChainState<T: Scalar> {
    clusters: DynamicClusters<T>,
    rng: ChainRng,
    step: u64,
    stats: MoveStats,
    audit_every: u64,
}

impl<T: Scalar> ChainState<T> {
    /// Empty interior with the boundary of `params`.
    pub fn new(params: &ModelParams<T>, rng: ChainRng) -> Result<Self> {
        Self::with_initial(params, &Configuration::empty(params.window.clone()), rng)
    }

    pub fn with_initial(params: &ModelParams<T>, initial: &Configuration<T>, rng: ChainRng) -> Result<Self> {
        params.validate()?;
        if initial.window() != &params.window {
            return Err(invalid("initial configuration lives on a different window"));
        }
        let cell = cell_size_hint(&params.radius_law, &params.window);
        let boundary = if params.radius_law.is_bounded() {
            params.boundary.pruned(&params.window, T::of(params.radius_law.max_radius()))
        } else {
            params.boundary.clone()
        };
        Ok(Self {
            clusters: DynamicClusters::from_configuration(initial, boundary.points(), cell),
            rng,
            step: 0,
            stats: MoveStats::default(),
            audit_every: 10_000,
        })
    }

    /// Steps between full-recompute audits; 0 disables them.
    pub fn set_audit_interval(&mut self, every: u64) {
        self.audit_every = every;
    }

    pub fn clusters(&self) -> &DynamicClusters<T> {
        &self.clusters
    }

    pub fn configuration(&self) -> Configuration<T> {
        self.clusters.to_configuration()
    }

    pub fn len(&self) -> usize {
        self.clusters.interior_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn local_component_count(&self) -> i64 {
        self.clusters.local_component_count()
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn stats(&self) -> &MoveStats {
        &self.stats
    }

    pub fn rng_mut(&mut self) -> &mut ChainRng {
        &mut self.rng
    }

    /// One birth-or-death move.
    pub fn step(&mut self, params: &ModelParams<T>) {
        debug_assert!(params.window == *self.clusters.window());
        let volume = params.window.volume();
        let n = self.clusters.interior_len();
        if self.rng.random_bool(0.5) {
            self.stats.births_proposed += 1;
            let x = uniform_marked_point(&params.window, &params.radius_law, &mut self.rng);
            let k = self.clusters.touching_components(&x);
            let a = birth_acceptance(params.z, volume, params.q, n, k);
            if self.rng.random::<f64>() < a {
                self.clusters.insert(x);
                self.stats.births_accepted += 1;
            }
        } else {
            self.stats.deaths_proposed += 1;
            if n == 0 {
                self.stats.deaths_on_empty += 1;
            } else {
                let i = self.rng.random_range(0..n);
                let plan = self.clusters.plan_removal(i);
                let a = death_acceptance(params.z, volume, params.q, n, plan.k);
                if self.rng.random::<f64>() < a {
                    self.clusters.apply_removal(plan);
                    self.stats.deaths_accepted += 1;
                }
            }
        }
        self.step += 1;
        if self.audit_every > 0 && self.step % self.audit_every == 0 {
            self.stats.audits += 1;
            if !self.clusters.audit() {
                self.stats.audit_failures += 1;
            }
        }
    }
}

pub fn mcmc_step<T: Scalar>(state: &mut ChainState<T>, params: &ModelParams<T>) {
    state.step(params);
}

/// Run-length controls for [`run_chain_with`].
#[derive(Clone, Debug)]
pub struct ChainOptions<T: Scalar> {
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub initial: Option<Configuration<T>>,
}

impl<T: Scalar> ChainOptions<T> {
    pub fn new(steps: u64, burn_in: u64, thin: u64) -> Self {
        Self { steps, burn_in, thin, initial: None }
    }

    pub fn with_initial(mut self, initial: Configuration<T>) -> Self {
        self.initial = Some(initial);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(invalid("thin must be at least 1"));
        }
        if self.burn_in > self.steps {
            return Err(invalid(format!("burn-in {} exceeds the {} steps", self.burn_in, self.steps)));
        }
        Ok(())
    }
}

/// Runs a chain and hands the state to `observe` after every recorded step,
/// i.e. steps `t > burn_in` with `(t - burn_in) % thin == 0`.
pub fn run_chain_with<T: Scalar>(
    params: &ModelParams<T>,
    options: &ChainOptions<T>,
    rng: ChainRng,
    mut observe: impl FnMut(&mut ChainState<T>),
) -> Result<MoveStats> {
    options.validate()?;
    let mut state = match &options.initial {
        Some(c) => ChainState::with_initial(params, c, rng)?,
        None => ChainState::new(params, rng)?,
    };
    for t in 1..=options.steps {
        state.step(params);
        if t > options.burn_in && (t - options.burn_in) % options.thin == 0 {
            observe(&mut state);
        }
    }
    Ok(state.stats)
}

#[derive(Clone, Debug)]
pub struct ChainRun<T: Scalar> {
    pub samples: Vec<Configuration<T>>,
    pub stats: MoveStats,
}

/// Thinned post-burn-in configurations of one chain started empty.
pub fn run_chain<T: Scalar>(params: &ModelParams<T>, steps: u64, burn_in: u64, thin: u64, rng: ChainRng) -> Result<ChainRun<T>> {
    let mut samples = Vec::new();
    let stats = run_chain_with(params, &ChainOptions::new(steps, burn_in, thin), rng, |s| samples.push(s.configuration()))?;
    Ok(ChainRun { samples, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::ClusterIndex;
    use crate::geometry::{Coords, MarkedPoint};
    use crate::rng::SeedStream;

    fn params(z: f64, q: f64, side: f64) -> ModelParams<f64> {
        ModelParams::new(z, q, RadiusLaw::dirac(0.5).unwrap(), Window::cube(2, side).unwrap()).unwrap()
    }

    #[test]
    fn run_length_contract() {
        let p = params(1.0, 2.0, 2.0);
        let seeds = SeedStream::new(7);
        assert!(run_chain(&p, 100, 100, 1, seeds.stream(0)).unwrap().samples.is_empty());
        assert_eq!(run_chain(&p, 100, 0, 1, seeds.stream(0)).unwrap().samples.len(), 100);
        assert_eq!(run_chain(&p, 100, 10, 7, seeds.stream(0)).unwrap().samples.len(), 12);
        assert!(run_chain(&p, 10, 11, 1, seeds.stream(0)).is_err());
        assert!(run_chain(&p, 10, 0, 0, seeds.stream(0)).is_err());
        let a = run_chain(&p, 2000, 100, 10, seeds.stream(3)).unwrap();
        let b = run_chain(&p, 2000, 100, 10, seeds.stream(3)).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn empty_window_birth() {
        assert!((birth_acceptance(0.1, 2.0, 3.0, 0, 0) - 0.6).abs() < 1e-12);
        assert_eq!(birth_acceptance(1.0, 4.0, 2.0, 0, 0), 1.0);
    }

    #[test]
    fn q_one_stationary_count_is_poisson() {
        let p = params(1.0, 1.0, 2.0);
        let mut sum = 0.0;
        let mut sq = 0.0;
        let mut m = 0.0;
        run_chain_with(&p, &ChainOptions::new(400_000, 1000, 100), SeedStream::new(8).stream(0), |s| {
            let n = s.len() as f64;
            sum += n;
            sq += n * n;
            m += 1.0;
        })
        .unwrap();
        let mean = sum / m;
        let var = sq / m - mean * mean;
        // thinning by 100 steps leaves nearly independent draws
        assert!((mean - 4.0).abs() < 3.0 * (4.0 / m).sqrt() * 1.5, "mean {mean}");
        assert!((var - 4.0).abs() < 1.0, "var {var}");
    }

    #[test]
    fn detailed_balance_audit() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for audit in 0..10_000 {
            let z = rng.random_range(0.1..3.0);
            let q = [0.5, 2.0, 3.0][audit % 3];
            let side = rng.random_range(1.0..4.0);
            let p = ModelParams::new(z, q, RadiusLaw::uniform(0.1, 0.8).unwrap(), Window::cube(2, side).unwrap()).unwrap();
            let n = rng.random_range(0..8);
            let pts: Vec<_> = (0..n).map(|_| uniform_marked_point(&p.window, &p.radius_law, &mut rng)).collect();
            let omega = Configuration::new(p.window.clone(), pts).unwrap();
            let x = uniform_marked_point(&p.window, &p.radius_law, &mut rng);
            let mut bigger = omega.clone();
            bigger.push(x.clone()).unwrap();
            let k_birth = ClusterIndex::build(&p.window, omega.points(), &[]).components_touching(&x);
            let mut dc = DynamicClusters::from_configuration(&bigger, &[], 1.6);
            let k_death = dc.plan_removal(n).k;
            assert_eq!(k_birth, k_death);
            let ab = birth_acceptance(z, p.window.volume(), q, n, k_birth);
            let ad = death_acceptance(z, p.window.volume(), q, n + 1, k_death);
            let lhs = (ab / ad).ln();
            let rhs = log_target_density(&bigger, &BoundaryCondition::Empty, &p) - log_target_density(&omega, &BoundaryCondition::Empty, &p)
                + p.window.volume().ln();
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    /// On `[0,1]²` with radius 0.5 two balls overlap iff their germs are at
    /// distance at most 1, so the stratum weights are explicit:
    /// `w1/w0 = z|Λ|q` and `w2/w0 = (z²/2)(q·A + q²(1-A))` with
    /// `A = P(|U - V| <= 1)` for independent uniform points of the square.
    /// Occupation frequencies conditional on `n <= 2` are compared with
    /// `w_j / (w0 + w1 + w2)`, which is exact whatever the higher strata.
    #[test]
    fn two_point_state_space() {
        let (z, q) = (1.0, 2.0);
        let p = params(z, q, 1.0);
        let density = |r: f64| 2.0 * r * (std::f64::consts::PI - 4.0 * r + r * r);
        let m = 200_000;
        let a: f64 = (0..m).map(|i| density((i as f64 + 0.5) / m as f64) / m as f64).sum();
        assert!((a - (std::f64::consts::PI - 13.0 / 6.0)).abs() < 1e-8);
        let w = [1.0, z * q, 0.5 * z * z * (q * a + q * q * (1.0 - a))];
        let total: f64 = w.iter().sum();
        let batch_len = 20_000u64;
        let mut batches: Vec<[f64; 3]> = Vec::new();
        let mut batch = [0.0; 3];
        run_chain_with(&p, &ChainOptions::new(1_000_000, 0, 1), SeedStream::new(10).stream(0), |s| {
            if s.len() <= 2 {
                batch[s.len()] += 1.0;
            }
            if s.steps_taken() % batch_len == 0 {
                batches.push(batch);
                batch = [0.0; 3];
            }
        })
        .unwrap();
        let pooled: [f64; 3] = std::array::from_fn(|j| batches.iter().map(|b| b[j]).sum());
        let denom: f64 = pooled.iter().sum();
        for j in 0..3 {
            let expected = w[j] / total;
            let est = pooled[j] / denom;
            // batch-means standard error of the ratio estimator
            let resid: Vec<f64> = batches.iter().map(|b| b[j] - est * b.iter().sum::<f64>()).collect();
            let nb = batches.len() as f64;
            let mean_den = denom / nb;
            let var = resid.iter().map(|r| r * r).sum::<f64>() / (nb - 1.0);
            let se = (var / nb).sqrt() / mean_den;
            assert!((est - expected).abs() <= 3.0 * se, "stratum {j}: {est} vs {expected} (se {se})");
        }
    }

    #[test]
    fn boundary_is_respected() {
        let p = params(1.0, 0.5, 2.0)
            .with_boundary(BoundaryCondition::Fixed(vec![MarkedPoint::new(Coords::from_slice(&[-0.2, 1.0]), 0.5).unwrap()]))
            .unwrap();
        let run = run_chain(&p, 20_000, 1000, 50, SeedStream::new(11).stream(0)).unwrap();
        assert_eq!(run.stats.audit_failures, 0);
        assert_eq!(run.stats.audits, 2);
        for c in &run.samples {
            assert!(c.points().iter().all(|x| p.window.contains(&x.position)));
        }
    }
}
