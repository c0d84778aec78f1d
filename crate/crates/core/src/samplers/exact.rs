//! Rejection sampling from the finite-volume CRCM.
//!
//! For `q >= 1` the proposal is `π^{qz,Q}` and the acceptance weight is
//! `q^{N_cc^Λ - #ω}`. Since `N_cc^Λ - #ω = -Σ k_i` when points are added one
//! by one, the weight only decreases along the way and a proposal is dropped
//! as soon as it falls below the uniform drawn up front. For `q < 1` the
//! proposal is `π^{z,Q}` and the weight is `q^{N_cc^Λ - m}`, where
//! `m = min(0, 1 - B)` is the smallest value `N_cc^Λ` can take next to `B`
//! boundary components.

use rand::Rng;

use super::poisson::{poisson_count, uniform_marked_point};
use crate::connectivity::DisjointSet;
use crate::error::{Error, Result};
use crate::geometry::{overlaps, Configuration, MarkedPoint};
use crate::params::ModelParams;
use crate::scalar::Scalar;

const PILOT_PROPOSALS: usize = 4000;
const MIN_ACCEPTANCE: f64 = 1e-6;

/// Reusable exact sampler. Construction runs a pilot that estimates the mean
/// acceptance probability and refuses windows where it is below `1e-6`.
#[derive(Clone, Debug)]
pub struct ExactSampler<T: Scalar> {
    params: ModelParams<T>,
    boundary: Vec<MarkedPoint<T>>,
    boundary_dsu: DisjointSet,
    boundary_components: usize,
    proposal_z: f64,
    acceptance: f64,
    max_proposals: u64,
}

struct Proposal<T: Scalar> {
    points: Vec<MarkedPoint<T>>,
    weight: f64,
}

impl<T: Scalar> ExactSampler<T> {
    pub fn new<R: Rng + ?Sized>(params: &ModelParams<T>, rng: &mut R) -> Result<Self> {
        params.validate()?;
        let reach = if params.radius_law.is_bounded() { T::of(params.radius_law.max_radius()) } else { T::infinity() };
        let boundary = if reach.is_finite() {
            params.boundary.pruned(&params.window, reach).points().to_vec()
        } else {
            params.boundary.points().to_vec()
        };
        let mut boundary_dsu = DisjointSet::new(boundary.len());
        let mut boundary_components = boundary.len();
        for i in 0..boundary.len() {
            for j in 0..i {
                if overlaps(&params.window, &boundary[i], &boundary[j])
                    && boundary_dsu.find(i as u32) != boundary_dsu.find(j as u32)
                {
                    boundary_dsu.union(i as u32, j as u32);
                    boundary_components -= 1;
                }
            }
        }
        let proposal_z = if params.q >= 1.0 { params.q * params.z } else { params.z };
        let mut s = Self {
            params: params.clone(),
            boundary,
            boundary_dsu,
            boundary_components,
            proposal_z,
            acceptance: 1.0,
            max_proposals: 0,
        };
        if params.q != 1.0 {
            let total: f64 = (0..PILOT_PROPOSALS).map(|_| s.propose(rng, 0.0).weight).sum();
            s.acceptance = total / PILOT_PROPOSALS as f64;
        }
        if !(s.acceptance >= MIN_ACCEPTANCE) {
            return Err(Error::WindowTooLarge(format!(
                "estimated acceptance {:.3e} is below {MIN_ACCEPTANCE:e}",
                s.acceptance
            )));
        }
        s.max_proposals = ((1000.0 / s.acceptance).ceil() as u64).max(100_000);
        Ok(s)
    }

    /// Caps the number of proposals spent on one draw.
    pub fn with_max_proposals(mut self, cap: u64) -> Self {
        self.max_proposals = cap.max(1);
        self
    }

    /// Pilot estimate of the mean acceptance probability.
    pub fn acceptance_estimate(&self) -> f64 {
        self.acceptance
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    /// Builds a proposal and its acceptance weight. With `q >= 1` generation
    /// stops early once the weight drops to `floor` or below.
    fn propose<R: Rng + ?Sized>(&self, rng: &mut R, floor: f64) -> Proposal<T> {
        let p = &self.params;
        let n = poisson_count(self.proposal_z * p.window.volume(), rng);
        let b = self.boundary.len();
        let mut dsu = self.boundary_dsu.clone();
        let mut all: Vec<MarkedPoint<T>> = Vec::with_capacity(b + n);
        all.extend(self.boundary.iter().cloned());
        let mut roots: Vec<u32> = Vec::new();
        let mut local: i64 = 0;
        let mut weight = 1.0;
        for _ in 0..n {
            let x = uniform_marked_point(&p.window, &p.radius_law, rng);
            roots.clear();
            for (j, y) in all.iter().enumerate() {
                if overlaps(&p.window, &x, y) {
                    let r = dsu.find(j as u32);
                    if !roots.contains(&r) {
                        roots.push(r);
                    }
                }
            }
            let id = dsu.make();
            for &r in &roots {
                dsu.union(id, r);
            }
            all.push(x);
            local += 1 - roots.len() as i64;
            if p.q > 1.0 {
                weight *= p.q.powi(-(roots.len() as i32));
                if weight <= floor {
                    return Proposal { points: Vec::new(), weight: 0.0 };
                }
            }
        }
        if p.q < 1.0 {
            let m = 0.min(1 - self.boundary_components as i64);
            weight = p.q.powi((local - m) as i32);
        }
        Proposal { points: all.split_off(b), weight }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Configuration<T>> {
        for _ in 0..self.max_proposals {
            let u: f64 = rng.random();
            let prop = self.propose(rng, u);
            if u < prop.weight {
                return Ok(Configuration::from_parts_unchecked(self.params.window.clone(), prop.points));
            }
        }
        Err(Error::WindowTooLarge(format!("no proposal accepted within {} attempts", self.max_proposals)))
    }
}

/// One exact draw. Builds a fresh [`ExactSampler`], so bulk sampling should
/// reuse one sampler instead.
pub fn sample_crcm_exact<T: Scalar, R: Rng + ?Sized>(params: &ModelParams<T>, rng: &mut R) -> Result<Configuration<T>> {
    ExactSampler::new(params, rng)?.sample(rng)
}
