//! Finite-size crossing curves and the `z_half` summary.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{isotonic, wilson_interval};
use crate::connectivity::{count_components, percolation_report};
use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::params::ModelParams;
use crate::rng::SeedStream;
use crate::samplers::{default_burn_in, run_chain_with, sample_poisson, ChainOptions, ExactSampler};
use crate::scalar::Scalar;

/// Normal quantile for the 95% Wilson interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// How replicas are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveSampler {
    /// `π^{z,Q}`; `q` is ignored.
    Poisson,
    /// Exact rejection sampler.
    Exact,
    /// Final state of an independent chain per replica; `steps = None` means
    /// twice the default burn-in.
    Mcmc { steps: Option<u64> },
}

/// One row of a crossing curve. Crossing is along the first axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub z: f64,
    pub q: f64,
    pub radius_law: String,
    #[serde(rename = "L")]
    pub l: f64,
    pub replicas: usize,
    pub crossing_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub largest_fraction_mean: f64,
}

impl CurveRow {
    pub fn crossings(&self) -> u64 {
        (self.crossing_prob * self.replicas as f64).round() as u64
    }
}

fn replica<T: Scalar>(params: &ModelParams<T>, sampler: CurveSampler, exact: Option<&ExactSampler<T>>, seeds: &SeedStream, r: u64) -> Result<Configuration<T>> {
    let mut rng = seeds.stream(r);
    match sampler {
        CurveSampler::Poisson => Ok(sample_poisson(params, &mut rng)),
        CurveSampler::Exact => exact.expect("exact sampler prepared").sample(&mut rng),
        CurveSampler::Mcmc { steps } => {
            let steps = steps.unwrap_or_else(|| 2 * default_burn_in(params));
            let mut last = None;
            run_chain_with(params, &ChainOptions::new(steps, steps.saturating_sub(1), 1), rng, |s| last = Some(s.configuration()))?;
            Ok(last.unwrap_or_else(|| Configuration::empty(params.window.clone())))
        }
    }
}

/// Crossing probability and mean largest-cluster fraction for each entry of
/// `grid`, with `replicas` independent samples each. Replicas run in
/// parallel on streams of `seeds.child(row)`, so the table does not depend
/// on the thread count.
pub fn percolation_curve<T: Scalar>(
    grid: &[ModelParams<T>],
    replicas: usize,
    sampler: CurveSampler,
    seeds: &SeedStream,
) -> Result<Vec<CurveRow>> {
    if replicas == 0 {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (g, params) in grid.iter().enumerate() {
        params.validate()?;
        let row_seeds = seeds.child(g as u64);
        let exact = match sampler {
            CurveSampler::Exact => Some(ExactSampler::new(params, &mut row_seeds.stream(u64::MAX))?),
            _ => None,
        };
        let outcomes = (0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                let c = replica(params, sampler, exact.as_ref(), &row_seeds, r)?;
                let index = count_components(&c, &params.boundary);
                let rep = percolation_report(&index, &params.window);
                Ok((rep.crosses[0], rep.largest_fraction))
            })
            .collect::<Result<Vec<_>>>()?;
        let crossings = outcomes.iter().filter(|o| o.0).count() as u64;
        let (ci_low, ci_high) = wilson_interval(crossings, replicas as u64, Z95);
        rows.push(CurveRow {
            z: params.z,
            q: params.q,
            radius_law: params.radius_law.label(),
            l: params.window.side(0).f64(),
            replicas,
            crossing_prob: crossings as f64 / replicas as f64,
            ci_low,
            ci_high,
            largest_fraction_mean: outcomes.iter().map(|o| o.1).sum::<f64>() / replicas as f64,
        });
    }
    Ok(rows)
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["z", "q", "radius_law", "L", "replicas", "crossing_prob", "ci_low", "ci_high", "largest_fraction_mean"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub z_half: f64,
    /// Bootstrap standard deviation of `z_half`.
    pub uncertainty: f64,
    /// Bootstrap resamples that bracketed 0.5.
    pub resamples: usize,
}

/// `z` where the isotonic fit of the crossing curve, linearly
/// interpolated, reaches 0.5.
fn z_half(zs: &[f64], probs: &[f64], weights: &[f64]) -> Result<f64> {
    let fit = isotonic(probs, weights);
    let i = fit.iter().position(|&p| p >= 0.5).ok_or(Error::Unbracketed)?;
    if fit[i] == 0.5 {
        // middle of a flat stretch at exactly one half
        let j = i + fit[i..].iter().take_while(|&&p| p == 0.5).count() - 1;
        return Ok(0.5 * (zs[i] + zs[j]));
    }
    if i == 0 {
        return Err(Error::Unbracketed);
    }
    let t = (0.5 - fit[i - 1]) / (fit[i] - fit[i - 1]);
    Ok(zs[i - 1] + t * (zs[i] - zs[i - 1]))
}

/// [`threshold_estimate_with`] using 200 resamples and a fixed seed.
pub fn threshold_estimate(curve: &[CurveRow]) -> Result<ThresholdEstimate> {
    threshold_estimate_with(curve, 200, 0)
}

/// `z_half` with a parametric bootstrap over replicas: each row's crossing
/// count is redrawn as `Binomial(replicas, p̂)`.
pub fn threshold_estimate_with(curve: &[CurveRow], resamples: usize, seed: u64) -> Result<ThresholdEstimate> {
    let mut rows: Vec<&CurveRow> = curve.iter().filter(|r| r.replicas > 0).collect();
    rows.sort_by(|a, b| a.z.total_cmp(&b.z));
    let zs: Vec<f64> = rows.iter().map(|r| r.z).collect();
    let ps: Vec<f64> = rows.iter().map(|r| r.crossing_prob).collect();
    let ws: Vec<f64> = rows.iter().map(|r| r.replicas as f64).collect();
    let est = z_half(&zs, &ps, &ws)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let bp: Vec<f64> = rows
            .iter()
            .map(|r| {
                let b = Binomial::new(r.replicas as u64, r.crossing_prob.clamp(0.0, 1.0)).expect("valid binomial");
                b.sample(&mut rng) as f64 / r.replicas as f64
            })
            .collect();
        if let Ok(z) = z_half(&zs, &bp, &ws) {
            boot.push(z);
        }
    }
    let uncertainty = if boot.len() < 2 {
        f64::NAN
    } else {
        let m = boot.iter().sum::<f64>() / boot.len() as f64;
        (boot.iter().map(|z| (z - m).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt()
    };
    Ok(ThresholdEstimate { z_half: est, uncertainty, resamples: boot.len() })
}

/// Convenience grid: `base` with each intensity of `zs`.
pub fn z_grid<T: Scalar>(base: &ModelParams<T>, zs: &[f64]) -> Result<Vec<ModelParams<T>>> {
    zs.iter().map(|&z| base.with_z(z)).collect()
}
