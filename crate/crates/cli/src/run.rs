//! Experiment execution and artifact layout.
//!
//! An output directory holds `manifest.json`, sample streams
//! (`samples.ndjson`, or `samples/zNN.ndjson` for a sweep), `curve.csv` for
//! sweeps and one `reports/<name>.json` per analysis. Every random step
//! draws from a fixed stream of the master seed, so identical configs give
//! identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crcm::analysis::{
    count_statistic, crossing_statistic, domination_test, estimate_partition_function, event_frequencies,
    gnz_residual_crcm, gnz_residual_wr, percolation_curve, threshold_estimate_with, vacant_cluster_count_bound,
    write_curve_csv, Comparison, CurveRow, CurveSampler, Summary, TestFunction, TestReport, Z95,
};
use crcm::analysis::stats::wilson_interval;
use crcm::connectivity::{count_components, percolation_report};
use crcm::io::{SampleWriter, StreamHeader};
use crcm::samplers::{default_burn_in, run_chain, sample_poisson, sample_wr, ChainOptions, ColoredConfiguration, ExactSampler};
use crcm::{Configuration, ModelParams, SeedStream, Window};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::config::{AnalysisSpec, ExperimentConfig, GnzFunction, Model, StatisticKind};
use crate::error::CliError;
use crate::validate::validate_config;

type P = ModelParams<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Sample,
    Analyze,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha1: String,
}

/// What a run wrote, echoed into `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub config_sha1: String,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputFile>,
}

/// One file per analysis; a sweep has one entry per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub analysis: AnalysisSpec,
    pub entries: Vec<ReportEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub z: f64,
    pub reports: Vec<TestReport>,
}

impl ReportFile {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().flat_map(|e| &e.reports).all(TestReport::passed)
    }
}

/// Git blob hash: SHA-1 of `"blob {len}\0" + content`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Sample output of one parameter point.
pub enum Samples {
    Plain(Vec<Configuration<f64>>),
    Colored(Vec<ColoredConfiguration<f64>>),
}

impl Samples {
    fn plain(&self) -> Vec<Configuration<f64>> {
        match self {
            Samples::Plain(v) => v.clone(),
            Samples::Colored(v) => v.iter().map(ColoredConfiguration::uncolored).collect(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Samples::Plain(v) => v.len(),
            Samples::Colored(v) => v.len(),
        }
    }
}

fn chain_options(config: &ExperimentConfig, params: &P) -> ChainOptions<f64> {
    let s = &config.sampler;
    ChainOptions::new(s.steps, s.burn_in.unwrap_or_else(|| default_burn_in(params)).min(s.steps), s.thin)
}

/// Draws `config.replicas` replicas for `params` on streams of `seeds`.
/// Replicas run on the worker pool and are merged in replica order.
pub fn generate(config: &ExperimentConfig, params: &P, seeds: &SeedStream) -> Result<Samples, CliError> {
    let n = config.replicas as u64;
    let out = match config.model {
        Model::Poisson => Samples::Plain((0..n).into_par_iter().map(|r| sample_poisson(params, &mut seeds.stream(r))).collect()),
        Model::CrcmExact => {
            if n == 0 {
                return Ok(Samples::Plain(Vec::new()));
            }
            let sampler = ExactSampler::new(params, &mut seeds.stream(u64::MAX))?;
            let v = (0..n).into_par_iter().map(|r| sampler.sample(&mut seeds.stream(r))).collect::<crcm::Result<Vec<_>>>()?;
            Samples::Plain(v)
        }
        Model::Crcm => {
            let o = chain_options(config, params);
            let runs = (0..n)
                .into_par_iter()
                .map(|r| run_chain(params, o.steps, o.burn_in, o.thin, seeds.stream(r)))
                .collect::<crcm::Result<Vec<_>>>()?;
            if let Some(fail) = runs.iter().map(|r| r.stats.audit_failures).find(|&f| f > 0) {
                return Err(CliError::Other(format!("component-count audit failed {fail} times")));
            }
            Samples::Plain(runs.into_iter().flat_map(|r| r.samples).collect())
        }
        Model::Wr => {
            let o = chain_options(config, params);
            let runs = (0..n)
                .into_par_iter()
                .map(|r| sample_wr(params, &o, seeds.stream(r)))
                .collect::<crcm::Result<Vec<_>>>()?;
            Samples::Colored(runs.into_iter().flat_map(|r| r.samples).collect())
        }
    };
    Ok(out)
}

fn write_samples(path: &Path, config: &ExperimentConfig, params: &P, samples: &Samples) -> Result<(), CliError> {
    let header = StreamHeader { model: config.model.name().to_string(), params: params.clone(), seed: config.seed };
    let mut w = SampleWriter::new(BufWriter::new(fs::File::create(path)?), &header)?;
    match samples {
        Samples::Plain(v) => v.iter().try_for_each(|c| w.write(c))?,
        Samples::Colored(v) => v.iter().try_for_each(|c| w.write_colored(c))?,
    }
    w.finish()?.flush()?;
    Ok(())
}

fn wilson_report(name: &str, hits: &[f64]) -> TestReport {
    let k = hits.iter().filter(|&&h| h > 0.5).count() as u64;
    let n = hits.len() as u64;
    let (lo, hi) = wilson_interval(k, n, Z95);
    let s = Summary::iid(hits);
    TestReport::new(name, s.mean, f64::NAN, s.stderr, Comparison::Describe, s.n)
        .with_detail("ci_low", lo)
        .with_detail("ci_high", hi)
}

fn centred_cube(window: &Window<f64>, side: f64) -> Result<Window<f64>, CliError> {
    let lower: Vec<f64> = (0..window.dim()).map(|a| 0.5 * (window.lower()[a] + window.upper()[a]) - 0.5 * side).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + side).collect();
    Ok(Window::new(lower, upper, window.topology())?)
}

/// One analysis on the samples of one parameter point. Threshold is not
/// handled here since it needs the whole curve.
fn analyse(
    spec: &AnalysisSpec,
    config: &ExperimentConfig,
    params: &P,
    samples: &Samples,
    seeds: &SeedStream,
) -> Result<Vec<TestReport>, CliError> {
    let mut rng = seeds.stream(0);
    if samples.len() == 0 && !matches!(spec, AnalysisSpec::PartitionFunction { .. }) {
        return Ok(Vec::new());
    }
    let reports = match spec {
        AnalysisSpec::Gnz { function, proposals } => match samples {
            Samples::Plain(v) => {
                let f = match function {
                    GnzFunction::One => TestFunction::constant(),
                    GnzFunction::RadiusMedian => TestFunction::radius_at_most(params.radius_law.median()),
                    GnzFunction::Isolated => TestFunction::isolated(),
                    GnzFunction::ColorOne => return Err(CliError::Config("gnz function color-one needs model wr".into())),
                };
                // Poisson samples satisfy the identity with a constant intensity
                let p = if config.model == Model::Poisson { params.with_q(1.0)? } else { params.clone() };
                gnz_residual_crcm(v, &p, &[f], *proposals, &mut rng)?
            }
            Samples::Colored(v) => {
                let f = match function {
                    GnzFunction::One => TestFunction::constant(),
                    GnzFunction::RadiusMedian => TestFunction::radius_at_most(params.radius_law.median()),
                    GnzFunction::Isolated => TestFunction::isolated(),
                    GnzFunction::ColorOne => TestFunction::color_is(1),
                };
                gnz_residual_wr(v, params, &[f], *proposals, &mut rng)?
            }
        },
        AnalysisSpec::PartitionFunction { samples: n } => {
            let (z, se) = estimate_partition_function(params, *n, &mut rng)?;
            vec![TestReport::new("partition-function", z, f64::NAN, se, Comparison::Describe, *n)]
        }
        AnalysisSpec::Domination { statistic } => {
            let stat = |c: &Configuration<f64>| match statistic {
                StatisticKind::Count => count_statistic(c),
                StatisticKind::Crossing => crossing_statistic(c, 0),
            };
            let plain = samples.plain();
            let values: Vec<f64> = plain.iter().map(stat).collect();
            let model = if config.model.is_chain() { Summary::batched(&values, 50) } else { Summary::iid(&values) };
            // WR colourings project to CRCM(z/q), dominated by Poisson(z)
            let baseline_z = match config.model {
                Model::Crcm | Model::CrcmExact => params.q * params.z,
                Model::Poisson | Model::Wr => params.z,
            };
            let base_params = params.with_z(baseline_z)?;
            let base: Vec<f64> = (0..plain.len()).map(|_| stat(&sample_poisson(&base_params, &mut rng))).collect();
            let base = Summary::iid(&base);
            let name = spec.name();
            let r = match config.model {
                Model::Crcm | Model::CrcmExact if params.q < 1.0 => domination_test(&name, base, model, 3.0),
                Model::Poisson => {
                    let mut r = domination_test(&name, model, base, 3.0);
                    r.comparison = Comparison::TwoSided;
                    r.decision = r.recompute();
                    r
                }
                _ => domination_test(&name, model, base, 3.0),
            };
            vec![r.with_detail("baseline_z", baseline_z)]
        }
        AnalysisSpec::VacantBound => {
            let spec = config.centred_unit_block()?;
            vec![vacant_cluster_count_bound(&samples.plain(), params, &spec)?]
        }
        AnalysisSpec::Events { inner_side, r_threshold, small_r, count_threshold } => {
            let inner = centred_cube(&params.window, *inner_side)?;
            event_frequencies(&samples.plain(), &inner, *r_threshold, *small_r, *count_threshold)?.reports()
        }
        AnalysisSpec::Crossing => {
            let hits: Vec<f64> = samples
                .plain()
                .iter()
                .map(|c| {
                    let index = count_components(c, &params.boundary);
                    f64::from(u8::from(percolation_report(&index, &params.window).crosses[0]))
                })
                .collect();
            vec![wilson_report("crossing", &hits)]
        }
        AnalysisSpec::Threshold { .. } => Vec::new(),
    };
    Ok(reports.into_iter().map(|r| r.with_seeds([config.seed]).with_detail("z", params.z)).collect())
}

fn threshold_report(resamples: usize, curve: &[CurveRow], seed: u64) -> Vec<TestReport> {
    if curve.is_empty() {
        return Vec::new();
    }
    let n = curve.iter().map(|r| r.replicas).sum();
    let r = match threshold_estimate_with(curve, resamples, seed) {
        Ok(t) => TestReport::new("threshold", t.z_half, f64::NAN, t.uncertainty, Comparison::Describe, n)
            .with_detail("bracketed", 1.0)
            .with_detail("resamples", t.resamples as f64),
        Err(_) => TestReport::new("threshold", f64::NAN, f64::NAN, f64::NAN, Comparison::Describe, n).with_detail("bracketed", 0.0),
    };
    vec![r.with_seeds([seed])]
}

/// File names for the configured analyses, suffixed on repeats.
fn report_names(analyses: &[AnalysisSpec]) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    analyses
        .iter()
        .map(|a| {
            let base = a.name();
            let n = seen.entry(base.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                base
            } else {
                format!("{base}-{n}")
            }
        })
        .collect()
}

fn prepare_dir(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() {
        let occupied = fs::read_dir(dir)?.next().is_some();
        if occupied && !force {
            return Err(CliError::Io(format!("{} exists and is not empty; pass --force to overwrite", dir.display())));
        }
        for f in ["manifest.json", "samples.ndjson", "curve.csv"] {
            let p = dir.join(f);
            if p.exists() {
                fs::remove_file(p)?;
            }
        }
        for d in ["reports", "samples"] {
            let p = dir.join(d);
            if p.exists() {
                fs::remove_dir_all(p)?;
            }
        }
    }
    fs::create_dir_all(dir)?;
    Ok(())
}

struct Artifacts {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn path(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        self.written.push(PathBuf::from(rel));
        Ok(p)
    }

    fn json<S: Serialize>(&mut self, rel: &str, value: &S) -> Result<(), CliError> {
        let p = self.path(rel)?;
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
        s.push('\n');
        fs::write(p, s)?;
        Ok(())
    }

    fn manifest(&self, command: Command, config: &ExperimentConfig) -> Result<Manifest, CliError> {
        let mut outputs = self
            .written
            .iter()
            .map(|rel| {
                let bytes = fs::read(self.root.join(rel))?;
                Ok(OutputFile { path: rel.to_string_lossy().replace('\\', "/"), sha1: content_hash(&bytes) })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let text = config.to_json();
        Ok(Manifest {
            tool: "crcm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            seed: config.seed,
            config_sha1: content_hash(text.as_bytes()),
            config: config.clone(),
            outputs,
        })
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub reports: Vec<(String, ReportFile)>,
}

impl RunSummary {
    pub fn failed_reports(&self) -> Vec<&str> {
        self.reports.iter().filter(|(_, r)| !r.all_passed()).map(|(n, _)| n.as_str()).collect()
    }
}

/// Runs `command` for `config`, writing into `config.output_dir`.
pub fn run_experiment(command: Command, config: &ExperimentConfig, force: bool) -> Result<RunSummary, CliError> {
    let check = validate_config(config);
    if let Some(e) = check.findings.iter().find(|f| f.level == crate::validate::Level::Error) {
        return Err(CliError::Config(e.message.clone()));
    }
    let params = config.model_params()?;
    prepare_dir(&config.output_dir, force)?;
    let mut art = Artifacts { root: config.output_dir.clone(), written: Vec::new() };
    let seeds = SeedStream::new(config.seed);
    let names = report_names(&config.analyses);
    let mut reports = Vec::new();

    match command {
        Command::Sample | Command::Analyze => {
            let samples = generate(config, &params, &seeds.child(0))?;
            let path = art.path("samples.ndjson")?;
            write_samples(&path, config, &params, &samples)?;
            if command == Command::Analyze {
                for (a, (spec, name)) in config.analyses.iter().zip(&names).enumerate() {
                    if let AnalysisSpec::Threshold { .. } = spec {
                        return Err(CliError::Config("threshold analysis runs under sweep only".into()));
                    }
                    let r = analyse(spec, config, &params, &samples, &seeds.child(1).child(a as u64))?;
                    let file = ReportFile { analysis: spec.clone(), entries: vec![ReportEntry { z: params.z, reports: r }] };
                    art.json(&format!("reports/{name}.json"), &file)?;
                    reports.push((name.clone(), file));
                }
            }
        }
        Command::Sweep => {
            let zs = if config.z_grid.is_empty() { vec![params.z] } else { config.z_grid.clone() };
            let grid = crcm::analysis::z_grid(&params, &zs)?;
            let sampler = match config.model {
                Model::Poisson => CurveSampler::Poisson,
                Model::CrcmExact => CurveSampler::Exact,
                Model::Crcm => CurveSampler::Mcmc { steps: Some(config.sampler.steps) },
                Model::Wr => return Err(CliError::Config("sweep supports models poisson, crcm and crcm-exact".into())),
            };
            let curve = percolation_curve(&grid, config.replicas, sampler, &seeds.child(2))?;
            let mut buf = Vec::new();
            write_curve_csv(&curve, &mut buf)?;
            fs::write(art.path("curve.csv")?, buf)?;

            let sample_based = config.analyses.iter().any(|a| !matches!(a, AnalysisSpec::Threshold { .. }));
            let mut files: Vec<ReportFile> =
                config.analyses.iter().map(|a| ReportFile { analysis: a.clone(), entries: Vec::new() }).collect();
            if sample_based {
                for (g, p) in grid.iter().enumerate() {
                    let samples = generate(config, p, &seeds.child(3).child(g as u64))?;
                    write_samples(&art.path(&format!("samples/z{g:02}.ndjson"))?, config, p, &samples)?;
                    for (a, spec) in config.analyses.iter().enumerate() {
                        if matches!(spec, AnalysisSpec::Threshold { .. }) {
                            continue;
                        }
                        let r = analyse(spec, config, p, &samples, &seeds.child(4).child(g as u64).child(a as u64))?;
                        files[a].entries.push(ReportEntry { z: p.z, reports: r });
                    }
                }
            }
            for (file, name) in files.iter_mut().zip(&names) {
                if let AnalysisSpec::Threshold { resamples } = file.analysis {
                    let r = threshold_report(resamples, &curve, config.seed);
                    file.entries.push(ReportEntry { z: f64::NAN, reports: r });
                }
                art.json(&format!("reports/{name}.json"), file)?;
            }
            reports.extend(names.into_iter().zip(files));
        }
    }

    let manifest = art.manifest(command, config)?;
    let path = config.output_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Other(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(RunSummary { manifest, reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git() {
        // `printf 'hello\n' | git hash-object --stdin`
        assert_eq!(content_hash(b"hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    }

    #[test]
    fn repeated_names_are_suffixed() {
        let a = vec![AnalysisSpec::Crossing, AnalysisSpec::Crossing, AnalysisSpec::VacantBound];
        assert_eq!(report_names(&a), ["crossing", "crossing-2", "vacant-bound"]);
    }
}
