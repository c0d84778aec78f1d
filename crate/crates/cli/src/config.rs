//! Experiment configuration: a JSON document with one section per module.

use std::path::{Path, PathBuf};

use crcm::analysis::BlockSpec;
use crcm::{BoundaryCondition, ModelParams, RadiusLaw, Topology, Window};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Poisson,
    Crcm,
    CrcmExact,
    Wr,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Poisson => "poisson",
            Model::Crcm => "crcm",
            Model::CrcmExact => "crcm-exact",
            Model::Wr => "wr",
        }
    }

    pub fn is_chain(self) -> bool {
        matches!(self, Model::Crcm | Model::Wr)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub z: f64,
    pub q: f64,
    /// `dirac:R`, `uniform:A:B`, `power:EXPONENT:CUTOFF` or `table:PATH`.
    pub radius_law: String,
    pub dimension: usize,
    /// Cube `[0, side]^d`; ignored when `lower` and `upper` are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default)]
    pub boundary: BoundaryCondition<f64>,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            z: 1.0,
            q: 2.0,
            radius_law: "dirac:0.5".into(),
            dimension: 2,
            side: Some(4.0),
            lower: None,
            upper: None,
            topology: Topology::Free,
            boundary: BoundaryCondition::Empty,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub steps: u64,
    /// Defaults to `20 ⌈z|Λ|⌉`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    pub thin: u64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self { steps: 10_000, burn_in: None, thin: 10 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GnzFunction {
    One,
    RadiusMedian,
    Isolated,
    /// WR only.
    ColorOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticKind {
    Count,
    Crossing,
}

/// One analysis; each writes a single report file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalysisSpec {
    Gnz {
        function: GnzFunction,
        #[serde(default = "default_proposals")]
        proposals: usize,
    },
    PartitionFunction {
        samples: usize,
    },
    /// Increasing statistic of the model against Poisson(qz).
    Domination {
        statistic: StatisticKind,
    },
    /// Components meeting the centred unit cube against `z|Δ|q^{1-4^d}`.
    VacantBound,
    Events {
        inner_side: f64,
        r_threshold: f64,
        small_r: f64,
        count_threshold: usize,
    },
    /// Crossing frequency along the first axis.
    Crossing,
    /// `z_half` of the crossing curve; `sweep` only.
    Threshold {
        #[serde(default = "default_resamples")]
        resamples: usize,
    },
}

fn default_resamples() -> usize {
    200
}

fn default_proposals() -> usize {
    20
}

impl AnalysisSpec {
    pub fn name(&self) -> String {
        match self {
            AnalysisSpec::Gnz { function, .. } => format!("gnz-{}", serde_plain(function)),
            AnalysisSpec::PartitionFunction { .. } => "partition-function".into(),
            AnalysisSpec::Domination { statistic } => format!("domination-{}", serde_plain(statistic)),
            AnalysisSpec::VacantBound => "vacant-bound".into(),
            AnalysisSpec::Events { .. } => "events".into(),
            AnalysisSpec::Crossing => "crossing".into(),
            AnalysisSpec::Threshold { .. } => "threshold".into(),
        }
    }
}

fn serde_plain<S: Serialize>(v: &S) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
    #[serde(default)]
    pub z_grid: Vec<f64>,
    /// Independent replicas: one configuration each for `poisson` and
    /// `crcm-exact`, one chain each for `crcm` and `wr`.
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_replicas() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("crcm-out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::Crcm,
            params: ParamsSection::default(),
            sampler: SamplerSection::default(),
            analyses: Vec::new(),
            z_grid: Vec::new(),
            replicas: default_replicas(),
            seed: 0,
            output_dir: default_output(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a config; errors carry `path:line:column`.
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("{}:{}:{}: {}", origin.display(), e.line(), e.column(), strip_position(&e))))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises") + "\n"
    }

    pub fn radius_law(&self) -> Result<RadiusLaw, CliError> {
        RadiusLaw::parse(&self.params.radius_law).map_err(|e| CliError::Config(format!("params.radius_law: {e}")))
    }

    pub fn window(&self) -> Result<Window<f64>, CliError> {
        let p = &self.params;
        let w = match (&p.lower, &p.upper, p.side) {
            (Some(lo), Some(hi), _) => Window::new(lo.clone(), hi.clone(), p.topology),
            (None, None, Some(side)) => Window::cube(p.dimension, side).map(|w| w.with_topology(p.topology)),
            _ => return Err(CliError::Config("params: give either `side` or both `lower` and `upper`".into())),
        };
        w.map_err(|e| CliError::Config(format!("params window: {e}")))
    }

    pub fn model_params(&self) -> Result<ModelParams<f64>, CliError> {
        let p = ModelParams::new(self.params.z, self.params.q, self.radius_law()?, self.window()?)
            .map_err(|e| CliError::Config(format!("params: {e}")))?;
        if p.dimension != self.params.dimension {
            return Err(CliError::Config(format!(
                "params: dimension {} does not match the {}-dimensional window",
                self.params.dimension, p.dimension
            )));
        }
        p.with_boundary(self.params.boundary.clone()).map_err(|e| CliError::Config(format!("params.boundary: {e}")))
    }

    /// Centred unit cube of the window, the inner block of `vacant-bound`.
    pub fn centred_unit_block(&self) -> Result<BlockSpec, CliError> {
        let w = self.window()?;
        let origin = (0..w.dim()).map(|a| 0.5 * (w.lower()[a] + w.upper()[a]) - 0.5).collect();
        BlockSpec::new(origin, 1.0, vec![1; w.dim()], 0.0, crcm::analysis::BlockSemantics::Vacant)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let mut c = ExperimentConfig::default();
        c.analyses = vec![AnalysisSpec::Gnz { function: GnzFunction::Isolated, proposals: 5 }, AnalysisSpec::VacantBound];
        c.z_grid = vec![0.5, 1.0];
        let back = ExperimentConfig::parse(&c.to_json(), Path::new("c.json")).unwrap();
        assert_eq!(back, c);
        let err = ExperimentConfig::parse("{\n  \"model\": \"crcm\",\n  \"bogus\": 1\n}", Path::new("c.json")).unwrap_err();
        assert!(err.to_string().starts_with("c.json:3:"), "{err}");
        assert_eq!(c.model_params().unwrap().window.volume(), 16.0);
    }
}
