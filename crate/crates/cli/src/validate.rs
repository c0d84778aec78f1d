//! Hypothesis checks of a configuration against the regimes of the theory.

use std::fmt;

use crcm::Regime;

use crate::config::{AnalysisSpec, ExperimentConfig, GnzFunction, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub level: Level,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.level {
            Level::Warning => "warning",
            Level::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub regime: Option<Regime>,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.level == Level::Error)
    }

    fn warn(&mut self, m: impl Into<String>) {
        self.findings.push(Finding { level: Level::Warning, message: m.into() });
    }

    fn error(&mut self, m: impl Into<String>) {
        self.findings.push(Finding { level: Level::Error, message: m.into() });
    }
}

fn untruncated(law: &str) -> bool {
    let parts: Vec<&str> = law.split(':').collect();
    matches!(parts.as_slice(), ["power" | "truncated-power", _, c] if c.trim().parse::<f64>().is_ok_and(f64::is_infinite))
}

pub fn validate_config(config: &ExperimentConfig) -> ValidationReport {
    let mut out = ValidationReport::default();
    let q = config.params.q;
    // untruncated tails are representable in a config but not sampled
    let law = if untruncated(&config.params.radius_law) {
        if q < 1.0 {
            out.error("case C2 requires bounded radii");
        } else {
            out.error("untruncated radius laws are not supported; give a finite cutoff");
        }
        None
    } else {
        match config.radius_law() {
            Ok(l) => Some(l),
            Err(e) => {
                out.error(e.to_string());
                None
            }
        }
    };
    if let Some(law) = &law {
        if q >= 1.0 && law.mass_at_zero() > 0.0 {
            if law.mass_at_zero() == 1.0 {
                out.warn("Q=δ_0: trivially no percolation");
            } else {
                out.warn("Q({0}) > 0: the phase results for q >= 1 assume Q({0}) = 0");
            }
        }
        if q >= 1.0 && !law.moment(config.params.dimension as u32).is_finite() {
            out.error("case C1 requires a finite d-th radius moment");
        }
        if q < 1.0 && !law.is_bounded() {
            out.error("case C2 requires bounded radii");
        }
    }
    if law.is_some() && !out.has_errors() {
        match config.model_params() {
            Ok(p) => out.regime = p.regime(),
            Err(e) => out.error(e.to_string()),
        }
    }
    if config.model == Model::Wr && (q < 1.0 || q.fract() != 0.0) {
        out.error(format!("model wr needs an integer colour count q >= 1, got {q}"));
    }
    if config.model.is_chain() {
        let s = &config.sampler;
        if s.thin == 0 {
            out.error("sampler.thin must be at least 1");
        }
        if s.burn_in.is_some_and(|b| b > s.steps) {
            out.error("sampler.burn_in exceeds sampler.steps");
        }
    }
    if config.z_grid.iter().any(|z| !(z.is_finite() && *z >= 0.0)) {
        out.error("z_grid entries must be finite and non-negative");
    }
    for a in &config.analyses {
        match a {
            AnalysisSpec::VacantBound if q >= 1.0 => out.error("vacant-bound requires q < 1 (case C2)"),
            AnalysisSpec::VacantBound if !matches!(config.model, Model::Crcm | Model::CrcmExact) => {
                out.error("vacant-bound needs model crcm or crcm-exact")
            }
            AnalysisSpec::Gnz { function: GnzFunction::ColorOne, .. } if config.model != Model::Wr => {
                out.error("gnz function color-one needs model wr")
            }
            AnalysisSpec::Gnz { proposals: 0, .. } => out.error("gnz needs at least one proposal"),
            AnalysisSpec::PartitionFunction { samples: 0 } => out.error("partition-function needs at least one sample"),
            AnalysisSpec::Threshold { .. } if config.z_grid.len() < 2 => {
                out.warn("threshold needs a z_grid of at least two points and runs under sweep only")
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ParamsSection;

    fn config(q: f64, law: &str) -> ExperimentConfig {
        ExperimentConfig {
            params: ParamsSection { q, radius_law: law.into(), ..ParamsSection::default() },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn hypotheses() {
        let r = validate_config(&config(2.0, "dirac:0"));
        assert!(!r.has_errors());
        assert_eq!(r.findings[0].to_string(), "warning: Q=δ_0: trivially no percolation");

        let r = validate_config(&config(0.5, "power:3:inf"));
        assert!(r.findings.iter().any(|f| f.to_string() == "error: case C2 requires bounded radii"));

        let r = validate_config(&config(2.0, "dirac:0.5"));
        assert!(r.findings.is_empty());
        assert_eq!(r.regime, Some(Regime::C1));

        let mut c = config(2.0, "dirac:0.5");
        c.analyses.push(AnalysisSpec::VacantBound);
        assert!(validate_config(&c).has_errors());
    }
}
