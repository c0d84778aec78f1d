//! Fortuin–Kasteleyn colouring of CRCM configurations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::wr::{ColoredConfiguration, ColoredPoint};
use crate::connectivity::{count_components, spanning_labels};
use crate::error::{invalid, Result};
use crate::geometry::{BoundaryCondition, Configuration};
use crate::scalar::Scalar;

/// Treatment of components spanning the window, the finite-volume stand-in
/// for the unbounded component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanningRule {
    #[default]
    None,
    /// Components crossing (or wrapping) along some axis get colour 1.
    SpanningGetsColor1,
}

/// Colours every component of `config` independently and uniformly in
/// `1..=q`; under [`SpanningRule::SpanningGetsColor1`] spanning components get
/// colour 1. The output always satisfies the hard-core event.
pub fn fk_color<T: Scalar, R: Rng + ?Sized>(
    config: &Configuration<T>,
    q: u32,
    rule: SpanningRule,
    rng: &mut R,
) -> Result<ColoredConfiguration<T>> {
    if q == 0 {
        return Err(invalid("colour count must be positive"));
    }
    let index = count_components(config, &BoundaryCondition::Empty);
    let spanning = match rule {
        SpanningRule::None => vec![false; index.component_count()],
        SpanningRule::SpanningGetsColor1 => spanning_labels(&index),
    };
    let colors: Vec<u32> = spanning.iter().map(|&s| if s { 1 } else { 1 + rng.random_range(0..q) }).collect();
    let points = config
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| ColoredPoint { point: p.clone(), color: colors[index.label(i)] })
        .collect();
    Ok(ColoredConfiguration { points, window: config.window().clone(), colors: q })
}
