//! Newline-delimited JSON sample streams: a header line with the model
//! parameters and seed, then one configuration per line. A point is written
//! as `[x_1, ..., x_d, R]`, or `[x_1, ..., x_d, R, colour]` when coloured.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::geometry::{Configuration, MarkedPoint, Window};
use crate::params::ModelParams;
use crate::samplers::{ColoredConfiguration, ColoredPoint};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StreamHeader<T: Scalar> {
    pub model: String,
    pub params: ModelParams<T>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct Line<T: Scalar> {
    dimension: usize,
    window: Window<T>,
    points: Vec<Vec<f64>>,
}

fn encode<T: Scalar>(p: &MarkedPoint<T>, color: Option<u32>) -> Vec<f64> {
    let mut v: Vec<f64> = p.position.iter().map(|x| x.f64()).collect();
    v.push(p.radius.f64());
    if let Some(c) = color {
        v.push(f64::from(c));
    }
    v
}

fn decode<T: Scalar>(v: &[f64], dim: usize) -> Result<(MarkedPoint<T>, Option<u32>)> {
    if v.len() != dim + 1 && v.len() != dim + 2 {
        return Err(invalid(format!("point with {} entries in dimension {dim}", v.len())));
    }
    let p = MarkedPoint::new(v[..dim].iter().map(|&x| T::of(x)).collect::<Vec<_>>(), T::of(v[dim]))?;
    let c = v.get(dim + 1).map(|&c| c as u32);
    Ok((p, c))
}

pub struct SampleWriter<W: Write> {
    out: W,
}

impl<W: Write> SampleWriter<W> {
    pub fn new<T: Scalar>(mut out: W, header: &StreamHeader<T>) -> Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(Self { out })
    }

    pub fn write<T: Scalar>(&mut self, c: &Configuration<T>) -> Result<()> {
        let line = Line { dimension: c.dim(), window: c.window().clone(), points: c.points().iter().map(|p| encode(p, None)).collect() };
        serde_json::to_writer(&mut self.out, &line)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn write_colored<T: Scalar>(&mut self, c: &ColoredConfiguration<T>) -> Result<()> {
        let line = Line {
            dimension: c.window.dim(),
            window: c.window.clone(),
            points: c.points.iter().map(|p| encode(&p.point, Some(p.color))).collect(),
        };
        serde_json::to_writer(&mut self.out, &line)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// A parsed stream; coloured lines keep their colours.
pub struct SampleStream<T: Scalar> {
    pub header: StreamHeader<T>,
    pub samples: Vec<Configuration<T>>,
    pub colors: Vec<Option<Vec<u32>>>,
}

impl<T: Scalar> SampleStream<T> {
    pub fn colored(&self, q: u32) -> Result<Vec<ColoredConfiguration<T>>> {
        self.samples
            .iter()
            .zip(&self.colors)
            .map(|(c, col)| {
                let col = col.as_ref().ok_or_else(|| invalid("stream line carries no colours"))?;
                let pts = c.points().iter().zip(col).map(|(p, &color)| ColoredPoint { point: p.clone(), color }).collect();
                ColoredConfiguration::new(c.window().clone(), q, pts)
            })
            .collect()
    }
}

pub fn read_samples<T: Scalar, R: BufRead>(reader: R) -> Result<SampleStream<T>> {
    let mut lines = reader.lines();
    let first = lines.next().ok_or_else(|| invalid("empty sample stream"))??;
    let header: StreamHeader<T> = serde_json::from_str(&first)?;
    let mut samples = Vec::new();
    let mut colors = Vec::new();
    for (no, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line)?;
        let l: Line<T> = serde_json::from_value(v).map_err(|e| invalid(format!("line {}: {e}", no + 2)))?;
        let mut pts = Vec::with_capacity(l.points.len());
        let mut cols = Vec::new();
        for p in &l.points {
            let (m, c) = decode(p, l.dimension)?;
            pts.push(m);
            if let Some(c) = c {
                cols.push(c);
            }
        }
        colors.push((!cols.is_empty() && cols.len() == pts.len()).then_some(cols));
        samples.push(Configuration::new(l.window, pts)?);
    }
    Ok(SampleStream { header, samples, colors })
}
