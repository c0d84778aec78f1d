//! Radius mark distributions `Q`.

use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Inverse CDF given as `(u, R)` knots with linear interpolation in between.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseCdfTable {
    u: Vec<f64>,
    r: Vec<f64>,
}

impl InverseCdfTable {
    pub fn new(u: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if u.len() != r.len() || u.len() < 2 {
            return Err(invalid("inverse-CDF table needs at least two (u, R) rows"));
        }
        if u[0] != 0.0 || *u.last().unwrap() != 1.0 {
            return Err(invalid("inverse-CDF table must start at u = 0 and end at u = 1"));
        }
        if u.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("inverse-CDF table needs strictly increasing u"));
        }
        if r.iter().any(|v| !v.is_finite() || *v < 0.0) || r.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("inverse-CDF table radii must be finite, >= 0 and nondecreasing"));
        }
        Ok(Self { u, r })
    }

    /// Reads two-column `u,R` CSV. A non-numeric first row is taken as a header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut u = Vec::new();
        let mut r = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(invalid(format!("inverse-CDF table row {} must have 2 columns", line + 1)));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(a), Ok(b)) => {
                    u.push(a);
                    r.push(b);
                }
                _ if line == 0 => continue,
                _ => return Err(invalid(format!("inverse-CDF table row {} is not numeric", line + 1))),
            }
        }
        Self::new(u, r)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn inverse_cdf(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let i = match self.u.partition_point(|&v| v <= p) {
            0 => 1,
            i if i >= self.u.len() => self.u.len() - 1,
            i => i,
        };
        let (u0, u1) = (self.u[i - 1], self.u[i]);
        let (r0, r1) = (self.r[i - 1], self.r[i]);
        r0 + (r1 - r0) * (p - u0) / (u1 - u0)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x < self.r[0] {
            return 0.0;
        }
        let mut best = 0.0;
        for i in 1..self.u.len() {
            let (r0, r1) = (self.r[i - 1], self.r[i]);
            if x >= r1 {
                best = self.u[i];
            } else if x >= r0 && r1 > r0 {
                best = self.u[i - 1] + (self.u[i] - self.u[i - 1]) * (x - r0) / (r1 - r0);
            }
        }
        best
    }

    fn moment(&self, k: i32) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.u.len() {
            let du = self.u[i] - self.u[i - 1];
            let (r0, r1) = (self.r[i - 1], self.r[i]);
            if r1 > r0 {
                acc += du * (r1.powi(k + 1) - r0.powi(k + 1)) / (f64::from(k + 1) * (r1 - r0));
            } else {
                acc += du * r0.powi(k);
            }
        }
        acc
    }

    fn max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    fn mass_at_zero(&self) -> f64 {
        let mut mass = 0.0;
        for i in 1..self.u.len() {
            if self.r[i] == 0.0 {
                mass = self.u[i];
            }
        }
        mass
    }
}

/// Radius law. All offered laws have bounded support, so every moment is finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadiusLaw {
    Dirac { r0: f64 },
    Uniform { a: f64, b: f64 },
    /// Density proportional to `(1 + R)^(-exponent)` on `[0, cutoff]`.
    TruncatedPower { exponent: f64, cutoff: f64 },
    Table(InverseCdfTable),
}

impl RadiusLaw {
    pub fn dirac(r0: f64) -> Result<Self> {
        let law = RadiusLaw::Dirac { r0 };
        law.validate()?;
        Ok(law)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let law = RadiusLaw::Uniform { a, b };
        law.validate()?;
        Ok(law)
    }

    pub fn truncated_power(exponent: f64, cutoff: f64) -> Result<Self> {
        let law = RadiusLaw::TruncatedPower { exponent, cutoff };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RadiusLaw::Dirac { r0 } if !(r0 >= 0.0 && r0.is_finite()) => Err(invalid("dirac radius must be finite and >= 0")),
            RadiusLaw::Uniform { a, b } if !(a >= 0.0 && a <= b && b.is_finite()) => {
                Err(invalid("uniform radius law needs 0 <= a <= b < inf"))
            }
            RadiusLaw::TruncatedPower { exponent, cutoff } => {
                if !exponent.is_finite() || exponent <= 0.0 {
                    return Err(invalid("truncated-power exponent must be finite and > 0"));
                }
                if !(cutoff > 0.0 && cutoff.is_finite()) {
                    return Err(invalid("truncated-power cutoff must be finite and > 0; untruncated tails are not supported"));
                }
                Ok(())
            }
            RadiusLaw::Table(ref t) => InverseCdfTable::new(t.u.clone(), t.r.clone()).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Supremum of the support, `R_0` with `Q([0, R_0]) = 1`.
    pub fn max_radius(&self) -> f64 {
        match self {
            RadiusLaw::Dirac { r0 } => *r0,
            RadiusLaw::Uniform { b, .. } => *b,
            RadiusLaw::TruncatedPower { cutoff, .. } => *cutoff,
            RadiusLaw::Table(t) => t.max(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.max_radius().is_finite()
    }

    /// `Q({0})`.
    pub fn mass_at_zero(&self) -> f64 {
        match self {
            RadiusLaw::Dirac { r0 } => f64::from(u8::from(*r0 == 0.0)),
            RadiusLaw::Uniform { a, b } => f64::from(u8::from(*a == 0.0 && *b == 0.0)),
            RadiusLaw::TruncatedPower { .. } => 0.0,
            RadiusLaw::Table(t) => t.mass_at_zero(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            RadiusLaw::Dirac { r0 } => f64::from(u8::from(x >= r0)),
            RadiusLaw::Uniform { a, b } => {
                if x < a {
                    0.0
                } else if x >= b {
                    1.0
                } else {
                    (x - a) / (b - a)
                }
            }
            RadiusLaw::TruncatedPower { exponent, cutoff } => {
                if x <= 0.0 {
                    0.0
                } else if x >= cutoff {
                    1.0
                } else {
                    power_primitive(exponent, x) / power_primitive(exponent, cutoff)
                }
            }
            RadiusLaw::Table(ref t) => t.cdf(x),
        }
    }

    pub fn inverse_cdf(&self, p: f64) -> f64 {
        match *self {
            RadiusLaw::Dirac { r0 } => r0,
            RadiusLaw::Uniform { a, b } => a + (b - a) * p,
            RadiusLaw::TruncatedPower { exponent, cutoff } => {
                let target = p * power_primitive(exponent, cutoff);
                let r = if (exponent - 1.0).abs() < 1e-12 {
                    target.exp() - 1.0
                } else {
                    // (1 - (1+r)^(1-a)) / (a-1) = target
                    (1.0 - target * (exponent - 1.0)).powf(1.0 / (1.0 - exponent)) - 1.0
                };
                r.clamp(0.0, cutoff)
            }
            RadiusLaw::Table(ref t) => t.inverse_cdf(p),
        }
    }

    pub fn median(&self) -> f64 {
        self.inverse_cdf(0.5)
    }

    /// `E[R^k]` in closed form.
    pub fn moment(&self, k: u32) -> f64 {
        let ki = k as i32;
        match *self {
            RadiusLaw::Dirac { r0 } => r0.powi(ki),
            RadiusLaw::Uniform { a, b } => {
                if b == a {
                    a.powi(ki)
                } else {
                    (b.powi(ki + 1) - a.powi(ki + 1)) / (f64::from(k + 1) * (b - a))
                }
            }
            RadiusLaw::TruncatedPower { exponent, cutoff } => {
                // substitute u = 1 + R and expand (u - 1)^k binomially
                let top = 1.0 + cutoff;
                let mut acc = 0.0;
                let mut binom = 1.0;
                for j in 0..=k {
                    if j > 0 {
                        binom *= f64::from(k - j + 1) / f64::from(j);
                    }
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    let e = f64::from(j) - exponent + 1.0;
                    let integral = if e.abs() < 1e-12 { top.ln() } else { (top.powf(e) - 1.0) / e };
                    acc += sign * binom * integral;
                }
                acc / power_primitive(exponent, cutoff)
            }
            RadiusLaw::Table(ref t) => t.moment(ki),
        }
    }

    pub fn sample<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            RadiusLaw::Dirac { r0 } => T::of(r0),
            _ => {
                let u: f64 = rng.random();
                T::of(self.inverse_cdf(u))
            }
        }
    }

    /// Short label used in tables, e.g. `dirac:0.5`.
    pub fn label(&self) -> String {
        match self {
            RadiusLaw::Dirac { r0 } => format!("dirac:{r0}"),
            RadiusLaw::Uniform { a, b } => format!("uniform:{a}:{b}"),
            RadiusLaw::TruncatedPower { exponent, cutoff } => format!("power:{exponent}:{cutoff}"),
            RadiusLaw::Table(t) => format!("table:{}", t.u.len()),
        }
    }

    /// Parses `dirac:R0`, `uniform:A:B`, `power:EXPONENT:CUTOFF` or `table:PATH`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').ok_or_else(|| invalid(format!("radius law `{spec}` lacks parameters")))?;
        if kind == "table" {
            return Ok(RadiusLaw::Table(InverseCdfTable::from_path(rest)?));
        }
        let nums: Vec<f64> = rest
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("bad number `{s}` in radius law"))))
            .collect::<Result<_>>()?;
        match (kind, nums.as_slice()) {
            ("dirac", [r0]) => Self::dirac(*r0),
            ("uniform", [a, b]) => Self::uniform(*a, *b),
            ("power" | "truncated-power", [e, c]) => Self::truncated_power(*e, *c),
            _ => Err(invalid(format!("unrecognised radius law `{spec}`"))),
        }
    }
}

/// `∫_0^x (1 + r)^(-a) dr`.
fn power_primitive(a: f64, x: f64) -> f64 {
    if (a - 1.0).abs() < 1e-12 {
        (1.0 + x).ln()
    } else {
        (1.0 - (1.0 + x).powf(1.0 - a)) / (a - 1.0)
    }
}
