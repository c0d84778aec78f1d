use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{BoundaryCondition, Window};
use crate::radius::RadiusLaw;
use crate::scalar::Scalar;

/// Parameter regime under which the phase results apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `q >= 1` with finite d-th radius moment.
    C1,
    /// `q < 1` with bounded radii.
    C2,
}

/// Full parameterisation of a finite-volume CRCM / Widom–Rowlinson model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelParams<T: Scalar> {
    pub z: f64,
    pub q: f64,
    pub radius_law: RadiusLaw,
    pub dimension: usize,
    pub window: Window<T>,
    #[serde(default)]
    pub boundary: BoundaryCondition<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(z: f64, q: f64, radius_law: RadiusLaw, window: Window<T>) -> Result<Self> {
        let params = Self { z, q, radius_law, dimension: window.dim(), window, boundary: BoundaryCondition::Empty };
        params.validate()?;
        Ok(params)
    }

    pub fn with_boundary(mut self, boundary: BoundaryCondition<T>) -> Result<Self> {
        self.boundary = boundary;
        self.validate()?;
        Ok(self)
    }

    pub fn with_z(&self, z: f64) -> Result<Self> {
        let mut p = self.clone();
        p.z = z;
        p.validate()?;
        Ok(p)
    }

    pub fn with_q(&self, q: f64) -> Result<Self> {
        let mut p = self.clone();
        p.q = q;
        p.validate()?;
        Ok(p)
    }

    pub fn with_window(&self, window: Window<T>) -> Result<Self> {
        let mut p = self.clone();
        p.dimension = window.dim();
        p.window = window;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(invalid(format!("intensity z must be positive, got {}", self.z)));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(invalid(format!("cluster weight q must be positive, got {}", self.q)));
        }
        if self.dimension < 2 {
            return Err(invalid("dimension must be at least 2"));
        }
        if self.dimension != self.window.dim() {
            return Err(invalid(format!(
                "dimension {} does not match the {}-dimensional window",
                self.dimension,
                self.window.dim()
            )));
        }
        self.radius_law.validate()?;
        self.boundary.validate(&self.window)
    }

    /// Expected number of germs of the reference Poisson process, `z |Λ|`.
    pub fn mean_count(&self) -> f64 {
        self.z * self.window.volume()
    }

    pub fn regime(&self) -> Option<Regime> {
        if self.q >= 1.0 {
            Some(Regime::C1)
        } else if self.radius_law.is_bounded() {
            Some(Regime::C2)
        } else {
            None
        }
    }

    /// `q` as a colour count, when it is a positive integer.
    pub fn colours(&self) -> Result<u32> {
        if self.q >= 1.0 && self.q.fract() == 0.0 && self.q <= f64::from(u32::MAX) {
            Ok(self.q as u32)
        } else {
            Err(invalid(format!("q = {} is not a positive integer colour count", self.q)))
        }
    }
}
