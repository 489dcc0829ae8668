use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    /// Rectangle `[-L_q/2, L_q/2) x [-L_p/2, L_p/2)`, continued periodically
    /// for spectral work.
    PlaneWindow,
    /// `[0, L_q) x [0, L_p)` with periodic identification.
    Torus,
}

/// A flat two-dimensional phase space with the standard form `dq ∧ dp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpace {
    pub kind: SpaceKind,
    #[serde(rename = "Lq")]
    pub lq: f64,
    #[serde(rename = "Lp")]
    pub lp: f64,
    #[serde(rename = "Nq")]
    pub nq: usize,
    #[serde(rename = "Np")]
    pub np: usize,
}

impl PhaseSpace {
    pub fn new(kind: SpaceKind, extent: (f64, f64), grid: (usize, usize)) -> Result<Self> {
        let space = Self { kind, lq: extent.0, lp: extent.1, nq: grid.0, np: grid.1 };
        space.validate()?;
        Ok(space)
    }

    pub fn torus(extent: (f64, f64), grid: (usize, usize)) -> Result<Self> {
        Self::new(SpaceKind::Torus, extent, grid)
    }

    /// The `2π x 2π` torus.
    pub fn standard_torus(n: usize) -> Result<Self> {
        Self::torus((2.0 * PI, 2.0 * PI), (n, n))
    }

    pub fn plane_window(extent: (f64, f64), grid: (usize, usize)) -> Result<Self> {
        Self::new(SpaceKind::PlaneWindow, extent, grid)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("Nq", self.nq), ("Np", self.np)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidSpace(format!("{name} = {n} must be even and at least 8")));
            }
        }
        for (name, l) in [("Lq", self.lq), ("Lp", self.lp)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidSpace(format!("{name} = {l} must be positive")));
            }
        }
        Ok(())
    }

    /// Coefficient of the symplectic form; fixed to the standard `dq ∧ dp`.
    pub fn form_coefficient(&self) -> f64 {
        1.0
    }

    pub fn origin(&self) -> (f64, f64) {
        match self.kind {
            SpaceKind::Torus => (0.0, 0.0),
            SpaceKind::PlaneWindow => (-self.lq / 2.0, -self.lp / 2.0),
        }
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.lq / self.nq as f64, self.lp / self.np as f64)
    }

    pub fn area(&self) -> f64 {
        self.lq * self.lp
    }

    /// Grid node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let (q0, p0) = self.origin();
        let (dq, dp) = self.spacing();
        (q0 + i as f64 * dq, p0 + j as f64 * dp)
    }

    /// Angular wavenumbers of Fourier mode `(a, b)`.
    pub fn wavenumber(&self, a: i64, b: i64) -> (f64, f64) {
        (2.0 * PI * a as f64 / self.lq, 2.0 * PI * b as f64 / self.lp)
    }

    /// Maps a point back into the fundamental domain.
    pub fn wrap(&self, (q, p): (f64, f64)) -> (f64, f64) {
        let (q0, p0) = self.origin();
        (q0 + (q - q0).rem_euclid(self.lq), p0 + (p - p0).rem_euclid(self.lp))
    }

    pub fn same_as(&self, other: &PhaseSpace) -> bool {
        self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Probability,
    Raw,
}

/// Where the measure lives inside the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    Full,
    /// Invariant disk centred at the origin, used for rotations of a plane window.
    Disk { radius: f64 },
}

/// A flat measure: constant density on its support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    pub density: f64,
    pub total_mass: f64,
    pub normalization: Normalization,
    pub support: Support,
}

impl MeasureDescriptor {
    pub fn support_area(&self) -> f64 {
        match self.normalization {
            Normalization::Raw => self.total_mass / self.density,
            Normalization::Probability => 1.0 / self.density,
        }
    }

    pub fn normalized(&self) -> MeasureDescriptor {
        let area = self.support_area();
        MeasureDescriptor {
            density: 1.0 / area,
            total_mass: 1.0,
            normalization: Normalization::Probability,
            support: self.support,
        }
    }

    pub fn restricted_to_disk(&self, radius: f64) -> MeasureDescriptor {
        let area = PI * radius * radius;
        let (density, total_mass) = match self.normalization {
            Normalization::Raw => (1.0, area),
            Normalization::Probability => (1.0 / area, 1.0),
        };
        MeasureDescriptor { density, total_mass, normalization: self.normalization, support: Support::Disk { radius } }
    }

    pub fn contains(&self, space: &PhaseSpace, (q, p): (f64, f64)) -> bool {
        match self.support {
            Support::Full => {
                let (q0, p0) = space.origin();
                q >= q0 && q < q0 + space.lq && p >= p0 && p < p0 + space.lp
            }
            Support::Disk { radius } => q * q + p * p < radius * radius,
        }
    }
}

/// The symplectic volume `dq ∧ dp`: Lebesgue measure in canonical coordinates.
pub fn liouville_measure(space: &PhaseSpace) -> MeasureDescriptor {
    MeasureDescriptor {
        density: space.form_coefficient(),
        total_mass: space.area(),
        normalization: Normalization::Raw,
        support: Support::Full,
    }
}
