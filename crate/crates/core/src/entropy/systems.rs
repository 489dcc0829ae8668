//! Measure-preserving point maps with known entropies, plus time-one maps of flows.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{liouville_step, FlowPointMap, FlowSpec, Hamiltonian, MoyalPropagator, Scheme};
use crate::geometry::spectral::{signed_mode, Fft2};
use crate::geometry::{
    liouville_measure, Grid, Jacobian, MeasureDescriptor, Observable, PhaseSpace, Point, PointMap, SpaceKind, Support,
};
use crate::starproduct::Hbar;

/// Grid used for field transfers of the unit-square presets.
const TRANSFER_GRID: usize = 64;

/// Named presets, as accepted by configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "kebab-case")]
pub enum SystemPreset {
    Cat,
    Baker,
    Rotation { alpha: Option<f64> },
    Standard { k: f64 },
    Harmonic { radius: Option<f64> },
    Identity,
}

#[derive(Debug, Clone)]
enum MapKind {
    Identity,
    Cat,
    Baker,
    Rotation(f64),
    Standard(f64),
    Flow { map: FlowPointMap, spec: Box<FlowSpec> },
    Custom(Arc<dyn PointMap>),
}

impl std::fmt::Debug for dyn PointMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PointMap")
    }
}

/// A measure-preserving map of a bounded domain.
#[derive(Debug, Clone)]
pub struct PointMapSystem {
    pub name: String,
    pub domain: PhaseSpace,
    pub measure: MeasureDescriptor,
    kind: MapKind,
}

pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn unit_torus() -> PhaseSpace {
    PhaseSpace::torus((1.0, 1.0), (TRANSFER_GRID, TRANSFER_GRID)).expect("static space")
}

impl PointMapSystem {
    fn build(name: &str, domain: PhaseSpace, kind: MapKind) -> Self {
        Self { name: name.into(), measure: liouville_measure(&domain).normalized(), domain, kind }
    }

    pub fn identity() -> Self {
        Self::build("identity", unit_torus(), MapKind::Identity)
    }

    /// `(x, y) -> (2x + y, x + y) mod 1`.
    pub fn cat() -> Self {
        Self::build("cat", unit_torus(), MapKind::Cat)
    }

    /// `(x, y) -> (2x mod 1, (y + ⌊2x⌋)/2)` on the unit square.
    pub fn baker() -> Self {
        Self::build("baker", unit_torus(), MapKind::Baker)
    }

    pub fn rotation(alpha: f64) -> Self {
        Self::build("rotation", unit_torus(), MapKind::Rotation(alpha))
    }

    /// Chirikov standard map on the `2π` torus: `p' = p + K sin q`, `q' = q + p'`.
    pub fn standard(k: f64) -> Self {
        let domain = PhaseSpace::standard_torus(TRANSFER_GRID).expect("static space");
        Self::build("standard", domain, MapKind::Standard(k))
    }

    /// Time-one map of a classical flow. Kicked flows give one period.
    pub fn from_flow(spec: &FlowSpec, support: Support) -> Result<Self> {
        let spec = FlowSpec { hbar: Hbar::zero(), ..spec.clone() };
        let map = FlowPointMap::new(&spec, 1.0)?;
        let mut out = Self::build("flow", spec.space, MapKind::Flow { map, spec: Box::new(spec.clone()) });
        if let Support::Disk { radius } = support {
            out.measure = out.measure.restricted_to_disk(radius);
        }
        Ok(out)
    }

    /// Harmonic oscillator time-one map (rotation by one radian) on the
    /// invariant disk of `radius` inside a window of side 16.
    pub fn harmonic(radius: f64) -> Result<Self> {
        let spec = FlowSpec::harmonic(16.0, TRANSFER_GRID, Hbar::zero())?.with_scheme(Scheme::SemiLagrangianDensity);
        if radius <= 0.0 || radius > 8.0 {
            return Err(Error::Config(format!("disk radius {radius} must lie in (0, 8]")));
        }
        let mut out = Self::from_flow(&spec, Support::Disk { radius })?;
        out.name = "harmonic".into();
        Ok(out)
    }

    /// Wraps an arbitrary map; grid transfers are unavailable for it.
    pub fn custom(name: &str, domain: PhaseSpace, measure: MeasureDescriptor, map: Arc<dyn PointMap>) -> Self {
        Self { name: name.into(), domain, measure, kind: MapKind::Custom(map) }
    }

    pub fn from_preset(preset: &SystemPreset) -> Result<Self> {
        match preset {
            SystemPreset::Cat => Ok(Self::cat()),
            SystemPreset::Baker => Ok(Self::baker()),
            SystemPreset::Rotation { alpha } => Ok(Self::rotation(alpha.unwrap_or_else(golden_mean))),
            SystemPreset::Standard { k } => Ok(Self::standard(*k)),
            SystemPreset::Harmonic { radius } => Self::harmonic(radius.unwrap_or(6.0)),
            SystemPreset::Identity => Ok(Self::identity()),
        }
    }

    pub fn support(&self) -> Support {
        self.measure.support
    }

    pub fn flow_spec(&self) -> Option<&FlowSpec> {
        match &self.kind {
            MapKind::Flow { spec, .. } => Some(spec),
            _ => None,
        }
    }

    /// `max |det DT − 1|` over the given points.
    pub fn measure_preservation_residual(&self, points: &[Point]) -> f64 {
        points
            .iter()
            .map(|&x| {
                let j = self.jacobian(x);
                (j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Koopman transfer `f -> f ∘ T⁻¹` of a grid field over the domain.
    ///
    /// Each preset uses a transfer that keeps the grid mean: a lattice
    /// permutation (cat), cell averaging (baker), Fourier shifts (rotation,
    /// standard) or exact characteristics (flows).
    pub fn transfer(&self, f: &Grid) -> Result<Grid> {
        if f.space != self.domain {
            return Err(Error::MismatchedSpace);
        }
        let s = self.domain;
        let (nq, np) = (s.nq, s.np);
        match &self.kind {
            MapKind::Identity => Ok(f.clone()),
            MapKind::Cat => {
                if nq != np {
                    return Err(Error::Unsupported("cat transfer needs a square grid".into()));
                }
                let n = nq as i64;
                let mut out = Grid::zeros(&s);
                for i in 0..n {
                    for j in 0..n {
                        // T⁻¹ = [[1, −1], [−1, 2]]
                        let a = (i - j).rem_euclid(n) as usize;
                        let b = (2 * j - i).rem_euclid(n) as usize;
                        out.data[(i * n + j) as usize] = f.at(a, b);
                    }
                }
                Ok(out)
            }
            MapKind::Baker => {
                if np % 2 != 0 {
                    return Err(Error::Unsupported("baker transfer needs an even grid".into()));
                }
                let mut out = Grid::zeros(&s);
                for i in 0..nq {
                    for j in 0..np {
                        let b = usize::from(2 * j >= np);
                        let x = (i + b * nq) / 2;
                        let y = 2 * j - b * np;
                        out.data[i * np + j] = 0.5 * (f.at(x, y) + f.at(x, y + 1));
                    }
                }
                Ok(out)
            }
            MapKind::Rotation(alpha) => {
                let fft = Fft2::new(nq, np);
                let mut data = f.data.clone();
                fft.cols_forward(&mut data);
                for a in 0..nq {
                    let k = s.wavenumber(signed_mode(a, nq), 0).0;
                    let m = Complex64::from_polar(1.0, -k * alpha);
                    data[a * np..(a + 1) * np].iter_mut().for_each(|x| *x *= m);
                }
                fft.cols_inverse(&mut data);
                Ok(Grid { space: s, data })
            }
            MapKind::Standard(k) => {
                let spec = FlowSpec::new(s, Hamiltonian::kicked_rotor(*k), Hbar::zero(), Scheme::SplitStepMoyal)?;
                MoyalPropagator::new(&spec)?.evolve(f, 1.0)
            }
            MapKind::Flow { spec, .. } => {
                let out = liouville_step(&Observable::grid(f.clone()), spec, 1.0)?;
                Ok(out.field)
            }
            MapKind::Custom(_) => Err(Error::Unsupported(format!("no grid transfer for {}", self.name))),
        }
    }
}

impl PointMap for PointMapSystem {
    fn apply(&self, (x, y): Point) -> Point {
        match &self.kind {
            MapKind::Identity => (x, y),
            MapKind::Cat => ((2.0 * x + y).rem_euclid(1.0), (x + y).rem_euclid(1.0)),
            MapKind::Baker => {
                let b = (2.0 * x).floor();
                ((2.0 * x - b).rem_euclid(1.0), ((y + b) / 2.0).rem_euclid(1.0))
            }
            MapKind::Rotation(alpha) => ((x + alpha).rem_euclid(1.0), y),
            MapKind::Standard(k) => {
                let p = (y + k * x.sin()).rem_euclid(2.0 * PI);
                ((x + p).rem_euclid(2.0 * PI), p)
            }
            MapKind::Flow { map, .. } => map.apply((x, y)),
            MapKind::Custom(map) => map.apply((x, y)),
        }
    }

    fn jacobian(&self, (x, y): Point) -> Jacobian {
        match &self.kind {
            MapKind::Identity | MapKind::Rotation(_) => [[1.0, 0.0], [0.0, 1.0]],
            MapKind::Cat => [[2.0, 1.0], [1.0, 1.0]],
            MapKind::Baker => [[2.0, 0.0], [0.0, 0.5]],
            MapKind::Standard(k) => {
                let c = k * x.cos();
                [[1.0 + c, 1.0], [c, 1.0]]
            }
            MapKind::Flow { map, .. } => map.jacobian((x, y)),
            MapKind::Custom(map) => map.jacobian((x, y)),
        }
    }
}

impl PointMapSystem {
    /// True for maps whose Jacobian is constant or piecewise constant.
    pub fn is_piecewise_linear(&self) -> bool {
        matches!(self.kind, MapKind::Identity | MapKind::Cat | MapKind::Baker | MapKind::Rotation(_))
    }

    /// The exact piecewise-affine form of the unit-square presets.
    pub fn affine_torus(&self) -> Option<super::exact::AffineTorusMap> {
        use super::exact::AffineTorusMap as A;
        match self.kind {
            MapKind::Identity => Some(A::Identity),
            MapKind::Cat => Some(A::Cat),
            MapKind::Baker => Some(A::Baker),
            MapKind::Rotation(a) => Some(A::Rotation(a)),
            _ => None,
        }
        .filter(|_| self.domain.lq == 1.0 && self.domain.lp == 1.0 && self.support() == Support::Full)
    }

    /// `T⁻¹(x)`; unavailable for custom maps.
    pub fn apply_inverse(&self, (x, y): Point) -> Result<Point> {
        Ok(match &self.kind {
            MapKind::Identity => (x, y),
            MapKind::Cat => ((x - y).rem_euclid(1.0), (2.0 * y - x).rem_euclid(1.0)),
            MapKind::Baker => {
                let b = (2.0 * y).floor();
                (((x + b) / 2.0).rem_euclid(1.0), (2.0 * y - b).rem_euclid(1.0))
            }
            MapKind::Rotation(alpha) => ((x - alpha).rem_euclid(1.0), y),
            MapKind::Standard(k) => {
                let q = x - y;
                (q.rem_euclid(2.0 * PI), (y - k * q.sin()).rem_euclid(2.0 * PI))
            }
            MapKind::Flow { map, .. } => map.apply_inverse((x, y))?,
            MapKind::Custom(_) => return Err(Error::Unsupported(format!("no inverse for {}", self.name))),
        })
    }

    pub fn is_torus(&self) -> bool {
        self.domain.kind == SpaceKind::Torus
    }
}
