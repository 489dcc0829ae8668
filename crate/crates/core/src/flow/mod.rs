//! Time evolution of observables: classical Liouville transport and the Moyal
//! equation `∂f/∂t = {H, f}_ħ`, plus stroboscopic time-one maps.
//!
//! Fields are transported in the density sense, `f_t = f ∘ Φ_{-t}`, which is
//! the solution of `∂f/∂t = {H, f}` for the bracket convention used throughout.

mod characteristics;
mod rk4;
mod split;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use num_complex::Complex64;

use crate::exact::to_c64;
use crate::geometry::{FourierSeries, Grid, Observable, PhaseSpace, Poly, Representation, SpaceKind};
use crate::starproduct::Hbar;

pub use characteristics::{Characteristics, FlowPointMap};
pub use split::MoyalPropagator;

/// Default number of integrator steps per unit time (`dt = 1/64`).
pub const DEFAULT_STEPS_PER_UNIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    Poly(Poly),
    Trig(FourierSeries),
    /// `T(p) + V(q) Σ_n δ(t − n)`: free evolution under `T` with a kick by `V`
    /// at every integer time.
    Kicked { kinetic: Poly, potential: FourierSeries },
}

/// Fast `f64` evaluator for polynomial or trigonometric observables.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Poly(Vec<(i32, i32, Complex64)>),
    Fourier(Vec<(f64, f64, Complex64)>),
}

impl Compiled {
    pub(crate) fn new(obs: &Observable) -> Self {
        match &obs.repr {
            Representation::Poly(p) => Self::Poly(p.terms().map(|(m, c)| (m.q as i32, m.p as i32, to_c64(c))).collect()),
            Representation::Fourier(f) => Self::from_series(&obs.space, f),
            Representation::Grid(g) => Self::from_series(&obs.space, &g.to_fourier().pruned(1e-15)),
        }
    }

    fn from_series(space: &PhaseSpace, f: &FourierSeries) -> Self {
        Self::Fourier(
            f.modes
                .iter()
                .map(|(&(a, b), &c)| {
                    let (kq, kp) = space.wavenumber(a, b);
                    (kq, kp, c)
                })
                .collect(),
        )
    }

    pub(crate) fn eval(&self, q: f64, p: f64) -> Complex64 {
        match self {
            Self::Poly(terms) => terms.iter().map(|&(a, b, c)| c * (q.powi(a) * p.powi(b))).sum(),
            Self::Fourier(modes) => modes.iter().map(|&(kq, kp, c)| c * Complex64::from_polar(1.0, kq * q + kp * p)).sum(),
        }
    }
}

/// One separable piece, a function of a single coordinate.
#[derive(Debug, Clone)]
pub(crate) struct Part {
    value: Compiled,
    slope: Compiled,
}

impl Part {
    fn new(obs: Observable, along_q: bool) -> Result<Self> {
        let slope = match &obs.repr {
            Representation::Poly(p) => Observable::poly(&obs.space, if along_q { p.derivative_q(1) } else { p.derivative_p(1) }),
            _ => {
                let f = obs.to_fourier()?;
                let d = if along_q { f.derivative(&obs.space, 1, 0) } else { f.derivative(&obs.space, 0, 1) };
                Observable::fourier(&obs.space, d)
            }
        };
        Ok(Self { value: Compiled::new(&obs), slope: Compiled::new(&slope) })
    }

    /// `V(q)` for a potential part (the other coordinate is irrelevant).
    pub(crate) fn at_q(&self, q: f64) -> f64 {
        self.value.eval(q, 0.0).re
    }

    pub(crate) fn at_p(&self, p: f64) -> f64 {
        self.value.eval(0.0, p).re
    }

    pub(crate) fn slope_q(&self, q: f64) -> f64 {
        self.slope.eval(q, 0.0).re
    }

    pub(crate) fn slope_p(&self, p: f64) -> f64 {
        self.slope.eval(0.0, p).re
    }
}

impl Hamiltonian {
    pub fn parse_poly(text: &str) -> Result<Self> {
        Ok(Self::Poly(Poly::parse(text)?))
    }

    /// `p²/2 + K cos q` kicked once per unit time (the kicked rotor).
    pub fn kicked_rotor(k: f64) -> Self {
        Self::Kicked {
            kinetic: Poly::parse("p^2/2").expect("static polynomial"),
            potential: FourierSeries::cosine(1, 0).scale(Complex64::new(k, 0.0)),
        }
    }

    pub fn harmonic() -> Self {
        Self::Poly(Poly::parse("(q^2 + p^2)/2").expect("static polynomial"))
    }

    pub fn is_kicked(&self) -> bool {
        matches!(self, Self::Kicked { .. })
    }

    /// True for polynomials of total degree at most two.
    pub fn is_quadratic(&self) -> bool {
        matches!(self, Self::Poly(p) if p.degree().unwrap_or(0) <= 2 && !p.has_hbar())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Poly(p) => p.derivative_q(1).is_zero() && p.derivative_p(1).is_zero(),
            Self::Trig(f) => f.modes.keys().all(|&m| m == (0, 0)),
            Self::Kicked { .. } => false,
        }
    }

    /// True when `H = T(p) + V(q)`.
    pub fn is_separable(&self, space: &PhaseSpace) -> bool {
        matches!(self.separable(space), Ok(Some(_)))
    }

    /// Splits `H = T(p) + V(q)` when possible (constants go to `V`).
    pub(crate) fn separable(&self, space: &PhaseSpace) -> Result<Option<(Part, Part)>> {
        let (t, v) = match self {
            Self::Poly(p) => {
                if p.terms().any(|(m, _)| m.q > 0 && m.p > 0) {
                    return Ok(None);
                }
                let t = Poly::from_terms(p.terms().filter(|(m, _)| m.p > 0).map(|(m, c)| (*m, c.clone())));
                let v = Poly::from_terms(p.terms().filter(|(m, _)| m.p == 0).map(|(m, c)| (*m, c.clone())));
                (Observable::poly(space, t), Observable::poly(space, v))
            }
            Self::Trig(f) => {
                if f.modes.keys().any(|&(a, b)| a != 0 && b != 0) {
                    return Ok(None);
                }
                let t = FourierSeries::from_modes(f.modes.iter().filter(|(m, _)| m.1 != 0).map(|(m, c)| (*m, *c)));
                let v = FourierSeries::from_modes(f.modes.iter().filter(|(m, _)| m.1 == 0).map(|(m, c)| (*m, *c)));
                (Observable::fourier(space, t), Observable::fourier(space, v))
            }
            Self::Kicked { kinetic, potential } => {
                (Observable::poly(space, kinetic.clone()), Observable::fourier(space, potential.clone()))
            }
        };
        Ok(Some((Part::new(t, false)?, Part::new(v, true)?)))
    }

    pub fn as_observable(&self, space: &PhaseSpace) -> Option<Observable> {
        match self {
            Self::Poly(p) => Some(Observable::poly(space, p.clone())),
            Self::Trig(f) => Some(Observable::fourier(space, f.clone())),
            Self::Kicked { .. } => None,
        }
    }

    fn validate(&self, space: &PhaseSpace) -> Result<()> {
        if let Self::Kicked { kinetic, potential } = self {
            if kinetic.terms().any(|(m, _)| m.q > 0 || m.hbar > 0) {
                return Err(Error::Config("kicked kinetic term must depend on p only".into()));
            }
            if potential.modes.keys().any(|&(_, b)| b != 0) {
                return Err(Error::Config("kicked potential must depend on q only".into()));
            }
            if space.kind != SpaceKind::Torus {
                return Err(Error::Config("kicked systems live on a torus".into()));
            }
        }
        if let Self::Trig(_) = self {
            if space.kind != SpaceKind::Torus {
                return Err(Error::Config("trigonometric Hamiltonians need a torus".into()));
            }
        }
        if let Self::Poly(p) = self {
            if p.has_hbar() {
                return Err(Error::Config("Hamiltonian may not depend on hbar".into()));
            }
            if !p.is_real() {
                return Err(Error::Config("Hamiltonian must be real".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Point trajectories by Störmer–Verlet; needs `H = T(p) + V(q)`.
    LeapfrogPoints,
    /// Transport along backward characteristics with spectral interpolation.
    SemiLagrangianDensity,
    /// Exact kinetic/potential factors in mixed representations.
    SplitStepMoyal,
    /// Classical RK4 on the Moyal bracket in Fourier space.
    Rk4Moyal,
}

impl Scheme {
    pub fn is_quantum(self) -> bool {
        matches!(self, Self::SplitStepMoyal | Self::Rk4Moyal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub space: PhaseSpace,
    pub hamiltonian: Hamiltonian,
    pub hbar: Hbar,
    pub scheme: Scheme,
    pub dt: f64,
    pub steps_per_unit_time: usize,
    /// Halve `dt` until the RK4 stability bound holds instead of failing.
    pub auto_refine: bool,
}

impl FlowSpec {
    pub fn new(space: PhaseSpace, hamiltonian: Hamiltonian, hbar: Hbar, scheme: Scheme) -> Result<Self> {
        Self::with_steps(space, hamiltonian, hbar, scheme, DEFAULT_STEPS_PER_UNIT)
    }

    pub fn with_steps(
        space: PhaseSpace,
        hamiltonian: Hamiltonian,
        hbar: Hbar,
        scheme: Scheme,
        steps_per_unit_time: usize,
    ) -> Result<Self> {
        space.validate()?;
        hamiltonian.validate(&space)?;
        if steps_per_unit_time == 0 {
            return Err(Error::Config("steps_per_unit_time must be positive".into()));
        }
        Ok(Self {
            space,
            hamiltonian,
            hbar,
            scheme,
            dt: 1.0 / steps_per_unit_time as f64,
            steps_per_unit_time,
            auto_refine: true,
        })
    }

    /// Kicked rotor `p²/2 + K cos q` on the `2π` torus with an `n x n` grid.
    pub fn kicked_rotor(k: f64, n: usize, hbar: Hbar) -> Result<Self> {
        Self::new(PhaseSpace::standard_torus(n)?, Hamiltonian::kicked_rotor(k), hbar, Scheme::SplitStepMoyal)
    }

    /// Harmonic oscillator `(q² + p²)/2` on a centred plane window of side `side`.
    pub fn harmonic(side: f64, n: usize, hbar: Hbar) -> Result<Self> {
        Self::new(PhaseSpace::plane_window((side, side), (n, n))?, Hamiltonian::harmonic(), hbar, Scheme::SplitStepMoyal)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_hbar(mut self, hbar: Hbar) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn characteristics(&self) -> Result<Characteristics> {
        Characteristics::new(self)
    }

    fn kicks_for(&self, t: f64) -> Result<i64> {
        let r = t.round();
        if (t - r).abs() > 1e-9 {
            return Err(Error::Config(format!("kicked systems evolve over whole periods, got t = {t}")));
        }
        Ok(r as i64)
    }
}

/// A transported field with its positivity diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedField {
    pub field: Grid,
    pub t: f64,
    pub negativity_mass: f64,
}

impl EvolvedField {
    fn new(field: Grid, t: f64) -> Self {
        let negativity_mass = field.negativity_mass();
        Self { field, t, negativity_mass }
    }
}

/// Classical transport `f ∘ Φ_{-t}` sampled on the grid, with `f` evaluated
/// exactly (polynomials, series) or by trigonometric interpolation (grids).
pub fn liouville_step(f: &Observable, spec: &FlowSpec, t: f64) -> Result<EvolvedField> {
    if f.space != spec.space {
        return Err(Error::MismatchedSpace);
    }
    let chars = Characteristics::new(spec)?;
    if spec.scheme == Scheme::LeapfrogPoints && !chars.is_separable() && !spec.hamiltonian.is_quadratic() {
        return Err(Error::Config("leapfrog needs a separable Hamiltonian T(p) + V(q)".into()));
    }
    let eval: Box<dyn Fn(f64, f64) -> Complex64 + Sync> = match &f.repr {
        Representation::Grid(g) => {
            let it = g.interpolator();
            let s = g.space;
            let (q0, p0) = s.origin();
            // A plane window samples a field that vanishes outside it.
            let inside = move |q: f64, p: f64| {
                s.kind == SpaceKind::Torus || ((q0..q0 + s.lq).contains(&q) && (p0..p0 + s.lp).contains(&p))
            };
            Box::new(move |q, p| if inside(q, p) { it.eval(q, p) } else { Complex64::new(0.0, 0.0) })
        }
        _ => {
            let f = f.clone();
            Box::new(move |q, p| f.eval(q, p))
        }
    };
    let field = chars.transport(&|x| eval(x.0, x.1), t)?;
    Ok(EvolvedField::new(field, t))
}

/// Integrates the Moyal equation for time `t`.
///
/// Quadratic Hamiltonians reuse the exact classical transport (their Moyal
/// and Poisson brackets coincide); separable and kicked Hamiltonians use the
/// split-step factors or RK4 depending on the scheme.
pub fn moyal_step(f: &Observable, spec: &FlowSpec, t: f64) -> Result<EvolvedField> {
    if f.space != spec.space {
        return Err(Error::MismatchedSpace);
    }
    if spec.hamiltonian.is_quadratic() || spec.hamiltonian.is_zero() {
        return liouville_step(f, &FlowSpec { scheme: Scheme::SemiLagrangianDensity, ..spec.clone() }, t);
    }
    let grid = f.to_grid();
    let field = match spec.scheme {
        Scheme::Rk4Moyal => rk4::evolve(&grid, spec, t)?,
        _ => MoyalPropagator::new(spec)?.evolve(&grid, t)?,
    };
    Ok(EvolvedField::new(field, t))
}

/// Dispatches to [`moyal_step`] for quantum schemes and [`liouville_step`] otherwise.
pub fn evolve(f: &Observable, spec: &FlowSpec, t: f64) -> Result<EvolvedField> {
    if spec.scheme.is_quantum() {
        moyal_step(f, spec, t)
    } else {
        liouville_step(f, spec, t)
    }
}

/// A reusable evolution over exactly one time unit (one kick period).
pub struct TimeOneMap {
    spec: FlowSpec,
    propagator: Option<MoyalPropagator>,
}

impl TimeOneMap {
    pub fn new(spec: &FlowSpec) -> Result<Self> {
        let needs_propagator = spec.scheme == Scheme::SplitStepMoyal
            && !spec.hamiltonian.is_quadratic()
            && !spec.hamiltonian.is_zero();
        let propagator = if needs_propagator { Some(MoyalPropagator::new(spec)?) } else { None };
        Ok(Self { spec: spec.clone(), propagator })
    }

    pub fn spec(&self) -> &FlowSpec {
        &self.spec
    }

    pub fn apply(&self, f: &Observable) -> Result<EvolvedField> {
        match &self.propagator {
            Some(prop) => Ok(EvolvedField::new(prop.evolve(&f.to_grid(), 1.0)?, 1.0)),
            None => evolve(f, &self.spec, 1.0),
        }
    }

    /// `n` successive applications, each re-reading the previous grid.
    pub fn apply_n(&self, f: &Observable, n: usize) -> Result<EvolvedField> {
        let mut current = f.clone();
        let mut out = EvolvedField::new(f.to_grid(), 0.0);
        for k in 0..n {
            out = self.apply(&current)?;
            out.t = (k + 1) as f64;
            current = Observable::grid(out.field.clone());
        }
        Ok(out)
    }

    /// The classical point map of one period.
    pub fn point_map(&self) -> Result<FlowPointMap> {
        FlowPointMap::new(&self.spec, 1.0)
    }
}

/// `|ω(U_t f) − ω(f)|` with `ω` the normalized integral over the grid.
pub fn state_invariance_check(spec: &FlowSpec, f: &Observable, t: f64) -> Result<f64> {
    let before = f.to_grid().mean();
    let after = evolve(f, spec, t)?.field.mean();
    Ok((after - before).norm())
}

#[cfg(test)]
mod tests;
