//! Split-step Moyal propagation for `H = T(p) + V(q)` and kicked systems.
//!
//! In the representation that is Fourier in `p` (wavenumber `d`) the Moyal
//! bracket with `V(q)` acts by multiplication:
//! `∂_t f̂ = (V(q − ħd/2) − V(q + ħd/2)) f̂ / (iħ)`, and symmetrically for `T(p)`
//! with `q`-wavenumber `k`: `(T(p + ħk/2) − T(p − ħk/2)) / (iħ)`.
//! Each factor is therefore an exact diagonal exponential.

use num_complex::Complex64;

use super::{FlowSpec, Part};
use crate::error::{Error, Result};
use crate::geometry::spectral::{signed_mode, Fft2};
use crate::geometry::{Grid, PhaseSpace};

/// Cached FFT plans and phase tables for repeated Moyal evolution.
pub struct MoyalPropagator {
    space: PhaseSpace,
    fft: Fft2,
    kinetic: Part,
    potential: Part,
    hbar: f64,
    kicked: bool,
    steps_per_unit: usize,
    /// Tables for unit time (kicked) or one default step (autonomous).
    drift: Vec<Complex64>,
    kick: Vec<Complex64>,
}

impl std::fmt::Debug for MoyalPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MoyalPropagator({:?}, hbar = {}, kicked = {})", self.space, self.hbar, self.kicked)
    }
}

impl MoyalPropagator {
    pub fn new(spec: &FlowSpec) -> Result<Self> {
        let (kinetic, potential) = spec
            .hamiltonian
            .separable(&spec.space)?
            .ok_or_else(|| Error::Config("split-step needs H = T(p) + V(q); use rk4-moyal".into()))?;
        let mut out = Self {
            space: spec.space,
            fft: Fft2::new(spec.space.nq, spec.space.np),
            kinetic,
            potential,
            hbar: spec.hbar.value(),
            kicked: spec.hamiltonian.is_kicked(),
            steps_per_unit: spec.steps_per_unit_time,
            drift: Vec::new(),
            kick: Vec::new(),
        };
        let tau = if out.kicked { 1.0 } else { spec.dt };
        out.drift = out.drift_table(tau);
        out.kick = out.kick_table(if out.kicked { 1.0 } else { tau / 2.0 });
        Ok(out)
    }

    /// Multipliers indexed `[k_index * np + j]` for the kinetic factor over time `tau`.
    pub(crate) fn drift_table(&self, tau: f64) -> Vec<Complex64> {
        let s = self.space;
        let h = self.hbar;
        let mut out = Vec::with_capacity(s.nq * s.np);
        for a in 0..s.nq {
            let k = s.wavenumber(signed_mode(a, s.nq), 0).0;
            for j in 0..s.np {
                let p = s.node(0, j).1;
                let phase = if h == 0.0 {
                    -tau * k * self.kinetic.slope_p(p)
                } else {
                    -tau * (self.kinetic.at_p(p + h * k / 2.0) - self.kinetic.at_p(p - h * k / 2.0)) / h
                };
                out.push(Complex64::from_polar(1.0, phase));
            }
        }
        out
    }

    /// Multipliers indexed `[i * np + d_index]` for the potential factor of strength `tau`.
    pub(crate) fn kick_table(&self, tau: f64) -> Vec<Complex64> {
        let s = self.space;
        let h = self.hbar;
        let mut out = Vec::with_capacity(s.nq * s.np);
        for i in 0..s.nq {
            let q = s.node(i, 0).0;
            for b in 0..s.np {
                let d = s.wavenumber(0, signed_mode(b, s.np)).1;
                let phase = if h == 0.0 {
                    tau * d * self.potential.slope_q(q)
                } else {
                    -tau * (self.potential.at_q(q - h * d / 2.0) - self.potential.at_q(q + h * d / 2.0)) / h
                };
                out.push(Complex64::from_polar(1.0, phase));
            }
        }
        out
    }

    pub(crate) fn apply_kick(&self, data: &mut [Complex64], table: &[Complex64], inverse: bool) {
        self.fft.rows_forward(data);
        for (x, m) in data.iter_mut().zip(table) {
            *x *= if inverse { m.conj() } else { *m };
        }
        self.fft.rows_inverse(data);
    }

    pub(crate) fn apply_drift(&self, data: &mut [Complex64], table: &[Complex64], inverse: bool) {
        self.fft.cols_forward(data);
        for (x, m) in data.iter_mut().zip(table) {
            *x *= if inverse { m.conj() } else { *m };
        }
        self.fft.cols_inverse(data);
    }

    /// One kick period: kick, then free drift.
    pub fn period(&self, data: &mut [Complex64]) {
        self.apply_kick(data, &self.kick, false);
        self.apply_drift(data, &self.drift, false);
    }

    pub fn evolve(&self, f: &Grid, t: f64) -> Result<Grid> {
        if f.space != self.space {
            return Err(Error::MismatchedSpace);
        }
        let mut data = f.data.clone();
        if self.kicked {
            let r = t.round();
            if (t - r).abs() > 1e-9 {
                return Err(Error::Config(format!("kicked systems evolve over whole periods, got t = {t}")));
            }
            for _ in 0..r.abs() as i64 {
                if r >= 0.0 {
                    self.period(&mut data);
                } else {
                    self.apply_drift(&mut data, &self.drift, true);
                    self.apply_kick(&mut data, &self.kick, true);
                }
            }
        } else {
            let n = (t.abs() * self.steps_per_unit as f64 - 1e-9).ceil().max(0.0) as usize;
            if n > 0 {
                let h = t / n as f64;
                let default = (h - 1.0 / self.steps_per_unit as f64).abs() < 1e-15;
                let (drift, half) = if default {
                    (self.drift.clone(), self.kick.clone())
                } else {
                    (self.drift_table(h), self.kick_table(h / 2.0))
                };
                // Strang splitting: half kick, drift, half kick.
                for _ in 0..n {
                    self.apply_kick(&mut data, &half, false);
                    self.apply_drift(&mut data, &drift, false);
                    self.apply_kick(&mut data, &half, false);
                }
            }
        }
        Ok(Grid { space: self.space, data })
    }
}
