//! Classical RK4 on the Moyal equation.
//!
//! Trigonometric and kicked Hamiltonians couple Fourier modes of the field
//! with the twisted weight `−(2/ħ) sin(ħθ/2)`; polynomial Hamiltonians use the
//! odd terms of the bidifferential series with pseudo-spectral derivatives.

use num_complex::Complex64;

use super::split::MoyalPropagator;
use super::{Compiled, FlowSpec, Hamiltonian};
use crate::error::{Error, Result};
use crate::geometry::spectral::{signed_mode, Fft2};
use crate::geometry::{FourierSeries, Grid, Observable, PhaseSpace, Poly};

/// RK4 is stable on the imaginary axis up to `2√2`; keep a margin.
const STABILITY_LIMIT: f64 = 2.5;
const MAX_SUBSTEPS: usize = 1 << 22;

fn rk4(state: &mut [Complex64], rhs: &dyn Fn(&[Complex64]) -> Vec<Complex64>, h: f64, n: usize) {
    let len = state.len();
    let mut tmp = vec![Complex64::new(0.0, 0.0); len];
    for _ in 0..n {
        let k1 = rhs(state);
        for i in 0..len {
            tmp[i] = state[i] + 0.5 * h * k1[i];
        }
        let k2 = rhs(&tmp);
        for i in 0..len {
            tmp[i] = state[i] + 0.5 * h * k2[i];
        }
        let k3 = rhs(&tmp);
        for i in 0..len {
            tmp[i] = state[i] + h * k3[i];
        }
        let k4 = rhs(&tmp);
        for i in 0..len {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Step count for duration `t` honouring the stability bound.
fn plan(spec: &FlowSpec, t: f64, bound: f64) -> Result<(usize, f64)> {
    let mut n = ((t * spec.steps_per_unit_time as f64) - 1e-9).ceil().max(1.0) as usize;
    while t / n as f64 * bound > STABILITY_LIMIT {
        if !spec.auto_refine {
            return Err(Error::Stability(format!(
                "dt = {} exceeds the RK4 bound {} for rate {bound}",
                t / n as f64,
                STABILITY_LIMIT / bound
            )));
        }
        n *= 2;
        if n > MAX_SUBSTEPS {
            return Err(Error::Stability(format!("no stable step found for rate {bound}")));
        }
    }
    Ok((n, t / n as f64))
}

/// Mode coupling `{H, ·}_ħ` for a trigonometric `H` on the full FFT-ordered spectrum.
struct Twisted {
    nq: usize,
    np: usize,
    /// Per Hamiltonian mode: shift and per-target weight `h_c w(θ)`.
    couplings: Vec<((usize, usize), Vec<Complex64>)>,
    bound: f64,
}

impl Twisted {
    fn new(space: &PhaseSpace, h: &FourierSeries, hbar: f64) -> Self {
        let (nq, np) = (space.nq, space.np);
        let mut couplings = Vec::new();
        let mut bound = 0.0;
        for (&(c, e), &hc) in &h.modes {
            if (c, e) == (0, 0) || hc.norm() == 0.0 {
                continue;
            }
            let (kqc, kpc) = space.wavenumber(c, e);
            let mut weights = Vec::with_capacity(nq * np);
            let mut wmax: f64 = 0.0;
            for a in 0..nq {
                for b in 0..np {
                    let (kqa, kpb) = space.wavenumber(signed_mode(a, nq), signed_mode(b, np));
                    let theta = kqc * kpb - kpc * kqa;
                    let w = if hbar == 0.0 { -theta } else { -2.0 / hbar * (hbar * theta / 2.0).sin() };
                    wmax = wmax.max(w.abs());
                    weights.push(hc * w);
                }
            }
            bound += hc.norm() * wmax;
            let shift = (c.rem_euclid(nq as i64) as usize, e.rem_euclid(np as i64) as usize);
            couplings.push((shift, weights));
        }
        Self { nq, np, couplings, bound }
    }

    fn rhs(&self, s: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); s.len()];
        for ((sc, se), w) in &self.couplings {
            for a in 0..self.nq {
                let ta = (a + sc) % self.nq;
                for b in 0..self.np {
                    let tb = (b + se) % self.np;
                    let idx = a * self.np + b;
                    out[ta * self.np + tb] += w[idx] * s[idx];
                }
            }
        }
        out
    }
}

/// `{H, ·}_ħ` for polynomial `H` on grid samples.
struct Series {
    fft: Fft2,
    nq: usize,
    np: usize,
    /// `(coefficient · ∂H sampled on the grid, spectral multiplier of the field derivative)`.
    terms: Vec<(Vec<f64>, Vec<Complex64>)>,
    bound: f64,
}

impl Series {
    fn new(space: &PhaseSpace, h: &Poly, hbar: f64) -> Self {
        let (nq, np) = (space.nq, space.np);
        let deg = h.degree().unwrap_or(0);
        let (kq_max, kp_max) = space.wavenumber(nq as i64 / 2, np as i64 / 2);
        let mut terms = Vec::new();
        let mut bound = 0.0;
        let mut n = 1u32;
        while n <= deg {
            let fact: f64 = (1..=n).map(f64::from).product();
            let sign = if ((n - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            let base = 2.0 * sign / (2f64.powi(n as i32) * fact) * hbar.powi(n as i32 - 1);
            for k in 0..=n {
                let binom: f64 = (0..k).map(|i| f64::from(n - i) / f64::from(i + 1)).product();
                let coef = base * binom * if k % 2 == 0 { 1.0 } else { -1.0 };
                let dh = h.derivative(n - k, k);
                if dh.is_zero() || coef == 0.0 {
                    continue;
                }
                let c = Compiled::new(&Observable::poly(space, dh));
                let mut samples = Vec::with_capacity(nq * np);
                for i in 0..nq {
                    for j in 0..np {
                        let (q, p) = space.node(i, j);
                        samples.push(coef * c.eval(q, p).re);
                    }
                }
                let smax = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                bound += smax * kq_max.powi(k as i32) * kp_max.powi((n - k) as i32);
                // field derivative ∂_p^{n−k} ∂_q^k, Nyquist modes dropped
                let mut mult = Vec::with_capacity(nq * np);
                for a in 0..nq {
                    for b in 0..np {
                        let (ma, mb) = (signed_mode(a, nq), signed_mode(b, np));
                        let nyq = (k > 0 && 2 * ma.unsigned_abs() as usize == nq)
                            || (n > k && 2 * mb.unsigned_abs() as usize == np);
                        let (kq, kp) = space.wavenumber(ma, mb);
                        let v = if nyq {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(0.0, kq).powu(k) * Complex64::new(0.0, kp).powu(n - k)
                        };
                        mult.push(v / (nq * np) as f64);
                    }
                }
                terms.push((samples, mult));
            }
            n += 2;
        }
        Self { fft: Fft2::new(nq, np), nq, np, terms, bound }
    }

    fn rhs(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut spec = f.to_vec();
        self.fft.rows_forward(&mut spec);
        self.fft.cols_forward(&mut spec);
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nq * self.np];
        for (samples, mult) in &self.terms {
            for ((b, s), m) in buf.iter_mut().zip(&spec).zip(mult) {
                *b = s * m;
            }
            self.fft.inverse(&mut buf);
            for ((o, b), h) in out.iter_mut().zip(&buf).zip(samples) {
                *o += b * h;
            }
        }
        out
    }
}

pub(super) fn evolve(f: &Grid, spec: &FlowSpec, t: f64) -> Result<Grid> {
    if t < 0.0 {
        return Err(Error::Config("rk4-moyal integrates forward in time only".into()));
    }
    let space = spec.space;
    let hbar = spec.hbar.value();
    let fft = Fft2::new(space.nq, space.np);
    match &spec.hamiltonian {
        Hamiltonian::Kicked { potential, .. } => {
            let periods = spec.kicks_for(t)?;
            let prop = MoyalPropagator::new(spec)?;
            let drift = prop.drift_table(1.0);
            let twisted = Twisted::new(&space, potential, hbar);
            let (n, h) = plan(spec, 1.0, twisted.bound)?;
            let mut data = f.data.clone();
            for _ in 0..periods {
                fft.forward(&mut data);
                rk4(&mut data, &|s| twisted.rhs(s), h, n);
                fft.inverse(&mut data);
                prop.apply_drift(&mut data, &drift, false);
            }
            Ok(Grid { space, data })
        }
        Hamiltonian::Trig(hs) => {
            let twisted = Twisted::new(&space, hs, hbar);
            let (n, h) = plan(spec, t, twisted.bound)?;
            let mut data = f.data.clone();
            fft.forward(&mut data);
            rk4(&mut data, &|s| twisted.rhs(s), h, n);
            fft.inverse(&mut data);
            Ok(Grid { space, data })
        }
        Hamiltonian::Poly(hp) => {
            let series = Series::new(&space, hp, hbar);
            let (n, h) = plan(spec, t, series.bound)?;
            let mut data = f.data.clone();
            rk4(&mut data, &|s| series.rhs(s), h, n);
            Ok(Grid { space, data })
        }
    }
}
