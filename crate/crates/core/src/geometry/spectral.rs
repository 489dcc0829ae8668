//! Dense periodic grids, sparse Fourier series and the FFT glue between them.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::space::PhaseSpace;
use crate::error::{Error, Result};

/// Outer-band energy fraction above which a grid spectrum counts as unresolved.
pub const RESOLUTION_THRESHOLD: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Forward/inverse FFT plans for an `nq x np` row-major grid.
#[derive(Clone)]
pub struct Fft2 {
    nq: usize,
    np: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}x{})", self.nq, self.np)
    }
}

impl Fft2 {
    pub fn new(nq: usize, np: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nq,
            np,
            row_fwd: planner.plan_fft_forward(np),
            row_inv: planner.plan_fft_inverse(np),
            col_fwd: planner.plan_fft_forward(nq),
            col_inv: planner.plan_fft_inverse(nq),
        }
    }

    /// Unnormalized forward transform over `p` (contiguous rows) for every `q` index.
    pub fn rows_forward(&self, data: &mut [Complex64]) {
        self.row_fwd.process(data);
    }

    pub fn rows_inverse(&self, data: &mut [Complex64]) {
        self.row_inv.process(data);
        let s = 1.0 / self.np as f64;
        data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn cols_forward(&self, data: &mut [Complex64]) {
        self.columns(data, &self.col_fwd, 1.0);
    }

    pub fn cols_inverse(&self, data: &mut [Complex64]) {
        self.columns(data, &self.col_inv, 1.0 / self.nq as f64);
    }

    fn columns(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>, scale: f64) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nq];
        for j in 0..self.np {
            for i in 0..self.nq {
                buf[i] = data[i * self.np + j];
            }
            plan.process(&mut buf);
            for i in 0..self.nq {
                data[i * self.np + j] = buf[i] * scale;
            }
        }
    }

    /// Normalized forward transform: `F_ab = (1/N²) Σ f_ij e^{-2πi(ai/Nq + bj/Np)}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.rows_forward(data);
        self.cols_forward(data);
        let s = 1.0 / (self.nq * self.np) as f64;
        data.iter_mut().for_each(|x| *x *= s);
    }

    /// Exact inverse of [`Fft2::forward`].
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.row_inv.process(data);
        self.columns(data, &self.col_inv, 1.0);
    }
}

/// Signed mode number of FFT index `k` on an `n`-point grid, in `[-n/2, n/2)`.
pub fn signed_mode(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// FFT index of signed mode `m`, or `None` outside the band.
pub fn mode_index(m: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if m < -half || m >= half {
        None
    } else {
        Some(m.rem_euclid(n as i64) as usize)
    }
}

/// Sparse trigonometric series `Σ c_ab exp(i(k_a q + k_b p))` on a periodic space.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    pub modes: BTreeMap<(i64, i64), Complex64>,
}

impl FourierSeries {
    pub fn zero() -> Self {
        Self { modes: BTreeMap::new() }
    }

    pub fn from_modes(iter: impl IntoIterator<Item = ((i64, i64), Complex64)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in iter {
            out.add(m, c);
        }
        out
    }

    /// `cos(2π a q / L_q + 2π b p / L_p)`.
    pub fn cosine(a: i64, b: i64) -> Self {
        Self::from_modes([((a, b), Complex64::new(0.5, 0.0)), ((-a, -b), Complex64::new(0.5, 0.0))])
    }

    pub fn sine(a: i64, b: i64) -> Self {
        Self::from_modes([((a, b), Complex64::new(0.0, -0.5)), ((-a, -b), Complex64::new(0.0, 0.5))])
    }

    pub fn constant(c: f64) -> Self {
        Self::from_modes([((0, 0), Complex64::new(c, 0.0))])
    }

    pub fn add(&mut self, mode: (i64, i64), c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.modes.entry(mode).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.modes.remove(&mode);
        }
    }

    pub fn coefficient(&self, mode: (i64, i64)) -> Complex64 {
        self.modes.get(&mode).copied().unwrap_or_default()
    }

    pub fn mean(&self) -> Complex64 {
        self.coefficient((0, 0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_modes(self.modes.iter().map(|(m, c)| (*m, c * s)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.modes {
            out.add(*m, *c);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn derivative(&self, space: &PhaseSpace, dq: u32, dp: u32) -> Self {
        Self::from_modes(self.modes.iter().map(|(&(a, b), c)| {
            let (kq, kp) = space.wavenumber(a, b);
            ((a, b), c * (I * kq).powu(dq) * (I * kp).powu(dp))
        }))
    }

    /// Pointwise product (discrete convolution of the mode lists).
    pub fn product(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), x) in &self.modes {
            for (&(c, d), y) in &other.modes {
                out.add((a + c, b + d), x * y);
            }
        }
        out
    }

    pub fn eval(&self, space: &PhaseSpace, q: f64, p: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|(&(a, b), c)| {
                let (kq, kp) = space.wavenumber(a, b);
                c * Complex64::from_polar(1.0, kq * q + kp * p)
            })
            .sum()
    }

    /// Normalized L² norm (Parseval): `sqrt(Σ |c_ab|²)`.
    pub fn l2_norm(&self) -> f64 {
        self.modes.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Conjugate symmetry `c(-a,-b) = conj(c(a,b))` within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.modes.iter().all(|(&(a, b), c)| (self.coefficient((-a, -b)).conj() - c).norm() <= tol)
    }

    pub fn max_mode(&self) -> (i64, i64) {
        self.modes.keys().fold((0, 0), |(ma, mb), &(a, b)| (ma.max(a.abs()), mb.max(b.abs())))
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self { modes: self.modes.iter().filter(|(_, c)| c.norm() > tol).map(|(m, c)| (*m, *c)).collect() }
    }

    /// Samples on the grid of `space`; modes outside the band alias onto it.
    pub fn to_grid(&self, space: &PhaseSpace) -> Grid {
        let (q0, p0) = space.origin();
        let mut data = vec![Complex64::new(0.0, 0.0); space.nq * space.np];
        for (&(a, b), c) in &self.modes {
            let (kq, kp) = space.wavenumber(a, b);
            let shifted = c * Complex64::from_polar(1.0, kq * q0 + kp * p0);
            let ia = (a.rem_euclid(space.nq as i64)) as usize;
            let ib = (b.rem_euclid(space.np as i64)) as usize;
            data[ia * space.np + ib] += shifted;
        }
        Fft2::new(space.nq, space.np).inverse(&mut data);
        Grid { space: *space, data }
    }
}

/// Complex samples `f(q_i, p_j)` at the grid nodes, row-major in `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub space: PhaseSpace,
    pub data: Vec<Complex64>,
}

impl Grid {
    pub fn zeros(space: &PhaseSpace) -> Self {
        Self { space: *space, data: vec![Complex64::new(0.0, 0.0); space.nq * space.np] }
    }

    pub fn from_fn(space: &PhaseSpace, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(space.nq * space.np);
        for i in 0..space.nq {
            for j in 0..space.np {
                let (q, p) = space.node(i, j);
                data.push(f(q, p));
            }
        }
        Self { space: *space, data }
    }

    pub fn from_real_fn(space: &PhaseSpace, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(space, |q, p| Complex64::new(f(q, p), 0.0))
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.space.np + j]
    }

    /// Normalized DFT coefficients in FFT index order, absolute-coordinate phases removed.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let s = &self.space;
        let mut data = self.data.clone();
        Fft2::new(s.nq, s.np).forward(&mut data);
        let (q0, p0) = s.origin();
        for ia in 0..s.nq {
            for ib in 0..s.np {
                let (kq, kp) = s.wavenumber(signed_mode(ia, s.nq), signed_mode(ib, s.np));
                data[ia * s.np + ib] *= Complex64::from_polar(1.0, -(kq * q0 + kp * p0));
            }
        }
        data
    }

    pub fn to_fourier(&self) -> FourierSeries {
        let s = &self.space;
        let spec = self.spectrum();
        let mut out = FourierSeries::zero();
        for ia in 0..s.nq {
            for ib in 0..s.np {
                out.add((signed_mode(ia, s.nq), signed_mode(ib, s.np)), spec[ia * s.np + ib]);
            }
        }
        out
    }

    /// Fraction of spectral energy in the outer eighth of the band in either direction.
    pub fn outer_band_fraction(&self) -> f64 {
        let s = &self.space;
        let spec = self.spectrum();
        let (cut_q, cut_p) = ((s.nq / 2 - s.nq / 8) as i64, (s.np / 2 - s.np / 8) as i64);
        let mut total = 0.0;
        let mut outer = 0.0;
        for ia in 0..s.nq {
            for ib in 0..s.np {
                let e = spec[ia * s.np + ib].norm_sqr();
                total += e;
                if signed_mode(ia, s.nq).abs() >= cut_q || signed_mode(ib, s.np).abs() >= cut_p {
                    outer += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }

    pub fn check_resolved(&self) -> Result<()> {
        let fraction = self.outer_band_fraction();
        if fraction > RESOLUTION_THRESHOLD {
            return Err(Error::Resolution { fraction, threshold: RESOLUTION_THRESHOLD });
        }
        Ok(())
    }

    /// Grid average, i.e. the (0,0) Fourier coefficient.
    pub fn mean(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() / self.data.len() as f64
    }

    /// Root-mean-square difference.
    pub fn l2_distance(&self, other: &Grid) -> f64 {
        let s: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum();
        (s / self.data.len() as f64).sqrt()
    }

    pub fn max_abs_difference(&self, other: &Grid) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn rms(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    /// Share of the L¹ mass of the real part carried by negative values.
    pub fn negativity_mass(&self) -> f64 {
        let (neg, total) = self.data.iter().fold((0.0, 0.0), |(n, t), z| {
            (n + (-z.re).max(0.0), t + z.re.abs())
        });
        if total == 0.0 {
            0.0
        } else {
            neg / total
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Grid {
        Grid { space: self.space, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn zip_with(&self, other: &Grid, f: impl Fn(Complex64, Complex64) -> Complex64) -> Grid {
        Grid { space: self.space, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn interpolator(&self) -> Interpolator {
        Interpolator::new(self)
    }
}

/// Evaluates the trigonometric interpolant of a grid at arbitrary points.
#[derive(Debug, Clone)]
pub struct Interpolator {
    space: PhaseSpace,
    coeffs: Vec<Complex64>,
    kq: Vec<f64>,
    kp: Vec<f64>,
}

impl Interpolator {
    pub fn new(grid: &Grid) -> Self {
        let s = grid.space;
        let kq = (0..s.nq).map(|ia| s.wavenumber(signed_mode(ia, s.nq), 0).0).collect();
        let kp = (0..s.np).map(|ib| s.wavenumber(0, signed_mode(ib, s.np)).1).collect();
        Self { space: s, coeffs: grid.spectrum(), kq, kp }
    }

    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        let np = self.space.np;
        let mut ep = Vec::with_capacity(np);
        ep.extend(self.kp.iter().map(|&k| Complex64::from_polar(1.0, k * p)));
        let mut total = Complex64::new(0.0, 0.0);
        for (ia, &k) in self.kq.iter().enumerate() {
            let row = &self.coeffs[ia * np..(ia + 1) * np];
            let inner: Complex64 = row.iter().zip(&ep).map(|(c, e)| c * e).sum();
            total += inner * Complex64::from_polar(1.0, k * q);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_round_trip_through_grid() {
        let s = PhaseSpace::standard_torus(16).unwrap();
        let f = FourierSeries::cosine(1, 0).plus(&FourierSeries::sine(2, -3));
        let g = f.to_grid(&s);
        assert!((g.at(0, 0).re - 1.0).abs() < 1e-14);
        let back = g.to_fourier().pruned(1e-14);
        assert_eq!(back.modes.len(), 4);
        assert!(back.minus(&f).l2_norm() < 1e-14);
    }

    #[test]
    fn plane_window_phases() {
        let s = PhaseSpace::plane_window((2.0 * PI, 2.0 * PI), (16, 16)).unwrap();
        let f = FourierSeries::cosine(1, 1);
        let g = f.to_grid(&s);
        let (q, p) = s.node(3, 5);
        assert!((g.at(3, 5).re - (q + p).cos()).abs() < 1e-13);
        assert!(g.to_fourier().minus(&f).pruned(1e-13).modes.is_empty());
    }

    #[test]
    fn interpolation_is_exact_for_band_limited() {
        let s = PhaseSpace::torus((1.0, 2.0), (16, 8)).unwrap();
        let f = FourierSeries::cosine(3, 1).plus(&FourierSeries::sine(1, 2));
        let it = f.to_grid(&s).interpolator();
        for &(q, p) in &[(0.123, 0.77), (0.9, 1.9), (-0.3, 3.1)] {
            assert!((it.eval(q, p) - f.eval(&s, q, p)).norm() < 1e-12);
        }
    }

    #[test]
    fn resolution_detects_rough_fields() {
        let s = PhaseSpace::standard_torus(32).unwrap();
        let smooth = FourierSeries::cosine(1, 2).to_grid(&s);
        assert!(smooth.check_resolved().is_ok());
        let rough = Grid::from_real_fn(&s, |q, _| if q < PI { 1.0 } else { 0.0 });
        assert!(matches!(rough.check_resolved(), Err(Error::Resolution { .. })));
    }
}
