use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{grid::grid_moyal_product, Hbar, StarConfig};
use crate::error::Result;
use crate::exact::{crat, creal, CRational};
use crate::geometry::{poisson_bracket, FourierSeries, Monomial, Observable, PhaseSpace, Poly, Representation};

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64)
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// `f P^n g` with `P = ←∂_q →∂_p − ←∂_p →∂_q`.
fn bidifferential(f: &Poly, g: &Poly, n: u32) -> Poly {
    let mut out = Poly::zero();
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let c = creal(BigRational::from_integer((sign * binomial(n, k)).into()));
        let term = &f.derivative(n - k, k) * &g.derivative(k, n - k);
        out = &out + &term.scale(&c);
    }
    out
}

fn max_order(f: &Poly, g: &Poly) -> u32 {
    f.degree().unwrap_or(0).min(g.degree().unwrap_or(0))
}

/// `(i/2)^n / n!` as an exact Gaussian rational.
fn series_coefficient(n: u32) -> CRational {
    let i_half = crat(BigRational::zero(), BigRational::new(1.into(), 2.into()));
    let mut c = creal(BigRational::one());
    for _ in 0..n {
        c = &c * &i_half;
    }
    c / creal(BigRational::from_integer(factorial(n).into()))
}

/// `f ⋆ g = Σ_n (iħ/2)^n / n! · f P^n g` with `ħ` kept as a formal variable.
/// The series terminates for polynomials.
pub fn moyal_product_symbolic(f: &Poly, g: &Poly) -> Poly {
    let mut out = Poly::zero();
    for n in 0..=max_order(f, g) {
        let term = bidifferential(f, g, n);
        let hn = Poly::term(Monomial::new(0, 0, n), series_coefficient(n));
        out = &out + &(&term * &hn);
    }
    out
}

/// `(f⋆g − g⋆f)/(iħ)` with formal `ħ`: only odd orders survive, so the
/// division is exact and the `ħ⁰` part is the Poisson bracket.
pub fn moyal_bracket_symbolic(f: &Poly, g: &Poly) -> Poly {
    let mut out = Poly::zero();
    let mut n = 1;
    while n <= max_order(f, g) {
        // 2 (i/2)^n / n! / i
        let c = &series_coefficient(n) * &creal(BigRational::from_integer(2.into()))
            / crat(BigRational::zero(), BigRational::one());
        let term = bidifferential(f, g, n);
        let hn = Poly::term(Monomial::new(0, 0, n - 1), c);
        out = &out + &(&term * &hn);
        n += 2;
    }
    out
}

/// `θ = kq₁ kp₂ − kp₁ kq₂` for the wavevectors of two modes.
fn symplectic_pairing(space: &PhaseSpace, m1: (i64, i64), m2: (i64, i64)) -> f64 {
    let (kq1, kp1) = space.wavenumber(m1.0, m1.1);
    let (kq2, kp2) = space.wavenumber(m2.0, m2.1);
    kq1 * kp2 - kp1 * kq2
}

const CHUNK: usize = 64;

/// Combines every mode pair with `weight(θ)`, parallel over fixed-size chunks
/// of the left operand and merged in chunk order.
fn twisted(space: &PhaseSpace, f: &FourierSeries, g: &FourierSeries, weight: impl Fn(f64) -> Complex64 + Sync) -> FourierSeries {
    let left: Vec<_> = f.modes.iter().map(|(m, c)| (*m, *c)).collect();
    let right: Vec<_> = g.modes.iter().map(|(m, c)| (*m, *c)).collect();
    let partials: Vec<FourierSeries> = left
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = FourierSeries::zero();
            for &(m1, x) in chunk {
                for &(m2, y) in &right {
                    let w = weight(symplectic_pairing(space, m1, m2));
                    acc.add((m1.0 + m2.0, m1.1 + m2.1), x * y * w);
                }
            }
            acc
        })
        .collect();
    partials.iter().fold(FourierSeries::zero(), |acc, p| acc.plus(p))
}

/// Exact Moyal product of trigonometric series: each mode pair picks up
/// the phase `exp(−iħθ/2)`.
pub fn twisted_product(space: &PhaseSpace, f: &FourierSeries, g: &FourierSeries, hbar: f64) -> FourierSeries {
    twisted(space, f, g, |theta| Complex64::from_polar(1.0, -hbar * theta / 2.0))
}

/// Exact Moyal bracket of trigonometric series: weight `−(2/ħ) sin(ħθ/2)`,
/// which is `−θ` (the Poisson weight) at `ħ = 0`.
pub fn twisted_bracket(space: &PhaseSpace, f: &FourierSeries, g: &FourierSeries, hbar: f64) -> FourierSeries {
    twisted(space, f, g, |theta| {
        let w = if hbar == 0.0 { -theta } else { -2.0 / hbar * (hbar * theta / 2.0).sin() };
        Complex64::new(w, 0.0)
    })
}

fn any_grid(f: &Observable, g: &Observable) -> bool {
    matches!(f.repr, Representation::Grid(_)) || matches!(g.repr, Representation::Grid(_))
}

pub fn moyal_product(f: &Observable, g: &Observable, hbar: &Hbar, config: &StarConfig) -> Result<Observable> {
    f.ensure_same_space(g)?;
    let space = f.space;
    match (&f.repr, &g.repr) {
        (Representation::Poly(a), Representation::Poly(b)) => {
            Ok(Observable::poly(&space, moyal_product_symbolic(a, b).substitute_hbar(hbar.exact())))
        }
        _ if any_grid(f, g) && !config.fourier_exact => {
            let (a, b) = (f.to_grid(), g.to_grid());
            a.check_resolved()?;
            b.check_resolved()?;
            Ok(Observable::grid(grid_moyal_product(&a, &b, hbar.value(), config.truncation_order)))
        }
        _ => {
            let out = twisted_product(&space, &f.to_fourier()?, &g.to_fourier()?, hbar.value());
            Ok(if any_grid(f, g) { Observable::grid(out.to_grid(&space)) } else { Observable::fourier(&space, out) })
        }
    }
}

/// `{f, g}_ħ = (f⋆g − g⋆f)/(iħ)`; exactly the Poisson bracket at `ħ = 0`.
pub fn moyal_bracket(f: &Observable, g: &Observable, hbar: &Hbar, config: &StarConfig) -> Result<Observable> {
    f.ensure_same_space(g)?;
    if hbar.is_zero() {
        return poisson_bracket(f, g);
    }
    let space = f.space;
    match (&f.repr, &g.repr) {
        (Representation::Poly(a), Representation::Poly(b)) => {
            Ok(Observable::poly(&space, moyal_bracket_symbolic(a, b).substitute_hbar(hbar.exact())))
        }
        _ if any_grid(f, g) && !config.fourier_exact => {
            let (a, b) = (f.to_grid(), g.to_grid());
            a.check_resolved()?;
            b.check_resolved()?;
            let fg = grid_moyal_product(&a, &b, hbar.value(), config.truncation_order);
            let gf = grid_moyal_product(&b, &a, hbar.value(), config.truncation_order);
            let scale = Complex64::new(0.0, hbar.value()).inv();
            Ok(Observable::grid(fg.zip_with(&gf, |x, y| (x - y) * scale)))
        }
        _ => {
            let out = twisted_bracket(&space, &f.to_fourier()?, &g.to_fourier()?, hbar.value());
            Ok(if any_grid(f, g) { Observable::grid(out.to_grid(&space)) } else { Observable::fourier(&space, out) })
        }
    }
}

/// `|∫ f⋆g dμ − ∫ f·g dμ|` (normalized), read off the (0,0) Fourier mode.
pub fn trace_residual(f: &Observable, g: &Observable, hbar: &Hbar) -> Result<f64> {
    f.ensure_same_space(g)?;
    let (a, b) = (f.to_fourier()?, g.to_fourier()?);
    let star = twisted_product(&f.space, &a, &b, hbar.value());
    let plain = a.product(&b);
    Ok((star.mean() - plain.mean()).norm())
}
