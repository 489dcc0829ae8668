use super::{moyal_bracket, Hbar, StarConfig};
use crate::error::{Error, Result};
use crate::geometry::{poisson_bracket, Observable, Representation};

const DEGENERATE_FLOOR: f64 = 1e-13;

fn norm(obs: &Observable) -> Result<f64> {
    Ok(match &obs.repr {
        Representation::Poly(p) => p.coefficient_norm(),
        Representation::Fourier(f) => f.l2_norm(),
        Representation::Grid(g) => g.rms(),
    })
}

fn difference(a: &Observable, b: &Observable) -> Result<Observable> {
    if let (Representation::Poly(x), Representation::Poly(y)) = (&a.repr, &b.repr) {
        return Ok(Observable::poly(&a.space, x - y));
    }
    if matches!(a.repr, Representation::Grid(_)) || matches!(b.repr, Representation::Grid(_)) {
        return Ok(Observable::grid(a.to_grid().zip_with(&b.to_grid(), |u, v| u - v)));
    }
    Ok(Observable::fourier(&a.space, a.to_fourier()?.minus(&b.to_fourier()?)))
}

/// Least-squares slope of `log ‖{f,g}_ħ − {f,g}‖` against `log ħ`.
///
/// The norm is the coefficient 2-norm for polynomials and the normalized L²
/// norm otherwise; the slope does not depend on that choice.
pub fn classical_limit_fit(f: &Observable, g: &Observable, hbar_grid: &[f64], config: &StarConfig) -> Result<f64> {
    if hbar_grid.len() < 2 || hbar_grid.iter().any(|&h| h.is_nan() || h <= 0.0) {
        return Err(Error::Config("hbar grid needs at least two positive values".into()));
    }
    let (lo, hi) = hbar_grid.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    if (hi / lo).log10() < 1.5 - 1e-12 {
        return Err(Error::Config(format!("hbar grid spans {:.2} decades; need at least 1.5", (hi / lo).log10())));
    }
    let classical = poisson_bracket(f, g)?;
    let mut points = Vec::with_capacity(hbar_grid.len());
    for &h in hbar_grid {
        let quantum = moyal_bracket(f, g, &Hbar::new(h)?, config)?;
        points.push((h.ln(), norm(&difference(&quantum, &classical)?)?));
    }
    if points.iter().all(|&(_, d)| d < DEGENERATE_FLOOR) {
        return Err(Error::DegenerateFit { floor: DEGENERATE_FLOOR });
    }
    if points.iter().any(|&(_, d)| d <= 0.0) {
        return Err(Error::DegenerateFit { floor: DEGENERATE_FLOOR });
    }
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, d)| (a + x, b + d.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, d)| (a + (x - mx) * (d.ln() - my), b + (x - mx) * (x - mx)));
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FourierSeries, PhaseSpace};

    fn log_grid() -> Vec<f64> {
        (0..=8).map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 8.0)).collect()
    }

    #[test]
    fn cubic_pair_has_slope_two() {
        let s = PhaseSpace::plane_window((4.0, 4.0), (16, 16)).unwrap();
        let f = Observable::parse_poly(&s, "q^3").unwrap();
        let g = Observable::parse_poly(&s, "p^3").unwrap();
        let slope = classical_limit_fit(&f, &g, &log_grid(), &StarConfig::default()).unwrap();
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn quadratic_pair_is_degenerate() {
        let s = PhaseSpace::plane_window((4.0, 4.0), (16, 16)).unwrap();
        let f = Observable::parse_poly(&s, "q^2").unwrap();
        let g = Observable::parse_poly(&s, "p^2").unwrap();
        assert!(matches!(
            classical_limit_fit(&f, &g, &log_grid(), &StarConfig::default()),
            Err(Error::DegenerateFit { .. })
        ));
    }

    #[test]
    fn trig_pair_has_slope_two() {
        let s = PhaseSpace::standard_torus(16).unwrap();
        let f = Observable::fourier(&s, FourierSeries::cosine(1, 0));
        let g = Observable::fourier(&s, FourierSeries::cosine(0, 1));
        let slope = classical_limit_fit(&f, &g, &log_grid(), &StarConfig::default()).unwrap();
        assert!((slope - 2.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn narrow_grid_rejected() {
        let s = PhaseSpace::standard_torus(16).unwrap();
        let f = Observable::fourier(&s, FourierSeries::cosine(1, 0));
        assert!(matches!(classical_limit_fit(&f, &f, &[0.01, 0.1], &StarConfig::default()), Err(Error::Config(_))));
    }
}
