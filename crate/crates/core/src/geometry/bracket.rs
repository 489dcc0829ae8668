use num_complex::Complex64;

use super::observable::{Observable, Representation};
use super::poly::Poly;
use super::spectral::FourierSeries;
use crate::error::Result;

fn poly_bracket(f: &Poly, g: &Poly) -> Poly {
    &(&f.derivative_q(1) * &g.derivative_p(1)) - &(&f.derivative_p(1) * &g.derivative_q(1))
}

fn fourier_bracket(space: &super::space::PhaseSpace, f: &FourierSeries, g: &FourierSeries) -> FourierSeries {
    let mut out = FourierSeries::zero();
    for (&(a, b), x) in &f.modes {
        let (ka, kb) = space.wavenumber(a, b);
        for (&(c, d), y) in &g.modes {
            let (kc, kd) = space.wavenumber(c, d);
            // (i ka)(i kd) - (i kb)(i kc)
            out.add((a + c, b + d), x * y * -(ka * kd - kb * kc));
        }
    }
    out
}

/// `{f, g} = ∂_q f ∂_p g − ∂_p f ∂_q g`.
///
/// Exact for two polynomials; any other combination is computed on the
/// Fourier side, and the result is a grid when either input was one.
pub fn poisson_bracket(f: &Observable, g: &Observable) -> Result<Observable> {
    f.ensure_same_space(g)?;
    let space = f.space;
    match (&f.repr, &g.repr) {
        (Representation::Poly(a), Representation::Poly(b)) => Ok(Observable::poly(&space, poly_bracket(a, b))),
        _ => {
            let out = fourier_bracket(&space, &f.to_fourier()?, &g.to_fourier()?);
            let any_grid = matches!(f.repr, Representation::Grid(_)) || matches!(g.repr, Representation::Grid(_));
            Ok(if any_grid {
                Observable::grid(out.to_grid(&space))
            } else {
                Observable::fourier(&space, out)
            })
        }
    }
}

/// `(∂_q f, ∂_p f)` as observables of the same kind (grids become Fourier series).
pub fn gradient(f: &Observable) -> Result<(Observable, Observable)> {
    let s = f.space;
    Ok(match &f.repr {
        Representation::Poly(p) => (Observable::poly(&s, p.derivative_q(1)), Observable::poly(&s, p.derivative_p(1))),
        _ => {
            let four = f.to_fourier()?;
            (Observable::fourier(&s, four.derivative(&s, 1, 0)), Observable::fourier(&s, four.derivative(&s, 0, 1)))
        }
    })
}

/// `X_H = (∂_p H, −∂_q H)` at `point`; the point is wrapped on a torus.
pub fn hamiltonian_vector_field(h: &Observable, point: (f64, f64)) -> Result<(f64, f64)> {
    let (q, p) = match h.space.kind {
        super::space::SpaceKind::Torus => h.space.wrap(point),
        super::space::SpaceKind::PlaneWindow => point,
    };
    let (dq, dp) = gradient(h)?;
    let (hq, hp): (Complex64, Complex64) = (dq.eval(q, p), dp.eval(q, p));
    Ok((hp.re, -hq.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::space::PhaseSpace;
    use crate::geometry::spectral::Grid;
    use crate::error::Error;

    fn plane() -> PhaseSpace {
        PhaseSpace::plane_window((8.0, 8.0), (32, 32)).unwrap()
    }

    fn poly(s: &str) -> Observable {
        Observable::parse_poly(&plane(), s).unwrap()
    }

    #[test]
    fn canonical_pair_and_antisymmetry() {
        assert_eq!(poisson_bracket(&poly("q"), &poly("p")).unwrap(), poly("1"));
        let h = poly("p^2/2 + q^4 - q p");
        assert_eq!(poisson_bracket(&h, &h).unwrap(), poly("0"));
    }

    #[test]
    fn squares_oracle() {
        // ∂_q(q²)·∂_p(p²) = 2q·2p
        assert_eq!(poisson_bracket(&poly("q^2"), &poly("p^2")).unwrap(), poly("4 q p"));
    }

    #[test]
    fn mismatched_spaces() {
        let other = PhaseSpace::standard_torus(16).unwrap();
        let f = Observable::parse_poly(&other, "q").unwrap();
        assert_eq!(poisson_bracket(&f, &poly("p")), Err(Error::MismatchedSpace));
    }

    #[test]
    fn fourier_bracket_matches_hand_derivative() {
        let s = PhaseSpace::standard_torus(32).unwrap();
        let f = Observable::fourier(&s, FourierSeries::sine(1, 0));
        let g = Observable::fourier(&s, FourierSeries::sine(0, 1));
        // {sin q, sin p} = cos q cos p
        let b = poisson_bracket(&f, &g).unwrap();
        for &(q, p) in &[(0.3, 1.2), (2.0, -0.7)] {
            assert!((b.eval(q, p).re - q.cos() * p.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn unresolved_grid_is_rejected() {
        let s = PhaseSpace::standard_torus(32).unwrap();
        let rough = Observable::grid(Grid::from_real_fn(&s, |q, _| if q < 1.0 { 1.0 } else { 0.0 }));
        let smooth = Observable::fourier(&s, FourierSeries::cosine(1, 1));
        assert!(matches!(poisson_bracket(&rough, &smooth), Err(Error::Resolution { .. })));
    }

    #[test]
    fn vector_fields() {
        let h = poly("(q^2 + p^2)/2");
        assert_eq!(hamiltonian_vector_field(&h, (1.0, 0.0)).unwrap(), (0.0, -1.0));
        assert_eq!(hamiltonian_vector_field(&poly("7/3"), (0.4, -2.0)).unwrap(), (0.0, 0.0));
        assert_eq!(hamiltonian_vector_field(&poly("p"), (0.4, -2.0)).unwrap(), (1.0, 0.0));
    }
}
