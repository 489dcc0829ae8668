use std::f64::consts::PI;

use num_complex::Complex64;

use super::{moyal_bracket, Hbar, StarConfig};
use crate::error::{Error, Result};
use crate::geometry::{FourierSeries, MembershipReport, Observable, PhaseSpace, Point, PointMap, PolyMap, Representation};

/// `f(A x + t)` for a trigonometric series, when `Aᵀ` maps the mode lattice to itself.
pub fn compose_affine_fourier(
    space: &PhaseSpace,
    f: &FourierSeries,
    linear: [[f64; 2]; 2],
    shift: (f64, f64),
) -> Result<FourierSeries> {
    let mut out = FourierSeries::zero();
    for (&(a, b), c) in &f.modes {
        let (kq, kp) = space.wavenumber(a, b);
        let kq2 = linear[0][0] * kq + linear[1][0] * kp;
        let kp2 = linear[0][1] * kq + linear[1][1] * kp;
        let (ma, mb) = (kq2 * space.lq / (2.0 * PI), kp2 * space.lp / (2.0 * PI));
        if (ma - ma.round()).abs() > 1e-9 || (mb - mb.round()).abs() > 1e-9 {
            return Err(Error::Unsupported("affine map does not preserve the Fourier mode lattice".into()));
        }
        let phase = Complex64::from_polar(1.0, kq * shift.0 + kp * shift.1);
        out.add((ma.round() as i64, mb.round() as i64), c * phase);
    }
    Ok(out)
}

fn pull_back(phi: &PolyMap, f: &Observable) -> Result<Observable> {
    match &f.repr {
        Representation::Poly(p) => Ok(Observable::poly(&f.space, phi.pull_back(p))),
        _ => {
            let (linear, shift) = phi
                .affine_parts()
                .ok_or_else(|| Error::Unsupported("only affine maps compose with trigonometric observables".into()))?;
            Ok(Observable::fourier(&f.space, compose_affine_fourier(&f.space, &f.to_fourier()?, linear, shift)?))
        }
    }
}

/// Checks `{f,g}_ħ ∘ φ = {f∘φ, g∘φ}_ħ` on sample points.
///
/// Both sides are built symbolically (polynomial pairs) or on the mode
/// lattice (trigonometric pairs under affine maps) and only then evaluated.
pub fn quantum_symplectic_check(
    phi: &PolyMap,
    hbar: &Hbar,
    test_set: &[(Observable, Observable)],
    samples: &[Point],
    tol: f64,
    config: &StarConfig,
) -> Result<MembershipReport> {
    let mut max_residual: f64 = 0.0;
    for (f, g) in test_set {
        let lhs = moyal_bracket(f, g, hbar, config)?;
        let rhs = moyal_bracket(&pull_back(phi, f)?, &pull_back(phi, g)?, hbar, config)?;
        for &x in samples {
            let y = phi.apply(x);
            max_residual = max_residual.max((lhs.eval(y.0, y.1) - rhs.eval(x.0, x.1)).norm());
        }
    }
    Ok(MembershipReport { member: max_residual < tol, max_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::symplectic::sample_points;

    fn plane() -> PhaseSpace {
        PhaseSpace::plane_window((4.0, 4.0), (16, 16)).unwrap()
    }

    fn poly_pairs() -> Vec<(Observable, Observable)> {
        let s = plane();
        [("q^3", "p^3"), ("q^2 p", "q p^2 - p"), ("q^2", "p^2")]
            .iter()
            .map(|(f, g)| (Observable::parse_poly(&s, f).unwrap(), Observable::parse_poly(&s, g).unwrap()))
            .collect()
    }

    fn torus_pairs() -> Vec<(Observable, Observable)> {
        let s = PhaseSpace::standard_torus(16).unwrap();
        vec![
            (Observable::fourier(&s, FourierSeries::cosine(1, 0)), Observable::fourier(&s, FourierSeries::cosine(0, 1))),
            (Observable::fourier(&s, FourierSeries::sine(2, 1)), Observable::fourier(&s, FourierSeries::cosine(1, -1))),
        ]
    }

    #[test]
    fn translations_are_quantum_symplectic() {
        let phi = PolyMap::parse("q + 0.7", "p - 0.2").unwrap();
        let pts = sample_points(20, -1.0, 1.0);
        for h in [0.0, 0.1, 0.5, 1.0] {
            let h = Hbar::new(h).unwrap();
            let r = quantum_symplectic_check(&phi, &h, &poly_pairs(), &pts, 1e-9, &StarConfig::default()).unwrap();
            assert!(r.member, "{r:?}");
            let r = quantum_symplectic_check(&phi, &h, &torus_pairs(), &pts, 1e-10, &StarConfig::default()).unwrap();
            assert!(r.member, "{r:?}");
        }
    }

    #[test]
    fn cat_map_is_quantum_symplectic() {
        let phi = PolyMap::parse("2 q + p", "q + p").unwrap();
        let pts = sample_points(20, -1.0, 1.0);
        for h in [0.1, 0.5, 1.0] {
            let h = Hbar::new(h).unwrap();
            let r = quantum_symplectic_check(&phi, &h, &poly_pairs(), &pts, 1e-8, &StarConfig::default()).unwrap();
            assert!(r.member, "{r:?}");
            let r = quantum_symplectic_check(&phi, &h, &torus_pairs(), &pts, 1e-10, &StarConfig::default()).unwrap();
            assert!(r.member, "{r:?}");
        }
    }

    #[test]
    fn cubic_shear_is_not_quantum_symplectic() {
        let s = plane();
        let phi = PolyMap::parse("q", "p + q^3").unwrap();
        let pts = sample_points(20, -1.0, 1.0);
        // (q^2, p^2) cannot detect this: one side of each bracket stays quadratic
        let pair = vec![(Observable::parse_poly(&s, "p^2").unwrap(), Observable::parse_poly(&s, "p^3").unwrap())];
        let h = Hbar::new(0.5).unwrap();
        let r = quantum_symplectic_check(&phi, &h, &pair, &pts, 1e-8, &StarConfig::default()).unwrap();
        assert!(!r.member, "{r:?}");
        // the defect is O(ħ²)
        let r2 = quantum_symplectic_check(&phi, &Hbar::new(0.25).unwrap(), &pair, &pts, 1e-8, &StarConfig::default()).unwrap();
        assert!((r.max_residual / r2.max_residual - 4.0).abs() < 1e-9, "{r:?} {r2:?}");
        // classically the shear is symplectic
        let r0 = quantum_symplectic_check(&phi, &Hbar::zero(), &pair, &pts, 1e-8, &StarConfig::default()).unwrap();
        assert!(r0.member, "{r0:?}");
    }

    #[test]
    fn non_lattice_affine_map_is_unsupported() {
        let phi = PolyMap::parse("2 q", "p/2").unwrap();
        let err = quantum_symplectic_check(&phi, &Hbar::new(0.1).unwrap(), &torus_pairs(), &[(0.0, 0.0)], 1e-8, &StarConfig::default());
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }
}
