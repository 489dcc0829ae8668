//! Point maps of phase space and the symplectic membership test.

use super::bracket::{gradient, poisson_bracket};
use super::observable::Observable;
use super::poly::Poly;
use crate::error::Result;

pub type Point = (f64, f64);
pub type Jacobian = [[f64; 2]; 2];

/// A forward map of phase space.
pub trait PointMap: Send + Sync {
    fn apply(&self, x: Point) -> Point;

    /// Central-difference Jacobian unless the map knows better.
    fn jacobian(&self, x: Point) -> Jacobian {
        let h = 1e-6;
        let (qp, qm) = (self.apply((x.0 + h, x.1)), self.apply((x.0 - h, x.1)));
        let (pp, pm) = (self.apply((x.0, x.1 + h)), self.apply((x.0, x.1 - h)));
        [
            [(qp.0 - qm.0) / (2.0 * h), (pp.0 - pm.0) / (2.0 * h)],
            [(qp.1 - qm.1) / (2.0 * h), (pp.1 - pm.1) / (2.0 * h)],
        ]
    }
}

/// Adapts a closure into a [`PointMap`].
pub struct FnMap<F>(pub F);

impl<F: Fn(Point) -> Point + Send + Sync> PointMap for FnMap<F> {
    fn apply(&self, x: Point) -> Point {
        (self.0)(x)
    }
}

/// A polynomial map `(q, p) -> (Q(q,p), P(q,p))`, composable with polynomial observables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    pub q: Poly,
    pub p: Poly,
}

impl PolyMap {
    pub fn new(q: Poly, p: Poly) -> Self {
        Self { q, p }
    }

    pub fn parse(q: &str, p: &str) -> Result<Self> {
        Ok(Self::new(Poly::parse(q)?, Poly::parse(p)?))
    }

    /// `f ∘ φ`.
    pub fn pull_back(&self, f: &Poly) -> Poly {
        f.compose(&self.q, &self.p)
    }

    /// Linear part when the map is affine: `([[a, b], [c, d]], (tq, tp))`.
    pub fn affine_parts(&self) -> Option<(Jacobian, Point)> {
        if self.q.degree().unwrap_or(0) > 1 || self.p.degree().unwrap_or(0) > 1 {
            return None;
        }
        let c = |poly: &Poly, m: (u32, u32)| {
            crate::exact::to_c64(&poly.coefficient(super::poly::Monomial::new(m.0, m.1, 0))).re
        };
        Some((
            [[c(&self.q, (1, 0)), c(&self.q, (0, 1))], [c(&self.p, (1, 0)), c(&self.p, (0, 1))]],
            (c(&self.q, (0, 0)), c(&self.p, (0, 0))),
        ))
    }
}

impl PointMap for PolyMap {
    fn apply(&self, (q, p): Point) -> Point {
        (self.q.eval(q, p).re, self.p.eval(q, p).re)
    }

    fn jacobian(&self, (q, p): Point) -> Jacobian {
        [
            [self.q.derivative_q(1).eval(q, p).re, self.q.derivative_p(1).eval(q, p).re],
            [self.p.derivative_q(1).eval(q, p).re, self.p.derivative_p(1).eval(q, p).re],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    pub max_residual: f64,
}

/// Checks `{f,g} ∘ φ = {f ∘ φ, g ∘ φ}` on sample points.
///
/// The right-hand side uses the chain rule `∇(f ∘ φ) = Dφᵀ (∇f ∘ φ)`.
pub fn symplectic_check(
    phi: &dyn PointMap,
    test_set: &[(Observable, Observable)],
    samples: &[Point],
    tol: f64,
) -> Result<MembershipReport> {
    let mut max_residual: f64 = 0.0;
    for (f, g) in test_set {
        let fg = poisson_bracket(f, g)?;
        let (fq, fp) = gradient(f)?;
        let (gq, gp) = gradient(g)?;
        for &x in samples {
            let y = phi.apply(x);
            let lhs = fg.eval(y.0, y.1);
            let j = phi.jacobian(x);
            let (a, b) = (fq.eval(y.0, y.1), fp.eval(y.0, y.1));
            let (c, d) = (gq.eval(y.0, y.1), gp.eval(y.0, y.1));
            let grad_f = (j[0][0] * a + j[1][0] * b, j[0][1] * a + j[1][1] * b);
            let grad_g = (j[0][0] * c + j[1][0] * d, j[0][1] * c + j[1][1] * d);
            let rhs = grad_f.0 * grad_g.1 - grad_f.1 * grad_g.0;
            max_residual = max_residual.max((lhs - rhs).norm());
        }
    }
    Ok(MembershipReport { member: max_residual < tol, max_residual })
}

/// Deterministic quasi-random sample points in `[lo, hi]²` (additive recurrence).
pub fn sample_points(n: usize, lo: f64, hi: f64) -> Vec<Point> {
    let (a1, a2) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_3);
    (0..n)
        .map(|k| {
            let k = k as f64 + 0.5;
            (lo + (hi - lo) * (k * a1).fract(), lo + (hi - lo) * (k * a2).fract())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::space::PhaseSpace;

    fn pairs(space: &PhaseSpace) -> Vec<(Observable, Observable)> {
        [("q", "p"), ("q^2 p", "p^3 - q"), ("q p", "q^2 + p")]
            .iter()
            .map(|(f, g)| (Observable::parse_poly(space, f).unwrap(), Observable::parse_poly(space, g).unwrap()))
            .collect()
    }

    #[test]
    fn translation_is_symplectic() {
        let s = PhaseSpace::plane_window((4.0, 4.0), (16, 16)).unwrap();
        let phi = PolyMap::parse("q + 0.3", "p - 1.25").unwrap();
        let r = symplectic_check(&phi, &pairs(&s), &sample_points(50, -1.0, 1.0), 1e-10).unwrap();
        assert!(r.member && r.max_residual < 1e-10, "{r:?}");
    }

    #[test]
    fn cat_map_is_symplectic() {
        let s = PhaseSpace::plane_window((4.0, 4.0), (16, 16)).unwrap();
        let phi = PolyMap::parse("2 q + p", "q + p").unwrap();
        let r = symplectic_check(&phi, &pairs(&s), &sample_points(50, -1.0, 1.0), 1e-9).unwrap();
        assert!(r.member, "{r:?}");
    }

    #[test]
    fn scaling_is_not() {
        let s = PhaseSpace::plane_window((4.0, 4.0), (16, 16)).unwrap();
        let phi = PolyMap::parse("2 q", "2 p").unwrap();
        let canonical = vec![pairs(&s).remove(0)];
        let r = symplectic_check(&phi, &canonical, &sample_points(10, -1.0, 1.0), 1e-10).unwrap();
        // det Dφ = 4, so the residual is 3 |{q, p}| = 3
        assert!(!r.member);
        assert!((r.max_residual - 3.0).abs() < 1e-12);
    }

    #[test]
    fn finite_difference_jacobian_of_closure() {
        let m = FnMap(|(q, p): Point| (q + p.sin(), p));
        let j = m.jacobian((0.1, 0.4));
        assert!((j[0][1] - 0.4f64.cos()).abs() < 1e-8);
    }
}
