//! Classical trajectories: exact affine flows, kicked maps, Störmer–Verlet
//! for separable Hamiltonians and RK4 otherwise.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Compiled, FlowSpec, Hamiltonian, Part};
use crate::error::{Error, Result};
use crate::geometry::{gradient, Grid, Jacobian, PhaseSpace, Point, PointMap, SpaceKind};

type Mat = [[f64; 2]; 2];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn mat_vec(a: &Mat, x: Point) -> Point {
    (a[0][0] * x.0 + a[0][1] * x.1, a[1][0] * x.0 + a[1][1] * x.1)
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    /// `ẋ = A x + b` with `A` traceless.
    Affine { a: Mat, b: Point },
    Kicked { t: Part, v: Part },
    Separable { t: Part, v: Part },
    General { dq: Compiled, dp: Compiled },
}

/// Classical flow of a [`FlowSpec`], usable forwards and backwards in time.
#[derive(Debug, Clone)]
pub struct Characteristics {
    space: PhaseSpace,
    kind: Kind,
    steps_per_unit: usize,
    separable: bool,
}

impl Characteristics {
    pub fn new(spec: &FlowSpec) -> Result<Self> {
        let space = spec.space;
        let separable = spec.hamiltonian.separable(&space)?;
        let kind = if spec.hamiltonian.is_zero() {
            Kind::Identity
        } else if spec.hamiltonian.is_quadratic() {
            let Hamiltonian::Poly(h) = &spec.hamiltonian else { unreachable!() };
            let c = |dq, dp| h.derivative(dq, dp).eval(0.0, 0.0).re;
            // X_H = (∂_p H, −∂_q H) = A x + b.
            let a = [[c(1, 1), c(0, 2)], [-c(2, 0), -c(1, 1)]];
            Kind::Affine { a, b: (c(0, 1), -c(1, 0)) }
        } else if spec.hamiltonian.is_kicked() {
            let (t, v) = separable.clone().expect("kicked Hamiltonians are separable");
            Kind::Kicked { t, v }
        } else if let Some((t, v)) = separable.clone() {
            Kind::Separable { t, v }
        } else {
            let h = spec.hamiltonian.as_observable(&space).expect("autonomous Hamiltonian");
            let (dq, dp) = gradient(&h)?;
            Kind::General { dq: Compiled::new(&dq), dp: Compiled::new(&dp) }
        };
        Ok(Self { space, kind, steps_per_unit: spec.steps_per_unit_time, separable: separable.is_some() })
    }

    pub fn is_separable(&self) -> bool {
        self.separable
    }

    fn finish(&self, x: Point) -> Point {
        match self.space.kind {
            SpaceKind::Torus => self.space.wrap(x),
            SpaceKind::PlaneWindow => x,
        }
    }

    fn steps(&self, t: f64) -> (usize, f64) {
        let n = (t.abs() * self.steps_per_unit as f64 - 1e-9).ceil().max(0.0) as usize;
        if n == 0 {
            (0, 0.0)
        } else {
            (n, t / n as f64)
        }
    }

    /// `(e^{At}, ∫_0^t e^{As} ds)` for traceless `A`.
    fn affine_propagators(a: &Mat, t: f64) -> (Mat, Mat) {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let (c0, c1, s0, s1) = if det.abs() < 1e-300 {
            (1.0, t, t, t * t / 2.0)
        } else if det > 0.0 {
            let w = det.sqrt();
            ((w * t).cos(), (w * t).sin() / w, (w * t).sin() / w, (1.0 - (w * t).cos()) / det)
        } else {
            let w = (-det).sqrt();
            ((w * t).cosh(), (w * t).sinh() / w, (w * t).sinh() / w, ((w * t).cosh() - 1.0) / -det)
        };
        let comb = |x: f64, y: f64| [[x + y * a[0][0], y * a[0][1]], [y * a[1][0], x + y * a[1][1]]];
        (comb(c0, c1), comb(s0, s1))
    }

    /// Time-`t` flow `Φ_t(x)`; kicked systems need whole periods.
    pub fn flow(&self, x: Point, t: f64) -> Result<Point> {
        let y = match &self.kind {
            Kind::Identity => x,
            Kind::Affine { a, b } => {
                let (e, s) = Self::affine_propagators(a, t);
                let (u, v) = (mat_vec(&e, x), mat_vec(&s, *b));
                (u.0 + v.0, u.1 + v.1)
            }
            Kind::Kicked { t: kin, v } => {
                let r = t.round();
                if (t - r).abs() > 1e-9 {
                    return Err(Error::Config(format!("kicked systems evolve over whole periods, got t = {t}")));
                }
                let (mut q, mut p) = x;
                if r >= 0.0 {
                    for _ in 0..r as i64 {
                        p -= v.slope_q(q);
                        q += kin.slope_p(p);
                    }
                } else {
                    for _ in 0..(-r) as i64 {
                        q -= kin.slope_p(p);
                        p += v.slope_q(q);
                    }
                }
                (q, p)
            }
            Kind::Separable { t: kin, v } => {
                let (n, h) = self.steps(t);
                let (mut q, mut p) = x;
                for _ in 0..n {
                    p -= 0.5 * h * v.slope_q(q);
                    q += h * kin.slope_p(p);
                    p -= 0.5 * h * v.slope_q(q);
                }
                (q, p)
            }
            Kind::General { dq, dp } => {
                let field = |(q, p): Point| (dp.eval(q, p).re, -dq.eval(q, p).re);
                let (n, h) = self.steps(t);
                let mut y = x;
                for _ in 0..n {
                    let k1 = field(y);
                    let k2 = field((y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
                    let k3 = field((y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
                    let k4 = field((y.0 + h * k3.0, y.1 + h * k3.1));
                    y.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                    y.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                }
                y
            }
        };
        Ok(self.finish(y))
    }

    /// Exact Jacobian where available, else central differences.
    pub fn jacobian(&self, x: Point, t: f64) -> Result<Jacobian> {
        match &self.kind {
            Kind::Identity => Ok([[1.0, 0.0], [0.0, 1.0]]),
            Kind::Affine { a, .. } => Ok(Self::affine_propagators(a, t).0),
            Kind::Kicked { t: kin, v } if t >= 0.0 => {
                let h = 1e-5;
                let second = |f: &dyn Fn(f64) -> f64, z: f64| (f(z + h) - f(z - h)) / (2.0 * h);
                let mut jac = [[1.0, 0.0], [0.0, 1.0]];
                let (mut q, mut p) = x;
                for _ in 0..t.round() as i64 {
                    let vqq = second(&|z| v.slope_q(z), q);
                    p -= v.slope_q(q);
                    let tpp = second(&|z| kin.slope_p(z), p);
                    q += kin.slope_p(p);
                    // kick [[1,0],[-V''(q),1]], then drift [[1,T''(p')],[0,1]]
                    let step = [[1.0 - tpp * vqq, tpp], [-vqq, 1.0]];
                    jac = mat_mul(&step, &jac);
                }
                Ok(jac)
            }
            _ => {
                let h = 1e-6;
                let f = |y: Point| self.flow_unwrapped(y, t);
                let (qp, qm) = (f((x.0 + h, x.1))?, f((x.0 - h, x.1))?);
                let (pp, pm) = (f((x.0, x.1 + h))?, f((x.0, x.1 - h))?);
                Ok([
                    [(qp.0 - qm.0) / (2.0 * h), (pp.0 - pm.0) / (2.0 * h)],
                    [(qp.1 - qm.1) / (2.0 * h), (pp.1 - pm.1) / (2.0 * h)],
                ])
            }
        }
    }

    fn flow_unwrapped(&self, x: Point, t: f64) -> Result<Point> {
        let plane = Self { space: PhaseSpace { kind: SpaceKind::PlaneWindow, ..self.space }, ..self.clone() };
        plane.flow(x, t)
    }

    /// Samples `f ∘ Φ_{-t}` on the grid nodes.
    pub fn transport(&self, f: &(dyn Fn(Point) -> Complex64 + Sync), t: f64) -> Result<Grid> {
        let s = self.space;
        let data = (0..s.nq * s.np)
            .into_par_iter()
            .map(|idx| {
                let x = s.node(idx / s.np, idx % s.np);
                self.flow(x, -t).map(f)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid { space: s, data })
    }
}

/// The classical time-`t` map of a flow as a [`PointMap`].
#[derive(Debug, Clone)]
pub struct FlowPointMap {
    chars: Characteristics,
    t: f64,
}

impl FlowPointMap {
    pub fn new(spec: &FlowSpec, t: f64) -> Result<Self> {
        let chars = Characteristics::new(spec)?;
        chars.flow((0.0, 0.0), t)?;
        Ok(Self { chars, t })
    }
}

impl FlowPointMap {
    pub fn apply_inverse(&self, x: Point) -> Result<Point> {
        self.chars.flow(x, -self.t)
    }
}

impl PointMap for FlowPointMap {
    fn apply(&self, x: Point) -> Point {
        self.chars.flow(x, self.t).expect("time validated at construction")
    }

    fn jacobian(&self, x: Point) -> Jacobian {
        self.chars.jacobian(x, self.t).expect("time validated at construction")
    }
}
