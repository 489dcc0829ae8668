use super::*;
use crate::geometry::PointMap;
use std::f64::consts::PI;

fn gaussian(space: &PhaseSpace, q0: f64, p0: f64) -> Observable {
    Observable::grid(Grid::from_real_fn(space, |q, p| (-((q - q0).powi(2) + (p - p0).powi(2))).exp()))
}

fn gaussian_at(x: (f64, f64), q0: f64, p0: f64) -> f64 {
    (-((x.0 - q0).powi(2) + (x.1 - p0).powi(2))).exp()
}

fn harmonic(hbar: f64) -> FlowSpec {
    FlowSpec::harmonic(16.0, 64, Hbar::new(hbar).unwrap()).unwrap()
}

fn smooth_torus(space: &PhaseSpace) -> Observable {
    Observable::grid(Grid::from_real_fn(space, |q, p| (q.cos() + 0.5 * (p - 1.0).sin()).exp()))
}

#[test]
fn zero_hamiltonian_is_identity() {
    let space = PhaseSpace::plane_window((16.0, 16.0), (32, 32)).unwrap();
    let spec = FlowSpec::new(space, Hamiltonian::parse_poly("3").unwrap(), Hbar::new(0.3).unwrap(), Scheme::SplitStepMoyal).unwrap();
    let f = gaussian(&space, 0.5, -1.0);
    let out = moyal_step(&f, &spec, 2.7).unwrap();
    assert!(out.field.max_abs_difference(&f.to_grid()) < 1e-12);
}

#[test]
fn harmonic_rotation_matches_closed_form() {
    let spec = harmonic(0.0).with_scheme(Scheme::SemiLagrangianDensity);
    let f = gaussian(&spec.space, 1.5, 0.5);
    let t = 0.7;
    let out = liouville_step(&f, &spec, t).unwrap();
    // q(t) = q cos t + p sin t, p(t) = p cos t − q sin t; sample at the preimage.
    let oracle = Grid::from_real_fn(&spec.space, |q, p| {
        let pre = (q * t.cos() - p * t.sin(), p * t.cos() + q * t.sin());
        gaussian_at(pre, 1.5, 0.5)
    });
    let err = out.field.max_abs_difference(&oracle);
    assert!(err < 1e-9, "{err}");
}

#[test]
fn harmonic_full_period_returns_the_field() {
    for hbar in [0.0, 0.1] {
        let spec = harmonic(hbar);
        let f = gaussian(&spec.space, 1.5, 0.5);
        let out = evolve(&f, &spec, 2.0 * PI).unwrap();
        assert!(out.field.max_abs_difference(&f.to_grid()) < 1e-8);
    }
}

#[test]
fn shear_flow_preserves_area_of_a_square() {
    let space = PhaseSpace::plane_window((8.0, 8.0), (16, 16)).unwrap();
    let spec = FlowSpec::new(space, Hamiltonian::parse_poly("p^2/2").unwrap(), Hbar::zero(), Scheme::LeapfrogPoints).unwrap();
    let map = FlowPointMap::new(&spec, 1.3).unwrap();
    let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].map(|x| map.apply(x));
    let area: f64 = (0..4)
        .map(|k| {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0;
    assert!((area.abs() - 1.0).abs() < 1e-10);
}

#[test]
fn pendulum_flow_has_unit_jacobian() {
    let space = PhaseSpace::standard_torus(16).unwrap();
    let h = Hamiltonian::Trig(FourierSeries::cosine(1, 0).scale(Complex64::new(-1.0, 0.0)).plus(&FourierSeries::cosine(0, 1)));
    let spec = FlowSpec::new(space, h, Hbar::zero(), Scheme::LeapfrogPoints).unwrap();
    let map = FlowPointMap::new(&spec, 2.0).unwrap();
    for x in crate::geometry::symplectic::sample_points(20, 0.0, 2.0 * PI) {
        let j = map.jacobian(x);
        assert!((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn classical_limit_of_split_step_matches_characteristics() {
    let space = PhaseSpace::standard_torus(64).unwrap();
    let spec = FlowSpec::new(space, Hamiltonian::kicked_rotor(0.3), Hbar::zero(), Scheme::SplitStepMoyal).unwrap();
    let f = smooth_torus(&space);
    let quantum = moyal_step(&f, &spec, 1.0).unwrap();
    let exact = Grid::from_real_fn(&space, |q, p| {
        // preimage of (q, p) under the kicked rotor
        let q0 = q - p;
        let p0 = p - 0.3 * q0.sin();
        (q0.cos() + 0.5 * (p0 - 1.0).sin()).exp()
    });
    assert!(quantum.field.max_abs_difference(&exact) < 1e-9);
    let classical = liouville_step(&f, &spec.clone().with_scheme(Scheme::SemiLagrangianDensity), 1.0).unwrap();
    assert!(quantum.field.max_abs_difference(&classical.field) < 1e-9);
}

#[test]
fn quadratic_hamiltonians_ignore_hbar() {
    let space = PhaseSpace::plane_window((16.0, 16.0), (64, 64)).unwrap();
    let h = Hamiltonian::parse_poly("(q^2 + p^2)/2").unwrap();
    let f = gaussian(&space, 1.0, -0.5).to_grid();
    let reference = {
        let spec = FlowSpec::new(space, h.clone(), Hbar::zero(), Scheme::SplitStepMoyal).unwrap();
        MoyalPropagator::new(&spec).unwrap().evolve(&f, 1.0).unwrap()
    };
    for hbar in [0.01, 0.1, 0.5, 1.0] {
        let spec = FlowSpec::new(space, h.clone(), Hbar::new(hbar).unwrap(), Scheme::SplitStepMoyal).unwrap();
        let split = MoyalPropagator::new(&spec).unwrap().evolve(&f, 1.0).unwrap();
        assert!(split.max_abs_difference(&reference) < 1e-10, "hbar = {hbar}");
        let routed = moyal_step(&Observable::grid(f.clone()), &spec, 1.0).unwrap();
        let classical = liouville_step(&Observable::grid(f.clone()), &spec, 1.0).unwrap();
        assert!(routed.field.max_abs_difference(&classical.field) < 1e-12);
    }
}

#[test]
fn kicked_rk4_converges_to_split_step() {
    let space = PhaseSpace::standard_torus(64).unwrap();
    let base = FlowSpec::new(space, Hamiltonian::kicked_rotor(1.0), Hbar::new(0.1).unwrap(), Scheme::SplitStepMoyal).unwrap();
    let f = smooth_torus(&space);
    let split = moyal_step(&f, &base, 1.0).unwrap();
    let fine = FlowSpec::with_steps(space, Hamiltonian::kicked_rotor(1.0), Hbar::new(0.1).unwrap(), Scheme::Rk4Moyal, 6400).unwrap();
    let rk = moyal_step(&f, &fine, 1.0).unwrap();
    assert!(rk.field.l2_distance(&split.field) < 1e-6);
}

#[test]
fn rk4_series_matches_characteristics_classically() {
    let space = PhaseSpace::plane_window((16.0, 16.0), (64, 64)).unwrap();
    let h = Hamiltonian::parse_poly("(q^2 + p^2)/2 + q^2 p^2/20").unwrap();
    let f = gaussian(&space, 0.5, 0.0);
    let quantum = moyal_step(&f, &FlowSpec::new(space, h.clone(), Hbar::zero(), Scheme::Rk4Moyal).unwrap(), 0.25).unwrap();
    let classical = FlowSpec::with_steps(space, h, Hbar::zero(), Scheme::SemiLagrangianDensity, 1024).unwrap();
    let chars = classical.characteristics().unwrap();
    let oracle = chars.transport(&|x| Complex64::new(gaussian_at(x, 0.5, 0.0), 0.0), 0.25).unwrap();
    assert!(quantum.field.max_abs_difference(&oracle) < 1e-6);
}

#[test]
fn time_one_map_is_the_chirikov_map() {
    let k = 10.0;
    let spec = FlowSpec::kicked_rotor(k, 32, Hbar::zero()).unwrap();
    let map = TimeOneMap::new(&spec).unwrap().point_map().unwrap();
    for (q, p) in crate::geometry::symplectic::sample_points(1000, 0.0, 2.0 * PI) {
        let p1 = p + k * q.sin();
        let q1 = q + p1;
        let expected = (q1.rem_euclid(2.0 * PI), p1.rem_euclid(2.0 * PI));
        let got = map.apply((q, p));
        let dq = (got.0 - expected.0 + PI).rem_euclid(2.0 * PI) - PI;
        let dp = (got.1 - expected.1 + PI).rem_euclid(2.0 * PI) - PI;
        assert!(dq.abs() < 1e-9 && dp.abs() < 1e-9);
    }
}

#[test]
fn group_property_and_reversibility() {
    let spec = FlowSpec::kicked_rotor(2.0, 64, Hbar::new(0.2).unwrap()).unwrap();
    let f = smooth_torus(&spec.space);
    let one = TimeOneMap::new(&spec).unwrap();
    let twice = one.apply_n(&f, 2).unwrap();
    let direct = moyal_step(&f, &spec, 2.0).unwrap();
    assert!(twice.field.max_abs_difference(&direct.field) < 1e-12);
    let back = moyal_step(&Observable::grid(direct.field), &spec, -2.0).unwrap();
    assert!(back.field.max_abs_difference(&f.to_grid()) < 1e-11);

    let h = harmonic(0.0).with_scheme(Scheme::SemiLagrangianDensity);
    let g = gaussian(&h.space, 1.0, 1.0);
    let split = liouville_step(&Observable::grid(liouville_step(&g, &h, 0.4).unwrap().field), &h, 0.9).unwrap();
    let whole = liouville_step(&g, &h, 1.3).unwrap();
    assert!(split.field.max_abs_difference(&whole.field) < 1e-8);
}

#[test]
fn evolution_preserves_the_state() {
    let spec = FlowSpec::kicked_rotor(10.0, 64, Hbar::new(0.05).unwrap()).unwrap();
    let f = smooth_torus(&spec.space);
    assert!(state_invariance_check(&spec, &f, 5.0).unwrap() < 1e-12);
    let h = harmonic(0.3);
    let g = gaussian(&h.space, 1.0, 0.0);
    assert!(state_invariance_check(&h, &g, 1.0).unwrap() < 1e-10);
}

#[test]
fn invalid_requests_are_rejected() {
    let spec = FlowSpec::kicked_rotor(1.0, 16, Hbar::new(0.1).unwrap()).unwrap();
    let f = smooth_torus(&spec.space);
    assert!(matches!(moyal_step(&f, &spec, 0.5), Err(Error::Config(_))));

    let mut rk = FlowSpec::with_steps(spec.space, Hamiltonian::kicked_rotor(50.0), Hbar::new(0.1).unwrap(), Scheme::Rk4Moyal, 4).unwrap();
    rk.auto_refine = false;
    assert!(matches!(moyal_step(&f, &rk, 1.0), Err(Error::Stability(_))));
    rk.auto_refine = true;
    assert!(moyal_step(&f, &rk, 1.0).is_ok());

    let space = PhaseSpace::plane_window((8.0, 8.0), (16, 16)).unwrap();
    let mixed = FlowSpec::new(space, Hamiltonian::parse_poly("q^2 p^2").unwrap(), Hbar::zero(), Scheme::LeapfrogPoints).unwrap();
    assert!(matches!(liouville_step(&gaussian(&space, 0.0, 0.0), &mixed, 1.0), Err(Error::Config(_))));
    let split = mixed.clone().with_scheme(Scheme::SplitStepMoyal).with_hbar(Hbar::new(0.1).unwrap());
    assert!(matches!(moyal_step(&gaussian(&space, 0.0, 0.0), &split, 1.0), Err(Error::Config(_))));

    assert!(FlowSpec::new(space, Hamiltonian::kicked_rotor(1.0), Hbar::zero(), Scheme::SplitStepMoyal).is_err());
}
