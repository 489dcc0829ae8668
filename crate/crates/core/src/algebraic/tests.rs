use super::*;
use crate::entropy::{golden_mean, ks_entropy_with, partition_entropy};
use crate::geometry::{FourierSeries, PointMap};

fn unit() -> PhaseSpace {
    PhaseSpace::torus((1.0, 1.0), (64, 64)).unwrap()
}

fn halves(space: &PhaseSpace, vertical: bool) -> FiniteSubalgebra {
    let atoms = [0.0, 0.5]
        .iter()
        .map(|&a| vec![if vertical { Rect::new((a, a + 0.5), (0.0, 1.0)) } else { Rect::new((0.0, 1.0), (a, a + 0.5)) }])
        .collect();
    FiniteSubalgebra::from_partition(&FinitePartition::from_atoms(space, Support::Full, atoms).unwrap())
}

#[test]
fn state_values() {
    let s = unit();
    let st = AlgebraicState::liouville(&s, Support::Full);
    let one = Observable::fourier(&s, FourierSeries::constant(1.0));
    assert!((state_of(&one, &st).unwrap() - 1.0).norm() < 1e-12);
    let cos = Observable::fourier(&s, FourierSeries::cosine(1, 0));
    assert!(state_of(&cos, &st).unwrap().norm() < 1e-15);
    let cell = Projection { cells: vec![Rect::new((0.25, 0.5), (0.5, 0.75))] };
    assert!((state_of(&cell.to_observable(&s), &st).unwrap().re - 1.0 / 16.0).abs() < 1e-12);
    assert_eq!(st.weight(&cell), 1.0 / 16.0);

    let plane = PhaseSpace::plane_window((16.0, 16.0), (64, 64)).unwrap();
    let disk = AlgebraicState::liouville(&plane, Support::Disk { radius: 6.0 });
    let one = Observable::parse_poly(&plane, "1").unwrap();
    assert!((state_of(&one, &disk).unwrap() - 1.0).norm() < 1e-12);
}

#[test]
fn subalgebra_entropy_examples() {
    let s = unit();
    let st = AlgebraicState::liouville(&s, Support::Full);
    let quads = FiniteSubalgebra::from_partition(&FinitePartition::dyadic(&s, Support::Full, 1).unwrap());
    assert!((subalgebra_entropy(&quads, &st) - 2.0).abs() < 1e-12);
    assert_eq!(subalgebra_entropy(&FiniteSubalgebra::trivial(&s, Support::Full), &st), 0.0);
    let atoms = vec![
        vec![Rect::new((0.0, 0.5), (0.0, 1.0))],
        vec![Rect::new((0.5, 1.0), (0.0, 0.5))],
        vec![Rect::new((0.5, 1.0), (0.5, 1.0))],
    ];
    let n = FiniteSubalgebra::from_partition(&FinitePartition::from_atoms(&s, Support::Full, atoms).unwrap());
    assert!((subalgebra_entropy(&n, &st) - 1.5).abs() < 1e-12);
}

#[test]
fn subalgebra_and_partition_entropies_coincide() {
    let systems = [
        PointMapSystem::cat(),
        PointMapSystem::baker(),
        PointMapSystem::rotation(golden_mean()),
        PointMapSystem::standard(10.0),
        PointMapSystem::harmonic(6.0).unwrap(),
    ];
    for sys in &systems {
        let st = AlgebraicState::of_system(sys);
        for depth in 0..=5 {
            let p = FinitePartition::dyadic(&sys.domain, sys.support(), depth).unwrap();
            let n = FiniteSubalgebra::from_partition(&p);
            assert_eq!(subalgebra_entropy(&n, &st), partition_entropy(&p), "{} depth {depth}", sys.name);
            assert_eq!(n.to_partition().unwrap(), p);
        }
    }
}

#[test]
fn refinement_examples() {
    let s = unit();
    let st = AlgebraicState::liouville(&s, Support::Full);
    let quads = subalgebra_refinement(&halves(&s, true), &halves(&s, false)).unwrap();
    assert_eq!(quads.len(), 4);
    assert!((subalgebra_entropy(&quads, &st) - 2.0).abs() < 1e-12);
    quads.validate().unwrap();

    let n = halves(&s, true);
    let nn = subalgebra_refinement(&n, &n).unwrap();
    assert_eq!(nn.minimal_projections, n.minimal_projections);
    let nt = subalgebra_refinement(&n, &FiniteSubalgebra::trivial(&s, Support::Full)).unwrap();
    assert_eq!(nt.minimal_projections, n.minimal_projections);
}

#[test]
fn overlapping_projections_are_rejected() {
    let s = unit();
    let mut n = halves(&s, true);
    n.minimal_projections[1] = Projection { cells: vec![Rect::new((0.25, 1.0), (0.0, 1.0))] };
    assert!(n.validate().is_err());
    let other = PhaseSpace::standard_torus(64).unwrap();
    assert!(subalgebra_refinement(&n, &FiniteSubalgebra::trivial(&other, Support::Full)).is_err());
}

/// Twenty trigonometric monomials of low order.
fn test_set(space: &PhaseSpace) -> Vec<Observable> {
    let modes = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 0), (0, 2), (2, 1), (1, 2), (2, -1), (2, 2)];
    modes
        .iter()
        .flat_map(|&(a, b)| [FourierSeries::cosine(a, b), FourierSeries::sine(a, b)])
        .map(|f| Observable::fourier(space, f))
        .collect()
}

#[test]
fn endomorphisms_are_multiplicative_and_state_preserving() {
    let systems = [
        PointMapSystem::identity(),
        PointMapSystem::cat(),
        PointMapSystem::baker(),
        PointMapSystem::rotation(golden_mean()),
        PointMapSystem::standard(10.0),
    ];
    for sys in systems {
        let st = AlgebraicState::of_system(&sys);
        let endo = AlgebraicEndomorphism::new(sys);
        let set = test_set(&endo.space());
        for (i, f) in set.iter().enumerate() {
            let g = &set[(i + 7) % set.len()];
            let m = endo.multiplicativity_residual(f, g).unwrap();
            assert!(m < 1e-10, "{}: {m}", endo.system.name);
            let r = endo.invariance_residual(&st, f).unwrap();
            assert!(r < 1e-8, "{} observable {i}: {r}", endo.system.name);
        }
    }
}

#[test]
fn harmonic_endomorphism_preserves_the_disk_state() {
    let sys = PointMapSystem::harmonic(6.0).unwrap();
    let st = AlgebraicState::of_system(&sys);
    let endo = AlgebraicEndomorphism::new(sys);
    let s = endo.space();
    for (cq, cp) in [(1.0, 0.5), (-1.5, 0.0), (0.0, 2.0)] {
        let bump = Observable::grid(Grid::from_real_fn(&s, |q, p| (-((q - cq).powi(2) + (p - cp).powi(2))).exp()));
        // evaluate the bump exactly rather than through the interpolant
        let exact = |q: f64, p: f64| (-((q - cq).powi(2) + (p - cp).powi(2))).exp();
        let moved = Grid::from_real_fn(&s, |q, p| {
            let (x, y) = endo.system.apply_inverse((q, p)).unwrap();
            exact(x, y)
        });
        let r = (state_of(&Observable::grid(moved), &st).unwrap() - state_of(&bump, &st).unwrap()).norm();
        assert!(r < 1e-8, "{r}");
    }
}

#[test]
fn evolved_projections_are_preimage_indicators() {
    let endo = AlgebraicEndomorphism::new(PointMapSystem::cat());
    let n = Projection { cells: vec![Rect::new((0.0, 0.5), (0.0, 0.5))] };
    for x in crate::geometry::symplectic::sample_points(200, 0.0, 1.0) {
        let y = endo.system.apply(endo.system.apply(x));
        assert_eq!(endo.evolved_projection(&n, 2, y).unwrap(), n.value(x));
    }
}

#[test]
fn identity_endomorphism_has_zero_entropy() {
    let endo = AlgebraicEndomorphism::identity();
    let st = AlgebraicState::of_system(&endo.system);
    let r = algebraic_ks(&endo, &st, &PartitionFamily::dyadic([1, 2]), 6).unwrap();
    assert_eq!(r.ks_estimate, Some(0.0));
    assert_eq!(r.estimator, Estimator::Algebraic);
}

#[test]
fn baker_algebraic_entropy_is_one_bit() {
    let endo = AlgebraicEndomorphism::new(PointMapSystem::baker());
    let st = AlgebraicState::of_system(&endo.system);
    let r = algebraic_ks(&endo, &st, &PartitionFamily::dyadic([1, 2, 3]), 10).unwrap();
    assert!((r.value() - 1.0).abs() < 0.03, "{}", r.value());
}

fn assert_layers_agree(sys: PointMapSystem, family: &PartitionFamily, n_max: usize, config: &EntropyConfig) {
    let measure = ks_entropy_with(&sys, family, n_max, config).unwrap();
    let st = AlgebraicState::of_system(&sys);
    let algebraic = algebraic_ks_with(&AlgebraicEndomorphism::new(sys), &st, family, n_max, config).unwrap();
    assert_eq!(measure.per_partition.len(), algebraic.per_partition.len());
    for (a, b) in measure.per_partition.iter().zip(&algebraic.per_partition) {
        assert_eq!(a.n_used, b.n_used);
        for (x, y) in a.entropies.iter().zip(&b.entropies) {
            assert!((x - y).abs() < 1e-6, "{} depth {:?}: {x} vs {y}", measure.system, a.depth);
        }
    }
    assert!((measure.value() - algebraic.value()).abs() < 1e-6);
}

#[test]
fn layers_agree_on_piecewise_affine_maps() {
    let cfg = EntropyConfig::default();
    assert_layers_agree(PointMapSystem::cat(), &PartitionFamily::dyadic([1, 2]), 8, &cfg);
    assert_layers_agree(PointMapSystem::baker(), &PartitionFamily::dyadic([1, 2]), 10, &cfg);
    assert_layers_agree(PointMapSystem::rotation(golden_mean()), &PartitionFamily::dyadic([2]), 24, &cfg);
}

#[test]
fn layers_agree_on_sampled_maps() {
    let cfg = EntropyConfig { samples: 100_000, ..EntropyConfig::default() };
    assert_layers_agree(PointMapSystem::standard(10.0), &PartitionFamily::dyadic([1, 2]), 8, &cfg);
    let sampled = EntropyConfig { exact_piecewise: false, ..cfg };
    assert_layers_agree(PointMapSystem::cat(), &PartitionFamily::dyadic([1, 2]), 8, &sampled);
    let disk = PartitionFamily::dyadic([1, 2]).with_support(Support::Disk { radius: 6.0 });
    assert_layers_agree(PointMapSystem::harmonic(6.0).unwrap(), &disk, 12, &sampled);
}

#[test]
fn state_must_match_the_endomorphism() {
    let endo = AlgebraicEndomorphism::new(PointMapSystem::cat());
    let wrong = AlgebraicState::liouville(&PhaseSpace::standard_torus(64).unwrap(), Support::Full);
    assert!(algebraic_ks(&endo, &wrong, &PartitionFamily::dyadic([1]), 6).is_err());
}
