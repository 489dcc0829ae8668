use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::flow::FlowSpec;
use crate::geometry::{Grid, PhaseSpace, Support};
use crate::starproduct::Hbar;

fn unit() -> PhaseSpace {
    PhaseSpace::torus((1.0, 1.0), (16, 16)).unwrap()
}

fn strips_q(cuts: &[f64]) -> FinitePartition {
    let mut edges = vec![0.0];
    edges.extend_from_slice(cuts);
    edges.push(1.0);
    let atoms = edges.windows(2).map(|w| vec![Rect::new((w[0], w[1]), (0.0, 1.0))]).collect();
    FinitePartition::from_atoms(&unit(), Support::Full, atoms).unwrap()
}

fn strips_p(cuts: &[f64]) -> FinitePartition {
    let mut edges = vec![0.0];
    edges.extend_from_slice(cuts);
    edges.push(1.0);
    let atoms = edges.windows(2).map(|w| vec![Rect::new((0.0, 1.0), (w[0], w[1]))]).collect();
    FinitePartition::from_atoms(&unit(), Support::Full, atoms).unwrap()
}

fn small(samples: usize) -> EntropyConfig {
    EntropyConfig { samples, ..EntropyConfig::default() }
}

#[test]
fn entropy_of_simple_partitions() {
    assert!((partition_entropy(&FinitePartition::dyadic(&unit(), Support::Full, 1).unwrap()) - 2.0).abs() < 1e-12);
    assert!((partition_entropy(&strips_q(&[0.5])) - 1.0).abs() < 1e-12);
    assert!((partition_entropy(&strips_q(&[0.5, 0.75])) - 1.5).abs() < 1e-12);
    assert_eq!(partition_entropy(&FinitePartition::trivial(&unit(), Support::Full)), 0.0);
}

#[test]
fn atoms_must_cover_the_support() {
    let atoms = vec![vec![Rect::new((0.0, 0.5), (0.0, 1.0))]];
    assert!(FinitePartition::from_atoms(&unit(), Support::Full, atoms).is_err());
}

#[test]
fn refinement_of_halves_is_quadrants() {
    let joined = coarsest_refinement(&strips_q(&[0.5]), &strips_p(&[0.5])).unwrap();
    assert_eq!(joined.len(), 4);
    assert!((partition_entropy(&joined) - 2.0).abs() < 1e-12);
    assert!(joined.refines(&strips_q(&[0.5])));
    assert!(joined.refines(&strips_p(&[0.5])));
}

#[test]
fn refinement_is_idempotent_and_trivial_is_neutral() {
    let p = strips_q(&[0.3, 0.55]);
    let pp = coarsest_refinement(&p, &p).unwrap();
    assert_eq!(pp.len(), p.len());
    assert!((partition_entropy(&pp) - partition_entropy(&p)).abs() < 1e-12);
    let pt = coarsest_refinement(&p, &FinitePartition::trivial(&unit(), Support::Full)).unwrap();
    assert_eq!(pt.len(), p.len());
    assert!((partition_entropy(&pt) - partition_entropy(&p)).abs() < 1e-12);
}

#[test]
fn dyadic_refinement_takes_the_finer_depth() {
    let a = FinitePartition::dyadic(&unit(), Support::Full, 1).unwrap();
    let b = FinitePartition::dyadic(&unit(), Support::Full, 3).unwrap();
    let j = coarsest_refinement(&a, &b).unwrap();
    assert_eq!(j.dyadic_depth(), Some(3));
    assert!((partition_entropy(&j) - 6.0).abs() < 1e-12);
}

#[test]
fn disk_partition_measures_sum_to_one() {
    let s = PhaseSpace::plane_window((16.0, 16.0), (64, 64)).unwrap();
    let p = FinitePartition::dyadic(&s, Support::Disk { radius: 6.0 }, 2).unwrap();
    let total: f64 = p.measures.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    // the disk meets every one of the 16 cells symmetrically: 4 distinct measures
    assert!(partition_entropy(&p) > 3.0 && partition_entropy(&p) < 4.0);
}

fn cuts() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(1u32..64, 1..5).prop_map(|s| s.into_iter().map(|c| c as f64 / 64.0).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_is_subadditive(a in cuts(), b in cuts(), c in cuts()) {
        let mut mixed = a.clone();
        mixed.extend(&c);
        mixed.sort_by(f64::total_cmp);
        mixed.dedup();
        let p = strips_q(&a);
        let q = strips_p(&b);
        let r = strips_q(&mixed);
        for (x, y) in [(&p, &q), (&p, &r)] {
            let j = coarsest_refinement(x, y).unwrap();
            let h = partition_entropy(&j);
            prop_assert!(h <= partition_entropy(x) + partition_entropy(y) + 1e-12);
            prop_assert!(h >= partition_entropy(x).max(partition_entropy(y)) - 1e-12);
        }
    }

    #[test]
    fn finer_strips_have_more_entropy(a in cuts(), extra in cuts()) {
        let mut finer = a.clone();
        finer.extend(&extra);
        finer.sort_by(f64::total_cmp);
        finer.dedup();
        let (coarse, fine) = (strips_q(&a), strips_q(&finer));
        prop_assert!(fine.refines(&coarse));
        prop_assert!(partition_entropy(&fine) >= partition_entropy(&coarse) - 1e-12);
    }
}

#[test]
fn identity_map_has_zero_entropy() {
    let r = ks_entropy(&PointMapSystem::identity(), &PartitionFamily::dyadic([1, 2, 3]), 6).unwrap();
    assert!(r.exact);
    assert_eq!(r.ks_estimate, Some(0.0));
}

#[test]
fn baker_on_vertical_halves_is_one_bit() {
    let halves = strips_q(&[0.5]);
    let r = entropy_rate_with(&halves, &PointMapSystem::baker(), 14, &small(200_000)).unwrap();
    assert!(r.converged, "{r:?}");
    assert!((r.rate - 1.0).abs() < 0.02, "{}", r.rate);
}

#[test]
fn exact_and_sampled_baker_agree() {
    let p = FinitePartition::dyadic(&PointMapSystem::baker().domain, Support::Full, 1).unwrap();
    let exact = entropy_rate(&p, &PointMapSystem::baker(), 8).unwrap();
    let sampled = entropy_rate_with(&p, &PointMapSystem::baker(), 8, &EntropyConfig { exact_piecewise: false, ..small(400_000) }).unwrap();
    // H_n = n + 1 bits for the 2x2 grid
    for (n, h) in exact.entropies.iter().enumerate() {
        assert!((h - (n + 2) as f64).abs() < 1e-9);
    }
    for (a, b) in exact.entropies.iter().zip(&sampled.entropies) {
        assert!((a - b).abs() < 0.01);
    }
}

#[test]
fn golden_rotation_has_vanishing_entropy() {
    let r = ks_entropy(&PointMapSystem::rotation(golden_mean()), &PartitionFamily::dyadic([3]), 64).unwrap();
    assert!(r.value() <= 0.05, "{}", r.value());
}

#[test]
fn cat_lyapunov_is_log_golden_ratio_squared() {
    let exact = ((3.0 + 5f64.sqrt()) / 2.0).log2();
    let l = lyapunov_estimate(&PointMapSystem::cat(), 200, 64).unwrap();
    assert!((l - exact).abs() < 1e-3, "{l}");
    assert!(lyapunov_estimate(&PointMapSystem::rotation(golden_mean()), 200, 64).unwrap().abs() < 1e-9);
}

fn presets() -> Vec<PointMapSystem> {
    vec![
        PointMapSystem::identity(),
        PointMapSystem::cat(),
        PointMapSystem::baker(),
        PointMapSystem::rotation(golden_mean()),
        PointMapSystem::standard(10.0),
        PointMapSystem::harmonic(6.0).unwrap(),
    ]
}

#[test]
fn presets_preserve_the_measure() {
    for sys in presets() {
        let pts = sample_plan(&sys.domain, sys.support(), 4096, 7);
        let res = sys.measure_preservation_residual(&pts);
        assert!(res < 1e-9, "{}: {res}", sys.name);
    }
}

#[test]
fn transfers_leave_the_state_invariant() {
    for sys in presets() {
        let s = sys.domain;
        let (cq, cp) = (s.origin().0 + s.lq / 2.0, s.origin().1 + s.lp / 2.0);
        let f = if sys.is_torus() {
            Grid::from_fn(&s, |q, p| {
                let (x, y) = ((q - cq) / s.lq, (p - cp) / s.lp);
                Complex64::new((-20.0 * (x * x + y * y)).exp() + 0.3 * (2.0 * PI * q / s.lq).cos(), 0.0)
            })
        } else {
            // stays inside the invariant disk
            Grid::from_real_fn(&s, |q, p| (-((q - 1.0).powi(2) + (p - 0.5).powi(2))).exp())
        };
        let mut g = f.clone();
        for _ in 0..10 {
            g = sys.transfer(&g).unwrap();
        }
        let drift = (g.mean() - f.mean()).norm();
        assert!(drift < 1e-8, "{}: {drift}", sys.name);
    }
}

/// Inverse Chirikov map: `q = q' − p'`, `p = p' − K sin q`.
fn chirikov_inverse(k: f64, (q, p): (f64, f64)) -> (f64, f64) {
    let q0 = q - p;
    ((q0).rem_euclid(2.0 * PI), (p - k * q0.sin()).rem_euclid(2.0 * PI))
}

#[test]
fn classical_quasi_distribution_counts_backward_itineraries() {
    let (k, n) = (10.0, 3);
    let spec = FlowSpec::kicked_rotor(k, 32, Hbar::zero()).unwrap();
    let p = FinitePartition::dyadic(&spec.space, Support::Full, 1).unwrap();
    let dist = quantum_refinement_distribution(&p, &spec, n).unwrap();
    assert_eq!(dist.negativity_mass, 0.0);
    assert!(!dist.unreliable);

    let cell = |(q, p): (f64, f64)| 2 * (q >= PI) as u32 + (p >= PI) as u32;
    let mut oracle: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    let nodes = spec.space.nq * spec.space.np;
    for i in 0..spec.space.nq {
        for j in 0..spec.space.np {
            let mut x = spec.space.node(i, j);
            let mut word = Vec::new();
            for _ in 0..n {
                word.push(cell(x));
                x = chirikov_inverse(k, x);
            }
            *oracle.entry(word).or_default() += 1.0 / nodes as f64;
        }
    }
    // the labeler must agree with the cell function used by the oracle
    assert_eq!(p.label((0.1, 4.0)), Some(cell((0.1, 4.0)) as usize));
    let got: BTreeMap<Vec<u32>, f64> = dist.words.iter().cloned().collect();
    assert_eq!(got.len(), oracle.len());
    for (w, v) in &oracle {
        assert!((got[w] - v).abs() < 1e-12, "{w:?}");
    }
}

#[test]
fn quadratic_quasi_distribution_has_no_negativity() {
    let spec = FlowSpec::harmonic(16.0, 64, Hbar::new(0.5).unwrap()).unwrap();
    let p = FinitePartition::dyadic(&spec.space, Support::Disk { radius: 6.0 }, 1).unwrap();
    let dist = quantum_refinement_distribution(&p, &spec, 3).unwrap();
    assert_eq!(dist.negativity_mass, 0.0);
    let total: f64 = dist.words.iter().map(|w| w.1).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn kicked_rotor_quasi_distribution_is_valid() {
    let spec = FlowSpec::kicked_rotor(10.0, 64, Hbar::new(0.1).unwrap()).unwrap();
    let p = FinitePartition::dyadic(&spec.space, Support::Full, 4).unwrap();
    let dist = quantum_refinement_distribution(&p, &spec, 4).unwrap();
    assert!(dist.negativity_mass.is_finite() && dist.negativity_mass >= 0.0);
    assert!(dist.truncated_mass.is_finite());
    assert!(dist.words.iter().all(|w| w.1 > 0.0 && w.0.len() == 4 && w.0.iter().all(|&a| a < 256)));
    let total: f64 = dist.words.iter().map(|w| w.1).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn zero_hbar_quantum_report_is_the_classical_report() {
    let spec = FlowSpec::kicked_rotor(10.0, 64, Hbar::zero()).unwrap();
    let family = PartitionFamily::dyadic([1, 2]);
    let cfg = small(100_000);
    let q = ks_entropy_quantum_with(&spec, &family, 8, &cfg).unwrap();
    let c = ks_entropy_with(&PointMapSystem::standard(10.0), &family, 8, &cfg).unwrap();
    assert_eq!(q.per_partition, c.per_partition);
    assert_eq!(q.ks_estimate.map(f64::to_bits), c.ks_estimate.map(f64::to_bits));
    assert_eq!(q.estimator, Estimator::PointMap);
    assert!(q.alternative.is_none());
}

#[test]
fn reports_are_deterministic() {
    let family = PartitionFamily::dyadic([1, 2]);
    let cfg = EntropyConfig { exact_piecewise: false, ..small(50_000) };
    let a = ks_entropy_with(&PointMapSystem::cat(), &family, 10, &cfg).unwrap();
    let b = ks_entropy_with(&PointMapSystem::cat(), &family, 10, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn invalid_requests_are_rejected() {
    assert!(entropy_rate(&strips_q(&[0.5]), &PointMapSystem::cat(), 1).is_err());
    assert!(PointMapSystem::harmonic(9.0).is_err());
    assert!(FinitePartition::dyadic(&unit(), Support::Full, 9).is_err());
    let spec = FlowSpec::kicked_rotor(10.0, 32, Hbar::zero()).unwrap();
    assert!(quantum_refinement_distribution(&strips_q(&[0.5]), &spec, 2).is_err());
}
