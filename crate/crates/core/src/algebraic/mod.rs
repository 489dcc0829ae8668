//! The commutative algebraic layer: states, finite subalgebras generated by
//! indicator projections, and the endomorphisms `Θ_τ(f) = f ∘ τ⁻¹` induced by
//! measure-preserving maps.
//!
//! Function algebras are realized on grids (and symbolically where possible);
//! there is no abstract operator layer.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::exact::exact_image_entropies;
use crate::entropy::{
    rect_measure, sample_plan, EntropyConfig, EntropyReport, Estimator, FinitePartition, PartitionFamily, PointMapSystem,
    RateEstimate, Rect,
};
use crate::entropy::{check_n, coarsen_dyadic, max_words, orbit_symbols, shannon_bits};
use crate::error::{Error, Result};
use crate::geometry::{Grid, Observable, PhaseSpace, Point, Representation, SpaceKind, Support};

/// The state `ω_μ(f) = ∫ f dμ` of a normalized flat measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicState {
    pub space: PhaseSpace,
    pub support: Support,
}

impl AlgebraicState {
    pub fn liouville(space: &PhaseSpace, support: Support) -> Self {
        Self { space: *space, support }
    }

    /// The invariant state of a point-map system.
    pub fn of_system(sys: &PointMapSystem) -> Self {
        Self::liouville(&sys.domain, sys.support())
    }

    /// Exact value on a projection.
    pub fn weight(&self, n: &Projection) -> f64 {
        n.cells.iter().map(|r| rect_measure(&self.space, self.support, r)).sum()
    }

    fn inside(&self, (q, p): Point) -> bool {
        match self.support {
            Support::Full => true,
            Support::Disk { radius } => q * q + p * p < radius * radius,
        }
    }
}

/// `ω(f)`: the zero mode for trigonometric series on a full torus, grid
/// quadrature over the support otherwise.
pub fn state_of(f: &Observable, state: &AlgebraicState) -> Result<Complex64> {
    if !f.space.same_as(&state.space) {
        return Err(Error::MismatchedSpace);
    }
    if let (Representation::Fourier(s), SpaceKind::Torus, Support::Full) = (&f.repr, state.space.kind, state.support) {
        return Ok(s.mean());
    }
    Ok(grid_state(&f.to_grid(), state))
}

fn grid_state(g: &Grid, state: &AlgebraicState) -> Complex64 {
    let s = g.space;
    let (sum, count) = (0..s.nq * s.np)
        .filter(|&idx| state.inside(s.node(idx / s.np, idx % s.np)))
        .fold((Complex64::new(0.0, 0.0), 0usize), |(acc, c), idx| (acc + g.data[idx], c + 1));
    if count == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        sum / count as f64
    }
}

/// Pointwise product, kept symbolic when both factors are.
pub fn pointwise_product(f: &Observable, g: &Observable) -> Result<Observable> {
    f.ensure_same_space(g)?;
    Ok(match (&f.repr, &g.repr) {
        (Representation::Poly(a), Representation::Poly(b)) => Observable::poly(&f.space, a * b),
        (Representation::Fourier(a), Representation::Fourier(b)) => Observable::fourier(&f.space, a.product(b)),
        _ => Observable::grid(f.to_grid().zip_with(&g.to_grid(), |x, y| x * y)),
    })
}

/// The indicator of a finite union of disjoint half-open rectangles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub cells: Vec<Rect>,
}

impl Projection {
    pub fn value(&self, x: Point) -> f64 {
        if self.cells.iter().any(|r| r.contains(x)) {
            1.0
        } else {
            0.0
        }
    }

    /// `n · m`, itself a projection; empty when the supports are disjoint.
    pub fn product(&self, other: &Projection) -> Projection {
        let cells = self.cells.iter().flat_map(|r| other.cells.iter().filter_map(move |s| r.intersect(s))).collect();
        Projection { cells }
    }

    pub fn to_observable(&self, space: &PhaseSpace) -> Observable {
        Observable::grid(Grid::from_real_fn(space, |q, p| self.value((q, p))))
    }
}

/// A finite subalgebra, given by its minimal projections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSubalgebra {
    pub space: PhaseSpace,
    pub support: Support,
    pub minimal_projections: Vec<Projection>,
    /// Dyadic depth of the generating partition, if any.
    pub depth: Option<u32>,
}

impl FiniteSubalgebra {
    /// Atoms become minimal projections, in order.
    pub fn from_partition(p: &FinitePartition) -> Self {
        Self {
            space: p.space,
            support: p.support,
            minimal_projections: p.atoms.iter().map(|cells| Projection { cells: cells.clone() }).collect(),
            depth: p.dyadic_depth(),
        }
    }

    pub fn to_partition(&self) -> Result<FinitePartition> {
        match self.depth {
            Some(k) => FinitePartition::dyadic(&self.space, self.support, k),
            None => FinitePartition::from_atoms(
                &self.space,
                self.support,
                self.minimal_projections.iter().map(|n| n.cells.clone()).collect(),
            ),
        }
    }

    pub fn trivial(space: &PhaseSpace, support: Support) -> Self {
        Self::from_partition(&FinitePartition::trivial(space, support))
    }

    pub fn len(&self) -> usize {
        self.minimal_projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minimal_projections.is_empty()
    }

    /// Checks on the grid that the projections are orthogonal and sum to one
    /// over the support, and that their weights sum to one.
    pub fn validate(&self) -> Result<()> {
        let state = AlgebraicState::liouville(&self.space, self.support);
        let s = self.space;
        for idx in 0..s.nq * s.np {
            let x = s.node(idx / s.np, idx % s.np);
            if !state.inside(x) {
                continue;
            }
            let covering = self.minimal_projections.iter().filter(|n| n.value(x) == 1.0).count();
            if covering != 1 {
                return Err(Error::Config(format!("{covering} projections cover the node {x:?}")));
            }
        }
        let total: f64 = self.minimal_projections.iter().map(|n| state.weight(n)).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("projection weights sum to {total}")));
        }
        Ok(())
    }
}

/// `H_ω(N) = −Σ ω(n_i) log₂ ω(n_i)`.
pub fn subalgebra_entropy(n: &FiniteSubalgebra, state: &AlgebraicState) -> f64 {
    shannon_bits(&n.minimal_projections.iter().map(|p| state.weight(p)).collect::<Vec<_>>())
}

/// The subalgebra generated by `N₁` and `N₂`: pairwise products of minimal
/// projections, null products dropped.
pub fn subalgebra_refinement(a: &FiniteSubalgebra, b: &FiniteSubalgebra) -> Result<FiniteSubalgebra> {
    if a.space != b.space || a.support != b.support {
        return Err(Error::MismatchedSpace);
    }
    let state = AlgebraicState::liouville(&a.space, a.support);
    let minimal_projections = a
        .minimal_projections
        .iter()
        .flat_map(|x| b.minimal_projections.iter().map(move |y| x.product(y)))
        .filter(|n| state.weight(n) > 0.0)
        .collect();
    Ok(FiniteSubalgebra { space: a.space, support: a.support, minimal_projections, depth: None })
}

/// `Θ_τ(f) = f ∘ τ⁻¹` for a measure-preserving point map `τ`.
#[derive(Debug, Clone)]
pub struct AlgebraicEndomorphism {
    pub system: PointMapSystem,
}

impl AlgebraicEndomorphism {
    pub fn new(system: PointMapSystem) -> Self {
        Self { system }
    }

    pub fn identity() -> Self {
        Self::new(PointMapSystem::identity())
    }

    pub fn space(&self) -> PhaseSpace {
        self.system.domain
    }

    /// `Θ(f)` sampled on the grid of the domain.
    pub fn apply(&self, f: &Observable) -> Result<Observable> {
        if !f.space.same_as(&self.system.domain) {
            return Err(Error::MismatchedSpace);
        }
        let s = self.system.domain;
        let data = (0..s.nq * s.np)
            .into_par_iter()
            .map(|idx| {
                let (q, p) = self.system.apply_inverse(s.node(idx / s.np, idx % s.np))?;
                Ok(f.eval(q, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Observable::grid(Grid { space: s, data }))
    }

    /// `Θᵏ(n)(x) = n(τ⁻ᵏ x)`.
    pub fn evolved_projection(&self, n: &Projection, k: usize, x: Point) -> Result<f64> {
        let mut y = x;
        for _ in 0..k {
            y = self.system.apply_inverse(y)?;
        }
        Ok(n.value(y))
    }

    /// `max |Θ(fg) − Θ(f)Θ(g)|` over the grid.
    pub fn multiplicativity_residual(&self, f: &Observable, g: &Observable) -> Result<f64> {
        let lhs = self.apply(&pointwise_product(f, g)?)?.to_grid();
        let rhs = self.apply(f)?.to_grid().zip_with(&self.apply(g)?.to_grid(), |x, y| x * y);
        Ok(lhs.max_abs_difference(&rhs))
    }

    /// `|ω(Θ f) − ω(f)|`.
    pub fn invariance_residual(&self, state: &AlgebraicState, f: &Observable) -> Result<f64> {
        Ok((state_of(&self.apply(f)?, state)? - state_of(f, state)?).norm())
    }
}

/// Algebraic KS entropy: `sup_N lim H_ω(N ∨ Θ(N) ∨ … ∨ Θⁿ⁻¹(N)) / n` over
/// the subalgebras of a dyadic family.
///
/// Piecewise-affine torus maps refine exactly through forward images
/// `Θᵏ(χ_A) = χ_{τᵏ A}`. Otherwise the weights `ω(Π_k Θᵏ(n_{i_k}))` are
/// pulled back by `Θ^{n−1}` (which leaves `ω` invariant) and evaluated on
/// the shared sample plan.
pub fn algebraic_ks_with(
    endo: &AlgebraicEndomorphism,
    state: &AlgebraicState,
    family: &PartitionFamily,
    n_max: usize,
    config: &EntropyConfig,
) -> Result<EntropyReport> {
    check_n(n_max)?;
    let sys = &endo.system;
    if state.space != sys.domain || state.support != sys.support() || family.support != state.support {
        return Err(Error::Config("state is not the invariant state of the endomorphism".into()));
    }
    let members = family.members(&sys.domain)?;
    if let (Some(map), true) = (sys.affine_torus(), config.exact_piecewise) {
        let per = family
            .depths
            .iter()
            .map(|&depth| {
                let (h, w) = exact_image_entropies(map, depth, n_max, config.max_pieces);
                RateEstimate::from_entropies(Some(depth), h, w, config.tolerance)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut report = EntropyReport::assemble(&sys.name, Estimator::Algebraic, per, config, 0);
        report.exact = true;
        return Ok(report);
    }
    let finest = *family.depths.last().expect("non-empty family");
    let points = sample_plan(&sys.domain, sys.support(), config.samples, config.seed);
    let top = members.last().expect("non-empty family");
    let outside = 1u32 << (2 * finest);
    let fine = orbit_symbols(sys, &points, n_max, &|x| top.label(x).map_or(outside, |i| i as u32));
    let limit = max_words(config, points.len());
    let mut per = Vec::with_capacity(members.len());
    for &depth in &family.depths {
        let symbols = coarsen_dyadic(&fine, finest, depth);
        let (h, w) = projection_products(&symbols, n_max, limit);
        per.push(RateEstimate::from_entropies(Some(depth), h, w, config.tolerance)?);
    }
    Ok(EntropyReport::assemble(&sys.name, Estimator::Algebraic, per, config, points.len()))
}

pub fn algebraic_ks(endo: &AlgebraicEndomorphism, state: &AlgebraicState, family: &PartitionFamily, n_max: usize) -> Result<EntropyReport> {
    algebraic_ks_with(endo, state, family, n_max, &EntropyConfig::default())
}

/// Entropies of the product projections `n_{i_0} Θ(n_{i_1}) ⋯` at the
/// pulled-back sample points. Sample `y` lies in the product indexed by its
/// reversed orbit labels, so each length prepends the newest label.
fn projection_products(symbols: &[u32], n: usize, max_words: usize) -> (Vec<f64>, Vec<usize>) {
    let count = symbols.len() / n.max(1);
    let mut ids = vec![0u64; count];
    let mut entropies = Vec::new();
    let mut words = Vec::new();
    for step in 0..n {
        let keys: Vec<u64> = ids.par_iter().enumerate().map(|(k, &id)| (u64::from(symbols[k * n + step]) << 40) | id).collect();
        let mut sorted = keys.clone();
        sorted.par_sort_unstable();
        let mut unique: Vec<u64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for &key in &sorted {
            if unique.last() == Some(&key) {
                *weights.last_mut().expect("open product") += 1.0;
            } else {
                unique.push(key);
                weights.push(1.0);
            }
        }
        if unique.len() > max_words {
            break;
        }
        weights.iter_mut().for_each(|w| *w /= count as f64);
        entropies.push(shannon_bits(&weights));
        words.push(unique.len());
        ids = keys.par_iter().map(|k| unique.binary_search(k).expect("key present") as u64).collect();
    }
    (entropies, words)
}

#[cfg(test)]
mod tests;
