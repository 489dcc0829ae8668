//! Itinerary counting, entropy rates and the Lyapunov cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::exact_block_entropies;
use super::partition::{FinitePartition, PartitionFamily};
use super::systems::PointMapSystem;
use crate::error::{Error, Result};
use crate::geometry::{PhaseSpace, Point, PointMap, Support};

const SHARD: usize = 4096;

/// Sampling and convergence settings shared by every estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntropyConfig {
    pub samples: usize,
    pub seed: u64,
    /// A step counts as resolved while distinct itineraries ≤ samples / ratio.
    pub undersampling_ratio: f64,
    /// Agreement required of the last three entropy differences (bits).
    pub tolerance: f64,
    /// Grid nodes per resolved word for the quasi-probability estimator.
    pub quasi_word_ratio: f64,
    /// Largest per-node entries kept per step by the quasi-probability estimator.
    pub keep_per_step: usize,
    /// Entries below this magnitude are dropped by the quasi-probability estimator.
    pub quasi_cutoff: f64,
    /// Samples for the symbol-point estimator.
    pub symbol_samples: usize,
    /// Threshold (bits) for the chaotic flags.
    pub chaos_threshold: f64,
    /// Count exact cell preimages for piecewise-affine maps instead of sampling.
    pub exact_piecewise: bool,
    /// Polygon budget of the exact counter.
    pub max_pieces: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 1,
            undersampling_ratio: 32.0,
            tolerance: 0.02,
            quasi_word_ratio: 4.0,
            keep_per_step: 3,
            quasi_cutoff: 1e-4,
            symbol_samples: 200_000,
            chaos_threshold: 0.05,
            exact_piecewise: true,
            max_pieces: 1 << 21,
        }
    }
}

/// Stratified jittered sample of the support: one uniform point per lattice cell.
pub fn sample_plan(domain: &PhaseSpace, support: Support, samples: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, size, fill) = match support {
        Support::Full => (domain.origin(), (domain.lq, domain.lp), 1.0),
        Support::Disk { radius } => ((-radius, -radius), (2.0 * radius, 2.0 * radius), std::f64::consts::FRAC_PI_4),
    };
    let m = ((samples as f64 / fill).sqrt().ceil() as usize).max(1);
    let (hq, hp) = (size.0 / m as f64, size.1 / m as f64);
    let mut out = Vec::with_capacity(samples);
    for a in 0..m {
        for b in 0..m {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            let x = (lo.0 + (a as f64 + u) * hq, lo.1 + (b as f64 + v) * hp);
            let inside = match support {
                Support::Full => true,
                Support::Disk { radius } => x.0 * x.0 + x.1 * x.1 < radius * radius,
            };
            if inside {
                out.push(x);
            }
        }
    }
    out
}

/// One partition's entropy-rate estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Dyadic depth, when the partition is a dyadic grid.
    pub depth: Option<u32>,
    /// `H_n − H_{n−1}` at the largest resolved `n`.
    pub rate: f64,
    pub converged: bool,
    pub n_used: usize,
    /// `H_1, …, H_{n_used}` in bits.
    pub entropies: Vec<f64>,
    /// Distinct itineraries per length.
    pub words: Vec<usize>,
    pub negativity_mass: f64,
}

impl RateEstimate {
    /// `H_n − H_{n−1}` for `n = 1..=n_used`.
    pub fn differences(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.entropies
            .iter()
            .map(|&h| {
                let d = h - prev;
                prev = h;
                d
            })
            .collect()
    }

    /// `H_n / n` at the largest resolved `n`.
    pub fn block_rate(&self) -> f64 {
        self.entropies.last().map_or(0.0, |h| h / self.n_used as f64)
    }

    pub(crate) fn from_entropies(depth: Option<u32>, entropies: Vec<f64>, words: Vec<usize>, tolerance: f64) -> Result<Self> {
        let n = entropies.len();
        if n < 2 {
            return Err(Error::Statistics(format!(
                "only {n} itinerary length(s) resolved; increase samples or lower the depth"
            )));
        }
        let mut est = Self { depth, rate: 0.0, converged: false, n_used: n, entropies, words, negativity_mass: 0.0 };
        let d = est.differences();
        est.rate = d[n - 1].max(0.0);
        if n >= 3 {
            let tail = &d[n - 3..];
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            est.converged = hi - lo <= tolerance;
        }
        Ok(est)
    }
}

/// Symbol of every sample at every step, point-major: `out[pt * n + step]`.
pub(crate) fn orbit_symbols(sys: &PointMapSystem, points: &[Point], n: usize, label: &(dyn Fn(Point) -> u32 + Sync)) -> Vec<u32> {
    let mut out = vec![0u32; points.len() * n];
    out.par_chunks_mut(SHARD * n).zip(points.par_chunks(SHARD)).for_each(|(dst, pts)| {
        for (k, &x0) in pts.iter().enumerate() {
            let mut x = x0;
            for step in 0..n {
                dst[k * n + step] = label(x);
                if step + 1 < n {
                    x = sys.apply(x);
                }
            }
        }
    });
    out
}

/// Block entropies `H_1..H_m` of the itineraries, stopping at the first
/// length whose distinct-word count exceeds `max_words`.
pub(crate) fn itinerary_entropies(symbols: &[u32], n: usize, max_words: usize) -> (Vec<f64>, Vec<usize>) {
    let count = symbols.len() / n.max(1);
    let mut ids = vec![0u64; count];
    let mut entropies = Vec::new();
    let mut words = Vec::new();
    for step in 0..n {
        let keys: Vec<u64> = ids.par_iter().enumerate().map(|(k, &id)| (id << 20) | u64::from(symbols[k * n + step])).collect();
        let mut sorted = keys.clone();
        sorted.par_sort_unstable();
        let mut unique = Vec::new();
        let mut counts = Vec::new();
        for &key in &sorted {
            if unique.last() == Some(&key) {
                *counts.last_mut().unwrap() += 1usize;
            } else {
                unique.push(key);
                counts.push(1usize);
            }
        }
        if unique.len() > max_words {
            break;
        }
        let total = count as f64;
        let h = -counts.iter().map(|&c| {
            let w = c as f64 / total;
            w * w.log2()
        }).sum::<f64>();
        entropies.push(h);
        words.push(unique.len());
        ids = keys.par_iter().map(|k| unique.binary_search(k).expect("key present") as u64).collect();
    }
    (entropies, words)
}

pub(crate) fn check_n(n_max: usize) -> Result<()> {
    if n_max < 4 {
        return Err(Error::Config(format!("n_max = {n_max} must be at least 4")));
    }
    Ok(())
}

pub(crate) fn max_words(config: &EntropyConfig, samples: usize) -> usize {
    (samples as f64 / config.undersampling_ratio).floor() as usize
}

/// `h(P, T)` by itinerary counting over the configured sample.
pub fn entropy_rate_with(p: &FinitePartition, sys: &PointMapSystem, n_max: usize, config: &EntropyConfig) -> Result<RateEstimate> {
    check_n(n_max)?;
    if p.space.lq != sys.domain.lq || p.space.lp != sys.domain.lp || p.space.kind != sys.domain.kind {
        return Err(Error::MismatchedSpace);
    }
    if p.len() >= 1 << 20 {
        return Err(Error::Config("partition has too many atoms".into()));
    }
    if let (Some(map), Some(depth), true) = (sys.affine_torus(), p.dyadic_depth(), config.exact_piecewise) {
        let (h, w) = exact_block_entropies(map, depth, n_max, config.max_pieces);
        return RateEstimate::from_entropies(Some(depth), h, w, config.tolerance);
    }
    let points = sample_plan(&sys.domain, sys.support(), config.samples, config.seed);
    let outside = p.len() as u32;
    let symbols = orbit_symbols(sys, &points, n_max, &|x| p.label(x).map_or(outside, |i| i as u32));
    let (h, w) = itinerary_entropies(&symbols, n_max, max_words(config, points.len()));
    RateEstimate::from_entropies(p.dyadic_depth(), h, w, config.tolerance)
}

/// [`entropy_rate_with`] under the default configuration.
pub fn entropy_rate(p: &FinitePartition, sys: &PointMapSystem, n_max: usize) -> Result<RateEstimate> {
    entropy_rate_with(p, sys, n_max, &EntropyConfig::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    PointMap,
    /// Evolved projections of the algebraic layer.
    Algebraic,
    QuasiProbability,
    SymbolPoint,
}

/// Entropy-rate estimates over a partition family and their supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub system: String,
    pub estimator: Estimator,
    pub per_partition: Vec<RateEstimate>,
    /// Largest converged rate; `None` when no member converged.
    pub ks_estimate: Option<f64>,
    /// Largest rate among members that resolve at least four itinerary
    /// lengths (or among all members when none does), converged or not.
    pub best_effort: f64,
    pub inconclusive: bool,
    /// Rates non-decreasing in depth up to the tolerance.
    pub monotone: bool,
    pub negativity_mass_max: f64,
    pub samples: usize,
    pub seed: u64,
    pub hbar: Option<f64>,
    /// Mass dropped by quasi-probability truncation.
    pub truncated_mass_max: f64,
    /// Negativity above 0.2 in some member.
    pub unreliable: bool,
    pub chaotic: Option<bool>,
    pub quantum_chaotic: Option<bool>,
    /// `|h_quasi − h_symbol|` when both quantum estimators ran.
    pub discrepancy: Option<f64>,
    /// Entropies from exact cell preimages rather than samples.
    pub exact: bool,
    pub classical: Option<Box<EntropyReport>>,
    pub alternative: Option<Box<EntropyReport>>,
}

impl EntropyReport {
    pub(crate) fn assemble(system: &str, estimator: Estimator, per_partition: Vec<RateEstimate>, config: &EntropyConfig, samples: usize) -> Self {
        let ks_estimate = per_partition.iter().filter(|r| r.converged).map(|r| r.rate).reduce(f64::max);
        // Members resolving at least four lengths; all members if none do.
        let resolved = per_partition.iter().filter(|r| r.n_used >= 4).map(|r| r.rate).reduce(f64::max);
        let best_effort = resolved.unwrap_or_else(|| per_partition.iter().map(|r| r.rate).fold(0.0, f64::max));
        let monotone = per_partition.windows(2).all(|w| w[1].rate >= w[0].rate - config.tolerance);
        let negativity_mass_max = per_partition.iter().map(|r| r.negativity_mass).fold(0.0, f64::max);
        Self {
            system: system.into(),
            estimator,
            ks_estimate,
            best_effort,
            inconclusive: ks_estimate.is_none(),
            monotone,
            negativity_mass_max,
            unreliable: negativity_mass_max > 0.2,
            per_partition,
            samples,
            seed: config.seed,
            hbar: None,
            truncated_mass_max: 0.0,
            chaotic: None,
            quantum_chaotic: None,
            discrepancy: None,
            exact: false,
            classical: None,
            alternative: None,
        }
    }

    /// The converged estimate, or the best effort when inconclusive.
    pub fn value(&self) -> f64 {
        self.ks_estimate.unwrap_or(self.best_effort)
    }
}

/// Supremum estimate over a dyadic family; orbits are computed once at the
/// finest depth and coarsened per member.
pub fn ks_entropy_with(sys: &PointMapSystem, family: &PartitionFamily, n_max: usize, config: &EntropyConfig) -> Result<EntropyReport> {
    check_n(n_max)?;
    family.members(&sys.domain)?;
    if let (Some(map), true) = (sys.affine_torus(), config.exact_piecewise) {
        let per = family
            .depths
            .iter()
            .map(|&depth| {
                let (h, w) = exact_block_entropies(map, depth, n_max, config.max_pieces);
                RateEstimate::from_entropies(Some(depth), h, w, config.tolerance)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut report = EntropyReport::assemble(&sys.name, Estimator::PointMap, per, config, 0);
        report.exact = true;
        return Ok(report);
    }
    let members = family.members(&sys.domain)?;
    let finest = *family.depths.last().expect("non-empty family");
    let points = sample_plan(&sys.domain, sys.support(), config.samples, config.seed);
    let top = members.last().expect("non-empty family");
    let outside = 1u32 << (2 * finest);
    let fine = orbit_symbols(sys, &points, n_max, &|x| top.label(x).map_or(outside, |i| i as u32));
    let limit = max_words(config, points.len());
    let mut per = Vec::with_capacity(members.len());
    for &depth in &family.depths {
        let coarse = coarsen_dyadic(&fine, finest, depth);
        let (h, w) = itinerary_entropies(&coarse, n_max, limit);
        per.push(RateEstimate::from_entropies(Some(depth), h, w, config.tolerance)?);
    }
    Ok(EntropyReport::assemble(&sys.name, Estimator::PointMap, per, config, points.len()))
}

/// Maps depth-`finest` dyadic labels to depth-`depth` labels; the
/// out-of-domain symbol `4^finest` stays distinct.
pub(crate) fn coarsen_dyadic(fine: &[u32], finest: u32, depth: u32) -> Vec<u32> {
    let side = 1u32 << finest;
    let shift = finest - depth;
    fine.par_iter()
        .map(|&s| {
            if s == side * side {
                u32::MAX >> 12
            } else {
                let (i, j) = (s / side, s % side);
                ((i >> shift) << depth) | (j >> shift)
            }
        })
        .collect()
}

/// [`ks_entropy_with`] under the default configuration.
pub fn ks_entropy(sys: &PointMapSystem, family: &PartitionFamily, n_max: usize) -> Result<EntropyReport> {
    ks_entropy_with(sys, family, n_max, &EntropyConfig::default())
}

/// Largest Lyapunov exponent (bits per step) by tangent renormalization,
/// averaged over `samples` starting points.
pub fn lyapunov_estimate(sys: &PointMapSystem, n: usize, samples: usize) -> Result<f64> {
    lyapunov_estimate_seeded(sys, n, samples, EntropyConfig::default().seed)
}

pub fn lyapunov_estimate_seeded(sys: &PointMapSystem, n: usize, samples: usize, seed: u64) -> Result<f64> {
    if n == 0 || samples == 0 {
        return Err(Error::Config("lyapunov_estimate needs n > 0 and samples > 0".into()));
    }
    let points = sample_plan(&sys.domain, sys.support(), samples, seed);
    let per: Vec<Result<f64>> = points
        .par_iter()
        .map(|&x0| {
            let (mut x, mut v) = (x0, (0.8, 0.6));
            let mut sum = 0.0;
            for _ in 0..n {
                let j = sys.jacobian(x);
                v = (j[0][0] * v.0 + j[0][1] * v.1, j[1][0] * v.0 + j[1][1] * v.1);
                let norm = (v.0 * v.0 + v.1 * v.1).sqrt();
                if !norm.is_finite() || norm == 0.0 {
                    return Err(Error::Unsupported(format!("{} is not differentiable along the orbit", sys.name)));
                }
                sum += norm.log2();
                v = (v.0 / norm, v.1 / norm);
                x = sys.apply(x);
            }
            Ok(sum / n as f64)
        })
        .collect();
    let mut total = 0.0;
    for r in &per {
        total += r.clone()?;
    }
    Ok(total / per.len() as f64)
}
