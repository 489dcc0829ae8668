//! Quantum dynamical entropy of a Moyal flow.
//!
//! The quasi-probability estimator weights an itinerary `(i_0, …, i_{n−1})` by
//! `ω(Π_j U_j χ_{i_j})`, the state of the pointwise product of Moyal-evolved
//! atom indicators, evaluated by grid quadrature. Negative weights are clipped
//! and reported. The symbol-point estimator instead reads a point map off the
//! evolved coordinate symbols and counts its itineraries classically.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{ks_entropy_with, EntropyConfig, EntropyReport, Estimator, RateEstimate};
use super::partition::{shannon_bits, FinitePartition, PartitionFamily};
use super::systems::PointMapSystem;
use crate::error::{Error, Result};
use crate::flow::{moyal_step, Characteristics, FlowSpec, TimeOneMap};
use crate::geometry::spectral::{signed_mode, Fft2};
use crate::geometry::{FourierSeries, Grid, Observable, PhaseSpace, Point, PointMap, Poly, SpaceKind, Support};

/// Negativity above which the quasi-probability estimate is flagged.
pub const NEGATIVITY_LIMIT: f64 = 0.2;

/// A clipped, renormalized itinerary distribution of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    pub n: usize,
    /// Itineraries (atom indices, earliest first) with their weights.
    pub words: Vec<(Vec<u32>, f64)>,
    /// L¹ mass of the negative weights removed before renormalization.
    pub negativity_mass: f64,
    /// L¹ mass dropped by the per-node truncation.
    pub truncated_mass: f64,
    pub unreliable: bool,
}

/// One itinerary length: clipped weights keyed by packed words.
struct Level {
    weights: Vec<(u128, f64)>,
    negativity: f64,
    truncated: f64,
}

impl Level {
    fn entropy(&self) -> f64 {
        shannon_bits(&self.weights.iter().map(|w| w.1).collect::<Vec<_>>())
    }
}

fn bits_for(atoms: usize) -> u32 {
    (usize::BITS - (atoms.max(2) - 1).leading_zeros()).max(1)
}

/// Grid nodes inside the support, in row-major order.
fn support_nodes(space: &PhaseSpace, support: Support) -> Vec<usize> {
    (0..space.nq * space.np)
        .filter(|&idx| {
            let (q, p) = space.node(idx / space.np, idx % space.np);
            match support {
                Support::Full => true,
                Support::Disk { radius } => q * q + p * p < radius * radius,
            }
        })
        .collect()
}

/// Sparse `(atom, weight)` entries and the dropped magnitude, per node.
type NodeEntries = Vec<(Vec<(u32, f64)>, f64)>;

/// Per-node sparse entries `(atom, U_j χ_atom(node))` for successive steps.
enum Indicators<'a> {
    /// Indicators transported exactly along characteristics (one-hot).
    Exact { chars: Characteristics, partition: &'a FinitePartition },
    /// Indicators evolved on the grid by the Moyal time-one map.
    Grid { map: Box<TimeOneMap>, fields: Vec<Grid>, keep: usize, cutoff: f64 },
}

impl Indicators<'_> {
    /// Entries for step `j` at `nodes`, plus the magnitude left out at each node.
    fn step(&mut self, j: usize, space: &PhaseSpace, nodes: &[usize]) -> Result<NodeEntries> {
        match self {
            Indicators::Exact { chars, partition } => {
                let outside = partition.len() as u32;
                nodes
                    .par_iter()
                    .map(|&idx| {
                        let x = chars.flow(space.node(idx / space.np, idx % space.np), -(j as f64))?;
                        let atom = partition.label(x).map_or(outside, |a| a as u32);
                        Ok((vec![(atom, 1.0)], 0.0))
                    })
                    .collect()
            }
            Indicators::Grid { map, fields, keep, cutoff } => {
                if j > 0 {
                    let next: Result<Vec<Grid>> =
                        fields.par_iter().map(|g| Ok(map.apply(&Observable::grid(g.clone()))?.field)).collect();
                    *fields = next?;
                }
                let (keep, cutoff) = (*keep, *cutoff);
                Ok(nodes
                    .par_iter()
                    .map(|&idx| {
                        let mut kept: Vec<(u32, f64)> = Vec::with_capacity(keep + 1);
                        let mut left = 0.0;
                        for (a, g) in fields.iter().enumerate() {
                            let v = g.data[idx].re;
                            if v.abs() < cutoff {
                                left += v.abs();
                                continue;
                            }
                            kept.push((a as u32, v));
                            if kept.len() > keep {
                                // drop the smallest magnitude, earliest atom on ties
                                let (pos, _) = kept
                                    .iter()
                                    .enumerate()
                                    .min_by(|x, y| x.1 .1.abs().total_cmp(&y.1 .1.abs()).then(y.1 .0.cmp(&x.1 .0)))
                                    .expect("non-empty");
                                left += kept.remove(pos).1.abs();
                            }
                        }
                        (kept, left)
                    })
                    .collect())
            }
        }
    }
}

fn indicators<'a>(p: &'a FinitePartition, spec: &FlowSpec, config: &EntropyConfig) -> Result<Indicators<'a>> {
    if spec.hbar.is_zero() || spec.hamiltonian.is_quadratic() || spec.hamiltonian.is_zero() {
        return Ok(Indicators::Exact { chars: Characteristics::new(spec)?, partition: p });
    }
    let fields = (0..p.len())
        .map(|a| Grid::from_real_fn(&spec.space, |q, pp| if p.label((q, pp)) == Some(a) { 1.0 } else { 0.0 }))
        .collect();
    Ok(Indicators::Grid { map: Box::new(TimeOneMap::new(spec)?), fields, keep: config.keep_per_step.max(1), cutoff: config.quasi_cutoff })
}

/// Builds itinerary levels `1..=n_max`, stopping after the first level with
/// more than `max_words` words (that level is still returned).
fn quasi_levels(p: &FinitePartition, spec: &FlowSpec, n_max: usize, max_words: usize, config: &EntropyConfig) -> Result<Vec<Level>> {
    let space = spec.space;
    if p.space.lq != space.lq || p.space.lp != space.lp || p.space.kind != space.kind {
        return Err(Error::MismatchedSpace);
    }
    let bits = bits_for(p.len() + 1);
    let n_max = n_max.min((128 / bits) as usize);
    let nodes = support_nodes(&space, p.support);
    if nodes.is_empty() {
        return Err(Error::Config("no grid node lies inside the support".into()));
    }
    let norm = 1.0 / nodes.len() as f64;
    let cutoff = config.quasi_cutoff;
    let mut source = indicators(p, spec, config)?;
    let mut prefixes: Vec<Vec<(u128, f64)>> = vec![vec![(0, 1.0)]; nodes.len()];
    let mut levels = Vec::new();
    for j in 0..n_max {
        let entries = source.step(j, &space, &nodes)?;
        let extended: Vec<(Vec<(u128, f64)>, f64)> = prefixes
            .par_iter()
            .zip(&entries)
            .map(|(pre, (list, left))| {
                let mut out = Vec::with_capacity(pre.len() * list.len());
                let mut dropped = 0.0;
                for &(key, w) in pre {
                    dropped += w.abs() * left;
                    for &(a, v) in list {
                        let x = w * v;
                        if x.abs() < cutoff * cutoff {
                            dropped += x.abs();
                        } else {
                            out.push(((key << bits) | u128::from(a), x));
                        }
                    }
                }
                (out, dropped)
            })
            .collect();
        let truncated = extended.iter().map(|e| e.1).sum::<f64>() * norm;
        prefixes = extended.into_iter().map(|e| e.0).collect();

        let mut all: Vec<(u128, f64)> = prefixes.iter().flatten().map(|&(k, w)| (k, w * norm)).collect();
        all.sort_by_key(|e| e.0);
        let mut merged: Vec<(u128, f64)> = Vec::new();
        for (k, w) in all {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += w,
                _ => merged.push((k, w)),
            }
        }
        let negativity: f64 = merged.iter().filter(|e| e.1 < 0.0).map(|e| -e.1).sum();
        let positive: f64 = merged.iter().filter(|e| e.1 > 0.0).map(|e| e.1).sum();
        let weights: Vec<(u128, f64)> = merged.into_iter().filter(|e| e.1 > 0.0).map(|(k, w)| (k, w / positive)).collect();
        let words = weights.len();
        let prev = levels.last().map_or(0.0, |l: &Level| l.truncated);
        levels.push(Level { weights, negativity, truncated: prev + truncated });
        if words > max_words {
            break;
        }
    }
    Ok(levels)
}

/// Joint weights `ω(Π_k U_k χ_{i_k})` of itineraries of length `n`.
pub fn quantum_refinement_distribution(p: &FinitePartition, spec: &FlowSpec, n: usize) -> Result<QuasiDistribution> {
    quantum_refinement_distribution_with(p, spec, n, &EntropyConfig::default())
}

pub fn quantum_refinement_distribution_with(p: &FinitePartition, spec: &FlowSpec, n: usize, config: &EntropyConfig) -> Result<QuasiDistribution> {
    if n == 0 {
        return Err(Error::Config("itinerary length must be positive".into()));
    }
    let bits = bits_for(p.len() + 1);
    if bits as usize * n > 128 {
        return Err(Error::Config(format!("{n} steps of {} atoms exceed the word budget", p.len())));
    }
    let levels = quasi_levels(p, spec, n, usize::MAX, config)?;
    let level = levels.last().expect("n > 0");
    let mask = (1u128 << bits) - 1;
    let words = level
        .weights
        .iter()
        .map(|&(key, w)| ((0..n).rev().map(|j| ((key >> (bits as usize * j)) & mask) as u32).collect(), w))
        .collect();
    Ok(QuasiDistribution {
        n,
        words,
        negativity_mass: level.negativity,
        truncated_mass: level.truncated,
        unreliable: level.negativity > NEGATIVITY_LIMIT,
    })
}

fn quasi_rate(p: &FinitePartition, depth: Option<u32>, spec: &FlowSpec, n_max: usize, config: &EntropyConfig) -> Result<(RateEstimate, f64)> {
    let nodes = support_nodes(&spec.space, p.support).len();
    let max_words = (nodes as f64 / config.quasi_word_ratio).floor() as usize;
    let mut levels = quasi_levels(p, spec, n_max, max_words, config)?;
    if levels.last().is_some_and(|l| l.weights.len() > max_words) {
        levels.pop();
    }
    let entropies = levels.iter().map(Level::entropy).collect();
    let words = levels.iter().map(|l| l.weights.len()).collect();
    let mut est = RateEstimate::from_entropies(depth, entropies, words, config.tolerance)?;
    est.negativity_mass = levels.iter().map(|l| l.negativity).fold(0.0, f64::max);
    let truncated = levels.last().map_or(0.0, |l| l.truncated);
    Ok((est, truncated))
}

/// Point map read off the evolved coordinate symbols; approximates `T⁻¹`
/// because the symbols are transported as `f ∘ Φ_{−1}`.
struct SymbolMap {
    space: PhaseSpace,
    nq: usize,
    np: usize,
    q: Vec<Complex64>,
    p: Vec<Complex64>,
    torus: bool,
}

const UPSAMPLE: usize = 4;

fn upsample(g: &Grid, factor: usize) -> Vec<Complex64> {
    let s = g.space;
    let (nq, np) = (s.nq, s.np);
    let (mq, mp) = (nq * factor, np * factor);
    let mut spec = g.data.clone();
    Fft2::new(nq, np).forward(&mut spec);
    let mut big = vec![Complex64::new(0.0, 0.0); mq * mp];
    for a in 0..nq {
        let ma = signed_mode(a, nq);
        for b in 0..np {
            let mb = signed_mode(b, np);
            let mut c = spec[a * np + b];
            // split Nyquist modes symmetrically
            if 2 * ma.unsigned_abs() as usize == nq {
                c *= 0.5;
            }
            if 2 * mb.unsigned_abs() as usize == np {
                c *= 0.5;
            }
            let targets_a: Vec<i64> = if 2 * ma.unsigned_abs() as usize == nq { vec![ma, -ma] } else { vec![ma] };
            let targets_b: Vec<i64> = if 2 * mb.unsigned_abs() as usize == np { vec![mb, -mb] } else { vec![mb] };
            for &ta in &targets_a {
                for &tb in &targets_b {
                    let ia = ta.rem_euclid(mq as i64) as usize;
                    let ib = tb.rem_euclid(mp as i64) as usize;
                    big[ia * mp + ib] += c;
                }
            }
        }
    }
    Fft2::new(mq, mp).inverse(&mut big);
    big
}

impl SymbolMap {
    fn new(spec: &FlowSpec) -> Result<Self> {
        let space = spec.space;
        let map = TimeOneMap::new(spec)?;
        let torus = space.kind == SpaceKind::Torus;
        let (q_obs, p_obs) = if torus {
            (Observable::fourier(&space, FourierSeries::from_modes([((1, 0), Complex64::new(1.0, 0.0))])),
             Observable::fourier(&space, FourierSeries::from_modes([((0, 1), Complex64::new(1.0, 0.0))])))
        } else {
            (Observable::poly(&space, Poly::q()), Observable::poly(&space, Poly::p()))
        };
        let evolve = |f: &Observable| -> Result<Grid> {
            if spec.hamiltonian.is_kicked() || !torus {
                Ok(map.apply(f)?.field)
            } else {
                Ok(moyal_step(f, spec, 1.0)?.field)
            }
        };
        let (qg, pg) = (evolve(&q_obs)?, evolve(&p_obs)?);
        if torus {
            Ok(Self { space, nq: space.nq * UPSAMPLE, np: space.np * UPSAMPLE, q: upsample(&qg, UPSAMPLE), p: upsample(&pg, UPSAMPLE), torus })
        } else {
            Ok(Self { space, nq: space.nq, np: space.np, q: qg.data, p: pg.data, torus })
        }
    }

    fn bilinear(&self, data: &[Complex64], (q, p): Point) -> Complex64 {
        let (q0, p0) = self.space.origin();
        let u = (q - q0) / self.space.lq * self.nq as f64;
        let v = (p - p0) / self.space.lp * self.np as f64;
        let (fu, fv) = (u.floor(), v.floor());
        let (tu, tv) = (u - fu, v - fv);
        let idx = |i: f64, n: usize| -> usize {
            if self.torus {
                (i as i64).rem_euclid(n as i64) as usize
            } else {
                (i.max(0.0) as usize).min(n - 1)
            }
        };
        let (i0, i1) = (idx(fu, self.nq), idx(fu + 1.0, self.nq));
        let (j0, j1) = (idx(fv, self.np), idx(fv + 1.0, self.np));
        let at = |i: usize, j: usize| data[i * self.np + j];
        at(i0, j0) * ((1.0 - tu) * (1.0 - tv)) + at(i1, j0) * (tu * (1.0 - tv)) + at(i0, j1) * ((1.0 - tu) * tv) + at(i1, j1) * (tu * tv)
    }
}

impl PointMap for SymbolMap {
    fn apply(&self, x: Point) -> Point {
        let (zq, zp) = (self.bilinear(&self.q, x), self.bilinear(&self.p, x));
        if self.torus {
            let (q0, p0) = self.space.origin();
            let q = q0 + (zq.arg() / (2.0 * PI) * self.space.lq).rem_euclid(self.space.lq);
            let p = p0 + (zp.arg() / (2.0 * PI) * self.space.lp).rem_euclid(self.space.lp);
            (q, p)
        } else {
            (zq.re, zp.re)
        }
    }
}

/// Symbol-point estimate: classical counting on the map read off `U_1 q`, `U_1 p`.
pub fn ks_entropy_symbol_point(spec: &FlowSpec, family: &PartitionFamily, n_max: usize, config: &EntropyConfig) -> Result<EntropyReport> {
    let map = SymbolMap::new(spec)?;
    let base = PointMapSystem::from_flow(spec, family.support)?;
    let sys = PointMapSystem::custom("symbol-point", spec.space, base.measure, Arc::new(map));
    let cfg = EntropyConfig { samples: config.symbol_samples, ..config.clone() };
    let mut report = ks_entropy_with(&sys, family, n_max, &cfg)?;
    report.estimator = Estimator::SymbolPoint;
    report.hbar = Some(spec.hbar.value());
    Ok(report)
}

/// Quantum dynamical entropy `h_ħ` of the flow, with the classical run at
/// matched settings, chaoticity flags and the symbol-point cross-estimate.
///
/// At `ħ = 0` the quasi-probability weights are exactly the classical
/// itinerary frequencies, so the classical estimator runs unchanged; for
/// quadratic `H` the Moyal flow is the classical point flow and the same holds.
pub fn ks_entropy_quantum_with(spec: &FlowSpec, family: &PartitionFamily, n_max: usize, config: &EntropyConfig) -> Result<EntropyReport> {
    let sys = PointMapSystem::from_flow(spec, family.support)?;
    let classical = ks_entropy_with(&sys, family, n_max, config)?;
    let exact = spec.hbar.is_zero() || spec.hamiltonian.is_quadratic() || spec.hamiltonian.is_zero();
    let mut report = if exact {
        let mut r = classical.clone();
        if !spec.hbar.is_zero() {
            r.estimator = Estimator::QuasiProbability;
        }
        r
    } else {
        let members = family.members(&spec.space)?;
        let mut per = Vec::with_capacity(members.len());
        let mut truncated: f64 = 0.0;
        for (p, &depth) in members.iter().zip(&family.depths) {
            let (est, t) = quasi_rate(p, Some(depth), spec, n_max, config)?;
            truncated = truncated.max(t);
            per.push(est);
        }
        let nodes = support_nodes(&spec.space, family.support).len();
        let mut r = EntropyReport::assemble(&sys.name, Estimator::QuasiProbability, per, config, nodes);
        r.truncated_mass_max = truncated;
        r
    };
    report.hbar = Some(spec.hbar.value());
    report.chaotic = Some(classical.value() > config.chaos_threshold);
    report.quantum_chaotic = Some(report.value() > config.chaos_threshold);
    if !spec.hbar.is_zero() && config.symbol_samples > 0 {
        let alt = ks_entropy_symbol_point(spec, family, n_max, config)?;
        report.discrepancy = Some((report.value() - alt.value()).abs());
        report.alternative = Some(Box::new(alt));
    }
    report.classical = Some(Box::new(classical));
    Ok(report)
}

pub fn ks_entropy_quantum(spec: &FlowSpec, family: &PartitionFamily, n_max: usize) -> Result<EntropyReport> {
    ks_entropy_quantum_with(spec, family, n_max, &EntropyConfig::default())
}
