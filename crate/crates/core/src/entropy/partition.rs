//! Finite partitions built from half-open rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PhaseSpace, Point, Support};

/// Half-open rectangle `[q0, q1) x [p0, p1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub q0: f64,
    pub q1: f64,
    pub p0: f64,
    pub p1: f64,
}

impl Rect {
    pub fn new(q: (f64, f64), p: (f64, f64)) -> Self {
        Self { q0: q.0, q1: q.1, p0: p.0, p1: p.1 }
    }

    pub fn contains(&self, (q, p): Point) -> bool {
        q >= self.q0 && q < self.q1 && p >= self.p0 && p < self.p1
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            q0: self.q0.max(other.q0),
            q1: self.q1.min(other.q1),
            p0: self.p0.max(other.p0),
            p1: self.p1.min(other.p1),
        };
        (r.q1 > r.q0 && r.p1 > r.p0).then_some(r)
    }

    pub fn area(&self) -> f64 {
        (self.q1 - self.q0) * (self.p1 - self.p0)
    }

    /// Area of the part inside the centred disk of radius `r`.
    pub fn area_in_disk(&self, r: f64) -> f64 {
        let a = self.q0.max(-r);
        let b = self.q1.min(r);
        if b <= a {
            return 0.0;
        }
        let half = |x: f64| (r * r - x * x).max(0.0).sqrt();
        // ∫ √(r² − x²) dx
        let prim = |x: f64| 0.5 * (x * half(x) + r * r * (x / r).clamp(-1.0, 1.0).asin());
        let mut cuts = vec![a, b];
        for y in [self.p0, self.p1] {
            if y.abs() < r {
                let x = (r * r - y * y).sqrt();
                cuts.extend([x, -x].into_iter().filter(|&x| x > a && x < b));
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let s = half(0.5 * (lo + hi));
            let (top_round, top) = if self.p1 < s { (false, self.p1) } else { (true, s) };
            let (bot_round, bot) = if self.p0 > -s { (false, self.p0) } else { (true, -s) };
            if top <= bot {
                continue;
            }
            let round = prim(hi) - prim(lo);
            let width = hi - lo;
            total += if top_round { round } else { self.p1 * width };
            total -= if bot_round { -round } else { self.p0 * width };
        }
        total
    }
}

fn support_area(space: &PhaseSpace, support: Support) -> f64 {
    match support {
        Support::Full => space.area(),
        Support::Disk { radius } => std::f64::consts::PI * radius * radius,
    }
}

/// Measure of a rectangle under the normalized Liouville measure on `support`.
pub fn rect_measure(space: &PhaseSpace, support: Support, r: &Rect) -> f64 {
    let area = match support {
        Support::Full => r.area(),
        Support::Disk { radius } => r.area_in_disk(radius),
    };
    area / support_area(space, support)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Labeler {
    /// `2^k x 2^k` equal cells over the domain, atom index `iq * 2^k + ip`.
    Dyadic(u32),
    Scan,
}

/// A partition into atoms, each a union of disjoint rectangles, with measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitePartition {
    pub space: PhaseSpace,
    pub support: Support,
    pub atoms: Vec<Vec<Rect>>,
    pub measures: Vec<f64>,
    labeler: Labeler,
}

impl FinitePartition {
    /// Builds a partition, dropping atoms of zero measure and checking coverage.
    pub fn from_atoms(space: &PhaseSpace, support: Support, atoms: Vec<Vec<Rect>>) -> Result<Self> {
        let mut kept = Vec::new();
        let mut measures = Vec::new();
        for atom in atoms {
            let m: f64 = atom.iter().map(|r| rect_measure(space, support, r)).sum();
            if m > 0.0 {
                kept.push(atom);
                measures.push(m);
            }
        }
        let total: f64 = measures.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("atoms cover measure {total}, expected 1")));
        }
        Ok(Self { space: *space, support, atoms: kept, measures, labeler: Labeler::Scan })
    }

    /// The `2^k x 2^k` grid of equal half-open cells over the domain.
    pub fn dyadic(space: &PhaseSpace, support: Support, depth: u32) -> Result<Self> {
        if depth > 8 {
            return Err(Error::Config(format!("dyadic depth {depth} exceeds 8")));
        }
        let n = 1usize << depth;
        let (q0, p0) = space.origin();
        let (dq, dp) = (space.lq / n as f64, space.lp / n as f64);
        let mut atoms = Vec::with_capacity(n * n);
        let mut measures = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let r = Rect::new(
                    (q0 + i as f64 * dq, q0 + (i + 1) as f64 * dq),
                    (p0 + j as f64 * dp, p0 + (j + 1) as f64 * dp),
                );
                measures.push(rect_measure(space, support, &r));
                atoms.push(vec![r]);
            }
        }
        // Zero-measure cells stay so that labels remain positional.
        Ok(Self { space: *space, support, atoms, measures, labeler: Labeler::Dyadic(depth) })
    }

    /// The one-atom partition.
    pub fn trivial(space: &PhaseSpace, support: Support) -> Self {
        Self::dyadic(space, support, 0).expect("depth 0 is valid")
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dyadic_depth(&self) -> Option<u32> {
        match self.labeler {
            Labeler::Dyadic(k) => Some(k),
            Labeler::Scan => None,
        }
    }

    /// Atom containing `x`, with half-open boundaries; `None` outside the domain.
    pub fn label(&self, x: Point) -> Option<usize> {
        match self.labeler {
            Labeler::Dyadic(k) => {
                let n = 1i64 << k;
                let (q0, p0) = self.space.origin();
                let i = ((x.0 - q0) / self.space.lq * n as f64).floor() as i64;
                let j = ((x.1 - p0) / self.space.lp * n as f64).floor() as i64;
                ((0..n).contains(&i) && (0..n).contains(&j)).then(|| (i * n + j) as usize)
            }
            Labeler::Scan => self.atoms.iter().position(|atom| atom.iter().any(|r| r.contains(x))),
        }
    }

    /// True when every atom of `self` lies inside a single atom of `coarse`.
    pub fn refines(&self, coarse: &FinitePartition) -> bool {
        self.atoms.iter().all(|atom| {
            let mut owners = atom.iter().flat_map(|r| {
                coarse
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(move |(_, c)| c.iter().any(|cr| cr.intersect(r).is_some()))
                    .map(|(i, _)| i)
            });
            match owners.next() {
                None => true,
                Some(first) => owners.all(|i| i == first),
            }
        })
    }
}

/// `H(P) = −Σ μ_i log₂ μ_i`, with `0 log 0 = 0`.
pub fn partition_entropy(p: &FinitePartition) -> f64 {
    shannon_bits(&p.measures)
}

pub(crate) fn shannon_bits(weights: &[f64]) -> f64 {
    -weights.iter().filter(|&&w| w > 0.0).map(|&w| w * w.log2()).sum::<f64>()
}

/// Atoms `A_i ∩ B_j`, empty and null intersections dropped.
pub fn coarsest_refinement(a: &FinitePartition, b: &FinitePartition) -> Result<FinitePartition> {
    if a.space != b.space || a.support != b.support {
        return Err(Error::MismatchedSpace);
    }
    if let (Some(ka), Some(kb)) = (a.dyadic_depth(), b.dyadic_depth()) {
        return FinitePartition::dyadic(&a.space, a.support, ka.max(kb));
    }
    let mut atoms = Vec::new();
    for x in &a.atoms {
        for y in &b.atoms {
            let cells: Vec<Rect> = x.iter().flat_map(|r| y.iter().filter_map(move |s| r.intersect(s))).collect();
            if !cells.is_empty() {
                atoms.push(cells);
            }
        }
    }
    FinitePartition::from_atoms(&a.space, a.support, atoms)
}

/// Nested dyadic grids used to approximate the supremum over partitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFamily {
    pub depths: Vec<u32>,
    #[serde(default = "full_support")]
    pub support: Support,
}

fn full_support() -> Support {
    Support::Full
}

impl PartitionFamily {
    pub fn dyadic(depths: impl IntoIterator<Item = u32>) -> Self {
        let mut depths: Vec<u32> = depths.into_iter().collect();
        depths.sort_unstable();
        depths.dedup();
        Self { depths, support: Support::Full }
    }

    pub fn with_support(mut self, support: Support) -> Self {
        self.support = support;
        self
    }

    pub fn members(&self, space: &PhaseSpace) -> Result<Vec<FinitePartition>> {
        if self.depths.is_empty() {
            return Err(Error::Config("partition family is empty".into()));
        }
        self.depths.iter().map(|&k| FinitePartition::dyadic(space, self.support, k)).collect()
    }
}
