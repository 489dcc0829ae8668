//! Exact refinement entropies for piecewise-affine maps of the unit torus.
//!
//! Atoms of `P ∨ T⁻¹P ∨ … ∨ T⁻⁽ⁿ⁻¹⁾P` are kept as unions of convex polygons,
//! so `H_n` is computed from exact areas instead of sample frequencies.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Convex polygon, vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon(pub Vec<Point>);

/// Pieces smaller than this area are discarded as round-off.
const AREA_FLOOR: f64 = 1e-18;

impl Polygon {
    pub fn rect(q0: f64, q1: f64, p0: f64, p1: f64) -> Self {
        Self(vec![(q0, p0), (q1, p0), (q1, p1), (q0, p1)])
    }

    pub fn area(&self) -> f64 {
        let v = &self.0;
        let mut s = 0.0;
        for k in 0..v.len() {
            let (a, b) = (v[k], v[(k + 1) % v.len()]);
            s += a.0 * b.1 - b.0 * a.1;
        }
        0.5 * s.abs()
    }

    /// Part with `coord(axis) ≥ c` (`keep_above`) or `≤ c`.
    fn clip(&self, axis: usize, c: f64, keep_above: bool) -> Option<Polygon> {
        let coord = |x: &Point| if axis == 0 { x.0 } else { x.1 };
        let inside = |x: &Point| if keep_above { coord(x) >= c } else { coord(x) <= c };
        let v = &self.0;
        let mut out = Vec::with_capacity(v.len() + 2);
        for k in 0..v.len() {
            let (a, b) = (v[k], v[(k + 1) % v.len()]);
            let (ia, ib) = (inside(&a), inside(&b));
            if ia {
                out.push(a);
            }
            if ia != ib {
                let t = (c - coord(&a)) / (coord(&b) - coord(&a));
                let mut x = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                if axis == 0 {
                    x.0 = c;
                } else {
                    x.1 = c;
                }
                out.push(x);
            }
        }
        let poly = Polygon(out);
        (poly.0.len() >= 3 && poly.area() > AREA_FLOOR).then_some(poly)
    }

    fn slab(&self, axis: usize, lo: f64, hi: f64) -> Option<Polygon> {
        self.clip(axis, lo, true)?.clip(axis, hi, false)
    }

    fn map(&self, f: impl Fn(Point) -> Point) -> Polygon {
        let mut v: Vec<Point> = self.0.iter().map(|&x| f(x)).collect();
        // keep counter-clockwise orientation under reflections
        let signed: f64 = (0..v.len()).map(|k| v[k].0 * v[(k + 1) % v.len()].1 - v[(k + 1) % v.len()].0 * v[k].1).sum();
        if signed < 0.0 {
            v.reverse();
        }
        Polygon(v)
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        self.0.iter().fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |b, x| {
            (b.0.min(x.0), b.1.max(x.0), b.2.min(x.1), b.3.max(x.1))
        })
    }

    /// Cuts a polygon of the plane along integer lines and folds it into `[0,1)²`.
    fn fold_to_torus(&self) -> Vec<Polygon> {
        let (x0, x1, y0, y1) = self.bounds();
        let mut out = Vec::new();
        for a in (x0.floor() as i64)..=(x1.ceil() as i64 - 1) {
            let Some(col) = self.slab(0, a as f64, a as f64 + 1.0) else { continue };
            for b in (y0.floor() as i64)..=(y1.ceil() as i64 - 1) {
                if let Some(cell) = col.slab(1, b as f64, b as f64 + 1.0) {
                    out.push(cell.map(|x| (x.0 - a as f64, x.1 - b as f64)));
                }
            }
        }
        out
    }
}

/// Piecewise-affine maps of the unit torus handled exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AffineTorusMap {
    Identity,
    /// `(2x + y, x + y) mod 1`.
    Cat,
    /// `(2x mod 1, (y + ⌊2x⌋)/2)`.
    Baker,
    Rotation(f64),
}

impl AffineTorusMap {
    /// `T⁻¹(A)` as convex pieces inside `[0,1)²`.
    pub fn preimage(&self, poly: &Polygon) -> Vec<Polygon> {
        match *self {
            Self::Identity => vec![poly.clone()],
            Self::Cat => poly.map(|(x, y)| (x - y, 2.0 * y - x)).fold_to_torus(),
            Self::Baker => {
                let mut out = Vec::new();
                if let Some(lo) = poly.slab(1, 0.0, 0.5) {
                    out.push(lo.map(|(x, y)| (x / 2.0, 2.0 * y)));
                }
                if let Some(hi) = poly.slab(1, 0.5, 1.0) {
                    out.push(hi.map(|(x, y)| ((x + 1.0) / 2.0, 2.0 * y - 1.0)));
                }
                out
            }
            Self::Rotation(alpha) => {
                let a = alpha.rem_euclid(1.0);
                poly.map(|(x, y)| (x - a, y)).fold_to_torus()
            }
        }
    }

    /// `T(A)` as convex pieces inside `[0,1)²`.
    pub fn image(&self, poly: &Polygon) -> Vec<Polygon> {
        match *self {
            Self::Identity => vec![poly.clone()],
            Self::Cat => poly.map(|(x, y)| (2.0 * x + y, x + y)).fold_to_torus(),
            Self::Baker => {
                let mut out = Vec::new();
                if let Some(left) = poly.slab(0, 0.0, 0.5) {
                    out.push(left.map(|(x, y)| (2.0 * x, y / 2.0)));
                }
                if let Some(right) = poly.slab(0, 0.5, 1.0) {
                    out.push(right.map(|(x, y)| (2.0 * x - 1.0, (y + 1.0) / 2.0)));
                }
                out
            }
            Self::Rotation(alpha) => {
                let a = alpha.rem_euclid(1.0);
                poly.map(|(x, y)| (x + a, y)).fold_to_torus()
            }
        }
    }
}

/// An atom of a refinement: a union of convex pieces.
#[derive(Debug, Clone)]
pub struct PolyAtom {
    pub pieces: Vec<Polygon>,
    pub mass: f64,
}

/// Splits pieces over the `2^k x 2^k` grid of the unit square; returns `(cell, piece)`.
pub fn split_dyadic(pieces: &[Polygon], depth: u32) -> Vec<(u32, Polygon)> {
    let n = 1u32 << depth;
    let h = 1.0 / n as f64;
    let mut out = Vec::new();
    for piece in pieces {
        let (x0, x1, y0, y1) = piece.bounds();
        let (i0, i1) = (((x0 / h).floor().max(0.0)) as u32, (((x1 / h).ceil()) as u32).min(n));
        let (j0, j1) = (((y0 / h).floor().max(0.0)) as u32, (((y1 / h).ceil()) as u32).min(n));
        for i in i0..i1 {
            let Some(col) = piece.slab(0, i as f64 * h, (i + 1) as f64 * h) else { continue };
            for j in j0..j1 {
                if let Some(cell) = col.slab(1, j as f64 * h, (j + 1) as f64 * h) {
                    out.push((i * n + j, cell));
                }
            }
        }
    }
    out
}

pub(crate) fn dyadic_atoms(depth: u32) -> Vec<PolyAtom> {
    let n = 1u32 << depth;
    let h = 1.0 / n as f64;
    (0..n * n)
        .map(|c| {
            let (i, j) = ((c / n) as f64, (c % n) as f64);
            PolyAtom { pieces: vec![Polygon::rect(i * h, (i + 1.0) * h, j * h, (j + 1.0) * h)], mass: h * h }
        })
        .collect()
}

/// Groups `(cell, piece)` pairs into atoms by cell, in cell order.
fn group(mut pieces: Vec<(u32, Polygon)>) -> Vec<PolyAtom> {
    pieces.sort_by_key(|p| p.0);
    let mut out: Vec<PolyAtom> = Vec::new();
    let mut current: Option<u32> = None;
    for (cell, poly) in pieces {
        let a = poly.area();
        if current == Some(cell) {
            let last = out.last_mut().expect("open atom");
            last.mass += a;
            last.pieces.push(poly);
        } else {
            out.push(PolyAtom { pieces: vec![poly], mass: a });
            current = Some(cell);
        }
    }
    out
}

/// Exact `H_1..H_m` of `∨_{k<n} T⁻ᵏP` for the dyadic partition of depth `k`,
/// stopping once the total piece count would exceed `max_pieces`.
pub fn exact_block_entropies(map: AffineTorusMap, depth: u32, n_max: usize, max_pieces: usize) -> (Vec<f64>, Vec<usize>) {
    // P_{n+1} = P ∨ T⁻¹(P_n)
    refine(depth, n_max, max_pieces, |p| map.preimage(p))
}

/// Exact `H_1..H_m` of `∨_{k<n} TᵏP`, built from forward images.
pub fn exact_image_entropies(map: AffineTorusMap, depth: u32, n_max: usize, max_pieces: usize) -> (Vec<f64>, Vec<usize>) {
    // Q_{n+1} = P ∨ T(Q_n)
    refine(depth, n_max, max_pieces, |p| map.image(p))
}

fn refine(depth: u32, n_max: usize, max_pieces: usize, step: impl Fn(&Polygon) -> Vec<Polygon> + Sync) -> (Vec<f64>, Vec<usize>) {
    use rayon::prelude::*;
    let mut atoms = dyadic_atoms(depth);
    let mut entropies = vec![super::partition::shannon_bits(&atoms.iter().map(|a| a.mass).collect::<Vec<_>>())];
    let mut words = vec![atoms.len()];
    for _ in 1..n_max {
        let next: Vec<Vec<PolyAtom>> = atoms
            .par_iter()
            .map(|atom| {
                let moved: Vec<Polygon> = atom.pieces.iter().flat_map(&step).collect();
                group(split_dyadic(&moved, depth))
            })
            .collect();
        let count: usize = next.iter().flatten().map(|a| a.pieces.len()).sum();
        if count > max_pieces {
            break;
        }
        atoms = next.into_iter().flatten().collect();
        entropies.push(super::partition::shannon_bits(&atoms.iter().map(|a| a.mass).collect::<Vec<_>>()));
        words.push(atoms.len());
    }
    (entropies, words)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preimage_and_image_preserve_area() {
        let sq = Polygon::rect(0.1, 0.4, 0.3, 0.9);
        for map in [AffineTorusMap::Cat, AffineTorusMap::Baker, AffineTorusMap::Rotation(0.618)] {
            let pre: f64 = map.preimage(&sq).iter().map(Polygon::area).sum();
            let img: f64 = map.image(&sq).iter().map(Polygon::area).sum();
            assert!((pre - 0.18).abs() < 1e-14 && (img - 0.18).abs() < 1e-14, "{map:?}");
        }
    }

    #[test]
    fn preimage_of_image_covers_the_polygon() {
        let sq = Polygon::rect(0.2, 0.7, 0.05, 0.45);
        let back: Vec<Polygon> = AffineTorusMap::Cat.image(&sq).iter().flat_map(|p| AffineTorusMap::Cat.preimage(p)).collect();
        let mut mass = 0.0;
        for p in &back {
            let (x0, x1, y0, y1) = p.bounds();
            assert!(x0 >= 0.2 - 1e-12 && x1 <= 0.7 + 1e-12 && y0 >= 0.05 - 1e-12 && y1 <= 0.45 + 1e-12);
            mass += p.area();
        }
        assert!((mass - sq.area()).abs() < 1e-14);
    }

    #[test]
    fn baker_block_entropies_are_exact() {
        let (h, _) = exact_block_entropies(AffineTorusMap::Baker, 1, 8, 1 << 20);
        // depth-1 cells split x at 1/2 (one fair bit per step) and y at 1/2 (one bit, fixed).
        for (n, hn) in h.iter().enumerate() {
            assert!((hn - (n as f64 + 2.0)).abs() < 1e-9, "H_{} = {hn}", n + 1);
        }
    }
}
