//! Dyadic box tilings of ℤ^d and the quantitative good-tiling audit.
//!
//! The level-k tiling has the single shape `[0, 2^k)^d` and center lattice
//! `2^k ℤ^d`. Tiles are addressed by their index `⌊g / 2^k⌋` and materialized
//! only inside caller-supplied windows.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    box_translate_defect, check_dim, BoxSet, FiniteSet, GroupPoint, ReiterMeasure, MATERIALIZE_LIMIT,
};

/// Congruent dyadic box tiling at one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiling {
    d: usize,
    level: u32,
}

/// Largest supported level; keeps every side and index inside i64.
pub const MAX_LEVEL: u32 = 50;

impl Tiling {
    pub fn new(d: usize, level: u32) -> Result<Self> {
        check_dim(d)?;
        if level > MAX_LEVEL {
            return Err(Error::TooLarge(format!("tiling level {level}")));
        }
        Ok(Self { d, level })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn side(&self) -> i64 {
        1i64 << self.level
    }

    /// Number of points in the shape, |U|.
    pub fn shape_volume(&self) -> u128 {
        (self.side() as u128).pow(self.d as u32)
    }

    /// The shape `[0, 2^k)^d`; it contains the origin.
    pub fn shape(&self) -> BoxSet {
        BoxSet::cube(self.d, 0, self.side())
    }

    /// Index of the tile containing `g`.
    pub fn tile_of(&self, g: &GroupPoint) -> GroupPoint {
        g.div_floor(self.side())
    }

    pub fn tile_box(&self, index: &GroupPoint) -> BoxSet {
        let s = self.side();
        let lo = index.scale(s);
        BoxSet {
            lo,
            hi: lo + ones(self.d).scale(s),
        }
    }

    /// Half-open box of indices of the tiles meeting `window`.
    pub fn tile_range(&self, window: &BoxSet) -> BoxSet {
        if window.is_empty() {
            return BoxSet {
                lo: GroupPoint::origin(self.d),
                hi: GroupPoint::origin(self.d),
            };
        }
        let lo = self.tile_of(&window.lo);
        let hi = self.tile_of(&(window.hi - ones(self.d))) + ones(self.d);
        BoxSet { lo, hi }
    }

    /// Whether `window` is exactly a union of tiles.
    pub fn is_aligned(&self, window: &BoxSet) -> bool {
        let s = self.side();
        (0..self.d).all(|a| window.lo.coord(a).rem_euclid(s) == 0 && window.hi.coord(a).rem_euclid(s) == 0)
    }

    /// Exact-cover check on a window: every point lies in exactly one of the
    /// tiles meeting the window.
    pub fn exact_cover(&self, window: &BoxSet) -> Result<bool> {
        if window.volume() > MATERIALIZE_LIMIT {
            return Err(Error::TooLarge(format!("window of {} points", window.volume())));
        }
        let mut hits: HashMap<GroupPoint, u32> = HashMap::with_capacity(window.volume() as usize);
        let range = self.tile_range(window);
        for idx in range.points() {
            let tile = self.tile_box(&idx).intersect(window);
            for g in tile.points() {
                if self.tile_of(&g) != idx {
                    return Ok(false);
                }
                *hits.entry(g).or_default() += 1;
            }
        }
        Ok(hits.len() as u128 == window.volume() && hits.values().all(|&c| c == 1) && window.points().all(|g| hits.contains_key(&g)))
    }

    /// Every tile of `self` meeting `window` is the disjoint union of the
    /// tiles of `finer` it meets.
    pub fn is_union_of(&self, finer: &Tiling, window: &BoxSet) -> bool {
        if finer.d != self.d || finer.level > self.level {
            return false;
        }
        for idx in self.tile_range(window).points() {
            let coarse = self.tile_box(&idx);
            let children = finer.tile_range(&coarse);
            let mut volume = 0u128;
            for c in children.points() {
                let child = finer.tile_box(&c);
                if !coarse.contains_box(&child) {
                    return false;
                }
                volume += child.volume();
            }
            if volume != coarse.volume() {
                return false;
            }
        }
        true
    }

    /// Invariance defect of the shape against the unit generators, 2/2^k.
    pub fn shape_defect(&self) -> f64 {
        box_translate_defect(&self.shape(), &GroupPoint::unit(self.d, 0))
    }
}

fn ones(d: usize) -> GroupPoint {
    if d == 1 {
        GroupPoint::d1(1)
    } else {
        GroupPoint::d2(1, 1)
    }
}

/// Serialized form of a tiling together with the window it was audited on.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TilingRecord {
    pub d: usize,
    pub k: u32,
    pub shape_extent: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<BoxSet>,
}

impl TilingRecord {
    pub fn new(t: &Tiling, window: Option<BoxSet>) -> Self {
        Self {
            d: t.d,
            k: t.level,
            shape_extent: t.side(),
            window,
        }
    }
}

/// `ν_T(A) = ν(A ∩ T)/ν(T)`, the zero measure when `ν(T) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalMeasure {
    pub tile: BoxSet,
    pub mass: f64,
    /// `None` stands for the zero measure.
    pub measure: Option<ReiterMeasure>,
}

pub fn conditional_measure(nu: &ReiterMeasure, tile: &BoxSet) -> Result<ConditionalMeasure> {
    let measure = match nu {
        ReiterMeasure::UniformBox(w) => {
            let cut = w.intersect(tile);
            if cut.is_empty() {
                None
            } else {
                Some(ReiterMeasure::UniformBox(cut))
            }
        }
        ReiterMeasure::Atomic { support, weights } => {
            let inside: Vec<(GroupPoint, f64)> = support
                .iter()
                .zip(weights)
                .filter(|(p, w)| tile.contains(p) && **w > 0.0)
                .map(|(p, w)| (*p, *w))
                .collect();
            restrict(support.dim(), inside)?
        }
    };
    Ok(ConditionalMeasure {
        tile: *tile,
        mass: nu.mass_of_box(tile),
        measure,
    })
}

/// Conditioning on an arbitrary finite set.
pub fn conditional_on_set(nu: &ReiterMeasure, set: &FiniteSet) -> Result<Option<ReiterMeasure>> {
    let inside: Vec<(GroupPoint, f64)> = set
        .iter()
        .map(|p| (*p, nu.weight_at(p)))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    restrict(set.dim(), inside)
}

fn restrict(d: usize, inside: Vec<(GroupPoint, f64)>) -> Result<Option<ReiterMeasure>> {
    let mass: f64 = inside.iter().map(|a| a.1).sum();
    if !(mass > 0.0) {
        return Ok(None);
    }
    let pairs: Vec<(GroupPoint, f64)> = inside.into_iter().map(|(p, w)| (p, w / mass)).collect();
    let total: f64 = pairs.iter().map(|a| a.1).sum();
    ReiterMeasure::from_pairs(d, pairs.into_iter().map(|(p, w)| (p, w / total))).map(Some)
}

/// The two sums of the good-tiling lemma for one `g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySums {
    pub g: GroupPoint,
    /// Σ_T ν(gT ∖ T) = ν{x : tile(x − g) ≠ tile(x)}.
    pub sum1: f64,
    /// Σ_T ν(T ∖ g⁻¹T) = ν{x : tile(x + g) ≠ tile(x)}.
    pub sum2: f64,
}

pub fn tile_boundary_sums(t: &Tiling, nu: &ReiterMeasure, q: &FiniteSet) -> Result<Vec<BoundarySums>> {
    if q.dim() != t.d || nu.dim() != t.d {
        return Err(Error::DimensionMismatch {
            expected: t.d,
            found: if q.dim() != t.d { q.dim() } else { nu.dim() },
        });
    }
    Ok(q.iter()
        .map(|g| BoundarySums {
            g: *g,
            sum1: leaving_mass(t, nu, &-*g),
            sum2: leaving_mass(t, nu, g),
        })
        .collect())
}

/// ν{x : tile(x + g) ≠ tile(x)}.
fn leaving_mass(t: &Tiling, nu: &ReiterMeasure, g: &GroupPoint) -> f64 {
    match nu {
        ReiterMeasure::UniformBox(w) => {
            let s = t.side() as i128;
            let mut stay = 1.0;
            for a in 0..t.d {
                let ga = g.coord(a) as i128;
                let (alpha, beta) = ((-ga).max(0), (s - ga).min(s));
                let len = w.side(a) as i128;
                let count = if beta <= alpha {
                    0
                } else {
                    residue_count(w.lo.coord(a) as i128, w.hi.coord(a) as i128, s, alpha, beta)
                };
                stay *= count as f64 / len as f64;
            }
            1.0 - stay
        }
        ReiterMeasure::Atomic { support, weights } => {
            let pts = support.points();
            let partial: Vec<f64> = pts
                .par_chunks(4096)
                .zip(weights.par_chunks(4096))
                .map(|(p, w)| {
                    p.iter()
                        .zip(w)
                        .filter(|(x, _)| t.tile_of(&(**x + *g)) != t.tile_of(x))
                        .map(|(_, w)| *w)
                        .sum::<f64>()
                })
                .collect();
            partial.into_iter().sum()
        }
    }
}

/// #{x ∈ [a, b) : x mod s ∈ [α, β)} for 0 ≤ α < β ≤ s.
fn residue_count(a: i128, b: i128, s: i128, alpha: i128, beta: i128) -> i128 {
    let f = |n: i128| n.div_euclid(s) * (beta - alpha) + (n.rem_euclid(s) - alpha).clamp(0, beta - alpha);
    f(b) - f(a)
}

/// Hypothesis of the lemma: ν is (Q + U − U, ε/(M|U|))-invariant with M = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaHypothesis {
    pub defect: f64,
    pub threshold: f64,
    pub holds: bool,
}

pub fn lemma_hypothesis(t: &Tiling, nu: &ReiterMeasure, q: &FiniteSet, eps: f64) -> Result<LemmaHypothesis> {
    let threshold = eps / t.shape_volume() as f64;
    let s = t.side();
    let defect = match nu {
        ReiterMeasure::UniformBox(w) => q
            .iter()
            .map(|g| {
                let mut k = *g;
                for a in 0..t.d {
                    let extreme = g.coord(a).abs() + s - 1;
                    k = with_coord(k, a, extreme);
                }
                box_translate_defect(w, &k)
            })
            .fold(0.0, f64::max),
        ReiterMeasure::Atomic { support, .. } => {
            let span = BoxSet::cube(t.d, -(s - 1), s);
            let work = span.volume() * q.len() as u128 * support.len() as u128;
            if work > 1 << 34 {
                return Err(Error::TooLarge(format!("hypothesis check needs {work} lookups")));
            }
            let shifts: Vec<GroupPoint> = q.iter().flat_map(|g| span.points().map(move |u| *g + u)).collect();
            shifts
                .par_iter()
                .map(|k| nu.translate_defect(k))
                .collect::<Vec<_>>()
                .into_iter()
                .fold(0.0, f64::max)
        }
    };
    Ok(LemmaHypothesis {
        defect,
        threshold,
        holds: defect < threshold,
    })
}

fn with_coord(g: GroupPoint, axis: usize, value: i64) -> GroupPoint {
    let mut c = [g.coord(0), if g.dim() == 2 { g.coord(1) } else { 0 }];
    c[axis] = value;
    GroupPoint::new(&c[..g.dim()]).expect("dimension preserved")
}

/// A finite union of tiles, stored as boxes of tile indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileUnion {
    pub tiling: Tiling,
    pub blocks: Vec<BoxSet>,
    /// ν(D) for the measure the union was selected for.
    pub mass: f64,
    pub tile_count: u128,
}

impl TileUnion {
    pub fn is_empty(&self) -> bool {
        self.tile_count == 0
    }

    pub fn contains(&self, g: &GroupPoint) -> bool {
        let idx = self.tiling.tile_of(g);
        self.blocks.iter().any(|b| b.contains(&idx))
    }

    pub fn to_finite_set(&self) -> Result<FiniteSet> {
        let total = self.tile_count * self.tiling.shape_volume();
        if total > MATERIALIZE_LIMIT {
            return Err(Error::TooLarge(format!("tile union of {total} points")));
        }
        let mut pts = Vec::with_capacity(total as usize);
        for b in &self.blocks {
            for idx in b.points() {
                pts.extend(self.tiling.tile_box(&idx).points());
            }
        }
        FiniteSet::from_points(self.tiling.d, pts)
    }
}

/// Union D of the tiles T with ν(T) > 0 whose conditional ν_T is
/// (Q, √ε·|Q|)-invariant, restricted to tiles meeting the support of ν.
pub fn good_tile_selection(t: &Tiling, nu: &ReiterMeasure, q: &FiniteSet, eps: f64) -> Result<TileUnion> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon {eps} must be positive")));
    }
    let threshold = eps.sqrt() * q.len() as f64;
    let invariant = |m: &ReiterMeasure| q.iter().all(|g| m.translate_defect(g) < threshold);
    match nu {
        ReiterMeasure::UniformBox(w) => {
            // Along each axis the tiles meeting the window fall into at most
            // three classes (first, interior, last) by their cut length.
            let range = t.tile_range(w);
            let mut axis_classes: Vec<Vec<(i64, i64, i64)>> = Vec::new();
            for a in 0..t.d {
                let (i0, i1) = (range.lo.coord(a), range.hi.coord(a));
                let mut classes: Vec<(i64, i64, i64)> = Vec::new();
                for (lo, hi) in [(i0, i0 + 1), (i0 + 1, i1 - 1), (i1 - 1, i1)] {
                    let (lo, hi) = (lo.max(i0), hi.min(i1));
                    if lo >= hi || classes.iter().any(|c| c.0 <= lo && hi <= c.1) {
                        continue;
                    }
                    let s = t.side();
                    let len = ((lo * s + s).min(w.hi.coord(a)) - (lo * s).max(w.lo.coord(a))).max(0);
                    classes.push((lo, hi, len));
                }
                axis_classes.push(classes);
            }
            let combos: Vec<Vec<(i64, i64, i64)>> = if t.d == 1 {
                axis_classes[0].iter().map(|c| vec![*c]).collect()
            } else {
                axis_classes[0]
                    .iter()
                    .flat_map(|x| axis_classes[1].iter().map(move |y| vec![*x, *y]))
                    .collect()
            };
            let mut blocks = Vec::new();
            let (mut mass, mut count) = (0.0, 0u128);
            for combo in combos {
                let lo: Vec<i64> = combo.iter().map(|c| c.0).collect();
                let hi: Vec<i64> = combo.iter().map(|c| c.1).collect();
                let block = BoxSet::new(GroupPoint::new(&lo)?, GroupPoint::new(&hi)?)?;
                let rep = t.tile_box(&block.lo).intersect(w);
                if rep.is_empty() || !invariant(&ReiterMeasure::UniformBox(rep)) {
                    continue;
                }
                let n = block.volume();
                count += n;
                mass += n as f64 * rep.volume() as f64 / w.volume() as f64;
                blocks.push(block);
            }
            blocks.sort_by_key(|b| b.lo);
            Ok(TileUnion {
                tiling: *t,
                blocks,
                mass,
                tile_count: count,
            })
        }
        ReiterMeasure::Atomic { support, weights } => {
            let mut groups: BTreeMap<GroupPoint, Vec<(GroupPoint, f64)>> = BTreeMap::new();
            for (p, w) in support.iter().zip(weights) {
                if *w > 0.0 {
                    groups.entry(t.tile_of(p)).or_default().push((*p, *w));
                }
            }
            let groups: Vec<(GroupPoint, Vec<(GroupPoint, f64)>)> = groups.into_iter().collect();
            let verdicts: Vec<Option<(GroupPoint, f64)>> = groups
                .into_par_iter()
                .map(|(idx, atoms)| {
                    let mass: f64 = atoms.iter().map(|a| a.1).sum();
                    let cond = restrict(t.d, atoms).ok().flatten()?;
                    invariant(&cond).then_some((idx, mass))
                })
                .collect();
            let mut blocks = Vec::new();
            let mut mass = 0.0;
            for (idx, m) in verdicts.into_iter().flatten() {
                blocks.push(BoxSet {
                    lo: idx,
                    hi: idx + ones(t.d),
                });
                mass += m;
            }
            let count = blocks.len() as u128;
            Ok(TileUnion {
                tiling: *t,
                blocks,
                mass,
                tile_count: count,
            })
        }
    }
}

/// One CSV row of a tiling audit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileAuditRow {
    pub g: GroupPoint,
    pub sum1: f64,
    pub sum2: f64,
    pub bound3eps: f64,
    pub bound4eps: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TilingAudit {
    pub tiling: TilingRecord,
    pub epsilon: f64,
    pub shape_defect: f64,
    pub hypothesis: LemmaHypothesis,
    pub rows: Vec<TileAuditRow>,
    pub good_mass: f64,
    pub good_bound: f64,
    pub good_tiles: u128,
    /// All bounds hold (vacuously true when the hypothesis fails).
    pub pass: bool,
}

impl TilingAudit {
    pub fn csv(&self) -> String {
        let mut s = String::from("g,sum1,sum2,bound3eps,bound4eps,pass\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{}\n",
                r.g, r.sum1, r.sum2, r.bound3eps, r.bound4eps, r.pass
            ));
        }
        s
    }
}

/// Checks both boundary-sum bounds and the good-tile mass bound. The bounds
/// are asserted only when the shape is (Q, ε)-invariant and ν satisfies the
/// hypothesis; otherwise the audit records the numbers and passes vacuously.
pub fn audit_tiling(t: &Tiling, nu: &ReiterMeasure, q: &FiniteSet, eps: f64) -> Result<TilingAudit> {
    let hypothesis = lemma_hypothesis(t, nu, q, eps)?;
    let shape = t.shape();
    let shape_ok = q.iter().all(|g| box_translate_defect(&shape, g) <= eps);
    let applies = hypothesis.holds && shape_ok;
    let rows: Vec<TileAuditRow> = tile_boundary_sums(t, nu, q)?
        .into_iter()
        .map(|b| TileAuditRow {
            g: b.g,
            sum1: b.sum1,
            sum2: b.sum2,
            bound3eps: 3.0 * eps,
            bound4eps: 4.0 * eps,
            pass: !applies || (b.sum1 < 3.0 * eps && b.sum2 < 4.0 * eps),
        })
        .collect();
    let good = good_tile_selection(t, nu, q, eps)?;
    let good_bound = 1.0 - 4.0 * eps.sqrt();
    let pass = rows.iter().all(|r| r.pass) && (!applies || good.mass > good_bound);
    Ok(TilingAudit {
        tiling: TilingRecord::new(t, match nu {
            ReiterMeasure::UniformBox(w) => Some(*w),
            _ => None,
        }),
        epsilon: eps,
        shape_defect: t.shape_defect(),
        hypothesis,
        rows,
        good_mass: good.mass,
        good_bound,
        good_tiles: good.tile_count,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::set_invariance_defect;

    #[test]
    fn level_three_covers_window() {
        let t = Tiling::new(1, 3).unwrap();
        assert_eq!(t.shape(), BoxSet::interval(0, 8));
        let w = BoxSet::interval(0, 64);
        assert!(t.exact_cover(&w).unwrap());
        assert_eq!(t.tile_range(&w).volume(), 8);
        assert!(t.is_aligned(&w));
        let t2 = Tiling::new(2, 3).unwrap();
        assert!(t2.exact_cover(&BoxSet::cube(2, -20, 37)).unwrap());
    }

    #[test]
    fn congruence_chain() {
        for d in 1..=2 {
            for k in 0..10u32 {
                let fine = Tiling::new(d, k).unwrap();
                let coarse = Tiling::new(d, k + 1).unwrap();
                let w = BoxSet::cube(d, -64, 64);
                assert!(coarse.is_union_of(&fine, &w));
                let first = coarse.tile_box(&GroupPoint::origin(d));
                assert_eq!(fine.tile_range(&first).volume(), 1u128 << d);
            }
        }
        let a = Tiling::new(1, 3).unwrap();
        let b = Tiling::new(1, 4).unwrap();
        assert!(!a.is_union_of(&b, &BoxSet::interval(0, 32)));
    }

    #[test]
    fn shape_defect_matches_enumeration() {
        let t = Tiling::new(1, 10).unwrap();
        let shape = t.shape().to_finite_set().unwrap();
        let d = set_invariance_defect(&shape, &FiniteSet::interval(1, 1)).unwrap();
        assert_eq!(d, 1.0 / 512.0);
        assert_eq!(t.shape_defect(), d);
        let t2 = Tiling::new(2, 4).unwrap();
        let gens = GroupPoint::unit_generators(2);
        let d2 = set_invariance_defect(&t2.shape().to_finite_set().unwrap(), &gens).unwrap();
        assert_eq!(t2.shape_defect(), d2);
    }

    #[test]
    fn boundary_sums_for_uniform_window() {
        let t = Tiling::new(1, 8).unwrap();
        let nu = ReiterMeasure::uniform_box(BoxSet::interval(0, 4096)).unwrap();
        let q = FiniteSet::from_points(1, [GroupPoint::d1(0), GroupPoint::d1(1)]).unwrap();
        let sums = tile_boundary_sums(&t, &nu, &q).unwrap();
        assert_eq!((sums[0].sum1, sums[0].sum2), (0.0, 0.0));
        assert!((sums[1].sum1 - 1.0 / 256.0).abs() < 1e-15);
        assert!(sums[1].sum1 < 3.0 * t.shape_defect());
        // Same numbers from the atomic representation.
        let atomic = ReiterMeasure::uniform(&BoxSet::interval(0, 4096).to_finite_set().unwrap()).unwrap();
        let sums_a = tile_boundary_sums(&t, &atomic, &q).unwrap();
        assert!((sums_a[1].sum1 - sums[1].sum1).abs() < 1e-12);
        assert!((sums_a[1].sum2 - sums[1].sum2).abs() < 1e-12);
    }

    #[test]
    fn residue_counts() {
        assert_eq!(residue_count(0, 16, 8, 1, 8), 14);
        assert_eq!(residue_count(-5, 5, 4, 0, 2), 5);
        let brute = (-17i128..23).filter(|x| (1..3).contains(&x.rem_euclid(5))).count() as i128;
        assert_eq!(residue_count(-17, 23, 5, 1, 3), brute);
    }

    #[test]
    fn conditional_examples() {
        let nu = ReiterMeasure::uniform(&FiniteSet::interval(0, 99)).unwrap();
        let c = conditional_measure(&nu, &BoxSet::interval(0, 10)).unwrap();
        assert!((c.mass - 0.1).abs() < 1e-12);
        let m = c.measure.unwrap();
        for g in 0..10 {
            assert!((m.weight_at(&GroupPoint::d1(g)) - 0.1).abs() < 1e-12);
        }
        let empty = conditional_measure(&nu, &BoxSet::interval(200, 210)).unwrap();
        assert_eq!((empty.mass, empty.measure), (0.0, None));
        let nu = ReiterMeasure::from_pairs(1, [(GroupPoint::d1(0), 0.1), (GroupPoint::d1(1), 0.3), (GroupPoint::d1(50), 0.6)]).unwrap();
        let c = conditional_measure(&nu, &BoxSet::interval(0, 8)).unwrap().measure.unwrap();
        assert!((c.weight_at(&GroupPoint::d1(0)) - 0.25).abs() < 1e-15);
        assert!((c.weight_at(&GroupPoint::d1(1)) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn good_tiles_drop_partial_tile() {
        let t = Tiling::new(1, 8).unwrap();
        let nu = ReiterMeasure::uniform_box(BoxSet::interval(0, 4103)).unwrap();
        let q = GroupPoint::unit_generators(1);
        let d = good_tile_selection(&t, &nu, &q, t.shape_defect()).unwrap();
        assert_eq!(d.tile_count, 16);
        assert!((d.mass - 4096.0 / 4103.0).abs() < 1e-12);
        assert!(!d.contains(&GroupPoint::d1(4100)) && d.contains(&GroupPoint::d1(4095)));
        let atomic = ReiterMeasure::uniform(&BoxSet::interval(0, 4103).to_finite_set().unwrap()).unwrap();
        let da = good_tile_selection(&t, &atomic, &q, t.shape_defect()).unwrap();
        assert_eq!(da.tile_count, 16);
        assert!((da.mass - d.mass).abs() < 1e-12);
    }

    #[test]
    fn point_mass_has_no_good_tiles() {
        let t = Tiling::new(1, 4).unwrap();
        let nu = ReiterMeasure::point_mass(GroupPoint::d1(0));
        let q = GroupPoint::unit_generators(1);
        assert!(good_tile_selection(&t, &nu, &q, 0.01).unwrap().is_empty());
        assert!(!lemma_hypothesis(&t, &nu, &q, 0.01).unwrap().holds);
    }

    #[test]
    fn audit_passes_under_hypothesis() {
        let t = Tiling::new(1, 8).unwrap();
        let eps = t.shape_defect();
        let side = 1i64 << 34;
        let nu = ReiterMeasure::uniform_box(BoxSet::interval(0, side)).unwrap();
        let q = GroupPoint::unit_generators(1);
        let audit = audit_tiling(&t, &nu, &q, eps).unwrap();
        assert!(audit.hypothesis.holds, "{:?}", audit.hypothesis);
        assert!(audit.pass);
        assert!(audit.good_mass > audit.good_bound);
        assert!(audit.csv().starts_with("g,sum1,sum2,bound3eps,bound4eps,pass\n"));
    }
}
