//! Finite-window machinery for ℤ^d, d ∈ {1, 2}: lattice points, finite sets,
//! boxes, Følner families, Reiter measures and their invariance defects.
//!
//! Translation in ℤ^d is written additively: the left translate `kF` of a set
//! is `F + k`.

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};

/// Above this many points a box is not materialized.
pub const MATERIALIZE_LIMIT: u128 = 1 << 26;

/// Weights below this are dropped from atomic measures.
pub const PRUNE_BELOW: f64 = 1e-15;

pub(crate) fn check_dim(d: usize) -> Result<usize> {
    if d == 1 || d == 2 {
        Ok(d)
    } else {
        Err(Error::InvalidDimension(d))
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A point of ℤ^d.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GroupPoint {
    dim: u8,
    coords: [i64; 2],
}

impl GroupPoint {
    pub fn new(coords: &[i64]) -> Result<Self> {
        let d = check_dim(coords.len())?;
        let mut c = [0; 2];
        c[..d].copy_from_slice(coords);
        Ok(Self { dim: d as u8, coords: c })
    }

    pub const fn d1(x: i64) -> Self {
        Self { dim: 1, coords: [x, 0] }
    }

    pub const fn d2(x: i64, y: i64) -> Self {
        Self { dim: 2, coords: [x, y] }
    }

    pub fn origin(d: usize) -> Self {
        Self {
            dim: d as u8,
            coords: [0, 0],
        }
    }

    pub fn unit(d: usize, axis: usize) -> Self {
        let mut p = Self::origin(d);
        p.coords[axis] = 1;
        p
    }

    /// `{±e_i}`, the symmetric generating set.
    pub fn unit_generators(d: usize) -> FiniteSet {
        let mut pts = Vec::with_capacity(2 * d);
        for axis in 0..d {
            let u = Self::unit(d, axis);
            pts.push(u);
            pts.push(-u);
        }
        FiniteSet::from_points(d, pts).expect("unit vectors share a dimension")
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim()]
    }

    pub fn coord(&self, axis: usize) -> i64 {
        self.coords[axis]
    }

    pub fn is_origin(&self) -> bool {
        self.coords == [0, 0]
    }

    pub fn linf_norm(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coords()
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, k: i64) -> Self {
        Self {
            dim: self.dim,
            coords: [self.coords[0] * k, self.coords[1] * k],
        }
    }

    /// Coordinate-wise floor division by `s > 0`.
    pub fn div_floor(&self, s: i64) -> Self {
        Self {
            dim: self.dim,
            coords: [self.coords[0].div_euclid(s), self.coords[1].div_euclid(s)],
        }
    }

    pub fn dot_f64(&self, theta: &[f64]) -> f64 {
        self.coords()
            .iter()
            .zip(theta)
            .map(|(&c, &t)| c as f64 * t)
            .sum()
    }
}

impl Add for GroupPoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        Self {
            dim: self.dim,
            coords: [self.coords[0] + o.coords[0], self.coords[1] + o.coords[1]],
        }
    }
}

impl Sub for GroupPoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        debug_assert_eq!(self.dim, o.dim);
        Self {
            dim: self.dim,
            coords: [self.coords[0] - o.coords[0], self.coords[1] - o.coords[1]],
        }
    }
}

impl Neg for GroupPoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            dim: self.dim,
            coords: [-self.coords[0], -self.coords[1]],
        }
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            1 => write!(f, "{}", self.coords[0]),
            _ => write!(f, "{} {}", self.coords[0], self.coords[1]),
        }
    }
}

// Serialized as a bare integer in d=1 and as `[x, y]` in d=2.
impl Serialize for GroupPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.dim == 1 {
            s.serialize_i64(self.coords[0])
        } else {
            let mut seq = s.serialize_seq(Some(2))?;
            seq.serialize_element(&self.coords[0])?;
            seq.serialize_element(&self.coords[1])?;
            seq.end()
        }
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Scalar(i64),
            Vector(Vec<i64>),
        }
        match Repr::deserialize(d)? {
            Repr::Scalar(x) => Ok(GroupPoint::d1(x)),
            Repr::Vector(v) => GroupPoint::new(&v).map_err(de::Error::custom),
        }
    }
}

/// A finite, deduplicated subset of ℤ^d kept in sorted order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteSet {
    dim: usize,
    points: Vec<GroupPoint>,
}

impl FiniteSet {
    pub fn empty(d: usize) -> Self {
        Self {
            dim: d,
            points: Vec::new(),
        }
    }

    pub fn from_points(d: usize, points: impl IntoIterator<Item = GroupPoint>) -> Result<Self> {
        check_dim(d)?;
        let mut pts: Vec<GroupPoint> = points.into_iter().collect();
        for p in &pts {
            same_dim(d, p.dim())?;
        }
        pts.sort_unstable();
        pts.dedup();
        Ok(Self { dim: d, points: pts })
    }

    /// `[a, b] ∩ ℤ` (inclusive; empty when `b < a`).
    pub fn interval(a: i64, b: i64) -> Self {
        Self {
            dim: 1,
            points: (a..=b).map(GroupPoint::d1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GroupPoint] {
        &self.points
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupPoint> + '_ {
        self.points.iter()
    }

    pub fn index_of(&self, g: &GroupPoint) -> Option<usize> {
        self.points.binary_search(g).ok()
    }

    pub fn contains(&self, g: &GroupPoint) -> bool {
        self.index_of(g).is_some()
    }

    /// The translate `F + k`.
    pub fn translate(&self, k: &GroupPoint) -> Self {
        Self {
            dim: self.dim,
            points: self.points.iter().map(|&p| p + *k).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        Self::from_points(self.dim, self.points.iter().chain(other.points.iter()).copied())
    }

    /// Minkowski sum `A + B`.
    pub fn sumset(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        let mut out = Vec::with_capacity(self.len() * other.len());
        for &a in &self.points {
            for &b in &other.points {
                out.push(a + b);
            }
        }
        Self::from_points(self.dim, out)
    }

    pub fn negate(&self) -> Self {
        let mut pts: Vec<GroupPoint> = self.points.iter().map(|&p| -p).collect();
        pts.sort_unstable();
        Self {
            dim: self.dim,
            points: pts,
        }
    }

    /// Smallest half-open box containing the set.
    pub fn bounding_box(&self) -> Option<BoxSet> {
        let first = self.points.first()?;
        let mut lo = *first;
        let mut hi = *first;
        for p in &self.points {
            for axis in 0..self.dim {
                lo.coords[axis] = lo.coords[axis].min(p.coords[axis]);
                hi.coords[axis] = hi.coords[axis].max(p.coords[axis]);
            }
        }
        for axis in 0..self.dim {
            hi.coords[axis] += 1;
        }
        Some(BoxSet { lo, hi })
    }

    /// One point per line: `x` or `x y`.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        for p in &self.points {
            s.push_str(&p.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse_lines(d: usize, text: &str) -> Result<Self> {
        check_dim(d)?;
        let mut pts = Vec::new();
        for (lineno, line) in data_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d {
                return Err(Error::Parse(format!("line {lineno}: expected {d} coordinates")));
            }
            pts.push(parse_point(&fields, lineno)?);
        }
        Self::from_points(d, pts)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_point(fields: &[&str], lineno: usize) -> Result<GroupPoint> {
    let coords = fields
        .iter()
        .map(|f| {
            f.parse::<i64>()
                .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupPoint::new(&coords)
}

/// Half-open axis-aligned box `[lo, hi)` in ℤ^d.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BoxSet {
    pub lo: GroupPoint,
    pub hi: GroupPoint,
}

impl BoxSet {
    pub fn new(lo: GroupPoint, hi: GroupPoint) -> Result<Self> {
        same_dim(lo.dim(), hi.dim())?;
        if (0..lo.dim()).any(|a| hi.coords[a] < lo.coords[a]) {
            return Err(Error::InvalidInput(format!("box [{lo}) .. [{hi}) has negative side")));
        }
        Ok(Self { lo, hi })
    }

    /// `[a, b)` in ℤ.
    pub fn interval(a: i64, b: i64) -> Self {
        Self {
            lo: GroupPoint::d1(a),
            hi: GroupPoint::d1(b.max(a)),
        }
    }

    /// `[a, b)^d`.
    pub fn cube(d: usize, a: i64, b: i64) -> Self {
        let b = b.max(a);
        Self {
            lo: GroupPoint {
                dim: d as u8,
                coords: [a, if d == 2 { a } else { 0 }],
            },
            hi: GroupPoint {
                dim: d as u8,
                coords: [b, if d == 2 { b } else { 0 }],
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn side(&self, axis: usize) -> i64 {
        self.hi.coords[axis] - self.lo.coords[axis]
    }

    pub fn volume(&self) -> u128 {
        (0..self.dim()).map(|a| self.side(a) as u128).product()
    }

    pub fn is_empty(&self) -> bool {
        self.volume() == 0
    }

    pub fn contains(&self, g: &GroupPoint) -> bool {
        (0..self.dim()).all(|a| self.lo.coords[a] <= g.coords[a] && g.coords[a] < self.hi.coords[a])
    }

    pub fn contains_box(&self, other: &BoxSet) -> bool {
        other.is_empty()
            || (0..self.dim()).all(|a| {
                self.lo.coords[a] <= other.lo.coords[a] && other.hi.coords[a] <= self.hi.coords[a]
            })
    }

    pub fn intersect(&self, other: &BoxSet) -> BoxSet {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for a in 0..self.dim() {
            lo.coords[a] = lo.coords[a].max(other.lo.coords[a]);
            hi.coords[a] = hi.coords[a].min(other.hi.coords[a]).max(lo.coords[a]);
        }
        BoxSet { lo, hi }
    }

    pub fn translate(&self, k: &GroupPoint) -> BoxSet {
        BoxSet {
            lo: self.lo + *k,
            hi: self.hi + *k,
        }
    }

    /// Lexicographic enumeration of the points.
    pub fn points(&self) -> impl Iterator<Item = GroupPoint> + '_ {
        let d = self.dim();
        let (x0, x1) = (self.lo.coords[0], self.hi.coords[0]);
        let (y0, y1) = if d == 2 {
            (self.lo.coords[1], self.hi.coords[1])
        } else {
            (0, 1)
        };
        (x0..x1).flat_map(move |x| {
            (y0..y1).map(move |y| GroupPoint {
                dim: d as u8,
                coords: [x, if d == 2 { y } else { 0 }],
            })
        })
    }

    pub fn to_finite_set(&self) -> Result<FiniteSet> {
        if self.volume() > MATERIALIZE_LIMIT {
            return Err(Error::TooLarge(format!("box of {} points", self.volume())));
        }
        Ok(FiniteSet {
            dim: self.dim(),
            points: self.points().collect(),
        })
    }
}

/// Standard Følner sequences of ℤ^d, indexed from `n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FolnerFamily {
    /// `F_N = [1, N] ∩ ℤ`.
    Interval,
    /// `F_N = [1, N]^d`.
    Box { d: usize },
    /// `F_n = [n³, n³ + 2n] ∩ ℤ`.
    ShiftedCubic,
    /// Explicit list; `F_n` is the `n`-th entry.
    CustomList { sets: Vec<Vec<GroupPoint>> },
}

impl FolnerFamily {
    pub fn dim(&self) -> usize {
        match self {
            FolnerFamily::Box { d } => *d,
            FolnerFamily::CustomList { sets } => sets
                .iter()
                .flat_map(|s| s.first())
                .map(|p| p.dim())
                .next()
                .unwrap_or(1),
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FolnerFamily::Interval => "interval",
            FolnerFamily::Box { .. } => "box",
            FolnerFamily::ShiftedCubic => "shifted-cubic",
            FolnerFamily::CustomList { .. } => "custom-list",
        }
    }

    /// The member as a box, for the kinds that are boxes.
    pub fn member_box(&self, n: usize) -> Option<BoxSet> {
        let n = n.max(1) as i64;
        match self {
            FolnerFamily::Interval => Some(BoxSet::interval(1, n + 1)),
            FolnerFamily::Box { d } => Some(BoxSet::cube(*d, 1, n + 1)),
            FolnerFamily::ShiftedCubic => {
                let c = n.checked_pow(3)?;
                Some(BoxSet::interval(c, c + 2 * n + 1))
            }
            FolnerFamily::CustomList { .. } => None,
        }
    }

    pub fn member(&self, n: usize) -> Result<FiniteSet> {
        if n == 0 {
            return Err(Error::InvalidInput("Følner families are indexed from 1".into()));
        }
        match self {
            FolnerFamily::CustomList { sets } => {
                let s = sets
                    .get(n - 1)
                    .ok_or_else(|| Error::InvalidInput(format!("custom family has no member {n}")))?;
                let d = s.first().map(|p| p.dim()).ok_or(Error::EmptySet)?;
                FiniteSet::from_points(d, s.iter().copied())
            }
            _ => self
                .member_box(n)
                .ok_or_else(|| Error::TooLarge(format!("member {n} overflows")))?
                .to_finite_set(),
        }
    }

    /// Largest `n <= cap` whose member, enlarged by `margin` in every
    /// direction, fits inside `horizon`.
    pub fn largest_index_within(&self, horizon: &BoxSet, margin: i64, cap: usize) -> Option<usize> {
        let fits = |n: usize| -> bool {
            match self.member_box(n) {
                Some(b) => {
                    let mut grown = b;
                    for a in 0..b.dim() {
                        grown.lo.coords[a] -= margin;
                        grown.hi.coords[a] += margin;
                    }
                    horizon.contains_box(&grown)
                }
                None => match self.member(n) {
                    Ok(set) => set.bounding_box().is_some_and(|b| {
                        let mut grown = b;
                        for a in 0..b.dim() {
                            grown.lo.coords[a] -= margin;
                            grown.hi.coords[a] += margin;
                        }
                        horizon.contains_box(&grown)
                    }),
                    Err(_) => false,
                },
            }
        };
        match self {
            FolnerFamily::CustomList { sets } => (1..=sets.len().min(cap)).rev().find(|&n| fits(n)),
            FolnerFamily::ShiftedCubic => (1..=cap.min(2_000_000)).rev().find(|&n| fits(n)),
            _ => {
                // Members are nested, so bisect.
                if !fits(1) {
                    return None;
                }
                let (mut lo, mut hi) = (1usize, cap);
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    if fits(mid) {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                Some(lo)
            }
        }
    }
}

/// `max_{k ∈ K} |F △ (F + k)| / |F|`.
pub fn set_invariance_defect(f: &FiniteSet, k: &FiniteSet) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptySet);
    }
    same_dim(f.dim(), k.dim())?;
    let n = f.len() as f64;
    let mut worst: f64 = 0.0;
    for shift in k.iter() {
        let overlap = f.iter().filter(|&&x| f.contains(&(x - *shift))).count();
        worst = worst.max(2.0 * (f.len() - overlap) as f64 / n);
    }
    Ok(worst)
}

/// `|B △ (B + k)| / |B|` for a nonempty box, in closed form.
pub fn box_translate_defect(b: &BoxSet, k: &GroupPoint) -> f64 {
    let mut keep = 1.0;
    for a in 0..b.dim() {
        let side = b.side(a);
        let overlap = (side - k.coords[a].abs()).max(0);
        keep *= overlap as f64 / side as f64;
    }
    2.0 * (1.0 - keep)
}

/// A finitely supported probability measure on ℤ^d.
///
/// Uniform measures on boxes are kept intensionally so that windows far too
/// large to enumerate can still be audited in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum ReiterMeasure {
    Atomic {
        support: FiniteSet,
        weights: Vec<f64>,
    },
    UniformBox(BoxSet),
}

impl ReiterMeasure {
    pub fn from_weights(support: FiniteSet, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not a nonnegative real")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let d = support.dim();
        let (pts, ws): (Vec<_>, Vec<_>) = support
            .points
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w >= PRUNE_BELOW)
            .unzip();
        Ok(ReiterMeasure::Atomic {
            support: FiniteSet { dim: d, points: pts },
            weights: ws,
        })
    }

    /// Builds an atomic measure from unsorted, possibly repeated `(point, weight)`
    /// pairs.
    pub fn from_pairs(d: usize, pairs: impl IntoIterator<Item = (GroupPoint, f64)>) -> Result<Self> {
        let mut v: Vec<(GroupPoint, f64)> = pairs.into_iter().collect();
        for (p, _) in &v {
            same_dim(d, p.dim())?;
        }
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut pts: Vec<GroupPoint> = Vec::with_capacity(v.len());
        let mut ws: Vec<f64> = Vec::with_capacity(v.len());
        for (p, w) in v {
            if pts.last() == Some(&p) {
                *ws.last_mut().unwrap() += w;
            } else {
                pts.push(p);
                ws.push(w);
            }
        }
        Self::from_weights(FiniteSet { dim: d, points: pts }, ws)
    }

    pub fn uniform(set: &FiniteSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let w = 1.0 / set.len() as f64;
        Ok(ReiterMeasure::Atomic {
            support: set.clone(),
            weights: vec![w; set.len()],
        })
    }

    pub fn uniform_box(b: BoxSet) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(ReiterMeasure::UniformBox(b))
    }

    pub fn point_mass(g: GroupPoint) -> Self {
        ReiterMeasure::Atomic {
            support: FiniteSet {
                dim: g.dim(),
                points: vec![g],
            },
            weights: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ReiterMeasure::Atomic { support, .. } => support.dim(),
            ReiterMeasure::UniformBox(b) => b.dim(),
        }
    }

    pub fn support_size(&self) -> u128 {
        match self {
            ReiterMeasure::Atomic { support, .. } => support.len() as u128,
            ReiterMeasure::UniformBox(b) => b.volume(),
        }
    }

    pub fn weight_at(&self, g: &GroupPoint) -> f64 {
        match self {
            ReiterMeasure::Atomic { support, weights } => {
                support.index_of(g).map_or(0.0, |i| weights[i])
            }
            ReiterMeasure::UniformBox(b) => {
                if b.contains(g) {
                    1.0 / b.volume() as f64
                } else {
                    0.0
                }
            }
        }
    }

    pub fn mass_of(&self, set: &FiniteSet) -> f64 {
        set.iter().map(|g| self.weight_at(g)).sum()
    }

    pub fn mass_of_box(&self, b: &BoxSet) -> f64 {
        match self {
            ReiterMeasure::Atomic { support, weights } => support
                .iter()
                .zip(weights)
                .filter(|(p, _)| b.contains(p))
                .map(|(_, w)| *w)
                .sum(),
            ReiterMeasure::UniformBox(w) => {
                w.intersect(b).volume() as f64 / w.volume() as f64
            }
        }
    }

    /// `(point, weight)` pairs of an atomic measure, materializing boxes.
    pub fn atoms(&self) -> Result<Vec<(GroupPoint, f64)>> {
        match self {
            ReiterMeasure::Atomic { support, weights } => {
                Ok(support.iter().copied().zip(weights.iter().copied()).collect())
            }
            ReiterMeasure::UniformBox(b) => {
                let set = b.to_finite_set()?;
                let w = 1.0 / set.len() as f64;
                Ok(set.points.into_iter().map(|p| (p, w)).collect())
            }
        }
    }

    /// `Σ_g |ν(g + k) − ν(g)|`.
    pub fn translate_defect(&self, k: &GroupPoint) -> f64 {
        match self {
            ReiterMeasure::UniformBox(b) => box_translate_defect(b, k),
            ReiterMeasure::Atomic { support, weights } => {
                let mut total = 0.0;
                for (x, &w) in support.iter().zip(weights) {
                    total += (self.weight_at(&(*x + *k)) - w).abs();
                    if !support.contains(&(*x - *k)) {
                        total += w;
                    }
                }
                total
            }
        }
    }

    /// One `coord… weight` tuple per line.
    pub fn to_lines(&self) -> Result<String> {
        let mut s = String::new();
        for (p, w) in self.atoms()? {
            s.push_str(&format!("{p} {w}\n"));
        }
        Ok(s)
    }

    pub fn parse_lines(d: usize, text: &str) -> Result<Self> {
        check_dim(d)?;
        let mut pairs = Vec::new();
        for (lineno, line) in data_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d + 1 {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected {d} coordinates and a weight"
                )));
            }
            let p = parse_point(&fields[..d], lineno)?;
            let w: f64 = fields[d]
                .parse()
                .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
            pairs.push((p, w));
        }
        Self::from_pairs(d, pairs)
    }
}

/// `max_{k ∈ K} Σ_g |ν(k + g) − ν(g)|`.
pub fn measure_invariance_defect(nu: &ReiterMeasure, k: &FiniteSet) -> Result<f64> {
    same_dim(nu.dim(), k.dim())?;
    Ok(k.iter().map(|s| nu.translate_defect(s)).fold(0.0, f64::max))
}

/// Enumerates ℤ^d starting at the origin: the ray 0, 1, 2, … in d=1 and a
/// square spiral in d=2.
fn spiral(d: usize) -> Box<dyn Iterator<Item = GroupPoint>> {
    if d == 1 {
        return Box::new((0i64..).map(GroupPoint::d1));
    }
    Box::new(std::iter::once(GroupPoint::d2(0, 0)).chain((1i64..).flat_map(|r| {
        let right = (-r + 1..=r).map(move |y| GroupPoint::d2(r, y));
        let top = (-r..r).rev().map(move |x| GroupPoint::d2(x, r));
        let left = (-r..r).rev().map(move |y| GroupPoint::d2(-r, y));
        let bottom = (-r + 1..=r).map(move |x| GroupPoint::d2(x, -r));
        right.chain(top).chain(left).chain(bottom)
    })))
}

/// A set `K = {g_1, …, g_L}` of `L = ⌊1/ε⌋ + 1` points whose translates `F + g_i`
/// are pairwise disjoint. Any `(K, ε)`-invariant probability measure then gives
/// every translate of `F` mass at most `1/L + ε < 2ε`.
pub fn separating_set(f: &FiniteSet, eps: f64) -> Result<FiniteSet> {
    if f.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon {eps} outside (0, 1)")));
    }
    let count = (1.0 / eps).floor() as usize + 1;
    let mut occupied: HashSet<GroupPoint> = HashSet::new();
    let mut chosen = Vec::with_capacity(count);
    for g in spiral(f.dim()) {
        if chosen.len() == count {
            break;
        }
        if f.iter().all(|&x| !occupied.contains(&(x + g))) {
            occupied.extend(f.iter().map(|&x| x + g));
            chosen.push(g);
        }
    }
    FiniteSet::from_points(f.dim(), chosen)
}
