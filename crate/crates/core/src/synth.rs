//! Unimodular sequences on ℤ^d whose windowed correlations follow a prescribed
//! atomic spectral measure.
//!
//! A window is cut into the tiles of one dyadic level. Each tile T is given a
//! component j (in proportion to the weights γ_j) and a phase φ_T, and on T the
//! sequence is c_g = e(g·θ_j + φ_T), or 1 for the trivial component. Inside a
//! tile c_{g+h}·conj(c_g) = e(h·θ_j), so averages over windows spanning many
//! tiles approach Σ_j γ_j e(h·θ_j) = μ̂(h).

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{check_dim, BoxSet, FiniteSet, FolnerFamily, GroupPoint, ReiterMeasure};
use crate::spectral::{fourier_coefficient, SpectralMeasure};
use crate::tiling::Tiling;
use crate::torus::{e_turns, frac, rational_approx, TorusPoint};

/// Largest number of tiles a sequence may have.
pub const MAX_TILES: u128 = 1 << 24;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Theta {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Theta {
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Theta::Scalar(t) => vec![*t],
            Theta::Vector(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub theta: Theta,
    pub gamma: f64,
    #[serde(default)]
    pub trivial: bool,
}

/// Atomic spectral data: characters θ_j with weights γ_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSystem {
    pub d: usize,
    pub components: Vec<Component>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSystem {
    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        if self.components.is_empty() {
            return Err(Error::InvalidInput("model has no components".into()));
        }
        let mut total = 0.0;
        let mut trivial = 0;
        for c in &self.components {
            let th = c.theta.coords();
            if th.len() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    found: th.len(),
                });
            }
            if th.iter().any(|t| !t.is_finite()) || !(c.gamma >= 0.0) || !c.gamma.is_finite() {
                return Err(Error::InvalidInput("component with non-finite theta or negative gamma".into()));
            }
            if c.trivial {
                trivial += 1;
                if th.iter().any(|t| frac(*t) != 0.0) {
                    return Err(Error::InvalidInput("the trivial component must have theta = 0".into()));
                }
            }
            total += c.gamma;
        }
        if trivial > 1 {
            return Err(Error::InvalidInput("at most one trivial component".into()));
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("gamma weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// μ = Σ γ_j δ_{θ_j}.
    pub fn measure(&self) -> Result<SpectralMeasure> {
        self.validate()?;
        let atoms = self
            .components
            .iter()
            .map(|c| {
                let p = if c.trivial {
                    TorusPoint::zero(self.d)
                } else {
                    TorusPoint::new(&c.theta.coords())?
                };
                Ok((p, c.gamma))
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralMeasure::normalized(self.d, atoms)
    }

    /// Limit of the windowed averages: the weight of the trivial component.
    pub fn mean_target(&self) -> f64 {
        self.components.iter().filter(|c| c.trivial).map(|c| c.gamma).sum()
    }
}

/// Largest-remainder apportionment of `n` items to weights summing to 1.
pub fn apportion(weights: &[f64], n: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    counts
}

/// A synthesized sequence on a tile-aligned window.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSequence {
    tiling: Tiling,
    window: BoxSet,
    tiles: BoxSet,
    assignment: Vec<u32>,
    /// φ_T in turns (0 for trivial tiles).
    phases: Vec<f64>,
    thetas: Vec<[f64; 2]>,
    trivial: Vec<bool>,
}

pub fn synthesize(model: &ModelSystem, window: &BoxSet, level: u32) -> Result<SynthSequence> {
    model.validate()?;
    if window.dim() != model.d {
        return Err(Error::DimensionMismatch {
            expected: model.d,
            found: window.dim(),
        });
    }
    let tiling = Tiling::new(model.d, level)?;
    if window.is_empty() || !tiling.is_aligned(window) {
        return Err(Error::UnalignedWindow);
    }
    let tiles = tiling.tile_range(window);
    let n = tiles.volume();
    if n > MAX_TILES {
        return Err(Error::TooLarge(format!("{n} tiles")));
    }
    let n = n as usize;
    let weights: Vec<f64> = model.components.iter().map(|c| c.gamma).collect();
    let counts = apportion(&weights, n);
    let mut assignment: Vec<u32> = counts
        .iter()
        .enumerate()
        .flat_map(|(j, &c)| std::iter::repeat(j as u32).take(c))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    assignment.shuffle(&mut rng);
    let trivial: Vec<bool> = model.components.iter().map(|c| c.trivial).collect();
    let phases: Vec<f64> = assignment
        .iter()
        .map(|&j| if trivial[j as usize] { 0.0 } else { rng.gen::<f64>() })
        .collect();
    let thetas = model
        .components
        .iter()
        .map(|c| {
            let t = c.theta.coords();
            [frac(t[0]), if model.d == 2 { frac(t[1]) } else { 0.0 }]
        })
        .collect();
    Ok(SynthSequence {
        tiling,
        window: *window,
        tiles,
        assignment,
        phases,
        thetas,
        trivial,
    })
}

impl SynthSequence {
    pub fn window(&self) -> &BoxSet {
        &self.window
    }

    pub fn tiling(&self) -> &Tiling {
        &self.tiling
    }

    pub fn tile_count(&self) -> usize {
        self.assignment.len()
    }

    /// Per-component tile counts.
    pub fn component_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.thetas.len()];
        for &j in &self.assignment {
            counts[j as usize] += 1;
        }
        counts
    }

    fn tile_slot(&self, g: &GroupPoint) -> usize {
        let idx = self.tiling.tile_of(g) - self.tiles.lo;
        if self.tiling.dim() == 1 {
            idx.coord(0) as usize
        } else {
            (idx.coord(0) * self.tiles.side(1) + idx.coord(1)) as usize
        }
    }

    /// (component, phase) of the tile containing `g`.
    pub fn tile_data(&self, g: &GroupPoint) -> Result<(usize, f64)> {
        if !self.window.contains(g) {
            return Err(Error::OutOfHorizon);
        }
        let s = self.tile_slot(g);
        Ok((self.assignment[s] as usize, self.phases[s]))
    }

    /// Angle of c_g in turns.
    fn angle_unchecked(&self, g: &GroupPoint) -> f64 {
        let s = self.tile_slot(g);
        let j = self.assignment[s] as usize;
        if self.trivial[j] {
            return 0.0;
        }
        let th = &self.thetas[j];
        let mut a = self.phases[s];
        for (i, &c) in g.coords().iter().enumerate() {
            a += frac(c as f64 * th[i]);
        }
        frac(a)
    }

    pub fn angle(&self, g: &GroupPoint) -> Result<f64> {
        if !self.window.contains(g) {
            return Err(Error::OutOfHorizon);
        }
        Ok(self.angle_unchecked(g))
    }

    pub fn value(&self, g: &GroupPoint) -> Result<Complex64> {
        Ok(e_turns(self.angle(g)?))
    }

    /// (1/|F|) Σ_{g∈F} c_g.
    pub fn windowed_average(&self, f: &Window) -> Result<Complex64> {
        self.check(f, &GroupPoint::origin(self.tiling.dim()))?;
        Ok(f.sum(|g| e_turns(self.angle_unchecked(&g))) / f.len() as f64)
    }

    /// (1/|F|) Σ_{g∈F} c_{g+h}·conj(c_g).
    pub fn windowed_correlation(&self, f: &Window, h: &GroupPoint) -> Result<Complex64> {
        self.check(f, h)?;
        Ok(f.sum(|g| e_turns(self.angle_unchecked(&(g + *h)) - self.angle_unchecked(&g))) / f.len() as f64)
    }

    fn check(&self, f: &Window, h: &GroupPoint) -> Result<()> {
        if f.len() == 0 {
            return Err(Error::EmptySet);
        }
        if f.dim() != self.tiling.dim() || h.dim() != self.tiling.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.tiling.dim(),
                found: f.dim(),
            });
        }
        let inside = match f {
            Window::Box(b) => self.window.contains_box(b) && self.window.contains_box(&b.translate(h)),
            Window::Set(s) => s
                .iter()
                .all(|g| self.window.contains(g) && self.window.contains(&(*g + *h))),
        };
        if inside {
            Ok(())
        } else {
            Err(Error::OutOfHorizon)
        }
    }

    /// CSV rows `g,re,im` over a sub-box of the window.
    pub fn export_csv(&self, b: &BoxSet) -> Result<String> {
        if !self.window.contains_box(b) {
            return Err(Error::OutOfHorizon);
        }
        let mut s = String::from(if self.tiling.dim() == 1 { "g,re,im\n" } else { "g1,g2,re,im\n" });
        for g in b.points() {
            let z = e_turns(self.angle_unchecked(&g));
            let coords: Vec<String> = g.coords().iter().map(|c| c.to_string()).collect();
            s.push_str(&format!("{},{:.17e},{:.17e}\n", coords.join(","), z.re, z.im));
        }
        Ok(s)
    }
}

/// An averaging window: a box (enumerated lazily) or an explicit finite set.
#[derive(Clone, Debug)]
pub enum Window {
    Box(BoxSet),
    Set(FiniteSet),
}

impl Window {
    pub fn dim(&self) -> usize {
        match self {
            Window::Box(b) => b.dim(),
            Window::Set(s) => s.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Window::Box(b) => b.volume() as usize,
            Window::Set(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn point(&self, i: usize) -> GroupPoint {
        match self {
            Window::Set(s) => s.points()[i],
            Window::Box(b) => {
                if b.dim() == 1 {
                    GroupPoint::d1(b.lo.coord(0) + i as i64)
                } else {
                    let w = b.side(1) as usize;
                    GroupPoint::d2(b.lo.coord(0) + (i / w) as i64, b.lo.coord(1) + (i % w) as i64)
                }
            }
        }
    }

    /// Σ f(g) in fixed chunks, combined pairwise: the result does not depend
    /// on the thread count.
    fn sum(&self, f: impl Fn(GroupPoint) -> Complex64 + Sync) -> Complex64 {
        let n = self.len();
        let chunks = n.div_ceil(CHUNK);
        let partial: Vec<Complex64> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = Complex64::default();
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    acc += f(self.point(i));
                }
                acc
            })
            .collect();
        pairwise(partial)
    }
}

fn pairwise(mut v: Vec<Complex64>) -> Complex64 {
    if v.is_empty() {
        return Complex64::default();
    }
    while v.len() > 1 {
        v = v
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0] + c[1] } else { c[0] })
            .collect();
    }
    v[0]
}

/// Level for a horizon of side `len`: side ≥ 2^10, at least 32 tiles per
/// component, minimizing the apportionment error plus h_max/side.
pub fn choose_level(model: &ModelSystem, len: i64, h_max: i64) -> Result<u32> {
    model.validate()?;
    let weights: Vec<f64> = model.components.iter().map(|c| c.gamma).collect();
    let need = 32 * model.components.len() as u128;
    let mut best: Option<(f64, u32)> = None;
    for k in 10..=crate::tiling::MAX_LEVEL {
        let s = 1i64 << k;
        if s > len {
            break;
        }
        let tiles = ((len / s) as u128).pow(model.d as u32);
        if tiles < need || tiles > MAX_TILES {
            continue;
        }
        let counts = apportion(&weights, tiles as usize);
        let dev: f64 = counts
            .iter()
            .zip(&weights)
            .map(|(&c, w)| (c as f64 / tiles as f64 - w).abs())
            .sum();
        let score = dev + h_max as f64 / s as f64;
        if best.is_none_or(|(b, _)| score < b) {
            best = Some((score, k));
        }
    }
    best.map(|b| b.1)
        .ok_or_else(|| Error::InvalidInput(format!("no admissible tiling level for horizon {len}")))
}

/// A family to check, at a fixed index or at its largest index in the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyCheck {
    pub family: FolnerFamily,
    #[serde(default)]
    pub index: Option<usize>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub family: String,
    pub n: usize,
    pub h: GroupPoint,
    pub target_re: f64,
    pub target_im: f64,
    pub got_re: f64,
    pub got_im: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: String,
    pub n: usize,
    pub window_size: usize,
    pub sup_correlation_error: f64,
    pub mean_error: f64,
    pub tol: f64,
    pub pass: bool,
    /// C measured as sup error·√tiles.
    pub c_measured: f64,
    /// C/√tiles + 2·h_max·tiles/|F|, tiles counted inside the window.
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub level: u32,
    pub horizon: BoxSet,
    pub tiles: usize,
    pub families: Vec<FamilySummary>,
    pub rows: Vec<ConvergenceRow>,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("family,n,h,target_re,target_im,got_re,got_im,abs_err\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{:e},{:e}\n",
                r.family, r.n, r.h, r.target_re, r.target_im, r.got_re, r.got_im, r.abs_err
            ));
        }
        s
    }
}

/// The window `[−s, L)^d` used for verification: one guard tile below zero
/// so that negative shifts stay inside.
pub fn verification_window(d: usize, len: i64, level: u32) -> BoxSet {
    let s = 1i64 << level;
    let hi = len.div_euclid(s) * s;
    BoxSet::cube(d, -s, hi)
}

/// Synthesizes once on the horizon and compares windowed correlations with
/// μ̂(h) for h ∈ H and windowed averages with the trivial weight, per family.
pub fn verify_convergence(
    model: &ModelSystem,
    checks: &[FamilyCheck],
    shifts: &FiniteSet,
    horizon_len: i64,
    level: Option<u32>,
) -> Result<ConvergenceReport> {
    let h_max = shifts.iter().map(|h| h.linf_norm()).max().unwrap_or(0);
    let level = match level {
        Some(k) => k,
        None => choose_level(model, horizon_len, h_max)?,
    };
    let horizon = verification_window(model.d, horizon_len, level);
    let seq = synthesize(model, &horizon, level)?;
    let mu = model.measure()?;
    let mean_target = model.mean_target();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for check in checks {
        if check.family.dim() != model.d {
            return Err(Error::DimensionMismatch {
                expected: model.d,
                found: check.family.dim(),
            });
        }
        let n = match check.index {
            Some(n) => n,
            None => check
                .family
                .largest_index_within(&horizon, h_max, 1 << 40)
                .ok_or(Error::OutOfHorizon)?,
        };
        let window = match check.family.member_box(n) {
            Some(b) => Window::Box(b),
            None => Window::Set(check.family.member(n)?),
        };
        let name = check.family.name().to_string();
        let mut sup: f64 = 0.0;
        for h in shifts.iter() {
            let got = seq.windowed_correlation(&window, h)?;
            let target = fourier_coefficient(&mu, h);
            let err = (got - target).norm();
            sup = sup.max(err);
            rows.push(ConvergenceRow {
                family: name.clone(),
                n,
                h: *h,
                target_re: target.re,
                target_im: target.im,
                got_re: got.re,
                got_im: got.im,
                abs_err: err,
            });
        }
        let mean_error = (seq.windowed_average(&window)? - Complex64::new(mean_target, 0.0)).norm();
        let tiles_in = tiles_meeting(&seq, &window) as f64;
        let c_measured = sup * tiles_in.sqrt();
        let error_bound = c_measured / tiles_in.sqrt() + 2.0 * h_max as f64 * tiles_in / window.len() as f64;
        summaries.push(FamilySummary {
            family: name,
            n,
            window_size: window.len(),
            sup_correlation_error: sup,
            mean_error,
            tol: check.tol,
            pass: sup <= check.tol && mean_error <= check.tol,
            c_measured,
            error_bound,
        });
    }
    let pass = summaries.iter().all(|s| s.pass);
    Ok(ConvergenceReport {
        level,
        horizon,
        tiles: seq.tile_count(),
        families: summaries,
        rows,
        pass,
    })
}

fn tiles_meeting(seq: &SynthSequence, w: &Window) -> u128 {
    match w {
        Window::Box(b) => seq.tiling.tile_range(b).volume(),
        Window::Set(s) => {
            let set: std::collections::BTreeSet<GroupPoint> = s.iter().map(|g| seq.tiling.tile_of(g)).collect();
            set.len() as u128
        }
    }
}

/// Averages of the counterexample sequence over F_n = [n³, n³+2n].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkReport {
    pub n: i64,
    pub mean: f64,
    pub mean_square: f64,
    /// (h, (1/|F_n|) Σ u_{m+h} u_m) for h = 1..=h_max.
    pub correlations: Vec<(i64, f64)>,
    /// Σ u over F_n and |F_n|, exactly.
    pub sum: i128,
    pub sum_squares: i128,
    pub window_size: i128,
    /// Value used on the gap [n³+n+1, n³+2n−1].
    pub gap_value: i64,
}

/// u_m = 1 on [n³, n³+n] and at n³+2n, −n on [n³+2n+1, n³+3n], 0 elsewhere.
pub fn remark_value(n: i64, m: i64) -> i64 {
    let c = n * n * n;
    if (c..=c + n).contains(&m) || m == c + 2 * n {
        1
    } else if (c + 2 * n + 1..=c + 3 * n).contains(&m) {
        -n
    } else {
        0
    }
}

pub fn remark_counterexample(n: i64, h_max: i64) -> Result<RemarkReport> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n = {n} must be at least 2")));
    }
    if n > 2_000_000 {
        return Err(Error::TooLarge(format!("n = {n}")));
    }
    let c = n * n * n;
    let window = c..=c + 2 * n;
    let size = (2 * n + 1) as i128;
    let sum: i128 = window.clone().map(|m| remark_value(n, m) as i128).sum();
    let sum_squares: i128 = window.clone().map(|m| (remark_value(n, m) as i128).pow(2)).sum();
    let correlations = (1..=h_max)
        .map(|h| {
            let s: i128 = window
                .clone()
                .map(|m| remark_value(n, m + h) as i128 * remark_value(n, m) as i128)
                .sum();
            (h, s as f64 / size as f64)
        })
        .collect();
    Ok(RemarkReport {
        n,
        mean: sum as f64 / size as f64,
        mean_square: sum_squares as f64 / size as f64,
        correlations,
        sum,
        sum_squares,
        window_size: size,
        gap_value: 0,
    })
}

/// Observable on the orbit of a phase x ∈ 𝕋 under x ↦ x + g·θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
    /// f(x) = e(x).
    Mean,
    /// f(T_{g+h}x)·conj f(T_g x).
    Correlation { h: GroupPoint },
    /// Indicator of the arc [start, start + length).
    Arc { start: f64, length: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffReport {
    /// Fraction of sampled phases whose average misses the target by more than ε.
    pub fraction: f64,
    pub mean_deviation: f64,
    pub max_deviation: f64,
    /// Denominator L when every θ_i is rational with denominator dividing L.
    pub rational_period: Option<i64>,
    pub samples: usize,
}

fn arc_contains(start: f64, length: f64, x: f64) -> bool {
    length >= 1.0 || frac(x - start) < length
}

/// Monte-Carlo estimate of the fraction of phases x with
/// |∫ f(T_g x) dν(g) − ∫ f dμ_x| > ε, where μ_x is the ergodic measure on
/// the orbit closure of x.
pub fn birkhoff_deviation(
    theta: &[f64],
    observable: &Observable,
    nu: &ReiterMeasure,
    samples: usize,
    eps: f64,
    seed: u64,
) -> Result<BirkhoffReport> {
    check_dim(theta.len())?;
    if nu.dim() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: nu.dim(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be positive".into()));
    }
    let mut period: Option<i64> = Some(1);
    for &t in theta {
        period = match (period, rational_approx(t, 1 << 20, 1e-12)) {
            (Some(l), Some((_, q))) => Some(lcm(l, q)),
            _ => None,
        };
    }
    let atoms = nu.atoms()?;
    let shift = |g: &GroupPoint| -> f64 {
        let mut a = 0.0;
        for (i, &c) in g.coords().iter().enumerate() {
            a += frac(c as f64 * theta[i]);
        }
        frac(a)
    };
    let shifts: Vec<(f64, f64)> = atoms.iter().map(|(g, w)| (shift(g), *w)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..samples).map(|_| rng.gen::<f64>()).collect();
    let deviations: Vec<f64> = xs
        .par_iter()
        .map(|&x| match observable {
            Observable::Mean => {
                let avg: Complex64 = shifts.iter().map(|(s, w)| e_turns(x + s) * *w).sum();
                let target = match period {
                    Some(1) => e_turns(x),
                    _ => Complex64::default(),
                };
                (avg - target).norm()
            }
            Observable::Correlation { h } => {
                // f(T_{g+h}x)·conj f(T_g x) = e(h·θ) for every g and x.
                let value = e_turns(shift(h));
                let avg: Complex64 = shifts.iter().map(|(_, w)| value * *w).sum();
                (avg - value).norm()
            }
            Observable::Arc { start, length } => {
                let avg: f64 = shifts
                    .iter()
                    .filter(|(s, _)| arc_contains(*start, *length, x + s))
                    .map(|(_, w)| *w)
                    .sum();
                let target = match period {
                    Some(l) => (0..l).filter(|k| arc_contains(*start, *length, x + *k as f64 / l as f64)).count() as f64 / l as f64,
                    None => length.min(1.0),
                };
                (avg - target).abs()
            }
        })
        .collect();
    let over = deviations.iter().filter(|&&d| d > eps).count();
    Ok(BirkhoffReport {
        fraction: over as f64 / samples as f64,
        mean_deviation: deviations.iter().sum::<f64>() / samples as f64,
        max_deviation: deviations.iter().cloned().fold(0.0, f64::max),
        rational_period: period,
        samples,
    })
}

fn lcm(a: i64, b: i64) -> i64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        let r = x % y;
        x = y;
        y = r;
    }
    a / x * b
}
