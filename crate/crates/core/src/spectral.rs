//! Trigonometric polynomials P(x) = Σ a_v e(v·x), atomic spectral measures on
//! 𝕋^d and the bridge between them.
//!
//! Fourier convention: μ̂(h) = Σ_j w_j e(+h·θ_j), used uniformly by every module.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{check_dim, FolnerFamily, GroupPoint};
use crate::torus::{e_turns, TorusPoint, TorusPointRecord};

/// Tolerance for "positive" declarations.
pub const POSITIVE_TOL: f64 = 1e-9;

const TAU: f64 = std::f64::consts::TAU;

/// Hermitian, finitely supported coefficient vector with its verification
/// record.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolyCert {
    dim: usize,
    support: Vec<GroupPoint>,
    coeffs: Vec<Complex64>,
    /// Certified lower bound of P on the whole torus (−∞ until verified).
    pub verified_margin: f64,
    /// Per-axis size of the verification grid (0 until verified).
    pub grid_size: usize,
    /// Lipschitz bound 2πΣ|a_v|‖v‖₂ used by the verifier.
    pub deriv_bound: f64,
}

impl TrigPolyCert {
    /// Builds a polynomial from (frequency, coefficient) pairs, merging
    /// repeats and dropping exact zeros. Fails unless a(−v) = conj(a(v)) up to
    /// rounding; the stored coefficients are then made exactly hermitian.
    pub fn new(d: usize, terms: impl IntoIterator<Item = (GroupPoint, Complex64)>) -> Result<Self> {
        check_dim(d)?;
        let mut map: BTreeMap<GroupPoint, Complex64> = BTreeMap::new();
        for (v, a) in terms {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.dim(),
                });
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite coefficient at {v}")));
            }
            *map.entry(v).or_default() += a;
        }
        let scale = map.values().fold(0.0f64, |m, a| m.max(a.norm()));
        let tol = 1e-12 * scale.max(1e-300);
        for (v, a) in &map {
            let b = map.get(&-*v).copied().unwrap_or_default();
            if (a - b.conj()).norm() > tol {
                return Err(Error::NotRealPolynomial(v.to_string()));
            }
        }
        let mut support = Vec::with_capacity(map.len());
        let mut coeffs = Vec::with_capacity(map.len());
        for (v, a) in &map {
            let canonical = if v.is_origin() {
                Complex64::new(a.re, 0.0)
            } else if is_positive_half(v) {
                *a
            } else {
                map[&-*v].conj()
            };
            if canonical != Complex64::default() {
                support.push(*v);
                coeffs.push(canonical);
            }
        }
        Ok(Self {
            dim: d,
            support,
            coeffs,
            verified_margin: f64::NEG_INFINITY,
            grid_size: 0,
            deriv_bound: 0.0,
        })
    }

    /// Real cosine-form constructor: `a_0 + Σ c_v cos(2π v·x)` over
    /// half-representatives `v`, i.e. a_{±v} = c_v / 2.
    pub fn from_cosine(d: usize, a0: f64, cos_terms: &[(GroupPoint, f64)]) -> Result<Self> {
        let mut terms = vec![(GroupPoint::origin(d), Complex64::new(a0, 0.0))];
        for (v, c) in cos_terms {
            if v.is_origin() {
                return Err(Error::InvalidInput("cosine term at frequency 0".into()));
            }
            terms.push((*v, Complex64::new(c / 2.0, 0.0)));
            terms.push((-*v, Complex64::new(c / 2.0, 0.0)));
        }
        Self::new(d, terms)
    }

    /// Fejér kernel of order M in dimension 1: a_j = (1 − |j|/(M+1))/(M+1).
    pub fn fejer(m: i64) -> Self {
        let n = (m + 1) as f64;
        Self::new(
            1,
            (-m..=m).map(|j| (GroupPoint::d1(j), Complex64::new((1.0 - j.abs() as f64 / n) / n, 0.0))),
        )
        .expect("Fejér coefficients are real and symmetric")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[GroupPoint] {
        &self.support
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupPoint, &Complex64)> + '_ {
        self.support.iter().zip(&self.coeffs)
    }

    pub fn coeff(&self, v: &GroupPoint) -> Complex64 {
        match self.support.binary_search(v) {
            Ok(i) => self.coeffs[i],
            Err(_) => Complex64::default(),
        }
    }

    pub fn a0(&self) -> f64 {
        self.coeff(&GroupPoint::origin(self.dim)).re
    }

    /// deg(P) = max ‖v‖∞ over the support.
    pub fn degree(&self) -> i64 {
        self.support.iter().map(|v| v.linf_norm()).max().unwrap_or(0)
    }

    /// P(0) = Σ a_v.
    pub fn coeff_sum(&self) -> f64 {
        self.coeffs.iter().map(|a| a.re).sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).sum()
    }

    /// 2πΣ|a_v|‖v‖₂.
    pub fn lipschitz_bound(&self) -> f64 {
        TAU * self.terms().map(|(v, a)| a.norm() * v.l2_norm()).sum::<f64>()
    }

    /// 4π²Σ|a_v|‖v‖₂², a bound on the operator norm of the Hessian.
    pub fn hessian_bound(&self) -> f64 {
        TAU * TAU
            * self
                .terms()
                .map(|(v, a)| a.norm() * v.l2_norm() * v.l2_norm())
                .sum::<f64>()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms()
            .map(|(v, a)| (a * e_turns(v.dot_f64(x))).re)
            .sum()
    }

    /// ∇P(x).
    pub fn gradient(&self, x: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (v, a) in self.terms() {
            let w = (a * e_turns(v.dot_f64(x)) * Complex64::new(0.0, TAU)).re;
            for (i, &c) in v.coords().iter().enumerate() {
                g[i] += w * c as f64;
            }
        }
        g
    }

    /// P(x), ∇P(x) and the Hessian in one pass.
    pub fn jet(&self, x: &[f64]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let mut p = 0.0;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for (v, a) in self.terms() {
            let z = a * e_turns(v.dot_f64(x));
            p += z.re;
            let c = v.coords();
            for i in 0..c.len() {
                g[i] -= TAU * z.im * c[i] as f64;
                for j in 0..c.len() {
                    h[i][j] -= TAU * TAU * z.re * (c[i] * c[j]) as f64;
                }
            }
        }
        (p, g, h)
    }

    /// 8π³Σ|a_v|‖v‖₂³, a bound on third directional derivatives.
    pub fn third_derivative_bound(&self) -> f64 {
        TAU.powi(3) * self.terms().map(|(v, a)| a.norm() * v.l2_norm().powi(3)).sum::<f64>()
    }

    /// P(kx): every frequency v replaced by kv.
    pub fn dilate(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::DegenerateHomomorphism);
        }
        Self::new(
            self.dim,
            self.terms().map(|(v, a)| (v.scale(k), *a)),
        )
    }

    /// Default per-axis verification grid, 64·deg + 1024.
    pub fn default_grid(&self) -> usize {
        64 * self.degree() as usize + 1024
    }

    /// Verifies at `grid` points per axis and records the outcome.
    pub fn verified(mut self, grid: usize) -> Result<Self> {
        let rep = posdef_verify_at(&self, grid)?;
        self.verified_margin = rep.certified_lb;
        self.grid_size = rep.grid_size;
        self.deriv_bound = rep.deriv_bound;
        Ok(self)
    }
}

/// v lies in the half-space used to pick hermitian representatives.
pub(crate) fn is_positive_half(v: &GroupPoint) -> bool {
    match v.coords() {
        [a] => *a > 0,
        [a, b] => *a > 0 || (*a == 0 && *b > 0),
        _ => false,
    }
}

/// Outcome of grid verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosdefReport {
    pub grid_min: f64,
    pub certified_lb: f64,
    pub grid_size: usize,
    pub deriv_bound: f64,
}

impl PosdefReport {
    pub fn is_positive(&self, tol: f64) -> bool {
        self.certified_lb >= -tol
    }
}

/// Values of a trigonometric polynomial on the uniform grid (ℤ/N)^d, row-major
/// with the first coordinate slowest. Frequencies are folded mod N, which is
/// exact at grid points.
pub(crate) fn eval_on_grid(d: usize, n: usize, terms: impl Iterator<Item = (GroupPoint, Complex64)>) -> Vec<Complex64> {
    let len = n.pow(d as u32);
    let mut buf = vec![Complex64::default(); len];
    let ni = n as i64;
    for (v, a) in terms {
        let idx = match v.coords() {
            [x] => x.rem_euclid(ni) as usize,
            [x, y] => x.rem_euclid(ni) as usize * n + y.rem_euclid(ni) as usize,
            _ => unreachable!(),
        };
        buf[idx] += a;
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    if d == 1 {
        fft.process(&mut buf);
        return buf;
    }
    buf.par_chunks_mut(n).for_each(|row| fft.process(row));
    transpose(&mut buf, n);
    buf.par_chunks_mut(n).for_each(|row| fft.process(row));
    transpose(&mut buf, n);
    buf
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Verification at the certificate's recorded grid (default grid if unset).
pub fn posdef_verify(cert: &TrigPolyCert) -> Result<PosdefReport> {
    let grid = if cert.grid_size == 0 {
        cert.default_grid()
    } else {
        cert.grid_size
    };
    posdef_verify_at(cert, grid)
}

/// Rigorous lower bound for min P over 𝕋^d from `grid`^d samples.
///
/// Each point of the torus lies within r = √d/(2N) of a grid point x_m, and by
/// Taylor's theorem P ≥ P(x_m) − min(L·r, |∇P(x_m)|·r + B·r²/2) on that cell,
/// with L = 2πΣ|a_v|‖v‖ and B = 4π²Σ|a_v|‖v‖². Cells where this is too weak
/// are bisected, using in addition the exact local quadratic model minimized
/// over the cell with a third-order remainder.
pub fn posdef_verify_at(cert: &TrigPolyCert, grid: usize) -> Result<PosdefReport> {
    posdef_verify_floor(cert, grid, 0.0)
}

/// As [`posdef_verify_at`], refining only the cells whose bound falls below
/// `floor` (the level the caller needs to certify, 0 or −ε).
pub fn posdef_verify_floor(cert: &TrigPolyCert, grid: usize, floor: f64) -> Result<PosdefReport> {
    let d = cert.dim;
    if grid == 0 {
        return Err(Error::InvalidInput("grid_size must be positive".into()));
    }
    if d == 2 && grid > 8192 || d == 1 && grid > 1 << 26 {
        return Err(Error::TooLarge(format!("grid_size {grid} in d={d}")));
    }
    let values = eval_on_grid(d, grid, cert.terms().map(|(v, a)| (*v, *a)));
    let mut grad_sq = vec![0.0f64; values.len()];
    for axis in 0..d {
        let g = eval_on_grid(
            d,
            grid,
            cert.terms()
                .map(|(v, a)| (*v, a * Complex64::new(0.0, TAU * v.coord(axis) as f64))),
        );
        grad_sq.par_iter_mut().zip(g.par_iter()).for_each(|(s, g)| *s += g.re * g.re);
    }
    let lip = cert.lipschitz_bound();
    let hess = cert.hessian_bound();
    let bounds = [lip, hess, cert.third_derivative_bound()];
    let r = (d as f64).sqrt() / (2.0 * grid as f64);
    let per_point: Vec<(f64, f64)> = values
        .par_iter()
        .zip(grad_sq.par_iter())
        .map(|(p, g2)| {
            let drop = (lip * r).min(g2.sqrt() * r + 0.5 * hess * r * r);
            (p.re, p.re - drop)
        })
        .collect();
    let mut grid_min = f64::INFINITY;
    for (p, _) in &per_point {
        grid_min = grid_min.min(*p);
    }
    // Rounding in the FFT: a generous multiple of ε·Σ|a|·log N.
    let rounding = 64.0 * f64::EPSILON * cert.abs_sum() * (grid as f64).log2().max(1.0) * d as f64;
    let mut cells: Vec<(f64, usize)> = per_point
        .iter()
        .enumerate()
        .filter(|(_, (_, l))| *l < floor - REFINE_GOAL)
        .map(|(i, (_, l))| (*l, i))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let refined: Vec<(usize, f64)> = cells
        .par_iter()
        .take(REFINE_CELLS)
        .map(|&(_, i)| {
            let center = grid_point(d, grid, i);
            (i, refine_cell(cert, center, 0.5 / grid as f64, bounds, floor, 0, &mut REFINE_BUDGET.clone()))
        })
        .collect();
    let mut lbs: Vec<f64> = per_point.iter().map(|(_, l)| l - rounding).collect();
    if !refined.is_empty() {
        let direct = 64.0 * f64::EPSILON * (cert.abs_sum() * (cert.support.len() as f64 + 1.0) + lip);
        for (i, l) in refined {
            lbs[i] = lbs[i].max(l - direct);
        }
    }
    let certified_lb = lbs.into_iter().fold(f64::INFINITY, f64::min);
    Ok(PosdefReport {
        grid_min,
        certified_lb,
        grid_size: grid,
        deriv_bound: lip,
    })
}

/// Cells whose grid bound falls below this are subdivided.
const REFINE_GOAL: f64 = 1e-12;
const REFINE_CELLS: usize = 1 << 20;
const REFINE_DEPTH: u32 = 40;
/// Evaluations allowed per refined grid cell.
const REFINE_BUDGET: usize = 1 << 14;

fn grid_point(d: usize, n: usize, idx: usize) -> [f64; 2] {
    if d == 1 {
        [idx as f64 / n as f64, 0.0]
    } else {
        [(idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64]
    }
}

/// min of p + g·δ + ½δᵀHδ over |δ| ≤ r, bounded below by Lagrangian duality:
/// for every μ > max(0, −λ_min(H)) the minimum is at least
/// p − ½gᵀ(H + μI)⁻¹g − ½μr². The best μ is located by bisection.
fn quadratic_ball_lb(d: usize, p: f64, g: [f64; 2], h: [[f64; 2]; 2], r: f64) -> f64 {
    // Eigen-decomposition of the symmetric 2×2 (or 1×1) Hessian.
    let (lams, gs) = if d == 1 {
        ([h[0][0], h[0][0]], [g[0], 0.0])
    } else {
        let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let (l1, l2) = (mid - rad, mid + rad);
        // Unit eigenvector for l1.
        let (ex, ey) = if b.abs() > 1e-300 {
            let (x, y) = (b, l1 - a);
            let n = (x * x + y * y).sqrt();
            (x / n, y / n)
        } else if a <= c {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        ([l1, l2], [g[0] * ex + g[1] * ey, -g[0] * ey + g[1] * ex])
    };
    let dual = |mu: f64| p - 0.5 * (gs[0] * gs[0] / (lams[0] + mu) + gs[1] * gs[1] / (lams[1] + mu)) - 0.5 * mu * r * r;
    let slope = |mu: f64| {
        0.5 * (gs[0] * gs[0] / (lams[0] + mu).powi(2) + gs[1] * gs[1] / (lams[1] + mu).powi(2)) - 0.5 * r * r
    };
    let lo0 = 0f64.max(-lams[0]);
    let gnorm = (gs[0] * gs[0] + gs[1] * gs[1]).sqrt();
    let (mut lo, mut hi) = (lo0, lo0 + gnorm / r + 1e-300);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo0 {
            break;
        }
        let v = dual(mid);
        if v.is_finite() {
            best = best.max(v);
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = dual(hi);
    if hi > lo0 && v.is_finite() {
        best = best.max(v);
    }
    best
}

/// Lower bound of P on the cube of half-side `h` about `center`: the better
/// of the first/second-order Taylor estimate and the local quadratic model
/// with a third-order remainder, bisecting where both are too weak.
#[allow(clippy::too_many_arguments)]
fn refine_cell(
    cert: &TrigPolyCert,
    center: [f64; 2],
    h: f64,
    bounds: [f64; 3],
    floor: f64,
    depth: u32,
    budget: &mut usize,
) -> f64 {
    *budget = budget.saturating_sub(1);
    let d = cert.dim;
    let [lip, hess, third] = bounds;
    let (p, g, hm) = cert.jet(&center[..d]);
    let gnorm = (g[0] * g[0] + g[1] * g[1]).sqrt();
    let r = h * (d as f64).sqrt();
    let taylor = p - (lip * r).min(gnorm * r + 0.5 * hess * r * r);
    let local = quadratic_ball_lb(d, p, g, hm, r) - third * r * r * r / 6.0;
    let lb = taylor.max(local);
    // Below the floor at the center no subdivision can reach the floor; settle
    // for a bound within 1% of the observed value.
    let target = if p < floor {
        p - REFINE_GOAL - 0.01 * (floor - p)
    } else {
        floor - REFINE_GOAL
    };
    if lb >= target || depth >= REFINE_DEPTH || *budget < (1 << d) {
        return lb;
    }
    let q = h / 2.0;
    let mut best = f64::INFINITY;
    for corner in 0..(1usize << d) {
        let mut c = center;
        for (axis, slot) in c.iter_mut().enumerate().take(d) {
            *slot += if corner >> axis & 1 == 1 { q } else { -q };
        }
        best = best.min(refine_cell(cert, c, q, bounds, floor, depth + 1, budget));
    }
    best
}

/// Atomic probability measure on 𝕋^d.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    dim: usize,
    atoms: Vec<(TorusPoint, f64)>,
}

impl SpectralMeasure {
    /// Atoms with nonnegative weights summing to 1 within 1e-12. Points equal
    /// modulo 1 are merged.
    pub fn new(d: usize, atoms: impl IntoIterator<Item = (TorusPoint, f64)>) -> Result<Self> {
        check_dim(d)?;
        let mut merged: BTreeMap<[u64; 2], (TorusPoint, f64)> = BTreeMap::new();
        for (p, w) in atoms {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidMeasure(format!("weight {w} is not a nonnegative number")));
            }
            merged
                .entry(p.key())
                .and_modify(|e| e.1 += w)
                .or_insert((p, w));
        }
        let atoms: Vec<(TorusPoint, f64)> = merged.into_values().filter(|a| a.1 > 0.0).collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() {
            return Err(Error::ZeroMass);
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { dim: d, atoms })
    }

    /// Normalizes nonnegative weights to total mass 1.
    pub fn normalized(d: usize, atoms: impl IntoIterator<Item = (TorusPoint, f64)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().collect();
        let total: f64 = atoms.iter().map(|a| a.1.max(0.0)).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass);
        }
        Self::new(d, atoms.into_iter().map(|(p, w)| (p, w.max(0.0) / total)))
    }

    pub fn dirac(p: TorusPoint) -> Self {
        Self {
            dim: p.dim(),
            atoms: vec![(p, 1.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[(TorusPoint, f64)] {
        &self.atoms
    }

    /// μ({0}).
    pub fn mass_at_zero(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|(p, _)| p.is_zero())
            .map(|a| a.1)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// μ̂(h) = Σ_j w_j e(h·θ_j). Computed for one half of ℤ^d and conjugated for
/// the other, so μ̂(−h) = conj μ̂(h) holds bit for bit.
pub fn fourier_coefficient(mu: &SpectralMeasure, h: &GroupPoint) -> Complex64 {
    if is_positive_half(&-*h) {
        return fourier_coefficient(mu, &-*h).conj();
    }
    mu.atoms
        .iter()
        .map(|(p, w)| e_turns(p.phase(h)) * *w)
        .sum()
}

/// Discretized spectral measure of a nonnegative polynomial: atoms at the
/// grid points with weights ∝ max(P, 0). On a grid of N points per axis with
/// N > 2·deg this reproduces μ̂(h) = a_{−h}/a_0 up to rounding.
pub fn herglotz_density(cert: &TrigPolyCert, grid: usize) -> Result<SpectralMeasure> {
    let d = cert.dim;
    let values = eval_on_grid(d, grid, cert.terms().map(|(v, a)| (*v, *a)));
    let total: f64 = values.iter().map(|p| p.re.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let mut atoms = Vec::with_capacity(values.len());
    for (idx, p) in values.iter().enumerate() {
        let w = p.re.max(0.0) / total;
        if w <= 0.0 {
            continue;
        }
        let nums: Vec<i64> = if d == 1 {
            vec![idx as i64]
        } else {
            vec![(idx / grid) as i64, (idx % grid) as i64]
        };
        let point = TorusPoint::rational(crate::torus::RationalPoint::new(&nums, grid as i64)?);
        atoms.push((point, w));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    // Renormalize the already normalized weights to absorb summation order.
    SpectralMeasure::new(d, atoms.into_iter().map(|(p, w)| (p, w / total)))
}

/// Wiener-type average (1/|F_n|)Σ_{h∈F_n} μ̂(h) along a Følner family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomEstimate {
    /// Real part at the largest index.
    pub estimate: f64,
    /// Imaginary part at the largest index (vanishes for genuine μ̂).
    pub imag_residue: f64,
    /// (n, average) for every index evaluated.
    pub trace: Vec<(usize, Complex64)>,
}

pub fn atom_at_zero(
    mu_hat: impl Fn(&GroupPoint) -> Complex64 + Sync,
    family: &FolnerFamily,
    indices: &[usize],
) -> Result<AtomEstimate> {
    if indices.is_empty() {
        return Err(Error::InvalidInput("no Følner indices given".into()));
    }
    let mut trace = Vec::with_capacity(indices.len());
    for &n in indices {
        let f = family.member(n)?;
        let sum: Complex64 = f
            .points()
            .par_chunks(4096)
            .map(|c| c.iter().map(&mu_hat).sum::<Complex64>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        trace.push((n, sum / f.len() as f64));
    }
    let last = trace[trace.len() - 1].1;
    Ok(AtomEstimate {
        estimate: last.re,
        imag_residue: last.im,
        trace,
    })
}

/// Smallest eigenvalue of the Gram matrix [μ̂(v − w)]_{v,w∈W}.
pub fn gram_min_eigenvalue(mu: &SpectralMeasure, w: &[GroupPoint]) -> f64 {
    let n = w.len();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| fourier_coefficient(mu, &(w[i] - w[j])));
    m.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPolyCertRecord {
    pub d: usize,
    pub support: Vec<GroupPoint>,
    /// (re, im) per support element.
    pub coeffs: Vec<[f64; 2]>,
    pub verified_margin: f64,
    pub grid_size: usize,
    pub deriv_bound: f64,
}

impl From<&TrigPolyCert> for TrigPolyCertRecord {
    fn from(c: &TrigPolyCert) -> Self {
        Self {
            d: c.dim,
            support: c.support.clone(),
            coeffs: c.coeffs.iter().map(|a| [a.re, a.im]).collect(),
            verified_margin: c.verified_margin,
            grid_size: c.grid_size,
            deriv_bound: c.deriv_bound,
        }
    }
}

impl TryFrom<&TrigPolyCertRecord> for TrigPolyCert {
    type Error = Error;

    fn try_from(r: &TrigPolyCertRecord) -> Result<Self> {
        if r.support.len() != r.coeffs.len() {
            return Err(Error::Parse("support and coeffs differ in length".into()));
        }
        let mut c = TrigPolyCert::new(
            r.d,
            r.support
                .iter()
                .zip(&r.coeffs)
                .map(|(v, a)| (*v, Complex64::new(a[0], a[1]))),
        )?;
        c.verified_margin = r.verified_margin;
        c.grid_size = r.grid_size;
        c.deriv_bound = r.deriv_bound;
        Ok(c)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRecord {
    #[serde(flatten)]
    pub point: TorusPointRecord,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralMeasureRecord {
    pub d: usize,
    pub atoms: Vec<AtomRecord>,
}

impl From<&SpectralMeasure> for SpectralMeasureRecord {
    fn from(m: &SpectralMeasure) -> Self {
        Self {
            d: m.dim,
            atoms: m
                .atoms
                .iter()
                .map(|(p, w)| AtomRecord {
                    point: p.into(),
                    weight: *w,
                })
                .collect(),
        }
    }
}

impl TryFrom<&SpectralMeasureRecord> for SpectralMeasure {
    type Error = Error;

    fn try_from(r: &SpectralMeasureRecord) -> Result<Self> {
        let atoms = r
            .atoms
            .iter()
            .map(|a| Ok((TorusPoint::try_from(&a.point)?, a.weight)))
            .collect::<Result<Vec<_>>>()?;
        SpectralMeasure::new(r.d, atoms)
    }
}
