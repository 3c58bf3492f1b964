//! Positive-definite certificates and witness measures for finite frequency
//! sets.
//!
//! A certificate for V is a real trigonometric polynomial
//! P(x) = a_0 + Σ_{v ∈ V∪−V} a_v e(v·x) with P(0) = 1 and P ≥ 0 (or P ≥ −ε)
//! whose constant term a_0 is small. A witness is a probability measure μ
//! with μ̂(v) = 0 on V and μ({0}) > 0. Weak duality gives μ({0}) ≤ a_0 for
//! every such pair. Both searches run on finite grids: an infeasible or large
//! answer is a statement about that grid only, and no finite set is ever a
//! van der Corput set.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupPoint};
use crate::lp::{LpFailure, SimplexOptions, StandardLp};
use crate::spectral::{
    eval_on_grid, fourier_coefficient, is_positive_half, posdef_verify_floor, PosdefReport, SpectralMeasure, TrigPolyCert,
    POSITIVE_TOL,
};
use crate::torus::{e_turns, RationalPoint, TorusPoint};

const TAU: f64 = std::f64::consts::TAU;

/// Cap on the number of two-dimensional rational grid points.
const RATIONAL_CAP_2D: usize = 20_000;

/// Violations smaller than this end the exchange loop; the final shift absorbs them.
const EXCHANGE_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// P ≥ 0 everywhere.
    StrictNonneg,
    /// P ≥ −ε everywhere.
    EpsRelaxed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertProblem {
    pub v: FiniteSet,
    pub epsilon: f64,
    pub grid_size: usize,
    pub variant: Variant,
}

impl CertProblem {
    pub fn new(v: FiniteSet, epsilon: f64, grid_size: usize, variant: Variant) -> Result<Self> {
        validate_frequencies(&v)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if grid_size < 2 {
            return Err(Error::InvalidInput(format!("grid_size {grid_size} too small")));
        }
        Ok(Self {
            v,
            epsilon,
            grid_size,
            variant,
        })
    }

    /// The lower bound the certificate may dip to: 0 or −ε.
    pub fn allowance(&self) -> f64 {
        match self.variant {
            Variant::StrictNonneg => 0.0,
            Variant::EpsRelaxed => self.epsilon,
        }
    }
}

fn validate_frequencies(v: &FiniteSet) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptySet);
    }
    if v.iter().any(|g| g.is_origin()) {
        return Err(Error::InvalidInput("0 is not allowed in the frequency set".into()));
    }
    Ok(())
}

/// A default LP grid for V: 16·deg + 64 points in d=1, 8·deg + 32 per axis in d=2.
pub fn default_lp_grid(v: &FiniteSet) -> usize {
    let deg = max_norm(v) as usize;
    if v.dim() == 1 {
        16 * deg + 64
    } else {
        8 * deg + 32
    }
}

fn max_norm(v: &FiniteSet) -> i64 {
    v.iter().map(|g| g.linf_norm()).max().unwrap_or(0)
}

/// Half-plane representatives of V ∪ (−V).
fn half_reps(v: &FiniteSet) -> Vec<GroupPoint> {
    let set: BTreeSet<GroupPoint> = v
        .iter()
        .map(|g| if is_positive_half(g) { *g } else { -*g })
        .collect();
    set.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct CertOptions {
    /// Per-axis grid for the final verification; chosen from the degree when `None`.
    pub verify_grid: Option<usize>,
    pub max_rounds: usize,
    pub simplex: SimplexOptions,
}

impl Default for CertOptions {
    fn default() -> Self {
        Self {
            verify_grid: None,
            max_rounds: 40,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Verification grid used for certificates: at least 2^20 points in d=1,
/// at most 2048 per axis in d=2.
pub fn fine_verify_grid(d: usize, deg: i64) -> usize {
    let base = (64 * deg as usize + 1024).next_power_of_two();
    if d == 1 {
        base.max(1 << 20)
    } else {
        base.min(2048)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertStatus {
    Success,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct CertReport {
    pub status: CertStatus,
    /// The verified polynomial (also returned on infeasibility, for inspection).
    pub certificate: TrigPolyCert,
    pub posdef: PosdefReport,
    /// LP optimum over the final point set: a lower bound for a_0 among
    /// polynomials satisfying the constraints at those points.
    pub lp_value: f64,
    /// Shift applied after verification to absorb sub-grid negativity.
    pub shift: f64,
    pub lp_points: usize,
    pub exchange_rounds: usize,
    pub lp_iterations: usize,
}

impl CertReport {
    pub fn a0(&self) -> f64 {
        self.certificate.a0()
    }
}

/// Real cosine polynomial a_0 + Σ c_v cos(2π v·x) over half representatives.
#[derive(Clone, Debug)]
struct CosPoly {
    d: usize,
    a0: f64,
    terms: Vec<(GroupPoint, f64)>,
}

impl CosPoly {
    fn eval(&self, x: &[f64]) -> f64 {
        self.a0 + self.terms.iter().map(|(v, c)| c * e_turns(v.dot_f64(x)).re).sum::<f64>()
    }

    /// Gradient and Hessian.
    fn derivatives(&self, x: &[f64]) -> ([f64; 2], [[f64; 2]; 2]) {
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for (v, c) in &self.terms {
            let z = e_turns(v.dot_f64(x));
            for i in 0..self.d {
                let vi = TAU * v.coord(i) as f64;
                g[i] -= c * vi * z.im;
                for j in 0..self.d {
                    h[i][j] -= c * vi * TAU * v.coord(j) as f64 * z.re;
                }
            }
        }
        (g, h)
    }

    fn to_cert(&self) -> Result<TrigPolyCert> {
        TrigPolyCert::from_cosine(self.d, self.a0, &self.terms)
    }

    fn scaled(&self, shift: f64, scale: f64) -> Self {
        Self {
            d: self.d,
            a0: (self.a0 + shift) / scale,
            terms: self.terms.iter().map(|(v, c)| (*v, c / scale)).collect(),
        }
    }
}

fn cos_at(p: &TorusPoint, v: &GroupPoint) -> f64 {
    e_turns(p.phase(v)).re
}

/// All reduced p/q with q ≤ qmax in [0,1)^d (capped in d=2).
fn rational_points(d: usize, qmax: i64) -> Vec<RationalPoint> {
    let mut out = BTreeSet::new();
    let mut q = 1;
    while q <= qmax {
        if d == 1 {
            for p in 0..q {
                out.insert(RationalPoint::new(&[p], q).expect("positive denominator"));
            }
        } else {
            if out.len() + (q * q) as usize > RATIONAL_CAP_2D {
                break;
            }
            for p1 in 0..q {
                for p2 in 0..q {
                    out.insert(RationalPoint::new(&[p1, p2], q).expect("positive denominator"));
                }
            }
        }
        q += 1;
    }
    out.into_iter().collect()
}

fn uniform_points(d: usize, n: usize) -> Vec<RationalPoint> {
    let n = n as i64;
    if d == 1 {
        (0..n).map(|m| RationalPoint::new(&[m], n).expect("positive")).collect()
    } else {
        (0..n)
            .flat_map(|a| (0..n).map(move |b| RationalPoint::new(&[a, b], n).expect("positive")))
            .collect()
    }
}

/// Grid for the certificate LP, folded under x ↦ −x.
fn certificate_grid(v: &FiniteSet, n: usize) -> Vec<TorusPoint> {
    let d = v.dim();
    let qmax = 2 * max_norm(v) + 1;
    let mut set = BTreeSet::new();
    for r in uniform_points(d, n).into_iter().chain(rational_points(d, qmax)) {
        let neg = r.neg();
        set.insert(if neg.to_f64() < r.to_f64() { neg } else { r });
    }
    set.into_iter().map(TorusPoint::rational).collect()
}

/// Grid for the witness LP on [0,1)^d, including 0.
fn witness_grid(v: &FiniteSet, n: usize) -> Vec<TorusPoint> {
    let d = v.dim();
    let qmax = 2 * max_norm(v) + 1;
    let set: BTreeSet<RationalPoint> = uniform_points(d, n)
        .into_iter()
        .chain(rational_points(d, qmax))
        .collect();
    set.into_iter().map(TorusPoint::rational).collect()
}

fn lp_error(e: LpFailure, grid: usize) -> Error {
    match e {
        LpFailure::Infeasible { .. } => Error::GridTooCoarse {
            certified_lb: f64::NEG_INFINITY,
            suggested: 2 * grid,
        },
        LpFailure::Unbounded => Error::LpUnbounded,
        LpFailure::Singular { condition } => Error::LpDegenerate(format!("basis condition estimate {condition:e}")),
        LpFailure::IterationLimit { iterations } => {
            Error::LpDegenerate(format!("no convergence after {iterations} pivots"))
        }
    }
}

struct LpRun {
    poly: CosPoly,
    value: f64,
    iterations: usize,
}

/// Solves the certificate LP through its dual: over w ≥ 0 on the points and a
/// free y (split into λ⁺ − λ⁻), minimize −y + τΣw subject to Σw + y = 1 and
/// Σ_m w_m cos(2π v·x_m) + y = 0 for each v. The certificate is read off the
/// simplex multipliers.
fn solve_certificate_lp(
    d: usize,
    reps: &[GroupPoint],
    points: &[TorusPoint],
    tau: f64,
    opts: &SimplexOptions,
    grid: usize,
) -> Result<LpRun> {
    let rows = 1 + reps.len();
    let mut b = vec![0.0; rows];
    b[0] = 1.0;
    let mut lp = StandardLp::new(b);
    let columns: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            let mut col = Vec::with_capacity(rows);
            col.push(1.0);
            col.extend(reps.iter().map(|v| cos_at(p, v)));
            col
        })
        .collect();
    for col in &columns {
        lp.push_column(tau, col);
    }
    let ones = vec![1.0; rows];
    let minus: Vec<f64> = ones.iter().map(|v| -v).collect();
    lp.push_column(-1.0, &ones);
    lp.push_column(1.0, &minus);
    let sol = lp.solve(opts).map_err(|e| lp_error(e, grid))?;
    let poly = CosPoly {
        d,
        a0: -sol.duals[0],
        terms: reps.iter().zip(&sol.duals[1..]).map(|(v, pi)| (*v, -pi)).collect(),
    };
    Ok(LpRun {
        poly,
        value: -sol.objective,
        iterations: sol.iterations,
    })
}

/// Local minima of P below `level`, refined by Newton's method.
fn find_violations(poly: &CosPoly, level: f64) -> Vec<TorusPoint> {
    let d = poly.d;
    let deg = poly.terms.iter().map(|(v, _)| v.linf_norm()).max().unwrap_or(0) as usize;
    let n = if d == 1 {
        (32 * deg).next_power_of_two().max(4096)
    } else {
        (8 * deg).next_power_of_two().max(256)
    };
    let terms = std::iter::once((GroupPoint::origin(d), num_complex::Complex64::new(poly.a0, 0.0))).chain(
        poly.terms.iter().flat_map(|(v, c)| {
            let half = num_complex::Complex64::new(c / 2.0, 0.0);
            [(*v, half), (-*v, half)]
        }),
    );
    let vals: Vec<f64> = eval_on_grid(d, n, terms).into_iter().map(|z| z.re).collect();
    let h = 1.0 / n as f64;
    let curvature: f64 = TAU * TAU * poly.terms.iter().map(|(v, c)| c.abs() * v.l2_norm().powi(2)).sum::<f64>();
    let slack = curvature * h * h;
    let ni = n as i64;
    let at = |i: i64, j: i64| -> f64 {
        if d == 1 {
            vals[i.rem_euclid(ni) as usize]
        } else {
            vals[(i.rem_euclid(ni) * ni + j.rem_euclid(ni)) as usize]
        }
    };
    let mut candidates = Vec::new();
    for idx in 0..vals.len() {
        let (i, j) = if d == 1 {
            (idx as i64, 0)
        } else {
            ((idx / n) as i64, (idx % n) as i64)
        };
        let p = vals[idx];
        if p - slack >= level {
            continue;
        }
        let is_min = if d == 1 {
            p <= at(i - 1, 0) && p <= at(i + 1, 0)
        } else {
            (-1..=1).all(|di| (-1..=1).all(|dj| p <= at(i + di, j + dj)))
        };
        if is_min {
            candidates.push([i as f64 * h, j as f64 * h]);
        }
    }
    candidates
        .into_par_iter()
        .filter_map(|x0| {
            let x = newton_minimize(poly, x0, h);
            let px = poly.eval(&x[..d]);
            let best = if px <= poly.eval(&x0[..d]) { x } else { x0 };
            (poly.eval(&best[..d]) < level).then(|| TorusPoint::new(&best[..d]).expect("finite point"))
        })
        .collect()
}

fn newton_minimize(poly: &CosPoly, x0: [f64; 2], h: f64) -> [f64; 2] {
    let d = poly.d;
    let mut x = x0;
    for _ in 0..30 {
        let (g, hs) = poly.derivatives(&x[..d]);
        let step = if d == 1 {
            if hs[0][0] <= 0.0 {
                break;
            }
            [g[0] / hs[0][0], 0.0]
        } else {
            let det = hs[0][0] * hs[1][1] - hs[0][1] * hs[1][0];
            if hs[0][0] <= 0.0 || det <= 0.0 {
                break;
            }
            [
                (hs[1][1] * g[0] - hs[0][1] * g[1]) / det,
                (hs[0][0] * g[1] - hs[1][0] * g[0]) / det,
            ]
        };
        let len = (step[0] * step[0] + step[1] * step[1]).sqrt();
        if !(len < 2.0 * h) {
            break;
        }
        x[0] -= step[0];
        x[1] -= step[1];
        if len < 1e-16 {
            break;
        }
    }
    x
}

/// Searches for a certificate with small a_0.
pub fn find_certificate(p: &CertProblem) -> Result<CertReport> {
    find_certificate_with(p, &CertOptions::default())
}

pub fn find_certificate_with(p: &CertProblem, opts: &CertOptions) -> Result<CertReport> {
    let d = p.v.dim();
    let reps = half_reps(&p.v);
    let tau = p.allowance();
    let mut points = certificate_grid(&p.v, p.grid_size);
    let mut seen: HashSet<[u64; 2]> = points.iter().map(|x| x.key()).collect();
    let mut iterations = 0;
    let mut rounds = 0;
    let run = loop {
        let run = solve_certificate_lp(d, &reps, &points, tau, &opts.simplex, p.grid_size)?;
        iterations += run.iterations;
        rounds += 1;
        if rounds > opts.max_rounds {
            break run;
        }
        let fresh: Vec<TorusPoint> = find_violations(&run.poly, -tau - EXCHANGE_TOL)
            .into_iter()
            .filter(|x| seen.insert(x.key()))
            .collect();
        if fresh.is_empty() {
            break run;
        }
        points.extend(fresh);
    };

    let total = run.poly.a0 + run.poly.terms.iter().map(|t| t.1).sum::<f64>();
    let mut poly = run.poly.scaled(0.0, total);
    let deg = max_norm(&p.v);
    let grid = opts.verify_grid.unwrap_or_else(|| fine_verify_grid(d, deg));
    let mut cert = poly.to_cert()?;
    let mut rep = posdef_verify_floor(&cert, grid, -tau)?;
    let mut shift = 0.0;
    if rep.certified_lb < -(tau + 1e-6) {
        return Err(Error::GridTooCoarse {
            certified_lb: rep.certified_lb,
            suggested: 2 * p.grid_size,
        });
    }
    if rep.certified_lb < -tau {
        // (P + s)/(1 + s) keeps P(0) = 1 and lifts the bound to −τ.
        shift = (-tau - rep.certified_lb) * (1.0 + 1e-6) + 1e-15;
        poly = poly.scaled(shift, 1.0 + shift);
        cert = poly.to_cert()?;
        rep = posdef_verify_floor(&cert, grid, -tau)?;
    }
    cert.verified_margin = rep.certified_lb;
    cert.grid_size = rep.grid_size;
    cert.deriv_bound = rep.deriv_bound;
    let ok = cert.a0() < p.epsilon && rep.certified_lb >= -(tau + POSITIVE_TOL);
    Ok(CertReport {
        status: if ok { CertStatus::Success } else { CertStatus::Infeasible },
        certificate: cert,
        posdef: rep,
        lp_value: run.value,
        shift,
        lp_points: points.len(),
        exchange_rounds: rounds,
        lp_iterations: iterations,
    })
}

/// A probability measure with μ̂ = 0 on V, scored by its mass at 0.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub measure: SpectralMeasure,
    /// μ({0}).
    pub value: f64,
    /// max_{v ∈ V} |μ̂(v)|, recomputed from the stored atoms.
    pub residual: f64,
    /// `Some("no-witness-on-grid")` when the grid admits no witness.
    pub flag: Option<String>,
    pub grid_size: usize,
    pub lp_points: usize,
    pub lp_iterations: usize,
}

pub const NO_WITNESS_FLAG: &str = "no-witness-on-grid";

/// Maximizes w_0 over atoms on the witness grid subject to Σw = 1 and
/// Re μ̂(v) = Im μ̂(v) = 0 for v ∈ V.
pub fn find_witness(v: &FiniteSet, grid_size: usize) -> Result<WitnessReport> {
    find_witness_with(v, grid_size, &SimplexOptions::default())
}

pub fn find_witness_with(v: &FiniteSet, grid_size: usize, opts: &SimplexOptions) -> Result<WitnessReport> {
    validate_frequencies(v)?;
    let d = v.dim();
    let reps = half_reps(v);
    let points = witness_grid(v, grid_size);
    let rows = 1 + 2 * reps.len();
    let mut b = vec![0.0; rows];
    b[0] = 1.0;
    let mut lp = StandardLp::new(b);
    let columns: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| {
            let mut col = Vec::with_capacity(rows);
            col.push(1.0);
            for r in &reps {
                let z = e_turns(p.phase(r));
                col.push(z.re);
                col.push(z.im);
            }
            col
        })
        .collect();
    for (p, col) in points.iter().zip(&columns) {
        lp.push_column(if p.is_zero() { -1.0 } else { 0.0 }, col);
    }
    let no_witness = |iterations| {
        Ok(WitnessReport {
            measure: SpectralMeasure::dirac(TorusPoint::zero(d)),
            value: 0.0,
            residual: f64::NAN,
            flag: Some(NO_WITNESS_FLAG.to_string()),
            grid_size,
            lp_points: points.len(),
            lp_iterations: iterations,
        })
    };
    let sol = match lp.solve(opts) {
        Ok(sol) => sol,
        Err(LpFailure::Infeasible { .. }) => return no_witness(0),
        Err(e) => return Err(lp_error(e, grid_size)),
    };
    let atoms: Vec<(TorusPoint, f64)> = points
        .iter()
        .zip(&sol.x)
        .filter(|(_, w)| **w >= 1e-15)
        .map(|(p, w)| (*p, *w))
        .collect();
    let measure = SpectralMeasure::normalized(d, atoms)?;
    let value = measure.mass_at_zero();
    if value <= 1e-12 {
        return no_witness(sol.iterations);
    }
    let residual = witness_residual(&measure, v);
    Ok(WitnessReport {
        measure,
        value,
        residual,
        flag: None,
        grid_size,
        lp_points: points.len(),
        lp_iterations: sol.iterations,
    })
}

/// max_{v ∈ V} |μ̂(v)|.
pub fn witness_residual(mu: &SpectralMeasure, v: &FiniteSet) -> f64 {
    v.iter()
        .map(|h| fourier_coefficient(mu, h).norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct DualityAudit {
    pub cert_value: f64,
    pub witness_value: f64,
    pub gap: f64,
    pub slack: f64,
    pub certificate: CertReport,
    pub witness: WitnessReport,
}

/// Runs both searches at the same grid and checks weak duality
/// witness ≤ certificate + 2π·deg·Σ|a_v|/grid + 10⁻⁶.
pub fn duality_audit(v: &FiniteSet, grid_size: usize) -> Result<DualityAudit> {
    let problem = CertProblem::new(v.clone(), 1.0 - 1e-9, grid_size, Variant::StrictNonneg)?;
    let certificate = find_certificate(&problem)?;
    let witness = find_witness(v, grid_size)?;
    let cert = &certificate.certificate;
    let slack = TAU * cert.degree() as f64 * cert.abs_sum() / grid_size as f64 + 1e-6;
    let cert_value = cert.a0();
    if witness.value > cert_value + slack {
        return Err(Error::DualityViolation {
            certificate: cert_value,
            witness: witness.value,
            slack,
        });
    }
    Ok(DualityAudit {
        cert_value,
        witness_value: witness.value,
        gap: cert_value - witness.value,
        slack,
        certificate,
        witness,
    })
}

/// x ↦ P(kx): frequencies multiplied by k, coefficients unchanged.
pub fn transfer_homomorphism(cert: &TrigPolyCert, k: i64) -> Result<TrigPolyCert> {
    let out = cert.dilate(k)?;
    let cap = if cert.dim() == 1 { 1 << 24 } else { 4096 };
    let base = if cert.grid_size == 0 {
        cert.default_grid()
    } else {
        cert.grid_size
    };
    let grid = base
        .saturating_mul(k.unsigned_abs() as usize)
        .max(out.default_grid())
        .min(cap);
    out.verified(grid)
}

/// a_v = #{(a, b) ∈ A² : a − b = v}/|A|², i.e. P(x) = |Σ_{a∈A} e(a·x)|²/|A|².
pub fn difference_set_certificate(a: &FiniteSet) -> Result<TrigPolyCert> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    let n2 = (a.len() * a.len()) as f64;
    let mut counts: std::collections::BTreeMap<GroupPoint, usize> = Default::default();
    for x in a.iter() {
        for y in a.iter() {
            *counts.entry(*x - *y).or_default() += 1;
        }
    }
    let cert = TrigPolyCert::new(
        a.dim(),
        counts
            .into_iter()
            .map(|(v, c)| (v, num_complex::Complex64::new(c as f64 / n2, 0.0))),
    )?;
    let grid = cert.default_grid();
    let grid = if a.dim() == 2 { grid.min(2048) } else { grid };
    cert.verified(grid)
}

/// A witness refuting a finite set, searched on the enriched grid. The search
/// must succeed: every finite set admits one.
pub fn finite_set_refuter(h: &FiniteSet) -> Result<WitnessReport> {
    validate_frequencies(h)?;
    let rep = find_witness(h, default_lp_grid(h))?;
    if rep.flag.is_some() || rep.value <= 0.0 {
        return Err(Error::RefuterFailed);
    }
    Ok(rep)
}
