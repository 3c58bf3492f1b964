//! Points of the torus 𝕋^d = ℝ^d/ℤ^d and the characters e(h·x) = exp(2πi h·x).
//!
//! Angles are measured in turns. Points that are exact rationals keep their
//! numerators and denominator so that h·x can be reduced modulo 1 in integer
//! arithmetic before any rounding happens.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::group::{check_dim, GroupPoint};

/// Fractional part in `[0, 1)`.
pub fn frac(t: f64) -> f64 {
    let f = t - t.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `exp(2πi t)`, exact at multiples of a quarter turn.
pub fn e_turns(t: f64) -> Complex64 {
    let t = frac(t);
    let quarter = (4.0 * t).round();
    let r = t - quarter / 4.0;
    let (s, c) = (TAU * r).sin_cos();
    match (quarter as i64).rem_euclid(4) {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// A rational point `num / den` of 𝕋^d with `0 <= num_i < den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalPoint {
    pub num: [i64; 2],
    pub den: i64,
    pub dim: u8,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl RationalPoint {
    pub fn new(num: &[i64], den: i64) -> Result<Self> {
        check_dim(num.len())?;
        if den <= 0 {
            return Err(Error::InvalidInput(format!("denominator {den} must be positive")));
        }
        let mut n = [0i64; 2];
        for (slot, &v) in n.iter_mut().zip(num) {
            *slot = v.rem_euclid(den);
        }
        let mut g = den;
        for &v in &n[..num.len()] {
            g = gcd(g, v);
        }
        for v in n.iter_mut() {
            *v /= g;
        }
        Ok(Self {
            num: n,
            den: den / g,
            dim: num.len() as u8,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// h·x mod 1, with the reduction done in integers.
    pub fn phase(&self, h: &GroupPoint) -> f64 {
        let den = self.den as i128;
        let mut acc: i128 = 0;
        for (i, &c) in h.coords().iter().enumerate() {
            acc = (acc + (c as i128 % den) * (self.num[i] as i128)) % den;
        }
        acc.rem_euclid(den) as f64 / self.den as f64
    }

    pub fn neg(&self) -> Self {
        let mut n = self.num;
        for v in n.iter_mut().take(self.dim()) {
            *v = (self.den - *v) % self.den;
        }
        Self { num: n, ..*self }
    }

    pub fn to_f64(&self) -> [f64; 2] {
        let mut x = [0.0; 2];
        for i in 0..self.dim() {
            x[i] = self.num[i] as f64 / self.den as f64;
        }
        x
    }
}

/// A point of 𝕋^d (d ∈ {1,2}) with coordinates in `[0,1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    dim: u8,
    x: [f64; 2],
    exact: Option<RationalPoint>,
}

impl TorusPoint {
    pub fn new(coords: &[f64]) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite torus coordinate".into()));
        }
        let mut x = [0.0; 2];
        for (slot, &c) in x.iter_mut().zip(coords) {
            *slot = frac(c);
        }
        Ok(Self {
            dim: coords.len() as u8,
            x,
            exact: None,
        })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            dim: d as u8,
            x: [0.0; 2],
            exact: Some(RationalPoint {
                num: [0, 0],
                den: 1,
                dim: d as u8,
            }),
        }
    }

    pub fn rational(r: RationalPoint) -> Self {
        Self {
            dim: r.dim,
            x: r.to_f64(),
            exact: Some(r),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.x[..self.dim()]
    }

    pub fn exact(&self) -> Option<&RationalPoint> {
        self.exact.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&c| c == 0.0)
    }

    /// h·x mod 1.
    pub fn phase(&self, h: &GroupPoint) -> f64 {
        match &self.exact {
            Some(r) => r.phase(h),
            None => {
                let mut acc = 0.0;
                for (i, &c) in h.coords().iter().enumerate() {
                    acc += frac(c as f64 * self.x[i]);
                }
                frac(acc)
            }
        }
    }

    /// The character value e(h·x).
    pub fn character(&self, h: &GroupPoint) -> Complex64 {
        e_turns(self.phase(h))
    }

    pub fn neg(&self) -> Self {
        match &self.exact {
            Some(r) => Self::rational(r.neg()),
            None => {
                let mut x = self.x;
                for v in x.iter_mut().take(self.dim()) {
                    *v = frac(-*v);
                }
                Self {
                    dim: self.dim,
                    x,
                    exact: None,
                }
            }
        }
    }

    /// Key for exact deduplication modulo 1.
    pub(crate) fn key(&self) -> [u64; 2] {
        [self.x[0].to_bits(), self.x[1].to_bits()]
    }
}

/// Serialized form: `{"theta": [..], "exact": [num.., den]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusPointRecord {
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<i64>>,
}

impl From<&TorusPoint> for TorusPointRecord {
    fn from(p: &TorusPoint) -> Self {
        Self {
            theta: p.coords().to_vec(),
            exact: p.exact().map(|r| {
                let mut v = r.num[..r.dim()].to_vec();
                v.push(r.den);
                v
            }),
        }
    }
}

impl TryFrom<&TorusPointRecord> for TorusPoint {
    type Error = Error;

    fn try_from(rec: &TorusPointRecord) -> Result<Self> {
        match &rec.exact {
            Some(v) if v.len() >= 2 => {
                let (num, den) = v.split_at(v.len() - 1);
                if num.len() != rec.theta.len() {
                    return Err(Error::Parse("exact point dimension differs from theta".into()));
                }
                Ok(TorusPoint::rational(RationalPoint::new(num, den[0])?))
            }
            Some(_) => Err(Error::Parse("exact point needs numerators and a denominator".into())),
            None => TorusPoint::new(&rec.theta),
        }
    }
}

/// Best rational approximation `p/q` of `theta` with `q <= max_den`, if it lies
/// within `tol`. Continued-fraction convergents.
pub fn rational_approx(theta: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let x = frac(theta);
    if x.abs() <= tol {
        return Some((0, 1));
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > i64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as i64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        if ((p2 as f64 / q2 as f64) - x).abs() <= tol {
            return Some((p2, q2));
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let f = r - r.floor();
        if f == 0.0 {
            break;
        }
        r = 1.0 / f;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(e_turns(0.0), Complex64::new(1.0, 0.0));
        assert_eq!(e_turns(0.25), Complex64::new(0.0, 1.0));
        assert_eq!(e_turns(0.5), Complex64::new(-1.0, 0.0));
        assert_eq!(e_turns(0.75), Complex64::new(0.0, -1.0));
        assert_eq!(e_turns(-0.5), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn e_turns_matches_exp() {
        for k in 0..100 {
            let t = k as f64 * 0.0371 - 1.3;
            let want = Complex64::new(0.0, TAU * t).exp();
            assert!((e_turns(t) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn rational_phase_is_reduced_exactly() {
        let r = RationalPoint::new(&[1], 2).unwrap();
        for v in [1i64, 3, 5, 1_000_001, -7] {
            assert_eq!(r.phase(&GroupPoint::d1(v)), 0.5);
        }
        let r = RationalPoint::new(&[6, 3], 9).unwrap();
        assert_eq!((r.num, r.den), ([2, 1, ], 3));
    }

    #[test]
    fn convergents() {
        assert_eq!(rational_approx(0.5, 100, 1e-12), Some((1, 2)));
        assert_eq!(rational_approx(3.0 / 7.0, 100, 1e-12), Some((3, 7)));
        assert_eq!(rational_approx(2f64.sqrt() - 1.0, 1_000_000, 1e-13), None);
    }
}
