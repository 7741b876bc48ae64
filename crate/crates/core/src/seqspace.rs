//! Weighted sequence spaces `l^p_s`, tail sums of Jacobi parameters and the
//! sequence-splitting product.
//!
//! Every sequence is finitely supported: entries outside the stored window are
//! exactly zero, so all norms and tail sums below are finite sums.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real sequence stored on the window `offset .. offset + values.len()`,
/// zero everywhere else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeq {
    pub offset: i64,
    pub values: Vec<f64>,
}

impl DecaySeq {
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(offset + i as i64));
        }
        Ok(Self { offset, values })
    }

    pub fn zeros(offset: i64, len: usize) -> Self {
        Self {
            offset,
            values: vec![0.0; len],
        }
    }

    /// Single nonzero entry `value` at index `n`.
    pub fn delta(n: i64, value: f64) -> Self {
        Self {
            offset: n,
            values: vec![value],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    pub fn get(&self, n: i64) -> f64 {
        let i = n - self.offset;
        if i < 0 {
            return 0.0;
        }
        self.values.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + Clone + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            offset: self.offset,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Entrywise difference over the union of both windows.
    pub fn sub(&self, other: &DecaySeq) -> DecaySeq {
        let lo = self.offset.min(other.offset);
        let hi = self.end().max(other.end());
        let values = (lo..hi).map(|n| self.get(n) - other.get(n)).collect();
        DecaySeq { offset: lo, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The entries with index `>= n`, as a sequence re-indexed to start at 0.
    pub fn shifted_tail(&self, n: i64) -> DecaySeq {
        let hi = self.end();
        let values = (n..hi.max(n)).map(|k| self.get(k)).collect();
        DecaySeq { offset: 0, values }
    }

    /// Zeroes the entries at or below `rel` times the largest magnitude.
    pub fn denoised(&self, rel: f64) -> DecaySeq {
        let floor = rel * self.max_abs();
        let values = self
            .values
            .iter()
            .map(|&v| if v.abs() > floor { v } else { 0.0 })
            .collect();
        DecaySeq {
            offset: self.offset,
            values,
        }
    }

    /// Drops trailing exact zeros.
    pub fn trimmed(mut self) -> Self {
        while self.values.last() == Some(&0.0) {
            self.values.pop();
        }
        self
    }
}

/// Which of the weighted norms to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// `‖β‖^p = Σ |n|^s |β_n|^p`, `p ∈ {1, 2}`, `s ≥ 0`.
    Lp { p: u8, s: f64 },
    /// `l²₁ ∩ l¹` with norm `‖·‖_{l²₁} + ‖·‖_{l¹}`.
    Intersection,
}

impl SpaceSpec {
    pub const L11: SpaceSpec = SpaceSpec::Lp { p: 1, s: 1.0 };
    pub const L21: SpaceSpec = SpaceSpec::Lp { p: 2, s: 1.0 };
    pub const L1: SpaceSpec = SpaceSpec::Lp { p: 1, s: 0.0 };

    pub fn lp(p: u8, s: f64) -> Result<Self> {
        let space = SpaceSpec::Lp { p, s };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpaceSpec::Lp { p, s } => {
                if p != 1 && p != 2 {
                    return Err(Error::InvalidSpace(format!("p = {p} not in {{1, 2}}")));
                }
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(Error::InvalidSpace(format!("weight exponent s = {s}")));
                }
                Ok(())
            }
            SpaceSpec::Intersection => Ok(()),
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceSpec::Intersection => write!(f, "intersection"),
            SpaceSpec::Lp { p, s } => write!(f, "l{p}s:{s}"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    /// Accepts `l11`, `l21`, `intersection`, `l1s:<s>` and `l2s:<s>`.
    fn from_str(text: &str) -> Result<Self> {
        let parse_s = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidSpace(format!("bad weight exponent in {text:?}")))
        };
        let space = match text {
            "l11" => SpaceSpec::L11,
            "l21" => SpaceSpec::L21,
            "intersection" => SpaceSpec::Intersection,
            _ => {
                if let Some(s) = text.strip_prefix("l1s:") {
                    SpaceSpec::Lp {
                        p: 1,
                        s: parse_s(s)?,
                    }
                } else if let Some(s) = text.strip_prefix("l2s:") {
                    SpaceSpec::Lp {
                        p: 2,
                        s: parse_s(s)?,
                    }
                } else {
                    return Err(Error::InvalidSpace(format!("unknown space {text:?}")));
                }
            }
        };
        space.validate()?;
        Ok(space)
    }
}

/// `|n|^s`, taken literally: the `n = 0` term vanishes whenever `s > 0`.
#[inline]
pub fn weight(n: i64, s: f64) -> f64 {
    (n.unsigned_abs() as f64).powf(s)
}

/// Norm of an arbitrary finitely supported family of `(index, |value|)`
/// pairs. Shared by real sequences and Fourier coefficient arrays.
pub fn norm_of<I>(entries: I, space: SpaceSpec) -> f64
where
    I: IntoIterator<Item = (i64, f64)> + Clone,
{
    match space {
        SpaceSpec::Lp { p: 1, s } => entries
            .into_iter()
            .map(|(n, v)| weight(n, s) * v.abs())
            .sum(),
        SpaceSpec::Lp { s, .. } => entries
            .into_iter()
            .map(|(n, v)| weight(n, s) * v * v)
            .sum::<f64>()
            .sqrt(),
        SpaceSpec::Intersection => {
            norm_of(entries.clone(), SpaceSpec::L21) + norm_of(entries, SpaceSpec::L1)
        }
    }
}

pub fn norm(seq: &DecaySeq, space: SpaceSpec) -> f64 {
    norm_of(seq.iter(), space)
}

/// `λ_n = -Σ_{k>n} b_k` and `κ_n = -Σ_{k>n} (a_k² - 1)` for `n = 0..N-1`,
/// where `a`, `b` are 1-based (`a[0] = a_1`) with tails `a_n = 1`, `b_n = 0`.
pub fn tail_sums(a: &[f64], b: &[f64]) -> Result<(DecaySeq, DecaySeq)> {
    if let Some((i, &v)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonpositiveA {
            index: i + 1,
            value: v,
        });
    }
    let n = a.len().max(b.len());
    let mut lambda = vec![0.0; n];
    let mut kappa = vec![0.0; n];
    let mut lam = 0.0;
    let mut kap = 0.0;
    for k in (0..n).rev() {
        // index k holds λ_k, which sums from a_{k+1} = a[k]
        let ak = a.get(k).copied().unwrap_or(1.0);
        let bk = b.get(k).copied().unwrap_or(0.0);
        lam -= bk;
        kap -= ak * ak - 1.0;
        lambda[k] = lam;
        kappa[k] = kap;
    }
    Ok((DecaySeq::new(0, lambda)?, DecaySeq::new(0, kappa)?))
}

/// `η_n = Σ_{k≥n} β_k γ_k`, stored from `min(0, offsets)` to the end of the
/// common support.
pub fn tail_product(beta: &DecaySeq, gamma: &DecaySeq) -> DecaySeq {
    let lo = beta.offset.min(gamma.offset).min(0);
    let hi = beta.end().min(gamma.end()).max(lo);
    let mut values = vec![0.0; (hi - lo) as usize];
    let mut acc = 0.0;
    for n in (lo..hi).rev() {
        acc += beta.get(n) * gamma.get(n);
        values[(n - lo) as usize] = acc;
    }
    DecaySeq { offset: lo, values }
}

/// Entries below this fraction of the largest one are rounding noise.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Relative increment over the last dyadic doubling below which a partial-norm
/// profile counts as flat.
pub const FLAT_RTOL: f64 = 1e-3;
/// Absolute floor for the same test, so that identically zero data is flat.
pub const FLAT_ATOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub truncation: usize,
    pub partial_norm: f64,
}

/// Partial norms over the indices `|n| < T` for `T = 1, 2, 4, …, window`.
///
/// Membership of an infinite sequence cannot be decided from finite data; a
/// flat profile over the last doubling is reported as *consistent with*
/// membership, a growing one as evidence against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub space: SpaceSpec,
    pub points: Vec<ProfilePoint>,
    pub flat: bool,
}

impl DecayProfile {
    /// `window` is rounded up to a power of two (at least 2).
    pub fn of<I>(entries: I, space: SpaceSpec, window: usize) -> Self
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let window = window.max(2).next_power_of_two();
        let entries: Vec<(i64, f64)> = entries.into_iter().collect();
        let mut points = Vec::new();
        let mut t = 1usize;
        while t <= window {
            let part = entries
                .iter()
                .copied()
                .filter(|(n, _)| n.unsigned_abs() < t as u64);
            let part: Vec<_> = part.collect();
            points.push(ProfilePoint {
                truncation: t,
                partial_norm: norm_of(part.iter().copied(), space),
            });
            t *= 2;
        }
        let last = points[points.len() - 1].partial_norm;
        let prev = points[points.len() - 2].partial_norm;
        let flat = last - prev <= FLAT_RTOL * last + FLAT_ATOL;
        Self {
            space,
            points,
            flat,
        }
    }

    pub fn of_seq(seq: &DecaySeq, space: SpaceSpec, window: usize) -> Self {
        Self::of(seq.iter(), space, window)
    }

    pub fn last(&self) -> f64 {
        self.points.last().map(|p| p.partial_norm).unwrap_or(0.0)
    }
}
