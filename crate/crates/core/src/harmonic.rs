//! Fourier series on the circle: the DFT pair on a uniform θ-grid, coefficient
//! norms, the Hilbert transform as the multiplier `-i·sign(n)`, and pointwise
//! analytic calculus (exp, log, reciprocal) re-expanded on the grid.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{norm_of, DecayProfile, SpaceSpec};

pub const DEFAULT_GRID: usize = 4096;

/// Fraction of the l¹ coefficient mass allowed in the top 10% of frequencies
/// before a grid result is flagged as aliased.
pub const ALIASING_THRESHOLD: f64 = 1e-8;

/// Two-sided coefficients `c_n`, `n = -N..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesJson", into = "SeriesJson")]
pub struct FourierSeries {
    coeffs: Vec<Complex64>,
    grid_size: usize,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    coeffs_re: Vec<f64>,
    coeffs_im: Vec<f64>,
    offset: i64,
    #[serde(default)]
    grid_size: Option<usize>,
}

impl TryFrom<SeriesJson> for FourierSeries {
    type Error = Error;

    fn try_from(j: SeriesJson) -> Result<Self> {
        if j.coeffs_re.len() != j.coeffs_im.len() || j.coeffs_re.len() % 2 == 0 {
            return Err(Error::GridMismatch(
                "coefficient arrays must have equal odd length".into(),
            ));
        }
        let degree = j.coeffs_re.len() / 2;
        if j.offset != -(degree as i64) {
            return Err(Error::GridMismatch(format!(
                "offset {} does not match {} coefficients",
                j.offset,
                j.coeffs_re.len()
            )));
        }
        let coeffs = j
            .coeffs_re
            .into_iter()
            .zip(j.coeffs_im)
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        let grid = j
            .grid_size
            .unwrap_or_else(|| (2 * degree).max(2).next_power_of_two());
        FourierSeries::from_coeffs(coeffs, grid)
    }
}

impl From<FourierSeries> for SeriesJson {
    fn from(f: FourierSeries) -> Self {
        SeriesJson {
            coeffs_re: f.coeffs.iter().map(|c| c.re).collect(),
            coeffs_im: f.coeffs.iter().map(|c| c.im).collect(),
            offset: -(f.degree() as i64),
            grid_size: Some(f.grid_size),
        }
    }
}

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < 2 || !grid_size.is_power_of_two() {
        return Err(Error::GridMismatch(format!(
            "grid size {grid_size} is not a power of two >= 2"
        )));
    }
    Ok(())
}

/// `θ_j = 2πj/G`.
pub fn theta(j: usize, grid_size: usize) -> f64 {
    2.0 * std::f64::consts::PI * j as f64 / grid_size as f64
}

impl FourierSeries {
    /// `coeffs` lists `c_{-N}, …, c_N`; its length must be odd and `2N` must
    /// fit on the grid.
    pub fn from_coeffs(coeffs: Vec<Complex64>, grid_size: usize) -> Result<Self> {
        check_grid(grid_size)?;
        if coeffs.len() % 2 == 0 {
            return Err(Error::GridMismatch("even number of coefficients".into()));
        }
        if coeffs.len() - 1 > grid_size {
            return Err(Error::GridMismatch(format!(
                "degree {} does not fit a grid of {grid_size}",
                coeffs.len() / 2
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite(0));
        }
        Ok(Self { coeffs, grid_size })
    }

    /// Builds a series of degree `degree` from a closure `n ↦ c_n`.
    pub fn from_fn(degree: usize, grid_size: usize, f: impl Fn(i64) -> Complex64) -> Result<Self> {
        let d = degree as i64;
        Self::from_coeffs((-d..=d).map(f).collect(), grid_size)
    }

    pub fn constant(c: f64, grid_size: usize) -> Result<Self> {
        Self::from_coeffs(vec![Complex64::new(c, 0.0)], grid_size)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        let i = n + self.degree() as i64;
        if i < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs
            .get(i as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `(n, c_n)` for `n = -N..=N`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + Clone + '_ {
        let d = self.degree() as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - d, c))
    }

    /// `c_{-n} = conj(c_n)` within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        let d = self.degree() as i64;
        (0..=d).all(|n| (self.coeff(-n) - self.coeff(n).conj()).norm() <= tol)
    }

    pub fn map_coeffs(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let coeffs = self.iter().map(|(n, c)| f(n, c)).collect();
        Self {
            coeffs,
            grid_size: self.grid_size,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_coeffs(|_, c| s * c)
    }

    pub fn add(&self, other: &FourierSeries) -> Self {
        let d = self.degree().max(other.degree()) as i64;
        let coeffs = (-d..=d).map(|n| self.coeff(n) + other.coeff(n)).collect();
        Self {
            coeffs,
            grid_size: self.grid_size.max(other.grid_size),
        }
    }

    /// Value at a single angle (direct summation).
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.iter()
            .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * theta))
            .sum()
    }

    /// `Σ_{top 10% of |n|} |c_n| / Σ |c_n|`.
    pub fn tail_fraction(&self) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c.norm()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let cut = self.degree() - self.degree() / 10;
        let tail: f64 = self
            .iter()
            .filter(|(n, _)| n.unsigned_abs() as usize > cut)
            .map(|(_, c)| c.norm())
            .sum();
        tail / total
    }
}

/// Coefficients `c_n = (1/G) Σ_j f(θ_j) e^{-inθ_j}` for `|n| ≤ G/2`; the Nyquist
/// bin is split evenly between `±G/2` so that [`synthesize`] inverts exactly.
pub fn analyze(samples: &[Complex64]) -> Result<FourierSeries> {
    let g = samples.len();
    check_grid(g)?;
    if samples
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(Error::NonFinite(0));
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(g).process(&mut buf);
    let scale = 1.0 / g as f64;
    let half = g / 2;
    let mut coeffs = Vec::with_capacity(g + 1);
    for n in -(half as i64)..=(half as i64) {
        let bin = n.rem_euclid(g as i64) as usize;
        let mut c = buf[bin] * scale;
        if n.unsigned_abs() as usize == half {
            c *= 0.5;
        }
        coeffs.push(c);
    }
    FourierSeries::from_coeffs(coeffs, g)
}

pub fn analyze_real(samples: &[f64]) -> Result<FourierSeries> {
    let samples: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    analyze(&samples)
}

/// Values `Σ_n c_n e^{inθ_j}` on the `grid_size`-point grid.
pub fn synthesize(f: &FourierSeries, grid_size: usize) -> Result<Vec<Complex64>> {
    check_grid(grid_size)?;
    if 2 * f.degree() > grid_size {
        return Err(Error::GridMismatch(format!(
            "degree {} needs at least {} grid points, got {grid_size}",
            f.degree(),
            2 * f.degree()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_size];
    for (n, c) in f.iter() {
        buf[n.rem_euclid(grid_size as i64) as usize] += c;
    }
    FftPlanner::new()
        .plan_fft_inverse(grid_size)
        .process(&mut buf);
    Ok(buf)
}

pub fn synthesize_real(f: &FourierSeries, grid_size: usize) -> Result<Vec<f64>> {
    Ok(synthesize(f, grid_size)?
        .into_iter()
        .map(|c| c.re)
        .collect())
}

/// Literal coefficient norm, `Σ |n|^s |c_n|^p` style, over both signs of `n`.
pub fn algebra_norm(f: &FourierSeries, space: SpaceSpec) -> f64 {
    norm_of(f.iter().map(|(n, c)| (n, c.norm())), space)
}

/// Submultiplicative norm of the Wiener-type algebra: the weight `|n|^s` is
/// replaced by `(1 + |n|)^s` so that constants have nonzero norm, and the
/// l²-type spaces are intersected with l¹.
pub fn banach_norm(f: &FourierSeries, space: SpaceSpec) -> f64 {
    let shifted = |s: f64| -> f64 {
        f.iter()
            .map(|(n, c)| (1.0 + n.unsigned_abs() as f64).powf(s) * c.norm())
            .sum()
    };
    let shifted_sq = |s: f64| -> f64 {
        f.iter()
            .map(|(n, c)| (1.0 + n.unsigned_abs() as f64).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    match space {
        SpaceSpec::Lp { p: 1, s } => shifted(s),
        SpaceSpec::Lp { s, .. } => shifted_sq(s) + shifted(0.0),
        SpaceSpec::Intersection => shifted_sq(1.0) + shifted(0.0),
    }
}

/// Multiplies the coefficients by `-i·sign(n)`.
pub fn hilbert(f: &FourierSeries) -> FourierSeries {
    f.map_coeffs(|n, c| match n.signum() {
        1 => Complex64::new(0.0, -1.0) * c,
        -1 => Complex64::new(0.0, 1.0) * c,
        _ => Complex64::new(0.0, 0.0),
    })
}

/// Boundary imaginary part of the analytic function whose real part is `re_f`.
pub fn conjugate_pair(re_f: &FourierSeries) -> FourierSeries {
    hilbert(re_f)
}

/// `re_f + i·H(re_f)`: the boundary values of the analytic completion.
pub fn analytic_completion(re_f: &FourierSeries) -> FourierSeries {
    re_f.add(&conjugate_pair(re_f).scale(Complex64::new(0.0, 1.0)))
}

/// Exact product of two series, computed on a zero-padded grid.
pub fn multiply(f: &FourierSeries, g: &FourierSeries) -> Result<FourierSeries> {
    let degree = f.degree() + g.degree();
    let grid = (2 * degree + 2).next_power_of_two();
    let fs = synthesize(f, grid)?;
    let gs = synthesize(g, grid)?;
    let prod: Vec<Complex64> = fs.iter().zip(&gs).map(|(a, b)| a * b).collect();
    let full = analyze(&prod)?;
    let d = degree as i64;
    FourierSeries::from_coeffs(
        (-d..=d).map(|n| full.coeff(n)).collect(),
        f.grid_size
            .max(g.grid_size)
            .max((2 * degree).max(2).next_power_of_two()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticOp {
    Exp,
    Log,
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalculusOutput {
    pub series: FourierSeries,
    /// l¹ norm of the result's coefficients.
    pub l1_norm: f64,
    /// See [`FourierSeries::tail_fraction`].
    pub tail_fraction: f64,
    pub aliasing_ok: bool,
}

const RANGE_FLOOR: f64 = 1e-8;

/// Applies `op` pointwise on the series' grid and re-expands.
pub fn analytic_calculus(f: &FourierSeries, op: AnalyticOp) -> Result<CalculusOutput> {
    let values = synthesize(f, f.grid_size)?;
    if matches!(op, AnalyticOp::Log | AnalyticOp::Reciprocal) {
        let min = values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min);
        if !(min > RANGE_FLOOR) {
            return Err(Error::RangeViolation(format!("min |f| = {min:e}")));
        }
    }
    if op == AnalyticOp::Log {
        if let Some(v) = values
            .iter()
            .find(|v| v.re <= 0.0 && v.im.abs() <= RANGE_FLOOR * v.norm())
        {
            return Err(Error::RangeViolation(format!(
                "value {v} lies on the branch cut of log"
            )));
        }
    }
    let mapped: Vec<Complex64> = values
        .into_iter()
        .map(|v| match op {
            AnalyticOp::Exp => v.exp(),
            AnalyticOp::Log => v.ln(),
            AnalyticOp::Reciprocal => v.inv(),
        })
        .collect();
    let series = analyze(&mapped)?;
    let tail_fraction = series.tail_fraction();
    Ok(CalculusOutput {
        l1_norm: algebra_norm(&series, SpaceSpec::L1),
        aliasing_ok: tail_fraction < ALIASING_THRESHOLD,
        tail_fraction,
        series,
    })
}

pub use crate::seqspace::NOISE_FLOOR;

/// Largest truncation of the decay profiles on a grid of size `G`: half the
/// band resolved by the grid, well inside the range the aliasing check covers.
pub fn diagnostic_window(grid_size: usize) -> usize {
    grid_size / 4
}

/// Dyadic partial-norm profile of the coefficients up to `window`. Entries
/// under [`NOISE_FLOOR`] relative to the largest coefficient are dropped, since
/// the weight `|n|^s` would otherwise turn flat rounding noise into growth.
pub fn in_algebra(f: &FourierSeries, space: SpaceSpec, window: usize) -> DecayProfile {
    let floor = NOISE_FLOOR * f.iter().fold(0.0f64, |m, (_, c)| m.max(c.norm()));
    DecayProfile::of(
        f.iter()
            .map(|(n, c)| (n, c.norm()))
            .filter(|&(_, v)| v > floor),
        space,
        window,
    )
}
