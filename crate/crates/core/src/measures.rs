//! Probability measures on the unit circle and on `[-2, 2]`, the Szegő mapping
//! between them, Carathéodory functions and the class-𝒱 diagnostic.
//!
//! Grids: a circle measure stores `w(θ_j)` at `θ_j = 2πj/G`, `j = 0..G`, with
//! `dμ = w dθ/2π + Σ m_k δ_{θ_k}`. An interval measure stores `v(x_j)` at the
//! interior images `x_j = 2 cos θ_j`, `j = 1..G/2`, so the weight relation
//! `w(θ) = 2π |sin θ| v(2 cos θ)` is a relabeling with no interpolation. The
//! two edge values `w(0)`, `w(π)` are recovered by even extrapolation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{self, theta, FourierSeries};
use crate::seqspace::{DecayProfile, SpaceSpec};

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;
const MIN_GRID: usize = 16;

fn check_measure_grid(grid_size: usize) -> Result<()> {
    if grid_size != 0 && (grid_size < MIN_GRID || !grid_size.is_power_of_two()) {
        return Err(Error::GridMismatch(format!(
            "measure grid {grid_size} must be 0 or a power of two >= {MIN_GRID}"
        )));
    }
    Ok(())
}

fn check_masses(masses: &[(f64, f64)]) -> Result<()> {
    for &(pos, m) in masses {
        if !pos.is_finite() || !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "bad point mass ({pos}, {m})"
            )));
        }
    }
    Ok(())
}

/// Maps an angle into `(-π, π]`.
pub fn normalize_angle(t: f64) -> f64 {
    let r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Value at 0 of an even function sampled at `h, 2h, 3h` (error `O(h⁶)`).
pub(crate) fn even_extrapolate(f1: f64, f2: f64, f3: f64) -> f64 {
    (15.0 * f1 - 6.0 * f2 + f3) / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureJson {
    Circle {
        grid_size: usize,
        weight: Vec<f64>,
        #[serde(default)]
        masses: Vec<[f64; 2]>,
    },
    Interval {
        grid_size: usize,
        weight: Vec<f64>,
        #[serde(default)]
        masses: Vec<[f64; 2]>,
        /// Circle weight at `θ = 0` and `θ = π`; extrapolated when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge_weights: Option<[f64; 2]>,
    },
}

/// Either kind of measure, as read from a JSON file.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Circle(CircleMeasure),
    Interval(IntervalMeasure),
}

impl TryFrom<MeasureJson> for Measure {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Self> {
        let pairs = |m: Vec<[f64; 2]>| m.into_iter().map(|[p, w]| (p, w)).collect::<Vec<_>>();
        match j {
            MeasureJson::Circle {
                grid_size,
                weight,
                masses,
            } => {
                if weight.len() != grid_size {
                    return Err(Error::GridMismatch(format!(
                        "{} weights for grid {grid_size}",
                        weight.len()
                    )));
                }
                Ok(Measure::Circle(CircleMeasure::new(weight, pairs(masses))?))
            }
            MeasureJson::Interval {
                grid_size,
                weight,
                masses,
                edge_weights,
            } => Ok(Measure::Interval(match edge_weights {
                None => IntervalMeasure::new(grid_size, weight, pairs(masses))?,
                Some(edges) => {
                    IntervalMeasure::with_edges(grid_size, weight, edges, pairs(masses))?
                }
            })),
        }
    }
}

impl From<Measure> for MeasureJson {
    fn from(m: Measure) -> Self {
        let pairs = |m: Vec<(f64, f64)>| m.into_iter().map(|(p, w)| [p, w]).collect();
        match m {
            Measure::Circle(c) => MeasureJson::Circle {
                grid_size: c.grid_size,
                weight: c.weight,
                masses: pairs(c.masses),
            },
            Measure::Interval(i) => MeasureJson::Interval {
                grid_size: i.grid_size,
                edge_weights: i.exact_edges.then_some(i.edges),
                weight: i.density,
                masses: pairs(i.masses),
            },
        }
    }
}

/// `dμ = w dθ/2π + Σ m_k δ_{θ_k}` on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct CircleMeasure {
    grid_size: usize,
    weight: Vec<f64>,
    masses: Vec<(f64, f64)>,
    conjugation_invariant: bool,
}

impl TryFrom<MeasureJson> for CircleMeasure {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Self> {
        match Measure::try_from(j)? {
            Measure::Circle(c) => Ok(c),
            Measure::Interval(_) => Err(Error::InvalidMeasure("expected a circle measure".into())),
        }
    }
}

impl From<CircleMeasure> for MeasureJson {
    fn from(c: CircleMeasure) -> Self {
        Measure::Circle(c).into()
    }
}

impl CircleMeasure {
    /// `weight` holds `w(θ_j)` on the uniform grid (empty for a purely atomic
    /// measure); `masses` are `(θ, m)` pairs. Total mass must be 1.
    pub fn new(weight: Vec<f64>, masses: Vec<(f64, f64)>) -> Result<Self> {
        let measure = Self::build(weight, masses)?;
        let total = measure.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(measure)
    }

    /// Same as [`CircleMeasure::new`] but rescales to total mass 1.
    pub fn normalized(weight: Vec<f64>, masses: Vec<(f64, f64)>) -> Result<Self> {
        let raw = Self::build(weight, masses)?;
        let total = raw.total_mass();
        if !(total > 0.0) {
            return Err(Error::NotNormalized(total));
        }
        Self::new(
            raw.weight.iter().map(|w| w / total).collect(),
            raw.masses.iter().map(|&(t, m)| (t, m / total)).collect(),
        )
    }

    fn build(weight: Vec<f64>, masses: Vec<(f64, f64)>) -> Result<Self> {
        let grid_size = weight.len();
        check_measure_grid(grid_size)?;
        if let Some(i) = weight.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "weight[{i}] = {}",
                weight[i]
            )));
        }
        check_masses(&masses)?;
        let masses: Vec<(f64, f64)> = masses
            .into_iter()
            .map(|(t, m)| (normalize_angle(t), m))
            .collect();
        let mut measure = Self {
            grid_size,
            weight,
            masses,
            conjugation_invariant: false,
        };
        measure.conjugation_invariant = measure.check_invariance();
        Ok(measure)
    }

    /// Normalized arc length, `w ≡ 1`.
    pub fn lebesgue(grid_size: usize) -> Result<Self> {
        Self::new(vec![1.0; grid_size], Vec::new())
    }

    /// Samples `w` at the grid angles.
    pub fn from_weight_fn(grid_size: usize, w: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            (0..grid_size).map(|j| w(theta(j, grid_size))).collect(),
            Vec::new(),
        )
    }

    fn check_invariance(&self) -> bool {
        let g = self.grid_size;
        let scale = self.weight.iter().fold(1.0f64, |m, w| m.max(*w));
        let weight_ok =
            (1..g).all(|j| (self.weight[j] - self.weight[g - j]).abs() <= SYMMETRY_TOL * scale);
        let masses_ok = self.masses.iter().all(|&(t, m)| {
            if t.sin().abs() < 1e-14 {
                return true;
            }
            self.masses
                .iter()
                .any(|&(t2, m2)| (t2 + t).abs() <= SYMMETRY_TOL && (m2 - m).abs() <= SYMMETRY_TOL)
        });
        weight_ok && masses_ok
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn masses(&self) -> &[(f64, f64)] {
        &self.masses
    }

    pub fn conjugation_invariant(&self) -> bool {
        self.conjugation_invariant
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.masses.is_empty()
    }

    /// Trapezoidal rule on the a.c. part plus exact atom sums.
    pub fn integrate(&self, g: impl Fn(f64) -> Complex64) -> Complex64 {
        let n = self.grid_size;
        let ac: Complex64 = self
            .weight
            .iter()
            .enumerate()
            .map(|(j, &w)| g(theta(j, n)) * w)
            .sum::<Complex64>();
        let ac = if n == 0 { ac } else { ac / n as f64 };
        ac + self
            .masses
            .iter()
            .map(|&(t, m)| g(t) * m)
            .sum::<Complex64>()
    }

    pub fn integrate_real(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.integrate(|t| Complex64::new(g(t), 0.0)).re
    }

    pub fn total_mass(&self) -> f64 {
        let ac = if self.grid_size == 0 {
            0.0
        } else {
            self.weight.iter().sum::<f64>() / self.grid_size as f64
        };
        ac + self.masses.iter().map(|m| m.1).sum::<f64>()
    }

    /// `c_j = ∫ e^{-ijθ} dμ` for `j = 0..=n`. The a.c. part comes from one FFT
    /// of the weight, so `n` should stay well below `G/2`.
    pub fn moments(&self, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        if self.grid_size > 0 {
            let samples: Vec<Complex64> = self
                .weight
                .iter()
                .map(|&w| Complex64::new(w, 0.0))
                .collect();
            let series = harmonic::analyze(&samples).expect("measure grid is a power of two");
            for (j, c) in out.iter_mut().enumerate() {
                if j <= series.degree() {
                    *c = series.coeff(j as i64);
                }
            }
        }
        for &(t, m) in &self.masses {
            for (j, c) in out.iter_mut().enumerate() {
                *c += Complex64::from_polar(m, -(j as f64) * t);
            }
        }
        out
    }
}

/// `dν = v(x) dx + Σ m_k δ_{x_k}`; `v` sampled at the interior Chebyshev-type
/// nodes `x_j = 2 cos θ_j`, `j = 1..G/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct IntervalMeasure {
    grid_size: usize,
    density: Vec<f64>,
    masses: Vec<(f64, f64)>,
    /// Circle weight `w(0)`, `w(π)`.
    edges: [f64; 2],
    exact_edges: bool,
}

impl TryFrom<MeasureJson> for IntervalMeasure {
    type Error = Error;

    fn try_from(j: MeasureJson) -> Result<Self> {
        match Measure::try_from(j)? {
            Measure::Interval(i) => Ok(i),
            Measure::Circle(_) => Err(Error::InvalidMeasure("expected an interval measure".into())),
        }
    }
}

impl From<IntervalMeasure> for MeasureJson {
    fn from(i: IntervalMeasure) -> Self {
        Measure::Interval(i).into()
    }
}

impl IntervalMeasure {
    /// `density` must have `G/2 - 1` entries (or be empty with `grid_size = 0`).
    pub fn new(grid_size: usize, density: Vec<f64>, masses: Vec<(f64, f64)>) -> Result<Self> {
        Self::build(grid_size, density, masses, None)?.checked()
    }

    /// Like [`IntervalMeasure::new`], with the circle weights `w(0)`, `w(π)`
    /// given instead of extrapolated from the interior samples.
    pub fn with_edges(
        grid_size: usize,
        density: Vec<f64>,
        edges: [f64; 2],
        masses: Vec<(f64, f64)>,
    ) -> Result<Self> {
        Self::build(grid_size, density, masses, Some(edges))?.checked()
    }

    fn checked(self) -> Result<Self> {
        let total = self.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(self)
    }

    pub fn normalized(
        grid_size: usize,
        density: Vec<f64>,
        masses: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let raw = Self::build(grid_size, density, masses, None)?;
        let total = raw.total_mass();
        if !(total > 0.0) {
            return Err(Error::NotNormalized(total));
        }
        raw.scaled(1.0 / total, 1.0 / total).checked()
    }

    fn scaled(&self, density: f64, masses: f64) -> Self {
        Self {
            grid_size: self.grid_size,
            density: self.density.iter().map(|v| v * density).collect(),
            masses: self.masses.iter().map(|&(x, m)| (x, m * masses)).collect(),
            edges: self.edges.map(|w| w * density),
            exact_edges: self.exact_edges,
        }
    }

    fn build(
        grid_size: usize,
        density: Vec<f64>,
        masses: Vec<(f64, f64)>,
        edges: Option<[f64; 2]>,
    ) -> Result<Self> {
        check_measure_grid(grid_size)?;
        let expected = if grid_size == 0 { 0 } else { grid_size / 2 - 1 };
        if density.len() != expected {
            return Err(Error::GridMismatch(format!(
                "{} density samples for grid {grid_size} (expected {expected})",
                density.len()
            )));
        }
        if let Some(i) = density.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "density[{i}] = {}",
                density[i]
            )));
        }
        check_masses(&masses)?;
        if let Some(e) = edges {
            if !e.iter().all(|w| w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidMeasure(format!("edge weights {e:?}")));
            }
        }
        let mut measure = Self {
            grid_size,
            density,
            masses,
            edges: edges.unwrap_or([0.0; 2]),
            exact_edges: edges.is_some(),
        };
        if edges.is_none() && grid_size > 0 {
            let w = measure.interior_weight();
            let half = grid_size / 2;
            measure.edges = [
                even_extrapolate(w[1], w[2], w[3]).max(0.0),
                even_extrapolate(w[half - 1], w[half - 2], w[half - 3]).max(0.0),
            ];
        }
        Ok(measure)
    }

    /// Builds the density by sampling `v` at the interior nodes.
    pub fn from_density_fn(grid_size: usize, v: impl Fn(f64) -> f64) -> Result<Self> {
        check_measure_grid(grid_size)?;
        let density = (1..grid_size / 2).map(|j| v(node(j, grid_size))).collect();
        Self::new(grid_size, density, Vec::new())
    }

    pub fn point_masses(masses: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(0, Vec::new(), masses)
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn masses(&self) -> &[(f64, f64)] {
        &self.masses
    }

    /// Interior nodes `x_j`, in the same order as [`IntervalMeasure::density`]
    /// (decreasing from near 2 to near -2).
    pub fn nodes(&self) -> Vec<f64> {
        (1..self.grid_size / 2)
            .map(|j| node(j, self.grid_size))
            .collect()
    }

    /// `(1 - m)·ν + m·δ_x`.
    pub fn with_mass(&self, x: f64, m: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "mixing weight {m} not in (0, 1)"
            )));
        }
        check_masses(&[(x, m)])?;
        let mut mixed = self.scaled(1.0 - m, 1.0 - m);
        mixed.masses.push((x, m));
        mixed.checked()
    }

    /// The circle weight `w(θ_j) = 2π |sin θ_j| v(2 cos θ_j)` on the full grid;
    /// the two edge values are extrapolated from their even neighbourhoods.
    pub fn circle_weight(&self) -> Vec<f64> {
        let g = self.grid_size;
        if g == 0 {
            return Vec::new();
        }
        let half = g / 2;
        let mut w = self.interior_weight();
        [w[0], w[half]] = self.edges;
        for j in half + 1..g {
            w[j] = w[g - j];
        }
        w
    }

    /// `w` on `j = 0..=G/2` with the edge entries left at zero.
    fn interior_weight(&self) -> Vec<f64> {
        let g = self.grid_size;
        let mut w = vec![0.0; g];
        for j in 1..g / 2 {
            w[j] = 2.0 * PI * theta(j, g).sin() * self.density[j - 1];
        }
        w
    }

    /// Nodes and weights integrating against `ν`: the θ-trapezoid folded onto
    /// `[-2, 2]`, followed by the point masses.
    pub fn quadrature(&self) -> Vec<(f64, f64)> {
        let g = self.grid_size;
        let mut out = Vec::with_capacity(g / 2 + 1 + self.masses.len());
        if g > 0 {
            let w = self.circle_weight();
            let half = g / 2;
            let scale = 1.0 / g as f64;
            out.push((2.0, w[0] * scale));
            for j in 1..half {
                out.push((node(j, g), 2.0 * w[j] * scale));
            }
            out.push((-2.0, w[half] * scale));
        }
        out.extend(self.masses.iter().copied());
        out
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.quadrature().into_iter().map(|(x, w)| g(x) * w).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }
}

/// `x_j = 2 cos(2πj/G)`.
pub fn node(j: usize, grid_size: usize) -> f64 {
    2.0 * theta(j, grid_size).cos()
}

/// Pushforward of a conjugation-invariant circle measure under `θ ↦ 2 cos θ`.
pub fn szego_forward(mu: &CircleMeasure) -> Result<IntervalMeasure> {
    if !mu.conjugation_invariant {
        return Err(Error::NotConjugationInvariant);
    }
    let g = mu.grid_size;
    let density = (1..g / 2)
        .map(|j| mu.weight[j] / (2.0 * PI * theta(j, g).sin()))
        .collect();
    let mut masses = Vec::new();
    for &(t, m) in &mu.masses {
        if t.sin().abs() < 1e-14 {
            masses.push((if t.cos() > 0.0 { 2.0 } else { -2.0 }, m));
        } else if t > 0.0 {
            // the partner at -θ carries the same mass
            masses.push((2.0 * t.cos(), 2.0 * m));
        }
    }
    if g == 0 {
        return IntervalMeasure::new(0, density, masses);
    }
    IntervalMeasure::with_edges(g, density, [mu.weight[0], mu.weight[g / 2]], masses)
}

/// The conjugation-invariant circle measure whose Szegő image is `ν`.
pub fn szego_inverse(nu: &IntervalMeasure) -> Result<CircleMeasure> {
    let mut masses = Vec::new();
    for &(x, m) in &nu.masses {
        if x.abs() > 2.0 {
            return Err(Error::SupportOutsideInterval(x));
        }
        if x == 2.0 {
            masses.push((0.0, m));
        } else if x == -2.0 {
            masses.push((PI, m));
        } else {
            let t = (x / 2.0).acos();
            masses.push((t, m / 2.0));
            masses.push((-t, m / 2.0));
        }
    }
    CircleMeasure::new(nu.circle_weight(), masses)
}

/// `F(z) = ∫ (e^{iθ} + z)/(e^{iθ} - z) dμ`, evaluated through the moment
/// series `F(z) = c_0 + 2 Σ_{n≥1} c_n z^n` for the a.c. part.
#[derive(Debug, Clone)]
pub struct CaratheodoryFunction {
    moments: Vec<Complex64>,
    masses: Vec<(f64, f64)>,
}

/// Points closer than this to the circle are rejected.
pub const DISC_MARGIN: f64 = 1e-6;

impl CaratheodoryFunction {
    pub fn new(mu: &CircleMeasure) -> Self {
        let moments = if mu.grid_size == 0 {
            Vec::new()
        } else {
            let ac = CircleMeasure {
                grid_size: mu.grid_size,
                weight: mu.weight.clone(),
                masses: Vec::new(),
                conjugation_invariant: mu.conjugation_invariant,
            };
            ac.moments(mu.grid_size / 2 - 1)
        };
        Self {
            moments,
            masses: mu.masses.clone(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if !(z.norm() < 1.0 - DISC_MARGIN) {
            return Err(Error::OutsideDisc(z.norm()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.moments.iter().skip(1).rev() {
            acc = (acc + c) * z;
        }
        let ac = self.moments.first().copied().unwrap_or_default() + 2.0 * acc;
        let atoms: Complex64 = self
            .masses
            .iter()
            .map(|&(t, m)| {
                let e = Complex64::from_polar(1.0, t);
                m * (e + z) / (e - z)
            })
            .sum();
        Ok(ac + atoms)
    }
}

pub fn caratheodory(mu: &CircleMeasure, z: Complex64) -> Result<Complex64> {
    CaratheodoryFunction::new(mu).eval(z)
}

/// Outcome of the class-𝒱 analysis of an interval measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVReport {
    /// Exponent of `√(2 + x)` (edge `x = -2`).
    pub l: i8,
    /// Exponent of `√(2 - x)` (edge `x = 2`).
    pub r: i8,
    /// Fourier series of `log v₀(2 cos θ)`.
    pub v0: FourierSeries,
    pub log_v0_norm: f64,
    pub eigenvalues_ok: bool,
    pub slope_left: f64,
    pub slope_right: f64,
    pub log_v0_profile: DecayProfile,
}

impl ClassVReport {
    /// Consistent with membership in 𝒱: point masses only off `[-2, 2]` and a
    /// flat partial-norm profile for `log v₀`.
    pub fn in_class(&self) -> bool {
        self.eigenvalues_ok && self.log_v0_profile.flat
    }
}

/// Fraction of interior nodes near each edge used for the exponent fit.
pub const EDGE_WINDOW: f64 = 0.05;
/// Accepted distance of the fitted log-log slope from `±1/2`.
pub const SLOPE_TOL: f64 = 0.2;

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn exponent_from_slope(slope: f64, edge: f64) -> Result<i8> {
    if (slope - 0.5).abs() <= SLOPE_TOL {
        Ok(1)
    } else if (slope + 0.5).abs() <= SLOPE_TOL {
        Ok(-1)
    } else {
        Err(Error::ExponentUndetermined { edge, slope })
    }
}

/// Circle weights below this fraction of the largest one count as zero.
pub const EDGE_ZERO: f64 = 1e-8;

/// Exponent at `x = 2` (`side = 0`) or `x = -2` (`side = 1`). A slope far from
/// `±1/2` is a crossover the grid cannot resolve; with exact edge weights the
/// exponent is then read off from whether `w` vanishes there.
fn edge_exponent(nu: &IntervalMeasure, slope: f64, side: usize) -> Result<i8> {
    let edge = if side == 0 { 2.0 } else { -2.0 };
    match exponent_from_slope(slope, edge) {
        Err(e) if nu.exact_edges => {
            let w = nu.circle_weight();
            let scale = w.iter().fold(0.0f64, |m, v| m.max(*v));
            if !(scale > 0.0) {
                return Err(e);
            }
            Ok(if nu.edges[side] > EDGE_ZERO * scale {
                -1
            } else {
                1
            })
        }
        other => other,
    }
}

/// Detects `l, r` in `v = (√(2+x))^l (√(2-x))^r v₀`, extracts `log v₀` as a
/// Fourier series in `θ` and reports its norm and decay profile in `space`.
pub fn check_class_v(nu: &IntervalMeasure, space: SpaceSpec) -> Result<ClassVReport> {
    let g = nu.grid_size;
    if g == 0 {
        return Err(Error::InvalidMeasure(
            "no absolutely continuous part".into(),
        ));
    }
    if let Some(&(x, _)) = nu
        .masses
        .iter()
        .find(|(x, _)| (x.abs() - 2.0).abs() <= 1e-12)
    {
        return Err(Error::MassAtEdge(x));
    }
    let eigenvalues_ok = nu.masses.iter().all(|(x, _)| x.abs() > 2.0);
    let half = g / 2;
    let interior = half - 1;
    if let Some(j) = nu.density.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::DensityNotPositive(node(j + 1, g)));
    }
    // 2 - x_j = 4 sin²(θ_j/2), 2 + x_j = 4 cos²(θ_j/2), computed without cancellation
    let log_minus = |j: usize| (4.0 * (theta(j, g) / 2.0).sin().powi(2)).ln();
    let log_plus = |j: usize| (4.0 * (theta(j, g) / 2.0).cos().powi(2)).ln();
    let log_v = |j: usize| nu.density[j - 1].ln();

    let k = ((EDGE_WINDOW * interior as f64).ceil() as usize).max(4);
    let right: Vec<(f64, f64)> = (1..=k).map(|j| (log_minus(j), log_v(j))).collect();
    let left: Vec<(f64, f64)> = (half - k..half).map(|j| (log_plus(j), log_v(j))).collect();
    let slope_right = ls_slope(&right);
    let slope_left = ls_slope(&left);
    let r = edge_exponent(nu, slope_right, 0)?;
    let l = edge_exponent(nu, slope_left, 1)?;

    let mut logv0 = vec![0.0; g];
    for j in 1..half {
        logv0[j] = log_v(j) - 0.5 * l as f64 * log_plus(j) - 0.5 * r as f64 * log_minus(j);
    }
    logv0[0] = even_extrapolate(logv0[1], logv0[2], logv0[3]);
    logv0[half] = even_extrapolate(logv0[half - 1], logv0[half - 2], logv0[half - 3]);
    for j in half + 1..g {
        logv0[j] = logv0[g - j];
    }
    let v0 = harmonic::analyze_real(&logv0)?;
    let log_v0_norm = harmonic::algebra_norm(&v0, space);
    let log_v0_profile = harmonic::in_algebra(&v0, space, harmonic::diagnostic_window(g));
    Ok(ClassVReport {
        l,
        r,
        v0,
        log_v0_norm,
        eigenvalues_ok,
        slope_left,
        slope_right,
        log_v0_profile,
    })
}
