//! Jacobi operators with free tails: spectral measures, the m-function
//! `m(E) = ⟨δ₁, (J - E)⁻¹ δ₁⟩` and its disc form `M(z) = -m(z + 1/z)`,
//! resonance classification at `E = ±2`, top-row surgery, and recovery of
//! Jacobi parameters from a measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geronimus::JacobiParams;
use crate::harmonic::theta;
use crate::measures::IntervalMeasure;

/// Denominators of the continued fraction below this size are rejected.
pub const DENOM_FLOOR: f64 = 1e-12;
/// Truncation size used to look for eigenvalues off `[-2, 2]`.
pub const EIGEN_TRUNCATION: usize = 512;
/// Eigenvalues of the truncation beyond `2 + EIGEN_MARGIN` count as real.
pub const EIGEN_MARGIN: f64 = 1e-6;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `J^{(n)}`: `J` with its first `n` rows and columns removed.
pub fn strip(j: &JacobiParams, n: usize) -> JacobiParams {
    j.strip(n)
}

/// Eigenvalues and squared first eigenvector components of the symmetric
/// tridiagonal matrix with diagonal `d` and off-diagonal `e` (`e.len() + 1 =
/// d.len()`), by implicit QL iteration rotating only the first row.
pub fn tridiagonal_eigen(d: &[f64], e: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = d.len();
    assert_eq!(e.len() + 1, n.max(1), "off-diagonal length");
    let mut d = d.to_vec();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenFailure);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut cc, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = cc * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                cc = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * cc * b;
                p = s * r;
                d[i + 1] = g + p;
                g = cc * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + cc * zf;
                z[i] = cc * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut out: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|x| x * x)).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

fn truncation(j: &JacobiParams, n: usize) -> (Vec<f64>, Vec<f64>) {
    let d = (1..=n).map(|k| j.b(k)).collect();
    let e = (1..n).map(|k| j.a(k)).collect();
    (d, e)
}

/// Spectral measure of the `n × n` truncation: point masses at its
/// eigenvalues, weighted by squared first components (renormalized to sum 1).
pub fn spectral_measure(j: &JacobiParams, n: usize) -> Result<IntervalMeasure> {
    if n == 0 {
        return Err(Error::InvalidOptions("truncation size 0".into()));
    }
    let (d, e) = truncation(j, n);
    let pairs = tridiagonal_eigen(&d, &e)?;
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let masses = pairs
        .into_iter()
        .filter(|p| p.1 > 0.0)
        .map(|(x, w)| (x, w / total))
        .collect();
    IntervalMeasure::point_masses(masses)
}

/// Eigenvalues of `J` off `[-2, 2]` (with their spectral weights), detected on
/// a truncation of size at least [`EIGEN_TRUNCATION`].
pub fn eigenvalues_off_interval(j: &JacobiParams) -> Result<Vec<(f64, f64)>> {
    let n = EIGEN_TRUNCATION.max(2 * j.len());
    let (d, e) = truncation(j, n);
    Ok(tridiagonal_eigen(&d, &e)?
        .into_iter()
        .filter(|p| p.0.abs() > 2.0 + EIGEN_MARGIN)
        .collect())
}

fn require_no_eigenvalues(j: &JacobiParams) -> Result<()> {
    let eig = eigenvalues_off_interval(j)?;
    if eig.is_empty() {
        Ok(())
    } else {
        Err(Error::EigenvaluesPresent(
            eig.into_iter().map(|p| p.0).collect(),
        ))
    }
}

/// `m` of the free operator: `(-E + √(E-2) √(E+2)) / 2`, the branch that
/// vanishes at infinity.
pub fn m_free(e: Complex64) -> Complex64 {
    (-e + (e - 2.0).sqrt() * (e + 2.0).sqrt()) / 2.0
}

fn check_denom(den: Complex64, at: impl std::fmt::Display) -> Result<()> {
    if den.norm() < DENOM_FLOOR {
        Err(Error::NearSpectrum(format!(
            "vanishing denominator at {at}"
        )))
    } else {
        Ok(())
    }
}

/// `m(E) = 1/(b_1 - E - a_1² / (b_2 - E - …))` over `depth` levels, closed
/// with [`m_free`].
pub fn m_contfrac(j: &JacobiParams, e: Complex64, depth: usize) -> Result<Complex64> {
    if depth == 0 {
        return Err(Error::InvalidOptions("continued fraction depth 0".into()));
    }
    if e.im == 0.0 && e.re.abs() <= 2.0 + EIGEN_MARGIN {
        return Err(Error::NearSpectrum(format!("E = {e} on [-2, 2]")));
    }
    let mut m = m_free(e);
    for k in (1..=depth).rev() {
        let den = j.b(k) - e - j.a(k).powi(2) * m;
        check_denom(den, e)?;
        m = den.inv();
    }
    Ok(m)
}

/// `M(z) = -m(z + 1/z)` by the backward recursion
/// `M_k = 1/(z + 1/z - b_k - a_k² M_{k+1})` with free tail `M = z`. Also used
/// on `|z| = 1` for boundary values.
fn m_recursion(j: &JacobiParams, z: Complex64) -> Result<Complex64> {
    let e = z + z.inv();
    let mut m = z;
    for k in (1..=j.len()).rev() {
        let den = e - j.b(k) - j.a(k).powi(2) * m;
        check_denom(den, z)?;
        m = den.inv();
    }
    Ok(m)
}

/// `M(z)` for `0 < |z| < 1`.
pub fn big_m(j: &JacobiParams, z: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0) {
        return Err(Error::OutsideDisc(z.norm()));
    }
    if z.norm() == 0.0 {
        return Err(Error::NearSpectrum("z = 0".into()));
    }
    m_recursion(j, z)
}

/// Boundary value `M(e^{iθ})`.
pub fn big_m_boundary(j: &JacobiParams, theta: f64) -> Result<Complex64> {
    m_recursion(j, Complex64::from_polar(1.0, theta))
}

/// `|M(z) - 1/(z + 1/z - b_1 - a_1² M^{(1)}(z))|`.
pub fn stripping_relation(j: &JacobiParams, z: Complex64) -> Result<f64> {
    let lhs = big_m(j, z)?;
    let inner = big_m(&j.strip(1), z)?;
    let rhs = (z + z.inv() - j.b(1) - j.a(1).powi(2) * inner).inv();
    Ok((lhs - rhs).norm())
}

/// Spectral measure on the interval grid: density `-(1/π) Im M(e^{-iθ})` at
/// the interior nodes, plus the eigenvalues off `[-2, 2]`.
pub fn spectral_measure_exact(j: &JacobiParams, grid_size: usize) -> Result<IntervalMeasure> {
    let density = (1..grid_size / 2)
        .map(|k| {
            big_m_boundary(j, -theta(k, grid_size)).map(|m| (-m.im / std::f64::consts::PI).max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let masses = eigenvalues_off_interval(j)?;
    match (edge_weight(j, 1.0), edge_weight(j, -1.0)) {
        (Some(w0), Some(wpi)) => IntervalMeasure::with_edges(grid_size, density, [w0, wpi], masses),
        _ => IntervalMeasure::new(grid_size, density, masses),
    }
}

/// Circle weight at `z = s = ±1`: zero where `M` has a finite limit, else the
/// radial limit of `Re[(1/z - z) M(z)]`, which stays finite at a resonance.
/// `None` if either limit does not settle.
fn edge_weight(j: &JacobiParams, s: f64) -> Option<f64> {
    let m = radial_samples(|r| Ok(big_m(j, c(s * r))?.re)).ok()?;
    match classify(&m) {
        Trend::Convergent(_) => return Some(0.0),
        Trend::Unclear => return None,
        Trend::Divergent => {}
    }
    let samples = radial_samples(|r| {
        let z = c(s * r);
        Ok(((z.inv() - z) * big_m(j, z)?).re)
    })
    .ok()?;
    let (prev, last) = richardson(&samples);
    ((last - prev).abs() < CAUCHY_TOL * last.abs().max(1.0)).then_some(last.max(0.0))
}

/// Radial sample points `r_k = 1 - 2^{-k}`.
pub const RADIAL_STEPS: std::ops::RangeInclusive<i32> = 4..=14;
/// Smallest residue `lim (1 - r) |M(±r)|` accepted as a pole.
pub const RESIDUE_FLOOR: f64 = 1e-3;
/// Relative Cauchy tolerance of the extrapolated residue; only its existence
/// is decided, not its value.
pub const RESIDUE_TOL: f64 = 1e-3;
/// Minimum per-step growth of `|M|` over the last samples.
pub const DIVERGENCE_RATIO: f64 = 1.5;
/// Relative Cauchy tolerance of the extrapolated limits.
pub const CAUCHY_TOL: f64 = 1e-6;
const GROWTH_STEPS: usize = 5;

fn radial_samples(f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    RADIAL_STEPS.map(|k| f(1.0 - 2f64.powi(-k))).collect()
}

/// Two Richardson levels for samples at step sizes `h, h/2, h/4, …`;
/// returns the last two extrapolants.
fn richardson(s: &[f64]) -> (f64, f64) {
    let r1: Vec<f64> = s.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let r2: Vec<f64> = r1.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    (r2[r2.len() - 2], r2[r2.len() - 1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Trend {
    Divergent,
    Convergent(f64),
    Unclear,
}

fn classify(samples: &[f64]) -> Trend {
    let n = samples.len();
    let growing = samples[n - GROWTH_STEPS - 1..]
        .windows(2)
        .all(|w| w[1].abs() >= DIVERGENCE_RATIO * w[0].abs());
    if growing {
        // a pole: (1 - r) M(r) settles on a nonzero residue
        let residue: Vec<f64> = RADIAL_STEPS
            .zip(samples)
            .map(|(k, m)| 2f64.powi(-k) * m)
            .collect();
        let (prev, last) = richardson(&residue);
        if last.abs() >= RESIDUE_FLOOR && (last - prev).abs() < RESIDUE_TOL * last.abs() {
            return Trend::Divergent;
        }
    }
    let (prev, last) = richardson(samples);
    if (last - prev).abs() < CAUCHY_TOL * last.abs().max(1.0) {
        Trend::Convergent(last)
    } else {
        Trend::Unclear
    }
}

/// Behaviour of `M` at `z = ±1`: `k = -1` for a pole (resonance), `k = 1` with
/// the finite limit `c` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceData {
    pub c_plus: Option<f64>,
    pub c_minus: Option<f64>,
    pub k_plus: i8,
    pub k_minus: i8,
}

impl ResonanceData {
    pub fn doubly_resonant(&self) -> bool {
        self.k_plus == -1 && self.k_minus == -1
    }
}

/// Classifies both edges from `M(±(1 - 2^{-k}))`, `k = 4..14`.
pub fn resonance_data(j: &JacobiParams) -> Result<ResonanceData> {
    require_no_eigenvalues(j)?;
    let side = |s: f64| -> Result<(i8, Option<f64>)> {
        let samples = radial_samples(|r| Ok(big_m(j, c(s * r))?.re))?;
        match classify(&samples) {
            Trend::Divergent => Ok((-1, None)),
            Trend::Convergent(v) => Ok((1, Some(v))),
            Trend::Unclear => Err(Error::Inconclusive { edge: 2.0 * s }),
        }
    };
    let (k_plus, c_plus) = side(1.0)?;
    let (k_minus, c_minus) = side(-1.0)?;
    Ok(ResonanceData {
        c_plus,
        c_minus,
        k_plus,
        k_minus,
    })
}

/// Which edges were nonresonant before surgery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgeryCase {
    /// `(k₋, k₊) = (-1, -1)`: nothing to do.
    DoublyResonant,
    /// `(1, -1)`.
    NonresonantMinus,
    /// `(-1, 1)`.
    NonresonantPlus,
    /// `(1, 1)`.
    NonresonantBoth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurgeryResult {
    pub a1_new: f64,
    pub b1_new: f64,
    pub case: SurgeryCase,
    /// `ã₁² - a₁²`.
    pub delta_a: f64,
    /// `ã₁² b₁ - a₁² b̃₁`.
    pub delta_ab: f64,
}

/// New top row `(ã₁, b̃₁)` making `M̃` diverge at both `z = ±1` while keeping
/// `J̃^{(1)} = J^{(1)}`.
pub fn make_doubly_resonant(a1: f64, b1: f64, rd: &ResonanceData) -> Result<SurgeryResult> {
    if !(a1 > 0.0) {
        return Err(Error::NonpositiveA {
            index: 1,
            value: a1,
        });
    }
    let finite = |k: i8, c: Option<f64>, name: &str| -> Result<Option<f64>> {
        match (k, c) {
            (-1, None) => Ok(None),
            (1, Some(c)) if c.is_finite() => Ok(Some(c)),
            _ => Err(Error::InvalidC(format!(
                "inconsistent data for {name}: k = {k}, c = {c:?}"
            ))),
        }
    };
    let cp = finite(rd.k_plus, rd.c_plus, "c+")?;
    let cm = finite(rd.k_minus, rd.c_minus, "c-")?;
    if let Some(cp) = cp {
        if !(cp > 0.25) {
            return Err(Error::InvalidC(format!("c+ = {cp} <= 1/4")));
        }
    }
    if let Some(cm) = cm {
        if !(cm < -0.25) {
            return Err(Error::InvalidC(format!("c- = {cm} >= -1/4")));
        }
    }
    let a2 = a1 * a1;
    let (case, a2_new, b1_new) = match (cm, cp) {
        (None, None) => (SurgeryCase::DoublyResonant, a2, b1),
        (Some(cm), None) => (
            SurgeryCase::NonresonantMinus,
            a2 * 4.0 * cm / (4.0 * cm + 1.0),
            2.0 * (2.0 * b1 * cm + 1.0) / (4.0 * cm + 1.0),
        ),
        (None, Some(cp)) => (
            SurgeryCase::NonresonantPlus,
            a2 * 4.0 * cp / (4.0 * cp - 1.0),
            2.0 * (2.0 * b1 * cp + 1.0) / (4.0 * cp - 1.0),
        ),
        (Some(cm), Some(cp)) => {
            let den = 4.0 * cm * cp - cm + cp;
            (
                SurgeryCase::NonresonantBoth,
                a2 * 4.0 * cm * cp / den,
                2.0 * (2.0 * b1 * cm * cp + cm + cp) / den,
            )
        }
    };
    if !(a2_new > 0.0 && a2_new.is_finite()) {
        return Err(Error::InvalidC(format!("new a1^2 = {a2_new}")));
    }
    Ok(SurgeryResult {
        a1_new: a2_new.sqrt(),
        b1_new,
        case,
        delta_a: a2_new - a2,
        delta_ab: a2_new * b1 - a2 * b1_new,
    })
}

/// Classifies `J`, computes the surgery and returns the modified operator.
pub fn surgery(j: &JacobiParams) -> Result<(JacobiParams, SurgeryResult)> {
    let rd = resonance_data(j)?;
    let sr = make_doubly_resonant(j.a(1), j.b(1), &rd)?;
    Ok((j.with_top_row(sr.a1_new, sr.b1_new)?, sr))
}

/// Checks on `f(E) = ã₁² + m(E)(δa E - δab)`, the function whose zeros off
/// `[-2, 2]` would be eigenvalues of `J̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryReport {
    /// `f(±2)` as a radial limit, on the edges that were nonresonant.
    pub f_plus: Option<f64>,
    pub f_minus: Option<f64>,
    /// `δa E - δab` at `E = ±2`, on the edges that were resonant.
    pub linear_plus: Option<f64>,
    pub linear_minus: Option<f64>,
    /// Smallest `|f|` on the grid `±(2 + 8 (j/200)²)`, `j = 1..=200`.
    pub grid_min_abs: f64,
    /// `f` keeps one sign on each side of the grid.
    pub grid_sign_constant: bool,
    pub passed: bool,
}

/// Tolerance on the edge conditions.
pub const EDGE_TOL: f64 = 1e-8;
const GRID_POINTS: usize = 200;

/// Verifies that the surgery leaves no eigenvalues off `[-2, 2]`.
pub fn verify_surgery_spectrum(j: &JacobiParams, sr: &SurgeryResult) -> Result<SurgeryReport> {
    require_no_eigenvalues(j)?;
    let a2 = sr.a1_new * sr.a1_new;
    let linear = |e: f64| sr.delta_a * e - sr.delta_ab;
    let (minus_nonres, plus_nonres) = match sr.case {
        SurgeryCase::DoublyResonant => (false, false),
        SurgeryCase::NonresonantMinus => (true, false),
        SurgeryCase::NonresonantPlus => (false, true),
        SurgeryCase::NonresonantBoth => (true, true),
    };
    let radial_f = |s: f64| -> Result<f64> {
        let samples = radial_samples(|r| {
            let m = -big_m(j, c(s * r))?.re;
            Ok(a2 + m * linear(s * (r + 1.0 / r)))
        })?;
        Ok(richardson(&samples).1)
    };
    let f_plus = if plus_nonres {
        Some(radial_f(1.0)?)
    } else {
        None
    };
    let f_minus = if minus_nonres {
        Some(radial_f(-1.0)?)
    } else {
        None
    };
    let linear_plus = (!plus_nonres).then(|| linear(2.0));
    let linear_minus = (!minus_nonres).then(|| linear(-2.0));

    let mut grid_min_abs = f64::INFINITY;
    let mut grid_sign_constant = true;
    for s in [1.0, -1.0] {
        let mut sign = 0.0;
        for k in 1..=GRID_POINTS {
            let t = k as f64 / GRID_POINTS as f64;
            let e = s * (2.0 + 8.0 * t * t);
            let m = m_contfrac(j, c(e), j.len().max(1))?.re;
            let f = a2 + m * linear(e);
            grid_min_abs = grid_min_abs.min(f.abs());
            if sign == 0.0 {
                sign = f.signum();
            } else if f.signum() != sign {
                grid_sign_constant = false;
            }
        }
    }
    let edge_ok = [f_plus, f_minus, linear_plus, linear_minus]
        .iter()
        .flatten()
        .all(|v| v.abs() <= EDGE_TOL);
    Ok(SurgeryReport {
        f_plus,
        f_minus,
        linear_plus,
        linear_minus,
        passed: edge_ok && grid_sign_constant && grid_min_abs > 0.0,
        grid_min_abs,
        grid_sign_constant,
    })
}

/// Largest recoverable depth for a measure.
pub fn depth_limit(nu: &IntervalMeasure) -> usize {
    if nu.grid_size() == 0 {
        nu.masses().len()
    } else {
        nu.grid_size() / 8
    }
}

/// Relative size of a Lanczos residual below which the measure is treated
/// as supported on too few points.
const LANCZOS_FLOOR: f64 = 1e-12;

/// Recurrence coefficients `a_1..a_n`, `b_1..b_n` of the orthonormal
/// polynomials of `ν`, by Lanczos on the quadrature nodes with full
/// reorthogonalization.
pub fn jacobi_from_measure(nu: &IntervalMeasure, n: usize) -> Result<JacobiParams> {
    let limit = depth_limit(nu);
    if n > limit {
        return Err(Error::DepthExceeded {
            requested: n,
            limit,
        });
    }
    let quad = nu.quadrature();
    let x: Vec<f64> = quad.iter().map(|q| q.0).collect();
    let total: f64 = quad.iter().map(|q| q.1).sum();
    let mut q: Vec<f64> = quad.iter().map(|p| (p.1 / total).sqrt()).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut prev = vec![0.0; q.len()];
    let mut beta = 0.0;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, r)| p * r).sum::<f64>();
    for k in 0..n {
        let mut v: Vec<f64> = x
            .iter()
            .zip(&q)
            .zip(&prev)
            .map(|((xi, qi), pi)| xi * qi - beta * pi)
            .collect();
        let alpha = dot(&q, &v);
        for (vi, qi) in v.iter_mut().zip(&q) {
            *vi -= alpha * qi;
        }
        basis.push(q.clone());
        for _ in 0..2 {
            for u in &basis {
                let h = dot(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= h * ui;
                }
            }
        }
        beta = dot(&v, &v).sqrt();
        if !(beta > LANCZOS_FLOOR) {
            return Err(Error::MomentDegenerate(k));
        }
        b.push(alpha);
        a.push(beta);
        prev = std::mem::replace(&mut q, v.into_iter().map(|vi| vi / beta).collect());
    }
    JacobiParams::new(a, b)
}
