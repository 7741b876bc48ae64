//! Orthogonal polynomials on the unit circle: the Szegő recursion,
//! Bernstein–Szegő weights, extraction of Verblunsky coefficients from
//! moments, and the decay comparison between `α` and `log w`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geronimus::VerblunskySeq;
use crate::harmonic::{self, AnalyticOp, FourierSeries};
use crate::measures::CircleMeasure;
use crate::seqspace::{DecayProfile, SpaceSpec};

/// Coefficients (lowest degree first) of the monic `Φ_n`, its reversal `Φ_n*`,
/// and `‖Φ_n‖² = Π_{k<n} (1 - |α_k|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpucPolynomials {
    pub degree: usize,
    pub phi: Vec<Complex64>,
    pub phi_star: Vec<Complex64>,
    pub norm_sq: f64,
}

impl OpucPolynomials {
    /// Runs the recursion on `α_0, …, α_{n-1}`.
    pub fn new(alpha: &[Complex64]) -> Result<Self> {
        let mut phi = vec![Complex64::new(1.0, 0.0)];
        let mut norm_sq = 1.0;
        for (k, &a) in alpha.iter().enumerate() {
            if !(a.norm() < 1.0) {
                return Err(Error::DomainError {
                    index: k as i64,
                    value: a.norm(),
                });
            }
            let star = reversed(&phi);
            let mut next = vec![Complex64::new(0.0, 0.0); phi.len() + 1];
            for (j, p) in phi.iter().enumerate() {
                next[j + 1] += p;
            }
            for (j, s) in star.iter().enumerate() {
                next[j] -= a.conj() * s;
            }
            phi = next;
            norm_sq *= 1.0 - a.norm_sqr();
        }
        Ok(Self {
            degree: alpha.len(),
            phi_star: reversed(&phi),
            phi,
            norm_sq,
        })
    }

    /// Orthonormal `φ_n = Φ_n / ‖Φ_n‖`.
    pub fn orthonormal(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let s = self.norm_sq.sqrt();
        (
            self.phi.iter().map(|c| c / s).collect(),
            self.phi_star.iter().map(|c| c / s).collect(),
        )
    }
}

/// `Φ*(z) = z^n conj(Φ(1/conj z))` in coefficient form.
fn reversed(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().rev().map(|c| c.conj()).collect()
}

fn real_alpha(alpha: &VerblunskySeq, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::new(alpha.get(k as i64), 0.0))
        .collect()
}

/// Monic `(Φ_n(z), Φ_n*(z))` by the pointwise recursion.
pub fn szego_recursion_monic(
    alpha: &VerblunskySeq,
    z: Complex64,
    n: usize,
) -> Result<(Complex64, Complex64)> {
    let mut phi = Complex64::new(1.0, 0.0);
    let mut star = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let a = alpha.get(k as i64);
        if !(a.abs() < 1.0) {
            return Err(Error::DomainError {
                index: k as i64,
                value: a,
            });
        }
        let next = z * phi - a * star;
        star -= a * z * phi;
        phi = next;
    }
    Ok((phi, star))
}

/// Orthonormal `(φ_n(z), φ_n*(z))`.
pub fn szego_recursion(
    alpha: &VerblunskySeq,
    z: Complex64,
    n: usize,
) -> Result<(Complex64, Complex64)> {
    let (phi, star) = szego_recursion_monic(alpha, z, n)?;
    let norm: f64 = (0..n).map(|k| 1.0 - alpha.get(k as i64).powi(2)).product();
    let s = norm.sqrt();
    Ok((phi / s, star / s))
}

/// `w(θ) = Π_{k<n} (1 - α_k²) / |Φ_n*(e^{iθ})|²` with `n = α.len()`.
pub fn bernstein_szego(alpha: &VerblunskySeq, grid_size: usize) -> Result<CircleMeasure> {
    let n = alpha.len();
    if 2 * n > grid_size {
        return Err(Error::DepthExceeded {
            requested: n,
            limit: grid_size / 2,
        });
    }
    let polys = OpucPolynomials::new(&real_alpha(alpha, n))?;
    let star = FourierSeries::from_fn(n, grid_size, |m| {
        if m >= 0 {
            polys.phi_star[m as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })?;
    let values = harmonic::synthesize(&star, grid_size)?;
    let weight = values
        .iter()
        .map(|v| polys.norm_sq / v.norm_sqr())
        .collect();
    let mu = CircleMeasure::new(weight, Vec::new())?;
    let total = mu.total_mass();
    if (total - 1.0).abs() > BS_MASS_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(mu)
}

/// Normalization required of [`bernstein_szego`]; a grid that cannot resolve
/// the weight's peaks misses it and should be refined.
pub const BS_MASS_TOL: f64 = 1e-12;

/// Maximum extraction depth for a grid of size `G`.
pub fn depth_limit(mu: &CircleMeasure) -> usize {
    if mu.grid_size() == 0 {
        mu.masses().len()
    } else {
        mu.grid_size() / 8
    }
}

/// Tolerance on `Im α_k`.
pub const IMAG_TOL: f64 = 1e-10;
/// `|α_k|` at or above `1 - DEGENERACY_TOL` means the Toeplitz minors have
/// numerically lost positivity.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// `α_0, …, α_{n-1}` from the moments `c_j = ∫ e^{-ijθ} dμ` by orthogonalizing
/// against the Toeplitz inner product.
pub fn verblunsky_from_measure(mu: &CircleMeasure, n: usize) -> Result<VerblunskySeq> {
    let limit = depth_limit(mu);
    if n > limit {
        return Err(Error::DepthExceeded {
            requested: n,
            limit,
        });
    }
    let c = mu.moments(n);
    let mut phi = vec![Complex64::new(1.0, 0.0)];
    let mut norm = c[0].re;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // conj(α_k) = ⟨1, zΦ_k⟩ / ‖Φ_k‖²
        let s: Complex64 = phi
            .iter()
            .enumerate()
            .map(|(j, p)| p.conj() * c[j + 1])
            .sum();
        let a = s / norm;
        if a.im.abs() > IMAG_TOL {
            return Err(Error::ComplexVerblunsky {
                index: k,
                imag: a.im,
            });
        }
        if !(a.norm() < 1.0 - DEGENERACY_TOL) {
            return Err(Error::MomentDegenerate(k));
        }
        let star = reversed(&phi);
        let mut next = vec![Complex64::new(0.0, 0.0); phi.len() + 1];
        for (j, p) in phi.iter().enumerate() {
            next[j + 1] += p;
        }
        for (j, st) in star.iter().enumerate() {
            next[j] -= a.conj() * st;
        }
        phi = next;
        norm *= 1.0 - a.norm_sqr();
        out.push(a.re);
    }
    VerblunskySeq::new(out)
}

/// Decay profiles of `α` and of the Fourier coefficients of `log w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiBaxterReport {
    pub space: SpaceSpec,
    pub alpha_profile: DecayProfile,
    pub log_w_profile: DecayProfile,
    /// Both profiles flat, or both growing.
    pub consistent: bool,
    pub aliasing_ok: bool,
}

/// Compares the decay of `α` with that of `(log w)^` in `space`, over dyadic
/// truncations up to [`harmonic::diagnostic_window`].
pub fn verify_gi_baxter(
    alpha: &VerblunskySeq,
    mu: &CircleMeasure,
    space: SpaceSpec,
) -> Result<GiBaxterReport> {
    verify_gi_baxter_window(
        alpha,
        mu,
        space,
        harmonic::diagnostic_window(mu.grid_size()),
    )
}

/// [`verify_gi_baxter`] with an explicit largest truncation.
pub fn verify_gi_baxter_window(
    alpha: &VerblunskySeq,
    mu: &CircleMeasure,
    space: SpaceSpec,
    window: usize,
) -> Result<GiBaxterReport> {
    space.validate()?;
    if !mu.is_absolutely_continuous() || mu.grid_size() == 0 {
        return Err(Error::NotAbsolutelyContinuous);
    }
    let w = harmonic::analyze_real(mu.weight())?;
    let log_w = harmonic::analytic_calculus(&w, AnalyticOp::Log)?;
    let alpha_profile = DecayProfile::of_seq(&alpha.to_seq_nonneg(), space, window);
    let log_w_profile = harmonic::in_algebra(&log_w.series, space, window);
    Ok(GiBaxterReport {
        space,
        consistent: alpha_profile.flat == log_w_profile.flat,
        alpha_profile,
        log_w_profile,
        aliasing_ok: log_w.aliasing_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn alpha(v: &[f64]) -> VerblunskySeq {
        VerblunskySeq::new(v.to_vec()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn recursion_at_zero_alpha() {
        let z = c(0.3, 0.4);
        let (phi, star) = szego_recursion_monic(&VerblunskySeq::zero(), z, 5).unwrap();
        assert!((phi - z.powi(5)).norm() < 1e-15);
        assert_eq!(star, c(1.0, 0.0));
    }

    #[test]
    fn one_step() {
        let z = c(-0.2, 0.7);
        let (phi, star) = szego_recursion_monic(&alpha(&[0.25]), z, 1).unwrap();
        assert!((phi - (z - 0.25)).norm() < 1e-15);
        assert!((star - (1.0 - 0.25 * z)).norm() < 1e-15);
    }

    #[test]
    fn coefficient_form_matches_pointwise() {
        let a = alpha(&[0.3, -0.5, 0.1, 0.7]);
        let p = OpucPolynomials::new(&real_alpha(&a, 4)).unwrap();
        let z = c(0.5, -0.6);
        let eval = |q: &[Complex64]| q.iter().rev().fold(c(0.0, 0.0), |acc, x| acc * z + x);
        let (phi, star) = szego_recursion_monic(&a, z, 4).unwrap();
        assert!((eval(&p.phi) - phi).norm() < 1e-14);
        assert!((eval(&p.phi_star) - star).norm() < 1e-14);
    }

    #[test]
    fn bernstein_szego_examples() {
        let leb = bernstein_szego(&VerblunskySeq::zero(), 64).unwrap();
        assert!(leb.weight().iter().all(|w| *w == 1.0));

        let t = 0.5;
        let mu = bernstein_szego(&alpha(&[t]), 256).unwrap();
        for (j, w) in mu.weight().iter().enumerate() {
            let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 256.0);
            let expected = (1.0 - t * t) / (1.0 - t * e).norm_sqr();
            assert!((w - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn extraction_examples() {
        let leb = CircleMeasure::lebesgue(256).unwrap();
        let a = verblunsky_from_measure(&leb, 32).unwrap();
        assert!(a.values().iter().all(|x| x.abs() < 1e-15));

        let mu = bernstein_szego(&alpha(&[0.5]), 256).unwrap();
        let a = verblunsky_from_measure(&mu, 8).unwrap();
        assert!((a.get(0) - 0.5).abs() < 1e-10);
        for k in 1..8 {
            assert!(a.get(k).abs() < 1e-10);
        }
    }

    #[test]
    fn semicircle_preimage_gives_free_pattern() {
        let mu = CircleMeasure::from_weight_fn(4096, |t| 2.0 * t.sin().powi(2)).unwrap();
        let a = verblunsky_from_measure(&mu, 64).unwrap();
        for k in 0..32 {
            assert!(a.get(2 * k).abs() < 1e-10);
            assert!((a.get(2 * k + 1) + 1.0 / (k as f64 + 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn extraction_errors() {
        let leb = CircleMeasure::lebesgue(64).unwrap();
        assert!(matches!(
            verblunsky_from_measure(&leb, 9),
            Err(Error::DepthExceeded { limit: 8, .. })
        ));
        let skew = CircleMeasure::new(Vec::new(), vec![(0.4, 0.5), (1.3, 0.5)]).unwrap();
        assert!(matches!(
            verblunsky_from_measure(&skew, 1),
            Err(Error::ComplexVerblunsky { .. })
        ));
        let two = CircleMeasure::new(Vec::new(), vec![(0.0, 0.5), (PI, 0.5)]).unwrap();
        assert!(matches!(
            verblunsky_from_measure(&two, 2),
            Err(Error::MomentDegenerate(1))
        ));
    }

    #[test]
    fn gi_baxter_examples() {
        let leb = CircleMeasure::lebesgue(4096).unwrap();
        let r = verify_gi_baxter(&VerblunskySeq::zero(), &leb, SpaceSpec::L11).unwrap();
        assert!(r.alpha_profile.flat && r.log_w_profile.flat && r.consistent);
        assert!(r.log_w_profile.last() < 1e-12);

        let a = alpha(&[0.5]);
        let mu = bernstein_szego(&a, 4096).unwrap();
        let r = verify_gi_baxter(&a, &mu, SpaceSpec::L11).unwrap();
        assert!(r.alpha_profile.flat && r.log_w_profile.flat);
        // log w = log(1 - t²) - 2 Re log(1 - t e^{iθ}): coefficients t^k / k
        assert!((r.log_w_profile.last() - 2.0 * (0.5 / (1.0 - 0.5))).abs() < 1e-10);
    }

    #[test]
    fn gi_baxter_slow_decay_grows() {
        let a = alpha(&(0..256).map(|k| 0.5 / (k as f64 + 1.0)).collect::<Vec<_>>());
        // the weight varies on a scale 1/n near θ = 0; 4096 points under-resolve it
        assert!(matches!(
            bernstein_szego(&a, 4096),
            Err(Error::NotNormalized(_))
        ));
        let mu = bernstein_szego(&a, 1 << 16).unwrap();
        let r = verify_gi_baxter_window(&a, &mu, SpaceSpec::L11, 256).unwrap();
        assert!(!r.alpha_profile.flat);
        assert!(!r.log_w_profile.flat);
        assert!(r.consistent);
    }

    #[test]
    fn gi_baxter_needs_ac_measure() {
        let mu = CircleMeasure::new(vec![0.5; 64], vec![(0.0, 0.5)]).unwrap();
        assert_eq!(
            verify_gi_baxter(&VerblunskySeq::zero(), &mu, SpaceSpec::L11),
            Err(Error::NotAbsolutelyContinuous)
        );
    }
}
