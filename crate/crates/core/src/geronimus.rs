//! Geronimus relations between real Verblunsky coefficients and Jacobi
//! parameters, the quadratic tail maps `K`, `L`, and the fixed-point solver
//! that recovers `α` from the tail sums `(λ, κ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqspace::{self, norm, DecaySeq, SpaceSpec};

/// Real Verblunsky coefficients `α_0, α_1, …` with the boundary values
/// `α_{-1} = -1` and `α_{-2} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VerblunskyJson", into = "VerblunskyJson")]
pub struct VerblunskySeq {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VerblunskyJson {
    alpha: Vec<f64>,
    #[serde(default = "minus_one")]
    alpha_minus1: f64,
}

fn minus_one() -> f64 {
    -1.0
}

impl TryFrom<VerblunskyJson> for VerblunskySeq {
    type Error = Error;

    fn try_from(j: VerblunskyJson) -> Result<Self> {
        if j.alpha_minus1 != -1.0 {
            return Err(Error::DomainError {
                index: -1,
                value: j.alpha_minus1,
            });
        }
        VerblunskySeq::new(j.alpha)
    }
}

impl From<VerblunskySeq> for VerblunskyJson {
    fn from(a: VerblunskySeq) -> Self {
        VerblunskyJson {
            alpha: a.values,
            alpha_minus1: -1.0,
        }
    }
}

impl VerblunskySeq {
    /// `values[n] = α_n` for `n ≥ 0`; every entry must lie in `(-1, 1)`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_alpha(&values)?;
        Ok(Self { values })
    }

    pub fn zero() -> Self {
        Self { values: Vec::new() }
    }

    /// `α_n` for any integer `n`, including the boundary convention.
    pub fn get(&self, n: i64) -> f64 {
        alpha_at(&self.values, n)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The coefficients as a sequence starting at index `-1`.
    pub fn to_seq(&self) -> DecaySeq {
        let mut values = Vec::with_capacity(self.values.len() + 1);
        values.push(-1.0);
        values.extend_from_slice(&self.values);
        DecaySeq { offset: -1, values }
    }

    /// `α_n` for `n ≥ 0` only, starting at index 0.
    pub fn to_seq_nonneg(&self) -> DecaySeq {
        DecaySeq {
            offset: 0,
            values: self.values.clone(),
        }
    }
}

fn check_alpha(values: &[f64]) -> Result<()> {
    match values.iter().position(|a| !(a.abs() < 1.0)) {
        Some(i) => Err(Error::DomainError {
            index: i as i64,
            value: values[i],
        }),
        None => Ok(()),
    }
}

#[inline]
fn alpha_at(values: &[f64], n: i64) -> f64 {
    match n {
        -1 => -1.0,
        n if n < 0 => 0.0,
        n => values.get(n as usize).copied().unwrap_or(0.0),
    }
}

/// Jacobi parameters `a_1, a_2, …` and `b_1, b_2, …` (stored 0-based), with
/// `a_n = 1`, `b_n = 0` past the stored range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JacobiJson", into = "JacobiJson")]
pub struct JacobiParams {
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JacobiJson {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<JacobiJson> for JacobiParams {
    type Error = Error;

    fn try_from(j: JacobiJson) -> Result<Self> {
        JacobiParams::new(j.a, j.b)
    }
}

impl From<JacobiParams> for JacobiJson {
    fn from(j: JacobiParams) -> Self {
        JacobiJson { a: j.a, b: j.b }
    }
}

impl JacobiParams {
    /// Pads the shorter of `a`, `b` with the free values.
    pub fn new(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Self> {
        if let Some(i) = a.iter().chain(&b).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i as i64 + 1));
        }
        if let Some(i) = a.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::NonpositiveA {
                index: i + 1,
                value: a[i],
            });
        }
        let n = a.len().max(b.len());
        a.resize(n, 1.0);
        b.resize(n, 0.0);
        Ok(Self { a, b })
    }

    /// The free Jacobi matrix `a ≡ 1`, `b ≡ 0`.
    pub fn free() -> Self {
        Self {
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Number of stored rows.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `a_n`, 1-based.
    pub fn a(&self, n: usize) -> f64 {
        assert!(n >= 1, "Jacobi parameters are 1-based");
        self.a.get(n - 1).copied().unwrap_or(1.0)
    }

    /// `b_n`, 1-based.
    pub fn b(&self, n: usize) -> f64 {
        assert!(n >= 1, "Jacobi parameters are 1-based");
        self.b.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    /// `J^{(k)}`: the operator with its first `k` rows and columns removed.
    pub fn strip(&self, k: usize) -> Self {
        let k = k.min(self.a.len());
        Self {
            a: self.a[k..].to_vec(),
            b: self.b[k..].to_vec(),
        }
    }

    /// Replaces `a_1`, `b_1`.
    pub fn with_top_row(&self, a1: f64, b1: f64) -> Result<Self> {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        if a.is_empty() {
            a.push(1.0);
            b.push(0.0);
        }
        a[0] = a1;
        b[0] = b1;
        Self::new(a, b)
    }

    /// Drops trailing free rows.
    pub fn trimmed(mut self) -> Self {
        while self.a.last() == Some(&1.0) && self.b.last() == Some(&0.0) {
            self.a.pop();
            self.b.pop();
        }
        self
    }

    /// `(λ_n, κ_n)` for `n = 0..len`.
    pub fn tail_sums(&self) -> (DecaySeq, DecaySeq) {
        seqspace::tail_sums(&self.a, &self.b).expect("validated parameters")
    }

    /// Inverts [`JacobiParams::tail_sums`]: `b_{n+1} = λ_{n+1} - λ_n`,
    /// `a_{n+1}² = 1 + κ_{n+1} - κ_n`. Both sequences are read from index 0.
    pub fn from_tail_sums(lambda: &DecaySeq, kappa: &DecaySeq) -> Result<Self> {
        let n = lambda.end().max(kappa.end()).max(0) as usize;
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for k in 0..n as i64 {
            b.push(lambda.get(k + 1) - lambda.get(k));
            let a2 = 1.0 + kappa.get(k + 1) - kappa.get(k);
            if !(a2 > 0.0) {
                return Err(Error::NonpositiveA {
                    index: k as usize + 1,
                    value: a2,
                });
            }
            a.push(a2.sqrt());
        }
        Self::new(a, b)
    }
}

/// Number of Jacobi rows influenced by `len` stored Verblunsky coefficients.
fn rows_for(len: usize) -> usize {
    (len + 1) / 2 + 1
}

/// `a_{n+1}² = (1 - α_{2n-1})(1 - α_{2n}²)(1 + α_{2n+1})`,
/// `b_{n+1} = (1 - α_{2n-1}) α_{2n} - (1 + α_{2n-1}) α_{2n-2}`.
pub fn forward(alpha: &VerblunskySeq) -> Result<JacobiParams> {
    check_alpha(&alpha.values)?;
    let v = &alpha.values;
    let rows = rows_for(v.len());
    let mut a = Vec::with_capacity(rows);
    let mut b = Vec::with_capacity(rows);
    for n in 0..rows as i64 {
        let am = alpha_at(v, 2 * n - 1);
        let a0 = alpha_at(v, 2 * n);
        let ap = alpha_at(v, 2 * n + 1);
        let amm = alpha_at(v, 2 * n - 2);
        a.push(((1.0 - am) * (1.0 - a0 * a0) * (1.0 + ap)).sqrt());
        b.push((1.0 - am) * a0 - (1.0 + am) * amm);
    }
    JacobiParams::new(a, b)
}

fn suffix_sums(terms: Vec<f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = terms;
    for t in out.iter_mut().rev() {
        acc += *t;
        *t = acc;
    }
    out
}

fn k_terms(v: &[f64], rows: usize) -> Vec<f64> {
    (0..rows as i64)
        .map(|k| {
            let e = alpha_at(v, 2 * k);
            let m = alpha_at(v, 2 * k - 1);
            let p = alpha_at(v, 2 * k + 1);
            let e2 = e * e;
            e2 + m * p - e2 * (m - p) - e2 * m * p
        })
        .collect()
}

fn l_terms(v: &[f64], rows: usize) -> Vec<f64> {
    (0..rows as i64)
        .map(|k| alpha_at(v, 2 * k - 1) * (alpha_at(v, 2 * k) + alpha_at(v, 2 * k - 2)))
        .collect()
}

/// `K(α)_n = Σ_{k≥n} [α_{2k}² + α_{2k-1}α_{2k+1} - α_{2k}²(α_{2k-1} - α_{2k+1})
/// - α_{2k}² α_{2k-1} α_{2k+1}]`, for `n ≥ 0`.
pub fn k_map(alpha: &VerblunskySeq) -> DecaySeq {
    let rows = rows_for(alpha.values.len());
    DecaySeq {
        offset: 0,
        values: suffix_sums(k_terms(&alpha.values, rows)),
    }
}

/// `L(α)_n = Σ_{k≥n} α_{2k-1}(α_{2k} + α_{2k-2})`, for `n ≥ 0`.
pub fn l_map(alpha: &VerblunskySeq) -> DecaySeq {
    let rows = rows_for(alpha.values.len());
    DecaySeq {
        offset: 0,
        values: suffix_sums(l_terms(&alpha.values, rows)),
    }
}

/// `λ_n = α_{2n-2} + L(α)_n`, `κ_n = α_{2n-1} + K(α)_n`, for `n ≥ 0`.
pub fn expanded_tails(alpha: &VerblunskySeq) -> Result<(DecaySeq, DecaySeq)> {
    check_alpha(&alpha.values)?;
    let v = &alpha.values;
    let rows = rows_for(v.len());
    let l = suffix_sums(l_terms(v, rows));
    let k = suffix_sums(k_terms(v, rows));
    let lambda = (0..rows)
        .map(|n| alpha_at(v, 2 * n as i64 - 2) + l[n])
        .collect();
    let kappa = (0..rows)
        .map(|n| alpha_at(v, 2 * n as i64 - 1) + k[n])
        .collect();
    Ok((DecaySeq::new(0, lambda)?, DecaySeq::new(0, kappa)?))
}

/// One application of the fixed-point map on raw coefficients:
/// `F(β)_{2m} = λ_{m+1} - L(β)_{m+1}`, `F(β)_{2m+1} = κ_{m+1} - K(β)_{m+1}`.
///
/// Only the tail data with `n ≥ 1` enters, so `β_{-1}`, `β_{-2}` never appear.
fn apply_f(lambda: &DecaySeq, kappa: &DecaySeq, beta: &[f64]) -> Vec<f64> {
    let data_rows = lambda.end().max(kappa.end()).max(1) as usize;
    let rows = data_rows.max(rows_for(beta.len())) + 1;
    let l = suffix_sums(l_terms(beta, rows));
    let k = suffix_sums(k_terms(beta, rows));
    let mut out = Vec::with_capacity(2 * rows);
    for m in 0..rows - 1 {
        out.push(lambda.get(m as i64 + 1) - l[m + 1]);
        out.push(kappa.get(m as i64 + 1) - k[m + 1]);
    }
    while out.last() == Some(&0.0) {
        out.pop();
    }
    out
}

/// The fixed-point map as a sequence indexed from 0.
pub fn f_map(lambda: &DecaySeq, kappa: &DecaySeq, beta: &DecaySeq) -> DecaySeq {
    let raw: Vec<f64> = (0..beta.end().max(0)).map(|n| beta.get(n)).collect();
    DecaySeq {
        offset: 0,
        values: apply_f(lambda, kappa, &raw),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub contraction_check: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
            contraction_check: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidOptions(format!("tol = {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOptions("max_iter = 0".into()));
        }
        Ok(())
    }
}

/// Consecutive non-contracting steps tolerated before giving up.
pub const CONTRACTION_WINDOW: usize = 10;
/// A step counts as contracting when it shrinks by at least this ratio.
pub const CONTRACTION_RATIO: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub alpha: VerblunskySeq,
    pub iterations: usize,
    /// `sup_n |α_n - F(α)_n|`.
    pub residual: f64,
}

fn sup_diff(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().max(y.len());
    (0..n)
        .map(|i| (x.get(i).copied().unwrap_or(0.0) - y.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Banach iteration `α ← F(α)` from `α = 0`.
pub fn solve(lambda: &DecaySeq, kappa: &DecaySeq, opts: SolverOptions) -> Result<Solution> {
    solve_from(lambda, kappa, &VerblunskySeq::zero(), opts)
}

/// Banach iteration from an arbitrary starting point.
pub fn solve_from(
    lambda: &DecaySeq,
    kappa: &DecaySeq,
    start: &VerblunskySeq,
    opts: SolverOptions,
) -> Result<Solution> {
    opts.validate()?;
    let mut beta = start.values.clone();
    let mut prev_step = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=opts.max_iter {
        let next = apply_f(lambda, kappa, &beta);
        let step = sup_diff(&next, &beta);
        if !step.is_finite() || next.iter().any(|a| !(a.abs() < 1.0)) {
            return Err(Error::NoContraction {
                iterations: it,
                last_step: step,
            });
        }
        if step <= opts.tol {
            return Ok(Solution {
                alpha: VerblunskySeq { values: beta },
                iterations: it,
                residual: step,
            });
        }
        if step >= CONTRACTION_RATIO * prev_step {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if opts.contraction_check && stalled >= CONTRACTION_WINDOW {
            return Err(Error::NoContraction {
                iterations: it,
                last_step: step,
            });
        }
        prev_step = step;
        beta = next;
    }
    Err(Error::MaxIterExceeded(opts.max_iter))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stripped {
    /// Number of leading rows removed.
    pub n_stripped: usize,
    pub solution: Solution,
    /// `‖λ^{(N)}‖ + ‖κ^{(N)}‖` in the requested space.
    pub tail_norm: f64,
}

impl Stripped {
    /// The operator `J̃` produced by the recovered coefficients: it agrees with
    /// `J^{(N)}` from the second row on, with a modified top row.
    pub fn operator(&self) -> JacobiParams {
        forward(&self.solution.alpha).expect("solver keeps |α| < 1")
    }
}

/// Strips `N = 0, 1, 2, …` leading rows until the solver converges on the
/// tails of the stripped operator.
pub fn strip_and_solve(
    j: &JacobiParams,
    space: SpaceSpec,
    opts: SolverOptions,
) -> Result<Stripped> {
    let (lambda, kappa) = j.tail_sums();
    strip_and_solve_tails(&lambda, &kappa, space, opts)
}

/// [`strip_and_solve`] driven directly by the tail sums `(λ_n, κ_n)`, `n ≥ 0`.
pub fn strip_and_solve_tails(
    lambda: &DecaySeq,
    kappa: &DecaySeq,
    space: SpaceSpec,
    opts: SolverOptions,
) -> Result<Stripped> {
    space.validate()?;
    opts.validate()?;
    let rows = lambda.end().max(kappa.end()).max(0) as usize;
    let mut last_err = None;
    for n in 0..=rows {
        let lam = lambda.shifted_tail(n as i64);
        let kap = kappa.shifted_tail(n as i64);
        match solve(&lam, &kap, opts) {
            Ok(solution) => {
                return Ok(Stripped {
                    n_stripped: n,
                    tail_norm: norm(&lam, space) + norm(&kap, space),
                    solution,
                })
            }
            Err(e @ (Error::NoContraction { .. } | Error::MaxIterExceeded(_))) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(Error::MaxIterExceeded(opts.max_iter)))
}
