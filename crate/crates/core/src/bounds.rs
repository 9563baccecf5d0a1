//! Closed-form constants, thresholds and probability lower bounds for the
//! random sampling inequalities and the reconstruction theorem.
//!
//! Quantities that overflow for moderate `N` (`𝒜₁`, `𝒜₂`, covering numbers)
//! are carried in the log domain; probabilities are reported both raw
//! (possibly negative, i.e. vacuous) and clamped to `[0, 1]`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation tolerance for the lattice series.
pub const SERIES_TOL: f64 = 1e-12;

/// Every input of the theorems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub p: f64,
    pub q: f64,
    pub d: usize,
    pub r: usize,
    /// Shift truncation `N` of `V_N`.
    #[serde(rename = "N")]
    pub n_shift: usize,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Decay constant `c̃`.
    pub decay_c: f64,
    pub s1: f64,
    pub s2: f64,
    /// `𝒞_{ρ,1}`.
    pub rho_lower: f64,
    /// `𝒞_{ρ,2}`.
    pub rho_upper: f64,
    /// `‖ψ‖_{L^{1,1}(C_K)}`.
    pub psi_l11: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{name} must be positive and finite, got {v}")))
    }
}

impl SpaceParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 1.0 && v.is_finite()) {
                return Err(Error::InvalidExponent { p: self.p, q: self.q, reason: format!("{name} must lie in (1, ∞)") });
            }
        }
        if self.d == 0 || self.r == 0 {
            return Err(Error::OutOfRange("d and r must be at least 1".into()));
        }
        for (name, v) in [
            ("K1", self.k1),
            ("K2", self.k2),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("decay_c", self.decay_c),
            ("s1", self.s1),
            ("s2", self.s2),
            ("rho_lower", self.rho_lower),
            ("rho_upper", self.rho_upper),
            ("psi_l11", self.psi_l11),
        ] {
            positive(name, v)?;
        }
        if self.alpha1 > self.alpha2 {
            return Err(Error::OutOfRange(format!("alpha1 = {} exceeds alpha2 = {}", self.alpha1, self.alpha2)));
        }
        if self.rho_lower > self.rho_upper {
            return Err(Error::OutOfRange(format!(
                "rho_lower = {} exceeds rho_upper = {}",
                self.rho_lower, self.rho_upper
            )));
        }
        let floor = self.d as f64 + 1.0 - 1.0 / self.p - self.d as f64 / self.q;
        if self.s1 <= floor || self.s2 <= floor {
            return Err(Error::OutOfRange(format!("decay exponents s1 = {}, s2 = {} must exceed {floor}", self.s1, self.s2)));
        }
        Ok(())
    }

    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn q_conj(&self) -> f64 {
        self.q / (self.q - 1.0)
    }

    /// `(2K₁)^{q−1} (2K₂)^{d(p−1)}`.
    pub fn cuboid_factor(&self) -> f64 {
        (2.0 * self.k1).powf(self.q - 1.0) * (2.0 * self.k2).powf(self.d as f64 * (self.p - 1.0))
    }

    /// `(2N+1)^{d+1}`.
    pub fn shift_count(&self) -> f64 {
        (2.0 * self.n_shift as f64 + 1.0).powi(self.d as i32 + 1)
    }

    pub fn with_n_shift(&self, n_shift: usize) -> SpaceParams {
        SpaceParams { n_shift, ..self.clone() }
    }
}

/// `Σ_{k ∈ ℤ^dim} (1 + |k|_∞)^{−exponent}`, summed over shells `|k|_∞ = s`
/// with the tail from Euler–Maclaurin on the shell-count polynomial.
pub fn lattice_series(dim: usize, exponent: f64, tol: f64) -> Result<f64> {
    if dim == 0 {
        return Ok(1.0);
    }
    if !(exponent > dim as f64) {
        return Err(Error::DivergentSeries(format!(
            "lattice series over Z^{dim} with exponent {exponent} diverges (need exponent > {dim})"
        )));
    }
    // Shell count (2u−1)^dim − (2u−3)^dim with u = s+1, as a polynomial in u.
    let coeffs = shell_polynomial(dim);
    let shell = |u: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c);
    let mut cutoff = 256usize;
    loop {
        let mut sum = 1.0;
        for s in 1..=cutoff {
            let u = s as f64 + 1.0;
            sum += shell(u) * u.powf(-exponent);
        }
        let start = cutoff as f64 + 2.0;
        let mut tail = 0.0;
        let mut err = 0.0;
        for (j, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let (t, e) = power_tail(exponent - j as f64, start);
            tail += a * t;
            err += (a * e).abs();
        }
        if err < tol || cutoff >= 1 << 22 {
            return Ok(sum + tail);
        }
        cutoff *= 4;
    }
}

fn shell_polynomial(dim: usize) -> Vec<f64> {
    // (2u + a)^dim = Σ_j C(dim, j) 2^j a^{dim−j} u^j.
    let mut out = vec![0.0; dim + 1];
    let mut binom = 1.0;
    for (j, slot) in out.iter_mut().enumerate() {
        if j > 0 {
            binom *= (dim + 1 - j) as f64 / j as f64;
        }
        let rest = (dim - j) as i32;
        *slot = binom * 2f64.powi(j as i32) * ((-1f64).powi(rest) - (-3f64).powi(rest));
    }
    out
}

/// `Σ_{u ≥ start} u^{−t}` for `t > 1` by Euler–Maclaurin, with the
/// magnitude of the first omitted correction.
fn power_tail(t: f64, start: f64) -> (f64, f64) {
    let u = start;
    let value = u.powf(1.0 - t) / (t - 1.0) + 0.5 * u.powf(-t) + t * u.powf(-t - 1.0) / 12.0
        - t * (t + 1.0) * (t + 2.0) * u.powf(-t - 3.0) / 720.0;
    let next = t * (t + 1.0) * (t + 2.0) * (t + 3.0) * (t + 4.0) * u.powf(-t - 5.0) / 30240.0;
    (value, next)
}

fn check_series(params: &SpaceParams) -> Result<(f64, f64)> {
    let e1 = params.s1 * params.p_conj();
    let e2 = params.s2 * params.q_conj();
    if e1 <= 1.0 || e2 <= params.d as f64 {
        return Err(Error::DivergentSeries(format!(
            "need s1·p' > 1 and s2·q' > d, got {e1} and {e2} (d = {})",
            params.d
        )));
    }
    Ok((e1, e2))
}

/// `c* = 4c̃ / (2^{(p+q)/pq} α₁) · (Σ_ℤ …)^{1/p'} (Σ_{ℤ^d} …)^{1/q'}`.
pub fn c_star(params: &SpaceParams, series_tol: f64) -> Result<f64> {
    let (e1, e2) = check_series(params)?;
    let (p, q) = (params.p, params.q);
    let lead = 4.0 * params.decay_c / (2f64.powf((p + q) / (p * q)) * params.alpha1);
    Ok(lead
        * lattice_series(1, e1, series_tol)?.powf((p - 1.0) / p)
        * lattice_series(params.d, e2, series_tol)?.powf((q - 1.0) / q))
}

/// `c' = 2^{1/p'+1/q'} c̃/α₁ · (Σ_ℤ …)^{1/p'} (Σ_{ℤ^d} …)^{1/q'}`.
pub fn c_prime(params: &SpaceParams, series_tol: f64) -> Result<f64> {
    let (e1, e2) = check_series(params)?;
    let (pc, qc) = (params.p_conj(), params.q_conj());
    Ok(2f64.powf(1.0 / pc + 1.0 / qc) * params.decay_c / params.alpha1
        * lattice_series(1, e1, series_tol)?.powf(1.0 / pc)
        * lattice_series(params.d, e2, series_tol)?.powf(1.0 / qc))
}

/// A positive quantity together with its logarithm; `value` may be `inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
    pub value: f64,
}

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        LogValue { ln, value: ln.exp() }
    }
}

/// Covering-number bound `exp(r(2N+1)^{d+1} ln(2c'/ε + 1))`.
pub fn covering_bound(n_shift: usize, eps: f64, r: usize, d: usize, c_prime: f64) -> Result<LogValue> {
    positive("eps", eps)?;
    let count = r as f64 * (2.0 * n_shift as f64 + 1.0).powi(d as i32 + 1);
    Ok(LogValue::from_ln(count * (2.0 * c_prime / eps).ln_1p()))
}

/// Bernstein tail `2 exp(−λ² / (2nmσ² + (2/3)Mλ))`.
pub fn bernstein_tail(lambda: f64, n: usize, m: usize, sigma2: f64, big_m: f64) -> Result<f64> {
    if lambda < 0.0 || sigma2 < 0.0 {
        return Err(Error::OutOfRange("lambda and sigma2 must be nonnegative".into()));
    }
    positive("M", big_m)?;
    if lambda.is_infinite() {
        return Ok(0.0);
    }
    let nm = n as f64 * m as f64;
    Ok(2.0 * (-(lambda * lambda) / (2.0 * nm * sigma2 + 2.0 / 3.0 * big_m * lambda)).exp())
}

/// `ln 𝒜₁ = ln 2 + r(2N+1)^{d+1} ln(4c* + 1)`.
pub fn ln_a1(params: &SpaceParams, c_star: f64) -> f64 {
    LN_2 + params.r as f64 * params.shift_count() * (4.0 * c_star).ln_1p()
}

/// `ln 𝒜₂` with `𝒜₂ = 4((2c*+¼)(c*+¼))^{r(2N+1)^{d+1}} / (3r(ln 2)²(2N+1)^{d+1})`.
pub fn ln_a2(params: &SpaceParams, c_star: f64) -> f64 {
    let count = params.r as f64 * params.shift_count();
    4f64.ln() + count * ((2.0 * c_star + 0.25) * (c_star + 0.25)).ln() - (3.0 * count * LN_2 * LN_2).ln()
}

/// Smallest admissible `λ` of the key lemma (strict inequality required).
pub fn lemma_threshold(params: &SpaceParams, n: usize, m: usize) -> f64 {
    let base = params.r as f64 * SQRT_2 * LN_2 * params.shift_count();
    let nm = n as f64 * m as f64;
    54.0 * base * (1.0 + (1.0 + 3.0 * nm / (2.0 * base)).sqrt()) * params.psi_l11
}

/// Tail bound of the key lemma.
pub fn lemma_tail(lambda: f64, params: &SpaceParams, n: usize, m: usize) -> Result<f64> {
    params.validate()?;
    let threshold = lemma_threshold(params, n, m);
    if !(lambda > threshold) {
        return Err(Error::BelowThreshold { lambda, threshold });
    }
    let cs = c_star(params, SERIES_TOL)?;
    let psi = params.psi_l11;
    let nm = n as f64 * m as f64;
    let l2 = lambda * lambda;
    let e1 = ln_a1(params, cs) - l2 / (4.0 * cs * psi * (2.0 * nm * cs * psi + lambda / 3.0));
    let e2 = ln_a2(params, cs) - l2 / (18.0 * SQRT_2 * psi * (81.0 * nm * psi + 2.0 * lambda));
    Ok(log_sum_exp(e1, e2).exp())
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// `1 − 𝒜₁e^{−nmβ₁} − 𝒜₂e^{−nmβ₂}` and the log of the subtracted mass.
fn probability(ln_a1: f64, beta1: f64, ln_a2: f64, beta2: f64, nm: f64) -> (f64, f64) {
    let ln_fail = log_sum_exp(ln_a1 - nm * beta1, ln_a2 - nm * beta2);
    (1.0 - ln_fail.exp(), ln_fail)
}

/// `(β₁, β₂)` for the sampling-inequality theorems, with
/// `x = γ𝒞_{ρ,1}(ratio)^{pq}`.
fn beta_pair(params: &SpaceParams, c_star: f64, x: f64) -> (f64, f64) {
    let dd = params.cuboid_factor();
    let b1 = (0.75 * x * x) / (dd * (6.0 * dd + x));
    let xc = x * c_star;
    let b2 = xc * xc / (dd * 18.0 * SQRT_2 * (81.0 * dd + 2.0 * xc));
    (b1, b2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Sampling inequality on `V_{N,ω,ψ}`.
    #[serde(rename = "thm1")]
    SamplingOmega,
    /// Sampling inequality on `V_{N,ψ}(Φ, μ, C_K)`.
    #[serde(rename = "thm2")]
    SamplingMu,
    /// Sampling inequality on `V_ψ(Φ, δ, C_K)`.
    #[serde(rename = "thm3")]
    SamplingDelta,
    /// Reconstruction by dual functions.
    #[serde(rename = "thm4")]
    Reconstruction,
}

/// Named constants of one theorem at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub params: SpaceParams,
    pub n: usize,
    pub m: usize,
    pub constants: BTreeMap<String, f64>,
    /// May be negative (vacuous) or `-inf` when `𝒜ᵢ` overflow.
    pub probability_raw: f64,
    pub probability: f64,
    /// `ln(𝒜₁e^{−nmβ₁} + 𝒜₂e^{−nmβ₂})`; always finite.
    pub ln_failure_bound: f64,
    pub meets_threshold: bool,
    pub flags: Vec<String>,
}

impl BoundReport {
    fn new(theorem: Theorem, params: &SpaceParams, n: usize, m: usize) -> Self {
        BoundReport {
            theorem,
            params: params.clone(),
            n,
            m,
            constants: BTreeMap::new(),
            probability_raw: f64::NAN,
            probability: f64::NAN,
            ln_failure_bound: f64::NAN,
            meets_threshold: false,
            flags: Vec::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    fn set(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    fn set_probability(&mut self, params: &SpaceParams, c_star: f64, beta1: f64, beta2: f64) {
        let la1 = ln_a1(params, c_star);
        let la2 = ln_a2(params, c_star);
        self.set("c_star", c_star);
        self.set("ln_A1", la1);
        self.set("A1", la1.exp());
        self.set("beta1", beta1);
        self.set("ln_A2", la2);
        self.set("A2", la2.exp());
        self.set("beta2", beta2);
        let (raw, ln_fail) = probability(la1, beta1, la2, beta2, self.n as f64 * self.m as f64);
        self.probability_raw = raw;
        self.probability = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, 1.0) };
        self.ln_failure_bound = ln_fail;
        if self.probability == 0.0 {
            self.flags.push("vacuous".into());
        }
    }
}

fn check_samples(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::OutOfRange("n and m must be at least 1".into()));
    }
    Ok(())
}

/// `γ𝒞_{ρ,1}(c*‖ψ‖)^{1−pq}ω^{pq} / ((2K₁)^{q−1}(2K₂)^{d(p−1)})`.
fn omega_gap(params: &SpaceParams, c_star: f64, gamma: f64, omega: f64) -> f64 {
    let pq = params.p * params.q;
    gamma * params.rho_lower * (c_star * params.psi_l11).powf(1.0 - pq) * omega.powf(pq) / params.cuboid_factor()
}

/// Sample-size threshold on `nm` for the `ω`-class theorem.
fn omega_nm_min(params: &SpaceParams, gap: f64) -> f64 {
    let psi = params.psi_l11;
    54.0 * params.r as f64 * SQRT_2 * LN_2 * params.shift_count() * psi / (gap * gap) * (2.0 * gap + 81.0 * psi)
}

/// Report for the sampling inequality on `V_{N,ω,ψ}`.
pub fn thm1_report(params: &SpaceParams, gamma: f64, omega: f64, n: usize, m: usize) -> Result<BoundReport> {
    params.validate()?;
    check_samples(n, m)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    if !(omega > 0.0 && omega <= params.psi_l11) {
        return Err(Error::OutOfRange(format!(
            "omega = {omega} must lie in (0, ‖ψ‖₁ = {}]",
            params.psi_l11
        )));
    }
    let cs = c_star(params, SERIES_TOL)?;
    let (p, q) = (params.p, params.q);
    let nm = n as f64 * m as f64;
    let gap = omega_gap(params, cs, gamma, omega);
    let scale = (n as f64).powf(1.0 / p) * (m as f64).powf(1.0 / q);
    let upper_lead = params.rho_upper * params.psi_l11
        / ((2.0 * params.k1).powf((1.0 - p) / p) * (2.0 * params.k2).powf(params.d as f64 * (1.0 - q) / q));
    let x = gamma * params.rho_lower * (omega / (cs * params.psi_l11)).powf(p * q);
    let (b1, b2) = beta_pair(params, cs, x);
    let nm_min = omega_nm_min(params, gap);

    let mut rep = BoundReport::new(Theorem::SamplingOmega, params, n, m);
    rep.set("gamma", gamma);
    rep.set("omega", omega);
    rep.set("A_gamma_omega", (1.0 - gamma) * gap / gamma * scale);
    rep.set("B_gamma_omega", upper_lead * nm + gap * nm);
    rep.set("nm_min", nm_min);
    rep.set_probability(params, cs, b1, b2);
    rep.meets_threshold = nm > nm_min;
    Ok(rep)
}

/// Report for the sampling inequality on `V_{N,ψ}(Φ, μ, C_K)`.
pub fn thm2_report(params: &SpaceParams, mu: f64, eta: f64, n: usize, m: usize) -> Result<BoundReport> {
    params.validate()?;
    check_samples(n, m)?;
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::OutOfRange(format!("mu = {mu} must lie in (0, 1]")));
    }
    let eta_max = mu * params.rho_lower;
    if !(eta > 0.0 && eta < eta_max) {
        return Err(Error::OutOfRange(format!("eta = {eta} must lie in (0, mu·rho_lower = {eta_max})")));
    }
    let cs = c_star(params, SERIES_TOL)?;
    let (p, q) = (params.p, params.q);
    let nm = n as f64 * m as f64;
    let psi = params.psi_l11;
    let frame = params.rho_upper
        * (2.0 * params.k1).powf((p - 1.0) / p)
        * (2.0 * params.k2).powf(params.d as f64 * (q - 1.0) / q);
    let nm_min = 54.0 * params.r as f64 * SQRT_2 * LN_2 * params.shift_count() / eta * (2.0 + 81.0 / eta);
    let b1 = 3.0 * eta * eta / (4.0 * cs * (6.0 * cs + eta));
    let b2 = eta * eta / (18.0 * SQRT_2 * (81.0 + 2.0 * eta));

    let mut rep = BoundReport::new(Theorem::SamplingMu, params, n, m);
    rep.set("mu", mu);
    rep.set("eta", eta);
    rep.set("lower", nm * psi * (mu * params.rho_lower - eta));
    rep.set("upper", nm * psi * (frame + eta));
    rep.set("nm_min", nm_min);
    rep.set_probability(params, cs, b1, b2);
    rep.meets_threshold = nm > nm_min;
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproxKind {
    /// Truncation level for `L^{p,q}(C_K)` approximation.
    N1,
    /// Truncation level for `L^{∞,∞}(C_K)` approximation.
    N2,
}

/// Truncation level `N₁` or `N₂` of the finite-dimensional approximation.
pub fn approx_n(k1: f64, k2: f64, eps: f64, params: &SpaceParams, which: ApproxKind) -> Result<f64> {
    positive("eps", eps)?;
    let (p, q) = (params.p, params.q);
    let d = params.d as f64;
    let s = params.s1.min(params.s2) + 1.0 / p + d / q - (d + 1.0);
    if s <= 0.0 {
        return Err(Error::OutOfRange(format!("approximation exponent s = {s} must be positive")));
    }
    let (pc, qc) = (params.p_conj(), params.q_conj());
    let g1 = params.s1 * pc - 1.0;
    let g2 = params.s2 * qc - d;
    if g1 <= 0.0 || g2 <= 0.0 {
        return Err(Error::DivergentSeries(format!("need s1·p' > 1 and s2·q' > d (got {g1}, {g2} past the bounds)")));
    }
    let g1 = g1.powf(1.0 / pc);
    let g2 = g2.powf(1.0 / qc);
    let dq = d.powf(1.0 / qc);
    let lead = match which {
        ApproxKind::N1 => k1.powf(1.0 / p) * k2.powf(d / q) * 2f64.powf(d + 1.0),
        ApproxKind::N2 => 2f64.powf(1.0 / pc + d / qc),
    } * params.decay_c
        / (params.alpha1 * eps);
    let t1 = dq * (1.0 + k2).powf((d - 1.0) / qc + 1.0 / pc) / g2;
    let t2 = (1.0 + k1).powf(d / qc) / g1;
    let t3 = dq * (1.0 + k2).powf((d - 1.0) / qc) / (g1 * g2);
    Ok(k1.max(k2) + (lead * (t1 + t2 + t3)).powf(1.0 / s))
}

/// Report for the sampling inequality on `V_ψ(Φ, δ, C_K)`. The truncation
/// level is derived from `N₁`, `N₂` and rounded up to an integer; the
/// `n_shift` of `params` is ignored.
pub fn thm3_report(
    params: &SpaceParams,
    delta: f64,
    eps: f64,
    gamma: f64,
    n: usize,
    m: usize,
) -> Result<BoundReport> {
    params.validate()?;
    check_samples(n, m)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange(format!("delta = {delta} must lie in (0, 1)")));
    }
    if !(eps > 0.0 && eps < 1.0 - delta) {
        return Err(Error::OutOfRange(format!("eps = {eps} must lie in (0, 1 − delta)")));
    }
    let pq = params.p * params.q;
    let keep = 1.0 - delta - eps;
    let gamma_max = 1.0 - eps / keep.powf(1.0 + pq);
    if !(gamma > 0.0 && gamma < gamma_max) {
        return Err(Error::OutOfRange(format!(
            "gamma = {gamma} must lie in (0, 1 − eps/(1−delta−eps)^(1+pq) = {gamma_max})"
        )));
    }
    let cs = c_star(params, SERIES_TOL)?;
    let dd = params.cuboid_factor();
    let (p, q) = (params.p, params.q);
    let (k1, k2) = (2.0 * params.k1, 2.0 * params.k2);
    let n1 = approx_n(k1, k2, eps, params, ApproxKind::N1)?;
    let n2 = approx_n(k1, k2, eps * params.rho_lower * cs.powf(1.0 - pq) / dd, params, ApproxKind::N2)?;
    let n_real = n1.max(n2);
    if n_real > usize::MAX as f64 / 4.0 {
        return Err(Error::OutOfRange(format!("truncation level {n_real} is not representable")));
    }
    let tp = params.with_n_shift(n_real.ceil() as usize);

    let nm = n as f64 * m as f64;
    let psi = params.psi_l11;
    let omega = keep * psi;
    let scale = (n as f64).powf(1.0 / p) * (m as f64).powf(1.0 / q);
    let base = params.rho_lower * cs.powf(1.0 - pq) / dd;
    let big_a = base * psi * ((1.0 - gamma) * keep.powf(1.0 + pq) - eps) * scale;
    let upper_lead =
        params.rho_upper / ((2.0 * params.k1).powf((1.0 - p) / p) * (2.0 * params.k2).powf(params.d as f64 * (1.0 - q) / q));
    let big_b = params.alpha2 * psi / params.alpha1 * (upper_lead + gamma * base * keep.powf(pq)) * nm + eps * base * psi * scale;
    let x = gamma * params.rho_lower * (omega / (cs * psi)).powf(pq);
    let (b1, b2) = beta_pair(&tp, cs, x);
    let nm_min = omega_nm_min(&tp, omega_gap(&tp, cs, gamma, omega));

    let mut rep = BoundReport::new(Theorem::SamplingDelta, &tp, n, m);
    rep.set("delta", delta);
    rep.set("eps", eps);
    rep.set("gamma", gamma);
    rep.set("omega", omega);
    rep.set("N1", n1);
    rep.set("N2", n2);
    rep.set("N", tp.n_shift as f64);
    rep.set("A", big_a);
    rep.set("B", big_b);
    rep.set("nm_min", nm_min);
    rep.set_probability(&tp, cs, b1, b2);
    rep.meets_threshold = nm > nm_min;
    if big_a <= 0.0 {
        rep.flags.push("A_nonpositive".into());
    }
    Ok(rep)
}

/// Report for the reconstruction theorem.
pub fn thm4_report(params: &SpaceParams, gamma: f64, beta_tilde: f64, n: usize, m: usize) -> Result<BoundReport> {
    params.validate()?;
    check_samples(n, m)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    positive("beta_tilde", beta_tilde)?;
    let cs = c_star(params, SERIES_TOL)?;
    let ratio = beta_tilde / (params.alpha2 * cs * params.psi_l11);
    let x = gamma * params.rho_lower * ratio.powf(params.p * params.q);
    let (b1, b2) = beta_pair(params, cs, x);
    let mut rep = BoundReport::new(Theorem::Reconstruction, params, n, m);
    rep.set("gamma", gamma);
    rep.set("beta_tilde", beta_tilde);
    rep.set_probability(params, cs, b1, b2);
    rep.meets_threshold = true;
    Ok(rep)
}

/// Raw success probability of the reconstruction theorem.
pub fn reconstruction_probability(params: &SpaceParams, gamma: f64, beta_tilde: f64, n: usize, m: usize) -> Result<f64> {
    Ok(thm4_report(params, gamma, beta_tilde, n, m)?.probability_raw)
}
